//! Orthonormal compactly supported wavelets on periodized dyadic grids.
//!
//! The filter bank is aligned so that the synthesized `φ_I` and `ψ_I^λ` are
//! centered on the cube `I` and supported in `m I`, with `m = taps - 1`.
//! A grid function at level `J` is identified with the element of `V_J`
//! whose scaling coefficients are `2^{-nJ/2}` times its samples; with that
//! identification the transforms are exactly orthogonal.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DyadicCube, GridBox, GridFunction, Label};

/// Tolerance for the orthonormality invariants of the taps.
pub const FILTER_TOLERANCE: f64 = 1e-12;
/// Relative tolerance for the discrete vanishing moments of the high-pass.
pub const MOMENT_TOLERANCE: f64 = 1e-10;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

// Extremal-phase Daubechies scaling filters, normalized to sum √2.
const DB2: [f64; 4] = [
    0.482962913144534143375,
    0.836516303737807905575,
    0.224143868042013381026,
    -0.129409522551260381174,
];
const DB3: [f64; 6] = [
    0.332670552950082615999,
    0.806891509311092576494,
    0.459877502118491570095,
    -0.135011020010254588696,
    -0.0854412738820266616928,
    0.0352262918857095366027,
];
const DB4: [f64; 8] = [
    0.230377813308896500863,
    0.714846570552915647090,
    0.630880767929858907882,
    -0.0279837694168598542114,
    -0.187034811719093084080,
    0.0308413818355607636272,
    0.0328830116668851997354,
    -0.0105974017850690321049,
];
const DB5: [f64; 10] = [
    0.160102397974192914481,
    0.603829269797189670540,
    0.724308528437772927728,
    0.138428145901320731505,
    -0.242294887066382031863,
    -0.0322448695846383746485,
    0.0775714938400457135231,
    -0.00624149021279827427419,
    -0.0125807519990819994685,
    0.00333572528547377127800,
];
const DB6: [f64; 12] = [
    0.111540743350109463621,
    0.494623890398453085677,
    0.751133908021095350679,
    0.315250351709197629086,
    -0.226264693965439820076,
    -0.129766867567261935562,
    0.0975016055873230491023,
    0.0275228655303057286255,
    -0.0315820393174860295651,
    0.000553842201161496139252,
    0.00477725751094551063964,
    -0.00107730108530847956485,
];
const DB7: [f64; 14] = [
    0.0778520540850091790200,
    0.396539319481917306539,
    0.729132090846235119917,
    0.469782287405193122472,
    -0.143906003928564975405,
    -0.224036184993874982638,
    0.0713092192668302647509,
    0.0806126091510830719129,
    -0.0380299369350144135796,
    -0.0165745416306668806541,
    0.0125509985560998406130,
    0.000429577972921366521132,
    -0.00180164070404749091527,
    0.000353713799974520248446,
];
const DB8: [f64; 16] = [
    0.0544158422431040099550,
    0.312871590914299970659,
    0.675630736297289806808,
    0.585354683654206712771,
    -0.0158291052563493056674,
    -0.284015542961546926516,
    0.000472484573913282770361,
    0.128747426620478458857,
    -0.0173693010018075461696,
    -0.0440882539307947515068,
    0.0139810279173982816487,
    0.00874609404740577671638,
    -0.00487035299345157431042,
    -0.000391740373376947046298,
    0.000675449406450569366370,
    -0.000117476784124769533731,
];

/// Names accepted by [`load_filter`].
pub const FILTER_NAMES: [&str; 8] = ["haar", "db2", "db3", "db4", "db5", "db6", "db7", "db8"];

/// Default filter for experiments.
pub const DEFAULT_FILTER: &str = "db3";

/// Low-pass/high-pass taps of an orthonormal two-channel filter bank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterPair {
    name: String,
    lowpass: Vec<f64>,
    highpass: Vec<f64>,
    vanishing_moments: usize,
    violates_moment_condition: bool,
}

/// Measured deviations from the filter invariants.
#[derive(Clone, Debug, Serialize)]
pub struct FilterResiduals {
    pub sum: f64,
    pub energy: f64,
    pub orthogonality: f64,
    pub cross: f64,
    pub moments: Vec<f64>,
}

impl FilterPair {
    /// Builds the pair from low-pass taps without validating them.
    /// The high-pass is the quadrature mirror `g_i = (-1)^i h_{m-i}`.
    pub fn from_lowpass_unchecked(name: &str, lowpass: Vec<f64>, vanishing_moments: usize) -> Self {
        let m = lowpass.len() - 1;
        let highpass = (0..=m)
            .map(|i| {
                if i % 2 == 0 {
                    lowpass[m - i]
                } else {
                    -lowpass[m - i]
                }
            })
            .collect();
        Self {
            name: name.to_string(),
            lowpass,
            highpass,
            vanishing_moments,
            violates_moment_condition: vanishing_moments < 2,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    pub fn highpass(&self) -> &[f64] {
        &self.highpass
    }

    pub fn vanishing_moments(&self) -> usize {
        self.vanishing_moments
    }

    /// `true` when `∫ x ψ(x) dx = 0` fails (only Haar).
    pub fn violates_moment_condition(&self) -> bool {
        self.violates_moment_condition
    }

    /// Support parameter `m = taps - 1`.
    pub fn support(&self) -> usize {
        self.lowpass.len() - 1
    }

    fn shift(&self) -> usize {
        (self.support() - 1) / 2
    }

    /// Copy with one low-pass tap moved by `delta` and the high-pass rebuilt.
    pub fn perturbed(&self, index: usize, delta: f64) -> FilterPair {
        let mut taps = self.lowpass.clone();
        let len = taps.len();
        taps[index % len] += delta;
        let mut out = Self::from_lowpass_unchecked(&self.name, taps, self.vanishing_moments);
        out.name = format!("{}+perturbed", self.name);
        out
    }

    pub fn residuals(&self) -> FilterResiduals {
        let h = &self.lowpass;
        let g = &self.highpass;
        let sum = (h.iter().sum::<f64>() - std::f64::consts::SQRT_2).abs();
        let energy = (h.iter().map(|v| v * v).sum::<f64>() - 1.0).abs();
        let len = h.len() as isize;
        let mut orthogonality: f64 = 0.0;
        let mut cross: f64 = 0.0;
        for shift in (-(len / 2)..=len / 2).map(|k| 2 * k) {
            let mut hh = 0.0;
            let mut hg = 0.0;
            for i in 0..len {
                let t = i + shift;
                if (0..len).contains(&t) {
                    hh += h[i as usize] * h[t as usize];
                    hg += h[i as usize] * g[t as usize];
                }
            }
            let target = if shift == 0 { 1.0 } else { 0.0 };
            orthogonality = orthogonality.max((hh - target).abs());
            cross = cross.max(hg.abs());
        }
        let moments = (0..self.vanishing_moments)
            .map(|p| {
                let (num, scale) = g.iter().enumerate().fold((0.0, 0.0), |(s, a), (i, gi)| {
                    let w = (i as f64).powi(p as i32) * gi;
                    (s + w, a + w.abs())
                });
                num.abs() / scale.max(f64::MIN_POSITIVE)
            })
            .collect();
        FilterResiduals {
            sum,
            energy,
            orthogonality,
            cross,
            moments,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r = self.residuals();
        let fail = |reason: String| {
            Err(Error::InvalidFilter {
                name: self.name.clone(),
                reason,
            })
        };
        if self.lowpass.len() < 2 || self.lowpass.len() % 2 != 0 {
            return fail(format!("tap count {} must be even", self.lowpass.len()));
        }
        if r.sum > FILTER_TOLERANCE {
            return fail(format!("sum of taps deviates from sqrt(2) by {:e}", r.sum));
        }
        if r.energy > FILTER_TOLERANCE {
            return fail(format!("energy deviates from 1 by {:e}", r.energy));
        }
        if r.orthogonality > FILTER_TOLERANCE || r.cross > FILTER_TOLERANCE {
            return fail(format!(
                "double-shift orthogonality residual {:e} (cross {:e})",
                r.orthogonality, r.cross
            ));
        }
        if let Some((p, v)) = r
            .moments
            .iter()
            .enumerate()
            .find(|(_, v)| **v > MOMENT_TOLERANCE)
        {
            return fail(format!("high-pass moment {p} is {v:e}"));
        }
        Ok(())
    }
}

/// Loads and validates a filter from the embedded catalog.
pub fn load_filter(name: &str) -> Result<FilterPair> {
    let (taps, moments): (&[f64], usize) = match name {
        "haar" | "db1" => (&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], 1),
        "db2" => (&DB2, 2),
        "db3" => (&DB3, 3),
        "db4" => (&DB4, 4),
        "db5" => (&DB5, 5),
        "db6" => (&DB6, 6),
        "db7" => (&DB7, 7),
        "db8" => (&DB8, 8),
        other => return Err(Error::UnknownFilter(other.to_string())),
    };
    let canonical = if name == "db1" { "haar" } else { name };
    let filter = FilterPair::from_lowpass_unchecked(canonical, taps.to_vec(), moments);
    filter.validate()?;
    Ok(filter)
}

/// The catalog as CSV rows `name,tap_index,lowpass_value`.
pub fn filter_catalog_csv() -> String {
    let mut out = String::from("name,tap_index,lowpass_value\n");
    for name in FILTER_NAMES {
        let f = load_filter(name).expect("catalog filters are valid");
        for (i, v) in f.lowpass().iter().enumerate() {
            let _ = writeln!(out, "{name},{i},{v:.16e}");
        }
    }
    out
}

/// Wavelet coefficients of a grid function between a coarse level `j0` and
/// the finest level `J`.
///
/// Details are stored densely per level and orientation, indexed by the
/// box-local cube index in row-major order; the scaling part holds
/// `⟨f, φ_I⟩` for the cubes of level `j0`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletCoeffs {
    filter: Arc<FilterPair>,
    domain: GridBox,
    coarse: i32,
    finest: i32,
    scaling: Vec<f64>,
    details: Vec<Vec<Vec<f64>>>,
}

impl WaveletCoeffs {
    pub fn zeros(filter: &FilterPair, domain: &GridBox, coarse: i32, finest: i32) -> Result<Self> {
        check_levels(domain, coarse, finest)?;
        let dims = domain.dims();
        let bands = (1 << dims) - 1;
        let count = |j: i32| -> Result<usize> { Ok(domain.cells_per_axis(j)?.pow(dims as u32)) };
        let scaling = vec![0.0; count(coarse)?];
        let details = (coarse..finest)
            .map(|j| Ok(vec![vec![0.0; count(j)?]; bands]))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            filter: Arc::new(filter.clone()),
            domain: domain.clone(),
            coarse,
            finest,
            scaling,
            details,
        })
    }

    /// Same basis and geometry, all coefficients zero.
    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        out.scaling.iter_mut().for_each(|v| *v = 0.0);
        for level in &mut out.details {
            for band in level {
                band.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        out
    }

    pub fn filter(&self) -> &FilterPair {
        &self.filter
    }

    pub fn domain(&self) -> &GridBox {
        &self.domain
    }

    pub fn dims(&self) -> usize {
        self.domain.dims()
    }

    pub fn coarse_level(&self) -> i32 {
        self.coarse
    }

    pub fn finest_level(&self) -> i32 {
        self.finest
    }

    pub fn cells_per_axis(&self, level: i32) -> usize {
        self.domain
            .cells_per_axis(level)
            .expect("level within range")
    }

    pub fn scaling(&self) -> &[f64] {
        &self.scaling
    }

    pub fn scaling_mut(&mut self) -> &mut [f64] {
        &mut self.scaling
    }

    pub fn detail(&self, level: i32, label: Label) -> &[f64] {
        &self.details[(level - self.coarse) as usize][label.index()]
    }

    pub fn detail_mut(&mut self, level: i32, label: Label) -> &mut [f64] {
        &mut self.details[(level - self.coarse) as usize][label.index()]
    }

    pub fn labels(&self) -> Vec<Label> {
        Label::all(self.dims())
    }

    /// Whether two coefficient sets expand in the same basis on the same grid.
    pub fn same_basis(&self, other: &WaveletCoeffs) -> bool {
        self.filter == other.filter
            && self.domain == other.domain
            && self.coarse == other.coarse
            && self.finest == other.finest
    }

    pub fn ensure_same_basis(&self, other: &WaveletCoeffs) -> Result<()> {
        if self.same_basis(other) {
            Ok(())
        } else {
            Err(Error::Geometry(
                "coefficient sets use different bases".into(),
            ))
        }
    }

    /// Box-local multi-index from a flat index at `level`.
    pub fn local_index(&self, level: i32, flat: usize) -> Vec<usize> {
        let n = self.cells_per_axis(level);
        let mut idx = vec![0; self.dims()];
        let mut rest = flat;
        for a in (0..self.dims()).rev() {
            idx[a] = rest % n;
            rest /= n;
        }
        idx
    }

    fn origin_offset(&self, level: i32) -> Vec<i64> {
        let scale = (2f64).powi(level);
        self.domain
            .origin()
            .iter()
            .map(|o| (o * scale).round() as i64)
            .collect()
    }

    /// The global dyadic cube of a stored entry.
    pub fn cube(&self, level: i32, flat: usize, label: Option<Label>) -> DyadicCube {
        let offset = self.origin_offset(level);
        let corner = self
            .local_index(level, flat)
            .iter()
            .zip(&offset)
            .map(|(&i, &o)| i as i64 + o)
            .collect();
        DyadicCube {
            level,
            corner,
            label,
        }
    }

    /// Flat storage index of a global cube, reduced periodically into the box.
    pub fn flat_index_of(&self, cube: &DyadicCube) -> Option<usize> {
        if cube.dims() != self.dims() {
            return None;
        }
        let n = self.domain.cells_per_axis(cube.level).ok()? as i64;
        let offset = self.origin_offset(cube.level);
        Some(
            cube.corner
                .iter()
                .zip(&offset)
                .fold(0i64, |acc, (&k, &o)| acc * n + (k - o).rem_euclid(n)) as usize,
        )
    }

    /// Coefficient of a labelled detail cube, or of a scaling cube at `j0`.
    pub fn get(&self, cube: &DyadicCube) -> Option<f64> {
        let flat = self.flat_index_of(cube)?;
        match cube.label {
            None if cube.level == self.coarse => Some(self.scaling[flat]),
            Some(label) if (self.coarse..self.finest).contains(&cube.level) => {
                Some(self.detail(cube.level, label)[flat])
            }
            _ => None,
        }
    }

    pub fn set(&mut self, cube: &DyadicCube, value: f64) -> Result<()> {
        let flat = self
            .flat_index_of(cube)
            .ok_or_else(|| Error::Domain(format!("cube {cube:?} does not match the basis")))?;
        match cube.label {
            None if cube.level == self.coarse => self.scaling[flat] = value,
            Some(label) if (self.coarse..self.finest).contains(&cube.level) && label.0 > 0 => {
                self.detail_mut(cube.level, label)[flat] = value
            }
            _ => {
                return Err(Error::Domain(format!(
                    "cube {cube:?} outside levels [{}, {})",
                    self.coarse, self.finest
                )))
            }
        }
        Ok(())
    }

    /// Nonzero detail entries as `(level, label, flat, value)`.
    pub fn iter_details(&self) -> impl Iterator<Item = (i32, Label, usize, f64)> + '_ {
        self.details
            .iter()
            .enumerate()
            .flat_map(move |(li, bands)| {
                let level = self.coarse + li as i32;
                bands.iter().enumerate().flat_map(move |(bi, band)| {
                    band.iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(move |(flat, &v)| (level, Label(bi as u8 + 1), flat, v))
                })
            })
    }

    /// Nonzero entries (details and scaling) keyed by global cube.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (DyadicCube, f64)> + '_ {
        let scaling = self
            .scaling
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(move |(flat, &v)| (self.cube(self.coarse, flat, None), v));
        let details = self
            .iter_details()
            .map(move |(level, label, flat, v)| (self.cube(level, flat, Some(label)), v));
        scaling.chain(details)
    }

    pub fn detail_energy(&self) -> f64 {
        self.details.iter().flatten().flatten().map(|v| v * v).sum()
    }

    pub fn energy(&self) -> f64 {
        self.detail_energy() + self.scaling.iter().map(|v| v * v).sum::<f64>()
    }

    /// Energy of the details at one level (all orientations).
    pub fn level_energy(&self, level: i32) -> f64 {
        self.details[(level - self.coarse) as usize]
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum()
    }

    pub fn max_abs_scaling(&self) -> f64 {
        self.scaling.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn clear_scaling(&mut self) {
        self.scaling.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Keeps only the detail entries accepted by `keep`; clears the scaling part.
    pub fn restrict_details(
        &self,
        mut keep: impl FnMut(i32, Label, usize) -> bool,
    ) -> WaveletCoeffs {
        let mut out = self.zeros_like();
        for (level, label, flat, v) in self.iter_details() {
            if keep(level, label, flat) {
                out.detail_mut(level, label)[flat] = v;
            }
        }
        out
    }

    /// Elementwise linear combination `a·self + b·other`.
    pub fn axpby(&self, a: f64, other: &WaveletCoeffs, b: f64) -> Result<WaveletCoeffs> {
        self.ensure_same_basis(other)?;
        let mut out = self.clone();
        for (x, y) in out.scaling.iter_mut().zip(&other.scaling) {
            *x = a * *x + b * y;
        }
        for (lx, ly) in out.details.iter_mut().zip(&other.details) {
            for (bx, by) in lx.iter_mut().zip(ly) {
                for (x, y) in bx.iter_mut().zip(by) {
                    *x = a * *x + b * y;
                }
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, factor: f64) -> WaveletCoeffs {
        let mut out = self.clone();
        out.scaling.iter_mut().for_each(|v| *v *= factor);
        for level in &mut out.details {
            for band in level {
                band.iter_mut().for_each(|v| *v *= factor);
            }
        }
        out
    }

    /// Synthesis with the scaling part and the details of levels below `level`
    /// kept: the samples of `P_level f`.
    pub fn approximation(&self, level: i32) -> Result<GridFunction> {
        self.check_level(level, self.finest)?;
        inverse_filtered(self, |j| j < level, true)
    }

    /// Samples of `Q_level f`.
    pub fn detail_part(&self, level: i32) -> Result<GridFunction> {
        self.check_level(level, self.finest - 1)?;
        inverse_filtered(self, |j| j == level, false)
    }

    fn check_level(&self, level: i32, hi: i32) -> Result<()> {
        if level < self.coarse || level > hi {
            return Err(Error::LevelOutOfRange {
                level,
                lo: self.coarse,
                hi,
            });
        }
        Ok(())
    }
}

fn check_levels(domain: &GridBox, coarse: i32, finest: i32) -> Result<()> {
    let lo = domain.coarsest_level();
    if coarse < lo || coarse >= finest {
        return Err(Error::LevelOutOfRange {
            level: coarse,
            lo,
            hi: finest - 1,
        });
    }
    domain.cells_per_axis(finest)?;
    Ok(())
}

fn analysis_line(filter: &FilterPair, fine: &[f64], approx: &mut [f64], detail: &mut [f64]) {
    let nf = fine.len();
    let s = filter.shift();
    let (h, g) = (filter.lowpass(), filter.highpass());
    for k in 0..approx.len() {
        let base = 2 * k + nf * (1 + s / nf) - s;
        let (mut a, mut d) = (0.0, 0.0);
        for i in 0..h.len() {
            let v = fine[(base + i) % nf];
            a += h[i] * v;
            d += g[i] * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
}

fn synthesis_line(filter: &FilterPair, approx: &[f64], detail: &[f64], fine: &mut [f64]) {
    let nf = fine.len();
    let s = filter.shift();
    let (h, g) = (filter.lowpass(), filter.highpass());
    fine.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..approx.len() {
        let base = 2 * k + nf * (1 + s / nf) - s;
        let (a, d) = (approx[k], detail[k]);
        for i in 0..h.len() {
            fine[(base + i) % nf] += h[i] * a + g[i] * d;
        }
    }
}

/// Applies a one-level transform along every line of `axis` in an
/// `n`-per-axis row-major array. The forward direction writes `[low | high]`
/// halves along the axis; the inverse reads that layout.
fn transform_axis(
    filter: &FilterPair,
    data: &mut [f64],
    n: usize,
    dims: usize,
    axis: usize,
    forward: bool,
) {
    let stride = n.pow((dims - 1 - axis) as u32);
    let outer = n.pow(axis as u32);
    let half = n / 2;
    let mut line = vec![0.0; n];
    let mut lo = vec![0.0; half];
    let mut hi = vec![0.0; half];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * n * stride + inner;
            if forward {
                for t in 0..n {
                    line[t] = data[base + t * stride];
                }
                analysis_line(filter, &line, &mut lo, &mut hi);
                for t in 0..half {
                    data[base + t * stride] = lo[t];
                    data[base + (t + half) * stride] = hi[t];
                }
            } else {
                for t in 0..half {
                    lo[t] = data[base + t * stride];
                    hi[t] = data[base + (t + half) * stride];
                }
                synthesis_line(filter, &lo, &hi, &mut line);
                for t in 0..n {
                    data[base + t * stride] = line[t];
                }
            }
        }
    }
}

/// Visits the `half^dims` block of an `n`-per-axis array selected by `band`
/// (bit `a` picks the upper half along axis `a`), in row-major block order.
fn for_each_block_index(n: usize, dims: usize, band: usize, mut visit: impl FnMut(usize, usize)) {
    let half = n / 2;
    let count = half.pow(dims as u32);
    for b in 0..count {
        let mut rest = b;
        let mut flat = 0;
        let mut mult = 1;
        for a in (0..dims).rev() {
            let i = rest % half;
            rest /= half;
            let i = if band >> a & 1 == 1 { i + half } else { i };
            flat += i * mult;
            mult *= n;
        }
        visit(b, flat);
    }
}

/// Forward periodized DWT from the finest level of `f` down to `coarse`.
pub fn dwt_forward(f: &GridFunction, filter: &FilterPair, coarse: i32) -> Result<WaveletCoeffs> {
    let finest = f.level();
    let domain = f.domain();
    check_levels(domain, coarse, finest)?;
    if !domain.is_aligned(coarse) {
        return Err(Error::Geometry(format!(
            "box origin {:?} is not aligned to dyadic level {coarse}",
            domain.origin()
        )));
    }
    let dims = f.dims();
    let mut out = WaveletCoeffs::zeros(filter, domain, coarse, finest)?;
    let norm = f.cell_volume().sqrt();
    let mut approx: Vec<f64> = f.samples().iter().map(|v| v * norm).collect();
    let mut n = f.samples_per_axis();
    for level in (coarse..finest).rev() {
        for axis in 0..dims {
            transform_axis(filter, &mut approx, n, dims, axis, true);
        }
        let half = n / 2;
        for band in 1..(1usize << dims) {
            let dst = out.detail_mut(level, Label(band as u8));
            for_each_block_index(n, dims, band, |b, flat| dst[b] = approx[flat]);
        }
        let mut next = vec![0.0; half.pow(dims as u32)];
        for_each_block_index(n, dims, 0, |b, flat| next[b] = approx[flat]);
        approx = next;
        n = half;
    }
    out.scaling = approx;
    Ok(out)
}

fn inverse_filtered(
    c: &WaveletCoeffs,
    keep_level: impl Fn(i32) -> bool,
    keep_scaling: bool,
) -> Result<GridFunction> {
    let dims = c.dims();
    let mut approx = if keep_scaling {
        c.scaling.clone()
    } else {
        vec![0.0; c.scaling.len()]
    };
    let mut n = c.cells_per_axis(c.coarse);
    for level in c.coarse..c.finest {
        let fine_n = 2 * n;
        let mut buf = vec![0.0; fine_n.pow(dims as u32)];
        for_each_block_index(fine_n, dims, 0, |b, flat| buf[flat] = approx[b]);
        if keep_level(level) {
            for band in 1..(1usize << dims) {
                let src = c.detail(level, Label(band as u8));
                for_each_block_index(fine_n, dims, band, |b, flat| buf[flat] = src[b]);
            }
        }
        for axis in (0..dims).rev() {
            transform_axis(&c.filter, &mut buf, fine_n, dims, axis, false);
        }
        approx = buf;
        n = fine_n;
    }
    let scale = (2f64).powi(c.finest).powi(dims as i32).sqrt();
    approx.iter_mut().for_each(|v| *v *= scale);
    Ok(GridFunction::from_parts_unchecked(
        c.domain.clone(),
        c.finest,
        approx,
    ))
}

/// Inverse periodized DWT back to the finest level.
pub fn dwt_inverse(c: &WaveletCoeffs) -> GridFunction {
    inverse_filtered(c, |_| true, true).expect("levels are consistent by construction")
}

/// Which orthogonal projection [`project`] computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    /// `P_j`, onto `V_j`.
    P,
    /// `Q_j`, onto `W_j`.
    Q,
}

/// Samples of `P_j f` or `Q_j f` on the grid of `f`.
pub fn project(
    f: &GridFunction,
    filter: &FilterPair,
    level: i32,
    part: Part,
) -> Result<GridFunction> {
    let finest = f.level();
    let lo = f.domain().coarsest_level();
    match part {
        Part::P => {
            if level < lo || level > finest {
                return Err(Error::LevelOutOfRange {
                    level,
                    lo,
                    hi: finest,
                });
            }
            if level == finest {
                return Ok(f.clone());
            }
            dwt_forward(f, filter, level)?.approximation(level)
        }
        Part::Q => {
            if level < lo || level >= finest {
                return Err(Error::LevelOutOfRange {
                    level,
                    lo,
                    hi: finest - 1,
                });
            }
            dwt_forward(f, filter, level)?.detail_part(level)
        }
    }
}

/// Samples of `φ_I` (unlabelled cube) or `ψ_I^λ` on a level-`finest` grid.
/// Cubes outside the box are reduced periodically.
pub fn synthesize(
    filter: &FilterPair,
    domain: &GridBox,
    finest: i32,
    cube: &DyadicCube,
) -> Result<GridFunction> {
    if cube.dims() != domain.dims() {
        return Err(Error::Geometry(
            "cube dimension differs from the box".into(),
        ));
    }
    let lo = domain.coarsest_level();
    let hi = if cube.label.is_some() {
        finest - 1
    } else {
        finest
    };
    if cube.level < lo || cube.level > hi {
        return Err(Error::LevelOutOfRange {
            level: cube.level,
            lo,
            hi,
        });
    }
    if cube.level == finest {
        // φ_I at the finest level is the scaled indicator of one cell.
        let mut f = GridFunction::zeros(domain.clone(), finest)?;
        let n = f.samples_per_axis() as i64;
        let offset: Vec<i64> = domain
            .origin()
            .iter()
            .map(|o| (o * (2f64).powi(finest)).round() as i64)
            .collect();
        let idx: Vec<usize> = cube
            .corner
            .iter()
            .zip(&offset)
            .map(|(&k, &o)| (k - o).rem_euclid(n) as usize)
            .collect();
        let flat = f.flat_index(&idx);
        f.samples_mut()[flat] = f.cell_volume().sqrt().recip();
        return Ok(f);
    }
    let mut c = WaveletCoeffs::zeros(filter, domain, cube.level, finest)?;
    c.set(cube, 1.0)?;
    Ok(dwt_inverse(&c))
}

/// Per-level samples of the 1D `φ` and `ψ` for the cube with local index 0,
/// used to evaluate tensor basis functions as translated products.
#[derive(Clone, Debug)]
pub struct Basis {
    filter: FilterPair,
    domain: GridBox,
    coarse: i32,
    finest: i32,
    n_fine: usize,
    levels: Vec<LevelTemplate>,
}

#[derive(Clone, Debug)]
struct LevelTemplate {
    phi: Vec<f64>,
    psi: Vec<f64>,
    /// Fine-index offset of the support window from `k·2^{J-j}`.
    start: i64,
    len: usize,
}

impl Basis {
    pub fn new(filter: &FilterPair, domain: &GridBox, coarse: i32, finest: i32) -> Result<Self> {
        check_levels(domain, coarse, finest)?;
        let line = GridBox::new(vec![0.0], domain.side())?;
        let n_fine = line.cells_per_axis(finest)?;
        let m = filter.support() as i64;
        let s = filter.shift() as i64;
        let mut levels = Vec::new();
        for level in coarse..=finest {
            let phi =
                synthesize(filter, &line, finest, &DyadicCube::new(level, vec![0]))?.into_samples();
            let psi = if level < finest {
                synthesize(
                    filter,
                    &line,
                    finest,
                    &DyadicCube::new(level, vec![0]).with_label(Label(1)),
                )?
                .into_samples()
            } else {
                vec![0.0; n_fine]
            };
            let d = 1i64 << (finest - level);
            let width = (m * (d - 1) + 1) as usize;
            levels.push(LevelTemplate {
                phi,
                psi,
                start: -s * (d - 1),
                len: width.min(n_fine),
            });
        }
        Ok(Self {
            filter: filter.clone(),
            domain: domain.clone(),
            coarse,
            finest,
            n_fine,
            levels,
        })
    }

    pub fn for_coeffs(c: &WaveletCoeffs) -> Result<Self> {
        Self::new(c.filter(), c.domain(), c.coarse_level(), c.finest_level())
    }

    pub fn filter(&self) -> &FilterPair {
        &self.filter
    }

    pub fn domain(&self) -> &GridBox {
        &self.domain
    }

    pub fn finest_level(&self) -> i32 {
        self.finest
    }

    pub fn samples_per_axis(&self) -> usize {
        self.n_fine
    }

    fn template(&self, level: i32) -> &LevelTemplate {
        &self.levels[(level - self.coarse) as usize]
    }

    /// Samples of the 1D `φ` (or `ψ` when `high`) of the cube with local
    /// index 0 at `level`, over one axis of the finest grid.
    pub fn line(&self, level: i32, high: bool) -> &[f64] {
        let t = self.template(level);
        if high {
            &t.psi
        } else {
            &t.phi
        }
    }

    /// 1D factor of level `level` (`high` selects ψ) at periodic fine index.
    pub fn factor(&self, level: i32, high: bool, local: usize, fine_index: usize) -> f64 {
        let t = self.template(level);
        let d = 1usize << (self.finest - level);
        let n = self.n_fine;
        let rel = (fine_index + n - (local * d) % n) % n;
        if high {
            t.psi[rel]
        } else {
            t.phi[rel]
        }
    }

    /// Support window of the cube with local index `local` along one axis:
    /// the fine indices (periodic) where the 1D factor can be nonzero.
    pub fn window(&self, level: i32, local: usize) -> impl Iterator<Item = usize> + '_ {
        let t = self.template(level);
        let d = 1i64 << (self.finest - level);
        let n = self.n_fine as i64;
        let first = local as i64 * d + if (t.len as i64) < n { t.start } else { 0 };
        (0..t.len as i64).map(move |r| (first + r).rem_euclid(n) as usize)
    }

    /// Calls `visit(flat, value)` for every sample in the support of the basis
    /// function at `(level, local multi-index, label)`.
    pub fn for_each_value(
        &self,
        level: i32,
        local: &[usize],
        label: Option<Label>,
        mut visit: impl FnMut(usize, f64),
    ) {
        let n = self.n_fine;
        let dims = local.len();
        let high = |a: usize| label.is_some_and(|l| l.is_high(a));
        let w0: Vec<(usize, f64)> = self
            .window(level, local[0])
            .map(|i| (i, self.factor(level, high(0), local[0], i)))
            .filter(|(_, v)| *v != 0.0)
            .collect();
        if dims == 1 {
            for (i, v) in w0 {
                visit(i, v);
            }
            return;
        }
        let w1: Vec<(usize, f64)> = self
            .window(level, local[1])
            .map(|i| (i, self.factor(level, high(1), local[1], i)))
            .filter(|(_, v)| *v != 0.0)
            .collect();
        for &(i0, v0) in &w0 {
            for &(i1, v1) in &w1 {
                visit(i0 * n + i1, v0 * v1);
            }
        }
    }

    /// Samples of one basis function.
    pub fn evaluate(&self, level: i32, local: &[usize], label: Option<Label>) -> GridFunction {
        let mut out =
            GridFunction::zeros(self.domain.clone(), self.finest).expect("validated geometry");
        let samples = out.samples_mut();
        self.for_each_value(level, local, label, |flat, v| samples[flat] = v);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dilate_cube, inner_product, integrate};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_fn(domain: GridBox, level: i32, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = GridFunction::zeros(domain.clone(), level).unwrap().len();
        GridFunction::new(
            domain,
            level,
            (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn catalog_filters_validate() {
        for name in FILTER_NAMES {
            let f = load_filter(name).unwrap();
            assert_eq!(f.support(), f.lowpass().len() - 1);
            assert!((f.lowpass().iter().sum::<f64>() - std::f64::consts::SQRT_2).abs() < 1e-12);
        }
        assert!(matches!(load_filter("sym4"), Err(Error::UnknownFilter(_))));
    }

    #[test]
    fn haar_taps_and_flag() {
        let h = load_filter("haar").unwrap();
        assert_eq!(h.lowpass(), &[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert_eq!(h.support(), 1);
        assert!(h.violates_moment_condition());
        assert!(!load_filter("db2").unwrap().violates_moment_condition());
    }

    #[test]
    fn db2_has_two_vanishing_moments() {
        let f = load_filter("db2").unwrap();
        for p in 0..2 {
            let moment: f64 = f
                .highpass()
                .iter()
                .enumerate()
                .map(|(i, g)| (i as f64).powi(p) * g)
                .sum();
            assert!(moment.abs() < 1e-10, "moment {p} = {moment:e}");
        }
        let second: f64 = f
            .highpass()
            .iter()
            .enumerate()
            .map(|(i, g)| (i * i) as f64 * g)
            .sum();
        assert!(second.abs() > 1e-3);
    }

    #[test]
    fn perturbed_filter_fails_validation() {
        let f = load_filter("db3").unwrap().perturbed(2, 1e-3);
        assert!(matches!(f.validate(), Err(Error::InvalidFilter { .. })));
    }

    #[test]
    fn catalog_csv_rows() {
        let csv = filter_catalog_csv();
        let rows = csv.lines().count() - 1;
        assert_eq!(rows, 2 + (4..=16).step_by(2).sum::<usize>());
        assert!(csv.contains("db2,0,4.8296291314453416e-1"));
    }

    #[test]
    fn constants_have_no_details() {
        let haar = load_filter("haar").unwrap();
        let f = GridFunction::constant(GridBox::unit(1), 8, 2.5).unwrap();
        let c = dwt_forward(&f, &haar, 0).unwrap();
        assert_eq!(c.detail_energy(), 0.0);
        let db4 = load_filter("db4").unwrap();
        let c = dwt_forward(&f, &db4, 0).unwrap();
        assert!(c.detail_energy() < 1e-24);
    }

    #[test]
    fn haar_wavelet_is_a_single_coefficient() {
        let haar = load_filter("haar").unwrap();
        let f = GridFunction::from_fn(GridBox::unit(1), 6, |x| if x[0] < 0.5 { 1.0 } else { -1.0 })
            .unwrap();
        let c = dwt_forward(&f, &haar, 0).unwrap();
        let nonzero: Vec<_> = c.iter_nonzero().collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(
            nonzero[0].0,
            DyadicCube::new(0, vec![0]).with_label(Label(1))
        );
        assert!((nonzero[0].1 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn perfect_reconstruction_db4() {
        let db4 = load_filter("db4").unwrap();
        let f = random_fn(GridBox::unit(1), 10, 7);
        let c = dwt_forward(&f, &db4, 0).unwrap();
        let g = dwt_inverse(&c);
        let err = f.sub(&g).unwrap().sup_norm() / f.sup_norm();
        assert!(err <= 1e-10, "{err:e}");
        let parseval = (c.energy() - inner_product(&f, &f).unwrap()).abs() / c.energy();
        assert!(parseval < 1e-12);
    }

    #[test]
    fn reconstruction_in_2d_with_offset_box() {
        let db3 = load_filter("db3").unwrap();
        let domain = GridBox::new(vec![2.0, -4.0], 2.0).unwrap();
        let f = random_fn(domain, 5, 3);
        let c = dwt_forward(&f, &db3, -1).unwrap();
        assert_eq!(c.scaling().len(), 1);
        let g = dwt_inverse(&c);
        assert!(f.sub(&g).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn level_errors() {
        let db2 = load_filter("db2").unwrap();
        let f = random_fn(GridBox::unit(1), 5, 1);
        assert!(matches!(
            dwt_forward(&f, &db2, 5),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert!(matches!(
            dwt_forward(&f, &db2, -1),
            Err(Error::LevelOutOfRange { .. })
        ));
        assert!(project(&f, &db2, 5, Part::Q).is_err());
        assert!(project(&f, &db2, 6, Part::P).is_err());
        let misaligned = GridFunction::zeros(GridBox::new(vec![0.5], 1.0).unwrap(), 4).unwrap();
        assert!(matches!(
            dwt_forward(&misaligned, &db2, 0),
            Err(Error::Geometry(_))
        ));
        let cube = DyadicCube::new(5, vec![0]).with_label(Label(1));
        assert!(synthesize(&db2, &GridBox::unit(1), 5, &cube).is_err());
    }

    #[test]
    fn projections() {
        let db3 = load_filter("db3").unwrap();
        let f = random_fn(GridBox::unit(1), 8, 11);
        assert_eq!(project(&f, &db3, 8, Part::P).unwrap(), f);
        let one = GridFunction::constant(GridBox::unit(1), 8, 1.0).unwrap();
        for j in 0..8 {
            assert!(project(&one, &db3, j, Part::Q).unwrap().sup_norm() < 1e-13);
        }
        let energy = inner_product(&f, &f).unwrap();
        for j in 0..8 {
            let p = project(&f, &db3, j, Part::P).unwrap();
            let q = project(&f, &db3, j, Part::Q).unwrap();
            assert!(inner_product(&p, &q).unwrap().abs() <= 1e-10 * energy);
            let p_next = project(&f, &db3, j + 1, Part::P).unwrap();
            assert!(p_next.sub(&p.add(&q).unwrap()).unwrap().sup_norm() < 1e-12);
        }
    }

    #[test]
    fn haar_synthesis_shape() {
        let haar = load_filter("haar").unwrap();
        let psi = synthesize(
            &haar,
            &GridBox::unit(1),
            5,
            &DyadicCube::new(0, vec![0]).with_label(Label(1)),
        )
        .unwrap();
        for (i, v) in psi.samples().iter().enumerate() {
            let expected = if i < 16 { 1.0 } else { -1.0 };
            assert!((v - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn synthesized_support_lies_in_dilated_cube() {
        for name in ["haar", "db2", "db3", "db6"] {
            let filter = load_filter(name).unwrap();
            let m = filter.support() as u32;
            let domain = GridBox::unit(1);
            for (level, k) in [(4, 7), (5, 13), (3, 4)] {
                for label in [None, Some(Label(1))] {
                    let cube = DyadicCube {
                        level,
                        corner: vec![k],
                        label,
                    };
                    let f = synthesize(&filter, &domain, 10, &cube).unwrap();
                    let support = dilate_cube(&cube, m).unwrap();
                    assert!((inner_product(&f, &f).unwrap() - 1.0).abs() < 1e-12);
                    for (i, v) in f.samples().iter().enumerate() {
                        if !support.contains_point(&f.midpoint(i)) {
                            assert_eq!(*v, 0.0, "{name} {cube:?} sample {i}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn moment_condition_for_db2_and_up() {
        let domain = GridBox::unit(1);
        for name in ["db2", "db3", "db5", "db8"] {
            let filter = load_filter(name).unwrap();
            let cube = DyadicCube::new(4, vec![8]).with_label(Label(1));
            let psi = synthesize(&filter, &domain, 10, &cube).unwrap();
            let x = GridFunction::from_fn(domain.clone(), 10, |x| x[0]).unwrap();
            let moment = inner_product(&psi, &x).unwrap();
            assert!(moment.abs() < 1e-8, "{name}: {moment:e}");
            assert!(integrate(&psi).abs() < 1e-12);
        }
        let haar = load_filter("haar").unwrap();
        let psi = synthesize(
            &haar,
            &domain,
            10,
            &DyadicCube::new(4, vec![8]).with_label(Label(1)),
        )
        .unwrap();
        let x = GridFunction::from_fn(domain, 10, |x| x[0]).unwrap();
        assert!(inner_product(&psi, &x).unwrap().abs() > 1e-4);
    }

    #[test]
    fn scaling_functions_integrate_to_root_volume() {
        let db3 = load_filter("db3").unwrap();
        let domain = GridBox::unit(2);
        for level in 0..5 {
            let cube = DyadicCube::new(level, vec![0, 1 % (1 << level)]);
            let phi = synthesize(&db3, &domain, 6, &cube).unwrap();
            assert!((integrate(&phi) - cube.volume().sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn templates_match_direct_synthesis() {
        let db3 = load_filter("db3").unwrap();
        let domain = GridBox::new(vec![1.0, 0.0], 1.0).unwrap();
        let basis = Basis::new(&db3, &domain, 0, 6).unwrap();
        let template = WaveletCoeffs::zeros(&db3, &domain, 0, 6).unwrap();
        for (level, flat, label) in [
            (0, 0, Some(Label(3))),
            (2, 5, Some(Label(1))),
            (3, 40, Some(Label(2))),
            (4, 100, None),
            (6, 77, None),
        ] {
            let cube = template.cube(level, flat, label);
            let direct = synthesize(&db3, &domain, 6, &cube).unwrap();
            let local = template.local_index(level, flat);
            let via = basis.evaluate(level, &local, label);
            let err = direct.sub(&via).unwrap().sup_norm();
            assert!(err < 1e-12, "{cube:?}: {err:e}");
        }
    }

    #[test]
    fn two_dimensional_coefficients_match_tensor_inner_products() {
        let db2 = load_filter("db2").unwrap();
        let domain = GridBox::unit(2);
        let f = random_fn(domain.clone(), 5, 5);
        let c = dwt_forward(&f, &db2, 0).unwrap();
        let basis = Basis::for_coeffs(&c).unwrap();
        for (level, flat, label) in [
            (0, 0, Label(1)),
            (1, 3, Label(2)),
            (2, 9, Label(3)),
            (4, 200, Label(1)),
        ] {
            let local = c.local_index(level, flat);
            let psi = basis.evaluate(level, &local, Some(label));
            let direct = inner_product(&f, &psi).unwrap();
            assert!((direct - c.detail(level, label)[flat]).abs() < 1e-12);
        }
    }

    #[test]
    fn get_and_set_by_cube() {
        let db2 = load_filter("db2").unwrap();
        let domain = GridBox::new(vec![-2.0], 2.0).unwrap();
        let mut c = WaveletCoeffs::zeros(&db2, &domain, -1, 4).unwrap();
        let cube = DyadicCube::new(2, vec![-5]).with_label(Label(1));
        c.set(&cube, 3.0).unwrap();
        assert_eq!(c.get(&cube), Some(3.0));
        let listed: Vec<_> = c.iter_nonzero().collect();
        assert_eq!(listed, vec![(cube, 3.0)]);
        assert!(c
            .set(&DyadicCube::new(4, vec![0]).with_label(Label(1)), 1.0)
            .is_err());
    }
}
