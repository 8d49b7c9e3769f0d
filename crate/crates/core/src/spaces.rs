//! Function-space functionals: the Musielak-Orlicz function `θ`, the `L^log`
//! Luxemburg gauge, `L^p`, dyadic BMO and BMO⁺ from wavelet coefficients,
//! the H¹ square-function norm, a grand-maximal proxy and `H^log`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::fourier::{periodic_convolve, Spectral};
use crate::grid::{Cube, GridFunction};
use crate::wavelet::{dwt_forward, FilterPair, WaveletCoeffs};

/// Relative width of the final Luxemburg bisection bracket.
pub const LUXEMBURG_TOLERANCE: f64 = 1e-12;
/// Iteration cap of the Luxemburg bisection.
pub const LUXEMBURG_MAX_ITER: usize = 200;
/// Scaling coefficients below this fraction of the total norm count as zero
/// for the H¹ square function.
pub const SCALING_TOLERANCE: f64 = 1e-10;
/// Peak of `(|Φ| + |∇Φ|)(1+|x|)^{n+1}` after normalization.
pub const KERNEL_MARGIN: f64 = 0.9;

/// `θ(x, t) = t / (log(e + |x|) + log(e + t))`.
pub fn theta(x: &[f64], t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("theta requires t >= 0, got {t}")));
    }
    Ok(theta_with_weight(log_weight(x), t))
}

fn log_weight(x: &[f64]) -> f64 {
    (E + x.iter().map(|v| v * v).sum::<f64>().sqrt()).ln()
}

fn theta_with_weight(weight: f64, t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t / (weight + (E + t).ln())
    }
}

/// `∫ θ(x, |f(x)|/λ) dx` evaluated with precomputed position weights.
struct ModularIntegral {
    values: Vec<f64>,
    weights: Vec<f64>,
    cell_volume: f64,
}

impl ModularIntegral {
    fn new(f: &GridFunction) -> Self {
        let mut values = Vec::new();
        let mut weights = Vec::new();
        for (i, &v) in f.samples().iter().enumerate() {
            if v != 0.0 {
                values.push(v.abs());
                weights.push(log_weight(&f.midpoint(i)));
            }
        }
        Self {
            values,
            weights,
            cell_volume: f.cell_volume(),
        }
    }

    fn at(&self, lambda: f64) -> f64 {
        self.cell_volume
            * self
                .values
                .iter()
                .zip(&self.weights)
                .map(|(&v, &w)| theta_with_weight(w, v / lambda))
                .sum::<f64>()
    }
}

/// `∫ θ(x, |f(x)|/λ) dx`.
pub fn modular(f: &GridFunction, lambda: f64) -> f64 {
    ModularIntegral::new(f).at(lambda)
}

/// The Luxemburg gauge `inf{λ > 0 : ∫ θ(x, |f|/λ) dx ≤ 1}`.
///
/// Bisection runs on `log λ` over `[tiny, ‖f‖∞·|box| + 1]`; the upper end of
/// the final bracket is returned.
pub fn luxemburg_log_norm(f: &GridFunction) -> Result<f64> {
    if f.samples().iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("function has non-finite samples".into()));
    }
    let sup = f.sup_norm();
    if sup == 0.0 {
        return Ok(0.0);
    }
    let integral = ModularIntegral::new(f);
    let mut lo = f64::MIN_POSITIVE;
    let mut hi = sup * f.domain().volume() + 1.0;
    if integral.at(lo) <= 1.0 {
        return Err(Error::NoConvergence {
            iterations: 0,
            lo,
            hi,
        });
    }
    for _ in 0..LUXEMBURG_MAX_ITER {
        if hi / lo - 1.0 <= LUXEMBURG_TOLERANCE {
            return Ok(hi);
        }
        let mid = (lo * hi).sqrt();
        if integral.at(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        iterations: LUXEMBURG_MAX_ITER,
        lo,
        hi,
    })
}

/// Exponent of an `L^p` norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Lp {
    One,
    Two,
    Infinity,
}

pub fn lp_norm(f: &GridFunction, p: Lp) -> f64 {
    match p {
        Lp::One => f.cell_volume() * f.samples().iter().map(|v| v.abs()).sum::<f64>(),
        Lp::Two => (f.cell_volume() * f.samples().iter().map(|v| v * v).sum::<f64>()).sqrt(),
        Lp::Infinity => f.sup_norm(),
    }
}

/// Per-level tables of `Σ_λ |c_{I,λ}|²` over the cubes of the box, from the
/// coarsest box level up to `J - 1`. Index 0 is the coarsest level.
fn level_energies(c: &WaveletCoeffs) -> Vec<Vec<f64>> {
    let lo = c.domain().coarsest_level();
    let dims = c.dims();
    (lo..c.finest_level())
        .map(|level| {
            let count = c.cells_per_axis(level).pow(dims as u32);
            let mut e = vec![0.0; count];
            if level >= c.coarse_level() {
                for label in c.labels() {
                    for (slot, v) in e.iter_mut().zip(c.detail(level, label)) {
                        *slot += v * v;
                    }
                }
            }
            e
        })
        .collect()
}

/// Flat index of the parent of box-local cube `flat` at a level with `n`
/// cells per axis.
fn parent_index(flat: usize, n: usize, dims: usize) -> usize {
    let half = n / 2;
    let mut rest = flat;
    let mut out = 0;
    let mut mult = 1;
    for _ in 0..dims {
        out += (rest % n / 2) * mult;
        rest /= n;
        mult *= half;
    }
    out
}

/// For every dyadic cube `R` of the box at every level, the tree energy
/// `Σ_{I ⊂ R} Σ_λ |c_{I,λ}|²`. Index 0 is the coarsest box level.
pub fn tree_energies(c: &WaveletCoeffs) -> Vec<Vec<f64>> {
    let dims = c.dims();
    let lo = c.domain().coarsest_level();
    let mut e = level_energies(c);
    for li in (1..e.len()).rev() {
        let n = c.cells_per_axis(lo + li as i32);
        let (coarser, finer) = e.split_at_mut(li);
        let parent = &mut coarser[li - 1];
        for (flat, v) in finer[0].iter().enumerate() {
            parent[parent_index(flat, n, dims)] += v;
        }
    }
    e
}

/// Dyadic BMO norm `sup_R (|R|^{-1} Σ_{I⊂R} Σ_λ |⟨g, ψ_I^λ⟩|²)^{1/2}` over all
/// dyadic cubes `R` of the box.
pub fn bmo_wavelet_norm(c: &WaveletCoeffs) -> f64 {
    let lo = c.domain().coarsest_level();
    let dims = c.dims() as i32;
    tree_energies(c)
        .iter()
        .enumerate()
        .map(|(li, level)| {
            let inv_volume = (2f64).powi((lo + li as i32) * dims);
            level.iter().fold(0.0f64, |m, &v| m.max(v * inv_volume))
        })
        .fold(0.0, f64::max)
        .sqrt()
}

/// The unit cube `origin + [0,1)^n` anchored at the box origin.
pub fn default_base_cube(f: &GridFunction) -> Cube {
    Cube {
        lower: f.domain().origin().to_vec(),
        side: 1.0,
    }
}

/// `|f_ℚ| + ‖f‖_BMO` with `ℚ` the unit cube at the box origin.
pub fn bmo_plus_norm(f: &GridFunction, c: &WaveletCoeffs) -> Result<f64> {
    bmo_plus_norm_on(f, c, &default_base_cube(f))
}

/// `|f_ℚ| + ‖f‖_BMO` for a given base cube `ℚ`.
pub fn bmo_plus_norm_on(f: &GridFunction, c: &WaveletCoeffs, base: &Cube) -> Result<f64> {
    if !f.domain().as_cube().contains_cube(base) {
        return Err(Error::Domain(format!(
            "base cube {base:?} is not inside the box"
        )));
    }
    Ok(f.mean_over(base)?.abs() + bmo_wavelet_norm(c))
}

fn ensure_no_scaling(c: &WaveletCoeffs) -> Result<()> {
    let energy = c.energy().sqrt();
    if c.max_abs_scaling() > SCALING_TOLERANCE * energy.max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(
            "coefficients have a nonzero scaling part; subtract the coarse projection first".into(),
        ));
    }
    Ok(())
}

/// The square function `S(x) = (Σ_{I,λ} |c_{I,λ}|² |I|^{-1} χ_I(x))^{1/2}`
/// sampled on the finest grid. The scaling part is ignored.
pub fn square_function(c: &WaveletCoeffs) -> GridFunction {
    let dims = c.dims();
    let lo = c.domain().coarsest_level();
    let energies = level_energies(c);
    let mut acc: Vec<f64> = vec![0.0];
    for (li, level) in energies.iter().enumerate() {
        let j = lo + li as i32;
        let n = c.cells_per_axis(j);
        let weight = (2f64).powi(j * dims as i32);
        acc = level
            .iter()
            .enumerate()
            .map(|(flat, e)| {
                let inherited = if li == 0 {
                    0.0
                } else {
                    acc[parent_index(flat, n, dims)]
                };
                inherited + e * weight
            })
            .collect();
    }
    let n_fine = c.cells_per_axis(c.finest_level());
    let samples: Vec<f64> = (0..n_fine.pow(dims as u32))
        .map(|flat| acc[parent_index(flat, n_fine, dims)].sqrt())
        .collect();
    GridFunction::new(c.domain().clone(), c.finest_level(), samples)
        .expect("geometry validated by coefficients")
}

/// `‖S‖_{L¹}`, the H¹ norm measured by the wavelet square function.
pub fn h1_square_norm(c: &WaveletCoeffs) -> Result<f64> {
    ensure_no_scaling(c)?;
    Ok(lp_norm(&square_function(c), Lp::One))
}

/// Radial profile of the test function used by the grand-maximal proxy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelProfile {
    /// `exp(-1/(1-|x|²))` on the unit ball.
    Bump,
    /// `exp(-|x|²/2)`.
    Gaussian,
}

impl KernelProfile {
    fn value_and_slope(self, r: f64) -> (f64, f64) {
        match self {
            KernelProfile::Bump => {
                if r >= 1.0 {
                    (0.0, 0.0)
                } else {
                    let q = 1.0 - r * r;
                    let p = (-1.0 / q).exp();
                    (p, -2.0 * r * p / (q * q))
                }
            }
            KernelProfile::Gaussian => {
                let p = (-0.5 * r * r).exp();
                (p, -r * p)
            }
        }
    }

    fn reach(self) -> f64 {
        match self {
            KernelProfile::Bump => 1.0,
            KernelProfile::Gaussian => 40.0,
        }
    }

    fn class_ratio(self, r: f64, dims: usize) -> f64 {
        let (p, dp) = self.value_and_slope(r);
        (p.abs() + dp.abs()) * (1.0 + r).powi(dims as i32 + 1)
    }

    /// Amplitude `A` making `max_r A(|p| + |p'|)(1+r)^{n+1} = KERNEL_MARGIN`.
    pub fn amplitude(self, dims: usize) -> f64 {
        let steps = 200_000;
        let reach = self.reach();
        let peak = (0..=steps)
            .map(|i| self.class_ratio(reach * i as f64 / steps as f64, dims))
            .fold(0.0, f64::max);
        KERNEL_MARGIN / peak
    }
}

/// Parameters of the grand-maximal proxy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrandMaximalParams {
    pub kernel: KernelProfile,
    /// Scales `2^{-j}` for these `j`; all dyadic scales between the box and
    /// the mesh when absent.
    pub levels: Option<Vec<i32>>,
    /// Overrides the computed normalization.
    pub amplitude: Option<f64>,
}

impl Default for GrandMaximalParams {
    fn default() -> Self {
        Self {
            kernel: KernelProfile::Bump,
            levels: None,
            amplitude: None,
        }
    }
}

impl GrandMaximalParams {
    pub fn with_kernel(kernel: KernelProfile) -> Self {
        Self {
            kernel,
            ..Self::default()
        }
    }

    pub fn amplitude(&self, dims: usize) -> f64 {
        self.amplitude
            .unwrap_or_else(|| self.kernel.amplitude(dims))
    }

    pub fn levels_for(&self, f: &GridFunction) -> Vec<i32> {
        self.levels
            .clone()
            .unwrap_or_else(|| (f.domain().coarsest_level() + 1..=f.level()).collect())
    }

    /// `Φ(0)`.
    pub fn center_value(&self, dims: usize) -> f64 {
        self.amplitude(dims) * self.kernel.value_and_slope(0.0).0
    }
}

/// Samples of `Φ_t(x) = t^{-n} Φ(x/t)` at minimum-image offsets, after
/// checking the class bound at every sampled point.
fn kernel_samples(f: &GridFunction, params: &GrandMaximalParams, t: f64) -> Result<Vec<f64>> {
    let dims = f.dims();
    let n = f.samples_per_axis();
    let h = f.cell_width();
    let amplitude = params.amplitude(dims);
    let offset = |i: usize| {
        let i = i as i64;
        let n = n as i64;
        (if i < n / 2 { i } else { i - n }) as f64 * h
    };
    let scale = t.powi(-(dims as i32));
    let mut out = vec![0.0; n.pow(dims as u32)];
    for (flat, slot) in out.iter_mut().enumerate() {
        let mut r2 = 0.0;
        let mut rest = flat;
        for _ in 0..dims {
            let d = offset(rest % n) / t;
            r2 += d * d;
            rest /= n;
        }
        let r = r2.sqrt();
        if amplitude * params.kernel.class_ratio(r, dims) > 1.0 {
            return Err(Error::Config(format!(
                "kernel violates |Φ| + |∇Φ| <= (1+|x|)^-(n+1) at |x| = {r}"
            )));
        }
        *slot = scale * amplitude * params.kernel.value_and_slope(r).0;
    }
    Ok(out)
}

/// `max_t |f * Φ_t|` over the configured dyadic scales, by periodic FFT
/// convolution. A lower bound for the grand maximal function.
pub fn grand_maximal(f: &GridFunction, params: &GrandMaximalParams) -> Result<GridFunction> {
    let plan = Spectral::for_grid(f);
    let f_hat = plan.forward_real(f.samples());
    let mut out = vec![0.0f64; f.len()];
    for level in params.levels_for(f) {
        let t = (2f64).powi(-level);
        let kernel = kernel_samples(f, params, t)?;
        let conv = periodic_convolve(&plan, &f_hat, &kernel, f.cell_volume());
        for (o, c) in out.iter_mut().zip(&conv) {
            *o = o.max(c.abs());
        }
    }
    GridFunction::new(f.domain().clone(), f.level(), out)
}

/// `‖M f‖_{L^log}` with the grand-maximal proxy.
pub fn hlog_norm(f: &GridFunction, params: &GrandMaximalParams) -> Result<f64> {
    if f.sup_norm() == 0.0 {
        return Ok(0.0);
    }
    luxemburg_log_norm(&grand_maximal(f, params)?)
}

/// Both sides of `st/(M + log(e + st)) ≤ e^{t-M} + s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalarInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn check_scalar_log_inequality(s: f64, t: f64, m: f64) -> Result<ScalarInequality> {
    if !(m >= 1.0) {
        return Err(Error::Domain(format!("M must be >= 1, got {m}")));
    }
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::Domain(format!(
            "s and t must be positive, got s={s}, t={t}"
        )));
    }
    let lhs = s * t / (m + (E + s * t).ln());
    let rhs = (t - m).exp() + s;
    Ok(ScalarInequality {
        lhs,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Terms of the ratio `‖fg‖_{L^log} / (‖f‖₁ ‖g‖_{BMO⁺})`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderReport {
    pub llog_fg: f64,
    pub l1_f: f64,
    pub bmo_plus_g: f64,
    pub ratio: f64,
}

pub fn holder_product_bound(
    f: &GridFunction,
    g: &GridFunction,
    g_coeffs: &WaveletCoeffs,
) -> Result<HolderReport> {
    let l1_f = lp_norm(f, Lp::One);
    let bmo_plus_g = bmo_plus_norm(g, g_coeffs)?;
    if l1_f == 0.0 || bmo_plus_g == 0.0 {
        return Err(Error::Domain(format!(
            "zero denominator: ||f||_1 = {l1_f}, ||g||_BMO+ = {bmo_plus_g}"
        )));
    }
    let llog_fg = luxemburg_log_norm(&f.mul(g)?)?;
    Ok(HolderReport {
        llog_fg,
        l1_f,
        bmo_plus_g,
        ratio: llog_fg / (l1_f * bmo_plus_g),
    })
}

/// Norms selectable from the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    L1,
    L2,
    Linf,
    Bmo,
    BmoPlus,
    H1,
    Llog,
    Hlog,
}

impl NormKind {
    pub fn name(self) -> &'static str {
        match self {
            NormKind::L1 => "l1",
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
            NormKind::Bmo => "bmo",
            NormKind::BmoPlus => "bmo+",
            NormKind::H1 => "h1",
            NormKind::Llog => "llog",
            NormKind::Hlog => "hlog",
        }
    }

    pub fn parse_list(list: &str) -> Result<Vec<NormKind>> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s {
                "l1" => Ok(NormKind::L1),
                "l2" => Ok(NormKind::L2),
                "linf" => Ok(NormKind::Linf),
                "bmo" => Ok(NormKind::Bmo),
                "bmo+" => Ok(NormKind::BmoPlus),
                "h1" => Ok(NormKind::H1),
                "llog" => Ok(NormKind::Llog),
                "hlog" => Ok(NormKind::Hlog),
                other => Err(Error::Config(format!("unknown norm `{other}`"))),
            })
            .collect()
    }
}

/// One computed norm with the parameters and tolerances it used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub norm: String,
    pub value: f64,
    pub params: serde_json::Value,
    pub tolerances: serde_json::Value,
}

/// Evaluates the requested norms of `f`. Wavelet-based norms expand `f`
/// from level `coarse`; the H¹ norm drops the scaling part, i.e. measures
/// `f - P_coarse f`.
pub fn compute_norms(
    f: &GridFunction,
    filter: &FilterPair,
    coarse: i32,
    kinds: &[NormKind],
    maximal: &GrandMaximalParams,
) -> Result<Vec<NormReport>> {
    let needs_coeffs = kinds
        .iter()
        .any(|k| matches!(k, NormKind::Bmo | NormKind::BmoPlus | NormKind::H1));
    let coeffs = if needs_coeffs {
        Some(dwt_forward(f, filter, coarse)?)
    } else {
        None
    };
    let wavelet_params = json!({"filter": filter.name(), "j0": coarse, "J": f.level()});
    kinds
        .iter()
        .map(|&kind| {
            let (value, params, tolerances) = match kind {
                NormKind::L1 => (lp_norm(f, Lp::One), json!({}), json!({})),
                NormKind::L2 => (lp_norm(f, Lp::Two), json!({}), json!({})),
                NormKind::Linf => (lp_norm(f, Lp::Infinity), json!({}), json!({})),
                NormKind::Bmo => (
                    bmo_wavelet_norm(coeffs.as_ref().expect("computed above")),
                    wavelet_params.clone(),
                    json!({}),
                ),
                NormKind::BmoPlus => (
                    bmo_plus_norm(f, coeffs.as_ref().expect("computed above"))?,
                    json!({"filter": filter.name(), "j0": coarse, "base_cube": default_base_cube(f)}),
                    json!({}),
                ),
                NormKind::H1 => {
                    let mut c = coeffs.clone().expect("computed above");
                    c.clear_scaling();
                    (
                        h1_square_norm(&c)?,
                        json!({"filter": filter.name(), "j0": coarse, "coarse_part": "removed"}),
                        json!({"scaling": SCALING_TOLERANCE}),
                    )
                }
                NormKind::Llog => (
                    luxemburg_log_norm(f)?,
                    json!({}),
                    json!({"bisection_relative": LUXEMBURG_TOLERANCE, "max_iterations": LUXEMBURG_MAX_ITER}),
                ),
                NormKind::Hlog => (
                    hlog_norm(f, maximal)?,
                    json!({"kernel": maximal.kernel, "levels": maximal.levels_for(f), "amplitude": maximal.amplitude(f.dims())}),
                    json!({"bisection_relative": LUXEMBURG_TOLERANCE, "kernel_margin": KERNEL_MARGIN}),
                ),
            };
            Ok(NormReport {
                norm: kind.name().to_string(),
                value,
                params,
                tolerances,
            })
        })
        .collect()
}
