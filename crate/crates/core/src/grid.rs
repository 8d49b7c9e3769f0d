//! Dyadic geometry and sampled functions on square boxes.
//!
//! A [`GridFunction`] holds the values of a function at the midpoints of the
//! cells of a uniform dyadic grid of mesh `2^-J` over a [`GridBox`]. All
//! quadrature is the midpoint rule, which is exact for functions that are
//! constant on cells.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported box side exponent (`side = 2^s`).
pub const MAX_SIDE_EXPONENT: u32 = 8;
/// Hard cap on the number of samples of one grid function.
pub const MAX_SAMPLES: usize = 1 << 24;

const MAGIC: &str = "GFN1";

/// The computational domain: a half-open cube `origin + [0, side)^n`.
///
/// `side` is a power of two (in units of the base length 1) and the dimension
/// is 1 or 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridBox {
    origin: Vec<f64>,
    side: f64,
}

impl GridBox {
    pub fn new(origin: Vec<f64>, side: f64) -> Result<Self> {
        if origin.is_empty() || origin.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                origin.len()
            )));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if !(side > 0.0) || !side.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "side must be positive, got {side}"
            )));
        }
        let s = side.log2().round();
        if s < 0.0 || s > MAX_SIDE_EXPONENT as f64 || (2f64).powi(s as i32) != side {
            return Err(Error::InvalidGrid(format!(
                "side must be 2^s with 0 <= s <= {MAX_SIDE_EXPONENT}, got {side}"
            )));
        }
        Ok(Self { origin, side })
    }

    /// The unit box `[0,1)^n`.
    pub fn unit(dims: usize) -> Self {
        Self::new(vec![0.0; dims], 1.0).expect("unit box is valid")
    }

    pub fn dims(&self) -> usize {
        self.origin.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// `s` such that `side = 2^s`.
    pub fn side_exponent(&self) -> i32 {
        self.side.log2().round() as i32
    }

    /// The coarsest dyadic level whose cubes fit in the box (`-s`).
    pub fn coarsest_level(&self) -> i32 {
        -self.side_exponent()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dims() as i32)
    }

    pub fn as_cube(&self) -> Cube {
        Cube {
            lower: self.origin.clone(),
            side: self.side,
        }
    }

    /// Number of dyadic cells per axis at level `j`.
    pub fn cells_per_axis(&self, level: i32) -> Result<usize> {
        let e = level + self.side_exponent();
        if !(0..=24).contains(&e) {
            return Err(Error::LevelOutOfRange {
                level,
                lo: self.coarsest_level(),
                hi: 24 - self.side_exponent(),
            });
        }
        Ok(1usize << e)
    }

    /// Checks that the origin lies on the dyadic lattice of level `j`, so that
    /// box-local cube indices map to integer global corners.
    pub fn is_aligned(&self, level: i32) -> bool {
        let scale = (2f64).powi(level);
        self.origin
            .iter()
            .all(|o| (o * scale).fract() == 0.0 && (o * scale).abs() < 1e15)
    }

    pub fn same_as(&self, other: &GridBox) -> bool {
        self == other
    }
}

/// A general half-open axis-aligned cube `lower + [0, side)^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub lower: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().map(|l| l + 0.5 * self.side).collect()
    }

    pub fn upper(&self) -> Vec<f64> {
        self.lower.iter().map(|l| l + self.side).collect()
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.lower.len() as i32)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(&self.lower)
            .all(|(xi, lo)| *xi >= *lo && *xi < lo + self.side)
    }

    /// Containment of `other` in `self` (closed comparison on both ends).
    pub fn contains_cube(&self, other: &Cube) -> bool {
        other
            .lower
            .iter()
            .zip(&self.lower)
            .all(|(o, s)| *o >= *s && o + other.side <= s + self.side)
    }
}

/// Orientation of a tensor wavelet: bit `a` set means the high-pass factor is
/// used along axis `a`. Valid labels are `1..2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Label(pub u8);

impl Label {
    pub fn all(dims: usize) -> Vec<Label> {
        (1..(1u8 << dims)).map(Label).collect()
    }

    pub fn is_high(self, axis: usize) -> bool {
        self.0 >> axis & 1 == 1
    }

    /// Position of this label in [`Label::all`].
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

/// The dyadic cube `{x : 2^j x - k in [0,1)^n}`, optionally tagged with a
/// wavelet orientation. Untagged cubes index scaling functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: i32,
    pub corner: Vec<i64>,
    pub label: Option<Label>,
}

impl DyadicCube {
    pub fn new(level: i32, corner: Vec<i64>) -> Self {
        Self {
            level,
            corner,
            label: None,
        }
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = Some(label);
        self
    }

    pub fn dims(&self) -> usize {
        self.corner.len()
    }

    pub fn side(&self) -> f64 {
        (2f64).powi(-self.level)
    }

    pub fn volume(&self) -> f64 {
        self.side().powi(self.dims() as i32)
    }

    /// The center `x_I = 2^-j (k + 1/2)`.
    pub fn center(&self) -> Vec<f64> {
        let side = self.side();
        self.corner
            .iter()
            .map(|&k| side * (k as f64 + 0.5))
            .collect()
    }

    pub fn to_cube(&self) -> Cube {
        let side = self.side();
        Cube {
            lower: self.corner.iter().map(|&k| side * k as f64).collect(),
            side,
        }
    }

    /// Ancestor at a coarser (or equal) level.
    pub fn ancestor(&self, level: i32) -> DyadicCube {
        assert!(level <= self.level, "ancestor must be coarser");
        let d = (self.level - level) as u32;
        DyadicCube::new(level, self.corner.iter().map(|&k| k >> d).collect())
    }

    /// Dyadic containment `self ⊂ other`, ignoring labels.
    pub fn is_inside(&self, other: &DyadicCube) -> bool {
        self.dims() == other.dims()
            && self.level >= other.level
            && self.ancestor(other.level).corner == other.corner
    }
}

/// The cube with the same center as `cube` and `factor` times its side.
pub fn dilate_cube(cube: &DyadicCube, factor: u32) -> Result<Cube> {
    if factor == 0 {
        return Err(Error::Domain("dilation factor must be >= 1".into()));
    }
    let side = cube.side() * factor as f64;
    let lower = cube.center().iter().map(|c| c - 0.5 * side).collect();
    Ok(Cube { lower, side })
}

/// Samples of a real function at the cell midpoints of a dyadic grid.
///
/// The sample layout is row-major with axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    domain: GridBox,
    level: i32,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: GridBox, level: i32, samples: Vec<f64>) -> Result<Self> {
        let expected = sample_count(&domain, level)?;
        if samples.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "expected {expected} samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            domain,
            level,
            samples,
        })
    }

    pub fn zeros(domain: GridBox, level: i32) -> Result<Self> {
        let n = sample_count(&domain, level)?;
        Ok(Self {
            domain,
            level,
            samples: vec![0.0; n],
        })
    }

    pub fn constant(domain: GridBox, level: i32, value: f64) -> Result<Self> {
        let mut f = Self::zeros(domain, level)?;
        f.samples.iter_mut().for_each(|s| *s = value);
        Ok(f)
    }

    /// Samples `func` at every cell midpoint.
    pub fn from_fn(domain: GridBox, level: i32, func: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut f = Self::zeros(domain, level)?;
        let mut x = vec![0.0; f.dims()];
        for i in 0..f.samples.len() {
            f.midpoint_into(i, &mut x);
            f.samples[i] = func(&x);
        }
        if f.samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(
                "function produced non-finite samples".into(),
            ));
        }
        Ok(f)
    }

    pub(crate) fn from_parts_unchecked(domain: GridBox, level: i32, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), sample_count(&domain, level).unwrap());
        Self {
            domain,
            level,
            samples,
        }
    }

    pub fn domain(&self) -> &GridBox {
        &self.domain
    }

    /// Finest dyadic level `J`.
    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn dims(&self) -> usize {
        self.domain.dims()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples_per_axis(&self) -> usize {
        self.domain
            .cells_per_axis(self.level)
            .expect("validated level")
    }

    pub fn cell_width(&self) -> f64 {
        (2f64).powi(-self.level)
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell_width().powi(self.dims() as i32)
    }

    /// Multi-index of a flat sample position.
    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        let n = self.samples_per_axis();
        let dims = self.dims();
        let mut idx = vec![0; dims];
        let mut rest = flat;
        for a in (0..dims).rev() {
            idx[a] = rest % n;
            rest /= n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let n = self.samples_per_axis();
        idx.iter().fold(0, |acc, &i| acc * n + i)
    }

    fn midpoint_into(&self, flat: usize, out: &mut [f64]) {
        let n = self.samples_per_axis();
        let h = self.cell_width();
        let mut rest = flat;
        for a in (0..self.dims()).rev() {
            let i = rest % n;
            rest /= n;
            out[a] = self.domain.origin[a] + (i as f64 + 0.5) * h;
        }
    }

    pub fn midpoint(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dims()];
        self.midpoint_into(flat, &mut x);
        x
    }

    pub fn same_geometry(&self, other: &GridFunction) -> bool {
        self.level == other.level && self.domain.same_as(&other.domain)
    }

    pub fn ensure_same_geometry(&self, other: &GridFunction) -> Result<()> {
        if self.same_geometry(other) {
            Ok(())
        } else {
            Err(Error::Geometry(format!(
                "grids differ: (J={}, {:?}) vs (J={}, {:?})",
                self.level, self.domain, other.level, other.domain
            )))
        }
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            domain: self.domain.clone(),
            level: self.level,
            samples: self.samples.iter().map(|&v| op(v)).collect(),
        }
    }

    pub fn zip_with(
        &self,
        other: &GridFunction,
        op: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        self.ensure_same_geometry(other)?;
        Ok(GridFunction {
            domain: self.domain.clone(),
            level: self.level,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, factor: f64) -> GridFunction {
        self.map(|v| factor * v)
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Periodic translation by whole cells along each axis.
    pub fn shift_cells(&self, shift: &[i64]) -> GridFunction {
        let n = self.samples_per_axis() as i64;
        let mut out = vec![0.0; self.samples.len()];
        for (flat, &v) in self.samples.iter().enumerate() {
            let idx = self.multi_index(flat);
            let moved: Vec<usize> = idx
                .iter()
                .zip(shift)
                .map(|(&i, &s)| (i as i64 + s).rem_euclid(n) as usize)
                .collect();
            out[self.flat_index(&moved)] = v;
        }
        GridFunction {
            domain: self.domain.clone(),
            level: self.level,
            samples: out,
        }
    }

    /// Mean over a dyadic cube whose cells are whole grid cells.
    pub fn mean_over(&self, cube: &Cube) -> Result<f64> {
        if !self.domain.as_cube().contains_cube(cube) {
            return Err(Error::Domain(format!(
                "cube {cube:?} is not inside the box"
            )));
        }
        let mut sum = 0.0;
        let mut count = 0usize;
        let mut x = vec![0.0; self.dims()];
        for i in 0..self.samples.len() {
            self.midpoint_into(i, &mut x);
            if cube.contains_point(&x) {
                sum += self.samples[i];
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::Domain("cube is smaller than one grid cell".into()));
        }
        Ok(sum / count as f64)
    }
}

fn sample_count(domain: &GridBox, level: i32) -> Result<usize> {
    let n = domain.cells_per_axis(level)?;
    let total = n
        .checked_pow(domain.dims() as u32)
        .filter(|&t| t <= MAX_SAMPLES)
        .ok_or_else(|| {
            Error::InvalidGrid(format!(
                "grid with {n}^{} samples is too large",
                domain.dims()
            ))
        })?;
    Ok(total)
}

/// Midpoint quadrature `∫ f`.
pub fn integrate(f: &GridFunction) -> f64 {
    f.cell_volume() * f.samples.iter().sum::<f64>()
}

/// Midpoint quadrature `⟨f, g⟩`.
pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.ensure_same_geometry(g)?;
    let s: f64 = f.samples.iter().zip(&g.samples).map(|(a, b)| a * b).sum();
    Ok(f.cell_volume() * s)
}

/// Serializes `f` in the GFN1 format (text header, little-endian f64 body).
pub fn encode_grid(f: &GridFunction) -> Vec<u8> {
    let origin: Vec<String> = f.domain.origin.iter().map(|o| format!("{o:?}")).collect();
    let mut out = format!(
        "{MAGIC}\ndims {}\nJ {}\norigin {}\nside {:?}\n\n",
        f.dims(),
        f.level,
        origin.join(" "),
        f.domain.side
    )
    .into_bytes();
    out.reserve(8 * f.samples.len());
    for v in &f.samples {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_grid(bytes: &[u8]) -> Result<GridFunction> {
    let mut pos = 0;
    let mut next_line = |what: &str| -> Result<String> {
        let rest = &bytes[pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format(format!("truncated header before {what}")))?;
        pos += end + 1;
        std::str::from_utf8(&rest[..end])
            .map(|s| s.trim_end_matches('\r').to_string())
            .map_err(|_| Error::Format(format!("non-UTF-8 header line ({what})")))
    };

    let magic = next_line("magic")?;
    if magic != MAGIC {
        return Err(Error::Format(format!("bad magic `{magic}`")));
    }
    let dims: usize = keyed(&next_line("dims")?, "dims")?
        .parse()
        .map_err(|_| Error::Format("dims is not an integer".into()))?;
    let level: i32 = keyed(&next_line("J")?, "J")?
        .parse()
        .map_err(|_| Error::Format("J is not an integer".into()))?;
    let origin: Vec<f64> = keyed(&next_line("origin")?, "origin")?
        .split_whitespace()
        .map(|t| t.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Format("origin is not a list of decimals".into()))?;
    let side: f64 = keyed(&next_line("side")?, "side")?
        .parse()
        .map_err(|_| Error::Format("side is not a decimal".into()))?;
    if !next_line("blank separator")?.is_empty() {
        return Err(Error::Format("missing blank line after header".into()));
    }
    if origin.len() != dims {
        return Err(Error::Format(format!(
            "origin has {} coordinates but dims is {dims}",
            origin.len()
        )));
    }
    let domain = GridBox::new(origin, side).map_err(|e| Error::Format(e.to_string()))?;
    let count = sample_count(&domain, level).map_err(|e| Error::Format(e.to_string()))?;
    let body = &bytes[pos..];
    if body.len() != 8 * count {
        return Err(Error::Format(format!(
            "expected {count} samples ({} bytes), found {} bytes",
            8 * count,
            body.len()
        )));
    }
    let samples: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    GridFunction::new(domain, level, samples).map_err(|e| Error::Format(e.to_string()))
}

fn keyed<'a>(line: &'a str, key: &str) -> Result<&'a str> {
    line.strip_prefix(key)
        .and_then(|r| r.strip_prefix(' '))
        .map(str::trim)
        .ok_or_else(|| Error::Format(format!("expected `{key} <value>`, got `{line}`")))
}

pub fn write_grid(f: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_grid(f))?;
    Ok(())
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<GridFunction> {
    decode_grid(&fs::read(path)?)
}

/// Writes the samples one per line with 17 significant digits.
pub fn write_grid_csv(f: &GridFunction, path: impl AsRef<Path>) -> Result<()> {
    let mut file = std::io::BufWriter::new(fs::File::create(path)?);
    for v in &f.samples {
        writeln!(file, "{v:.16e}")?;
    }
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn haar_psi(level: i32) -> GridFunction {
        GridFunction::from_fn(
            GridBox::unit(1),
            level,
            |x| if x[0] < 0.5 { 1.0 } else { -1.0 },
        )
        .unwrap()
    }

    #[test]
    fn dilation_examples() {
        let unit = DyadicCube::new(0, vec![0]);
        assert_eq!(
            dilate_cube(&unit, 1).unwrap(),
            Cube {
                lower: vec![0.0],
                side: 1.0
            }
        );
        assert_eq!(
            dilate_cube(&unit, 3).unwrap(),
            Cube {
                lower: vec![-1.0],
                side: 3.0
            }
        );
        let quarter = DyadicCube::new(1, vec![0, 0]);
        assert_eq!(
            dilate_cube(&quarter, 2).unwrap(),
            Cube {
                lower: vec![-0.25, -0.25],
                side: 1.0
            }
        );
        assert!(dilate_cube(&unit, 0).is_err());
    }

    #[test]
    fn dilation_keeps_center() {
        for level in -2..6 {
            for k in -5..5 {
                let cube = DyadicCube::new(level, vec![k, 2 * k + 1]);
                for factor in 1..8 {
                    assert_eq!(dilate_cube(&cube, factor).unwrap().center(), cube.center());
                }
            }
        }
    }

    #[test]
    fn quadrature_examples() {
        let one = GridFunction::constant(GridBox::unit(1), 8, 1.0).unwrap();
        assert_eq!(integrate(&one), 1.0);
        let zero = GridFunction::zeros(GridBox::unit(1), 8).unwrap();
        assert_eq!(inner_product(&zero, &one).unwrap(), 0.0);
        let psi = haar_psi(8);
        assert_eq!(inner_product(&psi, &psi).unwrap(), 1.0);
    }

    #[test]
    fn indicator_integrals_are_exact() {
        let domain = GridBox::new(vec![0.0, 0.0], 2.0).unwrap();
        for level in 0..=5 {
            let cube = DyadicCube::new(level, vec![1, 0]).to_cube();
            let f = GridFunction::from_fn(domain.clone(), 6, |x| {
                if cube.contains_point(x) {
                    1.0
                } else {
                    0.0
                }
            })
            .unwrap();
            assert_eq!(integrate(&f), cube.volume());
        }
    }

    #[test]
    fn mismatched_geometry_is_rejected() {
        let a = GridFunction::zeros(GridBox::unit(1), 4).unwrap();
        let b = GridFunction::zeros(GridBox::unit(1), 5).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::Geometry(_))));
    }

    #[test]
    fn invalid_boxes() {
        assert!(GridBox::new(vec![0.0], 3.0).is_err());
        assert!(GridBox::new(vec![0.0; 3], 1.0).is_err());
        assert!(GridBox::new(vec![0.0], 0.5).is_err());
        assert!(GridFunction::new(GridBox::unit(1), 3, vec![0.0; 7]).is_err());
        assert!(GridFunction::new(GridBox::unit(1), 1, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn file_round_trip_2d() {
        let domain = GridBox::new(vec![3.0, -1.0], 1.0).unwrap();
        let f = GridFunction::from_fn(domain, 6, |x| (x[0] * 7.1).sin() * x[1].exp()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.gfn");
        write_grid(&f, &path).unwrap();
        let g = read_grid(&path).unwrap();
        assert_eq!(g.samples_per_axis(), 64);
        assert!(f
            .samples()
            .iter()
            .zip(g.samples())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
        assert_eq!(f.domain(), g.domain());
    }

    #[test]
    fn header_errors() {
        let f = haar_psi(3);
        let mut bytes = encode_grid(&f);
        bytes[0] = b'X';
        assert!(matches!(decode_grid(&bytes), Err(Error::Format(_))));

        let mut short = encode_grid(&f);
        short.truncate(short.len() - 8);
        assert!(matches!(decode_grid(&short), Err(Error::Format(_))));

        let mut bad = encode_grid(&f);
        let n = bad.len();
        bad[n - 8..].copy_from_slice(&f64::INFINITY.to_le_bytes());
        assert!(decode_grid(&bad).is_err());
    }

    #[test]
    fn csv_has_round_trip_precision() {
        let f = GridFunction::from_fn(GridBox::unit(1), 5, |x| (x[0] * 3.3).exp() / 7.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_grid_csv(&f, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(parsed, f.samples());
    }

    #[test]
    fn dyadic_containment() {
        let r = DyadicCube::new(1, vec![1]);
        assert!(DyadicCube::new(3, vec![5]).is_inside(&r));
        assert!(!DyadicCube::new(3, vec![3]).is_inside(&r));
        assert!(!DyadicCube::new(0, vec![0]).is_inside(&r));
        assert!(DyadicCube::new(2, vec![-3]).is_inside(&DyadicCube::new(1, vec![-2])));
    }
}
