//! Deterministic test corpora: random finite wavelet expansions, ψ-atoms,
//! truncated logarithms and band-limited potentials.
//!
//! Item `i` of a corpus draws from a ChaCha8 stream seeded with the run seed
//! and selected by `i`, so items are independent of each other, of the
//! corpus size and of the worker schedule. Draws are made in continuous
//! coordinates wherever possible so that an item keeps its shape when only
//! the grid level changes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atoms::{validate_psi_atom, PsiAtom};
use crate::error::{Error, Result};
use crate::grid::{DyadicCube, GridBox, GridFunction, Label};
use crate::wavelet::{dwt_inverse, load_filter, FilterPair, WaveletCoeffs, DEFAULT_FILTER};

/// Largest accepted corpus size.
pub const MAX_CORPUS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusKind {
    FiniteWaveletRandom,
    Atom,
    BmoLogExemplar,
    BandLimitedPotential,
}

/// How coefficient amplitudes are scaled with the cube size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeLaw {
    /// Uniform in `[-1, 1]`.
    Uniform,
    /// Uniform in `[-1, 1]` times `|I|^{1/2}` (bounded BMO contribution).
    BmoNormalized,
    /// Uniform in `[-1, 1]` times `|I|^{-1/2}` (unit H¹ contribution).
    H1Normalized,
}

fn default_filter() -> String {
    DEFAULT_FILTER.to_string()
}
fn default_dims() -> usize {
    1
}
fn default_finest() -> i32 {
    10
}
fn default_count() -> usize {
    10
}
fn default_sparsity() -> usize {
    40
}
fn default_side() -> f64 {
    1.0
}
fn default_truncation() -> f64 {
    8.0
}
fn default_bandwidth() -> usize {
    4
}
fn default_amplitude() -> AmplitudeLaw {
    AmplitudeLaw::Uniform
}

/// Parameters of a corpus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub kind: CorpusKind,
    #[serde(default = "default_filter")]
    pub filter: String,
    #[serde(default = "default_dims")]
    pub dims: usize,
    /// Finest grid level `J`.
    #[serde(default = "default_finest", rename = "J")]
    pub finest: i32,
    /// Coarse level of the expansions; the box level when absent.
    #[serde(default, rename = "j0")]
    pub coarse: Option<i32>,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
    #[serde(default = "default_side")]
    pub side: f64,
    #[serde(default = "default_count")]
    pub count: usize,
    /// Number of nonzero coefficients of expansions and atoms.
    #[serde(default = "default_sparsity")]
    pub sparsity: usize,
    /// Coarsest level of random coefficients (atoms: of the cube `R`).
    #[serde(default)]
    pub min_level: Option<i32>,
    /// Finest level of random coefficients (atoms: of the cube `R`).
    #[serde(default)]
    pub max_level: Option<i32>,
    #[serde(default = "default_amplitude")]
    pub amplitude: AmplitudeLaw,
    /// `T` in `log(max(|x - x0|, e^{-T}))`.
    #[serde(default = "default_truncation")]
    pub truncation: f64,
    /// Largest wavenumber per axis of band-limited potentials.
    #[serde(default = "default_bandwidth")]
    pub bandwidth: usize,
}

impl CorpusSpec {
    pub fn new(kind: CorpusKind) -> Self {
        Self {
            kind,
            filter: default_filter(),
            dims: default_dims(),
            finest: default_finest(),
            coarse: None,
            origin: None,
            side: default_side(),
            count: default_count(),
            sparsity: default_sparsity(),
            min_level: None,
            max_level: None,
            amplitude: default_amplitude(),
            truncation: default_truncation(),
            bandwidth: default_bandwidth(),
        }
    }

    pub fn domain(&self) -> Result<GridBox> {
        GridBox::new(
            self.origin.clone().unwrap_or_else(|| vec![0.0; self.dims]),
            self.side,
        )
    }

    pub fn coarse_level(&self) -> Result<i32> {
        Ok(self.coarse.unwrap_or(self.domain()?.coarsest_level()))
    }

    /// Inclusive level range of random coefficients or atom cubes.
    pub fn level_range(&self, filter: &FilterPair) -> Result<(i32, i32)> {
        let coarse = self.coarse_level()?;
        let (lo, hi) = match self.kind {
            CorpusKind::Atom => {
                // The dilated cube m·R must fit inside the box.
                let need = (filter.support() as f64 / self.side).log2().ceil() as i32;
                (
                    self.min_level.unwrap_or(coarse.max(need)),
                    self.max_level.unwrap_or(self.finest - 3),
                )
            }
            _ => (
                self.min_level.unwrap_or(coarse),
                self.max_level.unwrap_or(self.finest - 1),
            ),
        };
        if lo > hi || lo < coarse || hi >= self.finest {
            return Err(Error::Config(format!(
                "level range [{lo}, {hi}] must lie in [{coarse}, {}]",
                self.finest - 1
            )));
        }
        Ok((lo, hi))
    }

    pub fn validate(&self) -> Result<FilterPair> {
        let filter = load_filter(&self.filter)?;
        let domain = self.domain()?;
        if domain.dims() != self.dims {
            return Err(Error::Config("origin length differs from dims".into()));
        }
        GridFunction::zeros(domain.clone(), self.finest)
            .map_err(|e| Error::Config(e.to_string()))?;
        let coarse = self.coarse_level()?;
        if coarse < domain.coarsest_level() || coarse >= self.finest {
            return Err(Error::Config(format!(
                "j0 = {coarse} must lie in [{}, {})",
                domain.coarsest_level(),
                self.finest
            )));
        }
        if !domain.is_aligned(coarse) {
            return Err(Error::Config(
                "box origin is not aligned to level j0".into(),
            ));
        }
        if self.count > MAX_CORPUS {
            return Err(Error::Config(format!(
                "corpus size {} exceeds {MAX_CORPUS}",
                self.count
            )));
        }
        match self.kind {
            CorpusKind::FiniteWaveletRandom | CorpusKind::Atom => {
                if self.sparsity == 0 {
                    return Err(Error::Config("sparsity must be positive".into()));
                }
                self.level_range(&filter)?;
            }
            CorpusKind::BmoLogExemplar => {
                if !(self.truncation > 0.0 && self.truncation.is_finite()) {
                    return Err(Error::Config("truncation must be positive".into()));
                }
            }
            CorpusKind::BandLimitedPotential => {
                if self.dims != 2 {
                    return Err(Error::Config(
                        "band-limited potentials are two-dimensional".into(),
                    ));
                }
                let nyquist = domain.cells_per_axis(self.finest)? / 2;
                if self.bandwidth == 0 || self.bandwidth as f64 >= nyquist as f64 * self.side {
                    return Err(Error::Config(format!(
                        "bandwidth must lie in [1, {})",
                        nyquist
                    )));
                }
            }
        }
        Ok(filter)
    }
}

/// One generated corpus member.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    /// A finite wavelet expansion with zero scaling part.
    Expansion(WaveletCoeffs),
    Atom(PsiAtom),
    Function(GridFunction),
    Potentials {
        u: GridFunction,
        v: GridFunction,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorpusItem {
    pub index: usize,
    pub payload: Payload,
}

impl CorpusItem {
    /// The sampled function of expansions, atoms and functions.
    pub fn function(&self) -> Option<GridFunction> {
        match &self.payload {
            Payload::Expansion(c) => Some(dwt_inverse(c)),
            Payload::Atom(a) => Some(a.synthesize()),
            Payload::Function(f) => Some(f.clone()),
            Payload::Potentials { .. } => None,
        }
    }
}

/// The random stream of item `index`.
pub fn item_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn amplitude(rng: &mut ChaCha8Rng, law: AmplitudeLaw, volume: f64) -> f64 {
    let u: f64 = rng.gen_range(-1.0..1.0);
    match law {
        AmplitudeLaw::Uniform => u,
        AmplitudeLaw::BmoNormalized => u * volume.sqrt(),
        AmplitudeLaw::H1Normalized => u / volume.sqrt(),
    }
}

/// Draws a cube of `level` containing a uniform point of `region` (a dyadic
/// cube) and a uniform label.
fn random_cube_in(rng: &mut ChaCha8Rng, level: i32, region: &DyadicCube) -> DyadicCube {
    let lower = region.to_cube().lower;
    let side = region.side();
    let scale = (2f64).powi(level);
    let corner = lower
        .iter()
        .map(|&l| ((l + side * rng.gen::<f64>()) * scale).floor() as i64)
        .collect::<Vec<_>>();
    let label = Label(rng.gen_range(1..(1u8 << region.dims())));
    DyadicCube {
        level,
        corner,
        label: Some(label),
    }
}

fn box_cube(domain: &GridBox) -> DyadicCube {
    let level = domain.coarsest_level();
    let scale = (2f64).powi(level);
    DyadicCube::new(
        level,
        domain
            .origin()
            .iter()
            .map(|o| (o * scale).round() as i64)
            .collect(),
    )
}

fn random_expansion(
    spec: &CorpusSpec,
    filter: &FilterPair,
    rng: &mut ChaCha8Rng,
) -> Result<WaveletCoeffs> {
    let domain = spec.domain()?;
    let (lo, hi) = spec.level_range(filter)?;
    let mut c = WaveletCoeffs::zeros(filter, &domain, spec.coarse_level()?, spec.finest)?;
    let region = box_cube(&domain);
    for _ in 0..spec.sparsity {
        let level = rng.gen_range(lo..=hi);
        let cube = random_cube_in(rng, level, &region);
        let value = amplitude(rng, spec.amplitude, cube.volume());
        c.set(&cube, value)?;
    }
    Ok(c)
}

fn random_atom(spec: &CorpusSpec, filter: &FilterPair, rng: &mut ChaCha8Rng) -> Result<PsiAtom> {
    let domain = spec.domain()?;
    let (lo, hi) = spec.level_range(filter)?;
    let level = rng.gen_range(lo..=hi);
    let m = filter.support() as i64;
    let cells = domain.cells_per_axis(level)? as i64;
    let margin = (m - 1) / 2;
    let region = box_cube(&domain);
    let base: Vec<i64> = region
        .corner
        .iter()
        .map(|&k| k << (level - region.level))
        .collect();
    let corner = base
        .iter()
        .map(|&b| b + rng.gen_range(margin..=(cells - 1 - margin).max(margin)))
        .collect();
    let cube = DyadicCube::new(level, corner);
    let mut c = WaveletCoeffs::zeros(filter, &domain, spec.coarse_level()?, spec.finest)?;
    for _ in 0..spec.sparsity {
        let inner_level = rng.gen_range(level..spec.finest);
        let inner = random_cube_in(rng, inner_level, &cube);
        let value = amplitude(rng, spec.amplitude, inner.volume());
        c.set(&inner, value)?;
    }
    let energy = c.detail_energy().sqrt();
    let c = c.scaled(cube.volume().powf(-0.5) / energy * (1.0 - 1e-14));
    validate_psi_atom(&c, &cube)
}

fn log_exemplar(spec: &CorpusSpec, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
    let domain = spec.domain()?;
    let side = domain.side();
    let center: Vec<f64> = domain
        .origin()
        .iter()
        .map(|o| o + side * rng.gen::<f64>())
        .collect();
    let floor = (-spec.truncation).exp();
    GridFunction::from_fn(domain.clone(), spec.finest, |x| {
        let d2: f64 = x
            .iter()
            .zip(&center)
            .map(|(a, b)| {
                let d = (a - b).rem_euclid(side);
                let d = d.min(side - d);
                d * d
            })
            .sum();
        d2.sqrt().max(floor).ln()
    })
}

fn potential(spec: &CorpusSpec, rng: &mut ChaCha8Rng) -> Result<GridFunction> {
    let domain = spec.domain()?;
    let b = spec.bandwidth as i64;
    let mut modes = Vec::new();
    for k1 in -b..=b {
        for k2 in -b..=b {
            if (k1, k2) <= (0, 0) {
                continue;
            }
            let weight = 1.0 / (k1 * k1 + k2 * k2) as f64;
            let a: f64 = rng.gen_range(-1.0..1.0);
            let c: f64 = rng.gen_range(-1.0..1.0);
            modes.push((k1 as f64, k2 as f64, a * weight, c * weight));
        }
    }
    let side = domain.side();
    GridFunction::from_fn(domain, spec.finest, |x| {
        modes
            .iter()
            .map(|&(k1, k2, a, c)| {
                let phase = 2.0 * PI * (k1 * x[0] + k2 * x[1]) / side;
                a * phase.cos() + c * phase.sin()
            })
            .sum()
    })
}

fn generate_item(
    spec: &CorpusSpec,
    filter: &FilterPair,
    seed: u64,
    index: usize,
) -> Result<CorpusItem> {
    let mut rng = item_rng(seed, index);
    let payload = match spec.kind {
        CorpusKind::FiniteWaveletRandom => {
            Payload::Expansion(random_expansion(spec, filter, &mut rng)?)
        }
        CorpusKind::Atom => Payload::Atom(random_atom(spec, filter, &mut rng)?),
        CorpusKind::BmoLogExemplar => Payload::Function(log_exemplar(spec, &mut rng)?),
        CorpusKind::BandLimitedPotential => Payload::Potentials {
            u: potential(spec, &mut rng)?,
            v: potential(spec, &mut rng)?,
        },
    };
    Ok(CorpusItem { index, payload })
}

/// Generates `spec.count` items, in index order.
pub fn gen_corpus(spec: &CorpusSpec, seed: u64) -> Result<Vec<CorpusItem>> {
    let filter = spec.validate()?;
    (0..spec.count)
        .into_par_iter()
        .map(|i| generate_item(spec, &filter, seed, i))
        .collect()
}
