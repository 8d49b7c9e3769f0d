//! ψ-atoms, the atomic decomposition of finite wavelet expansions, the
//! splitting of `Π2(a, g)` for an atom `a`, and the classical-atom pairing.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{dilate_cube, inner_product, integrate, Cube, DyadicCube, GridFunction, Label};
use crate::paraproduct::paraproduct_split;
use crate::spaces::{
    bmo_wavelet_norm, grand_maximal, h1_square_norm, square_function, GrandMaximalParams,
    SCALING_TOLERANCE,
};
use crate::wavelet::{dwt_forward, dwt_inverse, Basis, FilterPair, WaveletCoeffs};

/// Relative slack on the `L²` bound of an atom.
pub const ATOM_NORM_SLACK: f64 = 1e-12;
/// Largest accepted `|∫ a|` of a validated atom.
pub const ATOM_MEAN_TOLERANCE: f64 = 1e-10;

/// A validated ψ-atom: wavelet coefficients on cubes `I ⊂ R` with
/// `‖a‖₂ ≤ |R|^{-1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsiAtom {
    coeffs: WaveletCoeffs,
    cube: DyadicCube,
    l2_norm: f64,
}

impl PsiAtom {
    pub fn coeffs(&self) -> &WaveletCoeffs {
        &self.coeffs
    }

    pub fn cube(&self) -> &DyadicCube {
        &self.cube
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn synthesize(&self) -> GridFunction {
        dwt_inverse(&self.coeffs)
    }
}

/// Membership of `x` in `cube` up to the periodic wrap of the box.
fn contains_periodic(cube: &Cube, x: &[f64], period: f64) -> bool {
    x.iter().zip(&cube.lower).all(|(&xi, &lo)| {
        let shifted = lo + (xi - lo).rem_euclid(period);
        shifted < lo + cube.side
    })
}

pub fn validate_psi_atom(a: &WaveletCoeffs, cube: &DyadicCube) -> Result<PsiAtom> {
    if cube.dims() != a.dims() {
        return Err(Error::AtomViolation(
            "cube dimension differs from the coefficients".into(),
        ));
    }
    if cube.level < a.coarse_level() || cube.level >= a.finest_level() {
        return Err(Error::AtomViolation(format!(
            "cube level {} outside the detail levels [{}, {})",
            cube.level,
            a.coarse_level(),
            a.finest_level()
        )));
    }
    if a.max_abs_scaling() != 0.0 {
        return Err(Error::AtomViolation(
            "atom has a nonzero scaling part".into(),
        ));
    }
    for (level, label, flat, _) in a.iter_details() {
        let inner = a.cube(level, flat, Some(label));
        if !inner.is_inside(cube) {
            return Err(Error::AtomViolation(format!(
                "coefficient on {inner:?} is not inside {cube:?}"
            )));
        }
    }
    let l2_norm = a.detail_energy().sqrt();
    let bound = cube.volume().powf(-0.5);
    if l2_norm > bound * (1.0 + ATOM_NORM_SLACK) {
        return Err(Error::AtomViolation(format!(
            "L2 norm {l2_norm} exceeds |R|^(-1/2) = {bound}"
        )));
    }
    let f = dwt_inverse(a);
    let mean = integrate(&f);
    if mean.abs() > ATOM_MEAN_TOLERANCE {
        return Err(Error::AtomViolation(format!("atom has mean {mean:e}")));
    }
    let support = dilate_cube(cube, a.filter().support() as u32)?;
    let period = a.domain().side();
    for (i, &v) in f.samples().iter().enumerate() {
        if v != 0.0 && !contains_periodic(&support, &f.midpoint(i), period) {
            return Err(Error::AtomViolation(format!(
                "atom is nonzero at {:?}, outside the dilated cube",
                f.midpoint(i)
            )));
        }
    }
    Ok(PsiAtom {
        coeffs: a.clone(),
        cube: cube.clone(),
        l2_norm,
    })
}

/// One term `μ · a` of an atomic decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomTerm {
    pub mu: f64,
    pub atom: PsiAtom,
    pub generation: i32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AtomicDecomposition {
    pub terms: Vec<AtomTerm>,
    pub l1_mass: f64,
}

impl AtomicDecomposition {
    /// `Σ μ_ℓ a_ℓ` as coefficients in the basis of `template`.
    pub fn reconstruct(&self, template: &WaveletCoeffs) -> Result<WaveletCoeffs> {
        let mut out = template.zeros_like();
        for term in &self.terms {
            out = out.axpby(1.0, term.atom.coeffs(), term.mu)?;
        }
        Ok(out)
    }
}

/// Serializable summary of one term.
#[derive(Clone, Debug, Serialize)]
pub struct AtomSummary {
    pub mu: f64,
    pub level: i32,
    pub corner: Vec<i64>,
    pub l2_norm: f64,
    pub generation: i32,
}

impl AtomicDecomposition {
    pub fn summaries(&self) -> Vec<AtomSummary> {
        self.terms
            .iter()
            .map(|t| AtomSummary {
                mu: t.mu,
                level: t.atom.cube().level,
                corner: t.atom.cube().corner.clone(),
                l2_norm: t.atom.l2_norm(),
                generation: t.generation,
            })
            .collect()
    }
}

/// Largest `k` with `2^k < v`, for `v > 0`.
fn generation_of(v: f64) -> i32 {
    let mut k = v.log2().floor() as i32;
    while (2f64).powi(k) >= v {
        k -= 1;
    }
    while (2f64).powi(k + 1) < v {
        k += 1;
    }
    k
}

/// Fine-grid flat indices of the cells of a box-local cube.
fn cells_of(n_fine: usize, dims: usize, level_cells: usize, local: &[usize]) -> Vec<usize> {
    let d = n_fine / level_cells;
    let ranges: Vec<std::ops::Range<usize>> = local.iter().map(|&k| k * d..(k + 1) * d).collect();
    let mut out = vec![0usize];
    for r in ranges.iter().take(dims) {
        out = out
            .into_iter()
            .flat_map(|base| r.clone().map(move |i| base * n_fine + i))
            .collect();
    }
    out
}

/// Counts of fine cells of `mask` in every dyadic cube of the box, per level
/// (index 0 = coarsest box level, last = finest grid).
fn cube_counts(c: &WaveletCoeffs, mask: &[bool]) -> Vec<Vec<u32>> {
    let dims = c.dims();
    let lo = c.domain().coarsest_level();
    let levels = (c.finest_level() - lo + 1) as usize;
    let mut out: Vec<Vec<u32>> = vec![mask.iter().map(|&b| b as u32).collect()];
    for li in (0..levels - 1).rev() {
        let n = c.cells_per_axis(lo + li as i32 + 1);
        let finer = out.last().expect("non-empty");
        let mut coarser = vec![0u32; (n / 2).pow(dims as u32)];
        for (flat, &v) in finer.iter().enumerate() {
            let mut rest = flat;
            let mut parent = 0;
            let mut mult = 1;
            for _ in 0..dims {
                parent += (rest % n / 2) * mult;
                rest /= n;
                mult *= n / 2;
            }
            coarser[parent] += v;
        }
        out.push(coarser);
    }
    out.reverse();
    out
}

/// Level-set decomposition of a finite wavelet expansion into ψ-atoms.
///
/// With `S` the wavelet square function and `Ω_k = {S > 2^k}`, a cube `I`
/// belongs to generation `k` when `|I ∩ Ω_k| > |I|/2 ≥ |I ∩ Ω_{k+1}|`. The
/// cubes of generation `k` are grouped under the largest dyadic ancestor
/// `A` with `|A ∩ Ω_k| > |A|/2`; each group normalized by
/// `μ = ‖group‖₂ |A|^{1/2}` is a ψ-atom related to `A`.
pub fn atomic_decompose(c: &WaveletCoeffs) -> Result<AtomicDecomposition> {
    if c.max_abs_scaling() > SCALING_TOLERANCE * c.energy().sqrt() {
        return Err(Error::Domain(
            "atomic decomposition needs a zero scaling part".into(),
        ));
    }
    let dims = c.dims();
    let s = square_function(c);
    let n_fine = s.samples_per_axis();
    let lo = c.domain().coarsest_level();

    // Generation of every cube carrying a coefficient.
    let mut assigned: Vec<(i32, usize, i32)> = Vec::new();
    for level in c.coarse_level()..c.finest_level() {
        let cells = c.cells_per_axis(level);
        let count = cells.pow(dims as u32);
        for flat in 0..count {
            if c.labels().iter().all(|&l| c.detail(level, l)[flat] == 0.0) {
                continue;
            }
            let mut values: Vec<f64> = cells_of(n_fine, dims, cells, &c.local_index(level, flat))
                .into_iter()
                .map(|i| s.samples()[i])
                .collect();
            let rank = values.len() / 2;
            values.sort_by(|a, b| b.total_cmp(a));
            assigned.push((level, flat, generation_of(values[rank])));
        }
    }
    let mut generations: Vec<i32> = assigned.iter().map(|a| a.2).collect();
    generations.sort_unstable();
    generations.dedup();

    let mut terms = Vec::new();
    for &k in &generations {
        let threshold = (2f64).powi(k);
        let mask: Vec<bool> = s.samples().iter().map(|&v| v > threshold).collect();
        let counts = cube_counts(c, &mask);
        let mut groups: std::collections::BTreeMap<DyadicCube, WaveletCoeffs> = Default::default();
        for &(level, flat, _) in assigned.iter().filter(|a| a.2 == k) {
            let cube = c.cube(level, flat, None);
            let mut top = cube.clone();
            for anc_level in lo..=level {
                let anc = cube.ancestor(anc_level);
                let idx = c.flat_index_of(&anc).expect("ancestor inside the box");
                let cells_in =
                    (1u64 << ((c.finest_level() - anc_level) as u64 * dims as u64)) as f64;
                if counts[(anc_level - lo) as usize][idx] as f64 > cells_in / 2.0 {
                    top = anc;
                    break;
                }
            }
            let group = groups.entry(top).or_insert_with(|| c.zeros_like());
            for label in c.labels() {
                group.detail_mut(level, label)[flat] = c.detail(level, label)[flat];
            }
        }
        for (cube, group) in groups {
            let mu = group.detail_energy().sqrt() * cube.volume().sqrt();
            let atom = validate_psi_atom(&group.scaled(1.0 / mu), &cube)?;
            terms.push(AtomTerm {
                mu,
                atom,
                generation: k,
            });
        }
    }
    let l1_mass = terms.iter().map(|t| t.mu.abs()).sum();
    Ok(AtomicDecomposition { terms, l1_mass })
}

/// `Π2(a, g) = h⁽¹⁾ + g_R · a` for a ψ-atom `a` related to `R`, with the
/// quantities bounding `h⁽¹⁾` and the normalization of `a` as a classical atom.
#[derive(Clone, Debug, Serialize)]
pub struct Pi2AtomSplit {
    #[serde(skip)]
    pub h1: GridFunction,
    /// `κ g_R h⁽²⁾`, equal to `g_R · a`.
    #[serde(skip)]
    pub second: GridFunction,
    /// `‖a‖₂ |mR|^{1/2}`, making `h⁽²⁾ = a/κ` a unit classical atom on `mR`.
    pub kappa: f64,
    pub g_r: f64,
    pub diagnostics: Pi2Diagnostics,
}

#[derive(Clone, Debug, Serialize)]
pub struct Pi2Diagnostics {
    /// `‖h⁽¹⁾ + second - Π2(a,g)‖∞ / (‖a‖∞ ‖g‖∞)`.
    pub recombination_residual: f64,
    /// `‖b‖₂` of the localized part of `g`.
    pub b_l2: f64,
    /// `sqrt(N) ‖g‖_BMO |R|^{1/2}` with `N` the number of distinct cubes of
    /// the scale of `R` containing the cubes of `b`.
    pub b_bound: f64,
    pub b_cubes: usize,
    /// Number of cubes `I` of the scale of `R` with `mI ∩ mR ≠ ∅`.
    pub neighbor_cubes: usize,
    /// `max_I |∫ h_I|` with `h_I = |I|^{1/2} φ_I a`.
    pub max_h_mean: f64,
    /// `max_I ‖h_I‖₂ |mR|^{1/2}`.
    pub max_h_scaled_l2: f64,
    /// `‖φ‖∞ m^{n/2} ‖a‖₂ |R|^{1/2}`.
    pub h_bound: f64,
    /// `max_I |∫ γ_I|` with `γ_I = |R|^{-1} χ_R - |I|^{-1/2} φ_I`.
    pub max_gamma_integral: f64,
    /// `max_I |g_R - |I|^{-1/2} ⟨g, φ_I⟩| / ‖g‖_BMO`.
    pub gamma_constant: f64,
    pub passed: bool,
}

/// Periodic distance between two integer corners along one axis.
fn periodic_gap(a: i64, b: i64, period: i64) -> i64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

pub fn pi2_atom_split(
    atom: &PsiAtom,
    g: &GridFunction,
    filter: &FilterPair,
) -> Result<Pi2AtomSplit> {
    let cube = atom.cube().clone();
    let validated = validate_psi_atom(atom.coeffs(), &cube)?;
    let a_fn = validated.synthesize();
    a_fn.ensure_same_geometry(g)?;
    let m = filter.support();
    let dims = g.dims();
    let dilated = dilate_cube(&cube, m as u32)?;
    if !g.domain().as_cube().contains_cube(&dilated) {
        return Err(Error::Domain(format!(
            "dilated cube {dilated:?} leaves the box"
        )));
    }
    let j0 = cube.level;
    let cg = dwt_forward(g, filter, j0)?;
    let basis = Basis::for_coeffs(&cg)?;

    // Localized part b: wavelets of g at scales ≥ j0 with mI ∩ mR ≠ ∅.
    let mut b_cubes = std::collections::BTreeSet::new();
    let b_coeffs = cg.restrict_details(|level, label, flat| {
        let inner = cg.cube(level, flat, Some(label));
        let period = cg.cells_per_axis(level) as i64;
        let scale = 1i64 << (level - j0);
        // Centers differ by less than m(|I|+|R|)/2 along every axis.
        let close = inner.corner.iter().zip(&cube.corner).all(|(&k, &r)| {
            let twice_gap = periodic_gap(2 * k + 1, (2 * r + 1) * scale, 2 * period);
            (twice_gap as f64) < (m as f64) * (1 + scale) as f64
        });
        if close {
            b_cubes.insert(inner.ancestor(j0).corner.clone());
        }
        close
    });
    let b_fn = dwt_inverse(&b_coeffs);
    let pi2_ab = paraproduct_split(&a_fn, &b_fn, filter, j0, false)?.pi2;

    let g_r = g.mean_over(&cube.to_cube())?;
    let bmo = bmo_wavelet_norm(&cg);
    let r_volume = cube.volume();
    let level_cells = cg.cells_per_axis(j0) as i64;
    let offset: Vec<i64> = g
        .domain()
        .origin()
        .iter()
        .map(|o| (o * (2f64).powi(j0)).round() as i64)
        .collect();
    let indicator = GridFunction::from_fn(g.domain().clone(), g.level(), |x| {
        if cube.to_cube().contains_point(x) {
            1.0 / r_volume
        } else {
            0.0
        }
    })?;

    let mut h1 = pi2_ab;
    let mut neighbor_cubes = 0;
    let mut max_h_mean: f64 = 0.0;
    let mut max_h_scaled_l2: f64 = 0.0;
    let mut max_gamma_integral: f64 = 0.0;
    let mut max_gamma_pairing: f64 = 0.0;
    let mut phi_sup: f64 = 0.0;
    let radius = m as i64 - 1;
    let shifts: Vec<Vec<i64>> = (0..dims).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|p| {
                (-radius..=radius).map(move |d| {
                    let mut q = p.clone();
                    q.push(d);
                    q
                })
            })
            .collect()
    });
    let mut seen = std::collections::BTreeSet::new();
    for shift in shifts {
        let local: Vec<usize> = cube
            .corner
            .iter()
            .zip(&shift)
            .zip(&offset)
            .map(|((&k, &d), &o)| (k + d - o).rem_euclid(level_cells) as usize)
            .collect();
        if !seen.insert(local.clone()) {
            continue;
        }
        neighbor_cubes += 1;
        let phi = basis.evaluate(j0, &local, None);
        let side_root = r_volume.sqrt();
        phi_sup = phi_sup.max(phi.sup_norm() * side_root);
        let h = phi.mul(&a_fn)?.scale(side_root);
        max_h_mean = max_h_mean.max(integrate(&h).abs());
        let h_l2 = inner_product(&h, &h)?.sqrt();
        max_h_scaled_l2 = max_h_scaled_l2.max(h_l2 * dilated.side.powi(dims as i32).sqrt());
        let coarse_mean = inner_product(g, &phi)? / side_root;
        h1 = h1.add(&h.scale(coarse_mean - g_r))?;
        let gamma = indicator.sub(&phi.scale(1.0 / side_root))?;
        max_gamma_integral = max_gamma_integral.max(integrate(&gamma).abs());
        max_gamma_pairing = max_gamma_pairing.max((g_r - coarse_mean).abs());
    }

    let second = a_fn.scale(g_r);
    let reference = paraproduct_split(&a_fn, g, filter, j0, false)?.pi2;
    let scale = (a_fn.sup_norm() * g.sup_norm()).max(f64::MIN_POSITIVE);
    let recombination_residual = h1.add(&second)?.sub(&reference)?.sup_norm() / scale;
    let b_l2 = inner_product(&b_fn, &b_fn)?.sqrt();
    let b_bound = (b_cubes.len() as f64).sqrt() * bmo * r_volume.sqrt();
    let h_bound =
        phi_sup * (m as f64).powf(dims as f64 / 2.0) * validated.l2_norm() * r_volume.sqrt();
    let gamma_constant = if bmo > 0.0 {
        max_gamma_pairing / bmo
    } else {
        0.0
    };
    let mr_volume = dilated.side.powi(dims as i32);
    let passed = recombination_residual <= 1e-10
        && b_l2 <= b_bound * (1.0 + 1e-10) + 1e-14
        && max_h_mean <= 1e-8
        && max_h_scaled_l2 <= h_bound * (1.0 + 1e-12)
        && max_gamma_integral <= 1e-10;
    Ok(Pi2AtomSplit {
        h1,
        second,
        kappa: validated.l2_norm() * mr_volume.sqrt(),
        g_r,
        diagnostics: Pi2Diagnostics {
            recombination_residual,
            b_l2,
            b_bound,
            b_cubes: b_cubes.len(),
            neighbor_cubes,
            max_h_mean,
            max_h_scaled_l2,
            h_bound,
            max_gamma_integral,
            gamma_constant,
            passed,
        },
    })
}

/// `∫ |g - g_{mR}| M(a)` and its ratio to `‖g‖_BMO`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClassicalPairing {
    pub value: f64,
    pub bmo_g: f64,
    pub ratio: f64,
}

pub fn classical_atom_pairing(
    atom: &PsiAtom,
    g: &GridFunction,
    params: &GrandMaximalParams,
) -> Result<ClassicalPairing> {
    let a_fn = atom.synthesize();
    a_fn.ensure_same_geometry(g)?;
    let filter = atom.coeffs().filter();
    let dilated = dilate_cube(atom.cube(), filter.support() as u32)?;
    let base = if g.domain().as_cube().contains_cube(&dilated) {
        dilated
    } else {
        atom.cube().to_cube()
    };
    let mean = g.mean_over(&base)?;
    let maximal = grand_maximal(&a_fn, params)?;
    let value = g.cell_volume()
        * g.samples()
            .iter()
            .zip(maximal.samples())
            .map(|(gv, mv)| (gv - mean).abs() * mv)
            .sum::<f64>();
    let gc = dwt_forward(g, filter, g.domain().coarsest_level())?;
    let bmo_g = bmo_wavelet_norm(&gc);
    Ok(ClassicalPairing {
        value,
        bmo_g,
        ratio: if bmo_g > 0.0 { value / bmo_g } else { 0.0 },
    })
}

/// `l1_mass / ‖c‖_{H¹}` of the decomposition of `c`.
pub fn mass_ratio(c: &WaveletCoeffs, d: &AtomicDecomposition) -> Result<f64> {
    let h1 = h1_square_norm(c)?;
    Ok(if h1 > 0.0 { d.l1_mass / h1 } else { 0.0 })
}

/// A single-coefficient atom on `(R, λ)` with `‖a‖₂ = |R|^{-1/2}`.
pub fn unit_atom(
    filter: &FilterPair,
    domain: &crate::grid::GridBox,
    finest: i32,
    cube: &DyadicCube,
    label: Label,
) -> Result<PsiAtom> {
    let mut c = WaveletCoeffs::zeros(filter, domain, domain.coarsest_level(), finest)?;
    c.set(&cube.clone().with_label(label), cube.volume().powf(-0.5))?;
    validate_psi_atom(&c, cube)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridBox;
    use crate::wavelet::load_filter;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_coefficient_validity_depends_on_cube_volume() {
        let db3 = load_filter("db3").unwrap();
        let domain = GridBox::new(vec![0.0], 4.0).unwrap();
        let mut c = WaveletCoeffs::zeros(&db3, &domain, -2, 8).unwrap();
        let small = DyadicCube::new(1, vec![3]);
        c.set(&small.clone().with_label(Label(1)), 1.0).unwrap();
        assert!(validate_psi_atom(&c, &small).is_ok());
        let mut big = c.zeros_like();
        let large = DyadicCube::new(-1, vec![0]);
        big.set(&large.clone().with_label(Label(1)), 1.0).unwrap();
        assert!(matches!(
            validate_psi_atom(&big, &large),
            Err(Error::AtomViolation(_))
        ));
    }

    #[test]
    fn coefficient_outside_cube_is_rejected() {
        let db2 = load_filter("db2").unwrap();
        let mut c = WaveletCoeffs::zeros(&db2, &GridBox::unit(1), 0, 8).unwrap();
        c.set(&DyadicCube::new(4, vec![9]).with_label(Label(1)), 0.1)
            .unwrap();
        assert!(validate_psi_atom(&c, &DyadicCube::new(1, vec![0])).is_err());
        assert!(validate_psi_atom(&c, &DyadicCube::new(1, vec![1])).is_ok());
    }

    #[test]
    fn random_normalized_atom_is_accepted() {
        let db4 = load_filter("db4").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = DyadicCube::new(2, vec![1, 2]);
        let mut c = WaveletCoeffs::zeros(&db4, &GridBox::unit(2), 0, 6).unwrap();
        for level in 2..6 {
            let d = 1i64 << (level - 2);
            for _ in 0..5 {
                let corner = vec![d + rng.gen_range(0..d), 2 * d + rng.gen_range(0..d)];
                let label = Label(rng.gen_range(1..4));
                c.set(
                    &DyadicCube {
                        level,
                        corner,
                        label: Some(label),
                    },
                    rng.gen_range(-1.0..1.0),
                )
                .unwrap();
            }
        }
        let scaled = c.scaled(r.volume().powf(-0.5) / c.detail_energy().sqrt());
        let atom = validate_psi_atom(&scaled, &r).unwrap();
        assert!((atom.l2_norm() - 4.0).abs() < 1e-12);
        assert!(integrate(&atom.synthesize()).abs() <= 1e-10);
    }

    #[test]
    fn generation_rule() {
        assert_eq!(generation_of(1.0), -1);
        assert_eq!(generation_of(1.5), 0);
        assert_eq!(generation_of(2.0), 0);
        assert_eq!(generation_of(2.0000001), 1);
        assert_eq!(generation_of(0.3), -2);
    }

    #[test]
    fn single_atom_decomposes_to_itself() {
        let db3 = load_filter("db3").unwrap();
        let mut c = WaveletCoeffs::zeros(&db3, &GridBox::unit(1), 0, 10).unwrap();
        let cube = DyadicCube::new(5, vec![11]);
        c.set(&cube.clone().with_label(Label(1)), -2.5).unwrap();
        let d = atomic_decompose(&c).unwrap();
        assert_eq!(d.terms.len(), 1);
        assert_eq!(d.terms[0].atom.cube(), &cube);
        assert!((d.l1_mass - h1_square_norm(&c).unwrap()).abs() < 1e-10);
        assert_eq!(d.reconstruct(&c).unwrap().detail(5, Label(1))[11], -2.5);
        let empty = atomic_decompose(&c.zeros_like()).unwrap();
        assert!(empty.terms.is_empty() && empty.l1_mass == 0.0);
    }

    #[test]
    fn decomposition_reconstructs_random_input() {
        let db3 = load_filter("db3").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut c = WaveletCoeffs::zeros(&db3, &GridBox::unit(1), 0, 10).unwrap();
        for _ in 0..60 {
            let level = rng.gen_range(0..10);
            let k = rng.gen_range(0..(1i64 << level));
            c.set(
                &DyadicCube::new(level, vec![k]).with_label(Label(1)),
                rng.gen_range(-1.0..1.0) * (2f64).powf(-0.5 * level as f64),
            )
            .unwrap();
        }
        let d = atomic_decompose(&c).unwrap();
        let back = d.reconstruct(&c).unwrap();
        let err = back.axpby(1.0, &c, -1.0).unwrap().energy().sqrt();
        assert!(err <= 1e-12 * c.energy().sqrt());
        let ratio = mass_ratio(&c, &d).unwrap();
        assert!(ratio >= 1.0 - 1e-12, "{ratio}");
    }

    #[test]
    fn constant_g_split() {
        let db3 = load_filter("db3").unwrap();
        let domain = GridBox::unit(1);
        let atom = unit_atom(&db3, &domain, 9, &DyadicCube::new(3, vec![4]), Label(1)).unwrap();
        let g = GridFunction::constant(domain, 9, 1.5).unwrap();
        let split = pi2_atom_split(&atom, &g, &db3).unwrap();
        assert!(split.h1.sup_norm() < 1e-10);
        assert!(
            split
                .second
                .sub(&atom.synthesize().scale(1.5))
                .unwrap()
                .sup_norm()
                < 1e-12
        );
        assert!(split.diagnostics.passed, "{:?}", split.diagnostics);
    }

    #[test]
    fn split_requires_interior_cube() {
        let db3 = load_filter("db3").unwrap();
        let domain = GridBox::unit(1);
        let atom = unit_atom(&db3, &domain, 9, &DyadicCube::new(3, vec![0]), Label(1)).unwrap();
        let g = GridFunction::constant(domain, 9, 1.0).unwrap();
        assert!(matches!(
            pi2_atom_split(&atom, &g, &db3),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn classical_pairing_of_constant_is_zero() {
        let haar = load_filter("haar").unwrap();
        let domain = GridBox::unit(1);
        let atom = unit_atom(&haar, &domain, 8, &DyadicCube::new(0, vec![0]), Label(1)).unwrap();
        let g = GridFunction::constant(domain.clone(), 8, 2.0).unwrap();
        let p = classical_atom_pairing(&atom, &g, &GrandMaximalParams::default()).unwrap();
        assert!(p.value.abs() < 1e-12);
        let psi = atom.synthesize();
        let p = classical_atom_pairing(&atom, &psi, &GrandMaximalParams::default()).unwrap();
        assert!(p.value.is_finite() && p.value > 0.0 && p.ratio.is_finite());
    }
}
