//! The wavelet decomposition `fg = Π1 + Π2 + Π3 (+ coarse)`, the diagonal
//! part `S₀`, the molecule remainder `Π3 - S₀`, the almost-diagonal weights
//! `p_δ` and the bilinear form `B(f,g) = S₀(Af, g) + S₀(f, Ag)`.

use serde::Serialize;

use crate::divcurl::MultiplierOperator;
use crate::error::{Error, Result};
use crate::fourier::Spectral;
use crate::grid::{inner_product, DyadicCube, GridFunction, Label};
use crate::spaces::{bmo_wavelet_norm, h1_square_norm};
use crate::wavelet::{dwt_forward, dwt_inverse, Basis, FilterPair, WaveletCoeffs};

/// The pieces of the product of two grid functions.
///
/// `pi1 + pi2 + pi3 + coarse = f·g` up to roundoff. When the coarse term is
/// folded, it is added to `pi2` and `coarse` is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductSplit {
    pub pi1: GridFunction,
    pub pi2: GridFunction,
    pub pi3: GridFunction,
    pub coarse: GridFunction,
    pub coarse_folded: bool,
}

impl ProductSplit {
    /// `S(f,g) = Π3`.
    pub fn s(&self) -> &GridFunction {
        &self.pi3
    }

    /// `T(f,g) = Π1 + Π2`.
    pub fn t(&self) -> GridFunction {
        self.pi1.add(&self.pi2).expect("pieces share geometry")
    }

    pub fn total(&self) -> GridFunction {
        self.t()
            .add(&self.pi3)
            .and_then(|s| s.add(&self.coarse))
            .expect("pieces share geometry")
    }
}

/// Samples of `P_j f` for `j = j0, ..., J`; the last entry is `f` itself.
fn approximations(f: &GridFunction, c: &WaveletCoeffs) -> Result<Vec<GridFunction>> {
    let mut out = (c.coarse_level()..c.finest_level())
        .map(|j| c.approximation(j))
        .collect::<Result<Vec<_>>>()?;
    out.push(f.clone());
    Ok(out)
}

/// `Σ_j lows_j · (highs_{j+1} - highs_j)`, accumulated in ascending `j`.
fn low_high(lows: &[GridFunction], highs: &[GridFunction]) -> Vec<f64> {
    let mut acc = vec![0.0; lows[0].len()];
    for j in 0..lows.len() - 1 {
        let (l, h0, h1) = (
            lows[j].samples(),
            highs[j].samples(),
            highs[j + 1].samples(),
        );
        for i in 0..acc.len() {
            acc[i] += l[i] * (h1[i] - h0[i]);
        }
    }
    acc
}

fn high_high(a: &[GridFunction], b: &[GridFunction]) -> Vec<f64> {
    let mut acc = vec![0.0; a[0].len()];
    for j in 0..a.len() - 1 {
        let (a0, a1, b0, b1) = (
            a[j].samples(),
            a[j + 1].samples(),
            b[j].samples(),
            b[j + 1].samples(),
        );
        for i in 0..acc.len() {
            acc[i] += (a1[i] - a0[i]) * (b1[i] - b0[i]);
        }
    }
    acc
}

fn split_from_coeffs(
    f: &GridFunction,
    cf: &WaveletCoeffs,
    g: &GridFunction,
    cg: &WaveletCoeffs,
    fold_coarse: bool,
) -> Result<ProductSplit> {
    let a = approximations(f, cf)?;
    let b = approximations(g, cg)?;
    let wrap = |samples: Vec<f64>| GridFunction::new(f.domain().clone(), f.level(), samples);
    let pi1 = low_high(&a, &b);
    let mut pi2 = low_high(&b, &a);
    let pi3 = high_high(&a, &b);
    let mut coarse: Vec<f64> = a[0]
        .samples()
        .iter()
        .zip(b[0].samples())
        .map(|(x, y)| x * y)
        .collect();
    if fold_coarse {
        for (p, c) in pi2.iter_mut().zip(coarse.iter_mut()) {
            *p += *c;
            *c = 0.0;
        }
    }
    Ok(ProductSplit {
        pi1: wrap(pi1)?,
        pi2: wrap(pi2)?,
        pi3: wrap(pi3)?,
        coarse: wrap(coarse)?,
        coarse_folded: fold_coarse,
    })
}

/// Splits `f·g` with `a_j = P_j f`, `b_j = P_j g` for `j0 ≤ j ≤ J`:
/// `Π1 = Σ a_j (b_{j+1} - b_j)`, `Π2 = Σ (a_{j+1} - a_j) b_j`,
/// `Π3 = Σ (a_{j+1} - a_j)(b_{j+1} - b_j)` and `coarse = a_{j0} b_{j0}`.
pub fn paraproduct_split(
    f: &GridFunction,
    g: &GridFunction,
    filter: &FilterPair,
    coarse: i32,
    fold_coarse: bool,
) -> Result<ProductSplit> {
    f.ensure_same_geometry(g)?;
    let cf = dwt_forward(f, filter, coarse)?;
    let cg = dwt_forward(g, filter, coarse)?;
    split_from_coeffs(f, &cf, g, &cg, fold_coarse)
}

/// The chain `‖Π3‖₁ ≤ Σ_j ‖Q_j f‖₂ ‖Q_j g‖₂ ≤ ‖f‖₂ ‖g‖₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Pi3Chain {
    pub pi3_l1: f64,
    pub detail_sum: f64,
    pub l2_product: f64,
}

impl Pi3Chain {
    pub fn holds(&self, slack: f64) -> bool {
        self.pi3_l1 <= self.detail_sum + slack && self.detail_sum <= self.l2_product + slack
    }
}

pub fn pi3_l1_bound(
    f: &GridFunction,
    g: &GridFunction,
    filter: &FilterPair,
    coarse: i32,
) -> Result<Pi3Chain> {
    f.ensure_same_geometry(g)?;
    let cf = dwt_forward(f, filter, coarse)?;
    let cg = dwt_forward(g, filter, coarse)?;
    let split = split_from_coeffs(f, &cf, g, &cg, false)?;
    let pi3_l1 = split.pi3.cell_volume() * split.pi3.samples().iter().map(|v| v.abs()).sum::<f64>();
    let detail_sum = (coarse..f.level())
        .map(|j| (cf.level_energy(j) * cg.level_energy(j)).sqrt())
        .sum();
    let l2_product = (inner_product(f, f)? * inner_product(g, g)?).sqrt();
    Ok(Pi3Chain {
        pi3_l1,
        detail_sum,
        l2_product,
    })
}

/// `S₀(f,g) = Σ_{I,λ} ⟨f,ψ_I^λ⟩⟨g,ψ_I^λ⟩ |ψ_I^λ|²` on the finest grid.
pub fn s0(fc: &WaveletCoeffs, gc: &WaveletCoeffs) -> Result<GridFunction> {
    fc.ensure_same_basis(gc)?;
    let basis = Basis::for_coeffs(fc)?;
    s0_with(&basis, fc, gc)
}

fn s0_with(basis: &Basis, fc: &WaveletCoeffs, gc: &WaveletCoeffs) -> Result<GridFunction> {
    let mut out = GridFunction::zeros(fc.domain().clone(), fc.finest_level())?;
    let samples = out.samples_mut();
    for level in fc.coarse_level()..fc.finest_level() {
        for label in fc.labels() {
            let (a, b) = (fc.detail(level, label), gc.detail(level, label));
            for flat in 0..a.len() {
                let w = a[flat] * b[flat];
                if w != 0.0 {
                    let local = fc.local_index(level, flat);
                    basis
                        .for_each_value(level, &local, Some(label), |i, v| samples[i] += w * v * v);
                }
            }
        }
    }
    Ok(out)
}

/// Integer points of `(-m, m]^n`, the neighbor offsets of same-scale cubes
/// whose wavelets can overlap.
pub fn neighbor_set(m: usize, dims: usize) -> Vec<Vec<i64>> {
    let m = m as i64;
    let axis: Vec<i64> = (-m + 1..=m).collect();
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..dims {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Diagnostics of the remainder `Π3 - S₀`.
#[derive(Clone, Debug, Serialize)]
pub struct MoleculeReport {
    #[serde(skip)]
    pub remainder: GridFunction,
    /// `|∫(Π3 - S₀)|`.
    pub remainder_integral: f64,
    /// Largest `|∫ ψ_I^λ ψ_{I'}^{λ'}|` over same-scale pairs `(I,λ) ≠ (I',λ')`
    /// with `I' = I + k|I|^{1/n}`, `k ∈ K`.
    pub max_abs_cross_mean: f64,
    /// Same-scale pairs with offsets outside `K` whose product is not
    /// identically zero, on levels where `K` does not wrap around the box.
    pub support_violations: usize,
    pub neighbor_count: usize,
}

/// `∫ T_a(x) T_b(x - k·2^{-j})` for the 1D templates of one level, for every
/// periodic shift `k` of that level. Indexed `[a][b][k]` with 0 = φ, 1 = ψ.
fn level_correlations(
    basis: &Basis,
    level: i32,
    shifts: usize,
) -> ([[Vec<f64>; 2]; 2], [[Vec<bool>; 2]; 2]) {
    let n = basis.samples_per_axis();
    let d = n / shifts;
    let h = basis.domain().side() / n as f64;
    let mut values: [[Vec<f64>; 2]; 2] = Default::default();
    let mut overlap: [[Vec<bool>; 2]; 2] = Default::default();
    for a in 0..2 {
        for b in 0..2 {
            let (ta, tb) = (basis.line(level, a == 1), basis.line(level, b == 1));
            for k in 0..shifts {
                let mut sum = 0.0;
                let mut touches = false;
                for i in 0..n {
                    let p = ta[i] * tb[(i + n - k * d) % n];
                    sum += p;
                    touches |= p != 0.0;
                }
                values[a][b].push(sum * h);
                overlap[a][b].push(touches);
            }
        }
    }
    (values, overlap)
}

/// `Π3 - S₀` and the mean/support properties of its cross terms.
pub fn molecule_remainder(
    f: &GridFunction,
    g: &GridFunction,
    filter: &FilterPair,
    coarse: i32,
) -> Result<MoleculeReport> {
    f.ensure_same_geometry(g)?;
    let cf = dwt_forward(f, filter, coarse)?;
    let cg = dwt_forward(g, filter, coarse)?;
    let split = split_from_coeffs(f, &cf, g, &cg, false)?;
    let basis = Basis::for_coeffs(&cf)?;
    let diagonal = s0_with(&basis, &cf, &cg)?;
    let remainder = split.pi3.sub(&diagonal)?;
    let remainder_integral = crate::grid::integrate(&remainder).abs();

    let m = filter.support();
    let dims = f.dims();
    let neighbors = neighbor_set(m, dims);
    let labels = Label::all(dims);
    let mut max_abs_cross_mean: f64 = 0.0;
    let mut support_violations = 0;
    for level in coarse..f.level() {
        let cells = cf.cells_per_axis(level);
        let (corr, overlap) = level_correlations(&basis, level, cells);
        for k in &neighbors {
            let residues: Vec<usize> = k
                .iter()
                .map(|&v| v.rem_euclid(cells as i64) as usize)
                .collect();
            for &la in &labels {
                for &lb in &labels {
                    if la == lb && residues.iter().all(|&r| r == 0) {
                        continue;
                    }
                    let value: f64 = (0..dims)
                        .map(|ax| {
                            corr[la.is_high(ax) as usize][lb.is_high(ax) as usize][residues[ax]]
                        })
                        .product();
                    max_abs_cross_mean = max_abs_cross_mean.max(value.abs());
                }
            }
        }
        if cells > 2 * m {
            for r in m + 1..cells - m {
                for a in 0..2 {
                    for b in 0..2 {
                        support_violations += overlap[a][b][r] as usize;
                    }
                }
            }
        }
    }
    Ok(MoleculeReport {
        remainder,
        remainder_integral,
        max_abs_cross_mean,
        support_violations,
        neighbor_count: neighbors.len(),
    })
}

/// `p_δ(I,I') = 2^{-|j-j'|(δ+n/2)} ((2^{-j}+2^{-j'}) / (2^{-j}+2^{-j'}+|x_I-x_{I'}|))^{n+δ}`.
pub fn p_delta(a: &DyadicCube, b: &DyadicCube, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!(
            "delta must lie in (0, 1], got {delta}"
        )));
    }
    if a.dims() != b.dims() {
        return Err(Error::Geometry("cubes of different dimensions".into()));
    }
    let n = a.dims() as f64;
    let gap = (a.level - b.level).unsigned_abs() as f64;
    let widths = a.side() + b.side();
    let distance = a
        .center()
        .iter()
        .zip(b.center())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    Ok((2f64).powf(-gap * (delta + n / 2.0)) * (widths / (widths + distance)).powf(n + delta))
}

/// Measurements of `B(f,g) = S₀(Af, g) + S₀(f, Ag)`.
#[derive(Clone, Debug, Serialize)]
pub struct BilinearReport {
    #[serde(skip)]
    pub b: GridFunction,
    /// H¹ square-function norm of `B` with its coarse part removed.
    pub h1_b: f64,
    /// H¹ norm of `f` with its coarse part removed.
    pub h1_f: f64,
    pub bmo_g: f64,
    /// `h1_b / (h1_f · bmo_g)`.
    pub ratio: f64,
    /// `Σ_{I,λ} |⟨f,ψ_I^λ⟩| |⟨g,ψ_I^λ⟩|`.
    pub pairing_sum: f64,
    /// `pairing_sum / (h1_f · bmo_g)`.
    pub pairing_ratio: f64,
    /// `|⟨Af, f⟩| / ‖f‖₂²`.
    pub antisymmetry: f64,
}

fn ensure_odd(op: &MultiplierOperator, plan: &Spectral) -> Result<()> {
    if !op.is_odd() || op.oddness_defect(plan) > 0.0 {
        return Err(Error::Domain(format!(
            "multiplier `{}` is not odd",
            op.name()
        )));
    }
    Ok(())
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn bilinear_b(
    fc: &WaveletCoeffs,
    gc: &WaveletCoeffs,
    op: &MultiplierOperator,
) -> Result<BilinearReport> {
    fc.ensure_same_basis(gc)?;
    let f = dwt_inverse(fc);
    let g = dwt_inverse(gc);
    let plan = Spectral::for_grid(&f);
    ensure_odd(op, &plan)?;
    let af = op.apply_with(&plan, &f)?;
    let ag = op.apply_with(&plan, &g)?;
    let (filter, coarse) = (fc.filter(), fc.coarse_level());
    let afc = dwt_forward(&af, filter, coarse)?;
    let agc = dwt_forward(&ag, filter, coarse)?;
    let basis = Basis::for_coeffs(fc)?;
    let b = s0_with(&basis, &afc, gc)?.add(&s0_with(&basis, fc, &agc)?)?;

    let mut bc = dwt_forward(&b, filter, coarse)?;
    bc.clear_scaling();
    let h1_b = h1_square_norm(&bc)?;
    let mut fd = fc.clone();
    fd.clear_scaling();
    let h1_f = h1_square_norm(&fd)?;
    let bmo_g = bmo_wavelet_norm(gc);
    let pairing_sum = fc
        .iter_details()
        .map(|(level, label, flat, v)| (v * gc.detail(level, label)[flat]).abs())
        .sum::<f64>();
    let energy = inner_product(&f, &f)?;
    Ok(BilinearReport {
        b,
        h1_b,
        h1_f,
        bmo_g,
        ratio: safe_ratio(h1_b, h1_f * bmo_g),
        pairing_sum,
        pairing_ratio: safe_ratio(pairing_sum, h1_f * bmo_g),
        antisymmetry: safe_ratio(inner_product(&af, &f)?.abs(), energy),
    })
}

/// Measured almost-diagonal constant `max |⟨Aψ_I^λ, ψ_{I'}^{λ'}⟩| / p_δ(I,I')`
/// over a fixed family of interior wavelets.
#[derive(Clone, Debug, Serialize)]
pub struct AlmostDiagonal {
    pub constant: f64,
    pub pairs: usize,
    pub delta: f64,
}

/// Interior wavelets at levels `2..=min(J-2, 5)` whose cubes lie in
/// `[1/4, 3/4)^n` of the unit box, at most `per_level` per level and label.
fn interior_family(coeffs: &WaveletCoeffs, per_level: usize) -> Vec<(i32, usize, Label)> {
    let mut out = Vec::new();
    let top = (coeffs.finest_level() - 2).min(5);
    for level in coeffs.coarse_level().max(2)..=top {
        let n = coeffs.cells_per_axis(level);
        let lo = n / 4;
        let hi = 3 * n / 4;
        let count = n.pow(coeffs.dims() as u32);
        let inside: Vec<usize> = (0..count)
            .filter(|&flat| {
                coeffs
                    .local_index(level, flat)
                    .iter()
                    .all(|&i| i >= lo && i < hi)
            })
            .collect();
        let step = inside.len().div_ceil(per_level).max(1);
        for label in coeffs.labels() {
            for &flat in inside.iter().step_by(step) {
                out.push((level, flat, label));
            }
        }
    }
    out
}

pub fn almost_diagonal_constant(
    op: &MultiplierOperator,
    filter: &FilterPair,
    domain: &crate::grid::GridBox,
    finest: i32,
    delta: f64,
    per_level: usize,
) -> Result<AlmostDiagonal> {
    let coeffs = WaveletCoeffs::zeros(filter, domain, domain.coarsest_level(), finest)?;
    let basis = Basis::for_coeffs(&coeffs)?;
    let plan = Spectral::new(basis.samples_per_axis(), domain.dims(), domain.side());
    ensure_odd(op, &plan)?;
    let family = interior_family(&coeffs, per_level);
    let functions: Vec<GridFunction> = family
        .iter()
        .map(|&(level, flat, label)| {
            basis.evaluate(level, &coeffs.local_index(level, flat), Some(label))
        })
        .collect();
    let mut constant: f64 = 0.0;
    let mut pairs = 0;
    for (i, psi) in functions.iter().enumerate() {
        let a_psi = op.apply_with(&plan, psi)?;
        let (li, fi, lab_i) = family[i];
        let cube_i = coeffs.cube(li, fi, Some(lab_i));
        for (k, other) in functions.iter().enumerate() {
            let (lk, fk, lab_k) = family[k];
            let cube_k = coeffs.cube(lk, fk, Some(lab_k));
            let value = inner_product(&a_psi, other)?.abs();
            constant = constant.max(value / p_delta(&cube_i, &cube_k, delta)?);
            pairs += 1;
        }
    }
    Ok(AlmostDiagonal {
        constant,
        pairs,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{integrate, GridBox};
    use crate::wavelet::{load_filter, synthesize};

    fn haar_psi(level: i32) -> GridFunction {
        let haar = load_filter("haar").unwrap();
        synthesize(
            &haar,
            &GridBox::unit(1),
            level,
            &DyadicCube::new(0, vec![0]).with_label(Label(1)),
        )
        .unwrap()
    }

    #[test]
    fn haar_single_scale_product() {
        let haar = load_filter("haar").unwrap();
        let psi = haar_psi(6);
        let s = paraproduct_split(&psi, &psi, &haar, 0, false).unwrap();
        assert!(s.pi1.sup_norm() < 1e-15 && s.pi2.sup_norm() < 1e-15);
        assert!(s.coarse.sup_norm() < 1e-15);
        assert!(s.pi3.samples().iter().all(|v| (v - 1.0).abs() < 1e-14));
        let chain = pi3_l1_bound(&psi, &psi, &haar, 0).unwrap();
        for v in [chain.pi3_l1, chain.detail_sum, chain.l2_product] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_factor() {
        let db3 = load_filter("db3").unwrap();
        let f = GridFunction::from_fn(GridBox::unit(1), 8, |x| (x[0] * 7.0).sin() + x[0]).unwrap();
        let g = GridFunction::constant(GridBox::unit(1), 8, 2.0).unwrap();
        let s = paraproduct_split(&f, &g, &db3, 0, false).unwrap();
        assert!(s.pi1.sup_norm() < 1e-12 && s.pi3.sup_norm() < 1e-12);
        let p0 = crate::wavelet::project(&f, &db3, 0, crate::wavelet::Part::P).unwrap();
        assert!(
            s.pi2
                .sub(&f.sub(&p0).unwrap().scale(2.0))
                .unwrap()
                .sup_norm()
                < 1e-12
        );
        assert!(s.coarse.sub(&p0.scale(2.0)).unwrap().sup_norm() < 1e-12);
        let folded = paraproduct_split(&f, &g, &db3, 0, true).unwrap();
        assert_eq!(folded.coarse.sup_norm(), 0.0);
        assert!(folded.pi2.sub(&f.scale(2.0)).unwrap().sup_norm() < 1e-12);
    }

    #[test]
    fn s0_unit_wavelet() {
        let db4 = load_filter("db4").unwrap();
        let mut c = WaveletCoeffs::zeros(&db4, &GridBox::unit(1), 0, 9).unwrap();
        c.set(&DyadicCube::new(4, vec![3]).with_label(Label(1)), 1.0)
            .unwrap();
        let s = s0(&c, &c).unwrap();
        assert!((integrate(&s) - 1.0).abs() < 1e-12);
        let mut other = c.zeros_like();
        other
            .set(&DyadicCube::new(5, vec![3]).with_label(Label(1)), 1.0)
            .unwrap();
        assert_eq!(s0(&c, &other).unwrap().sup_norm(), 0.0);
    }

    #[test]
    fn neighbor_set_size() {
        assert_eq!(neighbor_set(5, 1).len(), 10);
        assert_eq!(neighbor_set(3, 2).len(), 36);
        assert!(neighbor_set(1, 1) == vec![vec![0], vec![1]]);
    }

    #[test]
    fn molecule_single_coefficient_has_no_remainder() {
        let db3 = load_filter("db3").unwrap();
        let f = synthesize(
            &db3,
            &GridBox::unit(1),
            8,
            &DyadicCube::new(3, vec![2]).with_label(Label(1)),
        )
        .unwrap();
        let r = molecule_remainder(&f, &f, &db3, 0).unwrap();
        assert!(r.remainder.sup_norm() < 1e-10);
        assert!(r.max_abs_cross_mean < 1e-12);
        assert_eq!(r.support_violations, 0);
    }

    #[test]
    fn p_delta_examples() {
        let i = DyadicCube::new(3, vec![2]);
        assert_eq!(p_delta(&i, &i, 1.0).unwrap(), 1.0);
        let far = DyadicCube::new(3, vec![4]);
        assert!((p_delta(&i, &far, 1.0).unwrap() - 0.25).abs() < 1e-15);
        let other = DyadicCube::new(5, vec![-7]);
        assert_eq!(
            p_delta(&i, &other, 0.5).unwrap(),
            p_delta(&other, &i, 0.5).unwrap()
        );
        assert!(p_delta(&i, &i, 0.0).is_err());
        assert!(p_delta(&i, &i, 1.5).is_err());
    }

    #[test]
    fn bilinear_zero_and_rejections() {
        let db3 = load_filter("db3").unwrap();
        let f = GridFunction::from_fn(GridBox::unit(1), 8, |x| (x[0] * 9.0).cos()).unwrap();
        let fc = dwt_forward(&f, &db3, 0).unwrap();
        let zero = fc.zeros_like();
        let r = bilinear_b(&fc, &zero, &MultiplierOperator::hilbert()).unwrap();
        assert_eq!(r.b.sup_norm(), 0.0);
        assert!(r.antisymmetry < 1e-10);
        let even = MultiplierOperator::new("even", true, |xi| {
            rustfft::num_complex::Complex64::new(xi[0].abs(), 0.0)
        });
        assert!(matches!(bilinear_b(&fc, &fc, &even), Err(Error::Domain(_))));
    }

    #[test]
    fn almost_diagonal_constant_is_finite() {
        let db3 = load_filter("db3").unwrap();
        let r = almost_diagonal_constant(
            &MultiplierOperator::hilbert(),
            &db3,
            &GridBox::unit(1),
            9,
            1.0,
            4,
        )
        .unwrap();
        assert!(r.constant.is_finite() && r.constant > 0.0);
        assert!(r.pairs > 0);
    }
}
