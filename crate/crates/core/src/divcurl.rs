//! Fourier multipliers on periodic grids, curl-free and divergence-free
//! fields built from potentials, and the div-curl product pipeline.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fourier::Spectral;
use crate::grid::{inner_product, GridFunction};
use crate::paraproduct::paraproduct_split;
use crate::spaces::{bmo_plus_norm, h1_square_norm, hlog_norm, lp_norm, GrandMaximalParams, Lp};
use crate::wavelet::{dwt_forward, FilterPair};

/// Largest accepted imaginary part after an inverse transform.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;
/// Relative tolerance for the curl and divergence of constructed fields.
pub const FIELD_TOLERANCE: f64 = 1e-10;

type Symbol = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// A Fourier multiplier `f ↦ F⁻¹(m(ξ) F f)` on the periodic grid.
///
/// The symbol is evaluated at the physical frequencies of the grid and
/// projected onto Hermitian symmetry, so real inputs give real outputs. For
/// odd imaginary symbols this zeroes the Nyquist bins.
#[derive(Clone)]
pub struct MultiplierOperator {
    name: String,
    odd: bool,
    symbol: Arc<Symbol>,
}

impl fmt::Debug for MultiplierOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplierOperator")
            .field("name", &self.name)
            .field("odd", &self.odd)
            .finish()
    }
}

impl MultiplierOperator {
    pub fn new(
        name: &str,
        odd: bool,
        symbol: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.to_string(),
            odd,
            symbol: Arc::new(symbol),
        }
    }

    /// The `axis`-th Riesz transform, symbol `-i ξ_j / |ξ|` (0 at `ξ = 0`).
    pub fn riesz(axis: usize) -> Self {
        Self::new(&format!("riesz{}", axis + 1), true, move |xi| {
            let norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -xi[axis] / norm)
            }
        })
    }

    /// The Hilbert transform, the one-dimensional Riesz transform.
    pub fn hilbert() -> Self {
        let mut op = Self::riesz(0);
        op.name = "hilbert".into();
        op
    }

    /// Spectral partial derivative, symbol `2πi ξ_j`.
    pub fn derivative(axis: usize) -> Self {
        Self::new(&format!("d{}", axis + 1), true, move |xi| {
            Complex64::new(0.0, 2.0 * PI * xi[axis])
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_odd(&self) -> bool {
        self.odd
    }

    pub fn symbol(&self, xi: &[f64]) -> Complex64 {
        (self.symbol)(xi)
    }

    /// Hermitian-projected symbol values on the DFT bins of `plan`.
    pub fn symbol_on_grid(&self, plan: &Spectral) -> Vec<Complex64> {
        let raw: Vec<Complex64> = (0..plan.len())
            .map(|q| self.symbol(&plan.frequency(q)))
            .collect();
        (0..plan.len())
            .map(|q| 0.5 * (raw[q] + raw[plan.negated(q)].conj()))
            .collect()
    }

    /// `max |m(ξ) + m(-ξ)|` over the grid frequencies.
    pub fn oddness_defect(&self, plan: &Spectral) -> f64 {
        (0..plan.len())
            .map(|q| {
                let xi = plan.frequency(q);
                let neg: Vec<f64> = xi.iter().map(|v| -v).collect();
                (self.symbol(&xi) + self.symbol(&neg)).norm()
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.apply_with(&Spectral::for_grid(f), f)
    }

    pub fn apply_with(&self, plan: &Spectral, f: &GridFunction) -> Result<GridFunction> {
        let symbol = self.symbol_on_grid(plan);
        let spectrum: Vec<Complex64> = plan
            .forward_real(f.samples())
            .iter()
            .zip(&symbol)
            .map(|(a, m)| a * m)
            .collect();
        let out = plan.inverse(spectrum);
        let scale = out
            .iter()
            .fold(f.sup_norm(), |m, v| m.max(v.re.abs()))
            .max(1.0);
        let residue = out.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        if residue > IMAGINARY_TOLERANCE * scale {
            return Err(Error::Numerical(format!(
                "{} produced imaginary residue {residue:e}",
                self.name
            )));
        }
        GridFunction::new(
            f.domain().clone(),
            f.level(),
            out.iter().map(|v| v.re).collect(),
        )
    }
}

pub fn riesz_transform(f: &GridFunction, axis: usize) -> Result<GridFunction> {
    if axis >= f.dims() {
        return Err(Error::Domain(format!(
            "axis {axis} out of range for dimension {}",
            f.dims()
        )));
    }
    MultiplierOperator::riesz(axis).apply(f)
}

pub fn hilbert_transform(f: &GridFunction) -> Result<GridFunction> {
    if f.dims() != 1 {
        return Err(Error::Domain(
            "the Hilbert transform acts on 1D grids".into(),
        ));
    }
    MultiplierOperator::hilbert().apply(f)
}

/// `n` component functions on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    components: Vec<GridFunction>,
}

impl VectorField {
    pub fn new(components: Vec<GridFunction>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Domain("a vector field needs components".into()))?;
        if components.len() != first.dims() {
            return Err(Error::Domain(format!(
                "{} components for a {}-dimensional grid",
                components.len(),
                first.dims()
            )));
        }
        for c in &components[1..] {
            first.ensure_same_geometry(c)?;
        }
        if components
            .iter()
            .any(|c| c.samples().iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Domain("vector field has non-finite values".into()));
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[GridFunction] {
        &self.components
    }

    pub fn dims(&self) -> usize {
        self.components.len()
    }

    /// Pointwise scalar product.
    pub fn dot(&self, other: &VectorField) -> Result<GridFunction> {
        let mut acc = self.components[0].mul(&other.components[0])?;
        for (a, b) in self.components[1..].iter().zip(&other.components[1..]) {
            acc = acc.add(&a.mul(b)?)?;
        }
        Ok(acc)
    }

    /// `(Σ_j ‖F_j‖₂²)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| lp_norm(c, Lp::Two).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.sup_norm())
            .fold(0.0, f64::max)
    }
}

/// `∂₁F₂ - ∂₂F₁` in sup norm (spectral derivatives, `n = 2`).
pub fn curl_residual(field: &VectorField) -> Result<f64> {
    let [a, b] = two_components(field)?;
    let plan = Spectral::for_grid(a);
    let d1 = MultiplierOperator::derivative(0).apply_with(&plan, b)?;
    let d2 = MultiplierOperator::derivative(1).apply_with(&plan, a)?;
    Ok(d1.sub(&d2)?.sup_norm())
}

/// `∂₁G₁ + ∂₂G₂` in sup norm (spectral derivatives, `n = 2`).
pub fn div_residual(field: &VectorField) -> Result<f64> {
    let [a, b] = two_components(field)?;
    let plan = Spectral::for_grid(a);
    let d1 = MultiplierOperator::derivative(0).apply_with(&plan, a)?;
    let d2 = MultiplierOperator::derivative(1).apply_with(&plan, b)?;
    Ok(d1.add(&d2)?.sup_norm())
}

fn two_components(field: &VectorField) -> Result<[&GridFunction; 2]> {
    match field.components() {
        [a, b] => Ok([a, b]),
        _ => Err(Error::Domain(
            "curl and divergence are implemented for n = 2".into(),
        )),
    }
}

/// `F = ∇u` and `G = (-∂₂v, ∂₁v)` by spectral differentiation (`n = 2`).
pub fn potential_fields(u: &GridFunction, v: &GridFunction) -> Result<(VectorField, VectorField)> {
    u.ensure_same_geometry(v)?;
    if u.dims() != 2 {
        return Err(Error::Domain(
            "potential fields are built on 2D grids".into(),
        ));
    }
    let plan = Spectral::for_grid(u);
    let d =
        |axis: usize, f: &GridFunction| MultiplierOperator::derivative(axis).apply_with(&plan, f);
    let f_field = VectorField::new(vec![d(0, u)?, d(1, u)?])?;
    let g_field = VectorField::new(vec![d(1, v)?.scale(-1.0), d(0, v)?])?;
    let curl = curl_residual(&f_field)?;
    let div = div_residual(&g_field)?;
    let scale = f_field.sup_norm().max(g_field.sup_norm()).max(1.0);
    if curl > FIELD_TOLERANCE * scale || div > FIELD_TOLERANCE * scale {
        return Err(Error::Numerical(format!(
            "constructed fields have curl {curl:e} and divergence {div:e}"
        )));
    }
    Ok((f_field, g_field))
}

/// Settings of the div-curl pipeline.
#[derive(Clone, Debug, Default)]
pub struct DivCurlParams {
    /// Coarse level of the wavelet expansions; the box level when absent.
    pub coarse: Option<i32>,
    pub maximal: GrandMaximalParams,
}

/// Measurements of the div-curl pipeline for one pair of fields.
#[derive(Clone, Debug, Serialize)]
pub struct DivCurlReport {
    pub curl_residual: f64,
    pub div_residual: f64,
    /// `‖Σ_j R_j G_j‖∞`.
    pub riesz_identity_residual: f64,
    /// `max_j ‖R_j f - F_j‖∞` with `f = -Σ_j R_j F_j`.
    pub potential_recovery_residual: f64,
    /// `‖F·G - Σ_j (S + T + coarse)(F_j, G_j)‖∞`.
    pub split_residual: f64,
    /// `‖Σ_j (S(R_j f, G_j) + S(f, R_j G_j)) - Σ_j S(F_j, G_j)‖∞`.
    pub cancellation_residual: f64,
    /// `|∫ F·G|`.
    pub integral_fg: f64,
    /// `|∫ F·G| / (‖F‖₂ ‖G‖₂)`.
    pub integral_fg_scaled: f64,
    pub hlog: f64,
    pub h1_f: f64,
    pub bmo_plus_g: f64,
    /// `hlog / (h1_f · bmo_plus_g)`.
    pub ratio: f64,
    pub h1_g: f64,
    pub bmo_plus_f: f64,
    /// `hlog / (h1_g · bmo_plus_f)`.
    pub ratio_reversed: f64,
}

impl DivCurlReport {
    /// The fixed eight-key report of the command line.
    pub fn summary(&self) -> serde_json::Value {
        serde_json::json!({
            "curl_residual": self.curl_residual,
            "div_residual": self.div_residual,
            "riesz_identity_residual": self.riesz_identity_residual,
            "integral_FG": self.integral_fg,
            "hlog": self.hlog,
            "h1_F": self.h1_f,
            "bmo_plus_G": self.bmo_plus_g,
            "ratio": self.ratio,
        })
    }
}

fn subtract_mean(f: &GridFunction) -> GridFunction {
    let mean = f.samples().iter().sum::<f64>() / f.len() as f64;
    f.map(|v| v - mean)
}

/// `Σ_j ‖F_j - mean‖_{H¹}` through the square function.
fn field_h1(field: &VectorField, filter: &FilterPair, coarse: i32) -> Result<f64> {
    field.components().iter().try_fold(0.0, |acc, c| {
        let mut coeffs = dwt_forward(&subtract_mean(c), filter, coarse)?;
        coeffs.clear_scaling();
        Ok(acc + h1_square_norm(&coeffs)?)
    })
}

/// `Σ_j ‖F_j‖_{BMO⁺}`.
fn field_bmo_plus(field: &VectorField, filter: &FilterPair, coarse: i32) -> Result<f64> {
    field.components().iter().try_fold(0.0, |acc, c| {
        let coeffs = dwt_forward(c, filter, coarse)?;
        Ok(acc + bmo_plus_norm(c, &coeffs)?)
    })
}

/// Runs the div-curl pipeline on a curl-free `F` and a divergence-free `G`.
pub fn divcurl_product(
    f_field: &VectorField,
    g_field: &VectorField,
    filter: &FilterPair,
    params: &DivCurlParams,
) -> Result<DivCurlReport> {
    if f_field.dims() != g_field.dims() {
        return Err(Error::Domain("fields have different dimensions".into()));
    }
    f_field.components()[0].ensure_same_geometry(&g_field.components()[0])?;
    let first = &f_field.components()[0];
    let dims = first.dims();
    let coarse = params.coarse.unwrap_or(first.domain().coarsest_level());
    let scale = f_field.sup_norm().max(g_field.sup_norm()).max(1.0);

    let (curl, div) = if dims == 2 {
        (curl_residual(f_field)?, div_residual(g_field)?)
    } else {
        (0.0, 0.0)
    };
    if curl > FIELD_TOLERANCE * scale || div > FIELD_TOLERANCE * scale {
        return Err(Error::Numerical(format!(
            "fields fail the preconditions: curl {curl:e}, divergence {div:e}"
        )));
    }

    let plan = Spectral::for_grid(first);
    let riesz: Vec<MultiplierOperator> = (0..dims).map(MultiplierOperator::riesz).collect();
    let mut riesz_sum = GridFunction::zeros(first.domain().clone(), first.level())?;
    let mut potential = riesz_sum.clone();
    let mut rg = Vec::with_capacity(dims);
    for (j, op) in riesz.iter().enumerate() {
        let rg_j = op.apply_with(&plan, &g_field.components()[j])?;
        riesz_sum = riesz_sum.add(&rg_j)?;
        rg.push(rg_j);
        potential = potential.sub(&op.apply_with(&plan, &f_field.components()[j])?)?;
    }
    let mut recovery: f64 = 0.0;
    let mut rf = Vec::with_capacity(dims);
    for (j, op) in riesz.iter().enumerate() {
        let rf_j = op.apply_with(&plan, &potential)?;
        recovery = recovery.max(rf_j.sub(&f_field.components()[j])?.sup_norm());
        rf.push(rf_j);
    }

    let product = f_field.dot(g_field)?;
    let mut assembled = GridFunction::zeros(first.domain().clone(), first.level())?;
    let mut s_direct = assembled.clone();
    let mut s_rearranged = assembled.clone();
    for j in 0..dims {
        let (fj, gj) = (&f_field.components()[j], &g_field.components()[j]);
        let split = paraproduct_split(fj, gj, filter, coarse, false)?;
        assembled = assembled.add(&split.total())?;
        s_direct = s_direct.add(&split.pi3)?;
        let a = paraproduct_split(&rf[j], gj, filter, coarse, false)?;
        let b = paraproduct_split(&potential, &rg[j], filter, coarse, false)?;
        s_rearranged = s_rearranged.add(&a.pi3)?.add(&b.pi3)?;
    }
    let split_residual = assembled.sub(&product)?.sup_norm();
    let cancellation_residual = s_rearranged.sub(&s_direct)?.sup_norm();

    let integral_fg = f_field
        .components()
        .iter()
        .zip(g_field.components())
        .map(|(a, b)| inner_product(a, b))
        .sum::<Result<f64>>()?
        .abs();
    let norms = f_field.l2_norm() * g_field.l2_norm();
    let integral_fg_scaled = if norms > 0.0 {
        integral_fg / norms
    } else {
        0.0
    };

    let hlog = hlog_norm(&product, &params.maximal)?;
    let h1_f = field_h1(f_field, filter, coarse)?;
    let bmo_plus_g = field_bmo_plus(g_field, filter, coarse)?;
    let h1_g = field_h1(g_field, filter, coarse)?;
    let bmo_plus_f = field_bmo_plus(f_field, filter, coarse)?;
    let ratio_of = |den: f64| if den > 0.0 { hlog / den } else { 0.0 };
    Ok(DivCurlReport {
        curl_residual: curl,
        div_residual: div,
        riesz_identity_residual: riesz_sum.sup_norm(),
        potential_recovery_residual: recovery,
        split_residual,
        cancellation_residual,
        integral_fg,
        integral_fg_scaled,
        hlog,
        h1_f,
        bmo_plus_g,
        ratio: ratio_of(h1_f * bmo_plus_g),
        h1_g,
        bmo_plus_f,
        ratio_reversed: ratio_of(h1_g * bmo_plus_f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridBox;
    use crate::wavelet::load_filter;

    fn wave(level: i32, f: impl Fn(&[f64]) -> f64) -> GridFunction {
        GridFunction::from_fn(GridBox::unit(2), level, f).unwrap()
    }

    #[test]
    fn hilbert_of_cosine_is_sine() {
        let c = GridFunction::from_fn(GridBox::unit(1), 10, |x| (2.0 * PI * x[0]).cos()).unwrap();
        let s = GridFunction::from_fn(GridBox::unit(1), 10, |x| (2.0 * PI * x[0]).sin()).unwrap();
        assert!(hilbert_transform(&c).unwrap().sub(&s).unwrap().sup_norm() < 1e-10);
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity_on_mean_zero_part() {
        let f = wave(5, |x| {
            (2.0 * PI * x[0]).sin() * (4.0 * PI * x[1]).cos() + 0.3 * (6.0 * PI * x[1]).sin() + 2.0
        });
        let mut acc = GridFunction::zeros(f.domain().clone(), 5).unwrap();
        for axis in 0..2 {
            let r = riesz_transform(&f, axis).unwrap();
            acc = acc.add(&riesz_transform(&r, axis).unwrap()).unwrap();
        }
        let expected = subtract_mean(&f).scale(-1.0);
        assert!(acc.sub(&expected).unwrap().sup_norm() < 1e-10);
        let constant = GridFunction::constant(GridBox::unit(2), 4, 3.0).unwrap();
        assert!(riesz_transform(&constant, 1).unwrap().sup_norm() < 1e-14);
    }

    #[test]
    fn derivative_symbol_is_odd() {
        let plan = Spectral::new(16, 2, 1.0);
        assert_eq!(MultiplierOperator::derivative(1).oddness_defect(&plan), 0.0);
        assert_eq!(MultiplierOperator::riesz(0).oddness_defect(&plan), 0.0);
        let even = MultiplierOperator::new("abs", false, |xi| Complex64::new(xi[0].abs(), 0.0));
        assert!(even.oddness_defect(&plan) > 1.0);
    }

    #[test]
    fn cosine_potentials() {
        let u = wave(6, |x| (2.0 * PI * x[0]).cos());
        let v = wave(6, |x| (2.0 * PI * x[1]).cos());
        let (f, g) = potential_fields(&u, &v).unwrap();
        let f1 = wave(6, |x| -2.0 * PI * (2.0 * PI * x[0]).sin());
        let g1 = wave(6, |x| 2.0 * PI * (2.0 * PI * x[1]).sin());
        assert!(f.components()[0].sub(&f1).unwrap().sup_norm() < 1e-10);
        assert!(f.components()[1].sup_norm() < 1e-10);
        assert!(g.components()[0].sub(&g1).unwrap().sup_norm() < 1e-10);
        assert!(g.components()[1].sup_norm() < 1e-10);
        let product = wave(6, |x| {
            -4.0 * PI * PI * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin()
        });
        let fg = f.dot(&g).unwrap();
        assert!(fg.sub(&product).unwrap().sup_norm() < 1e-9);
        assert!(crate::grid::integrate(&fg).abs() < 1e-10);
    }

    #[test]
    fn pipeline_identities() {
        let u = wave(5, |x| {
            (2.0 * PI * (x[0] + x[1])).sin() + 0.5 * (4.0 * PI * x[0]).cos()
        });
        let v = wave(5, |x| {
            (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin() + 0.2 * (6.0 * PI * x[1]).cos()
        });
        let (f, g) = potential_fields(&u, &v).unwrap();
        let db3 = load_filter("db3").unwrap();
        let r = divcurl_product(&f, &g, &db3, &DivCurlParams::default()).unwrap();
        assert!(r.riesz_identity_residual <= 1e-8);
        assert!(r.potential_recovery_residual <= 1e-8);
        assert!(r.split_residual <= 1e-10 * f.sup_norm() * g.sup_norm());
        assert!(r.cancellation_residual <= 1e-8);
        assert!(r.integral_fg_scaled <= 1e-8);
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        let keys: Vec<String> = r.summary().as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 8);
    }

    #[test]
    fn vector_field_validation() {
        let a = wave(3, |_| 1.0);
        assert!(VectorField::new(vec![a.clone()]).is_err());
        let other = GridFunction::zeros(GridBox::unit(2), 4).unwrap();
        assert!(VectorField::new(vec![a, other]).is_err());
    }
}
