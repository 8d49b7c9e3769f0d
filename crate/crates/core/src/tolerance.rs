//! Named tolerances of the self-check, overridable from configuration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wavelet::FILTER_TOLERANCE;

/// Tolerances of every self-check measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `‖dwt_inverse(dwt_forward f) - f‖∞ / ‖f‖∞`.
    pub reconstruction: f64,
    /// Double-shift orthogonality and energy of the filter taps.
    pub orthogonality: f64,
    /// Entries of `G - I` for the Gram matrix of synthesized wavelets.
    pub gram: f64,
    /// `|∫ x ψ|` for filters with at least two vanishing moments.
    pub moment: f64,
    /// `‖fg - (Π1+Π2+Π3+coarse)‖∞ / (‖f‖∞ ‖g‖∞)`.
    pub split: f64,
    /// Additive slack of the `Π3` chain.
    pub pi3_slack: f64,
    /// `|∫ T(f,g)| / (‖f‖₂ ‖g‖₂)` and the cross-term means of `Π3 - S₀`.
    pub cancellation: f64,
    /// Relative disagreement with the scalar Luxemburg oracle.
    pub luxemburg_oracle: f64,
    /// Relative defect of `‖2f‖ = 2‖f‖`.
    pub homogeneity: f64,
    /// Largest ratio between measured constants at neighbouring resolutions
    /// or corpus sizes (strict).
    pub refinement_factor: f64,
    /// Coefficient error of an atomic reconstruction relative to the
    /// largest coefficient.
    pub atom_reconstruction: f64,
    /// `‖h⁽¹⁾ + g_R a - Π2(a,g)‖∞ / (‖a‖∞ ‖g‖∞)`.
    pub pi2_recombination: f64,
    /// `|∫ γ|` of the coarse-mean corrections.
    pub gamma_integral: f64,
    /// `‖Σ_j R_j G_j‖∞` and the potential recovery residual.
    pub riesz_identity: f64,
    /// `|∫ F·G| / (‖F‖₂ ‖G‖₂)`.
    pub divcurl_integral: f64,
    /// Discrete curl and divergence of the potential fields.
    pub field: f64,
    /// `‖H cos - sin‖∞`.
    pub hilbert: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            reconstruction: 1e-10,
            orthogonality: FILTER_TOLERANCE,
            gram: 1e-8,
            moment: 1e-8,
            split: 1e-10,
            pi3_slack: 1e-10,
            cancellation: 1e-8,
            luxemburg_oracle: 1e-6,
            homogeneity: 1e-8,
            refinement_factor: 2.0,
            atom_reconstruction: 1e-12,
            pi2_recombination: 1e-10,
            gamma_integral: 1e-10,
            riesz_identity: 1e-8,
            divcurl_integral: 1e-8,
            field: 1e-10,
            hilbert: 1e-10,
        }
    }
}

impl Tolerances {
    /// All tolerances by name.
    pub fn entries(&self) -> Vec<(String, f64)> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => map
                .into_iter()
                .filter_map(|(k, v)| v.as_f64().map(|v| (k, v)))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Replaces the tolerance called `name`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let mut map = match serde_json::to_value(&*self)? {
            serde_json::Value::Object(map) => map,
            _ => unreachable!("tolerances serialize to an object"),
        };
        if !map.contains_key(name) {
            return Err(Error::Config(format!("unknown tolerance `{name}`")));
        }
        map.insert(name.to_string(), serde_json::json!(value));
        *self = serde_json::from_value(serde_json::Value::Object(map))?;
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.entries() {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Config(format!(
                    "tolerance `{name}` must be finite and >= 0, got {value}"
                )));
            }
        }
        if self.refinement_factor < 1.0 {
            return Err(Error::Config("refinement_factor must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_by_name() {
        let mut t = Tolerances::default();
        t.set("reconstruction", 1e-16).unwrap();
        assert_eq!(t.reconstruction, 1e-16);
        assert!(t.set("nonsense", 1.0).is_err());
        assert!(t.set("gram", -1.0).is_err());
        assert_eq!(t.entries().len(), 17);
    }

    #[test]
    fn partial_json_keeps_defaults() {
        let t: Tolerances = serde_json::from_str(r#"{"split": 1e-9}"#).unwrap();
        assert_eq!(t.split, 1e-9);
        assert_eq!(t.gram, 1e-8);
        assert!(serde_json::from_str::<Tolerances>(r#"{"splt": 1}"#).is_err());
    }
}
