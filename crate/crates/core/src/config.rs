//! Numeric tolerances shared by the float-mode algebra and the numeric modules.

use serde::{Deserialize, Serialize};

/// Float-mode coefficient equality threshold.
pub const EPS_EQ: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Float-mode zero test for coefficients.
    pub eps_eq: f64,
    /// Numeric relation residual bound for homomorphism validation.
    pub eps_rel: f64,
    /// Relation and unitarity residuals for rational representations.
    pub eps_rep: f64,
    /// Minimum |det| for a loop sample.
    pub delta_inv: f64,
    /// Distance from an integer allowed before rounding a winding number.
    pub closure: f64,
    /// Invariance residual for loops under a conjugated rotation.
    pub invariance: f64,
    /// Determinant antisymmetry residual for the parity demo.
    pub det_parity: f64,
    /// Random sample points per relation in numeric validation.
    pub numeric_samples: usize,
    /// Maximum number of resolution doublings when a loop jumps too far.
    pub max_refinements: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eps_eq: EPS_EQ,
            eps_rel: 1e-9,
            eps_rep: 1e-12,
            delta_inv: 1e-8,
            closure: 1e-6,
            invariance: 1e-9,
            det_parity: 1e-9,
            numeric_samples: 200,
            max_refinements: 12,
        }
    }
}

impl Tolerances {
    /// Applies a `name=value` override.
    pub fn set(&mut self, name: &str, value: &str) -> Result<(), String> {
        let float = || value.parse::<f64>().map_err(|e| format!("{name}: {e}"));
        let int = || value.parse::<usize>().map_err(|e| format!("{name}: {e}"));
        match name {
            "eps_eq" => self.eps_eq = float()?,
            "eps_rel" => self.eps_rel = float()?,
            "eps_rep" => self.eps_rep = float()?,
            "delta_inv" => self.delta_inv = float()?,
            "closure" => self.closure = float()?,
            "invariance" => self.invariance = float()?,
            "det_parity" => self.det_parity = float()?,
            "numeric_samples" => self.numeric_samples = int()?,
            "max_refinements" => self.max_refinements = int()?,
            _ => return Err(format!("unknown tolerance `{name}`")),
        }
        Ok(())
    }
}
