//! Closed-form reference for one EWI step applied to a single Fourier mode.
//!
//! For `psi = a e^{i mu . x}` with a constant potential `c`, `|psi|` is
//! constant, so the step acts on the amplitude alone:
//!
//! ```text
//! a' = e^{-i tau |mu|^2} chi a - i tau phi_1(-i tau |mu|^2) chi (c + beta |chi a|^{2 sigma}) chi a
//! ```
//!
//! where `chi` is the filter symbol at `mu` (applied once to the datum and once
//! to the correction). `phi_1` is evaluated here directly as `(e^z - 1)/z`.

use ewi_core::Complex64;

/// Inputs of the scalar recurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeStep {
    pub amplitude: Complex64,
    /// `|mu|^2`
    pub mu_sq: f64,
    pub potential: f64,
    pub beta: f64,
    pub sigma: f64,
    pub tau: f64,
    /// Filter symbol at `mu`.
    pub chi: f64,
}

fn phi1_direct(z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    (z.exp() - 1.0) / z
}

impl ModeStep {
    /// Amplitude after one step.
    pub fn advance(&self) -> Complex64 {
        let a0 = self.amplitude * self.chi;
        let z = Complex64::new(0.0, -self.tau * self.mu_sq);
        let coeff = self.potential + self.beta * a0.norm_sqr().powf(self.sigma);
        z.exp() * a0 - Complex64::new(0.0, self.tau) * phi1_direct(z) * self.chi * coeff * a0
    }
}
