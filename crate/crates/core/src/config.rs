//! Centralized tolerance and cap constants. One tuning point for the whole
//! toolkit; every module pulls its thresholds from here instead of scattering
//! magic numbers.

use serde::{Deserialize, Serialize};

/// Numerical tolerances with their defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Hermiticity residue allowed on construction, max |A - A^dag|.
    pub hermitian: f64,
    /// Trace-1 residue allowed for density matrices.
    pub trace: f64,
    /// Most-negative eigenvalue allowed for density matrices.
    pub psd: f64,
    /// Unit-norm residue allowed for pure states.
    pub norm: f64,
    /// Eigenpair residual contract: |A v - lambda v| <= eig_residual * |A|.
    pub eig_residual: f64,
    /// Imaginary residue allowed when a quantity must be real.
    pub imag: f64,
    /// Sign tolerance on characteristic coefficients in the PSD recursion.
    pub coeff_sign: f64,
    /// Eigenvalue threshold below which the partial transpose flags entanglement.
    pub ppt_negativity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian: 1e-12,
            trace: 1e-12,
            psd: 1e-10,
            norm: 1e-12,
            eig_residual: 1e-9,
            imag: 1e-10,
            coeff_sign: 1e-9,
            ppt_negativity: 1e-10,
        }
    }
}

/// Dimension caps.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Largest total operator dimension `kron` will produce.
    pub kron_dim: usize,
    /// Largest dimension the dense eigensolver accepts.
    pub eig_dim: usize,
    /// Largest dimension of the C-role register in a layout.
    pub c_register: usize,
    /// Largest extended dimension for symmetric-extension searches.
    pub extension_dim: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            kron_dim: 4096,
            eig_dim: 64,
            c_register: 16,
            extension_dim: 64,
        }
    }
}

/// Hard safety maxima; configured caps may not exceed these.
pub const MAX_KRON_DIM: usize = 16384;
pub const MAX_EIG_DIM: usize = 256;
pub const MAX_C_REGISTER: usize = 64;

/// Iteration cap for the alternating-projection feasibility solver.
pub const DYKSTRA_MAX_PROJECTIONS: usize = 20_000;
/// Iteration cap for the central-cut ellipsoid loop.
pub const ELLIPSOID_MAX_ITERS: usize = 200_000;

impl Caps {
    pub fn validate(&self) -> crate::Result<()> {
        if self.kron_dim > MAX_KRON_DIM || self.eig_dim > MAX_EIG_DIM || self.c_register > MAX_C_REGISTER
        {
            return Err(crate::CoreError::Invariant(
                "configured cap exceeds hard safety maximum".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_within_safety_maxima() {
        Caps::default().validate().unwrap();
    }

    #[test]
    fn tolerance_defaults_positive() {
        let t = Tolerances::default();
        for v in [
            t.hermitian,
            t.trace,
            t.psd,
            t.norm,
            t.eig_residual,
            t.imag,
            t.coeff_sign,
            t.ppt_negativity,
        ] {
            assert!(v > 0.0);
        }
    }
}
