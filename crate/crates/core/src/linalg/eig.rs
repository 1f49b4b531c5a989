//! Hermitian eigensolver: cyclic Jacobi with complex Givens rotations.
//! Deterministic pivot order, adequate for the toolkit's dim <= 64 regime.

use num_complex::Complex64 as C64;

use crate::{CoreError, Result};

use super::ComplexMatrix;

/// Eigenvalues sorted descending with matching orthonormal eigenvectors
/// (column `k` of `vectors` pairs with `values[k]`).
#[derive(Debug, Clone)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigDecomposition {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|r| self.vectors[(r, k)]).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.values.last().expect("nonempty spectrum")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.values[0]
    }
}

const HERMITICITY_PRE: f64 = 1e-10;
const OFFDIAG_TARGET: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigs(a: &ComplexMatrix) -> Result<EigDecomposition> {
    let n = a.rows();
    if a.cols() != n {
        return Err(CoreError::Symmetry("matrix not square".into()));
    }
    // Internal helpers (singular values via the Hermitian embedding) run at
    // twice the public state cap, so the hard limit applies here.
    if n > crate::config::MAX_EIG_DIM {
        return Err(CoreError::DimensionCap {
            requested: n,
            cap: crate::config::MAX_EIG_DIM,
        });
    }
    let residue = a.hermiticity_residue();
    let scale = a.max_abs().max(1.0);
    if residue > HERMITICITY_PRE * scale {
        return Err(CoreError::Symmetry(format!(
            "residue {residue:.3e} exceeds {:.1e}",
            HERMITICITY_PRE * scale
        )));
    }

    let mut m = a.hermitize();
    let mut v = ComplexMatrix::identity(n);
    let norm = m.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= OFFDIAG_TARGET * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = m[(p, q)];
                let mag = g.norm();
                if mag <= OFFDIAG_TARGET * norm / (n as f64) {
                    continue;
                }
                let alpha = m[(p, p)].re;
                let beta = m[(q, q)].re;
                let u = g / mag; // phase of the pivot entry
                let tau = (beta - alpha) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let us = u * s;
                let ubar_s = u.conj() * s;

                // Row update: rows p and q of M.
                for j in 0..n {
                    let mpj = m[(p, j)];
                    let mqj = m[(q, j)];
                    m[(p, j)] = mpj * c - mqj * us;
                    m[(q, j)] = mpj * s + mqj * (u * c);
                }
                // Column update: columns p and q of M.
                for i in 0..n {
                    let mip = m[(i, p)];
                    let miq = m[(i, q)];
                    m[(i, p)] = mip * c - miq * ubar_s;
                    m[(i, q)] = mip * s + miq * (u.conj() * c);
                }
                // Accumulate the rotation into the eigenvector matrix.
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * c - viq * ubar_s;
                    v[(i, q)] = vip * s + viq * (u.conj() * c);
                }
                // Pin the pivot pair to exact symmetry.
                m[(p, q)] = C64::new(0.0, 0.0);
                m[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).expect("finite eigenvalues"));

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (newc, &oldc) in order.iter().enumerate() {
        for r in 0..n {
            vectors[(r, newc)] = v[(r, oldc)];
        }
    }
    Ok(EigDecomposition { values, vectors })
}
