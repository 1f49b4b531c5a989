//! Generalized Bloch-vector codec over the normalized Pauli-word generator
//! basis, plus the convex-geometry facts the membership oracles rely on:
//! subsystem projection, the characteristic-coefficient PSD test, and the
//! separable-ball radius.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::config::Caps;
use crate::linalg::{ComplexMatrix, DensityMatrix, RegisterLayout, Role};
use crate::{CoreError, Result};

/// Verdict of the characteristic-coefficient recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsdVerdict {
    Psd,
    NotPsd,
}

/// Bloch vector: the M^2 - 1 real coefficients of a trace-1 Hermitian matrix
/// in the normalized Pauli-word basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    #[serde(rename = "M")]
    pub m: usize,
    pub coords: Vec<f64>,
}

impl BlochVector {
    pub fn new(m: usize, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != m * m - 1 {
            return Err(CoreError::Invariant(format!(
                "Bloch vector for M={m} needs {} coords, got {}",
                m * m - 1,
                coords.len()
            )));
        }
        Ok(BlochVector { m, coords })
    }

    pub fn zero(m: usize) -> Self {
        BlochVector {
            m,
            coords: vec![0.0; m * m - 1],
        }
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: f64) -> Self {
        BlochVector {
            m: self.m,
            coords: self.coords.iter().map(|x| x * s).collect(),
        }
    }
}

/// One Pauli word: base-4 digits over the qubits, most significant first
/// (0 = I, 1 = X, 2 = Y, 3 = Z).
#[derive(Debug, Clone, Copy)]
struct PauliWord {
    code: usize,
    qubits: usize,
}

impl PauliWord {
    fn letter(&self, qubit: usize) -> usize {
        (self.code >> (2 * (self.qubits - 1 - qubit))) & 0b11
    }

    /// Bit mask (qubit 0 = most significant) of letters that flip the basis
    /// index (X and Y).
    fn flip_mask(&self) -> usize {
        let mut mask = 0usize;
        for q in 0..self.qubits {
            let l = self.letter(q);
            if l == 1 || l == 2 {
                mask |= 1 << (self.qubits - 1 - q);
            }
        }
        mask
    }

    /// Entry value P[j, j ^ flip_mask] of the unnormalized word.
    fn entry_phase(&self, j: usize) -> C64 {
        let mut acc = C64::new(1.0, 0.0);
        for q in 0..self.qubits {
            let bit = (j >> (self.qubits - 1 - q)) & 1;
            acc *= match self.letter(q) {
                0 | 1 => C64::new(1.0, 0.0),
                // Y[0,1] = -i, Y[1,0] = i
                2 => {
                    if bit == 0 {
                        C64::new(0.0, -1.0)
                    } else {
                        C64::new(0.0, 1.0)
                    }
                }
                _ => {
                    if bit == 0 {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(-1.0, 0.0)
                    }
                }
            };
        }
        acc
    }
}

/// Generator basis for dimension M = 2^p: the non-identity Pauli words in
/// lexicographic order with per-qubit letters I < X < Y < Z, each scaled by
/// 2^((1 - log M)/2) so that Tr[sigma_i sigma_j] = 2 delta_ij.
#[derive(Debug, Clone)]
pub struct GeneratorBasis {
    m: usize,
    qubits: usize,
    scale: f64,
}

impl GeneratorBasis {
    pub fn new(m: usize) -> Result<Self> {
        Self::with_caps(m, &Caps::default())
    }

    pub fn with_caps(m: usize, caps: &Caps) -> Result<Self> {
        if !m.is_power_of_two() || m < 2 {
            return Err(CoreError::Precondition(format!(
                "Bloch codec needs a power-of-2 dimension, got {m}"
            )));
        }
        if m > caps.eig_dim {
            return Err(CoreError::DimensionCap {
                requested: m,
                cap: caps.eig_dim,
            });
        }
        let qubits = m.trailing_zeros() as usize;
        let scale = 2f64.powf((1.0 - qubits as f64) / 2.0);
        Ok(GeneratorBasis { m, qubits, scale })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m * self.m - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn word(&self, index: usize) -> PauliWord {
        PauliWord {
            code: index + 1,
            qubits: self.qubits,
        }
    }

    /// Dense matrix of generator `index`.
    pub fn matrix(&self, index: usize) -> ComplexMatrix {
        let w = self.word(index);
        let mask = w.flip_mask();
        let mut out = ComplexMatrix::zeros(self.m, self.m);
        for j in 0..self.m {
            out[(j, j ^ mask)] = w.entry_phase(j) * self.scale;
        }
        out
    }

    /// Tr[a * sigma_index] using the one-entry-per-row structure of words.
    pub fn trace_with(&self, a: &ComplexMatrix, index: usize) -> C64 {
        let w = self.word(index);
        let mask = w.flip_mask();
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..self.m {
            acc += a[(k ^ mask, k)] * w.entry_phase(k);
        }
        acc * self.scale
    }
}

/// Encode a state as its generalized Bloch vector: coords[i] = Tr[rho sigma_i].
pub fn encode(rho: &DensityMatrix) -> Result<BlochVector> {
    let basis = GeneratorBasis::new(rho.dim())?;
    encode_matrix(rho.op(), &basis)
}

/// Encode any trace-1 Hermitian matrix.
pub fn encode_matrix(op: &ComplexMatrix, basis: &GeneratorBasis) -> Result<BlochVector> {
    if op.rows() != basis.dim() {
        return Err(CoreError::DimensionMismatch {
            left: op.rows(),
            right: basis.dim(),
        });
    }
    let mut coords = vec![0.0; basis.len()];
    for (i, c) in coords.iter_mut().enumerate() {
        let t = basis.trace_with(op, i);
        *c = t.re;
    }
    BlochVector::new(basis.dim(), coords)
}

/// Decode to the trace-1 Hermitian matrix I/M + (1/2) sum_i r_i sigma_i.
/// Positive semidefiniteness is deliberately not guaranteed.
pub fn decode(r: &BlochVector) -> Result<ComplexMatrix> {
    let basis = GeneratorBasis::new(r.m)?;
    if r.coords.len() != basis.len() {
        return Err(CoreError::Invariant(format!(
            "coordinate length {} != {}",
            r.coords.len(),
            basis.len()
        )));
    }
    let m = basis.dim();
    let mut out = ComplexMatrix::zeros(m, m);
    for j in 0..m {
        out[(j, j)] = C64::new(1.0 / m as f64, 0.0);
    }
    for (i, &ri) in r.coords.iter().enumerate() {
        if ri == 0.0 {
            continue;
        }
        let w = basis.word(i);
        let mask = w.flip_mask();
        let half = 0.5 * ri * basis.scale;
        for j in 0..m {
            out[(j, j ^ mask)] += w.entry_phase(j) * half;
        }
    }
    Ok(out)
}

/// Coordinates of the Bloch vector whose Pauli word is identity on the
/// A register, scaled by sqrt(dim A). Equals encode(Tr_A rho) exactly when
/// `r` encodes a state.
pub fn subsystem_project(r: &BlochVector, layout: &RegisterLayout) -> Result<BlochVector> {
    if layout.total_dim() != r.m {
        return Err(CoreError::Layout(format!(
            "layout dimension {} != Bloch dimension {}",
            layout.total_dim(),
            r.m
        )));
    }
    let a_index = layout
        .index_of(Role::A)
        .ok_or_else(|| CoreError::Layout("layout has no A register".into()))?;
    let dim_a = layout.dims()[a_index];
    if !layout.dims().iter().all(|d| d.is_power_of_two()) {
        return Err(CoreError::Layout(
            "subsystem projection needs power-of-2 registers".into(),
        ));
    }
    let qubits = r.m.trailing_zeros() as usize;
    // Qubit span of each register, in layout order.
    let mut spans = Vec::new();
    let mut start = 0usize;
    for &d in layout.dims() {
        let q = d.trailing_zeros() as usize;
        spans.push(start..start + q);
        start += q;
    }
    let a_span = spans[a_index].clone();
    let m_sub = r.m / dim_a;
    let mut out = vec![0.0; m_sub * m_sub - 1];
    let scale = (dim_a as f64).sqrt();
    for (i, &ri) in r.coords.iter().enumerate() {
        let word = PauliWord {
            code: i + 1,
            qubits,
        };
        if a_span.clone().any(|q| word.letter(q) != 0) {
            continue;
        }
        // Re-index the word over the remaining qubits, preserving order.
        let mut sub_code = 0usize;
        for q in 0..qubits {
            if a_span.contains(&q) {
                continue;
            }
            sub_code = (sub_code << 2) | word.letter(q);
        }
        debug_assert!(sub_code >= 1);
        out[sub_code - 1] = ri * scale;
    }
    BlochVector::new(m_sub, out)
}

/// Characteristic-coefficient PSD test: a_0 = 1 and
/// k a_k = sum_{q=1..k} (-1)^(q-1) Tr[P^q] a_{k-q}; P is PSD iff all
/// a_k >= 0 (within `tol` on the sign).
pub fn psd_check_recursion(r: &BlochVector, tol: f64) -> Result<PsdVerdict> {
    let p = decode(r)?;
    Ok(psd_check_matrix(&p, tol))
}

/// The same recursion on an explicit Hermitian matrix.
pub fn psd_check_matrix(p: &ComplexMatrix, tol: f64) -> PsdVerdict {
    let m = p.rows();
    let mut power = p.clone();
    let mut traces = Vec::with_capacity(m);
    traces.push(power.trace().re);
    for _ in 1..m {
        power = power.matmul(p);
        traces.push(power.trace().re);
    }
    let mut coeffs = vec![1.0f64];
    for k in 1..=m {
        let mut acc = 0.0;
        for q in 1..=k {
            let sign = if q % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * traces[q - 1] * coeffs[k - q];
        }
        let a_k = acc / k as f64;
        if a_k < -tol {
            return PsdVerdict::NotPsd;
        }
        coeffs.push(a_k);
    }
    PsdVerdict::Psd
}

/// Radius of the ball of Bloch vectors that are separable across every
/// bipartition: ||r||^2 <= 1/M^2, i.e. radius 1/M. Returned as the squared
/// norm bound's root 1/M^2 ... see below.
///
/// The returned value is the squared-norm threshold 1/M^2; vectors with
/// ||r||^2 at or below it are separable across every bipartition, and the
/// same value is the inner radius used to 0-center the membership bodies.
pub fn gurvits_ball_radius(layout: &RegisterLayout) -> f64 {
    let m = layout.total_dim() as f64;
    1.0 / (m * m)
}
