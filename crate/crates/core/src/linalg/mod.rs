//! Dense complex linear algebra over small registers: matrices, register
//! layouts, density matrices and pure states, tensor products, partial
//! trace/transpose, trace distance and fidelity.

mod eig;
mod sample;

pub use eig::{hermitian_eigs, EigDecomposition};
pub use sample::{sample_state, SampledState, StateKind};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{Caps, Tolerances};
use crate::{CoreError, Result};

pub type C64 = Complex64;

/// Role labels for registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    A,
    B,
    C,
    #[serde(rename = "scratch")]
    Scratch,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Role::A => write!(f, "A"),
            Role::B => write!(f, "B"),
            Role::C => write!(f, "C"),
            Role::Scratch => write!(f, "scratch"),
        }
    }
}

impl std::str::FromStr for Role {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Role::A),
            "B" => Ok(Role::B),
            "C" => Ok(Role::C),
            "scratch" => Ok(Role::Scratch),
            other => Err(CoreError::Layout(format!("unknown role {other:?}"))),
        }
    }
}

/// Ordered split of a Hilbert space into labeled registers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterLayout {
    dims: Vec<usize>,
    roles: Vec<Role>,
}

impl RegisterLayout {
    pub fn new(dims: Vec<usize>, roles: Vec<Role>) -> Result<Self> {
        Self::with_caps(dims, roles, &Caps::default())
    }

    pub fn with_caps(dims: Vec<usize>, roles: Vec<Role>, caps: &Caps) -> Result<Self> {
        if dims.len() != roles.len() {
            return Err(CoreError::Layout(format!(
                "{} dims but {} roles",
                dims.len(),
                roles.len()
            )));
        }
        if dims.is_empty() {
            return Err(CoreError::Layout("empty layout".into()));
        }
        if dims.iter().any(|&d| d < 1) {
            return Err(CoreError::Layout("register dimensions must be >= 1".into()));
        }
        for role in [Role::A, Role::B, Role::C] {
            if roles.iter().filter(|&&r| r == role).count() > 1 {
                return Err(CoreError::Layout(format!("duplicate {role} register")));
            }
        }
        if let Some(i) = roles.iter().position(|&r| r == Role::C) {
            if dims[i] > caps.c_register {
                return Err(CoreError::Layout(format!(
                    "C register dimension {} exceeds cap {}",
                    dims[i], caps.c_register
                )));
            }
        }
        Ok(RegisterLayout { dims, roles })
    }

    /// Single unlabeled register of dimension `d` (role scratch).
    pub fn single(d: usize) -> Self {
        RegisterLayout {
            dims: vec![d],
            roles: vec![Role::Scratch],
        }
    }

    /// Bipartite B|C layout.
    pub fn bipartite_bc(db: usize, dc: usize) -> Result<Self> {
        Self::new(vec![db, dc], vec![Role::B, Role::C])
    }

    /// Tripartite A|B|C layout.
    pub fn tripartite(da: usize, db: usize, dc: usize) -> Result<Self> {
        Self::new(vec![da, db, dc], vec![Role::A, Role::B, Role::C])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn registers(&self) -> usize {
        self.dims.len()
    }

    pub fn index_of(&self, role: Role) -> Option<usize> {
        self.roles.iter().position(|&r| r == role)
    }

    pub fn dim_of(&self, role: Role) -> Option<usize> {
        self.index_of(role).map(|i| self.dims[i])
    }

    /// Layout left after tracing out the given registers.
    pub fn drop_registers(&self, dropped: &[usize]) -> Result<Self> {
        let mut dims = Vec::new();
        let mut roles = Vec::new();
        for i in 0..self.dims.len() {
            if !dropped.contains(&i) {
                dims.push(self.dims[i]);
                roles.push(self.roles[i]);
            }
        }
        if dims.is_empty() {
            return Err(CoreError::Layout("cannot trace out every register".into()));
        }
        Ok(RegisterLayout { dims, roles })
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(CoreError::Invariant(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    /// Convenience constructor from (re, im) pairs in row-major order.
    pub fn from_reim(rows: usize, cols: usize, pairs: &[(f64, f64)]) -> Result<Self> {
        Self::from_entries(
            rows,
            cols,
            pairs.iter().map(|&(re, im)| C64::new(re, im)).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn dagger(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * s).collect(),
        }
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a - b)
                .collect(),
        }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let orow = &other.entries[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.entries[r * other.cols..(r + 1) * other.cols];
                for c in 0..other.cols {
                    dst[c] += a * orow[c];
                }
            }
        }
        out
    }

    /// A * v for a column vector.
    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        for r in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            let row = self.row(r);
            for c in 0..self.cols {
                acc += row[c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    /// max |A - A^dag|.
    pub fn hermiticity_residue(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self[(r, c)] - self[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.hermiticity_residue() <= tol
    }

    /// (A + A^dag)/2.
    pub fn hermitize(&self) -> ComplexMatrix {
        let mut out = self.clone();
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = (self[(r, c)] + self[(c, r)].conj()) * 0.5;
            }
        }
        out
    }

    /// Tr[self * other].
    pub fn trace_product(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.rows, other.cols);
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..self.rows {
            for k in 0..self.cols {
                acc += self[(r, k)] * other[(k, r)];
            }
        }
        acc
    }

    /// Hilbert-Schmidt inner product Tr[self^dag * other].
    pub fn hs_inner(&self, other: &ComplexMatrix) -> C64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Outer product v w^dag.
    pub fn outer(v: &[C64], w: &[C64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(v.len(), w.len());
        for r in 0..v.len() {
            for c in 0..w.len() {
                out[(r, c)] = v[r] * w[c].conj();
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.cols + c]
    }
}

/// Tensor (Kronecker) product.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_caps(a, b, &Caps::default())
}

pub fn kron_with_caps(a: &ComplexMatrix, b: &ComplexMatrix, caps: &Caps) -> Result<ComplexMatrix> {
    let rows = a.rows() * b.rows();
    let cols = a.cols() * b.cols();
    if rows > caps.kron_dim || cols > caps.kron_dim {
        return Err(CoreError::DimensionCap {
            requested: rows.max(cols),
            cap: caps.kron_dim,
        });
    }
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ar in 0..a.rows() {
        for ac in 0..a.cols() {
            let av = a[(ar, ac)];
            if av.norm_sqr() == 0.0 {
                continue;
            }
            for br in 0..b.rows() {
                for bc in 0..b.cols() {
                    out[(ar * b.rows() + br, ac * b.cols() + bc)] = av * b[(br, bc)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}

/// Density matrix with a register layout.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: ComplexMatrix,
    layout: RegisterLayout,
}

impl DensityMatrix {
    pub fn new(op: ComplexMatrix, layout: RegisterLayout) -> Result<Self> {
        Self::with_tolerances(op, layout, &Tolerances::default())
    }

    pub fn with_tolerances(
        op: ComplexMatrix,
        layout: RegisterLayout,
        tol: &Tolerances,
    ) -> Result<Self> {
        if op.rows() != op.cols() {
            return Err(CoreError::Invariant("density matrix must be square".into()));
        }
        if op.rows() > Caps::default().eig_dim {
            return Err(CoreError::DimensionCap {
                requested: op.rows(),
                cap: Caps::default().eig_dim,
            });
        }
        if op.rows() != layout.total_dim() {
            return Err(CoreError::Layout(format!(
                "matrix dimension {} != layout dimension {}",
                op.rows(),
                layout.total_dim()
            )));
        }
        let h = op.hermiticity_residue();
        if h > tol.hermitian {
            return Err(CoreError::Symmetry(format!("residue {h:.3e}")));
        }
        let t = op.trace();
        if (t.re - 1.0).abs() > tol.trace || t.im.abs() > tol.trace {
            return Err(CoreError::Invariant(format!("trace {t} != 1")));
        }
        let eigs = hermitian_eigs(&op.hermitize())?;
        let min_eig = *eigs.values.last().expect("nonempty spectrum");
        if min_eig < -tol.psd {
            return Err(CoreError::Invariant(format!(
                "not positive semidefinite: min eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(DensityMatrix { op, layout })
    }

    /// Rank-1 density matrix of a pure state.
    pub fn from_pure(psi: &PureState) -> Self {
        DensityMatrix {
            op: ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes()),
            layout: psi.layout().clone(),
        }
    }

    pub fn op(&self) -> &ComplexMatrix {
        &self.op
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.op.rows()
    }

    pub fn purity(&self) -> f64 {
        self.op.trace_product(&self.op).re
    }

    /// Maximally mixed state on the layout.
    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.total_dim();
        DensityMatrix {
            op: ComplexMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)),
            layout,
        }
    }
}

/// Pure state with a register layout.
#[derive(Debug, Clone)]
pub struct PureState {
    amplitudes: Vec<C64>,
    layout: RegisterLayout,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>, layout: RegisterLayout) -> Result<Self> {
        Self::with_tolerances(amplitudes, layout, &Tolerances::default())
    }

    pub fn with_tolerances(
        amplitudes: Vec<C64>,
        layout: RegisterLayout,
        tol: &Tolerances,
    ) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(CoreError::Layout(format!(
                "{} amplitudes != layout dimension {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        let n: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (n - 1.0).abs() > tol.norm {
            return Err(CoreError::Invariant(format!("norm {n} != 1")));
        }
        Ok(PureState { amplitudes, layout })
    }

    /// Computational basis state |index> on the layout.
    pub fn basis(index: usize, layout: RegisterLayout) -> Result<Self> {
        let d = layout.total_dim();
        if index >= d {
            return Err(CoreError::Invariant(format!("basis index {index} >= {d}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[index] = C64::new(1.0, 0.0);
        Ok(PureState {
            amplitudes: amps,
            layout,
        })
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Normalize a complex vector in place; returns the original norm.
pub fn normalize(v: &mut [C64]) -> f64 {
    let n: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for a in v.iter_mut() {
            *a /= n;
        }
    }
    n
}

fn multi_index(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0usize; dims.len()];
    for i in (0..dims.len()).rev() {
        idx[i] = flat % dims[i];
        flat /= dims[i];
    }
    idx
}

fn flat_index(idx: &[usize], dims: &[usize]) -> usize {
    let mut flat = 0usize;
    for i in 0..dims.len() {
        flat = flat * dims[i] + idx[i];
    }
    flat
}

/// Trace out the registers with the given roles.
pub fn partial_trace(rho: &DensityMatrix, traced_roles: &[Role]) -> Result<DensityMatrix> {
    let layout = rho.layout();
    let mut traced = Vec::new();
    for &role in traced_roles {
        match layout.index_of(role) {
            Some(i) => traced.push(i),
            None => {
                return Err(CoreError::Layout(format!(
                    "role {role} not present in layout"
                )))
            }
        }
    }
    let op = partial_trace_registers(rho.op(), layout.dims(), &traced)?;
    let new_layout = layout.drop_registers(&traced)?;
    DensityMatrix::new(op.hermitize(), new_layout)
}

/// Partial trace by register positions, on a raw matrix.
pub fn partial_trace_registers(
    op: &ComplexMatrix,
    dims: &[usize],
    traced: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if op.rows() != total || op.cols() != total {
        return Err(CoreError::DimensionMismatch {
            left: op.rows(),
            right: total,
        });
    }
    let kept: Vec<usize> = (0..dims.len()).filter(|i| !traced.contains(i)).collect();
    if kept.is_empty() {
        return Err(CoreError::Layout("cannot trace out every register".into()));
    }
    let kept_dims: Vec<usize> = kept.iter().map(|&i| dims[i]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&i| dims[i]).collect();
    let kept_total: usize = kept_dims.iter().product();
    let traced_total: usize = traced_dims.iter().product();

    let mut out = ComplexMatrix::zeros(kept_total, kept_total);
    let mut full_row = vec![0usize; dims.len()];
    let mut full_col = vec![0usize; dims.len()];
    for kr in 0..kept_total {
        let kri = multi_index(kr, &kept_dims);
        for kc in 0..kept_total {
            let kci = multi_index(kc, &kept_dims);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..traced_total {
                let ti = multi_index(t, &traced_dims);
                for (pos, &reg) in kept.iter().enumerate() {
                    full_row[reg] = kri[pos];
                    full_col[reg] = kci[pos];
                }
                for (pos, &reg) in traced.iter().enumerate() {
                    full_row[reg] = ti[pos];
                    full_col[reg] = ti[pos];
                }
                acc += op[(flat_index(&full_row, dims), flat_index(&full_col, dims))];
            }
            out[(kr, kc)] = acc;
        }
    }
    Ok(out)
}

/// Partial transpose over the register positions in `transposed`.
pub fn partial_transpose_registers(
    op: &ComplexMatrix,
    dims: &[usize],
    transposed: &[usize],
) -> Result<ComplexMatrix> {
    let total: usize = dims.iter().product();
    if op.rows() != total || op.cols() != total {
        return Err(CoreError::DimensionMismatch {
            left: op.rows(),
            right: total,
        });
    }
    let mut out = ComplexMatrix::zeros(total, total);
    for r in 0..total {
        let ri = multi_index(r, dims);
        for c in 0..total {
            let ci = multi_index(c, dims);
            let mut sr = ri.clone();
            let mut sc = ci.clone();
            for &reg in transposed {
                sr[reg] = ci[reg];
                sc[reg] = ri[reg];
            }
            out[(flat_index(&sr, dims), flat_index(&sc, dims))] = op[(r, c)];
        }
    }
    Ok(out)
}

/// Trace distance |rho - tau|_1 (sum of absolute eigenvalues of the difference).
pub fn trace_distance(rho: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    if rho.dim() != tau.dim() {
        return Err(CoreError::DimensionMismatch {
            left: rho.dim(),
            right: tau.dim(),
        });
    }
    let diff = rho.op().sub(tau.op()).hermitize();
    let eigs = hermitian_eigs(&diff)?;
    Ok(eigs.values.iter().map(|l| l.abs()).sum())
}

/// Squared fidelity (Tr sqrt(sqrt(rho) tau sqrt(rho)))^2, computed as the
/// squared trace norm of sqrt(rho) sqrt(tau).
pub fn fidelity(rho: &DensityMatrix, tau: &DensityMatrix) -> Result<f64> {
    if rho.dim() != tau.dim() {
        return Err(CoreError::DimensionMismatch {
            left: rho.dim(),
            right: tau.dim(),
        });
    }
    let m = matrix_sqrt_psd(rho.op())?.matmul(&matrix_sqrt_psd(tau.op())?);
    let t = trace_norm(&m)?;
    Ok((t * t).min(1.0))
}

/// Trace norm (sum of singular values) via the Hermitian embedding
/// [[0, M], [M^dag, 0]], whose spectrum is +-sigma_i. Keeps absolute accuracy
/// at machine scale even for singular values near zero.
pub fn trace_norm(m: &ComplexMatrix) -> Result<f64> {
    let (r, c) = (m.rows(), m.cols());
    let n = r + c;
    let mut h = ComplexMatrix::zeros(n, n);
    for i in 0..r {
        for j in 0..c {
            h[(i, r + j)] = m[(i, j)];
            h[(r + j, i)] = m[(i, j)].conj();
        }
    }
    let eigs = hermitian_eigs(&h)?;
    Ok(eigs.values.iter().map(|l| l.abs()).sum::<f64>() / 2.0)
}

/// PSD square root via the eigendecomposition. Eigenvalues within solver
/// noise of zero are clamped to zero so sqrt does not amplify them to
/// sqrt(eps)-sized ghosts on singular inputs.
pub fn matrix_sqrt_psd(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eigs = hermitian_eigs(&a.hermitize())?;
    let n = a.rows();
    let cutoff = eigs.values[0].max(0.0) * 64.0 * f64::EPSILON;
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lambda) in eigs.values.iter().enumerate() {
        let s = if lambda > cutoff { lambda.sqrt() } else { 0.0 };
        if s == 0.0 {
            continue;
        }
        let v = eigs.vector(k);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += v[r] * v[c].conj() * s;
            }
        }
    }
    Ok(out)
}

/// Clip a Hermitian matrix to the nearest density matrix: eigenvalues
/// clamped at zero, then renormalized to unit trace.
pub fn clip_to_state(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eigs = hermitian_eigs(&a.hermitize())?;
    let n = a.rows();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut total = 0.0;
    for (k, &lambda) in eigs.values.iter().enumerate() {
        let l = lambda.max(0.0);
        if l == 0.0 {
            continue;
        }
        total += l;
        let v = eigs.vector(k);
        for r in 0..n {
            for c in 0..n {
                out[(r, c)] += v[r] * v[c].conj() * l;
            }
        }
    }
    if total <= 0.0 {
        // Entirely negative input: fall back to the maximally mixed state.
        return Ok(ComplexMatrix::identity(n).scale(C64::new(1.0 / n as f64, 0.0)));
    }
    Ok(out.scale(C64::new(1.0 / total, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sample::{sample_state, SampledState, StateKind};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_reim(2, 2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)]).unwrap()
    }

    fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::from_reim(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]).unwrap()
    }

    fn bell_phi_plus() -> DensityMatrix {
        let amps = vec![
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        ];
        let psi = PureState::new(amps, RegisterLayout::bipartite_bc(2, 2).unwrap()).unwrap();
        DensityMatrix::from_pure(&psi)
    }

    #[test]
    fn kron_identity_case() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = kron(&i2, &i2).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_basis_projectors() {
        let p0 = ComplexMatrix::from_reim(2, 2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)])
            .unwrap();
        let p1 = ComplexMatrix::from_reim(2, 2, &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0), (1.0, 0.0)])
            .unwrap();
        let p01 = kron(&p0, &p1).unwrap();
        // |01><01| has its single 1 at index (1,1).
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == 1 && c == 1 { 1.0 } else { 0.0 };
                assert!((p01[(r, c)] - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn kron_x_z_entry() {
        // By-hand 4x4 tensor expansion: (X (x) Z)[0,2] = X[0,1] * Z[0,0] = 1.
        let m = kron(&pauli_x(), &pauli_z()).unwrap();
        assert!((m[(0, 2)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn kron_cap_errors() {
        let big = ComplexMatrix::identity(64);
        let at_cap = kron(&big, &big).unwrap(); // 4096, exactly at the cap
        let err = kron(&at_cap, &ComplexMatrix::identity(2));
        assert!(matches!(err, Err(CoreError::DimensionCap { .. })));
    }

    #[test]
    fn partial_trace_product_state() {
        let layout = RegisterLayout::bipartite_bc(2, 2).unwrap();
        let psi = PureState::basis(0, layout).unwrap(); // |00>
        let rho = DensityMatrix::from_pure(&psi);
        let reduced = partial_trace(&rho, &[Role::B]).unwrap();
        assert_eq!(reduced.dim(), 2);
        assert!((reduced.op()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(reduced.op()[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn partial_trace_bell_is_maximally_mixed() {
        let bell = bell_phi_plus();
        let reduced = partial_trace(&bell, &[Role::B]).unwrap();
        for r in 0..2 {
            for cc in 0..2 {
                let expect = if r == cc { 0.5 } else { 0.0 };
                assert!((reduced.op()[(r, cc)] - c(expect, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_tensor_factor() {
        // Tr_A[rho_A (x) rho_BC] = rho_BC.
        let rho_a = match sample_state(StateKind::GinibreMixed, &RegisterLayout::single(2), 5, 0)
            .unwrap()
        {
            SampledState::Mixed(m) => m,
            _ => unreachable!(),
        };
        let rho_bc = match sample_state(
            StateKind::GinibreMixed,
            &RegisterLayout::bipartite_bc(2, 3).unwrap(),
            5,
            1,
        )
        .unwrap()
        {
            SampledState::Mixed(m) => m,
            _ => unreachable!(),
        };
        let product = kron(rho_a.op(), rho_bc.op()).unwrap();
        let layout = RegisterLayout::new(vec![2, 2, 3], vec![Role::A, Role::B, Role::C]).unwrap();
        let rho = DensityMatrix::new(product, layout).unwrap();
        let reduced = partial_trace(&rho, &[Role::A]).unwrap();
        let diff = reduced.op().sub(rho_bc.op()).max_abs();
        assert!(diff < 1e-12, "diff {diff}");
    }

    #[test]
    fn partial_trace_unknown_role_errors() {
        let bell = bell_phi_plus();
        assert!(matches!(
            partial_trace(&bell, &[Role::A]),
            Err(CoreError::Layout(_))
        ));
    }

    #[test]
    fn trace_distance_examples() {
        let layout = RegisterLayout::single(2);
        let zero = DensityMatrix::from_pure(&PureState::basis(0, layout.clone()).unwrap());
        let one = DensityMatrix::from_pure(&PureState::basis(1, layout.clone()).unwrap());
        let mixed = DensityMatrix::maximally_mixed(layout);
        assert!(trace_distance(&zero, &zero).unwrap().abs() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 2.0).abs() < 1e-12);
        assert!((trace_distance(&zero, &mixed).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trace_distance_dimension_mismatch() {
        let a = DensityMatrix::maximally_mixed(RegisterLayout::single(2));
        let b = DensityMatrix::maximally_mixed(RegisterLayout::single(4));
        assert!(trace_distance(&a, &b).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let layout = RegisterLayout::single(2);
        let zero = DensityMatrix::from_pure(&PureState::basis(0, layout.clone()).unwrap());
        let one = DensityMatrix::from_pure(&PureState::basis(1, layout.clone()).unwrap());
        let mixed = DensityMatrix::maximally_mixed(layout);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-10);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-10);
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn fidelity_pure_case_equals_overlap() {
        for trial in 0..20 {
            let layout = RegisterLayout::single(4);
            let psi = match sample_state(StateKind::HaarPure, &layout, 23, trial).unwrap() {
                SampledState::Pure(p) => p,
                _ => unreachable!(),
            };
            let tau = match sample_state(StateKind::GinibreMixed, &layout, 29, trial).unwrap() {
                SampledState::Mixed(m) => m,
                _ => unreachable!(),
            };
            let rho = DensityMatrix::from_pure(&psi);
            let f = fidelity(&rho, &tau).unwrap();
            let direct = tau.op().matvec(psi.amplitudes());
            let overlap: C64 = psi
                .amplitudes()
                .iter()
                .zip(&direct)
                .map(|(a, b)| a.conj() * b)
                .sum();
            assert!(
                (f - overlap.re).abs() < 1e-9,
                "fidelity {f} vs overlap {}",
                overlap.re
            );
        }
    }

    #[test]
    fn layout_rejects_duplicate_roles() {
        assert!(RegisterLayout::new(vec![2, 2], vec![Role::A, Role::A]).is_err());
    }

    #[test]
    fn layout_rejects_oversized_c_register() {
        assert!(RegisterLayout::new(vec![2, 32], vec![Role::B, Role::C]).is_err());
    }

    #[test]
    fn clip_to_state_fixes_negative_eigenvalue() {
        // I/2 + Z has eigenvalues 1.5 and -0.5.
        let m = ComplexMatrix::identity(2)
            .scale(c(0.5, 0.0))
            .add(&pauli_z());
        let clipped = clip_to_state(&m).unwrap();
        let eigs = hermitian_eigs(&clipped).unwrap();
        assert!(eigs.values.iter().all(|&l| l >= -1e-12));
        assert!((clipped.trace().re - 1.0).abs() < 1e-12);
    }
}
