//! Deterministic state sampling. Every sampler derives its stream from
//! (seed, trial), so ensembles reproduce exactly across runs and threads.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::rng::{gaussian, stream};
use crate::{CoreError, Result};

use super::{
    kron_vec, normalize, ComplexMatrix, DensityMatrix, PureState, RegisterLayout, Role,
};

/// Sampler families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateKind {
    /// Haar-random pure state on the whole space.
    HaarPure,
    /// Full-rank mixed state G G^dag / Tr from a square complex Gaussian G.
    GinibreMixed,
    /// Haar-random pure state on each register, tensored.
    ProductPure,
    /// Convex mixture of `m` Haar product terms; separable across the first
    /// register vs the rest by construction.
    SeparableMixture(usize),
    /// Purification with a computational-basis first register:
    /// sum_i alpha_i |i>|mu_i>|nu_i> on an (A,B,C) layout.
    CompBasisPurification,
    /// sum_v alpha_v |v>|c_v, v>|c_v> on the four-register protocol layout
    /// (A = C^R, B = C^kappa (x) C^R, C = C^kappa).
    Quasirigid,
}

/// Sampler output; the kind determines the variant.
#[derive(Debug, Clone)]
pub enum SampledState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

impl SampledState {
    pub fn into_density(self) -> DensityMatrix {
        match self {
            SampledState::Pure(p) => DensityMatrix::from_pure(&p),
            SampledState::Mixed(m) => m,
        }
    }

    pub fn pure(self) -> Option<PureState> {
        match self {
            SampledState::Pure(p) => Some(p),
            SampledState::Mixed(_) => None,
        }
    }
}

fn haar_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let mut v: Vec<C64> = (0..d)
        .map(|_| C64::new(gaussian(rng), gaussian(rng)))
        .collect();
    normalize(&mut v);
    v
}

fn random_simplex(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|_| -(rng.gen::<f64>().max(f64::MIN_POSITIVE)).ln()).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

/// Draw a state of the requested kind on the layout, deterministically from
/// (seed, trial).
pub fn sample_state(
    kind: StateKind,
    layout: &RegisterLayout,
    seed: u64,
    trial: u64,
) -> Result<SampledState> {
    let mut rng = stream(seed, trial);
    let d = layout.total_dim();
    match kind {
        StateKind::HaarPure => {
            let amps = haar_vector(d, &mut rng);
            Ok(SampledState::Pure(PureState::new(amps, layout.clone())?))
        }
        StateKind::GinibreMixed => {
            let mut g = ComplexMatrix::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    g[(r, c)] = C64::new(gaussian(&mut rng), gaussian(&mut rng));
                }
            }
            let gg = g.matmul(&g.dagger());
            let t = gg.trace().re;
            let op = gg.scale(C64::new(1.0 / t, 0.0)).hermitize();
            Ok(SampledState::Mixed(DensityMatrix::new(op, layout.clone())?))
        }
        StateKind::ProductPure => {
            let mut amps = vec![C64::new(1.0, 0.0)];
            for &dim in layout.dims() {
                let factor = haar_vector(dim, &mut rng);
                amps = kron_vec(&amps, &factor);
            }
            Ok(SampledState::Pure(PureState::new(amps, layout.clone())?))
        }
        StateKind::SeparableMixture(m) => {
            if m < 1 {
                return Err(CoreError::Precondition(
                    "separable mixture needs at least one term".into(),
                ));
            }
            if layout.registers() < 2 {
                return Err(CoreError::Layout(
                    "separable mixture needs at least two registers".into(),
                ));
            }
            let d_first = layout.dims()[0];
            let d_rest: usize = layout.dims()[1..].iter().product();
            let weights = random_simplex(m, &mut rng);
            let mut op = ComplexMatrix::zeros(d, d);
            for &p in &weights {
                let left = haar_vector(d_first, &mut rng);
                let right = haar_vector(d_rest, &mut rng);
                let amps = kron_vec(&left, &right);
                for r in 0..d {
                    for c in 0..d {
                        op[(r, c)] += amps[r] * amps[c].conj() * p;
                    }
                }
            }
            Ok(SampledState::Mixed(DensityMatrix::new(
                op.hermitize(),
                layout.clone(),
            )?))
        }
        StateKind::CompBasisPurification => {
            let (da, db, dc) = tripartite_dims(layout)?;
            let mut alphas: Vec<C64> = (0..da)
                .map(|_| C64::new(gaussian(&mut rng), gaussian(&mut rng)))
                .collect();
            normalize(&mut alphas);
            let mut amps = vec![C64::new(0.0, 0.0); d];
            for (i, &alpha) in alphas.iter().enumerate() {
                let mu = haar_vector(db, &mut rng);
                let nu = haar_vector(dc, &mut rng);
                for (b, &mb) in mu.iter().enumerate() {
                    for (c, &nc) in nu.iter().enumerate() {
                        amps[(i * db + b) * dc + c] += alpha * mb * nc;
                    }
                }
            }
            Ok(SampledState::Pure(PureState::new(amps, layout.clone())?))
        }
        StateKind::Quasirigid => {
            let (r_dim, kappa) = protocol_dims(layout)?;
            let mut alphas: Vec<C64> = (0..r_dim)
                .map(|_| C64::new(gaussian(&mut rng), gaussian(&mut rng)))
                .collect();
            normalize(&mut alphas);
            let colors: Vec<usize> = (0..r_dim).map(|_| rng.gen_range(0..kappa)).collect();
            let amps = quasirigid_amplitudes(&alphas, &colors, r_dim, kappa);
            Ok(SampledState::Pure(PureState::new(amps, layout.clone())?))
        }
    }
}

/// Amplitudes of sum_v alpha_v |v>|c_v, v>|c_v> in the flat
/// ((v * kappa + c) * R + w) * kappa + d indexing.
pub fn quasirigid_amplitudes(
    alphas: &[C64],
    colors: &[usize],
    r_dim: usize,
    kappa: usize,
) -> Vec<C64> {
    let mut amps = vec![C64::new(0.0, 0.0); r_dim * kappa * r_dim * kappa];
    for v in 0..r_dim {
        let c = colors[v];
        amps[((v * kappa + c) * r_dim + v) * kappa + c] = alphas[v];
    }
    amps
}

fn tripartite_dims(layout: &RegisterLayout) -> Result<(usize, usize, usize)> {
    let da = layout
        .dim_of(Role::A)
        .ok_or_else(|| CoreError::Layout("layout needs an A register".into()))?;
    let db = layout
        .dim_of(Role::B)
        .ok_or_else(|| CoreError::Layout("layout needs a B register".into()))?;
    let dc = layout
        .dim_of(Role::C)
        .ok_or_else(|| CoreError::Layout("layout needs a C register".into()))?;
    if layout.index_of(Role::A) != Some(0) {
        return Err(CoreError::Layout("A must be the first register".into()));
    }
    Ok((da, db, dc))
}

fn protocol_dims(layout: &RegisterLayout) -> Result<(usize, usize)> {
    let (da, db, dc) = tripartite_dims(layout)?;
    if db != da * dc {
        return Err(CoreError::Layout(format!(
            "protocol layout needs dim(B) = dim(A)*dim(C); got {db} != {da}*{dc}"
        )));
    }
    Ok((da, dc))
}
