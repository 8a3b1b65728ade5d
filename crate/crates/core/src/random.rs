//! Seeded random instances: states, unitaries, channels, permutations.
//!
//! All generators take an explicit `Rng` so every randomized check in the
//! crate is reproducible from a seed.

use alloc::vec::Vec;

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{JammerChannel, QuantumChannel};
use crate::linalg::{real, trace, CVec, Mat, C64};
use crate::models::StochasticMatrix;
use crate::state::{DensityMatrix, PureState};

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut Rng) -> Mat {
    let mut m = Mat::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = C64::new(normal(rng), normal(rng)) * real(core::f64::consts::FRAC_1_SQRT_2);
        }
    }
    m
}

pub fn random_hermitian(d: usize, rng: &mut Rng) -> Mat {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()) * real(0.5)
}

/// Traceless Hermitian direction with unit Frobenius norm.
pub fn random_traceless_hermitian(d: usize, rng: &mut Rng) -> Mat {
    let mut h = random_hermitian(d, rng);
    let t = trace(&h) / real(d as f64);
    for i in 0..d {
        h[(i, i)] -= t;
    }
    let n = h.norm();
    h / real(n)
}

/// Hilbert–Schmidt distributed mixed state (`G G† / Tr`, `G` square Ginibre).
pub fn random_density(d: usize, rng: &mut Rng) -> DensityMatrix {
    random_density_rank(d, d, rng)
}

/// Induced-measure mixed state of rank at most `rank`.
pub fn random_density_rank(d: usize, rank: usize, rng: &mut Rng) -> DensityMatrix {
    let g = ginibre(d, rank, rng);
    let m = &g * g.adjoint();
    let t = trace(&m);
    DensityMatrix::from_hermitian_unchecked(m / t)
}

pub fn random_pure(d: usize, rng: &mut Rng) -> PureState {
    let g = ginibre(d, 1, rng);
    let n = g.norm();
    let v: CVec = g.column(0).into_owned() / real(n);
    PureState::new(v).expect("normalized")
}

/// Haar random unitary via QR with the standard phase correction.
pub fn random_unitary(d: usize, rng: &mut Rng) -> Mat {
    let qr = ginibre(d, d, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { real(1.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random CPTP map with `rank` Kraus operators from a random Stinespring
/// isometry. Requires `d_out * rank >= d_in`.
pub fn random_channel(d_in: usize, d_out: usize, rank: usize, rng: &mut Rng) -> QuantumChannel {
    assert!(d_out * rank >= d_in, "isometry needs d_out * rank >= d_in");
    let v = ginibre(d_out * rank, d_in, rng).qr().q();
    let kraus = (0..rank)
        .map(|k| v.rows(k * d_out, d_out).into_owned())
        .collect();
    QuantumChannel::new(kraus).expect("isometry gives a channel")
}

pub fn random_jammer(d_a: usize, d_s: usize, d_b: usize, rank: usize, rng: &mut Rng) -> JammerChannel {
    let map = random_channel(d_a * d_s, d_b, rank, rng);
    JammerChannel::new(map, d_a, d_s).expect("dimensions consistent")
}

/// Uniform random permutation of `0..n` (Fisher–Yates).
pub fn random_permutation(n: usize, rng: &mut Rng) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Uniform point of the probability simplex.
pub fn random_probability(n: usize, rng: &mut Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>();
            -num_traits::Float::ln(1.0 - u)
        })
        .collect();
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub fn random_stochastic(outputs: usize, inputs: usize, rng: &mut Rng) -> StochasticMatrix {
    let mut w = alloc::vec![0.0; outputs * inputs];
    for x in 0..inputs {
        let col = random_probability(outputs, rng);
        for y in 0..outputs {
            w[y * inputs + x] = col[y];
        }
    }
    StochasticMatrix::new(outputs, inputs, w).expect("columns normalized")
}
