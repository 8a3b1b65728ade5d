//! Dense complex matrix helpers shared by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Hermitian eigendecompositions
//! are always returned with ascending eigenvalues and a fixed phase
//! convention on the eigenvectors (first non-negligible amplitude real and
//! positive), so downstream results are reproducible bit for bit.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(d: usize) -> Mat {
    Mat::identity(d, d)
}

pub fn zeros(rows: usize, cols: usize) -> Mat {
    Mat::zeros(rows, cols)
}

/// Square matrix with the given real diagonal.
pub fn diag(values: &[f64]) -> Mat {
    let mut m = zeros(values.len(), values.len());
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = real(v);
    }
    m
}

pub fn basis_vector(d: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[i] = ONE;
    v
}

/// `|v><v|`.
pub fn projector(v: &CVec) -> Mat {
    v * v.adjoint()
}

pub fn basis_projector(d: usize, i: usize) -> Mat {
    let mut m = zeros(d, d);
    m[(i, i)] = ONE;
    m
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn ensure_square(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn trace(m: &Mat) -> C64 {
    m.diagonal().iter().copied().fold(ZERO, |acc, z| acc + z)
}

/// `Re Tr[a b]` without forming the product.
pub fn trace_product_re(a: &Mat, b: &Mat) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..a.ncols() {
            let x = a[(i, j)] * b[(j, i)];
            acc += x.re;
        }
    }
    acc
}

/// Largest entrywise modulus.
pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn hermitian_deviation(m: &Mat) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// `(m + m†) / 2`.
pub fn hermitize(m: &Mat) -> Mat {
    (m + m.adjoint()) * real(0.5)
}

/// Multiply `v` by a unit phase so that its first non-negligible entry is
/// real and positive.
pub fn fix_phase(v: &mut CVec) {
    let scale = v.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
    if scale == 0.0 {
        return;
    }
    let threshold = 1e-10 * scale;
    if let Some(z) = v.iter().copied().find(|z| z.norm() > threshold) {
        let phase = z.conj() / z.norm();
        v.iter_mut().for_each(|x| *x *= phase);
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Mat,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, i: usize) -> CVec {
        self.vectors.column(i).into_owned()
    }

    /// Eigenvector of the largest eigenvalue. Among (numerically) tied top
    /// eigenvalues the first in the sorted order wins.
    pub fn top_vector(&self) -> CVec {
        self.vector(self.values.len() - 1)
    }

    pub fn bottom_vector(&self) -> CVec {
        self.vector(0)
    }

    /// `V f(Λ) V†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Mat {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let fl = real(f(lam));
            for i in 0..d {
                scaled[(i, j)] *= fl;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Iteration cap handed to the QR-based solver.
const EIGEN_MAX_ITER: usize = 10_000;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigendecomposition of the Hermitian part of `m`.
///
/// The implicit-QR solver is tried first; if it fails to converge or its
/// residual `‖HV − VΛ‖` is off, a cyclic Jacobi solver takes over.
pub fn eigh(m: &Mat) -> Eigh {
    let d = m.nrows();
    debug_assert_eq!(d, m.ncols());
    if d == 1 {
        return Eigh {
            values: alloc::vec![m[(0, 0)].re],
            vectors: identity(1),
        };
    }
    let h = hermitize(m);
    let (raw_values, raw_vectors) = match h.clone().try_symmetric_eigen(f64::EPSILON, EIGEN_MAX_ITER) {
        Some(eig) if residual_ok(&h, &eig.eigenvalues.as_slice().to_vec(), &eig.eigenvectors) => {
            (eig.eigenvalues.as_slice().to_vec(), eig.eigenvectors)
        }
        _ => jacobi_eigen(&h),
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let mut vectors = zeros(d, d);
    let mut values = Vec::with_capacity(d);
    for (k, &idx) in order.iter().enumerate() {
        values.push(raw_values[idx]);
        let mut v = raw_vectors.column(idx).into_owned();
        fix_phase(&mut v);
        vectors.set_column(k, &v);
    }
    Eigh { values, vectors }
}

fn residual_ok(h: &Mat, values: &[f64], vectors: &Mat) -> bool {
    if values.iter().any(|v| !v.is_finite()) || vectors.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return false;
    }
    let scale = 1.0 + h.norm();
    let mut scaled = vectors.clone();
    for (j, &lam) in values.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= real(lam);
        }
    }
    let residual = max_abs(&(h * vectors - scaled));
    let orth = max_abs(&(vectors.adjoint() * vectors - identity(h.nrows())));
    residual <= 1e-10 * scale && orth <= 1e-10
}

/// Cyclic Jacobi for a Hermitian matrix: each rotation first removes the
/// phase of the pivot, then applies the real symmetric Jacobi rotation.
fn jacobi_eigen(h: &Mat) -> (Vec<f64>, Mat) {
    let d = h.nrows();
    let mut a = h.clone();
    let mut v = identity(d);
    let total = a.norm();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..d {
            for q in p + 1..d {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
                let g_pp = real(c);
                let g_pq = real(s);
                let g_qp = -phase.conj() * s;
                let g_qq = phase.conj() * c;
                for k in 0..d {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * g_pp + y * g_qp;
                    a[(k, q)] = x * g_pq + y * g_qq;
                }
                for k in 0..d {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = g_pp.conj() * x + g_qp.conj() * y;
                    a[(q, k)] = g_pq.conj() * x + g_qq.conj() * y;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = real(a[(p, p)].re);
                a[(q, q)] = real(a[(q, q)].re);
                for k in 0..d {
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * g_pp + y * g_qp;
                    v[(k, q)] = x * g_pq + y * g_qq;
                }
            }
        }
    }
    ((0..d).map(|i| a[(i, i)].re).collect(), v)
}

pub fn min_eigenvalue(m: &Mat) -> f64 {
    eigh(m).min()
}

pub fn max_eigenvalue(m: &Mat) -> f64 {
    eigh(m).max()
}

/// Spectral norm of a Hermitian matrix.
pub fn hermitian_norm(m: &Mat) -> f64 {
    let e = eigh(m);
    e.max().abs().max(e.min().abs())
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &Mat) -> f64 {
    eigh(m).values.iter().map(|v| v.abs()).sum()
}

/// Binary logarithm restricted to the support: eigenvalues at or below
/// `cutoff` map to zero.
pub fn log2_on_support(e: &Eigh, cutoff: f64) -> Mat {
    e.map(|l| if l > cutoff { l.log2() } else { 0.0 })
}

/// `sqrt` of a positive semidefinite matrix (negative noise clamped).
pub fn psd_sqrt(m: &Mat) -> Mat {
    eigh(m).map(|l| if l > 0.0 { l.sqrt() } else { 0.0 })
}

/// Euclidean projection of a real vector onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    // renormalize away round-off
    let s: f64 = out.iter().sum();
    if s > 0.0 {
        out.iter_mut().for_each(|x| *x /= s);
    } else {
        out = alloc::vec![1.0 / n as f64; n];
    }
    out
}

/// Real diagonal of a matrix.
pub fn real_diagonal(m: &Mat) -> Vec<f64> {
    m.diagonal().iter().map(|z| z.re).collect()
}

/// Real matrix embedded as complex.
pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Mat {
    DMatrix::from_fn(rows, cols, |i, j| real(data[i * cols + j]))
}

pub fn unitary_deviation(u: &Mat) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    max_abs_diff(&(u.adjoint() * u), &identity(u.nrows()))
}
