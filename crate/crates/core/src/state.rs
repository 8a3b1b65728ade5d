//! Density matrices, pure states and canonical purification.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, real, CVec, Mat};

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: Mat,
}

impl DensityMatrix {
    /// Validates the state invariants and stores the Hermitian part.
    pub fn new(m: Mat) -> Result<Self> {
        linalg::ensure_square(&m)?;
        let herm = linalg::hermitian_deviation(&m);
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = linalg::trace(&m);
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Trace(tr.re));
        }
        let m = linalg::hermitize(&m);
        let min = linalg::min_eigenvalue(&m);
        if min < -POSITIVITY_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self { m })
    }

    /// Skips validation. Callers guarantee the invariants up to round-off.
    pub(crate) fn from_hermitian_unchecked(m: Mat) -> Self {
        debug_assert!(linalg::hermitian_deviation(&m) < 1e-8);
        Self { m: linalg::hermitize(&m) }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            m: linalg::identity(d) * real(1.0 / d as f64),
        }
    }

    pub fn basis(d: usize, i: usize) -> Self {
        Self {
            m: linalg::basis_projector(d, i),
        }
    }

    /// Diagonal state from a probability vector.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        check_probability(p, "probability vector", 1e-12)?;
        Ok(Self { m: linalg::diag(p) })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn into_matrix(self) -> Mat {
        self.m
    }

    /// `λ self + (1-λ) other`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                axis: "state",
                expected: self.dim(),
                found: other.dim(),
            });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
            });
        }
        Ok(Self {
            m: &self.m * real(lambda) + &other.m * real(1.0 - lambda),
        })
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            m: linalg::kron(&self.m, &other.m),
        }
    }

    pub fn tensor_power(&self, n: usize) -> Self {
        let mut out = linalg::identity(1);
        for _ in 0..n {
            out = linalg::kron(&out, &self.m);
        }
        Self { m: out }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigh(&self.m).values
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        let purity = linalg::trace_product_re(&self.m, &self.m);
        (purity - 1.0).abs() <= tol
    }
}

/// Unit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    v: CVec,
}

impl PureState {
    pub fn new(v: CVec) -> Result<Self> {
        let n = v.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Norm(n));
        }
        Ok(Self { v })
    }

    pub fn basis(d: usize, i: usize) -> Self {
        Self {
            v: linalg::basis_vector(d, i),
        }
    }

    /// `(|00> + |11> + ... ) / sqrt(d)` on `C^d ⊗ C^d`.
    pub fn maximally_entangled(d: usize) -> Self {
        let mut v = CVec::zeros(d * d);
        let a = real(1.0 / (d as f64).sqrt());
        for i in 0..d {
            v[i * d + i] = a;
        }
        Self { v }
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.v
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix {
            m: linalg::projector(&self.v),
        }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            v: self.v.kronecker(&other.v),
        }
    }
}

/// Canonical purification of `rho` on `A' ⊗ A`, purifying system first:
/// `Σ_i sqrt(λ_i) |i>_{A'} ⊗ |v_i>_A` with eigenvalues in descending order
/// and eigenvectors phase-fixed (first non-negligible amplitude real
/// positive). Tracing out `A'` returns `rho`.
pub fn purify(rho: &DensityMatrix) -> PureState {
    let d = rho.dim();
    let e = linalg::eigh(rho.matrix());
    let mut v = CVec::zeros(d * d);
    for (i, idx) in (0..d).rev().enumerate() {
        let lam = e.values[idx].max(0.0);
        if lam == 0.0 {
            continue;
        }
        let w = real(lam.sqrt());
        let vec = e.vector(idx);
        for a in 0..d {
            v[i * d + a] = vec[a] * w;
        }
    }
    // clamped negative eigenvalues can leave the norm a hair off 1
    let n = v.norm();
    PureState { v: v / real(n) }
}

pub(crate) fn check_probability(p: &[f64], what: &'static str, tol: f64) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Empty(what));
    }
    if let Some(&neg) = p.iter().find(|&&x| x < -tol || !x.is_finite()) {
        return Err(Error::NegativeProbability { what, value: neg });
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > tol {
        return Err(Error::Normalization { what, sum: s });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use crate::random::{random_density, random_pure, seeded};
    use crate::subsystem::partial_trace;

    #[test]
    fn rejects_invalid_matrices() {
        let mut m = linalg::diag(&[0.6, 0.6]);
        assert!(matches!(DensityMatrix::new(m.clone()), Err(Error::Trace(_))));
        m = linalg::diag(&[1.2, -0.2]);
        assert!(matches!(DensityMatrix::new(m), Err(Error::NotPositive(_))));
        let mut h = linalg::diag(&[0.5, 0.5]);
        h[(0, 1)] = real(0.1);
        assert!(matches!(DensityMatrix::new(h), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn purification_marginal_matches() {
        let mut rng = seeded(11);
        for d in 1..6 {
            let rho = random_density(d, &mut rng);
            let psi = purify(&rho);
            let back = partial_trace(psi.density().matrix(), &[d, d], &[1]).unwrap();
            assert!(max_abs_diff(&back, rho.matrix()) < 1e-10);
        }
    }

    #[test]
    fn purification_of_pure_state_is_product() {
        let mut rng = seeded(12);
        let psi = random_pure(3, &mut rng);
        let p = purify(&psi.density());
        // |0>_{A'} ⊗ |ψ>_A up to the global phase convention
        let overlap = (PureState::basis(3, 0).tensor(&psi).amplitudes().adjoint() * p.amplitudes())[(0, 0)];
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn purification_of_maximally_mixed_is_maximally_entangled() {
        let p = purify(&DensityMatrix::maximally_mixed(2));
        let rho_ab = p.density();
        // pure with both marginals maximally mixed; the basis may differ from
        // |Φ+> by a local unitary
        assert!(rho_ab.is_pure(1e-12));
        let half = linalg::identity(2) * real(0.5);
        for keep in [0usize, 1] {
            let marg = partial_trace(rho_ab.matrix(), &[2, 2], &[keep]).unwrap();
            assert!(max_abs_diff(&marg, &half) < 1e-12);
        }
    }

    #[test]
    fn purification_is_deterministic() {
        let mut rng = seeded(13);
        let rho = random_density(4, &mut rng);
        assert_eq!(purify(&rho), purify(&rho.clone()));
    }
}
