//! Completely positive trace-preserving maps in Kraus form, their Choi
//! matrices, adjoints and complementary channels.
//!
//! Choi convention: `J = Σ_{ij} |i><j| ⊗ T(|i><j|)`, input factor first, so
//! the entry `J[i·d_out + b, j·d_out + b']` is `<b|T(|i><j|)|b'>`.

use alloc::borrow::Cow;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{self, real, CVec, Mat, ZERO};
use crate::state::DensityMatrix;
use crate::subsystem::partial_trace;

pub const CPTP_TOL: f64 = 1e-9;
/// Choi eigenvalues below this are dropped when extracting Kraus operators.
pub const KRAUS_CUTOFF: f64 = 1e-10;
/// Choi matrices up to this dimension are computed once and cached.
const CHOI_CACHE_DIM: usize = 1024;

#[derive(Debug, Clone)]
pub struct QuantumChannel {
    d_in: usize,
    d_out: usize,
    kraus: Vec<Mat>,
    choi: Option<Mat>,
}

/// Invariant measurements of a channel, all expected to be ~0 (or ≥ 0 for
/// the eigenvalue).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDiagnostics {
    pub trace_preservation: f64,
    pub choi_min_eigenvalue: f64,
    pub choi_marginal: f64,
}

impl ChannelDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.trace_preservation <= CPTP_TOL
            && self.choi_min_eigenvalue >= -CPTP_TOL
            && self.choi_marginal <= CPTP_TOL
    }
}

fn tp_deviation(kraus: &[Mat], d_in: usize) -> f64 {
    let mut s = Mat::zeros(d_in, d_in);
    for k in kraus {
        s += k.adjoint() * k;
    }
    linalg::max_abs_diff(&s, &linalg::identity(d_in))
}

/// `vec(K)[i·d_out + b] = K[b, i]`.
fn vectorize(k: &Mat) -> CVec {
    let (d_out, d_in) = k.shape();
    CVec::from_fn(d_in * d_out, |idx, _| k[(idx % d_out, idx / d_out)])
}

pub fn choi_from_kraus_list(kraus: &[Mat]) -> Mat {
    let (d_out, d_in) = kraus[0].shape();
    let n = d_in * d_out;
    let mut j = Mat::zeros(n, n);
    for k in kraus {
        let v = vectorize(k);
        j += &v * v.adjoint();
    }
    j
}

impl QuantumChannel {
    /// Builds a channel from Kraus operators, checking shapes and trace
    /// preservation. Exactly-zero operators are discarded.
    pub fn new(kraus: Vec<Mat>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::Empty("Kraus list"))?;
        let (d_out, d_in) = first.shape();
        if d_in == 0 || d_out == 0 {
            return Err(Error::Empty("Kraus operator"));
        }
        for k in &kraus {
            if k.nrows() != d_out {
                return Err(Error::DimensionMismatch {
                    axis: "Kraus rows (d_out)",
                    expected: d_out,
                    found: k.nrows(),
                });
            }
            if k.ncols() != d_in {
                return Err(Error::DimensionMismatch {
                    axis: "Kraus columns (d_in)",
                    expected: d_in,
                    found: k.ncols(),
                });
            }
        }
        let dev = tp_deviation(&kraus, d_in);
        if dev > CPTP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        let mut kraus: Vec<Mat> = kraus.into_iter().filter(|k| linalg::max_abs(k) > 0.0).collect();
        if kraus.is_empty() {
            kraus.push(Mat::zeros(d_out, d_in));
        }
        let choi = (d_in * d_out <= CHOI_CACHE_DIM).then(|| choi_from_kraus_list(&kraus));
        Ok(Self { d_in, d_out, kraus, choi })
    }

    /// For Kraus sets obtained from a valid channel by operations that keep
    /// `Σ K†K = I`, such as relabeling basis states.
    pub(crate) fn from_kraus_unchecked(kraus: Vec<Mat>) -> Self {
        let (d_out, d_in) = kraus[0].shape();
        let choi = (d_in * d_out <= CHOI_CACHE_DIM).then(|| choi_from_kraus_list(&kraus));
        Self { d_in, d_out, kraus, choi }
    }

    pub fn identity(d: usize) -> Self {
        Self::new(alloc::vec![linalg::identity(d)]).expect("identity is CPTP")
    }

    /// Conjugation by a unitary (or isometry) `u`.
    pub fn unitary(u: Mat) -> Result<Self> {
        let dev = linalg::max_abs_diff(&(u.adjoint() * &u), &linalg::identity(u.ncols()));
        if dev > 1e-10 {
            return Err(Error::NotUnitary(dev));
        }
        Self::new(alloc::vec![u])
    }

    /// Kraus operators from the eigendecomposition of a Choi matrix
    /// (largest eigenvalue first).
    pub fn from_choi(choi: &Mat, d_in: usize, d_out: usize) -> Result<Self> {
        let n = linalg::ensure_square(choi)?;
        if n != d_in * d_out {
            return Err(Error::DimensionMismatch {
                axis: "Choi dimension d_in*d_out",
                expected: d_in * d_out,
                found: n,
            });
        }
        let herm = linalg::hermitian_deviation(choi);
        if herm > CPTP_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let e = linalg::eigh(choi);
        if e.min() < -CPTP_TOL {
            return Err(Error::NotPositive(e.min()));
        }
        let marginal = partial_trace(choi, &[d_in, d_out], &[0])?;
        let dev = linalg::max_abs_diff(&marginal, &linalg::identity(d_in));
        if dev > CPTP_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        let mut kraus = Vec::new();
        for idx in (0..n).rev() {
            let lam = e.values[idx];
            if lam <= KRAUS_CUTOFF {
                continue;
            }
            let v = e.vector(idx) * real(lam.sqrt());
            kraus.push(Mat::from_fn(d_out, d_in, |b, i| v[i * d_out + b]));
        }
        if kraus.is_empty() {
            return Err(Error::NotTracePreserving(1.0));
        }
        let ch = Self::new(kraus)?;
        let rebuilt = ch.choi();
        let dev = linalg::max_abs_diff(&rebuilt, choi);
        if dev > CPTP_TOL {
            return Err(Error::Inconsistent(dev));
        }
        Ok(ch)
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn kraus(&self) -> &[Mat] {
        &self.kraus
    }

    pub fn rank(&self) -> usize {
        self.kraus.len()
    }

    pub fn choi(&self) -> Cow<'_, Mat> {
        match &self.choi {
            Some(c) => Cow::Borrowed(c),
            None => Cow::Owned(choi_from_kraus_list(&self.kraus)),
        }
    }

    /// `‖Σ K†K − I‖_max`, without forming the Choi matrix.
    pub fn trace_preservation(&self) -> f64 {
        tp_deviation(&self.kraus, self.d_in)
    }

    pub fn diagnostics(&self) -> ChannelDiagnostics {
        let choi = self.choi();
        let marginal = partial_trace(&choi, &[self.d_in, self.d_out], &[0]).expect("dims consistent");
        ChannelDiagnostics {
            trace_preservation: tp_deviation(&self.kraus, self.d_in),
            choi_min_eigenvalue: linalg::min_eigenvalue(&choi),
            choi_marginal: linalg::max_abs_diff(&marginal, &linalg::identity(self.d_in)),
        }
    }

    fn check_input(&self, d: usize) -> Result<()> {
        if d != self.d_in {
            return Err(Error::DimensionMismatch {
                axis: "channel input",
                expected: self.d_in,
                found: d,
            });
        }
        Ok(())
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.check_input(rho.dim())?;
        Ok(DensityMatrix::from_hermitian_unchecked(self.apply_matrix(rho.matrix())))
    }

    /// `Σ_k K_k X K_k†` for any `d_in × d_in` operator `X`.
    pub fn apply_matrix(&self, x: &Mat) -> Mat {
        let mut out = Mat::zeros(self.d_out, self.d_out);
        for k in &self.kraus {
            out += k * x * k.adjoint();
        }
        out
    }

    /// `Tr_in[(Xᵀ ⊗ I) J]`.
    pub fn apply_via_choi(&self, x: &Mat) -> Mat {
        apply_choi(&self.choi(), self.d_in, self.d_out, x)
    }

    /// Heisenberg picture `Σ_k K_k† Y K_k`.
    pub fn apply_adjoint(&self, y: &Mat) -> Mat {
        let mut out = Mat::zeros(self.d_in, self.d_in);
        for k in &self.kraus {
            out += k.adjoint() * y * k;
        }
        out
    }

    /// Channel to the environment of the Stinespring dilation
    /// `V = Σ_k K_k ⊗ |k>`: `[T_c(ρ)]_{jk} = Tr[K_k† K_j ρ]`.
    pub fn complementary(&self) -> QuantumChannel {
        let r = self.kraus.len();
        let kraus = (0..self.d_out)
            .map(|b| {
                let mut e = Mat::zeros(r, self.d_in);
                for (j, k) in self.kraus.iter().enumerate() {
                    for i in 0..self.d_in {
                        e[(j, i)] = k[(b, i)];
                    }
                }
                e
            })
            .collect();
        QuantumChannel::new(kraus).expect("complement of a channel is a channel")
    }

    /// Stinespring isometry with output ordered `B ⊗ E`.
    pub fn stinespring(&self) -> Mat {
        let r = self.kraus.len();
        let mut v = Mat::zeros(self.d_out * r, self.d_in);
        for (k, op) in self.kraus.iter().enumerate() {
            for b in 0..self.d_out {
                for i in 0..self.d_in {
                    v[(b * r + k, i)] = op[(b, i)];
                }
            }
        }
        v
    }

    /// `after ∘ self`.
    pub fn then(&self, after: &QuantumChannel) -> Result<QuantumChannel> {
        if after.d_in != self.d_out {
            return Err(Error::DimensionMismatch {
                axis: "composition",
                expected: self.d_out,
                found: after.d_in,
            });
        }
        let mut kraus = Vec::with_capacity(self.rank() * after.rank());
        for a in &after.kraus {
            for k in &self.kraus {
                kraus.push(a * k);
            }
        }
        QuantumChannel::new(kraus)
    }

    /// `self ⊗ other` acting on `A_1 ⊗ A_2`.
    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let mut kraus = Vec::with_capacity(self.rank() * other.rank());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(linalg::kron(a, b));
            }
        }
        QuantumChannel::new(kraus).expect("tensor of channels is a channel")
    }
}

/// Action of the map with Choi matrix `choi` on an operator.
pub fn apply_choi(choi: &Mat, d_in: usize, d_out: usize, x: &Mat) -> Mat {
    let mut out = Mat::zeros(d_out, d_out);
    for i in 0..d_in {
        for j in 0..d_in {
            let w = x[(i, j)];
            if w == ZERO {
                continue;
            }
            for b in 0..d_out {
                for bp in 0..d_out {
                    out[(b, bp)] += w * choi[(i * d_out + b, j * d_out + bp)];
                }
            }
        }
    }
    out
}

/// A channel on `A ⊗ S → B` with composite input index `a·d_S + s`.
#[derive(Debug, Clone)]
pub struct JammerChannel {
    d_a: usize,
    d_s: usize,
    map: QuantumChannel,
}

impl JammerChannel {
    pub fn new(map: QuantumChannel, d_a: usize, d_s: usize) -> Result<Self> {
        if d_a == 0 || d_s == 0 || d_a * d_s != map.d_in() {
            return Err(Error::DimensionMismatch {
                axis: "jammer input d_A*d_S",
                expected: map.d_in(),
                found: d_a * d_s,
            });
        }
        Ok(Self { d_a, d_s, map })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_b(&self) -> usize {
        self.map.d_out()
    }

    pub fn map(&self) -> &QuantumChannel {
        &self.map
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::von_neumann_entropy;
    use crate::linalg::{kron, max_abs_diff};
    use crate::random::{random_channel, random_density, random_unitary, seeded};
    use crate::state::{purify, PureState};

    fn pauli_x() -> Mat {
        linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn fully_depolarizing() -> QuantumChannel {
        QuantumChannel::from_choi(&(linalg::identity(4) * real(0.5)), 2, 2).unwrap()
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let k = linalg::identity(2) * real(1.0005);
        assert!(matches!(QuantumChannel::new(alloc::vec![k]), Err(Error::NotTracePreserving(_))));
        let a = linalg::identity(2);
        let b = linalg::identity(3);
        assert!(matches!(
            QuantumChannel::new(alloc::vec![a, b]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn identity_choi_is_unnormalized_bell() {
        let ch = QuantumChannel::identity(2);
        let choi = ch.choi();
        let phi = PureState::maximally_entangled(2).density().into_matrix() * real(2.0);
        assert!(max_abs_diff(&choi, &phi) < 1e-15);
        assert!((linalg::trace(&choi).re - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_channel_maps_to_maximally_mixed() {
        let ch = fully_depolarizing();
        let mut rng = seeded(1);
        for _ in 0..5 {
            let rho = random_density(2, &mut rng);
            let out = ch.apply(&rho).unwrap();
            assert!(max_abs_diff(out.matrix(), &(linalg::identity(2) * real(0.5))) < 1e-12);
        }
        assert!(max_abs_diff(&ch.choi(), &(linalg::identity(4) * real(0.5))) < 1e-12);
    }

    #[test]
    fn kraus_and_choi_actions_agree() {
        let mut rng = seeded(2);
        for (di, dout, r) in [(2, 2, 3), (3, 2, 4), (2, 4, 1), (4, 3, 2)] {
            let ch = random_channel(di, dout, r, &mut rng);
            let rho = random_density(di, &mut rng);
            let a = ch.apply_matrix(rho.matrix());
            let b = ch.apply_via_choi(rho.matrix());
            assert!(max_abs_diff(&a, &b) < 1e-12);
            assert!(ch.diagnostics().is_valid());
        }
    }

    #[test]
    fn choi_round_trip() {
        let mut rng = seeded(3);
        for _ in 0..5 {
            let ch = random_channel(3, 2, 3, &mut rng);
            let back = QuantumChannel::from_choi(&ch.choi(), 3, 2).unwrap();
            let rho = random_density(3, &mut rng);
            assert!(max_abs_diff(&ch.apply_matrix(rho.matrix()), &back.apply_matrix(rho.matrix())) < 1e-10);
            assert!(max_abs_diff(&ch.choi(), &back.choi()) < 1e-9);
        }
        let id = QuantumChannel::from_choi(&QuantumChannel::identity(2).choi(), 2, 2).unwrap();
        assert_eq!(id.rank(), 1);
        assert!(linalg::unitary_deviation(&id.kraus()[0]) < 1e-12);
        let k = &id.kraus()[0];
        assert!((k[(0, 1)].norm() + k[(1, 0)].norm()) < 1e-12);
    }

    #[test]
    fn from_choi_rejects_invalid() {
        let mut bad = linalg::identity(4) * real(0.5);
        bad[(0, 0)] = real(-0.1);
        bad[(1, 1)] = real(1.1);
        assert!(matches!(QuantumChannel::from_choi(&bad, 2, 2), Err(Error::NotPositive(v)) if v < -0.09));
        let unnormalized = linalg::identity(4);
        assert!(matches!(
            QuantumChannel::from_choi(&unnormalized, 2, 2),
            Err(Error::NotTracePreserving(_))
        ));
    }

    #[test]
    fn adjoint_is_dual() {
        let mut rng = seeded(4);
        let ch = random_channel(3, 4, 2, &mut rng);
        let x = crate::random::random_hermitian(3, &mut rng);
        let y = crate::random::random_hermitian(4, &mut rng);
        let lhs = linalg::trace(&(ch.apply_matrix(&x) * &y));
        let rhs = linalg::trace(&(&x * ch.apply_adjoint(&y)));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn unitary_complement_is_trivial() {
        let mut rng = seeded(5);
        let ch = QuantumChannel::unitary(random_unitary(3, &mut rng)).unwrap();
        let c = ch.complementary();
        assert_eq!(c.d_out(), 1);
        let out = c.apply(&random_density(3, &mut rng)).unwrap();
        assert!(von_neumann_entropy(&out).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_environment_entropy_via_explicit_isometry() {
        // Stinespring built independently: V = Σ_k K_k ⊗ |k>, environment
        // state = Tr_B[V ρ V†].
        let ch = fully_depolarizing();
        let v = ch.stinespring();
        let rho = DensityMatrix::maximally_mixed(2);
        let big = &v * rho.matrix() * v.adjoint();
        let env = partial_trace(&big, &[2, ch.rank()], &[1]).unwrap();
        let s_env = von_neumann_entropy(&DensityMatrix::new(env.clone()).unwrap());
        assert!((s_env - 2.0).abs() < 1e-10);
        let via_complement = ch.complementary().apply(&rho).unwrap();
        assert!((von_neumann_entropy(&via_complement) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn complement_entropy_matches_purified_evolution() {
        let mut rng = seeded(6);
        for _ in 0..10 {
            let ch = random_channel(2, 3, 3, &mut rng);
            let rho = random_density(2, &mut rng);
            let psi = purify(&rho);
            // (id ⊗ V)|ψ> on A' ⊗ B ⊗ E, reduced to A'B
            let v = kron(&linalg::identity(2), &ch.stinespring());
            let out = &v * psi.amplitudes();
            let full = linalg::projector(&out);
            let ab = partial_trace(&full, &[2, 3, ch.rank()], &[0, 1]).unwrap();
            let s_ab = von_neumann_entropy(&DensityMatrix::new(ab).unwrap());
            let s_env = von_neumann_entropy(&ch.complementary().apply(&rho).unwrap());
            assert!((s_ab - s_env).abs() < 1e-9);
        }
    }

    #[test]
    fn composition_and_tensor() {
        let x = QuantumChannel::unitary(pauli_x()).unwrap();
        let xx = x.then(&x).unwrap();
        let mut rng = seeded(7);
        let rho = random_density(2, &mut rng);
        assert!(max_abs_diff(&xx.apply_matrix(rho.matrix()), rho.matrix()) < 1e-14);
        let t = x.tensor(&QuantumChannel::identity(3));
        assert_eq!((t.d_in(), t.d_out()), (6, 6));
    }

    #[test]
    fn jammer_dimension_check() {
        let map = QuantumChannel::identity(4);
        assert!(JammerChannel::new(map.clone(), 2, 2).is_ok());
        assert!(matches!(
            JammerChannel::new(map, 3, 2),
            Err(Error::DimensionMismatch { axis: "jammer input d_A*d_S", .. })
        ));
    }
}
