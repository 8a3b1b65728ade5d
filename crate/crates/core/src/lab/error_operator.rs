use alloc::vec;
use alloc::vec::Vec;

use super::scheme::{pow, CodingScheme};
use crate::channel::JammerChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, real, CVec, Mat};
use crate::random::{random_density, seeded};
use crate::state::DensityMatrix;
use crate::subsystem::{self, apply_local_kets, apply_on_block, permute_general, permute_kets, DEFAULT_BUDGET};

/// Agreement required between the two constructions of an error operator.
pub const CROSS_CHECK_TOL: f64 = 1e-10;
/// Slack on `0 ⪯ F ⪯ I`.
pub const SPECTRUM_TOL: f64 = 1e-9;
/// Largest block length for exact averaging over all permutations.
pub const MAX_SYMMETRIZE_N: usize = 5;
const CROSS_CHECK_SEED: u64 = 0x5eed;

/// `F` with `p_err(σ) = Tr[F σ]` for jammer states `σ` on `S^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorOperator {
    n: usize,
    d_s: usize,
    f: Mat,
}

impl ErrorOperator {
    pub fn new(n: usize, d_s: usize, f: Mat) -> Result<Self> {
        let dim = pow(d_s, n)?;
        if f.nrows() != dim || f.ncols() != dim {
            return Err(Error::DimensionMismatch {
                axis: "error operator (d_S^n)",
                expected: dim,
                found: f.nrows(),
            });
        }
        let dev = linalg::hermitian_deviation(&f);
        if dev > SPECTRUM_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let f = linalg::hermitize(&f);
        let e = linalg::eigh(&f);
        if e.min() < -SPECTRUM_TOL || e.max() > 1.0 + SPECTRUM_TOL {
            return Err(Error::Numerical(alloc::format!(
                "error operator spectrum [{:e}, {:e}] leaves [0, 1]",
                e.min(),
                e.max()
            )));
        }
        Ok(Self { n, d_s, f })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn matrix(&self) -> &Mat {
        &self.f
    }

    /// `Tr[F σ]`.
    pub fn error(&self, sigma: &DensityMatrix) -> f64 {
        linalg::trace_product_re(&self.f, sigma.matrix())
    }
}

/// Columns of all blocks side by side.
fn hcat(blocks: &[Mat], rows: usize) -> Mat {
    let cols = blocks.iter().map(Mat::ncols).sum();
    let mut out = Mat::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.columns_mut(c, b.ncols()).copy_from(b);
        c += b.ncols();
    }
    out
}

/// Average-message error of `scheme` over `T^{⊗n}` with jammer state `σ`,
/// by forward contraction of the whole protocol. States are carried as
/// ensembles of unnormalized kets: the shared state, the eigenvectors of
/// `σ`, then one branch per Kraus operator at every step.
pub fn coding_error(t: &JammerChannel, scheme: &CodingScheme, sigma: &DensityMatrix) -> Result<f64> {
    scheme.check_channel(t)?;
    let n = scheme.n();
    let (k, msgs) = (scheme.k(), scheme.messages());
    let s_n = pow(t.d_s(), n)?;
    if sigma.dim() != s_n {
        return Err(Error::DimensionMismatch {
            axis: "jammer state (d_S^n)",
            expected: s_n,
            found: sigma.dim(),
        });
    }
    let e = linalg::eigh(sigma.matrix());
    let jam: Vec<Mat> = (0..s_n)
        .filter(|&i| e.values[i] > 0.0)
        .map(|i| Mat::from_column_slice(s_n, 1, (e.vector(i) * real(e.values[i].sqrt())).as_slice()))
        .collect();
    let phi = Mat::from_column_slice(k * k, 1, scheme.phi().amplitudes().as_slice());
    let a_n = scheme.encoder().d_out();
    // slots: A_1..A_n, K, S_1..S_n  →  A_1 S_1 ... A_n S_n K
    let mut dims = vec![t.d_a(); n];
    dims.push(k);
    dims.extend(vec![t.d_s(); n]);
    let mut perm = vec![0; 2 * n + 1];
    for i in 0..n {
        perm[i] = 2 * i;
        perm[n + 1 + i] = 2 * i + 1;
    }
    perm[n] = 2 * n;

    let mut success = 0.0;
    for x in 0..msgs {
        let mut joint = Vec::new();
        for enc in scheme.encoder().kraus() {
            // encoder restricted to message x, acting on the first copy of K
            let enc_x = enc.columns(x * k, k).into_owned();
            if linalg::max_abs(&enc_x) == 0.0 {
                continue;
            }
            let (ket, _) = apply_local_kets(&phi, &[k, k], 0, 1, &enc_x)?;
            joint.extend(jam.iter().map(|j| linalg::kron(&ket, j)));
        }
        if joint.is_empty() {
            continue;
        }
        let (mut kets, mut cur) = permute_kets(&hcat(&joint, a_n * k * s_n), &dims, &perm)?;
        for i in 0..n {
            let mut branches = Vec::with_capacity(t.map().kraus().len());
            let mut next = cur.clone();
            for op in t.map().kraus() {
                let (b, d) = apply_local_kets(&kets, &cur, i, 2, op)?;
                branches.push(b);
                next = d;
            }
            let rows = branches[0].nrows();
            kets = hcat(&branches, rows);
            cur = next;
        }
        for dec in scheme.decoder().kraus() {
            success += (dec.rows(x, 1) * &kets).norm_squared();
        }
    }
    Ok(1.0 - success / msgs as f64)
}

/// Error operator in the Heisenberg picture: the decoder's success effects
/// pulled back through `D†` and `(T†)^{⊗n}`, then contracted with the
/// encoded states. Checked against [`coding_error`] on random jammer
/// states before returning.
pub fn build_error_operator(t: &JammerChannel, scheme: &CodingScheme) -> Result<ErrorOperator> {
    build_error_operator_with_budget(t, scheme, DEFAULT_BUDGET)
}

pub fn build_error_operator_with_budget(t: &JammerChannel, scheme: &CodingScheme, budget: usize) -> Result<ErrorOperator> {
    let f = heisenberg_operator(t, scheme, budget)?;
    let op = ErrorOperator::new(scheme.n(), t.d_s(), f)?;
    cross_check(t, scheme, &op)?;
    Ok(op)
}

fn heisenberg_operator(t: &JammerChannel, scheme: &CodingScheme, budget: usize) -> Result<Mat> {
    scheme.check_channel(t)?;
    let n = scheme.n();
    let (k, msgs) = (scheme.k(), scheme.messages());
    let s_n = pow(t.d_s(), n)?;
    if s_n > budget {
        return Err(Error::BudgetExceeded { needed: s_n, budget });
    }
    let widest = pow(t.d_a() * t.d_s(), n)?.saturating_mul(k);
    if widest > budget {
        return Err(Error::BudgetExceeded { needed: widest, budget });
    }
    let a_n = pow(t.d_a(), n)?;
    let adjoint_kraus: Vec<Mat> = t.map().kraus().iter().map(|m| m.adjoint()).collect();
    let amp = scheme.phi().amplitudes();
    let phi = Mat::from_fn(k, k, |i, j| amp[i * k + j]);
    // slots: A_1 S_1 ... A_n S_n K  →  A_1..A_n, K, S_1..S_n
    let mut split = Vec::with_capacity(2 * n + 1);
    for _ in 0..n {
        split.push(t.d_a());
        split.push(t.d_s());
    }
    split.push(k);
    let mut perm = vec![0; 2 * n + 1];
    for i in 0..n {
        perm[2 * i] = i;
        perm[2 * i + 1] = n + 1 + i;
    }
    perm[2 * n] = n;

    let ak = a_n * k;
    let mut f = linalg::identity(s_n);
    let weight = real(1.0 / msgs as f64);
    for x in 0..msgs {
        // D†(|x><x|) = Σ_D row_x(D)† row_x(D)
        let mut q = Mat::zeros(scheme.decoder().d_in(), scheme.decoder().d_in());
        for d in scheme.decoder().kraus() {
            let row = d.row(x);
            q += row.adjoint() * row;
        }
        let mut dims = vec![t.d_b(); n];
        dims.push(k);
        for i in 0..n {
            (q, dims) = apply_on_block(&q, &dims, i, 1, &adjoint_kraus)?;
        }
        let (x_op, _) = permute_general(&q, &split, &perm)?;
        // ω_x = Σ_E |v_E><v_E| with v_E = (E_x ⊗ I)|φ>, i.e. E_x Φ read row-major
        let mut omega = Mat::zeros(ak, ak);
        for e in scheme.encoder().kraus() {
            let v = e.columns(x * k, k) * &phi;
            let flat = CVec::from_fn(ak, |i, _| v[(i / k, i % k)]);
            omega += &flat * flat.adjoint();
        }
        // F_x[s, t] = Σ_{α,β} ω[β, α] X[(α, s), (β, t)]
        let mut fx = Mat::zeros(s_n, s_n);
        for alpha in 0..ak {
            for beta in 0..ak {
                let w = omega[(beta, alpha)];
                if w == linalg::ZERO {
                    continue;
                }
                fx += x_op.view((alpha * s_n, beta * s_n), (s_n, s_n)) * w;
            }
        }
        f -= fx * weight;
    }
    Ok(linalg::hermitize(&f))
}

fn cross_check(t: &JammerChannel, scheme: &CodingScheme, op: &ErrorOperator) -> Result<()> {
    let mut rng = seeded(CROSS_CHECK_SEED);
    let s_n = op.f.nrows();
    let single = random_density(t.d_s(), &mut rng);
    let probes = [random_density(s_n, &mut rng), single.tensor_power(scheme.n())];
    for sigma in &probes {
        let direct = coding_error(t, scheme, sigma)?;
        let via_f = op.error(sigma);
        if (direct - via_f).abs() > CROSS_CHECK_TOL {
            return Err(Error::Numerical(alloc::format!(
                "error operator disagrees with direct contraction by {:e}",
                (direct - via_f).abs()
            )));
        }
    }
    Ok(())
}

/// `(λ_max(F), top eigenprojector)`: the best entangled jamming state.
pub fn worst_case_jammer(f: &ErrorOperator) -> (f64, DensityMatrix) {
    let e = linalg::eigh(&f.f);
    let mut v = e.top_vector();
    linalg::fix_phase(&mut v);
    let sigma = DensityMatrix::from_hermitian_unchecked(linalg::projector(&v));
    (e.max(), sigma)
}

/// Error operator of the permuted scheme `(U_π ∘ E, D ∘ U_π⁻¹)`, built from
/// scratch.
pub fn permuted_error_operator(t: &JammerChannel, scheme: &CodingScheme, perm: &[usize]) -> Result<ErrorOperator> {
    let permuted = scheme.permuted(t.d_a(), t.d_b(), perm)?;
    build_error_operator(t, &permuted)
}

/// `U_π F U_π†`, the error operator a permuted scheme should have.
pub fn conjugated_error_operator(f: &ErrorOperator, perm: &[usize]) -> Result<ErrorOperator> {
    let m = subsystem::permute_subsystems(&f.f, f.d_s, f.n, perm)?;
    Ok(ErrorOperator { n: f.n, d_s: f.d_s, f: m })
}

/// Error operator of the uniform mixture over all `n!` permuted schemes,
/// built from the permuted encoders and decoders. Each term is checked
/// against the conjugated base operator.
pub fn symmetrize_scheme(scheme: &CodingScheme, t: &JammerChannel) -> Result<ErrorOperator> {
    let n = scheme.n();
    if n > MAX_SYMMETRIZE_N {
        return Err(Error::BlockLengthTooLarge(n));
    }
    let base = build_error_operator(t, scheme)?;
    let perms = subsystem::all_permutations(n);
    let s_n = base.f.nrows();
    let mut avg = Mat::zeros(s_n, s_n);
    for perm in &perms {
        let direct = permuted_error_operator(t, scheme, perm)?;
        let conj = conjugated_error_operator(&base, perm)?;
        let dev = linalg::max_abs_diff(&direct.f, &conj.f);
        if dev > CROSS_CHECK_TOL {
            return Err(Error::Numerical(alloc::format!(
                "permuted scheme deviates from the conjugated operator by {dev:e}"
            )));
        }
        avg += direct.f;
    }
    avg /= real(perms.len() as f64);
    ErrorOperator::new(n, t.d_s(), avg)
}

/// Outcome of [`permutation_covariance_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceCheck {
    pub passed: bool,
    pub trials: usize,
    pub max_deviation: f64,
    /// First failing trial: permutation, permuted-scheme error, base error.
    pub counterexample: Option<(Vec<usize>, f64, f64)>,
}

/// Largest block length for [`permutation_covariance_check`].
pub const MAX_COVARIANCE_N: usize = 4;

/// For random `π` and random `σ` (alternately product and entangled): the
/// permuted scheme's error against `σ` equals the base scheme's error
/// against `U_π† σ U_π`, both by direct contraction.
pub fn permutation_covariance_check(t: &JammerChannel, scheme: &CodingScheme, trials: usize, seed: u64) -> Result<CovarianceCheck> {
    let n = scheme.n();
    if n > MAX_COVARIANCE_N {
        return Err(Error::BlockLengthTooLarge(n));
    }
    let mut rng = seeded(seed);
    let s_n = pow(t.d_s(), n)?;
    let mut max_deviation = 0.0f64;
    let mut counterexample = None;
    for trial in 0..trials {
        let perm = crate::random::random_permutation(n, &mut rng);
        let sigma = if trial % 2 == 0 {
            random_density(t.d_s(), &mut rng).tensor_power(n)
        } else {
            random_density(s_n, &mut rng)
        };
        let lhs = coding_error(t, &scheme.permuted(t.d_a(), t.d_b(), &perm)?, &sigma)?;
        let inv = subsystem::inverse_permutation(&perm);
        let moved = DensityMatrix::from_hermitian_unchecked(subsystem::permute_subsystems(sigma.matrix(), t.d_s(), n, &inv)?);
        let rhs = coding_error(t, scheme, &moved)?;
        let dev = (lhs - rhs).abs();
        max_deviation = max_deviation.max(dev);
        if dev > CROSS_CHECK_TOL && counterexample.is_none() {
            counterexample = Some((perm, lhs, rhs));
        }
    }
    Ok(CovarianceCheck {
        passed: counterexample.is_none(),
        trials,
        max_deviation,
        counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::QuantumChannel;
    use crate::lab::scheme::{computational_scheme, dense_scheme, random_scheme, xbasis_scheme};
    use crate::models::{cx_jammer, jammer_ignoring, standard_channel, StandardChannel};
    use crate::random::random_jammer;

    #[test]
    fn jammer_ignoring_gives_scalar_operator() {
        let t0 = standard_channel(&StandardChannel::Depolarizing { d: 2, p: 0.3 }).unwrap();
        let t = jammer_ignoring(&t0, 2).unwrap();
        for n in 1..=2 {
            let f = build_error_operator(&t, &computational_scheme(n).unwrap()).unwrap();
            let e = linalg::eigh(f.matrix());
            assert!(e.max() - e.min() <= 1e-10);
            // each bit flips with probability p/2
            let p0 = 1.0 - (1.0f64 - 0.15).powi(n as i32);
            assert!((e.max() - p0).abs() < 1e-12);
        }
    }

    #[test]
    fn hand_contractions_single_use() {
        let t = cx_jammer();
        let f = build_error_operator(&t, &xbasis_scheme(1).unwrap()).unwrap();
        assert!(linalg::max_abs(f.matrix()) < 1e-12);
        let f = build_error_operator(&t, &computational_scheme(1).unwrap()).unwrap();
        assert!(linalg::max_abs_diff(f.matrix(), &linalg::basis_projector(2, 1)) < 1e-12);
    }

    #[test]
    fn computational_two_uses_fails_unless_all_zero() {
        let f = build_error_operator(&cx_jammer(), &computational_scheme(2).unwrap()).unwrap();
        let expected = linalg::identity(4) - linalg::basis_projector(4, 0);
        assert!(linalg::max_abs_diff(f.matrix(), &expected) < 1e-12);
    }

    #[test]
    fn dense_coding_on_noiseless_channel_is_perfect() {
        let t = jammer_ignoring(&QuantumChannel::identity(2), 2).unwrap();
        let f = build_error_operator(&t, &dense_scheme(1).unwrap()).unwrap();
        assert!(linalg::max_abs(f.matrix()) < 1e-12);
    }

    #[test]
    fn random_schemes_have_valid_spectra() {
        let mut rng = seeded(11);
        for _ in 0..5 {
            let t = random_jammer(2, 2, 2, 2, &mut rng);
            let s = random_scheme(&t, 2, 1, 2, &mut rng).unwrap();
            let f = build_error_operator(&t, &s).unwrap();
            let e = linalg::eigh(f.matrix());
            assert!(e.min() >= -1e-9 && e.max() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn worst_jammer_simple_cases() {
        let zero = ErrorOperator::new(1, 2, Mat::zeros(2, 2)).unwrap();
        assert_eq!(worst_case_jammer(&zero).0, 0.0);
        let one = ErrorOperator::new(1, 2, linalg::basis_projector(2, 1)).unwrap();
        let (v, s) = worst_case_jammer(&one);
        assert!((v - 1.0).abs() < 1e-14);
        assert!(linalg::max_abs_diff(s.matrix(), &linalg::basis_projector(2, 1)) < 1e-12);
    }

    #[test]
    fn symmetrize_trivial_cases() {
        let t = cx_jammer();
        let s = computational_scheme(1).unwrap();
        let f = build_error_operator(&t, &s).unwrap();
        let avg = symmetrize_scheme(&s, &t).unwrap();
        assert!(linalg::max_abs_diff(f.matrix(), avg.matrix()) < 1e-14);
        // already covariant
        let s = computational_scheme(2).unwrap();
        let f = build_error_operator(&t, &s).unwrap();
        let avg = symmetrize_scheme(&s, &t).unwrap();
        assert!(linalg::max_abs_diff(f.matrix(), avg.matrix()) < 1e-12);
    }

    #[test]
    fn operator_rejects_out_of_range_spectrum() {
        let bad = linalg::identity(2) * real(1.5);
        assert!(matches!(ErrorOperator::new(1, 2, bad), Err(Error::Numerical(_))));
        assert!(matches!(ErrorOperator::new(2, 2, Mat::zeros(2, 2)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn covariance_identity_permutation_is_exact() {
        let t = cx_jammer();
        let s = dense_scheme(2).unwrap();
        let sigma = random_density(4, &mut seeded(2));
        let a = coding_error(&t, &s.permuted(2, 2, &[0, 1]).unwrap(), &sigma).unwrap();
        let b = coding_error(&t, &s, &sigma).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn covariance_needs_the_inverse_on_three_cycles() {
        // the permuted scheme sees U_π† σ U_π; with U_π σ U_π† the identity
        // breaks as soon as π ≠ π⁻¹ and the scheme distinguishes positions
        let mut rng = seeded(5);
        let t = random_jammer(2, 2, 2, 2, &mut rng);
        let s = random_scheme(&t, 3, 1, 1, &mut rng).unwrap();
        let sigma = random_density(8, &mut rng);
        let perm = [1, 2, 0];
        let lhs = coding_error(&t, &s.permuted(2, 2, &perm).unwrap(), &sigma).unwrap();
        let inv = subsystem::inverse_permutation(&perm);
        let right = DensityMatrix::new(subsystem::permute_subsystems(sigma.matrix(), 2, 3, &inv).unwrap()).unwrap();
        let wrong = DensityMatrix::new(subsystem::permute_subsystems(sigma.matrix(), 2, 3, &perm).unwrap()).unwrap();
        assert!((lhs - coding_error(&t, &s, &right).unwrap()).abs() < 1e-10);
        assert!((lhs - coding_error(&t, &s, &wrong).unwrap()).abs() > 1e-6);
    }
}
