use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::error_operator::{build_error_operator, symmetrize_scheme, worst_case_jammer, ErrorOperator};
use super::scheme::{pow, CodingScheme};
use crate::channel::JammerChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, real, Mat, C64};
use crate::random::{ginibre, random_density, seeded, Rng};
use crate::state::DensityMatrix;
use crate::subsystem::{self, partial_trace, symmetric_dimension, symmetric_projector, DEFAULT_BUDGET};

/// Tolerance on permutation invariance of inputs.
pub const INVARIANCE_TOL: f64 = 1e-9;
/// Slack on the operator inequalities.
pub const BOUND_TOL: f64 = 1e-9;
/// Largest block length for exact symmetrization of states.
pub const MAX_SYMMETRIZE_STATE_N: usize = 6;

/// `τ = ∫ σ^{⊗n} dσ` for the Hilbert–Schmidt measure, built exactly as the
/// marginal of the normalized symmetric projector on `(C^d ⊗ C^d)^{⊗n}`.
pub fn definetti_state(d: usize, n: usize) -> Result<DensityMatrix> {
    definetti_state_with_budget(d, n, DEFAULT_BUDGET)
}

pub fn definetti_state_with_budget(d: usize, n: usize, budget: usize) -> Result<DensityMatrix> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidParameter {
            name: if d == 0 { "d" } else { "n" },
            value: 0.0,
        });
    }
    let pi = symmetric_projector(d * d, n, budget)?;
    let norm = real(1.0 / symmetric_dimension(d * d, n));
    let dims = vec![d; 2 * n];
    let keep: Vec<usize> = (0..n).map(|i| 2 * i).collect();
    let tau = partial_trace(&(pi * norm), &dims, &keep)?;
    Ok(DensityMatrix::from_hermitian_unchecked(tau))
}

/// Empirical mean of `σ^{⊗n}` over Hilbert–Schmidt random `σ`.
pub fn definetti_monte_carlo(d: usize, n: usize, samples: usize, rng: &mut Rng) -> Result<DensityMatrix> {
    if samples == 0 {
        return Err(Error::Empty("sample count"));
    }
    let dim = pow(d, n)?;
    let mut acc = Mat::zeros(dim, dim);
    for _ in 0..samples {
        let g = ginibre(d, d, rng);
        let s = &g * g.adjoint();
        let tr = linalg::trace(&s).re;
        let sigma = s / real(tr);
        let mut power = sigma.clone();
        for _ in 1..n {
            power = linalg::kron(&power, &sigma);
        }
        acc += power;
    }
    Ok(DensityMatrix::from_hermitian_unchecked(acc / real(samples as f64)))
}

/// `(1/n!) Σ_π U_π ρ U_π†`.
pub fn symmetrize_state(rho: &DensityMatrix, d: usize, n: usize) -> Result<DensityMatrix> {
    if n > MAX_SYMMETRIZE_STATE_N {
        return Err(Error::BlockLengthTooLarge(n));
    }
    let perms = subsystem::all_permutations(n);
    let dim = rho.dim();
    let mut acc = Mat::zeros(dim, dim);
    for perm in &perms {
        acc += subsystem::permute_subsystems(rho.matrix(), d, n, perm)?;
    }
    Ok(DensityMatrix::from_hermitian_unchecked(acc / real(perms.len() as f64)))
}

/// Largest `‖U_π ρ U_π† − ρ‖_max` over a generating set of permutations.
pub fn permutation_deviation(m: &Mat, d: usize, n: usize) -> Result<f64> {
    if n < 2 {
        return Ok(0.0);
    }
    let mut swap: Vec<usize> = (0..n).collect();
    swap.swap(0, 1);
    let cycle: Vec<usize> = (0..n).map(|k| (k + 1) % n).collect();
    let mut worst = 0.0f64;
    for g in [swap, cycle] {
        let moved = subsystem::permute_subsystems(m, d, n, &g)?;
        worst = worst.max(linalg::max_abs_diff(&moved, m));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeFinettiCheck {
    pub holds: bool,
    /// `λ_min((n+1)^{d²} τ − ρ)`.
    pub margin: f64,
    pub factor: f64,
}

/// Checks `ρ ⪯ (n+1)^{d²} τ` for a permutation-invariant `ρ` on `(C^d)^{⊗n}`.
pub fn definetti_bound_check(rho: &DensityMatrix, d: usize, n: usize) -> Result<DeFinettiCheck> {
    let dim = pow(d, n)?;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            axis: "state (d^n)",
            expected: dim,
            found: rho.dim(),
        });
    }
    let dev = permutation_deviation(rho.matrix(), d, n)?;
    if dev > INVARIANCE_TOL {
        return Err(Error::NotPermutationInvariant(dev));
    }
    let tau = definetti_state(d, n)?;
    let factor = ((n + 1) as f64).powi((d * d) as i32);
    let gap = tau.matrix() * real(factor) - rho.matrix();
    let margin = linalg::min_eigenvalue(&linalg::hermitize(&gap));
    Ok(DeFinettiCheck {
        holds: margin >= -BOUND_TOL,
        margin,
        factor,
    })
}

fn tensor_power(sigma: &Mat, n: usize) -> Mat {
    (1..n).fold(sigma.clone(), |acc, _| linalg::kron(&acc, sigma))
}

/// Value and gradient of `σ ↦ Tr[F σ^{⊗n}]`.
fn power_value_and_gradient(f: &Mat, sigma: &Mat, d: usize, n: usize) -> Result<(f64, Mat)> {
    let value = linalg::trace_product_re(f, &tensor_power(sigma, n));
    let dims = vec![d; n];
    let id = linalg::identity(d);
    let mut grad = Mat::zeros(d, d);
    for i in 0..n {
        let mut factor = linalg::identity(1);
        for j in 0..n {
            factor = linalg::kron(&factor, if i == j { &id } else { sigma });
        }
        grad += partial_trace(&(f * factor), &dims, &[i])?;
    }
    Ok((value, linalg::hermitize(&grad)))
}

fn bloch_state(x: f64, y: f64, z: f64) -> Mat {
    Mat::from_row_slice(
        2,
        2,
        &[
            C64::new((1.0 + z) / 2.0, 0.0),
            C64::new(x / 2.0, -y / 2.0),
            C64::new(x / 2.0, y / 2.0),
            C64::new((1.0 - z) / 2.0, 0.0),
        ],
    )
}

/// Starting points for the tensor-power search: a Bloch-ball grid of step
/// `0.1` for qubits, otherwise seeded random states plus basis states.
fn starting_points(d: usize) -> Vec<Mat> {
    let mut out = Vec::new();
    if d == 2 {
        let steps = 20;
        for i in 0..=steps {
            for j in 0..=steps {
                for k in 0..=steps {
                    let r = |t: usize| -1.0 + 2.0 * t as f64 / steps as f64;
                    let (x, y, z) = (r(i), r(j), r(k));
                    if x * x + y * y + z * z <= 1.0 + 1e-12 {
                        out.push(bloch_state(x, y, z));
                    }
                }
            }
        }
    } else {
        let mut rng = seeded(d as u64);
        out.extend((0..d).map(|i| linalg::basis_projector(d, i)));
        out.push(linalg::identity(d) / real(d as f64));
        out.extend((0..400).map(|_| random_density(d, &mut rng).into_matrix()));
    }
    out
}

/// Projected gradient ascent on `Tr[F σ^{⊗n}]` from `start`.
fn polish(f: &Mat, start: Mat, d: usize, n: usize) -> Result<(f64, Mat)> {
    let domain = crate::solver::Domain::Spectraplex(d);
    let (mut value, mut grad) = power_value_and_gradient(f, &start, d, n)?;
    let mut sigma = start;
    let mut step = 1.0;
    for _ in 0..500 {
        let mut improved = false;
        while step > 1e-12 {
            let cand = domain.project(&(&sigma + &grad * real(step)));
            let (v, g) = power_value_and_gradient(f, &cand, d, n)?;
            if v > value + 1e-15 {
                (value, grad, sigma) = (v, g, cand);
                step *= 2.0;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok((value, sigma))
}

/// `sup_σ Tr[F σ^{⊗n}]` over single-use jammer states: grid or random
/// starts, then the best few are polished by projected gradient ascent.
pub fn tensor_power_sup(f: &ErrorOperator) -> Result<(f64, DensityMatrix)> {
    let (d, n) = (f.d_s(), f.n());
    let mut scored: Vec<(f64, Mat)> = starting_points(d)
        .into_iter()
        .map(|s| (linalg::trace_product_re(f.matrix(), &tensor_power(&s, n)), s))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored[0].clone();
    for (_, start) in scored.into_iter().take(5) {
        let (v, s) = polish(f.matrix(), start, d, n)?;
        if v > best.0 {
            best = (v, s);
        }
    }
    Ok((best.0, DensityMatrix::from_hermitian_unchecked(best.1)))
}

/// Every quantity in the chain from a compound code to a random code for
/// the jammer channel, at one block length.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem3Report {
    pub n: usize,
    pub d_s: usize,
    /// `(n+1)^{d_S²}`.
    pub factor: f64,
    /// `binom(n + d_S² − 1, n)`, the dimension of the symmetric subspace of
    /// the purified space. Reported, not asserted.
    pub symmetric_factor: f64,
    /// `λ_max(F_avg)`: worst entangled jammer against the randomized code.
    pub lhs: f64,
    /// `Tr[F τ]`.
    pub tau_error: f64,
    /// `factor · Tr[F τ]`.
    pub rhs: f64,
    /// `sup_σ Tr[F σ^{⊗n}]`.
    pub epsilon_comp: f64,
    /// `factor · epsilon_comp`.
    pub epsilon_prime: f64,
    /// Worst entangled jammer for the unrandomized code, with its error.
    pub deterministic_worst: f64,
    pub worst_jammer: DensityMatrix,
    pub worst_product_state: DensityMatrix,
    /// `lhs ≤ rhs`.
    pub bound_holds: bool,
    /// `Tr[F τ] ≤ epsilon_comp`.
    pub mixture_holds: bool,
}

pub fn theorem3_bound_check(t: &JammerChannel, scheme: &CodingScheme) -> Result<Theorem3Report> {
    let n = scheme.n();
    let d_s = t.d_s();
    let f = build_error_operator(t, scheme)?;
    let f_avg = symmetrize_scheme(scheme, t)?;
    let tau = definetti_state(d_s, n)?;
    let (lhs, worst_jammer) = worst_case_jammer(&f_avg);
    let (deterministic_worst, _) = worst_case_jammer(&f);
    let tau_error = f.error(&tau);
    let factor = ((n + 1) as f64).powi((d_s * d_s) as i32);
    let rhs = factor * tau_error;
    let (epsilon_comp, worst_product_state) = tensor_power_sup(&f)?;
    Ok(Theorem3Report {
        n,
        d_s,
        factor,
        symmetric_factor: symmetric_dimension(d_s * d_s, n),
        lhs,
        tau_error,
        rhs,
        epsilon_comp,
        epsilon_prime: factor * epsilon_comp,
        deterministic_worst,
        worst_jammer,
        worst_product_state,
        bound_holds: lhs <= rhs + BOUND_TOL,
        mixture_holds: tau_error <= epsilon_comp + BOUND_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::scheme::{computational_scheme, xbasis_scheme};
    use crate::models::{cx_jammer, jammer_ignoring, standard_channel, StandardChannel};
    use crate::random::random_pure;

    #[test]
    fn single_copy_is_maximally_mixed() {
        for d in 1..=4 {
            let tau = definetti_state(d, 1).unwrap();
            assert!(linalg::max_abs_diff(tau.matrix(), &(linalg::identity(d) / real(d as f64))) < 1e-14);
        }
        let tau = definetti_state(1, 3).unwrap();
        assert!((tau.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_qubit_state_closed_form() {
        // Hilbert–Schmidt second moment at d = 2
        let tau = definetti_state(2, 2).unwrap();
        let swap = subsystem::permutation_matrix(&[2, 2], &[1, 0]).unwrap();
        let expected = linalg::identity(4) * real(0.2) + swap * real(0.1);
        assert!(linalg::max_abs_diff(tau.matrix(), &expected) < 1e-14);
    }

    #[test]
    fn invariance_and_trace() {
        for n in 1..=3 {
            let tau = definetti_state(2, n).unwrap();
            assert!((linalg::trace(tau.matrix()).re - 1.0).abs() < 1e-12);
            for perm in subsystem::all_permutations(n) {
                let moved = subsystem::permute_subsystems(tau.matrix(), 2, n, &perm).unwrap();
                assert!(linalg::max_abs_diff(&moved, tau.matrix()) <= 1e-12);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(definetti_state_with_budget(2, 3, 32), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn bound_examples() {
        let tau = definetti_state(2, 3).unwrap();
        let r = definetti_bound_check(&tau, 2, 3).unwrap();
        assert!(r.holds && r.margin >= 0.0);

        let mut rng = seeded(8);
        for _ in 0..50 {
            let s = random_density(2, &mut rng).tensor_power(3);
            assert!(definetti_bound_check(&s, 2, 3).unwrap().holds);
        }
        let mut ghz = crate::linalg::CVec::zeros(8);
        ghz[0] = real(1.0 / 2f64.sqrt());
        ghz[7] = real(1.0 / 2f64.sqrt());
        let ghz = crate::state::PureState::new(ghz).unwrap().density();
        assert!(definetti_bound_check(&ghz, 2, 3).unwrap().holds);
        let sym = symmetrize_state(&random_pure(8, &mut rng).density(), 2, 3).unwrap();
        assert!(definetti_bound_check(&sym, 2, 3).unwrap().holds);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let rho = DensityMatrix::basis(4, 1);
        assert!(matches!(definetti_bound_check(&rho, 2, 2), Err(Error::NotPermutationInvariant(_))));
    }

    #[test]
    fn power_gradient_matches_finite_differences() {
        let mut rng = seeded(4);
        let f = crate::random::random_hermitian(8, &mut rng);
        let s = random_density(2, &mut rng).into_matrix();
        let dir = crate::random::random_hermitian(2, &mut rng);
        let (_, g) = power_value_and_gradient(&f, &s, 2, 3).unwrap();
        let h = 1e-6;
        let plus = linalg::trace_product_re(&f, &tensor_power(&(&s + &dir * real(h)), 3));
        let minus = linalg::trace_product_re(&f, &tensor_power(&(&s - &dir * real(h)), 3));
        let fd = (plus - minus) / (2.0 * h);
        assert!((fd - linalg::trace_product_re(&g, &dir)).abs() < 1e-7);
    }

    #[test]
    fn theorem3_jammer_ignoring() {
        let t0 = standard_channel(&StandardChannel::Depolarizing { d: 2, p: 0.2 }).unwrap();
        let t = jammer_ignoring(&t0, 2).unwrap();
        let r = theorem3_bound_check(&t, &computational_scheme(2).unwrap()).unwrap();
        let p0 = 1.0 - 0.9f64.powi(2);
        assert!((r.lhs - p0).abs() < 1e-12 && (r.tau_error - p0).abs() < 1e-12);
        assert!((r.rhs - 81.0 * p0).abs() < 1e-10);
        assert!(r.bound_holds && r.mixture_holds);
    }

    #[test]
    fn theorem3_cx_examples() {
        let t = cx_jammer();
        let r = theorem3_bound_check(&t, &computational_scheme(2).unwrap()).unwrap();
        assert!((r.tau_error - 0.7).abs() < 1e-12);
        assert!((r.lhs - 1.0).abs() < 1e-12 && (r.epsilon_comp - 1.0).abs() < 1e-9);
        assert!(r.bound_holds && r.mixture_holds);
        let r = theorem3_bound_check(&t, &xbasis_scheme(2).unwrap()).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-10 && r.epsilon_comp.abs() < 1e-12);
    }
}
