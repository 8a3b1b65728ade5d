//! Von Neumann entropy, quantum mutual information of a channel and its
//! gradient, and classical mutual information. Everything is in bits.

#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{apply_choi, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, real, Eigh, Mat};
use crate::models::StochasticMatrix;
use crate::state::{self, DensityMatrix};
use crate::subsystem::{apply_on_block, partial_trace};

/// A quantity measured in bits.
pub type BitsValue = f64;

/// Eigenvalues in `[-NEGATIVE_CLAMP, 0)` count as zero in entropies.
pub const NEGATIVE_CLAMP: f64 = 1e-10;
/// Weight of the maximally mixed state mixed into inputs before logarithms.
pub const REGULARIZATION: f64 = 1e-9;
/// Eigenvalues at or below this are outside the support for matrix logs.
pub const SUPPORT_CUTOFF: f64 = 1e-14;

fn xlog2x(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy of a spectrum, clamping round-off negatives.
pub fn entropy_of_spectrum(values: &[f64]) -> Result<BitsValue> {
    let mut s = 0.0;
    for &v in values {
        if v < -NEGATIVE_CLAMP {
            return Err(Error::NotPositive(v));
        }
        s -= xlog2x(v);
    }
    let cap = (values.len() as f64).log2();
    Ok(s.clamp(0.0, cap.max(0.0)))
}

/// Entropy of an (unvalidated) positive semidefinite matrix.
pub fn entropy_of_matrix(m: &Mat) -> Result<BitsValue> {
    entropy_of_spectrum(&linalg::eigh(m).values)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> BitsValue {
    entropy_of_spectrum(&rho.eigenvalues()).expect("density matrices are positive")
}

/// `H(p)` of a probability vector.
pub fn shannon_entropy(p: &[f64]) -> BitsValue {
    -p.iter().map(|&x| xlog2x(x)).sum::<f64>()
}

/// `I(A':B)` of `(id ⊗ T) rho` for a bipartite input on `A' ⊗ A`, where the
/// dimension of `A'` is `rho.dim() / T.d_in()`.
pub fn mutual_information(rho: &DensityMatrix, t: &QuantumChannel) -> Result<BitsValue> {
    let d = rho.dim();
    if d % t.d_in() != 0 {
        return Err(Error::DimensionMismatch {
            axis: "bipartite input A'*A",
            expected: t.d_in(),
            found: d,
        });
    }
    let d_ref = d / t.d_in();
    let (omega, _) = apply_on_block(rho.matrix(), &[d_ref, t.d_in()], 1, 1, t.kraus())?;
    let dims = [d_ref, t.d_out()];
    let s_ref = entropy_of_matrix(&partial_trace(&omega, &dims, &[0])?)?;
    let s_out = entropy_of_matrix(&partial_trace(&omega, &dims, &[1])?)?;
    let s_joint = entropy_of_matrix(&omega)?;
    Ok(s_ref + s_out - s_joint)
}

fn check_input(rho: &Mat, t: &QuantumChannel) -> Result<()> {
    if rho.nrows() != t.d_in() {
        return Err(Error::DimensionMismatch {
            axis: "channel input",
            expected: t.d_in(),
            found: rho.nrows(),
        });
    }
    Ok(())
}

/// `S(ρ) + S(T(ρ)) - S(T_c(ρ))`, the mutual information on the purification
/// of `ρ`.
pub fn mi_of_input(rho: &DensityMatrix, t: &QuantumChannel) -> Result<BitsValue> {
    let tc = t.complementary();
    mi_with_complement(rho.matrix(), t, &tc)
}

/// As [`mi_of_input`] with a precomputed complementary channel.
pub fn mi_with_complement(rho: &Mat, t: &QuantumChannel, tc: &QuantumChannel) -> Result<BitsValue> {
    check_input(rho, t)?;
    let s_in = entropy_of_matrix(rho)?;
    let s_out = entropy_of_matrix(&t.apply_matrix(rho))?;
    let s_env = entropy_of_matrix(&tc.apply_matrix(rho))?;
    Ok(s_in + s_out - s_env)
}

/// `(1-ε) ρ + ε I/d`.
pub fn regularize(rho: &Mat) -> Mat {
    let d = rho.nrows();
    rho * real(1.0 - REGULARIZATION) + linalg::identity(d) * real(REGULARIZATION / d as f64)
}

fn neg_log2(e: &Eigh) -> Mat {
    -linalg::log2_on_support(e, SUPPORT_CUTOFF)
}

/// Value and gradient of `ρ ↦ mi_of_input(ρ, T)` at the regularized input.
///
/// `G = -log ρ + T†(-log T(ρ)) - T_c†(-log T_c(ρ))` with logarithms on the
/// support. `Tr[G ρ]` equals the returned value, so `λ_max(G) - value` bounds
/// the suboptimality of `ρ` for this concave objective.
pub fn mi_value_and_gradient(rho: &Mat, t: &QuantumChannel, tc: &QuantumChannel) -> Result<(BitsValue, Mat)> {
    check_input(rho, t)?;
    mi_value_and_gradient_at(&regularize(rho), t, tc)
}

/// As [`mi_value_and_gradient`] but evaluated at `r` itself, which the
/// caller guarantees to be full rank.
pub fn mi_value_and_gradient_at(r: &Mat, t: &QuantumChannel, tc: &QuantumChannel) -> Result<(BitsValue, Mat)> {
    check_input(r, t)?;
    let r = r.clone();
    let e_in = linalg::eigh(&r);
    let e_out = linalg::eigh(&t.apply_matrix(&r));
    let e_env = linalg::eigh(&tc.apply_matrix(&r));
    let value = entropy_of_spectrum(&e_in.values)? + entropy_of_spectrum(&e_out.values)?
        - entropy_of_spectrum(&e_env.values)?;
    let g = neg_log2(&e_in) + t.apply_adjoint(&neg_log2(&e_out)) - tc.apply_adjoint(&neg_log2(&e_env));
    let herm = linalg::hermitian_deviation(&g);
    assert!(herm < 1e-6 * (1.0 + linalg::max_abs(&g)), "gradient lost hermiticity: {herm:e}");
    Ok((value, linalg::hermitize(&g)))
}

pub fn mi_gradient(rho: &DensityMatrix, t: &QuantumChannel) -> Result<Mat> {
    let tc = t.complementary();
    Ok(mi_value_and_gradient(rho.matrix(), t, &tc)?.1)
}

/// Mutual information of a channel given only through its Choi matrix:
/// `S(ρ) + S(T(ρ)) - S(ω)` with `ω = (√ρᵀ ⊗ I) J (√ρᵀ ⊗ I)†` the joint
/// reference/output state.
pub fn mi_from_choi(rho: &Mat, choi: &Mat, d_in: usize, d_out: usize) -> Result<BitsValue> {
    let out = apply_choi(choi, d_in, d_out, rho);
    let omega = choi_joint_state(rho, choi, d_out);
    Ok(entropy_of_matrix(rho)? + entropy_of_matrix(&out)? - entropy_of_matrix(&omega)?)
}

/// `(X ⊗ I) J (X ⊗ I)†` with `X = √ρᵀ`.
pub fn choi_joint_state(rho: &Mat, choi: &Mat, d_out: usize) -> Mat {
    let x = linalg::psd_sqrt(&rho.transpose());
    let xi = linalg::kron(&x, &linalg::identity(d_out));
    &xi * choi * xi.adjoint()
}

/// `I(p; W) = H(Wp) - Σ_x p_x H(W(·|x))`.
pub fn classical_mutual_information(p: &[f64], w: &StochasticMatrix) -> Result<BitsValue> {
    state::check_probability(p, "input distribution", 1e-12)?;
    if p.len() != w.inputs() {
        return Err(Error::DimensionMismatch {
            axis: "input alphabet",
            expected: w.inputs(),
            found: p.len(),
        });
    }
    let q = w.output_distribution(p);
    let mut cond = 0.0;
    for (x, &px) in p.iter().enumerate() {
        if px > 0.0 {
            cond += px * shannon_entropy(&w.column(x));
        }
    }
    Ok((shannon_entropy(&q) - cond).max(0.0))
}

/// `D(a || b)` in bits; infinite when `a` is not dominated by `b`.
pub fn relative_entropy(a: &[f64], b: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        if x > 0.0 {
            if y <= 0.0 {
                return f64::INFINITY;
            }
            d += x * (x / y).log2();
        }
    }
    d
}

/// Binary entropy `h₂(p)`.
pub fn binary_entropy(p: f64) -> BitsValue {
    shannon_entropy(&[p, 1.0 - p])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{self, convex_mix, StandardChannel};
    use crate::random::{random_channel, random_density, random_traceless_hermitian, random_unitary, seeded};
    use crate::state::{purify, PureState};

    #[test]
    fn entropy_examples() {
        let mut rng = seeded(1);
        let psi = crate::random::random_pure(3, &mut rng);
        assert!(von_neumann_entropy(&psi.density()).abs() < 1e-12);
        assert!((von_neumann_entropy(&DensityMatrix::maximally_mixed(4)) - 2.0).abs() < 1e-14);
        // -Σ λ log2 λ evaluated directly on the listed spectrum
        let oracle = -(0.625f64 * 0.625f64.log2() + 3.0 * 0.125 * 0.125f64.log2());
        let rho = DensityMatrix::diagonal(&[0.625, 0.125, 0.125, 0.125]).unwrap();
        assert!((von_neumann_entropy(&rho) - oracle).abs() < 1e-12);
        assert!((oracle - 1.5488).abs() < 1e-4);
    }

    #[test]
    fn entropy_clamp_and_rejection() {
        assert_eq!(entropy_of_spectrum(&[1.0, -5e-11]).unwrap(), 0.0);
        assert!(matches!(entropy_of_spectrum(&[1.1, -0.1]), Err(Error::NotPositive(_))));
    }

    #[test]
    fn mutual_information_examples() {
        let phi = PureState::maximally_entangled(2).density();
        let id = QuantumChannel::identity(2);
        assert!((mutual_information(&phi, &id).unwrap() - 2.0).abs() < 1e-12);

        let mut rng = seeded(2);
        let prod = random_density(2, &mut rng).tensor(&random_density(3, &mut rng));
        let t = random_channel(3, 2, 2, &mut rng);
        assert!(mutual_information(&prod, &t).unwrap().abs() < 1e-10);

        // even-parity classical mixture: S(A') = S(B) = S(A'B) = 1
        let deph = models::standard_channel(&StandardChannel::Dephasing { d: 2, p: 1.0 }).unwrap();
        assert!((mutual_information(&phi, &deph).unwrap() - 1.0).abs() < 1e-12);

        let bad = DensityMatrix::maximally_mixed(5);
        assert!(mutual_information(&bad, &id).is_err());
    }

    #[test]
    fn mi_of_input_examples() {
        let id = QuantumChannel::identity(2);
        let half = DensityMatrix::maximally_mixed(2);
        assert!((mi_of_input(&half, &id).unwrap() - 2.0).abs() < 1e-12);

        let mut rng = seeded(3);
        let t = random_channel(3, 3, 2, &mut rng);
        let pure = crate::random::random_pure(3, &mut rng).density();
        assert!(mi_of_input(&pure, &t).unwrap().abs() < 1e-9);

        let p = 0.5;
        let depol = models::standard_channel(&StandardChannel::Depolarizing { d: 2, p }).unwrap();
        let bell = [1.0 - 3.0 * p / 4.0, p / 4.0, p / 4.0, p / 4.0];
        let oracle = 2.0 - shannon_entropy(&bell);
        assert!((mi_of_input(&half, &depol).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.4512).abs() < 1e-4);
    }

    #[test]
    fn purified_form_consistency() {
        let mut rng = seeded(4);
        for _ in 0..20 {
            let t = random_channel(2, 3, 3, &mut rng);
            let rho = random_density(2, &mut rng);
            let direct = mutual_information(&purify(&rho).density(), &t).unwrap();
            let via_complement = mi_of_input(&rho, &t).unwrap();
            let via_choi = mi_from_choi(rho.matrix(), &t.choi(), 2, 3).unwrap();
            assert!((direct - via_complement).abs() < 1e-9);
            assert!((direct - via_choi).abs() < 1e-9);
        }
    }

    fn fd_check(seed: u64, d_in: usize, d_out: usize, rank: usize) {
        let mut rng = seeded(seed);
        let t = random_channel(d_in, d_out, rank, &mut rng);
        let tc = t.complementary();
        let rho = random_density(d_in, &mut rng);
        let delta = random_traceless_hermitian(d_in, &mut rng);
        let eps = 1e-5;
        let f = |m: &Mat| mi_with_complement(m, &t, &tc).unwrap();
        let plus = rho.matrix() + &delta * real(eps);
        let minus = rho.matrix() - &delta * real(eps);
        let fd = (f(&plus) - f(&minus)) / (2.0 * eps);
        let g = mi_gradient(&rho, &t).unwrap();
        let an = linalg::trace_product_re(&g, &delta);
        assert!((fd - an).abs() <= 1e-5 * an.abs().max(1.0), "fd={fd} an={an}");
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for seed in 0..20 {
            let (d_in, d_out) = (2 + seed as usize % 3, 2 + seed as usize % 2);
            let rank = (1 + seed as usize % 4).max(d_in.div_ceil(d_out));
            fd_check(100 + seed, d_in, d_out, rank);
        }
    }

    #[test]
    fn gradient_identity_trace_equals_value() {
        let mut rng = seeded(5);
        let t = random_channel(3, 2, 3, &mut rng);
        let tc = t.complementary();
        let rho = random_density(3, &mut rng);
        let (v, g) = mi_value_and_gradient(rho.matrix(), &t, &tc).unwrap();
        assert!((linalg::trace_product_re(&g, &regularize(rho.matrix())) - v).abs() < 1e-10);
    }

    #[test]
    fn identity_channel_stationary_at_maximally_mixed() {
        let id = QuantumChannel::identity(3);
        let g = mi_gradient(&DensityMatrix::maximally_mixed(3), &id).unwrap();
        let e = linalg::eigh(&g);
        assert!(e.max() - e.min() < 1e-8);
    }

    #[test]
    fn gradient_concavity_bound() {
        let mut rng = seeded(6);
        for _ in 0..10 {
            let t = random_channel(3, 3, 2, &mut rng);
            let tc = t.complementary();
            let a = random_density(3, &mut rng);
            let b = random_density(3, &mut rng);
            let (fa, g) = mi_value_and_gradient(a.matrix(), &t, &tc).unwrap();
            let fb = mi_with_complement(b.matrix(), &t, &tc).unwrap();
            let lin = linalg::trace_product_re(&g, &(b.matrix() - a.matrix()));
            assert!(fb <= fa + lin + 1e-7);
        }
    }

    #[test]
    fn concavity_in_input_and_convexity_in_channel() {
        let mut rng = seeded(7);
        for _ in 0..20 {
            let t1 = random_channel(2, 2, 2, &mut rng);
            let t2 = random_channel(2, 2, 2, &mut rng);
            let a = random_density(2, &mut rng);
            let b = random_density(2, &mut rng);
            let mid = a.mix(&b, 0.5).unwrap();
            let fa = mi_of_input(&a, &t1).unwrap();
            let fb = mi_of_input(&b, &t1).unwrap();
            assert!(mi_of_input(&mid, &t1).unwrap() >= 0.5 * (fa + fb) - 1e-9);

            let set = models::ChannelSet::new(alloc::vec![t1.clone(), t2.clone()]).unwrap();
            let lam = 0.3;
            let mix = convex_mix(&set, &[lam, 1.0 - lam]).unwrap();
            let lhs = mi_of_input(&a, &mix).unwrap();
            let rhs = lam * mi_of_input(&a, &t1).unwrap() + (1.0 - lam) * mi_of_input(&a, &t2).unwrap();
            assert!(lhs <= rhs + 1e-9);
        }
    }

    #[test]
    fn unitary_covariance() {
        let mut rng = seeded(8);
        let t = random_channel(3, 2, 2, &mut rng);
        let u = random_unitary(3, &mut rng);
        let rho = random_density(3, &mut rng);
        let rotated = DensityMatrix::new(&u * rho.matrix() * u.adjoint()).unwrap();
        let undo = QuantumChannel::unitary(u.adjoint()).unwrap().then(&t).unwrap();
        let a = mi_of_input(&rotated, &undo).unwrap();
        let b = mi_of_input(&rho, &t).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn mutual_information_bounds() {
        let mut rng = seeded(9);
        for _ in 0..10 {
            let t = random_channel(2, 3, 2, &mut rng);
            let rho = random_density(4, &mut rng);
            let v = mutual_information(&rho, &t).unwrap();
            assert!(v >= -1e-9 && v <= 2.0 + 1e-9);
        }
    }

    #[test]
    fn classical_examples() {
        let noiseless = StochasticMatrix::new(2, 2, alloc::vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!((classical_mutual_information(&[0.5, 0.5], &noiseless).unwrap() - 1.0).abs() < 1e-15);
        let constant = StochasticMatrix::new(2, 2, alloc::vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        assert!(classical_mutual_information(&[0.3, 0.7], &constant).unwrap().abs() < 1e-15);
        let adder = models::adder_avc().mix_states(&[0.5, 0.5]).unwrap();
        let oracle = shannon_entropy(&[0.25, 0.5, 0.25]) - 1.0;
        assert!((classical_mutual_information(&[0.5, 0.5], &adder).unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 0.5).abs() < 1e-15);
        assert!(classical_mutual_information(&[0.5, 0.6], &noiseless).is_err());
    }
}
