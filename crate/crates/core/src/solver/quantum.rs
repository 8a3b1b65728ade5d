use alloc::vec;
use alloc::vec::Vec;

use super::ascent::{maximize_min_restarts, AscentOutcome, Domain, Member};
use super::inner::{exchange, AffineFamily, ExchangeOutcome, Family};
use super::{trivial_report, Adversary, SolverConfig, SolverReport};
use crate::channel::{JammerChannel, QuantumChannel};
use crate::error::Result;
use crate::linalg::{self, Mat};
use crate::models::{slice_choi_blocks, ChannelSet};
use crate::state::DensityMatrix;

const EXTENDED_NOTE: &str = "temperature schedule extended below 1e-3";

fn degenerate(d_in: usize, d_out: usize) -> bool {
    d_in == 1 || d_out == 1
}

fn ascent_report(outcome: AscentOutcome, tol: f64, adversary: Adversary) -> SolverReport {
    let gap = outcome.gap();
    SolverReport {
        value: outcome.value,
        gap,
        iterations: outcome.iterations,
        converged: gap <= tol,
        optimizer: DensityMatrix::from_hermitian_unchecked(outcome.point),
        adversary,
        history: outcome.history,
        note: outcome.extended_schedule.then_some(EXTENDED_NOTE),
    }
}

/// Entanglement-assisted classical capacity `max_ρ I(A':B)` of one channel.
pub fn ea_capacity(t: &QuantumChannel, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    if degenerate(t.d_in(), t.d_out()) {
        return Ok(trivial_report(t.d_in(), Adversary::None));
    }
    let members = [Member::quantum(t.clone())];
    let outcome = maximize_min_restarts(Domain::Spectraplex(t.d_in()), &members, cfg.tol, cfg.max_iter, cfg.restarts, cfg.seed, None)?;
    Ok(ascent_report(outcome, cfg.tol, Adversary::None))
}

/// `max_ρ min_j I(A':B)_{T_j}` over a finite set.
pub fn compound_ea_capacity(set: &ChannelSet, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let labels = set.labels().to_vec();
    if degenerate(set.d_in(), set.d_out()) {
        let n = set.len();
        return Ok(trivial_report(
            set.d_in(),
            Adversary::Members {
                labels,
                weights: vec![1.0 / n as f64; n],
                minimizing: (0..n).collect(),
            },
        ));
    }
    let members: Vec<Member> = set.members().iter().cloned().map(Member::quantum).collect();
    let outcome = maximize_min_restarts(Domain::Spectraplex(set.d_in()), &members, cfg.tol, cfg.max_iter, cfg.restarts, cfg.seed, None)?;
    let minimizing = outcome
        .member_values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= outcome.value + cfg.tol)
        .map(|(j, _)| j)
        .collect();
    let weights = outcome.weights.clone();
    Ok(ascent_report(outcome, cfg.tol, Adversary::Members { labels, weights, minimizing }))
}

fn exchange_report(outcome: ExchangeOutcome, adversary: Adversary) -> SolverReport {
    let gap = (outcome.upper - outcome.value).max(outcome.value - outcome.lower).max(0.0);
    SolverReport {
        value: outcome.value,
        gap,
        iterations: outcome.iterations,
        converged: outcome.converged,
        optimizer: DensityMatrix::from_hermitian_unchecked(outcome.point),
        adversary,
        history: outcome.history,
        note: None,
    }
}

/// `max_ρ min_{T ∈ conv(set)} I(A':B)_T`.
pub fn avqc_ea_capacity(set: &ChannelSet, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let n = set.len();
    let labels = set.labels().to_vec();
    let vertices: Vec<Mat> = (0..n).map(|j| linalg::basis_projector(n, j)).collect();
    if degenerate(set.d_in(), set.d_out()) {
        return Ok(trivial_report(
            set.d_in(),
            Adversary::Hull {
                labels,
                weights: vec![1.0 / n as f64; n],
                active: vec![],
                active_weights: vec![],
            },
        ));
    }
    if n == 1 {
        let mut report = ea_capacity(&set.members()[0], cfg)?;
        report.adversary = Adversary::Hull {
            labels,
            weights: vec![1.0],
            active: vec![vec![1.0]],
            active_weights: vec![1.0],
        };
        return Ok(report);
    }
    let family = Family::Quantum(AffineFamily {
        domain: Domain::Simplex(n),
        d_in: set.d_in(),
        d_out: set.d_out(),
        blocks: set.members().iter().enumerate().map(|(j, t)| (j, j, t.choi().into_owned())).collect(),
    });
    let outcome = exchange(&family, vertices, cfg)?;
    let adversary = Adversary::Hull {
        labels,
        weights: clean_weights(&outcome.worst),
        active: outcome.active.iter().map(clean_weights).collect(),
        active_weights: outcome.active_weights.clone(),
    };
    Ok(exchange_report(outcome, adversary))
}

/// Diagonal of a regularized simplex point, with the regularization removed.
fn clean_weights(y: &Mat) -> Vec<f64> {
    let d = linalg::real_diagonal(y);
    let mut w: Vec<f64> = d.iter().map(|v| if *v < 1e-8 { 0.0 } else { *v }).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// `max_ρ min_σ I(A':B)` over the slices `T_σ` of a jammer channel.
pub fn fqavc_ea_capacity(t: &JammerChannel, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let d_s = t.d_s();
    let basis: Vec<Mat> = (0..d_s).map(|s| linalg::basis_projector(d_s, s)).collect();
    if degenerate(t.d_a(), t.d_b()) {
        return Ok(trivial_report(
            t.d_a(),
            Adversary::JammerStates {
                states: vec![],
                weights: vec![],
                worst: DensityMatrix::maximally_mixed(d_s),
                worst_is_mixed: d_s > 1,
            },
        ));
    }
    let blocks = slice_choi_blocks(t);
    let family = Family::Quantum(AffineFamily {
        domain: Domain::Spectraplex(d_s),
        d_in: t.d_a(),
        d_out: t.d_b(),
        blocks: blocks.into_iter().enumerate().map(|(k, b)| (k / d_s, k % d_s, b)).collect(),
    });
    let outcome = exchange(&family, basis, cfg)?;
    let spectrum = linalg::eigh(&outcome.worst);
    let worst_is_mixed = spectrum.dim() > 1 && spectrum.values[spectrum.dim() - 2] > 1e-6;
    let adversary = Adversary::JammerStates {
        states: outcome.active.iter().cloned().map(DensityMatrix::from_hermitian_unchecked).collect(),
        weights: outcome.active_weights.clone(),
        worst: DensityMatrix::from_hermitian_unchecked(outcome.worst.clone()),
        worst_is_mixed,
    };
    Ok(exchange_report(outcome, adversary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::shannon_entropy;
    use crate::models::{convex_mix, cx_jammer, jammer_ignoring, pauli_x, standard_channel, StandardChannel};
    use crate::state::PureState;

    fn depol(p: f64) -> QuantumChannel {
        standard_channel(&StandardChannel::Depolarizing { d: 2, p }).unwrap()
    }

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn identity_qubit() {
        let r = ea_capacity(&QuantumChannel::identity(2), &cfg()).unwrap();
        assert!((r.value - 2.0).abs() <= 1e-4 && r.converged);
        assert!(r.gap <= 1e-4);
    }

    #[test]
    fn depolarizing_closed_forms() {
        let r = ea_capacity(&depol(1.0), &cfg()).unwrap();
        assert!(r.value.abs() <= 1e-4 && r.gap <= 1e-4);
        let p = 0.5;
        let expected = 2.0 - shannon_entropy(&[1.0 - 3.0 * p / 4.0, p / 4.0, p / 4.0, p / 4.0]);
        let r = ea_capacity(&depol(p), &cfg()).unwrap();
        assert!((r.value - expected).abs() <= 1e-3, "{} vs {expected}", r.value);
        assert!(r.upper_bound() >= expected - 1e-9);
    }

    #[test]
    fn erasure() {
        let t = standard_channel(&StandardChannel::Erasure { d: 2, p: 0.3 }).unwrap();
        let r = ea_capacity(&t, &cfg()).unwrap();
        assert!((r.value - 1.4).abs() <= 1e-3);
        assert!(r.converged);
    }

    #[test]
    fn compound_examples() {
        let single = compound_ea_capacity(&ChannelSet::single(QuantumChannel::identity(2)), &cfg()).unwrap();
        assert!((single.value - 2.0).abs() <= 1e-4);

        let set = ChannelSet::new(vec![depol(0.3), depol(0.5)]).unwrap();
        let r = compound_ea_capacity(&set, &cfg()).unwrap();
        let reference = ea_capacity(&depol(0.5), &cfg()).unwrap();
        assert!((r.value - reference.value).abs() <= 1e-3);
        assert!(r.converged);
        let Adversary::Members { minimizing, .. } = &r.adversary else { panic!() };
        assert!(minimizing.contains(&1));

        let deph = standard_channel(&StandardChannel::Dephasing { d: 2, p: 1.0 }).unwrap();
        let set = ChannelSet::new(vec![QuantumChannel::identity(2), deph]).unwrap();
        let r = compound_ea_capacity(&set, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-3 && r.converged, "{r:?}");
    }

    #[test]
    fn avqc_pinching() {
        let x = QuantumChannel::unitary(pauli_x()).unwrap();
        let set = ChannelSet::new(vec![QuantumChannel::identity(2), x]).unwrap();
        let r = avqc_ea_capacity(&set, &cfg()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-3 && r.converged, "{r:?}");
        let Adversary::Hull { weights, .. } = &r.adversary else { panic!() };
        assert!((weights[0] - 0.5).abs() < 1e-3);
        // grid oracle over λ
        let grid = (0..=20)
            .map(|k| {
                let l = k as f64 / 20.0;
                ea_capacity(&convex_mix(&set, &[l, 1.0 - l]).unwrap(), &cfg()).unwrap().value
            })
            .fold(f64::INFINITY, f64::min);
        assert!((grid - r.value).abs() <= 1e-3);
    }

    #[test]
    fn avqc_depolarizing_hull() {
        let set = ChannelSet::new(vec![depol(0.2), depol(0.6)]).unwrap();
        let r = avqc_ea_capacity(&set, &cfg()).unwrap();
        let reference = ea_capacity(&depol(0.6), &cfg()).unwrap();
        assert!((r.value - reference.value).abs() <= 1e-3, "{} vs {}", r.value, reference.value);
        let compound = compound_ea_capacity(&set, &cfg()).unwrap();
        assert!(r.value <= compound.value + 1e-4);
    }

    #[test]
    fn fqavc_examples() {
        let t0 = depol(0.25);
        let r = fqavc_ea_capacity(&jammer_ignoring(&t0, 2).unwrap(), &cfg()).unwrap();
        let reference = ea_capacity(&t0, &cfg()).unwrap();
        assert!((r.value - reference.value).abs() <= 1e-4);

        let r = fqavc_ea_capacity(&cx_jammer(), &cfg()).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-3 && r.converged, "{r:?}");
        let Adversary::JammerStates { worst, worst_is_mixed, .. } = &r.adversary else { panic!() };
        assert!(*worst_is_mixed);
        assert!((worst.matrix()[(0, 0)].re - 0.5).abs() < 1e-3);
        // the optimal input stays maximally entangled-compatible: I(A':B) at Φ is 1
        let phi = PureState::maximally_entangled(2).density();
        let pinch = crate::models::slice(&cx_jammer(), &DensityMatrix::maximally_mixed(2)).unwrap();
        assert!((crate::entropy::mutual_information(&phi, &pinch).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fqavc_zero_slice() {
        let full = depol(1.0);
        let kraus: Vec<Mat> = full.kraus().to_vec();
        // σ = |0⟩⟨0| leaves the input alone, σ = |1⟩⟨1| fully depolarizes
        let t = crate::models::classically_controlled(&[QuantumChannel::identity(2), QuantumChannel::new(kraus).unwrap()]).unwrap();
        let r = fqavc_ea_capacity(&t, &cfg()).unwrap();
        assert!(r.value.abs() <= 1e-3, "{r:?}");
    }
}
