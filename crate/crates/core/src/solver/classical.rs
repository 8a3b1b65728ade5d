use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::inner::{exchange, Family};
use super::{trivial_report, Adversary, SolverConfig, SolverReport};
use crate::entropy::relative_entropy;
use crate::error::{Error, Result};
use crate::linalg;
use crate::models::StochasticMatrix;
use crate::state::DensityMatrix;

const SINGLE_LETTER: &str = "single-letter lower bound";

/// Shannon capacity by Blahut–Arimoto, stopped once `max_x D(W_x‖q) − I` is
/// at most `tol`.
pub fn classical_ba_capacity(w: &StochasticMatrix, cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let nx = w.inputs();
    if nx == 1 || w.outputs() == 1 {
        return Ok(trivial_report(nx, Adversary::None));
    }
    let columns: Vec<Vec<f64>> = (0..nx).map(|x| w.column(x)).collect();
    let mut p = vec![1.0 / nx as f64; nx];
    let mut history = Vec::new();
    let mut best = (f64::NEG_INFINITY, f64::INFINITY, p.clone());
    let mut iterations = 0;
    loop {
        let q = w.output_distribution(&p);
        let d: Vec<f64> = columns.iter().map(|c| relative_entropy(c, &q)).collect();
        let value: f64 = p.iter().zip(&d).map(|(px, dx)| px * dx).sum();
        let upper = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if value > best.0 {
            best.0 = value;
            best.2 = p.clone();
        }
        best.1 = best.1.min(upper);
        history.push(best.0);
        if best.1 - best.0 <= cfg.tol || iterations >= cfg.max_iter {
            break;
        }
        iterations += 1;
        // shift by the maximum for a stable exponent
        let scaled: Vec<f64> = p.iter().zip(&d).map(|(px, dx)| px * (dx - upper).exp2()).collect();
        let z: f64 = scaled.iter().sum();
        p = scaled.iter().map(|v| v / z).collect();
    }
    let gap = (best.1 - best.0).max(0.0);
    Ok(SolverReport {
        value: best.0,
        gap,
        iterations,
        converged: gap <= cfg.tol,
        optimizer: DensityMatrix::from_hermitian_unchecked(linalg::diag(&best.2)),
        adversary: Adversary::None,
        history,
        note: None,
    })
}

/// `max_p min_{W ∈ conv(kernels)} I(p; W)`.
pub fn classical_compound_capacity(kernels: &[StochasticMatrix], cfg: &SolverConfig) -> Result<SolverReport> {
    cfg.validate()?;
    let first = kernels.first().ok_or(Error::Empty("kernel list"))?;
    for k in kernels {
        if k.inputs() != first.inputs() {
            return Err(Error::DimensionMismatch {
                axis: "kernel inputs",
                expected: first.inputs(),
                found: k.inputs(),
            });
        }
        if k.outputs() != first.outputs() {
            return Err(Error::DimensionMismatch {
                axis: "kernel outputs",
                expected: first.outputs(),
                found: k.outputs(),
            });
        }
    }
    let n = kernels.len();
    let labels = (0..n).map(|j| alloc::format!("W{j}")).collect();
    let mut report = if n == 1 {
        let mut r = classical_ba_capacity(first, cfg)?;
        r.adversary = Adversary::Hull {
            labels,
            weights: vec![1.0],
            active: vec![vec![1.0]],
            active_weights: vec![1.0],
        };
        r
    } else if first.inputs() == 1 || first.outputs() == 1 {
        trivial_report(
            first.inputs(),
            Adversary::Hull {
                labels,
                weights: vec![1.0 / n as f64; n],
                active: vec![],
                active_weights: vec![],
            },
        )
    } else {
        let vertices = (0..n).map(|j| linalg::basis_projector(n, j)).collect();
        let outcome = exchange(&Family::Classical(kernels.to_vec()), vertices, cfg)?;
        let gap = (outcome.upper - outcome.value).max(outcome.value - outcome.lower).max(0.0);
        let weights = |y: &linalg::Mat| {
            let d = linalg::real_diagonal(y);
            let mut w: Vec<f64> = d.iter().map(|v| if *v < 1e-8 { 0.0 } else { *v }).collect();
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            w
        };
        SolverReport {
            value: outcome.value,
            gap,
            iterations: outcome.iterations,
            converged: outcome.converged,
            optimizer: DensityMatrix::from_hermitian_unchecked(outcome.point.clone()),
            adversary: Adversary::Hull {
                labels,
                weights: weights(&outcome.worst),
                active: outcome.active.iter().map(weights).collect(),
                active_weights: outcome.active_weights,
            },
            history: outcome.history,
            note: None,
        }
    };
    report.note = Some(SINGLE_LETTER);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::binary_entropy;
    use crate::models::adder_avc;

    #[test]
    fn ba_examples() {
        let cfg = SolverConfig::with_tol(1e-7);
        let r = classical_ba_capacity(&StochasticMatrix::noiseless(2), &cfg).unwrap();
        assert!((r.value - 1.0).abs() <= 1e-6);
        let constant = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let r = classical_ba_capacity(&constant, &cfg).unwrap();
        assert!(r.value.abs() <= 1e-12 && r.converged);
        let r = classical_ba_capacity(&StochasticMatrix::bsc(0.11).unwrap(), &cfg).unwrap();
        assert!((r.value - (1.0 - binary_entropy(0.11))).abs() <= 1e-5);
        assert!(r.history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn asymmetric_channel_gap_is_certified() {
        // Z channel: closed form log2(1 + (1-f) f^{f/(1-f)})
        let f: f64 = 0.3;
        let z = StochasticMatrix::from_rows(&[vec![1.0, f], vec![0.0, 1.0 - f]]).unwrap();
        let r = classical_ba_capacity(&z, &SolverConfig::with_tol(1e-8)).unwrap();
        let exact = (1.0 + (1.0 - f) * f.powf(f / (1.0 - f))).log2();
        assert!((r.value - exact).abs() <= r.gap + 1e-12);
        assert!(r.upper_bound() >= exact - 1e-12);
    }

    #[test]
    fn compound_examples() {
        let cfg = SolverConfig::default();
        let bsc = StochasticMatrix::bsc(0.11).unwrap();
        let r = classical_compound_capacity(&[bsc.clone()], &cfg).unwrap();
        assert!((r.value - (1.0 - binary_entropy(0.11))).abs() <= 1e-4);
        assert_eq!(r.note, Some(SINGLE_LETTER));
        let twice = classical_compound_capacity(&[bsc.clone(), bsc], &cfg).unwrap();
        assert!((twice.value - r.value).abs() <= 1e-4);

        let adder = adder_avc().state_kernels();
        let r = classical_compound_capacity(&adder, &cfg).unwrap();
        assert!((r.value - 0.5).abs() <= 1e-3 && r.converged, "{r:?}");
        let Adversary::Hull { weights, .. } = &r.adversary else { panic!() };
        assert!((weights[0] - 0.5).abs() < 1e-3);
        let p = linalg::real_diagonal(r.optimizer.matrix());
        assert!((p[0] - 0.5).abs() < 1e-2);
    }
}
