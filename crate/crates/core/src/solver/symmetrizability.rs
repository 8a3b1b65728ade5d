use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lp::{self, LpSolution};
use crate::models::{AvcKernel, StochasticMatrix};

const LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SymmetrizabilityCertificate {
    /// `U(s|x)`, with states as outputs and inputs as inputs.
    Symmetrizer(StochasticMatrix),
    /// Farkas witness `w` for the constraint system returned by
    /// [`symmetrizability_system`]: `Aᵀw ≥ 0` and `b·w < 0`.
    Witness(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Symmetrizability {
    pub symmetrizable: bool,
    pub certificate: SymmetrizabilityCertificate,
}

/// Equality system `A u = b`, `u ≥ 0` over `u[x·S + s] = U(s|x)`: one
/// normalization row per input, then one row per `(x < x', y)`.
pub fn symmetrizability_system(w: &AvcKernel) -> (Vec<Vec<f64>>, Vec<f64>) {
    let (nx, ns, ny) = (w.x(), w.s(), w.y());
    let n = nx * ns;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for x in 0..nx {
        let mut row = vec![0.0; n];
        row[x * ns..(x + 1) * ns].iter_mut().for_each(|v| *v = 1.0);
        a.push(row);
        b.push(1.0);
    }
    for x in 0..nx {
        for xp in x + 1..nx {
            for y in 0..ny {
                let mut row = vec![0.0; n];
                for s in 0..ns {
                    row[xp * ns + s] += w.get(y, x, s);
                    row[x * ns + s] -= w.get(y, xp, s);
                }
                a.push(row);
                b.push(0.0);
            }
        }
    }
    (a, b)
}

/// Decides whether some `U(s|x)` makes `Σ_s W(y|x,s)U(s|x')` symmetric in
/// `(x, x')`. Either verdict comes with an independently checked certificate.
pub fn symmetrizability_check(w: &AvcKernel) -> Result<Symmetrizability> {
    let (a, b) = symmetrizability_system(w);
    let n = w.x() * w.s();
    match lp::solve(&a, &b, &vec![0.0; n])? {
        LpSolution::Optimal { x, .. } => {
            if lp::primal_residual(&a, &b, &x) > LP_TOL {
                return Err(Error::LinearProgram("symmetrizer fails the residual check"));
            }
            let (nx, ns) = (w.x(), w.s());
            let mut u = vec![0.0; ns * nx];
            for xi in 0..nx {
                let total: f64 = x[xi * ns..(xi + 1) * ns].iter().sum();
                for s in 0..ns {
                    u[s * nx + xi] = x[xi * ns + s] / total;
                }
            }
            Ok(Symmetrizability {
                symmetrizable: true,
                certificate: SymmetrizabilityCertificate::Symmetrizer(StochasticMatrix::new(ns, nx, u)?),
            })
        }
        LpSolution::Infeasible { farkas } => {
            let scale = farkas.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if scale == 0.0 {
                return Err(Error::LinearProgram("empty infeasibility witness"));
            }
            let witness: Vec<f64> = farkas.iter().map(|v| v / scale).collect();
            let (violation, bw) = lp::farkas_check(&a, &b, &witness);
            if violation > LP_TOL || bw >= -LP_TOL {
                return Err(Error::LinearProgram("infeasibility witness fails verification"));
            }
            Ok(Symmetrizability {
                symmetrizable: false,
                certificate: SymmetrizabilityCertificate::Witness(witness),
            })
        }
        LpSolution::Unbounded => Err(Error::LinearProgram("feasibility program reported unbounded")),
    }
}
