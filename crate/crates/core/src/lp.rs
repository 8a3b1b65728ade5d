//! Dense two-phase simplex for small linear programs in standard form
//!
//! ```text
//! minimize c·x  subject to  A x = b,  x ≥ 0
//! ```
//!
//! Bland's rule throughout, so degenerate problems terminate. Infeasible
//! problems come back with a Farkas witness `w` satisfying `Aᵀw ≥ 0` and
//! `b·w < 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const COST_TOL: f64 = 1e-11;
/// Phase-one objective above this (relative to `|b|`) means infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible { farkas: Vec<f64> },
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, k: usize) -> f64 {
        self.rows[k][self.width]
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == r {
                continue;
            }
            let f = row[col];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[col] = 0.0;
            }
        }
        self.basis[r] = col;
    }

    /// Runs the simplex method for `cost` over columns `< allowed`.
    /// Returns `false` when unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &bk)| cost[bk] * row[j])
                        .sum::<f64>();
                if reduced < -COST_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for k in 0..self.rows.len() {
                let a = self.rows[k][col];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(k) / a;
                    leave = match leave {
                        None => Some((k, ratio)),
                        Some((lk, lr)) => {
                            if ratio < lr - 1e-15 || (ratio <= lr + 1e-15 && self.basis[k] < self.basis[lk]) {
                                Some((k, ratio))
                            } else {
                                Some((lk, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false);
            };
            self.pivot(r, col);
        }
        Err(Error::LinearProgram("pivot limit reached"))
    }
}

/// Solves `min c·x` subject to `A x = b`, `x ≥ 0`. `a` is row-major.
pub fn solve(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let m = a.len();
    let n = c.len();
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            axis: "LP right-hand side",
            expected: m,
            found: b.len(),
        });
    }
    if let Some(row) = a.iter().find(|r| r.len() != n) {
        return Err(Error::DimensionMismatch {
            axis: "LP constraint row",
            expected: n,
            found: row.len(),
        });
    }
    if a.iter().flatten().chain(b).chain(c).any(|v| !v.is_finite()) {
        return Err(Error::LinearProgram("non-finite coefficient"));
    }
    if m == 0 {
        // only x ≥ 0: bounded iff c ≥ 0
        if c.iter().any(|&v| v < 0.0) {
            return Ok(LpSolution::Unbounded);
        }
        return Ok(LpSolution::Optimal { x: vec![0.0; n], value: 0.0 });
    }

    let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let width = n + m;
    let rows = (0..m)
        .map(|i| {
            let mut row = vec![0.0; width + 1];
            for j in 0..n {
                row[j] = sign[i] * a[i][j];
            }
            row[n + i] = 1.0;
            row[width] = sign[i] * b[i];
            row
        })
        .collect();
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        width,
    };

    let mut phase1 = vec![0.0; width];
    phase1[n..].iter_mut().for_each(|v| *v = 1.0);
    t.optimize(&phase1, width)?;
    let infeasibility: f64 = (0..m).filter(|&k| t.basis[k] >= n).map(|k| t.rhs(k)).sum();
    let scale = b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    if infeasibility > FEASIBILITY_TOL * scale {
        // phase-one duals y_i = c_B · B⁻¹ e_i, read off the artificial columns
        let farkas = (0..m)
            .map(|i| {
                let y: f64 = t
                    .rows
                    .iter()
                    .zip(&t.basis)
                    .map(|(row, &bk)| phase1[bk] * row[n + i])
                    .sum();
                -y * sign[i]
            })
            .collect();
        return Ok(LpSolution::Infeasible { farkas });
    }

    // drive remaining artificials out of the basis, dropping redundant rows
    let mut k = 0;
    while k < t.rows.len() {
        if t.basis[k] >= n {
            match (0..n).find(|&j| t.rows[k][j].abs() > 1e-9) {
                Some(j) => t.pivot(k, j),
                None => {
                    t.rows.remove(k);
                    t.basis.remove(k);
                    continue;
                }
            }
        }
        k += 1;
    }

    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(c);
    if !t.optimize(&cost, n)? {
        return Ok(LpSolution::Unbounded);
    }
    let mut x = vec![0.0; n];
    for (k, &bk) in t.basis.iter().enumerate() {
        if bk < n {
            x[bk] = t.rhs(k).max(0.0);
        }
    }
    let value = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    Ok(LpSolution::Optimal { x, value })
}

/// Largest violation of `A x = b` and `x ≥ 0`.
pub fn primal_residual(a: &[Vec<f64>], b: &[f64], x: &[f64]) -> f64 {
    let mut worst = x.iter().fold(0.0f64, |acc, &v| acc.max(-v));
    for (row, &bi) in a.iter().zip(b) {
        let lhs: f64 = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum();
        worst = worst.max((lhs - bi).abs());
    }
    worst
}

/// For a Farkas witness: the largest violation of `Aᵀw ≥ 0`, and `b·w`.
pub fn farkas_check(a: &[Vec<f64>], b: &[f64], w: &[f64]) -> (f64, f64) {
    let n = a.first().map_or(0, |r| r.len());
    let mut worst = 0.0f64;
    for j in 0..n {
        let col: f64 = a.iter().zip(w).map(|(row, wi)| row[j] * wi).sum();
        worst = worst.max(-col);
    }
    let bw = b.iter().zip(w).map(|(bi, wi)| bi * wi).sum();
    (worst, bw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_optimum() {
        // min -x - y  s.t. x + 2y + s1 = 4, 3x + y + s2 = 6
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let b = [4.0, 6.0];
        let c = [-1.0, -1.0, 0.0, 0.0];
        match solve(&a, &b, &c).unwrap() {
            LpSolution::Optimal { x, value } => {
                assert!((x[0] - 1.6).abs() < 1e-12 && (x[1] - 1.2).abs() < 1e-12);
                assert!((value + 2.8).abs() < 1e-12);
                assert!(primal_residual(&a, &b, &x) < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_gives_witness() {
        let a = vec![vec![1.0, 1.0], vec![1.0, -1.0]];
        let b = [-1.0, 0.5];
        match solve(&a, &b, &[0.0, 0.0]).unwrap() {
            LpSolution::Infeasible { farkas } => {
                let (viol, bw) = farkas_check(&a, &b, &farkas);
                assert!(viol <= 1e-12 && bw < -1e-9);
            }
            other => panic!("{other:?}"),
        }
        // x1 + x2 = 1 and x1 + x2 = 2
        let a = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        let b = [1.0, 2.0];
        let LpSolution::Infeasible { farkas } = solve(&a, &b, &[0.0, 0.0]).unwrap() else {
            panic!("expected infeasible");
        };
        let (viol, bw) = farkas_check(&a, &b, &farkas);
        assert!(viol <= 1e-12 && bw < -1e-9);
    }

    #[test]
    fn redundant_rows_and_degeneracy() {
        let a = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0], vec![0.0, 0.0, 1.0]];
        let b = [1.0, 2.0, 0.0];
        let LpSolution::Optimal { x, value } = solve(&a, &b, &[1.0, 2.0, 0.0]).unwrap() else {
            panic!("expected optimum");
        };
        assert!((value - 1.0).abs() < 1e-12);
        assert!(primal_residual(&a, &b, &x) < 1e-12);
    }

    #[test]
    fn unbounded() {
        let a = vec![vec![1.0, -1.0]];
        assert_eq!(solve(&a, &[0.0], &[-1.0, 0.0]).unwrap(), LpSolution::Unbounded);
    }

    #[test]
    fn matrix_game_value() {
        // matching pennies: min t s.t. a_k·λ ≤ t, value 0 at λ = (1/2, 1/2)
        // variables λ1, λ2, t+, t-, s1, s2
        let a = vec![
            vec![1.0, -1.0, -1.0, 1.0, 1.0, 0.0],
            vec![-1.0, 1.0, -1.0, 1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        ];
        let b = [0.0, 0.0, 1.0];
        let c = [0.0, 0.0, 1.0, -1.0, 0.0, 0.0];
        let LpSolution::Optimal { x, value } = solve(&a, &b, &c).unwrap() else {
            panic!("expected optimum");
        };
        assert!(value.abs() < 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-12);
    }
}
