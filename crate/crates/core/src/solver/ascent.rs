//! Conditional-gradient maximization of `x ↦ min_j f_j(x)` over density
//! matrices or probability vectors, for concave members `f_j`.
//!
//! The nonsmooth minimum is replaced by the softmin
//! `f_μ = -μ ln Σ_j exp(-f_j/μ)` with a decreasing temperature; reported
//! values are always the exact minimum. Upper bounds use the supergradient
//! inequality: for any weights `λ` in the simplex,
//! `max_y min_j f_j(y) ≤ λ_max(Σ_j λ_j G_j) + Σ_j λ_j (f_j(x) - Tr[G_j x])`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::QuantumChannel;
use crate::entropy::{self, REGULARIZATION};
use crate::error::Result;
use crate::linalg::{self, real, Mat};
use crate::lp::{self, LpSolution};
use crate::models::StochasticMatrix;
use crate::random::{random_density, random_probability, seeded, Rng};

/// Feasible set of the maximization: density matrices of a dimension, or
/// probability vectors stored as diagonal matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Domain {
    Spectraplex(usize),
    Simplex(usize),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match *self {
            Domain::Spectraplex(d) | Domain::Simplex(d) => d,
        }
    }

    pub fn center(&self) -> Mat {
        let d = self.dim();
        linalg::identity(d) * real(1.0 / d as f64)
    }

    pub fn regularize(&self, x: &Mat) -> Mat {
        x * real(1.0 - REGULARIZATION) + self.center() * real(REGULARIZATION)
    }

    /// `max_y Tr[G y]` over the domain, with a maximizing extreme point.
    pub fn lmo(&self, g: &Mat) -> (f64, Mat) {
        match *self {
            Domain::Spectraplex(_) => {
                let e = linalg::eigh(g);
                (e.max(), linalg::projector(&e.top_vector()))
            }
            Domain::Simplex(n) => {
                let mut best = 0;
                for j in 1..n {
                    if g[(j, j)].re > g[(best, best)].re {
                        best = j;
                    }
                }
                (g[(best, best)].re, linalg::basis_projector(n, best))
            }
        }
    }

    /// `min_y Tr[G y]` over the domain, with a minimizing extreme point.
    pub fn min_oracle(&self, g: &Mat) -> (f64, Mat) {
        let (v, y) = self.lmo(&-g);
        (-v, y)
    }

    /// Euclidean projection onto the domain.
    pub fn project(&self, y: &Mat) -> Mat {
        match *self {
            Domain::Spectraplex(_) => {
                let e = linalg::eigh(y);
                let p = linalg::project_simplex(&e.values);
                let mut scaled = e.vectors.clone();
                for (j, &pj) in p.iter().enumerate() {
                    for i in 0..scaled.nrows() {
                        scaled[(i, j)] *= real(pj);
                    }
                }
                linalg::hermitize(&(scaled * e.vectors.adjoint()))
            }
            Domain::Simplex(_) => linalg::diag(&linalg::project_simplex(&linalg::real_diagonal(y))),
        }
    }

    pub fn random_point(&self, rng: &mut Rng) -> Mat {
        let d = self.dim();
        let raw = match *self {
            Domain::Spectraplex(_) => random_density(d, rng).into_matrix(),
            Domain::Simplex(_) => linalg::diag(&random_probability(d, rng)),
        };
        (raw + self.center()) * real(0.5)
    }
}

/// A concave objective with the homogeneity property `Tr[G x] = f(x)`.
#[derive(Debug, Clone)]
pub(crate) enum Member {
    Quantum { t: QuantumChannel, tc: QuantumChannel },
    Classical(StochasticMatrix),
}

impl Member {
    pub fn quantum(t: QuantumChannel) -> Self {
        let tc = t.complementary();
        Member::Quantum { t, tc }
    }

    /// Value and supergradient at a full-rank point.
    pub fn evaluate(&self, x: &Mat) -> Result<(f64, Mat)> {
        match self {
            Member::Quantum { t, tc } => entropy::mi_value_and_gradient_at(x, t, tc),
            Member::Classical(w) => {
                let p = linalg::real_diagonal(x);
                let q = w.output_distribution(&p);
                let g: Vec<f64> = (0..w.inputs())
                    .map(|i| entropy::relative_entropy(&w.column(i), &q))
                    .collect();
                let value = p.iter().zip(&g).map(|(pi, gi)| pi * gi).sum::<f64>();
                Ok((value, linalg::diag(&g)))
            }
        }
    }
}

/// Member values and supergradients at one point.
pub(crate) struct Evaluation {
    pub values: Vec<f64>,
    pub grads: Vec<Mat>,
    /// `f_j(x) - Tr[G_j x]`, zero up to round-off.
    pub offsets: Vec<f64>,
}

impl Evaluation {
    pub fn at(members: &[Member], x: &Mat) -> Result<Self> {
        let mut values = Vec::with_capacity(members.len());
        let mut grads = Vec::with_capacity(members.len());
        let mut offsets = Vec::with_capacity(members.len());
        for m in members {
            let (v, g) = m.evaluate(x)?;
            offsets.push(v - linalg::trace_product_re(&g, x));
            values.push(v);
            grads.push(g);
        }
        Ok(Self { values, grads, offsets })
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn combined_gradient(&self, w: &[f64]) -> Mat {
        let mut g = self.grads[0].clone() * real(w[0]);
        for (gj, &wj) in self.grads.iter().zip(w).skip(1) {
            if wj != 0.0 {
                g += gj * real(wj);
            }
        }
        g
    }

    /// Upper bound on `max min_j f_j` from weights `w`, and the maximizing
    /// extreme point of the combined gradient.
    pub fn upper_bound(&self, domain: Domain, w: &[f64]) -> (f64, Mat) {
        let (lmax, s) = domain.lmo(&self.combined_gradient(w));
        let off: f64 = w.iter().zip(&self.offsets).map(|(a, b)| a * b).sum();
        (lmax + off, s)
    }
}

/// `w_j ∝ exp(-(f_j - min f)/μ)`.
pub(crate) fn softmin_weights(values: &[f64], mu: f64) -> Vec<f64> {
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut w: Vec<f64> = values.iter().map(|&v| (-(v - m) / mu).exp()).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// Minimizes `λ ↦ upper_bound(λ)` over the simplex with Kelley's cutting
/// planes; each cut is a supporting hyperplane through the origin because
/// the bound is positively homogeneous in `λ`.
pub(crate) fn refine_certificate(domain: Domain, ev: &Evaluation, init: &[f64], tol: f64) -> Result<(f64, Vec<f64>)> {
    let j = ev.values.len();
    let cut_at = |w: &[f64]| -> (f64, Vec<f64>) {
        let (ub, s) = ev.upper_bound(domain, w);
        let cut = ev
            .grads
            .iter()
            .zip(&ev.offsets)
            .map(|(g, off)| linalg::trace_product_re(g, &s) + off)
            .collect();
        (ub, cut)
    };
    let (mut best, first_cut) = cut_at(init);
    let mut best_w = init.to_vec();
    if j == 1 {
        return Ok((best, best_w));
    }
    let mut cuts = vec![first_cut];
    for k in 0..j {
        let mut e = vec![0.0; j];
        e[k] = 1.0;
        let (ub, cut) = cut_at(&e);
        if ub < best {
            best = ub;
            best_w = e;
        }
        cuts.push(cut);
    }
    for _ in 0..60 {
        // variables: λ (j), t+, t-, one slack per cut
        let nc = cuts.len();
        let width = j + 2 + nc;
        let mut a = Vec::with_capacity(nc + 1);
        for (k, cut) in cuts.iter().enumerate() {
            let mut row = vec![0.0; width];
            row[..j].copy_from_slice(cut);
            row[j] = -1.0;
            row[j + 1] = 1.0;
            row[j + 2 + k] = 1.0;
            a.push(row);
        }
        let mut simplex_row = vec![0.0; width];
        simplex_row[..j].iter_mut().for_each(|v| *v = 1.0);
        a.push(simplex_row);
        let mut b = vec![0.0; nc];
        b.push(1.0);
        let mut c = vec![0.0; width];
        c[j] = 1.0;
        c[j + 1] = -1.0;
        let LpSolution::Optimal { x, value } = lp::solve(&a, &b, &c)? else {
            break;
        };
        if best - value <= 0.01 * tol {
            break;
        }
        let mut w: Vec<f64> = x[..j].iter().map(|v| v.max(0.0)).collect();
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= s);
        let (ub, cut) = cut_at(&w);
        if ub < best {
            best = ub;
            best_w = w;
        }
        cuts.push(cut);
    }
    Ok((best, best_w))
}

#[derive(Debug, Clone)]
pub(crate) struct AscentOutcome {
    /// Exact `min_j f_j` at `point`.
    pub value: f64,
    /// Certified upper bound on the maximum.
    pub upper: f64,
    pub point: Mat,
    pub iterations: usize,
    /// Weights attaining `upper`.
    pub weights: Vec<f64>,
    pub member_values: Vec<f64>,
    pub history: Vec<f64>,
    /// The temperature had to go below the nominal final value.
    pub extended_schedule: bool,
}

impl AscentOutcome {
    pub fn gap(&self) -> f64 {
        (self.upper - self.value).max(0.0)
    }
}

const MU_START: f64 = 10.0;
const MU_FINAL: f64 = 1e-3;
const MU_FLOOR: f64 = 1e-9;

fn schedule() -> Vec<f64> {
    let mut mus = Vec::new();
    let mut mu = MU_START;
    while mu > MU_FINAL {
        mus.push(mu);
        mu *= 0.5;
    }
    mus.push(MU_FINAL);
    mus
}

struct Best {
    value: f64,
    point: Mat,
    member_values: Vec<f64>,
    upper: f64,
    weights: Vec<f64>,
}

/// Directional derivative of the softmin along `s - x` at `x + γ(s - x)`.
fn slope(members: &[Member], x: &Mat, s: &Mat, gamma: f64, mu: f64) -> Result<f64> {
    let y = x * real(1.0 - gamma) + s * real(gamma);
    let ev = Evaluation::at(members, &y)?;
    let w = softmin_weights(&ev.values, mu);
    let g = ev.combined_gradient(&w);
    Ok(linalg::trace_product_re(&g, &(s - x)))
}

/// Step length maximizing the (concave) softmin along the segment, by
/// Illinois root finding on its derivative.
fn line_search(members: &[Member], x: &Mat, s: &Mat, mu: f64, d0: f64) -> Result<f64> {
    const GAMMA_MAX: f64 = 1.0 - 1e-8;
    let d1 = slope(members, x, s, GAMMA_MAX, mu)?;
    if d1 >= 0.0 {
        return Ok(GAMMA_MAX);
    }
    let (mut a, mut fa, mut b, mut fb) = (0.0, d0, GAMMA_MAX, d1);
    let mut side = 0i8;
    let mut c = 0.0;
    for _ in 0..50 {
        c = (a * fb - b * fa) / (fb - fa);
        let fc = slope(members, x, s, c, mu)?;
        if fc.abs() <= 1e-4 * d0 || b - a < 1e-13 {
            break;
        }
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    Ok(c)
}

/// One run from `start` until the certified gap reaches `tol` or the
/// iteration budget is spent.
pub(crate) fn maximize_min(
    domain: Domain,
    members: &[Member],
    tol: f64,
    max_iter: usize,
    start: &Mat,
) -> Result<AscentOutcome> {
    let j = members.len();
    let mut x = start.clone();
    let mut best: Option<Best> = None;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut extended = false;

    let mut mus = schedule();
    let mut stage = 0;
    loop {
        let mu = match mus.get(stage) {
            Some(&m) => m,
            None => {
                let next = mus[mus.len() - 1] * 0.5;
                if next < MU_FLOOR || j == 1 {
                    break;
                }
                extended = true;
                mus.push(next);
                next
            }
        };
        let stage_target = if j == 1 { 0.0 } else { (0.25 * tol).max(0.05 * mu) };
        let mut last_eval;
        loop {
            x = domain.regularize(&x);
            let ev = Evaluation::at(members, &x)?;
            let exact = ev.min();
            let w = softmin_weights(&ev.values, mu);
            let (ub, s) = ev.upper_bound(domain, &w);
            let fw_gap = ub - w.iter().zip(&ev.values).map(|(a, b)| a * b).sum::<f64>();
            match &mut best {
                Some(b) => {
                    if exact > b.value {
                        b.value = exact;
                        b.point = x.clone();
                        b.member_values = ev.values.clone();
                    }
                    if ub < b.upper {
                        b.upper = ub;
                        b.weights = w.clone();
                    }
                }
                None => {
                    best = Some(Best {
                        value: exact,
                        point: x.clone(),
                        member_values: ev.values.clone(),
                        upper: ub,
                        weights: w.clone(),
                    })
                }
            }
            let b = best.as_ref().unwrap();
            history.push(b.value);
            if b.upper - b.value <= tol || iterations >= max_iter || fw_gap <= stage_target {
                last_eval = Some((ev, w));
                break;
            }
            let gamma = line_search(members, &x, &s, mu, fw_gap)?;
            x = &x * real(1.0 - gamma) + &s * real(gamma);
            iterations += 1;
        }
        let (ev, w) = last_eval.take().unwrap();
        let b = best.as_mut().unwrap();
        if b.upper - b.value > tol && j > 1 {
            let (ub, lw) = refine_certificate(domain, &ev, &w, tol)?;
            if ub < b.upper {
                b.upper = ub;
                b.weights = lw;
            }
        }
        if b.upper - b.value <= tol || iterations >= max_iter {
            break;
        }
        stage += 1;
    }
    let b = best.unwrap();
    Ok(AscentOutcome {
        value: b.value,
        upper: b.upper,
        point: b.point,
        iterations,
        weights: b.weights,
        member_values: b.member_values,
        history,
        extended_schedule: extended,
    })
}

/// Runs [`maximize_min`] from the maximally mixed point (or `warm`) and
/// then from seeded random points until the combined certificate closes.
pub(crate) fn maximize_min_restarts(
    domain: Domain,
    members: &[Member],
    tol: f64,
    max_iter: usize,
    restarts: usize,
    seed: u64,
    warm: Option<&Mat>,
) -> Result<AscentOutcome> {
    let mut rng = seeded(seed);
    let first = warm.cloned().unwrap_or_else(|| domain.center());
    let mut out = maximize_min(domain, members, tol, max_iter, &first)?;
    for _ in 1..restarts.max(1) {
        if out.gap() <= tol {
            break;
        }
        let start = domain.random_point(&mut rng);
        let run = maximize_min(domain, members, tol, max_iter, &start)?;
        let upper = out.upper.min(run.upper);
        let weights = if run.upper < out.upper { run.weights.clone() } else { out.weights.clone() };
        let iterations = out.iterations + run.iterations;
        let extended = out.extended_schedule || run.extended_schedule;
        if run.value > out.value {
            out = run;
        }
        out.upper = upper;
        out.weights = weights;
        out.iterations = iterations;
        out.extended_schedule = extended;
    }
    Ok(out)
}
