//! Convex minimization over the adversary's choice (hull weights or jammer
//! state) at a fixed input, and the exchange loop that alternates it with
//! the compound maximization.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::ascent::{maximize_min_restarts, Domain, Member};
use super::{SolverConfig, ACTIVE_SET_CAP};
use crate::channel::{apply_choi, QuantumChannel};
use crate::entropy::{self, choi_joint_state, entropy_of_spectrum, SUPPORT_CUTOFF};
use crate::error::{Error, Result};
use crate::linalg::{self, real, Mat};
use crate::models::StochasticMatrix;

/// Channels whose Choi matrix is affine in a parameter `y` from a domain:
/// `J(y) = Σ y[r, c] C^{(r,c)}`.
#[derive(Debug, Clone)]
pub(crate) struct AffineFamily {
    pub domain: Domain,
    pub d_in: usize,
    pub d_out: usize,
    pub blocks: Vec<(usize, usize, Mat)>,
}

impl AffineFamily {
    pub fn choi(&self, y: &Mat) -> Mat {
        let n = self.d_in * self.d_out;
        let mut out = Mat::zeros(n, n);
        for (r, c, b) in &self.blocks {
            let w = y[(*r, *c)];
            if w != linalg::ZERO {
                out += b * w;
            }
        }
        out
    }

    pub fn channel(&self, y: &Mat) -> Result<QuantumChannel> {
        QuantumChannel::from_choi(&linalg::hermitize(&self.choi(y)), self.d_in, self.d_out)
    }
}

/// The adversary's family in an exchange loop.
#[derive(Debug, Clone)]
pub(crate) enum Family {
    Quantum(AffineFamily),
    /// Convex hull of classical kernels.
    Classical(Vec<StochasticMatrix>),
}

impl Family {
    pub fn inner_domain(&self) -> Domain {
        match self {
            Family::Quantum(f) => f.domain,
            Family::Classical(ws) => Domain::Simplex(ws.len()),
        }
    }

    pub fn outer_domain(&self) -> Domain {
        match self {
            Family::Quantum(f) => Domain::Spectraplex(f.d_in),
            Family::Classical(ws) => Domain::Simplex(ws[0].inputs()),
        }
    }

    pub fn member(&self, y: &Mat) -> Result<Member> {
        match self {
            Family::Quantum(f) => Ok(Member::quantum(f.channel(y)?)),
            Family::Classical(ws) => Ok(Member::Classical(StochasticMatrix::mix(ws, &hull_weights(y))?)),
        }
    }

    fn objective(&self, x: &Mat) -> Result<Objective> {
        match self {
            Family::Quantum(f) => {
                let entropy_in = entropy::entropy_of_matrix(x)?;
                let mut outputs = Vec::with_capacity(f.blocks.len());
                let mut joints = Vec::with_capacity(f.blocks.len());
                for (_, _, b) in &f.blocks {
                    outputs.push(apply_choi(b, f.d_in, f.d_out, x));
                    joints.push(choi_joint_state(x, b, f.d_out));
                }
                Ok(Objective::Quantum {
                    family: f.clone(),
                    entropy_in,
                    outputs,
                    joints,
                })
            }
            Family::Classical(ws) => Ok(Objective::Classical {
                kernels: ws.clone(),
                p: linalg::real_diagonal(x),
            }),
        }
    }
}

fn hull_weights(y: &Mat) -> Vec<f64> {
    let mut w: Vec<f64> = linalg::real_diagonal(y).iter().map(|v| v.max(0.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= s);
    w
}

/// `y ↦ I(input; channel(y))` at a fixed input, convex in `y`.
enum Objective {
    Quantum {
        family: AffineFamily,
        entropy_in: f64,
        /// `Tr_in[(xᵀ ⊗ I) C^{(r,c)}]` per block.
        outputs: Vec<Mat>,
        /// `(√xᵀ ⊗ I) C^{(r,c)} (√xᵀ ⊗ I)†` per block.
        joints: Vec<Mat>,
    },
    Classical {
        kernels: Vec<StochasticMatrix>,
        p: Vec<f64>,
    },
}

fn combine(parts: &[Mat], blocks: &[(usize, usize, Mat)], y: &Mat) -> Mat {
    let mut out = Mat::zeros(parts[0].nrows(), parts[0].ncols());
    for (part, (r, c, _)) in parts.iter().zip(blocks) {
        let w = y[(*r, *c)];
        if w != linalg::ZERO {
            out += part * w;
        }
    }
    linalg::hermitize(&out)
}

impl Objective {
    fn value(&self, y: &Mat) -> Result<f64> {
        match self {
            Objective::Quantum {
                family,
                entropy_in,
                outputs,
                joints,
            } => {
                let out = combine(outputs, &family.blocks, y);
                let joint = combine(joints, &family.blocks, y);
                Ok(entropy_in + entropy::entropy_of_matrix(&out)? - entropy::entropy_of_matrix(&joint)?)
            }
            Objective::Classical { kernels, p } => {
                let w = StochasticMatrix::mix(kernels, &hull_weights(y))?;
                entropy::classical_mutual_information(p, &w)
            }
        }
    }

    /// Value and gradient `H` with `dg = Tr[H dy]`.
    fn evaluate(&self, y: &Mat) -> Result<(f64, Mat)> {
        match self {
            Objective::Quantum {
                family,
                entropy_in,
                outputs,
                joints,
            } => {
                let e_out = linalg::eigh(&combine(outputs, &family.blocks, y));
                let e_joint = linalg::eigh(&combine(joints, &family.blocks, y));
                let value = entropy_in + entropy_of_spectrum(&e_out.values)? - entropy_of_spectrum(&e_joint.values)?;
                let log_out = linalg::log2_on_support(&e_out, SUPPORT_CUTOFF);
                let log_joint = linalg::log2_on_support(&e_joint, SUPPORT_CUTOFF);
                let d = family.domain.dim();
                let mut h = Mat::zeros(d, d);
                for ((b_out, b_joint), (r, c, _)) in outputs.iter().zip(joints).zip(&family.blocks) {
                    let dr = -linalg::trace(&(b_out * &log_out)) + linalg::trace(&(b_joint * &log_joint));
                    h[(*c, *r)] += dr;
                }
                Ok((value, linalg::hermitize(&h)))
            }
            Objective::Classical { kernels, p } => {
                let weights = hull_weights(y);
                let mix = StochasticMatrix::mix(kernels, &weights)?;
                let value = entropy::classical_mutual_information(p, &mix)?;
                let q = mix.output_distribution(p);
                let grads: Vec<f64> = kernels
                    .iter()
                    .map(|k| {
                        let mut acc = 0.0;
                        for (x, &px) in p.iter().enumerate() {
                            for (yv, &qy) in q.iter().enumerate() {
                                let kj = k.get(yv, x);
                                if kj > 0.0 && px > 0.0 {
                                    acc += px * kj * (mix.get(yv, x) / qy).log2();
                                }
                            }
                        }
                        acc
                    })
                    .collect();
                Ok((value, linalg::diag(&grads)))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct InnerOutcome {
    /// Objective at `point`.
    pub value: f64,
    /// Certified lower bound on the minimum.
    pub lower: f64,
    pub point: Mat,
}

fn fw_gap(domain: Domain, h: &Mat, y: &Mat) -> f64 {
    linalg::trace_product_re(h, y) - domain.min_oracle(h).0
}

/// Golden-section search along the edge of a two-point simplex.
fn minimize_edge(obj: &Objective, domain: Domain) -> Result<Mat> {
    let at = |t: f64| domain.regularize(&linalg::diag(&[t, 1.0 - t]));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = obj.value(&at(c))?;
    let mut fd = obj.value(&at(d))?;
    while b - a > 1e-10 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = obj.value(&at(c))?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = obj.value(&at(d))?;
        }
    }
    let mut best = at(0.5 * (a + b));
    let mut fbest = obj.value(&best)?;
    for t in [0.0, 1.0] {
        let cand = at(t);
        let f = obj.value(&cand)?;
        if f < fbest {
            fbest = f;
            best = cand;
        }
    }
    Ok(best)
}

/// Projected gradient descent with backtracking from `start`.
fn descend(obj: &Objective, domain: Domain, start: Mat, tol: f64, max_iter: usize) -> Result<(f64, Mat, f64)> {
    let mut y = domain.regularize(&start);
    let (mut g, mut h) = obj.evaluate(&y)?;
    let mut step = 1.0;
    for _ in 0..max_iter {
        if fw_gap(domain, &h, &y) <= tol {
            break;
        }
        let mut accepted = None;
        while step > 1e-14 {
            let z = domain.regularize(&domain.project(&(&y - &h * real(step))));
            let d = &z - &y;
            let gz = obj.value(&z)?;
            let bound = g + linalg::trace_product_re(&h, &d) + d.norm_squared() / (2.0 * step);
            if gz <= bound {
                accepted = Some(z);
                break;
            }
            step *= 0.5;
        }
        let Some(z) = accepted else {
            break;
        };
        y = z;
        (g, h) = obj.evaluate(&y)?;
        step *= 2.0;
    }
    let gap = fw_gap(domain, &h, &y);
    Ok((g, y, gap))
}

/// Minimizes the family objective at input `x` to certified accuracy `tol`.
pub(crate) fn minimize_adversary(family: &Family, x: &Mat, tol: f64, max_iter: usize, start: Option<&Mat>) -> Result<InnerOutcome> {
    let obj = family.objective(x)?;
    let domain = family.inner_domain();
    let first = match (domain, start) {
        (Domain::Simplex(2), _) => minimize_edge(&obj, domain)?,
        (_, Some(s)) => s.clone(),
        (_, None) => domain.center(),
    };
    let (mut g, mut y, mut gap) = descend(&obj, domain, first, tol, max_iter)?;

    // extreme-point polish: restart from the eigenprojectors of the iterate
    let e = linalg::eigh(&y);
    for k in (0..e.dim()).rev() {
        let cand = domain.regularize(&match domain {
            Domain::Spectraplex(_) => linalg::projector(&e.vector(k)),
            Domain::Simplex(n) => linalg::basis_projector(n, k),
        });
        if obj.value(&cand)? < g - 1e-12 {
            let (g2, y2, gap2) = descend(&obj, domain, cand, tol, max_iter)?;
            if g2 < g {
                (g, y, gap) = (g2, y2, gap2);
            }
        }
    }
    Ok(InnerOutcome {
        value: g,
        lower: g - gap.max(0.0),
        point: y,
    })
}

#[derive(Debug, Clone)]
pub(crate) struct ExchangeOutcome {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub point: Mat,
    pub worst: Mat,
    pub active: Vec<Mat>,
    pub active_weights: Vec<f64>,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Cutting-plane solution of `sup_x inf_y f(x, y)`: a compound problem over
/// the active adversaries gives an upper bound and a candidate input, the
/// inner minimization at that input gives a lower bound and a new adversary.
pub(crate) fn exchange(family: &Family, initial: Vec<Mat>, cfg: &SolverConfig) -> Result<ExchangeOutcome> {
    let outer = family.outer_domain();
    let mut active = initial;
    let mut members = active.iter().map(|y| family.member(y)).collect::<Result<Vec<_>>>()?;
    let mut warm: Option<Mat> = None;
    let mut inner_start: Option<Mat> = None;
    let mut iterations = 0;
    let mut history = Vec::new();
    let mut upper = f64::INFINITY;
    let mut best: Option<(InnerOutcome, Mat)> = None;
    let mut weights = Vec::new();
    loop {
        let restarts = if warm.is_none() { cfg.restarts } else { 1 };
        let comp = maximize_min_restarts(outer, &members, 0.5 * cfg.tol, cfg.max_iter, restarts, cfg.seed, warm.as_ref())?;
        iterations += comp.iterations;
        if comp.upper < upper {
            upper = comp.upper;
            weights = comp.weights.clone();
        }
        let inner = minimize_adversary(family, &comp.point, cfg.inner_tol, cfg.max_iter, inner_start.as_ref())?;
        if best.as_ref().is_none_or(|(b, _)| inner.lower > b.lower) {
            best = Some((inner.clone(), comp.point.clone()));
        }
        let (b, _) = best.as_ref().unwrap();
        history.push(b.lower);
        if upper - b.lower <= cfg.tol {
            break;
        }
        let duplicate = active.iter().any(|a| linalg::max_abs_diff(a, &inner.point) < 1e-9);
        if duplicate || iterations >= cfg.max_iter {
            break;
        }
        if active.len() >= ACTIVE_SET_CAP {
            return Err(Error::ActiveSetExhausted(ACTIVE_SET_CAP));
        }
        members.push(family.member(&inner.point)?);
        active.push(inner.point.clone());
        inner_start = Some(inner.point);
        warm = Some(comp.point);
    }
    let (b, point) = best.unwrap();
    let converged = upper - b.lower <= cfg.tol;
    weights.resize(active.len(), 0.0);
    Ok(ExchangeOutcome {
        value: b.value,
        lower: b.lower,
        upper,
        point,
        worst: b.point,
        active,
        active_weights: weights,
        iterations,
        history,
        converged,
    })
}
