//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qavcap::core::entropy::{classical_mutual_information, mi_gradient, mi_of_input};
use qavcap::core::lab::{
    builtin_scheme, definetti_bound_check, definetti_monte_carlo, definetti_state, permutation_covariance_check, symmetrize_state,
    theorem3_bound_check,
};
use qavcap::core::linalg::{self, real, Mat};
use qavcap::core::models::{self, StandardChannel};
use qavcap::core::random::{random_channel, random_density, random_jammer, random_traceless_hermitian, seeded};
use qavcap::core::solver::{self, Adversary, SolverConfig, SolverReport, SymmetrizabilityCertificate};
use qavcap::core::{ChannelSet, DensityMatrix, QuantumChannel, StochasticMatrix};

struct Outcome {
    ok: bool,
    detail: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome { ok: true, detail: String::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.ok = false;
            if !self.detail.is_empty() {
                self.detail.push_str("; ");
            }
            self.detail.push_str(&what.into());
        }
    }
}

/// Every solver run from criteria 1 to 4, for the hygiene criterion.
type Runs = Vec<(String, SolverReport, f64)>;

fn channel(c: StandardChannel) -> QuantumChannel {
    models::standard_channel(&c).expect("standard channel")
}

fn depol(p: f64) -> QuantumChannel {
    channel(StandardChannel::Depolarizing { d: 2, p })
}

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

fn record(runs: &mut Runs, label: impl Into<String>, r: &SolverReport, cfg: &SolverConfig) {
    runs.push((label.into(), r.clone(), cfg.tol));
}

fn criterion_1(runs: &mut Runs) -> Outcome {
    let mut o = Outcome::new();
    let cfg = SolverConfig::with_tol(1e-4);
    let start = Instant::now();
    let id = solver::ea_capacity(&channel(StandardChannel::Identity { d: 2 }), &cfg).unwrap();
    let full = solver::ea_capacity(&depol(1.0), &cfg).unwrap();
    let exact_time = start.elapsed();
    o.check((id.value - 2.0).abs() <= 1e-4, format!("identity {}", id.value));
    o.check(full.value.abs() <= 1e-4, format!("full depolarizing {}", full.value));
    o.check(exact_time < Duration::from_secs(5), format!("exact cases took {exact_time:?}"));
    record(runs, "identity", &id, &cfg);
    record(runs, "depol:1", &full, &cfg);

    let cfg = SolverConfig::with_tol(1e-4);
    for p in [0.25, 0.5, 0.75] {
        let r = solver::ea_capacity(&depol(p), &cfg).unwrap();
        let q = 1.0 - 3.0 * p / 4.0;
        let exact = 2.0 - shannon(&[q, p / 4.0, p / 4.0, p / 4.0]);
        o.check((r.value - exact).abs() <= 1e-3, format!("depol {p}: {} vs {exact}", r.value));
        record(runs, format!("depol:{p}"), &r, &cfg);
    }
    for i in 1..=9 {
        let p = i as f64 / 10.0;
        let r = solver::ea_capacity(&channel(StandardChannel::Erasure { d: 2, p }), &cfg).unwrap();
        let exact = 2.0 * (1.0 - p);
        o.check((r.value - exact).abs() <= 1e-3, format!("erasure {p}: {} vs {exact}", r.value));
        record(runs, format!("erasure:{p}"), &r, &cfg);
    }
    let total = start.elapsed();
    o.check(total < Duration::from_secs(30), format!("took {total:?}"));
    o
}

fn criterion_2(runs: &mut Runs) -> Outcome {
    let mut o = Outcome::new();
    let cfg = SolverConfig::with_tol(1e-4);
    let start = Instant::now();
    let set = ChannelSet::new(vec![depol(0.3), depol(0.5)]).unwrap();
    let compound = solver::compound_ea_capacity(&set, &cfg).unwrap();
    let single = solver::ea_capacity(&depol(0.5), &cfg).unwrap();
    o.check(
        (compound.value - single.value).abs() <= 1e-3,
        format!("{{D0.3, D0.5}} {} vs D0.5 {}", compound.value, single.value),
    );
    record(runs, "compound depol", &compound, &cfg);
    record(runs, "depol:0.5", &single, &cfg);

    let set = ChannelSet::new(vec![
        channel(StandardChannel::Identity { d: 2 }),
        channel(StandardChannel::Dephasing { d: 2, p: 1.0 }),
    ])
    .unwrap();
    let r = solver::compound_ea_capacity(&set, &cfg).unwrap();
    o.check((r.value - 1.0).abs() <= 1e-3, format!("{{identity, dephasing}} {}", r.value));
    record(runs, "compound identity/dephasing", &r, &cfg);
    let took = start.elapsed();
    o.check(took < Duration::from_secs(60), format!("took {took:?}"));
    o
}

fn criterion_3(runs: &mut Runs) -> Outcome {
    let mut o = Outcome::new();
    let cfg = SolverConfig::with_tol(1e-4);
    let start = Instant::now();
    let xconj = QuantumChannel::unitary(models::pauli_x()).unwrap();
    let set = ChannelSet::new(vec![channel(StandardChannel::Identity { d: 2 }), xconj]).unwrap();
    let r = solver::avqc_ea_capacity(&set, &cfg).unwrap();
    o.check((r.value - 1.0).abs() <= 1e-3, format!("value {}", r.value));
    match &r.adversary {
        Adversary::Hull { weights, .. } => {
            o.check(
                weights.len() == 2 && weights.iter().all(|w| (w - 0.5).abs() <= 1e-2),
                format!("adversary weights {weights:?}"),
            );
        }
        other => o.check(false, format!("adversary {other:?}")),
    }
    record(runs, "avqc identity/xconj", &r, &cfg);
    let took = start.elapsed();
    o.check(took < Duration::from_secs(60), format!("took {took:?}"));
    o
}

fn criterion_4(runs: &mut Runs) -> Outcome {
    let mut o = Outcome::new();
    let cfg = SolverConfig::with_tol(1e-3);
    let start = Instant::now();
    let mut rng = seeded(20240401);
    for i in 0..5 {
        let t = random_jammer(2, 2, 2, 2, &mut rng);
        let fq = solver::fqavc_ea_capacity(&t, &cfg).unwrap();
        let states = match &fq.adversary {
            Adversary::JammerStates { states, .. } => states.clone(),
            other => {
                o.check(false, format!("jammer {i}: adversary {other:?}"));
                continue;
            }
        };
        let active = ChannelSet::new(states.iter().map(|s| models::slice(&t, s).unwrap()).collect()).unwrap();
        let over_active = solver::compound_ea_capacity(&active, &cfg).unwrap();
        o.check(
            (fq.value - over_active.value).abs() <= 2.0 * cfg.tol,
            format!("jammer {i}: fqavc {} vs active compound {}", fq.value, over_active.value),
        );
        let basis = ChannelSet::basis_slices(&t).unwrap();
        let av = solver::avqc_ea_capacity(&basis, &cfg).unwrap();
        let co = solver::compound_ea_capacity(&basis, &cfg).unwrap();
        o.check(fq.value <= av.value + cfg.tol, format!("jammer {i}: fqavc {} > avqc {}", fq.value, av.value));
        o.check(av.value <= co.value + cfg.tol, format!("jammer {i}: avqc {} > compound {}", av.value, co.value));
        record(runs, format!("fqavc jammer {i}"), &fq, &cfg);
        record(runs, format!("active compound jammer {i}"), &over_active, &cfg);
        record(runs, format!("avqc basis jammer {i}"), &av, &cfg);
        record(runs, format!("compound basis jammer {i}"), &co, &cfg);
    }
    let took = start.elapsed();
    o.check(took < Duration::from_secs(600), format!("took {took:?}"));
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let t = models::cx_jammer();
    for family in ["comp", "xbasis", "dense"] {
        for n in 1..=3 {
            let name = format!("{family}:{n}");
            let scheme = builtin_scheme(&name).unwrap().unwrap();
            let cov = permutation_covariance_check(&t, &scheme, 100, 7).unwrap();
            o.check(
                cov.passed && cov.trials == 100 && cov.max_deviation <= 1e-10,
                format!("{name}: covariance deviation {:e}", cov.max_deviation),
            );
            let r = theorem3_bound_check(&t, &scheme).unwrap();
            o.check(r.lhs <= r.rhs + 1e-9 && r.bound_holds, format!("{name}: lhs {} > rhs {}", r.lhs, r.rhs));
            o.check(
                r.tau_error <= r.epsilon_comp + 1e-9 && r.mixture_holds,
                format!("{name}: tau error {} > tensor-power sup {}", r.tau_error, r.epsilon_comp),
            );
        }
    }
    let took = start.elapsed();
    o.check(took < Duration::from_secs(300), format!("took {took:?}"));
    o
}

fn swap(d: usize) -> Mat {
    Mat::from_fn(d * d, d * d, |r, c| real(if r == (c % d) * d + c / d { 1.0 } else { 0.0 }))
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let mut rng = seeded(6);
    for n in [2, 3] {
        let mut worst = f64::INFINITY;
        for _ in 0..100 {
            let rho = symmetrize_state(&random_density(1 << n, &mut rng), 2, n).unwrap();
            let c = definetti_bound_check(&rho, 2, n).unwrap();
            worst = worst.min(c.margin);
            o.check(c.holds, format!("n={n}: bound check failed"));
        }
        o.check(worst >= -1e-9, format!("n={n}: margin {worst:e}"));
    }
    let tau = definetti_state(2, 2).unwrap();
    let closed = linalg::identity(4) * real(0.2) + swap(2) * real(0.1);
    o.check(
        linalg::max_abs_diff(tau.matrix(), &closed) <= 1e-12,
        format!("tau differs from 0.2 I + 0.1 SWAP by {:e}", linalg::max_abs_diff(tau.matrix(), &closed)),
    );
    let mc = definetti_monte_carlo(2, 2, 100_000, &mut seeded(66)).unwrap();
    let distance = 0.5 * linalg::trace_norm_hermitian(&(tau.matrix() - mc.matrix()));
    o.check(distance <= 2e-3, format!("Monte Carlo trace distance {distance:e}"));
    let took = start.elapsed();
    o.check(took < Duration::from_secs(300), format!("took {took:?}"));
    o
}

/// max over input p, min over jammer mixture q, of I(p; W_q) for the adder,
/// on a grid with local refinement of the inner minimum.
fn adder_grid_saddle() -> f64 {
    let kernel = |q: f64| {
        // W_q(y|x) for y = x + s with Pr[s = 1] = q
        StochasticMatrix::from_rows(&[vec![1.0 - q, 0.0], vec![q, 1.0 - q], vec![0.0, q]]).unwrap()
    };
    let grid = 400;
    let inner = |p: f64| {
        let input = [1.0 - p, p];
        let f = |q: f64| classical_mutual_information(&input, &kernel(q)).unwrap();
        let (mut best_q, mut best) = (0.0, f64::INFINITY);
        for j in 0..=grid {
            let q = j as f64 / grid as f64;
            let v = f(q);
            if v < best {
                best = v;
                best_q = q;
            }
        }
        let (mut lo, mut hi) = ((best_q - 1.0 / grid as f64).max(0.0), (best_q + 1.0 / grid as f64).min(1.0));
        for _ in 0..60 {
            let (a, b) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
            if f(a) < f(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        best.min(f(0.5 * (lo + hi)))
    };
    (0..=grid).map(|i| inner(i as f64 / grid as f64)).fold(f64::NEG_INFINITY, f64::max)
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let cfg = SolverConfig::with_tol(1e-3);
    let start = Instant::now();
    let r = solver::separation_report(&models::adder_avc(), &cfg).unwrap();
    o.check(r.symmetrizability.symmetrizable, "adder not symmetrizable");
    match &r.symmetrizability.certificate {
        SymmetrizabilityCertificate::Symmetrizer(u) => {
            let dev = (0..2)
                .flat_map(|s| (0..2).map(move |x| (s, x)))
                .map(|(s, x)| (u.get(s, x) - if s == x { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max);
            o.check(dev <= 1e-9, format!("symmetrizer differs from identity by {dev:e}"));
        }
        other => o.check(false, format!("certificate {other:?}")),
    }
    let oracle = adder_grid_saddle();
    o.check((oracle - 0.5).abs() <= 1e-3, format!("grid saddle oracle {oracle}"));
    o.check((r.compound.value - oracle).abs() <= 1e-3, format!("compound {} vs oracle {oracle}", r.compound.value));
    o.check(r.fqavc_ea.value >= 0.5 - 1e-3, format!("fqavc {}", r.fqavc_ea.value));
    o.check(r.separation, "separation flag false");
    let took = start.elapsed();
    o.check(took < Duration::from_secs(120), format!("took {took:?}"));
    o
}

fn criterion_8(runs: &Runs) -> Outcome {
    let mut o = Outcome::new();
    let mut rng = seeded(8);
    for i in 0..20 {
        let d = 2 + i % 2;
        let t = random_channel(d, 2 + i % 3, 2, &mut rng);
        let rho = random_density(d, &mut rng).mix(&DensityMatrix::maximally_mixed(d), 0.7).unwrap();
        let dir = random_traceless_hermitian(d, &mut rng);
        let dir = &dir / real(linalg::hermitian_norm(&dir));
        let h = 1e-5;
        let at = |s: f64| {
            let m = linalg::hermitize(&(rho.matrix() + &dir * real(s)));
            mi_of_input(&DensityMatrix::new(m).unwrap(), &t).unwrap()
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let analytic = linalg::trace_product_re(&mi_gradient(&rho, &t).unwrap(), &dir);
        o.check(
            (fd - analytic).abs() <= 1e-5 * analytic.abs().max(1.0),
            format!("gradient instance {i}: {analytic} vs {fd}"),
        );
    }
    for (label, r, tol) in runs {
        o.check(r.converged && r.gap <= *tol, format!("{label}: converged {} gap {:e}", r.converged, r.gap));
    }
    let bin = env!("CARGO_BIN_EXE_qavcap");
    let commands: [&[&str]; 3] = [
        &["fqavc", "--channel", "cx-jammer", "--seed", "5", "--restarts", "3"],
        &["separation-report", "--kernel", "adder"],
        &["definetti-check", "--n", "2", "--samples", "2000", "--seed", "9"],
    ];
    for args in commands {
        let run = || Command::new(bin).args(args).env_remove("QAVCAP_THREADS").output().unwrap();
        let (a, b) = (run(), run());
        o.check(a.status.success() && a.stdout == b.stdout, format!("`{}` not reproducible", args.join(" ")));
    }
    o
}

fn main() -> ExitCode {
    let mut runs = Runs::new();
    let mut failures = 0;
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Runs) -> Outcome>)> = vec![
        ("1 single-channel capacities", Box::new(criterion_1)),
        ("2 compound capacity", Box::new(criterion_2)),
        ("3 arbitrarily varying capacity", Box::new(criterion_3)),
        ("4 jammer channel reduction", Box::new(criterion_4)),
        ("5 randomized-code bound chain", Box::new(|_: &mut Runs| criterion_5())),
        ("6 de Finetti bound", Box::new(|_: &mut Runs| criterion_6())),
        ("7 adder separation", Box::new(|_: &mut Runs| criterion_7())),
        ("8 numerical hygiene", Box::new(|r: &mut Runs| criterion_8(r))),
    ];
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run(&mut runs);
        let secs = start.elapsed().as_secs_f64();
        if o.ok {
            println!("PASS criterion {name} ({secs:.2} s)");
        } else {
            failures += 1;
            println!("FAIL criterion {name} ({secs:.2} s): {}", o.detail);
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
