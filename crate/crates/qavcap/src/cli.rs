//! Argument parsing and dispatch. Exit codes: 0 success, 1 domain error
//! (one JSON line on standard error), 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};
use qavcap_core::lab::{self, CodingScheme};
use qavcap_core::linalg;
use qavcap_core::models::embed_kernel;
use qavcap_core::random::{random_density, seeded};
use qavcap_core::solver::{self, Adversary, SolverConfig};
use qavcap_core::subsystem::symmetric_dimension;
use qavcap_core::{AvcKernel, ChannelSet, JammerChannel, QuantumChannel, StochasticMatrix};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::io::{self, Loaded};
use crate::report::{self, DeFinettiOutcome, Format, Report};
use crate::Error;

#[derive(Debug, Parser)]
#[command(
    name = "qavcap",
    version,
    about = "Entanglement-assisted capacities of compound, arbitrarily varying and jammer channels",
    after_help = io::BUILTIN_NAMES
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Certified gap target.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    #[arg(long = "inner-tol")]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// JSON file with solver settings; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (standard output if absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, env = "QAVCAP_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement-assisted capacity of one channel.
    EaCapacity {
        #[arg(long)]
        channel: String,
        #[command(flatten)]
        common: Common,
    },
    /// Compound capacity over a finite set of channels.
    Compound {
        #[arg(long, required = true)]
        channel: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Arbitrarily varying capacity over the convex hull of a set.
    Avqc {
        #[arg(long, required = true)]
        channel: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Capacity of a jammer channel (an AVC kernel is embedded first).
    Fqavc {
        #[arg(long)]
        channel: String,
        #[command(flatten)]
        common: Common,
    },
    /// Single-letter compound capacity of classical kernels.
    ClassicalCompound {
        #[arg(long, required = true)]
        kernel: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Symmetrizability of a classical AVC kernel, with certificate.
    Symmetrizable {
        #[arg(long)]
        kernel: String,
        #[command(flatten)]
        common: Common,
    },
    /// Symmetrizability, compound value and embedded capacity side by side.
    SeparationReport {
        #[arg(long)]
        kernel: String,
        /// Directory for intermediate artifacts.
        #[arg(long)]
        bundle: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Error operator of a coding scheme on a jammer channel.
    ErrorOperator {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        scheme: String,
        /// Average over all permutations of the channel uses first.
        #[arg(long)]
        symmetrize: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Worst entangled jammer state for a coding scheme.
    WorstJammer {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        symmetrize: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Operator bound of a permutation-invariant state by the de Finetti state.
    DefinettiCheck {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// State file; a random symmetrized state from `--seed` if absent.
        #[arg(long)]
        state: Option<String>,
        /// Compare the exact state with a Monte Carlo average of this size.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Randomized-code bound chain for a scheme on a jammer channel.
    Theorem3Check {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        scheme: String,
        /// Also run this many permutation covariance trials.
        #[arg(long, default_value_t = 0)]
        covariance_trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Load an input and report its invariant diagnostics.
    #[command(group(ArgGroup::new("input").required(true).args(["channel", "kernel", "scheme", "state"])))]
    Validate {
        #[arg(long)]
        channel: Option<String>,
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        state: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::EaCapacity { common, .. }
            | Command::Compound { common, .. }
            | Command::Avqc { common, .. }
            | Command::Fqavc { common, .. }
            | Command::ClassicalCompound { common, .. }
            | Command::Symmetrizable { common, .. }
            | Command::SeparationReport { common, .. }
            | Command::ErrorOperator { common, .. }
            | Command::WorstJammer { common, .. }
            | Command::DefinettiCheck { common, .. }
            | Command::Theorem3Check { common, .. }
            | Command::Validate { common, .. } => common,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    tol: Option<f64>,
    max_iter: Option<usize>,
    inner_tol: Option<f64>,
    seed: Option<u64>,
    restarts: Option<usize>,
}

/// Defaults, then the config file, then flags.
pub fn solver_config(common: &Common) -> Result<SolverConfig, Error> {
    let file = match &common.config {
        Some(path) => {
            let origin = path.display().to_string();
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: origin.clone(),
                message: e.to_string(),
            })?;
            serde_json::from_str::<ConfigFile>(&text).map_err(|e| Error::Parse {
                origin,
                message: e.to_string(),
            })?
        }
        None => ConfigFile::default(),
    };
    let d = SolverConfig::default();
    let cfg = SolverConfig {
        tol: common.tol.or(file.tol).unwrap_or(d.tol),
        max_iter: common.max_iter.or(file.max_iter).unwrap_or(d.max_iter),
        inner_tol: common.inner_tol.or(file.inner_tol).unwrap_or(d.inner_tol),
        seed: common.seed.or(file.seed).unwrap_or(d.seed),
        restarts: common.restarts.or(file.restarts).unwrap_or(d.restarts),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn wrong_kind(spec: &str, got: &Loaded, wanted: &str) -> Error {
    Error::Input(format!("{spec}: expected {wanted}, found {}", got.kind()))
}

fn quantum_channel(spec: &str) -> Result<QuantumChannel, Error> {
    match io::load_channel(spec)? {
        Loaded::Channel(t) => Ok(t),
        Loaded::Jammer(j) => Ok(j.map().clone()),
        other => Err(wrong_kind(spec, &other, "a quantum channel")),
    }
}

fn channel_set(specs: &[String]) -> Result<ChannelSet, Error> {
    let members = specs.iter().map(|s| quantum_channel(s)).collect::<Result<Vec<_>, _>>()?;
    Ok(ChannelSet::with_labels(members, specs.to_vec())?)
}

fn jammer(spec: &str) -> Result<JammerChannel, Error> {
    match io::load_channel(spec)? {
        Loaded::Jammer(j) => Ok(j),
        Loaded::Kernel(w) => Ok(embed_kernel(&w)),
        other => Err(wrong_kind(spec, &other, "a jammer channel or AVC kernel")),
    }
}

fn avc_kernel(spec: &str) -> Result<AvcKernel, Error> {
    match io::load_channel(spec)? {
        Loaded::Kernel(w) => Ok(w),
        other => Err(wrong_kind(spec, &other, "an AVC kernel")),
    }
}

fn classical_kernels(specs: &[String]) -> Result<Vec<StochasticMatrix>, Error> {
    let mut out = Vec::new();
    for spec in specs {
        match io::load_channel(spec)? {
            Loaded::Stochastic(w) => out.push(w),
            Loaded::Kernel(w) => out.extend(w.state_kernels()),
            other => return Err(wrong_kind(spec, &other, "a stochastic matrix or AVC kernel")),
        }
    }
    Ok(out)
}

fn scheme_for(channel: &str, scheme: &str) -> Result<(JammerChannel, CodingScheme), Error> {
    let t = jammer(channel)?;
    let s = io::load_scheme(scheme)?;
    s.check_channel(&t)?;
    Ok((t, s))
}

fn error_operator_for(t: &JammerChannel, s: &CodingScheme, symmetrize: bool) -> Result<lab::ErrorOperator, Error> {
    Ok(if symmetrize {
        lab::symmetrize_scheme(s, t)?
    } else {
        lab::build_error_operator(t, s)?
    })
}

fn diagnostics_fields(t: &QuantumChannel) -> Vec<(&'static str, Value)> {
    let d = t.diagnostics();
    vec![
        ("d_in", json!(t.d_in())),
        ("d_out", json!(t.d_out())),
        ("kraus_rank", json!(t.rank())),
        ("trace_preservation", json!(d.trace_preservation)),
        ("choi_min_eigenvalue", json!(d.choi_min_eigenvalue)),
        ("choi_marginal", json!(d.choi_marginal)),
    ]
}

fn validate(channel: Option<&str>, kernel: Option<&str>, scheme: Option<&str>, state: Option<&str>) -> Result<Report, Error> {
    if let Some(spec) = channel.or(kernel) {
        return Ok(match io::load_channel(spec)? {
            Loaded::Channel(t) => report::validation("channel", diagnostics_fields(&t)),
            Loaded::Jammer(j) => {
                let mut fields = vec![("d_A", json!(j.d_a())), ("d_S", json!(j.d_s())), ("d_B", json!(j.d_b()))];
                fields.extend(diagnostics_fields(j.map()));
                report::validation("jammer", fields)
            }
            Loaded::Kernel(w) => report::validation("avc_kernel", vec![("X", json!(w.x())), ("S", json!(w.s())), ("Y", json!(w.y()))]),
            Loaded::Stochastic(w) => report::validation("stochastic", vec![("X", json!(w.inputs())), ("Y", json!(w.outputs()))]),
        });
    }
    if let Some(spec) = scheme {
        let s = io::load_scheme(spec)?;
        let (enc, dec) = (s.encoder(), s.decoder());
        return Ok(report::validation(
            "scheme",
            vec![
                ("n", json!(s.n())),
                ("m", json!(s.m())),
                ("k", json!(s.k())),
                ("encoder_trace_preservation", json!(enc.trace_preservation())),
                ("decoder_trace_preservation", json!(dec.trace_preservation())),
            ],
        ));
    }
    let spec = state.expect("clap requires one input");
    let rho = io::load_state(spec)?;
    let values = rho.eigenvalues();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(report::validation(
        "state",
        vec![
            ("dim", json!(rho.dim())),
            ("min_eigenvalue", json!(min)),
            ("trace", json!(linalg::trace(rho.matrix()).re)),
            ("eigenvalues", json!(values)),
        ],
    ))
}

fn write_bundle(dir: &Path, w: &AvcKernel, r: &solver::SeparationReport, full: &Report) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    io::save(&io::kernel_to_file(w), &dir.join("kernel.json"))?;
    io::save(&io::jammer_to_file(&embed_kernel(w)), &dir.join("embedding.json"))?;
    io::save(&report::certificate(&r.symmetrizability), &dir.join("certificate.json"))?;
    io::save(&io::state_to_file(&r.compound.optimizer), &dir.join("compound_optimizer.json"))?;
    io::save(&io::state_to_file(&r.fqavc_ea.optimizer), &dir.join("optimizer_rho.json"))?;
    if let Adversary::JammerStates { worst, .. } = &r.fqavc_ea.adversary {
        io::save(&io::state_to_file(worst), &dir.join("sigma_star.json"))?;
    }
    io::write_file(&dir.join("report.json"), &io::to_json(&full.json))
}

pub fn dispatch(command: &Command) -> Result<Report, Error> {
    let common = command.common();
    let cfg = solver_config(common)?;
    Ok(match command {
        Command::EaCapacity { channel, .. } => {
            let t = quantum_channel(channel)?;
            report::solver("ea-capacity", &solver::ea_capacity(&t, &cfg)?, &cfg)
        }
        Command::Compound { channel, .. } => {
            let set = channel_set(channel)?;
            report::solver("compound", &solver::compound_ea_capacity(&set, &cfg)?, &cfg)
        }
        Command::Avqc { channel, .. } => {
            let set = channel_set(channel)?;
            report::solver("avqc", &solver::avqc_ea_capacity(&set, &cfg)?, &cfg)
        }
        Command::Fqavc { channel, .. } => {
            let t = jammer(channel)?;
            report::solver("fqavc", &solver::fqavc_ea_capacity(&t, &cfg)?, &cfg)
        }
        Command::ClassicalCompound { kernel, .. } => {
            let kernels = classical_kernels(kernel)?;
            report::solver("classical-compound", &solver::classical_compound_capacity(&kernels, &cfg)?, &cfg)
        }
        Command::Symmetrizable { kernel, .. } => report::symmetrizability(&solver::symmetrizability_check(&avc_kernel(kernel)?)?),
        Command::SeparationReport { kernel, bundle, .. } => {
            let w = avc_kernel(kernel)?;
            let r = solver::separation_report(&w, &cfg)?;
            let out = report::separation(&r, &cfg);
            if let Some(dir) = bundle {
                write_bundle(dir, &w, &r, &out)?;
            }
            out
        }
        Command::ErrorOperator {
            channel, scheme, symmetrize, ..
        } => {
            let (t, s) = scheme_for(channel, scheme)?;
            report::error_operator(&error_operator_for(&t, &s, *symmetrize)?, *symmetrize)
        }
        Command::WorstJammer {
            channel, scheme, symmetrize, ..
        } => {
            let (t, s) = scheme_for(channel, scheme)?;
            let f = error_operator_for(&t, &s, *symmetrize)?;
            let (value, sigma) = lab::worst_case_jammer(&f);
            report::worst_jammer(&f, value, &sigma, *symmetrize)
        }
        Command::DefinettiCheck { d, n, state, samples, .. } => {
            let dim = d.checked_pow(*n as u32).ok_or(qavcap_core::Error::BlockLengthTooLarge(*n))?;
            let rho = match state {
                Some(spec) => io::load_state(spec)?,
                None => lab::symmetrize_state(&random_density(dim, &mut seeded(cfg.seed)), *d, *n)?,
            };
            let check = lab::definetti_bound_check(&rho, *d, *n)?;
            let tau = lab::definetti_state(*d, *n)?;
            let monte_carlo = match samples {
                Some(count) => {
                    let mc = lab::definetti_monte_carlo(*d, *n, *count, &mut seeded(cfg.seed))?;
                    let distance = 0.5 * linalg::trace_norm_hermitian(&(tau.matrix() - mc.matrix()));
                    Some((*count, distance))
                }
                None => None,
            };
            report::definetti(&DeFinettiOutcome {
                d: *d,
                n: *n,
                check: &check,
                symmetric_factor: symmetric_dimension(d * d, *n),
                tau: &tau,
                monte_carlo,
            })
        }
        Command::Theorem3Check {
            channel,
            scheme,
            covariance_trials,
            ..
        } => {
            let (t, s) = scheme_for(channel, scheme)?;
            let r = lab::theorem3_bound_check(&t, &s)?;
            let covariance = match covariance_trials {
                0 => None,
                &trials => Some(lab::permutation_covariance_check(&t, &s, trials, cfg.seed)?),
            };
            report::theorem3(&r, covariance.as_ref())
        }
        Command::Validate {
            channel, kernel, scheme, state, ..
        } => validate(channel.as_deref(), kernel.as_deref(), scheme.as_deref(), state.as_deref())?,
    })
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let common = cli.command.common();
    let result = dispatch(&cli.command).and_then(|r| report::emit_report(&r, common.format, common.output.as_deref()));
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            1
        }
    }
}
