//! File formats: channels, jammer channels, classical kernels, coding
//! schemes and states as JSON, plus the JSON/CSV writers used for reports.
//!
//! Matrices are row-major lists of rows with entries `[re, im]`. Floats are
//! written with 17 significant digits so every value reads back bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use qavcap_core::lab::{builtin_scheme, CodingScheme};
use qavcap_core::linalg::{Mat, C64};
use qavcap_core::models::{self, StandardChannel};
use qavcap_core::{AvcKernel, DensityMatrix, JammerChannel, PureState, QuantumChannel, StochasticMatrix};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Error;

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub d_in: usize,
    pub d_out: usize,
    #[serde(rename = "d_A", default, skip_serializing_if = "Option::is_none")]
    pub d_a: Option<usize>,
    #[serde(rename = "d_S", default, skip_serializing_if = "Option::is_none")]
    pub d_s: Option<usize>,
    pub kraus: Vec<MatrixJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelFile {
    #[serde(rename = "X")]
    pub x: usize,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "Y")]
    pub y: usize,
    /// `W[y][x][s]`.
    #[serde(rename = "W")]
    pub w: Vec<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticFile {
    #[serde(rename = "X")]
    pub x: usize,
    #[serde(rename = "Y")]
    pub y: usize,
    /// `W[y][x]`.
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
}

/// `phi` is the `k × k` amplitude matrix of the shared state,
/// `|φ> = Σ phi[i][j] |i>|j>`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub phi: MatrixJson,
    pub encoder: ChannelFile,
    pub decoder: ChannelFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub rho: MatrixJson,
}

/// Anything `load_channel` can return.
#[derive(Debug, Clone)]
pub enum Loaded {
    Channel(QuantumChannel),
    Jammer(JammerChannel),
    Kernel(AvcKernel),
    Stochastic(StochasticMatrix),
}

impl Loaded {
    pub fn kind(&self) -> &'static str {
        match self {
            Loaded::Channel(_) => "channel",
            Loaded::Jammer(_) => "jammer channel",
            Loaded::Kernel(_) => "AVC kernel",
            Loaded::Stochastic(_) => "stochastic matrix",
        }
    }
}

pub fn matrix_to_json(m: &Mat) -> MatrixJson {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson, what: &str) -> Result<Mat, String> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(format!("{what}: matrix must be nonempty"));
    }
    if let Some((r, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != ncols) {
        return Err(format!("{what}: row {r} has {} entries, expected {ncols}", row.len()));
    }
    if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(format!("{what}: non-finite entry"));
    }
    Ok(Mat::from_fn(nrows, ncols, |r, c| C64::new(rows[r][c][0], rows[r][c][1])))
}

pub fn channel_to_file(t: &QuantumChannel) -> ChannelFile {
    ChannelFile {
        d_in: t.d_in(),
        d_out: t.d_out(),
        d_a: None,
        d_s: None,
        kraus: t.kraus().iter().map(matrix_to_json).collect(),
    }
}

pub fn jammer_to_file(t: &JammerChannel) -> ChannelFile {
    ChannelFile {
        d_a: Some(t.d_a()),
        d_s: Some(t.d_s()),
        ..channel_to_file(t.map())
    }
}

pub fn kernel_to_file(w: &AvcKernel) -> KernelFile {
    KernelFile {
        x: w.x(),
        s: w.s(),
        y: w.y(),
        w: w.nested(),
    }
}

pub fn stochastic_to_file(w: &StochasticMatrix) -> StochasticFile {
    StochasticFile {
        x: w.inputs(),
        y: w.outputs(),
        w: w.rows(),
    }
}

pub fn scheme_to_file(s: &CodingScheme) -> SchemeFile {
    let k = s.k();
    let amp = s.phi().amplitudes();
    SchemeFile {
        n: s.n(),
        m: s.m(),
        k,
        phi: (0..k).map(|i| (0..k).map(|j| [amp[i * k + j].re, amp[i * k + j].im]).collect()).collect(),
        encoder: channel_to_file(s.encoder()),
        decoder: channel_to_file(s.decoder()),
    }
}

pub fn state_to_file(rho: &DensityMatrix) -> StateFile {
    StateFile {
        rho: matrix_to_json(rho.matrix()),
    }
}

fn channel_from_file(f: &ChannelFile, source: &str) -> Result<Loaded, Error> {
    let schema = |message: String| Error::Schema {
        origin: source.to_string(),
        message,
    };
    if f.kraus.is_empty() {
        return Err(schema("`kraus` must list at least one operator".into()));
    }
    let mut kraus = Vec::with_capacity(f.kraus.len());
    for (i, k) in f.kraus.iter().enumerate() {
        let m = matrix_from_json(k, &format!("kraus[{i}]")).map_err(schema)?;
        if m.nrows() != f.d_out || m.ncols() != f.d_in {
            return Err(schema(format!(
                "kraus[{i}] is {}x{}, expected d_out x d_in = {}x{}",
                m.nrows(),
                m.ncols(),
                f.d_out,
                f.d_in
            )));
        }
        kraus.push(m);
    }
    let invalid = |error| Error::Invalid {
        origin: source.to_string(),
        error,
    };
    let t = QuantumChannel::new(kraus).map_err(invalid)?;
    match (f.d_a, f.d_s) {
        (None, None) => Ok(Loaded::Channel(t)),
        (Some(d_a), Some(d_s)) => JammerChannel::new(t, d_a, d_s).map(Loaded::Jammer).map_err(invalid),
        _ => Err(schema("`d_A` and `d_S` must be given together".into())),
    }
}

fn kernel_from_file(f: &KernelFile, source: &str) -> Result<AvcKernel, Error> {
    AvcKernel::from_nested(f.x, f.s, f.y, &f.w).map_err(|error| Error::Invalid {
        origin: source.to_string(),
        error,
    })
}

fn stochastic_from_file(f: &StochasticFile, source: &str) -> Result<StochasticMatrix, Error> {
    let invalid = |error| Error::Invalid {
        origin: source.to_string(),
        error,
    };
    let w = StochasticMatrix::from_rows(&f.w).map_err(invalid)?;
    if w.outputs() != f.y || w.inputs() != f.x {
        return Err(Error::Schema {
            origin: source.to_string(),
            message: format!("`W` is {}x{}, expected Y x X = {}x{}", w.outputs(), w.inputs(), f.y, f.x),
        });
    }
    Ok(w)
}

fn scheme_from_file(f: &SchemeFile, source: &str) -> Result<CodingScheme, Error> {
    let schema = |message: String| Error::Schema {
        origin: source.to_string(),
        message,
    };
    let invalid = |error| Error::Invalid {
        origin: source.to_string(),
        error,
    };
    let phi = matrix_from_json(&f.phi, "phi").map_err(schema)?;
    if phi.nrows() != f.k || phi.ncols() != f.k {
        return Err(schema(format!("phi is {}x{}, expected k x k = {}x{}", phi.nrows(), phi.ncols(), f.k, f.k)));
    }
    let amp = qavcap_core::linalg::CVec::from_fn(f.k * f.k, |i, _| phi[(i / f.k, i % f.k)]);
    let phi = PureState::new(amp).map_err(invalid)?;
    let encoder = match channel_from_file(&f.encoder, source)? {
        Loaded::Channel(t) => t,
        _ => return Err(schema("encoder must not declare d_A/d_S".into())),
    };
    let decoder = match channel_from_file(&f.decoder, source)? {
        Loaded::Channel(t) => t,
        _ => return Err(schema("decoder must not declare d_A/d_S".into())),
    };
    CodingScheme::new(f.n, f.m, f.k, phi, encoder, decoder).map_err(invalid)
}

fn state_from_file(f: &StateFile, source: &str) -> Result<DensityMatrix, Error> {
    let m = matrix_from_json(&f.rho, "rho").map_err(|message| Error::Schema {
        origin: source.to_string(),
        message,
    })?;
    DensityMatrix::new(m).map_err(|error| Error::Invalid {
        origin: source.to_string(),
        error,
    })
}

fn parse_unit(text: &str) -> Option<f64> {
    text.parse::<f64>().ok().filter(|p| (0.0..=1.0).contains(p))
}

/// Named instances usable wherever a file path is accepted.
pub fn builtin(name: &str) -> Option<Result<Loaded, Error>> {
    let wrap = |r: qavcap_core::Result<QuantumChannel>| {
        r.map(Loaded::Channel).map_err(|error| Error::Invalid {
            origin: name.to_string(),
            error,
        })
    };
    let (kind, arg) = name.split_once(':').unwrap_or((name, ""));
    let out = match (kind, arg) {
        ("identity2", "") => wrap(models::standard_channel(&StandardChannel::Identity { d: 2 })),
        ("xconj", "") => wrap(QuantumChannel::unitary(models::pauli_x())),
        ("depol", p) => {
            let p = parse_unit(p)?;
            wrap(models::standard_channel(&StandardChannel::Depolarizing { d: 2, p }))
        }
        ("erasure", p) => {
            let p = parse_unit(p)?;
            wrap(models::standard_channel(&StandardChannel::Erasure { d: 2, p }))
        }
        ("dephasing", p) => {
            let p = parse_unit(p)?;
            wrap(models::standard_channel(&StandardChannel::Dephasing { d: 2, p }))
        }
        ("cx-jammer", "") => Ok(Loaded::Jammer(models::cx_jammer())),
        ("adder", "") => Ok(Loaded::Kernel(models::adder_avc())),
        ("bsc", f) => {
            let f = parse_unit(f)?;
            StochasticMatrix::bsc(f).map(Loaded::Stochastic).map_err(|error| Error::Invalid {
                origin: name.to_string(),
                error,
            })
        }
        _ => return None,
    };
    Some(out)
}

pub const BUILTIN_NAMES: &str =
    "Built-in instances: identity2, xconj, depol:<p>, erasure:<p>, dephasing:<p>, cx-jammer, adder, bsc:<f>; schemes comp:<n>, xbasis:<n>, dense:<n>";

fn read(path: &str) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_string(),
        message: e.to_string(),
    })
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, source: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        origin: source.to_string(),
        message: e.to_string(),
    })
}

/// Loads a channel, jammer channel, AVC kernel or stochastic matrix from a
/// built-in name or a JSON file, enforcing every type invariant.
pub fn load_channel(spec: &str) -> Result<Loaded, Error> {
    if let Some(b) = builtin(spec) {
        return b;
    }
    let text = read(spec)?;
    let value: Value = parse(&text, spec)?;
    let obj = value.as_object().ok_or_else(|| Error::Schema {
        origin: spec.to_string(),
        message: "expected a JSON object".into(),
    })?;
    if obj.contains_key("kraus") {
        channel_from_file(&parse(&text, spec)?, spec)
    } else if obj.contains_key("W") && obj.contains_key("S") {
        kernel_from_file(&parse(&text, spec)?, spec).map(Loaded::Kernel)
    } else if obj.contains_key("W") {
        stochastic_from_file(&parse(&text, spec)?, spec).map(Loaded::Stochastic)
    } else {
        Err(Error::Schema {
            origin: spec.to_string(),
            message: "expected a channel (`kraus`) or a kernel (`W`)".into(),
        })
    }
}

pub fn load_scheme(spec: &str) -> Result<CodingScheme, Error> {
    if let Some(b) = builtin_scheme(spec) {
        return b.map_err(|error| Error::Invalid {
            origin: spec.to_string(),
            error,
        });
    }
    let text = read(spec)?;
    scheme_from_file(&parse(&text, spec)?, spec)
}

pub fn load_state(spec: &str) -> Result<DensityMatrix, Error> {
    let text = read(spec)?;
    state_from_file(&parse(&text, spec)?, spec)
}

pub fn save<T: Serialize>(value: &T, path: &Path) -> Result<(), Error> {
    let v = serde_json::to_value(value).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    write_file(path, &to_json(&v))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// 17 significant digits, positional for moderate exponents.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        format!("{:.*}", (16 - exp) as usize, x)
    } else {
        format!("{mantissa}e{exp}")
    }
}

fn write_number(out: &mut String, n: &serde_json::Number) {
    if let Some(u) = n.as_u64() {
        let _ = write!(out, "{u}");
    } else if let Some(i) = n.as_i64() {
        let _ = write!(out, "{i}");
    } else {
        out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
    }
}

fn is_leaf_array(items: &[Value]) -> bool {
    items.iter().all(|v| !v.is_array() && !v.is_object())
}

fn write_value(out: &mut String, v: &Value, indent: Option<usize>) {
    let newline = |out: &mut String, level: usize| {
        out.push('\n');
        out.extend(std::iter::repeat_n(' ', 2 * level));
    };
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => write_number(out, n),
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            out.push('[');
            // numeric rows stay on one line
            let inline = indent.is_none() || is_leaf_array(items);
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                    if inline && indent.is_some() {
                        out.push(' ');
                    }
                }
                if !inline {
                    newline(out, indent.unwrap() + 1);
                }
                write_value(out, item, indent.map(|l| l + 1));
            }
            if !inline && !items.is_empty() {
                newline(out, indent.unwrap());
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (key, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if let Some(level) = indent {
                    newline(out, level + 1);
                }
                out.push_str(&serde_json::to_string(key).expect("key"));
                out.push(':');
                if indent.is_some() {
                    out.push(' ');
                }
                write_value(out, item, indent.map(|l| l + 1));
            }
            if let Some(level) = indent {
                if !map.is_empty() {
                    newline(out, level);
                }
            }
            out.push('}');
        }
    }
}

/// Indented JSON with keys in sorted order and a trailing newline.
pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, Some(0));
    out.push('\n');
    out
}

/// Single-line JSON, no trailing newline.
pub fn to_json_line(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, None);
    out
}

/// `metric,value` table.
pub fn to_csv(rows: &[(String, Value)]) -> String {
    let mut out = String::from("metric,value\n");
    for (metric, value) in rows {
        let cell = match value {
            Value::Number(n) => {
                let mut s = String::new();
                write_number(&mut s, n);
                s
            }
            Value::String(s) => s.clone(),
            other => to_json_line(other),
        };
        let _ = writeln!(out, "{metric},{cell}");
    }
    out
}
