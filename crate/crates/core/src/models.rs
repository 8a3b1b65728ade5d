//! Channel families: standard channels, jammer channels and their slices,
//! convex mixtures, and classical kernels with their quantum embeddings.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{JammerChannel, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, real, Mat, C64};
use crate::state::{self, DensityMatrix};

/// Tolerance on classical kernel normalization.
pub const KERNEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum StandardChannel {
    Identity { d: usize },
    /// `ρ ↦ (1-p) ρ + p I/d`.
    Depolarizing { d: usize, p: f64 },
    /// Output dimension `d + 1`, the flag `|e>` being the last basis vector.
    Erasure { d: usize, p: f64 },
    /// `ρ ↦ (1-p) ρ + p Σ_i |i><i| ρ |i><i|`.
    Dephasing { d: usize, p: f64 },
    Unitary(Mat),
}

fn check_unit(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidParameter { name, value: p });
    }
    Ok(())
}

fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidParameter {
            name: "dimension",
            value: d as f64,
        });
    }
    Ok(())
}

/// Generalized Pauli `X^a Z^b` on `C^d`.
pub fn weyl(d: usize, a: usize, b: usize) -> Mat {
    let mut w = Mat::zeros(d, d);
    for k in 0..d {
        let phase = C64::from_polar(1.0, 2.0 * core::f64::consts::PI * ((b * k) % d) as f64 / d as f64);
        w[((k + a) % d, k)] = phase;
    }
    w
}

pub fn standard_channel(kind: &StandardChannel) -> Result<QuantumChannel> {
    match *kind {
        StandardChannel::Identity { d } => {
            check_dim(d)?;
            Ok(QuantumChannel::identity(d))
        }
        StandardChannel::Depolarizing { d, p } => {
            check_dim(d)?;
            check_unit("p", p)?;
            let dd = (d * d) as f64;
            let mut kraus = vec![linalg::identity(d) * real((1.0 - p + p / dd).sqrt())];
            let w = real(p.sqrt() / d as f64);
            for a in 0..d {
                for b in 0..d {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    kraus.push(weyl(d, a, b) * w);
                }
            }
            QuantumChannel::new(kraus)
        }
        StandardChannel::Erasure { d, p } => {
            check_dim(d)?;
            check_unit("p", p)?;
            let mut keep = Mat::zeros(d + 1, d);
            for i in 0..d {
                keep[(i, i)] = real((1.0 - p).sqrt());
            }
            let mut kraus = vec![keep];
            for i in 0..d {
                let mut e = Mat::zeros(d + 1, d);
                e[(d, i)] = real(p.sqrt());
                kraus.push(e);
            }
            QuantumChannel::new(kraus)
        }
        StandardChannel::Dephasing { d, p } => {
            check_dim(d)?;
            check_unit("p", p)?;
            let mut kraus = vec![linalg::identity(d) * real((1.0 - p).sqrt())];
            for i in 0..d {
                kraus.push(linalg::basis_projector(d, i) * real(p.sqrt()));
            }
            QuantumChannel::new(kraus)
        }
        StandardChannel::Unitary(ref u) => {
            linalg::ensure_square(u)?;
            check_dim(u.nrows())?;
            QuantumChannel::unitary(u.clone())
        }
    }
}

pub fn pauli_x() -> Mat {
    linalg::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

/// `K ⊗ <s|` as a map `A ⊗ S → B`.
fn attach_bra(k: &Mat, d_s: usize, s: usize) -> Mat {
    let mut out = Mat::zeros(k.nrows(), k.ncols() * d_s);
    for b in 0..k.nrows() {
        for a in 0..k.ncols() {
            out[(b, a * d_s + s)] = k[(b, a)];
        }
    }
    out
}

/// Jammer whose control register `S` is measured in the computational basis
/// and selects `channels[s]`. Basis slices reproduce the members exactly.
pub fn classically_controlled(channels: &[QuantumChannel]) -> Result<JammerChannel> {
    let first = channels.first().ok_or(Error::Empty("controlled channel list"))?;
    let (d_a, d_b) = (first.d_in(), first.d_out());
    let d_s = channels.len();
    let mut kraus = Vec::new();
    for (s, ch) in channels.iter().enumerate() {
        if ch.d_in() != d_a || ch.d_out() != d_b {
            return Err(Error::DimensionMismatch {
                axis: "controlled channel dimensions",
                expected: d_a,
                found: ch.d_in(),
            });
        }
        for k in ch.kraus() {
            kraus.push(attach_bra(k, d_s, s));
        }
    }
    JammerChannel::new(QuantumChannel::new(kraus)?, d_a, d_s)
}

/// `T(ρ ⊗ σ) = Tr_S[U (ρ ⊗ σ) U†]` with `U = Σ_s V_s ⊗ |s><s|`.
pub fn controlled_jammer(unitaries: &[Mat]) -> Result<JammerChannel> {
    let first = unitaries.first().ok_or(Error::Empty("unitary list"))?;
    let d = first.nrows();
    let mut channels = Vec::with_capacity(unitaries.len());
    for u in unitaries {
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch {
                axis: "controlled unitary dimension",
                expected: d,
                found: u.nrows().max(u.ncols()),
            });
        }
        channels.push(QuantumChannel::unitary(u.clone())?);
    }
    classically_controlled(&channels)
}

/// The controlled-X jammer `{I, X}` on a qubit.
pub fn cx_jammer() -> JammerChannel {
    controlled_jammer(&[linalg::identity(2), pauli_x()]).expect("valid unitaries")
}

/// `T(ρ ⊗ σ) = T₀(ρ) Tr σ`.
pub fn jammer_ignoring(t0: &QuantumChannel, d_s: usize) -> Result<JammerChannel> {
    if d_s == 0 {
        return Err(Error::Empty("jammer system"));
    }
    let mut kraus = Vec::new();
    for s in 0..d_s {
        for k in t0.kraus() {
            kraus.push(attach_bra(k, d_s, s));
        }
    }
    JammerChannel::new(QuantumChannel::new(kraus)?, t0.d_in(), d_s)
}

/// The `d_S²` Choi blocks `C^{(s,s')}` with `J(T_σ) = Σ_{ss'} σ_{ss'} C^{(s,s')}`,
/// returned row-major in `(s, s')`.
pub fn slice_choi_blocks(t: &JammerChannel) -> Vec<Mat> {
    let (d_a, d_s, d_b) = (t.d_a(), t.d_s(), t.d_b());
    let choi = t.map().choi();
    let n = d_a * d_b;
    let mut blocks = Vec::with_capacity(d_s * d_s);
    for s in 0..d_s {
        for sp in 0..d_s {
            let mut c = Mat::zeros(n, n);
            for a in 0..d_a {
                for ap in 0..d_a {
                    for b in 0..d_b {
                        for bp in 0..d_b {
                            c[(a * d_b + b, ap * d_b + bp)] =
                                choi[((a * d_s + s) * d_b + b, (ap * d_s + sp) * d_b + bp)];
                        }
                    }
                }
            }
            blocks.push(c);
        }
    }
    blocks
}

/// Choi matrix of `T_σ`, affine in `σ` (no validation of `σ`).
pub fn slice_choi(t: &JammerChannel, sigma: &Mat) -> Result<Mat> {
    let d_s = t.d_s();
    if sigma.nrows() != d_s || sigma.ncols() != d_s {
        return Err(Error::DimensionMismatch {
            axis: "jammer state",
            expected: d_s,
            found: sigma.nrows(),
        });
    }
    let blocks = slice_choi_blocks(t);
    let n = t.d_a() * t.d_b();
    let mut out = Mat::zeros(n, n);
    for s in 0..d_s {
        for sp in 0..d_s {
            out += &blocks[s * d_s + sp] * sigma[(s, sp)];
        }
    }
    Ok(out)
}

/// The channel `T_σ(ρ) = T(ρ ⊗ σ)`, obtained by contracting the Choi matrix
/// against `σ` on the jammer factor.
pub fn slice(t: &JammerChannel, sigma: &DensityMatrix) -> Result<QuantumChannel> {
    let choi = slice_choi(t, sigma.matrix())?;
    QuantumChannel::from_choi(&choi, t.d_a(), t.d_b())
}

/// Nonempty list of channels with common input and output dimensions.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    members: Vec<QuantumChannel>,
    labels: Vec<String>,
}

impl ChannelSet {
    pub fn new(members: Vec<QuantumChannel>) -> Result<Self> {
        let labels = (0..members.len()).map(|j| alloc::format!("T{j}")).collect();
        Self::with_labels(members, labels)
    }

    pub fn with_labels(members: Vec<QuantumChannel>, labels: Vec<String>) -> Result<Self> {
        let first = members.first().ok_or(Error::Empty("channel set"))?;
        let (d_in, d_out) = (first.d_in(), first.d_out());
        for m in &members {
            if m.d_in() != d_in {
                return Err(Error::DimensionMismatch {
                    axis: "channel set d_in",
                    expected: d_in,
                    found: m.d_in(),
                });
            }
            if m.d_out() != d_out {
                return Err(Error::DimensionMismatch {
                    axis: "channel set d_out",
                    expected: d_out,
                    found: m.d_out(),
                });
            }
        }
        if labels.len() != members.len() {
            return Err(Error::DimensionMismatch {
                axis: "channel set labels",
                expected: members.len(),
                found: labels.len(),
            });
        }
        Ok(Self { members, labels })
    }

    pub fn single(t: QuantumChannel) -> Self {
        Self::new(vec![t]).expect("nonempty")
    }

    pub fn members(&self) -> &[QuantumChannel] {
        &self.members
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn d_in(&self) -> usize {
        self.members[0].d_in()
    }

    pub fn d_out(&self) -> usize {
        self.members[0].d_out()
    }

    /// Slices of a jammer at the computational basis states of `S`.
    pub fn basis_slices(t: &JammerChannel) -> Result<Self> {
        let d_s = t.d_s();
        let members = (0..d_s)
            .map(|s| slice(t, &DensityMatrix::basis(d_s, s)))
            .collect::<Result<Vec<_>>>()?;
        let labels = (0..d_s).map(|s| alloc::format!("sigma=|{s}><{s}|")).collect();
        Self::with_labels(members, labels)
    }
}

/// `Σ_j w_j T_j`, realized by concatenating scaled Kraus lists.
pub fn convex_mix(set: &ChannelSet, weights: &[f64]) -> Result<QuantumChannel> {
    if weights.len() != set.len() {
        return Err(Error::DimensionMismatch {
            axis: "mixture weights",
            expected: set.len(),
            found: weights.len(),
        });
    }
    state::check_probability(weights, "mixture weights", KERNEL_TOL)?;
    let mut kraus = Vec::new();
    for (m, &w) in set.members().iter().zip(weights) {
        if w <= 0.0 {
            continue;
        }
        let s = real(w.sqrt());
        kraus.extend(m.kraus().iter().map(|k| k * s));
    }
    QuantumChannel::new(kraus)
}

fn check_entries(w: &[f64], what: &'static str) -> Result<()> {
    if let Some(&bad) = w.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::NegativeProbability { what, value: bad });
    }
    Ok(())
}

/// Classical channel `W(y|x)`: rows indexed by outputs, columns by inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    outputs: usize,
    inputs: usize,
    /// Row-major: `w[y * inputs + x]`.
    w: Vec<f64>,
}

impl StochasticMatrix {
    pub fn new(outputs: usize, inputs: usize, w: Vec<f64>) -> Result<Self> {
        if outputs == 0 || inputs == 0 {
            return Err(Error::Empty("alphabet"));
        }
        if w.len() != outputs * inputs {
            return Err(Error::DimensionMismatch {
                axis: "stochastic matrix entries",
                expected: outputs * inputs,
                found: w.len(),
            });
        }
        check_entries(&w, "stochastic matrix")?;
        for x in 0..inputs {
            let s: f64 = (0..outputs).map(|y| w[y * inputs + x]).sum();
            if (s - 1.0).abs() > KERNEL_TOL {
                return Err(Error::Normalization {
                    what: "stochastic matrix column",
                    sum: s,
                });
            }
        }
        Ok(Self { outputs, inputs, w })
    }

    /// From rows `W[y][x]`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let outputs = rows.len();
        let inputs = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != inputs) {
            return Err(Error::DimensionMismatch {
                axis: "stochastic matrix row length",
                expected: inputs,
                found: rows.iter().map(|r| r.len()).find(|&l| l != inputs).unwrap_or(0),
            });
        }
        Self::new(outputs, inputs, rows.concat())
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.w[y * self.inputs + x]
    }

    pub fn column(&self, x: usize) -> Vec<f64> {
        (0..self.outputs).map(|y| self.get(y, x)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.w.chunks(self.inputs).map(|r| r.to_vec()).collect()
    }

    /// `Σ_x W(·|x) p_x`.
    pub fn output_distribution(&self, p: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|y| (0..self.inputs).map(|x| self.get(y, x) * p[x]).sum())
            .collect()
    }

    /// Binary symmetric channel with flip probability `f`.
    pub fn bsc(f: f64) -> Result<Self> {
        check_unit("flip probability", f)?;
        Self::new(2, 2, vec![1.0 - f, f, f, 1.0 - f])
    }

    pub fn noiseless(n: usize) -> Self {
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            w[i * n + i] = 1.0;
        }
        Self::new(n, n, w).expect("identity is stochastic")
    }

    /// Convex combination `Σ_j λ_j W_j` of same-shape kernels.
    pub fn mix(members: &[StochasticMatrix], weights: &[f64]) -> Result<Self> {
        let first = members.first().ok_or(Error::Empty("kernel list"))?;
        if weights.len() != members.len() {
            return Err(Error::DimensionMismatch {
                axis: "mixture weights",
                expected: members.len(),
                found: weights.len(),
            });
        }
        state::check_probability(weights, "mixture weights", KERNEL_TOL)?;
        let mut w = vec![0.0; first.w.len()];
        for (m, &l) in members.iter().zip(weights) {
            if m.outputs != first.outputs || m.inputs != first.inputs {
                return Err(Error::DimensionMismatch {
                    axis: "kernel shape",
                    expected: first.outputs * first.inputs,
                    found: m.outputs * m.inputs,
                });
            }
            for (acc, &v) in w.iter_mut().zip(&m.w) {
                *acc += l * v;
            }
        }
        Ok(Self {
            outputs: first.outputs,
            inputs: first.inputs,
            w,
        })
    }
}

/// Classical arbitrarily varying kernel `W(y|x,s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AvcKernel {
    nx: usize,
    ns: usize,
    ny: usize,
    /// `w[(y * X + x) * S + s]`.
    w: Vec<f64>,
}

impl AvcKernel {
    pub fn new(nx: usize, ns: usize, ny: usize, w: Vec<f64>) -> Result<Self> {
        if nx == 0 || ns == 0 || ny == 0 {
            return Err(Error::Empty("alphabet"));
        }
        if w.len() != nx * ns * ny {
            return Err(Error::DimensionMismatch {
                axis: "kernel entries |Y||X||S|",
                expected: nx * ns * ny,
                found: w.len(),
            });
        }
        check_entries(&w, "kernel")?;
        for x in 0..nx {
            for s in 0..ns {
                let sum: f64 = (0..ny).map(|y| w[(y * nx + x) * ns + s]).sum();
                if (sum - 1.0).abs() > KERNEL_TOL {
                    return Err(Error::Normalization {
                        what: "kernel column (x,s)",
                        sum,
                    });
                }
            }
        }
        Ok(Self { nx, ns, ny, w })
    }

    /// From the nested layout `W[y][x][s]`.
    pub fn from_nested(nx: usize, ns: usize, ny: usize, w: &[Vec<Vec<f64>>]) -> Result<Self> {
        if w.len() != ny {
            return Err(Error::DimensionMismatch {
                axis: "kernel Y axis",
                expected: ny,
                found: w.len(),
            });
        }
        let mut flat = Vec::with_capacity(nx * ns * ny);
        for plane in w {
            if plane.len() != nx {
                return Err(Error::DimensionMismatch {
                    axis: "kernel X axis",
                    expected: nx,
                    found: plane.len(),
                });
            }
            for row in plane {
                if row.len() != ns {
                    return Err(Error::DimensionMismatch {
                        axis: "kernel S axis",
                        expected: ns,
                        found: row.len(),
                    });
                }
                flat.extend_from_slice(row);
            }
        }
        Self::new(nx, ns, ny, flat)
    }

    pub fn nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.ny)
            .map(|y| (0..self.nx).map(|x| (0..self.ns).map(|s| self.get(y, x, s)).collect()).collect())
            .collect()
    }

    pub fn x(&self) -> usize {
        self.nx
    }

    pub fn s(&self) -> usize {
        self.ns
    }

    pub fn y(&self) -> usize {
        self.ny
    }

    pub fn get(&self, y: usize, x: usize, s: usize) -> f64 {
        self.w[(y * self.nx + x) * self.ns + s]
    }

    /// `W(·|·, s)` for a fixed jammer letter.
    pub fn state_kernel(&self, s: usize) -> StochasticMatrix {
        let mut w = vec![0.0; self.ny * self.nx];
        for y in 0..self.ny {
            for x in 0..self.nx {
                w[y * self.nx + x] = self.get(y, x, s);
            }
        }
        StochasticMatrix {
            outputs: self.ny,
            inputs: self.nx,
            w,
        }
    }

    pub fn state_kernels(&self) -> Vec<StochasticMatrix> {
        (0..self.ns).map(|s| self.state_kernel(s)).collect()
    }

    /// `W_q(y|x) = Σ_s q(s) W(y|x,s)`.
    pub fn mix_states(&self, q: &[f64]) -> Result<StochasticMatrix> {
        StochasticMatrix::mix(&self.state_kernels(), q)
    }

    /// Kernel ignoring the jammer, `W(y|x,s) = V(y|x)`.
    pub fn jammer_independent(v: &StochasticMatrix, ns: usize) -> Result<Self> {
        let mut w = Vec::with_capacity(v.outputs() * v.inputs() * ns);
        for y in 0..v.outputs() {
            for x in 0..v.inputs() {
                for _ in 0..ns {
                    w.push(v.get(y, x));
                }
            }
        }
        Self::new(v.inputs(), ns, v.outputs(), w)
    }
}

/// Binary adder `Y = X + S` with `X, S ∈ {0,1}`, `Y ∈ {0,1,2}`.
pub fn adder_avc() -> AvcKernel {
    let mut w = vec![0.0; 12];
    for x in 0..2 {
        for s in 0..2 {
            w[((x + s) * 2 + x) * 2 + s] = 1.0;
        }
    }
    AvcKernel::new(2, 2, 3, w).expect("adder is a valid kernel")
}

/// Classical-quantum embedding with Kraus operators `sqrt(W(y|x)) |y><x|`.
pub fn classical_embedding(w: &StochasticMatrix) -> QuantumChannel {
    let mut kraus = Vec::new();
    for x in 0..w.inputs() {
        for y in 0..w.outputs() {
            let p = w.get(y, x);
            if p > 0.0 {
                let mut k = Mat::zeros(w.outputs(), w.inputs());
                k[(y, x)] = real(p.sqrt());
                kraus.push(k);
            }
        }
    }
    QuantumChannel::new(kraus).expect("stochastic matrices embed as channels")
}

/// Embedding of a kernel as a jammer channel on `X ⊗ S → Y`.
pub fn embed_kernel(k: &AvcKernel) -> JammerChannel {
    let (nx, ns, ny) = (k.x(), k.s(), k.y());
    let mut kraus = Vec::new();
    for x in 0..nx {
        for s in 0..ns {
            for y in 0..ny {
                let p = k.get(y, x, s);
                if p > 0.0 {
                    let mut op = Mat::zeros(ny, nx * ns);
                    op[(y, x * ns + s)] = real(p.sqrt());
                    kraus.push(op);
                }
            }
        }
    }
    let map = QuantumChannel::new(kraus).expect("kernels embed as channels");
    JammerChannel::new(map, nx, ns).expect("dimensions consistent")
}

/// `W(y|x) = <y| T(|x><x|) |y>`.
pub fn diagonal_readout(t: &QuantumChannel) -> Result<StochasticMatrix> {
    let (d_in, d_out) = (t.d_in(), t.d_out());
    let mut w = vec![0.0; d_out * d_in];
    for x in 0..d_in {
        let out = t.apply_matrix(&linalg::basis_projector(d_in, x));
        for y in 0..d_out {
            w[y * d_in + x] = out[(y, y)].re.max(0.0);
        }
    }
    StochasticMatrix::new(d_out, d_in, w)
}

/// Short human-readable channel description used in reports.
pub fn describe(kind: &StandardChannel) -> String {
    match kind {
        StandardChannel::Identity { d } => alloc::format!("identity(d={d})"),
        StandardChannel::Depolarizing { d, p } => alloc::format!("depolarizing(d={d}, p={p})"),
        StandardChannel::Erasure { d, p } => alloc::format!("erasure(d={d}, p={p})"),
        StandardChannel::Dephasing { d, p } => alloc::format!("dephasing(d={d}, p={p})"),
        StandardChannel::Unitary(u) => alloc::format!("unitary(d={})", u.nrows()),
    }
    .to_string()
}
