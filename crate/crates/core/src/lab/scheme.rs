use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{JammerChannel, QuantumChannel};
use crate::error::{Error, Result};
use crate::linalg::{self, real, CVec, Mat};
use crate::models::weyl;
use crate::random::{random_channel, random_pure, Rng};
use crate::state::PureState;

/// Entanglement-assisted code: shared pure state `phi` on `K ⊗ K`, encoder
/// from `message ⊗ K` to `A^n`, decoder from `B^n ⊗ K` to `message`. The
/// first copy of `K` goes to the encoder. Messages are the `2^m`
/// computational basis states.
#[derive(Debug, Clone)]
pub struct CodingScheme {
    n: usize,
    m: usize,
    k: usize,
    phi: PureState,
    encoder: QuantumChannel,
    decoder: QuantumChannel,
}

fn mismatch(axis: &'static str, expected: usize, found: usize) -> Error {
    Error::DimensionMismatch { axis, expected, found }
}

impl CodingScheme {
    pub fn new(n: usize, m: usize, k: usize, phi: PureState, encoder: QuantumChannel, decoder: QuantumChannel) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter { name: "n", value: 0.0 });
        }
        if k == 0 {
            return Err(Error::InvalidParameter { name: "k", value: 0.0 });
        }
        if m >= usize::BITS as usize / 2 {
            return Err(Error::InvalidParameter { name: "m", value: m as f64 });
        }
        let messages = 1usize << m;
        if phi.dim() != k * k {
            return Err(mismatch("entangled state (k^2)", k * k, phi.dim()));
        }
        if encoder.d_in() != messages * k {
            return Err(mismatch("encoder input (2^m * k)", messages * k, encoder.d_in()));
        }
        if decoder.d_out() != messages {
            return Err(mismatch("decoder output (2^m)", messages, decoder.d_out()));
        }
        if decoder.d_in() % k != 0 {
            return Err(mismatch("decoder input (d_B^n * k)", k, decoder.d_in()));
        }
        Ok(Self {
            n,
            m,
            k,
            phi,
            encoder,
            decoder,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn messages(&self) -> usize {
        1 << self.m
    }

    pub fn phi(&self) -> &PureState {
        &self.phi
    }

    pub fn encoder(&self) -> &QuantumChannel {
        &self.encoder
    }

    pub fn decoder(&self) -> &QuantumChannel {
        &self.decoder
    }

    /// Checks that the encoder feeds `A^n` and the decoder reads `B^n ⊗ K`.
    pub fn check_channel(&self, t: &JammerChannel) -> Result<()> {
        let a_n = pow(t.d_a(), self.n)?;
        let b_n = pow(t.d_b(), self.n)?;
        if self.encoder.d_out() != a_n {
            return Err(mismatch("encoder output (d_A^n)", a_n, self.encoder.d_out()));
        }
        if self.decoder.d_in() != b_n * self.k {
            return Err(mismatch("decoder input (d_B^n * k)", b_n * self.k, self.decoder.d_in()));
        }
        Ok(())
    }

    /// Same code with the encoder followed by `U_π` and the decoder preceded
    /// by `U_π⁻¹` on `B^n`.
    pub fn permuted(&self, d_a: usize, d_b: usize, perm: &[usize]) -> Result<Self> {
        let a_n = pow(d_a, self.n)?;
        let b_n = pow(d_b, self.n)?;
        if self.encoder.d_out() != a_n {
            return Err(mismatch("encoder output (d_A^n)", a_n, self.encoder.d_out()));
        }
        if self.decoder.d_in() != b_n * self.k {
            return Err(mismatch("decoder input (d_B^n * k)", b_n * self.k, self.decoder.d_in()));
        }
        // U_π|i> = |map(i)>: E gains U_π on the left, D gains U_π† on the right
        let (map_a, _) = crate::subsystem::permutation_index_map(&alloc::vec![d_a; self.n], perm)?;
        let (map_b, _) = crate::subsystem::permutation_index_map(&alloc::vec![d_b; self.n], perm)?;
        let k = self.k;
        let encoder = self
            .encoder
            .kraus()
            .iter()
            .map(|e| {
                let mut out = Mat::zeros(e.nrows(), e.ncols());
                for (i, &j) in map_a.iter().enumerate() {
                    out.row_mut(j).copy_from(&e.row(i));
                }
                out
            })
            .collect();
        let decoder = self
            .decoder
            .kraus()
            .iter()
            .map(|d| {
                let mut out = Mat::zeros(d.nrows(), d.ncols());
                for (i, &j) in map_b.iter().enumerate() {
                    for c in 0..k {
                        out.column_mut(j * k + c).copy_from(&d.column(i * k + c));
                    }
                }
                out
            })
            .collect();
        Self::new(
            self.n,
            self.m,
            self.k,
            self.phi.clone(),
            QuantumChannel::from_kraus_unchecked(encoder),
            QuantumChannel::from_kraus_unchecked(decoder),
        )
    }
}

pub(crate) fn pow(d: usize, n: usize) -> Result<usize> {
    d.checked_pow(n as u32).ok_or(Error::BudgetExceeded {
        needed: usize::MAX,
        budget: crate::subsystem::DEFAULT_BUDGET,
    })
}

fn measure(basis_change: &Mat) -> Result<QuantumChannel> {
    let d = basis_change.nrows();
    QuantumChannel::new((0..d).map(|x| linalg::basis_projector(d, x) * basis_change).collect())
}

fn hadamard_power(n: usize) -> Mat {
    let h = linalg::from_real(2, 2, &[1.0, 1.0, 1.0, -1.0]) * real(1.0 / 2f64.sqrt());
    (1..n).fold(h.clone(), |acc, _| linalg::kron(&acc, &h))
}

/// One bit per qubit use, sent as `|x>` and read in the computational basis.
pub fn computational_scheme(n: usize) -> Result<CodingScheme> {
    let d = pow(2, n)?;
    CodingScheme::new(n, n, 1, PureState::basis(1, 0), QuantumChannel::identity(d), measure(&linalg::identity(d))?)
}

/// One bit per qubit use, sent as `|±>` and read in the X basis.
pub fn xbasis_scheme(n: usize) -> Result<CodingScheme> {
    let h = hadamard_power(n);
    CodingScheme::new(n, n, 1, PureState::basis(1, 0), QuantumChannel::unitary(h.clone())?, measure(&h)?)
}

/// `⊗_i X^{a_i} Z^{b_i}` for the message `Σ_i (2 a_i + b_i) 4^{n-1-i}`.
fn dense_pauli(n: usize, msg: usize) -> Mat {
    let mut out = linalg::identity(1);
    for i in 0..n {
        let pair = (msg >> (2 * (n - 1 - i))) & 3;
        out = linalg::kron(&out, &weyl(2, pair >> 1, pair & 1));
    }
    out
}

/// Superdense coding: two bits per qubit use over `n` shared Bell pairs,
/// decoded by a Bell measurement.
pub fn dense_scheme(n: usize) -> Result<CodingScheme> {
    let k = pow(2, n)?;
    let m = 2 * n;
    let messages = 1usize << m;
    let phi = PureState::maximally_entangled(k);
    let mut enc = Vec::with_capacity(messages);
    let mut dec = Vec::with_capacity(messages);
    for msg in 0..messages {
        let p = dense_pauli(n, msg);
        let mut e = Mat::zeros(k, messages * k);
        for r in 0..k {
            for c in 0..k {
                e[(r, msg * k + c)] = p[(r, c)];
            }
        }
        enc.push(e);
        let beta: CVec = linalg::kron(&p, &linalg::identity(k)) * phi.amplitudes();
        let mut d = Mat::zeros(messages, k * k);
        for c in 0..k * k {
            d[(msg, c)] = beta[c].conj();
        }
        dec.push(d);
    }
    CodingScheme::new(n, m, k, phi, QuantumChannel::new(enc)?, QuantumChannel::new(dec)?)
}

/// Random encoder, decoder and shared state for a jammer channel's
/// dimensions.
pub fn random_scheme(t: &JammerChannel, n: usize, m: usize, k: usize, rng: &mut Rng) -> Result<CodingScheme> {
    let messages = 1usize << m;
    let a_n = pow(t.d_a(), n)?;
    let b_n = pow(t.d_b(), n)?;
    let enc_rank = (messages * k).div_ceil(a_n).max(2);
    let dec_rank = (b_n * k).div_ceil(messages).max(2);
    let phi = random_pure(k * k, rng);
    let encoder = random_channel(messages * k, a_n, enc_rank, rng);
    let decoder = random_channel(b_n * k, messages, dec_rank, rng);
    CodingScheme::new(n, m, k, phi, encoder, decoder)
}

/// Built-in scheme by name: `comp:<n>`, `xbasis:<n>`, `dense:<n>`.
pub fn builtin_scheme(name: &str) -> Option<Result<CodingScheme>> {
    let (kind, n) = name.split_once(':')?;
    let n: usize = n.parse().ok().filter(|&n| (1..=8).contains(&n))?;
    match kind {
        "comp" => Some(computational_scheme(n)),
        "xbasis" => Some(xbasis_scheme(n)),
        "dense" if n <= 3 => Some(dense_scheme(n)),
        _ => None,
    }
}
