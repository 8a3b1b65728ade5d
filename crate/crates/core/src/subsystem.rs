//! Multipartite index bookkeeping: partial traces, subsystem permutations,
//! local channel application and the symmetric-subspace projector.
//!
//! Subsystem 0 is the most significant factor of a composite index, i.e. the
//! index of `|i_0 i_1 ... i_{n-1}>` is `((i_0 d_1 + i_1) d_2 + ...)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{real, Mat, ZERO};

/// Default cap on the Hilbert-space dimension of exact multi-copy objects.
pub const DEFAULT_BUDGET: usize = 4096;

fn product(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn check_dims(m: &Mat, dims: &[usize]) -> Result<usize> {
    let d = crate::linalg::ensure_square(m)?;
    if dims.is_empty() || dims.iter().any(|&x| x == 0) {
        return Err(Error::InvalidSelection("subsystem dimensions must be positive"));
    }
    let total = product(dims);
    if total != d {
        return Err(Error::DimensionMismatch {
            axis: "product of subsystem dimensions",
            expected: d,
            found: total,
        });
    }
    Ok(d)
}

/// Big-endian digits of every composite index.
fn all_digits(dims: &[usize]) -> Vec<Vec<usize>> {
    let total = product(dims);
    let n = dims.len();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    for _ in 0..total {
        out.push(digits.clone());
        for k in (0..n).rev() {
            digits[k] += 1;
            if digits[k] < dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    out
}

fn compose_index(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}

/// Reduced operator on the subsystems listed in `keep` (kept in ascending
/// order).
pub fn partial_trace(m: &Mat, dims: &[usize], keep: &[usize]) -> Result<Mat> {
    check_dims(m, dims)?;
    if keep.is_empty() {
        return Err(Error::Empty("kept subsystem set"));
    }
    let mut keep: Vec<usize> = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::InvalidSelection("kept subsystem index out of range"));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let dk = product(&kept_dims);
    let dt = product(&traced_dims);

    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); dt];
    for (full, digits) in all_digits(dims).into_iter().enumerate() {
        let kd: Vec<usize> = keep.iter().map(|&k| digits[k]).collect();
        let td: Vec<usize> = traced.iter().map(|&k| digits[k]).collect();
        let ki = compose_index(&kd, &kept_dims);
        let ti = if td.is_empty() { 0 } else { compose_index(&td, &traced_dims) };
        groups[ti].push((full, ki));
    }
    let mut out = Mat::zeros(dk, dk);
    for g in &groups {
        for &(a, ka) in g {
            for &(b, kb) in g {
                out[(ka, kb)] += m[(a, b)];
            }
        }
    }
    Ok(out)
}

/// Checks that `perm` is a permutation of `0..n`.
pub fn validate_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::InvalidSelection("permutation has the wrong length"));
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidSelection("not a permutation"));
        }
        seen[p] = true;
    }
    Ok(())
}

pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// `outer ∘ inner`: slot `k` goes to `outer[inner[k]]`.
pub fn compose_permutations(outer: &[usize], inner: &[usize]) -> Vec<usize> {
    inner.iter().map(|&k| outer[k]).collect()
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// Composite-index map of the subsystem permutation: the content of slot
/// `k` moves to slot `perm[k]`. Returns the new dimension list as well.
pub fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    validate_permutation(perm, dims.len())?;
    let mut new_dims = vec![0; dims.len()];
    for (k, &p) in perm.iter().enumerate() {
        new_dims[p] = dims[k];
    }
    let map = all_digits(dims)
        .into_iter()
        .map(|digits| {
            let mut nd = vec![0; digits.len()];
            for (k, &p) in perm.iter().enumerate() {
                nd[p] = digits[k];
            }
            compose_index(&nd, &new_dims)
        })
        .collect();
    Ok((map, new_dims))
}

/// The unitary `U_π` with `U_π |i> = |map(i)>`.
pub fn permutation_matrix(dims: &[usize], perm: &[usize]) -> Result<Mat> {
    let (map, _) = permutation_index_map(dims, perm)?;
    let d = map.len();
    let mut u = Mat::zeros(d, d);
    for (a, &b) in map.iter().enumerate() {
        u[(b, a)] = real(1.0);
    }
    Ok(u)
}

/// `U_π M U_π†` for arbitrary subsystem dimensions.
pub fn permute_general(m: &Mat, dims: &[usize], perm: &[usize]) -> Result<(Mat, Vec<usize>)> {
    check_dims(m, dims)?;
    let (map, new_dims) = permutation_index_map(dims, perm)?;
    let d = map.len();
    let mut out = Mat::from_element(d, d, ZERO);
    for a in 0..d {
        for b in 0..d {
            out[(map[a], map[b])] = m[(a, b)];
        }
    }
    Ok((out, new_dims))
}

/// `U_π M U_π†` on `(C^d)^{⊗n}`.
pub fn permute_subsystems(m: &Mat, d: usize, n: usize, perm: &[usize]) -> Result<Mat> {
    let total = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if m.nrows() != total {
        return Err(Error::DimensionMismatch {
            axis: "d^n",
            expected: total,
            found: m.nrows(),
        });
    }
    Ok(permute_general(m, &vec![d; n], perm)?.0)
}

/// `(I_left ⊗ K ⊗ I_right) m` with `K` acting on the middle factor.
fn left_local(m: &Mat, left: usize, right: usize, k: &Mat) -> Mat {
    let (o, blk) = (k.nrows(), k.ncols());
    let cols = m.ncols();
    let mut out = Mat::zeros(left * o * right, cols);
    for c in 0..cols {
        for l in 0..left {
            for b in 0..blk {
                for r in 0..right {
                    let src = m[((l * blk + b) * right + r, c)];
                    if src == ZERO {
                        continue;
                    }
                    for ob in 0..o {
                        out[((l * o + ob) * right + r, c)] += k[(ob, b)] * src;
                    }
                }
            }
        }
    }
    out
}

fn check_ket_dims(v: &Mat, dims: &[usize]) -> Result<()> {
    if dims.is_empty() || dims.iter().any(|&x| x == 0) {
        return Err(Error::InvalidSelection("subsystem dimensions must be positive"));
    }
    if product(dims) != v.nrows() {
        return Err(Error::DimensionMismatch {
            axis: "product of subsystem dimensions",
            expected: v.nrows(),
            found: product(dims),
        });
    }
    Ok(())
}

/// `U_π V` for kets stored as the columns of `v`.
pub fn permute_kets(v: &Mat, dims: &[usize], perm: &[usize]) -> Result<(Mat, Vec<usize>)> {
    check_ket_dims(v, dims)?;
    let (map, new_dims) = permutation_index_map(dims, perm)?;
    let mut out = Mat::zeros(v.nrows(), v.ncols());
    for (a, &b) in map.iter().enumerate() {
        out.row_mut(b).copy_from(&v.row(a));
    }
    Ok((out, new_dims))
}

/// `(I ⊗ K ⊗ I) V` for kets stored as the columns of `v`, with `K` acting
/// on the contiguous block `start..start+len`, which it replaces by one
/// subsystem of dimension `K.nrows()`.
pub fn apply_local_kets(v: &Mat, dims: &[usize], start: usize, len: usize, k: &Mat) -> Result<(Mat, Vec<usize>)> {
    check_ket_dims(v, dims)?;
    if len == 0 || start + len > dims.len() {
        return Err(Error::InvalidSelection("block outside subsystem list"));
    }
    let blk = product(&dims[start..start + len]);
    if k.ncols() != blk {
        return Err(Error::DimensionMismatch {
            axis: "local operator on block",
            expected: blk,
            found: k.ncols(),
        });
    }
    let out = left_local(v, product(&dims[..start]), product(&dims[start + len..]), k);
    let mut new_dims = dims[..start].to_vec();
    new_dims.push(k.nrows());
    new_dims.extend_from_slice(&dims[start + len..]);
    Ok((out, new_dims))
}

/// Applies the map `X ↦ Σ_k K_k X K_k†` to the contiguous block of
/// subsystems `start..start+len`. The block is replaced by a single
/// subsystem of dimension `K.nrows()`.
pub fn apply_on_block(
    m: &Mat,
    dims: &[usize],
    start: usize,
    len: usize,
    kraus: &[Mat],
) -> Result<(Mat, Vec<usize>)> {
    check_dims(m, dims)?;
    if len == 0 || start + len > dims.len() {
        return Err(Error::InvalidSelection("block outside subsystem list"));
    }
    let left = product(&dims[..start]);
    let blk = product(&dims[start..start + len]);
    let right = product(&dims[start + len..]);
    let d_out = kraus.first().map(|k| k.nrows()).ok_or(Error::Empty("Kraus list"))?;
    for k in kraus {
        if k.ncols() != blk || k.nrows() != d_out {
            return Err(Error::DimensionMismatch {
                axis: "Kraus operator on block",
                expected: blk,
                found: k.ncols(),
            });
        }
    }
    let size = left * d_out * right;
    let mut out = Mat::zeros(size, size);
    for k in kraus {
        let half = left_local(m, left, right, k);
        let full = left_local(&half.adjoint(), left, right, k).adjoint();
        out += full;
    }
    let mut new_dims = dims[..start].to_vec();
    new_dims.push(d_out);
    new_dims.extend_from_slice(&dims[start + len..]);
    Ok((out, new_dims))
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Dimension of the symmetric subspace of `(C^d)^{⊗n}`.
pub fn symmetric_dimension(d: usize, n: usize) -> f64 {
    binomial(n + d - 1, n)
}

/// Projector onto the symmetric subspace of `(C^d)^{⊗n}`, the average of all
/// `n!` subsystem permutations. Built from type classes: two basis strings
/// are coupled iff they are rearrangements of each other, with weight one
/// over the size of their class.
pub fn symmetric_projector(d: usize, n: usize, budget: usize) -> Result<Mat> {
    let total = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if total > budget {
        return Err(Error::BudgetExceeded { needed: total, budget });
    }
    let dims = vec![d; n];
    // type of a string = sorted digits
    let types: Vec<Vec<usize>> = all_digits(&dims)
        .into_iter()
        .map(|mut digits| {
            digits.sort_unstable();
            digits
        })
        .collect();
    let mut classes: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (idx, t) in types.into_iter().enumerate() {
        match classes.iter_mut().find(|(ct, _)| *ct == t) {
            Some((_, members)) => members.push(idx),
            None => classes.push((t, vec![idx])),
        }
    }
    let mut p = Mat::zeros(total, total);
    for (_, members) in &classes {
        let w = real(1.0 / members.len() as f64);
        for &a in members {
            for &b in members {
                p[(a, b)] = w;
            }
        }
    }
    Ok(p)
}
