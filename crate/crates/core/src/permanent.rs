//! Matrix permanents.
//!
//! `permanent_ryser` is the production kernel (Gray-code Ryser, `O(2ⁿ·n)`).
//! `permanent_naive` enumerates permutations and exists as an independent
//! check; it refuses anything above 10×10.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, ONE, ZERO};

/// Largest dimension accepted by [`permanent_naive`].
pub const NAIVE_MAX_DIM: usize = 10;

/// Largest dimension accepted by [`permanent_ryser`] (subset index is a `u64`).
pub const RYSER_MAX_DIM: usize = 63;

fn require_square(m: &ComplexMatrix) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(m.rows())
}

/// Sum over all permutations σ of `∏ᵢ M[i, σ(i)]`.
pub fn permanent_naive(m: &ComplexMatrix) -> Result<Complex64> {
    let n = require_square(m)?;
    if n > NAIVE_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "naive permanent limited to {NAIVE_MAX_DIM}x{NAIVE_MAX_DIM}, got {n}x{n}"
        )));
    }
    let mut used = vec![false; n];
    Ok(expand(m, 0, &mut used))
}

fn expand(m: &ComplexMatrix, row: usize, used: &mut [bool]) -> Complex64 {
    if row == used.len() {
        return ONE;
    }
    let mut acc = ZERO;
    for col in 0..used.len() {
        if used[col] {
            continue;
        }
        let a = m[(row, col)];
        if a == ZERO {
            continue;
        }
        used[col] = true;
        acc += a * expand(m, row + 1, used);
        used[col] = false;
    }
    acc
}

/// Ryser's formula with Gray-code subset iteration.
///
/// `perm(A) = Σ_{S ⊆ cols} (−1)^{n−|S|} ∏ᵢ Σ_{j∈S} a_ij`. Consecutive Gray
/// codes differ in one column, so the row sums update in `O(n)`. The 0×0
/// permanent is 1.
pub fn permanent_ryser(m: &ComplexMatrix) -> Result<Complex64> {
    let n = require_square(m)?;
    if n > RYSER_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "permanent dimension {n} exceeds {RYSER_MAX_DIM}"
        )));
    }
    Ok(ryser_slice(m.as_slice(), n, &mut vec![ZERO; n]))
}

/// Ryser kernel over a row-major `n×n` slice with caller-provided scratch.
pub(crate) fn ryser_slice(a: &[Complex64], n: usize, row_sums: &mut [Complex64]) -> Complex64 {
    if n == 0 {
        return ONE;
    }
    row_sums.iter_mut().for_each(|s| *s = ZERO);
    let mut total = ZERO;
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let bit = 1u64 << j;
        gray ^= bit;
        if gray & bit != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[i * n + j];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[i * n + j];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if (n - gray.count_ones() as usize) % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// Closed forms for `n ≤ 3`, Ryser above. Same contract as [`permanent_ryser`].
pub(crate) fn permanent_fast(a: &[Complex64], n: usize, scratch: &mut [Complex64]) -> Complex64 {
    match n {
        0 => ONE,
        1 => a[0],
        2 => a[0] * a[3] + a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] + a[5] * a[7]) + a[1] * (a[3] * a[8] + a[5] * a[6]) + a[2] * (a[3] * a[7] + a[4] * a[6])
        }
        _ => ryser_slice(a, n, scratch),
    }
}

/// The `n×n` matrix whose amplitude gives `⟨T|Φ(U)|S⟩`.
///
/// Row `i` of `u` is repeated `out_occ[i]` times and column `j` is repeated
/// `in_occ[j]` times, both in increasing mode order.
pub fn build_submatrix(u: &ComplexMatrix, out_occ: &[usize], in_occ: &[usize]) -> Result<ComplexMatrix> {
    let n: usize = out_occ.iter().sum();
    if in_occ.iter().sum::<usize>() != n {
        return Err(Error::InvalidArgument(format!(
            "photon count mismatch: output {out_occ:?} vs input {in_occ:?}"
        )));
    }
    if out_occ.len() != u.rows() || in_occ.len() != u.cols() {
        return Err(Error::DimensionMismatch {
            expected: u.rows(),
            found: out_occ.len().max(in_occ.len()),
        });
    }
    let rows = repeated_modes(out_occ);
    let cols = repeated_modes(in_occ);
    Ok(ComplexMatrix::from_fn(n, n, |i, j| u[(rows[i], cols[j])]))
}

pub(crate) fn repeated_modes(occ: &[usize]) -> Vec<usize> {
    occ.iter()
        .enumerate()
        .flat_map(|(mode, &k)| std::iter::repeat_n(mode, k))
        .collect()
}
