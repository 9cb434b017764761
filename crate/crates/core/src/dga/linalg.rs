//! Rank computation over F_p for the sparse matrices of a free DGA
//! differential.
//!
//! The differential of a word touches one generator occurrence at a time, so
//! rows are short; ranks are computed by online row reduction against a map
//! of pivot rows, which keeps the work proportional to the (small) fill-in
//! rather than to the dense dimensions.

use std::collections::HashMap;

/// A sparse row: `(column, coefficient)` pairs sorted by column, with
/// coefficients in `1..p`.
pub type SparseRow = Vec<(u32, u64)>;

/// Modular inverse by Fermat; `p` must be prime and `a` nonzero mod `p`.
fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a % p, p - 2, p)
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// `target += c * source` over F_p, merging sorted sparse rows.
fn axpy(target: &SparseRow, c: u64, source: &SparseRow, p: u64) -> SparseRow {
    let mut out = Vec::with_capacity(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() || j < source.len() {
        let take_target = j >= source.len()
            || (i < target.len() && target[i].0 < source[j].0);
        let take_source = i >= target.len()
            || (j < source.len() && source[j].0 < target[i].0);
        if take_target {
            out.push(target[i]);
            i += 1;
        } else if take_source {
            out.push((source[j].0, c * source[j].1 % p));
            j += 1;
        } else {
            let v = (target[i].1 + c * source[j].1) % p;
            if v != 0 {
                out.push((target[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rank of the matrix whose rows are given as sparse F_p vectors.
pub fn rank(p: u64, rows: impl IntoIterator<Item = SparseRow>) -> usize {
    assert!(p >= 2 && p < (1 << 31), "modulus out of range");
    let mut pivots: HashMap<u32, SparseRow> = HashMap::new();
    let mut rank = 0usize;
    for mut row in rows {
        loop {
            let Some(&(lead_col, lead_coeff)) = row.first() else {
                break;
            };
            match pivots.get(&lead_col) {
                Some(pivot) => {
                    // Cancel the leading entry: row -= lead_coeff * pivot.
                    row = axpy(&row, p - lead_coeff, pivot, p);
                }
                None => {
                    let inv = inv_mod(lead_coeff, p);
                    for entry in row.iter_mut() {
                        entry.1 = entry.1 * inv % p;
                    }
                    pivots.insert(lead_col, row);
                    rank += 1;
                    break;
                }
            }
        }
    }
    rank
}
