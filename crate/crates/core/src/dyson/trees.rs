//! Labeled-tree combinatorics entering the contraction-scheme count.

use std::collections::BTreeMap;

use super::DysonError;

/// Number of labeled trees on m+1 vertices with the given incidence
/// (degree) profile e_0..e_m: the multinomial (m-1)! / prod (e_j - 1)!.
/// Requires every e_j >= 1 and sum e_j = 2m.
pub fn tree_count(incidence: &[u64]) -> Result<u128, DysonError> {
    if incidence.is_empty() {
        return Err(DysonError::InvalidIncidence(
            "empty incidence profile".into(),
        ));
    }
    let m = incidence.len() as u64 - 1;
    if incidence.iter().any(|&e| e < 1) {
        return Err(DysonError::InvalidIncidence(format!(
            "incidence numbers must be >= 1: {incidence:?}"
        )));
    }
    let total: u64 = incidence.iter().sum();
    if total != 2 * m {
        return Err(DysonError::InvalidIncidence(format!(
            "incidence numbers sum to {total}, expected 2m = {}",
            2 * m
        )));
    }
    if m == 0 {
        // Single vertex: impossible to satisfy e_0 >= 1 with sum 0, so we
        // never get here; kept for clarity.
        return Ok(1);
    }
    // Multinomial as a product of binomials keeps intermediates integral.
    let mut remaining = m as u128 - 1;
    let mut count: u128 = 1;
    for &e in incidence {
        let k = e as u128 - 1;
        count = count
            .checked_mul(binomial(remaining, k))
            .ok_or_else(|| DysonError::InvalidIncidence("profile too large for u128".into()))?;
        remaining -= k;
    }
    Ok(count)
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    acc
}

/// Exhaustively enumerates labeled trees on m+1 vertices through their
/// Pruefer sequences and tallies incidence profiles. The degree of vertex v
/// is its multiplicity in the sequence plus one, so no tree needs to be
/// reconstructed. Exponential in m; capped at m = 8.
pub fn tree_enumerate(m: usize) -> Result<BTreeMap<Vec<u64>, u128>, DysonError> {
    if m < 1 || m > 8 {
        return Err(DysonError::InvalidIncidence(format!(
            "enumeration supports 1 <= m <= 8, got {m}"
        )));
    }
    let vertices = m + 1;
    let mut tally: BTreeMap<Vec<u64>, u128> = BTreeMap::new();
    let len = m - 1;
    let total = (vertices as u128).pow(len as u32);
    let mut sequence = vec![0usize; len];
    for code in 0..total {
        let mut c = code;
        for slot in sequence.iter_mut() {
            *slot = (c % vertices as u128) as usize;
            c /= vertices as u128;
        }
        let mut degrees = vec![1u64; vertices];
        for &v in &sequence {
            degrees[v] += 1;
        }
        *tally.entry(degrees).or_insert(0) += 1;
    }
    Ok(tally)
}

/// The binomial identity sum_{e=0}^{2N} C(2N, e) = 4^N used after the
/// incidence-number resummation. Returns the left side (and asserts it
/// against the closed form).
pub fn incidence_sum_identity(n: u32) -> u128 {
    assert!(n <= 62, "4^n must fit in u128");
    let sum: u128 = (0..=2 * n as u128).map(|e| binomial(2 * n as u128, e)).sum();
    assert_eq!(sum, 1u128 << (2 * n), "binomial row sum identity violated");
    sum
}
