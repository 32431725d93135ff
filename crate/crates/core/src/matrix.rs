//! Dense non-negative integer matrices and exact big-integer row arithmetic.
//!
//! Every matrix in the analysis (mass, degree, choice) is small (side at most
//! twice the colour count) with entries that are edge or incidence counts, so
//! a row-major `u64` store is enough. Powers are never materialized: callers
//! fold a `BigUint` row vector through repeated right-multiplication, which
//! keeps every count exact no matter how many generations are requested.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Row-major square matrix with non-negative integer entries.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct IntMatrix {
    side: usize,
    entries: Vec<u64>,
}

impl IntMatrix {
    pub fn zeros(side: usize) -> Self {
        IntMatrix {
            side,
            entries: vec![0; side * side],
        }
    }

    /// Builds from explicit rows; all rows must have length `rows.len()`.
    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let side = rows.len();
        let mut entries = Vec::with_capacity(side * side);
        for row in rows {
            assert_eq!(row.len(), side, "row length must equal matrix side");
            entries.extend_from_slice(row);
        }
        IntMatrix { side, entries }
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> u64 {
        self.entries[row * self.side + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: u64) {
        self.entries[row * self.side + col] = value;
    }

    pub fn row(&self, row: usize) -> &[u64] {
        &self.entries[row * self.side..(row + 1) * self.side]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.entries.chunks(self.side)
    }

    /// Restriction to the given indices, in the given order.
    pub fn restrict(&self, indices: &[usize]) -> IntMatrix {
        let side = indices.len();
        let mut out = IntMatrix::zeros(side);
        for (i, &a) in indices.iter().enumerate() {
            for (j, &b) in indices.iter().enumerate() {
                out.set(i, j, self.get(a, b));
            }
        }
        out
    }

    /// Sparse adjacency view: successors of `row` with positive entries.
    pub fn successors(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(row)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(j, _)| j)
    }
}

/// Unit row vector `e_i` of length `len` as exact big integers.
pub fn unit_row(len: usize, i: usize) -> Vec<BigUint> {
    let mut row = vec![BigUint::zero(); len];
    row[i] = BigUint::from(1u32);
    row
}

/// Exact big-integer row from `u64` entries.
pub fn big_row(entries: &[u64]) -> Vec<BigUint> {
    entries.iter().map(|&v| BigUint::from(v)).collect()
}

/// `row * m`, exact.
pub fn row_times_matrix(row: &[BigUint], m: &IntMatrix) -> Vec<BigUint> {
    assert_eq!(row.len(), m.side());
    let mut out = vec![BigUint::zero(); m.side()];
    for (i, coeff) in row.iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        for j in m.successors(i) {
            out[j] += coeff * m.get(i, j);
        }
    }
    out
}

/// `row * m^exp`, exact, by repeated application.
pub fn row_times_matrix_pow(row: &[BigUint], m: &IntMatrix, exp: u32) -> Vec<BigUint> {
    let mut acc = row.to_vec();
    for _ in 0..exp {
        acc = row_times_matrix(&acc, m);
    }
    acc
}

/// `sum_i row[i] * other[i]`, exact.
pub fn dot(row: &[BigUint], other: &[BigUint]) -> BigUint {
    assert_eq!(row.len(), other.len());
    let mut acc = BigUint::zero();
    for (a, b) in row.iter().zip(other) {
        if !a.is_zero() && !b.is_zero() {
            acc += a * b;
        }
    }
    acc
}

/// 1-norm of a non-negative row, exact.
pub fn row_norm1(row: &[BigUint]) -> BigUint {
    let mut acc = BigUint::zero();
    for v in row {
        acc += v;
    }
    acc
}

/// Natural logarithm of a positive big integer.
///
/// Full precision is recovered from the top 53 bits plus the bit length, so
/// the result is accurate to one unit in the last place of `f64` even when
/// the integer itself far exceeds `f64` range.
pub fn ln_biguint(value: &BigUint) -> f64 {
    assert!(!value.is_zero(), "logarithm of zero");
    let bits = value.bits();
    if bits <= 53 {
        return value.to_f64().expect("small biguint fits f64").ln();
    }
    let shift = bits - 53;
    let mantissa = (value >> shift)
        .to_f64()
        .expect("53-bit mantissa fits f64");
    mantissa.ln() + (shift as f64) * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;

    #[test]
    fn row_vector_powers_match_manual_squaring() {
        // [[1,1],[0,2]]^n applied to e1 gives (1, 2^n - 1).
        let m = IntMatrix::from_rows(&[vec![1, 1], vec![0, 2]]);
        let row = unit_row(2, 0);
        let out = row_times_matrix_pow(&row, &m, 10);
        assert_eq!(out[0], BigUint::from(1u32));
        assert_eq!(out[1], BigUint::from(1023u32));
    }

    #[test]
    fn restriction_preserves_entries_in_order() {
        let m = IntMatrix::from_rows(&[vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 9]]);
        let r = m.restrict(&[2, 0]);
        assert_eq!(r.row(0), &[9, 7]);
        assert_eq!(r.row(1), &[3, 1]);
    }

    #[test]
    fn ln_biguint_matches_f64_for_small_values() {
        for v in [1u64, 2, 3, 10, 1000, 123_456_789] {
            let exact = (v as f64).ln();
            let got = ln_biguint(&BigUint::from(v));
            assert!((exact - got).abs() < 1e-12, "v={v}: {exact} vs {got}");
        }
    }

    #[test]
    fn ln_biguint_handles_huge_values() {
        // ln(2^1000) = 1000 ln 2.
        let v = BigUint::from(1u32) << 1000;
        let got = ln_biguint(&v);
        let expect = 1000.0 * std::f64::consts::LN_2;
        assert!((got - expect).abs() < 1e-9 * expect);
        // ln(3^500) = 500 ln 3.
        let v3 = BigUint::from(3u32).pow(500);
        let got3 = ln_biguint(&v3);
        let expect3 = 500.0 * 3f64.ln();
        assert!((got3 - expect3).abs() < 1e-9 * expect3);
    }
}
