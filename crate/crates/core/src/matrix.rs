//! Square bit matrices with row-bitset storage.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

const WORD: usize = 64;

/// An `n x n` matrix over `{0,1}`, stored as packed rows of `u64` words.
///
/// Entries are addressed with 1-based indices `(i, j)` where `i` is the row.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BooleanMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixError {
    /// The dimension must be at least one.
    EmptyMatrix,
    /// Row `row` (1-based) has `found` entries instead of `expected`.
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::EmptyMatrix => write!(f, "matrix dimension must be positive"),
            MatrixError::RowLength {
                row,
                expected,
                found,
            } => write!(f, "row {row} has {found} entries, expected {expected}"),
        }
    }
}

impl core::error::Error for MatrixError {}

/// Two matrices that must share a dimension do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimensionMismatch {
    pub left: usize,
    pub right: usize,
}

impl fmt::Display for DimensionMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dimension mismatch: {} vs {}", self.left, self.right)
    }
}

impl core::error::Error for DimensionMismatch {}

impl BooleanMatrix {
    /// The all-zero matrix.
    ///
    /// Panics if `n == 0`.
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix dimension must be positive");
        let words = n.div_ceil(WORD);
        BooleanMatrix {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 1..=n {
            m.set(i, i, true);
        }
        m
    }

    pub fn ones(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 1..=n {
            for j in 1..=n {
                m.set(i, j, true);
            }
        }
        m
    }

    /// Builds a matrix from `n` rows of `n` entries each.
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::EmptyMatrix);
        }
        let mut m = Self::zeros(n);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(MatrixError::RowLength {
                    row: r + 1,
                    expected: n,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if v {
                    m.set(r + 1, c + 1, true);
                }
            }
        }
        Ok(m)
    }

    /// Builds a matrix from `n*n` entries in row-major order.
    pub fn from_row_major(n: usize, entries: &[bool]) -> Result<Self, MatrixError> {
        if n == 0 {
            return Err(MatrixError::EmptyMatrix);
        }
        let mut m = Self::zeros(n);
        for r in 0..n {
            let row = entries.get(r * n..(r + 1) * n).unwrap_or(&[]);
            if row.len() != n {
                return Err(MatrixError::RowLength {
                    row: r + 1,
                    expected: n,
                    found: row.len(),
                });
            }
            for (c, &v) in row.iter().enumerate() {
                if v {
                    m.set(r + 1, c + 1, true);
                }
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn check(&self, i: usize, j: usize) {
        assert!(
            (1..=self.n).contains(&i) && (1..=self.n).contains(&j),
            "index ({i}, {j}) out of range for dimension {}",
            self.n
        );
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.check(i, j);
        let c = j - 1;
        (self.bits[(i - 1) * self.words + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.check(i, j);
        let c = j - 1;
        let w = &mut self.bits[(i - 1) * self.words + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Packed words of row `i`; bits past column `n` are always zero.
    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        assert!((1..=self.n).contains(&i), "row {i} out of range");
        &self.bits[(i - 1) * self.words..i * self.words]
    }

    /// Number of ones in row `i`.
    pub fn row_ones(&self, i: usize) -> usize {
        self.row_words(i)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Column indices `j` with `M[i, j] = 1`, ascending.
    pub fn row_iter_ones(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_words(i)
            .iter()
            .enumerate()
            .flat_map(|(wi, &w)| BitIter(w).map(move |b| wi * WORD + b + 1))
    }

    /// Column indices `j` with `M[i, j] = 0`, ascending.
    pub fn row_iter_zeros(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        self.row_words(i)
            .iter()
            .enumerate()
            .flat_map(move |(wi, &w)| {
                let valid = if (wi + 1) * WORD <= n {
                    !0u64
                } else {
                    (1u64 << (n - wi * WORD)) - 1
                };
                BitIter(!w & valid).map(move |b| wi * WORD + b + 1)
            })
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 1..=self.n {
            for j in self.row_iter_ones(i) {
                t.set(j, i, true);
            }
        }
        t
    }

    /// `true` iff every one of `self` is also a one of `other`.
    pub fn is_dominated_by(&self, other: &BooleanMatrix) -> bool {
        self.n == other.n
            && self
                .bits
                .iter()
                .zip(&other.bits)
                .all(|(a, b)| a & !b == 0)
    }

    /// Row-major entries, one `bool` per position.
    pub fn to_row_major(&self) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 1..=self.n {
            for j in 1..=self.n {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

impl fmt::Debug for BooleanMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BooleanMatrix({})", self.n)?;
        for i in 1..=self.n {
            for j in 1..=self.n {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_ones() {
        let i = BooleanMatrix::identity(70);
        assert_eq!(i.count_ones(), 70);
        assert!(i.get(65, 65));
        assert!(!i.get(65, 64));
        assert_eq!(BooleanMatrix::ones(70).count_ones(), 4900);
    }

    #[test]
    fn row_iterators_cover_word_boundaries() {
        let mut m = BooleanMatrix::zeros(67);
        for j in [1, 63, 64, 65, 67] {
            m.set(3, j, true);
        }
        let ones: Vec<usize> = m.row_iter_ones(3).collect();
        assert_eq!(ones, vec![1, 63, 64, 65, 67]);
        let zeros: Vec<usize> = m.row_iter_zeros(3).collect();
        assert_eq!(zeros.len(), 62);
        assert!(zeros.iter().all(|j| !ones.contains(j)));
        assert_eq!(*zeros.last().unwrap(), 66);
    }

    #[test]
    fn from_rows_rejects_ragged() {
        let err = BooleanMatrix::from_rows(&[vec![true, false], vec![true]]).unwrap_err();
        assert_eq!(
            err,
            MatrixError::RowLength {
                row: 2,
                expected: 2,
                found: 1
            }
        );
        assert_eq!(
            BooleanMatrix::from_rows::<Vec<bool>>(&[]).unwrap_err(),
            MatrixError::EmptyMatrix
        );
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn zero_index_panics() {
        BooleanMatrix::zeros(2).get(0, 1);
    }

    #[test]
    fn transpose_and_domination() {
        let m = BooleanMatrix::from_rows(&[[true, true], [false, false]]).unwrap();
        let t = m.transpose();
        assert!(t.get(1, 1) && t.get(2, 1) && !t.get(1, 2));
        assert!(BooleanMatrix::identity(2).is_dominated_by(&BooleanMatrix::ones(2)));
        assert!(!m.is_dominated_by(&t));
    }
}
