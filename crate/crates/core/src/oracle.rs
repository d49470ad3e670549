//! Charged oracle access to the input matrices and the uncharged ground truth.
//!
//! Every read of an entry of `A` or `B` made by the algorithm goes through a
//! [`QueryLedger`]. Ground-truth helpers ([`brute_force_product`],
//! [`count_ones`]) never touch a ledger.

use crate::matrix::{BooleanMatrix, DimensionMismatch};

/// Monotone counters of charged reads of `A` and `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryLedger {
    count_a: u64,
    count_b: u64,
    charge_enabled: bool,
}

/// A point-in-time copy of the ledger counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LedgerSnapshot {
    pub a: u64,
    pub b: u64,
}

impl LedgerSnapshot {
    pub fn total(&self) -> u64 {
        self.a + self.b
    }

    /// Counter deltas since `earlier`.
    pub fn since(&self, earlier: LedgerSnapshot) -> LedgerSnapshot {
        LedgerSnapshot {
            a: self.a - earlier.a,
            b: self.b - earlier.b,
        }
    }
}

impl Default for QueryLedger {
    fn default() -> Self {
        Self::new()
    }
}

impl QueryLedger {
    pub fn new() -> Self {
        QueryLedger {
            count_a: 0,
            count_b: 0,
            charge_enabled: true,
        }
    }

    /// A ledger that answers reads without counting them.
    pub fn uncharged() -> Self {
        QueryLedger {
            charge_enabled: false,
            ..Self::new()
        }
    }

    pub fn count_a(&self) -> u64 {
        self.count_a
    }

    pub fn count_b(&self) -> u64 {
        self.count_b
    }

    pub fn total(&self) -> u64 {
        self.count_a + self.count_b
    }

    pub fn charge_enabled(&self) -> bool {
        self.charge_enabled
    }

    pub fn set_charge_enabled(&mut self, enabled: bool) {
        self.charge_enabled = enabled;
    }

    pub fn snapshot(&self) -> LedgerSnapshot {
        LedgerSnapshot {
            a: self.count_a,
            b: self.count_b,
        }
    }

    /// Returns `A[i, j]`, charging one query to `A`.
    ///
    /// Out-of-range indices are a programming error and panic.
    #[inline]
    pub fn read_a(&mut self, a: &BooleanMatrix, i: usize, j: usize) -> bool {
        let bit = a.get(i, j);
        if self.charge_enabled {
            self.count_a += 1;
        }
        bit
    }

    /// Returns `B[k, j]`, charging one query to `B`.
    #[inline]
    pub fn read_b(&mut self, b: &BooleanMatrix, k: usize, j: usize) -> bool {
        let bit = b.get(k, j);
        if self.charge_enabled {
            self.count_b += 1;
        }
        bit
    }

    /// Charges `queries` reads of `A` without performing them.
    pub fn charge_a(&mut self, queries: u64) {
        if self.charge_enabled {
            self.count_a += queries;
        }
    }

    /// Charges `queries` reads of `B` without performing them.
    pub fn charge_b(&mut self, queries: u64) {
        if self.charge_enabled {
            self.count_b += queries;
        }
    }
}

/// Semiring product by the cubic triple loop. Charges nothing.
pub fn brute_force_product(
    a: &BooleanMatrix,
    b: &BooleanMatrix,
) -> Result<BooleanMatrix, DimensionMismatch> {
    let n = a.dim();
    if b.dim() != n {
        return Err(DimensionMismatch {
            left: n,
            right: b.dim(),
        });
    }
    let mut c = BooleanMatrix::zeros(n);
    for i in 1..=n {
        for j in 1..=n {
            if (1..=n).any(|k| a.get(i, k) && b.get(k, j)) {
                c.set(i, j, true);
            }
        }
    }
    Ok(c)
}

/// Number of ones in `m`.
pub fn count_ones(m: &BooleanMatrix) -> usize {
    m.count_ones()
}
