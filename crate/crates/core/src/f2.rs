//! Bit-packed linear algebra over `F_2` for dimensions up to 32.
//!
//! Vectors are `u32` bitmasks (bit `i` = coordinate `i`, matching the
//! little-endian element encoding of `GroupSpec::Vector { p: 2, .. }`).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub fn parity(x: u32) -> u32 {
    x.count_ones() & 1
}

/// A linear map `F_2^cols -> F_2^rows`; `rows[i]` is the i-th row mask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BitMatrix {
    pub rows: Vec<u32>,
    pub cols: u32,
}

impl BitMatrix {
    pub fn new(rows: Vec<u32>, cols: u32) -> Result<Self> {
        if cols > 32 {
            return Err(Error::SizeGuard("bit matrices support at most 32 columns".into()));
        }
        let mask = mask_lo(cols);
        if rows.iter().any(|&r| r & !mask != 0) {
            return Err(Error::InvalidParameter("row mask exceeds column count".into()));
        }
        Ok(BitMatrix { rows, cols })
    }

    pub fn identity(n: u32) -> Self {
        BitMatrix {
            rows: (0..n).map(|i| 1 << i).collect(),
            cols: n,
        }
    }

    pub fn zero(rows: u32, cols: u32) -> Self {
        BitMatrix {
            rows: vec![0; rows as usize],
            cols,
        }
    }

    pub fn nrows(&self) -> u32 {
        self.rows.len() as u32
    }

    pub fn apply(&self, x: u32) -> u32 {
        let mut y = 0u32;
        for (i, &row) in self.rows.iter().enumerate() {
            y |= parity(row & x) << i;
        }
        y
    }

    /// `self o other`, applying `other` first.
    pub fn compose(&self, other: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != other.nrows() {
            return Err(Error::InvalidParameter("dimension mismatch in composition".into()));
        }
        // row_i(self o other) has bit j = <self.row_i, other column j>
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                let mut out = 0u32;
                for j in 0..other.cols {
                    let col_bit: u32 = other
                        .rows
                        .iter()
                        .enumerate()
                        .map(|(k, &or)| ((or >> j) & 1) << k)
                        .fold(0, |a, b| a | b);
                    out |= parity(r & col_bit) << j;
                }
                out
            })
            .collect();
        BitMatrix::new(rows, other.cols)
    }

    pub fn transpose(&self) -> BitMatrix {
        let rows = (0..self.cols)
            .map(|j| {
                self.rows
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| ((r >> j) & 1) << i)
                    .fold(0, |a, b| a | b)
            })
            .collect();
        BitMatrix {
            rows,
            cols: self.nrows(),
        }
    }

    pub fn rank(&self) -> u32 {
        rank_of_rows(&self.rows)
    }
}

pub fn mask_lo(n: u32) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub fn rank_of_rows(rows: &[u32]) -> u32 {
    let mut basis: Vec<u32> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            let pivot = 1u32 << (31 - b.leading_zeros());
            if v & pivot != 0 {
                v ^= b;
            }
        }
        if v != 0 {
            basis.push(v);
        }
    }
    basis.len() as u32
}

/// Quotient map `F_2^n -> F_2^(n-1)` with kernel spanned by `x != 0`.
/// The basis is extended greedily by pivoting on the lowest set bit of `x`.
pub fn quotient_by_line(n: u32, x: u32) -> Result<BitMatrix> {
    if x == 0 || x >= (1u64 << n) as u32 {
        return Err(Error::InvalidParameter(format!(
            "quotient direction {x:#b} invalid for dimension {n}"
        )));
    }
    let b = x.trailing_zeros();
    // coordinates w.r.t. the basis {x} and {e_i : i != b}: the x-coordinate of
    // v is bit b of v; dropping it leaves row_i(v) = v_i xor v_b * x_i.
    let rows = (0..n)
        .filter(|&i| i != b)
        .map(|i| (1u32 << i) | (((x >> i) & 1) << b))
        .collect();
    BitMatrix::new(rows, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_identity() {
        let m = BitMatrix::identity(5);
        for x in 0..32 {
            assert_eq!(m.apply(x), x);
        }
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a = BitMatrix::new(vec![0b011, 0b110], 3).unwrap();
        let b = BitMatrix::new(vec![0b10, 0b11, 0b01], 2).unwrap();
        let ab = a.compose(&b).unwrap();
        for x in 0..4 {
            assert_eq!(ab.apply(x), a.apply(b.apply(x)));
        }
    }

    #[test]
    fn quotient_kernel_is_the_line() {
        for n in 1..=6u32 {
            for x in 1..(1u32 << n) {
                let q = quotient_by_line(n, x).unwrap();
                assert_eq!(q.nrows(), n - 1);
                assert_eq!(q.apply(0), 0);
                assert_eq!(q.apply(x), 0);
                let kernel: Vec<u32> = (0..(1u32 << n)).filter(|&v| q.apply(v) == 0).collect();
                assert_eq!(kernel, vec![0, x].into_iter().collect::<std::collections::BTreeSet<_>>().into_iter().collect::<Vec<_>>());
                // surjectivity: rank n-1
                assert_eq!(q.rank(), n - 1);
            }
        }
    }

    #[test]
    fn transpose_involution() {
        let m = BitMatrix::new(vec![0b1011, 0b0110, 0b1110], 4).unwrap();
        assert_eq!(m.transpose().transpose(), m);
    }
}
