//! Small dense linear algebra over odd prime fields `F_p`.
//!
//! Matrices are row-major `Vec<Vec<u64>>` with entries reduced mod p. Sizes
//! stay in the single digits, so plain Gaussian elimination is enough.

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    pub p: u64,
    pub entries: Vec<Vec<u64>>,
}

pub fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat inverse; p prime, a != 0 mod p
    pow_mod(a % p, p - 2, p)
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc: u128 = 1;
    let mut base: u128 = (b % m) as u128;
    b = 0;
    let _ = b;
    let m128 = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    acc as u64
}

impl FpMatrix {
    pub fn new(p: u64, entries: Vec<Vec<u64>>) -> Result<Self> {
        let cols = entries.first().map_or(0, |r| r.len());
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged matrix".into()));
        }
        let entries = entries
            .into_iter()
            .map(|r| r.into_iter().map(|x| x % p).collect())
            .collect();
        Ok(FpMatrix { p, entries })
    }

    pub fn zero(p: u64, rows: usize, cols: usize) -> Self {
        FpMatrix {
            p,
            entries: vec![vec![0; cols]; rows],
        }
    }

    pub fn nrows(&self) -> usize {
        self.entries.len()
    }

    pub fn ncols(&self) -> usize {
        self.entries.first().map_or(0, |r| r.len())
    }

    pub fn transpose(&self) -> FpMatrix {
        let (r, c) = (self.nrows(), self.ncols());
        let mut t = FpMatrix::zero(self.p, c, r);
        for i in 0..r {
            for j in 0..c {
                t.entries[j][i] = self.entries[i][j];
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.nrows() == self.ncols() && *self == self.transpose()
    }

    pub fn add(&self, other: &FpMatrix) -> FpMatrix {
        let p = self.p;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| (x + y) % p).collect())
            .collect();
        FpMatrix { p, entries }
    }

    pub fn scale(&self, k: u64) -> FpMatrix {
        let p = self.p;
        let k = k % p;
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(|&x| x * k % p).collect())
            .collect();
        FpMatrix { p, entries }
    }

    pub fn sub(&self, other: &FpMatrix) -> FpMatrix {
        self.add(&other.scale(self.p - 1))
    }

    pub fn mat_vec(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p as u128;
        self.entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(v)
                    .fold(0u128, |acc, (&a, &b)| (acc + (a as u128) * (b as u128)) % p)
                    as u64
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|r| r.iter().all(|&x| x == 0))
    }

    /// Row echelon reduction; returns (rank, echelon rows).
    pub fn row_echelon(&self) -> (usize, Vec<Vec<u64>>) {
        let p = self.p;
        let mut rows = self.entries.clone();
        let (nr, nc) = (rows.len(), self.ncols());
        let mut rank = 0;
        for col in 0..nc {
            let pivot = (rank..nr).find(|&r| rows[r][col] != 0);
            let Some(pr) = pivot else { continue };
            rows.swap(rank, pr);
            let inv = inv_mod(rows[rank][col], p);
            for j in 0..nc {
                rows[rank][j] = rows[rank][j] * inv % p;
            }
            for r in 0..nr {
                if r != rank && rows[r][col] != 0 {
                    let f = rows[r][col];
                    for j in 0..nc {
                        let sub = f * rows[rank][j] % p;
                        rows[r][j] = (rows[r][j] + p - sub) % p;
                    }
                }
            }
            rank += 1;
            if rank == nr {
                break;
            }
        }
        (rank, rows)
    }

    pub fn rank(&self) -> usize {
        self.row_echelon().0
    }

    /// Basis of the column space, as reduced column vectors.
    pub fn column_space_basis(&self) -> Vec<Vec<u64>> {
        let t = self.transpose();
        let (rank, rows) = t.row_echelon();
        rows.into_iter().take(rank).collect()
    }

    /// Basis of the kernel {v : Av = 0}.
    pub fn kernel_basis(&self) -> Vec<Vec<u64>> {
        let p = self.p;
        let nc = self.ncols();
        let (rank, rows) = self.row_echelon();
        let mut pivot_cols = Vec::new();
        for r in 0..rank {
            let col = rows[r].iter().position(|&x| x != 0).unwrap();
            pivot_cols.push(col);
        }
        let mut basis = Vec::new();
        for free in 0..nc {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![0u64; nc];
            v[free] = 1;
            for (r, &pc) in pivot_cols.iter().enumerate() {
                // pivot entry is 1 after reduction
                v[pc] = (p - rows[r][free] % p) % p;
            }
            basis.push(v);
        }
        basis
    }
}

/// Rank of the span of a list of vectors.
pub fn span_rank(p: u64, vectors: &[Vec<u64>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    FpMatrix::new(p, vectors.to_vec()).unwrap().rank()
}

/// Is `v` in the span of `basis`?
pub fn in_span(p: u64, basis: &[Vec<u64>], v: &[u64]) -> bool {
    if v.iter().all(|&x| x % p == 0) {
        return true;
    }
    let mut rows = basis.to_vec();
    let before = span_rank(p, &rows);
    rows.push(v.to_vec());
    span_rank(p, &rows) == before
}

/// dim(U cap W) via the rank formula dim U + dim W - dim(U + W).
pub fn intersection_dim(p: u64, u: &[Vec<u64>], w: &[Vec<u64>]) -> usize {
    let du = span_rank(p, u);
    let dw = span_rank(p, w);
    let mut all = u.to_vec();
    all.extend_from_slice(w);
    du + dw - span_rank(p, &all)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_mod_five() {
        for a in 1..5 {
            assert_eq!(a * inv_mod(a, 5) % 5, 1);
        }
    }

    #[test]
    fn rank_and_kernel() {
        // rows (1,2,3), (2,4,6) over F_5: rank 1, kernel dim 2
        let m = FpMatrix::new(5, vec![vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
        assert_eq!(m.rank(), 1);
        let k = m.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mat_vec(v).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn column_space() {
        let m = FpMatrix::new(5, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let b = m.column_space_basis();
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn intersection_dims() {
        let p = 5;
        let u = vec![vec![1, 0, 0], vec![0, 1, 0]];
        let w = vec![vec![0, 1, 0], vec![0, 0, 1]];
        assert_eq!(intersection_dim(p, &u, &w), 1);
        let disjoint = vec![vec![0, 0, 1]];
        assert_eq!(intersection_dim(p, &u, &disjoint), 0);
    }

    #[test]
    fn kernel_is_complement_of_pivots() {
        let m = FpMatrix::new(7, vec![vec![1, 3, 0, 2], vec![0, 0, 1, 5]]).unwrap();
        let k = m.kernel_basis();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mat_vec(v).iter().all(|&x| x == 0));
        }
    }
}
