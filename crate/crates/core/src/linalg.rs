//! Dense matrices over F_p and modular linear solves.

use crate::arith::{add_mod, inv_mod, mul_mod, sub_mod};
use crate::error::{Error, Result};
use std::fmt;

/// Dense row-major matrix with entries reduced modulo `modulus`.
///
/// Most callers use a prime modulus; `solve` also accepts prime powers as
/// long as a unit pivot exists in every column.
#[derive(Clone, PartialEq, Eq)]
pub struct FpMatrix {
    rows: usize,
    cols: usize,
    modulus: u64,
    data: Vec<u64>,
}

impl FpMatrix {
    pub fn zero(rows: usize, cols: usize, modulus: u64) -> Self {
        Self {
            rows,
            cols,
            modulus,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize, modulus: u64) -> Self {
        let mut m = Self::zero(n, n, modulus);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Build from rows; entries are reduced.
    pub fn from_rows(rows: &[Vec<u64>], modulus: u64) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zero(r, c, modulus);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix rows");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = v % self.modulus;
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zero(self.cols, self.rows, self.modulus);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let m = self.modulus;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| add_mod(a, b, m))
            .collect();
        Self { data, ..*self }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let m = self.modulus;
        let mut out = Self::zero(self.rows, other.cols, m);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * out.cols + j;
                    out.data[idx] = add_mod(out.data[idx], mul_mod(a, other.get(k, j), m), m);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(self.cols, v.len());
        let m = self.modulus;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &b)| add_mod(acc, mul_mod(a, b % m, m), m))
            })
            .collect()
    }

    /// Rank over a prime field.
    pub fn rank(&self) -> usize {
        let mut work = self.clone();
        work.echelon_in_place().len()
    }

    /// Gaussian elimination in place; returns pivot columns. Requires a
    /// prime modulus.
    fn echelon_in_place(&mut self) -> Vec<usize> {
        let m = self.modulus;
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(pr) = (r..self.rows).find(|&i| self.get(i, c) != 0) else {
                continue;
            };
            self.swap_rows(r, pr);
            let inv = inv_mod(self.get(r, c), m).expect("prime modulus");
            for j in 0..self.cols {
                let v = mul_mod(self.get(r, j), inv, m);
                self.set(r, j, v);
            }
            for i in 0..self.rows {
                if i != r && self.get(i, c) != 0 {
                    let factor = self.get(i, c);
                    for j in 0..self.cols {
                        let v = sub_mod(self.get(i, j), mul_mod(factor, self.get(r, j), m), m);
                        self.set(i, j, v);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Inverse of a square matrix. Works modulo a prime power provided the
    /// matrix is invertible modulo the underlying prime.
    pub fn inverse(&self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(Error::InvalidArgument("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let m = self.modulus;
        let mut a = self.clone();
        let mut inv = Self::identity(n, m);
        for c in 0..n {
            let pr = (c..n)
                .find(|&i| inv_mod(a.get(i, c), m).is_some())
                .ok_or(Error::NotInvertible)?;
            a.swap_rows(c, pr);
            inv.swap_rows(c, pr);
            let u = inv_mod(a.get(c, c), m).unwrap();
            for j in 0..n {
                let v = mul_mod(a.get(c, j), u, m);
                a.set(c, j, v);
                let w = mul_mod(inv.get(c, j), u, m);
                inv.set(c, j, w);
            }
            for i in 0..n {
                let factor = a.get(i, c);
                if i == c || factor == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = sub_mod(a.get(i, j), mul_mod(factor, a.get(c, j), m), m);
                    a.set(i, j, v);
                    let w = sub_mod(inv.get(i, j), mul_mod(factor, inv.get(c, j), m), m);
                    inv.set(i, j, w);
                }
            }
        }
        Ok(inv)
    }
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.to_rows()).finish()
    }
}

/// Row-reduced basis of the span of `vectors` over F_p (prime `p`).
pub fn span_basis(vectors: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let mut m = FpMatrix::from_rows(vectors, p);
    let rank = m.echelon_in_place().len();
    (0..rank).map(|i| m.row(i).to_vec()).collect()
}
