//! Finite fields F_q = F_p[t]/(phi(t)).
//!
//! Elements are stored by their coordinates in the basis `1, λ, ..., λ^{f-1}`
//! where `λ` is the class of `t`. For `f = 1` the field is F_p itself and the
//! single basis element is `λ^0 = 1`, whatever monic linear `phi` is given.

use crate::arith::{add_mod, inv_mod, is_prime, mul_mod, neg_mod, reduce_signed, sub_mod};
use crate::error::{invalid, Error, Result};
use crate::linalg::FpMatrix;
use serde::{Deserialize, Serialize};

/// Parameters of the residue field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub f: usize,
    /// Coefficients of monic `phi`, constant term first (length `f + 1`).
    pub phi: Vec<i64>,
}

impl FieldSpec {
    pub fn new(p: u64, f: usize, phi: Vec<i64>) -> Self {
        Self { p, f, phi }
    }

    /// The prime field with the fixed presentation `phi = t`.
    pub fn prime(p: u64) -> Self {
        Self::new(p, 1, vec![0, 1])
    }
}

/// An element of F_q by coordinates in the power basis of `λ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FqElem(pub Vec<u64>);

impl FqElem {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// Immutable field context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisField {
    p: u64,
    f: usize,
    phi: Vec<u64>,
}

impl GaloisField {
    /// Validate `spec` and build the context.
    pub fn new(spec: &FieldSpec) -> Result<Self> {
        let p = spec.p;
        if !is_prime(p) {
            return Err(invalid("p", format!("{p} is not prime")));
        }
        if p >= 1 << 31 {
            return Err(invalid("p", "prime too large for desk-scale arithmetic"));
        }
        let f = spec.f;
        if f == 0 {
            return Err(invalid("f", "residue degree must be positive"));
        }
        if spec.phi.len() != f + 1 {
            return Err(invalid(
                "phi",
                format!("expected {} coefficients for degree {f}, got {}", f + 1, spec.phi.len()),
            ));
        }
        let phi: Vec<u64> = spec.phi.iter().map(|&c| reduce_signed(c, p)).collect();
        if phi[f] != 1 {
            return Err(invalid("phi", "polynomial is not monic"));
        }
        if let Some(factor) = find_factor(&phi, p) {
            return Err(invalid(
                "phi",
                format!("polynomial is reducible (divisible by {})", poly_to_string(&factor)),
            ));
        }
        Ok(Self { p, f, phi })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.f
    }

    pub fn order(&self) -> u64 {
        self.p.pow(self.f as u32)
    }

    /// Reduced coefficients of `phi`, constant term first.
    pub fn modulus_poly(&self) -> &[u64] {
        &self.phi
    }

    pub fn zero(&self) -> FqElem {
        FqElem(vec![0; self.f])
    }

    pub fn one(&self) -> FqElem {
        self.basis(0)
    }

    /// The basis element `λ^k`, `0 ≤ k < f`.
    pub fn basis(&self, k: usize) -> FqElem {
        assert!(k < self.f);
        let mut c = vec![0; self.f];
        c[k] = 1;
        FqElem(c)
    }

    pub fn from_coords(&self, coords: &[i64]) -> Result<FqElem> {
        if coords.len() != self.f {
            return Err(Error::ContextMismatch(format!(
                "F_q element needs {} coordinates, got {}",
                self.f,
                coords.len()
            )));
        }
        Ok(FqElem(coords.iter().map(|&c| reduce_signed(c, self.p)).collect()))
    }

    /// The element with the given scalar as constant coordinate.
    pub fn scalar(&self, c: u64) -> FqElem {
        let mut v = vec![0; self.f];
        v[0] = c % self.p;
        FqElem(v)
    }

    fn check(&self, a: &FqElem) -> Result<()> {
        if a.0.len() != self.f || a.0.iter().any(|&c| c >= self.p) {
            return Err(Error::ContextMismatch(format!(
                "element {:?} does not belong to F_{}^{}",
                a.0, self.p, self.f
            )));
        }
        Ok(())
    }

    /// Every element, in lexicographic order of coordinates.
    pub fn elements(&self) -> Vec<FqElem> {
        let q = self.order();
        (0..q)
            .map(|mut idx| {
                let mut c = vec![0; self.f];
                for slot in c.iter_mut() {
                    *slot = idx % self.p;
                    idx /= self.p;
                }
                FqElem(c)
            })
            .collect()
    }

    pub fn add(&self, a: &FqElem, b: &FqElem) -> Result<FqElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(FqElem(a.0.iter().zip(&b.0).map(|(&x, &y)| add_mod(x, y, self.p)).collect()))
    }

    pub fn sub(&self, a: &FqElem, b: &FqElem) -> Result<FqElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(FqElem(a.0.iter().zip(&b.0).map(|(&x, &y)| sub_mod(x, y, self.p)).collect()))
    }

    pub fn neg(&self, a: &FqElem) -> Result<FqElem> {
        self.check(a)?;
        Ok(FqElem(a.0.iter().map(|&x| neg_mod(x, self.p)).collect()))
    }

    /// Product, reduced by `phi`.
    pub fn mul(&self, a: &FqElem, b: &FqElem) -> Result<FqElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(&a.0, &b.0))
    }

    fn mul_unchecked(&self, a: &[u64], b: &[u64]) -> FqElem {
        let (p, f) = (self.p, self.f);
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = add_mod(prod[i + j], mul_mod(x, y, p), p);
            }
        }
        for d in (f..prod.len()).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for k in 0..f {
                prod[d - f + k] = sub_mod(prod[d - f + k], mul_mod(c, self.phi[k], p), p);
            }
        }
        prod.truncate(f);
        FqElem(prod)
    }

    pub fn pow(&self, a: &FqElem, mut exp: u64) -> Result<FqElem> {
        self.check(a)?;
        let mut base = a.clone();
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul_unchecked(&acc.0, &base.0);
            }
            base = self.mul_unchecked(&base.0, &base.0);
            exp >>= 1;
        }
        Ok(acc)
    }

    pub fn inv(&self, a: &FqElem) -> Result<FqElem> {
        self.check(a)?;
        if a.is_zero() {
            return Err(Error::NotInvertible);
        }
        if self.f == 1 {
            return Ok(FqElem(vec![inv_mod(a.0[0], self.p).unwrap()]));
        }
        self.pow(a, self.order() - 2)
    }

    /// Matrix of `y ↦ a·y` in the basis `{λ^k}`: column `k` holds the
    /// coordinates of `a·λ^k`.
    pub fn regular_rep_matrix(&self, a: &FqElem) -> Result<FpMatrix> {
        self.check(a)?;
        let mut m = FpMatrix::zero(self.f, self.f, self.p);
        for k in 0..self.f {
            let col = self.mul_unchecked(&a.0, &self.basis(k).0);
            for (r, &v) in col.0.iter().enumerate() {
                m.set(r, k, v);
            }
        }
        Ok(m)
    }
}

/// Remainder of `a` modulo monic `b` over F_p (coefficients constant first).
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let c = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if c != 0 {
            for (k, &bk) in b.iter().enumerate() {
                r[shift + k] = sub_mod(r[shift + k], mul_mod(c, bk, p), p);
            }
        }
        r.pop();
    }
    r
}

/// A monic factor of degree `1..=deg/2`, found by trial division.
fn find_factor(phi: &[u64], p: u64) -> Option<Vec<u64>> {
    let f = phi.len() - 1;
    for d in 1..=f / 2 {
        let count = p.pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut rest = idx;
            for _ in 0..d {
                g.push(rest % p);
                rest /= p;
            }
            g.push(1);
            if poly_rem(phi, &g, p).iter().all(|&c| c == 0) {
                return Some(g);
            }
        }
    }
    None
}

fn poly_to_string(c: &[u64]) -> String {
    let mut terms = Vec::new();
    for (k, &v) in c.iter().enumerate().rev() {
        if v == 0 {
            continue;
        }
        let mono = match k {
            0 => String::new(),
            1 => "t".to_string(),
            _ => format!("t^{k}"),
        };
        terms.push(match (v, k) {
            (_, 0) => v.to_string(),
            (1, _) => mono,
            _ => format!("{v}*{mono}"),
        });
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}
