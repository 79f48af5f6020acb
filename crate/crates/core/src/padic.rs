//! The finite ring O_F / p^M O_F.
//!
//! `F` is one unramified step `Q_p[t]/(phi)` followed by one Eisenstein step
//! `E(π) = 0`. Elements are stored by coordinates on `{π^i t^k}`
//! (`0 ≤ i < e`, `0 ≤ k < f`), flattened as `i * f + k`, each in `[0, p^M)`.

use crate::arith::{add_mod, mul_mod, neg_mod, reduce_signed, sub_mod};
use crate::error::{invalid, Error, Result};
use crate::gf::{FieldSpec, FqElem, GaloisField};
use crate::linalg::FpMatrix;
use serde::{Deserialize, Serialize};

/// Coefficients of the Eisenstein polynomial, constant term first.
///
/// Each coefficient is either an integer or a full list of `f` coordinates
/// over the unramified ring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EisensteinCoeff {
    Integer(i64),
    Unramified(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalFieldSpec {
    pub base: FieldSpec,
    pub e: usize,
    pub eis: Vec<EisensteinCoeff>,
    /// p-adic precision exponent `M`.
    pub m: u32,
}

impl LocalFieldSpec {
    /// `E(π) = π^e - p`.
    pub fn pure(base: FieldSpec, e: usize, m: u32) -> Self {
        let p = base.p as i64;
        let mut eis = vec![EisensteinCoeff::Integer(0); e + 1];
        eis[0] = EisensteinCoeff::Integer(-p);
        eis[e] = EisensteinCoeff::Integer(1);
        Self { base, e, eis, m }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OFElem {
    pub coords: Vec<u64>,
}

/// Coordinates `a_{i,k}` on the Z_p-basis `{ϖ^i [λ^k]}`, flattened as
/// `i * f + k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DigitVector {
    pub e: usize,
    pub f: usize,
    pub digits: Vec<u64>,
}

impl DigitVector {
    pub fn get(&self, i: usize, k: usize) -> u64 {
        self.digits[i * self.f + k]
    }

    /// Rows indexed by `i`.
    pub fn rows(&self) -> Vec<Vec<u64>> {
        self.digits.chunks(self.f).map(<[u64]>::to_vec).collect()
    }
}

/// An element of O_F / p O_F ≅ F_q[ϖ]/(ϖ^e), by coordinates on `{ϖ^i λ^k}`
/// over F_p.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueElem(pub Vec<u64>);

impl ResidueElem {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

/// Context for O_F / p^M with cached Teichmüller lifts and the change of
/// basis to `{ϖ^i [λ^k]}`.
#[derive(Clone, Debug)]
pub struct LocalRing {
    field: GaloisField,
    p: u64,
    f: usize,
    e: usize,
    m: u32,
    modulus: u64,
    phi_lift: Vec<u64>,
    eis: Vec<Vec<u64>>,
    teich: Vec<OFElem>,
    basis: FpMatrix,
    basis_inv: FpMatrix,
}

impl PartialEq for LocalRing {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field
            && self.e == other.e
            && self.m == other.m
            && self.eis == other.eis
    }
}

impl LocalRing {
    pub fn new(spec: &LocalFieldSpec) -> Result<Self> {
        let field = GaloisField::new(&spec.base)?;
        let (p, f, e, m) = (field.p(), field.degree(), spec.e, spec.m);
        if e == 0 {
            return Err(invalid("e", "ramification index must be positive"));
        }
        if m == 0 {
            return Err(invalid("M", "precision exponent must be positive"));
        }
        let modulus = (p as u128).checked_pow(m).filter(|&q| q < 1 << 31);
        let Some(modulus) = modulus.map(|q| q as u64) else {
            return Err(invalid("M", format!("p^M = {p}^{m} is too large")));
        };
        let phi_lift = field.modulus_poly().to_vec();
        let eis = Self::validate_eisenstein(&spec.eis, p, f, e, modulus)?;

        let mut ring = Self {
            field,
            p,
            f,
            e,
            m,
            modulus,
            phi_lift,
            eis,
            teich: Vec::new(),
            basis: FpMatrix::zero(0, 0, modulus),
            basis_inv: FpMatrix::zero(0, 0, modulus),
        };
        let teich = (0..f)
            .map(|k| ring.teichmuller_lift(&ring.unramified_basis(k)))
            .collect::<Result<Vec<_>>>()?;
        ring.teich = teich;

        let n = e * f;
        let mut basis = FpMatrix::zero(n, n, modulus);
        for i in 0..e {
            let pi_i = ring.pow(&ring.uniformizer(), i as u64);
            for k in 0..f {
                let col = ring.mul(&pi_i, &ring.teich[k]);
                for (r, &v) in col.coords.iter().enumerate() {
                    basis.set(r, i * f + k, v);
                }
            }
        }
        ring.basis_inv = basis
            .inverse()
            .map_err(|_| Error::Internal("basis {ϖ^i [λ^k]} not invertible mod p".into()))?;
        ring.basis = basis;
        Ok(ring)
    }

    fn validate_eisenstein(
        coeffs: &[EisensteinCoeff],
        p: u64,
        f: usize,
        e: usize,
        modulus: u64,
    ) -> Result<Vec<Vec<u64>>> {
        if coeffs.len() != e + 1 {
            return Err(invalid(
                "eisenstein",
                format!("expected {} coefficients for degree {e}, got {}", e + 1, coeffs.len()),
            ));
        }
        let raw: Vec<Vec<i64>> = coeffs
            .iter()
            .map(|c| match c {
                EisensteinCoeff::Integer(v) => {
                    let mut row = vec![0; f];
                    row[0] = *v;
                    Ok(row)
                }
                EisensteinCoeff::Unramified(v) if v.len() == f => Ok(v.clone()),
                EisensteinCoeff::Unramified(v) => Err(invalid(
                    "eisenstein",
                    format!("coefficient has {} coordinates, expected {f}", v.len()),
                )),
            })
            .collect::<Result<_>>()?;
        let lead = &raw[e];
        if lead[0] != 1 || lead[1..].iter().any(|&c| c != 0) {
            return Err(invalid("eisenstein", "polynomial is not monic"));
        }
        let p2 = (p * p) as i64;
        for (i, c) in raw[..e].iter().enumerate() {
            if c.iter().any(|&v| v.rem_euclid(p as i64) != 0) {
                let what = if i == 0 { "constant term" } else { "coefficient" };
                return Err(invalid(
                    "eisenstein",
                    format!("{what} of degree {i} is not divisible by p"),
                ));
            }
        }
        if raw[0].iter().all(|&v| v.rem_euclid(p2) == 0) {
            return Err(invalid("eisenstein", "constant term is divisible by p^2"));
        }
        Ok(raw
            .iter()
            .map(|c| c.iter().map(|&v| reduce_signed(v, modulus)).collect())
            .collect())
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn e(&self) -> usize {
        self.e
    }

    pub fn f(&self) -> usize {
        self.f
    }

    /// `n = e·f`.
    pub fn n(&self) -> usize {
        self.e * self.f
    }

    pub fn precision(&self) -> u32 {
        self.m
    }

    /// `p^M`.
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn zero(&self) -> OFElem {
        OFElem {
            coords: vec![0; self.n()],
        }
    }

    pub fn one(&self) -> OFElem {
        self.from_int(1)
    }

    pub fn from_int(&self, v: i64) -> OFElem {
        let mut x = self.zero();
        x.coords[0] = reduce_signed(v, self.modulus);
        x
    }

    /// The class of `π`, which is the uniformizer `ϖ`.
    pub fn uniformizer(&self) -> OFElem {
        if self.e == 1 {
            // π = -E_0 when E is linear
            let mut x = self.zero();
            for k in 0..self.f {
                x.coords[k] = neg_mod(self.eis[0][k], self.modulus);
            }
            return x;
        }
        let mut x = self.zero();
        x.coords[self.f] = 1;
        x
    }

    /// The element `t^k` of the unramified part.
    pub fn unramified_basis(&self, k: usize) -> OFElem {
        let mut x = self.zero();
        x.coords[k] = 1;
        x
    }

    pub fn from_coords(&self, coords: &[i64]) -> Result<OFElem> {
        if coords.len() != self.n() {
            return Err(Error::ContextMismatch(format!(
                "O_F element needs {} coordinates, got {}",
                self.n(),
                coords.len()
            )));
        }
        Ok(OFElem {
            coords: coords.iter().map(|&c| reduce_signed(c, self.modulus)).collect(),
        })
    }

    fn check(&self, a: &OFElem) -> Result<()> {
        if a.coords.len() != self.n() || a.coords.iter().any(|&c| c >= self.modulus) {
            return Err(Error::ContextMismatch(format!(
                "element {:?} does not belong to this O_F/p^M",
                a.coords
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, a: &OFElem, b: &OFElem) -> Result<OFElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.add(a, b))
    }

    pub fn checked_mul(&self, a: &OFElem, b: &OFElem) -> Result<OFElem> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul(a, b))
    }

    pub fn checked_neg(&self, a: &OFElem) -> Result<OFElem> {
        self.check(a)?;
        Ok(self.neg(a))
    }

    pub(crate) fn add(&self, a: &OFElem, b: &OFElem) -> OFElem {
        OFElem {
            coords: a
                .coords
                .iter()
                .zip(&b.coords)
                .map(|(&x, &y)| add_mod(x, y, self.modulus))
                .collect(),
        }
    }

    pub(crate) fn neg(&self, a: &OFElem) -> OFElem {
        OFElem {
            coords: a.coords.iter().map(|&x| neg_mod(x, self.modulus)).collect(),
        }
    }

    pub fn sub(&self, a: &OFElem, b: &OFElem) -> OFElem {
        self.add(a, &self.neg(b))
    }

    /// Product in `(Z/p^M)[t]/(phi~)`.
    fn mul_unramified(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let (q, f) = (self.modulus, self.f);
        let mut prod = vec![0u64; 2 * f - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = add_mod(prod[i + j], mul_mod(x, y, q), q);
            }
        }
        for d in (f..prod.len()).rev() {
            let c = prod[d];
            if c == 0 {
                continue;
            }
            prod[d] = 0;
            for k in 0..f {
                prod[d - f + k] = sub_mod(prod[d - f + k], mul_mod(c, self.phi_lift[k], q), q);
            }
        }
        prod.truncate(f);
        prod
    }

    pub(crate) fn mul(&self, a: &OFElem, b: &OFElem) -> OFElem {
        let (q, f, e) = (self.modulus, self.f, self.e);
        let mut prod = vec![vec![0u64; f]; 2 * e - 1];
        for i in 0..e {
            let ai = &a.coords[i * f..(i + 1) * f];
            if ai.iter().all(|&c| c == 0) {
                continue;
            }
            for j in 0..e {
                let bj = &b.coords[j * f..(j + 1) * f];
                let c = self.mul_unramified(ai, bj);
                for k in 0..f {
                    prod[i + j][k] = add_mod(prod[i + j][k], c[k], q);
                }
            }
        }
        // π^e = -(E_0 + E_1 π + ... + E_{e-1} π^{e-1})
        for d in (e..prod.len()).rev() {
            let c = std::mem::replace(&mut prod[d], vec![0; f]);
            if c.iter().all(|&v| v == 0) {
                continue;
            }
            for i in 0..e {
                let t = self.mul_unramified(&c, &self.eis[i]);
                for k in 0..f {
                    prod[d - e + i][k] = sub_mod(prod[d - e + i][k], t[k], q);
                }
            }
        }
        OFElem {
            coords: prod[..e].concat(),
        }
    }

    pub fn pow(&self, a: &OFElem, mut exp: u64) -> OFElem {
        let mut base = a.clone();
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }

    /// `p^r · x`.
    pub fn scale_by_p_power(&self, x: &OFElem, r: u32) -> OFElem {
        let pr = (self.p as u128).pow(r.min(self.m)) % self.modulus as u128;
        OFElem {
            coords: x
                .coords
                .iter()
                .map(|&c| mul_mod(c, pr as u64, self.modulus))
                .collect(),
        }
    }

    /// The Teichmüller representative `[λ^k]`.
    pub fn teichmuller(&self, k: usize) -> Result<OFElem> {
        self.teich
            .get(k)
            .cloned()
            .ok_or_else(|| Error::InvalidArgument(format!("k = {k} must be below f = {}", self.f)))
    }

    /// Fixed point of `y ↦ y^q` starting from `x`; this is the Teichmüller
    /// lift of the residue of `x`.
    pub fn teichmuller_lift(&self, x: &OFElem) -> Result<OFElem> {
        self.check(x)?;
        let q = self.field.order();
        let mut y = x.clone();
        // each step gains one ϖ-adic digit
        for _ in 0..=(self.e as u32 * self.m) {
            let next = self.pow(&y, q);
            if next == y {
                return Ok(y);
            }
            y = next;
        }
        Err(Error::Internal("Teichmüller iteration did not stabilise".into()))
    }

    /// The `n × n` matrix whose columns are the coordinates of `ϖ^i [λ^k]`.
    pub fn digit_basis(&self) -> &FpMatrix {
        &self.basis
    }

    pub fn digits_decompose(&self, x: &OFElem) -> Result<DigitVector> {
        self.check(x)?;
        Ok(DigitVector {
            e: self.e,
            f: self.f,
            digits: self.basis_inv.mul_vec(&x.coords),
        })
    }

    pub fn digits_compose(&self, d: &DigitVector) -> Result<OFElem> {
        if d.e != self.e || d.f != self.f || d.digits.len() != self.n() {
            return Err(Error::ContextMismatch("digit vector shape".into()));
        }
        let digits: Vec<u64> = d.digits.iter().map(|&v| v % self.modulus).collect();
        Ok(OFElem {
            coords: self.basis.mul_vec(&digits),
        })
    }

    /// Parse signed digits given row by row (`rows[i][k] = a_{i,k}`).
    pub fn digit_vector(&self, rows: &[Vec<i64>]) -> Result<DigitVector> {
        if rows.len() != self.e || rows.iter().any(|r| r.len() != self.f) {
            return Err(Error::InvalidArgument(format!(
                "digit vector must have {} rows of {} entries",
                self.e, self.f
            )));
        }
        Ok(DigitVector {
            e: self.e,
            f: self.f,
            digits: rows
                .iter()
                .flatten()
                .map(|&v| reduce_signed(v, self.modulus))
                .collect(),
        })
    }

    pub fn from_digits(&self, rows: &[Vec<i64>]) -> Result<OFElem> {
        self.digits_compose(&self.digit_vector(rows)?)
    }

    /// Image in O_F/p ≅ F_q[ϖ]/(ϖ^e).
    pub fn reduce_mod_p(&self, x: &OFElem) -> ResidueElem {
        ResidueElem(x.coords.iter().map(|&c| c % self.p).collect())
    }

    /// Image in the residue field O_F/ϖ = F_q.
    pub fn residue(&self, x: &OFElem) -> FqElem {
        FqElem(x.coords[..self.f].iter().map(|&c| c % self.p).collect())
    }

    /// Every element of O_F/p^M; only sensible for tiny rings.
    pub fn elements(&self) -> Vec<OFElem> {
        let n = self.n();
        let total = (self.modulus as u128).pow(n as u32);
        assert!(total <= 1 << 20, "ring too large to enumerate");
        (0..total as u64)
            .map(|mut idx| {
                let mut c = vec![0; n];
                for slot in c.iter_mut() {
                    *slot = idx % self.modulus;
                    idx /= self.modulus;
                }
                OFElem { coords: c }
            })
            .collect()
    }
}
