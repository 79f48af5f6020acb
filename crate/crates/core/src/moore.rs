//! Exact polynomials over `F_p` and Moore matrices.
//!
//! A linear form on `F_p^n` is a coefficient vector of length `n`; the
//! ambient variables print as `w1 .. wn`. The Moore matrix of forms
//! `w_1 .. w_m` has entry `(r, j) = w_j^{p^r}` for `0 ≤ r < m`, and the
//! shifted variant raises every entry to a further `p^s`.

use crate::arith::{add_mod, inv_mod, mul_mod, neg_mod, reduce_signed};
use crate::error::{Error, Result};
use crate::linalg::{span_basis, FpMatrix};
use crate::parse::{evaluate, parse_expr, Evaluator};
use serde::{Serialize, Serializer};
use std::cmp::Reverse;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

/// Default bound on the total degree of any polynomial a Moore computation
/// is allowed to produce.
pub const DEFAULT_DEGREE_CAP: usize = 4096;

/// Sparse polynomial over `F_p` in a fixed number of variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactPoly {
    nvars: usize,
    p: u64,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl ExactPoly {
    pub fn zero(nvars: usize, p: u64) -> Self {
        Self {
            nvars,
            p,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, p: u64, c: i64) -> Self {
        let mut out = Self::zero(nvars, p);
        out.add_term(vec![0; nvars], reduce_signed(c, p));
        out
    }

    pub fn one(nvars: usize, p: u64) -> Self {
        Self::constant(nvars, p, 1)
    }

    pub fn var(nvars: usize, p: u64, j: usize) -> Self {
        let mut exps = vec![0; nvars];
        exps[j] = 1;
        let mut out = Self::zero(nvars, p);
        out.add_term(exps, 1);
        out
    }

    /// `Σ_t coeffs[t] · w_{t+1}`.
    pub fn linear(p: u64, coeffs: &[u64]) -> Self {
        let n = coeffs.len();
        let mut out = Self::zero(n, p);
        for (t, &c) in coeffs.iter().enumerate() {
            let mut exps = vec![0; n];
            exps[t] = 1;
            out.add_term(exps, c % p);
        }
        out
    }

    /// Build from `(exponents, coefficient)` pairs.
    pub fn from_terms(nvars: usize, p: u64, terms: &[(Vec<u32>, i64)]) -> Self {
        let mut out = Self::zero(nvars, p);
        for (exps, c) in terms {
            assert_eq!(exps.len(), nvars);
            out.add_term(exps.clone(), reduce_signed(*c, p));
        }
        out
    }

    /// Parse a literal in the variables `w1 .. wn`.
    pub fn parse(s: &str, nvars: usize, p: u64) -> Result<Self> {
        evaluate(&parse_expr(s)?, &PolyEval { nvars, p })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], u64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    fn add_term(&mut self, exps: Vec<u32>, c: u64) {
        if c == 0 {
            return;
        }
        let p = self.p;
        match self.terms.entry(exps) {
            Entry::Occupied(mut slot) => {
                let v = add_mod(*slot.get(), c, p);
                if v == 0 {
                    slot.remove();
                } else {
                    *slot.get_mut() = v;
                }
            }
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
        }
    }

    /// The value if the polynomial is constant.
    pub fn as_constant(&self) -> Option<u64> {
        match self.terms.len() {
            0 => Some(0),
            1 => {
                let (e, &c) = self.terms.iter().next().unwrap();
                e.iter().all(|&x| x == 0).then_some(c)
            }
            _ => None,
        }
    }

    pub fn min_degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| degree_of(e)).min()
    }

    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(|e| degree_of(e)).max()
    }

    /// `Some(d)` when every term has degree `d`.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let lo = self.min_degree()?;
        (self.max_degree() == Some(lo)).then_some(lo)
    }

    fn same(&self, other: &Self) {
        assert!(
            self.nvars == other.nvars && self.p == other.p,
            "polynomials from different rings"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same(other);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        let p = self.p;
        Self {
            terms: self.terms.iter().map(|(e, &c)| (e.clone(), neg_mod(c, p))).collect(),
            ..*self
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: u64) -> Self {
        let p = self.p;
        let c = c % p;
        if c == 0 {
            return Self::zero(self.nvars, p);
        }
        Self {
            terms: self.terms.iter().map(|(e, &v)| (e.clone(), mul_mod(v, c, p))).collect(),
            ..*self
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same(other);
        let p = self.p;
        let mut acc: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let slot = acc.entry(e).or_insert(0);
                *slot = add_mod(*slot, mul_mod(ca, cb, p), p);
            }
        }
        acc.retain(|_, c| *c != 0);
        Self {
            terms: acc,
            ..*self
        }
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.nvars, self.p);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `self^{p^k}`, computed by scaling exponents.
    pub fn frobenius(&self, k: u32) -> Self {
        let q = self.p.pow(k) as u32;
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, &c)| (e.iter().map(|&x| x * q).collect(), c))
                .collect(),
            ..*self
        }
    }

    /// Exact quotient `self / divisor`.
    pub fn div_exact(&self, divisor: &Self) -> Result<Self> {
        self.same(divisor);
        let p = self.p;
        let (lead_exp, &lead_c) = divisor
            .terms
            .iter()
            .next_back()
            .ok_or_else(|| Error::InvalidArgument("division by zero polynomial".into()))?;
        let lead_inv = inv_mod(lead_c, p).unwrap();
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars, p);
        while let Some((e, &c)) = rem.terms.iter().next_back() {
            if e.iter().zip(lead_exp).any(|(a, b)| a < b) {
                return Err(Error::InexactDivision);
            }
            let qe: Vec<u32> = e.iter().zip(lead_exp).map(|(a, b)| a - b).collect();
            let qc = mul_mod(c, lead_inv, p);
            let mut term = Self::zero(self.nvars, p);
            term.add_term(qe, qc);
            rem = rem.sub(&term.mul(divisor));
            quot = quot.add(&term);
        }
        Ok(quot)
    }

    /// Evaluate a linear form's coefficients back out of a degree-1
    /// polynomial.
    pub fn linear_coeffs(&self) -> Option<Vec<u64>> {
        let mut out = vec![0; self.nvars];
        for (e, &c) in &self.terms {
            if degree_of(e) != 1 {
                return None;
            }
            out[e.iter().position(|&x| x == 1).unwrap()] = c;
        }
        Some(out)
    }
}

fn degree_of(e: &[u32]) -> usize {
    e.iter().map(|&x| x as usize).sum()
}

impl fmt::Display for ExactPoly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return out.write_str("0");
        }
        let mut terms: Vec<(&Vec<u32>, u64)> = self.terms.iter().map(|(e, &c)| (e, c)).collect();
        terms.sort_by_key(|(e, _)| (degree_of(e), Reverse(*e)));
        let rendered: Vec<String> = terms
            .into_iter()
            .map(|(e, c)| {
                let factors: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &x)| x > 0)
                    .map(|(t, &x)| match x {
                        1 => format!("w{}", t + 1),
                        _ => format!("w{}^{x}", t + 1),
                    })
                    .collect();
                match (c, factors.is_empty()) {
                    (_, true) => c.to_string(),
                    (1, false) => factors.join("*"),
                    _ => format!("{c}*{}", factors.join("*")),
                }
            })
            .collect();
        out.write_str(&rendered.join(" + "))
    }
}

impl fmt::Debug for ExactPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for ExactPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

struct PolyEval {
    nvars: usize,
    p: u64,
}

impl Evaluator for PolyEval {
    type Value = ExactPoly;

    fn constant(&self, c: i64) -> ExactPoly {
        ExactPoly::constant(self.nvars, self.p, c)
    }

    fn variable(&self, name: &str) -> Result<ExactPoly> {
        match name.strip_prefix('w').and_then(|t| t.parse::<usize>().ok()) {
            Some(t) if (1..=self.nvars).contains(&t) => Ok(ExactPoly::var(self.nvars, self.p, t - 1)),
            _ => Err(Error::Parse {
                pos: 0,
                msg: format!("unknown variable {name}; expected w1..w{}", self.nvars),
            }),
        }
    }

    fn add(&self, a: ExactPoly, b: ExactPoly) -> ExactPoly {
        a.add(&b)
    }

    fn sub(&self, a: ExactPoly, b: ExactPoly) -> ExactPoly {
        a.sub(&b)
    }

    fn mul(&self, a: ExactPoly, b: ExactPoly) -> Result<ExactPoly> {
        Ok(a.mul(&b))
    }

    fn neg(&self, a: ExactPoly) -> ExactPoly {
        a.neg()
    }

    fn pow(&self, a: ExactPoly, exp: u64) -> Result<ExactPoly> {
        Ok(a.pow(exp))
    }
}

/// Square matrix of exact polynomials.
pub type PolyMatrix = Vec<Vec<ExactPoly>>;

/// Determinant by cofactor expansion along the first row.
pub fn determinant(m: &[Vec<ExactPoly>], nvars: usize, p: u64) -> ExactPoly {
    let n = m.len();
    match n {
        0 => ExactPoly::one(nvars, p),
        1 => m[0][0].clone(),
        _ => {
            let mut acc = ExactPoly::zero(nvars, p);
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor = minor(m, 0, j);
                let term = m[0][j].mul(&determinant(&minor, nvars, p));
                acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

/// Matrix with row `i` and column `j` removed.
pub fn minor(m: &[Vec<ExactPoly>], i: usize, j: usize) -> PolyMatrix {
    m.iter()
        .enumerate()
        .filter(|&(r, _)| r != i)
        .map(|(_, row)| {
            row.iter()
                .enumerate()
                .filter(|&(c, _)| c != j)
                .map(|(_, v)| v.clone())
                .collect()
        })
        .collect()
}

/// Comatrix: entry `(i, j)` is `(-1)^{i+j} det` of the minor at `(j, i)`.
pub fn comatrix(m: &[Vec<ExactPoly>], nvars: usize, p: u64) -> PolyMatrix {
    let n = m.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = determinant(&minor(m, j, i), nvars, p);
                    if (i + j) % 2 == 0 {
                        d
                    } else {
                        d.neg()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<ExactPoly>], b: &[Vec<ExactPoly>], nvars: usize, p: u64) -> PolyMatrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    (0..inner).fold(ExactPoly::zero(nvars, p), |acc, k| acc.add(&row[k].mul(&b[k][j])))
                })
                .collect()
        })
        .collect()
}

fn validate_forms(forms: &[Vec<u64>], p: u64) -> Result<usize> {
    let n = forms.first().map_or(0, Vec::len);
    if forms.is_empty() || n == 0 {
        return Err(Error::InvalidArgument("need at least one linear form".into()));
    }
    if forms.iter().any(|w| w.len() != n) {
        return Err(Error::InvalidArgument("linear forms of different lengths".into()));
    }
    if FpMatrix::from_rows(forms, p).rank() < forms.len() {
        return Err(Error::DependentForms);
    }
    Ok(n)
}

fn check_cap(p: u64, m: usize, s: u32, cap: usize) -> Result<()> {
    let needed = (0..m as u32).map(|r| p.pow(r + s) as usize).sum::<usize>();
    if needed > cap {
        return Err(Error::DegreeCap { cap, needed });
    }
    Ok(())
}

/// Moore matrix of the forms, each entry additionally raised to `p^shift`.
pub fn moore_matrix(forms: &[Vec<u64>], p: u64, shift: u32) -> PolyMatrix {
    let m = forms.len();
    let base: Vec<ExactPoly> = forms.iter().map(|w| ExactPoly::linear(p, w)).collect();
    (0..m)
        .map(|r| base.iter().map(|w| w.frobenius(r as u32 + shift)).collect())
        .collect()
}

fn moore_det_shifted(forms: &[Vec<u64>], p: u64, shift: u32, nvars: usize) -> ExactPoly {
    determinant(&moore_matrix(forms, p, shift), nvars, p)
}

/// Determinant of the Moore matrix of independent linear forms.
pub fn moore_det(forms: &[Vec<u64>], p: u64, cap: usize) -> Result<ExactPoly> {
    let n = validate_forms(forms, p)?;
    check_cap(p, forms.len(), 0, cap)?;
    Ok(moore_det_shifted(forms, p, 0, n))
}

#[derive(Clone, Debug, Serialize)]
pub struct CramerCheck {
    pub det: ExactPoly,
    pub comatrix: PolyMatrix,
    pub ok: bool,
}

/// Comatrix of the Moore matrix and the check `M · Com(M) = det · Id`.
pub fn comatrix_cramer_check(forms: &[Vec<u64>], p: u64, cap: usize) -> Result<CramerCheck> {
    let n = validate_forms(forms, p)?;
    check_cap(p, forms.len(), 0, cap)?;
    let m = moore_matrix(forms, p, 0);
    let det = determinant(&m, n, p);
    let com = comatrix(&m, n, p);
    let prod = mat_mul(&m, &com, n, p);
    let ok = prod.iter().enumerate().all(|(i, row)| {
        row.iter().enumerate().all(|(j, v)| {
            if i == j {
                *v == det
            } else {
                v.is_zero()
            }
        })
    });
    Ok(CramerCheck {
        det,
        comatrix: com,
        ok,
    })
}

/// Representative of a line with first nonzero coordinate equal to 1.
pub fn normalize_line(v: &[u64], p: u64) -> Option<Vec<u64>> {
    let lead = *v.iter().find(|&&c| c % p != 0)?;
    let inv = inv_mod(lead % p, p).unwrap();
    Some(v.iter().map(|&c| mul_mod(c % p, inv, p)).collect())
}

/// Normalized representatives of every line of `F_p^dim`, in
/// lexicographic order.
pub fn projective_points(dim: usize, p: u64) -> Vec<Vec<u64>> {
    let total = p.pow(dim as u32);
    let mut out: Vec<Vec<u64>> = (1..total)
        .map(|mut idx| {
            let mut v = vec![0; dim];
            for slot in v.iter_mut().rev() {
                *slot = idx % p;
                idx /= p;
            }
            v
        })
        .filter(|v| normalize_line(v, p).as_deref() == Some(v.as_slice()))
        .collect();
    out.sort();
    out
}

/// Product of normalized representatives of the given lines; repeated
/// lines count once.
pub fn projective_product(lines: &[Vec<u64>], p: u64) -> Result<ExactPoly> {
    let n = lines
        .first()
        .map(Vec::len)
        .ok_or_else(|| Error::InvalidArgument("empty set of lines".into()))?;
    let mut reps = Vec::new();
    for v in lines {
        if v.len() != n {
            return Err(Error::InvalidArgument("lines of different lengths".into()));
        }
        let rep = normalize_line(v, p)
            .ok_or_else(|| Error::InvalidArgument("zero vector is not a line".into()))?;
        if !reps.contains(&rep) {
            reps.push(rep);
        }
    }
    Ok(reps
        .iter()
        .fold(ExactPoly::one(n, p), |acc, r| acc.mul(&ExactPoly::linear(p, r))))
}

/// Every line of `span(basis)`, as ambient vectors.
pub fn lines_of_span(basis: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let n = basis.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<u64>> = projective_points(basis.len(), p)
        .into_iter()
        .map(|c| {
            let v: Vec<u64> = (0..n)
                .map(|t| {
                    c.iter()
                        .zip(basis)
                        .fold(0, |acc, (&ci, b)| add_mod(acc, mul_mod(ci, b[t], p), p))
                })
                .collect();
            normalize_line(&v, p).expect("basis vectors are independent")
        })
        .collect();
    out.sort();
    out
}

fn apply(g: &[u64], v: &[u64], p: u64) -> u64 {
    g.iter()
        .zip(v)
        .fold(0, |acc, (&a, &b)| add_mod(acc, mul_mod(a % p, b % p, p), p))
}

/// Product of the lines of `span(basis)` not contained in `ker g`.
pub fn product_off_kernel(basis: &[Vec<u64>], g: &[u64], p: u64) -> Result<ExactPoly> {
    let lines: Vec<Vec<u64>> = lines_of_span(basis, p)
        .into_iter()
        .filter(|v| apply(g, v, p) != 0)
        .collect();
    if lines.is_empty() {
        return Err(Error::InvalidArgument("functional vanishes on the span".into()));
    }
    projective_product(&lines, p)
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimationCheck {
    pub row: usize,
    pub column: usize,
    pub quotient: ExactPoly,
    pub required_degree: usize,
    pub ok: bool,
}

/// Divide the `(row, column)` minor of the Moore matrix by the Moore
/// determinant of the forms without `column`, and check the quotient's
/// order. Rows and columns are numbered from 1.
pub fn lemma_estimation_check(
    forms: &[Vec<u64>],
    row: usize,
    column: usize,
    p: u64,
    cap: usize,
) -> Result<EstimationCheck> {
    let n = validate_forms(forms, p)?;
    let m = forms.len();
    if m < 2 {
        return Err(Error::InvalidArgument("need at least two forms".into()));
    }
    if !(1..=m).contains(&row) || !(1..=m).contains(&column) {
        return Err(Error::InvalidArgument(format!("row and column must lie in 1..={m}")));
    }
    check_cap(p, m, 0, cap)?;
    let mm = moore_matrix(forms, p, 0);
    let minor_det = determinant(&minor(&mm, row - 1, column - 1), n, p);
    let rest: Vec<Vec<u64>> = forms
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != column - 1)
        .map(|(_, w)| w.clone())
        .collect();
    let divisor = moore_det_shifted(&rest, p, 0, n);
    let quotient = minor_det.div_exact(&divisor)?;
    let required_degree = (p.pow(m as u32 - 1) - p.pow(row as u32 - 1)) as usize;
    let ok = quotient.min_degree().map_or(true, |d| d >= required_degree);
    Ok(EstimationCheck {
        row,
        column,
        quotient,
        required_degree,
        ok,
    })
}

/// Objects of the Cramer-rule construction expressing `U_g^{p^s} · (g∘φ)`
/// through the Frobenius twists `φ^{p^{s+j-1}}`.
#[derive(Clone, Debug, Serialize)]
pub struct UfCertificate {
    pub m: usize,
    pub s: u32,
    /// Basis of the image of `φ` (row-reduced).
    pub image_basis: Vec<Vec<u64>>,
    /// Dual basis `w_1 .. w_m` to `f_1 = g, f_2, .., f_m`, as ambient vectors.
    pub dual_basis: Vec<Vec<u64>>,
    pub lambdas: Vec<u64>,
    pub h: Vec<ExactPoly>,
    pub d: Vec<ExactPoly>,
    pub u: PolyMatrix,
    /// `U_g`, the product of the lines of the image off `ker g`.
    pub u_g: ExactPoly,
    /// `c_j = U_{1,j}`.
    pub coefficients: Vec<ExactPoly>,
    pub degree_bounds: Vec<usize>,
    pub matrix_identity_ok: bool,
    pub rows_ok: bool,
    pub degree_bounds_ok: bool,
    pub membership_ok: bool,
    pub ok: bool,
}

/// Build and verify the certificate for the functional `g` (on the ambient
/// space) restricted to the image of `varphi`, whose entries are the
/// images of a basis of the source as ambient vectors.
pub fn prop_uf_certificate(
    g: &[u64],
    varphi: &[Vec<u64>],
    s: u32,
    p: u64,
    cap: usize,
) -> Result<UfCertificate> {
    let n = g.len();
    if n == 0 || varphi.is_empty() {
        return Err(Error::InvalidArgument("empty functional or map".into()));
    }
    if varphi.iter().any(|v| v.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "every image must have {n} coordinates"
        )));
    }
    let basis = span_basis(varphi, p);
    let m = basis.len();
    if m == 0 {
        return Err(Error::InvalidArgument("the map has zero image".into()));
    }
    let g_on_basis: Vec<u64> = basis.iter().map(|b| apply(g, b, p)).collect();
    let Some(t0) = g_on_basis.iter().position(|&c| c != 0) else {
        return Err(Error::InvalidArgument("g vanishes on the image".into()));
    };
    check_cap(p, m, s, cap)?;

    // f_1 = g, completed by the coordinate functionals other than t0
    let mut f_rows = vec![g_on_basis.clone()];
    for t in (0..m).filter(|&t| t != t0) {
        let mut row = vec![0; m];
        row[t] = 1;
        f_rows.push(row);
    }
    let f_mat = FpMatrix::from_rows(&f_rows, p);
    let w_coords = f_mat.inverse()?;
    let dual_basis: Vec<Vec<u64>> = (0..m)
        .map(|j| {
            (0..n)
                .map(|x| {
                    (0..m).fold(0, |acc, t| add_mod(acc, mul_mod(w_coords.get(t, j), basis[t][x], p), p))
                })
                .collect()
        })
        .collect();
    // coordinates on `basis`, read off its pivots
    let pivots: Vec<usize> = basis
        .iter()
        .map(|b| b.iter().position(|&c| c != 0).unwrap())
        .collect();
    let coords_of = |v: &[u64]| -> Vec<u64> { pivots.iter().map(|&c| v[c] % p).collect() };
    let f_of = |j: usize, v: &[u64]| -> u64 { apply(&f_rows[j], &coords_of(v), p) };

    let mm = moore_matrix(&dual_basis, p, s);
    let det = determinant(&mm, n, p);
    let com = comatrix(&mm, n, p);
    let ps = p.pow(s);

    let mut lambdas = Vec::with_capacity(m);
    let mut h = Vec::with_capacity(m);
    let mut d = Vec::with_capacity(m);
    let mut u: PolyMatrix = Vec::with_capacity(m);
    for j in 0..m {
        let rest: Vec<Vec<u64>> = dual_basis
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != j)
            .map(|(_, w)| w.clone())
            .collect();
        let hat = moore_det_shifted(&rest, p, s, n);
        let f_ambient = |v: &Vec<u64>| f_of(j, v);
        let delta = projective_product(
            &lines_of_span(&basis, p)
                .into_iter()
                .filter(|v| f_ambient(v) != 0)
                .collect::<Vec<_>>(),
            p,
        )?;
        let lambda = delta
            .frobenius(s)
            .mul(&hat)
            .div_exact(&det)?
            .as_constant()
            .filter(|&c| c != 0)
            .ok_or_else(|| Error::Internal(format!("no scalar relates Δ_{} to the Moore quotient", j + 1)))?;
        let lambda_inv = inv_mod(lambda, p).unwrap();
        h.push(hat.scale(lambda_inv));
        let row = com[j]
            .iter()
            .map(|c| c.div_exact(&hat).map(|q| q.scale(lambda)))
            .collect::<Result<Vec<_>>>()?;
        u.push(row);
        lambdas.push(lambda);
        d.push(delta);
    }

    let um = mat_mul(&u, &mm, n, p);
    let matrix_identity_ok = (0..m).all(|i| {
        (0..m).all(|j| {
            if i == j {
                um[i][j] == d[i].frobenius(s)
            } else {
                um[i][j].is_zero()
            }
        })
    });

    let images: Vec<ExactPoly> = varphi.iter().map(|v| ExactPoly::linear(p, v)).collect();
    let rows_ok = varphi.iter().zip(&images).all(|(v, img)| {
        (0..m).all(|j| {
            let lhs = (0..m).fold(ExactPoly::zero(n, p), |acc, i| {
                acc.add(&u[j][i].mul(&img.frobenius(s + i as u32)))
            });
            lhs == d[j].frobenius(s).scale(f_of(j, v))
        })
    });

    let coefficients = u[0].clone();
    let degree_bounds: Vec<usize> = (0..m)
        .map(|j| (ps * (p.pow(m as u32 - 1) - p.pow(j as u32))) as usize)
        .collect();
    let degree_bounds_ok = coefficients
        .iter()
        .zip(&degree_bounds)
        .all(|(c, &b)| c.min_degree().map_or(true, |dmin| dmin >= b));

    let u_g = product_off_kernel(&basis, g, p)?;
    let u_g_twisted = u_g.frobenius(s);
    let membership_ok = varphi.iter().zip(&images).all(|(v, img)| {
        let lhs = u_g_twisted.scale(apply(g, v, p));
        let rhs = coefficients.iter().enumerate().fold(ExactPoly::zero(n, p), |acc, (j, c)| {
            acc.add(&c.mul(&img.frobenius(s + j as u32)))
        });
        lhs == rhs
    });

    let ok = matrix_identity_ok && rows_ok && degree_bounds_ok && membership_ok;
    Ok(UfCertificate {
        m,
        s,
        image_basis: basis,
        dual_basis,
        lambdas,
        h,
        d,
        u,
        u_g,
        coefficients,
        degree_bounds,
        matrix_identity_ok,
        rows_ok,
        degree_bounds_ok,
        membership_ok,
        ok,
    })
}
