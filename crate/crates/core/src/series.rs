//! Truncated power series `A_N = F_p[X_{i,k}] / m^N`.
//!
//! Variables are indexed by `(i, k)` with `0 ≤ i < e`, `0 ≤ k < f` and
//! flattened as `i * f + k`. A series is a sparse map from monomials of total
//! degree `< N` to nonzero coefficients in `[0, p)`. Monomials are kept in
//! graded-lexicographic order: lower total degree first, and within a degree
//! the larger exponent of the earlier variable first.

use crate::arith::{add_mod, inv_mod, is_prime, mul_mod, neg_mod, reduce_signed};
use crate::error::{invalid, Error, Result};
use crate::parse::{evaluate, parse_expr, Evaluator};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock};

/// Largest supported number of variables (one byte per exponent in a `u64`).
pub const MAX_VARS: usize = 8;
/// Largest supported truncation order.
pub const MAX_ORDER: usize = 255;

/// A monomial with up to [`MAX_VARS`] exponents packed one per byte; the
/// first variable sits in the most significant byte.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mono {
    bits: u64,
    deg: u32,
}

impl Mono {
    pub const ONE: Mono = Mono { bits: 0, deg: 0 };

    #[inline]
    fn shift(j: usize) -> u32 {
        8 * (MAX_VARS - 1 - j) as u32
    }

    pub fn var(j: usize) -> Self {
        Self::var_pow(j, 1)
    }

    pub fn var_pow(j: usize, e: u32) -> Self {
        assert!(j < MAX_VARS && e < 256);
        Mono {
            bits: (e as u64) << Self::shift(j),
            deg: e,
        }
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        exps.iter()
            .enumerate()
            .fold(Mono::ONE, |m, (j, &e)| m.mul(Mono::var_pow(j, e)))
    }

    #[inline]
    pub fn degree(self) -> usize {
        self.deg as usize
    }

    #[inline]
    pub fn exponent(self, j: usize) -> u32 {
        ((self.bits >> Self::shift(j)) & 0xff) as u32
    }

    pub fn exponents(self, n: usize) -> Vec<u32> {
        (0..n).map(|j| self.exponent(j)).collect()
    }

    /// Product; the caller guarantees every exponent of the result is < 256.
    #[inline]
    pub fn mul(self, other: Mono) -> Mono {
        Mono {
            bits: self.bits + other.bits,
            deg: self.deg + other.deg,
        }
    }

    pub fn divides(self, other: Mono) -> bool {
        (0..MAX_VARS).all(|j| self.exponent(j) <= other.exponent(j))
    }

    /// Quotient `other / self` if it exists.
    pub fn divide_into(self, other: Mono) -> Option<Mono> {
        self.divides(other).then(|| Mono {
            bits: other.bits - self.bits,
            deg: other.deg - self.deg,
        })
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.deg
            .cmp(&other.deg)
            .then_with(|| other.bits.cmp(&self.bits))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps: Vec<u32> = (0..MAX_VARS).map(|j| self.exponent(j)).collect();
        write!(f, "Mono{exps:?}")
    }
}

/// Order of a series: the largest `k` with `x ∈ m^k`, or "at least the
/// precision" for the zero representative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degree {
    Finite(usize),
    AtLeastPrecision,
}

impl Degree {
    pub fn finite(self) -> Option<usize> {
        match self {
            Degree::Finite(k) => Some(k),
            Degree::AtLeastPrecision => None,
        }
    }

    /// The value with "at least precision" replaced by `cap`.
    pub fn or_cap(self, cap: usize) -> usize {
        self.finite().unwrap_or(cap)
    }
}

/// All monomials of degree `< N` in canonical order with an index lookup.
#[derive(Debug)]
pub struct MonomialTable {
    monos: Vec<Mono>,
    index: HashMap<Mono, usize>,
    /// `offsets[d]` = number of monomials of degree `< d`, for `d ≤ N`.
    offsets: Vec<usize>,
}

impl MonomialTable {
    fn build(n: usize, order: usize) -> Self {
        let mut monos = Vec::new();
        fn rec(j: usize, n: usize, left: u32, cur: Mono, out: &mut Vec<Mono>) {
            if j == n {
                out.push(cur);
                return;
            }
            for e in 0..=left {
                rec(j + 1, n, left - e, cur.mul(Mono::var_pow(j, e)), out);
            }
        }
        if order > 0 {
            rec(0, n, order as u32 - 1, Mono::ONE, &mut monos);
        }
        monos.sort();
        let index = monos.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut offsets = vec![0; order + 1];
        for d in 0..=order {
            offsets[d] = monos.partition_point(|m| m.degree() < d);
        }
        Self {
            monos,
            index,
            offsets,
        }
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn monomials(&self) -> &[Mono] {
        &self.monos
    }

    pub fn index_of(&self, m: Mono) -> Option<usize> {
        self.index.get(&m).copied()
    }

    /// Number of monomials of degree `< d`.
    pub fn offset(&self, d: usize) -> usize {
        self.offsets[d.min(self.offsets.len() - 1)]
    }
}

/// Context of the truncated ring: prime, variable shape and order `N`.
pub struct SeriesRing {
    p: u64,
    e: usize,
    f: usize,
    order: usize,
    table: OnceLock<MonomialTable>,
}

impl fmt::Debug for SeriesRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesRing")
            .field("p", &self.p)
            .field("e", &self.e)
            .field("f", &self.f)
            .field("N", &self.order)
            .finish()
    }
}

impl PartialEq for SeriesRing {
    fn eq(&self, other: &Self) -> bool {
        (self.p, self.e, self.f, self.order) == (other.p, other.e, other.f, other.order)
    }
}

impl Eq for SeriesRing {}

impl SeriesRing {
    /// Ring in the variables `X_{i,k}`, `0 ≤ i < e`, `0 ≤ k < f`, modulo `m^N`.
    pub fn new(p: u64, e: usize, f: usize, order: usize) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(invalid("p", format!("{p} is not prime")));
        }
        if p >= 1 << 31 {
            return Err(invalid("p", "prime too large"));
        }
        let n = e * f;
        if n == 0 {
            return Err(invalid("n", "need at least one variable"));
        }
        if n > MAX_VARS {
            return Err(invalid("n", format!("at most {MAX_VARS} variables supported, got {n}")));
        }
        if !(2..=MAX_ORDER).contains(&order) {
            return Err(invalid("N", format!("truncation order must lie in 2..={MAX_ORDER}")));
        }
        Ok(Arc::new(Self {
            p,
            e,
            f,
            order,
            table: OnceLock::new(),
        }))
    }

    /// Ring in `n` variables `X0_0, X1_0, ...`.
    pub fn plain(p: u64, n: usize, order: usize) -> Result<Arc<Self>> {
        Self::new(p, n, 1, order)
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

    pub fn nvars(&self) -> usize {
        self.e * self.f
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn var_index(&self, i: usize, k: usize) -> usize {
        assert!(i < self.e && k < self.f, "variable X{i}_{k} out of range");
        i * self.f + k
    }

    pub fn var_name(&self, j: usize) -> String {
        format!("X{}_{}", j / self.f, j % self.f)
    }

    pub fn table(&self) -> &MonomialTable {
        self.table
            .get_or_init(|| MonomialTable::build(self.nvars(), self.order))
    }

    pub fn zero(self: &Arc<Self>) -> TruncatedSeries {
        TruncatedSeries {
            ring: Arc::clone(self),
            terms: BTreeMap::new(),
            precision: self.order,
        }
    }

    pub fn constant(self: &Arc<Self>, c: i64) -> TruncatedSeries {
        self.monomial(Mono::ONE, c)
    }

    pub fn one(self: &Arc<Self>) -> TruncatedSeries {
        self.constant(1)
    }

    /// The variable with flat index `j`.
    pub fn var(self: &Arc<Self>, j: usize) -> TruncatedSeries {
        assert!(j < self.nvars());
        self.monomial(Mono::var(j), 1)
    }

    /// `c · m`, truncated.
    pub fn monomial(self: &Arc<Self>, m: Mono, c: i64) -> TruncatedSeries {
        let mut s = self.zero();
        let c = reduce_signed(c, self.p);
        if c != 0 && m.degree() < self.order {
            s.terms.insert(m, c);
        }
        s
    }

    /// Build from `(exponents, coefficient)` pairs; coefficients are reduced
    /// and like terms combined.
    pub fn from_terms(self: &Arc<Self>, terms: &[(Vec<u32>, i64)]) -> Result<TruncatedSeries> {
        let mut s = self.zero();
        for (exps, c) in terms {
            if exps.len() != self.nvars() {
                return Err(Error::InvalidArgument(format!(
                    "exponent vector has length {}, expected {}",
                    exps.len(),
                    self.nvars()
                )));
            }
            let deg: u32 = exps.iter().sum();
            if deg as usize >= self.order {
                continue;
            }
            s.add_term(Mono::from_exponents(exps), reduce_signed(*c, self.p));
        }
        Ok(s)
    }

    /// Parse a literal such as `X0_0^2*X1_0 + X0_1`.
    pub fn parse(self: &Arc<Self>, s: &str) -> Result<TruncatedSeries> {
        let expr = parse_expr(s)?;
        evaluate(&expr, &SeriesEval(self))
    }

    /// The series with the given dense coordinates on [`SeriesRing::table`].
    pub fn from_dense(self: &Arc<Self>, v: &[u64]) -> TruncatedSeries {
        let table = self.table();
        let mut s = self.zero();
        for (idx, &c) in v.iter().enumerate() {
            if c % self.p != 0 {
                s.terms.insert(table.monomials()[idx], c % self.p);
            }
        }
        s
    }
}

struct SeriesEval<'a>(&'a Arc<SeriesRing>);

impl Evaluator for SeriesEval<'_> {
    type Value = TruncatedSeries;

    fn constant(&self, c: i64) -> TruncatedSeries {
        self.0.constant(c)
    }

    fn variable(&self, name: &str) -> Result<TruncatedSeries> {
        let ring = self.0;
        let parsed = name
            .strip_prefix('X')
            .and_then(|rest| rest.split_once('_'))
            .and_then(|(i, k)| Some((i.parse::<usize>().ok()?, k.parse::<usize>().ok()?)));
        match parsed {
            Some((i, k)) if i < ring.e && k < ring.f => Ok(ring.var(ring.var_index(i, k))),
            _ => Err(Error::Parse {
                pos: 0,
                msg: format!(
                    "unknown variable {name}; expected X<i>_<k> with i < {}, k < {}",
                    ring.e, ring.f
                ),
            }),
        }
    }

    fn add(&self, a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries {
        &a + &b
    }

    fn sub(&self, a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries {
        &a - &b
    }

    fn mul(&self, a: TruncatedSeries, b: TruncatedSeries) -> Result<TruncatedSeries> {
        Ok(&a * &b)
    }

    fn neg(&self, a: TruncatedSeries) -> TruncatedSeries {
        -&a
    }

    fn pow(&self, a: TruncatedSeries, exp: u64) -> Result<TruncatedSeries> {
        Ok(a.pow(exp))
    }
}

/// An element of `A_N`.
///
/// `precision` records how much of the series is actually known: the value
/// is exact modulo `m^precision` (`≤ N`). It drops below `N` after
/// differentiation and propagates through arithmetic; equality ignores it.
#[derive(Clone)]
pub struct TruncatedSeries {
    ring: Arc<SeriesRing>,
    terms: BTreeMap<Mono, u64>,
    precision: usize,
}

impl PartialEq for TruncatedSeries {
    fn eq(&self, other: &Self) -> bool {
        *self.ring == *other.ring && self.terms == other.terms
    }
}

impl Eq for TruncatedSeries {}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return out.write_str("0");
        }
        let n = self.ring.nvars();
        let mut first = true;
        for (&m, &c) in &self.terms {
            if !first {
                out.write_str(" + ")?;
            }
            first = false;
            let factors: Vec<String> = (0..n)
                .filter(|&j| m.exponent(j) > 0)
                .map(|j| match m.exponent(j) {
                    1 => self.ring.var_name(j),
                    e => format!("{}^{e}", self.ring.var_name(j)),
                })
                .collect();
            match (c, factors.is_empty()) {
                (_, true) => write!(out, "{c}")?,
                (1, false) => write!(out, "{}", factors.join("*"))?,
                _ => write!(out, "{c}*{}", factors.join("*"))?,
            }
        }
        Ok(())
    }
}

impl TruncatedSeries {
    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (Mono, u64)> + '_ {
        self.terms.iter().map(|(&m, &c)| (m, c))
    }

    pub fn coeff(&self, m: Mono) -> u64 {
        self.terms.get(&m).copied().unwrap_or(0)
    }

    pub fn constant_term(&self) -> u64 {
        self.coeff(Mono::ONE)
    }

    /// The series is exact modulo `m^precision`.
    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn with_precision(mut self, precision: usize) -> Self {
        self.precision = precision.min(self.ring.order);
        self
    }

    fn add_term(&mut self, m: Mono, c: u64) {
        if c == 0 {
            return;
        }
        let p = self.ring.p;
        let entry = self.terms.entry(m).or_insert(0);
        *entry = add_mod(*entry, c, p);
        if *entry == 0 {
            self.terms.remove(&m);
        }
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if *self.ring != *other.ring {
            return Err(Error::ContextMismatch(format!(
                "{:?} vs {:?}",
                self.ring, other.ring
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        Ok(self.add_impl(other))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        Ok(self.mul_impl(other))
    }

    fn add_impl(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&m, &c) in &other.terms {
            out.add_term(m, c);
        }
        out.precision = self.precision.min(other.precision);
        out
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let ring = &self.ring;
        let (p, order) = (ring.p, ring.order);
        let mut acc: HashMap<Mono, u64> = HashMap::new();
        for (&ma, &ca) in &self.terms {
            let room = order - ma.degree();
            for (&mb, &cb) in &other.terms {
                if mb.degree() >= room {
                    break;
                }
                *acc.entry(ma.mul(mb)).or_insert(0) += ca * cb;
            }
        }
        let terms = acc
            .into_iter()
            .filter_map(|(m, c)| {
                let c = c % p;
                (c != 0).then_some((m, c))
            })
            .collect();
        let da = self.order().or_cap(order);
        let db = other.order().or_cap(order);
        let precision = (self.precision + db).min(other.precision + da).min(order);
        TruncatedSeries {
            ring: Arc::clone(ring),
            terms,
            precision,
        }
    }

    pub fn scale(&self, c: i64) -> Self {
        let p = self.ring.p;
        let c = reduce_signed(c, p);
        let mut out = self.ring.zero().with_precision(self.precision);
        if c != 0 {
            out.terms = self.terms.iter().map(|(&m, &v)| (m, mul_mod(v, c, p))).collect();
        }
        out
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.ring.one().with_precision(self.precision);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul_impl(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul_impl(&base);
            }
        }
        acc
    }

    /// Largest `k` with the series in `m^k`.
    pub fn order(&self) -> Degree {
        self.terms
            .keys()
            .next()
            .map_or(Degree::AtLeastPrecision, |m| Degree::Finite(m.degree()))
    }

    /// Sum of the lowest-degree terms.
    pub fn symbol(&self) -> Self {
        let mut out = self.ring.zero();
        if let Some(d) = self.order().finite() {
            out.terms = self
                .terms
                .iter()
                .take_while(|(m, _)| m.degree() == d)
                .map(|(&m, &c)| (m, c))
                .collect();
        }
        out
    }

    /// Order together with the symbol.
    pub fn deg_gr(&self) -> (Degree, Self) {
        (self.order(), self.symbol())
    }

    /// Largest total degree of a stored term.
    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().next_back().map(|m| m.degree())
    }

    /// `Some(d)` if every term has degree `d`; the zero series is
    /// homogeneous of every degree and reports `None`.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let lo = self.order().finite()?;
        (self.max_degree() == Some(lo)).then_some(lo)
    }

    /// Drop every term of degree `≥ d`.
    pub fn truncate(&self, d: usize) -> Self {
        let mut out = self.clone();
        out.terms.retain(|m, _| m.degree() < d);
        out.precision = out.precision.min(d);
        out
    }

    /// Inverse of a unit, via the geometric series.
    pub fn inverse(&self) -> Result<Self> {
        let p = self.ring.p;
        let c0 = self.constant_term();
        if c0 == 0 {
            return Err(Error::NotInvertible);
        }
        let c0_inv = inv_mod(c0, p).unwrap();
        // self = c0 (1 - u) with u ∈ m
        let normalized = self.scale(c0_inv as i64);
        let u = &self.ring.one() - &normalized;
        let mut acc = self.ring.one();
        let mut power = self.ring.one();
        for _ in 1..self.ring.order {
            power = power.mul_impl(&u);
            if power.is_zero() {
                break;
            }
            acc = &acc + &power;
        }
        Ok(acc.scale(c0_inv as i64).with_precision(self.precision))
    }

    /// Formal partial derivative in the variable with flat index `j`.
    pub fn partial(&self, j: usize) -> Self {
        assert!(j < self.ring.nvars());
        let p = self.ring.p;
        let mut out = self.ring.zero();
        for (&m, &c) in &self.terms {
            let e = m.exponent(j);
            if e == 0 {
                continue;
            }
            let coeff = mul_mod(c, e as u64 % p, p);
            if coeff != 0 {
                let reduced = Mono::var(j).divide_into(m).unwrap();
                out.terms.insert(reduced, coeff);
            }
        }
        out.precision = self.precision.saturating_sub(1);
        out
    }

    /// Evaluate at `X_j ↦ images[j]`. Every image must lie in `m`.
    pub fn substitute(&self, images: &[TruncatedSeries]) -> Result<Self> {
        let ring = &self.ring;
        let n = ring.nvars();
        if images.len() != n {
            return Err(Error::InvalidArgument(format!(
                "substitution needs {n} images, got {}",
                images.len()
            )));
        }
        for (j, img) in images.iter().enumerate() {
            self.same_ring(img)?;
            if img.constant_term() != 0 {
                return Err(Error::InvalidArgument(format!(
                    "image of {} has nonzero constant term",
                    ring.var_name(j)
                )));
            }
        }
        let mut powers: Vec<Vec<TruncatedSeries>> = vec![vec![ring.one()]; n];
        let mut out = ring.zero();
        for (&m, &c) in &self.terms {
            let mut term = ring.constant(c as i64);
            for j in 0..n {
                let e = m.exponent(j) as usize;
                if e == 0 {
                    continue;
                }
                while powers[j].len() <= e {
                    let next = powers[j].last().unwrap().mul_impl(&images[j]);
                    powers[j].push(next);
                }
                term = term.mul_impl(&powers[j][e]);
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        let image_precision = images.iter().map(|s| s.precision).min().unwrap_or(ring.order);
        out.precision = self.precision.min(image_precision);
        Ok(out)
    }

    /// Coordinates on [`SeriesRing::table`].
    pub fn to_dense(&self) -> Vec<u64> {
        let table = self.ring.table();
        let mut v = vec![0; table.len()];
        for (&m, &c) in &self.terms {
            v[table.index_of(m).expect("monomial below N")] = c;
        }
        v
    }
}

/// `(1 + X_j)^a` in `A_N`, via `(1 + X)^{p^s} = 1 + X^{p^s}` on the base-`p`
/// digits of `a`.
pub fn one_plus_pow(ring: &Arc<SeriesRing>, j: usize, a: u64) -> TruncatedSeries {
    let p = ring.p;
    let order = ring.order as u64;
    let mut acc = ring.one();
    let mut place = 1u64;
    let mut rest = a;
    while rest > 0 && place < order {
        let digit = rest % p;
        if digit > 0 {
            // (1 + X^place)^digit with digit < p
            let mut factor = ring.zero();
            let mut binom = 1u64;
            for t in 0..=digit {
                if t > 0 {
                    binom = binom * (digit - t + 1) / t;
                }
                if t * place < order {
                    factor.add_term(Mono::var_pow(j, (t * place) as u32), binom % p);
                }
            }
            acc = acc.mul_impl(&factor);
        }
        rest /= p;
        place = place.saturating_mul(p);
    }
    acc
}

impl std::ops::Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    /// # Panics
    /// If the operands live in different rings; use `checked_add` otherwise.
    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.checked_add(rhs).expect("series from different rings")
    }
}

impl std::ops::Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.checked_add(&-rhs).expect("series from different rings")
    }
}

impl std::ops::Mul for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.checked_mul(rhs).expect("series from different rings")
    }
}

impl std::ops::Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        let p = self.ring.p;
        TruncatedSeries {
            ring: Arc::clone(&self.ring),
            terms: self.terms.iter().map(|(&m, &c)| (m, neg_mod(c, p))).collect(),
            precision: self.precision,
        }
    }
}
