//! Ideals of `A_N` by degreewise linear algebra.
//!
//! An ideal is represented by the `F_p`-span of `g·μ` for generators `g` and
//! monomials `μ`, kept in reduced row-echelon form on the graded monomial
//! basis. Pivots are the lowest monomials of each row, so the image of the
//! ideal in `A/m^d` is read off the first `D_d` coordinates.

use crate::arith::{inv_mod, mul_mod, sub_mod};
use crate::error::{Error, Result};
use crate::series::{Degree, SeriesRing, TruncatedSeries};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

/// Value of `ν`: the largest `k < N` with `x ∈ I + m^k`, or the marker that
/// `x` lies in `I` modulo `m^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NuValue {
    Finite(usize),
    AtLeastPrecision,
}

impl NuValue {
    pub fn finite(self) -> Option<usize> {
        match self {
            NuValue::Finite(k) => Some(k),
            NuValue::AtLeastPrecision => None,
        }
    }
}

/// Incrementally maintained reduced row-echelon basis of a subspace of
/// `A_N`, in dense coordinates on the monomial table.
#[derive(Clone, Debug)]
pub struct Span {
    ring: Arc<SeriesRing>,
    rows: BTreeMap<usize, Vec<u64>>,
}

impl Span {
    pub fn new(ring: &Arc<SeriesRing>) -> Self {
        Self {
            ring: Arc::clone(ring),
            rows: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// The basis as series, in pivot order.
    pub fn basis(&self) -> Vec<TruncatedSeries> {
        self.rows.values().map(|r| self.ring.from_dense(r)).collect()
    }

    /// Reduce `v` against the basis in place.
    pub fn reduce_dense(&self, v: &mut [u64]) {
        let p = self.ring.p();
        for (&piv, row) in &self.rows {
            let c = v[piv];
            if c != 0 {
                for (x, &y) in v.iter_mut().zip(row).skip(piv) {
                    if y != 0 {
                        *x = sub_mod(*x, mul_mod(c, y, p), p);
                    }
                }
            }
        }
    }

    /// Remainder of `x` after reduction.
    pub fn reduce(&self, x: &TruncatedSeries) -> TruncatedSeries {
        let mut v = x.to_dense();
        self.reduce_dense(&mut v);
        self.ring.from_dense(&v)
    }

    /// Add a vector; returns whether the span grew.
    pub fn insert_dense(&mut self, mut v: Vec<u64>) -> bool {
        self.reduce_dense(&mut v);
        let Some(piv) = v.iter().position(|&c| c != 0) else {
            return false;
        };
        let p = self.ring.p();
        let inv = inv_mod(v[piv], p).expect("prime modulus");
        for c in v.iter_mut() {
            *c = mul_mod(*c, inv, p);
        }
        for row in self.rows.values_mut() {
            let c = row[piv];
            if c != 0 {
                for (x, &y) in row.iter_mut().zip(&v).skip(piv) {
                    if y != 0 {
                        *x = sub_mod(*x, mul_mod(c, y, p), p);
                    }
                }
            }
        }
        self.rows.insert(piv, v);
        true
    }

    pub fn insert(&mut self, x: &TruncatedSeries) -> bool {
        self.insert_dense(x.to_dense())
    }

    /// Add `g·μ` for every monomial `μ`; returns how many rows were added.
    pub fn insert_ideal_generator(&mut self, g: &TruncatedSeries) -> usize {
        let Some(d) = g.order().finite() else {
            return 0;
        };
        let ring = Arc::clone(&self.ring);
        let order = ring.order();
        let table = ring.table();
        let mut added = 0;
        for &mono in &table.monomials()[..table.offset(order - d)] {
            let prod = &ring.monomial(mono, 1) * g;
            if self.insert(&prod) {
                added += 1;
            }
        }
        added
    }

    /// Whether `x mod m^d` lies in the image of the span in `A/m^d`.
    pub fn contains_mod(&self, x: &TruncatedSeries, d: usize) -> bool {
        let mut v = x.to_dense();
        self.reduce_dense(&mut v);
        let cut = self.ring.table().offset(d);
        v[..cut].iter().all(|&c| c == 0)
    }

    /// Order of the remainder, measured only below degree `d`.
    fn remainder_order(&self, x: &TruncatedSeries, d: usize) -> Option<usize> {
        let mut v = x.to_dense();
        self.reduce_dense(&mut v);
        let table = self.ring.table();
        let cut = table.offset(d);
        v[..cut]
            .iter()
            .position(|&c| c != 0)
            .map(|idx| table.monomials()[idx].degree())
    }

    /// Smallest `k < N` such that every monomial of degree `≥ k` lies in
    /// the span.
    pub fn open_at(&self) -> Option<usize> {
        let ring = &self.ring;
        let table = ring.table();
        let p = ring.p();
        let mut best = None;
        for k in (0..ring.order()).rev() {
            let all = (table.offset(k)..table.offset(k + 1)).all(|idx| {
                let mut v = vec![0; table.len()];
                v[idx] = 1 % p;
                self.reduce_dense(&mut v);
                v.iter().all(|&c| c == 0)
            });
            if !all {
                break;
            }
            best = Some(k);
        }
        best
    }
}

/// A finitely generated ideal of `A_N` with a lazily computed span.
#[derive(Debug)]
pub struct IdealHandle {
    ring: Arc<SeriesRing>,
    generators: Vec<TruncatedSeries>,
    span: OnceLock<Span>,
}

impl Clone for IdealHandle {
    fn clone(&self) -> Self {
        let span = OnceLock::new();
        if let Some(s) = self.span.get() {
            let _ = span.set(s.clone());
        }
        Self {
            ring: Arc::clone(&self.ring),
            generators: self.generators.clone(),
            span,
        }
    }
}

impl IdealHandle {
    /// The ideal generated by `gens` (possibly none).
    pub fn new(ring: &Arc<SeriesRing>, gens: Vec<TruncatedSeries>) -> Result<Self> {
        for g in &gens {
            if **g.ring() != **ring {
                return Err(Error::ContextMismatch("generator from another ring".into()));
            }
        }
        Ok(Self {
            ring: Arc::clone(ring),
            generators: gens,
            span: OnceLock::new(),
        })
    }

    /// Parse generators from literals.
    pub fn parse(ring: &Arc<SeriesRing>, gens: &[&str]) -> Result<Self> {
        let gens = gens.iter().map(|s| ring.parse(s)).collect::<Result<_>>()?;
        Self::new(ring, gens)
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn generators(&self) -> &[TruncatedSeries] {
        &self.generators
    }

    /// Row-reduced basis of the image of the ideal in `A_N`.
    pub fn span(&self) -> &Span {
        self.span.get_or_init(|| {
            let mut span = Span::new(&self.ring);
            for g in &self.generators {
                span.insert_ideal_generator(g);
            }
            span
        })
    }

    fn check(&self, x: &TruncatedSeries) -> Result<()> {
        if **x.ring() != *self.ring {
            return Err(Error::ContextMismatch("element from another ring".into()));
        }
        Ok(())
    }

    /// Whether `x` lies in `I + m^d`.
    pub fn contains(&self, x: &TruncatedSeries, d: usize) -> Result<bool> {
        self.check(x)?;
        if d > self.ring.order() {
            return Err(Error::Precision(format!(
                "membership degree {d} exceeds truncation order {}",
                self.ring.order()
            )));
        }
        Ok(self.span().contains_mod(x, d))
    }

    /// `ν(x)`, using the coefficients of `x` below its known precision.
    pub fn nu(&self, x: &TruncatedSeries) -> Result<NuValue> {
        self.nu_at(x, x.precision())
    }

    /// `ν(x)` computed from `x mod m^d`.
    pub fn nu_at(&self, x: &TruncatedSeries, d: usize) -> Result<NuValue> {
        self.check(x)?;
        if d > self.ring.order() {
            return Err(Error::Precision(format!(
                "ν requested modulo m^{d} beyond truncation order {}",
                self.ring.order()
            )));
        }
        Ok(match self.span().remainder_order(x, d) {
            Some(k) => NuValue::Finite(k),
            None => NuValue::AtLeastPrecision,
        })
    }

    /// Whether the homogeneous `h` of degree `d` is the symbol of an
    /// element of `I`.
    pub fn gr_member(&self, h: &TruncatedSeries) -> Result<bool> {
        self.check(h)?;
        if h.is_zero() {
            return Ok(true);
        }
        let d = h.homogeneous_degree().ok_or_else(|| {
            Error::InvalidArgument(format!("{h} is not homogeneous"))
        })?;
        self.contains(h, d + 1)
    }

    /// Smallest `k ≤ bound` with `h^k` in the associated graded ideal.
    pub fn radical_member_bounded(&self, h: &TruncatedSeries, bound: usize) -> Result<Option<usize>> {
        self.check(h)?;
        if h.is_zero() {
            return Ok(Some(1));
        }
        let d = h.homogeneous_degree().ok_or_else(|| {
            Error::InvalidArgument(format!("{h} is not homogeneous"))
        })?;
        if d * bound >= self.ring.order() {
            return Err(Error::Precision(format!(
                "degree {} of the {bound}-th power is not below N = {}",
                d * bound,
                self.ring.order()
            )));
        }
        let mut power = self.ring.one();
        for k in 1..=bound {
            power = &power * h;
            if self.gr_member(&power)? {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }

    /// Smallest `k` with `m^k ⊆ I` modulo `m^N`.
    pub fn is_open(&self) -> Option<usize> {
        self.span().open_at()
    }

    pub fn delta_estimate(
        &self,
        x: &TruncatedSeries,
        weight: &TruncatedSeries,
        bound: usize,
    ) -> Result<DeltaReport> {
        delta_estimate(self, x, weight, bound)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeltaVerdict {
    /// A strict gap `ν(x^k) > deg(x^k)` was found, or `x` or the weight lies
    /// in the ideal.
    InfiniteCertified,
    /// Every computed gap is zero. Not a certificate.
    ZeroSoFar,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub k: usize,
    pub deg: Degree,
    pub nu: NuValue,
}

/// Witness `k_0` with `ν(x^{k_0}) > deg(x^{k_0})`, and the growth rate
/// `ε = 1 / (2 k_0 deg x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub k0: usize,
    pub epsilon_denominator: usize,
    /// Largest `k` up to which `ν(x^j) ≥ (1 + ε) deg(x^j)` was checked for
    /// every `k_0 ≤ j ≤ k`.
    pub verified_through: usize,
    /// Whether `ν(x^{m k_0}) ≥ m + deg(x^{m k_0})` held for every multiple
    /// whose `ν` is below the precision.
    pub amplification_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub x: String,
    pub weight: String,
    pub bound: usize,
    /// `(k, deg(x^k P), ν(x^k P))`.
    pub table: Vec<DeltaRow>,
    /// `(k, deg(x^k), ν(x^k))`; equal to `table` when the weight is 1.
    pub unweighted: Vec<DeltaRow>,
    pub verdict: DeltaVerdict,
    pub certificate: Option<GrowthCertificate>,
    pub note: Option<String>,
}

fn gap(row: &DeltaRow, order: usize) -> Option<usize> {
    let deg = row.deg.finite()?;
    Some(row.nu.finite().unwrap_or(order) - deg)
}

fn delta_estimate(
    ideal: &IdealHandle,
    x: &TruncatedSeries,
    weight: &TruncatedSeries,
    bound: usize,
) -> Result<DeltaReport> {
    ideal.check(x)?;
    ideal.check(weight)?;
    let order = ideal.ring.order();
    let dx = x.order().or_cap(order);
    let dw = weight.order().or_cap(order);
    if !x.is_zero() && !weight.is_zero() && dx * bound + dw >= order {
        return Err(Error::Precision(format!(
            "deg(x)·K + deg(P) = {} is not below N = {order}",
            dx * bound + dw
        )));
    }
    let mut report = DeltaReport {
        x: x.to_string(),
        weight: weight.to_string(),
        bound,
        table: Vec::new(),
        unweighted: Vec::new(),
        verdict: DeltaVerdict::Inconclusive,
        certificate: None,
        note: None,
    };
    let x_in = ideal.nu(x)? == NuValue::AtLeastPrecision;
    let w_in = ideal.nu(weight)? == NuValue::AtLeastPrecision;
    if x_in || w_in {
        report.verdict = DeltaVerdict::InfiniteCertified;
        report.note = Some(format!(
            "{} lies in the ideal modulo m^{order}",
            if x_in { "x" } else { "P" }
        ));
        return Ok(report);
    }

    let mut power = ideal.ring.one();
    for k in 0..=bound {
        let weighted = &power * weight;
        report.table.push(DeltaRow {
            k,
            deg: weighted.order(),
            nu: ideal.nu(&weighted)?,
        });
        report.unweighted.push(DeltaRow {
            k,
            deg: power.order(),
            nu: ideal.nu(&power)?,
        });
        power = &power * x;
    }

    let k0 = report
        .unweighted
        .iter()
        .skip(1)
        .find(|row| gap(row, order).is_some_and(|g| g >= 1))
        .map(|row| row.k);
    report.verdict = if k0.is_some() {
        DeltaVerdict::InfiniteCertified
    } else if report.table.iter().all(|row| gap(row, order) == Some(0)) {
        DeltaVerdict::ZeroSoFar
    } else {
        DeltaVerdict::Inconclusive
    };
    if let Some(k0) = k0 {
        let den = 2 * k0 * dx;
        let mut verified_through = k0;
        for row in &report.unweighted[k0..] {
            let deg = row.deg.or_cap(order);
            let nu = row.nu.finite().unwrap_or(order);
            if nu * den < (den + 1) * deg {
                break;
            }
            verified_through = row.k;
        }
        let amplification_holds = report
            .unweighted
            .iter()
            .filter(|row| row.k >= k0 && row.k % k0 == 0)
            .all(|row| match (row.deg.finite(), row.nu) {
                (Some(deg), NuValue::Finite(nu)) => nu >= row.k / k0 + deg,
                _ => true,
            });
        report.certificate = Some(GrowthCertificate {
            k0,
            epsilon_denominator: den,
            verified_through,
            amplification_holds,
        });
    } else if report.verdict == DeltaVerdict::ZeroSoFar {
        report.note = Some(format!("all gaps vanish for k ≤ {bound}; this does not certify δ = 0"));
    }
    Ok(report)
}
