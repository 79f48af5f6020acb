//! The unipotent group `U = O_F` inside `A_N`, the linear action `ρ` of
//! `O_F/p` on `V = ⊕ F_p X_{i,k}`, and the endomorphisms `γ` induced by
//! `diag(1 + p^r x, 1)`.
//!
//! The variable `X_{i,k}` corresponds to the group element `ϖ^i [λ^k]`
//! minus one, so an element `x = Σ a_{i,k} ϖ^i [λ^k]` of `O_F/p^M` embeds
//! as `∏ (1 + X_{i,k})^{a_{i,k}}`. This is well defined modulo `m^N` as long
//! as `p^M ≥ N`.

use crate::arith::{add_mod, mul_mod};
use crate::error::{Error, Result};
use crate::gf::FqElem;
use crate::ideals::{DeltaVerdict, IdealHandle, NuValue, Span};
use crate::linalg::FpMatrix;
use crate::moore::product_off_kernel;
use crate::padic::{LocalFieldSpec, LocalRing, OFElem, ResidueElem};
use crate::series::{one_plus_pow, Degree, Mono, SeriesRing, TruncatedSeries};
use serde::Serialize;
use std::sync::Arc;
use std::time::Instant;

/// A local ring `O_F/p^M` paired with the truncated ring `A_N` in the
/// variables `X_{i,k}`.
#[derive(Clone, Debug)]
pub struct ActionContext {
    local: LocalRing,
    ring: Arc<SeriesRing>,
}

impl ActionContext {
    pub fn new(spec: &LocalFieldSpec, order: usize) -> Result<Self> {
        let local = LocalRing::new(spec)?;
        Self::from_parts(local, order)
    }

    pub fn from_parts(local: LocalRing, order: usize) -> Result<Self> {
        let modulus = local.modulus() as usize;
        if modulus < order {
            return Err(Error::Precision(format!(
                "p^M = {modulus} must be at least N = {order}"
            )));
        }
        let ring = SeriesRing::new(local.p(), local.e(), local.f(), order)?;
        Ok(Self { local, ring })
    }

    pub fn local(&self) -> &LocalRing {
        &self.local
    }

    pub fn ring(&self) -> &Arc<SeriesRing> {
        &self.ring
    }

    pub fn p(&self) -> u64 {
        self.local.p()
    }

    pub fn e(&self) -> usize {
        self.local.e()
    }

    pub fn f(&self) -> usize {
        self.local.f()
    }

    pub fn n(&self) -> usize {
        self.local.n()
    }

    /// `ϖ^i [λ^k]`.
    pub fn basis_element(&self, i: usize, k: usize) -> OFElem {
        let mut rows = vec![vec![0i64; self.f()]; self.e()];
        rows[i][k] = 1;
        self.local.from_digits(&rows).expect("unit digit vector")
    }

    /// Image of the group element `x` in `A_N`.
    pub fn embed(&self, x: &OFElem) -> Result<TruncatedSeries> {
        let digits = self.local.digits_decompose(x)?;
        let mut acc = self.ring.one();
        for (j, &a) in digits.digits.iter().enumerate() {
            if a != 0 {
                acc = &acc * &one_plus_pow(&self.ring, j, a);
            }
        }
        Ok(acc)
    }

    /// Matrix of `ρ(c ϖ^level)` on `V`; column `i*f + k` is the image of
    /// `X_{i,k}`.
    pub fn rho_matrix(&self, c: &FqElem, level: usize) -> Result<FpMatrix> {
        let (e, f, p) = (self.e(), self.f(), self.p());
        if level >= e {
            return Err(Error::InvalidArgument(format!("level {level} must be below e = {e}")));
        }
        let reg = self.local.field().regular_rep_matrix(c)?;
        let mut m = FpMatrix::zero(e * f, e * f, p);
        for j in 0..e - level {
            for k in 0..f {
                for k2 in 0..f {
                    m.set((level + j) * f + k2, j * f + k, reg.get(k2, k));
                }
            }
        }
        Ok(m)
    }

    /// `ρ(x̄)` for a general element of `O_F/p`, summed over levels.
    pub fn rho_of(&self, xbar: &ResidueElem) -> Result<FpMatrix> {
        let (e, f) = (self.e(), self.f());
        if xbar.0.len() != e * f {
            return Err(Error::ContextMismatch("residue has the wrong length".into()));
        }
        let mut acc = FpMatrix::zero(e * f, e * f, self.p());
        for level in 0..e {
            let c = FqElem(xbar.0[level * f..(level + 1) * f].to_vec());
            acc = acc.add(&self.rho_matrix(&c, level)?);
        }
        Ok(acc)
    }

    /// `ρ` read off the linear part of `embed(x ϖ^i [λ^k]) - 1`.
    pub fn rho_via_embedding(&self, x: &OFElem) -> Result<FpMatrix> {
        let n = self.n();
        let mut m = FpMatrix::zero(n, n, self.p());
        for i in 0..self.e() {
            for k in 0..self.f() {
                let prod = self.local.checked_mul(x, &self.basis_element(i, k))?;
                let image = self.embed(&prod)?;
                for row in 0..n {
                    m.set(row, i * self.f() + k, image.coeff(Mono::var(row)));
                }
            }
        }
        Ok(m)
    }

    /// The linear form `Σ_row m[row][col] X_row`.
    fn column_form(&self, m: &FpMatrix, col: usize) -> TruncatedSeries {
        let mut acc = self.ring.zero();
        for row in 0..m.rows() {
            let c = m.get(row, col);
            if c != 0 {
                acc = &acc + &self.ring.monomial(Mono::var(row), c as i64);
            }
        }
        acc
    }

    /// `γ` for `diag(1 + p^r x, 1)`.
    pub fn gamma_make(&self, r: u32, x: &OFElem) -> Result<GammaEndomorphism> {
        if r == 0 {
            return Err(Error::InvalidArgument("r must be at least 1".into()));
        }
        let unit = self
            .local
            .checked_add(&self.local.one(), &self.local.scale_by_p_power(x, r))?;
        let mut images = Vec::with_capacity(self.n());
        for i in 0..self.e() {
            for k in 0..self.f() {
                let moved = self.local.checked_mul(&unit, &self.basis_element(i, k))?;
                images.push(&self.embed(&moved)? - &self.ring.one());
            }
        }
        Ok(GammaEndomorphism {
            r,
            x: x.clone(),
            images,
        })
    }

    /// `γ(r = 1, x = ϖ^i [λ^k])` for every `(i, k)`.
    pub fn default_gammas(&self) -> Result<Vec<GammaEndomorphism>> {
        let mut out = Vec::new();
        for i in 0..self.e() {
            for k in 0..self.f() {
                out.push(self.gamma_make(1, &self.basis_element(i, k))?);
            }
        }
        Ok(out)
    }

    pub fn gamma_act(&self, gamma: &GammaEndomorphism, f: &TruncatedSeries) -> Result<TruncatedSeries> {
        f.substitute(&gamma.images)
    }

    /// Residual of the first-order expansion of `γ(F)`.
    pub fn taylor_gap_check(&self, gamma: &GammaEndomorphism, f: &TruncatedSeries) -> Result<TaylorCheck> {
        let p = self.p();
        let pr = p.pow(gamma.r) as usize;
        let required = 2 * pr;
        let rho = self.rho_of(&self.local.reduce_mod_p(&gamma.x))?;
        let mut residual = &self.gamma_act(gamma, f)? - f;
        for j in 0..self.n() {
            let shift = self.column_form(&rho, j).pow(pr as u64);
            if shift.is_zero() {
                continue;
            }
            let unit = &self.ring.one() + &self.ring.var(j);
            residual = &residual - &(&(&shift * &unit) * &f.partial(j));
        }
        let degree = residual.order();
        let vacuous = required > self.ring.order();
        let ok = vacuous || degree.finite().map_or(true, |d| d >= required);
        Ok(TaylorCheck {
            residual: residual.to_string(),
            degree,
            required_degree: required,
            vacuous,
            ok,
        })
    }

    /// `Σ_k g(ρ(c ϖ^level)(X_{0,k})) (1 + X_{0,k}) ∂F/∂X_{0,k}`, with `g`
    /// a functional on `Y_level` given by its values on `X_{level,k}`.
    pub fn build_p(&self, f: &TruncatedSeries, g: &[u64], c: &FqElem, level: usize) -> Result<TruncatedSeries> {
        let (ff, p) = (self.f(), self.p());
        if g.len() != ff {
            return Err(Error::InvalidArgument(format!("g needs {ff} coordinates")));
        }
        if g.iter().all(|&v| v % p == 0) {
            return Err(Error::InvalidArgument("g must be nonzero".into()));
        }
        let rho = self.rho_matrix(c, level)?;
        let mut acc = self.ring.zero().with_precision(self.ring.order() - 1);
        for k in 0..ff {
            let coeff = (0..ff).fold(0, |s, k2| {
                add_mod(s, mul_mod(g[k2] % p, rho.get(level * ff + k2, k), p), p)
            });
            if coeff == 0 {
                continue;
            }
            let j = k;
            let unit = &self.ring.one() + &self.ring.var(j);
            acc = &acc + &(&unit * &f.partial(j)).scale(coeff as i64);
        }
        Ok(acc)
    }

    /// `U_g`: the product of the lines of `Y_level` off `ker g`, as a
    /// homogeneous form of degree `p^{f-1}` in the `X_{level,k}`.
    pub fn u_g(&self, g: &[u64], level: usize) -> Result<TruncatedSeries> {
        let ff = self.f();
        if g.len() != ff || level >= self.e() {
            return Err(Error::InvalidArgument("g or level out of range".into()));
        }
        let basis: Vec<Vec<u64>> = (0..ff)
            .map(|k| (0..ff).map(|t| u64::from(t == k)).collect())
            .collect();
        let poly = product_off_kernel(&basis, g, self.p())?;
        let mut acc = self.ring.zero();
        for (exps, c) in poly.terms() {
            let mut mono = Mono::ONE;
            for (k, &a) in exps.iter().enumerate() {
                mono = mono.mul(Mono::var_pow(level * ff + k, a));
            }
            acc = &acc + &self.ring.monomial(mono, c as i64);
        }
        Ok(acc)
    }

    /// Table of `(r, deg, ν)` for `U_g^{p^r} P`.
    pub fn cor_delta_experiment(
        &self,
        ideal: &IdealHandle,
        f: &TruncatedSeries,
        g: &[u64],
        c: &FqElem,
        level: usize,
        max_r: u32,
    ) -> Result<CorDeltaReport> {
        let order = self.ring.order();
        let weight = self.build_p(f, g, c, level)?;
        let u_g = self.u_g(g, level)?;
        let mut report = CorDeltaReport {
            p_series: weight.to_string(),
            u_g: u_g.to_string(),
            rows: Vec::new(),
            certified: false,
            positive_gap_at: None,
            epsilon_denominator: self.epsilon_witness(ideal, level)?,
            note: None,
        };
        let p_in = ideal.nu_at(&weight, order - 1)? == NuValue::AtLeastPrecision;
        let u_in = ideal.nu(&u_g)? == NuValue::AtLeastPrecision;
        if p_in || u_in {
            report.certified = true;
            report.note = Some(format!(
                "{} lies in the ideal modulo m^{}",
                if p_in { "P" } else { "U_g" },
                if p_in { order - 1 } else { order }
            ));
            return Ok(report);
        }
        let dw = weight.order().or_cap(order);
        let du = u_g.order().or_cap(order);
        for r in 0..=max_r {
            let pr = self.p().pow(r) as usize;
            if du * pr + dw >= order - 1 {
                return Err(Error::Precision(format!(
                    "deg(U_g^(p^{r}) P) = {} reaches the working precision {}",
                    du * pr + dw,
                    order - 1
                )));
            }
            let y = &u_g.pow(pr as u64) * &weight;
            let deg = y.order();
            let nu = ideal.nu_at(&y, order - 1)?;
            let positive = match (deg.finite(), nu.finite()) {
                (Some(d), Some(v)) => v > d,
                (Some(_), None) => true,
                _ => false,
            };
            if positive && report.positive_gap_at.is_none() {
                report.positive_gap_at = Some(r);
            }
            report.rows.push(CorDeltaRow { r, deg, nu });
        }
        report.certified = report.positive_gap_at.is_some();
        Ok(report)
    }

    /// Common growth rate for the variables above `level`, as the
    /// denominator of `ε`: the smallest of the per-variable witnesses
    /// `1 / (2 k_0)`. `None` when some variable is not certified.
    fn epsilon_witness(&self, ideal: &IdealHandle, level: usize) -> Result<Option<usize>> {
        let order = self.ring.order();
        let mut worst: Option<usize> = None;
        for i in level + 1..self.e() {
            for k in 0..self.f() {
                let x = self.ring.var(i * self.f() + k);
                let rep = ideal.delta_estimate(&x, &self.ring.one(), order - 1)?;
                let den = match (rep.verdict, rep.certificate) {
                    (DeltaVerdict::InfiniteCertified, Some(cert)) => cert.epsilon_denominator,
                    (DeltaVerdict::InfiniteCertified, None) => 2,
                    _ => return Ok(None),
                };
                worst = Some(worst.map_or(den, |w: usize| w.max(den)));
            }
        }
        Ok(worst)
    }

    /// Whether every `∂F/∂X_{0,k}` of every generator lies in the ideal,
    /// checked modulo `m^{N-1}`.
    pub fn control_check(&self, ideal: &IdealHandle) -> Result<ControlReport> {
        let order = self.ring.order();
        let mut entries = Vec::new();
        for g in ideal.generators() {
            for k in 0..self.f() {
                let d = g.partial(k);
                entries.push(ControlEntry {
                    generator: g.to_string(),
                    k,
                    derivative: d.to_string(),
                    member: ideal.contains(&d, order - 1)?,
                });
            }
        }
        let controlled = entries.iter().all(|e| e.member);
        Ok(ControlReport { entries, controlled })
    }

    /// Grow `I0` by the images of its generators under every `γ` until the
    /// span in `A_N` stops growing or `max_rounds` is reached.
    pub fn gamma_closure(
        &self,
        start: &IdealHandle,
        gammas: &[GammaEndomorphism],
        max_rounds: usize,
    ) -> Result<ClosureReport> {
        let clock = Instant::now();
        let mut span = Span::new(&self.ring);
        let mut generators = Vec::new();
        for g in start.generators() {
            if span.insert_ideal_generator(g) > 0 {
                generators.push(g.clone());
            }
        }
        let mut frontier = generators.clone();
        let mut report = ClosureReport {
            rounds: 0,
            generator_counts: vec![generators.len()],
            span_dims: vec![span.dim()],
            open_at: None,
            stabilized: false,
            trace: Vec::new(),
            note: "finite-precision evidence of openness; not a proof".into(),
            wall_time_ms: None,
        };
        while !frontier.is_empty() && report.rounds < max_rounds {
            report.rounds += 1;
            let mut added = Vec::new();
            for gamma in gammas {
                for g in &frontier {
                    let image = self.gamma_act(gamma, g)?;
                    if span.insert_ideal_generator(&image) > 0 {
                        added.push(image);
                    }
                }
            }
            report.trace.push(added.iter().map(ToString::to_string).collect());
            generators.extend(added.iter().cloned());
            report.generator_counts.push(generators.len());
            report.span_dims.push(span.dim());
            frontier = added;
        }
        report.stabilized = frontier.is_empty();
        report.open_at = span.open_at();
        report.wall_time_ms = Some(clock.elapsed().as_millis() as u64);
        Ok(report)
    }
}

/// Ring endomorphism of `A_N` induced by `diag(1 + p^r x, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaEndomorphism {
    pub r: u32,
    pub x: OFElem,
    /// `γ(X_{i,k})`, flattened as `i * f + k`.
    pub images: Vec<TruncatedSeries>,
}

impl GammaEndomorphism {
    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(j, img)| *img == img.ring().var(j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TaylorCheck {
    pub residual: String,
    pub degree: Degree,
    pub required_degree: usize,
    /// `2 p^r > N`: the congruence says nothing at this precision.
    pub vacuous: bool,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorDeltaRow {
    pub r: u32,
    pub deg: Degree,
    pub nu: NuValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorDeltaReport {
    pub p_series: String,
    pub u_g: String,
    pub rows: Vec<CorDeltaRow>,
    pub certified: bool,
    pub positive_gap_at: Option<u32>,
    /// Denominator `D` of the common rate `ε = 1/D` for the variables of
    /// higher level, when all of them are certified.
    pub epsilon_denominator: Option<usize>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ControlEntry {
    pub generator: String,
    pub k: usize,
    pub derivative: String,
    pub member: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ControlReport {
    pub entries: Vec<ControlEntry>,
    pub controlled: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub rounds: usize,
    /// Number of generators after each round, starting with the input.
    pub generator_counts: Vec<usize>,
    pub span_dims: Vec<usize>,
    pub open_at: Option<usize>,
    pub stabilized: bool,
    /// Generators added in each round.
    pub trace: Vec<Vec<String>>,
    pub note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;

    fn ctx(p: u64, e: usize, f: usize, phi: Vec<i64>, m: u32, order: usize) -> ActionContext {
        let spec = LocalFieldSpec::pure(FieldSpec::new(p, f, phi), e, m);
        ActionContext::new(&spec, order).unwrap()
    }

    fn ramified(order: usize) -> ActionContext {
        ctx(2, 2, 1, vec![0, 1], 2, order)
    }

    #[test]
    fn coupling_is_enforced() {
        let spec = LocalFieldSpec::pure(FieldSpec::prime(2), 1, 2);
        assert!(matches!(ActionContext::new(&spec, 5), Err(Error::Precision(_))));
        assert!(ActionContext::new(&spec, 4).is_ok());
    }

    #[test]
    fn embed_examples() {
        let c = ctx(2, 1, 1, vec![0, 1], 2, 4);
        let r = c.ring();
        let three = c.local().from_int(3);
        assert_eq!(c.embed(&three).unwrap(), r.parse("1 + X0_0 + X0_0^2 + X0_0^3").unwrap());
        assert_eq!(c.embed(&c.local().zero()).unwrap(), r.one());
        let c = ramified(4);
        let x = c.local().from_digits(&[vec![1], vec![2]]).unwrap();
        let expected = c.ring().parse("(1 + X0_0)*(1 + X1_0^2)").unwrap();
        assert_eq!(c.embed(&x).unwrap(), expected);
        // 1 + 2π has digits (1, 2)
        let pi = c.local().uniformizer();
        let y = c.local().checked_add(&c.local().one(), &c.local().scale_by_p_power(&pi, 1)).unwrap();
        assert_eq!(c.embed(&y).unwrap(), expected);
    }

    #[test]
    fn rho_examples() {
        let c = ramified(4);
        let one = c.local().field().one();
        assert_eq!(c.rho_matrix(&one, 0).unwrap(), FpMatrix::identity(2, 2));
        let rho_pi = c.rho_matrix(&one, 1).unwrap();
        assert_eq!(rho_pi.to_rows(), vec![vec![0, 0], vec![1, 0]]);
        assert!(c.rho_matrix(&one, 2).is_err());
        let c4 = ctx(2, 1, 2, vec![1, 1, 1], 2, 4);
        let lambda = c4.local().field().basis(1);
        assert_eq!(c4.rho_matrix(&lambda, 0).unwrap().to_rows(), vec![vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn gamma_examples() {
        let c = ctx(2, 1, 1, vec![0, 1], 2, 4);
        let g = c.gamma_make(1, &c.local().one()).unwrap();
        assert_eq!(g.images[0], c.ring().parse("X0_0 + X0_0^2 + X0_0^3").unwrap());
        let x2 = c.ring().parse("X0_0^2").unwrap();
        assert_eq!(c.gamma_act(&g, &x2).unwrap(), x2);
        assert_eq!(c.gamma_act(&g, &c.ring().constant(1)).unwrap(), c.ring().one());
        assert!(c.gamma_make(1, &c.local().zero()).unwrap().is_identity());
        assert!(c.gamma_make(0, &c.local().one()).is_err());

        let c = ramified(4);
        let g = c.gamma_make(1, &c.local().uniformizer()).unwrap();
        assert_eq!(
            g.images[0],
            c.ring().parse("X0_0 + X1_0^2 + X0_0*X1_0^2").unwrap()
        );
    }

    #[test]
    fn taylor_examples() {
        let c = ctx(2, 1, 1, vec![0, 1], 3, 8);
        let g = c.gamma_make(1, &c.local().one()).unwrap();
        let t = c.taylor_gap_check(&g, &c.ring().var(0)).unwrap();
        assert!(t.ok);
        assert_eq!(t.residual, "0");
        let t = c.taylor_gap_check(&g, &c.ring().parse("X0_0^2").unwrap()).unwrap();
        assert_eq!(t.residual, "X0_0^4 + X0_0^6");
        assert_eq!(t.degree, Degree::Finite(4));
        assert!(t.ok);
        let t = c.taylor_gap_check(&g, &c.ring().one()).unwrap();
        assert_eq!(t.residual, "0");
    }

    #[test]
    fn build_p_examples() {
        let c = ctx(2, 1, 1, vec![0, 1], 3, 8);
        let one = c.local().field().one();
        let f = c.ring().parse("X0_0^3").unwrap();
        assert_eq!(c.build_p(&f, &[1], &one, 0).unwrap(), c.ring().parse("X0_0^2 + X0_0^3").unwrap());
        assert!(c.build_p(&c.ring().one(), &[1], &one, 0).unwrap().is_zero());
        assert!(c.build_p(&f, &[0], &one, 0).is_err());
        let zero = c.local().field().zero();
        assert!(c.build_p(&f, &[1], &zero, 0).unwrap().is_zero());
    }

    #[test]
    fn control_examples() {
        let c = ramified(4);
        let r = c.ring();
        let i = IdealHandle::parse(r, &["X1_0"]).unwrap();
        assert!(c.control_check(&i).unwrap().controlled);
        let i = IdealHandle::parse(r, &["X0_0"]).unwrap();
        assert!(!c.control_check(&i).unwrap().controlled);
        let i = IdealHandle::parse(r, &["X0_0^2"]).unwrap();
        assert!(c.control_check(&i).unwrap().controlled);
    }

    #[test]
    fn closure_examples() {
        let c = ramified(4);
        let r = c.ring();
        let gammas = vec![
            c.gamma_make(1, &c.local().one()).unwrap(),
            c.gamma_make(1, &c.local().uniformizer()).unwrap(),
        ];
        let i = IdealHandle::parse(r, &["X0_0"]).unwrap();
        let rep = c.gamma_closure(&i, &gammas, 10).unwrap();
        assert_eq!(rep.open_at, Some(2));
        assert!(rep.stabilized && rep.rounds <= 3);
        let x10sq = r.parse("X1_0^2").unwrap();
        let closed = IdealHandle::new(r, vec![r.var(0), x10sq.clone()]).unwrap();
        assert_eq!(closed.span().dim(), {
            let mut s = Span::new(r);
            s.insert_ideal_generator(&r.var(0));
            for t in rep.trace.iter().flatten() {
                s.insert_ideal_generator(&r.parse(t).unwrap());
            }
            s.dim()
        });

        let zero = IdealHandle::new(r, vec![]).unwrap();
        let rep = c.gamma_closure(&zero, &gammas, 10).unwrap();
        assert_eq!((rep.open_at, rep.span_dims[0]), (None, 0));

        let line = ctx(2, 1, 1, vec![0, 1], 3, 8);
        for k in 1..8 {
            let i = IdealHandle::new(line.ring(), vec![line.ring().var(0).pow(k)]).unwrap();
            let rep = line.gamma_closure(&i, &line.default_gammas().unwrap(), 10).unwrap();
            assert_eq!(rep.open_at, Some(k as usize));
            assert_eq!(rep.span_dims.first(), rep.span_dims.last());
        }
    }

    #[test]
    fn cor_delta_runs() {
        let c = ctx(2, 1, 1, vec![0, 1], 4, 10);
        let r = c.ring();
        let one = c.local().field().one();
        let f = r.parse("X0_0^3").unwrap();
        let i = IdealHandle::new(r, vec![f.clone()]).unwrap();
        let rep = c.cor_delta_experiment(&i, &f, &[1], &one, 0, 2).unwrap();
        assert_eq!(rep.u_g, "X0_0");
        assert_eq!(rep.rows.len(), 3);
        // P = X^2 + X^3, so U_g^{2^r} P already lies in (X^3)
        assert_eq!(rep.p_series, "X0_0^2 + X0_0^3");
        assert_eq!(rep.rows[0], CorDeltaRow { r: 0, deg: Degree::Finite(3), nu: NuValue::AtLeastPrecision });
        assert!(rep.certified);
        assert_eq!(rep.positive_gap_at, Some(0));
    }
}
