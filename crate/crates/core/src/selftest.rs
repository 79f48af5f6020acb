//! A deterministic end-to-end sweep of the library's invariants, reported
//! as canonical JSON.

use crate::dynamics::ActionContext;
use crate::error::Result;
use crate::gf::{FieldSpec, GaloisField};
use crate::ideals::IdealHandle;
use crate::linalg::FpMatrix;
use crate::moore::{
    comatrix_cramer_check, lemma_estimation_check, moore_det, projective_points, projective_product,
    DEFAULT_DEGREE_CAP,
};
use crate::padic::{LocalFieldSpec, LocalRing, OFElem};
use crate::series::{SeriesRing, TruncatedSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use std::sync::Arc;

pub const SEED: u64 = 0x5eed_f1a5;

/// A series with random coefficients on monomials of degree in
/// `min_deg..=max_deg` (capped below `N`).
pub fn random_series<R: Rng>(
    rng: &mut R,
    ring: &Arc<SeriesRing>,
    min_deg: usize,
    max_deg: usize,
    density: f64,
) -> TruncatedSeries {
    let table = ring.table();
    let hi = (max_deg + 1).min(ring.order());
    let mut acc = ring.zero();
    for &m in &table.monomials()[table.offset(min_deg)..table.offset(hi)] {
        if rng.gen_bool(density) {
            acc = &acc + &ring.monomial(m, rng.gen_range(1..ring.p()) as i64);
        }
    }
    acc
}

pub fn random_element<R: Rng>(rng: &mut R, local: &LocalRing) -> OFElem {
    OFElem {
        coords: (0..local.n()).map(|_| rng.gen_range(0..local.modulus())).collect(),
    }
}

/// Every vector of `F_p^dim`.
pub fn all_vectors(dim: usize, p: u64) -> Vec<Vec<u64>> {
    (0..p.pow(dim as u32))
        .map(|mut idx| {
            (0..dim)
                .map(|_| {
                    let d = idx % p;
                    idx /= p;
                    d
                })
                .collect()
        })
        .collect()
}

/// The `(p, e, f)` shapes with a pure Eisenstein step `π^e - p` and a
/// Conway-style `phi`, at precision `M`.
pub fn shape_spec(p: u64, e: usize, f: usize, m: u32) -> LocalFieldSpec {
    let phi = match (p, f) {
        (_, 1) => vec![0, 1],
        (2, 2) => vec![1, 1, 1],
        (3, 2) => vec![2, 2, 1],
        (2, 3) => vec![1, 1, 0, 1],
        _ => panic!("no default modulus for p = {p}, f = {f}"),
    };
    LocalFieldSpec::pure(FieldSpec::new(p, f, phi), e, m)
}

#[derive(Default)]
struct Section {
    checks: u64,
    failures: Vec<String>,
    fixtures: Map<String, Value>,
}

impl Section {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn fixture(&mut self, key: &str, value: impl Into<Value>) {
        self.fixtures.insert(key.to_string(), value.into());
    }

    fn into_value(self) -> Value {
        json!({
            "checks": self.checks,
            "failures": self.failures,
            "fixtures": Value::Object(self.fixtures),
        })
    }
}

fn gf_section() -> Result<Section> {
    let mut s = Section::default();
    for (p, f, phi) in [(2, 2, vec![1, 1, 1]), (2, 3, vec![1, 1, 0, 1]), (3, 2, vec![1, 0, 1])] {
        let field = GaloisField::new(&FieldSpec::new(p, f, phi))?;
        let q = field.order();
        let elems = field.elements();
        for a in &elems {
            s.check(field.pow(a, q)? == *a, || format!("Frobenius fixes {a:?} in F_{q}"));
            if !a.is_zero() {
                let inv = field.inv(a)?;
                s.check(field.mul(a, &inv)? == field.one(), || format!("inverse of {a:?}"));
            }
            for b in &elems {
                let lhs = field.regular_rep_matrix(&field.mul(a, b)?)?;
                let rhs = field.regular_rep_matrix(a)?.mul(&field.regular_rep_matrix(b)?);
                s.check(lhs == rhs, || format!("regular representation at {a:?}, {b:?}"));
            }
        }
        s.fixture(&format!("order_{p}_{f}"), q);
    }
    Ok(s)
}

fn padic_section() -> Result<Section> {
    let mut s = Section::default();
    for (p, e, f) in [(2, 2, 1), (2, 1, 2), (3, 2, 1), (2, 2, 2)] {
        let local = LocalRing::new(&shape_spec(p, e, f, 2))?;
        let q = local.field().order();
        for k in 0..f {
            let t = local.teichmuller(k)?;
            s.check(local.pow(&t, q) == t, || format!("Teichmüller lift {k} in shape {p},{e},{f}"));
        }
        for x in local.elements() {
            let d = local.digits_decompose(&x)?;
            s.check(local.digits_compose(&d)? == x, || format!("digit round trip {x:?}"));
        }
        let pi = local.uniformizer();
        s.fixture(
            &format!("pi_pow_e_{p}_{e}_{f}"),
            json!(local.pow(&pi, e as u64).coords),
        );
    }
    Ok(s)
}

fn series_section(rng: &mut ChaCha8Rng) -> Result<Section> {
    let mut s = Section::default();
    let ring = SeriesRing::new(3, 2, 1, 7)?;
    for _ in 0..40 {
        let u = &ring.constant(rng.gen_range(1..3)) + &random_series(rng, &ring, 1, 6, 0.4);
        s.check(&u * &u.inverse()? == ring.one(), || format!("inverse of {u}"));
        let a = random_series(rng, &ring, 0, 4, 0.3);
        let b = random_series(rng, &ring, 0, 4, 0.3);
        let sigma = [random_series(rng, &ring, 1, 3, 0.5), random_series(rng, &ring, 1, 3, 0.5)];
        let lhs = (&a * &b).substitute(&sigma)?;
        let rhs = &a.substitute(&sigma)? * &b.substitute(&sigma)?;
        s.check(lhs == rhs, || format!("substitution is multiplicative on {a}, {b}"));
        s.check(ring.parse(&a.to_string())? == a, || format!("print/parse of {a}"));
    }
    let x = ring.parse("1 + X0_0")?;
    s.fixture("inverse_1_plus_x", x.inverse()?.to_string());
    Ok(s)
}

fn ideals_section() -> Result<Section> {
    let mut s = Section::default();
    let ring = SeriesRing::plain(2, 2, 10)?;
    let fixtures = [vec!["X1_0"], vec!["X0_0^2", "X1_0^2"], vec!["X1_0 + X0_0^2"]];
    for gens in &fixtures {
        let ideal = IdealHandle::parse(&ring, gens)?;
        let name = gens.join(",");
        let x1 = ideal.nu(&ring.var(0))?;
        let x2 = ideal.nu(&ring.parse("X1_0 + X0_0^2")?)?;
        s.fixture(&format!("nu_X1[{name}]"), serde_json::to_value(x1).unwrap());
        s.fixture(&format!("nu_X2+X1^2[{name}]"), serde_json::to_value(x2).unwrap());
        s.fixture(&format!("open_at[{name}]"), serde_json::to_value(ideal.is_open()).unwrap());
        let report = ideal.delta_estimate(&ring.var(0), &ring.one(), 9)?;
        s.fixture(&format!("delta_X1[{name}]"), serde_json::to_value(report.verdict).unwrap());
    }
    let principal = IdealHandle::parse(&ring, &["X1_0"])?;
    s.check(principal.nu(&ring.var(0))?.finite() == Some(1), || "ν(X_1) = 1".into());
    s.check(
        principal.nu(&ring.parse("X1_0 + X0_0^2")?)?.finite() == Some(2),
        || "ν(X_2 + X_1^2) = 2".into(),
    );
    Ok(s)
}

fn moore_section() -> Result<Section> {
    let mut s = Section::default();
    let p = 2;
    for m in 1..=3usize {
        let vectors: Vec<Vec<u64>> = all_vectors(m, p).into_iter().filter(|v| v.iter().any(|&c| c != 0)).collect();
        let full = projective_product(&projective_points(m, p), p)?;
        let mut tuples: Vec<Vec<Vec<u64>>> = vec![vec![]];
        for _ in 0..m {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    vectors.iter().map(move |v| {
                        let mut t = t.clone();
                        t.push(v.clone());
                        t
                    })
                })
                .collect();
        }
        for forms in tuples {
            if FpMatrix::from_rows(&forms, p).rank() < m {
                continue;
            }
            let det = moore_det(&forms, p, DEFAULT_DEGREE_CAP)?;
            let ratio = det.div_exact(&full).ok().and_then(|q| q.as_constant());
            s.check(matches!(ratio, Some(c) if c != 0), || format!("Moore factorization {forms:?}"));
            s.check(comatrix_cramer_check(&forms, p, DEFAULT_DEGREE_CAP)?.ok, || format!("Cramer {forms:?}"));
            if m >= 2 {
                for i in 1..=m {
                    for j in 1..=m {
                        let c = lemma_estimation_check(&forms, i, j, p, DEFAULT_DEGREE_CAP)?;
                        s.check(c.ok, || format!("estimation ({i},{j}) for {forms:?}"));
                    }
                }
            }
        }
        s.fixture(&format!("projective_product_2_{m}"), full.to_string());
    }
    Ok(s)
}

fn dynamics_section(rng: &mut ChaCha8Rng) -> Result<Section> {
    let mut s = Section::default();
    for (p, e, f, order) in [(2, 2, 1, 4), (2, 1, 2, 4), (2, 2, 2, 4), (3, 2, 1, 9)] {
        let ctx = ActionContext::new(&shape_spec(p, e, f, 2), order)?;
        let local = ctx.local();
        let tag = format!("{p}_{e}_{f}");
        for _ in 0..30 {
            let x = random_element(rng, local);
            let y = random_element(rng, local);
            let sum = ctx.embed(&local.checked_add(&x, &y)?)?;
            s.check(sum == &ctx.embed(&x)? * &ctx.embed(&y)?, || format!("embed additivity {x:?} {y:?}"));
            let direct = ctx.rho_of(&local.reduce_mod_p(&x))?;
            s.check(direct == ctx.rho_via_embedding(&x)?, || format!("ρ routes agree at {x:?}"));
        }
        let gammas = ctx.default_gammas()?;
        for _ in 0..10 {
            let f_series = random_series(rng, ctx.ring(), 1, order / 2 - 1, 0.4);
            for g in &gammas {
                let t = ctx.taylor_gap_check(g, &f_series)?;
                s.check(t.ok, || format!("Taylor residual for {f_series}"));
            }
        }
        let start = IdealHandle::new(ctx.ring(), vec![ctx.ring().var(0)])?;
        let mut report = ctx.gamma_closure(&start, &gammas, 16)?;
        report.wall_time_ms = None;
        s.fixture(&format!("closure_X0_0_{tag}"), serde_json::to_value(&report).unwrap());
        let one = ctx.local().field().one();
        s.fixture(
            &format!("rho_varpi_{tag}"),
            json!(if e > 1 { ctx.rho_matrix(&one, 1)?.to_rows() } else { ctx.rho_matrix(&one, 0)?.to_rows() }),
        );
        let g0 = &gammas[0];
        s.fixture(
            &format!("gamma_X0_0_{tag}"),
            g0.images[0].to_string(),
        );
    }
    Ok(s)
}

/// Run every section; the result does not depend on timing or host.
pub fn run() -> Result<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let sections = [
        ("gf", gf_section()?),
        ("padic", padic_section()?),
        ("series", series_section(&mut rng)?),
        ("ideals", ideals_section()?),
        ("moore", moore_section()?),
        ("dynamics", dynamics_section(&mut rng)?),
    ];
    let total: u64 = sections.iter().map(|(_, s)| s.checks).sum();
    let failed: usize = sections.iter().map(|(_, s)| s.failures.len()).sum();
    let mut out = Map::new();
    for (name, section) in sections {
        out.insert(name.to_string(), section.into_value());
    }
    Ok(json!({
        "seed": SEED,
        "checks": total,
        "failed": failed,
        "sections": Value::Object(out),
    }))
}

/// Pretty JSON with keys in sorted order.
pub fn canonical_json(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("JSON values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_is_green_and_deterministic() {
        let a = run().unwrap();
        assert_eq!(a["failed"], 0, "{}", canonical_json(&a));
        assert_eq!(canonical_json(&a), canonical_json(&run().unwrap()));
    }
}
