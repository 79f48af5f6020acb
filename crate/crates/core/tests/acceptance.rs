//! Acceptance suite. Each test prints one `[PASS]` or `[FAIL]` line and
//! fails when its criterion does not hold.

use iwasawa::dynamics::ActionContext;
use iwasawa::ideals::DeltaVerdict;
use iwasawa::linalg::FpMatrix;
use iwasawa::moore::{
    comatrix_cramer_check, lemma_estimation_check, moore_det, prop_uf_certificate, ExactPoly,
    DEFAULT_DEGREE_CAP,
};
use iwasawa::padic::ResidueElem;
use iwasawa::selftest::{self, all_vectors, random_element, random_series, shape_spec};
use iwasawa::{IdealHandle, NuValue, OFElem, SeriesRing, TruncatedSeries};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

struct Criterion {
    name: &'static str,
    checks: usize,
    failures: Vec<String>,
    clock: Instant,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Criterion { name, checks: 0, failures: Vec::new(), clock: Instant::now() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) {
        let secs = self.clock.elapsed().as_secs_f64();
        let ok = self.failures.is_empty() && secs < 60.0;
        println!(
            "[{}] {}: {} checks, {} failed, {:.2}s",
            if ok { "PASS" } else { "FAIL" },
            self.name,
            self.checks,
            self.failures.len(),
            secs
        );
        for f in self.failures.iter().take(12) {
            println!("    {f}");
        }
        assert!(self.failures.is_empty(), "{}: {} failures", self.name, self.failures.len());
        assert!(secs < 60.0, "{} took {secs:.1}s", self.name);
    }
}

/// Sparse polynomials over `F_p`, kept apart from the library's own type.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Poly {
    p: u64,
    terms: BTreeMap<Vec<u32>, u64>,
}

impl Poly {
    fn zero(p: u64) -> Self {
        Poly { p, terms: BTreeMap::new() }
    }

    fn monomial(p: u64, exps: Vec<u32>, c: u64) -> Self {
        let mut out = Poly::zero(p);
        out.push(exps, c);
        out
    }

    fn push(&mut self, exps: Vec<u32>, c: u64) {
        let entry = self.terms.entry(exps.clone()).or_insert(0);
        *entry = (*entry + c % self.p) % self.p;
        if *entry == 0 {
            self.terms.remove(&exps);
        }
    }

    /// `(Σ v_x W_x)^{p^k}`.
    fn linear_frob(p: u64, v: &[u64], k: u32) -> Self {
        let mut out = Poly::zero(p);
        for (x, &c) in v.iter().enumerate() {
            let mut e = vec![0; v.len()];
            e[x] = p.pow(k) as u32;
            out.push(e, c);
        }
        out
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.push(e.clone(), c);
        }
        out
    }

    fn scale(&self, c: u64) -> Poly {
        let mut out = Poly::zero(self.p);
        for (e, &d) in &self.terms {
            out.push(e.clone(), c % self.p * d);
        }
        out
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.p);
        for (a, &c) in &self.terms {
            for (b, &d) in &other.terms {
                let e = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.push(e, c * d);
            }
        }
        out
    }

    /// Frobenius on `F_p` coefficients: `x ↦ x^{p^k}`.
    fn frob(&self, k: u32) -> Poly {
        let q = self.p.pow(k) as u32;
        let mut out = Poly::zero(self.p);
        for (e, &c) in &self.terms {
            out.push(e.iter().map(|a| a * q).collect(), c);
        }
        out
    }

    fn from_exact(e: &ExactPoly) -> Poly {
        let mut out = Poly::zero(e.p());
        for (exps, c) in e.terms() {
            out.push(exps.to_vec(), c);
        }
        out
    }

    fn degrees(&self) -> BTreeSet<u32> {
        self.terms.keys().map(|e| e.iter().sum()).collect()
    }

    /// `c` with `self = c · other`, if such a nonzero constant exists.
    fn ratio(&self, other: &Poly) -> Option<u64> {
        let (e, &c) = other.terms.iter().next()?;
        let &a = self.terms.get(e)?;
        let inv = (1..self.p).find(|&i| i * c % self.p == 1)?;
        let r = a * inv % self.p;
        (r != 0 && *self == other.scale(r)).then_some(r)
    }
}

fn leibniz(m: &[Vec<Poly>], p: u64) -> Poly {
    let n = m.len();
    let mut acc = Poly::zero(p);
    if n == 0 {
        return Poly::monomial(p, vec![], 1);
    }
    let nvars = m[0][0].terms.keys().next().map_or(0, Vec::len);
    let mut perm: Vec<usize> = (0..n).collect();
    permute(&mut perm, 0, &mut |sigma| {
        let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| sigma[i] > sigma[j]).count();
        let mut term = Poly::monomial(p, vec![0; nvars], 1);
        for (r, &c) in sigma.iter().enumerate() {
            term = term.mul(&m[r][c]);
        }
        acc = acc.add(&term.scale(if inversions % 2 == 0 { 1 } else { p - 1 }));
    });
    acc
}

fn permute(v: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == v.len() {
        visit(v);
        return;
    }
    for i in start..v.len() {
        v.swap(start, i);
        permute(v, start + 1, visit);
        v.swap(start, i);
    }
}

/// Moore matrix with rows `r = 0..m`: entries `w_j^{p^{r + shift}}`.
fn oracle_moore(forms: &[Vec<u64>], p: u64, shift: u32) -> Vec<Vec<Poly>> {
    (0..forms.len() as u32)
        .map(|r| forms.iter().map(|w| Poly::linear_frob(p, w, r + shift)).collect())
        .collect()
}

/// Product of one normalized representative per line of `span(basis)`
/// on which `keep` holds.
fn oracle_line_product(basis: &[Vec<u64>], p: u64, n: usize, keep: impl Fn(&[u64]) -> bool) -> Poly {
    let mut seen = BTreeSet::new();
    let mut acc = Poly::monomial(p, vec![0; n], 1);
    for coeffs in all_vectors(basis.len(), p) {
        let v: Vec<u64> = (0..n)
            .map(|x| basis.iter().zip(&coeffs).map(|(b, c)| b[x] * c).sum::<u64>() % p)
            .collect();
        let Some(lead) = v.iter().find(|&&c| c != 0) else { continue };
        let inv = (1..p).find(|&i| i * lead % p == 1).unwrap();
        let v: Vec<u64> = v.iter().map(|c| c * inv % p).collect();
        if keep(&v) && seen.insert(v.clone()) {
            acc = acc.mul(&Poly::linear_frob(p, &v, 0));
        }
    }
    acc
}

fn rank(rows: &[Vec<u64>], p: u64) -> usize {
    if rows.is_empty() {
        0
    } else {
        FpMatrix::from_rows(rows, p).rank()
    }
}

#[test]
fn moore_identities() {
    let mut c = Criterion::new("Moore determinant, Cramer identity and minor estimates");
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [2u64, 3] {
        for m in 1..=3usize {
            let tuples: Vec<Vec<Vec<u64>>> = if p == 2 {
                let nonzero: Vec<Vec<u64>> = all_vectors(m, 2).into_iter().filter(|v| v.iter().any(|&x| x != 0)).collect();
                let mut out: Vec<Vec<Vec<u64>>> = vec![vec![]];
                for _ in 0..m {
                    out = out
                        .into_iter()
                        .flat_map(|t| nonzero.iter().map(move |v| [t.clone(), vec![v.clone()]].concat()))
                        .collect();
                }
                out.into_iter().filter(|t| rank(t, p) == m).collect()
            } else {
                let mut out = Vec::new();
                while out.len() < 200 {
                    let t: Vec<Vec<u64>> = (0..m).map(|_| (0..m).map(|_| rng.gen_range(0..3)).collect()).collect();
                    if rank(&t, p) == m {
                        out.push(t);
                    }
                }
                out
            };
            let identity: Vec<Vec<u64>> = (0..m).map(|i| (0..m).map(|x| u64::from(x == i)).collect()).collect();
            let full = oracle_line_product(&identity, p, m, |_| true);
            for forms in &tuples {
                let mm = oracle_moore(forms, p, 0);
                let det = leibniz(&mm, p);
                let lib_det = Poly::from_exact(&moore_det(forms, p, DEFAULT_DEGREE_CAP).unwrap());
                c.check(lib_det == det, || format!("p={p} {forms:?}: determinant differs from Leibniz expansion"));
                c.check(det.ratio(&full).is_some(), || format!("p={p} {forms:?}: det is not a scalar times the line product"));

                let cramer = comatrix_cramer_check(forms, p, DEFAULT_DEGREE_CAP).unwrap();
                let com: Vec<Vec<Poly>> = cramer.comatrix.iter().map(|r| r.iter().map(Poly::from_exact).collect()).collect();
                let mut identity = cramer.ok;
                for i in 0..m {
                    for j in 0..m {
                        let entry = (0..m).fold(Poly::zero(p), |acc, k| acc.add(&mm[i][k].mul(&com[k][j])));
                        identity &= if i == j { entry == det } else { entry.terms.is_empty() };
                    }
                }
                c.check(identity, || format!("p={p} {forms:?}: M·Com ≠ det·Id"));

                if m < 2 {
                    continue;
                }
                for row in 1..=m {
                    for col in 1..=m {
                        let est = lemma_estimation_check(forms, row, col, p, DEFAULT_DEGREE_CAP).unwrap();
                        let bound = (p.pow(m as u32 - 1) - p.pow(row as u32 - 1)) as u32;
                        let minor: Vec<Vec<Poly>> = (0..m)
                            .filter(|&r| r != row - 1)
                            .map(|r| (0..m).filter(|&k| k != col - 1).map(|k| mm[r][k].clone()).collect())
                            .collect();
                        let rest: Vec<Vec<u64>> = forms.iter().enumerate().filter(|&(k, _)| k != col - 1).map(|(_, w)| w.clone()).collect();
                        let q = Poly::from_exact(&est.quotient);
                        let exact = q.mul(&leibniz(&oracle_moore(&rest, p, 0), p)) == leibniz(&minor, p);
                        let degree_ok = q.degrees().iter().all(|&d| d >= bound);
                        c.check(
                            est.ok && exact && degree_ok && est.required_degree == bound as usize,
                            || format!("p={p} {forms:?} minor ({row},{col}): quotient {} fails (exact {exact}, bound {bound})", est.quotient),
                        );
                    }
                }
            }
        }
    }
    c.finish();
}

#[test]
fn uf_certificates() {
    let mut c = Criterion::new("Cramer certificates for U_g");
    let mut non_injective = 0;
    for p in [2u64, 3] {
        for m in 1..=2usize {
            let n = m + 1;
            let unit = |i: usize| (0..n).map(|x| u64::from(x == i)).collect::<Vec<u64>>();
            let standard: Vec<Vec<u64>> = (0..m).map(unit).collect();
            let tilted: Vec<Vec<u64>> = (0..m).map(|i| unit(i).iter().zip(unit(n - 1)).map(|(a, b)| a + b).collect()).collect();
            let sum: Vec<u64> = (0..n).map(|x| standard.iter().map(|v| v[x]).sum::<u64>() % p).collect();
            let collapsing = [standard.clone(), vec![sum]].concat();
            let maps = [standard, tilted, collapsing];
            for varphi in &maps {
                let injective = rank(varphi, p) == varphi.len();
                if !injective {
                    non_injective += 1;
                }
                let basis = iwasawa::linalg::span_basis(varphi, p);
                for g in all_vectors(n, p) {
                    if g.iter().find(|&&x| x != 0) != Some(&1) {
                        continue;
                    }
                    let apply = |v: &[u64]| v.iter().zip(&g).map(|(a, b)| a * b).sum::<u64>() % p;
                    for s in 0..=1u32 {
                        let cert = prop_uf_certificate(&g, varphi, s, p, DEFAULT_DEGREE_CAP);
                        if basis.iter().all(|b| apply(b) == 0) {
                            c.check(cert.is_err(), || format!("g={g:?} vanishes on the image of {varphi:?} but was accepted"));
                            continue;
                        }
                        let cert = cert.unwrap();
                        let tag = format!("p={p} g={g:?} varphi={varphi:?} s={s}");
                        let u_g = Poly::from_exact(&cert.u_g);
                        let oracle_u = oracle_line_product(&basis, p, n, |v| apply(v) != 0);
                        c.check(u_g.ratio(&oracle_u).is_some(), || format!("{tag}: U_g is not the product of lines off ker g"));
                        let bounds: Vec<usize> = (0..m).map(|j| (p.pow(s) * (p.pow(m as u32 - 1) - p.pow(j as u32))) as usize).collect();
                        c.check(cert.degree_bounds == bounds, || format!("{tag}: bounds {:?}", cert.degree_bounds));
                        let coeffs: Vec<Poly> = cert.coefficients.iter().map(Poly::from_exact).collect();
                        for (j, cj) in coeffs.iter().enumerate() {
                            c.check(cj.degrees().iter().all(|&d| d as usize >= bounds[j]), || format!("{tag}: c_{} below degree {}", j + 1, bounds[j]));
                        }
                        // the identity on every vector of the image
                        let twisted = u_g.frob(s);
                        let mut identity = cert.ok;
                        for coeffs_a in all_vectors(basis.len(), p) {
                            let a: Vec<u64> = (0..n)
                                .map(|x| basis.iter().zip(&coeffs_a).map(|(b, t)| b[x] * t).sum::<u64>() % p)
                                .collect();
                            let lhs = twisted.scale(apply(&a));
                            let rhs = coeffs.iter().enumerate().fold(Poly::zero(p), |acc, (j, cj)| {
                                acc.add(&cj.mul(&Poly::linear_frob(p, &a, s + j as u32)))
                            });
                            identity &= lhs == rhs;
                        }
                        c.check(identity, || format!("{tag}: U_g^(p^s) g(a) ≠ Σ c_j a^(p^(s+j-1))"));
                    }
                }
            }
        }
    }
    c.check(non_injective >= 4, || "every shape needs a non-injective map".into());
    c.finish();
}

/// Membership in `I + m^d` by comparing ranks of `g·μ` spans with and
/// without `x`.
fn oracle_contains(gens: &[TruncatedSeries], x: &TruncatedSeries, d: usize) -> bool {
    let ring = x.ring();
    let cut = ring.table().offset(d);
    let mut rows = Vec::new();
    for g in gens {
        for &mono in ring.table().monomials() {
            rows.push((g * &ring.monomial(mono, 1)).to_dense()[..cut].to_vec());
        }
    }
    let before = rank(&rows, ring.p());
    rows.push(x.to_dense()[..cut].to_vec());
    rank(&rows, ring.p()) == before
}

fn oracle_nu(gens: &[TruncatedSeries], x: &TruncatedSeries) -> NuValue {
    let order = x.ring().order();
    if oracle_contains(gens, x, order) {
        return NuValue::AtLeastPrecision;
    }
    NuValue::Finite((0..order).rev().find(|&d| oracle_contains(gens, x, d)).unwrap())
}

#[test]
fn nu_delta_calculus() {
    let mut c = Criterion::new("nu and delta on the fixture ideals");
    let ring = SeriesRing::plain(2, 2, 10).unwrap();
    let order = ring.order();
    let elems = ["X0_0", "X1_0", "X1_0 + X0_0^2", "X0_0 + X1_0", "X0_0*X1_0", "X0_0^3 + X1_0^2", "X0_0^2"];
    let fixtures: [&[&str]; 3] = [&["X1_0"], &["X0_0^2", "X1_0^2"], &["X1_0 + X0_0^2"]];

    let principal = IdealHandle::parse(&ring, &["X1_0"]).unwrap();
    c.check(principal.nu(&ring.var(0)).unwrap() == NuValue::Finite(1), || "ν(X_1) ≠ 1 on (X_2)".into());
    c.check(
        principal.nu(&ring.parse("X1_0 + X0_0^2").unwrap()).unwrap() == NuValue::Finite(2),
        || "ν(X_2 + X_1^2) ≠ 2 on (X_2)".into(),
    );

    for gens in fixtures {
        let ideal = IdealHandle::parse(&ring, gens).unwrap();
        let g = ideal.generators().to_vec();
        for text in elems {
            let x = ring.parse(text).unwrap();
            let tag = format!("I={gens:?} x={text}");
            c.check(ideal.nu(&x).unwrap() == oracle_nu(&g, &x), || format!("{tag}: ν differs from the brute-force oracle"));

            let dx = x.order().finite().unwrap();
            let bound = (order - 1) / dx;
            let report = ideal.delta_estimate(&x, &ring.one(), bound).unwrap();
            let gaps: Vec<Option<usize>> = report
                .unweighted
                .iter()
                .map(|row| match (row.deg.finite(), row.nu) {
                    (Some(d), NuValue::Finite(n)) => Some(n - d),
                    _ => None,
                })
                .collect();
            for row in &report.unweighted {
                let power = (0..row.k).fold(ring.one(), |acc, _| &acc * &x);
                c.check(row.nu == oracle_nu(&g, &power), || format!("{tag}: ν(x^{}) differs from the oracle", row.k));
            }
            for w in gaps.windows(2) {
                if let [Some(a), Some(b)] = w {
                    c.check(b >= a, || format!("{tag}: gap decreases {a} → {b}"));
                }
            }
            if let Some(cert) = &report.certificate {
                c.check(cert.amplification_holds, || format!("{tag}: library reports amplification failure"));
                for row in report.unweighted.iter().filter(|r| r.k >= cert.k0 && r.k % cert.k0 == 0) {
                    let mult = row.k / cert.k0;
                    let deg = row.deg.finite().unwrap_or(order);
                    let ok = match row.nu {
                        NuValue::Finite(n) => n >= mult + deg,
                        NuValue::AtLeastPrecision => true,
                    };
                    c.check(ok, || format!("{tag}: ν(x^{}) < {mult} + deg", row.k));
                }
            }
            let symbol = x.symbol();
            let radical = ideal.radical_member_bounded(&symbol, bound).unwrap();
            let expected = match report.verdict {
                DeltaVerdict::InfiniteCertified => Some(true),
                DeltaVerdict::ZeroSoFar => Some(false),
                DeltaVerdict::Inconclusive => None,
            };
            c.check(expected == Some(radical.is_some()), || {
                format!("{tag}: verdict {:?} but radical witness {radical:?}", report.verdict)
            });
        }
    }
    c.finish();
}

fn digit_rows(v: &[u64], e: usize, f: usize) -> Vec<Vec<i64>> {
    (0..e).map(|i| (0..f).map(|k| v[i * f + k] as i64).collect()).collect()
}

#[test]
fn rho_structure() {
    let mut c = Criterion::new("rho homomorphism, block images and bijections");
    for (p, e, f) in [(2u64, 1usize, 2usize), (2, 2, 1), (3, 2, 1), (2, 2, 2)] {
        let order = p.pow(2) as usize;
        let ctx = ActionContext::new(&shape_spec(p, e, f, 2), order).unwrap();
        let local = ctx.local();
        let n = e * f;
        let residues = all_vectors(n, p);
        let lift = |v: &[u64]| local.from_digits(&digit_rows(v, e, f)).unwrap();
        let rho: Vec<FpMatrix> = residues.iter().map(|v| ctx.rho_of(&ResidueElem(v.clone())).unwrap()).collect();
        let index = |v: &[u64]| residues.iter().position(|w| w == v).unwrap();
        let tag = format!("({p},{e},{f})");

        c.check(rho[index(&local.reduce_mod_p(&local.one()).0)] == FpMatrix::identity(n, p), || format!("{tag}: ρ(1) ≠ Id"));
        for (a, va) in residues.iter().enumerate() {
            c.check(rho[a] == ctx.rho_via_embedding(&lift(va)).unwrap(), || format!("{tag}: ρ({va:?}) differs from the embedding"));
            for (b, vb) in residues.iter().enumerate() {
                let sum: Vec<u64> = va.iter().zip(vb).map(|(x, y)| (x + y) % p).collect();
                c.check(rho[index(&sum)] == rho[a].add(&rho[b]), || format!("{tag}: ρ not additive at {va:?}, {vb:?}"));
                let prod = local.reduce_mod_p(&local.checked_mul(&lift(va), &lift(vb)).unwrap()).0;
                c.check(rho[index(&prod)] == rho[a].mul(&rho[b]), || format!("{tag}: ρ not multiplicative at {va:?}, {vb:?}"));
            }
        }

        let field = local.field();
        let block = |m: &FpMatrix, rows_level: usize, cols_level: usize| -> Vec<Vec<u64>> {
            (0..f).map(|r| (0..f).map(|k| m.get(rows_level * f + r, cols_level * f + k)).collect()).collect()
        };
        for i in 0..e {
            for cval in field.elements().into_iter().filter(|x| !x.is_zero()) {
                let m = ctx.rho_matrix(&cval, i).unwrap();
                for j in 0..e {
                    for target in 0..e {
                        let b = block(&m, target, j);
                        let ok = if i + j < e && target == i + j { rank(&b, p) == f } else { b.iter().flatten().all(|&x| x == 0) };
                        c.check(ok, || format!("{tag}: ρ({cval:?}ϖ^{i}) block Y_{j} → Y_{target} wrong"));
                    }
                }
            }
            for j in 0..e - i {
                for g in all_vectors(f, p).into_iter().filter(|v| v.iter().any(|&x| x != 0)) {
                    let mut images = BTreeSet::new();
                    for cval in field.elements() {
                        let b = block(&ctx.rho_matrix(&cval, i).unwrap(), i + j, j);
                        let form: Vec<u64> = (0..f).map(|k| (0..f).map(|r| g[r] * b[r][k]).sum::<u64>() % p).collect();
                        images.insert(form);
                    }
                    c.check(images.len() as u64 == field.order(), || format!("{tag}: c ↦ g∘ρ(cϖ^{i}) on Y_{j} not bijective for g={g:?}"));
                }
            }
        }
    }
    c.finish();
}

/// `ϖ` and a Teichmüller lift of a generator of `F_q^×`.
fn special_points(ctx: &ActionContext) -> Vec<(&'static str, OFElem)> {
    let local = ctx.local();
    let varpi = if ctx.e() > 1 { ctx.basis_element(1, 0) } else { local.uniformizer() };
    let teich = if ctx.f() > 1 {
        local.teichmuller(1).unwrap()
    } else {
        local.teichmuller_lift(&local.from_int(ctx.p() as i64 - 1)).unwrap()
    };
    vec![("0", local.zero()), ("1", local.one()), ("ϖ", varpi), ("[λ]", teich)]
}

#[test]
fn embedding_and_taylor() {
    let mut c = Criterion::new("embedding additivity and Taylor residuals");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (p, e, f, m, order) in [(2u64, 1usize, 2usize, 3u32, 8usize), (2, 2, 1, 3, 8), (3, 2, 1, 2, 9), (2, 2, 2, 3, 8)] {
        let ctx = ActionContext::new(&shape_spec(p, e, f, m), order).unwrap();
        let local = ctx.local();
        let tag = format!("({p},{e},{f}) N={order}");
        let size = local.modulus().pow(local.n() as u32);
        c.check(ctx.embed(&local.zero()).unwrap() == ctx.ring().one(), || format!("{tag}: embed(0) ≠ 1"));
        if size <= 1 << 12 {
            let all = local.elements();
            let images: Vec<TruncatedSeries> = all.iter().map(|x| ctx.embed(x).unwrap()).collect();
            let pos: BTreeMap<&OFElem, usize> = all.iter().enumerate().map(|(i, x)| (x, i)).collect();
            let pairs_cap = 1usize << 13;
            if all.len() * all.len() <= pairs_cap {
                for (a, x) in all.iter().enumerate() {
                    for (b, y) in all.iter().enumerate() {
                        let s = pos[&local.checked_add(x, y).unwrap()];
                        c.check(images[s] == &images[a] * &images[b], || format!("{tag}: embed not additive at {x:?}, {y:?}"));
                    }
                }
            } else {
                // additivity against every basis element of the group, for every x
                for (a, x) in all.iter().enumerate() {
                    for i in 0..e {
                        for k in 0..f {
                            let b = pos[&ctx.basis_element(i, k)];
                            let s = pos[&local.checked_add(x, &all[b]).unwrap()];
                            c.check(images[s] == &images[a] * &images[b], || format!("{tag}: embed(x + b) ≠ embed(x)embed(b) at {x:?}"));
                        }
                    }
                }
            }
        }
        for _ in 0..500 {
            let (x, y) = (random_element(&mut rng, local), random_element(&mut rng, local));
            let lhs = ctx.embed(&local.checked_add(&x, &y).unwrap()).unwrap();
            c.check(lhs == &ctx.embed(&x).unwrap() * &ctx.embed(&y).unwrap(), || format!("{tag}: embed not additive at {x:?}, {y:?}"));
        }

        let corpus: Vec<TruncatedSeries> = (0..50)
            .map(|_| random_series(&mut rng, ctx.ring(), 0, (order - 1) / 2, 0.35))
            .collect();
        for r in (1u32..).take_while(|&r| 2 * p.pow(r) as usize <= order) {
            for (name, x) in special_points(&ctx) {
                let gamma = ctx.gamma_make(r, &x).unwrap();
                for fser in &corpus {
                    let t = ctx.taylor_gap_check(&gamma, fser).unwrap();
                    c.check(t.ok && !t.vacuous && t.required_degree == 2 * p.pow(r) as usize, || {
                        format!("{tag}: γ(r={r}, x={name}) on {fser}: residual {} of degree {:?}", t.residual, t.degree)
                    });
                }
            }
        }
    }
    // beyond the exhaustive range
    let ctx = ActionContext::new(&shape_spec(2, 2, 2, 4), 8).unwrap();
    for _ in 0..500 {
        let local = ctx.local();
        let (x, y) = (random_element(&mut rng, local), random_element(&mut rng, local));
        let lhs = ctx.embed(&local.checked_add(&x, &y).unwrap()).unwrap();
        c.check(lhs == &ctx.embed(&x).unwrap() * &ctx.embed(&y).unwrap(), || format!("(2,2,2) M=4: embed not additive at {x:?}, {y:?}"));
    }
    c.finish();
}

fn var_ideal(ctx: &ActionContext, i: usize, k: usize) -> IdealHandle {
    let ring = ctx.ring();
    IdealHandle::new(ring, vec![ring.var(ring.var_index(i, k))]).unwrap()
}

#[test]
fn control_criterion() {
    let mut c = Criterion::new("control by the level-0 derivations");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (p, e, f, order) in [(2u64, 2usize, 1usize, 4usize), (3, 2, 1, 9), (2, 2, 2, 4), (2, 1, 2, 4)] {
        let ctx = ActionContext::new(&shape_spec(p, e, f, 2), order).unwrap();
        let tag = format!("({p},{e},{f})");
        if e == 2 {
            c.check(ctx.control_check(&var_ideal(&ctx, 1, 0)).unwrap().controlled, || format!("{tag}: (X_(1,0)) not controlled"));
            c.check(!ctx.control_check(&var_ideal(&ctx, 0, 0)).unwrap().controlled, || format!("{tag}: (X_(0,0)) controlled"));
        }
        let ring: &Arc<SeriesRing> = ctx.ring();
        for _ in 0..10 {
            let gens: Vec<TruncatedSeries> = (0..rng.gen_range(1..=3))
                .map(|_| random_series(&mut rng, ring, 1, 2, 0.5).pow(p))
                .collect();
            let ideal = IdealHandle::new(ring, gens.clone()).unwrap();
            c.check(ctx.control_check(&ideal).unwrap().controlled, || format!("{tag}: p-th powers {gens:?} not controlled"));
        }
    }
    c.finish();
}

#[test]
fn closure_openness() {
    let mut c = Criterion::new("gamma closure of nonzero principal ideals is open");
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (p, e, f, order, m) in [(2u64, 2usize, 1usize, 4usize, 2u32), (2, 1, 2, 4, 2), (2, 2, 2, 4, 2), (3, 2, 1, 9, 2)] {
        let ctx = ActionContext::new(&shape_spec(p, e, f, m), order).unwrap();
        let gammas = ctx.default_gammas().unwrap();
        let ring = ctx.ring().clone();
        let tag = format!("({p},{e},{f},N={order},M={m})");
        let mut starts: Vec<(String, IdealHandle)> = Vec::new();
        for i in 0..e {
            for k in 0..f {
                starts.push((ring.var_name(ring.var_index(i, k)), var_ideal(&ctx, i, k)));
            }
        }
        while starts.len() < e * f + 20 {
            let g = random_series(&mut rng, &ring, 1, 2, 0.5);
            if !g.is_zero() {
                starts.push((g.to_string(), IdealHandle::new(&ring, vec![g]).unwrap()));
            }
        }
        let mut open = 0;
        for (name, ideal) in &starts {
            let report = ctx.gamma_closure(ideal, &gammas, 64).unwrap();
            open += usize::from(report.open_at.is_some());
            c.check(report.note.contains("not a proof"), || format!("{tag}: report not labelled as evidence"));
            c.check(report.stabilized && report.open_at.is_some(), || {
                format!("{tag}: closure of ({name}) stabilized={} after {} rounds, span dims {:?}, not open", report.stabilized, report.rounds, report.span_dims)
            });
        }
        println!("    {tag}: {open} of {} closures open", starts.len());
        let zero = IdealHandle::new(&ring, vec![]).unwrap();
        let report = ctx.gamma_closure(&zero, &gammas, 64).unwrap();
        c.check(report.open_at.is_none() && report.span_dims.iter().all(|&d| d == 0), || format!("{tag}: zero ideal became open"));
    }
    c.finish();
}

#[test]
fn selftest_determinism() {
    let mut c = Criterion::new("selftest fixtures are byte-identical across runs");
    let first = selftest::canonical_json(&selftest::run().unwrap());
    let second = selftest::canonical_json(&selftest::run().unwrap());
    c.check(first == second, || "selftest output differs between runs".into());
    let value: serde_json::Value = serde_json::from_str(&first).unwrap();
    c.check(value["failed"] == 0, || format!("selftest reports failures: {}", value["failed"]));
    c.finish();
}
