//! Command dispatch for the `iwasawa` binary. Every command prints one JSON
//! document; [`run`] returns it together with the process exit code.

use clap::{Args, Parser, Subcommand, ValueEnum};
use iwasawa::config::Config;
use iwasawa::dynamics::{ActionContext, GammaEndomorphism};
use iwasawa::moore::{
    comatrix_cramer_check, lemma_estimation_check, moore_det, projective_product, lines_of_span,
    prop_uf_certificate, DEFAULT_DEGREE_CAP,
};
use iwasawa::{selftest, Error, IdealHandle, TruncatedSeries};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "iwasawa", version, about = "Truncated Iwasawa-algebra computations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArg {
    /// JSON field configuration.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Args, Debug)]
struct IdealArg {
    /// Comma-separated generators, e.g. "X1_0,X0_0^2".
    #[arg(long)]
    ideal: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GammaSet {
    /// `γ(1, ϖ^i [λ^k])` for every basis element.
    Default,
    /// The list under `gammas` in the config.
    Config,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Image of an element of `O_F` in the series ring.
    Embed {
        #[command(flatten)]
        cfg: ConfigArg,
        /// Digit rows "a00,a01;a10,a11".
        #[arg(long)]
        elem: String,
    },
    /// Apply `γ(r, x)` to a series.
    GammaAct {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long, default_value_t = 1)]
        r: u32,
        /// Digit rows of `x`.
        #[arg(long)]
        x: String,
        #[arg(long)]
        poly: String,
    },
    /// `ν` of a series modulo an ideal.
    Nu {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        ideal: IdealArg,
        #[arg(long)]
        elem: String,
        /// Work modulo `m^d` instead of `m^N`.
        #[arg(long)]
        at: Option<usize>,
    },
    /// Gap table and verdict for `x^k P`.
    Delta {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        ideal: IdealArg,
        #[arg(long)]
        elem: String,
        #[arg(long, default_value = "1")]
        weight: String,
        /// Largest power tried; defaults to `N - 1`.
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Membership of a homogeneous form in the associated graded ideal.
    GrMember {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        ideal: IdealArg,
        #[arg(long)]
        elem: String,
        /// Also search for `h^k` in the graded ideal for `k` up to this bound.
        #[arg(long)]
        radical_bound: Option<usize>,
    },
    /// Moore determinant factorization, Cramer identity and minor estimates.
    MooreCheck {
        #[arg(long)]
        p: u64,
        /// Linear forms as rows "1,0;0,1".
        #[arg(long)]
        forms: String,
        #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
        degree_cap: usize,
    },
    /// Cramer-rule certificate for `U_g^{p^s} (g∘φ)`.
    UfCertificate {
        #[arg(long)]
        p: u64,
        /// Functional on the ambient space, "1,0,0".
        #[arg(long)]
        g: String,
        /// Images of a basis of the source, one row each.
        #[arg(long)]
        varphi: String,
        #[arg(long, default_value_t = 0)]
        s: u32,
        #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
        degree_cap: usize,
    },
    /// Residual of the first-order expansion of `γ(F)`.
    TaylorCheck {
        #[command(flatten)]
        cfg: ConfigArg,
        #[arg(long)]
        poly: String,
        #[arg(long)]
        gammas: Option<GammaSet>,
    },
    /// Stability of an ideal under the derivations in the level-0 variables.
    ControlCheck {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        ideal: IdealArg,
    },
    /// Gap table for `U_g^{p^r} P` with `P` built from `F`.
    CorDelta {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        ideal: IdealArg,
        #[arg(long)]
        poly: String,
        /// Functional on the level block, "1,0".
        #[arg(long)]
        g: String,
        /// Residue field coordinates of `c`.
        #[arg(long)]
        c: String,
        #[arg(long, default_value_t = 0)]
        level: usize,
        #[arg(long, default_value_t = 3)]
        max_r: u32,
    },
    /// Close an ideal under a set of `γ`s.
    Closure {
        #[command(flatten)]
        cfg: ConfigArg,
        #[command(flatten)]
        ideal: IdealArg,
        #[arg(long)]
        gammas: Option<GammaSet>,
        #[arg(long, default_value_t = 64)]
        max_rounds: usize,
        /// Include wall-clock time, which makes the output nondeterministic.
        #[arg(long)]
        timing: bool,
    },
    /// Run the built-in invariant sweep.
    Selftest,
}

/// Parse "a,b;c,d" into integer rows.
pub fn parse_rows(s: &str) -> Result<Vec<Vec<i64>>, Error> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|d| {
                    d.trim().parse::<i64>().map_err(|e| Error::InvalidArgument(format!("bad digit {d:?}: {e}")))
                })
                .collect()
        })
        .collect()
}

fn parse_fp_rows(s: &str, p: u64) -> Result<Vec<Vec<u64>>, Error> {
    if p < 2 {
        return Err(Error::InvalidArgument("p must be at least 2".into()));
    }
    Ok(parse_rows(s)?
        .into_iter()
        .map(|row| row.into_iter().map(|d| d.rem_euclid(p as i64) as u64).collect())
        .collect())
}

fn parse_fp_vector(s: &str, p: u64) -> Result<Vec<u64>, Error> {
    let rows = parse_fp_rows(s, p)?;
    if rows.len() != 1 {
        return Err(Error::InvalidArgument(format!("expected a single row, got {s:?}")));
    }
    Ok(rows.into_iter().next().unwrap())
}

fn parse_ideal(cfg: &Config, list: &str) -> Result<IdealHandle, Error> {
    let ring = cfg.series_ring()?;
    let gens: Vec<&str> = list.split(',').map(str::trim).filter(|g| !g.is_empty()).collect();
    IdealHandle::parse(&ring, &gens)
}

fn pick_gammas(cfg: &Config, ctx: &ActionContext, set: Option<GammaSet>) -> Result<Vec<GammaEndomorphism>, Error> {
    match set {
        None => cfg.gammas(ctx),
        Some(GammaSet::Default) => ctx.default_gammas(),
        Some(GammaSet::Config) if cfg.gammas.is_none() => {
            Err(Error::InvalidArgument("the config has no `gammas` list".into()))
        }
        Some(GammaSet::Config) => cfg.gammas(ctx),
    }
}

fn digits_json(ctx: &ActionContext, gamma: &GammaEndomorphism) -> Result<Value, Error> {
    Ok(json!({ "r": gamma.r, "x": ctx.local().digits_decompose(&gamma.x)?.rows() }))
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize to JSON")
}

fn status(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn series(cfg: &Config, text: &str) -> Result<TruncatedSeries, Error> {
    cfg.series_ring()?.parse(text)
}

fn dispatch(command: Command) -> Result<(i32, Value), Error> {
    match command {
        Command::Embed { cfg, elem } => {
            let cfg = Config::load(&cfg.config)?;
            let ctx = cfg.action_context()?;
            let x = ctx.local().from_digits(&parse_rows(&elem)?)?;
            let image = ctx.embed(&x)?;
            Ok((EXIT_OK, json!({ "elem": ctx.local().digits_decompose(&x)?.rows(), "series": image.to_string() })))
        }
        Command::GammaAct { cfg, r, x, poly } => {
            let cfg = Config::load(&cfg.config)?;
            let ctx = cfg.action_context()?;
            let gamma = ctx.gamma_make(r, &ctx.local().from_digits(&parse_rows(&x)?)?)?;
            let f = series(&cfg, &poly)?;
            let image = ctx.gamma_act(&gamma, &f)?;
            Ok((EXIT_OK, json!({ "gamma": digits_json(&ctx, &gamma)?, "input": f.to_string(), "image": image.to_string() })))
        }
        Command::Nu { cfg, ideal, elem, at } => {
            let cfg = Config::load(&cfg.config)?;
            let ideal = parse_ideal(&cfg, &ideal.ideal)?;
            let x = series(&cfg, &elem)?;
            let nu = match at {
                Some(d) => ideal.nu_at(&x, d)?,
                None => ideal.nu(&x)?,
            };
            Ok((EXIT_OK, json!({ "nu": nu })))
        }
        Command::Delta { cfg, ideal, elem, weight, bound } => {
            let cfg = Config::load(&cfg.config)?;
            let ideal = parse_ideal(&cfg, &ideal.ideal)?;
            let x = series(&cfg, &elem)?;
            let w = series(&cfg, &weight)?;
            let report = ideal.delta_estimate(&x, &w, bound.unwrap_or(cfg.n.saturating_sub(1)))?;
            Ok((EXIT_OK, to_json(&report)))
        }
        Command::GrMember { cfg, ideal, elem, radical_bound } => {
            let cfg = Config::load(&cfg.config)?;
            let ideal = parse_ideal(&cfg, &ideal.ideal)?;
            let h = series(&cfg, &elem)?;
            let mut out = json!({ "member": ideal.gr_member(&h)? });
            if let Some(bound) = radical_bound {
                out["radical_witness"] = json!(ideal.radical_member_bounded(&h, bound)?);
            }
            Ok((EXIT_OK, out))
        }
        Command::MooreCheck { p, forms, degree_cap } => {
            let forms = parse_fp_rows(&forms, p)?;
            let det = moore_det(&forms, p, degree_cap)?;
            let full = projective_product(&lines_of_span(&forms, p), p)?;
            let scalar = det.div_exact(&full).ok().and_then(|q| q.as_constant());
            let cramer = comatrix_cramer_check(&forms, p, degree_cap)?;
            let mut estimates = Vec::new();
            if forms.len() >= 2 {
                for i in 1..=forms.len() {
                    for j in 1..=forms.len() {
                        estimates.push(lemma_estimation_check(&forms, i, j, p, degree_cap)?);
                    }
                }
            }
            let ok = matches!(scalar, Some(c) if c != 0) && cramer.ok && estimates.iter().all(|e| e.ok);
            Ok((
                status(ok),
                json!({
                    "det": det,
                    "projective_product": full,
                    "scalar": scalar,
                    "cramer": cramer,
                    "estimates": estimates,
                    "ok": ok,
                }),
            ))
        }
        Command::UfCertificate { p, g, varphi, s, degree_cap } => {
            let g = parse_fp_vector(&g, p)?;
            let varphi = parse_fp_rows(&varphi, p)?;
            let cert = prop_uf_certificate(&g, &varphi, s, p, degree_cap)?;
            Ok((status(cert.ok), to_json(&cert)))
        }
        Command::TaylorCheck { cfg, poly, gammas } => {
            let cfg = Config::load(&cfg.config)?;
            let ctx = cfg.action_context()?;
            let f = series(&cfg, &poly)?;
            let mut rows = Vec::new();
            let mut ok = true;
            for gamma in pick_gammas(&cfg, &ctx, gammas)? {
                let check = ctx.taylor_gap_check(&gamma, &f)?;
                ok &= check.ok;
                let mut row = to_json(&check);
                row["gamma"] = digits_json(&ctx, &gamma)?;
                rows.push(row);
            }
            Ok((status(ok), json!({ "checks": rows, "ok": ok })))
        }
        Command::ControlCheck { cfg, ideal } => {
            let cfg = Config::load(&cfg.config)?;
            let ctx = cfg.action_context()?;
            let ideal = parse_ideal(&cfg, &ideal.ideal)?;
            Ok((EXIT_OK, to_json(&ctx.control_check(&ideal)?)))
        }
        Command::CorDelta { cfg, ideal, poly, g, c, level, max_r } => {
            let cfg = Config::load(&cfg.config)?;
            let ctx = cfg.action_context()?;
            let ideal = parse_ideal(&cfg, &ideal.ideal)?;
            let f = series(&cfg, &poly)?;
            let g = parse_fp_vector(&g, cfg.p)?;
            let c = ctx.local().field().from_coords(&parse_rows(&c)?.concat())?;
            let report = ctx.cor_delta_experiment(&ideal, &f, &g, &c, level, max_r)?;
            Ok((EXIT_OK, to_json(&report)))
        }
        Command::Closure { cfg, ideal, gammas, max_rounds, timing } => {
            let cfg = Config::load(&cfg.config)?;
            let ctx = cfg.action_context()?;
            let ideal = parse_ideal(&cfg, &ideal.ideal)?;
            let gammas = pick_gammas(&cfg, &ctx, gammas)?;
            let mut report = ctx.gamma_closure(&ideal, &gammas, max_rounds)?;
            if !timing {
                report.wall_time_ms = None;
            }
            let mut out = to_json(&report);
            out["gammas"] = gammas.iter().map(|g| digits_json(&ctx, g)).collect::<Result<Vec<_>, _>>()?.into();
            Ok((EXIT_OK, out))
        }
        Command::Selftest => {
            let report = selftest::run()?;
            let ok = report["failed"] == 0;
            Ok((status(ok), report))
        }
    }
}

/// Parse `args` (including the program name) and execute the command.
/// Returns the exit code and the text to print on standard output.
pub fn run<I, T>(args: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => (EXIT_OK, e.to_string()),
                _ => (EXIT_USAGE, render(&json!({ "error": e.to_string().trim_end() }))),
            };
        }
    };
    match dispatch(cli.command) {
        Ok((code, value)) => (code, render(&value)),
        Err(e) => (EXIT_USAGE, render(&json!({ "error": e.to_string() }))),
    }
}

fn render(value: &Value) -> String {
    let mut text = selftest::canonical_json(value);
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_rows() {
        assert_eq!(parse_rows("1,0;0,1").unwrap(), vec![vec![1, 0], vec![0, 1]]);
        assert_eq!(parse_rows("3").unwrap(), vec![vec![3]]);
        assert!(parse_rows("1,x").is_err());
        assert_eq!(parse_fp_rows("-1,4", 3).unwrap(), vec![vec![2, 1]]);
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, out) = run(["iwasawa", "frobnicate"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(out.contains("error"));
    }
}
