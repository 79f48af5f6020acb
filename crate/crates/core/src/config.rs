//! JSON configuration shared by the command line and the self test.
//!
//! ```json
//! {"p": 2, "f": 1, "phi": [0, 1], "e": 2, "eisenstein": [-2, 0, 1], "M": 2, "N": 4}
//! ```
//!
//! Optional keys: `gammas` (a list of `{"r": 1, "x": [[1], [0]]}` with `x`
//! given by digit rows) and `degree_cap` for exact polynomial work.

use crate::dynamics::{ActionContext, GammaEndomorphism};
use crate::error::{invalid, Error, Result};
use crate::gf::{FieldSpec, GaloisField};
use crate::moore::DEFAULT_DEGREE_CAP;
use crate::padic::{EisensteinCoeff, LocalFieldSpec, LocalRing};
use crate::series::SeriesRing;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaSpec {
    pub r: u32,
    /// Digit rows `x[i][k]` on `ϖ^i [λ^k]`.
    pub x: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub p: u64,
    pub f: usize,
    pub phi: Vec<i64>,
    pub e: usize,
    pub eisenstein: Vec<EisensteinCoeff>,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<GammaSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_cap: Option<usize>,
}

impl Config {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Config = serde_json::from_str(text).map_err(|e| Error::Parse {
            pos: e.column(),
            msg: format!("config: {e}"),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::InvalidArgument(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    /// Re-run every constructor so that errors surface at load time.
    pub fn validate(&self) -> Result<()> {
        if self.eisenstein.len() != self.e + 1 {
            return Err(invalid(
                "eisenstein",
                format!("expected {} coefficients for e = {}, got {}", self.e + 1, self.e, self.eisenstein.len()),
            ));
        }
        if let Some(0) = self.degree_cap {
            return Err(invalid("degree_cap", "must be positive"));
        }
        self.local_ring()?;
        self.series_ring()?;
        if let Some(gammas) = &self.gammas {
            for g in gammas {
                if g.r == 0 {
                    return Err(invalid("gammas", "r must be at least 1"));
                }
                if g.x.len() != self.e || g.x.iter().any(|row| row.len() != self.f) {
                    return Err(invalid(
                        "gammas",
                        format!("x must have {} rows of {} digits", self.e, self.f),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn field_spec(&self) -> FieldSpec {
        FieldSpec::new(self.p, self.f, self.phi.clone())
    }

    pub fn field(&self) -> Result<GaloisField> {
        GaloisField::new(&self.field_spec())
    }

    pub fn local_spec(&self) -> LocalFieldSpec {
        LocalFieldSpec {
            base: self.field_spec(),
            e: self.e,
            eis: self.eisenstein.clone(),
            m: self.m,
        }
    }

    pub fn local_ring(&self) -> Result<LocalRing> {
        LocalRing::new(&self.local_spec())
    }

    pub fn series_ring(&self) -> Result<Arc<SeriesRing>> {
        SeriesRing::new(self.p, self.e, self.f, self.n)
    }

    /// Context for the group actions; requires `p^M ≥ N`.
    pub fn action_context(&self) -> Result<ActionContext> {
        ActionContext::from_parts(self.local_ring()?, self.n)
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap.unwrap_or(DEFAULT_DEGREE_CAP)
    }

    /// The configured `γ`s, or the default set when none are given.
    pub fn gammas(&self, ctx: &ActionContext) -> Result<Vec<GammaEndomorphism>> {
        match &self.gammas {
            None => ctx.default_gammas(),
            Some(list) => list
                .iter()
                .map(|g| ctx.gamma_make(g.r, &ctx.local().from_digits(&g.x)?))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RAMIFIED: &str = r#"{"p":2,"f":1,"phi":[0,1],"e":2,"eisenstein":[-2,0,1],"M":2,"N":4}"#;

    #[test]
    fn loads_the_ramified_example() {
        let cfg = Config::from_json(RAMIFIED).unwrap();
        assert_eq!((cfg.p, cfg.e, cfg.m, cfg.n), (2, 2, 2, 4));
        let ctx = cfg.action_context().unwrap();
        assert_eq!(cfg.gammas(&ctx).unwrap().len(), 2);
    }

    #[test]
    fn errors_name_the_field() {
        let missing = r#"{"p":2,"f":1,"phi":[0,1],"e":2,"eisenstein":[-2,0,1],"M":2}"#;
        let err = Config::from_json(missing).unwrap_err().to_string();
        assert!(err.contains("`N`"), "{err}");
        let bad_p = RAMIFIED.replace(r#""p":2"#, r#""p":4"#);
        let err = Config::from_json(&bad_p).unwrap_err();
        assert!(matches!(err, Error::InvalidSpec { field: "p", .. }), "{err}");
        let bad_eis = RAMIFIED.replace("[-2,0,1]", "[-4,0,1]");
        assert!(Config::from_json(&bad_eis).is_err());
        let unknown = RAMIFIED.replace(r#""M":2"#, r#""M":2,"Q":1"#);
        assert!(Config::from_json(&unknown).unwrap_err().to_string().contains("Q"));
    }

    #[test]
    fn coupling_checked_only_for_actions() {
        let cfg = Config::from_json(&RAMIFIED.replace(r#""N":4"#, r#""N":6"#)).unwrap();
        assert!(cfg.series_ring().is_ok());
        assert!(matches!(cfg.action_context(), Err(Error::Precision(_))));
    }

    #[test]
    fn explicit_gammas() {
        let text = RAMIFIED.replace(r#""N":4"#, r#""N":4,"gammas":[{"r":1,"x":[[0],[1]]}]"#);
        let cfg = Config::from_json(&text).unwrap();
        let ctx = cfg.action_context().unwrap();
        let gammas = cfg.gammas(&ctx).unwrap();
        assert_eq!(gammas.len(), 1);
        assert_eq!(gammas[0].x, ctx.local().uniformizer());
        let bad = RAMIFIED.replace(r#""N":4"#, r#""N":4,"gammas":[{"r":1,"x":[[0]]}]"#);
        assert!(Config::from_json(&bad).is_err());
    }
}
