//! JSON run configurations for the command-line tool.
//!
//! Every config is parsed with unknown fields rejected and then validated
//! before any computation. Errors carry the line of the offending key when
//! it can be found in the source text.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::Expectation;
use crate::construction::{FamilyParams, IntroParams};
use crate::error::{Error, Result};
use crate::geom::{ChartKind, SpaceKind};
use crate::tilings::{TileFamily, Window3};

/// Meshes `build` can write.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    /// The self-intersecting octahedron `M_r`.
    M,
    /// The disk `N_r`.
    N,
    /// The host tetrahedron.
    T,
    /// The glued surface `P_r`.
    P,
    /// The reference Böröczky cell.
    #[serde(rename = "kappa")]
    Kappa,
    /// The Böröczky cell carrying a patch (needs `tileFamily`).
    #[serde(rename = "modifiedKappa")]
    ModifiedKappa,
    /// The first north cell of the 12-cell tiling.
    #[serde(rename = "sphericalCell")]
    SphericalCell,
    /// Its modified counterpart (needs `tileFamily`).
    #[serde(rename = "modifiedSphericalCell")]
    ModifiedSphericalCell,
    /// The introductory family member (needs `intro`).
    #[serde(rename = "intro")]
    Intro,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::M => "M",
            Construction::N => "N",
            Construction::T => "T",
            Construction::P => "P",
            Construction::Kappa => "kappa",
            Construction::ModifiedKappa => "modifiedKappa",
            Construction::SphericalCell => "sphericalCell",
            Construction::ModifiedSphericalCell => "modifiedSphericalCell",
            Construction::Intro => "intro",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct BuildConfig {
    #[serde(default)]
    pub family: Option<FamilyParams>,
    #[serde(default)]
    pub tile_family: Option<TileFamily>,
    #[serde(default)]
    pub intro: Option<IntroParams>,
    /// Parameter value; defaults to the midpoint of the feasible interval.
    #[serde(default)]
    pub r: Option<f64>,
    pub constructions: Vec<Construction>,
    #[serde(default)]
    pub chart: Option<ChartKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SweepConfig {
    /// Glued family; exclusive with `intro`.
    #[serde(default)]
    pub family: Option<FamilyParams>,
    #[serde(default)]
    pub intro: Option<IntroParams>,
    #[serde(default = "default_sweep_samples")]
    pub samples: usize,
    /// Replaces the built-in expectation set.
    #[serde(default)]
    pub expectations: Option<Vec<Expectation>>,
}

fn default_sweep_samples() -> usize {
    50
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tiling {
    Boroczky,
    Spherical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct TileConfig {
    pub tiling: Tiling,
    /// Patch family; the unmodified tiling is built when absent.
    #[serde(default)]
    pub modified: Option<TileFamily>,
    /// Number of parameter values for the modified tiling.
    #[serde(default = "default_tile_samples")]
    pub samples: usize,
    /// Exponent ranges for the Böröczky tiling.
    #[serde(default)]
    pub window: Option<Window3>,
    /// Random points for the coverage check of the spherical tiling.
    #[serde(default = "default_coverage")]
    pub coverage_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub chart: Option<ChartKind>,
}

fn default_tile_samples() -> usize {
    5
}

fn default_coverage() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct VerifyConfig {
    /// Spaces in which to check the moving-vertex tetrahedron.
    #[serde(default)]
    pub tetrahedra: Vec<SpaceKind>,
    /// Glued families checked at the middle of their interval.
    #[serde(default)]
    pub families: Vec<FamilyParams>,
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_h")]
    pub max_residual: f64,
    /// Required residual ratio when `h` is halved (tetrahedra only).
    #[serde(default = "default_ratio")]
    pub min_ratio: f64,
    /// Radii for the hyperbolic ball volume calibration.
    #[serde(default)]
    pub ball_radii: Vec<f64>,
    #[serde(default = "default_ball_level")]
    pub ball_level: usize,
    #[serde(default = "default_ball_tol")]
    pub ball_tol: f64,
    /// Random `(beta, r)` pairs for the apex distance identity; 0 skips it.
    #[serde(default)]
    pub apex_samples: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_h() -> f64 {
    1e-4
}

fn default_ratio() -> f64 {
    3.0
}

fn default_ball_level() -> usize {
    4
}

fn default_ball_tol() -> f64 {
    1e-3
}

/// Semantic checks run after parsing.
pub trait Validate {
    fn validate(&self) -> Result<()>;
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("`{name}` must be positive")))
    }
}

impl Validate for BuildConfig {
    fn validate(&self) -> Result<()> {
        if let Some(f) = &self.family {
            f.validate()?;
        }
        if let Some(t) = &self.tile_family {
            t.validate()?;
        }
        if let Some(i) = &self.intro {
            i.validate()?;
        }
        for c in &self.constructions {
            let missing = match c {
                Construction::M | Construction::N | Construction::T | Construction::P => self.family.is_none().then_some("family"),
                Construction::ModifiedKappa | Construction::ModifiedSphericalCell => self.tile_family.is_none().then_some("tileFamily"),
                Construction::Intro => self.intro.is_none().then_some("intro"),
                Construction::Kappa | Construction::SphericalCell => None,
            };
            if let Some(field) = missing {
                return Err(Error::Config(format!("`constructions` asks for {} but `{field}` is missing", c.name())));
            }
        }
        if let Some(r) = self.r {
            if !r.is_finite() {
                return Err(Error::Config("`r` must be finite".into()));
            }
        }
        Ok(())
    }
}

impl Validate for SweepConfig {
    fn validate(&self) -> Result<()> {
        match (&self.family, &self.intro) {
            (Some(f), None) => f.validate()?,
            (None, Some(i)) => i.validate()?,
            _ => return Err(Error::Config("give exactly one of `family` and `intro`".into())),
        }
        if self.samples < 3 {
            return Err(Error::Config("`samples` must be at least 3".into()));
        }
        for e in self.expectations.iter().flatten() {
            if let Some(t) = e.tol_constant {
                positive("tolConstant", t)?;
            }
        }
        Ok(())
    }
}

impl Validate for TileConfig {
    fn validate(&self) -> Result<()> {
        if let Some(m) = &self.modified {
            m.validate()?;
            let want = match self.tiling {
                Tiling::Boroczky => SpaceKind::Hyperbolic,
                Tiling::Spherical => SpaceKind::Spherical,
            };
            if m.family.kind != want {
                return Err(Error::Config(format!("the {:?} tiling needs a {} patch family", self.tiling, want.name())));
            }
            if self.samples == 0 {
                return Err(Error::Config("`samples` must be at least 1".into()));
            }
        }
        if self.tiling == Tiling::Spherical && self.window.is_some() {
            return Err(Error::Config("`window` only applies to the Böröczky tiling".into()));
        }
        Ok(())
    }
}

impl Validate for VerifyConfig {
    fn validate(&self) -> Result<()> {
        for f in &self.families {
            f.validate()?;
        }
        positive("h", self.h)?;
        positive("maxResidual", self.max_residual)?;
        positive("minRatio", self.min_ratio)?;
        positive("ballTol", self.ball_tol)?;
        for &r in &self.ball_radii {
            positive("ballRadii", r)?;
        }
        if self.ball_level == 0 {
            return Err(Error::Config("`ballLevel` must be at least 1".into()));
        }
        Ok(())
    }
}

/// First line of `text` mentioning the JSON key `key`.
fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

/// Names in backticks, for pointing at the line of a validation error.
fn quoted_key(msg: &str) -> Option<&str> {
    let start = msg.find('`')? + 1;
    let end = msg[start..].find('`')? + start;
    Some(&msg[start..end])
}

/// Parses and validates `text`; `origin` names the source in messages.
pub fn parse_config<C: DeserializeOwned + Validate>(text: &str, origin: &str) -> Result<C> {
    let c: C = serde_json::from_str(text).map_err(|e| Error::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
    c.validate().map(|_| c).map_err(|e| match e {
        Error::Config(msg) => {
            let line = quoted_key(&msg).and_then(|k| line_of(text, k)).or_else(|| field_hint(&msg).and_then(|k| line_of(text, k)));
            match line {
                Some(l) => Error::Config(format!("{origin}:{l}: {msg}")),
                None => Error::Config(format!("{origin}: {msg}")),
            }
        }
        other => other,
    })
}

/// Field names of family parameters that appear unquoted in messages.
fn field_hint(msg: &str) -> Option<&'static str> {
    const FIELDS: [&str; 13] = [
        "beta", "alphaA", "angleB", "rMin", "rMax", "hostScale", "margin", "hostRadius", "footRadius", "height", "tMin",
        "tMax", "tolerances",
    ];
    FIELDS.into_iter().find(|f| msg.split(|c: char| !c.is_ascii_alphanumeric()).any(|w| w == *f))
}

pub fn load_config<C: DeserializeOwned + Validate>(path: &Path) -> Result<C> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_beta_points_at_its_line() {
        let text = "{\n  \"family\": {\n    \"kind\": \"hyperbolic\",\n    \"alphaA\": 2.0,\n    \"angleB\": 0.6,\n    \"beta\": 1.6,\n    \"hostScale\": 2.5,\n    \"rMin\": 0.3,\n    \"rMax\": 0.5,\n    \"margin\": 0.2\n  },\n  \"constructions\": [\"P\"]\n}\n";
        let err = parse_config::<BuildConfig>(text, "cfg.json").unwrap_err().to_string();
        assert!(err.contains("cfg.json:6:"), "{err}");
    }

    #[test]
    fn schema_errors_carry_positions() {
        let err = parse_config::<SweepConfig>("{\n \"samples\": 5,\n \"bogus\": 1\n}", "x").unwrap_err().to_string();
        assert!(err.contains("x:3:"), "{err}");
        let err = parse_config::<SweepConfig>("{\"samples\": 5}", "x").unwrap_err().to_string();
        assert!(err.contains("exactly one"), "{err}");
    }

    #[test]
    fn missing_inputs_for_constructions() {
        let err = parse_config::<BuildConfig>("{\"constructions\": [\"modifiedKappa\"]}", "x").unwrap_err().to_string();
        assert!(err.contains("tileFamily"), "{err}");
        parse_config::<BuildConfig>("{\"constructions\": [\"kappa\", \"sphericalCell\"]}", "x").unwrap();
    }

    #[test]
    fn tile_family_kind_must_match() {
        let mut c = TileConfig {
            tiling: Tiling::Spherical,
            modified: Some(TileFamily::default_for(SpaceKind::Hyperbolic)),
            samples: 5,
            window: None,
            coverage_samples: 10,
            seed: 0,
            chart: None,
        };
        assert!(c.validate().is_err());
        c.modified = Some(TileFamily::default_for(SpaceKind::Spherical));
        c.validate().unwrap();
    }
}
