//! Run configuration: JSON schema, validation with field paths, and the
//! hash stamped into every output.

use std::fmt;
use std::path::{Path, PathBuf};

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exact::{fmt_rat, ratstr, Rat};
use crate::measure::{MeasureProfile, Piece, RationalFunctionDatum};
use crate::operator::{growth_condition_holds, Cutoff, Mode, OperatorConfig, DEFAULT_MAX_WORDS};
use crate::padic::{Disc, Qp};
use crate::schottky::{MoebiusMap, Region, SchottkyGroup};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSection {
    pub p: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscSpec {
    #[serde(with = "ratstr")]
    pub center: Rat,
    pub radius_exp: i64,
}

impl DiscSpec {
    pub fn to_disc(&self, qp: Qp) -> Disc {
        Disc::new(qp, &self.center, self.radius_exp)
    }

    pub fn from_disc(d: &Disc) -> Self {
        Self { center: d.center().clone(), radius_exp: d.radius_exp() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Disc,
    CoDisc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: RegionKind,
    pub disc: DiscSpec,
}

impl RegionSpec {
    fn to_region(&self, qp: Qp) -> Region {
        match self.kind {
            RegionKind::Disc => Region::Disc(self.disc.to_disc(qp)),
            RegionKind::CoDisc => Region::CoDisc(self.disc.to_disc(qp)),
        }
    }
}

/// A generator `[a, b, c, d]` and its hole pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub matrix: MoebiusMap,
    pub holes: [RegionSpec; 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSection {
    pub generators: Vec<GeneratorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<DiscSpec>,
    /// Word depth of the tiling check.
    #[serde(default = "default_depth")]
    pub verify_depth: usize,
}

fn default_depth() -> usize {
    3
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PieceSpec {
    #[serde(with = "ratstr")]
    pub center: Rat,
    pub radius_exp: i64,
    #[serde(with = "ratstr")]
    pub density: Rat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datum: Option<RationalFunctionDatum>,
    /// Explicit profile, used when no datum is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<PieceSpec>>,
    /// Subdivision depth around zeros and poles of the datum.
    #[serde(default = "default_resolution")]
    pub resolution: u32,
}

fn default_resolution() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSection {
    #[serde(with = "ratstr")]
    pub alpha: Rat,
    #[serde(with = "ratstr")]
    pub alpha_g: Rat,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default)]
    pub cutoff: Cutoff,
    #[serde(default = "default_max_words")]
    pub max_words: usize,
}

fn default_max_words() -> usize {
    DEFAULT_MAX_WORDS
}

/// Initial data for `evolve` and right-hand side for `resolvent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialSpec {
    /// Indicator of one state.
    Indicator(usize),
    /// `1_{child k} − 1_{child 0}` on an admissible disc.
    Wavelet { disc: DiscSpec, child: usize },
    Values(Vec<f64>),
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self::Indicator(0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSection {
    pub level: u32,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub start_state: usize,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_audit_instances")]
    pub audit_instances: usize,
}

fn default_times() -> Vec<f64> {
    vec![0.0, 0.5, 1.0, 2.0]
}

fn default_paths() -> usize {
    1000
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_eta() -> f64 {
    1.0
}

fn default_audit_instances() -> usize {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub field: FieldSection,
    pub group: GroupSection,
    pub measure: MeasureSection,
    pub operator: OperatorSection,
    pub run: RunSection,
}

/// One violated invariant, located by a dotted field path.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid configuration:\n{}", .0.iter().map(|e| format!("  {e}")).collect::<Vec<_>>().join("\n"))]
    Validation(Vec<FieldError>),
}

impl ConfigError {
    fn one(path: impl Into<String>, message: impl ToString) -> Self {
        Self::Validation(vec![FieldError { path: path.into(), message: message.to_string() }])
    }
}

/// Everything a command needs, built from a validated configuration.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub config: RunConfig,
    pub hash: String,
    pub group: SchottkyGroup,
    pub profile: MeasureProfile,
    pub operator: OperatorConfig,
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| ConfigError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config_str(&text)
}

impl RunConfig {
    /// SHA-256 of the canonical JSON encoding, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.run.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks every invariant and builds the group, profile and operator.
    pub fn prepare(&self) -> Result<Prepared, ConfigError> {
        let mut errs = Vec::new();
        let mut err = |path: &str, msg: String| errs.push(FieldError { path: path.into(), message: msg });

        let qp = Qp::new(self.field.p).map_err(|e| ConfigError::one("field.p", e))?;
        let genus = self.group.generators.len();
        let two_g = 2 * genus;
        if !crate::exact::is_positive(&self.operator.alpha) {
            err("operator.alpha", "must be positive".into());
        }
        if !crate::exact::is_positive(&self.operator.alpha_g) {
            err("operator.alpha_g", "must be positive".into());
        } else if !growth_condition_holds(qp.p(), &self.operator.alpha_g, genus) {
            err(
                "operator.alpha_g",
                format!(
                    "growth condition p^alpha_g > 2g fails: {}^{} <= {two_g}",
                    qp.p(),
                    fmt_rat(&self.operator.alpha_g)
                ),
            );
        }
        match self.operator.cutoff {
            Cutoff::Length(0) => err("operator.cutoff.length", "must be at least 1".into()),
            Cutoff::Tolerance(t) if !(t > 0.0 && t < 1.0) => {
                err("operator.cutoff.tolerance", format!("{t} is not in (0, 1)"))
            }
            _ => {}
        }
        match (&self.measure.datum, &self.measure.pieces) {
            (Some(_), Some(_)) => err("measure", "give either datum or pieces, not both".into()),
            (None, None) => err("measure", "one of datum or pieces is required".into()),
            (Some(d), None) => {
                if d.scale.is_zero() {
                    err("measure.datum.scale", "must be nonzero".into());
                }
                for (i, f) in d.irreducible_factors.iter().enumerate() {
                    err(
                        &format!("measure.datum.irreducible_factors[{i}]"),
                        format!("factor {f:?} has zeros outside the rational points; all zeros must be rational"),
                    );
                }
                if self.run.level < self.measure.resolution {
                    err(
                        "run.level",
                        format!("level {} is below the profile resolution {}", self.run.level, self.measure.resolution),
                    );
                }
            }
            (None, Some(_)) => {}
        }
        if self.run.paths == 0 {
            err("run.paths", "must be at least 1".into());
        }
        for (i, t) in self.run.times.iter().enumerate() {
            if !(*t >= 0.0 && t.is_finite()) {
                err(&format!("run.times[{i}]"), format!("{t} must be finite and nonnegative"));
            }
        }
        if !(self.run.eta > 0.0 && self.run.eta.is_finite()) {
            err("run.eta", format!("{} must be positive", self.run.eta));
        }
        if !errs.is_empty() {
            return Err(ConfigError::Validation(errs));
        }

        let holes = self
            .group
            .generators
            .iter()
            .map(|g| (g.holes[0].to_region(qp), g.holes[1].to_region(qp)))
            .collect();
        let gens = self.group.generators.iter().map(|g| g.matrix.clone()).collect();
        let group = SchottkyGroup::new(qp, gens, holes, self.group.outer.as_ref().map(|d| d.to_disc(qp)))
            .map_err(|e| ConfigError::one("group", e))?;
        group.verify_fundamental_domain(self.group.verify_depth).map_err(|e| ConfigError::one("group.generators", e))?;
        let domain = group.fundamental_domain();
        let profile = match (&self.measure.datum, &self.measure.pieces) {
            (Some(d), _) => MeasureProfile::build(qp, d, &domain, self.measure.resolution)
                .map_err(|e| ConfigError::one("measure.datum", e))?,
            (_, Some(ps)) => {
                let pieces =
                    ps.iter().map(|p| Piece { disc: Disc::new(qp, &p.center, p.radius_exp), density: p.density.clone() }).collect();
                MeasureProfile::explicit(qp, &domain, pieces).map_err(|e| ConfigError::one("measure.pieces", e))?
            }
            (None, None) => unreachable!("checked above"),
        };
        let n_states = crate::wavelets::StateSpace::new(&profile, self.run.level).len();
        if self.run.start_state >= n_states {
            return Err(ConfigError::one("run.start_state", format!("{} exceeds {n_states} states", self.run.start_state)));
        }
        let operator = OperatorConfig::new(
            group.clone(),
            profile.clone(),
            self.measure.datum.clone(),
            self.operator.alpha.clone(),
            self.operator.alpha_g.clone(),
            self.operator.mode,
            self.operator.cutoff,
            self.operator.max_words,
        )
        .map_err(|e| ConfigError::one("operator", e))?;
        Ok(Prepared { config: self.clone(), hash: self.hash(), group, profile, operator })
    }
}
