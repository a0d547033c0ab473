//! Command dispatch behind the `mumford-heat` binary.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{ConfigError, InitialSpec, Prepared, RunConfig};
use crate::exact::{fmt_rat, rat_to_f64};
use crate::heat::{
    empirical_validation, resolvent_solve, sample_paths, solve_cauchy, stationary_distribution, EigenLine, HeatError,
    HeatKernel, Provenance, StationaryReport,
};
use crate::operator::{
    audit_identities, generator_matrix, lambda_transform, spectrum, AuditOptions, Cutoff, GeneratorMatrix, Mode,
    OperatorError,
};
use crate::padic::Disc;
use crate::report::{write_csv, write_json, Meta};
use crate::schottky::DomainReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Validate,
    Spectrum,
    Evolve,
    Sample,
    Audit,
    Resolvent,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Validate => "validate",
            Self::Spectrum => "spectrum",
            Self::Evolve => "evolve",
            Self::Sample => "sample",
            Self::Audit => "audit",
            Self::Resolvent => "resolvent",
        })
    }
}

/// Command-line values that replace the corresponding config fields.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub level: Option<u32>,
    pub times: Option<Vec<f64>>,
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub cutoff_len: Option<usize>,
    pub cutoff_tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub eta: Option<f64>,
    pub start: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, mut c: RunConfig) -> RunConfig {
        if let Some(v) = self.level {
            c.run.level = v;
        }
        if let Some(v) = &self.times {
            c.run.times = v.clone();
        }
        if let Some(v) = self.paths {
            c.run.paths = v;
        }
        if let Some(v) = self.seed {
            c.run.seed = v;
        }
        if let Some(v) = self.mode {
            c.operator.mode = v;
        }
        if let Some(v) = self.cutoff_len {
            c.operator.cutoff = Cutoff::Length(v);
        }
        if let Some(v) = self.cutoff_tol {
            c.operator.cutoff = Cutoff::Tolerance(v);
        }
        if let Some(v) = &self.out {
            c.run.output_dir = v.clone();
        }
        if let Some(v) = self.eta {
            c.run.eta = v;
        }
        if let Some(v) = self.start {
            c.run.start_state = v;
        }
        c
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("numerical breakdown: {0}")]
    Numerical(String),
    #[error("{0}")]
    Other(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(ConfigError::Io { .. }) => 1,
            Self::Config(_) | Self::Input(_) => 2,
            Self::Numerical(_) => 3,
            Self::Other(_) => 1,
        }
    }
}

impl From<HeatError> for RunError {
    fn from(e: HeatError) -> Self {
        match e {
            HeatError::BadInput(s) => Self::Input(s),
            HeatError::Reducible { .. } => Self::Input(e.to_string()),
            HeatError::NumericalBreakdown { .. } | HeatError::SingularSystem => Self::Numerical(e.to_string()),
        }
    }
}

impl From<OperatorError> for RunError {
    fn from(e: OperatorError) -> Self {
        match e {
            OperatorError::GrowthCondition { .. } | OperatorError::NonPositive(_) => Self::Input(e.to_string()),
            _ => Self::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        Self::Other(e.to_string())
    }
}

struct Ctx {
    prep: Prepared,
    meta: Meta,
    out: PathBuf,
    written: Vec<PathBuf>,
}

impl Ctx {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.out.join(name);
        self.written.push(p.clone());
        p
    }

    fn level(&self) -> u32 {
        self.prep.config.run.level
    }
}

/// Runs `cmd` and returns the files it wrote.
pub fn run_command(cmd: Command, config: RunConfig, overrides: &Overrides) -> Result<Vec<PathBuf>, RunError> {
    let config = overrides.apply(config);
    let prep = config.prepare()?;
    let out = prep.config.run.output_dir.clone();
    std::fs::create_dir_all(&out)?;
    let op = &prep.operator;
    let meta = Meta {
        tool: "mumford-heat",
        version: env!("CARGO_PKG_VERSION"),
        command: cmd.to_string(),
        config_hash: prep.hash.clone(),
        mode: op.mode().to_string(),
        level: prep.config.run.level,
        cutoff_len: op.cutoff_len(),
        tail_bound: op.tail_bound(1.0, op.cutoff_len()).value,
        seed: matches!(cmd, Command::Sample | Command::Audit).then_some(prep.config.run.seed),
    };
    let mut ctx = Ctx { prep, meta, out, written: Vec::new() };
    let cfg_path = ctx.path("config.json");
    std::fs::write(&cfg_path, ctx.prep.config.to_json() + "\n")?;
    match cmd {
        Command::Validate => validate(&mut ctx)?,
        Command::Spectrum => run_spectrum(&mut ctx)?,
        Command::Evolve => evolve(&mut ctx)?,
        Command::Sample => sample(&mut ctx)?,
        Command::Audit => audit(&mut ctx)?,
        Command::Resolvent => resolvent(&mut ctx)?,
    }
    Ok(ctx.written)
}

pub fn run_file(cmd: Command, path: &Path, overrides: &Overrides) -> Result<Vec<PathBuf>, RunError> {
    run_command(cmd, crate::config::parse_config(path)?, overrides)
}

#[derive(Serialize)]
struct ValidationSummary<'a> {
    p: u32,
    genus: usize,
    fundamental_domain: &'a DomainReport,
    fundamental_domain_haar: String,
    total_mass: String,
    n_pieces: usize,
    n_zero_cores: usize,
    n_states: usize,
    growth_condition: bool,
    group_elements_summed: usize,
}

fn validate(ctx: &mut Ctx) -> Result<(), RunError> {
    let p = &ctx.prep;
    let report = p
        .group
        .verify_fundamental_domain(p.config.group.verify_depth)
        .map_err(|e| RunError::Input(e.to_string()))?;
    let summary = ValidationSummary {
        p: p.group.qp().p(),
        genus: p.group.genus(),
        fundamental_domain: &report,
        fundamental_domain_haar: fmt_rat(p.operator.domain().haar()),
        total_mass: fmt_rat(p.profile.total_mass()),
        n_pieces: p.profile.pieces().len(),
        n_zero_cores: p.profile.zero_cores().len(),
        n_states: crate::wavelets::StateSpace::new(&p.profile, p.config.run.level).len(),
        growth_condition: true,
        group_elements_summed: p.operator.n_elements(),
    };
    let path = ctx.path("validation.json");
    write_json(&path, &ctx.meta, &summary)?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumReport<'a> {
    spectrum: &'a crate::operator::Spectrum,
    generator_eigenvalues: Vec<EigenLine>,
}

fn run_spectrum(ctx: &mut Ctx) -> Result<(), RunError> {
    let op = &ctx.prep.operator;
    let s = spectrum(op, ctx.level())?;
    let q = generator_matrix(op, ctx.level())?;
    let kernel = HeatKernel::new(&q);
    let rows: Vec<[String; 7]> = s
        .entries
        .iter()
        .map(|e| {
            let lp = e.lambda_series.as_rat().map_or_else(|| e.lambda_series.to_string(), |r| fmt_rat(&r));
            [
                e.radius_exp.to_string(),
                fmt_rat(&e.density),
                lp,
                format!("{:e}", e.lambda_exact_lo),
                format!("{:e}", e.lambda_exact_hi),
                e.multiplicity.to_string(),
                e.witnesses.len().to_string(),
            ]
        })
        .collect();
    let csv = ctx.path("spectrum.csv");
    write_csv(
        &csv,
        &ctx.meta,
        &["radius_exp", "density", "lambda_series", "lambda_exact_lo", "lambda_exact_hi", "multiplicity", "n_witness_discs"],
        rows,
    )?;
    let js = ctx.path("spectrum.json");
    write_json(&js, &ctx.meta, &SpectrumReport { spectrum: &s, generator_eigenvalues: kernel.eigen_lines() })?;
    Ok(())
}

/// Real initial data on the level-`m` states.
pub fn initial_vector(spec: &InitialSpec, q: &GeneratorMatrix) -> Result<Vec<f64>, RunError> {
    let n = q.len();
    match spec {
        InitialSpec::Indicator(i) if *i < n => {
            let mut v = vec![0.0; n];
            v[*i] = 1.0;
            Ok(v)
        }
        InitialSpec::Indicator(i) => Err(RunError::Input(format!("run.initial.indicator: {i} exceeds {n} states"))),
        InitialSpec::Values(v) if v.len() == n => Ok(v.clone()),
        InitialSpec::Values(v) => Err(RunError::Input(format!("run.initial.values: {} values for {n} states", v.len()))),
        InitialSpec::Wavelet { disc, child } => {
            let b = disc.to_disc(q.qp);
            let kids = b.children(q.qp);
            let inside = |d: &Disc| -> Vec<usize> {
                (0..n).filter(|&i| q.states[i].is_subset_of(q.qp, d) && q.states[i] != *d).collect()
            };
            let k = kids.get(*child).filter(|_| *child > 0).ok_or_else(|| {
                RunError::Input(format!("run.initial.wavelet.child: {child} must be in 1..{}", kids.len()))
            })?;
            let exact_child = |d: &Disc| (0..n).filter(|&i| q.states[i].is_subset_of(q.qp, d)).collect::<Vec<_>>();
            let (plus, minus) = (exact_child(k), exact_child(&kids[0]));
            if inside(&b).is_empty() || plus.is_empty() || minus.is_empty() {
                return Err(RunError::Input(format!("run.initial.wavelet.disc: {b} is not refined by the level-m states")));
            }
            let mut v = vec![0.0; n];
            plus.iter().for_each(|&i| v[i] = 1.0);
            minus.iter().for_each(|&i| v[i] = -1.0);
            Ok(v)
        }
    }
}

#[derive(Serialize)]
struct TimeRow {
    t: f64,
    provenance: Provenance,
    error_estimate: f64,
    sup_norm: f64,
}

#[derive(Serialize)]
struct EvolveReport {
    basis_residual: Option<f64>,
    dense_cross_check: Option<f64>,
    eigenvalues: Vec<EigenLine>,
    spectral_gap: f64,
    stationary: StationaryReport,
    times: Vec<TimeRow>,
}

fn evolve(ctx: &mut Ctx) -> Result<(), RunError> {
    let q = generator_matrix(&ctx.prep.operator, ctx.level())?;
    let kernel = HeatKernel::new(&q);
    let h0 = initial_vector(&ctx.prep.config.run.initial, &q)?;
    let times = ctx.prep.config.run.times.clone();
    let sol = solve_cauchy(&kernel, &h0, &times)?;
    let mass: Vec<f64> = q.weights.iter().map(rat_to_f64).collect();
    let norms = sol.sup_norms();
    let rows = times
        .iter()
        .zip(&norms)
        .map(|(&t, &s)| {
            let p = kernel.transition(t)?;
            Ok(TimeRow { t, provenance: p.provenance, error_estimate: p.error_estimate, sup_norm: s })
        })
        .collect::<Result<Vec<_>, HeatError>>()?;
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let report = EvolveReport {
        basis_residual: kernel.basis.as_ref().map(|b| b.residual),
        dense_cross_check: kernel.cross_check(t_max.max(1.0)),
        eigenvalues: kernel.eigen_lines(),
        spectral_gap: kernel.spectral_gap(),
        stationary: stationary_distribution(&kernel, &mass)?,
        times: rows,
    };
    let csv = ctx.path("solution.csv");
    let data = sol
        .times
        .iter()
        .zip(&sol.values)
        .flat_map(|(t, v)| v.iter().enumerate().map(move |(i, x)| [t.to_string(), i.to_string(), x.to_string()]));
    write_csv(&csv, &ctx.meta, &["t", "state_index", "value"], data)?;
    let js = ctx.path("evolve.json");
    write_json(&js, &ctx.meta, &report)?;
    Ok(())
}

fn sample(ctx: &mut Ctx) -> Result<(), RunError> {
    let q = generator_matrix(&ctx.prep.operator, ctx.level())?;
    let kernel = HeatKernel::new(&q);
    let run = &ctx.prep.config.run;
    let t_max = run.times.iter().copied().fold(0.0, f64::max);
    let paths = sample_paths(&kernel.q, run.start_state, run.paths, t_max, run.seed)?;
    let checkpoints: Vec<f64> = run.times.iter().copied().filter(|t| *t > 0.0).collect();
    let expected = checkpoints
        .iter()
        .map(|&t| Ok(kernel.transition(t)?.row(run.start_state)))
        .collect::<Result<Vec<_>, HeatError>>()?;
    let report = empirical_validation(&paths, &checkpoints, &expected, 4.0);
    let csv = ctx.path("paths.csv");
    let states = &q.states;
    let rows = paths.iter().flat_map(|p| {
        p.jump_times.iter().zip(&p.states).map(move |(t, &s)| {
            [p.path_id.to_string(), t.to_string(), s.to_string(), fmt_rat(states[s].center()), states[s].radius_exp().to_string()]
        })
    });
    write_csv(&csv, &ctx.meta, &["path_id", "jump_time", "state_index", "state_center", "state_radius_exp"], rows)?;
    let js = ctx.path("sample.json");
    write_json(&js, &ctx.meta, &report)?;
    Ok(())
}

#[derive(Serialize)]
struct TransformRow {
    generator: usize,
    disc: Disc,
    transport: crate::operator::LambdaTransform,
    ambient: Option<crate::operator::LambdaTransform>,
}

#[derive(Serialize)]
struct FullAudit {
    #[serde(flatten)]
    audit: crate::operator::AuditReport,
    domain_translation: Vec<TransformRow>,
}

fn audit(ctx: &mut Ctx) -> Result<(), RunError> {
    let op = &ctx.prep.operator;
    let run = &ctx.prep.config.run;
    let opts = AuditOptions { random_instances: run.audit_instances, seed: run.seed, level: run.level, ..Default::default() };
    let report = audit_identities(op, &opts)?;
    let mut rows = Vec::new();
    if let Some(b) = crate::wavelets::admissible_supports(op.profile(), run.level).first() {
        for (i, g) in op.group().generators().iter().enumerate() {
            let transport = lambda_transform(&op.with_mode(Mode::Transport), g, b)?;
            let ambient = op.datum().and_then(|_| lambda_transform(&op.with_mode(Mode::Ambient), g, b).ok());
            rows.push(TransformRow { generator: i + 1, disc: b.clone(), transport, ambient });
        }
    }
    let js = ctx.path("audit.json");
    write_json(&js, &ctx.meta, &FullAudit { audit: report, domain_translation: rows })?;
    Ok(())
}

fn resolvent(ctx: &mut Ctx) -> Result<(), RunError> {
    let q = generator_matrix(&ctx.prep.operator, ctx.level())?;
    let kernel = HeatKernel::new(&q);
    let h = initial_vector(&ctx.prep.config.run.initial, &q)?;
    let u = resolvent_solve(&kernel, ctx.prep.config.run.eta, &h)?;
    let csv = ctx.path("resolvent.csv");
    let rows = h.iter().zip(&u).enumerate().map(|(i, (a, b))| [i.to_string(), a.to_string(), b.to_string()]);
    write_csv(&csv, &ctx.meta, &["state_index", "h", "u"], rows)?;
    Ok(())
}
