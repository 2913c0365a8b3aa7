//! Run configuration: strict JSON schema, defaults and load-time validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use seqfisher_core::diagnostics::wigner_required_extent;
use seqfisher_core::models::spec::{LambdaName, ModelSpec, SchemeSpec};

use crate::CliError;

/// Largest sequence length accepted from a configuration file.
pub const MAX_N_SEQ: usize = 1_000_000;
/// Largest trajectory count accepted from a configuration file.
pub const MAX_TRAJECTORIES: usize = 100_000_000;
pub const MAX_GRID_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    FisherMc,
    FisherExact,
    MemoryLoss,
    RankCollapse,
    Gain,
    TimeBudget,
    JcFilter,
    Wigner,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::FisherMc,
        ExperimentKind::FisherExact,
        ExperimentKind::MemoryLoss,
        ExperimentKind::RankCollapse,
        ExperimentKind::Gain,
        ExperimentKind::TimeBudget,
        ExperimentKind::JcFilter,
        ExperimentKind::Wigner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FisherMc => "fisher_mc",
            ExperimentKind::FisherExact => "fisher_exact",
            ExperimentKind::MemoryLoss => "memory_loss",
            ExperimentKind::RankCollapse => "rank_collapse",
            ExperimentKind::Gain => "gain",
            ExperimentKind::TimeBudget => "time_budget",
            ExperimentKind::JcFilter => "jc_filter",
            ExperimentKind::Wigner => "wigner",
        }
    }

    fn uses_mc_fisher(self) -> bool {
        matches!(self, ExperimentKind::FisherMc | ExperimentKind::Gain | ExperimentKind::TimeBudget)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

fn default_h() -> f64 {
    1e-4
}
fn default_trajectories() -> usize {
    10_000
}
fn default_threshold() -> f64 {
    0.90
}
fn default_n_ref() -> usize {
    600
}
fn default_eps_prune() -> f64 {
    1e-12
}
fn default_branch_cap() -> usize {
    2_000_000
}
fn default_grid_points() -> usize {
    101
}

/// One experiment run, as read from a JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// May be left out when the command line names the experiment.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentKind>,
    pub model: ModelSpec,
    #[serde(default)]
    pub scheme: SchemeSpec,
    /// Parameter value at which the Fisher information is evaluated; defaults
    /// to the model's nominal value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "default_h")]
    pub h: f64,
    pub n_seq: usize,
    #[serde(default = "default_trajectories")]
    pub mu_max: usize,
    #[serde(default = "default_trajectories")]
    pub n_traj: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Worker-count hint. Results do not depend on it, so it is left out of
    /// the echoed configuration.
    #[serde(default, skip_serializing)]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_n_ref")]
    pub n_ref: usize,
    #[serde(default = "default_eps_prune")]
    pub eps_prune: f64,
    #[serde(default = "default_branch_cap")]
    pub branch_cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default)]
    pub t_reset: f64,
    /// Defaults to `10 τ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_meas: Option<f64>,
    /// Extra field-filtering checkpoints beyond the geometric schedule.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checkpoints: Vec<usize>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Half-width of the Wigner grid; defaults to the smallest admissible one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_extent: Option<f64>,
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("invalid `{field}`: {reason}"))
}

impl RunConfig {
    pub fn kind(&self) -> Result<ExperimentKind, CliError> {
        self.experiment
            .ok_or_else(|| invalid("experiment", "not given in the file or on the command line"))
    }

    /// Free-evolution time between measurements (1 for a bare random unitary).
    pub fn tau(&self) -> f64 {
        match &self.model {
            ModelSpec::Heisenberg { tau, .. }
            | ModelSpec::Ising { tau, .. }
            | ModelSpec::JaynesCummings { tau, .. }
            | ModelSpec::LindbladChain { tau, .. } => *tau,
            ModelSpec::RandomUnitary { .. } => 1.0,
        }
    }

    pub fn resolved_t_meas(&self) -> f64 {
        self.t_meas.unwrap_or(10.0 * self.tau())
    }

    /// Nominal value of the estimated parameter.
    pub fn nominal_lambda(&self) -> Option<f64> {
        let name = self.model.lambda_name()?;
        Some(match (&self.model, name) {
            (ModelSpec::Heisenberg { b, .. } | ModelSpec::Ising { b, .. } | ModelSpec::LindbladChain { b, .. }, LambdaName::B) => *b,
            (ModelSpec::Heisenberg { j, .. } | ModelSpec::Ising { j, .. } | ModelSpec::LindbladChain { j, .. }, LambdaName::J) => *j,
            (ModelSpec::JaynesCummings { coupling, .. }, LambdaName::Coupling) => *coupling,
            (ModelSpec::JaynesCummings { omega, .. }, LambdaName::Omega) => *omega,
            (ModelSpec::LindbladChain { kappa, .. }, LambdaName::Kappa) => *kappa,
            (ModelSpec::LindbladChain { n_th, .. }, LambdaName::NTh) => *n_th,
            _ => return None,
        })
    }

    pub fn resolved_lambda(&self) -> Option<f64> {
        self.lambda.or_else(|| self.nominal_lambda())
    }

    /// Grid half-width used by the Wigner experiment.
    pub fn resolved_grid_extent(&self) -> f64 {
        self.grid_extent
            .unwrap_or_else(|| wigner_required_extent(self.model.resolved_n_max().unwrap_or(0)))
    }

    /// Checks every field against the preconditions of the operation the
    /// experiment dispatches to.
    pub fn validate(&self) -> Result<(), CliError> {
        let kind = self.kind()?;
        self.model.validate().map_err(|e| CliError::Config(format!("model: {e}")))?;
        self.scheme
            .validate(&self.model)
            .map_err(|e| CliError::Config(format!("scheme: {e}")))?;
        if self.n_seq == 0 || self.n_seq > MAX_N_SEQ {
            return Err(invalid("n_seq", format!("must lie in [1, {MAX_N_SEQ}]")));
        }
        if let Some(0) = self.threads {
            return Err(invalid("threads", "must be at least 1"));
        }
        match kind {
            ExperimentKind::FisherMc | ExperimentKind::FisherExact | ExperimentKind::Gain | ExperimentKind::TimeBudget => {
                self.validate_fisher(kind)?
            }
            ExperimentKind::MemoryLoss | ExperimentKind::RankCollapse => {
                check_count("n_traj", self.n_traj)?;
                if kind == ExperimentKind::RankCollapse && matches!(self.model, ModelSpec::LindbladChain { .. }) {
                    return Err(invalid("model.family", "rank collapse needs a unitary model"));
                }
            }
            ExperimentKind::JcFilter | ExperimentKind::Wigner => {
                if !matches!(self.model, ModelSpec::JaynesCummings { .. }) {
                    return Err(invalid("model.family", "field filtering needs the jaynes_cummings model"));
                }
                if self.scheme != SchemeSpec::default() {
                    return Err(invalid("scheme", "field filtering always measures the atom in its energy basis"));
                }
                if kind == ExperimentKind::Wigner {
                    self.validate_grid()?;
                } else if let Some(&c) = self.checkpoints.iter().find(|&&c| c > self.n_seq) {
                    return Err(invalid("checkpoints", format!("checkpoint {c} exceeds n_seq = {}", self.n_seq)));
                }
            }
        }
        Ok(())
    }

    fn validate_fisher(&self, kind: ExperimentKind) -> Result<(), CliError> {
        let Some(name) = self.model.lambda_name() else {
            return Err(invalid("model.family", "a random unitary has no parameter to estimate"));
        };
        if !(self.h > 0.0 && self.h.is_finite() && self.h <= 0.1) {
            return Err(invalid("h", "must lie in (0, 0.1]"));
        }
        let lambda = self.resolved_lambda().expect("estimated parameter exists");
        if !lambda.is_finite() {
            return Err(invalid("lambda", "must be finite"));
        }
        if matches!(name, LambdaName::Kappa | LambdaName::NTh) && lambda - self.h < 0.0 {
            return Err(invalid("lambda", format!("{lambda} - h must stay non-negative for a rate or occupation")));
        }
        if matches!(name, LambdaName::J | LambdaName::Omega) && lambda - self.h <= 0.0 {
            return Err(invalid("lambda", format!("{lambda} - h must stay positive")));
        }
        if kind == ExperimentKind::FisherExact {
            if !(self.eps_prune >= 0.0 && self.eps_prune < 1.0) {
                return Err(invalid("eps_prune", "must lie in [0, 1)"));
            }
            if self.branch_cap == 0 {
                return Err(invalid("branch_cap", "must be at least 1"));
            }
        }
        if kind.uses_mc_fisher() {
            check_count("mu_max", self.mu_max)?;
        }
        if kind == ExperimentKind::Gain {
            if !(self.threshold > 0.0 && self.threshold <= 1.0) {
                return Err(invalid("threshold", "must lie in (0, 1]"));
            }
            if self.n_ref == 0 {
                return Err(invalid("n_ref", "must be at least 1"));
            }
            if self.n_seq < self.n_ref {
                return Err(invalid("n_seq", format!("gain analysis needs n_seq >= n_ref = {}", self.n_ref)));
            }
        }
        if kind == ExperimentKind::TimeBudget {
            let Some(total) = self.total_time else {
                return Err(invalid("total_time", "required for the time-budget experiment"));
            };
            if !(total > 0.0 && total.is_finite()) {
                return Err(invalid("total_time", "must be positive"));
            }
            if !(self.t_reset >= 0.0 && self.t_reset.is_finite()) {
                return Err(invalid("t_reset", "must be non-negative"));
            }
            let t_meas = self.resolved_t_meas();
            if !(t_meas >= 0.0 && t_meas.is_finite()) {
                return Err(invalid("t_meas", "must be non-negative"));
            }
            if total < self.t_reset + t_meas + self.tau() {
                return Err(invalid("total_time", "does not fit a single one-measurement trajectory"));
            }
        }
        Ok(())
    }

    fn validate_grid(&self) -> Result<(), CliError> {
        if !(2..=MAX_GRID_POINTS).contains(&self.grid_points) {
            return Err(invalid("grid_points", format!("must lie in [2, {MAX_GRID_POINTS}]")));
        }
        let need = wigner_required_extent(self.model.resolved_n_max().unwrap_or(0));
        let extent = self.resolved_grid_extent();
        if !(extent.is_finite() && extent >= need) {
            return Err(invalid("grid_extent", format!("must be at least {need:.6} for this cutoff")));
        }
        Ok(())
    }

    /// Canonical JSON text of the configuration (defaults filled in).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serializes")
    }
}

fn check_count(field: &str, n: usize) -> Result<(), CliError> {
    if n == 0 || n > MAX_TRAJECTORIES {
        return Err(invalid(field, format!("must lie in [1, {MAX_TRAJECTORIES}]")));
    }
    Ok(())
}

/// Parses configuration text. `kind` (from the command line) fills in or
/// must agree with the file's `experiment`.
pub fn parse_config(text: &str, kind: Option<ExperimentKind>) -> Result<RunConfig, CliError> {
    let mut config: RunConfig = serde_json::from_str(text).map_err(|e| {
        CliError::Config(format!("parse error: {e}"))
    })?;
    match (config.experiment, kind) {
        (Some(a), Some(b)) if a != b => {
            return Err(invalid(
                "experiment",
                format!("file names `{}` but the command asks for `{}`", a.name(), b.name()),
            ))
        }
        (None, Some(b)) => config.experiment = Some(b),
        _ => {}
    }
    config.validate()?;
    Ok(config)
}

pub fn load_config(path: &Path, kind: Option<ExperimentKind>) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, kind)
}
