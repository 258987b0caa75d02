//! Experiment configuration documents (JSON, schema version 1).

use std::path::PathBuf;

use ermstab::perturbations::{PerturbationSequence, ProbeConfig, QuadraticDelta};
use ermstab::sampling::derive_seed;
use ermstab::solvers::DecayRule;
use ermstab::{
    ConstraintSet, ConvexProblem, Matrix, QuadraticLoss, Regularizer, SelectionRule, SolutionSet, Vector,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Dense matrix, row-major, with declared dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &Matrix<f64>) -> Self {
        MatrixDoc {
            rows: m.rows(),
            cols: m.cols(),
            data: m.data().to_vec(),
        }
    }

    fn build(&self, field: &str) -> Result<Matrix<f64>, CliError> {
        Matrix::new(self.rows, self.cols, self.data.clone()).map_err(|e| CliError::field(field, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizerDoc {
    pub strength: f64,
    pub modulus: f64,
    /// `Q`; defaults to `αI`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixDoc>,
}

/// `½ fᵀAf − bᵀf + c` with an optional constraint and regularizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub dimension: usize,
    pub hessian: MatrixDoc,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
    #[serde(default = "no_constraint")]
    pub constraint: ConstraintSet<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularizer: Option<RegularizerDoc>,
}

fn no_constraint() -> ConstraintSet<f64> {
    ConstraintSet::None
}

impl ProblemDoc {
    pub fn build(&self, field: &str) -> Result<ConvexProblem<f64>, CliError> {
        let d = self.dimension;
        if d == 0 {
            return Err(CliError::field(format!("{field}.dimension"), "must be positive"));
        }
        let a = self.hessian.build(&format!("{field}.hessian"))?;
        if a.rows() != d || a.cols() != d {
            return Err(CliError::field(
                format!("{field}.hessian"),
                format!("expected {d}x{d}, found {}x{}", a.rows(), a.cols()),
            ));
        }
        if self.linear.len() != d {
            return Err(CliError::field(
                format!("{field}.linear"),
                format!("expected length {d}, found {}", self.linear.len()),
            ));
        }
        let loss = QuadraticLoss::new(a, Vector(self.linear.clone()), self.offset)
            .map_err(|e| CliError::field(format!("{field}.hessian"), e))?;
        let constraint = self.constraint.clone();
        constraint
            .validate(d)
            .map_err(|e| CliError::field(format!("{field}.constraint"), e))?;
        let mut p = ConvexProblem::quadratic(loss)
            .with_constraint(constraint)
            .map_err(|e| CliError::field(format!("{field}.constraint"), e))?;
        if let Some(r) = &self.regularizer {
            let rf = format!("{field}.regularizer");
            let reg = match &r.matrix {
                None => Regularizer::tikhonov(d, r.strength, r.modulus),
                Some(m) => Regularizer::new(r.strength, r.modulus, m.build(&format!("{rf}.matrix"))?),
            }
            .map_err(|e| CliError::field(&rf, e))?;
            p = p.with_regularizer(reg).map_err(|e| CliError::field(&rf, e))?;
        }
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaDoc {
    pub hessian: MatrixDoc,
    pub linear: Vec<f64>,
    #[serde(default)]
    pub offset: f64,
}

/// How the members `L_{D_n}` are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `L_{D_n} = L_D`.
    Constant,
    /// `½(ε_n x − 1)²` on `constraint`, limit `≡ ½`.
    Blowup {
        schedule: DecayRule,
        #[serde(default = "no_constraint")]
        constraint: ConstraintSet<f64>,
    },
    /// `L_D + s_n·δ`.
    Additive { delta: DeltaDoc, schedule: DecayRule },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RuleSpec {
    MinNorm,
    RandomInBall,
    /// Farthest point from `C_D` inside the selection ball.
    Adversarial,
}

impl RuleSpec {
    pub fn resolve(self, seed: u64, limit_set: &SolutionSet<f64>) -> SelectionRule<f64> {
        match self {
            RuleSpec::MinNorm => SelectionRule::MinNorm,
            RuleSpec::RandomInBall => SelectionRule::RandomInBall {
                seed: derive_seed(seed, 1),
            },
            RuleSpec::Adversarial => SelectionRule::AdversarialFarFrom {
                target: limit_set.clone(),
                seed: derive_seed(seed, 2),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSettings {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_probe_tol")]
    pub tol: f64,
    #[serde(default = "default_sample_radius")]
    pub sample_radius: f64,
    /// Fixed targets probed in addition to the random ones.
    #[serde(default)]
    pub targets: Vec<Vec<f64>>,
}

fn default_trials() -> usize {
    16
}
fn default_horizon() -> usize {
    200
}
fn default_probe_tol() -> f64 {
    1e-7
}
fn default_sample_radius() -> f64 {
    2.0
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            trials: default_trials(),
            horizon: default_horizon(),
            tol: default_probe_tol(),
            sample_radius: default_sample_radius(),
            targets: Vec::new(),
        }
    }
}

/// Randomized instances for `verify qg`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteSettings {
    #[serde(default = "default_max_dimension")]
    pub max_dimension: usize,
    #[serde(default = "default_suite_radius")]
    pub radius: f64,
}

fn default_max_dimension() -> usize {
    10
}
fn default_suite_radius() -> f64 {
    5.0
}

impl Default for SuiteSettings {
    fn default() -> Self {
        SuiteSettings {
            max_dimension: default_max_dimension(),
            radius: default_suite_radius(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// Limit problem `L_D`; required unless the family supplies its own limit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<ProblemDoc>,
    pub family: FamilySpec,
    /// Replaces the family's limit (to test a claimed limit).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_limit: Option<ProblemDoc>,
    pub radius: f64,
    pub n_max: usize,
    #[serde(default)]
    pub probe: ProbeSettings,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_tol")]
    pub continuity_tol: f64,
    #[serde(default = "default_rules")]
    pub rules: Vec<RuleSpec>,
    #[serde(default)]
    pub quadratic_growth: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub suite: SuiteSettings,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_rules() -> Vec<RuleSpec> {
    vec![RuleSpec::MinNorm, RuleSpec::RandomInBall, RuleSpec::Adversarial]
}

fn positive(field: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::field(
            field,
            format!("must be positive and finite, got {x}"),
        ))
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| CliError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.check_scalars()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn check_scalars(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::field(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        positive("radius", self.radius)?;
        positive("tol", self.tol)?;
        positive("continuity_tol", self.continuity_tol)?;
        positive("probe.tol", self.probe.tol)?;
        positive("probe.sample_radius", self.probe.sample_radius)?;
        positive("suite.radius", self.suite.radius)?;
        if self.n_max == 0 {
            return Err(CliError::field("n_max", "must be at least 1"));
        }
        if self.probe.horizon == 0 {
            return Err(CliError::field("probe.horizon", "must be at least 1"));
        }
        if self.suite.max_dimension == 0 {
            return Err(CliError::field("suite.max_dimension", "must be at least 1"));
        }
        if self.rules.is_empty() {
            return Err(CliError::field(
                "rules",
                "at least one selection rule is required",
            ));
        }
        Ok(())
    }

    /// Builds the perturbation sequence, validating every nested field.
    pub fn sequence(&self) -> Result<PerturbationSequence<f64>, CliError> {
        let base = |what: &str| -> Result<ConvexProblem<f64>, CliError> {
            self.problem
                .as_ref()
                .ok_or_else(|| CliError::field("problem", format!("required by the {what} family")))?
                .build("problem")
        };
        let seq = match &self.family {
            FamilySpec::Constant => PerturbationSequence::constant(base("constant")?),
            FamilySpec::Blowup { schedule, constraint } => {
                constraint
                    .validate(1)
                    .map_err(|e| CliError::field("family.constraint", e))?;
                PerturbationSequence::blowup(schedule.clone(), constraint.clone())
                    .map_err(|e| CliError::field("family", e))?
            }
            FamilySpec::Additive { delta, schedule } => {
                let p = base("additive")?;
                let d = p.dimension();
                let e = delta.hessian.build("family.delta.hessian")?;
                if e.rows() != d || e.cols() != d || delta.linear.len() != d {
                    return Err(CliError::field(
                        "family.delta",
                        format!("dimensions must match d = {d}"),
                    ));
                }
                let delta = QuadraticDelta::new(e, Vector(delta.linear.clone()), delta.offset)
                    .map_err(|e| CliError::field("family.delta", e))?;
                PerturbationSequence::additive(p, delta, schedule.clone())
                    .map_err(|e| CliError::field("family", e))?
            }
        };
        match &self.claimed_limit {
            None => Ok(seq),
            Some(doc) => seq
                .with_claimed_limit(doc.build("claimed_limit")?)
                .map_err(|e| CliError::field("claimed_limit", e)),
        }
    }

    pub fn probe_config(&self) -> ProbeConfig<f64> {
        ProbeConfig::new(self.probe.trials, self.probe.horizon, self.probe.tol)
            .with_seed(derive_seed(self.seed, 3))
            .with_sample_radius(self.probe.sample_radius)
            .with_targets(self.probe.targets.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONSTANT: &str = r#"{
        "schema_version": 1,
        "problem": {"dimension": 2, "hessian": {"rows": 2, "cols": 2, "data": [1, 0, 0, 1]},
                    "linear": [1, 0], "offset": 0.5},
        "family": {"type": "constant"},
        "radius": 5, "n_max": 20
    }"#;

    #[test]
    fn round_trips_losslessly() {
        let cfg = ExperimentConfig::parse(CONSTANT).unwrap();
        let again = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.to_text(), again.to_text());
        assert_eq!(cfg.rules.len(), 3);
    }

    #[test]
    fn reports_fields_and_positions() {
        let bad = CONSTANT.replace("\"radius\": 5", "\"radius\": -1");
        match ExperimentConfig::parse(&bad) {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "radius"),
            other => panic!("{other:?}"),
        }
        match ExperimentConfig::parse("{\n  \"schema_version\": 1,\n  oops\n}") {
            Err(CliError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let asym = CONSTANT.replace("[1, 0, 0, 1]", "[1, 1, 0, 1]");
        let cfg = ExperimentConfig::parse(&asym).unwrap();
        match cfg.sequence() {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "problem.hessian"),
            other => panic!("{other:?}"),
        }
    }
}
