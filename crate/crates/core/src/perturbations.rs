//! Perturbation sequences `L_{D_n} → L_D` and sampled diagnostics on them:
//! uniform gaps on balls, Mosco probes, local boundedness of minimizers and
//! equi-coercivity of sublevel sets.
//!
//! In R^d weak and norm convergence coincide, so every probe works with
//! norm-convergent sequences. Probes test necessary conditions over finitely
//! many sequences and indices; a PASS is evidence, not a proof.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add, axpy, dot, norm, sub, sym_eigen, Matrix, SymEigen, Vector};
use crate::problems::{flat_half, make_blowup_family, ConstraintSet, ConvexProblem, Loss, QuadraticLoss};
use crate::sampling;
use crate::scalar::Scalar;
use crate::serde_ext::{ext_real, ext_real_vec};
use crate::solution_sets::{null_threshold, select, solve_exact, SelectionRule, SolutionSet, SolutionShape};
use crate::solvers::{projected_gradient, DecayRule};
use crate::trust_region::{negated, solve_trust_region};

pub type Generator<T> = Arc<dyn Fn(usize) -> Result<ConvexProblem<T>> + Send + Sync>;

/// A limit problem `L_D` together with members `n ↦ L_{D_n}`, `n ≥ 1`.
#[derive(Clone)]
pub struct PerturbationSequence<T> {
    limit: ConvexProblem<T>,
    generator: Generator<T>,
    description: String,
    max_index: Option<usize>,
}

impl<T> fmt::Debug for PerturbationSequence<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PerturbationSequence")
            .field("description", &self.description)
            .field("max_index", &self.max_index)
            .finish_non_exhaustive()
    }
}

fn same_kind<T>(a: &ConstraintSet<T>, b: &ConstraintSet<T>) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b)
}

impl<T: Scalar> PerturbationSequence<T> {
    /// The generator must be deterministic in `n` and safe to call concurrently.
    pub fn new(
        limit: ConvexProblem<T>,
        description: impl Into<String>,
        generator: impl Fn(usize) -> Result<ConvexProblem<T>> + Send + Sync + 'static,
    ) -> Self {
        PerturbationSequence {
            limit,
            generator: Arc::new(generator),
            description: description.into(),
            max_index: None,
        }
    }

    /// Restricts the sequence to `1..=max_index`.
    pub fn with_max_index(mut self, max_index: usize) -> Self {
        self.max_index = Some(max_index);
        self
    }

    /// Replaces the limit, e.g. to test a claimed (possibly wrong) limit.
    pub fn with_claimed_limit(mut self, limit: ConvexProblem<T>) -> Result<Self> {
        if limit.dimension() != self.limit.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.limit.dimension(),
                found: limit.dimension(),
            });
        }
        self.limit = limit;
        self.description = format!("{} (claimed limit)", self.description);
        Ok(self)
    }

    pub fn limit(&self) -> &ConvexProblem<T> {
        &self.limit
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn max_index(&self) -> Option<usize> {
        self.max_index
    }

    pub fn dimension(&self) -> usize {
        self.limit.dimension()
    }

    /// Largest usable index not above `n`.
    pub fn clamp_index(&self, n: usize) -> usize {
        self.max_index.map_or(n, |m| n.min(m))
    }

    /// `L_{D_n}`.
    pub fn member(&self, n: usize) -> Result<ConvexProblem<T>> {
        if n == 0 {
            return Err(Error::InvalidParameter("sequence indices start at 1".into()));
        }
        if self.max_index.is_some_and(|m| n > m) {
            return Err(Error::InvalidParameter(format!(
                "index {n} is past the end of the sequence"
            )));
        }
        let p = (self.generator)(n).map_err(Error::at(n))?;
        if p.dimension() != self.dimension() {
            return Err(Error::at(n)(Error::DimensionMismatch {
                expected: self.dimension(),
                found: p.dimension(),
            }));
        }
        if !same_kind(p.constraint(), self.limit.constraint()) {
            return Err(Error::at(n)(Error::InvalidParameter(
                "member and limit have different constraint kinds".into(),
            )));
        }
        Ok(p)
    }

    /// `L_{D_n} = L_D` for all `n`.
    pub fn constant(problem: ConvexProblem<T>) -> Self {
        let member = problem.clone();
        Self::new(problem, "constant", move |_| Ok(member.clone()))
    }

    /// `L_{ε_n}(x) = ½(ε_n x − 1)²` on `constraint`, with the pointwise limit
    /// `L_0 ≡ ½` on the same constraint set.
    pub fn blowup(rule: DecayRule, constraint: ConstraintSet<T>) -> Result<Self> {
        rule.validate()?;
        let limit = flat_half(1).with_constraint(constraint.clone())?;
        let max_index = rule.max_index();
        let description = format!("blow-up family ½(ε_n x − 1)², ε_n by {rule:?}");
        let seq = Self::new(limit, description, move |n| {
            make_blowup_family(rule.at::<T>(n))?.with_constraint(constraint.clone())
        });
        Ok(match max_index {
            Some(m) => seq.with_max_index(m),
            None => seq,
        })
    }

    /// `L_{D_n} = L_D + s_n δ` for a quadratic base problem.
    pub fn additive(base: ConvexProblem<T>, delta: QuadraticDelta<T>, rule: DecayRule) -> Result<Self> {
        rule.validate()?;
        let Loss::Quadratic(q) = base.loss() else {
            return Err(Error::UnsupportedStructure(
                "additive perturbations need a quadratic base loss".into(),
            ));
        };
        if delta.dim() != base.dimension() {
            return Err(Error::DimensionMismatch {
                expected: base.dimension(),
                found: delta.dim(),
            });
        }
        let q = q.clone();
        let max_index = rule.max_index();
        let description = format!("additive perturbation L_D + s_n·δ, s_n by {rule:?}");
        let template = base.clone();
        let seq = Self::new(base, description, move |n| {
            let s = rule.at::<T>(n);
            let loss = QuadraticLoss::new(
                q.hessian().add_scaled(s, &delta.hessian),
                Vector(axpy(q.linear(), s, &delta.linear)),
                q.offset() + s * delta.offset,
            )?;
            ConvexProblem::new(
                template.dimension(),
                Loss::Quadratic(loss),
                template.constraint().clone(),
                template.regularizer().cloned(),
            )
        });
        Ok(match max_index {
            Some(m) => seq.with_max_index(m),
            None => seq,
        })
    }
}

/// Symmetric, not necessarily convex, quadratic `Δ(f) = ½fᵀEf − e·f + c₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct QuadraticDelta<T> {
    pub hessian: Matrix<T>,
    pub linear: Vector<T>,
    pub offset: T,
}

impl<T: Scalar> QuadraticDelta<T> {
    pub fn new(hessian: Matrix<T>, linear: Vector<T>, offset: T) -> Result<Self> {
        if !hessian.is_square() || hessian.rows() != linear.len() {
            return Err(Error::DimensionMismatch {
                expected: hessian.rows(),
                found: linear.len(),
            });
        }
        if hessian.asymmetry() > T::tol(1e-12) * hessian.max_abs() {
            return Err(Error::NotSymmetric {
                asymmetry: hessian.asymmetry().to_f64_lossy(),
            });
        }
        Ok(QuadraticDelta {
            hessian,
            linear,
            offset,
        })
    }

    /// `a − b` for two quadratic losses.
    pub fn difference(a: &QuadraticLoss<T>, b: &QuadraticLoss<T>) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                found: b.dim(),
            });
        }
        Ok(QuadraticDelta {
            hessian: a.hessian().add_scaled(-T::one(), b.hessian()),
            linear: Vector(sub(a.linear(), b.linear())),
            offset: a.offset() - b.offset(),
        })
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn value(&self, f: &[T]) -> T {
        T::lit(0.5) * self.hessian.quad_form(f) - dot(&self.linear, f) + self.offset
    }

    pub fn scaled(&self, s: T) -> Self {
        QuadraticDelta {
            hessian: self.hessian.scaled(s),
            linear: Vector(self.linear.iter().map(|&x| x * s).collect()),
            offset: self.offset * s,
        }
    }

    /// `sup_{‖f‖ ≤ R} |Δ(f)|`, exactly, from two trust-region solves.
    pub fn ball_sup(&self, radius: T) -> Result<T> {
        if !(radius > T::zero()) {
            return Err(Error::RadiusNonpositive);
        }
        let eig = sym_eigen(&self.hessian);
        // min Δ = c₀ + min ½fᵀEf − e·f
        let min_delta = solve_trust_region(&eig, &neg(&self.linear), radius)?.value + self.offset;
        // max Δ = c₀ − min ½fᵀ(−E)f + e·f
        let max_delta = self.offset - solve_trust_region(&negated(&eig), &self.linear, radius)?.value;
        Ok(max_delta.max(-min_delta).max(T::zero()))
    }

    /// `sup |Δ|` over the interval `[lo, hi]` (one dimension).
    fn interval_sup(&self, lo: T, hi: T) -> T {
        let e = self.hessian.get(0, 0);
        let l = self.linear[0];
        let at = |x: T| (T::lit(0.5) * e * x * x - l * x + self.offset).abs();
        let mut best = at(lo).max(at(hi));
        if e != T::zero() {
            let x = l / e;
            if x > lo && x < hi {
                best = best.max(at(x));
            }
        }
        best
    }
}

fn neg<T: Scalar>(v: &[T]) -> Vec<T> {
    v.iter().map(|&x| -x).collect()
}

/// How a uniform gap was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMethod {
    /// Trust-region extremization of the difference quadratic; exact on the
    /// ball (and on `ball ∩ interval` in one dimension), an upper bound on
    /// `ball ∩ K` for other constraint sets.
    ExactTrustRegion,
    /// Maximum over quasi-random ball samples: a lower bound.
    GridOracle,
}

/// Default sample budget of the grid oracle.
pub const GRID_POINTS: usize = 1_000_000;

/// `ε(R) = sup_{‖f‖ ≤ R} |a(f) − b(f)|` for two problems on the same constraint set.
pub fn uniform_gap_between<T: Scalar>(
    a: &ConvexProblem<T>,
    b: &ConvexProblem<T>,
    radius: T,
    method: GapMethod,
) -> Result<T> {
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(Error::RadiusNonpositive);
    }
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            found: b.dimension(),
        });
    }
    if a.constraint() != b.constraint() {
        return Err(Error::UnsupportedStructure(
            "uniform gap needs both problems on the same constraint set".into(),
        ));
    }
    match method {
        GapMethod::ExactTrustRegion => {
            let (Some(qa), Some(qb)) = (a.effective_quadratic(), b.effective_quadratic()) else {
                return Err(Error::UnsupportedStructure(
                    "exact uniform gap needs quadratic losses".into(),
                ));
            };
            let delta = QuadraticDelta::difference(&qa, &qb)?;
            match a.constraint() {
                ConstraintSet::Box { lower, upper } if a.dimension() == 1 => {
                    let lo = lower[0].max(-radius);
                    let hi = upper[0].min(radius);
                    Ok(if lo > hi {
                        T::zero()
                    } else {
                        delta.interval_sup(lo, hi)
                    })
                }
                _ => delta.ball_sup(radius),
            }
        }
        GapMethod::GridOracle => grid_gap(a, b, radius, GRID_POINTS),
    }
}

/// Grid oracle with an explicit sample budget (`d ≤ 3`).
pub fn grid_gap<T: Scalar>(
    a: &ConvexProblem<T>,
    b: &ConvexProblem<T>,
    radius: T,
    points: usize,
) -> Result<T> {
    let d = a.dimension();
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedStructure(format!(
            "grid oracle supports d <= 3, got {d}"
        )));
    }
    let r = radius.to_f64_lossy();
    let boundary = points / 8;
    let interior = points - boundary;
    let gap_at = |x: Vec<f64>| -> Result<T> {
        let f: Vec<T> = x.into_iter().map(T::lit).collect();
        let (va, vb) = (a.evaluate(&f)?, b.evaluate(&f)?);
        Ok(if va.is_finite() && vb.is_finite() {
            (va - vb).abs()
        } else {
            T::zero()
        })
    };
    let max = |x: T, y: T| x.max(y);
    let inner = (0..interior as u64)
        .into_par_iter()
        .map(|i| gap_at(sampling::halton_ball_point(i, d, r, false)))
        .try_reduce(T::zero, |x, y| Ok(max(x, y)))?;
    let outer = (0..boundary as u64)
        .into_par_iter()
        .map(|i| gap_at(sampling::halton_ball_point(i, d, r, true)))
        .try_reduce(T::zero, |x, y| Ok(max(x, y)))?;
    let mut best = inner.max(outer);
    for i in 0..d {
        for s in [-r, r] {
            let mut x = vec![0.0; d];
            x[i] = s;
            best = best.max(gap_at(x)?);
        }
    }
    Ok(best)
}

/// `ε_n(R)` between member `n` and the limit. Uses the exact route for
/// quadratics and the grid oracle otherwise.
pub fn uniform_gap<T: Scalar>(seq: &PerturbationSequence<T>, n: usize, radius: T) -> Result<T> {
    let member = seq.member(n)?;
    let method = if member.is_quadratic() && seq.limit().is_quadratic() {
        GapMethod::ExactTrustRegion
    } else {
        GapMethod::GridOracle
    };
    uniform_gap_between(&member, seq.limit(), radius, method).map_err(Error::at(n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GapSeries<T> {
    #[serde(with = "ext_real")]
    pub radius: T,
    pub indices: Vec<usize>,
    #[serde(with = "ext_real_vec")]
    pub values: Vec<T>,
    pub method: GapMethod,
}

pub fn gap_series<T: Scalar>(
    seq: &PerturbationSequence<T>,
    indices: &[usize],
    radius: T,
    method: GapMethod,
) -> Result<GapSeries<T>> {
    let values = indices
        .par_iter()
        .map(|&n| {
            let member = seq.member(n)?;
            uniform_gap_between(&member, seq.limit(), radius, method).map_err(Error::at(n))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(GapSeries {
        radius,
        indices: indices.to_vec(),
        values,
        method,
    })
}

/// Default cap on the number of indices a diagnostic visits.
pub const MAX_INDEX_SAMPLES: usize = 256;

/// `1..=n_max` when short, else `samples` evenly spaced indices from 1 to `n_max`.
pub fn index_plan(n_max: usize, samples: usize) -> Vec<usize> {
    if n_max == 0 {
        return Vec::new();
    }
    let samples = samples.max(2);
    if n_max <= samples {
        return (1..=n_max).collect();
    }
    let mut out: Vec<usize> = (0..samples)
        .map(|k| 1 + ((k as f64) * (n_max - 1) as f64 / (samples - 1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

/// Indices in `[⌈N/2⌉, N]`, thinned to at most `samples` evenly spaced ones.
pub fn tail_window(horizon: usize, samples: usize) -> Vec<usize> {
    let start = horizon.div_ceil(2).max(1);
    if horizon < start {
        return Vec::new();
    }
    let count = horizon - start + 1;
    if count <= samples {
        return (start..=horizon).collect();
    }
    let mut out: Vec<usize> = (0..samples)
        .map(|k| start + ((k as f64) * (count - 1) as f64 / (samples.max(2) - 1) as f64).round() as usize)
        .collect();
    out.dedup();
    out
}

/// Parameters shared by the Mosco probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ProbeConfig<T> {
    /// Random targets, in addition to `targets`.
    pub trials: usize,
    pub horizon: usize,
    #[serde(with = "ext_real")]
    pub tol: T,
    pub seed: u64,
    /// Random targets are uniform in this ball, then projected onto the
    /// limit's constraint set.
    #[serde(with = "ext_real")]
    pub sample_radius: T,
    #[serde(default)]
    pub targets: Vec<Vec<T>>,
    /// Indices visited in the tail window `[N/2, N]`.
    pub window_samples: usize,
}

impl<T: Scalar> ProbeConfig<T> {
    pub fn new(trials: usize, horizon: usize, tol: T) -> Self {
        ProbeConfig {
            trials,
            horizon,
            tol,
            seed: 0,
            sample_radius: T::lit(2.0),
            targets: Vec::new(),
            window_samples: 64,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_targets(mut self, targets: Vec<Vec<T>>) -> Self {
        self.targets = targets;
        self
    }

    pub fn with_sample_radius(mut self, radius: T) -> Self {
        self.sample_radius = radius;
        self
    }
}

impl<T: Scalar> Default for ProbeConfig<T> {
    fn default() -> Self {
        ProbeConfig::new(16, 200, T::lit(1e-7))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    MoscoLiminf,
    MoscoRecovery,
    Equicoercivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeVerdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryConstruction {
    /// `f_n ≡ f`.
    Constant,
    /// `f_n = Π_{K_n}(f)`.
    Projected,
}

/// One probe trial: target `f`, the limit value and the tail statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TrialOutcome<T> {
    pub target: Vec<T>,
    #[serde(with = "ext_real")]
    pub limit_value: T,
    /// Liminf probe: tail minimum of `L_{D_n}(f_n)`; recovery: tail maximum.
    #[serde(with = "ext_real")]
    pub tail_value: T,
    /// Amount by which the condition is violated (`≤ tol` passes).
    #[serde(with = "ext_real")]
    pub margin: T,
    /// Index attaining the tail statistic and the sequence point there.
    pub index: usize,
    pub point: Vec<T>,
    pub construction: Option<RecoveryConstruction>,
}

/// Outcome of a sampled necessary-condition probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ProbeReport<T> {
    pub probe: ProbeKind,
    pub verdict: ProbeVerdict,
    /// Always true: a sampled probe can falsify a condition, never prove it.
    pub probe_not_proof: bool,
    pub horizon: usize,
    #[serde(with = "ext_real")]
    pub tol: T,
    pub seed: u64,
    #[serde(with = "ext_real")]
    pub worst_margin: T,
    pub outcomes: Vec<TrialOutcome<T>>,
    /// First failing trial.
    pub witness: Option<TrialOutcome<T>>,
}

impl<T: Scalar> ProbeReport<T> {
    pub fn passed(&self) -> bool {
        self.verdict == ProbeVerdict::Pass
    }

    fn assemble(
        kind: ProbeKind,
        config: &ProbeConfig<T>,
        horizon: usize,
        outcomes: Vec<TrialOutcome<T>>,
    ) -> Self {
        let worst_margin = outcomes.iter().map(|o| o.margin).fold(T::neg_infinity(), T::max);
        let witness = outcomes.iter().find(|o| !(o.margin <= config.tol)).cloned();
        ProbeReport {
            probe: kind,
            verdict: if witness.is_none() {
                ProbeVerdict::Pass
            } else {
                ProbeVerdict::Fail
            },
            probe_not_proof: true,
            horizon,
            tol: config.tol,
            seed: config.seed,
            worst_margin,
            outcomes,
            witness,
        }
    }
}

fn probe_targets<T: Scalar>(seq: &PerturbationSequence<T>, config: &ProbeConfig<T>) -> Result<Vec<Vec<T>>> {
    let d = seq.dimension();
    let k = seq.limit().constraint();
    let mut out = Vec::with_capacity(config.targets.len() + config.trials);
    for t in &config.targets {
        if t.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: t.len(),
            });
        }
        out.push(k.project(t));
    }
    let mut rng = sampling::rng(config.seed);
    for _ in 0..config.trials {
        out.push(k.project(&sampling::uniform_in_ball(&mut rng, d, config.sample_radius)));
    }
    Ok(out)
}

fn check_probe_config<T: Scalar>(config: &ProbeConfig<T>) -> Result<()> {
    if config.horizon == 0 {
        return Err(Error::InvalidParameter("probe horizon must be positive".into()));
    }
    if config.trials + config.targets.len() == 0 {
        return Err(Error::InvalidParameter("probe needs at least one trial".into()));
    }
    if !(config.tol >= T::zero()) {
        return Err(Error::InvalidParameter(
            "probe tolerance must be nonnegative".into(),
        ));
    }
    Ok(())
}

/// `a − b` for extended reals, with `∞ − ∞` read as no violation.
fn ext_sub<T: Scalar>(a: T, b: T) -> T {
    let d = a - b;
    if d.is_nan() {
        T::neg_infinity()
    } else {
        d
    }
}

/// Sampled test of the liminf condition (M1): for `f_n = Π_K(f + u_n/n)` with
/// random unit `u_n`, checks `L_D(f) − min_{n ∈ [N/2, N]} L_{D_n}(f_n) ≤ tol`.
///
/// Member values are shifted by `−s_n·(f_n − f)` with `s_n ∈ ∂L_{D_n}(f)`.
/// The shift vanishes as `f_n → f` whenever `‖s_n‖ = o(n)`, so the liminf is
/// unchanged, while the finite-horizon bias from displacing `f_n` is removed
/// to first order.
pub fn mosco_liminf_probe<T: Scalar>(
    seq: &PerturbationSequence<T>,
    config: &ProbeConfig<T>,
) -> Result<ProbeReport<T>> {
    check_probe_config(config)?;
    let horizon = seq.clamp_index(config.horizon);
    let window = tail_window(horizon, config.window_samples);
    let members = window
        .iter()
        .map(|&n| seq.member(n))
        .collect::<Result<Vec<_>>>()?;
    let limit = seq.limit();
    let k = limit.constraint();
    let d = seq.dimension();
    let targets = probe_targets(seq, config)?;
    let outcomes = targets
        .par_iter()
        .enumerate()
        .map(|(t, f)| -> Result<TrialOutcome<T>> {
            let lf = limit.evaluate(f)?;
            let mut rng = sampling::rng(sampling::derive_seed(config.seed, 1 + t as u64));
            let mut best = (T::infinity(), window[0], f.clone());
            for (&n, member) in window.iter().zip(&members) {
                let u: Vec<T> = sampling::unit_direction(&mut rng, d);
                let fn_ = k.project(&axpy(f, T::one() / T::from_count(n), &u));
                let v = member.evaluate(&fn_).map_err(Error::at(n))?;
                let corrected = if v.is_finite() && member.evaluate(f).map_err(Error::at(n))?.is_finite() {
                    let s = member.subgradient(f).map_err(Error::at(n))?;
                    v - dot(&s, &sub(&fn_, f))
                } else {
                    v
                };
                if corrected < best.0 {
                    best = (corrected, n, fn_);
                }
            }
            Ok(TrialOutcome {
                target: f.clone(),
                limit_value: lf,
                tail_value: best.0,
                margin: ext_sub(lf, best.0),
                index: best.1,
                point: best.2,
                construction: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeReport::assemble(
        ProbeKind::MoscoLiminf,
        config,
        horizon,
        outcomes,
    ))
}

/// Sampled test of the recovery condition (M2): first the constant sequence
/// `f_n ≡ f`, then `f_n = Π_{K_n}(f)` (accepted only if `‖f_n − f‖ ≤ √tol`
/// over the window). Passes when `max_{n ∈ [N/2, N]} L_{D_n}(f_n) − L_D(f) ≤ tol`.
pub fn mosco_recovery_probe<T: Scalar>(
    seq: &PerturbationSequence<T>,
    config: &ProbeConfig<T>,
) -> Result<ProbeReport<T>> {
    check_probe_config(config)?;
    let horizon = seq.clamp_index(config.horizon);
    let window = tail_window(horizon, config.window_samples);
    let members = window
        .iter()
        .map(|&n| seq.member(n))
        .collect::<Result<Vec<_>>>()?;
    let limit = seq.limit();
    let targets = probe_targets(seq, config)?;
    let outcomes = targets
        .par_iter()
        .map(|f| -> Result<TrialOutcome<T>> {
            let lf = limit.evaluate(f)?;
            let run = |construction: RecoveryConstruction| -> Result<(TrialOutcome<T>, T)> {
                let mut worst = (T::neg_infinity(), window[0], f.clone());
                let mut drift = T::zero();
                for (&n, member) in window.iter().zip(&members) {
                    let fn_ = match construction {
                        RecoveryConstruction::Constant => f.clone(),
                        RecoveryConstruction::Projected => member.constraint().project(f),
                    };
                    drift = drift.max(crate::linalg::distance(&fn_, f));
                    let v = member.evaluate(&fn_).map_err(Error::at(n))?;
                    if v > worst.0 {
                        worst = (v, n, fn_);
                    }
                }
                Ok((
                    TrialOutcome {
                        target: f.clone(),
                        limit_value: lf,
                        tail_value: worst.0,
                        margin: ext_sub(worst.0, lf),
                        index: worst.1,
                        point: worst.2,
                        construction: Some(construction),
                    },
                    drift,
                ))
            };
            let (constant, _) = run(RecoveryConstruction::Constant)?;
            if constant.margin <= config.tol {
                return Ok(constant);
            }
            let (projected, drift) = run(RecoveryConstruction::Projected)?;
            if projected.margin <= config.tol && drift <= config.tol.sqrt() {
                Ok(projected)
            } else {
                Ok(constant)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProbeReport::assemble(
        ProbeKind::MoscoRecovery,
        config,
        horizon,
        outcomes,
    ))
}

/// Certified-gap target used when a member has no exact solution route.
pub const FALLBACK_GAP: f64 = 1e-10;
pub const FALLBACK_MAX_ITERS: usize = 100_000;

/// `C_{D_n}` via `solve_exact`, falling back to a one-point sampled set from
/// a gap-certified projected-gradient run.
pub fn solution_set_of<T: Scalar>(problem: &ConvexProblem<T>) -> Result<SolutionSet<T>> {
    match solve_exact(problem) {
        Err(Error::UnsupportedStructure(_)) => {
            let start = crate::solvers::default_start(problem);
            let r = projected_gradient(problem, &start, T::lit(FALLBACK_GAP), FALLBACK_MAX_ITERS)?
                .require_certified()?;
            Ok(SolutionSet::sampled(vec![r.point], r.certified_gap, r.value))
        }
        other => other,
    }
}

/// Solution sets of the members at `indices`, computed in parallel.
pub fn solve_members<T: Scalar>(
    seq: &PerturbationSequence<T>,
    indices: &[usize],
) -> Vec<Result<SolutionSet<T>>> {
    indices
        .par_iter()
        .map(|&n| {
            seq.member(n)
                .and_then(|p| solution_set_of(&p).map_err(Error::at(n)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case", bound = "T: Scalar")]
pub enum BoundednessVerdict<T> {
    Bounded {
        #[serde(with = "ext_real")]
        r_hat: T,
    },
    Escaping {
        cause: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundednessReport<T> {
    pub verdict: BoundednessVerdict<T>,
    pub indices: Vec<usize>,
    /// `r_n`, the largest norm over the representative selections.
    #[serde(with = "ext_real_vec")]
    pub radii: Vec<T>,
    /// Index from which the members are accounted for (always the first).
    pub n0: usize,
}

impl<T: Scalar> BoundednessReport<T> {
    pub fn is_bounded(&self) -> bool {
        matches!(self.verdict, BoundednessVerdict::Bounded { .. })
    }

    pub fn r_hat(&self) -> Option<T> {
        match self.verdict {
            BoundednessVerdict::Bounded { r_hat } => Some(r_hat),
            BoundednessVerdict::Escaping { .. } => None,
        }
    }
}

/// Bounded iff the last half never reaches twice the first half's maximum.
fn no_doubling<T: Scalar>(values: &[T]) -> bool {
    if values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let half = values.len() / 2;
    if half == 0 {
        return true;
    }
    let first = values[..half].iter().copied().fold(T::zero(), T::max);
    let last = values[half..].iter().copied().fold(T::zero(), T::max);
    !(last >= T::lit(2.0) * first && last > first)
}

/// Local boundedness from already solved members.
pub fn boundedness_from_sets<T: Scalar>(
    indices: &[usize],
    sets: &[Result<SolutionSet<T>>],
) -> Result<BoundednessReport<T>> {
    let mut radii = Vec::with_capacity(sets.len());
    let mut cap = None;
    for (&n, set) in indices.iter().zip(sets) {
        let set = match set {
            Ok(s) => s,
            Err(e) if matches!(e.root(), Error::UnboundedBelow) => {
                return Ok(BoundednessReport {
                    verdict: BoundednessVerdict::Escaping {
                        cause: Some(format!("member n={n} is unbounded below")),
                    },
                    indices: indices[..radii.len()].to_vec(),
                    radii,
                    n0: indices.first().copied().unwrap_or(1),
                });
            }
            Err(e) => return Err(e.clone()),
        };
        let min_norm = norm(&set.min_norm_point());
        let cap = *cap.get_or_insert_with(|| T::lit(10.0) * min_norm.max(T::one()));
        let far = select(
            set,
            &SelectionRule::AdversarialFarFrom {
                target: SolutionSet::singleton(vec![T::zero(); set.dim()], T::zero()),
                seed: 0,
            },
            cap,
        )
        .map(|x| norm(&x))
        .unwrap_or(min_norm);
        radii.push(min_norm.max(far));
    }
    let verdict = if no_doubling(&radii) {
        let max = radii.iter().copied().fold(T::zero(), T::max);
        BoundednessVerdict::Bounded {
            r_hat: T::lit(1.05) * max,
        }
    } else {
        BoundednessVerdict::Escaping { cause: None }
    };
    Ok(BoundednessReport {
        verdict,
        indices: indices.to_vec(),
        radii,
        n0: indices.first().copied().unwrap_or(1),
    })
}

/// `r_n` over MinNorm and far-from-origin selections (the latter within the
/// ball of radius `10·max(r_1, 1)`); bounded with `R̂ = 1.05·max r_n` unless
/// the series doubles over its last half. Visits at most
/// [`MAX_INDEX_SAMPLES`] evenly spaced indices up to `n_max`.
pub fn local_boundedness_probe<T: Scalar>(
    seq: &PerturbationSequence<T>,
    n_max: usize,
) -> Result<BoundednessReport<T>> {
    let indices = index_plan(seq.clamp_index(n_max), MAX_INDEX_SAMPLES);
    if indices.is_empty() {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let sets = solve_members(seq, &indices);
    boundedness_from_sets(&indices, &sets)
}

/// `sup { ‖f‖ : q(f) ≤ level }` for a convex quadratic, with the point
/// attaining it. `None` for an empty sublevel set; infinite radius when the
/// sublevel set is unbounded.
pub fn sublevel_radius<T: Scalar>(q: &QuadraticLoss<T>, level: T) -> Result<Option<(T, Vec<T>)>> {
    let d = q.dim();
    let eig = sym_eigen(q.hessian());
    let thr = null_threshold(&eig);
    let flat = eig.values.iter().any(|&l| l <= thr);
    let unconstrained = ConvexProblem::quadratic(q.clone());
    let set = match solve_exact(&unconstrained) {
        Ok(s) => s,
        Err(Error::UnboundedBelow) => return Ok(Some((T::infinity(), unbounded_direction(&eig, thr, q)))),
        Err(e) => return Err(e),
    };
    let m = set.minimal_value;
    if level < m {
        return Ok(None);
    }
    if flat {
        let direction = eig.vector(0);
        return Ok(Some((T::infinity(), direction)));
    }
    let x = set.min_norm_point();
    let s = (T::lit(2.0) * (level - m)).sqrt();
    if s == T::zero() {
        return Ok(Some((norm(&x), x)));
    }
    // max ‖x + s H^{-1/2} z‖ over ‖z‖ ≤ 1, as a trust-region minimization of
    // −‖x + s H^{-1/2} z‖² in the eigenbasis of H
    let xt = eig.to_eigen_coords(&x);
    let inv_sqrt: Vec<T> = eig.values.iter().map(|&l| T::one() / l.sqrt()).collect();
    let values: Vec<T> = inv_sqrt.iter().map(|&w| -T::lit(2.0) * s * s * w * w).collect();
    let g: Vec<T> = xt
        .iter()
        .zip(&inv_sqrt)
        .map(|(&xi, &w)| -T::lit(2.0) * s * w * xi)
        .collect();
    // the model lives in eigen coordinates, so use the identity basis and sort
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let model = SymEigen {
        values: order.iter().map(|&i| values[i]).collect(),
        vectors: Matrix::identity(d),
    };
    let g_sorted: Vec<T> = order.iter().map(|&i| g[i]).collect();
    let step = solve_trust_region(&model, &g_sorted, T::one())?;
    let mut z = vec![T::zero(); d];
    for (k, &i) in order.iter().enumerate() {
        z[i] = step.point[k];
    }
    let y: Vec<T> = (0..d).map(|i| xt[i] + s * inv_sqrt[i] * z[i]).collect();
    let f = eig.from_eigen_coords(&y);
    Ok(Some((norm(&f), f)))
}

fn unbounded_direction<T: Scalar>(eig: &SymEigen<T>, thr: T, q: &QuadraticLoss<T>) -> Vec<T> {
    let bt = eig.to_eigen_coords(q.linear());
    let y: Vec<T> = bt
        .iter()
        .zip(&eig.values)
        .map(|(&b, &l)| if l <= thr { b } else { T::zero() })
        .collect();
    let v = eig.from_eigen_coords(&y);
    let n = norm(&v);
    v.into_iter().map(|x| x / n).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LevelOutcome<T> {
    #[serde(with = "ext_real")]
    pub level: T,
    pub indices: Vec<usize>,
    /// Sublevel radius per index; `0` for empty sublevel sets.
    #[serde(with = "ext_real_vec")]
    pub radii: Vec<T>,
    #[serde(with = "ext_real")]
    pub sup_radius: T,
    pub verdict: ProbeVerdict,
    /// Index and direction of the largest (or first unbounded) sublevel set.
    pub offending_index: Option<usize>,
    pub offending_direction: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EquicoercivityReport<T> {
    pub probe: ProbeKind,
    pub verdict: ProbeVerdict,
    pub probe_not_proof: bool,
    pub levels: Vec<LevelOutcome<T>>,
}

impl<T: Scalar> EquicoercivityReport<T> {
    pub fn passed(&self) -> bool {
        self.verdict == ProbeVerdict::Pass
    }
}

/// Sublevel radii `sup {‖f‖ : L_{D_n}(f) ≤ c}` for each level `c` over
/// the index plan up to `n_max`; PASS when every radius is finite and the
/// series does not double over its last half. Radii are capped by the size
/// of the constraint set.
pub fn equicoercivity_probe<T: Scalar>(
    seq: &PerturbationSequence<T>,
    levels: &[T],
    n_max: usize,
) -> Result<EquicoercivityReport<T>> {
    if levels.is_empty() {
        return Err(Error::InvalidParameter("at least one level is required".into()));
    }
    let indices = index_plan(seq.clamp_index(n_max), MAX_INDEX_SAMPLES);
    if indices.is_empty() {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let members = indices
        .iter()
        .map(|&n| {
            let p = seq.member(n)?;
            let q = p.effective_quadratic().ok_or_else(|| {
                Error::UnsupportedStructure("equi-coercivity probe needs quadratic losses".into())
            })?;
            Ok((q, p.constraint().max_norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut outcomes = Vec::with_capacity(levels.len());
    for &level in levels {
        let solved = members
            .par_iter()
            .zip(indices.par_iter())
            .map(|((q, cap), &n)| {
                let r = sublevel_radius(q, level).map_err(Error::at(n))?;
                Ok(r.map(|(r, f)| (r.min(*cap), f)))
            })
            .collect::<Result<Vec<_>>>()?;
        let radii: Vec<T> = solved
            .iter()
            .map(|r| r.as_ref().map_or(T::zero(), |(r, _)| *r))
            .collect();
        let sup_radius = radii.iter().copied().fold(T::zero(), T::max);
        let pass = no_doubling(&radii);
        let worst = radii.iter().enumerate().fold(0, |best, (i, &r)| {
            if r > radii[best] || !r.is_finite() && radii[best].is_finite() {
                i
            } else {
                best
            }
        });
        let (offending_index, offending_direction) = if pass {
            (None, None)
        } else {
            let dir = solved[worst].as_ref().map(|(_, f)| {
                let n = norm(f);
                if n > T::zero() && n.is_finite() {
                    f.iter().map(|&x| x / n).collect()
                } else {
                    f.clone()
                }
            });
            (Some(indices[worst]), dir)
        };
        outcomes.push(LevelOutcome {
            level,
            indices: indices.clone(),
            radii,
            sup_radius,
            verdict: if pass {
                ProbeVerdict::Pass
            } else {
                ProbeVerdict::Fail
            },
            offending_index,
            offending_direction,
        });
    }
    let verdict = if outcomes.iter().all(|o| o.verdict == ProbeVerdict::Pass) {
        ProbeVerdict::Pass
    } else {
        ProbeVerdict::Fail
    };
    Ok(EquicoercivityReport {
        probe: ProbeKind::Equicoercivity,
        verdict,
        probe_not_proof: true,
        levels: outcomes,
    })
}

/// Minimizer norm `‖f_n‖` for a singleton solution set.
pub fn singleton_point<T: Scalar>(set: &SolutionSet<T>) -> Option<&[T]> {
    match &set.shape {
        SolutionShape::Singleton { point } => Some(point),
        _ => None,
    }
}

/// `L_D + δ` as a problem, for building sequences by hand.
pub fn perturbed<T: Scalar>(base: &ConvexProblem<T>, delta: &QuadraticDelta<T>) -> Result<ConvexProblem<T>> {
    let Loss::Quadratic(q) = base.loss() else {
        return Err(Error::UnsupportedStructure(
            "perturbed() needs a quadratic base loss".into(),
        ));
    };
    let loss = QuadraticLoss::new(
        q.hessian().add_scaled(T::one(), &delta.hessian),
        Vector(add(q.linear(), &delta.linear)),
        q.offset() + delta.offset,
    )?;
    ConvexProblem::new(
        base.dimension(),
        Loss::Quadratic(loss),
        base.constraint().clone(),
        base.regularizer().cloned(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(a: &[Vec<f64>], b: &[f64], c: f64) -> ConvexProblem<f64> {
        ConvexProblem::quadratic(
            QuadraticLoss::new(Matrix::from_rows(a).unwrap(), Vector(b.to_vec()), c).unwrap(),
        )
    }

    fn half_square() -> ConvexProblem<f64> {
        quad(&[vec![1.0]], &[0.0], 0.0)
    }

    #[test]
    fn blowup_gap_example() {
        let limit = flat_half::<f64>(1);
        let member = make_blowup_family(0.1f64).unwrap();
        let exact = uniform_gap_between(&member, &limit, 1.0, GapMethod::ExactTrustRegion).unwrap();
        assert!((exact - 0.105).abs() < 1e-12);
        let grid = grid_gap(&member, &limit, 1.0, 20_000).unwrap();
        assert!(grid <= exact + 1e-12 && grid >= 0.95 * exact);
    }

    #[test]
    fn saddle_difference_gap() {
        let d =
            QuadraticDelta::<f64>::new(Matrix::from_diag(&[2.0, -2.0]), Vector(vec![0.0, 0.0]), 0.0).unwrap();
        assert!((d.ball_sup(1.0).unwrap() - 1.0).abs() < 1e-12);
        let p = half_square();
        assert_eq!(
            uniform_gap_between(&p, &p, 3.0, GapMethod::ExactTrustRegion).unwrap(),
            0.0
        );
        assert_eq!(
            uniform_gap_between(&p, &p, 0.0, GapMethod::ExactTrustRegion),
            Err(Error::RadiusNonpositive)
        );
    }

    #[test]
    fn shifted_quadratic_gap() {
        let a = quad(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.1, 0.0], 0.605);
        let b = quad(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 0.0], 0.5);
        let g = uniform_gap_between(&a, &b, 2.0, GapMethod::ExactTrustRegion).unwrap();
        assert!((g - 0.305).abs() < 1e-12);
    }

    #[test]
    fn index_plans() {
        assert_eq!(index_plan(4, 256), vec![1, 2, 3, 4]);
        let p = index_plan(1_000_000, 256);
        assert_eq!(p.len(), 256);
        assert_eq!((p[0], p[255]), (1, 1_000_000));
        assert_eq!(tail_window(200, 64).first(), Some(&100));
        assert_eq!(tail_window(200, 64).last(), Some(&200));
        assert_eq!(tail_window(1, 64), vec![1]);
    }

    #[test]
    fn constant_family_passes_both_probes() {
        let seq = PerturbationSequence::constant(half_square());
        let cfg = ProbeConfig::new(8, 200, 1e-7);
        assert!(mosco_liminf_probe(&seq, &cfg).unwrap().passed());
        assert!(mosco_recovery_probe(&seq, &cfg).unwrap().passed());
    }

    #[test]
    fn boxed_blowup_passes_at_documented_targets() {
        let seq =
            PerturbationSequence::blowup(DecayRule::Inverse, ConstraintSet::interval(-1.0, 1.0)).unwrap();
        let liminf = mosco_liminf_probe(
            &seq,
            &ProbeConfig::new(0, 200, 1e-7).with_targets(vec![vec![0.0]]),
        )
        .unwrap();
        assert!(liminf.passed(), "{liminf:?}");
        let rec = mosco_recovery_probe(
            &seq,
            &ProbeConfig::new(0, 200, 1e-7).with_targets(vec![vec![1.0]]),
        )
        .unwrap();
        assert!(rec.passed());
        assert_eq!(rec.outcomes[0].construction, Some(RecoveryConstruction::Constant));
    }

    #[test]
    fn wrong_claimed_limits_fail() {
        let base = half_square();
        let lowered = PerturbationSequence::new(base.clone(), "½x² − 1/√n", |n| {
            let c = -1.0 / (n as f64).sqrt();
            Ok(ConvexProblem::quadratic(QuadraticLoss::new(
                Matrix::from_diag(&[1.0]),
                Vector(vec![0.0]),
                c,
            )?))
        })
        .with_claimed_limit(quad(&[vec![1.0]], &[0.0], 1.0))
        .unwrap();
        let r = mosco_liminf_probe(
            &lowered,
            &ProbeConfig::new(0, 200, 1e-7).with_targets(vec![vec![0.0]]),
        )
        .unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Fail);
        assert_eq!(r.witness.as_ref().unwrap().target, vec![0.0]);

        let raised = PerturbationSequence::constant(quad(&[vec![1.0]], &[0.0], 1.0))
            .with_claimed_limit(base)
            .unwrap();
        let r = mosco_recovery_probe(&raised, &ProbeConfig::new(4, 200, 1e-7)).unwrap();
        assert_eq!(r.verdict, ProbeVerdict::Fail);
        assert!(r.outcomes.iter().all(|o| (o.margin - 1.0).abs() < 1e-12));
    }

    #[test]
    fn boundedness_examples() {
        let seq = PerturbationSequence::<f64>::blowup(DecayRule::Inverse, ConstraintSet::None).unwrap();
        let r = local_boundedness_probe(&seq, 40).unwrap();
        assert!(!r.is_bounded());
        for (&n, &rn) in r.indices.iter().zip(&r.radii) {
            assert!((rn / n as f64 - 1.0).abs() < 1e-9);
        }
        let seq =
            PerturbationSequence::blowup(DecayRule::Inverse, ConstraintSet::interval(-1.0, 1.0)).unwrap();
        let r = local_boundedness_probe(&seq, 40).unwrap();
        assert!(r.r_hat().unwrap() <= 1.05 + 1e-12);
        let shifted = quad(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 0.0], 0.5);
        let r = local_boundedness_probe(&PerturbationSequence::constant(shifted), 10).unwrap();
        assert!((r.r_hat().unwrap() - 1.05).abs() < 1e-12);
    }

    #[test]
    fn flat_members_escape_with_a_cause() {
        let seq =
            PerturbationSequence::new(flat_half(1), "unbounded", |_| Ok(quad(&[vec![0.0]], &[1.0], 0.0)));
        let r = local_boundedness_probe(&seq, 5).unwrap();
        assert!(matches!(
            r.verdict,
            BoundednessVerdict::Escaping { cause: Some(_) }
        ));
    }

    #[test]
    fn equicoercivity_examples() {
        let seq = PerturbationSequence::constant(half_square());
        let r = equicoercivity_probe(&seq, &[0.5], 10).unwrap();
        assert!(r.passed());
        assert!(r.levels[0].radii.iter().all(|&x| (x - 1.0).abs() < 1e-12));

        let seq = PerturbationSequence::<f64>::blowup(DecayRule::Inverse, ConstraintSet::None).unwrap();
        let r = equicoercivity_probe(&seq, &[0.5], 20).unwrap();
        assert!(!r.passed());
        for (&n, &x) in r.levels[0].indices.iter().zip(&r.levels[0].radii) {
            assert!((x - 2.0 * n as f64).abs() < 1e-8 * n as f64);
        }

        let seq = PerturbationSequence::new(half_square(), "½x² + 1/n", |n| {
            Ok(quad(&[vec![1.0]], &[0.0], 1.0 / n as f64))
        });
        let r = equicoercivity_probe(&seq, &[2.0], 10).unwrap();
        assert!(r.passed());
        for (&n, &x) in r.levels[0].indices.iter().zip(&r.levels[0].radii) {
            assert!((x - (2.0 * (2.0 - 1.0 / n as f64)).sqrt()).abs() < 1e-12);
            assert!(x <= 2.0);
        }
    }

    #[test]
    fn explicit_schedule_bounds_the_index() {
        let rule = DecayRule::Explicit {
            values: vec![1.0, 0.1, 0.01, 0.001],
        };
        let seq = PerturbationSequence::<f64>::blowup(rule, ConstraintSet::None).unwrap();
        assert_eq!(seq.max_index(), Some(4));
        assert!(seq.member(5).is_err());
        let r = local_boundedness_probe(&seq, 100).unwrap();
        assert_eq!(r.indices, vec![1, 2, 3, 4]);
        assert!(!r.is_bounded());
    }
}
