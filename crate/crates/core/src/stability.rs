//! Stability verdicts for perturbation sequences: empirical upper
//! semicontinuity of the solution correspondence, continuity of the minimal
//! value, the quadratic-growth deviation bound, hard-constraint analysis and
//! stabilization by strongly convex regularization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{distance, norm, Matrix};
use crate::perturbations::{
    boundedness_from_sets, index_plan, solution_set_of, uniform_gap_between, BoundednessReport, GapMethod,
    PerturbationSequence, MAX_INDEX_SAMPLES,
};
use crate::problems::{ConstraintSet, ConvexProblem, Regularizer};
use crate::scalar::Scalar;
use crate::serde_ext::{ext_real, ext_real_opt, ext_real_vec};
use crate::solution_sets::{
    check_quadratic_growth, distance_to, minimal_value, select, solve_exact, GrowthCertificate, GrowthCheck,
    SelectionRule, SolutionSet, SolutionShape,
};
use crate::solvers::{default_start, projected_gradient, DecayRule, GapCertificate};

/// Slack added to the deviation bound before a distance counts as a violation.
pub const BOUND_SLACK: f64 = 1e-8;
/// Iteration cap for gap-certified selections.
pub const CERTIFIED_MAX_ITERS: usize = 200_000;

/// `(n, value)` pairs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Series<T> {
    pub indices: Vec<usize>,
    #[serde(with = "ext_real_vec")]
    pub values: Vec<T>,
}

impl<T: Scalar> Series<T> {
    pub fn new(indices: Vec<usize>, values: Vec<T>) -> Self {
        Series { indices, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }
}

/// Evidence that a convergent selection ends up away from `C_D`: the centroid
/// of `points` lies farther than `threshold` from `limit_set`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Witness<T> {
    pub rule: String,
    pub indices: Vec<usize>,
    pub points: Vec<Vec<T>>,
    pub limit: Vec<T>,
    #[serde(with = "ext_real")]
    pub distance: T,
    #[serde(with = "ext_real")]
    pub threshold: T,
    pub limit_set: SolutionSet<T>,
}

impl<T: Scalar> Witness<T> {
    /// Recomputes the centroid and its distance from the serialized data.
    pub fn recheck(&self) -> Result<bool> {
        let c = centroid(&self.points);
        if distance(&c, &self.limit) > T::tol(1e-12) * norm(&c).max(T::one()) {
            return Ok(false);
        }
        Ok(distance_to(&self.limit_set, &c)?.value > self.threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE", bound = "T: Scalar")]
pub enum Verdict<T> {
    Consistent,
    /// No selection passed the Cauchy tail test or minimizers escape; the
    /// outer limit may be empty, which is not a violation.
    NoConvergentSelection {
        reason: String,
    },
    Inconsistent {
        witness: Box<Witness<T>>,
    },
}

impl<T> Verdict<T> {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Consistent => "CONSISTENT",
            Verdict::NoConvergentSelection { .. } => "NO_CONVERGENT_SELECTION",
            Verdict::Inconsistent { .. } => "INCONSISTENT",
        }
    }

    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent)
    }
}

/// One selection rule followed along the sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SelectionTrace<T> {
    pub rule: String,
    /// `dist(f_n, C_D)`; `∞` where the selection was unavailable.
    pub distances: Series<T>,
    /// Max pairwise distance over the last quarter of the indices.
    #[serde(with = "ext_real")]
    pub cauchy_diameter: T,
    pub convergent: bool,
    pub limit_estimate: Option<Vec<T>>,
    #[serde(with = "ext_real_opt", default)]
    pub limit_distance: Option<T>,
    /// Certified gaps when the selection comes from the solver.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gaps: Option<Series<T>>,
}

/// `ε_n(R)`, the bound `√(4ε_n/μ)`, the worst distance over rules and their ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundSeries<T> {
    #[serde(with = "ext_real")]
    pub mu: T,
    pub epsilon: Series<T>,
    pub bound: Series<T>,
    pub distance: Series<T>,
    pub ratio: Series<T>,
    pub violations: usize,
}

/// How members are turned into selections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum MemberSource {
    /// Selection rules applied to exact (or certified fallback) solution sets.
    Exact,
    /// Projected-gradient ε_n-minimizers from a shared start.
    Certified { schedule: DecayRule },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StabilityParameters<T> {
    #[serde(with = "ext_real")]
    pub radius: T,
    #[serde(with = "ext_real")]
    pub tol: T,
    pub n_max: usize,
    pub index_samples: usize,
    pub rules: Vec<SelectionRule<T>>,
    pub source: MemberSource,
    /// Fraction of the indices used by the Cauchy tail test.
    pub tail_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct StabilityReport<T> {
    #[serde(flatten)]
    pub verdict: Verdict<T>,
    pub limit_set: SolutionSet<T>,
    pub minimal_values: Series<T>,
    pub selections: Vec<SelectionTrace<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound_series: Option<BoundSeries<T>>,
    pub boundedness: Option<BoundednessReport<T>>,
    pub parameters: StabilityParameters<T>,
}

/// Configuration of [`pk_usc_test_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct PkConfig<T> {
    pub rules: Vec<SelectionRule<T>>,
    pub n_max: usize,
    pub radius: T,
    pub tol: T,
    pub source: MemberSource,
    pub index_samples: usize,
}

impl<T: Scalar> PkConfig<T> {
    pub fn new(rules: Vec<SelectionRule<T>>, n_max: usize, radius: T, tol: T) -> Self {
        PkConfig {
            rules,
            n_max,
            radius,
            tol,
            source: MemberSource::Exact,
            index_samples: MAX_INDEX_SAMPLES,
        }
    }

    pub fn certified(mut self, schedule: DecayRule) -> Self {
        self.source = MemberSource::Certified { schedule };
        self
    }
}

pub(crate) fn centroid<T: Scalar>(points: &[Vec<T>]) -> Vec<T> {
    let d = points.first().map_or(0, |p| p.len());
    let k = T::from_count(points.len().max(1));
    (0..d)
        .map(|i| points.iter().map(|p| p[i]).sum::<T>() / k)
        .collect()
}

fn diameter<T: Scalar>(points: &[Vec<T>]) -> T {
    let mut best = T::zero();
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(distance(a, b));
        }
    }
    best
}

const TAIL_FRACTION: f64 = 0.25;

fn tail_start(len: usize) -> usize {
    let tail = ((len as f64) * TAIL_FRACTION).ceil() as usize;
    len - tail.clamp(1, len.max(1))
}

/// Follows one selection: distances to `C_D`, Cauchy tail test and, when
/// convergent, the centroid check.
fn trace_selection<T: Scalar>(
    rule: String,
    indices: &[usize],
    points: &[Option<Vec<T>>],
    limit_set: &SolutionSet<T>,
    tol: T,
) -> Result<(SelectionTrace<T>, Option<Witness<T>>)> {
    let distances = points
        .iter()
        .map(|p| match p {
            Some(p) => distance_to(limit_set, p).map(|d| d.value),
            None => Ok(T::infinity()),
        })
        .collect::<Result<Vec<T>>>()?;
    let start = tail_start(points.len());
    let tail: Option<Vec<Vec<T>>> = points[start..].iter().cloned().collect();
    let (cauchy_diameter, convergent) = match &tail {
        Some(t) if !t.is_empty() => {
            let diam = diameter(t);
            (diam, diam <= tol)
        }
        _ => (T::infinity(), false),
    };
    let mut witness = None;
    let (limit_estimate, limit_distance) = if convergent {
        let t = tail.expect("convergent tails exist");
        let c = centroid(&t);
        let dist = distance_to(limit_set, &c)?.value;
        if dist > tol {
            witness = Some(Witness {
                rule: rule.clone(),
                indices: indices[start..].to_vec(),
                points: t,
                limit: c.clone(),
                distance: dist,
                threshold: tol,
                limit_set: limit_set.clone(),
            });
        }
        (Some(c), Some(dist))
    } else {
        (None, None)
    };
    Ok((
        SelectionTrace {
            rule,
            distances: Series::new(indices.to_vec(), distances),
            cauchy_diameter,
            convergent,
            limit_estimate,
            limit_distance,
            gaps: None,
        },
        witness,
    ))
}

pub fn pk_usc_test<T: Scalar>(
    seq: &PerturbationSequence<T>,
    rules: &[SelectionRule<T>],
    n_max: usize,
    radius: T,
    tol: T,
) -> Result<StabilityReport<T>> {
    pk_usc_test_with(seq, &PkConfig::new(rules.to_vec(), n_max, radius, tol))
}

/// Empirical test of `limsup C_{D_n} ⊂ C_D`.
///
/// Selections `f_n ∈ C_{D_n}` are followed over an index plan up to `n_max`.
/// A selection is convergent when its last quarter has diameter at most
/// `tol`; its tail centroid must then lie within `tol` of `C_D`.
pub fn pk_usc_test_with<T: Scalar>(
    seq: &PerturbationSequence<T>,
    config: &PkConfig<T>,
) -> Result<StabilityReport<T>> {
    if !(config.radius > T::zero()) {
        return Err(Error::RadiusNonpositive);
    }
    if !(config.tol > T::zero()) {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let limit_set = solution_set_of(seq.limit())?;
    let indices = index_plan(seq.clamp_index(config.n_max), config.index_samples);
    if indices.is_empty() {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let sets = crate::perturbations::solve_members(seq, &indices);
    let boundedness = boundedness_from_sets(&indices, &sets)?;
    for s in &sets {
        if let Err(e) = s {
            if !matches!(e.root(), Error::UnboundedBelow) {
                return Err(e.clone());
            }
        }
    }
    let minimal_values = Series::new(
        indices.clone(),
        sets.iter()
            .map(|s| s.as_ref().map_or(T::neg_infinity(), |s| s.minimal_value))
            .collect(),
    );

    let mut selections = Vec::new();
    let mut witness = None;
    match &config.source {
        MemberSource::Exact => {
            if config.rules.is_empty() {
                return Err(Error::InvalidParameter(
                    "at least one selection rule is required".into(),
                ));
            }
            for rule in &config.rules {
                let points: Vec<Option<Vec<T>>> = sets
                    .par_iter()
                    .map(|s| match s {
                        Ok(set) => match select(set, rule, config.radius) {
                            Ok(p) => Ok(Some(p)),
                            Err(Error::EmptyIntersection) => Ok(None),
                            Err(e) => Err(e),
                        },
                        Err(_) => Ok(None),
                    })
                    .collect::<Result<Vec<_>>>()?;
                let (trace, w) =
                    trace_selection(rule.name().to_string(), &indices, &points, &limit_set, config.tol)?;
                selections.push(trace);
                witness = witness.or(w);
            }
        }
        MemberSource::Certified { schedule } => {
            schedule.validate()?;
            let shared = default_start(seq.limit());
            let runs = indices
                .par_iter()
                .map(|&n| -> Result<(Vec<T>, T)> {
                    let member = seq.member(n)?;
                    let start = member.constraint().project(&shared);
                    let eps: T = schedule.at(n);
                    let r = projected_gradient(&member, &start, eps, CERTIFIED_MAX_ITERS)
                        .map_err(Error::at(n))?;
                    if r.certificate == GapCertificate::Uncertified {
                        return Err(Error::at(n)(Error::CertificationUnavailable));
                    }
                    Ok((r.point, r.certified_gap))
                })
                .collect::<Result<Vec<_>>>()?;
            let points: Vec<Option<Vec<T>>> = runs.iter().map(|(p, _)| Some(p.clone())).collect();
            let (mut trace, w) =
                trace_selection("certified".to_string(), &indices, &points, &limit_set, config.tol)?;
            trace.gaps = Some(Series::new(
                indices.clone(),
                runs.iter().map(|(_, g)| *g).collect(),
            ));
            selections.push(trace);
            witness = witness.or(w);
        }
    }

    let verdict = if let Some(w) = witness {
        Verdict::Inconsistent { witness: Box::new(w) }
    } else if !boundedness.is_bounded() {
        Verdict::NoConvergentSelection {
            reason: "minimizers escape (local boundedness probe)".into(),
        }
    } else if !selections.iter().any(|s| s.convergent) {
        Verdict::NoConvergentSelection {
            reason: "no selection passed the Cauchy tail test".into(),
        }
    } else {
        Verdict::Consistent
    };
    Ok(StabilityReport {
        verdict,
        limit_set,
        minimal_values,
        selections,
        bound_series: None,
        boundedness: Some(boundedness),
        parameters: StabilityParameters {
            radius: config.radius,
            tol: config.tol,
            n_max: config.n_max,
            index_samples: config.index_samples,
            rules: config.rules.clone(),
            source: config.source.clone(),
            tail_fraction: TAIL_FRACTION,
        },
    })
}

/// `m(D_n)` through the cheapest sound route.
fn member_minimal_value<T: Scalar>(p: &ConvexProblem<T>) -> Result<T> {
    match minimal_value(p) {
        Err(Error::UnsupportedStructure(_)) => Ok(solution_set_of(p)?.minimal_value),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ContinuityReport<T> {
    #[serde(with = "ext_real")]
    pub limit_value: T,
    pub member_values: Series<T>,
    /// `|m(D_n) − m(D)|`.
    pub gaps: Series<T>,
    /// Least-squares slope of `log gap` against `log n` (positive gaps only).
    #[serde(with = "ext_real_opt", default)]
    pub fitted_rate: Option<T>,
    #[serde(with = "ext_real")]
    pub last_quarter_max: T,
    #[serde(with = "ext_real")]
    pub tol: T,
    pub converged: bool,
}

fn log_log_slope<T: Scalar>(indices: &[usize], values: &[T]) -> Option<T> {
    let pts: Vec<(f64, f64)> = indices
        .iter()
        .zip(values)
        .filter(|(_, v)| v.is_finite() && **v > T::zero())
        .map(|(&n, v)| ((n as f64).ln(), v.to_f64_lossy().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(T::lit(sxy / sxx))
}

/// `|m(D_n) − m(D)|` over the index plan up to `n_max`, with a fitted
/// log-log rate; converged when the last-quarter maximum is at most `tol`.
pub fn minimal_value_continuity<T: Scalar>(
    seq: &PerturbationSequence<T>,
    n_max: usize,
    tol: T,
) -> Result<ContinuityReport<T>> {
    let limit_value = member_minimal_value(seq.limit())?;
    let indices = index_plan(seq.clamp_index(n_max), MAX_INDEX_SAMPLES);
    if indices.is_empty() {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let values = indices
        .par_iter()
        .map(|&n| member_minimal_value(&seq.member(n)?).map_err(Error::at(n)))
        .collect::<Result<Vec<T>>>()?;
    let gaps: Vec<T> = values.iter().map(|&m| (m - limit_value).abs()).collect();
    let start = tail_start(gaps.len());
    let last_quarter_max = gaps[start..].iter().copied().fold(T::zero(), T::max);
    Ok(ContinuityReport {
        limit_value,
        fitted_rate: log_log_slope(&indices, &gaps),
        member_values: Series::new(indices.clone(), values),
        gaps: Series::new(indices, gaps),
        last_quarter_max,
        tol,
        converged: last_quarter_max <= tol,
    })
}

/// Checks `dist(f_n, C_D) ≤ √(4ε_n(R)/μ) + 1e−8` for every rule and index
/// from `n₀`, after verifying `C_D ∪ ⋃_{n ≥ n₀} C_{D_n} ⊂ B(0, R)`.
pub fn qg_bound_verify<T: Scalar>(
    seq: &PerturbationSequence<T>,
    certificate: &GrowthCertificate<T>,
    radius: T,
    n_max: usize,
    rules: &[SelectionRule<T>],
) -> Result<StabilityReport<T>> {
    if !(radius > T::zero()) {
        return Err(Error::RadiusNonpositive);
    }
    if rules.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one selection rule is required".into(),
        ));
    }
    if !certificate.covers(radius) {
        return Err(Error::HypothesisViolated(
            "growth certificate does not cover the ball B(0, R)".into(),
        ));
    }
    let limit_set = solution_set_of(seq.limit())?;
    if !(limit_set.max_norm() <= radius) {
        return Err(Error::HypothesisViolated(format!(
            "C_D is not contained in B(0, R): sup norm {} > {}",
            limit_set.max_norm(),
            radius
        )));
    }
    let indices = index_plan(seq.clamp_index(n_max), MAX_INDEX_SAMPLES);
    if indices.is_empty() {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let sets = crate::perturbations::solve_members(seq, &indices);
    let boundedness = boundedness_from_sets(&indices, &sets)?;
    if !boundedness.is_bounded() {
        return Err(Error::HypothesisViolated(
            "local boundedness probe reports escaping minimizers".into(),
        ));
    }
    let sets = sets.into_iter().collect::<Result<Vec<_>>>()?;
    // n₀: first index from which every member's solution set lies in B(0, R)
    let first_ok = sets
        .iter()
        .rposition(|s| !(s.max_norm() <= radius))
        .map_or(0, |i| i + 1);
    if first_ok == sets.len() {
        return Err(Error::HypothesisViolated(format!(
            "C_{{D_n}} leaves B(0, {radius}) at the last tested index"
        )));
    }
    let indices = indices[first_ok..].to_vec();
    let sets = &sets[first_ok..];

    let method = if seq.limit().is_quadratic() {
        GapMethod::ExactTrustRegion
    } else {
        GapMethod::GridOracle
    };
    let eps = indices
        .par_iter()
        .map(|&n| {
            let member = seq.member(n)?;
            uniform_gap_between(&member, seq.limit(), radius, method).map_err(Error::at(n))
        })
        .collect::<Result<Vec<T>>>()?;
    let bound: Vec<T> = eps
        .iter()
        .map(|&e| {
            if certificate.flat {
                T::zero()
            } else {
                (T::lit(4.0) * e / certificate.mu).sqrt()
            }
        })
        .collect();
    let slack = T::lit(BOUND_SLACK);

    let mut selections = Vec::new();
    let mut worst = vec![T::zero(); indices.len()];
    let mut violations = 0;
    let mut witness = None;
    for rule in rules {
        let points = sets
            .par_iter()
            .map(|s| select(s, rule, radius))
            .collect::<Result<Vec<_>>>()?;
        let mut dists = Vec::with_capacity(points.len());
        for (k, p) in points.iter().enumerate() {
            let d = distance_to(&limit_set, p)?.value;
            if d > bound[k] + slack {
                violations += 1;
                witness.get_or_insert_with(|| Witness {
                    rule: rule.name().to_string(),
                    indices: vec![indices[k]],
                    points: vec![p.clone()],
                    limit: p.clone(),
                    distance: d,
                    threshold: bound[k] + slack,
                    limit_set: limit_set.clone(),
                });
            }
            worst[k] = worst[k].max(d);
            dists.push(d);
        }
        let opts: Vec<Option<Vec<T>>> = points.into_iter().map(Some).collect();
        let (trace, _) = trace_selection(
            rule.name().to_string(),
            &indices,
            &opts,
            &limit_set,
            T::infinity(),
        )?;
        selections.push(SelectionTrace {
            convergent: trace.convergent,
            ..trace
        });
    }
    let ratio: Vec<T> = worst
        .iter()
        .zip(&bound)
        .map(|(&d, &b)| {
            if b > T::zero() {
                d / b
            } else if d == T::zero() {
                T::zero()
            } else {
                T::infinity()
            }
        })
        .collect();
    let minimal_values = Series::new(indices.clone(), sets.iter().map(|s| s.minimal_value).collect());
    Ok(StabilityReport {
        verdict: match witness {
            Some(w) => Verdict::Inconsistent { witness: Box::new(w) },
            None => Verdict::Consistent,
        },
        limit_set,
        minimal_values,
        selections,
        bound_series: Some(BoundSeries {
            mu: certificate.mu,
            epsilon: Series::new(indices.clone(), eps),
            bound: Series::new(indices.clone(), bound),
            distance: Series::new(indices.clone(), worst),
            ratio: Series::new(indices, ratio),
            violations,
        }),
        boundedness: Some(boundedness),
        parameters: StabilityParameters {
            radius,
            tol: slack,
            n_max,
            index_samples: MAX_INDEX_SAMPLES,
            rules: rules.to_vec(),
            source: MemberSource::Exact,
            tail_fraction: TAIL_FRACTION,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case", bound = "T: Scalar")]
pub enum HardConstraintVerdict<T> {
    /// Smallest tested radius with `m_R = inf L`; larger tested radii keep the
    /// unconstrained minimizers (`agreement` records that check).
    Stabilizable {
        #[serde(with = "ext_real")]
        r_star: T,
        agreement: bool,
    },
    MinimizationAtInfinity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct HardConstraintReport<T> {
    pub verdict: HardConstraintVerdict<T>,
    /// `inf L` (`−∞` when unbounded below).
    #[serde(with = "ext_real")]
    pub infimum: T,
    #[serde(with = "ext_real_vec")]
    pub radii: Vec<T>,
    /// `m_R = inf_{‖f‖ ≤ R} L`.
    #[serde(with = "ext_real_vec")]
    pub constrained_values: Vec<T>,
}

/// Compares `m_R = inf_{‖f‖ ≤ R} L` against `inf L` over increasing radii.
pub fn hard_constraint_analysis<T: Scalar>(
    problem: &ConvexProblem<T>,
    radii: &[T],
) -> Result<HardConstraintReport<T>> {
    if !problem.is_quadratic() || !problem.constraint().is_none() {
        return Err(Error::UnsupportedStructure(
            "hard-constraint analysis needs an unconstrained quadratic problem".into(),
        ));
    }
    if radii.is_empty() {
        return Err(Error::InvalidParameter("at least one radius is required".into()));
    }
    if radii.iter().any(|&r| !(r > T::zero())) {
        return Err(Error::RadiusNonpositive);
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "radii must be strictly increasing".into(),
        ));
    }
    let unconstrained = match solve_exact(problem) {
        Ok(s) => Some(s),
        Err(Error::UnboundedBelow) => None,
        Err(e) => return Err(e),
    };
    let infimum = unconstrained
        .as_ref()
        .map_or(T::neg_infinity(), |s| s.minimal_value);
    let d = problem.dimension();
    let balls = radii
        .iter()
        .map(|&r| problem.clone().with_constraint(ConstraintSet::ball(d, r)))
        .collect::<Result<Vec<_>>>()?;
    let constrained_values = balls.iter().map(minimal_value).collect::<Result<Vec<T>>>()?;
    let scale = infimum.abs().max(T::one());
    let attained = |m: T| infimum.is_finite() && (m - infimum).abs() <= T::tol(1e-9) * scale;
    let verdict = match constrained_values.iter().position(|&m| attained(m)) {
        None => HardConstraintVerdict::MinimizationAtInfinity,
        Some(k) => {
            let set = unconstrained.as_ref().expect("finite infimum");
            let mut agreement = true;
            for (ball, &m) in balls[k..].iter().zip(&constrained_values[k..]) {
                agreement &= attained(m);
                // the constrained minimizer (one of them, if not unique) must be unconstrained-optimal
                let q = ball.effective_quadratic().expect("quadratic");
                if let ConstraintSet::Ball { center, radius } = ball.constraint() {
                    let step = crate::solution_sets::solve_in_ball(&q, center, *radius)?;
                    agreement &= distance_to(set, &step.point)?.value
                        <= T::tol(1e-7) * norm(&step.point).max(T::one());
                }
            }
            HardConstraintVerdict::Stabilizable {
                r_star: radii[k],
                agreement,
            }
        }
    };
    Ok(HardConstraintReport {
        verdict,
        infimum,
        radii: radii.to_vec(),
        constrained_values,
    })
}

/// A regularized problem with its growth certificate and the sampled check.
#[derive(Debug, Clone)]
pub struct Stabilized<T> {
    pub problem: ConvexProblem<T>,
    pub certificate: GrowthCertificate<T>,
    pub solution: SolutionSet<T>,
    pub check: GrowthCheck<T>,
}

/// Number of sampled points in the post-check of [`regularization_stabilize`].
pub const STABILIZE_SAMPLES: usize = 500;

/// Adds `λ·(α/2)‖f‖²` and certifies quadratic growth with `μ = λα`.
///
/// An existing regularizer `λ₀·½fᵀQ₀f` is merged into `½fᵀ(λ₀Q₀ + λαI)f`;
/// the certificate keeps `μ = λα`. The growth inequality is checked at
/// [`STABILIZE_SAMPLES`] seeded points; a violation is an error.
pub fn regularization_stabilize<T: Scalar>(
    problem: &ConvexProblem<T>,
    strength: T,
    modulus: T,
    seed: u64,
) -> Result<Stabilized<T>> {
    let d = problem.dimension();
    let added = Regularizer::tikhonov(d, strength, modulus)?;
    let regularizer = match problem.regularizer() {
        None => added,
        Some(r) => Regularizer::new(
            T::one(),
            r.convexity() + strength * modulus,
            r.matrix()
                .scaled(r.strength())
                .add_scaled(T::one(), &Matrix::identity(d).scaled(strength * modulus)),
        )?,
    };
    let regularized = problem.clone().with_regularizer(regularizer)?;
    let certificate = GrowthCertificate::from_regularization(strength, modulus);
    let solution = solution_set_of(&regularized)?;
    let (set_for_check, slack) = match &solution.shape {
        SolutionShape::Singleton { .. } => (solution.clone(), T::zero()),
        SolutionShape::Sampled { points, gap } if points.len() == 1 => {
            // approximate minimizer f̂ with F(f̂) − m ≤ γ: shrink distances by
            // ‖f̂ − f⋆‖ ≤ √(2γ/μ) and allow the gap γ
            let shrink = (T::lit(2.0) * *gap / certificate.mu).sqrt();
            (solution.clone(), shrink)
        }
        _ => {
            return Err(Error::HypothesisViolated(
                "regularized problem did not produce a unique minimizer".into(),
            ))
        }
    };
    let check = if slack == T::zero() {
        check_quadratic_growth(
            &regularized,
            &set_for_check,
            &certificate,
            STABILIZE_SAMPLES,
            T::lit(5.0) * norm(&set_for_check.min_norm_point()).max(T::one()),
            seed,
        )?
    } else {
        approximate_growth_check(&regularized, &set_for_check, &certificate, slack, seed)?
    };
    if check.violations > 0 {
        return Err(Error::HypothesisViolated(format!(
            "quadratic growth with mu = {} failed at {} of {} points",
            certificate.mu, check.violations, check.samples
        )));
    }
    Ok(Stabilized {
        problem: regularized,
        certificate,
        solution,
        check,
    })
}

fn approximate_growth_check<T: Scalar>(
    problem: &ConvexProblem<T>,
    set: &SolutionSet<T>,
    cert: &GrowthCertificate<T>,
    shrink: T,
    seed: u64,
) -> Result<GrowthCheck<T>> {
    let SolutionShape::Sampled { points, gap } = &set.shape else {
        unreachable!("approximate check on a sampled set")
    };
    let center = &points[0];
    let d = problem.dimension();
    let mut rng = crate::sampling::rng(seed);
    let radius = T::lit(5.0) * norm(center).max(T::one());
    let mut violations = 0;
    let mut worst = T::infinity();
    for _ in 0..STABILIZE_SAMPLES {
        let off: Vec<T> = crate::sampling::uniform_in_ball(&mut rng, d, radius);
        let f = problem
            .constraint()
            .project(&crate::linalg::axpy(center, T::one(), &off));
        let value = problem.evaluate(&f)?;
        let dist = (distance(&f, center) - shrink).max(T::zero());
        let margin = value - set.minimal_value + *gap - cert.lower_bound(dist);
        let scale = value.abs().max(set.minimal_value.abs()).max(T::one());
        worst = worst.min(margin);
        if margin < -T::tol(1e-9) * scale {
            violations += 1;
        }
    }
    Ok(GrowthCheck {
        samples: STABILIZE_SAMPLES,
        violations,
        worst_margin: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use crate::problems::{flat_half, make_blowup_family, QuadraticLoss};

    fn quad(a: &[Vec<f64>], b: &[f64], c: f64) -> ConvexProblem<f64> {
        ConvexProblem::quadratic(
            QuadraticLoss::new(Matrix::from_rows(a).unwrap(), Vector(b.to_vec()), c).unwrap(),
        )
    }

    fn shifted(center: [f64; 2]) -> ConvexProblem<f64> {
        let c = 0.5 * (center[0] * center[0] + center[1] * center[1]);
        quad(&[vec![1.0, 0.0], vec![0.0, 1.0]], &center, c)
    }

    fn all_rules(target: &SolutionSet<f64>) -> Vec<SelectionRule<f64>> {
        vec![
            SelectionRule::MinNorm,
            SelectionRule::RandomInBall { seed: 5 },
            SelectionRule::AdversarialFarFrom {
                target: target.clone(),
                seed: 9,
            },
        ]
    }

    #[test]
    fn constant_family_is_consistent() {
        let seq = PerturbationSequence::constant(shifted([1.0, 0.0]));
        let c = solve_exact(seq.limit()).unwrap();
        let r = pk_usc_test(&seq, &all_rules(&c), 20, 5.0, 1e-6).unwrap();
        assert!(r.verdict.is_consistent());
        for s in &r.selections {
            assert!(s.distances.max() <= 1e-9);
        }
    }

    #[test]
    fn blowup_has_no_convergent_selection() {
        let seq = PerturbationSequence::blowup(DecayRule::Inverse, ConstraintSet::None).unwrap();
        let r = pk_usc_test(&seq, &[SelectionRule::MinNorm], 50, 10.0, 1e-6).unwrap();
        assert_eq!(r.verdict.label(), "NO_CONVERGENT_SELECTION");
    }

    #[test]
    fn boxed_blowup_is_consistent() {
        let rule = DecayRule::Explicit {
            values: vec![0.5, 0.1, 0.01],
        };
        let seq = PerturbationSequence::blowup(rule, ConstraintSet::interval(-1.0, 1.0)).unwrap();
        let r = pk_usc_test(&seq, &[SelectionRule::MinNorm], 3, 2.0, 1e-9).unwrap();
        assert!(r.verdict.is_consistent(), "{:?}", r.verdict);
        assert_eq!(r.selections[0].limit_estimate, Some(vec![1.0]));
    }

    #[test]
    fn wrong_limit_yields_a_rechecked_witness() {
        let seq = PerturbationSequence::constant(shifted([1.0, 0.0]))
            .with_claimed_limit(shifted([0.0, 0.0]))
            .unwrap();
        let r = pk_usc_test(&seq, &[SelectionRule::MinNorm], 8, 5.0, 1e-6).unwrap();
        let Verdict::Inconsistent { witness } = &r.verdict else {
            panic!("expected a witness, got {:?}", r.verdict)
        };
        assert!(witness.recheck().unwrap());
        let json = serde_json::to_string(&r).unwrap();
        let back: StabilityReport<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn continuity_examples() {
        let rule = DecayRule::Explicit {
            values: vec![0.5, 0.1, 0.01],
        };
        let seq = PerturbationSequence::blowup(rule, ConstraintSet::interval(-1.0, 1.0)).unwrap();
        let r = minimal_value_continuity(&seq, 3, 1e-1).unwrap();
        for (&n, &m) in r.member_values.indices.iter().zip(&r.member_values.values) {
            let eps = [0.5, 0.1, 0.01][n - 1];
            assert!((m - 0.5 * (eps - 1.0f64).powi(2)).abs() < 1e-15);
        }
        assert!(r.gaps.values.windows(2).all(|w| w[1] < w[0]));

        let seq = PerturbationSequence::blowup(DecayRule::Inverse, ConstraintSet::None).unwrap();
        let r = minimal_value_continuity(&seq, 100, 1e-6).unwrap();
        assert!(!r.converged);
        assert!(r.gaps.values.iter().all(|g: &f64| (g - 0.5).abs() < 1e-12));

        let seq = PerturbationSequence::constant(shifted([1.0, 0.0]));
        let r = minimal_value_continuity(&seq, 10, 1e-12).unwrap();
        assert!(r.converged && r.gaps.max() == 0.0);
    }

    #[test]
    fn worked_bound_instance() {
        let seq = PerturbationSequence::constant(shifted([1.1, 0.0]))
            .with_claimed_limit(shifted([1.0, 0.0]))
            .unwrap();
        let cert = crate::solution_sets::growth_constant(seq.limit(), 2.0).unwrap();
        assert_eq!(cert.mu, 1.0);
        let r = qg_bound_verify(&seq, &cert, 2.0, 1, &[SelectionRule::MinNorm]).unwrap();
        let b = r.bound_series.unwrap();
        assert!((b.distance.values[0] - 0.1).abs() < 1e-12);
        assert!((b.epsilon.values[0] - 0.305).abs() < 1e-12);
        assert!((b.bound.values[0] - 1.22f64.sqrt()).abs() < 1e-12);
        assert!((b.ratio.values[0] - 0.1 / 1.22f64.sqrt()).abs() < 1e-12);
        assert_eq!(b.violations, 0);
    }

    #[test]
    fn bound_precheck_rejects_escaping_families() {
        let seq = PerturbationSequence::constant(shifted([3.0, 0.0]));
        let cert = crate::solution_sets::growth_constant(seq.limit(), 2.0).unwrap();
        assert!(matches!(
            qg_bound_verify(&seq, &cert, 2.0, 4, &[SelectionRule::MinNorm]),
            Err(Error::HypothesisViolated(_))
        ));
    }

    #[test]
    fn hard_constraint_examples() {
        let r = hard_constraint_analysis(&shifted([1.0, 0.0]), &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(
            r.verdict,
            HardConstraintVerdict::Stabilizable {
                r_star: 1.0,
                agreement: true
            }
        );
        let r = hard_constraint_analysis(&make_blowup_family(0.01f64).unwrap(), &[1.0, 10.0, 50.0]).unwrap();
        assert_eq!(r.verdict, HardConstraintVerdict::MinimizationAtInfinity);
        for (&rad, &m) in r.radii.iter().zip(&r.constrained_values) {
            assert!((m - 0.5 * (0.01 * rad - 1.0f64).powi(2)).abs() < 1e-12);
        }
        let r = hard_constraint_analysis(&flat_half::<f64>(2), &[0.5, 1.0]).unwrap();
        assert_eq!(
            r.verdict,
            HardConstraintVerdict::Stabilizable {
                r_star: 0.5,
                agreement: true
            }
        );
    }

    #[test]
    fn regularization_examples() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let ls = ConvexProblem::quadratic(QuadraticLoss::least_squares(&x, &[1.0]).unwrap());
        let s = regularization_stabilize(&ls, 0.1, 1.0, 1).unwrap();
        let p: Vec<f64> = s.solution.min_norm_point();
        assert!((p[0] - 1.0 / 1.1).abs() < 1e-12 && p[1].abs() < 1e-15);
        assert!((s.certificate.mu - 0.1f64).abs() < 1e-15);

        let s = regularization_stabilize(&flat_half::<f64>(2), 1.0, 2.0, 2).unwrap();
        assert!(s.solution.is_singleton());
        assert_eq!(s.solution.min_norm_point(), vec![0.0, 0.0]);
        assert_eq!(s.certificate.mu, 2.0);

        let s = regularization_stabilize(&make_blowup_family(0.1f64).unwrap(), 1.0, 1.0, 3).unwrap();
        assert!((s.solution.min_norm_point()[0] - 0.1 / 1.01).abs() < 1e-12);
        assert_eq!(s.certificate.mu, 1.0);
    }

    #[test]
    fn certified_selections_match_exact_verdicts() {
        let base = shifted([0.5, -0.5]);
        let delta = crate::perturbations::QuadraticDelta::new(
            Matrix::from_diag(&[0.2, 0.1]),
            Vector(vec![0.3, 0.0]),
            0.1,
        )
        .unwrap();
        let seq = PerturbationSequence::additive(base, delta, DecayRule::Inverse).unwrap();
        let exact = pk_usc_test(&seq, &[SelectionRule::MinNorm], 100_000, 5.0, 1e-4).unwrap();
        let cfg =
            PkConfig::new(vec![SelectionRule::MinNorm], 100_000, 5.0, 1e-4).certified(DecayRule::InverseSq);
        let cert = pk_usc_test_with(&seq, &cfg).unwrap();
        assert!(exact.verdict.is_consistent(), "{:?}", exact.verdict);
        assert!(cert.verdict.is_consistent(), "{:?}", cert.verdict);
        assert!(cert.selections[0].limit_distance.unwrap() <= 1e-4);
    }
}
