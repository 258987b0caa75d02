//! Projected first-order methods returning ε-minimizers with a certified
//! upper bound on `F(point) − m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, norm_sq, sym_eigen, SymEigen};
use crate::problems::{ConvexProblem, Loss};
use crate::scalar::Scalar;
use crate::serde_ext::ext_real;
use crate::solution_sets::{minimal_value, null_threshold};

/// Where a gap bound comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapCertificate {
    /// `F(point) − m` against the exact minimal value.
    ExactMinimum,
    /// `‖s‖²/(2μ)` for a subgradient `s` of `F + ι_K`, or a cutting-plane
    /// lower bound on `m`; both need strong convexity.
    StrongConvexity,
    Uncertified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct EpsMinimizer<T> {
    pub point: Vec<T>,
    #[serde(with = "ext_real")]
    pub value: T,
    /// Upper bound on `F(point) − m`; `+∞` when uncertified.
    #[serde(with = "ext_real")]
    pub certified_gap: T,
    pub iterations: usize,
    pub converged: bool,
    pub certificate: GapCertificate,
}

impl<T: Scalar> EpsMinimizer<T> {
    /// Turns an uncertified result into `CertificationUnavailable`.
    pub fn require_certified(self) -> Result<Self> {
        if self.certificate == GapCertificate::Uncertified {
            Err(Error::CertificationUnavailable)
        } else {
            Ok(self)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// `a` in the diminishing oracle step `a/√k`.
    pub step_scale: T,
    /// Cuts kept for the cutting-plane lower bound.
    pub bundle_size: usize,
}

impl<T: Scalar> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            step_scale: T::one(),
            bundle_size: 12,
        }
    }
}

/// Shared deterministic start: the origin projected onto the constraint set.
pub fn default_start<T: Scalar>(problem: &ConvexProblem<T>) -> Vec<T> {
    problem
        .constraint()
        .project(&vec![T::zero(); problem.dimension()])
}

pub fn projected_gradient<T: Scalar>(
    problem: &ConvexProblem<T>,
    start: &[T],
    target_gap: T,
    max_iters: usize,
) -> Result<EpsMinimizer<T>> {
    projected_gradient_with(problem, start, target_gap, max_iters, &SolverOptions::default())
}

/// Iterates `f ← Π_K(f − η g)` until the certified gap is at most `target_gap`.
///
/// Quadratics use `η = 1/L`. Oracle losses use `η_k = a/√k`; with a strongly
/// convex regularizer the reported point is the best of the iterates and the
/// minimizers of a cutting-plane model, whose dual value bounds `m` from below.
pub fn projected_gradient_with<T: Scalar>(
    problem: &ConvexProblem<T>,
    start: &[T],
    target_gap: T,
    max_iters: usize,
    options: &SolverOptions<T>,
) -> Result<EpsMinimizer<T>> {
    if start.len() != problem.dimension() {
        return Err(Error::DimensionMismatch {
            expected: problem.dimension(),
            found: start.len(),
        });
    }
    if !(target_gap > T::zero()) {
        return Err(Error::InvalidParameter("target gap must be positive".into()));
    }
    if !problem.constraint().contains(start) {
        return Err(Error::InfeasibleStart);
    }
    if problem.is_quadratic() {
        quadratic_descent(problem, start, target_gap, max_iters)
    } else {
        oracle_descent(problem, start, target_gap, max_iters, options)
    }
}

/// Gap bound `‖s‖²/(2μ)` with `s` the least-norm element of `∂F(f) + N_K(f)`
/// (exact for differentiable `F`).
fn residual_bound<T: Scalar>(problem: &ConvexProblem<T>, f: &[T], mu: T) -> Result<T> {
    let g = problem.subgradient(f)?;
    let s = problem.constraint().min_norm_residual(&g, f);
    Ok(norm_sq(&s) / (T::lit(2.0) * mu))
}

fn quadratic_descent<T: Scalar>(
    problem: &ConvexProblem<T>,
    start: &[T],
    target_gap: T,
    max_iters: usize,
) -> Result<EpsMinimizer<T>> {
    let q = problem.effective_quadratic().expect("quadratic loss");
    let eig = sym_eigen(q.hessian());
    let lmax = eig.values.last().copied().unwrap_or(T::zero());
    let step = if lmax > T::zero() {
        T::one() / lmax
    } else {
        T::one()
    };

    let exact_m = match minimal_value(problem) {
        Ok(m) => Some(m),
        Err(Error::UnsupportedStructure(_)) => None,
        Err(e) => return Err(e),
    };
    let lmin = eig.values[0];
    let strong_mu = (lmin > null_threshold(&eig)).then_some(lmin);
    let certificate = match (exact_m, strong_mu) {
        (Some(_), _) => GapCertificate::ExactMinimum,
        (None, Some(_)) => GapCertificate::StrongConvexity,
        (None, None) => GapCertificate::Uncertified,
    };
    let gap_at = |f: &[T], value: T| -> Result<T> {
        Ok(match (exact_m, strong_mu) {
            (Some(m), _) => (value - m).max(T::zero()),
            (None, Some(mu)) => residual_bound(problem, f, mu)?,
            (None, None) => T::infinity(),
        })
    };

    let mut f = start.to_vec();
    let mut value = problem.evaluate(&f)?;
    let mut gap = gap_at(&f, value)?;
    let mut iterations = 0;
    while gap > target_gap && iterations < max_iters {
        let g = q.gradient(&f);
        f = problem.constraint().project(&axpy(&f, -step, &g));
        value = problem.evaluate(&f)?;
        gap = gap_at(&f, value)?;
        iterations += 1;
    }
    Ok(EpsMinimizer {
        point: f,
        value,
        certified_gap: gap,
        iterations,
        converged: gap <= target_gap,
        certificate,
    })
}

/// Affine minorant `x ↦ c + g·x` of the oracle part of the loss.
struct Cut<T> {
    offset: T,
    slope: Vec<T>,
    /// `M⁻¹ g` for the regularizer Hessian `M`.
    scaled: Vec<T>,
}

struct CuttingPlaneModel<T> {
    inverse: SymEigen<T>,
    cuts: Vec<Cut<T>>,
    capacity: usize,
    weights: Vec<T>,
}

const DUAL_ITERS: usize = 60;

impl<T: Scalar> CuttingPlaneModel<T> {
    fn apply_inverse(&self, g: &[T]) -> Vec<T> {
        let mut y = self.inverse.to_eigen_coords(g);
        for (yi, &l) in y.iter_mut().zip(&self.inverse.values) {
            *yi = *yi / l;
        }
        self.inverse.from_eigen_coords(&y)
    }

    fn add(&mut self, point: &[T], loss_value: T, slope: Vec<T>) {
        let scaled = self.apply_inverse(&slope);
        let offset = loss_value - dot(&slope, point);
        if self.cuts.len() == self.capacity {
            // drop the cut carrying the least weight
            let (drop, _) = self
                .weights
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap();
            self.cuts.remove(drop);
            self.weights.remove(drop);
        }
        self.cuts.push(Cut {
            offset,
            slope,
            scaled,
        });
        self.weights.push(T::zero());
    }

    /// Maximizes the dual `Σ w_k c_k − ½ ḡᵀM⁻¹ḡ` over the simplex by
    /// accelerated projected gradient. Every feasible `w` gives a valid
    /// lower bound on `min (loss + ½xᵀMx)`; returns it with the model minimizer.
    fn lower_bound(&mut self) -> (T, Vec<T>) {
        let k = self.cuts.len();
        let mut gram = vec![T::zero(); k * k];
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&self.cuts[i].slope, &self.cuts[j].scaled);
                gram[i * k + j] = v;
                gram[j * k + i] = v;
            }
        }
        let lip = (0..k)
            .map(|i| (0..k).map(|j| gram[i * k + j].abs()).sum::<T>())
            .fold(T::zero(), T::max);
        let c: Vec<T> = self.cuts.iter().map(|cut| cut.offset).collect();
        let dual = |w: &[T]| -> T {
            let mut v = dot(&c, w);
            for i in 0..k {
                for j in 0..k {
                    v = v - T::lit(0.5) * w[i] * w[j] * gram[i * k + j];
                }
            }
            v
        };
        let mut w = self.weights.clone();
        let total: T = w.iter().copied().sum();
        if total > T::zero() {
            w.iter_mut().for_each(|x| *x = *x / total);
        } else {
            w = vec![T::zero(); k];
            w[k - 1] = T::one();
        }
        if lip > T::zero() {
            let mut y = w.clone();
            let mut t = T::one();
            for _ in 0..DUAL_ITERS {
                let grad: Vec<T> = (0..k)
                    .map(|i| c[i] - (0..k).map(|j| gram[i * k + j] * y[j]).sum::<T>())
                    .collect();
                let next = project_simplex(&axpy(&y, T::one() / lip, &grad));
                let t_next = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
                let momentum = (t - T::one()) / t_next;
                y = next
                    .iter()
                    .zip(&w)
                    .map(|(&a, &b)| a + momentum * (a - b))
                    .collect();
                w = next;
                t = t_next;
            }
        }
        let bound = dual(&w);
        let mut x = vec![T::zero(); self.inverse.dim()];
        for (cut, &wi) in self.cuts.iter().zip(&w) {
            x = axpy(&x, -wi, &cut.scaled);
        }
        self.weights = w;
        (bound, x)
    }
}

/// Euclidean projection onto the probability simplex (sort-based).
fn project_simplex<T: Scalar>(v: &[T]) -> Vec<T> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumulative = T::zero();
    let mut theta = T::zero();
    for (i, &ui) in u.iter().enumerate() {
        cumulative = cumulative + ui;
        let candidate = (cumulative - T::one()) / T::from_count(i + 1);
        if ui - candidate > T::zero() {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

fn oracle_descent<T: Scalar>(
    problem: &ConvexProblem<T>,
    start: &[T],
    target_gap: T,
    max_iters: usize,
    options: &SolverOptions<T>,
) -> Result<EpsMinimizer<T>> {
    let Loss::Oracle(oracle) = problem.loss() else {
        unreachable!("oracle descent on a quadratic loss")
    };
    let constraint = problem.constraint();
    let mut model = problem.regularizer().map(|r| CuttingPlaneModel {
        inverse: sym_eigen(&r.matrix().scaled(r.strength())),
        cuts: Vec::new(),
        capacity: options.bundle_size.max(2),
        weights: Vec::new(),
    });
    let mu = problem.regularizer().map(|r| r.convexity());

    let mut f = start.to_vec();
    let mut best = f.clone();
    let mut best_value = problem.evaluate(&f)?;
    let mut lower = T::neg_infinity();
    let mut gap = T::infinity();
    let mut iterations = 0;

    // Evaluates `x`, records its cut and keeps the incumbent.
    let visit = |x: &[T],
                 model: &mut Option<CuttingPlaneModel<T>>,
                 best: &mut Vec<T>,
                 best_value: &mut T|
     -> Result<Vec<T>> {
        let value = problem.evaluate(x)?;
        let g = problem.subgradient(x)?;
        if let Some(model) = model.as_mut() {
            let reg = problem.regularizer().expect("model implies regularizer");
            let loss_slope = (oracle.subgradient)(x);
            model.add(x, value - reg.value(x), loss_slope);
        }
        if value < *best_value {
            *best_value = value;
            *best = x.to_vec();
        }
        Ok(g)
    };

    loop {
        let g = visit(&f, &mut model, &mut best, &mut best_value)?;
        if let (Some(m), Some(mu)) = (model.as_mut(), mu) {
            let (bound, x_model) = m.lower_bound();
            lower = lower.max(bound);
            let candidate = constraint.project(&x_model);
            visit(&candidate, &mut model, &mut best, &mut best_value)?;
            gap = (best_value - lower)
                .max(T::zero())
                .min(residual_bound(problem, &best, mu)?);
        }
        if gap <= target_gap || iterations >= max_iters {
            break;
        }
        iterations += 1;
        let eta = options.step_scale / T::from_count(iterations).sqrt();
        f = constraint.project(&axpy(&f, -eta, &g));
    }
    Ok(EpsMinimizer {
        point: best,
        value: best_value,
        certified_gap: gap,
        iterations,
        converged: gap <= target_gap,
        certificate: if mu.is_some() {
            GapCertificate::StrongConvexity
        } else {
            GapCertificate::Uncertified
        },
    })
}

/// Vanishing schedules `ε_n ↓ 0`, indexed from `n = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DecayRule {
    Inverse,
    InverseSq,
    InverseSqrt,
    Geometric {
        ratio: f64,
    },
    /// Finite list; `ε_n = values[n − 1]`.
    Explicit {
        values: Vec<f64>,
    },
}

impl DecayRule {
    /// `ε_n`; `NaN` past the end of an explicit list.
    pub fn at<T: Scalar>(&self, n: usize) -> T {
        let k = T::from_count(n);
        match self {
            DecayRule::Inverse => T::one() / k,
            DecayRule::InverseSq => T::one() / (k * k),
            DecayRule::InverseSqrt => T::one() / k.sqrt(),
            DecayRule::Geometric { ratio } => T::lit(*ratio).powf(k),
            DecayRule::Explicit { values } => n
                .checked_sub(1)
                .and_then(|i| values.get(i))
                .map_or(T::nan(), |&v| T::lit(v)),
        }
    }

    /// Last valid index for explicit lists.
    pub fn max_index(&self) -> Option<usize> {
        match self {
            DecayRule::Explicit { values } => Some(values.len()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DecayRule::Geometric { ratio } if !(*ratio > 0.0 && *ratio < 1.0) => Err(
                Error::InvalidParameter(format!("geometric ratio must lie in (0, 1), got {ratio}")),
            ),
            DecayRule::Explicit { values } => {
                if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return Err(Error::InvalidParameter(
                        "explicit schedule needs positive finite values".into(),
                    ));
                }
                if values.windows(2).any(|w| !(w[1] < w[0])) {
                    return Err(Error::InvalidParameter(
                        "explicit schedule must be strictly decreasing".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// `[ε_1, …, ε_{n_max}]` for `rule`.
pub fn vanishing_gap_schedule<T: Scalar>(n_max: usize, rule: &DecayRule) -> Result<Vec<T>> {
    if n_max < 1 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    rule.validate()?;
    if rule.max_index().is_some_and(|m| n_max > m) {
        return Err(Error::InvalidParameter(
            "n_max exceeds the explicit schedule".into(),
        ));
    }
    Ok((1..=n_max).map(|n| rule.at(n)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, Vector};
    use crate::problems::{ConstraintSet, ConvexityAttestation, OracleLoss, QuadraticLoss, Regularizer};

    fn quad(a: &[Vec<f64>], b: &[f64]) -> ConvexProblem<f64> {
        ConvexProblem::quadratic(
            QuadraticLoss::new(Matrix::from_rows(a).unwrap(), Vector(b.to_vec()), 0.0).unwrap(),
        )
    }

    #[test]
    fn half_square_from_five() {
        let p = quad(&[vec![1.0]], &[0.0]);
        let r = projected_gradient(&p, &[5.0], 1e-10, 1000).unwrap();
        assert!(r.converged && r.certified_gap <= 1e-10);
        assert!(r.point[0].abs() <= 1.5e-5);
    }

    #[test]
    fn null_space_offset_is_preserved() {
        let p = quad(&[vec![1.0, 0.0], vec![0.0, 0.0]], &[1.0, 0.0]);
        let r = projected_gradient(&p, &[0.0, 0.0], 1e-10, 1000).unwrap();
        assert!((r.point[0] - 1.0).abs() <= 1.5e-5);
        assert_eq!(r.point[1], 0.0);
        assert_eq!(r.certificate, GapCertificate::ExactMinimum);
    }

    #[test]
    fn abs_plus_ridge_oracle() {
        let o = OracleLoss::new(
            |x: &[f64]| x[0].abs(),
            |x: &[f64]| vec![if x[0] >= 0.0 { 1.0 } else { -1.0 }],
            ConvexityAttestation::Trusted,
        );
        let p = ConvexProblem::oracle(1, o)
            .unwrap()
            .with_regularizer(Regularizer::tikhonov(1, 1.0, 1.0).unwrap())
            .unwrap();
        let r = projected_gradient(&p, &[3.0], 1e-6, 10_000).unwrap();
        assert!(r.converged, "{r:?}");
        assert!(r.certified_gap <= 1e-6);
        assert!(r.point[0].abs() <= 1.42e-3);
        // the true minimum is 0 at 0
        assert!(r.value <= r.certified_gap + 1e-12);
    }

    #[test]
    fn oracle_without_regularizer_is_uncertified() {
        let o = OracleLoss::new(
            |x: &[f64]| x[0].abs(),
            |x: &[f64]| vec![x[0].signum()],
            ConvexityAttestation::Trusted,
        );
        let p = ConvexProblem::oracle(1, o).unwrap();
        let r = projected_gradient(&p, &[2.0], 1e-6, 50).unwrap();
        assert!(!r.converged && r.certified_gap.is_infinite());
        assert_eq!(r.require_certified(), Err(Error::CertificationUnavailable));
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let p = quad(&[vec![1.0]], &[0.0])
            .with_constraint(ConstraintSet::interval(-1.0, 1.0))
            .unwrap();
        assert_eq!(
            projected_gradient(&p, &[2.0], 1e-6, 10),
            Err(Error::InfeasibleStart)
        );
    }

    #[test]
    fn constrained_quadratic_reaches_the_bound() {
        let p = quad(&[vec![1.0]], &[10.0])
            .with_constraint(ConstraintSet::interval(-1.0, 1.0))
            .unwrap();
        let r = projected_gradient(&p, &[0.0], 1e-12, 100).unwrap();
        assert_eq!(r.point, vec![1.0]);
        assert!(r.converged);
    }

    #[test]
    fn schedules() {
        let s: Vec<f64> = vanishing_gap_schedule(3, &DecayRule::Inverse).unwrap();
        assert_eq!(s[0], 1.0);
        assert_eq!(s[1], 0.5);
        assert!((s[2] - 1.0 / 3.0).abs() < 1e-16);
        let s: Vec<f64> = vanishing_gap_schedule(3, &DecayRule::Geometric { ratio: 0.1 }).unwrap();
        for (x, want) in s.iter().zip([0.1, 0.01, 0.001]) {
            assert!((x - want).abs() < 1e-17);
        }
        assert_eq!(
            vanishing_gap_schedule::<f64>(1, &DecayRule::InverseSq).unwrap(),
            vec![1.0]
        );
        assert!(vanishing_gap_schedule::<f64>(0, &DecayRule::Inverse).is_err());
        assert!(vanishing_gap_schedule::<f64>(3, &DecayRule::Geometric { ratio: 1.0 }).is_err());
    }

    #[test]
    fn simplex_projection() {
        let p: Vec<f64> = project_simplex(&[0.5, 0.5, 0.5]);
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
    }
}
