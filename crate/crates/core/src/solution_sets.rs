//! Minimizer sets `C = argmin F`, their minimal values, distances to them,
//! single-valued selections from them and quadratic-growth certificates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, distance, dot, norm, sub, sym_eigen, Matrix, SymEigen, Vector};
use crate::problems::{ConstraintSet, ConvexProblem, QuadraticLoss};
use crate::sampling;
use crate::scalar::Scalar;
use crate::serde_ext::{ext_real, ext_real_opt};
use crate::trust_region::{solve_trust_region, ZERO_MODE_RTOL};

/// Range test for `b ∈ range(A)`: least-squares residual relative to `max(‖b‖, 1)`.
pub const RANGE_RESIDUAL_RTOL: f64 = 1e-9;

/// Geometry of a minimizer set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
#[serde(bound = "T: Scalar")]
pub enum SolutionShape<T> {
    /// `anchor + span(basis)`, basis columns orthonormal, anchor of minimum norm.
    Affine {
        anchor: Vector<T>,
        basis: Matrix<T>,
    },
    Singleton {
        point: Vector<T>,
    },
    /// Axis-aligned box `[lower, upper]` (constrained flat coordinates).
    Boxed {
        lower: Vector<T>,
        upper: Vector<T>,
    },
    /// Finite cloud of points, each within `gap` of the minimal value.
    Sampled {
        points: Vec<Vector<T>>,
        #[serde(with = "ext_real")]
        gap: T,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SolutionSet<T> {
    pub shape: SolutionShape<T>,
    /// `m = inf F` (for `Sampled`, the best value found).
    pub minimal_value: T,
}

impl<T: Scalar> SolutionSet<T> {
    pub fn singleton(point: Vec<T>, minimal_value: T) -> Self {
        SolutionSet {
            shape: SolutionShape::Singleton { point: Vector(point) },
            minimal_value,
        }
    }

    pub fn sampled(points: Vec<Vec<T>>, gap: T, minimal_value: T) -> Self {
        SolutionSet {
            shape: SolutionShape::Sampled {
                points: points.into_iter().map(Vector).collect(),
                gap,
            },
            minimal_value,
        }
    }

    pub fn dim(&self) -> usize {
        match &self.shape {
            SolutionShape::Affine { anchor, .. } => anchor.len(),
            SolutionShape::Singleton { point } => point.len(),
            SolutionShape::Boxed { lower, .. } => lower.len(),
            SolutionShape::Sampled { points, .. } => points.first().map_or(0, |p| p.len()),
        }
    }

    /// Number of flat directions (0 unless `Affine`).
    pub fn flat_dimension(&self) -> usize {
        match &self.shape {
            SolutionShape::Affine { basis, .. } => basis.cols(),
            _ => 0,
        }
    }

    pub fn is_singleton(&self) -> bool {
        matches!(self.shape, SolutionShape::Singleton { .. })
    }

    /// `sup_{f ∈ C} ‖f‖`; infinite for affine sets with flat directions.
    pub fn max_norm(&self) -> T {
        match &self.shape {
            SolutionShape::Affine { anchor, basis } => {
                if basis.cols() == 0 {
                    anchor.norm()
                } else {
                    T::infinity()
                }
            }
            SolutionShape::Singleton { point } => point.norm(),
            SolutionShape::Boxed { lower, upper } => {
                let far: Vec<T> = lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(l, u)| l.abs().max(u.abs()))
                    .collect();
                norm(&far)
            }
            SolutionShape::Sampled { points, .. } => points.iter().fold(T::zero(), |m, p| m.max(p.norm())),
        }
    }

    /// Canonical element: the minimum-norm point of the set.
    pub fn min_norm_point(&self) -> Vec<T> {
        match &self.shape {
            SolutionShape::Affine { anchor, .. } => anchor.0.clone(),
            SolutionShape::Singleton { point } => point.0.clone(),
            SolutionShape::Boxed { lower, upper } => lower
                .iter()
                .zip(upper.iter())
                .map(|(&l, &u)| T::zero().max(l).min(u))
                .collect(),
            SolutionShape::Sampled { points, .. } => points
                .iter()
                .min_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
                .map(|p| p.0.clone())
                .unwrap_or_default(),
        }
    }
}

/// Distance from a point to a solution set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Distance<T> {
    #[serde(with = "ext_real")]
    pub value: T,
    /// True for sampled sets, where the minimum over the sample only bounds
    /// the distance to the true set from above.
    pub upper_bound: bool,
}

/// Solves quadratic problems exactly.
///
/// * unconstrained: pseudoinverse anchor plus the Hessian null space;
/// * ball: trust-region subproblem, unique solutions only;
/// * box: clamping, for one-dimensional or diagonal (separable) Hessians.
pub fn solve_exact<T: Scalar>(problem: &ConvexProblem<T>) -> Result<SolutionSet<T>> {
    let q = problem.effective_quadratic().ok_or_else(|| {
        Error::UnsupportedStructure("exact solve needs a quadratic loss; use the solvers module".into())
    })?;
    match problem.constraint() {
        ConstraintSet::None => solve_unconstrained(&q),
        ConstraintSet::Ball { center, radius } => {
            let sol = solve_in_ball(&q, center, *radius)?;
            if !sol.unique {
                return Err(Error::HardCaseDegeneracy);
            }
            Ok(SolutionSet::singleton(sol.point, sol.value))
        }
        ConstraintSet::Box { lower, upper } => solve_in_box(&q, lower, upper),
    }
}

/// Minimal value of a quadratic problem, including the degenerate
/// ball-constrained cases that `solve_exact` refuses to represent.
pub fn minimal_value<T: Scalar>(problem: &ConvexProblem<T>) -> Result<T> {
    let q = problem
        .effective_quadratic()
        .ok_or_else(|| Error::UnsupportedStructure("minimal value needs a quadratic loss".into()))?;
    match problem.constraint() {
        ConstraintSet::Ball { center, radius } => Ok(solve_in_ball(&q, center, *radius)?.value),
        _ => Ok(solve_exact(problem)?.minimal_value),
    }
}

pub(crate) fn null_threshold<T: Scalar>(eig: &SymEigen<T>) -> T {
    let lmax = eig.values.last().copied().unwrap_or(T::zero()).max(T::zero());
    T::tol(ZERO_MODE_RTOL) * lmax
}

fn solve_unconstrained<T: Scalar>(q: &QuadraticLoss<T>) -> Result<SolutionSet<T>> {
    let d = q.dim();
    let eig = sym_eigen(q.hessian());
    let thr = null_threshold(&eig);
    let b = q.linear();
    let bt = eig.to_eigen_coords(b);
    let mut coords = vec![T::zero(); d];
    let mut null_cols = Vec::new();
    for i in 0..d {
        if eig.values[i] > thr {
            coords[i] = bt[i] / eig.values[i];
        } else {
            null_cols.push(eig.vector(i));
        }
    }
    let anchor = eig.from_eigen_coords(&coords);
    let residual = norm(&sub(&q.hessian().mul_vec(&anchor), b));
    if residual > T::tol(RANGE_RESIDUAL_RTOL) * b.norm().max(T::one()) {
        return Err(Error::UnboundedBelow);
    }
    let minimal_value = q.offset() - T::lit(0.5) * dot(b, &anchor);
    let shape = if null_cols.is_empty() {
        SolutionShape::Singleton {
            point: Vector(anchor),
        }
    } else {
        SolutionShape::Affine {
            anchor: Vector(anchor),
            basis: Matrix::from_columns(d, &null_cols),
        }
    };
    Ok(SolutionSet { shape, minimal_value })
}

/// `min q(f)` over `‖f − center‖ ≤ radius` through the trust-region kernel.
pub(crate) fn solve_in_ball<T: Scalar>(
    q: &QuadraticLoss<T>,
    center: &[T],
    radius: T,
) -> Result<crate::trust_region::TrustRegionStep<T>> {
    let eig = sym_eigen(q.hessian());
    let g = sub(&q.hessian().mul_vec(center), q.linear());
    let mut step = solve_trust_region(&eig, &g, radius)?;
    step.point = crate::linalg::add(center, &step.point);
    step.value = q.value(&step.point);
    Ok(step)
}

fn solve_in_box<T: Scalar>(q: &QuadraticLoss<T>, lower: &[T], upper: &[T]) -> Result<SolutionSet<T>> {
    let d = q.dim();
    let a = q.hessian();
    let scale = a.max_abs();
    let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || a.get(i, j).abs() <= T::tol(1e-14) * scale));
    if !diagonal {
        return Err(Error::UnsupportedStructure(
            "exact box-constrained solve needs a separable (diagonal) Hessian".into(),
        ));
    }
    let thr = T::tol(ZERO_MODE_RTOL) * (0..d).fold(T::zero(), |m, i| m.max(a.get(i, i)));
    let b = q.linear();
    let b_tol = T::tol(1e-12) * b.iter().fold(T::one(), |m, x| m.max(x.abs()));
    let mut lo = Vec::with_capacity(d);
    let mut hi = Vec::with_capacity(d);
    for i in 0..d {
        let h = a.get(i, i);
        let (l, u) = (lower[i], upper[i]);
        if h > thr {
            let x = (b[i] / h).max(l).min(u);
            lo.push(x);
            hi.push(x);
        } else if b[i] > b_tol {
            lo.push(u);
            hi.push(u);
        } else if b[i] < -b_tol {
            lo.push(l);
            hi.push(l);
        } else {
            lo.push(l);
            hi.push(u);
        }
    }
    let minimal_value = q.value(&lo);
    let shape = if lo == hi {
        SolutionShape::Singleton { point: Vector(lo) }
    } else {
        SolutionShape::Boxed {
            lower: Vector(lo),
            upper: Vector(hi),
        }
    };
    Ok(SolutionSet { shape, minimal_value })
}

fn check_dim<T: Scalar>(set: &SolutionSet<T>, f: &[T]) -> Result<()> {
    if set.dim() != f.len() {
        return Err(Error::DimensionMismatch {
            expected: set.dim(),
            found: f.len(),
        });
    }
    Ok(())
}

/// `dist(f, C) = inf_{g ∈ C} ‖f − g‖`.
pub fn distance_to<T: Scalar>(set: &SolutionSet<T>, f: &[T]) -> Result<Distance<T>> {
    check_dim(set, f)?;
    let exact = |value| Distance {
        value,
        upper_bound: false,
    };
    Ok(match &set.shape {
        SolutionShape::Affine { anchor, basis } => {
            let r = sub(f, anchor);
            let coeff = basis.tr_mul_vec(&r);
            let proj = basis.mul_vec(&coeff);
            exact(norm(&sub(&r, &proj)))
        }
        SolutionShape::Singleton { point } => exact(distance(f, point)),
        SolutionShape::Boxed { lower, upper } => {
            let clamped: Vec<T> = f
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(&x, (&l, &u))| x.max(l).min(u))
                .collect();
            exact(distance(f, &clamped))
        }
        SolutionShape::Sampled { points, .. } => Distance {
            value: points.iter().map(|p| distance(f, p)).fold(T::infinity(), T::min),
            upper_bound: true,
        },
    })
}

/// Single-valued selection rules `C ↦ f ∈ C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
#[serde(bound = "T: Scalar")]
pub enum SelectionRule<T> {
    MinNorm,
    RandomInBall {
        seed: u64,
    },
    /// Heuristic maximizer of `dist(target, ·)` over `C ∩ B(0, R)`.
    AdversarialFarFrom {
        target: SolutionSet<T>,
        seed: u64,
    },
}

impl<T> SelectionRule<T> {
    pub fn name(&self) -> &'static str {
        match self {
            SelectionRule::MinNorm => "min_norm",
            SelectionRule::RandomInBall { .. } => "random_in_ball",
            SelectionRule::AdversarialFarFrom { .. } => "adversarial",
        }
    }
}

pub const ADVERSARIAL_DIRECTIONS: usize = 256;
pub const ADVERSARIAL_ASCENT_ITERS: usize = 32;
const REJECTION_CAP: usize = 10_000;

/// Picks one element of `set` by `rule`. Singletons return their point for
/// every rule; the other rules need `set ∩ B(0, R)` to be nonempty.
pub fn select<T: Scalar>(set: &SolutionSet<T>, rule: &SelectionRule<T>, ball_radius: T) -> Result<Vec<T>> {
    if let SolutionShape::Singleton { point } = &set.shape {
        return Ok(point.0.clone());
    }
    match rule {
        SelectionRule::MinNorm => Ok(set.min_norm_point()),
        SelectionRule::RandomInBall { seed } => random_in_ball(set, ball_radius, *seed),
        SelectionRule::AdversarialFarFrom { target, seed } => {
            if target.dim() != set.dim() {
                return Err(Error::DimensionMismatch {
                    expected: set.dim(),
                    found: target.dim(),
                });
            }
            adversarial(set, target, ball_radius, *seed)
        }
    }
}

/// Radius of the coefficient ball `{t : ‖anchor + Bt‖ ≤ R}` (anchor ⟂ span B).
fn coefficient_radius<T: Scalar>(anchor: &[T], radius: T) -> Result<T> {
    let rho2 = radius * radius - dot(anchor, anchor);
    if rho2 < T::zero() {
        return Err(Error::EmptyIntersection);
    }
    Ok(rho2.sqrt())
}

fn random_in_ball<T: Scalar>(set: &SolutionSet<T>, radius: T, seed: u64) -> Result<Vec<T>> {
    let mut rng = sampling::rng(seed);
    match &set.shape {
        SolutionShape::Affine { anchor, basis } => {
            let rho = coefficient_radius(anchor, radius)?;
            let t = sampling::uniform_in_ball(&mut rng, basis.cols(), rho);
            Ok(axpy(anchor, T::one(), &basis.mul_vec(&t)))
        }
        SolutionShape::Boxed { lower, upper } => {
            let fallback = set.min_norm_point();
            if norm(&fallback) > radius {
                return Err(Error::EmptyIntersection);
            }
            for _ in 0..REJECTION_CAP {
                let x = sampling::uniform_in_box(&mut rng, lower, upper);
                if norm(&x) <= radius {
                    return Ok(x);
                }
            }
            Ok(fallback)
        }
        SolutionShape::Sampled { points, .. } => {
            let inside: Vec<&Vector<T>> = points.iter().filter(|p| p.norm() <= radius).collect();
            if inside.is_empty() {
                return Err(Error::EmptyIntersection);
            }
            let k = rand::Rng::random_range(&mut rng, 0..inside.len());
            Ok(inside[k].0.clone())
        }
        SolutionShape::Singleton { point } => Ok(point.0.clone()),
    }
}

fn adversarial<T: Scalar>(
    set: &SolutionSet<T>,
    target: &SolutionSet<T>,
    radius: T,
    seed: u64,
) -> Result<Vec<T>> {
    let mut rng = sampling::rng(seed);
    let score = |x: &[T]| distance_to(target, x).map(|d| d.value);
    match &set.shape {
        SolutionShape::Affine { anchor, basis } => {
            let rho = coefficient_radius(anchor, radius)?;
            let k = basis.cols();
            let point_of = |t: &[T]| axpy(anchor, T::one(), &basis.mul_vec(t));
            let mut best_t = vec![T::zero(); k];
            let mut best = score(anchor)?;
            if k == 0 || rho == T::zero() {
                return Ok(anchor.0.clone());
            }
            // dist to a convex set is convex, so maxima sit on the sphere ‖t‖ = ρ
            for _ in 0..ADVERSARIAL_DIRECTIONS {
                let t: Vec<T> = sampling::unit_direction::<T>(&mut rng, k)
                    .into_iter()
                    .map(|x| x * rho)
                    .collect();
                let s = score(&point_of(&t))?;
                if s > best {
                    best = s;
                    best_t = t;
                }
            }
            let mut step = rho / T::lit(4.0);
            for _ in 0..ADVERSARIAL_ASCENT_ITERS {
                let mut improved = false;
                for i in 0..k {
                    for sign in [T::one(), -T::one()] {
                        let mut t = best_t.clone();
                        t[i] = t[i] + sign * step;
                        let nt = norm(&t);
                        if nt > rho {
                            t.iter_mut().for_each(|x| *x = *x * rho / nt);
                        }
                        let s = score(&point_of(&t))?;
                        if s > best {
                            best = s;
                            best_t = t;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step = step / T::lit(2.0);
                }
            }
            Ok(point_of(&best_t))
        }
        SolutionShape::Boxed { lower, upper } => {
            let start = set.min_norm_point();
            if norm(&start) > radius {
                return Err(Error::EmptyIntersection);
            }
            let d = lower.len();
            let mut candidates = vec![start];
            if d <= 8 {
                for mask in 0..(1usize << d) {
                    let v: Vec<T> = (0..d)
                        .map(|i| if mask >> i & 1 == 1 { upper[i] } else { lower[i] })
                        .collect();
                    candidates.push(v);
                }
            }
            for _ in 0..ADVERSARIAL_DIRECTIONS {
                candidates.push(sampling::uniform_in_box(&mut rng, lower, upper));
            }
            let mut best_x = Vec::new();
            let mut best = T::neg_infinity();
            for c in candidates {
                if norm(&c) <= radius {
                    let s = score(&c)?;
                    if s > best {
                        best = s;
                        best_x = c;
                    }
                }
            }
            let mut steps: Vec<T> = lower
                .iter()
                .zip(upper.iter())
                .map(|(&l, &u)| (u - l) / T::lit(4.0))
                .collect();
            for _ in 0..ADVERSARIAL_ASCENT_ITERS {
                let mut improved = false;
                for i in 0..d {
                    for sign in [T::one(), -T::one()] {
                        let mut x = best_x.clone();
                        x[i] = (x[i] + sign * steps[i]).max(lower[i]).min(upper[i]);
                        if norm(&x) > radius {
                            continue;
                        }
                        let s = score(&x)?;
                        if s > best {
                            best = s;
                            best_x = x;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    steps.iter_mut().for_each(|s| *s = *s / T::lit(2.0));
                }
            }
            Ok(best_x)
        }
        SolutionShape::Sampled { points, .. } => {
            let mut best: Option<(T, &Vector<T>)> = None;
            for p in points.iter().filter(|p| p.norm() <= radius) {
                let s = score(p)?;
                if best.is_none_or(|(b, _)| s > b) {
                    best = Some((s, p));
                }
            }
            best.map(|(_, p)| p.0.clone()).ok_or(Error::EmptyIntersection)
        }
        SolutionShape::Singleton { point } => Ok(point.0.clone()),
    }
}

/// How a quadratic-growth constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthProvenance {
    /// Smallest positive eigenvalue of the effective Hessian.
    Spectral,
    /// `μ = λα` from a strongly convex regularizer.
    Regularization,
    Estimated,
}

/// `F(f) − m ≥ (μ/2) dist(f, C)²` on the ball of radius `valid_radius`
/// (`None`: on all of R^d).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GrowthCertificate<T> {
    /// `+∞` for flat certificates.
    #[serde(with = "ext_real")]
    pub mu: T,
    #[serde(with = "ext_real_opt", default)]
    pub valid_radius: Option<T>,
    pub provenance: GrowthProvenance,
    /// Objective constant on its domain: every feasible point is a minimizer
    /// and the growth inequality holds vacuously.
    pub flat: bool,
}

impl<T: Scalar> GrowthCertificate<T> {
    pub fn from_regularization(strength: T, modulus: T) -> Self {
        GrowthCertificate {
            mu: strength * modulus,
            valid_radius: None,
            provenance: GrowthProvenance::Regularization,
            flat: false,
        }
    }

    pub fn covers(&self, radius: T) -> bool {
        self.valid_radius.is_none_or(|r| r >= radius)
    }

    /// Right-hand side `(μ/2) dist²`, zero-safe for flat certificates.
    pub fn lower_bound(&self, dist: T) -> T {
        if self.flat {
            if dist == T::zero() {
                T::zero()
            } else {
                T::infinity()
            }
        } else {
            T::lit(0.5) * self.mu * dist * dist
        }
    }
}

/// Quadratic-growth constant for a problem.
///
/// Quadratic losses use the spectral route; oracle losses need a regularizer
/// and get `μ = λα`.
pub fn growth_constant<T: Scalar>(problem: &ConvexProblem<T>, radius: T) -> Result<GrowthCertificate<T>> {
    if !(radius > T::zero()) {
        return Err(Error::RadiusNonpositive);
    }
    let Some(q) = problem.effective_quadratic() else {
        return match problem.regularizer() {
            Some(r) => Ok(GrowthCertificate::from_regularization(r.strength(), r.modulus())),
            None => Err(Error::UnsupportedStructure(
                "growth constant of an oracle loss needs a strongly convex regularizer".into(),
            )),
        };
    };
    let eig = sym_eigen(q.hessian());
    let thr = null_threshold(&eig);
    let positive: Vec<T> = eig.values.iter().copied().filter(|&l| l > thr).collect();
    let linear_zero = q.linear().iter().all(|&x| x == T::zero());
    if positive.is_empty() {
        if problem.constraint().is_none() || linear_zero {
            return Ok(GrowthCertificate {
                mu: T::infinity(),
                valid_radius: None,
                provenance: GrowthProvenance::Spectral,
                flat: true,
            });
        }
        return Err(Error::UnsupportedStructure(
            "linear objective on a constraint set has no spectral growth constant".into(),
        ));
    }
    if !problem.constraint().is_none() && positive.len() < eig.dim() {
        return Err(Error::UnsupportedStructure(
            "spectral growth on a constraint set needs a positive definite Hessian".into(),
        ));
    }
    Ok(GrowthCertificate {
        mu: positive[0],
        valid_radius: None,
        provenance: GrowthProvenance::Spectral,
        flat: false,
    })
}

/// Outcome of sampling the growth inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GrowthCheck<T> {
    pub samples: usize,
    pub violations: usize,
    /// `min (F(f) − m − (μ/2)dist²)` over the samples, before tolerance.
    #[serde(with = "ext_real")]
    pub worst_margin: T,
}

/// Samples `F(f) − m ≥ (μ/2) dist(f, C)² − 1e−9·scale` at points within
/// `sample_radius` of the canonical minimizer, projected onto the constraint set.
pub fn check_quadratic_growth<T: Scalar>(
    problem: &ConvexProblem<T>,
    set: &SolutionSet<T>,
    cert: &GrowthCertificate<T>,
    samples: usize,
    sample_radius: T,
    seed: u64,
) -> Result<GrowthCheck<T>> {
    let d = problem.dimension();
    let center = set.min_norm_point();
    let mut rng = sampling::rng(seed);
    let mut violations = 0;
    let mut worst = T::infinity();
    for _ in 0..samples {
        let off: Vec<T> = sampling::uniform_in_ball(&mut rng, d, sample_radius);
        let f = problem.constraint().project(&axpy(&center, T::one(), &off));
        let value = problem.evaluate(&f)?;
        let dist = distance_to(set, &f)?.value;
        let margin = value - set.minimal_value - cert.lower_bound(dist);
        let scale = value.abs().max(set.minimal_value.abs()).max(T::one());
        worst = worst.min(margin);
        if margin < -T::tol(1e-9) * scale {
            violations += 1;
        }
    }
    Ok(GrowthCheck {
        samples,
        violations,
        worst_margin: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{flat_half, make_blowup_family, Regularizer};

    fn quad(a: &[Vec<f64>], b: &[f64], c: f64) -> ConvexProblem<f64> {
        ConvexProblem::quadratic(
            QuadraticLoss::new(Matrix::from_rows(a).unwrap(), Vector(b.to_vec()), c).unwrap(),
        )
    }

    fn line_x_equals_one() -> SolutionSet<f64> {
        SolutionSet {
            shape: SolutionShape::Affine {
                anchor: Vector(vec![1.0, 0.0]),
                basis: Matrix::from_columns(2, &[vec![0.0, 1.0]]),
            },
            minimal_value: 0.0,
        }
    }

    #[test]
    fn least_squares_with_kernel_is_affine() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let q = QuadraticLoss::least_squares(&x, &[1.0]).unwrap();
        let set: SolutionSet<f64> = solve_exact(&ConvexProblem::quadratic(q)).unwrap();
        assert_eq!(set.minimal_value, 0.0);
        match &set.shape {
            SolutionShape::Affine { anchor, basis } => {
                assert_eq!(anchor.0, vec![1.0, 0.0]);
                assert_eq!(basis.cols(), 1);
                assert!((basis.get(1, 0).abs() - 1.0).abs() < 1e-15);
            }
            other => panic!("expected affine set, got {other:?}"),
        }
    }

    #[test]
    fn blowup_minimizer_is_inverse_epsilon() {
        let set = solve_exact(&make_blowup_family(0.5f64).unwrap()).unwrap();
        assert_eq!(
            set.shape,
            SolutionShape::Singleton {
                point: Vector(vec![2.0])
            }
        );
        assert!(set.minimal_value.abs() < 1e-15);
        let set = solve_exact(&make_blowup_family(0.01f64).unwrap()).unwrap();
        let p = set.min_norm_point()[0];
        assert!((p - 100.0).abs() < 1e-9);
    }

    #[test]
    fn box_constrained_blowup_sits_on_the_bound() {
        let p = make_blowup_family(0.5f64)
            .unwrap()
            .with_constraint(ConstraintSet::interval(-1.0, 1.0))
            .unwrap();
        let set = solve_exact(&p).unwrap();
        assert_eq!(
            set.shape,
            SolutionShape::Singleton {
                point: Vector(vec![1.0])
            }
        );
        assert!((set.minimal_value - 0.125).abs() < 1e-15);
    }

    #[test]
    fn flat_problem_on_box_is_the_whole_box() {
        let p = flat_half::<f64>(1)
            .with_constraint(ConstraintSet::interval(-1.0, 1.0))
            .unwrap();
        let set = solve_exact(&p).unwrap();
        assert_eq!(
            set.shape,
            SolutionShape::Boxed {
                lower: Vector(vec![-1.0]),
                upper: Vector(vec![1.0])
            }
        );
        assert_eq!(set.minimal_value, 0.5);
    }

    #[test]
    fn unbounded_below_is_an_error() {
        let p = quad(&[vec![1.0, 0.0], vec![0.0, 0.0]], &[0.0, 1.0], 0.0);
        assert_eq!(solve_exact(&p), Err(Error::UnboundedBelow));
    }

    #[test]
    fn ball_hard_case_is_refused() {
        // flat objective inside a ball: every point of the ball is optimal
        let p = flat_half::<f64>(2)
            .with_constraint(ConstraintSet::ball(2, 1.0))
            .unwrap();
        assert_eq!(solve_exact(&p), Err(Error::HardCaseDegeneracy));
        assert_eq!(minimal_value(&p).unwrap(), 0.5);
    }

    #[test]
    fn ball_constrained_quadratic() {
        let p = quad(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[3.0, 0.0], 0.0)
            .with_constraint(ConstraintSet::ball(2, 1.0))
            .unwrap();
        let set = solve_exact(&p).unwrap();
        let x = set.min_norm_point();
        assert!((x[0] - 1.0).abs() < 1e-12 && x[1].abs() < 1e-12);
        assert!((set.minimal_value + 2.5).abs() < 1e-12);
    }

    #[test]
    fn oracle_losses_are_unsupported() {
        use crate::problems::{ConvexityAttestation, OracleLoss};
        let o = OracleLoss::new(
            |x: &[f64]| x[0].abs(),
            |x: &[f64]| vec![x[0].signum()],
            ConvexityAttestation::Trusted,
        );
        let p = ConvexProblem::oracle(1, o).unwrap();
        assert!(matches!(solve_exact(&p), Err(Error::UnsupportedStructure(_))));
    }

    #[test]
    fn distance_examples() {
        let line = line_x_equals_one();
        assert_eq!(distance_to(&line, &[3.0, 4.0]).unwrap().value, 2.0);
        assert_eq!(distance_to(&line, &[1.0, 7.0]).unwrap().value, 0.0);
        let s = SolutionSet::singleton(vec![2.0], 0.0);
        assert_eq!(distance_to(&s, &[2.0]).unwrap().value, 0.0);
        assert!(distance_to(&s, &[2.0, 1.0]).is_err());
        let sampled = SolutionSet::sampled(vec![vec![0.0], vec![3.0]], 0.1, 0.0);
        let d = distance_to(&sampled, &[2.0]).unwrap();
        assert!(d.upper_bound && d.value == 1.0);
    }

    #[test]
    fn selection_examples() {
        let line = line_x_equals_one();
        assert_eq!(
            select(&line, &SelectionRule::MinNorm, 5.0).unwrap(),
            vec![1.0, 0.0]
        );

        let target = SolutionSet::singleton(vec![1.0, 0.0], 0.0);
        let rule = SelectionRule::AdversarialFarFrom { target, seed: 11 };
        let x = select(&line, &rule, 5.0).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1].abs() - 24f64.sqrt()).abs() < 1e-6);

        let single = SolutionSet::singleton(vec![3.0], 0.0);
        for rule in [SelectionRule::MinNorm, SelectionRule::RandomInBall { seed: 1 }] {
            assert_eq!(select(&single, &rule, 0.5).unwrap(), vec![3.0]);
        }

        assert_eq!(
            select(&line, &SelectionRule::RandomInBall { seed: 2 }, 0.5),
            Err(Error::EmptyIntersection)
        );
        let r = select(&line, &SelectionRule::RandomInBall { seed: 2 }, 2.0).unwrap();
        assert!(norm(&r) <= 2.0 + 1e-12 && distance_to(&line, &r).unwrap().value < 1e-12);
    }

    #[test]
    fn growth_constant_examples() {
        let p = quad(&[vec![0.0, 0.0], vec![0.0, 2.0]], &[0.0, 0.0], 0.0);
        let c = growth_constant(&p, 1.0).unwrap();
        assert_eq!(c.mu, 2.0);
        assert!(!c.flat);

        let flat = flat_half::<f64>(2);
        let c = growth_constant(&flat, 1.0).unwrap();
        assert!(c.flat && c.mu.is_infinite());

        use crate::problems::{ConvexityAttestation, OracleLoss};
        let o = OracleLoss::new(
            |x: &[f64]| x[0].abs(),
            |x: &[f64]| vec![x[0].signum()],
            ConvexityAttestation::Trusted,
        );
        let p = ConvexProblem::oracle(1, o.clone())
            .unwrap()
            .with_regularizer(Regularizer::tikhonov(1, 0.5, 2.0).unwrap())
            .unwrap();
        let c = growth_constant(&p, 1.0).unwrap();
        assert_eq!(c.mu, 1.0);
        assert_eq!(c.provenance, GrowthProvenance::Regularization);

        let bare = ConvexProblem::oracle(1, o).unwrap();
        assert!(matches!(
            growth_constant(&bare, 1.0),
            Err(Error::UnsupportedStructure(_))
        ));
    }

    #[test]
    fn growth_inequality_holds_on_flat_directions() {
        let p = quad(&[vec![0.0, 0.0], vec![0.0, 2.0]], &[0.0, 2.0], 0.0);
        let set = solve_exact(&p).unwrap();
        let cert = growth_constant(&p, 1.0).unwrap();
        let check = check_quadratic_growth(&p, &set, &cert, 500, 10.0, 3).unwrap();
        assert_eq!(check.violations, 0);
        assert!(check.worst_margin > -1e-12);
    }
}
