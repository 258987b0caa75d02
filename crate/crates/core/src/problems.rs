//! Admissible convex losses over R^d: quadratic forms and black-box oracles,
//! with an optional hard constraint and an optional quadratic regularizer.
//!
//! The effective objective is
//!
//! ```text
//! F(f) = loss(f) + λ · ½ fᵀQf + ι_K(f)
//! ```
//!
//! where `ι_K` is `0` on the constraint set and `+∞` outside it.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, distance, dot, norm, sym_eigen, Matrix, Vector};
use crate::sampling;
use crate::scalar::Scalar;

/// Relative PSD tolerance on the smallest eigenvalue.
pub const PSD_RTOL: f64 = 1e-10;
/// Relative symmetry tolerance: `‖A − Aᵀ‖_max ≤ 1e−12 ‖A‖_max`.
pub const SYMMETRY_RTOL: f64 = 1e-12;

fn check_symmetric<T: Scalar>(m: &Matrix<T>) -> Result<()> {
    let asym = m.asymmetry();
    if asym > T::tol(SYMMETRY_RTOL) * m.max_abs() {
        return Err(Error::NotSymmetric {
            asymmetry: asym.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Smallest eigenvalue of a symmetric matrix, checked against `floor` with
/// the relative PSD tolerance.
fn check_lower_spectrum<T: Scalar>(m: &Matrix<T>, floor: T) -> Result<()> {
    let eig = sym_eigen(m);
    let min = eig.values.first().copied().unwrap_or(T::zero());
    let max = eig.values.last().copied().unwrap_or(T::zero());
    if min - floor < -T::tol(PSD_RTOL) * max.abs().max(T::one()) {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: (min - floor).to_f64_lossy(),
        });
    }
    Ok(())
}

/// `L(f) = ½ fᵀAf − bᵀf + c` with `A` symmetric positive semidefinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticLoss<T> {
    hessian: Matrix<T>,
    linear: Vector<T>,
    offset: T,
}

impl<T: Scalar> QuadraticLoss<T> {
    pub fn new(hessian: Matrix<T>, linear: Vector<T>, offset: T) -> Result<Self> {
        if !hessian.is_square() {
            return Err(Error::InvalidParameter("Hessian must be square".into()));
        }
        if linear.len() != hessian.rows() {
            return Err(Error::DimensionMismatch {
                expected: hessian.rows(),
                found: linear.len(),
            });
        }
        if !offset.is_finite() || linear.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient".into()));
        }
        check_symmetric(&hessian)?;
        check_lower_spectrum(&hessian, T::zero())?;
        Ok(QuadraticLoss {
            hessian,
            linear,
            offset,
        })
    }

    /// Least squares `½‖Xw − y‖²`, i.e. `A = XᵀX`, `b = Xᵀy`, `c = ½‖y‖²`.
    pub fn least_squares(x: &Matrix<T>, y: &[T]) -> Result<Self> {
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                found: y.len(),
            });
        }
        let xt = x.transpose();
        let a = xt.mul(x);
        let b = x.tr_mul_vec(y);
        Self::new(a, Vector(b), T::lit(0.5) * dot(y, y))
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn hessian(&self) -> &Matrix<T> {
        &self.hessian
    }

    pub fn linear(&self) -> &Vector<T> {
        &self.linear
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    pub fn value(&self, f: &[T]) -> T {
        T::lit(0.5) * self.hessian.quad_form(f) - dot(&self.linear, f) + self.offset
    }

    pub fn gradient(&self, f: &[T]) -> Vec<T> {
        axpy(&self.hessian.mul_vec(f), -T::one(), &self.linear)
    }
}

/// Hard constraint `K` entering the objective as the indicator `ι_K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSet<T> {
    None,
    Ball { center: Vector<T>, radius: T },
    Box { lower: Vector<T>, upper: Vector<T> },
}

impl<T: Scalar> ConstraintSet<T> {
    /// Ball centered at the origin.
    pub fn ball(d: usize, radius: T) -> Self {
        ConstraintSet::Ball {
            center: Vector::zeros(d),
            radius,
        }
    }

    pub fn interval(lower: T, upper: T) -> Self {
        ConstraintSet::Box {
            lower: Vector(vec![lower]),
            upper: Vector(vec![upper]),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, ConstraintSet::None)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            ConstraintSet::None => Ok(()),
            ConstraintSet::Ball { center, radius } => {
                if center.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: center.len(),
                    });
                }
                if !(*radius > T::zero()) || !radius.is_finite() {
                    return Err(Error::RadiusNonpositive);
                }
                Ok(())
            }
            ConstraintSet::Box { lower, upper } => {
                for v in [lower, upper] {
                    if v.len() != d {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: v.len(),
                        });
                    }
                }
                if lower.iter().zip(upper.iter()).any(|(l, u)| !(l <= u)) {
                    return Err(Error::InvalidParameter(
                        "box requires lower <= upper componentwise".into(),
                    ));
                }
                if lower.iter().chain(upper.iter()).any(|x| !x.is_finite()) {
                    return Err(Error::InvalidParameter("box bounds must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Membership with a relative slack of `1e-12` so that projected points
    /// are never rejected because of rounding.
    pub fn contains(&self, f: &[T]) -> bool {
        let slack = T::tol(1e-12);
        match self {
            ConstraintSet::None => true,
            ConstraintSet::Ball { center, radius } => distance(f, center) <= *radius * (T::one() + slack),
            ConstraintSet::Box { lower, upper } => {
                f.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .all(|(&x, (&l, &u))| {
                        x >= l - slack * l.abs().max(T::one()) && x <= u + slack * u.abs().max(T::one())
                    })
            }
        }
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, f: &[T]) -> Vec<T> {
        match self {
            ConstraintSet::None => f.to_vec(),
            ConstraintSet::Ball { center, radius } => {
                let off: Vec<T> = f.iter().zip(center.iter()).map(|(&x, &c)| x - c).collect();
                let r = norm(&off);
                if r <= *radius {
                    f.to_vec()
                } else {
                    axpy(center, *radius / r, &off)
                }
            }
            ConstraintSet::Box { lower, upper } => f
                .iter()
                .zip(lower.iter().zip(upper.iter()))
                .map(|(&x, (&l, &u))| x.max(l).min(u))
                .collect(),
        }
    }

    /// `sup_{f ∈ K} ‖f‖` (infinite without a constraint).
    pub fn max_norm(&self) -> T {
        match self {
            ConstraintSet::None => T::infinity(),
            ConstraintSet::Ball { center, radius } => norm(center) + *radius,
            ConstraintSet::Box { lower, upper } => {
                let far: Vec<T> = lower
                    .iter()
                    .zip(upper.iter())
                    .map(|(l, u)| l.abs().max(u.abs()))
                    .collect();
                norm(&far)
            }
        }
    }

    /// Minimum-norm element of `g + N_K(f)`, the normal cone of `K` at `f`.
    /// Its norm certifies optimality gaps of strongly convex objectives on `K`.
    pub fn min_norm_residual(&self, g: &[T], f: &[T]) -> Vec<T> {
        match self {
            ConstraintSet::None => g.to_vec(),
            ConstraintSet::Ball { center, radius } => {
                let off: Vec<T> = f.iter().zip(center.iter()).map(|(&x, &c)| x - c).collect();
                let r = norm(&off);
                if r < *radius * (T::one() - T::tol(1e-12)) || r == T::zero() {
                    return g.to_vec();
                }
                let u: Vec<T> = off.iter().map(|&x| x / r).collect();
                let t = (-dot(g, &u)).max(T::zero());
                axpy(g, t, &u)
            }
            ConstraintSet::Box { lower, upper } => g
                .iter()
                .zip(f)
                .zip(lower.iter().zip(upper.iter()))
                .map(|((&gi, &x), (&l, &u))| {
                    let at_lower = x <= l;
                    let at_upper = x >= u;
                    match (at_lower, at_upper) {
                        (true, true) => T::zero(),
                        (true, false) => gi.min(T::zero()),
                        (false, true) => gi.max(T::zero()),
                        (false, false) => gi,
                    }
                })
                .collect(),
        }
    }
}

/// Quadratic regularizer `R(f) = ½ fᵀQf` with `Q − αI ⪰ 0`, entering the
/// objective with strength `λ`; `λR` is then `λα`-strongly convex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regularizer<T> {
    strength: T,
    modulus: T,
    matrix: Matrix<T>,
}

impl<T: Scalar> Regularizer<T> {
    pub fn new(strength: T, modulus: T, matrix: Matrix<T>) -> Result<Self> {
        if !(strength > T::zero()) || !strength.is_finite() {
            return Err(Error::InvalidParameter(
                "regularization strength must be > 0".into(),
            ));
        }
        if !(modulus > T::zero()) || !modulus.is_finite() {
            return Err(Error::InvalidParameter(
                "strong convexity modulus must be > 0".into(),
            ));
        }
        if !matrix.is_square() {
            return Err(Error::InvalidParameter(
                "regularizer matrix must be square".into(),
            ));
        }
        check_symmetric(&matrix)?;
        check_lower_spectrum(&matrix, modulus)?;
        Ok(Regularizer {
            strength,
            modulus,
            matrix,
        })
    }

    /// Tikhonov regularizer `λ · (α/2)‖f‖²`.
    pub fn tikhonov(d: usize, strength: T, modulus: T) -> Result<Self> {
        Self::new(strength, modulus, Matrix::identity(d).scaled(modulus))
    }

    pub fn strength(&self) -> T {
        self.strength
    }

    pub fn modulus(&self) -> T {
        self.modulus
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    /// Strong convexity constant `λα` of `λR`.
    pub fn convexity(&self) -> T {
        self.strength * self.modulus
    }

    /// `λR(f)`
    pub fn value(&self, f: &[T]) -> T {
        self.strength * T::lit(0.5) * self.matrix.quad_form(f)
    }

    /// `∇(λR)(f)`
    pub fn gradient(&self, f: &[T]) -> Vec<T> {
        let q = self.matrix.mul_vec(f);
        q.into_iter().map(|x| self.strength * x).collect()
    }
}

pub type ValueFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
pub type SubgradientFn<T> = Arc<dyn Fn(&[T]) -> Vec<T> + Send + Sync>;

/// Whether the library checks an oracle's convexity claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityAttestation {
    /// Accepted as stated.
    Trusted,
    /// Sampled with the convexity probe at construction.
    Verify,
}

/// Black-box convex loss. Callbacks must be reentrant.
#[derive(Clone)]
pub struct OracleLoss<T> {
    pub value: ValueFn<T>,
    pub subgradient: SubgradientFn<T>,
    pub attestation: ConvexityAttestation,
}

impl<T> OracleLoss<T> {
    pub fn new(
        value: impl Fn(&[T]) -> T + Send + Sync + 'static,
        subgradient: impl Fn(&[T]) -> Vec<T> + Send + Sync + 'static,
        attestation: ConvexityAttestation,
    ) -> Self {
        OracleLoss {
            value: Arc::new(value),
            subgradient: Arc::new(subgradient),
            attestation,
        }
    }
}

impl<T> fmt::Debug for OracleLoss<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleLoss")
            .field("attestation", &self.attestation)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum Loss<T> {
    Quadratic(QuadraticLoss<T>),
    Oracle(OracleLoss<T>),
}

/// Number of sampled triples used to verify an oracle's convexity claim.
pub const CONVEXITY_PROBE_TRIALS: usize = 1000;
pub const CONVEXITY_PROBE_RADIUS: f64 = 10.0;
pub const CONVEXITY_PROBE_SEED: u64 = 0x00C0_FFEE;

/// An admissible convex objective over R^d. Immutable once built.
#[derive(Debug, Clone)]
pub struct ConvexProblem<T> {
    dimension: usize,
    loss: Loss<T>,
    constraint: ConstraintSet<T>,
    regularizer: Option<Regularizer<T>>,
}

impl<T: Scalar> ConvexProblem<T> {
    pub fn new(
        dimension: usize,
        loss: Loss<T>,
        constraint: ConstraintSet<T>,
        regularizer: Option<Regularizer<T>>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if let Loss::Quadratic(q) = &loss {
            if q.dim() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: q.dim(),
                });
            }
        }
        constraint.validate(dimension)?;
        if let Some(r) = &regularizer {
            if r.matrix().rows() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: r.matrix().rows(),
                });
            }
        }
        let problem = ConvexProblem {
            dimension,
            loss,
            constraint,
            regularizer,
        };
        let probe_point = problem.constraint.project(&vec![T::zero(); dimension]);
        if !problem.evaluate(&probe_point)?.is_finite() {
            return Err(Error::ImproperProblem);
        }
        if let Loss::Oracle(o) = &problem.loss {
            if o.attestation == ConvexityAttestation::Verify {
                convexity_probe(
                    &problem,
                    CONVEXITY_PROBE_TRIALS,
                    T::lit(CONVEXITY_PROBE_RADIUS),
                    CONVEXITY_PROBE_SEED,
                    1e-9,
                )?;
            }
        }
        Ok(problem)
    }

    /// Unconstrained, unregularized quadratic.
    pub fn quadratic(loss: QuadraticLoss<T>) -> Self {
        ConvexProblem {
            dimension: loss.dim(),
            loss: Loss::Quadratic(loss),
            constraint: ConstraintSet::None,
            regularizer: None,
        }
    }

    pub fn oracle(dimension: usize, oracle: OracleLoss<T>) -> Result<Self> {
        Self::new(dimension, Loss::Oracle(oracle), ConstraintSet::None, None)
    }

    pub fn with_constraint(self, constraint: ConstraintSet<T>) -> Result<Self> {
        Self::new(self.dimension, self.loss, constraint, self.regularizer)
    }

    pub fn with_regularizer(self, regularizer: Regularizer<T>) -> Result<Self> {
        Self::new(self.dimension, self.loss, self.constraint, Some(regularizer))
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn loss(&self) -> &Loss<T> {
        &self.loss
    }

    pub fn constraint(&self) -> &ConstraintSet<T> {
        &self.constraint
    }

    pub fn regularizer(&self) -> Option<&Regularizer<T>> {
        self.regularizer.as_ref()
    }

    pub fn is_quadratic(&self) -> bool {
        matches!(self.loss, Loss::Quadratic(_))
    }

    /// Loss plus regularizer folded into one quadratic, when the loss is one.
    pub fn effective_quadratic(&self) -> Option<QuadraticLoss<T>> {
        let Loss::Quadratic(q) = &self.loss else {
            return None;
        };
        let mut q = q.clone();
        if let Some(r) = &self.regularizer {
            q.hessian = q.hessian.add_scaled(r.strength(), r.matrix());
        }
        Some(q)
    }

    fn check_point(&self, f: &[T]) -> Result<()> {
        if f.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: f.len(),
            });
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("point has non-finite entries".into()));
        }
        Ok(())
    }

    /// `F(f)` as an extended real: `+∞` outside the constraint set.
    pub fn evaluate(&self, f: &[T]) -> Result<T> {
        self.check_point(f)?;
        if !self.constraint.contains(f) {
            return Ok(T::infinity());
        }
        let base = match &self.loss {
            Loss::Quadratic(q) => q.value(f),
            Loss::Oracle(o) => {
                let v = (o.value)(f);
                if !v.is_finite() {
                    return Err(Error::OracleFailure(format!(
                        "value callback returned {v} inside the constraint set"
                    )));
                }
                v
            }
        };
        Ok(match &self.regularizer {
            Some(r) => base + r.value(f),
            None => base,
        })
    }

    /// A subgradient of the objective without the constraint indicator.
    pub fn subgradient(&self, f: &[T]) -> Result<Vec<T>> {
        self.check_point(f)?;
        let mut g = match &self.loss {
            Loss::Quadratic(q) => q.gradient(f),
            Loss::Oracle(o) => {
                let g = (o.subgradient)(f);
                if g.len() != self.dimension {
                    return Err(Error::OracleFailure(format!(
                        "subgradient callback returned length {}",
                        g.len()
                    )));
                }
                if g.iter().any(|x| !x.is_finite()) {
                    return Err(Error::OracleFailure(
                        "subgradient callback returned non-finite entries".into(),
                    ));
                }
                g
            }
        };
        if let Some(r) = &self.regularizer {
            g = crate::linalg::add(&g, &r.gradient(f));
        }
        Ok(g)
    }

    /// Scale used for relative tolerances on objective values.
    pub fn value_scale(&self, f: &[T]) -> T {
        self.evaluate(f)
            .ok()
            .filter(|v| v.is_finite())
            .map_or(T::one(), |v| v.abs().max(T::one()))
    }
}

/// Sampled convexity check: `F(tf + (1−t)g) ≤ tF(f) + (1−t)F(g) + tol·scale`
/// over `trials` random triples drawn in `[−radius, radius]^d` and projected
/// onto the constraint set.
pub fn convexity_probe<T: Scalar>(
    problem: &ConvexProblem<T>,
    trials: usize,
    radius: T,
    seed: u64,
    tol: f64,
) -> Result<()> {
    let d = problem.dimension();
    let mut rng = sampling::rng(seed);
    let lo = vec![-radius; d];
    let hi = vec![radius; d];
    for trial in 0..trials {
        let f = problem
            .constraint()
            .project(&sampling::uniform_in_box(&mut rng, &lo, &hi));
        let g = problem
            .constraint()
            .project(&sampling::uniform_in_box(&mut rng, &lo, &hi));
        let t: T = sampling::uniform(&mut rng, 0.0, 1.0);
        let mid: Vec<T> = f
            .iter()
            .zip(&g)
            .map(|(&a, &b)| t * a + (T::one() - t) * b)
            .collect();
        let (lf, lg, lm) = (
            problem.evaluate(&f)?,
            problem.evaluate(&g)?,
            problem.evaluate(&mid)?,
        );
        if !lf.is_finite() || !lg.is_finite() {
            continue;
        }
        let scale = T::one().max(lf.abs()).max(lg.abs());
        let chord = t * lf + (T::one() - t) * lg;
        if lm > chord + T::tol(tol) * scale {
            return Err(Error::NotConvex(format!(
                "trial {trial}: F(mid) = {lm} exceeds chord {chord}"
            )));
        }
    }
    Ok(())
}

/// The one-dimensional family `L_ε(x) = ½(εx − 1)²`, i.e. `A = [ε²]`,
/// `b = [ε]`, `c = ½`. Its minimizer `1/ε` escapes to infinity as `ε ↓ 0`.
pub fn make_blowup_family<T: Scalar>(eps: T) -> Result<ConvexProblem<T>> {
    if !(eps > T::zero()) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("ε must be > 0, got {eps}")));
    }
    let loss = QuadraticLoss::new(Matrix::from_diag(&[eps * eps]), Vector(vec![eps]), T::lit(0.5))?;
    Ok(ConvexProblem::quadratic(loss))
}

/// The constant loss `L_0 ≡ ½` on R^d, the pointwise limit of `L_ε`.
pub fn flat_half<T: Scalar>(d: usize) -> ConvexProblem<T> {
    let loss =
        QuadraticLoss::new(Matrix::zeros(d, d), Vector::zeros(d), T::lit(0.5)).expect("zero Hessian is PSD");
    ConvexProblem::quadratic(loss)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad(a: &[Vec<f64>], b: &[f64], c: f64) -> ConvexProblem<f64> {
        ConvexProblem::quadratic(
            QuadraticLoss::new(Matrix::from_rows(a).unwrap(), Vector(b.to_vec()), c).unwrap(),
        )
    }

    #[test]
    fn blowup_family_values() {
        let p = make_blowup_family(0.1f64).unwrap();
        assert!(p.evaluate(&[10.0]).unwrap().abs() < 1e-15);
        assert_eq!(p.evaluate(&[0.0]).unwrap(), 0.5);
        let p1 = make_blowup_family(1.0f64).unwrap();
        assert_eq!(p1.evaluate(&[1.0]).unwrap(), 0.0);
        assert!(make_blowup_family(0.0f64).is_err());
        assert!(make_blowup_family(-1.0f64).is_err());
    }

    #[test]
    fn outside_ball_is_infinite() {
        let p = quad(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.0, 0.0], 0.0)
            .with_constraint(ConstraintSet::ball(2, 1.0))
            .unwrap();
        assert_eq!(p.evaluate(&[2.0, 0.0]).unwrap(), f64::INFINITY);
        assert_eq!(p.evaluate(&[1.0, 0.0]).unwrap(), 0.5);
    }

    #[test]
    fn subgradient_examples() {
        let p = quad(&[vec![2.0, 0.0], vec![0.0, 0.0]], &[2.0, 0.0], 0.0);
        assert_eq!(p.subgradient(&[0.0, 0.0]).unwrap(), vec![-2.0, 0.0]);

        let p = make_blowup_family(0.5f64).unwrap();
        assert_eq!(p.subgradient(&[2.0]).unwrap(), vec![0.0]);

        let p = quad(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.0, 0.0], 0.0)
            .with_regularizer(Regularizer::new(1.0, 1.0, Matrix::identity(2)).unwrap())
            .unwrap();
        assert_eq!(p.subgradient(&[1.0, 1.0]).unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let p = make_blowup_family(1.0f64).unwrap();
        assert_eq!(
            p.evaluate(&[1.0, 2.0]),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );
        assert!(p.subgradient(&[]).is_err());
    }

    #[test]
    fn rejects_indefinite_and_asymmetric_hessians() {
        let bad = QuadraticLoss::new(Matrix::from_diag(&[1.0, -1e-3]), Vector(vec![0.0, 0.0]), 0.0);
        assert!(matches!(bad, Err(Error::NotPositiveSemidefinite { .. })));
        let asym = QuadraticLoss::new(
            Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap(),
            Vector(vec![0.0, 0.0]),
            0.0,
        );
        assert!(matches!(asym, Err(Error::NotSymmetric { .. })));
        // rounding-level negativity is accepted
        assert!(QuadraticLoss::new(Matrix::from_diag(&[1.0, -1e-14]), Vector(vec![0.0, 0.0]), 0.0).is_ok());
    }

    #[test]
    fn regularizer_needs_modulus_below_spectrum() {
        assert!(Regularizer::new(1.0, 2.0, Matrix::identity(2)).is_err());
        assert!(Regularizer::new(1.0, 1.0, Matrix::from_diag(&[1.0, 3.0])).is_ok());
        assert!(Regularizer::new(0.0, 1.0, Matrix::identity(2)).is_err());
    }

    #[test]
    fn box_validation() {
        let p = make_blowup_family(1.0f64).unwrap();
        assert!(p
            .clone()
            .with_constraint(ConstraintSet::interval(1.0, -1.0))
            .is_err());
        assert!(p.with_constraint(ConstraintSet::interval(-1.0, 1.0)).is_ok());
    }

    #[test]
    fn oracle_convexity_is_verified() {
        let concave = OracleLoss::new(
            |x: &[f64]| -x[0] * x[0],
            |x: &[f64]| vec![-2.0 * x[0]],
            ConvexityAttestation::Verify,
        );
        assert!(matches!(
            ConvexProblem::oracle(1, concave),
            Err(Error::NotConvex(_))
        ));
        let abs = OracleLoss::new(
            |x: &[f64]| x[0].abs(),
            |x: &[f64]| vec![x[0].signum()],
            ConvexityAttestation::Verify,
        );
        assert!(ConvexProblem::oracle(1, abs).is_ok());
    }

    #[test]
    fn oracle_failure_inside_constraint() {
        let nan = OracleLoss::new(
            |x: &[f64]| if x[0] > 1.0 { f64::NAN } else { 0.0 },
            |_: &[f64]| vec![0.0],
            ConvexityAttestation::Trusted,
        );
        let p = ConvexProblem::oracle(1, nan).unwrap();
        assert!(matches!(p.evaluate(&[2.0]), Err(Error::OracleFailure(_))));
    }

    #[test]
    fn normal_cone_residual_on_box_and_ball() {
        let bx = ConstraintSet::interval(-1.0f64, 1.0);
        // at the upper bound, a descent direction pointing outward is absorbed
        assert_eq!(bx.min_norm_residual(&[-3.0], &[1.0]), vec![0.0]);
        assert_eq!(bx.min_norm_residual(&[3.0], &[1.0]), vec![3.0]);
        let ball = ConstraintSet::ball(2, 1.0);
        let r: Vec<f64> = ball.min_norm_residual(&[-2.0, 1.0], &[1.0, 0.0]);
        assert!((r[0]).abs() < 1e-15 && (r[1] - 1.0).abs() < 1e-15);
    }
}
