//! Seeded random instances for property suites and batch verification.
//!
//! Every generator is a pure function of its seed.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sym_eigen, Matrix, Vector};
use crate::perturbations::{PerturbationSequence, QuadraticDelta};
use crate::problems::{ConstraintSet, ConvexProblem, QuadraticLoss};
use crate::sampling::{self, SeededRng};
use crate::scalar::Scalar;
use crate::solvers::DecayRule;
use rand::Rng;

/// Haar-like orthogonal matrix from Gram-Schmidt on Gaussian columns.
pub fn random_orthogonal<T: Scalar>(rng: &mut SeededRng, d: usize) -> Matrix<T> {
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v = sampling::gaussian_vec::<T>(rng, d);
        for c in &cols {
            let p = dot(&v, c);
            for (x, y) in v.iter_mut().zip(c) {
                *x = *x - p * *y;
            }
        }
        let n = norm(&v);
        if n > T::lit(1e-6) {
            cols.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    Matrix::from_columns(d, &cols)
}

/// `Q diag(spectrum) Qᵀ`, symmetrized exactly.
pub fn random_psd<T: Scalar>(rng: &mut SeededRng, spectrum: &[f64]) -> Matrix<T> {
    let d = spectrum.len();
    let q = random_orthogonal::<T>(rng, d);
    let diag = Matrix::from_diag(&spectrum.iter().map(|&s| T::lit(s)).collect::<Vec<T>>());
    symmetrize(&q.mul(&diag).mul(&q.transpose()))
}

fn symmetrize<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    m.add_scaled(T::one(), &m.transpose()).scaled(T::lit(0.5))
}

fn spectrum(rng: &mut SeededRng, d: usize, lo: f64, hi: f64, rank: usize) -> Vec<f64> {
    (0..d)
        .map(|i| if i < rank { rng.random_range(lo..=hi) } else { 0.0 })
        .collect()
}

/// A strongly convex base with a vanishing quadratic perturbation.
#[derive(Debug, Clone)]
pub struct FamilyInstance<T> {
    pub seq: PerturbationSequence<T>,
    pub base: ConvexProblem<T>,
    pub delta: QuadraticDelta<T>,
    pub minimizer: Vec<T>,
    pub radius: T,
}

/// Base `½fᵀAf − bᵀf + c` with spectrum in `[0.5, 4]` and minimizer in
/// `B(0, R/2)`; perturbation `δ` normalized to `sup_{B(0,R)} |δ| = 1` and
/// `‖E‖₂ ≤ λ_min/4`; members `L_D + δ/n`. With `R ≥ 4` every member
/// minimizer stays in `B(0, R)`.
pub fn perturbed_family<T: Scalar>(seed: u64, max_dim: usize, radius: T) -> Result<FamilyInstance<T>> {
    if max_dim == 0 {
        return Err(Error::InvalidParameter("max_dim must be positive".into()));
    }
    if !(radius >= T::lit(4.0)) {
        return Err(Error::InvalidParameter("family radius must be at least 4".into()));
    }
    let mut rng = sampling::rng(seed);
    let d = rng.random_range(1..=max_dim);
    let spec = spectrum(&mut rng, d, 0.5, 4.0, d);
    let lambda_min = spec.iter().copied().fold(f64::INFINITY, f64::min);
    let a = random_psd::<T>(&mut rng, &spec);
    let minimizer = sampling::uniform_in_ball::<T>(&mut rng, d, radius * T::lit(0.5));
    let b = a.mul_vec(&minimizer);
    let c = sampling::uniform::<T>(&mut rng, -1.0, 1.0);
    let base = ConvexProblem::quadratic(QuadraticLoss::new(a, Vector(b), c)?);

    let spec_e = spectrum(&mut rng, d, -1.0, 1.0, d);
    let g = random_psd::<T>(&mut rng, &spec_e);
    let raw = QuadraticDelta::new(
        g,
        Vector(sampling::gaussian_vec(&mut rng, d)),
        sampling::uniform(&mut rng, -1.0, 1.0),
    )?;
    let sup = raw.ball_sup(radius)?;
    let mut scale = T::one() / sup;
    let e_norm = sym_eigen(&raw.hessian).max_abs_value() * scale;
    let cap = T::lit(lambda_min / 4.0);
    if e_norm > cap {
        scale = scale * cap / e_norm;
    }
    let delta = raw.scaled(scale);
    let seq = PerturbationSequence::additive(base.clone(), delta.clone(), DecayRule::Inverse)?;
    Ok(FamilyInstance {
        seq,
        base,
        delta,
        minimizer,
        radius,
    })
}

/// Structural class of a generated base problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    Flat,
    RankDeficient,
    UnboundedBelow,
    FullRank,
}

/// Convex quadratic base for regularization: flat, rank-deficient with `b`
/// in the range, rank-deficient and unbounded below, or full rank; a third of
/// the instances carry a ball constraint.
pub fn regularization_base<T: Scalar>(seed: u64, max_dim: usize) -> Result<(ConvexProblem<T>, BaseKind)> {
    let mut rng = sampling::rng(seed);
    let d = rng.random_range(1..=max_dim.max(1));
    let kind = match seed % 4 {
        0 => BaseKind::Flat,
        1 => BaseKind::RankDeficient,
        2 => BaseKind::UnboundedBelow,
        _ => BaseKind::FullRank,
    };
    let rank = match kind {
        BaseKind::Flat => 0,
        BaseKind::FullRank => d,
        _ => rng.random_range(0..d),
    };
    let spec = spectrum(&mut rng, d, 0.1, 5.0, rank);
    let a = random_psd::<T>(&mut rng, &spec);
    let b = match kind {
        BaseKind::Flat => vec![T::zero(); d],
        BaseKind::UnboundedBelow => sampling::gaussian_vec(&mut rng, d),
        _ => a.mul_vec(&sampling::gaussian_vec::<T>(&mut rng, d)),
    };
    let c = sampling::uniform::<T>(&mut rng, -1.0, 1.0);
    let mut p = ConvexProblem::quadratic(QuadraticLoss::new(a, Vector(b), c)?);
    if rng.random_range(0..3) == 0 {
        let center = sampling::gaussian_vec::<T>(&mut rng, d);
        let r = sampling::uniform::<T>(&mut rng, 0.5, 3.0);
        p = p.with_constraint(ConstraintSet::Ball {
            center: Vector(center),
            radius: r,
        })?;
    }
    Ok((p, kind))
}

/// `(λ, α)` drawn uniformly from `[0.1, 10]²`.
pub fn regularization_weights<T: Scalar>(seed: u64) -> (T, T) {
    let mut rng = sampling::rng(sampling::derive_seed(seed, 0x5e6));
    (
        sampling::uniform(&mut rng, 0.1, 10.0),
        sampling::uniform(&mut rng, 0.1, 10.0),
    )
}

/// Two unconstrained convex quadratics in dimension `≤ max_dim` and a radius
/// in `[0.5, 3]`.
pub fn gap_pair<T: Scalar>(seed: u64, max_dim: usize) -> Result<(ConvexProblem<T>, ConvexProblem<T>, T)> {
    let mut rng = sampling::rng(seed);
    let d = rng.random_range(1..=max_dim.max(1));
    let make = |rng: &mut SeededRng| -> Result<ConvexProblem<T>> {
        let rank = rng.random_range(0..=d);
        let spec = spectrum(rng, d, 0.1, 3.0, rank);
        let a = random_psd::<T>(rng, &spec);
        let b = sampling::gaussian_vec(rng, d);
        let c = sampling::uniform(rng, -1.0, 1.0);
        Ok(ConvexProblem::quadratic(QuadraticLoss::new(a, Vector(b), c)?))
    };
    let p = make(&mut rng)?;
    let q = make(&mut rng)?;
    Ok((p, q, sampling::uniform(&mut rng, 0.5, 3.0)))
}

/// Solvable convex quadratic in dimension `≤ max_dim`: positive definite or
/// rank-deficient with `b` in the range, unconstrained, on a ball, or on a
/// box (diagonal Hessian).
pub fn solver_instance<T: Scalar>(seed: u64, max_dim: usize) -> Result<ConvexProblem<T>> {
    let mut rng = sampling::rng(seed);
    let d = rng.random_range(1..=max_dim.max(1));
    let rank = if rng.random_bool(0.5) {
        d
    } else {
        rng.random_range(0..d)
    };
    let spec = spectrum(&mut rng, d, 0.2, 4.0, rank);
    let constraint = rng.random_range(0..3);
    let a = if constraint == 2 {
        Matrix::from_diag(&spec.iter().map(|&s| T::lit(s)).collect::<Vec<T>>())
    } else {
        random_psd::<T>(&mut rng, &spec)
    };
    let b = a.mul_vec(&sampling::gaussian_vec::<T>(&mut rng, d));
    let c = sampling::uniform::<T>(&mut rng, -1.0, 1.0);
    let p = ConvexProblem::quadratic(QuadraticLoss::new(a, Vector(b), c)?);
    match constraint {
        0 => Ok(p),
        1 => {
            let center = sampling::gaussian_vec::<T>(&mut rng, d);
            let r = sampling::uniform::<T>(&mut rng, 0.5, 2.0);
            p.with_constraint(ConstraintSet::Ball {
                center: Vector(center),
                radius: r,
            })
        }
        _ => {
            let lower: Vec<T> = (0..d).map(|_| sampling::uniform(&mut rng, -2.0, 0.0)).collect();
            let upper: Vec<T> = lower
                .iter()
                .map(|&l| l + sampling::uniform::<T>(&mut rng, 0.1, 2.0))
                .collect();
            p.with_constraint(ConstraintSet::Box {
                lower: Vector(lower),
                upper: Vector(upper),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perturbations::uniform_gap;
    use crate::solution_sets::solve_exact;

    #[test]
    fn orthogonal_is_orthogonal() {
        let q = random_orthogonal::<f64>(&mut sampling::rng(3), 6);
        let p = q.transpose().mul(&q);
        assert!(p.add_scaled(-1.0, &Matrix::identity(6)).max_abs() < 1e-12);
    }

    #[test]
    fn family_respects_its_normalization() {
        for seed in 0..20 {
            let inst = perturbed_family::<f64>(seed, 6, 5.0).unwrap();
            assert!(inst.delta.ball_sup(5.0).unwrap() <= 1.0 + 1e-12);
            let gap = uniform_gap(&inst.seq, 3, 5.0).unwrap();
            assert!(gap <= 1.0 / 3.0 + 1e-12);
            for n in [1, 2, 10] {
                let s = solve_exact(&inst.seq.member(n).unwrap()).unwrap();
                assert!(s.max_norm() <= 5.0);
            }
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = solver_instance::<f64>(17, 20).unwrap();
        let b = solver_instance::<f64>(17, 20).unwrap();
        assert_eq!(a.effective_quadratic(), b.effective_quadratic());
        assert_eq!(regularization_weights::<f64>(4), regularization_weights::<f64>(4));
    }
}
