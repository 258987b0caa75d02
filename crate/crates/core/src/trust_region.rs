//! Global minimization of a (possibly indefinite) quadratic over a Euclidean
//! ball: `min ½ yᵀHy + gᵀy  s.t. ‖y‖ ≤ R`.
//!
//! Works in the eigenbasis of `H`. The boundary multiplier `σ ≥ max(0, -λ_min)`
//! solves the secular equation `1/‖y(σ)‖ = 1/R` with `y(σ) = -(H + σI)⁻¹ g`,
//! found by safeguarded Newton (the secular function is concave and increasing,
//! so Newton from the right converges monotonically once bracketed).

use crate::error::{Error, Result};
use crate::linalg::{norm, Matrix, SymEigen};
use crate::scalar::Scalar;

/// Relative threshold below which an eigenvalue counts as a zero mode.
pub const ZERO_MODE_RTOL: f64 = 1e-10;
/// Tolerance on the multiplier in the secular root find.
pub const MULTIPLIER_TOL: f64 = 1e-12;
pub const MAX_SECULAR_ITERS: usize = 200;

#[derive(Debug, Clone)]
pub struct TrustRegionStep<T> {
    pub point: Vec<T>,
    pub value: T,
    pub multiplier: T,
    pub on_boundary: bool,
    /// False when the minimizer set has more than one element (flat interior
    /// optimum or the hard case); `point` is then one of the minimizers.
    pub unique: bool,
    pub hard_case: bool,
    pub iterations: usize,
}

/// Eigendecomposition of `-H` from that of `H`.
pub fn negated<T: Scalar>(eig: &SymEigen<T>) -> SymEigen<T> {
    let n = eig.dim();
    let values = eig.values.iter().rev().map(|&x| -x).collect();
    let columns: Vec<Vec<T>> = (0..n).rev().map(|j| eig.vector(j)).collect();
    SymEigen {
        values,
        vectors: Matrix::from_columns(n, &columns),
    }
}

pub fn solve_trust_region<T: Scalar>(eig: &SymEigen<T>, g: &[T], radius: T) -> Result<TrustRegionStep<T>> {
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(Error::RadiusNonpositive);
    }
    let n = eig.dim();
    if g.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.len(),
        });
    }
    if n == 0 {
        return Ok(TrustRegionStep {
            point: Vec::new(),
            value: T::zero(),
            multiplier: T::zero(),
            on_boundary: false,
            unique: true,
            hard_case: false,
            iterations: 0,
        });
    }

    let gt = eig.to_eigen_coords(g);
    let lam = &eig.values;
    let lam_min = lam[0];
    let eig_tol = T::tol(ZERO_MODE_RTOL) * eig.max_abs_value();
    let gnorm = norm(g);
    let g_tol = T::tol(1e-12) * gnorm;
    let pd = lam_min > eig_tol;
    let shift = if pd { T::zero() } else { (-lam_min).max(T::zero()) };
    let in_cluster: Vec<bool> = lam.iter().map(|&l| !pd && l <= lam_min + eig_tol).collect();
    let base: Vec<T> = lam
        .iter()
        .zip(&in_cluster)
        .map(|(&l, &c)| if c { T::zero() } else { (l + shift).max(T::zero()) })
        .collect();

    let value_of = |y: &[T]| -> T {
        y.iter()
            .zip(lam)
            .zip(&gt)
            .map(|((&yi, &li), &gi)| T::lit(0.5) * li * yi * yi + gi * yi)
            .sum()
    };
    let step_at = |s: T, skip_cluster: bool| -> Vec<T> {
        (0..n)
            .map(|i| {
                if skip_cluster && in_cluster[i] {
                    T::zero()
                } else {
                    -gt[i] / (base[i] + s)
                }
            })
            .collect()
    };
    let finish = |y: Vec<T>, s: T, on_boundary: bool, unique: bool, hard: bool, it: usize| {
        let value = value_of(&y);
        TrustRegionStep {
            point: eig.from_eigen_coords(&y),
            value,
            multiplier: shift + s,
            on_boundary,
            unique,
            hard_case: hard,
            iterations: it,
        }
    };

    let rtol = T::tol(1e-12);
    if pd {
        let y0 = step_at(T::zero(), false);
        if norm(&y0) <= radius {
            return Ok(finish(y0, T::zero(), false, true, false, 0));
        }
    } else {
        let cluster_clear = (0..n).all(|i| !in_cluster[i] || gt[i].abs() <= g_tol);
        if cluster_clear {
            let y_hat = step_at(T::zero(), true);
            let nh = norm(&y_hat);
            if nh < radius * (T::one() - rtol) {
                if shift == T::zero() {
                    // flat optimum meeting the ball interior
                    return Ok(finish(y_hat, T::zero(), false, false, false, 0));
                }
                let tau = (radius * radius - nh * nh).max(T::zero()).sqrt();
                let mut y = y_hat;
                y[0] = y[0] + tau;
                return Ok(finish(y, T::zero(), true, false, true, 0));
            }
            if nh <= radius * (T::one() + rtol) {
                return Ok(finish(y_hat, T::zero(), true, true, false, 0));
            }
        }
    }

    // Boundary solution with s > 0 strictly: H + σI is positive definite, so
    // the minimizer is unique.
    let mut lo = T::zero();
    let mut hi = gnorm / radius;
    let mut s = hi;
    let mut iterations = 0;
    let inv_r = T::one() / radius;
    for it in 0..MAX_SECULAR_ITERS {
        iterations = it + 1;
        let mut ny2 = T::zero();
        let mut dny = T::zero();
        for i in 0..n {
            let den = base[i] + s;
            let q = gt[i] / den;
            ny2 = ny2 + q * q;
            dny = dny + q * q / den;
        }
        let ny = ny2.sqrt();
        let phi = T::one() / ny - inv_r;
        if phi == T::zero() {
            break;
        }
        if phi < T::zero() {
            lo = s;
        } else {
            hi = s;
        }
        let dphi = dny / (ny2 * ny);
        let mut next = s - phi / dphi;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = T::lit(0.5) * (lo + hi);
        }
        let done = (next - s).abs() <= T::tol(MULTIPLIER_TOL) * T::one().max(s)
            || hi - lo <= T::tol(MULTIPLIER_TOL) * T::one().max(hi);
        s = next;
        if done {
            break;
        }
    }
    let y = step_at(s, false);
    Ok(finish(y, s, true, true, false, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::sym_eigen;

    fn tr(h: &[Vec<f64>], g: &[f64], r: f64) -> TrustRegionStep<f64> {
        let m = Matrix::from_rows(h).unwrap();
        solve_trust_region(&sym_eigen(&m), g, r).unwrap()
    }

    #[test]
    fn interior_solution_for_positive_definite() {
        let s = tr(&[vec![2.0, 0.0], vec![0.0, 4.0]], &[-2.0, 0.0], 5.0);
        assert!(!s.on_boundary && s.unique);
        assert!((s.point[0] - 1.0).abs() < 1e-14);
        assert!((s.value + 1.0).abs() < 1e-14);
    }

    #[test]
    fn boundary_solution_matches_one_dimensional_clamp() {
        // ½x² - 10x over |x| <= 1: minimizer 1, value -9.5
        let s = tr(&[vec![1.0]], &[-10.0], 1.0);
        assert!(s.on_boundary && s.unique);
        assert!((s.point[0] - 1.0).abs() < 1e-12);
        assert!((s.value + 9.5).abs() < 1e-12);
        assert!((s.multiplier - 9.0).abs() < 1e-9);
    }

    #[test]
    fn hard_case_is_flagged() {
        // -f1² + f2² over the unit ball: minimizers (±1, 0), value -1
        let s = tr(&[vec![-2.0, 0.0], vec![0.0, 2.0]], &[0.0, 0.0], 1.0);
        assert!(s.hard_case && !s.unique);
        assert!((s.value + 1.0).abs() < 1e-14);
        assert!((s.point[0].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flat_interior_is_not_unique() {
        let s = tr(&[vec![1.0, 0.0], vec![0.0, 0.0]], &[-1.0, 0.0], 3.0);
        assert!(!s.unique && !s.on_boundary);
        assert_eq!(s.point, vec![1.0, 0.0]);
    }

    #[test]
    fn linear_objective_goes_to_boundary() {
        let s = tr(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[3.0, 4.0], 2.0);
        assert!(s.unique && s.on_boundary);
        assert!((s.point[0] + 1.2).abs() < 1e-12 && (s.point[1] + 1.6).abs() < 1e-12);
        assert!((s.value + 10.0).abs() < 1e-12);
    }

    #[test]
    fn negation_reverses_spectrum() {
        let e = sym_eigen(&Matrix::from_diag(&[1.0, 3.0]));
        let n = negated(&e);
        assert_eq!(n.values, vec![-3.0, -1.0]);
        assert_eq!(n.vector(0), vec![0.0, 1.0]);
    }
}
