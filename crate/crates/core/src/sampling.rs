//! Seeded random and quasi-random sampling used by probes, selections and
//! randomized checks. Every sampler takes an explicit RNG built from a `u64`
//! seed so runs are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        ^ stream
            .wrapping_add(0x9E37_79B9_7F4A_7C15)
            .wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn uniform<T: Scalar>(rng: &mut SeededRng, lo: f64, hi: f64) -> T {
    T::lit(rng.random_range(lo..=hi))
}

pub fn unit_direction<T: Scalar>(rng: &mut SeededRng, d: usize) -> Vec<T> {
    loop {
        let g: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-12 {
            return g.iter().map(|x| T::lit(x / n)).collect();
        }
    }
}

pub fn uniform_in_ball<T: Scalar>(rng: &mut SeededRng, d: usize, radius: T) -> Vec<T> {
    if d == 0 {
        return Vec::new();
    }
    let u: f64 = rng.random();
    let r = radius * T::lit(u.powf(1.0 / d as f64));
    unit_direction::<T>(rng, d).into_iter().map(|x| x * r).collect()
}

pub fn uniform_in_box<T: Scalar>(rng: &mut SeededRng, lower: &[T], upper: &[T]) -> Vec<T> {
    lower
        .iter()
        .zip(upper)
        .map(|(&l, &u)| l + (u - l) * T::lit(rng.random::<f64>()))
        .collect()
}

pub fn gaussian_vec<T: Scalar>(rng: &mut SeededRng, d: usize) -> Vec<T> {
    (0..d).map(|_| T::lit(rng.sample(StandardNormal))).collect()
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

const HALTON_BASES: [u64; 4] = [2, 3, 5, 7];

/// Low-discrepancy point in the ball of radius `radius` in dimension 1..=3,
/// from the Halton sequence. With `on_sphere` the radial coordinate is pinned
/// to the boundary and one fewer Halton coordinate is consumed.
pub fn halton_ball_point(index: u64, d: usize, radius: f64, on_sphere: bool) -> Vec<f64> {
    assert!((1..=3).contains(&d), "quasi-random ball sampling supports d <= 3");
    let h = |k: usize| radical_inverse(index + 1, HALTON_BASES[k]);
    let tau = std::f64::consts::TAU;
    match d {
        1 => {
            if on_sphere {
                vec![if index.is_multiple_of(2) { radius } else { -radius }]
            } else {
                vec![radius * (2.0 * h(0) - 1.0)]
            }
        }
        2 => {
            let (r, theta) = if on_sphere {
                (radius, tau * h(0))
            } else {
                (radius * h(0).sqrt(), tau * h(1))
            };
            vec![r * theta.cos(), r * theta.sin()]
        }
        _ => {
            let (r, z, phi) = if on_sphere {
                (radius, 2.0 * h(0) - 1.0, tau * h(1))
            } else {
                (radius * h(0).cbrt(), 2.0 * h(1) - 1.0, tau * h(2))
            };
            let s = (1.0 - z * z).max(0.0).sqrt();
            vec![r * s * phi.cos(), r * s * phi.sin(), r * z]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base_two() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
    }

    #[test]
    fn ball_samples_stay_inside() {
        let mut r = rng(7);
        for d in 1..6 {
            for _ in 0..200 {
                let p: Vec<f64> = uniform_in_ball(&mut r, d, 2.0);
                assert!(crate::linalg::norm(&p) <= 2.0 + 1e-12);
            }
        }
        for i in 0..500 {
            for d in 1..=3 {
                let p = halton_ball_point(i, d, 1.5, false);
                assert!(crate::linalg::norm(&p) <= 1.5 + 1e-12);
                let q = halton_ball_point(i, d, 1.5, true);
                assert!((crate::linalg::norm(&q) - 1.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<f64> = uniform_in_ball(&mut rng(3), 4, 1.0);
        let b: Vec<f64> = uniform_in_ball(&mut rng(3), 4, 1.0);
        assert_eq!(a, b);
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
    }
}
