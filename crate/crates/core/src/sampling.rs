//! Seeded random sources for reproducible sampling.
//!
//! Every estimator takes a `u64` seed; parallel batches derive their own
//! streams with [`derive_seed`], so results depend only on `(seed, N)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::hermitian::{CVector, ProjPoint, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 mix of a base seed and a stream index.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Standard complex Gaussian (real and imaginary parts independent N(0,1)).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Uniform point on the unit sphere of `C^p`.
pub fn unit_sphere<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..p).map(|_| complex_gaussian(rng)).collect();
        let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Boundary point drawn from the round (`U(p)`-invariant) measure.
pub fn boundary_point<R: Rng + ?Sized>(p: usize, rng: &mut R) -> ProjPoint {
    let z = unit_sphere(p, rng);
    let mut v = CVector::zeros(p + 1);
    for (i, zi) in z.into_iter().enumerate() {
        v[i] = zi;
    }
    v[p] = C64::new(1.0, 0.0);
    ProjPoint::from_lift(v).expect("sphere points are null")
}

/// Interior point with ball radius uniform in `[0, max_radius)`.
pub fn interior_point<R: Rng + ?Sized>(p: usize, max_radius: f64, rng: &mut R) -> ProjPoint {
    let z = unit_sphere(p, rng);
    let r = max_radius * rng.random::<f64>();
    let z: Vec<C64> = z.into_iter().map(|c| c * r).collect();
    ProjPoint::from_ball(&z).expect("points inside the ball are interior")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_distinct_and_deterministic() {
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
        assert_ne!(derive_seed(7, 3), derive_seed(7, 4));
        let a = boundary_point(3, &mut rng(11));
        let b = boundary_point(3, &mut rng(11));
        assert_eq!(a, b);
        assert!(a.is_boundary());
    }

    #[test]
    fn interior_points_stay_inside() {
        let mut r = rng(5);
        for _ in 0..100 {
            let x = interior_point(2, 0.95, &mut r);
            assert!(x.is_interior());
        }
    }
}
