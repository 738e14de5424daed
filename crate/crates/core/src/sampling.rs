//! Seedable randomness: Haar rotations, uniform points on spheres, cubes and caps.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::quadrature;

/// The concrete generator behind every [`RandomSource`].
pub type LabRng = ChaCha8Rng;

/// A `(seed, stream_id)` pair naming one reproducible ChaCha stream.
///
/// Sources are plain values. Parallel work never shares a generator; it
/// derives child sources with [`RandomSource::derive`] instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomSource {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, stream_id: 0 }
    }

    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Child source for work item `index`. Distinct indices give distinct
    /// streams; the mapping depends only on `(stream_id, index)`.
    pub fn derive(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index)),
        }
    }

    pub fn rng(&self) -> LabRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// An orthogonal matrix acting on column vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    pub matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        debug_assert_eq!(v.len(), n);
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Applies the inverse (the transpose).
    pub fn apply_inverse(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        debug_assert_eq!(v.len(), n);
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(j, i)] * v[j]).sum())
            .collect()
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }

    /// Largest entry of `|MᵀM − I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        let gram = self.matrix.transpose() * &self.matrix;
        let eye = DMatrix::<f64>::identity(n, n);
        (gram - eye).abs().max()
    }
}

/// Haar-distributed element of O(dim): QR of a Gaussian matrix with the
/// column signs fixed so that R has a positive diagonal.
pub fn haar_rotation<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Rotation {
    assert!(dim >= 1, "rotation dimension must be positive");
    loop {
        let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let r = qr.r();
        if (0..dim).any(|i| r[(i, i)] == 0.0) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..dim {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        return Rotation { matrix: q };
    }
}

/// Uniform point on S^d, returned as a unit vector in R^{d+1}.
pub fn uniform_sphere_point<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    gaussian_direction(d + 1, rng)
}

fn gaussian_direction<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Uniform point in the cube `[-side/2, side/2)^d`.
pub fn uniform_cube_point<R: Rng + ?Sized>(d: usize, side: f64, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| (rng.random::<f64>() - 0.5) * side).collect()
}

/// Uniform point in the closed unit-radius-`radius` ball of R^dim.
pub fn uniform_ball_point<R: Rng + ?Sized>(dim: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let dir = gaussian_direction(dim, rng);
    let r = radius * rng.random::<f64>().powf(1.0 / dim as f64);
    dir.into_iter().map(|x| x * r).collect()
}

/// Angular radius of a cap with chordal radius `rho`.
pub fn angular_radius(rho: f64) -> f64 {
    (1.0 - rho * rho / 2.0).clamp(-1.0, 1.0).acos()
}

/// Chordal radius of a cap with angular radius `theta`.
pub fn chordal_radius(theta: f64) -> f64 {
    2.0 * (theta / 2.0).sin()
}

const CAP_TABLE_NODES: usize = 4096;

/// Inverse-CDF sampler for the uniform measure on `Cap(center, rho)` ⊂ S^d.
///
/// The polar angle φ from the center has density ∝ sin^{d-1} φ on
/// `[0, θ]`; its CDF is tabulated on 4096 nodes and inverted by linear
/// interpolation. The azimuthal direction is a uniform unit vector in the
/// tangent space.
#[derive(Debug, Clone)]
pub struct CapSampler {
    d: usize,
    rho: f64,
    angles: Vec<f64>,
    cdf: Vec<f64>,
}

impl CapSampler {
    pub fn new(d: usize, rho: f64) -> Result<Self> {
        if !(rho > 0.0 && rho <= 2.0) {
            return Err(LabError::BadRadius(rho));
        }
        if d == 0 {
            return Err(LabError::InvalidArgument("sphere dimension must be ≥ 1".into()));
        }
        let theta = angular_radius(rho);
        let step = theta / (CAP_TABLE_NODES - 1) as f64;
        let angles: Vec<f64> = (0..CAP_TABLE_NODES).map(|i| i as f64 * step).collect();
        let weight = |phi: f64| phi.sin().powi(d as i32 - 1);
        let mut cdf = Vec::with_capacity(CAP_TABLE_NODES);
        cdf.push(0.0);
        let mut acc = 0.0;
        for w in angles.windows(2) {
            acc += quadrature::gauss_legendre_fixed(&weight, w[0], w[1]);
            cdf.push(acc);
        }
        let total = acc;
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok(Self { d, rho, angles, cdf })
    }

    pub fn radius(&self) -> f64 {
        self.rho
    }

    pub fn sphere_dim(&self) -> usize {
        self.d
    }

    fn sample_angle<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let hi = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[hi - 1], self.cdf[hi]);
        let frac = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.0 };
        self.angles[hi - 1] + frac * (self.angles[hi] - self.angles[hi - 1])
    }

    /// Uniform point in the cap centred at the north pole `e_{d+1}`.
    pub fn sample_at_pole<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let phi = self.sample_angle(rng);
        let omega = gaussian_direction(self.d, rng);
        let (s, c) = phi.sin_cos();
        let mut y: Vec<f64> = omega.into_iter().map(|w| s * w).collect();
        y.push(c);
        y
    }

    pub fn sample<R: Rng + ?Sized>(&self, center: &[f64], rng: &mut R) -> Vec<f64> {
        let y = self.sample_at_pole(rng);
        reflect_pole_to(center, y)
    }
}

/// Householder reflection taking the north pole to `center`, applied to `y`.
fn reflect_pole_to(center: &[f64], mut y: Vec<f64>) -> Vec<f64> {
    let n = center.len();
    let mut v: Vec<f64> = center.iter().map(|c| -c).collect();
    v[n - 1] += 1.0;
    let vv: f64 = v.iter().map(|x| x * x).sum();
    if vv < 1e-30 {
        return y;
    }
    let vy: f64 = v.iter().zip(&y).map(|(a, b)| a * b).sum();
    let scale = 2.0 * vy / vv;
    for (yi, vi) in y.iter_mut().zip(&v) {
        *yi -= scale * vi;
    }
    y
}

/// One-off uniform draw from `Cap(center, rho)`; builds a fresh table.
pub fn uniform_cap_point<R: Rng + ?Sized>(d: usize, center: &[f64], rho: f64, rng: &mut R) -> Result<Vec<f64>> {
    if center.len() != d + 1 {
        return Err(LabError::DimMismatch {
            expected: d + 1,
            found: center.len(),
        });
    }
    Ok(CapSampler::new(d, rho)?.sample(center, rng))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_se(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    #[test]
    fn same_source_same_draws() {
        let src = RandomSource::with_stream(7, 3);
        let a: Vec<f64> = (0..5).map(|_| src.rng().random()).collect();
        let mut r1 = src.rng();
        let mut r2 = src.rng();
        let b: Vec<f64> = (0..5).map(|_| r1.random()).collect();
        let c: Vec<f64> = (0..5).map(|_| r2.random()).collect();
        assert_eq!(b, c);
        assert!(a.iter().all(|&x| x == a[0]));
        assert_ne!(src.derive(0), src.derive(1));
    }

    #[test]
    fn haar_is_orthogonal() {
        let mut rng = RandomSource::new(1).rng();
        for dim in 1..=6 {
            for _ in 0..50 {
                let r = haar_rotation(dim, &mut rng);
                assert!(r.orthogonality_defect() < 1e-12);
                assert!((r.determinant().abs() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn haar_entry_moments() {
        let mut rng = RandomSource::new(2).rng();
        let dim = 3;
        let draws: Vec<f64> = (0..100_000)
            .map(|_| haar_rotation(dim, &mut rng).matrix[(0, 0)])
            .collect();
        let (m, se) = mean_se(&draws);
        assert!(m.abs() <= 4.0 * se, "mean {m} se {se}");
        let sq: Vec<f64> = draws.iter().map(|x| x * x).collect();
        let (m2, se2) = mean_se(&sq);
        assert!((m2 - 1.0 / dim as f64).abs() <= 4.0 * se2, "{m2} {se2}");
    }

    #[test]
    fn haar_determinant_signs_balanced() {
        let mut rng = RandomSource::new(3).rng();
        let signs: Vec<f64> = (0..10_000)
            .map(|_| f64::from(haar_rotation(3, &mut rng).determinant() > 0.0))
            .collect();
        let (m, se) = mean_se(&signs);
        assert!((m - 0.5).abs() <= 4.0 * se);
    }

    #[test]
    fn sphere_points_are_unit_and_centered() {
        let mut rng = RandomSource::new(4).rng();
        let pts: Vec<Vec<f64>> = (0..100_000).map(|_| uniform_sphere_point(2, &mut rng)).collect();
        for p in &pts {
            let n: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
        for k in 0..3 {
            let coord: Vec<f64> = pts.iter().map(|p| p[k]).collect();
            let (m, se) = mean_se(&coord);
            assert!(m.abs() <= 4.0 * se);
        }
        let upper: Vec<f64> = pts.iter().map(|p| f64::from(p[2] >= 0.0)).collect();
        let (m, se) = mean_se(&upper);
        assert!((m - 0.5).abs() <= 4.0 * se);
    }

    #[test]
    fn rotated_fixed_vector_is_uniform() {
        let mut rng = RandomSource::new(5).rng();
        let u = [0.0, 0.6, 0.8];
        let pts: Vec<Vec<f64>> = (0..50_000).map(|_| haar_rotation(3, &mut rng).apply(&u)).collect();
        for k in 0..3 {
            let coord: Vec<f64> = pts.iter().map(|p| p[k]).collect();
            let (m, se) = mean_se(&coord);
            assert!(m.abs() <= 4.0 * se);
            let sq: Vec<f64> = coord.iter().map(|x| x * x).collect();
            let (m2, se2) = mean_se(&sq);
            assert!((m2 - 1.0 / 3.0).abs() <= 4.0 * se2);
        }
    }

    #[test]
    fn cube_points_moments() {
        let mut rng = RandomSource::new(6).rng();
        let side = 3.0;
        let pts: Vec<Vec<f64>> = (0..100_000).map(|_| uniform_cube_point(2, side, &mut rng)).collect();
        assert!(pts.iter().flatten().all(|&x| (-side / 2.0..side / 2.0).contains(&x)));
        for k in 0..2 {
            let coord: Vec<f64> = pts.iter().map(|p| p[k]).collect();
            let (m, se) = mean_se(&coord);
            assert!(m.abs() <= 4.0 * se);
            let sq: Vec<f64> = coord.iter().map(|x| x * x).collect();
            let (m2, se2) = mean_se(&sq);
            assert!((m2 - side * side / 12.0).abs() <= 4.0 * se2);
        }
    }

    #[test]
    fn cap_points_stay_in_cap() {
        let mut rng = RandomSource::new(7).rng();
        let center = [0.6, 0.0, 0.8];
        let sampler = CapSampler::new(2, 0.7).unwrap();
        for _ in 0..20_000 {
            let y = sampler.sample(&center, &mut rng);
            let dist: f64 = y.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(dist <= 0.7 + 1e-12);
            let n: f64 = y.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cap_mean_height_matches_quadrature() {
        // On S², d=2, rho=1: heights t = x·e on [1/2, 1] with flat density.
        let lo = 0.5;
        let num = quadrature::integrate(&|t: f64| t, lo, 1.0, 1e-13);
        let den = quadrature::integrate(&|_t: f64| 1.0, lo, 1.0, 1e-13);
        let expected = num / den;
        let mut rng = RandomSource::new(8).rng();
        let sampler = CapSampler::new(2, 1.0).unwrap();
        let heights: Vec<f64> = (0..100_000).map(|_| sampler.sample_at_pole(&mut rng)[2]).collect();
        let (m, se) = mean_se(&heights);
        assert!((m - expected).abs() <= 4.0 * se, "{m} vs {expected}");
    }

    #[test]
    fn full_cap_matches_sphere() {
        let mut rng = RandomSource::new(9).rng();
        let center = [1.0, 0.0, 0.0, 0.0];
        let sampler = CapSampler::new(3, 2.0).unwrap();
        let a: Vec<f64> = (0..50_000).map(|_| sampler.sample(&center, &mut rng)[0]).collect();
        let b: Vec<f64> = (0..50_000).map(|_| uniform_sphere_point(3, &mut rng)[0]).collect();
        let (ma, sa) = mean_se(&a);
        let (mb, sb) = mean_se(&b);
        assert!((ma - mb).abs() <= 4.0 * (sa * sa + sb * sb).sqrt());
    }

    #[test]
    fn bad_cap_radius() {
        assert!(matches!(CapSampler::new(2, 0.0), Err(LabError::BadRadius(_))));
        assert!(matches!(CapSampler::new(2, 2.5), Err(LabError::BadRadius(_))));
    }
}
