//! Zonal harmonic analysis on S^d: normalized Gegenbauer polynomials,
//! harmonic-space dimensions, Fourier coefficients of caps and numerical
//! checks of the projection and convolution identities.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::estimate::{mean_estimate, Estimate};
use crate::quadrature;
use crate::sampling::{angular_radius, uniform_sphere_point, RandomSource};

const QUAD_TOL: f64 = 1e-13;

fn lambda(d: usize) -> f64 {
    (d as f64 - 1.0) / 2.0
}

/// Evaluator for `P_n^d = C_n^λ / C_n^λ(1)` with `λ = (d−1)/2`.
///
/// The recurrence runs on the normalized values,
/// `p_n = (2(n+λ−1)·t·p_{n−1} − (n−1)·p_{n−2}) / (n+2λ−1)`,
/// which stay in `[−1, 1]` and never overflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GegenbauerBasis {
    pub d: usize,
    pub n_max: usize,
}

impl GegenbauerBasis {
    pub fn new(d: usize, n_max: usize) -> Result<Self> {
        if d < 2 {
            return Err(LabError::InvalidArgument(format!("sphere dimension {d} < 2")));
        }
        Ok(Self { d, n_max })
    }

    /// `[P_0(t), …, P_{n_max}(t)]`. No domain check.
    pub fn eval_all(&self, t: f64) -> Vec<f64> {
        let lam = lambda(self.d);
        let mut out = Vec::with_capacity(self.n_max + 1);
        out.push(1.0);
        if self.n_max >= 1 {
            out.push(t);
        }
        for n in 2..=self.n_max {
            let nf = n as f64;
            let p = (2.0 * (nf + lam - 1.0) * t * out[n - 1] - (nf - 1.0) * out[n - 2]) / (nf + 2.0 * lam - 1.0);
            out.push(p);
        }
        out
    }

    pub fn eval(&self, n: usize, t: f64) -> f64 {
        let lam = lambda(self.d);
        let (mut p0, mut p1) = (1.0, t);
        if n == 0 {
            return 1.0;
        }
        for k in 2..=n {
            let kf = k as f64;
            let p2 = (2.0 * (kf + lam - 1.0) * t * p1 - (kf - 1.0) * p0) / (kf + 2.0 * lam - 1.0);
            p0 = p1;
            p1 = p2;
        }
        p1
    }
}

/// `P_n^d(t)`, rejecting `|t| > 1 + 1e-12`.
pub fn pnd_eval(d: usize, n: usize, t: f64) -> Result<f64> {
    if t.is_nan() || t.abs() > 1.0 + 1e-12 {
        return Err(LabError::DomainError(t));
    }
    Ok(GegenbauerBasis::new(d, n)?.eval(n, t))
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// Dimension of the degree-`n` spherical harmonics on S^d:
/// `C(n+d, n) − C(n+d−2, n−2)`.
pub fn harmonic_dim(d: usize, n: usize) -> u64 {
    let (d, n) = (d as u64, n as u64);
    let lead = binomial(n + d, n);
    let tail = if n >= 2 { binomial(n + d - 2, n - 2) } else { 0 };
    u64::try_from(lead - tail).expect("harmonic dimension overflows u64")
}

/// `∫_0^θ g(cos φ)·sin^{d−1}φ dφ`, i.e. `∫_{cos θ}^1 g(t)(1−t²)^{(d−2)/2} dt`.
pub fn polar_integral<G: Fn(f64) -> f64>(d: usize, theta: f64, g: G, tol: f64) -> f64 {
    let p = d as i32 - 1;
    quadrature::integrate(&|phi: f64| g(phi.cos()) * phi.sin().powi(p), 0.0, theta, tol)
}

/// Normalized cap Fourier coefficient
/// `∫_{1−δ²/2}^1 P_n(t) w(t) dt / ∫_{1−δ²/2}^1 w(t) dt`, `w = (1−t²)^{(d−2)/2}`.
pub fn cap_fourier_coeff(d: usize, delta: f64, n: usize) -> Result<f64> {
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(LabError::BadRadius(delta));
    }
    let basis = GegenbauerBasis::new(d, n)?;
    if n == 0 {
        return Ok(1.0);
    }
    let theta = angular_radius(delta);
    let num = polar_integral(d, theta, |t| basis.eval(n, t), QUAD_TOL);
    let den = polar_integral(d, theta, |_| 1.0, QUAD_TOL);
    Ok(num / den)
}

/// Gegenbauer coefficients `coeffs[n]` of a zonal function
/// `f(x) = Σ coeffs[n]·P_n(e·x)`, or Fourier coefficients of a zonal measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonalSpectrum {
    pub d: usize,
    pub coeffs: Vec<f64>,
}

impl ZonalSpectrum {
    pub fn new(d: usize, coeffs: Vec<f64>) -> Result<Self> {
        GegenbauerBasis::new(d, 0)?;
        if coeffs.is_empty() {
            return Err(LabError::InvalidArgument("empty spectrum".into()));
        }
        Ok(Self { d, coeffs })
    }

    /// Spectrum `[0, …, 0, 1]` of `P_n` padded to `len` entries.
    pub fn single_degree(d: usize, n: usize, len: usize) -> Result<Self> {
        let mut coeffs = vec![0.0; len.max(n + 1)];
        coeffs[n] = 1.0;
        Self::new(d, coeffs)
    }

    /// Cap spectrum `(cap_hat_δ)_n` for `n = 0..=n_max`.
    pub fn of_cap(d: usize, delta: f64, n_max: usize) -> Result<Self> {
        let coeffs = (0..=n_max)
            .map(|n| cap_fourier_coeff(d, delta, n))
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, coeffs)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let basis = GegenbauerBasis {
            d: self.d,
            n_max: self.coeffs.len() - 1,
        };
        basis.eval_all(t).iter().zip(&self.coeffs).map(|(p, c)| p * c).sum()
    }
}

/// MC average of `P_n(x·y)P_n(x·z)` over uniform `x`, minus its exact
/// value `P_n(y·z)/dim H_n`.
pub fn projection_identity_check(
    d: usize,
    n: usize,
    y: &[f64],
    z: &[f64],
    samples: u64,
    source: &RandomSource,
) -> Result<Estimate> {
    let basis = GegenbauerBasis::new(d, n)?;
    for v in [y, z] {
        if v.len() != d + 1 {
            return Err(LabError::DimMismatch {
                expected: d + 1,
                found: v.len(),
            });
        }
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>().clamp(-1.0, 1.0) };
    let target = basis.eval(n, dot(y, z)) / harmonic_dim(d, n) as f64;
    let est = mean_estimate(samples, source, |_, rng| {
        let x = uniform_sphere_point(d, rng);
        basis.eval(n, dot(&x, y)) * basis.eval(n, dot(&x, z))
    });
    Ok(Estimate {
        value: est.value - target,
        ..est
    })
}

/// Both sides of `proj_n(f ∗ cap_δ) = (cap_hat_δ)_n · proj_n f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionCheck {
    pub degree: usize,
    pub delta: f64,
    /// Degree-`n` coefficient of `f ∗ cap_δ` by direct quadrature.
    pub spatial: f64,
    /// `(cap_hat_δ)_n · f̂_n`.
    pub spectral: f64,
    pub deviation: f64,
}

/// Computes the degree-`n` coefficient of `f ∗ cap_δ` two ways.
///
/// Spatially, `g(s) = (f ∗ cap_δ)(x)` for `e·x = s` is the cap average of
/// `f`, parametrized by the polar angle `α` from `x` and the angle `ψ`
/// between the tangent direction and `e`:
/// `e·y = s·cos α + √(1−s²)·sin α·cos ψ`, weighted by
/// `sin^{d−1}α · sin^{d−2}ψ`. The coefficient is then
/// `dim H_n · ∫ g P_n w / ∫ w` over `[−1, 1]`.
pub fn zonal_convolution_spectrum_check(f: &ZonalSpectrum, delta: f64, n: usize, tol: f64) -> Result<ConvolutionCheck> {
    if n >= f.coeffs.len() {
        return Err(LabError::TruncationError { n, len: f.coeffs.len() });
    }
    let d = f.d;
    let spectral = cap_fourier_coeff(d, delta, n)? * f.coeffs[n];

    let theta = angular_radius(delta);
    let pi = std::f64::consts::PI;
    let az_pow = d as i32 - 2;
    let az_norm = quadrature::integrate(&|psi: f64| psi.sin().powi(az_pow), 0.0, pi, tol);
    let cap_norm = polar_integral(d, theta, |_| 1.0, tol);
    let cap_average = |s: f64| -> f64 {
        let rs = (1.0 - s * s).max(0.0).sqrt();
        let inner = |alpha: f64| -> f64 {
            let (sa, ca) = alpha.sin_cos();
            let ring = quadrature::integrate(
                &|psi: f64| f.eval((s * ca + rs * sa * psi.cos()).clamp(-1.0, 1.0)) * psi.sin().powi(az_pow),
                0.0,
                pi,
                tol,
            );
            ring / az_norm * sa.powi(d as i32 - 1)
        };
        quadrature::integrate(&inner, 0.0, theta, tol) / cap_norm
    };
    let basis = GegenbauerBasis::new(d, n)?;
    let sphere_norm = polar_integral(d, pi, |_| 1.0, tol);
    let proj = polar_integral(d, pi, |s| cap_average(s) * basis.eval(n, s), tol);
    let spatial = harmonic_dim(d, n) as f64 * proj / sphere_norm;
    Ok(ConvolutionCheck {
        degree: n,
        delta,
        spatial,
        spectral,
        deviation: (spatial - spectral).abs(),
    })
}

/// One row of the decay table: `max |P_n(t)|` over `|t| ≤ 1 − γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub n: usize,
    pub max_abs: f64,
}

/// `max_{|t| ≤ 1−γ} |P_n^d(t)|` on a 2001-point grid, per degree.
pub fn gegenbauer_decay_probe(d: usize, gamma: f64, n_list: &[usize]) -> Result<Vec<DecayRow>> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(LabError::InvalidArgument(format!("margin {gamma} outside (0, 1)")));
    }
    let n_max = n_list.iter().copied().max().unwrap_or(0);
    let basis = GegenbauerBasis::new(d, n_max)?;
    let edge = 1.0 - gamma;
    let grid: Vec<f64> = (0..2001).map(|i| -edge + 2.0 * edge * i as f64 / 2000.0).collect();
    Ok(n_list
        .iter()
        .map(|&n| DecayRow {
            n,
            max_abs: grid.iter().map(|&t| basis.eval(n, t).abs()).fold(0.0, f64::max),
        })
        .collect())
}
