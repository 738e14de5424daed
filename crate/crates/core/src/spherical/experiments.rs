use serde::{Deserialize, Serialize};

use super::avoider::{avoider_ceiling, cap_avoider};
use super::region::{region_measure, SphereRegion};
use crate::config::{Configuration, ToleranceProfile};
use crate::error::{LabError, Result};
use crate::estimate::{accumulate, mean_estimate, Estimate, IntersectionReport, ProbeRow};
use crate::sampling::{haar_rotation, uniform_sphere_point, CapSampler, RandomSource};

fn check_on_region(region: &SphereRegion, p: &Configuration) -> Result<()> {
    if p.ambient_dim != region.ambient_dim() {
        return Err(LabError::DimMismatch {
            expected: region.ambient_dim(),
            found: p.ambient_dim,
        });
    }
    p.check_on_sphere(&ToleranceProfile::default())
}

/// `P_{R ∈ O(d+1)}(R v_1, …, R v_k ∈ A)` by Monte Carlo over Haar `R`.
pub fn ip_estimate_sphere(
    region: &SphereRegion,
    p: &Configuration,
    samples: u64,
    source: &RandomSource,
) -> Result<Estimate> {
    check_on_region(region, p)?;
    let dim = region.ambient_dim();
    Ok(mean_estimate(samples, source, |_, rng| {
        let r = haar_rotation(dim, rng);
        f64::from(p.points.iter().all(|v| region.contains(&r.apply(v))))
    }))
}

/// Number of sampled rotations placing a full copy of `p` inside `region`.
pub fn count_copy_hits(region: &SphereRegion, p: &Configuration, samples: u64, source: &RandomSource) -> Result<u64> {
    let e = ip_estimate_sphere(region, p, samples, source)?;
    Ok((e.value * samples as f64).round() as u64)
}

/// Stochastic oracle `x ↦ d_{Cap(x, δ)}(A)`.
///
/// Query `q` draws its `inner_samples` cap points from `source.derive(q)`,
/// so evaluations are reproducible and independent across queries.
#[derive(Debug, Clone)]
pub struct BlurOracle<'a> {
    region: &'a SphereRegion,
    sampler: CapSampler,
    inner_samples: u64,
    source: RandomSource,
}

impl<'a> BlurOracle<'a> {
    pub fn radius(&self) -> f64 {
        self.sampler.radius()
    }

    pub fn eval(&self, x: &[f64], query: u64) -> Estimate {
        let mut rng = self.source.derive(query).rng();
        let mut m = crate::estimate::Moments::default();
        for _ in 0..self.inner_samples {
            let y = self.sampler.sample(x, &mut rng);
            m.push(f64::from(self.region.contains(&y)));
        }
        m.estimate(self.source.seed)
    }
}

pub fn blur_sphere<'a>(
    region: &'a SphereRegion,
    delta: f64,
    inner_samples: u64,
    source: &RandomSource,
) -> Result<BlurOracle<'a>> {
    if inner_samples == 0 {
        return Err(LabError::InvalidArgument("inner_samples must be positive".into()));
    }
    Ok(BlurOracle {
        region,
        sampler: CapSampler::new(region.d, delta)?,
        inner_samples,
        source: *source,
    })
}

/// Thresholded blur: `x ∈ Z` iff the blur estimate at `x` is at least `γ`.
#[derive(Debug, Clone)]
pub struct ZoomOracle<'a> {
    pub blur: BlurOracle<'a>,
    pub gamma: f64,
}

impl ZoomOracle<'_> {
    pub fn contains(&self, x: &[f64], query: u64) -> bool {
        self.blur.eval(x, query).value >= self.gamma
    }
}

pub fn zoom_out_sphere<'a>(
    region: &'a SphereRegion,
    delta: f64,
    gamma: f64,
    inner_samples: u64,
    source: &RandomSource,
) -> Result<ZoomOracle<'a>> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(LabError::InvalidArgument(format!("threshold {gamma} outside [0, 1]")));
    }
    Ok(ZoomOracle {
        blur: blur_sphere(region, delta, inner_samples, source)?,
        gamma,
    })
}

/// Paired comparison of `Î_P(A)` with `Î_P(A ∗ cap_δ)` for each `δ`.
///
/// Every Haar sample is shared by all rows. The blurred product uses
/// independent oracle queries per point, so it is unbiased for
/// `∏ (A ∗ cap_δ)(R v_i)`.
pub fn spherical_counting_probe(
    region: &SphereRegion,
    p: &Configuration,
    deltas: &[f64],
    samples: u64,
    inner_samples: u64,
    source: &RandomSource,
) -> Result<Vec<ProbeRow>> {
    check_on_region(region, p)?;
    if !super::super::config::admissible_spherical(p, &ToleranceProfile::default())? {
        return Err(LabError::InvalidArgument(format!(
            "configuration '{}' is not admissible on S^{}",
            p.label, region.d
        )));
    }
    let oracles = deltas
        .iter()
        .enumerate()
        .map(|(j, &delta)| blur_sphere(region, delta, inner_samples, &source.derive(u64::MAX - 1 - j as u64)))
        .collect::<Result<Vec<_>>>()?;
    let dim = region.ambient_dim();
    let k = p.len() as u64;
    let moments = accumulate(samples, source, oracles.len(), |index, rng, out| {
        let r = haar_rotation(dim, rng);
        let moved: Vec<Vec<f64>> = p.points.iter().map(|v| r.apply(v)).collect();
        let base = f64::from(moved.iter().all(|y| region.contains(y)));
        for (slot, oracle) in out.iter_mut().zip(&oracles) {
            let blurred: f64 = moved
                .iter()
                .enumerate()
                .map(|(i, y)| oracle.eval(y, index * k + i as u64).value)
                .product();
            *slot = base - blurred;
        }
    });
    Ok(deltas
        .iter()
        .zip(&moments)
        .map(|(&delta, m)| ProbeRow {
            delta,
            deviation: m.mean.abs(),
            std_error: m.std_error(),
        })
        .collect())
}

/// Averages `σ(⋂_i R_i A_i)` over independent Haar tuples and compares it
/// with `∏ σ(A_i)`. Each tuple's intersection measure is estimated from
/// `samples` uniform points.
pub fn rotation_intersection_experiment(
    regions: &[SphereRegion],
    rotations_count: u64,
    samples: u64,
    source: &RandomSource,
) -> Result<IntersectionReport> {
    let first = regions
        .first()
        .ok_or_else(|| LabError::InvalidArgument("no regions supplied".into()))?;
    if let Some(bad) = regions.iter().find(|r| r.d != first.d) {
        return Err(LabError::DimMismatch {
            expected: first.d,
            found: bad.d,
        });
    }
    if rotations_count == 0 || samples == 0 {
        return Err(LabError::InvalidArgument(
            "need positive rotation and sample counts".into(),
        ));
    }
    let d = first.d;
    let measures: Vec<Estimate> = regions
        .iter()
        .enumerate()
        .map(|(i, r)| region_measure(r, rotations_count * samples, &source.derive(u64::MAX - 1 - i as u64)))
        .collect();
    let product: f64 = measures.iter().map(|m| m.value).product();
    let product_var: f64 = (0..measures.len())
        .map(|i| {
            let others: f64 = measures
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, m)| m.value)
                .product();
            (others * measures[i].std_error).powi(2)
        })
        .sum();
    let m = accumulate(rotations_count, source, 1, |_, rng, out| {
        let rots: Vec<_> = regions.iter().map(|_| haar_rotation(d + 1, rng)).collect();
        let hits = (0..samples)
            .filter(|_| {
                let x = uniform_sphere_point(d, rng);
                regions
                    .iter()
                    .zip(&rots)
                    .all(|(reg, r)| reg.contains(&r.apply_inverse(&x)))
            })
            .count();
        out[0] = hits as f64 / samples as f64;
    });
    let average = m[0].estimate(source.seed);
    Ok(IntersectionReport {
        average,
        product,
        difference: Estimate {
            value: average.value - product,
            std_error: (average.std_error.powi(2) + product_var).sqrt(),
            ..average
        },
    })
}

/// One row of a contraction-scale scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub t: f64,
    /// σ(A_t), exact.
    pub density: f64,
    pub std_error: f64,
    /// `1 − 1/k`.
    pub ceiling: f64,
    pub caps: usize,
    /// Sampled rotations placing `tP` inside `A_t` (0 for a valid avoider).
    pub copy_hits: u64,
}

/// Certified avoider densities `σ(A_t)` against the ceiling `1 − 1/k`.
/// Every row uses the same source, so the `t = 1` row equals a direct
/// [`cap_avoider`] call.
pub fn contraction_scale_scan(
    p: &Configuration,
    t_list: &[f64],
    attempts: u64,
    samples: u64,
    source: &RandomSource,
) -> Result<Vec<ScanRow>> {
    let ceiling = avoider_ceiling(p.len());
    t_list
        .iter()
        .map(|&t| {
            let a = cap_avoider(p, t, attempts, source)?;
            let copy_hits = if samples > 0 {
                count_copy_hits(&a.region, &a.avoided, samples, &source.derive(u64::MAX))?
            } else {
                0
            };
            Ok(ScanRow {
                t,
                density: a.density,
                std_error: 0.0,
                ceiling,
                caps: a.packing.caps.len(),
                copy_hits,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(dim: usize, i: usize) -> Vec<f64> {
        (0..dim).map(|j| f64::from(i == j)).collect()
    }

    #[test]
    fn full_sphere_counts_everything() {
        let p = Configuration::from_points("p", vec![axis(3, 0), axis(3, 1)]).unwrap();
        let e = ip_estimate_sphere(&SphereRegion::full(2), &p, 1000, &RandomSource::new(1)).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn single_point_matches_measure() {
        let cap = SphereRegion::cap(2, axis(3, 2), 1.0).unwrap();
        let p = Configuration::from_points("p", vec![axis(3, 0)]).unwrap();
        let e = ip_estimate_sphere(&cap, &p, 100_000, &RandomSource::new(2)).unwrap();
        assert!((e.value - 0.25).abs() <= 4.0 * e.std_error);
    }

    #[test]
    fn antipodes_avoid_open_hemisphere() {
        let h = SphereRegion::hemisphere(2, axis(3, 2)).unwrap();
        let p = Configuration::from_points("p", vec![axis(3, 0), vec![-1.0, 0.0, 0.0]]).unwrap();
        assert_eq!(count_copy_hits(&h, &p, 200_000, &RandomSource::new(3)).unwrap(), 0);
    }

    #[test]
    fn not_on_sphere() {
        let p = Configuration::from_points("p", vec![vec![2.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(
            ip_estimate_sphere(&SphereRegion::full(2), &p, 10, &RandomSource::new(1)),
            Err(LabError::NotOnSphere { .. })
        ));
        let q = Configuration::from_points("q", vec![axis(4, 0)]).unwrap();
        assert!(matches!(
            ip_estimate_sphere(&SphereRegion::full(2), &q, 10, &RandomSource::new(1)),
            Err(LabError::DimMismatch { .. })
        ));
    }

    #[test]
    fn blur_oracle_cases() {
        let src = RandomSource::new(4);
        let full = SphereRegion::full(2);
        let b = blur_sphere(&full, 0.5, 64, &src).unwrap();
        assert_eq!(b.eval(&axis(3, 0), 0).value, 1.0);

        let cap = SphereRegion::cap(2, axis(3, 2), 1.0).unwrap();
        let whole = blur_sphere(&cap, 2.0, 20_000, &src).unwrap();
        let e = whole.eval(&axis(3, 0), 7);
        assert!((e.value - 0.25).abs() <= 4.0 * e.std_error);

        let h = SphereRegion::hemisphere(2, axis(3, 2)).unwrap();
        let hb = blur_sphere(&h, 0.6, 20_000, &src).unwrap();
        let e = hb.eval(&axis(3, 0), 9);
        assert!((e.value - 0.5).abs() <= 4.0 * e.std_error);
        assert_eq!(hb.eval(&axis(3, 0), 9), e);
    }

    #[test]
    fn zoom_oracle_cases() {
        let src = RandomSource::new(5);
        let cap = SphereRegion::cap(2, axis(3, 2), 1.0).unwrap();
        assert!(zoom_out_sphere(&cap, 0.3, 0.0, 16, &src)
            .unwrap()
            .contains(&axis(3, 0), 1));
        assert!(zoom_out_sphere(&cap, 0.1, 1.0, 64, &src)
            .unwrap()
            .contains(&axis(3, 2), 1));
        let h = SphereRegion::hemisphere(2, axis(3, 2)).unwrap();
        let z = zoom_out_sphere(&h, 0.5, 0.99, 256, &src).unwrap();
        assert!(!z.contains(&axis(3, 0), 3));
    }

    #[test]
    fn intersection_with_full_sphere() {
        let cap = SphereRegion::cap(2, axis(3, 2), 1.0).unwrap();
        let r =
            rotation_intersection_experiment(&[cap, SphereRegion::full(2)], 500, 200, &RandomSource::new(6)).unwrap();
        assert!((r.average.value - 0.25).abs() <= 4.0 * r.average.std_error);
        assert!((r.product - 0.25).abs() < 1e-12);
        let bad = rotation_intersection_experiment(
            &[SphereRegion::full(2), SphereRegion::full(3)],
            10,
            10,
            &RandomSource::new(6),
        );
        assert!(matches!(bad, Err(LabError::DimMismatch { .. })));
    }

    #[test]
    fn counting_probe_on_full_sphere() {
        let p = Configuration::from_points("p", vec![axis(4, 0), axis(4, 1)]).unwrap();
        let rows =
            spherical_counting_probe(&SphereRegion::full(3), &p, &[0.5, 0.2], 2000, 8, &RandomSource::new(7)).unwrap();
        assert!(rows.iter().all(|r| r.deviation == 0.0));
    }

    #[test]
    fn scan_first_row_matches_direct_call() {
        let p = Configuration::from_points("p", vec![axis(3, 0), axis(3, 1)]).unwrap();
        let src = RandomSource::new(8);
        let rows = contraction_scale_scan(&p, &[1.0, 0.5], 2000, 10_000, &src).unwrap();
        let direct = cap_avoider(&p, 1.0, 2000, &src).unwrap();
        assert_eq!(rows[0].density, direct.density);
        assert!(rows
            .iter()
            .all(|r| r.copy_hits == 0 && r.density > 0.0 && r.density <= r.ceiling));
        assert!(contraction_scale_scan(&p, &[1.5], 10, 0, &src).is_err());
    }
}
