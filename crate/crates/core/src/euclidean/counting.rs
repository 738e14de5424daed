use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::TorusGrid;
use super::ops::blur;
use crate::config::{admissible_euclidean, Configuration, ToleranceProfile};
use crate::error::{LabError, Result};
use crate::estimate::{accumulate, mean_estimate, Estimate, IntersectionReport, ProbeRow};
use crate::sampling::{haar_rotation, uniform_ball_point, uniform_cube_point, LabRng, RandomSource};

fn check_dims(f: &TorusGrid, p: &Configuration) -> Result<()> {
    if p.ambient_dim != f.dim() {
        return Err(LabError::DimMismatch {
            expected: f.dim(),
            found: p.ambient_dim,
        });
    }
    Ok(())
}

fn check_admissible(p: &Configuration) -> Result<()> {
    if admissible_euclidean(p, &ToleranceProfile::default()) {
        Ok(())
    } else {
        Err(LabError::InvalidArgument(format!(
            "configuration '{}' is not admissible in R^{}",
            p.label, p.ambient_dim
        )))
    }
}

/// Draws a placement `(x, T)` and returns the rotated-and-translated points.
fn random_copy(p: &Configuration, side: f64, rng: &mut LabRng) -> Vec<Vec<f64>> {
    let d = p.ambient_dim;
    let x = uniform_cube_point(d, side, rng);
    let t = haar_rotation(d, rng);
    p.points
        .iter()
        .map(|v| t.apply(v).into_iter().zip(&x).map(|(a, b)| a + b).collect())
        .collect()
}

fn copy_product(f: &TorusGrid, copy: &[Vec<f64>]) -> f64 {
    copy.iter().map(|y| f.value_at(y)).product()
}

/// Monte Carlo estimate of the normalized counting functional
/// `E_{x, T}[∏_i f(x + T·v_i)]` with `x` uniform on the torus and `T` Haar
/// on O(d).
pub fn ip_estimate_torus(f: &TorusGrid, p: &Configuration, samples: u64, source: &RandomSource) -> Result<Estimate> {
    check_dims(f, p)?;
    if p.diameter() >= f.side() / 2.0 {
        log::warn!(
            "configuration diameter {} is not below half the torus side {}",
            p.diameter(),
            f.side()
        );
    }
    Ok(mean_estimate(samples, source, |_, rng| {
        copy_product(f, &random_copy(p, f.side(), rng))
    }))
}

/// Decreasing blur radii together with the zoom-out and margin parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSchedule {
    pub deltas: Vec<f64>,
    pub gamma: f64,
    pub epsilon: f64,
}

impl ProbeSchedule {
    pub fn new(deltas: Vec<f64>, gamma: f64, epsilon: f64, side: f64) -> Result<Self> {
        if deltas.is_empty() {
            return Err(LabError::InvalidArgument("empty delta schedule".into()));
        }
        if deltas.iter().any(|&d| !(d > 0.0 && d <= side)) {
            return Err(LabError::InvalidArgument(format!("deltas must lie in (0, {side}]")));
        }
        if deltas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(LabError::InvalidArgument("deltas must be strictly decreasing".into()));
        }
        for (name, v) in [("gamma", gamma), ("epsilon", epsilon)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(LabError::InvalidArgument(format!("{name} = {v} outside (0, 1)")));
            }
        }
        Ok(Self { deltas, gamma, epsilon })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingProbe {
    pub rows: Vec<ProbeRow>,
    /// `max_δ deviation / (δ/R)^{1/4}`.
    pub fitted_constant: f64,
}

/// Paired-sample comparison of the counting functional on `f` and on its
/// blurs: every placement `(x, T)` is evaluated on all grids.
pub fn counting_probe(
    f: &TorusGrid,
    p: &Configuration,
    schedule: &ProbeSchedule,
    samples: u64,
    source: &RandomSource,
) -> Result<CountingProbe> {
    check_dims(f, p)?;
    check_admissible(p)?;
    let blurred = schedule
        .deltas
        .iter()
        .map(|&delta| blur(f, delta))
        .collect::<Result<Vec<_>>>()?;
    let moments = accumulate(samples, source, blurred.len(), |_, rng, out| {
        let copy = random_copy(p, f.side(), rng);
        let base = copy_product(f, &copy);
        for (slot, g) in out.iter_mut().zip(&blurred) {
            *slot = base - copy_product(g, &copy);
        }
    });
    let rows: Vec<ProbeRow> = schedule
        .deltas
        .iter()
        .zip(&moments)
        .map(|(&delta, m)| ProbeRow {
            delta,
            deviation: m.mean.abs(),
            std_error: m.std_error(),
        })
        .collect();
    let fitted_constant = rows
        .iter()
        .map(|r| r.deviation / (r.delta / f.side()).powf(0.25))
        .fold(0.0, f64::max);
    Ok(CountingProbe { rows, fitted_constant })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquicontinuityReport {
    pub perturb: f64,
    /// Signed paired difference `Î_{P'} − Î_P` per trial.
    pub trials: Vec<Estimate>,
    /// The trial with the largest `|Î_{P'} − Î_P|` (value made non-negative).
    pub worst: Estimate,
}

/// Compares `Î_P(f)` with `Î_{P'}(f)` for `trials` perturbations `P'` whose
/// points move independently and uniformly within a ball of radius `perturb`.
pub fn equicontinuity_probe(
    f: &TorusGrid,
    p: &Configuration,
    perturb: f64,
    trials: usize,
    samples: u64,
    source: &RandomSource,
) -> Result<EquicontinuityReport> {
    check_dims(f, p)?;
    check_admissible(p)?;
    if !(perturb >= 0.0 && perturb.is_finite()) || trials == 0 {
        return Err(LabError::InvalidArgument(
            "need perturb ≥ 0 and at least one trial".into(),
        ));
    }
    let d = p.ambient_dim;
    let mut rng = source.derive(u64::MAX).rng();
    let mut results = Vec::with_capacity(trials);
    for trial in 0..trials {
        let moved: Vec<Vec<f64>> = p
            .points
            .iter()
            .map(|v| {
                let u = uniform_ball_point(d, perturb, &mut rng);
                v.iter().zip(&u).map(|(a, b)| a + b).collect()
            })
            .collect();
        let q = Configuration::new(format!("{}~{trial}", p.label), d, moved)?;
        // Every trial reuses the same placement stream.
        let m = accumulate(samples, source, 1, |_, rng, out| {
            let x = uniform_cube_point(d, f.side(), rng);
            let t = haar_rotation(d, rng);
            let value = |cfg: &Configuration| -> f64 {
                cfg.points
                    .iter()
                    .map(|v| {
                        let y: Vec<f64> = t.apply(v).into_iter().zip(&x).map(|(a, b)| a + b).collect();
                        f.value_at(&y)
                    })
                    .product()
            };
            out[0] = value(&q) - value(p);
        });
        results.push(m[0].estimate(source.seed));
    }
    let worst = results
        .iter()
        .copied()
        .max_by(|a, b| a.value.abs().total_cmp(&b.value.abs()))
        .map(|e| Estimate {
            value: e.value.abs(),
            ..e
        })
        .expect("at least one trial");
    Ok(EquicontinuityReport {
        perturb,
        trials: results,
        worst,
    })
}

/// Averages the density of `⋂_i (s_i + A_i)` over independent uniform
/// whole-cell translates `s_i`, and compares it with `∏_i density(A_i)`.
///
/// With `samples = 0` each intersection density is computed exactly over
/// all cells; otherwise it is estimated from `samples` uniform cells.
pub fn intersection_experiment(
    grids: &[TorusGrid],
    translates: u64,
    samples: u64,
    source: &RandomSource,
) -> Result<IntersectionReport> {
    let first = grids
        .first()
        .ok_or_else(|| LabError::InvalidArgument("no grids supplied".into()))?;
    if let Some(bad) = grids.iter().find(|g| !g.same_shape(first)) {
        return Err(LabError::ShapeMismatch(format!(
            "grid (d={}, N={}, R={}) vs (d={}, N={}, R={})",
            first.dim(),
            first.cells_per_axis(),
            first.side(),
            bad.dim(),
            bad.cells_per_axis(),
            bad.side()
        )));
    }
    if translates == 0 {
        return Err(LabError::InvalidArgument("need at least one translate".into()));
    }
    let d = first.dim();
    let n = first.cells_per_axis();
    let total = first.len();
    let product: f64 = grids.iter().map(TorusGrid::density).product();
    let m = accumulate(translates, source, 1, |_, rng, out| {
        let shifts: Vec<Vec<i64>> = grids
            .iter()
            .map(|_| (0..d).map(|_| rng.random_range(0..n) as i64).collect())
            .collect();
        let mut idx = vec![0usize; d];
        let mut src = vec![0i64; d];
        let mut cell_value = |flat: usize| -> f64 {
            super::grid::unflatten(flat, n, &mut idx);
            grids
                .iter()
                .zip(&shifts)
                .map(|(g, s)| {
                    for a in 0..d {
                        src[a] = idx[a] as i64 - s[a];
                    }
                    g.get(&src)
                })
                .product()
        };
        out[0] = if samples == 0 {
            (0..total).map(&mut cell_value).sum::<f64>() / total as f64
        } else {
            let picks: Vec<usize> = (0..samples).map(|_| rng.random_range(0..total)).collect();
            picks.into_iter().map(&mut cell_value).sum::<f64>() / samples as f64
        };
    });
    let average = m[0].estimate(source.seed);
    Ok(IntersectionReport {
        average,
        product,
        difference: Estimate {
            value: average.value - product,
            ..average
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(len: f64) -> Configuration {
        Configuration::from_points("pair", vec![vec![0.0, 0.0], vec![len, 0.0]]).unwrap()
    }

    #[test]
    fn full_and_constant_grids() {
        let src = RandomSource::new(1);
        let one = TorusGrid::constant(2, 1.0, 16, 1.0).unwrap();
        let e = ip_estimate_torus(&one, &pair(0.2), 10_000, &src).unwrap();
        assert_eq!(e.value, 1.0);
        let c = TorusGrid::constant(2, 1.0, 16, 0.6).unwrap();
        let e = ip_estimate_torus(&c, &pair(0.2), 10_000, &src).unwrap();
        assert!((e.value - 0.36).abs() < 1e-12);
    }

    #[test]
    fn dim_mismatch() {
        let g = TorusGrid::constant(3, 1.0, 4, 1.0).unwrap();
        assert!(matches!(
            ip_estimate_torus(&g, &pair(0.1), 100, &RandomSource::new(1)),
            Err(LabError::DimMismatch { .. })
        ));
    }

    #[test]
    fn estimate_bounded_by_density() {
        let g = TorusGrid::random_binary(2, 1.0, 32, 0.3, &RandomSource::new(2)).unwrap();
        let e = ip_estimate_torus(&g, &pair(0.2), 50_000, &RandomSource::new(3)).unwrap();
        assert!(e.value <= g.density() + 4.0 * e.std_error);
        assert!((0.0..=1.0).contains(&e.value));
    }

    #[test]
    fn counting_probe_constant_grid() {
        let g = TorusGrid::constant(2, 1.0, 32, 0.7).unwrap();
        let s = ProbeSchedule::new(vec![0.4, 0.2, 0.1], 0.5, 0.1, 1.0).unwrap();
        let probe = counting_probe(&g, &pair(0.2), &s, 5_000, &RandomSource::new(4)).unwrap();
        assert!(probe.rows.iter().all(|r| r.deviation < 1e-12));
    }

    #[test]
    fn schedule_validation() {
        assert!(ProbeSchedule::new(vec![0.1, 0.2], 0.5, 0.1, 1.0).is_err());
        assert!(ProbeSchedule::new(vec![2.0], 0.5, 0.1, 1.0).is_err());
        assert!(ProbeSchedule::new(vec![0.2], 1.0, 0.1, 1.0).is_err());
        assert!(ProbeSchedule::new(vec![], 0.5, 0.1, 1.0).is_err());
    }

    #[test]
    fn equicontinuity_zero_perturbation() {
        let g = TorusGrid::random_binary(2, 1.0, 32, 0.5, &RandomSource::new(5)).unwrap();
        let r = equicontinuity_probe(&g, &pair(0.2), 0.0, 3, 5_000, &RandomSource::new(6)).unwrap();
        assert_eq!(r.worst.value, 0.0);
        let c = TorusGrid::constant(2, 1.0, 32, 0.5).unwrap();
        let r = equicontinuity_probe(&c, &pair(0.2), 0.05, 3, 5_000, &RandomSource::new(6)).unwrap();
        assert!(r.worst.value < 1e-12);
    }

    #[test]
    fn intersection_trivial_cases() {
        let a = TorusGrid::random_binary(2, 1.0, 16, 0.35, &RandomSource::new(7)).unwrap();
        let full = TorusGrid::constant(2, 1.0, 16, 1.0).unwrap();
        let r = intersection_experiment(std::slice::from_ref(&a), 50, 0, &RandomSource::new(8)).unwrap();
        assert!((r.average.value - a.density()).abs() < 1e-12);
        let r = intersection_experiment(&[a.clone(), full], 50, 0, &RandomSource::new(8)).unwrap();
        assert!((r.average.value - a.density()).abs() < 1e-12);
        let other = TorusGrid::constant(2, 1.0, 8, 1.0).unwrap();
        assert!(matches!(
            intersection_experiment(&[a, other], 5, 0, &RandomSource::new(8)),
            Err(LabError::ShapeMismatch(_))
        ));
    }
}
