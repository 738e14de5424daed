use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::region::cap_measure;
use crate::error::{LabError, Result};
use crate::sampling::{angular_radius, chordal_radius, uniform_sphere_point, RandomSource};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackedCap {
    pub center: Vec<f64>,
    pub rho: f64,
}

/// Pairwise-disjoint caps on S^d with chordal radii at most `max_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapPacking {
    pub d: usize,
    pub caps: Vec<PackedCap>,
    pub max_radius: f64,
}

fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().clamp(-1.0, 1.0).acos()
}

/// Disjointness criterion: angular separation exceeds the sum of angular radii.
pub fn caps_disjoint(a: &PackedCap, b: &PackedCap) -> bool {
    angle_between(&a.center, &b.center) > angular_radius(a.rho) + angular_radius(b.rho)
}

impl CapPacking {
    pub fn is_disjoint(&self) -> bool {
        let caps = &self.caps;
        (0..caps.len()).all(|i| ((i + 1)..caps.len()).all(|j| caps_disjoint(&caps[i], &caps[j])))
    }

    /// Total covered measure; exact because the caps are disjoint.
    pub fn density(&self) -> f64 {
        self.caps
            .iter()
            .map(|c| cap_measure(self.d, c.rho).expect("packed radii lie in (0, 2]"))
            .sum()
    }

    /// One line per cap: centre coordinates then `rho`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let cols: Vec<String> = (0..=self.d).map(|i| format!("c{i}")).collect();
        let _ = writeln!(out, "{},rho", cols.join(","));
        for cap in &self.caps {
            for c in &cap.center {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{}", cap.rho);
        }
        out
    }
}

/// Random sequential adsorption of caps of radius `eps`.
///
/// Each attempt draws a uniform centre. If a radius-`eps` cap there is
/// disjoint from all accepted caps it is kept; otherwise the largest
/// feasible radius is used when it is at least `min_radius`, and the
/// attempt is skipped when not.
pub fn rsa_packing(d: usize, eps: f64, min_radius: f64, attempts: u64, source: &RandomSource) -> Result<CapPacking> {
    if !(eps > 0.0 && eps <= 2.0) {
        return Err(LabError::BadRadius(eps));
    }
    if attempts == 0 {
        return Err(LabError::InvalidArgument("need at least one attempt".into()));
    }
    let mut rng = source.rng();
    let theta_eps = angular_radius(eps);
    let mut caps: Vec<PackedCap> = Vec::new();
    let mut thetas: Vec<f64> = Vec::new();
    for _ in 0..attempts {
        let center = uniform_sphere_point(d, &mut rng);
        let room = caps
            .iter()
            .zip(&thetas)
            .map(|(c, th)| angle_between(&center, &c.center) - th)
            .fold(f64::INFINITY, f64::min);
        let rho = if room > theta_eps {
            eps
        } else if room > 0.0 {
            chordal_radius(room * (1.0 - 1e-9))
        } else {
            continue;
        };
        if rho < min_radius {
            continue;
        }
        let cap = PackedCap { center, rho };
        if !caps.iter().all(|c| caps_disjoint(c, &cap)) {
            continue;
        }
        thetas.push(angular_radius(rho));
        caps.push(cap);
    }
    Ok(CapPacking {
        d,
        caps,
        max_radius: eps,
    })
}

/// Greedy packing allowing caps to shrink down to `eps/4`.
pub fn greedy_cap_packing(d: usize, eps: f64, attempts: u64, source: &RandomSource) -> Result<CapPacking> {
    rsa_packing(d, eps, eps / 4.0, attempts, source)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_and_bounded() {
        let p = greedy_cap_packing(2, 0.5, 20_000, &RandomSource::new(1)).unwrap();
        assert!(p.is_disjoint());
        assert!(p.caps.iter().all(|c| c.rho <= 0.5 && c.rho >= 0.125));
        assert!(p.density() < 1.0);
    }

    #[test]
    fn whole_sphere_cap() {
        let p = greedy_cap_packing(3, 2.0, 50, &RandomSource::new(2)).unwrap();
        assert_eq!(p.caps.len(), 1);
        assert_eq!(p.density(), 1.0);
    }

    #[test]
    fn fixed_radius_mode() {
        let p = rsa_packing(2, 0.4, 0.4, 5_000, &RandomSource::new(3)).unwrap();
        assert!(p.caps.iter().all(|c| c.rho == 0.4));
        assert!(p.is_disjoint());
    }

    #[test]
    fn csv_layout() {
        let p = rsa_packing(2, 1.0, 1.0, 3, &RandomSource::new(4)).unwrap();
        let csv = p.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("c0,c1,c2,rho"));
        assert_eq!(lines.count(), p.caps.len());
    }
}
