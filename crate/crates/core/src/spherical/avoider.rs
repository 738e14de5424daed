use serde::{Deserialize, Serialize};

use super::packing::{rsa_packing, CapPacking, PackedCap};
use super::region::{cap_measure, Certificate, RegionExpr, SphereRegion};
use crate::config::{contract_to_sphere, Configuration, ToleranceProfile};
use crate::error::{LabError, Result};
use crate::sampling::{angular_radius, RandomSource};

/// Union of quarter-radius caps concentric with a packing of radius
/// `diam(tP)`; it contains no copy of `tP`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapAvoider {
    pub region: SphereRegion,
    pub packing: CapPacking,
    pub scale: f64,
    /// The contracted configuration the region avoids.
    pub avoided: Configuration,
    pub diameter: f64,
    /// σ(A_t), exact: the quarter caps are disjoint.
    pub density: f64,
}

/// Upper bound `1 − 1/k` on the measure of any set avoiding a `k`-point
/// configuration.
pub fn avoider_ceiling(k: usize) -> f64 {
    assert!(k >= 1, "configuration must have a point");
    1.0 - 1.0 / k as f64
}

/// Checks that no two points at chordal distance `diameter` fit in the
/// union of `caps`: each cap is too narrow to hold both, and any two caps
/// are angularly further apart than `diameter` subtends.
pub fn certifies_avoidance(caps: &[PackedCap], diameter: f64) -> bool {
    let theta_d = angular_radius(diameter);
    let thetas: Vec<f64> = caps.iter().map(|c| angular_radius(c.rho)).collect();
    let narrow = thetas.iter().all(|&th| 2.0 * th < theta_d);
    let apart = (0..caps.len()).all(|i| {
        ((i + 1)..caps.len()).all(|j| {
            let sep = caps[i]
                .center
                .iter()
                .zip(&caps[j].center)
                .map(|(a, b)| a * b)
                .sum::<f64>()
                .clamp(-1.0, 1.0)
                .acos();
            sep - thetas[i] - thetas[j] > theta_d
        })
    });
    narrow && apart
}

/// Builds `A_t` for the dilate `tP` placed on the sphere.
pub fn cap_avoider(p: &Configuration, t: f64, attempts: u64, source: &RandomSource) -> Result<CapAvoider> {
    if p.len() < 2 {
        return Err(LabError::InvalidArgument(
            "cap avoider needs at least two points".into(),
        ));
    }
    let tol = ToleranceProfile::default();
    let q = contract_to_sphere(p, t, &tol)?;
    let d = p.ambient_dim - 1;
    let diameter = q.diameter().min(2.0);
    let packing = rsa_packing(d, diameter, diameter, attempts, source)?;
    let quarters: Vec<PackedCap> = packing
        .caps
        .iter()
        .map(|c| PackedCap {
            center: c.center.clone(),
            rho: c.rho / 4.0,
        })
        .collect();
    if !certifies_avoidance(&quarters, diameter) {
        return Err(LabError::InfeasibleGeometry(
            "quarter caps fail the avoidance check".into(),
        ));
    }
    let density = quarters.iter().map(|c| cap_measure(d, c.rho)).sum::<Result<f64>>()?;
    let expr = if quarters.len() == 1 {
        RegionExpr::cap(quarters[0].center.clone(), quarters[0].rho)
    } else {
        RegionExpr::Union {
            args: quarters
                .iter()
                .map(|c| RegionExpr::cap(c.center.clone(), c.rho))
                .collect(),
        }
    };
    let mut region = SphereRegion::new(d, expr)?;
    region.certified_avoids = Some(Certificate {
        label: q.label.clone(),
        proof: true,
    });
    Ok(CapAvoider {
        region,
        packing,
        scale: t,
        avoided: q,
        diameter,
        density,
    })
}
