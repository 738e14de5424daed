use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A construction offered as a lower bound for an independence density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    pub label: String,
    pub density: f64,
    /// Avoidance is certified by construction or by a zero-hit estimate.
    pub certified: bool,
}

/// Bracket `lower ≤ m(P) ≤ upper` for a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityBound {
    pub config_label: String,
    pub lower: f64,
    pub upper: f64,
    pub method: String,
}

/// Lower bound from the best certified construction (0 if none), upper
/// bound from the smallest supplied ceiling (1 if none).
pub fn density_bound_report(
    config_label: &str,
    constructions: &[Construction],
    ceilings: &[f64],
) -> Result<DensityBound> {
    if let Some(c) = constructions.iter().find(|c| !c.certified) {
        return Err(LabError::InvalidArgument(format!(
            "construction '{}' is not certified avoiding",
            c.label
        )));
    }
    let best = constructions.iter().max_by(|a, b| a.density.total_cmp(&b.density));
    let lower = best.map_or(0.0, |c| c.density);
    let upper = ceilings.iter().copied().fold(1.0, f64::min);
    if lower > upper {
        return Err(LabError::InconsistentBound { lower, upper });
    }
    if lower < 0.0 {
        return Err(LabError::InvalidArgument(format!("negative density {lower}")));
    }
    Ok(DensityBound {
        config_label: config_label.to_string(),
        lower,
        upper,
        method: best.map_or_else(|| "none".to_string(), |c| c.label.clone()),
    })
}

/// Factor `(1 + diam/R)^{-d}` relating densities on the cube of side `R`
/// to densities of its periodization.
pub fn periodization_factor(diam: f64, side: f64, d: usize) -> f64 {
    (1.0 + diam / side).powi(-(d as i32))
}

/// Heuristic size `k·d·diam/R` of the torus-versus-cube discrepancy.
pub fn boundary_discrepancy(k: usize, d: usize, diam: f64, side: f64) -> f64 {
    (k * d) as f64 * diam / side
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_list() {
        let b = density_bound_report("p", &[], &[]).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 1.0));
    }

    #[test]
    fn inconsistent() {
        let c = Construction {
            label: "c".into(),
            density: 0.6,
            certified: true,
        };
        assert!(matches!(
            density_bound_report("p", &[c], &[1.0 - 1.0 / 2.0]),
            Err(LabError::InconsistentBound { .. })
        ));
    }

    #[test]
    fn uncertified_rejected() {
        let c = Construction {
            label: "c".into(),
            density: 0.1,
            certified: false,
        };
        assert!(density_bound_report("p", &[c], &[]).is_err());
    }

    #[test]
    fn factors() {
        assert!((periodization_factor(1.0, 9.0, 2) - 0.81).abs() < 1e-15);
        assert_eq!(boundary_discrepancy(2, 3, 0.5, 10.0), 0.3);
    }
}
