use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::estimate::{mean_estimate, Estimate};
use crate::harmonics::polar_integral;
use crate::sampling::{angular_radius, uniform_sphere_point, RandomSource};

pub const MAX_DEPTH: usize = 64;
const UNIT_TOL: f64 = 1e-9;

/// Expression tree of a region of S^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum RegionExpr {
    /// Closed cap `{y : ‖y − center‖ ≤ rho}`.
    Cap {
        center: Vec<f64>,
        rho: f64,
    },
    /// Open half-space `{y : normal·y > offset}`.
    #[serde(rename = "halfspace")]
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
    },
    Full,
    Union {
        args: Vec<RegionExpr>,
    },
    #[serde(rename = "inter")]
    Intersection {
        args: Vec<RegionExpr>,
    },
    #[serde(rename = "compl")]
    Complement {
        arg: Box<RegionExpr>,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl RegionExpr {
    pub fn cap(center: Vec<f64>, rho: f64) -> Self {
        RegionExpr::Cap { center, rho }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            RegionExpr::Cap { center, rho } => {
                // ‖x − c‖² = 2 − 2 x·c for unit vectors
                2.0 - 2.0 * dot(x, center) <= rho * rho
            }
            RegionExpr::HalfSpace { normal, offset } => dot(x, normal) > *offset,
            RegionExpr::Full => true,
            RegionExpr::Union { args } => args.iter().any(|a| a.contains(x)),
            RegionExpr::Intersection { args } => args.iter().all(|a| a.contains(x)),
            RegionExpr::Complement { arg } => !arg.contains(x),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            RegionExpr::Union { args } | RegionExpr::Intersection { args } => {
                1 + args.iter().map(RegionExpr::depth).max().unwrap_or(0)
            }
            RegionExpr::Complement { arg } => 1 + arg.depth(),
            _ => 1,
        }
    }

    fn validate(&self, ambient: usize) -> Result<()> {
        match self {
            RegionExpr::Cap { center, rho } => {
                if center.len() != ambient {
                    return Err(LabError::DimMismatch {
                        expected: ambient,
                        found: center.len(),
                    });
                }
                let n = dot(center, center).sqrt();
                if (n - 1.0).abs() > UNIT_TOL {
                    return Err(LabError::NotOnSphere { index: 0, norm: n });
                }
                if !(*rho > 0.0 && *rho <= 2.0) {
                    return Err(LabError::BadRadius(*rho));
                }
                Ok(())
            }
            RegionExpr::HalfSpace { normal, offset } => {
                if normal.len() != ambient {
                    return Err(LabError::DimMismatch {
                        expected: ambient,
                        found: normal.len(),
                    });
                }
                if !offset.is_finite() || normal.iter().any(|v| !v.is_finite()) {
                    return Err(LabError::InvalidRegion("non-finite half-space".into()));
                }
                Ok(())
            }
            RegionExpr::Full => Ok(()),
            RegionExpr::Union { args } | RegionExpr::Intersection { args } => {
                if args.is_empty() {
                    return Err(LabError::InvalidRegion("empty union/intersection".into()));
                }
                args.iter().try_for_each(|a| a.validate(ambient))
            }
            RegionExpr::Complement { arg } => arg.validate(ambient),
        }
    }
}

/// Label of a configuration the region provably avoids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub label: String,
    pub proof: bool,
}

/// A membership oracle on S^d ⊂ R^{d+1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRegion")]
pub struct SphereRegion {
    pub d: usize,
    pub expr: RegionExpr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_avoids: Option<Certificate>,
}

#[derive(Deserialize)]
struct RawRegion {
    d: usize,
    expr: RegionExpr,
    #[serde(default)]
    certified_avoids: Option<Certificate>,
}

impl TryFrom<RawRegion> for SphereRegion {
    type Error = LabError;

    fn try_from(raw: RawRegion) -> Result<Self> {
        let mut r = SphereRegion::new(raw.d, raw.expr)?;
        r.certified_avoids = raw.certified_avoids;
        Ok(r)
    }
}

impl SphereRegion {
    pub fn new(d: usize, expr: RegionExpr) -> Result<Self> {
        if d == 0 {
            return Err(LabError::InvalidRegion("sphere dimension must be ≥ 1".into()));
        }
        if expr.depth() > MAX_DEPTH {
            return Err(LabError::InvalidRegion(format!(
                "depth {} exceeds {MAX_DEPTH}",
                expr.depth()
            )));
        }
        expr.validate(d + 1)?;
        Ok(Self {
            d,
            expr,
            certified_avoids: None,
        })
    }

    pub fn full(d: usize) -> Self {
        Self {
            d,
            expr: RegionExpr::Full,
            certified_avoids: None,
        }
    }

    pub fn cap(d: usize, center: Vec<f64>, rho: f64) -> Result<Self> {
        Self::new(d, RegionExpr::cap(center, rho))
    }

    /// Open hemisphere `{x : normal·x > 0}`.
    pub fn hemisphere(d: usize, normal: Vec<f64>) -> Result<Self> {
        Self::new(d, RegionExpr::HalfSpace { normal, offset: 0.0 })
    }

    pub fn complement(&self) -> Self {
        Self {
            d: self.d,
            expr: RegionExpr::Complement {
                arg: Box::new(self.expr.clone()),
            },
            certified_avoids: None,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.expr.contains(x)
    }

    pub fn ambient_dim(&self) -> usize {
        self.d + 1
    }

    /// Exact measure when the tree is a single cap or the full sphere.
    pub fn exact_measure(&self) -> Option<f64> {
        match &self.expr {
            RegionExpr::Full => Some(1.0),
            RegionExpr::Cap { rho, .. } => cap_measure(self.d, *rho).ok(),
            _ => None,
        }
    }
}

/// Normalized measure of a cap of chordal radius `rho` on S^d.
pub fn cap_measure(d: usize, rho: f64) -> Result<f64> {
    if !(rho > 0.0 && rho <= 2.0) {
        return Err(LabError::BadRadius(rho));
    }
    if d == 0 {
        return Err(LabError::InvalidArgument("sphere dimension must be ≥ 1".into()));
    }
    if rho == 2.0 {
        return Ok(1.0);
    }
    let theta = angular_radius(rho);
    let part = polar_integral(d, theta, |_| 1.0, 1e-14);
    let whole = polar_integral(d, std::f64::consts::PI, |_| 1.0, 1e-14);
    Ok((part / whole).clamp(0.0, 1.0))
}

/// σ(A): exact for a single cap or the full sphere, otherwise Monte Carlo.
pub fn region_measure(region: &SphereRegion, samples: u64, source: &RandomSource) -> Estimate {
    if let Some(m) = region.exact_measure() {
        return Estimate::exact(m, source.seed);
    }
    let d = region.d;
    mean_estimate(samples, source, |_, rng| {
        f64::from(region.contains(&uniform_sphere_point(d, rng)))
    })
}
