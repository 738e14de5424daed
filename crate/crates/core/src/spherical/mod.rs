//! Spherical experiments on S^d ⊂ R^{d+1}. Regions are membership oracles;
//! the north pole is the last coordinate axis.

mod avoider;
mod experiments;
mod packing;
mod region;

pub use avoider::{avoider_ceiling, cap_avoider, certifies_avoidance, CapAvoider};
pub use experiments::{
    blur_sphere, contraction_scale_scan, count_copy_hits, ip_estimate_sphere, rotation_intersection_experiment,
    spherical_counting_probe, zoom_out_sphere, BlurOracle, ScanRow, ZoomOracle,
};
pub use packing::{caps_disjoint, greedy_cap_packing, rsa_packing, CapPacking, PackedCap};
pub use region::{cap_measure, region_measure, Certificate, RegionExpr, SphereRegion, MAX_DEPTH};
