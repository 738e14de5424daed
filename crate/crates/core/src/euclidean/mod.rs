//! Euclidean experiments on the periodic torus `(R/RZ)^d`.

mod avoider;
mod bound;
mod counting;
mod grid;
mod ops;

pub use crate::estimate::ProbeRow;
pub use avoider::{cell_avoider, AvoiderGeometry, CellAvoider};
pub use bound::{boundary_discrepancy, density_bound_report, periodization_factor, Construction, DensityBound};
pub use counting::{
    counting_probe, equicontinuity_probe, intersection_experiment, ip_estimate_torus, CountingProbe,
    EquicontinuityReport, ProbeSchedule,
};
pub use grid::{sidecar_path, GridMetadata, TorusGrid, GRID_HEADER_LEN, GRID_MAGIC, GRID_VERSION};
pub use ops::{blur, zoom_out};
