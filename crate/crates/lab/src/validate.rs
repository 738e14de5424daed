//! Static checks on a config. Nothing is sampled; grids are not built
//! except to read file headers.

use std::fmt;

use indep_core::config::{admissible_euclidean, admissible_spherical, contract_to_sphere};
use indep_core::spherical::SphereRegion;
use indep_core::{Configuration, LabError, ToleranceProfile};
use serde::Serialize;

use crate::config::*;
use crate::{error_code, LabCliError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

#[derive(Default)]
struct Diagnostics(Vec<Diagnostic>);

impl Diagnostics {
    fn push(&mut self, code: &str, message: impl Into<String>) {
        self.0.push(Diagnostic {
            code: code.into(),
            message: message.into(),
        });
    }

    fn error(&mut self, e: &LabError) {
        self.push(error_code(e), e.to_string());
    }

    fn cli(&mut self, e: &LabCliError) {
        match e {
            LabCliError::Core(inner) => self.error(inner),
            other => self.push("Schema", other.to_string()),
        }
    }

    fn config(&mut self, label: &str, points: &[Vec<f64>]) -> Option<Configuration> {
        match configuration(label, points) {
            Ok(p) => Some(p),
            Err(e) => {
                self.cli(&e);
                None
            }
        }
    }
}

/// Returns every problem found; an empty list means `run` will not fail
/// with a validation error.
pub fn validate(config: &ExperimentConfig) -> Vec<Diagnostic> {
    let mut diags = Diagnostics::default();
    if config.samples < MIN_SAMPLES {
        diags.push(
            "SampleBudget",
            format!("samples = {} is below the minimum {MIN_SAMPLES}", config.samples),
        );
    }
    if config.threads == Some(0) {
        diags.push("Schema", "threads must be positive");
    }
    match config.typed_params() {
        Ok(params) => check_params(config, &params, &mut diags),
        Err(e) => diags.cli(&e),
    }
    diags.0
}

fn check_params(config: &ExperimentConfig, params: &Params, diags: &mut Diagnostics) {
    let tol = ToleranceProfile::default();
    match params {
        Params::IpEstimate(p) => {
            if let Some(cfg) = diags.config(&p.label, &p.points) {
                check_domain(config, p.grid.as_ref(), p.region.as_ref(), &cfg, diags);
            }
        }
        Params::CountingProbe(p) => {
            let Some(cfg) = diags.config(&p.label, &p.points) else {
                return;
            };
            let shape = check_domain(config, p.grid.as_ref(), p.region.as_ref(), &cfg, diags);
            if p.deltas.is_empty() {
                diags.push("InvalidArgument", "empty delta schedule");
            }
            if p.deltas.windows(2).any(|w| w[1] >= w[0]) {
                diags.push("InvalidArgument", "deltas must be strictly decreasing");
            }
            if let Some((_, side, n)) = shape {
                let h = side / n as f64;
                for &delta in &p.deltas {
                    if !(delta >= h * (1.0 - 1e-12) && delta <= side * (1.0 + 1e-12)) {
                        diags.error(&LabError::DegenerateBlur { delta, cell: h });
                    }
                }
                for (name, v) in [("gamma", p.gamma), ("epsilon", p.epsilon)] {
                    if !(v > 0.0 && v < 1.0) {
                        diags.push("InvalidArgument", format!("{name} = {v} outside (0, 1)"));
                    }
                }
                if !admissible_euclidean(&cfg, &tol) {
                    diags.push("NotAdmissible", "configuration is not admissible in R^d");
                }
            }
            if let Some(region) = &p.region {
                for &delta in &p.deltas {
                    if !(delta > 0.0 && delta <= 2.0) {
                        diags.error(&LabError::BadRadius(delta));
                    }
                }
                if p.inner_samples == 0 {
                    diags.push("InvalidArgument", "inner_samples must be positive");
                }
                if cfg.ambient_dim == region.ambient_dim() && matches!(admissible_spherical(&cfg, &tol), Ok(false)) {
                    diags.push("NotAdmissible", "configuration is not admissible on the sphere");
                }
            }
        }
        Params::Equicontinuity(p) => {
            if let Some(cfg) = diags.config(&p.label, &p.points) {
                check_domain(config, Some(&p.grid), None, &cfg, diags);
                if !admissible_euclidean(&cfg, &tol) {
                    diags.push("NotAdmissible", "configuration is not admissible in R^d");
                }
            }
            if !(p.perturb >= 0.0 && p.perturb.is_finite()) {
                diags.push(
                    "InvalidArgument",
                    format!("perturb = {} must be finite and ≥ 0", p.perturb),
                );
            }
            if p.trials == 0 {
                diags.push("InvalidArgument", "trials must be positive");
            }
        }
        Params::Intersect(p) => {
            if p.grids.is_empty() == p.regions.is_empty() {
                diags.push("Schema", "give exactly one of 'grids' or 'regions'");
            }
            if p.placements == 0 {
                diags.push("InvalidArgument", "placements must be positive");
            }
            let shapes: Vec<_> = p.grids.iter().filter_map(|g| check_grid(config, g, diags)).collect();
            if shapes.windows(2).any(|w| w[0] != w[1]) {
                diags.push("ShapeMismatch", "grids differ in dimension, side or resolution");
            }
            if p.regions.windows(2).any(|w| w[0].d != w[1].d) {
                diags.push("DimMismatch", "regions live on spheres of different dimension");
            }
            if p.exact && !p.regions.is_empty() {
                diags.push("Schema", "'exact' applies to grids only");
            }
        }
        Params::CapPack(p) => {
            if p.d == 0 {
                diags.push("InvalidArgument", "sphere dimension must be ≥ 1");
            }
            if !(p.eps > 0.0 && p.eps <= 2.0) {
                diags.error(&LabError::BadRadius(p.eps));
            }
            if let Some(m) = p.min_radius {
                if !(m > 0.0 && m <= p.eps) {
                    diags.push("InvalidArgument", format!("min_radius {m} outside (0, eps]"));
                }
            }
        }
        Params::CapAvoider(p) => {
            if let Some(cfg) = diags.config(&p.label, &p.points) {
                check_contractible(&cfg, &[p.t], diags);
            }
            if p.attempts == 0 {
                diags.push("InvalidArgument", "attempts must be positive");
            }
        }
        Params::ScaleScan(p) => {
            if p.t_list.is_empty() {
                diags.push("InvalidArgument", "empty t_list");
            }
            if let Some(cfg) = diags.config(&p.label, &p.points) {
                check_contractible(&cfg, &p.t_list, diags);
            }
            if p.attempts == 0 {
                diags.push("InvalidArgument", "attempts must be positive");
            }
        }
        Params::HarmonicsCheck(p) => {
            if p.d < 2 {
                diags.push("InvalidArgument", "harmonic checks need d ≥ 2");
            }
            if p.degrees.is_empty() {
                diags.push("InvalidArgument", "empty degree list");
            }
            check_radii(&p.deltas, diags);
        }
        Params::CapFourier(p) => {
            if p.d < 2 {
                diags.push("InvalidArgument", "cap coefficients need d ≥ 2");
            }
            check_radii(&p.deltas, diags);
        }
        Params::BoundReport(p) => {
            if let Some(cfg) = diags.config(&p.label, &p.points) {
                if cfg.ambient_dim == 0 || p.n == 0 || !(p.side > 0.0 && p.side.is_finite()) {
                    diags.push("InvalidGrid", "need side > 0 and n ≥ 1");
                } else {
                    let diam = cfg.diameter();
                    let s = 0.99 * diam / (cfg.ambient_dim as f64).sqrt();
                    let pitch = s + 1.01 * diam;
                    if pitch > p.side {
                        diags.push(
                            "InfeasibleGeometry",
                            format!("lattice pitch {pitch} exceeds the torus side {}", p.side),
                        );
                    }
                    if s < p.side / p.n as f64 {
                        diags.push(
                            "InfeasibleGeometry",
                            format!("cube side {s} is below the cell width {}", p.side / p.n as f64),
                        );
                    }
                    if diam >= p.side / 2.0 {
                        diags.push(
                            "DiameterTooLarge",
                            format!("diam P = {diam} is not below R/2 = {}", p.side / 2.0),
                        );
                    }
                }
            }
            if p.ceilings.iter().any(|c| !(0.0..=1.0).contains(c)) {
                diags.push("InvalidArgument", "ceilings must lie in [0, 1]");
            }
            for c in &p.constructions {
                if !(0.0..=1.0).contains(&c.density) {
                    diags.push(
                        "InvalidArgument",
                        format!("construction '{}' has density outside [0, 1]", c.label),
                    );
                }
                if !c.certified {
                    diags.push(
                        "InvalidArgument",
                        format!("construction '{}' is not certified avoiding", c.label),
                    );
                }
            }
        }
    }
}

fn check_radii(deltas: &[f64], diags: &mut Diagnostics) {
    if deltas.is_empty() {
        diags.push("InvalidArgument", "empty delta list");
    }
    for &delta in deltas {
        if !(delta > 0.0 && delta <= 2.0) {
            diags.error(&LabError::BadRadius(delta));
        }
    }
}

fn check_grid(config: &ExperimentConfig, grid: &GridSpec, diags: &mut Diagnostics) -> Option<(usize, f64, usize)> {
    let shape = match grid.shape(config) {
        Ok(s) => s,
        Err(LabCliError::Validation(msg)) => {
            diags.push("MissingInput", msg);
            return None;
        }
        Err(e) => {
            diags.cli(&e);
            return None;
        }
    };
    let (d, side, n) = shape;
    if d == 0 || n == 0 || !(side > 0.0 && side.is_finite()) {
        diags.push(
            "InvalidGrid",
            format!("grid needs d ≥ 1, n ≥ 1, side > 0 (got d={d}, n={n}, side={side})"),
        );
        return None;
    }
    match (n as u128).checked_pow(d as u32) {
        Some(cells) if cells <= 1 << 24 => {}
        _ => {
            diags.push("InvalidGrid", format!("{n}^{d} cells exceed the grid limit"));
            return None;
        }
    }
    match grid {
        GridSpec::Constant { value, .. } if !(0.0..=1.0).contains(value) => {
            diags.push("InvalidGrid", format!("value {value} outside [0, 1]"));
        }
        GridSpec::RandomBinary { p, .. } if !(0.0..=1.0).contains(p) => {
            diags.push("InvalidGrid", format!("probability {p} outside [0, 1]"));
        }
        GridSpec::Blobs { r_min, r_max, .. } if !(*r_min > 0.0 && r_max >= r_min) => {
            diags.push("InvalidArgument", format!("bad blob radii [{r_min}, {r_max}]"));
        }
        _ => {}
    }
    Some(shape)
}

/// Checks that the configuration fits the chosen domain; returns the grid
/// shape for torus domains.
fn check_domain(
    config: &ExperimentConfig,
    grid: Option<&GridSpec>,
    region: Option<&SphereRegion>,
    p: &Configuration,
    diags: &mut Diagnostics,
) -> Option<(usize, f64, usize)> {
    match (grid, region) {
        (Some(g), None) => {
            let (d, side, n) = check_grid(config, g, diags)?;
            if p.ambient_dim != d {
                diags.error(&LabError::DimMismatch {
                    expected: d,
                    found: p.ambient_dim,
                });
            } else if p.diameter() >= side / 2.0 {
                diags.push(
                    "DiameterTooLarge",
                    format!("diam P = {} is not below R/2 = {}", p.diameter(), side / 2.0),
                );
            }
            Some((d, side, n))
        }
        (None, Some(r)) => {
            if p.ambient_dim != r.ambient_dim() {
                diags.error(&LabError::DimMismatch {
                    expected: r.ambient_dim(),
                    found: p.ambient_dim,
                });
            } else if let Err(e) = p.check_on_sphere(&ToleranceProfile::default()) {
                diags.error(&e);
            }
            None
        }
        _ => {
            diags.push("Schema", "give exactly one of 'grid' or 'region'");
            None
        }
    }
}

fn check_contractible(p: &Configuration, ts: &[f64], diags: &mut Diagnostics) {
    if p.len() < 2 {
        diags.push("InvalidArgument", "cap avoider needs at least two points");
        return;
    }
    let tol = ToleranceProfile::default();
    for &t in ts {
        if let Err(e) = contract_to_sphere(p, t, &tol) {
            diags.error(&e);
        }
    }
}
