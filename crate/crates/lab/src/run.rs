use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use indep_core::euclidean::{
    cell_avoider, counting_probe, density_bound_report, equicontinuity_probe, intersection_experiment,
    ip_estimate_torus, Construction, ProbeSchedule,
};
use indep_core::harmonics::{
    cap_fourier_coeff, projection_identity_check, zonal_convolution_spectrum_check, ZonalSpectrum,
};
use indep_core::sampling::uniform_sphere_point;
use indep_core::spherical::{
    avoider_ceiling, cap_avoider, contraction_scale_scan, count_copy_hits, ip_estimate_sphere,
    rotation_intersection_experiment, rsa_packing, spherical_counting_probe,
};
use indep_core::{IntersectionReport, RandomSource};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::*;
use crate::table::{Cell, Table};
use crate::validate::validate;
use crate::{effective_threads, LabCliError};

/// Tolerance of the zonal convolution check.
const CONVOLUTION_TOL: f64 = 1e-10;

/// What one experiment produced, before it is written out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub summary: Value,
    pub table: Table,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub outputs: Vec<OutputFile>,
    pub outcome: Outcome,
}

fn seed_layout(seed: u64) -> Value {
    json!({
        "generator": "ChaCha8",
        "seed": seed,
        "estimators": "stream 0; sample chunk c uses a child stream derived from (seed, 0, c)",
        "grids": format!("grid i uses stream {GRID_STREAM_BASE} + i"),
        "auxiliary": format!("stream {AUX_STREAM} (random test vectors)"),
    })
}

/// Validates, runs the experiment and writes `results.csv`, `results.json`
/// and `manifest.json` into the output directory.
pub fn run(config: &ExperimentConfig) -> Result<RunSummary, LabCliError> {
    let diags = validate(config);
    if !diags.is_empty() {
        let text: Vec<String> = diags.iter().map(ToString::to_string).collect();
        return Err(LabCliError::Validation(text.join("; ")));
    }
    let started = Utc::now();
    let threads = effective_threads(config);
    let outcome = with_threads(threads, || execute(config))?;
    let finished = Utc::now();

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir)?;
    let csv = outcome.table.to_csv();
    let results = json!({
        "experiment": config.experiment,
        "seed": config.seed,
        "samples": config.samples,
        "summary": outcome.summary,
        "columns": outcome.table.columns,
        "rows": outcome.table.rows,
    });
    let results = serde_json::to_string_pretty(&results).expect("results serialize") + "\n";
    let outputs = vec![
        write_output(dir, "results.csv", csv.as_bytes())?,
        write_output(dir, "results.json", results.as_bytes())?,
    ];
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": config,
        "started_at": started.to_rfc3339_opts(SecondsFormat::Millis, true),
        "finished_at": finished.to_rfc3339_opts(SecondsFormat::Millis, true),
        "threads": threads,
        "seed_layout": seed_layout(config.seed),
        "outputs": outputs,
    });
    let manifest = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    std::fs::write(dir.join("manifest.json"), manifest)?;
    log::info!("wrote {} outputs to {}", outputs.len(), dir.display());
    Ok(RunSummary {
        output_dir: dir.clone(),
        outputs,
        outcome,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_output(dir: &Path, name: &str, bytes: &[u8]) -> Result<OutputFile, LabCliError> {
    std::fs::write(dir.join(name), bytes)?;
    Ok(OutputFile {
        name: name.into(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len(),
    })
}

#[cfg(feature = "parallel")]
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_threads<T: Send>(_threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    f()
}

/// Runs the experiment without touching the filesystem (except to read
/// input grids).
pub fn execute(config: &ExperimentConfig) -> Result<Outcome, LabCliError> {
    let source = config.source();
    let samples = config.samples;
    match config.typed_params()? {
        Params::IpEstimate(p) => {
            let cfg = configuration(&p.label, &p.points)?;
            let (domain, est) = match (&p.grid, &p.region) {
                (Some(g), _) => (
                    "torus",
                    ip_estimate_torus(&g.build(config, 0)?, &cfg, samples, &source)?,
                ),
                (None, Some(r)) => ("sphere", ip_estimate_sphere(r, &cfg, samples, &source)?),
                (None, None) => return Err(LabCliError::Validation("no domain".into())),
            };
            let mut table = Table::new(&["value", "std_error", "samples"]);
            table.push(vec![est.value.into(), est.std_error.into(), est.samples.into()]);
            Ok(Outcome {
                summary: json!({ "domain": domain, "estimate": est }),
                table,
            })
        }
        Params::CountingProbe(p) => {
            let cfg = configuration(&p.label, &p.points)?;
            let (summary, rows) = match (&p.grid, &p.region) {
                (Some(g), _) => {
                    let grid = g.build(config, 0)?;
                    let schedule = ProbeSchedule::new(p.deltas.clone(), p.gamma, p.epsilon, grid.side())?;
                    let probe = counting_probe(&grid, &cfg, &schedule, samples, &source)?;
                    (
                        json!({ "domain": "torus", "fitted_constant": probe.fitted_constant }),
                        probe.rows,
                    )
                }
                (None, Some(r)) => {
                    let rows = spherical_counting_probe(r, &cfg, &p.deltas, samples, p.inner_samples, &source)?;
                    (json!({ "domain": "sphere", "inner_samples": p.inner_samples }), rows)
                }
                (None, None) => return Err(LabCliError::Validation("no domain".into())),
            };
            let mut table = Table::new(&["delta", "deviation", "std_error"]);
            for r in &rows {
                table.push(vec![r.delta.into(), r.deviation.into(), r.std_error.into()]);
            }
            Ok(Outcome { summary, table })
        }
        Params::Equicontinuity(p) => {
            let cfg = configuration(&p.label, &p.points)?;
            let grid = p.grid.build(config, 0)?;
            let report = equicontinuity_probe(&grid, &cfg, p.perturb, p.trials, samples, &source)?;
            let mut table = Table::new(&["trial", "difference", "std_error"]);
            for (i, e) in report.trials.iter().enumerate() {
                table.push(vec![i.into(), e.value.into(), e.std_error.into()]);
            }
            Ok(Outcome {
                summary: json!({ "perturb": report.perturb, "worst": report.worst }),
                table,
            })
        }
        Params::Intersect(p) => {
            let report = if !p.grids.is_empty() {
                let grids = p
                    .grids
                    .iter()
                    .enumerate()
                    .map(|(i, g)| g.build(config, i))
                    .collect::<Result<Vec<_>, _>>()?;
                let points = if p.exact { 0 } else { samples };
                intersection_experiment(&grids, p.placements, points, &source)?
            } else {
                rotation_intersection_experiment(&p.regions, p.placements, samples, &source)?
            };
            Ok(intersection_outcome(&report))
        }
        Params::CapPack(p) => {
            let min_radius = p.min_radius.unwrap_or(p.eps / 4.0);
            let packing = rsa_packing(p.d, p.eps, min_radius, samples, &source)?;
            let mut table = Table::new(&cap_columns(p.d));
            for cap in &packing.caps {
                table.push(cap_row(&cap.center, cap.rho));
            }
            Ok(Outcome {
                summary: json!({
                    "caps": packing.caps.len(),
                    "density": packing.density(),
                    "disjoint": packing.is_disjoint(),
                }),
                table,
            })
        }
        Params::CapAvoider(p) => {
            let cfg = configuration(&p.label, &p.points)?;
            let a = cap_avoider(&cfg, p.t, p.attempts, &source)?;
            let hits = count_copy_hits(&a.region, &a.avoided, samples, &source.derive(u64::MAX))?;
            if hits > 0 {
                return Err(LabCliError::Numeric(format!(
                    "{hits} copies of tP found inside the avoider"
                )));
            }
            let d = cfg.ambient_dim - 1;
            let mut table = Table::new(&cap_columns(d));
            for cap in &a.packing.caps {
                table.push(cap_row(&cap.center, cap.rho / 4.0));
            }
            Ok(Outcome {
                summary: json!({
                    "t": a.scale,
                    "diameter": a.diameter,
                    "density": a.density,
                    "ceiling": avoider_ceiling(cfg.len()),
                    "caps": a.packing.caps.len(),
                    "copy_hits": hits,
                }),
                table,
            })
        }
        Params::ScaleScan(p) => {
            let cfg = configuration(&p.label, &p.points)?;
            let rows = contraction_scale_scan(&cfg, &p.t_list, p.attempts, samples, &source)?;
            if let Some(bad) = rows.iter().find(|r| r.copy_hits > 0 || r.density > r.ceiling) {
                return Err(LabCliError::Numeric(format!(
                    "t = {}: density {} with {} copy hits (ceiling {})",
                    bad.t, bad.density, bad.copy_hits, bad.ceiling
                )));
            }
            let mut table = Table::new(&["t", "density", "std_error", "ceiling", "caps", "copy_hits"]);
            for r in &rows {
                table.push(vec![
                    r.t.into(),
                    r.density.into(),
                    r.std_error.into(),
                    r.ceiling.into(),
                    r.caps.into(),
                    r.copy_hits.into(),
                ]);
            }
            Ok(Outcome {
                summary: json!({ "label": p.label, "k": cfg.len() }),
                table,
            })
        }
        Params::HarmonicsCheck(p) => harmonics_check(&p, samples, config.seed),
        Params::CapFourier(p) => {
            let mut table = Table::new(&["delta", "n", "coefficient"]);
            for &delta in &p.deltas {
                for n in 0..=p.n_max {
                    table.push(vec![delta.into(), n.into(), cap_fourier_coeff(p.d, delta, n)?.into()]);
                }
            }
            Ok(Outcome {
                summary: json!({ "d": p.d }),
                table,
            })
        }
        Params::BoundReport(p) => {
            let cfg = configuration(&p.label, &p.points)?;
            let avoider = cell_avoider(&cfg, p.side, p.n)?;
            let hits = ip_estimate_torus(&avoider.grid, &cfg, samples, &source)?;
            let mut constructions = vec![Construction {
                label: "cell-avoider".into(),
                density: avoider.geometry.raster_density,
                certified: hits.value == 0.0,
            }];
            constructions.extend(p.constructions.iter().map(|c| Construction {
                label: c.label.clone(),
                density: c.density,
                certified: c.certified,
            }));
            if hits.value != 0.0 {
                return Err(LabCliError::Numeric(format!(
                    "cell avoider contains copies (rate {})",
                    hits.value
                )));
            }
            let mut ceilings = p.ceilings.clone();
            ceilings.push(avoider_ceiling(cfg.len()));
            let bound = density_bound_report(&p.label, &constructions, &ceilings)?;
            let mut table = Table::new(&["lower", "upper", "ideal_density", "raster_density"]);
            table.push(vec![
                bound.lower.into(),
                bound.upper.into(),
                avoider.geometry.density.into(),
                avoider.geometry.raster_density.into(),
            ]);
            Ok(Outcome {
                summary: json!({ "bound": bound, "geometry": avoider.geometry }),
                table,
            })
        }
    }
}

fn intersection_outcome(report: &IntersectionReport) -> Outcome {
    let mut table = Table::new(&["average", "std_error", "product", "difference", "difference_se"]);
    table.push(vec![
        report.average.value.into(),
        report.average.std_error.into(),
        report.product.into(),
        report.difference.value.into(),
        report.difference.std_error.into(),
    ]);
    Outcome {
        summary: json!(report),
        table,
    }
}

fn cap_columns(d: usize) -> Vec<String> {
    let mut cols: Vec<String> = (0..=d).map(|i| format!("c{i}")).collect();
    cols.push("rho".into());
    cols
}

fn cap_row(center: &[f64], rho: f64) -> Vec<Cell> {
    center.iter().map(|&c| Cell::from(c)).chain([Cell::from(rho)]).collect()
}

/// Projection identity at random `y, z` for each degree, then the zonal
/// convolution check for `f = P_n` at each radius.
fn harmonics_check(p: &HarmonicsParams, samples: u64, seed: u64) -> Result<Outcome, LabCliError> {
    let mut rng = RandomSource::with_stream(seed, AUX_STREAM).rng();
    let mut table = Table::new(&["check", "n", "delta", "deviation", "std_error"]);
    for (i, &n) in p.degrees.iter().enumerate() {
        let y = uniform_sphere_point(p.d, &mut rng);
        let z = uniform_sphere_point(p.d, &mut rng);
        let src = RandomSource::new(seed).derive(i as u64);
        let e = projection_identity_check(p.d, n, &y, &z, samples, &src)?;
        table.push(vec![
            "projection".into(),
            n.into(),
            Cell::Empty(()),
            e.value.into(),
            e.std_error.into(),
        ]);
    }
    let mut worst = 0.0_f64;
    for &n in &p.degrees {
        let f = ZonalSpectrum::single_degree(p.d, n, n + 1)?;
        for &delta in &p.deltas {
            let c = zonal_convolution_spectrum_check(&f, delta, n, CONVOLUTION_TOL)?;
            worst = worst.max(c.deviation);
            table.push(vec![
                "convolution".into(),
                n.into(),
                delta.into(),
                c.deviation.into(),
                0.0.into(),
            ]);
        }
    }
    Ok(Outcome {
        summary: json!({ "d": p.d, "max_convolution_deviation": worst }),
        table,
    })
}
