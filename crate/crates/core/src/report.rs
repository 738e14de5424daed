//! Plain CSV emission. Floats use Rust's shortest round-trip formatting, so
//! equal numbers always render to equal bytes.

use std::fmt::Write as _;

use crate::estimate::ProbeRow;
use crate::harmonics::DecayRow;
use crate::spherical::ScanRow;

pub fn csv<R: AsRef<[f64]>>(header: &[&str], rows: &[R]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.as_ref().iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// `delta,deviation,std_error`
pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let data: Vec<[f64; 3]> = rows.iter().map(|r| [r.delta, r.deviation, r.std_error]).collect();
    csv(&["delta", "deviation", "std_error"], &data)
}

/// `t,density,std_error,ceiling`
pub fn scan_csv(rows: &[ScanRow]) -> String {
    let data: Vec<[f64; 4]> = rows.iter().map(|r| [r.t, r.density, r.std_error, r.ceiling]).collect();
    csv(&["t", "density", "std_error", "ceiling"], &data)
}

/// `n,coefficient`
pub fn spectrum_csv(coeffs: &[f64]) -> String {
    let data: Vec<[f64; 2]> = coeffs.iter().enumerate().map(|(n, &c)| [n as f64, c]).collect();
    csv(&["n", "coefficient"], &data)
}

/// `n,max_abs`
pub fn decay_csv(rows: &[DecayRow]) -> String {
    let data: Vec<[f64; 2]> = rows.iter().map(|r| [r.n as f64, r.max_abs]).collect();
    csv(&["n", "max_abs"], &data)
}
