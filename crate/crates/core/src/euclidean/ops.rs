use super::grid::TorusGrid;
use crate::error::{LabError, Result};

/// Relative slack when comparing `δ` with the cell width.
const WIDTH_SLACK: f64 = 1e-12;

/// Weights `(offset, overlap)` of the cells met by a window of `w` cell
/// widths centred on a cell centre. Overlaps sum to `w`.
fn window_kernel(w: f64) -> Vec<(i64, f64)> {
    let a = 0.5 - 0.5 * w;
    let b = 0.5 + 0.5 * w;
    let first = a.floor() as i64;
    let last = b.ceil() as i64 - 1;
    (first..=last)
        .filter_map(|j| {
            let lo = a.max(j as f64);
            let hi = b.min(j as f64 + 1.0);
            (hi > lo).then_some((j, hi - lo))
        })
        .collect()
}

fn blur_axis(values: &[f64], n: usize, d: usize, axis: usize, kernel: &[(i64, f64)], w: f64) -> Vec<f64> {
    let stride = n.pow((d - 1 - axis) as u32);
    let outer = values.len() / (n * stride);
    let mut out = vec![0.0; values.len()];
    let mut line = vec![0.0; n];
    let ni = n as i64;
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * n * stride + inner;
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = values[base + j * stride];
            }
            let lo = line.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = line.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for i in 0..n {
                let acc: f64 = kernel
                    .iter()
                    .map(|&(off, wt)| wt * line[(i as i64 + off).rem_euclid(ni) as usize])
                    .sum();
                // A local average never leaves the line's range; clamping
                // keeps constants exact under rounding.
                out[base + i * stride] = (acc / w).clamp(lo, hi);
            }
        }
    }
    out
}

/// Periodic box average over the axis-parallel cube of side `δ` centred at
/// each cell centre, as `d` separable 1D passes. Partial cells at the window
/// ends enter with their exact overlap fraction.
pub fn blur(f: &TorusGrid, delta: f64) -> Result<TorusGrid> {
    let h = f.cell_width();
    if !(delta >= h * (1.0 - WIDTH_SLACK) && delta <= f.side() * (1.0 + WIDTH_SLACK)) {
        return Err(LabError::DegenerateBlur { delta, cell: h });
    }
    let w = delta / h;
    let kernel = window_kernel(w);
    let n = f.cells_per_axis();
    let d = f.dim();
    let mut values = f.values().to_vec();
    for axis in 0..d {
        values = blur_axis(&values, n, d, axis, &kernel, w);
    }
    TorusGrid::new(d, f.side(), n, values)
}

/// Binary grid of cells whose `δ`-blur is at least `γ`.
pub fn zoom_out(f: &TorusGrid, delta: f64, gamma: f64) -> Result<TorusGrid> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(LabError::InvalidArgument(format!("threshold {gamma} outside [0, 1]")));
    }
    blur(f, delta)?.map(|v| f64::from(v >= gamma))
}
