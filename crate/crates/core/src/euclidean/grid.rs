use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sampling::{uniform_cube_point, RandomSource};

pub const GRID_MAGIC: &[u8; 4] = b"TGRD";
pub const GRID_VERSION: u16 = 1;
/// magic (4) + version (2) + d (2) + N (4) + R (8)
pub const GRID_HEADER_LEN: usize = 20;
pub const MAX_CELLS: usize = 1 << 24;

/// Cell-constant function with values in `[0, 1]` on the torus `(R/RZ)^d`,
/// stored row-major with `N` cells per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    d: usize,
    side: f64,
    n: usize,
    values: Vec<f64>,
}

/// JSON sidecar written next to a binary grid file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub format: String,
    pub version: u16,
    pub d: usize,
    pub cells_per_axis: usize,
    pub side: f64,
    pub density: f64,
    #[serde(default)]
    pub label: String,
}

fn cell_count(d: usize, n: usize) -> Result<usize> {
    if d == 0 || n == 0 {
        return Err(LabError::InvalidGrid(
            "dimension and cells per axis must be positive".into(),
        ));
    }
    let mut total: usize = 1;
    for _ in 0..d {
        total = total
            .checked_mul(n)
            .filter(|&t| t <= MAX_CELLS)
            .ok_or_else(|| LabError::InvalidGrid(format!("{n}^{d} cells exceeds {MAX_CELLS}")))?;
    }
    Ok(total)
}

impl TorusGrid {
    pub fn new(d: usize, side: f64, n: usize, values: Vec<f64>) -> Result<Self> {
        let total = cell_count(d, n)?;
        if !(side > 0.0 && side.is_finite()) {
            return Err(LabError::InvalidGrid(format!("side {side} must be positive")));
        }
        if values.len() != total {
            return Err(LabError::InvalidGrid(format!(
                "expected {total} values, got {}",
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(LabError::InvalidGrid(format!("value {bad} outside [0, 1]")));
        }
        Ok(Self { d, side, n, values })
    }

    pub fn constant(d: usize, side: f64, n: usize, value: f64) -> Result<Self> {
        let total = cell_count(d, n)?;
        Self::new(d, side, n, vec![value; total])
    }

    /// Builds a grid from a function of the cell-centre coordinates in `[0, R)^d`.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(d: usize, side: f64, n: usize, f: F) -> Result<Self> {
        let total = cell_count(d, n)?;
        let h = side / n as f64;
        let mut idx = vec![0usize; d];
        let mut center = vec![0.0; d];
        let mut values = Vec::with_capacity(total);
        for flat in 0..total {
            unflatten(flat, n, &mut idx);
            for (c, &i) in center.iter_mut().zip(&idx) {
                *c = (i as f64 + 0.5) * h;
            }
            values.push(f(&center));
        }
        Self::new(d, side, n, values)
    }

    /// Independent Bernoulli(p) cells.
    pub fn random_binary(d: usize, side: f64, n: usize, p: f64, source: &RandomSource) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(LabError::InvalidArgument(format!("probability {p} outside [0, 1]")));
        }
        let total = cell_count(d, n)?;
        let mut rng = source.rng();
        let values = (0..total).map(|_| f64::from(rng.random::<f64>() < p)).collect();
        Self::new(d, side, n, values)
    }

    /// Union of `count` periodic balls with radii uniform in `[r_min, r_max]`,
    /// rasterized at cell centres.
    pub fn random_blobs(
        d: usize,
        side: f64,
        n: usize,
        count: usize,
        r_min: f64,
        r_max: f64,
        source: &RandomSource,
    ) -> Result<Self> {
        if !(r_min > 0.0 && r_max >= r_min) {
            return Err(LabError::InvalidArgument(format!("bad blob radii [{r_min}, {r_max}]")));
        }
        let mut rng = source.rng();
        let blobs: Vec<(Vec<f64>, f64)> = (0..count)
            .map(|_| {
                let c = uniform_cube_point(d, side, &mut rng);
                let r = r_min + (r_max - r_min) * rng.random::<f64>();
                (c, r)
            })
            .collect();
        Self::from_fn(d, side, n, |x| {
            let hit = blobs.iter().any(|(c, r)| {
                let d2: f64 = x
                    .iter()
                    .zip(c)
                    .map(|(a, b)| {
                        let diff = (a - b).rem_euclid(side);
                        diff.min(side - diff).powi(2)
                    })
                    .sum();
                d2 <= r * r
            });
            f64::from(hit)
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn cells_per_axis(&self) -> usize {
        self.n
    }

    pub fn cell_width(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn density(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn same_shape(&self, other: &TorusGrid) -> bool {
        self.d == other.d && self.n == other.n && self.side == other.side
    }

    /// Flat index of a (possibly out-of-range) cell multi-index, wrapped.
    pub fn flat_index(&self, idx: &[i64]) -> usize {
        let n = self.n as i64;
        idx.iter()
            .fold(0usize, |acc, &i| acc * self.n + i.rem_euclid(n) as usize)
    }

    pub fn get(&self, idx: &[i64]) -> f64 {
        self.values[self.flat_index(idx)]
    }

    /// Value of the cell containing `x` (coordinates taken modulo R).
    pub fn value_at(&self, x: &[f64]) -> f64 {
        let nf = self.n as f64;
        let flat = x.iter().fold(0usize, |acc, &c| {
            let cell = ((c / self.side).rem_euclid(1.0) * nf) as usize;
            acc * self.n + cell.min(self.n - 1)
        });
        self.values[flat]
    }

    /// `g(i) = f(i − shift)`: the grid translated by whole cells.
    pub fn shifted(&self, shift: &[i64]) -> TorusGrid {
        let mut idx = vec![0usize; self.d];
        let mut src = vec![0i64; self.d];
        let values = (0..self.values.len())
            .map(|flat| {
                unflatten(flat, self.n, &mut idx);
                for a in 0..self.d {
                    src[a] = idx[a] as i64 - shift[a];
                }
                self.get(&src)
            })
            .collect();
        TorusGrid { values, ..self.clone() }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<TorusGrid> {
        TorusGrid::new(self.d, self.side, self.n, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn metadata(&self, label: &str) -> GridMetadata {
        GridMetadata {
            format: "TGRD".into(),
            version: GRID_VERSION,
            d: self.d,
            cells_per_axis: self.n,
            side: self.side,
            density: self.density(),
            label: label.into(),
        }
    }

    /// Header plus `N^d` little-endian f32 values, row-major.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let d = u16::try_from(self.d).map_err(|_| LabError::InvalidGrid("d exceeds u16".into()))?;
        let n = u32::try_from(self.n).map_err(|_| LabError::InvalidGrid("N exceeds u32".into()))?;
        let mut out = Vec::with_capacity(GRID_HEADER_LEN + 4 * self.values.len());
        out.extend_from_slice(GRID_MAGIC);
        out.extend_from_slice(&GRID_VERSION.to_le_bytes());
        out.extend_from_slice(&d.to_le_bytes());
        out.extend_from_slice(&n.to_le_bytes());
        out.extend_from_slice(&self.side.to_le_bytes());
        for &v in &self.values {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < GRID_HEADER_LEN || &bytes[..4] != GRID_MAGIC {
            return Err(LabError::InvalidGrid("missing TGRD header".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != GRID_VERSION {
            return Err(LabError::InvalidGrid(format!("unsupported version {version}")));
        }
        let d = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
        let n = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
        let side = f64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
        let total = cell_count(d, n)?;
        let payload = &bytes[GRID_HEADER_LEN..];
        if payload.len() != 4 * total {
            return Err(LabError::InvalidGrid(format!(
                "payload has {} bytes, expected {}",
                payload.len(),
                4 * total
            )));
        }
        let values = payload
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect();
        Self::new(d, side, n, values)
    }

    /// Writes the binary grid and its `<path>.json` metadata sidecar.
    pub fn save(&self, path: &Path, label: &str) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&self.to_bytes()?)?;
        w.flush()?;
        let meta = serde_json::to_string_pretty(&self.metadata(label))?;
        std::fs::write(sidecar_path(path), meta + "\n")?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Row-major multi-index of `flat` (last axis fastest).
pub(crate) fn unflatten(mut flat: usize, n: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}
