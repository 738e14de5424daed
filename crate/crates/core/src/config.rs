//! Point configurations: admissibility, congruence, diameters and
//! contracted copies on the sphere.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::sampling::Rotation;

/// Numerical tolerances used by geometric predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Singular values below `rank_tol · σ_max` count as zero.
    pub rank_tol: f64,
    /// Absolute length tolerance.
    pub geom_tol: f64,
    /// Absolute tolerance on Gram-matrix entries.
    pub congruence_tol: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            rank_tol: 1e-9,
            geom_tol: 1e-12,
            congruence_tol: 1e-9,
        }
    }
}

impl ToleranceProfile {
    pub fn new(rank_tol: f64, geom_tol: f64, congruence_tol: f64) -> Result<Self> {
        if [rank_tol, geom_tol, congruence_tol].iter().all(|t| *t > 0.0) {
            Ok(Self {
                rank_tol,
                geom_tol,
                congruence_tol,
            })
        } else {
            Err(LabError::InvalidArgument("tolerances must be strictly positive".into()))
        }
    }
}

/// Which rigid motions count as congruences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    /// Rotations and reflections.
    #[default]
    Orthogonal,
    /// Proper rotations only.
    Special,
}

/// An ordered list of `k ≥ 1` distinct points in R^D.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration")]
pub struct Configuration {
    pub label: String,
    pub ambient_dim: usize,
    pub points: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawConfiguration {
    #[serde(default)]
    label: String,
    ambient_dim: usize,
    points: Vec<Vec<f64>>,
}

impl TryFrom<RawConfiguration> for Configuration {
    type Error = LabError;

    fn try_from(raw: RawConfiguration) -> Result<Self> {
        Configuration::new(raw.label, raw.ambient_dim, raw.points)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn numeric_rank(rows: &[Vec<f64>], dim: usize, rank_tol: f64) -> usize {
    if rows.is_empty() || dim == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * smax).count()
}

impl Configuration {
    pub fn new(label: impl Into<String>, ambient_dim: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(LabError::EmptyConfiguration);
        }
        for (index, p) in points.iter().enumerate() {
            if p.len() != ambient_dim {
                return Err(LabError::RaggedPoints {
                    index,
                    expected: ambient_dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(LabError::InvalidArgument(format!("point {index} is not finite")));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if dist(&points[i], &points[j]) <= 1e-12 {
                    return Err(LabError::CoincidentPoints(i, j));
                }
            }
        }
        Ok(Self {
            label: label.into(),
            ambient_dim,
            points,
        })
    }

    /// Builds a configuration from points, taking the dimension from the first.
    pub fn from_points(label: impl Into<String>, points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(LabError::EmptyConfiguration)?;
        Self::new(label, dim, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.len() {
            for j in (i + 1)..self.len() {
                best = best.max(dist(&self.points[i], &self.points[j]));
            }
        }
        best
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        dist(&self.points[i], &self.points[j])
    }

    pub fn centroid(&self) -> Vec<f64> {
        let k = self.len() as f64;
        (0..self.ambient_dim)
            .map(|c| self.points.iter().map(|p| p[c]).sum::<f64>() / k)
            .collect()
    }

    fn centered(&self) -> Vec<Vec<f64>> {
        let c = self.centroid();
        self.points
            .iter()
            .map(|p| p.iter().zip(&c).map(|(x, m)| x - m).collect())
            .collect()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self {
            label: self.label.clone(),
            ambient_dim: self.ambient_dim,
            points: self.points.iter().map(|p| p.iter().map(|x| t * x).collect()).collect(),
        }
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        Self {
            label: self.label.clone(),
            ambient_dim: self.ambient_dim,
            points: self
                .points
                .iter()
                .map(|p| p.iter().zip(shift).map(|(x, s)| x + s).collect())
                .collect(),
        }
    }

    pub fn transformed(&self, rotation: &Rotation) -> Self {
        Self {
            label: self.label.clone(),
            ambient_dim: self.ambient_dim,
            points: self.points.iter().map(|p| rotation.apply(p)).collect(),
        }
    }

    /// Pads every point with zero coordinates up to `dim`.
    pub fn embedded(&self, dim: usize) -> Self {
        Self {
            label: self.label.clone(),
            ambient_dim: dim.max(self.ambient_dim),
            points: self
                .points
                .iter()
                .map(|p| {
                    let mut q = p.clone();
                    q.resize(dim.max(self.ambient_dim), 0.0);
                    q
                })
                .collect(),
        }
    }

    pub fn affine_rank(&self, tol: &ToleranceProfile) -> usize {
        numeric_rank(&self.centered(), self.ambient_dim, tol.rank_tol)
    }

    pub fn linear_rank(&self, tol: &ToleranceProfile) -> usize {
        numeric_rank(&self.points, self.ambient_dim, tol.rank_tol)
    }

    /// Checks that every point lies on the unit sphere within `geom_tol`.
    pub fn check_on_sphere(&self, tol: &ToleranceProfile) -> Result<()> {
        for (index, p) in self.points.iter().enumerate() {
            let n = norm(p);
            if (n - 1.0).abs() > tol.geom_tol {
                return Err(LabError::NotOnSphere { index, norm: n });
            }
        }
        Ok(())
    }
}

pub fn diameter(p: &Configuration) -> f64 {
    p.diameter()
}

/// At most `d` points in R^d spanning a `(k−1)`-dimensional affine subspace.
pub fn admissible_euclidean(p: &Configuration, tol: &ToleranceProfile) -> bool {
    p.len() <= p.ambient_dim && p.affine_rank(tol) == p.len() - 1
}

/// At most `d` linearly independent points on S^d ⊂ R^{d+1}.
pub fn admissible_spherical(p: &Configuration, tol: &ToleranceProfile) -> Result<bool> {
    p.check_on_sphere(tol)?;
    let d = p.ambient_dim.saturating_sub(1);
    Ok(p.len() <= d && p.linear_rank(tol) == p.len())
}

/// Ordered congruence under translations and O(D).
pub fn congruent(p: &Configuration, q: &Configuration, tol: &ToleranceProfile) -> Result<bool> {
    congruent_with(p, q, tol, Symmetry::Orthogonal)
}

/// Ordered congruence; with [`Symmetry::Special`] reflections are excluded.
pub fn congruent_with(
    p: &Configuration,
    q: &Configuration,
    tol: &ToleranceProfile,
    symmetry: Symmetry,
) -> Result<bool> {
    if p.len() != q.len() || p.ambient_dim != q.ambient_dim {
        return Err(LabError::ShapeMismatch(format!(
            "{}×{} vs {}×{}",
            p.len(),
            p.ambient_dim,
            q.len(),
            q.ambient_dim
        )));
    }
    let a = p.centered();
    let b = q.centered();
    let k = p.len();
    for i in 0..k {
        for j in i..k {
            if (dot(&a[i], &a[j]) - dot(&b[i], &b[j])).abs() > tol.congruence_tol {
                return Ok(false);
            }
        }
    }
    if symmetry == Symmetry::Orthogonal {
        return Ok(true);
    }
    let dim = p.ambient_dim;
    if p.affine_rank(tol) < dim {
        // A reflection fixing the affine hull absorbs any orientation flip.
        return Ok(true);
    }
    let am = DMatrix::from_fn(k, dim, |i, j| a[i][j]);
    let bm = DMatrix::from_fn(k, dim, |i, j| b[i][j]);
    let svd = (bm.transpose() * am).svd(true, true);
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    Ok(u.determinant() * vt.determinant() > 0.0)
}

/// Orthonormal basis (modified Gram–Schmidt) of the span of `vectors`.
fn orthonormal_basis(vectors: &[Vec<f64>], rel_tol: f64) -> Vec<Vec<f64>> {
    let scale = vectors.iter().map(|v| norm(v)).fold(0.0, f64::max);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = norm(&w);
        if n > rel_tol * scale.max(1.0) {
            basis.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

/// Places a copy of `t·P` back on the sphere.
///
/// With `c` the point of aff(P) closest to the origin and `r` the common
/// distance of the points from `c`, the output is
/// `Q_i = √(1 − t²r²)·ŵ + t·(p_i − c)` where `ŵ` is the unit vector along
/// `c` (or, when `c = 0`, the first coordinate axis left over after
/// orthogonalizing against the directions of aff(P)).
pub fn contract_to_sphere(p: &Configuration, t: f64, tol: &ToleranceProfile) -> Result<Configuration> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(LabError::BadScale(t));
    }
    p.check_on_sphere(tol)?;
    let dim = p.ambient_dim;
    let base = &p.points[0];
    let directions: Vec<Vec<f64>> = p.points[1..]
        .iter()
        .map(|q| q.iter().zip(base).map(|(x, y)| x - y).collect())
        .collect();
    let basis = orthonormal_basis(&directions, tol.rank_tol);
    if basis.len() >= dim {
        return Err(LabError::NotContractibleHere(basis.len()));
    }
    let mut c = base.clone();
    for b in &basis {
        let coef = dot(base, b);
        c.iter_mut().zip(b).for_each(|(x, y)| *x -= coef * y);
    }
    let c_norm = norm(&c);
    let r2 = (1.0 - c_norm * c_norm).max(0.0);
    let w_hat: Vec<f64> = if c_norm > 1e-12 {
        c.iter().map(|x| x / c_norm).collect()
    } else {
        let axes: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| f64::from(i == j)).collect())
            .collect();
        let mut seed = basis.clone();
        seed.extend(axes);
        orthonormal_basis(&seed, 1e-6)
            .into_iter()
            .nth(basis.len())
            .expect("direction space has positive codimension")
    };
    let lift = (1.0 - t * t * r2).max(0.0).sqrt();
    let points = p
        .points
        .iter()
        .map(|q| {
            q.iter()
                .zip(&c)
                .zip(&w_hat)
                .map(|((x, ci), wi)| lift * wi + t * (x - ci))
                .collect()
        })
        .collect();
    Ok(Configuration {
        label: format!("{}@t={}", p.label, t),
        ambient_dim: dim,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{haar_rotation, uniform_sphere_point, RandomSource};

    fn cfg(points: Vec<Vec<f64>>) -> Configuration {
        Configuration::from_points("t", points).unwrap()
    }

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn diameters() {
        assert_eq!(cfg(vec![vec![0.0, 0.0], vec![1.0, 0.0]]).diameter(), 1.0);
        assert_eq!(cfg(vec![vec![0.3, 0.1]]).diameter(), 0.0);
        let sq = cfg(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        assert!((sq.diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_configurations() {
        assert!(matches!(
            Configuration::new("x", 2, vec![]),
            Err(LabError::EmptyConfiguration)
        ));
        assert!(matches!(
            Configuration::new("x", 2, vec![vec![0.0, 0.0], vec![0.0]]),
            Err(LabError::RaggedPoints { index: 1, .. })
        ));
        assert!(matches!(
            Configuration::new("x", 1, vec![vec![1.0], vec![1.0]]),
            Err(LabError::CoincidentPoints(0, 1))
        ));
    }

    #[test]
    fn euclidean_admissibility() {
        let h = 3f64.sqrt() / 2.0;
        let tri = cfg(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.5, h, 0.0]]);
        assert!(admissible_euclidean(&tri, &tol()));
        let line = cfg(vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![2.0, 0.0, 0.0]]);
        assert!(!admissible_euclidean(&line, &tol()));
        let three = cfg(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(!admissible_euclidean(&three, &tol()));
    }

    #[test]
    fn spherical_admissibility() {
        let e = |i: usize| (0..3).map(|j| f64::from(i == j)).collect::<Vec<_>>();
        assert!(admissible_spherical(&cfg(vec![e(0), e(1)]), &tol()).unwrap());
        assert!(!admissible_spherical(&cfg(vec![e(0), vec![-1.0, 0.0, 0.0]]), &tol()).unwrap());
        assert!(!admissible_spherical(&cfg(vec![e(0), e(1), e(2)]), &tol()).unwrap());
        assert!(matches!(
            admissible_spherical(&cfg(vec![vec![2.0, 0.0, 0.0]]), &tol()),
            Err(LabError::NotOnSphere { .. })
        ));
    }

    #[test]
    fn congruence_basics() {
        let p = cfg(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.2, 0.7]]);
        let mirror = cfg(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.2, -0.7]]);
        assert!(congruent(&p, &p.scaled(1.0), &tol()).unwrap());
        assert!(!congruent(&p, &p.scaled(2.0), &tol()).unwrap());
        assert!(congruent(&p, &mirror, &tol()).unwrap());
        assert!(!congruent_with(&p, &mirror, &tol(), Symmetry::Special).unwrap());
        let two = cfg(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert!(matches!(congruent(&p, &two, &tol()), Err(LabError::ShapeMismatch(_))));
    }

    #[test]
    fn congruence_under_random_rigid_motions() {
        let mut rng = RandomSource::new(21).rng();
        let p = cfg(vec![vec![0.0, 0.1, 0.2], vec![1.0, -0.3, 0.5], vec![0.2, 0.7, -0.4]]);
        for _ in 0..100 {
            let r = haar_rotation(3, &mut rng);
            let shift = uniform_sphere_point(2, &mut rng);
            let q = p.transformed(&r).translated(&shift);
            assert!(congruent(&p, &q, &tol()).unwrap());
            assert!(congruent(&q, &p, &tol()).unwrap());
            // Three points in R³ have a 2D affine hull, so orientation is free.
            assert!(congruent_with(&p, &q, &tol(), Symmetry::Special).unwrap());
        }
    }

    #[test]
    fn contraction_of_orthogonal_pair() {
        let p = cfg(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        let q = contract_to_sphere(&p, 0.5, &tol()).unwrap();
        for pt in &q.points {
            assert!((norm(pt) - 1.0).abs() < 1e-12);
        }
        assert!((q.distance(0, 1) - 2f64.sqrt() / 2.0).abs() < 1e-12);
        let same = contract_to_sphere(&p, 1.0, &tol()).unwrap();
        assert!(congruent(&same, &p, &tol()).unwrap());
    }

    #[test]
    fn contraction_through_origin_and_single_point() {
        let p = cfg(vec![vec![1.0, 0.0, 0.0], vec![-1.0, 0.0, 0.0]]);
        let q = contract_to_sphere(&p, 0.3, &tol()).unwrap();
        assert!((q.distance(0, 1) - 0.6).abs() < 1e-12);
        assert!(q.points.iter().all(|x| (norm(x) - 1.0).abs() < 1e-12));
        let single = cfg(vec![vec![0.0, 0.0, 1.0]]);
        let s = contract_to_sphere(&single, 0.4, &tol()).unwrap();
        assert_eq!(s.len(), 1);
        assert!((norm(&s.points[0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contraction_errors() {
        let e = |i: usize| (0..2).map(|j| f64::from(i == j)).collect::<Vec<_>>();
        let full = cfg(vec![e(0), e(1), vec![-1.0, 0.0]]);
        assert!(matches!(
            contract_to_sphere(&full, 0.5, &tol()),
            Err(LabError::NotContractibleHere(2))
        ));
        assert!(matches!(
            contract_to_sphere(&cfg(vec![e(0)]), 1.5, &tol()),
            Err(LabError::BadScale(_))
        ));
        assert!(matches!(
            contract_to_sphere(&cfg(vec![e(0)]), 0.0, &tol()),
            Err(LabError::BadScale(_))
        ));
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let p = cfg(vec![vec![0.1, 0.2], vec![1.0 / 3.0, 0.0]]);
        let s = serde_json::to_string(&p).unwrap();
        let q: Configuration = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let bad = r#"{"label":"x","ambient_dim":2,"points":[[0,0],[0]]}"#;
        assert!(serde_json::from_str::<Configuration>(bad).is_err());
    }
}
