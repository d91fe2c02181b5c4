//! Finite approximations of the limit set: accumulation points of orbits and
//! boundary fixed points of words.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::isometry::{orbit_distance, words, ElementKind, GroupSpec};
use crate::projective::{
    chordal_distance, chordal_vectors, project_with, snap_to_null_cone, ProjectivePoint,
};

pub const DEFAULT_R_ACC: f64 = 10.0;
pub const DEFAULT_GRID_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Orbit,
    FixedPoints,
    Merged,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Orbit => "orbit",
            Method::FixedPoints => "fixed_points",
            Method::Merged => "merged",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub method: Method,
    pub depth: usize,
    pub base: Option<ProjectivePoint>,
}

/// Deduplicated, sorted boundary points.
#[derive(Debug, Clone)]
pub struct LimitSetCloud {
    points: Vec<ProjectivePoint>,
    grid_eps: f64,
    provenance: Provenance,
    diagnostics: Vec<String>,
}

impl LimitSetCloud {
    /// Builds a cloud from boundary points, deduplicating at `grid_eps`.
    pub fn from_points(
        points: Vec<ProjectivePoint>,
        grid_eps: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if grid_eps.is_nan() || grid_eps <= 0.0 {
            return Err(Error::Argument(format!(
                "grid_eps must be positive, got {grid_eps}"
            )));
        }
        if let Some(p) = points.iter().find(|p| !p.is_boundary()) {
            return Err(Error::Argument(format!(
                "cloud point {p} is not on the boundary"
            )));
        }
        if let Some(p) = points.first() {
            for q in &points {
                check_dim(p.dim(), q.dim())?;
            }
        }
        Ok(Self {
            points: dedup(points, grid_eps),
            grid_eps,
            provenance,
            diagnostics: Vec::new(),
        })
    }

    pub fn points(&self) -> &[ProjectivePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn grid_eps(&self) -> f64 {
        self.grid_eps
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    /// Dimension of the ambient vector space, if the cloud is nonempty.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(|p| p.dim())
    }

    /// Union of two clouds, deduplicated at the coarser resolution.
    pub fn merge(&self, other: &Self) -> Result<Self> {
        if let (Some(a), Some(b)) = (self.dim(), other.dim()) {
            check_dim(a, b)?;
        }
        let mut all = self.points.clone();
        all.extend(other.points.iter().cloned());
        let mut out = Self::from_points(
            all,
            self.grid_eps.max(other.grid_eps),
            Provenance {
                method: Method::Merged,
                depth: self.provenance.depth.max(other.provenance.depth),
                base: self
                    .provenance
                    .base
                    .clone()
                    .or(other.provenance.base.clone()),
            },
        )?;
        out.diagnostics = self.diagnostics.clone();
        out.diagnostics.extend(other.diagnostics.iter().cloned());
        Ok(out)
    }
}

/// Phase-invariant coordinates of a unit vector: entries of `u u*` from the
/// first row. Each moves by at most `sqrt(2)` times the chordal distance.
fn grid_key(p: &ProjectivePoint, cell: f64) -> [i64; 3] {
    let u = p.rep().as_slice();
    let a = u[0] * u[1].conj();
    let third = if u.len() > 2 {
        (u[0] * u[2].conj()).re
    } else {
        u[0].norm_sqr()
    };
    [a.re, a.im, third].map(|x| (x / cell).floor() as i64)
}

/// Sorts lexicographically, then keeps each point with no kept point within
/// `eps`. The survivor of a cluster is its lexicographically least member.
pub(crate) fn dedup(mut points: Vec<ProjectivePoint>, eps: f64) -> Vec<ProjectivePoint> {
    points.sort_by(|a, b| a.cmp_lex(b));
    let cell = 2.0 * eps;
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    let mut kept: Vec<ProjectivePoint> = Vec::new();
    for p in points {
        let key = grid_key(&p, cell);
        let mut close = false;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let k = [key[0] + dx, key[1] + dy, key[2] + dz];
                    if let Some(ids) = grid.get(&k) {
                        if ids.iter().any(|&i| chordal_distance(&kept[i], &p) < eps) {
                            close = true;
                            break 'search;
                        }
                    }
                }
            }
        }
        if !close {
            grid.entry(key).or_default().push(kept.len());
            kept.push(p);
        }
    }
    kept
}

/// Accumulation points of the orbit of an interior base point.
///
/// Orbit points at Bergman distance at least `r_acc` from the base are
/// pushed radially onto the sphere and deduplicated at `grid_eps`.
pub fn orbit_accumulate(
    spec: &GroupSpec,
    base: &ProjectivePoint,
    depth: usize,
    r_acc: f64,
    grid_eps: f64,
) -> Result<LimitSetCloud> {
    check_dim(spec.dim(), base.dim())?;
    if !base.is_interior() {
        return Err(Error::Argument(format!(
            "orbit base {base} is not interior"
        )));
    }
    if depth < 1 {
        return Err(Error::Argument("depth must be at least 1".into()));
    }
    let tol = spec.tolerances();
    let elements = words(spec, depth);
    let raw: Vec<Result<Option<ProjectivePoint>>> = elements
        .par_iter()
        .map(|g| {
            if orbit_distance(base.rep(), g, base.rep())? < r_acc {
                return Ok(None);
            }
            let v = g.lift().mul_vec(base.rep());
            Ok(Some(project_with(&snap_to_null_cone(&v)?, tol.null)?))
        })
        .collect();
    let mut points = Vec::new();
    for r in raw {
        if let Some(p) = r? {
            points.push(p);
        }
    }
    let mut cloud = LimitSetCloud::from_points(
        points,
        grid_eps,
        Provenance {
            method: Method::Orbit,
            depth,
            base: Some(base.clone()),
        },
    )?;
    if cloud.is_empty() {
        cloud
            .diagnostics
            .push("no accumulation detected at this depth".into());
    }
    Ok(cloud)
}

/// Boundary fixed points of the loxodromic and parabolic words up to `depth`.
pub fn fixed_point_seed(spec: &GroupSpec, depth: usize, grid_eps: f64) -> Result<LimitSetCloud> {
    if depth < 1 {
        return Err(Error::Argument("depth must be at least 1".into()));
    }
    let elements = words(spec, depth);
    let found: Vec<(Vec<ProjectivePoint>, bool)> = elements
        .par_iter()
        .map(|g| match g.class() {
            Ok(c) if matches!(c.kind, ElementKind::Loxodromic | ElementKind::Parabolic) => {
                (c.boundary_fixed_points.clone(), false)
            }
            Ok(_) => (Vec::new(), false),
            Err(_) => (Vec::new(), true),
        })
        .collect();
    let skipped = found.iter().filter(|(_, s)| *s).count();
    let points = found.into_iter().flat_map(|(p, _)| p).collect();
    let mut cloud = LimitSetCloud::from_points(
        points,
        grid_eps,
        Provenance {
            method: Method::FixedPoints,
            depth,
            base: None,
        },
    )?;
    if skipped > 0 {
        cloud
            .diagnostics
            .push(format!("{skipped} words skipped as ill-conditioned"));
    }
    Ok(cloud)
}

/// Symmetric Hausdorff distance in the chordal metric.
pub fn hausdorff(c1: &LimitSetCloud, c2: &LimitSetCloud) -> Result<f64> {
    if c1.is_empty() || c2.is_empty() {
        return Err(Error::Argument(
            "Hausdorff distance needs nonempty clouds".into(),
        ));
    }
    check_dim(c1.dim().unwrap_or(0), c2.dim().unwrap_or(0))?;
    Ok(directed(c1.points(), c2.points()).max(directed(c2.points(), c1.points())))
}

fn directed(a: &[ProjectivePoint], b: &[ProjectivePoint]) -> f64 {
    a.par_iter()
        .map(|p| {
            b.iter()
                .map(|q| chordal_vectors(p.rep().as_slice(), q.rep().as_slice()))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max)
}

/// At most two points. Advisory: shallow depths under-count.
pub fn is_elementary(c: &LimitSetCloud) -> bool {
    c.len() <= 2
}
