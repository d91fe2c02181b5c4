use super::element::GroupElement;
use crate::error::{Error, Result};
use crate::linalg::{eigenspaces, min_form_direction, ComplexMatrix, ComplexVector, C64};
use crate::projective::{project_with, snap_to_null_cone, ProjectivePoint};
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ElementKind {
    Identity,
    Elliptic,
    Parabolic,
    Loxodromic,
}

#[derive(Debug, Clone)]
pub struct ElementClass {
    pub kind: ElementKind,
    /// One point for parabolic elements; `[attracting, repelling]` for
    /// loxodromic ones.
    pub boundary_fixed_points: Vec<ProjectivePoint>,
    /// Elliptic elements only.
    pub interior_fixed_point: Option<ProjectivePoint>,
    /// Index into `boundary_fixed_points` of the attracting point.
    pub attracting: Option<usize>,
    /// Moduli of the eigenvalue clusters of the unit-scale lift, descending.
    pub eigenvalue_moduli: Vec<f64>,
}

/// Null vectors from eigen-data carry residuals well above the null band
/// before snapping; beyond this they are not treated as boundary points.
const NULL_ACCEPT: f64 = 1e-6;

pub fn classify(g: &GroupElement) -> Result<ElementClass> {
    g.class().cloned()
}

/// Fixed-point classification through the eigen-data of the lift.
///
/// With `M* J M = J`, eigenvalues off the unit circle mean loxodromic; an
/// eigenspace containing a negative vector means elliptic; otherwise the
/// element is parabolic. Decision quantities falling in the band
/// `[class / 100, class]` are reported as ill-conditioned.
pub fn classify_with(g: &GroupElement, tol: &Tolerances) -> Result<ElementClass> {
    let lift = g.lift();
    let dim = lift.dim();
    let band_lo = tol.class / 100.0;

    let trace: C64 = (0..dim).map(|i| lift.get(i, i)).sum();
    if trace.norm() > 0.0 {
        let phase = trace / trace.norm();
        let scalar = ComplexMatrix::identity(dim).scale(phase);
        if lift.max_abs_diff(&scalar) <= tol.class {
            return Ok(ElementClass {
                kind: ElementKind::Identity,
                boundary_fixed_points: Vec::new(),
                interior_fixed_point: None,
                attracting: None,
                eigenvalue_moduli: vec![1.0; dim],
            });
        }
    }

    let spaces = eigenspaces(lift, tol.rank)?;
    let mut moduli: Vec<f64> = spaces
        .iter()
        .flat_map(|s| std::iter::repeat_n(s.value.norm(), s.multiplicity))
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));

    let top = spaces
        .iter()
        .max_by(|a, b| a.value.norm().total_cmp(&b.value.norm()))
        .expect("at least one eigenvalue");
    let excess = top.value.norm() - 1.0;

    if excess > tol.class {
        let attracting = boundary_point(&top.basis[0], tol)?;
        // The repelling point is the attracting point of the inverse, which
        // is computed exactly as J M* J.
        let inv_spaces = eigenspaces(&lift.j_adjoint(), tol.rank)?;
        let inv_top = inv_spaces
            .iter()
            .max_by(|a, b| a.value.norm().total_cmp(&b.value.norm()))
            .expect("at least one eigenvalue");
        let repelling = boundary_point(&inv_top.basis[0], tol)?;
        return Ok(ElementClass {
            kind: ElementKind::Loxodromic,
            boundary_fixed_points: vec![attracting, repelling],
            interior_fixed_point: None,
            attracting: Some(0),
            eigenvalue_moduli: moduli,
        });
    }
    if excess >= band_lo {
        return Err(Error::IllConditioned(format!(
            "spectral radius exceeds 1 by {excess:.3e}, inside the band [{band_lo:.1e}, {:.1e}]",
            tol.class
        )));
    }
    // A diagonalizable cluster whose members leave the unit circle is a
    // loxodromic element too weak to separate from the parabolic case.
    for space in spaces.iter().filter(|s| !s.defective && s.multiplicity > 1) {
        let dev = space
            .members
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        if dev >= band_lo {
            return Err(Error::IllConditioned(format!(
                "eigenvalue cluster straddles the unit circle by {dev:.3e}"
            )));
        }
    }

    // Form restricted to each eigenspace: the most negative direction.
    let mut most_negative: Option<(f64, ComplexVector)> = None;
    let mut closest_null: Option<(f64, ComplexVector)> = None;
    for space in &spaces {
        let (val, dir) = min_form_direction(&space.basis);
        if most_negative.as_ref().is_none_or(|(v, _)| val < *v) {
            most_negative = Some((val, dir.clone()));
        }
        if closest_null
            .as_ref()
            .is_none_or(|(v, _)| val.abs() < v.abs())
        {
            closest_null = Some((val, dir));
        }
    }
    let (neg_val, neg_dir) = most_negative.expect("at least one eigenspace");
    if neg_val < -tol.class {
        let p = project_with(&neg_dir, tol.null)?;
        return Ok(ElementClass {
            kind: ElementKind::Elliptic,
            boundary_fixed_points: Vec::new(),
            interior_fixed_point: Some(p),
            attracting: None,
            eigenvalue_moduli: moduli,
        });
    }
    if neg_val <= -band_lo {
        return Err(Error::IllConditioned(format!(
            "most negative eigenspace direction has <v,v> = {neg_val:.3e}, inside the band"
        )));
    }

    let (_, null_dir) = closest_null.expect("at least one eigenspace");
    let fixed = boundary_point(&null_dir, tol)?;
    Ok(ElementClass {
        kind: ElementKind::Parabolic,
        boundary_fixed_points: vec![fixed],
        interior_fixed_point: None,
        attracting: None,
        eigenvalue_moduli: moduli,
    })
}

fn boundary_point(v: &ComplexVector, tol: &Tolerances) -> Result<ProjectivePoint> {
    let unit = v.scale(C64::new(1.0 / v.norm(), 0.0));
    let value = crate::linalg::herm_form(&unit, &unit)?.re;
    if value.abs() > NULL_ACCEPT {
        return Err(Error::IllConditioned(format!(
            "expected a null eigenvector, found <v,v> = {value:.3e}"
        )));
    }
    project_with(&snap_to_null_cone(&unit)?, tol.null)
}
