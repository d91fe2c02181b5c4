//! Points and hyperplanes of complex projective space, the chordal metric and
//! polar (tangent) hyperplanes of null points.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{check_dim, Error, Result};
use crate::linalg::{herm_form_unchecked, tie_pivot, ComplexVector, C64};
use crate::Tolerances;

/// Position of a point relative to the ball `<z,z> < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignatureClass {
    Interior,
    Boundary,
    Exterior,
}

impl SignatureClass {
    pub fn of(value: f64, tau_null: f64) -> Self {
        if value < -tau_null {
            SignatureClass::Interior
        } else if value.abs() <= tau_null {
            SignatureClass::Boundary
        } else {
            SignatureClass::Exterior
        }
    }
}

/// A point of projective space stored through its canonical representative:
/// unit Euclidean norm, with the largest-modulus coordinate real positive
/// (lowest index on ties).
#[derive(Clone, PartialEq)]
pub struct ProjectivePoint {
    rep: ComplexVector,
    class: SignatureClass,
    value: f64,
}

/// Unit-norm, phase-canonical representative of the line through `v`.
pub(crate) fn canonical_rep(v: &ComplexVector) -> Result<ComplexVector> {
    if v.is_zero() {
        return Err(Error::Argument(
            "the zero vector has no projective class".into(),
        ));
    }
    let s = v.as_slice();
    if s.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Argument("non-finite coordinates".into()));
    }
    let k = tie_pivot(s);
    let norm = v.norm();
    if s[k].im == 0.0 && s[k].re > 0.0 && (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
        return Ok(v.clone());
    }
    let pm = s[k].norm();
    let phase = s[k] / pm;
    let inv = 1.0 / norm;
    let mut out: Vec<C64> = s.iter().map(|z| z * phase.conj() * inv).collect();
    out[k] = C64::new(pm * inv, 0.0);
    Ok(ComplexVector::new(out))
}

impl ProjectivePoint {
    pub fn rep(&self) -> &ComplexVector {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn signature_class(&self) -> SignatureClass {
        self.class
    }

    /// `<rep, rep>` for the canonical unit representative.
    pub fn signature_value(&self) -> f64 {
        self.value
    }

    pub fn is_interior(&self) -> bool {
        self.class == SignatureClass::Interior
    }

    pub fn is_boundary(&self) -> bool {
        self.class == SignatureClass::Boundary
    }

    /// Lexicographic order on `(re0, im0, re1, im1, ...)` of the canonical
    /// representatives.
    pub fn cmp_lex(&self, other: &Self) -> Ordering {
        for (a, b) in self.rep.iter().zip(other.rep.iter()) {
            let o = a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
            if o != Ordering::Equal {
                return o;
            }
        }
        self.dim().cmp(&other.dim())
    }

    /// Reclassifies the same point under a different null band.
    pub fn with_null_tolerance(&self, tau_null: f64) -> Self {
        Self {
            rep: self.rep.clone(),
            class: SignatureClass::of(self.value, tau_null),
            value: self.value,
        }
    }
}

impl fmt::Debug for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, z) in self.rep.iter().enumerate() {
            if i > 0 {
                write!(f, " : ")?;
            }
            write!(f, "{:.6}{:+.6}i", z.re, z.im)?;
        }
        write!(f, "] ({:?})", self.class)
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub fn project(v: &ComplexVector) -> Result<ProjectivePoint> {
    project_with(v, Tolerances::default().null)
}

pub fn project_with(v: &ComplexVector, tau_null: f64) -> Result<ProjectivePoint> {
    let rep = canonical_rep(v)?;
    let value = herm_form_unchecked(rep.as_slice(), rep.as_slice()).re;
    Ok(ProjectivePoint {
        class: SignatureClass::of(value, tau_null),
        rep,
        value,
    })
}

/// Convenience constructor from real homogeneous coordinates.
pub fn point(coords: &[f64]) -> Result<ProjectivePoint> {
    project(&ComplexVector::from_real(coords))
}

/// `sqrt(1 - |<u,v>_E|^2 / (|u|^2 |v|^2))`, evaluated through the 2x2 minors
/// `u_i v_j - u_j v_i` so that nearby points keep full relative accuracy.
pub fn chordal_vectors(u: &[C64], v: &[C64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..u.len() {
        for j in (i + 1)..u.len() {
            acc += (u[i] * v[j] - u[j] * v[i]).norm_sqr();
        }
    }
    let nu: f64 = u.iter().map(|z| z.norm_sqr()).sum();
    let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    (acc / (nu * nv)).sqrt().min(1.0)
}

pub fn chordal_distance(p: &ProjectivePoint, q: &ProjectivePoint) -> f64 {
    chordal_vectors(p.rep.as_slice(), q.rep.as_slice())
}

/// Radial projection onto the null cone in the ball model: the 0-th
/// coordinate is rescaled to `|(x1..xn)|` keeping its phase, so `<x,x> = 0`.
pub fn snap_to_null_cone(x: &ComplexVector) -> Result<ComplexVector> {
    let s = x.as_slice();
    let tail: f64 = s[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if tail == 0.0 {
        return Err(Error::Argument(
            "point on the ball axis has no radial boundary projection".into(),
        ));
    }
    let phase = if s[0].norm() > 0.0 {
        s[0] / s[0].norm()
    } else {
        C64::new(1.0, 0.0)
    };
    let mut out = s.to_vec();
    out[0] = phase * tail;
    Ok(ComplexVector::new(out))
}

/// Projective hyperplane `{[z] : sum_j covector_j z_j = 0}`.
#[derive(Clone, PartialEq)]
pub struct Hyperplane {
    covector: ComplexVector,
    tangency: Option<ProjectivePoint>,
}

impl Hyperplane {
    pub fn from_covector(covector: &ComplexVector) -> Result<Self> {
        Ok(Self {
            covector: canonical_rep(covector)?,
            tangency: None,
        })
    }

    /// Canonical unit covector.
    pub fn covector(&self) -> &ComplexVector {
        &self.covector
    }

    pub fn tangency_point(&self) -> Option<&ProjectivePoint> {
        self.tangency.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.covector.dim()
    }

    /// If the hyperplane is the polar of a null point, that point.
    pub fn detect_tangency(&self, tau_null: f64) -> Option<ProjectivePoint> {
        // covector = conj(J p)  <=>  p = J conj(covector)
        let p = self.covector.j_dual();
        project_with(&p, tau_null).ok().filter(|q| q.is_boundary())
    }

    pub fn with_tangency(mut self, tau_null: f64) -> Self {
        self.tangency = self.detect_tangency(tau_null);
        self
    }
}

impl fmt::Debug for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hyperplane")
            .field("covector", &self.covector)
            .field("tangency", &self.tangency)
            .finish()
    }
}

/// The complex hyperplane tangent to the sphere at a null point `p`:
/// `{z : <z, p> = 0}`.
pub fn polar_hyperplane(p: &ProjectivePoint) -> Result<Hyperplane> {
    if !p.is_boundary() {
        return Err(Error::Argument(format!(
            "tangent hyperplane needs a boundary point, got {:?} (<p,p> = {:.3e})",
            p.class, p.value
        )));
    }
    Ok(Hyperplane {
        covector: canonical_rep(&p.rep.j_dual())?,
        tangency: Some(p.clone()),
    })
}

/// `|sum_j covector_j z_j|` for the canonical unit representatives; zero
/// exactly on the hyperplane.
pub fn incidence_margin(z: &ProjectivePoint, h: &Hyperplane) -> Result<f64> {
    check_dim(h.dim(), z.dim())?;
    Ok(incidence_unchecked(z.rep.as_slice(), h.covector.as_slice()))
}

pub(crate) fn incidence_unchecked(z: &[C64], covector: &[C64]) -> f64 {
    z.iter()
        .zip(covector.iter())
        .map(|(a, b)| a * b)
        .sum::<C64>()
        .norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn project_examples() {
        let p = project(&ComplexVector::new(vec![
            c(0.0, 0.0),
            c(0.0, 2.0),
            c(0.0, 0.0),
        ]))
        .unwrap();
        assert_eq!(p.rep().as_slice(), &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.signature_class(), SignatureClass::Exterior);

        let p = point(&[1.0, 1.0, 0.0]).unwrap();
        let h = 0.5f64.sqrt();
        assert!((p.rep()[0] - c(h, 0.0)).norm() < 1e-15);
        assert!((p.rep()[1] - c(h, 0.0)).norm() < 1e-15);
        assert_eq!(p.signature_class(), SignatureClass::Boundary);

        let p = point(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.rep().as_slice(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(p.signature_class(), SignatureClass::Interior);

        assert!(project(&ComplexVector::zeros(3)).is_err());
    }

    #[test]
    fn project_is_idempotent_bitwise() {
        let v = ComplexVector::new(vec![c(0.3, -1.2), c(2.0, 0.7), c(-0.1, 0.4)]);
        let p = project(&v).unwrap();
        let q = project(p.rep()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn chordal_examples() {
        let e0 = point(&[1.0, 0.0, 0.0]).unwrap();
        let e1 = point(&[0.0, 1.0, 0.0]).unwrap();
        let d = point(&[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(chordal_distance(&e0, &e0), 0.0);
        assert!((chordal_distance(&e0, &e1) - 1.0).abs() < 1e-15);
        assert!((chordal_distance(&e0, &d) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(chordal_distance(&e0, &d), chordal_distance(&d, &e0));
    }

    #[test]
    fn polar_examples() {
        let p = point(&[1.0, 1.0, 0.0]).unwrap();
        let h = polar_hyperplane(&p).unwrap();
        // -z0 + z1 = 0 up to scale.
        let cv = h.covector();
        assert!((cv[0] + cv[1]).norm() < 1e-15);
        assert!(cv[2].norm() < 1e-15);
        assert!(incidence_margin(&p, &h).unwrap() < 1e-15);
        let e2 = point(&[0.0, 0.0, 1.0]).unwrap();
        assert!(incidence_margin(&e2, &h).unwrap() < 1e-15);
        let e0 = point(&[1.0, 0.0, 0.0]).unwrap();
        assert!((incidence_margin(&e0, &h).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);

        let q = point(&[1.0, -1.0, 0.0]).unwrap();
        let h = polar_hyperplane(&q).unwrap();
        let cv = h.covector();
        assert!((cv[0] - cv[1]).norm() < 1e-15);
        assert!(h.detect_tangency(1e-10).is_some());

        assert!(polar_hyperplane(&e0).is_err());
    }

    #[test]
    fn snap_lands_on_the_sphere() {
        let x = ComplexVector::new(vec![c(2.0, 1.0), c(0.3, 0.1), c(-0.5, 0.2)]);
        let y = snap_to_null_cone(&x).unwrap();
        let p = project(&y).unwrap();
        assert!(p.signature_value().abs() < 1e-15);
        assert!(snap_to_null_cone(&ComplexVector::basis(3, 0)).is_err());
    }
}
