use std::fmt;
use std::sync::{Arc, OnceLock};

use super::classify::ElementClass;
use super::words::Word;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    herm_form_unchecked, rank_split, signature_residual, sup_entry_norm, ComplexMatrix,
    ComplexVector, C64,
};
use crate::projective::{project_with, ProjectivePoint};
use crate::Tolerances;

/// An element of PU(1,n), stored through a lift with unit signature scale
/// (`M* J M = J`) whose largest-modulus entry is real positive.
#[derive(Clone)]
pub struct GroupElement {
    lift: ComplexMatrix,
    word: Word,
    tol: Tolerances,
    class: Arc<OnceLock<Result<ElementClass>>>,
}

impl GroupElement {
    pub(crate) fn from_normalized(lift: ComplexMatrix, word: Word, tol: Tolerances) -> Self {
        Self {
            lift,
            word,
            tol,
            class: Arc::new(OnceLock::new()),
        }
    }

    pub fn identity(dim: usize, tol: Tolerances) -> Self {
        Self::from_normalized(ComplexMatrix::identity(dim), Word::empty(), tol)
    }

    pub fn lift(&self) -> &ComplexMatrix {
        &self.lift
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.lift.dim()
    }

    pub fn with_word(mut self, word: Word) -> Self {
        self.word = word;
        self
    }

    /// `self * other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        Self::from_normalized(
            self.lift.mul(&other.lift).phase_canonical(),
            self.word.concat(&other.word),
            self.tol,
        )
    }

    pub fn inverse(&self) -> Self {
        Self::from_normalized(
            self.lift.j_adjoint().phase_canonical(),
            self.word.inverse(),
            self.tol,
        )
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut acc = Self::identity(self.dim(), self.tol);
        for _ in 0..k.unsigned_abs() {
            acc = base.compose(&acc);
        }
        acc
    }

    /// Classification at the element's own tolerances, computed once.
    pub fn class(&self) -> Result<&ElementClass> {
        self.class
            .get_or_init(|| super::classify::classify_with(self, &self.tol))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `|M00| = cosh(d(o, g o) / 2)` for the ball center `o`.
    pub fn center_displacement(&self) -> f64 {
        2.0 * self.lift.get(0, 0).norm().max(1.0).acosh()
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupElement")
            .field("word", &self.word)
            .field("lift", &self.lift)
            .finish()
    }
}

/// Validates `m` as an element of U(1,n) up to a scalar and normalizes it.
///
/// The signature residual is measured relative to `sup_entry_norm(m)^2`, so
/// acceptance does not depend on the scale of the lift.
pub fn make_element(m: &ComplexMatrix, tol: &Tolerances) -> Result<GroupElement> {
    let sup = sup_entry_norm(m).map_err(|_| Error::NotInvertible)?;
    let scaled = m.scale(C64::new(1.0 / sup, 0.0));
    if !rank_split(&scaled, tol.rank)?.kernel.is_empty() {
        return Err(Error::NotInvertible);
    }
    let fit = signature_residual(&scaled);
    if fit.residual > tol.unitary || fit.scale <= tol.unitary {
        return Err(Error::NotUnitary {
            residual: fit.residual,
        });
    }
    let lift = scaled
        .scale(C64::new(1.0 / fit.scale.sqrt(), 0.0))
        .phase_canonical();
    Ok(GroupElement::from_normalized(lift, Word::empty(), *tol))
}

pub fn act(g: &GroupElement, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    check_dim(g.dim(), p.dim())?;
    project_with(&g.lift.mul_vec(p.rep()), g.tol.null)
}

/// Bergman distance between two negative vectors, normalized by
/// `cosh^2(d/2) = <x,y><y,x> / (<x,x><y,y>)`.
///
/// Evaluated as `sinh^2(d/2) = (|<x,y>|^2 - <x,x><y,y>) / (<x,x><y,y>)` with
/// the numerator expanded into 2x2 minors, which vanish exactly for `x = y`.
pub fn bergman_vectors(x: &ComplexVector, y: &ComplexVector) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    let (u, v) = (x.as_slice(), y.as_slice());
    let uu = herm_form_unchecked(u, u).re;
    let vv = herm_form_unchecked(v, v).re;
    if !(uu < 0.0 && vv < 0.0) {
        return Err(Error::Argument(
            "Bergman distance needs two interior points".into(),
        ));
    }
    let mut num = 0.0;
    for i in 0..u.len() {
        for j in (i + 1)..u.len() {
            let minor = (u[i] * v[j] - u[j] * v[i]).norm_sqr();
            if i == 0 {
                num += minor;
            } else {
                num -= minor;
            }
        }
    }
    let ratio = (num / (uu * vv)).max(0.0);
    Ok(2.0 * ratio.sqrt().asinh())
}

pub fn bergman_distance(x: &ProjectivePoint, y: &ProjectivePoint) -> Result<f64> {
    if !x.is_interior() || !y.is_interior() {
        return Err(Error::Argument(
            "Bergman distance needs two interior points".into(),
        ));
    }
    bergman_vectors(x.rep(), y.rep())
}

/// `d(y, g x)` for negative vectors `x`, `y`, using `<gx, gx> = <x, x>`.
///
/// Far orbit points have large entries whose self-product cancels
/// catastrophically; the cross term `<y, g x>` does not.
pub fn orbit_distance(y: &ComplexVector, g: &GroupElement, x: &ComplexVector) -> Result<f64> {
    check_dim(g.dim(), x.dim())?;
    check_dim(x.dim(), y.dim())?;
    let xx = herm_form_unchecked(x.as_slice(), x.as_slice()).re;
    let yy = herm_form_unchecked(y.as_slice(), y.as_slice()).re;
    if !(xx < 0.0 && yy < 0.0) {
        return Err(Error::Argument(
            "Bergman distance needs two interior points".into(),
        ));
    }
    let gx = g.lift.mul_vec(x);
    let cross = herm_form_unchecked(y.as_slice(), gx.as_slice()).norm();
    let ch = cross / (xx * yy).sqrt();
    if ch < 1.0 + 1e-6 {
        return bergman_vectors(y, &gx);
    }
    Ok(2.0 * ch.acosh())
}

/// Smallest `k <= max_order` with `g^k` projectively trivial, if any.
///
/// Powers are accumulated with sup-entry renormalization; `g^k` counts as the
/// identity when its sup-normalized, phase-canonical lift is within `fix` of
/// the identity matrix entrywise.
pub fn finite_order(g: &GroupElement, max_order: usize) -> Option<usize> {
    let id = ComplexMatrix::identity(g.dim());
    let mut acc = ComplexMatrix::identity(g.dim());
    for k in 1..=max_order {
        acc = g.lift.mul(&acc);
        let s = sup_entry_norm(&acc).ok()?;
        acc = acc.scale(C64::new(1.0 / s, 0.0)).phase_canonical();
        if acc.max_abs_diff(&id) <= g.tol.fix {
            return Some(k);
        }
    }
    None
}
