//! Seeded random generators for U(1,n) elements, points and matrices.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{herm_form_unchecked, ComplexMatrix, ComplexVector, C64};
use crate::projective::{project, ProjectivePoint};

pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexVector {
    ComplexVector::new((0..dim).map(|_| complex_gaussian(rng)).collect())
}

pub fn unit_scalar<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// An element of U(1,n) with unit signature scale.
///
/// J-Gram-Schmidt on random columns, the first seeded as a negative vector
/// `(1, w)` with `|w| < max_radius < 1`; the element moves the ball center by
/// at most `2 atanh(max_radius)`.
pub fn random_unitary_1n<R: Rng + ?Sized>(rng: &mut R, n: usize, max_radius: f64) -> ComplexMatrix {
    let dim = n + 1;
    let mut cols: Vec<ComplexVector> = Vec::with_capacity(dim);
    let dir = complex_gaussian_vector(rng, n);
    let r = rng.random_range(0.0..max_radius) / dir.norm();
    let mut first = vec![C64::new(1.0, 0.0)];
    first.extend(dir.iter().map(|z| z * r));
    cols.push(ComplexVector::new(first));
    let c0 = &cols[0];
    let s = (-herm_form_unchecked(c0.as_slice(), c0.as_slice()).re).sqrt();
    cols[0] = c0.scale(C64::new(1.0 / s, 0.0));
    while cols.len() < dim {
        let mut v = complex_gaussian_vector(rng, dim);
        for c in &cols {
            let cc = herm_form_unchecked(c.as_slice(), c.as_slice());
            let coef = herm_form_unchecked(v.as_slice(), c.as_slice()) / cc;
            v = v.sub(&c.scale(coef));
        }
        let vv = herm_form_unchecked(v.as_slice(), v.as_slice()).re;
        if vv <= 1e-6 {
            continue;
        }
        cols.push(v.scale(C64::new(1.0 / vv.sqrt(), 0.0)));
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

/// A point of the ball `|w| < max_radius` in the affine chart `z0 = 1`.
pub fn random_interior_point<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_radius: f64,
) -> ProjectivePoint {
    let dir = complex_gaussian_vector(rng, n);
    let r = rng.random_range(0.0..max_radius) / dir.norm();
    let mut v = vec![C64::new(1.0, 0.0)];
    v.extend(dir.iter().map(|z| z * r));
    project(&ComplexVector::new(v)).expect("nonzero")
}

/// A point of the sphere `<z,z> = 0`.
pub fn random_boundary_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ProjectivePoint {
    let dir = complex_gaussian_vector(rng, n);
    let mut v = vec![C64::new(1.0, 0.0)];
    let inv = 1.0 / dir.norm();
    v.extend(dir.iter().map(|z| z * inv));
    project(&ComplexVector::new(v)).expect("nonzero")
}

/// Product of Gaussian `dim x rank` and `rank x dim` factors.
pub fn random_matrix_of_rank<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    rank: usize,
) -> ComplexMatrix {
    let left: Vec<ComplexVector> = (0..rank)
        .map(|_| complex_gaussian_vector(rng, dim))
        .collect();
    let right: Vec<ComplexVector> = (0..rank)
        .map(|_| complex_gaussian_vector(rng, dim))
        .collect();
    ComplexMatrix::from_fn(dim, |i, j| {
        (0..rank).map(|k| left[k][i] * right[k][j]).sum()
    })
}
