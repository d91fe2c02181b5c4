//! Dense complex linear algebra in dimension `n + 1` and the signature-(1,n)
//! Hermitian form `<u,v> = -u0 conj(v0) + sum_j uj conj(vj)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64 as C64;

use crate::error::{check_dim, Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Eigenvalues closer than this (relative to the larger modulus) are treated
/// as one cluster.
const CLUSTER_REL: f64 = 1e-5;

/// Relative modulus gap below which two entries tie for the pivot.
pub const TIE_REL: f64 = 1e-12;

/// Lowest index whose modulus is within `TIE_REL` of the largest.
pub(crate) fn tie_pivot(entries: &[C64]) -> usize {
    let max = entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let floor = max * (1.0 - TIE_REL);
    entries.iter().position(|z| z.norm() >= floor).unwrap_or(0)
}

#[derive(Clone, PartialEq)]
pub struct ComplexVector(DVector<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Self {
        Self(DVector::from_vec(entries))
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DVector::from_element(dim, ZERO))
    }

    /// The `k`-th standard basis vector.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = ONE;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[C64] {
        self.0.as_slice()
    }

    pub fn iter(&self) -> impl Iterator<Item = &C64> {
        self.0.iter()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| *z == ZERO)
    }

    /// Euclidean Hermitian product `sum_j uj conj(vj)`.
    pub fn inner_euclid(&self, other: &Self) -> C64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `conj(J v)`: the covector of the hyperplane `{z : <z, v> = 0}`.
    pub fn j_dual(&self) -> Self {
        Self::new(
            self.0
                .iter()
                .enumerate()
                .map(|(j, z)| if j == 0 { -z.conj() } else { z.conj() })
                .collect(),
        )
    }

    pub(crate) fn na(&self) -> &DVector<C64> {
        &self.0
    }
}

impl std::ops::Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl fmt::Debug for ComplexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Square complex matrix of dimension `n + 1 >= 2`.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim < 2 {
            return Err(Error::Argument(format!(
                "matrix dimension must be at least 2, got {dim}"
            )));
        }
        for row in rows {
            check_dim(dim, row.len())?;
        }
        Ok(Self(DMatrix::from_fn(dim, dim, |i, j| rows[i][j])))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn diag(entries: &[C64]) -> Self {
        Self(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> ComplexVector {
        ComplexVector(&self.0 * &v.0)
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self(&self.0 * c)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector(self.0.column(j).into_owned())
    }

    /// `J M* J`, the inverse of an element of U(1,n) with unit signature scale.
    pub fn j_adjoint(&self) -> Self {
        let d = self.dim();
        Self::from_fn(d, |i, j| {
            let s = if (i == 0) != (j == 0) { -1.0 } else { 1.0 };
            self.0[(j, i)].conj() * s
        })
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(Self)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Index (row-major) of the largest-modulus entry; moduli within
    /// `TIE_REL` of the maximum count as ties and the lowest index wins.
    pub fn pivot(&self) -> (usize, usize) {
        let k = tie_pivot(self.0.transpose().as_slice());
        (k / self.dim(), k % self.dim())
    }

    /// Rescales by a unit scalar so the largest-modulus entry is real positive.
    pub fn phase_canonical(&self) -> Self {
        let (i, j) = self.pivot();
        let p = self.0[(i, j)];
        if p == ZERO {
            return self.clone();
        }
        let mut out = self.scale(p.conj() / p.norm());
        out.0[(i, j)] = C64::new(p.norm(), 0.0);
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// The signature-(1,n) Hermitian form.
pub fn herm_form(u: &ComplexVector, v: &ComplexVector) -> Result<C64> {
    check_dim(u.dim(), v.dim())?;
    Ok(herm_form_unchecked(u.as_slice(), v.as_slice()))
}

pub(crate) fn herm_form_unchecked(u: &[C64], v: &[C64]) -> C64 {
    let mut acc = -(u[0] * v[0].conj());
    for j in 1..u.len() {
        acc += u[j] * v[j].conj();
    }
    acc
}

/// Result of fitting `M* J M ~ s J` with `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignatureFit {
    /// Max-entry modulus of `M* J M - s J` at the optimal scale.
    pub residual: f64,
    /// The optimal positive scale `s`.
    pub scale: f64,
}

pub fn signature_residual(m: &ComplexMatrix) -> SignatureFit {
    let d = m.dim();
    let mut j = DMatrix::<C64>::identity(d, d);
    j[(0, 0)] = -ONE;
    let w = m.0.adjoint() * &j * &m.0;

    let mut off = 0.0_f64;
    let mut diag = Vec::with_capacity(d);
    for r in 0..d {
        for c in 0..d {
            if r == c {
                let sign = if r == 0 { -1.0 } else { 1.0 };
                diag.push(w[(r, c)] * sign);
            } else {
                off = off.max(w[(r, c)].norm());
            }
        }
    }
    let cost = |s: f64| diag.iter().map(|c| (c - s).norm()).fold(off, f64::max);

    // The cost is convex in s; golden-section search on a bracket containing
    // every real part.
    let hi = diag.iter().map(|c| c.re.abs()).fold(0.0, f64::max) * 2.0 + 1.0;
    let (mut a, mut b) = (0.0_f64, hi);
    let g = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = cost(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = cost(x2);
        }
        if b - a <= f64::EPSILON * b.max(1e-300) {
            break;
        }
    }
    let s = 0.5 * (a + b);
    SignatureFit {
        residual: cost(s),
        scale: s,
    }
}

pub fn sup_entry_norm(m: &ComplexMatrix) -> Result<f64> {
    let s = m.0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if s == 0.0 {
        Err(Error::Argument(
            "zero matrix has no sup-entry normalization".into(),
        ))
    } else {
        Ok(s)
    }
}

/// Numerical kernel/image split at a relative singular-value threshold.
#[derive(Debug, Clone)]
pub struct RankSplit {
    /// Orthonormal basis of the numerical kernel.
    pub kernel: Vec<ComplexVector>,
    /// Orthonormal basis of the numerical image (column space).
    pub image: Vec<ComplexVector>,
    /// Singular values, descending.
    pub singular_values: Vec<f64>,
    /// Some singular value lies within a factor 10 of the threshold.
    pub ill_conditioned: bool,
}

impl RankSplit {
    pub fn rank(&self) -> usize {
        self.image.len()
    }
}

struct SortedSvd {
    sigma: Vec<f64>,
    left: Vec<ComplexVector>,
    right: Vec<ComplexVector>,
}

fn sorted_svd(a: &DMatrix<C64>) -> Result<SortedSvd> {
    let svd = nalgebra::linalg::SVD::try_new(a.clone(), true, true, f64::EPSILON, 0).ok_or_else(
        || Error::Numerical {
            message: "SVD did not converge".into(),
            residual: f64::NAN,
        },
    )?;
    let u = svd.u.as_ref().expect("requested U");
    let vt = svd.v_t.as_ref().expect("requested V^*");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    let left = order
        .iter()
        .map(|&i| ComplexVector(u.column(i).into_owned()))
        .collect();
    let right = order
        .iter()
        .map(|&i| ComplexVector(vt.row(i).adjoint()))
        .collect();
    Ok(SortedSvd { sigma, left, right })
}

pub fn rank_split(m: &ComplexMatrix, tol: f64) -> Result<RankSplit> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Argument(format!(
            "rank tolerance must be positive, got {tol}"
        )));
    }
    sup_entry_norm(m)?;
    let svd = sorted_svd(&m.0)?;
    let top = svd.sigma[0];
    let mut kernel = Vec::new();
    let mut image = Vec::new();
    let mut ill = false;
    for (k, &s) in svd.sigma.iter().enumerate() {
        let rel = s / top;
        if rel > tol / 10.0 && rel < tol * 10.0 {
            ill = true;
        }
        if rel <= tol {
            kernel.push(svd.right[k].clone());
        } else {
            image.push(svd.left[k].clone());
        }
    }
    Ok(RankSplit {
        kernel,
        image,
        singular_values: svd.sigma,
        ill_conditioned: ill,
    })
}

pub fn kernel_basis(m: &ComplexMatrix, tol: f64) -> Result<Vec<ComplexVector>> {
    Ok(rank_split(m, tol)?.kernel)
}

pub fn image_basis(m: &ComplexMatrix, tol: f64) -> Result<Vec<ComplexVector>> {
    Ok(rank_split(m, tol)?.image)
}

/// Orthogonal projector residual: distance from unit `v` to span(`basis`).
pub(crate) fn residual_off_span(v: &ComplexVector, basis: &[ComplexVector]) -> f64 {
    let mut r = v.clone();
    for b in basis {
        r = r.sub(&b.scale(v.inner_euclid(b)));
    }
    r.norm()
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: C64,
    /// Unit Euclidean norm.
    pub vector: ComplexVector,
}

/// A cluster of numerically coincident eigenvalues and its eigenspace.
#[derive(Debug, Clone)]
pub struct EigenSpace {
    pub value: C64,
    /// Algebraic multiplicity (cluster size).
    pub multiplicity: usize,
    /// Orthonormal basis of the geometric eigenspace.
    pub basis: Vec<ComplexVector>,
    /// Geometric multiplicity below algebraic.
    pub defective: bool,
    /// Individual Schur eigenvalues in the cluster.
    pub members: Vec<C64>,
}

fn schur_eigenvalues(a: &DMatrix<C64>) -> Result<Vec<C64>> {
    let schur =
        nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 100_000).ok_or_else(|| {
            Error::Numerical {
                message: "Schur iteration did not converge".into(),
                residual: f64::NAN,
            }
        })?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

fn clusters(values: &[C64]) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn root(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let scale = values[i].norm().max(values[j].norm());
            if (values[i] - values[j]).norm() <= CLUSTER_REL * scale + 1e-14 {
                let (ri, rj) = (root(&mut label, i), root(&mut label, j));
                let (lo, hi) = (ri.min(rj), ri.max(rj));
                label[hi] = lo;
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = root(&mut label, i);
        match seen[r] {
            Some(g) => groups[g].push(i),
            None => {
                seen[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

fn shifted(a: &DMatrix<C64>, mu: C64) -> DMatrix<C64> {
    let mut s = a.clone();
    for i in 0..s.nrows() {
        s[(i, i)] -= mu;
    }
    s
}

/// Eigenvalue clusters with their geometric eigenspaces.
///
/// `rank_tol` is the relative singular-value threshold used to size each
/// eigenspace; a cluster spread inflates it, so that near-degenerate but
/// diagonalizable clusters keep their full eigenspace while Jordan blocks
/// are detected as defective.
pub fn eigenspaces(m: &ComplexMatrix, rank_tol: f64) -> Result<Vec<EigenSpace>> {
    let sup = sup_entry_norm(m)?;
    let a = &m.0 / C64::new(sup, 0.0);
    let values = schur_eigenvalues(&a)?;
    let mut out = Vec::new();
    for group in clusters(&values) {
        let members: Vec<C64> = group.iter().map(|&i| values[i]).collect();
        let k = members.len();
        let mu = members.iter().sum::<C64>() / k as f64;
        let spread = members.iter().map(|z| (z - mu).norm()).fold(0.0, f64::max);
        let svd = sorted_svd(&shifted(&a, mu))?;
        let thresh = (rank_tol * svd.sigma[0].max(1e-300)).max(100.0 * spread);
        let dim = svd.sigma.len();
        let small = svd.sigma.iter().filter(|&&s| s <= thresh).count();
        let kdim = small.clamp(1, k);
        let basis = (dim - kdim..dim)
            .rev()
            .map(|i| svd.right[i].clone())
            .collect();
        out.push(EigenSpace {
            value: mu * sup,
            multiplicity: k,
            basis,
            defective: kdim < k,
            members: members.iter().map(|z| z * sup).collect(),
        });
    }
    Ok(out)
}

/// All `n + 1` eigenpairs with multiplicity; each residual
/// `|M v - lambda v|` is checked against `eig_tol * sup_entry_norm(M)`.
pub fn eigen_with(m: &ComplexMatrix, rank_tol: f64, eig_tol: f64) -> Result<Vec<EigenPair>> {
    let sup = sup_entry_norm(m)?;
    let a = &m.0 / C64::new(sup, 0.0);
    let mut pairs = Vec::with_capacity(m.dim());
    for space in eigenspaces(m, rank_tol)? {
        let mu = space.value / sup;
        let spread = space
            .members
            .iter()
            .map(|z| (z / sup - mu).norm())
            .fold(0.0, f64::max);
        if !space.defective && space.multiplicity > 1 && spread > 1e-12 {
            for lam in &space.members {
                let l = lam / sup;
                let svd = sorted_svd(&shifted(&a, l))?;
                pairs.push((l, svd.right[svd.right.len() - 1].clone()));
            }
        } else {
            for i in 0..space.multiplicity {
                let v = space.basis[i.min(space.basis.len() - 1)].clone();
                pairs.push((mu, v));
            }
        }
    }
    let mut out = Vec::with_capacity(pairs.len());
    for (l, v) in pairs {
        let r = (&a * v.na() - v.na() * l).norm();
        if r > eig_tol {
            return Err(Error::Numerical {
                message: format!("eigenpair residual exceeds bound {eig_tol:.1e}"),
                residual: r,
            });
        }
        out.push(EigenPair {
            value: l * sup,
            vector: v,
        });
    }
    Ok(out)
}

pub fn eigen(m: &ComplexMatrix) -> Result<Vec<EigenPair>> {
    let t = crate::Tolerances::default();
    eigen_with(m, t.rank, t.eig)
}

/// Smallest eigenvalue and its unit eigenvector of the Hermitian Gram matrix
/// `G_ij = <b_i, b_j>` of the form restricted to span(`basis`).
pub(crate) fn min_form_direction(basis: &[ComplexVector]) -> (f64, ComplexVector) {
    let k = basis.len();
    let g = DMatrix::from_fn(k, k, |i, j| {
        herm_form_unchecked(basis[j].as_slice(), basis[i].as_slice())
    });
    let eig = g.symmetric_eigen();
    let mut idx = 0;
    for i in 1..k {
        if eig.eigenvalues[i] < eig.eigenvalues[idx] {
            idx = i;
        }
    }
    let coeffs = eig.eigenvectors.column(idx);
    let mut v = ComplexVector::zeros(basis[0].dim());
    for (b, c) in basis.iter().zip(coeffs.iter()) {
        v = v.add(&b.scale(*c));
    }
    let n = v.norm();
    (eig.eigenvalues[idx], v.scale(C64::new(1.0 / n, 0.0)))
}
