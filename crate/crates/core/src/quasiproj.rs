//! Quasi-projective maps and sup-norm normalized limits of element sequences.

use crate::error::{check_dim, Error, Result};
use crate::isometry::GroupElement;
use crate::linalg::{
    rank_split, residual_off_span, sup_entry_norm, ComplexMatrix, ComplexVector, C64,
};
use crate::projective::{chordal_distance, project, project_with, Hyperplane, ProjectivePoint};

/// The projectivization of a nonzero, possibly singular linear map.
#[derive(Debug, Clone)]
pub struct QuasiProjectiveMap {
    lift: ComplexMatrix,
    kernel: Vec<ComplexVector>,
    image: Vec<ComplexVector>,
    rank_tol: f64,
    ill_conditioned: bool,
}

impl QuasiProjectiveMap {
    /// Lift with sup-entry norm 1, phase canonical.
    pub fn lift(&self) -> &ComplexMatrix {
        &self.lift
    }

    pub fn kernel(&self) -> &[ComplexVector] {
        &self.kernel
    }

    pub fn image(&self) -> &[ComplexVector] {
        &self.image
    }

    pub fn dim(&self) -> usize {
        self.lift.dim()
    }

    /// Projective dimension of the kernel; `-1` when it is empty.
    pub fn proj_ker_dim(&self) -> i64 {
        self.kernel.len() as i64 - 1
    }

    pub fn proj_im_dim(&self) -> i64 {
        self.image.len() as i64 - 1
    }

    pub fn rank_tolerance(&self) -> f64 {
        self.rank_tol
    }

    /// Some singular value sits within a factor 10 of the rank threshold.
    pub fn ill_conditioned(&self) -> bool {
        self.ill_conditioned
    }

    /// The image as a point, when the map has rank one.
    pub fn image_point(&self, tau_null: f64) -> Option<ProjectivePoint> {
        match self.image.as_slice() {
            [u] => project_with(u, tau_null).ok(),
            _ => None,
        }
    }

    /// Covector of the kernel hyperplane, when the map has rank one:
    /// `u* L` for the unit image vector `u`.
    fn kernel_covector(&self) -> Option<ComplexVector> {
        let [u] = self.image.as_slice() else {
            return None;
        };
        let d = self.dim();
        Some(ComplexVector::new(
            (0..d)
                .map(|j| (0..d).map(|i| u[i].conj() * self.lift.get(i, j)).sum())
                .collect(),
        ))
    }
}

pub fn qp_from_matrix(m: &ComplexMatrix, rank_tol: f64) -> Result<QuasiProjectiveMap> {
    let sup = sup_entry_norm(m)?;
    let lift = m.scale(C64::new(1.0 / sup, 0.0)).phase_canonical();
    let split = rank_split(&lift, rank_tol)?;
    Ok(QuasiProjectiveMap {
        lift,
        kernel: split.kernel,
        image: split.image,
        rank_tol,
        ill_conditioned: split.ill_conditioned,
    })
}

/// `[M v]`, defined off the projectivized kernel.
pub fn qp_apply(q: &QuasiProjectiveMap, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    check_dim(q.dim(), p.dim())?;
    if !q.kernel.is_empty() && residual_off_span(p.rep(), &q.kernel) <= q.rank_tol {
        return Err(Error::UndefinedAtKernel(format!("{p}")));
    }
    project(&q.lift.mul_vec(p.rep()))
}

/// Image point and kernel tangency of a rank-one limit whose image is null
/// and whose kernel is the polar of a null point.
#[derive(Debug, Clone)]
pub struct BoundaryForm {
    pub image_point: ProjectivePoint,
    pub kernel_tangency: ProjectivePoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    /// Cauchy tolerance on entrywise increments of normalized lifts.
    pub tol: f64,
    pub max_terms: usize,
    /// Consecutive sub-tolerance increments required.
    pub window: usize,
    /// Maximal polynomial degree of the extrapolation in `1/m`; 0 disables it.
    pub extrapolation_order: usize,
    pub rank_tol: f64,
    /// Null band for the boundary-form test.
    pub shape_tol: f64,
    /// On divergence, retry on a greedy subsequence clustering at the last term.
    pub subsequence_retry: bool,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_terms: 200,
            window: 3,
            extrapolation_order: 6,
            rank_tol: 1e-9,
            shape_tol: 1e-9,
            subsequence_retry: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LimitReport {
    pub limit: Option<QuasiProjectiveMap>,
    pub converged: bool,
    pub terms_used: usize,
    /// Last Cauchy increment of the criterion that decided the outcome.
    pub residual: f64,
    /// Increments of consecutive normalized lifts.
    pub residual_trace: Vec<f64>,
    /// The limit came from the extrapolated estimates.
    pub extrapolated: bool,
    /// Indices (0-based) of the subsequence used by the retry mode.
    pub subsequence: Option<Vec<usize>>,
    pub boundary_form: Option<BoundaryForm>,
}

fn normalize(m: &ComplexMatrix) -> ComplexMatrix {
    let sup = sup_entry_norm(m).expect("checked nonzero");
    m.scale(C64::new(1.0 / sup, 0.0)).phase_canonical()
}

/// Polynomial extrapolation to `h = 0` in `h = 1/m` through nodes spread
/// over `[m/2, m]`.
fn extrapolate(terms: &[ComplexMatrix], order: usize) -> Option<ComplexMatrix> {
    let m = terms.len();
    if order == 0 || m < 3 {
        return None;
    }
    let step = (m / (2 * order)).max(1);
    let k = order.min((m - 1) / step);
    let nodes: Vec<usize> = (0..=k).map(|j| m - j * step).collect();
    let h: Vec<f64> = nodes.iter().map(|&i| 1.0 / i as f64).collect();
    let dim = terms[0].dim();
    let mut acc = ComplexMatrix::from_fn(dim, |_, _| C64::new(0.0, 0.0));
    for (j, &node) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (l, &hl) in h.iter().enumerate() {
            if l != j {
                w *= hl / (hl - h[j]);
            }
        }
        acc = ComplexMatrix::from_fn(dim, |r, c| acc.get(r, c) + terms[node - 1].get(r, c) * w);
    }
    sup_entry_norm(&acc).ok()?;
    Some(normalize(&acc))
}

struct Cauchy {
    prev: Option<ComplexMatrix>,
    streak: usize,
    last: f64,
}

impl Cauchy {
    fn new() -> Self {
        Self {
            prev: None,
            streak: 0,
            last: f64::INFINITY,
        }
    }

    fn push(&mut self, m: ComplexMatrix, tol: f64) -> Option<f64> {
        let inc = self.prev.as_ref().map(|p| p.max_abs_diff(&m));
        if let Some(inc) = inc {
            self.last = inc;
            if inc <= tol {
                self.streak += 1;
            } else {
                self.streak = 0;
            }
        }
        self.prev = Some(m);
        inc
    }
}

/// Limit of the sup-norm normalized, phase-canonical lifts of a stream.
///
/// Convergence is declared after `window` consecutive increments below
/// `tol`, either of the normalized lifts themselves or of their polynomial
/// extrapolation in `1/m`. The latter catches the `O(1/m)` convergence of
/// parabolic powers; the raw test catches geometric convergence, which the
/// extrapolation amplifies instead of removing.
pub fn qp_limit<I>(stream: I, opts: &LimitOptions) -> Result<LimitReport>
where
    I: IntoIterator<Item = GroupElement>,
{
    qp_limit_lifts(stream.into_iter().map(|g| g.lift().clone()), opts)
}

/// `qp_limit` over raw nonzero lifts, each taken up to a nonzero scalar.
pub fn qp_limit_lifts<I>(stream: I, opts: &LimitOptions) -> Result<LimitReport>
where
    I: IntoIterator<Item = ComplexMatrix>,
{
    if opts.tol.is_nan() || opts.tol <= 0.0 || opts.window == 0 {
        return Err(Error::Argument(
            "qp_limit needs tol > 0 and window >= 1".into(),
        ));
    }
    let mut terms: Vec<ComplexMatrix> = Vec::new();
    let mut trace = Vec::new();
    let mut raw = Cauchy::new();
    let mut ext = Cauchy::new();
    let mut found: Option<(ComplexMatrix, f64, bool)> = None;

    for m in stream.into_iter().take(opts.max_terms) {
        sup_entry_norm(&m)?;
        let n = normalize(&m);
        terms.push(n.clone());
        if let Some(inc) = raw.push(n.clone(), opts.tol) {
            trace.push(inc);
        }
        if raw.streak >= opts.window {
            found = Some((n, raw.last, false));
            break;
        }
        if let Some(e) = extrapolate(&terms, opts.extrapolation_order) {
            ext.push(e.clone(), opts.tol);
            if ext.streak >= opts.window {
                found = Some((e, ext.last, true));
                break;
            }
        }
    }

    let terms_used = terms.len();
    if let Some((m, residual, extrapolated)) = found {
        let limit = qp_from_matrix(&m, opts.rank_tol)?;
        let boundary_form = boundary_form(&limit, opts.shape_tol);
        return Ok(LimitReport {
            limit: Some(limit),
            converged: true,
            terms_used,
            residual,
            residual_trace: trace,
            extrapolated,
            subsequence: None,
            boundary_form,
        });
    }

    if opts.subsequence_retry && terms.len() > opts.window {
        let anchor = terms.last().expect("nonempty");
        let mut picked: Vec<usize> = (0..terms.len())
            .filter(|&i| terms[i].max_abs_diff(anchor) < opts.tol)
            .collect();
        if picked.len() > opts.window {
            let limit = qp_from_matrix(anchor, opts.rank_tol)?;
            let boundary_form = boundary_form(&limit, opts.shape_tol);
            let residual = picked
                .windows(2)
                .map(|w| terms[w[0]].max_abs_diff(&terms[w[1]]))
                .fold(0.0, f64::max);
            picked.shrink_to_fit();
            return Ok(LimitReport {
                limit: Some(limit),
                converged: true,
                terms_used,
                residual,
                residual_trace: trace,
                extrapolated: false,
                subsequence: Some(picked),
                boundary_form,
            });
        }
    }

    Ok(LimitReport {
        limit: None,
        converged: false,
        terms_used,
        residual: raw.last.min(ext.last),
        residual_trace: trace,
        extrapolated: false,
        subsequence: None,
        boundary_form: None,
    })
}

fn boundary_form(q: &QuasiProjectiveMap, shape_tol: f64) -> Option<BoundaryForm> {
    let image_point = q.image_point(shape_tol)?;
    if !image_point.is_boundary() {
        return None;
    }
    let kernel_tangency = Hyperplane::from_covector(&q.kernel_covector()?)
        .ok()?
        .detect_tangency(shape_tol)?;
    Some(BoundaryForm {
        image_point,
        kernel_tangency,
    })
}

/// Chordal distances pairing each image point with the other limit's kernel
/// tangency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityResidual {
    /// `d(backward.image_point, forward.kernel_tangency)`.
    pub d1: f64,
    /// `d(forward.image_point, backward.kernel_tangency)`.
    pub d2: f64,
}

pub fn duality_check(forward: &LimitReport, backward: &LimitReport) -> Result<DualityResidual> {
    let (Some(f), Some(b)) = (&forward.boundary_form, &backward.boundary_form) else {
        return Err(Error::Precondition(
            "duality needs two converged limits with a boundary form".into(),
        ));
    };
    Ok(DualityResidual {
        d1: chordal_distance(&b.image_point, &f.kernel_tangency),
        d2: chordal_distance(&f.image_point, &b.kernel_tangency),
    })
}

/// The kernel hyperplane of a rank-one limit, off which the generating
/// sequence is equicontinuous.
pub fn eq_of_sequence(q: &QuasiProjectiveMap, tau_null: f64) -> Result<Hyperplane> {
    let n = q.dim() as i64 - 1;
    if q.proj_ker_dim() != n - 1 {
        return Err(Error::Precondition(format!(
            "kernel is not a hyperplane (projective dimension {})",
            q.proj_ker_dim()
        )));
    }
    let covector = q.kernel_covector().expect("rank one");
    Ok(Hyperplane::from_covector(&covector)?.with_tangency(tau_null))
}
