//! The equicontinuity region as the complement of the hyperplanes tangent to
//! the sphere at limit points: margins, distortion profiles, cluster checks
//! and slice rendering.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::isometry::{act, orbit_distance, words, GroupElement, GroupSpec, Word};
use crate::limitset::LimitSetCloud;
use crate::linalg::{ComplexVector, C64};
use crate::projective::{
    chordal_distance, incidence_unchecked, polar_hyperplane, project, ProjectivePoint,
};
use crate::random::complex_gaussian_vector;

/// Seed of the sphere directions used by `distortion_profile`.
pub const SPHERE_SEED: u64 = 0x005e_ed0f_d15c;
pub const SPHERE_DIRECTIONS: usize = 16;

/// `z -> min_p |<z, p>|` over the polars of the cloud points.
#[derive(Debug, Clone)]
pub struct MarginField {
    cloud: LimitSetCloud,
    covectors: Vec<ComplexVector>,
}

impl MarginField {
    pub fn new(cloud: LimitSetCloud) -> Result<Self> {
        let covectors = cloud
            .points()
            .iter()
            .map(|p| polar_hyperplane(p).map(|h| h.covector().clone()))
            .collect::<Result<_>>()?;
        Ok(Self { cloud, covectors })
    }

    pub fn cloud(&self) -> &LimitSetCloud {
        &self.cloud
    }
}

pub fn margin(z: &ProjectivePoint, field: &MarginField) -> Result<f64> {
    if field.covectors.is_empty() {
        return Err(Error::EmptyCloud);
    }
    check_dim(field.covectors[0].dim(), z.dim())?;
    Ok(margin_unchecked(z.rep().as_slice(), &field.covectors))
}

fn margin_unchecked(z: &[C64], covectors: &[ComplexVector]) -> f64 {
    covectors
        .iter()
        .map(|c| incidence_unchecked(z, c.as_slice()))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointVerdict {
    InEq,
    OnC,
    Undetermined,
}

impl PointVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            PointVerdict::InEq => "in_eq",
            PointVerdict::OnC => "on_c",
            PointVerdict::Undetermined => "undetermined",
        }
    }
}

/// `InEq` at margin `>= 2 eps`, `OnC` at margin `<= eps`. An empty cloud
/// means the whole space is in the equicontinuity region.
pub fn classify_point(z: &ProjectivePoint, field: &MarginField, eps: f64) -> Result<PointVerdict> {
    if field.covectors.is_empty() {
        return Ok(PointVerdict::InEq);
    }
    let m = margin(z, field)?;
    Ok(if m >= 2.0 * eps {
        PointVerdict::InEq
    } else if m <= eps {
        PointVerdict::OnC
    } else {
        PointVerdict::Undetermined
    })
}

/// Unit vectors Euclidean-orthogonal to `z`, drawn from a fixed seed.
pub fn sphere_directions(z: &ProjectivePoint, count: usize, seed: u64) -> Vec<ComplexVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = z.rep();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = complex_gaussian_vector(&mut rng, u.dim());
        let t = v.sub(&u.scale(v.inner_euclid(u)));
        let norm = t.norm();
        if norm > 1e-8 {
            out.push(t.scale(C64::new(1.0 / norm, 0.0)));
        }
    }
    out
}

/// Points at chordal distance exactly `delta` from `z` along `dirs`.
pub fn sphere_sample(
    z: &ProjectivePoint,
    dirs: &[ComplexVector],
    delta: f64,
) -> Result<Vec<ProjectivePoint>> {
    let cos = (1.0 - delta * delta).max(0.0).sqrt();
    dirs.iter()
        .map(|t| {
            project(
                &z.rep()
                    .scale(C64::new(cos, 0.0))
                    .add(&t.scale(C64::new(delta, 0.0))),
            )
        })
        .collect()
}

fn diameter(points: &[ProjectivePoint]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max(chordal_distance(a, b));
        }
    }
    d
}

#[derive(Debug, Clone)]
pub struct DistortionRow {
    pub word: Word,
    pub delta: f64,
    /// `diam(g S) / diam(S)` for the sampled chordal sphere `S`.
    pub ratio: f64,
}

pub fn distortion_profile(
    z: &ProjectivePoint,
    spec: &GroupSpec,
    depth: usize,
    deltas: &[f64],
) -> Result<Vec<DistortionRow>> {
    check_dim(spec.dim(), z.dim())?;
    if deltas.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return Err(Error::Argument("deltas must lie in (0, 1)".into()));
    }
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Argument("deltas must be decreasing".into()));
    }
    let dirs = sphere_directions(z, SPHERE_DIRECTIONS, SPHERE_SEED);
    let samples: Vec<(f64, Vec<ProjectivePoint>, f64)> = deltas
        .iter()
        .map(|&d| {
            let s = sphere_sample(z, &dirs, d)?;
            let diam = diameter(&s);
            Ok((d, s, diam))
        })
        .collect::<Result<_>>()?;
    let elements = if depth == 0 {
        vec![spec.identity()]
    } else {
        words(spec, depth)
    };
    let rows: Vec<Vec<DistortionRow>> = elements
        .par_iter()
        .map(|g| {
            samples
                .iter()
                .map(|(delta, s, diam)| {
                    let image: Vec<ProjectivePoint> =
                        s.iter().map(|p| act(g, p)).collect::<Result<_>>()?;
                    Ok(DistortionRow {
                        word: g.word().clone(),
                        delta: *delta,
                        ratio: diameter(&image) / diam,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone)]
pub struct ClusterReport {
    /// Images counted as escaped.
    pub escaping: usize,
    /// Largest chordal distance from an escaped image to the cloud.
    pub max_escape_distance: Option<f64>,
    /// Words with `g K` meeting `K` at the intersection radius.
    pub returning_words: Vec<Word>,
    /// Distinct group elements among the returning words.
    pub returning_elements: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterOptions {
    pub eps: f64,
    /// Bergman escape threshold.
    pub r_esc: f64,
    /// Chordal radius of the `g K ∩ K` test.
    pub radius: f64,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            r_esc: 10.0,
            radius: 0.1,
        }
    }
}

/// Orbit images of a compact sample of the equicontinuity region: escaped
/// images should cluster at the cloud, and only finitely many words should
/// bring the sample back to itself.
pub fn cluster_check(
    sample: &[ProjectivePoint],
    spec: &GroupSpec,
    depth: usize,
    field: &MarginField,
    opts: &ClusterOptions,
) -> Result<ClusterReport> {
    for k in sample {
        check_dim(spec.dim(), k.dim())?;
        if classify_point(k, field, opts.eps)? != PointVerdict::InEq {
            return Err(Error::Argument(format!(
                "sample point {k} is not in the equicontinuity region"
            )));
        }
    }
    let elements = words(spec, depth);
    let per_word: Vec<(Vec<f64>, bool)> = elements
        .par_iter()
        .map(|g| {
            let images: Vec<ProjectivePoint> =
                sample.iter().map(|k| act(g, k)).collect::<Result<_>>()?;
            let mut escaped = Vec::new();
            for (k, img) in sample.iter().zip(&images) {
                let far = if k.is_interior() {
                    let mut far = true;
                    for k2 in sample.iter().filter(|k2| k2.is_interior()) {
                        far &= orbit_distance(k2.rep(), g, k.rep())? >= opts.r_esc;
                    }
                    far
                } else {
                    g.center_displacement() >= opts.r_esc
                };
                if far {
                    escaped.push(distance_to_cloud(img, field.cloud()));
                }
            }
            let returns = images.iter().any(|img| {
                sample
                    .iter()
                    .any(|k| chordal_distance(img, k) <= opts.radius)
            });
            Ok((escaped, returns))
        })
        .collect::<Result<_>>()?;

    let mut escaping = 0;
    let mut max_escape: Option<f64> = None;
    let mut returning: Vec<&GroupElement> = Vec::new();
    for (g, (esc, ret)) in elements.iter().zip(&per_word) {
        escaping += esc.len();
        for &d in esc {
            max_escape = Some(max_escape.map_or(d, |m: f64| m.max(d)));
        }
        if *ret {
            returning.push(g);
        }
    }
    let mut distinct: Vec<&GroupElement> = Vec::new();
    for g in &returning {
        if !distinct
            .iter()
            .any(|h| h.lift().max_abs_diff(g.lift()) <= g.tolerances().fix)
        {
            distinct.push(g);
        }
    }
    Ok(ClusterReport {
        escaping,
        max_escape_distance: max_escape,
        returning_words: returning.iter().map(|g| g.word().clone()).collect(),
        returning_elements: distinct.len(),
    })
}

fn distance_to_cloud(p: &ProjectivePoint, cloud: &LimitSetCloud) -> f64 {
    cloud
        .points()
        .iter()
        .map(|q| chordal_distance(p, q))
        .fold(f64::INFINITY, f64::min)
}

/// A real two-parameter slice `center + x dir_u + y dir_v`.
#[derive(Debug, Clone)]
pub struct SliceChart {
    pub center: ComplexVector,
    pub dir_u: ComplexVector,
    pub dir_v: ComplexVector,
    /// `(x_min, x_max, y_min, y_max)`.
    pub window: (f64, f64, f64, f64),
    /// `(width, height)`.
    pub resolution: (usize, usize),
}

impl SliceChart {
    fn validate(&self) -> Result<()> {
        let d = self.center.dim();
        check_dim(d, self.dir_u.dim())?;
        check_dim(d, self.dir_v.dim())?;
        let (w, h) = self.resolution;
        if w == 0 || h == 0 {
            return Err(Error::Argument(
                "slice resolution must be at least 1x1".into(),
            ));
        }
        let (x0, x1, y0, y1) = self.window;
        if ![x0, x1, y0, y1].iter().all(|v| v.is_finite()) || x1 < x0 || y1 < y0 {
            return Err(Error::Argument("invalid slice window".into()));
        }
        // Gram-Schmidt on (center, dir_u, dir_v).
        let mut basis: Vec<ComplexVector> = Vec::new();
        for v in [&self.center, &self.dir_u, &self.dir_v] {
            let scale = v.norm();
            let mut r = v.clone();
            for b in &basis {
                r = r.sub(&b.scale(r.inner_euclid(b)));
            }
            if scale.is_nan() || scale <= 0.0 || r.norm() <= 1e-12 * scale {
                return Err(Error::Argument(
                    "degenerate slice chart: center and directions are dependent".into(),
                ));
            }
            basis.push(r.scale(C64::new(1.0 / r.norm(), 0.0)));
        }
        Ok(())
    }

    /// Pixel coordinates, inclusive of both window edges; a single pixel
    /// sits at the window midpoint. Rows run from `y_max` down.
    pub fn coords(&self, i: usize, j: usize) -> (f64, f64) {
        let (x0, x1, y0, y1) = self.window;
        let (w, h) = self.resolution;
        let x = if w == 1 {
            0.5 * (x0 + x1)
        } else {
            x0 + (x1 - x0) * i as f64 / (w - 1) as f64
        };
        let y = if h == 1 {
            0.5 * (y0 + y1)
        } else {
            y1 - (y1 - y0) * j as f64 / (h - 1) as f64
        };
        (x, y)
    }

    pub fn point(&self, x: f64, y: f64) -> Result<ProjectivePoint> {
        let v = self
            .center
            .add(&self.dir_u.scale(C64::new(x, 0.0)))
            .add(&self.dir_v.scale(C64::new(y, 0.0)));
        project(&v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrayMapping {
    pub m_ref: f64,
    pub gamma: f64,
}

impl Default for GrayMapping {
    fn default() -> Self {
        Self {
            m_ref: 0.5,
            gamma: 1.0,
        }
    }
}

impl GrayMapping {
    pub fn value(&self, margin: f64) -> u8 {
        (255.0 * (margin / self.m_ref).min(1.0).powf(self.gamma)).round() as u8
    }
}

/// 8-bit grayscale raster, row-major, top row first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.pixels[j * self.width + i]
    }
}

pub fn render_slice(
    chart: &SliceChart,
    field: &MarginField,
    mapping: &GrayMapping,
) -> Result<GrayImage> {
    chart.validate()?;
    if field.covectors.is_empty() {
        return Err(Error::EmptyCloud);
    }
    check_dim(field.covectors[0].dim(), chart.center.dim())?;
    if [mapping.m_ref, mapping.gamma]
        .iter()
        .any(|v| v.is_nan() || *v <= 0.0)
    {
        return Err(Error::Argument("m_ref and gamma must be positive".into()));
    }
    let (w, h) = chart.resolution;
    let mut pixels = vec![0u8; w * h];
    pixels
        .par_chunks_mut(w)
        .enumerate()
        .try_for_each(|(j, row)| -> Result<()> {
            for (i, px) in row.iter_mut().enumerate() {
                let (x, y) = chart.coords(i, j);
                let z = chart.point(x, y)?;
                *px = mapping.value(margin_unchecked(z.rep().as_slice(), &field.covectors));
            }
            Ok(())
        })?;
    Ok(GrayImage {
        width: w,
        height: h,
        pixels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isometry::make_element;
    use crate::limitset::{fixed_point_seed, Method, Provenance};
    use crate::linalg::ComplexMatrix;
    use crate::projective::point;
    use crate::Tolerances;

    fn hyperbolic(t: f64) -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            vec![t.cosh(), t.sinh(), 0.0],
            vec![t.sinh(), t.cosh(), 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap()
    }

    fn group(m: ComplexMatrix) -> GroupSpec {
        let tol = Tolerances::default();
        GroupSpec::new(2, vec![("A".into(), make_element(&m, &tol).unwrap())], tol).unwrap()
    }

    fn cyclic() -> GroupSpec {
        group(hyperbolic(2f64.ln()))
    }

    fn finite() -> GroupSpec {
        group(ComplexMatrix::diag(&[
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(1.0, 0.0),
        ]))
    }

    fn field_of(spec: &GroupSpec) -> MarginField {
        MarginField::new(fixed_point_seed(spec, 1, 1e-6).unwrap()).unwrap()
    }

    fn o() -> ProjectivePoint {
        point(&[1.0, 0.0, 0.0]).unwrap()
    }

    fn e2() -> ProjectivePoint {
        point(&[0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn margin_examples() {
        let f = field_of(&cyclic());
        assert!((margin(&o(), &f).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(margin(&e2(), &f).unwrap(), 0.0);
        for p in f.cloud().points() {
            assert!(margin(p, &f).unwrap() < 1e-15);
        }
        let empty = MarginField::new(fixed_point_seed(&finite(), 2, 1e-6).unwrap()).unwrap();
        assert_eq!(margin(&o(), &empty), Err(Error::EmptyCloud));
        assert_eq!(
            classify_point(&e2(), &empty, 1e-3).unwrap(),
            PointVerdict::InEq
        );
    }

    #[test]
    fn classify_examples() {
        let f = field_of(&cyclic());
        assert_eq!(classify_point(&o(), &f, 1e-3).unwrap(), PointVerdict::InEq);
        assert_eq!(classify_point(&e2(), &f, 1e-3).unwrap(), PointVerdict::OnC);
        let z = point(&[0.0015 * 2f64.sqrt(), 0.0, 1.0]).unwrap();
        let m = margin(&z, &f).unwrap();
        assert!(m > 1e-3 && m < 2e-3, "{m}");
        assert_eq!(
            classify_point(&z, &f, 1e-3).unwrap(),
            PointVerdict::Undetermined
        );
    }

    #[test]
    fn sphere_sample_is_at_delta() {
        let z = point(&[1.0, 0.2, -0.4]).unwrap();
        let dirs = sphere_directions(&z, 16, SPHERE_SEED);
        for p in sphere_sample(&z, &dirs, 1e-4).unwrap() {
            assert!((chordal_distance(&z, &p) - 1e-4).abs() < 1e-12);
        }
    }

    #[test]
    fn distortion_examples() {
        let spec = cyclic();
        let deltas = [1e-3, 1e-4, 1e-5];
        let rows = distortion_profile(&o(), &spec, 12, &deltas).unwrap();
        assert_eq!(rows.len(), 25 * 3);
        assert!(rows.iter().all(|r| r.ratio <= 10.0));

        let rows = distortion_profile(&e2(), &spec, 12, &[1e-5]).unwrap();
        let by_power = |k: usize| {
            rows.iter()
                .find(|r| r.word.len() == k && r.word.letters().iter().all(|l| !l.inverse))
                .unwrap()
                .ratio
        };
        for k in 1..12 {
            assert!(by_power(k + 1) >= 1.9 * by_power(k), "k={k}");
        }

        let rows =
            distortion_profile(&point(&[0.3, 2.0, 1.0]).unwrap(), &spec, 0, &deltas).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.ratio == 1.0));
    }

    #[test]
    fn cluster_examples() {
        let spec = cyclic();
        let f = field_of(&spec);
        let r = cluster_check(&[o()], &spec, 20, &f, &ClusterOptions::default()).unwrap();
        assert!(r.escaping > 0);
        assert!(r.max_escape_distance.unwrap() <= 1e-4);
        assert_eq!(r.returning_words, vec![Word::empty()]);

        let fin = finite();
        let empty = MarginField::new(fixed_point_seed(&fin, 2, 1e-6).unwrap()).unwrap();
        let r = cluster_check(&[o()], &fin, 6, &empty, &ClusterOptions::default()).unwrap();
        assert_eq!(r.escaping, 0);
        assert!(r.max_escape_distance.is_none());
        assert_eq!(r.returning_elements, 4);

        assert!(matches!(
            cluster_check(&[o(), e2()], &spec, 4, &f, &ClusterOptions::default()),
            Err(Error::Argument(_))
        ));
    }

    fn chart(w: usize, h: usize) -> SliceChart {
        SliceChart {
            center: ComplexVector::from_real(&[1.0, 0.0, 0.0]),
            dir_u: ComplexVector::from_real(&[0.0, 1.0, 0.0]),
            dir_v: ComplexVector::from_real(&[0.0, 0.0, 1.0]),
            window: (-2.0, 2.0, -2.0, 2.0),
            resolution: (w, h),
        }
    }

    #[test]
    fn render_examples() {
        let f = field_of(&cyclic());
        let map = GrayMapping::default();
        let img = render_slice(&chart(401, 401), &f, &map).unwrap();
        assert_eq!(img.pixels.len(), 401 * 401);
        assert_eq!(chart(401, 401).coords(300, 200), (1.0, 0.0));
        assert_eq!(chart(401, 401).coords(100, 200), (-1.0, 0.0));
        assert_eq!(img.get(300, 200), 0);
        assert_eq!(img.get(100, 200), 0);

        let one = render_slice(&chart(1, 1), &f, &map).unwrap();
        let m = margin(&o(), &f).unwrap();
        assert_eq!(one.pixels, vec![map.value(m)]);
        assert_eq!(one.pixels, vec![255]);

        let render_in = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| render_slice(&chart(64, 48), &f, &map).unwrap())
        };
        assert_eq!(render_in(2), render_in(8));
    }

    #[test]
    fn render_rejects_degenerate_chart() {
        let f = field_of(&cyclic());
        let mut c = chart(4, 4);
        c.dir_v = ComplexVector::from_real(&[0.0, 2.0, 0.0]);
        assert!(matches!(
            render_slice(&c, &f, &GrayMapping::default()),
            Err(Error::Argument(_))
        ));
        let empty = LimitSetCloud::from_points(
            vec![],
            1e-6,
            Provenance {
                method: Method::Orbit,
                depth: 1,
                base: None,
            },
        )
        .unwrap();
        let ef = MarginField::new(empty).unwrap();
        assert_eq!(
            render_slice(&chart(4, 4), &ef, &GrayMapping::default()),
            Err(Error::EmptyCloud)
        );
    }
}
