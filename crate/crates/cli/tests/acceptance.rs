//! Acceptance suite: one line per criterion, nonzero exit on any failure.
//!
//! Run with `cargo test -p cheq-cli --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use cheq_core::eqregion::{
    cluster_check, distortion_profile, margin, sphere_directions, ClusterOptions, MarginField,
    SPHERE_DIRECTIONS, SPHERE_SEED,
};
use cheq_core::isometry::{
    act, classify, make_element, parse_word, ElementKind, GroupElement, GroupSpec, Word,
};
use cheq_core::limitset::{hausdorff, orbit_accumulate, DEFAULT_GRID_EPS, DEFAULT_R_ACC};
use cheq_core::linalg::{ComplexMatrix, ComplexVector, C64};
use cheq_core::projective::{chordal_distance, point, ProjectivePoint};
use cheq_core::quasiproj::{duality_check, qp_from_matrix, qp_limit, LimitOptions, LimitReport};
use cheq_core::random::{
    complex_gaussian_vector, random_interior_point, random_matrix_of_rank, random_unitary_1n,
    unit_scalar,
};
use cheq_core::Tolerances;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `-u0 conj(v0) + sum_j uj conj(vj)`.
fn form(u: &[C64], v: &[C64]) -> C64 {
    let mut s = -u[0] * v[0].conj();
    for j in 1..u.len() {
        s += u[j] * v[j].conj();
    }
    s
}

fn norm(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn hyperbolic(t: f64, axis: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(3, |i, j| {
        let v = match (i, j) {
            (0, 0) => t.cosh(),
            (0, k) | (k, 0) if k == axis => t.sinh(),
            (k, l) if k == l && k == axis => t.cosh(),
            (k, l) if k == l => 1.0,
            _ => 0.0,
        };
        c(v, 0.0)
    })
}

fn parabolic() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[
        vec![c(1.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)],
        vec![c(0.0, 1.0), c(1.0, -1.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
    ])
    .unwrap()
}

fn element(m: &ComplexMatrix) -> GroupElement {
    make_element(m, &Tolerances::default()).unwrap()
}

fn group(mats: &[(&str, ComplexMatrix)]) -> GroupSpec {
    let gens = mats
        .iter()
        .map(|(n, m)| (n.to_string(), element(m)))
        .collect();
    GroupSpec::new(2, gens, Tolerances::default()).unwrap()
}

fn cyclic() -> GroupSpec {
    group(&[("A", hyperbolic(2f64.ln(), 1))])
}

fn free() -> GroupSpec {
    group(&[
        ("A", hyperbolic(2f64.ln(), 1)),
        ("B", hyperbolic(4f64.ln(), 2)),
    ])
}

fn o() -> ProjectivePoint {
    point(&[1.0, 0.0, 0.0]).unwrap()
}

fn pt(coords: &[f64]) -> ProjectivePoint {
    point(coords).unwrap()
}

fn criterion_1() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=4);
        let raw = random_unitary_1n(&mut rng, n, 0.9).scale(unit_scalar(&mut rng) * 3.7);
        let g = element(&raw);
        let m = g.lift();
        let e0 = ComplexVector::basis(n + 1, 0);
        let ge0 = m.mul_vec(&e0);
        let s = -form(ge0.as_slice(), ge0.as_slice()).re;
        for _ in 0..100 {
            let u = complex_gaussian_vector(&mut rng, n + 1);
            let v = complex_gaussian_vector(&mut rng, n + 1);
            let gu = m.mul_vec(&u);
            let gv = m.mul_vec(&v);
            let lhs = form(gu.as_slice(), gv.as_slice());
            let rhs = form(u.as_slice(), v.as_slice()) * s;
            let err = (lhs - rhs).norm() / (norm(u.as_slice()) * norm(v.as_slice()));
            worst = worst.max(err);
        }
    }
    let msg =
        format!("max relative form error {worst:.2e} over 100 elements x 100 pairs (bound 1e-10)");
    if worst <= 1e-10 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let models = [
        (hyperbolic(2f64.ln(), 1), ElementKind::Loxodromic),
        (parabolic(), ElementKind::Parabolic),
        (
            ComplexMatrix::diag(&[c(1.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)]),
            ElementKind::Elliptic,
        ),
    ];
    let mut correct = 0;
    let mut misses = Vec::new();
    for (m, kind) in &models {
        let g = element(m);
        for _ in 0..100 {
            let h = element(&random_unitary_1n(&mut rng, 2, 0.9));
            let conj = element(h.compose(&g).compose(&h.inverse()).lift());
            match classify(&conj) {
                Ok(cl) if cl.kind == *kind => correct += 1,
                Ok(cl) => misses.push(format!("{kind:?} -> {:?}", cl.kind)),
                Err(e) => misses.push(format!("{kind:?} -> {e}")),
            }
        }
    }
    let msg = format!("{correct}/300 conjugates classified correctly");
    if correct == 300 {
        Ok(msg)
    } else {
        Err(format!(
            "{msg}; first misses: {:?}",
            &misses[..misses.len().min(3)]
        ))
    }
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0;
    let mut bad = Vec::new();
    for n in 1..=4usize {
        for rank in 1..=n + 1 {
            for _ in 0..1000 {
                let m = random_matrix_of_rank(&mut rng, n + 1, rank);
                let q = qp_from_matrix(&m, 1e-9).map_err(|e| e.to_string())?;
                total += 1;
                let sum = q.proj_ker_dim() + q.proj_im_dim();
                if sum != n as i64 - 1 || q.proj_im_dim() != rank as i64 - 1 {
                    bad.push((n, rank, q.proj_ker_dim(), q.proj_im_dim()));
                }
            }
        }
    }
    let msg = format!(
        "{}/{total} matrices satisfy dim Ker + dim Im = n - 1 with the constructed rank",
        total - bad.len()
    );
    if bad.is_empty() {
        Ok(msg)
    } else {
        Err(format!(
            "{msg}; first failures {:?}",
            &bad[..bad.len().min(3)]
        ))
    }
}

fn powers(g: &GroupElement, count: usize) -> Vec<GroupElement> {
    let mut out = vec![g.clone()];
    while out.len() < count {
        out.push(g.compose(out.last().unwrap()));
    }
    out
}

fn limit_of(m: &ComplexMatrix, count: usize) -> LimitReport {
    let opts = LimitOptions {
        max_terms: count,
        ..LimitOptions::default()
    };
    qp_limit(powers(&element(m), count), &opts).unwrap()
}

/// `max_ij |a_ij - phase b_ij|` for the least-squares phase, after sup
/// normalization of both.
fn projective_gap(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let sup = |m: &ComplexMatrix| {
        m.rows()
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    };
    let a = a.scale(c(1.0 / sup(a), 0.0));
    let b = b.scale(c(1.0 / sup(b), 0.0));
    let mut inner = c(0.0, 0.0);
    for (ra, rb) in a.rows().iter().zip(b.rows()) {
        for (x, y) in ra.iter().zip(rb) {
            inner += x * y.conj();
        }
    }
    let phase = inner / inner.norm();
    a.max_abs_diff(&b.scale(phase))
}

fn criterion_4() -> Check {
    let t = 2f64.ln();
    let lox = limit_of(&hyperbolic(t, 1), 40);
    let Some(bf) = lox.boundary_form.as_ref().filter(|_| lox.converged) else {
        return Err(format!(
            "loxodromic stream did not converge: {:?}",
            lox.residual_trace
        ));
    };
    // A(mt) / cosh(mt) -> [[1, 1, 0], [1, 1, 0], [0, 0, 0]].
    let oracle = ComplexMatrix::from_real_rows(&[
        vec![1.0, 1.0, 0.0],
        vec![1.0, 1.0, 0.0],
        vec![0.0, 0.0, 0.0],
    ])
    .unwrap();
    let lift_gap = projective_gap(lox.limit.as_ref().unwrap().lift(), &oracle);
    let d_im = chordal_distance(&bf.image_point, &pt(&[1.0, 1.0, 0.0]));
    let d_ker = chordal_distance(&bf.kernel_tangency, &pt(&[1.0, -1.0, 0.0]));

    let par = limit_of(&parabolic(), 60);
    let Some(pf) = par.boundary_form.as_ref().filter(|_| par.converged) else {
        return Err(format!(
            "parabolic stream did not converge: {:?}",
            par.residual_trace
        ));
    };
    // (I + m(P - I)) / m -> P - I.
    let oracle_p = parabolic().sub(&ComplexMatrix::identity(3));
    let p_gap = projective_gap(par.limit.as_ref().unwrap().lift(), &oracle_p);
    let target = pt(&[1.0, 1.0, 0.0]);
    let p_im = chordal_distance(&pf.image_point, &target);
    let p_ker = chordal_distance(&pf.kernel_tangency, &target);

    let msg = format!(
        "A^m: {} terms, residual {:.2e}, image {d_im:.2e}, kernel tangency {d_ker:.2e}, lift vs closed-form limit {lift_gap:.2e}; \
         P^m: {} terms, image {p_im:.2e}, kernel tangency {p_ker:.2e}, lift vs P - I {p_gap:.2e}",
        lox.terms_used, lox.residual, par.terms_used
    );
    let ok = lox.residual <= 1e-9
        && d_im <= 1e-9
        && d_ker <= 1e-9
        && lift_gap <= 1e-9
        && lox.terms_used <= 40
        && p_im <= 1e-8
        && p_ker <= 1e-8
        && p_gap <= 1e-8
        && par.terms_used <= 60;
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_5() -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, m, count) in [("A", hyperbolic(2f64.ln(), 1), 40), ("P", parabolic(), 60)] {
        let inv = element(&m).inverse();
        let fwd = limit_of(&m, count);
        let bwd = limit_of(inv.lift(), count);
        let d = duality_check(&fwd, &bwd).map_err(|e| format!("{name}: {e}"))?;
        ok &= d.d1 <= 1e-9 && d.d2 <= 1e-9;
        parts.push(format!("{name}: d1 {:.2e}, d2 {:.2e}", d.d1, d.d2));
    }
    let msg = parts.join("; ");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_6() -> Check {
    let spec = free();
    let t0 = Instant::now();
    let a = spec.evaluate(&parse_word(&spec, "A").unwrap());
    let moved = act(&a, &o()).unwrap();
    let c1 = orbit_accumulate(&spec, &o(), 8, DEFAULT_R_ACC, DEFAULT_GRID_EPS).unwrap();
    let c2 = orbit_accumulate(&spec, &moved, 8, DEFAULT_R_ACC, DEFAULT_GRID_EPS).unwrap();
    let h = hausdorff(&c1, &c2).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let msg = format!(
        "Hausdorff {h:.3e} (bound 1e-3) between {} and {} orbit points, r_acc {DEFAULT_R_ACC}, {secs:.1} s (bound 60 s)",
        c1.len(),
        c2.len()
    );
    if h <= 1e-3 && secs < 60.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_7() -> Check {
    let cyc = cyclic();
    let sizes: Vec<usize> = (10..=20)
        .map(|d| {
            orbit_accumulate(&cyc, &o(), d, DEFAULT_R_ACC, DEFAULT_GRID_EPS)
                .unwrap()
                .len()
        })
        .collect();
    let fr = free();
    let growth: Vec<usize> = [4, 6, 8]
        .iter()
        .map(|&d| {
            orbit_accumulate(&fr, &o(), d, DEFAULT_R_ACC, DEFAULT_GRID_EPS)
                .unwrap()
                .len()
        })
        .collect();
    let msg =
        format!("cyclic sizes (depths 10..20) {sizes:?}; two-generator sizes (4, 6, 8) {growth:?}");
    if sizes.iter().all(|&s| s == 2) && growth[0] < growth[1] && growth[1] < growth[2] {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_8() -> Check {
    let spec = cyclic();
    let cloud = orbit_accumulate(&spec, &o(), 20, DEFAULT_R_ACC, DEFAULT_GRID_EPS).unwrap();
    let field = MarginField::new(cloud).unwrap();
    // |<o, (1, ±1, 0)/sqrt 2>| = 1/sqrt 2.
    let oracle = std::f64::consts::FRAC_1_SQRT_2;
    let m_center = margin(&o(), &field).unwrap();
    let m_pole = margin(&pt(&[0.0, 0.0, 1.0]), &field).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_interior = f64::INFINITY;
    for _ in 0..1000 {
        let z = random_interior_point(&mut rng, 2, 0.999);
        min_interior = min_interior.min(margin(&z, &field).unwrap());
    }
    let msg = format!(
        "margin(o) = {m_center:.10} (|diff| {:.2e}), margin([0:0:1]) = {m_pole:.2e}, min over 1000 interior points {min_interior:.3e}",
        (m_center - oracle).abs()
    );
    if (m_center - oracle).abs() <= 1e-9 && m_pole <= 1e-12 && min_interior > 0.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn power_word(spec: &GroupSpec, m: i64) -> Word {
    parse_word(spec, &format!("A^{m}")).unwrap()
}

/// Distortion ratio predicted by the derivative of `A^m` at `[0:0:1]`: in the
/// chart `z2 = 1` the map is the linear block `[[cosh, sinh], [sinh, cosh]]`.
fn linearized_ratio(m: i64, dirs: &[ComplexVector], delta: f64) -> f64 {
    let t = m as f64 * 2f64.ln();
    let (ch, sh) = (t.cosh(), t.sinh());
    let cos = (1.0 - delta * delta).sqrt();
    let chart: Vec<[C64; 2]> = dirs
        .iter()
        .map(|d| {
            let s = d.as_slice();
            [s[0] * (delta / cos), s[1] * (delta / cos)]
        })
        .collect();
    let image: Vec<[C64; 2]> = chart
        .iter()
        .map(|w| [w[0] * ch + w[1] * sh, w[0] * sh + w[1] * ch])
        .collect();
    let diam = |pts: &[[C64; 2]]| {
        let mut d: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.max(((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()).sqrt());
            }
        }
        d
    };
    diam(&image) / diam(&chart)
}

fn criterion_9() -> Check {
    let spec = cyclic();
    let deltas = [1e-3, 1e-4, 1e-5];
    let center = distortion_profile(&o(), &spec, 12, &deltas).map_err(|e| e.to_string())?;
    let max_center = center.iter().map(|r| r.ratio).fold(0.0, f64::max);

    let pole = pt(&[0.0, 0.0, 1.0]);
    let rows = distortion_profile(&pole, &spec, 12, &[1e-5]).map_err(|e| e.to_string())?;
    let dirs = sphere_directions(&pole, SPHERE_DIRECTIONS, SPHERE_SEED);
    let ratio = |m: i64| {
        let w = power_word(&spec, m);
        rows.iter().find(|r| r.word == w).map(|r| r.ratio).unwrap()
    };
    let mut min_growth = f64::INFINITY;
    let mut oracle_gap: f64 = 0.0;
    for sign in [1i64, -1] {
        for m in 3..=12i64 {
            let r = ratio(sign * m);
            let lin = linearized_ratio(sign * m, &dirs, 1e-5);
            oracle_gap = oracle_gap.max((r - lin).abs() / lin);
            if m >= 4 {
                min_growth = min_growth.min(r / ratio(sign * (m - 1)));
            }
        }
    }
    let msg = format!(
        "max ratio at o {max_center:.3}; min per-power growth at [0:0:1] {min_growth:.4} (bound 1.9); \
         max relative gap to chart linearization {oracle_gap:.2e}"
    );
    if max_center <= 10.0 && min_growth >= 1.9 && oracle_gap <= 1e-2 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn criterion_10() -> Check {
    let spec = cyclic();
    let cloud = orbit_accumulate(&spec, &o(), 20, DEFAULT_R_ACC, DEFAULT_GRID_EPS).unwrap();
    let field = MarginField::new(cloud).unwrap();
    let opts = ClusterOptions::default();
    let rep = cluster_check(&[o()], &spec, 20, &field, &opts).map_err(|e| e.to_string())?;
    // d(o, A^m o) = 2|m| ln 2 reaches r_esc = 10 from |m| = 8 on.
    let expected_escaping = (-20..=20i64)
        .filter(|m| 2.0 * m.unsigned_abs() as f64 * 2f64.ln() >= opts.r_esc)
        .count();
    let max_esc = rep.max_escape_distance.unwrap_or(f64::INFINITY);
    let identity_only = rep.returning_words.len() == 1 && rep.returning_words[0].is_empty();
    let msg = format!(
        "{} escaping images (expected {expected_escaping}), max distance to cloud {max_esc:.2e} (bound 1e-4), returning words {:?}",
        rep.escaping,
        rep.returning_words
            .iter()
            .map(|w| spec.display_word(w))
            .collect::<Vec<_>>()
    );
    if rep.escaping == expected_escaping && max_esc <= 1e-4 && identity_only {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../specs")
        .join(format!("{name}.json"))
}

fn cheq(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cheq"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "cheq {args:?} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ))
    }
}

fn criterion_11() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let free = spec_path("free");
    let free = free.to_str().unwrap();
    let mut renders = Vec::new();
    for threads in ["1", "2", "8"] {
        let out = dir.path().join(format!("eq{threads}.pgm"));
        cheq(&[
            "--threads",
            threads,
            "eqregion",
            free,
            "--depth",
            "6",
            "--window",
            "-2,2,-2,2",
            "--res",
            "401x401",
            "--out",
            out.to_str().unwrap(),
        ])?;
        renders.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let mut clouds = Vec::new();
    for (run, threads) in ["1", "8"].iter().enumerate() {
        let out = dir.path().join(format!("cloud{run}.csv"));
        cheq(&[
            "--threads",
            threads,
            "limitset",
            free,
            "--depth",
            "6",
            "--method",
            "merged",
            "--out",
            out.to_str().unwrap(),
        ])?;
        clouds.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    let pgm_same = renders.windows(2).all(|w| w[0] == w[1]);
    let csv_same = clouds[0] == clouds[1];
    let msg = format!(
        "PGM ({} bytes) identical across 1/2/8 workers: {pgm_same}; CSV ({} bytes) identical across runs: {csv_same}",
        renders[0].len(),
        clouds[0].len()
    );
    if pgm_same && csv_same {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("form preservation", criterion_1),
        ("classification of conjugates", criterion_2),
        ("kernel/image dimension identity", criterion_3),
        ("quasi-projective limits of powers", criterion_4),
        ("forward/backward duality", criterion_5),
        (
            "base-point independence (two generators, depth 8)",
            criterion_6,
        ),
        ("elementary vs non-elementary cloud sizes", criterion_7),
        ("margins at the center, the pole and the ball", criterion_8),
        ("distortion dichotomy", criterion_9),
        ("clustering of escaping images", criterion_10),
        ("determinism of renders and clouds", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let result =
            catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = t0.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("[PASS] {:>2} {name}: {msg} [{secs:.1} s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {msg} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
