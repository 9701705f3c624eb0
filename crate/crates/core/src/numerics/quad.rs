//! Adaptive Gauss–Kronrod 7/15 quadrature with absolute-error control,
//! used for the improper Melnikov integral after truncation.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae on [-1, 1] (positive half; last entry is 0).
// Full published precision; the extra digits round to the nearest f64.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

// Kronrod weights matching XGK.
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

// 7-point Gauss weights for the odd-index abscissae (and the center).
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Result of an adaptive quadrature run. `converged == false` means the
/// subdivision budget ran out first; `value` is still the best estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    pub panels: usize,
}

/// QUADPACK-style error rescaling from the raw |K15 − G7| difference.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

/// One G7/K15 evaluation over [a, b]: (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);

    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    let mut resabs = resk.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        resk += WGK[j] * sum;
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * sum;
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = resk * half;
    let err = rescale_error((resk - resg) * half, resabs * half.abs(), resasc * half.abs());
    (value, err)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive quadrature of f over [a, b] to absolute tolerance
/// `tol`, splitting the currently worst panel until the summed error
/// estimate passes `tol` or `max_panels` is reached.
pub fn quad_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite { context: "quad_adaptive bounds" });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("quadrature tolerance {tol} must be positive")));
    }
    if max_panels == 0 {
        return Err(Error::Domain("max_panels must be positive".into()));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error_estimate: 0.0, converged: true, panels: 0 });
    }

    let (v0, e0) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v0, err: e0 });
    let mut total_err = e0;

    while total_err > tol && heap.len() < max_panels {
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid == worst.a || mid == worst.b {
            // Panel no longer splittable; put it back and stop.
            heap.push(worst);
            break;
        }
        let (vl, el) = gk15(&f, worst.a, mid);
        let (vr, er) = gk15(&f, mid, worst.b);
        total_err += el + er - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: vl, err: el });
        heap.push(Panel { a: mid, b: worst.b, value: vr, err: er });
    }

    let panels = heap.len();
    // Sum smallest-magnitude first for a slightly tighter total.
    let mut parts: Vec<Panel> = heap.into_vec();
    parts.sort_by(|p, q| p.value.abs().total_cmp(&q.value.abs()));
    let value: f64 = parts.iter().map(|p| p.value).sum();
    let error_estimate: f64 = parts.iter().map(|p| p.err).sum();
    Ok(QuadResult { value, error_estimate, converged: error_estimate <= tol, panels })
}

/// ∫_{-T}^{T} f(t) dt by adaptive quadrature; the improper integral after
/// truncation at ±T (the caller controls the analytic tail bound).
pub fn quad_improper<F: Fn(f64) -> f64>(f: F, t_trunc: f64, tol: f64) -> Result<QuadResult> {
    if !(t_trunc.is_finite() && t_trunc > 0.0) {
        return Err(Error::Domain(format!("truncation T = {t_trunc} must be positive")));
    }
    quad_adaptive(f, -t_trunc, t_trunc, tol, 4000)
}
