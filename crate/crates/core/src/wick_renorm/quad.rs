//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands,
//! and its nesting into a spherical-coordinate integral over a ball.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LabError, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
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
/// Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Debug, PartialEq)]
pub struct QuadResult {
    pub value: Vec<f64>,
    /// Estimated absolute error (max over components).
    pub error: f64,
    pub evals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn gk15<F: Fn(f64) -> Vec<f64>>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let dim = fc.len();
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    for d in 0..dim {
        k[d] = WGK[7] * fc[d];
        g[d] = WG[3] * fc[d];
    }
    for i in 0..7 {
        let x = h * XGK[i];
        let (f1, f2) = (f(c - x), f(c + x));
        for d in 0..dim {
            let s = f1[d] + f2[d];
            k[d] += WGK[i] * s;
            if i % 2 == 1 {
                g[d] += WG[i / 2] * s;
            }
        }
    }
    let mut err = 0.0f64;
    for d in 0..dim {
        k[d] *= h;
        g[d] *= h;
        err = err.max((k[d] - g[d]).abs());
    }
    Panel { a, b, value: k, error: err }
}

/// `∫_a^b f`, bisecting the worst panel until the summed error estimate is below
/// `max(abs_tol, rel_tol·max|value|)` or `max_panels` is reached (then `Quadrature` error).
pub fn adaptive_gk15<F: Fn(f64) -> Vec<f64>>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_panels: usize) -> Result<QuadResult> {
    let first = gk15(&f, a, b);
    let dim = first.value.len();
    let mut heap = BinaryHeap::new();
    heap.push(first);
    let mut evals = 15;
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in heap.iter() {
            for d in 0..dim {
                total[d] += p.value[d];
            }
            err += p.error;
        }
        let scale = total.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let target = abs_tol.max(rel_tol * scale);
        if err <= target {
            return Ok(QuadResult { value: total, error: err, evals });
        }
        if heap.len() >= max_panels {
            return Err(LabError::Quadrature { estimate: err, tolerance: target });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
        evals += 30;
    }
}

/// Scalar convenience wrapper.
pub fn adaptive_scalar<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<(f64, f64)> {
    let r = adaptive_gk15(|x| vec![f(x)], a, b, abs_tol, rel_tol, 4096)?;
    Ok((r.value[0], r.error))
}

/// `∫_{|x| <= radius} f(x) dx` in spherical coordinates, each direction nested
/// adaptively. Inner error estimates are integrated and added to the outer one.
pub fn ball_integral<F: Fn([f64; 3]) -> Vec<f64> + Sync>(f: F, radius: f64, rel_tol: f64, abs_tol: f64) -> Result<QuadResult> {
    use std::cell::Cell;
    let evals = Cell::new(0usize);
    let failure: Cell<Option<LabError>> = Cell::new(None);
    let inner_tol = 0.1 * rel_tol;
    let with_err = |r: Result<QuadResult>| -> Vec<f64> {
        match r {
            Ok(q) => {
                evals.set(evals.get() + q.evals);
                let mut v = q.value;
                v.push(q.error);
                v
            }
            Err(e) => {
                failure.set(Some(e));
                vec![f64::NAN]
            }
        }
    };
    let phi_level = |r: f64, th: f64| {
        let (st, ct) = th.sin_cos();
        with_err(adaptive_gk15(
            |ph| {
                let (sp, cp) = ph.sin_cos();
                f([r * st * cp, r * st * sp, r * ct])
            },
            0.0,
            2.0 * std::f64::consts::PI,
            abs_tol,
            inner_tol,
            256,
        ))
    };
    let theta_level = |r: f64| {
        let q = adaptive_gk15(
            |th| {
                let mut v = phi_level(r, th);
                let s = th.sin();
                v.iter_mut().for_each(|x| *x *= s);
                v
            },
            0.0,
            std::f64::consts::PI,
            abs_tol,
            inner_tol,
            256,
        );
        // the last component carries the integrated φ-level error
        q.map(|mut q| {
            let inner = q.value.pop().unwrap_or(0.0);
            q.error += inner.abs();
            q
        })
    };
    let outer = adaptive_gk15(
        |r| {
            let mut v = with_err(theta_level(r));
            let w = r * r;
            v.iter_mut().for_each(|x| *x *= w);
            v
        },
        0.0,
        radius,
        abs_tol,
        rel_tol,
        512,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let mut q = outer?;
    let inner = q.value.pop().unwrap_or(0.0);
    q.error += inner.abs();
    q.evals += evals.get();
    Ok(q)
}
