//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub fn exact(value: f64) -> Self {
        QuadratureResult { value, error: 0.0, evaluations: 0 }
    }

    pub fn bounded(&self) -> crate::bounded::BoundedReal {
        crate::bounded::BoundedReal::new(self.value, self.error)
    }
}

pub const MAX_INTERVALS: usize = 4000;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
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
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut resabs = kron.abs();
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        kron += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kron * h;
    let resabs = resabs * h.abs();
    let err = ((kron - gauss) * h).abs();
    // floor for cancellation in the panel sum itself
    let error = err.max(50.0 * f64::EPSILON * resabs);
    Panel { a, b, value, error }
}

/// Integrates `f` over `[a, b]` to absolute accuracy `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    integrate_with_breaks(f, &[a, b], tol)
}

/// Like [`integrate`], starting from the panels delimited by `points`
/// (sorted, at least two). Known kinks belong in `points`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, points: &[f64], tol: f64) -> Result<QuadratureResult> {
    if points.len() < 2 || !(tol > 0.0) {
        return Err(Error::InvalidParameter("quadrature needs two points and tol > 0".into()));
    }
    let mut panels: Vec<Panel> = points.windows(2).filter(|w| w[1] > w[0]).map(|w| gk15(&f, w[0], w[1])).collect();
    let mut evaluations = 15 * panels.len();
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= tol {
            let value = sum_sorted(panels.iter().map(|p| p.value));
            let error = total_err + f64::EPSILON * panels.len() as f64 * value.abs();
            return Ok(QuadratureResult { value, error, evaluations });
        }
        if !total_err.is_finite() || panels.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure { tol, error: total_err, evaluations });
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let p = panels.swap_remove(idx);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::QuadratureFailure { tol, error: total_err, evaluations });
        }
        panels.push(gk15(&f, p.a, m));
        panels.push(gk15(&f, m, p.b));
        evaluations += 30;
    }
}

/// Sum in order of increasing magnitude.
pub fn sum_sorted<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut v: Vec<f64> = xs.into_iter().collect();
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    v.iter().sum()
}
