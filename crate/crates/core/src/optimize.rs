//! Deterministic maximization over boxes: coarse grid, Newton polish, zoom refinement.

/// Value, gradient and row-major Hessian of an objective.
pub type Jet = (f64, Vec<f64>, Vec<f64>);

/// Result of a maximization.
#[derive(Clone, Debug, PartialEq)]
pub struct Maximum {
    pub value: f64,
    pub argmax: Vec<f64>,
    /// Whether the Newton polish reached a stationary point.
    pub newton: bool,
}

/// Half-width of the first coarse window around the origin.
const WINDOW: f64 = 40.0;

fn coarse_points(n: usize) -> usize {
    match n {
        1 => 401,
        2 => 61,
        _ => 21,
    }
}

fn grid_points<'a>(lo: &'a [f64], hi: &'a [f64], per_axis: usize) -> impl Iterator<Item = Vec<f64>> + 'a {
    let n = lo.len();
    (0..per_axis.pow(n as u32)).map(move |idx| {
        let mut rem = idx;
        (0..n)
            .map(|i| {
                let t = rem % per_axis;
                rem /= per_axis;
                if per_axis == 1 {
                    0.5 * (lo[i] + hi[i])
                } else {
                    lo[i] + (hi[i] - lo[i]) * t as f64 / (per_axis - 1) as f64
                }
            })
            .collect()
    })
}

fn grid_best(f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64], per_axis: usize) -> (f64, Vec<f64>) {
    let mut best = (f64::NEG_INFINITY, lo.to_vec());
    for x in grid_points(lo, hi, per_axis) {
        let v = f(&x);
        if v > best.0 {
            best = (v, x);
        }
    }
    best
}

/// Best grid points that are pairwise separated by more than `sep` in the max norm.
fn grid_candidates(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    per_axis: usize,
    count: usize,
    sep: f64,
) -> Vec<(f64, Vec<f64>)> {
    let mut all: Vec<(f64, Vec<f64>)> = grid_points(lo, hi, per_axis).map(|x| (f(&x), x)).collect();
    all.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    for c in all {
        if out.len() == count {
            break;
        }
        if out.iter().all(|o| o.1.iter().zip(&c.1).any(|(a, b)| (a - b).abs() > sep)) {
            out.push(c);
        }
    }
    out
}

fn clamp_into(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].clamp(lo[i], hi[i]);
    }
}

/// Cholesky solve of `(A + λI) d = b`; `None` if not positive definite.
fn chol_solve(a: &[f64], n: usize, lambda: f64, b: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j] + if i == j { lambda } else { 0.0 };
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    Some(y)
}

/// Damped Newton ascent; returns the final point and whether it is stationary.
fn newton(
    f: &dyn Fn(&[f64]) -> f64,
    jet: &dyn Fn(&[f64]) -> Option<Jet>,
    x0: Vec<f64>,
    lo: &[f64],
    hi: &[f64],
) -> (f64, Vec<f64>, bool) {
    let n = x0.len();
    let mut x = x0;
    let Some((mut v, _, _)) = jet(&x) else { return (f(&x), x, false) };
    for _ in 0..300 {
        let Some((_, g, h)) = jet(&x) else { return (v, x, false) };
        let gnorm = g.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let neg_h: Vec<f64> = h.iter().map(|a| -a).collect();
        let scale = neg_h.iter().fold(0.0f64, |m, a| m.max(a.abs())).max(1e-300);
        let mut lambda = 0.0;
        let d = loop {
            if let Some(d) = chol_solve(&neg_h, n, lambda, &g) {
                break d;
            }
            lambda = if lambda == 0.0 { 1e-12 * scale.max(1e-12) } else { lambda * 10.0 };
            if lambda > 1e12 * scale.max(1.0) {
                break g.clone();
            }
        };
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        if gnorm <= 1e-14 || slope <= 1e-30 {
            return (v, x, true);
        }
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-14 {
            let mut y: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            clamp_into(&mut y, lo, hi);
            let fy = f(&y);
            if fy >= v + 1e-4 * t * slope || (fy >= v && t < 1e-6) {
                accepted = Some((fy, y));
                break;
            }
            t *= 0.5;
        }
        let Some((fy, y)) = accepted else {
            // Stationary up to rounding.
            return (v, x, slope < 1e-20 * (1.0 + v.abs()));
        };
        let step = x.iter().zip(&y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let gain = fy - v;
        x = y;
        v = fy;
        if step <= 1e-15 * (1.0 + x.iter().fold(0.0f64, |m, a| m.max(a.abs()))) || (gain <= 1e-16 * (1.0 + v.abs()) && t == 1.0) {
            return (v, x, true);
        }
    }
    (v, x, false)
}

/// Zoom refinement around `x`, shrinking the local grid geometrically.
fn zoom(f: &dyn Fn(&[f64]) -> f64, mut best: (f64, Vec<f64>), width: f64, lo: &[f64], hi: &[f64]) -> (f64, Vec<f64>) {
    let n = lo.len();
    let (per_axis, shrink) = if n == 1 { (9, 0.25) } else { (9, 0.5) };
    let mut w = width;
    for _ in 0..400 {
        let scale = 1.0 + best.1.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        if w < 1e-12 * scale {
            break;
        }
        let a: Vec<f64> = (0..n).map(|i| (best.1[i] - w).max(lo[i])).collect();
        let b: Vec<f64> = (0..n).map(|i| (best.1[i] + w).min(hi[i])).collect();
        let cand = grid_best(f, &a, &b, per_axis);
        if cand.0 > best.0 {
            best = cand;
        }
        w *= shrink;
    }
    best
}

/// Maximizes `f` over the box `[lo, hi]`, using `jet` for Newton polishing when available.
pub fn maximize(
    f: &dyn Fn(&[f64]) -> f64,
    jet: Option<&dyn Fn(&[f64]) -> Option<Jet>>,
    lo: &[f64],
    hi: &[f64],
) -> Maximum {
    let n = lo.len();
    let per_axis = coarse_points(n);
    let mut half = WINDOW;
    let (mut best, mut wlo, mut whi);
    loop {
        wlo = (0..n).map(|i| lo[i].max(-half).min(hi[i])).collect::<Vec<f64>>();
        whi = (0..n).map(|i| hi[i].min(half).max(lo[i])).collect::<Vec<f64>>();
        best = grid_best(f, &wlo, &whi, per_axis);
        let on_edge = (0..n).any(|i| {
            let sp = (whi[i] - wlo[i]) / (per_axis - 1) as f64;
            (best.1[i] - wlo[i] < 0.5 * sp && wlo[i] > lo[i]) || (whi[i] - best.1[i] < 0.5 * sp && whi[i] < hi[i])
        });
        if !on_edge || half >= 1e9 {
            break;
        }
        half *= 8.0;
    }
    let spacing = (0..n).map(|i| (whi[i] - wlo[i]) / (per_axis - 1) as f64).fold(0.0, f64::max);
    // Several separated starts guard against a nonconcave objective's secondary peaks.
    let starts = grid_candidates(f, &wlo, &whi, per_axis, CANDIDATES, 1.5 * spacing);
    let mut result: Option<Maximum> = None;
    for start in starts {
        let m = polish(f, jet, start, spacing, lo, hi);
        if result.as_ref().is_none_or(|r| m.value > r.value) {
            result = Some(m);
        }
    }
    result.unwrap_or(Maximum { value: best.0, argmax: best.1, newton: false })
}

/// Number of separated grid starts refined by [`maximize`].
const CANDIDATES: usize = 4;

fn polish(
    f: &dyn Fn(&[f64]) -> f64,
    jet: Option<&dyn Fn(&[f64]) -> Option<Jet>>,
    mut best: (f64, Vec<f64>),
    spacing: f64,
    lo: &[f64],
    hi: &[f64],
) -> Maximum {
    if let Some(j) = jet {
        let (v, x, ok) = newton(f, j, best.1.clone(), lo, hi);
        if ok && v >= best.0 - 1e-12 * (1.0 + best.0.abs()) {
            return Maximum { value: v, argmax: x, newton: true };
        }
        if v > best.0 {
            best = (v, x);
        }
    }
    let (value, argmax) = zoom(f, best, 2.0 * spacing, lo, hi);
    Maximum { value, argmax, newton: false }
}

/// Newton ascent from `x0` for an objective known to be concave; `None` unless it converges
/// to an interior stationary point with a small gradient.
pub fn maximize_concave(
    f: &dyn Fn(&[f64]) -> f64,
    jet: &dyn Fn(&[f64]) -> Option<Jet>,
    x0: Vec<f64>,
    lo: &[f64],
    hi: &[f64],
) -> Option<Maximum> {
    let (value, argmax, ok) = newton(f, jet, x0, lo, hi);
    let (_, g, _) = jet(&argmax)?;
    let interior = argmax.iter().zip(lo.iter().zip(hi)).all(|(x, (a, b))| x > a && x < b);
    let small = g.iter().all(|v| v.abs() <= 1e-9);
    (ok && interior && small).then_some(Maximum { value, argmax, newton: true })
}

/// One-dimensional maximization on `[lo, hi]`.
pub fn maximize_1d(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let g = |x: &[f64]| f(x[0]);
    let m = maximize(&g, None, &[lo], &[hi]);
    (m.value, m.argmax[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concave_quadratic_by_newton_and_zoom() {
        let f = |x: &[f64]| -(x[0] - 1.3).powi(2) - 2.0 * (x[1] + 0.7).powi(2) + x[0] * x[1] * 0.5;
        let jet = |x: &[f64]| -> Option<Jet> {
            Some((f(x), vec![-2.0 * (x[0] - 1.3) + 0.5 * x[1], -4.0 * (x[1] + 0.7) + 0.5 * x[0]], vec![-2.0, 0.5, 0.5, -4.0]))
        };
        let a = maximize(&f, Some(&jet), &[-100.0, -100.0], &[100.0, 100.0]);
        let b = maximize(&f, None, &[-100.0, -100.0], &[100.0, 100.0]);
        assert!(a.newton);
        assert!((a.value - b.value).abs() < 1e-12, "{} {}", a.value, b.value);
    }

    #[test]
    fn maximum_on_the_boundary_and_far_away() {
        let (v, x) = maximize_1d(&|x| x, -3.0, 5.0);
        assert!(v == 5.0 && x == 5.0);
        let (v, x) = maximize_1d(&|x| -(x - 1000.0).abs(), -1e6, 1e6);
        assert!(v.abs() < 1e-9 && (x - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn kinked_objective() {
        let (v, _) = maximize_1d(&|x| 0.3 * x - x.max(0.0), -50.0, 50.0);
        assert!(v.abs() < 1e-12);
    }
}
