//! Chebyshev transform on the zero fiber versus the transform of the restricted weight.

use serde::{Deserialize, Serialize};

use super::{legendre, psh_projection_toric, Expr, ToricWeight};
use crate::error::{Error, Result};
use crate::optimize::maximize_1d;
use crate::Body;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZeroFiberOptions {
    /// Cutoffs in `x₁` for the restricted weight; the tail is extrapolated in `e^{2x₁}`.
    pub cutoffs: (f64, f64),
    /// Left ends of the nested boxes used for the full transform.
    pub boxes: (f64, f64),
    /// Half-width of the `x₂` search interval and right end in `x₁`.
    pub outer: f64,
    /// Tail change above which the full transform is flagged.
    pub tail_tol: f64,
}

impl Default for ZeroFiberOptions {
    fn default() -> Self {
        Self { cutoffs: (-20.0, -40.0), boxes: (20.0, 40.0), outer: 40.0, tail_tol: 1e-6 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZeroFiberReport {
    pub alpha: f64,
    pub c_full: f64,
    pub c_restricted: f64,
    pub difference: f64,
    /// Change of the full transform between the two boxes.
    pub tail_change: f64,
    pub tail_flagged: bool,
}

/// Range of `p₂` over the slice `{p ∈ Δ : p₁ = 0}`.
fn fiber_edge(body: &Body) -> Result<(f64, f64)> {
    let on: Vec<f64> = body.vertices.iter().filter(|v| v[0].abs() < 1e-12).map(|v| v[1]).collect();
    if on.len() < 2 || body.vertices.iter().any(|v| v[0] < -1e-12) {
        return Err(Error::Input("zero fiber must be an edge of Δ on the line p₁ = 0 with Δ in p₁ ≥ 0".into()));
    }
    Ok((on.iter().cloned().fold(f64::MAX, f64::min), on.iter().cloned().fold(f64::MIN, f64::max)))
}

/// `sup_{x ∈ [−r, outer] × [−outer, outer]} α x₂ − g(x)` by nested one-dimensional searches.
fn full_sup(g: &Expr, alpha: f64, r: f64, outer: f64) -> f64 {
    let inner = |x1: f64| maximize_1d(&|x2: f64| alpha * x2 - g.eval(&[x1, x2]), -outer, outer).0;
    maximize_1d(&inner, -r, outer).0
}

/// `g_Y(x₂) = lim_{x₁→−∞} g(x₁, x₂)`, linear in `e^{2x₁}` through the two cutoffs.
pub fn restricted_expr(g: &Expr, cutoffs: (f64, f64)) -> Expr {
    let (c1, c2) = cutoffs;
    let (s1, s2) = ((2.0 * c1).exp(), (2.0 * c2).exp());
    let slice = |c: f64| Expr::Slice { fixed: vec![Some(c), None], inner: Box::new(g.clone()) };
    slice(c2).scaled(s1 / (s1 - s2)).plus(slice(c1).scaled(-s2 / (s1 - s2)))
}

/// Both sides of the zero-fiber identity at `α` on the edge `p₁ = 0`.
pub fn zero_fiber_restriction(w: &ToricWeight, alpha: f64, opts: &ZeroFiberOptions) -> Result<ZeroFiberReport> {
    if w.n != 2 {
        return Err(Error::Input("zero-fiber restriction needs n = 2".into()));
    }
    let (a, b) = fiber_edge(&w.polytope)?;
    if !(alpha > a && alpha < b) {
        return Err(Error::Domain { point: vec![0.0, alpha], margin: 0.0 });
    }
    let v1 = full_sup(&w.g, alpha, opts.boxes.0, opts.outer);
    let v2 = full_sup(&w.g, alpha, opts.boxes.1, opts.outer);
    let tail_change = (v2 - v1).abs();
    let wp = psh_projection_toric(w)?;
    let gy = restricted_expr(&wp.g, opts.cutoffs);
    let wy = ToricWeight::new(1, Body::interval(a, b), gy, None)?;
    let c_restricted = 2.0 * legendre(&wy, &[alpha], (alpha - a).min(b - alpha))?.value;
    let c_full = 2.0 * v2;
    Ok(ZeroFiberReport {
        alpha,
        c_full,
        c_restricted,
        difference: c_full - c_restricted,
        tail_change,
        tail_flagged: tail_change > opts.tail_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entropy(a: f64) -> f64 {
        a * a.ln() + (1.0 - a) * (1.0 - a).ln()
    }

    #[test]
    fn fubini_study_on_the_plane() {
        let w = ToricWeight::fubini_study(2, 1.0).unwrap();
        let o = ZeroFiberOptions::default();
        for a in [0.25, 0.5, 0.75] {
            let r = zero_fiber_restriction(&w, a, &o).unwrap();
            assert!((r.c_full - entropy(a)).abs() < 1e-6, "{r:?}");
            assert!((r.c_restricted - entropy(a)).abs() < 1e-8, "{r:?}");
            assert!(!r.tail_flagged);
        }
        let l = zero_fiber_restriction(&w, 0.3, &o).unwrap();
        let r = zero_fiber_restriction(&w, 0.7, &o).unwrap();
        assert!((l.c_full - r.c_full).abs() < 1e-8 && (l.c_restricted - r.c_restricted).abs() < 1e-8);
    }

    #[test]
    fn separable_weight_on_the_square() {
        let g = Expr::FubiniStudy { scale: 1.0, coords: Some(vec![0]) }.plus(Expr::FubiniStudy { scale: 1.0, coords: Some(vec![1]) });
        let w = ToricWeight::new(2, Body::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), g, None).unwrap();
        let r = zero_fiber_restriction(&w, 0.4, &ZeroFiberOptions::default()).unwrap();
        assert!((r.c_full - entropy(0.4)).abs() < 1e-6, "{r:?}");
        assert!(r.difference.abs() < 1e-6);
    }

    #[test]
    fn rejects_points_off_the_edge() {
        let w = ToricWeight::fubini_study(2, 1.0).unwrap();
        assert!(zero_fiber_restriction(&w, 1.2, &ZeroFiberOptions::default()).is_err());
    }
}
