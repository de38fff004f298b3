//! Torus-invariant weights: Legendre transforms, Chebyshev transforms, psh projection,
//! relative energies, Monge–Ampère pushforwards and the zero-fiber restriction.
//!
//! Conventions: a weight `ψ` is represented by `g = ψ_Θ/2` in logarithmic coordinates,
//! so that `c[ψ](α) = 2 g*(α)` and the pushforward of `MA(ψ)` is `g″ dx` with total
//! mass `vol(Δ)` when `n = 1`.

mod energy;
pub mod expr;
mod fiber;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use energy::{
    derivative_check_1d, energy_legendre, energy_ma_1d, ma_pushforward_1d, DerivativeReport, EnergyOptions, EnergyReport,
    ToricMeasure1D, NORMALIZATION,
};
pub use expr::Expr;
pub use fiber::{zero_fiber_restriction, ZeroFiberOptions, ZeroFiberReport};

use crate::envelope::{ChebyshevField, GridSpec};
use crate::error::{Error, Result};
use crate::optimize::{maximize, maximize_concave, Jet};
use crate::Body;

/// JSON form of a weight: `{"n":1, "polytope":[[0],[1]], "g":{...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub n: usize,
    pub polytope: Vec<Vec<f64>>,
    pub g: Expr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

/// Function `g` on `ℝⁿ` with slope polytope `Δ` and `|g − h_Δ| ≤ growth_bound`.
#[derive(Clone, Debug, Serialize)]
pub struct ToricWeight {
    pub n: usize,
    pub g: Expr,
    pub polytope: Body,
    pub growth_bound: f64,
    pub smooth: bool,
    /// Midpoint convexity verified on a deterministic sample.
    pub convex: bool,
    pub name: Option<String>,
}

/// Sample points used for the growth and convexity checks.
fn growth_samples(n: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let radii = [1.0, 3.0, 5.0, 10.0, 20.0, 40.0];
    match n {
        1 => {
            for r in radii {
                out.push(vec![r]);
                out.push(vec![-r]);
            }
            out.push(vec![0.0]);
        }
        _ => {
            let dirs = if n == 2 { 72 } else { 24 };
            for r in radii {
                for j in 0..dirs {
                    let t = std::f64::consts::TAU * j as f64 / dirs as f64;
                    let mut x = vec![0.0; n];
                    x[0] = r * t.cos();
                    x[1] = r * t.sin();
                    if n == 3 {
                        x[2] = r * (0.5 * t).cos();
                    }
                    out.push(x);
                }
            }
            out.push(vec![0.0; n]);
        }
    }
    out
}

impl ToricWeight {
    pub fn new(n: usize, polytope: Body, g: Expr, growth_bound: Option<f64>) -> Result<Self> {
        if polytope.dim != n {
            return Err(Error::Input(format!("polytope has dimension {} but n = {n}", polytope.dim)));
        }
        if polytope.affine_dim < n {
            return Err(Error::Input("slope polytope must be full-dimensional".into()));
        }
        let est = growth_samples(n)
            .iter()
            .map(|x| (g.eval(x) - polytope.support(x)).abs())
            .fold(0.0, f64::max);
        if !est.is_finite() {
            return Err(Error::Input("weight is not finite on the growth sample".into()));
        }
        let growth_bound = match growth_bound {
            Some(b) if est > b * (1.0 + 1e-9) + 1e-9 => {
                return Err(Error::Input(format!("growth bound {b} violated: sampled |g − h_Δ| reaches {est}")))
            }
            Some(b) => b,
            None => est * 1.05 + 1e-6,
        };
        let smooth = g.is_smooth();
        let mut w = Self { n, g, polytope, growth_bound, smooth, convex: false, name: None };
        w.convex = w.sampled_convexity() <= 0.0;
        Ok(w)
    }

    pub fn from_spec(spec: &WeightSpec) -> Result<Self> {
        let body = Body::from_points(spec.n, &spec.polytope)?;
        let mut w = Self::new(spec.n, body, spec.g.clone(), spec.growth_bound)?;
        w.name = spec.name.clone();
        Ok(w)
    }

    pub fn to_spec(&self) -> WeightSpec {
        WeightSpec {
            n: self.n,
            polytope: self.polytope.vertices.clone(),
            g: self.g.clone(),
            growth_bound: Some(self.growth_bound),
            name: self.name.clone(),
        }
    }

    /// Fubini–Study weight of `𝒪(scale)` on `ℙⁿ` (slope polytope `scale·Σ`).
    pub fn fubini_study(n: usize, scale: f64) -> Result<Self> {
        let mut w = Self::new(n, Body::simplex(n, scale)?, Expr::fubini_study(scale), None)?;
        w.name = Some("fubini_study".into());
        Ok(w)
    }

    /// `g_FS + amplitude·(1 − |x − c|²/r²)₊³` on `[0,1]`; convex for small amplitudes.
    pub fn fubini_study_with_bump(amplitude: f64, center: f64, radius: f64) -> Result<Self> {
        let g = Expr::fubini_study(1.0).plus(Expr::QuadraticBump { amplitude, center: vec![center], radius });
        let mut w = Self::new(1, Body::interval(0.0, 1.0), g, None)?;
        w.name = Some("fubini_study_bump".into());
        Ok(w)
    }

    /// Same polytope, new expression (growth bound re-estimated).
    pub fn with_g(&self, g: Expr) -> Result<Self> {
        Self::new(self.n, self.polytope.clone(), g, None)
    }

    /// `ψ + c`, i.e. `g + c/2`.
    pub fn plus_constant(&self, c: f64) -> Result<Self> {
        let mut w = self.with_g(self.g.clone().plus(Expr::constant(c / 2.0)))?;
        w.growth_bound = self.growth_bound + c.abs() / 2.0;
        Ok(w)
    }

    /// Weight `tψ` on `tL`: `t·g` with slope polytope `tΔ`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        Self::new(self.n, self.polytope.scaled(t), self.g.clone().scaled(t), Some(self.growth_bound * t.abs()))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.g.eval(x)
    }

    /// Largest sampled midpoint-convexity defect, normalized; `≤ 0` means convex on the sample.
    pub fn sampled_convexity(&self) -> f64 {
        let n = self.n;
        let mut worst = f64::NEG_INFINITY;
        let mut check = |x: &[f64], d: &[f64]| {
            let xp: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + b).collect();
            let xm: Vec<f64> = x.iter().zip(d).map(|(a, b)| a - b).collect();
            let v = self.g.eval(x);
            let defect = v - 0.5 * (self.g.eval(&xp) + self.g.eval(&xm)) - 1e-9 * (1.0 + v.abs());
            worst = worst.max(defect);
        };
        match n {
            1 => {
                for i in -300..=300 {
                    let x = [i as f64 * 0.05];
                    for s in [0.05, 0.4, 2.0] {
                        check(&x, &[s]);
                    }
                }
            }
            _ => {
                let dirs: Vec<Vec<f64>> = if n == 2 {
                    vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![1.0, -1.0], vec![2.0, 1.0], vec![1.0, 2.0]]
                } else {
                    vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 1.0]]
                };
                let m = if n == 2 { 32 } else { 10 };
                let total = (2 * m + 1usize).pow(n as u32);
                for idx in 0..total {
                    let mut rem = idx;
                    let x: Vec<f64> = (0..n)
                        .map(|_| {
                            let t = (rem % (2 * m + 1)) as f64 - m as f64;
                            rem /= 2 * m + 1;
                            t * 8.0 / m as f64
                        })
                        .collect();
                    for d in &dirs {
                        for s in [0.25, 1.0] {
                            let ds: Vec<f64> = d.iter().map(|v| v * s).collect();
                            check(&x, &ds);
                        }
                    }
                }
            }
        }
        worst
    }

    fn jet_fn(&self) -> Option<impl Fn(&[f64]) -> Option<Jet> + '_> {
        self.smooth.then_some(move |x: &[f64]| self.g.jet(x))
    }
}

/// Value and maximizer of `sup_x ⟨p,x⟩ − g(x)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Conjugate {
    pub value: f64,
    pub argmax: Vec<f64>,
}

/// Half-width of the search box for a conjugate at margin `m` from `∂Δ`.
///
/// From `h_Δ(x) − ⟨p,x⟩ ≥ m|x|` and `|g − h_Δ| ≤ B`, every maximizer satisfies
/// `|x| ≤ 2B/m`; the logarithmic term and unit slack keep the box generous.
pub fn search_half_width(growth_bound: f64, margin: f64) -> f64 {
    ((2.0 * growth_bound + margin.ln().abs()) / margin + 1.0).min(1e8)
}

/// Exact conjugate of a one-dimensional max-of-affine function: lower hull of `(a_j, −b_j)`.
fn max_affine_conjugate_1d(pieces: &[Vec<f64>], p: f64) -> Option<Conjugate> {
    let mut pts: Vec<(f64, f64)> = pieces.iter().map(|q| (q[0], -q[1])).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = pts.first()?.0;
    let hi = pts.last()?.0;
    if p < lo - 1e-15 || p > hi + 1e-15 {
        return None;
    }
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for q in pts {
        if let Some(last) = hull.last() {
            if last.0 == q.0 {
                if q.1 >= last.1 {
                    continue;
                }
                hull.pop();
            }
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if (b.0 - a.0) * (q.1 - a.1) - (b.1 - a.1) * (q.0 - a.0) <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(q);
    }
    let i = hull.partition_point(|h| h.0 < p);
    if i < hull.len() && hull[i].0 == p || hull.len() == 1 {
        let h = hull[i.min(hull.len() - 1)];
        // Maximizer: any point between the adjacent kinks; take the kink abscissa.
        let x = if i + 1 < hull.len() { (hull[i + 1].1 - h.1) / (hull[i + 1].0 - h.0) } else { 0.0 };
        return Some(Conjugate { value: h.1, argmax: vec![x] });
    }
    let i = i.clamp(1, hull.len() - 1);
    let (a, b) = (hull[i - 1], hull[i]);
    let slope = (b.1 - a.1) / (b.0 - a.0);
    Some(Conjugate { value: a.1 + slope * (p - a.0), argmax: vec![slope] })
}

/// `sup_x ⟨p,x⟩ − g(x)` over `[−r, r]ⁿ` with no domain check.
fn conjugate_in_box(w: &ToricWeight, p: &[f64], r: f64) -> Conjugate {
    if let (1, Expr::MaxAffine { pieces }) = (w.n, &w.g) {
        if let Some(c) = max_affine_conjugate_1d(pieces, p[0]) {
            return c;
        }
    }
    let f = |x: &[f64]| p.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - w.g.eval(x);
    let jet = w.jet_fn().map(|j| {
        move |x: &[f64]| -> Option<Jet> {
            let (v, g, h) = j(x)?;
            let val = p.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() - v;
            Some((val, p.iter().zip(&g).map(|(a, b)| a - b).collect(), h.iter().map(|a| -a).collect()))
        }
    });
    let lo = vec![-r; w.n];
    let hi = vec![r; w.n];
    if let (true, Some(j)) = (w.convex, &jet) {
        if let Some(m) = maximize_concave(&f, j, vec![0.0; w.n], &lo, &hi) {
            return Conjugate { value: m.value, argmax: m.argmax };
        }
    }
    let m = match &jet {
        Some(j) => maximize(&f, Some(j), &lo, &hi),
        None => maximize(&f, None, &lo, &hi),
    };
    Conjugate { value: m.value, argmax: m.argmax }
}

/// Legendre transform `g*(p)` at a point at distance `≥ margin` from `∂Δ`.
pub fn legendre(w: &ToricWeight, p: &[f64], margin: f64) -> Result<Conjugate> {
    if p.len() != w.n {
        return Err(Error::Input("point dimension mismatch".into()));
    }
    let dist = w.polytope.boundary_distance(p);
    if !(margin > 0.0) || dist < margin * (1.0 - 1e-9) {
        return Err(Error::Domain { point: p.to_vec(), margin });
    }
    Ok(conjugate_in_box(w, p, search_half_width(w.growth_bound, margin.min(dist))))
}

/// `sup_{|x|∞ ≤ r} ⟨p,x⟩ − g(x)` for any `p ∈ Δ`, boundary included.
pub fn legendre_closure(w: &ToricWeight, p: &[f64], r: f64) -> Result<Conjugate> {
    if w.polytope.boundary_distance(p) < -1e-12 {
        return Err(Error::Domain { point: p.to_vec(), margin: 0.0 });
    }
    Ok(conjugate_in_box(w, p, r))
}

/// Chebyshev transform `c[ψ] = 2g*` on a grid over the slope polytope.
pub fn chebyshev_toric(w: &ToricWeight, grid: GridSpec<f64>) -> Result<ChebyshevField<f64>> {
    let margin = grid.margin_cells as f64 * grid.spacing * (1.0 - 1e-9);
    let field = ChebyshevField::grid(&w.polytope, grid)?;
    let mut field = field.fill(|a| {
        if margin > 0.0 {
            legendre(w, a, margin).ok().map(|c| 2.0 * c.value)
        } else {
            let d = w.polytope.boundary_distance(a);
            (d > 0.0).then(|| legendre(w, a, d).ok().map(|c| 2.0 * c.value)).flatten()
        }
    });
    field.convexified = true;
    Ok(field)
}

/// Number of slope nodes per axis used by the projection.
pub const PROJECTION_NODES: usize = 2048;
/// Box half-width for conjugates at boundary slopes during projection.
pub const PROJECTION_BOX: f64 = 60.0;

fn lobatto(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|j| a + (b - a) * 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos())).collect()
}

/// Psh projection `g_P = (g*|_Δ)*`, returned unchanged when `g` is already convex.
pub fn psh_projection_toric(w: &ToricWeight) -> Result<ToricWeight> {
    if w.convex {
        return Ok(w.clone());
    }
    psh_projection_forced(w)
}

/// Double conjugate on a slope grid regardless of convexity.
pub fn psh_projection_forced(w: &ToricWeight) -> Result<ToricWeight> {
    let slopes: Vec<Vec<f64>> = match w.n {
        1 => {
            let a = w.polytope.vertices[0][0];
            let b = w.polytope.vertices.last().unwrap()[0];
            lobatto(a, b, PROJECTION_NODES).into_iter().map(|p| vec![p]).collect()
        }
        2 => {
            let (lo, hi) = w.polytope.bounding_box();
            let m = 64;
            let xs = lobatto(lo[0], hi[0], m);
            let ys = lobatto(lo[1], hi[1], m);
            let mut s: Vec<Vec<f64>> = xs
                .iter()
                .flat_map(|x| ys.iter().map(move |y| vec![*x, *y]))
                .filter(|p| w.polytope.boundary_distance(p) > 1e-12)
                .collect();
            let v = &w.polytope.vertices;
            for i in 0..v.len() {
                let (a, b) = (&v[i], &v[(i + 1) % v.len()]);
                for t in lobatto(0.0, 1.0, m).into_iter().take(m) {
                    s.push(vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                }
            }
            s
        }
        _ => return Err(Error::Input("projection supports n ≤ 2".into())),
    };
    let values: Vec<Result<Conjugate>> = slopes.par_iter().map(|p| legendre_closure(w, p, PROJECTION_BOX)).collect();
    let mut pieces = Vec::with_capacity(slopes.len());
    for (p, c) in slopes.into_iter().zip(values) {
        let c = c?;
        let mut piece = p;
        piece.push(-c.value);
        pieces.push(piece);
    }
    let mut out = ToricWeight::new(w.n, w.polytope.clone(), Expr::MaxAffine { pieces }, Some(w.growth_bound))?;
    out.convex = true;
    out.name = w.name.as_ref().map(|s| format!("P({s})"));
    Ok(out)
}
