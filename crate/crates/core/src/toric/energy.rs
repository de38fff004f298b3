//! Relative energy by two routes, the Monge–Ampère pushforward for `n = 1`,
//! and the finite-difference check of the energy derivative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{legendre, psh_projection_toric, Expr, ToricWeight};
use crate::error::{Error, Result};
use crate::quadrature::Rule1d;
use crate::scalar::factorial;

/// Normalization attached to every energy report.
pub const NORMALIZATION: &str =
    "dd^c normalized so that the Monge-Ampere pushforward of each weight has mass vol(Delta); c[psi] = 2 g*";

/// Quadrature settings for the Legendre route.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyOptions {
    /// Gauss–Legendre order per axis and panel.
    pub order: usize,
    /// Panels per axis for `n = 1`.
    pub panels: usize,
    /// Margin shrink; the second margin is `2δ`.
    pub delta: f64,
    /// Grid step of the Monge–Ampère route.
    pub ma_step: f64,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self { order: 64, panels: 4, delta: 1e-4, ma_step: 1e-3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub route: String,
    pub value: f64,
    pub error_estimate: f64,
    pub normalization: String,
    pub notices: Vec<String>,
}

/// Quadrature nodes and weights on the polytope shrunk by `delta`.
fn shrunk_rule(w: &ToricWeight, delta: f64, opts: &EnergyOptions) -> Result<Vec<(Vec<f64>, f64)>> {
    let body = &w.polytope;
    match w.n {
        1 => {
            let (a, b) = (body.vertices[0][0] + delta, body.vertices.last().unwrap()[0] - delta);
            let r = Rule1d::<f64>::composite(a, b, opts.panels, opts.order);
            Ok(r.nodes.into_iter().zip(r.weights).map(|(x, c)| (vec![x], c)).collect())
        }
        2 => {
            let v = &body.vertices;
            let m = v.len();
            // Offset each edge inward and intersect neighbours.
            let line = |i: usize| {
                let (p, q) = (&v[i], &v[(i + 1) % m]);
                let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
                let len = dx.hypot(dy);
                let nrm = [dy / len, -dx / len];
                (nrm, nrm[0] * p[0] + nrm[1] * p[1] - delta)
            };
            let mut s = Vec::with_capacity(m);
            for i in 0..m {
                let (n1, b1) = line((i + m - 1) % m);
                let (n2, b2) = line(i);
                let det = n1[0] * n2[1] - n1[1] * n2[0];
                s.push([(b1 * n2[1] - b2 * n1[1]) / det, (n1[0] * b2 - n2[0] * b1) / det]);
            }
            let g = Rule1d::<f64>::gauss(0.0, 1.0, opts.order);
            let axis_aligned = m == 4 && (0..4).all(|i| {
                let (p, q) = (s[i], s[(i + 1) % 4]);
                (p[0] - q[0]).abs() < 1e-14 || (p[1] - q[1]).abs() < 1e-14
            });
            let mut out = Vec::new();
            if axis_aligned {
                let (x0, x1) = (s.iter().map(|p| p[0]).fold(f64::MAX, f64::min), s.iter().map(|p| p[0]).fold(f64::MIN, f64::max));
                let (y0, y1) = (s.iter().map(|p| p[1]).fold(f64::MAX, f64::min), s.iter().map(|p| p[1]).fold(f64::MIN, f64::max));
                for (u, cu) in g.nodes.iter().zip(&g.weights) {
                    for (t, ct) in g.nodes.iter().zip(&g.weights) {
                        out.push((vec![x0 + u * (x1 - x0), y0 + t * (y1 - y0)], cu * ct * (x1 - x0) * (y1 - y0)));
                    }
                }
                return Ok(out);
            }
            // Fan from the first vertex with a collapsed-square map per triangle.
            let a = s[0];
            for i in 1..m - 1 {
                let (b, c) = (s[i], s[i + 1]);
                let e1 = [b[0] - a[0], b[1] - a[1]];
                let e2 = [c[0] - b[0], c[1] - b[1]];
                let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
                for (u, cu) in g.nodes.iter().zip(&g.weights) {
                    for (t, ct) in g.nodes.iter().zip(&g.weights) {
                        let x = [a[0] + u * e1[0] + u * t * e2[0], a[1] + u * e1[1] + u * t * e2[1]];
                        out.push((x.to_vec(), cu * ct * u * det));
                    }
                }
            }
            Ok(out)
        }
        _ => Err(Error::Input("energies are implemented for n ≤ 2".into())),
    }
}

/// `2·n!·∫_{Δ_δ} (g_ψ* − g_φ*)` at one margin.
fn legendre_integral(w_psi: &ToricWeight, w_phi: &ToricWeight, delta: f64, opts: &EnergyOptions) -> Result<f64> {
    let rule = shrunk_rule(w_psi, delta, opts)?;
    let terms: Vec<Result<f64>> = rule
        .par_iter()
        .map(|(p, c)| {
            let d = w_psi.polytope.boundary_distance(p);
            Ok(c * (legendre(w_psi, p, d)?.value - legendre(w_phi, p, d)?.value))
        })
        .collect();
    let mut sum = 0.0;
    for t in terms {
        sum += t?;
    }
    Ok(2.0 * factorial::<f64>(w_psi.n) * sum)
}

fn check_pair(w_psi: &ToricWeight, w_phi: &ToricWeight) -> Result<()> {
    if w_psi.n != w_phi.n || !w_psi.polytope.approx_eq(&w_phi.polytope, 1e-12) {
        return Err(Error::PolytopeMismatch);
    }
    Ok(())
}

/// Relative energy `𝓔(φ,ψ) = 2·n!·∫_Δ (g_ψ* − g_φ*) dλ`; equals `vol(L)` when `ψ' = ψ + 1`
/// is passed as `w_phi`.
///
/// Integrates over the polytope shrunk by `δ` and `2δ` and extrapolates linearly to `δ = 0`.
pub fn energy_legendre(w_psi: &ToricWeight, w_phi: &ToricWeight, opts: &EnergyOptions) -> Result<EnergyReport> {
    check_pair(w_psi, w_phi)?;
    let i1 = legendre_integral(w_psi, w_phi, opts.delta, opts)?;
    let i2 = legendre_integral(w_psi, w_phi, 2.0 * opts.delta, opts)?;
    let value = 2.0 * i1 - i2;
    Ok(EnergyReport {
        route: "legendre".into(),
        value,
        error_estimate: (i1 - value).abs(),
        normalization: NORMALIZATION.into(),
        notices: Vec::new(),
    })
}

/// Pushforward `g″ dx` of the Monge–Ampère measure of a one-dimensional weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ToricMeasure1D {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub mass: f64,
    pub expected_mass: f64,
    pub step: f64,
    pub notices: Vec<String>,
}

impl ToricMeasure1D {
    /// Mass carried by each grid node.
    pub fn node_masses(&self) -> impl Iterator<Item = f64> + '_ {
        self.density.iter().map(move |d| d * self.step)
    }

    pub fn integrate(&self, u: impl Fn(f64) -> f64) -> f64 {
        self.grid.iter().zip(self.node_masses()).map(|(x, m)| u(*x) * m).sum()
    }
}

fn slope_interval(w: &ToricWeight) -> (f64, f64) {
    (w.polytope.vertices[0][0], w.polytope.vertices.last().unwrap()[0])
}

/// Half-width beyond which the one-sided slopes of `g` match `∂Δ` within `1e-9`.
fn tail_radius(w: &ToricWeight, h: f64) -> (f64, bool) {
    let (a, b) = slope_interval(w);
    let mut r = 8.0;
    loop {
        let right = (w.eval(&[r]) - w.eval(&[r - h])) / h;
        let left = (w.eval(&[-r + h]) - w.eval(&[-r])) / h;
        if ((right - b).abs() <= 1e-9 && (left - a).abs() <= 1e-9) || r >= 512.0 {
            return (r, r < 512.0);
        }
        r *= 2.0;
    }
}

fn project_with_notice(w: &ToricWeight, notices: &mut Vec<String>) -> Result<ToricWeight> {
    if w.n != 1 {
        return Err(Error::Input("the Monge-Ampere route is one-dimensional".into()));
    }
    if w.convex {
        return Ok(w.clone());
    }
    notices.push(format!("weight {} is not convex; projected before use", w.name.as_deref().unwrap_or("(unnamed)")));
    psh_projection_toric(w)
}

fn measure_on(w: &ToricWeight, r: f64, h: f64, mut notices: Vec<String>) -> (ToricMeasure1D, Vec<f64>) {
    let n = (2.0 * r / h).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| -r + i as f64 * h).collect();
    let gs: Vec<f64> = xs.par_iter().map(|x| w.eval(&[*x])).collect();
    let mut density = vec![0.0; n + 1];
    let mut worst = 0.0f64;
    for i in 1..n {
        let d = (gs[i + 1] - 2.0 * gs[i] + gs[i - 1]) / (h * h);
        worst = worst.min(d);
        density[i] = d.max(0.0);
    }
    if worst < -1e-8 / h {
        notices.push(format!("clipped negative density {worst:e}"));
    }
    let mass: f64 = density.iter().sum::<f64>() * h;
    let (a, b) = slope_interval(w);
    if (mass - (b - a)).abs() > 1e-6 {
        notices.push(format!("pushforward mass {mass} differs from |Δ| = {}", b - a));
    }
    (ToricMeasure1D { grid: xs, density, mass, expected_mass: b - a, step: h, notices }, gs)
}

/// Density of `MA(P(ψ))` pushed to `ℝ` by second differences.
pub fn ma_pushforward_1d(w: &ToricWeight, step: f64) -> Result<ToricMeasure1D> {
    let mut notices = Vec::new();
    let wp = project_with_notice(w, &mut notices)?;
    let (r, ok) = tail_radius(&wp, step);
    if !ok {
        notices.push("slopes did not reach ∂Δ within |x| ≤ 512".into());
    }
    Ok(measure_on(&wp, r, step, notices).0)
}

fn ma_sum(psi: &ToricWeight, phi: &ToricWeight, h: f64) -> (f64, Vec<String>) {
    let r = tail_radius(psi, h).0.max(tail_radius(phi, h).0);
    let (mpsi, gpsi) = measure_on(psi, r, h, Vec::new());
    let (mphi, gphi) = measure_on(phi, r, h, Vec::new());
    let mut value = 0.0;
    for i in 0..gpsi.len() {
        value += (gphi[i] - gpsi[i]) * (mpsi.density[i] + mphi.density[i]) * h;
    }
    let notices = mpsi.notices.into_iter().chain(mphi.notices).collect();
    (value, notices)
}

/// Relative energy `∫ (g_φ − g_ψ)(g_ψ″ + g_φ″) dx` for `n = 1`, same orientation as
/// [`energy_legendre`].
pub fn energy_ma_1d(w_psi: &ToricWeight, w_phi: &ToricWeight, opts: &EnergyOptions) -> Result<EnergyReport> {
    check_pair(w_psi, w_phi)?;
    let mut notices = Vec::new();
    let psi = project_with_notice(w_psi, &mut notices)?;
    let phi = project_with_notice(w_phi, &mut notices)?;
    let h = opts.ma_step;
    let (fine, n1) = ma_sum(&psi, &phi, h);
    let (coarse, _) = ma_sum(&psi, &phi, 2.0 * h);
    notices.extend(n1);
    Ok(EnergyReport {
        route: "monge_ampere_1d".into(),
        value: fine,
        error_estimate: (fine - coarse).abs() / 3.0,
        normalization: super::NORMALIZATION.into(),
        notices,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeReport {
    pub t_step: f64,
    /// Central difference at `t_step`.
    pub fd_value: f64,
    /// Richardson combination of central differences at `t_step` and `t_step/2`.
    pub fd_richardson: f64,
    /// `∫ u d(MA(P(ψ)))`.
    pub formula_value: f64,
    pub difference: f64,
}

/// Checks `f′(0) = ∫ u MA(P(ψ))` for `f(t) = 𝓔(ψ + t u, φ)` with `n = 1`.
pub fn derivative_check_1d(
    w_psi: &ToricWeight,
    w_phi: &ToricWeight,
    u: &Expr,
    t_step: f64,
    opts: &EnergyOptions,
) -> Result<DerivativeReport> {
    check_pair(w_psi, w_phi)?;
    if w_psi.n != 1 {
        return Err(Error::Input("derivative check is one-dimensional".into()));
    }
    let f = |t: f64| -> Result<f64> {
        let g = w_psi.g.clone().plus(u.clone().scaled(t / 2.0));
        let mut wt = ToricWeight::new(1, w_psi.polytope.clone(), g, None)?;
        // A small smooth perturbation of a convex weight is handled by the same solver either way.
        wt.convex = w_psi.convex && wt.convex;
        Ok(energy_legendre(w_phi, &wt, opts)?.value)
    };
    let central = |t: f64| -> Result<f64> { Ok((f(t)? - f(-t)?) / (2.0 * t)) };
    let d1 = central(t_step)?;
    let d2 = central(t_step / 2.0)?;
    let fd_richardson = (4.0 * d2 - d1) / 3.0;
    let measure = ma_pushforward_1d(w_psi, opts.ma_step)?;
    let formula_value = measure.integrate(|x| u.eval(&[x]));
    Ok(DerivativeReport { t_step, fd_value: d1, fd_richardson, formula_value, difference: fd_richardson - formula_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Body;

    fn fs1() -> ToricWeight {
        ToricWeight::fubini_study(1, 1.0).unwrap()
    }

    fn bumped(t: f64) -> ToricWeight {
        // Convex for small t: the bump's curvature is dominated by that of g.
        let g = Expr::fubini_study(1.0).plus(Expr::QuadraticBump { amplitude: t, center: vec![0.3], radius: 1.5 });
        ToricWeight::new(1, Body::interval(0.0, 1.0), g, None).unwrap()
    }

    #[test]
    fn constant_shift_gives_volume() {
        let o = EnergyOptions::default();
        let psi = fs1();
        let phi = psi.plus_constant(1.0).unwrap();
        let e = energy_legendre(&psi, &phi, &o).unwrap();
        assert!((e.value - 1.0).abs() < 1e-9, "{e:?}");
        assert!(energy_legendre(&psi, &psi, &o).unwrap().value.abs() < 1e-12);
        let m = energy_ma_1d(&psi, &phi, &o).unwrap();
        assert!((m.value - 1.0).abs() < 1e-6, "{m:?}");
        assert!(energy_ma_1d(&psi, &psi, &o).unwrap().value.abs() < 1e-12);
        let p2 = ToricWeight::fubini_study(2, 1.0).unwrap();
        let e2 = energy_legendre(&p2, &p2.plus_constant(1.0).unwrap(), &o).unwrap();
        // Linear extrapolation in δ leaves the O(δ²) area defect of the shrunk triangle.
        assert!((e2.value - 1.0).abs() < 1e-6, "{e2:?}");
    }

    #[test]
    fn routes_agree_for_a_convex_bump() {
        let o = EnergyOptions::default();
        let (psi, phi) = (fs1(), bumped(0.02));
        assert!(phi.convex);
        let a = energy_legendre(&psi, &phi, &o).unwrap();
        let b = energy_ma_1d(&psi, &phi, &o).unwrap();
        assert!((a.value - b.value).abs() < 1e-3, "{} vs {}", a.value, b.value);
        assert!(a.value.abs() > 1e-3);
    }

    #[test]
    fn mismatched_polytopes_are_rejected() {
        let o = EnergyOptions::default();
        let a = fs1();
        let b = ToricWeight::fubini_study(1, 2.0).unwrap();
        assert!(matches!(energy_legendre(&a, &b, &o), Err(Error::PolytopeMismatch)));
    }

    #[test]
    fn pushforward_densities() {
        let m = ma_pushforward_1d(&fs1(), 1e-3).unwrap();
        assert!((m.mass - 1.0).abs() < 1e-6);
        for (x, d) in m.grid.iter().zip(&m.density).step_by(997).skip(1) {
            let e = (2.0 * x).exp();
            assert!((d - 2.0 * e / (1.0 + e).powi(2)).abs() < 1e-6, "{x}");
        }
        let cq = ToricWeight::new(1, Body::interval(0.0, 1.0), Expr::ClampedQuadratic { lo: 0.0, hi: 1.0, width: 2.0 }, None).unwrap();
        let m = ma_pushforward_1d(&cq, 1e-3).unwrap();
        assert!((m.mass - 1.0).abs() < 1e-6);
        let bulk: Vec<f64> = m.grid.iter().zip(&m.density).filter(|(x, _)| x.abs() < 0.9).map(|(_, d)| *d).collect();
        assert!(bulk.iter().all(|d| (d - 0.5).abs() < 1e-6));
        let pa = ToricWeight::new(1, Body::interval(0.0, 1.0), Expr::MaxAffine { pieces: vec![vec![0.0, 0.0], vec![0.5, 0.25], vec![1.0, 0.0]] }, None).unwrap();
        let m = ma_pushforward_1d(&pa, 1e-3).unwrap();
        assert!((m.mass - 1.0).abs() < 1e-6, "{}", m.mass);
        let atoms: Vec<(f64, f64)> = m.grid.iter().zip(m.node_masses()).filter(|(_, w)| *w > 1e-9).map(|(x, w)| (*x, w)).collect();
        assert_eq!(atoms.len(), 2);
        assert!((atoms[0].0 + 0.5).abs() < 1e-9 && (atoms[0].1 - 0.5).abs() < 1e-9);
        assert!((atoms[1].0 - 0.5).abs() < 1e-9 && (atoms[1].1 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn derivative_matches_pushforward_integral() {
        let o = EnergyOptions::default();
        let psi = fs1();
        let phi = bumped(0.02);
        let one = Expr::constant(1.0);
        let r = derivative_check_1d(&psi, &phi, &one, 1e-4, &o).unwrap();
        assert!((r.fd_value - 1.0).abs() < 1e-6 && (r.formula_value - 1.0).abs() < 1e-6, "{r:?}");
        let zero = Expr::constant(0.0);
        let r = derivative_check_1d(&psi, &phi, &zero, 1e-4, &o).unwrap();
        assert!(r.fd_value.abs() < 1e-12 && r.formula_value.abs() < 1e-12);
        let bump = Expr::QuadraticBump { amplitude: 1.0, center: vec![-0.2], radius: 1.0 };
        let r = derivative_check_1d(&psi, &phi, &bump, 1e-4, &o).unwrap();
        assert!(r.difference.abs() < 1e-3, "{r:?}");
    }
}
