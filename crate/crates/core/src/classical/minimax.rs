//! Discrete weighted min–max over monic polynomials.
//!
//! Real node sets use a multi-point Remez exchange in the Chebyshev basis of the
//! affinely normalized variable. Complex sets use Lawson's reweighted least squares,
//! which brackets the optimum between a weighted `L²` value and the current max.

use num_complex::Complex64;

use super::MonicPolynomial;
use crate::linalg::{lstsq_complex, solve};

const REMEZ_CAP: usize = 200;
const LAWSON_CAP: usize = 3000;
const REMEZ_TOL: f64 = 1e-12;
const LAWSON_TOL: f64 = 1e-6;
// Exponent of the multiplicative weight update; above 1 it converges faster in practice.
const LAWSON_EXPONENT: f64 = 1.5;
// Weights this far below the largest are dropped from the active set.
const LAWSON_PRUNE: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxResult {
    pub ln_value: f64,
    pub ln_lower_bound: f64,
    pub converged: bool,
    pub iterations: usize,
    pub polynomial: MonicPolynomial,
}

fn vanishing(points: &[Complex64], k: usize) -> MinimaxResult {
    // ∏(z − z_i) · z^{k−n} vanishes on every node.
    let mut c = vec![Complex64::new(1.0, 0.0)];
    let roots = points.iter().copied().chain(std::iter::repeat(Complex64::new(0.0, 0.0))).take(k);
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= ci * r;
        }
        c = next;
    }
    c.pop();
    MinimaxResult {
        ln_value: f64::NEG_INFINITY,
        ln_lower_bound: f64::NEG_INFINITY,
        converged: true,
        iterations: 0,
        polynomial: MonicPolynomial::new(c),
    }
}

fn constant(ln_w: &[f64]) -> MinimaxResult {
    let m = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    MinimaxResult { ln_value: m, ln_lower_bound: m, converged: true, iterations: 0, polynomial: MonicPolynomial::new(vec![]) }
}

/// Expands `R^k q((z − c)/R)` for `q` given by monomial coefficients `b` in `u`.
fn unnormalize(b: &[Complex64], c: Complex64, r: f64) -> MonicPolynomial {
    let k = b.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); k + 1];
    // (z − c)^i by repeated multiplication.
    let mut pow = vec![Complex64::new(1.0, 0.0)];
    for (i, bi) in b.iter().enumerate() {
        let scale = bi * r.powi((k - i) as i32);
        for (j, pj) in pow.iter().enumerate() {
            out[j] += scale * pj;
        }
        let mut next = vec![Complex64::new(0.0, 0.0); pow.len() + 1];
        for (j, pj) in pow.iter().enumerate() {
            next[j + 1] += pj;
            next[j] -= pj * c;
        }
        pow = next;
    }
    out.pop();
    MonicPolynomial::new(out)
}

/// `T_0..=T_k` at `u`.
fn chebyshev_row(u: f64, k: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(k + 1);
    t.push(1.0);
    if k >= 1 {
        t.push(u);
    }
    for j in 2..=k {
        t.push(2.0 * u * t[j - 1] - t[j - 2]);
    }
    t
}

/// Monomial coefficients of `Σ a_j T_j`.
fn chebyshev_to_monomial(a: &[f64]) -> Vec<f64> {
    let k = a.len() - 1;
    let mut out = vec![0.0; k + 1];
    let (mut prev, mut cur) = (vec![1.0], vec![0.0, 1.0]);
    out[0] += a[0];
    if k >= 1 {
        out[1] += a[1];
    }
    for aj in a.iter().skip(2) {
        let mut next = vec![0.0; cur.len() + 1];
        for (i, v) in cur.iter().enumerate() {
            next[i + 1] += 2.0 * v;
        }
        for (i, v) in prev.iter().enumerate() {
            next[i] -= v;
        }
        for (i, v) in next.iter().enumerate() {
            out[i] += aj * v;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    out
}

/// Picks `k + 1` alternating extrema containing the global maximum.
fn next_reference(e: &[f64], k: usize) -> Vec<usize> {
    let mut ext: Vec<usize> = Vec::new();
    for (i, &v) in e.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        match ext.last() {
            Some(&j) if (e[j] > 0.0) == (v > 0.0) => {
                if v.abs() > e[j].abs() {
                    *ext.last_mut().unwrap() = i;
                }
            }
            _ => ext.push(i),
        }
    }
    while ext.len() > k + 1 {
        let excess = ext.len() - (k + 1);
        let s = ext.len();
        if excess == 1 {
            if e[ext[0]].abs() < e[ext[s - 1]].abs() {
                ext.remove(0);
            } else {
                ext.pop();
            }
            continue;
        }
        let (i, _) = ext.iter().enumerate().min_by(|a, b| e[*a.1].abs().total_cmp(&e[*b.1].abs())).unwrap();
        if i == 0 || i == s - 1 {
            ext.remove(i);
        } else {
            let drop_left = e[ext[i - 1]].abs() < e[ext[i + 1]].abs();
            ext.remove(i);
            ext.remove(if drop_left { i - 1 } else { i });
        }
    }
    ext
}

/// Exchange state in the Chebyshev basis of `u = (x − c)/r`, weights scaled by `e^{−shift}`.
struct Exchange {
    coeffs: Vec<f64>,
    upper: f64,
    lower: f64,
    level: f64,
    converged: bool,
    iterations: usize,
}

/// Solves the levelled system `w_j p(u_j) = (−1)^{j+1} L` on a reference.
fn levelled(rows: &[(f64, Vec<f64>)], k: usize, lead: f64) -> Option<(Vec<f64>, f64)> {
    let mut a = Vec::with_capacity(k + 1);
    let mut b = Vec::with_capacity(k + 1);
    for (j, (w, t)) in rows.iter().enumerate() {
        let mut row: Vec<f64> = t[..k].iter().map(|v| w * v).collect();
        row.push(if j % 2 == 0 { -1.0 } else { 1.0 });
        a.push(row);
        b.push(-w * lead * t[k]);
    }
    let sol = solve(a, b)?;
    let mut coeffs = sol[..k].to_vec();
    coeffs.push(lead);
    Some((coeffs, sol[k].abs()))
}

fn dot(t: &[f64], c: &[f64]) -> f64 {
    t.iter().zip(c).map(|(a, b)| a * b).sum()
}

/// Discrete Remez exchange on sorted nodes `us ⊂ [−1, 1]`.
fn remez_grid(us: &[f64], w: &[f64], k: usize) -> Exchange {
    let n = us.len();
    let lead = 2f64.powi(1 - k as i32);
    let table: Vec<Vec<f64>> = us.iter().map(|&u| chebyshev_row(u, k)).collect();
    let mut reference: Vec<usize> = (0..=k)
        .map(|j| {
            let target = -(std::f64::consts::PI * j as f64 / k as f64).cos();
            us.partition_point(|&v| v < target).min(n - 1)
        })
        .collect();
    for j in 1..=k {
        reference[j] = reference[j].max(reference[j - 1] + 1);
    }
    reference[k] = reference[k].min(n - 1);
    for j in (0..k).rev() {
        reference[j] = reference[j].min(reference[j + 1] - 1);
    }

    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    let mut lower = 0.0f64;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=REMEZ_CAP {
        iterations = it;
        let rows: Vec<(f64, Vec<f64>)> = reference.iter().map(|&i| (w[i], table[i].clone())).collect();
        let Some((coeffs, level)) = levelled(&rows, k, lead) else { break };
        lower = lower.max(level);
        let e: Vec<f64> = table.iter().zip(w).map(|(t, wi)| wi * dot(t, &coeffs)).collect();
        let emax = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if best.as_ref().is_none_or(|b| emax < b.0) {
            best = Some((emax, level, coeffs));
        }
        if emax - level <= REMEZ_TOL * emax {
            converged = true;
            break;
        }
        let next = next_reference(&e, k);
        if next.len() != k + 1 || next == reference {
            break;
        }
        reference = next;
    }
    let (upper, level, coeffs) = best.expect("at least one exchange step");
    Exchange { coeffs, upper, lower, level, converged, iterations }
}

/// Golden-section maximization of `f` on `[lo, hi]`, never worse than the start `x0`.
fn golden_max(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, x0: f64) -> (f64, f64) {
    const G: f64 = 0.618_033_988_749_895;
    let (mut a, mut b) = (lo, hi);
    let (mut x1, mut x2) = (b - G * (b - a), a + G * (b - a));
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > 1e-13 * (1.0 + a.abs().max(b.abs())) {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + G * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - G * (b - a);
            f1 = f(x1);
        }
    }
    [(f(x0), x0), (f1, x1), (f2, x2), (f(lo), lo), (f(hi), hi)].into_iter().fold((f64::NEG_INFINITY, x0), |m, c| if c.0 > m.0 { c } else { m })
}

/// Continuous exchange on `[−1, 1]`: the nodes locate the extrema of the error, which are
/// then polished by local maximization before re-levelling.
fn remez_continuous(us: &[f64], weight: &dyn Fn(f64) -> f64, k: usize, start: Exchange) -> Exchange {
    let n = us.len();
    let lead = 2f64.powi(1 - k as i32);
    let err = |c: &[f64], u: f64| weight(u) * dot(&chebyshev_row(u, k), c);
    let mut coeffs = start.coeffs.clone();
    let mut level = start.level;
    let mut lower = start.lower;
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut converged = false;
    let mut iterations = start.iterations;
    for _ in 0..REMEZ_CAP {
        iterations += 1;
        let e: Vec<f64> = us.iter().map(|&u| err(&coeffs, u)).collect();
        let mut ext_u = Vec::new();
        let mut ext_v = Vec::new();
        for i in 0..n {
            let left = if i > 0 { e[i - 1].abs() } else { -1.0 };
            let right = if i + 1 < n { e[i + 1].abs() } else { -1.0 };
            if e[i] == 0.0 || e[i].abs() < left || e[i].abs() < right {
                continue;
            }
            let s = e[i].signum();
            let (v, u) = golden_max(&|u| s * err(&coeffs, u), us[i.saturating_sub(1)], us[(i + 1).min(n - 1)], us[i]);
            ext_u.push(u);
            ext_v.push(s * v);
        }
        let emax = ext_v.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if best.as_ref().is_none_or(|b| emax < b.0) {
            best = Some((emax, coeffs.clone()));
        }
        if emax - level <= REMEZ_TOL * emax {
            converged = true;
            break;
        }
        let refi = next_reference(&ext_v, k);
        if refi.len() != k + 1 {
            break;
        }
        let rows: Vec<(f64, Vec<f64>)> = refi.iter().map(|&j| (weight(ext_u[j]), chebyshev_row(ext_u[j], k))).collect();
        let Some((c, l)) = levelled(&rows, k, lead) else { break };
        if l <= level * (1.0 + 1e-15) && iterations > start.iterations + 1 {
            // The level no longer increases: rounding floor reached.
            converged = emax - level <= 1e-9 * emax;
            break;
        }
        coeffs = c;
        level = l;
        lower = lower.max(l);
    }
    let (upper, coeffs) = best.expect("at least one continuous step");
    Exchange { coeffs, upper, lower, level, converged, iterations }
}

fn finish(x: &Exchange, k: usize, c: f64, r: f64, shift: f64) -> MinimaxResult {
    let mut converged = x.converged;
    if !converged && (x.upper - x.lower) <= LAWSON_TOL * x.upper {
        converged = true;
    }
    let mono: Vec<Complex64> = chebyshev_to_monomial(&x.coeffs).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let scale = shift + k as f64 * r.ln();
    MinimaxResult {
        ln_value: scale + x.upper.ln(),
        ln_lower_bound: scale + x.lower.min(x.upper).ln(),
        converged,
        iterations: x.iterations,
        polynomial: unnormalize(&mono, Complex64::new(c, 0.0), r),
    }
}

/// Sorted distinct nodes with their log weights.
fn sorted_nodes(x: &[f64], ln_w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    idx.dedup_by(|a, b| x[*a] == x[*b]);
    (idx.iter().map(|&i| x[i]).collect(), idx.iter().map(|&i| ln_w[i]).collect())
}

/// Min over monic `p` of `max_i e^{ln_w_i} |p(x_i)|` for real nodes.
pub fn minimax_real(x: &[f64], ln_w: &[f64], k: usize) -> MinimaxResult {
    let (xs, lw) = sorted_nodes(x, ln_w);
    let n = xs.len();
    if k == 0 {
        return constant(&lw);
    }
    if n <= k {
        return vanishing(&xs.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>(), k);
    }
    let (c, r) = ((xs[0] + xs[n - 1]) / 2.0, (xs[n - 1] - xs[0]) / 2.0);
    let shift = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|v| (v - shift).exp()).collect();
    let us: Vec<f64> = xs.iter().map(|v| (v - c) / r).collect();
    finish(&remez_grid(&us, &w, k), k, c, r, shift)
}

/// Min over monic `p` of `sup_{x ∈ [a, b]} e^{ln_w(x)} |p(x)|`, where `grid` (containing both
/// ends) is fine enough to separate the extrema of the optimal error.
pub fn minimax_interval(grid: &[f64], ln_w: &dyn Fn(f64) -> f64, k: usize) -> MinimaxResult {
    let lw: Vec<f64> = grid.iter().map(|&x| ln_w(x)).collect();
    let (xs, lw) = sorted_nodes(grid, &lw);
    let n = xs.len();
    if k == 0 || n <= k + 1 {
        return minimax_real(&xs, &lw, k);
    }
    let (c, r) = ((xs[0] + xs[n - 1]) / 2.0, (xs[n - 1] - xs[0]) / 2.0);
    let shift = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = lw.iter().map(|v| (v - shift).exp()).collect();
    let us: Vec<f64> = xs.iter().map(|v| (v - c) / r).collect();
    let start = remez_grid(&us, &w, k);
    let weight = |u: f64| (ln_w(c + r * u) - shift).exp();
    finish(&remez_continuous(&us, &weight, k, start), k, c, r, shift)
}

/// Lawson-type iteration for `min_a max_i w_i |t_i + Σ_j a_j φ_j(z_i)|`; `columns[j][i] = φ_j(z_i)`.
pub(crate) struct Lawson {
    pub coefficients: Vec<Complex64>,
    pub upper: f64,
    pub lower: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub(crate) fn lawson(columns: &[Vec<Complex64>], target: &[Complex64], w: &[f64]) -> Lawson {
    let n = target.len();
    let m = columns.len();
    let mut lambda = vec![1.0 / n as f64; n];
    let mut best = Lawson { coefficients: vec![Complex64::new(0.0, 0.0); m], upper: f64::INFINITY, lower: 0.0, converged: false, iterations: 0 };
    if m == 0 {
        best.upper = target.iter().zip(w).map(|(t, wi)| wi * t.norm()).fold(0.0, f64::max);
        best.lower = best.upper;
        best.converged = true;
        return best;
    }
    let mut a = Vec::with_capacity(n * m);
    let mut b = Vec::with_capacity(n);
    for it in 1..=LAWSON_CAP {
        best.iterations = it;
        a.clear();
        b.clear();
        let mut active = 0;
        for i in (0..n).filter(|&i| lambda[i] > 0.0) {
            let s = lambda[i].sqrt() * w[i];
            a.extend(columns.iter().map(|c| c[i] * s));
            b.push(-target[i] * s);
            active += 1;
        }
        let Some(coef) = (if active >= m { lstsq_complex(&a, active, m, &b) } else { None }) else { break };
        let res: Vec<f64> = (0..n)
            .map(|i| w[i] * (target[i] + (0..m).map(|j| coef[j] * columns[j][i]).sum::<Complex64>()).norm())
            .collect();
        // Any probability vector λ gives a weighted L² lower bound for the min–max.
        let l2 = res.iter().zip(&lambda).map(|(r, l)| l * r * r).sum::<f64>().sqrt();
        let upper = res.iter().copied().fold(0.0, f64::max);
        best.lower = best.lower.max(l2);
        if upper < best.upper {
            best.upper = upper;
            best.coefficients = coef;
        }
        if best.upper - best.lower <= LAWSON_TOL * best.upper {
            best.converged = true;
            break;
        }
        for (l, r) in lambda.iter_mut().zip(&res) {
            *l *= (r / upper).powf(LAWSON_EXPONENT);
        }
        let total: f64 = lambda.iter().sum();
        if !(total > 0.0) {
            break;
        }
        let floor = LAWSON_PRUNE * lambda.iter().copied().fold(0.0, f64::max);
        for l in lambda.iter_mut() {
            *l = if *l < floor { 0.0 } else { *l / total };
        }
        let total: f64 = lambda.iter().sum();
        lambda.iter_mut().for_each(|l| *l /= total);
    }
    best.lower = best.lower.min(best.upper);
    best
}

/// Min over monic `p` of `max_i e^{ln_w_i} |p(z_i)|` for complex nodes.
pub fn minimax_complex(z: &[Complex64], ln_w: &[f64], k: usize) -> MinimaxResult {
    let n = z.len();
    if k == 0 {
        return constant(ln_w);
    }
    if n <= k {
        return vanishing(z, k);
    }
    let c = z.iter().sum::<Complex64>() / n as f64;
    let r = z.iter().map(|v| (v - c).norm()).fold(0.0, f64::max);
    let shift = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ln_w.iter().map(|v| (v - shift).exp()).collect();
    let u: Vec<Complex64> = z.iter().map(|v| (v - c) / r).collect();
    let columns: Vec<Vec<Complex64>> = (0..k).map(|j| u.iter().map(|v| v.powu(j as u32)).collect()).collect();
    let target: Vec<Complex64> = u.iter().map(|v| v.powu(k as u32)).collect();
    let l = lawson(&columns, &target, &w);
    let mut mono = l.coefficients.clone();
    mono.push(Complex64::new(1.0, 0.0));
    let scale = shift + k as f64 * r.ln();
    MinimaxResult {
        ln_value: scale + l.upper.ln(),
        ln_lower_bound: scale + l.lower.ln(),
        converged: l.converged,
        iterations: l.iterations,
        polynomial: unnormalize(&mono, c, r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remez_reproduces_chebyshev_polynomial() {
        let x = super::super::lobatto_nodes(-1.0, 1.0, 200);
        let r = minimax_real(&x, &vec![0.0; x.len()], 5);
        assert!(r.converged);
        assert!((r.ln_value - (-4.0 * 2f64.ln())).abs() < 1e-10);
        // 2^{-4} T_5 = x^5 − 5/4 x^3 + 5/16 x.
        let c = &r.polynomial.coefficients;
        assert!((c[3].re + 1.25).abs() < 1e-9 && (c[1].re - 0.3125).abs() < 1e-9 && c[0].norm() < 1e-9);
    }

    #[test]
    fn weighted_remez_equioscillates() {
        let x = super::super::lobatto_nodes(-1.0, 1.0, 400);
        let lw: Vec<f64> = x.iter().map(|v| 6.0 * 0.5 * v).collect();
        let r = minimax_real(&x, &lw, 6);
        assert!(r.converged && r.ln_value - r.ln_lower_bound < 1e-9);
        let p = &r.polynomial;
        let e: Vec<f64> = x.iter().zip(&lw).map(|(v, l)| l.exp() * p.eval(Complex64::new(*v, 0.0)).re).collect();
        let max = e.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((max.ln() - r.ln_value).abs() < 1e-9);
        // k + 1 sign alternations at the level.
        let mut flips = 0;
        let mut last = 0.0;
        for v in e.iter().filter(|v| v.abs() > max * (1.0 - 1e-6)) {
            if last * v < 0.0 {
                flips += 1;
            }
            last = *v;
        }
        assert!(flips >= 6, "{flips}");
    }

    #[test]
    fn continuous_exchange_is_grid_independent() {
        let lw = |x: f64| -6.0 * 0.98 * x;
        let value = |n: usize| {
            let g = super::super::lobatto_nodes(0.0, 2.84, n);
            minimax_interval(&g, &lw, 6)
        };
        let (coarse, fine) = (value(96), value(768));
        assert!(coarse.converged && fine.converged);
        assert!((coarse.ln_value - fine.ln_value).abs() < 1e-10, "{} {}", coarse.ln_value, fine.ln_value);
        assert!(fine.ln_value - fine.ln_lower_bound < 1e-10);
        // Dense independent sample never exceeds the reported sup.
        let p = &fine.polynomial;
        let dense = (0..=100_000)
            .map(|i| {
                let x = 2.84 * i as f64 / 100_000.0;
                lw(x) + p.eval(Complex64::new(x, 0.0)).norm().ln()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(dense <= fine.ln_value + 1e-10 && dense > fine.ln_value - 1e-6, "{dense} {}", fine.ln_value);
        // The node-only value is a lower bound for the sup over the interval.
        let g = super::super::lobatto_nodes(0.0, 2.84, 96);
        let lwv: Vec<f64> = g.iter().map(|&x| lw(x)).collect();
        assert!(minimax_real(&g, &lwv, 6).ln_value <= coarse.ln_value + 1e-12);
    }

    #[test]
    fn continuous_exchange_keeps_chebyshev_values() {
        let g = super::super::lobatto_nodes(-1.0, 1.0, 37);
        for k in 1..=8 {
            let r = minimax_interval(&g, &|_| 0.0, k);
            assert!((r.ln_value - (1.0 - k as f64) * 2f64.ln()).abs() < 1e-10, "{k}: {}", r.ln_value);
        }
    }

    #[test]
    fn lawson_on_square_vertices() {
        let z: Vec<Complex64> = (0..4).map(|j| Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * j as f64 + 0.3)).collect();
        let r = minimax_complex(&z, &[0.0; 4], 2);
        assert!(r.converged && r.ln_value.abs() < 1e-6);
        let deg = minimax_complex(&z, &[0.0; 4], 4);
        assert!(deg.ln_value == f64::NEG_INFINITY);
        for v in &z {
            assert!(deg.polynomial.eval(*v).norm() < 1e-12);
        }
    }
}
