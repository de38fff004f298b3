//! Gram matrices of monomial sections in `L²(e^{−kψ}μ)`, minimal leading-term sections,
//! discrete Chebyshev fields and the Donaldson `𝓛ₖ` functional.
//!
//! In logarithmic coordinates `|z^β|² e^{−kψ} = e^{2⟨β,x⟩ − 2k g(x)}`, so a torus-invariant
//! weight and measure give a diagonal Gram matrix with entries
//! `∫ e^{2⟨β,x⟩ − 2k g(x)} ρ(x) dx`.

mod dense;
mod factor;
mod ladder;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dense::{dense_gram_p1, AngularPerturbation, DenseOptions, DenseWeight};
pub use factor::{minimal_sections, Conditioning, GramFactorization, GramMatrix};
pub use ladder::{
    discrete_chebyshev_field, discrete_chebyshev_values, donaldson_lk, donaldson_lk_dense, lk_ladder, sandwich_check,
    DiscreteValues, LadderReport, LadderRow, LkValue, SandwichReport, SandwichViolation,
};

use crate::error::{Error, Result};
use crate::optimize::maximize;
use crate::quadrature::Rule1d;
use crate::scalar::LogSumExp;
use crate::toric::ToricWeight;
use crate::Body;

/// Additive order on exponents used to define leading terms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonomialOrder {
    /// Lexicographic order on the exponent vector.
    #[default]
    Lex,
    /// Reversal of graded-lex on the exponents seen from the opposite affine chart:
    /// `a <₂ b` iff `z(b) <₁ z(a)` with `z(a) = (a₁, …, a_{n−1}, k − |a|)`.
    Inverse,
}

fn graded_lex(a: &[i64], b: &[i64]) -> Ordering {
    a.iter().sum::<i64>().cmp(&b.iter().sum::<i64>()).then_with(|| a.cmp(b))
}

impl MonomialOrder {
    pub fn compare(self, a: &[i64], b: &[i64], k: u32) -> Ordering {
        match self {
            Self::Lex => a.cmp(b),
            Self::Inverse => {
                let z = |e: &[i64]| {
                    let mut v = e[1..].to_vec();
                    v.push(k as i64 - e.iter().sum::<i64>());
                    v
                };
                graded_lex(&z(b), &z(a))
            }
        }
    }
}

/// Monomial sections of level `k`, sorted increasingly by `order`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonomialBasis {
    pub k: u32,
    pub exponents: Vec<Vec<i64>>,
    pub order: MonomialOrder,
}

impl MonomialBasis {
    /// Lattice points of `kΔ`.
    pub fn toric(body: &Body, k: u32, order: MonomialOrder) -> Self {
        let mut exponents = body.lattice_points_scaled(k);
        exponents.sort_by(|a, b| order.compare(a, b, k));
        exponents.dedup();
        Self { k, exponents, order }
    }

    /// Exponents of total degree `≤ k` in `n` variables (sections of `𝒪(k)` on `ℙⁿ`).
    pub fn projective(n: usize, k: u32, order: MonomialOrder) -> Result<Self> {
        Ok(Self::toric(&Body::simplex(n, 1.0)?, k, order))
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Normalized points `β/k` (the origin for `k = 0`).
    pub fn alphas(&self) -> Vec<Vec<f64>> {
        let k = self.k.max(1) as f64;
        self.exponents.iter().map(|e| e.iter().map(|&v| v as f64 / k).collect()).collect()
    }
}

/// Torus-invariant probability measure `ρ(x) dx` on `ℝⁿ` (log coordinates).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Measure {
    /// `ρ = ∏ sech^{2c}(x_i) / I_c`, i.e. `e^{−2g₀}` with `g₀ = c Σ ln cosh x_i`, whose
    /// slope range `(−c, c)ⁿ` contains the slope polytopes used here.
    SechPower { c: u32 },
}

impl Default for Measure {
    fn default() -> Self {
        Self::SechPower { c: 2 }
    }
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

impl Measure {
    pub fn name(&self) -> String {
        match self {
            Self::SechPower { c } => format!("sech^{}", 2 * c),
        }
    }

    /// `ln ∫ sech^{2c} = ln(4^c c! (c−1)! / (2c)!)`.
    fn ln_norm_1d(c: u32) -> f64 {
        let lf = |m: u32| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
        c as f64 * 4f64.ln() + lf(c) + lf(c - 1) - lf(2 * c)
    }

    pub fn ln_density(&self, x: &[f64]) -> f64 {
        match *self {
            Self::SechPower { c } => {
                let norm = Self::ln_norm_1d(c);
                x.iter().map(|&t| -2.0 * c as f64 * ln_cosh(t) - norm).sum()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::SechPower { c } if *c == 0 => Err(Error::Input("sech power must be positive".into())),
            _ => Ok(()),
        }
    }
}

/// Fixed tensor rule with the density folded into the weights.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub density: String,
}

impl QuadratureRule {
    /// Composite Gauss–Legendre on `[−half_width, half_width]ⁿ`.
    pub fn fixed(mu: &Measure, n: usize, half_width: f64, panels: usize, order: usize) -> Self {
        let r = Rule1d::<f64>::composite(-half_width, half_width, panels, order);
        let m = r.nodes.len();
        let mut nodes = Vec::with_capacity(m.pow(n as u32));
        let mut weights = Vec::with_capacity(m.pow(n as u32));
        for idx in 0..m.pow(n as u32) {
            let mut rem = idx;
            let mut x = Vec::with_capacity(n);
            let mut w = 1.0;
            for _ in 0..n {
                x.push(r.nodes[rem % m]);
                w *= r.weights[rem % m];
                rem /= m;
            }
            weights.push(w * mu.ln_density(&x).exp());
            nodes.push(x);
        }
        Self { nodes, weights, density: mu.name() }
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// `ln Σ w_j e^{f(x_j)}`.
    pub fn ln_integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut acc = LogSumExp::<f64>::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            if *w > 0.0 {
                acc.push(w.ln() + f(x));
            }
        }
        acc.value()
    }
}

/// Exponent `2⟨β,x⟩ − 2k g(x)` of a diagonal Gram entry (density excluded).
fn entry_exponent<'a>(w: &'a ToricWeight, beta: &'a [i64], k: u32) -> impl Fn(&[f64]) -> f64 + 'a {
    move |x: &[f64]| 2.0 * beta.iter().zip(x).map(|(b, t)| *b as f64 * t).sum::<f64>() - 2.0 * k as f64 * w.eval(x)
}

/// Drop in the exponent beyond which the integrand is neglected.
const WINDOW_DROP: f64 = 60.0;

/// `ln ∫ e^{E(x)} dx` on `ℝⁿ` for an exponent with a dominant peak: locate the maximum,
/// grow a box until `E` on its boundary is `WINDOW_DROP` below the peak, then refine a
/// composite Gauss rule until the logarithm is stable.
pub fn ln_integral_adaptive(e: &(dyn Fn(&[f64]) -> f64 + Sync), n: usize) -> Result<f64> {
    let far = vec![200.0; n];
    let lo: Vec<f64> = far.iter().map(|v| -v).collect();
    let peak = maximize(e, None, &lo, &far);
    let top = peak.value;
    if !top.is_finite() {
        return Err(Error::Numerical("integrand exponent is not finite".into()));
    }
    let mut a = vec![0.0; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for (sign, out) in [(-1.0, &mut a), (1.0, &mut b)] {
            let mut x = peak.argmax.clone();
            let mut steps = 0;
            while e(&x) > top - WINDOW_DROP && steps < 1600 {
                x[i] += sign * 0.25;
                steps += 1;
            }
            out[i] = x[i] + sign * 0.5;
        }
    }
    if n > 1 {
        // Axis scans underestimate tilted level sets; widen until the box boundary is low.
        for _ in 0..20 {
            let samples = 64;
            let mut high = false;
            for i in 0..n {
                for side in [a[i], b[i]] {
                    for s in 0..=samples {
                        let mut x: Vec<f64> = (0..n).map(|j| a[j] + (b[j] - a[j]) * s as f64 / samples as f64).collect();
                        x[i] = side;
                        if n > 2 {
                            x.iter_mut().enumerate().filter(|(j, _)| *j != i).for_each(|(j, v)| *v = peak.argmax[j]);
                        }
                        high |= e(&x) > top - WINDOW_DROP;
                    }
                }
            }
            if !high {
                break;
            }
            for i in 0..n {
                let (c, h) = (0.5 * (a[i] + b[i]), 0.75 * (b[i] - a[i]));
                a[i] = c - h;
                b[i] = c + h;
            }
        }
    }
    let order = 16;
    let (mut panels, cap) = if n == 1 { (4usize, 1024usize) } else { (2, 48) };
    let mut last = f64::NAN;
    loop {
        let rules: Vec<Rule1d<f64>> = (0..n).map(|i| Rule1d::composite(a[i], b[i], panels, order)).collect();
        let m = panels * order;
        let total = m.pow(n as u32);
        let sum: f64 = (0..total)
            .into_par_iter()
            .with_min_len(256)
            .map(|idx| {
                let mut rem = idx;
                let mut x = Vec::with_capacity(n);
                let mut w = 1.0;
                for r in &rules {
                    x.push(r.nodes[rem % m]);
                    w *= r.weights[rem % m];
                    rem /= m;
                }
                w * (e(&x) - top).exp()
            })
            .sum();
        let value = top + sum.ln();
        if (value - last).abs() <= 1e-13 * value.abs().max(1.0) || panels >= cap {
            return Ok(value);
        }
        last = value;
        panels *= 2;
    }
}

/// `ln G_ββ` for every basis element by adaptive windowed quadrature.
pub fn gram_diagonal(basis: &MonomialBasis, w: &ToricWeight, mu: &Measure) -> Result<Vec<f64>> {
    mu.validate()?;
    if basis.exponents.first().is_some_and(|e| e.len() != w.n) {
        return Err(Error::Input("basis and weight dimensions differ".into()));
    }
    basis
        .exponents
        .par_iter()
        .map(|beta| {
            let f = entry_exponent(w, beta, basis.k);
            ln_integral_adaptive(&|x: &[f64]| f(x) + mu.ln_density(x), w.n)
        })
        .collect()
}

/// `ln G_ββ` with a fixed rule (independent oracle for [`gram_diagonal`]).
pub fn gram_diagonal_fixed(basis: &MonomialBasis, w: &ToricWeight, rule: &QuadratureRule) -> Vec<f64> {
    basis.exponents.par_iter().map(|beta| rule.ln_integrate(entry_exponent(w, beta, basis.k))).collect()
}

/// Gram matrix of an invariant weight and measure: diagonal, off-diagonal entries vanish.
pub fn gram_matrix(basis: &MonomialBasis, w: &ToricWeight, mu: &Measure) -> Result<GramMatrix> {
    Ok(GramMatrix::diagonal(gram_diagonal(basis, w, mu)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_sort_bases() {
        let b = MonomialBasis::projective(2, 2, MonomialOrder::Lex).unwrap();
        assert_eq!(b.len(), 6);
        assert_eq!(b.exponents[0], vec![0, 0]);
        assert_eq!(b.exponents[5], vec![2, 0]);
        let inv = MonomialBasis::projective(2, 2, MonomialOrder::Inverse).unwrap();
        for w in inv.exponents.windows(2) {
            assert_eq!(MonomialOrder::Inverse.compare(&w[0], &w[1], 2), Ordering::Less);
        }
        // A positive first coordinate makes an exponent larger than any with zero first coordinate.
        for a in inv.exponents.iter().filter(|e| e[0] == 0) {
            for b in inv.exponents.iter().filter(|e| e[0] > 0) {
                assert_eq!(MonomialOrder::Inverse.compare(a, b, 2), Ordering::Less, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn measure_is_a_probability() {
        let mu = Measure::default();
        let r = QuadratureRule::fixed(&mu, 1, 40.0, 400, 16);
        assert!((r.mass() - 1.0).abs() < 1e-13);
        let r2 = QuadratureRule::fixed(&Measure::SechPower { c: 3 }, 2, 30.0, 120, 8);
        assert!((r2.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn level_zero_gram_is_one() {
        let w = ToricWeight::fubini_study(1, 1.0).unwrap();
        let b = MonomialBasis::projective(1, 0, MonomialOrder::Lex).unwrap();
        let d = gram_diagonal(&b, &w, &Measure::default()).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d[0].abs() < 1e-13);
    }

    #[test]
    fn adaptive_and_fixed_rules_agree() {
        let w = ToricWeight::fubini_study(1, 1.0).unwrap();
        let mu = Measure::default();
        let rule = QuadratureRule::fixed(&mu, 1, 40.0, 400, 16);
        for k in [1, 7, 40] {
            let b = MonomialBasis::projective(1, k, MonomialOrder::Lex).unwrap();
            let a = gram_diagonal(&b, &w, &mu).unwrap();
            let f = gram_diagonal_fixed(&b, &w, &rule);
            for (x, y) in a.iter().zip(&f) {
                assert!((x.exp() - y.exp()).abs() <= 1e-10 * x.exp().max(1e-300) + 1e-300 && (x - y).abs() < 1e-10, "{k}: {x} {y}");
            }
        }
        let w2 = ToricWeight::fubini_study(2, 1.0).unwrap();
        let b2 = MonomialBasis::projective(2, 3, MonomialOrder::Lex).unwrap();
        let rule2 = QuadratureRule::fixed(&mu, 2, 30.0, 120, 8);
        let a = gram_diagonal(&b2, &w2, &mu).unwrap();
        let f = gram_diagonal_fixed(&b2, &w2, &rule2);
        for (x, y) in a.iter().zip(&f) {
            assert!((x - y).abs() < 1e-9, "{x} {y}");
        }
    }
}
