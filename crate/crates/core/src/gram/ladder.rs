//! Discrete Chebyshev fields `c_k`, the Donaldson functional `𝓛ₖ` and the sandwich estimate.

use rayon::prelude::*;
use serde::Serialize;

use super::{
    dense_gram_p1, gram_diagonal, minimal_sections, DenseOptions, DenseWeight, GramFactorization, GramMatrix, Measure,
    MonomialBasis, MonomialOrder,
};
use crate::envelope::{ChebyshevField, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::factorial;
use crate::toric::{legendre, legendre_closure, ToricWeight, NORMALIZATION};

/// `c_k(α) = (1/k) ln ‖t_{kα,k}‖²` on the lattice points of `kΔ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteValues {
    pub k: u32,
    pub alphas: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub factorization: GramFactorization,
}

pub fn discrete_chebyshev_values(w: &ToricWeight, mu: &Measure, k: u32, order: MonomialOrder) -> Result<DiscreteValues> {
    if k == 0 {
        return Err(Error::Input("discrete Chebyshev transform needs k ≥ 1".into()));
    }
    let basis = MonomialBasis::toric(&w.polytope, k, order);
    let g = GramMatrix::diagonal(gram_diagonal(&basis, w, mu)?);
    let factorization = minimal_sections(&g, k, basis.exponents.clone(), order)?;
    let values = factorization.log_diag.iter().map(|v| v / k as f64).collect();
    Ok(DiscreteValues { k, alphas: basis.alphas(), values, factorization })
}

/// `c_k` placed on the grid of spacing `1/k` over the slope polytope.
pub fn discrete_chebyshev_field(w: &ToricWeight, mu: &Measure, k: u32) -> Result<ChebyshevField<f64>> {
    let dv = discrete_chebyshev_values(w, mu, k, MonomialOrder::Lex)?;
    let lookup: std::collections::HashMap<Vec<i64>, f64> =
        dv.factorization.exponents.iter().cloned().zip(dv.values.iter().cloned()).collect();
    let kf = k as f64;
    let mut field = ChebyshevField::grid(&w.polytope, GridSpec::new(1.0 / kf, 0))?.fill(|x| {
        let beta: Vec<i64> = x.iter().map(|v| (v * kf).round() as i64).collect();
        if x.iter().zip(&beta).any(|(v, b)| (v * kf - *b as f64).abs() > 1e-6) {
            return None;
        }
        lookup.get(&beta).copied()
    });
    field.horizon = Some(k);
    Ok(field)
}

/// `𝓛ₖ` in the sum form `(n!/kⁿ) Σ (c_k[ψ] − c_k[φ])` and the determinant form
/// `(n!/(2k^{n+1})) (ln det G_ψ − ln det G_φ)`, with their ratio.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LkValue {
    pub k: u32,
    pub sum_form: f64,
    pub det_form: f64,
    /// `sum_form / det_form` when the latter is nonzero.
    pub constant: Option<f64>,
}

fn lk_from(n: usize, k: u32, fpsi: &GramFactorization, fphi: &GramFactorization, ln_det_psi: f64, ln_det_phi: f64) -> LkValue {
    let kf = k as f64;
    let nf = factorial::<f64>(n);
    let diff: f64 = fpsi.log_diag.iter().zip(&fphi.log_diag).map(|(a, b)| (a - b) / kf).sum();
    let sum_form = nf / kf.powi(n as i32) * diff;
    let det_form = nf / (2.0 * kf.powi(n as i32 + 1)) * (ln_det_psi - ln_det_phi);
    let constant = (det_form.abs() > 1e-300).then(|| sum_form / det_form);
    LkValue { k, sum_form, det_form, constant }
}

/// `𝓛ₖ(φ, ψ)` for torus-invariant weights (diagonal Gram matrices).
pub fn donaldson_lk(w_psi: &ToricWeight, w_phi: &ToricWeight, mu: &Measure, k: u32) -> Result<LkValue> {
    if w_psi.n != w_phi.n || !w_psi.polytope.approx_eq(&w_phi.polytope, 1e-12) {
        return Err(Error::PolytopeMismatch);
    }
    let a = discrete_chebyshev_values(w_psi, mu, k, MonomialOrder::Lex)?;
    let b = discrete_chebyshev_values(w_phi, mu, k, MonomialOrder::Lex)?;
    Ok(lk_from(w_psi.n, k, &a.factorization, &b.factorization, a.factorization.ln_det(), b.factorization.ln_det()))
}

/// `𝓛ₖ` on `ℙ¹` through full Gram matrices; determinants come from an LU factorization.
pub fn donaldson_lk_dense(psi: &DenseWeight, phi: &DenseWeight, mu: &Measure, k: u32, opts: &DenseOptions) -> Result<LkValue> {
    let ex: Vec<Vec<i64>> = (0..=k as i64).map(|i| vec![i]).collect();
    let gp = dense_gram_p1(psi, mu, k, opts)?;
    let gq = dense_gram_p1(phi, mu, k, opts)?;
    let fp = minimal_sections(&gp, k, ex.clone(), MonomialOrder::Lex)?;
    let fq = minimal_sections(&gq, k, ex, MonomialOrder::Lex)?;
    Ok(lk_from(1, k, &fp, &fq, gp.ln_det()?, gq.ln_det()?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderRow {
    pub k: u32,
    pub lk_sum_form: f64,
    pub lk_det_form: f64,
    pub route_a_value: Option<f64>,
    pub gap: Option<f64>,
}

/// `𝓛ₖ` along increasing `k`, compared with an independent energy value when given.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderReport {
    pub route: String,
    /// Sum-form value at the largest `k`.
    pub value: f64,
    /// `|gap|` at the largest `k`, if a reference value is given.
    pub error_estimate: Option<f64>,
    pub per_k: Vec<LadderRow>,
    /// Whether `|gap|` strictly decreases along the ladder.
    pub gap_decreasing: Option<bool>,
    /// Median of `sum_form / det_form` over the ladder.
    pub fitted_constant: Option<f64>,
    pub normalization: String,
}

pub fn lk_ladder(w_psi: &ToricWeight, w_phi: &ToricWeight, mu: &Measure, ks: &[u32], route_a: Option<f64>) -> Result<LadderReport> {
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() || ks[0] == 0 {
        return Err(Error::Input("ladder needs positive levels".into()));
    }
    let values: Vec<Result<LkValue>> = ks.par_iter().map(|&k| donaldson_lk(w_psi, w_phi, mu, k)).collect();
    let mut per_k = Vec::with_capacity(ks.len());
    let mut constants = Vec::new();
    for v in values {
        let v = v?;
        constants.extend(v.constant);
        per_k.push(LadderRow {
            k: v.k,
            lk_sum_form: v.sum_form,
            lk_det_form: v.det_form,
            route_a_value: route_a,
            gap: route_a.map(|e| v.sum_form - e),
        });
    }
    constants.sort_by(f64::total_cmp);
    let gaps: Option<Vec<f64>> = per_k.iter().map(|r| r.gap.map(f64::abs)).collect();
    let gap_decreasing = gaps.as_ref().map(|g| g.windows(2).all(|w| w[1] < w[0]));
    let last = per_k.last().unwrap();
    Ok(LadderReport {
        route: "donaldson_lk".into(),
        value: last.lk_sum_form,
        error_estimate: last.gap.map(f64::abs),
        gap_decreasing,
        fitted_constant: constants.get(constants.len() / 2).copied(),
        per_k,
        normalization: NORMALIZATION.into(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichViolation {
    pub k: u32,
    pub alpha: Vec<f64>,
    pub side: String,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichLevel {
    pub k: u32,
    /// Smallest `ln C` that makes the lower bound hold at this level.
    pub ln_c: f64,
    /// `max_α (F[ψ] − F[ψ,μ]) / k`.
    pub max_gap_per_k: f64,
}

/// Checks `F[ψ] − ln C − εk ≤ F[ψ,μ] ≤ F[ψ] + ln μ(X)` on all lattice points, fitting `C`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub epsilon: f64,
    pub ln_mass: f64,
    /// Smallest `ln C ≥ 0` that works for every level checked.
    pub ln_c: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub levels: Vec<SandwichLevel>,
    pub violations: Vec<SandwichViolation>,
}

/// Sup-norm Chebyshev value `F[ψ](kα, k) = 2k g*(α)`, boundary slopes included.
fn sup_value(w: &ToricWeight, alpha: &[f64], k: u32) -> Result<f64> {
    let d = w.polytope.boundary_distance(alpha);
    let c = if d > 1e-9 { legendre(w, alpha, d)? } else { legendre_closure(w, alpha, 60.0)? };
    Ok(2.0 * k as f64 * c.value)
}

/// `ln_c_cap` bounds the fitted constant; larger gaps are listed as lower-side violations.
pub fn sandwich_check(w: &ToricWeight, mu: &Measure, ks: &[u32], epsilon: f64, ln_c_cap: Option<f64>) -> Result<SandwichReport> {
    let ln_mass = 0.0;
    let mut levels = Vec::new();
    let mut violations = Vec::new();
    let mut ln_c = 0.0f64;
    for &k in ks {
        let dv = discrete_chebyshev_values(w, mu, k, MonomialOrder::Lex)?;
        let sups: Vec<Result<f64>> = dv.alphas.par_iter().map(|a| sup_value(w, a, k)).collect();
        let mut level_c = 0.0f64;
        let mut max_gap = f64::NEG_INFINITY;
        let mut lower = Vec::new();
        for ((alpha, l2), sup) in dv.alphas.iter().zip(&dv.factorization.log_diag).zip(sups) {
            let sup = sup?;
            let upper_excess = l2 - (sup + ln_mass);
            if upper_excess > 1e-9 * (1.0 + sup.abs()) {
                violations.push(SandwichViolation { k, alpha: alpha.clone(), side: "upper".into(), excess: upper_excess });
            }
            let need = sup - epsilon * k as f64 - l2;
            level_c = level_c.max(need);
            max_gap = max_gap.max((sup - l2) / k as f64);
            lower.push((alpha.clone(), need));
        }
        if let Some(cap) = ln_c_cap {
            for (alpha, need) in lower.into_iter().filter(|(_, n)| *n > cap) {
                violations.push(SandwichViolation { k, alpha, side: "lower".into(), excess: need - cap });
            }
        }
        ln_c = ln_c.max(level_c);
        levels.push(SandwichLevel { k, ln_c: level_c, max_gap_per_k: max_gap });
    }
    let upper_ok = violations.iter().all(|v| v.side != "upper");
    let lower_ok = violations.iter().all(|v| v.side != "lower");
    Ok(SandwichReport { epsilon, ln_mass, ln_c, upper_ok, lower_ok, levels, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entropy(a: f64) -> f64 {
        a * a.ln() + (1.0 - a) * (1.0 - a).ln()
    }

    #[test]
    fn constant_shift_and_identity() {
        let mu = Measure::default();
        let psi = ToricWeight::fubini_study(1, 1.0).unwrap();
        let phi = psi.plus_constant(1.0).unwrap();
        for k in [1, 5, 16] {
            let a = discrete_chebyshev_values(&psi, &mu, k, MonomialOrder::Lex).unwrap();
            let b = discrete_chebyshev_values(&phi, &mu, k, MonomialOrder::Lex).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                assert!((x - y - 1.0).abs() < 1e-12);
            }
            let lk = donaldson_lk(&psi, &phi, &mu, k).unwrap();
            assert!((lk.sum_form - (k + 1) as f64 / k as f64).abs() < 1e-12);
            assert!((lk.constant.unwrap() - 2.0).abs() < 1e-12);
            assert_eq!(donaldson_lk(&psi, &psi, &mu, k).unwrap().sum_form, 0.0);
        }
    }

    #[test]
    fn midpoint_value_approaches_minus_ln_two() {
        let mu = Measure::default();
        let psi = ToricWeight::fubini_study(1, 1.0).unwrap();
        for k in [16u32, 64, 256] {
            let dv = discrete_chebyshev_values(&psi, &mu, k, MonomialOrder::Lex).unwrap();
            let mid = dv.values[k as usize / 2];
            let kf = k as f64;
            assert!((mid - entropy(0.5)).abs() <= kf.ln() / kf, "{k}: {mid}");
        }
        let f = discrete_chebyshev_field(&psi, &mu, 8).unwrap();
        assert_eq!(f.missing_count(), 0);
        assert!((f.at(&[0.5]).unwrap() - discrete_chebyshev_values(&psi, &mu, 8, MonomialOrder::Lex).unwrap().values[4]).abs() < 1e-15);
    }

    #[test]
    fn sandwich_holds_for_fubini_study() {
        let psi = ToricWeight::fubini_study(1, 1.0).unwrap();
        let r = sandwich_check(&psi, &Measure::default(), &[32], 0.05, Some(5.0)).unwrap();
        assert!(r.upper_ok && r.lower_ok, "{:?}", r.violations);
        assert!(r.ln_c <= 5.0 && r.ln_c > 0.0, "{}", r.ln_c);
    }

    #[test]
    fn dense_lk_matches_diagonal_route_without_perturbation() {
        let mu = Measure::default();
        let psi = ToricWeight::fubini_study(1, 1.0).unwrap();
        let phi = ToricWeight::fubini_study_with_bump(0.05, 0.0, 1.5).unwrap();
        let k = 12;
        let a = donaldson_lk(&psi, &phi, &mu, k).unwrap();
        let p = |w: &ToricWeight| DenseWeight::new(w.clone(), Default::default()).unwrap();
        let b = donaldson_lk_dense(&p(&psi), &p(&phi), &mu, k, &DenseOptions::default()).unwrap();
        assert!((a.sum_form - b.sum_form).abs() < 1e-9 && (a.det_form - b.det_form).abs() < 1e-9);
    }
}
