//! Acceptance battery: each criterion runs its computations, compares measured errors with
//! tolerances and reports the runtime against a budget.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classical::{chebyshev_constant, chebyshev_number, transfinite_diameter, AdmissibleWeight, CompactSet, SetDescriptor};
use crate::envelope::{envelope_estimate, ray_monotonicity_report, GridSpec, LevelFilter, SubadditiveTable};
use crate::error::Result;
use crate::gram::{
    dense_gram_p1, discrete_chebyshev_field, discrete_chebyshev_values, lk_ladder, minimal_sections, sandwich_check,
    AngularPerturbation, DenseOptions, DenseWeight, GramMatrix, Measure, MonomialOrder,
};
use crate::scalar::{factorial, ln_binomial};
use crate::semigroup::GradedSemigroup;
use crate::toric::{
    chebyshev_toric, derivative_check_1d, energy_legendre, energy_ma_1d, legendre, psh_projection_forced, psh_projection_toric,
    zero_fiber_restriction, EnergyOptions, Expr, ToricWeight, ZeroFiberOptions,
};
use crate::Body;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Shorter ladders for a fast smoke run.
    Quick,
    #[default]
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyOptions {
    pub profile: Profile,
    pub seed: u64,
    /// Multiplies every numeric tolerance; values below 1 tighten the battery.
    pub tolerance_scale: f64,
    /// Criteria to run; empty means all.
    pub criteria: Vec<u32>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { profile: Profile::Full, seed: 7, tolerance_scale: 1.0, criteria: Vec::new() }
    }
}

/// One measured quantity against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub checks: Vec<Check>,
    pub runtime_s: f64,
    pub budget_s: f64,
    pub error: Option<String>,
    pub passed: bool,
}

impl CriterionResult {
    pub fn summary_line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {:>2} {status} {} ({:.2} s, budget {} s)", self.id, self.title, self.runtime_s, self.budget_s);
        if let Some(e) = &self.error {
            line.push_str(&format!(": error: {e}"));
        }
        for c in self.checks.iter().filter(|c| !c.passed) {
            line.push_str(&format!("; {} = {:.3e} > {:.3e}", c.name, c.measured, c.tolerance));
        }
        line
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub options: VerifyOptions,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
    pub runtime_s: f64,
}

impl VerifyReport {
    pub fn failures(&self) -> Vec<u32> {
        self.criteria.iter().filter(|c| !c.passed).map(|c| c.id).collect()
    }
}

pub const CRITERIA: [(u32, &str, f64); 10] = [
    (1, "volume identity", 1.0),
    (2, "toric energy: Legendre route, Monge-Ampere route and Donaldson ladder", 30.0),
    (3, "entropy closed form of the Fubini-Study transform", 10.0),
    (4, "Chebyshev constant equals transfinite diameter", 60.0),
    (5, "subadditive envelope convergence", 5.0),
    (6, "Gram product formula and recombination invariance", 5.0),
    (7, "zero-fiber identity", 20.0),
    (8, "derivative formula", 10.0),
    (9, "sandwich property", 10.0),
    (10, "property suites", 60.0),
];

struct Recorder {
    scale: f64,
    checks: Vec<Check>,
}

impl Recorder {
    /// `measured ≤ tolerance · scale`.
    fn at_most(&mut self, name: impl Into<String>, measured: f64, tolerance: f64) {
        let tolerance = tolerance * self.scale;
        self.checks.push(Check { name: name.into(), measured, tolerance, passed: measured <= tolerance });
    }

    /// Unscaled boolean condition, recorded as `0` (holds) or `1` against tolerance `0`.
    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.checks.push(Check { name: name.into(), measured: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, passed: ok });
    }
}

fn entropy(a: f64) -> f64 {
    a * a.ln() + (1.0 - a) * (1.0 - a).ln()
}

fn fs(n: usize) -> Result<ToricWeight> {
    ToricWeight::fubini_study(n, 1.0)
}

fn fs_plus_bump(amplitude: f64, center: f64, radius: f64) -> Result<ToricWeight> {
    let g = Expr::fubini_study(1.0).plus(Expr::QuadraticBump { amplitude, center: vec![center], radius });
    ToricWeight::new(1, Body::interval(0.0, 1.0), g, None)
}

fn volume_identity(r: &mut Recorder, _: &VerifyOptions) -> Result<()> {
    let o = EnergyOptions::default();
    let p1 = fs(1)?;
    let square_g = Expr::Sum {
        terms: vec![Expr::FubiniStudy { scale: 1.0, coords: Some(vec![0]) }, Expr::FubiniStudy { scale: 1.0, coords: Some(vec![1]) }],
    };
    let square = ToricWeight::new(2, Body::cuboid(&[0.0, 0.0], &[1.0, 1.0])?, square_g, None)?;
    for (name, psi) in [("P1", p1), ("unit square", square)] {
        let phi = psi.plus_constant(1.0)?;
        let vol = psi.polytope.volume().value;
        let expected = factorial::<f64>(psi.n) * vol;
        let e = energy_legendre(&psi, &phi, &o)?;
        r.at_most(format!("{name}: |n! int(c[psi] - c[phi]) - n! vol|"), (e.value - expected).abs(), 1e-6);
        let h = if psi.n == 1 { 1.0 / 64.0 } else { 1.0 / 8.0 };
        let a = chebyshev_toric(&psi, GridSpec::new(h, 0))?;
        let b = chebyshev_toric(&phi, GridSpec::new(h, 0))?;
        let dev = a
            .nodes
            .iter()
            .zip(&b.nodes)
            .filter_map(|(x, y)| Some((x.value()? - y.value()? - 1.0).abs()))
            .fold(0.0, f64::max);
        r.at_most(format!("{name}: field difference minus 1"), dev, 1e-9);
    }
    Ok(())
}

fn toric_energy_routes(r: &mut Recorder, v: &VerifyOptions) -> Result<()> {
    let o = EnergyOptions::default();
    let psi = fs(1)?;
    let phi = ToricWeight::fubini_study_with_bump(0.05, 0.0, 1.5)?;
    r.holds("bumped weight is convex", phi.convex);
    let a = energy_legendre(&psi, &phi, &o)?;
    let b = energy_ma_1d(&psi, &phi, &o)?;
    r.at_most("|energy_legendre - energy_ma_1d|", (a.value - b.value).abs(), 1e-3);
    let ks: &[u32] = match v.profile {
        Profile::Full => &[16, 32, 64, 128],
        Profile::Quick => &[16, 32, 64],
    };
    let ladder = lk_ladder(&psi, &phi, &Measure::default(), ks, Some(a.value))?;
    let last = ladder.per_k.last().unwrap();
    r.at_most(format!("|L_k(k={}) - energy_legendre|", last.k), last.gap.unwrap().abs(), 0.02);
    r.holds("L_k gap decreases along the ladder", ladder.gap_decreasing == Some(true));
    Ok(())
}

fn entropy_closed_form(r: &mut Recorder, _: &VerifyOptions) -> Result<()> {
    let psi = fs(1)?;
    let f = chebyshev_toric(&psi, GridSpec::new(1.0 / 128.0, 0))?;
    r.at_most("max grid error of chebyshev_toric", f.max_error(|a| entropy(a[0])), 1e-6);
    let d = discrete_chebyshev_field(&psi, &Measure::default(), 200)?;
    for a in [0.25, 0.5, 0.75] {
        let err = d.at(&[a]).map_or(f64::INFINITY, |x| (x - entropy(a)).abs());
        r.at_most(format!("discrete field at k=200, alpha={a}"), err, 0.02);
    }
    Ok(())
}

fn chebyshev_vs_transfinite(r: &mut Recorder, v: &VerifyOptions) -> Result<()> {
    let (kc, kt) = match v.profile {
        Profile::Full => (24, 40),
        Profile::Quick => (16, 24),
    };
    let disc = SetDescriptor::Disc { r: 1.0, center: [0.0, 0.0] };
    let interval = SetDescriptor::Interval { a: -1.0, b: 1.0 };
    for (name, d) in [("unit disc", &disc), ("[-1,1]", &interval)] {
        let c = chebyshev_constant(d, &AdmissibleWeight::Unit, kc)?;
        let t = transfinite_diameter(d, kt)?;
        r.at_most(format!("{name}: |ln T - ln C|"), (t.limit.ln() - c.limit.ln()).abs(), 0.05);
        if d == &disc {
            r.at_most("unit disc: |C - 1|", (c.limit - 1.0).abs(), 0.01);
            r.at_most("unit disc: |T - 1|", (t.limit - 1.0).abs(), 0.01);
        }
    }
    Ok(())
}

fn binomial_table(k: u32) -> Result<SubadditiveTable<f64>> {
    let sg = GradedSemigroup::projective(1, 1)?.with_levels(k)?;
    SubadditiveTable::from_fn(&sg, k, |a, k| -ln_binomial(k as u64, a[0] as u64))
}

fn envelope_convergence(r: &mut Recorder, _: &VerifyOptions) -> Result<()> {
    let k = 200;
    let tab = binomial_table(k)?;
    let field = envelope_estimate(&tab, k, &Body::interval(0.0, 1.0), GridSpec::new(1.0 / k as f64, 0), LevelFilter::All)?;
    r.holds("every grid node valued", field.missing_count() == 0);
    r.at_most("max interior envelope error", field.max_error(|x| entropy(x[0])), 0.02);
    for (alpha, k0) in [(1, 2), (1, 3), (2, 3), (1, 4), (3, 4), (2, 5)] {
        let ray = ray_monotonicity_report(&tab, &[alpha], k0, k)?;
        r.at_most(format!("ray ({alpha},{k0}) largest increase"), ray.max_increase.max(0.0), 1e-9);
    }
    Ok(())
}

fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|l| a[i][l] * a[j][l]).sum::<f64>() + if i == j { 0.1 } else { 0.0 }).collect())
        .collect()
}

fn recombination(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n * n)
        .map(|i| {
            let d = if i % (n + 1) == 0 { 1.0 } else { 0.0 };
            Complex64::new(d + rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2))
        })
        .collect()
}

fn exps(n: usize) -> Vec<Vec<i64>> {
    (0..n as i64).map(|i| vec![i]).collect()
}

fn gram_product_formula(r: &mut Recorder, v: &VerifyOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed);
    let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut worst_product = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for n in [1, 2, 5, 12, 25, 40] {
        let a = GramMatrix::from_real(&random_spd(n, &mut rng))?;
        let b = GramMatrix::from_real(&random_spd(n, &mut rng))?;
        let f = minimal_sections(&a, 1, exps(n), MonomialOrder::Lex)?;
        worst_product = worst_product.max(rel(f.ln_det(), a.ln_det()?));
        let m = recombination(n, &mut rng);
        let before = a.ln_det()? - b.ln_det()?;
        let after = a.recombined(&m)?.ln_det()? - b.recombined(&m)?.ln_det()?;
        worst_ratio = worst_ratio.max(rel(after, before));
    }
    r.at_most("random SPD: relative |sum log_diag - ln det|", worst_product, 1e-8);
    r.at_most("random SPD: relative change of det ratio", worst_ratio, 1e-8);
    let base = fs(1)?;
    let mu = Measure::default();
    let opts = DenseOptions::default();
    let w0 = DenseWeight::new(base.clone(), AngularPerturbation::default())?;
    let (mut dense_product, mut dense_ratio) = (0.0f64, 0.0f64);
    for (k, amp) in [(4u32, 0.5), (16, 0.3), (32, 0.2)] {
        let w = DenseWeight::new(base.clone(), AngularPerturbation { amplitude: amp, harmonic: 2 })?;
        let g = dense_gram_p1(&w, &mu, k, &opts)?;
        let g0 = dense_gram_p1(&w0, &mu, k, &opts)?;
        let f = minimal_sections(&g, k, exps(k as usize + 1), MonomialOrder::Lex)?;
        let ln_det = g.ln_det()?;
        dense_product = dense_product.max(rel(f.ln_det(), ln_det));
        let m = recombination(k as usize + 1, &mut rng);
        let scale = g0.log_scale.clone();
        let before = ln_det - g0.ln_det()?;
        let after = g.rescaled(&scale).recombined(&m)?.ln_det()? - g0.rescaled(&scale).recombined(&m)?.ln_det()?;
        dense_ratio = dense_ratio.max(rel(after, before));
    }
    r.at_most("dense P1 Grams: relative |sum log_diag - ln det|", dense_product, 1e-8);
    r.at_most("dense P1 Grams: relative change of det ratio", dense_ratio, 1e-8);
    Ok(())
}

fn zero_fiber(r: &mut Recorder, _: &VerifyOptions) -> Result<()> {
    let w = fs(2)?;
    for a in [0.25, 0.5, 0.75] {
        let z = zero_fiber_restriction(&w, a, &ZeroFiberOptions::default())?;
        r.at_most(format!("alpha={a}: |c_full - c_restricted|"), z.difference.abs(), 0.05);
    }
    Ok(())
}

fn derivative_formula(r: &mut Recorder, _: &VerifyOptions) -> Result<()> {
    let o = EnergyOptions::default();
    let psi = fs(1)?;
    let phi = fs_plus_bump(0.02, 0.3, 1.5)?;
    let bump = Expr::QuadraticBump { amplitude: 1.0, center: vec![-0.2], radius: 1.0 };
    let d = derivative_check_1d(&psi, &phi, &bump, 1e-4, &o)?;
    r.at_most("bump direction: |FD - pushforward integral|", d.difference.abs(), 1e-3);
    let one = derivative_check_1d(&psi, &phi, &Expr::constant(1.0), 1e-4, &o)?;
    let vol = psi.polytope.volume().value;
    r.at_most("constant direction: |FD - |Delta||", (one.fd_richardson - vol).abs(), 1e-6);
    r.at_most("constant direction: |integral - |Delta||", (one.formula_value - vol).abs(), 1e-6);
    Ok(())
}

fn sandwich(r: &mut Recorder, v: &VerifyOptions) -> Result<()> {
    let k_max = match v.profile {
        Profile::Full => 64,
        Profile::Quick => 32,
    };
    let ks: Vec<u32> = (1..=k_max).collect();
    let rep = sandwich_check(&fs(1)?, &Measure::default(), &ks, 0.05, Some(10.0))?;
    r.holds("upper inequality at every lattice point", rep.upper_ok);
    r.holds("lower inequality at every lattice point", rep.lower_ok);
    r.at_most("fitted ln C", rep.ln_c, 10.0);
    Ok(())
}

fn property_suites(r: &mut Recorder, v: &VerifyOptions) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(v.seed ^ 0x9e37_79b9);
    let o = EnergyOptions::default();
    let mu = Measure::default();
    let psi = fs(1)?;

    // Subadditivity of the binomial table and of classical Chebyshev numbers.
    let tab = binomial_table(80)?;
    r.at_most("subadditivity defect of the binomial table", tab.subadditivity(100_000).worst_defect.max(0.0), 1e-9);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..6 {
        let (k, m) = (rng.gen_range(1..8usize), rng.gen_range(1..8usize));
        let d = SetDescriptor::Interval { a: rng.gen_range(-2.0..0.0), b: rng.gen_range(0.5..2.0) };
        let h = AdmissibleWeight::Exponential { a: rng.gen_range(-1.0..1.0) };
        let set = CompactSet::new(d, 512)?;
        let y = |j| chebyshev_number(&set, j, &h).map(|n| n.ln_value);
        worst = worst.max(y(k + m)? - y(k)? - y(m)?);
    }
    r.at_most("Chebyshev numbers: ln Y(k+m) - ln Y(k) - ln Y(m)", worst.max(0.0), 1e-9);

    // Monotonicity and constant shift of the discrete transform.
    let (mut mono, mut shift) = (0.0f64, 0.0f64);
    for _ in 0..4 {
        let k = rng.gen_range(1..24u32);
        let c = rng.gen_range(0.0..0.5);
        let bigger = psi.with_g(psi.g.clone().plus(Expr::QuadraticBump {
            amplitude: rng.gen_range(0.0..0.5),
            center: vec![rng.gen_range(-0.5..0.5)],
            radius: 1.0,
        }))?;
        let a = discrete_chebyshev_values(&psi, &mu, k, MonomialOrder::Lex)?;
        let b = discrete_chebyshev_values(&bigger, &mu, k, MonomialOrder::Lex)?;
        let s = discrete_chebyshev_values(&psi.plus_constant(c)?, &mu, k, MonomialOrder::Lex)?;
        for ((x, y), z) in a.values.iter().zip(&b.values).zip(&s.values) {
            mono = mono.max(y - x);
            shift = shift.max((x - z - c).abs());
        }
    }
    r.at_most("monotonicity: largest F[bigger] - F[psi]", mono.max(0.0), 1e-12);
    r.at_most("constant shift: largest |F[psi] - F[psi+c] - c|", shift, 1e-12);

    // Homogeneity under scaling.
    let m = rng.gen_range(1.5..4.0);
    let f = chebyshev_toric(&psi, GridSpec::new(1.0 / 32.0, 0))?;
    let fm = chebyshev_toric(&psi.scaled(m)?, GridSpec::new(m / 32.0, 0))?;
    let homog = f
        .nodes
        .iter()
        .zip(&fm.nodes)
        .filter_map(|(a, b)| Some((b.value()? - m * a.value()?).abs()))
        .fold(0.0, f64::max);
    r.at_most("homogeneity: |c[m psi](m alpha) - m c[psi](alpha)|", homog, 1e-9);

    // Energy cocycle and antisymmetry.
    let phi = fs_plus_bump(rng.gen_range(0.0..0.02), 0.2, 1.5)?;
    let chi = fs_plus_bump(rng.gen_range(0.0..0.02), -0.4, 1.5)?.plus_constant(rng.gen_range(-0.5..0.5))?;
    let (e1, e2, e3) = (energy_legendre(&psi, &phi, &o)?, energy_legendre(&phi, &chi, &o)?, energy_legendre(&chi, &psi, &o)?);
    let budget = 3.0 * (e1.error_estimate + e2.error_estimate + e3.error_estimate) + 1e-12;
    r.at_most("energy cocycle residual over its error budget", (e1.value + e2.value + e3.value).abs() / budget, 1.0);
    let back = energy_legendre(&phi, &psi, &o)?;
    r.at_most("energy antisymmetry residual", (e1.value + back.value).abs(), 1e-10);

    // Legendre involution on a convex weight, projection idempotence on a non-convex one.
    let shifted = psi.with_g(Expr::fubini_study(1.0).shifted(vec![rng.gen_range(-1.0..1.0)]).plus(Expr::constant(0.5)))?;
    let dd = psh_projection_forced(&shifted)?;
    let inv = (-30..=30).map(|i| (dd.eval(&[i as f64 * 0.1]) - shifted.eval(&[i as f64 * 0.1])).abs()).fold(0.0, f64::max);
    r.at_most("Legendre involution: max |g** - g|", inv, 2e-6);
    let wavy = fs_plus_bump(rng.gen_range(0.2..0.6), rng.gen_range(-0.5..0.5), 1.5)?;
    r.holds("test weight is not convex", !wavy.convex);
    let p = psh_projection_toric(&wavy)?;
    let pp = psh_projection_forced(&p)?;
    let (mut idem, mut below) = (0.0f64, 0.0f64);
    for i in -40..=40 {
        let x = [i as f64 * 0.1];
        idem = idem.max((pp.eval(&x) - p.eval(&x)).abs());
        below = below.max(p.eval(&x) - wavy.eval(&x));
    }
    r.at_most("projection idempotence: max |P(P g) - P g|", idem, 1e-8);
    r.at_most("projection lies below the weight", below.max(0.0), 1e-6);
    // Order reversal of the conjugate.
    let rev = (1..40)
        .map(|i| {
            let p = i as f64 / 40.0;
            let mg = p.min(1.0 - p);
            Ok(legendre(&wavy, &[p], mg)?.value - legendre(&psi, &[p], mg)?.value)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    let order_ok = (0..=80).all(|i| wavy.eval(&[i as f64 * 0.1 - 4.0]) >= psi.eval(&[i as f64 * 0.1 - 4.0]));
    r.holds("bumped weight dominates Fubini-Study", order_ok);
    r.at_most("Legendre order reversal: max (g_bigger* - g*)", rev.max(0.0), 1e-10);
    Ok(())
}

type Runner = fn(&mut Recorder, &VerifyOptions) -> Result<()>;

fn runner(id: u32) -> Option<Runner> {
    Some(match id {
        1 => volume_identity,
        2 => toric_energy_routes,
        3 => entropy_closed_form,
        4 => chebyshev_vs_transfinite,
        5 => envelope_convergence,
        6 => gram_product_formula,
        7 => zero_fiber,
        8 => derivative_formula,
        9 => sandwich,
        10 => property_suites,
        _ => return None,
    })
}

/// Runs one criterion; unknown ids produce a failed result.
pub fn run_criterion(id: u32, opts: &VerifyOptions) -> CriterionResult {
    let (title, budget) = CRITERIA.iter().find(|c| c.0 == id).map_or(("unknown criterion", 0.0), |c| (c.1, c.2));
    let mut rec = Recorder { scale: opts.tolerance_scale, checks: Vec::new() };
    let start = Instant::now();
    let error = match runner(id) {
        Some(f) => f(&mut rec, opts).err().map(|e| e.to_string()),
        None => Some(format!("no criterion with id {id}")),
    };
    let runtime_s = start.elapsed().as_secs_f64();
    rec.holds("runtime within budget", runtime_s <= budget);
    let passed = error.is_none() && rec.checks.iter().all(|c| c.passed);
    CriterionResult { id, title: title.into(), checks: rec.checks, runtime_s, budget_s: budget, error, passed }
}

pub fn verify_suite(opts: &VerifyOptions) -> VerifyReport {
    let start = Instant::now();
    let ids: Vec<u32> = if opts.criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { opts.criteria.clone() };
    let criteria: Vec<CriterionResult> = ids.into_iter().map(|id| run_criterion(id, opts)).collect();
    let passed = criteria.iter().all(|c| c.passed);
    VerifyReport { options: opts.clone(), criteria, passed, runtime_s: start.elapsed().as_secs_f64() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_criteria_pass_and_tightened_tolerances_fail() {
        let opts = VerifyOptions { criteria: vec![1, 6], ..VerifyOptions::default() };
        let rep = verify_suite(&opts);
        assert!(rep.passed, "{:#?}", rep.criteria);
        let tight = VerifyOptions { tolerance_scale: 1e-12, criteria: vec![1], ..VerifyOptions::default() };
        let rep = verify_suite(&tight);
        assert_eq!(rep.failures(), vec![1]);
        assert!(rep.criteria[0].summary_line().contains("FAIL"));
    }

    #[test]
    fn unknown_criterion_fails() {
        let r = run_criterion(42, &VerifyOptions::default());
        assert!(!r.passed && r.error.is_some());
    }
}
