//! One runner per subcommand: compute, then hand back tables and a JSON result.

use okounkov_core::classical::{
    chebyshev_constant, chebyshev_field_p1, directional_chebyshev, transfinite_diameter, AdmissibleWeight,
};
use okounkov_core::envelope::{envelope_estimate, ray_monotonicity_report, GridSpec, LevelFilter, SubadditiveTable};
use okounkov_core::gram::lk_ladder;
use okounkov_core::linalg;
use okounkov_core::scalar::ln_binomial;
use okounkov_core::semigroup::{khovanskii_threshold_probe, lattice_point_count_check, okounkov_body};
use okounkov_core::toric::{derivative_check_1d, energy_legendre, energy_ma_1d, zero_fiber_restriction, ToricWeight, WeightSpec};
use okounkov_core::verify::{verify_suite, Profile, VerifyOptions};
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{field_table, num, opt, FieldMeta, Table};
use crate::svg::PlotKind;

/// Everything a successful run writes.
pub struct Outcome {
    pub result: Value,
    pub tables: Vec<Table>,
    /// `(table name, kind, title)` for each SVG plot.
    pub plots: Vec<(String, PlotKind, String)>,
    /// Extra JSON documents, such as field sidecars.
    pub documents: Vec<(String, Value)>,
    /// `Some(false)` when an acceptance battery failed.
    pub passed: Option<bool>,
}

impl Outcome {
    fn new(result: Value) -> Self {
        Self { result, tables: Vec::new(), plots: Vec::new(), documents: Vec::new(), passed: None }
    }

    fn plot(&mut self, table: &str, kind: PlotKind, title: &str) {
        self.plots.push((table.into(), kind, title.into()));
    }
}

type Res<T> = okounkov_core::Result<T>;

fn quick(run: &RunSettings) -> bool {
    run.profile == Profile::Quick
}

fn weight(spec: &WeightSpec) -> Res<ToricWeight> {
    ToricWeight::from_spec(spec)
}

pub fn execute(cfg: &ExperimentConfig) -> Res<Outcome> {
    match cfg {
        ExperimentConfig::Okounkov(c) => okounkov(c),
        ExperimentConfig::Envelope(c) => envelope(c),
        ExperimentConfig::ToricEnergy(c) => toric_energy(c),
        ExperimentConfig::LkLadder(c) => ladder(c),
        ExperimentConfig::Cheb1d(c) => cheb1d(c),
        ExperimentConfig::Directional(c) => directional(c),
        ExperimentConfig::ZeroFiber(c) => zero_fiber(c),
        ExperimentConfig::DerivativeCheck(c) => derivative(c),
        ExperimentConfig::Verify(c) => verify(c),
    }
}

fn okounkov(c: &OkounkovConfig) -> Res<Outcome> {
    let k_max = c.k_max.max(c.probe.map_or(0, |p| p.1));
    let sg = c.semigroup.build()?.with_levels(k_max)?;
    let body = okounkov_body(&sg, c.k_max)?;
    let mut volumes = Table::new("volumes.csv", &["k", "volume"]);
    for (k, v) in &body.volume_by_horizon {
        volumes.push(vec![k.to_string(), num(*v)]);
    }
    let exact: Option<Vec<Vec<String>>> =
        body.exact.as_ref().map(|e| e.vertices.iter().map(|v| v.iter().map(|q| q.to_string()).collect()).collect());
    let counts: Vec<_> = if sg.section_space().is_some() {
        (1..=c.k_max).map(|k| lattice_point_count_check(&sg, k)).collect::<Res<_>>()?
    } else {
        Vec::new()
    };
    let probe = c.probe.map(|(lo, hi)| khovanskii_threshold_probe(&sg, lo, hi, c.probe_cap)).transpose()?;
    let mut slices = Table::new("slices.csv", &["k", "alpha"]);
    for k in 1..=c.k_max {
        for a in sg.slice(k).unwrap_or(&[]) {
            let alpha: Vec<String> = a.iter().map(i64::to_string).collect();
            slices.push(vec![k.to_string(), alpha.join(" ")]);
        }
    }
    let mut out = Outcome::new(json!({
        "semigroup": sg.to_spec(),
        "body": {
            "dimension": body.body.dim,
            "vertices": body.body.vertices,
            "exact_vertices": exact,
            "volume": body.volume,
            "degenerate": body.degenerate,
            "monotone": body.monotone,
            "horizon": body.horizon,
        },
        "lattice_counts": counts,
        "probe": probe,
    }));
    out.tables.push(volumes);
    out.tables.push(slices);
    out.plot("volumes.csv", PlotKind::Ladder, "volume of the truncated body");
    Ok(out)
}

fn envelope(c: &EnvelopeConfig) -> Res<Outcome> {
    let k_max = if quick(&c.run) { c.k_max.min(100) } else { c.k_max };
    let sg = c.semigroup.build()?.with_levels(k_max)?;
    let body = okounkov_body(&sg, k_max)?.body;
    let tab = match &c.table {
        TableInput::NegLnMultinomial => {
            let bad = std::cell::RefCell::new(None);
            let t = SubadditiveTable::from_fn(&sg, k_max, |a, k| {
                let mut rest = k as i64;
                let mut v = 0.0;
                for &ai in a {
                    if ai < 0 || ai > rest {
                        bad.borrow_mut().get_or_insert_with(|| format!("point {a:?} at level {k} has no multinomial coefficient"));
                        return f64::NAN;
                    }
                    v -= ln_binomial(rest as u64, ai as u64);
                    rest -= ai;
                }
                v
            })?;
            if let Some(msg) = bad.into_inner() {
                return Err(okounkov_core::Error::Input(msg));
            }
            t
        }
        TableInput::Affine { a, b } => {
            if a.len() != sg.d {
                return Err(okounkov_core::Error::Input(format!("affine table needs {} slopes, got {}", sg.d, a.len())));
            }
            SubadditiveTable::from_fn(&sg, k_max, |al, k| al.iter().zip(a).map(|(&x, s)| x as f64 * s).sum::<f64>() + b * k as f64)?
        }
    };
    let spacing = c.spacing.unwrap_or(1.0 / k_max as f64);
    let field = envelope_estimate(&tab, k_max, &body, GridSpec::new(spacing, 0), LevelFilter::All)?;
    let rays = c
        .rays
        .iter()
        .map(|(a, k0)| ray_monotonicity_report(&tab, a, *k0, k_max))
        .collect::<Res<Vec<_>>>()?;
    let mut ray_table = Table::new("rays.csv", &["ray", "alpha", "k0", "m", "value"]);
    for (i, r) in rays.iter().enumerate() {
        let alpha: Vec<String> = r.alpha.iter().map(i64::to_string).collect();
        for (m, v) in r.values.iter().enumerate() {
            ray_table.push(vec![i.to_string(), alpha.join(" "), r.k0.to_string(), (m + 1).to_string(), num(*v)]);
        }
    }
    let sub = tab.subadditivity(200_000);
    let mut out = Outcome::new(json!({
        "k_max": k_max,
        "spacing": spacing,
        "missing_nodes": field.missing_count(),
        "lower_bound_constant": tab.lower_bound_constant,
        "subadditivity": sub,
        "rays": rays,
    }));
    out.documents.push(("field.json".into(), serde_json::to_value(FieldMeta::of("field.csv", &field)).unwrap()));
    out.tables.push(field_table("field.csv", &field));
    out.tables.push(ray_table);
    if field.dim() == 1 {
        out.plot("field.csv", PlotKind::Field, "envelope estimate");
    }
    Ok(out)
}

fn toric_energy(c: &ToricEnergyConfig) -> Res<Outcome> {
    let (psi, phi) = (weight(&c.psi)?, weight(&c.phi)?);
    let mut reports = vec![energy_legendre(&psi, &phi, &c.options)?];
    if psi.n == 1 {
        reports.push(energy_ma_1d(&psi, &phi, &c.options)?);
    }
    let mut t = Table::new("energies.csv", &["route", "value", "error_estimate"]);
    for r in &reports {
        t.push(vec![r.route.clone(), num(r.value), num(r.error_estimate)]);
    }
    let mut out = Outcome::new(json!({
        "value": reports[0].value,
        "routes": reports,
        "route_difference": reports.get(1).map(|m| (m.value - reports[0].value).abs()),
    }));
    out.tables.push(t);
    Ok(out)
}

fn ladder(c: &LadderConfig) -> Res<Outcome> {
    let (psi, phi) = (weight(&c.psi)?, weight(&c.phi)?);
    let ks: Vec<u32> = if quick(&c.run) { c.k.iter().copied().filter(|&k| k <= 64).collect() } else { c.k.clone() };
    let reference = if c.route_a { Some(energy_legendre(&psi, &phi, &c.options)?.value) } else { None };
    let rep = lk_ladder(&psi, &phi, &c.measure, &ks, reference)?;
    let mut t = Table::new("ladder.csv", &["k", "lk_sum_form", "lk_det_form", "route_A_value", "gap"]);
    for r in &rep.per_k {
        t.push(vec![r.k.to_string(), num(r.lk_sum_form), num(r.lk_det_form), opt(r.route_a_value), opt(r.gap)]);
    }
    let mut out = Outcome::new(json!({ "measure": c.measure.name(), "ladder": rep }));
    out.tables.push(t);
    out.plot("ladder.csv", PlotKind::Ladder, "L_k ladder");
    Ok(out)
}

/// Fits `ln r = L + a ln k/(k−1) + b/(k−1)` through three consecutive rungs.
fn local_transfinite_fit(ks: &[usize], roots: &[f64]) -> Option<f64> {
    let rows: Vec<Vec<f64>> = ks
        .iter()
        .map(|&k| {
            let km = (k - 1) as f64;
            vec![1.0, (k as f64).ln() / km, 1.0 / km]
        })
        .collect();
    let y: Vec<f64> = roots.iter().map(|r| r.ln()).collect();
    linalg::solve(rows, y).map(|c| c[0].exp()).filter(|v| v.is_finite())
}

fn cheb1d(c: &Cheb1dConfig) -> Res<Outcome> {
    let (k_max, t_max) = if quick(&c.run) { (c.k_max.min(16), c.transfinite_k_max.min(24)) } else { (c.k_max, c.transfinite_k_max) };
    let fit = chebyshev_constant(&c.set, &c.weight, k_max)?;
    let mut t = Table::new("chebyshev_ladder.csv", &["k", "Y_k", "Y_k_root", "extrapolant"]);
    for i in 0..fit.k.len() {
        let ext = (i > 0).then(|| fit.raw[i] / fit.raw[i - 1]);
        t.push(vec![fit.k[i].to_string(), num(fit.raw[i]), num(fit.root[i]), opt(ext)]);
    }
    let mut out = Outcome::new(Value::Null);
    out.tables.push(t);
    out.plot("chebyshev_ladder.csv", PlotKind::Ladder, "Chebyshev ladder");
    let transfinite = if t_max >= 2 {
        let tr = transfinite_diameter(&c.set, t_max)?;
        let mut t = Table::new("transfinite.csv", &["k", "log_T_k", "T_k_root", "extrapolant"]);
        for i in 0..tr.k.len() {
            let ext = (i >= 2).then(|| local_transfinite_fit(&tr.k[i - 2..=i], &tr.root[i - 2..=i])).flatten();
            t.push(vec![tr.k[i].to_string(), num(tr.ln_d[i]), num(tr.root[i]), opt(ext)]);
        }
        out.tables.push(t);
        out.plot("transfinite.csv", PlotKind::Ladder, "transfinite diameter ladder");
        Some(tr)
    } else {
        None
    };
    let field = if c.field && c.weight == AdmissibleWeight::Unit && k_max >= 2 {
        let f = chebyshev_field_p1(&c.set, k_max)?;
        out.documents.push(("field.json".into(), serde_json::to_value(FieldMeta::of("field.csv", &f.field)).unwrap()));
        out.tables.push(field_table("field.csv", &f.field));
        out.plot("field.csv", PlotKind::Field, "Chebyshev transform on the projective line");
        Some(json!({ "fitted_ln_c": f.fitted_ln_c, "max_linearity_residual": f.max_linearity_residual }))
    } else {
        None
    };
    let comparison = transfinite.as_ref().map(|t| (t.limit.ln() - fit.limit.ln()).abs());
    out.result = json!({
        "weight": c.weight.name(),
        "chebyshev": fit,
        "transfinite": transfinite,
        "abs_ln_ratio": comparison,
        "field": field,
    });
    Ok(out)
}

fn directional(c: &DirectionalConfig) -> Res<Outcome> {
    let degrees: Vec<usize> = if quick(&c.run) { c.degrees.iter().copied().filter(|&d| d <= 6).collect() } else { c.degrees.clone() };
    let rep = directional_chebyshev(&c.set, &c.weight, c.theta, &degrees)?;
    let mut t = Table::new("directional.csv", &["k", "alpha1", "alpha2", "ln_Y", "Y_root", "converged"]);
    for (v, r) in rep.values.iter().zip(&rep.root) {
        let d = v.alpha[0] + v.alpha[1];
        t.push(vec![d.to_string(), v.alpha[0].to_string(), v.alpha[1].to_string(), num(v.ln_value), num(*r), v.converged.to_string()]);
    }
    let mut out = Outcome::new(json!({ "weight": c.weight.name(), "directional": rep }));
    out.tables.push(t);
    out.plot("directional.csv", PlotKind::Ladder, "directional Chebyshev ladder");
    Ok(out)
}

fn zero_fiber(c: &ZeroFiberConfig) -> Res<Outcome> {
    let w = weight(&c.weight)?;
    let reps = c.alphas.iter().map(|&a| zero_fiber_restriction(&w, a, &c.options)).collect::<Res<Vec<_>>>()?;
    let mut t = Table::new("zero_fiber.csv", &["alpha", "c_full", "c_restricted", "difference", "tail_change", "tail_flagged"]);
    for r in &reps {
        t.push(vec![num(r.alpha), num(r.c_full), num(r.c_restricted), num(r.difference), num(r.tail_change), r.tail_flagged.to_string()]);
    }
    let worst = reps.iter().map(|r| r.difference.abs()).fold(0.0, f64::max);
    let mut out = Outcome::new(json!({ "max_abs_difference": worst, "fibers": reps }));
    out.tables.push(t);
    Ok(out)
}

fn derivative(c: &DerivativeConfig) -> Res<Outcome> {
    let (psi, phi) = (weight(&c.psi)?, weight(&c.phi)?);
    let r = derivative_check_1d(&psi, &phi, &c.direction, c.t_step, &c.options)?;
    let mut t = Table::new("derivative.csv", &["t_step", "fd_value", "fd_richardson", "formula_value", "difference"]);
    t.push(vec![num(r.t_step), num(r.fd_value), num(r.fd_richardson), num(r.formula_value), num(r.difference)]);
    let mut out = Outcome::new(serde_json::to_value(&r).unwrap());
    out.tables.push(t);
    Ok(out)
}

fn verify(c: &VerifyConfig) -> Res<Outcome> {
    let opts = VerifyOptions { profile: c.run.profile, seed: c.run.seed, tolerance_scale: c.tolerance_scale, criteria: c.criteria.clone() };
    let rep = verify_suite(&opts);
    let mut t = Table::new("verify.csv", &["criterion", "title", "check", "measured", "tolerance", "passed"]);
    for cr in &rep.criteria {
        for ch in &cr.checks {
            t.push(vec![cr.id.to_string(), cr.title.clone(), ch.name.clone(), num(ch.measured), num(ch.tolerance), ch.passed.to_string()]);
        }
        if let Some(e) = &cr.error {
            t.push(vec![cr.id.to_string(), cr.title.clone(), format!("error: {e}"), String::new(), String::new(), "false".into()]);
        }
    }
    let mut out = Outcome::new(json!({
        "summary": rep.criteria.iter().map(|c| c.summary_line()).collect::<Vec<_>>(),
        "failures": rep.failures(),
        "report": rep,
    }));
    out.passed = Some(rep.passed);
    out.tables.push(t);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_fit_recovers_the_model_limit() {
        let ks = [5, 6, 7];
        let model = |k: usize| {
            let km = (k - 1) as f64;
            (0.3 + 0.2 * (k as f64).ln() / km - 0.1 / km).exp()
        };
        let roots: Vec<f64> = ks.iter().map(|&k| model(k)).collect();
        assert!((local_transfinite_fit(&ks, &roots).unwrap() - 0.3f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn identical_weights_give_a_zero_ladder() {
        let c = LadderConfig { psi: fubini_study_spec(), phi: fubini_study_spec(), k: vec![4, 8], ..Default::default() };
        let out = ladder(&c).unwrap();
        for row in &out.tables[0].rows {
            assert_eq!(row[1].parse::<f64>().unwrap(), 0.0);
            assert_eq!(row[2].parse::<f64>().unwrap(), 0.0);
        }
    }
}
