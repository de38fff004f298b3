//! Weighted Chebyshev values `Y(α)` on compact sets of `ℂ²` and directional constants.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::minimax::lawson;
use super::{AdmissibleWeight, CompactSet, SetDescriptor};
use crate::error::{Error, Result};
use crate::scalar::least_squares;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Set2Descriptor {
    Product { first: SetDescriptor, second: SetDescriptor },
    /// Sampled on the distinguished boundary torus.
    Polydisc { r: [f64; 2] },
    /// Points `[re z1, im z1, re z2, im z2]`.
    Cloud2 { points: Vec<[f64; 4]> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactSet2 {
    pub descriptor: Set2Descriptor,
    pub resolution: usize,
    pub points: Vec<[Complex64; 2]>,
}

impl CompactSet2 {
    pub fn new(descriptor: Set2Descriptor, resolution: usize) -> Result<Self> {
        let product = |a: &CompactSet, b: &CompactSet| -> Vec<[Complex64; 2]> {
            a.points.iter().flat_map(|x| b.points.iter().map(move |y| [*x, *y])).collect()
        };
        let points = match &descriptor {
            Set2Descriptor::Product { first, second } => {
                product(&CompactSet::new(first.clone(), resolution)?, &CompactSet::new(second.clone(), resolution)?)
            }
            Set2Descriptor::Polydisc { r } => {
                let circle = |r: f64| CompactSet::new(SetDescriptor::Circle { r, center: [0.0, 0.0] }, resolution);
                product(&circle(r[0])?, &circle(r[1])?)
            }
            Set2Descriptor::Cloud2 { points } => {
                let mut v: Vec<[Complex64; 2]> =
                    points.iter().map(|p| [Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3])]).collect();
                v.dedup();
                v
            }
        };
        if points.is_empty() {
            return Err(Error::Input("compact set is empty".into()));
        }
        Ok(Self { descriptor, resolution, points })
    }

    /// `2d + 2` angles per circle factor or `4d` Lobatto intervals per real factor.
    pub fn for_degree(descriptor: Set2Descriptor, d: usize) -> Result<Self> {
        let has_interval = matches!(
            &descriptor,
            Set2Descriptor::Product { first, second }
                if matches!(first, SetDescriptor::Interval { .. }) || matches!(second, SetDescriptor::Interval { .. })
        );
        let n = if has_interval { 4 * d.max(2) } else { 2 * d + 2 };
        Self::new(descriptor, n)
    }
}

/// Exponents strictly below `alpha` in graded-lex order.
pub(crate) fn lower_monomials(alpha: [usize; 2]) -> Vec<[usize; 2]> {
    let d = alpha[0] + alpha[1];
    let mut out = Vec::new();
    for deg in 0..d {
        for i in (0..=deg).rev() {
            out.push([i, deg - i]);
        }
    }
    for i in 0..alpha[0] {
        out.push([i, d - i]);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Y3Value {
    pub alpha: [usize; 2],
    pub ln_value: f64,
    pub ln_lower_bound: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `min max_K |h^{|α|} (z^α + lower terms)|` with lower terms in graded-lex order.
pub fn weighted_chebyshev_2d(set: &CompactSet2, alpha: [usize; 2], h: &AdmissibleWeight) -> Y3Value {
    let d = alpha[0] + alpha[1];
    let mut center = [Complex64::new(0.0, 0.0); 2];
    let mut radius = [0.0f64; 2];
    for c in 0..2 {
        center[c] = set.points.iter().map(|p| p[c]).sum::<Complex64>() / set.points.len() as f64;
        radius[c] = set.points.iter().map(|p| (p[c] - center[c]).norm()).fold(0.0, f64::max);
        if radius[c] == 0.0 {
            radius[c] = 1.0;
        }
    }
    let u: Vec<[Complex64; 2]> =
        set.points.iter().map(|p| [(p[0] - center[0]) / radius[0], (p[1] - center[1]) / radius[1]]).collect();
    let mono = |v: &[Complex64; 2], b: [usize; 2]| v[0].powu(b[0] as u32) * v[1].powu(b[1] as u32);
    let columns: Vec<Vec<Complex64>> = lower_monomials(alpha).into_iter().map(|b| u.iter().map(|v| mono(v, b)).collect()).collect();
    let target: Vec<Complex64> = u.iter().map(|v| mono(v, alpha)).collect();
    let ln_w: Vec<f64> = set.points.iter().map(|p| d as f64 * h.ln_h(p)).collect();
    let shift = ln_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = ln_w.iter().map(|v| (v - shift).exp()).collect();
    let l = lawson(&columns, &target, &w);
    let scale = shift + alpha[0] as f64 * radius[0].ln() + alpha[1] as f64 * radius[1].ln();
    Y3Value {
        alpha,
        ln_value: scale + l.upper.ln(),
        ln_lower_bound: scale + l.lower.ln(),
        converged: l.converged,
        iterations: l.iterations,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionalReport {
    pub theta: [f64; 2],
    pub values: Vec<Y3Value>,
    /// `Y(α)^{1/|α|}` per rung.
    pub root: Vec<f64>,
    pub last: f64,
    /// Fit of `ln Y^{1/d} ≈ L + a/d` on the upper half of the ladder.
    pub limit: f64,
    pub warnings: Vec<String>,
}

/// Directional constant along `θ` (normalized to the simplex) from `α(d) = round(dθ)`.
pub fn directional_chebyshev(
    descriptor: &Set2Descriptor,
    h: &AdmissibleWeight,
    theta: [f64; 2],
    degrees: &[usize],
) -> Result<DirectionalReport> {
    if !(theta[0] > 0.0 && theta[1] > 0.0) {
        return Err(Error::Input("direction must lie strictly inside the simplex".into()));
    }
    if degrees.is_empty() || degrees.contains(&0) {
        return Err(Error::Input("degree ladder must be nonempty and positive".into()));
    }
    let s = theta[0] + theta[1];
    let theta = [theta[0] / s, theta[1] / s];
    use rayon::prelude::*;
    let values: Vec<Y3Value> = degrees
        .par_iter()
        .map(|&d| {
            let a = ((d as f64 * theta[0]).round() as usize).min(d);
            CompactSet2::for_degree(descriptor.clone(), d).map(|set| weighted_chebyshev_2d(&set, [a, d - a], h))
        })
        .collect::<Result<_>>()?;
    let logs: Vec<f64> = values.iter().zip(degrees).map(|(v, &d)| v.ln_value / d as f64).collect();
    let mut warnings: Vec<String> =
        values.iter().filter(|v| !v.converged).map(|v| format!("alpha = {:?}: Lawson iteration hit its cap", v.alpha)).collect();
    let lo = degrees.len() / 2;
    let rows: Vec<Vec<f64>> = degrees[lo..].iter().map(|&d| vec![1.0, 1.0 / d as f64]).collect();
    let last = *logs.last().unwrap();
    let limit = match least_squares(&rows, &logs[lo..]) {
        Some(c) if rows.len() >= 2 => c[0],
        _ => {
            warnings.push("ladder too short to extrapolate".into());
            last
        }
    };
    Ok(DirectionalReport {
        theta,
        values,
        root: logs.iter().map(|v| v.exp()).collect(),
        last: last.exp(),
        limit: limit.exp(),
        warnings,
    })
}
