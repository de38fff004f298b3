//! Classical weighted potential theory on compact sets of `ℂ` and `ℂ²`: min–max monic
//! polynomials, Chebyshev constants, Leja/Fekete points and transfinite diameters.

mod directional;
mod fekete;
mod minimax;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use directional::{directional_chebyshev, weighted_chebyshev_2d, CompactSet2, DirectionalReport, Set2Descriptor, Y3Value};
pub use fekete::{leja_fekete, transfinite_diameter, FeketePoints, TransfiniteReport};
pub use minimax::{minimax_complex, minimax_interval, minimax_real, MinimaxResult};

use crate::envelope::{ChebyshevField, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::least_squares;
use crate::Body;

/// JSON set descriptors: `{"kind":"interval","a":-1,"b":1}`, `{"kind":"circle","r":1}`, ….
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetDescriptor {
    Interval { a: f64, b: f64 },
    Circle {
        r: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// Closed disc, sampled on its boundary (maximum principle).
    Disc {
        r: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Cloud { points: Vec<[f64; 2]> },
}

impl SetDescriptor {
    /// The set scaled by `r` about the origin.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Self::Interval { a, b } => Self::Interval { a: a * s, b: b * s },
            Self::Circle { r, center } => Self::Circle { r: r * s, center: [center[0] * s, center[1] * s] },
            Self::Disc { r, center } => Self::Disc { r: r * s, center: [center[0] * s, center[1] * s] },
            Self::Cloud { points } => Self::Cloud { points: points.iter().map(|p| [p[0] * s, p[1] * s]).collect() },
        }
    }

    /// Whether the descriptor is an interval, circle or disc.
    pub fn is_regular(&self) -> bool {
        !matches!(self, Self::Cloud { .. })
    }
}

/// Discretized compact set; `resolution` is the node parameter (doubled by refinement).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompactSet {
    pub descriptor: SetDescriptor,
    pub resolution: usize,
    pub points: Vec<Complex64>,
}

/// Chebyshev–Lobatto nodes `x_j = c + R cos(πj/n)`, `j = 0..=n`, increasing.
pub(crate) fn lobatto_nodes(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (c, r) = ((a + b) / 2.0, (b - a) / 2.0);
    let mut v: Vec<f64> = (0..=n).map(|j| c - r * (std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
    if n % 2 == 0 {
        v[n / 2] = c;
    }
    v
}

impl CompactSet {
    pub fn new(descriptor: SetDescriptor, resolution: usize) -> Result<Self> {
        let resolution = resolution.max(1);
        let points: Vec<Complex64> = match &descriptor {
            Self_::Interval { a, b } => {
                if !(b > a) {
                    return Err(Error::Input("interval needs a < b".into()));
                }
                lobatto_nodes(*a, *b, resolution).into_iter().map(|x| Complex64::new(x, 0.0)).collect()
            }
            Self_::Circle { r, center } | Self_::Disc { r, center } => {
                if !(r > &0.0) {
                    return Err(Error::Input("radius must be positive".into()));
                }
                let c = Complex64::new(center[0], center[1]);
                (0..resolution).map(|j| c + Complex64::from_polar(*r, std::f64::consts::TAU * j as f64 / resolution as f64)).collect()
            }
            Self_::Cloud { points } => {
                let mut v: Vec<Complex64> = points.iter().map(|p| Complex64::new(p[0], p[1])).collect();
                v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
                v.dedup();
                v
            }
        };
        if points.is_empty() {
            return Err(Error::Input("compact set is empty".into()));
        }
        Ok(Self { descriptor, resolution, points })
    }

    /// Default discretization for degree `k`: at least `32k` Lobatto intervals (a multiple
    /// of `k`, so the extrema of `T_k` are nodes) or `64k` circle angles.
    pub fn for_degree(descriptor: SetDescriptor, k: usize) -> Result<Self> {
        let k = k.max(1);
        let n = match descriptor {
            SetDescriptor::Interval { .. } => k * 32usize.max(64usize.div_ceil(k)),
            _ => 64 * k.max(4),
        };
        Self::new(descriptor, n)
    }

    /// Doubling refinement of the same descriptor (nested node sets).
    pub fn refined(&self) -> Result<Self> {
        Self::new(self.descriptor.clone(), 2 * self.resolution)
    }

    pub fn is_real(&self) -> bool {
        self.points.iter().all(|z| z.im == 0.0)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

use SetDescriptor as Self_;

/// Positive weight `h` on the set.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdmissibleWeight {
    #[default]
    Unit,
    /// `h(z) = exp(a · Σ Re z_i)`.
    Exponential { a: f64 },
    /// `h(z) = (1 + |z|²)^{−p/2}`.
    Modulus { p: f64 },
}

impl AdmissibleWeight {
    pub fn name(&self) -> String {
        match self {
            Self::Unit => "unit".into(),
            Self::Exponential { a } => format!("exp({a} Re z)"),
            Self::Modulus { p } => format!("(1+|z|^2)^(-{p}/2)"),
        }
    }

    /// `ln h` at a point of `ℂⁿ`.
    pub fn ln_h(&self, z: &[Complex64]) -> f64 {
        match self {
            Self::Unit => 0.0,
            Self::Exponential { a } => a * z.iter().map(|v| v.re).sum::<f64>(),
            Self::Modulus { p } => -0.5 * p * (1.0 + z.iter().map(|v| v.norm_sqr()).sum::<f64>()).ln(),
        }
    }
}

/// Monic polynomial `z^k + Σ_{i<k} a_i z^i`, coefficients stored low to high with the
/// leading one fixed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonicPolynomial {
    pub degree: usize,
    pub coefficients: Vec<Complex64>,
}

impl MonicPolynomial {
    pub fn new(mut lower: Vec<Complex64>) -> Self {
        let degree = lower.len();
        lower.push(Complex64::new(1.0, 0.0));
        Self { degree, coefficients: lower }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }
}

/// Refinement check of a min–max value under one doubling of the discretization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RefinementCheck {
    pub refined_ln_value: f64,
    pub relative_change: f64,
    pub stable: bool,
}

/// `Y_k = min over monic p of max_K |h^k p|`, with solver diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebyshevNumber {
    pub k: usize,
    pub value: f64,
    pub ln_value: f64,
    /// Certified lower bound for `ln Y_k` on the discretization.
    pub ln_lower_bound: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Fewer than `4k` discretization points.
    pub underresolved: bool,
    /// At most `k` points: some monic polynomial vanishes on the whole set.
    pub degenerate: bool,
    pub refinement: Option<RefinementCheck>,
    pub polynomial: MonicPolynomial,
}

fn solve_number(set: &CompactSet, k: usize, h: &AdmissibleWeight) -> MinimaxResult {
    if let SetDescriptor::Interval { .. } = set.descriptor {
        let grid: Vec<f64> = set.points.iter().map(|z| z.re).collect();
        return minimax_interval(&grid, &|x| k as f64 * h.ln_h(&[Complex64::new(x, 0.0)]), k);
    }
    let ln_w: Vec<f64> = set.points.iter().map(|z| k as f64 * h.ln_h(&[*z])).collect();
    if set.is_real() {
        minimax_real(&set.points.iter().map(|z| z.re).collect::<Vec<_>>(), &ln_w, k)
    } else {
        minimax_complex(&set.points, &ln_w, k)
    }
}

/// Min–max monic polynomial of degree `k` on the discretized set.
pub fn chebyshev_number(set: &CompactSet, k: usize, h: &AdmissibleWeight) -> Result<ChebyshevNumber> {
    let r = solve_number(set, k, h);
    let refinement = if set.descriptor.is_regular() {
        let fine = solve_number(&set.refined()?, k, h);
        let rel = (fine.ln_value - r.ln_value).exp_m1().abs();
        Some(RefinementCheck { refined_ln_value: fine.ln_value, relative_change: rel, stable: rel <= 1e-3 })
    } else {
        None
    };
    Ok(ChebyshevNumber {
        k,
        value: r.ln_value.exp(),
        ln_value: r.ln_value,
        ln_lower_bound: r.ln_lower_bound,
        converged: r.converged,
        iterations: r.iterations,
        underresolved: set.len() < 4 * k,
        degenerate: set.len() <= k,
        refinement,
        polynomial: r.polynomial,
    })
}

/// Fit of a ladder `y_k` against `1/k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LadderFit {
    pub k: Vec<usize>,
    /// `Y_k` or `ln T_k` per rung.
    pub raw: Vec<f64>,
    /// Normalized root `Y_k^{1/k}` or `T_k^{1/binom(k,2)}`.
    pub root: Vec<f64>,
    pub last: f64,
    pub limit: f64,
    pub warnings: Vec<String>,
}

/// `ln Y_k^{1/k} ≈ L + a/k` fitted on the upper half of the ladder.
pub fn chebyshev_constant(descriptor: &SetDescriptor, h: &AdmissibleWeight, k_max: usize) -> Result<LadderFit> {
    if k_max == 0 {
        return Err(Error::Input("ladder needs k_max ≥ 1".into()));
    }
    use rayon::prelude::*;
    let numbers: Vec<Result<ChebyshevNumber>> = (1..=k_max)
        .into_par_iter()
        .map(|k| chebyshev_number(&CompactSet::for_degree(descriptor.clone(), k)?, k, h))
        .collect();
    let mut ks = Vec::new();
    let mut raw = Vec::new();
    let mut logs = Vec::new();
    let mut warnings = Vec::new();
    for n in numbers {
        let n = n?;
        if !n.converged {
            warnings.push(format!("k = {}: exchange did not converge", n.k));
        }
        if n.refinement.is_some_and(|r| !r.stable) {
            warnings.push(format!("k = {}: value changed under refinement", n.k));
        }
        ks.push(n.k);
        raw.push(n.value);
        logs.push(n.ln_value / n.k as f64);
    }
    let lo = k_max / 2;
    let rows: Vec<Vec<f64>> = ks[lo..].iter().map(|&k| vec![1.0, 1.0 / k as f64]).collect();
    let limit = if rows.len() >= 2 { least_squares(&rows, &logs[lo..]).map(|c| c[0]).unwrap_or(logs[k_max - 1]) } else { logs[k_max - 1] };
    Ok(LadderFit {
        k: ks,
        raw,
        root: logs.iter().map(|v| v.exp()).collect(),
        last: logs[k_max - 1].exp(),
        limit: limit.exp(),
        warnings,
    })
}

/// Chebyshev transform on `ℙ¹` of the extremal weight of `K`: `c(α) = (2/k) ln Y_{k(1−α)}`.
#[derive(Clone, Debug, Serialize)]
pub struct FieldP1 {
    pub field: ChebyshevField<f64>,
    /// Slope of the least-squares line `c ≈ s (1 − α)`, halved: an estimate of `ln C(K)`.
    pub fitted_ln_c: f64,
    pub max_linearity_residual: f64,
}

/// Values on the grid `α = j/m`, `m = k_max/2`, extrapolated in `1/k` from `k = m, 2m`.
pub fn chebyshev_field_p1(descriptor: &SetDescriptor, k_max: usize) -> Result<FieldP1> {
    if k_max < 2 {
        return Err(Error::Input("field needs k_max ≥ 2".into()));
    }
    let m = k_max / 2;
    let h = AdmissibleWeight::Unit;
    let mut ln_y = vec![0.0; 2 * m + 1];
    for d in 1..=2 * m {
        ln_y[d] = chebyshev_number(&CompactSet::for_degree(descriptor.clone(), d)?, d, &h)?.ln_value;
    }
    let value = |j: usize| {
        // Degree k(1 − α) at α = j/m for k = m and 2m.
        let v1 = 2.0 / m as f64 * ln_y[m - j];
        let v2 = 2.0 / (2 * m) as f64 * ln_y[2 * (m - j)];
        2.0 * v2 - v1
    };
    let values: Vec<f64> = (0..=m).map(value).collect();
    let field = ChebyshevField::grid(&Body::interval(0.0, 1.0), GridSpec::new(1.0 / m as f64, 0))?
        .fill(|a| values.get((a[0] * m as f64).round() as usize).copied());
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (j, v) in values.iter().enumerate() {
        let x = 1.0 - j as f64 / m as f64;
        sxy += x * v;
        sxx += x * x;
    }
    let slope = sxy / sxx;
    let max_linearity_residual =
        values.iter().enumerate().map(|(j, v)| (v - slope * (1.0 - j as f64 / m as f64)).abs()).fold(0.0, f64::max);
    Ok(FieldP1 { field, fitted_ln_c: slope / 2.0, max_linearity_residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval() -> SetDescriptor {
        SetDescriptor::Interval { a: -1.0, b: 1.0 }
    }

    fn circle() -> SetDescriptor {
        SetDescriptor::Circle { r: 1.0, center: [0.0, 0.0] }
    }

    #[test]
    fn circle_numbers_are_one() {
        for k in [1, 5, 12] {
            let n = chebyshev_number(&CompactSet::for_degree(circle(), k).unwrap(), k, &AdmissibleWeight::Unit).unwrap();
            assert!(n.value.ln().abs() < 1e-9 && n.converged, "{k}: {}", n.value);
        }
    }

    #[test]
    fn interval_numbers_are_powers_of_two() {
        for k in [1, 2, 7, 24] {
            let n = chebyshev_number(&CompactSet::for_degree(interval(), k).unwrap(), k, &AdmissibleWeight::Unit).unwrap();
            assert!((n.ln_value - (1.0 - k as f64) * 2f64.ln()).abs() < 1e-7, "{k}: {}", n.value);
            assert!(n.refinement.unwrap().stable);
        }
    }

    #[test]
    fn two_points_degree_one() {
        let set = CompactSet::new(SetDescriptor::Cloud { points: vec![[-1.0, 0.0], [1.0, 0.0]] }, 1).unwrap();
        let n = chebyshev_number(&set, 1, &AdmissibleWeight::Unit).unwrap();
        assert!((n.value - 1.0).abs() < 1e-12);
        assert!(n.polynomial.coefficients[0].norm() < 1e-12);
        assert!(n.underresolved);
        let n2 = chebyshev_number(&set, 2, &AdmissibleWeight::Unit).unwrap();
        assert!(n2.degenerate && n2.value < 1e-12);
    }

    #[test]
    fn constants_and_scaling() {
        let c = chebyshev_constant(&interval(), &AdmissibleWeight::Unit, 24).unwrap();
        assert!((c.limit - 0.5).abs() < 0.01, "{}", c.limit);
        let d = chebyshev_constant(&SetDescriptor::Disc { r: 1.0, center: [0.0, 0.0] }, &AdmissibleWeight::Unit, 8).unwrap();
        assert!((d.limit - 1.0).abs() < 1e-6);
        let s = chebyshev_constant(&interval().scaled(3.0), &AdmissibleWeight::Unit, 24).unwrap();
        assert!((s.limit - 3.0 * c.limit).abs() < 1e-6);
    }

    #[test]
    fn field_on_p1() {
        let f = chebyshev_field_p1(&interval(), 24).unwrap();
        for (x, v) in f.field.interior() {
            let v = v.unwrap();
            assert!((v - 2.0 * (1.0 - x[0]) * 0.5f64.ln()).abs() < 0.05);
        }
        assert!(f.field.at(&[1.0]).unwrap().abs() < 1e-12);
        let d = chebyshev_field_p1(&SetDescriptor::Disc { r: 1.0, center: [0.0, 0.0] }, 12).unwrap();
        assert!(d.field.interior().iter().all(|(_, v)| v.unwrap().abs() < 1e-9));
    }

    #[test]
    fn descriptors_round_trip_json() {
        let j = r#"[{"kind":"interval","a":-1,"b":1},{"kind":"circle","r":1},{"kind":"cloud","points":[[0,1],[1,0]]}]"#;
        let v: Vec<SetDescriptor> = serde_json::from_str(j).unwrap();
        assert_eq!(v[1], circle());
        let back: Vec<SetDescriptor> = serde_json::from_str(&serde_json::to_string(&v).unwrap()).unwrap();
        assert_eq!(v, back);
    }
}
