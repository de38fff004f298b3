//! Evaluable weight expressions `g : ℝⁿ → ℝ`.

use serde::{Deserialize, Serialize};

use crate::scalar::LogSumExp;

fn one() -> f64 {
    1.0
}

/// Closed-form building blocks for toric weights, serialized with a `kind` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Expr {
    /// `(scale/2)·ln(1 + Σ_{i∈coords} e^{2x_i})`, all coordinates by default.
    FubiniStudy {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<usize>>,
    },
    /// `(1/2)·ln Σ_j e^{2(⟨a_j,x⟩ + b_j)}` with pieces `[a_j..., b_j]`.
    LogSumExp { pieces: Vec<Vec<f64>> },
    /// `max_j ⟨a_j,x⟩ + b_j` with pieces `[a_j..., b_j]`.
    MaxAffine { pieces: Vec<Vec<f64>> },
    Sum { terms: Vec<Expr> },
    Min { terms: Vec<Expr> },
    Constant { value: f64 },
    /// `(scale/2)·|x − center|²`.
    Quadratic {
        #[serde(default = "one")]
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// One-dimensional `C¹` weight with `g′ = clamp((lo+hi)/2 + x·(hi−lo)/width, lo, hi)`, `g(0) = 0`.
    ClampedQuadratic { lo: f64, hi: f64, width: f64 },
    /// `amplitude·(1 − |x−center|²/radius²)³₊`.
    QuadraticBump { amplitude: f64, center: Vec<f64>, radius: f64 },
    Scaled { factor: f64, inner: Box<Expr> },
    /// `inner(x − offset)`.
    Shifted { offset: Vec<f64>, inner: Box<Expr> },
    /// `inner` with some coordinates frozen; free coordinates fill the `null` slots in order.
    Slice { fixed: Vec<Option<f64>>, inner: Box<Expr> },
}

/// Value, gradient and row-major Hessian.
pub type Jet = (f64, Vec<f64>, Vec<f64>);

impl Expr {
    pub fn fubini_study(scale: f64) -> Self {
        Self::FubiniStudy { scale, coords: None }
    }

    pub fn constant(value: f64) -> Self {
        Self::Constant { value }
    }

    pub fn plus(self, other: Expr) -> Self {
        match self {
            Self::Sum { mut terms } => {
                terms.push(other);
                Self::Sum { terms }
            }
            e => Self::Sum { terms: vec![e, other] },
        }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self::Scaled { factor, inner: Box::new(self) }
    }

    pub fn shifted(self, offset: Vec<f64>) -> Self {
        Self::Shifted { offset, inner: Box::new(self) }
    }

    /// Whether [`Expr::jet`] is available (piecewise-smooth `C¹` pieces count as smooth).
    pub fn is_smooth(&self) -> bool {
        match self {
            Self::MaxAffine { pieces } => pieces.len() <= 1,
            Self::Min { terms } => terms.len() <= 1 && terms.iter().all(Self::is_smooth),
            Self::Sum { terms } => terms.iter().all(Self::is_smooth),
            Self::Scaled { inner, .. } | Self::Shifted { inner, .. } | Self::Slice { inner, .. } => inner.is_smooth(),
            _ => true,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::FubiniStudy { scale, coords } => {
                let mut acc = LogSumExp::default();
                acc.push(0.0);
                match coords {
                    Some(c) => c.iter().for_each(|&i| acc.push(2.0 * x[i])),
                    None => x.iter().for_each(|&xi| acc.push(2.0 * xi)),
                }
                0.5 * scale * acc.value()
            }
            Self::LogSumExp { pieces } => {
                let mut acc = LogSumExp::default();
                for p in pieces {
                    acc.push(2.0 * affine(p, x));
                }
                0.5 * acc.value()
            }
            Self::MaxAffine { pieces } => pieces.iter().map(|p| affine(p, x)).fold(f64::NEG_INFINITY, f64::max),
            Self::Sum { terms } => terms.iter().map(|t| t.eval(x)).sum(),
            Self::Min { terms } => terms.iter().map(|t| t.eval(x)).fold(f64::INFINITY, f64::min),
            Self::Constant { value } => *value,
            Self::Quadratic { scale, center } => 0.5 * scale * sq_dist(x, center.as_deref()),
            Self::ClampedQuadratic { lo, hi, width } => {
                let (m, s, w) = ((lo + hi) / 2.0, (hi - lo) / width, width / 2.0);
                let q = |t: f64| m * t + 0.5 * s * t * t;
                if x[0] > w {
                    q(w) + hi * (x[0] - w)
                } else if x[0] < -w {
                    q(-w) + lo * (x[0] + w)
                } else {
                    q(x[0])
                }
            }
            Self::QuadraticBump { amplitude, center, radius } => {
                let u = 1.0 - sq_dist(x, Some(center)) / (radius * radius);
                if u > 0.0 {
                    amplitude * u * u * u
                } else {
                    0.0
                }
            }
            Self::Scaled { factor, inner } => factor * inner.eval(x),
            Self::Shifted { offset, inner } => {
                let y: Vec<f64> = x.iter().zip(offset).map(|(a, b)| a - b).collect();
                inner.eval(&y)
            }
            Self::Slice { fixed, inner } => inner.eval(&unslice(fixed, x)),
        }
    }

    /// Value, gradient and Hessian; `None` for non-smooth expressions.
    pub fn jet(&self, x: &[f64]) -> Option<Jet> {
        let n = x.len();
        let zero = || (0.0, vec![0.0; n], vec![0.0; n * n]);
        Some(match self {
            Self::FubiniStudy { scale, coords } => {
                let idx: Vec<usize> = coords.clone().unwrap_or_else(|| (0..n).collect());
                let mx = idx.iter().map(|&i| 2.0 * x[i]).fold(0.0, f64::max);
                let e: Vec<f64> = idx.iter().map(|&i| (2.0 * x[i] - mx).exp()).collect();
                let s = (-mx).exp() + e.iter().sum::<f64>();
                let (v, mut g, mut h) = zero();
                let v = v + 0.5 * scale * (mx + s.ln());
                for (a, &i) in idx.iter().enumerate() {
                    let qa = e[a] / s;
                    g[i] = scale * qa;
                    for (b, &j) in idx.iter().enumerate() {
                        let qb = e[b] / s;
                        h[i * n + j] = scale * 2.0 * (if a == b { qa } else { 0.0 } - qa * qb);
                    }
                }
                (v, g, h)
            }
            Self::LogSumExp { pieces } => {
                let t: Vec<f64> = pieces.iter().map(|p| 2.0 * affine(p, x)).collect();
                let mx = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = t.iter().map(|v| (v - mx).exp()).collect();
                let s: f64 = e.iter().sum();
                let (_, mut g, mut h) = zero();
                for (p, w) in pieces.iter().zip(&e) {
                    for i in 0..n {
                        g[i] += w / s * p[i];
                    }
                }
                for (p, w) in pieces.iter().zip(&e) {
                    for i in 0..n {
                        for j in 0..n {
                            h[i * n + j] += 2.0 * w / s * (p[i] - g[i]) * (p[j] - g[j]);
                        }
                    }
                }
                (0.5 * (mx + s.ln()), g, h)
            }
            Self::MaxAffine { pieces } if pieces.len() == 1 => {
                let (_, mut g, h) = zero();
                g.copy_from_slice(&pieces[0][..n]);
                (affine(&pieces[0], x), g, h)
            }
            Self::Min { terms } if terms.len() == 1 => terms[0].jet(x)?,
            Self::MaxAffine { .. } | Self::Min { .. } => return None,
            Self::Sum { terms } => {
                let (mut v, mut g, mut h) = zero();
                for t in terms {
                    let (tv, tg, th) = t.jet(x)?;
                    v += tv;
                    g.iter_mut().zip(&tg).for_each(|(a, b)| *a += b);
                    h.iter_mut().zip(&th).for_each(|(a, b)| *a += b);
                }
                (v, g, h)
            }
            Self::Constant { value } => (*value, vec![0.0; n], vec![0.0; n * n]),
            Self::Quadratic { scale, center } => {
                let (_, mut g, mut h) = zero();
                for i in 0..n {
                    g[i] = scale * (x[i] - center.as_ref().map_or(0.0, |c| c[i]));
                    h[i * n + i] = *scale;
                }
                (self.eval(x), g, h)
            }
            Self::ClampedQuadratic { lo, hi, width } => {
                let s = (hi - lo) / width;
                let d = ((lo + hi) / 2.0 + s * x[0]).clamp(*lo, *hi);
                let c = if x[0].abs() < width / 2.0 { s } else { 0.0 };
                (self.eval(x), vec![d], vec![c])
            }
            Self::QuadraticBump { amplitude, center, radius } => {
                let r2 = radius * radius;
                let u = 1.0 - sq_dist(x, Some(center)) / r2;
                let (_, mut g, mut h) = zero();
                if u > 0.0 {
                    for i in 0..n {
                        let di = x[i] - center[i];
                        g[i] = amplitude * 3.0 * u * u * (-2.0 * di / r2);
                        for j in 0..n {
                            let dj = x[j] - center[j];
                            h[i * n + j] = amplitude * 24.0 * u * di * dj / (r2 * r2);
                        }
                        h[i * n + i] -= amplitude * 6.0 * u * u / r2;
                    }
                    (amplitude * u * u * u, g, h)
                } else {
                    (0.0, g, h)
                }
            }
            Self::Scaled { factor, inner } => {
                let (v, g, h) = inner.jet(x)?;
                (factor * v, g.iter().map(|a| factor * a).collect(), h.iter().map(|a| factor * a).collect())
            }
            Self::Shifted { offset, inner } => {
                let y: Vec<f64> = x.iter().zip(offset).map(|(a, b)| a - b).collect();
                inner.jet(&y)?
            }
            Self::Slice { fixed, inner } => {
                let full = unslice(fixed, x);
                let m = full.len();
                let (v, g, h) = inner.jet(&full)?;
                let free: Vec<usize> = (0..m).filter(|&i| fixed[i].is_none()).collect();
                let gg = free.iter().map(|&i| g[i]).collect();
                let hh = free.iter().flat_map(|&i| free.iter().map(move |&j| (i, j))).map(|(i, j)| h[i * m + j]).collect();
                (v, gg, hh)
            }
        })
    }
}

fn affine(p: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    p[..n].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + p[n]
}

fn sq_dist(x: &[f64], c: Option<&[f64]>) -> f64 {
    x.iter().enumerate().map(|(i, v)| (v - c.map_or(0.0, |c| c[i])).powi(2)).sum()
}

fn unslice(fixed: &[Option<f64>], x: &[f64]) -> Vec<f64> {
    let mut it = x.iter();
    fixed.iter().map(|f| f.unwrap_or_else(|| *it.next().expect("slice arity"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_jet(e: &Expr, x: &[f64]) {
        let (v, g, h) = e.jet(x).unwrap();
        assert!((v - e.eval(x)).abs() < 1e-12);
        let n = x.len();
        let eps = 1e-5;
        for i in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += eps;
            xm[i] -= eps;
            let fd = (e.eval(&xp) - e.eval(&xm)) / (2.0 * eps);
            assert!((fd - g[i]).abs() < 1e-7, "grad {i}: {fd} vs {}", g[i]);
            let gp = e.jet(&xp).unwrap().1;
            let gm = e.jet(&xm).unwrap().1;
            for j in 0..n {
                let fd = (gp[j] - gm[j]) / (2.0 * eps);
                assert!((fd - h[j * n + i]).abs() < 1e-6, "hess {i}{j}: {fd} vs {}", h[j * n + i]);
            }
        }
    }

    #[test]
    fn jets_match_finite_differences() {
        let bump = Expr::QuadraticBump { amplitude: 0.1, center: vec![0.3, -0.2], radius: 2.0 };
        let fs2 = Expr::fubini_study(1.0);
        let lse = Expr::LogSumExp { pieces: vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.3], vec![1.0, 1.0, -0.2]] };
        for x in [[0.1, 0.2], [-3.0, 1.5], [2.0, -0.7]] {
            check_jet(&fs2, &x);
            check_jet(&bump, &x);
            check_jet(&lse, &x);
            check_jet(&fs2.clone().plus(bump.clone()).scaled(1.7).shifted(vec![0.4, 0.1]), &x);
            check_jet(&Expr::Quadratic { scale: 2.0, center: Some(vec![1.0, 1.0]) }, &x);
        }
        let sl = Expr::Slice { fixed: vec![Some(-1.0), None], inner: Box::new(fs2) };
        check_jet(&sl, &[0.4]);
        let fs1 = Expr::FubiniStudy { scale: 2.0, coords: Some(vec![1]) };
        check_jet(&fs1, &[0.3, -0.4]);
        check_jet(&Expr::ClampedQuadratic { lo: 0.0, hi: 1.0, width: 2.0 }, &[0.3]);
    }

    #[test]
    fn fubini_study_is_stable_for_large_arguments() {
        let fs = Expr::fubini_study(1.0);
        assert!((fs.eval(&[400.0]) - 400.0).abs() < 1e-12);
        assert!(fs.eval(&[-400.0]).abs() < 1e-300);
        assert!((fs.eval(&[0.0]) - 0.5 * 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn clamped_quadratic_is_c1() {
        let e = Expr::ClampedQuadratic { lo: 0.0, hi: 1.0, width: 2.0 };
        let l = e.eval(&[1.0 - 1e-9]);
        let r = e.eval(&[1.0 + 1e-9]);
        assert!((l - r).abs() < 1e-8);
        assert_eq!(e.jet(&[5.0]).unwrap().1[0], 1.0);
        assert_eq!(e.jet(&[-5.0]).unwrap().1[0], 0.0);
    }

    #[test]
    fn json_round_trip() {
        let e: Expr = serde_json::from_str(r#"{"kind":"sum","terms":[{"kind":"fubini_study","scale":1},{"kind":"quadratic_bump","amplitude":0.1,"center":[0],"radius":2}]}"#).unwrap();
        let back: Expr = serde_json::from_str(&serde_json::to_string(&e).unwrap()).unwrap();
        assert_eq!(e, back);
        assert!(e.is_smooth());
        let m: Expr = serde_json::from_str(r#"{"kind":"max_affine","pieces":[[0,0],[1,0]]}"#).unwrap();
        assert!(!m.is_smooth() && m.eval(&[2.0]) == 2.0);
    }
}
