//! Full Gram matrices on `ℙ¹` for weights that depend on the angle.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GramMatrix, Measure};
use crate::error::{Error, Result};
use crate::quadrature::Rule1d;
use crate::scalar::LogSumExp;
use crate::toric::ToricWeight;

/// Angular term `amplitude · cos(harmonic·θ) · sech x` added to `ψ = 2g`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AngularPerturbation {
    pub amplitude: f64,
    pub harmonic: u32,
}

/// Weight `ψ(x, θ) = 2g(x) + a cos(hθ) sech x` on `ℂ* ⊂ ℙ¹`.
#[derive(Clone, Debug, Serialize)]
pub struct DenseWeight {
    pub base: ToricWeight,
    pub perturbation: AngularPerturbation,
}

impl DenseWeight {
    pub fn new(base: ToricWeight, perturbation: AngularPerturbation) -> Result<Self> {
        if base.n != 1 {
            return Err(Error::Input("dense Gram path is implemented on ℙ¹ only".into()));
        }
        Ok(Self { base, perturbation })
    }

    /// `ψ + c`.
    pub fn plus_constant(&self, c: f64) -> Result<Self> {
        Self::new(self.base.plus_constant(c)?, self.perturbation)
    }

    pub fn psi(&self, x: f64, theta: f64) -> f64 {
        let p = self.perturbation;
        2.0 * self.base.eval(&[x]) + p.amplitude * (p.harmonic as f64 * theta).cos() / x.cosh()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseOptions {
    pub half_width: f64,
    pub panels: usize,
    pub order: usize,
    /// Angular nodes; defaults to `max(2k + 64, 128)`.
    pub n_theta: Option<usize>,
}

impl Default for DenseOptions {
    fn default() -> Self {
        Self { half_width: 30.0, panels: 240, order: 16, n_theta: None }
    }
}

/// `G_ij = ∫ z^i z̄^j e^{−kψ} dμ` for `i, j = 0..=k` with `dμ = ρ(x) dx dθ/2π`.
pub fn dense_gram_p1(w: &DenseWeight, mu: &Measure, k: u32, opts: &DenseOptions) -> Result<GramMatrix> {
    mu.validate()?;
    if k > 64 {
        return Err(Error::Input("dense Gram path is limited to k ≤ 64".into()));
    }
    let dim = k as usize + 1;
    let n_theta = opts.n_theta.unwrap_or((2 * k as usize + 64).max(128));
    let rule = Rule1d::<f64>::composite(-opts.half_width, opts.half_width, opts.panels, opts.order);
    let kf = k as f64;
    // Angular Fourier coefficients A_m(x) = (1/N) Σ_l e^{i m θ_l} e^{−k(ψ − 2g)} for m = 0..=k.
    let per_node: Vec<(f64, Vec<Complex64>)> = rule
        .nodes
        .par_iter()
        .map(|&x| {
            let g2 = 2.0 * w.base.eval(&[x]);
            let samples: Vec<f64> = (0..n_theta)
                .map(|l| {
                    let th = std::f64::consts::TAU * l as f64 / n_theta as f64;
                    (-kf * (w.psi(x, th) - g2)).exp()
                })
                .collect();
            let coeffs = (0..dim)
                .map(|m| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (l, s) in samples.iter().enumerate() {
                        let th = std::f64::consts::TAU * (m * l % n_theta) as f64 / n_theta as f64;
                        acc += Complex64::from_polar(*s, th);
                    }
                    acc / n_theta as f64
                })
                .collect();
            (g2, coeffs)
        })
        .collect();
    // Log weights of the radial factor: ln(w_x ρ(x)) − k·2g(x).
    let base: Vec<f64> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .zip(&per_node)
        .map(|((x, wt), (g2, _))| wt.ln() + mu.ln_density(&[*x]) - kf * g2)
        .collect();
    let log_scale: Vec<f64> = (0..dim)
        .map(|i| {
            let mut acc = LogSumExp::<f64>::default();
            for (j, x) in rule.nodes.iter().enumerate() {
                let a0 = per_node[j].1[0].re;
                if a0 > 0.0 {
                    acc.push(base[j] + 2.0 * i as f64 * x + a0.ln());
                }
            }
            0.5 * acc.value()
        })
        .collect();
    if log_scale.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("Gram diagonal underflowed; widen the radial window".into()));
    }
    let rows: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|i| {
            (0..dim)
                .map(|j| {
                    if i == j {
                        return Complex64::new(1.0, 0.0);
                    }
                    let m = i.abs_diff(j);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (q, x) in rule.nodes.iter().enumerate() {
                        let e = base[q] + (i + j) as f64 * x - log_scale[i] - log_scale[j];
                        // z^i z̄^j carries e^{i(i−j)θ}; the θ-average picks A_{i−j} = conj(A_{j−i}).
                        let a = per_node[q].1[m];
                        acc += e.exp() * if i > j { a } else { a.conj() };
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut normalized = Vec::with_capacity(dim * dim);
    for r in rows {
        normalized.extend(r);
    }
    Ok(GramMatrix { dim, log_scale, normalized, diagonal: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{gram_diagonal, minimal_sections, MonomialBasis, MonomialOrder};

    #[test]
    fn zero_perturbation_reproduces_the_diagonal_path() {
        let fs = ToricWeight::fubini_study(1, 1.0).unwrap();
        let mu = Measure::default();
        let k = 12;
        let g = dense_gram_p1(&DenseWeight::new(fs.clone(), AngularPerturbation::default()).unwrap(), &mu, k, &DenseOptions::default()).unwrap();
        let b = MonomialBasis::projective(1, k, MonomialOrder::Lex).unwrap();
        let d = gram_diagonal(&b, &fs, &mu).unwrap();
        for i in 0..=k as usize {
            assert!((2.0 * g.log_scale[i] - d[i]).abs() < 1e-10);
            for j in 0..=k as usize {
                if i != j {
                    assert!(g.normalized[i * (k as usize + 1) + j].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn perturbed_gram_is_hermitian_and_factorizes() {
        let fs = ToricWeight::fubini_study(1, 1.0).unwrap();
        let w = DenseWeight::new(fs, AngularPerturbation { amplitude: 0.3, harmonic: 1 }).unwrap();
        let k = 16;
        let g = dense_gram_p1(&w, &Measure::default(), k, &DenseOptions::default()).unwrap();
        let n = g.dim;
        let mut off = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                assert!((g.normalized[i * n + j] - g.normalized[j * n + i].conj()).norm() < 1e-14);
                if i != j {
                    off = off.max(g.normalized[i * n + j].norm());
                }
            }
        }
        assert!(off > 1e-3);
        let f = minimal_sections(&g, k, (0..n as i64).map(|i| vec![i]).collect(), MonomialOrder::Lex).unwrap();
        let ln_det = g.ln_det().unwrap();
        assert!((f.ln_det() - ln_det).abs() <= 1e-8 * ln_det.abs().max(1.0));
    }
}
