//! Log-scaled Hermitian Gram matrices and the reversed Cholesky factorization that yields
//! the norms of minimal leading-term sections.

use num_complex::Complex64;
use serde::Serialize;

use super::MonomialOrder;
use crate::error::{Error, Result};
use crate::linalg::ln_abs_det_complex;

/// Hermitian positive definite `G = D N D` with `D = diag(e^{s_i})` and `N` unit-diagonal,
/// so entries of any magnitude stay representable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramMatrix {
    pub dim: usize,
    /// `s_i = ½ ln G_ii`.
    pub log_scale: Vec<f64>,
    /// Row-major normalized matrix `N_ij = G_ij e^{−s_i − s_j}`.
    pub normalized: Vec<Complex64>,
    /// Whether off-diagonal entries vanish by construction.
    pub diagonal: bool,
}

impl GramMatrix {
    /// Diagonal Gram matrix from `ln G_ii`.
    pub fn diagonal(log_diag: Vec<f64>) -> Self {
        let dim = log_diag.len();
        let mut normalized = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            normalized[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        Self { dim, log_scale: log_diag.into_iter().map(|v| 0.5 * v).collect(), normalized, diagonal: true }
    }

    /// From explicit entries; the diagonal must be positive.
    pub fn from_complex(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Input("Gram matrix must be square".into()));
        }
        let mut log_scale = Vec::with_capacity(dim);
        for (i, r) in rows.iter().enumerate() {
            if !(r[i].re > 0.0) {
                return Err(Error::Singular { condition: f64::INFINITY });
            }
            log_scale.push(0.5 * r[i].re.ln());
        }
        let mut normalized = Vec::with_capacity(dim * dim);
        for (i, r) in rows.iter().enumerate() {
            for (j, v) in r.iter().enumerate() {
                normalized.push(if i == j { Complex64::new(1.0, 0.0) } else { v * (-log_scale[i] - log_scale[j]).exp() });
            }
        }
        Ok(Self { dim, log_scale, normalized, diagonal: false })
    }

    pub fn from_real(rows: &[Vec<f64>]) -> Result<Self> {
        let c: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect()).collect();
        Self::from_complex(&c)
    }

    /// Denormalized entry (may overflow for large scales).
    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.normalized[i * self.dim + j] * (self.log_scale[i] + self.log_scale[j]).exp()
    }

    /// `ln det G` by partial-pivot LU of the normalized matrix.
    pub fn ln_det(&self) -> Result<f64> {
        let ln_n = ln_abs_det_complex(self.normalized.clone(), self.dim).ok_or(Error::Singular { condition: f64::INFINITY })?;
        Ok(ln_n + 2.0 * self.log_scale.iter().sum::<f64>())
    }

    /// Gram matrix of the rescaled basis `s_i e^{−f_i}`.
    pub fn rescaled(&self, log_factors: &[f64]) -> Self {
        let mut g = self.clone();
        g.log_scale.iter_mut().zip(log_factors).for_each(|(s, f)| *s -= f);
        g
    }

    /// Gram matrix of the recombined basis `s'_i = Σ_j B_ij s_j`, i.e. `B G B*`.
    pub fn recombined(&self, b: &[Complex64]) -> Result<Self> {
        let n = self.dim;
        assert_eq!(b.len(), n * n);
        let shift = self.log_scale.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let d: Vec<f64> = self.log_scale.iter().map(|s| (s - shift).exp()).collect();
        let mut rows = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    for l in 0..n {
                        acc += b[i * n + k] * d[k] * self.normalized[k * n + l] * d[l] * b[j * n + l].conj();
                    }
                }
                rows[i][j] = acc;
            }
        }
        let mut g = Self::from_complex(&rows)?;
        g.log_scale.iter_mut().for_each(|s| *s += shift);
        Ok(g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Conditioning {
    /// Smallest Schur-complement pivot of the normalized matrix.
    pub min_pivot: f64,
    /// `1 / min_pivot`, a lower bound for the condition number of the normalized matrix.
    pub condition_estimate: f64,
}

/// `log_diag[i] = ln ‖t_i‖²` where `t_i` is `s_i` minus its projection onto the span of the
/// order-larger basis elements.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GramFactorization {
    pub k: u32,
    pub exponents: Vec<Vec<i64>>,
    pub log_diag: Vec<f64>,
    pub order: MonomialOrder,
    pub conditioning: Conditioning,
}

impl GramFactorization {
    pub fn ln_det(&self) -> f64 {
        self.log_diag.iter().sum()
    }
}

/// Smallest admissible pivot of the normalized matrix.
const PIVOT_FLOOR: f64 = 1e-13;

/// Cholesky factorization processed from the last (order-maximal) basis element backward.
///
/// `exponents` must be sorted increasingly by `order`, matching the rows of `g`.
pub fn minimal_sections(g: &GramMatrix, k: u32, exponents: Vec<Vec<i64>>, order: MonomialOrder) -> Result<GramFactorization> {
    let n = g.dim;
    if exponents.len() != n {
        return Err(Error::Input("exponent count differs from the Gram dimension".into()));
    }
    if g.diagonal {
        let log_diag = g.log_scale.iter().map(|s| 2.0 * s).collect();
        let conditioning = Conditioning { min_pivot: 1.0, condition_estimate: 1.0 };
        return Ok(GramFactorization { k, exponents, log_diag, order, conditioning });
    }
    // Row m of the factor corresponds to original index n − 1 − m.
    let at = |m: usize, l: usize| g.normalized[(n - 1 - m) * n + (n - 1 - l)];
    let mut low = vec![Complex64::new(0.0, 0.0); n * n];
    let mut pivots = vec![0.0; n];
    for j in 0..n {
        let mut d = at(j, j).re;
        for p in 0..j {
            d -= low[j * n + p].norm_sqr();
        }
        if !(d > PIVOT_FLOOR) {
            return Err(Error::Singular { condition: if d > 0.0 { 1.0 / d } else { f64::INFINITY } });
        }
        pivots[j] = d;
        let r = d.sqrt();
        low[j * n + j] = Complex64::new(r, 0.0);
        for i in j + 1..n {
            let mut s = at(i, j);
            for p in 0..j {
                s -= low[i * n + p] * low[j * n + p].conj();
            }
            low[i * n + j] = s / r;
        }
    }
    let log_diag = (0..n).map(|i| pivots[n - 1 - i].ln() + 2.0 * g.log_scale[i]).collect();
    let min_pivot = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(GramFactorization {
        k,
        exponents,
        log_diag,
        order,
        conditioning: Conditioning { min_pivot, condition_estimate: 1.0 / min_pivot },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(n: usize) -> Vec<Vec<i64>> {
        (0..n as i64).map(|i| vec![i]).collect()
    }

    #[test]
    fn diagonal_input_returns_the_diagonal() {
        let g = GramMatrix::diagonal(vec![0.3, -700.0, 1200.0]);
        let f = minimal_sections(&g, 2, ex(3), MonomialOrder::Lex).unwrap();
        assert_eq!(f.log_diag, vec![0.3, -700.0, 1200.0]);
        let d = GramMatrix::from_real(&[vec![2.0, 0.0], vec![0.0, 5.0]]).unwrap();
        let f = minimal_sections(&d, 1, ex(2), MonomialOrder::Lex).unwrap();
        assert!((f.log_diag[0] - 2f64.ln()).abs() < 1e-15 && (f.log_diag[1] - 5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn last_element_is_untouched() {
        let g = GramMatrix::from_real(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let f = minimal_sections(&g, 1, ex(2), MonomialOrder::Lex).unwrap();
        assert!(f.log_diag[0].abs() < 1e-15 && f.log_diag[1].abs() < 1e-15);
        assert!(g.ln_det().unwrap().abs() < 1e-15);
    }

    #[test]
    fn singular_input_is_reported() {
        let g = GramMatrix::from_real(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(minimal_sections(&g, 1, ex(2), MonomialOrder::Lex), Err(Error::Singular { .. })));
    }
}
