//! Gauss–Legendre rules and composite panels.

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// ascending in the node.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut x = vec![0.0f64; n];
    let mut w = vec![0.0f64; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x.into_iter().map(T::lit).collect(), w.into_iter().map(T::lit).collect())
}

/// A one-dimensional quadrature rule: nodes with positive weights.
#[derive(Clone, Debug)]
pub struct Rule1d<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Real> Rule1d<T> {
    /// Gauss–Legendre on `[a, b]`.
    pub fn gauss(a: T, b: T, order: usize) -> Self {
        Self::composite(a, b, 1, order)
    }

    /// `panels` equal Gauss–Legendre panels of the given order on `[a, b]`.
    pub fn composite(a: T, b: T, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre::<T>(order);
        let h = (b - a) / T::of_usize(panels);
        let half = h / T::lit(2.0);
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let mid = a + h * (T::of_usize(p) + T::lit(0.5));
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * *xi);
                weights.push(half * *wi);
            }
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(T) -> T>(&self, f: F) -> T {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| *w * f(*x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials() {
        for n in [1usize, 2, 5, 16, 64] {
            let (x, w) = gauss_legendre::<f64>(n);
            let deg = 2 * n - 1;
            for p in 0..=deg.min(20) {
                let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn composite_integrates_exponential() {
        let r = Rule1d::<f64>::composite(-1.0, 2.0, 4, 12);
        assert!((r.integrate(f64::exp) - (2f64.exp() - (-1f64).exp())).abs() < 1e-13);
        let r32 = Rule1d::<f32>::gauss(0.0, 1.0, 8);
        assert!((r32.integrate(|x| x * x) - 1.0 / 3.0).abs() < 1e-6);
    }
}
