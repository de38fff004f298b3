//! Small dense linear algebra on row-major buffers, generic over the scalar.

use num_complex::Complex;

use crate::scalar::Real;

/// LU factorization with partial pivoting of a square row-major matrix.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    n: usize,
    lu: Vec<T>,
    perm: Vec<usize>,
    sign: T,
}

impl<T: Real> Lu<T> {
    /// Factors `a` (row-major, `n × n`); `None` when a pivot vanishes.
    pub fn new(mut a: Vec<T>, n: usize) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let scale = a.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tiny = scale * T::epsilon() * T::lit(1e-3);
        for c in 0..n {
            let p = (c..n)
                .max_by(|&i, &j| a[i * n + c].abs().partial_cmp(&a[j * n + c].abs()).unwrap())
                .unwrap();
            if !(a[p * n + c].abs() > tiny) {
                return None;
            }
            if p != c {
                for j in 0..n {
                    a.swap(p * n + j, c * n + j);
                }
                perm.swap(p, c);
                sign = -sign;
            }
            let piv = a[c * n + c];
            for i in c + 1..n {
                let f = a[i * n + c] / piv;
                a[i * n + c] = f;
                if f != T::zero() {
                    for j in c + 1..n {
                        a[i * n + j] = a[i * n + j] - f * a[c * n + j];
                    }
                }
            }
        }
        Some(Self { n, lu: a, perm, sign })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - self.lu[i * n + j] * x[j];
            }
            x[i] = x[i] / self.lu[i * n + i];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            for j in 0..i {
                y[i] = y[i] - self.lu[j * n + i] * y[j];
            }
            y[i] = y[i] / self.lu[i * n + i];
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] = y[i] - self.lu[j * n + i] * y[j];
            }
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// `ln |det A|` and the sign of the determinant.
    pub fn ln_abs_det(&self) -> (T, T) {
        let n = self.n;
        let mut s = self.sign;
        let mut acc = T::zero();
        for i in 0..n {
            let d = self.lu[i * n + i];
            if d < T::zero() {
                s = -s;
            }
            acc = acc + d.abs().ln();
        }
        (acc, s)
    }
}

/// Solves a dense system given as nested rows.
pub fn solve<T: Real>(a: Vec<Vec<T>>, b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let flat: Vec<T> = a.into_iter().flatten().collect();
    Lu::new(flat, n).map(|lu| lu.solve(&b))
}

/// `ln |det A|` of a complex row-major matrix by partial-pivot LU.
pub fn ln_abs_det_complex<T: Real>(mut a: Vec<Complex<T>>, n: usize) -> Option<T> {
    assert_eq!(a.len(), n * n);
    let mut acc = T::zero();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i * n + c].norm().partial_cmp(&a[j * n + c].norm()).unwrap())
            .unwrap();
        if a[p * n + c].norm() == T::zero() {
            return None;
        }
        if p != c {
            for j in 0..n {
                a.swap(p * n + j, c * n + j);
            }
        }
        let piv = a[c * n + c];
        acc = acc + piv.norm().ln();
        for i in c + 1..n {
            let f = a[i * n + c] / piv;
            for j in c + 1..n {
                let t = a[c * n + j];
                a[i * n + j] = a[i * n + j] - f * t;
            }
        }
    }
    Some(acc)
}

/// Least squares `min ‖A c − b‖₂` for a tall complex matrix given row-major
/// (`rows × cols`), by modified Gram–Schmidt with one reorthogonalization pass.
pub fn lstsq_complex<T: Real>(
    a: &[Complex<T>],
    rows: usize,
    cols: usize,
    b: &[Complex<T>],
) -> Option<Vec<Complex<T>>> {
    let mut q: Vec<Vec<Complex<T>>> = (0..cols).map(|j| (0..rows).map(|i| a[i * cols + j]).collect()).collect();
    let mut r = vec![Complex::new(T::zero(), T::zero()); cols * cols];
    let dot = |u: &[Complex<T>], v: &[Complex<T>]| -> Complex<T> {
        u.iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |s, (x, y)| s + x.conj() * y)
    };
    for j in 0..cols {
        let col_norm = dot(&q[j], &q[j]).re.sqrt();
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = q.split_at_mut(j);
                let h = dot(&head[i], &tail[0]);
                r[i * cols + j] = r[i * cols + j] + h;
                for (t, s) in tail[0].iter_mut().zip(&head[i]) {
                    *t = *t - *s * h;
                }
            }
        }
        let nrm = dot(&q[j], &q[j]).re.sqrt();
        if !(nrm > col_norm * T::epsilon() * T::lit(64.0)) || nrm == T::zero() {
            return None;
        }
        r[j * cols + j] = Complex::new(nrm, T::zero());
        for t in q[j].iter_mut() {
            *t = *t / nrm;
        }
    }
    let mut c: Vec<Complex<T>> = (0..cols).map(|j| dot(&q[j], b)).collect();
    for i in (0..cols).rev() {
        for j in i + 1..cols {
            let t = r[i * cols + j] * c[j];
            c[i] = c[i] - t;
        }
        c[i] = c[i] / r[i * cols + i];
    }
    Some(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_and_transposes() {
        let a = vec![2.0f64, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        let lu = Lu::new(a.clone(), 3).unwrap();
        let x = lu.solve(&[1.0, 2.0, 3.0]);
        for i in 0..3 {
            let r: f64 = (0..3).map(|j| a[i * 3 + j] * x[j]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
        let y = lu.solve_transpose(&[1.0, 0.0, -1.0]);
        for j in 0..3 {
            let r: f64 = (0..3).map(|i| a[i * 3 + j] * y[i]).sum();
            assert!((r - [1.0, 0.0, -1.0][j]).abs() < 1e-12);
        }
        let (ld, s) = lu.ln_abs_det();
        assert!((ld - 18f64.ln()).abs() < 1e-12 && s > 0.0);
    }

    #[test]
    fn singular_matrix_rejected() {
        assert!(Lu::new(vec![1.0f64, 2.0, 2.0, 4.0], 2).is_none());
    }

    #[test]
    fn complex_det_and_lstsq() {
        let z = |a: f64, b: f64| Complex::new(a, b);
        let a = vec![z(1.0, 1.0), z(0.0, 0.0), z(0.0, 0.0), z(0.0, 2.0)];
        let ld = ln_abs_det_complex(a, 2).unwrap();
        assert!((ld - (2f64.sqrt() * 2.0).ln()).abs() < 1e-12);
        let rows = vec![z(1.0, 0.0), z(1.0, 0.0), z(1.0, 0.0)];
        let c = lstsq_complex(&rows, 3, 1, &[z(1.0, 0.0), z(2.0, 0.0), z(3.0, 3.0)]).unwrap();
        assert!((c[0] - z(2.0, 1.0)).norm() < 1e-12);
    }
}
