//! Scalar abstractions shared by every numerical routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed};

/// Floating scalar used by the numerical core (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a count or index into the scalar type.
    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Lossy conversion to `f64` for reporting.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + Sum + 'static
{
}

/// Ordered field used by the hull code: exact for rationals and integers,
/// approximate for floats.
pub trait OrderedField: Clone + PartialOrd + Num + Signed + Debug {}

impl<T> OrderedField for T where T: Clone + PartialOrd + Num + Signed + Debug {}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn log_add_exp<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    if b == T::neg_infinity() {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln Σ w_i exp(v_i)` over pairs `(v_i, ln w_i)` folded in one pass.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp<T> {
    max: T,
    acc: T,
}

impl<T: Real> Default for LogSumExp<T> {
    fn default() -> Self {
        Self { max: T::neg_infinity(), acc: T::zero() }
    }
}

impl<T: Real> LogSumExp<T> {
    pub fn push(&mut self, v: T) {
        if v == T::neg_infinity() {
            return;
        }
        if v > self.max {
            self.acc = self.acc * (self.max - v).exp() + T::one();
            self.max = v;
        } else {
            self.acc = self.acc + (v - self.max).exp();
        }
    }

    pub fn value(&self) -> T {
        if self.max == T::neg_infinity() {
            T::neg_infinity()
        } else {
            self.max + self.acc.ln()
        }
    }
}

/// `ln C(n, j)` via the log-gamma-free product form, exact enough for n ≤ 10^6.
pub fn ln_binomial(n: u64, j: u64) -> f64 {
    if j > n {
        return f64::NEG_INFINITY;
    }
    let j = j.min(n - j);
    (0..j).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// Exact binomial coefficient, `None` on overflow.
pub fn binomial(n: u64, j: u64) -> Option<u64> {
    if j > n {
        return Some(0);
    }
    let j = j.min(n - j);
    let mut acc: u128 = 1;
    for i in 0..j {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// `n!` as a float.
pub fn factorial<T: Real>(n: usize) -> T {
    (1..=n).fold(T::one(), |acc, i| acc * T::of_usize(i))
}

/// Least-squares fit of `y ≈ Σ c_j φ_j(x)` by normal equations on a tiny basis.
pub fn least_squares<T: Real>(rows: &[Vec<T>], y: &[T]) -> Option<Vec<T>> {
    let m = rows.first()?.len();
    if rows.len() < m {
        return None;
    }
    let mut a = vec![vec![T::zero(); m]; m];
    let mut b = vec![T::zero(); m];
    for (r, &yi) in rows.iter().zip(y) {
        for i in 0..m {
            b[i] = b[i] + r[i] * yi;
            for j in 0..m {
                a[i][j] = a[i][j] + r[i] * r[j];
            }
        }
    }
    crate::linalg::solve(a, b)
}
