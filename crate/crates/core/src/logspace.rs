//! Log-domain helpers for probability weights that underflow in linear space.

use crate::Scalar;

/// `ln Σ exp(x_i)`, with `-inf` for an empty or all-zero input.
pub fn log_sum_exp<T: Scalar>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if !max.is_finite() {
        return max;
    }
    let sum = xs.iter().fold(T::zero(), |acc, &x| acc + (x - max).exp());
    max + sum.ln()
}

/// `ln |z|²` for a complex amplitude, returning `-inf` at exactly zero.
#[inline]
pub fn ln_abs2<T: Scalar>(z: num_complex::Complex<T>) -> T {
    z.norm_sqr().ln()
}
