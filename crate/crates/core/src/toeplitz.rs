//! Exponential of a lower-triangular Toeplitz matrix.
//!
//! Such matrices commute with the shift, so `exp(Ω)` is again lower-triangular
//! Toeplitz and only its first column is needed. Writing that column as the
//! coefficients of `exp(ω(z))` for the power series `ω(z) = Σ ω_k z^k`, the
//! identity `x' = ω' x` gives the recurrence
//! `x_0 = e^{ω_0}`, `x_m = Σ_{j<m} ((m − j)/m) ω_{m−j} x_j`.

/// First column of `exp(Ω)` where `Ω` is lower-triangular Toeplitz with first
/// column `omega`.
pub fn toeplitz_exp_column(omega: &[f64]) -> Vec<f64> {
    let k = omega.len();
    let mut x = Vec::with_capacity(k);
    if k == 0 {
        return x;
    }
    x.push(omega[0].exp());
    for m in 1..k {
        let mut acc = 0.0;
        for j in 0..m {
            acc += (m - j) as f64 * omega[m - j] * x[j];
        }
        x.push(acc / m as f64);
    }
    x
}

/// ‖exp(Ω)‖₁ as the sum of the first column. Equals the matrix 1-norm when
/// `ω_j ≥ 0` for `j ≥ 1`, which is the case for Laplace-derivative columns.
pub fn toeplitz_exp_l1(omega: &[f64]) -> f64 {
    toeplitz_exp_column(omega).iter().sum()
}
