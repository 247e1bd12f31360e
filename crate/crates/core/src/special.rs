//! Hermite and generalized Laguerre polynomials, factorials in log space.
//!
//! All polynomial families are evaluated by upward three-term recurrences;
//! explicit coefficient expansions lose every digit to cancellation well
//! before the degrees used here.

use std::sync::OnceLock;

const LN_FACTORIAL_TABLE: usize = 1024;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE + 1);
        let mut acc = 0.0_f64;
        t.push(0.0);
        for k in 1..=LN_FACTORIAL_TABLE {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln n!` by direct summation of logarithms.
pub fn ln_factorial(n: usize) -> f64 {
    if n <= LN_FACTORIAL_TABLE {
        ln_factorial_table()[n]
    } else {
        ln_factorial_table()[LN_FACTORIAL_TABLE]
            + ((LN_FACTORIAL_TABLE + 1)..=n)
                .map(|k| (k as f64).ln())
                .sum::<f64>()
    }
}

/// `½ (ln m! − ln n!)`, i.e. the logarithm of `sqrt(m!/n!)`.
///
/// Only the logs between the two arguments are summed, so nearby arguments
/// do not suffer from cancellation between two large totals.
pub fn log_factorial_ratio(m: usize, n: usize) -> f64 {
    let (lo, hi, sign) = if m <= n { (m, n, -1.0) } else { (n, m, 1.0) };
    let s: f64 = ((lo + 1)..=hi).map(|k| (k as f64).ln()).sum();
    0.5 * sign * s
}

/// Binomial coefficient `C(n, k)`; exact whenever the result fits in `u128`
/// and is representable in an `f64` mantissa.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        match acc.checked_mul((n - i) as u128) {
            Some(v) => acc = v / (i as u128 + 1),
            None => {
                return (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp();
            }
        }
    }
    acc as f64
}

/// Physicists' Hermite polynomial `H_n(x)`.
pub fn hermite(n: usize, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * x;
    for k in 1..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Generalized Laguerre polynomial `L_m^{(k)}(x)` for `x ≥ 0`.
///
/// At `x = 0` the exact value `C(m + k, m)` is returned.
pub fn laguerre(m: usize, k: usize, x: f64) -> f64 {
    if x == 0.0 {
        return binomial(m + k, m);
    }
    let a = k as f64;
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for j in 1..m {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + a - x) * cur - (jf + a) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Normalized Hermite functions `φ_0(ξ) … φ_n(ξ)` with
/// `∫ φ_j(ξ) φ_k(ξ) dξ = δ_jk`.
///
/// Uses the normalized recurrence
/// `φ_{k+1} = sqrt(2/(k+1)) ξ φ_k − sqrt(k/(k+1)) φ_{k−1}`, which carries the
/// factorial normalization implicitly and never forms `H_n` itself.
pub fn hermite_functions(n: usize, xi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let phi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    out.push(phi0);
    if n == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * xi * phi0);
    for k in 1..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}
