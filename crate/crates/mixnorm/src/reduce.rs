//! Deterministic summation and power-sum primitives.
//!
//! Every sum in the crate goes through [`pairwise_sum`]: a fixed left-to-right
//! pairwise tree whose result depends only on the input order, never on chunk
//! sizes picked at run time or on thread count. Power sums are max-factored so
//! that exponents up to the engine cap neither overflow nor underflow: with
//! m = max |v_i| every term (|v_i|/m)^p lies in [0, 1].

/// Sequential accumulation below this length; pairwise splitting above.
const PAIRWISE_BASE: usize = 32;

/// Sums a slice with a fixed left-to-right pairwise tree.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BASE {
        let mut acc = 0.0;
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Sums f(i) for i in 0..n through a scratch buffer, pairwise.
pub fn pairwise_sum_by(n: usize, mut f: impl FnMut(usize) -> f64) -> f64 {
    let mut buf = Vec::with_capacity(n);
    for i in 0..n {
        buf.push(f(i));
    }
    pairwise_sum(&buf)
}

/// Weighted p-th power sum, max-factored: m * (sum_i w_i (|v_i|/m)^p)^(1/p).
///
/// Exact accumulation for p = 1; zero iff the values vanish wherever the
/// weights do not. `values` and `weights` must have equal length and p >= 1.
pub fn weighted_power_sum(values: &[f64], weights: &[f64], p: f64) -> f64 {
    debug_assert_eq!(values.len(), weights.len());
    debug_assert!(p >= 1.0);
    let m = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return pairwise_sum_by(values.len(), |i| weights[i] * values[i].abs());
    }
    let s = pairwise_sum_by(values.len(), |i| weights[i] * (values[i].abs() / m).powf(p));
    m * s.powf(1.0 / p)
}

/// Unweighted r-th power mean, max-factored: m * (n^-1 sum_i (|v_i|/m)^r)^(1/r).
///
/// This is the r-norm of the empirical (uniform) probability measure on the
/// sample; the max-factoring keeps it finite for r up to the engine cap.
pub fn power_mean(values: &[f64], r: f64) -> f64 {
    debug_assert!(!values.is_empty());
    debug_assert!(r >= 1.0);
    let m = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let n = values.len() as f64;
    if r == 1.0 {
        return pairwise_sum_by(values.len(), |i| values[i].abs()) / n;
    }
    let s = pairwise_sum_by(values.len(), |i| (values[i].abs() / m).powf(r)) / n;
    m * s.powf(1.0 / r)
}
