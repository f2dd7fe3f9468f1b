//! Special functions not covered by `statrs`.

pub use statrs::function::beta::ln_beta;
pub use statrs::function::gamma::{digamma, ln_gamma};

/// Trigamma function psi'(x) for x > 0.
///
/// Shifts the argument above 12 with the recurrence
/// psi'(x) = psi'(x + 1) + 1/x^2, then applies the asymptotic series.
pub fn trigamma(x: f64) -> f64 {
    if !(x > 0.0) || !x.is_finite() {
        return f64::NAN;
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/(2x^2) + 1/(6x^3) - 1/(30x^5) + 1/(42x^7) - 1/(30x^9) + 5/(66x^11)
    let series = inv
        + 0.5 * inv2
        + inv
            * inv2
            * (1.0 / 6.0 + inv2 * (-1.0 / 30.0 + inv2 * (1.0 / 42.0 + inv2 * (-1.0 / 30.0 + inv2 * 5.0 / 66.0))));
    acc + series
}

/// Solve trigamma(x) = q for x > 0 by Newton iteration on 1/x.
pub fn inverse_trigamma(q: f64) -> f64 {
    if !(q > 0.0) {
        return f64::NAN;
    }
    // Starting point from psi'(x) ~ 1/x + 1/(2x^2).
    let mut x = if q >= 1e-2 { 0.5 + 1.0 / q } else { 1.0 / q };
    if q > 10.0 {
        x = 1.0 / q.sqrt();
    }
    for _ in 0..100 {
        let f = trigamma(x) - q;
        // d/dx trigamma = tetragamma; approximate via the series derivative.
        let d = tetragamma(x);
        let step = f / d;
        let mut next = x - step;
        if next <= 0.0 {
            next = x / 2.0;
        }
        if (next - x).abs() <= 1e-14 * x {
            return next;
        }
        x = next;
    }
    x
}

fn tetragamma(x: f64) -> f64 {
    let mut x = x;
    let mut acc = 0.0;
    while x < 12.0 {
        acc -= 2.0 / (x * x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // -1/x^2 - 1/x^3 - 1/(2x^4) + 1/(6x^6) - 1/(6x^8) + 3/(10x^10)
    let series =
        -inv2 - inv2 * inv - 0.5 * inv2 * inv2 + inv2 * inv2 * inv2 * (1.0 / 6.0 + inv2 * (-1.0 / 6.0 + inv2 * 0.3));
    acc + series
}

/// log(1 + exp(x)) without overflow.
pub fn log1p_exp(x: f64) -> f64 {
    if x > 35.0 {
        x
    } else if x < -35.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// log(sum(exp(xs))) with max subtraction; -inf for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trigamma_known_values() {
        // psi'(1) = pi^2/6, psi'(1/2) = pi^2/2
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        assert_relative_eq!(trigamma(1.0), pi2 / 6.0, max_relative = 1e-12);
        assert_relative_eq!(trigamma(0.5), pi2 / 2.0, max_relative = 1e-12);
        assert_relative_eq!(trigamma(100.0), 0.010050166663333571, max_relative = 1e-12);
    }

    #[test]
    fn trigamma_matches_digamma_finite_difference() {
        for &x in &[0.3, 1.7, 4.2, 12.0, 55.5] {
            let h = 1e-5 * x;
            let fd = (digamma(x + h) - digamma(x - h)) / (2.0 * h);
            assert_relative_eq!(trigamma(x), fd, max_relative = 1e-6);
        }
    }

    #[test]
    fn inverse_trigamma_round_trips() {
        for &x in &[0.05, 0.4, 1.0, 3.0, 25.0, 1e4] {
            let q = trigamma(x);
            assert_relative_eq!(inverse_trigamma(q), x, max_relative = 1e-10);
        }
    }

    #[test]
    fn log_sum_exp_is_stable() {
        assert_relative_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + 2f64.ln());
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_relative_eq!(log1p_exp(0.0), 2f64.ln());
    }
}
