//! Gamma-family special functions.

use crate::num::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, n = 9), with the
/// reflection formula below 1/2.
pub fn gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    (T::lit(2.0) * T::PI()).sqrt() * t.powf(x + half) * (-t).exp() * acc
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G) + half;
    half * (T::lit(2.0) * T::PI()).ln() + (x + half) * t.ln() - t + acc.ln()
}

/// `E|Z|^q` for a standard Gaussian `Z`: `2^{q/2} Γ((q+1)/2) / √π`.
pub fn gaussian_abs_moment<T: Real>(q: T) -> T {
    let two = T::lit(2.0);
    (q / two * two.ln() + ln_gamma((q + T::one()) / two)).exp() / T::PI().sqrt()
}

/// `∫_0^x e^{u} u^{a-1} du` for `a > 0`, `x ≥ 0`, by its power series.
pub fn exp_weighted_lower<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    // Σ_k x^{a+k} / (k! (a+k))
    let mut term = x.powf(a); // x^{a+k}/k!
    let mut sum = term / a;
    let eps = T::epsilon();
    for k in 1..10_000 {
        let kf = T::from_usize_lossy(k);
        term = term * x / kf;
        let add = term / (a + kf);
        sum = sum + add;
        if add.abs() <= eps * sum.abs() {
            break;
        }
    }
    sum
}

/// Upper incomplete gamma `Γ(a, x) = ∫_x^∞ e^{-u} u^{a-1} du` for `a > 0`.
pub fn upper_incomplete_gamma<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return gamma(a);
    }
    let eps = T::epsilon();
    if x < a + T::one() {
        // Γ(a) − γ(a, x) with γ(a,x) = x^a e^{-x} Σ x^k / (a (a+1) … (a+k))
        let mut del = T::one() / a;
        let mut sum = del;
        let mut ap = a;
        for _ in 0..10_000 {
            ap = ap + T::one();
            del = del * x / ap;
            sum = sum + del;
            if del.abs() < sum.abs() * eps {
                break;
            }
        }
        let lower = sum * (a * x.ln() - x).exp();
        gamma(a) - lower
    } else {
        // Modified Lentz continued fraction.
        let tiny = T::min_positive_value() / eps;
        let mut b = x + T::one() - a;
        let mut c = T::one() / tiny;
        let mut d = T::one() / b;
        let mut h = d;
        for i in 1..10_000 {
            let fi = T::from_usize_lossy(i);
            let an = -fi * (fi - a);
            b = b + T::lit(2.0);
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = T::one() / d;
            let del = d * c;
            h = h * del;
            if (del - T::one()).abs() < eps {
                break;
            }
        }
        (a * x.ln() - x).exp() * h
    }
}
