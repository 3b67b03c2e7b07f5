//! Gamma function via the Lanczos approximation (g = 7, 9 coefficients).
//!
//! Relative accuracy is ~1e-13 on (0, 30), which covers every argument this
//! crate produces (orders stay in (0, 4], exponents in (-2, 4]). Negative
//! non-integer arguments go through the reflection formula.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;

// Coefficients as published with the g=7, n=9 Lanczos fit (GSL lineage).
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// True when `x` sits on a pole of the gamma function (0, -1, -2, ...).
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Gamma(x) for real x. Returns infinity at the poles.
pub fn gamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x).
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let w = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * w.powf(z + 0.5) * (-w).exp() * acc
    }
}

/// 1 / Gamma(x); exactly zero at the poles.
pub fn recip_gamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        0.0
    } else {
        1.0 / gamma(x)
    }
}
