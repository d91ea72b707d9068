//! `sinc` and the cosine/sine integrals.
//!
//! Ci and Si use their power series below `x = 2` and the continued fraction
//! of `E1(ix)` above it, where `E1(ix) = -Ci(x) + i (Si(x) - pi/2)`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;
const EPS: f64 = 1e-16;

/// `sin(u)/u` with `sinc(0) = 1`.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// Returns `(Ci(x), Si(x))` for `x > 0`.
///
/// `Ci(0)` diverges, so `x = 0` yields `(-inf, 0)`.
pub fn cisi(x: f64) -> (f64, f64) {
    debug_assert!(x >= 0.0, "cisi is only defined here for x >= 0");
    if x == 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if x <= SERIES_LIMIT {
        cisi_series(x)
    } else {
        cisi_continued_fraction(x)
    }
}

pub fn ci(x: f64) -> f64 {
    cisi(x).0
}

/// Odd extension: `Si(-x) = -Si(x)`.
pub fn si(x: f64) -> f64 {
    if x < 0.0 {
        -cisi(-x).1
    } else {
        cisi(x).1
    }
}

fn cisi_series(x: f64) -> (f64, f64) {
    let x2 = x * x;
    // Si: sum_{n>=0} (-1)^n x^(2n+1) / ((2n+1) (2n+1)!)
    let mut term = x; // x^(2n+1)/(2n+1)! with sign
    let mut si = x;
    // Ci: gamma + ln x + sum_{n>=1} (-1)^n x^(2n) / (2n (2n)!)
    let mut cterm = 1.0; // x^(2n)/(2n)! with sign
    let mut ci_sum = 0.0;
    for n in 1..60 {
        let nf = n as f64;
        cterm *= -x2 / ((2.0 * nf - 1.0) * (2.0 * nf));
        ci_sum += cterm / (2.0 * nf);
        term *= -x2 / ((2.0 * nf) * (2.0 * nf + 1.0));
        si += term / (2.0 * nf + 1.0);
        if term.abs() < EPS * si.abs() && cterm.abs() < EPS * ci_sum.abs().max(1e-300) {
            break;
        }
    }
    (EULER_GAMMA + x.ln() + ci_sum, si)
}

fn cisi_continued_fraction(x: f64) -> (f64, f64) {
    // Modified Lentz evaluation of E1(ix) e^{ix}.
    let tiny = 1e-300;
    let mut b = Complex64::new(1.0, x);
    let mut c = Complex64::new(1.0 / tiny, 0.0);
    let mut d = Complex64::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..1000 {
        let fi = i as f64;
        let a = -fi * fi;
        b += 2.0;
        d = Complex64::new(1.0, 0.0) / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del.re - 1.0).abs() + del.im.abs() < EPS {
            break;
        }
    }
    let h = Complex64::new(x.cos(), -x.sin()) * h;
    (-h.re, FRAC_PI_2 + h.im)
}
