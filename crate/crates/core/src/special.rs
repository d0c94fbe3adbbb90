//! Complex digamma and trigamma, used to sum integer-lattice tails of the
//! Clark series in closed form.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

// B_{2k} for k = 1..=8
const BERNOULLI: [f64; 8] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
];

const ASYMPTOTIC_FROM: f64 = 20.0;

/// ψ(w) for complex w away from the poles at non-positive integers.
pub fn digamma(w: C64) -> C64 {
    if w.re < 0.5 {
        // ψ(w) = ψ(1 − w) − π cot(πw)
        let pw = w * PI;
        return digamma(C64::new(1.0, 0.0) - w) - pw.cos() / pw.sin() * PI;
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut x = w;
    while x.norm() < ASYMPTOTIC_FROM {
        acc -= x.inv();
        x += 1.0;
    }
    let inv = x.inv();
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut power = inv2;
    for (k, b) in BERNOULLI.iter().enumerate() {
        let two_k = 2.0 * (k as f64 + 1.0);
        series += power * (b / two_k);
        power *= inv2;
    }
    acc + x.ln() - inv * 0.5 - series
}

/// ψ′(w) for complex w away from the poles at non-positive integers.
pub fn trigamma(w: C64) -> C64 {
    if w.re < 0.5 {
        // ψ′(1 − w) + ψ′(w) = π² / sin²(πw)
        let s = (w * PI).sin();
        return C64::new(PI * PI, 0.0) / (s * s) - trigamma(C64::new(1.0, 0.0) - w);
    }
    let mut acc = C64::new(0.0, 0.0);
    let mut x = w;
    while x.norm() < ASYMPTOTIC_FROM {
        acc += (x * x).inv();
        x += 1.0;
    }
    let inv = x.inv();
    let inv2 = inv * inv;
    let mut series = C64::new(0.0, 0.0);
    let mut power = inv2 * inv;
    for b in BERNOULLI.iter() {
        series += power * *b;
        power *= inv2;
    }
    acc + inv + inv2 * 0.5 + series
}
