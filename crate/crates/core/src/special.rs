//! Riemann ζ at integer arguments and factorials.

use crate::error::{invalid, Result};
use std::f64::consts::PI;

// B_2, B_4, ..., B_20
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// n! as a float; exact for n ≤ 22.
pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// ζ(n) for integer n ≥ 2.
///
/// Even arguments use the Bernoulli closed form
/// ζ(2m) = (−1)^{m+1} B_{2m} (2π)^{2m} / (2 (2m)!); odd arguments use an
/// Euler–Maclaurin tail after ten explicit terms, accurate to round-off.
pub fn zeta(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(invalid(format!("zeta({n}) diverges; need n >= 2")));
    }
    if n.is_multiple_of(2) && (n as usize / 2) <= BERNOULLI_EVEN.len() {
        let m = n / 2;
        let b = BERNOULLI_EVEN[m as usize - 1];
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        return Ok(sign * b * (2.0 * PI).powi(n as i32) / (2.0 * factorial(n)));
    }
    Ok(zeta_series(n as f64))
}

fn zeta_series(s: f64) -> f64 {
    const N: u32 = 10;
    let nf = N as f64;
    // smallest terms first
    let mut sum = 0.0;
    for k in (1..N).rev() {
        sum += (k as f64).powf(-s);
    }
    let mut tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) accumulated alongside (2j)!
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in BERNOULLI_EVEN.iter().enumerate().take(8) {
        let j = j as f64 + 1.0;
        tail += b / fact * rising * nf.powf(-s - 2.0 * j + 1.0);
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    }
    sum + tail
}
