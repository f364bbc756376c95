//! Bessel functions of order zero, `J0` and `Y0`, for positive arguments.

use std::f64::consts::{FRAC_PI_4, PI};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// Above this argument the Hankel asymptotic expansion is used.
const ASYMPTOTIC_CUTOFF: f64 = 25.0;

/// `(J0(x), Y0(x))` for `x > 0`.
pub fn j0_y0(x: f64) -> (f64, f64) {
    assert!(x > 0.0, "j0_y0 needs a positive argument");
    if x > ASYMPTOTIC_CUTOFF {
        hankel_asymptotic(x)
    } else {
        miller(x)
    }
}

pub fn j0(x: f64) -> f64 {
    j0_y0(x).0
}

pub fn y0(x: f64) -> f64 {
    j0_y0(x).1
}

/// Backward recurrence normalized by `1 = J0 + 2 sum J_2k`, with `Y0` from
/// its Neumann series in the even-order `J`.
fn miller(x: f64) -> (f64, f64) {
    let mut start = x as usize + 40;
    start += start % 2;
    let (mut jp1, mut j) = (0.0f64, 1e-300f64);
    // Accumulators for the normalization sum and the Y0 series, both
    // expressed in the unnormalized recurrence values.
    let mut norm = 0.0;
    let mut yser = 0.0;
    for k in (1..=start).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        // j now holds J_{k-1}
        let order = k - 1;
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * j;
            let half = (order / 2) as f64;
            let sign = if (order / 2) % 2 == 0 { 1.0 } else { -1.0 };
            yser += sign * j / half;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            yser *= 1e-250;
        }
    }
    norm += j;
    let j0 = j / norm;
    let y0 = 2.0 / PI * ((x / 2.0).ln() + EULER_GAMMA) * j0 - 4.0 / PI * yser / norm;
    (j0, y0)
}

fn hankel_asymptotic(x: f64) -> (f64, f64) {
    // a_k = prod_{j<=k} (-(2j-1)^2) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= -(odd * odd) / (k as f64 * 8.0 * x);
        }
        if term.abs() >= prev {
            break;
        }
        prev = term.abs();
        // P collects even k with sign (-1)^(k/2), Q odd k with (-1)^((k-1)/2)
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - FRAC_PI_4;
    let (s, c) = chi.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}
