//! Modified Bessel functions of the second kind, integer order.
//!
//! `K_0` and `K_1` come from the ascending series for `x <= 2` and from
//! Steed's continued fraction (CF2) above that; higher orders use the
//! upward recurrence `K_{ν+1} = K_{ν-1} + (2ν/x) K_ν`, which is stable for
//! this family.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 2.0;

/// `(e^x K_0(x), e^x K_1(x))` for `x > 0`.
fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k01_steed(x)
    }
}

fn k01_series(x: f64) -> (f64, f64) {
    let y = 0.25 * x * x;
    let lx = (0.5 * x).ln();
    // term = y^k / (k!)^2, harmonic = H_k
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 0.0;
    let mut s0 = 0.0;
    let mut i1 = 0.0;
    let mut s1 = 0.0;
    let mut k = 0usize;
    loop {
        if k > 0 {
            harmonic += 1.0 / k as f64;
        }
        i0 += term;
        s0 += term * harmonic;
        let u = term / (k + 1) as f64;
        i1 += u;
        // ψ(k+1) + ψ(k+2) = -2γ + 2H_k + 1/(k+1)
        s1 += u * (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (k + 1) as f64);
        k += 1;
        term *= y / (k * k) as f64;
        if term < 1e-18 * i0 {
            break;
        }
    }
    let k0 = -(lx + EULER_GAMMA) * i0 + s0;
    let k1 = 1.0 / x + lx * (0.5 * x * i1) - 0.25 * x * s1;
    (k0, k1)
}

fn k01_steed(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..100_000 {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-16 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

fn check_x(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("bessel K requires finite x > 0, got {x}")));
    }
    Ok(())
}

/// `e^x K_ν(x)` for integer order `ν >= 0` and `x > 0`.
pub fn bessel_k_scaled(order: u32, x: f64) -> Result<f64> {
    check_x(x)?;
    let (k0, k1) = k01_scaled(x);
    if order == 0 {
        return Ok(k0);
    }
    let (mut prev, mut cur) = (k0, k1);
    for nu in 1..order {
        let next = prev + 2.0 * nu as f64 / x * cur;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `ln K_ν(x)`, finite even where `K_ν(x)` overflows (small `x`, large `ν`)
/// or underflows (large `x`). The recurrence is run on successive ratios.
pub fn ln_bessel_k(order: u32, x: f64) -> Result<f64> {
    check_x(x)?;
    let (k0, k1) = k01_scaled(x);
    let mut ln_k = k0.ln() - x;
    if order == 0 {
        return Ok(ln_k);
    }
    let mut ratio = k1 / k0;
    ln_k += ratio.ln();
    for nu in 1..order {
        ratio = 1.0 / ratio + 2.0 * nu as f64 / x;
        ln_k += ratio.ln();
    }
    Ok(ln_k)
}
