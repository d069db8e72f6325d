//! Globally adaptive Gauss-Kronrod (7/15) integration.
//!
//! Used only for reference values that check the Gauss-Laguerre forms, so it
//! favours robustness over speed.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// `∫_a^b f`, refined until the summed error estimate drops below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("integration bounds must be finite"));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut segments = vec![kronrod(&f, a, b)];
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if !total.is_finite() {
            return Err(Error::numeric("integrand produced a non-finite value"));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if segments.len() >= MAX_INTERVALS {
            return Err(Error::numeric(format!(
                "adaptive integration did not converge: error {err:e} after {MAX_INTERVALS} intervals"
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("segments are never empty");
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::numeric("adaptive integration exhausted floating-point resolution"));
        }
        segments.push(kronrod(&f, seg.a, mid));
        segments.push(kronrod(&f, mid, seg.b));
    }
}

/// `∫_a^∞ f` through `t = a + scale·u/(1-u)`. `scale` should be of the
/// order of the integrand's decay length.
pub fn integrate_semi_infinite<F>(f: F, a: f64, scale: f64, abs_tol: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(scale > 0.0) {
        return Err(Error::invalid("semi-infinite integration needs a positive scale"));
    }
    let mapped = |u: f64| {
        let one_minus = 1.0 - u;
        let t = a + scale * u / one_minus;
        if !t.is_finite() {
            return 0.0;
        }
        f(t) * scale / (one_minus * one_minus)
    };
    integrate_adaptive(mapped, 0.0, 1.0, abs_tol, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_and_trig() {
        let v = integrate_adaptive(|x| x * x, 0.0, 3.0, 1e-13, 0.0).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
        let v = integrate_adaptive(f64::sin, 0.0, PI, 1e-13, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        let v = integrate_adaptive(|x| x.ln(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert!((v + 1.0).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite_gamma() {
        // ∫ t^4 e^{-t} = 24
        let v = integrate_semi_infinite(|t| t.powi(4) * (-t).exp(), 0.0, 5.0, 1e-11, 0.0).unwrap();
        assert!((v - 24.0).abs() < 1e-9);
    }
}
