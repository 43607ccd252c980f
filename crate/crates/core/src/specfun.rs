//! Hankel function of the first kind, order zero, for real positive argument.
//!
//! Ascending series below [`SWITCH`], Hankel's asymptotic expansion above.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Crossover between the power series and the asymptotic expansion.
pub const SWITCH: f64 = 12.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `H0(1)(x) = J0(x) + i Y0(x)` for `x > 0`.
pub fn hankel1_0(x: f64) -> Result<Complex64> {
    let (j, y) = bessel_jy(0, x)?;
    Ok(Complex64::new(j, y))
}

/// `(J_n(x), Y_n(x))` for `n` in `{0, 1}`.
fn bessel_jy(order: u32, x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::OutOfDomain {
            what: "Bessel argument",
            value: x,
            lo: f64::MIN_POSITIVE,
            hi: f64::MAX,
        });
    }
    Ok(if x <= SWITCH {
        series(order, x)
    } else {
        asymptotic(order, x)
    })
}

fn series(order: u32, x: f64) -> (f64, f64) {
    let half = 0.5 * x;
    let q = -half * half;
    let log_term = (half.ln() + EULER_GAMMA) * 2.0 / PI;
    // t_k = (-1)^k (x/2)^(2k+n) / (k! (k+n)!)
    let mut t = if order == 0 { 1.0 } else { half };
    let mut j = 0.0;
    let mut s = 0.0;
    let mut h_k = 0.0;
    let mut k = 0u32;
    loop {
        let h_kn = h_k + if order == 1 { 1.0 / f64::from(k + 1) } else { 0.0 };
        j += t;
        s += (h_k + h_kn) * t;
        k += 1;
        t *= q / (f64::from(k) * f64::from(k + order));
        h_k += 1.0 / f64::from(k);
        if t.abs() < 1e-17 * j.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    let y = match order {
        0 => log_term * j - s / PI,
        _ => log_term * j - 2.0 / (PI * x) - s / PI,
    };
    (j, y)
}

fn asymptotic(order: u32, x: f64) -> (f64, f64) {
    let mu = 4.0 * f64::from(order * order);
    // a_k = prod_{i=1..k} (mu - (2i-1)^2) / (k! (8x)^k)
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let odd = f64::from(2 * k - 1);
        let next = term * (mu - odd * odd) / (f64::from(k) * 8.0 * x);
        if next.abs() >= last || next.abs() < 1e-18 {
            break;
        }
        last = next.abs();
        term = next;
        // P collects even k with alternating sign, Q odd k.
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
    }
    // chi = x - (2n + 1) pi / 4, evaluated without forming x - pi/4.
    let (s, c) = x.sin_cos();
    let (sp, cp) = match order {
        0 => (FRAC_1_SQRT_2, FRAC_1_SQRT_2),
        _ => (FRAC_1_SQRT_2, -FRAC_1_SQRT_2),
    };
    let cos_chi = c * cp + s * sp;
    let sin_chi = s * cp - c * sp;
    let amp = (2.0 / (PI * x)).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}
