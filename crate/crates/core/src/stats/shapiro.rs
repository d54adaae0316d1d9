//! Shapiro-Wilk W test, Royston's AS R94 approximation.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use super::dist::{normal_sf, ppnd};
use super::StatsError;

/// W statistic and its p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapiroWilk {
    #[serde(rename = "W")]
    pub w: f64,
    pub p: f64,
}

pub const MIN_N: usize = 3;
pub const MAX_N: usize = 5000;

// polynomial coefficients, lowest order first
const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
const G: [f64; 2] = [-2.273, 0.459];

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Tests `values` for normality.
///
/// Valid for `3 <= n <= 5000`. A constant sample has no defined W and is
/// rejected with [`StatsError::ZeroVariance`].
pub fn shapiro_wilk(values: &[f64]) -> Result<ShapiroWilk, StatsError> {
    let n = values.len();
    if n < MIN_N {
        return Err(StatsError::TooFewValues { needed: MIN_N, found: n });
    }
    if n > MAX_N {
        return Err(StatsError::TooManyValues { limit: MAX_N, found: n });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let mut x: Vec<f64> = values.to_vec();
    x.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 { x[n / 2] } else { 0.5 * (x[n / 2 - 1] + x[n / 2]) };
    for v in &mut x {
        *v -= median;
    }
    let range = x[n - 1] - x[0];
    if range <= 0.0 {
        return Err(StatsError::ZeroVariance);
    }

    let a = coefficients(n);
    let an = n as f64;

    // W as a squared correlation between data and coefficients, computed on
    // range-scaled values for stability
    let coef = |i: usize| -> f64 {
        let j = n - 1 - i;
        if i < j {
            -a[i]
        } else if i > j {
            a[j]
        } else {
            0.0
        }
    };
    let sa = (0..n).map(coef).sum::<f64>() / an;
    let sx = x.iter().map(|v| v / range).sum::<f64>() / an;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, v) in x.iter().enumerate() {
        let asa = coef(i) - sa;
        let xsx = v / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    let ssassx = libm::sqrt(ssa * ssx);
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    if n == 3 {
        let p = 6.0 / PI * (libm::asin(libm::sqrt(w)) - PI / 3.0);
        return Ok(ShapiroWilk { w, p: p.clamp(0.0, 1.0) });
    }

    let y = libm::log(w1);
    let p = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            1e-99
        } else {
            let y = -libm::log(gamma - y);
            normal_sf((y - poly(&C3, an)) / libm::exp(poly(&C4, an)))
        }
    } else {
        let ln_n = libm::log(an);
        normal_sf((y - poly(&C5, ln_n)) / libm::exp(poly(&C6, ln_n)))
    };
    Ok(ShapiroWilk { w, p })
}

/// The first `n / 2` coefficients in magnitude; the rest follow by
/// antisymmetry.
fn coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return alloc::vec![FRAC_1_SQRT_2];
    }
    let an = n as f64;
    let m: Vec<f64> = (0..half).map(|i| -ppnd((i as f64 + 1.0 - 0.375) / (an + 0.25))).collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = libm::sqrt(summ2);
    let rsn = 1.0 / libm::sqrt(an);
    let a1 = poly(&C1, rsn) + m[0] / ssumm2;

    let mut a = alloc::vec![0.0; half];
    a[0] = a1;
    let (first_free, fac) = if n > 5 {
        let a2 = m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = libm::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
        (2, fac)
    } else {
        let fac = libm::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
        (1, fac)
    };
    for i in first_free..half {
        a[i] = m[i] / fac;
    }
    a
}
