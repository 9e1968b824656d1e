//! Complex Gamma function via a shifted Stirling series and reflection.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::types::{check_finite, C64};

/// B_{2n} / (2n (2n - 1)) for n = 1..=10.
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
    43_867.0 / 244_188.0,
    -174_611.0 / 125_400.0,
];

/// Radius beyond which the Stirling series is used directly.
const SHIFT_RADIUS: f64 = 15.0;

fn is_pole(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// log Gamma(w) from the asymptotic series; valid for |w| >= SHIFT_RADIUS, Re w > 0.
fn stirling_ln(w: C64) -> C64 {
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut corr = C64::new(0.0, 0.0);
    let mut p = inv;
    for &coef in STIRLING.iter() {
        corr += p * coef;
        p *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + corr
}

/// log Gamma(z) for Re z >= 1/2 (branch continuous in the right half plane).
pub fn ln_gamma_right(z: C64) -> C64 {
    let shift = (SHIFT_RADIUS - z.re).ceil().max(0.0) as usize;
    let w = z + shift as f64;
    let mut lp = C64::new(0.0, 0.0);
    for j in 0..shift {
        lp += (z + j as f64).ln();
    }
    stirling_ln(w) - lp
}

fn gamma_right(z: C64) -> C64 {
    let shift = (SHIFT_RADIUS - z.re).ceil().max(0.0) as usize;
    let w = z + shift as f64;
    let mut prod = C64::new(1.0, 0.0);
    for j in 0..shift {
        prod *= z + j as f64;
    }
    stirling_ln(w).exp() / prod
}

/// Complex Gamma function. Relative accuracy near 1e-14 on the working range.
pub fn gamma_complex(z: C64) -> Result<C64> {
    check_finite(z, "gamma argument")?;
    if is_pole(z) {
        return Err(Error::Pole(z.re));
    }
    if z.re >= 0.5 {
        Ok(gamma_right(z))
    } else {
        let s = (z * PI).sin();
        Ok(C64::new(PI, 0.0) / (s * gamma_right(C64::new(1.0, 0.0) - z)))
    }
}

/// Reciprocal Gamma, entire; returns zero at the poles of Gamma.
pub fn rgamma(z: C64) -> C64 {
    if is_pole(z) {
        return C64::new(0.0, 0.0);
    }
    if z.re >= 0.5 {
        gamma_right(z).inv()
    } else {
        (z * PI).sin() * gamma_right(C64::new(1.0, 0.0) - z) / PI
    }
}
