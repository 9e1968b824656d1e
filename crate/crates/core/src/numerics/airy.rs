//! Airy function Ai and its derivative on the whole complex plane.
//!
//! Maclaurin series inside `SWITCH_RADIUS`; outside, the large-argument
//! expansion for |arg z| <= 2pi/3 and the connection formula
//! Ai(z) = -w Ai(wz) - w^2 Ai(w^2 z) elsewhere. Within 3pi/8 of the positive axis,
//! where Ai decays and the series cancels, Taylor stepping of Ai'' = z Ai
//! runs inward from `MARCH_START` instead.

use std::f64::consts::PI;

use crate::types::C64;

const AI0: f64 = 0.355_028_053_887_817_24;
const AIP0: f64 = -0.258_819_403_792_806_8;

/// Radius separating the series from the asymptotic expansion.
pub const SWITCH_RADIUS: f64 = 7.0;
/// Below this radius the Maclaurin series is used in every direction.
const MARCH_RADIUS: f64 = 2.0;
/// Radius of the asymptotic starting values for inward stepping.
const MARCH_START: f64 = 9.0;
const MARCH_STEP: f64 = 0.25;
/// Largest |arg z| for inward stepping; beyond it Ai grows inward-unstably
/// and the series is accurate again.
const MARCH_ANGLE: f64 = 3.0 * PI / 8.0;

fn omega() -> C64 {
    C64::from_polar(1.0, 2.0 * PI / 3.0)
}

fn maclaurin(z: C64) -> (C64, C64) {
    let z3 = z * z * z;
    let mut f = C64::new(1.0, 0.0);
    let mut g = z;
    let mut fp = C64::new(0.0, 0.0);
    let mut gp = C64::new(1.0, 0.0);
    let mut tf = C64::new(1.0, 0.0);
    let mut tg = z;
    let mut tfp = z * z * 0.5;
    let mut tgp = C64::new(1.0, 0.0);
    fp += tfp;
    for k in 1..200 {
        let kf = k as f64;
        tf *= z3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg *= z3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        tgp *= z3 / ((3.0 * kf) * (3.0 * kf - 2.0));
        if k >= 2 {
            tfp *= z3 / ((3.0 * kf - 1.0) * (3.0 * kf - 3.0));
            fp += tfp;
        }
        f += tf;
        g += tg;
        gp += tgp;
        let small = tf.norm() + tg.norm() + tfp.norm() + tgp.norm();
        if small < 1e-18 * (f.norm() + g.norm() + fp.norm() + gp.norm()) {
            break;
        }
    }
    (f * AI0 + g * AIP0, fp * AI0 + gp * AIP0)
}

/// Large-argument expansion, |arg z| <= 2pi/3, |z| large.
fn asymptotic(z: C64) -> (C64, C64) {
    let zeta = z.powf(1.5) * (2.0 / 3.0);
    let inv = zeta.inv();
    let mut su = C64::new(1.0, 0.0);
    let mut sv = C64::new(1.0, 0.0);
    let mut u = 1.0_f64;
    let mut p = C64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        p *= -inv;
        let tu = p * u;
        let mag = tu.norm();
        if mag > last {
            break;
        }
        last = mag;
        su += tu;
        sv += p * v;
        if mag < 1e-17 {
            break;
        }
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = z.powf(0.25);
    (e / q * su, -e * q * sv)
}

/// One Taylor step of y'' = z y from z0 by h.
fn taylor_step(z0: C64, y: C64, yp: C64, h: C64) -> (C64, C64) {
    let mut t = [y, yp * h, z0 * y * h * h * 0.5];
    let mut val = t[0] + t[1] + t[2];
    let mut der = t[1] + t[2] * 2.0;
    for n in 1..80 {
        let nf = n as f64;
        let next = (z0 * h * h * t[1] + h * h * h * t[0]) / ((nf + 1.0) * (nf + 2.0));
        t = [t[1], t[2], next];
        val += next;
        der += next * (nf + 2.0);
        if next.norm() < 1e-18 * val.norm() && t[1].norm() < 1e-18 * val.norm() {
            break;
        }
    }
    (val, der / h)
}

/// Ai at moderate |z| by stepping inward along the ray from `MARCH_START`.
fn march_inward(z: C64) -> (C64, C64) {
    let r = z.norm();
    let dir = z / r;
    let mut pos = MARCH_START;
    let (mut y, mut yp) = asymptotic(dir * pos);
    let n = ((MARCH_START - r) / MARCH_STEP).ceil() as usize;
    let h = (r - MARCH_START) / n as f64;
    for _ in 0..n {
        (y, yp) = taylor_step(dir * pos, y, yp, dir * h);
        pos += h;
    }
    (y, yp)
}

fn direct(z: C64) -> (C64, C64) {
    let r = z.norm();
    if r > MARCH_RADIUS && r <= SWITCH_RADIUS && z.arg().abs() <= MARCH_ANGLE {
        march_inward(z)
    } else if r <= SWITCH_RADIUS {
        maclaurin(z)
    } else {
        asymptotic(z)
    }
}

/// Returns (Ai(z), Ai'(z)).
pub fn airy_pair(z: C64) -> (C64, C64) {
    if z.norm() <= SWITCH_RADIUS || z.arg().abs() <= 2.0 * PI / 3.0 {
        return direct(z);
    }
    let w = omega();
    let w2 = w * w;
    let (a1, d1) = direct(w * z);
    let (a2, d2) = direct(w2 * z);
    (-w * a1 - w2 * a2, -w2 * d1 - w * d2)
}

/// Airy function of the first kind.
pub fn airy_ai(z: C64) -> C64 {
    airy_pair(z).0
}

/// Derivative of the Airy function of the first kind.
pub fn airy_ai_prime(z: C64) -> C64 {
    airy_pair(z).1
}
