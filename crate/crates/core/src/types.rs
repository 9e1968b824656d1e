//! Shared value types: complex scalars, cut sides, 2x2 matrices and step parameters.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex scalar used for the spectral variable and the model variables.
pub type C64 = Complex64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);

/// Shorthand constructor.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Rejects NaN or infinite components.
pub fn check_finite(z: C64, what: &'static str) -> Result<C64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Which boundary value to take when a point sits on a branch cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutSide {
    /// Limit from the upper half plane (the `+` side).
    Above,
    /// Limit from the lower half plane (the `-` side).
    Below,
    /// Ordinary evaluation away from any cut.
    Off,
}

impl CutSide {
    pub fn label(self) -> &'static str {
        match self {
            CutSide::Above => "above",
            CutSide::Below => "below",
            CutSide::Off => "off",
        }
    }

    /// Imaginary part with the sign of the side, used to pick a principal branch.
    pub(crate) fn nudge(self, k: C64) -> C64 {
        match self {
            CutSide::Above if k.im == 0.0 => C64::new(k.re, 0.0),
            CutSide::Below if k.im == 0.0 => C64::new(k.re, -0.0),
            _ => k,
        }
    }
}

/// Dense 2x2 complex matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Matrix2C(pub [[C64; 2]; 2]);

impl Matrix2C {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Matrix2C([[a, b], [c, d]])
    }

    pub const fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Matrix2C([[one, zero], [zero, one]])
    }

    pub const fn zero() -> Self {
        let zero = C64::new(0.0, 0.0);
        Matrix2C([[zero, zero], [zero, zero]])
    }

    pub fn sigma1() -> Self {
        Self::new(0.0.into(), 1.0.into(), 1.0.into(), 0.0.into())
    }

    pub fn sigma3() -> Self {
        Self::new(1.0.into(), 0.0.into(), 0.0.into(), (-1.0).into())
    }

    /// diag(z, 1/z), i.e. z raised to sigma_3.
    pub fn diag_pow(z: C64) -> Self {
        // Polar inverse avoids overflow of |z|^2 for large moduli.
        let inv = C64::from_polar(z.norm().recip(), -z.arg());
        Self::new(z, 0.0.into(), 0.0.into(), inv)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, 0.0.into(), 0.0.into(), d)
    }

    pub fn from_cols(c0: [C64; 2], c1: [C64; 2]) -> Self {
        Self::new(c0[0], c1[0], c0[1], c1[1])
    }

    pub fn col(&self, j: usize) -> [C64; 2] {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        Self::new(
            self.0[1][1] / d,
            -self.0[0][1] / d,
            -self.0[1][0] / d,
            self.0[0][0] / d,
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = self.0;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn conj(&self) -> Self {
        let m = self.0;
        Self::new(
            m[0][0].conj(),
            m[0][1].conj(),
            m[1][0].conj(),
            m[1][1].conj(),
        )
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for Matrix2C {
    type Output = Matrix2C;
    fn mul(self, o: Matrix2C) -> Matrix2C {
        let a = self.0;
        let b = o.0;
        Matrix2C::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Matrix2C {
    type Output = Matrix2C;
    fn add(self, o: Matrix2C) -> Matrix2C {
        let a = self.0;
        let b = o.0;
        Matrix2C::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Matrix2C {
    type Output = Matrix2C;
    fn sub(self, o: Matrix2C) -> Matrix2C {
        self + (-o)
    }
}

impl Neg for Matrix2C {
    type Output = Matrix2C;
    fn neg(self) -> Matrix2C {
        self.scale(C64::new(-1.0, 0.0))
    }
}

/// Shape of the initial profile between the two asymptotic levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// Sharp step: c_l for x < 0, c_r for x > 0.
    PureStep,
    /// c_r + (c_l - c_r)/2 (1 - tanh(x/delta)).
    Tanh { delta: f64 },
    /// Pure step plus amplitude * cos^2(pi x / (2 radius)) on |x| < radius.
    Bump { amplitude: f64, radius: f64 },
}

/// Boundary levels and profile of the step-like initial datum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepParams {
    pub c_l: f64,
    pub c_r: f64,
    #[serde(default = "default_profile")]
    pub profile: Profile,
}

fn default_profile() -> Profile {
    Profile::PureStep
}

impl StepParams {
    /// Pure step with the given levels, validated.
    pub fn pure(c_l: f64, c_r: f64) -> Result<Self> {
        Self::new(c_l, c_r, Profile::PureStep)
    }

    pub fn new(c_l: f64, c_r: f64, profile: Profile) -> Result<Self> {
        let p = StepParams { c_l, c_r, profile };
        p.validate()?;
        Ok(p)
    }

    /// Checks c_l >= c_r > 0 and profile parameters. Equal levels are allowed
    /// as the degenerate flat case.
    pub fn validate(&self) -> Result<()> {
        if !(self.c_l.is_finite() && self.c_r.is_finite()) {
            return Err(Error::InvalidParams("levels must be finite".into()));
        }
        if !(self.c_r > 0.0) {
            return Err(Error::InvalidParams(format!(
                "step levels must satisfy c_l > c_r > 0, got c_r = {}",
                self.c_r
            )));
        }
        if self.c_l < self.c_r {
            return Err(Error::InvalidParams(format!(
                "step levels must satisfy c_l > c_r > 0, got c_l = {} < c_r = {}",
                self.c_l, self.c_r
            )));
        }
        match self.profile {
            Profile::PureStep => {}
            Profile::Tanh { delta } => {
                if !(delta > 0.0 && delta.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "tanh width must be positive, got {delta}"
                    )));
                }
            }
            Profile::Bump { amplitude, radius } => {
                if !(radius > 0.0 && radius.is_finite() && amplitude.is_finite()) {
                    return Err(Error::InvalidParams(format!(
                        "bump needs finite amplitude and positive radius, got ({amplitude}, {radius})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Initial datum q_0(x).
    pub fn q0(&self, x: f64) -> f64 {
        self.c_l + self.dev_left(x)
    }

    /// q_0(x) - c_l, computed without cancellation in the left tail.
    pub fn dev_left(&self, x: f64) -> f64 {
        let dc = self.c_l - self.c_r;
        match self.profile {
            Profile::PureStep => {
                if x < 0.0 {
                    0.0
                } else {
                    -dc
                }
            }
            Profile::Tanh { delta } => -dc / (1.0 + (-2.0 * x / delta).exp()),
            Profile::Bump { amplitude, radius } => {
                let step = if x < 0.0 { 0.0 } else { -dc };
                step + bump(x, amplitude, radius)
            }
        }
    }

    /// q_0(x) - c_r, computed without cancellation in the right tail.
    pub fn dev_right(&self, x: f64) -> f64 {
        let dc = self.c_l - self.c_r;
        match self.profile {
            Profile::PureStep => {
                if x < 0.0 {
                    dc
                } else {
                    0.0
                }
            }
            Profile::Tanh { delta } => dc / (1.0 + (2.0 * x / delta).exp()),
            Profile::Bump { amplitude, radius } => {
                let step = if x < 0.0 { dc } else { 0.0 };
                step + bump(x, amplitude, radius)
            }
        }
    }

    /// Points where the profile is not smooth; integrators stop there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.profile {
            Profile::PureStep => vec![0.0],
            Profile::Tanh { .. } => vec![],
            Profile::Bump { radius, .. } => vec![-radius, 0.0, radius],
        }
    }

    /// Support radius of q_0 - q_step, if compact.
    pub fn support_radius(&self) -> Option<f64> {
        match self.profile {
            Profile::PureStep => Some(0.0),
            Profile::Tanh { .. } => None,
            Profile::Bump { radius, .. } => Some(radius),
        }
    }

    /// Exponential decay rate of the tails for non-compact profiles.
    pub fn decay_rate(&self) -> Option<f64> {
        match self.profile {
            Profile::Tanh { delta } => Some(2.0 / delta),
            _ => None,
        }
    }
}

fn bump(x: f64, amplitude: f64, radius: f64) -> f64 {
    if x.abs() >= radius {
        0.0
    } else {
        let c = (std::f64::consts::FRAC_PI_2 * x / radius).cos();
        amplitude * c * c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_inverse_roundtrip() {
        let m = Matrix2C::new(c64(1.0, 2.0), c64(0.5, -1.0), c64(-0.3, 0.1), c64(2.0, 0.0));
        let p = m * m.inverse();
        assert!((p - Matrix2C::identity()).max_abs() < 1e-14);
    }

    #[test]
    fn diag_pow_survives_large_moduli() {
        let z = C64::from_polar(1e200, 0.7);
        let d = Matrix2C::diag_pow(z);
        assert!(((d.get(0, 0) * d.get(1, 1)) - 1.0).norm() < 1e-14);
    }

    #[test]
    fn tanh_deviations_agree() {
        let p = StepParams::new(2.0, 1.0, Profile::Tanh { delta: 1.0 }).unwrap();
        for &x in &[-30.0, -1.0, 0.0, 0.7, 25.0] {
            let a = p.c_l + p.dev_left(x);
            let b = p.c_r + p.dev_right(x);
            assert!((a - b).abs() < 1e-14);
        }
        assert!((p.q0(0.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn validation_names_the_assumption() {
        let err = StepParams::pure(1.0, 2.0).unwrap_err();
        assert!(err.to_string().contains("c_l > c_r > 0"));
        assert!(StepParams::pure(1.0, 0.0).is_err());
    }
}
