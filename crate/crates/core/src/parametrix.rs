//! Local model RH solutions: the parabolic-cylinder model M^(PC) and the
//! Airy model Psi^(Ai) with its expansion matrices K_j.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::airy_pair;
use crate::numerics::gamma::gamma_complex;
use crate::numerics::pcf::{parabolic_cylinder_scaled, ExpScaled};
use crate::types::{c64, check_finite, Matrix2C, C64, I};

/// Angular distance from a jump ray below which a point counts as on it.
pub const RAY_TOL: f64 = 1e-12;
/// Rotation used for two-sided ray limits.
pub const RAY_OFFSET: f64 = 1e-8;
/// Largest |zeta| accepted by `pc_matrix`.
pub const PC_MAX_RADIUS: f64 = 100.0;
/// Largest |zeta| accepted by `airy_matrix`; beyond it e^{(2/3) zeta^{3/2}} overflows.
pub const AIRY_MAX_RADIUS: f64 = 100.0;
/// Largest index accepted by `airy_k`.
pub const AIRY_K_MAX: usize = 6;

/// Rays of the parabolic-cylinder contour.
pub const PC_RAYS: [f64; 4] = [PI / 4.0, 3.0 * PI / 4.0, -3.0 * PI / 4.0, -PI / 4.0];
/// Rays of the Airy contour.
pub const AIRY_RAYS: [f64; 4] = [0.0, 2.0 * PI / 3.0, PI, -2.0 * PI / 3.0];

/// Parabolic-cylinder model with reflection value kappa, |kappa| < 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PCModel {
    pub kappa: C64,
    pub nu: f64,
}

impl PCModel {
    pub fn new(kappa: C64) -> Result<Self> {
        check_finite(kappa, "kappa")?;
        let m = kappa.norm_sqr();
        if m >= 1.0 {
            return Err(Error::InvalidParams(format!(
                "|kappa| = {} must be below 1",
                kappa.norm()
            )));
        }
        Ok(PCModel {
            kappa,
            nu: -(-m).ln_1p() / (2.0 * PI),
        })
    }

    fn kappa_hat(&self) -> C64 {
        self.kappa / (1.0 - self.kappa.norm_sqr())
    }
}

/// Parameter-free Airy model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AiryModel;

impl AiryModel {
    /// Psi_0 = e^{i pi/12}/(2 sqrt pi) [[1,1],[-1,1]] e^{-i pi sigma_3/4}.
    pub fn psi0() -> Matrix2C {
        let c = C64::from_polar(1.0, PI / 12.0) / (2.0 * PI.sqrt());
        let m = Matrix2C::new(c, c, -c, c);
        m * Matrix2C::diag_pow(C64::from_polar(1.0, -PI / 4.0))
    }

    /// s_j = Gamma(3j + 1/2) / (54^j j! Gamma(j + 1/2)).
    pub fn s(j: usize) -> f64 {
        // Ratio of Gamma(3j+1/2)/Gamma(j+1/2) as a product of (m + 1/2), m = j..3j-1.
        let mut v = 1.0;
        for m in j..3 * j {
            v *= m as f64 + 0.5;
        }
        for m in 1..=j {
            v /= 54.0 * m as f64;
        }
        v
    }

    /// nu_j = (6j + 1)/(1 - 6j) s_j.
    pub fn nu(j: usize) -> f64 {
        let j6 = 6.0 * j as f64;
        (j6 + 1.0) / (1.0 - j6) * Self::s(j)
    }
}

/// Coefficients (beta_12, beta_21) of the parabolic-cylinder model.
pub fn pc_beta(model: &PCModel) -> Result<(C64, C64)> {
    if model.kappa == c64(0.0, 0.0) {
        return Err(Error::Degenerate("kappa = 0 gives the trivial model"));
    }
    beta_from(model.kappa, model.nu)
}

fn beta_from(kappa: C64, nu: f64) -> Result<(C64, C64)> {
    let g = gamma_complex(c64(0.0, -nu))?;
    let b12 =
        (2.0 * PI).sqrt() * C64::from_polar(1.0, PI / 4.0) * (-PI * nu / 2.0).exp() / (kappa * g);
    Ok((b12, nu / b12))
}

fn on_ray(zeta: C64, rays: &[f64]) -> bool {
    let a = zeta.arg();
    rays.iter().any(|&r| {
        let d = (a - r).rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d) < RAY_TOL
    })
}

/// Sector constant P with M^(PC) = psi P zeta^{-i nu sigma_3} e^{i zeta^2 sigma_3/4}.
fn pc_sector(model: &PCModel, arg: f64) -> Matrix2C {
    let one = c64(1.0, 0.0);
    let zero = c64(0.0, 0.0);
    let k = model.kappa;
    let kh = model.kappa_hat();
    if arg > 0.0 && arg < PI / 4.0 {
        Matrix2C::new(one, zero, -k, one)
    } else if arg < 0.0 && arg > -PI / 4.0 {
        Matrix2C::new(one, -k.conj(), zero, one)
    } else if arg < -3.0 * PI / 4.0 {
        Matrix2C::new(one, zero, kh, one)
    } else if arg > 3.0 * PI / 4.0 {
        Matrix2C::new(one, kh.conj(), zero, one)
    } else {
        Matrix2C::identity()
    }
}

/// Entries of psi in exponent-scaled form.
fn pc_psi(model: &PCModel, b12: C64, b21: C64, zeta: C64) -> Result<[[ExpScaled; 2]; 2]> {
    let nu = model.nu;
    let inu = c64(0.0, nu);
    let d = |a: C64, rot: f64| parabolic_cylinder_scaled(a, C64::from_polar(1.0, rot) * zeta);
    let c12 = -inu / b21;
    let c21 = inu / b12;
    let e = |re: f64, im: f64| c64(re, im).exp();
    if zeta.im >= 0.0 {
        Ok([
            [
                d(inu, -3.0 * PI / 4.0)?.scale(e(-3.0 * PI * nu / 4.0, 0.0)),
                d(-inu - 1.0, -PI / 4.0)?.scale(c12 * e(PI * nu / 4.0, -PI / 4.0)),
            ],
            [
                d(inu - 1.0, -3.0 * PI / 4.0)?
                    .scale(c21 * e(-3.0 * PI * nu / 4.0, -3.0 * PI / 4.0)),
                d(-inu, -PI / 4.0)?.scale(e(PI * nu / 4.0, 0.0)),
            ],
        ])
    } else {
        Ok([
            [
                d(inu, PI / 4.0)?.scale(e(PI * nu / 4.0, 0.0)),
                d(-inu - 1.0, 3.0 * PI / 4.0)?.scale(c12 * e(-3.0 * PI * nu / 4.0, 3.0 * PI / 4.0)),
            ],
            [
                d(inu - 1.0, PI / 4.0)?.scale(c21 * e(PI * nu / 4.0, PI / 4.0)),
                d(-inu, 3.0 * PI / 4.0)?.scale(e(-3.0 * PI * nu / 4.0, 0.0)),
            ],
        ])
    }
}

/// M^(PC)(zeta) = psi P zeta^{-i nu sigma_3} e^{i zeta^2 sigma_3/4}, arg zeta in (-pi, pi].
pub fn pc_matrix(model: &PCModel, zeta: C64) -> Result<Matrix2C> {
    check_finite(zeta, "zeta")?;
    if zeta.norm() > PC_MAX_RADIUS {
        return Err(Error::Accuracy(format!(
            "|zeta| = {} exceeds {PC_MAX_RADIUS}",
            zeta.norm()
        )));
    }
    if zeta == c64(0.0, 0.0) {
        return Err(Error::BranchPoint(0.0));
    }
    if on_ray(zeta, &PC_RAYS) {
        return Err(Error::Ray(zeta.to_string()));
    }
    if model.kappa == c64(0.0, 0.0) {
        return Ok(Matrix2C::identity());
    }
    let (b12, b21) = pc_beta(model)?;
    let psi = pc_psi(model, b12, b21, zeta)?;
    let p = pc_sector(model, zeta.arg());
    let e1 = -I * model.nu * zeta.ln() + I * zeta * zeta * 0.25;
    let logs = [e1, -e1];
    let zero = ExpScaled::plain(c64(0.0, 0.0));
    let mut out = Matrix2C::zero();
    for i in 0..2 {
        for j in 0..2 {
            let mut acc = zero;
            for k in 0..2 {
                let pk = p.get(k, j);
                if pk != c64(0.0, 0.0) {
                    acc = acc.add(&psi[i][k].scale(pk));
                }
            }
            out.0[i][j] = acc.mul_exp(logs[j]).value();
        }
    }
    if !out.is_finite() {
        return Err(Error::Accuracy(format!(
            "M^(PC) overflows at zeta = {zeta}"
        )));
    }
    Ok(out)
}

/// Jump matrix V^(PC) on the ray through zeta (on-ray point assumed).
pub fn pc_jump(model: &PCModel, zeta: C64) -> Matrix2C {
    let one = c64(1.0, 0.0);
    let zero = c64(0.0, 0.0);
    let k = model.kappa;
    let kh = model.kappa_hat();
    let a = zeta.arg();
    let tri = if a > 0.0 && a < PI / 2.0 {
        Matrix2C::new(one, zero, k, one)
    } else if a < 0.0 && a > -PI / 2.0 {
        Matrix2C::new(one, -k.conj(), zero, one)
    } else if a < 0.0 {
        Matrix2C::new(one, zero, kh, one)
    } else {
        Matrix2C::new(one, -kh.conj(), zero, one)
    };
    let e = I * model.nu * zeta.ln() - I * zeta * zeta * 0.25;
    conj_diag(tri, e)
}

/// e^{e sigma_3} m e^{-e sigma_3}.
fn conj_diag(m: Matrix2C, e: C64) -> Matrix2C {
    let f = (2.0 * e).exp();
    Matrix2C::new(m.get(0, 0), m.get(0, 1) * f, m.get(1, 0) / f, m.get(1, 1))
}

/// Two-sided limits (counter-clockwise side, clockwise side) at a point of a
/// ray, from rotations by `RAY_OFFSET` and twice it with linear extrapolation.
pub fn ray_limits<F>(f: F, zeta: C64) -> Result<(Matrix2C, Matrix2C)>
where
    F: Fn(C64) -> Result<Matrix2C>,
{
    let side = |sgn: f64| -> Result<Matrix2C> {
        let a = f(zeta * C64::from_polar(1.0, sgn * RAY_OFFSET))?;
        let b = f(zeta * C64::from_polar(1.0, 2.0 * sgn * RAY_OFFSET))?;
        Ok(a.scale(c64(2.0, 0.0)) - b)
    };
    Ok((side(1.0)?, side(-1.0)?))
}

fn airy_sector_factor(arg: f64) -> Matrix2C {
    let one = c64(1.0, 0.0);
    let zero = c64(0.0, 0.0);
    if arg > 2.0 * PI / 3.0 {
        Matrix2C::new(one, zero, -one, one)
    } else if arg < -2.0 * PI / 3.0 {
        Matrix2C::new(one, zero, one, one)
    } else {
        Matrix2C::identity()
    }
}

/// Psi^(Ai)(zeta) = A(zeta) (sector factor) e^{(2/3) zeta^{3/2} sigma_3}.
pub fn airy_matrix(zeta: C64) -> Result<Matrix2C> {
    check_finite(zeta, "zeta")?;
    if zeta.norm() > AIRY_MAX_RADIUS {
        return Err(Error::Accuracy(format!(
            "|zeta| = {} exceeds {AIRY_MAX_RADIUS}",
            zeta.norm()
        )));
    }
    if zeta == c64(0.0, 0.0) || on_ray(zeta, &AIRY_RAYS) {
        return Err(Error::Ray(zeta.to_string()));
    }
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let w2 = w * w;
    let (a0, d0) = airy_pair(zeta);
    let a = if zeta.im > 0.0 {
        let (a1, d1) = airy_pair(w2 * zeta);
        Matrix2C::new(a0, a1, d0, w2 * d1)
    } else {
        let (a1, d1) = airy_pair(w * zeta);
        Matrix2C::new(a0, -w2 * a1, d0, -d1)
    };
    let rot = Matrix2C::diag_pow(C64::from_polar(1.0, -PI / 6.0));
    let e = zeta.powf(1.5) * (2.0 / 3.0);
    let out = a * rot * airy_sector_factor(zeta.arg()) * Matrix2C::diag_pow(e.exp());
    if !out.is_finite() {
        return Err(Error::Accuracy(format!(
            "Psi^(Ai) overflows at zeta = {zeta}"
        )));
    }
    Ok(out)
}

/// Jump matrix V^(Ai) on the ray through zeta (on-ray point assumed).
pub fn airy_jump(zeta: C64) -> Matrix2C {
    let one = c64(1.0, 0.0);
    let zero = c64(0.0, 0.0);
    let a = zeta.arg();
    if a.abs() > 5.0 * PI / 6.0 {
        return Matrix2C::new(zero, one, -one, zero);
    }
    let e = zeta.powf(1.5) * (4.0 / 3.0);
    if a.abs() < PI / 3.0 {
        Matrix2C::new(one, (-e).exp(), zero, one)
    } else {
        Matrix2C::new(one, zero, e.exp(), one)
    }
}

/// K_j = (3^j/2^{j+1}) e^{i pi sigma_3/4} [[(-1)^j (s+n), s-n], [(-1)^j (s-n), s+n]] e^{-i pi sigma_3/4}.
pub fn airy_k(j: usize) -> Result<Matrix2C> {
    if j == 0 || j > AIRY_K_MAX {
        return Err(Error::InvalidParams(format!(
            "airy_k index {j} outside 1..={AIRY_K_MAX}"
        )));
    }
    let s = AiryModel::s(j);
    let n = AiryModel::nu(j);
    let sg = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
    let c = 3f64.powi(j as i32) / 2f64.powi(j as i32 + 1);
    let m = Matrix2C::new(
        c64(sg * (s + n), 0.0),
        c64(s - n, 0.0),
        c64(sg * (s - n), 0.0),
        c64(s + n, 0.0),
    );
    let r = C64::from_polar(1.0, PI / 4.0);
    Ok((Matrix2C::diag_pow(r) * m * Matrix2C::diag_pow(r.inv())).scale(c.into()))
}

/// (Psi_0)^{-1} zeta^{sigma_3/4} Psi^(Ai)(zeta), which tends to I.
pub fn airy_normalized(zeta: C64) -> Result<Matrix2C> {
    let q = zeta.powf(0.25);
    Ok(AiryModel::psi0().inverse() * Matrix2C::diag_pow(q) * airy_matrix(zeta)?)
}

/// Dressed coefficients: beta_12(r_eta) D_b^2 e^{-2 i t g_eta} and nu / that.
pub fn pc_hat_beta(r_eta: C64, nu: f64, d_b: C64, g_eta: f64, t: f64) -> Result<(C64, C64)> {
    check_finite(r_eta, "r_eta")?;
    check_finite(d_b, "D_b")?;
    if r_eta == c64(0.0, 0.0) {
        return Err(Error::Degenerate("r(eta) = 0 gives the trivial model"));
    }
    let (b12, _) = beta_from(r_eta, nu)?;
    let h12 = b12 * d_b * d_b * C64::from_polar(1.0, -2.0 * t * g_eta);
    Ok((h12, nu / h12))
}
