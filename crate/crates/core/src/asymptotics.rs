//! Closed-form large-time asymptotics of q(x, t) in regions I-IV and the
//! leading-term matching across the internal region boundaries.
//!
//! The x-independent ingredients (r at the stationary point, D-function
//! constants, g(eta)) depend on xi only and are gathered once per xi in an
//! `XiInputs`; the region formulas then evaluate cheaply for any t.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dfunction::{
    d_eta_limit, d_infinity, d_limit_constants, default_quadrature, DContext, LimitConstants,
};
use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;
use crate::parametrix::{pc_hat_beta, AiryModel};
use crate::phase::{classify_xi, g_eval, PhaseContext, Region, DEFAULT_MARGIN};
use crate::scattering::{reflection_source, ReflectionSource};
use crate::types::{c64, CutSide, StepParams, C64, I};

/// Relative tolerance for the agreement of x / (12 t) with the prepared xi.
const XI_MATCH_TOL: f64 = 1e-9;

/// Claimed order of the remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorOrder {
    /// O(t^{-1}).
    #[serde(rename = "t^-1")]
    TMinusOne,
    /// O(t^{-2}).
    #[serde(rename = "t^-2")]
    TMinusTwo,
    /// O(t^{-1/2} e^{-16 t xi^{3/2}}).
    #[serde(rename = "exponential")]
    Exponential,
}

impl ErrorOrder {
    pub fn label(self) -> &'static str {
        match self {
            ErrorOrder::TMinusOne => "t^-1",
            ErrorOrder::TMinusTwo => "t^-2",
            ErrorOrder::Exponential => "exponential",
        }
    }
}

impl fmt::Display for ErrorOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One evaluation of the asymptotic formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValue {
    pub x: f64,
    pub t: f64,
    pub xi: f64,
    pub region: Region,
    pub leading: f64,
    pub subleading: f64,
    pub q_total: f64,
    /// Imaginary part of the complex leading + subleading combination.
    pub q_imag: f64,
    pub error_order: ErrorOrder,
    /// t^{-1/2} e^{-16 t xi^{3/2}} in region IV.
    pub envelope: Option<f64>,
}

impl AsymptoticValue {
    fn from_complex(
        x: f64,
        t: f64,
        xi: f64,
        region: Region,
        lead: C64,
        sub: C64,
        order: ErrorOrder,
    ) -> Self {
        AsymptoticValue {
            x,
            t,
            xi,
            region,
            leading: lead.re,
            subleading: sub.re,
            q_total: lead.re + sub.re,
            q_imag: lead.im + sub.im,
            error_order: order,
            envelope: None,
        }
    }
}

/// Which boundary value of r enters f_III at eta inside (-c_r, c_r).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionIIIBranch {
    /// r_+, the limit from the upper half plane. For r analytic above the
    /// band this is also its continuation from above.
    #[default]
    Plus,
    /// r_-, the limit from the lower half plane.
    Minus,
}

impl RegionIIIBranch {
    fn side(self) -> CutSide {
        match self {
            RegionIIIBranch::Plus => CutSide::Above,
            RegionIIIBranch::Minus => CutSide::Below,
        }
    }
}

/// How beta-hat_12 at -eta is formed in f_I.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinusEtaForm {
    /// The complex conjugate of beta-hat_12 at eta, as the symmetry
    /// r(-k) = conj r(k) and g(-k) = -g(k) dictates. Keeps q real.
    #[default]
    Symmetric,
    /// conj(r) and D_b(-eta) substituted into the eta formula with the same
    /// e^{-2itg(eta)} and Gamma(-i nu) factors.
    Displayed,
}

/// Ingredients of the region I formula at one xi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionIInputs {
    pub xi: f64,
    pub c_l: f64,
    pub eta: f64,
    pub r_eta: C64,
    pub nu: f64,
    pub d_inf: C64,
    pub d_b_plus: C64,
    pub d_b_minus: C64,
    pub g_eta: f64,
    pub g2_eta: f64,
    pub minus_eta: MinusEtaForm,
}

/// Ingredients of the region II formula at one xi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionIIInputs {
    pub xi: f64,
    pub eta: f64,
    /// r_+(eta); eta lies on the side band (c_r, c_l).
    pub r_eta: C64,
    pub d_inf: C64,
    /// Endpoint constant standing for D_0 (see `prepare`).
    pub d0: C64,
}

/// Ingredients of the region III formula at one xi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionIIIInputs {
    pub xi: f64,
    pub c_r: f64,
    pub eta: f64,
    pub r_eta: C64,
    pub branch: RegionIIIBranch,
}

/// Ingredients of the region IV formula at one xi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionIVInputs {
    pub xi: f64,
    pub c_r: f64,
}

/// Per-xi ingredients, tagged by region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "region")]
pub enum XiInputs {
    I(RegionIInputs),
    II(RegionIIInputs),
    III(RegionIIIInputs),
    IV(RegionIVInputs),
}

impl XiInputs {
    pub fn xi(&self) -> f64 {
        match self {
            XiInputs::I(v) => v.xi,
            XiInputs::II(v) => v.xi,
            XiInputs::III(v) => v.xi,
            XiInputs::IV(v) => v.xi,
        }
    }

    pub fn region(&self) -> Region {
        match self {
            XiInputs::I(_) => Region::I,
            XiInputs::II(_) => Region::II,
            XiInputs::III(_) => Region::III,
            XiInputs::IV(_) => Region::IV,
        }
    }

    /// Evaluates the region's formula at (x, t).
    pub fn evaluate(&self, x: f64, t: f64) -> Result<AsymptoticValue> {
        match self {
            XiInputs::I(v) => q_region_i(x, t, v),
            XiInputs::II(v) => q_region_ii(x, t, v),
            XiInputs::III(v) => q_region_iii(x, t, v),
            XiInputs::IV(v) => q_region_iv(x, t, v),
        }
    }
}

/// Options for preparing the per-xi ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticOptions {
    pub margin: f64,
    pub quadrature: QuadratureSpec,
    pub region_iii_branch: RegionIIIBranch,
    pub minus_eta: MinusEtaForm,
}

impl Default for AsymptoticOptions {
    fn default() -> Self {
        AsymptoticOptions {
            margin: DEFAULT_MARGIN,
            quadrature: default_quadrature(),
            region_iii_branch: RegionIIIBranch::Plus,
            minus_eta: MinusEtaForm::Symmetric,
        }
    }
}

/// Gathers the ingredients at xi; fails with BoundaryRegion inside a margin.
///
/// Region II uses the bounded limit D(eta) for D_0: D stays bounded at eta,
/// so lim (k - eta)^{-1/4} D(k) does not exist.
pub fn prepare(
    xi: f64,
    params: &StepParams,
    source: Arc<dyn ReflectionSource>,
    opts: &AsymptoticOptions,
) -> Result<XiInputs> {
    params.validate()?;
    if !xi.is_finite() {
        return Err(Error::InvalidParams("xi must be finite".into()));
    }
    let region = classify_xi(xi, params.c_l, params.c_r, opts.margin);
    match region {
        Region::Boundary => Err(Error::BoundaryRegion(xi)),
        Region::I => {
            let ctx = DContext::in_region(xi, Region::I, *params, source.clone(), opts.quadrature)?;
            let ph = PhaseContext::in_region(xi, Region::I, params.c_l, params.c_r)?;
            let eta = ctx.eta;
            let r_eta = source.r(c64(eta, 0.0), CutSide::Off)?;
            let (d_b_plus, d_b_minus, nu) = match d_limit_constants(&ctx)? {
                LimitConstants::RegionI {
                    db_plus,
                    db_minus,
                    nu_plus,
                    ..
                } => (db_plus, db_minus, nu_plus),
                LimitConstants::RegionII { .. } => unreachable!("region I context"),
            };
            Ok(XiInputs::I(RegionIInputs {
                xi,
                c_l: params.c_l,
                eta,
                r_eta,
                nu,
                d_inf: d_infinity(&ctx)?,
                d_b_plus,
                d_b_minus,
                g_eta: g_eval(&ph, c64(eta, 0.0), CutSide::Off)?.re,
                g2_eta: crate::phase::g_second_at_eta(&ph)?,
                minus_eta: opts.minus_eta,
            }))
        }
        Region::II => {
            let ctx =
                DContext::in_region(xi, Region::II, *params, source.clone(), opts.quadrature)?;
            let eta = ctx.eta;
            Ok(XiInputs::II(RegionIIInputs {
                xi,
                eta,
                r_eta: source.r(c64(eta, 0.0), CutSide::Above)?,
                d_inf: d_infinity(&ctx)?,
                d0: d_eta_limit(&ctx)?,
            }))
        }
        Region::III => {
            let eta = (-xi + params.c_r * params.c_r / 2.0).sqrt();
            let branch = opts.region_iii_branch;
            Ok(XiInputs::III(RegionIIIInputs {
                xi,
                c_r: params.c_r,
                eta,
                r_eta: source.r(c64(eta, 0.0), branch.side())?,
                branch,
            }))
        }
        Region::IV => Ok(XiInputs::IV(RegionIVInputs {
            xi,
            c_r: params.c_r,
        })),
    }
}

/// `prepare` with the reflection source implied by the profile.
pub fn prepare_default(xi: f64, params: &StepParams) -> Result<XiInputs> {
    prepare(
        xi,
        params,
        Arc::from(reflection_source(params)),
        &AsymptoticOptions::default(),
    )
}

fn check_point(x: f64, t: f64, xi: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite() && x.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "need finite x and t > 0, got ({x}, {t})"
        )));
    }
    let got = x / (12.0 * t);
    if (got - xi).abs() > XI_MATCH_TOL * xi.abs().max(1.0) {
        return Err(Error::InvalidParams(format!(
            "x / (12 t) = {got} does not match prepared xi = {xi}"
        )));
    }
    Ok(())
}

/// The bracket of f_I, without the (-xi - c_l^2/2)^{1/4} sqrt(3)/12 prefactor.
fn f_i_bracket(b_p: C64, b_m: C64, nu: f64, eta: f64) -> C64 {
    let (a_p, a_m) = (nu / b_p, nu / b_m);
    b_p + b_m - a_p - a_m + (b_p + b_m + a_p + a_m) / eta
}

/// (beta-hat_12 at eta, beta-hat_12 at -eta) at time t.
pub fn hat_betas(inp: &RegionIInputs, t: f64) -> Result<(C64, C64)> {
    let (b_p, _) = pc_hat_beta(inp.r_eta, inp.nu, inp.d_b_plus, inp.g_eta, t)?;
    let b_m = match inp.minus_eta {
        MinusEtaForm::Symmetric => b_p.conj(),
        MinusEtaForm::Displayed => {
            pc_hat_beta(inp.r_eta.conj(), inp.nu, inp.d_b_minus, inp.g_eta, t)?.0
        }
    };
    Ok((b_p, b_m))
}

/// f_I(xi) at time t (the beta-hat coefficients carry e^{-2 i t g(eta)}).
pub fn f_i(inp: &RegionIInputs, t: f64) -> Result<C64> {
    let (b_p, b_m) = hat_betas(inp, t)?;
    let pre = 3f64.sqrt() / 12.0 * (-inp.xi - inp.c_l * inp.c_l / 2.0).powf(0.25);
    Ok(f_i_bracket(b_p, b_m, inp.nu, inp.eta) * pre)
}

/// Region I: D_inf^{-2} (c_l + t^{-1/2} f_I).
pub fn q_region_i(x: f64, t: f64, inp: &RegionIInputs) -> Result<AsymptoticValue> {
    check_point(x, t, inp.xi)?;
    if inp.r_eta == c64(0.0, 0.0) {
        return Err(Error::Degenerate(
            "r(eta) = 0 removes the parabolic-cylinder term",
        ));
    }
    let dress = inp.d_inf.powi(-2);
    let lead = dress * inp.c_l;
    let sub = dress * f_i(inp, t)? / t.sqrt();
    Ok(AsymptoticValue::from_complex(
        x,
        t,
        inp.xi,
        Region::I,
        lead,
        sub,
        ErrorOrder::TMinusOne,
    ))
}

/// (D r^{-1/2} - D^{-1} r^{1/2})^2 / (D^2 r^{-1} - 1), simplified to 1 - r/D^2.
fn airy_fraction(r: C64, d_sq: C64) -> C64 {
    1.0 - r / d_sq
}

/// The common factor (i s_1 + i nu_1 eta^2) / eta^4 times 3 sqrt 2 / 48.
fn airy_factor(eta: f64) -> C64 {
    let (s1, n1) = (AiryModel::s(1), AiryModel::nu(1));
    I * (s1 + n1 * eta * eta) / eta.powi(4) * (3.0 * 2f64.sqrt() / 48.0)
}

/// f_II(xi), with r and D_0 taken at eta.
pub fn f_ii(inp: &RegionIIInputs) -> C64 {
    let d_sq = inp.d0 * inp.d0;
    let r = inp.r_eta;
    (airy_fraction(r, d_sq) - airy_fraction(r.conj(), d_sq)) * airy_factor(inp.eta)
}

/// Region II: D_inf^{-2} (sqrt(-x/(6t)) + t^{-1} f_II).
pub fn q_region_ii(x: f64, t: f64, inp: &RegionIIInputs) -> Result<AsymptoticValue> {
    check_point(x, t, inp.xi)?;
    if x >= 0.0 {
        return Err(Error::Region(format!("region II needs x < 0, got {x}")));
    }
    let dress = inp.d_inf.powi(-2);
    let lead = dress * (-x / (6.0 * t)).sqrt();
    let sub = dress * f_ii(inp) / t;
    Ok(AsymptoticValue::from_complex(
        x,
        t,
        inp.xi,
        Region::II,
        lead,
        sub,
        ErrorOrder::TMinusTwo,
    ))
}

/// f_III(xi), with r taken at eta on the selected branch.
pub fn f_iii(inp: &RegionIIIInputs) -> C64 {
    let r = inp.r_eta;
    (airy_fraction(r, c64(1.0, 0.0)) - airy_fraction(r.conj(), c64(1.0, 0.0)))
        * airy_factor(inp.eta)
}

/// Region III: c_r + t^{-1} f_III.
pub fn q_region_iii(x: f64, t: f64, inp: &RegionIIIInputs) -> Result<AsymptoticValue> {
    check_point(x, t, inp.xi)?;
    let lead = c64(inp.c_r, 0.0);
    let sub = f_iii(inp) / t;
    Ok(AsymptoticValue::from_complex(
        x,
        t,
        inp.xi,
        Region::III,
        lead,
        sub,
        ErrorOrder::TMinusTwo,
    ))
}

/// Remainder envelope t^{-1/2} e^{-16 t xi^{3/2}} of region IV.
pub fn region_iv_envelope(xi: f64, t: f64) -> f64 {
    (-16.0 * t * xi.powf(1.5)).exp() / t.sqrt()
}

/// Region IV: c_r with an exponentially small remainder.
pub fn q_region_iv(x: f64, t: f64, inp: &RegionIVInputs) -> Result<AsymptoticValue> {
    check_point(x, t, inp.xi)?;
    if !(inp.xi > inp.c_r * inp.c_r / 2.0) {
        return Err(Error::Region(format!(
            "xi = {} is not in region IV",
            inp.xi
        )));
    }
    let mut v = AsymptoticValue::from_complex(
        x,
        t,
        inp.xi,
        Region::IV,
        c64(inp.c_r, 0.0),
        c64(0.0, 0.0),
        ErrorOrder::Exponential,
    );
    v.envelope = Some(region_iv_envelope(inp.xi, t));
    Ok(v)
}

/// Angular frequency in t of the region I subleading oscillation, 2|g(eta)|.
pub fn region_i_frequency(inp: &RegionIInputs) -> f64 {
    2.0 * inp.g_eta.abs()
}

/// Leading-term comparison across the two internal boundaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub eps: f64,
    /// Region I leading at -c_l^2/2 - eps.
    pub left_i: f64,
    /// Region II leading at -c_l^2/2 + eps.
    pub left_ii: f64,
    /// Region II leading at -c_r^2/2 - eps.
    pub right_ii: f64,
    /// Region III leading at -c_r^2/2 + eps.
    pub right_iii: f64,
    pub gap_left: f64,
    pub gap_right: f64,
}

impl BoundaryReport {
    pub fn max_gap(&self) -> f64 {
        self.gap_left.max(self.gap_right)
    }
}

fn dressing(
    xi: f64,
    region: Region,
    params: &StepParams,
    source: &Arc<dyn ReflectionSource>,
) -> Result<C64> {
    let ctx = DContext::in_region(xi, region, *params, source.clone(), default_quadrature())?;
    Ok(d_infinity(&ctx)?.powi(-2))
}

/// Relative gaps of the leading terms at xi = -c_l^2/2 +- eps and -c_r^2/2 +- eps.
pub fn boundary_matching(
    params: &StepParams,
    source: Arc<dyn ReflectionSource>,
    eps: f64,
) -> Result<BoundaryReport> {
    params.validate()?;
    if !(eps > 0.0 && eps < 1e-2) {
        return Err(Error::InvalidParams(format!(
            "eps = {eps} must lie in (0, 1e-2)"
        )));
    }
    let (c_l, c_r) = (params.c_l, params.c_r);
    let xl = -c_l * c_l / 2.0;
    let xr = -c_r * c_r / 2.0;
    let left_i = (dressing(xl - eps, Region::I, params, &source)? * c_l).re;
    let left_ii =
        (dressing(xl + eps, Region::II, params, &source)? * (-2.0 * (xl + eps)).sqrt()).re;
    let right_ii =
        (dressing(xr - eps, Region::II, params, &source)? * (-2.0 * (xr - eps)).sqrt()).re;
    let right_iii = c_r;
    Ok(BoundaryReport {
        eps,
        left_i,
        left_ii,
        right_ii,
        right_iii,
        gap_left: (left_i - left_ii).abs() / c_l,
        gap_right: (right_ii - right_iii).abs() / c_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> StepParams {
        StepParams::pure(2.0, 1.0).unwrap()
    }

    fn at(xi: f64) -> XiInputs {
        prepare_default(xi, &step()).unwrap()
    }

    #[test]
    fn region_tags_and_boundary() {
        assert_eq!(at(-3.0).region(), Region::I);
        assert_eq!(at(-1.0).region(), Region::II);
        assert_eq!(at(0.0).region(), Region::III);
        assert_eq!(at(1.0).region(), Region::IV);
        assert_eq!(
            prepare_default(-2.0, &step()),
            Err(Error::BoundaryRegion(-2.0))
        );
    }

    #[test]
    fn region_i_leading_and_scaling() {
        let inp = at(-3.0);
        let a = inp.evaluate(-3.0 * 12.0 * 100.0, 100.0).unwrap();
        assert!((a.leading - 2.0).abs() < 1e-8);
        assert!(a.q_imag.abs() < 1e-8);
        if let XiInputs::I(v) = inp {
            let f0 = f_i(&v, 100.0).unwrap().norm();
            let f1 = f_i(&v, 400.0).unwrap().norm();
            // |f_I| is t-independent up to the beat of the two oscillating terms.
            assert!(f0 > 0.0 && f1 > 0.0);
            let s0 = (f_i(&v, 100.0).unwrap() / 10.0).norm();
            let s1 = (f_i(&v, 100.0).unwrap() / 20.0).norm();
            assert!((s0 / s1 - 2.0).abs() < 1e-12);
            assert!(region_i_frequency(&v) > 0.0);
            let (bp, bm) = hat_betas(&v, 3.0).unwrap();
            assert!((bp.norm_sqr() - v.nu * v.d_b_plus.norm().powi(4)).abs() < 1e-12);
            assert!((bm - bp.conj()).norm() < 1e-15);
            let shown = RegionIInputs {
                minus_eta: MinusEtaForm::Displayed,
                ..v
            };
            let (_, bm2) = hat_betas(&shown, 3.0).unwrap();
            assert!((bm2.norm() - bm.norm()).abs() < 1e-12);
        } else {
            panic!("expected region I");
        }
    }

    #[test]
    fn region_i_far_left_tends_to_c_l() {
        let inp = at(-1e3);
        let a = inp.evaluate(-1e3 * 12.0, 1.0).unwrap();
        assert!((a.leading - 2.0).abs() < 1e-3);
    }

    #[test]
    fn region_ii_leading_profile() {
        for &xi in &[-0.75, -1.0, -1.25] {
            let inp = at(xi);
            let t = 50.0;
            let a = inp.evaluate(12.0 * xi * t, t).unwrap();
            assert!((a.leading - (-2.0 * xi).sqrt()).abs() < 1e-8, "xi {xi}");
        }
        let a = at(-1.0).evaluate(-12.0, 1.0).unwrap();
        assert!((a.leading - 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn region_iii_values() {
        let inp = at(0.0);
        if let XiInputs::III(v) = inp {
            assert!((v.eta - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        }
        let a = inp.evaluate(0.0, 10.0).unwrap();
        assert_eq!(a.leading, 1.0);
        assert!(a.q_imag.abs() < 1e-8);
        let b = inp.evaluate(0.0, 40.0).unwrap();
        assert!((a.subleading / b.subleading - 4.0).abs() < 1e-8);
    }

    #[test]
    fn region_iv_envelope_properties() {
        let a = at(1.0).evaluate(120.0, 10.0).unwrap();
        assert_eq!(a.leading, 1.0);
        assert_eq!(a.subleading, 0.0);
        assert_eq!(a.error_order, ErrorOrder::Exponential);
        let e = a.envelope.unwrap();
        assert!((e / (10f64.powf(-0.5) * (-160f64).exp()) - 1.0).abs() < 1e-12);
        assert!(region_iv_envelope(1.0, 11.0) < e && region_iv_envelope(1.1, 10.0) < e);
    }

    #[test]
    fn xi_mismatch_rejected() {
        assert!(matches!(
            at(0.0).evaluate(1.0, 10.0),
            Err(Error::InvalidParams(_))
        ));
    }

    #[test]
    fn boundary_gaps_shrink() {
        let src: Arc<dyn ReflectionSource> = Arc::from(reflection_source(&step()));
        let g: Vec<f64> = [1e-3, 1e-4]
            .iter()
            .map(|&e| {
                boundary_matching(&step(), src.clone(), e)
                    .unwrap()
                    .max_gap()
            })
            .collect();
        assert!(g[0] < 1e-2 && g[1] < g[0], "{g:?}");
    }
}
