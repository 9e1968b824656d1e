//! Scalar Cauchy-integral functions D(xi; k), D_inf(xi) and their endpoint constants.
//!
//! D = exp{ X(k)/(2 pi i) sum_bands int w(s)/(s - k) ds } with band weights
//! w = log(1 - r r*)/X or log r_+ / X_+. Near a band the Cauchy kernel is
//! regularized by subtract-and-add with a closed-form logarithm.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numerics::{integrate_with_offsets, sqrt_cut, EndpointSingularity, QuadratureSpec};
use crate::phase::{classify_xi, PhaseContext, Region, DEFAULT_MARGIN};
use crate::scattering::{reflection_source, ReflectionSource};
use crate::types::{c64, check_finite, CutSide, StepParams, C64, I};

/// Samples per band used to fix the continuous branch of log r_+.
const TRACK_SAMPLES: usize = 400;
/// Largest accepted change of arg r_+ between neighbouring samples.
const TRACK_MAX_STEP: f64 = PI / 2.0;
/// Relative distance from a branch point inside which log(1 - |r|^2) is extrapolated.
const LOG_FLOOR: f64 = 1e-10;

/// Ray radii for the endpoint limits.
pub const RAY_RADII: [f64; 3] = [1e-2, 1e-3, 1e-4];
/// Relative agreement required between successive Richardson values.
pub const EXTRAPOLATION_TOL: f64 = 1e-5;
/// Default relative quadrature tolerance for D. The log(1 - r r*) weight is
/// only resolved to about 1e-11 near the branch point c_l, where s - c_l
/// falls below the spacing of doubles.
pub const D_QUADRATURE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Weight {
    /// log(1 - r r*) / X_c on a band outside the cut.
    LogOneMinus,
    /// log r_+ / X_{c+} on a band inside the cut.
    LogRPlus,
}

/// Unwrapped arg r_+ samples along one band.
#[derive(Debug, Clone)]
struct ArgTrack {
    s: Vec<f64>,
    arg: Vec<f64>,
}

impl ArgTrack {
    fn unwrapped(&self, s: f64, principal: f64) -> f64 {
        let j = self.s.partition_point(|&x| x < s);
        let guess = if j == 0 {
            self.arg[0]
        } else if j == self.s.len() {
            self.arg[j - 1]
        } else {
            let (s0, s1) = (self.s[j - 1], self.s[j]);
            let w = (s - s0) / (s1 - s0);
            self.arg[j - 1] * (1.0 - w) + self.arg[j] * w
        };
        principal + 2.0 * PI * ((guess - principal) / (2.0 * PI)).round()
    }
}

#[derive(Debug, Clone)]
struct Band {
    a: f64,
    b: f64,
    weight: Weight,
    /// Whether the weight has an inverse-square-root blowup at a (resp. b).
    sing_a: bool,
    sing_b: bool,
    track: Option<ArgTrack>,
}

/// Region, levels, spectral data and quadrature settings for D.
#[derive(Clone)]
pub struct DContext {
    pub region: Region,
    pub xi: f64,
    pub params: StepParams,
    pub reflection: Arc<dyn ReflectionSource>,
    pub quadrature: QuadratureSpec,
    pub eta: f64,
    /// Radius of the cut carried by X in the prefactor.
    cut: f64,
    bands: Vec<Band>,
}

impl std::fmt::Debug for DContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DContext")
            .field("region", &self.region)
            .field("xi", &self.xi)
            .field("params", &self.params)
            .field("eta", &self.eta)
            .finish_non_exhaustive()
    }
}

impl DContext {
    /// Classifies xi (region I or II) and prepares the band data.
    pub fn new(
        xi: f64,
        params: StepParams,
        reflection: Arc<dyn ReflectionSource>,
        quadrature: QuadratureSpec,
    ) -> Result<Self> {
        params.validate()?;
        let region = classify_xi(xi, params.c_l, params.c_r, DEFAULT_MARGIN);
        if region == Region::Boundary {
            return Err(Error::BoundaryRegion(xi));
        }
        Self::in_region(xi, region, params, reflection, quadrature)
    }

    /// Context with the reflection source implied by the profile.
    pub fn from_params(xi: f64, params: StepParams) -> Result<Self> {
        Self::new(
            xi,
            params,
            Arc::from(reflection_source(&params)),
            default_quadrature(),
        )
    }

    /// Context for a prescribed region (I or II).
    pub fn in_region(
        xi: f64,
        region: Region,
        params: StepParams,
        reflection: Arc<dyn ReflectionSource>,
        quadrature: QuadratureSpec,
    ) -> Result<Self> {
        quadrature.validate()?;
        if !matches!(region, Region::I | Region::II) {
            return Err(Error::Region(format!(
                "D-function is defined in regions I and II, not {region}"
            )));
        }
        let ph = PhaseContext::in_region(xi, region, params.c_l, params.c_r)?;
        let (eta, c_l, c_r) = (ph.eta, params.c_l, params.c_r);
        let mut bands = Vec::new();
        let cut = match region {
            Region::I => {
                if !(eta > c_l) {
                    return Err(Error::Region(format!(
                        "eta = {eta} must exceed c_l in region I"
                    )));
                }
                bands.push(band(-eta, -c_l, Weight::LogOneMinus, false, true));
                bands.push(band(c_l, eta, Weight::LogOneMinus, true, false));
                if c_l > c_r {
                    bands.push(band(-c_l, -c_r, Weight::LogRPlus, true, false));
                    bands.push(band(c_r, c_l, Weight::LogRPlus, false, true));
                }
                c_l
            }
            _ => {
                if !(eta > c_r) {
                    return Err(Error::Region(format!(
                        "eta = {eta} must exceed c_r in region II"
                    )));
                }
                bands.push(band(-eta, -c_r, Weight::LogRPlus, true, false));
                bands.push(band(c_r, eta, Weight::LogRPlus, false, true));
                eta
            }
        };
        let mut ctx = DContext {
            region,
            xi,
            params,
            reflection,
            quadrature,
            eta,
            cut,
            bands,
        };
        for j in 0..ctx.bands.len() {
            if ctx.bands[j].weight == Weight::LogRPlus {
                let t = ctx.track_band(&ctx.bands[j])?;
                ctx.bands[j].track = Some(t);
            }
        }
        Ok(ctx)
    }

    /// Integration bands as (a, b) pairs.
    pub fn bands(&self) -> Vec<(f64, f64)> {
        self.bands.iter().map(|b| (b.a, b.b)).collect()
    }

    /// Samples arg r_+ from the inner endpoint outwards and unwraps it.
    fn track_band(&self, bd: &Band) -> Result<ArgTrack> {
        let n = TRACK_SAMPLES;
        let (m, h) = (0.5 * (bd.a + bd.b), 0.5 * (bd.b - bd.a));
        let mut s: Vec<f64> = (1..n)
            .map(|j| m - h * (PI * j as f64 / n as f64).cos())
            .collect();
        let inner_first = bd.a.abs() < bd.b.abs();
        if !inner_first {
            s.reverse();
        }
        let mut arg: Vec<f64> = Vec::with_capacity(s.len());
        for &x in &s {
            let r = self.reflection.r(c64(x, 0.0), CutSide::Above)?;
            if !(r.norm() > 0.0) || !r.norm().is_finite() {
                return Err(Error::BranchAmbiguity(x));
            }
            let p = r.arg();
            let v = match arg.last() {
                None => p,
                Some(&prev) => {
                    let v = p + 2.0 * PI * ((prev - p) / (2.0 * PI)).round();
                    if (v - prev).abs() > TRACK_MAX_STEP {
                        return Err(Error::BranchAmbiguity(x));
                    }
                    v
                }
            };
            arg.push(v);
        }
        if !inner_first {
            s.reverse();
            arg.reverse();
        }
        Ok(ArgTrack { s, arg })
    }

    /// Continuous log r_+ on a band.
    fn log_r_plus(&self, bd: &Band, s: f64) -> Result<C64> {
        let r = self.reflection.r(c64(s, 0.0), CutSide::Above)?;
        let track = bd.track.as_ref().ok_or(Error::BranchAmbiguity(s))?;
        let arg = track.unwrapped(s, r.arg());
        Ok(c64(r.norm().ln(), arg))
    }

    /// s - e for an endpoint e of the band, exact when e is a band end.
    fn offset(bd: &Band, s: f64, da: f64, db: f64, e: f64) -> f64 {
        if e == bd.a {
            da
        } else if e == bd.b {
            -db
        } else {
            s - e
        }
    }

    /// X(s) off the cut or X_+(s) on it, from exact endpoint offsets.
    fn x_value(&self, bd: &Band, s: f64, da: f64, db: f64) -> C64 {
        let c = self.cut;
        let pm = Self::offset(bd, s, da, db, c) * Self::offset(bd, s, da, db, -c);
        if pm > 0.0 {
            c64(s.signum() * pm.sqrt(), 0.0)
        } else {
            c64(0.0, (-pm).sqrt())
        }
    }

    /// Band weight w(s) at an interior point with endpoint offsets da, db.
    fn weight(&self, bd: &Band, s: f64, da: f64, db: f64) -> Result<C64> {
        if !(da > 0.0 && db > 0.0) {
            return Ok(C64::new(0.0, 0.0));
        }
        let x = self.x_value(bd, s, da, db);
        // Keep the argument of r strictly inside the band after rounding.
        let guard = 8.0 * f64::EPSILON * bd.a.abs().max(bd.b.abs()).max(1.0);
        let s_eval = s.clamp(bd.a + guard, bd.b - guard);
        match bd.weight {
            Weight::LogOneMinus => {
                // Near the branch point e, 1 - |r|^2 vanishes like sqrt(s - e).
                // Inside LOG_FLOOR of e the value at the floor is rescaled, since
                // numerically integrated r loses the cancellation there.
                let (e, delta) = if bd.sing_a { (bd.a, da) } else { (bd.b, db) };
                let floor = LOG_FLOOR * (bd.b - bd.a);
                let s_r = if (s_eval - e).abs() < floor {
                    e + floor * (s_eval - e).signum()
                } else {
                    s_eval
                };
                let r = self.reflection.r(c64(s_r, 0.0), CutSide::Off)?;
                let m = 1.0 - r.norm_sqr();
                let mut l = m.ln();
                if m < 1e-3 {
                    l += 0.5 * (delta.ln() - (s_r - e).abs().ln());
                }
                Ok(c64(l, 0.0) / x)
            }
            Weight::LogRPlus => Ok(self.log_r_plus(bd, s_eval)? / x),
        }
    }

    /// Weight at a point given only by its coordinate.
    fn weight_at(&self, bd: &Band, s: f64) -> Result<C64> {
        self.weight(bd, s, s - bd.a, bd.b - s)
    }

    fn spec_for(&self, bd: &Band) -> QuadratureSpec {
        let e = if bd.sing_a || bd.sing_b {
            EndpointSingularity::InverseSqrt
        } else {
            EndpointSingularity::None
        };
        self.quadrature.with_singularity(e)
    }

    /// Integrates g(w(s), s) over a band, forwarding the first weight error.
    fn integrate_band<G: Fn(C64, f64) -> C64>(
        &self,
        bd: &Band,
        g: G,
        breaks: &[f64],
    ) -> Result<C64> {
        let err = std::cell::Cell::new(None);
        let f = |s: f64, da: f64, db: f64| match self.weight(bd, s, da, db) {
            Ok(w) => g(w, s),
            Err(e) => {
                err.set(Some(e));
                C64::new(0.0, 0.0)
            }
        };
        let v = integrate_with_offsets(f, (bd.a, bd.b), &self.spec_for(bd), breaks);
        if let Some(e) = err.take() {
            return Err(e);
        }
        v
    }

    /// int_band w(s) ds.
    fn band_moment(&self, bd: &Band) -> Result<C64> {
        self.integrate_band(bd, |w, _| w, &[])
    }

    /// int_band w(s)/(s - k) ds, with k side-adjusted when it sits on the band.
    fn band_cauchy(&self, bd: &Band, k: C64) -> Result<C64> {
        let len = bd.b - bd.a;
        // Projection of k, kept off the endpoints where r may be undefined.
        let eps = 1e-12 * len;
        let s0 = k.re.clamp(bd.a + eps, bd.b - eps);
        let dist = (k - s0).norm();
        let admissible = !(k.re <= bd.a + eps && bd.sing_a) && !(k.re >= bd.b - eps && bd.sing_b);
        if admissible && dist < 0.5 * len {
            let w0 = self.weight_at(bd, s0)?;
            let rest = self.integrate_band(
                bd,
                |w, s| {
                    if s == s0 && k.im == 0.0 {
                        C64::new(0.0, 0.0)
                    } else {
                        (w - w0) / (s - k)
                    }
                },
                &[s0],
            )?;
            // Negating k.im keeps the sign of a zero imaginary part, which picks
            // the boundary value of the logarithm.
            let lb = c64(bd.b - k.re, -k.im).ln();
            let la = c64(bd.a - k.re, -k.im).ln();
            Ok(rest + w0 * (lb - la))
        } else {
            self.integrate_band(bd, |w, s| w / (s - k), &[k.re])
        }
    }

    /// V(e) with E(k) = V(e) + mu log(e - k) + o(1) as k -> e from above, for a
    /// regular band endpoint e, where mu = +-X(e) w(e)/(2 pi i) for a right
    /// (left) end.
    fn endpoint_regular_part(&self, e: f64) -> Result<C64> {
        let above = c64(e, 0.0);
        let x = sqrt_cut(above, self.cut, CutSide::Above)?;
        let mut sum = C64::new(0.0, 0.0);
        for bd in &self.bands {
            let right = e == bd.b && !bd.sing_b;
            let left = e == bd.a && !bd.sing_a;
            if !(right || left) {
                sum += self.band_cauchy(bd, above)?;
                continue;
            }
            let eps = 1e-12 * (bd.b - bd.a);
            let we = self.weight_at(bd, if right { e - eps } else { e + eps })?;
            sum += self.integrate_band(bd, |w, s| (w - we) / (s - e), &[])?;
            sum += if right {
                -we * c64(bd.a - e, -0.0).ln()
            } else {
                we * (bd.b - e).ln()
            };
        }
        Ok(x * sum / (2.0 * PI * I))
    }

    /// True when a real k lies on an integration band or on the prefactor's cut.
    fn needs_side(&self, k: C64) -> bool {
        k.im == 0.0
            && (k.re.abs() < self.cut || self.bands.iter().any(|b| k.re > b.a && k.re < b.b))
    }

    /// Exponent E(k) with D = e^E.
    pub fn log_d(&self, k: C64, side: CutSide) -> Result<C64> {
        check_finite(k, "spectral parameter")?;
        if self.needs_side(k) && side == CutSide::Off {
            return Err(Error::SideRequired(k.re));
        }
        for bd in &self.bands {
            for e in [bd.a, bd.b] {
                if k.im == 0.0 && k.re == e {
                    return Err(Error::BranchPoint(e));
                }
            }
        }
        let kk = if k.im == 0.0 { side.nudge(k) } else { k };
        let x = sqrt_cut(kk, self.cut, if k.im == 0.0 { side } else { CutSide::Off })?;
        let mut sum = C64::new(0.0, 0.0);
        for bd in &self.bands {
            sum += self.band_cauchy(bd, kk)?;
        }
        Ok(x * sum / (2.0 * PI * I))
    }
}

/// Quadrature settings used when none are supplied.
pub fn default_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        tolerance: D_QUADRATURE_TOL,
        ..QuadratureSpec::default()
    }
}

fn band(a: f64, b: f64, weight: Weight, sing_a: bool, sing_b: bool) -> Band {
    Band {
        a,
        b,
        weight,
        sing_a,
        sing_b,
        track: None,
    }
}

/// D(xi; k); `side` selects the boundary value on a band or on the cut of X.
pub fn d_eval(ctx: &DContext, k: C64, side: CutSide) -> Result<C64> {
    Ok(ctx.log_d(k, side)?.exp())
}

/// D_inf(xi) = exp{ -1/(2 pi i) sum_bands int w(s) ds }.
pub fn d_infinity(ctx: &DContext) -> Result<C64> {
    let mut sum = C64::new(0.0, 0.0);
    for bd in &ctx.bands {
        sum += ctx.band_moment(bd)?;
    }
    Ok((-sum / (2.0 * PI * I)).exp())
}

/// nu(k) = -(1/2 pi) log(1 - |r(k)|^2) for real k off the cuts.
pub fn nu(reflection: &dyn ReflectionSource, k: f64) -> Result<f64> {
    let r = reflection.r(c64(k, 0.0), CutSide::Off)?;
    let m = 1.0 - r.norm_sqr();
    if !(m > 0.0) {
        return Err(Error::Degenerate("|r| >= 1 where nu is required"));
    }
    Ok(-m.ln() / (2.0 * PI))
}

/// Endpoint constants attached to the region's stationary points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitConstants {
    /// Region I: D_b(eta), D_b(-eta) and nu(eta), nu(-eta).
    RegionI {
        db_plus: C64,
        db_minus: C64,
        nu_plus: f64,
        nu_minus: f64,
    },
    /// Region II: D_0.
    RegionII { d0: C64 },
}

/// Two-level Richardson table along a geometric ray with ratio 10 and error
/// model rho^order; errors when the two extrapolants disagree.
pub fn ray_extrapolate<F: Fn(f64) -> Result<C64>>(f: F, at: f64, order: f64) -> Result<C64> {
    let v: Vec<C64> = RAY_RADII.iter().map(|&r| f(r)).collect::<Result<_>>()?;
    let q = 10f64.powf(order);
    let rich = |coarse: C64, fine: C64| (fine * q - coarse) / (q - 1.0);
    let e1 = rich(v[0], v[1]);
    let e2 = rich(v[1], v[2]);
    if !(e2.re.is_finite() && e2.im.is_finite())
        || (e1 - e2).norm() > EXTRAPOLATION_TOL * e2.norm().max(1.0)
    {
        return Err(Error::Extrapolation(at));
    }
    Ok(e2)
}

/// Regularized endpoint limits.
///
/// Region I: D_b(eta) = lim D(k)(k - eta)^{-i nu(eta)} and
/// D_b(-eta) = lim D(k)(-(k + eta))^{i nu(-eta)}, both from the upper half plane.
/// D behaves like (-(k + eta))^{-i nu} at -eta, since D(-k) = 1/D(k). The limits
/// are evaluated in closed form by splitting the endpoint logarithm off the
/// Cauchy integral; `ray_values` gives the ray approach for cross-checks.
///
/// Region II: D_0 = lim (k - eta)^{-1/4} D(k) by ray extrapolation. D is
/// bounded at eta, so this limit does not exist and an Extrapolation error is
/// returned; `d_eta_limit` gives the bounded limit of D itself.
pub fn d_limit_constants(ctx: &DContext) -> Result<LimitConstants> {
    let eta = ctx.eta;
    match ctx.region {
        Region::I => {
            let src = ctx.reflection.as_ref();
            let (nu_p, nu_m) = (nu(src, eta)?, nu(src, -eta)?);
            let db_plus = (ctx.endpoint_regular_part(eta)? + PI * nu_p).exp();
            let db_minus = ctx.endpoint_regular_part(-eta)?.exp();
            Ok(LimitConstants::RegionI {
                db_plus,
                db_minus,
                nu_plus: nu_p,
                nu_minus: nu_m,
            })
        }
        _ => {
            let up = C64::from_polar(1.0, PI / 4.0);
            let d0 = ray_extrapolate(
                |rho| {
                    let k = eta + up * rho;
                    Ok((ctx.log_d(k, CutSide::Off)? - 0.25 * (k - eta).ln()).exp())
                },
                eta,
                1.0,
            )?;
            Ok(LimitConstants::RegionII { d0 })
        }
    }
}

/// Region I ray approach: D(k)(k - eta)^{-i nu} on k = eta + rho e^{i pi/4} and
/// D(k)(-(k + eta))^{i nu} on k = -eta + rho e^{3i pi/4}, for each rho.
pub fn ray_values(ctx: &DContext, radii: &[f64]) -> Result<Vec<(C64, C64)>> {
    if ctx.region != Region::I {
        return Err(Error::Region(ctx.region.label().into()));
    }
    let eta = ctx.eta;
    let src = ctx.reflection.as_ref();
    let (nu_p, nu_m) = (nu(src, eta)?, nu(src, -eta)?);
    let up = C64::from_polar(1.0, PI / 4.0);
    let mirror = C64::from_polar(1.0, 3.0 * PI / 4.0);
    radii
        .iter()
        .map(|&rho| {
            let k = eta + up * rho;
            let p = (ctx.log_d(k, CutSide::Off)? - I * nu_p * (k - eta).ln()).exp();
            let k = -eta + mirror * rho;
            let m = (ctx.log_d(k, CutSide::Off)? + I * nu_m * (-(k + eta)).ln()).exp();
            Ok((p, m))
        })
        .collect()
}

/// Bounded limit of D(k) as k -> eta in region II: exp(log r_+(eta)/2) on the
/// tracked branch. Off-axis values approach it like sqrt(k - eta).
pub fn d_eta_limit(ctx: &DContext) -> Result<C64> {
    if ctx.region != Region::II {
        return Err(Error::Region(ctx.region.label().into()));
    }
    Ok((tracked_log_r_plus(ctx, ctx.eta)? * 0.5).exp())
}

/// Continuous log r_+ at a band point, on the branch used inside D.
pub fn tracked_log_r_plus(ctx: &DContext, s: f64) -> Result<C64> {
    let bd = ctx
        .bands
        .iter()
        .find(|b| b.weight == Weight::LogRPlus && s >= b.a && s <= b.b)
        .ok_or_else(|| Error::InvalidParams(format!("{s} is not on a log r_+ band")))?;
    ctx.log_r_plus(bd, s)
}
