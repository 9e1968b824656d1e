//! Forward scattering for step-like data.
//!
//! Jost columns are integrated in the factored form m = (Phi^p)^{-1} Phi, which
//! obeys m' = e^{iXx s3} (q - c) Delta^{-1} s1 Delta e^{-iXx s3} m with m = I at
//! the truncation point. Boundary values on a cut are evaluated directly with
//! the side-tagged branches of X and chi.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ode::{integrate, OdeTol};
use crate::numerics::{chi, sqrt_cut};
use crate::types::{c64, check_finite, CutSide, Matrix2C, Profile, StepParams, C64};

/// Which spatial infinity a Jost solution is normalized at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JostSide {
    Left,
    Right,
}

/// Jost matrix at a point x together with its normalization side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JostMatrix {
    pub value: Matrix2C,
    pub side: JostSide,
}

/// Scattering coefficients at one spectral sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringData {
    pub k: C64,
    pub side: CutSide,
    pub a: C64,
    pub b: C64,
    pub r: C64,
}

/// Integration controls for the Jost solutions.
#[derive(Debug, Clone, Copy)]
pub struct JostOptions {
    /// Common point where the determinant formulas are evaluated.
    pub x_eval: f64,
    pub ode: OdeTol,
    /// Neglected tail mass for non-compact profiles.
    pub tail_tol: f64,
}

impl Default for JostOptions {
    fn default() -> Self {
        JostOptions {
            x_eval: 0.0,
            ode: OdeTol::default(),
            tail_tol: 1e-14,
        }
    }
}

/// X(k) = sqrt(k^2 - c^2) with cut [-c, c] and X ~ k at infinity.
pub fn x_branch(k: C64, c: f64, side: CutSide) -> Result<C64> {
    sqrt_cut(k, c, side)
}

/// Omega(k) = 2 (2k^2 + c^2) X(k).
pub fn omega_branch(k: C64, c: f64, side: CutSide) -> Result<C64> {
    Ok((k * k * 2.0 + c * c) * 2.0 * x_branch(k, c, side)?)
}

/// Delta(k) built from chi(k) for background level c.
pub fn delta_matrix(k: C64, c: f64, side: CutSide) -> Result<Matrix2C> {
    let x = chi(k, c, side)?;
    let xi = x.inv();
    let p = (x + xi) * 0.5;
    let m = (x - xi) * 0.5;
    let i = c64(0.0, 1.0);
    Ok(Matrix2C::new(p, i * m, -i * m, p))
}

/// Background solution Delta(k) e^{-i(X x + Omega t) s3} for constant potential c.
pub fn background_solution(x: f64, t: f64, k: C64, c: f64, side: CutSide) -> Result<Matrix2C> {
    check_finite(k, "spectral parameter")?;
    let d = delta_matrix(k, c, side)?;
    let ph = c64(0.0, -1.0) * (x_branch(k, c, side)? * x + omega_branch(k, c, side)? * t);
    Ok(d * Matrix2C::diag(ph.exp(), (-ph).exp()))
}

/// Background level for a Jost side.
fn level(params: &StepParams, which: JostSide) -> f64 {
    match which {
        JostSide::Left => params.c_l,
        JostSide::Right => params.c_r,
    }
}

/// Exponential growth rate that the kernel must beat for this column.
fn bad_rate(xk: C64, which: JostSide, col: usize) -> f64 {
    let s = match (which, col) {
        (JostSide::Left, 0) | (JostSide::Right, 1) => -xk.im,
        _ => xk.im,
    };
    2.0 * s.max(0.0)
}

/// Point where integration starts: edge of the support, or a radius past which
/// the neglected tail is below `tail_tol`.
fn start_point(
    params: &StepParams,
    which: JostSide,
    xk: C64,
    col: usize,
    tail_tol: f64,
) -> Result<f64> {
    let reach = match params.profile {
        Profile::Tanh { .. } => {
            let decay = params.decay_rate().unwrap_or(0.0);
            let rate = decay - bad_rate(xk, which, col);
            if rate <= 0.05 * decay {
                return Err(Error::Truncation(format!(
                    "tail decay {decay} does not dominate column growth {} at this k",
                    bad_rate(xk, which, col)
                )));
            }
            let amp = (params.c_l - params.c_r).max(f64::MIN_POSITIVE);
            (amp / (rate * tail_tol)).ln().max(0.0) / rate
        }
        _ => params.support_radius().unwrap_or(0.0),
    };
    Ok(match which {
        JostSide::Left => -reach,
        JostSide::Right => reach,
    })
}

/// Column `col` of the normalized factor m at x, integrated from the truncation point.
fn m_column(
    params: &StepParams,
    x: f64,
    k: C64,
    side: CutSide,
    which: JostSide,
    col: usize,
    opts: &JostOptions,
) -> Result<[C64; 2]> {
    let c = level(params, which);
    let xk = x_branch(k, c, side)?;
    let d = delta_matrix(k, c, side)?;
    let w = d.inverse() * Matrix2C::sigma1() * d;
    let start = start_point(params, which, xk, col, opts.tail_tol)?;
    let mut y = [c64(0.0, 0.0); 2];
    y[col] = c64(1.0, 0.0);
    let inside = match which {
        JostSide::Left => x > start,
        JostSide::Right => x < start,
    };
    if !inside {
        return Ok(y);
    }
    let dev = |s: f64| match which {
        JostSide::Left => params.dev_left(s),
        JostSide::Right => params.dev_right(s),
    };
    let two_ix = c64(0.0, 2.0) * xk;
    let rhs = |s: f64, m: &[C64; 2]| -> [C64; 2] {
        let q = dev(s);
        if q == 0.0 {
            return [c64(0.0, 0.0); 2];
        }
        // (q - c) e^{+-2iXs} combined in the exponent to avoid overflow.
        let lq = c64(
            q.abs().ln(),
            if q < 0.0 { std::f64::consts::PI } else { 0.0 },
        );
        let up = (lq + two_ix * s).exp();
        let dn = (lq - two_ix * s).exp();
        [
            w.0[0][0] * q * m[0] + w.0[0][1] * up * m[1],
            w.0[1][0] * dn * m[0] + w.0[1][1] * q * m[1],
        ]
    };
    let mut pts = vec![start];
    let (lo, hi) = if start < x { (start, x) } else { (x, start) };
    let mut brk: Vec<f64> = params
        .breakpoints()
        .into_iter()
        .filter(|&b| b > lo && b < hi)
        .collect();
    brk.sort_by(|a, b| a.total_cmp(b));
    if start > x {
        brk.reverse();
    }
    pts.extend(brk);
    pts.push(x);
    for seg in pts.windows(2) {
        y = integrate(rhs, seg[0], seg[1], y, opts.ode)?;
    }
    Ok(y)
}

/// Column `col` (0 or 1) of the Jost solution at x.
pub fn jost_column(
    params: &StepParams,
    x: f64,
    k: C64,
    side: CutSide,
    which: JostSide,
    col: usize,
    opts: &JostOptions,
) -> Result<[C64; 2]> {
    check_finite(k, "spectral parameter")?;
    if col > 1 {
        return Err(Error::InvalidParams(format!(
            "column index {col} out of range"
        )));
    }
    let m = m_column(params, x, k, side, which, col, opts)?;
    let p = background_solution(x, 0.0, k, level(params, which), side)?;
    let v = [
        p.0[0][0] * m[0] + p.0[0][1] * m[1],
        p.0[1][0] * m[0] + p.0[1][1] * m[1],
    ];
    if !(v[0].re.is_finite() && v[0].im.is_finite() && v[1].re.is_finite() && v[1].im.is_finite()) {
        return Err(Error::Stiffness("Jost column overflowed".into()));
    }
    Ok(v)
}

/// Full Jost matrix at x. Both columns must be computable at k.
pub fn jost_solution(
    params: &StepParams,
    x: f64,
    k: C64,
    side: CutSide,
    which: JostSide,
) -> Result<JostMatrix> {
    jost_solution_with(params, x, k, side, which, &JostOptions::default())
}

/// `jost_solution` with explicit integration controls.
pub fn jost_solution_with(
    params: &StepParams,
    x: f64,
    k: C64,
    side: CutSide,
    which: JostSide,
    opts: &JostOptions,
) -> Result<JostMatrix> {
    let c0 = jost_column(params, x, k, side, which, 0, opts)?;
    let c1 = jost_column(params, x, k, side, which, 1, opts)?;
    Ok(JostMatrix {
        value: Matrix2C::from_cols(c0, c1),
        side: which,
    })
}

fn det2(u: [C64; 2], v: [C64; 2]) -> C64 {
    u[0] * v[1] - u[1] * v[0]
}

/// a, b and r at k via the determinant formulas, default controls.
pub fn scattering_coefficients(
    params: &StepParams,
    k: C64,
    side: CutSide,
) -> Result<ScatteringData> {
    scattering_coefficients_with(params, k, side, &JostOptions::default())
}

/// a, b and r at k via the determinant formulas at `opts.x_eval`.
pub fn scattering_coefficients_with(
    params: &StepParams,
    k: C64,
    side: CutSide,
    opts: &JostOptions,
) -> Result<ScatteringData> {
    params.validate()?;
    let x = opts.x_eval;
    let l1 = jost_column(params, x, k, side, JostSide::Left, 0, opts)?;
    let r1 = jost_column(params, x, k, side, JostSide::Right, 0, opts)?;
    let r2 = jost_column(params, x, k, side, JostSide::Right, 1, opts)?;
    let a = det2(l1, r2);
    let b = det2(r1, l1);
    if a.norm() < 1e-12 {
        return Err(Error::ZeroDivisor(format!("{k}")));
    }
    Ok(ScatteringData {
        k,
        side,
        a,
        b,
        r: b / a,
    })
}

/// Closed-form a and b for the pure step: a = (rho + 1/rho)/2, b = i (rho - 1/rho)/2
/// with rho = chi_r / chi_l.
pub fn pure_step_coefficients(c_l: f64, c_r: f64, k: C64, side: CutSide) -> Result<(C64, C64)> {
    check_finite(k, "spectral parameter")?;
    let rho = chi(k, c_r, side)? / chi(k, c_l, side)?;
    let ri = rho.inv();
    Ok(((rho + ri) * 0.5, c64(0.0, 0.5) * (rho - ri)))
}

/// Closed-form reflection coefficient of the pure step.
pub fn pure_step_reflection(c_l: f64, c_r: f64, k: C64, side: CutSide) -> Result<C64> {
    let rho = chi(k, c_r, side)? / chi(k, c_l, side)?;
    let ri = rho.inv();
    Ok(c64(0.0, 1.0) * (rho - ri) / (rho + ri))
}

/// Time evolution of b and r at x = 0: the factor e^{2it theta(0; k)} = e^{8ik^3 t}
/// carried by the jump matrix of the Riemann-Hilbert problem.
pub fn evolve_coefficient(b0: C64, k: C64, t: f64) -> C64 {
    b0 * (c64(0.0, 2.0 * t) * crate::phase::theta(0.0, k)).exp()
}

/// Spectral data provider consumed by the D-function and asymptotic formulas.
pub trait ReflectionSource: Send + Sync {
    /// Reflection coefficient (boundary value when `side` is above or below).
    fn r(&self, k: C64, side: CutSide) -> Result<C64>;

    /// Full scattering data; sources that only know r report an error.
    fn data(&self, k: C64, side: CutSide) -> Result<ScatteringData> {
        let _ = (k, side);
        Err(Error::InvalidParams(
            "reflection source provides r only".into(),
        ))
    }

    /// Whole scattering matrix S = Phi_r^{-1} Phi_l, when available.
    fn matrix(&self, k: C64, side: CutSide) -> Result<Matrix2C> {
        let _ = (k, side);
        Err(Error::InvalidParams(
            "reflection source provides r only".into(),
        ))
    }
}

/// Closed-form pure-step data.
#[derive(Debug, Clone, Copy)]
pub struct PureStepSource {
    pub c_l: f64,
    pub c_r: f64,
}

impl ReflectionSource for PureStepSource {
    fn r(&self, k: C64, side: CutSide) -> Result<C64> {
        pure_step_reflection(self.c_l, self.c_r, k, side)
    }

    fn data(&self, k: C64, side: CutSide) -> Result<ScatteringData> {
        let (a, b) = pure_step_coefficients(self.c_l, self.c_r, k, side)?;
        Ok(ScatteringData {
            k,
            side,
            a,
            b,
            r: b / a,
        })
    }

    fn matrix(&self, k: C64, side: CutSide) -> Result<Matrix2C> {
        Ok(delta_matrix(k, self.c_r, side)?.inverse() * delta_matrix(k, self.c_l, side)?)
    }
}

/// Data from integrating the Jost solutions for an arbitrary profile.
#[derive(Debug, Clone)]
pub struct NumericalSource {
    pub params: StepParams,
    pub opts: JostOptions,
}

impl NumericalSource {
    pub fn new(params: StepParams) -> Self {
        NumericalSource {
            params,
            opts: JostOptions::default(),
        }
    }
}

impl ReflectionSource for NumericalSource {
    fn r(&self, k: C64, side: CutSide) -> Result<C64> {
        Ok(self.data(k, side)?.r)
    }

    fn data(&self, k: C64, side: CutSide) -> Result<ScatteringData> {
        scattering_coefficients_with(&self.params, k, side, &self.opts)
    }

    fn matrix(&self, k: C64, side: CutSide) -> Result<Matrix2C> {
        scattering_matrix(&self.params, k, side, &self.opts)
    }
}

/// S = Phi_r^{-1} Phi_l at `opts.x_eval`; needs all four Jost columns.
pub fn scattering_matrix(
    params: &StepParams,
    k: C64,
    side: CutSide,
    opts: &JostOptions,
) -> Result<Matrix2C> {
    let l = jost_solution_with(params, opts.x_eval, k, side, JostSide::Left, opts)?;
    let r = jost_solution_with(params, opts.x_eval, k, side, JostSide::Right, opts)?;
    Ok(r.value.inverse() * l.value)
}

/// Wraps a closure k, side -> r.
pub struct FnSource<F>(pub F);

impl<F> ReflectionSource for FnSource<F>
where
    F: Fn(C64, CutSide) -> Result<C64> + Send + Sync,
{
    fn r(&self, k: C64, side: CutSide) -> Result<C64> {
        (self.0)(k, side)
    }
}

/// Closed form for the pure step, numerical integration otherwise.
pub fn reflection_source(params: &StepParams) -> Box<dyn ReflectionSource> {
    match params.profile {
        Profile::PureStep => Box::new(PureStepSource {
            c_l: params.c_l,
            c_r: params.c_r,
        }),
        _ => Box::new(NumericalSource::new(*params)),
    }
}

/// Boundary value lim f(k +- i eps) by two-point Richardson extrapolation
/// in eps. Used to cross-check the side-tagged evaluation.
pub fn richardson_boundary_value<F>(f: F, k: f64, side: CutSide, eps: f64) -> Result<C64>
where
    F: Fn(C64) -> Result<C64>,
{
    let s = match side {
        CutSide::Above => 1.0,
        CutSide::Below => -1.0,
        CutSide::Off => return f(c64(k, 0.0)),
    };
    let f1 = f(c64(k, s * eps))?;
    let f2 = f(c64(k, s * eps * 0.5))?;
    Ok(f2 * 2.0 - f1)
}

/// Maximum residuals of the scattering jump relations on a real grid.
///
/// Starred quantities follow f*(k) = conj f(conj k), so f*_-(k) = conj f_+(k).
/// Matrix relations are checked only where all Jost columns are computable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpReport {
    pub points_inner: usize,
    pub points_band: usize,
    pub points_outer: usize,
    pub points_skipped: usize,
    pub matrix_points: usize,
    /// |r_+ + r*_-| on (-c_r, c_r).
    pub inner_r: f64,
    /// |a_+ - a*_-| on (-c_r, c_r).
    pub inner_a: f64,
    /// |b_+ + b*_-| on (-c_r, c_r).
    pub inner_b: f64,
    /// |r_+ r*_- - 1| on the side bands.
    pub band_r: f64,
    /// max ||r_+-| - 1| on the side bands.
    pub band_modulus: f64,
    /// max(|a_+ - b*_-|, |b_+ - a*_-|) on the side bands.
    pub band_ab: f64,
    /// |r_+ - r_-| outside [-c_l, c_l].
    pub outer_r: f64,
    /// max |r| outside [-c_l, c_l]; stays below 1.
    pub max_abs_r_outer: f64,
    /// max |r_+| on (-c_r, c_r); diagnostic, not bounded by 1 in general.
    pub max_abs_r_inner: f64,
    /// |r(-k) - conj r(k)|.
    pub symmetry: f64,
    /// |det S_+ - 1|.
    pub det_s: f64,
    /// Norm of S_+ minus the jump-transported S_- on each interval.
    pub matrix_jump: f64,
    /// Norm of S_- - s1 conj(S_+) s1.
    pub matrix_schwarz: f64,
}

impl JumpReport {
    /// Largest residual among the relations that should vanish.
    pub fn max_residual(&self) -> f64 {
        [
            self.inner_r,
            self.inner_a,
            self.inner_b,
            self.band_r,
            self.band_modulus,
            self.band_ab,
            self.outer_r,
            self.symmetry,
            self.det_s,
            self.matrix_jump,
            self.matrix_schwarz,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn absorb(&mut self, p: &PointResiduals) {
        match p.zone {
            Zone::Inner => self.points_inner += 1,
            Zone::Band => self.points_band += 1,
            Zone::Outer => self.points_outer += 1,
        }
        if p.matrix {
            self.matrix_points += 1;
        }
        let o = &p.rep;
        self.inner_r = self.inner_r.max(o.inner_r);
        self.inner_a = self.inner_a.max(o.inner_a);
        self.inner_b = self.inner_b.max(o.inner_b);
        self.band_r = self.band_r.max(o.band_r);
        self.band_modulus = self.band_modulus.max(o.band_modulus);
        self.band_ab = self.band_ab.max(o.band_ab);
        self.outer_r = self.outer_r.max(o.outer_r);
        self.max_abs_r_outer = self.max_abs_r_outer.max(o.max_abs_r_outer);
        self.max_abs_r_inner = self.max_abs_r_inner.max(o.max_abs_r_inner);
        self.symmetry = self.symmetry.max(o.symmetry);
        self.det_s = self.det_s.max(o.det_s);
        self.matrix_jump = self.matrix_jump.max(o.matrix_jump);
        self.matrix_schwarz = self.matrix_schwarz.max(o.matrix_schwarz);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Zone {
    Inner,
    Band,
    Outer,
}

struct PointResiduals {
    zone: Zone,
    matrix: bool,
    rep: JumpReport,
}

fn point_residuals(
    src: &dyn ReflectionSource,
    c_l: f64,
    c_r: f64,
    k: f64,
) -> Result<PointResiduals> {
    let kp = c64(k, 0.0);
    let up = src.data(kp, CutSide::Above)?;
    let mirror = src.data(c64(-k, 0.0), CutSide::Above)?;
    let mut o = JumpReport {
        symmetry: (mirror.r - up.r.conj()).norm(),
        ..Default::default()
    };
    let ak = k.abs();
    let zone = if ak < c_r {
        Zone::Inner
    } else if ak < c_l {
        Zone::Band
    } else {
        Zone::Outer
    };
    match zone {
        Zone::Inner => {
            o.inner_r = (up.r + up.r.conj()).norm();
            o.inner_a = (up.a - up.a.conj()).norm();
            o.inner_b = (up.b + up.b.conj()).norm();
            o.max_abs_r_inner = up.r.norm();
        }
        Zone::Band => {
            o.band_r = (up.r * up.r.conj() - 1.0).norm();
            o.band_modulus = (up.r.norm() - 1.0).abs();
            o.band_ab = (up.a - up.b.conj()).norm();
            if let Ok(dn) = src.data(kp, CutSide::Below) {
                o.band_modulus = o.band_modulus.max((dn.r.norm() - 1.0).abs());
            }
        }
        Zone::Outer => {
            let dn = src.data(kp, CutSide::Below)?;
            o.outer_r = (up.r - dn.r).norm();
            o.max_abs_r_outer = up.r.norm();
        }
    }
    let mut matrix = false;
    if let (Ok(sp), Ok(sm)) = (
        src.matrix(kp, CutSide::Above),
        src.matrix(kp, CutSide::Below),
    ) {
        matrix = true;
        let j = Matrix2C::new(c64(0.0, 0.0), c64(-1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0));
        let transported = match zone {
            Zone::Inner => j.inverse() * sm * j,
            Zone::Band => sm * j,
            Zone::Outer => sm,
        };
        o.matrix_jump = (sp - transported).max_abs();
        let s1 = Matrix2C::sigma1();
        o.matrix_schwarz = (sm - s1 * sp.conj() * s1).max_abs();
        o.det_s = (sp.det() - 1.0).norm();
    } else {
        // Only the analytic columns are available: det S = a a* - b b* with
        // a*, b* the entries of the reflected matrix.
        let dn = src.data(kp, CutSide::Below);
        if let (Zone::Outer, Ok(dn)) = (zone, dn) {
            o.det_s = (up.a * dn.a.conj() - up.b * dn.b.conj() - 1.0).norm();
        }
    }
    Ok(PointResiduals {
        zone,
        matrix,
        rep: o,
    })
}

/// Jump-relation report for the spectral data of `params` on a real grid.
/// Points within 1e-3 of a branch point, and points where a needed Jost
/// column cannot be normalized (truncation failure), are skipped.
pub fn verify_r_jumps(params: &StepParams, grid: &[f64]) -> Result<JumpReport> {
    params.validate()?;
    let src = reflection_source(params);
    verify_r_jumps_with(src.as_ref(), params.c_l, params.c_r, grid)
}

/// `verify_r_jumps` for an explicit data source.
pub fn verify_r_jumps_with(
    src: &dyn ReflectionSource,
    c_l: f64,
    c_r: f64,
    grid: &[f64],
) -> Result<JumpReport> {
    let near = |k: f64| [c_l, c_r].iter().any(|&c| (k.abs() - c).abs() < 1e-3);
    let pts: Vec<f64> = grid.iter().copied().filter(|&k| !near(k)).collect();
    let res: Vec<Option<PointResiduals>> = pts
        .par_iter()
        .map(|&k| match point_residuals(src, c_l, c_r, k) {
            Ok(p) => Ok(Some(p)),
            Err(Error::Truncation(_)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let mut rep = JumpReport {
        points_skipped: grid.len() - pts.len(),
        ..Default::default()
    };
    for p in &res {
        match p {
            Some(p) => rep.absorb(p),
            None => rep.points_skipped += 1,
        }
    }
    Ok(rep)
}

/// Scattering data over a list of spectral samples, computed in parallel.
pub fn scattering_sweep(
    src: &dyn ReflectionSource,
    samples: &[(C64, CutSide)],
) -> Vec<Result<ScatteringData>> {
    samples.par_iter().map(|&(k, s)| src.data(k, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step() -> StepParams {
        StepParams::pure(2.0, 1.0).unwrap()
    }

    #[test]
    fn closed_form_reference_values() {
        let (a, b) = pure_step_coefficients(2.0, 1.0, c64(3.0, 0.0), CutSide::Off).unwrap();
        assert!((a - c64(1.026_352_079_224_993, 0.0)).norm() < 1e-12);
        assert!((b - c64(0.0, 0.231_081_350_457_942_4)).norm() < 1e-12);
        let r = pure_step_reflection(2.0, 1.0, c64(3.0, 0.0), CutSide::Off).unwrap();
        assert!((r - c64(0.0, 0.225_148_226_554_413_86)).norm() < 1e-12);
        let r = pure_step_reflection(2.0, 1.0, c64(5f64.sqrt(), 0.0), CutSide::Off).unwrap();
        assert!((r - c64(0.0, 0.447_213_595_499_957_94)).norm() < 1e-12);
        assert!((r.norm_sqr() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_matrix_product() {
        for &(k, s) in &[
            (c64(3.0, 0.0), CutSide::Off),
            (c64(0.4, 0.0), CutSide::Above),
            (c64(1.5, 0.7), CutSide::Off),
        ] {
            let sm = delta_matrix(k, 1.0, s).unwrap().inverse() * delta_matrix(k, 2.0, s).unwrap();
            let (a, b) = pure_step_coefficients(2.0, 1.0, k, s).unwrap();
            assert!((sm.get(0, 0) - a).norm() < 1e-13);
            assert!((sm.get(1, 0) - b).norm() < 1e-13);
        }
    }

    #[test]
    fn background_properties() {
        let p = background_solution(0.0, 0.0, c64(3.0, 0.0), 2.0, CutSide::Off).unwrap();
        assert!((p - delta_matrix(c64(3.0, 0.0), 2.0, CutSide::Off).unwrap()).max_abs() < 1e-15);
        let p = background_solution(1.3, 0.7, c64(3.0, 0.0), 2.0, CutSide::Off).unwrap();
        assert!((p.det() - 1.0).norm() < 1e-12);
        assert_eq!(
            background_solution(0.0, 0.0, c64(2.0, 0.0), 2.0, CutSide::Off),
            Err(Error::BranchPoint(2.0))
        );
    }

    #[test]
    fn background_lax_x_residual() {
        let k = c64(2.5, 0.3);
        let c = 1.0;
        let h = 1e-4;
        let x = 0.4;
        let f = |x: f64| background_solution(x, 0.0, k, c, CutSide::Off).unwrap();
        let dx = (f(x + h) - f(x - h)).scale(c64(0.5 / h, 0.0));
        let q = Matrix2C::sigma1().scale(c64(c, 0.0));
        let res = dx + (Matrix2C::sigma3() * f(x)).scale(c64(0.0, 1.0) * k) - q * f(x);
        assert!(res.max_abs() < 1e-7, "{}", res.max_abs());
    }

    #[test]
    fn background_lax_t_residual() {
        // V = 4k^2 Q + 2ik s3 (Qx - Q^2) + 2Q^3 - Qxx with Q = c s1.
        let k = c64(1.7, -0.4);
        let c = 0.8;
        let h = 1e-5;
        let f = |t: f64| background_solution(0.3, t, k, c, CutSide::Off).unwrap();
        let dt = (f(h) - f(-h)).scale(c64(0.5 / h, 0.0));
        let q = Matrix2C::sigma1().scale(c64(c, 0.0));
        let i = c64(0.0, 1.0);
        let v = q.scale(k * k * 4.0) - (Matrix2C::sigma3() * q * q).scale(i * k * 2.0)
            + (q * q * q).scale(c64(2.0, 0.0));
        let res = dt + (Matrix2C::sigma3() * f(0.0)).scale(i * k * k * k * 4.0) - v * f(0.0);
        assert!(res.max_abs() < 1e-4 * f(0.0).max_abs(), "{}", res.max_abs());
    }

    #[test]
    fn pure_step_jost_is_background() {
        let p = step();
        let k = c64(3.0, 0.0);
        let j = jost_solution(&p, -1.5, k, CutSide::Off, JostSide::Left).unwrap();
        let b = background_solution(-1.5, 0.0, k, 2.0, CutSide::Off).unwrap();
        assert!((j.value - b).max_abs() < 1e-15);
        let j = jost_solution(&p, 2.0, k, CutSide::Off, JostSide::Right).unwrap();
        let b = background_solution(2.0, 0.0, k, 1.0, CutSide::Off).unwrap();
        assert!((j.value - b).max_abs() < 1e-15);
    }

    #[test]
    fn tanh_jost_unimodular() {
        let p = StepParams::new(2.0, 1.0, Profile::Tanh { delta: 1.0 }).unwrap();
        for which in [JostSide::Left, JostSide::Right] {
            let j = jost_solution(&p, 0.0, c64(3.0, 0.0), CutSide::Off, which).unwrap();
            assert!((j.value.det() - 1.0).norm() < 1e-8);
        }
    }

    #[test]
    fn integrated_matches_closed_form() {
        let p = step();
        let opts = JostOptions {
            x_eval: 1.0,
            ..Default::default()
        };
        for &(k, s) in &[
            (3.0, CutSide::Off),
            (-2.7, CutSide::Off),
            (1.5, CutSide::Above),
            (1.5, CutSide::Below),
            (0.3, CutSide::Above),
            (-0.6, CutSide::Below),
        ] {
            let d = scattering_coefficients_with(&p, c64(k, 0.0), s, &opts).unwrap();
            let (a, b) = pure_step_coefficients(2.0, 1.0, c64(k, 0.0), s).unwrap();
            assert!((d.a - a).norm() < 1e-9, "k={k}");
            assert!((d.b - b).norm() < 1e-9, "k={k}");
        }
    }

    #[test]
    fn x_independence_bump() {
        let p = StepParams::new(
            2.0,
            1.0,
            Profile::Bump {
                amplitude: 0.3,
                radius: 2.0,
            },
        )
        .unwrap();
        let k = c64(2.6, 0.0);
        let base = scattering_coefficients(&p, k, CutSide::Off).unwrap();
        for x in [-5.0, 5.0] {
            let o = JostOptions {
                x_eval: x,
                ..Default::default()
            };
            let d = scattering_coefficients_with(&p, k, CutSide::Off, &o).unwrap();
            assert!((d.r - base.r).norm() < 1e-7);
            assert!((d.a - base.a).norm() < 1e-7);
        }
    }

    #[test]
    fn equal_steps_are_reflectionless() {
        let p = StepParams::pure(1.0, 1.0).unwrap();
        let d = scattering_coefficients(&p, c64(0.4, 0.0), CutSide::Above).unwrap();
        assert!(d.r.norm() < 1e-14 && (d.a - 1.0).norm() < 1e-14);
    }

    #[test]
    fn a_tends_to_one() {
        let opts = JostOptions {
            x_eval: 1.0,
            ..Default::default()
        };
        let d = scattering_coefficients_with(&step(), c64(1e3, 0.0), CutSide::Off, &opts).unwrap();
        assert!((d.a - 1.0).norm() < 1e-4);
        // Smoothed step: a - 1 decays like 1/k.
        let p = StepParams::new(2.0, 1.0, Profile::Tanh { delta: 1.0 }).unwrap();
        let s: Vec<f64> = [1e1, 1e2, 1e3]
            .iter()
            .map(|&k| {
                k * (scattering_coefficients(&p, c64(k, 0.0), CutSide::Off)
                    .unwrap()
                    .a
                    - 1.0)
                    .norm()
            })
            .collect();
        assert!(s.iter().all(|&v| v > 0.1 && v < 1.0), "{s:?}");
        assert!((s[2] - s[1]).abs() < 0.1 * (s[1] - s[0]).abs().max(1e-6) + 1e-4);
    }

    #[test]
    fn jump_report_pure_step() {
        let grid: Vec<f64> = (0..400)
            .map(|j| -3.0 + 6.0 * (j as f64 + 0.5) / 400.0)
            .collect();
        let rep = verify_r_jumps(&step(), &grid).unwrap();
        assert!(rep.max_residual() < 1e-10, "{rep:?}");
        assert!(rep.max_abs_r_outer < 1.0);
        assert_eq!(rep.matrix_points, 400);
        assert!(rep.points_inner > 0 && rep.points_band > 0 && rep.points_outer > 0);
    }

    #[test]
    fn jump_report_bump_numerical() {
        let p = StepParams::new(
            2.0,
            1.0,
            Profile::Bump {
                amplitude: 0.4,
                radius: 1.5,
            },
        )
        .unwrap();
        let grid: Vec<f64> = (0..60)
            .map(|j| -2.8 + 5.6 * (j as f64 + 0.5) / 60.0)
            .collect();
        let rep = verify_r_jumps(&p, &grid).unwrap();
        assert!(rep.max_residual() < 1e-8, "{rep:?}");
        assert_eq!(rep.matrix_points, 60);
    }

    #[test]
    fn jump_report_tanh_analytic_columns() {
        let p = StepParams::new(2.0, 1.0, Profile::Tanh { delta: 1.0 }).unwrap();
        let grid: Vec<f64> = (0..24)
            .map(|j| -2.9 + 5.8 * (j as f64 + 0.5) / 24.0)
            .collect();
        let rep = verify_r_jumps(&p, &grid).unwrap();
        assert!(rep.max_residual() < 1e-8, "{rep:?}");
    }

    #[test]
    fn richardson_agrees_with_side_tag() {
        let p = StepParams::new(
            2.0,
            1.0,
            Profile::Bump {
                amplitude: 0.3,
                radius: 1.0,
            },
        )
        .unwrap();
        let src = NumericalSource::new(p);
        for &(k, s) in &[(1.4, CutSide::Above), (0.5, CutSide::Below)] {
            let direct = src.r(c64(k, 0.0), s).unwrap();
            let rich = richardson_boundary_value(|z| src.r(z, CutSide::Off), k, s, 1e-4).unwrap();
            assert!((direct - rich).norm() < 1e-7, "k={k}: {direct} vs {rich}");
        }
    }

    #[test]
    fn fourth_root_blowup_bounded() {
        let mut prev = 0.0;
        for j in 2..7 {
            let d = 10f64.powi(-j);
            let (a, _) = pure_step_coefficients(2.0, 1.0, c64(2.0 + d, 0.0), CutSide::Off).unwrap();
            let s = a.norm() * d.powf(0.25);
            assert!(s < 2.0);
            prev = s;
        }
        assert!(prev > 0.1);
    }

    #[test]
    fn truncation_rejected_for_growing_column() {
        let p = StepParams::new(2.0, 1.0, Profile::Tanh { delta: 4.0 }).unwrap();
        // Left column 2 grows like e^{2 Im X x}; Im X = sqrt(3) beats 2/delta = 0.5.
        let e = jost_column(
            &p,
            0.0,
            c64(1.0, 0.0),
            CutSide::Above,
            JostSide::Left,
            1,
            &JostOptions::default(),
        );
        assert!(matches!(e, Err(Error::Truncation(_))));
    }

    #[test]
    fn time_evolution_factor() {
        let k = c64(1.3, 0.0);
        let b0 = c64(0.2, 0.1);
        let t = 2.0;
        let b = evolve_coefficient(b0, k, t);
        assert!((b.norm() - b0.norm()).abs() < 1e-15);
        // 2 t theta(xi; k) at x = 0 equals 8 k^3 t.
        let two_t_theta = 2.0 * t * crate::phase::theta(0.0 / (12.0 * t), k);
        assert!((two_t_theta - k * k * k * 8.0 * t).norm() < 1e-12);
        assert!((b - b0 * (c64(0.0, 8.0 * t) * k * k * k).exp()).norm() < 1e-14);
    }
}
