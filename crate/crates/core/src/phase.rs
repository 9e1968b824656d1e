//! Space-time regions, the phase theta and the region-dependent g-functions.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::sqrt_cut;
use crate::types::{check_finite, CutSide, StepParams, C64};

/// Default half-width in xi of the boundary bands between regions.
pub const DEFAULT_MARGIN: f64 = 1e-6;

/// Asymptotic region of the (x, t) half plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    I,
    II,
    III,
    IV,
    #[serde(rename = "boundary")]
    Boundary,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
            Region::Boundary => "boundary",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Region of a given xi = x / (12 t).
pub fn classify_xi(xi: f64, c_l: f64, c_r: f64, margin: f64) -> Region {
    let edges = [-c_l * c_l / 2.0, -c_r * c_r / 2.0, c_r * c_r / 2.0];
    if edges.iter().any(|&e| (xi - e).abs() <= margin) {
        return Region::Boundary;
    }
    if xi < edges[0] {
        Region::I
    } else if xi < edges[1] {
        Region::II
    } else if xi < edges[2] {
        Region::III
    } else {
        Region::IV
    }
}

/// Region of (x, t), t > 0.
pub fn classify(x: f64, t: f64, params: &StepParams, margin: f64) -> Result<Region> {
    if !(t > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParams(format!(
            "classify needs finite x and t > 0, got ({x}, {t})"
        )));
    }
    Ok(classify_xi(x / (12.0 * t), params.c_l, params.c_r, margin))
}

/// theta(xi; k) = 4k^3 + 12 k xi.
pub fn theta(xi: f64, k: C64) -> C64 {
    k * k * k * 4.0 + k * (12.0 * xi)
}

/// Region, xi, stationary point eta and background levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseContext {
    pub xi: f64,
    pub region: Region,
    /// Stationary point; zero in region IV where no g-function is used.
    pub eta: f64,
    pub c_l: f64,
    pub c_r: f64,
}

impl PhaseContext {
    /// Classifies xi and attaches the region's stationary point.
    pub fn new(xi: f64, c_l: f64, c_r: f64, margin: f64) -> Result<Self> {
        if !xi.is_finite() {
            return Err(Error::InvalidParams("xi must be finite".into()));
        }
        let region = classify_xi(xi, c_l, c_r, margin);
        if region == Region::Boundary {
            return Err(Error::BoundaryRegion(xi));
        }
        Self::in_region(xi, region, c_l, c_r)
    }

    /// Context for a prescribed region; eta follows that region's formula.
    pub fn in_region(xi: f64, region: Region, c_l: f64, c_r: f64) -> Result<Self> {
        let eta = match region {
            Region::I => (-xi + c_l * c_l / 2.0).sqrt(),
            Region::II => (-2.0 * xi).sqrt(),
            Region::III => (-xi + c_r * c_r / 2.0).sqrt(),
            Region::IV => 0.0,
            Region::Boundary => return Err(Error::BoundaryRegion(xi)),
        };
        if !eta.is_finite() {
            return Err(Error::Region(format!(
                "{region} has no stationary point at xi = {xi}"
            )));
        }
        Ok(PhaseContext {
            xi,
            region,
            eta,
            c_l,
            c_r,
        })
    }

    /// Branch-point radius of the region's cut.
    pub fn cut_radius(&self) -> Result<f64> {
        match self.region {
            Region::I => Ok(self.c_l),
            Region::II => Ok(self.eta),
            Region::III => Ok(self.c_r),
            r => Err(Error::Region(r.label().into())),
        }
    }
}

/// g(xi; k): (4k^2 + 12xi + 2c^2) X_c(k) in regions I and III, 4 X_eta^3 in region II.
/// At the branch points g takes its continuous value 0.
pub fn g_eval(ctx: &PhaseContext, k: C64, side: CutSide) -> Result<C64> {
    check_finite(k, "spectral parameter")?;
    let c = ctx.cut_radius()?;
    let x = match sqrt_cut(k, c, side) {
        Err(Error::BranchPoint(_)) => return Ok(C64::new(0.0, 0.0)),
        other => other?,
    };
    Ok(match ctx.region {
        Region::II => x * x * x * 4.0,
        _ => (k * k * 4.0 + 12.0 * ctx.xi + 2.0 * c * c) * x,
    })
}

/// (g', g'') at k, using the side-tagged branch on the cut.
pub fn g_derivatives(ctx: &PhaseContext, k: C64, side: CutSide) -> Result<(C64, C64)> {
    check_finite(k, "spectral parameter")?;
    let c = ctx.cut_radius()?;
    let x = sqrt_cut(k, c, side)?;
    let e2 = ctx.eta * ctx.eta;
    Ok(match ctx.region {
        Region::II => (k * x * 12.0, x * 12.0 + k * k * 12.0 / x),
        _ => {
            let p = k * (k * k - e2) * 12.0;
            let dp = (k * k * 3.0 - e2) * 12.0;
            (p / x, dp / x - p * k / (x * x * x))
        }
    })
}

/// g''(eta) in region I: 24 eta^2 / sqrt(eta^2 - c_l^2).
pub fn g_second_at_eta(ctx: &PhaseContext) -> Result<f64> {
    if ctx.region != Region::I {
        return Err(Error::Region(ctx.region.label().into()));
    }
    let e2 = ctx.eta * ctx.eta;
    Ok(24.0 * e2 / (e2 - ctx.c_l * ctx.c_l).sqrt())
}

/// One sample of the Im g signature table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignSample {
    pub k: C64,
    pub im_g: f64,
    pub sign: i8,
}

/// Sign of Im g at each sample (samples must be off the cut).
pub fn signature_probe(ctx: &PhaseContext, samples: &[C64]) -> Result<Vec<SignSample>> {
    samples
        .iter()
        .map(|&k| {
            let g = g_eval(ctx, k, CutSide::Off)?;
            let sign = if g.im > 0.0 {
                1
            } else if g.im < 0.0 {
                -1
            } else {
                0
            };
            Ok(SignSample {
                k,
                im_g: g.im,
                sign,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::c64;

    fn ctx(xi: f64) -> PhaseContext {
        PhaseContext::new(xi, 2.0, 1.0, DEFAULT_MARGIN).unwrap()
    }

    #[test]
    fn classification_examples() {
        let p = StepParams::pure(2.0, 1.0).unwrap();
        assert_eq!(
            classify(-108.0, 3.0, &p, DEFAULT_MARGIN).unwrap(),
            Region::I
        );
        assert_eq!(
            classify(-36.0, 3.0, &p, DEFAULT_MARGIN).unwrap(),
            Region::II
        );
        assert_eq!(classify(0.0, 3.0, &p, DEFAULT_MARGIN).unwrap(), Region::III);
        assert_eq!(classify(36.0, 3.0, &p, DEFAULT_MARGIN).unwrap(), Region::IV);
        assert_eq!(
            classify_xi(-2.0 + 1e-7, 2.0, 1.0, DEFAULT_MARGIN),
            Region::Boundary
        );
        assert!(classify(1.0, 0.0, &p, DEFAULT_MARGIN).is_err());
        assert_eq!(
            PhaseContext::new(-0.5, 2.0, 1.0, DEFAULT_MARGIN),
            Err(Error::BoundaryRegion(-0.5))
        );
    }

    #[test]
    fn theta_values() {
        let k = c64(1.3, -0.2);
        assert!((theta(0.0, k) - k * k * k * 4.0).norm() < 1e-14);
        assert!(theta(-3.0, c64(3.0, 0.0)).norm() < 1e-13);
        assert!((theta(0.7, -k) + theta(0.7, k)).norm() < 1e-14);
    }

    #[test]
    fn stationary_points() {
        assert!((ctx(-3.0).eta - 5f64.sqrt()).abs() < 1e-15);
        assert!((ctx(-1.0).eta - 2f64.sqrt()).abs() < 1e-15);
        assert!((ctx(0.0).eta - 0.5f64.sqrt()).abs() < 1e-15);
        for xi in [-3.0, -1.0, 0.2] {
            let c = ctx(xi);
            let side = if c.region == Region::III {
                CutSide::Above
            } else {
                CutSide::Off
            };
            if c.region == Region::II {
                continue;
            }
            let (d1, _) = g_derivatives(&c, c64(c.eta, 0.0), side).unwrap();
            assert!(d1.norm() < 1e-10);
        }
        // Region II: g' = 12 k X_eta vanishes at eta.
        let c = ctx(-1.0);
        let (d1, _) = g_derivatives(&c, c64(c.eta + 1e-14, 0.0), CutSide::Off).unwrap();
        assert!(d1.norm() < 1e-5);
    }

    #[test]
    fn g_reference_values() {
        let g = g_eval(&ctx(-1.0), c64(2.0, 0.0), CutSide::Off).unwrap();
        assert!((g.re - 8.0 * 2f64.sqrt()).abs() < 1e-12 && g.im.abs() < 1e-14);
        let c = ctx(-3.0);
        let g = g_eval(&c, c64(c.eta, 0.0), CutSide::Off).unwrap();
        assert!((g.re + 8.0).abs() < 1e-12);
        assert!((g_second_at_eta(&c).unwrap() - 120.0).abs() < 1e-11);
        let (_, d2) = g_derivatives(&c, c64(c.eta, 0.0), CutSide::Off).unwrap();
        assert!((d2.re - 120.0).abs() < 1e-10);
        let c2 = ctx(-1.0);
        assert!(g_eval(&c2, c64(c2.eta, 0.0), CutSide::Off).unwrap().norm() < 1e-12);
        let c4 = ctx(1.0);
        assert!(matches!(
            g_eval(&c4, c64(1.0, 1.0), CutSide::Off),
            Err(Error::Region(_))
        ));
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for xi in [-3.0, -1.0, 0.1] {
            let c = ctx(xi);
            let k = c64(3.0, 0.2);
            let h = 1e-4;
            let fd = (g_eval(&c, k + h, CutSide::Off).unwrap()
                - g_eval(&c, k - h, CutSide::Off).unwrap())
                / (2.0 * h);
            let (d1, d2) = g_derivatives(&c, k, CutSide::Off).unwrap();
            assert!((d1 - fd).norm() < 1e-6, "xi={xi}");
            let fd2 = (g_derivatives(&c, k + h, CutSide::Off).unwrap().0
                - g_derivatives(&c, k - h, CutSide::Off).unwrap().0)
                / (2.0 * h);
            assert!((d2 - fd2).norm() < 1e-6, "xi={xi}");
        }
    }

    #[test]
    fn signature_examples() {
        let s = signature_probe(&ctx(-3.0), &[c64(3.0, 0.1), c64(3.0, -0.1)]).unwrap();
        assert_eq!((s[0].sign, s[1].sign), (1, -1));
        let s = signature_probe(&ctx(-1.0), &[c64(0.0, 0.5)]).unwrap();
        assert_eq!(s[0].sign, -1);
    }

    #[test]
    fn region_ii_coalescence() {
        let a = PhaseContext::in_region(-2.0 + 1e-9, Region::II, 2.0, 1.0).unwrap();
        assert!((a.eta - 2.0).abs() < 1e-8);
        let b = PhaseContext::in_region(-0.5 - 1e-9, Region::II, 2.0, 1.0).unwrap();
        assert!((b.eta - 1.0).abs() < 1e-8);
    }
}
