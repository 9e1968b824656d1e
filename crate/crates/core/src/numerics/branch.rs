//! Roots with a finite cut [-c, c] and normalization 1 (or k) at infinity.
//!
//! Every root is assembled from principal powers of (k - c) and (k + c). On
//! (-inf, -c) the two principal cuts cancel, which leaves the declared cut
//! [-c, c]. Boundary values on the cut come from the sign of a zero imaginary
//! part, so `Above` and `Below` are exact non-tangential limits.

use crate::error::{Error, Result};
use crate::types::{check_finite, CutSide, C64};

/// Validates k against the cut [-c, c] and returns the side-adjusted point.
fn prepare(k: C64, c: f64, side: CutSide) -> Result<C64> {
    check_finite(k, "spectral point")?;
    if !(c > 0.0) {
        return Err(Error::InvalidParams(format!(
            "cut half-width must be positive, got {c}"
        )));
    }
    if k.im == 0.0 && (k.re == c || k.re == -c) {
        return Err(Error::BranchPoint(k.re));
    }
    if k.im == 0.0 && k.re.abs() < c && side == CutSide::Off {
        return Err(Error::SideRequired(k.re));
    }
    Ok(side.nudge(k))
}

/// (k - c)^pm (k + c)^pp with principal branches, after side adjustment.
fn cut_power(k: C64, c: f64, pm: f64, pp: f64, side: CutSide) -> Result<C64> {
    let k = prepare(k, c, side)?;
    let lm = (k - c).ln();
    let lp = (k + c).ln();
    Ok((lm * pm + lp * pp).exp())
}

/// chi(k) = ((k - c)/(k + c))^{1/4}, analytic off [-c, c], chi -> 1 at infinity.
pub fn chi(k: C64, c: f64, side: CutSide) -> Result<C64> {
    cut_power(k, c, 0.25, -0.25, side)
}

/// X(k) = sqrt(k^2 - c^2) with cut [-c, c] and X(k) = k + O(1/k).
pub fn sqrt_cut(k: C64, c: f64, side: CutSide) -> Result<C64> {
    cut_power(k, c, 0.5, 0.5, side)
}

/// Returns true when the real point lies strictly inside the cut.
pub fn on_cut(k: C64, c: f64) -> bool {
    k.im == 0.0 && k.re.abs() < c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{c64, I};

    #[test]
    fn chi_value_at_three() {
        // (1/5)^{1/4}
        let v = chi(c64(3.0, 0.0), 2.0, CutSide::Off).unwrap();
        assert!((v - c64(0.668_740_304_976_422, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn chi_normalized_at_infinity() {
        let v = chi(c64(1e6, 3e5), 2.0, CutSide::Off).unwrap();
        assert!((v - 1.0).norm() < 1e-5);
        let v = chi(c64(-1e6, 0.0), 2.0, CutSide::Off).unwrap();
        assert!((v - 1.0).norm() < 1e-5);
    }

    #[test]
    fn chi_boundary_ratio_is_i() {
        let p = chi(c64(0.0, 0.0), 1.0, CutSide::Above).unwrap();
        let m = chi(c64(0.0, 0.0), 1.0, CutSide::Below).unwrap();
        assert!((p / m - I).norm() < 1e-14);
        // Limits agree with nearby off-cut evaluations.
        let near = chi(c64(0.0, 1e-12), 1.0, CutSide::Off).unwrap();
        assert!((near - p).norm() < 1e-10);
    }

    #[test]
    fn branch_errors() {
        assert_eq!(
            chi(c64(2.0, 0.0), 2.0, CutSide::Off),
            Err(Error::BranchPoint(2.0))
        );
        assert_eq!(
            chi(c64(0.5, 0.0), 2.0, CutSide::Off),
            Err(Error::SideRequired(0.5))
        );
        assert!(chi(c64(f64::NAN, 0.0), 2.0, CutSide::Off).is_err());
    }

    #[test]
    fn sqrt_cut_branches() {
        let x = sqrt_cut(c64(-3.0, 0.0), 2.0, CutSide::Off).unwrap();
        assert!((x + 5f64.sqrt()).norm() < 1e-14);
        let xp = sqrt_cut(c64(0.5, 0.0), 1.0, CutSide::Above).unwrap();
        assert!((xp - I * 0.75f64.sqrt()).norm() < 1e-14);
        let xm = sqrt_cut(c64(0.5, 0.0), 1.0, CutSide::Below).unwrap();
        assert!((xp + xm).norm() < 1e-14);
        // No jump across (-inf, -c).
        let a = sqrt_cut(c64(-3.0, 1e-13), 2.0, CutSide::Off).unwrap();
        let b = sqrt_cut(c64(-3.0, -1e-13), 2.0, CutSide::Off).unwrap();
        assert!((a - b).norm() < 1e-10);
    }
}
