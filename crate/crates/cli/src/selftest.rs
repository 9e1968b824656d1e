//! Quick invariant checks, one line per module.

use std::f64::consts::PI;
use std::sync::Arc;

use mkdv_core::asymptotics::boundary_matching;
use mkdv_core::dfunction::{d_eval, d_infinity, DContext};
use mkdv_core::numerics::{airy_ai, gamma_complex};
use mkdv_core::oracle::{evolve, make_profile, SolverConfig};
use mkdv_core::parametrix::{
    airy_jump, airy_matrix, pc_jump, pc_matrix, ray_limits, PCModel, AIRY_RAYS, PC_RAYS,
};
use mkdv_core::phase::{g_eval, PhaseContext};
use mkdv_core::scattering::{verify_r_jumps, PureStepSource, ReflectionSource};
use mkdv_core::{c64, CutSide, Matrix2C, StepParams, C64};

struct Check {
    module: &'static str,
    what: &'static str,
    bound: f64,
    run: fn() -> mkdv_core::Result<f64>,
}

fn numerics() -> mkdv_core::Result<f64> {
    let w = C64::from_polar(1.0, 2.0 * PI / 3.0);
    let mut worst = 0.0f64;
    for z in [c64(0.3, 0.2), c64(-2.0, 1.5), c64(4.0, -3.0), c64(9.0, 1.0)] {
        let terms = [airy_ai(z), w * airy_ai(w * z), w * w * airy_ai(w * w * z)];
        let scale = terms.iter().map(|t| t.norm()).fold(1.0, f64::max);
        worst = worst.max((terms[0] + terms[1] + terms[2]).norm() / scale);
        let g = gamma_complex(z)? * gamma_complex(1.0 - z)? * (z * PI).sin() / PI;
        worst = worst.max((g - 1.0).norm());
    }
    Ok(worst)
}

fn scattering() -> mkdv_core::Result<f64> {
    let grid: Vec<f64> = (0..80)
        .map(|i| -3.0 + 6.0 * (i as f64 + 0.5) / 80.0)
        .collect();
    Ok(verify_r_jumps(&StepParams::pure(2.0, 1.0)?, &grid)?.max_residual())
}

fn phase() -> mkdv_core::Result<f64> {
    let mut worst = 0.0f64;
    for xi in [-1.0, -0.3, -0.05] {
        let ctx = PhaseContext::new(xi, 1.0, 0.5, 1e-6)?;
        let cut = ctx.cut_radius()?;
        for u in [-0.9, -0.4, 0.2, 0.7] {
            let k = c64(u * cut, 0.0);
            let s = g_eval(&ctx, k, CutSide::Above)? + g_eval(&ctx, k, CutSide::Below)?;
            worst = worst.max(s.norm());
        }
    }
    Ok(worst)
}

fn dfunction() -> mkdv_core::Result<f64> {
    let p = StepParams::pure(2.0, 1.0)?;
    let mut worst = 0.0f64;
    for xi in [-3.0, -1.0] {
        let c = DContext::from_params(xi, p)?;
        for k in [c64(0.7, 1.3), c64(2.5, 0.05)] {
            let d = d_eval(&c, k, CutSide::Off)?;
            worst = worst.max((d * d_eval(&c, k.conj(), CutSide::Off)?.conj() - 1.0).norm());
        }
        worst = worst.max((d_infinity(&c)?.norm() - 1.0).abs());
    }
    Ok(worst)
}

fn parametrix() -> mkdv_core::Result<f64> {
    let m = PCModel::new(c64(0.3, 0.2))?;
    let mut worst = 0.0f64;
    for &ray in &PC_RAYS {
        let z = C64::from_polar(1.5, ray);
        let (ccw, cw) = ray_limits(|x| pc_matrix(&m, x), z)?;
        let res = if ray.abs() < PI / 2.0 {
            ccw.inverse() * cw * pc_jump(&m, z)
        } else {
            cw.inverse() * ccw * pc_jump(&m, z)
        };
        worst = worst.max((res - Matrix2C::identity()).max_abs());
    }
    for &ray in &AIRY_RAYS {
        let z = C64::from_polar(1.5, ray);
        let (ccw, cw) = ray_limits(airy_matrix, z)?;
        let res = if ray == 0.0 {
            cw.inverse() * ccw
        } else {
            ccw.inverse() * cw
        };
        worst = worst.max((res - airy_jump(z)).max_abs());
    }
    Ok(worst)
}

fn asymptotics() -> mkdv_core::Result<f64> {
    let src: Arc<dyn ReflectionSource> = Arc::new(PureStepSource { c_l: 2.0, c_r: 1.0 });
    Ok(boundary_matching(&StepParams::pure(2.0, 1.0)?, src, 1e-4)?.max_gap())
}

fn oracle() -> mkdv_core::Result<f64> {
    let cfg = SolverConfig {
        l: 100.0,
        node_count: 1 << 11,
        dt: 0.01,
        ..SolverConfig::default()
    };
    let g = make_profile(&StepParams::pure(1.0, 0.5)?, cfg.l, 2.0, cfg.node_count)?;
    let e = evolve(&g, 2.0, &cfg)?;
    Ok(((e.mass() - g.mass()) / g.mass())
        .abs()
        .max(((e.l2() - g.l2()) / g.l2()).abs()))
}

const CHECKS: [Check; 7] = [
    Check {
        module: "numerics",
        what: "Airy connection and gamma reflection",
        bound: 1e-10,
        run: numerics,
    },
    Check {
        module: "scattering",
        what: "jump relations of the pure step (2, 1)",
        bound: 1e-8,
        run: scattering,
    },
    Check {
        module: "phase",
        what: "g odd across its cut",
        bound: 1e-10,
        run: phase,
    },
    Check {
        module: "dfunction",
        what: "D Schwarz symmetry and |D_inf| = 1",
        bound: 1e-6,
        run: dfunction,
    },
    Check {
        module: "parametrix",
        what: "PC and Airy jump matrices",
        bound: 1e-8,
        run: parametrix,
    },
    Check {
        module: "asymptotics",
        what: "leading terms match across boundaries at eps = 1e-4",
        bound: 1e-2,
        run: asymptotics,
    },
    Check {
        module: "oracle",
        what: "mass and L2 drift to t = 2",
        bound: 1e-6,
        run: oracle,
    },
];

/// Prints one line per module; returns whether all passed.
pub fn run(tolerance_scale: f64) -> bool {
    let mut all = true;
    for c in &CHECKS {
        let bound = c.bound * tolerance_scale;
        let (pass, detail) = match (c.run)() {
            Ok(v) => (v < bound, format!("{v:.2e} < {bound:.0e}")),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= pass;
        println!(
            "{}: {} ({}: {detail})",
            c.module,
            if pass { "PASS" } else { "FAIL" },
            c.what
        );
    }
    all
}
