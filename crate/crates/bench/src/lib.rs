//! Shared fixtures for the kernel benchmarks.

use mkdv_core::oracle::{make_profile, FieldGrid, SolverConfig};
use mkdv_core::StepParams;

/// Pure step with c_l = 1, c_r = 1/2.
pub fn desk_step() -> StepParams {
    StepParams::pure(1.0, 0.5).expect("valid levels")
}

/// Pure step with c_l = 2, c_r = 1.
pub fn wide_step() -> StepParams {
    StepParams::pure(2.0, 1.0).expect("valid levels")
}

/// Small periodic solver setup and its initial field.
pub fn small_solver() -> (SolverConfig, FieldGrid) {
    let cfg = SolverConfig {
        l: 200.0,
        node_count: 1 << 12,
        dt: 0.01,
        ..SolverConfig::default()
    };
    let grid = make_profile(&desk_step(), cfg.l, 2.0, cfg.node_count).expect("valid profile");
    (cfg, grid)
}
