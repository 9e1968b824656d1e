//! One function per subcommand. Sweeps run in parallel; files are written
//! afterwards from the ordered results.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use mkdv_core::asymptotics::{prepare, AsymptoticOptions, AsymptoticValue};
use mkdv_core::dfunction::{d_eval, d_infinity, DContext};
use mkdv_core::oracle::{
    assess, check_window, compare, evolve_snapshots, make_profile, probe_series, BandCheck,
    ProbePlan, SeriesSummary,
};
use mkdv_core::phase::{classify_xi, g_eval, PhaseContext, Region};
use mkdv_core::scattering::{
    reflection_source, scattering_sweep, verify_r_jumps_with, JumpReport, NumericalSource,
    ReflectionSource,
};
use mkdv_core::{c64, CutSide, Profile, StepParams, C64};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{Cell, OutDir};

/// Spectral samples with side tags: real points inside the cut radius are
/// emitted on both sides, points exactly at a branch point are dropped.
fn tagged_samples(cfg: &RunConfig, cut: f64, branch: &[f64]) -> Vec<(C64, CutSide)> {
    let mut out = Vec::new();
    for k in cfg.k_samples() {
        if cfg.k_imag != 0.0 {
            out.push((c64(k, cfg.k_imag), CutSide::Off));
        } else if branch.iter().any(|&b| k.abs() == b) {
            continue;
        } else if k.abs() < cut {
            out.push((c64(k, 0.0), CutSide::Above));
            out.push((c64(k, 0.0), CutSide::Below));
        } else {
            out.push((c64(k, 0.0), CutSide::Off));
        }
    }
    out
}

fn complex_cells(z: C64) -> [Cell; 2] {
    [Cell::Num(z.re), Cell::Num(z.im)]
}

#[derive(Serialize)]
struct ScatterReport {
    params: StepParams,
    samples: usize,
    skipped: usize,
    relations: JumpReport,
    max_residual: f64,
}

pub fn scatter(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let p = cfg.params;
    let src = reflection_source(&p);
    let samples = tagged_samples(cfg, p.c_l, &[p.c_l, p.c_r]);
    let results = scattering_sweep(src.as_ref(), &samples);
    let mut rows = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r {
            Ok(d) => {
                let mut row: Vec<Cell> = complex_cells(d.k).into();
                row.push(d.side.label().into());
                row.extend(complex_cells(d.a));
                row.extend(complex_cells(d.b));
                row.extend(complex_cells(d.r));
                rows.push(row);
            }
            Err(_) => skipped += 1,
        }
    }
    out.csv(
        "scatter.csv",
        &[
            "k_re", "k_im", "side", "a_re", "a_im", "b_re", "b_im", "r_re", "r_im",
        ],
        &rows,
    )?;
    let real: Vec<f64> = cfg.k_samples();
    let relations =
        verify_r_jumps_with(src.as_ref(), p.c_l, p.c_r, &real).context("relation check failed")?;
    let report = ScatterReport {
        params: p,
        samples: samples.len(),
        skipped,
        max_residual: relations.max_residual(),
        relations,
    };
    out.json("scatter_report.json", &report)?;
    Ok(())
}

/// Contexts for the configured rays; rays outside the supported regions are
/// reported and dropped.
fn rays<T>(
    cfg: &RunConfig,
    what: &str,
    make: impl Fn(f64) -> mkdv_core::Result<T>,
) -> Vec<(f64, T)> {
    if cfg.xi.is_empty() {
        eprintln!("{what}: no rays in `xi`, nothing to do");
    }
    cfg.xi
        .iter()
        .filter_map(|&xi| match make(xi) {
            Ok(c) => Some((xi, c)),
            Err(e) => {
                eprintln!("{what}: skipping xi = {xi}: {e}");
                None
            }
        })
        .collect()
}

pub fn phase(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let p = cfg.params;
    let ctxs = rays(cfg, "phase", |xi| {
        let c = PhaseContext::new(xi, p.c_l, p.c_r, cfg.margin)?;
        c.cut_radius()?;
        Ok(c)
    });
    let mut rows = Vec::new();
    for (xi, ctx) in &ctxs {
        let cut = ctx.cut_radius()?;
        let samples = tagged_samples(cfg, cut, &[cut]);
        let vals: Vec<_> = samples
            .par_iter()
            .map(|&(k, s)| g_eval(ctx, k, s))
            .collect();
        for ((k, s), v) in samples.iter().zip(vals) {
            let Ok(g) = v else { continue };
            let mut row = vec![
                Cell::Num(*xi),
                ctx.region.label().into(),
                Cell::Num(ctx.eta),
            ];
            row.extend(complex_cells(*k));
            row.push(s.label().into());
            row.extend(complex_cells(g));
            rows.push(row);
        }
    }
    out.csv(
        "phase.csv",
        &[
            "xi", "region", "eta", "k_re", "k_im", "side", "g_re", "g_im",
        ],
        &rows,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct DRay {
    xi: f64,
    region: Region,
    eta: f64,
    d_inf_re: f64,
    d_inf_im: f64,
}

pub fn dfun(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let p = cfg.params;
    let source: Arc<dyn ReflectionSource> = Arc::from(reflection_source(&p));
    let quad = cfg.quadrature()?;
    let ctxs = rays(cfg, "dfun", |xi| DContext::new(xi, p, source.clone(), quad));
    let mut rows = Vec::new();
    let mut rays_out = Vec::new();
    for (xi, ctx) in &ctxs {
        let samples = tagged_samples(cfg, p.c_l, &[p.c_l, p.c_r, ctx.eta]);
        let vals: Vec<_> = samples
            .par_iter()
            .map(|&(k, s)| d_eval(ctx, k, s))
            .collect();
        for ((k, s), v) in samples.iter().zip(vals) {
            let Ok(d) = v else { continue };
            let mut row = vec![Cell::Num(*xi), ctx.region.label().into()];
            row.extend(complex_cells(*k));
            row.push(s.label().into());
            row.extend(complex_cells(d));
            rows.push(row);
        }
        let dinf = d_infinity(ctx)?;
        rays_out.push(DRay {
            xi: *xi,
            region: ctx.region,
            eta: ctx.eta,
            d_inf_re: dinf.re,
            d_inf_im: dinf.im,
        });
    }
    out.csv(
        "dfun.csv",
        &["xi", "region", "k_re", "k_im", "side", "d_re", "d_im"],
        &rows,
    )?;
    out.json("dfun_report.json", &rays_out)?;
    Ok(())
}

pub fn asym(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let p = cfg.params;
    let (Some(xg), Some(tg)) = (cfg.x_grid, cfg.t_grid) else {
        bail!("config error: asym needs `x_grid` and `t_grid`");
    };
    let source: Arc<dyn ReflectionSource> = Arc::from(reflection_source(&p));
    let opts = AsymptoticOptions {
        margin: cfg.margin,
        quadrature: cfg.quadrature()?,
        ..AsymptoticOptions::default()
    };
    let points: Vec<(f64, f64)> = tg
        .points()
        .into_iter()
        .flat_map(|t| xg.points().into_iter().map(move |x| (x, t)))
        .collect();
    let vals: Vec<Result<Option<AsymptoticValue>>> = points
        .par_iter()
        .map(|&(x, t)| {
            let xi = x / (12.0 * t);
            if classify_xi(xi, p.c_l, p.c_r, cfg.margin) == Region::Boundary {
                return Ok(None);
            }
            let inp = prepare(xi, &p, source.clone(), &opts)
                .with_context(|| format!("preparing xi = {xi}"))?;
            Ok(Some(inp.evaluate(x, t)?))
        })
        .collect();
    let mut rows = Vec::with_capacity(points.len());
    for (&(x, t), v) in points.iter().zip(vals) {
        let row = match v? {
            Some(a) => vec![
                Cell::Num(x),
                Cell::Num(t),
                Cell::Num(a.xi),
                a.region.label().into(),
                Cell::Num(a.leading),
                Cell::Num(a.subleading),
                Cell::Num(a.q_total),
                a.error_order.label().into(),
            ],
            None => vec![
                Cell::Num(x),
                Cell::Num(t),
                Cell::Num(x / (12.0 * t)),
                Region::Boundary.label().into(),
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
                Cell::Empty,
            ],
        };
        rows.push(row);
    }
    out.csv(
        "asym.csv",
        &[
            "x",
            "t",
            "xi",
            "region",
            "leading",
            "subleading",
            "q_total",
            "error_order",
        ],
        &rows,
    )?;
    Ok(())
}

#[derive(Serialize)]
struct Snapshot {
    t: f64,
    mass: f64,
    l2: f64,
    max_abs: f64,
}

pub fn solve(cfg: &RunConfig, out: &OutDir) -> Result<()> {
    let solver = cfg.solver();
    let delta = cfg.smoothing()?;
    if cfg.snapshot_times.is_empty() {
        bail!("config error: solve needs `snapshot_times`");
    }
    let mut times = cfg.snapshot_times.clone();
    times.sort_by(f64::total_cmp);
    let grid = make_profile(&cfg.params, solver.l, delta, solver.node_count)?;
    let snaps = evolve_snapshots(&grid, &times, &solver)?;
    let mut rows = Vec::new();
    let mut report = Vec::new();
    for s in &snaps {
        for j in (0..s.len()).step_by(cfg.snapshot_stride) {
            rows.push(vec![Cell::Num(s.t), Cell::Num(s.x(j)), Cell::Num(s.q[j])]);
        }
        report.push(Snapshot {
            t: s.t,
            mass: s.mass(),
            l2: s.l2(),
            max_abs: s.max_abs(),
        });
    }
    out.csv("snapshots.csv", &["t", "x", "q"], &rows)?;
    out.json("solve_report.json", &report)?;
    Ok(())
}

#[derive(Serialize)]
struct Slopes {
    delta: f64,
    tolerance_scale: f64,
    summaries: Vec<SeriesSummary>,
    checks: Vec<BandCheck>,
    pass: bool,
}

/// Runs the oracle comparison; returns whether every band check passed.
pub fn compare_cmd(cfg: &RunConfig, out: &OutDir, tolerance_scale: f64) -> Result<bool> {
    let p = cfg.params;
    let solver = cfg.solver();
    let delta = cfg.smoothing()?;
    let smooth = StepParams::new(p.c_l, p.c_r, Profile::Tanh { delta })?;
    let plan = cfg.probes.clone().unwrap_or_else(|| ProbePlan::desk(&p));
    check_window(&p, solver.l, delta, &plan.xis, &plan.times)?;
    let grid = make_profile(&p, solver.l, delta, solver.node_count)?;
    let series = probe_series(&grid, &solver, &plan.xis, &plan.times)?;
    let opts = AsymptoticOptions {
        margin: cfg.margin,
        quadrature: cfg.quadrature()?,
        ..AsymptoticOptions::default()
    };
    let report = compare(
        &series,
        &smooth,
        Arc::new(NumericalSource::new(smooth)),
        &opts,
    )?;
    let slope: BTreeMap<u64, f64> = report
        .summaries
        .iter()
        .map(|s| (s.xi.to_bits(), s.slope_leading))
        .collect();
    let rows: Vec<Vec<Cell>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.region.label().into(),
                Cell::Num(r.xi),
                Cell::Num(r.t),
                Cell::Num(r.x),
                Cell::Num(r.q_numeric),
                Cell::Num(r.q_leading),
                Cell::Num(r.q_full),
                Cell::Num(r.resid_leading),
                Cell::Num(r.resid_full),
                Cell::Num(slope.get(&r.xi.to_bits()).copied().unwrap_or(f64::NAN)),
            ]
        })
        .collect();
    out.csv(
        "compare.csv",
        &[
            "region",
            "xi",
            "t",
            "x",
            "q_numeric",
            "q_leading",
            "q_full",
            "resid_leading",
            "resid_full",
            "fitted_slope",
        ],
        &rows,
    )?;
    let checks = assess(&report, tolerance_scale);
    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        println!(
            "{} (xi = {}): {:.6e} in [{:.3e}, {:.3e}] {}",
            c.name,
            c.xi,
            c.value,
            c.lo,
            c.hi,
            if c.pass { "PASS" } else { "FAIL" }
        );
    }
    out.json(
        "slopes.json",
        &Slopes {
            delta,
            tolerance_scale,
            summaries: report.summaries,
            checks,
            pass,
        },
    )?;
    Ok(pass)
}
