//! JSON run configuration.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use mkdv_core::dfunction::default_quadrature;
use mkdv_core::numerics::quad::QuadratureSpec;
use mkdv_core::oracle::{ProbePlan, SolverConfig, DESK_DELTA};
use mkdv_core::phase::DEFAULT_MARGIN;
use mkdv_core::{Profile, StepParams};
use serde::Deserialize;

/// Evenly spaced samples from `start` to `stop` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.start],
            n => {
                let h = (self.stop - self.start) / (n - 1) as f64;
                (0..n).map(|i| self.start + h * i as f64).collect()
            }
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            bail!("grid `{name}` is empty");
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            bail!("grid `{name}` has non-finite bounds");
        }
        Ok(())
    }
}

/// Everything a command needs; unused sections are ignored by each command.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: StepParams,
    /// Real spectral samples for scatter, phase and dfun.
    pub k_grid: Option<Grid>,
    /// Imaginary offset added to every k sample; zero keeps k on the real axis.
    #[serde(default)]
    pub k_imag: f64,
    /// Rays xi = x / (12 t) for phase and dfun.
    #[serde(default)]
    pub xi: Vec<f64>,
    pub x_grid: Option<Grid>,
    pub t_grid: Option<Grid>,
    /// Half-width of the boundary bands between regions.
    #[serde(default = "default_margin")]
    pub margin: f64,
    pub quadrature_tolerance: Option<f64>,
    pub solver: Option<SolverConfig>,
    /// Tanh width of the solver's initial profile.
    pub delta: Option<f64>,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Keep every n-th node in snapshot output.
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    pub probes: Option<ProbePlan>,
    pub out: Option<PathBuf>,
    pub tolerance_scale: Option<f64>,
}

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

fn default_stride() -> usize {
    1
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .with_context(|| format!("malformed config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks the whole document before any computation starts.
    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if p.c_r > p.c_l {
            bail!(
                "config error: the step must satisfy c_l > c_r > 0 (got c_l = {}, c_r = {})",
                p.c_l,
                p.c_r
            );
        }
        p.validate().context("config error")?;
        for (name, g) in [
            ("k_grid", &self.k_grid),
            ("x_grid", &self.x_grid),
            ("t_grid", &self.t_grid),
        ] {
            if let Some(g) = g {
                g.validate(name)?;
            }
        }
        if let Some(t) = &self.t_grid {
            if t.points().iter().any(|&t| !(t > 0.0)) {
                bail!("config error: t_grid must be positive");
            }
        }
        if !self.k_imag.is_finite() || self.xi.iter().any(|x| !x.is_finite()) {
            bail!("config error: k_imag and xi must be finite");
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            bail!("config error: margin must be non-negative");
        }
        if let Some(tol) = self.quadrature_tolerance {
            if !(tol > 0.0) {
                bail!("config error: quadrature_tolerance must be positive");
            }
        }
        if let Some(s) = &self.solver {
            s.validate().context("config error in solver")?;
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                bail!("config error: delta must be positive");
            }
        }
        if self.snapshot_stride == 0 {
            bail!("config error: snapshot_stride must be at least 1");
        }
        if self.snapshot_times.iter().any(|&t| !(t >= 0.0)) {
            bail!("config error: snapshot_times must be non-negative");
        }
        if let Some(pl) = &self.probes {
            pl.validate().context("config error in probes")?;
        }
        if let Some(s) = self.tolerance_scale {
            if !(s > 0.0 && s.is_finite()) {
                bail!("config error: tolerance_scale must be positive");
            }
        }
        Ok(())
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let mut q = default_quadrature();
        if let Some(tol) = self.quadrature_tolerance {
            q = QuadratureSpec::new(q.node_count, q.endpoint_singularity, tol)?;
        }
        Ok(q)
    }

    pub fn solver(&self) -> SolverConfig {
        self.solver.unwrap_or_default()
    }

    /// Solver smoothing width: explicit `delta`, else the tanh profile's width,
    /// else the desk default.
    pub fn smoothing(&self) -> Result<f64> {
        match (self.delta, self.params.profile) {
            (Some(d), _) => Ok(d),
            (None, Profile::Tanh { delta }) => Ok(delta),
            (None, Profile::PureStep) => Ok(DESK_DELTA),
            (None, Profile::Bump { .. }) => {
                bail!("config error: the solver supports tanh profiles only; set `delta`")
            }
        }
    }

    pub fn k_samples(&self) -> Vec<f64> {
        let c = self.params.c_l;
        self.k_grid
            .unwrap_or(Grid {
                start: -2.0 * c,
                stop: 2.0 * c,
                count: 201,
            })
            .points()
    }
}
