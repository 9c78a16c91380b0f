//! Run configuration, the time loop and its diagnostics.
//!
//! Each step: indicator -> speeds -> dt -> stages -> face fluxes -> evolve ->
//! limit -> diagnostics -> output.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use crate::basis::{build_basis, lagrange_values, NodeKind};
use crate::crkfr::{compute_dt, Discretization};
use crate::error::{Error, Result};
use crate::field::NodalField;
use crate::indicator::{compute_eps, IndicatorConfig, DEFAULT_GAIN};
use crate::jinxin::{check_elliptic_condition, equilibrium_init, select_speeds, RelaxationConfig, SpeedPolicy, DEFAULT_SAFETY_1D};
use crate::output::{frame_csv, frame_path, frame_vtk, write_text, OutputFormat};
use crate::positivity::{limit_element, PositivityConfig};
use crate::problems::{get_problem, ProblemSpec};
use crate::tableau::DoubleButcherTableau;

/// Default CFL coefficient against the `1/(2N+1)` normalization. The `min`
/// over directions in the step formula ignores that both directions add up in
/// 2D, so the 2D default is halved. Measured limits for N=3 on smooth periodic
/// advection: about 0.7 in 1D and 0.37 in 2D for both tableaux.
pub fn default_cfl(dim: usize) -> f64 {
    if dim == 2 {
        0.3
    } else {
        0.6
    }
}

/// Problem name plus overrides; `None` keeps the problem default.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub degree: Option<usize>,
    pub node_kind: NodeKind,
    pub t_final: Option<f64>,
    pub eps_max: Option<f64>,
    pub eps_min: Option<f64>,
    pub k: f64,
    pub tableau: Option<String>,
    /// `None` uses [`default_cfl`] for the problem dimension.
    pub cfl: Option<f64>,
    pub speed_policy: Option<SpeedPolicy>,
    pub speeds: Option<[f64; 2]>,
    pub safety_1d: f64,
    pub positivity: Option<bool>,
    pub positivity_per_stage: Option<bool>,
    pub floor_fraction: f64,
    /// Steps between frames; 0 writes only the first and last frame.
    pub output_every: usize,
    pub out_dir: Option<PathBuf>,
    pub format: OutputFormat,
    pub deterministic: bool,
    pub max_steps: Option<usize>,
}

impl RunConfig {
    pub fn new(problem: &str) -> Self {
        RunConfig {
            problem: problem.to_string(),
            nx: None,
            ny: None,
            degree: None,
            node_kind: NodeKind::GaussLegendre,
            t_final: None,
            eps_max: None,
            eps_min: None,
            k: DEFAULT_GAIN,
            tableau: None,
            cfl: None,
            speed_policy: None,
            speeds: None,
            safety_1d: DEFAULT_SAFETY_1D,
            positivity: None,
            positivity_per_stage: None,
            floor_fraction: PositivityConfig::default().floor_fraction,
            output_every: 0,
            out_dir: None,
            format: OutputFormat::Csv,
            deterministic: true,
            max_steps: None,
        }
    }

    /// Apply one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse::<T>()
                .map_err(|_| Error::Config(format!("cannot parse `{value}` for `{key}`")))
        }
        match key {
            "problem" => self.problem = value.to_string(),
            "nx" => self.nx = Some(parse(key, value)?),
            "ny" => self.ny = Some(parse(key, value)?),
            "degree" => self.degree = Some(parse(key, value)?),
            "nodes" | "node_kind" => self.node_kind = value.parse()?,
            "t_final" => self.t_final = Some(parse(key, value)?),
            "eps_max" => self.eps_max = Some(parse(key, value)?),
            "eps_min" => self.eps_min = Some(parse(key, value)?),
            "k" => self.k = parse(key, value)?,
            "tableau" => self.tableau = Some(value.to_string()),
            "cfl" => self.cfl = Some(parse(key, value)?),
            "speed_policy" => self.speed_policy = Some(value.parse()?),
            "a1" => self.speeds.get_or_insert([0.0; 2])[0] = parse(key, value)?,
            "a2" => self.speeds.get_or_insert([0.0; 2])[1] = parse(key, value)?,
            "safety_1d" => self.safety_1d = parse(key, value)?,
            "positivity" => self.positivity = Some(parse(key, value)?),
            "positivity_per_stage" => self.positivity_per_stage = Some(parse(key, value)?),
            "floor_fraction" => self.floor_fraction = parse(key, value)?,
            "output_every" => self.output_every = parse(key, value)?,
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "deterministic" => self.deterministic = parse(key, value)?,
            "fast" => self.deterministic = !parse::<bool>(key, value)?,
            "max_steps" => self.max_steps = Some(parse(key, value)?),
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parse flat `key = value` text with `#` comments on top of `self`.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::new("");
        cfg.apply_kv_text(text)?;
        if cfg.problem.is_empty() {
            return Err(Error::Config("config does not name a problem".into()));
        }
        Ok(cfg)
    }
}

/// What happened in one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub speeds: [f64; 2],
    pub limited_elements: usize,
    pub stage_limited: usize,
    pub min_density: Option<f64>,
    pub min_pressure: Option<f64>,
    pub elliptic_violations: usize,
    pub max_elliptic_lhs: f64,
}

/// Summary of a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub problem: String,
    pub steps: usize,
    pub t_final: f64,
    pub wall_time_s: f64,
    pub initial_totals: Vec<f64>,
    pub final_totals: Vec<f64>,
    /// Largest drift of each total over all steps, relative to the initial
    /// total (absolute where that is zero).
    pub max_rel_drift: Vec<f64>,
    pub min_density: Option<f64>,
    pub min_pressure: Option<f64>,
    pub limiter_activations: usize,
    pub stage_limiter_activations: usize,
    pub elliptic_violations: usize,
    pub max_elliptic_lhs: f64,
    /// Element-steps with eps at the lower bound, strictly inside, at the upper bound.
    pub eps_histogram: [usize; 3],
    pub frames: Vec<PathBuf>,
}

impl RunReport {
    pub fn to_kv_string(&self) -> String {
        let mut kv: BTreeMap<&str, String> = BTreeMap::new();
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(",");
        kv.insert("problem", self.problem.clone());
        kv.insert("steps", self.steps.to_string());
        kv.insert("t_final", format!("{:.16e}", self.t_final));
        kv.insert("wall_time_s", format!("{:.3}", self.wall_time_s));
        kv.insert("initial_totals", list(&self.initial_totals));
        kv.insert("final_totals", list(&self.final_totals));
        kv.insert("max_rel_drift", list(&self.max_rel_drift));
        if let Some(v) = self.min_density {
            kv.insert("min_density", format!("{v:.16e}"));
        }
        if let Some(v) = self.min_pressure {
            kv.insert("min_pressure", format!("{v:.16e}"));
        }
        kv.insert("limiter_activations", self.limiter_activations.to_string());
        kv.insert("stage_limiter_activations", self.stage_limiter_activations.to_string());
        kv.insert("elliptic_violations", self.elliptic_violations.to_string());
        kv.insert("max_elliptic_lhs", format!("{:.16e}", self.max_elliptic_lhs));
        kv.insert("eps_at_min", self.eps_histogram[0].to_string());
        kv.insert("eps_between", self.eps_histogram[1].to_string());
        kv.insert("eps_at_max", self.eps_histogram[2].to_string());
        kv.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// A configured run in progress.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: RunConfig,
    pub problem: ProblemSpec,
    pub disc: Discretization,
    pub indicator: IndicatorConfig,
    pub relax: RelaxationConfig,
    pub limiter: PositivityConfig,
    pub field: NodalField,
    pub t_final: f64,
    pub cfl: f64,
    pub steps: usize,
    initial_totals: Vec<f64>,
    max_rel_drift: Vec<f64>,
    min_density: Option<f64>,
    min_pressure: Option<f64>,
    limiter_activations: usize,
    stage_limiter_activations: usize,
    elliptic_violations: usize,
    max_elliptic_lhs: f64,
    eps_histogram: [usize; 3],
}

impl Simulation {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let problem = get_problem(&config.problem)?;
        let dim = problem.dim();
        let n = [
            config.nx.unwrap_or(problem.n[0]),
            if dim == 2 { config.ny.or(config.nx).unwrap_or(problem.n[1]) } else { 1 },
        ];
        let degree = config.degree.unwrap_or(problem.degree);
        let basis = build_basis(degree, config.node_kind)?;
        let mesh = problem.mesh(n)?;
        let tableau = DoubleButcherTableau::by_name(config.tableau.as_deref().unwrap_or(problem.tableau))?;
        let eq = problem.equation;
        let disc = Discretization::new(eq, basis, mesh, tableau)?;

        let t_final = config.t_final.unwrap_or(problem.t_final);
        if !(t_final >= 0.0) || !t_final.is_finite() {
            return Err(Error::Config(format!("t_final must be finite and >= 0, got {t_final}")));
        }
        let cfl = config.cfl.unwrap_or_else(|| default_cfl(dim));
        if !(cfl > 0.0) || !cfl.is_finite() {
            return Err(Error::Config(format!("cfl must be positive, got {cfl}")));
        }
        let indicator = IndicatorConfig {
            k: config.k,
            eps_min: config.eps_min.unwrap_or(problem.eps_min),
            eps_max: config.eps_max.unwrap_or(problem.eps_max),
            ..IndicatorConfig::new(problem.eps_max, &eq)
        };
        indicator.validate()?;
        let policy = config.speed_policy.unwrap_or(if config.speeds.is_some() {
            SpeedPolicy::FixedUser
        } else {
            problem.speed_policy
        });
        let mut relax = RelaxationConfig::new(
            policy,
            config.speeds.unwrap_or(problem.speeds),
            disc.mesh.n_elements(),
            indicator.eps_min,
        );
        relax.safety_1d = config.safety_1d;
        if policy == SpeedPolicy::FixedUser {
            relax.validate(dim)?;
        }
        let limiter = PositivityConfig {
            enabled: config.positivity.unwrap_or(problem.positivity),
            floor_fraction: config.floor_fraction,
            per_stage: config.positivity_per_stage.unwrap_or(problem.positivity_per_stage),
            ..PositivityConfig::default()
        };
        limiter.validate()?;

        let u0 = problem.sample_initial(&disc.mesh, &disc.basis)?;
        let field = equilibrium_init(&u0, &eq)?;
        let mut sim = Simulation {
            config: config.clone(),
            problem,
            disc,
            indicator,
            relax,
            limiter,
            field,
            t_final,
            cfl,
            steps: 0,
            initial_totals: Vec::new(),
            max_rel_drift: vec![0.0; eq.n_vars()],
            min_density: None,
            min_pressure: None,
            limiter_activations: 0,
            stage_limiter_activations: 0,
            elliptic_violations: 0,
            max_elliptic_lhs: 0.0,
            eps_histogram: [0; 3],
        };
        sim.initial_totals = sim.totals();
        sim.update_extrema();
        compute_eps(&sim.field, &eq, &sim.disc.basis, &sim.indicator, &mut sim.relax.eps)?;
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.field.time
    }

    pub fn done(&self) -> bool {
        self.field.time >= self.t_final
    }

    /// Domain integral of each physical variable.
    pub fn totals(&self) -> Vec<f64> {
        let m = self.disc.eq.n_vars();
        let vol = self.disc.mesh.element_volume();
        let weights = &self.disc.weights;
        let per_element = |e: usize| -> Vec<f64> {
            let mut acc = vec![0.0; m];
            for (q, w) in weights.iter().enumerate() {
                for (k, a) in acc.iter_mut().enumerate() {
                    *a += w * self.field.state(e, q)[k];
                }
            }
            acc
        };
        let n_el = self.field.n_elements;
        let sum = |a: Vec<f64>, b: Vec<f64>| a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<f64>>();
        let total = if self.config.deterministic {
            (0..n_el).map(per_element).fold(vec![0.0; m], sum)
        } else {
            (0..n_el).into_par_iter().map(per_element).reduce(|| vec![0.0; m], sum)
        };
        total.into_iter().map(|t| t * vol).collect()
    }

    fn update_extrema(&mut self) -> (Option<f64>, Option<f64>) {
        let eq = self.disc.eq;
        let m = eq.n_vars();
        if !eq.is_euler() {
            return (None, None);
        }
        let (mut rho, mut p) = (f64::INFINITY, f64::INFINITY);
        for s in self.field.states() {
            rho = rho.min(s[0]);
            p = p.min(eq.pressure(&s[..m]).unwrap_or(f64::NAN));
        }
        self.min_density = Some(self.min_density.map_or(rho, |v| v.min(rho)));
        self.min_pressure = Some(self.min_pressure.map_or(p, |v| v.min(p)));
        (Some(rho), Some(p))
    }

    /// Take one step, clipped to land on `t_final`.
    pub fn advance(&mut self) -> Result<StepInfo> {
        let eq = self.disc.eq;
        let step = self.steps + 1;
        compute_eps(&self.field, &eq, &self.disc.basis, &self.indicator, &mut self.relax.eps)?;
        for e in &self.relax.eps {
            let bin = if *e <= self.indicator.eps_min {
                0
            } else if *e >= self.indicator.eps_max {
                2
            } else {
                1
            };
            self.eps_histogram[bin] += 1;
        }
        let speeds = select_speeds(&self.field, &eq, &self.relax)?;
        self.relax.speeds = speeds;
        let elliptic = check_elliptic_condition(&self.field, &eq, speeds);
        self.elliptic_violations += elliptic.violations;
        self.max_elliptic_lhs = self.max_elliptic_lhs.max(elliptic.max_lhs);

        let mut dt = compute_dt(&self.disc.mesh, self.disc.basis.degree, speeds, self.cfl);
        let remaining = self.t_final - self.field.time;
        let last = dt >= remaining * (1.0 - 1e-12);
        if last {
            dt = remaining;
        }
        let (mut next, stats) = self
            .disc
            .step(&self.field, &self.relax.eps, speeds, dt, &self.limiter)
            .map_err(|err| match err {
                Error::NonFinite { .. } => Error::NonFinite { step: Some(step) },
                other => other,
            })?;
        if last {
            next.time = self.t_final;
        }

        let limited = if self.limiter.enabled && eq.is_euler() {
            let len = next.element_len();
            let (disc, limiter) = (&self.disc, &self.limiter);
            next.data
                .par_chunks_mut(len)
                .enumerate()
                .map(|(e, el)| {
                    limit_element(el, &disc.weights, &disc.probes, &disc.eq, &disc.layout, limiter)
                        .map(|o| o.activated() as usize)
                        .map_err(|err| err.at_element(e))
                })
                .try_reduce(|| 0, |a, b| Ok(a + b))?
        } else {
            0
        };
        if !next.all_finite() {
            return Err(Error::NonFinite { step: Some(step) });
        }
        let m = eq.n_vars();
        for e in 0..next.n_elements {
            for q in 0..next.nodes_per_element {
                eq.check_admissible(&next.state(e, q)[..m]).map_err(|err| err.at_element(e))?;
            }
        }
        self.field = next;
        self.steps = step;
        self.limiter_activations += limited;
        self.stage_limiter_activations += stats.stage_limited;

        let totals = self.totals();
        for (k, (t, t0)) in totals.iter().zip(&self.initial_totals).enumerate() {
            let scale = if *t0 == 0.0 { 1.0 } else { t0.abs() };
            self.max_rel_drift[k] = self.max_rel_drift[k].max((t - t0).abs() / scale);
        }
        let (min_density, min_pressure) = self.update_extrema();
        let info = StepInfo {
            step,
            time: self.field.time,
            dt,
            speeds,
            limited_elements: limited,
            stage_limited: stats.stage_limited,
            min_density,
            min_pressure,
            elliptic_violations: elliptic.violations,
            max_elliptic_lhs: elliptic.max_lhs,
        };
        log::debug!("step {step} t={:.6e} dt={dt:.3e} a={speeds:?} limited={limited}", info.time);
        Ok(info)
    }

    fn write_frame(&self, index: usize) -> Result<Option<PathBuf>> {
        let Some(dir) = &self.config.out_dir else {
            return Ok(None);
        };
        let d = &self.disc;
        let text = match self.config.format {
            OutputFormat::Csv => frame_csv(&self.field, &d.eq, &d.mesh, &d.basis, &self.relax.eps)?,
            OutputFormat::Vtk => frame_vtk(&self.field, &d.eq, &d.mesh, &d.weights, &self.relax.eps)?,
        };
        let path = frame_path(dir, index, self.field.time, self.config.format);
        write_text(&path, &text)?;
        Ok(Some(path))
    }

    pub fn report(&self, wall_time_s: f64, frames: Vec<PathBuf>) -> RunReport {
        RunReport {
            problem: self.problem.name.to_string(),
            steps: self.steps,
            t_final: self.field.time,
            wall_time_s,
            initial_totals: self.initial_totals.clone(),
            final_totals: self.totals(),
            max_rel_drift: self.max_rel_drift.clone(),
            min_density: self.min_density,
            min_pressure: self.min_pressure,
            limiter_activations: self.limiter_activations,
            stage_limiter_activations: self.stage_limiter_activations,
            elliptic_violations: self.elliptic_violations,
            max_elliptic_lhs: self.max_elliptic_lhs,
            eps_histogram: self.eps_histogram,
            frames,
        }
    }

    /// Step to `t_final`, calling `observe` after every step and writing
    /// frames and `report.txt` when an output directory is configured.
    pub fn run_with(&mut self, mut observe: impl FnMut(&Simulation, &StepInfo)) -> Result<RunReport> {
        let start = Instant::now();
        let mut frames = Vec::new();
        let mut frame_index = 0;
        frames.extend(self.write_frame(frame_index)?);
        while !self.done() {
            if let Some(max) = self.config.max_steps {
                if self.steps >= max {
                    log::warn!("stopping after max_steps = {max} at t = {}", self.field.time);
                    break;
                }
            }
            let info = self.advance()?;
            observe(self, &info);
            if info.step % 1000 == 0 {
                log::info!("step {} t = {:.6}", info.step, info.time);
            }
            let every = self.config.output_every;
            if every > 0 && info.step % every == 0 && !self.done() {
                frame_index += 1;
                frames.extend(self.write_frame(frame_index)?);
            }
        }
        if self.steps > 0 || frames.is_empty() {
            frame_index += 1;
            frames.extend(self.write_frame(frame_index)?);
        }
        let report = self.report(start.elapsed().as_secs_f64(), frames);
        if let Some(dir) = &self.config.out_dir {
            write_text(&dir.join("report.txt"), &report.to_kv_string())?;
        }
        Ok(report)
    }

    pub fn run(&mut self) -> Result<RunReport> {
        self.run_with(|_, _| {})
    }

    /// Discrete L2 norm of `u_0 - exact` at the solution points; `None` when
    /// the problem has no closed-form solution.
    pub fn l2_error(&self) -> Option<f64> {
        let d = &self.disc;
        let n = d.basis.n_nodes();
        let vol = d.mesh.element_volume();
        let mut acc = 0.0;
        for e in 0..self.field.n_elements {
            for (q, w) in d.weights.iter().enumerate() {
                let eta = if d.mesh.dim == 2 { d.basis.nodes[q / n] } else { 0.0 };
                let x = d.mesh.ref_to_phys(e, [d.basis.nodes[q % n], eta]).ok()?;
                let diff = self.field.state(e, q)[0] - self.problem.exact(x, self.field.time)?;
                acc += vol * w * diff * diff;
            }
        }
        Some(acc.sqrt())
    }

    /// Augmented state of the element polynomial at physical point `x`.
    /// Points on a face belong to the element on its right (top).
    pub fn evaluate(&self, x: [f64; 2]) -> Result<Vec<f64>> {
        let mesh = &self.disc.mesh;
        let mut idx = [0usize; 2];
        for d in 0..mesh.dim {
            if !(x[d] >= mesh.lo[d] && x[d] <= mesh.hi[d]) {
                return Err(Error::InvalidArgument(format!("point {x:?} lies outside the domain")));
            }
            idx[d] = (((x[d] - mesh.lo[d]) / mesh.dx[d]) as usize).min(mesh.n[d] - 1);
        }
        let e = mesh.index(idx[0], idx[1]);
        let xi = mesh.phys_to_ref(e, x)?;
        let nodes = &self.disc.basis.nodes;
        let lx = lagrange_values(nodes, xi[0]);
        let ly = if mesh.dim == 2 { lagrange_values(nodes, xi[1]) } else { vec![1.0] };
        let n = nodes.len();
        let mut out = vec![0.0; self.disc.layout.total()];
        for (jy, wy) in ly.iter().enumerate() {
            for (ix, wx) in lx.iter().enumerate() {
                let s = self.field.state(e, jy * n + ix);
                for (o, v) in out.iter_mut().zip(s) {
                    *o += wx * wy * v;
                }
            }
        }
        Ok(out)
    }
}

/// Run a configuration to its final time.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    Simulation::new(config)?.run()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub nx: usize,
    pub l2_error: f64,
    pub eoc: Option<f64>,
}

/// Errors against the exact solution on `levels` grids, doubling from the
/// configured (or default) resolution.
pub fn convergence(config: &RunConfig, levels: usize) -> Result<Vec<ConvergenceRow>> {
    let problem = get_problem(&config.problem)?;
    let base = config.nx.unwrap_or(problem.n[0]);
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for level in 0..levels {
        let nx = base << level;
        let mut cfg = config.clone();
        cfg.nx = Some(nx);
        cfg.ny = config.ny.map(|ny| ny << level);
        cfg.out_dir = None;
        let mut sim = Simulation::new(&cfg)?;
        sim.run()?;
        let err = sim
            .l2_error()
            .ok_or_else(|| Error::Config(format!("problem `{}` has no exact solution", cfg.problem)))?;
        let eoc = rows.last().map(|prev| (prev.l2_error / err).ln() / ((nx as f64) / (prev.nx as f64)).ln());
        rows.push(ConvergenceRow { nx, l2_error: err, eoc });
    }
    Ok(rows)
}
