//! Configuration files, snapshot and diagnostics CSVs, and the run manifest.
//!
//! The configuration format is a flat sectioned `key = value` text with
//! sections `[params]`, `[grid]`, `[init]` and `[solver]`; `#` starts a
//! comment. Floats are written with 17 significant digits so every CSV value
//! parses back to the identical bit pattern.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::energy::EnergySnapshot;
use crate::error::{Error, Result};
use crate::model::{FluidParams, InitConfig, RadialGrid, State};
use crate::scalar::Real;
use crate::solver::SolverConfig;

/// Mesh parameters as they appear in the configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    pub r_max: T,
    pub n_cells: usize,
}

impl<T: Real> Default for GridSpec<T> {
    fn default() -> Self {
        Self {
            r_max: T::lit(21.0),
            n_cells: 800,
        }
    }
}

impl<T: Real> GridSpec<T> {
    pub fn build(&self) -> Result<RadialGrid<T>> {
        RadialGrid::new(self.r_max, self.n_cells)
    }
}

/// Fully resolved configuration of one invocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig<T> {
    pub params: FluidParams<T>,
    pub grid: GridSpec<T>,
    pub init: InitConfig<T>,
    pub solver: SolverConfig<T>,
}

impl<T: Real> Default for RunConfig<T> {
    fn default() -> Self {
        Self {
            params: FluidParams::default(),
            grid: GridSpec::default(),
            init: InitConfig::default(),
            solver: SolverConfig::default(),
        }
    }
}

fn number<T: Real>(value: &str) -> Result<T, String> {
    let x: f64 = value
        .parse()
        .map_err(|_| format!("expected a number, got {value:?}"))?;
    if !x.is_finite() {
        return Err(format!("expected a finite number, got {value:?}"));
    }
    Ok(T::lit(x))
}

fn check<T: Real>(x: T, ok: bool, rule: &str) -> Result<T, String> {
    if ok {
        Ok(x)
    } else {
        Err(format!("{rule} required, got {x}"))
    }
}

fn positive<T: Real>(value: &str, key: &str) -> Result<T, String> {
    let x: T = number(value)?;
    check(x, x > T::zero(), &format!("{key} > 0"))
}

fn non_negative<T: Real>(value: &str, key: &str) -> Result<T, String> {
    let x: T = number(value)?;
    check(x, x >= T::zero(), &format!("{key} >= 0"))
}

fn integer(value: &str, min: usize, key: &str) -> Result<usize, String> {
    let n: usize = value
        .parse()
        .map_err(|_| format!("expected a non-negative integer, got {value:?}"))?;
    if n < min {
        return Err(format!("{key} >= {min} required, got {n}"));
    }
    Ok(n)
}

const SECTIONS: [&str; 4] = ["params", "grid", "init", "solver"];

impl<T: Real> RunConfig<T> {
    fn set(&mut self, section: &str, key: &str, value: &str) -> Result<(), String> {
        let one = T::one();
        match (section, key) {
            ("params", "gamma") => {
                let x: T = number(value)?;
                self.params.gamma = check(x, x > one, "gamma > 1")?;
            }
            ("params", "mu") => self.params.mu = positive(value, key)?,
            ("params", "lambda" | "lambda_") => self.params.lambda = positive(value, "lambda")?,
            ("params", "tau") => self.params.tau = non_negative(value, key)?,
            ("params", "eps") => self.params.eps = non_negative(value, key)?,
            ("params", "a_coef") => self.params.a_coef = positive(value, key)?,
            ("grid", "r_max") => {
                let x: T = number(value)?;
                self.grid.r_max = check(x, x > one, "r_max > 1")?;
            }
            ("grid", "n_cells") => self.grid.n_cells = integer(value, 8, key)?,
            ("init", "bump_amp") => self.init.bump_amp = number(value)?,
            ("init", "bump_center") => {
                let x: T = number(value)?;
                self.init.bump_center = check(x, x > one, "bump_center > 1")?;
            }
            ("init", "bump_width") => self.init.bump_width = positive(value, key)?,
            ("init", "vel_amp") => self.init.vel_amp = number(value)?,
            ("init", "stress_perturb_amp") => self.init.stress_perturb_amp = number(value)?,
            ("solver", "cfl") => {
                let x: T = number(value)?;
                self.solver.cfl = check(x, x > T::zero() && x <= one, "0 < cfl <= 1")?;
            }
            ("solver", "t_end") => self.solver.t_end = non_negative(value, key)?,
            ("solver", "splitting") => self.solver.splitting = value.parse()?,
            ("solver", "outer_bc") => self.solver.outer_bc = value.parse()?,
            ("solver", "output_every") => self.solver.output_every = integer(value, 1, key)?,
            ("solver", "output_interval") => {
                self.solver.output_interval = Some(positive(value, key)?)
            }
            _ => return Err(format!("unknown key {key:?} in section [{section}]")),
        }
        Ok(())
    }

    /// Parses configuration text; `origin` names the source in error messages.
    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section: Option<&str> = None;
        let mut seen: Vec<(String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |msg: String| Error::Parse {
                path: origin.to_string(),
                line,
                msg,
            };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("malformed section header {content:?}")))?
                    .trim();
                let known = SECTIONS
                    .iter()
                    .find(|&&s| s == name)
                    .ok_or_else(|| err(format!("unknown section [{name}]")))?;
                section = Some(known);
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.ok_or_else(|| err(format!("key {key:?} before any section")))?;
            let canonical = format!("{sec}.{}", if key == "lambda_" { "lambda" } else { key });
            if let Some((_, first)) = seen.iter().find(|(k, _)| *k == canonical) {
                return Err(err(format!(
                    "duplicate key {key:?} (first set on line {first})"
                )));
            }
            cfg.set(sec, key, value).map_err(err)?;
            seen.push((canonical, line));
        }
        Ok(cfg)
    }

    /// Renders every key; the output parses back to an identical configuration.
    pub fn to_config_string(&self) -> String {
        let p = &self.params;
        let i = &self.init;
        let s = &self.solver;
        let mut out = String::new();
        let _ = writeln!(out, "[params]");
        let _ = writeln!(out, "gamma = {}", p.gamma);
        let _ = writeln!(out, "mu = {}", p.mu);
        let _ = writeln!(out, "lambda = {}", p.lambda);
        let _ = writeln!(out, "tau = {}", p.tau);
        let _ = writeln!(out, "eps = {}", p.eps);
        let _ = writeln!(out, "a_coef = {}", p.a_coef);
        let _ = writeln!(out, "\n[grid]");
        let _ = writeln!(out, "r_max = {}", self.grid.r_max);
        let _ = writeln!(out, "n_cells = {}", self.grid.n_cells);
        let _ = writeln!(out, "\n[init]");
        let _ = writeln!(out, "bump_amp = {}", i.bump_amp);
        let _ = writeln!(out, "bump_center = {}", i.bump_center);
        let _ = writeln!(out, "bump_width = {}", i.bump_width);
        let _ = writeln!(out, "vel_amp = {}", i.vel_amp);
        let _ = writeln!(out, "stress_perturb_amp = {}", i.stress_perturb_amp);
        let _ = writeln!(out, "\n[solver]");
        let _ = writeln!(out, "cfl = {}", s.cfl);
        let _ = writeln!(out, "t_end = {}", s.t_end);
        let _ = writeln!(out, "splitting = {}", s.splitting.as_str());
        let _ = writeln!(out, "outer_bc = {}", s.outer_bc.as_str());
        let _ = writeln!(out, "output_every = {}", s.output_every);
        if let Some(h) = s.output_interval {
            let _ = writeln!(out, "output_interval = {h}");
        }
        out
    }
}

/// Reads and validates a configuration file.
pub fn parse_config<T: Real>(path: &Path) -> Result<RunConfig<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::parse_str(&text, &path.display().to_string())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(
        fs::File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn finish(mut w: BufWriter<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn put<T: Real>(line: &mut String, x: T) {
    let _ = write!(line, "{x:.16e}");
}

pub const SNAPSHOT_HEADER: &str = "r,rho,v,s1,s2";

/// Writes `r,rho,v,s1,s2`, one row per cell.
pub fn write_snapshot<T: Real>(state: &State<T>, grid: &RadialGrid<T>, path: &Path) -> Result<()> {
    state.check_shape(grid)?;
    let mut w = create(path)?;
    let mut line = String::with_capacity(128);
    let io = |e| Error::io(path, e);
    writeln!(w, "{SNAPSHOT_HEADER}").map_err(io)?;
    for i in 0..grid.n_cells {
        line.clear();
        for (k, x) in [
            grid.centers[i],
            state.rho[i],
            state.v[i],
            state.s1[i],
            state.s2[i],
        ]
        .into_iter()
        .enumerate()
        {
            if k > 0 {
                line.push(',');
            }
            put(&mut line, x);
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    finish(w, path)
}

/// Columns of a snapshot CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTable<T> {
    pub r: Vec<T>,
    pub rho: Vec<T>,
    pub v: Vec<T>,
    pub s1: Vec<T>,
    pub s2: Vec<T>,
}

impl<T: Real> SnapshotTable<T> {
    pub fn into_state(self, t: T) -> State<T> {
        State {
            t,
            rho: self.rho,
            v: self.v,
            s1: self.s1,
            s2: self.s2,
        }
    }
}

pub fn read_snapshot<T: Real>(path: &Path) -> Result<SnapshotTable<T>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut table = SnapshotTable {
        r: Vec::new(),
        rho: Vec::new(),
        v: Vec::new(),
        s1: Vec::new(),
        s2: Vec::new(),
    };
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let err = |msg: String| Error::Parse {
            path: origin.clone(),
            line: idx + 1,
            msg,
        };
        if idx == 0 {
            if line != SNAPSHOT_HEADER {
                return Err(err(format!("expected header {SNAPSHOT_HEADER:?}")));
            }
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| err(format!("bad number {f:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != 5 {
            return Err(err(format!("expected 5 columns, got {}", values.len())));
        }
        for (col, &x) in [
            &mut table.r,
            &mut table.rho,
            &mut table.v,
            &mut table.s1,
            &mut table.s2,
        ]
        .into_iter()
        .zip(&values)
        {
            col.push(T::lit(x));
        }
    }
    Ok(table)
}

pub const DIAGNOSTICS_HEADER: &str = "t,E_inst,E_run,D_inst,mass,taylor_energy,stress_l2,\
energy_residual,mass_residual,s1_limit_err,s2_limit_err";

/// One diagnostics row; `None` fields are written empty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow<T> {
    pub energy: EnergySnapshot<T>,
    pub energy_residual: Option<T>,
    pub mass_residual: Option<T>,
    pub s1_limit_err: Option<T>,
    pub s2_limit_err: Option<T>,
}

pub fn write_diagnostics<T: Real>(rows: &[DiagnosticsRow<T>], path: &Path) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{DIAGNOSTICS_HEADER}").map_err(io)?;
    let mut line = String::with_capacity(256);
    for row in rows {
        let e = &row.energy;
        line.clear();
        let fixed = [
            e.t,
            e.e_inst,
            e.e_running,
            e.d_inst,
            e.mass,
            e.taylor_energy,
            e.stress_l2,
        ];
        for (k, x) in fixed.into_iter().enumerate() {
            if k > 0 {
                line.push(',');
            }
            put(&mut line, x);
        }
        for x in [
            row.energy_residual,
            row.mass_residual,
            row.s1_limit_err,
            row.s2_limit_err,
        ] {
            line.push(',');
            if let Some(x) = x {
                put(&mut line, x);
            }
        }
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    finish(w, path)
}

/// Provenance written next to every run's outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub command: String,
    /// Resolved configuration in the configuration file format.
    pub config_echo: String,
    pub code_version: String,
    pub grid_summary: String,
    pub params_summary: String,
    pub status: String,
    pub wall_time: Option<f64>,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new<T: Real>(command: &str, cfg: &RunConfig<T>) -> Self {
        let p = &cfg.params;
        let dr = (cfg.grid.r_max - T::one()) / T::count(cfg.grid.n_cells);
        Self {
            command: command.to_string(),
            config_echo: cfg.to_config_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            grid_summary: format!(
                "n_cells={} r_max={} dr={}",
                cfg.grid.n_cells, cfg.grid.r_max, dr
            ),
            params_summary: format!(
                "gamma={} mu={} lambda={} tau={} eps={} a_coef={}",
                p.gamma, p.mu, p.lambda, p.tau, p.eps, p.a_coef
            ),
            status: "running".to_string(),
            wall_time: None,
            warnings: Vec::new(),
        }
    }

    /// Metadata as `#` comments followed by the configuration echo, so the
    /// manifest itself is a valid configuration file.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# relaxns manifest");
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# code_version: {}", self.code_version);
        let _ = writeln!(out, "# status: {}", self.status);
        if let Some(t) = self.wall_time {
            let _ = writeln!(out, "# wall_time_s: {t:.3}");
        }
        let _ = writeln!(out, "# grid: {}", self.grid_summary);
        let _ = writeln!(out, "# params: {}", self.params_summary);
        for w in &self.warnings {
            let _ = writeln!(out, "# warning: {}", w.replace('\n', " "));
        }
        out.push_str(&self.config_echo);
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.render()).map_err(|e| Error::io(path, e))
    }
}
