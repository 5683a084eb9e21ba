//! Run configuration: a flat `key=value` file mirrored by command-line flags.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use skorokhod_core::montecarlo::SampleFormat;
use skorokhod_core::quantile::Interpolation;

use crate::CliError;

pub const OUT_DIR_ENV: &str = "SKOROKHOD_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "skorokhod-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Uniform,
    TwoPoint,
    Table,
    PaperHeavyTail,
    Koebe,
    Cos,
}

impl Dist {
    pub fn as_str(self) -> &'static str {
        match self {
            Dist::Uniform => "uniform",
            Dist::TwoPoint => "two-point",
            Dist::Table => "table",
            Dist::PaperHeavyTail => "paper-heavy-tail",
            Dist::Koebe => "koebe",
            Dist::Cos => "cos",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::from_str(s, false).ok().or(match s {
            "disc" => Some(Dist::Cos),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Interp {
    Step,
    Linear,
}

impl From<Interp> for Interpolation {
    fn from(i: Interp) -> Self {
        match i {
            Interp::Step => Interpolation::Step,
            Interp::Linear => Interpolation::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Binary,
}

impl From<Format> for SampleFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => SampleFormat::Csv,
            Format::Binary => SampleFormat::Binary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dist: Dist,
    /// Half-width of the uniform law.
    pub a: f64,
    pub lower: f64,
    pub upper: f64,
    pub table: Option<PathBuf>,
    pub interpolation: Interp,
    /// Fourier terms `N`.
    pub n_terms: usize,
    /// Analysis grid `M`.
    pub grid: usize,
    /// Boundary polyline vertices.
    pub m_b: usize,
    /// Truncation radius; `None` picks one from `max_tail_mass`.
    pub radius: Option<f64>,
    pub max_tail_mass: f64,
    pub h: f64,
    /// Absolute walk-on-spheres shell; `None` scales with the domain.
    pub eps_shell: Option<f64>,
    pub n_samples: usize,
    pub n_paths: usize,
    pub max_steps: u64,
    pub levels: usize,
    pub seed: u64,
    /// Not echoed into reports, so runs in different directories compare equal.
    #[serde(skip)]
    pub out: PathBuf,
    pub format: Format,
    pub force: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dist: Dist::Uniform,
            a: 1.0,
            lower: -1.0,
            upper: 1.0,
            table: None,
            interpolation: Interp::Step,
            n_terms: 2048,
            grid: 65536,
            m_b: 16384,
            radius: None,
            max_tail_mass: 1e-3,
            h: 1e-4,
            eps_shell: None,
            n_samples: 100_000,
            n_paths: 10_000,
            max_steps: 100_000_000,
            levels: 15,
            seed: 1,
            out: PathBuf::from(DEFAULT_OUT_DIR),
            format: Format::Csv,
            force: false,
        }
    }
}

const KEYS: [&str; 21] = [
    "dist",
    "a",
    "lower",
    "upper",
    "table",
    "interpolation",
    "n_terms",
    "grid",
    "m_b",
    "radius",
    "max_tail_mass",
    "h",
    "eps_shell",
    "n_samples",
    "n_paths",
    "max_steps",
    "levels",
    "seed",
    "out",
    "format",
    "force",
];

fn opt_f64(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| x.to_string())
}

impl RunConfig {
    /// Defaults, with the output directory taken from the environment if set.
    pub fn from_env() -> Self {
        let mut c = Self::default();
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
            c.out = PathBuf::from(dir);
        }
        c
    }

    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key}={}", self.get(key));
        }
        s
    }

    fn get(&self, key: &str) -> String {
        match key {
            "dist" => self.dist.as_str().to_string(),
            "a" => self.a.to_string(),
            "lower" => self.lower.to_string(),
            "upper" => self.upper.to_string(),
            "table" => self.table.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
            "interpolation" => match self.interpolation {
                Interp::Step => "step".into(),
                Interp::Linear => "linear".into(),
            },
            "n_terms" => self.n_terms.to_string(),
            "grid" => self.grid.to_string(),
            "m_b" => self.m_b.to_string(),
            "radius" => opt_f64(self.radius),
            "max_tail_mass" => self.max_tail_mass.to_string(),
            "h" => self.h.to_string(),
            "eps_shell" => opt_f64(self.eps_shell),
            "n_samples" => self.n_samples.to_string(),
            "n_paths" => self.n_paths.to_string(),
            "max_steps" => self.max_steps.to_string(),
            "levels" => self.levels.to_string(),
            "seed" => self.seed.to_string(),
            "out" => self.out.display().to_string(),
            "format" => match self.format {
                Format::Csv => "csv".into(),
                Format::Binary => "binary".into(),
            },
            "force" => self.force.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = || CliError::usage(format!("bad value `{value}` for `{key}`"));
        fn num<T: std::str::FromStr>(v: &str, bad: impl Fn() -> CliError) -> Result<T, CliError> {
            v.trim().parse().map_err(|_| bad())
        }
        let auto = |v: &str| -> Result<Option<f64>, CliError> {
            if v == "auto" || v.is_empty() {
                Ok(None)
            } else {
                num(v, bad).map(Some)
            }
        };
        match key {
            "dist" => self.dist = Dist::parse(value).ok_or_else(bad)?,
            "a" => self.a = num(value, bad)?,
            "lower" => self.lower = num(value, bad)?,
            "upper" => self.upper = num(value, bad)?,
            "table" => self.table = (!value.is_empty()).then(|| PathBuf::from(value)),
            "interpolation" => self.interpolation = Interp::from_str(value, false).map_err(|_| bad())?,
            "n_terms" => self.n_terms = num(value, bad)?,
            "grid" => self.grid = num(value, bad)?,
            "m_b" => self.m_b = num(value, bad)?,
            "radius" => self.radius = auto(value)?,
            "max_tail_mass" => self.max_tail_mass = num(value, bad)?,
            "h" => self.h = num(value, bad)?,
            "eps_shell" => self.eps_shell = auto(value)?,
            "n_samples" => self.n_samples = num(value, bad)?,
            "n_paths" => self.n_paths = num(value, bad)?,
            "max_steps" => self.max_steps = num(value, bad)?,
            "levels" => self.levels = num(value, bad)?,
            "seed" => self.seed = num(value, bad)?,
            "out" => self.out = PathBuf::from(value),
            "format" => self.format = Format::from_str(value, false).map_err(|_| bad())?,
            "force" => self.force = num(value, bad)?,
            _ => return Err(CliError::usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file on top of `self`. Blank lines and `#`
    /// comments are skipped.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", lineno + 1)))?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_file_text(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("a", self.a),
            ("max_tail_mass", self.max_tail_mass),
            ("h", self.h),
            ("radius", self.radius.unwrap_or(1.0)),
            ("eps_shell", self.eps_shell.unwrap_or(1.0)),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::usage(format!("`{k}` must be positive, got {v}")));
            }
        }
        let counts = [
            ("n_terms", self.n_terms as u64),
            ("grid", self.grid as u64),
            ("m_b", self.m_b as u64),
            ("n_samples", self.n_samples as u64),
            ("n_paths", self.n_paths as u64),
            ("max_steps", self.max_steps),
            ("levels", self.levels as u64),
        ];
        for (k, v) in counts {
            if v == 0 {
                return Err(CliError::usage(format!("`{k}` must be positive")));
            }
        }
        if self.dist == Dist::Table && self.table.is_none() {
            return Err(CliError::usage("`--dist table` needs `--table <csv>`"));
        }
        Ok(())
    }
}

/// Flags that override the configuration file.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// `key=value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub dist: Option<Dist>,
    /// Uniform half-width.
    #[arg(long, global = true)]
    pub a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lower: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub upper: Option<f64>,
    /// CSV quantile table with header `u,q`.
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub interpolation: Option<Interp>,
    #[arg(long, global = true)]
    pub n_terms: Option<usize>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long, global = true)]
    pub m_b: Option<usize>,
    /// Truncation radius, or `auto`.
    #[arg(long, global = true)]
    pub radius: Option<String>,
    #[arg(long, global = true)]
    pub max_tail_mass: Option<f64>,
    /// Euler step.
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Walk-on-spheres shell width, or `auto`.
    #[arg(long, global = true)]
    pub eps_shell: Option<String>,
    #[arg(long, global = true)]
    pub n_samples: Option<usize>,
    #[arg(long, global = true)]
    pub n_paths: Option<usize>,
    #[arg(long, global = true)]
    pub max_steps: Option<u64>,
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory [default: $SKOROKHOD_OUT_DIR, else ./skorokhod-out].
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Build and simulate even when solvability is not established.
    #[arg(long, global = true)]
    pub force: bool,
}

impl ConfigArgs {
    /// Defaults, then environment, then the config file, then flags.
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = RunConfig::from_env();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        macro_rules! over {
            ($($f:ident),*) => {
                $(if let Some(v) = &self.$f { c.$f = v.clone(); })*
            };
        }
        over!(dist, a, lower, upper, interpolation, n_terms, grid, m_b, max_tail_mass, h, n_samples, n_paths, max_steps, levels, seed, out, format);
        if let Some(t) = &self.table {
            c.table = Some(t.clone());
        }
        if let Some(r) = &self.radius {
            c.set("radius", r)?;
        }
        if let Some(e) = &self.eps_shell {
            c.set("eps_shell", e)?;
        }
        if self.force {
            c.force = true;
        }
        c.validate()?;
        Ok(c)
    }
}
