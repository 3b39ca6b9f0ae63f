//! Command configuration: flags, a flat `key=value` file, and defaults.

use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Serialize;

use crate::entropy::Normalization;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, Args)]
pub struct Flags {
    /// Builtin name, path to a .qop file, or an operator such as "E^2-3*E+2".
    pub input: Option<String>,
    /// Grid intervals for eigenvalue tracking.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Subsets such as "1,3", "1;2,3" or "all"; every subset when omitted.
    #[arg(long)]
    pub subsets: Option<String>,
    /// Fraction of the path traversed, in [0, 1].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Step size for ε-mode runs.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Target index for q-mode and index recursions.
    #[arg(long)]
    pub n: Option<usize>,
    /// raw, per-2pi or unit-interval.
    #[arg(long)]
    pub normalization: Option<String>,
    /// circle, half-angle or interval:LO,HI.
    #[arg(long)]
    pub parametrization: Option<String>,
    /// Regularity tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Highest WKB order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Write gnuplot columns of log|L_m(t)|.
    #[arg(long)]
    pub plot_data: bool,
    /// Exact integer arithmetic where available.
    #[arg(long)]
    pub exact: bool,
    /// Step over singular points instead of aborting.
    #[arg(long)]
    pub puncture: bool,
    /// Compare the simulated growth rate with the entropy.
    #[arg(long)]
    pub verify: bool,
    /// Start ε-mode runs from WKB seeds of the dominant branch.
    #[arg(long)]
    pub wkb_seed: bool,
    /// Allowed |rate − σ| in verify mode.
    #[arg(long)]
    pub verify_tol: Option<f64>,
    /// Output directory (default "out").
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ParamChoice {
    /// Circle for operators, half-angle A-polynomial for knots, the
    /// natural interval for ε-equations.
    Auto,
    Circle,
    HalfAngle,
    Interval { lo: f64, hi: f64 },
}

impl FromStr for ParamChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "auto" => Ok(Self::Auto),
            "circle" => Ok(Self::Circle),
            "half-angle" => Ok(Self::HalfAngle),
            _ => {
                let bounds = s
                    .strip_prefix("interval:")
                    .ok_or_else(|| Error::Invalid(format!("unknown parametrization '{s}'")))?;
                let (lo, hi) = bounds
                    .split_once(',')
                    .ok_or_else(|| Error::Invalid(format!("interval needs LO,HI: '{bounds}'")))?;
                let lo = parse_num::<f64>("parametrization", lo)?;
                let hi = parse_num::<f64>("parametrization", hi)?;
                if !(lo < hi) {
                    return Err(Error::Invalid(format!("empty interval [{lo}, {hi}]")));
                }
                Ok(Self::Interval { lo, hi })
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisConfig {
    pub input: String,
    pub parametrization: ParamChoice,
    /// Tracking grid; `None` picks the command's default.
    pub grid: Option<usize>,
    pub tol: f64,
    pub normalization: Normalization,
    pub subsets: Option<String>,
    pub alpha: f64,
    pub eps: Option<f64>,
    pub n: Option<usize>,
    pub order: usize,
    pub plot_data: bool,
    pub exact: bool,
    pub puncture: bool,
    pub verify: bool,
    pub wkb_seed: bool,
    pub verify_tol: f64,
    pub out: PathBuf,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            input: String::new(),
            parametrization: ParamChoice::Auto,
            grid: None,
            tol: 1e-8,
            normalization: Normalization::Raw,
            subsets: None,
            alpha: 1.0,
            eps: None,
            n: None,
            order: 1,
            plot_data: false,
            exact: false,
            puncture: false,
            verify: false,
            wkb_seed: false,
            verify_tol: 2e-3,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::Invalid(format!("bad value for {key}: '{v}'")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Invalid(format!("bad boolean for {key}: '{v}'"))),
    }
}

impl AnalysisConfig {
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key.trim().replace('_', "-").as_str() {
            "input" => self.input = v.trim().to_string(),
            "grid" => self.grid = Some(parse_num(key, v)?),
            "subsets" => self.subsets = Some(v.trim().to_string()),
            "alpha" => self.alpha = parse_num(key, v)?,
            "eps" => self.eps = Some(parse_num(key, v)?),
            "n" => self.n = Some(parse_num(key, v)?),
            "normalization" => self.normalization = v.parse()?,
            "parametrization" => self.parametrization = v.parse()?,
            "tol" => self.tol = parse_num(key, v)?,
            "order" => self.order = parse_num(key, v)?,
            "plot-data" => self.plot_data = parse_bool(key, v)?,
            "exact" => self.exact = parse_bool(key, v)?,
            "puncture" => self.puncture = parse_bool(key, v)?,
            "verify" => self.verify = parse_bool(key, v)?,
            "wkb-seed" => self.wkb_seed = parse_bool(key, v)?,
            "verify-tol" => self.verify_tol = parse_num(key, v)?,
            "out" => self.out = PathBuf::from(v.trim()),
            other => return Err(Error::Invalid(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Apply `key=value` lines; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("config line {}: expected key=value", i + 1)))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &FsPath) -> Result<()> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.apply_file_text(&text)
    }

    /// Defaults, then the config file, then flags.
    pub fn from_flags(f: &Flags) -> Result<Self> {
        let mut c = Self::default();
        if let Some(p) = &f.config {
            c.load_file(p)?;
        }
        if let Some(v) = &f.input {
            c.input = v.clone();
        }
        if let Some(v) = f.grid {
            c.grid = Some(v);
        }
        if let Some(v) = &f.subsets {
            c.subsets = Some(v.clone());
        }
        if let Some(v) = f.alpha {
            c.alpha = v;
        }
        if let Some(v) = f.eps {
            c.eps = Some(v);
        }
        if let Some(v) = f.n {
            c.n = Some(v);
        }
        if let Some(v) = &f.normalization {
            c.normalization = v.parse()?;
        }
        if let Some(v) = &f.parametrization {
            c.parametrization = v.parse()?;
        }
        if let Some(v) = f.tol {
            c.tol = v;
        }
        if let Some(v) = f.order {
            c.order = v;
        }
        if let Some(v) = f.verify_tol {
            c.verify_tol = v;
        }
        if let Some(v) = &f.out {
            c.out = v.clone();
        }
        c.plot_data |= f.plot_data;
        c.exact |= f.exact;
        c.puncture |= f.puncture;
        c.verify |= f.verify;
        c.wkb_seed |= f.wkb_seed;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input.is_empty() {
            return Err(Error::Invalid("no input operator or builtin given".into()));
        }
        if !(self.tol > 0.0) || !(self.verify_tol > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if let Some(g) = self.grid {
            if g < 16 {
                return Err(Error::Invalid(format!("grid {g} < 16")));
            }
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Invalid(format!("alpha = {} outside [0, 1]", self.alpha)));
        }
        if let Some(e) = self.eps {
            if !(e > 0.0) {
                return Err(Error::Invalid(format!("eps = {e} must be positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut c = AnalysisConfig::default();
        c.apply_file_text("# run\ninput = figure8\ngrid=1024\nsubsets=1,3\nplot-data=true\n").unwrap();
        assert_eq!(c.grid, Some(1024));
        assert!(c.plot_data);
        let f = Flags { grid: Some(2048), ..Flags::default() };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.cfg");
        fs::write(&p, "input=figure8\ngrid=1024\n").unwrap();
        let c = AnalysisConfig::from_flags(&Flags { config: Some(p), ..f }).unwrap();
        assert_eq!(c.grid, Some(2048));
        assert_eq!(c.input, "figure8");
    }

    #[test]
    fn rejects_bad_values() {
        let mut c = AnalysisConfig::default();
        assert!(c.apply_file_text("grid").is_err());
        assert!(c.set("colour", "red").is_err());
        c.input = "E-2".into();
        c.grid = Some(8);
        assert!(c.validate().is_err());
        assert_eq!("interval:0,0.5".parse::<ParamChoice>().unwrap(), ParamChoice::Interval { lo: 0.0, hi: 0.5 });
        assert!("interval:1,0".parse::<ParamChoice>().is_err());
    }
}
