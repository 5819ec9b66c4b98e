//! Run configuration files: one `key = value` per line, `#` starts a comment.
//! Unknown or repeated keys are rejected.

use std::path::PathBuf;
use std::str::FromStr;

use rtfm_core::forecast::Standardization;
use rtfm_core::rank::RhoRule;
use rtfm_core::simulate::{Dependence, Innovation, OutlierTarget};
use rtfm_core::TruncationLevel;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum RanksSpec {
    Auto,
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauSpec {
    Cv,
    Fixed(TruncationLevel),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaSpec {
    Tau,
    Fixed(TruncationLevel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForecastCv {
    Once,
    PerWindow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub dims: Option<Vec<usize>>,
    pub n: usize,
    pub true_ranks: Option<Vec<usize>>,
    pub ranks: Option<RanksSpec>,
    pub r_bar: Option<Vec<usize>>,
    pub rho: RhoRule,
    pub tau: TauSpec,
    pub kappa: KappaSpec,
    pub iterations: usize,
    pub grid_size: usize,
    pub folds: usize,
    pub seed: u64,
    pub replications: usize,
    pub phi: Option<f64>,
    pub psi: Option<f64>,
    pub factor_dist: Innovation,
    pub idio_dist: Innovation,
    pub dependence: Dependence,
    pub outliers: Option<OutlierTarget>,
    pub varrho: f64,
    pub window: usize,
    pub horizons: usize,
    pub standardization: Standardization,
    pub forecast_cv: ForecastCv,
    pub save_data: bool,
    pub data: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: "T1".into(),
            dims: None,
            n: 100,
            true_ranks: None,
            ranks: None,
            r_bar: None,
            rho: RhoRule::ReciprocalLeading,
            tau: TauSpec::Cv,
            kappa: KappaSpec::Tau,
            iterations: 2,
            grid_size: 50,
            folds: 3,
            seed: 0,
            replications: 1,
            phi: None,
            psi: None,
            factor_dist: Innovation::Gaussian,
            idio_dist: Innovation::Gaussian,
            dependence: Dependence::Independent,
            outliers: None,
            varrho: 0.0,
            window: 120,
            horizons: 24,
            standardization: Standardization::MeanSd,
            forecast_cv: ForecastCv::Once,
            save_data: false,
            data: None,
            out: PathBuf::from("."),
        }
    }
}

pub const KEYS: &[&str] = &[
    "scenario",
    "dims",
    "n",
    "true_ranks",
    "ranks",
    "r_bar",
    "rho",
    "tau",
    "kappa",
    "iterations",
    "grid_size",
    "folds",
    "seed",
    "replications",
    "phi",
    "psi",
    "factor_dist",
    "idio_dist",
    "dependence",
    "outliers",
    "varrho",
    "window",
    "horizons",
    "standardization",
    "forecast_cv",
    "save_data",
    "data",
    "out",
];

fn bad(key: &str, value: &str, want: &str) -> CliError {
    CliError::Config(format!("{key} = '{value}': expected {want}"))
}

fn num<T: FromStr>(key: &str, value: &str, want: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| bad(key, value, want))
}

pub fn parse_list(key: &str, value: &str) -> Result<Vec<usize>, CliError> {
    let v: Vec<usize> = value
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| bad(key, value, "a comma-separated list of positive integers"))?;
    if v.is_empty() || v.contains(&0) {
        return Err(bad(key, value, "a comma-separated list of positive integers"));
    }
    Ok(v)
}

fn level(key: &str, value: &str) -> Result<TruncationLevel, CliError> {
    let v: f64 = num(key, value, "a positive number or 'inf'")?;
    TruncationLevel::new(v).map_err(|_| bad(key, value, "a positive number or 'inf'"))
}

pub fn parse_ranks(value: &str) -> Result<RanksSpec, CliError> {
    if value == "auto" {
        Ok(RanksSpec::Auto)
    } else {
        Ok(RanksSpec::Fixed(parse_list("ranks", value)?))
    }
}

pub fn parse_tau(value: &str) -> Result<TauSpec, CliError> {
    if value == "cv" {
        Ok(TauSpec::Cv)
    } else {
        Ok(TauSpec::Fixed(level("tau", value)?))
    }
}

pub fn parse_kappa(value: &str) -> Result<KappaSpec, CliError> {
    if value == "tau" {
        Ok(KappaSpec::Tau)
    } else {
        Ok(KappaSpec::Fixed(level("kappa", value)?))
    }
}

fn parse_rho(value: &str) -> Result<RhoRule, CliError> {
    let want = "'reciprocal', 'relative:<c>' or 'fixed:<v>'";
    let rule = match value.split_once(':') {
        None if value == "reciprocal" => RhoRule::ReciprocalLeading,
        Some(("relative", c)) => RhoRule::RelativeToLeading(num("rho", c, want)?),
        Some(("fixed", v)) => RhoRule::Fixed(num("rho", v, want)?),
        _ => return Err(bad("rho", value, want)),
    };
    Ok(rule)
}

fn rho_text(rule: RhoRule) -> String {
    match rule {
        RhoRule::ReciprocalLeading => "reciprocal".into(),
        RhoRule::RelativeToLeading(c) => format!("relative:{c}"),
        RhoRule::Fixed(v) => format!("fixed:{v}"),
    }
}

fn dist_text(d: Innovation) -> &'static str {
    match d {
        Innovation::Gaussian => "gaussian",
        Innovation::T3Scaled => "t3",
        Innovation::Stable { .. } => "stable",
        Innovation::SkewT3 { .. } => "skewt3",
    }
}

fn list_text(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected 'key = value'", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(CliError::Config(format!("line {}: key '{key}' given twice", lineno + 1)));
            }
            cfg.set(key, value)?;
            seen.push(key.to_string());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "scenario" => {
                let s = value.to_ascii_uppercase();
                if !["T1", "T2", "T3", "V1", "V2", "V3", "V4", "V5"].contains(&s.as_str()) {
                    return Err(bad(key, value, "one of T1, T2, T3, V1..V5"));
                }
                self.scenario = s;
            }
            "dims" => self.dims = Some(parse_list(key, value)?),
            "n" => self.n = num(key, value, "a positive integer")?,
            "true_ranks" => self.true_ranks = Some(parse_list(key, value)?),
            "ranks" => self.ranks = Some(parse_ranks(value)?),
            "r_bar" => self.r_bar = Some(parse_list(key, value)?),
            "rho" => self.rho = parse_rho(value)?,
            "tau" => self.tau = parse_tau(value)?,
            "kappa" => self.kappa = parse_kappa(value)?,
            "iterations" => self.iterations = num(key, value, "a non-negative integer")?,
            "grid_size" => self.grid_size = num(key, value, "a positive integer")?,
            "folds" => self.folds = num(key, value, "a positive integer")?,
            "seed" => self.seed = num(key, value, "an unsigned 64-bit integer")?,
            "replications" => self.replications = num(key, value, "a positive integer")?,
            "phi" => self.phi = Some(num(key, value, "a number in (-1, 1)")?),
            "psi" => self.psi = Some(num(key, value, "a number in (-1, 1)")?),
            "factor_dist" | "idio_dist" => {
                let d = Innovation::from_str(value).map_err(|_| bad(key, value, "gaussian, t3, stable or skewt3"))?;
                if key == "factor_dist" {
                    self.factor_dist = d;
                } else {
                    self.idio_dist = d;
                }
            }
            "dependence" => {
                self.dependence = match value {
                    "independent" => Dependence::Independent,
                    "dependent" => Dependence::Dependent,
                    _ => return Err(bad(key, value, "'independent' or 'dependent'")),
                }
            }
            "outliers" => {
                self.outliers = match value {
                    "none" => None,
                    "idiosyncratic" => Some(OutlierTarget::Idiosyncratic),
                    "factor" => Some(OutlierTarget::Factor),
                    _ => return Err(bad(key, value, "none, idiosyncratic or factor")),
                }
            }
            "varrho" => self.varrho = num(key, value, "a proportion in [0, 1)")?,
            "window" => self.window = num(key, value, "a positive integer")?,
            "horizons" => self.horizons = num(key, value, "a positive integer")?,
            "standardization" => {
                self.standardization =
                    Standardization::from_str(value).map_err(|_| bad(key, value, "mean_sd, median_mad or none"))?
            }
            "forecast_cv" => {
                self.forecast_cv = match value {
                    "once" => ForecastCv::Once,
                    "per_window" => ForecastCv::PerWindow,
                    _ => return Err(bad(key, value, "'once' or 'per_window'")),
                }
            }
            "save_data" => self.save_data = num(key, value, "true or false")?,
            "data" => self.data = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            _ => return Err(CliError::Config(format!("unknown key '{key}'; known keys: {}", KEYS.join(", ")))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("n", self.n),
            ("replications", self.replications),
            ("grid_size", self.grid_size),
            ("folds", self.folds),
            ("window", self.window),
            ("horizons", self.horizons),
        ];
        for (k, v) in positive {
            if v == 0 {
                return Err(CliError::Config(format!("{k} must be positive")));
            }
        }
        for (k, v) in [("phi", self.phi), ("psi", self.psi)] {
            if let Some(a) = v {
                if !(a.abs() < 1.0) {
                    return Err(CliError::Config(format!("{k} must lie in (-1, 1)")));
                }
            }
        }
        if !(0.0..1.0).contains(&self.varrho) {
            return Err(CliError::Config("varrho must lie in [0, 1)".into()));
        }
        if self.outliers.is_some() && self.varrho == 0.0 {
            return Err(CliError::Config("outliers requested with varrho = 0".into()));
        }
        Ok(())
    }

    pub fn is_vector_scenario(&self) -> bool {
        self.scenario.starts_with('V')
    }

    /// Every setting as `key=value` pairs in a fixed order, with `out`
    /// omitted; feeding the pairs back as a configuration repeats the run.
    pub fn audit(&self, command: &str) -> String {
        let mut kv: Vec<(&str, String)> = vec![("cmd", command.to_string())];
        kv.push(("scenario", self.scenario.clone()));
        if let Some(d) = &self.dims {
            kv.push(("dims", list_text(d)));
        }
        kv.push(("n", self.n.to_string()));
        if let Some(r) = &self.true_ranks {
            kv.push(("true_ranks", list_text(r)));
        }
        match &self.ranks {
            Some(RanksSpec::Auto) => kv.push(("ranks", "auto".into())),
            Some(RanksSpec::Fixed(r)) => kv.push(("ranks", list_text(r))),
            None => {}
        }
        if let Some(r) = &self.r_bar {
            kv.push(("r_bar", list_text(r)));
        }
        kv.push(("rho", rho_text(self.rho)));
        kv.push((
            "tau",
            match self.tau {
                TauSpec::Cv => "cv".into(),
                TauSpec::Fixed(t) => t.to_string(),
            },
        ));
        kv.push((
            "kappa",
            match self.kappa {
                KappaSpec::Tau => "tau".into(),
                KappaSpec::Fixed(t) => t.to_string(),
            },
        ));
        kv.push(("iterations", self.iterations.to_string()));
        kv.push(("grid_size", self.grid_size.to_string()));
        kv.push(("folds", self.folds.to_string()));
        kv.push(("seed", self.seed.to_string()));
        kv.push(("replications", self.replications.to_string()));
        if let Some(a) = self.phi {
            kv.push(("phi", a.to_string()));
        }
        if let Some(a) = self.psi {
            kv.push(("psi", a.to_string()));
        }
        kv.push(("factor_dist", dist_text(self.factor_dist).into()));
        kv.push(("idio_dist", dist_text(self.idio_dist).into()));
        kv.push((
            "dependence",
            match self.dependence {
                Dependence::Independent => "independent".into(),
                Dependence::Dependent => "dependent".into(),
            },
        ));
        kv.push((
            "outliers",
            match self.outliers {
                None => "none".into(),
                Some(OutlierTarget::Idiosyncratic) => "idiosyncratic".into(),
                Some(OutlierTarget::Factor) => "factor".into(),
            },
        ));
        kv.push(("varrho", self.varrho.to_string()));
        kv.push(("window", self.window.to_string()));
        kv.push(("horizons", self.horizons.to_string()));
        kv.push((
            "standardization",
            match self.standardization {
                Standardization::MeanSd => "mean_sd".into(),
                Standardization::MedianMad => "median_mad".into(),
                Standardization::None => "none".into(),
            },
        ));
        kv.push((
            "forecast_cv",
            match self.forecast_cv {
                ForecastCv::Once => "once".into(),
                ForecastCv::PerWindow => "per_window".into(),
            },
        ));
        kv.push(("save_data", self.save_data.to_string()));
        if let Some(d) = &self.data {
            kv.push(("data", d.display().to_string()));
        }
        kv.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }

    /// Inverse of [`RunConfig::audit`]: returns the command and settings.
    pub fn from_audit(line: &str) -> Result<(String, Self), CliError> {
        let mut cfg = RunConfig::default();
        let mut command = None;
        for tok in line.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| CliError::Config(format!("bad audit token '{tok}'")))?;
            if k == "cmd" {
                command = Some(v.to_string());
            } else {
                cfg.set(k, v)?;
            }
        }
        let command = command.ok_or_else(|| CliError::Config("audit line names no command".into()))?;
        Ok((command, cfg))
    }
}
