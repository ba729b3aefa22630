//! Run configuration: flat `key = value` files overridden by flags, resolved
//! against defaults and validated before any computation starts.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use condcop::sim::{CensoringLevel, TauShape};
use condcop::{log_spaced, CensoringScheme, CopulaFamily, LocalOptimizer, MarginKind};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Every recognised key with its default value and a short description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("family", "clayton", "copula family: clayton, frank or gumbel"),
    ("margins", "weibull", "margin estimator: weibull or beran"),
    ("scheme", "univariate", "bootstrap censoring scheme: univariate or non-univariate"),
    ("seed", "1", "master random seed"),
    ("replicates", "1000", "bootstrap replicates for `test`"),
    ("band_replicates", "0", "cluster bootstrap replicates for `fit` bands (0 = none)"),
    ("band_level", "0.9", "coverage of the pointwise bands"),
    ("copula_grid", "auto", "copula bandwidth candidates: auto, log:LO:HI:K or a comma list"),
    ("margin_grid", "auto", "Beran bandwidth candidates for both margins"),
    ("margin_grid1", "inherit", "Beran bandwidth candidates for the first margin"),
    ("margin_grid2", "inherit", "Beran bandwidth candidates for the second margin"),
    ("h_copula", "select", "fixed copula bandwidth, or `select`"),
    ("h_margin1", "select", "fixed first Beran bandwidth, or `select`"),
    ("h_margin2", "select", "fixed second Beran bandwidth, or `select`"),
    ("grid_points", "50", "evaluation points across the covariate range"),
    ("degree", "1", "local polynomial degree (0 or 1)"),
    ("optimizer", "newton", "local maximizer: newton or nelder-mead"),
    ("alpha", "0.05", "test level"),
    ("families", "clayton", "simulation: copula families"),
    ("shapes", "constant,convex,concave", "simulation: tau shapes"),
    ("censoring", "none,low,moderate", "simulation: censoring levels"),
    ("margin_kinds", "weibull", "simulation: margin estimators"),
    ("sample_sizes", "250", "simulation: clusters per dataset"),
    ("study", "estimation", "simulation: estimation, power or both"),
    ("m", "50", "simulation: estimation replicates"),
    ("power_m", "50", "simulation: power replicates"),
    ("sim_replicates", "100", "simulation: bootstrap replicates per power replicate"),
    ("full_scale", "false", "simulation: use M = 500 (estimation) and M = 200 (power)"),
];

/// Bandwidth candidates before the data range is known.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Ten log-spaced values from 5% of the covariate range to the range.
    Auto,
    Values(Vec<f64>),
}

impl GridSpec {
    pub fn resolve(&self, range: f64) -> CliResult<Vec<f64>> {
        match self {
            GridSpec::Values(v) => Ok(v.clone()),
            GridSpec::Auto if range > 0.0 && range.is_finite() => {
                Ok(log_spaced(0.05 * range, range, 10))
            }
            GridSpec::Auto => Err(CliError::Data(
                "covariate has no spread; give an explicit bandwidth grid".into(),
            )),
        }
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(GridSpec::Auto);
        }
        let values = if let Some(rest) = s.strip_prefix("log:") {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(format!("expected log:LO:HI:K, got `{s}`"));
            }
            let lo: f64 = parts[0].parse().map_err(|_| format!("bad grid bound `{}`", parts[0]))?;
            let hi: f64 = parts[1].parse().map_err(|_| format!("bad grid bound `{}`", parts[1]))?;
            let k: usize = parts[2].parse().map_err(|_| format!("bad grid size `{}`", parts[2]))?;
            if !(lo > 0.0 && hi >= lo && k >= 1) {
                return Err(format!("invalid log grid `{s}`"));
            }
            log_spaced(lo, hi, k)
        } else {
            parse_list::<f64>(s)?
        };
        if values.is_empty() || values.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(format!("bandwidths must be positive, got `{s}`"));
        }
        Ok(GridSpec::Values(values))
    }
}

/// What `simulate` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Estimation,
    Power,
    Both,
}

impl Study {
    pub fn estimation(self) -> bool {
        matches!(self, Study::Estimation | Study::Both)
    }

    pub fn power(self) -> bool {
        matches!(self, Study::Power | Study::Both)
    }
}

impl FromStr for Study {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "estimation" => Ok(Study::Estimation),
            "power" => Ok(Study::Power),
            "both" => Ok(Study::Both),
            other => Err(format!("unknown study `{other}`")),
        }
    }
}

fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| p.parse::<T>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

fn optional(s: &str) -> Result<Option<f64>, String> {
    if s == "select" {
        return Ok(None);
    }
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(Some(v)),
        _ => Err(format!("expected a positive bandwidth or `select`, got `{s}`")),
    }
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Resolved key/value pairs, defaults included.
    pub values: BTreeMap<String, String>,
    pub family: CopulaFamily,
    pub margins: MarginKind,
    pub scheme: CensoringScheme,
    pub seed: u64,
    pub replicates: usize,
    pub band_replicates: usize,
    pub band_level: f64,
    pub copula_grid: GridSpec,
    pub margin_grid1: GridSpec,
    pub margin_grid2: GridSpec,
    pub h_copula: Option<f64>,
    pub h_margin1: Option<f64>,
    pub h_margin2: Option<f64>,
    pub grid_points: usize,
    pub degree: u8,
    pub optimizer: LocalOptimizer,
    pub alpha: f64,
    pub families: Vec<CopulaFamily>,
    pub shapes: Vec<TauShape>,
    pub censoring: Vec<CensoringLevel>,
    pub margin_kinds: Vec<MarginKind>,
    pub sample_sizes: Vec<usize>,
    pub study: Study,
    pub m: usize,
    pub power_m: usize,
    pub sim_replicates: usize,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("config line {}: expected key = value", i + 1))
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> CliResult<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

impl RunConfig {
    /// Applies `layers` in order over the defaults and validates the result.
    pub fn resolve<I>(layers: I) -> CliResult<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut values: BTreeMap<String, String> = KEYS
            .iter()
            .map(|(k, v, _)| (k.to_string(), v.to_string()))
            .collect();
        for (k, v) in layers {
            if !values.contains_key(&k) {
                return Err(CliError::Config(format!("unknown key `{k}`")));
            }
            values.insert(k, v);
        }
        Self::from_values(values)
    }

    fn from_values(mut values: BTreeMap<String, String>) -> CliResult<Self> {
        if values["full_scale"] == "true" {
            values.insert("m".into(), "500".into());
            values.insert("power_m".into(), "200".into());
        } else if values["full_scale"] != "false" {
            return Err(CliError::Config("full_scale must be true or false".into()));
        }
        for side in ["margin_grid1", "margin_grid2"] {
            if values[side] == "inherit" {
                let shared = values["margin_grid"].clone();
                values.insert(side.into(), shared);
            }
        }
        let get = |k: &str| values[k].clone();
        fn typed<T: FromStr>(key: &str, raw: &str) -> CliResult<T>
        where
            T::Err: std::fmt::Display,
        {
            raw.parse::<T>()
                .map_err(|e| CliError::Config(format!("{key}: {e}")))
        }
        fn list<T: FromStr>(key: &str, raw: &str) -> CliResult<Vec<T>>
        where
            T::Err: std::fmt::Display,
        {
            let v = parse_list::<T>(raw).map_err(|e| CliError::Config(format!("{key}: {e}")))?;
            if v.is_empty() {
                return Err(CliError::Config(format!("{key}: empty list")));
            }
            Ok(v)
        }
        let bw = |k: &str| optional(&values[k]).map_err(|e| CliError::Config(format!("{k}: {e}")));
        let positive = |k: &str| -> CliResult<usize> {
            let v: usize = typed(k, &values[k])?;
            if v == 0 {
                return Err(CliError::Config(format!("{k} must be at least 1")));
            }
            Ok(v)
        };

        let cfg = RunConfig {
            family: typed("family", &get("family"))?,
            margins: typed("margins", &get("margins"))?,
            scheme: typed("scheme", &get("scheme"))?,
            seed: typed("seed", &get("seed"))?,
            replicates: positive("replicates")?,
            band_replicates: typed("band_replicates", &get("band_replicates"))?,
            band_level: typed("band_level", &get("band_level"))?,
            copula_grid: typed("copula_grid", &get("copula_grid"))?,
            margin_grid1: typed("margin_grid1", &get("margin_grid1"))?,
            margin_grid2: typed("margin_grid2", &get("margin_grid2"))?,
            h_copula: bw("h_copula")?,
            h_margin1: bw("h_margin1")?,
            h_margin2: bw("h_margin2")?,
            grid_points: positive("grid_points")?,
            degree: typed("degree", &get("degree"))?,
            optimizer: match get("optimizer").as_str() {
                "newton" => LocalOptimizer::Newton,
                "nelder-mead" => LocalOptimizer::NelderMead,
                other => return Err(CliError::Config(format!("optimizer: unknown `{other}`"))),
            },
            alpha: typed("alpha", &get("alpha"))?,
            families: list("families", &get("families"))?,
            shapes: list("shapes", &get("shapes"))?,
            censoring: list("censoring", &get("censoring"))?,
            margin_kinds: list("margin_kinds", &get("margin_kinds"))?,
            sample_sizes: list("sample_sizes", &get("sample_sizes"))?,
            study: typed("study", &get("study"))?,
            m: positive("m")?,
            power_m: positive("power_m")?,
            sim_replicates: positive("sim_replicates")?,
            values,
        };
        if cfg.degree > 1 {
            return Err(CliError::Config("degree must be 0 or 1".into()));
        }
        if !(0.0..=1.0).contains(&cfg.alpha) {
            return Err(CliError::Config("alpha must lie in [0, 1]".into()));
        }
        if !(cfg.band_level > 0.0 && cfg.band_level < 1.0) {
            return Err(CliError::Config("band_level must lie in (0, 1)".into()));
        }
        if cfg.m < 2 && cfg.study.estimation() {
            return Err(CliError::Config("m must be at least 2".into()));
        }
        if cfg.sample_sizes.contains(&0) {
            return Err(CliError::Config("sample_sizes must be positive".into()));
        }
        Ok(cfg)
    }

    /// Canonical `key=value` lines in key order.
    pub fn canonical(&self) -> String {
        self.values
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kv(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::resolve(Vec::new()).unwrap();
        assert_eq!(c.family, CopulaFamily::Clayton);
        assert_eq!(c.copula_grid, GridSpec::Auto);
        assert_eq!(c.h_copula, None);
        assert_eq!(c.shapes.len(), 3);
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn later_layers_win() {
        let c = RunConfig::resolve(kv(&[("seed", "3"), ("seed", "9"), ("h_copula", "2.5")])).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.h_copula, Some(2.5));
        assert!(c.canonical().contains("seed=9\n"));
    }

    #[test]
    fn grids_parse() {
        assert_eq!("auto".parse::<GridSpec>().unwrap(), GridSpec::Auto);
        assert_eq!("1, 2".parse::<GridSpec>().unwrap(), GridSpec::Values(vec![1.0, 2.0]));
        match "log:3:57:10".parse::<GridSpec>().unwrap() {
            GridSpec::Values(v) => {
                assert_eq!(v.len(), 10);
                assert_eq!(v[0], 3.0);
                assert_eq!(v[9], 57.0);
            }
            GridSpec::Auto => panic!(),
        }
        assert!("log:0:1:3".parse::<GridSpec>().is_err());
        assert!("1,-2".parse::<GridSpec>().is_err());
    }

    #[test]
    fn margin_grids_inherit() {
        let c = RunConfig::resolve(kv(&[("margin_grid", "1,2"), ("margin_grid2", "5")])).unwrap();
        assert_eq!(c.margin_grid1, GridSpec::Values(vec![1.0, 2.0]));
        assert_eq!(c.margin_grid2, GridSpec::Values(vec![5.0]));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for bad in [
            ("family", "t"),
            ("nonsense", "1"),
            ("degree", "2"),
            ("alpha", "1.5"),
            ("replicates", "0"),
            ("h_copula", "-1"),
            ("full_scale", "yes"),
        ] {
            let err = RunConfig::resolve(kv(&[bad])).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad:?}");
        }
    }

    #[test]
    fn full_scale_sets_replicate_counts() {
        let c = RunConfig::resolve(kv(&[("full_scale", "true")])).unwrap();
        assert_eq!((c.m, c.power_m), (500, 200));
    }

    #[test]
    fn file_syntax() {
        let pairs = parse_config_text("# comment\nfamily = frank  # trailing\n\nseed=4\n").unwrap();
        assert_eq!(pairs, kv(&[("family", "frank"), ("seed", "4")]));
        assert!(parse_config_text("family frank").is_err());
    }
}
