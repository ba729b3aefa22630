//! The `fit`, `test` and `simulate` commands.

use std::path::Path;

use condcop::sim::{CensoringLevel, TauShape};
use condcop::{
    cv_copula, cv_joint_with, fit_constant, fit_curve, fit_linear_calibration, fit_margins,
    par, BandwidthChoice, BandwidthGrid, CalibrationFit, CopulaSample, FittedMargin,
    FittedMargins, GlrResult, GlrSetup, LinearCalibration, LocalFitConfig, MarginKind,
    MarginSpec, Observation, RandomStream, Scenario, StudyConfig, WeibullFit,
};
use serde::Serialize;

use crate::config::{GridSpec, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::{num, out_file, write_json, write_text, Provenance, Table};
use crate::svg;

/// Dataset plus the raw bytes it was parsed from.
pub struct Input {
    pub data: Vec<Observation>,
    pub bytes: Vec<u8>,
}

impl Input {
    pub fn read(path: &Path) -> CliResult<Self> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::Data(format!("{} is not UTF-8 text", path.display())))?;
        let data = crate::dataset::parse_dataset(text)?;
        Ok(Self { data, bytes })
    }
}

fn x_range(data: &[Observation]) -> (f64, f64) {
    data.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| (lo.min(o.x), hi.max(o.x)))
}

fn linspace(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..k)
        .map(|i| if i + 1 == k { hi } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 })
        .collect()
}

fn template(cfg: &RunConfig) -> LocalFitConfig {
    LocalFitConfig::new(cfg.family, 1.0)
        .with_degree(cfg.degree)
        .with_optimizer(cfg.optimizer)
}

fn fixed_or(grid: &GridSpec, fixed: Option<f64>, range: f64) -> CliResult<Vec<f64>> {
    match fixed {
        Some(h) => Ok(vec![h]),
        None => grid.resolve(range),
    }
}

/// Bandwidths for `data`: fixed values where configured, cross-validation
/// over the configured grids otherwise.
pub fn select_bandwidths(cfg: &RunConfig, data: &[Observation]) -> CliResult<BandwidthChoice> {
    let (lo, hi) = x_range(data);
    let range = hi - lo;
    match cfg.margins {
        MarginKind::Weibull => {
            if let Some(h) = cfg.h_copula {
                return Ok(BandwidthChoice::fixed(h, None));
            }
            let margins = fit_margins(data, &MarginSpec::Weibull)?;
            let sample = CopulaSample::from_margins(data, &margins)?;
            Ok(cv_copula(&sample, &template(cfg), &cfg.copula_grid.resolve(range)?)?)
        }
        MarginKind::Beran => {
            if let (Some(hc), Some(h1), Some(h2)) = (cfg.h_copula, cfg.h_margin1, cfg.h_margin2) {
                return Ok(BandwidthChoice::fixed(hc, Some((h1, h2))));
            }
            let grid = BandwidthGrid {
                copula: fixed_or(&cfg.copula_grid, cfg.h_copula, range)?,
                margins: Some((
                    fixed_or(&cfg.margin_grid1, cfg.h_margin1, range)?,
                    fixed_or(&cfg.margin_grid2, cfg.h_margin2, range)?,
                )),
            };
            Ok(cv_joint_with(data, &template(cfg), &grid)?)
        }
    }
}

#[derive(Debug, Serialize)]
struct MarginReport {
    kind: MarginKind,
    first: Option<WeibullFit>,
    second: Option<WeibullFit>,
    h_margin1: Option<f64>,
    h_margin2: Option<f64>,
}

impl MarginReport {
    fn new(m: &FittedMargins) -> Self {
        let w = |f: &FittedMargin| f.weibull().copied();
        let (h1, h2) = match m.spec {
            MarginSpec::Beran { h1, h2 } => (Some(h1), Some(h2)),
            MarginSpec::Weibull => (None, None),
        };
        Self {
            kind: m.spec.kind(),
            first: w(&m.first),
            second: w(&m.second),
            h_margin1: h1,
            h_margin2: h2,
        }
    }
}

/// Type-7 sample quantile of sorted finite values.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * p;
            let i = h.floor() as usize;
            if i + 1 >= n {
                sorted[n - 1]
            } else {
                sorted[i] + (h - i as f64) * (sorted[i + 1] - sorted[i])
            }
        }
    }
}

/// Pointwise percentile bands from refits on clusters resampled with
/// replacement. Replicate `b` uses stream `(seed, b)`.
fn bootstrap_bands(
    data: &[Observation],
    spec: &MarginSpec,
    local: &LocalFitConfig,
    grid: &[f64],
    replicates: usize,
    seed: u64,
    level: f64,
) -> (Vec<f64>, Vec<f64>, usize) {
    let n = data.len();
    let curves = par::map_range(replicates, |b| {
        let mut rng = RandomStream::derived(seed, b as u64);
        let boot: Vec<Observation> = (0..n).map(|_| data[rng.index(n)]).collect();
        fit_margins(&boot, spec)
            .and_then(|m| CopulaSample::from_margins(&boot, &m))
            .and_then(|s| fit_curve(&s, grid, local))
            .ok()
            .map(|c| c.tau_hat)
    });
    let failed = curves.iter().filter(|c| c.is_none()).count();
    let curves: Vec<Vec<f64>> = curves.into_iter().flatten().collect();
    let (plo, phi) = ((1.0 - level) / 2.0, (1.0 + level) / 2.0);
    let mut lo = Vec::with_capacity(grid.len());
    let mut hi = Vec::with_capacity(grid.len());
    for g in 0..grid.len() {
        let mut v: Vec<f64> = curves.iter().map(|c| c[g]).filter(|t| t.is_finite()).collect();
        v.sort_by(f64::total_cmp);
        lo.push(quantile(&v, plo));
        hi.push(quantile(&v, phi));
    }
    (lo, hi, failed)
}

#[derive(Debug, Serialize)]
struct FitReport<'a> {
    family: condcop::CopulaFamily,
    n: usize,
    margins: MarginReport,
    bandwidths: &'a BandwidthChoice,
    curve: &'a CalibrationFit,
    band_level: Option<f64>,
    band_replicates: usize,
    band_failed: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Fits the calibration curve and writes `curve.csv`, `curve.svg` and
/// `fit.json` into `out`.
pub fn cmd_fit(cfg: &RunConfig, input: &Input, out: &Path) -> CliResult<()> {
    let data = &input.data;
    let prov = Provenance::new("fit", cfg, Some(&input.bytes));
    let choice = select_bandwidths(cfg, data)?;
    let spec = choice.margin_spec();
    let margins = fit_margins(data, &spec)?;
    let sample = CopulaSample::from_margins(data, &margins)?;
    let mut local = template(cfg);
    local.kernel.bandwidth = choice.h_copula;
    let (lo, hi) = x_range(data);
    let grid = linspace(lo, hi, cfg.grid_points);
    let curve = fit_curve(&sample, &grid, &local)?;

    let (band_lo, band_hi, band_failed) = if cfg.band_replicates > 0 {
        bootstrap_bands(data, &spec, &local, &grid, cfg.band_replicates, cfg.seed, cfg.band_level)
    } else {
        (vec![f64::NAN; grid.len()], vec![f64::NAN; grid.len()], 0)
    };

    let mut table = Table::new(["x", "eta", "theta", "tau", "lo", "hi"]);
    for g in 0..grid.len() {
        table.push(vec![
            num(grid[g]),
            num(curve.eta_hat[g]),
            num(curve.theta_hat[g]),
            num(curve.tau_hat[g]),
            num(band_lo[g]),
            num(band_hi[g]),
        ]);
    }
    write_text(&out_file(out, "curve.csv")?, &table.to_csv(&prov))?;

    let band = (cfg.band_replicates > 0).then_some((band_lo.as_slice(), band_hi.as_slice()));
    let title = format!("{} copula, {} margins, h = {}", cfg.family, cfg.margins, num(choice.h_copula));
    let plot = svg::render(&grid, &curve.tau_hat, band, &title, &prov.lines(""));
    write_text(&out_file(out, "curve.svg")?, &plot)?;

    let report = FitReport {
        family: cfg.family,
        n: data.len(),
        margins: MarginReport::new(&margins),
        bandwidths: &choice,
        curve: &curve,
        band_level: (cfg.band_replicates > 0).then_some(cfg.band_level),
        band_replicates: cfg.band_replicates,
        band_failed,
        lo: band_lo.clone(),
        hi: band_hi.clone(),
    };
    write_json(&out_file(out, "fit.json")?, &report, &prov)?;

    println!(
        "{} clusters, h_copula = {}{}; {} of {} grid points fitted",
        data.len(),
        num(choice.h_copula),
        match spec {
            MarginSpec::Beran { h1, h2 } => format!(", h_margin = ({}, {})", num(h1), num(h2)),
            MarginSpec::Weibull => String::new(),
        },
        grid.len() - curve.failed.len(),
        grid.len()
    );
    Ok(())
}

/// Constant versus global linear calibration, compared by a likelihood
/// ratio with one degree of freedom.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearLrTest {
    pub constant_loglik: f64,
    pub constant_theta: f64,
    pub linear: LinearCalibration,
    pub statistic: f64,
    pub p_value: f64,
}

pub fn linear_lr_test(sample: &CopulaSample, cfg: &RunConfig) -> CliResult<LinearLrTest> {
    let null = fit_constant(cfg.family, &sample.pseudo, None)?;
    let linear = fit_linear_calibration(sample, cfg.family, cfg.optimizer)?;
    let statistic = (2.0 * (linear.loglik - null.loglik)).max(0.0);
    Ok(LinearLrTest {
        constant_loglik: null.loglik,
        constant_theta: null.theta0.theta(),
        linear,
        statistic,
        // Upper tail of chi-square(1): P(Z^2 > s) = erfc(sqrt(s / 2)).
        p_value: libm::erfc((statistic / 2.0).sqrt()),
    })
}

#[derive(Debug, Serialize)]
struct TestReport<'a> {
    family: condcop::CopulaFamily,
    n: usize,
    lambda_n: f64,
    #[serde(rename = "B")]
    b: usize,
    p_value: f64,
    alpha: f64,
    reject: bool,
    bandwidths: &'a BandwidthChoice,
    glr: &'a GlrResult,
    margins: MarginReport,
    linear_lr: LinearLrTest,
}

/// Runs the bootstrap GLR test and the linear LR companion; writes
/// `test.json` into `out` and prints a summary table.
pub fn cmd_test(cfg: &RunConfig, input: &Input, out: &Path) -> CliResult<()> {
    let data = &input.data;
    let prov = Provenance::new("test", cfg, Some(&input.bytes));
    let choice = select_bandwidths(cfg, data)?;
    let spec = choice.margin_spec();
    let mut local = template(cfg);
    local.kernel.bandwidth = choice.h_copula;
    let setup = GlrSetup {
        local,
        margins: spec,
        scheme: cfg.scheme,
        replicates: cfg.replicates,
        seed: cfg.seed,
    };
    let glr = condcop::bootstrap_pvalue(data, &setup, &choice)?;
    let margins = fit_margins(data, &spec)?;
    let sample = CopulaSample::from_margins(data, &margins)?;
    let lr = linear_lr_test(&sample, cfg)?;

    let report = TestReport {
        family: cfg.family,
        n: data.len(),
        lambda_n: glr.lambda_n,
        b: glr.replicates,
        p_value: glr.p_value,
        alpha: cfg.alpha,
        reject: glr.p_value <= cfg.alpha,
        bandwidths: &choice,
        glr: &glr,
        margins: MarginReport::new(&margins),
        linear_lr: lr,
    };
    write_json(&out_file(out, "test.json")?, &report, &prov)?;

    let mut t = Table::new(["test", "statistic", "p_value", "detail"]);
    t.push(vec![
        "bootstrap GLR".into(),
        format!("{:.4}", glr.lambda_n),
        format!("{:.4}", glr.p_value),
        format!(
            "B = {}, failed = {}, {} censoring, h = {}",
            glr.replicates,
            glr.failed_replicates,
            glr.scheme,
            num(choice.h_copula)
        ),
    ]);
    t.push(vec![
        "linear LR".into(),
        format!("{:.4}", lr.statistic),
        format!("{:.4}", lr.p_value),
        format!("chi-square(1), slope = {:.4}", lr.linear.slope),
    ]);
    print!("{}", t.to_text());
    Ok(())
}

/// Every combination of the configured scenario lists, all sharing the
/// master seed.
pub fn scenarios(cfg: &RunConfig) -> Vec<Scenario> {
    let mut out = Vec::new();
    for &family in &cfg.families {
        for &margin_kind in &cfg.margin_kinds {
            for &n in &cfg.sample_sizes {
                for &censoring in &cfg.censoring {
                    for &tau_shape in &cfg.shapes {
                        out.push(Scenario {
                            tau_shape,
                            family,
                            n,
                            censoring,
                            margin_kind,
                            seed: cfg.seed,
                        });
                    }
                }
            }
        }
    }
    out
}

fn study_config(cfg: &RunConfig) -> StudyConfig {
    let mut sc = StudyConfig::default();
    if let GridSpec::Values(v) = &cfg.copula_grid {
        sc.copula_bandwidths = v.clone();
    }
    if let GridSpec::Values(v) = &cfg.margin_grid1 {
        sc.margin_bandwidths = v.clone();
    }
    sc
}

fn censoring_label(c: CensoringLevel) -> &'static str {
    match c {
        CensoringLevel::None => "0%",
        CensoringLevel::Low => "20%",
        CensoringLevel::Moderate => "50%",
    }
}

fn scenario_cells(s: &Scenario) -> Vec<String> {
    vec![
        s.family.to_string(),
        s.margin_kind.to_string(),
        s.n.to_string(),
        censoring_label(s.censoring).into(),
        TauShape::name(s.tau_shape).into(),
    ]
}

const SCENARIO_COLUMNS: [&str; 5] = ["family", "margins", "n", "censoring", "shape"];

/// Runs the configured studies and writes `estimation.csv` and/or
/// `power.csv` into `out`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> CliResult<()> {
    let prov = Provenance::new("simulate", cfg, None);
    let sc = study_config(cfg);
    let list = scenarios(cfg);
    if cfg.study.estimation() {
        let mut t = Table::new(
            SCENARIO_COLUMNS
                .iter()
                .copied()
                .chain(["M", "failed", "ibias2_x100", "ivar_x100", "imse_x100"]),
        );
        for s in &list {
            let o = condcop::estimation_study(s, cfg.m, &sc)?;
            let [b, v, m] = o.metrics.scaled();
            let mut row = scenario_cells(s);
            row.extend([
                o.replicates.to_string(),
                o.failed.to_string(),
                format!("{b:.3}"),
                format!("{v:.3}"),
                format!("{m:.3}"),
            ]);
            eprintln!("estimation {}: imse x100 = {m:.3}", s.label());
            t.push(row);
        }
        write_text(&out_file(out, "estimation.csv")?, &t.to_csv(&prov))?;
        print!("{}", t.to_text());
    }
    if cfg.study.power() {
        let mut t = Table::new(
            SCENARIO_COLUMNS
                .iter()
                .copied()
                .chain(["M", "failed", "B", "alpha", "rejection_rate"]),
        );
        for s in &list {
            let p = condcop::power_study(s, cfg.power_m, cfg.sim_replicates, cfg.alpha, &sc)?;
            let mut row = scenario_cells(s);
            row.extend([
                p.m.to_string(),
                p.failed.to_string(),
                p.b.to_string(),
                num(p.alpha),
                format!("{:.3}", p.rejection_rate),
            ]);
            eprintln!("power {}: rejection rate = {:.3}", s.label(), p.rejection_rate);
            t.push(row);
        }
        write_text(&out_file(out, "power.csv")?, &t.to_csv(&prov))?;
        print!("{}", t.to_text());
    }
    Ok(())
}
