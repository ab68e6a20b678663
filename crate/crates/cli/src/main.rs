use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use isodist::json::{f64_17, vec_f64_17};
use isodist::sim::{rate_fit, run_rate_study, ErrorField, RateSchedule, RateSummary, SimConfig, TrialOptions, TrialResult};
use isodist::verify::{run_suite, Suite};
use isodist::{
    fit_cdf_family, format_f64, plugin_quantiles, quantile_band, smooth_band_curve, CdfFamilyFit, DesignGroups,
    Interpolation, QuantileBand,
};

#[derive(Parser)]
#[command(name = "isodist", version, about = "Isotonic distributional regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the conditional CDF family to a CSV file with columns x,y.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Fit JSON destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Interp::Linear)]
        interp: Interp,
    },
    /// Quantile bands and smooth band curves from a fit JSON or raw CSV.
    Quantile {
        #[arg(long)]
        input: PathBuf,
        #[arg(long = "beta", required = true)]
        betas: Vec<f64>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Simulation study over a grid of sample sizes.
    Simulate {
        #[arg(long, default_value = "gaussian_shift")]
        scenario: String,
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Interp::Linear)]
        interp: Interp,
        /// Per-trial CSV destination; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Rate summary JSON destination; stderr when omitted.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Randomized property suite with a JSON report.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 20_190_501)]
        seed: u64,
        #[arg(long)]
        reps: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Interp {
    Linear,
    StepLeft,
    StepRight,
}

impl From<Interp> for Interpolation {
    fn from(i: Interp) -> Self {
        match i {
            Interp::Linear => Interpolation::Linear,
            Interp::StepLeft => Interpolation::StepLeft,
            Interp::StepRight => Interpolation::StepRight,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Isoreg,
    Quantile,
    Dkw,
    Lln,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Isoreg => Suite::Isoreg,
            SuiteArg::Quantile => Suite::Quantile,
            SuiteArg::Dkw => Suite::Dkw,
            SuiteArg::Lln => Suite::Lln,
        }
    }
}

enum Failure {
    /// Bad flags or input, exit code 2.
    Input(anyhow::Error),
    /// A checked property failed, exit code 1.
    Verification(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fit { input, output, interp } => cmd_fit(&input, output.as_deref(), interp.into()),
        Command::Quantile { input, betas, output, format } => cmd_quantile(&input, &betas, output.as_deref(), format),
        Command::Simulate { scenario, n_grid, reps, seed, interp, output, summary } => {
            cmd_simulate(&scenario, &n_grid, reps, seed, interp.into(), output.as_deref(), summary.as_deref())
        }
        Command::Verify { suite, seed, reps, output } => cmd_verify(suite.into(), seed, reps, output.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(e)) => {
            eprintln!("verification failed: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Reads `x,y` rows; errors name the offending line.
fn read_csv(path: &Path) -> anyhow::Result<DesignGroups> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_csv(&text)
}

fn parse_csv(text: &str) -> anyhow::Result<DesignGroups> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().context("reading header")?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(ix), Some(iy)) = (col("x"), col("y")) else {
        bail!("line 1: header must name columns x and y, found '{}'", headers.iter().collect::<Vec<_>>().join(","));
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| match e.position() {
            Some(p) => anyhow!("line {}: {e}", p.line()),
            None => anyhow!("{e}"),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize, name: &str| -> anyhow::Result<f64> {
            let raw = rec.get(i).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| anyhow!("line {line}: cannot parse {name} value '{raw}'"))?;
            if !v.is_finite() {
                bail!("line {line}: {name} value '{raw}' is not finite");
            }
            Ok(v)
        };
        xs.push(field(ix, "x")?);
        ys.push(field(iy, "y")?);
    }
    if xs.is_empty() {
        bail!("no data rows");
    }
    Ok(DesignGroups::from_pairs(&xs, &ys)?)
}

fn cmd_fit(input: &Path, output: Option<&Path>, interp: Interpolation) -> Result<(), Failure> {
    let groups = read_csv(input)?;
    let fit = fit_cdf_family(&groups).with_interpolation(interp);
    let violation = fit.max_column_violation();
    eprintln!(
        "n = {}, m = {}, thresholds = {}, max column violation = {}",
        groups.n(),
        fit.m(),
        fit.thresholds().len(),
        violation
    );
    if violation > 0.0 {
        return Err(Failure::Verification(anyhow!("fitted columns not antitonic: violation {violation}")));
    }
    write_out(output, &fit.to_json())?;
    Ok(())
}

#[derive(Serialize)]
struct BandRecord {
    #[serde(serialize_with = "f64_17")]
    beta: f64,
    #[serde(serialize_with = "vec_f64_17")]
    xs: Vec<f64>,
    #[serde(serialize_with = "vec_f64_17")]
    lower: Vec<f64>,
    #[serde(serialize_with = "vec_f64_17")]
    upper: Vec<f64>,
    #[serde(serialize_with = "vec_f64_17")]
    smooth: Vec<f64>,
}

#[derive(Serialize)]
struct QuantileOutput {
    bands: Vec<BandRecord>,
}

fn cmd_quantile(input: &Path, betas: &[f64], output: Option<&Path>, format: Format) -> Result<(), Failure> {
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
        return Err(Failure::Input(anyhow!("beta {b} outside (0, 1)")));
    }
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let (fit, groups) = if text.trim_start().starts_with('{') {
        (CdfFamilyFit::from_json(&text).context("parsing fit JSON")?, None)
    } else {
        let groups = parse_csv(&text)?;
        (fit_cdf_family(&groups), Some(groups))
    };

    let mut bands = Vec::with_capacity(betas.len());
    for &beta in betas {
        let plug = plugin_quantiles(&fit, beta).map_err(|e| anyhow!(e))?;
        if let Some(g) = &groups {
            let band: QuantileBand = quantile_band(g, beta).map_err(|e| Failure::Verification(anyhow!(e)))?;
            if band != plug {
                return Err(Failure::Verification(anyhow!(
                    "plug-in quantiles differ from the regression-quantile band at beta {beta}"
                )));
            }
        }
        let smooth = smooth_band_curve(&plug).map_err(|e| Failure::Verification(anyhow!(e)))?;
        bands.push(BandRecord { beta, xs: plug.xs, lower: plug.lower, upper: plug.upper, smooth: smooth.knots });
    }

    let text = match format {
        Format::Json => serde_json::to_string_pretty(&QuantileOutput { bands }).map_err(|e| anyhow!(e))? + "\n",
        Format::Csv => {
            let mut s = String::from("beta,x,lower,upper,smooth\n");
            for b in &bands {
                for j in 0..b.xs.len() {
                    let row = [b.beta, b.xs[j], b.lower[j], b.upper[j], b.smooth[j]].map(format_f64);
                    s.push_str(&row.join(","));
                    s.push('\n');
                }
            }
            s
        }
    };
    write_out(output, &text)?;
    Ok(())
}

#[derive(Serialize)]
#[serde(untagged)]
enum RateEntry {
    Fit(RateSummary),
    Unavailable { error: String },
}

#[derive(Serialize)]
struct SimulationSummary {
    scenario: String,
    seed: u64,
    reps: usize,
    n_grid: Vec<usize>,
    sup_err_cdf: RateEntry,
    sup_err_quantile: RateEntry,
    pointwise_err_cdf: RateEntry,
    pointwise_err_quantile: RateEntry,
}

fn results_csv(results: &[TrialResult]) -> String {
    let mut s = String::from(
        "n,rep,sup_err_cdf,sup_err_quantile,pointwise_err_cdf,pointwise_err_quantile,m_n,m_n_upper,m_n_stride\n",
    );
    for r in results {
        let q = r.sup_err_quantile.map(format_f64).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.rep,
            format_f64(r.sup_err_cdf),
            q,
            format_f64(r.pointwise_err_cdf),
            format_f64(r.pointwise_err_quantile),
            format_f64(r.m_n),
            format_f64(r.m_n_upper),
            r.m_n_stride
        ));
    }
    s
}

fn cmd_simulate(
    scenario: &str,
    n_grid: &[usize],
    reps: Option<usize>,
    seed: Option<u64>,
    interp: Interpolation,
    output: Option<&Path>,
    summary: Option<&Path>,
) -> Result<(), Failure> {
    let mut config = SimConfig::named(scenario).ok_or_else(|| {
        anyhow!("unknown scenario '{scenario}' (known: gaussian_shift, uniform_shift, and either with _iid)")
    })?;
    if let Some(r) = reps {
        config.reps = r;
    }
    if let Some(s) = seed {
        config.seed = s;
    }
    config.validate().map_err(|e| anyhow!(e))?;
    let opts = TrialOptions { interpolation: interp, ..TrialOptions::default() };
    let results = run_rate_study(&config, n_grid, &opts).map_err(|e| anyhow!(e))?;

    let sup_rate = |n: usize| RateSchedule::uniform(&config, n).rate(config.alpha);
    let point_rate = |n: usize| (n as f64).powf(-config.alpha / (2.0 * config.alpha + 1.0));
    let entry = |which: ErrorField, rate: &dyn Fn(usize) -> f64| match rate_fit(&results, which, rate) {
        Ok(s) => RateEntry::Fit(s),
        Err(e) => RateEntry::Unavailable { error: e.to_string() },
    };
    let doc = SimulationSummary {
        scenario: scenario.to_string(),
        seed: config.seed,
        reps: config.reps,
        n_grid: n_grid.to_vec(),
        sup_err_cdf: entry(ErrorField::SupCdf, &sup_rate),
        sup_err_quantile: entry(ErrorField::SupQuantile, &sup_rate),
        pointwise_err_cdf: entry(ErrorField::PointwiseCdf, &point_rate),
        pointwise_err_quantile: entry(ErrorField::PointwiseQuantile, &point_rate),
    };
    let json = serde_json::to_string_pretty(&doc).map_err(|e| anyhow!(e))? + "\n";

    write_out(output, &results_csv(&results))?;
    match summary {
        Some(p) => fs::write(p, json).with_context(|| format!("writing {}", p.display()))?,
        None => eprint!("{json}"),
    }
    Ok(())
}

fn cmd_verify(suite: Suite, seed: u64, reps: Option<u64>, output: Option<&Path>) -> Result<(), Failure> {
    let reps = reps.unwrap_or(suite.default_reps());
    let report = run_suite(suite, seed, reps).map_err(|e| anyhow!(e))?;
    write_out(output, &(report.to_json() + "\n"))?;
    if !report.pass {
        let failed: Vec<&str> = report.properties.iter().filter(|p| !p.pass).map(|p| p.name.as_str()).collect();
        return Err(Failure::Verification(anyhow!("{suite}: {}", failed.join(", "))));
    }
    Ok(())
}
