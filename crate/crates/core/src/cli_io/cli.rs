//! Command-line surface. Exit codes: 0 success, 1 input or parse error,
//! 2 EM non-convergence (the model is still written).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use super::files::{build_history, csv_err, read_claims, read_counts, write_claims, write_counts};
use super::model_file::{FitMeta, ModelFile};
use crate::distributions::{sample_counts, sample_severities, FreqParams};
use crate::em::EmOptions;
use crate::error::{Error, Result};
use crate::freq_em::{fit_freq, moment_init_freq, CountSample};
use crate::gof::{gof_report, FREQ_PARAM_COUNT};
use crate::premium::PeriodRecord;
use crate::rng::{Rng, RngSeed};
use crate::sev_em::{default_init_sev, fit_sev, nu_from_freq, SeveritySample};
use crate::simulate::{generate_scenario, premium_evolution, simulate_surplus, ScenarioSpec, SurplusConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Starting ν for `fit-sev --estimate-nu` when no frequency model is given.
/// Starts near 0.5 tend to stall in a heavy-Pareto local maximum.
const DEFAULT_NU_START: f64 = 0.9;

#[derive(Debug, Parser)]
#[command(name = "twostream", version, about = "Two-stream claim models: fitting, premiums, simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the NB-mixture frequency model to a counts file.
    FitFreq {
        #[arg(long)]
        counts: PathBuf,
        /// `moments`, an inline JSON object, or a JSON file with alpha1, alpha2, beta, p.
        #[arg(long, default_value = "moments")]
        init: String,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Fit the exponential/Pareto severity model to a claims file.
    FitSev {
        #[arg(long)]
        claims: PathBuf,
        /// Model with frequency parameters; ν is derived from them unless --estimate-nu.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        estimate_nu: bool,
        /// Inline JSON object or JSON file with mu, delta, sigma (and nu when estimating it).
        #[arg(long)]
        init: Option<String>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(short = 'o', long)]
        output: PathBuf,
    },
    /// Print the premium after each period of a claim history.
    Premium {
        #[arg(long)]
        model: PathBuf,
        /// Counts file; without it only the prior premium is shown.
        #[arg(long)]
        counts: Option<PathBuf>,
        /// Claims file; without it the severity component stays at its prior value.
        #[arg(long)]
        claims: Option<PathBuf>,
        /// Use only the first k periods.
        #[arg(long)]
        periods: Option<usize>,
        #[arg(long, value_enum, default_value_t = Emit::Table)]
        emit: Emit,
    },
    /// Simulate a scenario, counts, severities or surplus paths from a JSON spec.
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(short = 'o', long)]
        output: PathBuf,
        /// Where to write the claims of a scenario.
        #[arg(long)]
        claims_out: Option<PathBuf>,
    },
    /// KS and chi-square tests of the frequency model against a counts file.
    Gof {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        counts: PathBuf,
        /// The model was not fitted to these counts: no df are subtracted.
        #[arg(long)]
        external: bool,
        #[arg(long, value_enum, default_value_t = Emit::Table)]
        emit: Emit,
    },
}

/// Simulation request read by `simulate --spec`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SimulationSpec {
    Scenario(ScenarioSpec),
    Counts {
        periods: usize,
        seed: RngSeed,
    },
    Severities {
        count: usize,
        seed: RngSeed,
    },
    Surplus {
        initial_surplus: f64,
        loading: f64,
        horizon: f64,
        dt: f64,
        paths: usize,
        seed: RngSeed,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::FitFreq {
            counts,
            init,
            tol,
            max_iters,
            output,
        } => fit_freq_cmd(&counts, &init, tol, max_iters, &output, out),
        Command::FitSev {
            claims,
            model,
            estimate_nu,
            init,
            tol,
            max_iters,
            output,
        } => fit_sev_cmd(&claims, model.as_deref(), estimate_nu, init.as_deref(), tol, max_iters, &output, out),
        Command::Premium {
            model,
            counts,
            claims,
            periods,
            emit,
        } => premium_cmd(&model, counts.as_deref(), claims.as_deref(), periods, emit, out, err),
        Command::Simulate {
            model,
            spec,
            output,
            claims_out,
        } => simulate_cmd(&model, &spec, &output, claims_out.as_deref(), err),
        Command::Gof {
            model,
            counts,
            external,
            emit,
        } => gof_cmd(&model, &counts, external, emit, out),
    }
}

fn em_options(tol: f64, max_iters: usize) -> Result<EmOptions> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("--tol must be positive: {tol}")));
    }
    Ok(EmOptions {
        tol,
        max_iters,
        ..EmOptions::default()
    })
}

/// Inline JSON when the argument starts with `{`, otherwise a JSON file.
fn json_arg<T: for<'de> Deserialize<'de>>(arg: &str) -> Result<T> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{arg}: {e}"))))?
    };
    Ok(serde_json::from_str(&text)?)
}

fn load_or_new(path: Option<&Path>) -> Result<ModelFile> {
    path.map_or_else(|| Ok(ModelFile::default()), ModelFile::load)
}

fn fit_freq_cmd(counts: &Path, init: &str, tol: f64, max_iters: usize, output: &Path, out: &mut dyn Write) -> Result<i32> {
    let opts = em_options(tol, max_iters)?;
    let rows = read_counts(counts)?;
    let sample = CountSample::new(rows.iter().map(|&(_, n)| n).collect())?;
    let start = if init == "moments" {
        moment_init_freq(&sample)?
    } else {
        let p: FreqParams = json_arg(init)?;
        p.validate()?;
        p
    };
    let (params, trace) = fit_freq(&sample, &start, &opts)?;
    let mut model = if output.exists() {
        ModelFile::load(output).unwrap_or_default()
    } else {
        ModelFile::default()
    };
    model.freq = Some(params);
    model.freq_fit = Some(FitMeta::from_trace(&trace, tol));
    model.save(output)?;
    writeln!(out, "iterations: {}", trace.iterations)?;
    writeln!(out, "loglik: {}", trace.final_loglik())?;
    writeln!(out, "stop: {}", serde_json::to_string(&trace.stop_reason)?.trim_matches('"'))?;
    writeln!(
        out,
        "alpha1: {}\nalpha2: {}\nbeta: {}\np: {}",
        params.alpha1, params.alpha2, params.beta, params.p
    )?;
    Ok(if trace.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[derive(Debug, Deserialize)]
struct SevInit {
    mu: f64,
    delta: f64,
    sigma: f64,
    nu: Option<f64>,
}

#[allow(clippy::too_many_arguments)]
fn fit_sev_cmd(
    claims: &Path,
    model_path: Option<&Path>,
    estimate_nu: bool,
    init: Option<&str>,
    tol: f64,
    max_iters: usize,
    output: &Path,
    out: &mut dyn Write,
) -> Result<i32> {
    let opts = em_options(tol, max_iters)?;
    let mut model = load_or_new(model_path)?;
    let nu = match (model.freq, estimate_nu) {
        (Some(f), _) => nu_from_freq(&f),
        (None, true) => DEFAULT_NU_START,
        (None, false) => {
            return Err(Error::ModelFile(
                "frequency parameters are needed to fix nu; pass --model or --estimate-nu".into(),
            ))
        }
    };
    let rows = read_claims(claims)?;
    let sample = SeveritySample::new(rows.iter().map(|r| r.amount).collect())?;
    let start = match init {
        None => default_init_sev(&sample, nu)?,
        Some(arg) => {
            let s: SevInit = json_arg(arg)?;
            let nu = if estimate_nu { s.nu.unwrap_or(nu) } else { nu };
            crate::distributions::SevParams::new(s.mu, s.delta, s.sigma, nu)?
        }
    };
    let (params, trace) = fit_sev(&sample, &start, estimate_nu, &opts)?;
    model.sev = Some(params);
    model.sev_fit = Some(FitMeta::from_trace(&trace, tol));
    model.save(output)?;
    writeln!(out, "iterations: {}", trace.iterations)?;
    writeln!(out, "loglik: {}", trace.final_loglik())?;
    writeln!(out, "stop: {}", serde_json::to_string(&trace.stop_reason)?.trim_matches('"'))?;
    writeln!(
        out,
        "mu: {}\ndelta: {}\nsigma: {}\nnu: {}",
        params.mu, params.delta, params.sigma, params.nu
    )?;
    Ok(if trace.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

#[derive(Debug, Serialize)]
struct PremiumRow {
    period: usize,
    sum_n: u64,
    sum_y: f64,
    freq_component: f64,
    sev_component: f64,
    w: f64,
    omega: f64,
    premium: f64,
}

fn premium_cmd(
    model_path: &Path,
    counts: Option<&Path>,
    claims: Option<&Path>,
    periods: Option<usize>,
    emit: Emit,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32> {
    let model = ModelFile::load(model_path)?;
    let params = model.full_params()?;
    let mut records: Vec<PeriodRecord> = match counts {
        None => {
            if claims.is_some() {
                return Err(Error::InvalidInput("--claims needs --counts".into()));
            }
            Vec::new()
        }
        Some(path) => {
            let counts = read_counts(path)?;
            let claims = claims.map(read_claims).transpose()?;
            if claims.is_none() {
                writeln!(err, "warning: no claims file; severity component held at its prior value")?;
            }
            build_history(&counts, claims.as_deref(), true)?.0
        }
    };
    if let Some(k) = periods {
        if k > records.len() {
            return Err(Error::InvalidInput(format!(
                "--periods {k} exceeds the {} periods in the history",
                records.len()
            )));
        }
        records.truncate(k);
    }
    let quotes = premium_evolution(&params.freq, &params.sev, &records)?;
    let mut sum_n = 0;
    let mut sum_y = 0.0;
    let rows: Vec<PremiumRow> = quotes
        .iter()
        .enumerate()
        .map(|(k, q)| {
            if k > 0 {
                let r = &records[k - 1];
                sum_n += r.count;
                sum_y += r.severities.iter().flatten().sum::<f64>();
            }
            PremiumRow {
                period: k,
                sum_n,
                sum_y,
                freq_component: q.freq_component,
                sev_component: q.sev_component,
                w: q.w,
                omega: q.omega,
                premium: q.premium,
            }
        })
        .collect();
    match emit {
        Emit::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?,
        Emit::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in &rows {
                w.serialize(r).map_err(csv_err)?;
            }
            w.flush()?;
        }
        Emit::Table => {
            writeln!(
                out,
                "{:>6} {:>6} {:>10} {:>10} {:>10} {:>8} {:>8} {:>10}",
                "period", "sum_n", "sum_y", "freq", "sev", "w", "omega", "premium"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>6} {:>6} {:>10.4} {:>10.4} {:>10.4} {:>8.4} {:>8.4} {:>10.4}",
                    r.period, r.sum_n, r.sum_y, r.freq_component, r.sev_component, r.w, r.omega, r.premium
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>> {
    let f = std::fs::File::create(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(std::io::BufWriter::new(f))
}

fn simulate_cmd(model_path: &Path, spec_path: &Path, output: &Path, claims_out: Option<&Path>, err: &mut dyn Write) -> Result<i32> {
    let model = ModelFile::load(model_path)?;
    let text = std::fs::read_to_string(spec_path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", spec_path.display()))))?;
    let spec: SimulationSpec = serde_json::from_str(&text)?;
    match spec {
        SimulationSpec::Scenario(s) => {
            let recs = generate_scenario(&model.require_sev()?, &s)?;
            let counts: Vec<u64> = recs.iter().map(|r| r.count).collect();
            write_counts(create(output)?, &counts)?;
            match claims_out {
                Some(p) => write_claims(create(p)?, &recs)?,
                None => writeln!(err, "note: --claims-out not given; scenario severities not written")?,
            }
        }
        SimulationSpec::Counts { periods, seed } => {
            write_counts(create(output)?, &sample_counts(&model.require_freq()?, periods, seed))?;
        }
        SimulationSpec::Severities { count, seed } => {
            let ys = sample_severities(&model.require_sev()?, count, seed);
            write_claims(create(output)?, &[PeriodRecord::new(ys.len() as u64, ys)])?;
        }
        SimulationSpec::Surplus {
            initial_surplus,
            loading,
            horizon,
            dt,
            paths,
            seed,
        } => {
            let params = model.full_params()?;
            let cfg = SurplusConfig {
                initial_surplus,
                loading,
                horizon,
                dt,
            };
            let mut master = Rng::new(seed);
            let mut w = csv::Writer::from_writer(create(output)?);
            w.write_record(["path", "time", "surplus"]).map_err(csv_err)?;
            let mut ruined = 0;
            for i in 0..paths {
                let path_seed = RngSeed(master.next_u64());
                let path = simulate_surplus(&params.freq, &params.sev, &cfg, path_seed)?;
                ruined += path.ruined as usize;
                for (t, u) in path.times.iter().zip(&path.surplus) {
                    w.write_record([i.to_string(), t.to_string(), u.to_string()])
                        .map_err(csv_err)?;
                }
            }
            w.flush()?;
            writeln!(err, "ruined paths: {ruined}/{paths}")?;
        }
    }
    Ok(EXIT_OK)
}

fn gof_cmd(model_path: &Path, counts: &Path, external: bool, emit: Emit, out: &mut dyn Write) -> Result<i32> {
    let freq = ModelFile::load(model_path)?.require_freq()?;
    let rows = read_counts(counts)?;
    let sample = CountSample::new(rows.iter().map(|&(_, n)| n).collect())?;
    let fitted = if external { 0 } else { FREQ_PARAM_COUNT };
    let report = gof_report(&freq, &sample, fitted)?;
    match emit {
        Emit::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
        Emit::Csv => {
            writeln!(out, "test,statistic,df,p_value")?;
            writeln!(out, "ks,{},,{}", report.ks_statistic, report.ks_pvalue)?;
            writeln!(
                out,
                "chi_square,{},{},{}",
                report.chisq_statistic, report.chisq_df, report.chisq_pvalue
            )?;
        }
        Emit::Table => {
            writeln!(out, "{:<10} {:>12} {:>4} {:>10}", "test", "statistic", "df", "p_value")?;
            writeln!(out, "{:<10} {:>12.6} {:>4} {:>10.6}", "ks", report.ks_statistic, "-", report.ks_pvalue)?;
            writeln!(
                out,
                "{:<10} {:>12.6} {:>4} {:>10.6}",
                "chi_square", report.chisq_statistic, report.chisq_df, report.chisq_pvalue
            )?;
        }
    }
    Ok(EXIT_OK)
}
