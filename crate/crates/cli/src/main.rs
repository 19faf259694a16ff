use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use scalelab_core::analytic::{CURVE_MAX, CURVE_MIN, CURVE_POINTS};
use scalelab_core::frontier::{DEFAULT_BINS, KAPLAN_COUNT, KAPLAN_MAX, KAPLAN_MIN};
use scalelab_core::{
    bundled_chinchilla_configs, exponent_curve, extract_frontier, fit_embed_map, fit_loss_scaling,
    fit_param_scaling, read_configs_path, read_curves_csv, read_frontier_csv, reproduce,
    simulate_curves, write_curves_csv, write_exponent_curve_csv, write_frontier_csv, Basis,
    EmbedMap, FitForm, FitReport, FrontierOptions, FrontierPoint, LossSpec, NamedSpec,
    ReproduceOptions, SizeGrid, TokenSchedule, CHINCHILLA_OMEGA,
};

#[derive(Parser)]
#[command(
    name = "scalelab",
    version,
    about = "Scaling-law frontiers, exponents and fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit N_T = N + ω·N^δ to a table of model configurations.
    FitEmbedMap {
        /// Config CSV; the bundled Chinchilla table when omitted.
        config: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write simulated training curves as CSV.
    Simulate(RunArgs),
    /// Extract the compute-optimal frontier as CSV.
    Frontier {
        #[command(flatten)]
        run: RunArgs,
        /// Read curves from this CSV instead of simulating them.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Fit a power law to a frontier CSV and print the report as JSON.
    Fit {
        /// Frontier CSV as written by `frontier`.
        input: PathBuf,
        /// `plain` fits n_opt against compute; `kaplan` and `chinchilla` fit loss.
        #[arg(long, default_value = "plain")]
        form: FitForm,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Local exponents g and k along the analytic frontier.
    ExponentCurve {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = CURVE_MIN)]
        n_min: f64,
        #[arg(long, default_value_t = CURVE_MAX)]
        n_max: f64,
        #[arg(long, default_value_t = CURVE_POINTS)]
        points: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the headline fits and check them against their targets.
    Reproduce(RunArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// `epoch`, `chinchilla`, or a path to a JSON loss spec.
    #[arg(long)]
    spec: Option<String>,
    #[arg(long, default_value_t = CHINCHILLA_OMEGA)]
    omega: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    delta: f64,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "nonembed")]
    basis: Basis,
    #[arg(long, default_value_t = KAPLAN_MIN)]
    sizes_min: f64,
    #[arg(long, default_value_t = KAPLAN_MAX)]
    sizes_max: f64,
    #[arg(long, default_value_t = KAPLAN_COUNT)]
    sizes_count: usize,
    /// Smallest token count as a multiple of the model's non-embedding size.
    #[arg(long, default_value_t = TokenSchedule::default().ratio_min)]
    tokens_min_ratio: f64,
    #[arg(long, default_value_t = TokenSchedule::default().ratio_max)]
    tokens_max_ratio: f64,
    #[arg(long, default_value_t = TokenSchedule::default().count)]
    tokens_count: usize,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl ModelArgs {
    fn named_spec(&self) -> Result<Option<NamedSpec>> {
        Ok(match self.spec.as_deref() {
            None => None,
            Some("epoch") => Some(NamedSpec::EPOCH),
            Some("chinchilla") => Some(NamedSpec::CHINCHILLA),
            Some(path) => {
                let spec = LossSpec::from_json_path(path)
                    .with_context(|| format!("reading loss spec `{path}`"))?;
                Some(NamedSpec::custom(spec))
            }
        })
    }

    fn spec(&self) -> Result<LossSpec> {
        Ok(self.named_spec()?.unwrap_or(NamedSpec::EPOCH).spec)
    }

    fn map(&self) -> Result<EmbedMap> {
        Ok(EmbedMap::new(self.omega, self.delta)?)
    }
}

impl RunArgs {
    fn grid(&self) -> Result<SizeGrid> {
        Ok(SizeGrid::log_spaced(
            self.sizes_min,
            self.sizes_max,
            self.sizes_count,
        )?)
    }

    fn schedule(&self) -> Result<TokenSchedule> {
        let s = TokenSchedule {
            ratio_min: self.tokens_min_ratio,
            ratio_max: self.tokens_max_ratio,
            count: self.tokens_count,
        };
        s.validate()?;
        Ok(s)
    }

    fn frontier_options(&self) -> FrontierOptions {
        FrontierOptions {
            n_bins: self.bins,
            ..FrontierOptions::with_basis(self.basis)
        }
    }
}

#[derive(Serialize)]
struct EmbedMapReport {
    omega: f64,
    delta: f64,
    r_squared: f64,
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn read_frontier_file(path: &Path) -> Result<(Option<Basis>, Vec<FrontierPoint>)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim().is_empty() {
        return Ok((None, Vec::new()));
    }
    Ok(read_frontier_csv(text.as_bytes())?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::FitEmbedMap { config, output } => {
            let configs = match &config {
                Some(path) => read_configs_path(path)
                    .with_context(|| format!("reading configs `{}`", path.display()))?,
                None => bundled_chinchilla_configs(),
            };
            let splits = configs
                .iter()
                .map(|c| c.split())
                .collect::<scalelab_core::Result<Vec<_>>>()?;
            let fit = fit_embed_map(&splits)?;
            let bytes = json_bytes(&EmbedMapReport {
                omega: fit.map.omega,
                delta: fit.map.delta,
                r_squared: fit.r_squared,
            })?;
            if output.is_some() {
                emit(None, &bytes)?;
            }
            emit(output.as_deref(), &bytes)?;
        }
        Command::Simulate(args) => {
            let curves = simulate_curves(
                &args.grid()?,
                &args.model.spec()?,
                &args.model.map()?,
                &args.schedule()?,
            )?;
            let mut buf = Vec::new();
            write_curves_csv(&curves, &mut buf)?;
            emit(args.output.as_deref(), &buf)?;
        }
        Command::Frontier { run, curves } => {
            let curves = match &curves {
                Some(path) => {
                    let file = fs::File::open(path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    read_curves_csv(io::BufReader::new(file))?
                }
                None => simulate_curves(
                    &run.grid()?,
                    &run.model.spec()?,
                    &run.model.map()?,
                    &run.schedule()?,
                )?,
            };
            let frontier = extract_frontier(&curves, &run.frontier_options())?;
            let mut buf = Vec::new();
            write_frontier_csv(&frontier, run.basis, &mut buf)?;
            emit(run.output.as_deref(), &buf)?;
        }
        Command::Fit {
            input,
            form,
            output,
        } => {
            let (basis, frontier) = read_frontier_file(&input)?;
            let fit = match form {
                FitForm::Plain => fit_param_scaling(&frontier)?,
                FitForm::Kaplan | FitForm::Chinchilla => fit_loss_scaling(&frontier, form)?,
            };
            let report = FitReport::new(form, basis.unwrap_or(Basis::Nonembed), &fit);
            emit(output.as_deref(), &json_bytes(&report)?)?;
        }
        Command::ExponentCurve {
            model,
            n_min,
            n_max,
            points,
            output,
        } => {
            let samples = exponent_curve(&model.spec()?, &model.map()?, n_min, n_max, points)?;
            let mut buf = Vec::new();
            write_exponent_curve_csv(&samples, &mut buf)?;
            emit(output.as_deref(), &buf)?;
        }
        Command::Reproduce(args) => {
            let specs = match args.model.named_spec()? {
                Some(s) => vec![s],
                None => vec![NamedSpec::EPOCH, NamedSpec::CHINCHILLA],
            };
            let opts = ReproduceOptions {
                specs,
                map: args.model.map()?,
                grid: args.grid()?,
                schedule: args.schedule()?,
                n_bins: args.bins,
            };
            let rows = reproduce(&opts)?;
            emit(args.output.as_deref(), &json_bytes(&rows)?)?;
            let failed: Vec<_> = rows.iter().filter(|r| !r.pass).collect();
            for r in &failed {
                eprintln!(
                    "FAIL {:?} {} ({}): observed {} target {:?} ± {:?}",
                    r.spec, r.quantity, r.basis, r.observed, r.target, r.tolerance
                );
            }
            return Ok(failed.is_empty());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
