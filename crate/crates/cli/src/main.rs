//! `authcap`: classify authentication channels, compute rate regions, emit
//! the Gaussian trade-off curves, run the protocol simulator, and compare the
//! single- and two-auxiliary characterizations.
//!
//! Exit codes: 0 ok, 2 I/O, 3 schema or usage, 4 stochasticity,
//! 5 unsupported channel class, 6 simulator or search limits.

mod export;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use authcap::binary::theorem3_region;
use authcap::config::{parse_config, ModelConfig, ModelSpec};
use authcap::gaussian::{compare_at_common_rj, corollary1_curve, gaussian_region, GaussianModelParams};
use authcap::info::InfoUnit;
use authcap::region::{compare_aux_regions, sweep_region, RegionBoundary};
use authcap::sim::run_simulation;
use authcap::Error;
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use export::Meta;

#[derive(Parser)]
#[command(
    name = "authcap",
    version,
    about = "Capacity regions for identifier-based authentication"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the ordering verdict for the authentication channels.
    Classify(Common),
    /// Write the Pareto boundary of the rate region as CSV and JSON.
    Region(Common),
    /// Write the Gaussian (R_J, R_S) and (R_J, R_L) curves for the hidden and visible source.
    Figures(Common),
    /// Run the random-binning protocol simulator.
    Simulate(Common),
    /// Compare the single- and two-auxiliary regions numerically.
    Compare(Common),
}

#[derive(Args)]
struct Common {
    /// Model configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Seed for every randomized component; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Reporting unit; overrides the config.
    #[arg(long)]
    unit: Option<InfoUnit>,
    /// Random test channels (discrete) or α grid points (Gaussian).
    #[arg(long)]
    samples: Option<usize>,
    /// β grid step for binary test channels.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Skip exact leakage enumeration in `simulate`.
    #[arg(long)]
    monte_carlo_only: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidDistribution(_) | Error::InvalidChannel(_) => 4,
            Error::UnsupportedClass(_) | Error::WrongDirection(_) => 5,
            Error::LimitExceeded(_) | Error::CardinalityExceeded { .. } => 6,
            Error::Schema(_)
            | Error::OutOfRange { .. }
            | Error::DimensionMismatch(_)
            | Error::NonBinaryModel(_)
            | Error::UnitMismatch(..)
            | Error::LengthMismatch { .. }
            | Error::BinOutOfRange { .. }
            | Error::AxisOutOfRange { .. }
            | Error::OverlappingAxes(_) => 3,
            Error::NegativeInformation(_) | Error::Degenerate(_) | Error::SingularBlock(_) | Error::Solver(_) => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    }
}

struct Loaded {
    text: Vec<u8>,
    config: ModelConfig,
}

impl Common {
    fn load(&self) -> Result<Loaded, Failure> {
        let text = fs::read(&self.config).map_err(|e| io_failure(&self.config, e))?;
        let utf8 = std::str::from_utf8(&text).map_err(|e| Failure::from(Error::Schema(e.to_string())))?;
        let mut config = parse_config(utf8)?;
        let seed = self.seed.unwrap_or(config.seed);
        config.set_seed(seed);
        if let Some(step) = self.grid_step {
            config.sampler.beta_step = Some(step);
            if let ModelSpec::Binary(b) = &mut config.model {
                b.beta_step = step;
            }
        }
        if let Some(n) = self.samples {
            config.sampler.samples = n;
            if let ModelSpec::Gaussian(g) = &mut config.model {
                g.alpha_points = n;
            }
        }
        Ok(Loaded { text, config })
    }

    fn unit(&self, config: &ModelConfig) -> InfoUnit {
        self.unit.or(config.unit).unwrap_or(match config.model {
            ModelSpec::Gaussian(_) => InfoUnit::Nats,
            _ => InfoUnit::Bits,
        })
    }

    fn meta(&self, command: &'static str, loaded: &Loaded) -> Meta {
        Meta::new(command, &loaded.text, loaded.config.seed, self.unit(&loaded.config))
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, Failure> {
        fs::create_dir_all(&self.out).map_err(|e| io_failure(&self.out, e))?;
        let path = self.out.join(name);
        fs::write(&path, contents).map_err(|e| io_failure(&path, e))?;
        Ok(path)
    }
}

fn classify(args: &Common) -> Result<(), Failure> {
    let loaded = args.load()?;
    let model = loaded.config.auth_model()?;
    let meta = args.meta("classify", &loaded);
    print!(
        "{}",
        export::json(
            &meta,
            json!({
                "verdict": model.verdict,
                "region_class": model.region_class(),
            })
        )
    );
    Ok(())
}

fn region_boundary(config: &ModelConfig) -> Result<RegionBoundary, Error> {
    match &config.model {
        ModelSpec::Gaussian(g) => gaussian_region(g),
        ModelSpec::Binary(b) => theorem3_region(b, &config.classifier),
        ModelSpec::Discrete { .. } => {
            let model = config.auth_model()?;
            sweep_region(&model, &config.sampler, InfoUnit::Bits).map_err(|e| match e {
                Error::UnsupportedClass(msg) => Error::UnsupportedClass(format!(
                    "{msg}. Capacity regions are characterized only when the main channel is degraded \
                     or less noisy with respect to the eavesdropper's (or the reverse)"
                )),
                other => other,
            })
        }
    }
}

fn region(args: &Common) -> Result<(), Failure> {
    let loaded = args.load()?;
    let unit = args.unit(&loaded.config);
    let boundary = region_boundary(&loaded.config)?.in_unit(unit);
    let meta = args.meta("region", &loaded);
    args.write("region.csv", &export::region_csv(&meta, &boundary))?;
    args.write("region.json", &export::json(&meta, json!({ "boundary": boundary })))?;
    Ok(())
}

fn figures(args: &Common) -> Result<(), Failure> {
    let loaded = args.load()?;
    let ModelSpec::Gaussian(hsm) = loaded.config.model else {
        return Err(Error::Schema("figures needs a gaussian model".into()).into());
    };
    let unit = args.unit(&loaded.config);
    let vsm = hsm.visible_source();
    let curve = |p: &GaussianModelParams| -> Result<Vec<_>, Error> {
        Ok(corollary1_curve(p)?.into_iter().map(|c| c.in_unit(unit)).collect())
    };
    let (h, v) = (curve(&hsm)?, curve(&vsm)?);
    let curves = [("hsm", &hsm, h.as_slice()), ("vsm", &vsm, v.as_slice())];
    let meta = args.meta("figures", &loaded);
    args.write("rs_vs_rj.csv", &export::curve_csv(&meta, "rs", &curves, |c| c.rs))?;
    args.write("rl_vs_rj.csv", &export::curve_csv(&meta, "rl", &curves, |c| c.rl))?;

    let common = compare_at_common_rj(&hsm, &vsm, 200)?;
    let rs_ok = common.iter().all(|p| p.second_rs >= p.first_rs - 1e-12);
    let rl_ok = common.iter().all(|p| p.first_rl <= p.second_rl + 1e-12);
    eprintln!("visible source: rs at least hidden-source rs: {rs_ok}; hidden-source rl at most visible rl: {rl_ok}");
    Ok(())
}

fn simulate(args: &Common) -> Result<(), Failure> {
    let loaded = args.load()?;
    let model = loaded.config.auth_model()?;
    let mut sim = loaded
        .config
        .simulator
        .clone()
        .ok_or_else(|| Error::Schema("simulate needs a simulator block".into()))?;
    if args.monte_carlo_only {
        sim.exact_leakage_limit = 0;
    } else if sim.n > sim.exact_leakage_limit {
        return Err(Error::LimitExceeded(format!(
            "n = {} exceeds exact_leakage_limit = {}; pass --monte-carlo-only to skip exact leakage",
            sim.n, sim.exact_leakage_limit
        ))
        .into());
    }
    let report = run_simulation(&model, &sim)?;
    // Report rates are in bits; the unit flag is recorded but not applied.
    let mut meta = args.meta("simulate", &loaded);
    meta.unit = InfoUnit::Bits;
    args.write("simulate.json", &export::json(&meta, json!({ "report": report })))?;
    Ok(())
}

fn compare(args: &Common) -> Result<(), Failure> {
    let loaded = args.load()?;
    let model = loaded.config.auth_model()?;
    let unit = args.unit(&loaded.config);
    let c = &loaded.config.compare;
    let report = compare_aux_regions(&model, &loaded.config.sampler, c.two_aux_samples, c.caps(), unit)?;
    let meta = args.meta("compare", &loaded);
    args.write("compare.json", &export::json(&meta, json!({ "comparison": report })))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Classify(a) => classify(a),
        Command::Region(a) => region(a),
        Command::Figures(a) => figures(a),
        Command::Simulate(a) => simulate(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("authcap: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
