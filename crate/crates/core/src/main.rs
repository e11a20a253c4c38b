use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ris_keygen::analytic::SkrConvention;
use ris_keygen::harness::{
    reproduce_figure, run_experiment, write_outputs, ExperimentConfig, FigureId, FigureOptions, SchemeName,
    SweepConfig, SweepParameter,
};
use ris_keygen::{Error, PhaseScheme, Result};

/// Simulate RIS-induced channel randomness and check it against closed-form
/// predictions.
///
/// Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 configuration
/// error, 3 model error, 4 I/O error.
#[derive(Parser, Debug)]
#[command(name = "ris-keygen", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate channel samples for one model and write samples, report and
    /// optional sweep. Flags override values from --config.
    Simulate(SimulateArgs),
    /// Run the verdict suite described by a TOML config.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides `outputs.dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parallel shards; results do not depend on this.
        #[arg(long)]
        shards: Option<usize>,
    },
    /// Secret key rate over an SNR grid, optionally with KSG estimates.
    Skr(SkrArgs),
    /// Write plot-ready data for one figure.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(
            ["fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "fig5"]))]
        fig: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = FigureOptions::default().seed)]
        seed: u64,
        /// Channel draws per distribution/variance point.
        #[arg(long, default_value_t = FigureOptions::default().trials)]
        trials: usize,
        /// Observation pairs per key-rate point.
        #[arg(long, default_value_t = FigureOptions::default().mi_pairs)]
        mi_pairs: usize,
        #[arg(long, default_value_t = 1)]
        shards: usize,
    },
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SchemeArg {
    Cips,
    Cgps,
    Dips,
}

impl From<SchemeArg> for SchemeName {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Cips => SchemeName::Cips,
            SchemeArg::Cgps => SchemeName::Cgps,
            SchemeArg::Dips => SchemeName::Dips,
        }
    }
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Elements along x.
    #[arg(long)]
    mx: Option<usize>,
    /// Elements along y.
    #[arg(long)]
    my: Option<usize>,
    /// CGPS group size.
    #[arg(long)]
    q: Option<usize>,
    /// DIPS quantization bits.
    #[arg(long)]
    bits: Option<u32>,
    /// ψi,θi,ψo,θo in degrees.
    #[arg(long, value_parser = parse_angles, allow_hyphen_values = true)]
    angles: Option<[f64; 4]>,
    /// Element spacing in wavelengths, both axes.
    #[arg(long)]
    spacing: Option<f64>,
    /// Permit CGPS group sizes that do not divide M.
    #[arg(long)]
    allow_remainder: bool,
    /// Evaluate the 1-bit key-rate bound without the ½ factors.
    #[arg(long = "skr-unhalved", alias = "skr-eq29-verbatim")]
    skr_verbatim: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Base TOML config; flags below take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Direct-path gain RE,IM.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    direct_gain: Option<[f64; 2]>,
    /// Noise variance per real quadrature.
    #[arg(long)]
    noise_var: Option<f64>,
    /// Estimate mutual information with KSG.
    #[arg(long)]
    mi: bool,
    #[arg(long)]
    mi_pairs: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Also write observations.csv.
    #[arg(long)]
    observations: bool,
    /// Sweep parameter: M, snr_db, q or bits.
    #[arg(long)]
    sweep: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    sweep_values: Vec<f64>,
    #[arg(long)]
    shards: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SkrArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// START:STEP:END in dB, inclusive.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    snr_db: Option<SnrGrid>,
    /// Add KSG estimates from simulated observation pairs.
    #[arg(long)]
    estimate: bool,
    #[arg(long, default_value_t = 5000)]
    pairs: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    /// Write skr.csv here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_floats<const N: usize>(s: &str) -> std::result::Result<[f64; N], String> {
    let vals: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    vals.try_into().map_err(|v: Vec<f64>| format!("expected {N} comma-separated numbers, got {}", v.len()))
}

fn parse_angles(s: &str) -> std::result::Result<[f64; 4], String> {
    parse_floats::<4>(s)
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    parse_floats::<2>(s)
}

#[derive(Clone, Debug)]
struct SnrGrid(Vec<f64>);

fn parse_range(s: &str) -> std::result::Result<SnrGrid, String> {
    let [start, step, end]: [f64; 3] = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?
        .try_into()
        .map_err(|_| "expected START:STEP:END".to_string())?;
    if !(step > 0.0) || end < start {
        return Err("need STEP > 0 and END >= START".into());
    }
    let count = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok(SnrGrid((0..count).map(|i| start + i as f64 * step).collect()))
}

fn apply_model_args(cfg: &mut ExperimentConfig, m: &ModelArgs) {
    let mc = &mut cfg.model;
    if let Some(s) = m.scheme {
        mc.scheme = s.into();
    }
    if let Some(v) = m.mx {
        mc.mx = v;
    }
    if let Some(v) = m.my {
        mc.my = v;
    }
    if m.q.is_some() {
        mc.q = m.q;
    }
    if m.bits.is_some() {
        mc.bits = m.bits;
    }
    if let Some(a) = m.angles {
        mc.angles_deg = a;
    }
    if let Some(d) = m.spacing {
        mc.spacing_x = d;
        mc.spacing_y = d;
    }
    mc.allow_remainder |= m.allow_remainder;
    if m.skr_verbatim {
        cfg.skr_convention = SkrConvention::UnhalvedProduct;
    }
}

fn simulate(args: &SimulateArgs) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let m = &args.model;
            let missing: Vec<&str> = [
                ("--scheme", m.scheme.is_none()),
                ("--mx", m.mx.is_none()),
                ("--my", m.my.is_none()),
                ("--angles", m.angles.is_none()),
                ("--trials", args.trials.is_none()),
                ("--seed", args.seed.is_none()),
            ]
            .into_iter()
            .filter_map(|(n, miss)| miss.then_some(n))
            .collect();
            if !missing.is_empty() {
                return Err(Error::Config(format!(
                    "missing {} (or pass --config)",
                    missing.join(", ")
                )));
            }
            ExperimentConfig::baseline(PhaseScheme::Cips, 2, 0)
        }
    };
    apply_model_args(&mut cfg, &args.model);
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(g) = args.direct_gain {
        cfg.model.direct_gain = g;
    }
    if let Some(n) = args.noise_var {
        cfg.model.noise_var = n;
    }
    cfg.mi.enabled |= args.mi;
    if let Some(p) = args.mi_pairs {
        cfg.mi.pairs = p;
    }
    if let Some(k) = args.k {
        cfg.mi.k = k;
    }
    cfg.outputs.observations_csv |= args.observations;
    if let Some(p) = &args.sweep {
        cfg.sweep = Some(SweepConfig {
            parameter: p.parse::<SweepParameter>()?,
            values: args.sweep_values.clone(),
        });
    }
    if let Some(s) = args.shards {
        cfg.shards = s;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.outputs.dir.clone())
        .ok_or_else(|| Error::Config("missing --out".into()))?;
    run_and_write(&cfg, &out)
}

fn run_and_write(cfg: &ExperimentConfig, out: &std::path::Path) -> Result<bool> {
    let output = run_experiment(cfg)?;
    write_outputs(&output, cfg, out)?;
    for v in &output.report.verdicts {
        eprintln!(
            "{} {:<24} observed={:.6} expected={:.6} tol={:.6} ({:?})",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.observed,
            v.expected,
            v.tolerance,
            v.kind
        );
    }
    Ok(output.report.passed)
}

fn skr(args: &SkrArgs) -> Result<bool> {
    use ris_keygen::analytic::skr_closed_form_with;
    use ris_keygen::harness::report::{write_sweep_csv, SweepRow};

    let snr_db = match &args.snr_db {
        Some(g) => g.0.clone(),
        None => return Err(Error::Config("missing --snr-db START:STEP:END".into())),
    };
    let mut cfg = ExperimentConfig::baseline(PhaseScheme::Cips, args.pairs.max(2), args.seed);
    apply_model_args(&mut cfg, &args.model);
    cfg.mi.enabled = args.estimate;
    cfg.mi.pairs = args.pairs;
    cfg.mi.k = args.k;
    cfg.shards = args.shards;
    cfg.sweep = Some(SweepConfig {
        parameter: SweepParameter::SnrDb,
        values: snr_db.clone(),
    });
    cfg.check()?;
    let rows: Vec<SweepRow> = if args.estimate {
        let out = run_experiment(&{
            let mut c = cfg.clone();
            c.outputs.samples_csv = false;
            c
        })?;
        out.report.sweep.expect("sweep configured")
    } else {
        let model = cfg.model.to_model()?;
        let m = model.geometry.element_count();
        snr_db
            .iter()
            .map(|&snr| {
                let nv = ris_keygen::harness::snr_to_noise_var(m, snr);
                let r = skr_closed_form_with(
                    model.scheme,
                    &model.geometry,
                    &model.legit_angles,
                    nv,
                    cfg.skr_convention,
                    model.allow_remainder,
                )?;
                Ok(SweepRow {
                    x: snr,
                    empirical: None,
                    analytic: r.rate_bits_per_sample,
                    tolerance: cfg.tolerances.mi_bits,
                    pass: None,
                })
            })
            .collect::<Result<_>>()?
    };
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows).expect("in-memory write");
    print!("{}", String::from_utf8_lossy(&buf));
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
        let p = dir.join("skr.csv");
        std::fs::write(&p, &buf).map_err(|e| Error::Io {
            path: p.display().to_string(),
            source: e,
        })?;
    }
    Ok(rows.iter().all(|r| r.pass.unwrap_or(true)))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(args) => simulate(&args),
        Command::Verify { config, out, shards } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = shards {
                cfg.shards = s;
                cfg.check()?;
            }
            let dir = out
                .or_else(|| cfg.outputs.dir.clone())
                .unwrap_or_else(|| PathBuf::from("verify-out"));
            run_and_write(&cfg, &dir)
        }
        Command::Skr(args) => skr(&args),
        Command::Reproduce {
            fig,
            out,
            seed,
            trials,
            mi_pairs,
            shards,
        } => {
            let opts = FigureOptions {
                seed,
                trials,
                mi_pairs,
                shards,
                ..FigureOptions::default()
            };
            let res = reproduce_figure(fig.parse::<FigureId>()?, &out, &opts)?;
            for f in &res.files {
                println!("{}", f.display());
            }
            for v in res.verdicts.iter().filter(|v| !v.pass) {
                eprintln!("FAIL {} observed={} expected={} tol={}", v.name, v.observed, v.expected, v.tolerance);
            }
            Ok(res.passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
