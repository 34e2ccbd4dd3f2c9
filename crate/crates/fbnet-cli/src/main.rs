//! Experiment runner for the fbnet library: analytic curves, Monte Carlo
//! validation, and multilevel polar-coded modulation sweeps, emitted as CSV
//! with provenance headers.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::{KvConfig, NetworkParams};
use fbnet::constellation::{make_qam, QamRateLut};
use fbnet::network::NetworkConfig;
use fbnet::outage::{
    outage_bounds, outage_qam_mc, outage_spatial_ar, outage_spatial_eta4, outage_spatial_upper,
    OutageQuery,
};
use fbnet::rate::CodingConfig;
use fbnet::sim::{empirical_avg_rate, empirical_outage, FadingAverage, RateMode, SimPlan};
use output::{fmt, CsvSink};

#[derive(Parser)]
#[command(
    name = "fbnet",
    version,
    about = "Finite-blocklength analysis of Poisson cellular downlinks"
)]
struct Cli {
    /// Key-value config file (lambda_per_km2, power_dbm, eta, noise_dbm, r0_m)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed for anything stochastic
    #[arg(long, global = true, default_value_t = 1234)]
    seed: u64,
    /// Worker-thread cap (0 = all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Print progress notes to stderr
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gaussian-codebook finite-blocklength rates over an SNR grid
    Rate(RateArgs),
    /// M-QAM finite-blocklength rates over an SNR grid
    RateQam(RateQamArgs),
    /// Rate-outage bounds (and optional M-QAM Monte Carlo outage)
    Outage(OutageArgs),
    /// Coding-rate meta distribution over a reliability-target grid
    Meta(MetaArgs),
    /// Monte Carlo counterparts of the analytic subcommands
    Simulate(SimulateArgs),
    /// Multilevel polar-coded modulation rate sweep
    Mlpcm(MlpcmArgs),
    /// Registered figure-reproduction experiments
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct RateArgs {
    /// Blocklength
    #[arg(long, default_value_t = 128)]
    n: u32,
    /// Frame error rate in (0, 0.5)
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Serving distance in meters; omitted = spatial average
    #[arg(long)]
    r0: Option<f64>,
    /// SNR grid "lo:hi:step" in dB (alpha0 at fixed r0, transmit SNR for spatial)
    #[arg(long, default_value = "-10:30:2")]
    snr_grid: String,
}

#[derive(Args)]
struct RateQamArgs {
    #[command(flatten)]
    rate: RateArgs,
    /// Constellation order (2, 4, 8, 16)
    #[arg(long = "mod", default_value_t = 4)]
    modulation: usize,
}

#[derive(Args)]
struct OutageArgs {
    /// Target rate in bits per channel use
    #[arg(long)]
    rt: f64,
    #[arg(long, default_value_t = 128)]
    n: u32,
    /// FER threshold in (0, 0.5)
    #[arg(long, default_value_t = 1e-2)]
    eps_bar: f64,
    /// Fixed serving distance in meters
    #[arg(long, conflicts_with = "spatial")]
    r0: Option<f64>,
    /// Spatial average over the serving-distance law
    #[arg(long)]
    spatial: bool,
    /// Optional M-QAM Monte Carlo outage alongside the bounds
    #[arg(long = "mod")]
    modulation: Option<usize>,
    /// Monte Carlo samples (used when --mod is given)
    #[arg(long, default_value_t = 20000)]
    samples: usize,
}

#[derive(Args)]
struct MetaArgs {
    #[arg(long)]
    rt: f64,
    #[arg(long, default_value_t = 128)]
    n: u32,
    #[arg(long, default_value_t = 1e-2)]
    eps_bar: f64,
    /// Serving distance in meters
    #[arg(long, default_value_t = 150.0)]
    r0: f64,
    /// Reliability-target grid "lo:hi:step"
    #[arg(long, default_value = "0.02:0.98:0.02")]
    pt_grid: String,
    #[arg(long, value_enum, default_value_t = MetaMethod::Gilpelaez)]
    method: MetaMethod,
    /// Realizations for the mc method
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Fading draws per realization for the mc method
    #[arg(long, default_value_t = 2000)]
    fading_draws: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetaMethod {
    Gilpelaez,
    Beta,
    Mc,
}

#[derive(Args)]
struct SimulateArgs {
    /// Which analytic quantity to estimate
    #[arg(long, value_enum)]
    what: SimWhat,
    #[arg(long, default_value_t = 128)]
    n: u32,
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    /// Target rate (outage mode)
    #[arg(long, default_value_t = 1.0)]
    rt: f64,
    #[arg(long)]
    r0: Option<f64>,
    /// Constellation order for qam modes
    #[arg(long = "mod", default_value_t = 4)]
    modulation: usize,
    #[arg(long, default_value = "-10:30:5")]
    snr_grid: String,
    #[arg(long, default_value_t = 100000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    fading_draws: usize,
    /// Region radius in units of 1/sqrt(pi lambda)
    #[arg(long, default_value_t = 30.0)]
    region_scale: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimWhat {
    Rate,
    RateQam,
    Outage,
}

#[derive(Args)]
struct MlpcmArgs {
    /// Constellation order (2, 4, 8, 16)
    #[arg(long = "mod", default_value_t = 4)]
    modulation: usize,
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 1e-2)]
    target_fer: f64,
    #[arg(long, default_value = "-5:20:2.5")]
    snr_grid: String,
    #[arg(long, default_value_t = 10000)]
    frames: usize,
    /// Per-level information-length step of the sweep
    #[arg(long, default_value_t = 4)]
    k_step: usize,
    #[arg(long, value_enum, default_value_t = MlpcmChannel::Network)]
    channel: MlpcmChannel,
    /// Serving distance for the network channel
    #[arg(long, default_value_t = 150.0)]
    r0: f64,
    #[arg(long, default_value_t = 15.0)]
    region_scale: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MlpcmChannel {
    Awgn,
    Network,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Registered experiment id (use `list` to enumerate)
    #[arg(long)]
    id: String,
    /// Sample-count override for Monte Carlo parts
    #[arg(long)]
    samples: Option<usize>,
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("grid {spec:?}: expected lo:hi:step"));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| format!("bad grid lo {:?}", parts[0]))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| format!("bad grid hi {:?}", parts[1]))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|_| format!("bad grid step {:?}", parts[2]))?;
    if step <= 0.0 || hi < lo {
        return Err(format!("grid {spec:?}: need lo <= hi and step > 0"));
    }
    let mut grid = Vec::new();
    let mut x = lo;
    while x <= hi + 1e-9 * step {
        grid.push(x);
        x += step;
    }
    Ok(grid)
}

/// Noise power that yields average SNR `alpha0` (dB) at distance r0.
fn noise_for_alpha0(params: &NetworkParams, r0: f64, alpha0_db: f64) -> f64 {
    config::dbm_to_watts(params.power_dbm) * r0.powf(-params.eta) / 10f64.powf(alpha0_db / 10.0)
}

/// Noise power for a transmit SNR (dB) in the km-based convention.
fn noise_for_tx_snr(params: &NetworkParams, tx_snr_db: f64) -> f64 {
    config::dbm_to_watts(params.power_dbm) * 1000f64.powf(-params.eta)
        / 10f64.powf(tx_snr_db / 10.0)
}

pub(crate) struct Ctx {
    params: NetworkParams,
    out: Option<PathBuf>,
    seed: u64,
    verbose: bool,
}

impl Ctx {
    fn cfg_with_noise(&self, noise: f64) -> Result<NetworkConfig, String> {
        NetworkConfig::new(
            self.params.lambda_per_km2 * 1e-6,
            config::dbm_to_watts(self.params.power_dbm),
            self.params.eta,
            noise,
        )
        .map_err(|e| e.to_string())
    }

    fn sink(&self, name: &str, extra: &[(String, String)]) -> Result<CsvSink, String> {
        let mut params = vec![
            (
                "lambda_per_km2".to_string(),
                self.params.lambda_per_km2.to_string(),
            ),
            ("power_dbm".to_string(), self.params.power_dbm.to_string()),
            ("eta".to_string(), self.params.eta.to_string()),
            (
                "noise_dbm".to_string(),
                self.params
                    .noise_dbm
                    .map(|v| v.to_string())
                    .unwrap_or_else(|| "interference-limited".to_string()),
            ),
        ];
        params.extend_from_slice(extra);
        CsvSink::create(self.out.as_deref(), name, &params, self.seed)
    }

    fn note(&self, text: &str) {
        if self.verbose {
            eprintln!("[fbnet] {text}");
        }
    }
}

fn run_rate(ctx: &Ctx, args: &RateArgs) -> Result<(), String> {
    let coding = CodingConfig::new(args.n, args.eps).map_err(|e| e.to_string())?;
    let grid = parse_grid(&args.snr_grid)?;
    let mut sink = ctx.sink(
        "rate",
        &[
            ("n".to_string(), args.n.to_string()),
            ("eps".to_string(), args.eps.to_string()),
            (
                "r0_m".to_string(),
                args.r0
                    .map(|v| v.to_string())
                    .unwrap_or("spatial".to_string()),
            ),
        ],
    )?;
    sink.columns(&[
        "snr_db",
        "rate",
        "capacity_term",
        "dispersion_term",
        "correction_term",
    ])?;
    for &snr_db in &grid {
        ctx.note(&format!("rate point {snr_db} dB"));
        let r = match args.r0 {
            Some(r0) => {
                let cfg = ctx.cfg_with_noise(noise_for_alpha0(&ctx.params, r0, snr_db))?;
                let geom = cfg.link(r0).map_err(|e| e.to_string())?;
                fbnet::rate::avg_rate_fixed_r0(&cfg, &geom, &coding)
            }
            None => {
                let cfg = ctx.cfg_with_noise(noise_for_tx_snr(&ctx.params, snr_db))?;
                fbnet::rate::avg_rate_spatial(&cfg, &coding)
            }
        }
        .map_err(map_err_str)?;
        sink.row(&[
            fmt(snr_db),
            fmt(r.rate),
            fmt(r.capacity_term),
            fmt(r.dispersion_term),
            fmt(r.correction_term),
        ])?;
    }
    sink.finish()
}

fn run_rate_qam(ctx: &Ctx, args: &RateQamArgs) -> Result<(), String> {
    let coding = CodingConfig::new(args.rate.n, args.rate.eps).map_err(|e| e.to_string())?;
    let constellation = make_qam(args.modulation).map_err(|e| e.to_string())?;
    ctx.note("building constellation rate table");
    let lut = QamRateLut::new(&constellation);
    let grid = parse_grid(&args.rate.snr_grid)?;
    let mut sink = ctx.sink(
        "rate-qam",
        &[
            ("mod".to_string(), args.modulation.to_string()),
            ("n".to_string(), args.rate.n.to_string()),
            ("eps".to_string(), args.rate.eps.to_string()),
            (
                "r0_m".to_string(),
                args.rate
                    .r0
                    .map(|v| v.to_string())
                    .unwrap_or("spatial".to_string()),
            ),
        ],
    )?;
    sink.columns(&["snr_db", "rate", "mi_term", "disp_term", "correction_term"])?;
    for &snr_db in &grid {
        ctx.note(&format!("rate-qam point {snr_db} dB"));
        let r = match args.rate.r0 {
            Some(r0) => {
                let cfg = ctx.cfg_with_noise(noise_for_alpha0(&ctx.params, r0, snr_db))?;
                let geom = cfg.link(r0).map_err(|e| e.to_string())?;
                fbnet::constellation::avg_rate_qam_fixed_r0_with_lut(&lut, &cfg, &geom, &coding)
            }
            None => {
                let cfg = ctx.cfg_with_noise(noise_for_tx_snr(&ctx.params, snr_db))?;
                fbnet::constellation::avg_rate_qam_spatial_with_lut(&lut, &cfg, &coding)
            }
        }
        .map_err(map_err_str)?;
        sink.row(&[
            fmt(snr_db),
            fmt(r.rate),
            fmt(r.capacity_term),
            fmt(r.dispersion_term),
            fmt(r.correction_term),
        ])?;
    }
    sink.finish()
}

fn run_outage(ctx: &Ctx, args: &OutageArgs) -> Result<(), String> {
    let coding = CodingConfig::new(args.n, args.eps_bar).map_err(|e| e.to_string())?;
    let query = OutageQuery::new(args.rt, coding).map_err(|e| e.to_string())?;
    let cfg = ctx.params.to_network_config().map_err(|e| e.to_string())?;
    let mut sink = ctx.sink(
        "outage",
        &[
            ("rt".to_string(), args.rt.to_string()),
            ("n".to_string(), args.n.to_string()),
            ("eps_bar".to_string(), args.eps_bar.to_string()),
        ],
    )?;
    sink.columns(&["x", "lower", "upper", "mc_estimate", "ci_low", "ci_high"])?;
    let (x, lower, upper) = if args.spatial || args.r0.is_none() {
        let upper = outage_spatial_upper(&cfg, &query).map_err(map_err_str)?;
        let lower = outage_spatial_ar(&cfg, args.rt).map_err(map_err_str)?;
        if cfg.eta() == 4.0 && cfg.noise() > 0.0 {
            let closed = outage_spatial_eta4(&cfg, &query).map_err(map_err_str)?;
            ctx.note(&format!("eta=4 closed form: {closed}"));
        }
        ("spatial".to_string(), lower, upper)
    } else {
        let r0 = args.r0.unwrap();
        let b = outage_bounds(&cfg, r0, &query).map_err(map_err_str)?;
        (fmt(r0), b.lower, b.upper)
    };
    let mc = match args.modulation {
        Some(m) => {
            let c = make_qam(m).map_err(|e| e.to_string())?;
            let mut plan = SimPlan::new(args.samples, 1, ctx.seed).map_err(|e| e.to_string())?;
            if let Some(r0) = args.r0 {
                plan = plan.with_fixed_r0(r0);
            }
            Some(outage_qam_mc(&cfg, &query, &c, &plan).map_err(map_err_str)?)
        }
        None => None,
    };
    match mc {
        Some(est) => sink.row(&[
            x,
            fmt(lower),
            fmt(upper),
            fmt(est.mean),
            fmt(est.low()),
            fmt(est.high()),
        ])?,
        None => sink.row(&[
            x,
            fmt(lower),
            fmt(upper),
            String::new(),
            String::new(),
            String::new(),
        ])?,
    }
    sink.finish()
}

fn run_meta(ctx: &Ctx, args: &MetaArgs) -> Result<(), String> {
    let coding = CodingConfig::new(args.n, args.eps_bar).map_err(|e| e.to_string())?;
    let query = OutageQuery::new(args.rt, coding).map_err(|e| e.to_string())?;
    let meta = fbnet::meta::MetaQuery::new(query, args.r0).map_err(|e| e.to_string())?;
    let cfg = ctx.params.to_network_config().map_err(|e| e.to_string())?;
    let grid = parse_grid(&args.pt_grid)?;
    let mut sink = ctx.sink(
        "meta",
        &[
            ("rt".to_string(), args.rt.to_string()),
            ("n".to_string(), args.n.to_string()),
            ("eps_bar".to_string(), args.eps_bar.to_string()),
            ("r0_m".to_string(), args.r0.to_string()),
            (
                "method".to_string(),
                match args.method {
                    MetaMethod::Gilpelaez => "gilpelaez",
                    MetaMethod::Beta => "beta",
                    MetaMethod::Mc => "mc",
                }
                .to_string(),
            ),
        ],
    )?;
    sink.columns(&["p_t", "meta_ccdf"])?;
    let mc_samples = if args.method == MetaMethod::Mc {
        let plan = SimPlan::new(args.samples, args.fading_draws, ctx.seed)
            .map_err(|e| e.to_string())?
            .with_fixed_r0(args.r0);
        Some(fbnet::sim::empirical_meta(&cfg, meta.query(), &plan, None).map_err(map_err_str)?)
    } else {
        None
    };
    for &p_t in &grid {
        if !(p_t > 0.0 && p_t < 1.0) {
            continue;
        }
        let value = match args.method {
            MetaMethod::Gilpelaez => {
                fbnet::meta::meta_cdf_gilpelaez(&cfg, &meta, p_t).map_err(map_err_str)?
            }
            MetaMethod::Beta => {
                fbnet::meta::meta_cdf_beta(&cfg, &meta, p_t).map_err(map_err_str)?
            }
            MetaMethod::Mc => {
                let samples = mc_samples.as_ref().expect("sampled above");
                fbnet::sim::MetaSamples::ccdf(&samples.exact, p_t)
            }
        };
        sink.row(&[fmt(p_t), fmt(value)])?;
    }
    sink.finish()
}

fn run_simulate(ctx: &Ctx, args: &SimulateArgs) -> Result<(), String> {
    let coding = CodingConfig::new(args.n, args.eps).map_err(|e| e.to_string())?;
    let grid = parse_grid(&args.snr_grid)?;
    let mode = match args.what {
        SimWhat::Rate | SimWhat::Outage => RateMode::Gaussian,
        SimWhat::RateQam => RateMode::Qam(make_qam(args.modulation).map_err(|e| e.to_string())?),
    };
    let mut sink = ctx.sink(
        "simulate",
        &[
            (
                "what".to_string(),
                match args.what {
                    SimWhat::Rate => "rate",
                    SimWhat::RateQam => "rate-qam",
                    SimWhat::Outage => "outage",
                }
                .to_string(),
            ),
            ("n".to_string(), args.n.to_string()),
            ("eps".to_string(), args.eps.to_string()),
            ("samples".to_string(), args.samples.to_string()),
            ("fading_draws".to_string(), args.fading_draws.to_string()),
            ("region_scale".to_string(), args.region_scale.to_string()),
        ],
    )?;
    sink.columns(&["snr_db", "estimate", "ci_low", "ci_high"])?;
    for &snr_db in &grid {
        ctx.note(&format!("simulate point {snr_db} dB"));
        let noise = match args.r0 {
            Some(r0) => noise_for_alpha0(&ctx.params, r0, snr_db),
            None => noise_for_tx_snr(&ctx.params, snr_db),
        };
        let cfg = ctx.cfg_with_noise(noise)?;
        let mut plan = SimPlan::new(args.samples, args.fading_draws, ctx.seed)
            .map_err(|e| e.to_string())?
            .with_region_scale(args.region_scale);
        if let Some(r0) = args.r0 {
            plan = plan.with_fixed_r0(r0);
        }
        let est = match args.what {
            SimWhat::Rate | SimWhat::RateQam => empirical_avg_rate(&cfg, &coding, &plan, &mode),
            SimWhat::Outage => {
                let query = OutageQuery::new(args.rt, coding).map_err(|e| e.to_string())?;
                empirical_outage(&cfg, &query, &plan, &mode, FadingAverage::Sampled)
                    .map_err(map_err_str)?
            }
        };
        sink.row(&[fmt(snr_db), fmt(est.mean), fmt(est.low()), fmt(est.high())])?;
    }
    sink.finish()
}

fn run_mlpcm(ctx: &Ctx, args: &MlpcmArgs) -> Result<(), String> {
    let grid = parse_grid(&args.snr_grid)?;
    let mut sink = ctx.sink(
        "mlpcm",
        &[
            ("mod".to_string(), args.modulation.to_string()),
            ("n".to_string(), args.n.to_string()),
            ("target_fer".to_string(), args.target_fer.to_string()),
            ("frames".to_string(), args.frames.to_string()),
            (
                "channel".to_string(),
                match args.channel {
                    MlpcmChannel::Awgn => "awgn",
                    MlpcmChannel::Network => "network",
                }
                .to_string(),
            ),
        ],
    )?;
    sink.columns(&["snr_db", "achieved_rate", "fer_at_rate", "ci"])?;
    let rows = match args.channel {
        MlpcmChannel::Awgn => {
            let points: Vec<(f64, fbnet::mlpcm::AwgnChannel)> = grid
                .iter()
                .map(|&db| {
                    (
                        db,
                        fbnet::mlpcm::AwgnChannel {
                            snr: 10f64.powf(db / 10.0),
                        },
                    )
                })
                .collect();
            fbnet::mlpcm::rate_sweep(
                args.modulation,
                args.n,
                &points,
                args.target_fer,
                args.frames,
                args.k_step,
                ctx.seed,
            )
            .map_err(map_err_str)?
        }
        MlpcmChannel::Network => {
            let mut points = Vec::with_capacity(grid.len());
            for &db in &grid {
                let cfg = ctx.cfg_with_noise(noise_for_alpha0(&ctx.params, args.r0, db))?;
                points.push((
                    db,
                    fbnet::mlpcm::NetworkChannel::new(cfg, args.r0, args.region_scale),
                ));
            }
            fbnet::mlpcm::rate_sweep(
                args.modulation,
                args.n,
                &points,
                args.target_fer,
                args.frames,
                args.k_step,
                ctx.seed,
            )
            .map_err(map_err_str)?
        }
    };
    for p in rows {
        sink.row(&[
            fmt(p.snr_db),
            fmt(p.achieved_rate),
            fmt(p.fer_at_rate),
            fmt(p.fer_ci),
        ])?;
    }
    sink.finish()
}

enum CliError {
    Config(String),
    Numerical(String),
}

pub(crate) fn map_err_str(e: fbnet::Error) -> String {
    format!("__numerical__{e}")
}

fn classify(e: String) -> CliError {
    if let Some(msg) = e.strip_prefix("__numerical__") {
        if msg.starts_with("failed to converge") {
            return CliError::Numerical(msg.to_string());
        }
        return CliError::Config(msg.to_string());
    }
    CliError::Config(e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    let params = match &cli.config {
        Some(path) => match KvConfig::load(path).and_then(|kv| NetworkParams::from_config(&kv)) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("config error: {e}");
                return ExitCode::from(2);
            }
        },
        None => NetworkParams::default(),
    };
    let ctx = Ctx {
        params,
        out: cli.out.clone(),
        seed: cli.seed,
        verbose: cli.verbose,
    };
    let result = match &cli.command {
        Command::Rate(args) => run_rate(&ctx, args),
        Command::RateQam(args) => run_rate_qam(&ctx, args),
        Command::Outage(args) => run_outage(&ctx, args),
        Command::Meta(args) => run_meta(&ctx, args),
        Command::Simulate(args) => run_simulate(&ctx, args),
        Command::Mlpcm(args) => run_mlpcm(&ctx, args),
        Command::Experiment(args) => experiments::run(&ctx, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match classify(e) {
            CliError::Numerical(msg) => {
                eprintln!("numerical error: {msg}");
                ExitCode::from(3)
            }
            CliError::Config(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
    }
}
