//! Registered figure-reproduction experiments. Each preset writes one CSV
//! (long format, a `curve` column distinguishing families) and is
//! deterministic given the seed.

use fbnet::constellation::{make_qam, QamRateLut};
use fbnet::meta::MetaQuery;
use fbnet::network::{CdfMethod, NetworkConfig};
use fbnet::outage::{
    outage_bounds, outage_qam_mc, outage_spatial_ar, outage_spatial_eta4, reliability,
    reliability_ar, Geometry, OutageQuery,
};
use fbnet::rate::CodingConfig;
use fbnet::sim::{
    empirical_avg_rate, empirical_meta, empirical_outage, FadingAverage, MetaSamples, RateMode,
    SimPlan,
};

use crate::output::fmt;
use crate::{map_err_str, Ctx, ExperimentArgs};

type ExpFn = fn(&Ctx, Option<usize>) -> Result<(), String>;

/// (id, single-thread budget note, runner)
const REGISTRY: &[(&str, &str, ExpFn)] = &[
    (
        "fig1",
        "interference-power CDF, Gamma fit vs exact inversion (~1 min)",
        fig1,
    ),
    (
        "fig2a",
        "rates vs average SNR at r0 = 250 m for n in {128, 2048}, eps in {1e-2, 1e-5, 1e-6} (~1 min)",
        fig2a,
    ),
    (
        "fig3b",
        "M-QAM rates vs average SNR at r0 = 150 m, n = 128, eps = 1e-2, with Monte Carlo validation (~10 min)",
        fig3b,
    ),
    (
        "fig4a",
        "spatially averaged rates vs transmit SNR (~2 min)",
        fig4a,
    ),
    (
        "fig4b",
        "spatially averaged M-QAM rates at n = 512, eps = 1e-2 (~5 min)",
        fig4b,
    ),
    (
        "fig5",
        "MLPCM achieved rates vs theory at r0 = 150 m, n = 128, eps = 1e-2 (~30 min)",
        fig5,
    ),
    (
        "fig6",
        "outage vs r0 at lambda in {1, 9}/km^2, eps_bar in {1e-2, 1e-6}, n = 128, 0 dB (~5 min)",
        fig6,
    ),
    (
        "fig7",
        "spatial outage vs target rate for n in {128, 2048}, eps_bar in {1e-2, 1e-6}, 0 dB (~10 min)",
        fig7,
    ),
    (
        "fig8",
        "M-QAM Monte Carlo outage vs r0 at Rt in {0.825, 1.85}, n = 128, eps_bar = 1e-2, 0 dB (~15 min)",
        fig8,
    ),
    (
        "fig9a",
        "meta distribution, FBR vs AR, at n = 128, eps_bar = 1e-5, r0 = 150 m (~2 min)",
        fig9a,
    ),
    (
        "fig9b",
        "meta distribution, Gil-Pelaez vs beta vs empirical, r0 in {150, 250, 500} m (~20 min)",
        fig9b,
    ),
    (
        "fig11",
        "reliability vs FER threshold at fixed r0 = 250 m and spatial (~3 min)",
        fig11,
    ),
];

pub(crate) fn run(ctx: &Ctx, args: &ExperimentArgs) -> Result<(), String> {
    if args.id == "list" {
        for (id, note, _) in REGISTRY {
            println!("{id}: {note}");
        }
        return Ok(());
    }
    match REGISTRY.iter().find(|(id, _, _)| *id == args.id) {
        Some((_, note, f)) => {
            ctx.note(note);
            f(ctx, args.samples)
        }
        None => {
            let ids: Vec<&str> = REGISTRY.iter().map(|(id, _, _)| *id).collect();
            Err(format!(
                "unknown experiment id {:?}; registered: {} (or `list`)",
                args.id,
                ids.join(", ")
            ))
        }
    }
}

fn km_cfg(lambda: f64, snr_db: f64) -> Result<NetworkConfig, String> {
    NetworkConfig::from_km_units(lambda, 4.0, snr_db).map_err(|e| e.to_string())
}

fn fig1(ctx: &Ctx, _samples: Option<usize>) -> Result<(), String> {
    let cfg = km_cfg(1.0, 0.0)?;
    let mut sink = ctx.sink("fig1", &[("r0_m".into(), "150,250".into())])?;
    sink.columns(&["r0_m", "x_over_theta", "cdf_exact", "cdf_gamma"])?;
    for &r0 in &[150.0, 250.0] {
        let theta = cfg.gamma_fit(r0).scale;
        for i in 0..=40 {
            let x = theta * 10f64.powf(-2.0 + 4.0 * i as f64 / 40.0);
            let exact = cfg
                .interference_cdf(r0, x, CdfMethod::Exact)
                .map_err(map_err_str)?;
            let gamma = cfg
                .interference_cdf(r0, x, CdfMethod::Gamma)
                .map_err(map_err_str)?;
            sink.row(&[fmt(r0), fmt(x / theta), fmt(exact), fmt(gamma)])?;
        }
    }
    sink.finish()
}

fn fig2a(ctx: &Ctx, _samples: Option<usize>) -> Result<(), String> {
    let r0 = 250.0;
    let mut sink = ctx.sink("fig2a", &[("r0_m".into(), fmt(r0))])?;
    sink.columns(&["snr_db", "curve", "rate"])?;
    for i in 0..=40 {
        let snr_db = -10.0 + 40.0 * i as f64 / 40.0;
        let cfg = km_cfg(1.0, snr_db + 10.0 * 4.0 * (r0 / 1000.0).log10())?;
        // the shift makes alpha0 at r0 equal snr_db
        let geom = cfg.link(r0).map_err(|e| e.to_string())?;
        let ar = fbnet::rate::avg_capacity_ar(&cfg, &geom).map_err(map_err_str)?;
        sink.row(&[fmt(snr_db), "ar".into(), fmt(ar)])?;
        for &n in &[128u32, 2048] {
            for &eps in &[1e-2f64, 1e-5, 1e-6] {
                let coding = CodingConfig::new(n, eps).map_err(|e| e.to_string())?;
                let r = fbnet::rate::avg_rate_fixed_r0(&cfg, &geom, &coding)
                    .map_err(map_err_str)?;
                sink.row(&[fmt(snr_db), format!("n={n} eps={eps}"), fmt(r.rate)])?;
            }
        }
    }
    sink.finish()
}

fn alpha0_cfg(r0: f64, alpha0_db: f64) -> Result<NetworkConfig, String> {
    // lambda = 1 BS/km^2, P = 1 W; noise chosen so alpha0 at r0 is as given
    let noise = r0.powf(-4.0) / 10f64.powf(alpha0_db / 10.0);
    NetworkConfig::new(1e-6, 1.0, 4.0, noise).map_err(|e| e.to_string())
}

fn fig3b(ctx: &Ctx, samples: Option<usize>) -> Result<(), String> {
    let r0 = 150.0;
    let coding = CodingConfig::new(128, 1e-2).map_err(|e| e.to_string())?;
    let samples = samples.unwrap_or(20_000);
    let mut sink = ctx.sink(
        "fig3b",
        &[
            ("r0_m".into(), fmt(r0)),
            ("n".into(), "128".into()),
            ("eps".into(), "1e-2".into()),
            ("mc_samples".into(), samples.to_string()),
        ],
    )?;
    sink.columns(&["snr_db", "curve", "rate", "ci_low", "ci_high"])?;
    let luts: Vec<(usize, QamRateLut)> = [2usize, 4, 8, 16]
        .iter()
        .map(|&m| {
            ctx.note(&format!("building {m}-QAM rate table"));
            (m, QamRateLut::new(&make_qam(m).expect("supported order")))
        })
        .collect();
    for i in 0..=12 {
        let snr_db = -10.0 + 40.0 * i as f64 / 12.0;
        ctx.note(&format!("fig3b point {snr_db} dB"));
        let cfg = alpha0_cfg(r0, snr_db)?;
        let geom = cfg.link(r0).map_err(|e| e.to_string())?;
        let gauss =
            fbnet::rate::avg_rate_fixed_r0(&cfg, &geom, &coding).map_err(map_err_str)?;
        sink.row(&[
            fmt(snr_db),
            "gaussian".into(),
            fmt(gauss.rate),
            String::new(),
            String::new(),
        ])?;
        for (m, lut) in &luts {
            let r = fbnet::constellation::avg_rate_qam_fixed_r0_with_lut(
                lut, &cfg, &geom, &coding,
            )
            .map_err(map_err_str)?;
            sink.row(&[
                fmt(snr_db),
                format!("qam{m}"),
                fmt(r.rate),
                String::new(),
                String::new(),
            ])?;
            let plan = SimPlan::new(samples, 1, ctx.seed)
                .map_err(|e| e.to_string())?
                .with_fixed_r0(r0)
                .with_region_scale(15.0);
            let mode = RateMode::Qam(make_qam(*m).map_err(|e| e.to_string())?);
            let est = empirical_avg_rate(&cfg, &coding, &plan, &mode);
            sink.row(&[
                fmt(snr_db),
                format!("qam{m}-mc"),
                fmt(est.mean),
                fmt(est.low()),
                fmt(est.high()),
            ])?;
        }
    }
    sink.finish()
}

fn fig4a(ctx: &Ctx, _samples: Option<usize>) -> Result<(), String> {
    let mut sink = ctx.sink("fig4a", &[])?;
    sink.columns(&["tx_snr_db", "curve", "rate"])?;
    for i in 0..=24 {
        let snr_db = -10.0 + 50.0 * i as f64 / 24.0;
        let cfg = km_cfg(1.0, snr_db)?;
        for &n in &[128u32, 2048] {
            for &eps in &[1e-2f64, 1e-5] {
                let coding = CodingConfig::new(n, eps).map_err(|e| e.to_string())?;
                let r = fbnet::rate::avg_rate_spatial(&cfg, &coding).map_err(map_err_str)?;
                sink.row(&[fmt(snr_db), format!("n={n} eps={eps}"), fmt(r.rate)])?;
            }
        }
    }
    sink.finish()
}

fn fig4b(ctx: &Ctx, _samples: Option<usize>) -> Result<(), String> {
    let coding = CodingConfig::new(512, 1e-2).map_err(|e| e.to_string())?;
    let mut sink = ctx.sink(
        "fig4b",
        &[("n".into(), "512".into()), ("eps".into(), "1e-2".into())],
    )?;
    sink.columns(&["tx_snr_db", "curve", "rate"])?;
    let luts: Vec<(usize, QamRateLut)> = [2usize, 4, 8, 16]
        .iter()
        .map(|&m| (m, QamRateLut::new(&make_qam(m).expect("supported order"))))
        .collect();
    for i in 0..=16 {
        let snr_db = -10.0 + 60.0 * i as f64 / 16.0;
        ctx.note(&format!("fig4b point {snr_db} dB"));
        let cfg = km_cfg(1.0, snr_db)?;
        for (m, lut) in &luts {
            let r = fbnet::constellation::avg_rate_qam_spatial_with_lut(lut, &cfg, &coding)
                .map_err(map_err_str)?;
            sink.row(&[fmt(snr_db), format!("qam{m}"), fmt(r.rate)])?;
        }
    }
    sink.finish()
}

fn fig5(ctx: &Ctx, samples: Option<usize>) -> Result<(), String> {
    let r0 = 150.0;
    let frames = samples.unwrap_or(10_000);
    let coding = CodingConfig::new(128, 1e-2).map_err(|e| e.to_string())?;
    let mut sink = ctx.sink(
        "fig5",
        &[
            ("r0_m".into(), fmt(r0)),
            ("n".into(), "128".into()),
            ("target_fer".into(), "1e-2".into()),
            ("frames".into(), frames.to_string()),
        ],
    )?;
    sink.columns(&["snr_db", "curve", "rate", "fer", "ci"])?;
    let snr_grid: Vec<f64> = (0..=10).map(|i| -5.0 + 25.0 * i as f64 / 10.0).collect();
    for &m in &[2usize, 4, 8, 16] {
        ctx.note(&format!("fig5 theory M={m}"));
        let lut = QamRateLut::new(&make_qam(m).map_err(|e| e.to_string())?);
        for &snr_db in &snr_grid {
            let cfg = alpha0_cfg(r0, snr_db)?;
            let geom = cfg.link(r0).map_err(|e| e.to_string())?;
            let r = fbnet::constellation::avg_rate_qam_fixed_r0_with_lut(
                &lut, &cfg, &geom, &coding,
            )
            .map_err(map_err_str)?;
            sink.row(&[
                fmt(snr_db),
                format!("qam{m}-theory"),
                fmt(r.rate),
                String::new(),
                String::new(),
            ])?;
        }
        ctx.note(&format!("fig5 MLPCM sweep M={m}"));
        let mut points = Vec::new();
        for &snr_db in &snr_grid {
            let cfg = alpha0_cfg(r0, snr_db)?;
            points.push((
                snr_db,
                fbnet::mlpcm::NetworkChannel::new(cfg, r0, 15.0),
            ));
        }
        let sweep =
            fbnet::mlpcm::rate_sweep(m, 128, &points, 1e-2, frames, 4, ctx.seed)
                .map_err(map_err_str)?;
        for p in sweep {
            sink.row(&[
                fmt(p.snr_db),
                format!("qam{m}-mlpcm"),
                fmt(p.achieved_rate),
                fmt(p.fer_at_rate),
                fmt(p.fer_ci),
            ])?;
        }
    }
    sink.finish()
}

fn fig6(ctx: &Ctx, samples: Option<usize>) -> Result<(), String> {
    let samples = samples.unwrap_or(20_000);
    let mut sink = ctx.sink(
        "fig6",
        &[
            ("n".into(), "128".into()),
            ("rt".into(), "1".into()),
            ("mc_samples".into(), samples.to_string()),
        ],
    )?;
    sink.columns(&["r0_m", "curve", "lower", "upper", "mc", "ci_low", "ci_high"])?;
    for &lambda in &[1.0f64, 9.0] {
        let cfg = km_cfg(lambda, 0.0)?;
        for &eps_bar in &[1e-2f64, 1e-6] {
            let coding = CodingConfig::new(128, eps_bar).map_err(|e| e.to_string())?;
            let query = OutageQuery::new(1.0, coding).map_err(|e| e.to_string())?;
            for i in 1..=12 {
                let r0 = 50.0 * i as f64;
                let b = outage_bounds(&cfg, r0, &query).map_err(map_err_str)?;
                let plan = SimPlan::new(samples, 1, ctx.seed)
                    .map_err(|e| e.to_string())?
                    .with_fixed_r0(r0)
                    .with_region_scale(15.0);
                let est = empirical_outage(
                    &cfg,
                    &query,
                    &plan,
                    &RateMode::Gaussian,
                    FadingAverage::Analytic,
                )
                .map_err(map_err_str)?;
                sink.row(&[
                    fmt(r0),
                    format!("lambda={lambda} eps={eps_bar}"),
                    fmt(b.lower),
                    fmt(b.upper),
                    fmt(est.mean),
                    fmt(est.low()),
                    fmt(est.high()),
                ])?;
            }
        }
    }
    sink.finish()
}

fn fig7(ctx: &Ctx, samples: Option<usize>) -> Result<(), String> {
    let samples = samples.unwrap_or(20_000);
    let cfg = km_cfg(1.0, 0.0)?;
    let mut sink = ctx.sink(
        "fig7",
        &[("mc_samples".into(), samples.to_string())],
    )?;
    sink.columns(&[
        "rt",
        "curve",
        "ar",
        "upper_closed_form",
        "mc",
        "ci_low",
        "ci_high",
    ])?;
    for &n in &[128u32, 2048] {
        for &eps_bar in &[1e-2f64, 1e-6] {
            let coding = CodingConfig::new(n, eps_bar).map_err(|e| e.to_string())?;
            for i in 1..=20 {
                let rt = 0.3 * i as f64;
                let query = OutageQuery::new(rt, coding).map_err(|e| e.to_string())?;
                let ar = outage_spatial_ar(&cfg, rt).map_err(map_err_str)?;
                let upper = outage_spatial_eta4(&cfg, &query).map_err(map_err_str)?;
                let plan = SimPlan::new(samples, 1, ctx.seed)
                    .map_err(|e| e.to_string())?
                    .with_region_scale(15.0);
                let est = empirical_outage(
                    &cfg,
                    &query,
                    &plan,
                    &RateMode::Gaussian,
                    FadingAverage::Analytic,
                )
                .map_err(map_err_str)?;
                sink.row(&[
                    fmt(rt),
                    format!("n={n} eps={eps_bar}"),
                    fmt(ar),
                    fmt(upper),
                    fmt(est.mean),
                    fmt(est.low()),
                    fmt(est.high()),
                ])?;
            }
        }
    }
    sink.finish()
}

fn fig8(ctx: &Ctx, samples: Option<usize>) -> Result<(), String> {
    let samples = samples.unwrap_or(20_000);
    let cfg = km_cfg(1.0, 0.0)?;
    let coding = CodingConfig::new(128, 1e-2).map_err(|e| e.to_string())?;
    let mut sink = ctx.sink(
        "fig8",
        &[("mc_samples".into(), samples.to_string())],
    )?;
    sink.columns(&["r0_m", "curve", "outage", "ci_low", "ci_high"])?;
    for &rt in &[0.825f64, 1.85] {
        let query = OutageQuery::new(rt, coding).map_err(|e| e.to_string())?;
        for i in 1..=10 {
            let r0 = 60.0 * i as f64;
            // Gaussian-codebook floor
            let b = outage_bounds(&cfg, r0, &query).map_err(map_err_str)?;
            sink.row(&[
                fmt(r0),
                format!("rt={rt} gaussian-lower"),
                fmt(b.lower),
                String::new(),
                String::new(),
            ])?;
            for &m in &[2usize, 4, 16] {
                let c = make_qam(m).map_err(|e| e.to_string())?;
                let plan = SimPlan::new(samples, 1, ctx.seed)
                    .map_err(|e| e.to_string())?
                    .with_fixed_r0(r0)
                    .with_region_scale(15.0);
                let est = outage_qam_mc(&cfg, &query, &c, &plan).map_err(map_err_str)?;
                sink.row(&[
                    fmt(r0),
                    format!("rt={rt} qam{m}"),
                    fmt(est.mean),
                    fmt(est.low()),
                    fmt(est.high()),
                ])?;
            }
        }
    }
    sink.finish()
}

fn fig9a(ctx: &Ctx, _samples: Option<usize>) -> Result<(), String> {
    let cfg = NetworkConfig::interference_limited(1.0, 4.0).map_err(|e| e.to_string())?;
    let coding = CodingConfig::new(128, 1e-5).map_err(|e| e.to_string())?;
    let mut sink = ctx.sink(
        "fig9a",
        &[
            ("n".into(), "128".into()),
            ("eps_bar".into(), "1e-5".into()),
            ("r0_m".into(), "150".into()),
        ],
    )?;
    sink.columns(&["p_t", "curve", "meta_ccdf"])?;
    for &rt in &[0.1375f64, 0.3964, 1.0, 2.0574, 3.4594] {
        let query = OutageQuery::new(rt, coding).map_err(|e| e.to_string())?;
        let meta = MetaQuery::new(query, 150.0).map_err(|e| e.to_string())?;
        let ar = meta.ar_baseline();
        for i in 1..=49 {
            let p_t = i as f64 / 50.0;
            let fbr = fbnet::meta::meta_cdf_gilpelaez(&cfg, &meta, p_t).map_err(map_err_str)?;
            let arv =
                fbnet::meta::meta_cdf_gilpelaez_ar(&cfg, &ar, p_t).map_err(map_err_str)?;
            sink.row(&[fmt(p_t), format!("rt={rt} fbr"), fmt(fbr)])?;
            sink.row(&[fmt(p_t), format!("rt={rt} ar"), fmt(arv)])?;
        }
    }
    sink.finish()
}

fn fig9b(ctx: &Ctx, samples: Option<usize>) -> Result<(), String> {
    let realizations = samples.unwrap_or(2000);
    let cfg = NetworkConfig::interference_limited(1.0, 4.0).map_err(|e| e.to_string())?;
    let coding = CodingConfig::new(128, 1e-2).map_err(|e| e.to_string())?;
    let query = OutageQuery::new(1.0, coding).map_err(|e| e.to_string())?;
    let mut sink = ctx.sink(
        "fig9b",
        &[
            ("n".into(), "128".into()),
            ("eps_bar".into(), "1e-2".into()),
            ("rt".into(), "1".into()),
            ("realizations".into(), realizations.to_string()),
        ],
    )?;
    sink.columns(&["p_t", "curve", "meta_ccdf"])?;
    for &r0 in &[150.0f64, 250.0, 500.0] {
        ctx.note(&format!("fig9b r0 = {r0}"));
        let meta = MetaQuery::new(query, r0).map_err(|e| e.to_string())?;
        let plan = SimPlan::new(realizations, 2000, ctx.seed)
            .map_err(|e| e.to_string())?
            .with_fixed_r0(r0)
            .with_region_scale(15.0);
        let mc = empirical_meta(&cfg, &query, &plan, None).map_err(map_err_str)?;
        for i in 1..=49 {
            let p_t = i as f64 / 50.0;
            let gp = fbnet::meta::meta_cdf_gilpelaez(&cfg, &meta, p_t).map_err(map_err_str)?;
            let be = fbnet::meta::meta_cdf_beta(&cfg, &meta, p_t).map_err(map_err_str)?;
            sink.row(&[fmt(p_t), format!("r0={r0} gilpelaez"), fmt(gp)])?;
            sink.row(&[fmt(p_t), format!("r0={r0} beta"), fmt(be)])?;
            sink.row(&[
                fmt(p_t),
                format!("r0={r0} empirical-exact"),
                fmt(MetaSamples::ccdf(&mc.exact, p_t)),
            ])?;
            sink.row(&[
                fmt(p_t),
                format!("r0={r0} empirical-approx"),
                fmt(MetaSamples::ccdf(&mc.approx, p_t)),
            ])?;
        }
    }
    sink.finish()
}

fn fig11(ctx: &Ctx, _samples: Option<usize>) -> Result<(), String> {
    let mut sink = ctx.sink("fig11", &[])?;
    sink.columns(&["eps_bar", "curve", "reliability"])?;
    // fixed r0 = 250 m, 0 dB, lambda = 1/km^2
    let cfg = km_cfg(1.0, 0.0)?;
    // spatial: lambda = 0.1/km^2 at 10 dB
    let cfg_spatial = km_cfg(0.1, 10.0)?;
    for &rt in &[0.1375f64, 1.0, 3.46] {
        for &n in &[128u32, 2048] {
            for i in 0..=30 {
                let eps_bar = 10f64.powf(-6.0 + 5.6 * i as f64 / 30.0);
                let coding = CodingConfig::new(n, eps_bar).map_err(|e| e.to_string())?;
                let query = OutageQuery::new(rt, coding).map_err(|e| e.to_string())?;
                let fixed = reliability(&cfg, &query, Geometry::FixedR0(250.0))
                    .map_err(map_err_str)?;
                let spatial = reliability(&cfg_spatial, &query, Geometry::Spatial)
                    .map_err(map_err_str)?;
                sink.row(&[
                    fmt(eps_bar),
                    format!("rt={rt} n={n} fixed"),
                    fmt(fixed),
                ])?;
                sink.row(&[
                    fmt(eps_bar),
                    format!("rt={rt} n={n} spatial"),
                    fmt(spatial),
                ])?;
            }
        }
        let ar_fixed = reliability_ar(&cfg, rt, Geometry::FixedR0(250.0)).map_err(map_err_str)?;
        let ar_spatial =
            reliability_ar(&cfg_spatial, rt, Geometry::Spatial).map_err(map_err_str)?;
        sink.row(&[String::new(), format!("rt={rt} ar fixed"), fmt(ar_fixed)])?;
        sink.row(&[
            String::new(),
            format!("rt={rt} ar spatial"),
            fmt(ar_spatial),
        ])?;
    }
    sink.finish()
}
