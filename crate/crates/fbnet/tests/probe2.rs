#[test]
fn probe_spatial_qam() {
    use fbnet::constellation::make_qam;
    use fbnet::network::NetworkConfig;
    use fbnet::rate::CodingConfig;
    use fbnet::sim::{empirical_avg_rate, RateMode, SimPlan};
    let coding = CodingConfig::new(512, 1e-2).unwrap();
    let cfg = NetworkConfig::from_km_units(1.0, 4.0, 50.0).unwrap();
    let plan = SimPlan::new(40_000, 1, 5555).unwrap().with_region_scale(20.0);
    let est = empirical_avg_rate(&cfg, &coding, &plan, &RateMode::Qam(make_qam(16).unwrap()));
    println!("MC spatial 16QAM at 50 dB: {} +- {}", est.mean, est.ci99());
    // and the Gaussian-codebook spatial rate for scale
    let est_g = empirical_avg_rate(&cfg, &coding, &plan, &RateMode::Gaussian);
    println!("MC spatial gaussian at 50 dB: {} +- {}", est_g.mean, est_g.ci99());
    // reliability gap configs
    use fbnet::outage::{reliability, reliability_ar, Geometry, OutageQuery};
    let cfg_fixed = NetworkConfig::from_km_units(1.0, 4.0, 0.0).unwrap();
    let cfg_sp = NetworkConfig::from_km_units(0.1, 4.0, 10.0).unwrap();
    for rt in [0.1375f64, 1.0, 3.46] {
        let coding = CodingConfig::new(128, 1e-6).unwrap();
        let q = OutageQuery::new(rt, coding).unwrap();
        let gf = reliability_ar(&cfg_fixed, rt, Geometry::FixedR0(250.0)).unwrap()
            - reliability(&cfg_fixed, &q, Geometry::FixedR0(250.0)).unwrap();
        let gs = reliability_ar(&cfg_sp, rt, Geometry::Spatial).unwrap()
            - reliability(&cfg_sp, &q, Geometry::Spatial).unwrap();
        println!("rt={rt}: gap fixed={gf:.4} spatial={gs:.4}");
    }
}
