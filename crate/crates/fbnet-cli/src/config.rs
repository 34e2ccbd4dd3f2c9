//! Key-value config files: `key = value` lines, `#` comments. CLI flags
//! override file values.

use std::collections::BTreeMap;
use std::path::Path;

use fbnet::network::NetworkConfig;

#[derive(Debug, Clone, Default)]
pub struct KvConfig {
    values: BTreeMap<String, String>,
}

impl KvConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, String> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| format!("{key}: expected a number, got {v:?}")),
        }
    }

}

/// Network parameters as they appear in config files / flags: density in
/// BS/km^2, powers in dBm, distances in meters.
#[derive(Debug, Clone, Copy)]
pub struct NetworkParams {
    pub lambda_per_km2: f64,
    pub power_dbm: f64,
    pub eta: f64,
    /// None means interference-limited (no noise term).
    pub noise_dbm: Option<f64>,
    /// None selects the random serving-distance mode.
    pub r0_m: Option<f64>,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            lambda_per_km2: 1.0,
            power_dbm: 30.0, // 1 W
            eta: 4.0,
            noise_dbm: None,
            r0_m: None,
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

impl NetworkParams {
    pub fn from_config(cfg: &KvConfig) -> Result<Self, String> {
        let mut p = Self::default();
        if let Some(v) = cfg.get_f64("lambda_per_km2")? {
            p.lambda_per_km2 = v;
        }
        if let Some(v) = cfg.get_f64("power_dbm")? {
            p.power_dbm = v;
        }
        if let Some(v) = cfg.get_f64("eta")? {
            p.eta = v;
        }
        p.noise_dbm = cfg.get_f64("noise_dbm")?.or(p.noise_dbm);
        p.r0_m = cfg.get_f64("r0_m")?.or(p.r0_m);
        Ok(p)
    }

    pub fn to_network_config(&self) -> Result<NetworkConfig, fbnet::Error> {
        let noise = self.noise_dbm.map(dbm_to_watts).unwrap_or(0.0);
        NetworkConfig::new(
            self.lambda_per_km2 * 1e-6,
            dbm_to_watts(self.power_dbm),
            self.eta,
            noise,
        )
    }
}
