//! CSV emission with a provenance comment header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

pub struct CsvSink {
    out: Box<dyn Write>,
    started: Instant,
    wrote_columns: bool,
}

impl CsvSink {
    /// Opens the sink (stdout when `path` is None) and writes the
    /// provenance header: parameters, library version, seed, start time.
    pub fn create(
        path: Option<&Path>,
        experiment: &str,
        params: &[(String, String)],
        seed: u64,
    ) -> Result<Self, String> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).map_err(|e| format!("cannot create {}: {e}", p.display()))?,
            )),
            None => Box::new(std::io::stdout()),
        };
        let mut sink = Self {
            out,
            started: Instant::now(),
            wrote_columns: false,
        };
        sink.comment(&format!("experiment: {experiment}"))?;
        sink.comment(&format!(
            "generator: fbnet {}",
            env!("CARGO_PKG_VERSION")
        ))?;
        sink.comment(&format!("seed: {seed}"))?;
        for (k, v) in params {
            sink.comment(&format!("param {k}: {v}"))?;
        }
        Ok(sink)
    }

    fn comment(&mut self, text: &str) -> Result<(), String> {
        writeln!(self.out, "# {text}").map_err(|e| e.to_string())
    }

    pub fn columns(&mut self, names: &[&str]) -> Result<(), String> {
        writeln!(self.out, "{}", names.join(",")).map_err(|e| e.to_string())?;
        self.wrote_columns = true;
        Ok(())
    }

    /// One data row; flushed immediately so partial results survive an
    /// interrupt.
    pub fn row(&mut self, values: &[String]) -> Result<(), String> {
        debug_assert!(self.wrote_columns);
        writeln!(self.out, "{}", values.join(",")).map_err(|e| e.to_string())?;
        self.out.flush().map_err(|e| e.to_string())
    }

    /// Appends the wall-time footer.
    pub fn finish(mut self) -> Result<(), String> {
        let elapsed = self.started.elapsed().as_secs_f64();
        writeln!(self.out, "# wall_time_s: {elapsed:.3}").map_err(|e| e.to_string())?;
        self.out.flush().map_err(|e| e.to_string())
    }
}

pub fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e-4 && v.abs() < 1e7 {
        format!("{v:.8}")
    } else {
        format!("{v:.8e}")
    }
}
