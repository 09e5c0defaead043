//! Result emission: a data file plus a JSON sidecar with the run configuration.

use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use perconet_core::numfmt::g17;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::Failure;

/// Payload of a command.
pub enum Data {
    Csv { header: String, rows: Vec<String> },
    Network(String),
}

/// Formats one CSV row; floats use 17 significant digits.
pub enum Cell {
    F(f64),
    I(i64),
    U(u64),
    S(String),
}

pub fn row(cells: &[Cell]) -> String {
    cells
        .iter()
        .map(|c| match c {
            Cell::F(x) => g17(*x),
            Cell::I(x) => x.to_string(),
            Cell::U(x) => x.to_string(),
            Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::S(s) => s.clone(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

pub struct Emitter {
    config: RunConfig,
    started: SystemTime,
    clock: Instant,
}

impl Emitter {
    pub fn new(config: &RunConfig) -> Self {
        Self {
            config: config.clone(),
            started: SystemTime::now(),
            clock: Instant::now(),
        }
    }

    /// CSV document: one comment line with the configuration, the header and the rows.
    pub fn csv(&self, header: &str, rows: &[String]) -> String {
        let config = serde_json::to_string(&self.config).expect("config serialises");
        let mut out = format!("# config: {config}\n{header}\n");
        for r in rows {
            out.push_str(r);
            out.push('\n');
        }
        out
    }

    /// Writes `<out>.csv` (or `<out>.network.json`) and `<out>.json`, or
    /// prints the data when no output prefix was given. The summary line goes
    /// to stdout after writing files, to stderr otherwise.
    pub fn finish(&self, data: Data, result: Value, summary: &str) -> Result<(), Failure> {
        let body = match &data {
            Data::Csv { header, rows } => self.csv(header, rows),
            Data::Network(doc) => doc.clone(),
        };
        let Some(prefix) = &self.config.out else {
            print!("{body}");
            if !body.ends_with('\n') {
                println!();
            }
            eprintln!("{summary}");
            return Ok(());
        };
        let with_ext = |ext: &str| {
            let mut s = prefix.clone().into_os_string();
            s.push(ext);
            PathBuf::from(s)
        };
        let data_path = match data {
            Data::Csv { .. } => with_ext(".csv"),
            Data::Network(_) => with_ext(".network.json"),
        };
        if let Some(dir) = data_path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        }
        std::fs::write(&data_path, body).map_err(|e| Failure::io(&data_path, e))?;
        let started = self
            .started
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        let sidecar = json!({
            "tool": "perconet",
            "version": env!("CARGO_PKG_VERSION"),
            "config": self.config,
            "started_unix_s": started,
            "wall_time_s": self.clock.elapsed().as_secs_f64(),
            "data": data_path.file_name().map(|n| n.to_string_lossy().into_owned()),
            "result": result,
        });
        let side_path = with_ext(".json");
        let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serialises");
        std::fs::write(&side_path, text + "\n").map_err(|e| Failure::io(&side_path, e))?;
        println!("{summary}");
        Ok(())
    }
}
