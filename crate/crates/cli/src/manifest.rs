use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::Value;

/// Record of one invocation. Written after every output, so its presence
/// marks a completed run.
#[derive(Serialize)]
pub struct Manifest {
    pub command: String,
    pub args: Vec<String>,
    pub config: Option<PathBuf>,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub outputs: Vec<PathBuf>,
    pub wall_time_s: f64,
    /// Defaults to `<first output>.manifest.json`.
    #[serde(skip)]
    pub manifest_path: Option<PathBuf>,
    /// Nothing was written to disk, so there is nothing to describe.
    #[serde(skip)]
    pub skip: bool,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            config: None,
            parameters: Value::Null,
            seed: None,
            version: irgm::VERSION,
            outputs: Vec::new(),
            wall_time_s: 0.0,
            manifest_path: None,
            skip: false,
        }
    }

    pub fn write(&self) -> anyhow::Result<()> {
        if self.skip {
            return Ok(());
        }
        let path = match (&self.manifest_path, self.outputs.first()) {
            (Some(p), _) => p.clone(),
            (None, Some(first)) => {
                let mut name = first.file_name().unwrap_or_default().to_os_string();
                name.push(".manifest.json");
                first.with_file_name(name)
            }
            (None, None) => return Ok(()),
        };
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(())
    }
}
