//! Run plumbing shared by every subcommand: config files, output files and
//! the manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use finsurr::Error;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Why a run failed, and which exit code that maps to.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    /// The run completed but a requested check did not hold.
    Check(String),
}

impl Failure {
    /// 1 internal, 2 usage or unreadable input, 3 validation failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Check(_) => 3,
            Failure::Core(e) => match e {
                Error::Io { .. }
                | Error::Json { .. }
                | Error::Parse { .. }
                | Error::Schema(_)
                | Error::Config(_) => 2,
                Error::InvalidShape { .. }
                | Error::InvalidSetting(_)
                | Error::Dataset(_)
                | Error::Dimension { .. }
                | Error::Domain(_) => 3,
                Error::NonFiniteLoss { .. } | Error::Internal(_) => 1,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Check(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn io_error(path: impl Into<PathBuf>, source: std::io::Error) -> Failure {
    Failure::Core(Error::Io {
        path: path.into(),
        source,
    })
}

pub fn json_error(path: impl Into<PathBuf>, source: serde_json::Error) -> Failure {
    Failure::Core(Error::Json {
        path: path.into(),
        source,
    })
}

pub fn config_error(msg: impl Into<String>) -> Failure {
    Failure::Core(Error::Config(msg.into()))
}

/// Reads a config file for `command`. A manifest written by an earlier run
/// is accepted too: its `config` and `seed` are used.
pub fn load_config<T: DeserializeOwned + Default>(
    path: Option<&Path>,
    command: &str,
) -> CliResult<(T, Option<u64>)> {
    let Some(path) = path else {
        return Ok((T::default(), None));
    };
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
    let (config, seed) = match value.get("command") {
        Some(recorded) => {
            if recorded.as_str() != Some(command) {
                return Err(config_error(format!(
                    "{} is a manifest of `{}`, not `{command}`",
                    path.display(),
                    recorded
                )));
            }
            let seed = value.get("seed").and_then(serde_json::Value::as_u64);
            (value.get("config").cloned().unwrap_or_default(), seed)
        }
        None => (value, None),
    };
    let config = serde_json::from_value(config).map_err(|e| json_error(path, e))?;
    Ok((config, seed))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    /// Paths relative to the output directory.
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| io_error(path, e))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

/// One invocation: where it writes and what it read and wrote.
pub struct Run {
    pub command: &'static str,
    pub seed: u64,
    pub out: PathBuf,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(command: &'static str, seed: u64, out: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(out).map_err(|e| io_error(out, e))?;
        Ok(Run {
            command,
            seed,
            out: out.to_path_buf(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        })
    }

    /// Records an input file's digest.
    pub fn input(&mut self, path: &Path) -> CliResult<()> {
        let digest = sha256_file(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn write(&mut self, name: &str, contents: impl AsRef<[u8]>) -> CliResult<()> {
        let path = self.path(name);
        std::fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        self.produced(name);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let text =
            serde_json::to_string_pretty(value).map_err(|e| json_error(self.path(name), e))?;
        self.write(name, text + "\n")
    }

    /// Marks a file written by other means as an output.
    pub fn produced(&mut self, name: &str) {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
    }

    pub fn finish<C: Serialize>(self, config: &C) -> CliResult<()> {
        let config = serde_json::to_value(config).map_err(|e| json_error(MANIFEST_FILE, e))?;
        let mut outputs = Vec::new();
        for name in &self.outputs {
            outputs.push(FileDigest {
                path: name.clone(),
                sha256: sha256_file(&self.path(name))?,
            });
        }
        let manifest = Manifest {
            tool: "finsurr".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command.into(),
            seed: self.seed,
            config,
            inputs: self
                .inputs
                .into_iter()
                .map(|(path, sha256)| FileDigest { path, sha256 })
                .collect(),
            outputs,
        };
        let path = self.out.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| json_error(&path, e))?;
        std::fs::write(&path, text + "\n").map_err(|e| io_error(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }
}
