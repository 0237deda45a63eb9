//! Run manifest: a flat `key = value` file listing the configuration, the
//! inputs and every output with its SHA-256 digest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.txt";

pub fn digest_file(path: &Path) -> std::io::Result<String> {
    let bytes = fs::read(path)?;
    let hash = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in hash {
        write!(hex, "{b:02x}").expect("writing to a String cannot fail");
    }
    Ok(hex)
}

#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub command: String,
    pub seed: Option<u64>,
    pub config: Vec<(String, String)>,
    pub results: Vec<(String, String)>,
    inputs: Vec<(String, PathBuf, String)>,
    outputs: Vec<(String, PathBuf, String)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            ..Self::default()
        }
    }

    pub fn input(&mut self, name: &str, path: &Path) -> std::io::Result<()> {
        let digest = digest_file(path)?;
        self.inputs.push((name.to_string(), path.to_path_buf(), digest));
        Ok(())
    }

    /// Records an output file, named by its path relative to the output
    /// directory.
    pub fn output(&mut self, dir: &Path, file: &str) -> std::io::Result<()> {
        let digest = digest_file(&dir.join(file))?;
        self.outputs.push((file.to_string(), PathBuf::from(file), digest));
        Ok(())
    }

    pub fn result(&mut self, key: &str, value: impl ToString) {
        self.results.push((key.to_string(), value.to_string()));
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: &str| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(v);
            s.push('\n');
        };
        line("tool", concat!("emoblog ", env!("CARGO_PKG_VERSION")));
        line("command", &self.command);
        if let Some(seed) = self.seed {
            line("seed", &seed.to_string());
        }
        for (k, v) in &self.config {
            line(&format!("config.{k}"), v);
        }
        for (k, v) in &self.results {
            line(&format!("result.{k}"), v);
        }
        for (name, path, digest) in &self.inputs {
            line(&format!("input.{name}"), &format!("{} sha256:{digest}", path.display()));
        }
        for (name, path, digest) in &self.outputs {
            line(&format!("output.{name}"), &format!("{} sha256:{digest}", path.display()));
        }
        s
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::write(dir.join(MANIFEST_NAME), self.render())
    }
}
