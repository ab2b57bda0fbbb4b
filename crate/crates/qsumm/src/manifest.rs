//! Run manifests: every artifact-producing subcommand records its toolkit
//! version, effective configuration, input file hashes and seed, so a run
//! can be audited and reproduced.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::vectorspace::hex_string;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub toolkit_version: String,
    pub subcommand: String,
    /// Effective configuration after flag/file/default precedence.
    pub config: BTreeMap<String, String>,
    /// sha256 of every input file, keyed by role.
    pub input_hashes: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub created_at: String,
}

impl RunManifest {
    pub fn new(subcommand: &str) -> Self {
        Self {
            format_version: MANIFEST_FORMAT_VERSION,
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            config: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            seed: None,
            created_at: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn hash_input(&mut self, role: &str, path: &Path) -> std::io::Result<()> {
        self.input_hashes
            .insert(role.to_string(), sha256_file(path)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self).unwrap())
    }
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let mut f = std::fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 65536];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex_string(&hasher.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip_and_hashing() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in.txt");
        std::fs::write(&input, "hello").unwrap();
        let mut m = RunManifest::new("test");
        m.set("seed", 42);
        m.seed = Some(42);
        m.hash_input("corpus", &input).unwrap();
        let path = dir.path().join(MANIFEST_FILE_NAME);
        m.write(&path).unwrap();
        let back: RunManifest =
            serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(m, back);
        // sha256("hello")
        assert_eq!(
            back.input_hashes["corpus"],
            "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824"
        );
    }
}
