//! JSON checkpoints: the counts gathered so far and where to pick up.
//!
//! On disk a checkpoint is `{"state": {...}, "checksum": "<sha256>"}` where
//! the checksum covers the compact serialization of `state`.

use std::fs;
use std::path::{Path, PathBuf};

use seplab::pipeline::Tally;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ConfigPairs, ExperimentConfig};
use crate::error::{CliError, CliResult};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointState {
    pub version: u32,
    pub config_hash: String,
    /// Config of the run that wrote the checkpoint, for report re-emission.
    pub config: ConfigPairs,
    pub next_index: u64,
    /// Sampling time spent so far, across sessions.
    pub elapsed_secs: f64,
    pub tally: Tally,
}

impl CheckpointState {
    pub fn new(cfg: &ExperimentConfig, next_index: u64, elapsed_secs: f64, tally: Tally) -> Self {
        Self {
            version: FORMAT_VERSION,
            config_hash: cfg.hash(),
            config: cfg.to_pairs(),
            next_index,
            elapsed_secs,
            tally,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.tally.n_total == self.next_index
            && self.config.get("samples").and_then(|s| s.parse().ok()) == Some(self.next_index)
    }

    /// Rejects a checkpoint written under a different sampling config.
    pub fn check_config(&self, cfg: &ExperimentConfig) -> CliResult<()> {
        let expected = cfg.hash();
        if self.config_hash != expected {
            return Err(CliError::ConfigHashMismatch {
                expected,
                found: self.config_hash.clone(),
            });
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    state: serde_json::Value,
    checksum: String,
}

fn digest(state_json: &str) -> String {
    hex::encode(Sha256::digest(state_json.as_bytes()))
}

pub fn checkpoint_path(dir: &Path) -> PathBuf {
    dir.join(CHECKPOINT_FILE)
}

/// Writes atomically: a temporary sibling file is renamed over the target.
pub fn save(path: &Path, state: &CheckpointState) -> CliResult<()> {
    let body = serde_json::to_value(state).expect("checkpoint state serializes");
    let checksum = digest(&body.to_string());
    let text = serde_json::to_string_pretty(&Envelope { state: body, checksum })
        .expect("checkpoint envelope serializes");
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, text).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

pub fn load(path: &Path) -> CliResult<CheckpointState> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let corrupt = |reason: String| CliError::CorruptCheckpoint {
        path: path.to_path_buf(),
        reason,
    };
    let env: Envelope = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    if digest(&env.state.to_string()) != env.checksum {
        return Err(corrupt("checksum mismatch".into()));
    }
    let state: CheckpointState =
        serde_json::from_value(env.state).map_err(|e| corrupt(e.to_string()))?;
    if state.version != FORMAT_VERSION {
        return Err(corrupt(format!("unsupported version {}", state.version)));
    }
    if state.tally.n_total != state.next_index {
        return Err(corrupt("sample count disagrees with next index".into()));
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use seplab::pipeline::Pipeline;

    fn sample_state() -> (ExperimentConfig, CheckpointState) {
        let cfg = ExperimentConfig::new("2x2".parse().unwrap(), seplab::states::MeasureKind::HilbertSchmidt, 500, 9).unwrap();
        let p = Pipeline::new(cfg.shape, cfg.measure_spec().unwrap(), cfg.seed, cfg.bins).unwrap();
        let tally = p.run_range(0..200).unwrap();
        let st = CheckpointState::new(&cfg, 200, 0.25, tally);
        (cfg, st)
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = checkpoint_path(dir.path());
        let (cfg, st) = sample_state();
        save(&path, &st).unwrap();
        let back = load(&path).unwrap();
        assert_eq!(back, st);
        back.check_config(&cfg).unwrap();
        assert!(!back.is_complete());
    }

    #[test]
    fn tampering_detected() {
        let dir = tempfile::tempdir().unwrap();
        let path = checkpoint_path(dir.path());
        let (_, st) = sample_state();
        save(&path, &st).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let edited = text.replacen("\"next_index\": 200", "\"next_index\": 201", 1);
        assert_ne!(edited, text);
        fs::write(&path, edited).unwrap();
        assert!(matches!(load(&path), Err(CliError::CorruptCheckpoint { .. })));
        fs::write(&path, "{ not json").unwrap();
        assert!(matches!(load(&path), Err(CliError::CorruptCheckpoint { .. })));
    }

    #[test]
    fn foreign_config_rejected() {
        let (mut cfg, st) = sample_state();
        cfg.seed += 1;
        assert!(matches!(st.check_config(&cfg), Err(CliError::ConfigHashMismatch { .. })));
    }
}
