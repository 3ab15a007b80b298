//! Checkpoint serialization: JSON for inspection, binary for bit-exact
//! round-trips.

use super::MlpModel;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"PDML";
const ACTIVATION_RELU: u8 = 1;

/// Header plus the flattened parameter vector (row-major weights then bias,
/// layer by layer). `input_cols` records which dataset columns the model
/// consumes so scoring code can slice features the same way training did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub depth: usize,
    pub activation: String,
    pub init_seed: u64,
    pub input_cols: Vec<usize>,
    pub params: Vec<f64>,
}

impl CheckpointRecord {
    pub fn from_model(model: &MlpModel, input_cols: &[usize]) -> Self {
        CheckpointRecord {
            input_dim: model.input_dim,
            hidden_dim: model.hidden_dim,
            depth: model.depth,
            activation: "relu".to_string(),
            init_seed: model.init_seed,
            input_cols: input_cols.to_vec(),
            params: model.flatten_params(),
        }
    }

    /// Rebuilds the model; fails if the header disagrees with the parameter
    /// count or names an unknown activation.
    pub fn to_model(&self) -> Result<MlpModel> {
        if self.activation != "relu" {
            return Err(Error::validation(format!(
                "unsupported activation {:?}",
                self.activation
            )));
        }
        let mut model = super::init_mlp(self.input_dim, self.hidden_dim, self.depth, self.init_seed)?;
        if model.num_params() != self.params.len() {
            return Err(Error::validation(format!(
                "checkpoint has {} parameters, architecture needs {}",
                self.params.len(),
                model.num_params()
            )));
        }
        model.set_params_from_flat(&self.params)?;
        Ok(model)
    }
}

pub fn save_checkpoint_json(path: &Path, model: &MlpModel, input_cols: &[usize]) -> Result<()> {
    let record = CheckpointRecord::from_model(model, input_cols);
    let file = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(file, &record)?;
    Ok(())
}

pub fn load_checkpoint_json(path: &Path) -> Result<CheckpointRecord> {
    let file = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(file)?)
}

pub fn save_checkpoint_binary(path: &Path, model: &MlpModel, input_cols: &[usize]) -> Result<()> {
    let record = CheckpointRecord::from_model(model, input_cols);
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MAGIC)?;
    for dim in [record.input_dim, record.hidden_dim, record.depth] {
        out.write_all(&(dim as u64).to_le_bytes())?;
    }
    out.write_all(&record.init_seed.to_le_bytes())?;
    out.write_all(&[ACTIVATION_RELU])?;
    out.write_all(&(record.input_cols.len() as u64).to_le_bytes())?;
    for col in &record.input_cols {
        out.write_all(&(*col as u64).to_le_bytes())?;
    }
    out.write_all(&(record.params.len() as u64).to_le_bytes())?;
    for p in &record.params {
        out.write_all(&p.to_le_bytes())?;
    }
    Ok(())
}

pub fn load_checkpoint_binary(path: &Path) -> Result<CheckpointRecord> {
    let mut file = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::validation("not a model checkpoint (bad magic)"));
    }
    let read_u64 = |file: &mut BufReader<File>| -> Result<u64> {
        let mut buf = [0u8; 8];
        file.read_exact(&mut buf)?;
        Ok(u64::from_le_bytes(buf))
    };
    let input_dim = read_u64(&mut file)? as usize;
    let hidden_dim = read_u64(&mut file)? as usize;
    let depth = read_u64(&mut file)? as usize;
    let init_seed = read_u64(&mut file)?;
    let mut tag = [0u8; 1];
    file.read_exact(&mut tag)?;
    if tag[0] != ACTIVATION_RELU {
        return Err(Error::validation(format!("unknown activation tag {}", tag[0])));
    }
    let n_cols = read_u64(&mut file)? as usize;
    let mut input_cols = Vec::with_capacity(n_cols);
    for _ in 0..n_cols {
        input_cols.push(read_u64(&mut file)? as usize);
    }
    let n_params = read_u64(&mut file)? as usize;
    let mut params = Vec::with_capacity(n_params);
    let mut buf = [0u8; 8];
    for _ in 0..n_params {
        file.read_exact(&mut buf)?;
        params.push(f64::from_le_bytes(buf));
    }
    Ok(CheckpointRecord {
        input_dim,
        hidden_dim,
        depth,
        activation: "relu".to_string(),
        init_seed,
        input_cols,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_mlp;
    use tempfile::tempdir;

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let model = init_mlp(7, 9, 4, 42).unwrap();
        save_checkpoint_binary(&path, &model, &[0, 2, 5]).unwrap();
        let record = load_checkpoint_binary(&path).unwrap();
        let restored = record.to_model().unwrap();
        let a = model.flatten_params();
        let b = restored.flatten_params();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(record.input_cols, vec![0, 2, 5]);
    }

    #[test]
    fn json_round_trip_restores_params() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = init_mlp(5, 6, 3, 7).unwrap();
        save_checkpoint_json(&path, &model, &[1, 3]).unwrap();
        let record = load_checkpoint_json(&path).unwrap();
        assert_eq!(record, CheckpointRecord::from_model(&model, &[1, 3]));
        // serde_json prints shortest-round-trip decimals, so bits survive
        let restored = record.to_model().unwrap();
        for (x, y) in model.flatten_params().iter().zip(restored.flatten_params()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn bad_magic_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("junk.bin");
        std::fs::write(&path, b"NOPEnope").unwrap();
        let err = load_checkpoint_binary(&path).unwrap_err();
        assert!(err.to_string().contains("magic"));
    }

    #[test]
    fn truncated_file_errors_cleanly() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let model = init_mlp(4, 5, 3, 1).unwrap();
        save_checkpoint_binary(&path, &model, &[0, 1, 2, 3]).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 2]).unwrap();
        assert!(load_checkpoint_binary(&path).is_err());
    }

    #[test]
    fn param_count_mismatch_rejected() {
        let model = init_mlp(3, 4, 3, 1).unwrap();
        let mut record = CheckpointRecord::from_model(&model, &[0, 1, 2]);
        record.params.pop();
        assert!(record.to_model().is_err());
    }
}
