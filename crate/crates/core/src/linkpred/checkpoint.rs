//! Model checkpoint: magic `RGLM`, version u32, a JSON header (config,
//! feature kind, threshold, node order) prefixed by its u64 length, then W1
//! and W2 each as rows u64, cols u64 and little-endian f64 values.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::Dense;
use super::{FeatureKind, GcnParams, LinkModel, LinkPredError, TrainConfig};
use crate::graph::NodeId;

const MAGIC: &[u8; 4] = b"RGLM";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: TrainConfig,
    features: FeatureKind,
    threshold: Option<f64>,
    nodes: Vec<NodeId>,
}

fn bad(msg: impl Into<String>) -> LinkPredError {
    LinkPredError::Checkpoint(msg.into())
}

fn write_matrix(w: &mut impl Write, m: &Dense) -> std::io::Result<()> {
    w.write_all(&(m.rows as u64).to_le_bytes())?;
    w.write_all(&(m.cols as u64).to_le_bytes())?;
    for v in &m.data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_u64(r: &mut impl Read) -> Result<u64, LinkPredError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|e| bad(format!("truncated: {e}")))?;
    Ok(u64::from_le_bytes(b))
}

fn read_matrix(r: &mut impl Read) -> Result<Dense, LinkPredError> {
    let rows = read_u64(r)? as usize;
    let cols = read_u64(r)? as usize;
    let len = rows.checked_mul(cols).filter(|l| *l <= 1 << 32).ok_or_else(|| bad("matrix too large"))?;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        data.push(f64::from_bits(read_u64(r)?));
    }
    Ok(Dense::from_vec(rows, cols, data))
}

impl LinkModel {
    pub fn save(&self, path: &Path) -> Result<(), LinkPredError> {
        let header = serde_json::to_vec(&Header {
            config: self.config.clone(),
            features: self.features,
            threshold: self.threshold,
            nodes: self.nodes.clone(),
        })
        .map_err(|e| bad(e.to_string()))?;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u64).to_le_bytes())?;
        w.write_all(&header)?;
        write_matrix(&mut w, &self.params.w1)?;
        write_matrix(&mut w, &self.params.w2)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, LinkPredError> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(|_| bad("truncated"))?;
        if &magic != MAGIC {
            return Err(bad("bad magic"));
        }
        let mut v = [0u8; 4];
        r.read_exact(&mut v).map_err(|_| bad("truncated"))?;
        let version = u32::from_le_bytes(v);
        if version != VERSION {
            return Err(bad(format!("unsupported version {version}")));
        }
        let len = read_u64(&mut r)? as usize;
        if len > 1 << 30 {
            return Err(bad("header too large"));
        }
        let mut header = vec![0u8; len];
        r.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
        let h: Header = serde_json::from_slice(&header).map_err(|e| bad(e.to_string()))?;
        let w1 = read_matrix(&mut r)?;
        let w2 = read_matrix(&mut r)?;
        if w1.cols != w2.rows {
            return Err(bad("layer shapes disagree"));
        }
        Ok(LinkModel {
            params: GcnParams { w1, w2 },
            config: h.config,
            features: h.features,
            nodes: h.nodes,
            threshold: h.threshold,
        })
    }
}
