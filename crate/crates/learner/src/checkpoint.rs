//! Binary checkpoints: `GSTL`, format version (u32 LE), header length
//! (u64 LE), JSON header (config, array lengths, free-form metadata), then
//! every parameter as f64 LE in array order.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ModelConfig;
use crate::error::{Error, Result};
use crate::model::Model;

const MAGIC: &[u8; 4] = b"GSTL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    lengths: Vec<usize>,
    #[serde(default)]
    meta: Value,
}

pub fn to_bytes(model: &Model, meta: Value) -> Vec<u8> {
    let header = Header {
        config: model.config().clone(),
        lengths: model.params().iter().map(Vec::len).collect(),
        meta,
    };
    let json = serde_json::to_vec(&header).expect("header is plain data");
    let mut out = Vec::with_capacity(16 + json.len() + 8 * model.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for v in model.params().iter().flatten() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Checkpoint("truncated".into()));
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

pub fn from_bytes(mut bytes: &[u8]) -> Result<(Model, Value)> {
    if take(&mut bytes, 4)? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint (bad magic)".into()));
    }
    let version = u32::from_le_bytes(take(&mut bytes, 4)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported format version {version}")));
    }
    let hlen = u64::from_le_bytes(take(&mut bytes, 8)?.try_into().unwrap()) as usize;
    let header: Header = serde_json::from_slice(take(&mut bytes, hlen)?)
        .map_err(|e| Error::Checkpoint(format!("header: {e}")))?;
    let mut params = Vec::with_capacity(header.lengths.len());
    for &n in &header.lengths {
        let raw = take(&mut bytes, 8 * n)?;
        params.push(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect());
    }
    if !bytes.is_empty() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len())));
    }
    Ok((Model::from_params(header.config, params)?, header.meta))
}

pub fn save(model: &Model, meta: Value, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(model, meta)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<(Model, Value)> {
    from_bytes(&std::fs::read(path).map_err(|e| Error::io(path, e))?)
}
