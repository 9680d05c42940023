//! Parameter checkpoints: a JSON header describing slot names and shapes,
//! then the flat vector as little-endian f64.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::nn::ParamSet;
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Header {
    params: Vec<SlotDesc>,
    count: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct SlotDesc {
    name: String,
    rows: usize,
    cols: usize,
}

fn header_of(ps: &ParamSet) -> Header {
    Header {
        params: (0..ps.slot_count())
            .map(|s| {
                let [rows, cols] = ps.slot_shape(s);
                SlotDesc { name: ps.slot_name(s).to_string(), rows, cols }
            })
            .collect(),
        count: ps.len(),
    }
}

pub fn to_bytes(ps: &ParamSet) -> Result<Vec<u8>> {
    let header = serde_json::to_vec(&header_of(ps))?;
    let mut out = Vec::with_capacity(4 + header.len() + ps.len() * 8);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    for v in ps.flat() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

/// Restore values into a ParamSet built with the identical registration
/// order; header mismatches are rejected.
pub fn from_bytes(ps: &mut ParamSet, bytes: &[u8]) -> Result<()> {
    if bytes.len() < 4 {
        return Err(Error::Checkpoint("truncated header length".into()));
    }
    let hlen = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    if bytes.len() < 4 + hlen {
        return Err(Error::Checkpoint("truncated header".into()));
    }
    let header: Header = serde_json::from_slice(&bytes[4..4 + hlen])?;
    if header != header_of(ps) {
        return Err(Error::Checkpoint("header does not match parameter registry".into()));
    }
    let body = &bytes[4 + hlen..];
    if body.len() != header.count * 8 {
        return Err(Error::Checkpoint(format!(
            "expected {} data bytes, got {}",
            header.count * 8,
            body.len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    ps.set_flat(&values)
}

pub fn save(ps: &ParamSet, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_bytes(ps)?)?;
    Ok(())
}

pub fn load(ps: &mut ParamSet, path: &Path) -> Result<()> {
    let mut f = std::fs::File::open(path)?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes)?;
    from_bytes(ps, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffcore::tensor::Tensor;

    fn sample_set() -> ParamSet {
        let mut ps = ParamSet::new();
        ps.register("a.w", Tensor::new(2, 3, vec![1.0, -2.0, 3.5, 0.0, 1e-9, -7.25]));
        ps.register("a.b", Tensor::row(vec![0.125, -0.5]));
        ps
    }

    #[test]
    fn round_trip_is_exact() {
        let ps = sample_set();
        let bytes = to_bytes(&ps).unwrap();
        let mut other = sample_set();
        for v in other.flat_mut() {
            *v = 99.0;
        }
        from_bytes(&mut other, &bytes).unwrap();
        assert_eq!(other.flat(), ps.flat());
    }

    #[test]
    fn mismatched_registry_is_rejected() {
        let ps = sample_set();
        let bytes = to_bytes(&ps).unwrap();
        let mut other = ParamSet::new();
        other.register("different", Tensor::row(vec![0.0; 8]));
        assert!(from_bytes(&mut other, &bytes).is_err());
    }

    #[test]
    fn truncated_data_is_rejected() {
        let ps = sample_set();
        let mut bytes = to_bytes(&ps).unwrap();
        bytes.truncate(bytes.len() - 3);
        let mut other = sample_set();
        assert!(from_bytes(&mut other, &bytes).is_err());
    }
}
