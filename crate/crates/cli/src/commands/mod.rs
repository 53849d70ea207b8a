pub mod bench;
pub mod compare;
pub mod energy;
pub mod network;
pub mod roofline;
pub mod scaling;
pub mod spec;

use std::path::PathBuf;

use perfchar_core::ingest::{self, RunRecord};
use perfchar_core::{Error, Result};

use crate::output::Output;

/// Concatenate run files in argument order.
pub fn load_runs(paths: &[PathBuf], out: &mut Output) -> Result<Vec<RunRecord>> {
    let mut all = Vec::new();
    for p in paths {
        out.input(p);
        all.extend(ingest::load_runs(p)?);
    }
    Ok(all)
}

/// Parse `x,y,z`.
pub fn triple(s: &str, what: &str) -> Result<[u64; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || {
        Error::InvalidParameter(format!(
            "{what} must be `x,y,z` positive integers, got `{s}`"
        ))
    };
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut v = [0u64; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| bad())?;
    }
    Ok(v)
}

/// File-name-safe form of a group key.
pub fn slug(key: &[String]) -> String {
    key.iter()
        .map(|k| {
            k.chars()
                .map(|c| {
                    if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                        c
                    } else {
                        '_'
                    }
                })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("_")
}
