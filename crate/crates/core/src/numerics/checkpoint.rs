//! Text checkpoint format.
//!
//! ```text
//! seqgan-ckpt v1
//! embedding 11x4 0.1 -0.25 ...
//! out.c 10 0 0 ...
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting, so
//! save/load is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use super::params::ParameterStore;
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const HEADER: &str = "seqgan-ckpt v1";

pub fn to_text(store: &ParameterStore) -> String {
    let mut out = String::with_capacity(store.num_scalars() * 22 + 64);
    out.push_str(HEADER);
    out.push('\n');
    for (name, p) in store.iter() {
        let dims: Vec<String> = p.value.shape().iter().map(|d| d.to_string()).collect();
        out.push_str(name);
        out.push(' ');
        out.push_str(&dims.join("x"));
        for v in p.value.data() {
            // `{:?}` keeps a trailing ".0" and prints every bit of precision.
            let _ = write!(out, " {v:?}");
        }
        out.push('\n');
    }
    out
}

/// Parses checkpoint text into a fresh store (values only; gradients and
/// optimizer moments start at zero).
pub fn from_text(text: &str) -> Result<ParameterStore> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header {HEADER:?}"),
            })
        }
    }
    let mut store = ParameterStore::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        let name = fields.next().unwrap_or_default();
        let dims = fields.next().ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("parameter {name} has no shape"),
        })?;
        let shape = dims
            .split('x')
            .map(|d| d.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad shape {dims:?}: {e}"),
            })?;
        let data = fields
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: line_no,
                msg: format!("bad value in {name}: {e}"),
            })?;
        let tensor = Tensor::new(shape, data).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        store.add(name, tensor).map_err(|e| Error::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
    }
    Ok(store)
}

/// Loads checkpoint values into an existing store with the same layout.
pub fn load_into(store: &mut ParameterStore, text: &str) -> Result<()> {
    let loaded = from_text(text)?;
    store.copy_values_from(&loaded)
}

pub fn save(store: &ParameterStore, path: &Path) -> Result<()> {
    std::fs::write(path, to_text(store))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<ParameterStore> {
    from_text(&std::fs::read_to_string(path)?)
}
