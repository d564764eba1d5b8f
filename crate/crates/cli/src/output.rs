use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::manifest::RunManifest;

/// 17 significant digits, `.` decimal, no grouping; round-trips any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the payload to `out` (with a `.manifest.json` sidecar) or to stdout.
pub fn emit(out: Option<&Path>, payload: &[u8], manifest: &RunManifest) -> Result<()> {
    match out {
        Some(path) => {
            fs::write(path, payload).with_context(|| format!("writing {}", path.display()))?;
            let mpath = manifest_path(path);
            fs::write(&mpath, to_json(manifest)?)
                .with_context(|| format!("writing {}", mpath.display()))?;
        }
        None => std::io::stdout().write_all(payload)?,
    }
    Ok(())
}
