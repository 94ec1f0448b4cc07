use std::io::Read;
use std::path::Path;

use entlr::schema::{density_from_json, named_povm, InlinePovm, MatrixJson, PovmSpec};
use entlr::{DensityMatrix, Povm};

use crate::failure::{CliResult, Failure};

/// Whole file, or stdin for `-`.
pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_end(&mut buf)?;
    } else {
        buf = std::fs::read(path).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    }
    Ok(buf)
}

/// A built-in POVM name, or a path to `{"effects": [...]}`.
pub fn povm_from_flag(flag: &str) -> CliResult<Povm> {
    match named_povm(flag) {
        Ok(p) => Ok(p),
        Err(_) if Path::new(flag).is_file() => {
            let inline: InlinePovm = serde_json::from_slice(&read_bytes(Path::new(flag))?)
                .map_err(|e| Failure::data(format!("{flag}: {e}")))?;
            Ok(PovmSpec::Inline(inline).build()?)
        }
        Err(e) => Err(Failure::usage(e)),
    }
}

pub fn state_from_file(path: &Path) -> CliResult<DensityMatrix> {
    let m: MatrixJson = serde_json::from_slice(&read_bytes(path)?)
        .map_err(|e| Failure::data(format!("{}: {e}", path.display())))?;
    Ok(density_from_json(&m)?)
}
