pub mod diagnose;
pub mod impute;
pub mod metrics;
pub mod pool;
pub mod simulate;

use std::fs;
use std::path::Path;

use crate::error::{io_err, Result};

pub(crate) fn ensure_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    Ok(())
}
