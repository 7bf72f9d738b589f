//! Reading state and operator files.

use std::path::{Path, PathBuf};

use modflow_core::encoding::{parse_json, Loaded};
use modflow_core::{ComplexMatrix, DensityMatrix, PureState};

use crate::error::{CliError, CliResult, Context};

/// Raw bytes of every file read, in read order, for the input digest.
#[derive(Debug, Default)]
pub struct InputBytes(pub Vec<Vec<u8>>);

impl InputBytes {
    fn read(&mut self, field: &str, path: &Path) -> CliResult<Loaded> {
        let bytes = std::fs::read(path).map_err(|source| CliError::Read {
            field: field.to_string(),
            path: path.to_path_buf(),
            source,
        })?;
        let text = std::str::from_utf8(&bytes)
            .map_err(|_| CliError::usage(field, format!("{} is not UTF-8", path.display())))?;
        let loaded = parse_json(text).map_err(|e| CliError::core(&format!("{field} ({})", path.display()), e))?;
        self.0.push(bytes);
        Ok(loaded)
    }

    pub fn density(&mut self, field: &str, path: &Path) -> CliResult<DensityMatrix> {
        match self.read(field, path)? {
            Loaded::Density(rho) => Ok(rho),
            // Operators that pass validation are accepted as states.
            Loaded::Operator { matrix, dims } => DensityMatrix::new(&matrix)
                .and_then(|rho| rho.with_dims(dims))
                .field(field),
            Loaded::Pure(psi) => Ok(DensityMatrix::new(&psi.projector())
                .and_then(|rho| rho.with_dims(psi.dims().to_vec()))
                .field(field)?),
        }
    }

    pub fn operator(&mut self, field: &str, path: &Path) -> CliResult<ComplexMatrix> {
        match self.read(field, path)? {
            Loaded::Operator { matrix, .. } => Ok(matrix),
            Loaded::Density(rho) => Ok(rho.matrix().clone()),
            Loaded::Pure(_) => Err(CliError::usage(field, format!("{} holds a pure state, not an operator", path.display()))),
        }
    }

    /// A pure state as stored, or the purification of a stored density matrix.
    pub fn pure_or_purified(&mut self, field: &str, path: &Path) -> CliResult<PureState> {
        match self.read(field, path)? {
            Loaded::Pure(psi) => Ok(psi),
            Loaded::Density(rho) => Ok(modflow_core::encoding::purify(&rho)),
            Loaded::Operator { matrix, .. } => {
                Ok(modflow_core::encoding::purify(&DensityMatrix::new(&matrix).field(field)?))
            }
        }
    }
}

/// Returns the path or a usage error naming the missing flag.
pub fn required<'a>(field: &str, path: &'a Option<PathBuf>) -> CliResult<&'a Path> {
    path.as_deref().ok_or_else(|| CliError::usage(field, "required unless --random is given"))
}
