//! Element and Jordan map files in canonical JSON.

use std::fs;
use std::path::Path;

use conelab_core::json::{element_from_str, element_to_string, jordan_from_str, jordan_to_string};
use conelab_core::{Element, JordanIso};

use crate::CliError;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: String) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// File contents for `x`: one canonical JSON line.
pub fn element_bytes(x: &Element) -> String {
    element_to_string(x) + "\n"
}

pub fn jordan_bytes(j: &JordanIso) -> String {
    jordan_to_string(j) + "\n"
}

pub fn load_element(path: &Path) -> Result<Element, CliError> {
    element_from_str(read(path)?.trim()).map_err(CliError::core(path.display().to_string()))
}

pub fn save_element(path: &Path, x: &Element) -> Result<(), CliError> {
    write(path, element_bytes(x))
}

pub fn load_jordan(path: &Path) -> Result<JordanIso, CliError> {
    jordan_from_str(read(path)?.trim()).map_err(CliError::core(path.display().to_string()))
}

pub fn save_jordan(path: &Path, j: &JordanIso) -> Result<(), CliError> {
    write(path, jordan_bytes(j))
}
