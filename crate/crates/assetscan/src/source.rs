// SPDX-License-Identifier: Apache-2.0

//! Finding and parsing RTL files on disk.

use std::fs;
use std::path::{Path, PathBuf};

use assetscan_core::preprocess::IncludeResolver;
use assetscan_core::{parse_source, SourceUnit};
use walkdir::WalkDir;

use crate::error::{Error, Result};

pub const RTL_EXTENSIONS: &[&str] = &["v", "sv", "vh", "svh"];

fn is_rtl(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| RTL_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

/// Header files are only read through `` `include ``.
fn is_header(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("vh") || e.eq_ignore_ascii_case("svh"))
}

/// `path` relative to `root` with forward slashes, so reports do not depend on
/// where the corpus lives.
pub fn display_path(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/")
}

/// Every RTL file under `root` in sorted order. A file given directly is
/// returned on its own.
pub fn discover_sources(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.exists() {
        return Err(Error::MissingRtlDir(root.to_path_buf()));
    }
    if root.is_file() {
        return if is_rtl(root) { Ok(vec![root.to_path_buf()]) } else { Err(Error::NoRtlFiles(root.to_path_buf())) };
    }
    let mut files = Vec::new();
    for entry in WalkDir::new(root).follow_links(true).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into_io_error().unwrap_or_else(|| std::io::Error::other("filesystem loop")))
        })?;
        if entry.file_type().is_file() && is_rtl(entry.path()) {
            files.push(entry.into_path());
        }
    }
    files.sort();
    Ok(files)
}

pub fn read_lossy(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Resolves includes next to the including file, then from the RTL root.
pub struct FsIncludes {
    root: PathBuf,
}

impl FsIncludes {
    pub fn new(root: &Path) -> Self {
        let root = if root.is_file() { root.parent().unwrap_or(Path::new(".")).to_path_buf() } else { root.to_path_buf() };
        Self { root }
    }
}

impl IncludeResolver for FsIncludes {
    fn resolve(&self, name: &str, from: &str) -> Option<(String, String)> {
        let from_dir = self.root.join(from).parent().map(Path::to_path_buf).unwrap_or_else(|| self.root.clone());
        [from_dir.join(name), self.root.join(name)]
            .into_iter()
            .find(|p| p.is_file())
            .and_then(|p| read_lossy(&p).ok().map(|text| (display_path(&self.root, &p), text)))
    }
}

/// Parse every RTL file under `root`. Headers are skipped as compilation units
/// whenever at least one `.v`/`.sv` file exists.
pub fn load_sources(root: &Path) -> Result<Vec<SourceUnit>> {
    let files = discover_sources(root)?;
    if files.is_empty() {
        return Err(Error::NoRtlFiles(root.to_path_buf()));
    }
    let any_unit = files.iter().any(|f| !is_header(f));
    let includes = FsIncludes::new(root);
    let base = includes.root.clone();
    files
        .iter()
        .filter(|f| !any_unit || !is_header(f))
        .map(|f| Ok(parse_source(&display_path(&base, f), &read_lossy(f)?, &includes)))
        .collect()
}
