//! On-disk artifacts: utterance manifests, ensemble files, clinical reports,
//! lexicons, score tables, weight manifests and epoch plans.
//!
//! Every format has a `parse_*` entry point over `&str` and a `load_*`
//! wrapper that reads a path. Writers produce bytes that depend only on
//! their input, so repeated runs are byte-identical.

mod clinical;
mod ensemble;
mod lexicon;
mod manifest;
mod tables;

use std::fs;
use std::io::Write;
use std::path::Path;

pub use clinical::{load_clinical_report, parse_clinical_report, ClinicalLabel, ClinicalReport};
pub use ensemble::{
    load_ensembles, parse_ensembles, write_ensembles, AdaptationState, BackendMeta, EnsembleRecord,
};
pub use lexicon::{lexicon_lookup, load_lexicon, parse_lexicon, Lexicon};
pub use manifest::{load_manifest, parse_manifest, write_manifest, Split, UtteranceRecord};
pub use tables::{
    load_score_table, load_weight_manifest, parse_epoch_plan, parse_score_table,
    parse_weight_manifest, write_epoch_plan, write_score_table, write_weight_manifest,
};

use crate::error::{Error, Result};

/// Reads a file as UTF-8. Undecodable bytes are a data error, not an I/O one.
pub fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    String::from_utf8(bytes).map_err(|e| {
        Error::parse(0, format!("{} is not valid UTF-8 (byte {})", path.display(), e.utf8_error().valid_up_to()))
    })
}

/// Writes `contents` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    // temporary files are created owner-only; outputs are ordinary files
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(fs::Permissions::from_mode(0o644))
            .map_err(|e| Error::io(path, e))?;
    }
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Identifiers end up in tab-separated outputs, so tabs and line breaks are
/// rejected along with empty strings.
pub fn validate_id(id: &str, line: usize) -> Result<()> {
    if id.is_empty() || id.trim() != id || id.chars().any(|c| c.is_control()) {
        return Err(Error::parse(line, format!("invalid id {id:?}")));
    }
    Ok(())
}

/// Iterates over non-blank lines with 1-based line numbers.
pub fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty())
}
