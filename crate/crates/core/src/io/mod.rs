//! Persistence and file formats.

mod config;
mod datasets;
mod model_file;

use std::io::Write;
use std::path::Path;

pub use config::{describe, RunConfig, KNOWN_KEYS};
pub use datasets::{
    load_groups, load_pairs, load_reference_vocab, load_simset, load_simset_dir, load_wordlist, read_vocab,
    write_vocab,
};
pub use model_file::{decode_model, encode_model, load_model, save_model, MAGIC, VERSION};

use crate::error::{Error, Result};

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |e| Error::io(path, e);
    let file_name = path
        .file_name()
        .ok_or_else(|| err(std::io::Error::new(std::io::ErrorKind::InvalidInput, "not a file path")))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp.{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(err)
}
