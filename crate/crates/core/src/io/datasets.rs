//! Line-oriented dataset loaders. Line numbers in errors are 1-based.
//! Blank lines are skipped; a trailing `\r` is stripped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::evaluator::{ReferenceVocab, SimDataset, SimItem};
use crate::trainer::PairDataset;
use crate::vocab::NGramVocab;

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, msg: msg.into() }
}

/// `phrase1<TAB>phrase2` per line, file order preserved.
pub fn load_pairs(path: &Path) -> Result<PairDataset> {
    let text = read(path)?;
    let mut pairs = Vec::new();
    let mut line_of = Vec::new();
    for (lineno, line) in lines(&text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_err(path, lineno, format!("expected 2 tab-separated fields, found {}", fields.len())));
        }
        pairs.push((fields[0].to_string(), fields[1].to_string()));
        line_of.push(lineno);
    }
    if pairs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    PairDataset::new(pairs).map_err(|i| parse_err(path, line_of[i], "empty phrase"))
}

/// `text1<TAB>text2<TAB>gold` per line; gold must lie within `scale`.
/// The dataset is named after the file stem.
pub fn load_simset(path: &Path, scale: (f64, f64)) -> Result<SimDataset> {
    let text = read(path)?;
    let mut items = Vec::new();
    for (lineno, line) in lines(&text) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(parse_err(path, lineno, format!("expected 3 tab-separated fields, found {}", fields.len())));
        }
        let gold: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad gold score {:?}", fields[2])))?;
        if !(gold >= scale.0 && gold <= scale.1) {
            return Err(parse_err(
                path,
                lineno,
                format!("gold score {gold} outside scale {}-{}", scale.0, scale.1),
            ));
        }
        items.push(SimItem { text1: fields[0].to_string(), text2: fields[1].to_string(), gold });
    }
    if items.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(SimDataset { name, items, scale })
}

/// Every regular, non-hidden file in `dir`, sorted by file name.
pub fn load_simset_dir(dir: &Path, scale: (f64, f64)) -> Result<Vec<SimDataset>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && !p.file_name().is_some_and(|n| n.to_string_lossy().starts_with('.')))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::EmptyDataset);
    }
    paths.iter().map(|p| load_simset(p, scale)).collect()
}

/// One word per line, trimmed.
pub fn load_wordlist(path: &Path) -> Result<Vec<String>> {
    let text = read(path)?;
    let words: Vec<String> = lines(&text).map(|(_, l)| l.trim().to_string()).collect();
    if words.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(words)
}

pub fn load_reference_vocab(path: &Path) -> Result<ReferenceVocab> {
    ReferenceVocab::new(load_wordlist(path)?)
}

/// `dataset<TAB>group` per line.
pub fn load_groups(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = read(path)?;
    let mut groups = BTreeMap::new();
    for (lineno, line) in lines(&text) {
        let Some((name, group)) = line.split_once('\t') else {
            return Err(parse_err(path, lineno, "expected dataset<TAB>group"));
        };
        groups.insert(name.trim().to_string(), group.trim().to_string());
    }
    Ok(groups)
}

pub fn read_vocab(path: &Path) -> Result<NGramVocab> {
    let text = read(path)?;
    NGramVocab::parse_tsv(&text).map_err(|(line, msg)| parse_err(path, line, msg))
}

pub fn write_vocab(vocab: &NGramVocab, path: &Path) -> Result<()> {
    super::write_atomic(path, vocab.to_tsv().as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(dir: &tempfile::TempDir, name: &str, body: &str) -> PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    #[test]
    fn pairs_in_file_order() {
        let d = tempfile::tempdir().unwrap();
        let p = file(&d, "p.tsv", "big\tlarge\r\n\nsmall\ttiny\n");
        let ds = load_pairs(&p).unwrap();
        assert_eq!(ds.pairs(), &[("big".to_string(), "large".to_string()), ("small".into(), "tiny".into())]);
    }

    #[test]
    fn pair_errors_cite_lines() {
        let d = tempfile::tempdir().unwrap();
        let err = load_pairs(&file(&d, "a.tsv", "a\tb\nc\td\te\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = load_pairs(&file(&d, "b.tsv", "a\tb\n\nc\t \n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = load_pairs(&file(&d, "c.tsv", "")).unwrap_err();
        assert_eq!(err.to_string(), "empty dataset");
        assert!(matches!(load_pairs(&d.path().join("nope")), Err(Error::Io { .. })));
    }

    #[test]
    fn simsets_check_scale() {
        let d = tempfile::tempdir().unwrap();
        let ok = load_simset(&file(&d, "sts12.tsv", "a b\tc d\t4.2\n"), (0.0, 5.0)).unwrap();
        assert_eq!(ok.name, "sts12");
        assert_eq!(ok.items[0].gold, 4.2);
        let err = load_simset(&file(&d, "bad.tsv", "a\tb\t1\na\tb\t5.5\n"), (0.0, 5.0)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(err.to_string().contains(":2:"));
        assert!(load_simset(&file(&d, "nan.tsv", "a\tb\tx\n"), (0.0, 5.0)).is_err());
    }

    #[test]
    fn simset_dir_sorted_by_name() {
        let d = tempfile::tempdir().unwrap();
        file(&d, "b.tsv", "x\ty\t1\n");
        file(&d, "a.tsv", "x\ty\t2\n");
        file(&d, ".hidden", "garbage");
        let sets = load_simset_dir(d.path(), (0.0, 5.0)).unwrap();
        let names: Vec<&str> = sets.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, vec!["a", "b"]);
    }

    #[test]
    fn wordlists_groups_and_vocab_files() {
        let d = tempfile::tempdir().unwrap();
        assert_eq!(load_wordlist(&file(&d, "w", " cat \n\ndog\n")).unwrap(), vec!["cat", "dog"]);
        assert!(load_wordlist(&file(&d, "e", "\n")).is_err());
        let g = load_groups(&file(&d, "g", "MSRpar\t2012\nSICK\tSICK\n")).unwrap();
        assert_eq!(g["MSRpar"], "2012");
        assert!(load_groups(&file(&d, "g2", "oops\n")).is_err());
        let err = read_vocab(&file(&d, "v", "ab\t2\t1\nab\n")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}
