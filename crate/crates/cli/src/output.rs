//! Output directory handling and input discovery.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// Writes files below one directory. Each file is written to a temporary
/// sibling and renamed into place, and no input file is ever overwritten.
pub struct Output {
    root: PathBuf,
    inputs: BTreeSet<PathBuf>,
    written: Vec<String>,
}

impl Output {
    pub fn new(root: &Path) -> Result<Output> {
        std::fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Output { root: root.to_path_buf(), inputs: BTreeSet::new(), written: Vec::new() })
    }

    pub fn protect(&mut self, input: &Path) {
        if let Ok(p) = input.canonicalize() {
            self.inputs.insert(p);
        }
    }

    /// Writes `rel` (a `/`-separated path below the root) atomically.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        let dir = path.parent().expect("relative path has a parent");
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        if let Ok(existing) = path.canonicalize() {
            if self.inputs.contains(&existing) {
                bail!("refusing to overwrite input file {}", path.display());
            }
        }
        write_atomic(&path, bytes)?;
        self.written.push(rel.to_string());
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot write in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// Expands directories into their files with extension `ext`, sorted by
/// name; plain files are kept as given. Missing paths are an error.
pub fn expand_inputs(paths: &[PathBuf], ext: &str) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("cannot list {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && f.extension().is_some_and(|x| x == ext))
                .collect();
            found.sort();
            if found.is_empty() {
                bail!("{} contains no .{ext} files", p.display());
            }
            out.extend(found);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            bail!("input {} does not exist", p.display());
        }
    }
    Ok(out)
}

/// File name stem safe for use in output paths.
pub fn file_stem(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn protected_inputs_are_never_overwritten() {
        let d = tempfile::tempdir().unwrap();
        let mut out = Output::new(d.path()).unwrap();
        out.write("a/x.json", b"first").unwrap();
        out.protect(&d.path().join("a/x.json"));
        assert!(out.write("a/x.json", b"second").is_err());
        assert_eq!(std::fs::read(d.path().join("a/x.json")).unwrap(), b"first");
        out.write("a/y.json", b"other").unwrap();
        assert_eq!(out.written(), ["a/x.json", "a/y.json"]);
    }

    #[test]
    fn directories_expand_sorted_by_extension() {
        let d = tempfile::tempdir().unwrap();
        for f in ["b.json", "a.json", "c.txt"] {
            std::fs::write(d.path().join(f), "{}").unwrap();
        }
        let got = expand_inputs(&[d.path().to_path_buf()], "json").unwrap();
        assert_eq!(got, vec![d.path().join("a.json"), d.path().join("b.json")]);
        assert!(expand_inputs(&[d.path().join("missing")], "json").is_err());
        assert!(expand_inputs(&[d.path().to_path_buf()], "jsonl").is_err());
    }
}
