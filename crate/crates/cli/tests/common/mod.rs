#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

/// Every file under `root` as relative path (forward slashes) to bytes.
pub fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap();
                let key = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
                out.insert(key, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

/// Hex SHA-256 of each file, keyed by relative path.
pub fn file_hashes(tree: &BTreeMap<String, Vec<u8>>) -> BTreeMap<String, String> {
    tree.iter()
        .map(|(path, bytes)| (path.clone(), Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()))
        .collect()
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Recorded `sha256sum` listing of the stub scaffold for the two-page
/// fixture written to a directory named `app`.
pub fn golden_hashes() -> BTreeMap<String, String> {
    let text = std::fs::read_to_string(golden_dir().join("stub-scaffold.files")).unwrap_or_default();
    text.lines().filter_map(|l| l.split_once("  ")).map(|(hash, path)| (path.to_string(), hash.to_string())).collect()
}

/// Paths whose hashes differ between two listings, including missing ones.
pub fn hash_differences(a: &BTreeMap<String, String>, b: &BTreeMap<String, String>) -> Vec<String> {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|k| a.get(*k) != b.get(*k)).cloned().collect()
}
