//! On-disk cache of correlator tables.
//!
//! One plain-text record per table:
//!
//! ```text
//! # format_version: 1
//! # g: 1.0
//! # n_max: 350
//! # quad_tol: 1e-12
//! # method: LEVINSON_MINORS
//! n,value
//! 1,0.6366197723675814
//! ...
//! ```
//!
//! Floats are written in shortest round-trip form, so reading a record back is bit-exact.
//! Files are named `<key-hash>-<n_max>.csv`, where the hash covers the format version, `g`
//! and the quadrature tolerance; a request for fewer rows is served from the prefix of any
//! longer record with the same hash. Writes go through a temporary file and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureConfig;
use crate::scaling::TableSource;
use crate::tfim::{correlator_table, CorrelatorTable, MinorMethod};

pub const FORMAT_VERSION: u32 = 1;
/// Environment variable naming the cache directory.
pub const CACHE_DIR_ENV: &str = "WCACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = "./wcache";

/// Identity of one cached table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheKey {
    pub g: f64,
    pub n_max: usize,
    pub quad_tol: f64,
    pub format_version: u32,
}

impl CacheKey {
    pub fn new(g: f64, n_max: usize, quad_tol: f64) -> Self {
        Self {
            g,
            n_max,
            quad_tol,
            format_version: FORMAT_VERSION,
        }
    }

    /// Hash of everything except `n_max`.
    fn family(&self) -> String {
        let text = format!(
            "v{}|g={:?}|tol={:?}",
            self.format_version, self.g, self.quad_tol
        );
        hex::encode(&Sha256::digest(text.as_bytes())[..16])
    }

    pub fn file_name(&self) -> String {
        format!("{}-{}.csv", self.family(), self.n_max)
    }
}

/// Directory of table records.
#[derive(Debug, Clone)]
pub struct TableStore {
    dir: PathBuf,
}

impl TableStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Directory from [`CACHE_DIR_ENV`], else [`DEFAULT_CACHE_DIR`].
    pub fn from_env() -> Self {
        let dir = std::env::var_os(CACHE_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR));
        Self::new(dir)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn put_table(&self, table: &CorrelatorTable<f64>) -> Result<CacheKey> {
        let key = CacheKey::new(table.g, table.n_max, table.tol);
        let path = self.dir.join(key.file_name());
        let payload = encode(table);
        if path.exists() {
            let existing = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if Sha256::digest(&existing) == Sha256::digest(payload.as_bytes()) {
                return Ok(key);
            }
            return Err(Error::VersionConflict { path });
        }
        fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let tmp = self.dir.join(format!(
            ".{}.{}.{}.tmp",
            key.file_name(),
            std::process::id(),
            unique_suffix()
        ));
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(payload.as_bytes())?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        };
        if let Err(e) = write() {
            let _ = fs::remove_file(&tmp);
            return Err(Error::io(&path, e));
        }
        Ok(key)
    }

    /// Table for `(g, n_max, quad_tol)`, possibly a prefix of a longer record. `None` if absent.
    pub fn get_table(
        &self,
        g: f64,
        n_max: usize,
        quad_tol: f64,
    ) -> Result<Option<CorrelatorTable<f64>>> {
        let key = CacheKey::new(g, n_max, quad_tol);
        let exact = self.dir.join(key.file_name());
        if exact.exists() {
            return self.read_checked(&exact, &key).map(Some);
        }
        let family = format!("{}-", key.family());
        let entries = match fs::read_dir(&self.dir) {
            Ok(entries) => entries,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&self.dir, e)),
        };
        let mut best: Option<(usize, PathBuf)> = None;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(&self.dir, e))?;
            let name = entry.file_name();
            let Some(name) = name.to_str() else { continue };
            let Some(rows) = name
                .strip_prefix(&family)
                .and_then(|rest| rest.strip_suffix(".csv"))
                .and_then(|n| n.parse::<usize>().ok())
            else {
                continue;
            };
            if rows >= n_max && best.as_ref().is_none_or(|(b, _)| rows < *b) {
                best = Some((rows, entry.path()));
            }
        }
        match best {
            None => Ok(None),
            Some((rows, path)) => {
                let stored = self.read_checked(&path, &CacheKey::new(g, rows, quad_tol))?;
                Ok(stored.prefix(n_max))
            }
        }
    }

    fn read_checked(&self, path: &Path, key: &CacheKey) -> Result<CorrelatorTable<f64>> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let table = decode(&text).map_err(|reason| Error::Malformed {
            path: path.to_path_buf(),
            reason,
        })?;
        if table.g.to_bits() != key.g.to_bits()
            || table.tol.to_bits() != key.quad_tol.to_bits()
            || table.n_max != key.n_max
        {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                reason: "header does not match the file name".into(),
            });
        }
        Ok(table)
    }
}

fn unique_suffix() -> u128 {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_nanos())
        .unwrap_or(0);
    nanos ^ (COUNTER.fetch_add(1, Ordering::Relaxed) as u128) << 64
}

/// Record text for a table.
pub fn encode(table: &CorrelatorTable<f64>) -> String {
    let mut out = String::with_capacity(32 * table.n_max + 128);
    out.push_str(&format!("# format_version: {FORMAT_VERSION}\n"));
    out.push_str(&format!("# g: {:?}\n", table.g));
    out.push_str(&format!("# n_max: {}\n", table.n_max));
    out.push_str(&format!("# quad_tol: {:?}\n", table.tol));
    out.push_str(&format!("# method: {}\n", table.method.tag()));
    out.push_str("n,value\n");
    for (i, v) in table.values.iter().enumerate() {
        out.push_str(&format!("{},{:?}\n", i + 1, v));
    }
    out
}

/// Parses record text produced by [`encode`].
pub fn decode(text: &str) -> std::result::Result<CorrelatorTable<f64>, String> {
    let mut version = None;
    let mut g = None;
    let mut n_max = None;
    let mut tol = None;
    let mut method = None;
    let mut values = Vec::new();
    let mut seen_columns = false;
    for (lineno, line) in text.lines().enumerate() {
        let at = |msg: &str| format!("line {}: {msg}", lineno + 1);
        if let Some(header) = line.strip_prefix("# ") {
            let (k, v) = header.split_once(": ").ok_or_else(|| at("bad header"))?;
            match k {
                "format_version" => {
                    version = Some(v.parse::<u32>().map_err(|e| at(&e.to_string()))?)
                }
                "g" => g = Some(v.parse::<f64>().map_err(|e| at(&e.to_string()))?),
                "n_max" => n_max = Some(v.parse::<usize>().map_err(|e| at(&e.to_string()))?),
                "quad_tol" => tol = Some(v.parse::<f64>().map_err(|e| at(&e.to_string()))?),
                "method" => {
                    method = Some(MinorMethod::from_tag(v).ok_or_else(|| at("unknown method"))?)
                }
                _ => return Err(at(&format!("unknown header key {k}"))),
            }
        } else if line == "n,value" {
            seen_columns = true;
        } else if !line.is_empty() {
            if !seen_columns {
                return Err(at("data before column header"));
            }
            let (n, v) = line.split_once(',').ok_or_else(|| at("bad row"))?;
            let n: usize = n
                .parse()
                .map_err(|e: std::num::ParseIntError| at(&e.to_string()))?;
            if n != values.len() + 1 {
                return Err(at("rows out of order"));
            }
            values.push(v.parse::<f64>().map_err(|e| at(&e.to_string()))?);
        }
    }
    match version {
        Some(FORMAT_VERSION) => {}
        Some(v) => return Err(format!("unsupported format version {v}")),
        None => return Err("missing format_version".into()),
    }
    let n_max = n_max.ok_or("missing n_max")?;
    if values.len() != n_max {
        return Err(format!("expected {n_max} rows, found {}", values.len()));
    }
    Ok(CorrelatorTable {
        g: g.ok_or("missing g")?,
        n_max,
        values,
        tol: tol.ok_or("missing quad_tol")?,
        method: method.ok_or("missing method")?,
    })
}

/// [`TableSource`] backed by a [`TableStore`]: read if present, else compute and persist.
#[derive(Debug, Clone)]
pub struct CachedSource {
    pub store: TableStore,
    pub cfg: QuadratureConfig<f64>,
}

impl CachedSource {
    pub fn new(store: TableStore, quad_tol: f64) -> Self {
        Self {
            store,
            cfg: QuadratureConfig::with_tol(quad_tol),
        }
    }
}

impl TableSource for CachedSource {
    fn table(&self, g: f64, n_max: usize) -> Result<CorrelatorTable<f64>> {
        if let Some(t) = self.store.get_table(g, n_max, self.cfg.target_abs_tol)? {
            return Ok(t);
        }
        let t = correlator_table(g, n_max, &self.cfg)?;
        self.store.put_table(&t)?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CorrelatorTable<f64> {
        CorrelatorTable {
            g: 0.1 + 0.2,
            n_max: 4,
            values: vec![0.9, 1.0 / 3.0, 1e-300, 0.0],
            tol: 1e-12,
            method: MinorMethod::LevinsonMinors,
        }
    }

    #[test]
    fn encode_decode_is_bit_exact() {
        let t = sample();
        let back = decode(&encode(&t)).unwrap();
        assert_eq!(back.g.to_bits(), t.g.to_bits());
        for (a, b) in back.values.iter().zip(&t.values) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back, t);
    }

    #[test]
    fn malformed_records() {
        assert!(decode("n,value\n1,0.5\n").is_err());
        let mut text = encode(&sample());
        text = text.replace("# format_version: 1", "# format_version: 9");
        assert!(decode(&text).unwrap_err().contains("unsupported"));
        let truncated: String = encode(&sample())
            .lines()
            .take(8)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(decode(&truncated).unwrap_err().contains("rows"));
    }

    #[test]
    fn key_separates_tolerances() {
        let a = CacheKey::new(1.0, 10, 1e-12);
        let b = CacheKey::new(1.0, 10, 1e-14);
        assert_ne!(a.file_name(), b.file_name());
        assert_eq!(a.file_name(), CacheKey::new(1.0, 10, 1e-12).file_name());
    }

    #[test]
    fn put_get_and_conflict() {
        let dir = tempfile::tempdir().unwrap();
        let store = TableStore::new(dir.path().join("cache"));
        assert!(store.get_table(0.3, 4, 1e-12).unwrap().is_none());
        let t = sample();
        let k1 = store.put_table(&t).unwrap();
        let k2 = store.put_table(&t).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(store.get_table(t.g, 4, 1e-12).unwrap().unwrap(), t);
        assert_eq!(
            store.get_table(t.g, 2, 1e-12).unwrap().unwrap().values,
            t.values[..2]
        );
        assert!(store.get_table(t.g, 5, 1e-12).unwrap().is_none());

        let mut other = t.clone();
        other.values[0] = 0.8;
        assert!(matches!(
            store.put_table(&other).unwrap_err(),
            Error::VersionConflict { .. }
        ));
        let leftovers = fs::read_dir(store.dir())
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .file_name()
                    .to_string_lossy()
                    .ends_with(".tmp")
            })
            .count();
        assert_eq!(leftovers, 0);
    }
}
