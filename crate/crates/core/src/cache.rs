//! Append-only CSV cache of per-prime partial-sum records.
//!
//! Rows carry an algorithm fingerprint; rows from other versions and rows
//! that fail to parse are skipped (and so recomputed).

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::char_sums::Kind;
use crate::error::Result;
use crate::partial_sums::PartialSumRecord;

/// Changes whenever the computation behind a cached `c_p` changes.
pub const ALGORITHM_VERSION: &str = "csum-rader-eps-min-v1";

pub const CACHE_FILE: &str = "partial_sums.csv";
const HEADER: &str = "p,kind,c_p,argmax_s,version";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub p: u64,
    pub kind: Kind,
    pub c_p: f64,
    pub argmax_s: u64,
    pub version: String,
}

impl CacheRecord {
    pub fn from_record(r: &PartialSumRecord) -> Self {
        CacheRecord {
            p: r.p,
            kind: r.kind,
            c_p: r.c_p,
            argmax_s: r.argmax_s,
            version: ALGORITHM_VERSION.to_string(),
        }
    }

    pub fn to_record(&self) -> PartialSumRecord {
        PartialSumRecord {
            p: self.p,
            kind: self.kind,
            c_p: self.c_p,
            argmax_s: self.argmax_s,
        }
    }

    /// 17 significant digits, enough to round-trip any f64.
    fn to_line(&self) -> String {
        format!(
            "{},{},{:.16e},{},{}",
            self.p, self.kind, self.c_p, self.argmax_s, self.version
        )
    }

    fn parse(line: &str) -> Option<Self> {
        let fields: Vec<&str> = line.trim_end().split(',').collect();
        if fields.len() != 5 {
            return None;
        }
        let c_p: f64 = fields[2].parse().ok()?;
        if !c_p.is_finite() {
            return None;
        }
        Some(CacheRecord {
            p: fields[0].parse().ok()?,
            kind: fields[1].parse().ok()?,
            c_p,
            argmax_s: fields[3].parse().ok()?,
            version: fields[4].to_string(),
        })
    }
}

pub struct Cache {
    path: PathBuf,
    writer: Mutex<Option<File>>,
}

impl Cache {
    /// Creates the directory if needed.
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Cache {
            path: dir.join(CACHE_FILE),
            writer: Mutex::new(None),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Records with the current version tag; later rows win.
    pub fn load(&self) -> Result<BTreeMap<(u64, Kind), PartialSumRecord>> {
        let mut out = BTreeMap::new();
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e.into()),
        };
        let (mut stale, mut corrupt) = (0usize, 0usize);
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() || line.trim() == HEADER {
                continue;
            }
            match CacheRecord::parse(&line) {
                Some(rec) if rec.version == ALGORITHM_VERSION => {
                    out.insert((rec.p, rec.kind), rec.to_record());
                }
                Some(_) => stale += 1,
                None => {
                    corrupt += 1;
                    log::warn!("{}:{}: skipping corrupt row {:?}", self.path.display(), i + 1, line);
                }
            }
        }
        if stale > 0 {
            log::info!("ignored {stale} cache rows from other versions");
        }
        if corrupt > 0 {
            log::warn!("skipped {corrupt} corrupt cache rows");
        }
        Ok(out)
    }

    /// Appends one row; safe to call from worker threads.
    pub fn store(&self, record: &PartialSumRecord) -> Result<()> {
        let mut guard = self.writer.lock().expect("cache writer poisoned");
        if guard.is_none() {
            let fresh = !self.path.exists() || fs::metadata(&self.path)?.len() == 0;
            let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
            if fresh {
                writeln!(f, "{HEADER}")?;
            }
            *guard = Some(f);
        }
        let f = guard.as_mut().expect("writer opened above");
        writeln!(f, "{}", CacheRecord::from_record(record).to_line())?;
        f.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(p: u64, c: f64) -> PartialSumRecord {
        PartialSumRecord {
            p,
            kind: Kind::Main,
            c_p: c,
            argmax_s: 7,
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        let r = rec(101, 1.0 / 3.0 + 2.718281828459045);
        cache.store(&r).unwrap();
        let loaded = cache.load().unwrap();
        assert_eq!(loaded[&(101, Kind::Main)], r);
    }

    #[test]
    fn skips_corrupt_and_stale_rows() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(dir.path()).unwrap();
        cache.store(&rec(101, 1.5)).unwrap();
        let mut f = OpenOptions::new().append(true).open(cache.path()).unwrap();
        writeln!(f, "107,main,garbage,3,{ALGORITHM_VERSION}").unwrap();
        writeln!(f, "113,main,1.0e0,3,old-version").unwrap();
        writeln!(f, "127,main").unwrap();
        drop(f);
        let loaded = cache.load().unwrap();
        assert_eq!(loaded.len(), 1);
        assert!(loaded.contains_key(&(101, Kind::Main)));
    }

    #[test]
    fn missing_file_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::open(&dir.path().join("nested")).unwrap();
        assert!(cache.load().unwrap().is_empty());
    }
}
