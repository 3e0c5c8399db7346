//! Append-only JSON-lines journal of experiment records.
//!
//! One record per line, each line written with a single `write_all` and
//! followed by `fsync`. On open, a final line that does not parse (a write
//! cut short by a crash) is dropped and the file truncated back to the last
//! complete record. An unparseable line followed by further records is
//! corruption and is reported, never repaired.

use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use log::warn;

use super::ExperimentRecord;
use crate::error::{Error, Result};

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

/// Result of scanning journal bytes.
#[derive(Debug)]
pub struct Parsed {
    pub records: Vec<ExperimentRecord>,
    /// Length of the prefix holding `records`.
    pub valid_bytes: u64,
    /// Whether a partial trailing record was dropped.
    pub dropped_tail: bool,
}

/// Parses journal contents, tolerating a damaged final line.
pub fn parse(path: &Path, bytes: &[u8]) -> Result<Parsed> {
    let mut records = Vec::new();
    let mut offset = 0usize;
    let mut line_no = 0usize;
    while offset < bytes.len() {
        line_no += 1;
        let (line, next) = match bytes[offset..].iter().position(|&b| b == b'\n') {
            Some(i) => (&bytes[offset..offset + i], offset + i + 1),
            None => (&bytes[offset..], bytes.len()),
        };
        let is_last = bytes[next..].iter().all(u8::is_ascii_whitespace);
        if line.iter().all(u8::is_ascii_whitespace) {
            offset = next;
            continue;
        }
        let terminated = next > offset + line.len();
        match serde_json::from_slice::<ExperimentRecord>(line) {
            Ok(r) if terminated => {
                records.push(r);
                offset = next;
            }
            // includes complete JSON without its newline: still a cut-short write
            _ if is_last => {
                return Ok(Parsed {
                    records,
                    valid_bytes: offset as u64,
                    dropped_tail: true,
                });
            }
            _ => {
                return Err(Error::CorruptJournal {
                    path: path.to_path_buf(),
                    line: line_no,
                    valid_records: records.len(),
                    valid_bytes: offset as u64,
                });
            }
        }
    }
    Ok(Parsed {
        records,
        valid_bytes: offset as u64,
        dropped_tail: false,
    })
}

/// Reads a journal without modifying it. A missing file is empty.
pub fn read(path: &Path) -> Result<Parsed> {
    match std::fs::read(path) {
        Ok(bytes) => parse(path, &bytes),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Parsed {
            records: Vec::new(),
            valid_bytes: 0,
            dropped_tail: false,
        }),
        Err(e) => Err(Error::io(path, e)),
    }
}

impl Journal {
    /// Opens (creating if needed) the journal at `path` and returns it with
    /// the records already present.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<ExperimentRecord>)> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes).map_err(|e| Error::io(&path, e))?;
        let parsed = parse(&path, &bytes)?;
        if parsed.valid_bytes < bytes.len() as u64 {
            if parsed.dropped_tail {
                warn!(
                    "{}: dropping truncated final record after {} complete records",
                    path.display(),
                    parsed.records.len()
                );
            }
            file.set_len(parsed.valid_bytes).map_err(|e| Error::io(&path, e))?;
            file.sync_all().map_err(|e| Error::io(&path, e))?;
        }
        Ok((Journal { path, file }, parsed.records))
    }

    /// Starts an empty journal, discarding any existing content.
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = OpenOptions::new()
            .write(true)
            .create(true)
            .truncate(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        drop(file);
        Ok(Journal::open(&path)?.0)
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&mut self, record: &ExperimentRecord) -> Result<()> {
        let mut line = serde_json::to_vec(record).map_err(|e| Error::Json {
            path: self.path.clone(),
            source: e,
        })?;
        line.push(b'\n');
        self.file.write_all(&line).map_err(|e| Error::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| Error::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, p: usize) -> ExperimentRecord {
        ExperimentRecord {
            graph_id: id.into(),
            e_p: Some(0.5),
            n: 4,
            p,
            best_betas: vec![0.1; p],
            best_gammas: vec![0.2; p],
            best_f: 2.5,
            ground_truth: 3,
            ratio: 2.5 / 3.0,
            evaluations_used: 100,
            starts_completed: 2,
            converged_starts: 2,
            seed: 9,
            padded_start: false,
            near_optimal_params: vec![],
        }
    }

    #[test]
    fn append_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/j.jsonl");
        let (mut j, recs) = Journal::open(&path).unwrap();
        assert!(recs.is_empty());
        j.append(&record("a", 1)).unwrap();
        j.append(&record("a", 2)).unwrap();
        drop(j);
        let (_, recs) = Journal::open(&path).unwrap();
        assert_eq!(recs, vec![record("a", 1), record("a", 2)]);
    }

    #[test]
    fn truncated_tail_is_dropped_and_file_repaired() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let (mut j, _) = Journal::open(&path).unwrap();
        j.append(&record("a", 1)).unwrap();
        j.append(&record("b", 1)).unwrap();
        drop(j);
        let full = std::fs::read(&path).unwrap();
        let cut = full.len() - 20;
        std::fs::write(&path, &full[..cut]).unwrap();

        let (mut j, recs) = Journal::open(&path).unwrap();
        assert_eq!(recs, vec![record("a", 1)]);
        j.append(&record("b", 1)).unwrap();
        drop(j);
        assert_eq!(std::fs::read(&path).unwrap(), full);
    }

    #[test]
    fn complete_line_without_newline_counts_as_truncated() {
        let line = serde_json::to_string(&record("a", 1)).unwrap();
        let parsed = parse(Path::new("x"), line.as_bytes()).unwrap();
        assert!(parsed.records.is_empty());
        assert!(parsed.dropped_tail);
        let parsed = parse(Path::new("x"), format!("{line}\n").as_bytes()).unwrap();
        assert_eq!(parsed.records.len(), 1);
        assert!(!parsed.dropped_tail);
    }

    #[test]
    fn corruption_in_the_middle_is_an_error() {
        let good = serde_json::to_string(&record("a", 1)).unwrap();
        let text = format!("{good}\n{{\"broken\n{good}\n");
        match parse(Path::new("j"), text.as_bytes()) {
            Err(Error::CorruptJournal {
                line,
                valid_records,
                valid_bytes,
                ..
            }) => {
                assert_eq!(line, 2);
                assert_eq!(valid_records, 1);
                assert_eq!(valid_bytes as usize, good.len() + 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_file_reads_empty() {
        let parsed = read(Path::new("/nonexistent/journal.jsonl")).unwrap();
        assert!(parsed.records.is_empty());
    }
}
