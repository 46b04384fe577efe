//! Disk formats: line-delimited JSON for published lists and service logs.
//!
//! Published artifacts live in a directory of `.jsonl` files, one record per
//! line: `list_a.jsonl` / `list_b.jsonl` for a final-only publication and
//! `chunk_<epoch>_a.jsonl` / `chunk_<epoch>_b.jsonl` per chunk. A file that
//! fails to parse is an input error, reported as such — never folded into an
//! audit verdict about the election itself.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::model::PublishedLists;

#[derive(Debug, thiserror::Error)]
pub enum FileError {
    #[error("malformed input at {path}:{line}: {detail}")]
    Malformed { path: PathBuf, line: usize, detail: String },
    #[error("published lists are paired; {path} has no counterpart")]
    MissingCounterpart { path: PathBuf },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl FileError {
    /// Stable machine-readable name, e.g. for CLI stderr.
    pub fn code(&self) -> &'static str {
        match self {
            FileError::Malformed { .. } | FileError::MissingCounterpart { .. } => {
                "MALFORMED_INPUT"
            }
            FileError::Io(_) => "IO_ERROR",
        }
    }
}

/// Writes records as one JSON object per line.
pub fn write_jsonl<'a, T: Serialize + 'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a T>,
) -> Result<(), FileError> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, record).map_err(|e| FileError::Malformed {
            path: path.to_owned(),
            line: 0,
            detail: e.to_string(),
        })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a JSONL file; blank lines are skipped, anything else must parse.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, FileError> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| FileError::Malformed {
            path: path.to_owned(),
            line: idx + 1,
            detail: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

fn unit_file_names(unit: &PublishedLists) -> (String, String) {
    match unit.chunk_index {
        None => ("list_a.jsonl".into(), "list_b.jsonl".into()),
        Some(e) => (format!("chunk_{e}_a.jsonl"), format!("chunk_{e}_b.jsonl")),
    }
}

/// Writes each published unit as its `.jsonl` pair under `dir` (created if
/// absent).
pub fn save_published(dir: &Path, units: &[PublishedLists]) -> Result<(), FileError> {
    fs::create_dir_all(dir)?;
    for unit in units {
        let (name_a, name_b) = unit_file_names(unit);
        write_jsonl(&dir.join(name_a), &unit.list_a)?;
        write_jsonl(&dir.join(name_b), &unit.list_b)?;
    }
    Ok(())
}

/// Reads every published unit in `dir`: chunks in epoch order, then the
/// final pair if present. Unrelated files are ignored; a list file whose
/// counterpart is missing is an input error.
pub fn load_published(dir: &Path) -> Result<Vec<PublishedLists>, FileError> {
    let mut chunk_epochs: Vec<u32> = Vec::new();
    let mut has_final = false;
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name();
        let Some(name) = name.to_str() else { continue };
        if name == "list_a.jsonl" || name == "list_b.jsonl" {
            has_final = true;
        } else if let Some(epoch) = parse_chunk_name(name) {
            if !chunk_epochs.contains(&epoch) {
                chunk_epochs.push(epoch);
            }
        }
    }
    chunk_epochs.sort_unstable();

    let mut units = Vec::new();
    for epoch in chunk_epochs {
        units.push(load_pair(
            dir,
            &format!("chunk_{epoch}_a.jsonl"),
            &format!("chunk_{epoch}_b.jsonl"),
            Some(epoch),
        )?);
    }
    if has_final {
        units.push(load_pair(dir, "list_a.jsonl", "list_b.jsonl", None)?);
    }
    Ok(units)
}

fn parse_chunk_name(name: &str) -> Option<u32> {
    let middle = name
        .strip_prefix("chunk_")?
        .strip_suffix("_a.jsonl")
        .or_else(|| name.strip_prefix("chunk_")?.strip_suffix("_b.jsonl"))?;
    middle.parse().ok()
}

fn load_pair(
    dir: &Path,
    name_a: &str,
    name_b: &str,
    chunk_index: Option<u32>,
) -> Result<PublishedLists, FileError> {
    let path_a = dir.join(name_a);
    let path_b = dir.join(name_b);
    for (own, other) in [(&path_a, &path_b), (&path_b, &path_a)] {
        if own.exists() && !other.exists() {
            return Err(FileError::MissingCounterpart { path: own.clone() });
        }
    }
    Ok(PublishedLists {
        list_a: read_jsonl(&path_a)?,
        list_b: read_jsonl(&path_b)?,
        chunk_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::authority::IssuanceEntry;
    use crate::keys::Signature;
    use crate::model::{PlatformStamp, Receipt, VoteBlock, VotedMandate};

    fn sample_unit(chunk_index: Option<u32>, n: u8) -> PublishedLists {
        let mandate = |i: u8| VotedMandate {
            token: [i; 32],
            authority_signature: Signature([i.wrapping_add(1); 64]),
        };
        let block = |i: u8| VoteBlock {
            vote: format!("choice-{i}"),
            receipt: Receipt {
                platform_stamp: PlatformStamp {
                    election_id: [0xE0; 16],
                    epoch: u32::from(i),
                    fresh: [i; 16],
                    platform_signature: Signature([i; 64]),
                },
                voter_stamp: [i.wrapping_mul(3); 32],
            },
            nonce: u64::from(i) * 1000,
        };
        PublishedLists {
            list_a: (0..n).map(mandate).collect(),
            list_b: (0..n).map(block).collect(),
            chunk_index,
        }
    }

    #[test]
    fn final_only_publication_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let units = vec![sample_unit(None, 3)];
        save_published(dir.path(), &units).unwrap();
        assert!(dir.path().join("list_a.jsonl").exists());
        assert!(dir.path().join("list_b.jsonl").exists());
        assert_eq!(load_published(dir.path()).unwrap(), units);
    }

    #[test]
    fn chunked_publication_round_trips_in_epoch_order() {
        let dir = tempfile::tempdir().unwrap();
        // Save out of order; loading sorts chunks and puts the final last.
        let units = vec![
            sample_unit(Some(11), 2),
            sample_unit(Some(2), 1),
            sample_unit(None, 1),
        ];
        save_published(dir.path(), &units).unwrap();
        let loaded = load_published(dir.path()).unwrap();
        let order: Vec<Option<u32>> = loaded.iter().map(|u| u.chunk_index).collect();
        assert_eq!(order, vec![Some(2), Some(11), None]);
        assert_eq!(loaded[0], units[1]);
        assert_eq!(loaded[1], units[0]);
        assert_eq!(loaded[2], units[2]);
    }

    #[test]
    fn unparseable_lines_are_input_errors_with_location() {
        let dir = tempfile::tempdir().unwrap();
        save_published(dir.path(), &[sample_unit(None, 2)]).unwrap();
        let path = dir.path().join("list_b.jsonl");
        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str("{ this is not json\n");
        fs::write(&path, text).unwrap();

        let err = load_published(dir.path()).unwrap_err();
        assert_eq!(err.code(), "MALFORMED_INPUT");
        match err {
            FileError::Malformed { line, .. } => assert_eq!(line, 3),
            other => panic!("expected Malformed, got {other:?}"),
        }
    }

    #[test]
    fn a_list_without_its_counterpart_is_an_input_error() {
        let dir = tempfile::tempdir().unwrap();
        save_published(dir.path(), &[sample_unit(Some(4), 2)]).unwrap();
        fs::remove_file(dir.path().join("chunk_4_b.jsonl")).unwrap();
        let err = load_published(dir.path()).unwrap_err();
        assert_eq!(err.code(), "MALFORMED_INPUT");
        assert!(matches!(err, FileError::MissingCounterpart { .. }));
    }

    #[test]
    fn unrelated_files_are_ignored_and_empty_dirs_load_empty() {
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(load_published(dir.path()).unwrap(), vec![]);
        fs::write(dir.path().join("README.txt"), "not a list").unwrap();
        fs::write(dir.path().join("chunk_x_a.jsonl"), "{}").unwrap();
        assert_eq!(load_published(dir.path()).unwrap(), vec![]);
    }

    #[test]
    fn generic_jsonl_round_trips_service_logs() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("issued.jsonl");
        let entries = vec![
            IssuanceEntry {
                election_id: [1; 16],
                token: [2; 32],
                issued_at: 123,
                citizen_ref: "alice".into(),
            },
            IssuanceEntry {
                election_id: [1; 16],
                token: [3; 32],
                issued_at: 124,
                citizen_ref: "bob".into(),
            },
        ];
        write_jsonl(&path, &entries).unwrap();
        let loaded: Vec<IssuanceEntry> = read_jsonl(&path).unwrap();
        assert_eq!(loaded, entries);

        // Blank lines are tolerated; they carry no record.
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, format!("\n{text}\n\n")).unwrap();
        let reloaded: Vec<IssuanceEntry> = read_jsonl(&path).unwrap();
        assert_eq!(reloaded, entries);
    }
}
