//! Flat-file formats.
//!
//! - `candidates.csv`, `voters.csv`: header `f1,…,fd`, one vector per row
//! - `utilities.csv`: header `c0,…,c(m−1)`, one voter per row
//! - `profile.jsonl`: one voter per line, `{"ranking":[…]}` or `{"pairs":[[a,b],…]}`
//! - `meta.json`: free-form generator metadata
//!
//! Parse errors carry the 1-based line number of the offending input.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{CandidateSet, Instance, Preference, Profile, UtilityProfile, VoterSet};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn read_matrix<R: Read>(reader: R, prefix: &str, start: usize) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    for (i, h) in headers.iter().enumerate() {
        let expected = format!("{prefix}{}", i + start);
        if h != expected {
            return Err(parse_err(1, format!("expected header {expected:?}, found {h:?}")));
        }
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| parse_err(line, format!("not a number: {s:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

fn write_matrix<W: Write>(writer: W, prefix: &str, start: usize, width: usize, rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((0..width).map(|i| format!("{prefix}{}", i + start)))?;
    for r in rows {
        w.write_record(r.iter().map(|x| format!("{x:?}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of a `f1,…,fd` file.
pub fn parse_vectors<R: Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    read_matrix(reader, "f", 1)
}

pub fn read_vectors(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_vectors(fs::File::open(path)?)
}

pub fn write_vectors(path: &Path, rows: &[Vec<f64>]) -> Result<()> {
    let d = rows.first().map_or(0, Vec::len);
    write_matrix(fs::File::create(path)?, "f", 1, d, rows)
}

pub fn read_candidates(path: &Path, renormalize: bool) -> Result<CandidateSet> {
    let rows = read_vectors(path)?;
    if renormalize {
        CandidateSet::renormalized(rows)
    } else {
        CandidateSet::new(rows)
    }
}

pub fn read_voters(path: &Path) -> Result<VoterSet> {
    VoterSet::new(read_vectors(path)?)
}

pub fn parse_utilities<R: Read>(reader: R) -> Result<UtilityProfile> {
    UtilityProfile::new(read_matrix(reader, "c", 0)?)
}

pub fn read_utilities(path: &Path) -> Result<UtilityProfile> {
    parse_utilities(fs::File::open(path)?)
}

pub fn write_utilities(path: &Path, utilities: &UtilityProfile) -> Result<()> {
    write_matrix(fs::File::create(path)?, "c", 0, utilities.num_candidates(), utilities.rows())
}

/// Reads one preference per nonblank line. The candidate count is taken from
/// `num_candidates` when given, otherwise inferred from the largest index.
pub fn parse_profile<R: BufRead>(reader: R, num_candidates: Option<usize>) -> Result<Profile> {
    let mut voters = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let pref: Preference = serde_json::from_str(&line).map_err(|e| parse_err(i + 1, e.to_string()))?;
        voters.push(pref);
    }
    let inferred = voters
        .iter()
        .map(|p| match p {
            Preference::Ranking(r) => r.len().max(r.iter().max().map_or(0, |x| x + 1)),
            Preference::Pairs(ps) => ps.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0),
        })
        .max()
        .unwrap_or(0);
    Profile::new(num_candidates.unwrap_or(inferred), voters)
}

pub fn read_profile(path: &Path, num_candidates: Option<usize>) -> Result<Profile> {
    parse_profile(BufReader::new(fs::File::open(path)?), num_candidates)
}

pub fn write_profile(path: &Path, profile: &Profile) -> Result<()> {
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    for p in profile.voters() {
        serde_json::to_writer(&mut out, p)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Ratings with a header row; empty cells are unobserved.
pub fn parse_ratings<R: Read>(reader: R) -> Result<Vec<Vec<Option<f64>>>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>()
                        .map(Some)
                        .map_err(|_| parse_err(line, format!("not a number: {s:?}")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_ratings(path: &Path) -> Result<Vec<Vec<Option<f64>>>> {
    parse_ratings(fs::File::open(path)?)
}

/// Writes every available part of `instance` plus `meta.json` into `dir`.
pub fn write_instance(dir: &Path, instance: &Instance, meta: &serde_json::Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_vectors(&dir.join("candidates.csv"), instance.candidates.vectors())?;
    if let Some(v) = &instance.voters {
        write_vectors(&dir.join("voters.csv"), v.vectors())?;
    }
    if let Some(u) = &instance.utilities {
        write_utilities(&dir.join("utilities.csv"), u)?;
    }
    write_profile(&dir.join("profile.jsonl"), &instance.profile)?;
    let mut f = fs::File::create(dir.join("meta.json"))?;
    serde_json::to_writer_pretty(&mut f, meta)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Loads a directory written by [`write_instance`]; voters and utilities are
/// optional.
pub fn read_instance(dir: &Path) -> Result<Instance> {
    let candidates = read_candidates(&dir.join("candidates.csv"), false)?;
    let profile = read_profile(&dir.join("profile.jsonl"), Some(candidates.len()))?;
    let voters_path = dir.join("voters.csv");
    let voters = if voters_path.exists() { Some(read_voters(&voters_path)?) } else { None };
    let util_path = dir.join("utilities.csv");
    let utilities = if util_path.exists() { Some(read_utilities(&util_path)?) } else { None };
    Ok(Instance {
        candidates,
        voters,
        profile,
        utilities,
        seed: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_round_trip() {
        let rows = vec![vec![0.25, 0.75], vec![1.0, 0.0]];
        let mut buf = Vec::new();
        write_matrix(&mut buf, "f", 1, 2, &rows).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("f1,f2\n"));
        assert_eq!(parse_vectors(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn bad_header_and_number() {
        assert!(matches!(parse_vectors("x1,x2\n0.5,0.5\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(
            parse_vectors("f1,f2\n0.5,0.5\n0.5,abc\n".as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(parse_utilities("c0,c1\n0.5,0.5\n".as_bytes()).is_ok());
        assert!(parse_utilities("c1,c2\n0.5,0.5\n".as_bytes()).is_err());
    }

    #[test]
    fn profile_lines() {
        let text = "{\"ranking\":[1,0,2]}\n\n{\"pairs\":[[0,2]]}\n";
        let p = parse_profile(text.as_bytes(), None).unwrap();
        assert_eq!(p.num_candidates(), 3);
        assert_eq!(p.voters()[1], Preference::Pairs(vec![(0, 2)]));

        let err = parse_profile("{\"ranking\":[0,1]}\n{\"ranking\":[0,\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn ratings_missing_cells() {
        let r = parse_ratings("a,b,c\n1,,3\n,2,\n".as_bytes()).unwrap();
        assert_eq!(r, vec![vec![Some(1.0), None, Some(3.0)], vec![None, Some(2.0), None]]);
    }
}
