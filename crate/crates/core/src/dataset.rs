//! CSV tables exchanged between pipeline stages besides the feature table:
//! human labels, training rows and classifier output.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::ann::Prediction;
use crate::error::{Error, Result};
use crate::features::{parse_floats, FeatureVector, FEATURE_NAMES, N_FEATURES};

fn check_score(score: i64) -> Result<u8> {
    u8::try_from(score)
        .ok()
        .filter(|s| *s <= 4)
        .ok_or_else(|| Error::InvalidParameter(format!("score {score} outside 0..=4")))
}

fn parse_score(cell: &str) -> Result<u8> {
    let v: i64 = cell.trim().parse().map_err(|_| Error::InvalidParameter(format!("bad score {cell:?}")))?;
    check_score(v)
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Io(io),
        other => Error::Format { path: path.to_path_buf(), detail: other.to_string() },
    })
}

fn expect_header<R: Read>(r: &mut csv::Reader<R>, expected: &[&str]) -> Result<()> {
    let header = r.headers()?;
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::InvalidParameter(format!("expected header {}, got {}", expected.join(","), header.iter().collect::<Vec<_>>().join(","))));
    }
    Ok(())
}

/// `event_id,score`. A later row for the same event replaces an earlier one.
pub fn read_labels<R: Read>(input: R) -> Result<BTreeMap<String, u8>> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(&mut r, &["event_id", "score"])?;
    let mut labels = BTreeMap::new();
    for rec in r.records() {
        let rec = rec?;
        labels.insert(rec[0].to_string(), parse_score(&rec[1])?);
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(out: W, labels: &BTreeMap<String, u8>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["event_id", "score"])?;
    for (id, s) in labels {
        w.write_record([id.as_str(), &s.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<BTreeMap<String, u8>> {
    let path = path.as_ref();
    with_path(path, read_labels(std::fs::File::open(path)?))
}

/// Pairs every label with its feature row. Labels whose event has no row
/// are reported together.
pub fn join_labels(features: &[FeatureVector], labels: &BTreeMap<String, u8>) -> Result<Vec<(FeatureVector, u8)>> {
    let known: BTreeSet<&str> = features.iter().map(|f| f.event_id.as_str()).collect();
    let unknown: Vec<String> = labels.keys().filter(|id| !known.contains(id.as_str())).cloned().collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownEventIds(unknown));
    }
    Ok(features
        .iter()
        .filter_map(|f| labels.get(&f.event_id).map(|&s| (f.clone(), s)))
        .collect())
}

fn training_header() -> Vec<&'static str> {
    std::iter::once("event_id").chain(FEATURE_NAMES).chain(std::iter::once("score")).collect()
}

/// `event_id,F1..F18,score`, raw (unstandardized) feature values.
pub fn write_training_table<W: Write>(out: W, rows: &[(FeatureVector, u8)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(training_header())?;
    for (fv, s) in rows {
        let mut rec = vec![fv.event_id.clone()];
        rec.extend(fv.values.iter().map(|v| v.to_string()));
        rec.push(s.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_training_table<R: Read>(input: R) -> Result<Vec<(FeatureVector, u8)>> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(&mut r, &training_header())?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values = parse_floats(rec.iter().skip(1).take(N_FEATURES))?;
        let fv = FeatureVector::from_slice(&rec[0], &values)?;
        rows.push((fv, parse_score(&rec[N_FEATURES + 1])?));
    }
    Ok(rows)
}

pub fn load_training_table(path: impl AsRef<Path>) -> Result<Vec<(FeatureVector, u8)>> {
    let path = path.as_ref();
    with_path(path, read_training_table(std::fs::File::open(path)?))
}

pub fn save_training_table(path: impl AsRef<Path>, rows: &[(FeatureVector, u8)]) -> Result<()> {
    let mut buf = Vec::new();
    write_training_table(&mut buf, rows)?;
    std::fs::write(path, buf)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoredRow {
    pub event_id: String,
    pub score: u8,
    pub expected_score: f64,
    pub accept: bool,
    pub probs: [f64; 5],
}

impl ScoredRow {
    pub fn new(event_id: impl Into<String>, p: &Prediction, tau: u8) -> Self {
        Self { event_id: event_id.into(), score: p.score, expected_score: p.expected_score, accept: p.score >= tau, probs: p.dist.probs }
    }
}

const SCORED_HEADER: [&str; 9] = ["event_id", "score", "expected_score", "accept", "p0", "p1", "p2", "p3", "p4"];

pub fn write_scored<W: Write>(out: W, rows: &[ScoredRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SCORED_HEADER)?;
    for r in rows {
        let mut rec = vec![r.event_id.clone(), r.score.to_string(), r.expected_score.to_string(), u8::from(r.accept).to_string()];
        rec.extend(r.probs.iter().map(|p| p.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scored<R: Read>(input: R) -> Result<Vec<ScoredRow>> {
    let mut r = csv::Reader::from_reader(input);
    expect_header(&mut r, &SCORED_HEADER)?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let nums = parse_floats(rec.iter().skip(2))?;
        let accept = match &rec[3] {
            "0" => false,
            "1" => true,
            other => return Err(Error::InvalidParameter(format!("bad accept flag {other:?}"))),
        };
        rows.push(ScoredRow {
            event_id: rec[0].to_string(),
            score: parse_score(&rec[1])?,
            expected_score: nums[0],
            accept,
            probs: [nums[2], nums[3], nums[4], nums[5], nums[6]],
        });
    }
    Ok(rows)
}

pub fn load_scored(path: impl AsRef<Path>) -> Result<Vec<ScoredRow>> {
    let path = path.as_ref();
    with_path(path, read_scored(std::fs::File::open(path)?))
}

pub fn save_scored(path: impl AsRef<Path>, rows: &[ScoredRow]) -> Result<()> {
    let mut buf = Vec::new();
    write_scored(&mut buf, rows)?;
    std::fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(id: &str, x: f64) -> FeatureVector {
        FeatureVector::new(id, [x; N_FEATURES])
    }

    #[test]
    fn labels_last_row_wins_and_range_checked() {
        let l = read_labels("event_id,score\na,3\nb,1\na,4\n".as_bytes()).unwrap();
        assert_eq!(l["a"], 4);
        assert_eq!(l.len(), 2);
        assert!(read_labels("event_id,score\na,5\n".as_bytes()).is_err());
        assert!(read_labels("event_id,score\na,-1\n".as_bytes()).is_err());
        assert!(read_labels("id,score\na,1\n".as_bytes()).is_err());
    }

    #[test]
    fn join_lists_unknown_ids() {
        let feats = vec![fv("a", 1.0), fv("b", 2.0), fv("c", 3.0)];
        let labels: BTreeMap<String, u8> = [("a".to_string(), 1), ("c".to_string(), 4)].into();
        let rows = join_labels(&feats, &labels).unwrap();
        assert_eq!(rows.iter().map(|r| r.0.event_id.as_str()).collect::<Vec<_>>(), ["a", "c"]);
        let labels: BTreeMap<String, u8> = [("x".to_string(), 1), ("a".to_string(), 0), ("y".to_string(), 2)].into();
        match join_labels(&feats, &labels) {
            Err(Error::UnknownEventIds(ids)) => assert_eq!(ids, ["x", "y"]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn training_table_layout_and_round_trip() {
        let rows = vec![(fv("a", 0.1), 3), (fv("b", -2.5), 0)];
        let mut buf = Vec::new();
        write_training_table(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        assert_eq!(header.len(), 20);
        assert_eq!((header[0], header[1], header[18], header[19]), ("event_id", "F1", "F18", "score"));
        assert_eq!(read_training_table(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn scored_round_trip() {
        let rows = vec![ScoredRow { event_id: "e".into(), score: 2, expected_score: 2.0000000000000004, accept: false, probs: [0.1, 0.2, 0.3, 0.2, 0.2] }];
        let mut buf = Vec::new();
        write_scored(&mut buf, &rows).unwrap();
        assert_eq!(read_scored(&buf[..]).unwrap(), rows);
    }
}
