//! CSV readers and writers for score vectors and classifications.
//!
//! Score files are `node,score[,class]` and classification files are
//! `node,label,class_index`, always keyed by external node label. Floats
//! are written in shortest round-trip form, so reading a file back yields
//! bit-identical scores.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::classify::{ClassId, Classification};
use crate::error::{Error, Result};
use crate::graph::Graph;

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::parse(line, format!("{kind:?}")),
    }
}

fn check_len(what: &str, len: usize, n: usize) -> Result<()> {
    if len != n {
        return Err(Error::Mismatch(format!("{len} {what} for {n} nodes")));
    }
    Ok(())
}

/// Writes `node,score[,class]`, one row per node in dense id order.
pub fn write_scores_csv<W: Write>(
    out: W,
    g: &Graph,
    scores: &[f64],
    classes: Option<&[ClassId]>,
) -> Result<()> {
    check_len("scores", scores.len(), g.node_count())?;
    if let Some(c) = classes {
        check_len("class labels", c.len(), g.node_count())?;
    }
    let mut w = csv::Writer::from_writer(out);
    let header: &[&str] = if classes.is_some() {
        &["node", "score", "class"]
    } else {
        &["node", "score"]
    };
    w.write_record(header).map_err(csv_error)?;
    for (i, s) in scores.iter().enumerate() {
        let score = s.to_string();
        match classes {
            Some(c) => w.write_record([g.label(i), &score, &c[i].to_string()]),
            None => w.write_record([g.label(i), &score]),
        }
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub node: String,
    pub score: f64,
    pub class: Option<ClassId>,
}

/// Reads a score CSV with a header row; the `class` column is optional.
pub fn read_scores_csv<R: Read>(input: R) -> Result<Vec<ScoreRow>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_error)?.clone();
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let node_col = column("node").ok_or_else(|| Error::parse(1, "missing `node` column"))?;
    let score_col = column("score").ok_or_else(|| Error::parse(1, "missing `score` column"))?;
    let class_col = column("class");
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |c: usize| {
            record
                .get(c)
                .map(str::trim)
                .ok_or_else(|| Error::parse(line, "missing column"))
        };
        let raw = field(score_col)?;
        let score: f64 = raw
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid score {raw:?}")))?;
        let class = class_col
            .map(|c| field(c)?.parse::<ClassId>())
            .transpose()?;
        rows.push(ScoreRow {
            node: field(node_col)?.to_owned(),
            score,
            class,
        });
    }
    if rows.is_empty() {
        return Err(Error::validation("score file has no rows"));
    }
    Ok(rows)
}

/// Writes `node,label,class_index`: the class kind (`R`, `T`, `D`) and,
/// for recurrent nodes, the 1-based class number (0 otherwise).
pub fn write_classification_csv<W: Write>(out: W, g: &Graph, c: &Classification) -> Result<()> {
    check_len("class labels", c.node_count(), g.node_count())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["node", "label", "class_index"])
        .map_err(csv_error)?;
    for (i, id) in c.labels().iter().enumerate() {
        let index = match id {
            ClassId::Recurrent(k) => k + 1,
            _ => 0,
        };
        w.write_record([g.label(i), id.kind(), &index.to_string()])
            .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a classification CSV into `(node, class)` pairs in file order.
pub fn read_classification_csv<R: Read>(input: R) -> Result<Vec<(String, ClassId)>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() < 3 {
            return Err(Error::parse(line, "expected `node,label,class_index`"));
        }
        let index: usize = record[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(line, format!("invalid class index {:?}", &record[2])))?;
        let id = match (record[1].trim(), index) {
            ("R", k) if k >= 1 => ClassId::Recurrent(k - 1),
            ("T", _) => ClassId::Transient,
            ("D", _) => ClassId::Dangling,
            (label, _) => return Err(Error::parse(line, format!("invalid class {label}{index}"))),
        };
        out.push((record[0].trim().to_owned(), id));
    }
    Ok(out)
}

/// Joins two score files on node label. Returns the labels in the order
/// of `a` with the matching scores of both.
pub fn align_scores(a: &[ScoreRow], b: &[ScoreRow]) -> Result<(Vec<String>, Vec<f64>, Vec<f64>)> {
    let index = label_index(b.iter().map(|r| r.node.as_str()))?;
    label_index(a.iter().map(|r| r.node.as_str()))?;
    if a.len() != b.len() {
        return Err(Error::Mismatch(format!(
            "score files have {} and {} rows",
            a.len(),
            b.len()
        )));
    }
    let mut vb = Vec::with_capacity(a.len());
    for row in a {
        let j = index.get(row.node.as_str()).ok_or_else(|| {
            Error::Mismatch(format!(
                "node {:?} missing from second score file",
                row.node
            ))
        })?;
        vb.push(b[*j].score);
    }
    Ok((
        a.iter().map(|r| r.node.clone()).collect(),
        a.iter().map(|r| r.score).collect(),
        vb,
    ))
}

/// Orders `classes` to match `labels`.
pub fn align_classes(labels: &[String], classes: &[(String, ClassId)]) -> Result<Vec<ClassId>> {
    let index = label_index(classes.iter().map(|(n, _)| n.as_str()))?;
    labels
        .iter()
        .map(|l| {
            index
                .get(l.as_str())
                .map(|&j| classes[j].1)
                .ok_or_else(|| Error::Mismatch(format!("node {l:?} missing from classification")))
        })
        .collect()
}

fn label_index<'a>(labels: impl Iterator<Item = &'a str>) -> Result<HashMap<&'a str, usize>> {
    let mut index = HashMap::new();
    for (i, l) in labels.enumerate() {
        if index.insert(l, i).is_some() {
            return Err(Error::validation(format!("duplicate node {l:?}")));
        }
    }
    Ok(index)
}
