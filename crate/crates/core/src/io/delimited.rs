//! CSV import and export of batches and truth labels.
//!
//! Batches use one row per `(input, member)` with header
//! `id,member,class_0,…,class_{K−1}`. Inputs keep the order in which their
//! identifier first appears; members may come in any order but every input
//! needs each member index `0..S` exactly once. CSV batches carry no weights.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{check_row, format_number, IoError};
use crate::estimator::EnsembleBatch;
use crate::eval::Truth;

fn csv_error(e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => IoError::Io(io),
        kind => IoError::Csv {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn bad(line: u64, message: impl Into<String>) -> IoError {
    IoError::Csv {
        line,
        message: message.into(),
    }
}

pub fn read_csv_from<R: Read>(input: R) -> Result<EnsembleBatch, IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(csv_error)?.clone();
    let k = header.len().saturating_sub(2);
    let expected: Vec<String> = ["id".to_string(), "member".to_string()]
        .into_iter()
        .chain((0..k).map(|c| format!("class_{c}")))
        .collect();
    if k == 0 || header.iter().ne(expected.iter().map(String::as_str)) {
        return Err(bad(1, format!("header must be {}", expected.join(","))));
    }

    let mut order: Vec<String> = Vec::new();
    let mut rows: HashMap<String, Vec<(usize, u64, Vec<f64>)>> = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record[0].to_string();
        let member: usize = record[1]
            .parse()
            .map_err(|_| bad(line, format!("bad member index {:?}", &record[1])))?;
        let values = record
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|_| bad(line, format!("bad number {v:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.entry(id.clone())
            .or_insert_with(|| {
                order.push(id);
                Vec::new()
            })
            .push((member, line, values));
    }
    if order.is_empty() {
        return Err(bad(1, "no data rows"));
    }

    let s = rows[&order[0]].len();
    let mut probs = Vec::with_capacity(order.len() * s * k);
    for (input, id) in order.iter().enumerate() {
        let mut members = rows.remove(id).unwrap();
        members.sort_by_key(|m| m.0);
        if members.len() != s || members.iter().enumerate().any(|(i, m)| m.0 != i) {
            return Err(bad(
                members[0].1,
                format!("input {id:?} must list members 0..{s} exactly once"),
            ));
        }
        for (member, (_, _, mut values)) in members.into_iter().enumerate() {
            check_row(&mut values, input, member)?;
            probs.extend(values);
        }
    }
    Ok(EnsembleBatch::new(order.len(), s, k, probs, None, Some(order))?)
}

pub fn read_csv(path: &Path) -> Result<EnsembleBatch, IoError> {
    read_csv_from(std::fs::File::open(path).map_err(IoError::file(path))?)
}

/// Writes every value with 17 significant digits, so reading back is exact.
pub fn write_csv_to<W: Write>(batch: &EnsembleBatch, out: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "member".to_string()];
    header.extend((0..batch.classes()).map(|c| format!("class_{c}")));
    w.write_record(&header).map_err(csv_error)?;
    for (i, id) in batch.ids().iter().enumerate() {
        for s in 0..batch.members() {
            let mut rec = vec![id.clone(), s.to_string()];
            rec.extend(batch.row(i, s).iter().map(|&p| format_number(p)));
            w.write_record(&rec).map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(batch: &EnsembleBatch, path: &Path) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(IoError::file(path))?;
    write_csv_to(batch, std::io::BufWriter::new(file))
}

/// Reads `id,label` rows.
pub fn read_truth_from<R: Read>(input: R) -> Result<Truth, IoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = reader.headers().map_err(csv_error)?;
    if header.iter().ne(["id", "label"]) {
        return Err(bad(1, "header must be id,label"));
    }
    let mut truth = Truth::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let label = record[1]
            .parse()
            .map_err(|_| bad(line, format!("bad label {:?}", &record[1])))?;
        if truth.insert(record[0].to_string(), label).is_some() {
            return Err(bad(line, format!("duplicate id {:?}", &record[0])));
        }
    }
    Ok(truth)
}

pub fn read_truth(path: &Path) -> Result<Truth, IoError> {
    read_truth_from(std::fs::File::open(path).map_err(IoError::file(path))?)
}
