//! CSV records: `t,J,dispersion` followed, when states were kept, by one
//! column per matrix entry named `g<agent>_<row><col>` (1-based).

use std::io::Write;

use crate::cost::Configuration;
use crate::error::{Error, Result};
use crate::lie::{GroupElement, GroupTag};
use crate::matrix::SquareMatrix;

use super::fixture::format_real;
use super::runner::SimulationRecord;

const BASE_COLUMNS: [&str; 3] = ["t", "J", "dispersion"];

fn columns(tag: GroupTag, agents: usize) -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    let d = tag.matrix_dim();
    for j in 1..=agents {
        for r in 1..=d {
            for c in 1..=d {
                cols.push(format!("g{j}_{r}{c}"));
            }
        }
    }
    cols
}

pub fn header(tag: GroupTag, agents: Option<usize>) -> String {
    columns(tag, agents.unwrap_or(0)).join(",")
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        kind => Error::parse(line, format!("{kind:?}")),
    }
}

pub fn write_csv<W: Write>(record: &SimulationRecord, out: W) -> Result<()> {
    let agents = record
        .states
        .as_ref()
        .and_then(|s| s.first())
        .map_or(0, Configuration::agents);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns(record.tag, agents))
        .map_err(csv_error)?;
    for k in 0..record.len() {
        let mut row = vec![
            format_real(record.times[k]),
            format_real(record.costs[k]),
            format_real(record.dispersions[k]),
        ];
        if let Some(states) = &record.states {
            for g in states[k].states() {
                row.extend(g.matrix().to_row_major().into_iter().map(format_real));
            }
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(record: &SimulationRecord) -> String {
    let mut buf = Vec::new();
    write_csv(record, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

/// Reads a record written by [`write_csv`]. With no state columns the group
/// cannot be inferred and defaults to SO(3).
pub fn read_csv(text: &str) -> Result<SimulationRecord> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut rows = reader.records();
    let head = match rows.next() {
        Some(row) => row.map_err(csv_error)?,
        None => return Err(Error::parse(1, "missing header")),
    };
    let cols: Vec<&str> = head.iter().collect();
    if cols.len() < 3 || cols[..3] != BASE_COLUMNS {
        return Err(Error::parse(1, "header must start with t,J,dispersion"));
    }
    let extra = cols.len() - 3;
    let (tag, agents) = if extra == 0 {
        (GroupTag::So3, 0)
    } else {
        [GroupTag::Se3, GroupTag::So3]
            .into_iter()
            .map(|tag| (tag, extra / (tag.matrix_dim() * tag.matrix_dim())))
            .find(|&(tag, m)| m > 0 && columns(tag, m) == cols)
            .ok_or_else(|| Error::parse(1, "state columns match neither so3 nor se3 naming"))?
    };

    let mut record = SimulationRecord {
        tag,
        times: Vec::new(),
        costs: Vec::new(),
        dispersions: Vec::new(),
        states: (agents > 0).then(Vec::new),
        max_drift: 0.0,
    };
    let d = tag.matrix_dim();
    for row in rows {
        let row = row.map_err(csv_error)?;
        let line_no = row.position().map_or(0, |p| p.line() as usize);
        let vals = row
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(line_no, format!("`{s}` is not a number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if vals.len() != cols.len() {
            return Err(Error::parse(
                line_no,
                format!("expected {} fields, got {}", cols.len(), vals.len()),
            ));
        }
        record.times.push(vals[0]);
        record.costs.push(vals[1]);
        record.dispersions.push(vals[2]);
        if let Some(states) = record.states.as_mut() {
            let elems = vals[3..]
                .chunks(d * d)
                .map(|chunk| {
                    let m = SquareMatrix::from_row_major(d, chunk)?;
                    GroupElement::new(tag, m)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::parse(line_no, e))?;
            let cfg = Configuration::new(elems).map_err(|e| Error::parse(line_no, e))?;
            record.max_drift = record.max_drift.max(cfg.max_orthogonality_error());
            states.push(cfg);
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::config::load_config;
    use crate::experiment::runner::run;

    fn record(extra: &str) -> SimulationRecord {
        let cfg = load_config(&format!(
            "group = se3\nagents = 2\nseed = 3\nt_final = 0.2\ndt = 1e-4\n{extra}"
        ))
        .unwrap();
        run(&cfg).unwrap()
    }

    #[test]
    fn header_only_for_empty_record() {
        let rec = SimulationRecord {
            tag: GroupTag::So3,
            times: vec![],
            costs: vec![],
            dispersions: vec![],
            states: None,
            max_drift: 0.0,
        };
        assert_eq!(to_csv_string(&rec), "t,J,dispersion\n");
    }

    #[test]
    fn one_line_per_sample() {
        let rec = record("record_every = 1000\nrecord_states = false\n");
        assert_eq!(rec.len(), 3);
        let text = to_csv_string(&rec);
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn header_names_entries() {
        let h = header(GroupTag::Se3, Some(2));
        assert!(h.starts_with("t,J,dispersion,g1_11,g1_12"));
        assert!(h.ends_with("g2_43,g2_44"));
        assert_eq!(h.split(',').count(), 3 + 32);
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        for extra in ["", "record_states = false\n"] {
            let rec = record(extra);
            let back = read_csv(&to_csv_string(&rec)).unwrap();
            assert_eq!(back.times, rec.times);
            assert_eq!(back.costs, rec.costs);
            assert_eq!(back.dispersions, rec.dispersions);
            assert_eq!(back.states, rec.states);
            assert_eq!(to_csv_string(&back), to_csv_string(&rec));
        }
    }

    #[test]
    fn malformed_rows_report_lines() {
        let err = read_csv("t,J,dispersion\n0,1,2\n0,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(read_csv("time,J\n").is_err());
    }
}
