//! CSV formats: a counts file with header `period,count` and a claims file
//! with header `period,claim_id,amount`. Errors carry the 1-based line.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::premium::PeriodRecord;

pub const COUNTS_HEADER: [&str; 2] = ["period", "count"];
pub const CLAIMS_HEADER: [&str; 3] = ["period", "claim_id", "amount"];

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimRow {
    pub period: i64,
    pub claim_id: String,
    pub amount: f64,
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file))
}

/// Reads every record, checking the header row and the field count.
fn records(path: &Path, header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut rdr = reader(path)?;
    let mut out = Vec::new();
    let mut seen_header = false;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if !seen_header {
            if rec.iter().collect::<Vec<_>>() != header {
                return Err(parse_err(path, line, format!("expected header `{}`", header.join(","))));
            }
            seen_header = true;
            continue;
        }
        if rec.len() != header.len() {
            return Err(parse_err(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        out.push((line, rec));
    }
    if !seen_header {
        return Err(parse_err(path, 1, format!("missing header `{}`", header.join(","))));
    }
    Ok(out)
}

/// Period-indexed claim counts in ascending period order.
pub fn read_counts(path: &Path) -> Result<Vec<(i64, u64)>> {
    let mut rows = BTreeMap::new();
    for (line, rec) in records(path, &COUNTS_HEADER)? {
        let period: i64 = rec[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("period `{}` is not an integer", &rec[0])))?;
        let count: u64 = rec[1]
            .parse()
            .map_err(|_| parse_err(path, line, format!("count `{}` is not a nonnegative integer", &rec[1])))?;
        if rows.insert(period, count).is_some() {
            return Err(parse_err(path, line, format!("duplicate period {period}")));
        }
    }
    Ok(rows.into_iter().collect())
}

pub fn read_claims(path: &Path) -> Result<Vec<ClaimRow>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, rec) in records(path, &CLAIMS_HEADER)? {
        let period: i64 = rec[0]
            .parse()
            .map_err(|_| parse_err(path, line, format!("period `{}` is not an integer", &rec[0])))?;
        let claim_id = rec[1].to_string();
        let amount: f64 = rec[2]
            .parse()
            .map_err(|_| parse_err(path, line, format!("amount `{}` is not a number", &rec[2])))?;
        if !(amount > 0.0 && amount.is_finite()) {
            return Err(parse_err(path, line, format!("amount must be positive, got {amount}")));
        }
        if !seen.insert((period, claim_id.clone())) {
            return Err(parse_err(path, line, format!("duplicate claim ({period}, {claim_id})")));
        }
        out.push(ClaimRow {
            period,
            claim_id,
            amount,
        });
    }
    Ok(out)
}

/// Joins counts and claims into per-period records. With `claims = None`
/// every record is count-only. Otherwise a period whose number of claim rows
/// differs from its count is an error when `strict`, and is downgraded to
/// count-only with a warning when not.
pub fn build_history(
    counts: &[(i64, u64)],
    claims: Option<&[ClaimRow]>,
    strict: bool,
) -> Result<(Vec<PeriodRecord>, Vec<String>)> {
    let Some(claims) = claims else {
        let recs = counts.iter().map(|&(_, n)| PeriodRecord::count_only(n)).collect();
        return Ok((recs, Vec::new()));
    };
    let mut by_period: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for c in claims {
        by_period.entry(c.period).or_default().push(c.amount);
    }
    let known: HashSet<i64> = counts.iter().map(|&(p, _)| p).collect();
    if let Some(p) = by_period.keys().find(|p| !known.contains(p)) {
        return Err(Error::InvalidInput(format!("claims reference period {p}, absent from the counts")));
    }
    let mut warnings = Vec::new();
    let mut recs = Vec::with_capacity(counts.len());
    for &(period, n) in counts {
        let ys = by_period.remove(&period).unwrap_or_default();
        if ys.len() as u64 == n {
            recs.push(PeriodRecord::new(n, ys));
        } else if strict {
            return Err(Error::InvalidInput(format!(
                "period {period}: {} claim rows for a count of {n}",
                ys.len()
            )));
        } else {
            warnings.push(format!(
                "period {period}: {} claim rows for a count of {n}; severities ignored",
                ys.len()
            ));
            recs.push(PeriodRecord::count_only(n));
        }
    }
    Ok((recs, warnings))
}

/// Writes counts as periods 1..=len.
pub fn write_counts<W: Write>(out: W, counts: &[u64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COUNTS_HEADER).map_err(csv_err)?;
    for (i, n) in counts.iter().enumerate() {
        w.write_record([(i + 1).to_string(), n.to_string()]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the severities of each record, periods numbered from 1 and claim
/// ids from 1 within a period.
pub fn write_claims<W: Write>(out: W, records: &[PeriodRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CLAIMS_HEADER).map_err(csv_err)?;
    for (i, r) in records.iter().enumerate() {
        for (j, y) in r.severities.iter().flatten().enumerate() {
            w.write_record([(i + 1).to_string(), (j + 1).to_string(), y.to_string()])
                .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidInput(format!("csv: {other:?}")),
    }
}
