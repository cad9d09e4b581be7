//! Input files: estimates, raw samples and bootstrap resamples.

use std::collections::HashMap;
use std::io::{Read, Write};

use rpv_core::inference::{PolicyEstimate, ResampleSet, Sample};
use rpv_core::PolicyPoint;

use crate::error::{CliError, Result};

/// One row of an estimates file. Standard errors are optional so that
/// bare point estimates can be read for `measure` and `aggregate`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRow {
    pub policy_id: String,
    pub point: PolicyPoint,
    pub se_c: Option<f64>,
    pub se_p: Option<f64>,
    pub rho: Option<f64>,
    pub n: Option<u64>,
}

impl EstimateRow {
    /// The row as an inference input. A missing `rho` becomes 0.
    pub fn to_estimate(&self) -> Result<PolicyEstimate> {
        let (Some(se_c), Some(se_p)) = (self.se_c, self.se_p) else {
            return Err(CliError::input(format!(
                "policy `{}` has no standard errors; se_c and se_p are required here",
                self.policy_id
            )));
        };
        Ok(PolicyEstimate::new(
            self.policy_id.clone(),
            self.point,
            se_c,
            se_p,
            self.rho.unwrap_or(0.0),
            self.n,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatesFile {
    pub rows: Vec<EstimateRow>,
    pub warnings: Vec<String>,
}

impl EstimatesFile {
    pub fn estimates(&self) -> Result<Vec<PolicyEstimate>> {
        self.rows.iter().map(EstimateRow::to_estimate).collect()
    }

    pub fn points(&self) -> Vec<(String, PolicyPoint)> {
        self.rows
            .iter()
            .map(|r| (r.policy_id.clone(), r.point))
            .collect()
    }
}

/// Column lookup for a header with a fixed set of allowed names.
struct Columns {
    index: HashMap<String, usize>,
}

impl Columns {
    fn new(headers: &csv::StringRecord, required: &[&str], optional: &[&str]) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, h) in headers.iter().enumerate() {
            let h = h.trim();
            if !required.contains(&h) && !optional.contains(&h) {
                return Err(CliError::input(format!("line 1: unknown column `{h}`")));
            }
            if index.insert(h.to_string(), i).is_some() {
                return Err(CliError::input(format!("line 1: duplicate column `{h}`")));
            }
        }
        for r in required {
            if !index.contains_key(*r) {
                return Err(CliError::input(format!(
                    "line 1: missing required column `{r}`"
                )));
            }
        }
        Ok(Self { index })
    }

    fn has(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    fn get<'r>(&self, rec: &'r csv::StringRecord, name: &str) -> Option<&'r str> {
        self.index
            .get(name)
            .and_then(|i| rec.get(*i))
            .map(str::trim)
    }
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

/// Strict decimal parse: plain digits, optional sign, point and exponent.
/// Rejects locale separators, `inf` and `nan`.
fn parse_f64(s: &str, column: &str, line: u64) -> Result<f64> {
    let ok = !s.is_empty()
        && s.chars()
            .all(|ch| ch.is_ascii_digit() || matches!(ch, '.' | '-' | '+' | 'e' | 'E'));
    match s.parse::<f64>() {
        Ok(v) if ok && v.is_finite() => Ok(v),
        _ => Err(CliError::input(format!(
            "line {line}: column `{column}`: invalid number `{s}`"
        ))),
    }
}

fn parse_opt_f64(s: Option<&str>, column: &str, line: u64) -> Result<Option<f64>> {
    match s {
        None | Some("") => Ok(None),
        Some(s) => parse_f64(s, column, line).map(Some),
    }
}

fn parse_u64(s: &str, column: &str, line: u64) -> Result<u64> {
    if s.is_empty() || !s.chars().all(|ch| ch.is_ascii_digit()) {
        return Err(CliError::input(format!(
            "line {line}: column `{column}`: invalid integer `{s}`"
        )));
    }
    s.parse::<u64>().map_err(|_| {
        CliError::input(format!(
            "line {line}: column `{column}`: invalid integer `{s}`"
        ))
    })
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(input)
}

fn records<R: Read>(
    rdr: &mut csv::Reader<R>,
) -> impl Iterator<Item = Result<csv::StringRecord>> + '_ {
    rdr.records()
        .map(|r| r.map_err(|e| CliError::input(format!("malformed CSV: {e}"))))
}

fn headers<R: Read>(rdr: &mut csv::Reader<R>) -> Result<csv::StringRecord> {
    let h = rdr
        .headers()
        .map_err(|e| CliError::input(format!("line 1: unreadable header: {e}")))?
        .clone();
    if h.is_empty() {
        return Err(CliError::input("line 1: a header row is required"));
    }
    Ok(h)
}

fn policy_id(rec: &csv::StringRecord, cols: &Columns, line: u64) -> Result<String> {
    match cols.get(rec, "policy_id") {
        Some(id) if !id.is_empty() => Ok(id.to_string()),
        _ => Err(CliError::input(format!("line {line}: empty policy_id"))),
    }
}

fn point(c: f64, p: f64, line: u64) -> Result<PolicyPoint> {
    PolicyPoint::new(c, p).map_err(|e| CliError::input(format!("line {line}: {e}")))
}

/// Reads `policy_id,c_hat,p_hat[,se_c,se_p,rho,n]`.
pub fn read_estimates<R: Read>(input: R) -> Result<EstimatesFile> {
    let mut rdr = reader(input);
    let cols = Columns::new(
        &headers(&mut rdr)?,
        &["policy_id", "c_hat", "p_hat"],
        &["se_c", "se_p", "rho", "n"],
    )?;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = HashMap::new();
    for rec in records(&mut rdr) {
        let rec = rec?;
        let line = line_of(&rec);
        let id = policy_id(&rec, &cols, line)?;
        if let Some(first) = seen.insert(id.clone(), line) {
            return Err(CliError::input(format!(
                "line {line}: duplicate policy_id `{id}` (first seen on line {first})"
            )));
        }
        let num = |name: &str| parse_f64(cols.get(&rec, name).unwrap_or(""), name, line);
        let c = num("c_hat")?;
        let p = num("p_hat")?;
        let se_c = parse_opt_f64(cols.get(&rec, "se_c"), "se_c", line)?;
        let se_p = parse_opt_f64(cols.get(&rec, "se_p"), "se_p", line)?;
        let rho = parse_opt_f64(cols.get(&rec, "rho"), "rho", line)?;
        let n = match cols.get(&rec, "n") {
            None | Some("") => None,
            Some(s) => Some(parse_u64(s, "n", line)?),
        };
        if se_c.is_some() != se_p.is_some() {
            return Err(CliError::input(format!(
                "line {line}: se_c and se_p must be given together"
            )));
        }
        if se_c.is_some() && rho.is_none() {
            warnings.push(format!("line {line}: policy `{id}` has no rho; using 0"));
        }
        rows.push(EstimateRow {
            policy_id: id,
            point: point(c, p, line)?,
            se_c,
            se_p,
            rho,
            n,
        });
    }
    if rows.is_empty() {
        return Err(CliError::input("estimates file has no rows"));
    }
    if !cols.has("rho") && rows.iter().all(|r| r.se_c.is_none()) {
        warnings.clear();
    }
    Ok(EstimatesFile { rows, warnings })
}

/// Decimal rendering with 17 significant digits, which reads back to the
/// identical `f64`.
pub fn fmt17(v: f64) -> String {
    if v == 0.0 {
        return if v.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (a, b) = digits.split_at(point as usize);
        format!("{a}.{b}")
    };
    format!("{sign}{body}")
}

/// Writes an estimates file that [`read_estimates`] reads back bit for bit.
pub fn write_estimates<W: Write>(rows: &[EstimateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    w.write_record(["policy_id", "c_hat", "p_hat", "se_c", "se_p", "rho", "n"])
        .map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.policy_id.clone(),
            fmt17(r.point.c()),
            fmt17(r.point.p()),
            opt(r.se_c),
            opt(r.se_p),
            opt(r.rho),
            r.n.map(|n| n.to_string()).unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> CliError {
    CliError::input(format!("CSV output failed: {e}"))
}

/// Groups rows by policy in order of first appearance.
fn group<T>(items: Vec<(String, T)>) -> Vec<(String, Vec<T>)> {
    let mut order: Vec<(String, Vec<T>)> = Vec::new();
    let mut at: HashMap<String, usize> = HashMap::new();
    for (id, item) in items {
        let i = *at.entry(id.clone()).or_insert_with(|| {
            order.push((id, Vec::new()));
            order.len() - 1
        });
        order[i].1.push(item);
    }
    order
}

/// Reads raw draws `policy_id,c,p`.
pub fn read_samples<R: Read>(input: R) -> Result<Vec<Sample>> {
    let mut rdr = reader(input);
    let cols = Columns::new(&headers(&mut rdr)?, &["policy_id", "c", "p"], &[])?;
    let mut items = Vec::new();
    for rec in records(&mut rdr) {
        let rec = rec?;
        let line = line_of(&rec);
        let id = policy_id(&rec, &cols, line)?;
        let c = parse_f64(cols.get(&rec, "c").unwrap_or(""), "c", line)?;
        let p = parse_f64(cols.get(&rec, "p").unwrap_or(""), "p", line)?;
        items.push((id, point(c, p, line)?));
    }
    if items.is_empty() {
        return Err(CliError::input("samples file has no rows"));
    }
    group(items)
        .into_iter()
        .map(|(id, rows)| Sample::new(id, rows).map_err(CliError::from))
        .collect()
}

/// Reads bootstrap draws `policy_id,draw,c_star,p_star`. Draw indices of
/// each policy must be exactly `1..=m`, in any order.
pub fn read_resamples<R: Read>(input: R) -> Result<Vec<ResampleSet>> {
    let mut rdr = reader(input);
    let cols = Columns::new(
        &headers(&mut rdr)?,
        &["policy_id", "draw", "c_star", "p_star"],
        &[],
    )?;
    let mut items = Vec::new();
    for rec in records(&mut rdr) {
        let rec = rec?;
        let line = line_of(&rec);
        let id = policy_id(&rec, &cols, line)?;
        let draw = parse_u64(cols.get(&rec, "draw").unwrap_or(""), "draw", line)?;
        let c = parse_f64(cols.get(&rec, "c_star").unwrap_or(""), "c_star", line)?;
        let p = parse_f64(cols.get(&rec, "p_star").unwrap_or(""), "p_star", line)?;
        items.push((id, (draw, line, point(c, p, line)?)));
    }
    if items.is_empty() {
        return Err(CliError::input("resamples file has no rows"));
    }
    let mut sets = Vec::new();
    for (id, mut draws) in group(items) {
        draws.sort_by_key(|d| d.0);
        for (k, (draw, line, _)) in draws.iter().enumerate() {
            if *draw != k as u64 + 1 {
                return Err(CliError::input(format!(
                    "line {line}: policy `{id}`: draw indices must run contiguously from 1, found {draw} at position {}",
                    k + 1
                )));
            }
        }
        sets.push(ResampleSet::new(
            id,
            draws.into_iter().map(|d| d.2).collect(),
        ));
    }
    Ok(sets)
}
