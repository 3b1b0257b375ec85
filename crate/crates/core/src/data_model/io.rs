//! CSV and ARFF ingestion, CSV output.
//!
//! The ARFF reader covers the dense subset: `@relation`, `@attribute` with
//! `numeric`/`real`/`integer` or nominal `{a,b,…}` types, and a
//! comma-separated `@data` section. Sparse rows (`{…}`) are rejected.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::data_model::table::{Column, Table};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Arff,
}

impl Format {
    /// Guess from a file extension; anything but `.arff` is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("arff") => Format::Arff,
            _ => Format::Csv,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "arff" => Ok(Format::Arff),
            other => Err(Error::InvalidParameter(format!("unknown format `{other}`"))),
        }
    }
}

/// Case-insensitive set of tokens that denote a missing cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MissingTokens(Vec<String>);

impl Default for MissingTokens {
    fn default() -> Self {
        MissingTokens::new(["", "?", "NaN", "na"])
    }
}

impl MissingTokens {
    pub fn new<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        MissingTokens(
            tokens
                .into_iter()
                .map(|t| t.as_ref().trim().to_lowercase())
                .collect(),
        )
    }

    pub fn is_missing(&self, cell: &str) -> bool {
        let cell = cell.trim();
        self.0.iter().any(|t| t.eq_ignore_ascii_case(cell))
    }
}

/// Reads a table. A column named `class` (any case) becomes the label.
pub fn load_table<R: Read>(source: R, format: Format, missing: &MissingTokens) -> Result<Table> {
    let table = match format {
        Format::Csv => read_csv(source, missing)?,
        Format::Arff => read_arff(source, missing)?,
    };
    if table.n_rows() == 0 || table.n_cols() == 0 {
        return Err(Error::EmptyTable);
    }
    let label = table
        .names()
        .iter()
        .find(|n| n.eq_ignore_ascii_case("class"))
        .cloned();
    match label {
        Some(name) => table.with_label(&name),
        None => Ok(table),
    }
}

pub fn load_path(path: &Path, format: Option<Format>, missing: &MissingTokens) -> Result<Table> {
    let file = std::fs::File::open(path)?;
    load_table(
        BufReader::new(file),
        format.unwrap_or_else(|| Format::from_path(path)),
        missing,
    )
}

fn parse_real(s: &str) -> Option<f64> {
    f64::from_str(s.trim()).ok().filter(|x| x.is_finite())
}

fn read_csv<R: Read>(source: R, missing: &MissingTokens) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let header: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::MalformedHeader("empty CSV header".into()));
    }
    let d = header.len();
    let mut raw: Vec<Vec<Option<String>>> = vec![Vec::new(); d];
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != d {
            return Err(Error::RaggedRow {
                line,
                expected: d,
                found: rec.len(),
            });
        }
        for (col, cell) in raw.iter_mut().zip(rec.iter()) {
            col.push(if missing.is_missing(cell) {
                None
            } else {
                Some(cell.trim().to_string())
            });
        }
    }
    let columns = raw
        .into_iter()
        .map(|cells| {
            let numeric: Option<Vec<Option<f64>>> = cells
                .iter()
                .map(|c| match c {
                    None => Some(None),
                    Some(s) => parse_real(s).map(Some),
                })
                .collect();
            match numeric {
                Some(v) => Column::Numeric(v),
                None => Column::Categorical(cells),
            }
        })
        .collect();
    Table::new(header, columns, None)
}

enum AttrType {
    Numeric,
    Nominal(Vec<String>),
}

/// Splits on commas outside single or double quotes, stripping the quotes.
fn split_arff_fields(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        match (quote, c) {
            (Some(q), c) if c == q => quote = None,
            (Some(_), '\\') => {
                if let Some(n) = chars.next() {
                    cur.push(n);
                }
            }
            (Some(_), c) => cur.push(c),
            (None, '\'' | '"') => quote = Some(c),
            (None, ',') => out.push(std::mem::take(&mut cur).trim().to_string()),
            (None, c) => cur.push(c),
        }
    }
    out.push(cur.trim().to_string());
    out
}

/// Splits an `@attribute` line body into (name, type-spec).
fn split_attribute(body: &str, line: usize) -> Result<(String, String)> {
    let body = body.trim();
    let (name, rest) = match body.chars().next() {
        Some(q @ ('\'' | '"')) => {
            let end = body[1..].find(q).ok_or_else(|| {
                Error::MalformedHeader(format!("line {line}: unterminated quote"))
            })?;
            (body[1..1 + end].to_string(), &body[end + 2..])
        }
        Some(_) => {
            let end = body.find(char::is_whitespace).unwrap_or(body.len());
            (body[..end].to_string(), &body[end..])
        }
        None => {
            return Err(Error::MalformedHeader(format!(
                "line {line}: empty @attribute"
            )))
        }
    };
    let ty = rest.trim();
    if name.is_empty() || ty.is_empty() {
        return Err(Error::MalformedHeader(format!(
            "line {line}: @attribute needs a name and a type"
        )));
    }
    Ok((name, ty.to_string()))
}

fn parse_attr_type(spec: &str, line: usize) -> Result<AttrType> {
    if let Some(inner) = spec.strip_prefix('{') {
        let inner = inner.strip_suffix('}').ok_or_else(|| {
            Error::MalformedHeader(format!("line {line}: unterminated nominal type"))
        })?;
        let values = split_arff_fields(inner);
        return Ok(AttrType::Nominal(values));
    }
    match spec.to_ascii_lowercase().as_str() {
        "numeric" | "real" | "integer" => Ok(AttrType::Numeric),
        other => Err(Error::UnknownAttributeType(other.to_string())),
    }
}

fn read_arff<R: Read>(source: R, missing: &MissingTokens) -> Result<Table> {
    let reader = BufReader::new(source);
    let mut attrs: Vec<(String, AttrType)> = Vec::new();
    let mut in_data = false;
    let mut cells: Vec<Vec<Option<String>>> = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = trimmed.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                continue;
            } else if lower.starts_with("@attribute") {
                let (name, ty) = split_attribute(&trimmed["@attribute".len()..], line_no)?;
                attrs.push((name, parse_attr_type(&ty, line_no)?));
            } else if lower.starts_with("@data") {
                if attrs.is_empty() {
                    return Err(Error::MalformedHeader("no @attribute before @data".into()));
                }
                in_data = true;
                cells = vec![Vec::new(); attrs.len()];
            } else {
                return Err(Error::MalformedHeader(format!(
                    "line {line_no}: unexpected `{trimmed}`"
                )));
            }
            continue;
        }
        if trimmed.starts_with('{') {
            return Err(Error::Parse {
                line: line_no,
                msg: "sparse ARFF rows are not supported".into(),
            });
        }
        let fields = split_arff_fields(trimmed);
        if fields.len() != attrs.len() {
            return Err(Error::RaggedRow {
                line: line_no,
                expected: attrs.len(),
                found: fields.len(),
            });
        }
        for (col, f) in cells.iter_mut().zip(fields) {
            col.push(if missing.is_missing(&f) {
                None
            } else {
                Some(f)
            });
        }
    }
    if !in_data {
        return Err(Error::MalformedHeader("missing @data section".into()));
    }

    let mut names = Vec::with_capacity(attrs.len());
    let mut columns = Vec::with_capacity(attrs.len());
    for ((name, ty), col) in attrs.into_iter().zip(cells) {
        let column = match ty {
            AttrType::Numeric => Column::Numeric(
                col.iter()
                    .enumerate()
                    .map(|(r, c)| match c {
                        None => Ok(None),
                        Some(s) => parse_real(s).map(Some).ok_or_else(|| Error::Parse {
                            line: r + 1,
                            msg: format!("`{s}` is not a real number in attribute `{name}`"),
                        }),
                    })
                    .collect::<Result<_>>()?,
            ),
            AttrType::Nominal(values) => {
                if let Some(bad) = col.iter().flatten().find(|s| !values.contains(s)) {
                    return Err(Error::Parse {
                        line: 0,
                        msg: format!("`{bad}` is not a declared value of attribute `{name}`"),
                    });
                }
                Column::Categorical(col)
            }
        };
        names.push(name);
        columns.push(column);
    }
    Table::new(names, columns, None)
}

/// Writes the table as CSV with a header. Missing cells become empty fields.
pub fn write_csv<W: Write>(table: &Table, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(table.names())?;
    let mut record: Vec<String> = Vec::with_capacity(table.n_cols());
    for r in 0..table.n_rows() {
        record.clear();
        for col in table.columns() {
            record.push(match col {
                Column::Numeric(v) => v[r].map(|x| x.to_string()).unwrap_or_default(),
                Column::Categorical(v) => v[r].clone().unwrap_or_default(),
            });
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}
