//! Binary tensor-series files and versioned CSV tables.
//!
//! Binary layout: the 5 bytes `RTFM1`, then little-endian `u64` values
//! `K, p_1, ..., p_K, n`, then `n * p` little-endian `f64` values, time
//! slowest and the first mode fastest within a frame.
//!
//! CSV tables start with an audit line `# rtfm schema=1 key=value ...`;
//! tables announcing another schema version are rejected.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::TensorSeries;

pub const MAGIC: &[u8; 5] = b"RTFM1";
pub const CSV_SCHEMA: u32 = 1;

/// Largest order accepted when reading, a guard against corrupt headers.
const MAX_ORDER: u64 = 64;

pub fn write_series<W: Write>(mut w: W, series: &TensorSeries) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(series.order() as u64).to_le_bytes())?;
    for &p in series.dims() {
        w.write_all(&(p as u64).to_le_bytes())?;
    }
    w.write_all(&(series.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(series.data().len() * 8);
    for v in series.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R, what: &str) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| Error::Format(format!("truncated header reading {what}")))?;
    Ok(u64::from_le_bytes(b))
}

pub fn read_series<R: Read>(mut r: R) -> Result<TensorSeries> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic).map_err(|_| Error::Format("file too short for a header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, not an RTFM1 file".into()));
    }
    let k = read_u64(&mut r, "order")?;
    if k == 0 || k > MAX_ORDER {
        return Err(Error::Format(format!("implausible order {k}")));
    }
    let mut dims = Vec::with_capacity(k as usize);
    for j in 0..k {
        let p = read_u64(&mut r, "dimension")?;
        if p == 0 {
            return Err(Error::Format(format!("dimension {j} is zero")));
        }
        dims.push(usize::try_from(p).map_err(|_| Error::Format("dimension overflows".into()))?);
    }
    let n = usize::try_from(read_u64(&mut r, "length")?).map_err(|_| Error::Format("length overflows".into()))?;
    let count = dims
        .iter()
        .try_fold(n, |acc, &p| acc.checked_mul(p))
        .and_then(|c| c.checked_mul(8).map(|b| (c, b)))
        .ok_or_else(|| Error::Format("payload size overflows".into()))?;
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() != count.1 {
        return Err(Error::Format(format!("payload has {} bytes, header implies {}", payload.len(), count.1)));
    }
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    TensorSeries::new(dims, n, data).map_err(|e| Error::Format(e.to_string()))
}

pub fn save_series(path: &Path, series: &TensorSeries) -> Result<()> {
    let f = fs::File::create(path)?;
    write_series(std::io::BufWriter::new(f), series)
}

/// Reads an RTFM1 file, or a CSV panel when the magic is absent.
pub fn load_series(path: &Path) -> Result<TensorSeries> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        read_series(&bytes[..])
    } else {
        Ok(read_panel_csv(&bytes[..])?.1)
    }
}

/// A CSV table with its audit line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Text after `schema=N` on the audit line.
    pub audit: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(audit: impl Into<String>, header: &[&str]) -> Self {
        Table { audit: audit.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }
}

pub fn write_table<W: Write>(mut w: W, table: &Table) -> Result<()> {
    let audit = table.audit.replace('\n', " ");
    writeln!(w, "# rtfm schema={CSV_SCHEMA} {audit}")?;
    let mut cw = csv::Writer::from_writer(w);
    cw.write_record(&table.header).map_err(csv_err)?;
    for r in &table.rows {
        cw.write_record(r).map_err(csv_err)?;
    }
    cw.flush()?;
    Ok(())
}

pub fn save_table(path: &Path, table: &Table) -> Result<()> {
    let f = fs::File::create(path)?;
    write_table(std::io::BufWriter::new(f), table)
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Format(e.to_string()),
    }
}

/// Splits leading `#` lines off; returns the audit text (if any) and the
/// remaining body. Rejects unknown schema versions.
fn split_audit(text: &str) -> Result<(Option<String>, &str)> {
    let mut audit = None;
    let mut rest = text;
    while rest.starts_with('#') {
        let (line, tail) = rest.split_once('\n').unwrap_or((rest, ""));
        let line = line.trim_end_matches('\r');
        if let Some(body) = line.strip_prefix("# rtfm ") {
            let (tag, more) = body.split_once(' ').unwrap_or((body, ""));
            let version = tag
                .strip_prefix("schema=")
                .ok_or_else(|| Error::Format(format!("audit line without schema: '{line}'")))?;
            if version.parse::<u32>().ok() != Some(CSV_SCHEMA) {
                return Err(Error::Format(format!("unsupported schema version '{version}'")));
            }
            audit.get_or_insert_with(|| more.to_string());
        }
        rest = tail;
    }
    Ok((audit, rest))
}

pub fn read_table<R: Read>(mut r: R) -> Result<Table> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(|e| Error::Format(e.to_string()))?;
    let (audit, body) = split_audit(&text)?;
    let audit = audit.ok_or_else(|| Error::Format("missing '# rtfm schema=' audit line".into()))?;
    let mut rd = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let header = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let rows = rd
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()).map_err(csv_err))
        .collect::<Result<_>>()?;
    Ok(Table { audit, header, rows })
}

pub fn load_table(path: &Path) -> Result<Table> {
    read_table(fs::File::open(path)?)
}

/// Plain `n x p` CSV panel with a header row of variable names. An audit
/// line is optional but, when present, must carry a supported schema.
pub fn read_panel_csv<R: Read>(mut r: R) -> Result<(Vec<String>, TensorSeries)> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(|e| Error::Format(e.to_string()))?;
    let (_, body) = split_audit(&text)?;
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let names: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let p = names.len();
    if p == 0 {
        return Err(Error::Format("panel has no columns".into()));
    }
    let mut data = Vec::new();
    let mut n = 0;
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Format(format!("row {}, column {}: '{field}' is not a number", n + 1, j + 1)))?;
            data.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Format("panel has no rows".into()));
    }
    Ok((names, TensorSeries::new(vec![p], n, data).map_err(|e| Error::Format(e.to_string()))?))
}

pub fn write_panel_csv<W: Write>(w: W, names: &[String], series: &TensorSeries, audit: &str) -> Result<()> {
    if series.order() != 1 || names.len() != series.dims()[0] {
        return Err(Error::ShapeMismatch("panel CSV needs a vector series and one name per variable".into()));
    }
    let mut table = Table::new(audit, &[]);
    table.header = names.to_vec();
    for t in 0..series.len() {
        table.push(series.frame(t).iter().map(|v| v.to_string()).collect());
    }
    write_table(w, &table)
}
