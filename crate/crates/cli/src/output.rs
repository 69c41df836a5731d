use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sepmap::mapbuild::{GlobalMapCoeffsDuffing, GlobalMapCoeffsHbr, MelnikovCoeffsDuffing, MelnikovCoeffsHbr};
use sepmap::sepmap::OrbitRecord;
use sepmap::{Error, Result};
use sha2::{Digest, Sha256};

pub const COEFFICIENT_FORMAT: &str = "sepmap-coefficients";
pub const COEFFICIENT_VERSION: u32 = 1;
/// Forcing phase at which all trigonometric coefficients are referenced.
pub const PHASE_ORIGIN: &str = "global-leg-start";

/// SHA-256 of the canonical JSON form of everything that determines an output.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let text = serde_json::to_string(value)?;
    Ok(hex::encode(Sha256::digest(text.as_bytes())))
}

/// Float with 17 significant digits; round-trips exactly.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

/// CSV table with a leading `# config_hash=...` comment line.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|s| s.as_ref().to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path, hash: &str) -> Result<()> {
        let mut f = create(path)?;
        writeln!(f, "# config_hash={hash}").map_err(|e| io_err(path, e))?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(f);
        w.write_record(&self.header).map_err(|e| io_err(path, e))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| io_err(path, e))?;
        }
        w.flush().map_err(|e| io_err(path, e))?;
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f).map_err(|e| io_err(path, e))?;
    f.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
}

/// Reads one numeric column of a CSV written by [`Table::write`].
pub fn read_column(path: &Path, column: &str) -> Result<Vec<f64>> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(f);
    let header = r.headers().map_err(|e| io_err(path, e))?.clone();
    let k = header
        .iter()
        .position(|h| h == column)
        .ok_or_else(|| Error::Schema(format!("{}: no column {column:?}", path.display())))?;
    let mut out = vec![];
    for rec in r.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let v: f64 = rec[k]
            .parse()
            .map_err(|_| Error::Schema(format!("{}: bad number {:?} in column {column}", path.display(), &rec[k])))?;
        out.push(v);
    }
    Ok(out)
}

pub fn orbit_table(rec: &OrbitRecord) -> Table {
    let mut header = vec!["index".to_string(), "branch".into(), "t_dom".into()];
    header.extend(rec.columns.iter().cloned());
    let mut t = Table::new(&header);
    for row in &rec.rows {
        let mut v = vec![row.index.to_string(), row.branch.to_string(), fmt_f64(row.t_dom)];
        v.extend(row.state.iter().map(|x| fmt_f64(*x)));
        t.push(v);
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoefficientSet {
    DuffingVariational(GlobalMapCoeffsDuffing),
    DuffingMelnikov(MelnikovCoeffsDuffing),
    HbrVariational(GlobalMapCoeffsHbr),
    HbrMelnikov(MelnikovCoeffsHbr),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFile {
    pub format: String,
    pub version: u32,
    pub config_hash: String,
    pub phase_origin: String,
    pub map: CoefficientSet,
}

impl CoefficientFile {
    pub fn new(map: CoefficientSet, config_hash: String) -> Self {
        CoefficientFile {
            format: COEFFICIENT_FORMAT.into(),
            version: COEFFICIENT_VERSION,
            config_hash,
            phase_origin: PHASE_ORIGIN.into(),
            map,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f: CoefficientFile = read_json(path)?;
        if f.format != COEFFICIENT_FORMAT || f.version != COEFFICIENT_VERSION {
            return Err(Error::Schema(format!(
                "{}: expected {COEFFICIENT_FORMAT} version {COEFFICIENT_VERSION}, found {} version {}",
                path.display(),
                f.format,
                f.version
            )));
        }
        if f.phase_origin != PHASE_ORIGIN {
            return Err(Error::Schema(format!(
                "{}: unsupported phase origin {:?}, expected {PHASE_ORIGIN:?}",
                path.display(),
                f.phase_origin
            )));
        }
        Ok(f)
    }
}

/// Summary written next to every tabular artifact.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary<'a, T: Serialize> {
    pub command: &'a str,
    pub config_hash: &'a str,
    /// File names, relative to the output directory.
    pub outputs: Vec<String>,
    pub result: T,
}
