//! Artifact formats: provenance-stamped CSV, binary matrix dumps, JSON.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wqc_core::classical::{CollisionSequence, PistonCollision};
use wqc_core::scales::BilliardParams;
use wqc_core::{Error, Result};

pub const VERSION: &str = concat!("wqc ", env!("CARGO_PKG_VERSION"));

/// Magic bytes of the binary matrix dump.
pub const MATRIX_MAGIC: &[u8; 8] = b"WQCMAT01";

/// Largest element count accepted when decoding a dump.
pub const MATRIX_MAX_ELEMENTS: u64 = 1 << 28;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Origin of an artifact, embedded in every output file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(config_sha256: String, seed: u64) -> Self {
        Self { version: VERSION.into(), config_sha256, seed }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn comment(&self) -> String {
        format!("# {} config_sha256={} seed={}", self.version, self.config_sha256, self.seed)
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(std::io::Error::other(format!("{}: {e}", path.display())))
}

/// 17 significant digits, enough for a bit-exact round trip.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `# provenance`, a header row and fixed-precision rows.
pub fn write_csv<W: Write>(out: W, prov: &Provenance, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = out;
    writeln!(out, "{}", prov.comment())?;
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::Format(format!("row of {} values for {} columns", r.len(), header.len())));
        }
        w.write_record(r.iter().map(|&x| fmt_f64(x))).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, prov: &Provenance, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    write_csv(std::io::BufWriter::new(f), prov, header, rows)
}

/// Numeric CSV table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

/// Reads a CSV with `#` comment lines, a header row and numeric cells.
pub fn read_csv<R: Read>(input: R) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = r.headers().map_err(|e| Error::Format(e.to_string()))?.iter().map(String::from).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::Format("missing header row".into()));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|_| Error::Format(format!("row {}: {s:?} is not a number", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}

pub const COLLISION_HEADER: [&str; 3] = ["t", "y", "theta"];

pub fn collision_rows(c: &CollisionSequence) -> Vec<Vec<f64>> {
    c.records.iter().map(|r| vec![r.t, r.y, r.theta]).collect()
}

/// Piston collisions from a `t,y,theta` table, checked for finiteness,
/// ordering and `|θ| < π/2`.
pub fn collisions_from_table(t: &Table) -> Result<Vec<PistonCollision>> {
    let idx: Vec<usize> = COLLISION_HEADER
        .iter()
        .map(|h| t.column(h).ok_or_else(|| Error::Format(format!("missing column {h}"))))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(t.rows.len());
    for (i, row) in t.rows.iter().enumerate() {
        let (tt, y, theta) = (row[idx[0]], row[idx[1]], row[idx[2]]);
        if !(tt.is_finite() && y.is_finite() && theta.is_finite()) {
            return Err(Error::Format(format!("row {}: non-finite value", i + 1)));
        }
        if theta.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::Format(format!("row {}: theta {theta} outside (-pi/2, pi/2)", i + 1)));
        }
        if let Some(prev) = out.last().map(|p: &PistonCollision| p.t) {
            if !(tt > prev) {
                return Err(Error::Unsorted(i));
            }
        }
        out.push(PistonCollision { t: tt, y, theta });
    }
    Ok(out)
}

/// Rebuilds a validated sequence from a collision CSV.
pub fn read_collisions<R: Read>(input: R, params: BilliardParams, t_total: f64) -> Result<CollisionSequence> {
    let records = collisions_from_table(&read_csv(input)?)?;
    let seq = CollisionSequence { records, t_total, params, seed: None };
    seq.validate()?;
    Ok(seq)
}

/// Dense row-major `f64` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixDump {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

/// JSON sidecar of a binary dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub format: String,
    pub rows: usize,
    pub cols: usize,
    pub layout: String,
    pub payload_sha256: String,
    pub description: String,
    pub provenance: Provenance,
}

/// `WQCMAT01`, rows and cols as little-endian `u64`, then the values.
pub fn encode_matrix(m: &MatrixDump) -> Result<Vec<u8>> {
    if m.rows.checked_mul(m.cols) != Some(m.data.len()) {
        return Err(Error::Format(format!("{}x{} matrix with {} values", m.rows, m.cols, m.data.len())));
    }
    let mut out = Vec::with_capacity(24 + 8 * m.data.len());
    out.extend_from_slice(MATRIX_MAGIC);
    out.extend_from_slice(&(m.rows as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols as u64).to_le_bytes());
    for x in &m.data {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_matrix(bytes: &[u8]) -> Result<MatrixDump> {
    if bytes.len() < 24 || &bytes[..8] != MATRIX_MAGIC {
        return Err(Error::Format("not a WQCMAT01 dump".into()));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[k..k + 8].try_into().expect("8-byte slice"));
    let (rows, cols) = (word(8), word(16));
    let n = rows
        .checked_mul(cols)
        .filter(|&n| n <= MATRIX_MAX_ELEMENTS)
        .ok_or_else(|| Error::Format(format!("{rows}x{cols} matrix exceeds the size limit")))?;
    let payload = &bytes[24..];
    if payload.len() as u64 != 8 * n {
        return Err(Error::Format(format!("payload holds {} bytes, expected {}", payload.len(), 8 * n)));
    }
    let data = payload.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    Ok(MatrixDump { rows: rows as usize, cols: cols as usize, data })
}

pub fn read_matrix<R: Read>(mut input: R) -> Result<MatrixDump> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    decode_matrix(&bytes)
}

/// Writes `<stem>.bin` and `<stem>.json`; returns both paths.
pub fn write_matrix(dir: &Path, stem: &str, m: &MatrixDump, description: &str, prov: &Provenance) -> Result<[PathBuf; 2]> {
    let bytes = encode_matrix(m)?;
    let bin = dir.join(format!("{stem}.bin"));
    let side = dir.join(format!("{stem}.json"));
    fs::write(&bin, &bytes).map_err(|e| io_err(&bin, e))?;
    let meta = MatrixSidecar {
        format: "WQCMAT01".into(),
        rows: m.rows,
        cols: m.cols,
        layout: "row-major little-endian f64 after a 24-byte header".into(),
        payload_sha256: sha256_hex(&bytes[24..]),
        description: description.into(),
        provenance: prov.clone(),
    };
    write_json(&side, &meta)?;
    Ok([bin, side])
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    s.push('\n');
    fs::write(path, s).map_err(|e| io_err(path, e))
}

/// JSON object with an added `provenance` member.
pub fn stamped<T: Serialize>(value: &T, prov: &Provenance) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(value).map_err(|e| Error::Format(e.to_string()))?;
    let p = serde_json::to_value(prov).map_err(|e| Error::Format(e.to_string()))?;
    match v.as_object_mut() {
        Some(o) => {
            o.insert("provenance".into(), p);
            Ok(v)
        }
        None => Ok(serde_json::json!({ "value": v, "provenance": p })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance::new("ab".repeat(32), 7)
    }

    #[test]
    fn csv_roundtrip_is_bit_exact() {
        let rows = vec![vec![0.1, -1e-300, 1.0 / 3.0], vec![f64::MAX, 5e-324, -0.0]];
        let mut buf = Vec::new();
        write_csv(&mut buf, &prov(), &["a", "b", "c"], &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# wqc "));
        let t = read_csv(&buf[..]).unwrap();
        assert_eq!(t.header, ["a", "b", "c"]);
        for (a, b) in t.rows.iter().flatten().zip(rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_rejects_bad_cells() {
        assert!(read_csv("a,b\n1,x\n".as_bytes()).is_err());
        assert!(read_csv("a,b\n1,2,3\n".as_bytes()).is_err());
        assert!(read_csv("".as_bytes()).is_err());
    }

    #[test]
    fn collision_table_checks() {
        let ok = "t,y,theta\n0.5,0.2,0.1\n1.5,0.7,-0.3\n";
        assert_eq!(collisions_from_table(&read_csv(ok.as_bytes()).unwrap()).unwrap().len(), 2);
        let unsorted = "t,y,theta\n1.5,0.2,0.1\n0.5,0.7,-0.3\n";
        assert!(matches!(collisions_from_table(&read_csv(unsorted.as_bytes()).unwrap()), Err(Error::Unsorted(1))));
        let grazing = "t,y,theta\n0.5,0.2,1.6\n";
        assert!(collisions_from_table(&read_csv(grazing.as_bytes()).unwrap()).is_err());
        assert!(collisions_from_table(&read_csv("t,y\n1,2\n".as_bytes()).unwrap()).is_err());
    }

    #[test]
    fn matrix_roundtrip_and_rejects() {
        let m = MatrixDump { rows: 2, cols: 3, data: vec![1.0, -2.5, 0.0, f64::MIN_POSITIVE, 7.0, 1e300] };
        let bytes = encode_matrix(&m).unwrap();
        assert_eq!(decode_matrix(&bytes).unwrap(), m);
        assert!(decode_matrix(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_matrix(b"WQCMAT02").is_err());
        let mut huge = bytes[..24].to_vec();
        huge[8..16].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_matrix(&huge).is_err());
        assert!(encode_matrix(&MatrixDump { rows: 2, cols: 2, data: vec![0.0] }).is_err());
    }

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
