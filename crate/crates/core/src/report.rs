//! CSV rows and run manifests for purity experiments.
//!
//! The column set is fixed by [`CSV_COLUMNS`]; new columns are only ever
//! appended. Floats are written in shortest round-trip form, so identical
//! inputs give byte-identical files.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::combinat::HalfInt;
use crate::{Error, Result};

pub const CSV_COLUMNS: [&str; 15] = [
    "d",
    "s",
    "n",
    "p",
    "j0",
    "dInv",
    "hMax",
    "exactMean",
    "mcMean",
    "mcVar",
    "etaMean",
    "tailFraction",
    "trials",
    "seed",
    "k",
];

/// One grid point of a purity run. Monte Carlo fields are empty in exact-only
/// mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PurityRow {
    pub d: usize,
    pub s: HalfInt,
    pub n: u32,
    pub p: u32,
    pub j0: HalfInt,
    /// Decimal string: the count can exceed 64 bits.
    pub d_inv: String,
    pub h_max: f64,
    pub exact_mean: f64,
    pub mc_mean: Option<f64>,
    pub mc_var: Option<f64>,
    pub eta_mean: Option<f64>,
    pub tail_fraction: Option<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    /// `−ln` of the exact mean purity.
    pub k: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(format!("csv: {e}"))
}

/// Writes the header and `rows`.
pub fn write_rows<W: Write>(out: W, rows: &[PurityRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))
}

/// Reads rows written by [`write_rows`]; the header must match exactly.
pub fn read_rows<R: Read>(input: R) -> Result<Vec<PurityRow>> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_COLUMNS) {
        return Err(Error::Parse(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Provenance written next to every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// The full configuration as given on the command line.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    /// RFC 3339, UTC.
    pub timestamp: String,
    pub rng_algorithm: String,
    pub columns: Vec<String>,
}

impl RunManifest {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse(format!("manifest: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("manifest: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(mc: bool) -> PurityRow {
        PurityRow {
            d: 2,
            s: "3/2".parse().unwrap(),
            n: 5,
            p: 2,
            j0: HalfInt::HALF,
            d_inv: "123456789012345678901234567890".into(),
            h_max: 2.772588722239781,
            exact_mean: 0.1,
            mc_mean: mc.then_some(0.10000000000000002),
            mc_var: mc.then_some(1e-5),
            eta_mean: mc.then_some(0.9),
            tail_fraction: mc.then_some(0.0),
            trials: mc.then_some(100),
            seed: mc.then_some(u64::MAX),
            k: std::f64::consts::LN_10,
        }
    }

    #[test]
    fn header_and_round_trip() {
        let rows = vec![row(true), row(false)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert!(lines.next().unwrap().starts_with("2,3/2,5,2,1/2,123456789012345678901234567890,"));
        assert!(lines.next().unwrap().contains(",0.1,,,,,,,2.302585092994046"));
        assert_eq!(read_rows(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn rejects_foreign_headers() {
        assert!(read_rows("a,b\n1,2\n".as_bytes()).is_err());
        assert!(read_rows("".as_bytes()).is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let m = RunManifest {
            tool: "invrep".into(),
            version: "0.1.0".into(),
            command: "purity".into(),
            config: serde_json::json!({"d": 2, "s": ["1/2"]}),
            seed: Some(7),
            timestamp: "2026-01-01T00:00:00Z".into(),
            rng_algorithm: crate::montecarlo::RNG_ALGORITHM.into(),
            columns: CSV_COLUMNS.iter().map(|c| c.to_string()).collect(),
        };
        let text = m.to_json().unwrap();
        assert!(text.contains("\"rngAlgorithm\""));
        assert_eq!(RunManifest::from_json(&text).unwrap(), m);
        assert!(RunManifest::from_json("{").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn readers_never_panic(text in "\\PC{0,200}") {
                let _ = RunManifest::from_json(&text);
                let with_header = format!("{}\n{text}", CSV_COLUMNS.join(","));
                if let Ok(rows) = read_rows(with_header.as_bytes()) {
                    let mut buf = Vec::new();
                    write_rows(&mut buf, &rows).unwrap();
                    prop_assert_eq!(read_rows(buf.as_slice()).unwrap().len(), rows.len());
                }
            }
        }
    }
}
