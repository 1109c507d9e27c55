use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::Format;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRow {
    pub n: u32,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Extrapolated {
    pub value: f64,
    pub rate: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reference {
    pub value: f64,
    /// How the reference was obtained: a closed form, an oracle quadrature,
    /// or a claimed limit (in which case `pass` may honestly be false).
    pub provenance: String,
}

/// Machine-readable experiment outcome. Re-running the same config
/// byte-reproduces every field except `runtime_ms`; `params` is an ordered
/// map so serialization order is stable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub experiment: String,
    pub params: BTreeMap<String, serde_json::Value>,
    pub table: Vec<TableRow>,
    pub extrapolated: Option<Extrapolated>,
    pub reference: Option<Reference>,
    pub pass: bool,
    pub seed: u64,
    pub runtime_ms: u64,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// n,value rows followed by a comment block with the summary. The
    /// runtime is deliberately omitted so CSV output is byte-reproducible.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,value\n");
        for row in &self.table {
            let _ = writeln!(out, "{},{}", row.n, row.value);
        }
        let _ = writeln!(out, "# experiment: {}", self.experiment);
        for (k, v) in &self.params {
            let _ = writeln!(out, "# param {k}: {v}");
        }
        match &self.extrapolated {
            Some(e) => {
                let _ = writeln!(
                    out,
                    "# extrapolated: value={} rate={} residual={}",
                    e.value, e.rate, e.residual
                );
            }
            None => {
                let _ = writeln!(out, "# extrapolated: none");
            }
        }
        match &self.reference {
            Some(r) => {
                let _ = writeln!(out, "# reference: {} ({})", r.value, r.provenance);
            }
            None => {
                let _ = writeln!(out, "# reference: none");
            }
        }
        let _ = writeln!(out, "# pass: {}", self.pass);
        let _ = writeln!(out, "# seed: {}", self.seed);
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}
