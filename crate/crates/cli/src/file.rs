//! `ProcessFile`: a labeled operator as UTF-8 JSON.
//!
//! ```text
//! {
//!   "format_version": 1,
//!   "labels": [{"time": 2, "port": "input", "role": "system", "dim": 2}, ...],
//!   "matrix": [[re, im], ...],
//!   "metadata": {"key": "value"}
//! }
//! ```
//!
//! `matrix` holds the entries row by row in label order (leftmost label most
//! significant). The writer prints one matrix row per line and every number
//! in its shortest round-trip decimal form, so writing a parsed canonical
//! file reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use memzoo_core::process::canonical_order;
use memzoo_core::{CMatrix, LabeledOperator, SpaceLabel};
use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessFile {
    pub format_version: u32,
    pub labels: Vec<SpaceLabel>,
    pub matrix: Vec<[f64; 2]>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let start: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

fn number(x: f64) -> String {
    serde_json::to_string(&x).expect("finite floats serialize")
}

impl ProcessFile {
    pub fn from_operator(op: &LabeledOperator, metadata: BTreeMap<String, String>) -> Self {
        let m = op.matrix();
        let n = m.nrows();
        let matrix = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            labels: op.labels().to_vec(),
            matrix,
            metadata,
        }
    }

    /// Parses and checks the shape; errors carry the byte offset when the
    /// JSON itself is malformed.
    pub fn parse(text: &str) -> CliResult<Self> {
        let f: ProcessFile = serde_json::from_str(text).map_err(|e| CliError::Parse {
            offset: Some(byte_offset(text, e.line(), e.column())),
            message: e.to_string(),
        })?;
        let semantic = |message: String| CliError::Parse { offset: None, message };
        if f.format_version != FORMAT_VERSION {
            return Err(semantic(format!("unsupported format_version {}", f.format_version)));
        }
        if let Some(l) = f.labels.iter().find(|l| !l.is_valid()) {
            return Err(semantic(format!("label {l} needs positive time and dimension")));
        }
        let side = f.side()?;
        if f.matrix.len() != side * side {
            return Err(semantic(format!(
                "matrix has {} entries but the labels require {}",
                f.matrix.len(),
                side * side
            )));
        }
        Ok(f)
    }

    /// Product of the label dimensions.
    pub fn side(&self) -> CliResult<usize> {
        self.labels.iter().try_fold(1usize, |acc, l| acc.checked_mul(l.dim)).ok_or_else(|| CliError::Parse {
            offset: None,
            message: "dimension product overflows".into(),
        })
    }

    pub fn to_operator(&self) -> CliResult<LabeledOperator> {
        let side = self.side()?;
        let m = CMatrix::from_fn(side, side, |r, c| {
            let [re, im] = self.matrix[r * side + c];
            Complex64::new(re, im)
        });
        LabeledOperator::new(self.labels.clone(), m).map_err(|e| CliError::Parse {
            offset: None,
            message: e.to_string(),
        })
    }

    pub fn is_canonical(&self) -> bool {
        canonical_order(&self.labels) == self.labels
    }

    /// Same operator with labels in canonical process order.
    pub fn canonicalized(&self) -> CliResult<Self> {
        if self.is_canonical() {
            return Ok(self.clone());
        }
        let op = self.to_operator()?;
        let op = op.permute(&canonical_order(op.labels())).map_err(|e| CliError::Invalid(e.to_string()))?;
        Ok(Self::from_operator(&op, self.metadata.clone()))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"format_version\": {},", self.format_version);
        s.push_str("  \"labels\": [");
        for (i, l) in self.labels.iter().enumerate() {
            let sep = if i + 1 == self.labels.len() { "" } else { "," };
            let _ = write!(
                s,
                "\n    {{\"time\": {}, \"port\": {}, \"role\": {}, \"dim\": {}}}{sep}",
                l.time,
                serde_json::to_string(&l.port).expect("enum"),
                serde_json::to_string(&l.role).expect("enum"),
                l.dim
            );
        }
        s.push_str(if self.labels.is_empty() { "],\n" } else { "\n  ],\n" });
        s.push_str("  \"matrix\": [");
        let side = self.side().unwrap_or(0).max(1);
        for (row, chunk) in self.matrix.chunks(side).enumerate() {
            s.push_str("\n    ");
            let cells: Vec<String> = chunk.iter().map(|[re, im]| format!("[{}, {}]", number(*re), number(*im))).collect();
            s.push_str(&cells.join(", "));
            if (row + 1) * side < self.matrix.len() {
                s.push(',');
            }
        }
        s.push_str(if self.matrix.is_empty() { "],\n" } else { "\n  ],\n" });
        s.push_str("  \"metadata\": {");
        for (i, (k, v)) in self.metadata.iter().enumerate() {
            let sep = if i + 1 == self.metadata.len() { "" } else { "," };
            let _ = write!(
                s,
                "\n    {}: {}{sep}",
                serde_json::to_string(k).expect("string"),
                serde_json::to_string(v).expect("string")
            );
        }
        s.push_str(if self.metadata.is_empty() { "}\n" } else { "\n  }\n" });
        s.push_str("}\n");
        s
    }
}
