//! Channel-spec file ingestion: a JSON document describing a discrete
//! state-dependent MAC. The CLI owns parsing; the channels module owns
//! validation of the resulting data.
//!
//! Expected shape:
//!
//! ```json
//! {
//!   "users": 2,
//!   "input_alphabets": [2, 2],
//!   "state_alphabets": [2, 1],
//!   "state_pmfs": [[0.75, 0.25], [1.0]],
//!   "kernel": [[1.0, 0.0], [0.0, 1.0], ...],
//!   "costs": [[0.0, 1.0], [0.0, 1.0]],
//!   "budgets": [0.3333, 0.3333]
//! }
//! ```
//!
//! `kernel` holds one row per joint symbol `(x_1..x_M, s_1..s_M)` in
//! row-major order (x_1 slowest, s_M fastest); each row is a distribution
//! over the output alphabet, whose size is taken from the row length.

use serde::Deserialize;

use maclab::channels::ChannelSpec;
use maclab::prob::Pmf;

use crate::error::{CliError, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub users: usize,
    pub input_alphabets: Vec<usize>,
    pub state_alphabets: Vec<usize>,
    pub state_pmfs: Vec<Vec<f64>>,
    pub kernel: Vec<Vec<f64>>,
    pub costs: Vec<Vec<f64>>,
    pub budgets: Vec<f64>,
}

pub fn load_channel(path: &std::path::Path) -> Result<ChannelSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read spec file {}: {e}", path.display())))?;
    let spec: SpecFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("spec file {}: {e}", path.display())))?;
    spec.into_channel()
}

impl SpecFile {
    pub fn into_channel(self) -> Result<ChannelSpec> {
        let m = self.users;
        if m == 0 {
            return Err(CliError::Input("field `users` must be >= 1".into()));
        }
        for (field, len) in [
            ("input_alphabets", self.input_alphabets.len()),
            ("state_alphabets", self.state_alphabets.len()),
            ("state_pmfs", self.state_pmfs.len()),
            ("costs", self.costs.len()),
            ("budgets", self.budgets.len()),
        ] {
            if len != m {
                return Err(CliError::Input(format!(
                    "field `{field}` has {len} entries, expected `users` = {m}"
                )));
            }
        }
        for (k, (&declared, pmf)) in self
            .state_alphabets
            .iter()
            .zip(&self.state_pmfs)
            .enumerate()
        {
            if pmf.len() != declared {
                return Err(CliError::Input(format!(
                    "field `state_pmfs[{k}]` has {} entries, `state_alphabets[{k}]` says {declared}",
                    pmf.len()
                )));
            }
        }
        let rows_expected: usize = self
            .input_alphabets
            .iter()
            .chain(self.state_alphabets.iter())
            .product();
        if self.kernel.len() != rows_expected {
            return Err(CliError::Input(format!(
                "field `kernel` has {} rows, expected {} = product of input and state alphabets",
                self.kernel.len(),
                rows_expected
            )));
        }
        let y_size = self.kernel.first().map_or(0, |row| row.len());
        if y_size == 0 {
            return Err(CliError::Input(
                "field `kernel` rows must be nonempty distributions over the output".into(),
            ));
        }
        for (i, row) in self.kernel.iter().enumerate() {
            if row.len() != y_size {
                return Err(CliError::Input(format!(
                    "field `kernel` row {i} has {} entries, row 0 has {y_size}",
                    row.len()
                )));
            }
        }

        let state_pmfs = self
            .state_pmfs
            .into_iter()
            .enumerate()
            .map(|(k, w)| {
                Pmf::new(w).map_err(|e| CliError::Input(format!("field `state_pmfs[{k}]`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        let kernel_flat: Vec<f64> = self.kernel.into_iter().flatten().collect();
        ChannelSpec::new(
            self.input_alphabets,
            state_pmfs,
            y_size,
            kernel_flat,
            self.costs,
            self.budgets,
        )
        .map_err(|e| CliError::Input(format!("field `kernel`/`costs`/`budgets`: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_spec_json() -> String {
        // The binary additive channel at p_s = 1/4 with budgets 1/3.
        let mut rows = Vec::new();
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                for s1 in 0..2usize {
                    let y = x1 ^ x2 ^ s1;
                    rows.push(if y == 0 {
                        "[1.0, 0.0]".to_string()
                    } else {
                        "[0.0, 1.0]".to_string()
                    });
                }
            }
        }
        format!(
            r#"{{
  "users": 2,
  "input_alphabets": [2, 2],
  "state_alphabets": [2, 1],
  "state_pmfs": [[0.75, 0.25], [1.0]],
  "kernel": [{}],
  "costs": [[0.0, 1.0], [0.0, 1.0]],
  "budgets": [0.3333333333333333, 0.3333333333333333]
}}"#,
            rows.join(", ")
        )
    }

    #[test]
    fn parse_valid_spec() {
        let spec: SpecFile = serde_json::from_str(&binary_spec_json()).unwrap();
        let ch = spec.into_channel().unwrap();
        assert_eq!(ch.users(), 2);
        assert_eq!(ch.output_size(), 2);
        assert_eq!(ch.state_size(0), 2);
    }

    #[test]
    fn kernel_row_count_mismatch_names_field() {
        let mut spec: SpecFile = serde_json::from_str(&binary_spec_json()).unwrap();
        spec.kernel.pop();
        let err = spec.into_channel().unwrap_err();
        assert!(err.to_string().contains("kernel"), "{err}");
    }

    #[test]
    fn bad_row_sum_reports_row_index() {
        let mut spec: SpecFile = serde_json::from_str(&binary_spec_json()).unwrap();
        spec.kernel[3] = vec![0.6, 0.6];
        let err = spec.into_channel().unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }
}
