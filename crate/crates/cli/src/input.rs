use std::fs;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use ctq_core::objective::MeasurementBasis;
use ctq_core::protocol::MessageQubit;
use ctq_core::state::{CanonicalState, StateRecord, Tolerances, DEFAULT_NORM_TOL};

use crate::CliError;

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn load<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T, CliError> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Validation(format!("cannot read {what} file `{arg}`: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("malformed {what} JSON: {e}")))
}

pub fn parse_state(arg: &str, normalize: bool, zero_tol: f64) -> Result<CanonicalState, CliError> {
    let record: StateRecord = load(arg, "state")?;
    let tol = Tolerances { norm_tol: DEFAULT_NORM_TOL, zero_tol };
    record.validate(normalize, &tol).map_err(|e| CliError::Validation(e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisRecord {
    theta: f64,
    phi: f64,
}

pub fn parse_basis(arg: &str) -> Result<MeasurementBasis, CliError> {
    let r: BasisRecord = load(arg, "basis")?;
    MeasurementBasis::new(r.theta, r.phi).map_err(|e| CliError::Validation(e.to_string()))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MessageRecord {
    alpha: [f64; 2],
    beta: [f64; 2],
}

pub fn parse_message(arg: &str) -> Result<MessageQubit, CliError> {
    let r: MessageRecord = load(arg, "message")?;
    MessageQubit::new(Complex64::new(r.alpha[0], r.alpha[1]), Complex64::new(r.beta[0], r.beta[1]))
        .map_err(|e| CliError::Validation(e.to_string()))
}
