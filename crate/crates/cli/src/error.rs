use std::fmt;

use seqmcm::Error;

/// Exit status of the binary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    VerifyFailed = 1,
    Malformed = 2,
    KktFailed = 3,
    Infeasible = 4,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: Exit,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn malformed(message: impl Into<String>) -> Self {
        CliError { exit: Exit::Malformed, message: message.into() }
    }

    pub fn new(exit: Exit, message: impl Into<String>) -> Self {
        CliError { exit, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn is_infeasible(e: &Error) -> bool {
    match e {
        Error::InfeasibleWeakening(_)
        | Error::InfeasibleGain { .. }
        | Error::InfeasibleInconclusiveRate { .. }
        | Error::Domain(_) => true,
        Error::Party { source, .. } => is_infeasible(source),
        _ => false,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match &e {
            Error::Party { party, source } if is_infeasible(source) => {
                CliError::new(Exit::Infeasible, format!("party {party} is infeasible: {source}"))
            }
            Error::Party { party, source } => {
                let exit = match **source {
                    Error::Numerical(_) | Error::Csv(_) => Exit::VerifyFailed,
                    _ => Exit::Malformed,
                };
                CliError::new(exit, format!("party {party}: {source}"))
            }
            Error::Numerical(_) | Error::Csv(_) => CliError::new(Exit::VerifyFailed, e.to_string()),
            _ => CliError::malformed(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::malformed(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::malformed(format!("json: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::malformed(format!("csv: {e}"))
    }
}
