//! File formats, run logs, the benchmark report and the command-line
//! front end for [`sitesched_core`].

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod bench_report;
pub mod cli;
pub mod instance_file;
pub mod qubo_file;
pub mod real_case;
pub mod run_log;
pub mod schedule_csv;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Schema { path: String, reason: String },
    #[error("csv: {0}")]
    Csv(String),
}

impl FormatError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<csv::Error> for FormatError {
    fn from(e: csv::Error) -> Self {
        FormatError::Csv(e.to_string())
    }
}
