use std::path::PathBuf;

/// Output encoding of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

/// One experiment invocation. Unset optional fields take per-experiment
/// defaults chosen so that a bare `--experiment <name>` reproduces the
/// shipped verification suite.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub dim: Option<usize>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub rho: Option<f64>,
    pub n_max: Option<u32>,
    pub quad_order: Option<usize>,
    pub lambda: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl ExperimentConfig {
    pub fn new(experiment: impl Into<String>) -> Self {
        ExperimentConfig {
            experiment: experiment.into(),
            dim: None,
            p: None,
            q: None,
            rho: None,
            n_max: None,
            quad_order: None,
            lambda: None,
            out: None,
            format: Format::Json,
        }
    }
}
