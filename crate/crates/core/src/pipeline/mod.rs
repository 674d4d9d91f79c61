//! Config-driven runs: every stage from corpus to plot-ready tables.

mod commands;
mod config;
mod figures;
mod output;
mod workspace;

pub use commands::{cmd_counts, cmd_econ, cmd_ingest, cmd_report, cmd_score, cmd_series, cmd_topics, run, Command, EconOutputs, FittedSlice};
pub use config::{
    CorpusConfig, CrisisConfig, DifferenceConfig, EconConfig, ExternalConfig, FiguresConfig, GrangerConfig, GrangerMode,
    IndicatorConfig, IndicatorKindConfig, LexiconConfig, LexiconFormat, Overrides, RunConfig, SliceConfig, TopicsConfig,
    VariableRef, AGGREGATE_NAME,
};
pub use output::{sha256_file, OutputDir};
pub use workspace::{LoadedLexicon, Workspace};
