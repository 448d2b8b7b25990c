//! Configuration-driven experiments with deterministic seeding and CSV/JSON
//! output.

mod config;
mod run;
mod studies;

pub use config::{
    BoundSettings, ConsistencyPredicate, CounterexampleSettings, CrosscheckSettings, EvalChoice, ExperimentConfig,
    ExperimentKind, KappaSettings, SearchKind, Thm1Settings, ToleranceSettings,
};
pub use run::{execute, output_dir, run, Check, Outcome, OutputFormat, RunSummary, Table};
pub use studies::{kappa_admissibility, mc_crosscheck, random_line_pair, CrosscheckRow, KappaRow};

/// Render a header and rows as RFC 4180 CSV.
pub fn csv_string(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
