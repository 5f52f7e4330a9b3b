//! The CSV trace: `n,residual,kappa,tau,theta,active_block_size,wall_time_ms`.
//!
//! Floats use the shortest exponent representation that reads back to the same value;
//! undefined step data (progressive hedging) is written as `NaN`.

use std::io::Write;

use stochsplit_core::solver::IterationRecord;

pub const HEADER: [&str; 7] = [
    "n",
    "residual",
    "kappa",
    "tau",
    "theta",
    "active_block_size",
    "wall_time_ms",
];

/// Writes `records`. `wall_ms(n)` gives the elapsed time at iteration `n`.
pub fn write_trace<W: Write>(out: W, records: &[IterationRecord], wall_ms: impl Fn(usize) -> f64) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.n.to_string(),
            format!("{:e}", r.residual),
            format!("{:e}", r.kappa),
            format!("{:e}", r.tau),
            format!("{:e}", r.theta),
            r.active.len().to_string(),
            format!("{:e}", wall_ms(r.n)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One parsed trace row.
#[derive(Debug, Clone, PartialEq, serde::Deserialize)]
pub struct TraceRow {
    pub n: usize,
    pub residual: f64,
    pub kappa: f64,
    pub tau: f64,
    pub theta: f64,
    pub active_block_size: usize,
    pub wall_time_ms: f64,
}

pub fn read_trace<R: std::io::Read>(input: R) -> csv::Result<Vec<TraceRow>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
