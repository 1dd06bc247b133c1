use std::io::Write;

use serde::Serialize;

use super::SolutionPair;
use crate::error::Result;
use crate::numerics::interior_derivatives;

/// One row of the solution CSV (`x,n,E,nx,weighted_nx`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionRow {
    pub x: f64,
    pub n: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub nx: Option<f64>,
    pub weighted_nx: Option<f64>,
}

pub fn solution_rows(sol: &SolutionPair) -> Vec<SolutionRow> {
    let x = sol.x();
    interior_derivatives(x, &sol.n)
        .into_iter()
        .enumerate()
        .map(|(k, nx)| SolutionRow {
            x: x[k],
            n: sol.n[k],
            e: sol.e[k],
            nx,
            weighted_nx: nx.map(|d| (1.0 - x[k]).sqrt() * d),
        })
        .collect()
}

/// Writes the solution table; boundary rows leave the derivative cells empty.
pub fn write_solution_csv<W: Write>(sol: &SolutionPair, out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for row in solution_rows(sol) {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}
