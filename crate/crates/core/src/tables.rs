//! Per-marginal information tables for small multi-qubit states.
//!
//! Columns are every marginal ordered by size (`ρ_A, ρ_B, ρ_C, ρ_AB, …, ρ_ABC`);
//! rows are `S`, `S_c`, `G`, `L`, `I`, `E_f`. `G` is filled for marginals of two or
//! more parts, `L`, `I` and `E_f` for two-part marginals only.

use std::fmt::Write as _;

use serde::Serialize;

use crate::concurrence::concurrence;
use crate::entropy::{coherent_entropy, von_neumann};
use crate::error::Result;
use crate::local::sc_local;
use crate::multipartite::mutual_information;
use crate::optimize::OptimizerConfig;
use crate::partition::PartitionLabel;
use crate::state::DensityOperator;

pub const ROWS: [&str; 6] = ["S", "S_c", "G", "L", "I", "E_f"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub value: f64,
    /// Whether the value comes from the local-unitary optimizer.
    pub optimized: bool,
    pub converged: bool,
}

impl Cell {
    fn exact(value: f64) -> Option<Self> {
        Some(Self {
            value,
            optimized: false,
            converged: true,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InfoTable {
    pub state: String,
    pub columns: Vec<PartitionLabel>,
    /// `cells[row][column]`, rows in [`ROWS`] order.
    pub cells: Vec<Vec<Option<Cell>>>,
}

impl InfoTable {
    pub fn column_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| format!("ρ_{}", c.letters())).collect()
    }

    pub fn row(&self, name: &str) -> Option<&[Option<Cell>]> {
        ROWS.iter().position(|r| *r == name).map(|i| self.cells[i].as_slice())
    }

    /// Value at `row` for the marginal named by `letters` (e.g. `"AB"`).
    pub fn get(&self, row: &str, letters: &str) -> Option<f64> {
        let col = self.columns.iter().position(|c| c.letters() == letters)?;
        self.row(row)?[col].map(|c| c.value)
    }

    /// Markdown with six decimals. Optimizer cells that did not converge carry a `†`.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let names = self.column_names();
        let _ = writeln!(out, "| {} | {} |", self.state, names.join(" | "));
        let _ = writeln!(out, "|{}", "---|".repeat(names.len() + 1));
        for (name, row) in ROWS.iter().zip(&self.cells) {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    None => String::new(),
                    Some(c) => format!("{:.6}{}", c.value, if c.optimized && !c.converged { "†" } else { "" }),
                })
                .collect();
            let _ = writeln!(out, "| {} | {} |", name, cells.join(" | "));
        }
        if self.cells.iter().flatten().flatten().any(|c| c.optimized && !c.converged) {
            out.push_str("\n† optimizer hit its iteration limit on every restart; best value found is shown.\n");
        }
        out
    }

    /// `quantity,marginal,value,optimized,converged` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("quantity,marginal,value,optimized,converged\n");
        for (name, row) in ROWS.iter().zip(&self.cells) {
            for (col, cell) in self.columns.iter().zip(row) {
                if let Some(c) = cell {
                    let _ = writeln!(
                        out,
                        "{name},{},{:.6},{},{}",
                        col.letters(),
                        c.value,
                        c.optimized,
                        c.converged
                    );
                }
            }
        }
        out
    }
}

/// All nonempty subsets of `0..n`, by size and then lexicographically.
pub fn marginal_labels(n: usize) -> Vec<PartitionLabel> {
    let mut labels: Vec<PartitionLabel> = (1u32..(1 << n))
        .map(|mask| PartitionLabel::new((0..n).filter(|i| mask & (1 << i) != 0), n).expect("nonempty"))
        .collect();
    labels.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.indices().cmp(b.indices())));
    labels
}

/// Builds the table for `rho`. With `cfg = None` the optimizer rows (`G`, `L`) stay empty.
pub fn info_table(name: &str, rho: &DensityOperator, cfg: Option<&OptimizerConfig>) -> Result<InfoTable> {
    let n = rho.dims().len();
    let columns = marginal_labels(n);
    let mut cells = vec![vec![None; columns.len()]; ROWS.len()];
    for (j, label) in columns.iter().enumerate() {
        let marginal = rho.partial_trace(label)?;
        cells[0][j] = Cell::exact(von_neumann(&marginal)?.value());
        cells[1][j] = Cell::exact(coherent_entropy(&marginal)?.value());
        let k = label.len();
        let singles: Vec<PartitionLabel> = (0..k).map(|i| PartitionLabel::single(i, k)).collect::<Result<_>>()?;
        if k == 2 {
            cells[4][j] = Cell::exact(mutual_information(&marginal, &singles[0], &singles[1])?.value());
            if marginal.dims() == [2, 2] {
                cells[5][j] = Cell::exact(concurrence(&marginal)?.e_f.value());
            }
        }
        if let (Some(cfg), true) = (cfg, k >= 2) {
            let local = sc_local(&marginal, &singles, cfg)?;
            let converged = local.converged();
            cells[2][j] = Some(Cell {
                value: local.gap.value(),
                optimized: true,
                converged,
            });
            if let Some(l) = local.local {
                cells[3][j] = Some(Cell {
                    value: l.value(),
                    optimized: true,
                    converged,
                });
            }
        }
    }
    Ok(InfoTable {
        state: name.to_string(),
        columns,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{make_named_state, StateName};

    #[test]
    fn column_order() {
        let names: Vec<String> = marginal_labels(3).iter().map(|l| l.letters()).collect();
        assert_eq!(names, ["A", "B", "C", "AB", "AC", "BC", "ABC"]);
    }

    #[test]
    fn ghz_analytic_rows() {
        let ghz = make_named_state(&StateName::Ghz(3)).unwrap();
        let t = info_table("GHZ", &ghz, None).unwrap();
        let row = |r: &str| -> Vec<Option<f64>> { t.row(r).unwrap().iter().map(|c| c.map(|c| c.value)).collect() };
        let close = |got: Vec<Option<f64>>, want: &[f64]| {
            got.iter().zip(want).all(|(g, w)| (g.unwrap() - w).abs() < 1e-9)
        };
        assert!(close(row("S"), &[1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0]));
        assert!(close(row("S_c"), &[0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 3.0]));
        assert!(row("G").iter().all(Option::is_none));
        assert!((t.get("I", "AC").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(t.get("I", "A"), None);
        let md = t.to_markdown();
        assert!(md.starts_with("| GHZ | ρ_A | ρ_B | ρ_C | ρ_AB | ρ_AC | ρ_BC | ρ_ABC |"));
        assert!(md.contains("| S_c | 0.000000 | 0.000000 | 0.000000 | 1.000000 | 1.000000 | 1.000000 | 3.000000 |"));
        assert!(t.to_csv().contains("E_f,AB,0.000000,false,true"));
    }
}
