use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ddtruss::MechanicalState;
use serde::Serialize;

/// One table line of a load sweep. `None` cells are written blank; the
/// heuristic objective in particular is blank exactly when the heuristic
/// did not converge.
pub struct SweepRow {
    pub lambda: f64,
    pub opt_mj: Option<f64>,
    pub time_s: Option<f64>,
    pub bnb_nodes: Option<u64>,
    pub heur_obj_mj: Option<f64>,
    pub heur_iters: Option<usize>,
    pub heur_converged: Option<bool>,
    pub monitor_disp_m: Option<f64>,
    pub status: String,
}

impl SweepRow {
    pub fn blank(lambda: f64) -> Self {
        Self {
            lambda,
            opt_mj: None,
            time_s: None,
            bnb_nodes: None,
            heur_obj_mj: None,
            heur_iters: None,
            heur_converged: None,
            monitor_disp_m: None,
            status: String::new(),
        }
    }

    fn cells(&self) -> [String; 9] {
        [
            format!("{}", self.lambda),
            self.opt_mj.map(|v| format!("{v:.6}")).unwrap_or_default(),
            self.time_s.map(|v| format!("{v:.3}")).unwrap_or_default(),
            self.bnb_nodes.map(|v| v.to_string()).unwrap_or_default(),
            self.heur_obj_mj
                .map(|v| format!("{v:.6}"))
                .unwrap_or_default(),
            self.heur_iters.map(|v| v.to_string()).unwrap_or_default(),
            self.heur_converged
                .map(|v| v.to_string())
                .unwrap_or_default(),
            self.monitor_disp_m
                .map(|v| format!("{v:.9e}"))
                .unwrap_or_default(),
            self.status.clone(),
        ]
    }
}

const SWEEP_HEADER: [&str; 9] = [
    "lambda",
    "opt_mJ",
    "time_s",
    "bnb_nodes",
    "heur_obj_mJ",
    "heur_iters",
    "heur_converged",
    "monitor_disp_m",
    "status",
];

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", SWEEP_HEADER.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.cells().join(","))?;
    }
    w.flush()
}

pub fn write_path_csv(path: &Path, rows: &[SweepRow]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "lambda,monitor_disp_m")?;
    for row in rows {
        if let Some(disp) = row.monitor_disp_m {
            writeln!(w, "{},{disp:.9e}", row.lambda)?;
        }
    }
    w.flush()
}

pub fn print_table(rows: &[SweepRow]) {
    let mut widths: Vec<usize> = SWEEP_HEADER.iter().map(|h| h.len()).collect();
    let all_cells: Vec<[String; 9]> = rows.iter().map(SweepRow::cells).collect();
    for cells in &all_cells {
        for (width, cell) in widths.iter_mut().zip(cells) {
            *width = (*width).max(cell.len());
        }
    }
    let line = |cells: &[String]| {
        let mut out = String::new();
        for (i, (cell, width)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            let shown = if cell.is_empty() { "-" } else { cell };
            out.push_str(&format!("{shown:>width$}"));
        }
        out
    };
    let header: Vec<String> = SWEEP_HEADER.iter().map(|h| h.to_string()).collect();
    println!("{}", line(&header));
    for cells in &all_cells {
        println!("{}", line(cells));
    }
}

/// Full record of one analyze run, joules and meters throughout.
#[derive(Serialize)]
pub struct SolutionFile {
    pub solver: &'static str,
    pub lambda: f64,
    pub weighting_pa: f64,
    pub objective_j: f64,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_explored: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    pub wall_time_s: f64,
    pub u_m: Vec<f64>,
    pub strain: Vec<f64>,
    pub stress_pa: Vec<f64>,
    pub data_strain: Vec<f64>,
    pub data_stress_pa: Vec<f64>,
    pub assignment: Vec<u32>,
}

pub fn write_solution(path: &Path, solution: &SolutionFile) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, solution)?;
    writeln!(w)?;
    w.flush()
}

/// Per-member relaxed state next to its assigned data point; the raw
/// numbers behind a phase-space scatter plot.
pub fn write_phase_space(path: &Path, state: &MechanicalState) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "member,eps,sig,e_assigned,s_assigned")?;
    for i in 0..state.strain.len() {
        writeln!(
            w,
            "{},{:.12e},{:.12e},{:.12e},{:.12e}",
            i, state.strain[i], state.stress[i], state.data_strain[i], state.data_stress[i]
        )?;
    }
    w.flush()
}
