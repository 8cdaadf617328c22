//! Human-readable table output.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use momenta::moment::{Criterion, DeterminacyStatus};
use momenta::operator::DeficiencyReport;
use momenta::povm::{CellGrid, ConsistencyReport, ConsistentFamily, GridPOVM};
use momenta::reproduce::ReproduceReport;

fn status(s: DeterminacyStatus) -> &'static str {
    match s {
        DeterminacyStatus::Determinate => "determinate",
        DeterminacyStatus::Indeterminate => "indeterminate",
        DeterminacyStatus::Inconclusive => "inconclusive",
    }
}

fn criterion(c: Criterion) -> &'static str {
    match c {
        Criterion::Carleman => "carleman",
        Criterion::Cramer => "cramer",
        Criterion::Krein => "krein",
        Criterion::None => "-",
    }
}

pub fn reproduce_report(report: &ReproduceReport) {
    if !report.table.is_empty() {
        println!("determinacy of the power observables");
        println!("{:<6} {:<14} {:<10} {:<24} detail", "power", "verdict", "criterion", "expected");
        for row in &report.table {
            println!(
                "{:<6} {:<14} {:<10} {:<24} {}",
                row.power,
                status(row.status),
                criterion(row.criterion),
                format!("{}/{}", status(row.expected_status), criterion(row.expected_criterion)),
                row.detail
            );
        }
        println!();
    }
    for stage in &report.stages {
        println!(
            "stage {:<12} {}",
            format!("{:?}", stage.stage).to_lowercase(),
            if stage.pass { "pass" } else { "FAIL" }
        );
        for d in &stage.details {
            println!("  {d}");
        }
        if let Some(e) = &stage.error {
            println!("  error: {e}");
        }
    }
    println!();
    println!("overall: {}", if report.pass { "pass" } else { "FAIL" });
}

pub fn analysis_report(report: &super::AnalysisReport) {
    println!("kind: {:?}", report.kind);
    println!("existence: {}", report.existence);
    for (name, verdict) in [("carleman", &report.carleman), ("cramer", &report.cramer)] {
        match verdict {
            Some(v) => {
                let diag = v
                    .diagnostics
                    .iter()
                    .filter(|(l, _)| !l.starts_with("partial_sum_"))
                    .map(|(l, x)| format!("{l}={x:.4}"))
                    .collect::<Vec<_>>()
                    .join(", ");
                println!("{name}: {}/{} ({diag})", status(v.status), criterion(v.criterion));
            }
            None => println!("{name}: skipped (existence failed)"),
        }
    }
    if let Some(rec) = &report.reconstruction {
        println!(
            "reconstruction: {} atoms{}",
            rec.order_used,
            if rec.degenerate { " (reduced order, Hankel was singular)" } else { "" }
        );
        for (x, w) in rec.measure.atoms() {
            println!("  {x:>14.8}  {w:>14.8}");
        }
    }
}

pub fn deficiency_report(r: &DeficiencyReport) {
    println!("deficiency indices: ({}, {})", r.n_plus, r.n_minus);
    println!("classification: {:?}", r.classification);
    println!("selfadjoint extension family dimension: {}", r.extension_family_dim);
    println!("note: {}", r.note);
}

pub fn complex_matrix(name: &str, m: &DMatrix<C64>) {
    println!("{name}:");
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:+.6}{:+.6}i", m[(i, j)].re, m[(i, j)].im))
            .collect();
        println!("  [{}]", row.join(", "));
    }
}

pub fn povm(name: &str, q: &GridPOVM) {
    println!("{name}: {} cells on dimension {}", q.effects().len(), q.dim());
    for (i, (e, rep)) in q.effects().iter().zip(q.grid().representatives()).enumerate() {
        println!("cell {i} (representative {rep}):");
        for r in 0..e.nrows() {
            let row: Vec<String> = (0..e.ncols())
                .map(|c| format!("{:+.6}{:+.6}i", e[(r, c)].re, e[(r, c)].im))
                .collect();
            println!("  [{}]", row.join(", "));
        }
    }
}

pub fn family(f: &ConsistentFamily, check: &ConsistencyReport) {
    println!(
        "consistent family: {} entries on {} cells (consistency: {}, worst defect {:.3e})",
        f.entries.len(),
        f.grid.cells(),
        check.ok,
        check.worst_defect
    );
    for e in &f.entries {
        let masses: Vec<String> = e.masses.iter().map(|m| format!("{m:.6}")).collect();
        println!("  {:<14} [{}]", e.label, masses.join(", "));
    }
}

pub fn halfline(grid: &CellGrid, masses: &[f64], summary: &dyn Fn()) {
    println!("{:<6} {:>12} {:>14}", "cell", "rep", "mass");
    for (i, (&rep, &m)) in grid.representatives().iter().zip(masses).enumerate() {
        println!("{i:<6} {rep:>12.4} {m:>14.8}");
    }
    summary();
}
