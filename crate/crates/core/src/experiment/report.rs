use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_rows, RunRow};
use crate::error::Result;

/// Aggregate metrics of a set of campaign rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: usize,
    pub violations: usize,
    pub errors: usize,
    /// Fraction of runs that revealed a violation.
    pub effectiveness: f64,
    /// Median MUT executions over completed runs.
    pub median_mut_executions: f64,
    /// Median MUT executions over runs that revealed a violation.
    pub median_executions_to_violation: f64,
    /// Mean iterations over completed runs.
    pub mean_iterations: f64,
    pub median_wall_ms: f64,
    /// Failing input traces found on disk, in seed order.
    #[serde(default)]
    pub failing_inputs: Vec<PathBuf>,
}

/// Median of `values`; NaN when empty.
pub(crate) fn median(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl Summary {
    pub fn from_rows(rows: &[RunRow]) -> Summary {
        let done: Vec<&RunRow> = rows.iter().filter(|r| !r.is_error()).collect();
        let violations = rows.iter().filter(|r| r.is_violation()).count();
        let execs = |rs: &mut dyn Iterator<Item = &RunRow>| {
            rs.filter_map(|r| r.mut_executions)
                .map(|v| v as f64)
                .collect()
        };
        let iters: Vec<f64> = done
            .iter()
            .filter_map(|r| r.iterations)
            .map(|v| v as f64)
            .collect();
        Summary {
            runs: rows.len(),
            violations,
            errors: rows.len() - done.len(),
            effectiveness: if rows.is_empty() {
                0.0
            } else {
                violations as f64 / rows.len() as f64
            },
            median_mut_executions: median(execs(&mut done.iter().copied())),
            median_executions_to_violation: median(execs(
                &mut rows.iter().filter(|r| r.is_violation()),
            )),
            mean_iterations: if iters.is_empty() {
                f64::NAN
            } else {
                iters.iter().sum::<f64>() / iters.len() as f64
            },
            median_wall_ms: median(rows.iter().map(|r| r.wall_ms as f64).collect()),
            failing_inputs: Vec::new(),
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "runs:                           {}", self.runs)?;
        writeln!(f, "violations:                     {}", self.violations)?;
        if self.errors > 0 {
            writeln!(f, "errors:                         {}", self.errors)?;
        }
        writeln!(
            f,
            "effectiveness:                  {:.3}",
            self.effectiveness
        )?;
        writeln!(
            f,
            "median MUT executions:          {}",
            self.median_mut_executions
        )?;
        writeln!(
            f,
            "median executions to violation: {}",
            self.median_executions_to_violation
        )?;
        writeln!(
            f,
            "mean iterations:                {:.3}",
            self.mean_iterations
        )?;
        write!(f, "median wall time (ms):          {}", self.median_wall_ms)?;
        for p in &self.failing_inputs {
            write!(f, "\nfailing input: {}", p.display())?;
        }
        Ok(())
    }
}

/// Summarizes the campaign in `dir`, writes `summary.json` and collects
/// every run's objective history into `histories.csv`
/// (`seed,iteration,objective`; MUT objectives for surrogate runs).
pub fn report(dir: &Path) -> Result<Summary> {
    let rows = read_rows(dir)?;
    let mut summary = Summary::from_rows(&rows);
    let mut histories = csv::Writer::from_writer(Vec::new());
    histories.write_record(["seed", "iteration", "objective"])?;
    for r in &rows {
        let run = dir.join("runs").join(format!("seed-{}", r.seed));
        let failing = run.join("failing_input.csv");
        if r.is_violation() && failing.is_file() {
            summary.failing_inputs.push(failing);
        }
        for (file, it_col, obj_col) in [
            ("history.csv", "iteration", "objective"),
            ("aristeo_log.csv", "iter", "mut_obj"),
        ] {
            let path = run.join(file);
            if !path.is_file() {
                continue;
            }
            let mut reader = csv::Reader::from_path(&path)?;
            let headers = reader.headers()?.clone();
            let pos = |name: &str| headers.iter().position(|h| h == name);
            let (Some(i), Some(o)) = (pos(it_col), pos(obj_col)) else {
                continue;
            };
            for rec in reader.records() {
                let rec = rec?;
                histories.write_record([&r.seed.to_string(), &rec[i], &rec[o]])?;
            }
        }
    }
    let bytes = histories
        .into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()))?;
    std::fs::File::create(dir.join("histories.csv"))?.write_all(&bytes)?;
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(outcome: &str, execs: Option<usize>) -> RunRow {
        RunRow {
            seed: 0,
            mode: "surrogate".into(),
            outcome: outcome.into(),
            best_objective: execs.map(|_| 0.0),
            mut_executions: execs,
            iterations: execs.map(|e| e - 1),
            wall_ms: 10,
        }
    }

    #[test]
    fn metrics_from_rows() {
        let rows = [
            row("violation_found", Some(2)),
            row("violation_found", Some(4)),
            row("budget_exhausted", Some(11)),
            row("error", None),
        ];
        let s = Summary::from_rows(&rows);
        assert_eq!(s.runs, 4);
        assert_eq!(s.violations, 2);
        assert_eq!(s.errors, 1);
        assert_eq!(s.effectiveness, 0.5);
        assert_eq!(s.median_mut_executions, 4.0);
        assert_eq!(s.median_executions_to_violation, 3.0);
        assert!((s.mean_iterations - 14.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn median_of_nothing_is_nan() {
        assert!(median(vec![]).is_nan());
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
    }
}
