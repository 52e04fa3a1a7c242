use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Experiment, ExperimentConfig, RunOutput, Summary};
use crate::error::{Error, Result};

pub const ROW_HEADER: &str = "seed,mode,outcome,best_objective,mut_executions,iterations,wall_ms";

/// One campaign row. Failed runs have outcome `error` and empty metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub seed: u64,
    pub mode: String,
    pub outcome: String,
    pub best_objective: Option<f64>,
    pub mut_executions: Option<usize>,
    pub iterations: Option<usize>,
    pub wall_ms: u64,
}

impl RunRow {
    pub fn is_violation(&self) -> bool {
        self.outcome == "violation_found"
    }

    pub fn is_error(&self) -> bool {
        self.outcome == "error"
    }

    /// The row as one CSV line without the trailing newline.
    pub fn to_line(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.seed,
            self.mode,
            self.outcome,
            opt(self.best_objective.map(|v| v.to_string())),
            opt(self.mut_executions.map(|v| v.to_string())),
            opt(self.iterations.map(|v| v.to_string())),
            self.wall_ms
        )
    }

    /// Same run, ignoring wall time.
    pub fn same_result(&self, other: &RunRow) -> bool {
        RunRow {
            wall_ms: 0,
            ..self.clone()
        } == RunRow {
            wall_ms: 0,
            ..other.clone()
        }
    }
}

pub struct CampaignReport {
    pub config: ExperimentConfig,
    /// In seed order.
    pub runs: Vec<RunOutput>,
    pub rows: Vec<RunRow>,
}

impl CampaignReport {
    pub fn summary(&self) -> Summary {
        Summary::from_rows(&self.rows)
    }

    pub fn effectiveness(&self) -> f64 {
        self.summary().effectiveness
    }
}

fn run_dir(out: &Path, seed: u64) -> PathBuf {
    out.join("runs").join(format!("seed-{seed}"))
}

/// Runs every repetition of `exp`. With an output directory, each
/// completed row is appended and flushed before the next run starts; in
/// parallel mode each row goes to its own file under `rows.d/` and
/// `rows.csv` is assembled in seed order at the end.
pub fn run_campaign(
    exp: &Experiment,
    out: Option<&Path>,
    parallel: bool,
) -> Result<CampaignReport> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("config.toml"), exp.config.to_toml()?)?;
    }
    let seeds: Vec<u64> = exp.seeds().collect();
    let record = |run: &RunOutput| -> Result<()> {
        if let Some(dir) = out {
            run.write_artifacts(&run_dir(dir, run.seed))?;
        }
        Ok(())
    };

    let runs = if parallel {
        if let Some(dir) = out {
            fs::create_dir_all(dir.join("rows.d"))?;
        }
        seeds
            .par_iter()
            .map(|&seed| {
                let run = exp.run_seed(seed);
                record(&run)?;
                if let Some(dir) = out {
                    let mut f = File::create(dir.join("rows.d").join(format!("seed-{seed}.csv")))?;
                    writeln!(f, "{ROW_HEADER}\n{}", run.row().to_line())?;
                }
                Ok(run)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let mut rows_file = match out {
            Some(dir) => {
                let mut f = File::create(dir.join("rows.csv"))?;
                writeln!(f, "{ROW_HEADER}")?;
                Some(f)
            }
            None => None,
        };
        let mut runs = Vec::with_capacity(seeds.len());
        for &seed in &seeds {
            let run = exp.run_seed(seed);
            record(&run)?;
            if let Some(f) = rows_file.as_mut() {
                writeln!(f, "{}", run.row().to_line())?;
                f.flush()?;
            }
            runs.push(run);
        }
        runs
    };

    let rows: Vec<RunRow> = runs.iter().map(RunOutput::row).collect();
    if let Some(dir) = out {
        if parallel {
            let mut text = format!("{ROW_HEADER}\n");
            for r in &rows {
                text.push_str(&r.to_line());
                text.push('\n');
            }
            fs::write(dir.join("rows.csv"), text)?;
        }
        fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&Summary::from_rows(&rows))?,
        )?;
    }
    Ok(CampaignReport {
        config: exp.config.clone(),
        runs,
        rows,
    })
}

fn parse_rows(path: &Path) -> Result<Vec<RunRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != ROW_HEADER {
        return Err(Error::structural(format!(
            "{}: unexpected header `{header}`",
            path.display()
        )));
    }
    let mut rows = Vec::new();
    for r in reader.deserialize() {
        match r {
            Ok(row) => rows.push(row),
            // a run killed mid-write can leave one truncated last line
            Err(e) if e.position().is_some() && rows.is_empty() => return Err(e.into()),
            Err(_) => break,
        }
    }
    Ok(rows)
}

/// Reads the rows of a campaign directory: `rows.csv`, or the per-row files
/// of an unfinished parallel campaign.
pub fn read_rows(dir: &Path) -> Result<Vec<RunRow>> {
    let main = dir.join("rows.csv");
    let mut rows = if main.is_file() {
        parse_rows(&main)?
    } else {
        let mut rows = Vec::new();
        if let Ok(entries) = fs::read_dir(dir.join("rows.d")) {
            for entry in entries {
                let path = entry?.path();
                if path.extension().is_some_and(|e| e == "csv") {
                    rows.extend(parse_rows(&path)?);
                }
            }
        }
        rows.sort_by_key(|r| r.seed);
        rows
    };
    if rows.is_empty() {
        return Err(Error::Config(format!("no runs in {}", dir.display())));
    }
    rows.dedup_by_key(|r| r.seed);
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ReplayCheck {
    pub recorded: Option<RunRow>,
    pub replayed: RunRow,
    pub failing_input: Option<PathBuf>,
}

impl ReplayCheck {
    pub fn matches(&self) -> bool {
        self.recorded
            .as_ref()
            .is_some_and(|r| r.same_result(&self.replayed))
    }
}

/// Re-runs one seed of the campaign stored in `dir`. Artifacts go to
/// `dir/replay/seed-<n>`.
pub fn replay(dir: &Path, seed: u64) -> Result<ReplayCheck> {
    let config = ExperimentConfig::load(&dir.join("config.toml"))?;
    let exp = config.resolve()?;
    let recorded = read_rows(dir)
        .ok()
        .and_then(|rows| rows.into_iter().find(|r| r.seed == seed));
    let run = exp.run_seed(seed);
    let failing_input = run.write_artifacts(&dir.join("replay").join(format!("seed-{seed}")))?;
    Ok(ReplayCheck {
        recorded,
        replayed: run.row(),
        failing_input,
    })
}

#[cfg(test)]
mod tests {
    use std::fs::OpenOptions;

    use super::*;

    fn append_row(path: &Path, row: &RunRow) -> Result<()> {
        let fresh = !path.exists();
        let mut f = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            writeln!(f, "{ROW_HEADER}")?;
        }
        writeln!(f, "{}", row.to_line())?;
        f.flush()?;
        Ok(())
    }

    fn row(seed: u64) -> RunRow {
        RunRow {
            seed,
            mode: "baseline".into(),
            outcome: "violation_found".into(),
            best_objective: Some(-0.25),
            mut_executions: Some(7),
            iterations: Some(7),
            wall_ms: 12,
        }
    }

    #[test]
    fn rows_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        append_row(&path, &row(1)).unwrap();
        let mut failed = row(2);
        failed.outcome = "error".into();
        failed.best_objective = None;
        failed.mut_executions = None;
        failed.iterations = None;
        append_row(&path, &failed).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(
            text,
            format!(
                "{ROW_HEADER}\n1,baseline,violation_found,-0.25,7,7,12\n2,baseline,error,,,,12\n"
            )
        );
        assert_eq!(read_rows(dir.path()).unwrap(), vec![row(1), failed]);
    }

    #[test]
    fn truncated_last_line_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        append_row(&path, &row(1)).unwrap();
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        write!(f, "2,baseline,viol").unwrap();
        assert_eq!(read_rows(dir.path()).unwrap(), vec![row(1)]);
    }

    #[test]
    fn empty_directory_has_no_runs() {
        let dir = tempfile::tempdir().unwrap();
        let err = read_rows(dir.path()).unwrap_err();
        assert!(err.to_string().contains("no runs"));
    }

    #[test]
    fn wall_time_is_ignored_when_comparing() {
        let mut b = row(1);
        b.wall_ms = 99;
        assert!(row(1).same_result(&b));
        b.mut_executions = Some(8);
        assert!(!row(1).same_result(&b));
    }
}
