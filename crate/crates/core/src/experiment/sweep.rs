use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_campaign, ExperimentConfig, Mode, Summary};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepVariant {
    pub structure: String,
    pub orders: Vec<usize>,
}

impl SweepVariant {
    pub fn new(structure: &str, orders: &[usize]) -> Self {
        SweepVariant {
            structure: structure.to_string(),
            orders: orders.to_vec(),
        }
    }

    fn label(&self) -> String {
        let o: Vec<String> = self.orders.iter().map(ToString::to_string).collect();
        format!("{}-{}", self.structure, o.join("-"))
    }
}

/// A base configuration and the structure/order variants to run it with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    /// Empty means [`default_ladder`].
    #[serde(default)]
    pub variants: Vec<SweepVariant>,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn variants(&self) -> Vec<SweepVariant> {
        if self.variants.is_empty() {
            default_ladder()
        } else {
            self.variants.clone()
        }
    }
}

/// Four structures, five order vectors each.
pub fn default_ladder() -> Vec<SweepVariant> {
    let v = SweepVariant::new;
    vec![
        v("arx", &[1, 1, 1]),
        v("arx", &[2, 1, 1]),
        v("arx", &[2, 2, 1]),
        v("arx", &[3, 3, 1]),
        v("arx", &[4, 4, 1]),
        v("armax", &[1, 1, 1, 1]),
        v("armax", &[2, 1, 1, 1]),
        v("armax", &[2, 2, 1, 1]),
        v("armax", &[2, 2, 2, 1]),
        v("armax", &[3, 3, 1, 1]),
        v("bj", &[1, 1, 1, 1, 1]),
        v("bj", &[2, 1, 1, 1, 1]),
        v("bj", &[1, 1, 1, 2, 1]),
        v("bj", &[2, 1, 1, 2, 1]),
        v("bj", &[2, 2, 2, 2, 1]),
        v("ss", &[1]),
        v("ss", &[2]),
        v("ss", &[3]),
        v("ss", &[4]),
        v("ss", &[6]),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub structure: String,
    pub orders: String,
    pub effectiveness: f64,
    /// Mean loop iterations over completed runs; runs that found nothing
    /// count with the iterations they used.
    pub mean_iterations: f64,
    pub pareto: bool,
}

/// Marks the points not dominated by any other point, where more
/// effectiveness and fewer iterations are better. NaN iterations count as
/// worst. Identical points do not dominate each other.
pub fn pareto_front(points: &[(f64, f64)]) -> Vec<bool> {
    let key = |&(e, m): &(f64, f64)| (e, if m.is_nan() { f64::INFINITY } else { m });
    let keyed: Vec<(f64, f64)> = points.iter().map(key).collect();
    // sort by effectiveness descending, then iterations ascending; a point
    // is on the front iff its iterations beat every earlier point with
    // strictly higher effectiveness, and tie the best at equal effectiveness
    let mut order: Vec<usize> = (0..keyed.len()).collect();
    order.sort_by(|&a, &b| {
        keyed[b]
            .0
            .total_cmp(&keyed[a].0)
            .then(keyed[a].1.total_cmp(&keyed[b].1))
    });
    let mut front = vec![false; keyed.len()];
    let mut best_before: Option<f64> = None;
    let mut i = 0;
    while i < order.len() {
        let e = keyed[order[i]].0;
        let group_best = keyed[order[i]].1;
        let mut j = i;
        while j < order.len() && keyed[order[j]].0 == e {
            let m = keyed[order[j]].1;
            front[order[j]] = m == group_best && best_before.is_none_or(|b| m < b);
            j += 1;
        }
        best_before = Some(best_before.map_or(group_best, |b| b.min(group_best)));
        i = j;
    }
    front
}

/// Runs one campaign per variant. Campaign directories go under
/// `out/<structure>-<orders>` and the table to `out/sweep.csv`.
pub fn sweep(config: &SweepConfig, out: Option<&Path>, parallel: bool) -> Result<Vec<SweepRow>> {
    let variants = config.variants();
    let experiments = variants
        .iter()
        .map(|v| {
            let mut c = config.base.clone();
            c.mode = Mode::Surrogate;
            c.structure = v.structure.clone();
            c.orders = v.orders.clone();
            c.resolve()
        })
        .collect::<Result<Vec<_>>>()?;
    let run = |(v, exp): (&SweepVariant, &super::Experiment)| -> Result<Summary> {
        let dir = out.map(|o| o.join(v.label()));
        Ok(run_campaign(exp, dir.as_deref(), parallel)?.summary())
    };
    let summaries: Vec<Summary> = if parallel {
        variants
            .par_iter()
            .zip(experiments.par_iter())
            .map(run)
            .collect::<Result<_>>()?
    } else {
        variants
            .iter()
            .zip(experiments.iter())
            .map(run)
            .collect::<Result<_>>()?
    };

    let points: Vec<(f64, f64)> = summaries
        .iter()
        .map(|s| (s.effectiveness, s.mean_iterations))
        .collect();
    let front = pareto_front(&points);
    let rows: Vec<SweepRow> = variants
        .iter()
        .zip(&summaries)
        .zip(front)
        .map(|((v, s), pareto)| SweepRow {
            structure: v.structure.clone(),
            orders: v
                .orders
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
            effectiveness: s.effectiveness,
            mean_iterations: s.mean_iterations,
            pareto,
        })
        .collect();
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_table(std::fs::File::create(dir.join("sweep.csv"))?, &rows)?;
    }
    Ok(rows)
}

/// `structure,orders,effectiveness,mean_iterations,pareto`
pub fn write_table<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
