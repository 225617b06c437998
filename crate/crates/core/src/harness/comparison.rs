use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run, AngiogenicSwitch, ModelState};
use crate::error::{Error, Result};
use crate::harness::baseline::BaselineConfig;
use crate::harness::stats::{Quartiles, SignTest};
use crate::rng::RngSeed;

/// Replicate seeds hang off this child of the master seed, away from the
/// repetition seeds `split(master, 0..r)`.
const REPLICATE_STREAM: u64 = 0x7265_706c_6963; // "replic"

pub fn replicate_seed(master: RngSeed, index: usize) -> RngSeed {
    master.split(REPLICATE_STREAM).split(index as u64)
}

/// Final populations of one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicateFinal {
    pub seed: RngSeed,
    pub inflamed: usize,
    pub dead: usize,
    pub dead_inflamed_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    pub switch: AngiogenicSwitch,
    pub inflamed: Quartiles,
    pub dead: Quartiles,
    /// `None` when no replicate ended with an inflamed cell.
    pub dead_inflamed_ratio: Option<Quartiles>,
    pub replicates: Vec<ReplicateFinal>,
}

impl ComparisonRow {
    pub fn inflamed_values(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.inflamed as f64).collect()
    }

    pub fn dead_values(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.dead as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchComparison {
    pub baseline: String,
    pub n_seeds: usize,
    pub rows: Vec<ComparisonRow>,
}

impl SwitchComparison {
    /// Paired sign test on final inflamed counts of rows `a` and `b`.
    /// Replicate `j` of every row shares a seed, hence a seed graph.
    pub fn inflamed_sign_test(&self, a: usize, b: usize) -> SignTest {
        SignTest::greater(
            &self.rows[a].inflamed_values(),
            &self.rows[b].inflamed_values(),
        )
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "switch",
            "angioprevention",
            "angiogenesis",
            "quiescent",
            "n_seeds",
            "inflamed_q1",
            "inflamed_median",
            "inflamed_q3",
            "dead_q1",
            "dead_median",
            "dead_q3",
            "ratio_q1",
            "ratio_median",
            "ratio_q3",
        ])?;
        for row in &self.rows {
            let ratio = row.dead_inflamed_ratio.map_or_else(
                || ["NaN".to_string(), "NaN".to_string(), "NaN".to_string()],
                |q| [q.q1.to_string(), q.median.to_string(), q.q3.to_string()],
            );
            let mut record = vec![
                row.label.clone(),
                row.switch.angioprevention.to_string(),
                row.switch.angiogenesis.to_string(),
                row.switch.quiescent.to_string(),
                row.replicates.len().to_string(),
            ];
            for q in [row.inflamed, row.dead] {
                record.extend([q.q1.to_string(), q.median.to_string(), q.q3.to_string()]);
            }
            record.extend(ratio);
            w.write_record(&record)?;
        }
        w.flush()
            .map_err(|e| Error::io("<switch comparison csv>", e))?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("utf-8")
    }
}

/// Run `n_seeds` replicates of `base` under each switch. Rows are labelled
/// `ASW1`, `ASW2`, ... in input order.
pub fn run_switch_comparison(
    base: &BaselineConfig,
    switches: &[AngiogenicSwitch],
    n_seeds: usize,
) -> Result<SwitchComparison> {
    if n_seeds == 0 {
        return Err(Error::config("n_seeds", "must be at least 1"));
    }
    base.validate()?;
    for (i, s) in switches.iter().enumerate() {
        s.validate()
            .map_err(|e| e.within(&format!("switches[{i}]")))?;
    }

    let jobs: Vec<(usize, usize)> = (0..switches.len())
        .flat_map(|s| (0..n_seeds).map(move |j| (s, j)))
        .collect();
    let finals: Vec<ReplicateFinal> = jobs
        .par_iter()
        .map(|&(s, j)| {
            let seed = replicate_seed(base.master_seed, j);
            let mut config = base.model_config();
            config.switch = switches[s];
            let initial = ModelState::new(config, seed)?;
            let before = crate::analysis::population_metrics(&initial);
            let record = run(initial, base.steps).map_err(|e| Error::Repetition {
                index: j,
                source: Box::new(e),
            })?;
            let last = record.final_metrics().unwrap_or(&before);
            Ok(ReplicateFinal {
                seed,
                inflamed: last.n_inflamed,
                dead: last.n_dead,
                dead_inflamed_ratio: last.dead_inflamed_ratio,
            })
        })
        .collect::<Result<_>>()?;

    let rows = switches
        .iter()
        .enumerate()
        .map(|(s, switch)| {
            let replicates = finals[s * n_seeds..(s + 1) * n_seeds].to_vec();
            let inflamed: Vec<f64> = replicates.iter().map(|r| r.inflamed as f64).collect();
            let dead: Vec<f64> = replicates.iter().map(|r| r.dead as f64).collect();
            let ratio: Vec<f64> = replicates
                .iter()
                .filter_map(|r| r.dead_inflamed_ratio)
                .collect();
            ComparisonRow {
                label: format!("ASW{}", s + 1),
                switch: *switch,
                inflamed: Quartiles::of(&inflamed).expect("n_seeds >= 1"),
                dead: Quartiles::of(&dead).expect("n_seeds >= 1"),
                dead_inflamed_ratio: Quartiles::of(&ratio),
                replicates,
            }
        })
        .collect();

    Ok(SwitchComparison {
        baseline: base.name.clone(),
        n_seeds,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> BaselineConfig {
        let mut b = BaselineConfig::new("T", 40, 60, 10);
        b.steps = 10;
        b
    }

    #[test]
    fn single_seed_row_equals_run() {
        let cmp = run_switch_comparison(&small(), &[AngiogenicSwitch::ASW1], 1).unwrap();
        assert_eq!(cmp.rows.len(), 1);
        let row = &cmp.rows[0];
        let r = row.replicates[0];
        assert_eq!(row.inflamed.median, r.inflamed as f64);
        assert_eq!(row.inflamed.q1, row.inflamed.q3);
        assert_eq!(row.dead.median, r.dead as f64);

        let mut config = small().model_config();
        config.switch = AngiogenicSwitch::ASW1;
        let direct = run(
            ModelState::new(config, replicate_seed(RngSeed(0), 0)).unwrap(),
            10,
        )
        .unwrap();
        assert_eq!(direct.final_metrics().unwrap().n_inflamed, r.inflamed);
    }

    #[test]
    fn inert_switch_has_no_dynamics() {
        let cmp = run_switch_comparison(&small(), &[AngiogenicSwitch::INERT], 5).unwrap();
        assert!(cmp.rows[0]
            .replicates
            .iter()
            .all(|r| r.inflamed == 0 && r.dead == 0));
        assert!(cmp.rows[0].dead_inflamed_ratio.is_none());
        assert!(cmp
            .to_csv()
            .lines()
            .nth(1)
            .unwrap()
            .ends_with("NaN,NaN,NaN"));
    }

    #[test]
    fn zero_seeds_rejected() {
        assert!(matches!(
            run_switch_comparison(&small(), &[AngiogenicSwitch::ASW1], 0),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn paired_replicates_share_seeds() {
        let cmp = run_switch_comparison(
            &small(),
            &[AngiogenicSwitch::ASW1, AngiogenicSwitch::ASW2],
            3,
        )
        .unwrap();
        let seeds = |row: &ComparisonRow| row.replicates.iter().map(|r| r.seed).collect::<Vec<_>>();
        assert_eq!(seeds(&cmp.rows[0]), seeds(&cmp.rows[1]));
        assert_eq!(cmp.rows[1].label, "ASW2");
    }
}
