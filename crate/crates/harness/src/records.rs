use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// One played episode. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub env: String,
    pub algo: String,
    /// Empty for planners without an ambiguity attitude.
    pub alpha: Option<f64>,
    pub seed: u64,
    pub distance: f64,
    pub discounted_return: f64,
    pub undiscounted_return: f64,
    pub steps: usize,
    pub reached_goal: bool,
    pub wall_ms: u64,
}

pub const CSV_HEADER: [&str; 10] = [
    "env",
    "algo",
    "alpha",
    "seed",
    "distance",
    "discounted_return",
    "undiscounted_return",
    "steps",
    "reached_goal",
    "wall_ms",
];

/// CSV sink that flushes after every batch.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            inner: csv::WriterBuilder::new().has_headers(true).from_writer(out),
        }
    }

    pub fn append(&mut self, records: &[EpisodeRecord]) -> Result<(), HarnessError> {
        for r in records {
            self.inner.serialize(r)?;
        }
        self.inner.flush()?;
        Ok(())
    }
}

pub fn write_records(path: &Path, records: &[EpisodeRecord]) -> Result<(), HarnessError> {
    let mut w = RecordWriter::new(std::fs::File::create(path)?);
    w.append(records)
}

pub fn read_records(path: &Path) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let mut rdr = csv::Reader::from_path(path)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != CSV_HEADER {
        return Err(HarnessError::Config(format!("{} does not have the record columns", path.display())));
    }
    rdr.deserialize().map(|r| r.map_err(HarnessError::from)).collect()
}

/// Aggregate over one (env, algo, alpha, distance bucket) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub env: String,
    pub algo: String,
    pub alpha: Option<f64>,
    /// `floor` of the Euclidean start-goal distance.
    pub distance_bucket: i64,
    pub episodes: usize,
    pub discounted_return_mean: f64,
    pub discounted_return_std: f64,
    pub undiscounted_return_mean: f64,
    pub undiscounted_return_std: f64,
    pub steps_mean: f64,
    pub steps_std: f64,
    pub success_rate: f64,
}

/// Mean and sample standard deviation (0 for a single value).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summarize(records: &[EpisodeRecord]) -> Result<Vec<SummaryRow>, HarnessError> {
    if records.is_empty() {
        return Err(HarnessError::Empty);
    }
    // Alpha keyed by bit pattern of its total order so groups sort sensibly.
    type Key = (String, String, Option<i64>, i64);
    let mut groups: BTreeMap<Key, Vec<&EpisodeRecord>> = BTreeMap::new();
    for r in records {
        let alpha = r.alpha.map(|a| (a * 1e9).round() as i64);
        let key = (r.env.clone(), r.algo.clone(), alpha, r.distance.floor() as i64);
        groups.entry(key).or_default().push(r);
    }
    Ok(groups
        .into_iter()
        .map(|((env, algo, _, bucket), rs)| {
            let col = |f: fn(&EpisodeRecord) -> f64| rs.iter().map(|r| f(r)).collect::<Vec<_>>();
            let (dm, ds) = mean_std(&col(|r| r.discounted_return));
            let (um, us) = mean_std(&col(|r| r.undiscounted_return));
            let (sm, ss) = mean_std(&col(|r| r.steps as f64));
            let success = rs.iter().filter(|r| r.reached_goal).count() as f64 / rs.len() as f64;
            SummaryRow {
                env,
                algo,
                alpha: rs[0].alpha,
                distance_bucket: bucket,
                episodes: rs.len(),
                discounted_return_mean: dm,
                discounted_return_std: ds,
                undiscounted_return_mean: um,
                undiscounted_return_std: us,
                steps_mean: sm,
                steps_std: ss,
                success_rate: success,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(alpha: Option<f64>, distance: f64, ret: f64, goal: bool) -> EpisodeRecord {
        EpisodeRecord {
            env: "grid".into(),
            algo: "aags".into(),
            alpha,
            seed: 1,
            distance,
            discounted_return: ret,
            undiscounted_return: ret * 2.0,
            steps: 10,
            reached_goal: goal,
            wall_ms: 0,
        }
    }

    #[test]
    fn single_record() {
        let s = summarize(&[rec(Some(0.0), 3.2, 0.7, true)]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].discounted_return_mean, s[0].discounted_return_std), (0.7, 0.0));
        assert_eq!(s[0].success_rate, 1.0);
    }

    #[test]
    fn two_records_average() {
        let s = summarize(&[rec(Some(0.0), 3.2, 0.0, false), rec(Some(0.0), 3.9, 1.0, true)]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].discounted_return_mean, 0.5);
        assert_eq!(s[0].success_rate, 0.5);
        assert!((s[0].discounted_return_std - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn integer_distance_buckets() {
        let rs = [
            rec(Some(1.0), 2.0, 1.0, true),
            rec(Some(1.0), 2.99, 3.0, true),
            rec(Some(1.0), 3.0, 5.0, true),
            rec(Some(0.0), 2.5, 7.0, true),
            rec(None, 2.5, 9.0, true),
        ];
        let s = summarize(&rs).unwrap();
        let find = |alpha: Option<f64>, b: i64| s.iter().find(|r| r.alpha == alpha && r.distance_bucket == b).unwrap();
        assert_eq!(find(Some(1.0), 2).discounted_return_mean, 2.0);
        assert_eq!(find(Some(1.0), 3).discounted_return_mean, 5.0);
        assert_eq!(find(Some(0.0), 2).episodes, 1);
        assert_eq!(find(None, 2).discounted_return_mean, 9.0);
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(summarize(&[]), Err(HarnessError::Empty)));
    }

    #[test]
    fn csv_round_trip_keeps_column_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let rs = vec![rec(Some(0.5), 1.5, 0.25, true), rec(None, 2.0, 0.5, false)];
        write_records(&path, &rs).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        assert!(text.lines().nth(2).unwrap().starts_with("grid,aags,,1,"));
        assert_eq!(read_records(&path).unwrap(), rs);
    }
}
