//! End-to-end timing of the outsourcing pipeline against a direct solve.

use std::io::Write;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generate::{generate, GenOptions, Mode};
use crate::problem::Tolerance;
use crate::solver::{proof_gen, Outcome};
use crate::transform::{decrypt, identity_view, keygen, prob_enc};
use crate::verify::{check_optimal, Verdict};

pub const CSV_HEADER: [&str; 11] = [
    "n",
    "m",
    "t_keygen",
    "t_enc",
    "t_cloud_solve",
    "t_verify",
    "t_dec",
    "t_local_solve",
    "customer_total",
    "speedup",
    "cloud_overhead",
];

/// One pipeline run. Durations are in seconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub n: usize,
    pub m: usize,
    pub t_keygen: f64,
    pub t_enc: f64,
    pub t_cloud_solve: f64,
    pub t_verify: f64,
    pub t_dec: f64,
    pub t_local_solve: f64,
    pub customer_total: f64,
    pub speedup: f64,
    pub cloud_overhead: f64,
}

impl BenchRecord {
    fn from_stages(n: usize, m: usize, stages: [Duration; 6]) -> Self {
        let [keygen, enc, cloud, verify, dec, local] = stages.map(|d| d.as_secs_f64());
        let customer_total = keygen + enc + verify + dec;
        BenchRecord {
            n,
            m,
            t_keygen: keygen,
            t_enc: enc,
            t_cloud_solve: cloud,
            t_verify: verify,
            t_dec: dec,
            t_local_solve: local,
            customer_total,
            speedup: local / customer_total,
            cloud_overhead: cloud / local,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// `m = ceil(n · m_ratio)`.
    pub m_ratio: f64,
    pub tol: Tolerance,
}

impl BenchConfig {
    pub fn new(sizes: Vec<usize>, trials: usize, seed: u64) -> Self {
        BenchConfig {
            sizes,
            trials,
            seed,
            m_ratio: 0.5,
            tol: Tolerance::default(),
        }
    }

    pub fn rows_for(&self, n: usize) -> usize {
        ((n as f64 * self.m_ratio).ceil() as usize).clamp(1, n)
    }

    /// Per-(size, trial) instance and key seeds, drawn in a fixed order.
    pub fn trial_seeds(&self) -> Vec<(usize, u64, u64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::new();
        for &n in &self.sizes {
            for _ in 0..self.trials {
                out.push((n, rng.gen(), rng.gen()));
            }
        }
        out
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

/// Runs one full pipeline on a fresh feasible bounded instance.
pub fn run_trial(n: usize, m: usize, instance_seed: u64, key_seed: u64, tol: &Tolerance) -> Result<BenchRecord> {
    let p = generate(&GenOptions::new(n, m, Mode::Feasible), instance_seed)?;

    let (key, t_keygen) = timed(|| keygen(&p, key_seed));
    let key = key?;
    let (enc, t_enc) = timed(|| prob_enc(&key, &p));
    let enc = enc?;
    let (result, t_cloud) = timed(|| proof_gen(&enc, tol));
    let result = result?;

    let Outcome::Optimal { y, s, t } = &result.outcome else {
        return Err(Error::NumericalInstability(
            "benchmark instance did not solve to optimality".into(),
        ));
    };
    let (verdict, t_verify) = timed(|| check_optimal(&enc, y, s, t, tol));
    if let Verdict::Reject(rejection) = verdict? {
        return Err(Error::VerificationFailed(rejection));
    }
    let (_solution, t_dec) = timed(|| decrypt(&key, &enc, &result.outcome));

    let plain = identity_view(&p);
    let (local, t_local) = timed(|| proof_gen(&plain, tol));
    local?;

    Ok(BenchRecord::from_stages(
        n,
        m,
        [t_keygen, t_enc, t_cloud, t_verify, t_dec, t_local],
    ))
}

/// Runs every trial sequentially.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    cfg.trial_seeds()
        .into_iter()
        .map(|(n, instance_seed, key_seed)| {
            run_trial(n, cfg.rows_for(n), instance_seed, key_seed, &cfg.tol)
        })
        .collect()
}

pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty());
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Field-wise median per size, in order of first appearance.
pub fn summarize(records: &[BenchRecord]) -> Vec<BenchRecord> {
    let mut sizes: Vec<(usize, usize)> = Vec::new();
    for r in records {
        if !sizes.contains(&(r.n, r.m)) {
            sizes.push((r.n, r.m));
        }
    }
    sizes
        .into_iter()
        .map(|(n, m)| {
            let group: Vec<&BenchRecord> = records.iter().filter(|r| r.n == n && r.m == m).collect();
            let field = |f: fn(&BenchRecord) -> f64| {
                let mut v: Vec<f64> = group.iter().map(|r| f(r)).collect();
                median(&mut v)
            };
            BenchRecord {
                n,
                m,
                t_keygen: field(|r| r.t_keygen),
                t_enc: field(|r| r.t_enc),
                t_cloud_solve: field(|r| r.t_cloud_solve),
                t_verify: field(|r| r.t_verify),
                t_dec: field(|r| r.t_dec),
                t_local_solve: field(|r| r.t_local_solve),
                customer_total: field(|r| r.customer_total),
                speedup: field(|r| r.speedup),
                cloud_overhead: field(|r| r.cloud_overhead),
            }
        })
        .collect()
}

/// Writes the header, one row per trial, then a `# median` marker line and
/// one summary row per size.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    let mut inner = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    writeln!(inner, "# median")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(inner);
    for r in summarize(records) {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a CSV produced by [`write_csv`]: `(trial rows, summary rows)`.
pub fn read_csv(text: &str) -> Result<(Vec<BenchRecord>, Vec<BenchRecord>)> {
    let (trials, summary) = text.split_once("# median\n").unwrap_or((text, ""));
    let trials = csv::Reader::from_reader(trials.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<BenchRecord>, _>>()?;
    let summary = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(summary.as_bytes())
        .deserialize()
        .collect::<std::result::Result<Vec<BenchRecord>, _>>()?;
    Ok((trials, summary))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_size_csv_shape() {
        let records = run_bench(&BenchConfig::new(vec![10], 1, 3)).unwrap();
        assert_eq!(records.len(), 1);
        let mut buf = Vec::new();
        write_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "# median");
        let (trials, summary) = read_csv(&text).unwrap();
        assert_eq!(trials, records);
        assert_eq!(summary.len(), 1);
        let r = &trials[0];
        assert_eq!((r.n, r.m), (10, 5));
        for v in [r.t_keygen, r.t_enc, r.t_cloud_solve, r.t_verify, r.t_dec, r.t_local_solve] {
            assert!(v > 0.0);
        }
        assert_eq!(r.speedup, r.t_local_solve / r.customer_total);
        assert_eq!(r.customer_total, r.t_keygen + r.t_enc + r.t_verify + r.t_dec);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [10.0, 20.0, 40.0, 80.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(2.5)).collect();
        assert!((loglog_slope(&xs, &ys) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn trial_seeds_are_reproducible() {
        let cfg = BenchConfig::new(vec![10, 20], 3, 99);
        assert_eq!(cfg.trial_seeds(), cfg.trial_seeds());
        assert_eq!(cfg.trial_seeds().len(), 6);
    }
}
