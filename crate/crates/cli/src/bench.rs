//! Seeded EA replicas judged against the exact optimum.

use std::fmt::Write as _;

use lmax_core::oracle::{check_eps_optimal, enum_ptas, exact_optimum};
use lmax_core::{run_ea, EaConfig, Epsilon, Init, Instance, Time};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::manifest::InstanceRecord;

/// EA parameters shared by every replica of a benchmark.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSettings {
    pub replicas: u64,
    pub max_steps: Option<u64>,
    pub lambda: u64,
    pub global_exponent: u32,
    pub init: Init,
}

impl BenchSettings {
    fn config(&self, eps: Epsilon, seed: u64) -> EaConfig {
        let mut cfg = EaConfig::new(eps, seed)
            .with_lambda(self.lambda)
            .with_global_exponent(self.global_exponent)
            .with_init(self.init);
        cfg.max_steps = self.max_steps;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub n: usize,
    pub eps: Epsilon,
    pub replicas: u64,
    /// Replica `i` runs with seed `seed + i`.
    pub seed: u64,
    pub budget: u64,
    pub optimum: Time,
    /// Largest lateness that still counts as a success, `⌊L* + εP⌋`.
    pub target: Time,
    pub ptas_lateness: Time,
    pub successes: u64,
    pub success_fraction: f64,
    /// Median over the successful replicas.
    pub median_first_success_step: Option<f64>,
    pub best_lateness_min: Time,
    pub best_lateness_max: Time,
}

/// Seed of row `row` when a benchmark is started with `master`. Replica seeds
/// of different rows never overlap.
pub fn row_seed(master: u64, row: usize, replicas: u64) -> u64 {
    master.wrapping_add((row as u64).wrapping_mul(replicas))
}

pub fn bench_row(
    path: &str,
    instance: &Instance,
    eps: Epsilon,
    seed: u64,
    settings: &BenchSettings,
) -> Result<BenchRow> {
    let optimum = exact_optimum(instance)?.optimum;
    let total = instance.total_processing();
    let target = optimum + (eps.numer() as i128 * total as i128 / eps.denom() as i128) as Time;
    let ptas_lateness = enum_ptas(instance, eps)?.lateness;
    let budget = settings.config(eps, seed).effective_budget(instance.len())?;
    let results = (0..settings.replicas)
        .into_par_iter()
        .map(|r| run_ea(instance, &settings.config(eps, seed.wrapping_add(r)), Some(target), None))
        .collect::<lmax_core::Result<Vec<_>>>()?;
    let successes = results.iter().filter(|r| check_eps_optimal(r.lateness, optimum, eps, total)).count() as u64;
    let mut hits: Vec<u64> = results.iter().filter_map(|r| r.first_success_step).collect();
    hits.sort_unstable();
    let median_first_success_step = match hits.len() {
        0 => None,
        m if m % 2 == 1 => Some(hits[m / 2] as f64),
        m => Some((hits[m / 2 - 1] as f64 + hits[m / 2] as f64) / 2.0),
    };
    let fraction = if settings.replicas == 0 { 0.0 } else { successes as f64 / settings.replicas as f64 };
    Ok(BenchRow {
        instance: path.to_owned(),
        n: instance.len(),
        eps,
        replicas: settings.replicas,
        seed,
        budget,
        optimum,
        target,
        ptas_lateness,
        successes,
        success_fraction: fraction,
        median_first_success_step,
        best_lateness_min: results.iter().map(|r| r.lateness).min().unwrap_or(optimum),
        best_lateness_max: results.iter().map(|r| r.lateness).max().unwrap_or(optimum),
    })
}

/// Rows are ordered by instance, then by ε.
pub fn run_bench(
    instances: &[InstanceRecord],
    eps_list: &[Epsilon],
    master_seed: u64,
    settings: &BenchSettings,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(instances.len() * eps_list.len());
    for (i, record) in instances.iter().enumerate() {
        for (e, &eps) in eps_list.iter().enumerate() {
            let seed = row_seed(master_seed, i * eps_list.len() + e, settings.replicas);
            rows.push(bench_row(&record.path, &record.instance, eps, seed, settings)?);
        }
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[BenchRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("CSV output is UTF-8")
}

pub fn summary_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<32} {:>3} {:>6} {:>10} {:>6} {:>6} {:>6} {:>8} {:>12}",
        "instance", "n", "eps", "budget", "L*", "target", "ptas", "success", "median_hit"
    );
    for r in rows {
        let median = r.median_first_success_step.map_or("-".to_owned(), |m| format!("{m}"));
        let _ = writeln!(
            out,
            "{:<32} {:>3} {:>6} {:>10} {:>6} {:>6} {:>6} {:>8.3} {:>12}",
            r.instance,
            r.n,
            r.eps.to_string(),
            r.budget,
            r.optimum,
            r.target,
            r.ptas_lateness,
            r.success_fraction,
            median
        );
    }
    out
}
