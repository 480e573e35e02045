//! Ground truth for the EA: exhaustive optimum, the enumerate-all-placements
//! baseline, the ε-optimality test and Monte Carlo experiments on the local
//! chain (absorption) and the full EA (hitting the target placement).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{local_move, EaConfig, HybridEa, MutationKind};
use crate::jackson::{
    build_jackson_with, classify, enumerate_with, placement_of, prefix_against, DeltaPartition, Placement,
    DEFAULT_ENUMERATION_CAP,
};
use crate::model::{Epsilon, Instance, Schedule, Time};
use crate::rng::RngStream;

/// Largest instance [`exact_optimum`] accepts by default.
pub const DEFAULT_EXACT_CAP: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactResult {
    pub optimum: Time,
    pub witness: Schedule,
    /// Complete permutations evaluated.
    pub explored: u64,
}

pub fn exact_optimum(instance: &Instance) -> Result<ExactResult> {
    exact_optimum_with(instance, DEFAULT_EXACT_CAP, true)
}

/// Depth-first search over all permutations in lexicographic order. With
/// `prune`, a prefix is cut once
/// `max(delivered so far, free + remaining p + min remaining q)` reaches the
/// incumbent. The witness is the lexicographically first optimal schedule
/// either way.
pub fn exact_optimum_with(instance: &Instance, cap: usize, prune: bool) -> Result<ExactResult> {
    let n = instance.len();
    if n > cap {
        return Err(Error::InstanceTooLargeForExact { n, cap });
    }
    let mut search = Search {
        instance,
        prune,
        used: vec![false; n],
        order: Vec::with_capacity(n),
        best: Time::MAX,
        witness: Vec::new(),
        explored: 0,
    };
    search.descend(0, Time::MIN, instance.total_processing());
    Ok(ExactResult {
        optimum: search.best,
        witness: Schedule::new(search.witness).expect("search builds permutations"),
        explored: search.explored,
    })
}

struct Search<'a> {
    instance: &'a Instance,
    prune: bool,
    used: Vec<bool>,
    order: Vec<usize>,
    best: Time,
    witness: Vec<usize>,
    explored: u64,
}

impl Search<'_> {
    fn descend(&mut self, free: Time, delivered: Time, remaining: Time) {
        let n = self.used.len();
        if self.order.len() == n {
            self.explored += 1;
            if delivered < self.best {
                self.best = delivered;
                self.witness.clone_from(&self.order);
            }
            return;
        }
        if self.prune {
            let min_q = (0..n)
                .filter(|&j| !self.used[j])
                .map(|j| self.instance.job(j).delivery)
                .min()
                .expect("unscheduled jobs remain");
            if delivered.max(free + remaining + min_q) >= self.best {
                return;
            }
        }
        for j in 0..n {
            if self.used[j] {
                continue;
            }
            let job = *self.instance.job(j);
            let done = free.max(job.release) + job.processing;
            self.used[j] = true;
            self.order.push(j);
            self.descend(done, delivered.max(done + job.delivery), remaining - job.processing);
            self.order.pop();
            self.used[j] = false;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtasCandidate {
    pub schedule: Schedule,
    pub lateness: Time,
    pub placement: Placement,
    pub valid: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PtasResult {
    /// Best greedy completion over all placements. Some placements admit no
    /// schedule passing the full Jackson check, and restricting to the ones
    /// that do can miss the `L* + εP` guarantee, so they all compete.
    pub schedule: Schedule,
    pub lateness: Time,
    pub placement: Placement,
    pub valid: bool,
    pub placements_total: u128,
    pub placements_valid: u128,
    /// Best among placements whose greedy schedule passes the full check.
    pub best_valid: PtasCandidate,
}

pub fn enum_ptas(instance: &Instance, eps: Epsilon) -> Result<PtasResult> {
    enum_ptas_with(instance, eps, DEFAULT_ENUMERATION_CAP)
}

/// Builds the greedy Jackson schedule for every placement. Ties keep the
/// first placement in enumeration order.
pub fn enum_ptas_with(instance: &Instance, eps: Epsilon, cap: u128) -> Result<PtasResult> {
    let partition = classify(instance, eps);
    let placements = enumerate_with(&partition, cap)?;
    let total = placements.total();
    let mut valid_count = 0u128;
    let mut best_valid: Option<PtasCandidate> = None;
    let mut best: Option<PtasCandidate> = None;
    for placement in placements {
        let (schedule, valid) = build_jackson_with(instance, &partition, &placement)?;
        let lateness = instance.lateness_of(schedule.order());
        let candidate = PtasCandidate { schedule, lateness, placement, valid };
        if valid {
            valid_count += 1;
            if best_valid.as_ref().is_none_or(|b| lateness < b.lateness) {
                best_valid = Some(candidate.clone());
            }
        }
        if best.as_ref().is_none_or(|b| lateness < b.lateness) {
            best = Some(candidate);
        }
    }
    let best_valid = best_valid.ok_or(Error::NoValidPlacement)?;
    let best = best.expect("at least one placement");
    Ok(PtasResult {
        schedule: best.schedule,
        lateness: best.lateness,
        placement: best.placement,
        valid: best.valid,
        placements_total: total,
        placements_valid: valid_count,
        best_valid,
    })
}

/// `L <= L* + εP`, compared exactly as `b·L <= b·L* + a·P`.
///
/// # Panics
/// If `optimum < total_processing`, which no real optimum can satisfy.
pub fn check_eps_optimal(lateness: Time, optimum: Time, eps: Epsilon, total_processing: Time) -> bool {
    assert!(optimum >= total_processing, "optimum {optimum} below total processing {total_processing}");
    let (a, b) = (eps.numer() as i128, eps.denom() as i128);
    b * lateness as i128 <= b * optimum as i128 + a * total_processing as i128
}

/// Which placement the absorption chain runs on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementChoice {
    /// The best valid placement found by [`enum_ptas`].
    BestPtas,
    Fixed(Placement),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorptionConfig {
    pub eps: Epsilon,
    pub runs: usize,
    /// Defaults to `n^4`.
    pub step_cap: Option<u64>,
    pub seed: u64,
    pub placement: PlacementChoice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsorptionRun {
    pub run: usize,
    pub seed: u64,
    pub absorbed: bool,
    /// Local steps until the full prefix was reached, or the cap.
    pub steps: u64,
    pub final_prefix: usize,
    /// The prefix length never decreased along the trajectory.
    pub prefix_monotone: bool,
    /// Final schedule equals the greedy Jackson schedule of the placement.
    pub at_target: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorptionStats {
    pub runs: usize,
    pub step_cap: u64,
    pub placement: Placement,
    pub target: Schedule,
    pub absorbed_within_cap: usize,
    pub times: Vec<u64>,
    pub mean: f64,
    pub max: u64,
    pub records: Vec<AbsorptionRun>,
}

/// Runs the local-only chain from uniform starts inside the placement's
/// class (long jobs pinned, short jobs shuffled) until the full Jackson
/// prefix or the step cap. Run `i` uses seed `seed + i`.
pub fn absorption_experiment(instance: &Instance, config: &AbsorptionConfig) -> Result<AbsorptionStats> {
    let n = instance.len();
    let partition = classify(instance, config.eps);
    let placement = match &config.placement {
        PlacementChoice::BestPtas => enum_ptas(instance, config.eps)?.best_valid.placement,
        PlacementChoice::Fixed(p) => p.clone(),
    };
    let (target, valid) = build_jackson_with(instance, &partition, &placement)?;
    if !valid {
        return Err(Error::InvalidPlacementForAbsorption);
    }
    let step_cap = config.step_cap.unwrap_or_else(|| (n as u64).saturating_pow(4));
    let records: Vec<AbsorptionRun> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = RngStream::derived(config.seed, run as u64);
            absorb_once(instance, &partition, &placement, &target, step_cap, run, &mut rng)
        })
        .collect();
    let times: Vec<u64> = records.iter().map(|r| r.steps).collect();
    let mean = if times.is_empty() { 0.0 } else { times.iter().sum::<u64>() as f64 / times.len() as f64 };
    Ok(AbsorptionStats {
        runs: config.runs,
        step_cap,
        absorbed_within_cap: records.iter().filter(|r| r.absorbed).count(),
        max: times.iter().copied().max().unwrap_or(0),
        mean,
        times,
        placement,
        target,
        records,
    })
}

/// Uniform schedule among those realizing `placement`.
pub fn random_schedule_in_class(partition: &DeltaPartition, placement: &Placement, rng: &mut RngStream) -> Schedule {
    let n = partition.num_jobs();
    let mut shorts = partition.short_jobs().to_vec();
    rng.shuffle(&mut shorts);
    let mut shorts = shorts.into_iter();
    let order =
        (0..n).map(|pos| placement.job_at(pos).unwrap_or_else(|| shorts.next().expect("enough short jobs"))).collect();
    Schedule::new(order).expect("placement plus shuffled short jobs is a permutation")
}

fn absorb_once(
    instance: &Instance,
    partition: &DeltaPartition,
    placement: &Placement,
    target: &Schedule,
    step_cap: u64,
    run: usize,
    rng: &mut RngStream,
) -> AbsorptionRun {
    let n = instance.len();
    let seed = rng.seed();
    let mut order = random_schedule_in_class(partition, placement, rng).order().to_vec();
    let mut k = prefix_against(instance, partition, placement, &order).k;
    let mut monotone = true;
    let mut steps = 0;
    while k < n && steps < step_cap {
        let (i, j) = rng.pair(n);
        steps += 1;
        if local_move(instance, partition, &mut order, i, j) {
            let next = prefix_against(instance, partition, placement, &order).k;
            monotone &= next >= k;
            k = next;
        }
    }
    AbsorptionRun {
        run,
        seed,
        absorbed: k == n,
        steps,
        final_prefix: k,
        prefix_monotone: monotone,
        at_target: order == target.order(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitRun {
    pub run: usize,
    pub seed: u64,
    /// First step at which `current` realized the target placement.
    pub first_hit_step: Option<u64>,
    /// Steps from the hit until the next global mutation (or the end of the
    /// budget).
    pub window_after_hit: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingStats {
    pub runs: usize,
    pub budget: u64,
    pub target: Placement,
    pub hits_within_budget: usize,
    pub first_hit_steps: Vec<Option<u64>>,
    pub records: Vec<HitRun>,
}

/// Runs the full EA `runs` times (seed `config.seed + i`) and records when
/// the current individual first enters the target placement's class.
pub fn hitting_experiment(
    instance: &Instance,
    config: &EaConfig,
    runs: usize,
    target: &Placement,
) -> Result<HittingStats> {
    let partition = classify(instance, config.eps);
    target.check_against(&partition)?;
    let budget = config.effective_budget(instance.len())?;
    let records: Vec<HitRun> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let cfg = config.clone().with_seed(config.seed.wrapping_add(run as u64));
            hit_once(instance, &cfg, &partition, target, budget, run)
        })
        .collect();
    Ok(HittingStats {
        runs,
        budget,
        target: target.clone(),
        hits_within_budget: records.iter().filter(|r| r.first_hit_step.is_some()).count(),
        first_hit_steps: records.iter().map(|r| r.first_hit_step).collect(),
        records,
    })
}

fn hit_once(
    instance: &Instance,
    config: &EaConfig,
    partition: &DeltaPartition,
    target: &Placement,
    budget: u64,
    run: usize,
) -> HitRun {
    let mut ea = HybridEa::new(instance, config);
    let in_target = |ea: &HybridEa| placement_of(partition, ea.state().current.order()) == *target;
    let mut first_hit = in_target(&ea).then_some(0);
    while first_hit.is_none() && ea.state().step < budget {
        // local steps never change the placement
        if ea.step() == MutationKind::Global && in_target(&ea) {
            first_hit = Some(ea.state().step);
        }
    }
    let window = first_hit.map(|hit| {
        while ea.state().step < budget {
            if ea.step() == MutationKind::Global {
                return ea.state().step - 1 - hit;
            }
        }
        budget - hit
    });
    HitRun { run, seed: config.seed, first_hit_step: first_hit, window_after_hit: window }
}
