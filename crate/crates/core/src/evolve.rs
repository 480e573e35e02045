//! Local and global mutation, the hybrid 2+2 EA and its step budget.
//!
//! The population is a pair: `current` is mutated every step, `best` keeps
//! the fittest schedule seen so far and is only replaced on strict
//! improvement.

use std::io::Write;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jackson::{classify, placement_of, prefix_of, DeltaPartition};
use crate::model::{Epsilon, Instance, Schedule, StartCase, Time};
use crate::rng::RngStream;

pub const DEFAULT_GLOBAL_EXPONENT: u32 = 5;

/// Budgets above this need an explicit max-steps override.
pub const DEFAULT_BUDGET_CAP: u128 = 1_000_000_000;

/// Applies the local operator to the pair of positions `i < j`.
///
/// Long jobs never move. Otherwise, with `m` the time the machine frees up
/// before position `i`, the two jobs are swapped when
/// - `r_i > m`: `r_i > r_j`, or `r_i == r_j` and job `j` has delivery priority;
/// - `r_i <= m`: job `j` is released by `m` and has delivery priority.
///
/// Returns whether the swap happened.
pub fn local_move(instance: &Instance, partition: &DeltaPartition, order: &mut [usize], i: usize, j: usize) -> bool {
    debug_assert!(i < j && j < order.len());
    let (a, b) = (order[i], order[j]);
    if partition.is_long(a) || partition.is_long(b) {
        return false;
    }
    let free = instance.machine_free_before(order, i);
    let (ra, rb) = (instance.job(a).release, instance.job(b).release);
    let swap = match StartCase::classify(free, ra) {
        StartCase::Case1 => ra > rb || (ra == rb && instance.delivery_precedes(b, a)),
        StartCase::Case2 | StartCase::Case3 => rb <= free && instance.delivery_precedes(b, a),
    };
    if swap {
        order.swap(i, j);
    }
    swap
}

/// One application of the local operator with a uniformly drawn pair.
pub fn local_mutation(instance: &Instance, eps: Epsilon, schedule: &Schedule, rng: &mut RngStream) -> Schedule {
    let partition = classify(instance, eps);
    let mut out = schedule.clone();
    if out.len() >= 2 {
        let (i, j) = rng.pair(out.len());
        local_move(instance, &partition, out.order_mut(), i, j);
    }
    out
}

/// A uniformly random schedule; the input schedule plays no role.
pub fn global_mutation(n: usize, rng: &mut RngStream) -> Schedule {
    Schedule::new(rng.permutation(n)).expect("shuffled identity is a permutation")
}

/// Smallest `x` with `x^den >= n^num`, saturating at `u128::MAX`.
fn ceil_rational_power(n: u128, num: u64, den: u64) -> u128 {
    if n <= 1 {
        return n;
    }
    if den == 1 {
        return u32::try_from(num).ok().and_then(|e| n.checked_pow(e)).unwrap_or(u128::MAX);
    }
    let estimate = (num as f64 / den as f64 * (n as f64).ln()).exp();
    if !estimate.is_finite() || estimate > 1e36 {
        return u128::MAX;
    }
    let mut x = estimate.ceil() as u128;
    if den > 1024 {
        return x;
    }
    // fix up rounding in the float estimate with exact integer powers
    let target = BigUint::from(n).pow(num as u32);
    let exp = den as u32;
    while BigUint::from(x).pow(exp) < target {
        x += 1;
    }
    while x > 1 && BigUint::from(x - 1).pow(exp) >= target {
        x -= 1;
    }
    x
}

/// Step budget `λ · (⌈n^{1/ε + 6}⌉ + n^4)`, saturating at `u128::MAX`.
pub fn budget(n: usize, eps: Epsilon, lambda: u64) -> u128 {
    let n = n as u128;
    // 1/ε + 6 = (b + 6a) / a
    let num = eps.denom().saturating_add(eps.numer().saturating_mul(6));
    let main = ceil_rational_power(n, num, eps.numer());
    let quartic = n.saturating_pow(4);
    (lambda as u128).saturating_mul(main.saturating_add(quartic))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    /// Two independent uniform permutations.
    #[default]
    Random,
    Identity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EaConfig {
    pub eps: Epsilon,
    /// Global mutation happens with probability `n^-global_exponent`.
    pub global_exponent: u32,
    pub lambda: u64,
    pub max_steps: Option<u64>,
    pub init: Init,
    pub seed: u64,
    pub budget_cap: u128,
}

impl EaConfig {
    pub fn new(eps: Epsilon, seed: u64) -> Self {
        EaConfig {
            eps,
            global_exponent: DEFAULT_GLOBAL_EXPONENT,
            lambda: 1,
            max_steps: None,
            init: Init::Random,
            seed,
            budget_cap: DEFAULT_BUDGET_CAP,
        }
    }

    pub fn with_max_steps(mut self, steps: u64) -> Self {
        self.max_steps = Some(steps);
        self
    }

    pub fn with_global_exponent(mut self, g: u32) -> Self {
        self.global_exponent = g;
        self
    }

    pub fn with_init(mut self, init: Init) -> Self {
        self.init = init;
        self
    }

    pub fn with_lambda(mut self, lambda: u64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// `min(max_steps, budget)`; without an override the budget must fit
    /// under `budget_cap`.
    pub fn effective_budget(&self, n: usize) -> Result<u64> {
        let full = budget(n, self.eps, self.lambda);
        let steps = match self.max_steps {
            Some(m) => full.min(m as u128),
            None if full > self.budget_cap => return Err(Error::BudgetTooLarge { budget: full, cap: self.budget_cap }),
            None => full,
        };
        if steps > i64::MAX as u128 {
            return Err(Error::BudgetTooLarge { budget: steps, cap: i64::MAX as u128 });
        }
        Ok(steps as u64)
    }

    /// Denominator `d` of the global mutation probability `1/d = n^-g`.
    pub fn global_denominator(&self, n: usize) -> u128 {
        (n as u128).saturating_pow(self.global_exponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MutationKind {
    Local,
    Global,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EaState {
    pub current: Schedule,
    pub current_lateness: Time,
    pub best: Schedule,
    pub best_lateness: Time,
    pub step: u64,
}

impl EaState {
    pub fn new(instance: &Instance, current: Schedule, best: Schedule) -> Self {
        EaState {
            current_lateness: instance.lateness_of(current.order()),
            best_lateness: instance.lateness_of(best.order()),
            current,
            best,
            step: 0,
        }
    }

    pub fn initial(instance: &Instance, init: Init, rng: &mut RngStream) -> Self {
        let n = instance.len();
        match init {
            Init::Random => {
                let current = global_mutation(n, rng);
                let best = global_mutation(n, rng);
                EaState::new(instance, current, best)
            }
            Init::Identity => EaState::new(instance, Schedule::identity(n), Schedule::identity(n)),
        }
    }
}

/// One row of the step trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTrace {
    pub step: u64,
    pub op: MutationKind,
    pub prefix_k: usize,
    #[serde(rename = "current_L")]
    pub current_lateness: Time,
    #[serde(rename = "best_L")]
    pub best_lateness: Time,
    pub placement_changed: bool,
}

/// A concrete mutation, either drawn at random or supplied by a caller.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Move {
    /// Local operator on positions `(i, j)`, `i < j`; `None` when `n < 2`.
    Local(Option<(usize, usize)>),
    Global(Schedule),
}

impl Move {
    pub fn kind(&self) -> MutationKind {
        match self {
            Move::Local(_) => MutationKind::Local,
            Move::Global(_) => MutationKind::Global,
        }
    }
}

/// The hybrid EA over one instance, owning its population and random stream.
pub struct HybridEa<'a> {
    instance: &'a Instance,
    partition: DeltaPartition,
    global_denominator: u128,
    rng: RngStream,
    state: EaState,
}

impl<'a> HybridEa<'a> {
    pub fn new(instance: &'a Instance, config: &EaConfig) -> Self {
        let mut rng = RngStream::new(config.seed);
        let state = EaState::initial(instance, config.init, &mut rng);
        Self::resume(instance, config, state, rng)
    }

    pub fn resume(instance: &'a Instance, config: &EaConfig, state: EaState, rng: RngStream) -> Self {
        HybridEa {
            instance,
            partition: classify(instance, config.eps),
            global_denominator: config.global_denominator(instance.len()),
            rng,
            state,
        }
    }

    pub fn state(&self) -> &EaState {
        &self.state
    }

    pub fn into_parts(self) -> (EaState, RngStream) {
        (self.state, self.rng)
    }

    pub fn partition(&self) -> &DeltaPartition {
        &self.partition
    }

    pub fn draw_move(&mut self) -> Move {
        let n = self.instance.len();
        if self.rng.bernoulli(1, self.global_denominator) {
            Move::Global(global_mutation(n, &mut self.rng))
        } else if n >= 2 {
            Move::Local(Some(self.rng.pair(n)))
        } else {
            Move::Local(None)
        }
    }

    /// Applies `mv` to the current individual, then the selection rule.
    pub fn apply(&mut self, mv: Move) -> MutationKind {
        let kind = mv.kind();
        let state = &mut self.state;
        match mv {
            Move::Global(schedule) => {
                state.current_lateness = self.instance.lateness_of(schedule.order());
                state.current = schedule;
            }
            Move::Local(Some((i, j))) => {
                if local_move(self.instance, &self.partition, state.current.order_mut(), i, j) {
                    state.current_lateness = self.instance.lateness_of(state.current.order());
                }
            }
            Move::Local(None) => {}
        }
        if state.current_lateness < state.best_lateness {
            state.best.clone_from(&state.current);
            state.best_lateness = state.current_lateness;
        }
        state.step += 1;
        kind
    }

    pub fn step(&mut self) -> MutationKind {
        let mv = self.draw_move();
        self.apply(mv)
    }

    /// Same draws as [`step`](Self::step), plus the telemetry row.
    pub fn step_traced(&mut self) -> StepTrace {
        let mv = self.draw_move();
        self.apply_traced(mv)
    }

    pub fn apply_traced(&mut self, mv: Move) -> StepTrace {
        let before = placement_of(&self.partition, self.state.current.order());
        let op = self.apply(mv);
        let after = placement_of(&self.partition, self.state.current.order());
        StepTrace {
            step: self.state.step,
            op,
            prefix_k: prefix_of(self.instance, &self.partition, self.state.current.order()).k,
            current_lateness: self.state.current_lateness,
            best_lateness: self.state.best_lateness,
            placement_changed: before != after,
        }
    }
}

/// One step of the EA as a pure function of its inputs.
pub fn ea_step(instance: &Instance, config: &EaConfig, state: &EaState, rng: &mut RngStream) -> (EaState, StepTrace) {
    let mut ea = HybridEa::resume(instance, config, state.clone(), rng.clone());
    let trace = ea.step_traced();
    let (state, advanced) = ea.into_parts();
    *rng = advanced;
    (state, trace)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EaResult {
    pub schedule: Schedule,
    pub lateness: Time,
    pub steps: u64,
    pub first_success_step: Option<u64>,
    pub seed: u64,
    pub config: EaConfig,
}

/// Receives every step of a traced run, in order.
pub type TraceSink<'a> = &'a mut dyn FnMut(&StepTrace) -> Result<()>;

/// Runs the EA for its effective budget.
///
/// `target` is a lateness the caller considers good enough (e.g. `L* + δ`);
/// `first_success_step` reports when `best` first reached it. Every step is
/// handed to `trace` in order when a sink is given.
pub fn run_ea(
    instance: &Instance,
    config: &EaConfig,
    target: Option<Time>,
    mut trace: Option<TraceSink<'_>>,
) -> Result<EaResult> {
    let steps = config.effective_budget(instance.len())?;
    let mut ea = HybridEa::new(instance, config);
    let reached = |state: &EaState| target.is_some_and(|t| state.best_lateness <= t);
    let mut first_success_step = reached(ea.state()).then_some(0);
    for _ in 0..steps {
        match trace.as_mut() {
            Some(sink) => sink(&ea.step_traced())?,
            None => {
                ea.step();
            }
        }
        if first_success_step.is_none() && reached(ea.state()) {
            first_success_step = Some(ea.state().step);
        }
    }
    let state = ea.state();
    Ok(EaResult {
        schedule: state.best.clone(),
        lateness: state.best_lateness,
        steps: state.step,
        first_success_step,
        seed: config.seed,
        config: config.clone(),
    })
}

/// Writes step traces as CSV with header
/// `step,op,prefix_k,current_L,best_L,placement_changed`.
pub struct TraceWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        TraceWriter { inner: csv::Writer::from_writer(out) }
    }

    pub fn write(&mut self, row: &StepTrace) -> Result<()> {
        self.inner.serialize(row).map_err(csv_error)
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jackson::{build_jackson_with, jackson_prefix};
    use crate::model::tests::{arb_instance_and_schedule, inst3};
    use itertools::Itertools;
    use proptest::prelude::*;

    fn eps(s: &str) -> Epsilon {
        s.parse().unwrap()
    }

    fn sched(one_based: &[usize]) -> Schedule {
        Schedule::from_one_based(one_based).unwrap()
    }

    fn moved(inst: &Instance, e: &str, s: &[usize], i: usize, j: usize) -> Schedule {
        let part = classify(inst, eps(e));
        let mut order = sched(s).order().to_vec();
        local_move(inst, &part, &mut order, i, j);
        Schedule::new(order).unwrap()
    }

    #[test]
    fn local_mutation_examples() {
        let inst = inst3();
        assert_eq!(moved(&inst, "2", &[2, 1, 3], 0, 1), sched(&[1, 2, 3]));
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(moved(&inst, "2", &[1, 2, 3], i, j), sched(&[1, 2, 3]));
        }
        assert_eq!(moved(&inst, "1/3", &[2, 1, 3], 0, 1), sched(&[2, 1, 3]));
    }

    #[test]
    fn local_mutation_single_job_is_identity() {
        let inst = Instance::from_triples(&[(3, 1, 1)]).unwrap();
        let mut rng = RngStream::new(0);
        assert_eq!(local_mutation(&inst, eps("1"), &Schedule::identity(1), &mut rng), Schedule::identity(1));
    }

    #[test]
    fn global_mutation_basics() {
        let mut rng = RngStream::new(5);
        assert_eq!(global_mutation(1, &mut rng), Schedule::identity(1));
        for _ in 0..100 {
            let s = global_mutation(4, &mut rng);
            let mut sorted = s.order().to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn global_mutation_n3_chi_square() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        let mut rng = RngStream::new(2024);
        let mut counts = std::collections::HashMap::new();
        for _ in 0..60_000 {
            *counts.entry(global_mutation(3, &mut rng)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 6);
        let stat: f64 = counts.values().map(|&c| (c as f64 - 10_000.0).powi(2) / 10_000.0).sum();
        let p = 1.0 - ChiSquared::new(5.0).unwrap().cdf(stat);
        assert!(p > 0.001, "chi-square {stat}, p = {p}");
        assert!(counts.values().all(|&c| (9_500..=10_500).contains(&c)));
    }

    #[test]
    fn budget_examples() {
        assert_eq!(budget(5, eps("1"), 1), 78_750);
        assert_eq!(budget(1, eps("1/3"), 1), 2);
        assert_eq!(budget(1, eps("7/2"), 1), 2);
        assert_eq!(budget(7, eps("1"), 1), 825_944);
        assert_eq!(budget(5, eps("1/2"), 1), 391_250);
        assert_eq!(budget(5, eps("1"), 3), 3 * 78_750);
        // 3^6.5 = 1262.67..
        assert_eq!(budget(3, eps("2"), 1), 1263 + 81);
        // 4^6.5 = 8192 exactly
        assert_eq!(budget(4, eps("2"), 1), 8192 + 256);
        assert_eq!(budget(1000, eps("1/100"), 1), u128::MAX);
    }

    #[test]
    fn rational_power_is_exact_ceiling() {
        for n in 2u128..30 {
            for (num, den) in [(13u64, 2u64), (20, 3), (7, 4), (19, 6)] {
                let x = ceil_rational_power(n, num, den);
                let target = BigUint::from(n).pow(num as u32);
                assert!(BigUint::from(x).pow(den as u32) >= target);
                assert!(BigUint::from(x - 1).pow(den as u32) < target);
            }
        }
    }

    #[test]
    fn effective_budget_rules() {
        let cfg = EaConfig::new(eps("1"), 0);
        assert_eq!(cfg.effective_budget(5).unwrap(), 78_750);
        assert_eq!(cfg.clone().with_max_steps(100).effective_budget(5).unwrap(), 100);
        assert_eq!(cfg.clone().with_max_steps(10_000_000).effective_budget(5).unwrap(), 78_750);
        assert!(matches!(cfg.effective_budget(40), Err(Error::BudgetTooLarge { .. })));
        assert_eq!(cfg.clone().with_max_steps(1000).effective_budget(40).unwrap(), 1000);
        let huge = cfg.with_max_steps(u64::MAX);
        assert!(matches!(huge.effective_budget(1000), Err(Error::BudgetTooLarge { .. })));
    }

    #[test]
    fn ea_step_examples() {
        let inst = inst3();
        let cfg = EaConfig::new(eps("2"), 0);

        // fixed point: nothing but the step counter changes
        let jackson = sched(&[1, 2, 3]);
        let state = EaState::new(&inst, jackson.clone(), jackson.clone());
        let mut ea = HybridEa::resume(&inst, &cfg, state.clone(), RngStream::new(0));
        for pair in [(0, 1), (0, 2), (1, 2)] {
            ea.apply(Move::Local(Some(pair)));
        }
        assert_eq!(ea.state().current, jackson);
        assert_eq!(ea.state().best, jackson);
        assert_eq!(ea.state().step, 3);

        // local improvement replaces best
        let start = sched(&[2, 1, 3]);
        let state = EaState::new(&inst, start.clone(), start);
        assert_eq!(state.best_lateness, 13);
        let mut ea = HybridEa::resume(&inst, &cfg, state, RngStream::new(0));
        let trace = ea.apply_traced(Move::Local(Some((0, 1))));
        assert_eq!(ea.state().current, jackson);
        assert_eq!(ea.state().best, jackson);
        assert_eq!(ea.state().best_lateness, 12);
        assert_eq!(trace.current_lateness, 12);
        assert_eq!(trace.prefix_k, 3);
        assert!(!trace.placement_changed);

        // a global mutant that is not strictly better leaves best alone
        let state = EaState::new(&inst, sched(&[1, 3, 2]), sched(&[1, 3, 2]));
        let mut ea = HybridEa::resume(&inst, &cfg, state, RngStream::new(0));
        ea.apply(Move::Global(sched(&[3, 2, 1])));
        assert_eq!(ea.state().current_lateness, 15);
        assert_eq!(ea.state().best, sched(&[1, 3, 2]));
        assert_eq!(ea.state().best_lateness, 11);
        // equal fitness does not replace either
        ea.apply(Move::Global(sched(&[1, 2, 3])));
        ea.apply(Move::Global(sched(&[2, 3, 1])));
        assert_eq!(ea.state().best, sched(&[1, 3, 2]));
    }

    #[test]
    fn functional_step_matches_engine() {
        let inst = inst3();
        let cfg = EaConfig::new(eps("1/3"), 9).with_global_exponent(1);
        let mut rng = RngStream::new(9);
        let mut state = EaState::initial(&inst, cfg.init, &mut rng);
        let mut ea = HybridEa::new(&inst, &cfg);
        for _ in 0..200 {
            let (next, trace) = ea_step(&inst, &cfg, &state, &mut rng);
            let engine_trace = ea.step_traced();
            assert_eq!(trace, engine_trace);
            assert_eq!(&next, ea.state());
            state = next;
        }
    }

    #[test]
    fn run_ea_examples() {
        let inst = inst3();
        let cfg = EaConfig::new(eps("2"), 17).with_max_steps(10_000);
        let res = run_ea(&inst, &cfg, Some(17), None).unwrap();
        assert_eq!(res.steps, 1344);
        assert!(res.lateness <= 12);
        assert_eq!(res.first_success_step, Some(0));

        let single = Instance::from_triples(&[(4, 3, 2)]).unwrap();
        let res = run_ea(&single, &EaConfig::new(eps("1/2"), 1), Some(9), None).unwrap();
        assert_eq!(res.lateness, 9);
        assert_eq!(res.first_success_step, Some(0));
    }

    #[test]
    fn run_ea_reaches_eps_optimum_on_inst3() {
        // L* = 11, delta = 2
        let inst = inst3();
        let hits = (0..100u64)
            .filter(|&seed| {
                let cfg = EaConfig::new(eps("1/3"), seed).with_max_steps(100_000);
                run_ea(&inst, &cfg, Some(13), None).unwrap().lateness <= 13
            })
            .count();
        assert!(hits >= 90, "{hits} of 100 runs reached L* + delta");
    }

    #[test]
    fn best_is_monotone_and_runs_are_deterministic() {
        let inst = Instance::from_triples(&[(0, 3, 4), (2, 1, 9), (2, 2, 7), (5, 4, 1), (1, 1, 0), (3, 2, 3)]).unwrap();
        let cfg = EaConfig::new(eps("1/2"), 77).with_max_steps(5_000).with_global_exponent(2);
        let collect = || {
            let mut rows = Vec::new();
            let mut sink = |t: &StepTrace| -> Result<()> {
                rows.push(t.clone());
                Ok(())
            };
            let res = run_ea(&inst, &cfg, None, Some(&mut sink)).unwrap();
            (res, rows)
        };
        let (a, rows_a) = collect();
        let (b, rows_b) = collect();
        assert_eq!(a, b);
        assert_eq!(rows_a, rows_b);
        assert_eq!(rows_a.len(), 5_000);
        assert!(rows_a.windows(2).all(|w| w[1].best_lateness <= w[0].best_lateness));
        assert!(rows_a.iter().all(|r| r.op == MutationKind::Global || !r.placement_changed));
        let untraced = run_ea(&inst, &cfg, None, None).unwrap();
        assert_eq!(untraced, a);
    }

    #[test]
    fn global_rate_matches_probability() {
        // n = 4, g = 3: rate 1/64 over 10^6 steps
        let inst = Instance::from_triples(&[(0, 1, 1), (1, 2, 2), (2, 3, 3), (3, 1, 4)]).unwrap();
        let cfg = EaConfig::new(eps("1"), 11).with_global_exponent(3);
        let mut ea = HybridEa::new(&inst, &cfg);
        let steps = 1_000_000u64;
        let globals = (0..steps).filter(|_| ea.step() == MutationKind::Global).count() as f64;
        let p = 1.0 / 64.0;
        let mean = steps as f64 * p;
        let sd = (steps as f64 * p * (1.0 - p)).sqrt();
        assert!((globals - mean).abs() <= 3.0 * sd, "{globals} globals, expected {mean} ± {sd}");
    }

    #[test]
    fn trace_csv_header() {
        let mut buf = Vec::new();
        let mut w = TraceWriter::new(&mut buf);
        w.write(&StepTrace {
            step: 1,
            op: MutationKind::Local,
            prefix_k: 2,
            current_lateness: 12,
            best_lateness: 11,
            placement_changed: false,
        })
        .unwrap();
        w.finish().unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,op,prefix_k,current_L,best_L,placement_changed\n1,Local,2,12,11,false\n"
        );
    }

    fn all_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
        (0..n).tuple_combinations()
    }

    proptest! {
        #[test]
        fn local_move_keeps_long_jobs_and_prefix(
            (inst, s) in arb_instance_and_schedule(7),
            a in 1u64..4, b in 1u64..6,
        ) {
            let e = Epsilon::new(a, b).unwrap();
            let part = classify(&inst, e);
            let before = jackson_prefix(&inst, e, &s);
            let placement = placement_of(&part, s.order());
            for (i, j) in all_pairs(inst.len()) {
                let mut order = s.order().to_vec();
                let swapped = local_move(&inst, &part, &mut order, i, j);
                prop_assert_eq!(placement_of(&part, &order), placement.clone());
                let after = prefix_of(&inst, &part, &order);
                prop_assert!(after.k >= before.k);
                if before.is_full() {
                    prop_assert!(!swapped);
                }
                let diff = (0..inst.len()).filter(|&p| order[p] != s.order()[p]).collect::<Vec<_>>();
                prop_assert!(diff.is_empty() || diff == vec![i, j]);
            }
        }

        #[test]
        fn exactly_one_pair_makes_progress(
            (inst, s) in arb_instance_and_schedule(7),
            a in 1u64..4, b in 1u64..6,
        ) {
            let e = Epsilon::new(a, b).unwrap();
            let part = classify(&inst, e);
            let before = prefix_of(&inst, &part, s.order());
            let placement = placement_of(&part, s.order());
            let (_, valid) = build_jackson_with(&inst, &part, &placement).unwrap();
            prop_assume!(!before.is_full() && valid);
            let progress = all_pairs(inst.len())
                .filter(|&(i, j)| {
                    let mut order = s.order().to_vec();
                    local_move(&inst, &part, &mut order, i, j);
                    prefix_of(&inst, &part, &order).k > before.k
                })
                .count();
            prop_assert_eq!(progress, 1);
        }
    }
}
