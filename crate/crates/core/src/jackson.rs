//! Long/short classification, placements of long jobs, the Jackson prefix
//! check and the greedy construction of the Jackson schedule for a placement.

use itertools::Itertools;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{Epsilon, Instance, Schedule, StartCase, Time};

/// Default cap on the number of placements [`enumerate_placements`] accepts.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Split of the jobs into short (`p < δ`) and long (`p >= δ`) ones, `δ = εP`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaPartition {
    eps: Epsilon,
    long: Vec<bool>,
    short_jobs: Vec<usize>,
    long_jobs: Vec<usize>,
}

impl DeltaPartition {
    pub fn new(instance: &Instance, eps: Epsilon) -> Self {
        let long: Vec<bool> = (0..instance.len()).map(|j| instance.is_long(eps, j)).collect();
        let (long_jobs, short_jobs) = (0..instance.len()).partition(|&j| long[j]);
        DeltaPartition { eps, long, short_jobs, long_jobs }
    }

    #[inline]
    pub fn eps(&self) -> Epsilon {
        self.eps
    }

    #[inline]
    pub fn is_long(&self, job: usize) -> bool {
        self.long[job]
    }

    pub fn short_jobs(&self) -> &[usize] {
        &self.short_jobs
    }

    /// Long jobs in increasing index order.
    pub fn long_jobs(&self) -> &[usize] {
        &self.long_jobs
    }

    pub fn num_jobs(&self) -> usize {
        self.long.len()
    }
}

pub fn classify(instance: &Instance, eps: Epsilon) -> DeltaPartition {
    DeltaPartition::new(instance, eps)
}

/// Positions `I` of the long jobs together with the bijection `φ: I → B_δ`.
///
/// `positions` is sorted and `jobs[k]` is the long job placed at
/// `positions[k]`. Serialized as `[[position, job], ...]`, both 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Placement {
    positions: Vec<usize>,
    jobs: Vec<usize>,
}

impl Placement {
    /// Builds a placement from `(position, job)` pairs in any order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs: Vec<(usize, usize)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InconsistentPlacement("a position is used twice".into()));
        }
        let (positions, jobs) = pairs.into_iter().unzip();
        Ok(Placement { positions, jobs })
    }

    pub fn empty() -> Self {
        Placement::default()
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn jobs(&self) -> &[usize] {
        &self.jobs
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.positions.iter().copied().zip(self.jobs.iter().copied())
    }

    /// The long job assigned to `position`, if the position is in `I`.
    pub fn job_at(&self, position: usize) -> Option<usize> {
        self.positions.binary_search(&position).ok().map(|k| self.jobs[k])
    }

    /// Checks that this is a bijection from `n` valid positions onto the long
    /// jobs of `partition`.
    pub fn check_against(&self, partition: &DeltaPartition) -> Result<()> {
        let n = partition.num_jobs();
        if let Some(&p) = self.positions.iter().find(|&&p| p >= n) {
            return Err(Error::InconsistentPlacement(format!("position {} out of range", p + 1)));
        }
        let mut image = self.jobs.clone();
        image.sort_unstable();
        if image != partition.long_jobs() {
            return Err(Error::InconsistentPlacement("assignment is not a bijection onto the long jobs".into()));
        }
        Ok(())
    }

    pub fn to_one_based_pairs(&self) -> Vec<[usize; 2]> {
        self.pairs().map(|(p, j)| [p + 1, j + 1]).collect()
    }

    pub fn from_one_based_pairs(pairs: &[[usize; 2]]) -> Result<Self> {
        let zero = pairs
            .iter()
            .map(|&[p, j]| match (p.checked_sub(1), j.checked_sub(1)) {
                (Some(p), Some(j)) => Ok((p, j)),
                _ => Err(Error::InconsistentPlacement("placement entries are 1-based".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Placement::from_pairs(zero)
    }
}

impl Serialize for Placement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based_pairs().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Placement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[usize; 2]>::deserialize(d)?;
        Placement::from_one_based_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

/// The placement `schedule` realizes: where its long jobs sit.
pub fn placement_of(partition: &DeltaPartition, order: &[usize]) -> Placement {
    let (positions, jobs) =
        order.iter().enumerate().filter(|&(_, &j)| partition.is_long(j)).map(|(i, &j)| (i, j)).unzip();
    Placement { positions, jobs }
}

pub fn extract_placement(instance: &Instance, eps: Epsilon, schedule: &Schedule) -> Placement {
    placement_of(&classify(instance, eps), schedule.order())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationReason {
    /// A position in `I` does not hold its assigned long job, or a long job
    /// sits outside `I`.
    WrongLongJob,
    /// Case 1 position followed by a job released strictly earlier.
    Case1ReleaseOrder,
    /// Case 1 position followed by a job with the same release and higher
    /// delivery priority.
    Case1DeliveryTie,
    /// Case 2/3 position followed by an already released job with higher
    /// delivery priority.
    Case23Delivery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub position: usize,
    pub reason: ViolationReason,
}

/// Length of the maximal Jackson prefix and the first position breaking it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixReport {
    pub k: usize,
    pub first_violation: Option<Violation>,
}

impl PrefixReport {
    pub fn is_full(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Checks the Jackson conditions position by position against `placement`.
///
/// A short position `j` starting at `s_j` after the machine frees up at `m_j`
/// passes when, for every later position `l`:
/// - `m_j < r_j`: `r_l > r_j`, or `r_l == r_j` and job `j` has delivery priority;
/// - otherwise: `r_l > s_j`, or job `j` has delivery priority.
pub fn prefix_against(
    instance: &Instance,
    partition: &DeltaPartition,
    placement: &Placement,
    order: &[usize],
) -> PrefixReport {
    let n = order.len();
    let mut free: Time = 0;
    for (pos, &job) in order.iter().enumerate() {
        let violation = |reason| PrefixReport { k: pos, first_violation: Some(Violation { position: pos, reason }) };
        let here = instance.job(job);
        match placement.job_at(pos) {
            Some(assigned) if assigned != job => return violation(ViolationReason::WrongLongJob),
            Some(_) => {}
            None if partition.is_long(job) => return violation(ViolationReason::WrongLongJob),
            None => {
                let start = free.max(here.release);
                let later = order[pos + 1..].iter().copied();
                match StartCase::classify(free, here.release) {
                    StartCase::Case1 => {
                        for other in later {
                            let r = instance.job(other).release;
                            if r < here.release {
                                return violation(ViolationReason::Case1ReleaseOrder);
                            }
                            if r == here.release && !instance.delivery_precedes(job, other) {
                                return violation(ViolationReason::Case1DeliveryTie);
                            }
                        }
                    }
                    StartCase::Case2 | StartCase::Case3 => {
                        for other in later {
                            if instance.job(other).release <= start && !instance.delivery_precedes(job, other) {
                                return violation(ViolationReason::Case23Delivery);
                            }
                        }
                    }
                }
            }
        }
        free = free.max(here.release) + here.processing;
    }
    PrefixReport { k: n, first_violation: None }
}

/// Maximal Jackson prefix of `schedule` under its own extracted placement.
pub fn jackson_prefix(instance: &Instance, eps: Epsilon, schedule: &Schedule) -> PrefixReport {
    let partition = classify(instance, eps);
    prefix_of(instance, &partition, schedule.order())
}

pub fn prefix_of(instance: &Instance, partition: &DeltaPartition, order: &[usize]) -> PrefixReport {
    let placement = placement_of(partition, order);
    prefix_against(instance, partition, &placement, order)
}

/// Greedy left-to-right construction of the Jackson schedule for `placement`.
///
/// Returns the schedule and whether it passes the full prefix check. When it
/// does, it is the only schedule in the placement's class that does.
pub fn build_jackson(instance: &Instance, eps: Epsilon, placement: &Placement) -> Result<(Schedule, bool)> {
    build_jackson_with(instance, &classify(instance, eps), placement)
}

pub fn build_jackson_with(
    instance: &Instance,
    partition: &DeltaPartition,
    placement: &Placement,
) -> Result<(Schedule, bool)> {
    placement.check_against(partition)?;
    let n = instance.len();
    let mut pending: Vec<usize> = partition.short_jobs().to_vec();
    let mut order = Vec::with_capacity(n);
    let mut free: Time = 0;
    for pos in 0..n {
        let job = match placement.job_at(pos) {
            Some(job) => job,
            None => {
                let released = pending
                    .iter()
                    .enumerate()
                    .filter(|&(_, &j)| instance.job(j).release <= free)
                    .reduce(|best, cand| if instance.delivery_precedes(*cand.1, *best.1) { cand } else { best });
                let (slot, _) = released.unwrap_or_else(|| {
                    pending
                        .iter()
                        .enumerate()
                        .reduce(|best, cand| {
                            let (rb, rc) = (instance.job(*best.1).release, instance.job(*cand.1).release);
                            if rc < rb || (rc == rb && instance.delivery_precedes(*cand.1, *best.1)) {
                                cand
                            } else {
                                best
                            }
                        })
                        .expect("a short position always has a pending short job")
                });
                pending.swap_remove(slot)
            }
        };
        let j = instance.job(job);
        free = free.max(j.release) + j.processing;
        order.push(job);
    }
    let schedule = Schedule::new(order).expect("greedy construction yields a permutation");
    let valid = prefix_against(instance, partition, placement, schedule.order()).is_full();
    Ok((schedule, valid))
}

/// `n! / (n - b)!` in saturating 128-bit arithmetic.
pub fn placement_count(n: usize, long: usize) -> u128 {
    if long > n {
        return 0;
    }
    (0..long).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128))
}

/// `n^⌈1/ε⌉`, saturating.
pub fn placement_bound(n: usize, eps: Epsilon) -> u128 {
    let e = u32::try_from(eps.reciprocal_ceil()).unwrap_or(u32::MAX);
    (n as u128).checked_pow(e).unwrap_or(u128::MAX)
}

/// Every placement for the instance, in a fixed order: position sets in
/// lexicographic order, then assignments in lexicographic order of the image
/// sequence.
pub struct PlacementEnumeration {
    count: u128,
    iter: Box<dyn Iterator<Item = Placement> + Send>,
}

impl PlacementEnumeration {
    pub fn total(&self) -> u128 {
        self.count
    }
}

impl Iterator for PlacementEnumeration {
    type Item = Placement;

    fn next(&mut self) -> Option<Placement> {
        self.iter.next()
    }
}

pub fn enumerate_placements(instance: &Instance, eps: Epsilon, cap: u128) -> Result<PlacementEnumeration> {
    enumerate_with(&classify(instance, eps), cap)
}

pub fn enumerate_with(partition: &DeltaPartition, cap: u128) -> Result<PlacementEnumeration> {
    let n = partition.num_jobs();
    let long = partition.long_jobs().to_vec();
    let b = long.len();
    let eps = partition.eps();
    assert!((b as u128) * (eps.numer() as u128) <= eps.denom() as u128, "more than 1/eps long jobs");
    let count = placement_count(n, b);
    assert!(count <= placement_bound(n, eps), "placement count above n^ceil(1/eps)");
    if count > cap {
        return Err(Error::EnumerationTooLarge { count, cap });
    }
    let iter = (0..n).combinations(b).flat_map(move |positions| {
        long.clone().into_iter().permutations(b).map(move |jobs| Placement { positions: positions.clone(), jobs })
    });
    Ok(PlacementEnumeration { count, iter: Box::new(iter) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::tests::{arb_instance_and_schedule, inst3};
    use proptest::prelude::*;

    fn eps(s: &str) -> Epsilon {
        s.parse().unwrap()
    }

    fn sched(one_based: &[usize]) -> Schedule {
        Schedule::from_one_based(one_based).unwrap()
    }

    fn placement(one_based: &[[usize; 2]]) -> Placement {
        Placement::from_one_based_pairs(one_based).unwrap()
    }

    #[test]
    fn classify_examples() {
        let inst = inst3();
        let p = classify(&inst, eps("1/3"));
        assert_eq!(p.short_jobs(), &[2]);
        assert_eq!(p.long_jobs(), &[0, 1]);
        let p = classify(&inst, eps("2"));
        assert_eq!(p.short_jobs(), &[0, 1, 2]);
        assert!(p.long_jobs().is_empty());
        let p = classify(&inst, eps("1/6"));
        assert!(p.short_jobs().is_empty());
        assert_eq!(p.long_jobs(), &[0, 1, 2]);
    }

    #[test]
    fn extract_examples() {
        let inst = inst3();
        assert_eq!(extract_placement(&inst, eps("1/3"), &sched(&[1, 3, 2])), placement(&[[1, 1], [3, 2]]));
        assert_eq!(extract_placement(&inst, eps("1/3"), &sched(&[3, 2, 1])), placement(&[[2, 2], [3, 1]]));
        assert!(extract_placement(&inst, eps("2"), &sched(&[2, 3, 1])).is_empty());
    }

    #[test]
    fn prefix_examples() {
        let inst = inst3();
        let r = jackson_prefix(&inst, eps("2"), &sched(&[1, 2, 3]));
        assert_eq!(r, PrefixReport { k: 3, first_violation: None });

        let r = jackson_prefix(&inst, eps("2"), &sched(&[2, 1, 3]));
        assert_eq!(r.k, 0);
        assert_eq!(r.first_violation, Some(Violation { position: 0, reason: ViolationReason::Case1ReleaseOrder }));

        let r = jackson_prefix(&inst, eps("2"), &sched(&[1, 3, 2]));
        assert_eq!(r.k, 1);
        assert_eq!(r.first_violation, Some(Violation { position: 1, reason: ViolationReason::Case1ReleaseOrder }));
    }

    #[test]
    fn prefix_reports_delivery_violations() {
        // both released at 2 while the machine idles, job 2 has the larger delivery time
        let inst = Instance::from_triples(&[(2, 1, 1), (2, 1, 5)]).unwrap();
        let r = jackson_prefix(&inst, eps("2"), &Schedule::identity(2));
        assert_eq!(r.first_violation.unwrap().reason, ViolationReason::Case1DeliveryTie);
        // released exactly when the machine frees up: no idle time, so the delivery rule applies
        let inst = Instance::from_triples(&[(0, 1, 1), (0, 1, 5)]).unwrap();
        let r = jackson_prefix(&inst, eps("2"), &Schedule::identity(2));
        assert_eq!(r.first_violation.unwrap().reason, ViolationReason::Case23Delivery);
        let inst = Instance::from_triples(&[(0, 2, 1), (1, 1, 5), (3, 1, 0)]).unwrap();
        // position 2 idles until r=3 although job 2 (r=1) comes later
        let r = jackson_prefix(&inst, eps("2"), &sched(&[1, 3, 2]));
        assert_eq!(r.k, 1);
        assert_eq!(r.first_violation.unwrap().reason, ViolationReason::Case1ReleaseOrder);
        let inst = Instance::from_triples(&[(0, 2, 9), (0, 1, 1), (1, 1, 5)]).unwrap();
        let r = jackson_prefix(&inst, eps("2"), &sched(&[1, 2, 3]));
        assert_eq!(r.k, 1);
        assert_eq!(r.first_violation.unwrap().reason, ViolationReason::Case23Delivery);
    }

    #[test]
    fn prefix_against_foreign_placement_flags_long_jobs() {
        let inst = inst3();
        let part = classify(&inst, eps("1/3"));
        let r = prefix_against(&inst, &part, &placement(&[[1, 2], [2, 1]]), &[0, 1, 2]);
        assert_eq!(r.first_violation.unwrap(), Violation { position: 0, reason: ViolationReason::WrongLongJob });
        let r = prefix_against(&inst, &part, &placement(&[[2, 1], [3, 2]]), &[0, 1, 2]);
        assert_eq!(r.first_violation.unwrap(), Violation { position: 0, reason: ViolationReason::WrongLongJob });
    }

    #[test]
    fn build_examples() {
        let inst = inst3();
        let (s, valid) = build_jackson(&inst, eps("1/3"), &placement(&[[1, 1], [3, 2]])).unwrap();
        assert_eq!(s, sched(&[1, 3, 2]));
        assert_eq!(inst.lateness_of(s.order()), 11);
        // position 2 idles until r=4 while the later long job 2 was released at 1
        assert!(!valid);

        let (s, valid) = build_jackson(&inst, eps("2"), &Placement::empty()).unwrap();
        assert_eq!(s, sched(&[1, 2, 3]));
        assert_eq!(inst.lateness_of(s.order()), 12);
        assert!(valid);

        let (s, valid) = build_jackson(&inst, eps("1/6"), &placement(&[[1, 1], [2, 2], [3, 3]])).unwrap();
        assert_eq!(s, sched(&[1, 2, 3]));
        assert_eq!(valid, jackson_prefix(&inst, eps("1/6"), &s).is_full());
        assert!(valid);
    }

    #[test]
    fn build_rejects_inconsistent_placements() {
        let inst = inst3();
        assert!(build_jackson(&inst, eps("1/3"), &placement(&[[1, 1]])).is_err());
        assert!(build_jackson(&inst, eps("1/3"), &placement(&[[1, 1], [4, 2]])).is_err());
        assert!(build_jackson(&inst, eps("1/3"), &placement(&[[1, 1], [2, 3]])).is_err());
        assert!(Placement::from_one_based_pairs(&[[1, 1], [1, 2]]).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let inst = inst3();
        let all: Vec<_> = enumerate_placements(&inst, eps("1/3"), DEFAULT_ENUMERATION_CAP).unwrap().collect();
        assert_eq!(all.len(), 6);
        let expected = [
            [[1, 1], [2, 2]],
            [[1, 2], [2, 1]],
            [[1, 1], [3, 2]],
            [[1, 2], [3, 1]],
            [[2, 1], [3, 2]],
            [[2, 2], [3, 1]],
        ];
        for (got, want) in all.iter().zip(expected) {
            assert_eq!(got, &placement(&want));
        }
        let e = enumerate_placements(&inst, eps("2"), DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(e.total(), 1);
        assert_eq!(e.collect::<Vec<_>>(), vec![Placement::empty()]);
        let e = enumerate_placements(&inst, eps("1/6"), DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(e.total(), 6);
        assert_eq!(e.count(), 6);
    }

    #[test]
    fn enumeration_cap() {
        let inst = inst3();
        let err = enumerate_placements(&inst, eps("1/3"), 5).err().unwrap();
        assert!(matches!(err, Error::EnumerationTooLarge { count: 6, cap: 5 }));
    }

    #[test]
    fn placement_serializes_one_based() {
        let p = placement(&[[3, 2], [1, 1]]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[[1,1],[3,2]]");
        let back: Placement = serde_json::from_str("[[1,1],[3,2]]").unwrap();
        assert_eq!(back, p);
    }

    fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
        (0..n).permutations(n)
    }

    /// Uniqueness by brute force: every schedule with a full prefix is the
    /// greedy one for its placement.
    #[test]
    fn full_prefix_schedules_are_greedy_on_small_cases() {
        let inst = Instance::from_triples(&[(0, 3, 4), (2, 1, 9), (2, 2, 4), (5, 4, 1), (1, 1, 0)]).unwrap();
        for e in ["1/4", "1/3", "1/2", "1"] {
            let part = classify(&inst, eps(e));
            for order in permutations(inst.len()) {
                if prefix_of(&inst, &part, &order).is_full() {
                    let (built, valid) = build_jackson_with(&inst, &part, &placement_of(&part, &order)).unwrap();
                    assert!(valid);
                    assert_eq!(built.order(), &order[..]);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn long_job_count_bounded(
            (inst, _s) in arb_instance_and_schedule(10),
            a in 1u64..6, b in 1u64..12,
        ) {
            let e = Epsilon::new(a, b).unwrap();
            let part = classify(&inst, e);
            prop_assert!((part.long_jobs().len() as u128) * (e.numer() as u128) <= e.denom() as u128);
            prop_assert_eq!(part.long_jobs().len() + part.short_jobs().len(), inst.len());
        }

        #[test]
        fn extracted_placement_is_consistent(
            (inst, s) in arb_instance_and_schedule(10),
            a in 1u64..4, b in 1u64..8,
        ) {
            let e = Epsilon::new(a, b).unwrap();
            let part = classify(&inst, e);
            let p = placement_of(&part, s.order());
            prop_assert!(p.check_against(&part).is_ok());
            for (pos, job) in p.pairs() {
                prop_assert_eq!(s.order()[pos], job);
            }
            // prefix against the extracted placement never reports a misplaced long job
            let r = prefix_against(&inst, &part, &p, s.order());
            prop_assert_ne!(r.first_violation.map(|v| v.reason), Some(ViolationReason::WrongLongJob));
            prop_assert_eq!(r.k == inst.len(), r.first_violation.is_none());
        }

        #[test]
        fn enumeration_is_distinct_and_counted(n in 1usize..7, a in 1u64..3, b in 1u64..5, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let triples: Vec<_> = (0..n).map(|_| (rng.gen_range(0..10), rng.gen_range(1..10), rng.gen_range(0..10))).collect();
            let inst = Instance::from_triples(&triples).unwrap();
            let e = Epsilon::new(a, b).unwrap();
            let part = classify(&inst, e);
            let en = enumerate_with(&part, DEFAULT_ENUMERATION_CAP).unwrap();
            let count = en.total();
            let all: Vec<_> = en.collect();
            prop_assert_eq!(all.len() as u128, count);
            prop_assert_eq!(count, placement_count(n, part.long_jobs().len()));
            prop_assert!(all.windows(2).all(|w| w[0] != w[1]));
            let distinct: std::collections::HashSet<_> = all.iter().collect();
            prop_assert_eq!(distinct.len(), all.len());
            for p in &all {
                prop_assert!(p.check_against(&part).is_ok());
            }
        }
    }
}
