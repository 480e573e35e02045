//! Jobs, instances, schedules and the start-time recursion.
//!
//! Job indices and schedule positions are 0-based throughout the library.
//! Everything that crosses a process boundary (instance files, schedules in
//! JSON, command-line arguments) is 1-based; the serde impls in this module
//! do the conversion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Integer time unit.
pub type Time = i64;

/// Upper bound on every job field. With at most [`MAX_JOBS`] jobs every
/// lateness value stays far below `i64::MAX`.
pub const MAX_FIELD: Time = 1_000_000_000;

pub const MAX_JOBS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Job {
    #[serde(rename = "r")]
    pub release: Time,
    #[serde(rename = "p")]
    pub processing: Time,
    #[serde(rename = "q")]
    pub delivery: Time,
}

impl Job {
    pub const fn new(release: Time, processing: Time, delivery: Time) -> Self {
        Job { release, processing, delivery }
    }

    fn validate(&self, index: usize) -> Result<()> {
        let bad = |reason: &str| Err(Error::InvalidJob { index, reason: reason.to_owned() });
        if self.release < 0 || self.delivery < 0 {
            return bad("release and delivery times must be non-negative");
        }
        if self.processing < 1 {
            return bad("processing time must be at least 1");
        }
        if self.release > MAX_FIELD || self.processing > MAX_FIELD || self.delivery > MAX_FIELD {
            return bad("field exceeds 10^9");
        }
        Ok(())
    }
}

/// A validated, immutable list of jobs. The sentinel job `(0, 0, 0)` that
/// precedes every schedule is implicit and never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceRepr", into = "InstanceRepr")]
pub struct Instance {
    jobs: Vec<Job>,
    total_processing: Time,
}

#[derive(Serialize, Deserialize)]
struct InstanceRepr {
    jobs: Vec<Job>,
}

impl TryFrom<InstanceRepr> for Instance {
    type Error = Error;

    fn try_from(repr: InstanceRepr) -> Result<Self> {
        Instance::new(repr.jobs)
    }
}

impl From<Instance> for InstanceRepr {
    fn from(instance: Instance) -> Self {
        InstanceRepr { jobs: instance.jobs }
    }
}

impl Instance {
    pub fn new(jobs: Vec<Job>) -> Result<Self> {
        if jobs.is_empty() {
            return Err(Error::EmptyInstance);
        }
        if jobs.len() > MAX_JOBS {
            return Err(Error::Parse(format!("{} jobs exceeds the limit of {MAX_JOBS}", jobs.len())));
        }
        for (index, job) in jobs.iter().enumerate() {
            job.validate(index)?;
        }
        let total_processing = jobs.iter().map(|j| j.processing).sum();
        Ok(Instance { jobs, total_processing })
    }

    /// Convenience constructor from `(r, p, q)` triples.
    pub fn from_triples(triples: &[(Time, Time, Time)]) -> Result<Self> {
        Instance::new(triples.iter().map(|&(r, p, q)| Job::new(r, p, q)).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.jobs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.jobs.is_empty()
    }

    #[inline]
    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    #[inline]
    pub fn job(&self, index: usize) -> &Job {
        &self.jobs[index]
    }

    /// Sum of all processing times, `P`.
    #[inline]
    pub fn total_processing(&self) -> Time {
        self.total_processing
    }

    /// Maximal lateness of `order` without allocating. `order` must be a
    /// permutation of the job indices.
    pub fn lateness_of(&self, order: &[usize]) -> Time {
        debug_assert_eq!(order.len(), self.len());
        let mut free = 0;
        let mut worst = Time::MIN;
        for &j in order {
            let job = &self.jobs[j];
            let start = free.max(job.release);
            free = start + job.processing;
            worst = worst.max(free + job.delivery);
        }
        worst
    }

    /// Time at which the machine becomes free just before `position`, that is
    /// `s_{i-1} + p_{π(i-1)}` with the sentinel contributing zero at position 0.
    pub fn machine_free_before(&self, order: &[usize], position: usize) -> Time {
        let mut free = 0;
        for &j in &order[..position] {
            let job = &self.jobs[j];
            free = free.max(job.release) + job.processing;
        }
        free
    }

    /// True when all delivery times are pairwise distinct.
    pub fn is_generic(&self) -> bool {
        let mut q: Vec<Time> = self.jobs.iter().map(|j| j.delivery).collect();
        q.sort_unstable();
        q.windows(2).all(|w| w[0] != w[1])
    }

    /// Strict total order on jobs by delivery priority: larger delivery time
    /// first, lower index on ties. Every delivery comparison in the crate
    /// goes through this so that non-generic instances behave like generic ones.
    #[inline]
    pub fn delivery_precedes(&self, a: usize, b: usize) -> bool {
        let (qa, qb) = (self.jobs[a].delivery, self.jobs[b].delivery);
        qa > qb || (qa == qb && a < b)
    }

    /// `p_j >= eps * P`, compared exactly.
    pub fn is_long(&self, eps: Epsilon, j: usize) -> bool {
        eps.is_at_least_delta(self.jobs[j].processing, self.total_processing)
    }

    pub fn evaluate(&self, schedule: &Schedule) -> Result<EvaluationReport> {
        if schedule.len() != self.len() {
            return Err(Error::ScheduleLength { expected: self.len(), got: schedule.len() });
        }
        let n = self.len();
        let mut starts = Vec::with_capacity(n);
        let mut completions = Vec::with_capacity(n);
        let mut delivered = Vec::with_capacity(n);
        let mut free = 0;
        for &j in schedule.order() {
            let job = &self.jobs[j];
            let start = free.max(job.release);
            free = start + job.processing;
            starts.push(start);
            completions.push(free);
            delivered.push(free + job.delivery);
        }
        let max_lateness = delivered.iter().copied().max().expect("non-empty instance");
        Ok(EvaluationReport { starts, completions, delivered, max_lateness })
    }

    /// Which of the three start-time cases holds at `position`.
    pub fn case_of(&self, schedule: &Schedule, position: usize) -> Result<StartCase> {
        if schedule.len() != self.len() {
            return Err(Error::ScheduleLength { expected: self.len(), got: schedule.len() });
        }
        if position >= self.len() {
            return Err(Error::PositionOutOfRange { position, n: self.len() });
        }
        let free = self.machine_free_before(schedule.order(), position);
        Ok(StartCase::classify(free, self.jobs[schedule.order()[position]].release))
    }
}

/// How the start time of a position is determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartCase {
    /// The machine idles until the job's release: `free < r`.
    Case1,
    /// The job waits for the machine: `free > r`.
    Case2,
    /// Machine free exactly at the release: `free == r`.
    Case3,
}

impl StartCase {
    #[inline]
    pub fn classify(machine_free: Time, release: Time) -> Self {
        match machine_free.cmp(&release) {
            std::cmp::Ordering::Less => StartCase::Case1,
            std::cmp::Ordering::Greater => StartCase::Case2,
            std::cmp::Ordering::Equal => StartCase::Case3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvaluationReport {
    pub starts: Vec<Time>,
    pub completions: Vec<Time>,
    pub delivered: Vec<Time>,
    pub max_lateness: Time,
}

/// A processing order: `order()[i]` is the job at position `i`.
///
/// Serialized as a 1-based array of job indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Schedule {
    order: Vec<usize>,
}

impl Schedule {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &j in &order {
            if j >= n {
                return Err(Error::NotAPermutation(format!("job index {j} out of range for {n} jobs")));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::NotAPermutation(format!("job index {j} appears twice")));
            }
        }
        Ok(Schedule { order })
    }

    pub fn identity(n: usize) -> Self {
        Schedule { order: (0..n).collect() }
    }

    /// Builds a schedule from 1-based job indices.
    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        let zero = order
            .iter()
            .map(|&j| {
                j.checked_sub(1).ok_or_else(|| Error::NotAPermutation("job index 0 in a 1-based schedule".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Schedule::new(zero)
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.order.iter().map(|j| j + 1).collect()
    }

    #[inline]
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Mutable access for operators that only ever apply transpositions.
    #[inline]
    pub(crate) fn order_mut(&mut self) -> &mut [usize] {
        &mut self.order
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    #[inline]
    pub fn swap(&mut self, a: usize, b: usize) {
        self.order.swap(a, b);
    }

    /// Parses comma-separated 1-based job indices, e.g. `1,3,2`.
    pub fn parse_one_based(text: &str) -> Result<Self> {
        let order = text
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad schedule entry {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Schedule::from_one_based(&order)
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, j) in self.order.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", j + 1)?;
        }
        Ok(())
    }
}

impl Serialize for Schedule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Schedule {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let order = Vec::<usize>::deserialize(d)?;
        Schedule::from_one_based(&order).map_err(serde::de::Error::custom)
    }
}

/// Exact positive rational approximation parameter `a/b`, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Epsilon {
    numer: u64,
    denom: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Epsilon {
    pub fn new(numer: u64, denom: u64) -> Result<Self> {
        if numer == 0 || denom == 0 {
            return Err(Error::InvalidEpsilon(format!("{numer}/{denom}")));
        }
        let g = gcd(numer, denom);
        Ok(Epsilon { numer: numer / g, denom: denom / g })
    }

    #[inline]
    pub fn numer(&self) -> u64 {
        self.numer
    }

    #[inline]
    pub fn denom(&self) -> u64 {
        self.denom
    }

    /// `value >= (a/b) * total`, i.e. `b * value >= a * total`.
    #[inline]
    pub fn is_at_least_delta(&self, value: Time, total: Time) -> bool {
        (self.denom as i128) * (value as i128) >= (self.numer as i128) * (total as i128)
    }

    /// `⌈1/ε⌉ = ⌈b/a⌉`.
    pub fn reciprocal_ceil(&self) -> u64 {
        self.denom.div_ceil(self.numer)
    }

    pub fn as_f64(&self) -> f64 {
        self.numer as f64 / self.denom as f64
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer, self.denom)
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    /// Accepts `a/b` or a bare integer `a`. Decimals are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidEpsilon(s.to_owned());
        let digits = |t: &str| -> Result<u64> {
            let t = t.trim();
            if t.is_empty() || !t.bytes().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse().map_err(|_| bad())
        };
        match s.split_once('/') {
            Some((a, b)) => Epsilon::new(digits(a)?, digits(b)?).map_err(|_| bad()),
            None => Epsilon::new(digits(s)?, 1).map_err(|_| bad()),
        }
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
