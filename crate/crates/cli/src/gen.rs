//! Random instance generation.

use std::collections::HashSet;

use lmax_core::model::MAX_FIELD;
use lmax_core::{Instance, Job, RngStream, Time};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Redraws allowed per job before giving up on distinct delivery times.
const REDRAW_CAP: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub n: usize,
    pub r_max: Time,
    pub p_max: Time,
    pub q_max: Time,
    /// Make all delivery times pairwise distinct.
    pub enforce_generic: bool,
    /// When rejection sampling fails, spread `q` to `q·n + offset` with a
    /// random permutation of offsets `0..n`.
    pub fallback: bool,
    pub seed: u64,
}

impl GenSpec {
    /// Releases in `[0, 3n]`, processing in `[1, 10]`, deliveries in
    /// `[0, 10n]`, generic.
    pub fn new(n: usize, seed: u64) -> Self {
        let n_t = n as Time;
        GenSpec { n, r_max: 3 * n_t, p_max: 10, q_max: 10 * n_t, enforce_generic: true, fallback: true, seed }
    }

    fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Generation(msg));
        if self.n == 0 {
            return fail("n must be at least 1".into());
        }
        if self.p_max < 1 {
            return fail(format!("p_max must be at least 1, got {}", self.p_max));
        }
        if self.r_max < 0 || self.q_max < 0 {
            return fail("r_max and q_max must be non-negative".into());
        }
        if self.r_max > MAX_FIELD || self.p_max > MAX_FIELD || self.q_max > MAX_FIELD {
            return fail("ranges must stay within 10^9".into());
        }
        if self.enforce_generic && !self.fallback && (self.q_max as u128) + 1 < self.n as u128 {
            return fail(format!("{} distinct delivery times do not fit in [0, {}]", self.n, self.q_max));
        }
        Ok(())
    }
}

pub fn generate(spec: &GenSpec) -> Result<Instance> {
    spec.check()?;
    let mut rng = RngStream::new(spec.seed);
    let mut draw = |max: Time| rng.below(max as u64 + 1) as Time;
    let mut jobs: Vec<Job> = (0..spec.n)
        .map(|_| {
            let r = draw(spec.r_max);
            let p = 1 + draw(spec.p_max - 1);
            Job::new(r, p, draw(spec.q_max))
        })
        .collect();
    if spec.enforce_generic {
        make_generic(spec, &mut jobs, &mut rng)?;
    }
    Ok(Instance::new(jobs)?)
}

fn make_generic(spec: &GenSpec, jobs: &mut [Job], rng: &mut RngStream) -> Result<()> {
    let mut seen = HashSet::new();
    let mut stuck = false;
    for job in jobs.iter_mut() {
        let mut redraws = 0;
        while !seen.insert(job.delivery) {
            if redraws == REDRAW_CAP || (spec.q_max as u128) + 1 < spec.n as u128 {
                stuck = true;
                break;
            }
            job.delivery = rng.below(spec.q_max as u64 + 1) as Time;
            redraws += 1;
        }
        if stuck {
            break;
        }
    }
    if !stuck {
        return Ok(());
    }
    if !spec.fallback {
        return Err(CliError::Generation(format!("no distinct delivery times after {REDRAW_CAP} redraws per job")));
    }
    let n = jobs.len() as Time;
    let offsets = rng.permutation(jobs.len());
    for (job, off) in jobs.iter_mut().zip(offsets) {
        job.delivery = job.delivery * n + off as Time;
        if job.delivery > MAX_FIELD {
            return Err(CliError::Generation("spread delivery times exceed 10^9".into()));
        }
    }
    Ok(())
}
