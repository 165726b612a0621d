//! Seeded Monte-Carlo runs of the same dynamics, one hidden trajectory at a time.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{initial_distribution, Dynamics, Foliation, HiddenConfig, Transition, TrajectorySet, TransportCoupling};
use crate::error::{Error, Result};
use crate::hardy::MeasurementContext;

pub type PathKey = (HiddenConfig, Vec<Transition>);

fn draw<T: Copy>(rng: &mut ChaCha8Rng, weighted: &[(T, f64)]) -> T {
    let total: f64 = weighted.iter().map(|(_, w)| w).sum();
    let mut u = rng.random::<f64>() * total;
    for (item, w) in weighted {
        if u < *w {
            return *item;
        }
        u -= w;
    }
    weighted.last().expect("non-empty distribution").0
}

/// Runs the hidden-variable dynamics `runs` times and counts each path.
pub fn sample_paths(
    context: MeasurementContext,
    foliation: Foliation,
    coupling: TransportCoupling,
    runs: u64,
    seed: u64,
) -> Result<BTreeMap<PathKey, u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dynamics = Dynamics::new(context, foliation, coupling);
    let starts: Vec<(HiddenConfig, f64)> = initial_distribution().into_iter().filter(|(_, w)| *w > 0.0).collect();
    let mut counts = BTreeMap::new();
    for _ in 0..runs {
        let initial = draw(&mut rng, &starts);
        let mut config = initial;
        let mut history = Vec::new();
        let mut events = Vec::new();
        for step in 0..dynamics.events().len() {
            let (active, _) = dynamics.events()[step];
            let from = config.get(active);
            let to = draw(&mut rng, &dynamics.kernel(step, config, &history)?.transitions(from)?);
            events.push(Transition { system: from.system_kind(), from, to });
            config = config.with(active, to);
            history.push(to);
        }
        *counts.entry((initial, events)).or_insert(0) += 1;
    }
    Ok(counts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledPath {
    pub initial: HiddenConfig,
    pub events: Vec<Transition>,
    pub weight: f64,
    pub count: u64,
    pub frequency: f64,
    /// Binomial standard error `√(w(1−w)/N)`.
    pub sigma: f64,
    pub within_four_sigma: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub runs: u64,
    pub seed: u64,
    pub paths: Vec<SampledPath>,
    /// Sampled paths that the enumeration does not contain.
    pub unexpected: u64,
}

impl MonteCarloReport {
    pub fn all_within_four_sigma(&self) -> bool {
        self.unexpected == 0 && self.paths.iter().all(|p| p.within_four_sigma)
    }
}

/// Samples `runs` trajectories with the dynamics that produced `set` and
/// compares path frequencies with the enumerated weights.
pub fn monte_carlo_check(set: &TrajectorySet, runs: u64, seed: u64) -> Result<MonteCarloReport> {
    if runs == 0 {
        return Err(Error::Invariant("monte carlo needs at least one run".into()));
    }
    let mut counts =
        sample_paths(set.context, set.foliation, TransportCoupling::new(set.coupling), runs, seed)?;
    let n = runs as f64;
    let paths = set
        .paths
        .iter()
        .map(|p| {
            let count = counts.remove(&(p.initial, p.events.clone())).unwrap_or(0);
            let frequency = count as f64 / n;
            let sigma = (p.weight * (1.0 - p.weight) / n).sqrt();
            SampledPath {
                initial: p.initial,
                events: p.events.clone(),
                weight: p.weight,
                count,
                frequency,
                sigma,
                within_four_sigma: (frequency - p.weight).abs() <= 4.0 * sigma + 1e-12,
            }
        })
        .collect();
    Ok(MonteCarloReport { runs, seed, paths, unexpected: counts.values().sum() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bohm::evolve;

    #[test]
    fn deterministic_given_seed() {
        let a = sample_paths(MeasurementContext::WBAR_W, Foliation::F, TransportCoupling::monotone(), 2000, 7).unwrap();
        let b = sample_paths(MeasurementContext::WBAR_W, Foliation::F, TransportCoupling::monotone(), 2000, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_run_agrees_with_enumeration() {
        let set = evolve(Foliation::FPrime, TransportCoupling::monotone()).unwrap();
        let report = monte_carlo_check(&set, 20_000, 11).unwrap();
        assert_eq!(report.unexpected, 0);
        assert!(report.all_within_four_sigma(), "{report:#?}");
    }
}
