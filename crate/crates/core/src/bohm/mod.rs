//! Discrete pilot-wave dynamics for the Hardy experiment.
//!
//! The hidden configuration is one branch label per qubit. At each detection
//! event (in the order fixed by the foliation) the active qubit's conditional
//! wave, given the partner's current hidden branch, is pushed through its beam
//! splitter; a [`TransportCoupling`] moves hidden mass from the old branches to
//! the output ports, and the pilot state collapses onto the realized port.
//! Every trajectory set is a full enumeration; [`sampler`] exists only to check
//! it statistically.

mod coupling;
pub mod sampler;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use coupling::{rank, Coupling, CouplingKind, TransportCoupling};
pub use sampler::{monte_carlo_check, sample_paths, MonteCarloReport, SampledPath};

use crate::error::{Error, Result};
use crate::hardy::{hardy_state, MeasurementContext, COIN, SPIN};
use crate::numfmt::decimal_string;
use crate::qcore::{born_distribution, Basis, Outcome, OutcomeDistribution, StateVector, SystemKind};

/// Weights at or below this are dropped from the enumeration.
const NEGLIGIBLE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HiddenConfig {
    pub coin: Outcome,
    pub spin: Outcome,
}

impl HiddenConfig {
    pub fn new(coin: Outcome, spin: Outcome) -> Self {
        HiddenConfig { coin, spin }
    }

    pub fn get(&self, site: usize) -> Outcome {
        if site == COIN {
            self.coin
        } else {
            self.spin
        }
    }

    fn with(mut self, site: usize, outcome: Outcome) -> Self {
        if site == COIN {
            self.coin = outcome;
        } else {
            self.spin = outcome;
        }
        self
    }
}

impl fmt::Display for HiddenConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.coin.symbol(), self.spin.symbol())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Foliation {
    /// The spin is detected in `(ok, fail)` before the coin reaches its beam splitter.
    F,
    /// The coin is detected in `(ok̄, fail̄)` before the spin reaches its beam splitter.
    #[serde(rename = "Fprime")]
    FPrime,
}

impl Foliation {
    pub fn both() -> [Foliation; 2] {
        [Foliation::F, Foliation::FPrime]
    }

    pub fn event_order(self) -> [usize; 2] {
        match self {
            Foliation::F => [SPIN, COIN],
            Foliation::FPrime => [COIN, SPIN],
        }
    }
}

impl fmt::Display for Foliation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Foliation::F => f.write_str("F"),
            Foliation::FPrime => f.write_str("Fprime"),
        }
    }
}

impl std::str::FromStr for Foliation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "F" => Ok(Foliation::F),
            "Fprime" | "F'" => Ok(Foliation::FPrime),
            _ => Err(format!("unknown foliation '{s}' (expected F or Fprime)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub system: SystemKind,
    pub from: Outcome,
    pub to: Outcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub initial: HiddenConfig,
    pub events: Vec<Transition>,
    #[serde(rename = "final")]
    pub final_config: HiddenConfig,
    #[serde(with = "decimal_string")]
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySet {
    pub context: MeasurementContext,
    pub foliation: Foliation,
    pub coupling: CouplingKind,
    pub paths: Vec<Path>,
}

impl TrajectorySet {
    pub fn total_weight(&self) -> f64 {
        self.paths.iter().map(|p| p.weight).sum()
    }

    /// Distribution of final configurations, as a table over the context.
    pub fn final_marginal(&self) -> OutcomeDistribution {
        let bases = self.context.bases();
        let mut probs = vec![0.0; 4];
        for p in &self.paths {
            probs[p.final_config.coin.index() * 2 + p.final_config.spin.index()] += p.weight;
        }
        OutcomeDistribution::from_parts(bases.to_vec(), probs)
    }

    pub fn paths_from(&self, initial: HiddenConfig) -> impl Iterator<Item = &Path> {
        self.paths.iter().filter(move |p| p.initial == initial)
    }

    /// Conditional distribution of initial configurations given the final one.
    pub fn origin_of(&self, coin: Outcome, spin: Outcome) -> Result<BTreeMap<HiddenConfig, f64>> {
        let target = HiddenConfig::new(coin, spin);
        let mut origins = BTreeMap::new();
        for p in self.paths.iter().filter(|p| p.final_config == target) {
            *origins.entry(p.initial).or_insert(0.0) += p.weight;
        }
        let total: f64 = origins.values().sum();
        if total <= NEGLIGIBLE {
            return Err(Error::UnreachedOutcome);
        }
        origins.values_mut().for_each(|w| *w /= total);
        Ok(origins)
    }
}

/// Born weights of the four computational configurations of the Hardy state.
pub fn initial_distribution() -> BTreeMap<HiddenConfig, f64> {
    let table = born_distribution(&hardy_state(), &[Basis::Zbar, Basis::Z]).expect("layout matches");
    table
        .entries()
        .into_iter()
        .map(|(labels, p)| (HiddenConfig::new(labels[0], labels[1]), p))
        .collect()
}

/// One-qubit state of the site opposite `fixed_system`, given that
/// `fixed_system` occupies `fixed_branch`.
pub fn conditional_wave(state: &StateVector, fixed_system: usize, fixed_branch: Outcome) -> Result<StateVector> {
    state
        .condition_on(fixed_system, fixed_branch)
        .map(|(wave, _)| wave)
        .map_err(|e| match e {
            Error::ZeroProbabilityBranch => Error::EmptyConditional,
            other => other,
        })
}

/// Transition law of one detection event for every path sharing a pilot state
/// and a partner branch.
#[derive(Clone, Debug)]
pub(crate) struct StepKernel {
    coupling: Coupling,
}

impl StepKernel {
    fn build(
        pilot: &StateVector,
        active: usize,
        target: Basis,
        partner_branch: Outcome,
        coupling: TransportCoupling,
    ) -> Result<Self> {
        let partner = 1 - active;
        let wave = conditional_wave(pilot, partner, partner_branch)?;
        let current = wave.bases()[0];
        let input = born_distribution(&wave, &[current])?;
        let output = born_distribution(&wave, &[target])?;
        let label = |d: &OutcomeDistribution| -> Vec<(Outcome, f64)> {
            d.entries().into_iter().map(|(l, p)| (l[0], p)).collect()
        };
        Ok(StepKernel { coupling: coupling.couple(&label(&input), &label(&output)) })
    }

    /// Output ports reachable from hidden branch `from`, with conditional probabilities.
    pub(crate) fn transitions(&self, from: Outcome) -> Result<Vec<(Outcome, f64)>> {
        let mass = self.coupling.input_mass(from);
        if mass <= NEGLIGIBLE {
            return Err(Error::Invariant(format!(
                "hidden branch {from} carries weight but has no Born mass"
            )));
        }
        Ok(self
            .coupling
            .row(from)
            .into_iter()
            .filter(|(_, p)| *p > NEGLIGIBLE)
            .map(|(o, p)| (o, p / mass))
            .collect())
    }
}

/// Sites that change basis in `context`, in the order the foliation visits them.
fn events_for(context: MeasurementContext, foliation: Foliation) -> Vec<(usize, Basis)> {
    let bases = context.bases();
    foliation
        .event_order()
        .into_iter()
        .filter(|&site| bases[site] != hardy_state().bases()[site])
        .map(|site| (site, bases[site]))
        .collect()
}

/// Pilot states are determined by the outcomes realized so far; paths sharing
/// that history and the partner's branch share a kernel.
type KernelKey = (usize, Outcome, Vec<Outcome>);

pub(crate) struct Dynamics {
    events: Vec<(usize, Basis)>,
    coupling: TransportCoupling,
    kernels: BTreeMap<KernelKey, StepKernel>,
}

impl Dynamics {
    pub(crate) fn new(context: MeasurementContext, foliation: Foliation, coupling: TransportCoupling) -> Self {
        Dynamics { events: events_for(context, foliation), coupling, kernels: BTreeMap::new() }
    }

    pub(crate) fn events(&self) -> &[(usize, Basis)] {
        &self.events
    }

    /// Kernel for event `step`, given the configuration and the realized
    /// history. The pilot is the Hardy state collapsed onto each earlier outcome.
    pub(crate) fn kernel(&mut self, step: usize, config: HiddenConfig, history: &[Outcome]) -> Result<&StepKernel> {
        let (active, target) = self.events[step];
        let partner_branch = config.get(1 - active);
        let key = (step, partner_branch, history.to_vec());
        if !self.kernels.contains_key(&key) {
            let mut pilot = hardy_state();
            for (k, outcome) in history.iter().enumerate() {
                let (site, basis) = self.events[k];
                pilot = pilot.rebase(site, basis)?.project(site, *outcome)?.0;
            }
            let kernel = StepKernel::build(&pilot, active, target, partner_branch, self.coupling)?;
            self.kernels.insert(key.clone(), kernel);
        }
        Ok(&self.kernels[&key])
    }
}

/// Enumerates every weighted path of the Hardy experiment in `context`.
pub fn evolve_in(
    context: MeasurementContext,
    foliation: Foliation,
    coupling: TransportCoupling,
) -> Result<TrajectorySet> {
    let mut dynamics = Dynamics::new(context, foliation, coupling);
    let mut partial: Vec<(Path, Vec<Outcome>)> = initial_distribution()
        .into_iter()
        .filter(|(_, w)| *w > NEGLIGIBLE)
        .map(|(config, weight)| {
            let path = Path { initial: config, events: Vec::new(), final_config: config, weight };
            (path, Vec::new())
        })
        .collect();

    for step in 0..dynamics.events().len() {
        let (active, _) = dynamics.events()[step];
        let mut next = Vec::new();
        for (path, history) in partial {
            let kernel = dynamics.kernel(step, path.final_config, &history)?;
            let from = path.final_config.get(active);
            for (to, p) in kernel.transitions(from)? {
                let mut extended = path.clone();
                extended.events.push(Transition { system: from.system_kind(), from, to });
                extended.final_config = path.final_config.with(active, to);
                extended.weight = path.weight * p;
                let mut h = history.clone();
                h.push(to);
                next.push((extended, h));
            }
        }
        partial = next;
    }

    Ok(TrajectorySet {
        context,
        foliation,
        coupling: coupling.kind,
        paths: partial.into_iter().map(|(p, _)| p).collect(),
    })
}

/// Trajectory set of the `(W̄,W)` experiment.
pub fn evolve(foliation: Foliation, coupling: TransportCoupling) -> Result<TrajectorySet> {
    evolve_in(MeasurementContext::WBAR_W, foliation, coupling)
}

/// Trajectory sets of the two single-beam-splitter contexts `(Z̄,W)` and
/// `(W̄,Z)`. With one event the foliation plays no role.
pub fn legacy_contexts() -> Result<BTreeMap<MeasurementContext, TrajectorySet>> {
    [MeasurementContext::ZBAR_W, MeasurementContext::WBAR_Z]
        .into_iter()
        .map(|ctx| Ok((ctx, evolve_in(ctx, Foliation::F, TransportCoupling::monotone())?)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedConfig {
    pub initial: HiddenConfig,
    #[serde(with = "decimal_string")]
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginComparison {
    pub coin: Outcome,
    pub spin: Outcome,
    pub origin_f: Vec<WeightedConfig>,
    pub origin_fprime: Vec<WeightedConfig>,
    pub differs: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationReport {
    pub coupling: CouplingKind,
    pub outcomes: Vec<OriginComparison>,
    pub marginals_identical: bool,
    pub max_marginal_gap: f64,
}

fn as_weighted(origins: &BTreeMap<HiddenConfig, f64>) -> Vec<WeightedConfig> {
    origins.iter().map(|(c, p)| WeightedConfig { initial: *c, probability: *p }).collect()
}

fn distributions_differ(a: &BTreeMap<HiddenConfig, f64>, b: &BTreeMap<HiddenConfig, f64>) -> bool {
    let keys: std::collections::BTreeSet<_> = a.keys().chain(b.keys()).collect();
    keys.into_iter()
        .any(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs() > 1e-12)
}

/// Origins of every reachable `(W̄,W)` outcome under `F` and `F′`.
pub fn compare_foliations(coupling: TransportCoupling) -> Result<FoliationReport> {
    let f = evolve(Foliation::F, coupling)?;
    let fp = evolve(Foliation::FPrime, coupling)?;
    let gap = f
        .final_marginal()
        .max_abs_diff(&fp.final_marginal())
        .ok_or_else(|| Error::Invariant("foliations produced different contexts".into()))?;
    let mut outcomes = Vec::new();
    for (labels, _) in f.final_marginal().entries() {
        let (coin, spin) = (labels[0], labels[1]);
        let (of, ofp) = match (f.origin_of(coin, spin), fp.origin_of(coin, spin)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(Error::UnreachedOutcome), Err(Error::UnreachedOutcome)) => continue,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        outcomes.push(OriginComparison {
            coin,
            spin,
            differs: distributions_differ(&of, &ofp),
            origin_f: as_weighted(&of),
            origin_fprime: as_weighted(&ofp),
        });
    }
    Ok(FoliationReport { coupling: coupling.kind, outcomes, marginals_identical: gap < 1e-12, max_marginal_gap: gap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(coin: Outcome, spin: Outcome) -> HiddenConfig {
        HiddenConfig::new(coin, spin)
    }

    #[test]
    fn initial_weights() {
        let d = initial_distribution();
        let third = 1.0 / 3.0;
        assert!((d[&cfg(Outcome::H, Outcome::DOWN)] - third).abs() < 1e-15);
        assert!((d[&cfg(Outcome::T, Outcome::DOWN)] - third).abs() < 1e-15);
        assert!((d[&cfg(Outcome::T, Outcome::UP)] - third).abs() < 1e-15);
        assert_eq!(d[&cfg(Outcome::H, Outcome::UP)], 0.0);
        assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_waves() {
        let psi = hardy_state();
        let w = conditional_wave(&psi, COIN, Outcome::H).unwrap();
        assert!((w.overlap(&StateVector::basis_state(&[Outcome::DOWN])).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        let w = conditional_wave(&psi, COIN, Outcome::T).unwrap();
        assert!((w.overlap(&StateVector::basis_state(&[Outcome::FAIL])).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        let w = conditional_wave(&psi, SPIN, Outcome::UP).unwrap();
        assert!((w.overlap(&StateVector::basis_state(&[Outcome::T])).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_conditional() {
        let psi = StateVector::basis_state(&[Outcome::H, Outcome::DOWN]);
        assert_eq!(conditional_wave(&psi, COIN, Outcome::T), Err(Error::EmptyConditional));
    }

    #[test]
    fn origin_under_f_and_fprime() {
        let f = evolve(Foliation::F, TransportCoupling::monotone()).unwrap();
        let o = f.origin_of(Outcome::OK_BAR, Outcome::OK).unwrap();
        assert_eq!(o.len(), 1);
        assert!((o[&cfg(Outcome::H, Outcome::DOWN)] - 1.0).abs() < 1e-12);

        let fp = evolve(Foliation::FPrime, TransportCoupling::monotone()).unwrap();
        let o = fp.origin_of(Outcome::OK_BAR, Outcome::OK).unwrap();
        assert_eq!(o.len(), 1);
        assert!((o[&cfg(Outcome::T, Outcome::UP)] - 1.0).abs() < 1e-12);
        let o = fp.origin_of(Outcome::FAIL_BAR, Outcome::OK).unwrap();
        assert_eq!(o.keys().collect::<Vec<_>>(), vec![&cfg(Outcome::T, Outcome::UP)]);
    }

    #[test]
    fn origin_of_failbar_fail_under_f() {
        let f = evolve(Foliation::F, TransportCoupling::monotone()).unwrap();
        let o = f.origin_of(Outcome::FAIL_BAR, Outcome::FAIL).unwrap();
        assert!((o[&cfg(Outcome::H, Outcome::DOWN)] - 1.0 / 9.0).abs() < 1e-12);
        assert!((o[&cfg(Outcome::T, Outcome::DOWN)] - 4.0 / 9.0).abs() < 1e-12);
        assert!((o[&cfg(Outcome::T, Outcome::UP)] - 4.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn unreached_outcome() {
        let sets = legacy_contexts().unwrap();
        let zw = &sets[&MeasurementContext::ZBAR_W];
        assert_eq!(zw.origin_of(Outcome::T, Outcome::OK), Err(Error::UnreachedOutcome));
    }

    #[test]
    fn legacy_coin_z_spin_w() {
        let sets = legacy_contexts().unwrap();
        let zw = &sets[&MeasurementContext::ZBAR_W];
        for start in [cfg(Outcome::T, Outcome::DOWN), cfg(Outcome::T, Outcome::UP)] {
            let paths: Vec<_> = zw.paths_from(start).collect();
            assert_eq!(paths.len(), 1);
            assert_eq!(paths[0].final_config, cfg(Outcome::T, Outcome::FAIL));
            assert!((paths[0].weight - 1.0 / 3.0).abs() < 1e-12);
        }
        let from_h: Vec<_> = zw.paths_from(cfg(Outcome::H, Outcome::DOWN)).collect();
        assert_eq!(from_h.len(), 2);
        for p in from_h {
            assert!((p.weight - 1.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn legacy_coin_w_spin_z() {
        let sets = legacy_contexts().unwrap();
        let wz = &sets[&MeasurementContext::WBAR_Z];
        let from_tu: Vec<_> = wz.paths_from(cfg(Outcome::T, Outcome::UP)).collect();
        assert_eq!(from_tu.len(), 2);
        for p in &from_tu {
            assert!((p.weight - 1.0 / 6.0).abs() < 1e-12);
        }
        for start in [cfg(Outcome::H, Outcome::DOWN), cfg(Outcome::T, Outcome::DOWN)] {
            let finals: Vec<_> = wz.paths_from(start).map(|p| p.final_config).collect();
            assert_eq!(finals, vec![cfg(Outcome::FAIL_BAR, Outcome::DOWN)]);
        }
    }

    #[test]
    fn computational_context_has_no_events() {
        let s = evolve_in(MeasurementContext::ZBAR_Z, Foliation::F, TransportCoupling::monotone()).unwrap();
        assert!(s.paths.iter().all(|p| p.events.is_empty()));
        assert_eq!(s.paths.len(), 3);
    }

    #[test]
    fn json_shape() {
        let s = evolve(Foliation::F, TransportCoupling::monotone()).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        let p = &v["paths"][0];
        assert!(p["initial"]["coin"].is_string());
        assert!(p["events"][0]["system"].is_string());
        assert!(p["events"][0]["from"].is_string());
        assert!(p["final"]["spin"].is_string());
        assert!(p["weight"].as_str().unwrap().len() >= 16);
        let back: TrajectorySet = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }
}
