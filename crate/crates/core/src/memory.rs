//! Friends' memories of their computational-basis outcomes.
//!
//! A run keeps one branch per recorded outcome combination, each tagged with
//! the content of every friend's register. Branches whose registers agree
//! interfere when the run is closed; branches whose registers differ add as a
//! mixture. Erasing the value while keeping the "definite outcome" flag makes
//! all registers agree again, so the qubits recover their pure state; keeping
//! the value leaves the state dephased in the recorded basis.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{MeasurementContext, COIN, SPIN};
use crate::qcore::{born_distribution, born_distribution_mixed, Basis, DensityOperator, Outcome, OutcomeDistribution, StateVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Friend {
    /// Watches the spin (site 1).
    F,
    /// Watches the coin (site 0).
    Fbar,
}

impl Friend {
    pub fn site(self) -> usize {
        match self {
            Friend::Fbar => COIN,
            Friend::F => SPIN,
        }
    }
}

impl fmt::Display for Friend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Friend::F => f.write_str("F"),
            Friend::Fbar => f.write_str("Fbar"),
        }
    }
}

impl std::str::FromStr for Friend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "F" => Ok(Friend::F),
            "Fbar" => Ok(Friend::Fbar),
            _ => Err(format!("unknown friend '{s}' (expected F or Fbar)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegisterContent {
    Empty,
    Outcome(Outcome),
    DefiniteOutcome,
}

impl fmt::Display for RegisterContent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegisterContent::Empty => f.write_str("'∅'"),
            RegisterContent::Outcome(o) => write!(f, "'{}'", o.symbol()),
            RegisterContent::DefiniteOutcome => f.write_str("'definite-outcome'"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MemoryRegister {
    pub agent: Friend,
    pub content: RegisterContent,
}

impl MemoryRegister {
    pub fn empty(agent: Friend) -> Self {
        MemoryRegister { agent, content: RegisterContent::Empty }
    }

    pub fn record(self, outcome: Outcome) -> Result<Self> {
        match self.content {
            RegisterContent::Empty => Ok(MemoryRegister { content: RegisterContent::Outcome(outcome), ..self }),
            other => Err(Error::Invariant(format!("{} cannot record over {other}", self.agent))),
        }
    }

    /// Forgets the value, keeps the fact that a single outcome occurred.
    pub fn erase_value(self) -> Result<Self> {
        match self.content {
            RegisterContent::Outcome(_) => Ok(MemoryRegister { content: RegisterContent::DefiniteOutcome, ..self }),
            other => Err(Error::Invariant(format!("{} has no value to erase ({other})", self.agent))),
        }
    }

    pub fn erase_fully(self) -> Result<Self> {
        match self.content {
            RegisterContent::Outcome(_) => Ok(MemoryRegister { content: RegisterContent::Empty, ..self }),
            other => Err(Error::Invariant(format!("{} has no value to erase ({other})", self.agent))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Branch {
    registers: BTreeMap<Friend, MemoryRegister>,
    weight: f64,
    state: StateVector,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FinalState {
    Coherent(StateVector),
    Decohered(DensityOperator),
}

impl FinalState {
    pub fn density(&self) -> DensityOperator {
        match self {
            FinalState::Coherent(s) => DensityOperator::from_pure(s),
            FinalState::Decohered(rho) => rho.clone(),
        }
    }

    pub fn is_coherent(&self) -> bool {
        matches!(self, FinalState::Coherent(_))
    }

    pub fn table(&self, context: &[Basis]) -> Result<OutcomeDistribution> {
        match self {
            FinalState::Coherent(s) => born_distribution(s, context),
            FinalState::Decohered(rho) => born_distribution_mixed(rho, context),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolRun {
    branches: Vec<Branch>,
    measured: Vec<Friend>,
    erased: Vec<Friend>,
}

impl ProtocolRun {
    pub fn start(state: &StateVector) -> Self {
        ProtocolRun {
            branches: vec![Branch { registers: BTreeMap::new(), weight: 1.0, state: state.clone() }],
            measured: Vec::new(),
            erased: Vec::new(),
        }
    }

    /// `agent` copies its site's value in `basis` into its register.
    pub fn record(&self, agent: Friend, basis: Basis) -> Result<Self> {
        let site = agent.site();
        let first = &self.branches[0].state;
        if site >= first.sites() {
            return Err(Error::SystemOutOfRange { index: site, sites: first.sites() });
        }
        let expected = first.bases()[site].system_kind().computational();
        if basis != expected {
            return Err(Error::InconsistentBasis(format!("{agent} records in {expected}, not {basis}")));
        }
        if self.measured.contains(&agent) {
            return Err(Error::Invariant(format!("{agent} already recorded")));
        }
        let mut branches = Vec::new();
        for b in &self.branches {
            for outcome in basis.outcomes() {
                let (state, p) = match b.state.project(site, outcome) {
                    Ok(x) => x,
                    Err(Error::ZeroProbabilityBranch) => continue,
                    Err(e) => return Err(e),
                };
                let mut registers = b.registers.clone();
                registers.insert(agent, MemoryRegister::empty(agent).record(outcome)?);
                branches.push(Branch { registers, weight: b.weight * p, state });
            }
        }
        let mut measured = self.measured.clone();
        measured.push(agent);
        Ok(ProtocolRun { branches, measured, erased: self.erased.clone() })
    }

    /// Uncomputes `agent`'s recorded value, leaving the definite-outcome flag.
    pub fn erase(&self, agent: Friend) -> Result<Self> {
        if !self.measured.contains(&agent) {
            return Err(Error::Invariant(format!("{agent} has not recorded anything")));
        }
        let branches = self
            .branches
            .iter()
            .map(|b| {
                let mut registers = b.registers.clone();
                let reg = registers[&agent].erase_value()?;
                registers.insert(agent, reg);
                Ok(Branch { registers, ..b.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut erased = self.erased.clone();
        erased.push(agent);
        Ok(ProtocolRun { branches, measured: self.measured.clone(), erased })
    }

    pub fn measured(&self) -> &[Friend] {
        &self.measured
    }

    pub fn erased(&self) -> &[Friend] {
        &self.erased
    }

    pub fn kept(&self) -> Vec<Friend> {
        self.measured.iter().filter(|a| !self.erased.contains(a)).copied().collect()
    }

    /// Register contents per branch, with the branch weight.
    pub fn register_branches(&self) -> Vec<(Vec<MemoryRegister>, f64)> {
        self.branches.iter().map(|b| (b.registers.values().copied().collect(), b.weight)).collect()
    }

    /// True when no register distinguishes one branch from another.
    pub fn registers_agree(&self) -> bool {
        self.branches.windows(2).all(|w| w[0].registers == w[1].registers)
    }

    /// Qubit state once the registers are traced out: branches with equal
    /// registers add as amplitudes, distinct register contents add as a mixture.
    pub fn final_state(&self) -> Result<FinalState> {
        let bases = self.branches[0].state.bases().to_vec();
        let mut groups: BTreeMap<Vec<MemoryRegister>, DVector<C64>> = BTreeMap::new();
        for b in &self.branches {
            let key: Vec<MemoryRegister> = b.registers.values().copied().collect();
            let state = b.state.in_context(&bases)?;
            let v = DVector::from_column_slice(state.amplitudes()) * C64::new(b.weight.sqrt(), 0.0);
            let slot = groups.entry(key).or_insert_with(|| DVector::zeros(v.len()));
            *slot += v;
        }
        if groups.len() == 1 {
            let v = groups.into_values().next().expect("one group");
            return Ok(FinalState::Coherent(StateVector::new(v.iter().copied().collect(), bases)?));
        }
        let dim = 1usize << bases.len();
        let matrix = groups.values().fold(DMatrix::zeros(dim, dim), |acc, v| acc + v * v.adjoint());
        Ok(FinalState::Decohered(DensityOperator::new(matrix, bases)?))
    }

    /// The four Hardy context tables of the final state.
    pub fn hardy_tables(&self) -> Result<BTreeMap<MeasurementContext, OutcomeDistribution>> {
        let fin = self.final_state()?;
        MeasurementContext::all().into_iter().map(|c| Ok((c, fin.table(&c.bases())?))).collect()
    }

    pub fn summary(&self) -> Result<ProtocolSummary> {
        let fin = self.final_state()?;
        let tables = MeasurementContext::all()
            .into_iter()
            .map(|c| Ok((c.to_string(), fin.table(&c.bases())?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(ProtocolSummary {
            agents: self.measured.clone(),
            erased: self.erased.clone(),
            status: if fin.is_coherent() { RunStatus::Coherent } else { RunStatus::Decohered },
            tables,
        })
    }
}

/// Record then exactly uncompute, retaining only the definite-outcome flag.
pub fn record_and_erase(state: &StateVector, agent: Friend, basis: Basis) -> Result<ProtocolRun> {
    ProtocolRun::start(state).record(agent, basis)?.erase(agent)
}

/// Friends in `agents` record in their computational bases and keep the values.
pub fn record_and_keep(state: &StateVector, agents: &[Friend]) -> Result<ProtocolRun> {
    if agents.is_empty() {
        return Err(Error::NoAgents);
    }
    agents.iter().try_fold(ProtocolRun::start(state), |run, agent| {
        let basis = state.bases()[agent.site()].system_kind().computational();
        run.record(*agent, basis)
    })
}

/// `erased` friends record and erase, then `kept` friends record and keep.
pub fn run_protocol(state: &StateVector, erased: &[Friend], kept: &[Friend]) -> Result<ProtocolRun> {
    let basis_of = |a: &Friend| state.bases()[a.site()].system_kind().computational();
    let run = erased
        .iter()
        .try_fold(ProtocolRun::start(state), |run, a| run.record(*a, basis_of(a))?.erase(*a))?;
    kept.iter().try_fold(run, |run, a| run.record(*a, basis_of(a)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefiniteOutcomeFlag {
    pub agents: Vec<Friend>,
    pub set: bool,
    /// Every branch carries the same register content, so the flag says
    /// nothing about which outcome occurred.
    pub outcome_independent: bool,
}

pub fn definite_outcome_flag(run: &ProtocolRun) -> Result<DefiniteOutcomeFlag> {
    if run.erased().is_empty() || !run.kept().is_empty() {
        return Err(Error::FlagRequiresErasure);
    }
    let set = run.branches.iter().all(|b| {
        run.erased().iter().all(|a| b.registers[a].content == RegisterContent::DefiniteOutcome)
    });
    Ok(DefiniteOutcomeFlag { agents: run.erased().to_vec(), set, outcome_independent: run.registers_agree() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Coherent,
    Decohered,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub agents: Vec<Friend>,
    pub erased: Vec<Friend>,
    pub status: RunStatus,
    pub tables: BTreeMap<String, OutcomeDistribution>,
}
