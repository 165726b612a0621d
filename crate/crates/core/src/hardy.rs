//! The Hardy experiment: the state `(|h,↓⟩ + |t,↓⟩ + |t,↑⟩)/√3`, its four
//! measurement contexts, single-context inference rules and the certificate
//! that chaining them across contexts contradicts the `(W̄,W)` statistics.
//!
//! Inference validity is always a zero-probability statement inside one
//! context. Chaining rules from different contexts is a separate, explicitly
//! non-contextual operation ([`chain_prediction`]).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{born_distribution, make_state, Basis, Outcome, OutcomeDistribution, StateVector, SystemKind, C64};

pub const COIN: usize = 0;
pub const SPIN: usize = 1;

/// Tolerance below which a probability counts as an exact zero.
pub const ZERO_TOLERANCE: f64 = 1e-12;

pub fn hardy_state() -> StateVector {
    let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
    let z = C64::new(0.0, 0.0);
    make_state(&[a, z, a, a], &[Basis::Zbar, Basis::Z]).expect("Hardy amplitudes are normalized")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CoinBasis {
    Zbar,
    Wbar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpinBasis {
    Z,
    W,
}

impl From<CoinBasis> for Basis {
    fn from(b: CoinBasis) -> Basis {
        match b {
            CoinBasis::Zbar => Basis::Zbar,
            CoinBasis::Wbar => Basis::Wbar,
        }
    }
}

impl From<SpinBasis> for Basis {
    fn from(b: SpinBasis) -> Basis {
        match b {
            SpinBasis::Z => Basis::Z,
            SpinBasis::W => Basis::W,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MeasurementContext {
    pub coin: CoinBasis,
    pub spin: SpinBasis,
}

impl MeasurementContext {
    pub const ZBAR_Z: MeasurementContext = MeasurementContext { coin: CoinBasis::Zbar, spin: SpinBasis::Z };
    pub const ZBAR_W: MeasurementContext = MeasurementContext { coin: CoinBasis::Zbar, spin: SpinBasis::W };
    pub const WBAR_Z: MeasurementContext = MeasurementContext { coin: CoinBasis::Wbar, spin: SpinBasis::Z };
    pub const WBAR_W: MeasurementContext = MeasurementContext { coin: CoinBasis::Wbar, spin: SpinBasis::W };

    pub fn all() -> [MeasurementContext; 4] {
        [Self::ZBAR_Z, Self::ZBAR_W, Self::WBAR_Z, Self::WBAR_W]
    }

    pub fn bases(self) -> [Basis; 2] {
        [self.coin.into(), self.spin.into()]
    }

    /// The context whose coin and spin bases are those of the two labels.
    pub fn from_labels(coin: Outcome, spin: Outcome) -> Result<Self> {
        let coin = match coin.basis() {
            Basis::Zbar => CoinBasis::Zbar,
            Basis::Wbar => CoinBasis::Wbar,
            _ => return Err(Error::OutcomeNotInContext(format!("{coin} is not a coin label"))),
        };
        let spin = match spin.basis() {
            Basis::Z => SpinBasis::Z,
            Basis::W => SpinBasis::W,
            _ => return Err(Error::OutcomeNotInContext(format!("{spin} is not a Hardy spin label"))),
        };
        Ok(MeasurementContext { coin, spin })
    }

    pub fn contains(self, outcome: Outcome) -> bool {
        self.bases().contains(&outcome.basis())
    }
}

impl fmt::Display for MeasurementContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?},{:?})", self.coin, self.spin)
    }
}

/// Born table of the Hardy state in `context`.
pub fn context_table(context: MeasurementContext) -> OutcomeDistribution {
    born_distribution(&hardy_state(), &context.bases()).expect("Hardy contexts match the state layout")
}

/// Joint probability of a (coin, spin) label pair in the context they define.
pub fn pair_probability(coin: Outcome, spin: Outcome) -> Result<f64> {
    let ctx = MeasurementContext::from_labels(coin, spin)?;
    context_table(ctx).prob(&[coin, spin])
}

fn ordered_pair(a: Outcome, b: Outcome) -> Result<(Outcome, Outcome)> {
    match (a.system_kind(), b.system_kind()) {
        (SystemKind::Coin, SystemKind::Spin) => Ok((a, b)),
        (SystemKind::Spin, SystemKind::Coin) => Ok((b, a)),
        _ => Err(Error::InvalidLink(format!("{a} and {b} belong to the same system"))),
    }
}

/// "Whenever `premise` is observed, `conclusion` is observed", within `context`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InferenceRule {
    pub context: MeasurementContext,
    pub premise: Outcome,
    pub conclusion: Outcome,
}

impl InferenceRule {
    pub fn new(context: MeasurementContext, premise: Outcome, conclusion: Outcome) -> Self {
        InferenceRule { context, premise, conclusion }
    }

    /// `ok → h` in `(Z̄,W)`.
    pub fn i() -> Self {
        Self::new(MeasurementContext::ZBAR_W, Outcome::OK, Outcome::H)
    }

    /// `ok̄ → ↑` in `(W̄,Z)`.
    pub fn i_bar() -> Self {
        Self::new(MeasurementContext::WBAR_Z, Outcome::OK_BAR, Outcome::UP)
    }

    /// `↑ → t` in `(Z̄,Z)`, the contrapositive of the missing `|h,↑⟩` branch.
    pub fn up_implies_tail() -> Self {
        Self::new(MeasurementContext::ZBAR_Z, Outcome::UP, Outcome::T)
    }

    /// `t → fail` in `(Z̄,W)`.
    pub fn tail_implies_fail() -> Self {
        Self::new(MeasurementContext::ZBAR_W, Outcome::T, Outcome::FAIL)
    }

    /// `P(premise ∧ ¬conclusion)` in the rule's own context.
    pub fn violation_probability(&self) -> Result<f64> {
        for label in [self.premise, self.conclusion] {
            if !self.context.contains(label) {
                return Err(Error::OutcomeNotInContext(format!("{label} not in {}", self.context)));
            }
        }
        let (coin, spin) = ordered_pair(self.premise, self.conclusion.negation())?;
        context_table(self.context).prob(&[coin, spin])
    }
}

impl fmt::Display for InferenceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} → {} in {}", self.premise.symbol(), self.conclusion.symbol(), self.context)
    }
}

pub fn check_inference(rule: &InferenceRule) -> Result<bool> {
    Ok(rule.violation_probability()? < ZERO_TOLERANCE)
}

/// Prediction obtained by composing rules across contexts, against the Born
/// probability of the same outcome pair measured jointly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContradictionCertificate {
    pub chain: Vec<InferenceRule>,
    /// The excluded joint outcome `(coin, spin)`.
    pub outcome: (Outcome, Outcome),
    pub context: MeasurementContext,
    pub composed_prediction: f64,
    pub actual: f64,
}

impl ContradictionCertificate {
    pub fn is_valid(&self) -> bool {
        self.composed_prediction == 0.0 && self.actual > ZERO_TOLERANCE
    }
}

/// Composes a chain of single-context rules non-contextually: from the first
/// premise the last conclusion is taken as certain, so the pair
/// (first premise, negated last conclusion) is predicted impossible.
pub fn chain_prediction(chain: &[InferenceRule]) -> Result<ContradictionCertificate> {
    let (first, last) = match (chain.first(), chain.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::BrokenChain),
    };
    if chain.windows(2).any(|w| w[0].conclusion != w[1].premise) {
        return Err(Error::BrokenChain);
    }
    for rule in chain {
        if !check_inference(rule)? {
            return Err(Error::InvalidLink(rule.to_string()));
        }
    }
    let (coin, spin) = ordered_pair(first.premise, last.conclusion.negation()).map_err(|_| Error::BrokenChain)?;
    let context = MeasurementContext::from_labels(coin, spin)?;
    let actual = context_table(context).prob(&[coin, spin])?;
    Ok(ContradictionCertificate {
        chain: chain.to_vec(),
        outcome: (coin, spin),
        context,
        composed_prediction: 0.0,
        actual,
    })
}

/// The chain `ok̄ → ↑ → t → fail`.
pub fn hardy_chain() -> Vec<InferenceRule> {
    vec![InferenceRule::i_bar(), InferenceRule::up_implies_tail(), InferenceRule::tail_implies_fail()]
}
