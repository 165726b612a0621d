//! The agents' chain of certainties, replayed statement by statement.
//!
//! Each statement carries the context in which its author reasons and the
//! context actually realized in the run. Statements reasoned in a foreign
//! context are counterfactual; statements built on them inherit the taint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{chain_prediction, context_table, ContradictionCertificate, InferenceRule, MeasurementContext};
use crate::qcore::Outcome;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Agent {
    F,
    Fbar,
    W,
    Wbar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Friend,
    SuperObserver,
}

impl Agent {
    pub fn level(self) -> Level {
        match self {
            Agent::F | Agent::Fbar => Level::Friend,
            Agent::W | Agent::Wbar => Level::SuperObserver,
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// "`agent` holds `outcome` at `time`", possibly wrapped once in "`agent` is certain that".
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Proposition {
    Outcome { agent: Agent, outcome: Outcome, time: String },
    Certain { agent: Agent, inner: Box<Proposition> },
}

impl Proposition {
    pub fn outcome(agent: Agent, outcome: Outcome, time: &str) -> Self {
        Proposition::Outcome { agent, outcome, time: time.to_string() }
    }

    /// Wraps `inner`; only outcome claims may be wrapped.
    pub fn certain(agent: Agent, inner: Proposition) -> Result<Self> {
        match inner {
            Proposition::Outcome { .. } => Ok(Proposition::Certain { agent, inner: Box::new(inner) }),
            Proposition::Certain { .. } => Err(Error::NestingTooDeep(format!("{agent} is certain that {inner}"))),
        }
    }

    /// The outcome claim at the bottom of the wrapping.
    pub fn claim(&self) -> (Agent, Outcome) {
        match self {
            Proposition::Outcome { agent, outcome, .. } => (*agent, *outcome),
            Proposition::Certain { inner, .. } => inner.claim(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Proposition::Outcome { .. } => 0,
            Proposition::Certain { inner, .. } => 1 + inner.depth(),
        }
    }
}

impl fmt::Display for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Proposition::Outcome { agent, outcome, time } => write!(f, "{agent} has {} at {time}", outcome.symbol()),
            Proposition::Certain { agent, inner } => write!(f, "{agent} is certain that {inner}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    ContextValid,
    Counterfactual,
    CounterfactualDerived,
}

/// Probability evidence for a statement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backing {
    /// A certainty rule; its violation probability must vanish.
    Rule(InferenceRule),
    /// A joint outcome that occurs in the run.
    Observed { context: MeasurementContext, coin: Outcome, spin: Outcome },
    /// Obtained from other statements only.
    Derived,
}

impl Backing {
    pub fn probability(&self) -> Result<Option<f64>> {
        match self {
            Backing::Rule(rule) => rule.violation_probability().map(Some),
            Backing::Observed { context, coin, spin } => context_table(*context).prob(&[*coin, *spin]).map(Some),
            Backing::Derived => Ok(None),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpistemicStatement {
    pub id: String,
    pub author: Agent,
    pub text: String,
    pub proposition: Proposition,
    /// The author's own record the statement is conditioned on.
    pub given: Option<Outcome>,
    pub assumed_context: MeasurementContext,
    pub actual_context: MeasurementContext,
    pub premises: Vec<String>,
    pub backing: Backing,
    pub note: Option<String>,
}

pub fn classify(statement: &EpistemicStatement) -> Classification {
    match (statement.assumed_context == statement.actual_context, statement.premises.is_empty()) {
        (true, _) => Classification::ContextValid,
        (false, true) => Classification::Counterfactual,
        (false, false) => Classification::CounterfactualDerived,
    }
}

struct Spec {
    id: &'static str,
    author: Agent,
    text: &'static str,
    proposition: Proposition,
    given: Option<Outcome>,
    assumed: MeasurementContext,
    actual: MeasurementContext,
    premises: &'static [&'static str],
    backing: Backing,
}

fn w_fails() -> Proposition {
    Proposition::outcome(Agent::W, Outcome::FAIL, "n:31")
}

fn certain(agent: Agent, inner: Proposition) -> Proposition {
    Proposition::certain(agent, inner).expect("builtin nesting is one level")
}

/// The ten statements of the reasoning chain, in derivation order.
pub fn builtin_statements() -> Vec<EpistemicStatement> {
    use MeasurementContext as C;
    let run = C::WBAR_W;
    let specs = vec![
        Spec {
            id: "Fbar_n02",
            author: Agent::Fbar,
            text: "I am certain that W will observe w=fail at time n:31",
            proposition: w_fails(),
            given: Some(Outcome::T),
            assumed: C::ZBAR_W,
            actual: run,
            premises: &[],
            backing: Backing::Rule(InferenceRule::tail_implies_fail()),
        },
        Spec {
            id: "F_n12",
            author: Agent::F,
            text: "I am certain that Fbar knows that z=+1/2 at time n:02",
            proposition: Proposition::outcome(Agent::Fbar, Outcome::T, "n:02"),
            given: Some(Outcome::UP),
            assumed: C::ZBAR_Z,
            actual: C::ZBAR_Z,
            premises: &[],
            backing: Backing::Rule(InferenceRule::up_implies_tail()),
        },
        Spec {
            id: "F_n13",
            author: Agent::F,
            text: "I am certain that Fbar is certain that W will observe w=fail at time n:31",
            proposition: certain(Agent::Fbar, w_fails()),
            given: Some(Outcome::UP),
            assumed: C::ZBAR_W,
            actual: run,
            premises: &["F_n12", "Fbar_n02"],
            backing: Backing::Derived,
        },
        Spec {
            id: "F_n14",
            author: Agent::F,
            text: "I am certain that W will observe w=fail at time n:31",
            proposition: w_fails(),
            given: Some(Outcome::UP),
            assumed: C::ZBAR_W,
            actual: run,
            premises: &["F_n13"],
            backing: Backing::Derived,
        },
        Spec {
            id: "Wbar_n22",
            author: Agent::Wbar,
            text: "I am certain that F knows that z=+1/2 at time n:11",
            proposition: Proposition::outcome(Agent::F, Outcome::UP, "n:11"),
            given: Some(Outcome::OK_BAR),
            assumed: C::WBAR_Z,
            actual: run,
            premises: &[],
            backing: Backing::Rule(InferenceRule::i_bar()),
        },
        Spec {
            id: "Wbar_n23",
            author: Agent::Wbar,
            text: "I am certain that F is certain that W will observe w=fail at time n:31",
            proposition: certain(Agent::F, w_fails()),
            given: Some(Outcome::OK_BAR),
            assumed: C::WBAR_Z,
            actual: run,
            premises: &["Wbar_n22", "F_n14"],
            backing: Backing::Derived,
        },
        Spec {
            id: "Wbar_n24",
            author: Agent::Wbar,
            text: "I am certain that W will observe w=fail at time n:31",
            proposition: w_fails(),
            given: Some(Outcome::OK_BAR),
            assumed: C::WBAR_Z,
            actual: run,
            premises: &["Wbar_n23"],
            backing: Backing::Derived,
        },
        Spec {
            id: "W_n26",
            author: Agent::W,
            text: "Wbar announces wbar=okbar",
            proposition: Proposition::outcome(Agent::Wbar, Outcome::OK_BAR, "n:21"),
            given: None,
            assumed: run,
            actual: run,
            premises: &[],
            backing: Backing::Observed { context: run, coin: Outcome::OK_BAR, spin: Outcome::OK },
        },
        Spec {
            id: "W_n27",
            author: Agent::W,
            text: "I am certain that Wbar is certain that I will observe w=fail at time n:31",
            proposition: certain(Agent::Wbar, w_fails()),
            given: Some(Outcome::OK_BAR),
            assumed: C::WBAR_Z,
            actual: run,
            premises: &["W_n26", "Wbar_n24"],
            backing: Backing::Derived,
        },
        Spec {
            id: "W_n28",
            author: Agent::W,
            text: "I am certain that I will observe w=fail at time n:31",
            proposition: w_fails(),
            given: Some(Outcome::OK_BAR),
            assumed: C::WBAR_Z,
            actual: run,
            premises: &["W_n27"],
            backing: Backing::Derived,
        },
    ];
    specs
        .into_iter()
        .map(|s| EpistemicStatement {
            id: s.id.to_string(),
            author: s.author,
            text: s.text.to_string(),
            proposition: s.proposition,
            given: s.given,
            assumed_context: s.assumed,
            actual_context: s.actual,
            premises: s.premises.iter().map(|p| p.to_string()).collect(),
            backing: s.backing,
            note: match s.id {
                "W_n27" | "W_n28" => Some("usable only by accepting the earlier misapplications".to_string()),
                _ => None,
            },
        })
        .collect()
}

pub fn lookup(id: &str) -> Result<EpistemicStatement> {
    builtin_statements()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownLabel(id.to_string()))
}

/// Same author-independent content: identical claim under the same given record.
pub fn equivalent(a: &EpistemicStatement, b: &EpistemicStatement) -> bool {
    a.proposition == b.proposition && a.given == b.given
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct AxiomSet {
    /// Agents apply quantum theory.
    pub Q: bool,
    /// Agents adopt each other's certainties.
    pub C: bool,
    /// An agent never holds a certainty its own observations refute.
    pub S: bool,
}

impl AxiomSet {
    pub fn all() -> Self {
        AxiomSet { Q: true, C: true, S: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Counterfactual statements may enter derivations.
    pub counterfactual_composition: bool,
    /// Statements allowed into the derivation; `None` admits all.
    pub admitted: Option<BTreeSet<String>>,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { counterfactual_composition: true, admitted: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatementVerdict {
    pub id: String,
    pub author: Agent,
    pub text: String,
    pub classification: Classification,
    pub admitted: bool,
    pub derived: bool,
    pub evidence: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub composed: f64,
    pub actual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contradiction {
    /// Derived statements asserting `w=fail` for sure after `ok̄`.
    pub statements: Vec<String>,
    pub witness: Witness,
    /// Counterfactual statements the contradiction cannot do without.
    pub counterfactual_roots: Vec<String>,
    pub certificate: ContradictionCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub axioms: AxiomSet,
    pub counterfactual_composition: bool,
    pub statements: Vec<StatementVerdict>,
    pub edges: Vec<(String, String)>,
    pub contradiction: Option<Contradiction>,
}

impl TraceReport {
    pub fn has_contradiction(&self) -> bool {
        self.contradiction.is_some()
    }
}

fn ancestors(id: &str, by_id: &BTreeMap<&str, &EpistemicStatement>, out: &mut BTreeSet<String>) {
    if out.insert(id.to_string()) {
        for p in &by_id[id].premises {
            ancestors(p, by_id, out);
        }
    }
}

/// Orders rules into a chain starting from `start`.
fn link_rules(start: Outcome, mut rules: Vec<InferenceRule>) -> Vec<InferenceRule> {
    let mut chain = Vec::new();
    let mut at = start;
    while let Some(i) = rules.iter().position(|r| r.premise == at) {
        let r = rules.remove(i);
        at = r.conclusion;
        chain.push(r);
    }
    chain
}

pub fn run_trace(axioms: AxiomSet) -> Result<TraceReport> {
    run_trace_with(axioms, &TraceOptions::default())
}

pub fn run_trace_with(axioms: AxiomSet, options: &TraceOptions) -> Result<TraceReport> {
    let statements = builtin_statements();
    let by_id: BTreeMap<&str, &EpistemicStatement> = statements.iter().map(|s| (s.id.as_str(), s)).collect();
    let is_admitted = |id: &str| options.admitted.as_ref().is_none_or(|set| set.contains(id));

    // premises always precede their consequences, so one pass suffices
    let mut derived: BTreeSet<&str> = BTreeSet::new();
    for s in &statements {
        let usable = match classify(s) {
            Classification::ContextValid => true,
            _ => options.counterfactual_composition,
        };
        let chained = s.premises.is_empty() || (axioms.C && s.premises.iter().all(|p| derived.contains(p.as_str())));
        if axioms.Q && is_admitted(&s.id) && usable && chained {
            derived.insert(&s.id);
        }
    }

    let verdicts = statements
        .iter()
        .map(|s| {
            Ok(StatementVerdict {
                id: s.id.clone(),
                author: s.author,
                text: s.text.clone(),
                classification: classify(s),
                admitted: is_admitted(&s.id),
                derived: derived.contains(s.id.as_str()),
                evidence: s.backing.probability()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let edges = statements
        .iter()
        .flat_map(|s| s.premises.iter().map(move |p| (p.clone(), s.id.clone())))
        .collect();

    let conflicting: Vec<&EpistemicStatement> = statements
        .iter()
        .filter(|s| {
            derived.contains(s.id.as_str())
                && !s.premises.is_empty()
                && s.given == Some(Outcome::OK_BAR)
                && s.proposition == w_fails()
        })
        .collect();
    let contradiction = match conflicting.first() {
        Some(first) if axioms.S => {
            let mut ancestry = BTreeSet::new();
            ancestors(&first.id, &by_id, &mut ancestry);
            let roots: Vec<&EpistemicStatement> = statements
                .iter()
                .filter(|s| ancestry.contains(&s.id) && s.premises.is_empty())
                .collect();
            let rules = roots
                .iter()
                .filter_map(|s| match s.backing {
                    Backing::Rule(r) => Some(r),
                    _ => None,
                })
                .collect();
            let certificate = chain_prediction(&link_rules(Outcome::OK_BAR, rules))?;
            Some(Contradiction {
                statements: conflicting.iter().map(|s| s.id.clone()).collect(),
                witness: Witness { composed: certificate.composed_prediction, actual: certificate.actual },
                counterfactual_roots: roots
                    .iter()
                    .filter(|s| classify(s) == Classification::Counterfactual)
                    .map(|s| s.id.clone())
                    .collect(),
                certificate,
            })
        }
        _ => None,
    };

    Ok(TraceReport {
        axioms,
        counterfactual_composition: options.counterfactual_composition,
        statements: verdicts,
        edges,
        contradiction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roles() {
        assert_eq!(Agent::F.level(), Level::Friend);
        assert_eq!(Agent::Fbar.level(), Level::Friend);
        assert_eq!(Agent::W.level(), Level::SuperObserver);
        assert_eq!(Agent::Wbar.level(), Level::SuperObserver);
    }

    #[test]
    fn builtin_classifications() {
        use Classification::*;
        let expected = [
            ("Fbar_n02", Counterfactual),
            ("F_n12", ContextValid),
            ("F_n13", CounterfactualDerived),
            ("F_n14", CounterfactualDerived),
            ("Wbar_n22", Counterfactual),
            ("Wbar_n23", CounterfactualDerived),
            ("Wbar_n24", CounterfactualDerived),
            ("W_n26", ContextValid),
            ("W_n27", CounterfactualDerived),
            ("W_n28", CounterfactualDerived),
        ];
        let all = builtin_statements();
        assert_eq!(all.len(), expected.len());
        for (s, (id, class)) in all.iter().zip(expected) {
            assert_eq!(s.id, id);
            assert_eq!(classify(s), class, "{id}");
        }
    }

    #[test]
    fn lookups() {
        let s = lookup("Fbar_n02").unwrap();
        assert_eq!(s.proposition.claim(), (Agent::W, Outcome::FAIL));
        assert_eq!(s.assumed_context, MeasurementContext::ZBAR_W);
        let s = lookup("F_n12").unwrap();
        assert_eq!(s.proposition.claim(), (Agent::Fbar, Outcome::T));
        assert_eq!(classify(&s), Classification::ContextValid);
        assert!(equivalent(&lookup("W_n28").unwrap(), &lookup("Wbar_n24").unwrap()));
        assert!(!equivalent(&lookup("F_n14").unwrap(), &lookup("Wbar_n24").unwrap()));
        assert!(matches!(lookup("X_n99"), Err(Error::UnknownLabel(_))));
    }

    #[test]
    fn nesting_is_one_level() {
        let once = Proposition::certain(Agent::F, w_fails()).unwrap();
        assert_eq!(once.depth(), 1);
        assert!(matches!(Proposition::certain(Agent::Wbar, once), Err(Error::NestingTooDeep(_))));
    }

    #[test]
    fn backing_matches_tables() {
        for s in builtin_statements() {
            match s.backing {
                Backing::Rule(_) => assert_eq!(s.backing.probability().unwrap(), Some(0.0), "{}", s.id),
                Backing::Observed { .. } => {
                    assert!((s.backing.probability().unwrap().unwrap() - 1.0 / 12.0).abs() < 1e-12)
                }
                Backing::Derived => assert!(!s.premises.is_empty()),
            }
        }
    }

    #[test]
    fn contradiction_with_everything_allowed() {
        let report = run_trace(AxiomSet::all()).unwrap();
        let c = report.contradiction.unwrap();
        assert_eq!(c.witness.composed, 0.0);
        assert!((c.witness.actual - 1.0 / 12.0).abs() < 1e-12);
        assert_eq!(c.counterfactual_roots, vec!["Fbar_n02", "Wbar_n22"]);
        assert_eq!(c.statements, vec!["Wbar_n24", "W_n28"]);
        assert!(c.certificate.is_valid());
    }

    #[test]
    fn forbidding_composition_removes_it() {
        let options = TraceOptions { counterfactual_composition: false, admitted: None };
        let report = run_trace_with(AxiomSet::all(), &options).unwrap();
        assert!(!report.has_contradiction());
        let derived: Vec<&str> = report.statements.iter().filter(|v| v.derived).map(|v| v.id.as_str()).collect();
        assert_eq!(derived, vec!["F_n12", "W_n26"]);
    }

    #[test]
    fn axiom_toggles() {
        let no_q = run_trace(AxiomSet { Q: false, ..AxiomSet::all() }).unwrap();
        assert!(no_q.statements.iter().all(|v| !v.derived));
        assert!(!no_q.has_contradiction());
        let no_c = run_trace(AxiomSet { C: false, ..AxiomSet::all() }).unwrap();
        assert!(no_c.statements.iter().all(|v| v.derived == lookup(&v.id).unwrap().premises.is_empty()));
        assert!(!no_c.has_contradiction());
        assert!(!run_trace(AxiomSet { S: false, ..AxiomSet::all() }).unwrap().has_contradiction());
    }

    #[test]
    fn report_json() {
        let report = run_trace(AxiomSet::all()).unwrap();
        let json = serde_json::to_value(&report).unwrap();
        assert_eq!(json["contradiction"]["witness"]["composed"], 0.0);
        assert_eq!(json["statements"][0]["classification"], "counterfactual");
        let back: TraceReport = serde_json::from_value(json).unwrap();
        assert_eq!(back, report);
    }
}
