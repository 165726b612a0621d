use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::basis::{Basis, Outcome, SystemKind, C64};
use crate::error::{Error, Result};
use crate::numfmt;

pub const NORM_TOLERANCE: f64 = 1e-12;
const CONSTRUCTION_TOLERANCE: f64 = 1e-9;
const ZERO_BRANCH: f64 = 1e-15;

/// Pure state of a register of qubit sites, with the local basis each site is
/// currently expressed in. Site 0 is the most significant tensor index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    bases: Vec<Basis>,
    amps: Vec<C64>,
}

/// Builds a normalized state from raw amplitudes. `bases` fixes both the number
/// of sites and the basis each amplitude index refers to.
pub fn make_state(amplitudes: &[C64], bases: &[Basis]) -> Result<StateVector> {
    StateVector::new(amplitudes.to_vec(), bases.to_vec())
}

impl StateVector {
    pub fn new(amps: Vec<C64>, bases: Vec<Basis>) -> Result<Self> {
        let expected = 1usize << bases.len();
        if amps.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: amps.len() });
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < ZERO_BRANCH {
            return Err(Error::NullState);
        }
        if (norm - 1.0).abs() > CONSTRUCTION_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        let amps = amps.into_iter().map(|a| a / norm).collect();
        Ok(StateVector { bases, amps })
    }

    /// Computational-basis product state `|o_0, o_1, ...⟩`.
    pub fn basis_state(outcomes: &[Outcome]) -> Self {
        let bases: Vec<Basis> = outcomes.iter().map(|o| o.basis()).collect();
        let mut amps = vec![C64::new(0.0, 0.0); 1 << outcomes.len()];
        amps[tensor_index(outcomes)] = C64::new(1.0, 0.0);
        StateVector { bases, amps }
    }

    pub fn sites(&self) -> usize {
        self.bases.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![2; self.sites()]
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn site_kinds(&self) -> Vec<SystemKind> {
        self.bases.iter().map(|b| b.system_kind()).collect()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, outcomes: &[Outcome]) -> Result<C64> {
        self.check_labels(outcomes)?;
        Ok(self.amps[tensor_index(outcomes)])
    }

    fn check_site(&self, system: usize) -> Result<()> {
        if system >= self.sites() {
            return Err(Error::SystemOutOfRange { index: system, sites: self.sites() });
        }
        Ok(())
    }

    fn check_labels(&self, outcomes: &[Outcome]) -> Result<()> {
        if outcomes.len() != self.sites() {
            return Err(Error::DimensionMismatch { expected: self.sites(), got: outcomes.len() });
        }
        for (site, (o, b)) in outcomes.iter().zip(&self.bases).enumerate() {
            if o.basis() != *b {
                return Err(Error::BasisMismatch(format!(
                    "label {o} is not in basis {b} of site {site}"
                )));
            }
        }
        Ok(())
    }

    pub fn apply_local(&self, unitary: &LocalUnitary) -> Result<Self> {
        self.check_site(unitary.system)?;
        if self.bases[unitary.system] != unitary.from {
            return Err(Error::BasisMismatch(format!(
                "site {} is in {}, unitary expects {}",
                unitary.system, self.bases[unitary.system], unitary.from
            )));
        }
        let mut amps = self.amps.clone();
        let bit = 1usize << (self.sites() - 1 - unitary.system);
        let m = &unitary.matrix;
        for i in 0..amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                amps[i] = m[0][0] * a0 + m[0][1] * a1;
                amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        let mut bases = self.bases.clone();
        bases[unitary.system] = unitary.to;
        Ok(StateVector { bases, amps })
    }

    /// Re-expresses one site in another basis of the same system.
    pub fn rebase(&self, system: usize, basis: Basis) -> Result<Self> {
        self.check_site(system)?;
        if self.bases[system] == basis {
            return Ok(self.clone());
        }
        self.apply_local(&LocalUnitary::basis_change(system, self.bases[system], basis)?)
    }

    pub fn in_context(&self, context: &[Basis]) -> Result<Self> {
        if context.len() != self.sites() {
            return Err(Error::DimensionMismatch { expected: self.sites(), got: context.len() });
        }
        context
            .iter()
            .enumerate()
            .try_fold(self.clone(), |state, (site, basis)| state.rebase(site, *basis))
    }

    /// Amplitudes in the all-computational basis.
    pub fn computational_amplitudes(&self) -> Vec<C64> {
        let mut amps = self.amps.clone();
        let n = self.sites();
        for (site, basis) in self.bases.iter().enumerate() {
            let v = basis.vectors();
            let bit = 1usize << (n - 1 - site);
            for i in 0..amps.len() {
                if i & bit == 0 {
                    let (a0, a1) = (amps[i], amps[i | bit]);
                    amps[i] = v[0][0] * a0 + v[1][0] * a1;
                    amps[i | bit] = v[0][1] * a0 + v[1][1] * a1;
                }
            }
        }
        amps
    }

    /// `⟨self|other⟩`, independent of the bases either state is expressed in.
    pub fn overlap(&self, other: &StateVector) -> Result<C64> {
        if self.sites() != other.sites() {
            return Err(Error::DimensionMismatch { expected: self.sites(), got: other.sites() });
        }
        let a = self.computational_amplitudes();
        let b = other.computational_amplitudes();
        Ok(a.iter().zip(&b).map(|(x, y)| x.conj() * y).sum())
    }

    /// Projects `system` onto `outcome` and renormalizes. A label from another
    /// basis of the same system rebases that site first.
    pub fn project(&self, system: usize, outcome: Outcome) -> Result<(Self, f64)> {
        self.check_site(system)?;
        if outcome.system_kind() != self.bases[system].system_kind() {
            return Err(Error::BasisMismatch(format!(
                "label {outcome} does not belong to a {} site",
                self.bases[system].system_kind()
            )));
        }
        let state = self.rebase(system, outcome.basis())?;
        let bit = 1usize << (self.sites() - 1 - system);
        let keep = |i: usize| ((i & bit != 0) as usize) == outcome.index();
        let probability: f64 = state
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if probability < ZERO_BRANCH {
            return Err(Error::ZeroProbabilityBranch);
        }
        let scale = probability.sqrt();
        let amps = state
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if keep(i) { a / scale } else { C64::new(0.0, 0.0) })
            .collect();
        Ok((StateVector { bases: state.bases, amps }, probability))
    }

    /// The normalized state of the remaining sites given `system` sits in
    /// `outcome`, together with that outcome's probability.
    pub fn condition_on(&self, system: usize, outcome: Outcome) -> Result<(Self, f64)> {
        let (collapsed, probability) = self.project(system, outcome)?;
        let n = self.sites();
        let bit = 1usize << (n - 1 - system);
        let amps: Vec<C64> = collapsed
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| ((i & bit != 0) as usize) == outcome.index())
            .map(|(_, a)| *a)
            .collect();
        let mut bases = collapsed.bases;
        bases.remove(system);
        Ok((StateVector { bases, amps }, probability))
    }
}

pub(crate) fn tensor_index(outcomes: &[Outcome]) -> usize {
    outcomes.iter().fold(0, |acc, o| (acc << 1) | o.index())
}

pub(crate) fn labels_at(bases: &[Basis], index: usize) -> Vec<Outcome> {
    let n = bases.len();
    bases
        .iter()
        .enumerate()
        .map(|(site, b)| b.outcomes()[(index >> (n - 1 - site)) & 1])
        .collect()
}

/// A 2×2 unitary acting on one site's amplitudes, moving it from basis `from`
/// to basis `to`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalUnitary {
    system: usize,
    matrix: [[C64; 2]; 2],
    from: Basis,
    to: Basis,
}

impl LocalUnitary {
    pub fn new(system: usize, matrix: [[C64; 2]; 2], from: Basis, to: Basis) -> Result<Self> {
        if from.system_kind() != to.system_kind() {
            return Err(Error::BasisMismatch(format!("{from} and {to} belong to different systems")));
        }
        for i in 0..2 {
            for j in 0..2 {
                let entry: C64 = (0..2).map(|k| matrix[k][i].conj() * matrix[k][j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (entry - C64::new(target, 0.0)).norm() > NORM_TOLERANCE {
                    return Err(Error::NotUnitary);
                }
            }
        }
        Ok(LocalUnitary { system, matrix, from, to })
    }

    /// The basis change `M[i][j] = ⟨to_i|from_j⟩`. From `Z` to `W` this is the
    /// spin beam splitter `↑ → (fail + ok)/√2`, `↓ → (fail − ok)/√2`.
    pub fn basis_change(system: usize, from: Basis, to: Basis) -> Result<Self> {
        let f = from.vectors();
        let t = to.vectors();
        let mut matrix = [[C64::new(0.0, 0.0); 2]; 2];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = t[i][0].conj() * f[j][0] + t[i][1].conj() * f[j][1];
            }
        }
        LocalUnitary::new(system, matrix, from, to)
    }

    pub fn identity(system: usize, basis: Basis) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        LocalUnitary { system, matrix: [[one, zero], [zero, one]], from: basis, to: basis }
    }

    pub fn system(&self) -> usize {
        self.system
    }

    pub fn matrix(&self) -> [[C64; 2]; 2] {
        self.matrix
    }

    pub fn from_basis(&self) -> Basis {
        self.from
    }

    pub fn to_basis(&self) -> Basis {
        self.to
    }
}

/// Joint outcome probabilities for one measurement context, in tensor order.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    bases: Vec<Basis>,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub(crate) fn from_parts(bases: Vec<Basis>, probs: Vec<f64>) -> Self {
        OutcomeDistribution { bases, probs }
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcomes: &[Outcome]) -> Result<f64> {
        if outcomes.len() != self.bases.len() {
            return Err(Error::DimensionMismatch { expected: self.bases.len(), got: outcomes.len() });
        }
        for (o, b) in outcomes.iter().zip(&self.bases) {
            if o.basis() != *b {
                return Err(Error::OutcomeNotInContext(format!("{o} is not a {b} outcome")));
            }
        }
        Ok(self.probs[tensor_index(outcomes)])
    }

    pub fn entries(&self) -> Vec<(Vec<Outcome>, f64)> {
        (0..self.probs.len()).map(|i| (labels_at(&self.bases, i), self.probs[i])).collect()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn marginal(&self, system: usize) -> Result<[(Outcome, f64); 2]> {
        if system >= self.bases.len() {
            return Err(Error::SystemOutOfRange { index: system, sites: self.bases.len() });
        }
        let [o0, o1] = self.bases[system].outcomes();
        let mut m = [(o0, 0.0), (o1, 0.0)];
        for (labels, p) in self.entries() {
            m[labels[system].index()].1 += p;
        }
        Ok(m)
    }

    pub fn max_abs_diff(&self, other: &OutcomeDistribution) -> Option<f64> {
        if self.bases != other.bases {
            return None;
        }
        Some(self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

pub(crate) fn outcome_key(labels: &[Outcome]) -> String {
    labels.iter().map(|o| o.name()).collect::<Vec<_>>().join(",")
}

impl Serialize for OutcomeDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.probs.len()))?;
        for (labels, p) in self.entries() {
            map.serialize_entry(&outcome_key(&labels), &numfmt::decimal(p))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for OutcomeDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct TableVisitor;

        impl<'de> Visitor<'de> for TableVisitor {
            type Value = OutcomeDistribution;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a map from comma-joined outcome labels to decimal strings")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
                let mut entries: Vec<(Vec<Outcome>, f64)> = Vec::new();
                while let Some((key, value)) = access.next_entry::<String, String>()? {
                    let labels = key
                        .split(',')
                        .map(|s| s.parse::<Outcome>())
                        .collect::<Result<Vec<_>>>()
                        .map_err(de::Error::custom)?;
                    let p = numfmt::parse_decimal(&value).map_err(de::Error::custom)?;
                    entries.push((labels, p));
                }
                let bases: Vec<Basis> = entries
                    .first()
                    .ok_or_else(|| de::Error::custom("empty table"))?
                    .0
                    .iter()
                    .map(|o| o.basis())
                    .collect();
                let mut probs = vec![f64::NAN; 1 << bases.len()];
                for (labels, p) in entries {
                    let same_bases = labels.len() == bases.len()
                        && labels.iter().zip(&bases).all(|(o, b)| o.basis() == *b);
                    if !same_bases {
                        return Err(de::Error::custom("table mixes bases"));
                    }
                    probs[tensor_index(&labels)] = p;
                }
                if probs.iter().any(|p| p.is_nan()) {
                    return Err(de::Error::custom("table is missing outcomes"));
                }
                Ok(OutcomeDistribution { bases, probs })
            }
        }

        deserializer.deserialize_map(TableVisitor)
    }
}

/// Born-rule probabilities of every joint outcome in `context`, computed as
/// full tensor-product inner products `|⟨b_0 ⊗ b_1 ⊗ ...|ψ⟩|²`.
pub fn born_distribution(state: &StateVector, context: &[Basis]) -> Result<OutcomeDistribution> {
    if context.len() != state.sites() {
        return Err(Error::DimensionMismatch { expected: state.sites(), got: context.len() });
    }
    for (site, (b, current)) in context.iter().zip(state.bases()).enumerate() {
        if b.system_kind() != current.system_kind() {
            return Err(Error::BasisMismatch(format!("{b} cannot measure site {site}")));
        }
    }
    let psi = state.computational_amplitudes();
    let n = context.len();
    let probs = (0..psi.len())
        .map(|index| {
            let labels = labels_at(context, index);
            let amp: C64 = (0..psi.len())
                .map(|k| {
                    let coefficient: C64 = labels
                        .iter()
                        .enumerate()
                        .map(|(site, o)| o.vector()[(k >> (n - 1 - site)) & 1].conj())
                        .product();
                    coefficient * psi[k]
                })
                .sum();
            amp.norm_sqr()
        })
        .collect();
    Ok(OutcomeDistribution { bases: context.to_vec(), probs })
}
