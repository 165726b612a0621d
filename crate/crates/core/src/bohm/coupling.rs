use serde::{Deserialize, Serialize};

use crate::qcore::{Basis, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    /// Quantile (north-west corner) coupling: hidden branches never cross.
    Monotone,
    /// Output drawn independently of the incoming hidden branch.
    Independent,
}

impl std::str::FromStr for CouplingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "monotone" => Ok(CouplingKind::Monotone),
            "independent" => Ok(CouplingKind::Independent),
            _ => Err(format!("unknown coupling '{s}' (expected monotone or independent)")),
        }
    }
}

/// Position of a label in the transport ordering: `h` above `t`, `↑` above
/// `↓`, `ok̄` above `fail̄`, `ok` above `fail`, `+a` above `−a`.
pub fn rank(outcome: Outcome) -> usize {
    match outcome.basis() {
        Basis::Z => 1 - outcome.index(),
        _ => outcome.index(),
    }
}

/// Rule for moving hidden mass from the branches of one basis to the output
/// ports of the next.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportCoupling {
    pub kind: CouplingKind,
}

impl TransportCoupling {
    pub fn new(kind: CouplingKind) -> Self {
        TransportCoupling { kind }
    }

    pub fn monotone() -> Self {
        Self::new(CouplingKind::Monotone)
    }

    pub fn independent() -> Self {
        Self::new(CouplingKind::Independent)
    }

    /// Joint distribution over (input branch, output port) with the given
    /// marginals. Both marginals must sum to the same total.
    pub fn couple(&self, input: &[(Outcome, f64)], output: &[(Outcome, f64)]) -> Coupling {
        let mut inputs = input.to_vec();
        let mut outputs = output.to_vec();
        inputs.sort_by_key(|(o, _)| rank(*o));
        outputs.sort_by_key(|(o, _)| rank(*o));
        let mut joint = vec![vec![0.0; outputs.len()]; inputs.len()];
        match self.kind {
            CouplingKind::Independent => {
                let total: f64 = outputs.iter().map(|(_, p)| p).sum();
                for (i, (_, p)) in inputs.iter().enumerate() {
                    for (j, (_, q)) in outputs.iter().enumerate() {
                        joint[i][j] = p * q / total;
                    }
                }
            }
            CouplingKind::Monotone => {
                // north-west corner rule on the rank-sorted marginals
                let mut supply: Vec<f64> = inputs.iter().map(|(_, p)| *p).collect();
                let mut demand: Vec<f64> = outputs.iter().map(|(_, q)| *q).collect();
                let (mut i, mut j) = (0, 0);
                while i < supply.len() && j < demand.len() {
                    let moved = supply[i].min(demand[j]);
                    joint[i][j] += moved;
                    supply[i] -= moved;
                    demand[j] -= moved;
                    if supply[i] <= demand[j] {
                        i += 1;
                    } else {
                        j += 1;
                    }
                }
            }
        }
        Coupling { inputs, outputs, joint }
    }
}

/// A joint distribution with labeled, rank-sorted rows and columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    inputs: Vec<(Outcome, f64)>,
    outputs: Vec<(Outcome, f64)>,
    joint: Vec<Vec<f64>>,
}

impl Coupling {
    pub fn inputs(&self) -> &[(Outcome, f64)] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[(Outcome, f64)] {
        &self.outputs
    }

    pub fn prob(&self, input: Outcome, output: Outcome) -> f64 {
        let i = self.inputs.iter().position(|(o, _)| *o == input);
        let j = self.outputs.iter().position(|(o, _)| *o == output);
        match (i, j) {
            (Some(i), Some(j)) => self.joint[i][j],
            _ => 0.0,
        }
    }

    pub fn input_mass(&self, input: Outcome) -> f64 {
        self.inputs.iter().find(|(o, _)| *o == input).map_or(0.0, |(_, p)| *p)
    }

    /// Output ports reachable from `input`, with their joint mass.
    pub fn row(&self, input: Outcome) -> Vec<(Outcome, f64)> {
        match self.inputs.iter().position(|(o, _)| *o == input) {
            Some(i) => self.outputs.iter().zip(&self.joint[i]).map(|((o, _), p)| (*o, *p)).collect(),
            None => Vec::new(),
        }
    }

    /// Largest deviation between the joint's row/column sums and the prescribed marginals.
    pub fn marginal_error(&self) -> f64 {
        let rows = self
            .inputs
            .iter()
            .zip(&self.joint)
            .map(|((_, p), row)| (row.iter().sum::<f64>() - p).abs());
        let cols = self
            .outputs
            .iter()
            .enumerate()
            .map(|(j, (_, q))| (self.joint.iter().map(|row| row[j]).sum::<f64>() - q).abs());
        rows.chain(cols).fold(0.0, f64::max)
    }

    /// No two supported pairs cross: a higher-ranked input never lands below a
    /// lower-ranked input's output.
    pub fn is_non_crossing(&self) -> bool {
        let support: Vec<(usize, usize)> = (0..self.inputs.len())
            .flat_map(|i| (0..self.outputs.len()).map(move |j| (i, j)))
            .filter(|&(i, j)| self.joint[i][j] > 0.0)
            .collect();
        support
            .iter()
            .all(|&(i1, j1)| support.iter().all(|&(i2, j2)| !(i1 < i2 && j1 > j2)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_convention() {
        assert!(rank(Outcome::H) < rank(Outcome::T));
        assert!(rank(Outcome::UP) < rank(Outcome::DOWN));
        assert!(rank(Outcome::OK_BAR) < rank(Outcome::FAIL_BAR));
        assert!(rank(Outcome::OK) < rank(Outcome::FAIL));
    }

    #[test]
    fn monotone_quantile_split() {
        // coin given spin = fail under foliation F: h 1/5, t 4/5 onto okbar 1/10, failbar 9/10
        let c = TransportCoupling::monotone().couple(
            &[(Outcome::T, 0.8), (Outcome::H, 0.2)],
            &[(Outcome::FAIL_BAR, 0.9), (Outcome::OK_BAR, 0.1)],
        );
        assert!((c.prob(Outcome::H, Outcome::OK_BAR) - 0.1).abs() < 1e-15);
        assert!((c.prob(Outcome::H, Outcome::FAIL_BAR) - 0.1).abs() < 1e-15);
        assert_eq!(c.prob(Outcome::T, Outcome::OK_BAR), 0.0);
        assert!((c.prob(Outcome::T, Outcome::FAIL_BAR) - 0.8).abs() < 1e-15);
        assert!(c.marginal_error() < 1e-15);
        assert!(c.is_non_crossing());
    }

    #[test]
    fn independent_is_a_product() {
        let c = TransportCoupling::independent()
            .couple(&[(Outcome::H, 0.2), (Outcome::T, 0.8)], &[(Outcome::OK_BAR, 0.1), (Outcome::FAIL_BAR, 0.9)]);
        assert!((c.prob(Outcome::T, Outcome::OK_BAR) - 0.08).abs() < 1e-15);
        assert!(c.marginal_error() < 1e-15);
        assert!(!c.is_non_crossing());
    }

    #[test]
    fn single_input_splits_by_output() {
        let c = TransportCoupling::monotone().couple(&[(Outcome::DOWN, 1.0)], &[(Outcome::OK, 0.5), (Outcome::FAIL, 0.5)]);
        assert_eq!(c.row(Outcome::DOWN), vec![(Outcome::OK, 0.5), (Outcome::FAIL, 0.5)]);
    }
}
