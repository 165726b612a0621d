//! CHSH statistics of the singlet against the local model in which both
//! friends' outcomes exist side by side.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::{record_and_erase, record_and_keep, FinalState, Friend};
use crate::qcore::{born_distribution, Basis, Outcome, OutcomeDistribution, StateVector};

/// `(|↑₁,↓₂⟩ − |↓₁,↑₂⟩)/√2`.
pub fn singlet() -> StateVector {
    let r = FRAC_1_SQRT_2;
    let up_down = StateVector::basis_state(&[Outcome::UP, Outcome::DOWN]);
    let down_up = StateVector::basis_state(&[Outcome::DOWN, Outcome::UP]);
    let amps = up_down
        .amplitudes()
        .iter()
        .zip(down_up.amplitudes())
        .map(|(a, b)| (a - b) * r)
        .collect();
    StateVector::new(amps, vec![Basis::Z, Basis::Z]).expect("singlet is normalized")
}

/// `⟨A·B⟩` of the ±1 outcomes in a two-site axis context.
pub fn correlation_of(dist: &OutcomeDistribution) -> f64 {
    dist.entries().iter().map(|(labels, p)| labels[0].sign() * labels[1].sign() * p).sum()
}

pub fn axis_context(alpha: f64, beta: f64) -> [Basis; 2] {
    [Basis::axis(alpha), Basis::axis(beta)]
}

/// Singlet correlation obtained from its Born table.
pub fn quantum_correlation(alpha: f64, beta: f64) -> f64 {
    let dist = born_distribution(&singlet(), &axis_context(alpha, beta)).expect("singlet lives on two spins");
    correlation_of(&dist)
}

/// Hidden configuration `(spin₁, spin₂)` with its prior weight.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lambda {
    pub first: Outcome,
    pub second: Outcome,
    pub prior: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LHVModel {
    pub lambdas: Vec<Lambda>,
}

impl Default for LHVModel {
    /// Anticorrelated spins, each orientation with probability 1/2.
    fn default() -> Self {
        let l = |first, second, prior| Lambda { first, second, prior };
        LHVModel {
            lambdas: vec![
                l(Outcome::UP, Outcome::DOWN, 0.5),
                l(Outcome::DOWN, Outcome::UP, 0.5),
                l(Outcome::UP, Outcome::UP, 0.0),
                l(Outcome::DOWN, Outcome::DOWN, 0.0),
            ],
        }
    }
}

impl LHVModel {
    /// `[P(+a|spin), P(−a|spin)]`: `cos²(α/2)` for `+a` given `↑`, `sin²(α/2)` given `↓`.
    pub fn response(spin: Outcome, alpha: f64) -> [f64; 2] {
        let (c, s) = ((alpha / 2.0).cos().powi(2), (alpha / 2.0).sin().powi(2));
        if spin == Outcome::UP {
            [c, s]
        } else {
            [s, c]
        }
    }

    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.lambdas.iter().map(|l| l.prior).sum();
        if (total - 1.0).abs() > 1e-12 || self.lambdas.iter().any(|l| l.prior < 0.0) {
            return Err(Error::Invariant(format!("prior sums to {total}")));
        }
        if let Some(l) = self.lambdas.iter().find(|l| l.first.basis() != Basis::Z || l.second.basis() != Basis::Z) {
            return Err(Error::BasisMismatch(format!("hidden spins must be z labels, got {}", l.first)));
        }
        Ok(())
    }

    /// `P(x, y | α, β) = Σ_λ P₁(x|λ) P₂(y|λ) P(λ)`, indexed by `[x][y]` with 0 = `+`.
    pub fn joint(&self, alpha: f64, beta: f64) -> [[f64; 2]; 2] {
        let mut joint = [[0.0; 2]; 2];
        for l in &self.lambdas {
            let (p1, p2) = (Self::response(l.first, alpha), Self::response(l.second, beta));
            for x in 0..2 {
                for y in 0..2 {
                    joint[x][y] += p1[x] * p2[y] * l.prior;
                }
            }
        }
        joint
    }
}

pub fn lhv_correlation(model: &LHVModel, alpha: f64, beta: f64) -> f64 {
    let local_mean = |spin, angle| {
        let [plus, minus] = LHVModel::response(spin, angle);
        plus - minus
    };
    model.lambdas.iter().map(|l| local_mean(l.first, alpha) * local_mean(l.second, beta) * l.prior).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleQuad {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl AngleQuad {
    /// Angles are reduced to `[0, 2π)`.
    pub fn new(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        let m = |x: f64| {
            let r = x.rem_euclid(TAU);
            if r >= TAU {
                0.0
            } else {
                r
            }
        };
        AngleQuad { a: m(a), a_prime: m(a_prime), b: m(b), b_prime: m(b_prime) }
    }

    /// `(0, π/2, π/4, −π/4)`, where the singlet reaches `2√2`.
    pub fn tsirelson() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        Self::new(0.0, FRAC_PI_2, FRAC_PI_4, -FRAC_PI_4)
    }

    fn from_array(x: [f64; 4]) -> Self {
        Self::new(x[0], x[1], x[2], x[3])
    }
}

impl fmt::Display for AngleQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.6}, {:.6}, {:.6}, {:.6})", self.a, self.a_prime, self.b, self.b_prime)
    }
}

impl FromStr for AngleQuad {
    type Err = String;

    /// Four comma-separated radians: `a,a',b,b'`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts = s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad angle '{p}': {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        match parts[..] {
            [a, ap, b, bp] if parts.iter().all(|x| x.is_finite()) => Ok(Self::new(a, ap, b, bp)),
            [_, _, _, _] => Err("angles must be finite".into()),
            _ => Err(format!("expected four angles a,a',b,b', got {}", parts.len())),
        }
    }
}

/// `S = |E(a,b) + E(a′,b) + E(a,b′) − E(a′,b′)|`.
pub fn chsh(correlation: impl Fn(f64, f64) -> f64, quad: &AngleQuad) -> f64 {
    (correlation(quad.a, quad.b) + correlation(quad.a_prime, quad.b) + correlation(quad.a, quad.b_prime)
        - correlation(quad.a_prime, quad.b_prime))
    .abs()
}

/// Downhill simplex maximization from `start`.
fn nelder_mead_max(f: impl Fn([f64; 4]) -> f64, start: [f64; 4], step: f64, tol: f64) -> ([f64; 4], f64) {
    let neg = |x: [f64; 4]| -f(x);
    let mut simplex: Vec<([f64; 4], f64)> = (0..5)
        .map(|i| {
            let mut x = start;
            if i > 0 {
                x[i - 1] += step;
            }
            (x, neg(x))
        })
        .collect();
    let lerp = |a: [f64; 4], b: [f64; 4], t: f64| std::array::from_fn(|k| a[k] + t * (b[k] - a[k]));
    for _ in 0..10_000 {
        simplex.sort_by(|p, q| p.1.total_cmp(&q.1));
        if simplex[4].1 - simplex[0].1 < tol {
            break;
        }
        let centroid: [f64; 4] = std::array::from_fn(|k| simplex[..4].iter().map(|p| p.0[k]).sum::<f64>() / 4.0);
        let worst = simplex[4];
        let reflected = lerp(centroid, worst.0, -1.0);
        let fr = neg(reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(centroid, worst.0, -2.0);
            let fe = neg(expanded);
            simplex[4] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[3].1 {
            simplex[4] = (reflected, fr);
        } else {
            let contracted = lerp(centroid, worst.0, 0.5);
            let fc = neg(contracted);
            if fc < worst.1 {
                simplex[4] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for p in simplex.iter_mut().skip(1) {
                    p.0 = lerp(best, p.0, 0.5);
                    p.1 = neg(p.0);
                }
            }
        }
    }
    simplex.sort_by(|p, q| p.1.total_cmp(&q.1));
    (simplex[0].0, -simplex[0].1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub resolution: usize,
    pub grid_max: f64,
    pub grid_argmax: AngleQuad,
    pub max: f64,
    pub argmax: AngleQuad,
}

/// Maximizes `S` over a `resolution⁴` grid on `[0, 2π)⁴`, then refines the
/// best grid point with a downhill simplex.
pub fn scan_chsh(correlation: impl Fn(f64, f64) -> f64, resolution: usize) -> ScanResult {
    let angles: Vec<f64> = (0..resolution).map(|i| TAU * i as f64 / resolution as f64).collect();
    // S only needs E on pairs of grid angles
    let table: Vec<Vec<f64>> = angles.iter().map(|&a| angles.iter().map(|&b| correlation(a, b)).collect()).collect();
    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    for a in 0..resolution {
        for ap in 0..resolution {
            for b in 0..resolution {
                for bp in 0..resolution {
                    let s = (table[a][b] + table[ap][b] + table[a][bp] - table[ap][bp]).abs();
                    if s > best.0 {
                        best = (s, [a, ap, b, bp]);
                    }
                }
            }
        }
    }
    let grid_point = best.1.map(|i| angles[i]);
    let s_at = |x: [f64; 4]| chsh(&correlation, &AngleQuad::from_array(x));
    let (x, refined) = nelder_mead_max(s_at, grid_point, TAU / resolution as f64 / 2.0, 1e-15);
    let (max, argmax) = if refined > best.0 { (refined, x) } else { (best.0, grid_point) };
    ScanResult {
        resolution,
        grid_max: best.0,
        grid_argmax: AngleQuad::from_array(grid_point),
        max,
        argmax: AngleQuad::from_array(argmax),
    }
}

pub const GRID_RESOLUTION: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellReport {
    pub quad: AngleQuad,
    #[serde(rename = "S_quantum")]
    pub s_quantum: f64,
    #[serde(rename = "S_lhv")]
    pub s_lhv: f64,
    #[serde(rename = "S_lhv_max")]
    pub s_lhv_max: f64,
    pub argmax_quad: AngleQuad,
    pub grid_resolution: usize,
}

pub fn bell_report(quad: AngleQuad) -> BellReport {
    let model = LHVModel::default();
    let lhv = |a, b| lhv_correlation(&model, a, b);
    let scan = scan_chsh(lhv, GRID_RESOLUTION);
    BellReport {
        quad,
        s_quantum: chsh(quantum_correlation, &quad),
        s_lhv: chsh(lhv, &quad),
        s_lhv_max: scan.max,
        argmax_quad: scan.argmax,
        grid_resolution: GRID_RESOLUTION,
    }
}

/// Correlation of a friends' protocol outcome on the singlet.
pub fn final_correlation(state: &FinalState, alpha: f64, beta: f64) -> Result<f64> {
    Ok(correlation_of(&state.table(&axis_context(alpha, beta))?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErasedVsKept {
    pub quad: AngleQuad,
    /// Both friends record in z and erase.
    pub erased_s: f64,
    pub erased_coherent: bool,
    /// Both friends record in z and keep.
    pub kept_s: f64,
    pub kept_s_max: f64,
    /// Largest gap between the kept-record correlation and `−cos α cos β` on the grid.
    pub kept_vs_lhv_gap: f64,
    pub grid_points: usize,
}

pub fn erased_vs_kept_chsh() -> Result<ErasedVsKept> {
    let quad = AngleQuad::tsirelson();
    let erased = record_and_erase(&singlet(), Friend::Fbar, Basis::Z)?
        .record(Friend::F, Basis::Z)?
        .erase(Friend::F)?
        .final_state()?;
    let kept = record_and_keep(&singlet(), &[Friend::Fbar, Friend::F])?.final_state()?;
    let e_erased = |a, b| final_correlation(&erased, a, b).expect("two-spin context");
    let e_kept = |a, b| final_correlation(&kept, a, b).expect("two-spin context");

    let grid_points = 100;
    let grid: Vec<f64> = (0..grid_points).map(|i| TAU * i as f64 / grid_points as f64).collect();
    let model = LHVModel::default();
    let kept_vs_lhv_gap = grid
        .iter()
        .flat_map(|&a| grid.iter().map(move |&b| (a, b)))
        .map(|(a, b)| (e_kept(a, b) - lhv_correlation(&model, a, b)).abs())
        .fold(0.0, f64::max);
    Ok(ErasedVsKept {
        quad,
        erased_s: chsh(e_erased, &quad),
        erased_coherent: erased.is_coherent(),
        kept_s: chsh(e_kept, &quad),
        kept_s_max: scan_chsh(e_kept, GRID_RESOLUTION).max,
        kept_vs_lhv_gap,
        grid_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::C64;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    #[test]
    fn singlet_shape() {
        let s = singlet();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        let expected = [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0];
        // equal to the listed amplitudes up to an overall sign
        let phase = if s.amplitudes()[1].re > 0.0 { 1.0 } else { -1.0 };
        for (z, e) in s.amplitudes().iter().zip(expected) {
            assert!((z - C64::new(phase * e, 0.0)).norm() < 1e-15);
        }
        assert!((s.amplitude(&[Outcome::UP, Outcome::DOWN]).unwrap().re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn quantum_examples() {
        assert!((quantum_correlation(0.0, 0.0) + 1.0).abs() < 1e-12);
        assert!(quantum_correlation(0.0, FRAC_PI_2).abs() < 1e-12);
        assert!((quantum_correlation(0.0, FRAC_PI_4) + FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn lhv_examples() {
        let m = LHVModel::default();
        m.validate().unwrap();
        assert!((lhv_correlation(&m, 0.0, 0.0) + 1.0).abs() < 1e-12);
        assert!(lhv_correlation(&m, FRAC_PI_2, 1.234).abs() < 1e-12);
        assert!((lhv_correlation(&m, 0.0, FRAC_PI_4) + FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn response_is_the_spin_overlap() {
        for k in 0..16 {
            let alpha = k as f64 * 0.4;
            for spin in [Outcome::UP, Outcome::DOWN] {
                let r = LHVModel::response(spin, alpha);
                let overlap = |o: Outcome| {
                    let (v, w) = (o.vector(), spin.vector());
                    (v[0].conj() * w[0] + v[1].conj() * w[1]).norm_sqr()
                };
                assert!((r[0] - overlap(Outcome::plus(alpha))).abs() < 1e-12);
                assert!((r[0] + r[1] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn lhv_joint_matches_correlation() {
        let m = LHVModel::default();
        let j = m.joint(0.7, 2.1);
        let e = j[0][0] - j[0][1] - j[1][0] + j[1][1];
        assert!((e - lhv_correlation(&m, 0.7, 2.1)).abs() < 1e-12);
        assert!((j.iter().flatten().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tsirelson_quad() {
        let s = chsh(quantum_correlation, &AngleQuad::tsirelson());
        assert!((s - 2.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn degenerate_quad() {
        let q = AngleQuad::new(0.3, 0.3, 1.1, 1.1);
        assert!((chsh(quantum_correlation, &q) - 2.0 * quantum_correlation(0.3, 1.1).abs()).abs() < 1e-12);
    }

    #[test]
    fn quad_parsing() {
        let q: AngleQuad = "0, 1.5707963267948966, 0.7853981633974483, -0.7853981633974483".parse().unwrap();
        assert!((q.b_prime - 7.0 * FRAC_PI_4).abs() < 1e-12);
        assert!("1,2,3".parse::<AngleQuad>().is_err());
        assert!("1,2,x,4".parse::<AngleQuad>().is_err());
        assert!("1,2,inf,4".parse::<AngleQuad>().is_err());
        assert!((AngleQuad::new(-PI, 0.0, 0.0, 0.0).a - PI).abs() < 1e-12);
    }

    #[test]
    fn simplex_finds_a_peak() {
        let f = |x: [f64; 4]| -x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>();
        let (x, v) = nelder_mead_max(f, [0.0; 4], 0.5, 1e-18);
        assert!(v > -1e-12);
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-5));
    }

    #[test]
    fn erased_and_kept() {
        let r = erased_vs_kept_chsh().unwrap();
        assert!(r.erased_coherent);
        assert!((r.erased_s - 2.0 * SQRT_2).abs() < 1e-9);
        assert!(r.kept_s <= 2.0 + 1e-9);
        assert!((r.kept_s_max - 2.0).abs() < 1e-9);
        assert!(r.kept_vs_lhv_gap < 1e-12);
    }
}
