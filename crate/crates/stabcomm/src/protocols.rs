//! Stabilizer testing: the six-copy qubit test built on Bell difference
//! sampling, the `2s`-copy qudit test, the three-copy test for `d` coprime to 6,
//! Clifford testing through Choi states, and Wigner negativity bounds.
//!
//! Each acceptance probability is computed twice: once from moments of the
//! characteristic or Wigner function and once from the accepting operator
//! applied to the tensor-power state.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::commutant::{anti_permutation, big_r_relation, monomial_power, AntiKind, RELATION_CAP};
use crate::dense::check_dim;
use crate::error::{Error, Result};
use crate::phase_space::{
    add_points, all_points, char_distribution, point_operator, qudit_count, sub_points, symplectic, weyl_monomial,
    wigner_state, Monomial,
};
use crate::scalar::C;
use crate::stabilizer::{ensemble, Operator, State};

/// Agreement required between two routes to the same probability.
pub const ROUTE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Qubit6,
    Qudit2s,
    ThreeCopy,
    Clifford,
    Algorithm1,
    Hudson,
}

#[derive(Clone, Debug, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProtocolReport {
    pub protocol: Protocol,
    pub input: String,
    pub d: u32,
    pub n: usize,
    pub p_accept: Option<f64>,
    /// Soundness bound evaluated at `ε² = 1 - max_overlap`.
    pub bound: Option<f64>,
    pub max_overlap: Option<f64>,
    pub shots: Option<u64>,
    /// `Some(true)` iff the input is a stabilizer state and was accepted with certainty.
    pub complete: Option<bool>,
    pub metrics: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
}

impl ProtocolReport {
    fn new(protocol: Protocol, input: &str, d: u32, n: usize) -> Self {
        Self {
            protocol,
            input: input.to_string(),
            d,
            n,
            p_accept: None,
            bound: None,
            max_overlap: None,
            shots: None,
            complete: None,
            metrics: BTreeMap::new(),
            assertions: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.assertions.push(Assertion { name: name.to_string(), passed, detail });
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.to_string(), v);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    /// Records the overlap, the bound `1 - c ε²`, and the completeness and
    /// soundness assertions.
    fn finish(&mut self, p: f64, overlap: Option<f64>, c: f64) {
        self.p_accept = Some(p);
        self.check("probability range", (-1e-10..=1.0 + 1e-10).contains(&p), format!("p_accept = {p}"));
        let Some(f) = overlap else { return };
        let eps2 = (1.0 - f).max(0.0);
        let bound = 1.0 - c * eps2;
        self.max_overlap = Some(f);
        self.bound = Some(bound);
        let stab = f > 1.0 - 1e-10;
        let complete = stab && (p - 1.0).abs() < 1e-10;
        self.complete = Some(complete);
        if stab {
            self.check("completeness", complete, format!("stabilizer input, p_accept = {p}"));
        }
        self.check("soundness", p <= bound + 1e-10, format!("p_accept = {p} ≤ {bound}"));
    }
}

/// `max_S |⟨S|ψ⟩|²` when the ensemble is within the enumeration caps.
fn overlap_if_enumerable(psi: &State, n: usize, d: u32) -> Option<f64> {
    ensemble(n, d).ok().and_then(|e| e.max_overlap(psi).ok()).map(|(_, v)| v)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BellOutcomeDistribution {
    pub n: usize,
    /// Probability of each difference `a`, in point-index order.
    pub probs: Vec<f64>,
}

impl BellOutcomeDistribution {
    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }
}

fn require_qubits(psi: &State) -> Result<usize> {
    qudit_count(psi.dim(), 2).map_err(|_| Error::InvalidInput(format!("dimension {} is not a qubit register", psi.dim())))
}

/// Distribution of the difference of two Bell samples on `ψ^{⊗4}`.
///
/// Computed as the convolution `q(a) = Σ_x p(x) p(x+a)` and, when the four-copy
/// register fits, as `tr[Π_a ψ^{⊗4}]` with `Π_a = 4^{-n} Σ_x (-1)^{[a,x]} W_x^{⊗4}`.
pub fn bell_difference_distribution(psi: &State) -> Result<BellOutcomeDistribution> {
    let n = require_qubits(psi)?;
    let p = char_distribution(2, psi)?;
    let pts = all_points(n, 2);
    let conv: Vec<f64> = pts
        .iter()
        .map(|a| pts.iter().map(|x| p.at(x) * p.at(&add_points(x, a, 2))).sum())
        .collect();
    if 16f64.powi(n as i32) <= (1u64 << 16) as f64 {
        let psi4 = psi.kron_power(4)?;
        let e: Vec<f64> = pts
            .iter()
            .map(|x| monomial_power(&weyl_monomial(2, x), 4).map(|w| w.expectation(&psi4).re))
            .collect::<Result<_>>()?;
        let scale = 4f64.powi(-(n as i32));
        for (a, &q) in pts.iter().zip(&conv) {
            let direct: f64 = pts
                .iter()
                .zip(&e)
                .map(|(x, &v)| if symplectic(a, x).rem_euclid(2) == 0 { v } else { -v })
                .sum::<f64>()
                * scale;
            if (direct - q).abs() > ROUTE_TOL {
                return Err(Error::Invariant(format!("Π_a route {direct} disagrees with convolution {q}")));
            }
        }
    }
    Ok(BellOutcomeDistribution { n, probs: conv })
}

/// Outcome distribution `|⟨W_x|ψ⊗ψ⟩|²` of a single Bell measurement, with
/// `|W_x⟩ = (W_x ⊗ I)|Φ⁺⟩`.
pub fn bell_sampling_distribution(psi: &State, d: u32) -> Result<Vec<f64>> {
    let n = qudit_count(psi.dim(), d)?;
    let scale = (d as f64).powi(-(n as i32));
    Ok(all_points(n, d)
        .iter()
        .map(|x| {
            let w = weyl_monomial::<f64>(d, x);
            let amp = (0..psi.dim())
                .fold(C::new(0.0, 0.0), |acc, j| acc + w.phase[j].conj() * psi.amps[w.perm[j]] * psi.amps[j]);
            amp.norm_sqr() * scale
        })
        .collect())
}

/// `R(T)` for the stochastic isometry `O` on `ψ^{⊗t}`, or `None` past the relation cap.
fn isometry_expectation(o: &crate::commutant::StochasticIsometry, psi: &State, n: usize) -> Result<Option<f64>> {
    let t = o.t;
    if (psi.dim() as u128).pow(t as u32) > RELATION_CAP {
        return Ok(None);
    }
    let rel = big_r_relation(&o.lagrangian().space, n)?;
    Ok(Some(rel.expectation(&psi.kron_power(t)?).re))
}

/// `p = ½(1 + 4^n Σ_x p_ψ(x)³)`, cross-checked against the anti-identity on
/// six copies when the register fits.
pub fn qubit_accept_probability(psi: &State) -> Result<f64> {
    let n = require_qubits(psi)?;
    let p = char_distribution(2, psi)?;
    let formula = 0.5 * (1.0 + 4f64.powi(n as i32) * p.values.iter().map(|v| v.powi(3)).sum::<f64>());
    if n <= 2 {
        let anti = anti_permutation(&(0..6).collect::<Vec<_>>(), 2, &AntiKind::Complement)?;
        if let Some(v) = isometry_expectation(&anti, psi, n)? {
            let direct = 0.5 * (1.0 + v);
            if (direct - formula).abs() > ROUTE_TOL {
                return Err(Error::Invariant(format!("six-copy route {direct} disagrees with formula {formula}")));
            }
        }
    }
    Ok(formula)
}

/// Six-copy qubit test with overlap, soundness `1 - ε²/4` and the equivalent
/// form `max overlap ≥ 4p - 3`.
pub fn qubit_test(psi: &State, input: &str) -> Result<ProtocolReport> {
    let n = require_qubits(psi)?;
    let p = qubit_accept_probability(psi)?;
    let mut rep = ProtocolReport::new(Protocol::Qubit6, input, 2, n);
    let f = overlap_if_enumerable(psi, n, 2);
    rep.finish(p, f, 0.25);
    if let Some(f) = f {
        rep.check("overlap ≥ 4p-3", f >= 4.0 * p - 3.0 - 1e-10, format!("{f} ≥ {}", 4.0 * p - 3.0));
    }
    Ok(rep)
}

/// Probability of `+1` when measuring the Hermitian `W` on `ψ`, clamped so that
/// eigenstates give exact certainties.
fn plus_probability(w: &Monomial<f64>, psi: &State) -> f64 {
    let v = 0.5 * (1.0 + w.expectation(psi).re);
    if v > 1.0 - 1e-12 {
        1.0
    } else if v < 1e-12 {
        0.0
    } else {
        v
    }
}

/// Monte-Carlo run of the qubit test: Bell difference sample `a`, then measure
/// `W_a` on two copies through `(I ± W_a)/2` and accept on equal outcomes.
pub fn simulate_algorithm1<G: Rng + ?Sized>(psi: &State, shots: u64, rng: &mut G) -> Result<ProtocolReport> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be positive".into()));
    }
    let n = require_qubits(psi)?;
    check_dim((psi.dim() as u128).pow(4))?;
    let q = bell_difference_distribution(psi)?;
    let pts = all_points(n, 2);
    let plus: Vec<f64> = pts.iter().map(|a| plus_probability(&weyl_monomial(2, a), psi)).collect();
    let mut accepted = 0u64;
    for _ in 0..shots {
        let a = q.sample(rng);
        let first = rng.gen::<f64>() < plus[a];
        let second = rng.gen::<f64>() < plus[a];
        accepted += (first == second) as u64;
    }
    let empirical = accepted as f64 / shots as f64;
    let analytic = qubit_accept_probability(psi)?;
    let sigma = (analytic * (1.0 - analytic) / shots as f64).sqrt();
    let mut rep = ProtocolReport::new(Protocol::Algorithm1, "", 2, n);
    rep.shots = Some(shots);
    rep.metric("analytic", analytic);
    rep.metric("sigma", sigma);
    let f = overlap_if_enumerable(psi, n, 2);
    rep.finish(empirical, f, 0.25);
    // The soundness check applies to the exact probability, not the estimate.
    rep.assertions.retain(|a| a.name != "soundness");
    let within = if sigma == 0.0 { (empirical - analytic).abs() < 1e-12 } else { (empirical - analytic).abs() <= 4.0 * sigma };
    rep.check("within 4σ", within, format!("empirical {empirical}, analytic {analytic}, σ {sigma}"));
    Ok(rep)
}

/// Dense `V_s = d^{-n} Σ_x (W_x ⊗ W_x†)^{⊗s}` on `2s` copies.
pub fn qudit_v_operator(n: usize, d: u32, s: usize) -> Result<Operator> {
    let dim = check_dim((d as u128).pow((2 * s * n) as u32))?;
    let mut out = Operator::zeros(dim);
    let scale = (d as f64).powi(-(n as i32));
    for x in all_points(n, d) {
        let w = weyl_monomial::<f64>(d, &x);
        let pair = w.kron(&w.adjoint());
        let m = monomial_power(&pair, s)?;
        for j in 0..dim {
            out.mat[(m.perm[j], j)] += m.phase[j] * scale;
        }
    }
    Ok(out)
}

/// `1 - s⁻¹ p pᵀ` with `p = (-1, 1, ..., -1, 1)`, the basis permutation that `V_s` implements.
pub fn qudit_anti_identity(d: u32, s: usize) -> Result<crate::commutant::StochasticIsometry> {
    let p: Vec<i64> = (0..2 * s).map(|i| if i % 2 == 0 { -1 } else { 1 }).collect();
    anti_permutation(&(0..2 * s).collect::<Vec<_>>(), d, &AntiKind::Parity { p })
}

/// `C_{d,s} = (1 - (1 - 1/4d²)^{s-1}) / 2`.
pub fn qudit_soundness_constant(d: u32, s: usize) -> f64 {
    let d = d as f64;
    (1.0 - (1.0 - 1.0 / (4.0 * d * d)).powi(s as i32 - 1)) / 2.0
}

/// `p = ½(1 + d^{(s-1)n} Σ_x p_ψ(x)^s)`, cross-checked against `V_s` acting as a
/// basis permutation on `ψ^{⊗2s}` when the register fits.
pub fn qudit_accept_probability(psi: &State, d: u32, s: usize) -> Result<f64> {
    if s < 2 || gcd(s as u64, d as u64) != 1 {
        return Err(Error::InvalidInput(format!("need s ≥ 2 coprime to d, got s={s}, d={d}")));
    }
    let n = qudit_count(psi.dim(), d)?;
    let p = char_distribution(d, psi)?;
    let scale = (d as f64).powi(((s - 1) * n) as i32);
    let formula = 0.5 * (1.0 + scale * p.values.iter().map(|v| v.powi(s as i32)).sum::<f64>());
    if let Some(v) = isometry_expectation(&qudit_anti_identity(d, s)?, psi, n)? {
        let direct = 0.5 * (1.0 + v);
        if (direct - formula).abs() > ROUTE_TOL {
            return Err(Error::Invariant(format!("2s-copy route {direct} disagrees with formula {formula}")));
        }
    }
    Ok(formula)
}

pub fn qudit_test(psi: &State, d: u32, s: usize, input: &str) -> Result<ProtocolReport> {
    let n = qudit_count(psi.dim(), d)?;
    let p = qudit_accept_probability(psi, d, s)?;
    let mut rep = ProtocolReport::new(Protocol::Qudit2s, input, d, n);
    rep.metric("s", s as f64);
    rep.metric("c_ds", qudit_soundness_constant(d, s));
    rep.finish(p, overlap_if_enumerable(psi, n, d), qudit_soundness_constant(d, s));
    Ok(rep)
}

fn require_three_copy(d: u32) -> Result<()> {
    if d % 6 != 1 && d % 6 != 5 {
        return Err(Error::InvalidInput(format!("three-copy test needs d ≡ 1, 5 mod 6, got {d}")));
    }
    Ok(())
}

/// Dense `V = d^{-n} Σ_x A_x^{⊗3}`.
pub fn three_copy_v_operator(n: usize, d: u32) -> Result<Operator> {
    let local = check_dim((d as u128).pow(n as u32))?;
    let dim = check_dim((local as u128).pow(3))?;
    let mut out = Operator::zeros(dim);
    let scale = C::new((d as f64).powi(-(n as i32)), 0.0);
    for x in all_points(n, d) {
        let a = point_operator::<f64>(n, d, &x);
        let a3 = a.kron(&a)?.kron(&a)?;
        out.mat += a3.mat * scale;
    }
    Ok(out)
}

/// `2·3⁻¹ 11ᵀ - 1` on three copies, the basis permutation that the three-copy `V` implements.
pub fn three_copy_anti_identity(d: u32) -> Result<crate::commutant::StochasticIsometry> {
    require_three_copy(d)?;
    anti_permutation(&[0, 1, 2], d, &AntiKind::AllOnes)
}

/// `p = ½(1 + d^{2n} Σ_x w_ψ(x)³)`, cross-checked against the three-copy basis
/// permutation on `ψ^{⊗3}`.
pub fn three_copy_accept_probability(psi: &State, d: u32) -> Result<f64> {
    require_three_copy(d)?;
    let n = qudit_count(psi.dim(), d)?;
    let w = wigner_state(d, psi)?;
    let formula = 0.5 * (1.0 + (d as f64).powi(2 * n as i32) * w.values.iter().map(|v| v.powi(3)).sum::<f64>());
    if let Some(v) = isometry_expectation(&three_copy_anti_identity(d)?, psi, n)? {
        let direct = 0.5 * (1.0 + v);
        if (direct - formula).abs() > ROUTE_TOL {
            return Err(Error::Invariant(format!("three-copy route {direct} disagrees with formula {formula}")));
        }
    }
    Ok(formula)
}

pub fn three_copy_test(psi: &State, d: u32, input: &str) -> Result<ProtocolReport> {
    let n = qudit_count(psi.dim(), d)?;
    let p = three_copy_accept_probability(psi, d)?;
    let mut rep = ProtocolReport::new(Protocol::ThreeCopy, input, d, n);
    let c = 1.0 / (16.0 * (d * d) as f64);
    rep.finish(p, overlap_if_enumerable(psi, n, d), c);
    Ok(rep)
}

/// Choi state `(U ⊗ I)|Φ⁺⟩`.
pub fn choi_state(u: &Operator) -> Result<State> {
    let dim = u.dim();
    check_dim((dim * dim) as u128)?;
    let norm = (dim as f64).sqrt();
    State::from_vec((0..dim * dim).map(|k| u.mat[(k / dim, k % dim)] / norm).collect())
}

/// Runs the six-copy qubit test on the Choi state of `U`; accepts with
/// certainty exactly on Clifford unitaries.
pub fn clifford_test(u: &Operator, input: &str) -> Result<ProtocolReport> {
    if !u.is_unitary(1e-9) {
        return Err(Error::InvalidInput("operator is not unitary".into()));
    }
    let n = require_qubits(&State::basis(u.dim(), 0))?;
    let choi = choi_state(u)?;
    let mut rep = qubit_test(&choi, input)?;
    rep.protocol = Protocol::Clifford;
    rep.n = n;
    let p = rep.p_accept.unwrap_or(0.0);
    rep.metric("is_clifford", if (p - 1.0).abs() < 1e-10 { 1.0 } else { 0.0 });
    Ok(rep)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Negativity {
    pub sum_negativity: f64,
    /// `Σ_x |w_ψ(x)|`.
    pub wigner_norm: f64,
    pub mana: f64,
}

fn require_odd(d: u32) -> Result<()> {
    if d.is_multiple_of(2) {
        return Err(Error::InvalidInput(format!("Wigner negativity needs odd d, got {d}")));
    }
    Ok(())
}

/// Sum-negativity `Σ_{w<0} |w|`, checked against `½(Σ|w| - 1)`, and mana `ln(2 sn + 1)`.
pub fn sum_negativity(psi: &State, d: u32) -> Result<Negativity> {
    require_odd(d)?;
    let w = wigner_state(d, psi)?;
    let sn: f64 = w.values.iter().filter(|&&v| v < 0.0).map(|v| -v).sum();
    let l1: f64 = w.values.iter().map(|v| v.abs()).sum();
    let alt = 0.5 * (l1 - 1.0);
    if (sn - alt).abs() > 1e-12 {
        return Err(Error::Invariant(format!("sum-negativity routes disagree: {sn} vs {alt}")));
    }
    Ok(Negativity { sum_negativity: sn, wigner_norm: l1, mana: (2.0 * sn + 1.0).ln() })
}

pub fn mana(psi: &State, d: u32) -> Result<f64> {
    Ok(sum_negativity(psi, d)?.mana)
}

/// Checks `1 - max overlap ≤ 9d² sn(ψ)` and `Σ q² ≥ 1/(d^n ‖ψ‖_W²)` with
/// `q(x) = d^n w(x)²`.
pub fn robust_hudson_check(psi: &State, d: u32, input: &str) -> Result<ProtocolReport> {
    require_odd(d)?;
    let n = qudit_count(psi.dim(), d)?;
    let neg = sum_negativity(psi, d)?;
    let w = wigner_state(d, psi)?;
    let dn = (d as f64).powi(n as i32);
    let q2: f64 = w.values.iter().map(|v| (dn * v * v).powi(2)).sum();
    let holder = 1.0 / (dn * neg.wigner_norm * neg.wigner_norm);
    let ens = ensemble(n, d)?;
    let (_, f) = ens.max_overlap(psi)?;
    let rhs = 9.0 * (d * d) as f64 * neg.sum_negativity;
    let mut rep = ProtocolReport::new(Protocol::Hudson, input, d, n);
    rep.max_overlap = Some(f);
    rep.bound = Some(1.0 - rhs);
    rep.metric("sum_negativity", neg.sum_negativity);
    rep.metric("mana", neg.mana);
    rep.metric("sum_q_squared", q2);
    rep.metric("holder_bound", holder);
    rep.check("robust hudson", 1.0 - f <= rhs + 1e-10, format!("1 - {f} ≤ 9d²·{}", neg.sum_negativity));
    rep.check("holder", q2 >= holder - 1e-12, format!("Σq² = {q2} ≥ {holder}"));
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct UncertaintyCheck {
    pub premise: bool,
    pub commute: bool,
    pub holds: bool,
}

/// If `|tr ψW_x|²` and `|tr ψW_y|²` both exceed `1 - 1/4d²`, then `[x, y] = 0`.
pub fn uncertainty_weyl(psi: &State, d: u32, x: &[u32], y: &[u32]) -> Result<UncertaintyCheck> {
    qudit_count(psi.dim(), d)?;
    let thr = 1.0 - 1.0 / (4.0 * (d * d) as f64);
    let ex = weyl_monomial::<f64>(d, x).expectation(psi).norm_sqr();
    let ey = weyl_monomial::<f64>(d, y).expectation(psi).norm_sqr();
    let premise = ex > thr && ey > thr;
    let commute = symplectic(x, y).rem_euclid(d as i64) == 0;
    Ok(UncertaintyCheck { premise, commute, holds: !premise || commute })
}

/// If `tr ψA_x`, `tr ψA_y`, `tr ψA_z` all exceed `√(1 - 1/2d²)`, then `[z-x, y-x] = 0`.
pub fn uncertainty_points(psi: &State, d: u32, x: &[u32], y: &[u32], z: &[u32]) -> Result<UncertaintyCheck> {
    require_odd(d)?;
    let n = qudit_count(psi.dim(), d)?;
    let thr = (1.0 - 1.0 / (2.0 * (d * d) as f64)).sqrt();
    let premise = [x, y, z].iter().all(|p| point_operator::<f64>(n, d, p).expectation(psi).re > thr);
    let commute = symplectic(&sub_points(z, x, d), &sub_points(y, x, d)).rem_euclid(d as i64) == 0;
    Ok(UncertaintyCheck { premise, commute, holds: !premise || commute })
}

#[derive(Clone, Debug, Serialize)]
pub struct UncertaintySearch {
    pub samples: usize,
    /// Largest `min` of the premise quantities seen over non-commuting choices.
    pub max_min: f64,
    pub threshold: f64,
    pub violations: usize,
}

/// Random states scored by the best non-commuting Weyl pair.
pub fn weyl_uncertainty_search<G: Rng + ?Sized>(n: usize, d: u32, samples: usize, rng: &mut G) -> Result<UncertaintySearch> {
    let pts = all_points(n, d);
    let ws: Vec<Monomial<f64>> = pts.iter().map(|x| weyl_monomial(d, x)).collect();
    let dim = (d as usize).pow(n as u32);
    let threshold = 1.0 - 1.0 / (4.0 * (d * d) as f64);
    let (mut max_min, mut violations) = (0.0f64, 0);
    for _ in 0..samples {
        let psi = State::random(dim, rng);
        let e: Vec<f64> = ws.iter().map(|w| w.expectation(&psi).norm_sqr()).collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                if symplectic(&pts[i], &pts[j]).rem_euclid(d as i64) != 0 {
                    let m = e[i].min(e[j]);
                    max_min = max_min.max(m);
                    violations += (m > threshold) as usize;
                }
            }
        }
    }
    Ok(UncertaintySearch { samples, max_min, threshold, violations })
}

/// Random states scored by the best triple of points with `[z-x, y-x] ≠ 0`.
pub fn point_uncertainty_search<G: Rng + ?Sized>(n: usize, d: u32, samples: usize, rng: &mut G) -> Result<UncertaintySearch> {
    require_odd(d)?;
    let pts = all_points(n, d);
    let ops: Vec<Operator> = pts.iter().map(|x| point_operator(n, d, x)).collect();
    let dim = (d as usize).pow(n as u32);
    let threshold = (1.0 - 1.0 / (2.0 * (d * d) as f64)).sqrt();
    let (mut max_min, mut violations) = (f64::NEG_INFINITY, 0);
    for _ in 0..samples {
        let psi = State::random(dim, rng);
        let e: Vec<f64> = ops.iter().map(|a| a.expectation(&psi).re).collect();
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                for k in j + 1..pts.len() {
                    let c = symplectic(&sub_points(&pts[k], &pts[i], d), &sub_points(&pts[j], &pts[i], d));
                    if c.rem_euclid(d as i64) != 0 {
                        let m = e[i].min(e[j]).min(e[k]);
                        max_min = max_min.max(m);
                        violations += (m > threshold) as usize;
                    }
                }
            }
        }
    }
    Ok(UncertaintySearch { samples, max_min, threshold, violations })
}

/// Hill-climbs `min(|⟨W_x⟩|², |⟨W_y⟩|²)` over pure states from random starts.
pub fn adversarial_weyl_pair<G: Rng + ?Sized>(
    n: usize,
    d: u32,
    x: &[u32],
    y: &[u32],
    restarts: usize,
    steps: usize,
    rng: &mut G,
) -> Result<f64> {
    let dim = check_dim((d as u128).pow(n as u32))?;
    let (wx, wy) = (weyl_monomial::<f64>(d, x), weyl_monomial::<f64>(d, y));
    let score = |s: &State| wx.expectation(s).norm_sqr().min(wy.expectation(s).norm_sqr());
    let mut best = 0.0f64;
    for _ in 0..restarts {
        let mut cur = State::random(dim, rng);
        let mut val = score(&cur);
        let mut step = 0.3;
        for _ in 0..steps {
            let kick = State::random(dim, rng);
            let cand = State::new(&cur.amps + kick.amps * C::new(step, 0.0))?;
            let v = score(&cand);
            if v > val {
                cur = cand;
                val = v;
            } else {
                step *= 0.995;
            }
        }
        best = best.max(val);
    }
    Ok(best)
}

/// Smallest slack of `(4p-3)^k ≥ 4p^k - 3` over a grid on `[3/4, 1]` and `k = 1..=kmax`.
pub fn technical_inequality_slack(grid: usize, kmax: i32) -> f64 {
    let mut min = f64::INFINITY;
    for i in 0..=grid {
        let p = 0.75 + 0.25 * i as f64 / grid as f64;
        for k in 1..=kmax {
            min = min.min((4.0 * p - 3.0).powi(k) - (4.0 * p.powi(k) - 3.0));
        }
    }
    min
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{gate_matrix, Gate};
    use crate::phase_space::point_index;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t_state() -> State {
        let s = 0.5f64.sqrt();
        State::from_vec(vec![C::new(s, 0.0), C::from_polar(s, std::f64::consts::FRAC_PI_4)]).unwrap()
    }

    #[test]
    fn bell_difference_basics() {
        let q = bell_difference_distribution(&State::basis(2, 0)).unwrap();
        let idx = |x: &[u32]| point_index(x, 2);
        assert!((q.probs[idx(&[0, 0])] - 0.5).abs() < 1e-12);
        assert!((q.probs[idx(&[1, 0])] - 0.5).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in ensemble(2, 2).unwrap().states.iter().take(20) {
            let q = bell_difference_distribution(&s.vector).unwrap();
            let p = char_distribution(2, &s.vector).unwrap();
            for (a, b) in q.probs.iter().zip(&p.values) {
                assert!((a - b).abs() < 1e-10);
            }
        }
        let q = bell_difference_distribution(&State::random(4, &mut rng)).unwrap();
        assert!((q.probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bell_sampling_real_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for d in [2u32, 3] {
            let dim = (d * d) as usize;
            let real = State::from_vec((0..dim).map(|_| C::new(rng.gen::<f64>() - 0.5, 0.0)).collect()).unwrap();
            let b = bell_sampling_distribution(&real, d).unwrap();
            let p = char_distribution(d, &real).unwrap();
            for (x, y) in b.iter().zip(&p.values) {
                assert!((x - y).abs() < 1e-12);
            }
            let any = bell_sampling_distribution(&State::random(dim, &mut rng), d).unwrap();
            assert!((any.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn qubit_acceptance() {
        assert!((qubit_accept_probability(&t_state()).unwrap() - 13.0 / 16.0).abs() < 1e-12);
        for s in &ensemble(2, 2).unwrap().states {
            assert!((qubit_accept_probability(&s.vector).unwrap() - 1.0).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=2 {
            for _ in 0..50 {
                let r = qubit_test(&State::random(1 << n, &mut rng), "random").unwrap();
                assert!(r.passed(), "{r:?}");
            }
        }
        assert!(qubit_accept_probability(&State::basis(3, 0)).is_err());
    }

    #[test]
    fn algorithm1_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let stab = &ensemble(2, 2).unwrap().states[17];
        let r = simulate_algorithm1(&stab.vector, 10_000, &mut rng).unwrap();
        assert_eq!(r.p_accept, Some(1.0));
        let r = simulate_algorithm1(&t_state(), 100_000, &mut rng).unwrap();
        assert!(r.passed(), "{r:?}");
        let a = simulate_algorithm1(&t_state(), 1000, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = simulate_algorithm1(&t_state(), 1000, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a.p_accept, b.p_accept);
        assert!(simulate_algorithm1(&t_state(), 0, &mut rng).is_err());
    }

    #[test]
    fn qudit_v_operator_is_the_parity_permutation() {
        let v = qudit_v_operator(1, 3, 2).unwrap();
        assert!(v.is_hermitian(1e-10) && v.is_unitary(1e-10));
        let rel = big_r_relation(&qudit_anti_identity(3, 2).unwrap().lagrangian().space, 1).unwrap();
        assert!(v.sub(&rel.to_dense().unwrap()).max_abs() < 1e-10);
        // d = 2, s = 3 recovers the qubit anti-identity.
        let v3 = qudit_v_operator(1, 2, 3).unwrap();
        let anti = anti_permutation(&[0, 1, 2, 3, 4, 5], 2, &AntiKind::Complement).unwrap();
        let rel = big_r_relation(&anti.lagrangian().space, 1).unwrap();
        assert!(v3.sub(&rel.to_dense().unwrap()).max_abs() < 1e-10);
    }

    #[test]
    fn qubit_v2_is_not_unitary() {
        let v = qudit_v_operator(1, 2, 2).unwrap();
        assert!(!v.is_unitary(1e-6));
        // V_2 = 2^n Π_0 with Π_0 = 4^{-n} Σ W^{⊗4}.
        let mut pi0 = Operator::zeros(16);
        for x in all_points(1, 2) {
            let m = monomial_power(&weyl_monomial(2, &x), 4).unwrap();
            pi0 = pi0.add(&m.to_dense().scale(C::new(0.25, 0.0)));
        }
        assert!(v.sub(&pi0.scale(C::new(2.0, 0.0))).max_abs() < 1e-12);
        assert!(qudit_accept_probability(&State::basis(2, 0), 2, 2).is_err());
    }

    #[test]
    fn qudit_acceptance() {
        for s in &ensemble(1, 3).unwrap().states {
            assert!((qudit_accept_probability(&s.vector, 3, 2).unwrap() - 1.0).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let psi = State::random(3, &mut rng);
        let p = qudit_accept_probability(&psi, 3, 2).unwrap();
        let v = qudit_v_operator(1, 3, 2).unwrap();
        let dense = 0.5 * (1.0 + v.expectation(&psi.kron_power(4).unwrap()).re);
        assert!((p - dense).abs() < 1e-10);
        for _ in 0..50 {
            let r = qudit_test(&State::random(3, &mut rng), 3, 2, "random").unwrap();
            assert!(r.passed(), "{r:?}");
        }
        assert!((qudit_soundness_constant(2, 3) - (1.0 - (15.0f64 / 16.0).powi(2)) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn three_copy() {
        let v = three_copy_v_operator(1, 5).unwrap();
        assert!(v.is_hermitian(1e-10) && v.is_unitary(1e-10));
        let rel = big_r_relation(&three_copy_anti_identity(5).unwrap().lagrangian().space, 1).unwrap();
        assert!(v.sub(&rel.to_dense().unwrap()).max_abs() < 1e-10);
        let v7 = three_copy_v_operator(1, 7).unwrap();
        assert!(v7.mul(&v7).sub(&Operator::identity(343)).max_abs() < 1e-9);
        for s in &ensemble(1, 5).unwrap().states {
            assert!((three_copy_accept_probability(&s.vector, 5).unwrap() - 1.0).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = State::random(5, &mut rng);
        let p = three_copy_accept_probability(&psi, 5).unwrap();
        let dense = 0.5 * (1.0 + v.expectation(&psi.kron_power(3).unwrap()).re);
        assert!((p - dense).abs() < 1e-10);
        assert!(three_copy_accept_probability(&State::basis(3, 0), 3).is_err());
    }

    #[test]
    fn clifford_testing() {
        let h = gate_matrix(&Gate::Fourier(0), 1, 2).unwrap();
        assert_eq!(clifford_test(&h, "H").unwrap().complete, Some(true));
        let cnot = gate_matrix(&Gate::Cadd(0, 1), 2, 2).unwrap();
        assert_eq!(clifford_test(&cnot, "CNOT").unwrap().metrics["is_clifford"], 1.0);
        let mut t = Operator::identity(2);
        t.mat[(1, 1)] = C::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let r = clifford_test(&t, "T").unwrap();
        assert_eq!((r.complete, r.metrics["is_clifford"]), (Some(false), 0.0));
        let eps2 = 1.0 - r.max_overlap.unwrap();
        assert!(eps2 > 0.01 && r.p_accept.unwrap() <= 1.0 - eps2 / 4.0);
        assert!(clifford_test(&Operator::zeros(2), "zero").is_err());
    }

    #[test]
    fn negativity_and_hudson() {
        for s in &ensemble(1, 3).unwrap().states {
            let neg = sum_negativity(&s.vector, 3).unwrap();
            assert!(neg.sum_negativity.abs() < 1e-12 && neg.mana.abs() < 1e-12);
        }
        let a0 = point_operator::<f64>(1, 3, &[0, 0]);
        let (vals, vecs) = crate::dense::hermitian_eigen(&a0);
        assert!((vals[0] + 1.0).abs() < 1e-10);
        let minus = State::new(vecs.column(0).into_owned()).unwrap();
        assert!(sum_negativity(&minus, 3).unwrap().sum_negativity > 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..30 {
            let r = robust_hudson_check(&State::random(3, &mut rng), 3, "random").unwrap();
            assert!(r.passed(), "{r:?}");
        }
        assert!(sum_negativity(&State::basis(2, 0), 2).is_err());
    }

    #[test]
    fn uncertainty() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let best = adversarial_weyl_pair(1, 2, &[0, 1], &[1, 0], 4, 2000, &mut rng).unwrap();
        assert!(best <= 0.5 + 1e-9 && best > 0.49, "{best}");
        let eig = State::basis(2, 0);
        let c = uncertainty_weyl(&eig, 2, &[1, 0], &[0, 1]).unwrap();
        assert!(!c.premise && !c.commute && c.holds);
        let s = weyl_uncertainty_search(1, 3, 300, &mut rng).unwrap();
        assert_eq!(s.violations, 0);
        let c = uncertainty_points(&eig.clone(), 3, &[0, 0], &[0, 0], &[0, 0]);
        assert!(c.is_err());
        let psi = State::basis(3, 0);
        let c = uncertainty_points(&psi, 3, &[1, 0], &[1, 0], &[1, 0]).unwrap();
        assert!(c.holds && c.commute);
        let s = point_uncertainty_search(1, 3, 100, &mut rng).unwrap();
        assert_eq!(s.violations, 0);
    }

    #[test]
    fn technical_inequality() {
        assert!(technical_inequality_slack(400, 20) >= -1e-12);
    }
}
