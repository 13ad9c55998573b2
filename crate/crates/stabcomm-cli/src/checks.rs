//! The acceptance suite: thirteen criteria, each a list of records.
//!
//! Every criterion draws from its own generator seeded with `(seed, criterion)`,
//! so results do not depend on which criteria run or in what order.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use stabcomm::commutant::{
    anti_permutation, big_r_relation, commutes_with_clifford, compose, compose_algebraic, enumerate_sigma,
    is_member_o, linear_independence_check, minimal_projector, qutrit_irrep_dimensions, AntiKind,
};
use stabcomm::definetti::{
    exp_definetti_check, exp_definetti_sweep, gram, make_invariant_state, random_alpha, Purity, Symmetry,
};
use stabcomm::dense::{digits, hermitian_rank};
use stabcomm::moments::{design_gap, find_design_weights, moment_bruteforce, moment_formula, qutrit_fiducial_search};
use stabcomm::protocols::{
    bell_difference_distribution, qubit_accept_probability, qubit_test, qudit_accept_probability,
    qudit_soundness_constant, qudit_test, robust_hudson_check, simulate_algorithm1, sum_negativity,
    three_copy_accept_probability, three_copy_test,
};
use stabcomm::stabilizer::ensemble;
use stabcomm::{Complex64, Operator, Result, State};

use crate::report::{guarded, Record};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Criteria 1-5 at their smallest parameters.
    Quick,
    /// All thirteen criteria.
    Full,
}

pub const CRITERIA: usize = 13;

pub fn criterion_title(k: usize) -> &'static str {
    match k {
        1 => "commutant cardinality",
        2 => "commutant membership and independence",
        3 => "t-th moment formula",
        4 => "design gaps",
        5 => "stabilizer testing completeness",
        6 => "stabilizer testing soundness",
        7 => "Bell difference sampling",
        8 => "minimal projector",
        9 => "semigroup rule",
        10 => "robust Hudson theorem",
        11 => "Gram matrix and exponential de Finetti",
        12 => "orbit designs",
        13 => "structure spot checks",
        _ => "unknown",
    }
}

pub fn criteria_for(profile: Profile) -> Vec<usize> {
    match profile {
        Profile::Quick => (1..=5).collect(),
        Profile::Full => (1..=CRITERIA).collect(),
    }
}

fn rng_for(seed: u64, k: usize) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(k as u64);
    r
}

pub fn run_criterion(k: usize, profile: Profile, seed: u64) -> Vec<Record> {
    let quick = profile == Profile::Quick;
    let mut rng = rng_for(seed, k);
    let mut records = match k {
        1 => cardinality(quick),
        2 => commutant(quick, &mut rng),
        3 => moments(quick),
        4 => design_gaps(quick),
        5 => completeness(quick),
        6 => soundness(&mut rng),
        7 => bell_sampling(&mut rng),
        8 => minimal_projectors(),
        9 => semigroup(),
        10 => robust_hudson(&mut rng),
        11 => de_finetti(&mut rng),
        12 => orbit_designs(&mut rng),
        13 => structure(),
        _ => vec![Record::new(format!("criterion {k}"), "").passed_if(false).detail("no such criterion")],
    };
    for r in &mut records {
        r.name = format!("{k:02}/{}", r.name);
    }
    records
}

/// Runs the criteria of `profile` in parallel; records come back in criterion order.
pub fn run_profile(profile: Profile, seed: u64) -> Vec<(usize, Vec<Record>)> {
    criteria_for(profile).into_par_iter().map(|k| (k, run_criterion(k, profile, seed))).collect()
}

const CARD: &str = "cardinality of Σ_{t,t}(d) = ∏_{k=0}^{t-2} (d^k + 1)";

fn cardinality(quick: bool) -> Vec<Record> {
    let grid: &[(u32, &[usize])] =
        if quick { &[(2, &[2, 3, 4]), (3, &[2, 3]), (5, &[2])] } else { &[(2, &[2, 3, 4, 5, 6]), (3, &[2, 3, 4, 5]), (5, &[2, 3, 4])] };
    let mut out = Vec::new();
    for &(d, ts) in grid {
        for &t in ts {
            let name = format!("|Σ| at d={d} t={t}");
            out.extend(guarded(&name, CARD, || {
                let expected: u64 = (0..t.saturating_sub(1)).map(|k| (d as u64).pow(k as u32) + 1).product();
                let got = enumerate_sigma(t, d)?.len() as f64;
                Ok(vec![Record::close(&name, CARD, got, expected as f64, 0.0)])
            }));
        }
    }
    out
}

const COMM: &str = "R(T) commutes with Clifford tensor powers for every T in Σ_{t,t}(d)";
const INDEP: &str = "the operators R(T) are linearly independent for n ≥ t-1";

fn commutant(quick: bool, rng: &mut ChaCha8Rng) -> Vec<Record> {
    let mut out = Vec::new();
    let mut settings: Vec<(usize, u32, Option<usize>)> = Vec::new();
    let tmax = if quick { 3 } else { 4 };
    for d in [2, 3] {
        for t in 1..=tmax {
            settings.push((t, d, None));
        }
    }
    if !quick {
        settings.push((5, 2, Some(200)));
        settings.push((6, 2, Some(200)));
    }
    for (t, d, samples) in settings {
        let name = format!("commutators at d={d} t={t}");
        let rec = guarded(&name, COMM, || {
            let sigma = enumerate_sigma(t, d)?;
            let idx: Vec<usize> = match samples {
                Some(k) if k < sigma.len() => {
                    let mut v = sample(rng, sigma.len(), k).into_vec();
                    v.sort_unstable();
                    v
                }
                _ => (0..sigma.len()).collect(),
            };
            let worst = idx
                .par_iter()
                .map(|&i| commutes_with_clifford(&sigma[i].space, 2).map(|r| r.max()))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            Ok(vec![Record::at_most(&name, COMM, worst, 0.0, 1e-9).detail(format!("{} of {} elements", idx.len(), sigma.len()))])
        });
        out.extend(rec);
    }
    let ranks: &[(usize, u32, usize)] = if quick { &[(3, 3, 2)] } else { &[(4, 2, 3), (3, 3, 2), (4, 3, 3)] };
    for &(t, d, n) in ranks {
        let name = format!("Gram rank at t={t} d={d} n={n}");
        out.extend(guarded(&name, INDEP, || {
            let r = linear_independence_check(t, d, n)?;
            Ok(vec![Record::close(&name, INDEP, r.rank as f64, r.size as f64, 0.0)])
        }));
    }
    out
}

const MOMENT: &str = "t-th moment of stabilizer states as a sum over Σ_{t,t}(d)";

fn moments(quick: bool) -> Vec<Record> {
    let points: &[(usize, u32, usize)] =
        if quick { &[(1, 2, 4), (1, 3, 3)] } else { &[(1, 2, 4), (2, 2, 4), (1, 2, 6), (1, 3, 3), (2, 3, 3), (1, 3, 4)] };
    points
        .par_iter()
        .flat_map(|&(n, d, t)| {
            let name = format!("bruteforce vs formula at n={n} d={d} t={t}");
            guarded(&name, MOMENT, || {
                let gap = moment_bruteforce(n, d, t)?.frobenius_distance(&moment_formula(n, d, t)?);
                Ok(vec![Record::at_most(&name, MOMENT, gap, 0.0, 1e-10)])
            })
        })
        .collect()
}

const DESIGN: &str = "stabilizer states form 3-designs for qubits and 2-designs for odd d, but not 4-designs";

fn design_gaps(quick: bool) -> Vec<Record> {
    let exact: &[(usize, u32, usize)] = &[(2, 2, 2), (2, 2, 3), (2, 3, 2)];
    let not: &[(usize, u32, usize)] = if quick { &[(2, 3, 3)] } else { &[(2, 2, 4), (2, 3, 3)] };
    let mut out = Vec::new();
    for &(n, d, t) in exact {
        let name = format!("design gap at n={n} d={d} t={t}");
        out.extend(guarded(&name, DESIGN, || Ok(vec![Record::at_most(&name, DESIGN, design_gap(n, d, t)?, 0.0, 1e-10)])));
    }
    for &(n, d, t) in not {
        let name = format!("design gap at n={n} d={d} t={t}");
        out.extend(guarded(&name, DESIGN, || {
            let g = design_gap(n, d, t)?;
            Ok(vec![Record::new(&name, DESIGN).measured(g).bound(1e-6).passed_if(g > 1e-6).detail("must exceed the bound")])
        }));
    }
    out
}

const COMPLETE: &str = "stabilizer states pass every stabilizer test with certainty";

fn completeness(quick: bool) -> Vec<Record> {
    type Accept = fn(&State, u32) -> Result<f64>;
    let qubit: Accept = |psi, _| qubit_accept_probability(psi);
    let qudit: Accept = |psi, d| qudit_accept_probability(psi, d, 2);
    let three: Accept = three_copy_accept_probability;
    let mut settings: Vec<(&str, Accept, usize, u32)> = vec![("six-copy qubit", qubit, 1, 2), ("qudit s=2", qudit, 1, 3), ("three-copy", three, 1, 5)];
    if !quick {
        settings.extend([("six-copy qubit", qubit, 2, 2), ("qudit s=2", qudit, 2, 3), ("three-copy", three, 1, 7)]);
    }
    settings
        .par_iter()
        .flat_map(|&(label, accept, n, d)| {
            let name = format!("{label} at d={d} n={n}");
            guarded(&name, COMPLETE, || {
                let ens = ensemble(n, d)?;
                let mut worst = 0.0f64;
                for s in &ens.states {
                    worst = worst.max((accept(&s.vector, d)? - 1.0).abs());
                }
                Ok(vec![Record::at_most(&name, COMPLETE, worst, 0.0, 1e-12).detail(format!("{} states", ens.len()))])
            })
        })
        .collect()
}

const SOUND: &str = "acceptance probability ≤ 1 - c ε² with ε² = 1 - max stabilizer overlap";
const SOUND_SAMPLES: usize = 1000;

fn soundness(rng: &mut ChaCha8Rng) -> Vec<Record> {
    let settings: [(&str, usize, u32, f64); 6] = [
        ("six-copy qubit", 1, 2, 0.25),
        ("six-copy qubit", 2, 2, 0.25),
        ("qudit s=2", 1, 3, qudit_soundness_constant(3, 2)),
        ("qudit s=2", 2, 3, qudit_soundness_constant(3, 2)),
        ("three-copy", 1, 5, 1.0 / (16.0 * 25.0)),
        ("three-copy", 1, 7, 1.0 / (16.0 * 49.0)),
    ];
    let mut out = Vec::new();
    for (label, n, d, c) in settings {
        let name = format!("{label} at d={d} n={n}");
        let local = (d as usize).pow(n as u32);
        let states: Vec<State> = (0..SOUND_SAMPLES).map(|_| State::random(local, rng)).collect();
        out.extend(guarded(&name, SOUND, || {
            let reports = states
                .par_iter()
                .map(|psi| match label {
                    "six-copy qubit" => qubit_test(psi, "random"),
                    "qudit s=2" => qudit_test(psi, d, 2, "random"),
                    _ => three_copy_test(psi, d, "random"),
                })
                .collect::<Result<Vec<_>>>()?;
            let violations = reports.iter().filter(|r| !r.passed()).count();
            // worst slack p - (1 - c ε²)
            let worst = reports
                .iter()
                .map(|r| r.p_accept.unwrap_or(f64::NAN) - r.bound.unwrap_or(f64::NAN))
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(vec![Record::at_most(&name, SOUND, worst, 0.0, 1e-10)
                .passed_if(violations == 0 && worst <= 1e-10)
                .detail(format!("{violations} violations in {SOUND_SAMPLES} states, c = {c:.6}"))])
        }));
    }
    out
}

const BELL: &str = "Bell difference sampling draws a with probability Σ_x p(x) p(x+a)";

fn t_state(n: usize) -> Result<State> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let t = State::from_vec(vec![Complex64::new(h, 0.0), Complex64::from_polar(h, std::f64::consts::FRAC_PI_4)])?;
    t.kron_power(n)
}

fn bell_sampling(rng: &mut ChaCha8Rng) -> Vec<Record> {
    let mut out = Vec::new();
    for n in [1, 2] {
        let name = format!("two routes agree on 100 states at n={n}");
        let states: Vec<State> = (0..100).map(|_| State::random(1 << n, rng)).collect();
        out.extend(guarded(&name, BELL, || {
            for psi in &states {
                let q = bell_difference_distribution(psi)?;
                let total: f64 = q.probs.iter().sum();
                if (total - 1.0).abs() > 1e-10 {
                    return Ok(vec![Record::close(&name, BELL, total, 1.0, 1e-10).detail("distribution not normalized")]);
                }
            }
            Ok(vec![Record::new(&name, BELL).tolerance(1e-10).detail("Π_a expectations match the convolution")])
        }));
    }
    let name = "T state analytic acceptance";
    out.extend(guarded(name, BELL, || Ok(vec![Record::close(name, BELL, qubit_accept_probability(&t_state(1)?)?, 13.0 / 16.0, 1e-12)])));
    let name = "Monte-Carlo acceptance of the T state, 1e5 shots";
    out.extend(guarded(name, BELL, || {
        let rep = simulate_algorithm1(&t_state(1)?, 100_000, rng)?;
        let sigma = rep.metrics["sigma"];
        let p = rep.p_accept.unwrap_or(f64::NAN);
        Ok(vec![Record::at_most(name, BELL, (p - 13.0 / 16.0).abs(), 0.0, 4.0 * sigma)
            .passed_if(rep.passed())
            .detail(format!("empirical {p:.5}, σ = {sigma:.2e}"))])
    }));
    out
}

const MINPROJ: &str = "the O_t(d)-average of R(O) projects onto the span of stabilizer tensor powers";

fn minimal_projectors() -> Vec<Record> {
    let mut out = Vec::new();
    for (t, n, d) in [(4, 1, 2), (6, 1, 2), (3, 1, 3)] {
        let name = format!("Π^min at t={t} n={n} d={d}");
        out.extend(guarded(&name, MINPROJ, || {
            let p = minimal_projector(t, n, d)?;
            let ens = ensemble(n, d)?;
            let dim = p.dim();
            let mut q = Operator::zeros(dim);
            let mut residual = 0.0f64;
            for s in &ens.states {
                let v = s.vector.kron_power(t)?;
                residual = residual.max((p.mat.clone() * &v.amps - &v.amps).norm());
                q.mat += &v.amps * v.amps.adjoint();
            }
            let rp = hermitian_rank(&p, 1e-8);
            let rq = hermitian_rank(&q, 1e-8);
            Ok(vec![
                Record::close(&format!("{name} rank"), MINPROJ, rp as f64, rq as f64, 0.0),
                Record::at_most(&format!("{name} fixes stabilizer powers"), MINPROJ, residual, 0.0, 1e-10),
            ])
        }));
    }
    out
}

const SEMI: &str = "r(T1) r(T2) = d^k r(T1 ∘ T2) with k the defect overlap";

fn semigroup() -> Vec<Record> {
    let mut out = Vec::new();
    for (t, d) in [(3, 3), (4, 2)] {
        let name = format!("all pairs at t={t} d={d}");
        out.extend(guarded(&name, SEMI, || {
            let sigma = enumerate_sigma(t, d)?;
            let pairs: Vec<(usize, usize)> = (0..sigma.len()).flat_map(|i| (0..sigma.len()).map(move |j| (i, j))).collect();
            let bad = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let c = compose(&sigma[i], &sigma[j])?;
                    Ok((c.result.space != compose_algebraic(&sigma[i], &sigma[j])?) as usize)
                })
                .collect::<Result<Vec<usize>>>()?
                .into_iter()
                .sum::<usize>();
            Ok(vec![Record::close(&name, SEMI, bad as f64, 0.0, 0.0).detail(format!("{} pairs", pairs.len()))])
        }));
    }
    let name = "associativity at t=3 d=3";
    out.extend(guarded(name, SEMI, || {
        let sigma = enumerate_sigma(3, 3)?;
        let m = sigma.len();
        let mut bad = 0usize;
        for a in sigma.iter() {
            for b in sigma.iter() {
                let ab = compose(a, b)?;
                for c in sigma.iter() {
                    let left = compose(&ab.result, c)?;
                    let bc = compose(b, c)?;
                    let right = compose(a, &bc.result)?;
                    if left.result.space != right.result.space || ab.k + left.k != bc.k + right.k {
                        bad += 1;
                    }
                }
            }
        }
        Ok(vec![Record::close(name, SEMI, bad as f64, 0.0, 0.0).detail(format!("{} triples", m * m * m))])
    }));
    out
}

const HUDSON: &str = "1 - max stabilizer overlap ≤ 9 d² sn(ψ)";

fn robust_hudson(rng: &mut ChaCha8Rng) -> Vec<Record> {
    let mut out = Vec::new();
    for (d, n) in [(3, 1), (3, 2), (5, 1)] {
        let name = format!("1000 random states at d={d} n={n}");
        let local = (d as usize).pow(n as u32);
        let states: Vec<State> = (0..1000).map(|_| State::random(local, rng)).collect();
        out.extend(guarded(&name, HUDSON, || {
            let reports = states.par_iter().map(|psi| robust_hudson_check(psi, d, "random")).collect::<Result<Vec<_>>>()?;
            let violations = reports.iter().filter(|r| !r.passed()).count();
            let worst = reports
                .iter()
                .map(|r| (1.0 - r.max_overlap.unwrap_or(0.0)) - 9.0 * (d * d) as f64 * r.metrics["sum_negativity"])
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(vec![Record::at_most(&name, HUDSON, worst, 0.0, 1e-10)
                .passed_if(violations == 0 && worst <= 1e-10)
                .detail(format!("{violations} violations"))])
        }));
        let name = format!("zero negativity on the ensemble at d={d} n={n}");
        out.extend(guarded(&name, HUDSON, || {
            let ens = ensemble(n, d)?;
            let mut worst = 0.0f64;
            for s in &ens.states {
                let sn = sum_negativity(&s.vector, d)?.sum_negativity;
                let (_, f) = ens.max_overlap(&s.vector)?;
                if sn < 1e-10 {
                    worst = worst.max(1.0 - f);
                } else {
                    worst = worst.max(sn);
                }
            }
            Ok(vec![Record::at_most(&name, HUDSON, worst, 0.0, 1e-10).detail(format!("{} states", ens.len()))])
        }));
    }
    out
}

const GRAM: &str = "Gram matrix of stabilizer tensor powers is ε-close to the identity";
const EXPDEF: &str = "reduced states of O_t-invariant states are close to stabilizer mixtures";
const SLOPE_TARGET: f64 = -0.34;
const SLOPE_TOL: f64 = 0.05;

fn de_finetti(rng: &mut ChaCha8Rng) -> Vec<Record> {
    let mut out = Vec::new();
    for t in [20, 24, 30] {
        let name = format!("Gram claims at n=1 d=2 t={t}");
        out.extend(guarded(&name, GRAM, || {
            let g = gram(1, 2, t)?;
            Ok(vec![Record::at_most(&name, GRAM, g.g_minus_i, g.eps, 0.0).passed_if(g.claims_checked && g.g_minus_i <= g.eps)])
        }));
    }
    for t in [20, 24] {
        for s in [1, 2] {
            let name = format!("exponential bound at n=1 d=2 t={t} s={s}");
            out.extend(guarded(&name, EXPDEF, || {
                let input = make_invariant_state(t, 1, 2, Symmetry::FullO, Purity::Pure, rng)?;
                let rep = exp_definetti_check(&input, s)?;
                Ok(vec![Record::at_most(&name, EXPDEF, rep.measured, rep.bound, 0.0).passed_if(rep.passed)])
            }));
        }
    }
    let name = "log-linear decay slope, d=2";
    out.extend(guarded(name, EXPDEF, || {
        let alpha = random_alpha(1, 2, rng)?;
        // overlap phases repeat with period 8 in t
        let ts: Vec<usize> = (4..=60).step_by(8).collect();
        let (dists, slope) = exp_definetti_sweep(1, 2, 2, &ts, &alpha)?;
        let monotone = dists.windows(2).all(|w| w[1] <= w[0]);
        Ok(vec![Record::at_most(name, EXPDEF, slope, SLOPE_TARGET, SLOPE_TOL)
            .passed_if(monotone && slope <= SLOPE_TARGET + SLOPE_TOL)
            .detail(format!("t = {ts:?}, ideal slope {:.4}", -(2f64.ln()) / 2.0))])
    }));
    out
}

const ORBIT: &str = "a mixture of at most M Clifford orbits forms an exact t-design";

fn orbit_designs(rng: &mut ChaCha8Rng) -> Vec<Record> {
    let mut out = Vec::new();
    for (d, t, n, max_support, extra) in [(3u32, 3usize, 2usize, 2usize, 12usize), (2, 4, 3, 3, 20)] {
        let name = format!("weighted orbits at d={d} t={t} n={n}");
        let local = (d as usize).pow(n as u32);
        let mut fid = vec![State::basis(local, 0)];
        fid.extend((0..extra).map(|_| State::random(local, rng)));
        out.extend(guarded(&name, ORBIT, || {
            let design = find_design_weights(&fid, n, d, t, rng)?;
            Ok(vec![
                Record::at_most(&format!("{name} gap"), ORBIT, design.gap, 0.0, 1e-8),
                Record::at_most(&format!("{name} support"), ORBIT, design.weights.len() as f64, max_support as f64, 0.0),
            ])
        }));
    }
    let name = "qutrit fiducial orbit at n=2";
    out.extend(guarded(name, ORBIT, || {
        let f = qutrit_fiducial_search(2)?;
        let gap = f.gap.unwrap_or(f64::INFINITY);
        Ok(vec![Record::at_most(name, ORBIT, gap, 0.0, 1e-8).detail(format!("θ = {:.10}", f.theta))])
    }));
    out
}

const ICOSA: &str = "the icosahedron adjacency matrix is a stochastic isometry over Z_2";
const ANTI: &str = "R(anti-identity) = 2^{-n} (I^{⊗6} + X^{⊗6} + Y^{⊗6} + Z^{⊗6})^{⊗n}";
const QUTRIT: &str = "three-qutrit CSS projector splits into irreps of dimension (3^n ± 1)/2";

pub fn icosahedron() -> Vec<Vec<u32>> {
    // 0 top, 1..=5 upper ring, 6..=10 lower ring, 11 bottom
    let mut a = vec![vec![0u32; 12]; 12];
    let mut edge = |i: usize, j: usize| {
        a[i][j] = 1;
        a[j][i] = 1;
    };
    for k in 0..5 {
        edge(0, 1 + k);
        edge(11, 6 + k);
        edge(1 + k, 1 + (k + 1) % 5);
        edge(6 + k, 6 + (k + 1) % 5);
        edge(1 + k, 6 + k);
        edge(1 + k, 6 + (k + 4) % 5);
    }
    a
}

/// `v = ½(I^{⊗6} + X^{⊗6} + Y^{⊗6} + Z^{⊗6})` from the Pauli matrices.
fn pauli_six() -> Operator {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let paulis = [
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        [[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
        [[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]],
        [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]],
    ];
    Operator::from_fn(64, |r, col| {
        let (rd, cd) = (digits(r, 2, 6), digits(col, 2, 6));
        paulis.iter().map(|p| rd.iter().zip(&cd).fold(c(1.0, 0.0), |acc, (&i, &j)| acc * p[i][j])).sum::<Complex64>() * 0.5
    })
}

/// `max |R(anti-identity) - v^{⊗n}|` entrywise, with `R` in copy-major order
/// and `v^{⊗n}` in qubit-major order.
fn anti_identity_error(n: usize) -> Result<f64> {
    let anti = anti_permutation(&(0..6).collect::<Vec<_>>(), 2, &AntiKind::Complement)?;
    let rel = big_r_relation(&anti.lagrangian().space, n)?;
    let v = pauli_six();
    let dim = 1usize << (6 * n);
    let ones: std::collections::HashSet<(usize, usize)> = rel.entries.iter().copied().collect();
    // copy c, qubit q sits at bit position (6-1-c)*n + (n-1-q) from the bottom
    let regroup = |idx: usize, q: usize| -> usize {
        (0..6).fold(0, |acc, c| (acc << 1) | ((idx >> ((5 - c) * n + (n - 1 - q))) & 1))
    };
    let worst = (0..dim)
        .into_par_iter()
        .map(|r| {
            let mut w = 0.0f64;
            for col in 0..dim {
                let mut val = Complex64::new(1.0, 0.0);
                for q in 0..n {
                    val *= v.mat[(regroup(r, q), regroup(col, q))];
                }
                let target = if ones.contains(&(r, col)) { 1.0 } else { 0.0 };
                w = w.max((val - Complex64::new(target, 0.0)).norm());
            }
            w
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

fn structure() -> Vec<Record> {
    let mut out = Vec::new();
    let a = icosahedron();
    out.push(Record::new("icosahedron in O_12(2)", ICOSA).passed_if(is_member_o(&a, 12, 2)));
    let comp: Vec<Vec<u32>> = a.iter().map(|r| r.iter().map(|&x| 1 - x).collect()).collect();
    out.push(Record::new("icosahedron complement not in O_12(2)", ICOSA).passed_if(!is_member_o(&comp, 12, 2)));
    for n in [1, 2] {
        let name = format!("anti-identity operator at n={n}");
        out.extend(guarded(&name, ANTI, || Ok(vec![Record::at_most(&name, ANTI, anti_identity_error(n)?, 0.0, 1e-10)])));
    }
    let name = "qutrit irrep dimensions at n=2";
    out.extend(guarded(name, QUTRIT, || {
        let (sym, alt) = qutrit_irrep_dimensions(2)?;
        Ok(vec![
            Record::close(&format!("{name} symmetric"), QUTRIT, sym, 5.0, 1e-10),
            Record::close(&format!("{name} antisymmetric"), QUTRIT, alt, 4.0, 1e-10),
        ])
    }));
    out
}
