//! Subcommand definitions and dispatch.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use stabcomm::clifford::{gate_matrix, random_clifford, Gate};
use stabcomm::commutant::{
    commutes_with_clifford, double_cosets, enumerate_o, enumerate_sigma, linear_independence_check, sigma_size,
    sigma_to_jsonl,
};
use stabcomm::definetti::{anti_definetti_check, exp_definetti_check, make_invariant_state, Purity, Symmetry};
use stabcomm::moments::{
    design_gap, find_design_weights, moment_bruteforce, moment_formula, qutrit_fiducial_search, CommutantBasis,
};
use stabcomm::protocols::{
    clifford_test, qubit_test, qudit_test, robust_hudson_check, simulate_algorithm1, three_copy_test, ProtocolReport,
};
use stabcomm::stabilizer::ensemble;
use stabcomm::{Complex64, Error, Operator, Result, State};

use crate::checks::{criterion_title, run_profile, Profile};
use crate::report::{Format, Record, ReportBundle, Status};

#[derive(Debug, Parser)]
#[command(name = "stabcomm", version, about = "Clifford commutant, stabilizer testing and de Finetti checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    #[serde(skip)]
    pub emit: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// Largest Hilbert-space dimension any dense operator may have.
    #[arg(long, global = true, env = "STABCOMM_DIM_CAP", default_value_t = 8192)]
    pub dim_cap: usize,
    /// Include wall-clock time in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timing: bool,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(untagged)]
pub enum Command {
    /// Enumerate the stochastic Lagrangian subspaces Σ_{t,t}(d).
    EnumerateSigma(TD),
    /// Enumerate the stochastic isometries O_t(d).
    EnumerateO(TD),
    /// Check that R(T) commutes with the Clifford generators and that the R(T) are independent.
    VerifyCommutant(VerifyCommutant),
    /// Orbits of O_t(d) × O_t(d) on Σ_{t,t}(d).
    DoubleCosets(TD),
    /// Stabilizer t-th moments and design gaps.
    Moments(Moments),
    /// Weighted Clifford orbits forming exact designs.
    Design(Design),
    /// Stabilizer testing protocols.
    Test(Test),
    /// Robust Hudson check on odd-d states.
    Hudson(Hudson),
    /// Stabilizer de Finetti checks.
    Definetti(Definetti),
    /// Run the acceptance suite.
    VerifyAll(VerifyAll),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EnumerateSigma(_) => "enumerate-sigma",
            Command::EnumerateO(_) => "enumerate-o",
            Command::VerifyCommutant(_) => "verify-commutant",
            Command::DoubleCosets(_) => "double-cosets",
            Command::Moments(_) => "moments",
            Command::Design(_) => "design",
            Command::Test(_) => "test",
            Command::Hudson(_) => "hudson",
            Command::Definetti(_) => "definetti",
            Command::VerifyAll(_) => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TD {
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub d: u32,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyCommutant {
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub d: u32,
    /// Number of qudits for the independence check.
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Check only this many randomly chosen elements of Σ.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Moments {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub t: usize,
    /// Compare the orbit average against the closed formula.
    #[arg(long)]
    pub check: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Design {
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random fiducials added to |0…0⟩ as candidates.
    #[arg(long, default_value_t = 16)]
    pub fiducials: usize,
    /// Use the one-parameter qutrit fiducial family instead (d = 3, t = 3).
    #[arg(long)]
    pub qutrit: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolArg {
    Qubit6,
    Qudit2s,
    Threecopy,
    Clifford,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Test {
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    #[arg(long)]
    pub n: usize,
    /// Half the number of copies for the qudit test.
    #[arg(long)]
    pub s: Option<usize>,
    /// Simulate the measurement this many times (six-copy qubit test only).
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `stabilizer:<idx>`, `random`, `t` (T states or T gate), or `file:<path>`.
    #[arg(long, default_value = "random")]
    pub input: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Hudson {
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub n: usize,
    /// `stabilizer:<idx>`, `random` or `file:<path>`.
    #[arg(long, default_value = "random")]
    pub input: String,
    /// Number of random states.
    #[arg(long, default_value_t = 1)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Exp,
    Anti,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PurityArg {
    Pure,
    Mixed,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Definetti {
    #[arg(long, value_enum)]
    pub variant: VariantArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: u32,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "pure")]
    pub purity: PurityArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyAll {
    #[arg(long, value_enum, default_value = "quick")]
    pub profile: Profile,
    /// Required for the full profile, which samples states.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Errors that abort a command before any report is produced.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn need_seed(seed: Option<u64>, what: &str) -> CliResult<ChaCha8Rng> {
    seed.map(ChaCha8Rng::seed_from_u64).ok_or_else(|| CliError::Usage(format!("--seed is required for {what}")))
}

fn config_echo(cli: &Cli) -> serde_json::Value {
    let mut v = serde_json::to_value(&cli.command).expect("config serializes");
    if let Some(obj) = v.as_object_mut() {
        obj.insert("dim_cap".into(), json!(cli.global.dim_cap));
    }
    v
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> CliResult<ReportBundle> {
    stabcomm::dense::set_dimension_cap(cli.global.dim_cap);
    let mut bundle = ReportBundle::new(cli.command.name(), config_echo(cli));
    let outcome = match &cli.command {
        Command::EnumerateSigma(a) => enumerate_sigma_cmd(a),
        Command::EnumerateO(a) => enumerate_o_cmd(a),
        Command::VerifyCommutant(a) => verify_commutant_cmd(a),
        Command::DoubleCosets(a) => double_cosets_cmd(a),
        Command::Moments(a) => moments_cmd(a),
        Command::Design(a) => design_cmd(a),
        Command::Test(a) => test_cmd(a),
        Command::Hudson(a) => hudson_cmd(a),
        Command::Definetti(a) => definetti_cmd(a),
        Command::VerifyAll(a) => verify_all_cmd(a),
    };
    let (records, data) = match outcome {
        Err(CliError::Core(e @ Error::CapExceeded { .. })) => {
            (vec![Record::from_error(cli.command.name(), "dimension cap", &e)], serde_json::Value::Null)
        }
        other => other?,
    };
    bundle.records = records;
    bundle.data = data;
    Ok(bundle)
}

type Output = (Vec<Record>, serde_json::Value);

const CARD: &str = "cardinality of Σ_{t,t}(d) = ∏_{k=0}^{t-2} (d^k + 1)";

fn enumerate_sigma_cmd(a: &TD) -> CliResult<Output> {
    let sigma = enumerate_sigma(a.t, a.d)?;
    let expected = sigma_size(a.t, a.d);
    let rec = Record::new("|Σ| matches the product formula", CARD)
        .measured(sigma.len() as f64)
        .bound(expected.to_string().parse::<f64>().unwrap_or(f64::NAN))
        .tolerance(0.0)
        .passed_if(expected == (sigma.len() as u64).into());
    let elements: Vec<serde_json::Value> =
        sigma_to_jsonl(&sigma).lines().map(|l| serde_json::from_str(l).expect("valid record")).collect();
    Ok((vec![rec], json!({ "count": sigma.len(), "elements": elements })))
}

fn enumerate_o_cmd(a: &TD) -> CliResult<Output> {
    let group = enumerate_o(a.t, a.d)?;
    let perms = group.iter().filter(|o| o.is_permutation()).count();
    let factorial: usize = (1..=a.t).product();
    let rec = Record::new("permutations are a subgroup of O_t(d)", "S_t ⊆ O_t(d)")
        .measured(perms as f64)
        .bound(factorial as f64)
        .passed_if(perms == factorial);
    let elements: Vec<serde_json::Value> = group.iter().map(|o| serde_json::to_value(o).expect("serializes")).collect();
    Ok((vec![rec], json!({ "count": group.len(), "elements": elements })))
}

const COMM: &str = "R(T) commutes with Clifford tensor powers for every T in Σ_{t,t}(d)";

fn verify_commutant_cmd(a: &VerifyCommutant) -> CliResult<Output> {
    let sigma = enumerate_sigma(a.t, a.d)?;
    let idx: Vec<usize> = match a.samples {
        Some(k) if k < sigma.len() => {
            let mut rng = need_seed(a.seed, "sampled commutator checks")?;
            let mut v = rand::seq::index::sample(&mut rng, sigma.len(), k).into_vec();
            v.sort_unstable();
            v
        }
        _ => (0..sigma.len()).collect(),
    };
    let mut worst = 0.0f64;
    let mut per = Vec::with_capacity(idx.len());
    for &i in &idx {
        let r = commutes_with_clifford(&sigma[i].space, 2)?;
        worst = worst.max(r.max());
        per.push(json!({ "index": i, "max_commutator": r.max() }));
    }
    let mut records = vec![Record::at_most("max commutator with F, P, CADD, W", COMM, worst, 0.0, 1e-9)
        .detail(format!("{} of {} elements", idx.len(), sigma.len()))];
    let indep = "the operators R(T) are linearly independent for n ≥ t-1";
    match linear_independence_check(a.t, a.d, a.n) {
        Ok(r) => {
            let rec = Record::new(format!("Gram rank at n={}", a.n), indep).measured(r.rank as f64).bound(r.size as f64);
            records.push(if r.stable_range {
                rec.passed_if(r.rank == r.size)
            } else {
                Record { status: Status::Skipped, ..rec.detail("n < t-1: full rank is not guaranteed") }
            });
        }
        Err(e) => records.push(Record::from_error(&format!("Gram rank at n={}", a.n), indep, &e)),
    }
    Ok((records, json!({ "size": sigma.len(), "checked": per })))
}

fn double_cosets_cmd(a: &TD) -> CliResult<Output> {
    let table = double_cosets(a.t, a.d)?;
    let sigma = enumerate_sigma(a.t, a.d)?;
    let covered: usize = table.cosets.iter().map(|c| c.members.len()).sum();
    let rec = Record::new("double cosets partition Σ", "O_t(d) \\ Σ_{t,t}(d) / O_t(d)")
        .measured(covered as f64)
        .bound(sigma.len() as f64)
        .passed_if(covered == sigma.len())
        .detail(format!("{} double cosets", table.cosets.len()));
    Ok((vec![rec], serde_json::to_value(&table).expect("serializes")))
}

const MOMENT: &str = "t-th moment of stabilizer states as a sum over Σ_{t,t}(d)";

fn moments_cmd(a: &Moments) -> CliResult<Output> {
    let mut records = Vec::new();
    let params = json!({ "n": a.n, "d": a.d, "t": a.t });
    let mut data = json!({ "params": params });
    if a.check {
        let gap = moment_bruteforce(a.n, a.d, a.t)?.frobenius_distance(&moment_formula(a.n, a.d, a.t)?);
        records.push(Record::at_most("bruteforce vs formula", MOMENT, gap, 0.0, a.tol));
        data["frobenius_gap"] = json!(gap);
    }
    let basis = CommutantBasis::new(a.t, a.d, a.n)?;
    let formula = basis.formula();
    let tr = basis.trace(&formula);
    records.push(Record::close("trace of the moment operator", MOMENT, tr.re, 1.0, 1e-10));
    let gap = design_gap(a.n, a.d, a.t)?;
    records.push(
        Record::new("distance to the Haar moment", "stabilizer states form designs up to t = 3 (qubits) or 2 (odd d)")
            .measured(gap)
            .detail(if gap < 1e-10 { "exact design" } else { "not a design" }),
    );
    data["design_gap"] = json!(gap);
    data["sigma_size"] = json!(basis.len());
    Ok((records, data))
}

const ORBIT: &str = "a mixture of at most M Clifford orbits forms an exact t-design";

fn design_cmd(a: &Design) -> CliResult<Output> {
    if a.qutrit {
        if a.d != 3 || a.t != 3 {
            return Err(CliError::Usage("--qutrit needs --d 3 --t 3".into()));
        }
        let f = qutrit_fiducial_search(a.n)?;
        let rec = match f.gap {
            Some(g) => Record::at_most("orbit gap of the qutrit fiducial", ORBIT, g, 0.0, a.tol),
            None => Record { status: Status::Skipped, ..Record::new("orbit gap of the qutrit fiducial", ORBIT).detail("past the caps") },
        };
        let data = json!({
            "params": { "n": a.n, "d": a.d, "t": a.t },
            "frobenius_gap": f.gap,
            "weights": [1.0],
            "fiducials": [{ "family": "cos θ|0⟩ - sin θ|1⟩", "theta": f.theta }],
            "search": f,
        });
        return Ok((vec![rec], data));
    }
    let mut rng = need_seed(a.seed, "random fiducials")?;
    let local = stabcomm::dense::checked_pow(a.d, a.n)?;
    let mut fid = vec![State::basis(local, 0)];
    fid.extend((0..a.fiducials).map(|_| State::random(local, &mut rng)));
    let design = find_design_weights(&fid, a.n, a.d, a.t, &mut rng)?;
    let records = vec![
        Record::at_most("Frobenius distance to the Haar moment", ORBIT, design.gap, 0.0, a.tol),
        Record::at_most("support within the class count", ORBIT, design.weights.len() as f64, design.class_count as f64, 0.0),
    ];
    let fiducials: Vec<serde_json::Value> = design
        .chosen
        .iter()
        .zip(&design.fiducials)
        .map(|(i, s)| json!({ "index": i, "amplitudes": amplitudes(s) }))
        .collect();
    let data = json!({
        "params": { "n": a.n, "d": a.d, "t": a.t },
        "frobenius_gap": design.gap,
        "weights": design.weights,
        "fiducials": fiducials,
        "class_count": design.class_count,
    });
    Ok((records, data))
}

fn amplitudes(s: &State) -> Vec<[f64; 2]> {
    s.amps.iter().map(|z| [z.re, z.im]).collect()
}

/// Pure state as `{"re": [...], "im": [...]}`, normalized on load.
#[derive(Serialize, Deserialize)]
pub struct StateJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

fn read_file(path: &str) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(path.into(), e))
}

pub fn state_from_json(s: &str) -> Result<State> {
    let raw: StateJson = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
    if raw.re.len() != raw.im.len() {
        return Err(Error::DimensionMismatch { expected: raw.re.len(), found: raw.im.len() });
    }
    State::from_vec(raw.re.iter().zip(&raw.im).map(|(&r, &i)| Complex64::new(r, i)).collect())
}

fn t_state() -> State {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    State::from_vec(vec![Complex64::new(h, 0.0), Complex64::from_polar(h, std::f64::consts::FRAC_PI_4)])
        .expect("nonzero")
}

fn parse_state(input: &str, n: usize, d: u32, seed: Option<u64>) -> CliResult<State> {
    let local = stabcomm::dense::checked_pow(d, n)?;
    if let Some(idx) = input.strip_prefix("stabilizer:") {
        let idx: usize = idx.parse().map_err(|_| CliError::Usage(format!("bad stabilizer index {idx:?}")))?;
        let ens = ensemble(n, d)?;
        let s = ens
            .states
            .get(idx)
            .ok_or_else(|| CliError::Usage(format!("stabilizer index {idx} out of range (ensemble has {})", ens.len())))?;
        return Ok(s.vector.clone());
    }
    if let Some(path) = input.strip_prefix("file:") {
        let psi = state_from_json(&read_file(path)?)?;
        if psi.dim() != local {
            return Err(Error::DimensionMismatch { expected: local, found: psi.dim() }.into());
        }
        return Ok(psi);
    }
    match input {
        "random" => Ok(State::random(local, &mut need_seed(seed, "random inputs")?)),
        "t" if d == 2 => Ok(t_state().kron_power(n)?),
        "t" => Err(CliError::Usage("the T state input is for qubits".into())),
        other => Err(CliError::Usage(format!("unknown input {other:?}"))),
    }
}

fn parse_unitary(input: &str, n: usize, seed: Option<u64>) -> CliResult<Operator> {
    if let Some(path) = input.strip_prefix("file:") {
        return Ok(Operator::from_json(&read_file(path)?)?);
    }
    match input {
        "random" => Ok(random_clifford(n, 2, 40 * n, &mut need_seed(seed, "random inputs")?)?.1),
        "t" => {
            let dim = 1usize << n;
            let mut u = Operator::identity(dim);
            let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
            // T on the first qubit
            for i in dim / 2..dim {
                u.mat[(i, i)] = phase;
            }
            Ok(u)
        }
        "cnot" if n >= 2 => Ok(gate_matrix(&Gate::Cadd(0, 1), n, 2)?),
        "hadamard" => Ok(gate_matrix(&Gate::Fourier(0), n, 2)?),
        other => Err(CliError::Usage(format!("unknown unitary input {other:?}"))),
    }
}

fn protocol_anchor(r: &ProtocolReport) -> &'static str {
    use stabcomm::protocols::Protocol::*;
    match r.protocol {
        Qubit6 | Algorithm1 => "six-copy qubit test: p = ½(1 + 4^n Σ p_ψ³) ≤ 1 - ε²/4",
        Qudit2s => "2s-copy qudit test: p ≤ 1 - C_{d,s} ε²",
        ThreeCopy => "three-copy test for d ≡ 1, 5 mod 6: p ≤ 1 - ε²/(16 d²)",
        Clifford => "Clifford testing through the Choi state",
        Hudson => "1 - max stabilizer overlap ≤ 9 d² sn(ψ)",
    }
}

fn protocol_records(r: &ProtocolReport) -> Vec<Record> {
    r.assertions
        .iter()
        .map(|a| {
            let mut rec = Record::new(&a.name, protocol_anchor(r)).detail(&a.detail).passed_if(a.passed);
            if a.name == "soundness" {
                rec.measured = r.p_accept;
                rec.bound = r.bound;
            }
            rec
        })
        .collect()
}

fn test_cmd(a: &Test) -> CliResult<Output> {
    if a.shots.is_some() && a.protocol != ProtocolArg::Qubit6 {
        return Err(CliError::Usage("--shots is only supported for the six-copy qubit test".into()));
    }
    if a.s.is_some() && a.protocol != ProtocolArg::Qudit2s {
        return Err(CliError::Usage("--s only applies to the qudit test".into()));
    }
    let report = match a.protocol {
        ProtocolArg::Qubit6 => {
            if a.d != 2 {
                return Err(CliError::Usage("the six-copy test is for qubits (--d 2)".into()));
            }
            let psi = parse_state(&a.input, a.n, 2, a.seed)?;
            match a.shots {
                Some(shots) => {
                    let mut rng = need_seed(a.seed, "Monte-Carlo shots")?;
                    let mut r = simulate_algorithm1(&psi, shots, &mut rng)?;
                    r.input = a.input.clone();
                    r
                }
                None => qubit_test(&psi, &a.input)?,
            }
        }
        ProtocolArg::Qudit2s => {
            let s = a.s.ok_or_else(|| CliError::Usage("--s is required for the qudit test".into()))?;
            qudit_test(&parse_state(&a.input, a.n, a.d, a.seed)?, a.d, s, &a.input)?
        }
        ProtocolArg::Threecopy => three_copy_test(&parse_state(&a.input, a.n, a.d, a.seed)?, a.d, &a.input)?,
        ProtocolArg::Clifford => {
            if a.d != 2 {
                return Err(CliError::Usage("Clifford testing is implemented for qubits (--d 2)".into()));
            }
            clifford_test(&parse_unitary(&a.input, a.n, a.seed)?, &a.input)?
        }
    };
    let mut records = protocol_records(&report);
    if records.is_empty() {
        records.push(Record::new("acceptance probability", protocol_anchor(&report)).measured(report.p_accept.unwrap_or(f64::NAN)));
    }
    Ok((records, serde_json::to_value(&report).expect("serializes")))
}

/// Collapses per-state assertions into one record per assertion name.
fn aggregate(reports: &[ProtocolReport]) -> Vec<Record> {
    let mut by_name: BTreeMap<&str, (usize, usize, String)> = BTreeMap::new();
    for r in reports {
        for a in &r.assertions {
            let e = by_name.entry(&a.name).or_insert((0, 0, String::new()));
            e.0 += 1;
            if !a.passed {
                e.1 += 1;
                if e.2.is_empty() {
                    e.2 = a.detail.clone();
                }
            }
        }
    }
    let anchor = reports.first().map(protocol_anchor).unwrap_or("");
    by_name
        .into_iter()
        .map(|(name, (total, failed, first))| {
            let detail = if failed == 0 { format!("{total} states") } else { format!("{failed} of {total} failed; first: {first}") };
            Record::new(name, anchor).measured(failed as f64).bound(0.0).detail(detail).passed_if(failed == 0)
        })
        .collect()
}

fn hudson_cmd(a: &Hudson) -> CliResult<Output> {
    if a.samples == 0 {
        return Err(CliError::Usage("--samples must be positive".into()));
    }
    let reports = if a.samples > 1 {
        if a.input != "random" {
            return Err(CliError::Usage("--samples > 1 needs --input random".into()));
        }
        let mut rng = need_seed(a.seed, "random inputs")?;
        let local = stabcomm::dense::checked_pow(a.d, a.n)?;
        (0..a.samples)
            .map(|_| robust_hudson_check(&State::random(local, &mut rng), a.d, "random"))
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![robust_hudson_check(&parse_state(&a.input, a.n, a.d, a.seed)?, a.d, &a.input)?]
    };
    let records = if reports.len() == 1 { protocol_records(&reports[0]) } else { aggregate(&reports) };
    Ok((records, serde_json::to_value(&reports).expect("serializes")))
}

fn definetti_cmd(a: &Definetti) -> CliResult<Output> {
    let mut rng = need_seed(a.seed, "random invariant states")?;
    let purity = match a.purity {
        PurityArg::Pure => Purity::Pure,
        PurityArg::Mixed => Purity::Mixed,
    };
    let (report, anchor) = match a.variant {
        VariantArg::Exp => {
            let input = make_invariant_state(a.t, a.n, a.d, Symmetry::FullO, purity, &mut rng)?;
            (exp_definetti_check(&input, a.s)?, "O_t-invariant states are d^{-(t-s)/2}-close to stabilizer mixtures")
        }
        VariantArg::Anti => {
            let input = make_invariant_state(a.t, a.n, a.d, Symmetry::PermutationsAntiIdentity, purity, &mut rng)?;
            (anti_definetti_check(&input, a.s)?, "anti-identity invariant states are O(√(s/t))-close to stabilizer mixtures")
        }
    };
    let rec = Record::at_most("trace distance within the bound", anchor, report.measured, report.bound, 0.0)
        .passed_if(report.passed)
        .detail(format!("route {}{}", report.route, if report.vacuous { ", bound is vacuous" } else { "" }));
    Ok((vec![rec], serde_json::to_value(&report).expect("serializes")))
}

fn verify_all_cmd(a: &VerifyAll) -> CliResult<Output> {
    let seed = match (a.profile, a.seed) {
        (_, Some(s)) => s,
        (Profile::Quick, None) => 0,
        (Profile::Full, None) => return Err(CliError::Usage("--seed is required for the full profile".into())),
    };
    let results = run_profile(a.profile, seed);
    let summary: Vec<serde_json::Value> = results
        .iter()
        .map(|(k, recs)| {
            let failed = recs.iter().filter(|r| r.status == Status::Fail).count();
            let skipped = recs.iter().filter(|r| r.status == Status::Skipped).count();
            json!({ "criterion": k, "title": criterion_title(*k), "checks": recs.len(), "failed": failed, "skipped": skipped })
        })
        .collect();
    let records = results.into_iter().flat_map(|(_, r)| r).collect();
    Ok((records, json!({ "seed": seed, "criteria": summary })))
}
