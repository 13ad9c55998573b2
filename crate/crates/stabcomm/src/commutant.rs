//! Stochastic Lagrangian subspaces `T ⊆ Z_d^{2t}`, the stochastic orthogonal
//! group `O_t(d)`, and the operators `r(T) = Σ_{(x,y)∈T} |x⟩⟨y|`,
//! `R(T) = r(T)^{⊗n}` that span the commutant of the `t`-th tensor power of
//! the Clifford group.
//!
//! Vectors of `Z_d^{2t}` are stored as `(x, y)` with `x` in the first `t`
//! slots. Operators on `(C^{d^n})^{⊗t}` use copy-major ordering: the digit at
//! position `k·n + i` belongs to copy `k`, qudit `i`.

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::clifford::{fourier, gate_monomial, Gate};
use crate::dense::{check_dim, digits, from_digits, kron_power, DenseOperator, PureState};
use crate::error::{Error, Result};
use crate::gf_linalg::{
    for_each_tuple, is_totally_isotropic, rref_reduced, BilinearForm, GfVector, Modulus, QuadraticForm, Subspace,
};
use crate::phase_space::{all_points, Monomial};
use crate::scalar::C;

pub type Operator = DenseOperator<f64>;
pub type State = PureState<f64>;

/// Largest `t` for which `Σ_{t,t}(d)` and `O_t(d)` are enumerated.
pub fn max_enumerable_t(d: u32) -> usize {
    match d {
        2 => 6,
        3 => 5,
        5 => 4,
        _ => 0,
    }
}

fn check_feasible(t: usize, d: u32) -> Result<Modulus> {
    let m = Modulus::new(d)?;
    if t == 0 || t > max_enumerable_t(d) {
        return Err(Error::Infeasible(format!(
            "enumeration supported for (d=2, t≤6), (d=3, t≤5), (d=5, t≤4); got (d={d}, t={t})"
        )));
    }
    Ok(m)
}

fn ones(len: usize) -> GfVector {
    vec![1; len]
}

fn unit(len: usize, i: usize) -> GfVector {
    let mut v = vec![0; len];
    v[i] = 1;
    v
}

/// `∏_{k=0}^{t-2} (d^k + 1)`.
pub fn sigma_size(t: usize, d: u32) -> num_bigint::BigUint {
    let q = num_bigint::BigUint::from(d);
    (0..t.saturating_sub(1) as u32).map(|k| q.pow(k) + 1u32).product()
}

/// Left and right defect subspaces plus the induced isomorphism between the quotients.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DefectData {
    pub t_ld: Subspace,
    pub t_rd: Subspace,
    /// Pairs `(y, x)`: `y` runs over lex-least representatives of `T_RD^⊥ / T_RD`,
    /// `x` is the lex-least representative of the class it maps to in `T_LD^⊥ / T_LD`.
    pub j: Vec<(GfVector, GfVector)>,
}

#[derive(Clone, Debug)]
pub struct StochasticLagrangian {
    pub t: usize,
    pub d: u32,
    pub space: Subspace,
    defect: OnceLock<DefectData>,
}

impl PartialEq for StochasticLagrangian {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space
    }
}

impl Eq for StochasticLagrangian {}

impl std::hash::Hash for StochasticLagrangian {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.space.hash(state)
    }
}

impl StochasticLagrangian {
    /// Validate dimension, isotropy and stochasticity.
    pub fn new(space: Subspace) -> Result<Self> {
        if !space.ambient.is_multiple_of(2) {
            return Err(Error::InvalidInput("ambient dimension must be even".into()));
        }
        let t = space.ambient / 2;
        if space.dim() != t {
            return Err(Error::InvalidInput(format!("dimension {} is not {t}", space.dim())));
        }
        if !is_totally_isotropic(&space, QuadraticForm::Hyperbolic) {
            return Err(Error::InvalidInput("subspace is not totally isotropic".into()));
        }
        if !space.contains(&ones(2 * t)) {
            return Err(Error::InvalidInput("subspace does not contain the all-ones vector".into()));
        }
        Ok(Self::unchecked(space))
    }

    fn unchecked(space: Subspace) -> Self {
        Self { t: space.ambient / 2, d: space.d, space, defect: OnceLock::new() }
    }

    /// The diagonal `Δ = {(x, x)}`.
    pub fn diagonal(t: usize, d: u32) -> Result<Self> {
        StochasticIsometry::identity(t, d).map(|o| o.lagrangian())
    }

    pub fn modulus(&self) -> Modulus {
        self.space.modulus()
    }

    /// `dim(T ∩ Δ)`, so that `tr r(T) = d^{dim(T∩Δ)}`.
    pub fn diagonal_dim(&self) -> usize {
        let delta = Self::diagonal(self.t, self.d).expect("valid parameters");
        intersection_dim(&self.space, &delta.space)
    }

    pub fn defect(&self) -> &DefectData {
        self.defect.get_or_init(|| defect_decompose(&self.space))
    }

    /// `dim T_LD`.
    pub fn defect_dim(&self) -> usize {
        self.defect().t_ld.dim()
    }

    pub fn defect_contains_ones(&self) -> bool {
        self.defect().t_ld.contains(&ones(self.t))
    }

    /// `Some(O)` when `T = {(Ox, x)}`.
    pub fn as_isometry(&self) -> Option<StochasticIsometry> {
        if self.defect_dim() != 0 {
            return None;
        }
        let t = self.t;
        let cols: Vec<GfVector> = (0..t)
            .map(|j| {
                let (_, x) = self.defect().j.iter().find(|(y, _)| *y == unit(t, j)).expect("unit vector is a rep");
                x.clone()
            })
            .collect();
        let o = (0..t).map(|i| (0..t).map(|j| cols[j][i]).collect()).collect();
        Some(StochasticIsometry { t, d: self.d, o })
    }
}

pub fn intersection_dim(a: &Subspace, b: &Subspace) -> usize {
    let sum = a.sum(b).expect("same ambient space");
    a.dim() + b.dim() - sum.dim()
}

/// `t × t` matrix `O` with `OᵀO = I`, `q(Ox) = q(x)` and `O 1 = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StochasticIsometry {
    pub t: usize,
    pub d: u32,
    /// Row-major.
    pub o: Vec<Vec<u32>>,
}

impl StochasticIsometry {
    pub fn new(o: Vec<Vec<u32>>, d: u32) -> Result<Self> {
        let t = o.len();
        if !is_member_o(&o, t, d) {
            return Err(Error::InvalidInput("matrix is not a stochastic isometry".into()));
        }
        Ok(Self { t, d, o })
    }

    pub fn identity(t: usize, d: u32) -> Result<Self> {
        Modulus::new(d)?;
        Ok(Self { t, d, o: (0..t).map(|i| unit(t, i)).collect() })
    }

    /// Matrix with `O e_j = e_{π(j)}`.
    pub fn permutation(pi: &[usize], d: u32) -> Result<Self> {
        let t = pi.len();
        let mut seen = vec![false; t];
        for &p in pi {
            if p >= t || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidInput(format!("{pi:?} is not a permutation")));
            }
        }
        Modulus::new(d)?;
        let mut o = vec![vec![0; t]; t];
        for (j, &p) in pi.iter().enumerate() {
            o[p][j] = 1;
        }
        Ok(Self { t, d, o })
    }

    pub fn apply(&self, x: &[u32]) -> GfVector {
        let d = self.d as u64;
        self.o
            .iter()
            .map(|row| (row.iter().zip(x).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % d) as u32)
            .collect()
    }

    pub fn transpose(&self) -> Self {
        let t = self.t;
        Self { t, d: self.d, o: (0..t).map(|i| (0..t).map(|j| self.o[j][i]).collect()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let t = self.t;
        let d = self.d as u64;
        let o = (0..t)
            .map(|i| {
                (0..t)
                    .map(|j| ((0..t).map(|k| self.o[i][k] as u64 * other.o[k][j] as u64).sum::<u64>() % d) as u32)
                    .collect()
            })
            .collect();
        Self { t, d: self.d, o }
    }

    pub fn is_permutation(&self) -> bool {
        self.o.iter().all(|row| row.iter().filter(|&&x| x == 1).count() == 1 && row.iter().all(|&x| x <= 1))
    }

    /// `T_O = {(Ox, x)}`.
    pub fn lagrangian(&self) -> StochasticLagrangian {
        let t = self.t;
        let rows: Vec<GfVector> = (0..t)
            .map(|j| {
                let mut v = self.apply(&unit(t, j));
                v.extend(unit(t, j));
                v
            })
            .collect();
        StochasticLagrangian::unchecked(rref_reduced(rows, 2 * t, Modulus::new(self.d).expect("prime")))
    }
}

/// Orthogonality, `q = 1` on every column, and `O 1 = 1`.
pub fn is_member_o(o: &[Vec<u32>], t: usize, d: u32) -> bool {
    let Ok(m) = Modulus::new(d) else { return false };
    if o.len() != t || o.iter().any(|r| r.len() != t || r.iter().any(|&x| x >= d)) {
        return false;
    }
    let col = |j: usize| -> GfVector { o.iter().map(|r| r[j]).collect() };
    let cols: Vec<GfVector> = (0..t).map(col).collect();
    let big_d = m.big_d() as i64;
    for (i, a) in cols.iter().enumerate() {
        if QuadraticForm::Dot.eval(a, m) as i64 % big_d != 1 % big_d {
            return false;
        }
        for b in &cols[i + 1..] {
            if BilinearForm::Dot.eval(a, b, m) != 0 {
                return false;
            }
        }
    }
    (0..t).all(|i| o[i].iter().map(|&x| x as u64).sum::<u64>() % d as u64 == 1)
}

/// Exhaustive search: every subspace with a candidate vector appended is kept
/// when it stays isotropic. Grows from `span{1_{2t}}` one dimension per level.
fn enumerate_sigma_uncached(t: usize, d: u32) -> Result<Vec<StochasticLagrangian>> {
    let m = check_feasible(t, d)?;
    let big_d = m.big_d();
    let start = Subspace::span(&[ones(2 * t)], 2 * t, m);
    let mut level: Vec<Subspace> = vec![start];
    for _ in 1..t {
        let children: Vec<Vec<Subspace>> = level
            .par_iter()
            .map(|s| {
                let mut found = Vec::new();
                let perp = s.complement(BilinearForm::Hyperbolic).expect("even ambient");
                // basis of a complement of s inside perp
                let quotient = rref_reduced(perp.basis.iter().map(|b| s.reduce(b)).collect(), 2 * t, m);
                for_each_tuple(quotient.dim(), d, |c| {
                    // projective representatives only: first nonzero coefficient is 1
                    if c.iter().find(|&&x| x != 0) != Some(&1) {
                        return;
                    }
                    let v = quotient.combine(c);
                    if !QuadraticForm::Hyperbolic.eval(&v, m).is_multiple_of(big_d) {
                        return;
                    }
                    let mut rows = s.basis.clone();
                    rows.push(v);
                    found.push(rref_reduced(rows, 2 * t, m));
                });
                found
            })
            .collect();
        let next: HashSet<Subspace> = children.into_iter().flatten().collect();
        level = next.into_iter().collect();
    }
    let mut out: Vec<Subspace> = level.into_iter().collect();
    out.sort();
    Ok(out.into_iter().map(StochasticLagrangian::unchecked).collect())
}

/// Brute force over all `t`-dimensional subspaces; the reference for small sizes.
pub fn enumerate_sigma_bruteforce(t: usize, d: u32) -> Result<Vec<StochasticLagrangian>> {
    let m = Modulus::new(d)?;
    let candidates = crate::gf_linalg::gaussian_binomial(2 * t as u32, t as u32, d);
    if candidates > num_bigint::BigUint::from(2_000_000u32) {
        return Err(Error::Infeasible(format!("brute force would scan {candidates} subspaces")));
    }
    let one = ones(2 * t);
    Ok(crate::gf_linalg::all_subspaces(2 * t, t, m)
        .into_iter()
        .filter(|s| s.contains(&one) && is_totally_isotropic(s, QuadraticForm::Hyperbolic))
        .map(StochasticLagrangian::unchecked)
        .collect())
}

type SigmaCache = Mutex<HashMap<(usize, u32), Arc<Vec<StochasticLagrangian>>>>;
type OCache = Mutex<HashMap<(usize, u32), Arc<Vec<StochasticIsometry>>>>;

/// All of `Σ_{t,t}(d)`, sorted by canonical basis. Cached.
pub fn enumerate_sigma(t: usize, d: u32) -> Result<Arc<Vec<StochasticLagrangian>>> {
    static CACHE: OnceLock<SigmaCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(t, d)) {
        return Ok(v.clone());
    }
    let v = Arc::new(enumerate_sigma_uncached(t, d)?);
    if num_bigint::BigUint::from(v.len()) != sigma_size(t, d) {
        return Err(Error::Invariant(format!("found {} elements, expected {}", v.len(), sigma_size(t, d))));
    }
    cache.lock().unwrap().insert((t, d), v.clone());
    Ok(v)
}

fn enumerate_o_uncached(t: usize, d: u32) -> Result<Vec<StochasticIsometry>> {
    let m = check_feasible(t, d)?;
    let big_d = m.big_d();
    let mut candidates = Vec::new();
    for_each_tuple(t, d, |v| {
        if QuadraticForm::Dot.eval(v, m) % big_d == 1 % big_d {
            candidates.push(v.to_vec());
        }
    });
    let mut out = Vec::new();
    let mut cols: Vec<GfVector> = Vec::with_capacity(t);
    fn dfs(
        t: usize,
        m: Modulus,
        candidates: &[GfVector],
        cols: &mut Vec<GfVector>,
        out: &mut Vec<StochasticIsometry>,
    ) {
        let d = m.d();
        if cols.len() + 1 == t {
            // stochasticity forces the last column: 1 - Σ others
            let last: GfVector = (0..t)
                .map(|i| m.reduce(1 - cols.iter().map(|c| c[i] as i64).sum::<i64>()))
                .collect();
            let ok = QuadraticForm::Dot.eval(&last, m) % m.big_d() == 1 % m.big_d()
                && cols.iter().all(|c| BilinearForm::Dot.eval(c, &last, m) == 0);
            if ok {
                let mut all = cols.clone();
                all.push(last);
                let o = (0..t).map(|i| (0..t).map(|j| all[j][i]).collect()).collect();
                out.push(StochasticIsometry { t, d, o });
            }
            return;
        }
        for c in candidates {
            if cols.iter().all(|p| BilinearForm::Dot.eval(p, c, m) == 0) {
                cols.push(c.clone());
                dfs(t, m, candidates, cols, out);
                cols.pop();
            }
        }
    }
    if t == 1 {
        return Ok(vec![StochasticIsometry::identity(1, d)?]);
    }
    dfs(t, m, &candidates, &mut cols, &mut out);
    out.sort();
    Ok(out)
}

/// All of `O_t(d)`, sorted. Cached.
pub fn enumerate_o(t: usize, d: u32) -> Result<Arc<Vec<StochasticIsometry>>> {
    static CACHE: OnceLock<OCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&(t, d)) {
        return Ok(v.clone());
    }
    let v = Arc::new(enumerate_o_uncached(t, d)?);
    cache.lock().unwrap().insert((t, d), v.clone());
    Ok(v)
}

/// Largest sparse relation (number of ones) we build.
pub const RELATION_CAP: u128 = 1 << 22;

/// A 0/1 matrix given by the positions of its ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub dim: usize,
    pub entries: Vec<(usize, usize)>,
}

impl Relation {
    pub fn to_dense(&self) -> Result<Operator> {
        check_dim(self.dim as u128)?;
        let mut out = Operator::zeros(self.dim);
        for &(r, c) in &self.entries {
            out.mat[(r, c)] += C::new(1.0, 0.0);
        }
        Ok(out)
    }

    pub fn trace(&self) -> usize {
        self.entries.iter().filter(|(r, c)| r == c).count()
    }

    /// `⟨φ|R|ψ⟩`.
    pub fn expectation_between(&self, phi: &State, psi: &State) -> C<f64> {
        self.entries.iter().fold(C::new(0.0, 0.0), |acc, &(r, c)| acc + phi.amps[r].conj() * psi.amps[c])
    }

    pub fn expectation(&self, psi: &State) -> C<f64> {
        self.expectation_between(psi, psi)
    }

    /// `R |ψ⟩`, not normalized.
    pub fn apply(&self, amps: &nalgebra::DVector<C<f64>>) -> nalgebra::DVector<C<f64>> {
        let mut out = nalgebra::DVector::zeros(self.dim);
        for &(r, c) in &self.entries {
            out[r] += amps[c];
        }
        out
    }

    /// `tr[R† R'] = |R ∩ R'|`.
    pub fn overlap(&self, other: &Relation) -> usize {
        let set: HashSet<&(usize, usize)> = self.entries.iter().collect();
        other.entries.iter().filter(|e| set.contains(e)).count()
    }

    /// Integer matrix product as a sparse map.
    pub fn product(&self, other: &Relation) -> HashMap<(usize, usize), u64> {
        let mut by_row: HashMap<usize, Vec<usize>> = HashMap::new();
        for &(r, c) in &other.entries {
            by_row.entry(r).or_default().push(c);
        }
        let mut out = HashMap::new();
        for &(x, y) in &self.entries {
            if let Some(zs) = by_row.get(&y) {
                for &z in zs {
                    *out.entry((x, z)).or_insert(0) += 1;
                }
            }
        }
        out
    }
}

/// `r(T) = Σ_{(x,y)∈T} |x⟩⟨y|` for any subspace of `Z_d^{2t}`.
pub fn r_relation(space: &Subspace) -> Relation {
    let t = space.ambient / 2;
    let d = space.d as usize;
    let mut entries: Vec<(usize, usize)> = space
        .elements()
        .iter()
        .map(|v| {
            let row: Vec<usize> = v[..t].iter().map(|&a| a as usize).collect();
            let col: Vec<usize> = v[t..].iter().map(|&a| a as usize).collect();
            (from_digits(&row, d), from_digits(&col, d))
        })
        .collect();
    entries.sort_unstable();
    Relation { dim: d.pow(t as u32), entries }
}

/// `R(T) = r(T)^{⊗n}` in copy-major ordering.
pub fn big_r_relation(space: &Subspace, n: usize) -> Result<Relation> {
    let t = space.ambient / 2;
    let d = space.d as usize;
    let dim = (d as u128).pow((t * n) as u32);
    if dim > RELATION_CAP {
        return Err(Error::CapExceeded { requested: dim, cap: RELATION_CAP });
    }
    let dim = dim as usize;
    let elems = space.elements();
    let len = t * n;
    let weight = |pos: usize| d.pow((len - 1 - pos) as u32);
    // contribution of qudit i taking element e
    let contrib: Vec<Vec<(usize, usize)>> = (0..n)
        .map(|i| {
            elems
                .iter()
                .map(|v| {
                    (0..t).fold((0, 0), |(r, c), k| {
                        let w = weight(k * n + i);
                        (r + v[k] as usize * w, c + v[t + k] as usize * w)
                    })
                })
                .collect()
        })
        .collect();
    let mut entries = vec![(0usize, 0usize)];
    for per_qudit in &contrib {
        entries = entries
            .iter()
            .flat_map(|&(r, c)| per_qudit.iter().map(move |&(dr, dc)| (r + dr, c + dc)))
            .collect();
    }
    entries.sort_unstable();
    Ok(Relation { dim, entries })
}

pub fn r_of_t(t: &StochasticLagrangian) -> Result<Operator> {
    r_relation(&t.space).to_dense()
}

pub fn big_r_of_t(t: &StochasticLagrangian, n: usize) -> Result<Operator> {
    big_r_relation(&t.space, n)?.to_dense()
}

/// `U^{⊗t}` for a monomial `U` on one copy.
pub fn monomial_power(u: &Monomial<f64>, t: usize) -> Result<Monomial<f64>> {
    let local = u.dim();
    let dim = check_dim((local as u128).pow(t as u32))?;
    let mut perm = Vec::with_capacity(dim);
    let mut phase = Vec::with_capacity(dim);
    for j in 0..dim {
        let ds = digits(j, local, t);
        let img: Vec<usize> = ds.iter().map(|&a| u.perm[a]).collect();
        perm.push(from_digits(&img, local));
        phase.push(ds.iter().fold(C::new(1.0, 0.0), |acc, &a| acc * u.phase[a]));
    }
    Ok(Monomial { perm, phase })
}

/// `max |[R, U]|` entrywise for a monomial `U`.
pub fn relation_monomial_commutator(r: &Relation, u: &Monomial<f64>) -> f64 {
    let mut inv = vec![0usize; u.dim()];
    for (j, &p) in u.perm.iter().enumerate() {
        inv[p] = j;
    }
    let mut acc: HashMap<(usize, usize), C<f64>> = HashMap::new();
    for &(r, c) in &r.entries {
        // R U |j⟩ picks up (r, j) with j = perm⁻¹(c)
        let j = inv[c];
        *acc.entry((r, j)).or_insert(C::new(0.0, 0.0)) += u.phase[j];
        // U R |c⟩ = phase[r] |perm(r)⟩
        *acc.entry((u.perm[r], c)).or_insert(C::new(0.0, 0.0)) -= u.phase[r];
    }
    acc.values().map(|v| v.norm()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct CommutatorReport {
    pub fourier: f64,
    pub phase: f64,
    pub weyl: f64,
    /// Only checked when `n ≥ 2`.
    pub cadd: Option<f64>,
}

impl CommutatorReport {
    pub fn max(&self) -> f64 {
        [self.fourier, self.phase, self.weyl, self.cadd.unwrap_or(0.0)].into_iter().fold(0.0, f64::max)
    }
}

/// Commutators of `R(T)` with `U^{⊗t}` for the Clifford generators.
///
/// Single-qudit gates are checked on one qudit: `R(T)` factorizes over qudits,
/// so the commutator on `n` qudits vanishes iff it does for `n = 1`. The
/// two-qudit gate `CADD` is checked at `n = 2`.
pub fn commutes_with_clifford(space: &Subspace, n: usize) -> Result<CommutatorReport> {
    let t = space.ambient / 2;
    let d = space.d;
    let r1 = r_relation(space);
    let r_dense = r1.to_dense()?;
    let h = kron_power(&fourier(d), t)?;
    let fourier_err = r_dense.mul(&h).sub(&h.mul(&r_dense)).max_abs();
    let phase = monomial_power(&gate_monomial(&Gate::Phase(0), 1, d).expect("monomial"), t)?;
    let phase_err = relation_monomial_commutator(&r1, &phase);
    let mut weyl_err: f64 = 0.0;
    for x in all_points(1, d) {
        let w = monomial_power(&gate_monomial(&Gate::Weyl(x), 1, d).expect("monomial"), t)?;
        weyl_err = weyl_err.max(relation_monomial_commutator(&r1, &w));
    }
    let cadd = if n >= 2 {
        let r2 = big_r_relation(space, 2)?;
        let mut e: f64 = 0.0;
        for g in [Gate::Cadd(0, 1), Gate::Cadd(1, 0)] {
            let u = monomial_power(&gate_monomial(&g, 2, d).expect("monomial"), t)?;
            e = e.max(relation_monomial_commutator(&r2, &u));
        }
        Some(e)
    } else {
        None
    };
    Ok(CommutatorReport { fourier: fourier_err, phase: phase_err, weyl: weyl_err, cadd })
}

/// Rank of an integer matrix by fraction-free elimination.
pub fn bigint_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(rank, p);
        for i in rank + 1..rows {
            for j in col + 1..cols {
                let v = (&a[i][j] * &a[rank][col] - &a[i][col] * &a[rank][j]) / &prev;
                a[i][j] = v;
            }
            a[i][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// `G_{TT'} = d^{n·dim(T∩T')} = tr[R(T)† R(T')]` as exact integers.
pub fn gram_matrix(sigma: &[StochasticLagrangian], n: usize) -> Vec<Vec<BigInt>> {
    let k = sigma.len();
    let mut dims = vec![vec![0usize; k]; k];
    for i in 0..k {
        for j in i..k {
            let v = intersection_dim(&sigma[i].space, &sigma[j].space);
            dims[i][j] = v;
            dims[j][i] = v;
        }
    }
    dims.iter()
        .map(|row| row.iter().map(|&e| BigInt::from(sigma[0].d).pow((n * e) as u32)).collect())
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub size: usize,
    pub rank: usize,
    /// `n ≥ t - 1`, where full rank is guaranteed.
    pub stable_range: bool,
}

pub fn linear_independence_check(t: usize, d: u32, n: usize) -> Result<IndependenceReport> {
    let sigma = enumerate_sigma(t, d)?;
    let rank = bigint_rank(gram_matrix(&sigma, n));
    let stable_range = n + 1 >= t;
    if stable_range && rank != sigma.len() {
        return Err(Error::Invariant(format!("rank {rank} below |Σ| = {} at n = {n}", sigma.len())));
    }
    Ok(IndependenceReport { size: sigma.len(), rank, stable_range })
}

fn project(space: &Subspace, keep: std::ops::Range<usize>) -> Vec<GfVector> {
    space.basis.iter().map(|b| b[keep.clone()].to_vec()).collect()
}

/// `{x : (x, 0) ∈ T}` (left) or `{y : (0, y) ∈ T}` (right).
fn defect_space(space: &Subspace, left: bool) -> Subspace {
    let t = space.ambient / 2;
    let m = space.modulus();
    let axis: Vec<GfVector> = (0..t).map(|i| unit(2 * t, if left { i } else { t + i })).collect();
    let axis = Subspace::span(&axis, 2 * t, m);
    let inter = space.intersect(&axis).expect("same ambient");
    let range = if left { 0..t } else { t..2 * t };
    Subspace::span(&project(&inter, range), t, m)
}

fn lex_least_in_coset(x: &[u32], sub: &Subspace) -> GfVector {
    let d = sub.d;
    sub.elements()
        .into_iter()
        .map(|e| x.iter().zip(&e).map(|(a, b)| (a + b) % d).collect::<GfVector>())
        .min()
        .expect("nonempty")
}

pub fn defect_decompose(space: &Subspace) -> DefectData {
    let t = space.ambient / 2;
    let t_ld = defect_space(space, true);
    let t_rd = defect_space(space, false);
    let mut by_y: HashMap<GfVector, GfVector> = HashMap::new();
    for v in space.elements() {
        by_y.entry(t_rd.reduce(&v[t..])).or_insert_with(|| v[..t].to_vec());
    }
    let rd_perp = t_rd.complement(BilinearForm::Dot).expect("dot form");
    let j = rd_perp
        .coset_reps(&t_rd)
        .expect("defect space is isotropic")
        .into_iter()
        .map(|y| {
            let x = by_y.get(&t_rd.reduce(&y)).expect("right projection is T_RD^⊥");
            let x = lex_least_in_coset(x, &t_ld);
            (y, x)
        })
        .collect();
    DefectData { t_ld, t_rd, j }
}

pub fn reconstruct(defect: &DefectData) -> Subspace {
    let t = defect.t_ld.ambient;
    let m = defect.t_ld.modulus();
    let mut rows: Vec<GfVector> = defect.j.iter().map(|(y, x)| x.iter().chain(y).copied().collect()).collect();
    rows.extend(defect.t_ld.basis.iter().map(|z| z.iter().copied().chain(vec![0; t]).collect()));
    rows.extend(defect.t_rd.basis.iter().map(|w| vec![0; t].into_iter().chain(w.iter().copied()).collect()));
    rref_reduced(rows, 2 * t, m)
}

fn check_css_space(n_space: &Subspace) -> Result<()> {
    if !is_totally_isotropic(n_space, QuadraticForm::Dot) {
        return Err(Error::InvalidInput("N is not totally isotropic".into()));
    }
    let one = ones(n_space.ambient);
    if n_space.basis.iter().any(|b| BilinearForm::Dot.eval(b, &one, n_space.modulus()) != 0) {
        return Err(Error::InvalidInput("N is not orthogonal to the all-ones vector".into()));
    }
    Ok(())
}

/// `T = {(v + z, v) : v ∈ N^⊥, z ∈ N}`.
pub fn css_t(n_space: &Subspace) -> Result<StochasticLagrangian> {
    check_css_space(n_space)?;
    let t = n_space.ambient;
    let m = n_space.modulus();
    let perp = n_space.complement(BilinearForm::Dot)?;
    let mut rows: Vec<GfVector> = perp.basis.iter().map(|v| v.iter().chain(v).copied().collect()).collect();
    rows.extend(n_space.basis.iter().map(|z| z.iter().copied().chain(vec![0; t]).collect()));
    StochasticLagrangian::new(rref_reduced(rows, 2 * t, m))
}

/// `|N|^{-2} Σ_{p,q∈N} Z_p X_q` on `(C^d)^{⊗t}`.
pub fn css_projector(n_space: &Subspace) -> Result<Operator> {
    check_css_space(n_space)?;
    let t = n_space.ambient;
    let d = n_space.d;
    let dim = check_dim((d as u128).pow(t as u32))?;
    let elems = n_space.elements();
    let card = elems.len() as f64;
    let du = d as usize;
    let mut out = Operator::zeros(dim);
    for col in 0..dim {
        let x: Vec<u32> = digits(col, du, t).into_iter().map(|a| a as u32).collect();
        for q in &elems {
            let shifted: Vec<usize> = x.iter().zip(q).map(|(a, b)| ((a + b) % d) as usize).collect();
            let row = from_digits(&shifted, du);
            let shifted: Vec<u32> = shifted.iter().map(|&a| a as u32).collect();
            let mut amp = C::new(0.0, 0.0);
            for p in &elems {
                let e = BilinearForm::Dot.eval_int(p, &shifted);
                amp += crate::scalar::root_of_unity::<f64>(e, d as i64);
            }
            out.mat[(row, col)] += amp / (card * card);
        }
    }
    Ok(out)
}

/// `O T O' = {(Ox, O'ᵀ y) : (x, y) ∈ T}`.
pub fn left_right_act(
    left: &StochasticIsometry,
    t: &StochasticLagrangian,
    right: &StochasticIsometry,
) -> StochasticLagrangian {
    let tt = t.t;
    let rt = right.transpose();
    StochasticLagrangian::unchecked(t.space.map(2 * tt, |v| {
        let mut out = left.apply(&v[..tt]);
        out.extend(rt.apply(&v[tt..]));
        out
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleCoset {
    /// Index into the enumeration of `Σ_{t,t}(d)` of the lex-least member.
    pub representative: usize,
    pub members: Vec<usize>,
    pub defect_dim: usize,
    pub contains_ones: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleCosetTable {
    pub t: usize,
    pub d: u32,
    pub cosets: Vec<DoubleCoset>,
}

/// Orbits of `O_t(d) × O_t(d)` acting on `Σ_{t,t}(d)` from both sides.
pub fn double_cosets(t: usize, d: u32) -> Result<DoubleCosetTable> {
    let sigma = enumerate_sigma(t, d)?;
    let group = enumerate_o(t, d)?;
    let index: HashMap<&Subspace, usize> = sigma.iter().enumerate().map(|(i, s)| (&s.space, i)).collect();
    let id = StochasticIsometry::identity(t, d)?;
    let mut seen = vec![false; sigma.len()];
    let mut cosets = Vec::new();
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for o in group.iter() {
                for img in [left_right_act(o, &sigma[i], &id), left_right_act(&id, &sigma[i], o)] {
                    let j = *index
                        .get(&img.space)
                        .ok_or_else(|| Error::Invariant("group action left Σ".into()))?;
                    if !seen[j] {
                        seen[j] = true;
                        members.push(j);
                        queue.push_back(j);
                    }
                }
            }
        }
        members.sort_unstable();
        let rep = &sigma[members[0]];
        let (defect_dim, contains_ones) = (rep.defect_dim(), rep.defect_contains_ones());
        for &mm in &members {
            if (sigma[mm].defect_dim(), sigma[mm].defect_contains_ones()) != (defect_dim, contains_ones) {
                return Err(Error::Invariant("defect invariants vary inside a double coset".into()));
            }
        }
        cosets.push(DoubleCoset { representative: members[0], members, defect_dim, contains_ones });
    }
    let mut keys: Vec<(usize, bool)> = cosets.iter().map(|c| (c.defect_dim, c.contains_ones)).collect();
    keys.sort();
    keys.dedup();
    if keys.len() != cosets.len() {
        return Err(Error::Invariant("two double cosets share their defect invariants".into()));
    }
    Ok(DoubleCosetTable { t, d, cosets })
}

#[derive(Clone, Debug)]
pub struct Composition {
    pub result: StochasticLagrangian,
    /// `r(T1) r(T2) = d^k r(T1 ∘ T2)`.
    pub k: usize,
}

/// `T1 ∘ T2 = {(x, z) : (x, y) ∈ T1, (y, z) ∈ T2}` via the integer product of `r(T1) r(T2)`.
pub fn compose(t1: &StochasticLagrangian, t2: &StochasticLagrangian) -> Result<Composition> {
    if t1.t != t2.t || t1.d != t2.d {
        return Err(Error::InvalidInput("composition needs matching (t, d)".into()));
    }
    let (t, d) = (t1.t, t1.d);
    let m = t1.modulus();
    let prod = r_relation(&t1.space).product(&r_relation(&t2.space));
    let values: HashSet<u64> = prod.values().copied().collect();
    if values.len() != 1 {
        return Err(Error::Invariant(format!("product entries are not constant: {values:?}")));
    }
    let c = *values.iter().next().unwrap();
    let k = (0..=t).find(|&k| (d as u64).pow(k as u32) == c).ok_or_else(|| {
        Error::Invariant(format!("product constant {c} is not a power of {d}"))
    })?;
    let du = d as usize;
    let support: Vec<GfVector> = prod
        .keys()
        .map(|&(r, c)| digits(r, du, t).into_iter().chain(digits(c, du, t)).map(|a| a as u32).collect())
        .collect();
    let space = Subspace::span(&support, 2 * t, m);
    if space.cardinality() != support.len() as u128 {
        return Err(Error::Invariant("support of the product is not a subspace".into()));
    }
    let result = StochasticLagrangian::new(space)
        .map_err(|e| Error::Invariant(format!("support of the product is not in Σ: {e}")))?;
    let expected_k = intersection_dim(&t1.defect().t_rd, &t2.defect().t_ld);
    if expected_k != k {
        return Err(Error::Invariant(format!("constant d^{k} but defect overlap has dimension {expected_k}")));
    }
    Ok(Composition { result, k })
}

/// Relational composition computed with subspaces of `Z_d^{3t}`.
pub fn compose_algebraic(t1: &StochasticLagrangian, t2: &StochasticLagrangian) -> Result<Subspace> {
    let t = t1.t;
    let m = t1.modulus();
    let pad = |pre: usize, v: &[u32], post: usize| -> GfVector {
        std::iter::repeat_n(0, pre).chain(v.iter().copied()).chain(std::iter::repeat_n(0, post)).collect()
    };
    let mut a: Vec<GfVector> = t1.space.basis.iter().map(|b| pad(0, b, t)).collect();
    a.extend((0..t).map(|i| unit(3 * t, 2 * t + i)));
    let mut b: Vec<GfVector> = t2.space.basis.iter().map(|v| pad(t, v, 0)).collect();
    b.extend((0..t).map(|i| unit(3 * t, i)));
    let a = Subspace::span(&a, 3 * t, m);
    let b = Subspace::span(&b, 3 * t, m);
    let inter = a.intersect(&b)?;
    let rows: Vec<GfVector> =
        inter.basis.iter().map(|v| v[..t].iter().chain(&v[2 * t..]).copied().collect()).collect();
    Ok(rref_reduced(rows, 2 * t, m))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AntiKind {
    /// `11ᵀ - π` for `d = 2`, `t ≡ 2 mod 4`.
    Complement,
    /// `2t⁻¹ 11ᵀ - π` for odd `d ∤ t`.
    AllOnes,
    /// `π - σ s⁻¹ p pᵀ` with `t = 2s`, `p ∈ {±1}^t` balanced and `πp = σp`.
    Parity { p: Vec<i64> },
}

pub fn anti_permutation(pi: &[usize], d: u32, kind: &AntiKind) -> Result<StochasticIsometry> {
    let t = pi.len();
    let m = Modulus::new(d)?;
    let perm = StochasticIsometry::permutation(pi, d)?;
    let entry = |i: usize, j: usize| perm.o[i][j] as i64;
    let o: Vec<Vec<u32>> = match kind {
        AntiKind::Complement => {
            if d != 2 || t % 4 != 2 {
                return Err(Error::InvalidInput(format!("complement needs d = 2 and t ≡ 2 mod 4, got d={d}, t={t}")));
            }
            (0..t).map(|i| (0..t).map(|j| m.reduce(1 - entry(i, j))).collect()).collect()
        }
        AntiKind::AllOnes => {
            if d == 2 || (t as u32).is_multiple_of(d) {
                return Err(Error::InvalidInput(format!("all-ones variant needs odd d not dividing t, got d={d}, t={t}")));
            }
            let c = 2 * m.inv(m.reduce(t as i64)) as i64;
            (0..t).map(|i| (0..t).map(|j| m.reduce(c - entry(i, j))).collect()).collect()
        }
        AntiKind::Parity { p } => {
            if p.len() != t || !t.is_multiple_of(2) || p.iter().any(|&x| x != 1 && x != -1) || p.iter().sum::<i64>() != 0 {
                return Err(Error::InvalidInput("p must be a balanced ±1 vector of length t".into()));
            }
            let s = (t / 2) as i64;
            if s % d as i64 == 0 {
                return Err(Error::InvalidInput(format!("t/2 = {s} is not invertible mod {d}")));
            }
            let pip: Vec<i64> = (0..t).map(|i| (0..t).map(|j| entry(i, j) * p[j]).sum()).collect();
            let sigma = if pip.iter().zip(p).all(|(a, b)| m.reduce(a - b) == 0) {
                1
            } else if pip.iter().zip(p).all(|(a, b)| m.reduce(a + b) == 0) {
                -1
            } else {
                return Err(Error::InvalidInput("π does not fix p up to sign".into()));
            };
            let sinv = m.inv(m.reduce(s)) as i64;
            (0..t).map(|i| (0..t).map(|j| m.reduce(entry(i, j) - sigma * sinv * p[i] * p[j])).collect()).collect()
        }
    };
    StochasticIsometry::new(o, d)
        .map_err(|_| Error::Invariant("constructed matrix failed the membership check".into()))
}

/// `|O_t|⁻¹ Σ_O R(O)` on `(C^{d^n})^{⊗t}`.
pub fn minimal_projector(t: usize, n: usize, d: u32) -> Result<Operator> {
    let group = enumerate_o(t, d)?;
    let dim = check_dim((d as u128).pow((t * n) as u32))?;
    let mut out = Operator::zeros(dim);
    let w = 1.0 / group.len() as f64;
    for o in group.iter() {
        for (r, c) in big_r_relation(&o.lagrangian().space, n)?.entries {
            out.mat[(r, c)] += C::new(w, 0.0);
        }
    }
    Ok(out)
}

/// Trace of `P` compressed to the symmetric and antisymmetric subspaces of
/// three qutrit copies, with `P = 3^{-n} R(T)` for the CSS subspace built
/// from `N = span{1_3}`. Returns `(symmetric, antisymmetric)`.
pub fn qutrit_irrep_dimensions(n: usize) -> Result<(f64, f64)> {
    let m = Modulus::new(3)?;
    let t_css = css_t(&Subspace::span(&[ones(3)], 3, m))?;
    let elems: HashSet<GfVector> = t_css.space.elements().into_iter().collect();
    let perms = [[0, 1, 2], [1, 2, 0], [2, 0, 1], [1, 0, 2], [0, 2, 1], [2, 1, 0]];
    let signs = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
    let (mut sym, mut alt) = (0.0, 0.0);
    for (pi, s) in perms.iter().zip(signs) {
        // tr[r(T) r(T_π)] = #{(x, y) ∈ T : (y, x) ∈ T_π}
        let tp = StochasticIsometry::permutation(pi, 3)?.lagrangian();
        let count = tp
            .space
            .elements()
            .iter()
            .filter(|v| {
                let swapped: GfVector = v[3..].iter().chain(&v[..3]).copied().collect();
                elems.contains(&swapped)
            })
            .count() as f64;
        let tr = count.powi(n as i32);
        sym += tr;
        alt += s * tr;
    }
    let scale = 3f64.powi(-(n as i32)) / 6.0;
    Ok((sym * scale, alt * scale))
}

/// One JSON record per line.
pub fn sigma_to_jsonl(sigma: &[StochasticLagrangian]) -> String {
    #[derive(Serialize)]
    struct Record<'a> {
        t: usize,
        d: u32,
        basis: &'a [GfVector],
        diagonal_dim: usize,
        defect_dim: usize,
        defect_contains_ones: bool,
    }
    let mut out = String::new();
    for s in sigma {
        let rec = Record {
            t: s.t,
            d: s.d,
            basis: &s.space.basis,
            diagonal_dim: s.diagonal_dim(),
            defect_dim: s.defect_dim(),
            defect_contains_ones: s.defect_contains_ones(),
        };
        out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Permutations of `0..t` in lexicographic order.
pub fn permutations(t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..t).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..t).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..t).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(d: u32) -> Modulus {
        Modulus::new(d).unwrap()
    }

    #[test]
    fn sigma_sizes_small() {
        assert_eq!(enumerate_sigma(3, 3).unwrap().len(), 8);
        assert_eq!(enumerate_sigma(4, 2).unwrap().len(), 30);
        assert_eq!(enumerate_sigma(1, 5).unwrap().len(), 1);
        assert_eq!(enumerate_sigma(2, 3).unwrap().len(), 2);
        assert!(enumerate_sigma(7, 2).is_err());
        assert!(enumerate_sigma(3, 7).is_err());
    }

    #[test]
    fn sigma_matches_bruteforce() {
        for (t, d) in [(2, 2), (3, 2), (2, 3), (3, 3), (4, 2)] {
            let fast: Vec<Subspace> = enumerate_sigma(t, d).unwrap().iter().map(|s| s.space.clone()).collect();
            let slow: Vec<Subspace> =
                enumerate_sigma_bruteforce(t, d).unwrap().iter().map(|s| s.space.clone()).collect();
            assert_eq!(fast, slow, "(t, d) = ({t}, {d})");
        }
    }

    #[test]
    fn o_small_groups() {
        let o23 = enumerate_o(2, 3).unwrap();
        assert_eq!(o23.len(), 2);
        assert!(o23.iter().all(|o| o.is_permutation()));
        let o42 = enumerate_o(4, 2).unwrap();
        assert_eq!(o42.len(), 24);
        let o62 = enumerate_o(6, 2).unwrap();
        let perms = o62.iter().filter(|o| o.is_permutation()).count();
        assert_eq!(perms, 720);
        let set: HashSet<&StochasticIsometry> = o62.iter().collect();
        for a in o62.iter().take(40) {
            assert!(set.contains(&a.transpose()));
            for b in o62.iter().step_by(97) {
                assert!(set.contains(&a.mul(b)));
            }
        }
    }

    #[test]
    fn relation_basics() {
        let delta = StochasticLagrangian::diagonal(3, 2).unwrap();
        assert_eq!(r_of_t(&delta).unwrap(), Operator::identity(8));
        let t = &enumerate_sigma(3, 3).unwrap()[0];
        let r = r_relation(&t.space);
        assert_eq!(r.entries.len(), 27);
        assert_eq!(r.trace(), 3usize.pow(t.diagonal_dim() as u32));
        let big = big_r_relation(&t.space, 2).unwrap();
        assert_eq!(big.trace(), 3usize.pow(2 * t.diagonal_dim() as u32));
    }

    #[test]
    fn permutation_operator_permutes_copies() {
        // π = (0 1 2) moves copy j to slot π(j)
        let pi = [1, 2, 0];
        let tp = StochasticIsometry::permutation(&pi, 2).unwrap().lagrangian();
        let r = big_r_relation(&tp.space, 2).unwrap();
        for (row, col) in r.entries {
            let c = digits(col, 4, 3);
            let rr = digits(row, 4, 3);
            for j in 0..3 {
                assert_eq!(rr[pi[j]], c[j]);
            }
        }
    }

    #[test]
    fn trace_sum() {
        let total: usize =
            enumerate_sigma(4, 2).unwrap().iter().map(|t| r_relation(&t.space).trace()).sum();
        assert_eq!(total, 144);
    }

    #[test]
    fn gram_is_trace_overlap() {
        for (t, d) in [(3, 3), (4, 2)] {
            let sigma = enumerate_sigma(t, d).unwrap();
            let rels: Vec<Relation> = sigma.iter().map(|s| r_relation(&s.space)).collect();
            let g = gram_matrix(&sigma, 1);
            for i in 0..sigma.len() {
                for j in 0..sigma.len() {
                    assert_eq!(BigInt::from(rels[i].overlap(&rels[j])), g[i][j]);
                }
            }
        }
    }

    #[test]
    fn commutant_small() {
        for (t, d) in [(2, 2), (3, 3), (4, 2)] {
            for s in enumerate_sigma(t, d).unwrap().iter() {
                let rep = commutes_with_clifford(&s.space, 2).unwrap();
                assert!(rep.max() < 1e-9, "{rep:?}");
            }
        }
    }

    #[test]
    fn non_isotropic_fails() {
        // (1,0 | 0,0) has q = 1, so the span with 1_4 is not isotropic
        let bad = Subspace::span(&[vec![1, 1, 1, 1], vec![1, 0, 0, 0]], 4, m(2));
        assert!(StochasticLagrangian::new(bad.clone()).is_err());
        assert!(commutes_with_clifford(&bad, 2).unwrap().max() > 1e-3);
        let bad3 = Subspace::span(&[vec![1, 1, 1, 1, 1, 1], vec![1, 0, 0, 0, 0, 0], vec![0, 1, 0, 0, 0, 0]], 6, m(3));
        assert!(commutes_with_clifford(&bad3, 1).unwrap().max() > 1e-3);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(linear_independence_check(4, 2, 3).unwrap().rank, 30);
        assert_eq!(linear_independence_check(3, 3, 2).unwrap().rank, 8);
        assert!(linear_independence_check(4, 2, 1).unwrap().rank < 30);
        let big = vec![vec![BigInt::from(2), BigInt::from(4)], vec![BigInt::from(1), BigInt::from(2)]];
        assert_eq!(bigint_rank(big), 1);
    }

    #[test]
    fn defect_round_trip() {
        for (t, d) in [(3, 3), (4, 2), (4, 3)] {
            for s in enumerate_sigma(t, d).unwrap().iter() {
                let def = s.defect();
                assert_eq!(reconstruct(def), s.space);
                assert_eq!(def.t_ld.dim(), def.t_rd.dim());
                let one = ones(t);
                assert_eq!(def.t_ld.contains(&one), def.t_rd.contains(&one));
                let r = r_of_t(s).unwrap();
                let rank = crate::dense::hermitian_rank(&r.mul(&r.adjoint()), 1e-8);
                assert_eq!(rank, (d as usize).pow((t - 2 * def.t_ld.dim()) as u32));
            }
        }
    }

    #[test]
    fn isometry_defects_are_trivial() {
        for o in enumerate_o(4, 2).unwrap().iter() {
            let t = o.lagrangian();
            assert_eq!(t.defect_dim(), 0);
            assert_eq!(t.as_isometry().unwrap(), *o);
        }
    }

    #[test]
    fn css_cases() {
        let id = css_projector(&Subspace::zero(3, m(2))).unwrap();
        assert!(id.sub(&Operator::identity(8)).max_abs() < 1e-12);

        let n2 = Subspace::span(&[ones(4)], 4, m(2));
        let p = css_projector(&n2).unwrap();
        assert!(p.mul(&p).sub(&p).max_abs() < 1e-12);
        assert!(p.is_hermitian(1e-12));
        assert_eq!(crate::dense::hermitian_rank(&p, 1e-8), 4);
        let t = css_t(&n2).unwrap();
        assert_eq!(t.defect().t_ld, n2);
        let r = r_of_t(&t).unwrap().scale(C::new(0.5, 0.0));
        assert!(p.sub(&r).max_abs() < 1e-12);

        let n3 = Subspace::span(&[ones(3)], 3, m(3));
        let p3 = css_projector(&n3).unwrap();
        let r3 = r_of_t(&css_t(&n3).unwrap()).unwrap().scale(C::new(1.0 / 3.0, 0.0));
        assert!(p3.sub(&r3).max_abs() < 1e-12);
        assert!(css_projector(&Subspace::span(&[vec![1, 0, 0]], 3, m(3))).is_err());
    }

    #[test]
    fn actions() {
        let sigma = enumerate_sigma(3, 3).unwrap();
        let id = StochasticIsometry::identity(3, 3).unwrap();
        let group = enumerate_o(3, 3).unwrap();
        for s in sigma.iter() {
            assert_eq!(left_right_act(&id, s, &id), *s);
            for a in group.iter() {
                for b in group.iter() {
                    let img = left_right_act(a, s, b);
                    let lhs = r_of_t(&a.lagrangian())
                        .unwrap()
                        .mul(&r_of_t(s).unwrap())
                        .mul(&r_of_t(&b.lagrangian()).unwrap());
                    assert!(lhs.sub(&r_of_t(&img).unwrap()).max_abs() < 1e-9);
                }
            }
        }
        let pi = StochasticIsometry::permutation(&[2, 0, 1], 3).unwrap();
        let delta = StochasticLagrangian::diagonal(3, 3).unwrap();
        assert_eq!(left_right_act(&pi, &delta, &id), pi.lagrangian());

        let css = &css_t(&Subspace::span(&[ones(3)], 3, m(3))).unwrap();
        let orbit: HashSet<Subspace> = permutations(3)
            .iter()
            .flat_map(|a| {
                let pa = StochasticIsometry::permutation(a, 3).unwrap();
                permutations(3)
                    .into_iter()
                    .map(move |b| left_right_act(&pa, css, &StochasticIsometry::permutation(&b, 3).unwrap()).space)
            })
            .collect();
        assert_eq!(orbit.len(), 2);
    }

    #[test]
    fn coset_tables() {
        let sizes = |t, d| {
            let mut v: Vec<usize> = double_cosets(t, d).unwrap().cosets.iter().map(|c| c.members.len()).collect();
            v.sort();
            v
        };
        assert_eq!(sizes(3, 3), vec![2, 6]);
        assert_eq!(sizes(4, 2), vec![6, 24]);
        // O_4(3) also holds the 24 anti-permutations, which join the permutations
        assert_eq!(enumerate_o(4, 3).unwrap().len(), 48);
        assert_eq!(sizes(4, 3), vec![32, 48]);
    }

    #[test]
    fn composition() {
        let sigma = enumerate_sigma(3, 3).unwrap();
        let delta = StochasticLagrangian::diagonal(3, 3).unwrap();
        for s in sigma.iter() {
            let c = compose(&delta, s).unwrap();
            assert_eq!((c.result.space.clone(), c.k), (s.space.clone(), 0));
        }
        let css = css_t(&Subspace::span(&[ones(3)], 3, m(3))).unwrap();
        let c = compose(&css, &css).unwrap();
        assert_eq!(c.k, 1);
        assert_eq!(c.result, css);
        for a in sigma.iter() {
            for b in sigma.iter() {
                assert_eq!(compose(a, b).unwrap().result.space, compose_algebraic(a, b).unwrap());
            }
        }
    }

    #[test]
    fn anti_permutations() {
        let id6: Vec<usize> = (0..6).collect();
        let anti = anti_permutation(&id6, 2, &AntiKind::Complement).unwrap();
        assert!(anti.o.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &x)| x == (i != j) as u32)));
        let parity = anti_permutation(&id6, 2, &AntiKind::Parity { p: vec![-1, 1, -1, 1, -1, 1] }).unwrap();
        assert_eq!(parity, anti);

        let q = anti_permutation(&[0, 1, 2, 3], 3, &AntiKind::AllOnes).unwrap();
        // 2·4⁻¹ = 2 mod 3: diagonal 1, off-diagonal 2
        assert!(q.o.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &x)| x == if i == j { 1 } else { 2 })));

        assert!(anti_permutation(&[0, 1, 2, 3], 2, &AntiKind::Complement).is_err());
        assert!(anti_permutation(&[0, 1, 2], 3, &AntiKind::AllOnes).is_err());
        let swapped = anti_permutation(&[1, 0, 3, 2], 5, &AntiKind::Parity { p: vec![1, -1, 1, -1] }).unwrap();
        assert!(is_member_o(&swapped.o, 4, 5));
    }

    #[test]
    fn icosahedron() {
        // vertices: 0 top, 1..=5 upper ring, 6..=10 lower ring, 11 bottom
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
        assert!(a.iter().all(|r| r.iter().sum::<u32>() == 5));
        assert!(is_member_o(&a, 12, 2));
        let comp: Vec<Vec<u32>> = a.iter().map(|r| r.iter().map(|&x| 1 - x).collect()).collect();
        assert!(!is_member_o(&comp, 12, 2));
    }

    #[test]
    fn minimal_projector_small() {
        let p1 = minimal_projector(1, 1, 2).unwrap();
        assert!(p1.sub(&Operator::identity(2)).max_abs() < 1e-12);
        let p = minimal_projector(2, 1, 2).unwrap();
        assert!(p.mul(&p).sub(&p).max_abs() < 1e-12);
        assert_eq!(crate::dense::hermitian_rank(&p, 1e-8), 3);
    }

    #[test]
    fn qutrit_dims() {
        let (s, a) = qutrit_irrep_dimensions(2).unwrap();
        assert!((s - 5.0).abs() < 1e-12 && (a - 4.0).abs() < 1e-12, "{s} {a}");
        let (s1, a1) = qutrit_irrep_dimensions(1).unwrap();
        assert!((s1 - 2.0).abs() < 1e-12 && (a1 - 1.0).abs() < 1e-12, "{s1} {a1}");
    }

    #[test]
    fn jsonl_records() {
        let out = sigma_to_jsonl(&enumerate_sigma(3, 3).unwrap());
        assert_eq!(out.lines().count(), 8);
        let first: serde_json::Value = serde_json::from_str(out.lines().next().unwrap()).unwrap();
        assert_eq!(first["t"], 3);
    }
}
