//! Clifford generators, their symplectic action on Weyl operators, and
//! seeded random Clifford words.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{check_dim, digits, from_digits, DenseOperator};
use crate::error::{Error, Result};
use crate::gf_linalg::{for_each_tuple, Modulus};
use crate::phase_space::{all_points, point_index, symplectic, weyl_monomial, Monomial};
use crate::scalar::{root_of_unity, C};

pub type Operator = DenseOperator<f64>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    /// `H|a⟩ = d^{-1/2} Σ_b ω^{ab} |b⟩` on one qudit.
    Fourier(usize),
    /// `diag(i^{a²})` for qubits, `diag(ω^{a(a-1)/2})` for odd `d`.
    Phase(usize),
    /// `|a, b⟩ ↦ |a, a + b⟩` with control first.
    Cadd(usize, usize),
    /// A Weyl operator on all qudits.
    Weyl(Vec<u32>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliffordWord {
    pub n: usize,
    pub d: u32,
    pub letters: Vec<Gate>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymplecticMatrix {
    pub n: usize,
    pub d: u32,
    /// `2n × 2n`, row-major; column `j` is the image of the `j`-th unit vector.
    pub gamma: Vec<Vec<u32>>,
}

impl SymplecticMatrix {
    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        let d = self.d as u64;
        self.gamma
            .iter()
            .map(|row| (row.iter().zip(x).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % d) as u32)
            .collect()
    }

    /// `Γᵀ J Γ = J`, checked as `[Γ e_i, Γ e_j] = [e_i, e_j]` mod `d`.
    pub fn is_symplectic(&self) -> bool {
        let m = 2 * self.n;
        let unit = |i: usize| {
            let mut v = vec![0u32; m];
            v[i] = 1;
            v
        };
        (0..m).all(|i| {
            (0..m).all(|j| {
                let lhs = symplectic(&self.apply(&unit(i)), &self.apply(&unit(j)));
                (lhs - symplectic(&unit(i), &unit(j))).rem_euclid(self.d as i64) == 0
            })
        })
    }

    pub fn det_2x2(&self) -> u32 {
        let g = &self.gamma;
        let d = self.d as i64;
        ((g[0][0] as i64 * g[1][1] as i64 - g[0][1] as i64 * g[1][0] as i64).rem_euclid(d)) as u32
    }
}

/// Monomial form of every generator except the Fourier gate.
pub fn gate_monomial(gate: &Gate, n: usize, d: u32) -> Option<Monomial<f64>> {
    let dim = (d as usize).pow(n as u32);
    let du = d as usize;
    match gate {
        Gate::Phase(i) => {
            let half = if d == 2 { 0 } else { Modulus::new(d).ok()?.inv(2) as i64 };
            let phase = (0..dim)
                .map(|j| {
                    let a = digits(j, du, n)[*i] as i64;
                    if d == 2 {
                        root_of_unity(a * a, 4)
                    } else {
                        root_of_unity(half * a * (a - 1), d as i64)
                    }
                })
                .collect();
            Some(Monomial { perm: (0..dim).collect(), phase })
        }
        Gate::Cadd(c, t) => {
            let perm = (0..dim)
                .map(|j| {
                    let mut ds = digits(j, du, n);
                    ds[*t] = (ds[*t] + ds[*c]) % du;
                    from_digits(&ds, du)
                })
                .collect();
            Some(Monomial { perm, phase: vec![C::new(1.0, 0.0); dim] })
        }
        Gate::Weyl(x) => Some(weyl_monomial(d, x)),
        Gate::Fourier(_) => None,
    }
}

fn check_gate(gate: &Gate, n: usize, d: u32) -> Result<()> {
    let ok = match gate {
        Gate::Fourier(i) | Gate::Phase(i) => *i < n,
        Gate::Cadd(c, t) => *c < n && *t < n && c != t,
        Gate::Weyl(x) => x.len() == 2 * n && x.iter().all(|&v| v < d),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("gate {gate:?} does not fit n={n}, d={d}")))
    }
}

/// Dense matrix of a generator acting on `n` qudits.
pub fn gate_matrix(gate: &Gate, n: usize, d: u32) -> Result<Operator> {
    check_gate(gate, n, d)?;
    let dim = check_dim((d as u128).pow(n as u32))?;
    if let Some(m) = gate_monomial(gate, n, d) {
        return Ok(m.to_dense());
    }
    let Gate::Fourier(i) = gate else { unreachable!() };
    let du = d as usize;
    let s = 1.0 / (d as f64).sqrt();
    Ok(Operator::from_fn(dim, |r, c| {
        let (dr, dc) = (digits(r, du, n), digits(c, du, n));
        if (0..n).any(|k| k != *i && dr[k] != dc[k]) {
            return C::new(0.0, 0.0);
        }
        root_of_unity::<f64>((dr[*i] * dc[*i]) as i64, d as i64) * s
    }))
}

/// Single-qudit Fourier matrix `d^{-1/2} [ω^{ab}]`.
pub fn fourier(d: u32) -> Operator {
    gate_matrix(&Gate::Fourier(0), 1, d).expect("single qudit fits")
}

impl CliffordWord {
    pub fn identity(n: usize, d: u32) -> Self {
        Self { n, d, letters: Vec::new() }
    }

    /// `L_k ⋯ L_1` where `L_1` is the first letter.
    pub fn to_operator(&self) -> Result<Operator> {
        let dim = check_dim((self.d as u128).pow(self.n as u32))?;
        let mut u = Operator::identity(dim);
        for g in &self.letters {
            u = gate_matrix(g, self.n, self.d)?.mul(&u);
        }
        Ok(u)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&WordJson::from(self)).expect("word serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: WordJson = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let letters = raw
            .letters
            .iter()
            .map(|l| {
                let a = &l.args;
                let gate = match (l.gate.as_str(), a.len()) {
                    ("F", 1) => Gate::Fourier(a[0] as usize),
                    ("P", 1) => Gate::Phase(a[0] as usize),
                    ("CADD", 2) => Gate::Cadd(a[0] as usize, a[1] as usize),
                    ("W", _) => Gate::Weyl(a.clone()),
                    _ => return Err(Error::InvalidInput(format!("unknown letter {} / {:?}", l.gate, a))),
                };
                check_gate(&gate, raw.n, raw.d)?;
                Ok(gate)
            })
            .collect::<Result<_>>()?;
        Ok(Self { n: raw.n, d: raw.d, letters })
    }
}

#[derive(Serialize, Deserialize)]
struct LetterJson {
    gate: String,
    args: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct WordJson {
    n: usize,
    d: u32,
    letters: Vec<LetterJson>,
}

impl From<&CliffordWord> for WordJson {
    fn from(w: &CliffordWord) -> Self {
        let letters = w
            .letters
            .iter()
            .map(|g| match g {
                Gate::Fourier(i) => LetterJson { gate: "F".into(), args: vec![*i as u32] },
                Gate::Phase(i) => LetterJson { gate: "P".into(), args: vec![*i as u32] },
                Gate::Cadd(c, t) => LetterJson { gate: "CADD".into(), args: vec![*c as u32, *t as u32] },
                Gate::Weyl(x) => LetterJson { gate: "W".into(), args: x.clone() },
            })
            .collect();
        WordJson { n: w.n, d: w.d, letters }
    }
}

/// Result of conjugating every Weyl operator by a Clifford unitary:
/// `U W_x U† = phases[x] · W_{Γx}`.
#[derive(Clone, Debug)]
pub struct ConjugationTable {
    pub gamma: SymplecticMatrix,
    pub images: Vec<Vec<u32>>,
    pub phases: Vec<C<f64>>,
}

/// Match each `U W_x U†` against the Weyl basis and extract `Γ` and the phases.
pub fn conjugate_weyl_check(u: &Operator, n: usize, d: u32) -> Result<ConjugationTable> {
    let dim = (d as usize).pow(n as u32);
    if u.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: u.dim() });
    }
    let pts = all_points(n, d);
    let weyls: Vec<Monomial<f64>> = pts.iter().map(|x| weyl_monomial(d, x)).collect();
    let ud = u.adjoint();
    let mut images = Vec::with_capacity(pts.len());
    let mut phases = Vec::with_capacity(pts.len());
    for (x, wx) in pts.iter().zip(&weyls) {
        let conj = u.mul(&wx.to_dense()).mul(&ud);
        let mut hits = weyls
            .iter()
            .enumerate()
            .map(|(k, w)| (k, w.hs_inner(&conj) / dim as f64))
            .filter(|(_, c)| (c.norm() - 1.0).abs() < 1e-8);
        let Some((k, phase)) = hits.next() else {
            return Err(Error::NotClifford(format!("no Weyl operator matches U W_x U† for x = {x:?}")));
        };
        if hits.next().is_some() {
            return Err(Error::Invariant(format!("ambiguous Weyl match for x = {x:?}")));
        }
        images.push(pts[k].clone());
        phases.push(phase);
    }
    let m = 2 * n;
    let columns: Vec<Vec<u32>> = (0..m)
        .map(|j| {
            let mut e = vec![0u32; m];
            e[j] = 1;
            images[point_index(&e, d)].clone()
        })
        .collect();
    let gamma = SymplecticMatrix { n, d, gamma: (0..m).map(|i| (0..m).map(|j| columns[j][i]).collect()).collect() };
    for (x, img) in pts.iter().zip(&images) {
        if gamma.apply(x) != *img {
            return Err(Error::NotClifford(format!("conjugation action is not linear at x = {x:?}")));
        }
    }
    if !gamma.is_symplectic() {
        return Err(Error::NotClifford("conjugation action is not symplectic".into()));
    }
    Ok(ConjugationTable { gamma, images, phases })
}

impl ConjugationTable {
    /// A `z` with `phases[x] = ω^{[z, Γx]}` for all `x`, if one exists.
    pub fn character_witness(&self) -> Option<Vec<u32>> {
        let (n, d) = (self.gamma.n, self.gamma.d);
        all_points(n, d).into_iter().find(|z| {
            self.images.iter().zip(&self.phases).all(|(img, ph)| {
                (root_of_unity::<f64>(symplectic(z, img), d as i64) - ph).norm() < 1e-8
            })
        })
    }
}

/// A uniformly random letter.
pub fn random_gate<G: Rng + ?Sized>(n: usize, d: u32, rng: &mut G) -> Gate {
    let kinds = if n >= 2 { 4 } else { 3 };
    match rng.gen_range(0..kinds) {
        0 => Gate::Fourier(rng.gen_range(0..n)),
        1 => Gate::Phase(rng.gen_range(0..n)),
        2 => Gate::Weyl((0..2 * n).map(|_| rng.gen_range(0..d)).collect()),
        _ => {
            let c = rng.gen_range(0..n);
            let t = (c + rng.gen_range(1..n)) % n;
            Gate::Cadd(c, t)
        }
    }
}

/// Word of i.i.d. letters and its operator. Not uniform over the Clifford group.
pub fn random_clifford<G: Rng + ?Sized>(n: usize, d: u32, length: usize, rng: &mut G) -> Result<(CliffordWord, Operator)> {
    check_dim((d as u128).pow(n as u32))?;
    let word = CliffordWord { n, d, letters: (0..length).map(|_| random_gate(n, d, rng)).collect() };
    let u = word.to_operator()?;
    Ok((word, u))
}

/// All of `Sp(2, d) = SL(2, d)`.
pub fn enumerate_sp(n: usize, d: u32) -> Result<Vec<SymplecticMatrix>> {
    if n != 1 {
        return Err(Error::Infeasible(format!("symplectic enumeration only for n = 1, got {n}")));
    }
    Modulus::new(d)?;
    let mut out = Vec::new();
    for_each_tuple(4, d, |e| {
        let g = SymplecticMatrix { n: 1, d, gamma: vec![vec![e[0], e[1]], vec![e[2], e[3]]] };
        if g.det_2x2() == 1 {
            out.push(g);
        }
    });
    Ok(out)
}

/// Orbits of `Sp(2, d)` acting diagonally on `(Z_d^2)^{t-1}`.
pub fn sp_orbit_count(n: usize, d: u32, t: usize) -> Result<usize> {
    let group = enumerate_sp(n, d)?;
    let k = t.saturating_sub(1);
    let size = (d as u128).pow(2 * k as u32);
    if size > 10_000_000 {
        return Err(Error::CapExceeded { requested: size, cap: 10_000_000 });
    }
    let size = size as usize;
    let mut parent: Vec<usize> = (0..size).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let du = d as usize;
    for idx in 0..size {
        let ds: Vec<u32> = digits(idx, du, 2 * k).into_iter().map(|v| v as u32).collect();
        for g in &group {
            let img: Vec<usize> = ds.chunks(2).flat_map(|c| g.apply(c)).map(|v| v as usize).collect();
            let j = from_digits(&img, du);
            let (a, b) = (find(&mut parent, idx), find(&mut parent, j));
            parent[a] = b;
        }
    }
    Ok((0..size).filter(|&i| find(&mut parent, i) == i).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qubit_gates() {
        let h = fourier(2);
        let s = 0.5f64.sqrt();
        let expect = [[s, s], [s, -s]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((h.mat[(i, j)] - C::new(expect[i][j], 0.0)).norm() < 1e-15);
            }
        }
        let p = gate_matrix(&Gate::Phase(0), 1, 2).unwrap();
        assert!((p.mat[(1, 1)] - C::new(0.0, 1.0)).norm() < 1e-15);
        assert!((p.mat[(0, 0)] - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cadd_is_permutation() {
        let c = gate_matrix(&Gate::Cadd(0, 1), 2, 3).unwrap();
        for i in 0..9 {
            let ones = (0..9).filter(|&j| (c.mat[(i, j)] - C::new(1.0, 0.0)).norm() < 1e-15).count();
            let zeros = (0..9).filter(|&j| c.mat[(i, j)].norm() < 1e-15).count();
            assert_eq!((ones, zeros), (1, 8));
        }
    }

    #[test]
    fn generators_act_symplectically() {
        for d in [2u32, 3] {
            for n in 1..=2 {
                let mut gates = Vec::new();
                for i in 0..n {
                    gates.push(Gate::Fourier(i));
                    gates.push(Gate::Phase(i));
                }
                if n == 2 {
                    gates.push(Gate::Cadd(0, 1));
                    gates.push(Gate::Cadd(1, 0));
                }
                for g in gates {
                    let u = gate_matrix(&g, n, d).unwrap();
                    assert!(u.is_unitary(1e-10));
                    let table = conjugate_weyl_check(&u, n, d).unwrap();
                    assert!(table.phases.iter().all(|p| (p.norm() - 1.0).abs() < 1e-10));
                    if d % 2 == 1 {
                        assert!(table.character_witness().is_some(), "{g:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn hadamard_swaps_z_and_x() {
        let t = conjugate_weyl_check(&fourier(2), 1, 2).unwrap();
        assert_eq!(t.gamma.gamma, vec![vec![0, 1], vec![1, 0]]);
        let id = conjugate_weyl_check(&Operator::identity(3), 1, 3).unwrap();
        assert_eq!(id.gamma.gamma, vec![vec![1, 0], vec![0, 1]]);
        assert!(id.phases.iter().all(|p| (p - C::new(1.0, 0.0)).norm() < 1e-12));
    }

    #[test]
    fn non_clifford_is_rejected() {
        let t = Operator::from_fn(2, |i, j| match (i, j) {
            (0, 0) => C::new(1.0, 0.0),
            (1, 1) => C::from_polar(1.0, std::f64::consts::FRAC_PI_4),
            _ => C::new(0.0, 0.0),
        });
        assert!(matches!(conjugate_weyl_check(&t, 1, 2), Err(Error::NotClifford(_))));
    }

    #[test]
    fn random_words() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (w, u) = random_clifford(2, 3, 0, &mut rng).unwrap();
        assert!(w.letters.is_empty());
        assert_eq!(u, Operator::identity(9));
        let (w, u) = random_clifford(2, 3, 20, &mut rng).unwrap();
        assert!(u.is_unitary(1e-10));
        let table = conjugate_weyl_check(&u, 2, 3).unwrap();
        assert!(table.gamma.is_symplectic());
        assert!(table.character_witness().is_some());
        assert_eq!(CliffordWord::from_json(&w.to_json()).unwrap(), w);

        let mut a = ChaCha8Rng::seed_from_u64(99);
        let mut b = ChaCha8Rng::seed_from_u64(99);
        assert_eq!(random_clifford(1, 2, 10, &mut a).unwrap().0, random_clifford(1, 2, 10, &mut b).unwrap().0);
    }

    #[test]
    fn word_json_rejects_bad_letters() {
        assert!(CliffordWord::from_json(r#"{"n":1,"d":2,"letters":[{"gate":"CADD","args":[0,0]}]}"#).is_err());
        assert!(CliffordWord::from_json(r#"{"n":1,"d":2,"letters":[{"gate":"Q","args":[0]}]}"#).is_err());
    }

    #[test]
    fn sl2_enumeration() {
        assert_eq!(enumerate_sp(1, 2).unwrap().len(), 6);
        assert_eq!(enumerate_sp(1, 3).unwrap().len(), 24);
        let g5 = enumerate_sp(1, 5).unwrap();
        assert_eq!(g5.len(), 120);
        assert!(g5.iter().all(|g| g.det_2x2() == 1 && g.is_symplectic()));
        assert!(enumerate_sp(2, 2).is_err());
    }

    #[test]
    fn orbit_counts() {
        assert_eq!(sp_orbit_count(1, 2, 2).unwrap(), 2);
        assert_eq!(sp_orbit_count(1, 3, 2).unwrap(), 2);
        // pairs of vectors in F_2^2 under SL(2,2): (0,0), (0,v), (v,0), (v,v), (v,w) independent
        assert_eq!(sp_orbit_count(1, 2, 3).unwrap(), 5);
    }
}
