//! Exact linear algebra over `Z_d` for prime `d`, plus the quadratic forms
//! valued in `Z_D` (`D = 2d` for qubits, `D = d` otherwise).
//!
//! Vectors are plain `Vec<u32>` with entries reduced into `[0, d)`. A
//! [`Subspace`] always stores its basis in reduced row echelon form, so two
//! subspaces compare equal exactly when they contain the same vectors.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type GfVector = Vec<u32>;

/// Prime modulus `d` together with the order `D` of the Weyl phase `τ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modulus {
    d: u32,
}

impl Modulus {
    pub fn new(d: u32) -> Result<Self> {
        if !is_prime(d) {
            return Err(Error::NotPrime(d));
        }
        Ok(Self { d })
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// `D = 2d` when `d = 2`, else `D = d`.
    pub fn big_d(&self) -> u32 {
        if self.d == 2 {
            4
        } else {
            self.d
        }
    }

    pub fn reduce(&self, x: i64) -> u32 {
        x.rem_euclid(self.d as i64) as u32
    }

    pub fn inv(&self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.d), "zero has no inverse");
        pow_mod(a as u64, (self.d - 2) as u64, self.d as u64) as u32
    }
}

pub fn is_prime(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= d {
        if d.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

/// Row space of an integer matrix, stored canonically.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Subspace {
    pub d: u32,
    pub ambient: usize,
    pub basis: Vec<GfVector>,
}

/// The three bilinear forms used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BilinearForm {
    /// `x·y` on `Z_d^t`.
    Dot,
    /// `[x, y] = p·q' - q·p'` on `Z_d^{2n}` with `x = (p, q)`.
    Symplectic,
    /// `x·x' - y·y'` on `Z_d^{2t}` with vectors split as `(x, y)`.
    Hyperbolic,
}

/// Quadratic forms whose isotropic subspaces we care about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadraticForm {
    /// `q(x) = x·x mod D`.
    Dot,
    /// `𝔮(x, y) = x·x - y·y mod D`.
    Hyperbolic,
}

impl BilinearForm {
    /// Value of the form reduced mod `d`.
    pub fn eval(&self, a: &[u32], b: &[u32], m: Modulus) -> u32 {
        m.reduce(self.eval_int(a, b))
    }

    /// Integer value computed on the lifts in `[0, d)`.
    pub fn eval_int(&self, a: &[u32], b: &[u32]) -> i64 {
        let len = a.len();
        match self {
            BilinearForm::Dot => dot_int(a, b),
            BilinearForm::Symplectic => {
                let n = len / 2;
                dot_int(&a[..n], &b[n..]) - dot_int(&a[n..], &b[..n])
            }
            BilinearForm::Hyperbolic => {
                let t = len / 2;
                dot_int(&a[..t], &b[..t]) - dot_int(&a[t..], &b[t..])
            }
        }
    }

    fn check_dim(&self, m: usize) -> Result<()> {
        match self {
            BilinearForm::Dot => Ok(()),
            _ if m.is_multiple_of(2) => Ok(()),
            _ => Err(Error::InvalidInput(format!(
                "{self:?} form needs even ambient dimension, got {m}"
            ))),
        }
    }
}

fn dot_int(a: &[u32], b: &[u32]) -> i64 {
    a.iter().zip(b).map(|(&x, &y)| x as i64 * y as i64).sum()
}

/// `q(x) = x·x mod D`.
pub fn quadratic_q(x: &[u32], m: Modulus) -> u32 {
    dot_int(x, x).rem_euclid(m.big_d() as i64) as u32
}

/// `𝔮(x, y) = x·x - y·y mod D`.
pub fn quadratic_big_q(x: &[u32], y: &[u32], m: Modulus) -> u32 {
    (dot_int(x, x) - dot_int(y, y)).rem_euclid(m.big_d() as i64) as u32
}

impl QuadraticForm {
    pub fn eval(&self, v: &[u32], m: Modulus) -> u32 {
        match self {
            QuadraticForm::Dot => quadratic_q(v, m),
            QuadraticForm::Hyperbolic => {
                let t = v.len() / 2;
                quadratic_big_q(&v[..t], &v[t..], m)
            }
        }
    }

    pub fn polar(&self) -> BilinearForm {
        match self {
            QuadraticForm::Dot => BilinearForm::Dot,
            QuadraticForm::Hyperbolic => BilinearForm::Hyperbolic,
        }
    }
}

/// Reduced row echelon form of an integer matrix over `Z_d`.
pub fn rref(rows: &[Vec<i64>], ambient: usize, m: Modulus) -> Subspace {
    let mat: Vec<GfVector> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), ambient, "row length does not match ambient dimension");
            r.iter().map(|&x| m.reduce(x)).collect()
        })
        .collect();
    rref_reduced(mat, ambient, m)
}

/// Same as [`rref`] for rows already reduced into `[0, d)`.
pub fn rref_reduced(mut mat: Vec<GfVector>, ambient: usize, m: Modulus) -> Subspace {
    let d = m.d() as u64;
    let mut rank = 0;
    for col in 0..ambient {
        let Some(piv) = (rank..mat.len()).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(rank, piv);
        let inv = m.inv(mat[rank][col]) as u64;
        if inv != 1 {
            for x in mat[rank].iter_mut() {
                *x = (*x as u64 * inv % d) as u32;
            }
        }
        let pivot_row = mat[rank].clone();
        for (r, row) in mat.iter_mut().enumerate() {
            if r == rank || row[col] == 0 {
                continue;
            }
            let f = row[col] as u64;
            for (x, &p) in row.iter_mut().zip(&pivot_row).skip(col) {
                *x = ((*x as u64 + (d - f) * p as u64) % d) as u32;
            }
        }
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    mat.truncate(rank);
    Subspace { d: m.d(), ambient, basis: mat }
}

impl Subspace {
    pub fn zero(ambient: usize, m: Modulus) -> Self {
        Subspace { d: m.d(), ambient, basis: Vec::new() }
    }

    pub fn full(ambient: usize, m: Modulus) -> Self {
        let basis = (0..ambient)
            .map(|i| {
                let mut v = vec![0; ambient];
                v[i] = 1;
                v
            })
            .collect();
        Subspace { d: m.d(), ambient, basis }
    }

    pub fn span(vectors: &[GfVector], ambient: usize, m: Modulus) -> Self {
        let rows = vectors.iter().map(|v| v.iter().map(|&x| m.reduce(x as i64)).collect()).collect();
        rref_reduced(rows, ambient, m)
    }

    pub fn modulus(&self) -> Modulus {
        Modulus { d: self.d }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Number of vectors, `d^dim`.
    pub fn cardinality(&self) -> u128 {
        (self.d as u128).pow(self.dim() as u32)
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| r.iter().position(|&x| x != 0).expect("zero row in canonical basis"))
            .collect()
    }

    /// Subtract basis multiples so the result vanishes on every pivot column.
    /// Two vectors lie in the same coset iff their reductions agree.
    pub fn reduce(&self, v: &[u32]) -> GfVector {
        let d = self.d as u64;
        let mut out = v.to_vec();
        for row in &self.basis {
            let piv = row.iter().position(|&x| x != 0).unwrap();
            let f = out[piv] as u64;
            if f != 0 {
                for (x, &r) in out.iter_mut().zip(row) {
                    *x = ((*x as u64 + (d - f) * r as u64) % d) as u32;
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    /// Linear combination `Σ c_i b_i` of the basis rows.
    pub fn combine(&self, coeffs: &[u32]) -> GfVector {
        let d = self.d as u64;
        let mut out = vec![0u64; self.ambient];
        for (c, row) in coeffs.iter().zip(&self.basis) {
            if *c == 0 {
                continue;
            }
            for (o, &r) in out.iter_mut().zip(row) {
                *o += *c as u64 * r as u64;
            }
        }
        out.into_iter().map(|x| (x % d) as u32).collect()
    }

    /// All `d^dim` elements, ordered by their coefficient vectors.
    pub fn elements(&self) -> Vec<GfVector> {
        let k = self.dim();
        let mut out = Vec::with_capacity(self.cardinality() as usize);
        for_each_tuple(k, self.d, |c| out.push(self.combine(c)));
        out
    }

    fn check_same(&self, other: &Subspace) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(Error::DimensionMismatch { expected: self.ambient, found: other.ambient });
        }
        if self.d != other.d {
            return Err(Error::InvalidInput(format!("moduli {} and {} differ", self.d, other.d)));
        }
        Ok(())
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same(other)?;
        let rows = self.basis.iter().chain(&other.basis).cloned().collect();
        Ok(rref_reduced(rows, self.ambient, self.modulus()))
    }

    /// Intersection via `a ∩ b = (a^⊥ + b^⊥)^⊥` for the dot form.
    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_same(other)?;
        let a = self.complement(BilinearForm::Dot)?;
        let b = other.complement(BilinearForm::Dot)?;
        a.sum(&b)?.complement(BilinearForm::Dot)
    }

    /// Orthogonal complement with respect to `form`.
    pub fn complement(&self, form: BilinearForm) -> Result<Subspace> {
        form.check_dim(self.ambient)?;
        let m = self.ambient;
        // The form is `x ↦ b·G x`; turn each basis row into the row `b G`.
        let d = self.d;
        let neg = |x: u32| (d - x) % d;
        let rows: Vec<GfVector> = self
            .basis
            .iter()
            .map(|b| match form {
                BilinearForm::Dot => b.clone(),
                BilinearForm::Symplectic => {
                    let n = m / 2;
                    b[n..].iter().map(|&q| neg(q)).chain(b[..n].iter().copied()).collect()
                }
                BilinearForm::Hyperbolic => {
                    let t = m / 2;
                    b[..t].iter().copied().chain(b[t..].iter().map(|&y| neg(y))).collect()
                }
            })
            .collect();
        Ok(null_space(&rows, m, self.modulus()))
    }

    /// Lexicographically least representative of every coset `self / sub`.
    pub fn coset_reps(&self, sub: &Subspace) -> Result<Vec<GfVector>> {
        self.check_same(sub)?;
        if !sub.is_subspace_of(self) {
            return Err(Error::NotContained);
        }
        let mut best: HashMap<GfVector, GfVector> = HashMap::new();
        for v in self.elements() {
            let key = sub.reduce(&v);
            best.entry(key)
                .and_modify(|b| {
                    if v < *b {
                        *b = v.clone()
                    }
                })
                .or_insert(v);
        }
        let mut reps: Vec<GfVector> = best.into_values().collect();
        reps.sort();
        Ok(reps)
    }

    /// Apply a linear map `v ↦ f(v)` to every basis row.
    pub fn map(&self, ambient: usize, f: impl Fn(&[u32]) -> GfVector) -> Subspace {
        let rows = self.basis.iter().map(|b| f(b)).collect();
        rref_reduced(rows, ambient, self.modulus())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("subspace serializes")
    }

    pub fn from_json(s: &str) -> Result<Subspace> {
        let raw: Subspace = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        let m = Modulus::new(raw.d)?;
        let canon = Subspace::span(&raw.basis, raw.ambient, m);
        if canon != raw {
            return Err(Error::InvalidInput("basis is not in canonical form".into()));
        }
        Ok(canon)
    }
}

/// Kernel `{v : A v = 0}` of a matrix whose rows are `rows`.
pub fn null_space(rows: &[GfVector], m_cols: usize, m: Modulus) -> Subspace {
    let r = rref_reduced(rows.to_vec(), m_cols, m);
    let d = m.d();
    let pivots = r.pivots();
    let mut basis = Vec::new();
    for free in (0..m_cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u32; m_cols];
        v[free] = 1;
        for (row, &p) in r.basis.iter().zip(&pivots) {
            v[p] = (d - row[free]) % d;
        }
        basis.push(v);
    }
    rref_reduced(basis, m_cols, m)
}

/// Visit every tuple in `Z_d^k` in lexicographic order.
pub fn for_each_tuple(k: usize, d: u32, mut f: impl FnMut(&[u32])) {
    let mut c = vec![0u32; k];
    loop {
        f(&c);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            c[i] += 1;
            if c[i] < d {
                break;
            }
            c[i] = 0;
        }
    }
}

/// Isotropy of the whole subspace for a quadratic form.
///
/// For odd `d` the form is determined by its polarization, so self-orthogonality
/// of the basis suffices. For `d = 2` the basis vectors must be isotropic mod 4
/// and pairwise orthogonal mod 2.
pub fn is_totally_isotropic(s: &Subspace, form: QuadraticForm) -> bool {
    let m = s.modulus();
    let polar = form.polar();
    for (i, a) in s.basis.iter().enumerate() {
        if m.d() == 2 {
            if form.eval(a, m) != 0 {
                return false;
            }
        } else if polar.eval(a, a, m) != 0 {
            return false;
        }
        for b in &s.basis[i + 1..] {
            if polar.eval(a, b, m) != 0 {
                return false;
            }
        }
    }
    true
}

/// Symplectic isotropy `[a, b] = 0` for all pairs of basis vectors.
pub fn is_symplectic_isotropic(s: &Subspace) -> bool {
    let m = s.modulus();
    s.basis.iter().enumerate().all(|(i, a)| {
        s.basis[i..].iter().all(|b| BilinearForm::Symplectic.eval(a, b, m) == 0)
    })
}

/// Every `k`-dimensional subspace of `Z_d^m`, in lexicographic order of the
/// canonical basis. Brute force; intended for small `m`.
pub fn all_subspaces(m_dim: usize, k: usize, m: Modulus) -> Vec<Subspace> {
    let d = m.d();
    let mut out = Vec::new();
    for pivots in combinations(m_dim, k) {
        // free slots: positions right of each pivot that are not pivot columns
        let slots: Vec<(usize, usize)> = pivots
            .iter()
            .enumerate()
            .flat_map(|(r, &p)| {
                let pivots = &pivots;
                ((p + 1)..m_dim).filter(move |c| !pivots.contains(c)).map(move |c| (r, c))
            })
            .collect();
        for_each_tuple(slots.len(), d, |vals| {
            let mut basis = vec![vec![0u32; m_dim]; k];
            for (r, &p) in pivots.iter().enumerate() {
                basis[r][p] = 1;
            }
            for (&(r, c), &v) in slots.iter().zip(vals) {
                basis[r][c] = v;
            }
            out.push(Subspace { d, ambient: m_dim, basis });
        });
    }
    out.sort();
    out
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian binomial coefficient `binom(n, k)_d`: the number of
/// `k`-dimensional subspaces of `Z_d^n`.
pub fn gaussian_binomial(n: u32, k: u32, d: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let q = BigUint::from(d);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= q.pow(n - i) - BigUint::one();
        den *= q.pow(i + 1) - BigUint::one();
    }
    num / den
}

/// Both forms of the Pascal rule:
/// `binom(n,k) = binom(n-1,k-1) + d^k binom(n-1,k) = d^{n-k} binom(n-1,k-1) + binom(n-1,k)`.
pub fn gaussian_pascal_check(n: u32, k: u32, d: u32) -> bool {
    if n == 0 || k == 0 || k > n {
        return true;
    }
    let q = BigUint::from(d);
    let lhs = gaussian_binomial(n, k, d);
    let a = gaussian_binomial(n - 1, k - 1, d);
    let b = gaussian_binomial(n - 1, k, d);
    lhs == &a + q.pow(k) * &b && lhs == q.pow(n - k) * &a + &b
}

/// `Σ_k d^{k(k-1)/2} binom(n,k)_d x^k = ∏_{j<n} (1 + d^j x)`, checked exactly at integer `x`.
pub fn gaussian_binomial_formula_check(n: u32, d: u32, x: u32) -> bool {
    let q = BigUint::from(d);
    let xb = BigUint::from(x);
    let lhs: BigUint = (0..=n)
        .map(|k| q.pow(k * k.saturating_sub(1) / 2) * gaussian_binomial(n, k, d) * xb.pow(k))
        .sum();
    let rhs: BigUint = (0..n).map(|j| BigUint::one() + q.pow(j) * &xb).product();
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(d: u32) -> Modulus {
        Modulus::new(d).unwrap()
    }

    #[test]
    fn modulus_orders() {
        assert_eq!(m(2).big_d(), 4);
        assert_eq!(m(3).big_d(), 3);
        assert!(Modulus::new(4).is_err());
        assert_eq!(m(5).inv(2), 3);
    }

    #[test]
    fn rref_examples() {
        let s = rref(&[vec![1, 0], vec![0, 1]], 2, m(2));
        assert_eq!(s.basis, vec![vec![1, 0], vec![0, 1]]);
        let s = rref(&[vec![1, 1], vec![2, 2]], 2, m(3));
        assert_eq!(s.basis, vec![vec![1, 1]]);
        let s = rref(&[vec![0, 0, 0]], 3, m(3));
        assert_eq!(s.dim(), 0);
        let s = rref(&[vec![-1, 5, 3]], 3, m(3));
        assert_eq!(s.basis, vec![vec![1, 1, 0]]);
    }

    #[test]
    fn cosets_2_4_generator() {
        let rows = vec![
            vec![1, 0, 0, 1, 1, 0, 0, 1],
            vec![0, 1, 0, 1, 0, 1, 0, 1],
            vec![0, 0, 0, 0, 1, 1, 1, 1],
            vec![1, 1, 1, 1, 0, 0, 0, 0],
        ];
        let s = rref(&rows, 8, m(2));
        assert_eq!(s.dim(), 4);
        assert!(is_totally_isotropic(&s, QuadraticForm::Hyperbolic));
    }

    #[test]
    fn intersect_and_sum() {
        let a = Subspace::span(&[vec![1, 0]], 2, m(2));
        let b = Subspace::span(&[vec![0, 1]], 2, m(2));
        assert_eq!(a.intersect(&b).unwrap().dim(), 0);
        assert_eq!(a.intersect(&a).unwrap(), a);
        let a = Subspace::span(&[vec![1, 1, 1]], 3, m(3));
        let b = Subspace::span(&[vec![1, 2, 0]], 3, m(3));
        let s = a.sum(&b).unwrap();
        assert_eq!(s.dim(), 2);
        // brute membership over all 27 vectors
        let mut members = 0;
        for_each_tuple(3, 3, |v| {
            let in_span = (0..3).any(|i| {
                (0..3).any(|j| (0..3).all(|c| (i * [1, 1, 1][c] + j * [1, 2, 0][c]) % 3 == v[c]))
            });
            assert_eq!(in_span, s.contains(v));
            members += in_span as u32;
        });
        assert_eq!(members, 9);
        let c = Subspace::full(2, m(2));
        assert!(a.sum(&c).is_err());
    }

    #[test]
    fn complements() {
        let z = Subspace::zero(4, m(2));
        assert_eq!(z.complement(BilinearForm::Symplectic).unwrap(), Subspace::full(4, m(2)));
        let a = Subspace::span(&[vec![1, 0]], 2, m(2));
        assert_eq!(a.complement(BilinearForm::Symplectic).unwrap(), a);
        assert!(Subspace::zero(3, m(2)).complement(BilinearForm::Hyperbolic).is_err());
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(quadratic_q(&[1, 1, 1, 1], m(2)), 0);
        assert_eq!(quadratic_q(&[1, 1, 1, 1, 1], m(2)), 1);
        assert_eq!(quadratic_q(&[1, 2], m(3)), 2);
        assert_eq!(quadratic_big_q(&[1, 1, 0], &[1, 0, 0], m(2)), 1);
        assert_eq!(quadratic_big_q(&[1, 2, 1], &[1, 2, 1], m(3)), 0);
    }

    #[test]
    fn diagonal_is_isotropic() {
        for d in [2, 3, 5] {
            let t = 3;
            let rows: Vec<GfVector> = (0..t)
                .map(|i| {
                    let mut v = vec![0; 2 * t];
                    v[i] = 1;
                    v[t + i] = 1;
                    v
                })
                .collect();
            let s = Subspace::span(&rows, 2 * t, m(d));
            assert!(is_totally_isotropic(&s, QuadraticForm::Hyperbolic));
            assert!(is_totally_isotropic(&Subspace::zero(4, m(d)), QuadraticForm::Dot));
        }
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_binomial(5, 0, 3), BigUint::one());
        assert_eq!(gaussian_binomial(2, 1, 2), BigUint::from(3u32));
        assert!(gaussian_binomial_formula_check(4, 3, 1));
        for n in 0..8 {
            for k in 0..=n {
                assert!(gaussian_pascal_check(n, k, 2));
                assert!(gaussian_pascal_check(n, k, 5));
            }
        }
    }

    #[test]
    fn coset_rep_examples() {
        let full = Subspace::full(2, m(2));
        assert_eq!(full.coset_reps(&full).unwrap(), vec![vec![0, 0]]);
        let sub = Subspace::span(&[vec![1, 1]], 2, m(2));
        assert_eq!(full.coset_reps(&sub).unwrap(), vec![vec![0, 0], vec![0, 1]]);
        assert_eq!(sub.coset_reps(&full), Err(Error::NotContained));
    }

    #[test]
    fn json_round_trip() {
        let s = Subspace::span(&[vec![2, 1, 0], vec![0, 1, 1]], 3, m(3));
        let j = s.to_json();
        assert!(j.contains("\"basis\""));
        assert_eq!(Subspace::from_json(&j).unwrap(), s);
        assert!(Subspace::from_json(r#"{"d":3,"ambient":2,"basis":[[2,0]]}"#).is_err());
    }
}
