//! Weyl operators, characteristic and Wigner functions, and phase-space point
//! operators for `n` qudits of dimension `d`.
//!
//! A phase-space point is `x = (p, q)` with `p, q ∈ Z_d^n`, stored as one slice
//! of length `2n`. Points are indexed row-major over `(p, q)` with `p` varying
//! slowest, i.e. the slice read as a big-endian base-`d` number.

pub use crate::dense::{kron_power, tensor_permute, DenseOperator, PureState};

use crate::dense::{check_dim, digits, from_digits};
use crate::error::{Error, Result};
use crate::scalar::{root_of_unity, Real, C};

/// `n` with `d^n = dim`, if `dim` is a power of `d`.
pub fn qudit_count(dim: usize, d: u32) -> Result<usize> {
    let (mut n, mut rest) = (0, dim);
    while rest > 1 {
        if rest % d as usize != 0 {
            return Err(Error::InvalidInput(format!("dimension {dim} is not a power of {d}")));
        }
        rest /= d as usize;
        n += 1;
    }
    Ok(n)
}

/// Integer symplectic form `[x, y] = p·q' - q·p'` on lifts.
pub fn symplectic(x: &[u32], y: &[u32]) -> i64 {
    let n = x.len() / 2;
    (0..n).map(|i| x[i] as i64 * y[n + i] as i64 - x[n + i] as i64 * y[i] as i64).sum()
}

pub fn point_index(x: &[u32], d: u32) -> usize {
    x.iter().fold(0, |acc, &v| acc * d as usize + v as usize)
}

pub fn point_from_index(idx: usize, n: usize, d: u32) -> Vec<u32> {
    digits(idx, d as usize, 2 * n).into_iter().map(|v| v as u32).collect()
}

/// All `d^{2n}` points in index order.
pub fn all_points(n: usize, d: u32) -> Vec<Vec<u32>> {
    (0..(d as usize).pow(2 * n as u32)).map(|i| point_from_index(i, n, d)).collect()
}

pub fn add_points(x: &[u32], y: &[u32], d: u32) -> Vec<u32> {
    x.iter().zip(y).map(|(a, b)| (a + b) % d).collect()
}

pub fn sub_points(x: &[u32], y: &[u32], d: u32) -> Vec<u32> {
    x.iter().zip(y).map(|(a, b)| (a + d - b) % d).collect()
}

/// An operator of the form `|j⟩ ↦ phase[j] |perm[j]⟩`.
#[derive(Clone, Debug)]
pub struct Monomial<R: Real> {
    pub perm: Vec<usize>,
    pub phase: Vec<C<R>>,
}

impl<R: Real> Monomial<R> {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn to_dense(&self) -> DenseOperator<R> {
        let mut out = DenseOperator::zeros(self.dim());
        for (j, (&i, &ph)) in self.perm.iter().zip(&self.phase).enumerate() {
            out.mat[(i, j)] = ph;
        }
        out
    }

    pub fn apply(&self, v: &PureState<R>) -> PureState<R> {
        let mut out = nalgebra::DVector::zeros(self.dim());
        for j in 0..self.dim() {
            out[self.perm[j]] += self.phase[j] * v.amps[j];
        }
        PureState { amps: out }
    }

    /// `⟨ψ|M|ψ⟩`.
    pub fn expectation(&self, v: &PureState<R>) -> C<R> {
        (0..self.dim()).fold(C::new(R::zero(), R::zero()), |acc, j| {
            acc + v.amps[self.perm[j]].conj() * self.phase[j] * v.amps[j]
        })
    }

    pub fn adjoint(&self) -> Self {
        let mut perm = vec![0; self.dim()];
        let mut phase = vec![C::new(R::zero(), R::zero()); self.dim()];
        for (j, (&i, &ph)) in self.perm.iter().zip(&self.phase).enumerate() {
            perm[i] = j;
            phase[i] = ph.conj();
        }
        Self { perm, phase }
    }

    /// `self ⊗ other`, with `self` on the more significant digits.
    pub fn kron(&self, other: &Self) -> Self {
        let db = other.dim();
        let dim = self.dim() * db;
        let mut perm = Vec::with_capacity(dim);
        let mut phase = Vec::with_capacity(dim);
        for ia in 0..self.dim() {
            for ib in 0..db {
                perm.push(self.perm[ia] * db + other.perm[ib]);
                phase.push(self.phase[ia] * other.phase[ib]);
            }
        }
        Self { perm, phase }
    }

    /// `tr[M† B]`.
    pub fn hs_inner(&self, b: &DenseOperator<R>) -> C<R> {
        (0..self.dim()).fold(C::new(R::zero(), R::zero()), |acc, j| {
            acc + self.phase[j].conj() * b.mat[(self.perm[j], j)]
        })
    }
}

/// `W_x` for a point given by integer lifts, as a monomial matrix.
///
/// `W_x = τ^{-p·q} ⊗_i Z^{p_i} X^{q_i}` with `τ = exp(iπ(d²+1)/d)`; every phase
/// is an exact power of `exp(2πi/2d)`.
pub fn weyl_monomial_lift<R: Real>(d: u32, x: &[i64]) -> Monomial<R> {
    let n = x.len() / 2;
    let (p, q) = x.split_at(n);
    let dd = d as i64;
    let dim = (d as usize).pow(n as u32);
    let pq: i64 = p.iter().zip(q).map(|(a, b)| a * b).sum();
    let base = -pq * (dd * dd + 1);
    let mut perm = Vec::with_capacity(dim);
    let mut phase = Vec::with_capacity(dim);
    for j in 0..dim {
        let js = digits(j, d as usize, n);
        let shifted: Vec<usize> = js.iter().zip(q).map(|(&a, &b)| (a as i64 + b).rem_euclid(dd) as usize).collect();
        let e: i64 = shifted.iter().zip(p).map(|(&s, &a)| 2 * a * s as i64).sum();
        perm.push(from_digits(&shifted, d as usize));
        phase.push(root_of_unity(base + e, 2 * dd));
    }
    Monomial { perm, phase }
}

pub fn weyl_monomial<R: Real>(d: u32, x: &[u32]) -> Monomial<R> {
    let lift: Vec<i64> = x.iter().map(|&v| v as i64).collect();
    weyl_monomial_lift(d, &lift)
}

/// Dense `W_x` for a reduced point.
pub fn weyl<R: Real>(d: u32, x: &[u32]) -> DenseOperator<R> {
    weyl_monomial(d, x).to_dense()
}

/// Dense `W_x` for arbitrary integer lifts (not reduced mod `d`).
pub fn weyl_lift<R: Real>(d: u32, x: &[i64]) -> DenseOperator<R> {
    weyl_monomial_lift(d, x).to_dense()
}

/// Function on phase space, values in point-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFunction<T> {
    pub n: usize,
    pub d: u32,
    pub values: Vec<T>,
}

impl<T: Copy> PhaseFunction<T> {
    pub fn at(&self, x: &[u32]) -> T {
        self.values[point_index(x, self.d)]
    }
}

impl<R: Real> PhaseFunction<R> {
    pub fn sum(&self) -> R {
        self.values.iter().fold(R::zero(), |a, &b| a + b)
    }

    pub fn to_complex(&self) -> PhaseFunction<C<R>> {
        PhaseFunction { n: self.n, d: self.d, values: self.values.iter().map(|&v| C::new(v, R::zero())).collect() }
    }
}

/// `c_B(x) = d^{-n/2} tr[W_x† B]`.
pub fn characteristic_function<R: Real>(d: u32, b: &DenseOperator<R>) -> Result<PhaseFunction<C<R>>> {
    let n = qudit_count(b.dim(), d)?;
    let norm = R::of((d as f64).powf(-(n as f64) / 2.0));
    let values = all_points(n, d).iter().map(|x| weyl_monomial::<R>(d, x).hs_inner(b) * norm).collect();
    Ok(PhaseFunction { n, d, values })
}

/// `p_ψ(x) = |c_ψ(x)|² = d^{-n} |⟨ψ|W_x|ψ⟩|²`.
pub fn char_distribution<R: Real>(d: u32, psi: &PureState<R>) -> Result<PhaseFunction<R>> {
    if !psi.is_normalized(R::of(1e-10)) {
        return Err(Error::InvalidInput("state is not normalized".into()));
    }
    let n = qudit_count(psi.dim(), d)?;
    let scale = R::of((d as f64).powi(-(n as i32)));
    let values = all_points(n, d)
        .iter()
        .map(|x| weyl_monomial::<R>(d, x).expectation(psi).norm_sqr() * scale)
        .collect();
    Ok(PhaseFunction { n, d, values })
}

/// `f̂(x) = d^{-n} Σ_y ω^{-[x,y]} f(y)`.
pub fn symplectic_fourier<R: Real>(f: &PhaseFunction<C<R>>) -> PhaseFunction<C<R>> {
    let (n, d) = (f.n, f.d);
    let pts = all_points(n, d);
    let scale = R::of((d as f64).powi(-(n as i32)));
    let values = pts
        .iter()
        .map(|x| {
            pts.iter().zip(&f.values).fold(C::new(R::zero(), R::zero()), |acc, (y, &v)| {
                acc + root_of_unity::<R>(-symplectic(x, y), d as i64) * v
            }) * scale
        })
        .collect();
    PhaseFunction { n, d, values }
}

/// `A_x = d^{-n} Σ_y ω^{-[x,y]} W_y†`.
pub fn point_operator<R: Real>(n: usize, d: u32, x: &[u32]) -> DenseOperator<R> {
    let dim = (d as usize).pow(n as u32);
    let mut out = DenseOperator::zeros(dim);
    let scale = R::of((d as f64).powi(-(n as i32)));
    for y in all_points(n, d) {
        let w = weyl_monomial::<R>(d, &y);
        let coef = root_of_unity::<R>(-symplectic(x, &y), d as i64) * scale;
        // W_y† has entries conj(phase[j]) at (j, perm[j]).
        for j in 0..dim {
            out.mat[(j, w.perm[j])] += coef * w.phase[j].conj();
        }
    }
    out
}

/// `w_B(x) = d^{-n} tr[A_x B]`, evaluated as `d^{-n/2} ĉ_B(x)`. Real part only,
/// which is the full value for Hermitian `B`.
pub fn wigner<R: Real>(d: u32, b: &DenseOperator<R>) -> Result<PhaseFunction<R>> {
    let c = characteristic_function(d, b)?;
    let scale = R::of((d as f64).powf(-(c.n as f64) / 2.0));
    let hat = symplectic_fourier(&c);
    Ok(PhaseFunction { n: c.n, d, values: hat.values.iter().map(|v| v.re * scale).collect() })
}

/// Wigner function of a pure state.
pub fn wigner_state<R: Real>(d: u32, psi: &PureState<R>) -> Result<PhaseFunction<R>> {
    check_dim(psi.dim() as u128)?;
    wigner(d, &psi.projector())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type Op = DenseOperator<f64>;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn weyl_identity_and_y() {
        assert_eq!(weyl::<f64>(3, &[0, 0]), Op::identity(3));
        let y = weyl::<f64>(2, &[1, 1]);
        let pauli_y = Op::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        });
        assert!(y.sub(&pauli_y).max_abs() < 1e-15);
        let z = weyl::<f64>(2, &[1, 0]);
        assert!(z.sub(&Op::from_fn(2, |i, j| if i == j { c(1.0 - 2.0 * i as f64, 0.0) } else { c(0.0, 0.0) })).max_abs() < 1e-15);
    }

    #[test]
    fn shift_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in [2u32, 3] {
            for _ in 0..20 {
                let x: Vec<u32> = (0..4).map(|_| rng.gen_range(0..d)).collect();
                let z: Vec<u32> = (0..4).map(|_| rng.gen_range(0..d)).collect();
                let lift: Vec<i64> = x.iter().zip(&z).map(|(&a, &b)| a as i64 + d as i64 * b as i64).collect();
                let sign = if ((d as i64 + 1) * symplectic(&x, &z)).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let lhs = weyl_lift::<f64>(d, &lift);
                let rhs = weyl::<f64>(d, &x).scale(c(sign, 0.0));
                assert!(lhs.sub(&rhs).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn group_law_exhaustive_single_qudit() {
        for d in [2u32, 3, 5] {
            let dd = d as i64;
            for x in all_points(1, d) {
                for y in all_points(1, d) {
                    let lhs = weyl::<f64>(d, &x).mul(&weyl::<f64>(d, &y));
                    let sum: Vec<i64> = x.iter().zip(&y).map(|(&a, &b)| (a + b) as i64).collect();
                    let tau = root_of_unity::<f64>(symplectic(&x, &y) * (dd * dd + 1), 2 * dd);
                    let rhs = weyl_lift::<f64>(d, &sum).scale(tau);
                    assert!(lhs.sub(&rhs).max_abs() < 1e-12, "d={d} x={x:?} y={y:?}");
                }
            }
        }
    }

    #[test]
    fn weyl_basis_is_orthogonal() {
        for d in [2u32, 3, 5] {
            let pts = all_points(1, d);
            for x in &pts {
                for y in &pts {
                    let v = weyl::<f64>(d, x).hs_inner(&weyl::<f64>(d, y));
                    let expect = if x == y { d as f64 } else { 0.0 };
                    assert!((v - c(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn characteristic_examples() {
        let cf = characteristic_function(2, &Op::identity(2)).unwrap();
        assert!((cf.values[0] - c(2f64.sqrt(), 0.0)).norm() < 1e-12);
        assert!(cf.values[1..].iter().all(|v| v.norm() < 1e-12));

        let zero = PureState::<f64>::basis(2, 0);
        let p = char_distribution(2, &zero).unwrap();
        // index order: (p, q) = (0,0), (0,1), (1,0), (1,1)
        let expect = [0.5, 0.0, 0.5, 0.0];
        for (a, b) in p.values.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let bad = PureState { amps: zero.amps.scale(2.0) };
        assert!(char_distribution(2, &bad).is_err());
    }

    #[test]
    fn parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Op::from_fn(4, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let b = Op::from_fn(4, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let ca = characteristic_function(2, &a).unwrap();
        let cb = characteristic_function(2, &b).unwrap();
        let lhs = ca.values.iter().zip(&cb.values).fold(c(0.0, 0.0), |s, (x, y)| s + x.conj() * y);
        assert!((lhs - a.hs_inner(&b)).norm() < 1e-12);
    }

    #[test]
    fn t_state_distribution_and_fourier_invariance() {
        // ½(I + (X+Y)/√2) has Bloch vector (1/√2, 1/√2, 0)
        let theta = std::f64::consts::FRAC_PI_4;
        let t = PureState::from_vec(vec![c(1.0, 0.0), C::from_polar(1.0, theta)]).unwrap();
        let p = char_distribution(2, &t).unwrap();
        // points (p,q): I=(0,0), X=(0,1), Z=(1,0), Y=(1,1)
        assert!((p.at(&[0, 0]) - 0.5).abs() < 1e-12);
        assert!((p.at(&[0, 1]) - 0.25).abs() < 1e-12);
        assert!((p.at(&[1, 1]) - 0.25).abs() < 1e-12);
        assert!(p.at(&[1, 0]).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..=2 {
            let psi = PureState::<f64>::random(1 << n, &mut rng);
            let p = char_distribution(2, &psi).unwrap();
            let hat = symplectic_fourier(&p.to_complex());
            for (a, b) in p.values.iter().zip(&hat.values) {
                assert!((c(*a, 0.0) - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fourier_basics() {
        let n = 1;
        let d = 3;
        let mut delta = PhaseFunction { n, d, values: vec![c(0.0, 0.0); 9] };
        delta.values[0] = c(1.0, 0.0);
        let hat = symplectic_fourier(&delta);
        assert!(hat.values.iter().all(|v| (v - c(1.0 / 3.0, 0.0)).norm() < 1e-12));
        let ones = PhaseFunction { n, d, values: vec![c(1.0, 0.0); 9] };
        let hat = symplectic_fourier(&ones);
        assert!((hat.values[0] - c(3.0, 0.0)).norm() < 1e-12);
        assert!(hat.values[1..].iter().all(|v| v.norm() < 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let f = PhaseFunction { n: 2, d: 3, values: (0..81).map(|_| c(rng.gen(), rng.gen())).collect() };
        let hat = symplectic_fourier(&f);
        let norm = |g: &PhaseFunction<C<f64>>| g.values.iter().map(|v| v.norm_sqr()).sum::<f64>();
        assert!((norm(&f) - norm(&hat)).abs() < 1e-10);
        // the antisymmetric kernel makes the transform an involution
        let twice = symplectic_fourier(&hat);
        for (a, b) in twice.values.iter().zip(&f.values) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn point_operator_examples() {
        let a0 = point_operator::<f64>(1, 3, &[0, 0]);
        let parity = Op::from_fn(3, |i, j| if (i + j) % 3 == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!(a0.sub(&parity).max_abs() < 1e-12);
        for x in all_points(1, 3) {
            let a = point_operator::<f64>(1, 3, &x);
            assert!((a.trace() - c(1.0, 0.0)).norm() < 1e-12);
            assert!(a.is_hermitian(1e-12));
            assert!(a.mul(&a).sub(&Op::identity(3)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn three_point_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [3u32, 5] {
            for _ in 0..10 {
                let pick = |rng: &mut ChaCha8Rng| -> Vec<u32> { (0..2).map(|_| rng.gen_range(0..d)).collect() };
                let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
                let lhs = point_operator::<f64>(1, d, &x)
                    .mul(&point_operator(1, d, &y))
                    .mul(&point_operator(1, d, &z));
                let target = add_points(&sub_points(&x, &y, d), &z, d);
                let phase = root_of_unity::<f64>(2 * symplectic(&sub_points(&z, &x, d), &sub_points(&y, &x, d)), d as i64);
                let rhs = point_operator::<f64>(1, d, &target).scale(phase);
                assert!(lhs.sub(&rhs).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn wigner_routes_agree_and_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let b = Op::from_fn(3, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let h = b.add(&b.adjoint());
        let w = wigner(3, &h).unwrap();
        let mut back = Op::zeros(3);
        for x in all_points(1, 3) {
            let a = point_operator::<f64>(1, 3, &x);
            let direct = a.mul(&h).trace().re / 3.0;
            assert!((direct - w.at(&x)).abs() < 1e-12);
            back = back.add(&a.adjoint().scale(c(w.at(&x), 0.0)));
        }
        assert!(back.sub(&h).max_abs() < 1e-10);

        let mixed = Op::identity(3).scale(c(1.0 / 3.0, 0.0));
        let w = wigner(3, &mixed).unwrap();
        assert!(w.values.iter().all(|v| (v - 1.0 / 9.0).abs() < 1e-12));

        let psi = PureState::<f64>::random(9, &mut rng);
        let w = wigner_state(3, &psi).unwrap();
        assert!((w.sum() - 1.0).abs() < 1e-10);
        let purity: f64 = w.values.iter().map(|v| 9.0 * v * v).sum();
        assert!((purity - 1.0).abs() < 1e-10);
        assert!(w.values.iter().all(|v| v.abs() <= 1.0 / 9.0 + 1e-12));
    }

    #[test]
    fn generic_over_f32() {
        let y = weyl::<f32>(2, &[1, 1]);
        assert!(y.is_unitary(1e-6));
        let p = char_distribution(3, &PureState::<f32>::basis(3, 0)).unwrap();
        assert!((p.sum() - 1.0).abs() < 1e-5);
    }
}
