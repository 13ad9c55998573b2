//! Dense complex operators and state vectors, with a global dimension cap.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

pub const DEFAULT_DIMENSION_CAP: usize = 1 << 13;

static DIMENSION_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DIMENSION_CAP);

pub fn dimension_cap() -> usize {
    DIMENSION_CAP.load(Ordering::Relaxed)
}

pub fn set_dimension_cap(cap: usize) {
    DIMENSION_CAP.store(cap, Ordering::Relaxed);
}

/// Fails with a resource error when `dim` exceeds the configured cap.
pub fn check_dim(dim: u128) -> Result<usize> {
    let cap = dimension_cap();
    if dim > cap as u128 {
        return Err(Error::CapExceeded { requested: dim, cap: cap as u128 });
    }
    Ok(dim as usize)
}

/// `base^exp` as a checked dimension.
pub fn checked_pow(base: u32, exp: usize) -> Result<usize> {
    let mut v: u128 = 1;
    for _ in 0..exp {
        v = v.saturating_mul(base as u128);
    }
    check_dim(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator<R: Real> {
    pub mat: DMatrix<C<R>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState<R: Real> {
    pub amps: DVector<C<R>>,
}

impl<R: Real> DenseOperator<R> {
    pub fn new(mat: DMatrix<C<R>>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator must be square");
        Self { mat }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: DMatrix::zeros(dim, dim) }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C<R>) -> Self {
        Self { mat: DMatrix::from_fn(dim, dim, f) }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { mat: self.mat.adjoint() }
    }

    pub fn trace(&self) -> C<R> {
        self.mat.trace()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { mat: &self.mat * &other.mat }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { mat: &self.mat + &other.mat }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { mat: &self.mat - &other.mat }
    }

    pub fn scale(&self, s: C<R>) -> Self {
        Self { mat: self.mat.map(|x| x * s) }
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim() as u128 * other.dim() as u128)?;
        Ok(Self { mat: self.mat.kronecker(&other.mat) })
    }

    pub fn frobenius_norm(&self) -> R {
        self.mat.iter().fold(R::zero(), |acc, x| acc + x.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> R {
        self.mat.iter().fold(R::zero(), |acc, x| acc.max(x.norm_sqr().sqrt()))
    }

    pub fn is_hermitian(&self, tol: R) -> bool {
        self.sub(&self.adjoint()).max_abs() < tol
    }

    pub fn is_unitary(&self, tol: R) -> bool {
        let p = self.adjoint().mul(self);
        p.sub(&Self::identity(self.dim())).max_abs() < tol
    }

    pub fn apply(&self, psi: &PureState<R>) -> PureState<R> {
        PureState { amps: &self.mat * &psi.amps }
    }

    /// `⟨ψ|B|ψ⟩`.
    pub fn expectation(&self, psi: &PureState<R>) -> C<R> {
        psi.amps.dotc(&(&self.mat * &psi.amps))
    }

    /// Hilbert-Schmidt inner product `tr[A† B]`.
    pub fn hs_inner(&self, other: &Self) -> C<R> {
        self.mat.iter().zip(other.mat.iter()).fold(C::new(R::zero(), R::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn to_json(&self) -> String {
        let dim = self.dim();
        let re = (0..dim).map(|i| (0..dim).map(|j| self.mat[(i, j)].re.to_f64()).collect()).collect();
        let im = (0..dim).map(|i| (0..dim).map(|j| self.mat[(i, j)].im.to_f64()).collect()).collect();
        serde_json::to_string(&OperatorJson { dim, re, im }).expect("operator serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: OperatorJson = serde_json::from_str(s).map_err(|e| Error::InvalidInput(e.to_string()))?;
        if raw.re.len() != raw.dim || raw.im.len() != raw.dim {
            return Err(Error::DimensionMismatch { expected: raw.dim, found: raw.re.len() });
        }
        for row in raw.re.iter().chain(&raw.im) {
            if row.len() != raw.dim {
                return Err(Error::DimensionMismatch { expected: raw.dim, found: row.len() });
            }
        }
        Ok(Self::from_fn(raw.dim, |i, j| C::new(R::of(raw.re[i][j]), R::of(raw.im[i][j]))))
    }
}

#[derive(Serialize, Deserialize)]
struct OperatorJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl<R: Real> PureState<R> {
    /// Normalizes `amps`; errors on a zero vector.
    pub fn new(amps: DVector<C<R>>) -> Result<Self> {
        let norm = amps.norm();
        if norm <= R::of(1e-300) {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        Ok(Self { amps: amps.unscale(norm) })
    }

    pub fn from_vec(v: Vec<C<R>>) -> Result<Self> {
        Self::new(DVector::from_vec(v))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = DVector::zeros(dim);
        amps[k] = C::new(R::one(), R::zero());
        Self { amps }
    }

    /// Haar-random state from a normalized complex Gaussian vector.
    pub fn random<G: Rng + ?Sized>(dim: usize, rng: &mut G) -> Self {
        loop {
            let v = DVector::from_fn(dim, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C::new(R::of(re), R::of(im))
            });
            if let Ok(s) = Self::new(v) {
                return s;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> R {
        self.amps.norm()
    }

    pub fn is_normalized(&self, tol: R) -> bool {
        (self.norm() - R::one()).abs() < tol
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C<R> {
        self.amps.dotc(&other.amps)
    }

    pub fn kron(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim() as u128 * other.dim() as u128)?;
        Ok(Self { amps: self.amps.kronecker(&other.amps) })
    }

    pub fn kron_power(&self, k: usize) -> Result<Self> {
        check_dim((self.dim() as u128).saturating_pow(k as u32))?;
        let mut out = Self { amps: DVector::from_element(1, C::new(R::one(), R::zero())) };
        for _ in 0..k {
            out = Self { amps: out.amps.kronecker(&self.amps) };
        }
        Ok(out)
    }

    pub fn projector(&self) -> DenseOperator<R> {
        DenseOperator { mat: &self.amps * self.amps.adjoint() }
    }
}

/// Eigen-decomposition of a Hermitian operator: eigenvalues ascending, with
/// eigenvectors as matching columns.
pub fn hermitian_eigen<R: Real>(b: &DenseOperator<R>) -> (Vec<R>, DMatrix<C<R>>) {
    let eig = nalgebra::SymmetricEigen::new(b.mat.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(b.dim(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Apply `f` to the spectrum of a Hermitian operator.
pub fn hermitian_fn<R: Real>(b: &DenseOperator<R>, f: impl Fn(R) -> R) -> DenseOperator<R> {
    let (vals, vecs) = hermitian_eigen(b);
    let diag = DMatrix::from_fn(vals.len(), vals.len(), |i, j| {
        if i == j {
            C::new(f(vals[i]), R::zero())
        } else {
            C::new(R::zero(), R::zero())
        }
    });
    DenseOperator { mat: &vecs * diag * vecs.adjoint() }
}

/// `‖B‖_1` for Hermitian `B`.
pub fn trace_norm_hermitian<R: Real>(b: &DenseOperator<R>) -> R {
    hermitian_eigen(b).0.into_iter().fold(R::zero(), |acc, x| acc + x.abs())
}

/// Number of eigenvalues above `tol` in absolute value.
pub fn hermitian_rank<R: Real>(b: &DenseOperator<R>, tol: R) -> usize {
    hermitian_eigen(b).0.into_iter().filter(|x| x.abs() > tol).count()
}

/// Digits of `index` in base `d`, most significant first.
pub fn digits(mut index: usize, d: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

pub fn from_digits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

/// `B^{⊗k}`.
pub fn kron_power<R: Real>(b: &DenseOperator<R>, k: usize) -> Result<DenseOperator<R>> {
    check_dim((b.dim() as u128).saturating_pow(k as u32))?;
    let mut out = DenseOperator::identity(1);
    for _ in 0..k {
        out = DenseOperator { mat: out.mat.kronecker(&b.mat) };
    }
    Ok(out)
}

/// Reorder the tensor factors of an operator on `(C^local)^{⊗k}`: factor `i`
/// of the result is factor `ordering[i]` of the input.
pub fn tensor_permute<R: Real>(b: &DenseOperator<R>, local: usize, ordering: &[usize]) -> Result<DenseOperator<R>> {
    let k = ordering.len();
    if local.pow(k as u32) != b.dim() {
        return Err(Error::DimensionMismatch { expected: local.pow(k as u32), found: b.dim() });
    }
    let mut seen = vec![false; k];
    for &o in ordering {
        if o >= k || std::mem::replace(&mut seen[o], true) {
            return Err(Error::InvalidInput(format!("{ordering:?} is not a permutation")));
        }
    }
    let map: Vec<usize> = (0..b.dim())
        .map(|idx| {
            let ds = digits(idx, local, k);
            let old: Vec<usize> = {
                let mut o = vec![0; k];
                for (i, &src) in ordering.iter().enumerate() {
                    o[src] = ds[i];
                }
                o
            };
            from_digits(&old, local)
        })
        .collect();
    Ok(DenseOperator::from_fn(b.dim(), |i, j| b.mat[(map[i], map[j])]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type Op = DenseOperator<f64>;

    fn random_op(dim: usize, rng: &mut ChaCha8Rng) -> Op {
        Op::from_fn(dim, |_, _| C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn kron_power_identity() {
        let i8 = kron_power(&Op::identity(2), 3).unwrap();
        assert_eq!(i8, Op::identity(8));
        assert_eq!(kron_power(&Op::identity(2), 0).unwrap(), Op::identity(1));
    }

    #[test]
    fn cap_is_enforced() {
        let err = kron_power(&Op::identity(2), 14).unwrap_err();
        assert_eq!(err, Error::CapExceeded { requested: 1 << 14, cap: 1 << 13 });
    }

    #[test]
    fn permute_swaps_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_op(2, &mut rng);
        let b = random_op(2, &mut rng);
        let ab = a.kron(&b).unwrap();
        let ba = b.kron(&a).unwrap();
        assert_eq!(tensor_permute(&ab, 2, &[0, 1]).unwrap(), ab);
        assert!(tensor_permute(&ab, 2, &[1, 0]).unwrap().sub(&ba).max_abs() < 1e-15);
        assert!(tensor_permute(&ab, 2, &[1, 1]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_op(3, &mut rng);
        assert_eq!(Op::from_json(&a.to_json()).unwrap(), a);
    }

    #[test]
    fn eigen_helpers() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_op(4, &mut rng);
        let h = a.add(&a.adjoint());
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let back = hermitian_fn(&h, |x| x);
        assert!(back.sub(&h).max_abs() < 1e-12);
        assert_eq!(vecs.ncols(), 4);
        let psi = PureState::<f64>::random(4, &mut rng);
        assert_eq!(hermitian_rank(&psi.projector(), 1e-10), 1);
        assert!((trace_norm_hermitian(&psi.projector()) - 1.0).abs() < 1e-12);
    }
}
