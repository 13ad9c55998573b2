//! Moments `E[|ψ⟩⟨ψ|^{⊗t}]` of stabilizer states, Haar-random states and
//! Clifford orbits, and weighted orbit designs.
//!
//! Anything that lies in the commutant is handled as a coefficient vector over
//! `Σ_{t,t}(d)`; Frobenius distances then come from the exact Gram matrix
//! `G_{TT'} = d^{n·dim(T∩T')}` without forming `d^{tn}`-dimensional matrices.

use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::clifford::random_clifford;
use crate::commutant::{
    big_r_relation, bigint_rank, enumerate_sigma, gram_matrix, permutations, r_relation, Relation,
    StochasticIsometry, StochasticLagrangian,
};
use crate::dense::{check_dim, digits, from_digits, hermitian_eigen, DenseOperator, PureState};
use crate::error::{Error, Result};
use crate::gf_linalg::{Modulus, Subspace};
use crate::scalar::C;
use crate::stabilizer::ensemble;

pub type Operator = DenseOperator<f64>;
pub type State = PureState<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MomentSource {
    Bruteforce,
    Formula,
    Haar,
    Orbit,
}

/// A `t`-th moment on `(C^{local_dim})^{⊗t}`.
#[derive(Clone, Debug)]
pub struct MomentOperator {
    pub t: usize,
    pub local_dim: usize,
    pub op: Operator,
    pub source: MomentSource,
}

impl MomentOperator {
    pub fn frobenius_distance(&self, other: &MomentOperator) -> f64 {
        self.op.sub(&other.op).frobenius_norm()
    }

    /// Hermitian, positive semidefinite and unit trace, within `tol`.
    pub fn is_density(&self, tol: f64) -> bool {
        self.op.is_hermitian(tol)
            && (self.op.trace() - C::new(1.0, 0.0)).norm() < tol
            && hermitian_eigen(&self.op).0.first().is_none_or(|&v| v > -tol)
    }

    /// Invariance under relabelling of the `t` copies.
    pub fn is_permutation_invariant(&self, tol: f64) -> Result<bool> {
        for pi in permutations(self.t) {
            let p = permutation_operator(self.local_dim, &pi)?;
            if p.mul(&self.op).sub(&self.op.mul(&p)).max_abs() > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `|j_0, …, j_{t-1}⟩ ↦ |…⟩` with copy `j` moved to slot `π(j)`, for any local dimension.
pub fn permutation_operator(local: usize, pi: &[usize]) -> Result<Operator> {
    let t = pi.len();
    let dim = check_dim((local as u128).pow(t as u32))?;
    let mut out = Operator::zeros(dim);
    for col in 0..dim {
        let ds = digits(col, local, t);
        let mut img = vec![0; t];
        for j in 0..t {
            img[pi[j]] = ds[j];
        }
        out.mat[(from_digits(&img, local), col)] = C::new(1.0, 0.0);
    }
    Ok(out)
}

fn powers_matrix(states: &[&State], t: usize) -> Result<DMatrix<C<f64>>> {
    let local = states.first().map(|s| s.dim()).unwrap_or(1);
    let dim = check_dim((local as u128).pow(t as u32))?;
    let mut v = DMatrix::zeros(dim, states.len());
    for (k, s) in states.iter().enumerate() {
        v.set_column(k, &s.kron_power(t)?.amps);
    }
    Ok(v)
}

/// Exact average of `|S⟩⟨S|^{⊗t}` over all stabilizer states.
pub fn moment_bruteforce(n: usize, d: u32, t: usize) -> Result<MomentOperator> {
    let local = check_dim((d as u128).pow(n as u32))?;
    check_dim((local as u128).pow(t as u32))?;
    let ens = ensemble(n, d)?;
    let states: Vec<&State> = ens.states.iter().map(|s| &s.vector).collect();
    let v = powers_matrix(&states, t)?;
    let op = Operator::new(&v * v.adjoint() / C::new(states.len() as f64, 0.0));
    Ok(MomentOperator { t, local_dim: local, op, source: MomentSource::Bruteforce })
}

/// `Z = d^n ∏_{k=0}^{t-2} (d^k + d^n)`.
pub fn moment_normalization(n: usize, d: u32, t: usize) -> f64 {
    let (df, dn) = (d as f64, (d as f64).powi(n as i32));
    dn * (0..t.saturating_sub(1)).map(|k| df.powi(k as i32) + dn).product::<f64>()
}

/// `Z⁻¹ Σ_{T∈Σ} R(T)`.
pub fn moment_formula(n: usize, d: u32, t: usize) -> Result<MomentOperator> {
    let local = check_dim((d as u128).pow(n as u32))?;
    let dim = check_dim((local as u128).pow(t as u32))?;
    let sigma = enumerate_sigma(t, d)?;
    let w = 1.0 / moment_normalization(n, d, t);
    let mut op = Operator::zeros(dim);
    for s in sigma.iter() {
        for (r, c) in big_r_relation(&s.space, n)?.entries {
            op.mat[(r, c)] += C::new(w, 0.0);
        }
    }
    Ok(MomentOperator { t, local_dim: local, op, source: MomentSource::Formula })
}

/// `∏_{k=0}^{t-1} (k + D)`.
pub fn haar_normalization(local: usize, t: usize) -> f64 {
    (0..t).map(|k| (k + local) as f64).product()
}

/// `(∏_{k<t} (k + D))⁻¹ Σ_{π∈S_t} R(π)`: the symmetric projector over its dimension.
pub fn haar_moment(local: usize, t: usize) -> Result<MomentOperator> {
    let dim = check_dim((local as u128).pow(t as u32))?;
    let w = 1.0 / haar_normalization(local, t);
    let mut op = Operator::zeros(dim);
    for pi in permutations(t) {
        op = op.add(&permutation_operator(local, &pi)?);
    }
    Ok(MomentOperator { t, local_dim: local, op: op.scale(C::new(w, 0.0)), source: MomentSource::Haar })
}

/// `‖E_S[S^{⊗t}] − E_Haar[ψ^{⊗t}]‖_F`, computed in the commutant basis.
pub fn design_gap(n: usize, d: u32, t: usize) -> Result<f64> {
    let basis = CommutantBasis::new(t, d, n)?;
    Ok(basis.frobenius_distance(&basis.formula(), &basis.haar()))
}

/// Same quantity from dense matrices.
pub fn design_gap_dense(n: usize, d: u32, t: usize) -> Result<f64> {
    let stab = moment_formula(n, d, t)?;
    let haar = haar_moment(stab.local_dim, t)?;
    Ok(stab.frobenius_distance(&haar))
}

/// `Σ_T c_T R(T)` for `T ∈ Σ_{t,t}(d)` in enumeration order.
#[derive(Clone, Debug)]
pub struct SigmaExpansion {
    pub t: usize,
    pub n: usize,
    pub d: u32,
    pub coeffs: Vec<C<f64>>,
}

/// `Σ_{t,t}(d)`, the relations `R(T)` on `n` qudits and their Gram matrix.
pub struct CommutantBasis {
    pub t: usize,
    pub n: usize,
    pub d: u32,
    pub sigma: Arc<Vec<StochasticLagrangian>>,
    pub relations: Vec<Relation>,
    pub gram: DMatrix<f64>,
    /// Exact rank of the Gram matrix.
    pub rank: usize,
    chol: Option<nalgebra::Cholesky<f64, nalgebra::Dyn>>,
}

impl CommutantBasis {
    pub fn new(t: usize, d: u32, n: usize) -> Result<Self> {
        let sigma = enumerate_sigma(t, d)?;
        let relations = sigma.iter().map(|s| big_r_relation(&s.space, n)).collect::<Result<Vec<_>>>()?;
        let exact = gram_matrix(&sigma, n);
        let k = sigma.len();
        let gram = DMatrix::from_fn(k, k, |i, j| {
            use num_traits::ToPrimitive;
            exact[i][j].to_f64().expect("finite")
        });
        let rank = bigint_rank(exact);
        let chol = if rank == k { nalgebra::Cholesky::new(gram.clone()) } else { None };
        Ok(Self { t, n, d, sigma, relations, gram, rank, chol })
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    pub fn local_dim(&self) -> usize {
        (self.d as usize).pow(self.n as u32)
    }

    fn expansion(&self, coeffs: Vec<C<f64>>) -> SigmaExpansion {
        SigmaExpansion { t: self.t, n: self.n, d: self.d, coeffs }
    }

    /// Indices of the subspaces `T_π` of permutations.
    pub fn permutation_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.sigma[i].as_isometry().is_some_and(|o| o.is_permutation()))
            .collect()
    }

    pub fn formula(&self) -> SigmaExpansion {
        let w = 1.0 / moment_normalization(self.n, self.d, self.t);
        self.expansion(vec![C::new(w, 0.0); self.len()])
    }

    pub fn haar(&self) -> SigmaExpansion {
        let w = 1.0 / haar_normalization(self.local_dim(), self.t);
        let mut c = vec![C::new(0.0, 0.0); self.len()];
        for i in self.permutation_indices() {
            c[i] = C::new(w, 0.0);
        }
        self.expansion(c)
    }

    /// `tr[A† B]` for two expansions.
    pub fn hs_inner(&self, a: &SigmaExpansion, b: &SigmaExpansion) -> C<f64> {
        let mut acc = C::new(0.0, 0.0);
        for i in 0..self.len() {
            for j in 0..self.len() {
                acc += a.coeffs[i].conj() * self.gram[(i, j)] * b.coeffs[j];
            }
        }
        acc
    }

    pub fn frobenius_distance(&self, a: &SigmaExpansion, b: &SigmaExpansion) -> f64 {
        let diff = self.expansion(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect());
        self.hs_inner(&diff, &diff).re.max(0.0).sqrt()
    }

    /// `tr Σ c_T R(T)`.
    pub fn trace(&self, a: &SigmaExpansion) -> C<f64> {
        a.coeffs.iter().zip(&self.relations).map(|(c, r)| c * r.trace() as f64).sum()
    }

    /// `conj ⟨Ψ^{⊗t}|R(T)|Ψ^{⊗t}⟩ = tr[R(T)† Ψ^{⊗t}]` for every `T`.
    pub fn overlaps(&self, psi: &State) -> Result<Vec<C<f64>>> {
        if psi.dim() != self.local_dim() {
            return Err(Error::DimensionMismatch { expected: self.local_dim(), found: psi.dim() });
        }
        let power = psi.kron_power(self.t)?;
        Ok(self.relations.iter().map(|r| r.expectation(&power).conj()).collect())
    }

    /// Solve `G c = m` for the projection of `m` onto the span of the `R(T)`.
    pub fn solve(&self, m: &[C<f64>]) -> Result<SigmaExpansion> {
        let chol = self.chol.as_ref().ok_or_else(|| {
            Error::Singular(format!("Gram matrix has rank {} < {} at n = {}", self.rank, self.len(), self.n))
        })?;
        let re = chol.solve(&DVector::from_iterator(m.len(), m.iter().map(|z| z.re)));
        let im = chol.solve(&DVector::from_iterator(m.len(), m.iter().map(|z| z.im)));
        Ok(self.expansion(re.iter().zip(im.iter()).map(|(&a, &b)| C::new(a, b)).collect()))
    }

    /// `E_U[(U Ψ)^{⊗t}]` over the Clifford group, as an expansion.
    pub fn orbit(&self, psi: &State) -> Result<SigmaExpansion> {
        self.solve(&self.overlaps(psi)?)
    }

    pub fn to_dense(&self, a: &SigmaExpansion) -> Result<Operator> {
        let dim = check_dim((self.local_dim() as u128).pow(self.t as u32))?;
        let mut out = Operator::zeros(dim);
        for (c, r) in a.coeffs.iter().zip(&self.relations) {
            for &(i, j) in &r.entries {
                out.mat[(i, j)] += c;
            }
        }
        Ok(out)
    }
}

/// Clifford-orbit moment of `Ψ` on `n` qudits.
pub fn orbit_moment(psi: &State, n: usize, d: u32, t: usize) -> Result<SigmaExpansion> {
    CommutantBasis::new(t, d, n)?.orbit(psi)
}

/// `‖ρ_MC − ρ_orbit‖_F` where `ρ_MC` averages `(UΨ)^{⊗t}` over random Clifford words.
pub fn monte_carlo_orbit_distance<G: Rng + ?Sized>(
    basis: &CommutantBasis,
    psi: &State,
    samples: usize,
    word_length: usize,
    rng: &mut G,
) -> Result<f64> {
    let orbit = basis.orbit(psi)?;
    let mut images = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (_, u) = random_clifford(basis.n, basis.d, word_length, rng)?;
        images.push(u.apply(psi));
    }
    let inv = 1.0 / samples as f64;
    let mut mc_sq = 0.0;
    for a in &images {
        for b in &images {
            mc_sq += a.inner(b).norm_sqr().powi(basis.t as i32);
        }
    }
    mc_sq *= inv * inv;
    let mut cross = C::new(0.0, 0.0);
    for img in &images {
        let ov = basis.overlaps(img)?;
        // tr[ρ_orbit† φ^{⊗t}] = Σ conj(c_T) tr[R(T)† φ^{⊗t}]
        cross += orbit.coeffs.iter().zip(&ov).map(|(c, m)| c.conj() * m).sum::<C<f64>>();
    }
    cross *= inv;
    let orbit_sq = basis.hs_inner(&orbit, &orbit).re;
    Ok((mc_sq - 2.0 * cross.re + orbit_sq).max(0.0).sqrt())
}

fn transpose_space(s: &Subspace) -> Subspace {
    let t = s.ambient / 2;
    s.map(2 * t, |v| v[t..].iter().chain(&v[..t]).copied().collect())
}

/// Classes of `Σ_{t,t}(d)` under `T ↦ π T π'` and transposition, permutation class first.
pub fn equivalence_classes(t: usize, d: u32) -> Result<Vec<Vec<usize>>> {
    let sigma = enumerate_sigma(t, d)?;
    let index: HashMap<&Subspace, usize> = sigma.iter().enumerate().map(|(i, s)| (&s.space, i)).collect();
    let perms: Vec<StochasticIsometry> =
        permutations(t).iter().map(|p| StochasticIsometry::permutation(p, d)).collect::<Result<_>>()?;
    let id = StochasticIsometry::identity(t, d)?;
    let mut seen = vec![false; sigma.len()];
    let mut classes = Vec::new();
    for start in 0..sigma.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let mut images: Vec<Subspace> = perms
                .iter()
                .flat_map(|p| {
                    [
                        crate::commutant::left_right_act(p, &sigma[i], &id).space,
                        crate::commutant::left_right_act(&id, &sigma[i], p).space,
                    ]
                })
                .collect();
            images.push(transpose_space(&sigma[i].space));
            for img in images {
                let j = *index.get(&img).ok_or_else(|| Error::Invariant("class action left Σ".into()))?;
                if !seen[j] {
                    seen[j] = true;
                    members.push(j);
                    queue.push_back(j);
                }
            }
        }
        members.sort_unstable();
        classes.push(members);
    }
    let delta = StochasticLagrangian::diagonal(t, d)?;
    let first = classes
        .iter()
        .position(|c| c.iter().any(|&i| sigma[i] == delta))
        .ok_or_else(|| Error::Invariant("diagonal missing from Σ".into()))?;
    classes.swap(0, first);
    classes[1..].sort();
    Ok(classes)
}

/// Class-averaged real coefficients `α_i` of an expansion.
pub fn class_coefficients(expansion: &SigmaExpansion, classes: &[Vec<usize>]) -> Vec<f64> {
    classes
        .iter()
        .map(|c| c.iter().map(|&i| expansion.coeffs[i].re).sum::<f64>() / c.len() as f64)
        .collect()
}

/// Largest deviation of the coefficients from their class average, including imaginary parts.
pub fn class_spread(expansion: &SigmaExpansion, classes: &[Vec<usize>]) -> f64 {
    let avg = class_coefficients(expansion, classes);
    classes
        .iter()
        .zip(&avg)
        .flat_map(|(c, a)| c.iter().map(move |&i| (expansion.coeffs[i] - C::new(*a, 0.0)).norm()))
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitDesign {
    pub t: usize,
    pub n: usize,
    pub d: u32,
    #[serde(skip)]
    pub fiducials: Vec<State>,
    /// Positions of the chosen fiducials in the input list.
    pub chosen: Vec<usize>,
    pub weights: Vec<f64>,
    /// Number of `~_S` classes, the bound on the support.
    pub class_count: usize,
    /// `‖Σ p_j E_U[(UΨ_j)^{⊗t}] − E_Haar‖_F`.
    pub gap: f64,
}

fn null_vector(a: &DMatrix<f64>) -> DVector<f64> {
    // eigenvector of AᵀA for the smallest eigenvalue
    let ata = a.transpose() * a;
    let eig = nalgebra::SymmetricEigen::new(ata);
    let k = eig.eigenvalues.iter().enumerate().min_by(|x, y| x.1.partial_cmp(y.1).unwrap()).unwrap().0;
    eig.eigenvectors.column(k).into_owned()
}

/// Weights on a subset of `fiducials` whose Clifford orbits together form a `t`-design.
///
/// A strictly feasible starting point comes from averaging vertex solutions of
/// the linear feasibility problem for several random objectives. The support is
/// then shrunk by repeatedly moving along a null vector of the design
/// conditions until at most one fiducial per `~_S` class remains, and the final
/// weights are re-solved exactly on that support.
pub fn find_design_weights<G: Rng + ?Sized>(
    fiducials: &[State],
    n: usize,
    d: u32,
    t: usize,
    rng: &mut G,
) -> Result<OrbitDesign> {
    if fiducials.is_empty() {
        return Err(Error::InvalidInput("no fiducial states".into()));
    }
    let basis = CommutantBasis::new(t, d, n)?;
    let classes = equivalence_classes(t, d)?;
    let mm = classes.len();
    let expansions = fiducials.iter().map(|f| basis.orbit(f)).collect::<Result<Vec<_>>>()?;
    let alphas: Vec<Vec<f64>> = expansions.iter().map(|e| class_coefficients(e, &classes)).collect();
    let k = fiducials.len();
    // rows: non-permutation classes, rescaled to unit size
    let rows: Vec<Vec<f64>> = (1..mm)
        .map(|i| {
            let scale = alphas.iter().map(|a| a[i].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            alphas.iter().map(|a| a[i] / scale).collect()
        })
        .collect();

    let mut p = vec![0.0; k];
    let rounds = 8;
    for _ in 0..rounds {
        let mut lp = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = (0..k).map(|_| lp.add_var(rng.gen_range(-1.0..1.0), (0.0, f64::INFINITY))).collect();
        for row in &rows {
            lp.add_constraint(vars.iter().zip(row).map(|(&v, &c)| (v, c)).collect::<Vec<_>>(), ComparisonOp::Eq, 0.0);
        }
        lp.add_constraint(vars.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>(), ComparisonOp::Eq, 1.0);
        let sol = lp.solve().map_err(|e| {
            let best = alphas.iter().map(|a| a[1..].iter().map(|x| x * x).sum::<f64>().sqrt()).fold(f64::INFINITY, f64::min);
            Error::Infeasible(format!("design conditions cannot be met by these fiducials ({e}); smallest residual {best:.3e}"))
        })?;
        for (pj, v) in p.iter_mut().zip(&vars) {
            *pj += sol[*v].max(0.0) / rounds as f64;
        }
    }

    let support_tol = 1e-13;
    loop {
        let support: Vec<usize> = (0..k).filter(|&j| p[j] > support_tol).collect();
        if support.len() <= mm {
            break;
        }
        let anchor = support[0];
        let chosen: Vec<usize> = support[1..=mm].to_vec();
        let a = DMatrix::from_fn(mm.max(2) - 1, mm, |i, m| if i + 1 < mm { rows[i][chosen[m]] } else { 0.0 });
        let mut q = null_vector(&a);
        if q.iter().all(|&x| x <= 0.0) {
            q = -q;
        }
        let (arg, xc) = chosen
            .iter()
            .enumerate()
            .filter(|(m, _)| q[*m] > 0.0)
            .map(|(m, &j)| (m, p[j] / q[m]))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .expect("some component is positive");
        for (m, &j) in chosen.iter().enumerate() {
            p[j] = if m == arg { 0.0 } else { (p[j] - xc * q[m]).max(0.0) };
        }
        debug_assert!(p[anchor] > 0.0);
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
    }

    // exact weights on the final support: design conditions plus normalization
    let support: Vec<usize> = (0..k).filter(|&j| p[j] > support_tol).collect();
    let sys = DMatrix::from_fn(mm, support.len(), |i, m| if i + 1 < mm { rows[i][support[m]] } else { 1.0 });
    let mut rhs = DVector::zeros(mm);
    rhs[mm - 1] = 1.0;
    let svd = sys.svd(true, true);
    let refined = svd.solve(&rhs, 1e-14).map_err(|e| Error::Singular(e.to_string()))?;
    let weights: Vec<f64> = if refined.iter().all(|&x| x >= -1e-12) {
        refined.iter().map(|&x| x.max(0.0)).collect()
    } else {
        support.iter().map(|&j| p[j]).collect()
    };
    let total: f64 = weights.iter().sum();
    let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();

    let mut mix = vec![C::new(0.0, 0.0); basis.len()];
    for (&j, &w) in support.iter().zip(&weights) {
        for (acc, c) in mix.iter_mut().zip(&expansions[j].coeffs) {
            *acc += c * w;
        }
    }
    let gap = basis.frobenius_distance(&basis.expansion(mix), &basis.haar());
    Ok(OrbitDesign {
        t,
        n,
        d,
        fiducials: support.iter().map(|&j| fiducials[j].clone()).collect(),
        chosen: support,
        weights,
        class_count: mm,
        gap,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct QutritFiducial {
    pub n: usize,
    pub theta: f64,
    /// `(3/(3^n+2))^{1/n}`.
    pub target: f64,
    /// `⟨ψ(θ)^{⊗3}|r(T)|ψ(θ)^{⊗3}⟩` at the returned angle.
    pub value: f64,
    /// Orbit of `ψ(θ)^{⊗n}` against the Haar moment, when the check fits the caps.
    pub gap: Option<f64>,
}

/// `ψ(θ) = cos θ |0⟩ − sin θ |1⟩`.
pub fn qutrit_family(theta: f64) -> State {
    State::from_vec(vec![C::new(theta.cos(), 0.0), C::new(-theta.sin(), 0.0), C::new(0.0, 0.0)])
        .expect("unit vector")
}

fn qutrit_css_relation() -> Result<Relation> {
    let m = Modulus::new(3)?;
    let t = crate::commutant::css_t(&Subspace::span(&[vec![1, 1, 1]], 3, m))?;
    Ok(r_relation(&t.space))
}

/// `f(θ) = ⟨ψ(θ)^{⊗3}|r(T)|ψ(θ)^{⊗3}⟩` for the non-permutation qutrit subspace.
pub fn qutrit_design_function(theta: f64) -> Result<f64> {
    let psi = qutrit_family(theta).kron_power(3)?;
    Ok(qutrit_css_relation()?.expectation(&psi).re)
}

/// Angle for which the Clifford orbit of `ψ(θ)^{⊗n}` is a 3-design, by bisection on `[0, π/4]`.
pub fn qutrit_fiducial_search(n: usize) -> Result<QutritFiducial> {
    if n < 2 {
        return Err(Error::InvalidInput("the qutrit fiducial needs n ≥ 2".into()));
    }
    let target = (3.0 / (3f64.powi(n as i32) + 2.0)).powf(1.0 / n as f64);
    let rel = qutrit_css_relation()?;
    let f = |th: f64| -> Result<f64> { Ok(rel.expectation(&qutrit_family(th).kron_power(3)?).re - target) };
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_4);
    if f(lo)? <= 0.0 || f(hi)? >= 0.0 {
        return Err(Error::Invariant("target value is not bracketed".into()));
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let value = f(theta)? + target;
    let gap = if n <= 3 {
        let basis = CommutantBasis::new(3, 3, n)?;
        let psi = qutrit_family(theta).kron_power(n)?;
        Some(basis.frobenius_distance(&basis.orbit(&psi)?, &basis.haar()))
    } else {
        None
    };
    Ok(QutritFiducial { n, theta, target, value, gap })
}
