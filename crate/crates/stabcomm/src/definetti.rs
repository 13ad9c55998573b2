//! Gram matrices of stabilizer tensor powers and numerical checks of de Finetti
//! theorems for states with stabilizer symmetries.
//!
//! Pure `O_t`-invariant states are held as coefficient vectors `α` over the
//! powers `|S⟩^{⊗t}`. Their reduced states follow from
//! `Ψ_{1…s} = Σ α_S ᾱ_{S'} ⟨S'|S⟩^{t-s} |S⟩^{⊗s}⟨S'|^{⊗s}`, so `t` can be large
//! without ever forming a `d^{tn}`-dimensional vector.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::commutant::{anti_permutation, big_r_relation, enumerate_o, max_enumerable_t, AntiKind, Relation};
use crate::dense::{check_dim, digits, from_digits, hermitian_eigen, hermitian_fn, trace_norm_hermitian};
use crate::error::{Error, Result};
use crate::scalar::C;
use crate::stabilizer::{ensemble, Operator, State};

pub type CVec = DVector<C<f64>>;

/// Largest register on which tensor powers are materialized as dense vectors.
const DENSE_POWER_CAP: u128 = 1 << 14;

/// `d^{((n+2)² - t)/2}`.
pub fn gram_epsilon(n: usize, d: u32, t: usize) -> f64 {
    (d as f64).powf((((n + 2) * (n + 2)) as f64 - t as f64) / 2.0)
}

fn stab_vectors(n: usize, d: u32) -> Result<Vec<CVec>> {
    Ok(ensemble(n, d)?.states.iter().map(|s| s.vector.amps.clone()).collect())
}

/// `G_{SS'} = ⟨S|S'⟩^t`.
fn gram_of(states: &[CVec], t: usize) -> DMatrix<C<f64>> {
    let m = states.len();
    DMatrix::from_fn(m, m, |i, j| states[i].dotc(&states[j]).powi(t as i32))
}

fn power_vector(v: &CVec, t: usize) -> CVec {
    let mut out = CVec::from_element(1, C::new(1.0, 0.0));
    for _ in 0..t {
        out = out.kronecker(v);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct GramData {
    pub n: usize,
    pub d: u32,
    pub t: usize,
    pub size: usize,
    pub eps: f64,
    #[serde(skip)]
    pub g: DMatrix<C<f64>>,
    /// `max_{S≠S'} |⟨S|S'⟩|^t`.
    pub max_offdiag: f64,
    /// `‖G - I‖_∞`.
    pub g_minus_i: f64,
    pub rank: usize,
    /// Extreme nonzero eigenvalues of `Q = Σ_S |S⟩^{⊗t}⟨S|^{⊗t}`, from the singular
    /// values of the dense frame when it fits.
    pub q_spectrum: Option<(f64, f64)>,
    /// `max |⟨f_S|f_S'⟩ - δ|` for `f_S = (Q⁺)^{1/2}|S⟩^{⊗t}`.
    pub frame_error: Option<f64>,
    /// Whether the lemma's claims were asserted (they apply when `eps < 1/2`).
    pub claims_checked: bool,
}

/// Gram data for the stabilizer powers; errors if a claim fails while `eps < 1/2`.
pub fn gram(n: usize, d: u32, t: usize) -> Result<GramData> {
    let states = stab_vectors(n, d)?;
    let m = states.len();
    let g = gram_of(&states, t);
    let mut max_offdiag = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                max_offdiag = max_offdiag.max(g[(i, j)].norm());
            }
        }
    }
    let (vals, _) = hermitian_eigen(&Operator::new(g.clone()));
    let g_minus_i = vals.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    let rank = vals.iter().filter(|&&v| v > 1e-9).count();
    let eps = gram_epsilon(n, d, t);

    let (mut q_spectrum, mut frame_error) = (None, None);
    let local = (d as u128).pow(n as u32);
    if local.checked_pow(t as u32).is_some_and(|dim| dim <= DENSE_POWER_CAP) {
        let cols: Vec<CVec> = states.iter().map(|v| power_vector(v, t)).collect();
        let h = DMatrix::from_columns(&cols);
        let svd = h.svd(true, true);
        let sv: Vec<f64> = svd.singular_values.iter().copied().filter(|&s| s > 1e-9).collect();
        let sq: Vec<f64> = sv.iter().map(|s| s * s).collect();
        q_spectrum = Some((sq.iter().copied().fold(f64::INFINITY, f64::min), sq.iter().copied().fold(0.0, f64::max)));
        if sv.len() == m {
            // (Q⁺)^{1/2} H = U V†, whose columns are the frame vectors.
            let u = svd.u.as_ref().expect("requested");
            let vt = svd.v_t.as_ref().expect("requested");
            let frame = u * vt;
            let overlap = frame.adjoint() * &frame;
            frame_error = Some((overlap - DMatrix::identity(m, m)).iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
    }

    let claims_checked = eps < 0.5;
    if claims_checked {
        if g_minus_i > eps + 1e-12 || rank != m {
            return Err(Error::Invariant(format!("‖G - I‖ = {g_minus_i} exceeds ε = {eps}")));
        }
        if let Some((lo, hi)) = q_spectrum {
            if lo < 1.0 - eps - 1e-12 || hi > 1.0 + eps + 1e-12 || 1.0 / lo > 1.0 + 2.0 * eps || 1.0 / hi < 1.0 - 2.0 * eps {
                return Err(Error::Invariant(format!("Q spectrum [{lo}, {hi}] outside 1 ± ε")));
            }
        }
        if frame_error.is_some_and(|e| e > 1e-9) {
            return Err(Error::Invariant(format!("frame vectors not orthonormal: {frame_error:?}")));
        }
    }
    Ok(GramData { n, d, t, size: m, eps, g, max_offdiag, g_minus_i, rank, q_spectrum, frame_error, claims_checked })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    /// Every `R(O)` with `O ∈ O_t(d)`.
    FullO,
    /// Permutations together with the anti-identity on six blocks (`d = 2`).
    PermutationsAntiIdentity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Purity {
    Pure,
    Mixed,
}

#[derive(Clone, Debug)]
pub enum InputState {
    /// Density operator on `(C^{d^n})^{⊗t}`.
    Dense(Operator),
    /// Mixture `Σ_k w_k |ψ_k⟩⟨ψ_k|` of dense vectors on `(C^{d^n})^{⊗t}`.
    Vectors(Vec<(f64, State)>),
    /// Mixture `Σ_k w_k |Ψ_k⟩⟨Ψ_k|` with `Ψ_k = Σ_S α_S |S⟩^{⊗t}` normalized.
    StabPowers(Vec<(f64, CVec)>),
}

#[derive(Clone, Debug)]
pub struct SymmetricInput {
    pub t: usize,
    pub n: usize,
    pub d: u32,
    pub symmetry: Symmetry,
    pub state: InputState,
}

fn gaussian_vec<G: Rng + ?Sized>(len: usize, rng: &mut G) -> CVec {
    CVec::from_fn(len, |_, _| C::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// Gaussian coefficients over the `(n, d)` stabilizer states.
pub fn random_alpha<G: Rng + ?Sized>(n: usize, d: u32, rng: &mut G) -> Result<CVec> {
    Ok(gaussian_vec(ensemble(n, d)?.len(), rng))
}

/// Scales `α` so that `α† G α = 1`.
fn normalize_alpha(alpha: CVec, g: &DMatrix<C<f64>>) -> Result<CVec> {
    let norm2 = alpha.dotc(&(g * &alpha)).re;
    if norm2 <= 1e-300 {
        return Err(Error::InvalidInput("zero coefficient vector".into()));
    }
    Ok(alpha.unscale(norm2.sqrt()))
}

/// Pure state `Σ α_S |S⟩^{⊗t}` in coefficient form, normalized.
pub fn stab_power_input(n: usize, d: u32, t: usize, alpha: CVec) -> Result<SymmetricInput> {
    let g = gram_of(&stab_vectors(n, d)?, t);
    if alpha.len() != g.nrows() {
        return Err(Error::DimensionMismatch { expected: g.nrows(), found: alpha.len() });
    }
    let alpha = normalize_alpha(alpha, &g)?;
    Ok(SymmetricInput { t, n, d, symmetry: Symmetry::FullO, state: InputState::StabPowers(vec![(1.0, alpha)]) })
}

/// Orthonormal basis of `Sym^t(C^local)` as matrix columns.
fn symmetric_basis(local: usize, t: usize) -> Result<DMatrix<C<f64>>> {
    let dim = check_dim((local as u128).pow(t as u32))?;
    let mut classes: std::collections::BTreeMap<Vec<usize>, Vec<usize>> = Default::default();
    for i in 0..dim {
        let mut key = digits(i, local, t);
        key.sort_unstable();
        classes.entry(key).or_default().push(i);
    }
    let cols: Vec<CVec> = classes
        .values()
        .map(|idx| {
            let mut v = CVec::zeros(dim);
            let amp = 1.0 / (idx.len() as f64).sqrt();
            for &i in idx {
                v[i] = C::new(amp, 0.0);
            }
            v
        })
        .collect();
    Ok(DMatrix::from_columns(&cols))
}

/// Relation of the qubit anti-identity on the first six of `t` blocks.
fn anti_identity_relation(n: usize) -> Result<Relation> {
    let anti = anti_permutation(&[0, 1, 2, 3, 4, 5], 2, &AntiKind::Complement)?;
    big_r_relation(&anti.lagrangian().space, n)
}

/// `R` acting on the leading blocks of a longer register.
fn apply_on_prefix(rel: &Relation, v: &CVec) -> CVec {
    let rest = v.len() / rel.dim;
    let mut out = CVec::zeros(v.len());
    for &(r, c) in &rel.entries {
        for lo in 0..rest {
            out[r * rest + lo] += v[c * rest + lo];
        }
    }
    out
}

/// Orthonormal basis of symmetric vectors fixed by the anti-identity on six blocks.
fn anti_invariant_basis(n: usize, t: usize) -> Result<DMatrix<C<f64>>> {
    if t < 6 {
        return Err(Error::InvalidInput(format!("anti-identity symmetry needs t ≥ 6, got {t}")));
    }
    let b = symmetric_basis(1 << n, t)?;
    let rel = anti_identity_relation(n)?;
    let vb: Vec<CVec> = b.column_iter().map(|c| apply_on_prefix(&rel, &c.into_owned())).collect();
    let vb = DMatrix::from_columns(&vb);
    // Kernel of B†(I - V)B inside the symmetric subspace.
    let m = b.adjoint() * (&b - vb);
    let m = (&m + m.adjoint()) * C::new(0.5, 0.0);
    let (vals, vecs) = hermitian_eigen(&Operator::new(m));
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].abs() < 1e-9).collect();
    let k = DMatrix::from_fn(vecs.nrows(), keep.len(), |r, c| vecs[(r, keep[c])]);
    Ok(b * k)
}

/// Random state with the declared symmetry.
///
/// Pure `FullO` inputs are projections of random vectors onto the span of the
/// stabilizer powers (Gaussian coefficients once the register is too large).
/// Mixed `FullO` inputs are group twirls `|O_t|⁻¹ Σ R(O) ρ R(O)†` of a random
/// pure state. `PermutationsAntiIdentity` inputs are built from the joint fixed
/// space of the symmetric group and the anti-identity.
pub fn make_invariant_state<G: Rng + ?Sized>(
    t: usize,
    n: usize,
    d: u32,
    symmetry: Symmetry,
    purity: Purity,
    rng: &mut G,
) -> Result<SymmetricInput> {
    let local = (d as u128).pow(n as u32);
    let state = match (symmetry, purity) {
        (Symmetry::FullO, Purity::Pure) => {
            let states = stab_vectors(n, d)?;
            let g = gram_of(&states, t);
            let alpha = match local.checked_pow(t as u32) {
                Some(dim) if dim <= DENSE_POWER_CAP => {
                    let psi = gaussian_vec(dim as usize, rng);
                    let b = CVec::from_iterator(states.len(), states.iter().map(|s| power_vector(s, t).dotc(&psi)));
                    g.clone().lu().solve(&b).ok_or_else(|| Error::Singular("stabilizer powers are dependent".into()))?
                }
                _ => gaussian_vec(states.len(), rng),
            };
            InputState::StabPowers(vec![(1.0, normalize_alpha(alpha, &g)?)])
        }
        (Symmetry::FullO, Purity::Mixed) => {
            if t > max_enumerable_t(d) {
                return Err(Error::CapExceeded { requested: t as u128, cap: max_enumerable_t(d) as u128 });
            }
            let dim = check_dim(local.pow(t as u32))?;
            let psi = State::random(dim, rng);
            let rho = psi.projector();
            let group = enumerate_o(t, d)?;
            let mut out = Operator::zeros(dim);
            for o in group.iter() {
                let rel = big_r_relation(&o.lagrangian().space, n)?;
                // R is a permutation matrix: (R ρ R†)[π(i), π(j)] = ρ[i, j].
                let mut img = vec![0; dim];
                for &(r, c) in &rel.entries {
                    img[c] = r;
                }
                for i in 0..dim {
                    for j in 0..dim {
                        out.mat[(img[i], img[j])] += rho.mat[(i, j)];
                    }
                }
            }
            InputState::Dense(out.scale(C::new(1.0 / group.len() as f64, 0.0)))
        }
        (Symmetry::PermutationsAntiIdentity, _) => {
            if d != 2 {
                return Err(Error::InvalidInput("the anti-identity symmetry is defined for qubits".into()));
            }
            let k = anti_invariant_basis(n, t)?;
            let components = if purity == Purity::Pure { 1 } else { 3 };
            let mut parts = Vec::with_capacity(components);
            for _ in 0..components {
                parts.push((1.0 / components as f64, State::new(&k * gaussian_vec(k.ncols(), rng))?));
            }
            InputState::Vectors(parts)
        }
    };
    Ok(SymmetricInput { t, n, d, symmetry, state })
}

impl SymmetricInput {
    /// Largest deviation from invariance under the declared generators.
    pub fn symmetry_defect(&self) -> Result<f64> {
        let gens = self.generators()?;
        let mut worst = 0.0f64;
        match &self.state {
            InputState::StabPowers(_) => {}
            InputState::Dense(rho) => {
                for g in &gens {
                    // g is a permutation matrix: (g ρ g†)[π(i), π(j)] = ρ[i, j].
                    let mut img = vec![0; rho.dim()];
                    let rest = rho.dim() / g.dim;
                    for &(r, c) in &g.entries {
                        for lo in 0..rest {
                            img[c * rest + lo] = r * rest + lo;
                        }
                    }
                    for i in 0..rho.dim() {
                        for j in 0..rho.dim() {
                            worst = worst.max((rho.mat[(img[i], img[j])] - rho.mat[(i, j)]).norm());
                        }
                    }
                }
            }
            InputState::Vectors(parts) => {
                for g in &gens {
                    for (_, v) in parts {
                        worst = worst.max((apply_on_prefix(g, &v.amps) - &v.amps).norm());
                    }
                }
            }
        }
        Ok(worst)
    }

    fn generators(&self) -> Result<Vec<Relation>> {
        let mut gens = Vec::new();
        match self.symmetry {
            Symmetry::FullO => {
                for o in enumerate_o(self.t, self.d)?.iter() {
                    gens.push(big_r_relation(&o.lagrangian().space, self.n)?);
                }
            }
            Symmetry::PermutationsAntiIdentity => {
                for i in 0..self.t - 1 {
                    let mut pi: Vec<usize> = (0..self.t).collect();
                    pi.swap(i, i + 1);
                    let o = crate::commutant::StochasticIsometry::permutation(&pi, self.d)?;
                    gens.push(big_r_relation(&o.lagrangian().space, self.n)?);
                }
                gens.push(anti_identity_relation(self.n)?);
            }
        }
        Ok(gens)
    }

    pub fn local_dim(&self) -> usize {
        (self.d as usize).pow(self.n as u32)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub alpha: Vec<[f64; 2]>,
    pub alpha_norm2: f64,
    /// `‖Ψ - Σ α_S |S⟩^{⊗t}‖`.
    pub residual: f64,
    pub eps: f64,
}

/// Coefficients of `Ψ` over the stabilizer powers via `α = G⁻¹ (⟨S^{⊗t}|Ψ⟩)_S`.
pub fn stab_power_decompose(psi: &State, n: usize, d: u32, t: usize) -> Result<Decomposition> {
    let eps = gram_epsilon(n, d, t);
    if eps >= 0.5 {
        return Err(Error::InvalidInput(format!("ε = {eps} is not below 1/2")));
    }
    decompose(psi, n, d, t)
}

/// Least-squares coefficients over the stabilizer powers; the pseudo-inverse
/// covers the regime where the powers are dependent.
fn decompose(psi: &State, n: usize, d: u32, t: usize) -> Result<Decomposition> {
    let states = stab_vectors(n, d)?;
    let local = (d as u128).pow(n as u32);
    let dim = local.checked_pow(t as u32).ok_or(Error::CapExceeded { requested: u128::MAX, cap: DENSE_POWER_CAP })?;
    if dim != psi.dim() as u128 {
        return Err(Error::DimensionMismatch { expected: dim as usize, found: psi.dim() });
    }
    let powers: Vec<CVec> = states.iter().map(|s| power_vector(s, t)).collect();
    let g = gram_of(&states, t);
    let b = CVec::from_iterator(powers.len(), powers.iter().map(|p| p.dotc(&psi.amps)));
    let alpha = g.svd(true, true).solve(&b, 1e-10).map_err(|e| Error::Singular(e.to_string()))?;
    let recon = powers.iter().zip(alpha.iter()).fold(CVec::zeros(psi.dim()), |acc, (p, &a)| acc + p * a);
    let residual = (&psi.amps - recon).norm();
    if residual > 1e-8 {
        return Err(Error::NotContained);
    }
    let alpha_norm2 = alpha.norm_squared();
    Ok(Decomposition { alpha: alpha.iter().map(|z| [z.re, z.im]).collect(), alpha_norm2, residual, eps: gram_epsilon(n, d, t) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Exp,
    Anti,
}

#[derive(Clone, Debug, Serialize)]
pub struct DeFinettiReport {
    pub variant: Variant,
    pub route: String,
    pub n: usize,
    pub d: u32,
    pub t: usize,
    pub s: usize,
    pub eps: f64,
    /// Bound asserted on the measured trace distance.
    pub bound: f64,
    /// The tighter bound for pure inputs, when it differs.
    pub pure_bound: Option<f64>,
    pub measured: f64,
    /// Trace norm of the off-diagonal part of the Gram expansion.
    pub cross_term: Option<f64>,
    pub cross_term_bound: Option<f64>,
    pub vacuous: bool,
    pub passed: bool,
}

fn half_trace_distance(a: &Operator, b: &Operator) -> f64 {
    let diff = a.sub(b);
    let herm = Operator::new((&diff.mat + diff.mat.adjoint()) * C::new(0.5, 0.0));
    0.5 * trace_norm_hermitian(&herm)
}

/// `tr_{s+1…t} ρ` for a dense operator on `t` blocks.
fn partial_trace_dense(rho: &Operator, block: usize, t: usize, s: usize) -> Operator {
    let keep = block.pow(s as u32);
    let rest = block.pow((t - s) as u32);
    Operator::from_fn(keep, |i, j| (0..rest).fold(C::new(0.0, 0.0), |acc, k| acc + rho.mat[(i * rest + k, j * rest + k)]))
}

/// `vec(B) = Σ_{ij} B_{ij} |i⟩|j⟩`.
pub fn vectorize(b: &Operator) -> CVec {
    let dim = b.dim();
    CVec::from_fn(dim * dim, |k, _| b.mat[(k / dim, k % dim)])
}

/// Standard purification `vec(ρ^{1/2})`.
pub fn purify(rho: &Operator) -> Result<State> {
    let (vals, _) = hermitian_eigen(rho);
    if !rho.is_hermitian(1e-9) || vals.first().is_some_and(|&v| v < -1e-9) {
        return Err(Error::InvalidInput("operator is not positive semidefinite".into()));
    }
    // Clamp round-off eigenvalues so their square roots do not amplify noise.
    let root = hermitian_fn(rho, |x| if x < 1e-12 { 0.0 } else { x.sqrt() });
    State::new(vectorize(&root))
}

/// Purification of a `t`-block state, regrouped so that each block carries its
/// own purifying copy: `(C^D ⊗ C^D)^{⊗t}`.
fn blockwise_purification(rho: &Operator, local: usize, t: usize) -> Result<State> {
    let flat = purify(rho)?;
    let dim = rho.dim();
    let mut out = CVec::zeros(dim * dim);
    for (k, &a) in flat.amps.iter().enumerate() {
        let (i, j) = (digits(k / dim, local, t), digits(k % dim, local, t));
        let pairs: Vec<usize> = i.iter().zip(&j).map(|(&x, &y)| x * local + y).collect();
        out[from_digits(&pairs, local * local)] = a;
    }
    State::new(out)
}

fn dense_power_projector(v: &CVec, s: usize) -> Operator {
    let p = power_vector(v, s);
    Operator::new(&p * p.adjoint())
}

/// Exponential de Finetti check for `O_t`-symmetric inputs.
///
/// Coefficient-form inputs use `p(S) ∝ |α_S|²` and the Gram expansion of the
/// reduced state, with bound `2 d^{(n+2)²/2} d^{-(t-s)/2}`. Dense inputs go
/// through the blockwise purification on `2n` qudits and are compared with
/// mixtures of the reduced stabilizer states, with bound
/// `2 d^{(2n+2)²/2} d^{-(t-s)/2}`.
pub fn exp_definetti_check(input: &SymmetricInput, s: usize) -> Result<DeFinettiReport> {
    let SymmetricInput { t, n, d, .. } = *input;
    if input.symmetry != Symmetry::FullO {
        return Err(Error::InvalidInput("exponential de Finetti needs the full O_t symmetry".into()));
    }
    if s == 0 || s > t {
        return Err(Error::InvalidInput(format!("need 1 ≤ s ≤ t, got s={s}, t={t}")));
    }
    let local = input.local_dim();
    check_dim((local as u128).pow(s as u32))?;
    let decay = (d as f64).powf(-((t - s) as f64) / 2.0);
    match &input.state {
        InputState::Vectors(parts) => {
            let mut converted = Vec::with_capacity(parts.len());
            for (w, v) in parts {
                let dec = stab_power_decompose(v, n, d, t)?;
                converted.push((*w, CVec::from_iterator(dec.alpha.len(), dec.alpha.iter().map(|a| C::new(a[0], a[1])))));
            }
            let as_powers = SymmetricInput { state: InputState::StabPowers(converted), ..input.clone() };
            let mut rep = exp_definetti_check(&as_powers, s)?;
            rep.route = "decomposed".into();
            Ok(rep)
        }
        InputState::StabPowers(parts) => {
            let states = stab_vectors(n, d)?;
            let m = states.len();
            let bound = 2.0 * (d as f64).powf(((n + 2) * (n + 2)) as f64 / 2.0) * decay;
            let projs: Vec<CVec> = states.iter().map(|v| power_vector(v, s)).collect();
            let overlaps = DMatrix::from_fn(m, m, |i, j| states[j].dotc(&states[i]).powi((t - s) as i32));
            let dim = projs[0].len();
            let (mut reduced, mut approx) = (Operator::zeros(dim), Operator::zeros(dim));
            let mut cross_max = 0.0f64;
            for (w, alpha) in parts {
                let mut cross = Operator::zeros(dim);
                for i in 0..m {
                    for j in 0..m {
                        let c = alpha[i] * alpha[j].conj() * overlaps[(i, j)];
                        if c.norm() < 1e-300 {
                            continue;
                        }
                        let term = &projs[i] * projs[j].adjoint() * c;
                        if i == j {
                            reduced.mat += term * C::new(*w, 0.0);
                        } else {
                            cross.mat += &term;
                            reduced.mat += term * C::new(*w, 0.0);
                        }
                    }
                }
                let herm = Operator::new((&cross.mat + cross.mat.adjoint()) * C::new(0.5, 0.0));
                cross_max = cross_max.max(trace_norm_hermitian(&herm));
                let total = alpha.norm_squared();
                for i in 0..m {
                    approx.mat += &projs[i] * projs[i].adjoint() * C::new(w * alpha[i].norm_sqr() / total, 0.0);
                }
            }
            let measured = half_trace_distance(&reduced, &approx);
            Ok(DeFinettiReport {
                variant: Variant::Exp,
                route: "gram".into(),
                n,
                d,
                t,
                s,
                eps: gram_epsilon(n, d, t),
                bound,
                pure_bound: None,
                measured,
                cross_term: Some(cross_max),
                cross_term_bound: Some(bound),
                vacuous: bound >= 1.0,
                passed: measured <= bound + 1e-10 && cross_max <= bound + 1e-10,
            })
        }
        InputState::Dense(rho) => {
            let pur = blockwise_purification(rho, local, t)?;
            let dec = decompose(&pur, 2 * n, d, t)?;
            let doubled = stab_vectors(2 * n, d)?;
            let total = dec.alpha_norm2;
            let mut approx = Operator::zeros(local.pow(s as u32));
            for (v, a) in doubled.iter().zip(&dec.alpha) {
                let p = (a[0] * a[0] + a[1] * a[1]) / total;
                if p < 1e-15 {
                    continue;
                }
                // σ_S = tr_purifier |S⟩⟨S|.
                let mm = DMatrix::from_fn(local, local, |i, j| v[i * local + j]);
                let sigma = Operator::new(&mm * mm.adjoint());
                approx = approx.add(&crate::dense::kron_power(&sigma, s)?.scale(C::new(p, 0.0)));
            }
            let reduced = partial_trace_dense(rho, local, t, s);
            let measured = half_trace_distance(&reduced, &approx);
            let bound = 2.0 * (d as f64).powf(((2 * n + 2) * (2 * n + 2)) as f64 / 2.0) * decay;
            Ok(DeFinettiReport {
                variant: Variant::Exp,
                route: "purification".into(),
                n,
                d,
                t,
                s,
                eps: gram_epsilon(2 * n, d, t),
                bound,
                pure_bound: Some(2.0 * (d as f64).powf(((n + 2) * (n + 2)) as f64 / 2.0) * decay),
                measured,
                cross_term: None,
                cross_term_bound: None,
                vacuous: bound >= 1.0,
                passed: measured <= bound + 1e-10,
            })
        }
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (mut acc, mut theta) = (0.0, 0.0);
    for (k, &x) in u.iter().enumerate() {
        acc += x;
        let cand = (acc - 1.0) / (k + 1) as f64;
        if x - cand > 0.0 {
            theta = cand;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Mixture `p` over `|S⟩^{⊗s}` minimizing the Frobenius distance to `rho`,
/// by projected gradient on the simplex.
fn fit_mixture(rho: &Operator, projs: &[Operator]) -> Vec<f64> {
    let m = projs.len();
    let gm = DMatrix::from_fn(m, m, |i, j| projs[i].hs_inner(&projs[j]).re);
    let c: Vec<f64> = projs.iter().map(|p| p.hs_inner(rho).re).collect();
    let lmax = hermitian_eigen(&Operator::new(gm.map(|x| C::new(x, 0.0)))).0.last().copied().unwrap_or(1.0);
    let step = 1.0 / lmax.max(1e-12);
    let mut p = vec![1.0 / m as f64; m];
    for _ in 0..5000 {
        let grad: Vec<f64> = (0..m).map(|i| (0..m).map(|j| gm[(i, j)] * p[j]).sum::<f64>() - c[i]).collect();
        let mut next: Vec<f64> = p.iter().zip(&grad).map(|(x, g)| x - step * g).collect();
        project_simplex(&mut next);
        let delta: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        p = next;
        if delta < 1e-14 {
            break;
        }
    }
    p
}

/// De Finetti check under permutations plus the qubit anti-identity: fits the
/// closest mixture of stabilizer powers to `ρ_{1…s}` and compares with
/// `6√2·2^n √(s/t)`.
pub fn anti_definetti_check(input: &SymmetricInput, s: usize) -> Result<DeFinettiReport> {
    let SymmetricInput { t, n, d, .. } = *input;
    if d != 2 {
        return Err(Error::InvalidInput("the anti-identity check is for qubits".into()));
    }
    if s == 0 || !s.is_multiple_of(6) || s >= t {
        return Err(Error::InvalidInput(format!("need s a positive multiple of 6 below t, got s={s}, t={t}")));
    }
    let local = input.local_dim();
    check_dim((local as u128).pow(s as u32))?;
    let states = stab_vectors(n, d)?;
    let projs: Vec<Operator> = states.iter().map(|v| dense_power_projector(v, s)).collect();
    let reduced = match &input.state {
        InputState::Dense(rho) => partial_trace_dense(rho, local, t, s),
        InputState::Vectors(parts) => {
            let keep = local.pow(s as u32);
            let mut out = Operator::zeros(keep);
            for (w, v) in parts {
                let rest = v.dim() / keep;
                let m = DMatrix::from_fn(keep, rest, |i, j| v.amps[i * rest + j]);
                out.mat += &m * m.adjoint() * C::new(*w, 0.0);
            }
            out
        }
        InputState::StabPowers(_) => {
            return Err(Error::InvalidInput("coefficient-form inputs carry the full O_t symmetry; use the exp check".into()))
        }
    };
    let p = fit_mixture(&reduced, &projs);
    let approx = projs.iter().zip(&p).fold(Operator::zeros(reduced.dim()), |acc, (pr, &w)| acc.add(&pr.scale(C::new(w, 0.0))));
    let measured = half_trace_distance(&reduced, &approx);
    let ratio = (s as f64 / t as f64).sqrt();
    let bound = 6.0 * 2f64.sqrt() * 2f64.powi(n as i32) * ratio;
    Ok(DeFinettiReport {
        variant: Variant::Anti,
        route: "simplex-fit".into(),
        n,
        d,
        t,
        s,
        eps: gram_epsilon(n, d, t),
        bound,
        pure_bound: Some(6.0 * 2f64.powi(n as i32 + 1).sqrt() * ratio),
        measured,
        cross_term: None,
        cross_term_bound: None,
        vacuous: bound >= 1.0,
        passed: measured <= bound + 1e-10,
    })
}

/// Measured exponential de Finetti distance over a sweep of `t` at fixed
/// coefficients, with the least-squares slope of `ln(distance)` against `t - s`.
pub fn exp_definetti_sweep(n: usize, d: u32, s: usize, ts: &[usize], alpha: &CVec) -> Result<(Vec<f64>, f64)> {
    let mut dists = Vec::with_capacity(ts.len());
    for &t in ts {
        let input = stab_power_input(n, d, t, alpha.clone())?;
        dists.push(exp_definetti_check(&input, s)?.measured);
    }
    let xs: Vec<f64> = ts.iter().map(|&t| (t - s) as f64).collect();
    let ys: Vec<f64> = dists.iter().map(|v| v.max(1e-300).ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok((dists, num / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commutant::minimal_projector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gram_lemma_qubit() {
        for t in [20, 24, 30] {
            let g = gram(1, 2, t).unwrap();
            assert!(g.claims_checked && g.rank == 6);
            assert!(g.g_minus_i <= g.eps);
            assert!((g.max_offdiag - 2f64.powf(-(t as f64) / 2.0)).abs() < 1e-15);
        }
        assert!((gram_epsilon(1, 2, 20) - 2f64.powf(-5.5)).abs() < 1e-15);
        let g = gram(1, 2, 12).unwrap();
        let (lo, hi) = g.q_spectrum.unwrap();
        assert!(lo >= 1.0 - g.eps && hi <= 1.0 + g.eps);
        assert!(g.frame_error.unwrap() < 1e-9);
        let offs: Vec<f64> = (10..20).map(|t| gram(1, 2, t).unwrap().max_offdiag).collect();
        assert!(offs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn purification() {
        let p = purify(&State::basis(2, 0).projector()).unwrap();
        assert!((p.amps[0].re - 1.0).abs() < 1e-12);
        let p = purify(&Operator::identity(3).scale(C::new(1.0 / 3.0, 0.0))).unwrap();
        for k in 0..9 {
            let want = if k % 4 == 0 { 1.0 / 3f64.sqrt() } else { 0.0 };
            assert!((p.amps[k].re - want).abs() < 1e-12);
        }
        let mut bad = Operator::identity(2);
        bad.mat[(1, 1)] = C::new(-1.0, 0.0);
        assert!(purify(&bad).is_err());

        // (O ⊗ O)|Ψ⟩ = |Ψ⟩ iff [ρ, O] = 0, for permutation matrices O.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let dim = 4;
        for trial in 0..100 {
            let pi = [1usize, 0, 3, 2];
            let o = Operator::from_fn(dim, |i, j| C::new(if pi[j] == i { 1.0 } else { 0.0 }, 0.0));
            let raw = State::random(dim, &mut rng).projector();
            let rho = if trial % 2 == 0 { raw.add(&o.mul(&raw).mul(&o.adjoint())).scale(C::new(0.5, 0.0)) } else { raw };
            let psi = purify(&rho).unwrap();
            let oo = o.kron(&o).unwrap();
            let fixed = (oo.apply(&psi).amps - &psi.amps).norm() < 1e-8;
            let commutes = o.mul(&rho).sub(&rho.mul(&o)).max_abs() < 1e-8;
            assert_eq!(fixed, commutes);
            assert_eq!(commutes, trial % 2 == 0);
        }
    }

    #[test]
    fn invariant_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let input = make_invariant_state(6, 1, 2, Symmetry::FullO, Purity::Mixed, &mut rng).unwrap();
        assert!(input.symmetry_defect().unwrap() < 1e-9);
        let input = make_invariant_state(12, 1, 2, Symmetry::PermutationsAntiIdentity, Purity::Pure, &mut rng).unwrap();
        assert!(input.symmetry_defect().unwrap() < 1e-9);

        // Pure FullO states lie in the span of stabilizer powers; symmetric
        // anti-identity states at t = 6 as well, since that group is all of O_6.
        let pmin = minimal_projector(6, 1, 2).unwrap();
        let InputState::StabPowers(parts) = make_invariant_state(6, 1, 2, Symmetry::FullO, Purity::Pure, &mut rng).unwrap().state else {
            panic!()
        };
        let states = stab_vectors(1, 2).unwrap();
        let psi = states.iter().zip(parts[0].1.iter()).fold(CVec::zeros(64), |acc, (v, &a)| acc + power_vector(v, 6) * a);
        assert!((psi.norm() - 1.0).abs() < 1e-10);
        assert!((&pmin.mat * &psi - &psi).norm() < 1e-10);

        // Symmetric states alone are not in that span.
        let sym = symmetric_basis(2, 6).unwrap();
        let v = State::new(&sym * gaussian_vec(sym.ncols(), &mut rng)).unwrap();
        assert!((&pmin.mat * &v.amps - &v.amps).norm() > 1e-3);

        let a = make_invariant_state(6, 1, 2, Symmetry::FullO, Purity::Mixed, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = make_invariant_state(6, 1, 2, Symmetry::FullO, Purity::Mixed, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let (InputState::Dense(x), InputState::Dense(y)) = (a.state, b.state) else { panic!() };
        assert_eq!(x.mat, y.mat);
    }

    #[test]
    fn decomposition() {
        let states = stab_vectors(1, 2).unwrap();
        let t = 12;
        let psi = State::new(power_vector(&states[2], t)).unwrap();
        let dec = stab_power_decompose(&psi, 1, 2, t).unwrap();
        for (i, a) in dec.alpha.iter().enumerate() {
            let want = if i == 2 { 1.0 } else { 0.0 };
            assert!((a[0] - want).abs() < 1e-3 && a[1].abs() < 1e-3);
        }
        let two = State::new(power_vector(&states[0], t) + power_vector(&states[3], t)).unwrap();
        let dec = stab_power_decompose(&two, 1, 2, t).unwrap();
        let mut mags: Vec<f64> = dec.alpha.iter().map(|a| a[0].hypot(a[1])).collect();
        mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!(mags[1] > 0.6 && mags[2] < 0.05);
        assert!((dec.alpha_norm2 - 1.0).abs() <= 2.0 * dec.eps);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(stab_power_decompose(&State::random(1 << t, &mut rng), 1, 2, t).is_err());
    }

    #[test]
    fn exponential_de_finetti() {
        let mut alpha = CVec::zeros(6);
        alpha[1] = C::new(1.0, 0.0);
        let exact = exp_definetti_check(&stab_power_input(1, 2, 24, alpha).unwrap(), 2).unwrap();
        assert!(exact.measured < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let input = make_invariant_state(24, 1, 2, Symmetry::FullO, Purity::Pure, &mut rng).unwrap();
        let r = exp_definetti_check(&input, 2).unwrap();
        assert!(r.passed && !r.vacuous, "{r:?}");
        assert!((r.bound - 2.0 * 2f64.powf(4.5) * 2f64.powi(-11)).abs() < 1e-12);
        let mixed = make_invariant_state(6, 1, 2, Symmetry::FullO, Purity::Mixed, &mut rng).unwrap();
        let r = exp_definetti_check(&mixed, 2).unwrap();
        assert!(r.passed && r.vacuous && r.route == "purification");
    }

    #[test]
    fn anti_identity_de_finetti() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let input = make_invariant_state(12, 1, 2, Symmetry::PermutationsAntiIdentity, Purity::Pure, &mut rng).unwrap();
        let r = anti_definetti_check(&input, 6).unwrap();
        assert!(r.vacuous && (r.bound - 12.0).abs() < 1e-12);
        assert!(r.passed && r.measured < 1.0);
        let s = stab_vectors(1, 2).unwrap()[4].clone();
        let exact = SymmetricInput {
            t: 12,
            n: 1,
            d: 2,
            symmetry: Symmetry::PermutationsAntiIdentity,
            state: InputState::Vectors(vec![(1.0, State::new(power_vector(&s, 12)).unwrap())]),
        };
        assert!(anti_definetti_check(&exact, 6).unwrap().measured < 1e-6);
    }

    #[test]
    fn decay_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alpha = gaussian_vec(6, &mut rng);
        // Overlap phases repeat with period 8 in t, so compare every eighth point.
        let ts: Vec<usize> = (4..=60).step_by(8).collect();
        let (dists, slope) = exp_definetti_sweep(1, 2, 2, &ts, &alpha).unwrap();
        assert!(dists.windows(2).all(|w| w[1] <= w[0]), "{dists:?}");
        assert!(slope <= -0.34, "{slope}");
    }
}
