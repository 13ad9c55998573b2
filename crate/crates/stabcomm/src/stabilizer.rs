//! Lagrangian subspaces, stabilizer states and the stabilizer measurement channel.
//!
//! Each state is `W_z |M, f₀⟩`, where `|M, f₀⟩` is the joint +1 eigenvector of
//! `W_g` for the canonical basis rows `g` of `M`, and `z` runs over the
//! lexicographically least representatives of `Z_d^{2n} / M`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigUint;
use rand::Rng;
use serde::Serialize;

use crate::dense::{check_dim, DenseOperator, PureState};
use crate::error::{Error, Result};
use crate::gf_linalg::{all_subspaces, gaussian_binomial, is_symplectic_isotropic, GfVector, Modulus, Subspace};
use crate::phase_space::{weyl_monomial, Monomial};
use crate::scalar::C;

pub type State = PureState<f64>;
pub type Operator = DenseOperator<f64>;

/// Largest number of candidate `n`-dimensional subspaces we are willing to scan.
const LAGRANGIAN_SCAN_CAP: u64 = 100_000;

#[derive(Clone, Debug)]
pub struct StabilizerState {
    pub n: usize,
    pub d: u32,
    pub m: Subspace,
    pub z: GfVector,
    pub vector: State,
}

#[derive(Clone, Debug)]
pub struct StabilizerEnsemble {
    pub n: usize,
    pub d: u32,
    pub states: Vec<StabilizerState>,
}

/// `d^n ∏_{i=1}^n (d^i + 1)`.
pub fn ensemble_size(n: usize, d: u32) -> BigUint {
    let q = BigUint::from(d);
    let mut out = q.pow(n as u32);
    for i in 1..=n as u32 {
        out *= q.pow(i) + 1u32;
    }
    out
}

/// `∏_{i=1}^n (d^i + 1)`.
pub fn lagrangian_count(n: usize, d: u32) -> BigUint {
    let q = BigUint::from(d);
    (1..=n as u32).map(|i| q.pow(i) + 1u32).product()
}

fn check_envelope(n: usize, d: u32) -> Result<Modulus> {
    let m = Modulus::new(d)?;
    let scan = gaussian_binomial(2 * n as u32, n as u32, d);
    if n == 0 || scan > BigUint::from(LAGRANGIAN_SCAN_CAP) {
        return Err(Error::Infeasible(format!("stabilizer enumeration at n={n}, d={d}")));
    }
    check_dim((d as u128).pow(n as u32))?;
    Ok(m)
}

/// All Lagrangian subspaces of `Z_d^{2n}`, sorted by canonical basis.
pub fn enumerate_lagrangians(n: usize, d: u32) -> Result<Vec<Subspace>> {
    let m = check_envelope(n, d)?;
    Ok(all_subspaces(2 * n, n, m).into_iter().filter(is_symplectic_isotropic).collect())
}

/// Projector onto the joint +1 eigenspace of `W_g` for the basis rows of an
/// isotropic subspace. Has rank `d^n / |S|`.
pub fn stabilizer_projector(iso: &Subspace, n: usize) -> Result<Operator> {
    if !is_symplectic_isotropic(iso) {
        return Err(Error::InvalidInput("subspace is not symplectically isotropic".into()));
    }
    let d = iso.d;
    let dim = check_dim((d as u128).pow(n as u32))?;
    let mut p = Operator::identity(dim);
    for g in &iso.basis {
        let w: Monomial<f64> = weyl_monomial(d, g);
        // (1/d) Σ_k W_g^k
        let mut avg = Operator::zeros(dim);
        let mut power = Operator::identity(dim);
        let wd = w.to_dense();
        for _ in 0..d {
            avg = avg.add(&power);
            power = wd.mul(&power);
        }
        p = p.mul(&avg.scale(C::new(1.0 / d as f64, 0.0)));
    }
    Ok(p)
}

/// `|M, f₀⟩` for a Lagrangian `M`.
pub fn reference_state(m: &Subspace) -> Result<StabilizerState> {
    let n = m.ambient / 2;
    if m.dim() != n || !is_symplectic_isotropic(m) {
        return Err(Error::InvalidInput("subspace is not Lagrangian".into()));
    }
    let p = stabilizer_projector(m, n)?;
    let tr = p.trace();
    if (tr - C::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::Invariant(format!("stabilizer projector has trace {tr}")));
    }
    let col = (0..p.dim())
        .max_by(|&a, &b| p.mat.column(a).norm().partial_cmp(&p.mat.column(b).norm()).unwrap())
        .unwrap();
    let v = State::new(p.mat.column(col).into_owned())?;
    Ok(StabilizerState { n, d: m.d, m: m.clone(), z: vec![0; 2 * n], vector: fix_phase(v) })
}

/// Rotate the global phase so the first entry of largest modulus is real positive.
pub fn fix_phase(v: State) -> State {
    let max = v.amps.iter().fold(0.0f64, |a, x| a.max(x.norm()));
    let lead = v.amps.iter().find(|x| x.norm() > max - 1e-9).copied().unwrap();
    let rot = lead.conj() / lead.norm();
    State { amps: v.amps.map(|x| x * rot) }
}

/// Every stabilizer state of `n` qudits, Lagrangians in canonical order and
/// translates in lexicographic order of `z`.
pub fn enumerate_stabilizer_states(n: usize, d: u32) -> Result<StabilizerEnsemble> {
    let m = Modulus::new(d)?;
    let full = Subspace::full(2 * n, m);
    let mut states = Vec::new();
    for lag in enumerate_lagrangians(n, d)? {
        let reference = reference_state(&lag)?;
        for z in full.coset_reps(&lag)? {
            let vector = weyl_monomial::<f64>(d, &z).apply(&reference.vector);
            states.push(StabilizerState { n, d, m: lag.clone(), z, vector });
        }
    }
    Ok(StabilizerEnsemble { n, d, states })
}

type EnsembleCache = Mutex<HashMap<(usize, u32), Arc<StabilizerEnsemble>>>;

/// Shared, lazily built ensemble.
pub fn ensemble(n: usize, d: u32) -> Result<Arc<StabilizerEnsemble>> {
    static CACHE: OnceLock<EnsembleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(e) = cache.lock().unwrap().get(&(n, d)) {
        return Ok(e.clone());
    }
    let e = Arc::new(enumerate_stabilizer_states(n, d)?);
    cache.lock().unwrap().insert((n, d), e.clone());
    Ok(e)
}

impl StabilizerEnsemble {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// `max_S |⟨S|ψ⟩|²` with the first maximizer in enumeration order.
    pub fn max_overlap(&self, psi: &State) -> Result<(usize, f64)> {
        let dim = (self.d as usize).pow(self.n as u32);
        if psi.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: psi.dim() });
        }
        let mut best = (0, -1.0);
        for (i, s) in self.states.iter().enumerate() {
            let v = s.vector.inner(psi).norm_sqr();
            if v > best.1 + 1e-12 {
                best = (i, v);
            }
        }
        Ok(best)
    }

    pub fn sample<G: Rng + ?Sized>(&self, rng: &mut G) -> &StabilizerState {
        &self.states[rng.gen_range(0..self.states.len())]
    }

    /// One JSON record per line: `{M, z, amplitudes}`.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            #[serde(rename = "M")]
            m: &'a Subspace,
            z: &'a [u32],
            amplitudes: Vec<[f64; 2]>,
        }
        let mut out = String::new();
        for s in &self.states {
            let rec = Record { m: &s.m, z: &s.z, amplitudes: s.vector.amps.iter().map(|a| [a.re, a.im]).collect() };
            out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }
}

/// `max_S |⟨S|ψ⟩|²` over the full ensemble of the matching size.
pub fn max_stabilizer_overlap(psi: &State, d: u32) -> Result<(StabilizerState, f64)> {
    let n = crate::phase_space::qudit_count(psi.dim(), d)?;
    let ens = ensemble(n, d)?;
    let (i, v) = ens.max_overlap(psi)?;
    Ok((ens.states[i].clone(), v))
}

/// Uniform draw from the ensemble using the caller's generator.
pub fn sample_stabilizer<G: Rng + ?Sized>(n: usize, d: u32, rng: &mut G) -> Result<StabilizerState> {
    Ok(ensemble(n, d)?.sample(rng).clone())
}

/// `Λ_M[ρ] = d^{-n} Σ_{x ∈ M} W_x ρ W_x†`.
pub fn measurement_channel(m: &Subspace, rho: &Operator) -> Result<Operator> {
    let n = m.ambient / 2;
    let dim = (m.d as usize).pow(n as u32);
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho.dim() });
    }
    let mut out = Operator::zeros(dim);
    for x in m.elements() {
        let w = weyl_monomial::<f64>(m.d, &x);
        // (W ρ W†)[perm i, perm j] = phase_i ρ[i,j] conj(phase_j)
        for i in 0..dim {
            for j in 0..dim {
                out.mat[(w.perm[i], w.perm[j])] += w.phase[i] * rho.mat[(i, j)] * w.phase[j].conj();
            }
        }
    }
    Ok(out.scale(C::new(1.0 / m.cardinality() as f64, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{char_distribution, point_index, wigner_state};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(d: u32) -> Modulus {
        Modulus::new(d).unwrap()
    }

    #[test]
    fn lagrangian_counts() {
        assert_eq!(enumerate_lagrangians(1, 2).unwrap().len(), 3);
        assert_eq!(enumerate_lagrangians(2, 2).unwrap().len(), 15);
        assert_eq!(enumerate_lagrangians(2, 3).unwrap().len(), 40);
        assert!(enumerate_lagrangians(4, 3).is_err());
    }

    #[test]
    fn reference_states() {
        let z = Subspace::span(&[vec![1, 0]], 2, m(2));
        let s = reference_state(&z).unwrap();
        assert!((s.vector.amps[0] - C::new(1.0, 0.0)).norm() < 1e-12);
        let x = Subspace::span(&[vec![0, 1]], 2, m(2));
        let s = reference_state(&x).unwrap();
        let h = 0.5f64.sqrt();
        assert!((s.vector.amps[0] - C::new(h, 0.0)).norm() < 1e-12);
        assert!((s.vector.amps[1] - C::new(h, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn characteristic_support_is_m() {
        for (n, d) in [(1, 2), (2, 2), (1, 3), (2, 3)] {
            for s in &ensemble(n, d).unwrap().states {
                let p = char_distribution(d, &s.vector).unwrap();
                let expect = (d as f64).powi(-(n as i32));
                for x in crate::phase_space::all_points(n, d) {
                    let v = p.values[point_index(&x, d)];
                    if s.m.contains(&x) {
                        assert!((v - expect).abs() < 1e-12);
                    } else {
                        assert!(v.abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn ensemble_sizes_and_overlaps() {
        for (n, d) in [(1, 2), (2, 2), (1, 3), (2, 3), (1, 5)] {
            let e = ensemble(n, d).unwrap();
            assert_eq!(BigUint::from(e.len()), ensemble_size(n, d));
            for (i, a) in e.states.iter().enumerate() {
                for b in &e.states[i + 1..] {
                    let o = a.vector.inner(&b.vector).norm_sqr();
                    assert!(o <= 1.0 / d as f64 + 1e-10, "distinct states overlap {o}");
                    if a.m == b.m {
                        assert!(o < 1e-10);
                    }
                }
            }
        }
        let e = ensemble(1, 2).unwrap();
        for a in &e.states {
            for b in &e.states {
                let o = a.vector.inner(&b.vector).norm_sqr();
                assert!([0.0, 0.5, 1.0].iter().any(|v| (o - v).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn odd_wigner_is_affine_indicator() {
        for (n, d) in [(1, 3), (2, 3), (1, 5)] {
            for s in &ensemble(n, d).unwrap().states {
                let w = wigner_state(d, &s.vector).unwrap();
                let level = (d as f64).powi(-(n as i32));
                let support: Vec<Vec<u32>> = crate::phase_space::all_points(n, d)
                    .into_iter()
                    .filter(|x| w.at(x) > level / 2.0)
                    .collect();
                assert_eq!(support.len(), (d as usize).pow(n as u32));
                assert!(w.values.iter().all(|v| v.abs() < 1e-12 || (v - level).abs() < 1e-12));
                let a = &support[0];
                for x in &support {
                    let diff = crate::phase_space::sub_points(x, a, d);
                    assert!(s.m.contains(&diff));
                }
            }
        }
    }

    #[test]
    fn sub_maximal_projector_rank() {
        // |S| = d^{n-1}: one Z-type generator on two qudits
        for d in [2u32, 3] {
            let s = Subspace::span(&[vec![1, 1, 0, 0]], 4, m(d));
            let p = stabilizer_projector(&s, 2).unwrap();
            assert!(p.mul(&p).sub(&p).max_abs() < 1e-12);
            assert!((p.trace().re - d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn channel_examples() {
        let zspan = Subspace::span(&[vec![1, 0]], 2, m(2));
        let plus = State::from_vec(vec![C::new(1.0, 0.0), C::new(1.0, 0.0)]).unwrap();
        let out = measurement_channel(&zspan, &plus.projector()).unwrap();
        assert!(out.sub(&Operator::identity(2).scale(C::new(0.5, 0.0))).max_abs() < 1e-12);

        let e = ensemble(2, 3).unwrap();
        let s = &e.states[7];
        let rho = s.vector.projector();
        assert!(measurement_channel(&s.m, &rho).unwrap().sub(&rho).max_abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = State::random(9, &mut rng);
        let out = measurement_channel(&s.m, &psi.projector()).unwrap();
        let purity = out.mul(&out).trace().re;
        let p = char_distribution(3, &psi).unwrap();
        let sum: f64 = s.m.elements().iter().map(|x| p.at(x)).sum();
        assert!((purity - sum).abs() < 1e-12);
        for x in s.m.elements() {
            let w = crate::phase_space::weyl::<f64>(3, &x);
            assert!(w.mul(&out).sub(&out.mul(&w)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn overlap_examples() {
        let e = ensemble(1, 2).unwrap();
        let (_, v) = e.max_overlap(&e.states[3].vector).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let t = State::from_vec(vec![C::new(1.0, 0.0), C::from_polar(1.0, std::f64::consts::FRAC_PI_4)]).unwrap();
        let (_, v) = max_stabilizer_overlap(&t, 2).unwrap();
        assert!((v - (1.0 + 0.5f64.sqrt()) / 2.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let psi = State::random(9, &mut rng);
            assert!(max_stabilizer_overlap(&psi, 3).unwrap().1 >= 1.0 / 9.0);
        }
    }

    #[test]
    fn sampling_is_seeded_and_uniform() {
        let mut a = ChaCha8Rng::seed_from_u64(42);
        let mut b = ChaCha8Rng::seed_from_u64(42);
        let sa = sample_stabilizer(1, 2, &mut a).unwrap();
        let sb = sample_stabilizer(1, 2, &mut b).unwrap();
        assert_eq!((sa.m, sa.z), (sb.m, sb.z));

        let e = ensemble(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = vec![0usize; e.len()];
        let draws = 10_000;
        for _ in 0..draws {
            let s = e.sample(&mut rng);
            let i = e.states.iter().position(|x| x.m == s.m && x.z == s.z).unwrap();
            counts[i] += 1;
        }
        let mean = draws as f64 / e.len() as f64;
        let sigma = (mean * (1.0 - 1.0 / e.len() as f64)).sqrt();
        assert!(counts.iter().all(|&c| (c as f64 - mean).abs() < 4.0 * sigma));
    }

    #[test]
    fn jsonl_export() {
        let e = ensemble(1, 2).unwrap();
        let text = e.to_jsonl();
        assert_eq!(text.lines().count(), 6);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert!(first["M"]["basis"].is_array());
        assert_eq!(first["amplitudes"].as_array().unwrap().len(), 2);
    }
}
