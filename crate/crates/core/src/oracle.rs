//! Brute-force validation route.
//!
//! The rotating-frame Hamiltonian conserves the excitation number, so it
//! splits into blocks on `{|g,n⟩, |e,n−1⟩, |f,n−1⟩}`. Each block is
//! exponentiated by eigen-decomposition and the `|g,n⟩` diagonal element is
//! read off, independently of the closed-form coefficients. A Monte Carlo
//! sampler estimates the survival curve from single trajectories.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::build_table;
use crate::{
    run, CoolingError, OracleScalar, PhysicalParams, PopulationDistribution, ProtocolSchedule,
    Result, Variant,
};

/// Level order inside the three-level ancilla.
const G: usize = 0;
const E: usize = 1;
const F: usize = 2;

/// Hamiltonian of one excitation-number subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationBlock<T: OracleScalar> {
    pub n: usize,
    /// 3×3 on `{|g,n⟩, |e,n−1⟩, |f,n−1⟩}`, or 1×1 for `n = 0`.
    pub hamiltonian: DMatrix<T>,
}

impl<T: OracleScalar> ExcitationBlock<T> {
    pub fn labels(&self) -> Vec<String> {
        if self.n == 0 {
            vec!["|g,0>".into()]
        } else {
            let m = self.n - 1;
            vec![
                format!("|g,{}>", self.n),
                format!("|e,{m}>"),
                format!("|f,{m}>"),
            ]
        }
    }

    /// Largest `|H − Hᵀ|` entry.
    pub fn hermiticity_defect(&self) -> T {
        (&self.hamiltonian - self.hamiltonian.transpose()).amax()
    }
}

/// `[[0, g_m√n, 0], [g_m√n, Δ_e, g_f], [0, g_f, 0]]` in units of `omega_m`.
pub fn block_hamiltonian<T: OracleScalar>(
    n: usize,
    params: &PhysicalParams<T>,
) -> ExcitationBlock<T> {
    if n == 0 {
        return ExcitationBlock {
            n,
            hamiltonian: DMatrix::zeros(1, 1),
        };
    }
    let c = params.g_m() * nalgebra::ComplexField::sqrt(T::from_usize(n).unwrap());
    let (d, f) = (params.delta_e(), params.g_f());
    let z = T::zero();
    #[rustfmt::skip]
    let h = DMatrix::from_row_slice(3, 3, &[
        z, c, z,
        c, d, f,
        z, f, z,
    ]);
    ExcitationBlock { n, hamiltonian: h }
}

/// `exp(−i H τ)` of a real symmetric matrix by eigen-decomposition.
fn symmetric_propagator<T: OracleScalar>(h: &DMatrix<T>, tau: T) -> Option<DMatrix<Complex<T>>> {
    let eig = SymmetricEigen::try_new(h.clone(), T::default_epsilon(), 0)?;
    let v = eig.eigenvectors.map(|x| Complex::new(x, T::zero()));
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues
            .map(|lambda| Complex::from_polar(T::one(), -lambda * tau)),
    );
    Some(&v * phases * v.transpose())
}

/// `U(τ) = exp(−i H_n τ)` for one block (`tau` is `omega_m * tau`).
pub fn block_propagator<T: OracleScalar>(
    block: &ExcitationBlock<T>,
    tau: T,
) -> Result<DMatrix<Complex<T>>> {
    symmetric_propagator(&block.hamiltonian, tau).ok_or_else(|| CoolingError::EigenFailure {
        n: block.n,
        dump: format!("{}", block.hamiltonian),
    })
}

/// Largest entry of `|U†U − I|`.
pub fn unitarity_defect<T: OracleScalar>(u: &DMatrix<Complex<T>>) -> T {
    let prod = u.adjoint() * u;
    let id = DMatrix::<Complex<T>>::identity(u.nrows(), u.ncols());
    (prod - id)
        .iter()
        .map(|z| z.norm())
        .fold(T::zero(), |a, b| if b > a { b } else { a })
}

/// `⟨g,n|U(τ)|g,n⟩` from the block propagator.
pub fn extract_vg_element<T: OracleScalar>(
    n: usize,
    params: &PhysicalParams<T>,
) -> Result<Complex<T>> {
    let block = block_hamiltonian(n, params);
    Ok(block_propagator(&block, params.tau())?[(0, 0)])
}

/// Joint Hamiltonian on `resonator(0..=n_max) ⊗ {g, e, f}`, assembled from
/// operator products: `Δ_e |e⟩⟨e| + g_m (b |e⟩⟨g| + b† |g⟩⟨e|) + g_f (|f⟩⟨e| + |e⟩⟨f|)`.
/// Basis index is `3·n + level`.
pub fn joint_hamiltonian<T: OracleScalar>(params: &PhysicalParams<T>, n_max: usize) -> DMatrix<T> {
    let dim_m = n_max + 1;
    let annihilate = DMatrix::from_fn(dim_m, dim_m, |r, c| {
        if c == r + 1 {
            nalgebra::ComplexField::sqrt(T::from_usize(c).unwrap())
        } else {
            T::zero()
        }
    });
    let id_m = DMatrix::<T>::identity(dim_m, dim_m);
    let ket_bra = |i: usize, j: usize| {
        let mut m = DMatrix::<T>::zeros(3, 3);
        m[(i, j)] = T::one();
        m
    };
    let lowering = annihilate.kronecker(&ket_bra(E, G));
    let coupling = &lowering + lowering.transpose();
    let drive = id_m.kronecker(&(ket_bra(F, E) + ket_bra(E, F)));
    let detuning = id_m.kronecker(&ket_bra(E, E));
    detuning * params.delta_e() + coupling * params.g_m() + drive * params.g_f()
}

/// The same truncated joint Hamiltonian built by placing excitation blocks.
/// `|e,n_max⟩, |f,n_max⟩` belong to the incomplete block `n_max + 1`.
pub fn block_assembled_hamiltonian<T: OracleScalar>(
    params: &PhysicalParams<T>,
    n_max: usize,
) -> DMatrix<T> {
    let dim = 3 * (n_max + 1);
    let mut h = DMatrix::<T>::zeros(dim, dim);
    for n in 1..=n_max {
        let block = block_hamiltonian(n, params).hamiltonian;
        let idx = [3 * n + G, 3 * (n - 1) + E, 3 * (n - 1) + F];
        for (r, &ir) in idx.iter().enumerate() {
            for (c, &ic) in idx.iter().enumerate() {
                h[(ir, ic)] = block[(r, c)];
            }
        }
    }
    let (e, f) = (3 * n_max + E, 3 * n_max + F);
    h[(e, e)] = params.delta_e();
    h[(e, f)] = params.g_f();
    h[(f, e)] = params.g_f();
    h
}

/// `⟨g,n|exp(−iHτ)|g,n⟩` for `n = 0..=n_max` from the full joint matrix.
pub fn joint_vg_elements<T: OracleScalar>(
    params: &PhysicalParams<T>,
    n_max: usize,
) -> Result<Vec<Complex<T>>> {
    let h = joint_hamiltonian(params, n_max);
    let u = symmetric_propagator(&h, params.tau()).ok_or_else(|| CoolingError::EigenFailure {
        n: n_max,
        dump: format!("joint matrix of dimension {}", h.nrows()),
    })?;
    Ok((0..=n_max).map(|n| u[(3 * n + G, 3 * n + G)]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSpec {
    pub trajectories: usize,
    pub seed: u64,
    /// Trajectories per RNG stream; chunk `c` uses stream `c`.
    pub chunk_size: usize,
}

impl BatchSpec {
    pub fn new(trajectories: usize, seed: u64) -> Self {
        BatchSpec {
            trajectories,
            seed,
            chunk_size: 4096,
        }
    }
}

/// Survival statistics of independently sampled trajectories.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBatch {
    pub seed: u64,
    pub chunk_size: usize,
    pub streams: usize,
    /// Number of successful measurements before the first failure.
    pub survival_lengths: Vec<u32>,
    /// `survivors[N]` trajectories passed all of the first `N` measurements.
    pub survivors: Vec<u64>,
}

impl TrajectoryBatch {
    pub fn trajectories(&self) -> usize {
        self.survival_lengths.len()
    }

    pub fn steps(&self) -> usize {
        self.survivors.len() - 1
    }

    /// Survival-fraction estimate of `P_g(N)`.
    pub fn estimate(&self, step: usize) -> f64 {
        self.survivors[step] as f64 / self.trajectories() as f64
    }

    /// Binomial standard error `√(p(1−p)/M)`.
    pub fn standard_error(&self, step: usize) -> f64 {
        let p = self.estimate(step);
        (p * (1.0 - p) / self.trajectories() as f64).sqrt()
    }
}

/// Sample `spec.trajectories` runs of the schedule: draw a Fock level from
/// the initial populations, then survive each measurement with probability
/// `|c_n|²`. Segment boundaries (including threshold switches) follow the
/// deterministic run. Reproducible for a fixed seed regardless of threads.
pub fn sample_trajectories<T: OracleScalar>(
    initial: &PopulationDistribution<T>,
    schedule: &ProtocolSchedule<T>,
    spec: &BatchSpec,
) -> Result<TrajectoryBatch> {
    if spec.trajectories == 0 || spec.chunk_size == 0 {
        return Err(CoolingError::Schedule(
            "trajectory batch needs M >= 1 and a nonzero chunk size".into(),
        ));
    }
    let plan = run(initial, schedule)?.segment_per_step();
    let n_max = initial.n_max();
    let survive: Vec<Vec<f64>> = schedule
        .segments()
        .iter()
        .map(|s| {
            build_table(s.variant, &s.params, n_max)
                .abs2()
                .into_iter()
                .map(|x| num_traits::ToPrimitive::to_f64(&x).unwrap().min(1.0))
                .collect()
        })
        .collect();
    let weights: Vec<f64> = initial
        .probabilities()
        .into_iter()
        .map(|p| num_traits::ToPrimitive::to_f64(&p).unwrap())
        .collect();
    let levels = WeightedIndex::new(&weights).map_err(|_| CoolingError::UndefinedState)?;

    let streams = spec.trajectories.div_ceil(spec.chunk_size);
    let survival_lengths: Vec<u32> = (0..streams)
        .into_par_iter()
        .flat_map_iter(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(chunk as u64);
            let count = spec
                .chunk_size
                .min(spec.trajectories - chunk * spec.chunk_size);
            let (levels, plan, survive) = (&levels, &plan, &survive);
            (0..count)
                .map(move |_| {
                    let n = levels.sample(&mut rng);
                    let mut len = 0u32;
                    for &seg in plan {
                        if rng.random::<f64>() >= survive[seg][n] {
                            break;
                        }
                        len += 1;
                    }
                    len
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let steps = plan.len();
    let mut counts = vec![0u64; steps + 2];
    for &len in &survival_lengths {
        counts[len as usize] += 1;
    }
    // survivors[N] = #{len >= N}
    let mut survivors = vec![0u64; steps + 1];
    let mut acc = 0u64;
    for n in (0..=steps).rev() {
        acc += counts[n];
        survivors[n] = acc;
    }

    Ok(TrajectoryBatch {
        seed: spec.seed,
        chunk_size: spec.chunk_size,
        streams,
        survival_lengths,
        survivors,
    })
}

/// One random comparison of a closed-form coefficient against the block propagator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleDraw {
    pub variant: Variant,
    pub n: usize,
    pub g_m: f64,
    pub g_f: f64,
    pub delta_e: f64,
    pub omega_tau: f64,
    pub closed_form: [f64; 2],
    pub oracle: [f64; 2],
    pub abs_error: f64,
    /// `||closed| − |oracle||`: the error left after removing a global phase.
    pub phase_aligned_error: f64,
    pub unitarity_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub seed: u64,
    pub draws: Vec<OracleDraw>,
    pub max_abs_error: f64,
    pub max_phase_aligned_error: f64,
    pub max_unitarity_defect: f64,
}

/// Compare every variant's closed form with `⟨g,n|U|g,n⟩` on random
/// parameters: `n ≤ 200`, `g_m/ω_m ∈ [1e-4, 2e-3]`, `g_f/g_m ∈ [0, 100]`,
/// `Δ_e/g_m ∈ [−50, 50]`, `ω_m τ ∈ [10, 1000]`. Conventional draws use
/// `g_f = 0` and resonant draws `Δ_e = 0`.
pub fn oracle_report(draws: usize, seed: u64) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(draws);
    for i in 0..draws {
        let variant = Variant::ALL[i % Variant::ALL.len()];
        let n = rng.random_range(0..=200usize);
        let g_m = rng.random_range(1e-4..2e-3);
        let g_f = if variant.is_driven() {
            g_m * rng.random_range(0.0..100.0)
        } else {
            0.0
        };
        let delta_e = if variant.is_detuned() {
            g_m * rng.random_range(-50.0..50.0)
        } else {
            0.0
        };
        let omega_tau = rng.random_range(10.0..1000.0);
        let params = PhysicalParams::dimensionless(1.0, g_m, g_f, delta_e, omega_tau)?;
        let closed = variant.coefficient(n, &params);
        let u = block_propagator(&block_hamiltonian(n, &params), omega_tau)?;
        let oracle = u[(0, 0)];
        out.push(OracleDraw {
            variant,
            n,
            g_m,
            g_f,
            delta_e,
            omega_tau,
            closed_form: [closed.re, closed.im],
            oracle: [oracle.re, oracle.im],
            abs_error: (closed - oracle).norm(),
            phase_aligned_error: (closed.norm() - oracle.norm()).abs(),
            unitarity_defect: unitarity_defect(&u),
        });
    }
    let max = |f: fn(&OracleDraw) -> f64| out.iter().map(f).fold(0.0, f64::max);
    Ok(OracleReport {
        seed,
        max_abs_error: max(|d| d.abs_error),
        max_phase_aligned_error: max(|d| d.phase_aligned_error),
        max_unitarity_defect: max(|d| d.unitarity_defect),
        draws: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{alpha_n, beta_tilde_n};

    #[test]
    fn ground_block_is_trivial() {
        let p = PhysicalParams::from_ratios(1.0, 1e-3, 30.0, 5.0, 700.0).unwrap();
        let b = block_hamiltonian(0, &p);
        assert_eq!(b.hamiltonian.shape(), (1, 1));
        assert_eq!(b.hamiltonian[(0, 0)], 0.0);
        let u = block_propagator(&b, 123.0).unwrap();
        assert_eq!(u[(0, 0)], Complex::new(1.0, 0.0));
    }

    #[test]
    fn block_entries() {
        let p = PhysicalParams::dimensionless(1.0, 0.01, 0.0, 0.0, 10.0).unwrap();
        let b = block_hamiltonian(1, &p).hamiltonian;
        assert_eq!(b[(0, 1)], 0.01);
        assert_eq!(b[(1, 0)], 0.01);
        assert_eq!(b[(1, 2)], 0.0);
        let p = PhysicalParams::dimensionless(1.0, 0.01, 0.2, 0.05, 10.0).unwrap();
        let b = block_hamiltonian(4, &p);
        assert_eq!(b.hamiltonian[(0, 1)], 0.02);
        assert_eq!(b.hamiltonian[(1, 1)], 0.05);
        assert_eq!(b.hamiltonian[(2, 1)], 0.2);
        assert!(b.hermiticity_defect() <= 1e-15);
        assert_eq!(b.labels(), vec!["|g,4>", "|e,3>", "|f,3>"]);
    }

    #[test]
    fn propagator_identity_cases() {
        let p = PhysicalParams::dimensionless(1.0, 0.01, 0.2, 0.05, 10.0).unwrap();
        let b = block_hamiltonian(7, &p);
        let u = block_propagator(&b, 0.0).unwrap();
        assert!(unitarity_defect(&u) < 1e-14);
        assert!((u - DMatrix::identity(3, 3))
            .iter()
            .all(|z| z.norm() < 1e-14));
        let zero = ExcitationBlock {
            n: 3,
            hamiltonian: DMatrix::<f64>::zeros(3, 3),
        };
        let u = block_propagator(&zero, 1e3).unwrap();
        assert!((u - DMatrix::identity(3, 3))
            .iter()
            .all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn matches_closed_forms() {
        let p = PhysicalParams::from_ratios(1.0, 4e-4, 30.0, 0.0, 700.0).unwrap();
        for n in [1, 7, 125, 999] {
            let o = extract_vg_element(n, &p).unwrap();
            assert!((o - alpha_n(n, &p)).norm() < 1e-10, "n = {n}");
        }
        let p = PhysicalParams::from_ratios(1.0, 4e-4, 0.0, 17.0, 700.0).unwrap();
        for n in [1, 7, 125, 999] {
            let o = extract_vg_element(n, &p).unwrap();
            assert!((o - beta_tilde_n(n, &p)).norm() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn joint_matrix_matches_blocks() {
        let p = PhysicalParams::from_ratios(1.0, 3e-3, 12.0, -4.0, 250.0).unwrap();
        for n_max in 0..=6 {
            let a = joint_hamiltonian(&p, n_max);
            let b = block_assembled_hamiltonian(&p, n_max);
            assert!((a - b).amax() < 1e-12, "n_max = {n_max}");
        }
        let vg = joint_vg_elements(&p, 6).unwrap();
        for (n, v) in vg.iter().enumerate() {
            let closed = Variant::DrivenDetuned.coefficient(n, &p);
            assert!((v - closed).norm() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn ground_state_trajectories_all_survive() {
        let p = PhysicalParams::from_ratios(1.0, 4e-4, 30.0, 0.0, 700.0).unwrap();
        let d = PopulationDistribution::ground_state(50);
        let sched = ProtocolSchedule::single(Variant::Driven, p, 25);
        let batch = sample_trajectories(&d, &sched, &BatchSpec::new(1000, 3)).unwrap();
        assert!((0..=25).all(|n| batch.estimate(n) == 1.0));
    }

    #[test]
    fn trajectories_are_reproducible() {
        let p = PhysicalParams::from_ratios(1.0, 4e-4, 30.0, 0.0, 700.0).unwrap();
        let d = crate::thermal_distribution(&crate::ThermalSpec::from_mean(20.0)).unwrap();
        let sched = ProtocolSchedule::single(Variant::Driven, p, 10);
        let spec = BatchSpec {
            trajectories: 5000,
            seed: 11,
            chunk_size: 700,
        };
        let a = sample_trajectories(&d, &sched, &spec).unwrap();
        let b = sample_trajectories(&d, &sched, &spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.streams, 8);
        let c = sample_trajectories(&d, &sched, &BatchSpec { seed: 12, ..spec }).unwrap();
        assert_ne!(a.survival_lengths, c.survival_lengths);
    }

    #[test]
    fn empty_batch_rejected() {
        let p = PhysicalParams::from_ratios(1.0, 4e-4, 30.0, 0.0, 700.0).unwrap();
        let d = PopulationDistribution::ground_state(5);
        let sched = ProtocolSchedule::single(Variant::Driven, p, 2);
        assert!(sample_trajectories(&d, &sched, &BatchSpec::new(0, 1)).is_err());
    }
}
