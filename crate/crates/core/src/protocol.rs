//! Repeated-measurement engine.
//!
//! The post-measurement operator `⟨g|U(τ)|g⟩` is diagonal in the Fock basis
//! and the thermal start is diagonal, so a run only ever evolves populations:
//! one measurement multiplies `p_n` by `|c_n|²`. The distribution keeps its
//! unnormalized mass, which is the cumulative survival probability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{build_table, cooling_free_report, first_protected_index};
use crate::fock::thermal_log_probabilities;
use crate::{
    thermal_distribution, thermal_occupation, CoefficientTable, CoolingError, PhysicalParams,
    PopulationDistribution, Result, Scalar, ThermalSource, ThermalSpec, Variant, HBAR, K_B,
};

/// When a segment hands over to the next one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchCondition<T> {
    /// Run all of the segment's steps.
    AfterSteps,
    /// Leave early once the conditional `n̄` drops to the threshold.
    MeanAtMost(T),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub variant: Variant,
    pub params: PhysicalParams<T>,
    pub steps: usize,
    pub switch: SwitchCondition<T>,
}

impl<T: Scalar> Segment<T> {
    pub fn new(variant: Variant, params: PhysicalParams<T>, steps: usize) -> Self {
        Segment {
            variant,
            params,
            steps,
            switch: SwitchCondition::AfterSteps,
        }
    }

    pub fn until_mean_at_most(mut self, threshold: T) -> Self {
        self.switch = SwitchCondition::MeanAtMost(threshold);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSchedule<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Scalar> ProtocolSchedule<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(CoolingError::Schedule(
                "at least one segment required".into(),
            ));
        }
        for (i, s) in segments.iter().enumerate() {
            if let SwitchCondition::MeanAtMost(th) = s.switch {
                if !(th > T::zero()) {
                    return Err(CoolingError::Schedule(format!(
                        "segment {i}: switch threshold must be > 0, got {th}"
                    )));
                }
            }
        }
        Ok(ProtocolSchedule { segments })
    }

    pub fn single(variant: Variant, params: PhysicalParams<T>, steps: usize) -> Self {
        ProtocolSchedule {
            segments: vec![Segment::new(variant, params, steps)],
        }
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn segments_mut(&mut self) -> &mut [Segment<T>] {
        &mut self.segments
    }

    pub fn total_steps(&self) -> usize {
        self.segments.iter().map(|s| s.steps).sum()
    }

    /// Smallest truncation that keeps every segment's first nonzero
    /// protected level (times 1.5) inside the Fock space.
    pub fn required_n_max(&self) -> usize {
        self.segments
            .iter()
            .filter_map(|s| first_protected_index(s.variant, &s.params))
            .map(|n| (n * T::lit(1.5)).ceil().to_usize().unwrap_or(usize::MAX))
            .max()
            .unwrap_or(0)
    }

    /// Thermal start for this schedule, with the truncation widened to cover
    /// the protected levels.
    pub fn initial_state(&self, spec: &ThermalSpec<T>) -> Result<PopulationDistribution<T>> {
        let spec = spec.with_min_n_max(spec.min_n_max.max(self.required_n_max()));
        thermal_distribution(&spec)
    }
}

/// Observables after `step` measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord<T> {
    pub step: usize,
    pub n_bar: T,
    /// `⟨0|ρ_m|0⟩` of the conditional state.
    pub ground_fidelity: T,
    /// Probability that all measurements so far found the ancilla in `|g⟩`.
    pub survival: T,
    /// Kelvin.
    pub effective_temperature: T,
    /// Fidelity with the thermal state at `effective_temperature`.
    pub thermal_fidelity: T,
    pub segment: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions<T> {
    /// Runs stop once `ln P_g` falls below this.
    pub survival_floor_log: T,
    /// Stop after this many measurements in total; the last segment is
    /// stretched if the schedule is shorter.
    pub max_steps: Option<usize>,
}

impl<T: Scalar> Default for RunOptions<T> {
    fn default() -> Self {
        RunOptions {
            survival_floor_log: T::lit(-700.0),
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome<T> {
    /// One record for `N = 0` and one per measurement.
    pub records: Vec<StepRecord<T>>,
    /// The survival probability underflowed the floor and the run stopped.
    pub truncated: bool,
    pub final_state: PopulationDistribution<T>,
}

impl<T: Scalar> RunOutcome<T> {
    pub fn terminal(&self) -> &StepRecord<T> {
        self.records.last().expect("run has an N = 0 record")
    }

    pub fn at(&self, step: usize) -> Option<&StepRecord<T>> {
        self.records.get(step).filter(|r| r.step == step)
    }

    /// Segment index that produced each measurement `1..=N`.
    pub fn segment_per_step(&self) -> Vec<usize> {
        self.records.iter().skip(1).map(|r| r.segment).collect()
    }
}

/// One projective measurement: `p_n → |c_n|² p_n` without renormalizing.
pub fn step<T: Scalar>(
    d: &PopulationDistribution<T>,
    table: &CoefficientTable<T>,
) -> Result<PopulationDistribution<T>> {
    if table.n_max() < d.n_max() {
        return Err(CoolingError::TableTooShort {
            table: table.n_max(),
            state: d.n_max(),
        });
    }
    let mut next = d.clone();
    next.apply_log_gains(&table.log_gains());
    Ok(next)
}

pub fn run<T: Scalar>(
    initial: &PopulationDistribution<T>,
    schedule: &ProtocolSchedule<T>,
) -> Result<RunOutcome<T>> {
    run_with(initial, schedule, &RunOptions::default())
}

pub fn run_with<T: Scalar>(
    initial: &PopulationDistribution<T>,
    schedule: &ProtocolSchedule<T>,
    options: &RunOptions<T>,
) -> Result<RunOutcome<T>> {
    let n_max = initial.n_max();
    let segments = schedule.segments();
    let mut state = initial.clone();
    let mut records = vec![observe(&state, 0, 0, &segments[0].params)?];
    let mut truncated = false;
    let mut done = 0usize;
    let budget = options.max_steps;

    'segments: for (idx, seg) in segments.iter().enumerate() {
        let is_last = idx + 1 == segments.len();
        let planned = match budget {
            Some(total) if is_last => total.saturating_sub(done),
            Some(total) => seg.steps.min(total.saturating_sub(done)),
            None => seg.steps,
        };
        if planned == 0 {
            continue;
        }
        let gains = build_table(seg.variant, &seg.params, n_max).log_gains();
        for _ in 0..planned {
            state.apply_log_gains(&gains);
            done += 1;
            if state.norm_log() < options.survival_floor_log || state.is_empty() {
                truncated = true;
                if !state.is_empty() {
                    records.push(observe(&state, done, idx, &seg.params)?);
                }
                break 'segments;
            }
            let rec = observe(&state, done, idx, &seg.params)?;
            records.push(rec);
            if let SwitchCondition::MeanAtMost(th) = seg.switch {
                if rec.n_bar <= th && !is_last {
                    continue 'segments;
                }
            }
        }
    }

    Ok(RunOutcome {
        records,
        truncated,
        final_state: state,
    })
}

fn observe<T: Scalar>(
    d: &PopulationDistribution<T>,
    step: usize,
    segment: usize,
    params: &PhysicalParams<T>,
) -> Result<StepRecord<T>> {
    let n_bar = d.mean_occupation()?;
    let t_eff = effective_temperature(n_bar, params.omega_m())?;
    Ok(StepRecord {
        step,
        n_bar,
        ground_fidelity: d.probability(0),
        survival: d.survival_probability(),
        effective_temperature: t_eff,
        thermal_fidelity: fidelity_with_thermal_mean(d, n_bar),
        segment,
    })
}

/// Temperature of the thermal state with mean occupancy `n_bar`:
/// `ħω_m / (k_B ln(1 + 1/n̄))`, zero for `n̄ < 1e-15`.
pub fn effective_temperature<T: Scalar>(n_bar: T, omega_m: T) -> Result<T> {
    if !(n_bar >= T::zero()) {
        return Err(CoolingError::domain(
            "n_bar",
            n_bar.as_f64(),
            "must be >= 0",
        ));
    }
    if n_bar < T::lit(1e-15) {
        return Ok(T::zero());
    }
    Ok(T::lit(HBAR / K_B) * omega_m / n_bar.recip().ln_1p())
}

/// Fidelity between the conditional state and the thermal state at `t_eff`
/// on the same truncation; both are diagonal, so it is `(Σ √(p_n q_n))²`.
pub fn thermal_fidelity<T: Scalar>(
    d: &PopulationDistribution<T>,
    t_eff: T,
    omega_m: T,
) -> Result<T> {
    let n_bar = if t_eff > T::zero() {
        thermal_occupation(omega_m, t_eff)?
    } else {
        T::zero()
    };
    Ok(fidelity_with_thermal_mean(d, n_bar))
}

fn fidelity_with_thermal_mean<T: Scalar>(d: &PopulationDistribution<T>, n_bar: T) -> T {
    let q = thermal_log_probabilities(n_bar, d.n_max());
    let half = T::lit(0.5);
    let overlap = d
        .log_probabilities()
        .iter()
        .zip(&q)
        .fold(T::zero(), |acc, (&lp, &lq)| acc + ((lp + lq) * half).exp());
    (overlap * overlap).min(T::one())
}

/// Large-`N` limit of a single-variant protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticReport<T> {
    /// `p_0 + Σ_j p_{n_j}` with `p` interpolated at the real protected levels.
    pub survival_limit: T,
    /// `Σ_j n_j p_{n_j} / P_L`.
    pub mean_limit: T,
    /// `(n_j, p_{n_j})` for every protected level above the ground state.
    pub contributions: Vec<(T, T)>,
    /// Same limit counting only integer levels with `|c_n| = 1` within 1e-12.
    pub strict_survival_limit: T,
    pub strict_mean_limit: T,
    pub strict_contributions: Vec<(usize, T)>,
}

pub fn asymptotic_limit<T: Scalar>(
    initial: &PopulationDistribution<T>,
    variant: Variant,
    params: &PhysicalParams<T>,
) -> AsymptoticReport<T> {
    let probs = initial.probabilities();
    let n_max = initial.n_max();
    let p0 = probs[0];

    let snap = T::lit(1e-9);
    let contributions: Vec<(T, T)> = cooling_free_report(variant, params, n_max)
        .entries
        .iter()
        .filter(|e| e.n > snap)
        .map(|e| {
            let nearest = e.n.round();
            let p = if (e.n - nearest).abs() < snap {
                probs[nearest.to_usize().unwrap()]
            } else {
                let lo = e.n.floor().to_usize().unwrap();
                let hi = (lo + 1).min(n_max);
                let w = e.n - e.n.floor();
                probs[lo] * (T::one() - w) + probs[hi] * w
            };
            (e.n, p)
        })
        .collect();

    let table = build_table(variant, params, n_max);
    let tol = T::lit(1e-12);
    let strict_contributions: Vec<(usize, T)> = table
        .values
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, c)| (c.norm() - T::one()).abs() <= tol)
        .map(|(n, _)| (n, probs[n]))
        .collect();

    let limit = |terms: &mut dyn Iterator<Item = (T, T)>| {
        let (mass, moment) = terms.fold((p0, T::zero()), |(m, s), (n, p)| (m + p, s + n * p));
        let mean = if mass > T::zero() {
            moment / mass
        } else {
            T::zero()
        };
        (mass, mean)
    };
    let (survival_limit, mean_limit) = limit(&mut contributions.iter().copied());
    let (strict_survival_limit, strict_mean_limit) = limit(
        &mut strict_contributions
            .iter()
            .map(|&(n, p)| (T::from_index(n), p)),
    );

    AsymptoticReport {
        survival_limit,
        mean_limit,
        contributions,
        strict_survival_limit,
        strict_mean_limit,
        strict_contributions,
    }
}

/// Sweepable quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// `g_f / g_m`, applied to every driven segment.
    DrivingStrength,
    /// Initial temperature in kelvin.
    Temperature,
    /// `omega_m * tau`, applied to every segment.
    Interval,
    /// Total number of measurements.
    Steps,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepBase<T> {
    pub thermal: ThermalSpec<T>,
    pub schedule: ProtocolSchedule<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow<T> {
    pub value: T,
    pub initial_n_bar: Option<T>,
    pub terminal: Result<StepRecord<T>, CoolingError>,
    pub truncated: bool,
}

/// Independent runs over `grid`, in parallel; a failing point is recorded
/// and the rest continue.
pub fn sweep<T: Scalar>(
    axis: SweepAxis,
    grid: &[T],
    base: &SweepBase<T>,
) -> Result<Vec<SweepRow<T>>> {
    if grid.is_empty() {
        return Err(CoolingError::Schedule("sweep grid is empty".into()));
    }
    Ok(grid
        .par_iter()
        .map(|&value| {
            let point = || -> Result<(T, RunOutcome<T>)> {
                let (thermal, schedule, options) = sweep_point(axis, value, base)?;
                let initial = schedule.initial_state(&thermal)?;
                let n0 = initial.mean_occupation()?;
                Ok((n0, run_with(&initial, &schedule, &options)?))
            };
            match point() {
                Ok((n0, out)) => SweepRow {
                    value,
                    initial_n_bar: Some(n0),
                    terminal: Ok(*out.terminal()),
                    truncated: out.truncated,
                },
                Err(e) => SweepRow {
                    value,
                    initial_n_bar: None,
                    terminal: Err(e),
                    truncated: false,
                },
            }
        })
        .collect())
}

fn sweep_point<T: Scalar>(
    axis: SweepAxis,
    value: T,
    base: &SweepBase<T>,
) -> Result<(ThermalSpec<T>, ProtocolSchedule<T>, RunOptions<T>)> {
    let mut thermal = base.thermal;
    let mut schedule = base.schedule.clone();
    let mut options = RunOptions::default();
    match axis {
        SweepAxis::DrivingStrength => {
            for seg in schedule
                .segments_mut()
                .iter_mut()
                .filter(|s| s.variant.is_driven())
            {
                seg.params = seg.params.with_g_f(value * seg.params.g_m())?;
            }
        }
        SweepAxis::Temperature => {
            let omega_m = schedule.segments()[0].params.omega_m();
            thermal.source = ThermalSource::Temperature {
                kelvin: value,
                omega_m,
            };
        }
        SweepAxis::Interval => {
            for seg in schedule.segments_mut() {
                seg.params = seg.params.with_tau(value)?;
            }
        }
        SweepAxis::Steps => {
            let steps = value
                .round()
                .to_usize()
                .filter(|_| value >= T::zero())
                .ok_or_else(|| CoolingError::domain("N", value.as_f64(), "must be >= 0"))?;
            options.max_steps = Some(steps);
        }
    }
    Ok((thermal, schedule, options))
}
