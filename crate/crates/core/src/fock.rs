//! Truncated Fock-space population distributions and thermal initial states.

use serde::{Deserialize, Serialize};

use crate::logspace::log_sum_exp;
use crate::{CoolingError, Result, Scalar, HBAR, K_B};

/// Default hard cap on the truncation index.
pub const DEFAULT_N_MAX_CAP: usize = 65_536;
/// Default discarded thermal tail mass.
pub const DEFAULT_EPSILON_TAIL: f64 = 1e-12;

/// Diagonal populations over `n = 0..=n_max`, stored as natural-log weights.
///
/// The weights are not renormalized after a measurement step: their total
/// mass `exp(norm_log)` is the cumulative survival probability, and
/// [`probabilities`](Self::probabilities) gives the conditional state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationDistribution<T> {
    log_weights: Vec<T>,
    norm_log: T,
}

impl<T: Scalar> PopulationDistribution<T> {
    /// Weights given as logs. Entries must be finite or `-inf`.
    pub fn from_log_weights(log_weights: Vec<T>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(CoolingError::UndefinedState);
        }
        if let Some(bad) = log_weights
            .iter()
            .find(|w| w.is_nan() || **w == T::infinity())
        {
            return Err(CoolingError::domain(
                "log_weight",
                bad.as_f64(),
                "must be finite or -inf",
            ));
        }
        let norm_log = log_sum_exp(&log_weights);
        Ok(PopulationDistribution {
            log_weights,
            norm_log,
        })
    }

    /// Nonnegative linear weights, normalized on construction.
    pub fn from_probabilities(weights: &[T]) -> Result<Self> {
        if let Some(bad) = weights
            .iter()
            .find(|w| !(**w >= T::zero()) || !w.is_finite())
        {
            return Err(CoolingError::domain(
                "weight",
                bad.as_f64(),
                "must be finite and >= 0",
            ));
        }
        Self::from_log_weights(weights.iter().map(|w| w.ln()).collect())?.renormalized()
    }

    /// `|0⟩⟨0|` padded with empty levels up to `n_max`.
    pub fn ground_state(n_max: usize) -> Self {
        Self::fock_state(0, n_max)
    }

    /// A single Fock level `n` inside a truncation `n_max >= n`.
    pub fn fock_state(n: usize, n_max: usize) -> Self {
        let n_max = n_max.max(n);
        let mut log_weights = vec![T::neg_infinity(); n_max + 1];
        log_weights[n] = T::zero();
        PopulationDistribution {
            log_weights,
            norm_log: T::zero(),
        }
    }

    pub fn n_max(&self) -> usize {
        self.log_weights.len() - 1
    }

    pub fn log_weights(&self) -> &[T] {
        &self.log_weights
    }

    /// Log of the unnormalized total mass.
    pub fn norm_log(&self) -> T {
        self.norm_log
    }

    /// `exp(norm_log)`: the probability that every measurement so far succeeded.
    pub fn survival_probability(&self) -> T {
        self.norm_log.exp()
    }

    pub fn is_empty(&self) -> bool {
        self.norm_log == T::neg_infinity()
    }

    /// Conditional population of level `n` (zero beyond the truncation).
    pub fn probability(&self, n: usize) -> T {
        match self.log_weights.get(n) {
            Some(&w) if !self.is_empty() => (w - self.norm_log).exp(),
            _ => T::zero(),
        }
    }

    /// Normalized view of the weights.
    pub fn probabilities(&self) -> Vec<T> {
        if self.is_empty() {
            return vec![T::zero(); self.log_weights.len()];
        }
        self.log_weights
            .iter()
            .map(|&w| (w - self.norm_log).exp())
            .collect()
    }

    /// Normalized log-probabilities.
    pub fn log_probabilities(&self) -> Vec<T> {
        self.log_weights
            .iter()
            .map(|&w| w - self.norm_log)
            .collect()
    }

    /// Shift the weights so the total mass is one, dropping the survival record.
    pub fn renormalized(mut self) -> Result<Self> {
        if self.is_empty() {
            return Err(CoolingError::UndefinedState);
        }
        let shift = self.norm_log;
        self.log_weights.iter_mut().for_each(|w| *w = *w - shift);
        self.norm_log = T::zero();
        Ok(self)
    }

    /// Pad with empty levels so the truncation reaches `n_max`.
    pub fn extended_to(mut self, n_max: usize) -> Self {
        if n_max > self.n_max() {
            self.log_weights.resize(n_max + 1, T::neg_infinity());
        }
        self
    }

    /// Add per-level log gains (`ln|c_n|²`) and refresh the cached mass.
    pub(crate) fn apply_log_gains(&mut self, gains: &[T]) {
        for (w, &g) in self.log_weights.iter_mut().zip(gains) {
            *w = if *w == T::neg_infinity() || g == T::neg_infinity() {
                T::neg_infinity()
            } else {
                *w + g
            };
        }
        self.norm_log = log_sum_exp(&self.log_weights);
    }

    /// `Σ n p_n` over the conditional state.
    pub fn mean_occupation(&self) -> Result<T> {
        mean_occupation(self)
    }
}

/// Where a thermal state's mean occupancy comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalSource<T> {
    /// Temperature in kelvin and resonator angular frequency in rad/s.
    Temperature {
        kelvin: T,
        omega_m: T,
    },
    MeanOccupation(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalSpec<T> {
    pub source: ThermalSource<T>,
    /// Upper bound on the discarded geometric tail mass.
    pub epsilon_tail: T,
    /// Lower bound on the truncation, e.g. to keep protected levels in range.
    pub min_n_max: usize,
    pub n_max_cap: usize,
}

impl<T: Scalar> ThermalSpec<T> {
    pub fn from_temperature(kelvin: T, omega_m: T) -> Self {
        Self::with_source(ThermalSource::Temperature { kelvin, omega_m })
    }

    pub fn from_mean(n_bar: T) -> Self {
        Self::with_source(ThermalSource::MeanOccupation(n_bar))
    }

    fn with_source(source: ThermalSource<T>) -> Self {
        ThermalSpec {
            source,
            epsilon_tail: T::lit(DEFAULT_EPSILON_TAIL),
            min_n_max: 0,
            n_max_cap: DEFAULT_N_MAX_CAP,
        }
    }

    pub fn with_epsilon_tail(mut self, eps: T) -> Self {
        self.epsilon_tail = eps;
        self
    }

    pub fn with_min_n_max(mut self, n_max: usize) -> Self {
        self.min_n_max = n_max;
        self
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.n_max_cap = cap;
        self
    }

    /// Mean occupancy this spec describes.
    pub fn mean(&self) -> Result<T> {
        match self.source {
            ThermalSource::Temperature { kelvin, omega_m } => thermal_occupation(omega_m, kelvin),
            ThermalSource::MeanOccupation(n) if n >= T::zero() && n.is_finite() => Ok(n),
            ThermalSource::MeanOccupation(n) => {
                Err(CoolingError::domain("n_bar_th", n.as_f64(), "must be >= 0"))
            }
        }
    }
}

/// Bose–Einstein occupancy `1 / (exp(ħω/k_B T) − 1)`.
pub fn thermal_occupation<T: Scalar>(omega_m: T, kelvin: T) -> Result<T> {
    if !(omega_m > T::zero()) || !omega_m.is_finite() {
        return Err(CoolingError::domain(
            "omega_m",
            omega_m.as_f64(),
            "must be > 0",
        ));
    }
    if !(kelvin > T::zero()) || !kelvin.is_finite() {
        return Err(CoolingError::domain("T", kelvin.as_f64(), "must be > 0"));
    }
    let x = T::lit(HBAR / K_B) * omega_m / kelvin;
    Ok(x.exp_m1().recip())
}

/// Truncated geometric distribution `p_n = n̄^n / (1 + n̄)^{n+1}`, normalized
/// on `0..=n_max`.
///
/// `n_max` is the smallest index with `(n̄/(1+n̄))^{n_max+1} < epsilon_tail`
/// whose renormalization shifts the mean by at most `epsilon_tail * n_max / 2`,
/// raised to `spec.min_n_max` if that is larger.
pub fn thermal_distribution<T: Scalar>(spec: &ThermalSpec<T>) -> Result<PopulationDistribution<T>> {
    let eps = spec.epsilon_tail;
    if !(eps > T::zero() && eps <= T::lit(1e-6)) {
        return Err(CoolingError::domain(
            "epsilon_tail",
            eps.as_f64(),
            "must lie in (0, 1e-6]",
        ));
    }
    let n_bar = spec.mean()?;
    let cap = spec.n_max_cap;
    let check_cap = |n: u64| {
        if n > cap as u64 {
            Err(CoolingError::Capacity { required: n, cap })
        } else {
            Ok(n as usize)
        }
    };

    if n_bar == T::zero() {
        let n_max = check_cap(spec.min_n_max as u64)?;
        return Ok(PopulationDistribution::ground_state(n_max));
    }

    let n_bar_f = n_bar.as_f64();
    let eps_f = eps.as_f64();
    let ln_r = n_bar_f.ln() - n_bar_f.ln_1p();
    let bound = (eps_f.ln() / ln_r).floor();
    if !bound.is_finite() || bound > cap as f64 {
        return Err(CoolingError::Capacity {
            required: if bound.is_finite() {
                bound as u64
            } else {
                u64::MAX
            },
            cap,
        });
    }
    let mut n_max = bound.max(0.0) as u64;
    loop {
        let tail = ((n_max + 1) as f64 * ln_r).exp();
        let shift = tail * (n_max + 1) as f64 / (1.0 - tail);
        // half the allowance is left for summation roundoff
        if tail < eps_f && shift <= 0.5 * eps_f * n_max as f64 {
            break;
        }
        n_max += 1;
        check_cap(n_max)?;
    }
    let n_max = check_cap(n_max.max(spec.min_n_max as u64))?;

    let ln_r = T::lit(ln_r);
    let ln_p0 = -n_bar.ln_1p();
    let log_weights = (0..=n_max)
        .map(|n| T::from_index(n) * ln_r + ln_p0)
        .collect();
    PopulationDistribution::from_log_weights(log_weights)?.renormalized()
}

/// Mean occupation `Σ n p_n` of the conditional state.
pub fn mean_occupation<T: Scalar>(d: &PopulationDistribution<T>) -> Result<T> {
    if d.is_empty() {
        return Err(CoolingError::UndefinedState);
    }
    Ok(d.log_weights
        .iter()
        .enumerate()
        .skip(1)
        .fold(T::zero(), |acc, (n, &w)| {
            acc + T::from_index(n) * (w - d.norm_log).exp()
        }))
}

/// Normalized thermal log-probabilities with mean `n_bar` on `0..=n_max`.
pub(crate) fn thermal_log_probabilities<T: Scalar>(n_bar: T, n_max: usize) -> Vec<T> {
    if n_bar <= T::zero() {
        let mut v = vec![T::neg_infinity(); n_max + 1];
        v[0] = T::zero();
        return v;
    }
    let ln_r = n_bar.ln() - n_bar.ln_1p();
    let raw: Vec<T> = (0..=n_max).map(|n| T::from_index(n) * ln_r).collect();
    let norm = log_sum_exp(&raw);
    raw.into_iter().map(|w| w - norm).collect()
}
