//! Closed-form per-level cooling coefficients `⟨g,n|U(τ)|g,n⟩` and the
//! protected (cooling-free) levels where their magnitude returns to one.
//!
//! Four variants are covered: with or without the `|e⟩↔|f⟩` drive, each on
//! resonance or with a detuning `delta_e` between the ancilla and the
//! resonator. All quantities are in units of `omega_m` (see
//! [`PhysicalParams`]), so products like `Ω τ` are plain phases.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{CoolingError, PhysicalParams, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Two-level ancilla on resonance: `cos(g_m √n τ)`.
    Conventional,
    /// Driven three-level ancilla on resonance.
    Driven,
    ConventionalDetuned,
    DrivenDetuned,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Conventional,
        Variant::Driven,
        Variant::ConventionalDetuned,
        Variant::DrivenDetuned,
    ];

    pub fn is_driven(self) -> bool {
        matches!(self, Variant::Driven | Variant::DrivenDetuned)
    }

    pub fn is_detuned(self) -> bool {
        matches!(self, Variant::ConventionalDetuned | Variant::DrivenDetuned)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Conventional => "conventional",
            Variant::Driven => "driven",
            Variant::ConventionalDetuned => "conventional-detuned",
            Variant::DrivenDetuned => "driven-detuned",
        }
    }

    /// Coefficient at a (possibly non-integer) level.
    pub fn coefficient_at<T: Scalar>(self, n: T, params: &PhysicalParams<T>) -> Complex<T> {
        match self {
            Variant::Conventional => beta_at(n, params),
            Variant::Driven => alpha_at(n, params),
            Variant::ConventionalDetuned => beta_tilde_at(n, params),
            Variant::DrivenDetuned => alpha_tilde_at(n, params),
        }
    }

    pub fn coefficient<T: Scalar>(self, n: usize, params: &PhysicalParams<T>) -> Complex<T> {
        self.coefficient_at(T::from_index(n), params)
    }

    /// Drive strength and detuning this variant actually uses.
    fn effective_drive_detuning<T: Scalar>(self, params: &PhysicalParams<T>) -> (T, T) {
        let g_f = if self.is_driven() {
            params.g_f()
        } else {
            T::zero()
        };
        let delta = if self.is_detuned() {
            params.delta_e()
        } else {
            T::zero()
        };
        (g_f, delta)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = CoolingError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| CoolingError::UnknownVariant(s.to_owned()))
    }
}

/// Resonant driven coefficient `α_n = (Ω_n² + n g_m²(cos Ω_n τ − 1)) / Ω_n²`
/// with `Ω_n = √(g_f² + n g_m²)`.
pub fn alpha_n<T: Scalar>(n: usize, params: &PhysicalParams<T>) -> Complex<T> {
    alpha_at(T::from_index(n), params)
}

/// [`alpha_n`] continued to real `n`.
pub fn alpha_at<T: Scalar>(n: T, params: &PhysicalParams<T>) -> Complex<T> {
    if n == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    let coupling2 = n * params.g_m() * params.g_m();
    let omega2 = params.g_f() * params.g_f() + coupling2;
    let half_phase = omega2.sqrt() * params.tau() / T::lit(2.0);
    // 1 − cos x = 2 sin²(x/2) keeps precision when the phase is small
    let s = half_phase.sin();
    Complex::new(
        T::one() - T::lit(2.0) * coupling2 * s * s / omega2,
        T::zero(),
    )
}

/// Conventional coefficient `β_n = cos(g_m √n τ)`.
pub fn beta_n<T: Scalar>(n: usize, params: &PhysicalParams<T>) -> Complex<T> {
    beta_at(T::from_index(n), params)
}

pub fn beta_at<T: Scalar>(n: T, params: &PhysicalParams<T>) -> Complex<T> {
    if n == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    Complex::new((params.g_m() * n.sqrt() * params.tau()).cos(), T::zero())
}

/// Detuned driven coefficient
/// `[2 g_f² Ω̃ + e^{−iΔτ/2} g_m² n (iΔ sin Ω̃τ + 2Ω̃ cos Ω̃τ)] / (2 Ω_n² Ω̃)`
/// with `Ω̃ = √(g_m² n + g_f² + Δ²/4)`.
pub fn alpha_tilde_n<T: Scalar>(n: usize, params: &PhysicalParams<T>) -> Complex<T> {
    alpha_tilde_at(T::from_index(n), params)
}

pub fn alpha_tilde_at<T: Scalar>(n: T, params: &PhysicalParams<T>) -> Complex<T> {
    if n == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    let two = T::lit(2.0);
    let (g_f, delta, tau) = (params.g_f(), params.delta_e(), params.tau());
    let coupling2 = n * params.g_m() * params.g_m();
    let omega2 = coupling2 + g_f * g_f;
    let omega_t = (omega2 + delta * delta / (two + two)).sqrt();
    let phase = omega_t * tau;
    let frame = Complex::from_polar(T::one(), -delta * tau / two);
    let inner = Complex::new(two * omega_t * phase.cos(), delta * phase.sin());
    let num = Complex::new(two * g_f * g_f * omega_t, T::zero()) + frame * inner * coupling2;
    num / (two * omega2 * omega_t)
}

/// Detuned conventional coefficient
/// `e^{−iτΔ/2}(cos Ω_c τ + i sin Ω_c τ cos 2θ_n)` with `Ω_c = √(g_m² n + Δ²/4)`
/// and `cos 2θ_n = (Δ/2)/Ω_c`.
pub fn beta_tilde_n<T: Scalar>(n: usize, params: &PhysicalParams<T>) -> Complex<T> {
    beta_tilde_at(T::from_index(n), params)
}

pub fn beta_tilde_at<T: Scalar>(n: T, params: &PhysicalParams<T>) -> Complex<T> {
    if n == T::zero() {
        return Complex::new(T::one(), T::zero());
    }
    let two = T::lit(2.0);
    let (delta, tau) = (params.delta_e(), params.tau());
    let half_delta = delta / two;
    let omega_c = (n * params.g_m() * params.g_m() + half_delta * half_delta).sqrt();
    let cos_2theta = half_delta / omega_c;
    let phase = omega_c * tau;
    let frame = Complex::from_polar(T::one(), -delta * tau / two);
    frame * Complex::new(phase.cos(), phase.sin() * cos_2theta)
}

/// Per-level coefficients of one protocol variant on `0..=n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable<T> {
    pub variant: Variant,
    pub params: PhysicalParams<T>,
    pub values: Vec<Complex<T>>,
}

impl<T: Scalar> CoefficientTable<T> {
    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `|c_n|²` per level.
    pub fn abs2(&self) -> Vec<T> {
        self.values.iter().map(|c| c.norm_sqr()).collect()
    }

    /// `|c_n|^{2N}` per level.
    pub fn abs2_pow(&self, measurements: u32) -> Vec<T> {
        self.values
            .iter()
            .map(|c| c.norm_sqr().powi(measurements as i32))
            .collect()
    }

    /// Per-level `ln|c_n|²`, clipped at zero so rounding above `|c| = 1`
    /// cannot raise the survival probability.
    pub fn log_gains(&self) -> Vec<T> {
        self.values
            .iter()
            .map(|c| crate::logspace::ln_abs2(*c).min(T::zero()))
            .collect()
    }

    /// Elementwise product with another table of the same length; applying
    /// the product equals applying both tables in either order.
    pub fn compose(&self, other: &CoefficientTable<T>) -> Vec<Complex<T>> {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect()
    }
}

/// Fill a table for `variant` on `0..=n_max`, in parallel over `n`.
pub fn build_table<T: Scalar>(
    variant: Variant,
    params: &PhysicalParams<T>,
    n_max: usize,
) -> CoefficientTable<T> {
    let values = (0..=n_max)
        .into_par_iter()
        .map(|n| variant.coefficient(n, params))
        .collect();
    CoefficientTable {
        variant,
        params: *params,
        values,
    }
}

/// One protected level `n_j` (generally non-integer).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtectedIndex<T> {
    /// Real-valued protected level.
    pub n: T,
    /// Generating integer: `j` with `Ω_n τ = 2jπ` (driven) or `k` with
    /// `g_m √n τ = kπ` (conventional).
    pub generator: u64,
    /// `k` with `Ω̃ τ = kπ`; twice `generator` for the resonant driven case.
    pub half_turns: u64,
    /// Spacing to the next protected level.
    pub quasi_period: T,
    pub nearest_integer: usize,
    /// `|c|` at `nearest_integer`.
    pub nearest_integer_magnitude: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoolingFreeReport<T> {
    pub variant: Variant,
    pub entries: Vec<ProtectedIndex<T>>,
}

impl<T: Scalar> CoolingFreeReport<T> {
    /// First protected level strictly above the ground state.
    pub fn first_nonzero(&self) -> Option<&ProtectedIndex<T>> {
        self.entries.iter().find(|e| e.n > T::zero())
    }
}

/// Candidate generator for protected levels:
/// `n_k = ((kπ)² − (g_f τ)² − (Δτ)²/4) / (g_m τ)²`, keeping every `stride`-th
/// `k` from `k_first` (the phase condition picks the parity when driven).
struct ProtectedLadder<T> {
    gm_tau2: T,
    offset: T,
    k_first: u64,
    stride: u64,
}

impl<T: Scalar> ProtectedLadder<T> {
    fn new(variant: Variant, params: &PhysicalParams<T>) -> Option<Self> {
        let (g_f, delta) = variant.effective_drive_detuning(params);
        let tau = params.tau();
        let gm_tau = params.g_m() * tau;
        let half_dt = delta * tau / T::lit(2.0);
        let offset = (g_f * tau).powi(2) + half_dt * half_dt;
        let pi = T::PI();
        let mut k_min = (offset.sqrt() / pi - T::lit(1e-9))
            .ceil()
            .to_u64()
            .unwrap_or(u64::MAX);
        if !variant.is_driven() {
            k_min = k_min.max(1);
        }
        if g_f == T::zero() {
            return Some(ProtectedLadder {
                gm_tau2: gm_tau * gm_tau,
                offset,
                k_first: k_min,
                stride: 1,
            });
        }
        // |α̃| = 1 needs e^{−iΔτ/2} = (−1)^k at sin Ω̃τ = 0; only the parity of k matters.
        let tol = T::lit(1e-12);
        let k_first = (k_min..k_min + 2).find(|&k| {
            let phase = T::from_u64(k).unwrap() * pi - half_dt;
            T::one() - phase.cos() <= tol
        })?;
        Some(ProtectedLadder {
            gm_tau2: gm_tau * gm_tau,
            offset,
            k_first,
            stride: 2,
        })
    }

    fn level(&self, k: u64) -> T {
        let kp = T::from_u64(k).unwrap() * T::PI();
        (kp * kp - self.offset) / self.gm_tau2
    }
}

/// Protected levels `n_j <= n_max` of `variant`, with quasi-periods.
pub fn cooling_free_report<T: Scalar>(
    variant: Variant,
    params: &PhysicalParams<T>,
    n_max: usize,
) -> CoolingFreeReport<T> {
    let mut entries = Vec::new();
    if let Some(ladder) = ProtectedLadder::new(variant, params) {
        let limit = T::from_index(n_max);
        let mut k = ladder.k_first;
        loop {
            let n = ladder.level(k);
            if n > limit {
                break;
            }
            // ceil rounding can land a hair below zero when the offset is an exact multiple
            let n = n.max(T::zero());
            let next = ladder.level(k + ladder.stride);
            let nearest = n.round().to_usize().unwrap_or(0);
            entries.push(ProtectedIndex {
                n,
                generator: if ladder.stride == 2 && !variant.is_detuned() {
                    k / 2
                } else {
                    k
                },
                half_turns: k,
                quasi_period: next - n,
                nearest_integer: nearest,
                nearest_integer_magnitude: variant.coefficient(nearest, params).norm(),
            });
            k += ladder.stride;
        }
    }
    CoolingFreeReport { variant, entries }
}

/// First protected level above the ground state, without any truncation bound.
pub fn first_protected_index<T: Scalar>(variant: Variant, params: &PhysicalParams<T>) -> Option<T> {
    let ladder = ProtectedLadder::new(variant, params)?;
    let mut k = ladder.k_first;
    loop {
        let n = ladder.level(k);
        if n > T::zero() {
            return Some(n);
        }
        k += ladder.stride;
    }
}
