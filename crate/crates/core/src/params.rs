//! Model parameters in a single dimensionless convention.
//!
//! Rates and detunings are stored as ratios to the resonator angular frequency
//! `omega_m`, and the measurement interval as the phase `omega_m * tau`. The
//! SI value of `omega_m` is kept alongside so that temperatures can be
//! converted at the boundary.

use serde::{Deserialize, Serialize};

use crate::{CoolingError, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams<T> {
    omega_m: T,
    g_m: T,
    g_f: T,
    delta_e: T,
    tau: T,
}

impl<T: Scalar> PhysicalParams<T> {
    /// Build from dimensionless ratios: `g_m / omega_m`, `g_f / omega_m`,
    /// `delta_e / omega_m` and `omega_m * tau`.
    pub fn dimensionless(omega_m: T, g_m: T, g_f: T, delta_e: T, omega_tau: T) -> Result<Self> {
        let p = PhysicalParams {
            omega_m,
            g_m,
            g_f,
            delta_e,
            tau: omega_tau,
        };
        p.validate()?;
        Ok(p)
    }

    /// Build from SI values: angular frequencies in rad/s, `tau` in seconds.
    pub fn from_si(omega_m: T, g_m: T, g_f: T, delta_e: T, tau: T) -> Result<Self> {
        if !(omega_m > T::zero() && omega_m.is_finite()) {
            return Err(CoolingError::domain(
                "omega_m",
                omega_m.as_f64(),
                "must be > 0",
            ));
        }
        Self::dimensionless(
            omega_m,
            g_m / omega_m,
            g_f / omega_m,
            delta_e / omega_m,
            tau * omega_m,
        )
    }

    /// Figure-style constructor: coupling as `g_m / omega_m`, drive as a
    /// multiple of `g_m`, detuning as a multiple of `g_m`.
    pub fn from_ratios(
        omega_m: T,
        g_m_over_omega: T,
        g_f_over_g_m: T,
        delta_over_g_m: T,
        omega_tau: T,
    ) -> Result<Self> {
        Self::dimensionless(
            omega_m,
            g_m_over_omega,
            g_f_over_g_m * g_m_over_omega,
            delta_over_g_m * g_m_over_omega,
            omega_tau,
        )
    }

    fn validate(&self) -> Result<()> {
        let check = |name, v: T, ok: bool, reason| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(CoolingError::domain(name, v.as_f64(), reason))
            }
        };
        check(
            "omega_m",
            self.omega_m,
            self.omega_m > T::zero(),
            "must be > 0",
        )?;
        check("g_m", self.g_m, self.g_m > T::zero(), "must be > 0")?;
        check("g_f", self.g_f, self.g_f >= T::zero(), "must be >= 0")?;
        check("delta_e", self.delta_e, true, "must be finite")?;
        check("tau", self.tau, self.tau > T::zero(), "must be > 0")
    }

    /// Resonator angular frequency, rad/s.
    pub fn omega_m(&self) -> T {
        self.omega_m
    }
    /// `g_m / omega_m`.
    pub fn g_m(&self) -> T {
        self.g_m
    }
    /// `g_f / omega_m`.
    pub fn g_f(&self) -> T {
        self.g_f
    }
    /// `delta_e / omega_m`.
    pub fn delta_e(&self) -> T {
        self.delta_e
    }
    /// `omega_m * tau`.
    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn g_f_over_g_m(&self) -> T {
        self.g_f / self.g_m
    }

    pub fn g_m_si(&self) -> T {
        self.g_m * self.omega_m
    }
    pub fn g_f_si(&self) -> T {
        self.g_f * self.omega_m
    }
    pub fn delta_e_si(&self) -> T {
        self.delta_e * self.omega_m
    }
    pub fn tau_si(&self) -> T {
        self.tau / self.omega_m
    }

    pub fn with_g_f(self, g_f: T) -> Result<Self> {
        Self::dimensionless(self.omega_m, self.g_m, g_f, self.delta_e, self.tau)
    }

    pub fn with_delta_e(self, delta_e: T) -> Result<Self> {
        Self::dimensionless(self.omega_m, self.g_m, self.g_f, delta_e, self.tau)
    }

    pub fn with_tau(self, omega_tau: T) -> Result<Self> {
        Self::dimensionless(self.omega_m, self.g_m, self.g_f, self.delta_e, omega_tau)
    }
}
