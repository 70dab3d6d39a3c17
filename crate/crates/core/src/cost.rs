//! Device-level computation and communication costs.
//!
//! A follower device pays for local computation (energy and time per local
//! iteration, both driven by its CPU frequency) and for one model upload per
//! global round. How many local iterations and global rounds a device needs
//! is governed by its local relative accuracy `theta`: a smaller `theta`
//! costs more local iterations but fewer global rounds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("{what} = {value} is outside its admissible range {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
}

fn domain(what: &'static str, value: f64, range: &'static str) -> CostError {
    CostError::Domain { what, value, range }
}

/// One follower device (user equipment).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UeProfile {
    pub id: u32,
    /// CPU frequency in cycles per second.
    pub cpu_freq: f64,
    /// Effective switched capacitance; energy per cycle is `eff_capacitance * f^2`.
    pub eff_capacitance: f64,
    pub cycles_per_sample: f64,
    pub data_size: u64,
    /// Normalized communication time in (0, 1]; 1 is the worst channel.
    pub comm_time_norm: f64,
    pub weight_energy: f64,
    pub weight_time: f64,
    pub cost_sensitivity: f64,
}

impl UeProfile {
    /// Checks the profile invariants, naming the first offending field.
    pub fn validate(&self) -> Result<(), CostError> {
        let positive = [
            ("cpu_freq", self.cpu_freq),
            ("eff_capacitance", self.eff_capacitance),
            ("cycles_per_sample", self.cycles_per_sample),
        ];
        for (what, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(domain(what, v, "(0, inf)"));
            }
        }
        if self.data_size == 0 {
            return Err(domain("data_size", 0.0, "[1, inf)"));
        }
        let tau = self.comm_time_norm;
        if !(tau.is_finite() && tau > 0.0 && tau <= 1.0) {
            return Err(domain("comm_time_norm", tau, "(0, 1]"));
        }
        let non_negative = [
            ("weight_energy", self.weight_energy),
            ("weight_time", self.weight_time),
            ("cost_sensitivity", self.cost_sensitivity),
        ];
        for (what, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain(what, v, "[0, inf)"));
            }
        }
        if self.weight_energy == 0.0 && self.weight_time == 0.0 {
            return Err(domain("weight_energy", 0.0, "not both weights zero"));
        }
        Ok(())
    }
}

/// Accuracy–iteration laws: local iterations `nu * ln(1/theta)` and global
/// rounds `a / (1 - theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AccuracyLaw {
    pub nu: f64,
    pub a: f64,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl Default for AccuracyLaw {
    fn default() -> Self {
        Self {
            nu: 10.0,
            a: 1.0,
            theta_min: 0.01,
            theta_max: 0.99,
        }
    }
}

impl AccuracyLaw {
    pub fn validate(&self) -> Result<(), CostError> {
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(domain("nu", self.nu, "(0, inf)"));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(domain("a", self.a, "(0, inf)"));
        }
        if !(self.theta_min > 0.0 && self.theta_min < 1.0) {
            return Err(domain("theta_min", self.theta_min, "(0, 1)"));
        }
        if !(self.theta_max > self.theta_min && self.theta_max < 1.0) {
            return Err(domain("theta_max", self.theta_max, "(theta_min, 1)"));
        }
        Ok(())
    }
}

/// Seconds per local iteration: `C * D / f`.
pub fn local_iter_time(p: &UeProfile) -> f64 {
    p.cycles_per_sample * p.data_size as f64 / p.cpu_freq
}

/// Joules per local iteration: `kappa * C * D * f^2`.
pub fn local_iter_energy(p: &UeProfile) -> f64 {
    p.eff_capacitance * p.cycles_per_sample * p.data_size as f64 * p.cpu_freq * p.cpu_freq
}

/// Local iterations needed to reach relative accuracy `theta`.
pub fn local_iterations(theta: f64, law: &AccuracyLaw) -> Result<f64, CostError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(domain("theta", theta, "(0, 1]"));
    }
    Ok(law.nu * (1.0 / theta).ln())
}

/// Global rounds needed when every local solve reaches accuracy `theta`.
pub fn global_rounds(theta: f64, law: &AccuracyLaw) -> Result<f64, CostError> {
    if !(0.0..1.0).contains(&theta) {
        return Err(domain("theta", theta, "[0, 1)"));
    }
    Ok(law.a / (1.0 - theta))
}

/// Per-profile cost coefficients, independent of `theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostTerms {
    /// Weighted cost of one local iteration.
    pub per_iteration: f64,
    /// Weighted cost of one upload.
    pub per_upload: f64,
    pub sensitivity: f64,
}

impl CostTerms {
    pub fn of(p: &UeProfile) -> Self {
        Self {
            per_iteration: p.weight_energy * local_iter_energy(p)
                + p.weight_time * local_iter_time(p),
            per_upload: p.weight_time * p.comm_time_norm,
            sensitivity: p.cost_sensitivity,
        }
    }

    pub fn per_round(&self, theta: f64, law: &AccuracyLaw) -> Result<f64, CostError> {
        Ok(self.per_iteration * local_iterations(theta, law)? + self.per_upload)
    }

    pub fn session(&self, theta: f64, law: &AccuracyLaw) -> Result<f64, CostError> {
        Ok(self.sensitivity * self.per_round(theta, law)? * global_rounds(theta, law)?)
    }
}

/// Cost of one global round: local iterations plus one upload.
pub fn per_round_cost(p: &UeProfile, theta: f64, law: &AccuracyLaw) -> Result<f64, CostError> {
    CostTerms::of(p).per_round(theta, law)
}

/// Cost over the whole training session, scaled by the device's sensitivity.
pub fn session_cost(p: &UeProfile, theta: f64, law: &AccuracyLaw) -> Result<f64, CostError> {
    CostTerms::of(p).session(theta, law)
}
