//! Equivalent-circuit frequency response of a single RIS unit element.
//!
//! Each element is a resonant circuit made of a resistor `R`, a tunable
//! capacitor `C` and two inductors `L1`, `L2`. The reflection coefficient is
//! evaluated through the rational form `phi = 1 - 2 / (1 + D/N)`, which is
//! algebraically identical to `(Z - Z0) / (Z + Z0)` but exposes the
//! numerator/denominator polynomials in `C` needed for the analytic
//! derivative.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Angular factor of the impedance expressions (`kappa = 2 pi`).
pub const KAPPA: f64 = 2.0 * PI;

/// Below this magnitude `N + D` is treated as a resonance singularity.
const RESONANCE_FLOOR: f64 = 1e-30;

/// RLC constants of one unit element plus the capacitance box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// Loss resistance in ohms.
    #[serde(rename = "R")]
    pub r: f64,
    /// Inductance in henries.
    #[serde(rename = "L1")]
    pub l1: f64,
    /// Inductance in henries.
    #[serde(rename = "L2")]
    pub l2: f64,
    /// Free-space impedance in ohms.
    #[serde(rename = "Z0")]
    pub z0: f64,
    /// Lower capacitance bound in farads.
    pub c_min: f64,
    /// Upper capacitance bound in farads.
    pub c_max: f64,
}

impl Default for CircuitParams {
    /// Varactor-loaded element: 2.5 nH / 0.7 nH / 1 ohm, box [0.47, 2.35] pF.
    fn default() -> Self {
        Self {
            r: 1.0,
            l1: 2.5e-9,
            l2: 0.7e-9,
            z0: 377.0,
            c_min: 0.47e-12,
            c_max: 2.35e-12,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r >= 0.0) || !self.r.is_finite() {
            return Err(invalid("R", "must be finite and >= 0"));
        }
        if !(self.l1 > 0.0) || !self.l1.is_finite() {
            return Err(invalid("L1", "must be finite and > 0"));
        }
        if !(self.l2 > 0.0) || !self.l2.is_finite() {
            return Err(invalid("L2", "must be finite and > 0"));
        }
        if !(self.z0 > 0.0) || !self.z0.is_finite() {
            return Err(invalid("Z0", "must be finite and > 0"));
        }
        if !(self.c_min > 0.0) {
            return Err(invalid("c_min", "must be > 0"));
        }
        if !(self.c_max > self.c_min) || !self.c_max.is_finite() {
            return Err(invalid("c_max", "must be finite and > c_min"));
        }
        Ok(())
    }

    /// Clamps `c` into `[c_min, c_max]`.
    pub fn clamp(&self, c: f64) -> f64 {
        c.clamp(self.c_min, self.c_max)
    }

    pub fn contains(&self, c: f64) -> bool {
        c >= self.c_min && c <= self.c_max
    }
}

fn check_domain(f: f64, c: f64) -> Result<()> {
    if !(f > 0.0) || !f.is_finite() {
        return Err(Error::Domain(format!("frequency must be > 0, got {f}")));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("capacitance must be > 0, got {c}")));
    }
    Ok(())
}

/// Characteristic impedance `Z(f, C)` of the equivalent circuit.
pub fn impedance(f: f64, c: f64, p: &CircuitParams) -> Result<Complex64> {
    check_domain(f, c)?;
    let j = Complex64::i();
    let w = KAPPA * f;
    let cap = 1.0 / (j * w * c);
    let branch = j * w * p.l2 + p.r + cap;
    let total = j * w * (p.l1 + p.l2) + p.r + cap;
    Ok(j * w * p.l1 * branch / total)
}

/// Numerator polynomial `N(f, C)` of the rational reflection form.
fn numerator(w: f64, c: f64, p: &CircuitParams) -> Complex64 {
    Complex64::new(1.0 - w * w * (p.l1 + p.l2) * c, w * p.r * c)
}

/// Denominator polynomial `D(f, C)` of the rational reflection form.
fn denominator(w: f64, c: f64, p: &CircuitParams) -> Complex64 {
    let inner = Complex64::new(1.0 - w * w * p.l2 * c, w * p.r * c);
    Complex64::new(0.0, w * p.l1 / p.z0) * inner
}

fn guarded_sum(n: Complex64, d: Complex64, f: f64, c: f64) -> Result<Complex64> {
    let s = n + d;
    if s.norm() < RESONANCE_FLOOR {
        return Err(Error::Numeric(format!(
            "resonance singularity at f = {f} Hz, C = {c} F"
        )));
    }
    Ok(s)
}

/// Reflection coefficient `phi(f, C)` of one unit element.
pub fn reflection(f: f64, c: f64, p: &CircuitParams) -> Result<Complex64> {
    check_domain(f, c)?;
    let w = KAPPA * f;
    let n = numerator(w, c, p);
    let d = denominator(w, c, p);
    let s = guarded_sum(n, d, f, c)?;
    // 1 - 2 / (1 + D/N) == 1 - 2N / (N + D)
    Ok(Complex64::new(1.0, 0.0) - 2.0 * n / s)
}

/// Reflection coefficient through the impedance mismatch `(Z - Z0)/(Z + Z0)`.
///
/// Kept as the reference route for the rational form used by [`reflection`].
pub fn reflection_from_impedance(f: f64, c: f64, p: &CircuitParams) -> Result<Complex64> {
    let z = impedance(f, c, p)?;
    let s = z + p.z0;
    if s.norm() < RESONANCE_FLOOR {
        return Err(Error::Numeric(format!(
            "impedance mismatch singular at f = {f} Hz, C = {c} F"
        )));
    }
    Ok((z - p.z0) / s)
}

/// Analytic derivative `d(phi*)/dC` in 1/F.
pub fn reflection_conj_grad(f: f64, c: f64, p: &CircuitParams) -> Result<Complex64> {
    check_domain(f, c)?;
    let w = KAPPA * f;
    let n_c = numerator(w, c, p).conj();
    let d_c = denominator(w, c, p).conj();
    let s_c = guarded_sum(n_c, d_c, f, c)?;
    let dn_c = Complex64::new(-w * w * (p.l1 + p.l2), -w * p.r);
    let dd_c = Complex64::new(0.0, -w * p.l1 / p.z0) * Complex64::new(-w * w * p.l2, -w * p.r);
    Ok(-2.0 * (dn_c * d_c - n_c * dd_c) / (s_c * s_c))
}
