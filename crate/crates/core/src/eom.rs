//! Mach-Zehnder type electro-optic modulator model.
//!
//! Output power follows the raised-cosine transfer function
//! `P_out = P_in * (1/2 + f_ib * cos(pi / V_pi * (V_0 - V_c)))`, whose minimum
//! used throughout this crate sits at `V_c = V_0 - V_pi`. Around that point the
//! cosine is replaced by its quadratic Taylor polynomial, which splits the
//! output into a DC term plus tones at the pilot frequency and its double.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{invalid, Result};

/// Physical modulator constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EomParams {
    /// Optical input power in watts.
    pub p_in: f64,
    /// Half-wave voltage in volts.
    pub v_pi: f64,
    /// Zero-field phase-equivalent voltage in volts.
    pub v_0: f64,
    /// Optical imbalance factor, `0 < f_ib <= 0.5`.
    pub f_ib: f64,
}

impl EomParams {
    pub fn new(p_in: f64, v_pi: f64, v_0: f64, f_ib: f64) -> Result<Self> {
        if !(p_in > 0.0 && p_in.is_finite()) {
            return Err(invalid("p_in", format!("must be positive and finite, got {p_in}")));
        }
        if !(v_pi > 0.0 && v_pi.is_finite()) {
            return Err(invalid("v_pi", format!("must be positive and finite, got {v_pi}")));
        }
        if !v_0.is_finite() {
            return Err(invalid("v_0", format!("must be finite, got {v_0}")));
        }
        if !(f_ib > 0.0 && f_ib <= 0.5) {
            return Err(invalid("f_ib", format!("must lie in (0, 0.5], got {f_ib}")));
        }
        Ok(Self {
            p_in,
            v_pi,
            v_0,
            f_ib,
        })
    }

    /// Control voltage of the targeted transmission minimum, `V_0 - V_pi`.
    pub fn v_min(&self) -> f64 {
        self.v_0 - self.v_pi
    }

    /// Lowest attainable output power, `P_in * (1/2 - f_ib)`.
    pub fn floor_power(&self) -> f64 {
        self.p_in * (0.5 - self.f_ib)
    }

    /// Highest attainable output power, `P_in * (1/2 + f_ib)`.
    pub fn peak_power(&self) -> f64 {
        self.p_in * (0.5 + self.f_ib)
    }
}

/// Spectral content of the quadratic-Taylor output power.
///
/// The waveform is
/// `s_dc + s_1fd * sin(w_d t + phi_1fd) + s_2fd * sin(2 w_d t + phi_2fd)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicComponents {
    pub s_dc: f64,
    pub s_1fd: f64,
    pub s_2fd: f64,
    pub phi_1fd: f64,
    pub phi_2fd: f64,
}

/// Exact output power for control voltage `v_c`.
pub fn optical_output_power(params: &EomParams, v_c: f64) -> f64 {
    params.p_in * (0.5 + params.f_ib * (PI / params.v_pi * (params.v_0 - v_c)).cos())
}

/// Quadratic-Taylor output power at time `t` for a bias offset `delta_v`
/// below the minimum and a pilot `-v_d * sin(omega_d t + phi_d)`.
pub fn taylor_output_power(
    params: &EomParams,
    delta_v: f64,
    v_d: f64,
    omega_d: f64,
    phi_d: f64,
    t: f64,
) -> f64 {
    let k = PI / params.v_pi;
    let dev = delta_v + v_d * (omega_d * t + phi_d).sin();
    // (1/2 - f_ib) grouped first to avoid cancelling against the quadratic term.
    params.p_in * ((0.5 - params.f_ib) + 0.5 * params.f_ib * k * k * dev * dev)
}

pub fn harmonic_components(
    params: &EomParams,
    delta_v: f64,
    v_d: f64,
    phi_d: f64,
) -> HarmonicComponents {
    let k = PI / params.v_pi;
    let gain = params.p_in * params.f_ib / 2.0 * k * k;
    HarmonicComponents {
        s_dc: params.p_in
            * (0.5 - params.f_ib
                + params.f_ib / 2.0 * k * k * (0.5 * v_d * v_d + delta_v * delta_v)),
        s_1fd: gain * 2.0 * delta_v * v_d,
        s_2fd: gain * 0.5 * v_d * v_d,
        phi_1fd: phi_d,
        phi_2fd: 2.0 * phi_d - FRAC_PI_2,
    }
}
