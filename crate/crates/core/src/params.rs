//! Physical parameters and the quantities derived from them.
//!
//! Everything here is SI with angular frequencies in rad/s. The per-2π
//! convention only appears at the config boundary (see [`ParamKey`]).

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Speed of light, m/s.
    pub c: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Gyromagnetic ratio, rad·s⁻¹·T⁻¹.
    pub gamma_gyro: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 values with γ/2π = 28 GHz/T.
    pub const SI: PhysicalConstants = PhysicalConstants {
        c: 299_792_458.0,
        hbar: 1.054_571_817e-34,
        k_b: 1.380_649e-23,
        gamma_gyro: 2.0 * PI * 28.0e9,
    };

    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("c", self.c),
            ("hbar", self.hbar),
            ("k_b", self.k_b),
            ("gamma_gyro", self.gamma_gyro),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(key, "must be finite and > 0"));
            }
        }
        let ratio = self.gamma_gyro / (2.0 * PI * 28.0e9);
        if (ratio - 1.0).abs() > 1e-3 {
            return Err(invalid("gamma_gyro", "γ/2π must be 28 GHz/T within 0.1%"));
        }
        Ok(())
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

/// Optical and magnetic properties of the ferromagnetic sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    /// Verdet constant, rad/m.
    pub verdet: f64,
    pub n_r: f64,
    /// Spin density, m⁻³.
    pub n_spin: f64,
    /// Sphere radius, m.
    pub radius: f64,
}

impl MaterialParams {
    /// YIG at telecom wavelength: 𝒱 = 3.77 rad/cm, n_r = 2.19, n_spin = 2.1×10²⁸ m⁻³,
    /// r = 125 µm.
    pub fn yig() -> Self {
        MaterialParams {
            verdet: 377.0,
            n_r: 2.19,
            n_spin: 2.1e28,
            radius: 125.0e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("verdet", self.verdet)?;
        if !(self.n_r.is_finite() && self.n_r >= 1.0) {
            return Err(invalid("refractive_index", "must be >= 1"));
        }
        positive("spin_density", self.n_spin)?;
        positive("radius", self.radius)?;
        Ok(())
    }

    pub fn sphere_volume(&self) -> f64 {
        4.0 * PI / 3.0 * self.radius.powi(3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub material: MaterialParams,
    /// Bias field, T.
    pub b0: f64,
    /// Pump power, W.
    pub pump_power: f64,
    /// Pump wavelength, m.
    pub pump_wavelength: f64,
    pub q_optical: f64,
    /// Microwave resonance, rad/s.
    pub omega_b: f64,
    pub kappa_m: f64,
    pub kappa_b: f64,
    /// Kelvin.
    pub temperature: f64,
    pub delta_m: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    pub g_mb: f64,
}

impl PhysicalParams {
    /// Operating point used throughout the figures: κ_m/2π = κ_b/2π = 1 MHz,
    /// B₀ = 100 mT, P_p = 15 mW, λ_p = 1550 nm, Q = 5×10⁷, ω_b/2π = 9 GHz,
    /// g_mb/2π = 6.8 MHz, T = 10 mK, all detunings zero.
    pub fn baseline() -> Self {
        let two_pi = 2.0 * PI;
        PhysicalParams {
            material: MaterialParams::yig(),
            b0: 0.1,
            pump_power: 15.0e-3,
            pump_wavelength: 1550.0e-9,
            q_optical: 5.0e7,
            omega_b: two_pi * 9.0e9,
            kappa_m: two_pi * 1.0e6,
            kappa_b: two_pi * 1.0e6,
            temperature: 0.01,
            delta_m: 0.0,
            delta_a: 0.0,
            delta_b: 0.0,
            g_mb: two_pi * 6.8e6,
        }
    }

    /// Sets Δ_a = Δ and Δ_b = −Δ.
    pub fn with_linked_delta(mut self, delta: f64) -> Self {
        self.delta_a = delta;
        self.delta_b = -delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.material.validate()?;
        for key in ParamKey::ALL {
            let v = key.get(self);
            if !v.is_finite() {
                return Err(invalid(key.name(), "must be finite"));
            }
            if !key.is_signed() && v < 0.0 {
                return Err(invalid(key.name(), "must be >= 0"));
            }
        }
        positive(ParamKey::PumpWavelength.name(), self.pump_wavelength)?;
        Ok(())
    }
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self::baseline()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    /// γ·B₀, rad/s.
    pub omega_m: f64,
    /// 2πc/λ_p, rad/s.
    pub omega_p: f64,
    /// TM optical mode frequency; equal to `omega_p`.
    pub omega_a: f64,
    /// ω_a/Q, rad/s. Shared by both optical modes.
    pub kappa_a: f64,
    /// m³.
    pub v_sp: f64,
    pub g_ma: f64,
    pub n_pump: f64,
    /// g_ma·√n̄_p, rad/s.
    pub big_g_ma: f64,
    pub n_m: f64,
    pub n_a: f64,
    pub n_b: f64,
}

/// Bare optomagnonic coupling 𝒱·(c/n_r)·√(2/(n_spin·V_sp)).
pub fn coupling_g_ma(material: &MaterialParams, constants: &PhysicalConstants) -> Result<f64> {
    let spins = material.n_spin * material.sphere_volume();
    if !(spins > 0.0) || !spins.is_finite() {
        return Err(Error::Domain(format!("n_spin·V_sp = {spins:e} must be > 0")));
    }
    Ok(material.verdet * (constants.c / material.n_r) * (2.0 / spins).sqrt())
}

/// Intracavity photon number n̄_p = 4·P_p/(κ_a1·ħ·ω_p).
pub fn intracavity_photons(
    pump_power: f64,
    kappa_a1: f64,
    omega_p: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    if !(kappa_a1 > 0.0) {
        return Err(Error::Domain(format!("kappa_a1 = {kappa_a1:e} must be > 0")));
    }
    if !(omega_p > 0.0) {
        return Err(Error::Domain(format!("omega_p = {omega_p:e} must be > 0")));
    }
    Ok(4.0 * pump_power / (kappa_a1 * constants.hbar * omega_p))
}

/// Bose–Einstein occupation 1/(exp(ħω/k_BT) − 1); exactly zero at T = 0.
pub fn thermal_occupation(omega: f64, temperature: f64, constants: &PhysicalConstants) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = constants.hbar * omega / (constants.k_b * temperature);
    // exp_m1 overflows to +inf for x > ~709, giving 0 as it should.
    1.0 / x.exp_m1()
}

pub fn derive(params: &PhysicalParams, constants: &PhysicalConstants) -> Result<DerivedParams> {
    params.validate()?;
    constants.validate()?;
    let omega_m = constants.gamma_gyro * params.b0;
    let omega_p = 2.0 * PI * constants.c / params.pump_wavelength;
    let omega_a = omega_p;
    if !(params.q_optical > 0.0) {
        return Err(invalid("q_optical", "must be > 0"));
    }
    let kappa_a = omega_a / params.q_optical;
    let g_ma = coupling_g_ma(&params.material, constants)?;
    let n_pump = intracavity_photons(params.pump_power, kappa_a, omega_p, constants)?;
    Ok(DerivedParams {
        omega_m,
        omega_p,
        omega_a,
        kappa_a,
        v_sp: params.material.sphere_volume(),
        g_ma,
        n_pump,
        big_g_ma: g_ma * n_pump.sqrt(),
        n_m: thermal_occupation(omega_m, params.temperature, constants),
        n_a: thermal_occupation(omega_a, params.temperature, constants),
        n_b: thermal_occupation(params.omega_b, params.temperature, constants),
    })
}

/// Externally visible parameter names, in the units used by config files and
/// sweep axes. Frequencies carry an explicit `_over_2pi_hz` suffix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKey {
    Verdet,
    RefractiveIndex,
    SpinDensity,
    Radius,
    B0,
    PumpPower,
    PumpWavelength,
    QOptical,
    OmegaB,
    KappaM,
    KappaB,
    Temperature,
    DeltaM,
    DeltaA,
    DeltaB,
    GMb,
}

impl ParamKey {
    pub const ALL: [ParamKey; 16] = [
        ParamKey::Verdet,
        ParamKey::RefractiveIndex,
        ParamKey::SpinDensity,
        ParamKey::Radius,
        ParamKey::B0,
        ParamKey::PumpPower,
        ParamKey::PumpWavelength,
        ParamKey::QOptical,
        ParamKey::OmegaB,
        ParamKey::KappaM,
        ParamKey::KappaB,
        ParamKey::Temperature,
        ParamKey::DeltaM,
        ParamKey::DeltaA,
        ParamKey::DeltaB,
        ParamKey::GMb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamKey::Verdet => "verdet_rad_per_m",
            ParamKey::RefractiveIndex => "refractive_index",
            ParamKey::SpinDensity => "spin_density_per_m3",
            ParamKey::Radius => "radius_m",
            ParamKey::B0 => "b0_t",
            ParamKey::PumpPower => "pump_power_w",
            ParamKey::PumpWavelength => "pump_wavelength_m",
            ParamKey::QOptical => "q_optical",
            ParamKey::OmegaB => "omega_b_over_2pi_hz",
            ParamKey::KappaM => "kappa_m_over_2pi_hz",
            ParamKey::KappaB => "kappa_b_over_2pi_hz",
            ParamKey::Temperature => "temperature_k",
            ParamKey::DeltaM => "delta_m_over_2pi_hz",
            ParamKey::DeltaA => "delta_a_over_2pi_hz",
            ParamKey::DeltaB => "delta_b_over_2pi_hz",
            ParamKey::GMb => "g_mb_over_2pi_hz",
        }
    }

    pub fn from_name(name: &str) -> Option<ParamKey> {
        ParamKey::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_signed(self) -> bool {
        matches!(self, ParamKey::DeltaM | ParamKey::DeltaA | ParamKey::DeltaB)
    }

    fn per_2pi(self) -> bool {
        self.name().ends_with("_over_2pi_hz")
    }

    /// Value in external units.
    pub fn get(self, p: &PhysicalParams) -> f64 {
        let raw = match self {
            ParamKey::Verdet => p.material.verdet,
            ParamKey::RefractiveIndex => p.material.n_r,
            ParamKey::SpinDensity => p.material.n_spin,
            ParamKey::Radius => p.material.radius,
            ParamKey::B0 => p.b0,
            ParamKey::PumpPower => p.pump_power,
            ParamKey::PumpWavelength => p.pump_wavelength,
            ParamKey::QOptical => p.q_optical,
            ParamKey::OmegaB => p.omega_b,
            ParamKey::KappaM => p.kappa_m,
            ParamKey::KappaB => p.kappa_b,
            ParamKey::Temperature => p.temperature,
            ParamKey::DeltaM => p.delta_m,
            ParamKey::DeltaA => p.delta_a,
            ParamKey::DeltaB => p.delta_b,
            ParamKey::GMb => p.g_mb,
        };
        if self.per_2pi() {
            raw / (2.0 * PI)
        } else {
            raw
        }
    }

    /// Sets from a value in external units.
    pub fn set(self, p: &mut PhysicalParams, value: f64) {
        let v = if self.per_2pi() { value * 2.0 * PI } else { value };
        let slot = match self {
            ParamKey::Verdet => &mut p.material.verdet,
            ParamKey::RefractiveIndex => &mut p.material.n_r,
            ParamKey::SpinDensity => &mut p.material.n_spin,
            ParamKey::Radius => &mut p.material.radius,
            ParamKey::B0 => &mut p.b0,
            ParamKey::PumpPower => &mut p.pump_power,
            ParamKey::PumpWavelength => &mut p.pump_wavelength,
            ParamKey::QOptical => &mut p.q_optical,
            ParamKey::OmegaB => &mut p.omega_b,
            ParamKey::KappaM => &mut p.kappa_m,
            ParamKey::KappaB => &mut p.kappa_b,
            ParamKey::Temperature => &mut p.temperature,
            ParamKey::DeltaM => &mut p.delta_m,
            ParamKey::DeltaA => &mut p.delta_a,
            ParamKey::DeltaB => &mut p.delta_b,
            ParamKey::GMb => &mut p.g_mb,
        };
        *slot = v;
    }
}

fn invalid(key: &str, reason: &str) -> Error {
    Error::InvalidParam {
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, "must be finite and > 0"))
    }
}
