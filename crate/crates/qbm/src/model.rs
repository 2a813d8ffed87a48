//! Parameter types and the dissipation kernel.
//!
//! Every formula downstream consumes a [`ReducedParams`] quintuple
//! `(gamma, omega_c, omega_th, mass, hbar)`; this module owns the conversion
//! from laboratory inputs and the Fourier transform of the two supported
//! memory kernels.

use num_complex::Complex64;

use crate::error::{QbmError, Result};

/// The reduced parameter set consumed by every MSD route.
///
/// All frequencies are angular. `omega_th = 2 k_B T / hbar` is twice the
/// thermal frequency and `omega_c` the cyclotron frequency; both may be zero
/// (zero temperature, uncharged particle). `gamma` is the friction rate of
/// the Ohmic kernel and must be positive: the spectral denominator of the
/// displacement integral only stays clear of the real axis for `gamma > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedParams {
    /// Friction rate, > 0.
    pub gamma: f64,
    /// Cyclotron frequency `qB/(mc)`, >= 0.
    pub omega_c: f64,
    /// Thermal frequency scale `2 k_B T / hbar`, >= 0 (0 means T = 0).
    pub omega_th: f64,
    /// Particle mass, > 0.
    pub mass: f64,
    /// Reduced Planck constant in the chosen unit system, > 0.
    pub hbar: f64,
}

impl ReducedParams {
    /// Builds a validated parameter set.
    ///
    /// # Errors
    /// [`QbmError::Invariant`] if any field violates its sign constraint or
    /// is not finite.
    pub fn new(gamma: f64, omega_c: f64, omega_th: f64, mass: f64, hbar: f64) -> Result<Self> {
        let p = Self {
            gamma,
            omega_c,
            omega_th,
            mass,
            hbar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Convenience constructor with `mass = hbar = 1`, the scaling used by
    /// all built-in figures.
    pub fn unit_scales(gamma: f64, omega_c: f64, omega_th: f64) -> Result<Self> {
        Self::new(gamma, omega_c, omega_th, 1.0, 1.0)
    }

    /// Checks the sign and finiteness invariants.
    ///
    /// # Errors
    /// [`QbmError::Invariant`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("gamma", self.gamma, true),
            ("omega_c", self.omega_c, false),
            ("omega_th", self.omega_th, false),
            ("mass", self.mass, true),
            ("hbar", self.hbar, true),
        ];
        for (name, value, strictly_positive) in checks {
            if !value.is_finite() {
                return Err(QbmError::Invariant(format!("{name} = {value} is not finite")));
            }
            if strictly_positive && value <= 0.0 {
                return Err(QbmError::Invariant(format!("{name} = {value}, must be > 0")));
            }
            if !strictly_positive && value < 0.0 {
                return Err(QbmError::Invariant(format!("{name} = {value}, must be >= 0")));
            }
        }
        Ok(())
    }

    /// Thermal energy `k_B T = hbar * omega_th / 2` in the reduced units.
    pub fn thermal_energy(&self) -> f64 {
        0.5 * self.hbar * self.omega_th
    }
}

/// Laboratory-frame inputs, Gaussian units (`omega_c = qB/(mc)`).
///
/// Use this when starting from field strength and temperature rather than
/// from frequencies. For SI data, compute `omega_c` and `omega_th` yourself
/// and build [`ReducedParams`] directly; the conversion below hard-codes the
/// Gaussian `1/c` factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalInputs {
    /// Particle charge. Supply the magnitude: the displacement depends on the
    /// field only through `omega_c^2`, so the sign of the charge is
    /// irrelevant and negative values are rejected during validation.
    pub charge: f64,
    /// Magnetic field strength, >= 0.
    pub field_b: f64,
    /// Particle mass, > 0.
    pub mass: f64,
    /// Speed of light in the chosen units, > 0.
    pub light_speed: f64,
    /// Bath temperature, >= 0.
    pub temperature: f64,
    /// Friction rate, > 0.
    pub gamma: f64,
    /// Reduced Planck constant, > 0.
    pub hbar: f64,
    /// Boltzmann constant, > 0.
    pub k_boltzmann: f64,
}

/// Converts laboratory inputs to the reduced quintuple.
///
/// `omega_c = qB/(mc)` and `omega_th = 2 k_B T / hbar`; `gamma`, `mass` and
/// `hbar` pass through unchanged.
///
/// # Errors
/// [`QbmError::Invariant`] if the inputs violate their sign constraints or
/// produce an invalid reduced set (e.g. negative charge).
pub fn derive_reduced(inputs: &PhysicalInputs) -> Result<ReducedParams> {
    let positive = [
        ("mass", inputs.mass),
        ("light_speed", inputs.light_speed),
        ("gamma", inputs.gamma),
        ("hbar", inputs.hbar),
        ("k_boltzmann", inputs.k_boltzmann),
    ];
    for (name, value) in positive {
        if !(value.is_finite() && value > 0.0) {
            return Err(QbmError::Invariant(format!("{name} = {value}, must be > 0")));
        }
    }
    let nonnegative = [
        ("field_b", inputs.field_b),
        ("temperature", inputs.temperature),
        ("charge", inputs.charge),
    ];
    for (name, value) in nonnegative {
        if !(value.is_finite() && value >= 0.0) {
            return Err(QbmError::Invariant(format!("{name} = {value}, must be >= 0")));
        }
    }
    ReducedParams::new(
        inputs.gamma,
        inputs.charge * inputs.field_b / (inputs.mass * inputs.light_speed),
        2.0 * inputs.k_boltzmann * inputs.temperature / inputs.hbar,
        inputs.mass,
        inputs.hbar,
    )
}

/// Memory-friction kernel of the bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelModel {
    /// Memoryless friction `K(t) = 2 gamma delta(t)`; flat spectrum.
    Ohmic {
        /// Friction rate, > 0.
        gamma: f64,
    },
    /// Exponential memory `K(t) = (gamma/tau) e^{-t/tau}` for `t > 0`;
    /// Lorentzian spectrum with knee at `omega = 1/tau`.
    SingleRelaxation {
        /// Zero-frequency friction rate, > 0.
        gamma: f64,
        /// Memory time, > 0.
        tau: f64,
    },
}

impl KernelModel {
    /// Friction rate shared by both kernel shapes.
    pub fn gamma(&self) -> f64 {
        match *self {
            KernelModel::Ohmic { gamma } => gamma,
            KernelModel::SingleRelaxation { gamma, .. } => gamma,
        }
    }

    /// Checks the sign invariants.
    ///
    /// # Errors
    /// [`QbmError::Invariant`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma().is_finite() && self.gamma() > 0.0) {
            return Err(QbmError::Invariant(format!(
                "kernel gamma = {}, must be > 0",
                self.gamma()
            )));
        }
        if let KernelModel::SingleRelaxation { tau, .. } = *self {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(QbmError::Invariant(format!("kernel tau = {tau}, must be > 0")));
            }
        }
        Ok(())
    }
}

/// Fourier transform `K(omega)` of the memory kernel, convention
/// `K(omega) = integral dt K(t) e^{i omega t}`.
///
/// Ohmic: the real constant `gamma`. Single relaxation:
/// `gamma / (1 - i omega tau)`, i.e. real part `gamma/(1 + omega^2 tau^2)`
/// and imaginary part `gamma omega tau / (1 + omega^2 tau^2)`. The real part
/// is strictly positive for every real `omega`, which is what makes the
/// fluctuation-dissipation weight a valid spectral density, and
/// `K(-omega) = conj K(omega)` because `K(t)` is real.
pub fn kernel_fourier(model: &KernelModel, omega: f64) -> Complex64 {
    match *model {
        KernelModel::Ohmic { gamma } => Complex64::new(gamma, 0.0),
        KernelModel::SingleRelaxation { gamma, tau } => {
            let wt = omega * tau;
            let denom = 1.0 + wt * wt;
            Complex64::new(gamma / denom, gamma * wt / denom)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_params_reject_bad_signs() {
        assert!(ReducedParams::new(0.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(ReducedParams::new(1.0, -0.1, 0.0, 1.0, 1.0).is_err());
        assert!(ReducedParams::new(1.0, 0.0, -0.1, 1.0, 1.0).is_err());
        assert!(ReducedParams::new(1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(ReducedParams::new(1.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(ReducedParams::new(f64::NAN, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(ReducedParams::new(1.0, 0.0, 0.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn derive_reduced_matches_hand_substitution() {
        let inputs = PhysicalInputs {
            charge: 1.0,
            field_b: 2.0,
            mass: 1.0,
            light_speed: 1.0,
            temperature: 0.5,
            gamma: 0.3,
            hbar: 1.0,
            k_boltzmann: 1.0,
        };
        let p = derive_reduced(&inputs).unwrap();
        assert_eq!(p.omega_c, 2.0);
        assert_eq!(p.omega_th, 1.0);
        assert_eq!(p.gamma, 0.3);
        assert_eq!(p.mass, 1.0);
        assert_eq!(p.hbar, 1.0);
    }

    #[test]
    fn derive_reduced_trivial_limits() {
        let mut inputs = PhysicalInputs {
            charge: 0.0,
            field_b: 7.0,
            mass: 2.0,
            light_speed: 3.0,
            temperature: 1.0,
            gamma: 1.0,
            hbar: 1.0,
            k_boltzmann: 1.0,
        };
        assert_eq!(derive_reduced(&inputs).unwrap().omega_c, 0.0);
        inputs.charge = 1.0;
        inputs.temperature = 0.0;
        assert_eq!(derive_reduced(&inputs).unwrap().omega_th, 0.0);
    }

    #[test]
    fn ohmic_kernel_is_flat() {
        let k = KernelModel::Ohmic { gamma: 1.0 };
        assert_eq!(kernel_fourier(&k, 7.3), Complex64::new(1.0, 0.0));
        assert_eq!(kernel_fourier(&k, -7.3), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn srt_kernel_closed_form_points() {
        let k = KernelModel::SingleRelaxation {
            gamma: 1.0,
            tau: 2.0,
        };
        assert_eq!(kernel_fourier(&k, 0.0), Complex64::new(1.0, 0.0));
        let v = kernel_fourier(&k, 1.0);
        assert!((v.re - 0.2).abs() < 1e-15);
        assert!((v.im - 0.4).abs() < 1e-15);
    }

    #[test]
    fn kernel_conjugate_symmetry_and_positivity() {
        let models = [
            KernelModel::Ohmic { gamma: 0.7 },
            KernelModel::SingleRelaxation {
                gamma: 0.7,
                tau: 1.3,
            },
        ];
        for model in &models {
            for i in -40..=40 {
                let omega = f64::from(i) * 0.37;
                let plus = kernel_fourier(model, omega);
                let minus = kernel_fourier(model, -omega);
                assert!(plus.re > 0.0);
                assert_eq!(minus, plus.conj());
            }
        }
    }

    #[test]
    fn srt_approaches_ohmic_linearly_in_omega_tau() {
        let gamma = 2.0;
        let tau = 0.05;
        let srt = KernelModel::SingleRelaxation { gamma, tau };
        for i in 1..=100 {
            let omega = f64::from(i) * 0.2;
            if omega * tau > 1.0 {
                break;
            }
            let diff = (kernel_fourier(&srt, omega) - Complex64::new(gamma, 0.0)).norm();
            assert!(
                diff <= gamma * omega * tau * (1.0 + 1e-12),
                "omega = {omega}: |K - gamma| = {diff}"
            );
        }
    }
}
