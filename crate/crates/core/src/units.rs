//! Physical constants, K/J conversion and the droplet scale hierarchy.
//!
//! Lengths are stored in Å and energies in J throughout the crate. Kelvin
//! only shows up at I/O boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Reduced Planck constant (J·s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380_649e-23;
/// Mass of a ⁴He atom (kg).
pub const M_HE4: f64 = 6.646_473_1e-27;

/// m² per Å².
pub const ANGSTROM2_IN_M2: f64 = 1e-20;

/// Default nearest-neighbour distance for liquid helium (Å).
pub const DEFAULT_L_ANGSTROM: f64 = 3.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Constants {
    pub hbar: f64,
    #[serde(rename = "k_B")]
    pub k_b: f64,
    pub m: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self {
            hbar: HBAR,
            k_b: K_B,
            m: M_HE4,
        }
    }
}

impl Constants {
    pub fn kelvin_to_joule(&self, t: f64) -> f64 {
        t * self.k_b
    }

    pub fn joule_to_kelvin(&self, e: f64) -> f64 {
        e / self.k_b
    }

    /// ℏ²/(2 m_eff) in J·Å², with `m_eff = mass_scale · m`.
    pub fn kinetic_prefactor(&self, mass_scale: f64) -> f64 {
        self.hbar * self.hbar / (2.0 * mass_scale * self.m) / ANGSTROM2_IN_M2
    }

    /// ℏ²/(m λ²) in J for a length λ in Å.
    pub fn energy_unit(&self, length: f64) -> f64 {
        2.0 * self.kinetic_prefactor(1.0) / (length * length)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.hbar > 0.0 && self.k_b > 0.0 && self.m > 0.0) {
            return invalid("constants must be positive");
        }
        Ok(())
    }
}

/// Convert a temperature in K to an energy in J with CODATA k_B.
pub fn kelvin_to_joule(t: f64) -> f64 {
    t * K_B
}

pub fn joule_to_kelvin(e: f64) -> f64 {
    e / K_B
}

/// Droplet geometry: particle count, nearest-neighbour spacing `l`, size `big_l`,
/// number density `n` and the scale ratio `epsilon = l / L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DropletSpec {
    pub n_particles: u64,
    pub l: f64,
    pub epsilon: f64,
    pub big_l: f64,
    pub density: f64,
}

impl DropletSpec {
    /// Canonical construction with `epsilon = N^(-1/3)`, `L = l N^(1/3)`, `n = l^(-3)`.
    pub fn new(n_particles: u64, l: f64) -> Result<Self> {
        if n_particles < 2 {
            return invalid(format!("droplet needs N >= 2, got {n_particles}"));
        }
        if !(l > 0.0 && l.is_finite()) {
            return invalid(format!("nearest-neighbour distance must be positive, got {l}"));
        }
        let cube_root = (n_particles as f64).cbrt();
        Ok(Self {
            n_particles,
            l,
            epsilon: 1.0 / cube_root,
            big_l: l * cube_root,
            density: l.powi(-3),
        })
    }
}

pub fn make_droplet(n_particles: u64, l: f64) -> Result<DropletSpec> {
    DropletSpec::new(n_particles, l)
}
