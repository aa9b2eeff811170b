//! Semiclassical description of bright light.
//!
//! Many-photon pulses are carried as coherent field amplitudes per mode.
//! Linear optics acts on the amplitudes with the same 2x2 matrices as on
//! creation operators; the mean photon number in a mode is `|field|^2`.
//! Intensities are used deterministically (no shot noise).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;

use super::mode::{Basis, ModeId, Pulse};
use super::unitary::TwoModeUnitary;
use super::StateError;

/// Linear polarization directions used for bright pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinearPolarization {
    Horizontal,
    Vertical,
    Diagonal,
    AntiDiagonal,
}

impl LinearPolarization {
    pub const ALL: [LinearPolarization; 4] = [
        LinearPolarization::Horizontal,
        LinearPolarization::Vertical,
        LinearPolarization::Diagonal,
        LinearPolarization::AntiDiagonal,
    ];

    /// The polarization of the BB84 state `(basis, bit)`.
    pub fn of_bb84(basis: Basis, bit: u8) -> Self {
        match (basis, bit) {
            (Basis::Computational, 0) => LinearPolarization::Horizontal,
            (Basis::Computational, _) => LinearPolarization::Vertical,
            (Basis::Hadamard, 0) => LinearPolarization::Diagonal,
            (Basis::Hadamard, _) => LinearPolarization::AntiDiagonal,
        }
    }

    /// Unit field vector over (H, V).
    pub fn jones(self) -> [f64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            LinearPolarization::Horizontal => [1.0, 0.0],
            LinearPolarization::Vertical => [0.0, 1.0],
            LinearPolarization::Diagonal => [s, s],
            LinearPolarization::AntiDiagonal => [s, -s],
        }
    }
}

impl fmt::Display for LinearPolarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinearPolarization::Horizontal => "H",
            LinearPolarization::Vertical => "V",
            LinearPolarization::Diagonal => "+45",
            LinearPolarization::AntiDiagonal => "-45",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MacroPulse {
    fields: BTreeMap<ModeId, Complex64>,
}

impl MacroPulse {
    pub fn dark() -> Self {
        Self::default()
    }

    /// `photons` mean photons in `pulse`, linearly polarized along `pol`.
    pub fn polarized(pulse: Pulse, pol: LinearPolarization, photons: f64) -> Result<Self, StateError> {
        if !(photons >= 0.0 && photons.is_finite()) {
            return Err(StateError::NegativeIntensity(photons));
        }
        let amp = photons.sqrt();
        let [h, v] = pol.jones();
        let mut fields = BTreeMap::new();
        fields.insert(pulse.h(), Complex64::new(amp * h, 0.0));
        fields.insert(pulse.v(), Complex64::new(amp * v, 0.0));
        Ok(Self { fields }.pruned())
    }

    pub fn field(&self, mode: &ModeId) -> Complex64 {
        self.fields.get(mode).copied().unwrap_or_default()
    }

    pub fn intensity(&self, mode: &ModeId) -> f64 {
        self.field(mode).norm_sqr()
    }

    /// Mean photon number per mode, zero modes omitted.
    pub fn intensities(&self) -> BTreeMap<ModeId, f64> {
        self.fields.iter().map(|(m, a)| (*m, a.norm_sqr())).collect()
    }

    pub fn total_intensity(&self) -> f64 {
        self.fields.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn modes(&self) -> BTreeSet<ModeId> {
        self.fields.keys().copied().collect()
    }

    pub fn pulses(&self) -> BTreeSet<Pulse> {
        self.fields.keys().map(ModeId::pulse).collect()
    }

    pub fn combined(mut self, other: &MacroPulse) -> Self {
        for (m, a) in &other.fields {
            *self.fields.entry(*m).or_default() += a;
        }
        self.pruned()
    }

    pub fn apply_two_mode(&self, inputs: (ModeId, ModeId), outputs: (ModeId, ModeId), u: &TwoModeUnitary) -> Self {
        let mut fields = self.fields.clone();
        let a0 = fields.remove(&inputs.0).unwrap_or_default();
        let a1 = fields.remove(&inputs.1).unwrap_or_default();
        let [b0, b1] = u.apply([a0, a1]);
        *fields.entry(outputs.0).or_default() += b0;
        *fields.entry(outputs.1).or_default() += b1;
        Self { fields }.pruned()
    }

    pub fn relabel(&self, mapping: &[(ModeId, ModeId)]) -> Self {
        let map: BTreeMap<ModeId, ModeId> = mapping.iter().copied().collect();
        let mut fields = BTreeMap::new();
        for (m, a) in &self.fields {
            *fields.entry(map.get(m).copied().unwrap_or(*m)).or_default() += a;
        }
        Self { fields }.pruned()
    }

    fn pruned(mut self) -> Self {
        self.fields.retain(|_, a| a.norm_sqr() > 1e-12);
        self
    }
}

impl fmt::Display for MacroPulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.fields.is_empty() {
            return f.write_str("dark");
        }
        let parts: Vec<String> = self.intensities().iter().map(|(m, i)| format!("{m}={i:.1}")).collect();
        f.write_str(&parts.join(" "))
    }
}
