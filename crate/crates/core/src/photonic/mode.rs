//! Mode labels for the multimode Fock space.
//!
//! A mode is one independent photonic degree of freedom: a time bin, a
//! spatial path and a polarization. The derived ordering (time bin, then
//! path, then polarization) is the canonical order used everywhere a state
//! is printed or serialized.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// BB84 measurement / preparation basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Computational,
    Hadamard,
}

impl Basis {
    pub const BOTH: [Basis; 2] = [Basis::Computational, Basis::Hadamard];

    pub fn other(self) -> Basis {
        match self {
            Basis::Computational => Basis::Hadamard,
            Basis::Hadamard => Basis::Computational,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Basis::Computational => 0,
            Basis::Hadamard => 1,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Basis::Computational => "Z",
            Basis::Hadamard => "X",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Computational => "computational",
            Basis::Hadamard => "hadamard",
        })
    }
}

/// Symbolic time-bin label. Bins are totally ordered by their index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeBin(pub u8);

impl TimeBin {
    /// Early bin, before the nominal signal slot.
    pub const T0: TimeBin = TimeBin(0);
    /// Nominal slot in which Alice's pulses arrive.
    pub const T_HALF: TimeBin = TimeBin(1);
    /// Late bin, after the nominal signal slot.
    pub const T1: TimeBin = TimeBin(2);

    pub const STANDARD: [TimeBin; 3] = [TimeBin::T0, TimeBin::T_HALF, TimeBin::T1];
}

impl fmt::Display for TimeBin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            0 => f.write_str("t0"),
            1 => f.write_str("t_half"),
            2 => f.write_str("t1"),
            n => write!(f, "bin{n}"),
        }
    }
}

impl FromStr for TimeBin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "t0" => Ok(TimeBin::T0),
            "t_half" => Ok(TimeBin::T_HALF),
            "t1" => Ok(TimeBin::T1),
            other => other
                .strip_prefix("bin")
                .and_then(|n| n.parse::<u8>().ok())
                .map(TimeBin)
                .ok_or_else(|| format!("unknown time bin `{other}` (expected t0, t_half, t1 or binN)")),
        }
    }
}

impl TryFrom<String> for TimeBin {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<TimeBin> for String {
    fn from(value: TimeBin) -> Self {
        value.to_string()
    }
}

/// Spatial path of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Path {
    /// Bob's regular input port.
    Regular,
    /// The receiver's nominally unused input port.
    Blocked,
    /// Internal arm behind the passive receiver's entry beam splitter.
    Arm(Basis),
    /// Arm terminating on detector `n`.
    Detector(u8),
    /// Eve's private path (stolen photons).
    Eve,
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Path::Regular => f.write_str("r"),
            Path::Blocked => f.write_str("b"),
            Path::Arm(basis) => write!(f, "arm_{}", basis.short().to_lowercase()),
            Path::Detector(n) => write!(f, "d{n}"),
            Path::Eve => f.write_str("eve"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarization::H => "H",
            Polarization::V => "V",
        })
    }
}

/// A pulse is a (time bin, path) pair carrying two polarization modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pulse {
    pub time_bin: TimeBin,
    pub path: Path,
}

impl Pulse {
    pub fn new(time_bin: TimeBin, path: Path) -> Self {
        Self { time_bin, path }
    }

    pub fn mode(self, polarization: Polarization) -> ModeId {
        ModeId::new(self.time_bin, self.path, polarization)
    }

    pub fn h(self) -> ModeId {
        self.mode(Polarization::H)
    }

    pub fn v(self) -> ModeId {
        self.mode(Polarization::V)
    }
}

impl fmt::Display for Pulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.time_bin, self.path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeId {
    pub time_bin: TimeBin,
    pub path: Path,
    pub polarization: Polarization,
}

impl ModeId {
    pub fn new(time_bin: TimeBin, path: Path, polarization: Polarization) -> Self {
        Self { time_bin, path, polarization }
    }

    pub fn pulse(&self) -> Pulse {
        Pulse::new(self.time_bin, self.path)
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.time_bin, self.path, self.polarization)
    }
}
