//! Sparse pure states over a multimode Fock space.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use num_complex::Complex64;
use rand::{Rng, RngCore};

use super::mode::{Basis, ModeId, Path, Polarization, Pulse, TimeBin};
use super::unitary::TwoModeUnitary;
use super::StateError;

/// Default bound on the total photon number in the exact regime.
pub const DEFAULT_PHOTON_CAP: u32 = 4;

/// Terms with a smaller amplitude magnitude are dropped.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

/// Photon counts per mode. Modes with zero photons are never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector(BTreeMap<ModeId, u32>);

impl OccupationVector {
    pub fn vacuum() -> Self {
        Self::default()
    }

    pub fn from_counts<I: IntoIterator<Item = (ModeId, u32)>>(counts: I) -> Self {
        let mut occ = Self::default();
        for (mode, n) in counts {
            occ.add(mode, n);
        }
        occ
    }

    pub fn get(&self, mode: &ModeId) -> u32 {
        self.0.get(mode).copied().unwrap_or(0)
    }

    pub fn set(&mut self, mode: ModeId, n: u32) {
        if n == 0 {
            self.0.remove(&mode);
        } else {
            self.0.insert(mode, n);
        }
    }

    pub fn add(&mut self, mode: ModeId, n: u32) {
        let current = self.get(&mode);
        self.set(mode, current + n);
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    /// Non-zero entries in canonical mode order.
    pub fn iter(&self) -> impl Iterator<Item = (&ModeId, &u32)> {
        self.0.iter()
    }

    pub fn restrict(&self, modes: &BTreeSet<ModeId>) -> OccupationVector {
        OccupationVector(self.0.iter().filter(|(m, _)| modes.contains(m)).map(|(m, n)| (*m, *n)).collect())
    }

    fn merged(&self, other: &OccupationVector) -> OccupationVector {
        let mut out = self.clone();
        for (m, n) in other.iter() {
            out.add(*m, *n);
        }
        out
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("vac");
        }
        let mut first = true;
        for (m, n) in &self.0 {
            if !first {
                f.write_char(' ')?;
            }
            first = false;
            write!(f, "{m}:{n}")?;
        }
        Ok(())
    }
}

/// A normalized superposition of occupation basis vectors.
///
/// The mode set is tracked explicitly so that vacuum modes still count as
/// "owned" by the state (tensor products must be over disjoint sets).
/// Values are immutable; every operation returns a new state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    modes: BTreeSet<ModeId>,
    terms: BTreeMap<OccupationVector, Complex64>,
    cap: u32,
}

impl PureState {
    pub fn vacuum<I: IntoIterator<Item = ModeId>>(modes: I) -> Result<PureState, StateError> {
        let modes: BTreeSet<ModeId> = modes.into_iter().collect();
        if modes.is_empty() {
            return Err(StateError::EmptyModeSet);
        }
        let mut terms = BTreeMap::new();
        terms.insert(OccupationVector::vacuum(), Complex64::new(1.0, 0.0));
        Ok(PureState { modes, terms, cap: DEFAULT_PHOTON_CAP })
    }

    /// Builds a state from explicit terms and normalizes it.
    pub fn from_terms<I>(modes: I, terms: Vec<(OccupationVector, Complex64)>) -> Result<PureState, StateError>
    where
        I: IntoIterator<Item = ModeId>,
    {
        let mut modes: BTreeSet<ModeId> = modes.into_iter().collect();
        let mut map: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            modes.extend(occ.iter().map(|(m, _)| *m));
            *map.entry(occ).or_default() += amp;
        }
        if modes.is_empty() {
            return Err(StateError::EmptyModeSet);
        }
        let state = PureState { modes, terms: map, cap: DEFAULT_PHOTON_CAP }.pruned();
        state.check_cap()?;
        state.normalized()
    }

    /// Single occupation basis vector with amplitude 1.
    pub fn basis_state<I>(modes: I, occupation: OccupationVector) -> Result<PureState, StateError>
    where
        I: IntoIterator<Item = ModeId>,
    {
        PureState::from_terms(modes, vec![(occupation, Complex64::new(1.0, 0.0))])
    }

    /// Polarization qubit of one photon in `pulse`.
    ///
    /// Computational 0 is one horizontal photon, computational 1 one vertical
    /// photon, and hadamard `b` is `(H + (-1)^b V)/sqrt 2`.
    pub fn encode_qubit(basis: Basis, bit: u8, time_bin: TimeBin, path: Path) -> PureState {
        debug_assert!(bit <= 1);
        let pulse = Pulse::new(time_bin, path);
        let h = OccupationVector::from_counts([(pulse.h(), 1)]);
        let v = OccupationVector::from_counts([(pulse.v(), 1)]);
        let terms = match (basis, bit) {
            (Basis::Computational, 0) => vec![(h, Complex64::new(1.0, 0.0))],
            (Basis::Computational, _) => vec![(v, Complex64::new(1.0, 0.0))],
            (Basis::Hadamard, b) => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let sign = if b == 0 { 1.0 } else { -1.0 };
                vec![(h, Complex64::new(s, 0.0)), (v, Complex64::new(sign * s, 0.0))]
            }
        };
        PureState::from_terms([pulse.h(), pulse.v()], terms).expect("one-photon qubit is always valid")
    }

    /// `photons` identical photons all carrying the BB84 polarization
    /// `(basis, bit)`. For one photon this equals [`PureState::encode_qubit`].
    pub fn encode_polarized(basis: Basis, bit: u8, photons: u32, pulse: Pulse) -> Result<PureState, StateError> {
        let (pol, sign) = if bit == 0 { (pulse.h(), 1.0) } else { (pulse.v(), -1.0) };
        let computational =
            PureState::basis_state([pulse.h(), pulse.v()], OccupationVector::from_counts([(pol, photons)]))?;
        match basis {
            Basis::Computational => Ok(computational),
            Basis::Hadamard => {
                let rotated = computational.apply_polarization_rotation(pulse, -std::f64::consts::FRAC_PI_4)?;
                // fix the global phase so one photon matches encode_qubit exactly
                let phase = if bit == 1 && photons % 2 == 1 { sign } else { 1.0 };
                Ok(rotated.scaled(Complex64::new(phase, 0.0)))
            }
        }
    }

    pub fn with_photon_cap(mut self, cap: u32) -> Result<PureState, StateError> {
        self.cap = cap;
        self.check_cap()?;
        Ok(self)
    }

    pub fn photon_cap(&self) -> u32 {
        self.cap
    }

    pub fn modes(&self) -> &BTreeSet<ModeId> {
        &self.modes
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, occupation: &OccupationVector) -> Complex64 {
        self.terms.get(occupation).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest photon number over all terms.
    pub fn max_photons(&self) -> u32 {
        self.terms.keys().map(OccupationVector::total).max().unwrap_or(0)
    }

    /// Returns `Some(n)` when every term carries exactly `n` photons.
    pub fn photon_number(&self) -> Option<u32> {
        let mut totals = self.terms.keys().map(OccupationVector::total);
        let first = totals.next()?;
        totals.all(|t| t == first).then_some(first)
    }

    pub fn pulses(&self) -> BTreeSet<Pulse> {
        self.modes.iter().map(ModeId::pulse).collect()
    }

    pub fn normalized(mut self) -> Result<PureState, StateError> {
        let norm = self.norm();
        if norm < AMPLITUDE_FLOOR {
            return Err(StateError::ZeroNorm);
        }
        for amp in self.terms.values_mut() {
            *amp /= norm;
        }
        Ok(self)
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.terms.iter().map(|(occ, a)| a.conj() * other.amplitude(occ)).sum()
    }

    /// Product state over the union of both mode sets.
    pub fn tensor(&self, other: &PureState) -> Result<PureState, StateError> {
        if let Some(m) = self.modes.intersection(&other.modes).next() {
            return Err(StateError::OverlappingModes(*m));
        }
        let mut terms = BTreeMap::new();
        for (oa, a) in &self.terms {
            for (ob, b) in &other.terms {
                terms.insert(oa.merged(ob), a * b);
            }
        }
        let state =
            PureState { modes: self.modes.union(&other.modes).copied().collect(), terms, cap: self.cap.max(other.cap) }
                .pruned();
        state.check_cap()?;
        Ok(state)
    }

    /// Applies a linear two-mode transformation of creation operators:
    /// `a_in[i]^dagger -> sum_j u[j][i] a_out[j]^dagger`.
    pub fn apply_two_mode(
        &self,
        inputs: (ModeId, ModeId),
        outputs: (ModeId, ModeId),
        u: &TwoModeUnitary,
    ) -> Result<PureState, StateError> {
        if inputs.0 == inputs.1 || outputs.0 == outputs.1 {
            return Err(StateError::DegenerateModePair);
        }
        self.check_cap()?;
        let m = &u.m;
        let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let n0 = occ.get(&inputs.0);
            let n1 = occ.get(&inputs.1);
            let mut rest = occ.clone();
            rest.set(inputs.0, 0);
            rest.set(inputs.1, 0);
            let r0 = rest.get(&outputs.0);
            let r1 = rest.get(&outputs.1);
            let norm_in = (factorial(n0) * factorial(n1)).sqrt();
            // (m00 a0 + m10 a1)^n0 (m01 a0 + m11 a1)^n1, expanded binomially
            for j0 in 0..=n0 {
                let c0 = binomial(n0, j0) * m[0][0].powu(j0) * m[1][0].powu(n0 - j0);
                for j1 in 0..=n1 {
                    let c1 = binomial(n1, j1) * m[0][1].powu(j1) * m[1][1].powu(n1 - j1);
                    let p = j0 + j1;
                    let q = n0 + n1 - p;
                    let ladder = (factorial(r0 + p) / factorial(r0) * factorial(r1 + q) / factorial(r1)).sqrt();
                    let coef = amp * c0 * c1 * (ladder / norm_in);
                    if coef.norm() == 0.0 {
                        continue;
                    }
                    let mut target = rest.clone();
                    target.set(outputs.0, r0 + p);
                    target.set(outputs.1, r1 + q);
                    *out.entry(target).or_default() += coef;
                }
            }
        }
        let mut modes = self.modes.clone();
        modes.remove(&inputs.0);
        modes.remove(&inputs.1);
        modes.insert(outputs.0);
        modes.insert(outputs.1);
        Ok(PureState { modes, terms: out, cap: self.cap }.pruned())
    }

    /// Beam splitter with intensity transmittance `transmittance`.
    ///
    /// Phase convention: transmitted amplitude `sqrt(T)` (real), reflected
    /// amplitude `i sqrt(1-T)`. `inputs.0` transmits into `outputs.0`.
    pub fn apply_beam_splitter(
        &self,
        inputs: (ModeId, ModeId),
        outputs: (ModeId, ModeId),
        transmittance: f64,
    ) -> Result<PureState, StateError> {
        let u = TwoModeUnitary::beam_splitter(transmittance)?;
        self.apply_two_mode(inputs, outputs, &u)
    }

    /// Rotates the (H, V) pair of `pulse` by `angle`. An angle of pi/4 maps
    /// the diagonal qubits onto the computational modes.
    pub fn apply_polarization_rotation(&self, pulse: Pulse, angle: f64) -> Result<PureState, StateError> {
        let pair = (pulse.h(), pulse.v());
        self.apply_two_mode(pair, pair, &TwoModeUnitary::rotation(angle))
    }

    /// Renames modes. Modes not mentioned keep their label.
    pub fn relabel(&self, mapping: &[(ModeId, ModeId)]) -> Result<PureState, StateError> {
        let map: BTreeMap<ModeId, ModeId> = mapping.iter().copied().collect();
        let rename = |m: &ModeId| map.get(m).copied().unwrap_or(*m);
        let modes: BTreeSet<ModeId> = self.modes.iter().map(rename).collect();
        if modes.len() != self.modes.len() {
            return Err(StateError::RelabelCollision);
        }
        let mut terms = BTreeMap::new();
        for (occ, amp) in &self.terms {
            let renamed = OccupationVector::from_counts(occ.iter().map(|(m, n)| (rename(m), *n)));
            terms.insert(renamed, *amp);
        }
        Ok(PureState { modes, terms, cap: self.cap })
    }

    /// Born-rule distribution of the photon counts in `modes`.
    ///
    /// Modes the state does not own are reported as empty.
    pub fn occupation_distribution(&self, modes: &BTreeSet<ModeId>) -> BTreeMap<OccupationVector, f64> {
        let mut dist: BTreeMap<OccupationVector, f64> = BTreeMap::new();
        let total = self.norm_sqr();
        for (occ, amp) in &self.terms {
            *dist.entry(occ.restrict(modes)).or_default() += amp.norm_sqr() / total;
        }
        dist
    }

    /// Samples a photon-count outcome on `modes` and returns it with the
    /// renormalized post-measurement state.
    pub fn measure_occupation<R: RngCore + ?Sized>(
        &self,
        modes: &BTreeSet<ModeId>,
        rng: &mut R,
    ) -> (OccupationVector, PureState) {
        let dist = self.occupation_distribution(modes);
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = None;
        for (outcome, p) in &dist {
            acc += p;
            if draw < acc {
                chosen = Some(outcome.clone());
                break;
            }
        }
        // rounding can leave `acc` a hair below 1
        let outcome = chosen.unwrap_or_else(|| dist.keys().next_back().cloned().unwrap_or_default());
        let posterior =
            self.project(|occ| occ.restrict(modes) == outcome).expect("sampled outcome has non-zero weight");
        (outcome, posterior)
    }

    /// Keeps the terms accepted by `keep` and renormalizes; `None` if no
    /// weight survives.
    pub fn project<F: Fn(&OccupationVector) -> bool>(&self, keep: F) -> Option<PureState> {
        let terms: BTreeMap<_, _> =
            self.terms.iter().filter(|(occ, _)| keep(occ)).map(|(o, a)| (o.clone(), *a)).collect();
        PureState { modes: self.modes.clone(), terms, cap: self.cap }.normalized().ok()
    }

    /// Splits a product state into its factor on `modes` and the factor on
    /// the remaining modes. Returns `None` if the state is entangled across
    /// the cut (within 1e-9) or either side is empty.
    pub fn factor(&self, modes: &BTreeSet<ModeId>) -> Option<(PureState, PureState)> {
        let left_modes: BTreeSet<ModeId> = self.modes.intersection(modes).copied().collect();
        let right_modes: BTreeSet<ModeId> = self.modes.difference(modes).copied().collect();
        if left_modes.is_empty() || right_modes.is_empty() {
            return None;
        }
        let mut grid: BTreeMap<(OccupationVector, OccupationVector), Complex64> = BTreeMap::new();
        for (occ, amp) in &self.terms {
            grid.insert((occ.restrict(&left_modes), occ.restrict(&right_modes)), *amp);
        }
        let ((la, ra), pivot) =
            grid.iter().max_by(|x, y| x.1.norm_sqr().total_cmp(&y.1.norm_sqr())).map(|(k, v)| (k.clone(), *v))?;
        let mut left: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        let mut right: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for ((l, r), amp) in &grid {
            if *r == ra {
                left.insert(l.clone(), *amp);
            }
            if *l == la {
                right.insert(r.clone(), *amp / pivot);
            }
        }
        for ((l, r), amp) in &grid {
            let predicted = left.get(l).copied().unwrap_or_default() * right.get(r).copied().unwrap_or_default();
            if (predicted - amp).norm() > 1e-9 {
                return None;
            }
        }
        // every product of a kept left and right term must be present too
        for (l, a) in &left {
            for (r, b) in &right {
                if !grid.contains_key(&(l.clone(), r.clone())) && (a * b).norm() > 1e-9 {
                    return None;
                }
            }
        }
        let l = PureState { modes: left_modes, terms: left, cap: self.cap }.pruned().normalized().ok()?;
        let r = PureState { modes: right_modes, terms: right, cap: self.cap }.pruned().normalized().ok()?;
        Some((l, r))
    }

    /// One line per term, `mode:count ... → amplitude`, modes in canonical
    /// order with zeros spelled out. Used for golden-file comparisons.
    pub fn debug_text(&self) -> String {
        let mut out = String::new();
        for (occ, amp) in &self.terms {
            let cells: Vec<String> = self.modes.iter().map(|m| format!("{m}:{}", occ.get(m))).collect();
            let _ = writeln!(out, "{} → {:+.9}{:+.9}i", cells.join(" "), amp.re, amp.im);
        }
        out
    }

    pub(crate) fn scaled(mut self, factor: Complex64) -> PureState {
        for amp in self.terms.values_mut() {
            *amp *= factor;
        }
        self
    }

    fn pruned(mut self) -> PureState {
        self.terms.retain(|_, a| a.norm() > AMPLITUDE_FLOOR);
        self
    }

    fn check_cap(&self) -> Result<(), StateError> {
        let total = self.max_photons();
        if total > self.cap {
            Err(StateError::PhotonCap { photons: total, cap: self.cap })
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (occ, amp) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if (amp.im).abs() < 1e-12 && (amp.re - 1.0).abs() < 1e-12 {
                write!(f, "|{occ}>")?;
            } else {
                write!(f, "({:.4}{:+.4}i)|{occ}>", amp.re, amp.im)?;
            }
        }
        Ok(())
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Convenience: the two polarization modes of a pulse as a set.
pub fn polarization_modes(pulse: Pulse) -> BTreeSet<ModeId> {
    [pulse.mode(Polarization::H), pulse.mode(Polarization::V)].into_iter().collect()
}
