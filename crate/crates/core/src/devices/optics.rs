//! Receiver optics as an explicit, invertible chain of linear elements.

use crate::photonic::{MacroPulse, ModeId, PureState, StateError, TwoModeUnitary};

#[derive(Debug, Clone, PartialEq)]
pub enum OpticalElement {
    TwoMode {
        inputs: (ModeId, ModeId),
        outputs: (ModeId, ModeId),
        unitary: TwoModeUnitary,
    },
    /// Pure re-routing (a polarizing beam splitter sending each polarization
    /// to its own arm is a relabeling of modes).
    Route(Vec<(ModeId, ModeId)>),
}

impl OpticalElement {
    fn inverse(&self) -> OpticalElement {
        match self {
            OpticalElement::TwoMode { inputs, outputs, unitary } => {
                OpticalElement::TwoMode { inputs: *outputs, outputs: *inputs, unitary: unitary.adjoint() }
            }
            OpticalElement::Route(pairs) => OpticalElement::Route(pairs.iter().map(|(a, b)| (*b, *a)).collect()),
        }
    }
}

/// The unitary `U_B` Bob applies before measuring photon numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OpticalChain {
    elements: Vec<OpticalElement>,
}

impl OpticalChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, element: OpticalElement) {
        self.elements.push(element);
    }

    pub fn elements(&self) -> &[OpticalElement] {
        &self.elements
    }

    /// `U_B^-1 = U_B^dagger`: adjoint elements in reverse order.
    pub fn inverse(&self) -> OpticalChain {
        OpticalChain { elements: self.elements.iter().rev().map(OpticalElement::inverse).collect() }
    }

    pub fn apply_state(&self, state: &PureState) -> Result<PureState, StateError> {
        let mut s = state.clone();
        for e in &self.elements {
            s = match e {
                OpticalElement::TwoMode { inputs, outputs, unitary } => s.apply_two_mode(*inputs, *outputs, unitary)?,
                OpticalElement::Route(pairs) => s.relabel(pairs)?,
            };
        }
        Ok(s)
    }

    pub fn apply_pulse(&self, pulse: &MacroPulse) -> MacroPulse {
        let mut p = pulse.clone();
        for e in &self.elements {
            p = match e {
                OpticalElement::TwoMode { inputs, outputs, unitary } => p.apply_two_mode(*inputs, *outputs, unitary),
                OpticalElement::Route(pairs) => p.relabel(pairs),
            };
        }
        p
    }
}
