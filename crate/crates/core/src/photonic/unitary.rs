use num_complex::Complex64;

use super::StateError;

/// 2x2 mode transformation. Column `i` is the image of input mode `i`:
/// `a_in[i]^dagger -> sum_j m[j][i] a_out[j]^dagger`. The same matrix maps
/// coherent field amplitudes, `alpha_out = m * alpha_in`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeUnitary {
    pub m: [[Complex64; 2]; 2],
}

impl TwoModeUnitary {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self { m: [[one, zero], [zero, one]] }
    }

    /// Transmission `sqrt(T)`, reflection `i sqrt(1-T)`.
    pub fn beam_splitter(transmittance: f64) -> Result<Self, StateError> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(StateError::Transmittance(transmittance));
        }
        let t = Complex64::new(transmittance.sqrt(), 0.0);
        let r = Complex64::new(0.0, (1.0 - transmittance).sqrt());
        Ok(Self { m: [[t, r], [r, t]] })
    }

    /// Polarization rotation acting on one-photon amplitudes `(h, v)` as
    /// `h' = cos a h + sin a v`, `v' = -sin a h + cos a v`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self {
            m: [[Complex64::new(c, 0.0), Complex64::new(s, 0.0)], [Complex64::new(-s, 0.0), Complex64::new(c, 0.0)]],
        }
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Self { m: [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]] }
    }

    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [self.m[0][0] * v[0] + self.m[0][1] * v[1], self.m[1][0] * v[0] + self.m[1][1] * v[1]]
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let a = self.adjoint();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    s += a.m[i][k] * self.m[k][j];
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                if (s - Complex64::new(expect, 0.0)).norm() > tol {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_elements_are_unitary() {
        for t in [0.0, 0.25, 0.5, 1.0] {
            assert!(TwoModeUnitary::beam_splitter(t).unwrap().is_unitary(1e-12));
        }
        for a in [0.0, 0.3, std::f64::consts::FRAC_PI_4, 2.0] {
            assert!(TwoModeUnitary::rotation(a).is_unitary(1e-12));
        }
    }

    #[test]
    fn transmittance_outside_unit_interval_is_rejected() {
        assert!(TwoModeUnitary::beam_splitter(1.5).is_err());
        assert!(TwoModeUnitary::beam_splitter(-0.1).is_err());
    }
}
