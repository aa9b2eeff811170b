//! Dense matrix-mechanics oracle for Fock states over three modes.

#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use qkdsim::photonic::{ModeId, OccupationVector, Path, Polarization, PureState, TimeBin, TwoModeUnitary};

/// Per-mode truncation of the dense oracle. Totals never exceed it, so the
/// truncation is exact for the states generated here.
pub const CUTOFF: usize = 3;
pub const DIM: usize = (CUTOFF + 1) * (CUTOFF + 1) * (CUTOFF + 1);

pub fn three_modes() -> [ModeId; 3] {
    [
        ModeId::new(TimeBin::T_HALF, Path::Regular, Polarization::H),
        ModeId::new(TimeBin::T_HALF, Path::Regular, Polarization::V),
        ModeId::new(TimeBin::T_HALF, Path::Blocked, Polarization::H),
    ]
}

pub fn index(n: [usize; 3]) -> usize {
    n[0] + (CUTOFF + 1) * n[1] + (CUTOFF + 1) * (CUTOFF + 1) * n[2]
}

pub fn counts(i: usize) -> [usize; 3] {
    let b = CUTOFF + 1;
    [i % b, (i / b) % b, i / (b * b)]
}

pub fn creation(mode: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(DIM, DIM);
    for i in 0..DIM {
        let mut n = counts(i);
        if n[mode] < CUTOFF {
            let amp = ((n[mode] + 1) as f64).sqrt();
            n[mode] += 1;
            a[(index(n), i)] = Complex64::new(amp, 0.0);
        }
    }
    a
}

/// Occupations over the three modes with at most `max_total` photons.
pub fn fock_basis(max_total: usize) -> Vec<[usize; 3]> {
    (0..DIM).map(counts).filter(|n| n.iter().sum::<usize>() <= max_total).collect()
}

/// The linear-optics map `a_k^dagger -> sum_j m[j][k] a_j^dagger` lifted to
/// the truncated Fock space by expanding creation-operator polynomials.
pub fn dense_evolve(input: &DVector<Complex64>, m: &DMatrix<Complex64>) -> DVector<Complex64> {
    let ops: Vec<DMatrix<Complex64>> = (0..3).map(creation).collect();
    let images: Vec<DMatrix<Complex64>> =
        (0..3).map(|k| (0..3).fold(DMatrix::zeros(DIM, DIM), |acc, j| acc + &ops[j] * m[(j, k)])).collect();
    let mut vacuum = DVector::zeros(DIM);
    vacuum[0] = Complex64::new(1.0, 0.0);
    let mut out = DVector::zeros(DIM);
    for i in 0..DIM {
        if input[i].norm() == 0.0 {
            continue;
        }
        let n = counts(i);
        let mut v = vacuum.clone();
        let mut fact = 1.0;
        for k in 0..3 {
            for step in 0..n[k] {
                v = &images[k] * v;
                fact *= (step + 1) as f64;
            }
        }
        out += v * (input[i] / fact.sqrt());
    }
    out
}

pub fn embed(u: &TwoModeUnitary, pair: (usize, usize)) -> DMatrix<Complex64> {
    let mut m = DMatrix::identity(3, 3);
    let (a, b) = pair;
    m[(a, a)] = u.m[0][0];
    m[(a, b)] = u.m[0][1];
    m[(b, a)] = u.m[1][0];
    m[(b, b)] = u.m[1][1];
    m
}

pub fn to_state(v: &DVector<Complex64>) -> PureState {
    let modes = three_modes();
    let terms = (0..DIM)
        .filter(|i| v[*i].norm() > 0.0)
        .map(|i| {
            let n = counts(i);
            (OccupationVector::from_counts((0..3).map(|k| (modes[k], n[k] as u32))), v[i])
        })
        .collect();
    PureState::from_terms(modes, terms).unwrap()
}

pub fn to_dense(s: &PureState) -> DVector<Complex64> {
    let modes = three_modes();
    let mut v = DVector::zeros(DIM);
    for (occ, amp) in s.terms() {
        let n = [0, 1, 2].map(|k| occ.get(&modes[k]) as usize);
        v[index(n)] = *amp;
    }
    v
}

/// Born distribution of the counts on `subset` read off the dense vector.
pub fn dense_marginal(v: &DVector<Complex64>, subset: &[usize]) -> BTreeMap<Vec<usize>, f64> {
    let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum();
    let mut dist = BTreeMap::new();
    for i in 0..DIM {
        let p = v[i].norm_sqr() / norm;
        if p > 0.0 {
            let n = counts(i);
            *dist.entry(subset.iter().map(|k| n[*k]).collect()).or_insert(0.0) += p;
        }
    }
    dist
}
