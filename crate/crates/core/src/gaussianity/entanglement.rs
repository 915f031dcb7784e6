use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Config, Space, SpaceKind};
use crate::operator::StateVector;

/// Levels at or below this weight are dropped before fitting.
pub const SPECTRUM_CUTOFF: f64 = 1e-12;

/// Reduced-density-matrix eigenvalues of the block of sites `1..=block`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementData {
    pub block: usize,
    /// Eigenvalues in descending order.
    pub probabilities: Vec<f64>,
}

impl EntanglementData {
    pub fn new(block: usize, mut probabilities: Vec<f64>) -> Self {
        probabilities.iter_mut().for_each(|p| *p = p.max(0.0));
        probabilities.sort_by(|a, b| b.total_cmp(a));
        Self {
            block,
            probabilities,
        }
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probabilities)
    }

    /// Levels above [`SPECTRUM_CUTOFF`].
    pub fn truncated(&self) -> Vec<f64> {
        truncate(&self.probabilities)
    }

    /// Entanglement energies `-ln rho_k` of the retained levels.
    pub fn energies(&self) -> Vec<f64> {
        self.truncated().iter().map(|p| -p.ln()).collect()
    }

    pub fn rank(&self) -> usize {
        self.truncated().len()
    }

    pub fn trace(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

pub(crate) fn truncate(p: &[f64]) -> Vec<f64> {
    let mut kept: Vec<f64> = p.iter().copied().filter(|&x| x > SPECTRUM_CUTOFF).collect();
    kept.sort_by(|a, b| b.total_cmp(a));
    kept
}

/// Von Neumann entropy with `0 ln 0 = 0`.
pub fn entropy(probabilities: &[f64]) -> f64 {
    probabilities
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum::<f64>()
        .max(0.0)
}

/// Schmidt matrix of the bipartition `sites 1..=block | rest`: rows are the
/// distinct left patterns, columns the distinct right patterns present in
/// the basis.
pub fn schmidt_matrix(psi: &StateVector, space: &Space, block: usize) -> Result<DMatrix<Complex64>> {
    let tag = psi.tag();
    if tag.kind == SpaceKind::ZeroMomentum {
        return Err(Error::BasisMismatch(
            "embed sector states into the full basis before taking a partial trace".into(),
        ));
    }
    psi.check_tag(&space.full().tag())?;
    let n = space.n();
    if block == 0 || block >= n {
        return Err(Error::InvalidParameter(format!(
            "block size {block} must lie in 1..{n}"
        )));
    }
    let states = space.basis().states();
    let mask: Config = (1 << block) - 1;
    let mut left: HashMap<Config, usize> = HashMap::new();
    let mut right: HashMap<Config, usize> = HashMap::new();
    let mut lefts: Vec<Config> = states.iter().map(|&c| c & mask).collect();
    lefts.sort_unstable();
    lefts.dedup();
    let mut rights: Vec<Config> = states.iter().map(|&c| c >> block).collect();
    rights.sort_unstable();
    rights.dedup();
    for (i, &l) in lefts.iter().enumerate() {
        left.insert(l, i);
    }
    for (i, &r) in rights.iter().enumerate() {
        right.insert(r, i);
    }
    let mut m = DMatrix::zeros(lefts.len(), rights.len());
    for (&c, &a) in states.iter().zip(psi.amplitudes()) {
        m[(left[&(c & mask)], right[&(c >> block)])] = a;
    }
    Ok(m)
}

/// Spectrum of `rho_A = tr_B |psi><psi|` for the block of sites `1..=block`.
pub fn reduced_density_matrix(psi: &StateVector, space: &Space, block: usize) -> Result<EntanglementData> {
    let m = schmidt_matrix(psi, space, block)?;
    let gram = if m.nrows() <= m.ncols() {
        &m * m.adjoint()
    } else {
        m.adjoint() * &m
    };
    let eig = SymmetricEigen::new(gram);
    Ok(EntanglementData::new(
        block,
        eig.eigenvalues.iter().copied().collect(),
    ))
}
