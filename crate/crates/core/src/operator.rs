//! Row-compressed real symmetric operators and tagged complex state vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::BasisTag;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Complex amplitudes over a tagged basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    tag: BasisTag,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(tag: BasisTag, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(tag.dim, amplitudes.len());
        Self { tag, amplitudes }
    }

    pub fn from_real(tag: BasisTag, amplitudes: &[f64]) -> Self {
        Self::new(
            tag,
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn zeros(tag: BasisTag) -> Self {
        Self::new(tag, vec![ZERO; tag.dim])
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// Scales to unit norm; a zero vector is returned unchanged.
    pub fn normalized(mut self) -> Self {
        let nrm = self.norm();
        if nrm > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= nrm);
        }
        self
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        other.check_tag(&self.tag)?;
        Ok(dot(&self.amplitudes, &other.amplitudes))
    }

    /// `|<self|other>|^2`
    pub fn overlap(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn check_tag(&self, expected: &BasisTag) -> Result<()> {
        if &self.tag != expected {
            return Err(Error::BasisMismatch(format!(
                "state on {} used with {}",
                self.tag, expected
            )));
        }
        Ok(())
    }
}

/// `sum conj(a_i) b_i`
pub fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Real symmetric sparse matrix in compressed-row layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    tag: BasisTag,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseOperator {
    /// Assembles from lower-triangle triplets `(row >= col)`. Duplicates are
    /// summed and the upper triangle is mirrored, so the result is exactly
    /// symmetric.
    pub fn from_lower_triplets(tag: BasisTag, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        let dim = tag.dim;
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r >= c && r < dim);
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != 0.0);
        let mut entries = Vec::with_capacity(2 * merged.len());
        for &(r, c, v) in &merged {
            entries.push((r, c, v));
            if r != c {
                entries.push((c, r, v));
            }
        }
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            tag,
            row_ptr,
            cols: entries.iter().map(|e| e.1).collect(),
            values: entries.iter().map(|e| e.2).collect(),
        }
    }

    /// Diagonal operator.
    pub fn diagonal(tag: BasisTag, diag: &[f64]) -> Self {
        let triplets = diag
            .iter()
            .enumerate()
            .map(|(i, &d)| (i, i, d))
            .collect();
        Self::from_lower_triplets(tag, triplets)
    }

    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    pub fn dim(&self) -> usize {
        self.tag.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates `(col, value)` pairs of one row.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(j, _)| j == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal_values().iter().sum()
    }

    /// `out = H x`
    pub fn apply_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim());
        for (o, span) in out.iter_mut().zip(self.row_ptr.windows(2)) {
            let (cols, vals) = (&self.cols[span[0]..span[1]], &self.values[span[0]..span[1]]);
            let (mut re, mut im) = (0.0, 0.0);
            for (&c, &v) in cols.iter().zip(vals) {
                let xc = x[c];
                re += xc.re * v;
                im += xc.im * v;
            }
            *o = Complex64::new(re, im);
        }
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim()];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_real(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|r| self.row(r).map(|(c, v)| v * x[c]).sum())
            .collect()
    }

    pub fn apply_state(&self, psi: &StateVector) -> Result<StateVector> {
        psi.check_tag(&self.tag)?;
        Ok(StateVector::new(self.tag, self.apply(psi.amplitudes())))
    }

    /// `<psi|H|psi>` (real for a symmetric operator).
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        psi.check_tag(&self.tag)?;
        Ok(dot(psi.amplitudes(), &self.apply(psi.amplitudes())).re)
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.dim();
        let mut m = vec![0.0; d * d];
        for r in 0..d {
            for (c, v) in self.row(r) {
                m[r * d + c] = v;
            }
        }
        m
    }

    /// `max_r sum_c |H_rc|`, an upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Exact structural symmetry check.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|r| self.row(r).all(|(c, v)| self.get(c, r) == v))
    }

    /// `self + scale * other` on the same basis.
    pub fn add_scaled(&self, other: &SparseOperator, scale: f64) -> Result<SparseOperator> {
        if other.tag != self.tag {
            return Err(Error::BasisMismatch(format!(
                "cannot add operators on {} and {}",
                self.tag, other.tag
            )));
        }
        let mut triplets = Vec::with_capacity(self.nnz() + other.nnz());
        for (op, s) in [(self, 1.0), (other, scale)] {
            for r in 0..op.dim() {
                for (c, v) in op.row(r) {
                    if r >= c {
                        triplets.push((r, c, s * v));
                    }
                }
            }
        }
        Ok(Self::from_lower_triplets(self.tag, triplets))
    }
}
