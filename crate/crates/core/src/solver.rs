//! Exact diagonalization: dense spectra, Lanczos ground states and overlap profiles.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::BasisTag;
use crate::operator::{SparseOperator, StateVector};

/// Largest dimension handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 6000;
/// Above this dimension ground states are found with Lanczos.
pub const DENSE_GROUND_LIMIT: usize = 512;

const RESIDUAL_TOL: f64 = 1e-10;

/// Eigenpairs of a real symmetric operator, ascending in energy.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    tag: BasisTag,
    pub values: Vec<f64>,
    /// Eigenvectors as columns.
    pub vectors: DMatrix<f64>,
    pub complete: bool,
}

impl EigenDecomposition {
    pub fn tag(&self) -> &BasisTag {
        &self.tag
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eigenvector(&self, j: usize) -> StateVector {
        StateVector::new(
            self.tag,
            self.vectors
                .column(j)
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect(),
        )
    }

    /// Coefficients `<E_j|psi>` for every retained eigenvector.
    pub fn coefficients(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        psi.check_tag(&self.tag)?;
        Ok((0..self.len())
            .map(|j| {
                self.vectors
                    .column(j)
                    .iter()
                    .zip(psi.amplitudes())
                    .map(|(&v, a)| a * v)
                    .sum()
            })
            .collect())
    }
}

/// Flips the sign so that the largest-magnitude entry is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() * (1.0 + 1e-12) {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// All eigenpairs via dense diagonalization.
pub fn full_spectrum(h: &SparseOperator) -> Result<EigenDecomposition> {
    let dim = h.dim();
    if dim > DENSE_LIMIT {
        return Err(Error::TooLarge {
            what: "dense diagonalization (use ground_state for the lowest eigenpair)",
            dim,
            limit: DENSE_LIMIT,
        });
    }
    let m = DMatrix::from_row_slice(dim, dim, &h.to_dense());
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .total_cmp(&eig.eigenvalues[b])
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let mut vectors = DMatrix::zeros(dim, dim);
    for (dst, &src) in order.iter().enumerate() {
        let mut col: Vec<f64> = eig.eigenvectors.column(src).iter().copied().collect();
        fix_sign(&mut col);
        vectors.set_column(dst, &DVector::from_vec(col));
    }
    Ok(EigenDecomposition {
        tag: *h.tag(),
        values,
        vectors,
        complete: true,
    })
}

fn residual(h: &SparseOperator, e: f64, v: &[f64]) -> f64 {
    let hv = h.apply_real(v);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - e * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn to_state(tag: BasisTag, mut v: Vec<f64>) -> StateVector {
    fix_sign(&mut v);
    StateVector::from_real(tag, &v)
}

/// Lowest eigenpair via the dense path.
pub fn ground_state_dense(h: &SparseOperator) -> Result<(f64, StateVector)> {
    let eig = full_spectrum(h)?;
    if eig.is_empty() {
        return Err(Error::Empty("operator has dimension zero"));
    }
    Ok((eig.values[0], eig.eigenvector(0)))
}

/// Lowest eigenpair via thick-restarted Lanczos with full reorthogonalization.
///
/// Each cycle grows an orthonormal Krylov basis to at most 160 vectors and
/// takes the Rayleigh-Ritz pair of the projected matrix. Restarts keep the
/// lowest few Ritz vectors, so nearly degenerate ground-state clusters (cat
/// states) converge without stalling.
pub fn ground_state_lanczos(h: &SparseOperator) -> Result<(f64, StateVector)> {
    let dim = h.dim();
    if dim == 0 {
        return Err(Error::Empty("operator has dimension zero"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let start: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let m = dim.min(160);
    let keep = 8.min(m.saturating_sub(1)).max(1);
    let max_restarts = 100;

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut candidate = start;
    let mut last = f64::INFINITY;
    for _ in 0..max_restarts {
        while basis.len() < m {
            if !orthonormalize(&mut candidate, &basis) {
                break;
            }
            let image = h.apply_real(&candidate);
            basis.push(std::mem::take(&mut candidate));
            candidate = image.clone();
            images.push(image);
        }
        let k = basis.len();
        let mut t = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..=i {
                let x = dot_real(&basis[i], &images[j]);
                t[(i, j)] = x;
                t[(j, i)] = x;
            }
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let theta = eig.eigenvalues[order[0]];
        let combine = |vecs: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; dim];
            for (c, v) in eig.eigenvectors.column(col).iter().zip(vecs) {
                out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
            }
            out
        };
        let v = combine(&basis, order[0]);
        let hv = combine(&images, order[0]);
        let r: Vec<f64> = hv.iter().zip(&v).map(|(a, b)| a - theta * b).collect();
        last = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if last < RESIDUAL_TOL || k == dim {
            let mut v = v;
            normalize(&mut v);
            let res = residual(h, theta, &v);
            if res < RESIDUAL_TOL || k == dim {
                return Ok((theta, to_state(*h.tag(), v)));
            }
            last = res;
        }
        let kept = keep.min(k);
        let new_basis: Vec<Vec<f64>> = order[..kept].iter().map(|&c| combine(&basis, c)).collect();
        let new_images: Vec<Vec<f64>> = order[..kept].iter().map(|&c| combine(&images, c)).collect();
        basis = new_basis;
        images = new_images;
        candidate = r;
    }
    Err(Error::NoConvergence {
        method: "lanczos",
        iterations: max_restarts * m,
        residual: last,
    })
}

fn dot_real(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two passes of Gram-Schmidt of `v` against `basis`, then normalization.
/// Returns false when `v` lies in the span of the basis.
fn orthonormalize(v: &mut [f64], basis: &[Vec<f64>]) -> bool {
    let before = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..2 {
        for b in basis {
            let c = dot_real(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let after = normalize(v);
    after > 1e-10 * before.max(f64::MIN_POSITIVE)
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

/// Lowest eigenpair; dense for small operators, Lanczos otherwise. The sign
/// is fixed so the largest-magnitude amplitude is real and positive.
pub fn ground_state(h: &SparseOperator) -> Result<(f64, StateVector)> {
    if h.dim() <= DENSE_GROUND_LIMIT {
        ground_state_dense(h)
    } else {
        ground_state_lanczos(h)
    }
}

/// Weight of an initial state on each eigenstate.
#[derive(Debug, Clone)]
pub struct OverlapProfile {
    /// `(E_j, |<E_j|psi>|^2)` ascending in energy.
    pub entries: Vec<(f64, f64)>,
    /// Eigenstate indices ordered by decreasing overlap.
    pub ranking: Vec<usize>,
}

impl OverlapProfile {
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Index of the eigenstate with the largest overlap.
    pub fn dominant(&self) -> usize {
        self.ranking[0]
    }

    pub fn dominant_energy(&self) -> f64 {
        self.entries[self.dominant()].0
    }

    pub fn dominant_overlap(&self) -> f64 {
        self.entries[self.dominant()].1
    }

    /// `|E_1 - E_j|` between the dominant eigenstate and the next `count`
    /// eigenstates by overlap.
    pub fn gaps(&self, count: usize) -> Vec<f64> {
        let e1 = self.dominant_energy();
        self.ranking
            .iter()
            .skip(1)
            .take(count)
            .map(|&j| (e1 - self.entries[j].0).abs())
            .collect()
    }
}

pub fn overlap_profile(psi: &StateVector, eig: &EigenDecomposition) -> Result<OverlapProfile> {
    if eig.is_empty() {
        return Err(Error::Empty("eigendecomposition"));
    }
    let coeffs = eig.coefficients(psi)?;
    let entries: Vec<(f64, f64)> = eig
        .values
        .iter()
        .zip(&coeffs)
        .map(|(&e, c)| (e, c.norm_sqr()))
        .collect();
    let mut ranking: Vec<usize> = (0..entries.len()).collect();
    ranking.sort_by(|&a, &b| entries[b].1.total_cmp(&entries[a].1).then(a.cmp(&b)));
    Ok(OverlapProfile { entries, ranking })
}
