//! Violation of the four-point Wick decomposition on three consecutive sites.
//!
//! With `sigma^z = 2n - 1` (so `|1>` is spin up) and
//! `sigma^pm = (sigma^x -+ i sigma^y) / 2`, `sigma^+ = |0><1|` removes an
//! excitation and `sigma^- = |1><0|` creates one.
//!
//! `W = |<n1 s2+ s3-> - <n1><s2+ s3-> - <s1+ s2+><s1- z2 s3-> + <s1- s2+><s1+ z2 s3->|`

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{Boundary, Config, Space};
use crate::operator::StateVector;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Three consecutive sites (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WickTriple(pub [usize; 3]);

impl WickTriple {
    pub fn new(sites: [usize; 3], n: usize) -> Result<Self> {
        let [a, b, c] = sites;
        if a == 0 || c > n {
            return Err(Error::SiteOutOfRange {
                site: if a == 0 { a } else { c },
                n,
            });
        }
        if b != a + 1 || c != b + 1 {
            return Err(Error::InvalidParameter(format!(
                "Wick sites must be consecutive and increasing, got {a},{b},{c}"
            )));
        }
        Ok(Self(sites))
    }

    /// Sites 1,2,3 on a ring; the central triple of an open chain (7,8,9 at N = 15).
    pub fn default_for(n: usize, boundary: Boundary) -> Result<Self> {
        match boundary {
            Boundary::Pbc => Self::new([1, 2, 3], n),
            Boundary::Obc => {
                let mid = n.div_ceil(2);
                Self::new([mid.saturating_sub(1), mid, mid + 1], n)
            }
        }
    }

    fn zero_based(&self) -> [usize; 3] {
        [self.0[0] - 1, self.0[1] - 1, self.0[2] - 1]
    }
}

impl std::str::FromStr for WickTriple {
    type Err = Error;

    /// Parses `i,j,k` without range checks (use [`WickTriple::new`] for those).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidParameter(format!("bad site triple '{s}'")))?;
        match parts.as_slice() {
            &[a, b, c] => Ok(Self([a, b, c])),
            _ => Err(Error::InvalidParameter(format!("bad site triple '{s}'"))),
        }
    }
}

/// Single-site factors of the correlators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Local {
    Id,
    N,
    Z,
    /// `|0><1|`
    Plus,
    /// `|1><0|`
    Minus,
}

impl Local {
    /// Image of occupation `bit`: new bit and coefficient, or `None` if annihilated.
    fn act(self, bit: bool) -> Option<(bool, f64)> {
        match (self, bit) {
            (Local::Id, b) => Some((b, 1.0)),
            (Local::N, true) => Some((true, 1.0)),
            (Local::N, false) => None,
            (Local::Z, b) => Some((b, if b { 1.0 } else { -1.0 })),
            (Local::Plus, true) => Some((false, 1.0)),
            (Local::Plus, false) => None,
            (Local::Minus, false) => Some((true, 1.0)),
            (Local::Minus, true) => None,
        }
    }

    fn matrix(self) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for b in [false, true] {
            if let Some((out, c)) = self.act(b) {
                m[out as usize][b as usize] = c;
            }
        }
        m
    }
}

use Local::{Id, Minus, Plus, Z, N};

/// The six correlators entering W, as operators on (site1, site2, site3).
const STRINGS: [[Local; 3]; 6] = [
    [N, Plus, Minus],  // <n1 s2+ s3->
    [N, Id, Id],       // <n1>
    [Id, Plus, Minus], // <s2+ s3->
    [Plus, Plus, Id],  // <s1+ s2+>
    [Minus, Z, Minus], // <s1- z2 s3->
    [Minus, Plus, Id], // <s1- s2+>
];
const S1PZ3M: [Local; 3] = [Plus, Z, Minus]; // <s1+ z2 s3->

/// The four terms of the decomposition and the resulting violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WickTerms {
    /// `<n1 s2+ s3->`
    pub connected: Complex64,
    /// `<n1><s2+ s3->`
    pub density_hopping: Complex64,
    /// `<s1+ s2+><s1- z2 s3->`
    pub pairing: Complex64,
    /// `<s1- s2+><s1+ z2 s3->`
    pub exchange: Complex64,
}

impl WickTerms {
    fn from_expectations(e: &dyn Fn([Local; 3]) -> Complex64) -> Self {
        let [t1, n1, hop, pp, mzm, mp] = STRINGS.map(e);
        let pzm = e(S1PZ3M);
        Self {
            connected: t1,
            density_hopping: n1 * hop,
            pairing: pp * mzm,
            exchange: mp * pzm,
        }
    }

    /// `W = |T1 - T2 - T3 + T4|`
    pub fn violation(&self) -> f64 {
        (self.connected - self.density_hopping - self.pairing + self.exchange).norm()
    }
}

/// Expectation of a three-site string in a pure state on the full basis.
fn state_expectation(psi: &StateVector, space: &Space, sites: [usize; 3], ops: [Local; 3]) -> Complex64 {
    let basis = space.basis();
    let mut acc = ZERO;
    for (&c, &a) in basis.states().iter().zip(psi.amplitudes()) {
        if a == ZERO {
            continue;
        }
        let mut out: Config = c;
        let mut coef = 1.0;
        let mut alive = true;
        for (&site, op) in sites.iter().zip(ops) {
            match op.act((c >> site) & 1 == 1) {
                Some((bit, k)) => {
                    out = (out & !(1 << site)) | ((bit as Config) << site);
                    coef *= k;
                }
                None => {
                    alive = false;
                    break;
                }
            }
        }
        if !alive {
            continue;
        }
        if let Some(j) = basis.index_of(out) {
            acc += psi.amplitudes()[j].conj() * a * coef;
        }
    }
    acc
}

fn check_state(psi: &StateVector, space: &Space, triple: &WickTriple) -> Result<[usize; 3]> {
    psi.check_tag(&space.full().tag())?;
    let n = space.n();
    WickTriple::new(triple.0, n)?;
    Ok(triple.zero_based())
}

/// Terms evaluated directly from full-basis expectation values.
pub fn wick_terms(psi: &StateVector, space: &Space, triple: &WickTriple) -> Result<WickTerms> {
    let sites = check_state(psi, space, triple)?;
    Ok(WickTerms::from_expectations(&|ops| {
        state_expectation(psi, space, sites, ops)
    }))
}

/// `W` of a pure state on the full basis.
pub fn wick_violation(psi: &StateVector, space: &Space, triple: &WickTriple) -> Result<f64> {
    Ok(wick_terms(psi, space, triple)?.violation())
}

/// Density matrix of three sites; index `b1 + 2 b2 + 4 b3` with `b_k` the
/// occupation of the k-th site of the triple.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeSiteRdm(pub DMatrix<Complex64>);

impl ThreeSiteRdm {
    pub fn from_state(psi: &StateVector, space: &Space, triple: &WickTriple) -> Result<Self> {
        let sites = check_state(psi, space, triple)?;
        let local_mask: Config = sites.iter().map(|&s| 1 << s).sum();
        let mut groups: HashMap<Config, [Complex64; 8]> = HashMap::new();
        for (&c, &a) in space.basis().states().iter().zip(psi.amplitudes()) {
            let rest = c & !local_mask;
            let local: usize = sites
                .iter()
                .enumerate()
                .map(|(k, &s)| (((c >> s) & 1) as usize) << k)
                .sum();
            groups.entry(rest).or_insert([ZERO; 8])[local] += a;
        }
        let mut rho = DMatrix::zeros(8, 8);
        for v in groups.values() {
            for i in 0..8 {
                if v[i] == ZERO {
                    continue;
                }
                for j in 0..8 {
                    rho[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        Ok(Self(rho))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    fn operator(ops: [Local; 3]) -> DMatrix<Complex64> {
        let mats = ops.map(Local::matrix);
        DMatrix::from_fn(8, 8, |r, c| {
            let v: f64 = (0..3)
                .map(|k| mats[k][(r >> k) & 1][(c >> k) & 1])
                .product();
            Complex64::new(v, 0.0)
        })
    }

    /// `tr(rho O)`
    fn expectation(&self, ops: [Local; 3]) -> Complex64 {
        let o = Self::operator(ops);
        (&self.0 * o).trace()
    }

    pub fn wick_terms(&self) -> WickTerms {
        WickTerms::from_expectations(&|ops| self.expectation(ops))
    }

    pub fn wick_violation(&self) -> f64 {
        self.wick_terms().violation()
    }
}

/// A normalized three-qubit state as a three-site density matrix (index as in
/// [`ThreeSiteRdm`]).
pub fn pure_three_site(amplitudes: &[Complex64; 8]) -> ThreeSiteRdm {
    let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let v: Vec<Complex64> = amplitudes.iter().map(|a| a / norm).collect();
    ThreeSiteRdm(DMatrix::from_fn(8, 8, |i, j| v[i] * v[j].conj()))
}
