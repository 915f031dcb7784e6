//! Blockade-constrained Hilbert spaces and the zero-momentum sector.
//!
//! Configurations are stored as bitmasks with site 1 in the least significant
//! bit, so `n_i = (c >> (i - 1)) & 1`. Every operator builder in the crate
//! relies on this convention.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::StateVector;

/// Occupation bitmask of a chain, site 1 = least significant bit.
pub type Config = u64;

/// Largest chain accepted by the blockade-constrained enumeration.
pub const MAX_CONSTRAINED_SITES: usize = 32;
/// Largest chain accepted for the unconstrained 2^N space.
pub const MAX_UNCONSTRAINED_SITES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Pbc,
    Obc,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Pbc => write!(f, "pbc"),
            Boundary::Obc => write!(f, "obc"),
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pbc" | "periodic" => Ok(Boundary::Pbc),
            "obc" | "open" => Ok(Boundary::Obc),
            other => Err(Error::InvalidParameter(format!("unknown boundary '{other}'"))),
        }
    }
}

#[inline]
pub fn occupied(c: Config, site: usize) -> bool {
    (c >> site) & 1 == 1
}

#[inline]
fn site_mask(n: usize) -> Config {
    if n >= 64 {
        Config::MAX
    } else {
        (1 << n) - 1
    }
}

/// Whether `c` respects `n_i n_{i+1} = 0` on a chain of `n` sites.
///
/// A single site has no neighbours, so both of its states are legal for either
/// boundary.
pub fn is_blockade_legal(c: Config, n: usize, boundary: Boundary) -> bool {
    if c & !site_mask(n) != 0 {
        return false;
    }
    if c & (c >> 1) != 0 {
        return false;
    }
    if boundary == Boundary::Pbc && n >= 2 && occupied(c, 0) && occupied(c, n - 1) {
        return false;
    }
    true
}

/// Cyclic shift by one site: site i moves to site i+1, site N wraps to site 1.
#[inline]
pub fn translate(c: Config, n: usize) -> Config {
    if n <= 1 {
        return c;
    }
    ((c << 1) | (c >> (n - 1))) & site_mask(n)
}

/// Renders a configuration with site 1 first, e.g. `1010`.
pub fn format_config(c: Config, n: usize) -> String {
    (0..n).map(|i| if occupied(c, i) { '1' } else { '0' }).collect()
}

/// Inverse of [`format_config`].
pub fn parse_config(s: &str) -> Result<Config> {
    let s = s.trim();
    if s.is_empty() || s.len() > 64 {
        return Err(Error::InvalidParameter(format!("bad configuration '{s}'")));
    }
    s.chars().enumerate().try_fold(0, |acc, (i, ch)| match ch {
        '0' => Ok(acc),
        '1' => Ok(acc | (1 << i)),
        _ => Err(Error::InvalidParameter(format!("bad configuration '{s}'"))),
    })
}

/// Sorted list of allowed configurations with index lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedBasis {
    n: usize,
    boundary: Boundary,
    blockade: bool,
    states: Vec<Config>,
}

impl ConstrainedBasis {
    /// All blockade-satisfying configurations of `n` sites, ascending.
    pub fn enumerate(n: usize, boundary: Boundary) -> Result<Self> {
        if !(1..=MAX_CONSTRAINED_SITES).contains(&n) {
            return Err(Error::SizeLimit {
                n,
                min: 1,
                max: MAX_CONSTRAINED_SITES,
            });
        }
        // Open-chain Fibonacci strings by depth-first extension from the top site
        // down, which yields them in ascending order directly.
        let mut states = Vec::new();
        fn extend(prefix: Config, next: usize, n: usize, out: &mut Vec<Config>) {
            if next == 0 {
                out.push(prefix);
                return;
            }
            let site = next - 1;
            extend(prefix, site, n, out);
            let blocked = site + 1 < n && occupied(prefix, site + 1);
            if !blocked {
                extend(prefix | (1 << site), site, n, out);
            }
        }
        extend(0, n, n, &mut states);
        if boundary == Boundary::Pbc {
            states.retain(|&c| is_blockade_legal(c, n, Boundary::Pbc));
        }
        debug_assert!(states.windows(2).all(|w| w[0] < w[1]));
        Ok(Self {
            n,
            boundary,
            blockade: true,
            states,
        })
    }

    /// The full 2^N space without the blockade, used by the long-range model.
    pub fn unconstrained(n: usize, boundary: Boundary) -> Result<Self> {
        if !(1..=MAX_UNCONSTRAINED_SITES).contains(&n) {
            return Err(Error::SizeLimit {
                n,
                min: 1,
                max: MAX_UNCONSTRAINED_SITES,
            });
        }
        Ok(Self {
            n,
            boundary,
            blockade: false,
            states: (0..(1 << n)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// False for the unconstrained 2^N space.
    pub fn has_blockade(&self) -> bool {
        self.blockade
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Config] {
        &self.states
    }

    pub fn state(&self, index: usize) -> Config {
        self.states[index]
    }

    pub fn index_of(&self, c: Config) -> Option<usize> {
        if self.blockade {
            self.states.binary_search(&c).ok()
        } else if c < self.states.len() as Config {
            Some(c as usize)
        } else {
            None
        }
    }

    pub fn contains(&self, c: Config) -> bool {
        self.index_of(c).is_some()
    }

    /// Whether `c` is a member of this space.
    pub fn allows(&self, c: Config) -> bool {
        if self.blockade {
            is_blockade_legal(c, self.n, self.boundary)
        } else {
            c & !site_mask(self.n) == 0
        }
    }
}

/// Translation-orbit representatives of a periodic basis at momentum k = 0.
#[derive(Debug, Clone)]
pub struct MomentumSector {
    basis: Arc<ConstrainedBasis>,
    k: i64,
    representatives: Vec<Config>,
    orbit_sizes: Vec<usize>,
    normalization: Vec<f64>,
    /// Representative index for each basis state.
    orbit_of: Vec<u32>,
}

impl MomentumSector {
    pub fn build(basis: Arc<ConstrainedBasis>, k: i64) -> Result<Self> {
        if basis.boundary() != Boundary::Pbc {
            return Err(Error::UnsupportedSymmetry(
                "momentum sectors require a periodic chain".into(),
            ));
        }
        if k != 0 {
            return Err(Error::UnsupportedSymmetry(format!(
                "only the k = 0 sector is implemented (requested k = {k})"
            )));
        }
        let n = basis.n();
        let mut orbit_of = vec![u32::MAX; basis.len()];
        let mut representatives = Vec::new();
        let mut orbit_sizes = Vec::new();
        // States are ascending, so the first unvisited state of an orbit is its minimum.
        for (idx, &c) in basis.states().iter().enumerate() {
            if orbit_of[idx] != u32::MAX {
                continue;
            }
            let r = representatives.len() as u32;
            let mut size = 0;
            let mut t = c;
            loop {
                let j = basis
                    .index_of(t)
                    .expect("translation preserves the periodic blockade");
                if orbit_of[j] == r {
                    break;
                }
                orbit_of[j] = r;
                size += 1;
                t = translate(t, n);
            }
            representatives.push(c);
            orbit_sizes.push(size);
        }
        let normalization = orbit_sizes.iter().map(|&s| 1.0 / (s as f64).sqrt()).collect();
        Ok(Self {
            basis,
            k,
            representatives,
            orbit_sizes,
            normalization,
            orbit_of,
        })
    }

    pub fn basis(&self) -> &Arc<ConstrainedBasis> {
        &self.basis
    }

    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.representatives.len()
    }

    pub fn representatives(&self) -> &[Config] {
        &self.representatives
    }

    pub fn orbit_sizes(&self) -> &[usize] {
        &self.orbit_sizes
    }

    /// Amplitude carried by each orbit member of a unit sector vector.
    pub fn normalization(&self) -> &[f64] {
        &self.normalization
    }

    /// Sector index of the orbit containing basis state `basis_index`.
    pub fn orbit_of(&self, basis_index: usize) -> usize {
        self.orbit_of[basis_index] as usize
    }

    pub fn representative_index(&self, c: Config) -> Option<usize> {
        self.basis.index_of(c).map(|i| self.orbit_of(i))
    }

    /// Expands sector amplitudes to the full constrained basis.
    pub fn embed(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: amplitudes.len(),
            });
        }
        Ok(self
            .orbit_of
            .iter()
            .map(|&r| amplitudes[r as usize] * self.normalization[r as usize])
            .collect())
    }

    /// Projects a full-basis vector onto the k = 0 sector.
    pub fn project(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.basis.len() {
            return Err(Error::Shape {
                expected: self.basis.len(),
                got: amplitudes.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (a, &r) in amplitudes.iter().zip(&self.orbit_of) {
            out[r as usize] += a * self.normalization[r as usize];
        }
        Ok(out)
    }
}

/// Which kind of space a vector or operator lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    Constrained,
    Unconstrained,
    ZeroMomentum,
}

/// Identity of the space an operator or state acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisTag {
    pub n: usize,
    pub boundary: Boundary,
    pub kind: SpaceKind,
    pub dim: usize,
}

impl fmt::Display for BasisTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?}(n={}, {}, dim={})",
            self.kind, self.n, self.boundary, self.dim
        )
    }
}

/// A Hilbert space operators are built on: a full basis or its k = 0 sector.
#[derive(Debug, Clone)]
pub enum Space {
    Full(Arc<ConstrainedBasis>),
    Sector(Arc<MomentumSector>),
}

impl Space {
    /// Blockade basis, optionally reduced to k = 0 (PBC only).
    pub fn constrained(n: usize, boundary: Boundary, zero_momentum: bool) -> Result<Self> {
        let basis = Arc::new(ConstrainedBasis::enumerate(n, boundary)?);
        if zero_momentum {
            Ok(Space::Sector(Arc::new(MomentumSector::build(basis, 0)?)))
        } else {
            Ok(Space::Full(basis))
        }
    }

    pub fn unconstrained(n: usize, boundary: Boundary) -> Result<Self> {
        Ok(Space::Full(Arc::new(ConstrainedBasis::unconstrained(
            n, boundary,
        )?)))
    }

    /// k = 0 sector of the unconstrained ring.
    pub fn unconstrained_zero_momentum(n: usize) -> Result<Self> {
        let basis = Arc::new(ConstrainedBasis::unconstrained(n, Boundary::Pbc)?);
        Ok(Space::Sector(Arc::new(MomentumSector::build(basis, 0)?)))
    }

    pub fn basis(&self) -> &Arc<ConstrainedBasis> {
        match self {
            Space::Full(b) => b,
            Space::Sector(s) => s.basis(),
        }
    }

    pub fn sector(&self) -> Option<&Arc<MomentumSector>> {
        match self {
            Space::Full(_) => None,
            Space::Sector(s) => Some(s),
        }
    }

    pub fn n(&self) -> usize {
        self.basis().n()
    }

    pub fn boundary(&self) -> Boundary {
        self.basis().boundary()
    }

    pub fn dim(&self) -> usize {
        match self {
            Space::Full(b) => b.len(),
            Space::Sector(s) => s.dim(),
        }
    }

    pub fn tag(&self) -> BasisTag {
        let kind = match self {
            Space::Full(b) if b.has_blockade() => SpaceKind::Constrained,
            Space::Full(_) => SpaceKind::Unconstrained,
            Space::Sector(_) => SpaceKind::ZeroMomentum,
        };
        BasisTag {
            n: self.n(),
            boundary: self.boundary(),
            kind,
            dim: self.dim(),
        }
    }

    /// Configurations labelling the rows of operators on this space.
    pub fn row_configs(&self) -> &[Config] {
        match self {
            Space::Full(b) => b.states(),
            Space::Sector(s) => s.representatives(),
        }
    }

    /// The same state expressed on the underlying full basis.
    pub fn to_full(&self, psi: &StateVector) -> Result<StateVector> {
        psi.check_tag(&self.tag())?;
        match self {
            Space::Full(_) => Ok(psi.clone()),
            Space::Sector(s) => embed_sector_vector(psi.amplitudes(), s),
        }
    }

    /// The full-basis space underlying this one.
    pub fn full(&self) -> Space {
        Space::Full(self.basis().clone())
    }

    /// Moves a full-basis state into this space (projecting onto k = 0 if needed).
    pub fn from_full(&self, psi: &StateVector) -> Result<StateVector> {
        match self {
            Space::Full(_) => {
                psi.check_tag(&self.tag())?;
                Ok(psi.clone())
            }
            Space::Sector(s) => {
                psi.check_tag(&self.full().tag())?;
                Ok(StateVector::new(self.tag(), s.project(psi.amplitudes())?))
            }
        }
    }
}

/// Expands a k = 0 sector vector onto the constrained basis it was built from.
pub fn embed_sector_vector(amplitudes: &[Complex64], sector: &MomentumSector) -> Result<StateVector> {
    let full = sector.embed(amplitudes)?;
    let basis = sector.basis();
    Ok(StateVector::new(
        BasisTag {
            n: basis.n(),
            boundary: basis.boundary(),
            kind: if basis.has_blockade() {
                SpaceKind::Constrained
            } else {
                SpaceKind::Unconstrained
            },
            dim: basis.len(),
        },
        full,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(basis: &ConstrainedBasis) -> Vec<String> {
        basis
            .states()
            .iter()
            .map(|&c| format_config(c, basis.n()))
            .collect()
    }

    #[test]
    fn single_site_has_no_constraint() {
        for b in [Boundary::Pbc, Boundary::Obc] {
            let basis = ConstrainedBasis::enumerate(1, b).unwrap();
            assert_eq!(basis.states(), &[0, 1]);
        }
    }

    #[test]
    fn four_site_ring_and_chain() {
        let pbc = ConstrainedBasis::enumerate(4, Boundary::Pbc).unwrap();
        let mut got = strings(&pbc);
        got.sort();
        let mut want: Vec<String> = ["0000", "1000", "0100", "0010", "0001", "1010", "0101"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        want.sort();
        assert_eq!(got, want);

        let obc = ConstrainedBasis::enumerate(4, Boundary::Obc).unwrap();
        assert_eq!(obc.len(), 8);
        assert!(obc.contains(parse_config("1001").unwrap()));
        assert!(!pbc.contains(parse_config("1001").unwrap()));
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            ConstrainedBasis::enumerate(0, Boundary::Pbc),
            Err(Error::SizeLimit { .. })
        ));
        assert!(matches!(
            ConstrainedBasis::enumerate(33, Boundary::Obc),
            Err(Error::SizeLimit { .. })
        ));
        assert!(ConstrainedBasis::unconstrained(21, Boundary::Obc).is_err());
    }

    #[test]
    fn index_is_inverse_of_list() {
        let basis = ConstrainedBasis::enumerate(12, Boundary::Pbc).unwrap();
        for (i, &c) in basis.states().iter().enumerate() {
            assert_eq!(basis.index_of(c), Some(i));
        }
        assert_eq!(basis.index_of(0b11), None);
    }

    #[test]
    fn translate_wraps() {
        assert_eq!(translate(0b1000, 4), 0b0001);
        assert_eq!(translate(0b0101, 4), 0b1010);
        assert_eq!(translate(1, 1), 1);
    }

    #[test]
    fn sector_of_four_site_ring() {
        let basis = Arc::new(ConstrainedBasis::enumerate(4, Boundary::Pbc).unwrap());
        let sector = MomentumSector::build(basis, 0).unwrap();
        let reps: Vec<_> = sector
            .representatives()
            .iter()
            .map(|&c| format_config(c, 4))
            .collect();
        // site-1-first strings of the integers 0, 1, 5
        assert_eq!(reps, vec!["0000", "1000", "1010"]);
        assert_eq!(sector.orbit_sizes(), &[1, 4, 2]);
    }

    #[test]
    fn sector_of_three_and_one_site_rings() {
        let b3 = Arc::new(ConstrainedBasis::enumerate(3, Boundary::Pbc).unwrap());
        let s3 = MomentumSector::build(b3, 0).unwrap();
        assert_eq!(s3.representatives(), &[0, 1]);
        assert_eq!(s3.orbit_sizes(), &[1, 3]);

        let b1 = Arc::new(ConstrainedBasis::enumerate(1, Boundary::Pbc).unwrap());
        let s1 = MomentumSector::build(b1, 0).unwrap();
        assert_eq!(s1.dim(), 2);
        let v = vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        assert_eq!(s1.embed(&v).unwrap(), v);
    }

    #[test]
    fn sector_rejects_open_chain_and_nonzero_k() {
        let obc = Arc::new(ConstrainedBasis::enumerate(6, Boundary::Obc).unwrap());
        assert!(matches!(
            MomentumSector::build(obc, 0),
            Err(Error::UnsupportedSymmetry(_))
        ));
        let pbc = Arc::new(ConstrainedBasis::enumerate(6, Boundary::Pbc).unwrap());
        assert!(MomentumSector::build(pbc, 1).is_err());
    }

    #[test]
    fn embed_examples() {
        let basis = Arc::new(ConstrainedBasis::enumerate(4, Boundary::Pbc).unwrap());
        let sector = MomentumSector::build(basis.clone(), 0).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);

        let v = embed_sector_vector(&[zero, zero, one], &sector).unwrap();
        for (&c, a) in basis.states().iter().zip(v.amplitudes()) {
            let want = if c == 0b0101 || c == 0b1010 {
                1.0 / 2f64.sqrt()
            } else {
                0.0
            };
            assert!((a.re - want).abs() < 1e-15 && a.im == 0.0);
        }

        let v = embed_sector_vector(&[zero, one, zero], &sector).unwrap();
        for (&c, a) in basis.states().iter().zip(v.amplitudes()) {
            let want = if c.count_ones() == 1 { 0.5 } else { 0.0 };
            assert!((a.re - want).abs() < 1e-15);
        }

        let v = embed_sector_vector(&[zero; 3], &sector).unwrap();
        assert!(v.amplitudes().iter().all(|a| *a == zero));

        assert!(matches!(
            embed_sector_vector(&[one; 2], &sector),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn unconstrained_space_indexing() {
        let b = ConstrainedBasis::unconstrained(3, Boundary::Obc).unwrap();
        assert_eq!(b.len(), 8);
        assert_eq!(b.index_of(0b111), Some(7));
        assert_eq!(b.index_of(8), None);
        assert!(!b.has_blockade());
    }
}
