//! Model Hamiltonians, observables and the density-wave reference states.
//!
//! Conventions: `|1>` is the excited (Rydberg) state, `n = |1><1|` and
//! `sigma^z = 2n - 1`, so `sigma^z |1> = +|1>`.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{occupied, translate, Boundary, Config, Space};
use crate::operator::{SparseOperator, StateVector};

/// Largest chain for the long-range model on the full 2^N space.
pub const LONGRANGE_MAX_SITES: usize = 14;

/// Default impurity site (1-based).
pub const DEFAULT_IMPURITY_SITE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Blockaded flips with detuning and next-nearest-neighbour interaction.
    #[default]
    #[serde(alias = "UV_PXP", alias = "uv")]
    UvPxp,
    /// Flips dressed by projectors on both neighbours at distance one and two.
    #[serde(alias = "PPXPP_EFF", alias = "ppxpp")]
    PpxppEff,
    /// Van der Waals 1/r^6 interactions on the unconstrained space.
    #[serde(alias = "LONGRANGE", alias = "long_range")]
    Longrange,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::UvPxp => "uv_pxp",
            Variant::PpxppEff => "ppxpp_eff",
            Variant::Longrange => "longrange",
        };
        f.write_str(s)
    }
}

/// A single-site potential `strength * n_site` (site is 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impurity {
    pub site: usize,
    pub strength: f64,
}

fn default_omega() -> f64 {
    1.0
}

/// Parameters of one Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(default)]
    pub variant: Variant,
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default)]
    pub u: f64,
    #[serde(default)]
    pub v: f64,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default)]
    pub impurities: Vec<Impurity>,
    /// Per-site position offsets of the long-range model; empty means all zero.
    #[serde(default)]
    pub offsets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Optional chain length carried along with model files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self::uv(0.0, 0.0)
    }
}

impl ModelSpec {
    /// UV-PXP model with Omega = 1 on a ring.
    pub fn uv(u: f64, v: f64) -> Self {
        Self {
            variant: Variant::UvPxp,
            omega: 1.0,
            u,
            v,
            boundary: Boundary::Pbc,
            impurities: Vec::new(),
            offsets: Vec::new(),
            seed: None,
            n: None,
        }
    }

    /// Effective PPXPP model; only `|u|` enters.
    pub fn effective(u: f64) -> Self {
        Self {
            variant: Variant::PpxppEff,
            ..Self::uv(u, 0.0)
        }
    }

    /// Long-range model with V = 1 on an open chain.
    pub fn longrange(omega: f64, u: f64) -> Self {
        Self {
            variant: Variant::Longrange,
            omega,
            u,
            v: 1.0,
            boundary: Boundary::Obc,
            ..Self::uv(u, 1.0)
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_impurity(mut self, site: usize, strength: f64) -> Self {
        self.impurities.push(Impurity { site, strength });
        self
    }

    pub fn with_offsets(mut self, offsets: Vec<f64>) -> Self {
        self.offsets = offsets;
        self
    }

    /// True when the Hamiltonian commutes with lattice translations.
    pub fn is_translation_invariant(&self) -> bool {
        self.boundary == Boundary::Pbc
            && self.offsets.iter().all(|&d| d == 0.0)
            && self.impurities.iter().all(|imp| imp.strength == 0.0)
    }

    /// The space this model is naturally diagonalized in: the k = 0 sector for
    /// translation-invariant rings, the full basis otherwise; the long-range
    /// model uses the unconstrained space.
    pub fn natural_space(&self, n: usize) -> Result<Space> {
        match self.variant {
            Variant::Longrange => {
                check_longrange_size(n)?;
                if self.is_translation_invariant() {
                    Space::unconstrained_zero_momentum(n)
                } else {
                    Space::unconstrained(n, self.boundary)
                }
            }
            _ => Space::constrained(n, self.boundary, self.is_translation_invariant()),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_longrange_size(n: usize) -> Result<()> {
    if n > LONGRANGE_MAX_SITES {
        return Err(Error::TooLarge {
            what: "long-range model on the full 2^N space",
            dim: n,
            limit: LONGRANGE_MAX_SITES,
        });
    }
    Ok(())
}

fn check_variant(spec: &ModelSpec, expected: Variant) -> Result<()> {
    if spec.variant != expected {
        return Err(Error::VariantMismatch {
            expected: expected.to_string(),
            got: spec.variant.to_string(),
        });
    }
    Ok(())
}

fn check_space(spec: &ModelSpec, space: &Space, blockade: bool) -> Result<()> {
    if spec.boundary != space.boundary() {
        return Err(Error::BasisMismatch(format!(
            "model boundary {} but basis boundary {}",
            spec.boundary,
            space.boundary()
        )));
    }
    if space.basis().has_blockade() != blockade {
        return Err(Error::BasisMismatch(if blockade {
            "constrained model needs a blockade basis".into()
        } else {
            "long-range model acts on the unconstrained 2^N space".into()
        }));
    }
    let n = space.n();
    for imp in &spec.impurities {
        if imp.site == 0 || imp.site > n {
            return Err(Error::SiteOutOfRange { site: imp.site, n });
        }
    }
    if space.sector().is_some() && !spec.is_translation_invariant() {
        return Err(Error::UnsupportedSymmetry(
            "impurities or offsets break translation symmetry; use the full basis".into(),
        ));
    }
    Ok(())
}

/// Neighbour of `site` at signed distance `d`, if it exists and differs from `site`.
#[inline]
fn neighbour(site: usize, d: isize, n: usize, boundary: Boundary) -> Option<usize> {
    let j = site as isize + d;
    let j = match boundary {
        Boundary::Obc if j < 0 || j >= n as isize => return None,
        Boundary::Obc => j as usize,
        Boundary::Pbc => j.rem_euclid(n as isize) as usize,
    };
    (j != site).then_some(j)
}

/// Whether every neighbour of `site` within `reach` is empty.
#[inline]
fn neighbours_empty(c: Config, site: usize, reach: isize, n: usize, boundary: Boundary) -> bool {
    (1..=reach).all(|d| {
        [d, -d].iter().all(|&dd| match neighbour(site, dd, n, boundary) {
            Some(j) => !occupied(c, j),
            None => true,
        })
    })
}

/// `sum_i n_i n_{i+2}` with wraparound for rings of at least three sites.
pub fn next_nearest_pairs(c: Config, n: usize, boundary: Boundary) -> u32 {
    match boundary {
        Boundary::Obc => (c & (c >> 2)).count_ones(),
        Boundary::Pbc if n >= 3 => (c & translate(translate(c, n), n)).count_ones(),
        Boundary::Pbc => 0,
    }
}

fn impurity_energy(c: Config, impurities: &[Impurity]) -> f64 {
    impurities
        .iter()
        .filter(|imp| occupied(c, imp.site - 1))
        .map(|imp| imp.strength)
        .sum()
}

/// Generic assembly: `diag(c)` on each row and `flip(c, site)` giving the
/// amplitude of `c -> c ^ (1 << site)` when the move is allowed.
fn assemble<D, F>(space: &Space, diag: D, flip: F) -> SparseOperator
where
    D: Fn(Config) -> f64,
    F: Fn(Config, usize) -> Option<f64>,
{
    let n = space.n();
    let rows = space.row_configs();
    let mut triplets = Vec::with_capacity(rows.len() * (n / 2 + 1));
    for (b, &cb) in rows.iter().enumerate() {
        triplets.push((b, b, diag(cb)));
        for site in 0..n {
            let Some(amp) = flip(cb, site) else { continue };
            let c = cb ^ (1 << site);
            match space {
                Space::Full(basis) => {
                    let a = basis
                        .index_of(c)
                        .expect("allowed flips stay inside the basis");
                    if a >= b {
                        triplets.push((a, b, amp));
                    }
                }
                Space::Sector(sector) => {
                    let a = sector
                        .representative_index(c)
                        .expect("allowed flips stay inside the basis");
                    if a >= b {
                        let sizes = sector.orbit_sizes();
                        let w = (sizes[b] as f64 / sizes[a] as f64).sqrt();
                        triplets.push((a, b, amp * w));
                    }
                }
            }
        }
    }
    SparseOperator::from_lower_triplets(space.tag(), triplets)
}

/// `H = sum_i -Omega P_{i-1} X_i P_{i+1} + U n_i + V n_i n_{i+2}` plus impurities.
///
/// On an open chain the edge flips carry a single projector (`X_1 P_2` and
/// `P_{N-1} X_N`) and the interaction runs over pairs inside the chain.
pub fn build_uv_hamiltonian(spec: &ModelSpec, space: &Space) -> Result<SparseOperator> {
    check_variant(spec, Variant::UvPxp)?;
    check_space(spec, space, true)?;
    let (n, boundary) = (space.n(), space.boundary());
    let (u, v, omega) = (spec.u, spec.v, spec.omega);
    let impurities = spec.impurities.clone();
    Ok(assemble(
        space,
        |c| {
            u * c.count_ones() as f64
                + v * next_nearest_pairs(c, n, boundary) as f64
                + impurity_energy(c, &impurities)
        },
        |c, site| neighbours_empty(c, site, 1, n, boundary).then_some(-omega),
    ))
}

/// `H = -sum_i [P_{i-2} P_{i-1} X_i P_{i+1} P_{i+2} + |U| n_i]` (flip amplitude
/// scaled by Omega, which defaults to one).
pub fn build_effective_hamiltonian(spec: &ModelSpec, space: &Space) -> Result<SparseOperator> {
    check_variant(spec, Variant::PpxppEff)?;
    check_space(spec, space, true)?;
    let (n, boundary) = (space.n(), space.boundary());
    let (u_abs, omega) = (spec.u.abs(), spec.omega);
    let impurities = spec.impurities.clone();
    Ok(assemble(
        space,
        |c| -u_abs * c.count_ones() as f64 + impurity_energy(c, &impurities),
        |c, site| neighbours_empty(c, site, 2, n, boundary).then_some(-omega),
    ))
}

/// Pairwise `1/r^6` coefficients with optional offsets. Open chains use
/// `|x_j - x_i|`; rings use the shorter arc, `min(r, N - r)`.
pub fn longrange_couplings(n: usize, offsets: &[f64], boundary: Boundary) -> Result<Vec<Vec<f64>>> {
    if !offsets.is_empty() && offsets.len() != n {
        return Err(Error::Shape {
            expected: n,
            got: offsets.len(),
        });
    }
    let pos = |i: usize| i as f64 + offsets.get(i).copied().unwrap_or(0.0);
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut r = (pos(j) - pos(i)).abs();
            if boundary == Boundary::Pbc {
                r = r.min(n as f64 - r);
            }
            k[i][j] = 1.0 / r.powi(6);
            k[j][i] = k[i][j];
        }
    }
    Ok(k)
}

/// `H = -(Omega/2) sum X_i - U sum n_i + V sum_{i<j} n_i n_j / r_ij^6` on
/// the unconstrained space.
pub fn build_longrange_hamiltonian(spec: &ModelSpec, space: &Space) -> Result<SparseOperator> {
    check_variant(spec, Variant::Longrange)?;
    check_space(spec, space, false)?;
    let n = space.n();
    check_longrange_size(n)?;
    let couplings = longrange_couplings(n, &spec.offsets, spec.boundary)?;
    let (u, v, half_omega) = (spec.u, spec.v, spec.omega / 2.0);
    let impurities = spec.impurities.clone();
    Ok(assemble(
        space,
        |c| {
            let mut e = -u * c.count_ones() as f64 + impurity_energy(c, &impurities);
            for i in (0..n).filter(|&i| occupied(c, i)) {
                for j in ((i + 1)..n).filter(|&j| occupied(c, j)) {
                    e += v * couplings[i][j];
                }
            }
            e
        },
        |_, _| (half_omega != 0.0).then_some(-half_omega),
    ))
}

/// Dispatches on the model variant.
pub fn build_hamiltonian(spec: &ModelSpec, space: &Space) -> Result<SparseOperator> {
    match spec.variant {
        Variant::UvPxp => build_uv_hamiltonian(spec, space),
        Variant::PpxppEff => build_effective_hamiltonian(spec, space),
        Variant::Longrange => build_longrange_hamiltonian(spec, space),
    }
}

/// Site offsets drawn uniformly from `[-amplitude, amplitude]`, one per site.
pub fn draw_offsets(n: usize, amplitude: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            if amplitude > 0.0 {
                rng.gen_range(-amplitude..=amplitude)
            } else {
                0.0
            }
        })
        .collect()
}

/// Density wave with an excitation every `period` sites starting at site 1.
pub fn density_wave(n: usize, period: usize) -> Config {
    (0..n).step_by(period).fold(0, |c, i| c | (1 << i))
}

/// Equal superposition of the `period` translates of a density wave.
pub fn density_wave_state(space: &Space, period: usize) -> Result<StateVector> {
    let n = space.n();
    if period == 0 || n % period != 0 {
        return Err(Error::InvalidParameter(format!(
            "a period-{period} density wave needs N divisible by {period} (N = {n})"
        )));
    }
    let base = density_wave(n, period);
    let mut patterns: Vec<Config> = Vec::with_capacity(period);
    let mut c = base;
    for _ in 0..period {
        if !patterns.contains(&c) {
            patterns.push(c);
        }
        c = translate(c, n);
    }
    let amp = 1.0 / (patterns.len() as f64).sqrt();
    let mut psi = StateVector::zeros(space.full().tag());
    for &p in &patterns {
        let idx = space
            .basis()
            .index_of(p)
            .ok_or_else(|| Error::InvalidParameter("density wave not in the basis".into()))?;
        psi.amplitudes_mut()[idx] = Complex64::new(amp, 0.0);
    }
    space.from_full(&psi)
}

/// `(|1010...> + |0101...>)/sqrt(2)`
pub fn z2_state(space: &Space) -> Result<StateVector> {
    density_wave_state(space, 2)
}

/// `(|100100...> + |010010...> + |001001...>)/sqrt(3)`
pub fn z3_state(space: &Space) -> Result<StateVector> {
    density_wave_state(space, 3)
}

/// A single basis configuration as a normalized state.
pub fn product_state(space: &Space, c: Config) -> Result<StateVector> {
    let idx = space
        .basis()
        .index_of(c)
        .ok_or_else(|| Error::InvalidParameter("configuration not in the basis".into()))?;
    let mut psi = StateVector::zeros(space.full().tag());
    psi.amplitudes_mut()[idx] = Complex64::new(1.0, 0.0);
    let psi = space.from_full(&psi)?;
    Ok(psi.normalized())
}

/// Single-site Pauli factors for custom strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
    /// The occupation projector `n = |1><1|`.
    N,
}

/// Observables that can be assembled as real symmetric operators.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservableKind {
    /// `n_i`
    Density(usize),
    /// `n_i n_{i+1}`
    NnPair(usize),
    /// `sigma^z_i sigma^z_{i+1}`
    SigmaZZ(usize),
    /// `sum_i n_i n_{i+2}`
    NextNearestSum,
    /// `sum_i n_i`
    Number,
    /// Product of single-site factors (1-based sites), projected onto the basis.
    Pauli(Vec<(usize, Pauli)>),
}

fn check_site(site: usize, n: usize) -> Result<usize> {
    if site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n });
    }
    Ok(site - 1)
}

fn next_site(i: usize, n: usize, boundary: Boundary) -> Result<usize> {
    match boundary {
        Boundary::Pbc => Ok((i + 1) % n),
        Boundary::Obc if i + 1 < n => Ok(i + 1),
        Boundary::Obc => Err(Error::SiteOutOfRange { site: i + 2, n }),
    }
}

fn sz(c: Config, i: usize) -> f64 {
    if occupied(c, i) {
        1.0
    } else {
        -1.0
    }
}

/// Builds an observable on `space`. On the k = 0 sector site-resolved diagonal
/// observables are replaced by their translation average, which has the same
/// expectation value in every translation-invariant state.
pub fn observable(kind: &ObservableKind, space: &Space) -> Result<SparseOperator> {
    let (n, boundary) = (space.n(), space.boundary());
    let diag_fn: Box<dyn Fn(Config) -> f64> = match kind {
        ObservableKind::Density(site) => {
            let i = check_site(*site, n)?;
            Box::new(move |c| occupied(c, i) as u8 as f64)
        }
        ObservableKind::NnPair(site) => {
            let i = check_site(*site, n)?;
            let j = next_site(i, n, boundary)?;
            Box::new(move |c| (occupied(c, i) && occupied(c, j)) as u8 as f64)
        }
        ObservableKind::SigmaZZ(site) => {
            let i = check_site(*site, n)?;
            let j = next_site(i, n, boundary)?;
            Box::new(move |c| sz(c, i) * sz(c, j))
        }
        ObservableKind::NextNearestSum => {
            Box::new(move |c| next_nearest_pairs(c, n, boundary) as f64)
        }
        ObservableKind::Number => Box::new(|c| c.count_ones() as f64),
        ObservableKind::Pauli(factors) => return pauli_string(factors, space),
    };
    let diag: Vec<f64> = match space {
        Space::Full(_) => space.row_configs().iter().map(|&c| diag_fn(c)).collect(),
        Space::Sector(sector) => sector
            .representatives()
            .iter()
            .map(|&r| {
                let mut c = r;
                let mut acc = 0.0;
                for _ in 0..n {
                    acc += diag_fn(c);
                    c = translate(c, n);
                }
                acc / n as f64
            })
            .collect(),
    };
    Ok(SparseOperator::diagonal(space.tag(), &diag))
}

fn pauli_string(factors: &[(usize, Pauli)], space: &Space) -> Result<SparseOperator> {
    let Space::Full(basis) = space else {
        return Err(Error::UnsupportedSymmetry(
            "Pauli strings are built on the full basis".into(),
        ));
    };
    let n = basis.n();
    let mut flip_mask: Config = 0;
    let mut ys = 0;
    let mut checked = Vec::with_capacity(factors.len());
    for &(site, p) in factors {
        let i = check_site(site, n)?;
        if checked.iter().any(|&(j, _)| j == i) {
            return Err(Error::InvalidParameter(format!(
                "site {site} repeated in Pauli string"
            )));
        }
        if matches!(p, Pauli::X | Pauli::Y) {
            flip_mask |= 1 << i;
        }
        if p == Pauli::Y {
            ys += 1;
        }
        checked.push((i, p));
    }
    if ys % 2 == 1 {
        return Err(Error::InvalidParameter(
            "an odd number of Y factors gives an imaginary operator".into(),
        ));
    }
    // <c'|O|c> with c' = c ^ flip_mask; Y|0> = i|1>, Y|1> = -i|0> in the
    // sigma^z = 2n - 1 frame (|1> is spin up).
    let element = |c: Config| -> f64 {
        let mut amp = Complex64::new(1.0, 0.0);
        for &(i, p) in &checked {
            let up = occupied(c, i);
            amp *= match p {
                Pauli::X => Complex64::new(1.0, 0.0),
                Pauli::Y if up => Complex64::new(0.0, 1.0),
                Pauli::Y => Complex64::new(0.0, -1.0),
                Pauli::Z => Complex64::new(sz(c, i), 0.0),
                Pauli::N => Complex64::new(occupied(c, i) as u8 as f64, 0.0),
            };
        }
        amp.re
    };
    let mut triplets = Vec::new();
    for (b, &c) in basis.states().iter().enumerate() {
        let target = c ^ flip_mask;
        if let Some(a) = basis.index_of(target) {
            let v = element(c);
            if a >= b && v != 0.0 {
                triplets.push((a, b, v));
            }
        }
    }
    Ok(SparseOperator::from_lower_triplets(space.tag(), triplets))
}
