//! Unitary time evolution and observable time series after a quench.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussianity::{
    interaction_distance, reduced_density_matrix, wick_violation, DistanceOptions, WickTriple,
};
use crate::hamiltonians::{
    build_hamiltonian, observable, product_state, z2_state, z3_state, ModelSpec, ObservableKind,
};
use crate::hilbert::{parse_config, Space};
use crate::operator::{dot, norm, SparseOperator, StateVector};
use crate::solver::ground_state;

/// Target error per Krylov step (in vector norm).
pub const STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovOptions {
    pub tol: f64,
    /// First subspace dimension tried; doubled on failure up to `max_dim`.
    pub initial_dim: usize,
    pub max_dim: usize,
    /// Substep halvings allowed before giving up.
    pub max_halvings: u32,
    /// Orthogonalize each new Lanczos vector against the whole basis instead
    /// of only the previous two. Costs `O(m^2 dim)` per step.
    pub reorthogonalize: bool,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            tol: STEP_TOL,
            initial_dim: 20,
            max_dim: 80,
            max_halvings: 40,
            reorthogonalize: false,
        }
    }
}

/// `exp(-i H t)` applied by short-iterate Lanczos steps.
pub struct Propagator<'a> {
    h: &'a SparseOperator,
    opts: KrylovOptions,
    /// Substep that last succeeded; reused as the first guess.
    substep: Option<f64>,
}

/// Outcome of one Krylov attempt.
enum Attempt {
    /// New state and the subspace dimension that was needed.
    Done(Vec<Complex64>, usize),
    Failed(f64),
}

impl<'a> Propagator<'a> {
    pub fn new(h: &'a SparseOperator) -> Self {
        Self::with_options(h, KrylovOptions::default())
    }

    pub fn with_options(h: &'a SparseOperator, opts: KrylovOptions) -> Self {
        Self {
            h,
            opts,
            substep: None,
        }
    }

    /// Advances `psi` by `dt` (which may be negative).
    pub fn advance(&mut self, psi: &mut Vec<Complex64>, dt: f64) -> Result<()> {
        if psi.len() != self.h.dim() {
            return Err(Error::Shape {
                expected: self.h.dim(),
                got: psi.len(),
            });
        }
        if dt == 0.0 {
            return Ok(());
        }
        let sign = dt.signum();
        let mut remaining = dt.abs();
        let mut sub = self.substep.unwrap_or(remaining).min(remaining);
        let mut halvings = 0;
        while remaining > 0.0 {
            let h = sub.min(remaining);
            match self.krylov_step(psi, sign * h) {
                Attempt::Done(next, used) => {
                    *psi = next;
                    remaining -= h;
                    // A comfortably small subspace means the substep can grow.
                    if used <= self.opts.max_dim / 2 && h == sub {
                        sub *= 2.0;
                    }
                    if remaining < 1e-14 * dt.abs() {
                        remaining = 0.0;
                    }
                }
                Attempt::Failed(err) => {
                    halvings += 1;
                    if halvings > self.opts.max_halvings {
                        return Err(Error::NoConvergence {
                            method: "krylov propagation",
                            iterations: halvings as usize,
                            residual: err,
                        });
                    }
                    sub = h / 2.0;
                }
            }
        }
        self.substep = Some(sub);
        Ok(())
    }

    /// One Lanczos projection of `exp(-i H dt) psi`, growing the subspace
    /// through `initial_dim, 2 initial_dim, ...` until the error estimate
    /// `beta_m |[exp(-i T dt) e_1]_m|` is below tolerance.
    fn krylov_step(&self, psi: &[Complex64], dt: f64) -> Attempt {
        let dim = psi.len();
        let scale = norm(psi);
        if scale == 0.0 {
            return Attempt::Done(psi.to_vec(), 0);
        }
        let max_m = self.opts.max_dim.min(dim).max(1);
        let mut check_at = self.opts.initial_dim.min(max_m).max(1);
        let happy = 1e-12 * self.h.norm_bound().max(1.0);
        // In small spaces the subspace can approach the full dimension, where
        // the three-term recurrence loses orthogonality fastest.
        let reorthogonalize = self.opts.reorthogonalize || dim <= 4 * self.opts.max_dim;

        let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_m);
        let mut alpha: Vec<f64> = Vec::with_capacity(max_m);
        let mut beta: Vec<f64> = Vec::with_capacity(max_m);
        basis.push(psi.iter().map(|a| a / scale).collect());
        let mut w = vec![Complex64::new(0.0, 0.0); dim];
        let mut last_err = f64::INFINITY;
        loop {
            let j = basis.len() - 1;
            self.h.apply_into(&basis[j], &mut w);
            alpha.push(dot(&basis[j], &w).re);
            if reorthogonalize {
                for _ in 0..2 {
                    for b in &basis {
                        let c = dot(b, &w);
                        w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
                    }
                }
            } else {
                let a = alpha[j];
                w.iter_mut().zip(&basis[j]).for_each(|(x, y)| *x -= a * y);
                if j > 0 {
                    let b = beta[j - 1];
                    w.iter_mut().zip(&basis[j - 1]).for_each(|(x, y)| *x -= b * y);
                }
            }
            let b_next = norm(&w);
            let m = basis.len();
            let exhausted = b_next < happy || m == dim;
            if m == check_at || exhausted || m == max_m {
                let c = exp_tridiagonal(&alpha, &beta, dt);
                let err = if exhausted { 0.0 } else { b_next * c[m - 1].norm() };
                if err <= self.opts.tol {
                    let mut out = vec![Complex64::new(0.0, 0.0); dim];
                    for (coef, v) in c.iter().zip(&basis) {
                        let coef = coef * scale;
                        out.iter_mut().zip(v).for_each(|(o, x)| *o += coef * x);
                    }
                    return Attempt::Done(out, m);
                }
                last_err = err;
                if m == max_m {
                    return Attempt::Failed(last_err);
                }
                check_at = (check_at * 2).min(max_m);
            }
            if exhausted {
                return Attempt::Failed(last_err);
            }
            beta.push(b_next);
            basis.push(w.iter().map(|x| x / b_next).collect());
        }
    }

    /// States at each of `times` (ascending or not), starting from `psi0` at t = 0.
    pub fn evolve(&mut self, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
        psi0.check_tag(self.h.tag())?;
        let mut psi = psi0.amplitudes().to_vec();
        let mut t = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            self.advance(&mut psi, target - t)?;
            t = target;
            out.push(StateVector::new(*psi0.tag(), psi.clone()));
        }
        Ok(out)
    }
}

/// `exp(-i T dt) e_1` for the real symmetric tridiagonal `T`.
fn exp_tridiagonal(alpha: &[f64], beta: &[f64], dt: f64) -> Vec<Complex64> {
    let m = alpha.len();
    let mut t = DMatrix::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let s = &eig.eigenvectors;
    (0..m)
        .map(|r| {
            (0..m)
                .map(|k| {
                    let phase = Complex64::from_polar(1.0, -eig.eigenvalues[k] * dt);
                    phase * (s[(r, k)] * s[(0, k)])
                })
                .sum()
        })
        .collect()
}

/// `exp(-i H t) psi0` at each time.
pub fn evolve(h: &SparseOperator, psi0: &StateVector, times: &[f64]) -> Result<Vec<StateVector>> {
    let n = psi0.norm();
    if (n - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidParameter(format!(
            "initial state must be normalized (norm {n})"
        )));
    }
    Propagator::new(h).evolve(psi0, times)
}

/// `|<psi_eff(t)|psi_exact(t)>|^2` for the same initial state.
pub fn fidelity_compare(
    h_exact: &SparseOperator,
    h_eff: &SparseOperator,
    psi0: &StateVector,
    times: &[f64],
) -> Result<Vec<f64>> {
    if h_exact.tag() != h_eff.tag() {
        return Err(Error::BasisMismatch(
            "exact and effective Hamiltonians live on different bases".into(),
        ));
    }
    let a = evolve(h_exact, psi0, times)?;
    let b = evolve(h_eff, psi0, times)?;
    a.iter().zip(&b).map(|(x, y)| y.overlap(x)).collect()
}

/// Uniform time grid `0, dt, ..., t_max` (the endpoint is included when it
/// falls on the grid within rounding).
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_max > 0.0 && dt > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "need t_max > 0 and dt > 0 (got {t_max}, {dt})"
        )));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|k| k as f64 * dt).collect())
}

/// How the pre-quench state is prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Ground state of the initial model.
    Ground,
    /// Ideal Z2 superposition.
    Z2,
    /// Ideal Z3 superposition.
    Z3,
    /// A single configuration written site 1 first, e.g. `100100`.
    Product(String),
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ground" | "gs" => Ok(Self::Ground),
            "z2" => Ok(Self::Z2),
            "z3" => Ok(Self::Z3),
            other if !other.is_empty() && other.chars().all(|c| c == '0' || c == '1') => {
                Ok(Self::Product(other.to_string()))
            }
            other => Err(Error::InvalidParameter(format!(
                "unknown initial state '{other}' (ground, z2, z3 or a bit string)"
            ))),
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ground => f.write_str("ground"),
            Self::Z2 => f.write_str("z2"),
            Self::Z3 => f.write_str("z3"),
            Self::Product(s) => f.write_str(s),
        }
    }
}

/// Quantities recorded along a quench.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuenchObservable {
    Entropy,
    InteractionDistance,
    Wick,
    /// `<sigma^z_i sigma^z_{i+1}>` at site `i`.
    Correlator(usize),
    /// `|<psi(0)|psi(t)>|^2`
    Fidelity,
    Energy,
}

impl QuenchObservable {
    pub fn label(&self) -> String {
        match self {
            Self::Entropy => "entropy".into(),
            Self::InteractionDistance => "d_f".into(),
            Self::Wick => "wick".into(),
            Self::Correlator(i) => format!("zz_{i}"),
            Self::Fidelity => "fidelity".into(),
            Self::Energy => "energy".into(),
        }
    }

    /// Parses a comma-separated list such as `entropy,df,zz:1,energy`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',')
            .map(str::trim)
            .filter(|p| !p.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for QuenchObservable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let (name, arg) = match lower.split_once([':', '_']) {
            Some((a, b)) => (a, Some(b)),
            None => (lower.as_str(), None),
        };
        Ok(match (name, arg) {
            ("entropy" | "s", None) => Self::Entropy,
            ("df" | "d" | "interaction", None) => Self::InteractionDistance,
            ("d", Some("f")) => Self::InteractionDistance,
            ("wick" | "w", None) => Self::Wick,
            ("fidelity", None) => Self::Fidelity,
            ("energy", None) => Self::Energy,
            ("correlator" | "zz", arg) => Self::Correlator(match arg {
                None => 1,
                Some(a) => a
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad correlator site in '{s}'")))?,
            }),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown observable '{s}' (entropy, df, wick, correlator:i, fidelity, energy)"
                )))
            }
        })
    }
}

/// A quench from `initial` (prepared with `initial_model`) under `final_model`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuenchProtocol {
    pub n: usize,
    pub initial_model: ModelSpec,
    pub final_model: ModelSpec,
    pub initial: InitialState,
    pub t_max: f64,
    pub dt: f64,
    pub observables: Vec<QuenchObservable>,
    /// Block size of the entanglement cut; `None` means `N / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    /// Wick triple; `None` selects the boundary default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple: Option<WickTriple>,
    #[serde(default)]
    pub distance: DistanceOptions,
    /// Seed the D_F search at each time with the optimum of the previous time.
    #[serde(default = "default_true")]
    pub warm_start: bool,
    /// Evolve in the k = 0 sector when the quench allows it.
    #[serde(default = "default_true")]
    pub momentum_sector: bool,
}

fn default_true() -> bool {
    true
}

impl QuenchProtocol {
    pub fn new(n: usize, initial_model: ModelSpec, final_model: ModelSpec) -> Self {
        Self {
            n,
            initial_model,
            final_model,
            initial: InitialState::Ground,
            t_max: 40.0,
            dt: 0.1,
            observables: vec![
                QuenchObservable::Entropy,
                QuenchObservable::InteractionDistance,
                QuenchObservable::Energy,
            ],
            block: None,
            triple: None,
            distance: DistanceOptions::default(),
            warm_start: true,
            momentum_sector: true,
        }
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_times(mut self, t_max: f64, dt: f64) -> Self {
        self.t_max = t_max;
        self.dt = dt;
        self
    }

    pub fn with_observables(mut self, observables: Vec<QuenchObservable>) -> Self {
        self.observables = observables;
        self
    }

    pub fn validate(&self) -> Result<()> {
        time_grid(self.t_max, self.dt)?;
        if self.initial_model.boundary != self.final_model.boundary {
            return Err(Error::InvalidParameter(
                "initial and final models must share the boundary condition".into(),
            ));
        }
        for spec in [&self.initial_model, &self.final_model] {
            if let Some(m) = spec.n {
                if m != self.n {
                    return Err(Error::InvalidParameter(format!(
                        "model file is for N = {m} but the quench uses N = {}",
                        self.n
                    )));
                }
            }
        }
        let unconstrained = |s: &ModelSpec| s.variant == crate::hamiltonians::Variant::Longrange;
        if unconstrained(&self.initial_model) != unconstrained(&self.final_model) {
            return Err(Error::InvalidParameter(
                "initial and final models must act on the same Hilbert space".into(),
            ));
        }
        Ok(())
    }

    /// Evolution space: the k = 0 sector when both models and the initial
    /// state are translation invariant, otherwise the full basis.
    pub fn space(&self) -> Result<Space> {
        let symmetric_start = match &self.initial {
            InitialState::Ground => self.initial_model.is_translation_invariant(),
            InitialState::Z2 | InitialState::Z3 => true,
            InitialState::Product(_) => false,
        };
        let use_sector =
            self.momentum_sector && symmetric_start && self.final_model.is_translation_invariant();
        let space = self.final_model.natural_space(self.n)?;
        match (&space, use_sector) {
            (Space::Sector(_), false) => Ok(space.full()),
            _ => Ok(space),
        }
    }

    /// The normalized pre-quench state on `space`.
    pub fn prepare(&self, space: &Space) -> Result<StateVector> {
        match &self.initial {
            InitialState::Ground => {
                let h = build_hamiltonian(&self.initial_model, space)?;
                Ok(ground_state(&h)?.1)
            }
            InitialState::Z2 => z2_state(space),
            InitialState::Z3 => z3_state(space),
            InitialState::Product(bits) => {
                if bits.len() != self.n {
                    return Err(Error::Shape {
                        expected: self.n,
                        got: bits.len(),
                    });
                }
                product_state(space, parse_config(bits)?)
            }
        }
    }
}

/// Time series of a quench together with conservation diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuenchResult {
    pub protocol: QuenchProtocol,
    pub dim: usize,
    pub times: Vec<f64>,
    /// One column per requested observable, in request order.
    pub columns: Vec<(String, Vec<f64>)>,
    /// `max_t | ||psi(t)|| - 1 |`
    pub norm_drift: f64,
    /// `max_t |<H_f>(t) - <H_f>(0)|`
    pub energy_drift: f64,
    /// Optimal free-mode energies of the last D_F evaluation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub final_free_energies: Vec<f64>,
}

impl QuenchResult {
    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.as_slice())
    }

    pub fn series(&self, obs: &QuenchObservable) -> Option<&[f64]> {
        self.column(&obs.label())
    }

    /// Writes `t,<observable>...` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.columns.iter().map(|(l, _)| l.clone()));
        w.write_record(&header)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![format!("{t}")];
            row.extend(self.columns.iter().map(|(_, v)| format!("{}", v[k])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Prepares the initial state, evolves it under the final model and records
/// the requested observables at every grid time.
pub fn run_quench(protocol: &QuenchProtocol) -> Result<QuenchResult> {
    protocol.validate()?;
    let space = protocol.space()?;
    let psi0 = protocol.prepare(&space)?;
    run_quench_from(protocol, &space, psi0)
}

/// As [`run_quench`] but with an explicit initial state on `space`.
pub fn run_quench_from(protocol: &QuenchProtocol, space: &Space, psi0: StateVector) -> Result<QuenchResult> {
    protocol.validate()?;
    let psi0 = psi0.normalized();
    let h = build_hamiltonian(&protocol.final_model, space)?;
    psi0.check_tag(h.tag())?;
    let times = time_grid(protocol.t_max, protocol.dt)?;
    let full = space.full();
    let n = space.n();
    let block = protocol.block.unwrap_or(n / 2);
    let triple = match protocol.triple {
        Some(t) => WickTriple::new(t.0, n)?,
        None => WickTriple::default_for(n, space.boundary())?,
    };
    let correlators: Vec<Option<SparseOperator>> = protocol
        .observables
        .iter()
        .map(|o| match o {
            QuenchObservable::Correlator(i) => {
                observable(&ObservableKind::SigmaZZ(*i), space).map(Some)
            }
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;

    let mut columns: Vec<(String, Vec<f64>)> = protocol
        .observables
        .iter()
        .map(|o| (o.label(), Vec::with_capacity(times.len())))
        .collect();
    let e0 = h.expectation(&psi0)?;
    let mut norm_drift: f64 = 0.0;
    let mut energy_drift: f64 = 0.0;
    let mut warm: Option<Vec<f64>> = None;

    let mut prop = Propagator::new(&h);
    let mut psi = psi0.amplitudes().to_vec();
    let mut t_prev = 0.0;
    for &t in &times {
        prop.advance(&mut psi, t - t_prev)?;
        t_prev = t;
        let state = StateVector::new(*psi0.tag(), psi.clone());
        norm_drift = norm_drift.max((state.norm() - 1.0).abs());
        let energy = h.expectation(&state)?;
        energy_drift = energy_drift.max((energy - e0).abs());

        let needs_full = protocol.observables.iter().any(|o| {
            matches!(
                o,
                QuenchObservable::Entropy
                    | QuenchObservable::InteractionDistance
                    | QuenchObservable::Wick
            )
        });
        let full_state = if needs_full {
            Some(space.to_full(&state)?)
        } else {
            None
        };
        let mut ent = None;
        for (k, obs) in protocol.observables.iter().enumerate() {
            let value = match obs {
                QuenchObservable::Entropy | QuenchObservable::InteractionDistance => {
                    if ent.is_none() {
                        ent = Some(reduced_density_matrix(
                            full_state.as_ref().unwrap(),
                            &full,
                            block,
                        )?);
                    }
                    let data = ent.as_ref().unwrap();
                    if *obs == QuenchObservable::Entropy {
                        data.entropy()
                    } else {
                        let mut opts = protocol.distance.clone();
                        if protocol.warm_start {
                            opts.warm_start = warm.clone();
                        }
                        let d = interaction_distance(&data.probabilities, &opts)?;
                        // Keep the raw optimum (signed) length-compatible for the next start.
                        warm = Some(d.energies.clone());
                        d.value
                    }
                }
                QuenchObservable::Wick => {
                    wick_violation(full_state.as_ref().unwrap(), &full, &triple)?
                }
                QuenchObservable::Correlator(_) => {
                    correlators[k].as_ref().unwrap().expectation(&state)?
                }
                QuenchObservable::Fidelity => psi0.overlap(&state)?,
                QuenchObservable::Energy => energy,
            };
            columns[k].1.push(value);
        }
    }
    Ok(QuenchResult {
        protocol: protocol.clone(),
        dim: space.dim(),
        times,
        columns,
        norm_drift,
        energy_drift,
        final_free_energies: warm.unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Boundary;
    use crate::solver::full_spectrum;

    fn small_h(n: usize) -> (Space, SparseOperator) {
        let space = Space::constrained(n, Boundary::Pbc, false).unwrap();
        let h = build_hamiltonian(&ModelSpec::uv(-1.3, 0.7), &space).unwrap();
        (space, h)
    }

    #[test]
    fn zero_time_is_identity() {
        let (space, h) = small_h(8);
        let psi = z2_state(&space).unwrap();
        let out = evolve(&h, &psi, &[0.0]).unwrap();
        assert_eq!(out[0].amplitudes(), psi.amplitudes());
    }

    #[test]
    fn eigenvector_only_picks_up_a_phase() {
        let (_, h) = small_h(10);
        let eig = full_spectrum(&h).unwrap();
        let v = eig.eigenvector(5);
        let out = evolve(&h, &v, &[0.5, 3.0, 17.0]).unwrap();
        for s in out {
            assert!((v.overlap(&s).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn matches_spectral_evolution() {
        // 843 states: large enough for the plain three-term recurrence.
        let (space, h) = small_h(14);
        let eig = full_spectrum(&h).unwrap();
        let psi0 = z2_state(&space).unwrap();
        let coef = eig.coefficients(&psi0).unwrap();
        for t in [7.3, 61.0] {
            let exact: Vec<Complex64> = (0..h.dim())
                .map(|r| {
                    (0..eig.len())
                        .map(|j| coef[j] * Complex64::from_polar(1.0, -eig.values[j] * t) * eig.vectors[(r, j)])
                        .sum()
                })
                .collect();
            for reorthogonalize in [false, true] {
                let opts = KrylovOptions {
                    reorthogonalize,
                    ..KrylovOptions::default()
                };
                let got = Propagator::with_options(&h, opts).evolve(&psi0, &[t]).unwrap();
                let err: f64 = got[0]
                    .amplitudes()
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(err < 1e-8, "t = {t}, reorthogonalize = {reorthogonalize}: {err}");
            }
        }
    }

    #[test]
    fn forward_then_backward_returns() {
        let (space, h) = small_h(12);
        let psi0 = z3_state(&space).unwrap();
        let mut p = Propagator::new(&h);
        let mut psi = psi0.amplitudes().to_vec();
        p.advance(&mut psi, 6.0).unwrap();
        p.advance(&mut psi, -6.0).unwrap();
        let err: f64 = psi
            .iter()
            .zip(psi0.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-8);
    }

    #[test]
    fn z3_is_nearly_stationary_in_the_z2_phase() {
        let space = Space::constrained(12, Boundary::Pbc, true).unwrap();
        let h = build_hamiltonian(&ModelSpec::uv(-15.0, -5.0), &space).unwrap();
        let z3 = z3_state(&space).unwrap();
        let times = time_grid(40.0, 0.1).unwrap();
        let states = evolve(&h, &z3, &times).unwrap();
        let min = states
            .iter()
            .map(|s| z3.overlap(s).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min >= 0.8, "{min}");
    }

    #[test]
    fn identical_hamiltonians_give_unit_fidelity() {
        let (space, h) = small_h(9);
        let psi = product_state(&space, 0b1001).unwrap();
        let f = fidelity_compare(&h, &h, &psi, &[0.0, 1.0, 5.0]).unwrap();
        assert!(f.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn observable_parsing() {
        assert_eq!(
            QuenchObservable::parse_list("entropy, df,wick,zz:3,fidelity,energy,d_f").unwrap(),
            vec![
                QuenchObservable::Entropy,
                QuenchObservable::InteractionDistance,
                QuenchObservable::Wick,
                QuenchObservable::Correlator(3),
                QuenchObservable::Fidelity,
                QuenchObservable::Energy,
                QuenchObservable::InteractionDistance,
            ]
        );
        assert!("bogus".parse::<QuenchObservable>().is_err());
        assert_eq!("Z3".parse::<InitialState>().unwrap(), InitialState::Z3);
        assert!("z4".parse::<InitialState>().is_err());
    }

    #[test]
    fn time_grid_shape() {
        let t = time_grid(40.0, 0.1).unwrap();
        assert_eq!(t.len(), 401);
        assert!((t[400] - 40.0).abs() < 1e-12);
        assert!(time_grid(0.0, 0.1).is_err());
        assert!(time_grid(1.0, -0.1).is_err());
    }

    #[test]
    fn quench_conserves_norm_and_energy() {
        let protocol = QuenchProtocol::new(12, ModelSpec::uv(-15.0, -5.0), ModelSpec::uv(-15.0, 8.0))
            .with_times(5.0, 0.1)
            .with_observables(vec![
                QuenchObservable::Entropy,
                QuenchObservable::Correlator(1),
                QuenchObservable::Energy,
            ]);
        let r = run_quench(&protocol).unwrap();
        assert_eq!(r.times.len(), 51);
        assert!(r.norm_drift < 1e-9, "{}", r.norm_drift);
        assert!(r.energy_drift < 1e-7, "{}", r.energy_drift);
        assert!((r.column("entropy").unwrap()[0] - 2f64.ln()).abs() < 1e-3);
    }
}
