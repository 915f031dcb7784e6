//! Parameter scans, quench suites and disorder ensembles.
//!
//! Every grid point or realization is an independent work item. Items run on
//! a bounded worker pool and results are collected by index, so outputs do
//! not depend on the worker count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_quench, InitialState, QuenchObservable, QuenchProtocol, QuenchResult};
use crate::error::{Error, Result};
use crate::gaussianity::{
    interaction_distance, reduced_density_matrix, wick_violation, DistanceOptions, WickTriple,
};
use crate::hamiltonians::{build_hamiltonian, draw_offsets, ModelSpec, Variant, DEFAULT_IMPURITY_SITE};
use crate::hilbert::{Boundary, Space};
use crate::operator::StateVector;
use crate::solver::ground_state;

/// Version tag written into every record.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `W` at or above this is Z3-like.
pub const W_Z3_MIN: f64 = 0.05;
/// `W` at or below this is Z2-like.
pub const W_Z2_MAX: f64 = 0.01;
/// `D_F` at or above this is Z3-like.
pub const DF_Z3_MIN: f64 = 0.15;
/// `D_F` at or below this is Z2-like.
pub const DF_Z2_MAX: f64 = 0.02;

/// Largest chain accepted by [`finite_size_quench`].
pub const FSS_MAX_SITES: usize = 24;
/// Half-width of the uniform position disorder.
pub const DISORDER_AMPLITUDE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Z3Like,
    Z2Like,
    Indeterminate,
}

impl Phase {
    pub fn from_wick(w: f64) -> Self {
        Self::banded(w, W_Z2_MAX, W_Z3_MIN)
    }

    pub fn from_distance(d_f: f64) -> Self {
        Self::banded(d_f, DF_Z2_MAX, DF_Z3_MIN)
    }

    fn banded(x: f64, low: f64, high: f64) -> Self {
        if x >= high {
            Phase::Z3Like
        } else if x <= low {
            Phase::Z2Like
        } else {
            Phase::Indeterminate
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Z3Like => "z3",
            Phase::Z2Like => "z2",
            Phase::Indeterminate => "indeterminate",
        })
    }
}

/// `steps` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<Self> {
        let axis = Self { min, max, steps };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::InvalidParameter(format!(
                "an axis needs at least 2 steps, got {}",
                self.steps
            )));
        }
        if !self.min.is_finite() || !self.max.is_finite() || self.max <= self.min {
            return Err(Error::InvalidParameter(format!(
                "axis range [{}, {}] must be finite and increasing",
                self.min, self.max
            )));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        (0..self.steps)
            .map(|k| self.min + span * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

/// Parses `min:max:steps`.
impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("expected min:max:steps, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let min = parts[0].parse().map_err(|_| bad())?;
        let max = parts[1].parse().map_err(|_| bad())?;
        let steps = parts[2].parse().map_err(|_| bad())?;
        Axis::new(min, max, steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    InteractionDistance,
    Wick,
    Entropy,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::InteractionDistance, Metric::Wick, Metric::Entropy];

    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d_f" | "df" => Ok(Metric::InteractionDistance),
            "w" | "wick" => Ok(Metric::Wick),
            "s" | "entropy" => Ok(Metric::Entropy),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// How a state is measured: cut position, Wick triple and optimizer settings.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MeasureOptions {
    /// Block size of the entanglement cut; `None` means `N / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<usize>,
    /// `None` selects the boundary default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple: Option<WickTriple>,
    #[serde(default)]
    pub distance: DistanceOptions,
}

/// Ground-state measurements at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub energy: f64,
    pub d_f: Option<f64>,
    pub w: Option<f64>,
    pub s: Option<f64>,
}

impl PointMetrics {
    pub fn phase_wick(&self) -> Option<Phase> {
        self.w.map(Phase::from_wick)
    }

    pub fn phase_distance(&self) -> Option<Phase> {
        self.d_f.map(Phase::from_distance)
    }
}

/// Measures `metrics` on a state of `space` (sector states are embedded first).
pub fn measure(psi: &StateVector, space: &Space, metrics: &[Metric], opts: &MeasureOptions) -> Result<(Option<f64>, Option<f64>, Option<f64>)> {
    let full = space.full();
    let psi = space.to_full(psi)?;
    let n = space.n();
    let needs_cut = metrics
        .iter()
        .any(|m| matches!(m, Metric::InteractionDistance | Metric::Entropy));
    let ent = if needs_cut {
        Some(reduced_density_matrix(&psi, &full, opts.block.unwrap_or(n / 2))?)
    } else {
        None
    };
    let mut out = (None, None, None);
    for m in metrics {
        match m {
            Metric::InteractionDistance => {
                let d = interaction_distance(&ent.as_ref().unwrap().probabilities, &opts.distance)?;
                out.0 = Some(d.value);
            }
            Metric::Wick => {
                let triple = match opts.triple {
                    Some(t) => WickTriple::new(t.0, n)?,
                    None => WickTriple::default_for(n, space.boundary())?,
                };
                out.1 = Some(wick_violation(&psi, &full, &triple)?);
            }
            Metric::Entropy => out.2 = Some(ent.as_ref().unwrap().entropy()),
        }
    }
    Ok(out)
}

/// Ground state of `spec` on `N` sites (k = 0 sector when translation
/// invariant) with the requested measurements.
pub fn ground_state_point(spec: &ModelSpec, n: usize, metrics: &[Metric], opts: &MeasureOptions) -> Result<PointMetrics> {
    let (energy, psi, space) = solve_ground(spec, n)?;
    let (d_f, w, s) = measure(&psi, &space, metrics, opts)?;
    Ok(PointMetrics { energy, d_f, w, s })
}

fn solve_ground(spec: &ModelSpec, n: usize) -> Result<(f64, StateVector, Space)> {
    let space = spec.natural_space(n)?;
    let h = build_hamiltonian(spec, &space)?;
    let (energy, psi) = ground_state(&h)?;
    Ok((energy, psi, space))
}

/// One work item's output: the input echo, its metrics or the error that
/// stopped it, and bookkeeping.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord<M> {
    pub index: usize,
    pub spec: ModelSpec,
    pub metrics: Option<M>,
    pub error: Option<String>,
    /// Seconds.
    pub wall_time: f64,
    pub version: String,
}

impl<M> ResultRecord<M> {
    fn run(index: usize, spec: ModelSpec, f: impl FnOnce(&ModelSpec) -> Result<M>) -> Self {
        let start = Instant::now();
        let out = f(&spec);
        let wall_time = start.elapsed().as_secs_f64();
        let (metrics, error) = match out {
            Ok(m) => (Some(m), None),
            Err(e) => {
                log::warn!("work item {index} failed: {e}");
                (None, Some(e.to_string()))
            }
        };
        Self {
            index,
            spec,
            metrics,
            error,
            wall_time,
            version: VERSION.to_string(),
        }
    }

    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }

    /// `ok` or `failed: <reason>`.
    pub fn status(&self) -> String {
        match &self.error {
            None => "ok".into(),
            Some(e) => format!("failed: {e}"),
        }
    }
}

/// Runs `f(0..count)` on at most `workers` threads and returns the results in
/// index order.
pub fn run_indexed<T, F>(workers: usize, count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if workers <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(e) => {
            log::warn!("falling back to one worker: {e}");
            (0..count).map(f).collect()
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

fn opt_phase(p: Option<Phase>) -> String {
    p.map(|p| p.to_string()).unwrap_or_default()
}

fn write_table<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A rectangular `U x V` scan of ground states.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanGrid {
    pub u: Axis,
    pub v: Axis,
    pub variant: Variant,
    pub omega: f64,
    pub metrics: Vec<Metric>,
    pub n: usize,
    pub boundary: Boundary,
    #[serde(default)]
    pub measure: MeasureOptions,
}

impl ScanGrid {
    /// The default main-text scan: `U in [-20, 5]`, `V in [-10, 15]`, 26 x 26.
    pub fn main_text(n: usize) -> Self {
        Self {
            u: Axis {
                min: -20.0,
                max: 5.0,
                steps: 26,
            },
            v: Axis {
                min: -10.0,
                max: 15.0,
                steps: 26,
            },
            variant: Variant::UvPxp,
            omega: 1.0,
            metrics: Metric::ALL.to_vec(),
            n,
            boundary: Boundary::Pbc,
            measure: MeasureOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.u.validate()?;
        self.v.validate()?;
        if self.variant == Variant::Longrange {
            return Err(Error::InvalidParameter(
                "use the long-range diagram for the long-range model".into(),
            ));
        }
        if self.metrics.is_empty() {
            return Err(Error::Empty("metric list"));
        }
        Ok(())
    }

    /// Model at every grid point, `U` outer and `V` inner.
    pub fn specs(&self) -> Vec<ModelSpec> {
        let vs = self.v.values();
        self.u
            .values()
            .into_iter()
            .flat_map(|u| {
                vs.iter().map(move |&v| ModelSpec {
                    variant: self.variant,
                    omega: self.omega,
                    u,
                    v,
                    boundary: self.boundary,
                    ..ModelSpec::default()
                })
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.u.steps * self.v.steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub grid: ScanGrid,
    pub records: Vec<ResultRecord<PointMetrics>>,
}

impl PhaseDiagram {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.succeeded()).count()
    }

    /// Columns `U,V,D_F,W,S,phase_w,phase_df,status`; failed points keep
    /// their row with empty values.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(
            out,
            &["U", "V", "D_F", "W", "S", "phase_w", "phase_df", "status"],
            self.records.iter().map(|r| {
                let m = r.metrics.as_ref();
                vec![
                    format!("{}", r.spec.u),
                    format!("{}", r.spec.v),
                    opt(m.and_then(|m| m.d_f)),
                    opt(m.and_then(|m| m.w)),
                    opt(m.and_then(|m| m.s)),
                    opt_phase(m.and_then(|m| m.phase_wick())),
                    opt_phase(m.and_then(|m| m.phase_distance())),
                    r.status(),
                ]
            }),
        )
    }

    /// `(V, D_F)` along the row with the given `U`, skipping failed points.
    pub fn cut_at_u(&self, u: f64) -> Vec<(f64, f64)> {
        self.records
            .iter()
            .filter(|r| (r.spec.u - u).abs() < 1e-9)
            .filter_map(|r| r.metrics.as_ref()?.d_f.map(|d| (r.spec.v, d)))
            .collect()
    }

    /// V at which D_F crosses halfway between its extremes along fixed `U`.
    pub fn transition_at_u(&self, u: f64) -> Option<f64> {
        let cut = self.cut_at_u(u);
        let (xs, ys): (Vec<f64>, Vec<f64>) = cut.into_iter().unzip();
        midpoint_crossing(&xs, &ys)
    }
}

/// Scans the ground-state phase diagram. Failed points are recorded and the
/// scan continues.
pub fn phase_diagram(grid: &ScanGrid, workers: usize) -> Result<PhaseDiagram> {
    grid.validate()?;
    let specs = grid.specs();
    let records = run_indexed(workers, specs.len(), |i| {
        ResultRecord::run(i, specs[i].clone(), |s| {
            ground_state_point(s, grid.n, &grid.metrics, &grid.measure)
        })
    });
    Ok(PhaseDiagram {
        grid: grid.clone(),
        records,
    })
}

/// First `x` (linearly interpolated) where `y` crosses `(max y + min y) / 2`,
/// scanning in order of increasing `x`.
pub fn midpoint_crossing(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let mut pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let max = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if max - min <= 0.0 {
        return None;
    }
    let mid = 0.5 * (max + min);
    pts.windows(2).find_map(|w| {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if (y0 - mid) * (y1 - mid) <= 0.0 && y0 != y1 {
            Some(x0 + (mid - y0) * (x1 - x0) / (y1 - y0))
        } else {
            None
        }
    })
}

/// `max_t |x(t) - x(0)|`.
pub fn retention(series: &[f64]) -> f64 {
    let Some(&x0) = series.first() else {
        return 0.0;
    };
    series.iter().map(|x| (x - x0).abs()).fold(0.0, f64::max)
}

/// Mean of `values` over samples with `from <= t <= to`.
pub fn time_average(times: &[f64], values: &[f64], from: f64, to: f64) -> Option<f64> {
    let picked: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= from - 1e-9 && **t <= to + 1e-9)
        .map(|(_, v)| *v)
        .collect();
    if picked.is_empty() {
        None
    } else {
        Some(picked.iter().sum::<f64>() / picked.len() as f64)
    }
}

/// Ground-state and quench response to a single-site potential.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImpuritySweep {
    /// `(U, V)` of the ground state.
    pub point: (f64, f64),
    /// `(U, V)` after the quench.
    pub quench_to: (f64, f64),
    pub site: usize,
    pub strengths: Vec<f64>,
    pub sizes: Vec<usize>,
    pub boundary: Boundary,
    pub t_max: f64,
    pub dt: f64,
    #[serde(default)]
    pub measure: MeasureOptions,
}

impl Default for ImpuritySweep {
    fn default() -> Self {
        Self {
            point: (-4.0, 10.5),
            quench_to: (-4.0, -6.0),
            site: DEFAULT_IMPURITY_SITE,
            strengths: vec![0.0, 1e-4, 1e-3, 1e-2, 1e-1],
            sizes: vec![12],
            boundary: Boundary::Pbc,
            t_max: 40.0,
            dt: 0.1,
            measure: MeasureOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpurityRow {
    pub n: usize,
    pub epsilon: f64,
    pub ground: PointMetrics,
    /// `max_t |D_F(t) - D_F(0)|` after the quench.
    pub retention: f64,
    pub d_f_final: f64,
    pub norm_drift: f64,
    pub energy_drift: f64,
}

impl ImpuritySweep {
    fn model(&self, u: f64, v: f64, epsilon: f64) -> ModelSpec {
        ModelSpec::uv(u, v)
            .with_boundary(self.boundary)
            .with_impurity(self.site, epsilon)
    }

    /// `(n, epsilon)` pairs, sizes outer.
    pub fn cases(&self) -> Vec<(usize, f64)> {
        self.sizes
            .iter()
            .flat_map(|&n| self.strengths.iter().map(move |&e| (n, e)))
            .collect()
    }
}

pub fn impurity_sweep(sweep: &ImpuritySweep, workers: usize) -> Result<Vec<ResultRecord<ImpurityRow>>> {
    if sweep.strengths.is_empty() || sweep.sizes.is_empty() {
        return Err(Error::Empty("impurity strengths or sizes"));
    }
    for &n in &sweep.sizes {
        if sweep.site == 0 || sweep.site > n {
            return Err(Error::SiteOutOfRange { site: sweep.site, n });
        }
    }
    let cases = sweep.cases();
    Ok(run_indexed(workers, cases.len(), |i| {
        let (n, eps) = cases[i];
        let (u, v) = sweep.point;
        ResultRecord::run(i, sweep.model(u, v, eps), |spec| {
            let ground = ground_state_point(spec, n, &Metric::ALL, &sweep.measure)?;
            let (uf, vf) = sweep.quench_to;
            let mut protocol = QuenchProtocol::new(n, spec.clone(), sweep.model(uf, vf, eps))
                .with_times(sweep.t_max, sweep.dt)
                .with_observables(vec![QuenchObservable::InteractionDistance]);
            protocol.block = sweep.measure.block;
            protocol.distance = sweep.measure.distance.clone();
            let result = run_quench(&protocol)?;
            let series = result.series(&QuenchObservable::InteractionDistance).unwrap();
            Ok(ImpurityRow {
                n,
                epsilon: eps,
                ground,
                retention: retention(series),
                d_f_final: *series.last().unwrap(),
                norm_drift: result.norm_drift,
                energy_drift: result.energy_drift,
            })
        })
    }))
}

pub fn write_impurity_csv<W: Write>(out: W, rows: &[ResultRecord<ImpurityRow>]) -> Result<()> {
    write_table(
        out,
        &["N", "epsilon", "D_F", "W", "S", "phase_w", "retention", "status"],
        rows.iter().map(|r| match &r.metrics {
            Some(m) => vec![
                m.n.to_string(),
                format!("{}", m.epsilon),
                opt(m.ground.d_f),
                opt(m.ground.w),
                opt(m.ground.s),
                opt_phase(m.ground.phase_wick()),
                format!("{}", m.retention),
                r.status(),
            ],
            None => {
                let eps = r.spec.impurities.first().map_or(0.0, |i| i.strength);
                vec![
                    String::new(),
                    format!("{eps}"),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    r.status(),
                ]
            }
        }),
    )
}

/// A quench that changes `U` as well as `V`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DuQuench {
    pub result: QuenchResult,
    /// `max_t |D_F(t) - D_F(0)|`
    pub retention: f64,
}

/// Ground state of `(U, V)` quenched to `(U', V')`, recording D_F and S.
pub fn du_quench(n: usize, initial: (f64, f64), target: (f64, f64), t_max: f64, dt: f64, distance: DistanceOptions) -> Result<DuQuench> {
    let mut protocol = QuenchProtocol::new(n, ModelSpec::uv(initial.0, initial.1), ModelSpec::uv(target.0, target.1))
        .with_times(t_max, dt)
        .with_observables(vec![QuenchObservable::InteractionDistance, QuenchObservable::Entropy]);
    protocol.distance = distance;
    let result = run_quench(&protocol)?;
    let retention = retention(result.series(&QuenchObservable::InteractionDistance).unwrap());
    Ok(DuQuench { result, retention })
}

/// Disorder realizations of a base protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub realizations: usize,
    pub master_seed: u64,
    /// Offsets are uniform in `[-amplitude, amplitude]`.
    pub amplitude: f64,
}

impl EnsembleSpec {
    pub fn new(realizations: usize, master_seed: u64) -> Self {
        Self {
            realizations,
            master_seed,
            amplitude: DISORDER_AMPLITUDE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidParameter("an ensemble needs at least one realization".into()));
        }
        if !(self.amplitude >= 0.0) || !self.amplitude.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "disorder amplitude must be finite and non-negative, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    pub fn seed(&self, index: usize) -> u64 {
        realization_seed(self.master_seed, index)
    }
}

/// Seed of realization `index`: the first output of stream `index` of a
/// generator keyed by the master seed.
pub fn realization_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// Mean and standard error over realizations, per observable and time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub protocol: QuenchProtocol,
    pub ensemble: EnsembleSpec,
    pub seeds: Vec<u64>,
    pub times: Vec<f64>,
    /// `(label, mean, standard error)` per observable.
    pub columns: Vec<(String, Vec<f64>, Vec<f64>)>,
    pub norm_drift: f64,
    pub energy_drift: f64,
}

impl EnsembleResult {
    pub fn mean(&self, label: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.0 == label)
            .map(|c| c.1.as_slice())
    }

    pub fn stderr(&self, label: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.0 == label)
            .map(|c| c.2.as_slice())
    }

    /// Columns `t,<label>_mean,<label>_stderr,...`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut header = vec!["t".to_string()];
        for (label, _, _) in &self.columns {
            header.push(format!("{label}_mean"));
            header.push(format!("{label}_stderr"));
        }
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        write_table(
            out,
            &header,
            self.times.iter().enumerate().map(|(k, t)| {
                let mut row = vec![format!("{t}")];
                for (_, m, e) in &self.columns {
                    row.push(format!("{}", m[k]));
                    row.push(format!("{}", e[k]));
                }
                row
            }),
        )
    }
}

/// Runs `base` once per realization with fresh position offsets applied to
/// both the initial and the final model, then averages every observable.
pub fn run_ensemble(base: &QuenchProtocol, ensemble: &EnsembleSpec, workers: usize) -> Result<EnsembleResult> {
    ensemble.validate()?;
    base.validate()?;
    let seeds: Vec<u64> = (0..ensemble.realizations).map(|i| ensemble.seed(i)).collect();
    let runs = run_indexed(workers, seeds.len(), |i| {
        let offsets = draw_offsets(base.n, ensemble.amplitude, seeds[i]);
        let mut p = base.clone();
        p.initial_model = p.initial_model.with_offsets(offsets.clone());
        p.initial_model.seed = Some(seeds[i]);
        p.final_model = p.final_model.with_offsets(offsets);
        p.final_model.seed = Some(seeds[i]);
        run_quench(&p)
    });
    let runs: Vec<QuenchResult> = runs.into_iter().collect::<Result<_>>()?;
    let first = &runs[0];
    let r = runs.len() as f64;
    let columns = first
        .columns
        .iter()
        .enumerate()
        .map(|(c, (label, _))| {
            let len = first.times.len();
            let mut mean = vec![0.0; len];
            let mut err = vec![0.0; len];
            for k in 0..len {
                let xs: Vec<f64> = runs.iter().map(|run| run.columns[c].1[k]).collect();
                let m = xs.iter().sum::<f64>() / r;
                mean[k] = m;
                if runs.len() > 1 {
                    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r - 1.0);
                    err[k] = (var / r).sqrt();
                }
            }
            (label.clone(), mean, err)
        })
        .collect();
    Ok(EnsembleResult {
        protocol: base.clone(),
        ensemble: *ensemble,
        seeds,
        times: first.times.clone(),
        columns,
        norm_drift: runs.iter().map(|r| r.norm_drift).fold(0.0, f64::max),
        energy_drift: runs.iter().map(|r| r.energy_drift).fold(0.0, f64::max),
    })
}

/// Ground-state scan of the long-range model over `(Omega, U)` at `V = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LongRangeGrid {
    pub omega: Axis,
    pub u: Axis,
    pub n: usize,
    pub boundary: Boundary,
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub measure: MeasureOptions,
}

impl LongRangeGrid {
    pub fn specs(&self) -> Vec<ModelSpec> {
        let us = self.u.values();
        self.omega
            .values()
            .into_iter()
            .flat_map(|om| {
                us.iter()
                    .map(move |&u| ModelSpec::longrange(om, u).with_boundary(self.boundary))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LongRangeDiagram {
    pub grid: LongRangeGrid,
    pub records: Vec<ResultRecord<PointMetrics>>,
}

impl LongRangeDiagram {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| !r.succeeded()).count()
    }

    /// Columns `omega,U,D_F,W,S,phase_w,phase_df,status`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(
            out,
            &["omega", "U", "D_F", "W", "S", "phase_w", "phase_df", "status"],
            self.records.iter().map(|r| {
                let m = r.metrics.as_ref();
                vec![
                    format!("{}", r.spec.omega),
                    format!("{}", r.spec.u),
                    opt(m.and_then(|m| m.d_f)),
                    opt(m.and_then(|m| m.w)),
                    opt(m.and_then(|m| m.s)),
                    opt_phase(m.and_then(|m| m.phase_wick())),
                    opt_phase(m.and_then(|m| m.phase_distance())),
                    r.status(),
                ]
            }),
        )
    }
}

pub fn longrange_diagram(grid: &LongRangeGrid, workers: usize) -> Result<LongRangeDiagram> {
    grid.omega.validate()?;
    grid.u.validate()?;
    let specs = grid.specs();
    let records = run_indexed(workers, specs.len(), |i| {
        ResultRecord::run(i, specs[i].clone(), |s| {
            ground_state_point(s, grid.n, &grid.metrics, &grid.measure)
        })
    });
    Ok(LongRangeDiagram {
        grid: grid.clone(),
        records,
    })
}

/// Quenches between a Z3-phase and a Z2-phase point of the long-range model,
/// clean and disordered.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LongRangeSuite {
    pub n: usize,
    pub boundary: Boundary,
    pub omega: f64,
    /// `U` of the Z3-phase point.
    pub z3_u: f64,
    /// `U` of the Z2-phase point.
    pub z2_u: f64,
    /// Defaults to `40 / Omega`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Defaults to `1 / Omega`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub ensemble: EnsembleSpec,
    /// Realizations for the ideal-Z3 ensemble; `None` uses the main count.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ideal_realizations: Option<usize>,
    #[serde(default)]
    pub distance: DistanceOptions,
}

impl Default for LongRangeSuite {
    fn default() -> Self {
        Self {
            n: 12,
            boundary: Boundary::Pbc,
            omega: 0.007,
            z3_u: 0.021,
            z2_u: 0.08,
            t_max: None,
            dt: None,
            ensemble: EnsembleSpec::new(100, 0),
            ideal_realizations: None,
            distance: DistanceOptions {
                starts: 8,
                ..DistanceOptions::default()
            },
        }
    }
}

impl LongRangeSuite {
    pub fn z3_model(&self) -> ModelSpec {
        ModelSpec::longrange(self.omega, self.z3_u).with_boundary(self.boundary)
    }

    pub fn z2_model(&self) -> ModelSpec {
        ModelSpec::longrange(self.omega, self.z2_u).with_boundary(self.boundary)
    }

    pub fn times(&self) -> (f64, f64) {
        (
            self.t_max.unwrap_or(40.0 / self.omega),
            self.dt.unwrap_or(1.0 / self.omega),
        )
    }

    /// Quench protocol between the two points, recording D_F and S.
    pub fn protocol(&self, from_z3: bool, initial: InitialState) -> QuenchProtocol {
        let (a, b) = if from_z3 {
            (self.z3_model(), self.z2_model())
        } else {
            (self.z2_model(), self.z3_model())
        };
        let (t_max, dt) = self.times();
        let mut p = QuenchProtocol::new(self.n, a, b)
            .with_initial(initial)
            .with_times(t_max, dt)
            .with_observables(vec![QuenchObservable::InteractionDistance, QuenchObservable::Entropy]);
        p.distance = self.distance.clone();
        p
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LongRangeReport {
    pub suite: LongRangeSuite,
    /// Clean Z3-phase ground state quenched into the Z2 phase.
    pub forward: QuenchResult,
    /// Clean Z2-phase ground state quenched into the Z3 phase.
    pub reverse: QuenchResult,
    /// Ideal Z3 state under the clean Z2-phase Hamiltonian.
    pub forward_ideal: QuenchResult,
    /// Disordered ground states under the matching disordered Hamiltonians.
    pub disordered: EnsembleResult,
    /// Ideal Z3 state under disordered Z2-phase Hamiltonians.
    pub disordered_ideal: EnsembleResult,
}

pub fn longrange_suite(suite: &LongRangeSuite, workers: usize) -> Result<LongRangeReport> {
    let forward = run_quench(&suite.protocol(true, InitialState::Ground))?;
    let reverse = run_quench(&suite.protocol(false, InitialState::Ground))?;
    let forward_ideal = run_quench(&suite.protocol(true, InitialState::Z3))?;
    let disordered = run_ensemble(&suite.protocol(true, InitialState::Ground), &suite.ensemble, workers)?;
    let ideal = EnsembleSpec {
        realizations: suite.ideal_realizations.unwrap_or(suite.ensemble.realizations),
        ..suite.ensemble
    };
    let disordered_ideal = run_ensemble(&suite.protocol(true, InitialState::Z3), &ideal, workers)?;
    Ok(LongRangeReport {
        suite: suite.clone(),
        forward,
        reverse,
        forward_ideal,
        disordered,
        disordered_ideal,
    })
}

/// Rejects chain lengths that cannot host the open-chain Z3 pattern with a
/// central site.
pub fn check_obc_size(n: usize) -> Result<()> {
    if n % 2 == 0 || n % 3 != 0 {
        return Err(Error::InvalidParameter(format!(
            "open-chain diagrams need an odd N divisible by three (e.g. 15), got {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObcPoint {
    /// Measurements with the bulk Wick triple.
    pub bulk: PointMetrics,
    /// `W` on the edge triple.
    pub w_edge: f64,
}

/// Open-chain diagram: `grid.boundary` is forced to OBC, `W` is reported on
/// the bulk triple (the grid's triple or the central default) and on `edge`.
pub fn obc_diagram(grid: &ScanGrid, edge: WickTriple, workers: usize) -> Result<Vec<ResultRecord<ObcPoint>>> {
    check_obc_size(grid.n)?;
    let mut grid = grid.clone();
    grid.boundary = Boundary::Obc;
    grid.validate()?;
    let edge = WickTriple::new(edge.0, grid.n)?;
    let specs = grid.specs();
    Ok(run_indexed(workers, specs.len(), |i| {
        ResultRecord::run(i, specs[i].clone(), |s| {
            let (energy, psi, space) = solve_ground(s, grid.n)?;
            let mut metrics = grid.metrics.clone();
            if !metrics.contains(&Metric::Wick) {
                metrics.push(Metric::Wick);
            }
            let (d_f, w, s_val) = measure(&psi, &space, &metrics, &grid.measure)?;
            let edge_opts = MeasureOptions {
                triple: Some(edge),
                ..grid.measure.clone()
            };
            let (_, w_edge, _) = measure(&psi, &space, &[Metric::Wick], &edge_opts)?;
            Ok(ObcPoint {
                bulk: PointMetrics {
                    energy,
                    d_f,
                    w,
                    s: s_val,
                },
                w_edge: w_edge.unwrap(),
            })
        })
    }))
}

pub fn write_obc_csv<W: Write>(out: W, rows: &[ResultRecord<ObcPoint>]) -> Result<()> {
    write_table(
        out,
        &["U", "V", "D_F", "W", "W_edge", "S", "phase_w", "phase_df", "status"],
        rows.iter().map(|r| {
            let m = r.metrics.as_ref();
            vec![
                format!("{}", r.spec.u),
                format!("{}", r.spec.v),
                opt(m.and_then(|m| m.bulk.d_f)),
                opt(m.and_then(|m| m.bulk.w)),
                opt(m.map(|m| m.w_edge)),
                opt(m.and_then(|m| m.bulk.s)),
                opt_phase(m.and_then(|m| m.bulk.phase_wick())),
                opt_phase(m.and_then(|m| m.bulk.phase_distance())),
                r.status(),
            ]
        }),
    )
}

/// Z3-phase ground state quenched into the Z2 phase at several sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FssSpec {
    pub sizes: Vec<usize>,
    pub u: f64,
    pub v_initial: f64,
    pub v_final: f64,
    pub t_max: f64,
    pub dt: f64,
    /// Minimum and oscillation amplitude are taken over `0 < t <= window`.
    pub window: f64,
    #[serde(default)]
    pub distance: DistanceOptions,
}

impl Default for FssSpec {
    fn default() -> Self {
        Self {
            sizes: vec![18, 24],
            u: -15.0,
            v_initial: 8.0,
            v_final: -5.0,
            t_max: 40.0,
            dt: 0.1,
            window: 15.0,
            distance: DistanceOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FssRow {
    pub n: usize,
    pub result: QuenchResult,
    pub min_d_f: f64,
    /// `max - min` of D_F over the window.
    pub amplitude: f64,
}

impl FssSpec {
    pub fn protocol(&self, n: usize) -> QuenchProtocol {
        let mut p = QuenchProtocol::new(n, ModelSpec::uv(self.u, self.v_initial), ModelSpec::uv(self.u, self.v_final))
            .with_times(self.t_max, self.dt)
            .with_observables(vec![QuenchObservable::InteractionDistance, QuenchObservable::Entropy]);
        p.distance = self.distance.clone();
        p
    }
}

pub fn finite_size_quench(spec: &FssSpec, workers: usize) -> Result<Vec<FssRow>> {
    if spec.sizes.is_empty() {
        return Err(Error::Empty("size list"));
    }
    if let Some(&n) = spec.sizes.iter().find(|&&n| n > FSS_MAX_SITES || n < 3) {
        return Err(Error::SizeLimit {
            n,
            min: 3,
            max: FSS_MAX_SITES,
        });
    }
    let runs = run_indexed(workers, spec.sizes.len(), |i| run_quench(&spec.protocol(spec.sizes[i])));
    spec.sizes
        .iter()
        .zip(runs)
        .map(|(&n, run)| {
            let result = run?;
            let d = result.series(&QuenchObservable::InteractionDistance).unwrap();
            let windowed: Vec<f64> = result
                .times
                .iter()
                .zip(d)
                .filter(|(t, _)| **t > 0.0 && **t <= spec.window + 1e-9)
                .map(|(_, x)| *x)
                .collect();
            let min = windowed.iter().copied().fold(f64::INFINITY, f64::min);
            let max = windowed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(FssRow {
                n,
                min_d_f: min,
                amplitude: max - min,
                result,
            })
        })
        .collect()
}

pub fn write_fss_csv<W: Write>(out: W, rows: &[FssRow]) -> Result<()> {
    write_table(
        out,
        &["N", "dim", "min_D_F", "amplitude"],
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.result.dim.to_string(),
                format!("{}", r.min_d_f),
                format!("{}", r.amplitude),
            ]
        }),
    )
}
