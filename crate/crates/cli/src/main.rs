mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use rydberg::dynamics::{run_quench_from, InitialState, QuenchObservable, QuenchProtocol};
use rydberg::experiments::{
    finite_size_quench, impurity_sweep, longrange_diagram, longrange_suite, obc_diagram, phase_diagram,
    write_fss_csv, write_impurity_csv, write_obc_csv, Axis, EnsembleSpec, FssSpec, ImpuritySweep,
    LongRangeGrid, LongRangeSuite, MeasureOptions, Metric, ScanGrid,
};
use rydberg::gaussianity::{
    conjectured_max, interaction_distance, reduced_density_matrix, wick_violation, DistanceOptions, WickTriple,
};
use rydberg::hamiltonians::{build_hamiltonian, product_state, z2_state, z3_state};
use rydberg::hilbert::{format_config, parse_config, ConstrainedBasis, MomentumSector};
use rydberg::solver::{full_spectrum, ground_state, overlap_profile};
use rydberg::spectral::{peak_match, power_spectrum, TimeSeries};
use rydberg::{Boundary, ModelSpec, Space, StateVector};

use output::{Format, Output};

/// Exact simulation of kinetically constrained Rydberg chains.
#[derive(Parser, Debug)]
#[command(name = "rydberg", version)]
struct Cli {
    /// Directory for result files and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Master seed for optimizer starts and disorder draws.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for independent grid points and realizations.
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constrained basis dimension and states.
    Basis(BasisArgs),
    /// Full spectrum with overlaps on an initial state.
    Spectrum(SpectrumArgs),
    /// Time evolution after a sudden parameter change.
    Quench(QuenchArgs),
    /// Entropy, Wick violation and interaction distance of one state.
    Gaussianity(GaussianityArgs),
    /// Periodogram of one column of a quench CSV.
    Powerspec(PowerspecArgs),
    /// Ground-state scan over U and V.
    PhaseDiagram(PhaseArgs),
    /// Single-site impurity sweep.
    Impurity(ImpurityArgs),
    /// Long-range model diagram, quenches and disorder ensembles.
    Longrange(LongrangeArgs),
    /// Open-chain scan with bulk and edge Wick triples.
    Obc(ObcArgs),
    /// Z3-to-Z2 quench at several chain lengths.
    Fss(FssArgs),
}

/// Model parameters: a JSON file, inline values, or both (inline wins).
#[derive(Args, Debug, Clone, Default, Serialize)]
struct ModelArgs {
    /// JSON model file with keys variant, omega, u, v, boundary, impurities, offsets, seed.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    u: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    v: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    boundary: Option<Boundary>,
}

impl ModelArgs {
    fn resolve(&self, default: ModelSpec) -> Result<ModelSpec> {
        let mut spec = match &self.model {
            Some(path) => load_model(path)?,
            None => default,
        };
        if let Some(u) = self.u {
            spec.u = u;
        }
        if let Some(v) = self.v {
            spec.v = v;
        }
        if let Some(omega) = self.omega {
            spec.omega = omega;
        }
        if let Some(b) = self.boundary {
            spec.boundary = b;
        }
        Ok(spec)
    }
}

fn load_model(path: &Path) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ModelSpec::from_json(&text).with_context(|| format!("parsing model file {}", path.display()))
}

/// Chain length from the flag, else the model file, else the default.
fn chain_length(flag: Option<usize>, spec: &ModelSpec, default: usize) -> usize {
    flag.or(spec.n).unwrap_or(default)
}

/// Optimizer settings shared by commands that compute D_F.
#[derive(Args, Debug, Clone, Serialize)]
struct DistanceArgs {
    /// Free-fermion modes (default: ceil(log2 levels) + 1, at most 10).
    #[arg(long)]
    modes: Option<usize>,
    /// Simplex starting points.
    #[arg(long, default_value_t = 32)]
    starts: usize,
}

impl DistanceArgs {
    fn options(&self, seed: Option<u64>) -> DistanceOptions {
        let mut opts = DistanceOptions {
            modes: self.modes,
            starts: self.starts,
            ..DistanceOptions::default()
        };
        if let Some(s) = seed {
            opts.seed = s;
        }
        opts
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
enum Sector {
    K0,
}

#[derive(Args, Debug, Serialize)]
struct BasisArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "pbc")]
    boundary: Boundary,
    /// Reduce to a momentum sector (PBC only).
    #[arg(long, value_enum)]
    sector: Option<Sector>,
    /// Print every state (site 1 first).
    #[arg(long)]
    list: bool,
}

#[derive(Args, Debug, Serialize)]
struct SpectrumArgs {
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
    /// z2, z3, a bitstring (site 1 first) or a JSON file of amplitudes.
    #[arg(long, default_value = "z3")]
    initial: String,
}

#[derive(Args, Debug, Serialize)]
struct QuenchArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Initial model; inline --u/--v/--omega override it.
    #[command(flatten)]
    model: ModelArgs,
    /// Initial model file (same as --model).
    #[arg(long)]
    model_i: Option<PathBuf>,
    /// Final model file; defaults to the initial model with --u-f/--v-f applied.
    #[arg(long)]
    model_f: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    u_f: Option<f64>,
    /// Final V (default -5 unless --model-f is given).
    #[arg(long, allow_negative_numbers = true)]
    v_f: Option<f64>,
    /// ground, z2, z3 or a bitstring.
    #[arg(long, default_value = "ground")]
    initial: InitialState,
    #[arg(long, default_value_t = 40.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Comma list of entropy, df, wick, zz:<i>, fidelity, energy.
    #[arg(long, default_value = "entropy,df,energy")]
    observables: String,
    /// Wick triple i,j,k (default: 1,2,3 on rings, central sites on open chains).
    #[arg(long)]
    triple: Option<WickTriple>,
    /// Sites in the entanglement block (default N/2).
    #[arg(long)]
    block: Option<usize>,
    /// Evolve in the full basis even when the k = 0 sector would do.
    #[arg(long)]
    full_basis: bool,
    #[command(flatten)]
    distance: DistanceArgs,
}

#[derive(Args, Debug, Serialize)]
struct GaussianityArgs {
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
    /// ground (of the model), z2, z3 or a bitstring.
    #[arg(long, default_value = "ground")]
    state: String,
    #[arg(long)]
    triple: Option<WickTriple>,
    #[arg(long)]
    block: Option<usize>,
    #[command(flatten)]
    distance: DistanceArgs,
}

#[derive(Args, Debug, Serialize)]
struct PowerspecArgs {
    /// Quench CSV with a `t` column.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "zz_1")]
    column: String,
    /// Comma list of gap frequencies to match against peaks.
    #[arg(long)]
    gaps: Option<String>,
    /// Compute gaps from the exact decomposition of --initial under this chain length and model.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "z3")]
    initial: String,
    /// Number of gaps taken from the exact decomposition.
    #[arg(long, default_value_t = 3)]
    top: usize,
}

#[derive(Args, Debug, Serialize)]
struct PhaseArgs {
    #[arg(long, default_value_t = 18)]
    n: usize,
    /// Variant, omega and boundary are taken from here.
    #[command(flatten)]
    model: ModelArgs,
    /// min:max:steps
    #[arg(long, default_value = "-20:5:26", allow_hyphen_values = true)]
    u_range: Axis,
    #[arg(long, default_value = "-10:15:26", allow_hyphen_values = true)]
    v_range: Axis,
    #[arg(long, default_value = "df,w,s")]
    metrics: String,
    #[arg(long)]
    triple: Option<WickTriple>,
    #[command(flatten)]
    distance: DistanceArgs,
}

#[derive(Args, Debug, Serialize)]
struct ImpurityArgs {
    /// Comma list of chain lengths.
    #[arg(long, default_value = "12")]
    sizes: String,
    /// Ground-state point; defaults U = -4, V = 10.5.
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    u_f: f64,
    #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
    v_f: f64,
    /// Comma list of impurity strengths.
    #[arg(long, default_value = "0,1e-4,1e-3,1e-2,1e-1")]
    eps: String,
    #[arg(long, default_value_t = 4)]
    site: usize,
    #[arg(long, default_value_t = 40.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    #[command(flatten)]
    distance: DistanceArgs,
}

#[derive(Args, Debug, Serialize)]
struct LongrangeArgs {
    #[arg(long, default_value_t = 12)]
    n: usize,
    /// Omega and boundary are taken from here (defaults 0.007, ring).
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0.021)]
    z3_u: f64,
    #[arg(long, default_value_t = 0.08)]
    z2_u: f64,
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    /// Realizations of the ideal-Z3 ensemble (default: same as --realizations).
    #[arg(long)]
    ideal_realizations: Option<usize>,
    #[arg(long, default_value_t = 0.02)]
    amplitude: f64,
    /// Default 40 / omega.
    #[arg(long)]
    tmax: Option<f64>,
    /// Default 1 / omega.
    #[arg(long)]
    dt: Option<f64>,
    /// Omega axis min:max:steps of the ground-state diagram.
    #[arg(long)]
    diagram_omega: Option<Axis>,
    /// U axis min:max:steps of the ground-state diagram.
    #[arg(long)]
    diagram_u: Option<Axis>,
    /// Only compute the diagram.
    #[arg(long)]
    no_quench: bool,
    #[arg(long, default_value_t = 8)]
    starts: usize,
}

#[derive(Args, Debug, Serialize)]
struct ObcArgs {
    #[arg(long, default_value_t = 15)]
    n: usize,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value = "-20:5:26", allow_hyphen_values = true)]
    u_range: Axis,
    #[arg(long, default_value = "-10:15:26", allow_hyphen_values = true)]
    v_range: Axis,
    #[arg(long, default_value = "df,w,s")]
    metrics: String,
    /// Bulk Wick triple (default: the three central sites).
    #[arg(long)]
    triple: Option<WickTriple>,
    #[arg(long, default_value = "1,2,3")]
    edge: WickTriple,
    #[command(flatten)]
    distance: DistanceArgs,
}

#[derive(Args, Debug, Serialize)]
struct FssArgs {
    #[arg(long, default_value = "18,24")]
    sizes: String,
    /// U and initial V (defaults -15 and 8).
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    v_f: f64,
    #[arg(long, default_value_t = 40.0)]
    tmax: f64,
    #[arg(long, default_value_t = 0.1)]
    dt: f64,
    /// Minimum D_F and oscillation amplitude are taken over 0 < t <= window.
    #[arg(long, default_value_t = 15.0)]
    window: f64,
    #[command(flatten)]
    distance: DistanceArgs,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| anyhow::anyhow!("bad {what} {t:?}")))
        .collect()
}

/// Parses an initial-state name on `space`. Product states and amplitude
/// files need the full basis; `space` is widened accordingly.
fn initial_state(name: &str, space: &Space) -> Result<(StateVector, Space)> {
    let n = space.n();
    match name.to_ascii_lowercase().as_str() {
        "z2" => return Ok((z2_state(space)?, space.clone())),
        "z3" => return Ok((z3_state(space)?, space.clone())),
        _ => {}
    }
    let full = space.full();
    if name.len() == n && name.chars().all(|c| c == '0' || c == '1') {
        return Ok((product_state(&full, parse_config(name)?)?, full));
    }
    let text = std::fs::read_to_string(name).with_context(|| format!("{name:?} is not z2, z3, a bitstring or a readable file"))?;
    let raw: Vec<serde_json::Value> = serde_json::from_str(&text).context("amplitude file must be a JSON array")?;
    let amps: Vec<Complex64> = raw
        .iter()
        .map(|v| match v {
            serde_json::Value::Number(x) => x.as_f64().map(|re| Complex64::new(re, 0.0)),
            serde_json::Value::Array(p) if p.len() == 2 => Some(Complex64::new(p[0].as_f64()?, p[1].as_f64()?)),
            _ => None,
        })
        .collect::<Option<_>>()
        .context("amplitudes must be numbers or [re, im] pairs")?;
    if amps.len() != full.dim() {
        bail!("amplitude file has {} entries, the basis has {}", amps.len(), full.dim());
    }
    let psi = StateVector::new(full.tag(), amps);
    if psi.norm() == 0.0 {
        bail!("amplitude file describes the zero vector");
    }
    Ok((psi.normalized(), full))
}

fn run(cli: Cli) -> Result<usize> {
    let seed = cli.seed;
    let workers = cli.workers.max(1);
    if let Command::Basis(args) = &cli.command {
        return basis(args).map(|_| 0);
    }
    let mut out = Output::new(&cli.out, cli.format)?;
    let (name, spec, failures) = match &cli.command {
        Command::Basis(_) => unreachable!(),
        Command::Spectrum(a) => ("spectrum", spectrum(a, &mut out)?, 0),
        Command::Quench(a) => ("quench", quench(a, seed, &mut out)?, 0),
        Command::Gaussianity(a) => ("gaussianity", gaussianity(a, seed, &mut out)?, 0),
        Command::Powerspec(a) => ("powerspec", powerspec(a, &mut out)?, 0),
        Command::PhaseDiagram(a) => {
            let (s, f) = phase(a, seed, workers, &mut out)?;
            ("phase-diagram", s, f)
        }
        Command::Impurity(a) => {
            let (s, f) = impurity(a, seed, workers, &mut out)?;
            ("impurity", s, f)
        }
        Command::Longrange(a) => {
            let (s, f) = longrange(a, seed, workers, &mut out)?;
            ("longrange", s, f)
        }
        Command::Obc(a) => {
            let (s, f) = obc(a, seed, workers, &mut out)?;
            ("obc", s, f)
        }
        Command::Fss(a) => ("fss", fss(a, seed, workers, &mut out)?, 0),
    };
    out.finish(name, spec, seed, workers, failures)?;
    if failures > 0 {
        eprintln!("{failures} work item(s) failed; see the status column");
    }
    Ok(failures)
}

fn basis(args: &BasisArgs) -> Result<()> {
    let basis = ConstrainedBasis::enumerate(args.n, args.boundary)?;
    match args.sector {
        None => {
            println!("dimension {}", basis.len());
            if args.list {
                for &c in basis.states() {
                    println!("{}", format_config(c, args.n));
                }
            }
        }
        Some(Sector::K0) => {
            let sector = MomentumSector::build(std::sync::Arc::new(basis), 0)?;
            println!("dimension {}", sector.dim());
            if args.list {
                for (&c, &size) in sector.representatives().iter().zip(sector.orbit_sizes()) {
                    println!("{} {size}", format_config(c, args.n));
                }
            }
        }
    }
    Ok(())
}

fn spectrum(args: &SpectrumArgs, out: &mut Output) -> Result<serde_json::Value> {
    let spec = args.model.resolve(ModelSpec::uv(-15.0, -5.0))?;
    let n = chain_length(args.n, &spec, 18);
    let natural = spec.natural_space(n)?;
    let (psi, space) = initial_state(&args.initial, &natural)?;
    let h = build_hamiltonian(&spec, &space)?;
    let eig = full_spectrum(&h)?;
    let profile = overlap_profile(&psi, &eig)?;
    println!(
        "dim {}: dominant overlap {:.6} at E = {:.6}",
        eig.len(),
        profile.dominant_overlap(),
        profile.dominant_energy()
    );
    let rows: Vec<(usize, f64, f64)> = profile.entries.iter().enumerate().map(|(i, &(e, p))| (i, e, p)).collect();
    out.table("spectrum", &rows, |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["index", "energy", "overlap_with_initial"])?;
        for (i, e, p) in &rows {
            w.write_record([i.to_string(), format!("{e}"), format!("{p}")])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(json!({ "n": n, "model": spec, "initial": args.initial, "dim": eig.len() }))
}

fn quench(args: &QuenchArgs, seed: Option<u64>, out: &mut Output) -> Result<serde_json::Value> {
    let mut model_args = args.model.clone();
    if args.model_i.is_some() {
        model_args.model = args.model_i.clone();
    }
    let initial = model_args.resolve(ModelSpec::uv(-15.0, 8.0))?;
    let final_model = match &args.model_f {
        Some(path) => {
            let mut m = load_model(path)?;
            if let Some(u) = args.u_f {
                m.u = u;
            }
            if let Some(v) = args.v_f {
                m.v = v;
            }
            m
        }
        None => ModelSpec {
            u: args.u_f.unwrap_or(initial.u),
            v: args.v_f.unwrap_or(-5.0),
            ..initial.clone()
        },
    };
    let n = chain_length(args.n, &initial, 18);
    let mut protocol = QuenchProtocol::new(n, initial, final_model)
        .with_initial(args.initial.clone())
        .with_times(args.tmax, args.dt)
        .with_observables(QuenchObservable::parse_list(&args.observables)?);
    protocol.triple = args.triple;
    protocol.block = args.block;
    protocol.distance = args.distance.options(seed);
    protocol.momentum_sector = !args.full_basis;
    protocol.validate()?;
    let space = protocol.space()?;
    let psi0 = protocol.prepare(&space)?;
    let result = run_quench_from(&protocol, &space, psi0)?;
    println!(
        "dim {}, {} times, norm drift {:.2e}, energy drift {:.2e}",
        result.dim,
        result.times.len(),
        result.norm_drift,
        result.energy_drift
    );
    out.table("quench", &result, |w| result.write_csv(w))?;
    Ok(json!({ "protocol": protocol, "dim": result.dim, "norm_drift": result.norm_drift, "energy_drift": result.energy_drift }))
}

fn gaussianity(args: &GaussianityArgs, seed: Option<u64>, out: &mut Output) -> Result<serde_json::Value> {
    let spec = args.model.resolve(ModelSpec::uv(-15.0, 8.0))?;
    let n = chain_length(args.n, &spec, 18);
    let natural = spec.natural_space(n)?;
    let (psi, space) = if args.state.eq_ignore_ascii_case("ground") {
        let h = build_hamiltonian(&spec, &natural)?;
        (ground_state(&h)?.1, natural)
    } else {
        initial_state(&args.state, &natural)?
    };
    let full = space.full();
    let psi = space.to_full(&psi)?;
    let ent = reduced_density_matrix(&psi, &full, args.block.unwrap_or(n / 2))?;
    let triple = match args.triple {
        Some(t) => WickTriple::new(t.0, n)?,
        None => WickTriple::default_for(n, space.boundary())?,
    };
    let w = wick_violation(&psi, &full, &triple)?;
    let d = interaction_distance(&ent.probabilities, &args.distance.options(seed))?;
    println!("S = {:.10}", ent.entropy());
    println!("W = {:.10}", w);
    println!("D_F = {:.10} (conjectured max {:.6})", d.value, conjectured_max());
    let eps: Vec<String> = d.energies.iter().map(|e| format!("{e:.6}")).collect();
    println!("epsilon = [{}]", eps.join(", "));
    let report = json!({
        "n": n,
        "model": spec,
        "state": args.state,
        "triple": triple,
        "block": ent.block,
        "entropy": ent.entropy(),
        "wick": w,
        "interaction_distance": d,
        "spectrum": ent.truncated(),
    });
    let rows: Vec<(String, f64)> = [("S".to_string(), ent.entropy()), ("W".into(), w), ("D_F".into(), d.value)]
        .into_iter()
        .chain(d.energies.iter().enumerate().map(|(i, &e)| (format!("epsilon_{}", i + 1), e)))
        .collect();
    out.table("gaussianity", &report, |wr| {
        let mut wr = csv::Writer::from_writer(wr);
        wr.write_record(["quantity", "value"])?;
        for (k, v) in &rows {
            wr.write_record([k.clone(), format!("{v}")])?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(report)
}

fn read_column(path: &Path, column: &str) -> Result<TimeSeries> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let t_col = find("t").context("input has no `t` column")?;
    let v_col = find(column).with_context(|| format!("input has no `{column}` column"))?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for row in rdr.records() {
        let row = row?;
        times.push(row[t_col].trim().parse::<f64>().context("bad time value")?);
        values.push(row[v_col].trim().parse::<f64>().with_context(|| format!("bad `{column}` value"))?);
    }
    Ok(TimeSeries::from_samples(column, &times, values)?)
}

fn powerspec(args: &PowerspecArgs, out: &mut Output) -> Result<serde_json::Value> {
    let series = read_column(&args.input, &args.column)?;
    let spectrum = power_spectrum(&series);
    let gaps: Vec<f64> = match (&args.gaps, args.n) {
        (Some(list), _) => parse_list(list, "gap")?,
        (None, Some(n)) => {
            let spec = args.model.resolve(ModelSpec::uv(-15.0, -5.0))?;
            let (psi, space) = initial_state(&args.initial, &spec.natural_space(n)?)?;
            let eig = full_spectrum(&build_hamiltonian(&spec, &space)?)?;
            overlap_profile(&psi, &eig)?.gaps(args.top)
        }
        (None, None) => Vec::new(),
    };
    let report = peak_match(&spectrum, &gaps);
    match report.dominant_omega {
        Some(w) => println!("dominant peak at omega = {w:.6} (bin width {:.6})", spectrum.d_omega),
        None => println!("no peaks"),
    }
    for m in &report.matches {
        println!(
            "gap {:.6}: nearest peak {} ({} bins)",
            m.gap,
            m.peak_omega.map_or("-".into(), |w| format!("{w:.6}")),
            m.bin_distance.map_or("-".into(), |d| d.to_string())
        );
    }
    out.table("powerspec", &spectrum, |w| spectrum.write_csv(w))?;
    out.json("peaks", &report)?;
    Ok(json!({ "input": args.input, "column": args.column, "gaps": gaps, "samples": series.len() }))
}

fn phase(args: &PhaseArgs, seed: Option<u64>, workers: usize, out: &mut Output) -> Result<(serde_json::Value, usize)> {
    let base = args.model.resolve(ModelSpec::uv(0.0, 0.0))?;
    let grid = ScanGrid {
        u: args.u_range,
        v: args.v_range,
        variant: base.variant,
        omega: base.omega,
        metrics: Metric::parse_list(&args.metrics)?,
        n: args.n,
        boundary: base.boundary,
        measure: MeasureOptions {
            block: None,
            triple: args.triple,
            distance: args.distance.options(seed),
        },
    };
    let diagram = phase_diagram(&grid, workers)?;
    out.table("phase_diagram", &diagram.records, |w| diagram.write_csv(w))?;
    let transitions: Vec<_> = grid
        .u
        .values()
        .into_iter()
        .map(|u| json!({ "u": u, "v_crossing": diagram.transition_at_u(u) }))
        .collect();
    out.json("transitions", &transitions)?;
    println!("{} points, {} failed", diagram.records.len(), diagram.failures());
    Ok((json!({ "grid": grid }), diagram.failures()))
}

fn impurity(args: &ImpurityArgs, seed: Option<u64>, workers: usize, out: &mut Output) -> Result<(serde_json::Value, usize)> {
    let point = args.model.resolve(ModelSpec::uv(-4.0, 10.5))?;
    let sweep = ImpuritySweep {
        point: (point.u, point.v),
        quench_to: (args.u_f, args.v_f),
        site: args.site,
        strengths: parse_list(&args.eps, "impurity strength")?,
        sizes: parse_list(&args.sizes, "size")?,
        boundary: point.boundary,
        t_max: args.tmax,
        dt: args.dt,
        measure: MeasureOptions {
            block: None,
            triple: None,
            distance: args.distance.options(seed),
        },
    };
    let rows = impurity_sweep(&sweep, workers)?;
    out.table("impurity", &rows, |w| write_impurity_csv(w, &rows))?;
    let failures = rows.iter().filter(|r| !r.succeeded()).count();
    Ok((json!({ "sweep": sweep }), failures))
}

fn longrange(args: &LongrangeArgs, seed: Option<u64>, workers: usize, out: &mut Output) -> Result<(serde_json::Value, usize)> {
    let base = args.model.resolve(
        ModelSpec::longrange(0.007, args.z3_u).with_boundary(Boundary::Pbc),
    )?;
    let distance = DistanceArgs {
        modes: None,
        starts: args.starts,
    }
    .options(seed);
    let mut failures = 0;
    let mut spec = json!({});
    if let (Some(om), Some(u)) = (args.diagram_omega, args.diagram_u) {
        let grid = LongRangeGrid {
            omega: om,
            u,
            n: args.n,
            boundary: base.boundary,
            metrics: Metric::ALL.to_vec(),
            measure: MeasureOptions {
                block: None,
                triple: None,
                distance: distance.clone(),
            },
        };
        let diagram = longrange_diagram(&grid, workers)?;
        out.table("longrange_diagram", &diagram.records, |w| diagram.write_csv(w))?;
        failures += diagram.failures();
        spec["diagram"] = json!(grid);
    } else if args.diagram_omega.is_some() || args.diagram_u.is_some() {
        bail!("--diagram-omega and --diagram-u must be given together");
    }
    if !args.no_quench {
        let suite = LongRangeSuite {
            n: args.n,
            boundary: base.boundary,
            omega: base.omega,
            z3_u: args.z3_u,
            z2_u: args.z2_u,
            t_max: args.tmax,
            dt: args.dt,
            ensemble: EnsembleSpec {
                realizations: args.realizations,
                master_seed: seed.unwrap_or(0),
                amplitude: args.amplitude,
            },
            ideal_realizations: args.ideal_realizations,
            distance,
        };
        let report = longrange_suite(&suite, workers)?;
        out.table("longrange_forward", &report.forward, |w| report.forward.write_csv(w))?;
        out.table("longrange_reverse", &report.reverse, |w| report.reverse.write_csv(w))?;
        out.table("longrange_forward_ideal", &report.forward_ideal, |w| report.forward_ideal.write_csv(w))?;
        out.table("longrange_disordered", &report.disordered, |w| report.disordered.write_csv(w))?;
        out.table("longrange_disordered_ideal", &report.disordered_ideal, |w| {
            report.disordered_ideal.write_csv(w)
        })?;
        spec["suite"] = json!(suite);
        spec["seeds"] = json!(report.disordered.seeds);
    }
    Ok((spec, failures))
}

fn obc(args: &ObcArgs, seed: Option<u64>, workers: usize, out: &mut Output) -> Result<(serde_json::Value, usize)> {
    let base = args.model.resolve(ModelSpec::uv(0.0, 0.0).with_boundary(Boundary::Obc))?;
    let grid = ScanGrid {
        u: args.u_range,
        v: args.v_range,
        variant: base.variant,
        omega: base.omega,
        metrics: Metric::parse_list(&args.metrics)?,
        n: args.n,
        boundary: Boundary::Obc,
        measure: MeasureOptions {
            block: None,
            triple: args.triple,
            distance: args.distance.options(seed),
        },
    };
    let rows = obc_diagram(&grid, args.edge, workers)?;
    out.table("obc", &rows, |w| write_obc_csv(w, &rows))?;
    let failures = rows.iter().filter(|r| !r.succeeded()).count();
    Ok((json!({ "grid": grid, "edge": args.edge }), failures))
}

fn fss(args: &FssArgs, seed: Option<u64>, workers: usize, out: &mut Output) -> Result<serde_json::Value> {
    let base = args.model.resolve(ModelSpec::uv(-15.0, 8.0))?;
    let spec = FssSpec {
        sizes: parse_list(&args.sizes, "size")?,
        u: base.u,
        v_initial: base.v,
        v_final: args.v_f,
        t_max: args.tmax,
        dt: args.dt,
        window: args.window,
        distance: args.distance.options(seed),
    };
    let rows = finite_size_quench(&spec, workers)?;
    for row in &rows {
        out.table(&format!("fss_n{}", row.n), &row.result, |w| row.result.write_csv(w))?;
        println!("N = {}: min D_F {:.6}, amplitude {:.6}", row.n, row.min_d_f, row.amplitude);
    }
    let summary: Vec<_> = rows
        .iter()
        .map(|r| json!({ "n": r.n, "dim": r.result.dim, "min_d_f": r.min_d_f, "amplitude": r.amplitude }))
        .collect();
    out.table("fss", &summary, |w| write_fss_csv(w, &rows))?;
    Ok(json!({ "fss": spec }))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
