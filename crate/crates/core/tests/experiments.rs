use rydberg::dynamics::{InitialState, QuenchObservable, QuenchProtocol};
use rydberg::experiments::{phase_diagram, run_ensemble, Axis, EnsembleSpec, MeasureOptions, Metric, ScanGrid};
use rydberg::gaussianity::DistanceOptions;
use rydberg::{Boundary, ModelSpec};

fn small_grid() -> ScanGrid {
    ScanGrid {
        u: Axis::new(-15.0, -5.0, 3).unwrap(),
        v: Axis::new(-5.0, 8.0, 3).unwrap(),
        metrics: Metric::ALL.to_vec(),
        measure: MeasureOptions {
            distance: DistanceOptions {
                starts: 6,
                seed: 99,
                ..DistanceOptions::default()
            },
            ..MeasureOptions::default()
        },
        ..ScanGrid::main_text(9)
    }
}

fn csv_of(grid: &ScanGrid, workers: usize) -> String {
    let diagram = phase_diagram(grid, workers).unwrap();
    let mut out = Vec::new();
    diagram.write_csv(&mut out).unwrap();
    String::from_utf8(out).unwrap()
}

#[test]
fn scans_are_deterministic_and_complete() {
    let grid = small_grid();
    let a = csv_of(&grid, 1);
    assert_eq!(a, csv_of(&grid, 1));
    assert_eq!(a, csv_of(&grid, 3));
    assert_eq!(a.lines().count(), 1 + grid.len());
}

#[test]
fn ensembles_are_reproducible_from_the_master_seed() {
    let protocol = QuenchProtocol::new(
        6,
        ModelSpec::longrange(1.0, 0.5).with_boundary(Boundary::Pbc),
        ModelSpec::longrange(1.0, 2.0).with_boundary(Boundary::Pbc),
    )
    .with_initial(InitialState::Z3)
    .with_times(2.0, 0.1)
    .with_observables(vec![QuenchObservable::Entropy, QuenchObservable::InteractionDistance]);
    let run = |master: u64, workers: usize| {
        let ens = EnsembleSpec {
            realizations: 5,
            master_seed: master,
            amplitude: 0.05,
        };
        let result = run_ensemble(&protocol, &ens, workers).unwrap();
        let mut out = Vec::new();
        result.write_csv(&mut out).unwrap();
        (result.seeds.clone(), String::from_utf8(out).unwrap())
    };
    let (seeds, a) = run(7, 1);
    assert_eq!((seeds.clone(), a.clone()), run(7, 2));
    let (other_seeds, b) = run(8, 1);
    assert_ne!(seeds, other_seeds);
    assert_ne!(a, b);
    assert!(a.lines().next().unwrap().contains("entropy_stderr"));
}
