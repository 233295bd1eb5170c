use std::f64::consts::PI;

use dirac_hartree::dirac::DiracParams;
use dirac_hartree::evolution::{evolve, EvolutionConfig, Method, PicardSettings};
use dirac_hartree::hartree::{CouplingSign, HartreeParams};
use dirac_hartree::initial::{InitialData, Normalization};
use dirac_hartree::littlewood_paley::{block_norms, DyadicProfile};
use dirac_hartree::{DensityForm, Execution, Exponent, Model, SpectralGrid};

fn model() -> Model {
    Model::new(
        DiracParams::new(1.0).unwrap(),
        HartreeParams::new(1.0, DensityForm::Gamma0, CouplingSign::Minus).unwrap(),
    )
}

fn initial(execution: Execution) -> dirac_hartree::SpinorField {
    let grid = SpectralGrid::with_execution(64, 16.0 * PI, execution).unwrap();
    InitialData::gaussian(2.0, 2.0, Normalization::L2)
        .build(&grid, DiracParams::new(1.0).unwrap())
        .unwrap()
}

#[test]
fn sequential_and_parallel_runs_are_bitwise_identical() {
    let cfg = EvolutionConfig { sample_every: 10, ..EvolutionConfig::strang(model(), 0.01, 0.5) };
    let run = |exec| evolve(&initial(exec), &cfg, |_, psi| psi.u()[17]).unwrap();
    let a = run(Execution::Parallel);
    let b = run(Execution::Sequential);
    assert_eq!(a.records, b.records);
    assert_eq!(a.final_state.u(), b.final_state.u());
    assert_eq!(a.final_state.v(), b.final_state.v());

    let psi = initial(Execution::Parallel);
    let seq = initial(Execution::Sequential);
    let profile = DyadicProfile;
    assert_eq!(block_norms(&psi, Exponent::INF, &profile), block_norms(&seq, Exponent::INF, &profile));
}

#[test]
fn picard_and_strang_drivers_agree() {
    let psi0 = initial(Execution::Parallel);
    let settings = PicardSettings { window: 0.05, tol: 1e-13, max_iter: 60, quad_nodes: 33 };
    let picard_cfg = EvolutionConfig {
        method: Method::Picard(settings),
        ..EvolutionConfig::strang(model(), 0.05, 0.2)
    };
    let picard = evolve(&psi0, &picard_cfg, |t, _| t).unwrap();
    assert_eq!(picard.picard_iterations.len(), 4);
    assert_eq!(picard.records, picard.times);
    let strang = evolve(&psi0, &EvolutionConfig::strang(model(), 1e-3, 0.2), |_, _| ()).unwrap();
    let gap = picard.final_state.distance(&strang.final_state).unwrap();
    assert!(gap < 1e-5, "gap {gap}");
}
