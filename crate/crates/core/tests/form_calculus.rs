use std::time::Instant;

use hardy_rellich::form_calculus::{condition_two_witness, default_families, random_function, rellich_chain, run_family};
use hardy_rellich::quadrature::QuadTolerance;
use hardy_rellich::radial::{assemble, RadialGrid};
use hardy_rellich::{rellich_constant, WeightParams, WeightProfile};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn identity_suite_over_default_families() {
    let start = Instant::now();
    let grid = RadialGrid::log(1e-2, 1e2, 33).unwrap();
    for (k, params) in default_families().iter().enumerate() {
        let report = run_family(params, &grid, 1000, 2024, k as u64).unwrap();
        assert!(report.passes(1e-10, 1e-12), "{report:?}");
    }
    assert!(start.elapsed().as_secs_f64() < 60.0);
}

#[test]
fn condition_two_on_both_families() {
    let grid = RadialGrid::log(1e-4, 1e4, 129).unwrap();
    for (d, a) in [(5, 0.0), (3, 2.0)] {
        let params = WeightParams::new(d, a, a).unwrap();
        assert!(condition_two_witness(&params, &grid, 100, 11).unwrap() <= 1e-9);
    }
    // δ ≠ δ' exercises the non-constant ρ(r)
    let params = WeightParams::new(4, 0.5, 3.0).unwrap();
    assert!(condition_two_witness(&params, &grid, 100, 12).unwrap() <= 1e-9);
}

#[test]
fn rellich_chain_on_random_core_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (d, a, b) in [(5, 0.0, 0.0), (3, 2.0, 2.0), (4, 1.0, 3.0)] {
        let params = WeightParams::new(d, a, b).unwrap();
        let ledger = rellich_constant(&params);
        assert!(ledger.rellich_valid);
        let grid = RadialGrid::log(1e-3, 1e3, 97).unwrap();
        let forms = assemble(&WeightProfile::new(params), &grid, QuadTolerance::default()).unwrap();
        for _ in 0..100 {
            let f = random_function(&mut rng, &grid, -1.0, 1.0, true);
            let u = &f.values[1..f.values.len() - 1];
            let c = rellich_chain(&forms, ledger.a1_f64().unwrap(), ledger.gamma_f64(), u);
            assert!(c.holds(1e-12), "{c:?}");
        }
    }
}
