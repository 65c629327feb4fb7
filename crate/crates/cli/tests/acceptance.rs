//! One test per acceptance criterion. Each prints a single
//! `criterion N: PASS|FAIL ...` line before asserting.

use std::process::Command;
use std::time::Instant;

use hardy_rellich::agmon::{build_cutoffs, d2_distance, energy_decay, AgmonConfig};
use hardy_rellich::constants::{regime_formula, regime_gap};
use hardy_rellich::form_calculus::{
    condition_two_witness, default_families, run_family, DiscreteForm,
};
use hardy_rellich::grushin::{
    default_schedule as grushin_schedule, direct_tensor_norm, grushin_hardy_estimate,
    grushin_rellich_norm, GrushinConfig, RadialFactor, SecondFactor,
};
use hardy_rellich::radial::{
    assemble, default_schedule, hardy_convergence, hardy_quotient_min, rellich_quotient_min,
    side_constant, trial_alpha, trial_jet, trial_quotient, Cutoff, QuotientEstimate, SolverOptions,
    TrialSide,
};
use hardy_rellich::{
    rellich_constant, Exponent, GridSpec, RadialGrid, WeightParams, WeightProfile,
};

fn verdict(n: u32, ok: bool, detail: String) {
    println!(
        "criterion {n}: {} {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn profile(d: u32, a: f64, b: f64) -> WeightProfile {
    WeightProfile::new(WeightParams::new(d, a, b).unwrap())
}

/// The reference discretization: n = 4096 on [1e-4, 1e4].
fn reference_solve(p: &WeightProfile, rellich: bool, n: usize) -> QuotientEstimate {
    let grid = RadialGrid::log(1e-4, 1e4, n).unwrap();
    let forms = assemble(p, &grid, Default::default()).unwrap();
    let opts = SolverOptions::default();
    if rellich {
        rellich_quotient_min(&forms, &opts).unwrap()
    } else {
        hardy_quotient_min(&forms, &opts).unwrap()
    }
}

#[test]
fn criterion_01_ledger_exactness() {
    let start = Instant::now();
    let exponents: Vec<Exponent> = ["0", "1/2", "1", "2", "3", "4"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let (mut cells, mut valid, mut bad) = (0, 0, Vec::new());
    for d in 1..=8 {
        for a in &exponents {
            for b in &exponents {
                let p = WeightParams::from_exponents(d, a.clone(), b.clone()).unwrap();
                let ledger = rellich_constant(&p);
                cells += 1;
                if let Some(a2) = &ledger.a2 {
                    valid += 1;
                    if *a2 != regime_formula(&p) {
                        bad.push(format!("{p}: a2"));
                    }
                }
                if regime_gap(&p) != num::BigRational::from_integer(0.into()) {
                    bad.push(format!("{p}: regime gap"));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        bad.is_empty() && secs < 1.0,
        format!("{cells} cells, {valid} with a2, mismatches {bad:?}, {secs:.3}s (limit 1s)"),
    );
}

#[test]
fn criterion_02_classical_hardy() {
    let start = Instant::now();
    let p = profile(3, 0.0, 0.0);
    let seq: Vec<f64> = [512, 1024, 2048, 4096]
        .iter()
        .map(|n| reference_solve(&p, false, *n).value)
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let value = *seq.last().unwrap();
    let monotone = seq.windows(2).all(|w| w[1] <= w[0] + 1e-6);
    let in_range = (0.25..=0.2625).contains(&value);
    let wide = hardy_convergence(&p, &default_schedule(), &SolverOptions::default()).unwrap();
    verdict(
        2,
        in_range && monotone && secs < 10.0,
        format!(
            "n=4096 on [1e-4,1e4]: {value:.6} (want [0.25, 0.2625]), sequence {seq:.6?} monotone {monotone}, \
             {secs:.2}s; widening schedule reaches {:.6}",
            wide.final_estimate().unwrap().value
        ),
    );
}

#[test]
fn criterion_03_weighted_hardy() {
    let start = Instant::now();
    let value = reference_solve(&profile(3, 1.0, 1.0), false, 4096).value;
    let secs = start.elapsed().as_secs_f64();
    verdict(
        3,
        (1.0..=1.05).contains(&value) && secs < 10.0,
        format!(
            "d=3 (1,1): {value:.6} vs a1 = 1 (gap {:.2}%), {secs:.2}s",
            100.0 * (value - 1.0)
        ),
    );
}

#[test]
fn criterion_04_classical_rellich() {
    let start = Instant::now();
    let value = reference_solve(&profile(5, 0.0, 0.0), true, 4096).value;
    let secs = start.elapsed().as_secs_f64();
    let a2 = 25.0 / 16.0;
    verdict(
        4,
        (a2..=a2 * 1.10).contains(&value) && secs < 30.0,
        format!(
            "d=5 (0,0), n=4096 on [1e-4,1e4]: {value:.6} vs a2 = 1.5625 (gap {:.2}%, limit 10%), {secs:.2}s",
            100.0 * (value / a2 - 1.0)
        ),
    );
}

#[test]
fn criterion_05_rellich_gate() {
    let bin = env!("CARGO_BIN_EXE_hrverify");
    let out = Command::new(bin)
        .args([
            "verify-rellich",
            "--dim",
            "3",
            "--delta",
            "0",
            "--delta-prime",
            "0",
        ])
        .output()
        .unwrap();
    let code = out.status.code();
    let stdout = String::from_utf8_lossy(&out.stdout);
    let ledger = Command::new(bin)
        .args(["constants", "3", "0", "0"])
        .output()
        .unwrap();
    verdict(
        5,
        code == Some(2)
            && stdout.contains("criterion nu<a1 fails")
            && ledger.status.code() == Some(2),
        format!(
            "verify-rellich exit {code:?}, constants exit {:?}",
            ledger.status.code()
        ),
    );
}

#[test]
fn criterion_06_identity_suite() {
    let start = Instant::now();
    let grid = RadialGrid::log(1e-2, 1e2, 33).unwrap();
    let families = default_families();
    let (mut eq, mut ineq) = (0.0f64, f64::NEG_INFINITY);
    for (i, p) in families.iter().enumerate() {
        let r = run_family(p, &grid, 1000, 0, i as u64).unwrap();
        eq = eq.max(r.max_equality_residual());
        ineq = ineq.max(r.max_inequality_excess());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        6,
        eq <= 1e-10 && ineq <= 1e-12 && secs < 60.0,
        format!(
            "{} families x 1000: max equality residual {eq:.2e}, max inequality excess {ineq:.2e}, {secs:.2}s",
            families.len()
        ),
    );
}

#[test]
fn criterion_07_condition_two() {
    let grid = RadialGrid::log(1e-2, 1e2, 65).unwrap();
    let worst: Vec<f64> = [(5, 0.0, 0.0), (3, 2.0, 2.0)]
        .iter()
        .map(|(d, a, b)| {
            condition_two_witness(&WeightParams::new(*d, *a, *b).unwrap(), &grid, 100, 0).unwrap()
        })
        .collect();
    verdict(
        7,
        worst.iter().all(|w| *w <= 1e-9),
        format!(
            "worst E(eta) - gamma (eta^2 phi, eta^2 phi): {:.3e}, {:.3e}",
            worst[0], worst[1]
        ),
    );
}

#[test]
fn criterion_08_agmon() {
    let e = std::f64::consts::E;
    let distances = [
        (d2_distance(1.0, 1.0).unwrap(), 0.0),
        (d2_distance(e, e * e * e).unwrap(), 2.0),
        (d2_distance(1e-3, 5.0).unwrap(), (5e3f64).ln()),
    ];
    let d2_err = distances
        .iter()
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let cfg = AgmonConfig::default();
    let grid = cfg.grid().unwrap();
    let cutoffs = build_cutoffs(&grid, cfg.m, &cfg.exhaustion).unwrap();
    let eikonal = cutoffs.eikonal_excess();

    let p = profile(3, 0.0, 0.0);
    let form = DiscreteForm::new(&p, &grid).unwrap();
    let alpha = trial_alpha(&p, TrialSide::Origin, 0.1);
    let cutoff = Cutoff::default_for(TrialSide::Origin);
    let phi = form.analytic(|r| trial_jet(alpha, &cutoff, TrialSide::Origin, r));
    let energy = form.energy(&phi, &phi);
    let terms = energy_decay(&form, &cutoffs, &phi);
    let below = terms.last().map_or(f64::INFINITY, |t| t.value) < 1e-6 * energy;
    let bounded = terms.iter().all(|t| t.value <= t.bound * (1.0 + 1e-12));
    verdict(
        8,
        d2_err <= 1e-12 && eikonal <= 1e-10 && below && bounded,
        format!(
            "d2 error {d2_err:.1e}, eikonal excess {eikonal:.1e}, last h(rho_n)/E {:.2e} over {} shells",
            terms.last().map_or(f64::NAN, |t| t.value / energy),
            terms.len()
        ),
    );
}

#[test]
fn criterion_09_grushin() {
    let cfg = GrushinConfig::new(WeightParams::new(3, 0.0, 0.0).unwrap(), 1);
    let report =
        grushin_hardy_estimate(&cfg, &grushin_schedule(), &SolverOptions::default()).unwrap();
    let (lambda, q) = *report.lambda_sweep.last().unwrap();
    let within = lambda == 1e-4 && (0.25..=0.25 * 1.05).contains(&q);

    let mut worst = 0.0f64;
    for (d1, a, b) in [(5, 0.0, 0.0), (3, 1.0, 2.0)] {
        let mut c = GrushinConfig::new(WeightParams::new(d1, a, b).unwrap(), 1);
        c.second_nodes = 64;
        let radial = RadialFactor::new(&c, &GridSpec::log(1e-2, 10.0, 66)).unwrap();
        let chi = SecondFactor::bump(&c).unwrap();
        let psi: Vec<f64> = radial
            .forms
            .grid
            .interior_nodes()
            .iter()
            .map(|r| r.ln().sin() + 1.5)
            .collect();
        let expansion = grushin_rellich_norm(&radial, &psi, &chi, 1.0)
            .unwrap()
            .total();
        let direct = direct_tensor_norm(&radial, &psi, &chi).unwrap();
        worst = worst.max((expansion - direct).abs() / direct);
    }
    verdict(
        9,
        within && worst <= 1e-8,
        format!(
            "quotient at lambda=1e-4: {q:.6} (gap {:.2}%), tensor identity rel. error {worst:.1e}",
            400.0 * (q - 0.25)
        ),
    );
}

#[test]
fn criterion_10_sharpness_from_above() {
    let mut ok = true;
    let mut detail = Vec::new();
    for (p, side) in [
        (profile(3, 0.0, 0.0), TrialSide::Origin),
        (profile(3, 0.0, 4.0), TrialSide::Infinity),
    ] {
        let target = side_constant(&p, side);
        let cutoff = Cutoff::default_for(side);
        let seq: Vec<f64> = [0.4, 0.2, 0.1, 0.05]
            .iter()
            .map(|eps| trial_quotient(&p, trial_alpha(&p, side, *eps), &cutoff, side).unwrap())
            .collect();
        let last = *seq.last().unwrap();
        let decreasing = seq.windows(2).all(|w| w[1] < w[0]);
        ok &= decreasing && last >= target && last <= 1.15 * target;
        detail.push(format!("{side:?} {}: {seq:.4?} -> {target}", p.params()));
    }
    verdict(10, ok, detail.join("; "));
}
