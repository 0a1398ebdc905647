//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use common::*;
use qinfo_core::channels::{lambda_channel, one_time_coherent, KrausChannel, LambdaParams};
use qinfo_core::experiment::{
    experiment_information, lambda_rate, lambda_rate_optimum, lambda_rate_optimum_with, optimize_controls, BasisSpec,
    Control, ExperimentScheme, LambdaInput, LambdaRateConfig, Param, Psm, PsmSpec, SchemeInstance,
};
use qinfo_core::grid::BlochGrid;
use qinfo_core::linalg::eig_hermitian;
use qinfo_core::measurement::{
    continuous_density, nonselected_information, orientation_kernel, selected_information, Povm,
};
use qinfo_core::states::{
    epsilon_by_quadrature, epsilon_operator, mixed_family, overlap_information, pure_family, DensityMatrix,
};
use rand::Rng;

type Check = (bool, String);
type Criterion = (&'static str, fn() -> Vec<Check>);

fn within(label: &str, value: f64, target: f64, tol: f64) -> Check {
    let ok = (value - target).abs() <= tol;
    (ok, format!("{label} = {value:.9} (target {target} ± {tol:e})"))
}

fn at_most(label: &str, value: f64, bound: f64) -> Check {
    (value <= bound, format!("{label} = {value:.3e} (≤ {bound:e})"))
}

fn in_time(label: &str, elapsed: Duration, limit_s: f64) -> Check {
    let s = elapsed.as_secs_f64();
    (s < limit_s, format!("{label} took {s:.2} s (< {limit_s} s)"))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn grid(nt: usize, np: usize) -> BlochGrid {
    BlochGrid::new(nt, np).unwrap()
}

fn criterion_1() -> Vec<Check> {
    let (i2, t2) = timed(|| overlap_information(2).unwrap());
    let (ibig, tbig) = timed(|| overlap_information(1_000_000).unwrap());
    vec![
        within("I(2)", i2, 0.27865, 1e-4),
        within("I(10^6)", ibig, 0.60995, 5e-3),
        in_time("I(2)", t2, 1.0),
        in_time("I(10^6)", tbig, 1.0),
    ]
}

fn criterion_2() -> Vec<Check> {
    let ((eigs, quad_err), t) = timed(|| {
        let eps = epsilon_operator();
        let eigs = eig_hermitian(&eps).unwrap().eigenvalues;
        let quad = epsilon_by_quadrature(&grid(32, 64));
        (eigs, quad.max_abs_diff(&eps))
    });
    let expected = [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0];
    let eig_err = eigs
        .iter()
        .zip(expected)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    vec![
        at_most("max eigenvalue error", eig_err, 1e-10),
        at_most("quadrature reconstruction error (32×64)", quad_err, 1e-6),
        in_time("operator checks", t, 5.0),
    ]
}

fn criterion_3() -> Vec<Check> {
    let (iu, t) = timed(|| nonselected_information(&pure_family(1.0).unwrap(), &grid(32, 64)).unwrap());
    let i2 = overlap_information(2).unwrap();
    vec![
        within("I_u(Bell, 32×64)", iu, 0.27865, 1e-3),
        within("I_u − I(2)", iu - i2, 0.0, 2e-3),
        in_time("nonselected", t, 60.0),
    ]
}

fn criterion_4() -> Vec<Check> {
    let g = grid(32, 64);
    let mixed = mixed_family(0.0).unwrap();
    let mut checks = vec![
        within(
            "I_s(χ=1, ϑ=0, mixed q=0)",
            selected_information(&mixed, 1.0, 0.0, &g).unwrap(),
            1.0,
            1e-6,
        ),
        at_most(
            "I_s(χ=1, ϑ=π/2, mixed q=0)",
            selected_information(&mixed, 1.0, FRAC_PI_2, &g).unwrap(),
            1e-6,
        ),
    ];
    for (name, rho) in [("mixed q=0", mixed.clone()), ("pure q=1", pure_family(1.0).unwrap())] {
        let s0 = selected_information(&rho, 0.0, 0.7, &g).unwrap();
        let u = nonselected_information(&rho, &g).unwrap();
        checks.push(at_most(&format!("|I_s(χ=0) − I_u| ({name})"), (s0 - u).abs(), 1e-9));
    }
    checks
}

fn criterion_5() -> Vec<Check> {
    let (r, t) = timed(|| lambda_rate_optimum(1.0, 0.0).unwrap());
    let opt = lambda_rate_optimum_with(
        1.0,
        0.0,
        &LambdaRateConfig {
            input: LambdaInput::Optimized,
            ..LambdaRateConfig::default()
        },
    )
    .unwrap();
    let (ok, detail) = within("R_opt/γ (input I/2)", r.best_value, 0.316, 0.005);
    vec![
        (
            ok,
            format!(
                "{detail} at γt = {:.4}, θ = {:.4}",
                r.best_params["t"], r.best_params["theta"]
            ),
        ),
        (
            true,
            format!("R_opt/γ (optimized input) = {:.6}, reported only", opt.best_value),
        ),
        in_time("64×64 + refinement", t, 120.0),
    ]
}

fn criterion_6() -> Vec<Check> {
    let (g1, g2) = (1.0, 1.0);
    let r = lambda_rate_optimum(g1, g2).unwrap();
    let (t, theta) = (r.best_params["t"], r.best_params["theta"]);
    let span = 10.0 / (g1 + g2);
    let per_total = r.best_value / (g1 + g2);
    let per_max = r.best_value / f64::max(g1, g2);
    let rate = |th: f64| lambda_rate(g1, g2, t, th, LambdaInput::MaximallyMixed).unwrap();
    let delta = 0.05;
    let local_max = rate(theta - delta) <= r.best_value && rate(theta + delta) <= r.best_value;
    let in_range = |x: f64| (0.14..=0.21).contains(&x);
    vec![
        (r.best_value.is_finite(), format!("R_opt = {:.6} γ", r.best_value)),
        (
            t > span / 64.0 && t < span,
            format!("t* = {t:.4}/γ strictly inside the scanned ({:.4}, {span})", span / 64.0),
        ),
        (
            theta > 0.0 && theta < 2.0 * PI && local_max,
            format!("θ* = {theta:.4} inside (0, 2π); R(θ* ± {delta}) ≤ R(θ*)"),
        ),
        (
            in_range(per_total) || in_range(per_max),
            format!("R/Γ = {per_total:.5}, R/γ = {per_max:.5}; range [0.14, 0.21]; reference 0.178γ"),
        ),
    ]
}

fn criterion_7() -> Vec<Check> {
    let mut r = rng(7);
    let (mut unitary_err, mut classical_max, mut consistency_err) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..100 {
        let dim = r.gen_range(2..=4);
        let rho = random_density(&mut r, dim);
        let ch = KrausChannel::unitary(random_unitary(&mut r, dim)).unwrap();
        unitary_err = unitary_err.max((ch.coherent_information(&rho).unwrap() - rho.entropy()).abs());

        let (da, db) = (r.gen_range(1..=3), r.gen_range(1..=3));
        let probs: Vec<f64> = (0..da * db).map(|_| r.gen_range(0.0..1.0)).collect();
        let total: f64 = probs.iter().sum();
        let joint = DensityMatrix::diagonal(&probs.iter().map(|p| p / total).collect::<Vec<_>>()).unwrap();
        classical_max = classical_max.max(one_time_coherent(&joint, (da, db)).unwrap());

        let (din, dout) = (r.gen_range(2..=3), r.gen_range(1..=3));
        let rho = random_density(&mut r, din);
        let ch = random_channel(&mut r, din, dout);
        let joint = ch.joint_from_channel(&rho).unwrap();
        let diff = one_time_coherent(&joint, (din, dout)).unwrap() - ch.coherent_information(&rho).unwrap();
        consistency_err = consistency_err.max(diff.abs());
    }
    vec![
        at_most("max |I_c(unitary) − S[ρ]| over 100", unitary_err, 1e-9),
        at_most(
            "max one-time I_c of classical joints over 100 (≤ 0 up to round-off)",
            classical_max,
            1e-12,
        ),
        at_most("max |one-time − channel I_c| over 100", consistency_err, 1e-9),
    ]
}

fn criterion_8() -> Vec<Check> {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let rho = if i % 2 == 0 {
            random_density(&mut r, 4)
        } else {
            pure_family(1.0).unwrap()
        };
        let (a, b) = (random_angles(&mut r), random_angles(&mut r));
        let k = orientation_kernel(&rho, a, b).unwrap();
        worst = worst.max((k[0][0] - continuous_density(&rho, a, b)).abs());
    }
    vec![at_most("max |kernel(0,0) − density| over 100 pairs", worst, 1e-12)]
}

fn rotated_readout_scheme() -> ExperimentScheme {
    let mut s = ExperimentScheme::fixed(
        DensityMatrix::maximally_mixed(2),
        Psm::computational(2).unwrap(),
        KrausChannel::identity(2),
        Psm::computational(2).unwrap(),
    );
    s.readout = PsmSpec::Projective {
        basis: BasisSpec::Rotated {
            angle: Param::control("vartheta"),
        },
        weights: None,
    };
    s.controls = vec![Control::new("vartheta", 0.0, FRAC_PI_2).with_value(1.1)];
    s
}

fn criterion_9() -> Vec<Check> {
    let mut r = rng(9);
    let (mut norm_err, mut min_mass) = (0.0f64, f64::INFINITY);
    for _ in 0..100 {
        let rho = random_density(&mut r, 2);
        let ex = random_psm(&mut r, 2, 2);
        let dout = r.gen_range(1..=3);
        let ch = random_channel(&mut r, ex.dim_out(), dout);
        let ro = random_psm(&mut r, dout, 2);
        let d = SchemeInstance::new(rho, ex, ch, ro).unwrap().distribution().unwrap();
        norm_err = norm_err.max((d.total() - 1.0).abs());
        min_mass = min_mass.min(d.masses().iter().copied().fold(f64::INFINITY, f64::min));
    }
    let matched = ExperimentScheme::fixed(
        DensityMatrix::maximally_mixed(2),
        Psm::computational(2).unwrap(),
        KrausChannel::identity(2),
        Psm::computational(2).unwrap(),
    );
    let opt = optimize_controls(&rotated_readout_scheme(), 64).unwrap();
    vec![
        at_most("max |Σ P − 1| over 100 schemes", norm_err, 1e-8),
        (min_mass >= 0.0, format!("min P = {min_mass:.3e} (≥ 0)")),
        within(
            "matched noiseless scheme",
            experiment_information(&matched).unwrap(),
            1.0,
            1e-9,
        ),
        within("optimized ϑ", opt.best_params["vartheta"], 0.0, 1e-3),
    ]
}

fn criterion_10() -> Vec<Check> {
    let mut completeness = 0.0f64;
    for (nt, np) in [(16, 32), (32, 64)] {
        let g = grid(nt, np);
        completeness = completeness
            .max(g.completeness_deviation())
            .max(Povm::continuous(g.clone()).completeness_deviation())
            .max(Povm::mixed(0.5, g.clone(), 0.4).unwrap().completeness_deviation())
            .max(Psm::bloch(&g).unwrap().normalization_deviation());
    }

    let mut r = rng(10);
    let mut trace_pres = [
        KrausChannel::depolarizing(0.3).unwrap(),
        KrausChannel::amplitude_damping(0.6).unwrap(),
        lambda_channel(&LambdaParams::new(1.0, 0.7, 2.1, 0.9).unwrap()).unwrap(),
    ]
    .iter()
    .map(KrausChannel::completeness_deviation)
    .fold(0.0, f64::max);
    let mut entropy_err = 0.0f64;
    for _ in 0..100 {
        let (din, dout) = (r.gen_range(1..=4), r.gen_range(1..=4));
        trace_pres = trace_pres.max(random_channel(&mut r, din, dout).completeness_deviation());
        let dim = r.gen_range(2..=6);
        let rho = random_density(&mut r, dim);
        let u = random_unitary(&mut r, dim);
        let rotated = DensityMatrix::new(u.sandwich(rho.matrix())).unwrap();
        entropy_err = entropy_err.max((rotated.entropy() - rho.entropy()).abs());
    }

    let (coarse, fine) = (grid(32, 64), grid(64, 128));
    let mut refinement = 0.0f64;
    for rho in [
        pure_family(1.0).unwrap(),
        mixed_family(0.0).unwrap(),
        pure_family(0.5).unwrap(),
    ] {
        let du = nonselected_information(&rho, &coarse).unwrap() - nonselected_information(&rho, &fine).unwrap();
        let ds = selected_information(&rho, 0.5, 0.6, &coarse).unwrap()
            - selected_information(&rho, 0.5, 0.6, &fine).unwrap();
        refinement = refinement.max(du.abs()).max(ds.abs());
    }
    vec![
        at_most("grid/POVM/measure completeness", completeness, 1e-10),
        at_most("Kraus trace preservation", trace_pres, 1e-10),
        at_most("entropy unitary invariance", entropy_err, 1e-9),
        at_most("mesh-halving change (32×64 → 64×128)", refinement, 1e-4),
    ]
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("distinguishability constants", criterion_1),
        ("incompatibility operator", criterion_2),
        ("nonselected information at full entanglement", criterion_3),
        ("selected-information endpoints", criterion_4),
        ("two-level rate optimum", criterion_5),
        ("symmetric Λ rate", criterion_6),
        ("coherent-information identities", criterion_7),
        ("orientation kernel identity", criterion_8),
        ("experiment schemes", criterion_9),
        ("infrastructure invariants", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (checks, elapsed) = timed(run);
        let ok = checks.iter().all(|(ok, _)| *ok);
        if !ok {
            failed += 1;
        }
        let status = if ok { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status}: {name} ({:.2} s)",
            i + 1,
            elapsed.as_secs_f64()
        );
        for (ok, detail) in &checks {
            println!("    [{}] {detail}", if *ok { "ok" } else { "x" });
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
