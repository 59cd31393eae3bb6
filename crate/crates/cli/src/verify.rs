//! Self-check suite behind the `verify` subcommand: vortex benchmark,
//! structural invariants, synchrony sanity, functional inequalities, the
//! scalar-minimum bound, observer constants, and formula spot checks.
//! Each check is independent; the command exits nonzero if any fails.

use std::f64::consts::{E, PI};

use nudge2d::assimilation::{
    AssimilationConfig, EstimatorInit, ReferenceInit, run_assimilation,
};
use nudge2d::bounds::{
    self, PhysicalSetup, Regime, phi_min_check, verify_functional_inequalities,
};
use nudge2d::observers::{Observer, ObserverKind, measure_constants};
use nudge2d::solver::{
    Forcing, ForcingKind, SolverParams, TimeStepper, make_forcing, taylor_green_exact,
};
use nudge2d::spectral::{Grid, SpectralField};
use nudge2d::synth::{self, SpectrumSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

fn taylor_green_error(grid: Grid, nu: f64, dt: f64, t_end: f64) -> f64 {
    let params = SolverParams::new(nu, dt).unwrap();
    let mut stepper = TimeStepper::new(grid, params);
    let mut u = taylor_green_exact(grid, nu, 0.0).unwrap();
    let forcing = Forcing::zero(grid);
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        stepper.step(&mut u, &forcing, None).unwrap();
    }
    let exact = taylor_green_exact(grid, nu, t_end).unwrap();
    u.sub(&exact).unwrap().norm_l2() / exact.norm_l2()
}

fn vortex_benchmark() -> Check {
    let grid = Grid::new(64, 2.0 * PI).unwrap();
    let coarse = taylor_green_error(grid, 0.1, 2e-3, 1.0);
    let fine = taylor_green_error(grid, 0.1, 1e-3, 1.0);
    let order = (coarse / fine).log2();
    check(
        "decaying vortex benchmark",
        fine <= 1e-5 && order >= 1.8,
        format!("rel err {fine:.3e} at dt=1e-3 (need <=1e-5), order {order:.2} (need >=1.8)"),
    )
}

fn structural_invariants() -> Check {
    let grid = Grid::new(32, 2.0 * PI).unwrap();
    let params = SolverParams::new(0.1, 1e-2).unwrap();
    let forcing = make_forcing(grid, 0.1, 1.0, ForcingKind::Kolmogorov).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let spec = SpectrumSpec {
        kmax: 8,
        decay: 2.0,
    };
    let mut u = synth::normalized_to(synth::random_velocity(grid, spec, &mut rng), 0.5);
    let mut stepper = TimeStepper::new(grid, params);
    let mut max_div: f64 = u.divergence_ratio();
    let mut asym: f64 = 0.0;
    let mut mean_ok = true;
    for s in 0..300 {
        stepper.step(&mut u, &forcing, None).unwrap();
        if s % 10 == 0 {
            max_div = max_div.max(u.divergence_ratio());
            asym = asym
                .max(u.u1.hermitian_asymmetry())
                .max(u.u2.hermitian_asymmetry());
            mean_ok = mean_ok
                && u.u1.mean_coeff().norm() == 0.0
                && u.u2.mean_coeff().norm() == 0.0;
        }
    }
    check(
        "structural invariants",
        max_div <= 1e-10 && asym == 0.0 && mean_ok,
        format!("max divergence ratio {max_div:.3e} (need <=1e-10), hermitian asymmetry {asym:.1e}, zero mean {mean_ok}"),
    )
}

fn synchrony_sanity() -> Check {
    let cfg = AssimilationConfig {
        n: 32,
        l: 2.0 * PI,
        nu: 0.1,
        dt: 1e-2,
        forcing: ForcingKind::Kolmogorov,
        grashof: 1.0,
        t_spin: 1.0,
        t_assim: 1.0,
        mu: 10.0,
        observer: ObserverKind::FourierModes,
        h: 0.125,
        observed_component: 2,
        u0: EstimatorInit::Exact,
        ref_init: ReferenceInit::Random { amplitude: 0.5 },
        record_every: 5,
        seed: 3,
        c: 1.0,
        c_tilde: 1.0,
    };
    match run_assimilation(&cfg) {
        Ok(out) => {
            let scale = out.series.energy_ref[0].sqrt().max(1.0);
            let worst = out
                .series
                .err_l2
                .iter()
                .cloned()
                .fold(0.0f64, f64::max);
            check(
                "exact-start synchrony",
                worst <= 1e-12 * scale,
                format!("max err_l2 {worst:.3e} over the run (need <=1e-12 x state scale)"),
            )
        }
        Err(e) => check("exact-start synchrony", false, format!("run failed: {e}")),
    }
}

fn ensemble(grid: Grid, count: usize, seed: u64) -> Vec<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = SpectrumSpec {
        kmax: 10,
        decay: 2.0,
    };
    (0..count)
        .map(|_| synth::random_scalar(grid, spec, &mut rng))
        .collect()
}

fn spectral_gap_inequalities() -> Check {
    let grid = Grid::new(64, 2.0 * PI).unwrap();
    let fields = ensemble(grid, 20, 2);
    let report = match verify_functional_inequalities(&fields) {
        Ok(r) => r,
        Err(e) => return check("spectral gap inequalities", false, e.to_string()),
    };
    // equality on the first eigenfunction
    let mut lowest = SpectralField::zeros(grid);
    lowest.set_mode_pair(1, 0, nudge2d::C64::new(0.0, -0.5));
    let eq = verify_functional_inequalities(std::slice::from_ref(&lowest)).unwrap();
    let eq_err = (eq.poincare_l2_max - 1.0).abs();
    check(
        "spectral gap inequalities",
        report.poincare_l2_max <= 1.0 + 1e-10
            && report.poincare_h1_max <= 1.0 + 1e-10
            && eq_err <= 1e-10,
        format!(
            "max L2 ratio {:.12}, max H1 ratio {:.12}, lowest-mode equality off by {eq_err:.2e}",
            report.poincare_l2_max, report.poincare_h1_max
        ),
    )
}

fn interpolation_constant_stability() -> Check {
    let c_l = |n: usize| {
        let grid = Grid::new(n, 2.0 * PI).unwrap();
        verify_functional_inequalities(&ensemble(grid, 20, 4))
            .unwrap()
            .c_l_estimate
    };
    let c64 = c_l(64);
    let c128 = c_l(128);
    let drift = (c64 / c128 - 1.0).abs();
    check(
        "quartic interpolation constant stability",
        drift <= 0.2,
        format!("c_L {c64:.6} at N=64 vs {c128:.6} at N=128 (drift {:.2}%)", drift * 100.0),
    )
}

fn scalar_minimum_bound() -> Check {
    let tight1 = phi_min_check(1.0, 20_001).unwrap();
    let tighte = phi_min_check(E, 20_001).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::INFINITY;
    for _ in 0..200 {
        let gamma = 100.0 * rand::Rng::random::<f64>(&mut rng).max(1e-12);
        let r = phi_min_check(gamma, 4_001).unwrap();
        worst = worst.min(r.grid_min - r.analytic_bound);
    }
    check(
        "scalar minimum bound",
        tight1.grid_min.abs() <= 1e-12
            && (tighte.grid_min + E).abs() <= 1e-9
            && (tighte.argmin - E).abs() <= 1e-9
            && worst >= -1e-9,
        format!(
            "tight at 1 ({:.2e}) and e ({:.2e}); worst margin over 200 samples {worst:.2e}",
            tight1.grid_min,
            tighte.grid_min + E
        ),
    )
}

fn observer_constants() -> Check {
    let grid = Grid::new(64, 2.0 * PI).unwrap();
    let fields = ensemble(grid, 20, 6);
    let mut detail = String::new();
    let mut ok = true;
    for kind in [
        ObserverKind::FourierModes,
        ObserverKind::VolumeElements,
        ObserverKind::Nodal,
    ] {
        let at = |h: f64| {
            measure_constants(&Observer::new(kind, grid, h).unwrap(), &fields)
                .unwrap()
                .c0_hat
        };
        let coarse = at(0.5);
        let fine = at(0.25);
        let ratio = coarse / fine.max(1e-300);
        if kind == ObserverKind::FourierModes {
            ok &= coarse <= 1.0 + 1e-12 && fine <= 1.0 + 1e-12;
        } else {
            ok &= (0.5..=2.0).contains(&ratio);
        }
        detail.push_str(&format!("{} {coarse:.3}->{fine:.3}; ", kind.name()));
    }
    check(
        "observer approximation constants",
        ok,
        format!("c0_hat across h halving: {}", detail.trim_end_matches("; ")),
    )
}

fn formula_spot_checks() -> Check {
    let unit = PhysicalSetup::new(1.0, 1.0, 1.0).unwrap();
    let mu_id = bounds::mu_min(&unit, Regime::TypeIDirichlet).value.value();
    let k = bounds::k_of_g(&unit).value();
    let h = bounds::h_max(&unit, 4.0).unwrap();
    let g3 = PhysicalSetup::new(1.0, 1.0, 3.0).unwrap();
    let per_h1 = bounds::attractor_bounds(&g3, 1.0)
        .unwrap()
        .periodic_h1
        .value();
    let jolly = bounds::attractor_bounds(&unit, 1.0)
        .unwrap()
        .periodic_h2
        .value();
    let ok = (mu_id - 4.0).abs() < 1e-12
        && (k - 24.932957683238436).abs() < 1e-10
        && (h - 0.5).abs() < 1e-12
        && (per_h1 - 18.0).abs() < 1e-12
        && (jolly - 16.0).abs() < 1e-12;
    check(
        "formula spot checks",
        ok,
        format!("mu_min {mu_id}, K {k:.12}, h_max {h}, periodic H1(G=3) {per_h1}, periodic H2(G=1) {jolly}"),
    )
}

pub fn run_all() -> Vec<Check> {
    vec![
        vortex_benchmark(),
        structural_invariants(),
        synchrony_sanity(),
        spectral_gap_inequalities(),
        interpolation_constant_stability(),
        scalar_minimum_bound(),
        observer_constants(),
        formula_spot_checks(),
    ]
}
