//! Full-system checks at pinned configurations, one printed line per check.
//!
//! The harness is disabled for this target (see Cargo.toml), so the report
//! prints unconditionally under `cargo test`. The binary exits nonzero when
//! any check lands off its expected outcome. One check (4c) is expected to
//! fail: at the pinned forcing strength the control clause is impossible to
//! satisfy, and the note printed under it explains why. An unexpected pass
//! there fails the suite too, so the note cannot go stale silently.

use std::f64::consts::{E, PI};
use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{Context, Result};
use nudge2d::assimilation::{
    self, AssimilationConfig, EstimatorInit, ReferenceInit, RunStatus,
};
use nudge2d::bounds::{
    attractor_bounds, grashof, h_max, mu_min, phi_min_check, verify_functional_inequalities,
    PhysicalSetup, Regime, ALL_REGIMES,
};
use nudge2d::observers::{measure_constants, Observer, ObserverKind};
use nudge2d::solver::{
    make_forcing, taylor_green_exact, Forcing, ForcingKind, SolverParams, TimeStepper,
};
use nudge2d::synth::{self, SpectrumSpec};
use nudge2d::{C64, Grid, SpectralField};
use nudge2d_cli::commands::run_one;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Default)]
struct Tally {
    rows: usize,
    unexpected: usize,
    expected_failures: usize,
}

impl Tally {
    fn row(&mut self, label: &str, passed: bool, expect_pass: bool, detail: &str) {
        let verdict = if passed { "PASS" } else { "FAIL" };
        let suffix = match (passed, expect_pass) {
            (false, false) => "  [expected failure, see note]",
            (true, false) => "  [UNEXPECTED PASS: remove the stale note]",
            (false, true) => "  [UNEXPECTED]",
            (true, true) => "",
        };
        println!("{label:<46} {verdict}  {detail}{suffix}");
        self.rows += 1;
        if passed != expect_pass {
            self.unexpected += 1;
        }
        if !passed && !expect_pass {
            self.expected_failures += 1;
        }
    }

    fn note(&self, text: &str) {
        for line in text.lines() {
            println!("       {line}");
        }
    }
}

fn main() {
    println!("nudge2d full-system checks");
    let mut tally = Tally::default();
    let clock = Instant::now();
    for (label, run) in CHECKS {
        if let Err(e) = run(&mut tally) {
            tally.row(label, false, true, &format!("errored: {e:#}"));
        }
    }
    println!(
        "{} checks: {} off-expectation, {} expected failure(s), {:.0}s total",
        tally.rows,
        tally.unexpected,
        tally.expected_failures,
        clock.elapsed().as_secs_f64()
    );
    if tally.unexpected > 0 {
        std::process::exit(1);
    }
}

type CheckFn = fn(&mut Tally) -> Result<()>;

const CHECKS: [(&str, CheckFn); 9] = [
    ("1  decaying vortex matches its formula", c1_vortex),
    ("2  divergence, mean, symmetry along a run", c2_invariants),
    ("3  exact start stays synchronized", c3_exact_start),
    ("4  one-component estimation", c4_one_component),
    ("5  observer projections and constants", c5_observers),
    ("6  bound formulas vs direct evaluation", c6_formulas),
    ("7  scalar minimum bound on random gammas", c7_phi_property),
    ("8  spectral gap and interpolation constants", c8_inequalities),
    ("9  identical runs write identical bytes", c9_determinism),
];

/// Viscously decaying vortex against its closed-form solution: small error at
/// the fine step, near-second-order convergence when the step is halved.
fn c1_vortex(t: &mut Tally) -> Result<()> {
    let clock = Instant::now();
    let grid = Grid::new(64, 2.0 * PI)?;
    let nu = 0.1;
    let rel_err = |dt: f64| -> Result<f64> {
        let steps = (1.0 / dt).round() as usize;
        let mut state = taylor_green_exact(grid, nu, 0.0)?;
        let forcing = Forcing::zero(grid);
        let mut stepper = TimeStepper::new(grid, SolverParams::new(nu, dt)?);
        for _ in 0..steps {
            stepper.step(&mut state, &forcing, None)?;
        }
        let exact = taylor_green_exact(grid, nu, steps as f64 * dt)?;
        Ok(state.sub(&exact)?.norm_l2() / exact.norm_l2())
    };
    let fine = rel_err(1e-3)?;
    let coarse = rel_err(2e-3)?;
    let order = (coarse / fine).log2();
    let secs = clock.elapsed().as_secs_f64();
    t.row(
        "1  decaying vortex matches its formula",
        fine <= 1e-5 && order >= 1.8 && secs <= 10.0,
        true,
        &format!("rel err {fine:.2e} (<= 1e-5), order {order:.2} (>= 1.8), {secs:.1}s (<= 10s)"),
    );
    Ok(())
}

/// Every sampled state of a forced run keeps scaled divergence at roundoff,
/// the mean coefficient exactly zero, and conjugate symmetry exact.
fn c2_invariants(t: &mut Tally) -> Result<()> {
    let grid = Grid::new(32, 2.0 * PI)?;
    let nu = 0.05;
    let forcing = make_forcing(grid, nu, 20.0, ForcingKind::LowModeRandom { seed: 3 })?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut state = synth::normalized_to(
        synth::random_velocity(grid, SpectrumSpec { kmax: 10, decay: 2.0 }, &mut rng),
        1.0,
    );
    state.dealias_in_place();
    state.project_divergence_free();
    let mut stepper = TimeStepper::new(grid, SolverParams::new(nu, 0.01)?);
    let mut max_div = 0.0f64;
    let mut mean_exact = true;
    let mut symmetry_exact = true;
    for step in 1..=300 {
        stepper.step(&mut state, &forcing, None)?;
        if step % 10 == 0 {
            max_div = max_div.max(state.divergence_ratio());
            for com in [&state.u1, &state.u2] {
                let m = com.mean_coeff();
                mean_exact &= m.re == 0.0 && m.im == 0.0;
                symmetry_exact &= com.hermitian_asymmetry() == 0.0;
            }
        }
    }
    t.row(
        "2  divergence, mean, symmetry along a run",
        max_div <= 1e-10 && mean_exact && symmetry_exact,
        true,
        &format!(
            "max scaled div {max_div:.1e} (<= 1e-10), mean exact {mean_exact}, symmetry exact {symmetry_exact}"
        ),
    );
    Ok(())
}

/// Starting the estimator on the reference keeps the error at roundoff for
/// the whole run: two solutions with the same data are the same solution.
fn c3_exact_start(t: &mut Tally) -> Result<()> {
    let cfg = AssimilationConfig {
        n: 32,
        l: 2.0 * PI,
        nu: 0.05,
        dt: 0.01,
        forcing: ForcingKind::LowModeRandom { seed: 9 },
        grashof: 50.0,
        t_spin: 1.0,
        t_assim: 2.0,
        mu: 20.0,
        observer: ObserverKind::FourierModes,
        h: 0.125,
        observed_component: 2,
        u0: EstimatorInit::Exact,
        ref_init: ReferenceInit::Random { amplitude: 0.5 },
        record_every: 1,
        seed: 5,
        c: 1.0,
        c_tilde: 1.0,
    };
    let out = assimilation::run_assimilation(&cfg)?;
    let worst = out.series.err_l2.iter().cloned().fold(0.0f64, f64::max);
    t.row(
        "3  exact start stays synchronized",
        worst <= 1e-12 && out.metadata.status == RunStatus::Ok && out.metadata.max_div_ratio <= 1e-10,
        true,
        &format!(
            "max err_l2 {worst:.1e} (<= 1e-12) over {} samples, max div {:.1e}",
            out.series.len(),
            out.metadata.max_div_ratio
        ),
    );
    Ok(())
}

/// Reconstruction from coarse observations of the second velocity component
/// only. 4a/4b: at the pinned single-shear point the nudged error collapses
/// and the regression numbers hold. 4c asserts the control clause as stated
/// at that same point; it cannot pass there (see the printed note). 4d shows
/// both clauses holding together at a strongly forced, genuinely
/// two-component flow.
fn c4_one_component(t: &mut Tally) -> Result<()> {
    let clock = Instant::now();
    let base = AssimilationConfig {
        n: 64,
        l: 2.0 * PI,
        nu: 0.4,
        dt: 0.01,
        forcing: ForcingKind::Kolmogorov,
        grashof: 1.0,
        t_spin: 25.0,  // ten viscous times
        t_assim: 50.0, // twenty viscous times
        mu: 50.0,      // mu * dt = 0.5
        observer: ObserverKind::FourierModes,
        h: 0.125, // observes |k| <= 8
        observed_component: 2,
        u0: EstimatorInit::Zero,
        ref_init: ReferenceInit::Rest,
        record_every: 10,
        seed: 1,
        c: 1.0,
        c_tilde: 1.0,
    };
    let nudged = assimilation::run_assimilation(&base)?;
    let control_cfg = AssimilationConfig { mu: 0.0, ..base.clone() };
    let control = assimilation::run_assimilation(&control_cfg)?;
    let secs = clock.elapsed().as_secs_f64();

    let window = assimilation::decaying_window(&nudged.series).context("no decaying window")?;
    let fit = assimilation::fit_decay_rate(&nudged.series, window)?;
    let orders = assimilation::decay_orders(&nudged.series).context("empty series")?;
    let nu_lam = base.nu * Grid::new(base.n, base.l)?.lambda1();
    let statuses_ok =
        nudged.metadata.status == RunStatus::Ok && control.metadata.status == RunStatus::Ok;

    t.row(
        "4a nudged error collapses (pinned point)",
        orders >= 6.0
            && fit.rate <= -0.5 * nu_lam
            && fit.r_squared >= 0.95
            && statuses_ok
            && secs <= 60.0,
        true,
        &format!(
            "orders {orders:.1} (>= 6), rate {:.4} (<= {:.2}), r2 {:.4} (>= 0.95), both runs {secs:.0}s (<= 60s)",
            fit.rate,
            -0.5 * nu_lam,
            fit.r_squared
        ),
    );

    // Frozen from the first verified run of this configuration.
    let err0 = nudged.series.err_l2[0];
    t.row(
        "4b regression numbers of the first run",
        (err0 - 0.024999999999999984).abs() <= 1e-12
            && (fit.rate - -6.4284).abs() <= 0.01
            && fit.r_squared >= 0.999
            && (window.1 - 5.3).abs() <= 0.5
            && orders == f64::INFINITY,
        true,
        &format!(
            "err0 {err0:.17}, rate {:.4} (pin -6.4284), window end {:.1} (pin 5.3), exact zero reached {}",
            fit.rate,
            window.1,
            orders == f64::INFINITY
        ),
    );

    let c_first = control.series.err_l2[0];
    let c_final = *control.series.err_l2.last().context("empty control series")?;
    let coincide = control.series.err_l2 == nudged.series.err_l2;
    t.row(
        "4c control keeps its error (pinned point)",
        c_final >= 0.1 * c_first && c_final <= 10.0 * c_first,
        false,
        &format!(
            "final {c_final:.3e} vs initial {c_first:.3e}, control and nudged series coincide: {coincide}"
        ),
    );
    t.note(
        "note: at this forcing strength the flow is a single shear band whose second velocity\n\
         component is identically zero, so the feedback term has no signal and the nudged and\n\
         control runs integrate identical equations from identical starts. Both errors decay at\n\
         the viscous rate of the forced mode and reach exact zero; no faithful implementation\n\
         can keep the control error near its initial size here. Check 4d shows the decay and\n\
         the control clause holding together once the forcing sustains a two-component flow.",
    );

    let clock2 = Instant::now();
    let demo = AssimilationConfig {
        nu: 0.02,
        grashof: 1500.0,
        t_spin: 15.0,
        t_assim: 15.0,
        seed: 11,
        ref_init: ReferenceInit::Random { amplitude: 0.5 },
        ..base
    };
    let demo_nudged = assimilation::run_assimilation(&demo)?;
    let demo_control_cfg = AssimilationConfig { mu: 0.0, ..demo.clone() };
    let demo_control = assimilation::run_assimilation(&demo_control_cfg)?;
    let secs2 = clock2.elapsed().as_secs_f64();

    let d0 = demo_nudged.series.err_l2[0];
    let d_final = *demo_nudged.series.err_l2.last().context("empty series")?;
    let dc0 = demo_control.series.err_l2[0];
    let dc_final = *demo_control.series.err_l2.last().context("empty series")?;
    let demo_statuses_ok = demo_nudged.metadata.status == RunStatus::Ok
        && demo_control.metadata.status == RunStatus::Ok;
    t.row(
        "4d decay vs control at strong forcing",
        d0 == dc0
            && d_final <= d0 / 20.0
            && dc_final >= 0.1 * dc0
            && dc_final <= 10.0 * dc0
            && demo_statuses_ok,
        true,
        &format!(
            "nudged {d0:.2e} -> {d_final:.2e} ({:.0}x down), control -> {dc_final:.2e} (within 10x), {secs2:.0}s",
            d0 / d_final
        ),
    );
    Ok(())
}

/// Observer algebra on a 100-field ensemble: the mode projection is
/// idempotent and orthogonal, every observer is linear, and the measured
/// approximation constant moves by at most 2x when h halves.
fn c5_observers(t: &mut Tally) -> Result<()> {
    let clock = Instant::now();
    let grid = Grid::new(64, 2.0 * PI)?;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let spec = SpectrumSpec { kmax: 10, decay: 2.0 };
    let ensemble: Vec<SpectralField> = (0..100)
        .map(|_| synth::random_scalar(grid, spec, &mut rng))
        .collect();

    let modes = Observer::new(ObserverKind::FourierModes, grid, 0.125)?;
    let mut idem = 0.0f64;
    let mut orth = 0.0f64;
    for w in &ensemble {
        let iw = modes.apply(w)?;
        idem = idem.max(modes.apply(&iw)?.sub(&iw)?.norm_l2() / w.norm_l2());
        orth = orth.max(w.sub(&iw)?.inner_l2(&iw).abs() / (w.norm_l2() * w.norm_l2()));
    }

    let kinds = [
        ObserverKind::FourierModes,
        ObserverKind::VolumeElements,
        ObserverKind::Nodal,
    ];
    let mut linear = 0.0f64;
    for kind in kinds {
        let obs = Observer::new(kind, grid, 0.125)?;
        for pair in ensemble.chunks(2).take(10) {
            let (f, g) = (&pair[0], &pair[1]);
            let mut combo = f.clone();
            combo.scale_in_place(2.5);
            combo.add_scaled(-1.25, g);
            let mut rhs = obs.apply(f)?;
            rhs.scale_in_place(2.5);
            rhs.add_scaled(-1.25, &obs.apply(g)?);
            linear = linear.max(obs.apply(&combo)?.sub(&rhs)?.norm_l2() / combo.norm_l2());
        }
    }

    let mut drift_ok = true;
    let mut drift_detail = String::new();
    for kind in kinds {
        let coarse = measure_constants(&Observer::new(kind, grid, 0.25)?, &ensemble)?.c0_hat;
        let fine = measure_constants(&Observer::new(kind, grid, 0.125)?, &ensemble)?.c0_hat;
        let ratio = coarse / fine;
        drift_ok &= (0.5..=2.0).contains(&ratio);
        write!(drift_detail, " {} {ratio:.2}", kind.name())?;
    }
    let secs = clock.elapsed().as_secs_f64();

    t.row(
        "5  observer projections and constants",
        idem <= 1e-10 && orth <= 1e-10 && linear <= 1e-10 && drift_ok && secs <= 30.0,
        true,
        &format!(
            "idempotent {idem:.1e}, orthogonal {orth:.1e}, linear {linear:.1e} (all <= 1e-10); c0 h-drift{drift_detail}; {secs:.1}s (<= 30s)"
        ),
    );
    Ok(())
}

/// Every closed-form bound against direct evaluation, then order and scaling
/// behavior on 1000 random parameter points.
fn c6_formulas(t: &mut Tally) -> Result<()> {
    let clock = Instant::now();
    let rel = |got: f64, want: f64| {
        if want == 0.0 {
            got.abs()
        } else {
            ((got - want) / want).abs()
        }
    };
    let mut failures: Vec<String> = Vec::new();
    let item = |name: &str, got: f64, want: f64, failures: &mut Vec<String>| {
        if rel(got, want) > 1e-12 {
            failures.push(format!("{name}: got {got:.17e} want {want:.17e}"));
        }
    };

    // Forcing strength.
    let unit = PhysicalSetup::new(1.0, 1.0, 2.0)?;
    item("g_direct", grashof(&unit), 2.0, &mut failures);
    item("g_zero", grashof(&PhysicalSetup::new(1.0, 1.0, 0.0)?), 0.0, &mut failures);
    item(
        "g_hand",
        grashof(&PhysicalSetup::new(0.1, 1.0, 0.05)?),
        5.0,
        &mut failures,
    );

    // Gain bounds at hand-checked points.
    let g1 = PhysicalSetup::new(1.0, 1.0, 1.0)?;
    let g2 = PhysicalSetup::new(1.0, 1.0, 2.0)?;
    item("gain_a", mu_min(&g1, Regime::TypeIDirichlet).value.value(), 4.0, &mut failures);
    item("gain_b", mu_min(&g1, Regime::TypeIPeriodic).value.value(), 2.0, &mut failures);
    item("gain_c", mu_min(&g2, Regime::TypeIIPeriodic).value.value(), 24.0, &mut failures);
    let k1 = 1.0 + (1.0 + E) * (1.0 + 2.0 * E);
    item(
        "gain_d",
        mu_min(&g1, Regime::TypeIIDirichlet).value.value(),
        2.0 * k1 * k1.ln(),
        &mut failures,
    );

    // The large combination K: direct at 1, log-space at 4, zero at 0.
    item("k_unit", nudge2d::bounds::k_of_g(&g1).value(), k1, &mut failures);
    item(
        "k_zero",
        nudge2d::bounds::k_of_g(&PhysicalSetup::new(1.0, 1.0, 0.0)?).value(),
        0.0,
        &mut failures,
    );
    let g4 = PhysicalSetup::new(1.0, 1.0, 4.0)?;
    let e_t = 256.0f64.exp();
    let k4_direct = 16.0 * (1.0 + (1.0 + 16.0 * e_t) * (1.0 + e_t + 256.0 * e_t));
    item("k_large_ln", nudge2d::bounds::k_of_g(&g4).ln(), k4_direct.ln(), &mut failures);

    // Resolution bound.
    item("h_a", h_max(&PhysicalSetup::new(1.0, 1.0, 1.0)?, 100.0)?, 0.1, &mut failures);
    let c0_two = PhysicalSetup::new(1.0, 1.0, 1.0)?.with_constants(1.0, 1.0, 2.0)?;
    item("h_b", h_max(&c0_two, 1.0)?, 0.5, &mut failures);

    // Flow-size bounds: two hand points, then all seven against direct
    // arithmetic at a generic setup where nothing overflows.
    let b3 = attractor_bounds(&PhysicalSetup::new(1.0, 1.0, 3.0)?, 1.0)?;
    item("size_h1_per", b3.periodic_h1.value(), 18.0, &mut failures);
    let b1 = attractor_bounds(&g1, 1.0)?;
    item("size_h2_per", b1.periodic_h2.value(), 16.0, &mut failures);
    let (nu, lam, ct, tau, g) = (0.7, 1.3, 1.1, 2.5, 2.0);
    let generic = PhysicalSetup::new(nu, lam, g * nu * nu * lam)?.with_constants(1.0, ct, 1.0)?;
    let bg = attractor_bounds(&generic, tau)?;
    let eg = (g * g * g * g).exp();
    item("size_l2_dir", bg.dirichlet_l2.value(), 2.0 * nu * nu * g * g, &mut failures);
    item(
        "size_h1_dir",
        bg.dirichlet_h1.value(),
        ct * nu * nu * lam * g * g * eg,
        &mut failures,
    );
    item(
        "size_ih2_dir",
        bg.dirichlet_int_h2.value(),
        (ct * eg + tau * nu * lam) * nu * lam * g * g,
        &mut failures,
    );
    item(
        "size_h2_dir",
        bg.dirichlet_h2.value(),
        ct * nu * nu * lam * lam * g * g
            * (1.0 + (1.0 + g * g * eg) * (1.0 + eg + g * g * g * g * eg)),
        &mut failures,
    );
    item("size_h1_per_g", bg.periodic_h1.value(), 2.0 * nu * nu * lam * g * g, &mut failures);
    item(
        "size_ih2_per",
        bg.periodic_int_h2.value(),
        2.0 * (1.0 + tau * nu * lam) * nu * lam * g * g,
        &mut failures,
    );
    item(
        "size_h2_per_g",
        bg.periodic_h2.value(),
        ct * nu * nu * lam * lam * (1.0 + g).powi(4),
        &mut failures,
    );
    let b0 = attractor_bounds(&PhysicalSetup::new(0.5, 2.0, 0.0)?.with_constants(1.0, 1.3, 1.0)?, 2.0)?;
    for (name, v) in [
        ("zero_l2", b0.dirichlet_l2.value()),
        ("zero_h1", b0.dirichlet_h1.value()),
        ("zero_ih2", b0.dirichlet_int_h2.value()),
        ("zero_h2", b0.dirichlet_h2.value()),
        ("zero_h1p", b0.periodic_h1.value()),
        ("zero_ih2p", b0.periodic_int_h2.value()),
    ] {
        item(name, v, 0.0, &mut failures);
    }
    item("zero_h2p", b0.periodic_h2.value(), 1.3 * 0.25 * 4.0, &mut failures);

    // Scalar minimum: tight points and a below-one gamma.
    let p1 = phi_min_check(1.0, 4001)?;
    item("phi_one_bound", p1.analytic_bound, 0.0, &mut failures);
    item("phi_one_min", p1.grid_min, 0.0, &mut failures);
    let pe = phi_min_check(E, 4001)?;
    item("phi_e_bound", pe.analytic_bound, -E, &mut failures);
    item("phi_e_min", pe.grid_min, -E, &mut failures);
    let ph = phi_min_check(0.5, 4001)?;
    item("phi_half_min", ph.grid_min, 0.5, &mut failures);
    if ph.grid_min < ph.analytic_bound {
        failures.push("phi_half under bound".into());
    }

    // Order and scaling behavior on sampled parameters.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..1000 {
        let nu = rng.random_range(0.05..2.0);
        let lam = rng.random_range(0.25..4.0);
        let ga = rng.random_range(1.0..3.4);
        let gb = ga * rng.random_range(1.01..1.5);
        let sa = PhysicalSetup::new(nu, lam, ga * nu * nu * lam)?;
        let sb = PhysicalSetup::new(nu, lam, gb * nu * nu * lam)?;
        for regime in ALL_REGIMES {
            if mu_min(&sb, regime).value.ln() <= mu_min(&sa, regime).value.ln() {
                failures.push(format!("gain bound not increasing in g at sample {i}"));
            }
        }
        if mu_min(&sa, Regime::TypeIDirichlet).value.ln()
            < mu_min(&sa, Regime::TypeIPeriodic).value.ln()
        {
            failures.push(format!("one-sided channel bound below periodic at sample {i}"));
        }
        let mu_a = rng.random_range(0.5..50.0);
        let mu_b = mu_a * rng.random_range(1.1..20.0);
        if rel(h_max(&sa, mu_a)? * mu_a.sqrt(), h_max(&sa, mu_b)? * mu_b.sqrt()) > 1e-12 {
            failures.push(format!("h_max sqrt(mu) not constant at sample {i}"));
        }
        let a = rng.random_range(0.1..10.0);
        let scaled = PhysicalSetup::new(a * nu, lam, a * a * (ga * nu * nu * lam))?;
        if rel(grashof(&scaled), grashof(&sa)) > 1e-12 {
            failures.push(format!("g not scale invariant at sample {i}"));
        }
        for regime in ALL_REGIMES {
            let shift = mu_min(&scaled, regime).value.ln() - mu_min(&sa, regime).value.ln();
            if (shift - a.ln()).abs() > 1e-9 {
                failures.push(format!("gain bound not linear in viscosity scale at sample {i}"));
            }
        }
    }

    let secs = clock.elapsed().as_secs_f64();
    failures.truncate(3);
    t.row(
        "6  bound formulas vs direct evaluation",
        failures.is_empty() && secs <= 5.0,
        true,
        &if failures.is_empty() {
            format!("33 pinned values within 1e-12, 1000 sampled points ordered, {secs:.1}s (<= 5s)")
        } else {
            failures.join("; ")
        },
    );
    Ok(())
}

/// Dense-grid minimum of r - gamma(1 + ln r) on r >= 1 never undercuts
/// -gamma ln gamma, and is attained exactly at the two analytic points.
fn c7_phi_property(t: &mut Tally) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let gamma = 100.0 * rng.random_range(0.0f64..1.0).max(1e-12);
        let chk = phi_min_check(gamma, 4001)?;
        worst = worst.min(chk.grid_min - chk.analytic_bound);
    }
    let one = phi_min_check(1.0, 20_001)?;
    let at_e = phi_min_check(E, 20_001)?;
    let tight = one.grid_min == 0.0
        && one.analytic_bound == 0.0
        && at_e.grid_min == at_e.analytic_bound
        && at_e.argmin == E;
    t.row(
        "7  scalar minimum bound on random gammas",
        worst >= -1e-9 && tight,
        true,
        &format!("worst margin {worst:.1e} (>= -1e-9) over 1000 gammas, tight at 1 and e: {tight}"),
    );
    Ok(())
}

/// Spectral-gap inequalities hold with equality on the gravest mode, and the
/// measured quartic interpolation constant is grid-independent.
fn c8_inequalities(t: &mut Tally) -> Result<()> {
    let mut c_l = Vec::new();
    let mut poincare_ok = true;
    let mut worst = 0.0f64;
    for n in [64usize, 128] {
        let grid = Grid::new(n, 2.0 * PI)?;
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let ensemble: Vec<SpectralField> = (0..20)
            .map(|_| synth::random_scalar(grid, SpectrumSpec { kmax: 10, decay: 2.0 }, &mut rng))
            .collect();
        let rep = verify_functional_inequalities(&ensemble)?;
        worst = worst.max(rep.poincare_l2_max.max(rep.poincare_h1_max));
        poincare_ok &= rep.poincare_l2_max <= 1.0 + 1e-10 && rep.poincare_h1_max <= 1.0 + 1e-10;
        c_l.push(rep.c_l_estimate);
    }
    let grid = Grid::new(64, 2.0 * PI)?;
    let mut lowest = SpectralField::zeros(grid);
    lowest.set_mode_pair(1, 0, C64::new(0.0, -0.5));
    let low_rep = verify_functional_inequalities(&[lowest])?;
    let equality = (low_rep.poincare_l2_max - 1.0).abs() <= 1e-10;
    let drift = (c_l[1] / c_l[0] - 1.0).abs();
    t.row(
        "8  spectral gap and interpolation constants",
        poincare_ok && equality && drift <= 0.2,
        true,
        &format!(
            "max ratio {worst:.12} (<= 1+1e-10), gravest-mode equality {equality}, c_L {:.3} vs {:.3} (drift {:.0}%)",
            c_l[0],
            c_l[1],
            100.0 * drift
        ),
    );
    Ok(())
}

/// Two runs of the same configuration write byte-identical series files.
fn c9_determinism(t: &mut Tally) -> Result<()> {
    let cfg = AssimilationConfig {
        n: 32,
        l: 2.0 * PI,
        nu: 0.05,
        dt: 0.01,
        forcing: ForcingKind::LowModeRandom { seed: 2 },
        grashof: 50.0,
        t_spin: 1.0,
        t_assim: 1.0,
        mu: 20.0,
        observer: ObserverKind::FourierModes,
        h: 0.125,
        observed_component: 2,
        u0: EstimatorInit::Zero,
        ref_init: ReferenceInit::Random { amplitude: 0.5 },
        record_every: 1,
        seed: 7,
        c: 1.0,
        c_tilde: 1.0,
    };
    let dir_a = tempfile::tempdir()?;
    let dir_b = tempfile::tempdir()?;
    run_one(&cfg, dir_a.path(), "a")?;
    run_one(&cfg, dir_b.path(), "b")?;
    let bytes_a = std::fs::read(dir_a.path().join("run.csv"))?;
    let bytes_b = std::fs::read(dir_b.path().join("run.csv"))?;
    t.row(
        "9  identical runs write identical bytes",
        !bytes_a.is_empty() && bytes_a == bytes_b,
        true,
        &format!("{} bytes, identical: {}", bytes_a.len(), bytes_a == bytes_b),
    );
    Ok(())
}
