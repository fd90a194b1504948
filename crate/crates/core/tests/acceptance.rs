//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line, captured or not.

use std::f64::consts::{E, PI};
use std::time::Instant;

use decoh_core::constants::PhysicalConstants;
use decoh_core::decoherence::*;
use decoh_core::density::density_matrix;
use decoh_core::inference::*;
use decoh_core::io::{csv_string, json_string};
use decoh_core::regime::ValidatorSettings;
use decoh_core::simulator::*;
use decoh_core::sweep::*;
use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn consts() -> PhysicalConstants {
    PhysicalConstants::codata2018()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn planck_anchor() -> Outcome {
    let c = consts();
    let mp = c.planck_mass();
    let alpha = c.gravitational_coupling(mp).map_err(|e| e.to_string())?;
    ensure((alpha - 1.0).abs() < 1e-12, || format!("alpha_G(m_P) = {alpha}"))?;
    let ug = c.planck_mass_micrograms();
    let amu = c.planck_mass_amu();
    ensure(rel(ug, 21.0) < 0.05, || format!("m_P = {ug} ug"))?;
    ensure(rel(amu, 1.3e19) < 0.05, || format!("m_P = {amu:e} amu"))?;
    Ok(format!("alpha_G(m_P) - 1 = {:.1e}, m_P = {ug:.2} ug = {amu:.4e} amu", alpha - 1.0))
}

fn exponent_laws() -> Outcome {
    let c = consts();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 2000;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let cfg = ExperimentConfig {
            mass_kg: 10f64.powf(rng.gen_range(-25.0..-5.0)),
            charge_c: rng.gen_range(1.0..1e4) * c.elementary_charge,
            beta: Some(rng.gen_range(1e-4..0.45)),
            model: ModelConstants {
                c_em: rng.gen_range(0.1..10.0),
                c_grav: rng.gen_range(0.1..10.0),
                ..Default::default()
            },
            ..Default::default()
        };
        let b = cfg.beta.unwrap();
        let em = |cfg: &ExperimentConfig| em_decoherence(cfg, &c).map(|r| r.ln_gamma);
        let gr = |cfg: &ExperimentConfig| grav_decoherence(cfg, &c).map(|r| r.ln_gamma);
        let e = |x: decoh_core::Error| x.to_string();
        let b2 = ExperimentConfig { beta: Some(2.0 * b), ..cfg.clone() };
        let m2 = ExperimentConfig { mass_kg: 2.0 * cfg.mass_kg, ..cfg.clone() };
        let (e1, g1) = (em(&cfg).map_err(e)?, gr(&cfg).map_err(e)?);
        let ratio = (c.gravitational_coupling(cfg.mass_kg).map_err(e)? / c.em_coupling(cfg.charge_c))
            * (cfg.model.c_grav / cfg.model.c_em)
            * (PI / 2.0)
            * b
            * b;
        for err in [
            rel(em(&b2).map_err(e)? / e1, 4.0),
            rel(gr(&b2).map_err(e)? / g1, 16.0),
            rel(gr(&m2).map_err(e)? / g1, 4.0),
            rel(g1 / e1, ratio),
        ] {
            worst = worst.max(err);
        }
    }
    ensure(worst < 1e-10, || format!("worst relative error {worst:e}"))?;
    Ok(format!("{n} configs, worst relative error {worst:.1e}"))
}

fn density_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 10_000;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        // every tenth sample on the boundary |Γ| = 1
        let r = if i % 10 == 0 { 1.0 } else { rng.gen::<f64>().sqrt() };
        let g = Complex64::from_polar(r, rng.gen_range(-PI..PI));
        let rho = density_matrix(g).map_err(|e| e.to_string())?;
        let [hi, lo] = rho.eigenvalues();
        let e = rho.entries();
        let m = Matrix2::new(e[0][0], e[0][1], e[1][0], e[1][1]);
        let herm = (m - m.adjoint()).norm();
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let mag = g.norm();
        for err in [
            herm,
            (rho.trace() - 1.0).norm(),
            (hi - 0.5 * (1.0 + mag)).abs(),
            (lo - 0.5 * (1.0 - mag)).abs(),
            (ev[0] - hi).abs(),
            (ev[1] - lo).abs(),
            (-ev[1]).max(0.0),
        ] {
            worst = worst.max(err);
        }
    }
    ensure(worst < 1e-12, || format!("worst deviation {worst:e}"))?;
    Ok(format!("{n} matrices, worst deviation {worst:.1e}"))
}

fn mc_oracle() -> Outcome {
    let fringe = FringeModel::new(1.0, 5.0, 0.0).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (i, g) in [0.1, 1.0 / E, 0.5, 0.9].into_iter().enumerate() {
        let setup = SimulationSetup::from_gamma(g, fringe).map_err(|e| e.to_string())?;
        let s = simulate(&setup, 1_000_000, 400 + i as u64, &SimulationOptions::default())
            .map_err(|e| e.to_string())?;
        let v = s.visibility.ok_or("no visibility")?;
        let zv = (v.value - g) / v.standard_error;
        let zf = (s.coherent_fraction - (-s.expected_quanta).exp()) / s.coherent_fraction_se;
        ensure(zv.abs() < 3.0 && zf.abs() < 3.0, || {
            format!("gamma {g:.4}: V = {:.5} (z = {zv:.2}), fraction z = {zf:.2}", v.value)
        })?;
        parts.push(format!("{g:.3}: z_V {zv:+.2} z_f {zf:+.2}"));
    }
    Ok(parts.join("; "))
}

fn trough_correlation_limit() -> Outcome {
    let fringe = FringeModel::new(1.0, 5.0, 0.0).map_err(|e| e.to_string())?;
    let setup = SimulationSetup::from_gamma(0.5, fringe).map_err(|e| e.to_string())?;
    let opts = SimulationOptions { trough_window: Some(fringe.spacing / 200.0), ..Default::default() };
    let s = simulate(&setup, 10_000_000, 5, &opts).map_err(|e| e.to_string())?;
    let p = s.trough.probability.ok_or("no events in trough windows")?;
    ensure(p >= 0.99, || format!("P(emission | trough) = {p}"))?;
    Ok(format!(
        "P(emission | trough) = {p:.6} from {} window events",
        s.trough.window_events
    ))
}

fn planck_grid(c: &PhysicalConstants) -> Vec<(f64, f64)> {
    let mp = c.planck_mass();
    let mut g = Vec::new();
    for m in log_space(0.3 * mp, 3.0 * mp, 4) {
        for b in log_space(0.2, 0.8, 4) {
            g.push((m, b));
        }
    }
    g
}

fn hbar_recovery() -> Outcome {
    let c = consts();
    let e = |x: decoh_core::Error| x.to_string();
    let opts = SimulationOptions::default();
    let template = ExperimentConfig::default();

    // noiseless
    let mp = c.planck_mass();
    let exact: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 4.0]
        .iter()
        .flat_map(|&m| [0.2, 0.3, 0.5, 0.8].map(|b| (m * mp, b)))
        .collect();
    let data = generate_dataset(&exact, &template, Channel::Gravitational, 0, 0, GenerationMode::Analytic, &c, &opts)
        .map_err(e)?;
    let fit = fit_power_law(&data.dataset, &c, 1.0, FitMode::Free).map_err(e)?;
    ensure(
        (fit.exponent_mass - 2.0).abs() < 1e-6
            && (fit.exponent_beta - 4.0).abs() < 1e-6
            && rel(fit.hbar_estimate, c.hbar) < 1e-6,
        || format!("noiseless fit {:?}", (fit.exponent_mass, fit.exponent_beta, fit.hbar_estimate)),
    )?;
    let noiseless = rel(fit.hbar_estimate, c.hbar);

    // Monte Carlo, 10 seeds
    let mut worst: f64 = 0.0;
    let mut mean = 0.0;
    for seed in 0..10 {
        let data = generate_dataset(
            &planck_grid(&c),
            &template,
            Channel::Gravitational,
            1_000_000,
            seed,
            GenerationMode::MonteCarlo,
            &c,
            &opts,
        )
        .map_err(e)?;
        let fit = fit_power_law(&data.dataset, &c, 1.0, FitMode::Free).map_err(e)?;
        let r = fit.hbar_estimate / c.hbar - 1.0;
        ensure(r.abs() < 0.05, || format!("seed {seed}: hbar off by {:.2}%", 100.0 * r))?;
        ensure(
            (fit.exponent_mass - 2.0).abs() < 0.1 && (fit.exponent_beta - 4.0).abs() < 0.1,
            || format!("seed {seed}: exponents ({}, {})", fit.exponent_mass, fit.exponent_beta),
        )?;
        worst = worst.max(r.abs());
        mean += r / 10.0;
    }

    // electromagnetic data
    let charged = ExperimentConfig { charge_c: 30.0 * c.elementary_charge, ..template };
    let em_pts: Vec<(f64, f64)> = [1e-20, 1e-15]
        .iter()
        .flat_map(|&m| log_space(0.05, 0.4, 6).into_iter().map(move |b| (m, b)))
        .collect();
    let em = generate_dataset(&em_pts, &charged, Channel::Em, 1_000_000, 1, GenerationMode::MonteCarlo, &c, &opts)
        .map_err(e)?;
    let fit = fit_power_law(&em.dataset, &c, 1.0, FitMode::Free).map_err(e)?;
    let se = fit.covariance[2][2].sqrt();
    ensure(
        (fit.exponent_beta - 2.0).abs() < 3.0 * se && (fit.exponent_beta - 4.0).abs() > 10.0 * se,
        || format!("EM beta exponent {} +/- {se}", fit.exponent_beta),
    )?;

    Ok(format!(
        "noiseless hbar err {noiseless:.1e}; MC worst {:.2}%, mean {:+.3}%; EM beta exponent {:.3} +/- {se:.3}",
        100.0 * worst,
        100.0 * mean,
        fit.exponent_beta
    ))
}

fn feasibility_frontier() -> Outcome {
    let c = consts();
    let e = |x: decoh_core::Error| x.to_string();
    let mut worst: f64 = 0.0;
    for beta in log_space(1e-9, 1.0, 50) {
        let m = threshold_mass(1.0, beta, 1.0, &c).map_err(e)?;
        let half = threshold_mass(1.0, beta / 2.0, 1.0, &c).map_err(e)?;
        worst = worst.max(rel(half, 4.0 * m));
    }
    ensure(worst < 1e-12, || format!("m*(beta/2)/4m*(beta) off by {worst:e}"))?;

    let at_planck = grav_exponent(c.gravitational_coupling(c.planck_mass()).map_err(e)?, 1.0, 1.0);
    ensure((at_planck + 1.0).abs() < 1e-12, || format!("ln gamma(m_P, 1) = {at_planck}"))?;

    let rows = run_scenarios(&c, 1.0).map_err(e)?;
    let mut heaviest_small: f64 = 0.0;
    let mut planck = None;
    for r in rows.iter().filter(|r| r.beta == 0.9) {
        if r.mass_amu <= 1e16 * (1.0 + 1e-12) {
            heaviest_small = heaviest_small.max(r.ln_gamma_grav.abs());
        } else {
            planck = Some(r.ln_gamma_grav.abs());
        }
    }
    let planck = planck.ok_or("no Planck-scale scenario")?;
    ensure(heaviest_small < 1e-6, || format!("|ln gamma| = {heaviest_small:e} at <= 1e16 amu"))?;
    ensure((0.5..=1.5).contains(&planck), || format!("|ln gamma| = {planck} at Planck scale"))?;
    Ok(format!(
        "scaling err {worst:.1e}; beta = 0.9: max |ln G| {heaviest_small:.3e} (<= 1e16 amu), {planck:.4} (1.3e19 amu)"
    ))
}

fn determinism() -> Outcome {
    let c = consts();
    let e = |x: decoh_core::Error| x.to_string();
    let pool = |n: usize| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();

    let fringe = FringeModel::new(1.0, 5.0, 0.3).map_err(e)?;
    let setup = SimulationSetup::from_gamma(0.6, fringe).map_err(e)?;
    let events = |threads| -> Result<(String, String), String> {
        let o = SimulationOptions { threads: Some(threads), ..Default::default() };
        let (ev, s) = sample_events(&setup, 500_000, 77, &o).map_err(e)?;
        Ok((csv_string(&ev).map_err(e)?, json_string(&s).map_err(e)?))
    };
    let base = events(1)?;
    ensure(base == events(1)? && base == events(4)?, || "event stream differs".into())?;

    let spec = SweepSpec {
        m_grid: log_space(1e-20, 1e-6, 15),
        beta_grid: log_space(1e-3, 0.9, 12),
        channel: ChannelSelect::Both,
        thresholds: vec![1e-3, 1.0],
    };
    let template = ExperimentConfig { charge_c: c.elementary_charge, ..Default::default() };
    let sweep = |threads| -> Result<(String, String), String> {
        let t = pool(threads)
            .install(|| run_sweep(&spec, &template, &c, &ValidatorSettings::default()))
            .map_err(e)?;
        Ok((csv_string(&t.rows).map_err(e)?, json_string(&t).map_err(e)?))
    };
    let s1 = sweep(1)?;
    ensure(s1 == sweep(1)? && s1 == sweep(4)?, || "sweep output differs".into())?;

    let data = |threads| -> Result<(String, String), String> {
        let o = SimulationOptions { threads: Some(threads), ..Default::default() };
        let d = generate_dataset(
            &planck_grid(&c)[..4],
            &ExperimentConfig::default(),
            Channel::Gravitational,
            100_000,
            5,
            GenerationMode::MonteCarlo,
            &c,
            &o,
        )
        .map_err(e)?;
        let fit = fit_power_law(&d.dataset, &c, 1.0, FitMode::FixedMassExponent { mass: 2.0 }).map_err(e)?;
        Ok((csv_string(&d.dataset.rows).map_err(e)?, json_string(&fit).map_err(e)?))
    };
    let d1 = data(1)?;
    ensure(d1 == data(1)? && d1 == data(4)?, || "dataset or fit output differs".into())?;
    Ok(format!(
        "events {} B, sweep {} B, dataset {} B identical at 1 and 4 workers",
        base.0.len(),
        s1.0.len(),
        d1.0.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("planck-mass anchor", planck_anchor),
        ("exponent laws", exponent_laws),
        ("density-matrix invariants", density_invariants),
        ("monte carlo vs analytic", mc_oracle),
        ("trough correlation", trough_correlation_limit),
        ("hbar recovery", hbar_recovery),
        ("feasibility frontier", feasibility_frontier),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {}. {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}. {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
