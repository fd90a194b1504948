//! Monte Carlo interferometer.
//!
//! Each trial draws an emitted-quanta count k ~ Poisson(N̄) with N̄ = −ln Γ.
//! For k = 0 the detection position follows the coherent fringe density
//! 1 + cos(2πx/d + φ); for k ≥ 1 the two paths add incoherently and the
//! position is uniform on the screen. The mixture has fringe visibility
//! exp(−N̄) = Γ.
//!
//! Trials are generated in fixed-size chunks. Chunk `i` draws from the
//! ChaCha8 stream `i` of the run seed, so the event stream does not depend
//! on how many worker threads process the chunks.

mod fringe;

pub use fringe::{CoherentSampler, FringeModel, ScreenGeometry, MAX_FRINGES, MIN_CELLS_PER_FRINGE};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::decoherence::{decoherence, gamma_from_ln, Channel, ExperimentConfig};
use crate::error::{Error, Result};
use crate::regime::{validate, ValidatorSettings};

pub const DEFAULT_GRID_POINTS: usize = 1 << 12;
pub const DEFAULT_CHUNK_SIZE: usize = 1 << 16;
/// Trough window ε as a fraction of the fringe spacing.
pub const DEFAULT_TROUGH_WINDOW_FRACTION: f64 = 1.0 / 200.0;
pub const MIN_EVENTS_FOR_VISIBILITY: usize = 100;

/// One screen detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    #[serde(rename = "x_m")]
    pub x: f64,
    /// Quanta emitted during the trial.
    pub k: u64,
    /// k = 0.
    pub coherent: bool,
}

/// What the simulator needs: mean emitted quanta and the fringe pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSetup {
    pub expected_quanta: f64,
    pub fringe: FringeModel,
}

impl SimulationSetup {
    pub fn new(expected_quanta: f64, fringe: FringeModel) -> Result<Self> {
        if !expected_quanta.is_finite() {
            return Err(Error::NonFinite(format!("expected quanta {expected_quanta}")));
        }
        if expected_quanta < 0.0 {
            return Err(Error::invalid(
                "expected_quanta",
                format!("must be non-negative, got {expected_quanta}"),
            ));
        }
        Ok(SimulationSetup { expected_quanta, fringe })
    }

    /// Setup for a given decoherence factor Γ ∈ (0, 1].
    pub fn from_gamma(gamma: f64, fringe: FringeModel) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::invalid(
                "gamma",
                format!("must lie in (0, 1] for a finite emission rate, got {gamma}"),
            ));
        }
        SimulationSetup::new(-gamma.ln(), fringe)
    }

    /// Setup for a physical experiment on the chosen channel. Fails when the
    /// regime checks fail unless `allow_invalid_regime` is set.
    pub fn from_experiment(
        config: &ExperimentConfig,
        geometry: &ScreenGeometry,
        consts: &PhysicalConstants,
        channel: Channel,
        allow_invalid_regime: bool,
    ) -> Result<Self> {
        let result = decoherence(config, consts, channel)?;
        if !allow_invalid_regime {
            let report = validate(config, consts, &ValidatorSettings::default());
            if !report.overall_valid {
                let failed: Vec<_> = report
                    .checks
                    .iter()
                    .filter(|c| c.required && !c.satisfied)
                    .map(|c| c.kind.name())
                    .collect();
                return Err(Error::invalid(
                    "regime",
                    format!("validity checks failed: {}", failed.join(", ")),
                ));
            }
        }
        SimulationSetup::new(result.expected_quanta, geometry.fringe_model(config, consts)?)
    }

    pub fn gamma(&self) -> f64 {
        gamma_from_ln(-self.expected_quanta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationOptions {
    pub grid_points: usize,
    /// Trials per RNG stream. Part of the reproducibility contract: changing
    /// it changes the event stream.
    pub chunk_size: usize,
    /// Worker threads; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    /// Trough window ε in metres; `None` means d/200.
    pub trough_window: Option<f64>,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        SimulationOptions {
            grid_points: DEFAULT_GRID_POINTS,
            chunk_size: DEFAULT_CHUNK_SIZE,
            threads: None,
            trough_window: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub n_events: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TroughCorrelation {
    pub window_m: f64,
    pub window_events: u64,
    pub emitting_events: u64,
    /// P(k ≥ 1 | detection within ε of a trough); `None` with no window events.
    pub probability: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub n_events: usize,
    pub seed: u64,
    pub expected_quanta: f64,
    pub gamma: f64,
    pub fringe_spacing_m: f64,
    /// `None` below [`MIN_EVENTS_FOR_VISIBILITY`] events.
    pub visibility: Option<VisibilityEstimate>,
    pub coherent_fraction: f64,
    pub coherent_fraction_se: f64,
    pub trough: TroughCorrelation,
}

/// Harmonic-projection sums; merged in chunk order.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n: u64,
    coherent: u64,
    sum_cos: f64,
    sum_cos2: f64,
    window: u64,
    window_emitting: u64,
}

impl Accumulator {
    fn push(&mut self, fringe: &FringeModel, window: f64, ev: &DetectionEvent) {
        let c = fringe.phase_at(ev.x).cos();
        self.n += 1;
        self.sum_cos += c;
        self.sum_cos2 += c * c;
        if ev.coherent {
            self.coherent += 1;
        }
        if fringe.distance_to_trough(ev.x) <= window {
            self.window += 1;
            if !ev.coherent {
                self.window_emitting += 1;
            }
        }
    }

    fn merge(mut self, other: &Accumulator) -> Accumulator {
        self.n += other.n;
        self.coherent += other.coherent;
        self.sum_cos += other.sum_cos;
        self.sum_cos2 += other.sum_cos2;
        self.window += other.window;
        self.window_emitting += other.window_emitting;
        self
    }

    fn visibility(&self, fringe: &FringeModel) -> Result<VisibilityEstimate> {
        let n = self.n as usize;
        if n < MIN_EVENTS_FOR_VISIBILITY {
            return Err(Error::TooFewEvents {
                got: n,
                need: MIN_EVENTS_FOR_VISIBILITY,
            });
        }
        let nf = n as f64;
        let mean = self.sum_cos / nf;
        let var = ((self.sum_cos2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
        let a = fringe.coherent_cos_mean();
        let b = fringe.uniform_cos_mean();
        let contrast = a - b;
        let value = (mean - b) / contrast;
        let standard_error = (var / nf).sqrt() / contrast.abs();
        if !(value.is_finite() && standard_error.is_finite()) {
            return Err(Error::NonFinite(format!("visibility estimate {value} ± {standard_error}")));
        }
        Ok(VisibilityEstimate {
            value,
            standard_error,
            n_events: n,
        })
    }

    fn trough(&self, window: f64) -> TroughCorrelation {
        TroughCorrelation {
            window_m: window,
            window_events: self.window,
            emitting_events: self.window_emitting,
            probability: (self.window > 0).then(|| self.window_emitting as f64 / self.window as f64),
        }
    }
}

struct Generator<'a> {
    setup: &'a SimulationSetup,
    sampler: CoherentSampler,
    poisson: Option<Poisson<f64>>,
    seed: u64,
    chunk_size: usize,
}

impl<'a> Generator<'a> {
    fn new(setup: &'a SimulationSetup, seed: u64, options: &SimulationOptions) -> Result<Self> {
        if options.chunk_size == 0 {
            return Err(Error::invalid("chunk_size", "must be positive"));
        }
        let poisson = if setup.expected_quanta > 0.0 {
            Some(
                Poisson::new(setup.expected_quanta)
                    .map_err(|e| Error::invalid("expected_quanta", e.to_string()))?,
            )
        } else {
            None
        };
        Ok(Generator {
            setup,
            sampler: CoherentSampler::new(&setup.fringe, options.grid_points)?,
            poisson,
            seed,
            chunk_size: options.chunk_size,
        })
    }

    fn chunk_count(&self, n: usize) -> usize {
        n.div_ceil(self.chunk_size)
    }

    /// Generates chunk `index`, handing each event to `sink`.
    fn run_chunk(&self, index: usize, n: usize, mut sink: impl FnMut(DetectionEvent)) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let start = index * self.chunk_size;
        let len = self.chunk_size.min(n - start);
        let w = self.setup.fringe.halfwidth;
        for _ in 0..len {
            let k = match &self.poisson {
                Some(p) => p.sample(&mut rng) as u64,
                None => 0,
            };
            let u: f64 = rng.gen();
            let x = if k == 0 {
                self.sampler.sample(u)
            } else {
                -w + 2.0 * w * u
            };
            sink(DetectionEvent { x, k, coherent: k == 0 });
        }
    }
}

fn trough_window(setup: &SimulationSetup, options: &SimulationOptions) -> Result<f64> {
    let window = options
        .trough_window
        .unwrap_or(setup.fringe.spacing * DEFAULT_TROUGH_WINDOW_FRACTION);
    check_window(window, &setup.fringe)?;
    Ok(window)
}

fn check_window(window: f64, fringe: &FringeModel) -> Result<()> {
    if !(window > 0.0 && window < 0.5 * fringe.spacing) {
        return Err(Error::invalid(
            "trough_window",
            format!("must lie in (0, d/2) with d = {:e}, got {window:e}", fringe.spacing),
        ));
    }
    Ok(())
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::invalid("threads", "must be positive")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::invalid("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn summarize(
    setup: &SimulationSetup,
    seed: u64,
    window: f64,
    acc: &Accumulator,
) -> Result<SimulationSummary> {
    let n = acc.n as usize;
    let visibility = match acc.visibility(&setup.fringe) {
        Ok(v) => Some(v),
        Err(Error::TooFewEvents { .. }) => None,
        Err(e) => return Err(e),
    };
    let p = acc.coherent as f64 / n as f64;
    Ok(SimulationSummary {
        n_events: n,
        seed,
        expected_quanta: setup.expected_quanta,
        gamma: setup.gamma(),
        fringe_spacing_m: setup.fringe.spacing,
        visibility,
        coherent_fraction: p,
        coherent_fraction_se: (p * (1.0 - p) / n as f64).sqrt(),
        trough: acc.trough(window),
    })
}

/// Samples `n` detection events and summarises them.
pub fn sample_events(
    setup: &SimulationSetup,
    n: usize,
    seed: u64,
    options: &SimulationOptions,
) -> Result<(Vec<DetectionEvent>, SimulationSummary)> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one event"));
    }
    let window = trough_window(setup, options)?;
    let gen = Generator::new(setup, seed, options)?;
    let chunks: Vec<(Vec<DetectionEvent>, Accumulator)> = in_pool(options.threads, || {
        (0..gen.chunk_count(n))
            .into_par_iter()
            .map(|i| {
                let mut events = Vec::with_capacity(gen.chunk_size.min(n - i * gen.chunk_size));
                let mut acc = Accumulator::default();
                gen.run_chunk(i, n, |ev| {
                    acc.push(&setup.fringe, window, &ev);
                    events.push(ev);
                });
                (events, acc)
            })
            .collect()
    })?;
    let acc = chunks
        .iter()
        .fold(Accumulator::default(), |total, (_, a)| total.merge(a));
    let summary = summarize(setup, seed, window, &acc)?;
    let events = chunks.into_iter().flat_map(|(e, _)| e).collect();
    Ok((events, summary))
}

/// Like [`sample_events`] but keeps only the summary, so memory does not grow with `n`.
pub fn simulate(
    setup: &SimulationSetup,
    n: usize,
    seed: u64,
    options: &SimulationOptions,
) -> Result<SimulationSummary> {
    if n == 0 {
        return Err(Error::invalid("n", "need at least one event"));
    }
    let window = trough_window(setup, options)?;
    let gen = Generator::new(setup, seed, options)?;
    let accs: Vec<Accumulator> = in_pool(options.threads, || {
        (0..gen.chunk_count(n))
            .into_par_iter()
            .map(|i| {
                let mut acc = Accumulator::default();
                gen.run_chunk(i, n, |ev| acc.push(&setup.fringe, window, &ev));
                acc
            })
            .collect()
    })?;
    let acc = accs.iter().fold(Accumulator::default(), |t, a| t.merge(a));
    summarize(setup, seed, window, &acc)
}

/// Fringe visibility by harmonic projection onto cos θ, corrected for the
/// finite screen so it estimates the coherent mixture weight |Γ|.
pub fn estimate_visibility(events: &[DetectionEvent], fringe: &FringeModel) -> Result<VisibilityEstimate> {
    let mut acc = Accumulator::default();
    for ev in events {
        acc.push(fringe, 0.0, ev);
    }
    acc.visibility(fringe)
}

/// P(k ≥ 1 | detection within `window` of a trough centre).
pub fn trough_correlation(
    events: &[DetectionEvent],
    fringe: &FringeModel,
    window: f64,
) -> Result<TroughCorrelation> {
    check_window(window, fringe)?;
    let mut acc = Accumulator::default();
    for ev in events {
        acc.push(fringe, window, ev);
    }
    Ok(acc.trough(window))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fringe() -> FringeModel {
        FringeModel::new(1.0, 5.0, 0.0).unwrap()
    }

    #[test]
    fn rejects_empty_runs_and_bad_inputs() {
        let s = SimulationSetup::from_gamma(0.5, fringe()).unwrap();
        assert!(sample_events(&s, 0, 1, &SimulationOptions::default()).is_err());
        assert!(SimulationSetup::new(f64::INFINITY, fringe()).is_err());
        assert!(SimulationSetup::new(f64::NAN, fringe()).is_err());
        assert!(SimulationSetup::from_gamma(0.0, fringe()).is_err());
        let bad_chunk = SimulationOptions { chunk_size: 0, ..Default::default() };
        assert!(simulate(&s, 10, 1, &bad_chunk).is_err());
        let bad_window = SimulationOptions { trough_window: Some(0.6), ..Default::default() };
        assert!(simulate(&s, 10, 1, &bad_window).is_err());
    }

    #[test]
    fn too_few_events_for_visibility() {
        let s = SimulationSetup::from_gamma(0.5, fringe()).unwrap();
        let (events, summary) = sample_events(&s, 50, 3, &SimulationOptions::default()).unwrap();
        assert!(summary.visibility.is_none());
        assert!(matches!(
            estimate_visibility(&events, &s.fringe),
            Err(Error::TooFewEvents { got: 50, .. })
        ));
    }

    #[test]
    fn events_respect_invariants() {
        let s = SimulationSetup::from_gamma(0.3, fringe()).unwrap();
        let (events, summary) = sample_events(&s, 20_000, 11, &SimulationOptions::default()).unwrap();
        assert_eq!(events.len(), 20_000);
        assert_eq!(summary.n_events, 20_000);
        for ev in &events {
            assert_eq!(ev.coherent, ev.k == 0);
            assert!(ev.x.abs() <= s.fringe.halfwidth);
        }
    }

    #[test]
    fn summary_matches_event_level_estimators() {
        let s = SimulationSetup::from_gamma(0.6, fringe()).unwrap();
        let opts = SimulationOptions { chunk_size: 1000, ..Default::default() };
        let (events, summary) = sample_events(&s, 10_000, 5, &opts).unwrap();
        let v = estimate_visibility(&events, &s.fringe).unwrap();
        let sv = summary.visibility.unwrap();
        assert!((v.value - sv.value).abs() < 1e-12);
        assert!((v.standard_error - sv.standard_error).abs() < 1e-12);
        let t = trough_correlation(&events, &s.fringe, summary.trough.window_m).unwrap();
        assert_eq!(t, summary.trough);
        assert_eq!(simulate(&s, 10_000, 5, &opts).unwrap(), summary);
    }

    #[test]
    fn no_emission_without_decoherence() {
        let s = SimulationSetup::from_gamma(1.0, fringe()).unwrap();
        let (events, summary) = sample_events(&s, 5_000, 2, &SimulationOptions::default()).unwrap();
        assert!(events.iter().all(|e| e.coherent));
        assert_eq!(summary.coherent_fraction, 1.0);
    }

    #[test]
    fn setup_from_experiment() {
        let k = PhysicalConstants::codata2018();
        let cfg = ExperimentConfig {
            mass_kg: k.planck_mass(),
            beta: Some(0.9),
            separation_m: 1e-6,
            duration_s: 1e-6 / (0.9 * k.c),
            wavepacket_spread_m: 1e-8,
            ..Default::default()
        };
        let lambda_db = cfg.de_broglie_wavelength(&k);
        let geometry = ScreenGeometry {
            slit_separation_m: 1e-6,
            screen_distance_m: 1.0,
            screen_halfwidth_m: 5.0 * lambda_db * 1e6,
            fringe_phase_rad: 0.0,
        };
        let s = SimulationSetup::from_experiment(&cfg, &geometry, &k, Channel::Gravitational, false).unwrap();
        assert!((s.expected_quanta - 0.9f64.powi(4)).abs() < 1e-12);
        assert!((s.fringe.spacing - lambda_db * 1e6).abs() / s.fringe.spacing < 1e-12);

        let hot = ExperimentConfig { temperature_k: 1e6, ..cfg };
        assert!(SimulationSetup::from_experiment(&hot, &geometry, &k, Channel::Gravitational, false).is_err());
        assert!(SimulationSetup::from_experiment(&hot, &geometry, &k, Channel::Gravitational, true).is_ok());
    }
}
