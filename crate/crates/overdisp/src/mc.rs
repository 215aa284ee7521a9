//! Monte Carlo oracle for the tail probability.
//!
//! The job count is mixed Poisson: conditional on the random mass
//! W = ψₙ ∫₀^{φₙ} F̄(s/φₙ) dB(s), the count is Poisson(W). The estimator
//! therefore samples W on a discretized grid of gamma increments and takes
//! the exact conditional tail P(Poisson(W) ≥ ⌈un⌉) — no Poisson-layer noise.
//!
//! Importance sampling tilts each gamma increment by η_i = ψₙ α(θₙ) F̄(t_i),
//! which keeps the increment law gamma (rate shifted to μ − η_i) and gives
//! the closed-form likelihood ratio
//!
//!   L = exp(Σ_i shape_i·log(μ/(μ − η_i)) − α(θₙ)·W),
//!
//! the increment-level form of the exponential change of measure that makes
//! the rare level typical.
//!
//! Reproducibility: the sample budget is pre-partitioned into fixed-size
//! chunks, each driven by an independent ChaCha substream keyed by
//! (seed, chunk index), and chunk statistics are reduced in index order, so
//! results are bit-identical regardless of the worker count.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, Subordinator};
use crate::special;
use crate::twist::solve_theta_n;

/// Samples per RNG substream; fixed so that results do not depend on the
/// worker count.
const CHUNK: u64 = 4096;

/// Estimator variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Plain,
    ImportanceSampled,
}

/// Simulation budget and determinism knobs.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub samples: u64,
    /// Number of equal grid cells discretizing the normalized horizon [0, 1]
    /// (cells are additionally split at tail jumps).
    pub grid_cells: u32,
    pub seed: u64,
    pub method: Method,
    pub workers: u32,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { samples: 100_000, grid_cells: 1024, seed: 0, method: Method::ImportanceSampled, workers: 1 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 100 {
            return Err(Error::Domain("mc.samples must be at least 100".into()));
        }
        if self.grid_cells < 16 {
            return Err(Error::Domain("mc.grid_cells must be at least 16".into()));
        }
        if self.workers == 0 {
            return Err(Error::Domain("mc.workers must be positive".into()));
        }
        Ok(())
    }
}

/// Point estimate with its sampling error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub samples_used: u64,
    pub method: Method,
}

/// Midpoint weights and increment shapes of the discretized mass integral.
struct CellGrid {
    /// F̄ at the cell midpoint.
    weights: Vec<f64>,
    /// Gamma shape of the increment over the cell: shape·φₙ·width.
    shapes: Vec<f64>,
}

fn build_grid(model: &Model, grid_cells: u32) -> Result<CellGrid> {
    let Subordinator::Gamma { shape, .. } = *model.subordinator() else {
        return Err(Error::Unsupported(
            "simulation requires the gamma subordinator (a concrete increment law)".into(),
        ));
    };
    let m = grid_cells as usize;
    let mut edges: Vec<f64> = (0..=m).map(|i| i as f64 / m as f64).collect();
    for cut in model.service().discontinuities() {
        if cut > 0.0 && cut < 1.0 {
            edges.push(cut);
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup();

    let phi = model.scaling().phi();
    let mut weights = Vec::with_capacity(edges.len() - 1);
    let mut shapes = Vec::with_capacity(edges.len() - 1);
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        weights.push(model.service().tail(0.5 * (a + b)));
        shapes.push(shape * phi * (b - a));
    }
    Ok(CellGrid { weights, shapes })
}

/// Draw one realization of the discretized mass W.
pub fn sample_w(model: &Model, rng: &mut ChaCha8Rng, grid_cells: u32) -> Result<f64> {
    let grid = build_grid(model, grid_cells)?;
    let Subordinator::Gamma { rate, .. } = *model.subordinator() else { unreachable!() };
    let samplers = grid
        .shapes
        .iter()
        .map(|&s| Gamma::new(s, 1.0 / rate))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Domain(format!("gamma increment setup failed: {e}")))?;
    Ok(draw_w(&grid, &samplers, model.scaling().psi(), rng))
}

fn draw_w(grid: &CellGrid, samplers: &[Gamma<f64>], psi: f64, rng: &mut ChaCha8Rng) -> f64 {
    let mut acc = 0.0;
    for (w, g) in grid.weights.iter().zip(samplers) {
        acc += w * g.sample(rng);
    }
    psi * acc
}

/// Exact Poisson tail P(Poisson(λ) ≥ k).
pub fn poisson_tail(k: u64, lambda: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    special::gamma_p(k as f64, lambda)
}

/// Integer threshold of the event {N ≥ u·n} on the count lattice.
fn integer_level(model: &Model) -> u64 {
    let un = model.u() * model.scaling().n as f64;
    let rounded = un.round();
    let level = if (un - rounded).abs() < 1e-9 { rounded } else { un.ceil() };
    level.max(0.0) as u64
}

/// Conditional Monte Carlo estimate under the original measure.
pub fn estimate_plain(model: &Model, cfg: &McConfig) -> Result<McEstimate> {
    run(model, cfg, None, Method::Plain)
}

/// Importance-sampled estimate under the exponential twist θₙ.
pub fn estimate_is(model: &Model, cfg: &McConfig) -> Result<McEstimate> {
    let theta = solve_theta_n(model)?;
    run(model, cfg, Some(theta), Method::ImportanceSampled)
}

/// Importance-sampled estimate with an explicit twist parameter.
///
/// With `theta = 0` the tilted sampler, the likelihood ratio, and hence every
/// per-sample estimate coincide bit-for-bit with `estimate_plain`.
pub fn estimate_is_with_twist(model: &Model, cfg: &McConfig, theta: f64) -> Result<McEstimate> {
    run(model, cfg, Some(theta), Method::ImportanceSampled)
}

struct ChunkStats {
    sum: f64,
    sum_sq: f64,
    count: u64,
}

fn run(model: &Model, cfg: &McConfig, tilt: Option<f64>, method: Method) -> Result<McEstimate> {
    cfg.validate()?;
    let grid = build_grid(model, cfg.grid_cells)?;
    let Subordinator::Gamma { rate, .. } = *model.subordinator() else { unreachable!() };
    let scaling = model.scaling();
    let psi = scaling.psi();
    let level = integer_level(model);

    // Tilted increment rates and the constant part of the log likelihood
    // ratio. alpha = e^θ − 1; the tilt on cell i is η_i = ψ α F̄(t_i).
    let alpha = tilt.map_or(0.0, |t| t.exp_m1());
    let mut samplers = Vec::with_capacity(grid.weights.len());
    let mut log_weight_const = 0.0;
    for (w, s) in grid.weights.iter().zip(&grid.shapes) {
        let eta = psi * alpha * w;
        let tilted_rate = rate - eta;
        if tilted_rate <= 0.0 {
            return Err(Error::Domain(format!(
                "tilt reaches the rate boundary: eta = {eta} >= rate = {rate}"
            )));
        }
        log_weight_const += s * (rate.ln() - tilted_rate.ln());
        samplers.push(
            Gamma::new(*s, 1.0 / tilted_rate)
                .map_err(|e| Error::Domain(format!("gamma increment setup failed: {e}")))?,
        );
    }

    let chunks = cfg.samples.div_ceil(CHUNK);
    let results: Mutex<Vec<Option<ChunkStats>>> =
        Mutex::new((0..chunks).map(|_| None).collect());
    let next_chunk = AtomicU64::new(0);

    let simulate_chunk = |chunk_idx: u64| -> ChunkStats {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(chunk_idx);
        let count = CHUNK.min(cfg.samples - chunk_idx * CHUNK);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..count {
            let w = draw_w(&grid, &samplers, psi, &mut rng);
            let tail = poisson_tail(level, w);
            let est = (log_weight_const - alpha * w).exp() * tail;
            sum += est;
            sum_sq += est * est;
        }
        ChunkStats { sum, sum_sq, count }
    };

    let workers = (cfg.workers as u64).min(chunks).max(1);
    if workers == 1 {
        let results = &results;
        for idx in 0..chunks {
            results.lock().unwrap()[idx as usize] = Some(simulate_chunk(idx));
        }
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let idx = next_chunk.fetch_add(1, Ordering::Relaxed);
                    if idx >= chunks {
                        break;
                    }
                    let stats = simulate_chunk(idx);
                    results.lock().unwrap()[idx as usize] = Some(stats);
                });
            }
        });
    }

    // Deterministic reduction in chunk order.
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut count = 0_u64;
    for stats in results.into_inner().unwrap() {
        let stats = stats.expect("all chunks simulated");
        sum += stats.sum;
        sum_sq += stats.sum_sq;
        count += stats.count;
    }

    let n = count as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    let std_error = (var / n).sqrt();
    let half = 1.959_963_984_540_054 * std_error;
    Ok(McEstimate {
        estimate: mean,
        std_error,
        ci95: (mean - half, mean + half),
        samples_used: count,
        method,
    })
}
