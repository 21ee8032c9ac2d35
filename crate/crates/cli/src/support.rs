//! Shared plumbing: thread-pool setup, deterministic per-trial RNG
//! derivation, random free-space starts, output writing, and the small
//! statistics kit used by the experiment commands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use covplan_core::agent::AgentState;
use covplan_core::geometry::{vec3, Vec3};
use covplan_core::raytrace::VisibilityTable;
use covplan_core::world::Scenario;

/// Environment variable bounding the rayon worker count.
pub const THREADS_VAR: &str = "COVPLAN_THREADS";

/// Build the global rayon pool, honoring `COVPLAN_THREADS` when set.
///
/// Safe to call more than once: only the first initialization wins, which
/// is exactly what tests sharing a process need.
pub fn init_thread_pool() {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_VAR) {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                builder = builder.num_threads(n);
            }
        }
    }
    // An Err here means a pool already exists; that pool stays in charge.
    let _ = builder.build_global();
}

/// Create `dir` (and parents) and write `name` inside it.
pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Deterministic RNG for one trial: the scenario seed plus a per-trial
/// offset, so trial k is reproducible in isolation and independent of how
/// many trials run or in what order.
pub fn trial_rng(base_seed: u64, offset: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(offset))
}

/// Margin kept between a sampled start and both the environment boundary
/// and every obstacle hull.
pub const START_MARGIN: f64 = 1.0;

/// Sample a stationary start state uniformly over the environment box,
/// rejecting positions within [`START_MARGIN`] of the boundary or of any
/// obstacle hull.
pub fn random_free_start(sc: &Scenario, rng: &mut ChaCha8Rng) -> Result<AgentState> {
    let lo = sc.environment.min_corner;
    let hi = sc.environment.max_corner;
    for _ in 0..10_000 {
        let p = vec3(
            rng.gen_range(lo.x + START_MARGIN..hi.x - START_MARGIN),
            rng.gen_range(lo.y + START_MARGIN..hi.y - START_MARGIN),
            rng.gen_range(lo.z + START_MARGIN..hi.z - START_MARGIN),
        );
        if sc.obstacles.clear_of_all(p, START_MARGIN) {
            return Ok(AgentState {
                pos: p,
                vel: Vec3::ZERO,
            });
        }
    }
    bail!("no collision-free start found in 10000 draws");
}

/// Draw `k` distinct facet indices among the facets the table can reach.
pub fn random_facet_subset(
    table: &VisibilityTable,
    facet_count: usize,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let reachable: Vec<usize> = (0..facet_count)
        .filter(|&f| table.facet_reachable(f))
        .collect();
    if reachable.len() < k {
        bail!(
            "requested a {k}-facet subset but only {} facets are reachable",
            reachable.len()
        );
    }
    // Partial Fisher-Yates over the reachable list.
    let mut pool = reachable;
    for i in 0..k {
        let j = i + rng.gen_range(0..pool.len() - i);
        pool.swap(i, j);
    }
    let mut subset: Vec<usize> = pool[..k].to_vec();
    subset.sort_unstable();
    Ok(subset)
}

/// Arithmetic mean; zero for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Percentile-bootstrap confidence interval for the mean (seeded, hence
/// reproducible). Returns (lo, hi) at the given coverage, e.g. 0.95.
pub fn bootstrap_mean_ci(
    xs: &[f64],
    coverage: f64,
    resamples: usize,
    seed: u64,
) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    if xs.len() == 1 {
        return (xs[0], xs[0]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = 0.0;
        for _ in 0..xs.len() {
            acc += xs[rng.gen_range(0..xs.len())];
        }
        means.push(acc / xs.len() as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).expect("finite bootstrap means"));
    let tail = (1.0 - coverage) / 2.0;
    let pick = |q: f64| {
        let idx = (q * (means.len() - 1) as f64).round() as usize;
        means[idx.min(means.len() - 1)]
    };
    (pick(tail), pick(1.0 - tail))
}
