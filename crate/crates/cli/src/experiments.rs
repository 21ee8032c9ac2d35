//! Multi-trial experiment drivers: paired visibility ablations, horizon
//! sweeps, and planner-vs-baseline comparisons. Trials are parallelized
//! with rayon but seeded per trial index, so results are identical no
//! matter the worker count, and each row is reproducible in isolation.

use anyhow::{Context, Result};
use rayon::prelude::*;

use covplan_core::agent::AgentState;
use covplan_core::baseline::{greedy_set_cover, order_and_spline, sample_viewpoints, track_with};
use covplan_core::geometry::Vec3;
use covplan_core::planner::{
    run_mission_with, true_coverage, CoverageMemory, MarkingMode, MissionLog, PlannerContext,
    PlannerOptions, VisibilityMode,
};
use covplan_core::raytrace::{learn_table, VisibilityTable};
use covplan_core::world::Scenario;

use crate::support::{mean, random_facet_subset, random_free_start, trial_rng};

/// Which planning arm an ablation row belongs to.
pub const ARM_ON: &str = "vis-on";
pub const ARM_OFF: &str = "vis-off";

/// One mission of one ablation arm.
#[derive(Debug, Clone)]
pub struct AblateRow {
    pub fov_scale: f64,
    pub trial: usize,
    pub arm: &'static str,
    pub completed: bool,
    pub steps: usize,
    /// Coverage fraction the mission itself believes (its marking rule).
    pub marked_coverage: f64,
    /// Fraction verified by re-tracing every logged pose.
    pub true_coverage: f64,
    pub trajectory_m: f64,
}

/// Planner options of the two ablation arms: with the learned table in
/// the loop (constrained planning, ray-verified marking) and without it
/// (pure FOV-membership planning and marking).
pub fn arm_options(arm: &'static str) -> PlannerOptions {
    let mut opt = PlannerOptions::default();
    match arm {
        a if a == ARM_ON => {
            opt.visibility = VisibilityMode::TableConstrained;
            opt.marking = MarkingMode::Retrace;
        }
        _ => {
            opt.visibility = VisibilityMode::Unconstrained;
            opt.marking = MarkingMode::HullOnly;
        }
    }
    opt
}

/// Scale the camera FOV pyramid (footprint and range) by `scale`.
pub fn scaled_scenario(sc: &Scenario, scale: f64) -> Scenario {
    let mut out = sc.clone();
    out.camera.base_len *= scale;
    out.camera.base_wid *= scale;
    out.camera.range *= scale;
    out
}

/// Paired ablation: for each FOV scale, learn a visibility table for the
/// scaled camera, then run both arms from identical random starts.
pub fn run_ablation(
    sc: &Scenario,
    trials: usize,
    fov_scales: &[f64],
    samples_per_cell: usize,
    seed: u64,
) -> Result<Vec<AblateRow>> {
    let mut rows = Vec::new();
    for &scale in fov_scales {
        let scaled = scaled_scenario(sc, scale);
        let table = learn_table(
            &scaled.environment,
            &scaled.camera,
            &scaled.mesh,
            samples_per_cell,
            seed,
        );
        let per_trial: Vec<[AblateRow; 2]> = (0..trials)
            .into_par_iter()
            .map(|trial| ablate_trial(&scaled, &table, scale, trial, seed))
            .collect::<Result<_>>()?;
        for pair in per_trial {
            rows.extend(pair);
        }
    }
    Ok(rows)
}

fn ablate_trial(
    scaled: &Scenario,
    table: &VisibilityTable,
    scale: f64,
    trial: usize,
    seed: u64,
) -> Result<[AblateRow; 2]> {
    let mut rng = trial_rng(seed, trial as u64);
    let start = random_free_start(scaled, &mut rng)?;
    let mut out = Vec::with_capacity(2);
    for arm in [ARM_ON, ARM_OFF] {
        let mut ctx = PlannerContext::new(scaled, table, arm_options(arm))
            .with_context(|| format!("trial {trial}, {arm}: planner setup"))?;
        let mut memory = CoverageMemory::new(scaled.mesh.facet_count());
        let log = run_mission_with(&mut ctx, &mut memory, start)
            .with_context(|| format!("trial {trial}, {arm}: mission"))?;
        out.push(AblateRow {
            fov_scale: scale,
            trial,
            arm,
            completed: log.completed,
            steps: log.steps.len(),
            marked_coverage: log.coverage_fraction,
            true_coverage: true_coverage(&log, scaled, &memory),
            trajectory_m: log.trajectory_length,
        });
    }
    let [on, off]: [AblateRow; 2] = out.try_into().expect("two arms");
    Ok([on, off])
}

/// Per-(scale, arm) aggregate of an ablation run.
#[derive(Debug, Clone)]
pub struct AblateSummaryRow {
    pub fov_scale: f64,
    pub arm: &'static str,
    pub trials: usize,
    pub completed: usize,
    pub mean_steps: f64,
    pub mean_marked_coverage: f64,
    pub mean_true_coverage: f64,
}

pub fn summarize_ablation(rows: &[AblateRow], fov_scales: &[f64]) -> Vec<AblateSummaryRow> {
    let mut out = Vec::new();
    for &scale in fov_scales {
        for arm in [ARM_ON, ARM_OFF] {
            let sel: Vec<&AblateRow> = rows
                .iter()
                .filter(|r| r.fov_scale == scale && r.arm == arm)
                .collect();
            if sel.is_empty() {
                continue;
            }
            out.push(AblateSummaryRow {
                fov_scale: scale,
                arm,
                trials: sel.len(),
                completed: sel.iter().filter(|r| r.completed).count(),
                mean_steps: mean(&sel.iter().map(|r| r.steps as f64).collect::<Vec<_>>()),
                mean_marked_coverage: mean(
                    &sel.iter().map(|r| r.marked_coverage).collect::<Vec<_>>(),
                ),
                mean_true_coverage: mean(
                    &sel.iter().map(|r| r.true_coverage).collect::<Vec<_>>(),
                ),
            });
        }
    }
    out
}

/// One mission at one planning horizon.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub horizon: usize,
    pub trial: usize,
    pub completed: bool,
    pub steps: usize,
    pub trajectory_m: f64,
    /// Mean per-step optimization wall time (not reproducible by nature).
    pub mean_solve_ms: f64,
}

/// Horizon sweep: identical random starts across horizons (trial k uses
/// the same start at every T), missions run with the default options.
pub fn run_sweep(
    sc: &Scenario,
    table: &VisibilityTable,
    horizons: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &t_hor in horizons {
        let mut at_horizon = sc.clone();
        at_horizon.horizon = t_hor;
        let per_trial: Vec<SweepRow> = (0..trials)
            .into_par_iter()
            .map(|trial| -> Result<SweepRow> {
                let mut rng = trial_rng(seed, trial as u64);
                let start = random_free_start(&at_horizon, &mut rng)?;
                let mut ctx =
                    PlannerContext::new(&at_horizon, table, PlannerOptions::default())
                        .with_context(|| format!("T={t_hor}, trial {trial}: planner setup"))?;
                let mut memory = CoverageMemory::new(at_horizon.mesh.facet_count());
                let log = run_mission_with(&mut ctx, &mut memory, start)
                    .with_context(|| format!("T={t_hor}, trial {trial}: mission"))?;
                Ok(SweepRow {
                    horizon: t_hor,
                    trial,
                    completed: log.completed,
                    steps: log.steps.len(),
                    trajectory_m: log.trajectory_length,
                    mean_solve_ms: mean(
                        &log.steps.iter().map(|s| s.solve_ms).collect::<Vec<_>>(),
                    ),
                })
            })
            .collect::<Result<_>>()?;
        rows.extend(per_trial);
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct SweepSummaryRow {
    pub horizon: usize,
    pub trials: usize,
    pub completed: usize,
    pub mean_steps: f64,
    pub mean_trajectory_m: f64,
    pub mean_solve_ms: f64,
}

pub fn summarize_sweep(rows: &[SweepRow], horizons: &[usize]) -> Vec<SweepSummaryRow> {
    let mut out = Vec::new();
    for &t_hor in horizons {
        let sel: Vec<&SweepRow> = rows.iter().filter(|r| r.horizon == t_hor).collect();
        if sel.is_empty() {
            continue;
        }
        out.push(SweepSummaryRow {
            horizon: t_hor,
            trials: sel.len(),
            completed: sel.iter().filter(|r| r.completed).count(),
            mean_steps: mean(&sel.iter().map(|r| r.steps as f64).collect::<Vec<_>>()),
            mean_trajectory_m: mean(&sel.iter().map(|r| r.trajectory_m).collect::<Vec<_>>()),
            mean_solve_ms: mean(&sel.iter().map(|r| r.mean_solve_ms).collect::<Vec<_>>()),
        });
    }
    out
}

/// One paired planner-vs-baseline trial on a shared facet subset.
#[derive(Debug, Clone)]
pub struct CompareRow {
    pub trial: usize,
    pub facets: Vec<usize>,
    pub start: Vec3,
    pub planner_completed: bool,
    pub planner_steps: usize,
    pub planner_length_m: f64,
    pub baseline_completed: bool,
    pub baseline_steps: usize,
    pub baseline_length_m: f64,
}

impl CompareRow {
    /// Planner-to-baseline trajectory length ratio; None unless both
    /// missions completed.
    pub fn length_ratio(&self) -> Option<f64> {
        (self.planner_completed && self.baseline_completed && self.baseline_length_m > 0.0)
            .then(|| self.planner_length_m / self.baseline_length_m)
    }
}

/// Paired comparison: per trial, draw a facet subset and a start state,
/// then run the optimizing planner and the viewpoint baseline on exactly
/// that task. The baseline's candidate viewpoints are sampled once from
/// the scenario seed and shared by all trials.
pub fn run_compare(
    sc: &Scenario,
    table: &VisibilityTable,
    trials: usize,
    subset_size: usize,
    viewpoint_count: usize,
    track_horizon: usize,
    seed: u64,
) -> Result<Vec<CompareRow>> {
    let viewpoints = sample_viewpoints(sc, viewpoint_count, sc.seed)
        .context("sampling the baseline viewpoint pool")?;
    (0..trials)
        .into_par_iter()
        .map(|trial| -> Result<CompareRow> {
            let mut rng = trial_rng(seed, trial as u64);
            let facets =
                random_facet_subset(table, sc.mesh.facet_count(), subset_size, &mut rng)?;
            let start = random_free_start(sc, &mut rng)?;

            let mut ctx = PlannerContext::new(sc, table, PlannerOptions::default())
                .with_context(|| format!("trial {trial}: planner setup"))?;
            let mut memory = CoverageMemory::with_targets(sc.mesh.facet_count(), &facets);
            let plan_log = run_mission_with(&mut ctx, &mut memory, start)
                .with_context(|| format!("trial {trial}: planner mission"))?;

            let base_log = baseline_on_subset(
                sc,
                table,
                &viewpoints,
                &facets,
                start,
                track_horizon,
            )
            .with_context(|| format!("trial {trial}: baseline mission"))?;

            Ok(CompareRow {
                trial,
                facets,
                start: start.pos,
                planner_completed: plan_log.completed,
                planner_steps: plan_log.steps.len(),
                planner_length_m: plan_log.trajectory_length,
                baseline_completed: base_log.completed,
                baseline_steps: base_log.steps.len(),
                baseline_length_m: base_log.trajectory_length,
            })
        })
        .collect()
}

fn baseline_on_subset(
    sc: &Scenario,
    table: &VisibilityTable,
    viewpoints: &[covplan_core::baseline::Viewpoint],
    facets: &[usize],
    start: AgentState,
    track_horizon: usize,
) -> Result<MissionLog> {
    let picked = greedy_set_cover(viewpoints, facets)?;
    let selected = picked.iter().map(|&i| viewpoints[i].clone()).collect();
    let path = order_and_spline(selected, start.pos, sc);
    let mut ctx = PlannerContext::new(sc, table, PlannerOptions::default())?;
    let mut memory = CoverageMemory::with_targets(sc.mesh.facet_count(), facets);
    Ok(track_with(
        &path,
        start,
        sc,
        &mut ctx,
        &mut memory,
        track_horizon,
    )?)
}
