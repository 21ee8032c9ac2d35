//! One function per subcommand. Each loads its inputs, runs the library,
//! writes plain columnar output files into `--out`, prints a short
//! human-readable digest, and returns a structured report so tests can
//! assert on results without re-parsing the files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

use covplan_core::baseline::run_baseline_from;
use covplan_core::planner::{run_mission, MissionLog, PlannerOptions};
use covplan_core::raytrace::{learn_table, load_table, save_table, VisibilityTable};
use covplan_core::world::Scenario;

use crate::experiments::{
    run_ablation, run_compare, run_sweep, summarize_ablation, summarize_sweep, AblateRow,
    AblateSummaryRow, CompareRow, SweepRow, SweepSummaryRow,
};
use crate::support::{bootstrap_mean_ci, mean, write_text};

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    Scenario::from_file(path).with_context(|| format!("loading scenario {}", path.display()))
}

fn load_table_checked(path: &Path, sc: &Scenario) -> Result<VisibilityTable> {
    let table =
        load_table(path).with_context(|| format!("loading visibility table {}", path.display()))?;
    table
        .check_compatible(&sc.environment, &sc.mesh, None)
        .with_context(|| format!("table {} does not fit the scenario", path.display()))?;
    Ok(table)
}

// ---- precompute -----------------------------------------------------------

#[derive(Debug)]
pub struct PrecomputeReport {
    pub table_path: PathBuf,
    pub stats_path: PathBuf,
    pub cells: usize,
    pub facets: usize,
    pub reachable_facets: usize,
    pub min_fill: usize,
    pub max_fill: usize,
    pub mean_fill: f64,
}

/// Learn the cell-to-facet visibility table and write it plus per-cell
/// fill statistics (how many facets each cell can see).
pub fn precompute(
    scenario_path: &Path,
    out: &Path,
    samples_per_cell: usize,
    seed_override: Option<u64>,
) -> Result<PrecomputeReport> {
    let sc = load_scenario(scenario_path)?;
    let seed = seed_override.unwrap_or(sc.seed);
    let table = learn_table(
        &sc.environment,
        &sc.camera,
        &sc.mesh,
        samples_per_cell,
        seed,
    );

    std::fs::create_dir_all(out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let table_path = out.join("visibility.tab");
    save_table(&table, &table_path)
        .with_context(|| format!("writing {}", table_path.display()))?;

    let cells = table.cell_count();
    let fills: Vec<usize> = (0..cells).map(|c| table.row(c).len()).collect();
    let mut stats = String::from("cell,facets_visible\n");
    for (c, n) in fills.iter().enumerate() {
        writeln!(stats, "{c},{n}").expect("string write");
    }
    let stats_path = write_text(out, "table_stats.csv", &stats)?;

    let facets = sc.mesh.facet_count();
    let reachable = (0..facets).filter(|&f| table.facet_reachable(f)).count();
    let report = PrecomputeReport {
        table_path,
        stats_path,
        cells,
        facets,
        reachable_facets: reachable,
        min_fill: fills.iter().copied().min().unwrap_or(0),
        max_fill: fills.iter().copied().max().unwrap_or(0),
        mean_fill: mean(&fills.iter().map(|&n| n as f64).collect::<Vec<_>>()),
    };
    println!(
        "precompute: {} cells x {} facets, {}/{} facets reachable, fill min/mean/max = {}/{:.2}/{}",
        report.cells,
        report.facets,
        report.reachable_facets,
        report.facets,
        report.min_fill,
        report.mean_fill,
        report.max_fill
    );
    println!("wrote {}", report.table_path.display());
    println!("wrote {}", report.stats_path.display());
    Ok(report)
}

// ---- plan / baseline ------------------------------------------------------

#[derive(Debug)]
pub struct MissionReport {
    pub out_dir: PathBuf,
    pub log: MissionLog,
}

fn write_mission_outputs(out: &Path, sc: &Scenario, log: &MissionLog) -> Result<()> {
    write_text(out, "mission.csv", &log.to_csv())?;
    write_text(out, "summary.json", &log.summary_json())?;

    // Gnuplot-ready trajectory: start state at t=0, then one row per step.
    let mut xyz = String::from("# t x y z\n");
    writeln!(
        xyz,
        "0 {} {} {}",
        log.start.pos.x, log.start.pos.y, log.start.pos.z
    )
    .expect("string write");
    for s in &log.steps {
        writeln!(xyz, "{} {} {} {}", s.t, s.state.pos.x, s.state.pos.y, s.state.pos.z)
            .expect("string write");
    }
    write_text(out, "trajectory.xyz", &xyz)?;

    // First time each facet was covered; -1 marks facets never covered.
    let mut cover_time = vec![-1i64; sc.mesh.facet_count()];
    for s in &log.steps {
        for &f in &s.covered {
            if cover_time[f] < 0 {
                cover_time[f] = s.t as i64;
            }
        }
    }
    let mut ct = String::from("facet,cover_time\n");
    for (f, t) in cover_time.iter().enumerate() {
        writeln!(ct, "{f},{t}").expect("string write");
    }
    write_text(out, "cover_times.csv", &ct)?;
    Ok(())
}

fn print_mission_digest(kind: &str, log: &MissionLog, out: &Path) {
    println!(
        "{kind}: completed={} coverage={:.4} steps={} length={:.2}m duplication={}",
        log.completed,
        log.coverage_fraction,
        log.steps.len(),
        log.trajectory_length,
        log.duplication_count
    );
    if !log.uncoverable.is_empty() {
        println!("warning: facets unreachable per the table: {:?}", log.uncoverable);
    }
    for name in ["mission.csv", "summary.json", "trajectory.xyz", "cover_times.csv"] {
        println!("wrote {}", out.join(name).display());
    }
}

/// Run the optimizing planner mission and write its logs.
pub fn plan(scenario_path: &Path, table_path: &Path, out: &Path) -> Result<MissionReport> {
    let sc = load_scenario(scenario_path)?;
    let table = load_table_checked(table_path, &sc)?;
    let log = run_mission(&sc, &table, PlannerOptions::default())?;
    write_mission_outputs(out, &sc, &log)?;
    print_mission_digest("plan", &log, out);
    Ok(MissionReport {
        out_dir: out.to_path_buf(),
        log,
    })
}

/// Run the sampling + spline-tracking baseline mission and write its logs.
pub fn baseline(
    scenario_path: &Path,
    table_path: &Path,
    out: &Path,
    viewpoint_count: usize,
    track_horizon: usize,
) -> Result<MissionReport> {
    let sc = load_scenario(scenario_path)?;
    let table = load_table_checked(table_path, &sc)?;
    let log = run_baseline_from(&sc, &table, viewpoint_count, track_horizon, None, sc.start)?;
    write_mission_outputs(out, &sc, &log)?;
    print_mission_digest("baseline", &log, out);
    Ok(MissionReport {
        out_dir: out.to_path_buf(),
        log,
    })
}

// ---- ablate ----------------------------------------------------------------

#[derive(Debug)]
pub struct AblateReport {
    pub rows: Vec<AblateRow>,
    pub summary: Vec<AblateSummaryRow>,
}

pub fn ablate(
    scenario_path: &Path,
    out: &Path,
    trials: usize,
    fov_scales: &[f64],
    samples_per_cell: usize,
    seed_override: Option<u64>,
) -> Result<AblateReport> {
    let sc = load_scenario(scenario_path)?;
    let seed = seed_override.unwrap_or(sc.seed);
    let rows = run_ablation(&sc, trials, fov_scales, samples_per_cell, seed)?;
    let summary = summarize_ablation(&rows, fov_scales);

    let mut csv =
        String::from("fov_scale,trial,arm,completed,steps,marked_coverage,true_coverage,trajectory_m\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.fov_scale,
            r.trial,
            r.arm,
            r.completed,
            r.steps,
            r.marked_coverage,
            r.true_coverage,
            r.trajectory_m
        )
        .expect("string write");
    }
    write_text(out, "ablation.csv", &csv)?;

    let mut sum = String::from(
        "fov_scale,arm,trials,completed,mean_steps,mean_marked_coverage,mean_true_coverage\n",
    );
    for r in &summary {
        writeln!(
            sum,
            "{},{},{},{},{},{},{}",
            r.fov_scale,
            r.arm,
            r.trials,
            r.completed,
            r.mean_steps,
            r.mean_marked_coverage,
            r.mean_true_coverage
        )
        .expect("string write");
    }
    write_text(out, "ablation_summary.csv", &sum)?;

    println!("ablate: true re-traced coverage by FOV scale");
    println!("{:>9}  {:>7}  {:>6}  {:>9}  {:>8}", "fov_scale", "arm", "done", "true_cov", "steps");
    for r in &summary {
        println!(
            "{:>9}  {:>7}  {:>4}/{}  {:>9.4}  {:>8.1}",
            r.fov_scale, r.arm, r.completed, r.trials, r.mean_true_coverage, r.mean_steps
        );
    }
    for name in ["ablation.csv", "ablation_summary.csv"] {
        println!("wrote {}", out.join(name).display());
    }
    Ok(AblateReport { rows, summary })
}

// ---- sweep -----------------------------------------------------------------

#[derive(Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummaryRow>,
}

pub fn sweep(
    scenario_path: &Path,
    table_path: &Path,
    out: &Path,
    horizons: &[usize],
    trials: usize,
    seed_override: Option<u64>,
) -> Result<SweepReport> {
    let sc = load_scenario(scenario_path)?;
    let table = load_table_checked(table_path, &sc)?;
    let seed = seed_override.unwrap_or(sc.seed);
    let rows = run_sweep(&sc, &table, horizons, trials, seed)?;
    let summary = summarize_sweep(&rows, horizons);

    let mut csv = String::from("horizon_T,trial,completed,steps,trajectory_m,mean_solve_ms\n");
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{:.3}",
            r.horizon, r.trial, r.completed, r.steps, r.trajectory_m, r.mean_solve_ms
        )
        .expect("string write");
    }
    write_text(out, "sweep.csv", &csv)?;

    let mut sum =
        String::from("horizon_T,trials,completed,mean_steps,mean_trajectory_m,mean_solve_ms\n");
    for r in &summary {
        writeln!(
            sum,
            "{},{},{},{},{},{:.3}",
            r.horizon, r.trials, r.completed, r.mean_steps, r.mean_trajectory_m, r.mean_solve_ms
        )
        .expect("string write");
    }
    write_text(out, "sweep_summary.csv", &sum)?;

    println!("sweep: mean completion steps and solve time per horizon");
    println!("{:>3}  {:>5}  {:>10}  {:>13}", "T", "done", "mean_steps", "mean_solve_ms");
    for r in &summary {
        println!(
            "{:>3}  {:>3}/{}  {:>10.2}  {:>13.3}",
            r.horizon, r.completed, r.trials, r.mean_steps, r.mean_solve_ms
        );
    }
    for name in ["sweep.csv", "sweep_summary.csv"] {
        println!("wrote {}", out.join(name).display());
    }
    Ok(SweepReport { rows, summary })
}

// ---- compare ---------------------------------------------------------------

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub trials: usize,
    pub paired_completed: usize,
    pub mean_planner_length_m: f64,
    pub mean_baseline_length_m: f64,
    pub mean_length_ratio: f64,
    pub ratio_ci95_lo: f64,
    pub ratio_ci95_hi: f64,
    pub bootstrap_resamples: usize,
}

#[derive(Debug)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    pub summary: CompareSummary,
}

const BOOTSTRAP_RESAMPLES: usize = 1000;

pub fn compare(
    scenario_path: &Path,
    table_path: &Path,
    out: &Path,
    trials: usize,
    subset_size: usize,
    viewpoint_count: usize,
    track_horizon: usize,
    seed_override: Option<u64>,
) -> Result<CompareReport> {
    let sc = load_scenario(scenario_path)?;
    let table = load_table_checked(table_path, &sc)?;
    let seed = seed_override.unwrap_or(sc.seed);
    let rows = run_compare(
        &sc,
        &table,
        trials,
        subset_size,
        viewpoint_count,
        track_horizon,
        seed,
    )?;

    let mut csv = String::from(
        "trial,facets,start_x,start_y,start_z,planner_completed,planner_steps,planner_length_m,\
         baseline_completed,baseline_steps,baseline_length_m,length_ratio\n",
    );
    for r in &rows {
        let facets = r
            .facets
            .iter()
            .map(|f| f.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let ratio = r.length_ratio().map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.trial,
            facets,
            r.start.x,
            r.start.y,
            r.start.z,
            r.planner_completed,
            r.planner_steps,
            r.planner_length_m,
            r.baseline_completed,
            r.baseline_steps,
            r.baseline_length_m,
            ratio
        )
        .expect("string write");
    }
    write_text(out, "compare.csv", &csv)?;

    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.length_ratio()).collect();
    let (lo, hi) = bootstrap_mean_ci(&ratios, 0.95, BOOTSTRAP_RESAMPLES, seed);
    let summary = CompareSummary {
        trials,
        paired_completed: ratios.len(),
        mean_planner_length_m: mean(
            &rows.iter().map(|r| r.planner_length_m).collect::<Vec<_>>(),
        ),
        mean_baseline_length_m: mean(
            &rows.iter().map(|r| r.baseline_length_m).collect::<Vec<_>>(),
        ),
        mean_length_ratio: mean(&ratios),
        ratio_ci95_lo: lo,
        ratio_ci95_hi: hi,
        bootstrap_resamples: BOOTSTRAP_RESAMPLES,
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serialization");
    json.push('\n');
    write_text(out, "compare_summary.json", &json)?;

    println!(
        "compare: {}/{} paired completions, mean length ratio {:.4} (95% CI [{:.4}, {:.4}])",
        summary.paired_completed,
        summary.trials,
        summary.mean_length_ratio,
        summary.ratio_ci95_lo,
        summary.ratio_ci95_hi
    );
    for name in ["compare.csv", "compare_summary.json"] {
        println!("wrote {}", out.join(name).display());
    }
    Ok(CompareReport { rows, summary })
}
