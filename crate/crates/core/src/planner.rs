//! Receding-horizon coverage planner.
//!
//! Each time step builds a mixed-integer QP over the horizon: double-
//! integrator dynamics with box bounds, one active camera configuration per
//! step, big-M membership of facet centroids in the chosen FOV pyramid,
//! big-M membership of the agent position in grid cells tied to the learned
//! visibility table, per-facet once-per-horizon coverage credits with an
//! exponential urgency discount, convex-obstacle avoidance disjunctions,
//! and a quadratic pull toward the nearest uncovered facet. The first
//! control is applied, realized coverage is recorded, and the loop repeats
//! until every facet is covered or the mission step limit is reached.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use covplan_mip::{
    solve, MipError, MipModel, MipStatus, Sense, Solution, SolverConfig, Var,
};

use crate::agent::{
    enumerate_configs, fov_base, fov_pose, rot_phi, rot_theta, step, AgentError, AgentState,
    CameraConfig,
};
use crate::geometry::{vec3, ConvexHullH, Plane, Vec3};
use crate::raytrace::{visible_facets, VisibilityTable};
use crate::world::{locate_cell, make_grid, Cell, Scenario, WorldError};

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("mission complete: all facets covered")]
    MissionComplete,
    #[error("agent outside discretized region")]
    OutsideGrid,
    #[error("plan infeasible: {0}")]
    Infeasible(String),
    #[error("solver node limit reached without a feasible plan")]
    NodeLimit,
    #[error(transparent)]
    Solver(#[from] MipError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    World(#[from] WorldError),
}

pub type Result<T> = std::result::Result<T, PlannerError>;

/// Coverage objective: tracking weight, secondary weight, waypoint standoff
/// distance, and the per-step urgency discount γ(τ) = exp(T − τ).
#[derive(Debug, Clone)]
pub struct ObjectiveConfig {
    pub omega: f64,
    pub omega_hat: f64,
    pub delta: f64,
    pub gamma: Vec<f64>,
    pub secondary: Secondary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Secondary {
    None,
    /// Penalize camera reconfiguration between consecutive steps.
    FovSmoothness,
    /// Penalize changes between consecutive force inputs.
    MotionSmoothness,
}

impl ObjectiveConfig {
    pub fn new(omega: f64, omega_hat: f64, delta: f64, horizon: usize, secondary: Secondary) -> Self {
        let gamma = (0..horizon)
            .map(|tau| ((horizon - tau) as f64).exp())
            .collect();
        ObjectiveConfig {
            omega,
            omega_hat,
            delta,
            gamma,
            secondary,
        }
    }
}

/// Per-facet mission progress. Monotone: bits only ever turn on.
#[derive(Debug, Clone)]
pub struct CoverageMemory {
    covered: Vec<bool>,
    /// Facets that were targets at mission start (false = pre-excluded).
    target: Vec<bool>,
    cover_time: Vec<Option<usize>>,
}

impl CoverageMemory {
    pub fn new(facet_count: usize) -> Self {
        CoverageMemory {
            covered: vec![false; facet_count],
            target: vec![true; facet_count],
            cover_time: vec![None; facet_count],
        }
    }

    /// Restrict the mission to a facet subset; the rest start as covered
    /// and never count toward coverage statistics.
    pub fn with_targets(facet_count: usize, targets: &[usize]) -> Self {
        let mut m = CoverageMemory {
            covered: vec![true; facet_count],
            target: vec![false; facet_count],
            cover_time: vec![None; facet_count],
        };
        for &f in targets {
            m.covered[f] = false;
            m.target[f] = true;
        }
        m
    }

    pub fn is_covered(&self, facet: usize) -> bool {
        self.covered[facet]
    }

    pub fn mark(&mut self, facet: usize, t: usize) {
        if !self.covered[facet] {
            self.covered[facet] = true;
            self.cover_time[facet] = Some(t);
        }
    }

    pub fn all_covered(&self) -> bool {
        self.covered.iter().all(|&c| c)
    }

    pub fn target_count(&self) -> usize {
        self.target.iter().filter(|&&t| t).count()
    }

    pub fn covered_target_count(&self) -> usize {
        self.target
            .iter()
            .zip(&self.covered)
            .filter(|&(&t, &c)| t && c)
            .count()
    }

    pub fn cover_time(&self, facet: usize) -> Option<usize> {
        self.cover_time[facet]
    }
}

/// Big-M configuration: `cap` is the validated ceiling (environment
/// diameter + largest plane offset + 1); every emitted row uses an exact
/// per-row constant that must stay below it. `eps_strict` realizes strict
/// obstacle inequalities as closed ones.
#[derive(Debug, Clone, Copy)]
pub struct BigMPolicy {
    pub cap: f64,
    pub eps_strict: f64,
}

impl BigMPolicy {
    pub fn for_scenario(sc: &Scenario) -> Self {
        let mut max_beta = sc.camera.max_range() + sc.camera.base_len + sc.camera.base_wid;
        for h in &sc.obstacles.obstacles {
            for f in &h.faces {
                max_beta = max_beta.max(f.offset.abs());
            }
        }
        let corner = sc
            .environment
            .max_corner
            .max_comp(-sc.environment.min_corner);
        max_beta = max_beta.max(corner.x.abs() + corner.y.abs() + corner.z.abs());
        BigMPolicy {
            cap: sc.environment.diameter() + max_beta + 1.0,
            eps_strict: 1e-3,
        }
    }
}

/// Whether the learned visibility table constrains planned coverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VisibilityMode {
    /// Coverage credit requires a set table bit for the occupied cell.
    TableConstrained,
    /// Table and cell machinery removed: FOV membership alone earns credit.
    Unconstrained,
}

/// How realized coverage is decided after a control is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkingMode {
    /// Table bit of the occupied cell + facet centroid inside the FOV hull.
    TableCell,
    /// Only ray-traced visibility at the realized pose marks a facet; table
    /// bits that repeatedly fail verification get masked out of planning.
    Retrace,
    /// Centroid inside the FOV hull alone (no table, no tracing).
    HullOnly,
}

#[derive(Debug, Clone)]
pub struct PlannerOptions {
    pub secondary: Secondary,
    pub visibility: VisibilityMode,
    pub marking: MarkingMode,
    pub solver: SolverConfig,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            secondary: Secondary::None,
            visibility: VisibilityMode::TableConstrained,
            marking: MarkingMode::TableCell,
            solver: mission_solver_config(),
        }
    }
}

/// Per-step search budget for receding-horizon missions. Only the first
/// control of each horizon is applied, so a near-optimal incumbent is as
/// good as a proven optimum; a modest relative gap plus a bounded node
/// count keeps steps fast while remaining deterministic (no wall-clock
/// stopping rule).
pub fn mission_solver_config() -> SolverConfig {
    SolverConfig {
        rel_gap: 1e-3,
        node_limit: 20_000,
        ..SolverConfig::default()
    }
}

/// One executed step of the mission.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// 1-based mission time of the state reached by this step.
    pub t: usize,
    /// Realized state after applying the force.
    pub state: AgentState,
    pub force: Vec3,
    pub config_index: usize,
    /// Facets newly covered at this step (ascending).
    pub covered: Vec<usize>,
    pub objective: f64,
    pub solve_ms: f64,
}

#[derive(Debug, Clone)]
pub struct MissionLog {
    pub start: AgentState,
    pub steps: Vec<StepRecord>,
    pub completed: bool,
    pub coverage_fraction: f64,
    pub trajectory_length: f64,
    pub duplication_count: usize,
    /// Facets no cell can see according to the table (never coverable).
    pub uncoverable: Vec<usize>,
}

#[derive(Serialize)]
struct Summary {
    coverage_fraction: f64,
    steps: usize,
    trajectory_length_m: f64,
    duplication_count: usize,
}

impl MissionLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "t,px,py,pz,vx,vy,vz,fx,fy,fz,config_index,covered_facets,objective,solve_ms\n",
        );
        for s in &self.steps {
            let facets = s
                .covered
                .iter()
                .map(|f| f.to_string())
                .collect::<Vec<_>>()
                .join(";");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.3}\n",
                s.t,
                s.state.pos.x,
                s.state.pos.y,
                s.state.pos.z,
                s.state.vel.x,
                s.state.vel.y,
                s.state.vel.z,
                s.force.x,
                s.force.y,
                s.force.z,
                s.config_index,
                facets,
                s.objective,
                s.solve_ms
            ));
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let s = Summary {
            coverage_fraction: self.coverage_fraction,
            steps: self.steps.len(),
            trajectory_length_m: self.trajectory_length,
            duplication_count: self.duplication_count,
        };
        let mut text = serde_json::to_string_pretty(&s).expect("summary serialization");
        text.push('\n');
        text
    }
}

/// Index of the closest uncovered facet centroid (ties to lowest index).
pub fn nearest_uncovered(
    pos: Vec3,
    centroids: &[Vec3],
    memory: &CoverageMemory,
) -> Result<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (idx, c) in centroids.iter().enumerate() {
        if memory.is_covered(idx) {
            continue;
        }
        let d = pos.dist(*c);
        if best.map_or(true, |(bd, _)| d < bd) {
            best = Some((d, idx));
        }
    }
    best.map(|(_, idx)| idx).ok_or(PlannerError::MissionComplete)
}

/// Camera configuration geometry precomputed once per scenario: rotated
/// apex-relative FOV planes (`normal · (x − apex) ≤ offset`), vertex
/// offsets, and their axis-aligned bounds.
struct ConfigGeometry {
    config: CameraConfig,
    /// Hull faces in apex-relative coordinates.
    faces: Vec<Plane>,
    off_lo: Vec3,
    off_hi: Vec3,
}

fn config_geometry(config: &CameraConfig, sc: &Scenario) -> Result<ConfigGeometry> {
    let base = fov_base(config.zoom, &sc.camera)?;
    let mut offsets = [Vec3::ZERO; 5];
    for (i, &v) in base.iter().enumerate() {
        offsets[i] = rot_phi(config.phi, rot_theta(config.theta, v));
    }
    let hull = crate::geometry::hull_from_points(&offsets).map_err(AgentError::Geometry)?;
    let mut lo = offsets[0];
    let mut hi = offsets[0];
    for &o in &offsets[1..] {
        lo = lo.min_comp(o);
        hi = hi.max_comp(o);
    }
    Ok(ConfigGeometry {
        config: *config,
        faces: hull.faces,
        off_lo: lo,
        off_hi: hi,
    })
}

/// Everything build_p2 needs besides the evolving state and memory.
pub struct PlannerContext<'a> {
    pub scenario: &'a Scenario,
    pub table: &'a VisibilityTable,
    cells: Vec<Cell>,
    configs: Vec<ConfigGeometry>,
    objective: ObjectiveConfig,
    big_m: BigMPolicy,
    options: PlannerOptions,
    /// Working visibility bits (table minus masked entries).
    masked: HashSet<(usize, usize)>,
    /// Verification failures per (cell, facet) in retrace mode.
    strikes: HashMap<(usize, usize), u32>,
}

impl<'a> PlannerContext<'a> {
    pub fn new(
        scenario: &'a Scenario,
        table: &'a VisibilityTable,
        options: PlannerOptions,
    ) -> Result<Self> {
        table
            .check_compatible(&scenario.environment, &scenario.mesh, None)
            .map_err(|e| PlannerError::Infeasible(e.to_string()))?;
        let configs = enumerate_configs(&scenario.camera)
            .iter()
            .map(|c| config_geometry(c, scenario))
            .collect::<Result<Vec<_>>>()?;
        let objective = ObjectiveConfig::new(
            scenario.objective.omega,
            scenario.objective.omega_hat,
            scenario.objective.delta,
            scenario.horizon,
            options.secondary,
        );
        Ok(PlannerContext {
            scenario,
            table,
            cells: make_grid(&scenario.environment),
            configs,
            objective,
            big_m: BigMPolicy::for_scenario(scenario),
            options,
            masked: HashSet::new(),
            strikes: HashMap::new(),
        })
    }

    fn bit(&self, cell: usize, facet: usize) -> bool {
        self.table.bit(cell, facet) && !self.masked.contains(&(cell, facet))
    }

    /// Travel-time factor of the zero-force drift limit: with drag `a`, the
    /// total remaining travel from velocity v is dt·v/a; without drag, a
    /// stopping envelope from the force authority bounds it.
    fn braking_factor(&self) -> f64 {
        let k = &self.scenario.kinematics;
        if k.drag > 0.0 {
            k.dt / k.drag
        } else {
            k.dt * (1.0 + k.vel_bound * k.mass / k.force_bound)
        }
    }
}

/// Variable bookkeeping for one built model.
pub struct VarMap {
    pub horizon: usize,
    pub pos: Vec<[Var; 3]>,
    pub vel: Vec<[Var; 3]>,
    pub force: Vec<[Var; 3]>,
    /// Per step: (config index, selector var). Empty when coverage machinery
    /// is absent this solve.
    pub s: Vec<Vec<(usize, Var)>>,
    /// Per step: (cell index, membership var).
    pub cells: Vec<Vec<(usize, Var)>>,
    pub triples: Vec<CoverageTriple>,
    /// (step, obstacle index, per-face vars) for the within-horizon rows.
    pub obstacle: Vec<(usize, usize, Vec<Var>)>,
    /// Target point of the tracking term.
    pub target: Vec3,
    pub kappa_star: usize,
}

pub struct CoverageTriple {
    pub facet: usize,
    pub config_index: usize,
    pub tau: usize,
    pub in_fov: Var,
    pub credit: Var,
}

/// Per-step reach box of the agent position (exact per-axis bound
/// |Δpos| ≤ steps·dt·vel_bound intersected with the environment).
fn reach_box(sc: &Scenario, pos: Vec3, steps_ahead: usize) -> (Vec3, Vec3) {
    let r = steps_ahead as f64 * sc.kinematics.dt * sc.kinematics.vel_bound;
    let lo = (pos - vec3(r, r, r)).max_comp(sc.environment.min_corner);
    let hi = (pos + vec3(r, r, r)).min_comp(sc.environment.max_corner);
    (lo, hi)
}

fn box_min_dot(n: Vec3, lo: Vec3, hi: Vec3) -> f64 {
    let pick = |c: f64, l: f64, h: f64| if c >= 0.0 { c * l } else { c * h };
    pick(n.x, lo.x, hi.x) + pick(n.y, lo.y, hi.y) + pick(n.z, lo.z, hi.z)
}

fn box_max_dot(n: Vec3, lo: Vec3, hi: Vec3) -> f64 {
    let pick = |c: f64, l: f64, h: f64| if c >= 0.0 { c * h } else { c * l };
    pick(n.x, lo.x, hi.x) + pick(n.y, lo.y, hi.y) + pick(n.z, lo.z, hi.z)
}

/// Build the one-horizon mixed-integer model.
pub fn build_p2(
    state: &AgentState,
    memory: &CoverageMemory,
    ctx: &PlannerContext,
) -> Result<(MipModel, VarMap)> {
    let sc = ctx.scenario;
    let horizon = sc.horizon;
    let k = &sc.kinematics;
    let env = &sc.environment;
    if !env.contains(state.pos, 1e-6) {
        return Err(PlannerError::OutsideGrid);
    }
    let kappa_star = nearest_uncovered(state.pos, &sc.mesh.centroids, memory)?;
    let target = sc.mesh.centroids[kappa_star] + sc.mesh.normals[kappa_star] * ctx.objective.delta;

    let mut m = MipModel::new();

    // -- continuous trajectory variables -----------------------------------
    let mut pos: Vec<[Var; 3]> = Vec::with_capacity(horizon);
    let mut vel: Vec<[Var; 3]> = Vec::with_capacity(horizon);
    let mut force: Vec<[Var; 3]> = Vec::with_capacity(horizon);
    let mut boxes: Vec<(Vec3, Vec3)> = Vec::with_capacity(horizon);
    for tau in 0..horizon {
        let (lo, hi) = reach_box(sc, state.pos, tau + 1);
        if lo.x > hi.x || lo.y > hi.y || lo.z > hi.z {
            return Err(PlannerError::OutsideGrid);
        }
        boxes.push((lo, hi));
        let p = [
            m.add_continuous(lo.x, hi.x)?,
            m.add_continuous(lo.y, hi.y)?,
            m.add_continuous(lo.z, hi.z)?,
        ];
        let v = [
            m.add_continuous(-k.vel_bound, k.vel_bound)?,
            m.add_continuous(-k.vel_bound, k.vel_bound)?,
            m.add_continuous(-k.vel_bound, k.vel_bound)?,
        ];
        let f = [
            m.add_continuous(-k.force_bound, k.force_bound)?,
            m.add_continuous(-k.force_bound, k.force_bound)?,
            m.add_continuous(-k.force_bound, k.force_bound)?,
        ];
        pos.push(p);
        vel.push(v);
        force.push(f);
    }

    // -- dynamics equalities ------------------------------------------------
    let cur_pos = [state.pos.x, state.pos.y, state.pos.z];
    let cur_vel = [state.vel.x, state.vel.y, state.vel.z];
    for ax in 0..3 {
        // First predicted state from the known current state.
        m.add_linear_constraint(
            &[(pos[0][ax], 1.0)],
            Sense::Eq,
            cur_pos[ax] + k.dt * cur_vel[ax],
        )?;
        m.add_linear_constraint(
            &[(vel[0][ax], 1.0), (force[0][ax], -k.dt / k.mass)],
            Sense::Eq,
            (1.0 - k.drag) * cur_vel[ax],
        )?;
        for tau in 1..horizon {
            m.add_linear_constraint(
                &[
                    (pos[tau][ax], 1.0),
                    (pos[tau - 1][ax], -1.0),
                    (vel[tau - 1][ax], -k.dt),
                ],
                Sense::Eq,
                0.0,
            )?;
            m.add_linear_constraint(
                &[
                    (vel[tau][ax], 1.0),
                    (vel[tau - 1][ax], -(1.0 - k.drag)),
                    (force[tau][ax], -k.dt / k.mass),
                ],
                Sense::Eq,
                0.0,
            )?;
        }
    }

    // -- coverage machinery --------------------------------------------------
    // Candidate facets: uncovered, geometrically reachable by some FOV this
    // horizon, and (in table mode) visible from some reachable cell.
    let use_table = ctx.options.visibility == VisibilityMode::TableConstrained;

    // Candidate cells per step (only needed in table mode).
    let mut cell_vars: Vec<Vec<(usize, Var)>> = vec![Vec::new(); horizon];
    let mut candidate_cells: Vec<Vec<usize>> = vec![Vec::new(); horizon];
    if use_table {
        for tau in 0..horizon {
            let (lo, hi) = boxes[tau];
            for cell in &ctx.cells {
                let hit = cell.max_corner.x >= lo.x
                    && cell.min_corner.x <= hi.x
                    && cell.max_corner.y >= lo.y
                    && cell.min_corner.y <= hi.y
                    && cell.max_corner.z >= lo.z
                    && cell.min_corner.z <= hi.z;
                if hit {
                    candidate_cells[tau].push(cell.index);
                }
            }
            if candidate_cells[tau].is_empty() {
                return Err(PlannerError::OutsideGrid);
            }
        }
    }

    // Coverage triples (facet, config, step) surviving the pruning.
    struct TripleSeed {
        facet: usize,
        cfg: usize,
        tau: usize,
    }
    let mut seeds: Vec<TripleSeed> = Vec::new();
    for facet in 0..sc.mesh.facet_count() {
        if memory.is_covered(facet) {
            continue;
        }
        let c = sc.mesh.centroids[facet];
        for tau in 0..horizon {
            let (lo, hi) = boxes[tau];
            if use_table {
                let any_bit = candidate_cells[tau]
                    .iter()
                    .any(|&cell| ctx.bit(cell, facet));
                if !any_bit {
                    continue;
                }
            }
            for (cfg_slot, geom) in ctx.configs.iter().enumerate() {
                // FOV reach: centroid must lie in reach box ⊕ FOV bounds.
                if c.x < lo.x + geom.off_lo.x
                    || c.x > hi.x + geom.off_hi.x
                    || c.y < lo.y + geom.off_lo.y
                    || c.y > hi.y + geom.off_hi.y
                    || c.z < lo.z + geom.off_lo.z
                    || c.z > hi.z + geom.off_hi.z
                {
                    continue;
                }
                seeds.push(TripleSeed {
                    facet,
                    cfg: cfg_slot,
                    tau,
                });
            }
        }
    }

    let coverage_active = !seeds.is_empty();

    // Camera selectors: one active configuration per step.
    let mut s_vars: Vec<Vec<(usize, Var)>> = vec![Vec::new(); horizon];
    if coverage_active {
        for tau in 0..horizon {
            let row: Vec<(usize, Var)> = (0..ctx.configs.len())
                .map(|cfg| (cfg, m.add_binary()))
                .collect();
            let terms: Vec<(Var, f64)> = row.iter().map(|&(_, v)| (v, 1.0)).collect();
            m.add_linear_constraint(&terms, Sense::Eq, 1.0)?;
            s_vars[tau] = row;
        }
    }

    // Cell membership binaries with exact big-M face rows and partitions.
    if coverage_active && use_table {
        for tau in 0..horizon {
            let (lo, hi) = boxes[tau];
            let mut row: Vec<(usize, Var)> = Vec::with_capacity(candidate_cells[tau].len());
            for &cell_idx in &candidate_cells[tau] {
                let cell = &ctx.cells[cell_idx];
                let b = m.add_binary();
                // b = 1 ⇒ pos within the cell box, one row per active face.
                let axes = [
                    (0, cell.min_corner.x, cell.max_corner.x, lo.x, hi.x),
                    (1, cell.min_corner.y, cell.max_corner.y, lo.y, hi.y),
                    (2, cell.min_corner.z, cell.max_corner.z, lo.z, hi.z),
                ];
                for (ax, cmin, cmax, blo, bhi) in axes {
                    let m_hi = bhi - cmax;
                    if m_hi > 0.0 {
                        debug_assert!(m_hi <= ctx.big_m.cap);
                        // pos ≤ cmax + m_hi (1 − b)
                        m.add_linear_constraint(
                            &[(pos[tau][ax], 1.0), (b, m_hi)],
                            Sense::Le,
                            cmax + m_hi,
                        )?;
                    }
                    let m_lo = cmin - blo;
                    if m_lo > 0.0 {
                        debug_assert!(m_lo <= ctx.big_m.cap);
                        // pos ≥ cmin − m_lo (1 − b)
                        m.add_linear_constraint(
                            &[(pos[tau][ax], -1.0), (b, m_lo)],
                            Sense::Le,
                            -cmin + m_lo,
                        )?;
                    }
                }
                row.push((cell_idx, b));
            }
            let terms: Vec<(Var, f64)> = row.iter().map(|&(_, v)| (v, 1.0)).collect();
            m.add_linear_constraint(&terms, Sense::Eq, 1.0)?;
            cell_vars[tau] = row;
        }
    }

    // FOV membership + coverage credit per triple.
    let mut triples: Vec<CoverageTriple> = Vec::with_capacity(seeds.len());
    let mut per_facet: BTreeMap<usize, Vec<Var>> = BTreeMap::new();
    for seed in &seeds {
        let geom = &ctx.configs[seed.cfg];
        let c = sc.mesh.centroids[seed.facet];
        let (lo, hi) = boxes[seed.tau];
        let in_fov = m.add_binary();
        // in_fov = 1 ⇒ n·(c − pos) ≤ β for all apex-relative faces.
        for face in &geom.faces {
            let resid_max = face.normal.dot(c) - face.offset - box_min_dot(face.normal, lo, hi);
            if resid_max <= 0.0 {
                continue; // face satisfied everywhere in the reach box
            }
            debug_assert!(resid_max <= ctx.big_m.cap, "big-M cap exceeded");
            // −n·pos + resid_max·in_fov ≤ β − n·c + resid_max
            m.add_linear_constraint(
                &[
                    (pos[seed.tau][0], -face.normal.x),
                    (pos[seed.tau][1], -face.normal.y),
                    (pos[seed.tau][2], -face.normal.z),
                    (in_fov, resid_max),
                ],
                Sense::Le,
                face.offset - face.normal.dot(c) + resid_max,
            )?;
        }
        // Credit: continuous, bounded by selector, FOV membership, and (in
        // table mode) the visibility indicator of the occupied cell. The
        // discount reward makes it hit its bound, so it is integral at any
        // optimum without being branched on.
        let credit = m.add_continuous(0.0, 1.0)?;
        let s_var = s_vars[seed.tau]
            .iter()
            .find(|&&(cfg, _)| cfg == seed.cfg)
            .map(|&(_, v)| v)
            .expect("selector exists when coverage is active");
        m.add_linear_constraint(&[(credit, 1.0), (s_var, -1.0)], Sense::Le, 0.0)?;
        m.add_linear_constraint(&[(credit, 1.0), (in_fov, -1.0)], Sense::Le, 0.0)?;
        if use_table {
            let mut terms: Vec<(Var, f64)> = vec![(credit, 1.0)];
            for &(cell_idx, b) in &cell_vars[seed.tau] {
                if ctx.bit(cell_idx, seed.facet) {
                    terms.push((b, -1.0));
                }
            }
            m.add_linear_constraint(&terms, Sense::Le, 0.0)?;
        }
        per_facet.entry(seed.facet).or_default().push(credit);
        triples.push(CoverageTriple {
            facet: seed.facet,
            config_index: seed.cfg,
            tau: seed.tau,
            in_fov,
            credit,
        });
    }
    // At most one credit per facet per horizon.
    for (_, credits) in &per_facet {
        if credits.len() > 1 {
            let terms: Vec<(Var, f64)> = credits.iter().map(|&v| (v, 1.0)).collect();
            m.add_linear_constraint(&terms, Sense::Le, 1.0)?;
        }
    }

    // -- obstacle avoidance ---------------------------------------------------
    let mut obstacle_vars: Vec<(usize, usize, Vec<Var>)> = Vec::new();
    let drift = k.dt;
    let brake = ctx.braking_factor();
    for tau in 0..horizon {
        let (lo, hi) = boxes[tau];
        for (oi, hull) in sc.obstacles.obstacles.iter().enumerate() {
            add_obstacle_rows(
                &mut m,
                &mut obstacle_vars,
                tau,
                oi,
                hull,
                &pos[tau],
                None,
                (lo, hi),
                &ctx.big_m,
            )?;
        }
    }
    // Drift containment: the zero-force continuation of the terminal state
    // stays inside the environment (full braking envelope) and outside the
    // obstacles for one further step, so the next solve starts feasible.
    let last = horizon - 1;
    {
        let (lo, hi) = boxes[last];
        let vmax = k.dt * k.vel_bound;
        let drift_box = (
            lo - vec3(vmax, vmax, vmax),
            hi + vec3(vmax, vmax, vmax),
        );
        for (oi, hull) in sc.obstacles.obstacles.iter().enumerate() {
            add_obstacle_rows(
                &mut m,
                &mut obstacle_vars,
                horizon, // recorded as a pseudo-step
                oi,
                hull,
                &pos[last],
                Some((&vel[last], drift)),
                drift_box,
                &ctx.big_m,
            )?;
        }
        let env_lo = [env.min_corner.x, env.min_corner.y, env.min_corner.z];
        let env_hi = [env.max_corner.x, env.max_corner.y, env.max_corner.z];
        for ax in 0..3 {
            m.add_linear_constraint(
                &[(pos[last][ax], 1.0), (vel[last][ax], brake)],
                Sense::Le,
                env_hi[ax],
            )?;
            m.add_linear_constraint(
                &[(pos[last][ax], 1.0), (vel[last][ax], brake)],
                Sense::Ge,
                env_lo[ax],
            )?;
        }
    }

    // -- objective -------------------------------------------------------------
    let mut quad: Vec<(Var, Var, f64)> = Vec::new();
    let mut lin: Vec<(Var, f64)> = Vec::new();
    let mut constant = 0.0;
    let omega = ctx.objective.omega;
    let dt = k.dt;
    // Tracking pulls the earliest control-dependent position — the drift
    // point pos₁ + dt·vel₁ of the first predicted state (equal to the second
    // predicted position when the horizon allows one) — toward the standoff
    // waypoint in front of the nearest uncovered facet.
    let target_ax = [target.x, target.y, target.z];
    for ax in 0..3 {
        let p = pos[0][ax];
        let v = vel[0][ax];
        quad.push((p, p, 2.0 * omega));
        quad.push((v, v, 2.0 * omega * dt * dt));
        quad.push((p, v, 2.0 * omega * dt));
        lin.push((p, -2.0 * omega * target_ax[ax]));
        lin.push((v, -2.0 * omega * dt * target_ax[ax]));
        constant += omega * target_ax[ax] * target_ax[ax];
    }
    for t in &triples {
        lin.push((t.credit, -ctx.objective.gamma[t.tau]));
    }
    match ctx.objective.secondary {
        Secondary::None => {}
        Secondary::MotionSmoothness => {
            let w = ctx.objective.omega_hat;
            for tau in 1..horizon {
                for ax in 0..3 {
                    let a = force[tau][ax];
                    let b = force[tau - 1][ax];
                    quad.push((a, a, 2.0 * w));
                    quad.push((b, b, 2.0 * w));
                    quad.push((a, b, -2.0 * w));
                }
            }
        }
        Secondary::FovSmoothness => {
            // |s_{m,τ} − s_{m,τ−1}| via nonnegative slack pairs.
            let w = ctx.objective.omega_hat;
            for tau in 1..horizon {
                if s_vars[tau].is_empty() || s_vars[tau - 1].is_empty() {
                    continue;
                }
                for slot in 0..ctx.configs.len() {
                    let cur = s_vars[tau][slot].1;
                    let prev = s_vars[tau - 1][slot].1;
                    let up = m.add_continuous(0.0, 1.0)?;
                    let down = m.add_continuous(0.0, 1.0)?;
                    m.add_linear_constraint(
                        &[(up, 1.0), (down, -1.0), (cur, -1.0), (prev, 1.0)],
                        Sense::Eq,
                        0.0,
                    )?;
                    lin.push((up, w));
                    lin.push((down, w));
                }
            }
        }
    }

    m.set_objective(&quad, &lin, constant)?;

    Ok((
        m,
        VarMap {
            horizon,
            pos,
            vel,
            force,
            s: s_vars,
            cells: cell_vars,
            triples,
            obstacle: obstacle_vars,
            target,
            kappa_star,
        },
    ))
}

/// Disjunctive "outside the hull" rows for one obstacle at one step.
/// `drift`: optional (velocity vars, dt) evaluating the position one
/// zero-force step past the last planned state.
#[allow(clippy::too_many_arguments)]
fn add_obstacle_rows(
    m: &mut MipModel,
    out: &mut Vec<(usize, usize, Vec<Var>)>,
    tau: usize,
    obstacle_index: usize,
    hull: &ConvexHullH,
    pos: &[Var; 3],
    drift: Option<(&[Var; 3], f64)>,
    posbox: (Vec3, Vec3),
    policy: &BigMPolicy,
) -> covplan_mip::Result<()> {
    let (lo, hi) = posbox;
    // Cull: a single face already separating the whole reach box means no
    // collision is possible this step.
    for face in &hull.faces {
        if box_min_dot(face.normal, lo, hi) >= face.offset + policy.eps_strict {
            return Ok(());
        }
    }
    // A face that cannot separate any point of the reach box can never be
    // the satisfied disjunct, so it needs neither a row nor a binary; the
    // disjunction over the remaining candidate faces is equivalent.
    let candidates: Vec<&Plane> = hull
        .faces
        .iter()
        .filter(|face| box_max_dot(face.normal, lo, hi) >= face.offset + policy.eps_strict)
        .collect();
    if candidates.is_empty() {
        // The whole reach box lies inside the hull: no position this step
        // can clear the obstacle. Encode that directly so the solver
        // reports infeasibility instead of silently dropping the rows.
        m.add_linear_constraint(&[(pos[0], 0.0)], Sense::Ge, 1.0)?;
        return Ok(());
    }
    let row_terms = |face: &Plane, extra: Option<(Var, f64)>| {
        let mut terms: Vec<(Var, f64)> = vec![
            (pos[0], face.normal.x),
            (pos[1], face.normal.y),
            (pos[2], face.normal.z),
        ];
        if let Some((vel, dt)) = drift {
            terms.push((vel[0], dt * face.normal.x));
            terms.push((vel[1], dt * face.normal.y));
            terms.push((vel[2], dt * face.normal.z));
        }
        if let Some(t) = extra {
            terms.push(t);
        }
        terms
    };
    if let [only] = candidates[..] {
        // Exactly one face can separate: the disjunction collapses to a
        // plain linear row with no binary.
        let terms = row_terms(only, None);
        m.add_linear_constraint(&terms, Sense::Ge, only.offset + policy.eps_strict)?;
        return Ok(());
    }
    let mut bits = Vec::with_capacity(candidates.len());
    for face in &candidates {
        // b = 0 ⇒ n·x ≥ β + ε (outside this face). Exact per-row constant.
        let big = face.offset + policy.eps_strict - box_min_dot(face.normal, lo, hi);
        debug_assert!(big <= policy.cap + policy.eps_strict, "obstacle big-M cap");
        let b = m.add_binary();
        let terms = row_terms(face, Some((b, big)));
        m.add_linear_constraint(&terms, Sense::Ge, face.offset + policy.eps_strict)?;
        bits.push(b);
    }
    let cap = bits.len() as f64 - 1.0;
    let terms: Vec<(Var, f64)> = bits.iter().map(|&b| (b, 1.0)).collect();
    m.add_linear_constraint(&terms, Sense::Le, cap)?;
    out.push((tau, obstacle_index, bits));
    Ok(())
}

/// Facets deemed covered at a realized pose under a marking rule.
pub(crate) fn realized_coverage(
    pos_new: Vec3,
    config_slot: usize,
    ctx: &PlannerContext,
    marking: MarkingMode,
) -> Result<(Vec<usize>, Option<usize>)> {
    let sc = ctx.scenario;
    let cfg = &ctx.configs[config_slot].config;
    let pose = fov_pose(cfg, pos_new, &sc.camera)?;
    let clamped = pos_new
        .max_comp(sc.environment.min_corner)
        .min_comp(sc.environment.max_corner);
    let cell = locate_cell(clamped, &sc.environment)?;
    let mut hits = Vec::new();
    match marking {
        MarkingMode::TableCell => {
            for facet in 0..sc.mesh.facet_count() {
                if ctx.bit(cell, facet) && pose.hull.contains(sc.mesh.centroids[facet]) {
                    hits.push(facet);
                }
            }
            Ok((hits, Some(cell)))
        }
        MarkingMode::Retrace => {
            let seen = visible_facets(&pose, &sc.mesh, sc.camera.n_rays);
            hits.extend(seen.into_iter());
            Ok((hits, Some(cell)))
        }
        MarkingMode::HullOnly => {
            for facet in 0..sc.mesh.facet_count() {
                if pose.hull.contains(sc.mesh.centroids[facet]) {
                    hits.push(facet);
                }
            }
            Ok((hits, Some(cell)))
        }
    }
}

/// Constraint-satisfaction audit of one solved step. Returns human-readable
/// violations; an empty vector means the solution is sound.
pub fn audit_solution(
    sol: &Solution,
    map: &VarMap,
    ctx: &PlannerContext,
    tol: f64,
) -> Vec<String> {
    let mut bad = Vec::new();
    let sc = ctx.scenario;
    for tau in 0..map.horizon {
        if !map.s[tau].is_empty() {
            let sum: f64 = map.s[tau].iter().map(|&(_, v)| sol.value(v)).sum();
            if (sum - 1.0).abs() > tol {
                bad.push(format!("step {tau}: camera selector sum {sum} ≠ 1"));
            }
        }
        if !map.cells[tau].is_empty() {
            let sum: f64 = map.cells[tau].iter().map(|&(_, v)| sol.value(v)).sum();
            if (sum - 1.0).abs() > tol {
                bad.push(format!("step {tau}: cell membership sum {sum} ≠ 1"));
            }
        }
    }
    // Per-facet credit cap.
    let mut per_facet: HashMap<usize, f64> = HashMap::new();
    for t in &map.triples {
        *per_facet.entry(t.facet).or_default() += sol.value(t.credit);
    }
    for (facet, total) in per_facet {
        if total > 1.0 + tol {
            bad.push(format!("facet {facet}: credit sum {total} > 1"));
        }
    }
    // FOV membership soundness: active indicator ⇒ centroid inside each face.
    for t in &map.triples {
        if sol.value(t.in_fov) > 0.5 {
            let p = vec3(
                sol.value(map.pos[t.tau][0]),
                sol.value(map.pos[t.tau][1]),
                sol.value(map.pos[t.tau][2]),
            );
            let c = sc.mesh.centroids[t.facet];
            for face in &ctx.configs[t.config_index].faces {
                let v = face.normal.dot(c - p) - face.offset;
                if v > tol {
                    bad.push(format!(
                        "facet {} step {} config {}: FOV face violated by {v}",
                        t.facet, t.tau, t.config_index
                    ));
                }
            }
        }
    }
    // Planned positions clear every obstacle by the strict margin.
    for tau in 0..map.horizon {
        let p = vec3(
            sol.value(map.pos[tau][0]),
            sol.value(map.pos[tau][1]),
            sol.value(map.pos[tau][2]),
        );
        for (oi, hull) in sc.obstacles.obstacles.iter().enumerate() {
            if hull.max_violation(p) < ctx.big_m.eps_strict / 2.0 {
                bad.push(format!("step {tau}: position {p:?} inside obstacle {oi}"));
            }
        }
    }
    bad
}

/// Outcome of one planning step, before it is folded into the mission log.
#[derive(Debug)]
pub struct PlanOutcome {
    pub record: StepRecord,
    pub new_state: AgentState,
    /// All facets the realized pose covered, including already-covered ones.
    pub realized: Vec<usize>,
    pub audit: Vec<String>,
}

/// Solve one horizon, apply the first control, and classify the realized
/// coverage. `t` is the 1-based mission time of the state being produced.
pub fn plan_step(
    state: &AgentState,
    memory: &CoverageMemory,
    ctx: &mut PlannerContext,
    t: usize,
) -> Result<PlanOutcome> {
    let sc = ctx.scenario;
    let started = Instant::now();
    let (model, map) = build_p2(state, memory, ctx)?;
    let sol = solve(&model, &ctx.options.solver)?;
    let solve_ms = started.elapsed().as_secs_f64() * 1e3;
    match sol.status {
        MipStatus::Optimal => {}
        // A budget-limited search that still found a feasible plan is fine
        // for receding-horizon use: only the first control is applied, and
        // the incumbent is exactly feasible by construction.
        MipStatus::Limit if !sol.values.is_empty() => {}
        MipStatus::Infeasible => {
            return Err(PlannerError::Infeasible(diagnose_infeasible(state, ctx)))
        }
        MipStatus::Limit => return Err(PlannerError::NodeLimit),
        MipStatus::Unbounded => {
            return Err(PlannerError::Infeasible(
                "objective unbounded (malformed model)".into(),
            ))
        }
    }

    let fb = sc.kinematics.force_bound;
    let force = vec3(
        sol.value(map.force[0][0]).clamp(-fb, fb),
        sol.value(map.force[0][1]).clamp(-fb, fb),
        sol.value(map.force[0][2]).clamp(-fb, fb),
    );
    let config_slot = if map.s.is_empty() || map.s[0].is_empty() {
        0
    } else {
        map.s[0]
            .iter()
            .max_by(|a, b| {
                sol.value(a.1)
                    .partial_cmp(&sol.value(b.1))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .map(|&(cfg, _)| cfg)
            .unwrap_or(0)
    };

    let new_state = step(state, force, &sc.kinematics)?;
    let audit = audit_solution(&sol, &map, ctx, 1e-6);

    let (realized, cell) = realized_coverage(new_state.pos, config_slot, ctx, ctx.options.marking)?;

    // In retrace mode, table bits that promised visibility but failed
    // verification at the realized pose accumulate strikes; three strikes
    // mask the (cell, facet) bit so planning must approach differently.
    if ctx.options.marking == MarkingMode::Retrace {
        if let Some(cell) = cell {
            let cfg = &ctx.configs[config_slot].config;
            let pose = fov_pose(cfg, new_state.pos, &sc.camera)?;
            let verified: HashSet<usize> = realized.iter().copied().collect();
            let mut to_mask = Vec::new();
            for facet in 0..sc.mesh.facet_count() {
                if memory.is_covered(facet) || verified.contains(&facet) {
                    continue;
                }
                if ctx.bit(cell, facet) && pose.hull.contains(sc.mesh.centroids[facet]) {
                    to_mask.push((cell, facet));
                }
            }
            for key in to_mask {
                let strikes = ctx.strikes.entry(key).or_insert(0);
                *strikes += 1;
                if *strikes >= 3 {
                    ctx.masked.insert(key);
                }
            }
        }
    }

    let newly: Vec<usize> = realized
        .iter()
        .copied()
        .filter(|&f| !memory.is_covered(f))
        .collect();

    Ok(PlanOutcome {
        record: StepRecord {
            t,
            state: new_state,
            force,
            config_index: config_slot,
            covered: newly,
            objective: sol.objective,
            solve_ms,
        },
        new_state,
        realized,
        audit,
    })
}

fn diagnose_infeasible(state: &AgentState, ctx: &PlannerContext) -> String {
    let sc = ctx.scenario;
    let drift = state.pos + state.vel * sc.kinematics.dt;
    for (oi, hull) in sc.obstacles.obstacles.iter().enumerate() {
        if hull.max_violation(state.pos) < ctx.big_m.eps_strict / 2.0 {
            return format!("position inside obstacle hull {oi}");
        }
    }
    if !sc.environment.contains(drift, 0.0) {
        return "velocity drift exits the environment".into();
    }
    for (oi, hull) in sc.obstacles.obstacles.iter().enumerate() {
        if hull.max_violation(drift) < ctx.big_m.eps_strict / 2.0 {
            return format!("velocity drift enters obstacle hull {oi}");
        }
    }
    "no feasible trajectory under motion and obstacle constraints".into()
}

/// Run a full mission: plan, apply, record, until coverage or step limit.
pub fn run_mission(
    scenario: &Scenario,
    table: &VisibilityTable,
    options: PlannerOptions,
) -> Result<MissionLog> {
    let mut ctx = PlannerContext::new(scenario, table, options)?;
    let mut memory = CoverageMemory::new(scenario.mesh.facet_count());
    run_mission_with(&mut ctx, &mut memory, scenario.start)
}

/// Mission runner over caller-supplied memory (facet subsets, resumes).
pub fn run_mission_with(
    ctx: &mut PlannerContext,
    memory: &mut CoverageMemory,
    start: AgentState,
) -> Result<MissionLog> {
    let sc = ctx.scenario;
    let uncoverable: Vec<usize> = (0..sc.mesh.facet_count())
        .filter(|&f| !memory.is_covered(f) && !ctx.table.facet_reachable(f))
        .collect();

    let mut state = start;
    let mut steps = Vec::new();
    let mut duplication = 0usize;
    let mut trajectory = 0.0f64;
    let mut audit_failures: Vec<String> = Vec::new();

    for t in 1..=sc.mission_limit {
        if memory.all_covered() {
            break;
        }
        let outcome = plan_step(&state, memory, ctx, t)?;
        duplication += outcome
            .realized
            .iter()
            .filter(|&&f| memory.is_covered(f))
            .count();
        for &f in &outcome.record.covered {
            memory.mark(f, t);
        }
        trajectory += state.pos.dist(outcome.new_state.pos);
        state = outcome.new_state;
        audit_failures.extend(outcome.audit);
        steps.push(outcome.record);
    }

    if !audit_failures.is_empty() {
        return Err(PlannerError::Infeasible(format!(
            "solution audit failed: {}",
            audit_failures.join("; ")
        )));
    }

    let completed = memory.all_covered();
    let fraction = if memory.target_count() == 0 {
        1.0
    } else {
        memory.covered_target_count() as f64 / memory.target_count() as f64
    };
    Ok(MissionLog {
        start,
        steps,
        completed,
        coverage_fraction: fraction,
        trajectory_length: trajectory,
        duplication_count: duplication,
        uncoverable,
    })
}

/// Fraction of target facets whose coverage survives ray-traced
/// re-verification of the logged poses (the ground-truth coverage metric).
pub fn true_coverage(log: &MissionLog, scenario: &Scenario, memory: &CoverageMemory) -> f64 {
    let mut verified = vec![false; scenario.mesh.facet_count()];
    let configs = enumerate_configs(&scenario.camera);
    for s in &log.steps {
        let cfg = &configs[s.config_index];
        if let Ok(pose) = fov_pose(cfg, s.state.pos, &scenario.camera) {
            for f in visible_facets(&pose, &scenario.mesh, scenario.camera.n_rays) {
                verified[f] = true;
            }
        }
    }
    let mut target = 0usize;
    let mut hit = 0usize;
    for f in 0..scenario.mesh.facet_count() {
        if memory.target[f] {
            target += 1;
            if verified[f] {
                hit += 1;
            }
        }
    }
    if target == 0 {
        1.0
    } else {
        hit as f64 / target as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfix::{
        tiny_scenario, tiny_table, MESH_TWO_REACHABLE, MESH_WITH_HIDDEN_FACET,
    };
    use crate::world::ObstacleSet;

    #[test]
    fn gamma_discount_table() {
        let obj = ObjectiveConfig::new(0.1, 10.0, 10.0, 5, Secondary::None);
        assert_eq!(obj.gamma.len(), 5);
        assert!((obj.gamma[0] - 148.4131591025766).abs() < 1e-9);
        assert!((obj.gamma[4] - 2.718281828459045).abs() < 1e-12);
        for w in obj.gamma.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn nearest_uncovered_picks_closest_then_lowest_index() {
        let sc = tiny_scenario(MESH_TWO_REACHABLE, 2);
        let mut memory = CoverageMemory::new(2);
        let pos = vec3(15.0, 15.0, 8.0);
        assert_eq!(nearest_uncovered(pos, &sc.mesh.centroids, &memory).unwrap(), 0);
        memory.mark(0, 1);
        assert_eq!(nearest_uncovered(pos, &sc.mesh.centroids, &memory).unwrap(), 1);
        memory.mark(1, 2);
        assert!(matches!(
            nearest_uncovered(pos, &sc.mesh.centroids, &memory),
            Err(PlannerError::MissionComplete)
        ));
        // Equidistant duplicate centroids resolve to the lowest index.
        let centroids = vec![vec3(1.0, 0.0, 0.0), vec3(-1.0, 0.0, 0.0)];
        let memory = CoverageMemory::new(2);
        assert_eq!(nearest_uncovered(Vec3::ZERO, &centroids, &memory).unwrap(), 0);
    }

    #[test]
    fn one_step_single_facet_optimum_takes_the_credit() {
        // Horizon 1 from a hovering start above the facet: the first
        // predicted position is fixed by drift, the facet is inside the
        // downward FOV there, and the waypoint in front of the remaining
        // facet is reachable by the drift point, so the tracking term
        // vanishes and the optimum is exactly -gamma(0) = -e.
        let sc = tiny_scenario(MESH_TWO_REACHABLE, 1);
        let table = tiny_table(&sc);
        let cell = locate_cell(sc.start.pos, &sc.environment).unwrap();
        assert!(table.bit(cell, 0), "fixture: facet 0 visible from start cell");

        let mut memory = CoverageMemory::new(2);
        memory.mark(1, 0); // leave only facet 0
        let ctx = PlannerContext::new(&sc, &table, PlannerOptions::default()).unwrap();
        let (model, map) = build_p2(&sc.start, &memory, &ctx).unwrap();
        let sol = solve(&model, &ctx.options.solver).unwrap();
        assert_eq!(sol.status, MipStatus::Optimal);
        let credit_total: f64 = map.triples.iter().map(|t| sol.value(t.credit)).sum();
        assert!((credit_total - 1.0).abs() < 1e-6, "credit {credit_total}");
        assert!(
            (sol.objective - (-std::f64::consts::E)).abs() < 1e-5,
            "objective {}",
            sol.objective
        );
        assert_eq!(map.kappa_star, 0);
        assert!(audit_solution(&sol, &map, &ctx, 1e-6).is_empty());
    }

    #[test]
    fn all_covered_memory_reports_mission_complete() {
        let sc = tiny_scenario(MESH_TWO_REACHABLE, 2);
        let table = tiny_table(&sc);
        let mut memory = CoverageMemory::new(2);
        memory.mark(0, 1);
        memory.mark(1, 1);
        let ctx = PlannerContext::new(&sc, &table, PlannerOptions::default()).unwrap();
        assert!(matches!(
            build_p2(&sc.start, &memory, &ctx),
            Err(PlannerError::MissionComplete)
        ));
    }

    #[test]
    fn plan_step_covers_facet_below_and_memory_is_monotone() {
        let sc = tiny_scenario(MESH_TWO_REACHABLE, 2);
        let table = tiny_table(&sc);
        let mut ctx = PlannerContext::new(&sc, &table, PlannerOptions::default()).unwrap();
        let memory = CoverageMemory::new(2);
        let outcome = plan_step(&sc.start, &memory, &mut ctx, 1).unwrap();
        assert!(outcome.audit.is_empty(), "audit: {:?}", outcome.audit);
        assert!(
            outcome.record.covered.contains(&0),
            "covered {:?}",
            outcome.record.covered
        );
        let mut memory = memory;
        for &f in &outcome.record.covered {
            memory.mark(f, 1);
        }
        assert!(memory.is_covered(0));
        assert_eq!(memory.cover_time(0), Some(1));
        //

        // Marks never clear.
        memory.mark(0, 5);
        assert_eq!(memory.cover_time(0), Some(1));
    }

    #[test]
    fn mission_covers_both_facets_and_logs_cleanly() {
        let sc = tiny_scenario(MESH_TWO_REACHABLE, 2);
        let table = tiny_table(&sc);
        let log = run_mission(&sc, &table, PlannerOptions::default()).unwrap();
        assert!(log.completed, "mission did not finish: {}", log.to_csv());
        assert!((log.coverage_fraction - 1.0).abs() < 1e-12);
        assert!(log.trajectory_length > 0.0);
        assert!(log.uncoverable.is_empty());
        assert!(log.steps.len() <= sc.mission_limit);

        let csv = log.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,px,py,pz,vx,vy,vz,fx,fy,fz,config_index,covered_facets,objective,solve_ms"
        );
        for line in lines {
            assert_eq!(line.split(',').count(), 14, "row: {line}");
        }
        let summary: serde_json::Value = serde_json::from_str(&log.summary_json()).unwrap();
        assert_eq!(summary["steps"], serde_json::json!(log.steps.len()));
        assert!((summary["coverage_fraction"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn occluded_facet_is_reported_uncoverable_and_mission_hits_limit() {
        let mut sc = tiny_scenario(MESH_WITH_HIDDEN_FACET, 2);
        sc.mission_limit = 5;
        let table = tiny_table(&sc);
        assert!(!table.facet_reachable(1), "fixture: facet 1 must be hidden");
        let log = run_mission(&sc, &table, PlannerOptions::default()).unwrap();
        assert_eq!(log.uncoverable, vec![1]);
        assert!(!log.completed);
        assert_eq!(log.steps.len(), 5);
        assert!((log.coverage_fraction - 0.5).abs() < 1e-12);
    }

    #[test]
    fn facet_subset_mission_ignores_excluded_facets() {
        let sc = tiny_scenario(MESH_TWO_REACHABLE, 2);
        let table = tiny_table(&sc);
        let mut ctx = PlannerContext::new(&sc, &table, PlannerOptions::default()).unwrap();
        let mut memory = CoverageMemory::with_targets(2, &[0]);
        let log = run_mission_with(&mut ctx, &mut memory, sc.start).unwrap();
        assert!(log.completed);
        assert!((log.coverage_fraction - 1.0).abs() < 1e-12);
        assert_eq!(memory.target_count(), 1);
    }

    #[test]
    fn scaling_tracking_weight_and_discount_together_keeps_the_argmax() {
        let sc = tiny_scenario(MESH_TWO_REACHABLE, 2);
        let table = tiny_table(&sc);
        let memory = CoverageMemory::new(2);

        let base = PlannerContext::new(&sc, &table, PlannerOptions::default()).unwrap();
        let (model_a, map_a) = build_p2(&sc.start, &memory, &base).unwrap();
        let sol_a = solve(&model_a, &base.options.solver).unwrap();

        let mut scaled = PlannerContext::new(&sc, &table, PlannerOptions::default()).unwrap();
        scaled.objective.omega *= 10.0;
        for g in &mut scaled.objective.gamma {
            *g *= 10.0;
        }
        let (model_b, map_b) = build_p2(&sc.start, &memory, &scaled).unwrap();
        let sol_b = solve(&model_b, &scaled.options.solver).unwrap();

        assert_eq!(sol_a.status, MipStatus::Optimal);
        assert_eq!(sol_b.status, MipStatus::Optimal);
        // Same planned coverage pattern, and the optimum scales linearly.
        let pat = |sol: &Solution, map: &VarMap| -> Vec<(usize, usize, bool)> {
            map.triples
                .iter()
                .map(|t| (t.facet, t.tau, sol.value(t.credit) > 0.5))
                .collect()
        };
        assert_eq!(pat(&sol_a, &map_a), pat(&sol_b, &map_b));
        assert!(
            (sol_b.objective - 10.0 * sol_a.objective).abs()
                <= 1e-6 * (1.0 + 10.0 * sol_a.objective.abs()),
            "{} vs {}",
            sol_b.objective,
            10.0 * sol_a.objective
        );
    }

    #[test]
    fn start_inside_obstacle_is_diagnosed() {
        let mut sc = tiny_scenario(MESH_TWO_REACHABLE, 2);
        let p = sc.start.pos;
        let cube: Vec<Vec3> = (0..8)
            .map(|i| {
                vec3(
                    p.x + if i & 1 == 0 { -2.0 } else { 2.0 },
                    p.y + if i & 2 == 0 { -2.0 } else { 2.0 },
                    p.z + if i & 4 == 0 { -2.0 } else { 2.0 },
                )
            })
            .collect();
        sc.obstacles = ObstacleSet::from_vertex_sets(&[cube]).unwrap();
        let table = tiny_table(&sc);
        let mut ctx = PlannerContext::new(&sc, &table, PlannerOptions::default()).unwrap();
        let memory = CoverageMemory::new(2);
        match plan_step(&sc.start, &memory, &mut ctx, 1) {
            Err(PlannerError::Infeasible(msg)) => {
                assert!(msg.contains("inside obstacle"), "msg: {msg}")
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }
}
