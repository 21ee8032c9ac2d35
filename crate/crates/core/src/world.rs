//! Scenario model: environment bounds and grid, the object-of-interest mesh
//! (loaded from a minimal OBJ subset or synthesized as a Gaussian height
//! field), convex obstacles, and the JSON scenario file that ties them to
//! the agent, camera, and objective parameters.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentError, AgentState, CameraParams, KinematicParams};
use crate::geometry::{
    aabb_hull, hull_from_points, vec3, ConvexHullH, GeomError, Plane, Triangle, Vec3,
};

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("point {0:?} is out of bounds")]
    OutOfBounds(Vec3),
    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },
    #[error("degenerate facet at index {0}")]
    DegenerateFacet(usize),
    #[error("empty mesh")]
    EmptyMesh,
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Agent(#[from] AgentError),
}

pub type Result<T> = std::result::Result<T, WorldError>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Environment {
    pub min_corner: Vec3,
    pub max_corner: Vec3,
    /// Cells per axis.
    pub grid_dims: (usize, usize, usize),
}

impl Environment {
    pub fn validate(&self) -> Result<()> {
        let d = self.max_corner - self.min_corner;
        if !(d.x > 0.0 && d.y > 0.0 && d.z > 0.0) {
            return Err(WorldError::Invalid(
                "environment max corner must exceed min corner".into(),
            ));
        }
        let (nx, ny, nz) = self.grid_dims;
        if nx < 1 || ny < 1 || nz < 1 {
            return Err(WorldError::Invalid("grid dims must be ≥ 1".into()));
        }
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.grid_dims.0 * self.grid_dims.1 * self.grid_dims.2
    }

    pub fn cell_size(&self) -> Vec3 {
        let d = self.max_corner - self.min_corner;
        vec3(
            d.x / self.grid_dims.0 as f64,
            d.y / self.grid_dims.1 as f64,
            d.z / self.grid_dims.2 as f64,
        )
    }

    pub fn diameter(&self) -> f64 {
        self.max_corner.dist(self.min_corner)
    }

    pub fn contains(&self, p: Vec3, eps: f64) -> bool {
        p.x >= self.min_corner.x - eps
            && p.y >= self.min_corner.y - eps
            && p.z >= self.min_corner.z - eps
            && p.x <= self.max_corner.x + eps
            && p.y <= self.max_corner.y + eps
            && p.z <= self.max_corner.z + eps
    }

    /// Grid coordinates of a cell index (inverse of the x-fastest layout).
    pub fn cell_coords(&self, index: usize) -> (usize, usize, usize) {
        let (nx, ny, _) = self.grid_dims;
        (index % nx, (index / nx) % ny, index / (nx * ny))
    }
}

/// One grid cell: an axis-aligned box with its linear index and center.
#[derive(Debug, Clone)]
pub struct Cell {
    pub index: usize,
    pub min_corner: Vec3,
    pub max_corner: Vec3,
    pub boundary: ConvexHullH,
    pub center: Vec3,
}

/// Axis-aligned cells tiling the environment exactly; index is x-fastest:
/// `index = ix + nx·(iy + ny·iz)`.
pub fn make_grid(env: &Environment) -> Vec<Cell> {
    let (nx, ny, nz) = env.grid_dims;
    let cs = env.cell_size();
    let mut cells = Vec::with_capacity(env.cell_count());
    for iz in 0..nz {
        for iy in 0..ny {
            for ix in 0..nx {
                let min_corner = env.min_corner
                    + vec3(ix as f64 * cs.x, iy as f64 * cs.y, iz as f64 * cs.z);
                let max_corner = min_corner + cs;
                cells.push(Cell {
                    index: cells.len(),
                    min_corner,
                    max_corner,
                    boundary: aabb_hull(min_corner, max_corner),
                    center: (min_corner + max_corner) * 0.5,
                });
            }
        }
    }
    cells
}

/// Cell index containing `p`; points exactly on an internal cell boundary
/// belong to the lower-index cell.
pub fn locate_cell(p: Vec3, env: &Environment) -> Result<usize> {
    if !env.contains(p, 0.0) {
        return Err(WorldError::OutOfBounds(p));
    }
    let cs = env.cell_size();
    let rel = p - env.min_corner;
    let axis = |r: f64, size: f64, n: usize| -> usize {
        let t = r / size;
        let mut i = t.floor() as isize;
        // Exact boundary hit: lower cell wins.
        if t == i as f64 && i > 0 {
            i -= 1;
        }
        i.clamp(0, n as isize - 1) as usize
    };
    let ix = axis(rel.x, cs.x, env.grid_dims.0);
    let iy = axis(rel.y, cs.y, env.grid_dims.1);
    let iz = axis(rel.z, cs.z, env.grid_dims.2);
    Ok(ix + env.grid_dims.0 * (iy + env.grid_dims.1 * iz))
}

/// Triangulated object surface with per-facet centroids, unit outward
/// normals, and facet planes.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub facets: Vec<Triangle>,
    pub centroids: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    pub planes: Vec<Plane>,
}

impl Mesh {
    /// Assemble from triangles, orienting each normal by `orient`: the
    /// stored normal n satisfies n·orient_dir ≥ 0 for the facet.
    fn assemble<F: Fn(&Triangle) -> Vec3>(facets: Vec<Triangle>, orient: F) -> Result<Mesh> {
        if facets.is_empty() {
            return Err(WorldError::EmptyMesh);
        }
        let mut centroids = Vec::with_capacity(facets.len());
        let mut normals = Vec::with_capacity(facets.len());
        let mut planes = Vec::with_capacity(facets.len());
        for tri in &facets {
            let mut plane = tri.plane();
            let dir = orient(tri);
            if plane.normal.dot(dir) < 0.0 {
                plane = Plane {
                    normal: -plane.normal,
                    offset: -plane.offset,
                };
            }
            centroids.push(tri.centroid());
            normals.push(plane.normal);
            planes.push(plane);
        }
        Ok(Mesh {
            facets,
            centroids,
            normals,
            planes,
        })
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn total_area(&self) -> f64 {
        self.facets.iter().map(Triangle::area).sum()
    }

    /// Every facet vertex (with repetition across facets).
    pub fn all_vertices(&self) -> Vec<Vec3> {
        let mut out = Vec::with_capacity(3 * self.facets.len());
        for t in &self.facets {
            out.push(t.v0);
            out.push(t.v1);
            out.push(t.v2);
        }
        out
    }

    /// Convex hull of the whole object (used as its collision volume).
    pub fn object_hull(&self) -> Result<ConvexHullH> {
        Ok(hull_from_points(&self.all_vertices())?)
    }

    pub fn aabb(&self) -> (Vec3, Vec3) {
        let mut lo = self.facets[0].v0;
        let mut hi = lo;
        for v in self.all_vertices() {
            lo = lo.min_comp(v);
            hi = hi.max_comp(v);
        }
        (lo, hi)
    }
}

/// Height-field surface `z = A·exp(−(x−cx)²/(2σx²) − (y−cy)²/(2σy²))`
/// sampled on a `grid_res × grid_res` lattice over `[x0,x1] × [y0,y1]` and
/// triangulated two facets per lattice square; normals face up (+z).
pub fn gaussian_mesh(
    amplitude: f64,
    center: (f64, f64),
    sigma2: (f64, f64),
    extent: (f64, f64, f64, f64),
    grid_res: usize,
) -> Result<Mesh> {
    if !(amplitude > 0.0) {
        return Err(WorldError::Invalid("gaussian amplitude must be > 0".into()));
    }
    if grid_res < 2 {
        return Err(WorldError::Invalid("gaussian grid_res must be ≥ 2".into()));
    }
    let (x0, y0, x1, y1) = extent;
    if !(x1 > x0 && y1 > y0) {
        return Err(WorldError::Invalid("gaussian extent must be nonempty".into()));
    }
    let f = |x: f64, y: f64| -> f64 {
        let dx = x - center.0;
        let dy = y - center.1;
        amplitude * (-dx * dx / (2.0 * sigma2.0) - dy * dy / (2.0 * sigma2.1)).exp()
    };
    let n = grid_res;
    let px = |i: usize| x0 + (x1 - x0) * i as f64 / (n - 1) as f64;
    let py = |j: usize| y0 + (y1 - y0) * j as f64 / (n - 1) as f64;
    let mut facets = Vec::with_capacity(2 * (n - 1) * (n - 1));
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            let p00 = vec3(px(i), py(j), f(px(i), py(j)));
            let p10 = vec3(px(i + 1), py(j), f(px(i + 1), py(j)));
            let p11 = vec3(px(i + 1), py(j + 1), f(px(i + 1), py(j + 1)));
            let p01 = vec3(px(i), py(j + 1), f(px(i), py(j + 1)));
            facets.push(
                Triangle::new(p00, p10, p11).map_err(|_| WorldError::DegenerateFacet(facets.len()))?,
            );
            facets.push(
                Triangle::new(p00, p11, p01).map_err(|_| WorldError::DegenerateFacet(facets.len()))?,
            );
        }
    }
    // Winding already gives +z normals; the orient closure just pins it.
    Mesh::assemble(facets, |_| vec3(0.0, 0.0, 1.0))
}

/// Parse a minimal OBJ subset: `v x y z` vertex lines and triangular
/// `f i j k` face lines (1-based indices). Blank lines are allowed; any
/// other content is rejected with its line number.
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut verts: Vec<Vec3> = Vec::new();
    let mut tris: Vec<Triangle> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let mut comp = [0.0f64; 3];
                for c in &mut comp {
                    let tok = it.next().ok_or_else(|| WorldError::MeshParse {
                        line: lineno,
                        msg: "vertex needs 3 coordinates".into(),
                    })?;
                    *c = tok.parse().map_err(|_| WorldError::MeshParse {
                        line: lineno,
                        msg: format!("bad coordinate {tok:?}"),
                    })?;
                }
                if it.next().is_some() {
                    return Err(WorldError::MeshParse {
                        line: lineno,
                        msg: "vertex has extra fields".into(),
                    });
                }
                verts.push(vec3(comp[0], comp[1], comp[2]));
            }
            Some("f") => {
                let mut idx = [0usize; 3];
                for i in &mut idx {
                    let tok = it.next().ok_or_else(|| WorldError::MeshParse {
                        line: lineno,
                        msg: "face needs 3 vertex indices".into(),
                    })?;
                    let v: usize = tok.parse().map_err(|_| WorldError::MeshParse {
                        line: lineno,
                        msg: format!("bad vertex index {tok:?}"),
                    })?;
                    if v == 0 || v > verts.len() {
                        return Err(WorldError::MeshParse {
                            line: lineno,
                            msg: format!("vertex index {v} out of range"),
                        });
                    }
                    *i = v - 1;
                }
                if it.next().is_some() {
                    return Err(WorldError::MeshParse {
                        line: lineno,
                        msg: "face has extra fields (only triangles supported)".into(),
                    });
                }
                let tri = Triangle::new(verts[idx[0]], verts[idx[1]], verts[idx[2]])
                    .map_err(|_| WorldError::DegenerateFacet(tris.len()))?;
                tris.push(tri);
            }
            Some(other) => {
                return Err(WorldError::MeshParse {
                    line: lineno,
                    msg: format!("unsupported line type {other:?}"),
                })
            }
            None => unreachable!(),
        }
    }
    if tris.is_empty() {
        return Err(WorldError::EmptyMesh);
    }
    // Outward normals: away from the global vertex centroid. Correct for
    // convex and star-shaped objects; documented limitation otherwise.
    let mut global = Vec3::ZERO;
    for v in &verts {
        global = global + *v;
    }
    let global = global * (1.0 / verts.len() as f64);
    Mesh::assemble(tris, move |tri| tri.centroid() - global)
}

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    parse_mesh(&text)
}

/// Convex no-fly volumes. By convention the object of interest's own hull
/// is part of the set, so collision rows cover it uniformly.
#[derive(Debug, Clone)]
pub struct ObstacleSet {
    pub obstacles: Vec<ConvexHullH>,
    /// Per-obstacle axis-aligned bounds, for cheap pruning.
    pub aabbs: Vec<(Vec3, Vec3)>,
}

impl ObstacleSet {
    pub fn from_vertex_sets(sets: &[Vec<Vec3>]) -> Result<ObstacleSet> {
        let mut obstacles = Vec::with_capacity(sets.len());
        let mut aabbs = Vec::with_capacity(sets.len());
        for set in sets {
            obstacles.push(hull_from_points(set)?);
            let mut lo = set[0];
            let mut hi = set[0];
            for &p in set {
                lo = lo.min_comp(p);
                hi = hi.max_comp(p);
            }
            aabbs.push((lo, hi));
        }
        Ok(ObstacleSet { obstacles, aabbs })
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    /// True when `p` is strictly outside every obstacle by at least `margin`.
    pub fn clear_of_all(&self, p: Vec3, margin: f64) -> bool {
        self.obstacles
            .iter()
            .all(|h| h.max_violation(p) >= margin)
    }
}

/// Objective weights: tracking weight, secondary-term weight, waypoint
/// pull-in radius, and the exponential coverage discount base.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub omega: f64,
    pub omega_hat: f64,
    pub delta: f64,
}

/// A fully-resolved scenario: world, vehicle, camera, objective, horizon.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub environment: Environment,
    pub mesh: Mesh,
    pub obstacles: ObstacleSet,
    pub kinematics: KinematicParams,
    pub camera: CameraParams,
    pub objective: ObjectiveWeights,
    pub horizon: usize,
    pub mission_limit: usize,
    pub seed: u64,
    pub start: AgentState,
}

// ---- scenario file schema ----------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct EnvFile {
    min: [f64; 3],
    max: [f64; 3],
    grid_dims: [usize; 3],
}

#[derive(Debug, Serialize, Deserialize)]
struct CameraFile {
    l: f64,
    w: f64,
    h: f64,
    zoom_levels: Vec<f64>,
    thetas_deg: Vec<f64>,
    phis_deg: Vec<f64>,
    n_rays: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ObjectiveFile {
    omega: f64,
    omega_hat: f64,
    delta: f64,
    /// Coverage-reward discount shape; only "exp" is defined.
    gamma: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct GaussianFile {
    amplitude: f64,
    center: [f64; 2],
    sigma2: [f64; 2],
    /// x0, y0, x1, y1.
    extent: [f64; 4],
    grid_res: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScenarioFile {
    env: EnvFile,
    agent: KinematicParams,
    camera: CameraFile,
    objective: ObjectiveFile,
    #[serde(rename = "horizon_T")]
    horizon_t: usize,
    mission_limit: usize,
    seed: u64,
    #[serde(default)]
    mesh_path: Option<String>,
    #[serde(default)]
    mesh_gaussian: Option<GaussianFile>,
    #[serde(default)]
    obstacles: Vec<Vec<[f64; 3]>>,
    start_pos: [f64; 3],
    #[serde(default)]
    start_vel: [f64; 3],
}

fn to_vec3(a: [f64; 3]) -> Vec3 {
    vec3(a[0], a[1], a[2])
}

impl Scenario {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Scenario> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        let environment = Environment {
            min_corner: to_vec3(file.env.min),
            max_corner: to_vec3(file.env.max),
            grid_dims: (
                file.env.grid_dims[0],
                file.env.grid_dims[1],
                file.env.grid_dims[2],
            ),
        };
        environment.validate()?;
        file.agent.validate()?;

        let deg = std::f64::consts::PI / 180.0;
        let camera = CameraParams {
            base_len: file.camera.l,
            base_wid: file.camera.w,
            range: file.camera.h,
            zoom_levels: file.camera.zoom_levels.clone(),
            thetas: file.camera.thetas_deg.iter().map(|&d| d * deg).collect(),
            phis: file.camera.phis_deg.iter().map(|&d| d * deg).collect(),
            n_rays: file.camera.n_rays,
        };
        camera.validate()?;

        if file.objective.gamma != "exp" {
            return Err(WorldError::Invalid(format!(
                "unknown discount shape {:?} (only \"exp\")",
                file.objective.gamma
            )));
        }
        if file.horizon_t < 1 {
            return Err(WorldError::Invalid("horizon_T must be ≥ 1".into()));
        }

        let mesh = match (&file.mesh_path, &file.mesh_gaussian) {
            (Some(path), None) => {
                let mut full = PathBuf::from(base_dir);
                full.push(path);
                load_mesh(&full)?
            }
            (None, Some(g)) => gaussian_mesh(
                g.amplitude,
                (g.center[0], g.center[1]),
                (g.sigma2[0], g.sigma2[1]),
                (g.extent[0], g.extent[1], g.extent[2], g.extent[3]),
                g.grid_res,
            )?,
            _ => {
                return Err(WorldError::Invalid(
                    "exactly one of mesh_path / mesh_gaussian is required".into(),
                ))
            }
        };

        // The object itself is always an obstacle.
        let mut vertex_sets: Vec<Vec<Vec3>> = vec![mesh.all_vertices()];
        for set in &file.obstacles {
            vertex_sets.push(set.iter().map(|&a| to_vec3(a)).collect());
        }
        let obstacles = ObstacleSet::from_vertex_sets(&vertex_sets)?;

        let start = AgentState {
            pos: to_vec3(file.start_pos),
            vel: to_vec3(file.start_vel),
        };
        if !environment.contains(start.pos, 0.0) {
            return Err(WorldError::Invalid(
                "start position outside environment".into(),
            ));
        }

        Ok(Scenario {
            environment,
            mesh,
            obstacles,
            kinematics: file.agent,
            camera,
            objective: ObjectiveWeights {
                omega: file.objective.omega,
                omega_hat: file.objective.omega_hat,
                delta: file.objective.delta,
            },
            horizon: file.horizon_t,
            mission_limit: file.mission_limit,
            seed: file.seed,
            start,
        })
    }

    pub fn from_file(path: &Path) -> Result<Scenario> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Scenario::from_json(&text, base)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env_100(dims: (usize, usize, usize)) -> Environment {
        Environment {
            min_corner: Vec3::ZERO,
            max_corner: vec3(100.0, 100.0, 100.0),
            grid_dims: dims,
        }
    }

    #[test]
    fn grid_partitions_environment() {
        let env = env_100((10, 10, 10));
        let cells = make_grid(&env);
        assert_eq!(cells.len(), 1000);
        let vol: f64 = cells
            .iter()
            .map(|c| {
                let d = c.max_corner - c.min_corner;
                d.x * d.y * d.z
            })
            .sum();
        assert!((vol - 1e6).abs() / 1e6 < 1e-6);
        assert!((cells[0].max_corner.x - 10.0).abs() < 1e-12);

        let single = make_grid(&env_100((1, 1, 1)));
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].max_corner, vec3(100.0, 100.0, 100.0));
    }

    #[test]
    fn locate_cell_examples() {
        let env = env_100((10, 10, 10));
        assert_eq!(locate_cell(vec3(5.0, 5.0, 5.0), &env).unwrap(), 0);
        assert_eq!(locate_cell(vec3(95.0, 95.0, 95.0), &env).unwrap(), 999);
        // Boundary tie goes to the lower x slab.
        assert_eq!(locate_cell(vec3(10.0, 5.0, 5.0), &env).unwrap(), 0);
        assert_eq!(locate_cell(vec3(10.1, 5.0, 5.0), &env).unwrap(), 1);
        // Environment max corner maps to the last cell.
        assert_eq!(locate_cell(vec3(100.0, 100.0, 100.0), &env).unwrap(), 999);
        assert!(matches!(
            locate_cell(vec3(-1.0, 5.0, 5.0), &env),
            Err(WorldError::OutOfBounds(_))
        ));
    }

    #[test]
    fn locate_cell_inverts_centers() {
        let env = env_100((4, 3, 5));
        for cell in make_grid(&env) {
            assert_eq!(locate_cell(cell.center, &env).unwrap(), cell.index);
            assert!(cell.boundary.contains(cell.center));
        }
    }

    #[test]
    fn gaussian_mesh_shape_and_peak() {
        // Odd lattice with the center on a lattice point: peak height = A.
        let mesh = gaussian_mesh(40.0, (45.0, 45.0), (80.0, 80.0), (15.0, 15.0, 75.0, 75.0), 13)
            .unwrap();
        assert_eq!(mesh.facet_count(), 2 * 12 * 12);
        let peak = mesh
            .all_vertices()
            .iter()
            .map(|v| v.z)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((peak - 40.0).abs() < 1e-9, "peak {peak}");
        // Normals all face upward.
        assert!(mesh.normals.iter().all(|n| n.z > 0.0));

        // Facet count scale: res 14 gives 2·13² = 338.
        let mesh = gaussian_mesh(40.0, (45.0, 45.0), (80.0, 80.0), (5.0, 5.0, 85.0, 85.0), 14)
            .unwrap();
        assert_eq!(mesh.facet_count(), 338);
    }

    #[test]
    fn gaussian_mesh_flat_limit_coplanar() {
        let mesh = gaussian_mesh(1e-12, (0.0, 0.0), (1.0, 1.0), (-1.0, -1.0, 1.0, 1.0), 4);
        // Amplitude must be > 0, but tiny amplitude ≈ coplanar at z ≈ 0.
        let mesh = mesh.unwrap();
        for v in mesh.all_vertices() {
            assert!(v.z.abs() < 1e-11);
        }
    }

    #[test]
    fn gaussian_centroid_height_error_shrinks_with_resolution() {
        let f = |x: f64, y: f64| {
            40.0 * (-(x - 45.0_f64).powi(2) / 160.0 - (y - 45.0_f64).powi(2) / 160.0).exp()
        };
        let max_err = |res: usize| -> f64 {
            let mesh =
                gaussian_mesh(40.0, (45.0, 45.0), (80.0, 80.0), (15.0, 15.0, 75.0, 75.0), res)
                    .unwrap();
            mesh.centroids
                .iter()
                .map(|c| (c.z - f(c.x, c.y)).abs())
                .fold(0.0, f64::max)
        };
        let coarse = max_err(5);
        let fine = max_err(17);
        assert!(fine < coarse, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn parse_mesh_single_triangle() {
        let mesh = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
        assert_eq!(mesh.facet_count(), 1);
        assert!((mesh.total_area() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parse_mesh_cube_normals_point_outward() {
        let mut text = String::new();
        for &x in &[0.0, 1.0] {
            for &y in &[0.0, 1.0] {
                for &z in &[0.0, 1.0] {
                    text.push_str(&format!("v {x} {y} {z}\n"));
                }
            }
        }
        // Vertices indexed 1..8 in (x,y,z) binary order: 1=(0,0,0) ... 8=(1,1,1).
        let faces = [
            (1, 2, 4),
            (1, 4, 3), // x = 0
            (5, 8, 6),
            (5, 7, 8), // x = 1
            (1, 5, 6),
            (1, 6, 2), // y = 0
            (3, 8, 7),
            (3, 4, 8), // y = 1
            (1, 3, 7),
            (1, 7, 5), // z = 0
            (2, 6, 8),
            (2, 8, 4), // z = 1
        ];
        for (a, b, c) in faces {
            text.push_str(&format!("f {a} {b} {c}\n"));
        }
        let mesh = parse_mesh(&text).unwrap();
        assert_eq!(mesh.facet_count(), 12);
        let center = vec3(0.5, 0.5, 0.5);
        for (n, c) in mesh.normals.iter().zip(&mesh.centroids) {
            assert!(n.dot(*c - center) > 0.0, "normal {n:?} at {c:?} not outward");
            assert!((n.norm() - 1.0).abs() < 1e-12);
        }
        let hull = mesh.object_hull().unwrap();
        assert_eq!(hull.face_count(), 6);
    }

    #[test]
    fn parse_mesh_errors() {
        assert!(matches!(parse_mesh(""), Err(WorldError::EmptyMesh)));
        assert!(matches!(
            parse_mesh("v 0 0 0\nv 1 0 0\n"),
            Err(WorldError::EmptyMesh)
        ));
        let err = parse_mesh("v 0 0 0\nvn 1 0 0\n").unwrap_err();
        match err {
            WorldError::MeshParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse_mesh("v 0 0 0\nf 1 2 3\n").unwrap_err();
        assert!(err.to_string().contains("out of range"));
        // Degenerate facet (repeated vertex).
        let err = parse_mesh("v 0 0 0\nv 1 0 0\nv 0 0 0\nf 1 2 3\n").unwrap_err();
        assert!(matches!(err, WorldError::DegenerateFacet(0)));
    }

    #[test]
    fn mesh_area_invariant_under_rigid_motion() {
        let mesh = gaussian_mesh(10.0, (0.0, 0.0), (30.0, 30.0), (-20.0, -20.0, 20.0, 20.0), 6)
            .unwrap();
        let area = mesh.total_area();
        let rot = |v: Vec3| {
            crate::agent::rot_phi(0.9, crate::agent::rot_theta(0.4, v)) + vec3(7.0, -3.0, 11.0)
        };
        let moved: Vec<Triangle> = mesh
            .facets
            .iter()
            .map(|t| Triangle {
                v0: rot(t.v0),
                v1: rot(t.v1),
                v2: rot(t.v2),
            })
            .collect();
        let moved_area: f64 = moved.iter().map(Triangle::area).sum();
        assert!((area - moved_area).abs() < 1e-9 * area);
    }

    #[test]
    fn scenario_json_round_trip() {
        let json = r#"{
            "env": {"min": [0,0,0], "max": [100,100,100], "grid_dims": [5,5,5]},
            "agent": {"dt": 1.0, "drag": 0.2, "mass": 1.1, "vel_bound": 4.0, "force_bound": 10.0},
            "camera": {"l": 7.0, "w": 7.0, "h": 9.0, "zoom_levels": [1.0],
                       "thetas_deg": [0.0, 45.0], "phis_deg": [0.0, 120.0, 240.0], "n_rays": 50},
            "objective": {"omega": 0.1, "omega_hat": 10.0, "delta": 10.0, "gamma": "exp"},
            "horizon_T": 3,
            "mission_limit": 200,
            "seed": 7,
            "mesh_gaussian": {"amplitude": 12.0, "center": [50,50], "sigma2": [120,120],
                               "extent": [20,20,80,80], "grid_res": 7},
            "obstacles": [[[0,0,0],[2,0,0],[0,2,0],[0,0,2],[2,2,0],[2,0,2],[0,2,2],[2,2,2]]],
            "start_pos": [10, 50, 20]
        }"#;
        let sc = Scenario::from_json(json, Path::new(".")).unwrap();
        assert_eq!(sc.environment.cell_count(), 125);
        assert_eq!(sc.mesh.facet_count(), 72);
        // Object hull + 1 explicit obstacle.
        assert_eq!(sc.obstacles.len(), 2);
        assert_eq!(sc.horizon, 3);
        assert_eq!(sc.camera.thetas.len(), 2);
        assert!((sc.camera.thetas[1] - std::f64::consts::PI / 4.0).abs() < 1e-12);
        assert_eq!(sc.start.pos, vec3(10.0, 50.0, 20.0));
        assert_eq!(sc.start.vel, Vec3::ZERO);

        // Rejects when both mesh sources are missing.
        let bad = json.replace("\"mesh_gaussian\"", "\"mesh_gaussian_disabled\"");
        assert!(Scenario::from_json(&bad, Path::new(".")).is_err());
    }

    #[test]
    fn scenario_rejects_bad_discount() {
        let json = r#"{
            "env": {"min": [0,0,0], "max": [10,10,10], "grid_dims": [1,1,1]},
            "agent": {"dt": 1.0, "drag": 0.2, "mass": 1.1, "vel_bound": 4.0, "force_bound": 10.0},
            "camera": {"l": 1.0, "w": 1.0, "h": 1.0, "zoom_levels": [1.0],
                       "thetas_deg": [0.0], "phis_deg": [0.0], "n_rays": 1},
            "objective": {"omega": 0.1, "omega_hat": 10.0, "delta": 10.0, "gamma": "linear"},
            "horizon_T": 1,
            "mission_limit": 10,
            "seed": 0,
            "mesh_gaussian": {"amplitude": 1.0, "center": [5,5], "sigma2": [4,4],
                               "extent": [3,3,7,7], "grid_res": 3},
            "start_pos": [1, 1, 1]
        }"#;
        let err = Scenario::from_json(json, Path::new(".")).unwrap_err();
        assert!(err.to_string().contains("discount"));
    }
}
