//! Agent kinematics and the gimballed-camera model.
//!
//! The vehicle follows double-integrator dynamics with linear drag:
//! `pos' = pos + dt·vel`, `vel' = (1−drag)·vel + (dt/mass)·force`, with
//! per-axis velocity and force boxes. The camera's field of view is a
//! rectangular pyramid with apex at the vehicle, parameterized by zoom and
//! two gimbal angles drawn from finite sets; light rays run from the pyramid
//! base to the apex.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{hull_from_points, vec3, ConvexHullH, GeomError, Vec3};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("control saturation: |force.{axis}| = {value} exceeds bound {bound}")]
    ControlSaturation {
        axis: char,
        value: f64,
        bound: f64,
    },
    #[error("zoom level {0} is not in the camera's zoom set")]
    InvalidZoom(f64),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

pub type Result<T> = std::result::Result<T, AgentError>;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KinematicParams {
    /// Time step, seconds.
    pub dt: f64,
    /// Drag coefficient in [0, 1).
    pub drag: f64,
    /// Mass, kg.
    pub mass: f64,
    /// Per-axis speed bound, m/s.
    pub vel_bound: f64,
    /// Per-axis thrust bound, N.
    pub force_bound: f64,
}

impl KinematicParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(AgentError::InvalidParam(format!("dt = {} must be > 0", self.dt)));
        }
        if !(0.0..1.0).contains(&self.drag) {
            return Err(AgentError::InvalidParam(format!(
                "drag = {} must lie in [0, 1)",
                self.drag
            )));
        }
        if !(self.mass > 0.0) {
            return Err(AgentError::InvalidParam(format!(
                "mass = {} must be > 0",
                self.mass
            )));
        }
        if !(self.vel_bound > 0.0) || !(self.force_bound > 0.0) {
            return Err(AgentError::InvalidParam(
                "velocity and force bounds must be > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AgentState {
    pub pos: Vec3,
    pub vel: Vec3,
}

/// One forward step of the drag-damped double integrator.
pub fn step(state: &AgentState, force: Vec3, params: &KinematicParams) -> Result<AgentState> {
    for (axis, value) in [('x', force.x), ('y', force.y), ('z', force.z)] {
        if value.abs() > params.force_bound + 1e-9 {
            return Err(AgentError::ControlSaturation {
                axis,
                value,
                bound: params.force_bound,
            });
        }
    }
    Ok(AgentState {
        pos: state.pos + state.vel * params.dt,
        vel: state.vel * (1.0 - params.drag) + force * (params.dt / params.mass),
    })
}

/// Iterated [`step`]: returns `forces.len() + 1` states starting at `x0`.
pub fn rollout(
    x0: &AgentState,
    forces: &[Vec3],
    params: &KinematicParams,
) -> Result<Vec<AgentState>> {
    let mut out = Vec::with_capacity(forces.len() + 1);
    out.push(*x0);
    let mut cur = *x0;
    for &f in forces {
        cur = step(&cur, f, params)?;
        out.push(cur);
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraParams {
    /// FOV base length at zoom 1, meters.
    pub base_len: f64,
    /// FOV base width at zoom 1, meters.
    pub base_wid: f64,
    /// Sensing range at zoom 1, meters.
    pub range: f64,
    /// Zoom levels, each ≥ 1, ascending.
    pub zoom_levels: Vec<f64>,
    /// Gimbal tilt angles, radians in [0, π).
    pub thetas: Vec<f64>,
    /// Gimbal pan angles, radians in [0, 2π).
    pub phis: Vec<f64>,
    /// Light rays per pose.
    pub n_rays: usize,
}

impl CameraParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_len > 0.0 && self.base_wid > 0.0 && self.range > 0.0) {
            return Err(AgentError::InvalidParam(
                "camera base and range must be > 0".into(),
            ));
        }
        if self.zoom_levels.is_empty() || self.thetas.is_empty() || self.phis.is_empty() {
            return Err(AgentError::InvalidParam(
                "zoom/theta/phi sets must be nonempty".into(),
            ));
        }
        if self.zoom_levels.iter().any(|&z| z < 1.0) {
            return Err(AgentError::InvalidParam("zoom levels must be ≥ 1".into()));
        }
        if self
            .thetas
            .iter()
            .any(|&t| !(0.0..std::f64::consts::PI).contains(&t))
        {
            return Err(AgentError::InvalidParam("tilt angles must lie in [0, π)".into()));
        }
        if self
            .phis
            .iter()
            .any(|&p| !(0.0..2.0 * std::f64::consts::PI).contains(&p))
        {
            return Err(AgentError::InvalidParam("pan angles must lie in [0, 2π)".into()));
        }
        if self.n_rays < 1 {
            return Err(AgentError::InvalidParam("n_rays must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Largest sensing range over the zoom set (`range × max z`).
    pub fn max_range(&self) -> f64 {
        let zmax = self.zoom_levels.iter().cloned().fold(1.0, f64::max);
        self.range * zmax
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraConfig {
    /// Row in the canonical enumeration (zoom-major, then tilt, then pan).
    pub index: usize,
    pub zoom: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Camera pose: the five FOV pyramid vertices (four base corners then the
/// apex at the agent position) and the pyramid's half-space hull.
#[derive(Debug, Clone)]
pub struct FovPose {
    pub vertices: [Vec3; 5],
    pub hull: ConvexHullH,
}

#[derive(Debug, Clone, Copy)]
pub struct LightRay {
    /// Point on the FOV base.
    pub origin: Vec3,
    /// The camera's optical center (pyramid apex).
    pub endpoint: Vec3,
}

/// Canonical (unrotated, untranslated) FOV pyramid for one zoom level:
/// base corners at `(±l′/2, ±w′/2, −h′)` with `h′ = h·z`, `l′ = l/z`,
/// `w′ = w/z`, and the apex at the origin.
pub fn fov_base(zoom: f64, params: &CameraParams) -> Result<[Vec3; 5]> {
    if !params
        .zoom_levels
        .iter()
        .any(|&z| (z - zoom).abs() <= 1e-12 * z.max(1.0))
    {
        return Err(AgentError::InvalidZoom(zoom));
    }
    let h = params.range * zoom;
    let l = params.base_len / zoom;
    let w = params.base_wid / zoom;
    Ok([
        vec3(l / 2.0, w / 2.0, -h),
        vec3(-l / 2.0, w / 2.0, -h),
        vec3(-l / 2.0, -w / 2.0, -h),
        vec3(l / 2.0, -w / 2.0, -h),
        Vec3::ZERO,
    ])
}

/// Tilt rotation about the y-axis.
pub fn rot_theta(theta: f64, v: Vec3) -> Vec3 {
    let (s, c) = theta.sin_cos();
    vec3(c * v.x + s * v.z, v.y, -s * v.x + c * v.z)
}

/// Pan rotation about the z-axis.
pub fn rot_phi(phi: f64, v: Vec3) -> Vec3 {
    let (s, c) = phi.sin_cos();
    vec3(c * v.x - s * v.y, s * v.x + c * v.y, v.z)
}

/// Place the camera: rotate the canonical pyramid by tilt then pan, then
/// translate the apex to the agent position.
pub fn fov_pose(config: &CameraConfig, agent_pos: Vec3, params: &CameraParams) -> Result<FovPose> {
    let base = fov_base(config.zoom, params)?;
    let mut vertices = [Vec3::ZERO; 5];
    for (i, &v) in base.iter().enumerate() {
        vertices[i] = rot_phi(config.phi, rot_theta(config.theta, v)) + agent_pos;
    }
    let hull = hull_from_points(&vertices)?;
    Ok(FovPose { vertices, hull })
}

/// Light rays from the FOV base to the apex.
///
/// Without a seed the origins form a stratified `⌈√n⌉ × ⌈√n⌉` grid of cell
/// centers on the base rectangle, truncated to `n` points (row-major), which
/// keeps planning deterministic. With a seed the origins are uniform random
/// on the base, which is what the Monte-Carlo visibility learner wants.
pub fn light_rays(pose: &FovPose, n: usize, seed: Option<u64>) -> Vec<LightRay> {
    let b0 = pose.vertices[0];
    let b1 = pose.vertices[1];
    let b3 = pose.vertices[3];
    let apex = pose.vertices[4];
    let eu = b1 - b0;
    let ev = b3 - b0;
    let mut rays = Vec::with_capacity(n);
    match seed {
        None => {
            let g = (n as f64).sqrt().ceil() as usize;
            'outer: for i in 0..g {
                for j in 0..g {
                    if rays.len() == n {
                        break 'outer;
                    }
                    let u = (i as f64 + 0.5) / g as f64;
                    let v = (j as f64 + 0.5) / g as f64;
                    rays.push(LightRay {
                        origin: b0 + eu * u + ev * v,
                        endpoint: apex,
                    });
                }
            }
        }
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            for _ in 0..n {
                let u: f64 = rng.gen_range(0.0..1.0);
                let v: f64 = rng.gen_range(0.0..1.0);
                rays.push(LightRay {
                    origin: b0 + eu * u + ev * v,
                    endpoint: apex,
                });
            }
        }
    }
    rays
}

/// All camera configurations in canonical order: zoom-major, then tilt,
/// then pan; `index` equals the list position.
pub fn enumerate_configs(params: &CameraParams) -> Vec<CameraConfig> {
    let mut out =
        Vec::with_capacity(params.zoom_levels.len() * params.thetas.len() * params.phis.len());
    for &zoom in &params.zoom_levels {
        for &theta in &params.thetas {
            for &phi in &params.phis {
                out.push(CameraConfig {
                    index: out.len(),
                    zoom,
                    theta,
                    phi,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn params() -> KinematicParams {
        KinematicParams {
            dt: 1.0,
            drag: 0.2,
            mass: 1.1,
            vel_bound: 15.0,
            force_bound: 10.0,
        }
    }

    fn camera() -> CameraParams {
        CameraParams {
            base_len: 9.5,
            base_wid: 9.5,
            range: 8.0,
            zoom_levels: vec![1.0, 2.0],
            thetas: vec![PI / 6.0, PI / 2.0, 5.0 * PI / 6.0],
            phis: vec![
                PI / 6.0,
                7.0 * PI / 12.0,
                PI,
                17.0 * PI / 12.0,
                11.0 * PI / 6.0,
            ],
            n_rays: 50,
        }
    }

    #[test]
    fn step_unit_force_examples() {
        let p = params();
        let s0 = AgentState {
            pos: Vec3::ZERO,
            vel: Vec3::ZERO,
        };
        let s1 = step(&s0, vec3(1.1, 0.0, 0.0), &p).unwrap();
        assert_eq!(s1.pos, Vec3::ZERO);
        assert!((s1.vel.x - 1.0).abs() < 1e-12);

        let s0 = AgentState {
            pos: Vec3::ZERO,
            vel: vec3(1.0, 0.0, 0.0),
        };
        let s1 = step(&s0, Vec3::ZERO, &p).unwrap();
        assert!((s1.pos.x - 1.0).abs() < 1e-12);
        assert!((s1.vel.x - 0.8).abs() < 1e-12);

        // Zero force, zero velocity: fixed point.
        let s0 = AgentState {
            pos: vec3(3.0, 4.0, 5.0),
            vel: Vec3::ZERO,
        };
        let s1 = step(&s0, Vec3::ZERO, &p).unwrap();
        assert_eq!(s1.pos, s0.pos);
        assert_eq!(s1.vel, Vec3::ZERO);
    }

    #[test]
    fn step_rejects_saturated_force() {
        let p = params();
        let s0 = AgentState {
            pos: Vec3::ZERO,
            vel: Vec3::ZERO,
        };
        let err = step(&s0, vec3(0.0, -10.5, 0.0), &p).unwrap_err();
        assert!(err.to_string().contains("control saturation"));
    }

    #[test]
    fn step_is_linear_in_state_and_force() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let mut r = |lo: f64, hi: f64| rng.gen_range(lo..hi);
            let s1 = AgentState {
                pos: vec3(r(-5.0, 5.0), r(-5.0, 5.0), r(-5.0, 5.0)),
                vel: vec3(r(-2.0, 2.0), r(-2.0, 2.0), r(-2.0, 2.0)),
            };
            let s2 = AgentState {
                pos: vec3(r(-5.0, 5.0), r(-5.0, 5.0), r(-5.0, 5.0)),
                vel: vec3(r(-2.0, 2.0), r(-2.0, 2.0), r(-2.0, 2.0)),
            };
            let f1 = vec3(r(-3.0, 3.0), r(-3.0, 3.0), r(-3.0, 3.0));
            let f2 = vec3(r(-3.0, 3.0), r(-3.0, 3.0), r(-3.0, 3.0));
            let (a, b) = (0.3, 0.6);
            let combo = AgentState {
                pos: s1.pos * a + s2.pos * b,
                vel: s1.vel * a + s2.vel * b,
            };
            let lhs = step(&combo, f1 * a + f2 * b, &p).unwrap();
            let r1 = step(&s1, f1, &p).unwrap();
            let r2 = step(&s2, f2, &p).unwrap();
            let rhs_pos = r1.pos * a + r2.pos * b;
            let rhs_vel = r1.vel * a + r2.vel * b;
            assert!(lhs.pos.dist(rhs_pos) < 1e-9);
            assert!(lhs.vel.dist(rhs_vel) < 1e-9);
        }
    }

    /// Independent closed-form oracle: states as 6-vectors, x_{t+1} = A x_t
    /// + B u_t with A = [[I, dt·I], [0, (1−drag)·I]], B = [[0], [dt/m·I]],
    /// evaluated by explicit matrix powers.
    fn closed_form(x0: &AgentState, forces: &[Vec3], p: &KinematicParams) -> Vec<[f64; 6]> {
        let mut a = [[0.0f64; 6]; 6];
        for i in 0..3 {
            a[i][i] = 1.0;
            a[i][i + 3] = p.dt;
            a[i + 3][i + 3] = 1.0 - p.drag;
        }
        let matmul = |m: &[[f64; 6]; 6], n: &[[f64; 6]; 6]| {
            let mut out = [[0.0f64; 6]; 6];
            for i in 0..6 {
                for k in 0..6 {
                    if m[i][k] == 0.0 {
                        continue;
                    }
                    for j in 0..6 {
                        out[i][j] += m[i][k] * n[k][j];
                    }
                }
            }
            out
        };
        let matvec = |m: &[[f64; 6]; 6], v: &[f64; 6]| {
            let mut out = [0.0f64; 6];
            for i in 0..6 {
                for j in 0..6 {
                    out[i] += m[i][j] * v[j];
                }
            }
            out
        };
        let mut a_pow = Vec::new(); // a_pow[k] = A^k
        let mut id = [[0.0f64; 6]; 6];
        for i in 0..6 {
            id[i][i] = 1.0;
        }
        a_pow.push(id);
        for k in 1..=forces.len() {
            a_pow.push(matmul(&a_pow[k - 1], &a));
        }
        let x0v = [x0.pos.x, x0.pos.y, x0.pos.z, x0.vel.x, x0.vel.y, x0.vel.z];
        let mut out = Vec::new();
        for t in 0..=forces.len() {
            let mut x = matvec(&a_pow[t], &x0v);
            for (tau, f) in forces.iter().enumerate().take(t) {
                // B u = [0, 0, 0, dt/m·f]; apply A^{t-tau-1} to it.
                let bu = [
                    0.0,
                    0.0,
                    0.0,
                    p.dt / p.mass * f.x,
                    p.dt / p.mass * f.y,
                    p.dt / p.mass * f.z,
                ];
                let contrib = matvec(&a_pow[t - tau - 1], &bu);
                for i in 0..6 {
                    x[i] += contrib[i];
                }
            }
            out.push(x);
        }
        out
    }

    #[test]
    fn rollout_matches_matrix_power_oracle() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let mut r = |lo: f64, hi: f64| rng.gen_range(lo..hi);
            let x0 = AgentState {
                pos: vec3(r(-20.0, 20.0), r(-20.0, 20.0), r(-20.0, 20.0)),
                vel: vec3(r(-5.0, 5.0), r(-5.0, 5.0), r(-5.0, 5.0)),
            };
            let forces: Vec<Vec3> = (0..10)
                .map(|_| {
                    vec3(
                        rng.gen_range(-10.0..10.0),
                        rng.gen_range(-10.0..10.0),
                        rng.gen_range(-10.0..10.0),
                    )
                })
                .collect();
            let got = rollout(&x0, &forces, &p).unwrap();
            let want = closed_form(&x0, &forces, &p);
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                let gv = [g.pos.x, g.pos.y, g.pos.z, g.vel.x, g.vel.y, g.vel.z];
                for i in 0..6 {
                    assert!((gv[i] - w[i]).abs() < 1e-9, "component {i}: {} vs {}", gv[i], w[i]);
                }
            }
        }
    }

    #[test]
    fn rollout_empty_returns_start() {
        let p = params();
        let x0 = AgentState {
            pos: vec3(1.0, 2.0, 3.0),
            vel: Vec3::ZERO,
        };
        let states = rollout(&x0, &[], &p).unwrap();
        assert_eq!(states.len(), 1);
        assert_eq!(states[0].pos, x0.pos);
    }

    #[test]
    fn rollout_no_drag_velocity_grows_linearly() {
        let p = KinematicParams {
            drag: 0.0,
            ..params()
        };
        let x0 = AgentState {
            pos: Vec3::ZERO,
            vel: Vec3::ZERO,
        };
        let f = vec3(2.2, 0.0, 0.0);
        let states = rollout(&x0, &[f; 5], &p).unwrap();
        for (t, s) in states.iter().enumerate() {
            let expect = t as f64 * p.dt / p.mass * f.x;
            assert!((s.vel.x - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn fov_base_zoom_arithmetic() {
        let cam = camera();
        let c = fov_base(2.0, &cam).unwrap();
        assert!((c[0].z + 16.0).abs() < 1e-12); // h' = 8·2
        assert!((c[0].x - 4.75 / 2.0).abs() < 1e-12); // l' = 9.5/2
        assert_eq!(c[4], Vec3::ZERO);

        let c1 = fov_base(1.0, &cam).unwrap();
        assert!((c1[0].z + 8.0).abs() < 1e-12);
        assert!((c1[0].x - 4.75).abs() < 1e-12);

        // Zooming in trades footprint for reach: (l'·w')·h' = l·w·h / z,
        // so the pyramid volume l'w'h'/3 shrinks by the zoom factor.
        for &z in &cam.zoom_levels {
            let c = fov_base(z, &cam).unwrap();
            let l = (c[0].x - c[1].x).abs();
            let w = (c[0].y - c[3].y).abs();
            let h = -c[0].z;
            assert!((l * w * h - 9.5 * 9.5 * 8.0 / z).abs() < 1e-9);
        }

        assert!(matches!(
            fov_base(3.0, &cam),
            Err(AgentError::InvalidZoom(_))
        ));
    }

    #[test]
    fn fov_pose_identity_and_tilt() {
        let cam = camera();
        let cfg = CameraConfig {
            index: 0,
            zoom: 1.0,
            theta: 0.0,
            phi: 0.0,
        };
        let pos = vec3(10.0, 20.0, 30.0);
        // theta=0/phi=0 is not in the sets, but fov_pose only validates zoom.
        let pose = fov_pose(&cfg, pos, &cam).unwrap();
        let base = fov_base(1.0, &cam).unwrap();
        for i in 0..5 {
            assert!(pose.vertices[i].dist(base[i] + pos) < 1e-12);
        }
        assert_eq!(pose.hull.face_count(), 5);
        assert_eq!(pose.vertices[4], pos);

        // Tilt by 90°: canonical base centroid (0,0,−h) maps to (−h,0,0).
        let cfg = CameraConfig {
            index: 0,
            zoom: 1.0,
            theta: PI / 2.0,
            phi: 0.0,
        };
        let pose = fov_pose(&cfg, Vec3::ZERO, &cam).unwrap();
        let centroid = (pose.vertices[0]
            + pose.vertices[1]
            + pose.vertices[2]
            + pose.vertices[3])
            * 0.25;
        assert!(centroid.dist(vec3(-8.0, 0.0, 0.0)) < 1e-9);
    }

    #[test]
    fn rotations_orthonormal_and_distance_preserving() {
        let cam = camera();
        let ex = vec3(1.0, 0.0, 0.0);
        let ey = vec3(0.0, 1.0, 0.0);
        let ez = vec3(0.0, 0.0, 1.0);
        for &theta in &cam.thetas {
            for &phi in &cam.phis {
                let rot = |v: Vec3| rot_phi(phi, rot_theta(theta, v));
                let cols = [rot(ex), rot(ey), rot(ez)];
                for i in 0..3 {
                    for j in 0..3 {
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((cols[i].dot(cols[j]) - want).abs() < 1e-12);
                    }
                }
            }
        }
        // Vertex pair distances preserved under rotation.
        let base = fov_base(2.0, &cam).unwrap();
        let rot = |v: Vec3| rot_phi(1.1, rot_theta(0.7, v));
        for i in 0..5 {
            for j in 0..5 {
                let d0 = base[i].dist(base[j]);
                let d1 = rot(base[i]).dist(rot(base[j]));
                assert!((d0 - d1).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn light_rays_grid_inside_hull() {
        let cam = camera();
        let cfg = CameraConfig {
            index: 0,
            zoom: 1.0,
            theta: PI / 6.0,
            phi: PI,
        };
        let pose = fov_pose(&cfg, vec3(5.0, 5.0, 20.0), &cam).unwrap();

        let single = light_rays(&pose, 1, None);
        assert_eq!(single.len(), 1);
        let centroid = (pose.vertices[0]
            + pose.vertices[1]
            + pose.vertices[2]
            + pose.vertices[3])
            * 0.25;
        assert!(single[0].origin.dist(centroid) < 1e-9);

        let rays = light_rays(&pose, cam.n_rays, None);
        assert_eq!(rays.len(), 50);
        for ray in &rays {
            assert!(pose.hull.contains_with(ray.origin, 1e-7));
            // Whole parameter range stays inside the pyramid.
            for k in 0..=10 {
                let d = k as f64 / 10.0;
                let p = ray.origin + (ray.endpoint - ray.origin) * d;
                assert!(pose.hull.contains_with(p, 1e-7));
            }
        }
    }

    #[test]
    fn light_rays_seeded_deterministic() {
        let cam = camera();
        let cfg = CameraConfig {
            index: 0,
            zoom: 2.0,
            theta: PI / 2.0,
            phi: PI / 6.0,
        };
        let pose = fov_pose(&cfg, Vec3::ZERO, &cam).unwrap();
        let a = light_rays(&pose, 20, Some(42));
        let b = light_rays(&pose, 20, Some(42));
        let c = light_rays(&pose, 20, Some(43));
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.origin, rb.origin);
        }
        assert!(a.iter().zip(&c).any(|(ra, rc)| ra.origin != rc.origin));
        for ray in &a {
            assert!(pose.hull.contains_with(ray.origin, 1e-7));
        }
    }

    #[test]
    fn enumerate_configs_canonical_order() {
        let cam = camera();
        let configs = enumerate_configs(&cam);
        assert_eq!(configs.len(), 30);
        for (i, c) in configs.iter().enumerate() {
            assert_eq!(c.index, i);
        }
        // Zoom-major: first half all zoom 1, second half zoom 2.
        assert!(configs[..15].iter().all(|c| c.zoom == 1.0));
        assert!(configs[15..].iter().all(|c| c.zoom == 2.0));
        // Then tilt-major within a zoom block: 5 pans per tilt.
        assert!(configs[..5].iter().all(|c| c.theta == cam.thetas[0]));
        assert_eq!(configs[5].theta, cam.thetas[1]);

        let single = CameraParams {
            zoom_levels: vec![1.0],
            thetas: vec![PI / 2.0],
            phis: vec![0.0],
            ..camera()
        };
        assert_eq!(enumerate_configs(&single).len(), 1);
    }
}
