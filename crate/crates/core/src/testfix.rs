//! Shared in-crate test fixtures: a small three-cell-per-axis world with a
//! one-config downward camera and two floor triangles.

use crate::agent::{AgentState, CameraParams, KinematicParams};
use crate::geometry::{vec3, Vec3};
use crate::raytrace::{learn_table, VisibilityTable};
use crate::world::{parse_mesh, Environment, ObjectiveWeights, ObstacleSet, Scenario};

/// Two-facet scene: facet 0 is a floor triangle near the center; facet 1
/// sits strictly inside facet 0's shadow slightly below it, so no light
/// ray can ever report it as the nearest hit.
pub const MESH_WITH_HIDDEN_FACET: &str = "\
v 12 12 0\nv 18 12 0\nv 18 18 0\n\
v 13 12.7 -0.1\nv 17.3 12.7 -0.1\nv 17.3 17 -0.1\n\
f 1 2 3\nf 4 5 6\n";

/// One floor triangle near the center and one in the far corner.
pub const MESH_TWO_REACHABLE: &str = "\
v 12 12 0\nv 18 12 0\nv 18 18 0\n\
v 2 2 0\nv 8 2 0\nv 8 8 0\n\
f 1 2 3\nf 4 5 6\n";

/// A single floor triangle near the center.
pub const MESH_ONE_FACET: &str = "v 12 12 0\nv 18 12 0\nv 18 18 0\nf 1 2 3\n";

pub fn tiny_scenario(mesh_text: &str, horizon: usize) -> Scenario {
    let mesh = parse_mesh(mesh_text).expect("fixture mesh");
    Scenario {
        environment: Environment {
            min_corner: vec3(0.0, 0.0, 0.0),
            max_corner: vec3(30.0, 30.0, 30.0),
            grid_dims: (3, 3, 3),
        },
        mesh,
        obstacles: ObstacleSet::from_vertex_sets(&[]).expect("empty set"),
        kinematics: KinematicParams {
            dt: 1.0,
            drag: 0.2,
            mass: 1.0,
            vel_bound: 5.0,
            force_bound: 10.0,
        },
        camera: CameraParams {
            base_len: 9.0,
            base_wid: 9.0,
            range: 9.0,
            zoom_levels: vec![1.0],
            thetas: vec![0.0],
            phis: vec![0.0],
            n_rays: 50,
        },
        objective: ObjectiveWeights {
            omega: 0.1,
            omega_hat: 10.0,
            delta: 10.0,
        },
        horizon,
        mission_limit: 60,
        seed: 3,
        start: AgentState {
            pos: vec3(15.0, 15.0, 8.0),
            vel: Vec3::ZERO,
        },
    }
}

pub fn tiny_table(sc: &Scenario) -> VisibilityTable {
    learn_table(&sc.environment, &sc.camera, &sc.mesh, 40, sc.seed)
}
