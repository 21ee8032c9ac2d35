//! Coverage-planning domain library.
//!
//! A UAV with a gimballed zoom camera must see every facet of a triangulated
//! object. The crate layers up from tolerance-controlled 3D geometry through
//! the vehicle/camera models, scenario files, and ray-traced visibility
//! learning to a receding-horizon mixed-integer planner and a
//! waypoint-spline baseline used for comparison.

pub mod agent;
pub mod geometry;
pub mod baseline;
pub mod planner;
#[cfg(test)]
pub(crate) mod testfix;
pub mod raytrace;
pub mod world;
