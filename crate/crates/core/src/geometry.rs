//! Tolerance-controlled 3D primitives: vectors, planes, triangles, convex
//! hulls in half-space form, ray–plane intersection, and containment tests.
//!
//! All predicates treat boundaries as closed sets so membership never
//! flickers on shared edges, and every tolerance is an explicit named
//! constant rather than an ad-hoc literal.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Parallelism cutoff for ray–plane denominators.
pub const EPS_PAR: f64 = 1e-9;
/// Slack on barycentric coordinates (boundary-inclusive containment).
pub const EPS_BARY: f64 = 1e-9;
/// Maximum distance from a plane at which a point still counts as on it.
pub const EPS_PLANE: f64 = 1e-6;
/// Triangles with less area than this are degenerate.
pub const EPS_AREA: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("degenerate hull: input points are affinely dependent")]
    DegenerateHull,
    #[error("degenerate triangle (area {0} below {EPS_AREA})")]
    DegenerateTriangle(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3 { x, y, z }
}

impl Vec3 {
    pub const ZERO: Vec3 = vec3(0.0, 0.0, 0.0);

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        vec3(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Vec3 {
        let n = self.norm();
        self * (1.0 / n)
    }

    pub fn min_comp(self, o: Vec3) -> Vec3 {
        vec3(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max_comp(self, o: Vec3) -> Vec3 {
        vec3(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Component by axis index (0 = x, 1 = y, 2 = z).
    pub fn comp(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl std::ops::Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        vec3(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        vec3(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl std::ops::Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        vec3(self.x * s, self.y * s, self.z * s)
    }
}

impl std::ops::Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        vec3(-self.x, -self.y, -self.z)
    }
}

/// Oriented plane: the locus `normal · x = offset`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    /// Signed value `normal · p − offset` (> 0 on the outward side).
    pub fn eval(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Plane through three points with unit normal following the winding.
    pub fn from_points(a: Vec3, b: Vec3, c: Vec3) -> Plane {
        let n = (b - a).cross(c - a).normalized();
        Plane {
            normal: n,
            offset: n.dot(a),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Triangle {
    pub v0: Vec3,
    pub v1: Vec3,
    pub v2: Vec3,
}

impl Triangle {
    pub fn new(v0: Vec3, v1: Vec3, v2: Vec3) -> Result<Triangle, GeomError> {
        let t = Triangle { v0, v1, v2 };
        let area = t.area();
        if area <= EPS_AREA {
            return Err(GeomError::DegenerateTriangle(area));
        }
        Ok(t)
    }

    pub fn area(&self) -> f64 {
        0.5 * (self.v1 - self.v0).cross(self.v2 - self.v0).norm()
    }

    pub fn centroid(&self) -> Vec3 {
        (self.v0 + self.v1 + self.v2) * (1.0 / 3.0)
    }

    /// Unit-normal plane following the vertex winding (right-hand rule).
    pub fn plane(&self) -> Plane {
        Plane::from_points(self.v0, self.v1, self.v2)
    }
}

/// Intersection parameter `d` of the segment `origin + d·(endpoint − origin)`
/// with a plane; `None` when the segment direction is parallel to the plane.
pub fn ray_plane_intersect(origin: Vec3, endpoint: Vec3, plane: Plane) -> Option<f64> {
    let denom = plane.normal.dot(endpoint - origin);
    if denom.abs() < EPS_PAR {
        return None;
    }
    Some((plane.offset - plane.normal.dot(origin)) / denom)
}

/// Closed containment of a near-coplanar point in a triangle. Points farther
/// than [`EPS_PLANE`] from the triangle's plane are never contained.
pub fn point_in_triangle(p: Vec3, tri: &Triangle) -> bool {
    let plane = tri.plane();
    if plane.eval(p).abs() > EPS_PLANE {
        return false;
    }
    let e0 = tri.v1 - tri.v0;
    let e1 = tri.v2 - tri.v0;
    let ep = p - tri.v0;
    let d00 = e0.dot(e0);
    let d01 = e0.dot(e1);
    let d11 = e1.dot(e1);
    let d20 = ep.dot(e0);
    let d21 = ep.dot(e1);
    let denom = d00 * d11 - d01 * d01;
    if denom.abs() < f64::MIN_POSITIVE {
        return false;
    }
    let v = (d11 * d20 - d01 * d21) / denom;
    let w = (d00 * d21 - d01 * d20) / denom;
    let u = 1.0 - v - w;
    u >= -EPS_BARY && v >= -EPS_BARY && w >= -EPS_BARY
}

/// Euclidean distance from a point to a (solid) triangle.
pub fn point_triangle_distance(p: Vec3, tri: &Triangle) -> f64 {
    // Region classification after Ericson, "Real-Time Collision Detection".
    let a = tri.v0;
    let b = tri.v1;
    let c = tri.v2;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return p.dist(a);
    }
    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return p.dist(b);
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return p.dist(a + ab * v);
    }
    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return p.dist(c);
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return p.dist(a + ac * w);
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return p.dist(b + (c - b) * w);
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    p.dist(a + ab * v + ac * w)
}

/// Convex polytope as an intersection of outward half-spaces
/// `normal_i · x ≤ offset_i`, with a containment tolerance scaled to the
/// polytope's diameter at construction time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvexHullH {
    pub faces: Vec<Plane>,
    /// Containment slack: 1e-9 × (1 + input diameter).
    pub tol: f64,
}

impl ConvexHullH {
    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Closed containment with the hull's own tolerance.
    pub fn contains(&self, p: Vec3) -> bool {
        self.contains_with(p, self.tol)
    }

    pub fn contains_with(&self, p: Vec3, eps: f64) -> bool {
        self.faces.iter().all(|f| f.eval(p) <= eps)
    }

    /// Largest face violation (≤ 0 inside).
    pub fn max_violation(&self, p: Vec3) -> f64 {
        self.faces
            .iter()
            .map(|f| f.eval(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Half-space representation of the convex hull of a point set.
///
/// Incremental construction; coplanar output faces are merged into single
/// planes and the face list is sorted lexicographically by (normal, offset)
/// so identical inputs serialize identically.
pub fn hull_from_points(points: &[Vec3]) -> Result<ConvexHullH, GeomError> {
    if points.len() < 4 {
        return Err(GeomError::DegenerateHull);
    }
    let mut lo = points[0];
    let mut hi = points[0];
    for &p in points {
        lo = lo.min_comp(p);
        hi = hi.max_comp(p);
    }
    let diameter = hi.dist(lo);
    let scale = 1.0 + diameter;
    let vis_tol = 1e-9 * scale;

    // Seed tetrahedron: spread-out extremes keep the start well-conditioned.
    let i0 = 0usize;
    let i1 = argmax(points, |p| p.dist(points[i0]));
    if points[i1].dist(points[i0]) <= 1e-12 * scale {
        return Err(GeomError::DegenerateHull);
    }
    let dir = points[i1] - points[i0];
    let i2 = argmax(points, |p| {
        let v = *p - points[i0];
        v.cross(dir).norm()
    });
    let line_dev = (points[i2] - points[i0]).cross(dir).norm() / dir.norm();
    if line_dev <= 1e-12 * scale {
        return Err(GeomError::DegenerateHull);
    }
    let seed_plane = Plane::from_points(points[i0], points[i1], points[i2]);
    let i3 = argmax(points, |p| seed_plane.eval(*p).abs());
    if seed_plane.eval(points[i3]).abs() <= 1e-12 * scale {
        return Err(GeomError::DegenerateHull);
    }

    // Interior reference for outward orientation.
    let centroid = (points[i0] + points[i1] + points[i2] + points[i3]) * 0.25;

    #[derive(Clone)]
    struct Face {
        verts: [usize; 3],
        plane: Plane,
        alive: bool,
    }
    let orient = |a: usize, b: usize, c: usize| -> Face {
        let mut verts = [a, b, c];
        let mut plane = Plane::from_points(points[a], points[b], points[c]);
        if plane.eval(centroid) > 0.0 {
            verts = [a, c, b];
            plane = Plane::from_points(points[a], points[c], points[b]);
        }
        Face {
            verts,
            plane,
            alive: true,
        }
    };
    let mut faces = vec![
        orient(i0, i1, i2),
        orient(i0, i1, i3),
        orient(i0, i2, i3),
        orient(i1, i2, i3),
    ];

    let seeds = [i0, i1, i2, i3];
    for (idx, &p) in points.iter().enumerate() {
        if seeds.contains(&idx) {
            continue;
        }
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && f.plane.eval(p) > vis_tol)
            .map(|(i, _)| i)
            .collect();
        if visible.is_empty() {
            continue;
        }
        // Horizon: edges belonging to exactly one visible face.
        let mut edge_count: std::collections::HashMap<(usize, usize), (usize, usize)> =
            std::collections::HashMap::new();
        for &fi in &visible {
            let v = faces[fi].verts;
            for (a, b) in [(v[0], v[1]), (v[1], v[2]), (v[2], v[0])] {
                let key = (a.min(b), a.max(b));
                let e = edge_count.entry(key).or_insert((0, 0));
                e.0 += 1;
                e.1 = a; // remember one oriented endpoint (unused below)
            }
        }
        for &fi in &visible {
            faces[fi].alive = false;
        }
        let mut horizon: Vec<(usize, usize)> = edge_count
            .iter()
            .filter(|(_, &(count, _))| count == 1)
            .map(|(&(a, b), _)| (a, b))
            .collect();
        horizon.sort_unstable();
        for (a, b) in horizon {
            faces.push(orient(a, b, idx));
        }
    }

    // Merge coplanar faces and canonicalize the order.
    let merge_tol = 1e-7;
    let mut planes: Vec<Plane> = Vec::new();
    for f in faces.iter().filter(|f| f.alive) {
        let dup = planes.iter().any(|q| {
            (q.normal - f.plane.normal).norm() < merge_tol
                && (q.offset - f.plane.offset).abs() < merge_tol * scale
        });
        if !dup {
            planes.push(f.plane);
        }
    }
    planes.sort_by(|a, b| {
        (a.normal.x, a.normal.y, a.normal.z, a.offset)
            .partial_cmp(&(b.normal.x, b.normal.y, b.normal.z, b.offset))
            .unwrap()
    });
    if planes.len() < 4 {
        return Err(GeomError::DegenerateHull);
    }
    Ok(ConvexHullH {
        faces: planes,
        tol: 1e-9 * scale,
    })
}

fn argmax<F: Fn(&Vec3) -> f64>(points: &[Vec3], score: F) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, p) in points.iter().enumerate() {
        let v = score(p);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

/// Axis-aligned box in half-space form (6 faces, axis-unit normals).
pub fn aabb_hull(min_corner: Vec3, max_corner: Vec3) -> ConvexHullH {
    let faces = vec![
        Plane {
            normal: vec3(-1.0, 0.0, 0.0),
            offset: -min_corner.x,
        },
        Plane {
            normal: vec3(0.0, -1.0, 0.0),
            offset: -min_corner.y,
        },
        Plane {
            normal: vec3(0.0, 0.0, -1.0),
            offset: -min_corner.z,
        },
        Plane {
            normal: vec3(1.0, 0.0, 0.0),
            offset: max_corner.x,
        },
        Plane {
            normal: vec3(0.0, 1.0, 0.0),
            offset: max_corner.y,
        },
        Plane {
            normal: vec3(0.0, 0.0, 1.0),
            offset: max_corner.z,
        },
    ];
    ConvexHullH {
        faces,
        tol: 1e-9 * (1.0 + max_corner.dist(min_corner)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_tri() -> Triangle {
        Triangle::new(vec3(0.0, 0.0, 0.0), vec3(1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0)).unwrap()
    }

    #[test]
    fn ray_plane_symmetric_crossing() {
        let plane = Plane {
            normal: vec3(0.0, 0.0, 1.0),
            offset: 0.0,
        };
        let d = ray_plane_intersect(vec3(0.0, 0.0, -1.0), vec3(0.0, 0.0, 1.0), plane).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ray_plane_parallel_is_none() {
        let plane = Plane {
            normal: vec3(0.0, 0.0, 1.0),
            offset: 0.0,
        };
        assert!(ray_plane_intersect(vec3(0.0, 0.0, 1.0), vec3(1.0, 0.0, 1.0), plane).is_none());
    }

    #[test]
    fn ray_plane_endpoint_on_plane() {
        let plane = Plane {
            normal: vec3(0.0, 0.0, 1.0),
            offset: 0.0,
        };
        let d = ray_plane_intersect(vec3(0.0, 0.0, -2.0), vec3(0.0, 0.0, 0.0), plane).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ray_plane_resubstitution_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let r = |rng: &mut ChaCha8Rng| rng.gen_range(-10.0..10.0);
            let o = vec3(r(&mut rng), r(&mut rng), r(&mut rng));
            let e = vec3(r(&mut rng), r(&mut rng), r(&mut rng));
            let n = vec3(r(&mut rng), r(&mut rng), r(&mut rng));
            if n.norm() < 1e-3 || o.dist(e) < 1e-3 {
                continue;
            }
            let plane = Plane {
                normal: n.normalized(),
                offset: r(&mut rng),
            };
            if let Some(d) = ray_plane_intersect(o, e, plane) {
                let p = o + (e - o) * d;
                assert!(plane.eval(p).abs() <= 1e-6, "residual {}", plane.eval(p));
            }
        }
    }

    #[test]
    fn triangle_centroid_and_vertex_contained() {
        let t = unit_tri();
        assert!(point_in_triangle(t.centroid(), &t));
        assert!(point_in_triangle(vec3(1.0, 0.0, 0.0), &t));
        assert!(!point_in_triangle(vec3(2.0, 2.0, 0.0), &t));
        // Off-plane point never contained even above the centroid.
        assert!(!point_in_triangle(vec3(0.2, 0.2, 0.1), &t));
    }

    #[test]
    fn triangle_containment_matches_area_sum_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0;
        for _ in 0..1000 {
            let r = |rng: &mut ChaCha8Rng| rng.gen_range(-5.0..5.0);
            let t = match Triangle::new(
                vec3(r(&mut rng), r(&mut rng), r(&mut rng)),
                vec3(r(&mut rng), r(&mut rng), r(&mut rng)),
                vec3(r(&mut rng), r(&mut rng), r(&mut rng)),
            ) {
                Ok(t) => t,
                Err(_) => continue,
            };
            // Sample points on the triangle's plane: random barycentric
            // combos stretched past the boundary so both outcomes occur.
            let a = rng.gen_range(-0.4..1.4);
            let b = rng.gen_range(-0.4..1.4);
            let p = t.v0 + (t.v1 - t.v0) * a + (t.v2 - t.v0) * b;
            let got = point_in_triangle(p, &t);
            let area = t.area();
            let sub = Triangle { v0: p, ..t }.area()
                + Triangle { v1: p, ..t }.area()
                + Triangle { v2: p, ..t }.area();
            let oracle = (sub - area).abs() <= 1e-6 * area.max(1.0);
            // Skip knife-edge cases where the oracle itself is ambiguous.
            if (sub - area).abs() > 0.5e-6 * area.max(1.0)
                && (sub - area).abs() < 2e-6 * area.max(1.0)
            {
                continue;
            }
            assert_eq!(got, oracle, "p={p:?} tri={t:?}");
            hits += got as u32;
        }
        assert!(hits > 100, "sampler never hit the inside");
    }

    #[test]
    fn cube_hull_has_six_faces_and_contains_inputs() {
        let mut pts = Vec::new();
        for &x in &[0.0, 1.0] {
            for &y in &[0.0, 1.0] {
                for &z in &[0.0, 1.0] {
                    pts.push(vec3(x, y, z));
                }
            }
        }
        let hull = hull_from_points(&pts).unwrap();
        assert_eq!(hull.face_count(), 6);
        for &p in &pts {
            assert!(hull.contains(p));
        }
        assert!(hull.contains(vec3(0.5, 0.5, 0.5)));
        assert!(!hull.contains(vec3(1.5, 0.5, 0.5)));
    }

    #[test]
    fn tetrahedron_hull_has_four_faces() {
        let pts = [
            vec3(1.0, 1.0, 1.0),
            vec3(1.0, -1.0, -1.0),
            vec3(-1.0, 1.0, -1.0),
            vec3(-1.0, -1.0, 1.0),
        ];
        let hull = hull_from_points(&pts).unwrap();
        assert_eq!(hull.face_count(), 4);
    }

    #[test]
    fn coplanar_points_rejected() {
        let pts = [
            vec3(0.0, 0.0, 0.0),
            vec3(1.0, 0.0, 0.0),
            vec3(0.0, 1.0, 0.0),
            vec3(1.0, 1.0, 0.0),
            vec3(0.5, 0.5, 0.0),
        ];
        assert!(matches!(
            hull_from_points(&pts),
            Err(GeomError::DegenerateHull)
        ));
    }

    #[test]
    fn hull_contains_random_convex_combinations() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let pts: Vec<Vec3> = (0..12)
            .map(|_| {
                vec3(
                    rng.gen_range(-4.0..4.0),
                    rng.gen_range(-4.0..4.0),
                    rng.gen_range(-4.0..4.0),
                )
            })
            .collect();
        let hull = hull_from_points(&pts).unwrap();
        for &p in &pts {
            assert!(hull.contains(p), "input point escaped hull: {p:?}");
        }
        for _ in 0..1000 {
            let mut weights: Vec<f64> = (0..pts.len()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let s: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= s);
            let mut p = Vec3::ZERO;
            for (w, q) in weights.iter().zip(&pts) {
                p = p + *q * *w;
            }
            assert!(hull.contains_with(p, 1e-7), "convex combo escaped: {p:?}");
        }
    }

    #[test]
    fn predicates_invariant_under_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let shift = vec3(13.7, -4.2, 8.9);
        for _ in 0..200 {
            let r = |rng: &mut ChaCha8Rng| rng.gen_range(-3.0..3.0);
            let t = match Triangle::new(
                vec3(r(&mut rng), r(&mut rng), r(&mut rng)),
                vec3(r(&mut rng), r(&mut rng), r(&mut rng)),
                vec3(r(&mut rng), r(&mut rng), r(&mut rng)),
            ) {
                Ok(t) => t,
                Err(_) => continue,
            };
            let a = rng.gen_range(-0.3..1.3);
            let b = rng.gen_range(-0.3..1.3);
            let p = t.v0 + (t.v1 - t.v0) * a + (t.v2 - t.v0) * b;
            let t2 = Triangle {
                v0: t.v0 + shift,
                v1: t.v1 + shift,
                v2: t.v2 + shift,
            };
            assert_eq!(point_in_triangle(p, &t), point_in_triangle(p + shift, &t2));
        }
    }

    #[test]
    fn point_triangle_distance_cases() {
        let t = unit_tri();
        // Directly above the interior: distance equals height.
        assert!((point_triangle_distance(vec3(0.2, 0.2, 2.0), &t) - 2.0).abs() < 1e-12);
        // Closest to vertex.
        let d = point_triangle_distance(vec3(2.0, 0.0, 0.0), &t);
        assert!((d - 1.0).abs() < 1e-12);
        // Closest to an edge.
        let d = point_triangle_distance(vec3(0.5, -1.0, 0.0), &t);
        assert!((d - 1.0).abs() < 1e-12);
        // On the triangle: zero.
        assert!(point_triangle_distance(t.centroid(), &t) < 1e-12);
    }

    #[test]
    fn aabb_hull_containment() {
        let h = aabb_hull(vec3(0.0, 0.0, 0.0), vec3(1.0, 2.0, 3.0));
        assert_eq!(h.face_count(), 6);
        assert!(h.contains(vec3(0.5, 1.0, 1.5)));
        assert!(h.contains(vec3(0.0, 0.0, 0.0)));
        assert!(!h.contains(vec3(1.1, 1.0, 1.5)));
    }
}
