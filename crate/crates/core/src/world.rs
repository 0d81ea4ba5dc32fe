//! Runtime obstacle state shared by the planners, the simulator and the
//! metric replay.

use crate::field::ObstacleId;
use crate::geom::{plane_foot, plane_inside, BoundingSphere, RectPlane, Shape, Vec3};

/// Axis-aligned workspace box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Vec3>) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let (min, max) = it.fold((first, first), |(lo, hi), p| (lo.inf(p), hi.sup(p)));
        Some(Aabb { min, max })
    }

    pub fn contains_sphere(&self, b: &BoundingSphere) -> bool {
        (0..3).all(|a| b.center[a] - b.radius >= self.min[a] && b.center[a] + b.radius <= self.max[a])
    }

    /// Six inward-facing walls of the box.
    pub fn walls(&self) -> Vec<RectPlane> {
        let (lo, hi) = (self.min, self.max);
        let c = (lo + hi) * 0.5;
        let h = (hi - lo) * 0.5;
        let mut walls = Vec::with_capacity(6);
        for axis in 0..3 {
            let (b, d) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut u = Vec3::zeros();
            u[b] = h[b];
            let mut v = Vec3::zeros();
            v[d] = h[d];
            for side in [-1.0, 1.0] {
                let mut center = c;
                center[axis] += side * h[axis];
                let mut wall = RectPlane::from_center(center, u, v).expect("box walls are rectangles");
                // Normal must point into the box.
                if wall.normal()[axis] * side > 0.0 {
                    wall = wall.reversed();
                }
                walls.push(wall);
            }
        }
        walls
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldObstacle {
    pub shape: Shape,
    /// Resolved repulsive gain.
    pub gain: f64,
    /// Current drift velocity (zero for static obstacles).
    pub velocity: Vec3,
    pub bound: BoundingSphere,
}

impl WorldObstacle {
    pub fn new(shape: Shape, gain: f64, velocity: Vec3) -> Self {
        let bound = shape.bounding_sphere();
        WorldObstacle {
            shape,
            gain,
            velocity,
            bound,
        }
    }

    pub fn is_dynamic(&self) -> bool {
        self.velocity != Vec3::zeros()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub obstacles: Vec<WorldObstacle>,
    pub boundary: Vec<RectPlane>,
    /// Box that drifting obstacles reflect off.
    pub limits: Option<Aabb>,
}

impl World {
    pub fn new(obstacles: Vec<WorldObstacle>, boundary: Vec<RectPlane>) -> Self {
        let limits = Aabb::from_points(boundary.iter().flat_map(|w| w.vertices().iter()));
        World {
            obstacles,
            boundary,
            limits,
        }
    }

    pub fn is_dynamic(&self) -> bool {
        self.obstacles.iter().any(WorldObstacle::is_dynamic)
    }

    /// Moves every drifting obstacle by one step of constant-velocity drift.
    /// A velocity component is reflected before a move that would push the
    /// bounding sphere out of the workspace box.
    pub fn advance(&mut self, dt: f64) {
        for ob in self.obstacles.iter_mut().filter(|o| o.is_dynamic()) {
            if let Some(lim) = &self.limits {
                for a in 0..3 {
                    let next = ob.bound.center[a] + ob.velocity[a] * dt;
                    if (ob.velocity[a] < 0.0 && next - ob.bound.radius < lim.min[a])
                        || (ob.velocity[a] > 0.0 && next + ob.bound.radius > lim.max[a])
                    {
                        ob.velocity[a] = -ob.velocity[a];
                    }
                }
            }
            let delta = ob.velocity * dt;
            ob.shape.translate(&delta);
            ob.bound.center += delta;
        }
    }

    /// Smallest distance from `p` to any obstacle (boundary walls excluded),
    /// `+inf` when there are none.
    pub fn min_distance(&self, p: &Vec3) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.shape.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// First obstacle or wall the robot touched or passed through while
    /// moving from `from` to `to`, with the contact point. A pierced plane
    /// reports the piercing point.
    pub fn contact(&self, from: &Vec3, to: &Vec3) -> Option<(ObstacleId, Vec3)> {
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.bound.distance_lower_bound(to) > 0.0 && !matches!(o.shape, Shape::Plane(_)) {
                continue;
            }
            if let Shape::Plane(p) = &o.shape {
                if let Some(hit) = crossing(from, to, p) {
                    return Some((ObstacleId::Obstacle(i), hit));
                }
            }
            if o.shape.distance(to) <= 0.0 {
                return Some((ObstacleId::Obstacle(i), *to));
            }
        }
        for (j, w) in self.boundary.iter().enumerate() {
            if let Some(hit) = crossing(from, to, w) {
                return Some((ObstacleId::Boundary(j), hit));
            }
            if plane_foot(to, w).1 <= 0.0 {
                return Some((ObstacleId::Boundary(j), *to));
            }
        }
        None
    }
}

/// Point where the straight move `from -> to` meets the rectangle, if any.
/// A move ending exactly on the plane counts.
pub fn crossing(from: &Vec3, to: &Vec3, p: &RectPlane) -> Option<Vec3> {
    let (_, a) = plane_foot(from, p);
    let (_, b) = plane_foot(to, p);
    if (a > 0.0 && b > 0.0) || (a < 0.0 && b < 0.0) || a == b {
        return None;
    }
    let s = a / (a - b);
    let hit = from + s * (to - from);
    plane_inside(&hit, p).then_some(hit)
}
