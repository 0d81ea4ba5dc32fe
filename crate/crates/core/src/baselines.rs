//! Sphere-cloud approximations of the primitives and the two sphere-based
//! baseline planners.

use std::f64::consts::PI;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::field::{attractive_force, boundary_force, CollisionSignal, Gains, ObstacleId, NEAR_CONTACT_CLAMP};
use crate::geom::{Cuboid, Cylinder, RectPlane, Segment, Shape, Sphere, Vec3, DEGENERACY_TOLERANCE};
use crate::world::World;

/// Speed below which the circulatory term has no direction.
pub const CF_MIN_SPEED: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpherizationParams {
    /// Sphere radius `r`; centers are placed at pitch at most `2r`.
    pub radius: f64,
    /// Gain of every sphere.
    pub k_rep: f64,
}

/// Number of samples covering `[0, len]` at pitch at most `2r`, ends included.
pub fn samples_along(len: f64, r: f64) -> usize {
    ((len / (2.0 * r) - 1e-9).ceil().max(0.0) as usize) + 1
}

fn lerp_points(a: Vec3, b: Vec3, n: usize) -> impl Iterator<Item = Vec3> {
    (0..n).map(move |i| {
        if n == 1 {
            a
        } else {
            a + (b - a) * (i as f64 / (n - 1) as f64)
        }
    })
}

fn segment_centers(s: &Segment, r: f64) -> Vec<Vec3> {
    lerp_points(s.p1(), s.p2(), samples_along(s.length(), r)).collect()
}

fn plane_centers(p: &RectPlane, r: f64) -> Vec<Vec3> {
    let v = p.vertices();
    let (a, b) = (v[1] - v[0], v[3] - v[0]);
    let (na, nb) = (samples_along(a.norm(), r), samples_along(b.norm(), r));
    let mut out = Vec::with_capacity(na * nb);
    for i in 0..na {
        let u = i as f64 / (na - 1) as f64;
        for j in 0..nb {
            let w = j as f64 / (nb - 1) as f64;
            out.push(v[0] + a * u + b * w);
        }
    }
    out
}

/// Surface points of the prism lattice; each shared edge point appears once.
fn cube_centers(c: &Cuboid, r: f64) -> Vec<Vec3> {
    let [a, b, h] = c.spanning_edges();
    let o = c.vertices()[0];
    let n = [a, b, h].map(|e| samples_along(e.norm(), r));
    let frac = |i: usize, n: usize| i as f64 / (n - 1) as f64;
    let mut out = Vec::new();
    for i in 0..n[0] {
        for j in 0..n[1] {
            for k in 0..n[2] {
                let on_surface = i == 0 || j == 0 || k == 0 || i == n[0] - 1 || j == n[1] - 1 || k == n[2] - 1;
                if on_surface {
                    out.push(o + a * frac(i, n[0]) + b * frac(j, n[1]) + h * frac(k, n[2]));
                }
            }
        }
    }
    out
}

/// Points on a circle of radius `rho` at arc spacing at most `2r`.
fn ring_count(rho: f64, r: f64) -> usize {
    ((PI * rho / r - 1e-9).ceil() as usize).max(3)
}

fn cylinder_centers(y: &Cylinder, r: f64) -> Vec<Vec3> {
    let u = y.axis_direction();
    let e1 = u.cross(&if u.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() }).normalize();
    let e2 = u.cross(&e1);
    let radius = y.radius();
    let ring = |center: Vec3, rho: f64, out: &mut Vec<Vec3>| {
        let m = ring_count(rho, r);
        for j in 0..m {
            let t = 2.0 * PI * j as f64 / m as f64;
            out.push(center + (e1 * t.cos() + e2 * t.sin()) * rho);
        }
    };
    let mut out = Vec::new();
    for c in lerp_points(y.a1(), y.a2(), samples_along(y.length(), r)) {
        ring(c, radius, &mut out);
    }
    // Cap discs: concentric rings inside the rim, which the axial rings
    // already cover.
    let rings = samples_along(radius, r) - 1;
    for cap in [y.a1(), y.a2()] {
        out.push(cap);
        for k in 1..rings {
            ring(cap, radius * k as f64 / rings as f64, &mut out);
        }
    }
    out
}

/// Sphere approximation of a primitive. Spheres pass through unchanged.
pub fn spherize(shape: &Shape, r: f64) -> Vec<Sphere> {
    let centers = match shape {
        Shape::Sphere(s) => return vec![*s],
        Shape::Segment(s) => segment_centers(s, r),
        Shape::Plane(p) => plane_centers(p, r),
        Shape::Cube(c) => cube_centers(c, r),
        Shape::Cylinder(y) => cylinder_centers(y, r),
    };
    centers
        .into_iter()
        .map(|center| Sphere { center, radius: r })
        .collect()
}

/// Flat sphere list of a whole world, grouped by owning obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereCloud {
    centers: Vec<Vec3>,
    radii: Vec<f64>,
    owner: Vec<usize>,
    ranges: Vec<Range<usize>>,
}

impl SphereCloud {
    pub fn from_world(world: &World, r: f64) -> Self {
        let mut cloud = SphereCloud {
            centers: Vec::new(),
            radii: Vec::new(),
            owner: Vec::new(),
            ranges: Vec::with_capacity(world.obstacles.len()),
        };
        for (i, ob) in world.obstacles.iter().enumerate() {
            let start = cloud.centers.len();
            for s in spherize(&ob.shape, r) {
                cloud.centers.push(s.center);
                cloud.radii.push(s.radius);
                cloud.owner.push(i);
            }
            cloud.ranges.push(start..cloud.centers.len());
        }
        cloud
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Spheres approximating obstacle `i`.
    pub fn count_for(&self, i: usize) -> usize {
        self.ranges[i].len()
    }

    pub fn spheres(&self) -> impl Iterator<Item = Sphere> + '_ {
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(&center, &radius)| Sphere { center, radius })
    }

    /// Moves the spheres of obstacle `i`.
    pub fn translate_owner(&mut self, i: usize, delta: &Vec3) {
        for c in &mut self.centers[self.ranges[i].clone()] {
            *c += delta;
        }
    }

    /// Keeps the cloud in step with drifting obstacles after `World::advance`.
    pub fn follow(&mut self, world: &World, dt: f64) {
        for (i, ob) in world.obstacles.iter().enumerate() {
            if ob.is_dynamic() {
                self.translate_owner(i, &(ob.velocity * dt));
            }
        }
    }

    #[inline]
    fn for_each_active(
        &self,
        robot: &Vec3,
        activation: f64,
        mut f: impl FnMut(Vec3, f64, f64),
    ) -> Result<(), CollisionSignal> {
        for (idx, c) in self.centers.iter().enumerate() {
            let diff = robot - c;
            let r = self.radii[idx];
            let lim = activation + r;
            let d2 = diff.norm_squared();
            if d2 >= lim * lim {
                continue;
            }
            let dist = d2.sqrt();
            let d = dist - r;
            if d <= 0.0 || dist <= DEGENERACY_TOLERANCE {
                return Err(CollisionSignal {
                    obstacle: ObstacleId::Obstacle(self.owner[idx]),
                });
            }
            f(diff, dist, d);
        }
        Ok(())
    }
}

/// Attraction plus radial `k / d` repulsion from every active sphere, plus
/// the boundary walls.
pub fn pf_force(
    robot: &Vec3,
    goal: &Vec3,
    cloud: &SphereCloud,
    k: f64,
    walls: &[RectPlane],
    gains: &Gains,
) -> Result<Vec3, CollisionSignal> {
    let mut f = attractive_force(robot, goal, gains);
    cloud.for_each_active(robot, gains.activation_radius, |diff, dist, d| {
        f += diff * ((k / d.max(NEAR_CONTACT_CLAMP)) / dist);
    })?;
    Ok(f + boundary_force(robot, walls, gains)?)
}

/// Circulatory term of one sphere: `v x normalize((robot - c) x v)`, or
/// `None` when it has no direction.
pub fn circulation_direction(rel: &Vec3, velocity: &Vec3) -> Option<Vec3> {
    let speed = velocity.norm();
    if speed < CF_MIN_SPEED {
        return None;
    }
    let b = rel.cross(velocity);
    let nb = b.norm();
    if nb <= DEGENERACY_TOLERANCE * rel.norm() * speed {
        return None;
    }
    let t = velocity.cross(&(b / nb));
    let nt = t.norm();
    (nt > DEGENERACY_TOLERANCE).then(|| t / nt)
}

/// Attraction plus a tangential `k / d` term per active sphere that steers
/// around it; radial repulsion where the tangent is undefined.
pub fn cf_force(
    robot: &Vec3,
    velocity: &Vec3,
    goal: &Vec3,
    cloud: &SphereCloud,
    k: f64,
    walls: &[RectPlane],
    gains: &Gains,
) -> Result<Vec3, CollisionSignal> {
    let mut f = attractive_force(robot, goal, gains);
    cloud.for_each_active(robot, gains.activation_radius, |diff, dist, d| {
        let mag = k / d.max(NEAR_CONTACT_CLAMP);
        f += match circulation_direction(&diff, velocity) {
            Some(t) => t * mag,
            None => diff * (mag / dist),
        };
    })?;
    Ok(f + boundary_force(robot, walls, gains)?)
}
