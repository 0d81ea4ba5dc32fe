//! Attractive and repulsive forces, the plane trap correction, and the
//! resultant over a whole world.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{
    cube_closest_face, cylinder_closest, plane_closest, plane_foot, plane_inside, segment_closest,
    ClosestFeature, Cylinder, Feature, RectPlane, Shape, Vec3, DEGENERACY_TOLERANCE,
};
use crate::world::World;

/// Distances below this are clamped when computing `k / d`.
pub const NEAR_CONTACT_CLAMP: f64 = 1e-4;
/// Robot-goal direction this close to parallel with a plane skips the correction.
pub const PARALLEL_TOLERANCE: f64 = 1e-9;
/// Edge distances closer than this are a tie.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Gains {
    pub k_attr: f64,
    /// Default repulsive gain for primitives without their own.
    pub k_rep: f64,
    pub activation_radius: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Gains {
            k_attr: 1.0,
            k_rep: 0.1,
            activation_radius: 0.1,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("gain `{name}` must be finite and > 0, got {value}")]
pub struct InvalidGain {
    pub name: &'static str,
    pub value: f64,
}

impl Gains {
    pub fn validate(&self) -> Result<(), InvalidGain> {
        for (name, value) in [
            ("k_attr", self.k_attr),
            ("k_rep", self.k_rep),
            ("activation_radius", self.activation_radius),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(InvalidGain { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ObstacleId {
    Obstacle(usize),
    Boundary(usize),
}

impl fmt::Display for ObstacleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObstacleId::Obstacle(i) => write!(f, "obstacle {i}"),
            ObstacleId::Boundary(i) => write!(f, "boundary wall {i}"),
        }
    }
}

/// The robot touches or penetrates an obstacle.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("collision with {obstacle}")]
pub struct CollisionSignal {
    pub obstacle: ObstacleId,
}

/// Contact with a single primitive, before the owning id is known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Penetration {
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ForceBreakdown {
    pub attractive: Vec3,
    /// Active obstacle terms in scene order.
    pub per_obstacle: Vec<(ObstacleId, Vec3)>,
    pub boundary: Vec3,
    pub resultant: Vec3,
}

pub fn attractive_force(robot: &Vec3, goal: &Vec3, gains: &Gains) -> Vec3 {
    let d = goal - robot;
    let n = d.norm();
    if n <= DEGENERACY_TOLERANCE {
        return Vec3::zeros();
    }
    d * (gains.k_attr / n)
}

/// `k / d` along the feature direction, zero at or beyond `activation`.
#[inline]
pub fn repulsive_force(feature: &ClosestFeature, k: f64, activation: f64) -> Vec3 {
    if feature.distance >= activation {
        return Vec3::zeros();
    }
    feature.direction * (k / feature.distance.max(NEAR_CONTACT_CLAMP))
}

/// Index and closest feature of the rectangle edge nearest to `robot`.
/// Ties are broken uniformly at random.
fn nearest_edge<R: Rng + ?Sized>(robot: &Vec3, p: &RectPlane, rng: &mut R) -> (usize, Vec3) {
    let mut feet = [(f64::INFINITY, Vec3::zeros()); 4];
    for (i, e) in p.edges().iter().enumerate() {
        feet[i] = match segment_closest(robot, e) {
            Ok(cf) => (cf.distance, cf.foot),
            Err(_) => (0.0, *robot),
        };
    }
    let best = feet.iter().map(|f| f.0).fold(f64::INFINITY, f64::min);
    let mut tied = [0usize; 4];
    let mut n = 0;
    for (i, f) in feet.iter().enumerate() {
        if f.0 - best <= TIE_TOLERANCE {
            tied[n] = i;
            n += 1;
        }
    }
    let pick = if n > 1 { tied[rng.random_range(0..n)] } else { tied[0] };
    (pick, feet[pick].1)
}

/// Where the segment robot -> goal meets the supporting plane through
/// `origin` with unit normal `n`, if it does.
fn goal_line_hit(robot: &Vec3, goal: &Vec3, origin: &Vec3, n: &Vec3) -> Option<Vec3> {
    let span = (robot - goal).norm();
    if span <= DEGENERACY_TOLERANCE {
        return None;
    }
    let n_rg = (robot - goal) / span;
    let denom = n_rg.dot(n);
    if denom.abs() < PARALLEL_TOLERANCE {
        return None;
    }
    let offset = n.dot(&(robot - origin));
    let d_inter = offset / denom;
    if !(0.0..=span).contains(&d_inter) {
        return None;
    }
    Some(robot - d_inter * n_rg)
}

/// Unit direction parallel to the plane that replaces the normal repulsion
/// when the straight path to the goal runs into the rectangle.
pub fn plane_correction_direction<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    p: &RectPlane,
    rng: &mut R,
) -> Option<Vec3> {
    let n = p.normal();
    let hit = goal_line_hit(robot, goal, &p.vertices()[0], &n)?;
    if !plane_inside(&hit, p) {
        return None;
    }
    let (i, edge_foot) = nearest_edge(robot, p, rng);
    let n_corr = n.cross(&p.edges()[i].direction());
    let s = if n_corr.dot(&(edge_foot - robot)) < 0.0 { -1.0 } else { 1.0 };
    Some(s * n_corr)
}

fn corrected_plane_force<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    p: &RectPlane,
    cf: &ClosestFeature,
    k: f64,
    activation: f64,
    rng: &mut R,
) -> Vec3 {
    if cf.distance >= activation {
        return Vec3::zeros();
    }
    match plane_correction_direction(robot, goal, p, rng) {
        Some(dir) => dir * (k / cf.distance.max(NEAR_CONTACT_CLAMP)),
        None => repulsive_force(cf, k, activation),
    }
}

/// Plane repulsion with the trap correction, using `gains.k_rep`.
pub fn plane_force_with_correction<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    p: &RectPlane,
    gains: &Gains,
    rng: &mut R,
) -> Result<Vec3, Penetration> {
    let cf = plane_closest(robot, p).map_err(|_| Penetration { distance: 0.0 })?;
    if cf.distance <= 0.0 {
        return Err(Penetration { distance: cf.distance });
    }
    Ok(corrected_plane_force(robot, goal, p, &cf, gains.k_rep, gains.activation_radius, rng))
}

/// Cap-side correction direction. The intersection is tested against the
/// cap disc; the nearest rim point lies along the radial direction of the
/// robot's foot on the cap plane.
pub fn cap_correction_direction<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    y: &Cylinder,
    top: bool,
    rng: &mut R,
) -> Option<Vec3> {
    let u = y.axis_direction();
    let (center, n) = if top { (y.a2(), u) } else { (y.a1(), -u) };
    let hit = goal_line_hit(robot, goal, &center, &n)?;
    if (hit - center).norm() > y.radius() {
        return None;
    }
    let offset = n.dot(&(robot - center));
    let radial = robot - offset * n - center;
    let rho = radial.norm();
    let radial = if rho > DEGENERACY_TOLERANCE * y.radius().max(1.0) {
        radial / rho
    } else {
        // On the axis every rim point is equally near.
        let e1 = n.cross(&if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() }).normalize();
        let e2 = n.cross(&e1);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        e1 * theta.cos() + e2 * theta.sin()
    };
    let rim = center + y.radius() * radial;
    let n_e = n.cross(&radial);
    let n_corr = n.cross(&n_e);
    let s = if n_corr.dot(&(rim - robot)) < 0.0 { -1.0 } else { 1.0 };
    Some(s * n_corr)
}

/// Cylinder repulsion for a robot over a cap, with the trap correction.
pub fn cylinder_cap_correction<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    y: &Cylinder,
    gains: &Gains,
    rng: &mut R,
) -> Result<Vec3, Penetration> {
    let cf = cylinder_closest(robot, y).map_err(|_| Penetration { distance: 0.0 })?;
    cylinder_force(robot, goal, y, &cf, gains.k_rep, gains.activation_radius, true, rng)
}

#[allow(clippy::too_many_arguments)]
fn cylinder_force<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    y: &Cylinder,
    cf: &ClosestFeature,
    k: f64,
    activation: f64,
    correction: bool,
    rng: &mut R,
) -> Result<Vec3, Penetration> {
    if cf.distance <= 0.0 {
        return Err(Penetration { distance: cf.distance });
    }
    if cf.distance >= activation {
        return Ok(Vec3::zeros());
    }
    let top = match cf.feature {
        Feature::CapTop => true,
        Feature::CapBottom => false,
        _ => return Ok(repulsive_force(cf, k, activation)),
    };
    if correction {
        if let Some(dir) = cap_correction_direction(robot, goal, y, top, rng) {
            return Ok(dir * (k / cf.distance.max(NEAR_CONTACT_CLAMP)));
        }
    }
    Ok(repulsive_force(cf, k, activation))
}

/// Force from one obstacle with gain `k`. `None` when it is out of range.
pub fn obstacle_force<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    shape: &Shape,
    k: f64,
    activation: f64,
    correction: bool,
    rng: &mut R,
) -> Result<Option<Vec3>, Penetration> {
    let touching = |_| Penetration { distance: 0.0 };
    let check = |cf: &ClosestFeature| {
        if cf.distance <= 0.0 {
            Err(Penetration { distance: cf.distance })
        } else {
            Ok(cf.distance < activation)
        }
    };
    let f = match shape {
        Shape::Plane(p) => {
            if plane_foot(robot, p).1.abs() >= activation {
                return Ok(None);
            }
            let cf = plane_closest(robot, p).map_err(touching)?;
            if !check(&cf)? {
                return Ok(None);
            }
            if correction {
                corrected_plane_force(robot, goal, p, &cf, k, activation, rng)
            } else {
                repulsive_force(&cf, k, activation)
            }
        }
        Shape::Cube(c) => {
            let (i, cf) = cube_closest_face(robot, c).map_err(touching)?;
            if !check(&cf)? {
                return Ok(None);
            }
            if correction {
                corrected_plane_force(robot, goal, &c.faces()[i].plane, &cf, k, activation, rng)
            } else {
                repulsive_force(&cf, k, activation)
            }
        }
        Shape::Cylinder(y) => {
            let cf = cylinder_closest(robot, y).map_err(touching)?;
            if !check(&cf)? {
                return Ok(None);
            }
            cylinder_force(robot, goal, y, &cf, k, activation, correction, rng)?
        }
        _ => {
            let cf = shape.closest(robot).map_err(touching)?;
            if !check(&cf)? {
                return Ok(None);
            }
            repulsive_force(&cf, k, activation)
        }
    };
    Ok(Some(f))
}

/// Sum of the wall repulsions. Walls never receive the trap correction.
pub fn boundary_force(robot: &Vec3, walls: &[RectPlane], gains: &Gains) -> Result<Vec3, CollisionSignal> {
    let mut sum = Vec3::zeros();
    for (j, w) in walls.iter().enumerate() {
        let (_, off) = plane_foot(robot, w);
        if off <= 0.0 {
            return Err(CollisionSignal {
                obstacle: ObstacleId::Boundary(j),
            });
        }
        if off >= gains.activation_radius {
            continue;
        }
        let cf = plane_closest(robot, w).map_err(|_| CollisionSignal {
            obstacle: ObstacleId::Boundary(j),
        })?;
        sum += repulsive_force(&cf, gains.k_rep, gains.activation_radius);
    }
    Ok(sum)
}

fn accumulate<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    world: &World,
    gains: &Gains,
    correction: bool,
    rng: &mut R,
    mut sink: impl FnMut(ObstacleId, Vec3),
) -> Result<(Vec3, Vec3, Vec3), CollisionSignal> {
    let attractive = attractive_force(robot, goal, gains);
    let act = gains.activation_radius;
    let mut acc = attractive;
    for (i, ob) in world.obstacles.iter().enumerate() {
        if ob.bound.distance_lower_bound(robot) >= act {
            continue;
        }
        match obstacle_force(robot, goal, &ob.shape, ob.gain, act, correction, rng) {
            Ok(Some(f)) => {
                sink(ObstacleId::Obstacle(i), f);
                acc += f;
            }
            Ok(None) => {}
            Err(_) => {
                return Err(CollisionSignal {
                    obstacle: ObstacleId::Obstacle(i),
                })
            }
        }
    }
    let boundary = boundary_force(robot, &world.boundary, gains)?;
    acc += boundary;
    Ok((attractive, boundary, acc))
}

/// Resultant force with every term reported.
pub fn resultant_force<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    world: &World,
    gains: &Gains,
    correction: bool,
    rng: &mut R,
) -> Result<ForceBreakdown, CollisionSignal> {
    let mut per_obstacle = Vec::new();
    let (attractive, boundary, resultant) =
        accumulate(robot, goal, world, gains, correction, rng, |id, f| per_obstacle.push((id, f)))?;
    Ok(ForceBreakdown {
        attractive,
        per_obstacle,
        boundary,
        resultant,
    })
}

/// Resultant only; same value as [`resultant_force`] without the allocation.
pub fn geopf_force<R: Rng + ?Sized>(
    robot: &Vec3,
    goal: &Vec3,
    world: &World,
    gains: &Gains,
    correction: bool,
    rng: &mut R,
) -> Result<Vec3, CollisionSignal> {
    accumulate(robot, goal, world, gains, correction, rng, |_, _| {}).map(|t| t.2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Sphere;
    use crate::world::WorldObstacle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn wall() -> RectPlane {
        // Corners (±1, 0, ±1), normal +y.
        let p = RectPlane::from_center(Vec3::zeros(), Vec3::x(), Vec3::z()).unwrap();
        if p.normal().y > 0.0 {
            p
        } else {
            p.reversed()
        }
    }

    fn g(k: f64, act: f64) -> Gains {
        Gains {
            k_attr: 1.0,
            k_rep: k,
            activation_radius: act,
        }
    }

    #[test]
    fn attraction() {
        let f = attractive_force(&Vec3::new(0.0, 1.0, 0.0), &Vec3::new(0.0, -1.0, 0.0), &Gains::default());
        assert_eq!(f, Vec3::new(0.0, -1.0, 0.0));
        assert_eq!(attractive_force(&Vec3::x(), &Vec3::x(), &Gains::default()), Vec3::zeros());
        let gains = Gains {
            k_attr: 0.1,
            ..Gains::default()
        };
        assert_eq!(attractive_force(&Vec3::x(), &Vec3::zeros(), &gains), Vec3::new(-0.1, 0.0, 0.0));
    }

    fn feature(d: f64) -> ClosestFeature {
        ClosestFeature {
            distance: d,
            direction: Vec3::x(),
            foot: Vec3::zeros(),
            feature: Feature::Orthogonal,
        }
    }

    #[test]
    fn repulsion_law_gate_and_clamp() {
        assert!((repulsive_force(&feature(0.5), 0.1, 1.0) - Vec3::new(0.2, 0.0, 0.0)).norm() < 1e-15);
        assert_eq!(repulsive_force(&feature(2.0), 0.1, 1.0), Vec3::zeros());
        assert_eq!(repulsive_force(&feature(1.0), 0.1, 1.0), Vec3::zeros());
        let f = repulsive_force(&feature(1e-6), 0.1, 1.0);
        assert!((f.norm() - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn gains_validation() {
        assert!(Gains::default().validate().is_ok());
        assert!(g(0.0, 1.0).validate().is_err());
        assert!(g(0.1, f64::NAN).validate().is_err());
    }

    #[test]
    fn wall_correction_points_to_nearest_edge() {
        let k = 0.1;
        let f = plane_force_with_correction(
            &Vec3::new(0.5, 1.0, 0.0),
            &Vec3::new(0.5, -1.0, 0.0),
            &wall(),
            &g(k, 2.0),
            &mut rng(),
        )
        .unwrap();
        assert!((f - Vec3::new(k, 0.0, 0.0)).norm() < 1e-12, "{f:?}");
        let f = plane_force_with_correction(
            &Vec3::new(-0.5, 1.0, 0.0),
            &Vec3::new(-0.5, -1.0, 0.0),
            &wall(),
            &g(k, 2.0),
            &mut rng(),
        )
        .unwrap();
        assert!((f - Vec3::new(-k, 0.0, 0.0)).norm() < 1e-12, "{f:?}");
    }

    #[test]
    fn wall_miss_is_plain_repulsion() {
        let f = plane_force_with_correction(
            &Vec3::new(0.5, 1.0, 0.5),
            &Vec3::new(0.5, 1.0, -5.0),
            &wall(),
            &g(0.1, 2.0),
            &mut rng(),
        )
        .unwrap();
        assert!((f - Vec3::new(0.0, 0.1, 0.0)).norm() < 1e-12, "{f:?}");
    }

    #[test]
    fn correction_ignores_goal_on_same_side() {
        let f = plane_force_with_correction(
            &Vec3::new(0.5, 1.0, 0.0),
            &Vec3::new(0.5, 0.5, 0.0),
            &wall(),
            &g(0.1, 2.0),
            &mut rng(),
        )
        .unwrap();
        assert!((f - Vec3::new(0.0, 0.1, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn symmetric_wall_ties_pick_either_side() {
        let mut seen = [false; 2];
        let mut r = rng();
        for _ in 0..64 {
            let f = plane_force_with_correction(
                &Vec3::new(0.0, 1.0, 0.0),
                &Vec3::new(0.0, -1.0, 0.0),
                &RectPlane::from_center(Vec3::zeros(), Vec3::x(), Vec3::z() * 2.0).unwrap(),
                &g(0.1, 2.0),
                &mut r,
            )
            .unwrap();
            assert!(f.y.abs() < 1e-12 && f.z.abs() < 1e-12);
            seen[(f.x > 0.0) as usize] = true;
        }
        assert_eq!(seen, [true, true]);
    }

    fn upright() -> Cylinder {
        Cylinder::new(Vec3::zeros(), Vec3::new(0.0, 0.0, 2.0), 0.5).unwrap()
    }

    #[test]
    fn cap_correction_is_lateral() {
        let f = cylinder_cap_correction(
            &Vec3::new(0.0, 0.0, 3.0),
            &Vec3::new(0.0, 0.0, -3.0),
            &upright(),
            &g(0.1, 2.0),
            &mut rng(),
        )
        .unwrap();
        assert!(f.z.abs() < 1e-12);
        assert!((f.norm() - 0.1).abs() < 1e-12);
        // Off axis the rim nearest to the robot wins.
        let f = cylinder_cap_correction(
            &Vec3::new(0.1, 0.0, 3.0),
            &Vec3::new(0.1, 0.0, -3.0),
            &upright(),
            &g(0.1, 2.0),
            &mut rng(),
        )
        .unwrap();
        assert!((f - Vec3::new(0.1, 0.0, 0.0)).norm() < 1e-12, "{f:?}");
    }

    #[test]
    fn cap_without_crossing_is_axial() {
        let y = upright();
        let f = cylinder_cap_correction(&Vec3::new(0.0, 0.0, 3.0), &Vec3::new(0.0, 0.0, 5.0), &y, &g(0.1, 2.0), &mut rng())
            .unwrap();
        assert!((f - Vec3::new(0.0, 0.0, 0.1)).norm() < 1e-12);
        // Crossing the cap plane at radial distance 2r.
        let f = cylinder_cap_correction(&Vec3::new(0.0, 0.0, 3.0), &Vec3::new(2.0, 0.0, 1.0), &y, &g(0.1, 2.0), &mut rng())
            .unwrap();
        assert!((f - Vec3::new(0.0, 0.0, 0.1)).norm() < 1e-12);
    }

    fn sphere_world(c: Vec3, r: f64, k: f64) -> World {
        let s = Shape::Sphere(Sphere::new(c, r).unwrap());
        World::new(vec![WorldObstacle::new(s, k, Vec3::zeros())], vec![])
    }

    #[test]
    fn resultant_examples() {
        let empty = World::new(vec![], vec![]);
        let b = resultant_force(&Vec3::y(), &-Vec3::y(), &empty, &g(0.1, 1.0), true, &mut rng()).unwrap();
        assert_eq!(b.resultant, Vec3::new(0.0, -1.0, 0.0));

        let far = sphere_world(Vec3::new(10.0, 0.0, 0.0), 0.1, 0.1);
        let b = resultant_force(&Vec3::y(), &-Vec3::y(), &far, &g(0.1, 1.0), true, &mut rng()).unwrap();
        assert_eq!(b.resultant, b.attractive);
        assert!(b.per_obstacle.is_empty());

        let near = sphere_world(Vec3::zeros(), 0.1, 0.1);
        let b = resultant_force(&Vec3::new(0.0, 0.3, 0.0), &-Vec3::y(), &near, &g(0.1, 1.0), true, &mut rng()).unwrap();
        assert!((b.resultant - Vec3::new(0.0, -0.5, 0.0)).norm() < 1e-12);
        assert_eq!(b.per_obstacle.len(), 1);
    }

    #[test]
    fn penetration_signals_collision() {
        let w = sphere_world(Vec3::zeros(), 0.1, 0.1);
        let e = resultant_force(&Vec3::new(0.0, 0.05, 0.0), &-Vec3::y(), &w, &g(0.1, 1.0), true, &mut rng()).unwrap_err();
        assert_eq!(e.obstacle, ObstacleId::Obstacle(0));
    }

    #[test]
    fn walls_push_inward_and_flag_exit() {
        let walls = crate::world::Aabb {
            min: Vec3::new(-0.5, -0.5, -0.5),
            max: Vec3::new(0.5, 0.5, 0.5),
        }
        .walls();
        let f = boundary_force(&Vec3::new(0.4, 0.0, 0.0), &walls, &g(0.1, 0.3)).unwrap();
        assert!((f - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-12, "{f:?}");
        assert!(boundary_force(&Vec3::new(0.6, 0.0, 0.0), &walls, &g(0.1, 0.3)).is_err());
    }
}
