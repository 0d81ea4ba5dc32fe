//! Closest-feature queries between a point robot and the obstacle primitives.
//!
//! Every query returns a [`ClosestFeature`]: the separation distance (negative
//! when the robot is inside a solid primitive), the unit repulsion direction,
//! the point on the primitive the distance is measured to, and the feature
//! class that produced it.

mod cube;
mod cylinder;
mod plane;
mod segment;
mod sphere;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cube::{cube_closest, cube_closest_face, CubeFace, Cuboid};
pub use cylinder::{cylinder_closest, Cylinder, ON_AXIS_TOLERANCE};
pub use plane::{plane_closest, plane_foot, plane_inside, plane_normal, RectPlane};
pub use segment::{segment_closest, Segment};
pub use sphere::{sphere_closest, Sphere};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Norm below which a vector has no usable direction.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;
/// Absolute coplanarity tolerance for rectangle vertices, meters.
pub const COPLANAR_TOLERANCE: f64 = 1e-9;
/// Tolerance on |cos| between consecutive rectangle edges.
pub const ORTHOGONAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("degenerate vector (norm {0:e})")]
    DegenerateVector(f64),
    #[error("invalid {kind}: {reason}")]
    InvalidPrimitive { kind: &'static str, reason: String },
}

impl GeomError {
    pub(crate) fn invalid(kind: &'static str, reason: impl Into<String>) -> Self {
        GeomError::InvalidPrimitive {
            kind,
            reason: reason.into(),
        }
    }
}

/// Unit vector along `v`.
pub fn normalize(v: &Vec3) -> Result<Vec3, GeomError> {
    let n = v.norm();
    if n <= DEGENERACY_TOLERANCE {
        return Err(GeomError::DegenerateVector(n));
    }
    Ok(v / n)
}

/// Which part of a primitive the closest point lies on.
///
/// Vertex and edge indices refer to the owning primitive's own vertex list
/// (zero based), so a cube edge is reported with cube vertex indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Feature {
    /// Foot of the perpendicular lies inside the feature (segment interior,
    /// plane interior, sphere surface).
    Orthogonal,
    SideVertex1,
    SideVertex2,
    Face(usize),
    Edge(usize, usize),
    Vertex(usize),
    CurvedSurface,
    CapTop,
    CapBottom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestFeature {
    /// Separation in meters; negative means penetration.
    pub distance: f64,
    /// Unit repulsion direction.
    pub direction: Vec3,
    /// Closest point on the primitive (perpendicular foot when orthogonal).
    pub foot: Vec3,
    pub feature: Feature,
}

/// Enclosing sphere used for activation culling and workspace containment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingSphere {
    pub center: Vec3,
    pub radius: f64,
}

impl BoundingSphere {
    /// Lower bound on the distance from `p` to anything inside the sphere.
    #[inline]
    pub fn distance_lower_bound(&self, p: &Vec3) -> f64 {
        (p - self.center).norm() - self.radius
    }
}

/// The five obstacle geometries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Shape {
    Sphere(Sphere),
    Segment(Segment),
    Plane(RectPlane),
    Cube(Cuboid),
    Cylinder(Cylinder),
}

impl Shape {
    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Sphere(_) => "sphere",
            Shape::Segment(_) => "segment",
            Shape::Plane(_) => "plane",
            Shape::Cube(_) => "cube",
            Shape::Cylinder(_) => "cylinder",
        }
    }

    pub fn closest(&self, robot: &Vec3) -> Result<ClosestFeature, GeomError> {
        match self {
            Shape::Sphere(s) => sphere_closest(robot, s),
            Shape::Segment(s) => segment_closest(robot, s),
            Shape::Plane(p) => plane_closest(robot, p),
            Shape::Cube(c) => cube_closest(robot, c),
            Shape::Cylinder(y) => cylinder_closest(robot, y),
        }
    }

    /// Distance only; a robot exactly on a thin primitive reports zero.
    pub fn distance(&self, robot: &Vec3) -> f64 {
        if let Shape::Sphere(s) = self {
            return (robot - s.center).norm() - s.radius;
        }
        match self.closest(robot) {
            Ok(cf) => cf.distance,
            Err(_) => 0.0,
        }
    }

    pub fn bounding_sphere(&self) -> BoundingSphere {
        match self {
            Shape::Sphere(s) => BoundingSphere {
                center: s.center,
                radius: s.radius,
            },
            Shape::Segment(s) => BoundingSphere {
                center: (s.p1() + s.p2()) * 0.5,
                radius: 0.5 * s.length(),
            },
            Shape::Plane(p) => enclosing(p.vertices()),
            Shape::Cube(c) => enclosing(c.vertices()),
            Shape::Cylinder(y) => BoundingSphere {
                center: (y.a1() + y.a2()) * 0.5,
                radius: (0.25 * y.length() * y.length() + y.radius() * y.radius()).sqrt(),
            },
        }
    }

    /// Same shape rebuilt from its defining points, so cached directions
    /// match what loading it from a file would compute.
    pub fn rebuilt(&self) -> Result<Shape, GeomError> {
        Ok(match self {
            Shape::Sphere(s) => Shape::Sphere(*s),
            Shape::Segment(s) => Shape::Segment(Segment::new(s.p1(), s.p2())?),
            Shape::Plane(p) => Shape::Plane(RectPlane::new(*p.vertices())?),
            Shape::Cube(c) => Shape::Cube(Cuboid::new(*c.vertices())?),
            Shape::Cylinder(y) => Shape::Cylinder(Cylinder::new(y.a1(), y.a2(), y.radius())?),
        })
    }

    pub fn translate(&mut self, delta: &Vec3) {
        match self {
            Shape::Sphere(s) => s.center += delta,
            Shape::Segment(s) => s.translate(delta),
            Shape::Plane(p) => p.translate(delta),
            Shape::Cube(c) => c.translate(delta),
            Shape::Cylinder(y) => y.translate(delta),
        }
    }
}

fn enclosing(vertices: &[Vec3]) -> BoundingSphere {
    let center = vertices.iter().sum::<Vec3>() / vertices.len() as f64;
    let radius = vertices
        .iter()
        .map(|v| (v - center).norm())
        .fold(0.0, f64::max);
    BoundingSphere { center, radius }
}
