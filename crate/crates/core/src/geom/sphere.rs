use serde::{Deserialize, Serialize};

use super::{normalize, ClosestFeature, Feature, GeomError, Vec3};

/// Ball obstacle. A zero radius encodes a point obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SphereDef")]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SphereDef {
    center: Vec3,
    radius: f64,
}

impl TryFrom<SphereDef> for Sphere {
    type Error = GeomError;
    fn try_from(d: SphereDef) -> Result<Self, Self::Error> {
        Sphere::new(d.center, d.radius)
    }
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Result<Self, GeomError> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(GeomError::invalid("sphere", format!("radius {radius} must be >= 0")));
        }
        Ok(Sphere { center, radius })
    }
}

pub fn sphere_closest(robot: &Vec3, s: &Sphere) -> Result<ClosestFeature, GeomError> {
    let offset = robot - s.center;
    let direction = normalize(&offset)?;
    Ok(ClosestFeature {
        distance: offset.norm() - s.radius,
        direction,
        foot: s.center + s.radius * direction,
        feature: Feature::Orthogonal,
    })
}
