use serde::{Deserialize, Serialize};

use super::{segment_closest, ClosestFeature, Feature, GeomError, Segment, Vec3, DEGENERACY_TOLERANCE};

/// Relative radial offset (radial distance over radius) below which a robot
/// inside the cylinder is treated as sitting on the axis, so only the caps
/// give a usable escape direction.
pub const ON_AXIS_TOLERANCE: f64 = 1e-2;

/// Solid circular cylinder around the axis `a1 -> a2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CylinderDef", into = "CylinderDef")]
pub struct Cylinder {
    axis: Segment,
    radius: f64,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CylinderDef {
    a1: Vec3,
    a2: Vec3,
    radius: f64,
}

impl TryFrom<CylinderDef> for Cylinder {
    type Error = GeomError;
    fn try_from(d: CylinderDef) -> Result<Self, Self::Error> {
        Cylinder::new(d.a1, d.a2, d.radius)
    }
}

impl From<Cylinder> for CylinderDef {
    fn from(c: Cylinder) -> Self {
        CylinderDef {
            a1: c.a1(),
            a2: c.a2(),
            radius: c.radius,
        }
    }
}

impl Cylinder {
    pub fn new(a1: Vec3, a2: Vec3, radius: f64) -> Result<Self, GeomError> {
        let axis = Segment::new(a1, a2)
            .map_err(|_| GeomError::invalid("cylinder", "axis endpoints coincide"))?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeomError::invalid("cylinder", format!("radius {radius} must be > 0")));
        }
        Ok(Cylinder { axis, radius })
    }

    pub fn a1(&self) -> Vec3 {
        self.axis.p1()
    }

    pub fn a2(&self) -> Vec3 {
        self.axis.p2()
    }

    pub fn axis(&self) -> &Segment {
        &self.axis
    }

    /// Unit axis direction from `a1` to `a2`.
    pub fn axis_direction(&self) -> Vec3 {
        self.axis.direction()
    }

    pub fn length(&self) -> f64 {
        self.axis.length()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub(crate) fn translate(&mut self, delta: &Vec3) {
        self.axis.translate(delta);
    }
}

/// Closest point of the cylinder surface to `robot`.
///
/// Beside the curved surface the query runs against the surface line, the
/// axis shifted by one radius towards the robot; its side vertices are the
/// rim points of the caps. Over a cap the repulsion is purely axial.
pub fn cylinder_closest(robot: &Vec3, y: &Cylinder) -> Result<ClosestFeature, GeomError> {
    let u = y.axis.direction();
    let len = y.axis.length();
    let r = y.radius;
    let rel = robot - y.a1();
    let t = rel.dot(&u);
    let radial = rel - t * u;
    let rho = radial.norm();

    if rho > r {
        let n_perp = radial / rho;
        let shift = r * n_perp;
        let surface = Segment::from_parts(y.a1() + shift, y.a2() + shift, u, len);
        let mut cf = segment_closest(robot, &surface)?;
        if cf.feature == Feature::Orthogonal {
            cf.feature = Feature::CurvedSurface;
        }
        return Ok(cf);
    }

    if t > len {
        let d = t - len;
        return Ok(ClosestFeature {
            distance: d,
            direction: u,
            foot: robot - d * u,
            feature: Feature::CapTop,
        });
    }
    if t < 0.0 {
        return Ok(ClosestFeature {
            distance: -t,
            direction: -u,
            foot: robot + (-t) * u,
            feature: Feature::CapBottom,
        });
    }

    // Inside: leave through whichever surface is shallowest.
    let top = len - t;
    let bottom = t;
    let mut best = if top <= bottom {
        ClosestFeature {
            distance: -top,
            direction: u,
            foot: robot + top * u,
            feature: Feature::CapTop,
        }
    } else {
        ClosestFeature {
            distance: -bottom,
            direction: -u,
            foot: robot - bottom * u,
            feature: Feature::CapBottom,
        }
    };
    if rho > ON_AXIS_TOLERANCE * r && rho > DEGENERACY_TOLERANCE {
        let side = r - rho;
        if side < -best.distance {
            let n_perp = radial / rho;
            best = ClosestFeature {
                distance: -side,
                direction: n_perp,
                foot: robot + side * n_perp,
                feature: Feature::CurvedSurface,
            };
        }
    }
    Ok(best)
}
