use serde::{Deserialize, Serialize};

use super::{
    normalize, segment_closest, ClosestFeature, Feature, GeomError, Segment, Vec3,
    COPLANAR_TOLERANCE, DEGENERACY_TOLERANCE, ORTHOGONAL_TOLERANCE,
};

/// Rectangle given by four consecutively ordered corners.
///
/// The stored normal is `normalize((v1 - v2) x (v3 - v2))`, so reversing the
/// vertex order flips it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RectPlaneDef", into = "RectPlaneDef")]
pub struct RectPlane {
    vertices: [Vec3; 4],
    normal: Vec3,
    edges: [Segment; 4],
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RectPlaneDef {
    vertices: [Vec3; 4],
}

impl TryFrom<RectPlaneDef> for RectPlane {
    type Error = GeomError;
    fn try_from(d: RectPlaneDef) -> Result<Self, Self::Error> {
        RectPlane::new(d.vertices)
    }
}

impl From<RectPlane> for RectPlaneDef {
    fn from(p: RectPlane) -> Self {
        RectPlaneDef {
            vertices: p.vertices,
        }
    }
}

impl RectPlane {
    pub fn new(vertices: [Vec3; 4]) -> Result<Self, GeomError> {
        let bad = |reason: String| GeomError::invalid("plane", reason);
        let normal = normalize(&(vertices[0] - vertices[1]).cross(&(vertices[2] - vertices[1])))
            .map_err(|_| bad("collinear vertices".into()))?;
        let off = normal.dot(&(vertices[3] - vertices[0]));
        if off.abs() > COPLANAR_TOLERANCE {
            return Err(bad(format!("vertices not coplanar (offset {off:e} m)")));
        }
        let edges = [0, 1, 2, 3].map(|i| Segment::new(vertices[i], vertices[(i + 1) % 4]));
        let mut out = Vec::with_capacity(4);
        for e in edges {
            out.push(e.map_err(|_| bad("repeated vertex".into()))?);
        }
        for i in 0..4 {
            let c = out[i].direction().dot(&out[(i + 1) % 4].direction());
            if c.abs() > ORTHOGONAL_TOLERANCE {
                return Err(bad(format!("corner {} is not a right angle (cos {c:e})", (i + 1) % 4)));
            }
        }
        Ok(RectPlane {
            vertices,
            normal,
            edges: [out[0], out[1], out[2], out[3]],
        })
    }

    /// Rectangle centred at `center` spanned by the half-extent vectors `u`
    /// and `v` (which must be orthogonal).
    pub fn from_center(center: Vec3, u: Vec3, v: Vec3) -> Result<Self, GeomError> {
        RectPlane::new([
            center + u + v,
            center - u + v,
            center - u - v,
            center + u - v,
        ])
    }

    pub fn vertices(&self) -> &[Vec3; 4] {
        &self.vertices
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1 (mod 4)`.
    pub fn edges(&self) -> &[Segment; 4] {
        &self.edges
    }

    pub fn centroid(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() * 0.25
    }

    /// Same rectangle with the vertex order reversed (opposite normal).
    pub fn reversed(&self) -> RectPlane {
        let v = self.vertices;
        RectPlane::new([v[0], v[3], v[2], v[1]]).expect("reversing a valid rectangle")
    }

    pub(crate) fn translate(&mut self, delta: &Vec3) {
        for v in &mut self.vertices {
            *v += delta;
        }
        for e in &mut self.edges {
            e.translate(delta);
        }
    }
}

pub fn plane_normal(p: &RectPlane) -> Vec3 {
    p.normal
}

/// Perpendicular foot of `robot` on the supporting plane and the signed
/// offset of the robot along the stored normal.
#[inline]
pub fn plane_foot(robot: &Vec3, p: &RectPlane) -> (Vec3, f64) {
    let offset = p.normal.dot(&(robot - p.vertices[0]));
    (robot - offset * p.normal, offset)
}

/// Four-indicator test: `point` is inside the closed rectangle iff every
/// cross product of consecutive point-to-vertex directions points the same
/// way along the normal.
///
/// Points on an edge (adjacent directions antiparallel) or on a vertex count
/// as inside.
pub fn plane_inside(point: &Vec3, p: &RectPlane) -> bool {
    let rays = p.vertices.map(|v| v - point);
    let mut sign = 0.0f64;
    for i in 0..4 {
        let a = &rays[i];
        let b = &rays[(i + 1) % 4];
        let (na, nb) = (a.norm(), b.norm());
        if na <= DEGENERACY_TOLERANCE || nb <= DEGENERACY_TOLERANCE {
            return true;
        }
        let c = a.cross(b).dot(&p.normal);
        if c.abs() <= DEGENERACY_TOLERANCE * na * nb {
            // Collinear with this edge: between its vertices or beyond them.
            if a.dot(b) < 0.0 {
                continue;
            }
            return false;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    true
}

/// Closest point of the rectangle to `robot`.
///
/// A foot inside the rectangle gives the orthogonal result along the normal
/// (towards the robot's side); otherwise the nearest edge or vertex wins.
pub fn plane_closest(robot: &Vec3, p: &RectPlane) -> Result<ClosestFeature, GeomError> {
    let (foot, offset) = plane_foot(robot, p);
    if plane_inside(&foot, p) {
        let direction = if offset > 0.0 {
            p.normal
        } else if offset < 0.0 {
            -p.normal
        } else {
            log::debug!("robot on plane interior, defaulting to the stored normal");
            p.normal
        };
        return Ok(ClosestFeature {
            distance: offset.abs(),
            direction,
            foot,
            feature: Feature::Orthogonal,
        });
    }
    let mut best: Option<(usize, ClosestFeature)> = None;
    for (i, e) in p.edges.iter().enumerate() {
        let cf = segment_closest(robot, e)?;
        if best.as_ref().is_none_or(|(_, b)| cf.distance < b.distance) {
            best = Some((i, cf));
        }
    }
    let (i, mut cf) = best.expect("four edges");
    let j = (i + 1) % 4;
    cf.feature = match cf.feature {
        Feature::SideVertex1 => Feature::Vertex(i),
        Feature::SideVertex2 => Feature::Vertex(j),
        _ => Feature::Edge(i, j),
    };
    Ok(cf)
}
