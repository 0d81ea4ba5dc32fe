use serde::{Deserialize, Serialize};

use super::{plane_closest, plane_foot, ClosestFeature, Feature, GeomError, RectPlane, Vec3};

/// Vertex indices of the six faces. `v1..v4` and `v5..v8` are the two
/// opposite rectangles; side faces join them with `v1` aligned to `v5`.
const FACES: [[usize; 4]; 6] = [
    [0, 1, 2, 3],
    [4, 5, 6, 7],
    [0, 1, 5, 4],
    [1, 2, 6, 5],
    [2, 3, 7, 6],
    [3, 0, 4, 7],
];

/// One decoded face with an outward normal and the cube vertex index of each
/// of its corners.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFace {
    pub plane: RectPlane,
    pub corners: [usize; 4],
}

/// Rectangular prism given by eight vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CuboidDef", into = "CuboidDef")]
pub struct Cuboid {
    vertices: [Vec3; 8],
    faces: Vec<CubeFace>,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CuboidDef {
    vertices: [Vec3; 8],
}

impl TryFrom<CuboidDef> for Cuboid {
    type Error = GeomError;
    fn try_from(d: CuboidDef) -> Result<Self, Self::Error> {
        Cuboid::new(d.vertices)
    }
}

impl From<Cuboid> for CuboidDef {
    fn from(c: Cuboid) -> Self {
        CuboidDef {
            vertices: c.vertices,
        }
    }
}

impl Cuboid {
    pub fn new(vertices: [Vec3; 8]) -> Result<Self, GeomError> {
        let centroid = vertices.iter().sum::<Vec3>() / 8.0;
        let mut faces = Vec::with_capacity(6);
        for (fi, idx) in FACES.iter().enumerate() {
            let mut corners = *idx;
            let mut plane = RectPlane::new(corners.map(|i| vertices[i])).map_err(|e| {
                GeomError::invalid("cube", format!("face {fi} is not a rectangle: {e}"))
            })?;
            let outward = plane.centroid() - centroid;
            if plane.normal().dot(&outward) < 0.0 {
                plane = plane.reversed();
                corners = [corners[0], corners[3], corners[2], corners[1]];
            }
            faces.push(CubeFace { plane, corners });
        }
        Ok(Cuboid { vertices, faces })
    }

    /// Box spanning `min..max` along the world axes.
    pub fn axis_aligned(min: Vec3, max: Vec3) -> Result<Self, GeomError> {
        let (a, b) = (min, max);
        Cuboid::new([
            Vec3::new(a.x, a.y, a.z),
            Vec3::new(b.x, a.y, a.z),
            Vec3::new(b.x, b.y, a.z),
            Vec3::new(a.x, b.y, a.z),
            Vec3::new(a.x, a.y, b.z),
            Vec3::new(b.x, a.y, b.z),
            Vec3::new(b.x, b.y, b.z),
            Vec3::new(a.x, b.y, b.z),
        ])
    }

    pub fn vertices(&self) -> &[Vec3; 8] {
        &self.vertices
    }

    pub fn faces(&self) -> &[CubeFace] {
        &self.faces
    }

    /// Edge vectors from `v1` spanning the prism.
    pub fn spanning_edges(&self) -> [Vec3; 3] {
        let v = &self.vertices;
        [v[1] - v[0], v[3] - v[0], v[4] - v[0]]
    }

    pub(crate) fn translate(&mut self, delta: &Vec3) {
        for v in &mut self.vertices {
            *v += delta;
        }
        for f in &mut self.faces {
            f.plane.translate(delta);
        }
    }
}

/// Closest face of the cube and its result. Inside the prism the face with
/// the smallest penetration depth is returned with a negative distance.
pub fn cube_closest_face(robot: &Vec3, c: &Cuboid) -> Result<(usize, ClosestFeature), GeomError> {
    let mut offsets = [0.0; 6];
    let mut outside = false;
    for (i, f) in c.faces.iter().enumerate() {
        offsets[i] = plane_foot(robot, &f.plane).1;
        outside |= offsets[i] > 0.0;
    }
    if !outside {
        let (i, off) = offsets
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, o)| if o > acc.1 { (i, o) } else { acc });
        let n = c.faces[i].plane.normal();
        return Ok((
            i,
            ClosestFeature {
                distance: off,
                direction: n,
                foot: robot - off * n,
                feature: Feature::Face(i),
            },
        ));
    }
    // Outside a convex solid the closest point lies on a face the robot is in
    // front of.
    let mut best: Option<(usize, ClosestFeature)> = None;
    for (i, f) in c.faces.iter().enumerate() {
        if offsets[i] <= 0.0 {
            continue;
        }
        let cf = plane_closest(robot, &f.plane)?;
        if best.as_ref().is_none_or(|(_, b)| cf.distance < b.distance) {
            best = Some((i, cf));
        }
    }
    let (i, mut cf) = best.expect("robot is in front of at least one face");
    let corners = &c.faces[i].corners;
    cf.feature = match cf.feature {
        Feature::Orthogonal => Feature::Face(i),
        Feature::Edge(a, b) => {
            let (a, b) = (corners[a], corners[b]);
            Feature::Edge(a.min(b), a.max(b))
        }
        Feature::Vertex(a) => Feature::Vertex(corners[a]),
        other => other,
    };
    Ok((i, cf))
}

pub fn cube_closest(robot: &Vec3, c: &Cuboid) -> Result<ClosestFeature, GeomError> {
    cube_closest_face(robot, c).map(|(_, cf)| cf)
}
