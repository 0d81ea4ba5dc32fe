use serde::{Deserialize, Serialize};

use super::{ClosestFeature, Feature, GeomError, Vec3, DEGENERACY_TOLERANCE};

/// Finite line segment between two distinct vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SegmentDef", into = "SegmentDef")]
pub struct Segment {
    p1: Vec3,
    p2: Vec3,
    dir: Vec3,
    len: f64,
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDef {
    p1: Vec3,
    p2: Vec3,
}

impl TryFrom<SegmentDef> for Segment {
    type Error = GeomError;
    fn try_from(d: SegmentDef) -> Result<Self, Self::Error> {
        Segment::new(d.p1, d.p2)
    }
}

impl From<Segment> for SegmentDef {
    fn from(s: Segment) -> Self {
        SegmentDef { p1: s.p1, p2: s.p2 }
    }
}

impl Segment {
    pub fn new(p1: Vec3, p2: Vec3) -> Result<Self, GeomError> {
        let d = p2 - p1;
        let len = d.norm();
        if !(len > DEGENERACY_TOLERANCE) || !len.is_finite() {
            return Err(GeomError::invalid("segment", "endpoints coincide"));
        }
        Ok(Segment {
            p1,
            p2,
            dir: d / len,
            len,
        })
    }

    /// Segment with a precomputed unit direction and length (used for the
    /// shifted surface line of a cylinder).
    pub(crate) fn from_parts(p1: Vec3, p2: Vec3, dir: Vec3, len: f64) -> Self {
        Segment { p1, p2, dir, len }
    }

    pub fn p1(&self) -> Vec3 {
        self.p1
    }

    pub fn p2(&self) -> Vec3 {
        self.p2
    }

    /// Unit vector from `p1` to `p2`.
    pub fn direction(&self) -> Vec3 {
        self.dir
    }

    pub fn length(&self) -> f64 {
        self.len
    }

    /// Scalar projection of `point` onto the segment axis, measured from `p1`.
    #[inline]
    pub fn projection(&self, point: &Vec3) -> f64 {
        (point - self.p1).dot(&self.dir)
    }

    pub fn point_at(&self, t: f64) -> Vec3 {
        self.p1 + t * self.dir
    }

    pub(crate) fn translate(&mut self, delta: &Vec3) {
        self.p1 += delta;
        self.p2 += delta;
    }
}

/// Closest point of `seg` to `robot`.
///
/// The projection parameter `t` decides the region: `t` in `[0, len]` is the
/// orthogonal region, below zero the side of `p1`, above `len` the side of
/// `p2`. Fails only when the robot lies on the segment itself.
pub fn segment_closest(robot: &Vec3, seg: &Segment) -> Result<ClosestFeature, GeomError> {
    let t = seg.projection(robot);
    let (foot, feature) = if t < 0.0 {
        (seg.p1, Feature::SideVertex1)
    } else if t > seg.len {
        (seg.p2, Feature::SideVertex2)
    } else {
        (seg.point_at(t), Feature::Orthogonal)
    };
    let w = robot - foot;
    let distance = w.norm();
    if distance <= DEGENERACY_TOLERANCE {
        return Err(GeomError::DegenerateVector(distance));
    }
    Ok(ClosestFeature {
        distance,
        direction: w / distance,
        foot,
        feature,
    })
}
