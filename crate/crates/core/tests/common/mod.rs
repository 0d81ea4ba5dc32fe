//! Brute-force oracles and random primitive generators shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use geopf::{Cuboid, Cylinder, RectPlane, Segment, Vec3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed)
}

pub fn unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Right-handed orthonormal triple by Gram-Schmidt.
pub fn frame(rng: &mut ChaCha8Rng) -> [Vec3; 3] {
    let a = unit(rng);
    let mut b = unit(rng);
    b -= a * a.dot(&b);
    while b.norm() < 1e-3 {
        b = unit(rng);
        b -= a * a.dot(&b);
    }
    let b = b.normalize();
    [a, b, a.cross(&b)]
}

pub fn point(rng: &mut ChaCha8Rng, half: f64) -> Vec3 {
    Vec3::new(rng.random_range(-half..half), rng.random_range(-half..half), rng.random_range(-half..half))
}

pub fn random_segment(rng: &mut ChaCha8Rng) -> Segment {
    let c = point(rng, 0.2);
    let d = unit(rng) * rng.random_range(0.05..0.2);
    Segment::new(c - d, c + d).unwrap()
}

/// Returns the rectangle with its centre, half-extent vectors.
pub fn random_rect(rng: &mut ChaCha8Rng) -> (RectPlane, Vec3, Vec3, Vec3) {
    let [a, b, _] = frame(rng);
    let c = point(rng, 0.2);
    let u = a * rng.random_range(0.03..0.15);
    let v = b * rng.random_range(0.03..0.15);
    (RectPlane::from_center(c, u, v).unwrap(), c, u, v)
}

/// Returns the box with its centre, frame and half extents.
pub fn random_box(rng: &mut ChaCha8Rng) -> (Cuboid, Vec3, [Vec3; 3], [f64; 3]) {
    let f = frame(rng);
    let h = [0; 3].map(|_| rng.random_range(0.03..0.1));
    let c = point(rng, 0.2);
    let corner = |s: [f64; 3]| c + f[0] * (s[0] * h[0]) + f[1] * (s[1] * h[1]) + f[2] * (s[2] * h[2]);
    let v = [
        corner([-1.0, -1.0, -1.0]),
        corner([1.0, -1.0, -1.0]),
        corner([1.0, 1.0, -1.0]),
        corner([-1.0, 1.0, -1.0]),
        corner([-1.0, -1.0, 1.0]),
        corner([1.0, -1.0, 1.0]),
        corner([1.0, 1.0, 1.0]),
        corner([-1.0, 1.0, 1.0]),
    ];
    (Cuboid::new(v).unwrap(), c, f, h)
}

pub fn random_cylinder(rng: &mut ChaCha8Rng) -> Cylinder {
    let c = point(rng, 0.2);
    let d = unit(rng) * rng.random_range(0.03..0.12);
    Cylinder::new(c - d, c + d, rng.random_range(0.02..0.07)).unwrap()
}

fn steps(len: f64, pitch: f64) -> usize {
    (len / pitch).ceil().max(1.0) as usize
}

pub fn sample_segment(a: Vec3, b: Vec3, pitch: f64) -> Vec<Vec3> {
    let n = steps((b - a).norm(), pitch);
    (0..=n).map(|i| a + (b - a) * (i as f64 / n as f64)).collect()
}

/// Grid over the parallelogram `o + s a + t b`, `s, t in [0, 1]`.
pub fn sample_patch(o: Vec3, a: Vec3, b: Vec3, pitch: f64, out: &mut Vec<Vec3>) {
    let (na, nb) = (steps(a.norm(), pitch), steps(b.norm(), pitch));
    for i in 0..=na {
        for j in 0..=nb {
            out.push(o + a * (i as f64 / na as f64) + b * (j as f64 / nb as f64));
        }
    }
}

pub fn sample_rect(p: &RectPlane, pitch: f64) -> Vec<Vec3> {
    let v = p.vertices();
    let mut out = Vec::new();
    sample_patch(v[0], v[1] - v[0], v[3] - v[0], pitch, &mut out);
    out
}

pub fn sample_box_surface(c: &Vec3, f: &[Vec3; 3], h: &[f64; 3], pitch: f64) -> Vec<Vec3> {
    let mut out = Vec::new();
    for k in 0..3 {
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        for s in [-1.0, 1.0] {
            let o = c + f[k] * (s * h[k]) - f[i] * h[i] - f[j] * h[j];
            sample_patch(o, f[i] * (2.0 * h[i]), f[j] * (2.0 * h[j]), pitch, &mut out);
        }
    }
    out
}

pub fn sample_cylinder_surface(y: &Cylinder, pitch: f64) -> Vec<Vec3> {
    let u = (y.a2() - y.a1()).normalize();
    let helper = if u.x.abs() < 0.6 { Vec3::x() } else { Vec3::z() };
    let e1 = (helper - u * u.dot(&helper)).normalize();
    let e2 = u.cross(&e1);
    let r = y.radius();
    let len = (y.a2() - y.a1()).norm();
    let mut out = Vec::new();
    let na = steps(len, pitch);
    let nc = steps(2.0 * std::f64::consts::PI * r, pitch);
    for i in 0..=na {
        let c = y.a1() + u * (len * i as f64 / na as f64);
        for j in 0..nc {
            let t = 2.0 * std::f64::consts::PI * j as f64 / nc as f64;
            out.push(c + (e1 * t.cos() + e2 * t.sin()) * r);
        }
    }
    // Caps on a square grid clipped to the disc, plus the rim ring.
    let n = steps(2.0 * r, pitch);
    for cap in [y.a1(), y.a2()] {
        for i in 0..=n {
            for j in 0..=n {
                let (s, t) = (-r + 2.0 * r * i as f64 / n as f64, -r + 2.0 * r * j as f64 / n as f64);
                if s * s + t * t <= r * r {
                    out.push(cap + e1 * s + e2 * t);
                }
            }
        }
    }
    out
}

pub fn brute_min(p: &Vec3, samples: &[Vec3]) -> f64 {
    samples.iter().map(|s| (s - p).norm_squared()).fold(f64::INFINITY, f64::min).sqrt()
}

/// Inside test in the box's own frame.
pub fn inside_box(p: &Vec3, c: &Vec3, f: &[Vec3; 3], h: &[f64; 3]) -> bool {
    (0..3).all(|k| (p - c).dot(&f[k]).abs() <= h[k])
}

pub fn inside_cylinder(p: &Vec3, y: &Cylinder) -> bool {
    let axis = y.a2() - y.a1();
    let len = axis.norm();
    let u = axis / len;
    let t = (p - y.a1()).dot(&u);
    let radial = (p - y.a1()) - u * t;
    (0.0..=len).contains(&t) && radial.norm() <= y.radius()
}
