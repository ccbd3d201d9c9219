//! Points, boxes, triangles and a bounding volume hierarchy for ray queries.

use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Tolerance for geometric containment tests, in meters.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn splat(v: f64) -> Self {
        Self::new(v, v, v)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn length(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).length()
    }

    pub fn normalized(self) -> Self {
        self / self.length()
    }

    pub fn min(self, o: Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Vec3 {
    type Output = Self;
    fn div(self, s: f64) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

impl Neg for Vec3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Axis-aligned box. Any axis may have zero extent (a table top, a wall plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(a: Vec3, b: Vec3) -> Self {
        Self { min: a.min(b), max: a.max(b) }
    }

    pub fn empty() -> Self {
        Self { min: Vec3::splat(f64::INFINITY), max: Vec3::splat(f64::NEG_INFINITY) }
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn volume(&self) -> f64 {
        let e = self.extent();
        e.x * e.y * e.z
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min.x <= self.max.x && self.min.y <= self.max.y && self.min.z <= self.max.z
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - GEOM_EPS && p[i] <= self.max[i] + GEOM_EPS)
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.min(o.min), max: self.max.max(o.max) }
    }

    pub fn grow(&mut self, p: Vec3) {
        self.min = self.min.min(p);
        self.max = self.max.max(p);
    }

    /// Slab test; returns the entry distance if the ray hits within `t_max`.
    fn ray_entry(&self, origin: Vec3, inv_dir: Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for i in 0..3 {
            let mut ta = (self.min[i] - origin[i]) * inv_dir[i];
            let mut tb = (self.max[i] - origin[i]) * inv_dir[i];
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            // NaN (0 * inf) means the origin sits on the slab plane; treat as inside.
            if !ta.is_nan() {
                t0 = t0.max(ta);
            }
            if !tb.is_nan() {
                t1 = t1.min(tb);
            }
            if t0 > t1 * (1.0 + 1e-12) + 1e-12 {
                return None;
            }
        }
        Some(t0)
    }
}

/// True when `inner` is covered by the union of `boxes`.
///
/// Exact: `inner` is split along every box face that crosses it and the
/// center of each piece is tested.
pub fn covered_by_union(inner: &Aabb, boxes: &[Aabb]) -> bool {
    let cuts = |axis: usize| -> Vec<f64> {
        let lo = inner.min[axis];
        let hi = inner.max[axis];
        let mut c = vec![lo, hi];
        for b in boxes {
            for v in [b.min[axis], b.max[axis]] {
                if v > lo && v < hi {
                    c.push(v);
                }
            }
        }
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    };
    let (cx, cy, cz) = (cuts(0), cuts(1), cuts(2));
    let mids = |c: &[f64]| -> Vec<f64> {
        if c.len() < 2 || c[0] == c[c.len() - 1] {
            vec![c[0]]
        } else {
            c.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
        }
    };
    for &x in &mids(&cx) {
        for &y in &mids(&cy) {
            for &z in &mids(&cz) {
                let p = Vec3::new(x, y, z);
                if !boxes.iter().any(|b| b.contains(p)) {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v: [Vec3; 3],
}

impl Triangle {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Self { v: [a, b, c] }
    }

    /// Unnormalized normal following the vertex winding.
    pub fn area_normal(&self) -> Vec3 {
        (self.v[1] - self.v[0]).cross(self.v[2] - self.v[0])
    }

    pub fn normal(&self) -> Vec3 {
        self.area_normal().normalized()
    }

    pub fn area(&self) -> f64 {
        0.5 * self.area_normal().length()
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::empty();
        for v in self.v {
            b.grow(v);
        }
        b
    }

    pub fn centroid(&self) -> Vec3 {
        (self.v[0] + self.v[1] + self.v[2]) / 3.0
    }

    /// Möller–Trumbore; returns the ray parameter of a hit in `(t_min, t_max)`.
    pub fn intersect(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Option<f64> {
        let e1 = self.v[1] - self.v[0];
        let e2 = self.v[2] - self.v[0];
        let p = dir.cross(e2);
        let det = e1.dot(p);
        if det.abs() < 1e-14 {
            return None;
        }
        let inv = 1.0 / det;
        let s = origin - self.v[0];
        let u = s.dot(p) * inv;
        if !(-1e-10..=1.0 + 1e-10).contains(&u) {
            return None;
        }
        let q = s.cross(e1);
        let v = dir.dot(q) * inv;
        if v < -1e-10 || u + v > 1.0 + 1e-10 {
            return None;
        }
        let t = e2.dot(q) * inv;
        (t > t_min && t < t_max).then_some(t)
    }

    /// Point-in-triangle test for a point already known to lie on the plane.
    pub fn contains_coplanar(&self, p: Vec3, tol: f64) -> bool {
        let n = self.area_normal();
        let nn = n.dot(n);
        if nn == 0.0 {
            return false;
        }
        for i in 0..3 {
            let a = self.v[i];
            let b = self.v[(i + 1) % 3];
            let edge = b - a;
            let side = edge.cross(p - a).dot(n) / (nn.sqrt() * edge.length());
            if side < -tol {
                return false;
            }
        }
        true
    }
}

/// A ray hit against the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub triangle: usize,
}

#[derive(Debug, Clone)]
enum BvhNode {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl BvhNode {
    fn bounds(&self) -> &Aabb {
        match self {
            BvhNode::Leaf { bounds, .. } | BvhNode::Inner { bounds, .. } => bounds,
        }
    }
}

/// Traversal stack; median splits keep the depth far below its capacity.
struct NodeStack {
    items: [usize; 64],
    len: usize,
}

impl NodeStack {
    fn root() -> Self {
        Self { items: [0; 64], len: 1 }
    }

    fn push(&mut self, id: usize) {
        self.items[self.len] = id;
        self.len += 1;
    }

    fn pop(&mut self) -> Option<usize> {
        self.len = self.len.checked_sub(1)?;
        Some(self.items[self.len])
    }
}

/// Median-split bounding volume hierarchy over a triangle list.
#[derive(Debug, Clone)]
pub struct Bvh {
    triangles: Vec<Triangle>,
    order: Vec<usize>,
    nodes: Vec<BvhNode>,
}

const LEAF_SIZE: usize = 4;

impl Bvh {
    pub fn new(triangles: Vec<Triangle>) -> Self {
        let mut order: Vec<usize> = (0..triangles.len()).collect();
        let mut nodes = Vec::new();
        if !triangles.is_empty() {
            let n = order.len();
            Self::build(&triangles, &mut order, 0, n, &mut nodes);
        }
        Self { triangles, order, nodes }
    }

    fn build(tris: &[Triangle], order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<BvhNode>) -> usize {
        let mut bounds = Aabb::empty();
        let mut centroids = Aabb::empty();
        for &i in &order[start..end] {
            bounds = bounds.union(&tris[i].bounds());
            centroids.grow(tris[i].centroid());
        }
        let id = nodes.len();
        if end - start <= LEAF_SIZE {
            nodes.push(BvhNode::Leaf { bounds, start, end });
            return id;
        }
        let ext = centroids.extent();
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let mid = (start + end) / 2;
        order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            tris[a].centroid()[axis].total_cmp(&tris[b].centroid()[axis]).then(a.cmp(&b))
        });
        nodes.push(BvhNode::Leaf { bounds, start, end });
        let left = Self::build(tris, order, start, mid, nodes);
        let right = Self::build(tris, order, mid, end, nodes);
        nodes[id] = BvhNode::Inner { bounds, left, right };
        id
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    /// Nearest hit along `dir` (not necessarily unit) in `(t_min, t_max)`.
    pub fn intersect(&self, origin: Vec3, dir: Vec3, t_min: f64, t_max: f64) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        let mut stack = NodeStack::root();
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.bounds().ray_entry(origin, inv, limit).is_none() {
                continue;
            }
            match *node {
                BvhNode::Leaf { start, end, .. } => {
                    for &tri in &self.order[start..end] {
                        if let Some(t) = self.triangles[tri].intersect(origin, dir, t_min, limit) {
                            // Ties resolve to the lowest index so results do not depend on build order.
                            let better = match best {
                                None => true,
                                Some(b) => t < b.t || (t == b.t && tri < b.triangle),
                            };
                            if better {
                                best = Some(Hit { t, triangle: tri });
                                limit = t;
                            }
                        }
                    }
                }
                BvhNode::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        best
    }

    /// True if the open segment `a → b` crosses any triangle not listed in `skip`.
    pub fn segment_blocked(&self, a: Vec3, b: Vec3, skip: &[usize]) -> bool {
        self.blocked_within(a, b, skip, 1e-7, 1.0 - 1e-7)
    }

    /// Like [`Bvh::segment_blocked`], but contacts at either endpoint also
    /// block, so a segment ending on an edge shared with another surface is
    /// occluded by that surface.
    pub fn closed_segment_blocked(&self, a: Vec3, b: Vec3, skip: &[usize]) -> bool {
        self.blocked_within(a, b, skip, -1e-9, 1.0 + 1e-9)
    }

    fn blocked_within(&self, a: Vec3, b: Vec3, skip: &[usize], t_min: f64, t_max: f64) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let dir = b - a;
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack = NodeStack::root();
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.bounds().ray_entry(a, inv, t_max).is_none() {
                continue;
            }
            match *node {
                BvhNode::Leaf { start, end, .. } => {
                    for &tri in &self.order[start..end] {
                        if skip.contains(&tri) {
                            continue;
                        }
                        if self.triangles[tri].intersect(a, dir, t_min, t_max).is_some() {
                            return true;
                        }
                    }
                }
                BvhNode::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        false
    }

    /// Indices of all triangles whose bounds overlap `query`.
    pub fn overlapping(&self, query: &Aabb) -> Vec<usize> {
        let overlaps = |b: &Aabb| (0..3).all(|i| b.min[i] <= query.max[i] + GEOM_EPS && b.max[i] >= query.min[i] - GEOM_EPS);
        let mut out = Vec::new();
        if self.nodes.is_empty() {
            return out;
        }
        let mut stack = NodeStack::root();
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if !overlaps(node.bounds()) {
                continue;
            }
            match *node {
                BvhNode::Leaf { start, end, .. } => {
                    out.extend(self.order[start..end].iter().copied().filter(|&t| overlaps(&self.triangles[t].bounds())));
                }
                BvhNode::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_z0() -> Vec<Triangle> {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(1.0, 0.0, 0.0);
        let c = Vec3::new(1.0, 1.0, 0.0);
        let d = Vec3::new(0.0, 1.0, 0.0);
        vec![Triangle::new(a, b, c), Triangle::new(a, c, d)]
    }

    #[test]
    fn ray_hits_square() {
        let bvh = Bvh::new(unit_square_z0());
        let hit = bvh.intersect(Vec3::new(0.25, 0.75, 1.0), Vec3::new(0.0, 0.0, -1.0), 0.0, f64::INFINITY).unwrap();
        assert!((hit.t - 1.0).abs() < 1e-12);
        assert!(bvh.intersect(Vec3::new(1.5, 0.5, 1.0), Vec3::new(0.0, 0.0, -1.0), 0.0, f64::INFINITY).is_none());
    }

    #[test]
    fn segment_blocking() {
        let bvh = Bvh::new(unit_square_z0());
        assert!(bvh.segment_blocked(Vec3::new(0.5, 0.5, 1.0), Vec3::new(0.5, 0.5, -1.0), &[]));
        assert!(!bvh.segment_blocked(Vec3::new(0.5, 0.5, 1.0), Vec3::new(0.5, 0.5, 0.5), &[]));
        assert!(!bvh.segment_blocked(Vec3::new(0.5, 0.5, 1.0), Vec3::new(0.5, 0.5, -1.0), &[0, 1]));
    }

    #[test]
    fn bvh_matches_brute_force() {
        // A fan of many small triangles exercises inner nodes.
        let mut tris = Vec::new();
        for i in 0..40 {
            let x = i as f64 * 0.1;
            tris.push(Triangle::new(Vec3::new(x, 0.0, 0.0), Vec3::new(x + 0.1, 0.0, 0.0), Vec3::new(x, 1.0, 0.3 * x)));
        }
        let bvh = Bvh::new(tris.clone());
        for j in 0..50 {
            let o = Vec3::new(0.08 * j as f64, 0.2, 5.0);
            let d = Vec3::new(0.01, 0.0, -1.0);
            let brute = tris
                .iter()
                .enumerate()
                .filter_map(|(i, t)| t.intersect(o, d, 0.0, f64::INFINITY).map(|t| (t, i)))
                .min_by(|a, b| a.0.total_cmp(&b.0));
            let got = bvh.intersect(o, d, 0.0, f64::INFINITY).map(|h| (h.t, h.triangle));
            assert_eq!(got, brute);
        }
    }

    #[test]
    fn union_coverage() {
        let a = Aabb::new(Vec3::ZERO, Vec3::new(2.0, 1.0, 1.0));
        let b = Aabb::new(Vec3::new(2.0, 0.0, 0.0), Vec3::new(4.0, 1.0, 1.0));
        let spanning = Aabb::new(Vec3::new(1.0, 0.2, 0.2), Vec3::new(3.0, 0.8, 0.8));
        assert!(covered_by_union(&spanning, &[a, b]));
        assert!(!covered_by_union(&spanning, &[a]));
        let flat = Aabb::new(Vec3::new(0.5, 0.5, 0.75), Vec3::new(3.5, 0.9, 0.75));
        assert!(covered_by_union(&flat, &[a, b]));
        let outside = Aabb::new(Vec3::new(3.5, 0.5, 0.5), Vec3::new(4.5, 0.9, 0.9));
        assert!(!covered_by_union(&outside, &[a, b]));
    }
}
