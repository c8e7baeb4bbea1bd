//! Planar polygons in the control space.
//!
//! Outer rings are counter-clockwise, hole rings clockwise. The empty polygon
//! has no vertices. Hulls of one or two distinct points are kept as
//! degenerate zero-area polygons.

use i_overlay::core::fill_rule::FillRule;
use i_overlay::core::overlay_rule::OverlayRule;
use i_overlay::float::single::SingleFloatOverlay;
use serde::{Deserialize, Serialize};

use super::{AngularPoint, GeometryError, EPS, SLIVER_AREA};

/// Number of segments of the inscribed polygon that stands in for the
/// interaction-cone disk.
pub const DISK_SEGMENTS: usize = 256;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polygon2D {
    pub vertices: Vec<AngularPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub holes: Vec<Vec<AngularPoint>>,
}

/// Axis-aligned bounds `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds2 {
    pub min: AngularPoint,
    pub max: AngularPoint,
}

impl Bounds2 {
    pub fn overlaps(&self, other: &Bounds2) -> bool {
        self.min.h <= other.max.h
            && other.min.h <= self.max.h
            && self.min.v <= other.max.v
            && other.min.v <= self.max.v
    }
}

pub fn ring_signed_area(ring: &[AngularPoint]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        s += ring[i].cross(ring[(i + 1) % n]);
    }
    0.5 * s
}

fn oriented(mut ring: Vec<AngularPoint>, ccw: bool) -> Vec<AngularPoint> {
    if (ring_signed_area(&ring) > 0.0) != ccw {
        ring.reverse();
    }
    ring
}

impl Polygon2D {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Wraps a ring, reorienting it counter-clockwise.
    pub fn from_ring(ring: Vec<AngularPoint>) -> Self {
        Self {
            vertices: oriented(ring, true),
            holes: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// True when the polygon encloses more than the sliver threshold.
    pub fn has_area(&self) -> bool {
        self.area() > SLIVER_AREA
    }

    /// Enclosed area in square degrees (outer ring minus holes).
    pub fn area(&self) -> f64 {
        let outer = ring_signed_area(&self.vertices).abs();
        let holes: f64 = self.holes.iter().map(|h| ring_signed_area(h).abs()).sum();
        (outer - holes).max(0.0)
    }

    pub fn rings(&self) -> impl Iterator<Item = &[AngularPoint]> {
        std::iter::once(self.vertices.as_slice()).chain(self.holes.iter().map(|h| h.as_slice()))
    }

    pub fn bounds(&self) -> Option<Bounds2> {
        let first = *self.vertices.first()?;
        let mut b = Bounds2 {
            min: first,
            max: first,
        };
        for p in &self.vertices {
            b.min.h = b.min.h.min(p.h);
            b.min.v = b.min.v.min(p.v);
            b.max.h = b.max.h.max(p.h);
            b.max.v = b.max.v.max(p.v);
        }
        Some(b)
    }

    /// Even-odd point membership over all rings.
    pub fn contains(&self, p: AngularPoint) -> bool {
        let mut inside = false;
        for ring in self.rings() {
            let n = ring.len();
            if n < 3 {
                continue;
            }
            let mut j = n - 1;
            for i in 0..n {
                let (a, b) = (ring[i], ring[j]);
                if (a.v > p.v) != (b.v > p.v) {
                    let h = a.h + (p.v - a.v) * (b.h - a.h) / (b.v - a.v);
                    if p.h < h {
                        inside = !inside;
                    }
                }
                j = i;
            }
        }
        inside
    }

    /// Distance from `p` to the boundary.
    pub fn boundary_distance(&self, p: AngularPoint) -> f64 {
        let mut best = f64::INFINITY;
        for ring in self.rings() {
            let n = ring.len();
            match n {
                0 => {}
                1 => best = best.min(p.dist(ring[0])),
                _ => {
                    for i in 0..n {
                        best = best.min(segment_distance(p, ring[i], ring[(i + 1) % n]));
                    }
                }
            }
        }
        best
    }

    /// Distance from `p` to the region; zero inside.
    pub fn distance_to(&self, p: AngularPoint) -> f64 {
        if self.is_empty() {
            return f64::INFINITY;
        }
        if self.contains(p) {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }

    /// Whether the region meets the disk of `radius` about the origin.
    pub fn intersects_disk(&self, radius: f64) -> bool {
        !self.is_empty() && self.distance_to(AngularPoint::ORIGIN) <= radius
    }

    /// Largest distance from `p` to any outer vertex.
    pub fn max_vertex_distance(&self, p: AngularPoint) -> f64 {
        self.vertices.iter().map(|q| q.dist(p)).fold(0.0, f64::max)
    }
}

pub fn segment_distance(p: AngularPoint, a: AngularPoint, b: AngularPoint) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab.scale(t))
}

/// Counter-clockwise convex hull (monotone chain). Collinear points are
/// dropped; identical points collapse to a single vertex.
pub fn convex_hull(points: &[AngularPoint]) -> Polygon2D {
    let mut pts: Vec<AngularPoint> = points.iter().copied().filter(|p| p.is_finite()).collect();
    if pts.is_empty() {
        return Polygon2D::empty();
    }
    pts.sort_unstable_by(|a, b| a.h.total_cmp(&b.h).then(a.v.total_cmp(&b.v)));
    pts.dedup_by(|a, b| a.dist(*b) <= EPS);
    if pts.len() < 3 {
        return Polygon2D {
            vertices: pts,
            holes: Vec::new(),
        };
    }
    let turn = |o: AngularPoint, a: AngularPoint, b: AngularPoint| (a - o).cross(b - o);
    let mut hull: Vec<AngularPoint> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= EPS {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= EPS {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    if hull.len() < 3 {
        // all collinear: keep the two extremes
        hull = vec![pts[0], pts[pts.len() - 1]];
    }
    Polygon2D {
        vertices: hull,
        holes: Vec::new(),
    }
}

/// Area centroid. Zero-area polygons have none.
pub fn centroid(polygon: &Polygon2D) -> Result<AngularPoint, GeometryError> {
    let mut a = 0.0;
    let mut ch = 0.0;
    let mut cv = 0.0;
    for (k, ring) in polygon.rings().enumerate() {
        let n = ring.len();
        if n < 3 {
            continue;
        }
        // outer counted positive, holes negative, whatever their stored winding
        let sign = {
            let s = ring_signed_area(ring).signum();
            if k == 0 {
                s
            } else {
                -s
            }
        };
        for i in 0..n {
            let (p, q) = (ring[i], ring[(i + 1) % n]);
            let c = p.cross(q) * sign;
            a += c;
            ch += (p.h + q.h) * c;
            cv += (p.v + q.v) * c;
        }
    }
    a *= 0.5;
    if a.abs() <= SLIVER_AREA {
        return Err(GeometryError::ZeroArea);
    }
    Ok(AngularPoint::new(ch / (6.0 * a), cv / (6.0 * a)))
}

/// Parameters `t` at which `origin + t·direction` crosses the polygon
/// boundary, ascending. Crossings closer than the geometric epsilon are merged.
pub fn line_region_intersections(
    origin: AngularPoint,
    direction: AngularPoint,
    polygon: &Polygon2D,
) -> Vec<f64> {
    let mut ts = Vec::new();
    for ring in polygon.rings() {
        let n = ring.len();
        if n < 2 {
            continue;
        }
        let side: Vec<f64> = ring.iter().map(|&p| direction.cross(p - origin)).collect();
        let edges = if n == 2 { 1 } else { n };
        for i in 0..edges {
            let j = (i + 1) % n;
            let (sa, sb) = (side[i], side[j]);
            if (sa > 0.0) != (sb > 0.0) {
                let (a, b) = (ring[i], ring[j]);
                let p = a + (b - a).scale(sa / (sa - sb));
                ts.push((p - origin).dot(direction));
            }
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() <= EPS);
    ts
}

/// Interior interval of the line `origin + t·direction` that contains
/// parameter `at`, or the nearest one when `at` lies outside the region.
/// Adjacent inside intervals are merged.
pub fn chord_through(
    polygon: &Polygon2D,
    origin: AngularPoint,
    direction: AngularPoint,
    at: f64,
) -> Option<(f64, f64)> {
    let ts = line_region_intersections(origin, direction, polygon);
    if ts.len() < 2 {
        return None;
    }
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    for w in ts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if polygon.contains(origin + direction.scale(mid)) {
            match intervals.last_mut() {
                Some(last) if (last.1 - w[0]).abs() <= EPS => last.1 = w[1],
                _ => intervals.push((w[0], w[1])),
            }
        }
    }
    let gap = |&(a, b): &(f64, f64)| {
        if at < a {
            a - at
        } else if at > b {
            at - b
        } else {
            0.0
        }
    };
    intervals
        .into_iter()
        .min_by(|x, y| gap(x).total_cmp(&gap(y)))
}

/// Keeps the part of `ring` where `normal·p ≤ offset` (Sutherland–Hodgman).
pub fn clip_half_plane(
    ring: &[AngularPoint],
    normal: AngularPoint,
    offset: f64,
) -> Vec<AngularPoint> {
    let n = ring.len();
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(n + 2);
    for i in 0..n {
        let cur = ring[i];
        let next = ring[(i + 1) % n];
        let dc = normal.dot(cur) - offset;
        let dn = normal.dot(next) - offset;
        if dc <= EPS {
            out.push(cur);
        }
        if (dc > EPS && dn < -EPS) || (dc < -EPS && dn > EPS) {
            out.push(cur + (next - cur).scale(dc / (dc - dn)));
        }
    }
    cleanup_ring(out)
}

fn cleanup_ring(mut ring: Vec<AngularPoint>) -> Vec<AngularPoint> {
    ring.dedup_by(|a, b| a.dist(*b) <= EPS);
    while ring.len() > 1 && ring[0].dist(ring[ring.len() - 1]) <= EPS {
        ring.pop();
    }
    if ring.len() < 3 || ring_signed_area(&ring).abs() <= SLIVER_AREA * 1e-3 {
        return Vec::new();
    }
    ring
}

/// Intersection of a convex polygon with a convex counter-clockwise clipper.
pub fn clip_convex(subject: &Polygon2D, clipper: &[AngularPoint]) -> Polygon2D {
    let mut ring = subject.vertices.clone();
    let n = clipper.len();
    for i in 0..n {
        if ring.is_empty() {
            break;
        }
        let (a, b) = (clipper[i], clipper[(i + 1) % n]);
        // inside is left of a→b: (b-a)×(p-a) ≥ 0  ⇔  perp_cw·p ≤ perp_cw·a
        let normal = AngularPoint::new(b.v - a.v, a.h - b.h);
        ring = clip_half_plane(&ring, normal, normal.dot(a));
    }
    if ring.is_empty() {
        Polygon2D::empty()
    } else {
        Polygon2D::from_ring(ring)
    }
}

static UNIT_DISK: std::sync::LazyLock<Vec<(f64, f64)>> = std::sync::LazyLock::new(|| {
    (0..DISK_SEGMENTS)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / DISK_SEGMENTS as f64;
            (a.cos(), a.sin())
        })
        .collect()
});

/// Inscribed polygon approximating the disk of `radius` about the origin.
pub fn disk_polygon(radius: f64) -> Polygon2D {
    let vertices = UNIT_DISK
        .iter()
        .map(|&(c, s)| AngularPoint::new(radius * c, radius * s))
        .collect();
    Polygon2D {
        vertices,
        holes: Vec::new(),
    }
}

/// Area of [`disk_polygon`].
pub fn disk_area(radius: f64) -> f64 {
    let n = DISK_SEGMENTS as f64;
    0.5 * n * radius * radius * (std::f64::consts::TAU / n).sin()
}

/// Clips a convex polygon to the interaction disk.
pub fn clip_convex_to_disk(subject: &Polygon2D, radius: f64) -> Polygon2D {
    if subject.vertices.len() < 3 {
        return Polygon2D::empty();
    }
    let inscribed = radius * (std::f64::consts::PI / DISK_SEGMENTS as f64).cos();
    if subject.vertices.iter().all(|p| p.norm() <= inscribed) {
        return subject.clone();
    }
    if !subject.intersects_disk(radius) {
        return Polygon2D::empty();
    }
    let disk = disk_polygon(radius);
    let n = DISK_SEGMENTS;
    let mut ring = subject.vertices.clone();
    // vertices inside the inscribed circle satisfy every edge
    let beyond = |ring: &[AngularPoint]| -> Vec<AngularPoint> {
        let safe = inscribed * (1.0 - 1e-9);
        ring.iter().copied().filter(|p| p.norm() > safe).collect()
    };
    let mut outer = beyond(&ring);
    for i in 0..n {
        if ring.is_empty() {
            break;
        }
        let (a, b) = (disk.vertices[i], disk.vertices[(i + 1) % n]);
        let normal = AngularPoint::new(b.v - a.v, a.h - b.h);
        let offset = normal.dot(a);
        if outer.iter().all(|p| normal.dot(*p) <= offset) {
            continue;
        }
        ring = clip_half_plane(&ring, normal, offset);
        outer = beyond(&ring);
    }
    if ring.is_empty() {
        Polygon2D::empty()
    } else {
        Polygon2D::from_ring(ring)
    }
}

fn to_contour(ring: &[AngularPoint], ccw: bool) -> Vec<[f64; 2]> {
    let pts: Vec<[f64; 2]> = ring.iter().map(|p| [p.h, p.v]).collect();
    let ccw_now = ring_signed_area(ring) > 0.0;
    if ccw_now == ccw {
        pts
    } else {
        pts.into_iter().rev().collect()
    }
}

/// Whether two convex rings may share interior: false only when some edge
/// of either separates them by more than the epsilon.
pub fn convex_may_overlap(a: &[AngularPoint], b: &[AngularPoint]) -> bool {
    fn separates(edges: &[AngularPoint], other: &[AngularPoint]) -> bool {
        let n = edges.len();
        let orient = ring_signed_area(edges).signum();
        (0..n).any(|i| {
            let p = edges[i];
            let e = edges[(i + 1) % n] - p;
            let len = e.norm();
            len > EPS && other.iter().all(|&q| orient * e.cross(q - p) <= -EPS * len)
        })
    }
    if a.len() < 3 || b.len() < 3 {
        return true;
    }
    !(separates(a, b) || separates(b, a))
}

/// `subject` minus the union of `clips`. When the remainder splits into
/// several pieces only the largest survives; pieces under the sliver area are
/// dropped. Clips whose bounds miss the subject are ignored, and a subject
/// touched by no clip comes back unchanged.
pub fn polygon_difference(subject: &Polygon2D, clips: &[&Polygon2D]) -> Polygon2D {
    let Some(sb) = subject.bounds() else {
        return Polygon2D::empty();
    };
    if subject.vertices.len() < 3 {
        return Polygon2D::empty();
    }
    let mut clip_contours: Vec<Vec<[f64; 2]>> = Vec::new();
    for c in clips {
        if c.vertices.len() < 3 || !c.bounds().is_some_and(|b| b.overlaps(&sb)) {
            continue;
        }
        clip_contours.push(to_contour(&c.vertices, true));
        for h in &c.holes {
            clip_contours.push(to_contour(h, false));
        }
    }
    if clip_contours.is_empty() {
        return subject.clone();
    }
    let mut subj: Vec<Vec<[f64; 2]>> = vec![to_contour(&subject.vertices, true)];
    subj.extend(subject.holes.iter().map(|h| to_contour(h, false)));

    let shapes = subj.overlay(&clip_contours, OverlayRule::Difference, FillRule::NonZero);

    let mut best: Option<(f64, Polygon2D)> = None;
    for shape in shapes {
        let mut rings = shape.into_iter().map(|c| {
            c.into_iter()
                .map(|p| AngularPoint::new(p[0], p[1]))
                .collect::<Vec<_>>()
        });
        let Some(outer) = rings.next() else { continue };
        let holes: Vec<Vec<AngularPoint>> = rings
            .filter(|h| ring_signed_area(h).abs() > SLIVER_AREA)
            .map(|h| oriented(h, false))
            .collect();
        let poly = Polygon2D {
            vertices: oriented(outer, true),
            holes,
        };
        let area = poly.area();
        if area <= SLIVER_AREA {
            continue;
        }
        if best.as_ref().is_none_or(|(a, _)| area > *a) {
            best = Some((area, poly));
        }
    }
    best.map(|(_, p)| p).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(h: f64, v: f64) -> AngularPoint {
        AngularPoint::new(h, v)
    }

    fn square(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon2D {
        Polygon2D::from_ring(vec![pt(x0, y0), pt(x1, y0), pt(x1, y1), pt(x0, y1)])
    }

    #[test]
    fn hull_of_square_with_center() {
        let pts = [pt(0., 0.), pt(1., 0.), pt(1., 1.), pt(0., 1.), pt(0.5, 0.5)];
        let h = convex_hull(&pts);
        assert_eq!(h.vertices.len(), 4);
        assert!((h.area() - 1.0).abs() < 1e-12);
        assert!(ring_signed_area(&h.vertices) > 0.0);
    }

    #[test]
    fn hull_of_identical_points() {
        let h = convex_hull(&[pt(2., 3.); 5]);
        assert_eq!(h.vertices.len(), 1);
        assert_eq!(h.area(), 0.0);
        assert!(convex_hull(&[]).is_empty());
    }

    #[test]
    fn hull_drops_collinear() {
        let pts = [
            pt(0., 0.),
            pt(1., 0.),
            pt(2., 0.),
            pt(2., 2.),
            pt(0., 2.),
            pt(1., 2.),
        ];
        assert_eq!(convex_hull(&pts).vertices.len(), 4);
        let line = convex_hull(&[pt(0., 0.), pt(1., 1.), pt(2., 2.)]);
        assert_eq!(line.vertices.len(), 2);
        assert_eq!(line.area(), 0.0);
    }

    #[test]
    fn centroids() {
        let c = centroid(&square(0., 0., 1., 1.)).unwrap();
        assert!((c.h - 0.5).abs() < 1e-12 && (c.v - 0.5).abs() < 1e-12);
        let t = Polygon2D::from_ring(vec![pt(0., 0.), pt(3., 0.), pt(0., 3.)]);
        let c = centroid(&t).unwrap();
        assert!((c.h - 1.0).abs() < 1e-12 && (c.v - 1.0).abs() < 1e-12);
        assert_eq!(
            centroid(&convex_hull(&[pt(0., 0.), pt(1., 1.)])),
            Err(GeometryError::ZeroArea)
        );
    }

    #[test]
    fn centroid_respects_holes() {
        let mut p = square(0., 0., 4., 4.);
        p.holes
            .push(oriented(square(0., 0., 2., 4.).vertices, false));
        let c = centroid(&p).unwrap();
        assert!((c.h - 3.0).abs() < 1e-12 && (c.v - 2.0).abs() < 1e-12);
        assert!((p.area() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn horizontal_line_through_square() {
        let sq = square(-0.5, -0.5, 0.5, 0.5);
        let ts = line_region_intersections(pt(-3., 0.), pt(1., 0.), &sq);
        assert_eq!(ts.len(), 2);
        assert!((ts[1] - ts[0] - 1.0).abs() < 1e-12);
        assert!(line_region_intersections(pt(-3., 2.), pt(1., 0.), &sq).is_empty());
    }

    #[test]
    fn chord_through_picks_containing_interval() {
        // U shape: two prongs along the line v = 1.5
        let u = Polygon2D::from_ring(vec![
            pt(0., 0.),
            pt(3., 0.),
            pt(3., 2.),
            pt(2., 2.),
            pt(2., 1.),
            pt(1., 1.),
            pt(1., 2.),
            pt(0., 2.),
        ]);
        let (a, b) = chord_through(&u, pt(-1., 1.5), pt(1., 0.), 3.5).unwrap();
        assert!((a - 3.0).abs() < 1e-12 && (b - 4.0).abs() < 1e-12);
        // parameter in the gap: nearest prong
        let (a, _) = chord_through(&u, pt(-1., 1.5), pt(1., 0.), 2.8).unwrap();
        assert!((a - 3.0).abs() < 1e-12);
    }

    #[test]
    fn difference_cases() {
        let s = square(0., 0., 1., 1.);
        let far = square(5., 5., 6., 6.);
        assert_eq!(polygon_difference(&s, &[&far]), s);
        let cover = square(-1., -1., 2., 2.);
        assert!(polygon_difference(&s, &[&cover]).is_empty());
        let right = square(0.5, -1., 2., 2.);
        let d = polygon_difference(&s, &[&right]);
        assert!((d.area() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn difference_keeps_largest_piece_and_holes() {
        let s = square(0., 0., 10., 1.);
        let bar = square(3., -1., 4., 2.);
        let d = polygon_difference(&s, &[&bar]);
        assert!((d.area() - 6.0).abs() < 1e-6);
        let inner = square(4., 0.25, 5., 0.75);
        let d = polygon_difference(&s, &[&inner]);
        assert_eq!(d.holes.len(), 1);
        assert!((d.area() - 9.5).abs() < 1e-6);
    }

    #[test]
    fn overlapping_clips_union() {
        let s = square(0., 0., 4., 4.);
        let a = square(-1., -1., 2., 5.);
        let b = square(1., -1., 3., 5.);
        let d = polygon_difference(&s, &[&a, &b]);
        assert!((d.area() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn disk_clip() {
        let big = square(-30., -30., 30., 30.);
        let c = clip_convex_to_disk(&big, 20.0);
        assert!((c.area() - disk_area(20.0)).abs() < 1e-6);
        assert!(c.vertices.iter().all(|p| p.norm() <= 20.0 + 1e-9));
        let outside = square(25., 25., 26., 26.);
        assert!(clip_convex_to_disk(&outside, 20.0).is_empty());
        let inside = square(0., 0., 1., 1.);
        assert_eq!(clip_convex_to_disk(&inside, 20.0), inside);
    }
}
