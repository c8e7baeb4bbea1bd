//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use adaptsel_core::geometry::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_disk_point(rng: &mut impl Rng, r: f64) -> AngularPoint {
    loop {
        let p = AngularPoint::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if p.norm() < r {
            return p;
        }
    }
}

/// O(n³) hull: (i, j) is an edge when every other point lies strictly left.
pub fn brute_hull(pts: &[AngularPoint]) -> Vec<AngularPoint> {
    let mut out = Vec::new();
    for (i, a) in pts.iter().enumerate() {
        let on_hull = pts.iter().enumerate().any(|(j, b)| {
            j != i
                && pts
                    .iter()
                    .enumerate()
                    .all(|(k, c)| k == i || k == j || (*b - *a).cross(*c - *a) > 0.0)
        });
        if on_hull {
            out.push(*a);
        }
    }
    out.sort_by(|a, b| a.h.total_cmp(&b.h).then(a.v.total_cmp(&b.v)));
    out
}

pub fn voronoi_2d_agreement(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites: Vec<AngularPoint> = (0..n).map(|_| random_disk_point(&mut rng, 20.0)).collect();
    let cells = voronoi_cells_2d(&sites, 20.0);
    let samples = 10_000;
    let hits = (0..samples)
        .filter(|_| {
            let p = random_disk_point(&mut rng, 19.9);
            let nearest = (0..n)
                .min_by(|&a, &b| sites[a].dist(p).total_cmp(&sites[b].dist(p)))
                .unwrap();
            cells[nearest].contains(p)
        })
        .count();
    hits as f64 / samples as f64
}

pub fn voronoi_3d_agreement(n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = AaBox {
        min: Vec3::new(-1.5, -1.5, 2.0),
        max: Vec3::new(1.5, 1.5, 5.0),
    };
    let sample = |rng: &mut ChaCha8Rng| {
        Vec3::new(
            rng.gen_range(b.min.x..b.max.x),
            rng.gen_range(b.min.y..b.max.y),
            rng.gen_range(b.min.z..b.max.z),
        )
    };
    let sites: Vec<Vec3> = (0..n).map(|_| sample(&mut rng)).collect();
    let cells: Vec<Polyhedron3D> = voronoi_cells_3d(&sites, &b)
        .into_iter()
        .map(Result::unwrap)
        .collect();
    let samples = 10_000;
    let hits = (0..samples)
        .filter(|_| {
            let p = sample(&mut rng);
            let nearest = (0..n)
                .min_by(|&i, &j| (sites[i] - p).norm().total_cmp(&(sites[j] - p).norm()))
                .unwrap();
            cells[nearest].contains(&p)
        })
        .count();
    hits as f64 / samples as f64
}

pub fn inside_ring(ring: &[AngularPoint], p: AngularPoint) -> bool {
    let mut inside = false;
    let n = ring.len();
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if (a.v > p.v) != (b.v > p.v) && p.h < a.h + (p.v - a.v) / (b.v - a.v) * (b.h - a.h) {
            inside = !inside;
        }
    }
    inside
}

pub fn ngon(center: AngularPoint, r: f64, n: usize, phase: f64) -> Polygon2D {
    Polygon2D::from_ring(
        (0..n)
            .map(|k| {
                let a = phase + std::f64::consts::TAU * k as f64 / n as f64;
                center + AngularPoint::new(r * a.cos(), r * a.sin())
            })
            .collect(),
    )
}

/// Midpoint-rule area of `subject` minus every clip.
pub fn raster_difference(subject: &Polygon2D, clips: &[Polygon2D], res: usize) -> f64 {
    let b = subject.bounds().unwrap();
    let (dh, dv) = (
        (b.max.h - b.min.h) / res as f64,
        (b.max.v - b.min.v) / res as f64,
    );
    let mut count = 0usize;
    for i in 0..res {
        for j in 0..res {
            let p = AngularPoint::new(
                b.min.h + (i as f64 + 0.5) * dh,
                b.min.v + (j as f64 + 0.5) * dv,
            );
            if inside_ring(&subject.vertices, p)
                && !clips.iter().any(|c| inside_ring(&c.vertices, p))
            {
                count += 1;
            }
        }
    }
    count as f64 * dh * dv
}

fn simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// Mass of `N((mu, 0), diag(sx², sy²))` over `[x1, x2] × [y2, y1]` by
/// nested quadrature of the density.
pub fn box_mass_by_quadrature(
    x1: f64,
    x2: f64,
    y1: f64,
    y2: f64,
    mu: f64,
    sx: f64,
    sy: f64,
) -> f64 {
    let density = |x: f64, y: f64| {
        let (u, v) = ((x - mu) / sx, y / sy);
        (-0.5 * (u * u + v * v)).exp() / (std::f64::consts::TAU * sx * sy)
    };
    let inner = |x: f64| integrate(&|y| density(x, y), y2, y1, 1e-10);
    integrate(&inner, x1, x2, 1e-9)
}

/// Endpoint-model regressions written out longhand.
pub fn endpoint_model(a: f64, w: f64) -> (f64, f64, f64) {
    (
        -0.1441 * w + 0.2649,
        0.0066 * a + 0.1025 * w + 0.2663,
        0.0085 * a + 0.0679 * w + 0.1437,
    )
}

/// Straight horizontal arm: torque of the combined center of mass of
/// upper arm, forearm and hand from the published segment table.
pub fn horizontal_torque_oracle() -> f64 {
    let segments = [(0.33, 2.1, 0.132), (0.269, 1.2, 0.117), (0.191, 0.4, 0.07)];
    let mut start = 0.0;
    let (mut moment, mut mass) = (0.0, 0.0);
    for (len, m, com) in segments {
        moment += m * (start + com);
        mass += m;
        start += len;
    }
    mass * 9.81 * (moment / mass)
}
