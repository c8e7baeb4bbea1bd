//! Convex polyhedra as face lists, clipped by half-spaces.

use super::{AngularPoint, ControllerFrame, GeometryError, Polygon2D, Vec3, EPS};

/// Half-space `normal·x ≤ offset`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub normal: Vec3,
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, p: &Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AaBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl AaBox {
    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - EPS && p[i] <= self.max[i] + EPS)
    }

    pub fn volume(&self) -> f64 {
        let d = self.max - self.min;
        d.x * d.y * d.z
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polyhedron3D {
    /// Planar convex faces, each an ordered vertex loop.
    pub faces: Vec<Vec<Vec3>>,
    /// Bounding half-spaces whose intersection is the polyhedron.
    pub planes: Vec<Plane>,
}

impl Polyhedron3D {
    pub fn from_box(b: &AaBox) -> Self {
        let (lo, hi) = (b.min, b.max);
        let c = |x: bool, y: bool, z: bool| {
            Vec3::new(
                if x { hi.x } else { lo.x },
                if y { hi.y } else { lo.y },
                if z { hi.z } else { lo.z },
            )
        };
        let faces = vec![
            vec![
                c(false, false, false),
                c(false, true, false),
                c(false, true, true),
                c(false, false, true),
            ],
            vec![
                c(true, false, false),
                c(true, false, true),
                c(true, true, true),
                c(true, true, false),
            ],
            vec![
                c(false, false, false),
                c(false, false, true),
                c(true, false, true),
                c(true, false, false),
            ],
            vec![
                c(false, true, false),
                c(true, true, false),
                c(true, true, true),
                c(false, true, true),
            ],
            vec![
                c(false, false, false),
                c(true, false, false),
                c(true, true, false),
                c(false, true, false),
            ],
            vec![
                c(false, false, true),
                c(false, true, true),
                c(true, true, true),
                c(true, false, true),
            ],
        ];
        let planes = vec![
            Plane {
                normal: -Vec3::x(),
                offset: -lo.x,
            },
            Plane {
                normal: Vec3::x(),
                offset: hi.x,
            },
            Plane {
                normal: -Vec3::y(),
                offset: -lo.y,
            },
            Plane {
                normal: Vec3::y(),
                offset: hi.y,
            },
            Plane {
                normal: -Vec3::z(),
                offset: -lo.z,
            },
            Plane {
                normal: Vec3::z(),
                offset: hi.z,
            },
        ];
        Self { faces, planes }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    /// Image under a rigid motion `f`.
    pub fn transformed(&self, f: impl Fn(&Vec3) -> Vec3) -> Self {
        let origin = f(&Vec3::zeros());
        let faces = self
            .faces
            .iter()
            .map(|face| face.iter().map(&f).collect())
            .collect();
        let planes = self
            .planes
            .iter()
            .map(|p| {
                let normal = f(&p.normal) - origin;
                let point = f(&(p.normal * (p.offset / p.normal.norm_squared())));
                Plane {
                    normal,
                    offset: normal.dot(&point),
                }
            })
            .collect();
        Self { faces, planes }
    }

    /// Distinct vertices in first-seen order.
    pub fn vertices(&self) -> Vec<Vec3> {
        let mut out: Vec<Vec3> = Vec::new();
        for f in &self.faces {
            for v in f {
                if !out.iter().any(|u| (u - v).norm() <= 1e-9) {
                    out.push(*v);
                }
            }
        }
        out
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        !self.is_empty() && self.planes.iter().all(|pl| pl.signed_distance(p) <= EPS)
    }

    pub fn volume(&self) -> f64 {
        let verts = self.vertices();
        if verts.len() < 4 {
            return 0.0;
        }
        let c = verts.iter().sum::<Vec3>() / verts.len() as f64;
        self.faces
            .iter()
            .filter(|f| f.len() >= 3)
            .map(|f| {
                let n = newell_normal(f);
                let area = 0.5 * n.norm();
                if area <= 0.0 {
                    return 0.0;
                }
                area * (f[0] - c).dot(&n.normalize()).abs() / 3.0
            })
            .sum()
    }

    /// Degenerate when the interior has (numerically) no volume.
    pub fn is_degenerate(&self) -> bool {
        self.volume() <= 1e-12
    }

    /// Largest distance from `p` to a vertex.
    pub fn max_vertex_distance(&self, p: &Vec3) -> f64 {
        self.faces
            .iter()
            .flatten()
            .map(|v| (v - p).norm())
            .fold(0.0, f64::max)
    }

    /// Intersects with the half-space `plane`.
    pub fn clip(&mut self, plane: Plane) {
        if self.is_empty() {
            return;
        }
        let dists: Vec<Vec<f64>> = self
            .faces
            .iter()
            .map(|f| f.iter().map(|v| plane.signed_distance(v)).collect())
            .collect();
        if dists.iter().flatten().all(|&d| d <= EPS) {
            return;
        }
        if dists.iter().flatten().all(|&d| d >= -EPS) {
            self.faces.clear();
            self.planes.push(plane);
            return;
        }
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        let mut section: Vec<Vec3> = Vec::new();
        for (face, d) in self.faces.iter().zip(&dists) {
            let n = face.len();
            let mut out = Vec::with_capacity(n + 1);
            for i in 0..n {
                let j = (i + 1) % n;
                let (a, b) = (face[i], face[j]);
                let (da, db) = (d[i], d[j]);
                if da <= EPS {
                    out.push(a);
                    if da.abs() <= EPS {
                        section.push(a);
                    }
                }
                if (da > EPS && db < -EPS) || (da < -EPS && db > EPS) {
                    let p = a + (b - a) * (da / (da - db));
                    out.push(p);
                    section.push(p);
                }
            }
            dedup_loop(&mut out);
            if out.len() >= 3 {
                faces.push(out);
            }
        }
        let cap = order_on_plane(section, &plane.normal);
        if cap.len() >= 3 {
            faces.push(cap);
        }
        self.faces = faces;
        self.planes.push(plane);
    }
}

fn dedup_loop(points: &mut Vec<Vec3>) {
    points.dedup_by(|a, b| (*a - *b).norm() <= 1e-9);
    while points.len() > 1 && (points[0] - points[points.len() - 1]).norm() <= 1e-9 {
        points.pop();
    }
}

fn newell_normal(face: &[Vec3]) -> Vec3 {
    let mut n = Vec3::zeros();
    for i in 0..face.len() {
        let (a, b) = (face[i], face[(i + 1) % face.len()]);
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    n
}

/// Orders coplanar points counter-clockwise about `normal`, dropping duplicates.
fn order_on_plane(mut pts: Vec<Vec3>, normal: &Vec3) -> Vec<Vec3> {
    let mut uniq: Vec<Vec3> = Vec::with_capacity(pts.len());
    for p in pts.drain(..) {
        if !uniq.iter().any(|q| (q - p).norm() <= 1e-9) {
            uniq.push(p);
        }
    }
    if uniq.len() < 3 {
        return uniq;
    }
    let c = uniq.iter().sum::<Vec3>() / uniq.len() as f64;
    let helper = if normal.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let u = normal.cross(&helper).normalize();
    let w = normal.normalize().cross(&u);
    uniq.sort_by(|a, b| {
        let (da, db) = (a - c, b - c);
        da.dot(&w)
            .atan2(da.dot(&u))
            .total_cmp(&db.dot(&w).atan2(db.dot(&u)))
    });
    uniq
}

/// Voronoi cell of `site` inside `clip_box`: the box intersected with every
/// bisector half-space toward `site`. Other sites coincident with `site` are
/// skipped.
pub fn voronoi_cell_3d(
    site: &Vec3,
    other_sites: &[Vec3],
    clip_box: &AaBox,
) -> Result<Polyhedron3D, GeometryError> {
    if !clip_box.contains(site) {
        return Err(GeometryError::SiteOutsideBox);
    }
    let mut others: Vec<(f64, &Vec3)> = other_sites
        .iter()
        .map(|o| ((o - site).norm(), o))
        .filter(|(d, _)| *d > EPS)
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cell = Polyhedron3D::from_box(clip_box);
    for (d, other) in others {
        if 0.5 * d > cell.max_vertex_distance(site) + EPS {
            break;
        }
        let normal = (other - site) / d;
        let mid = (site + other) * 0.5;
        cell.clip(Plane {
            normal,
            offset: normal.dot(&mid),
        });
        if cell.is_empty() {
            break;
        }
    }
    Ok(cell)
}

/// Cells for every site. A site coincident with a lower-indexed one gets an
/// empty cell; sites outside the box error.
pub fn voronoi_cells_3d(
    sites: &[Vec3],
    clip_box: &AaBox,
) -> Vec<Result<Polyhedron3D, GeometryError>> {
    sites
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if sites[..i].iter().any(|o| (o - s).norm() <= EPS) {
                return Ok(Polyhedron3D::default());
            }
            voronoi_cell_3d(s, sites, clip_box)
        })
        .collect()
}

/// Projects the vertices in front of the controller and takes their hull.
/// `frame_local` vertices are given in controller coordinates.
pub fn project_polyhedron(poly: &Polyhedron3D, frame: &ControllerFrame) -> Polygon2D {
    let pts: Vec<AngularPoint> = poly
        .vertices()
        .iter()
        .filter_map(|v| frame.project(v).ok())
        .collect();
    super::convex_hull(&pts)
}

/// As [`project_polyhedron`] for a polyhedron already in controller coordinates.
pub fn project_local_polyhedron(poly: &Polyhedron3D) -> Polygon2D {
    let pts: Vec<AngularPoint> = poly
        .vertices()
        .iter()
        .filter_map(|v| super::project_local(v).ok())
        .collect();
    super::convex_hull(&pts)
}
