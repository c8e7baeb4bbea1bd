//! Voronoi cells in the control space, bounded by the interaction disk.
//!
//! Each cell is built by clipping the disk's bounding square with the
//! bisector half-planes of the other sites, nearest first, stopping once the
//! remaining sites are too far to cut the cell, and finally clipping to the
//! disk.

use super::polygon::{clip_convex_to_disk, clip_half_plane};
use super::{AngularPoint, Polygon2D, EPS};

/// One cell per site. Sites closer than the geometric epsilon to a
/// lower-indexed site receive an empty cell.
pub fn voronoi_cells_2d(sites: &[AngularPoint], clip_disk_radius: f64) -> Vec<Polygon2D> {
    (0..sites.len())
        .map(|i| cell(i, sites, clip_disk_radius))
        .collect()
}

fn cell(i: usize, sites: &[AngularPoint], radius: f64) -> Polygon2D {
    let site = sites[i];
    let mut others: Vec<(f64, usize)> = Vec::with_capacity(sites.len());
    for (j, s) in sites.iter().enumerate() {
        if j == i {
            continue;
        }
        let d = site.dist(*s);
        if d <= EPS {
            if j < i {
                return Polygon2D::empty();
            }
            continue;
        }
        others.push((d, j));
    }
    // nearest first; the cut-off is usually reached within the first few
    let order = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    const HEAD: usize = 24;
    if others.len() > HEAD {
        others.select_nth_unstable_by(HEAD, order);
        others[..HEAD].sort_unstable_by(order);
    } else {
        others.sort_unstable_by(order);
    }
    let mut sorted_tail = others.len() <= HEAD;

    let r = radius;
    let mut ring = vec![
        AngularPoint::new(-r, -r),
        AngularPoint::new(r, -r),
        AngularPoint::new(r, r),
        AngularPoint::new(-r, r),
    ];
    let mut reach = ring.iter().map(|p| p.dist(site)).fold(0.0, f64::max);
    for k in 0..others.len() {
        if k == HEAD && !sorted_tail {
            others[HEAD..].sort_unstable_by(order);
            sorted_tail = true;
        }
        let (d, j) = others[k];
        if 0.5 * d > reach + EPS {
            break;
        }
        let other = sites[j];
        let normal = other - site;
        let mid = (site + other).scale(0.5);
        ring = clip_half_plane(&ring, normal, normal.dot(mid));
        if ring.is_empty() {
            return Polygon2D::empty();
        }
        reach = ring.iter().map(|p| p.dist(site)).fold(0.0, f64::max);
    }
    clip_convex_to_disk(&Polygon2D::from_ring(ring), radius)
}
