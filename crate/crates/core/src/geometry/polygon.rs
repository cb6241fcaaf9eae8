//! Planar polygon helpers used by the cross-section code.
//!
//! Polygons are stored as open vertex lists (the closing edge from the last
//! vertex back to the first is implicit) and are counter-clockwise unless a
//! function says otherwise.

use std::f64::consts::PI;

pub type Point2 = [f64; 2];

/// Signed area by the shoelace formula. Positive for counter-clockwise input.
pub fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    if n < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc += a[0] * b[1] - b[0] * a[1];
    }
    0.5 * acc
}

pub fn area(poly: &[Point2]) -> f64 {
    signed_area(poly).abs()
}

/// Area centroid of a simple polygon.
pub fn centroid(poly: &[Point2]) -> Point2 {
    let n = poly.len();
    let a = signed_area(poly);
    if n < 3 || a == 0.0 {
        return [0.0, 0.0];
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let cross = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    [cx / (6.0 * a), cy / (6.0 * a)]
}

pub fn perimeter(poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| dist(poly[i], poly[(i + 1) % n])).sum()
}

pub fn dist(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Distance from a point to the closed boundary of a polygon.
pub fn boundary_distance(p: Point2, poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| point_segment_distance(p, poly[i], poly[(i + 1) % n])).fold(f64::INFINITY, f64::min)
}

/// Even-odd point containment.
pub fn contains(poly: &[Point2], p: Point2) -> bool {
    let n = poly.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> bool {
    let d1 = orient(b0, b1, a0);
    let d2 = orient(b0, b1, a1);
    let d3 = orient(a0, a1, b0);
    let d4 = orient(a0, a1, b1);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// Returns the index pair of the first two non-adjacent edges that cross,
/// or `None` when the polygon is simple.
pub fn first_self_intersection(poly: &[Point2]) -> Option<(usize, usize)> {
    let n = poly.len();
    if n < 4 {
        return None;
    }
    let edge = |i: usize| (poly[i], poly[(i + 1) % n]);
    for i in 0..n {
        let (a0, a1) = edge(i);
        let (xmin, xmax) = (a0[0].min(a1[0]), a0[0].max(a1[0]));
        let (ymin, ymax) = (a0[1].min(a1[1]), a0[1].max(a1[1]));
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (b0, b1) = edge(j);
            if b0[0].max(b1[0]) < xmin || b0[0].min(b1[0]) > xmax || b0[1].max(b1[1]) < ymin || b0[1].min(b1[1]) > ymax
            {
                continue;
            }
            if segments_cross(a0, a1, b0, b1) {
                return Some((i, j));
            }
        }
    }
    None
}

/// Total chord length of the horizontal line `y = const` inside the polygon.
pub fn scanline_width(poly: &[Point2], y: f64) -> f64 {
    let n = poly.len();
    let mut xs: Vec<f64> = Vec::new();
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        if (a[1] <= y) != (b[1] <= y) {
            xs.push(a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.chunks_exact(2).map(|c| c[1] - c[0]).sum()
}

/// Reflects across the `x = 0` plane, reversing vertex order so the
/// orientation stays counter-clockwise.
pub fn reflect_x(poly: &[Point2]) -> Vec<Point2> {
    poly.iter().rev().map(|p| [-p[0], p[1]]).collect()
}

pub fn sample_circle(centre: Point2, radius: f64, samples: usize) -> Vec<Point2> {
    (0..samples)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / samples as f64;
            [centre[0] + radius * t.cos(), centre[1] + radius * t.sin()]
        })
        .collect()
}

/// Upper half disc of the given diameter sitting on `y = 0`, with `samples`
/// vertices on the arc.
pub fn sample_semicircle(radius: f64, samples: usize) -> Vec<Point2> {
    (0..samples)
        .map(|i| {
            let t = PI * i as f64 / (samples - 1) as f64;
            [radius * t.cos(), radius * t.sin()]
        })
        .collect()
}

/// Circle of radius `radius` about the origin, clipped to `y >= cut_y`.
/// `samples` vertices are spread over the arc; the chord closes the shape.
pub fn sample_circular_segment(radius: f64, cut_y: f64, samples: usize) -> Vec<Point2> {
    let t0 = (cut_y / radius).asin();
    let t1 = PI - t0;
    (0..samples)
        .map(|i| {
            let t = t0 + (t1 - t0) * i as f64 / (samples - 1) as f64;
            [radius * t.cos(), radius * t.sin()]
        })
        .collect()
}
