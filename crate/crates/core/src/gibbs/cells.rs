//! Equal-area partition of the sphere: octants of the octahedron refined by
//! repeated bisection of right isosceles triangles in the octahedral
//! equal-area chart. Level `l` has `2^l` cells, and the index at level
//! `l - 1` is the index at level `l` shifted right by one.

use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use crate::SpherePoint;

/// Deepest supported fiber level.
pub const MAX_FIBER_LEVEL: u32 = 24;

/// Fixed generic rotation applied before partitioning, so that no great
/// circle of interest (the real circle in particular) runs along a cell edge.
fn rotation() -> &'static [[f64; 3]; 3] {
    static R: OnceLock<[[f64; 3]; 3]> = OnceLock::new();
    R.get_or_init(|| {
        let n = (1.0f64 + 4.0 + 9.0).sqrt();
        let k = [1.0 / n, 2.0 / n, 3.0 / n];
        let (s, c) = 0.731_f64.sin_cos();
        let t = 1.0 - c;
        [
            [c + k[0] * k[0] * t, k[0] * k[1] * t - k[2] * s, k[0] * k[2] * t + k[1] * s],
            [k[1] * k[0] * t + k[2] * s, c + k[1] * k[1] * t, k[1] * k[2] * t - k[0] * s],
            [k[2] * k[0] * t - k[1] * s, k[2] * k[1] * t + k[0] * s, c + k[2] * k[2] * t],
        ]
    })
}

fn rotate(p: [f64; 3]) -> [f64; 3] {
    let r = rotation();
    std::array::from_fn(|i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2])
}

fn unrotate(p: [f64; 3]) -> [f64; 3] {
    let r = rotation();
    std::array::from_fn(|i| r[0][i] * p[0] + r[1][i] * p[1] + r[2][i] * p[2])
}

/// Octant bits and equal-area triangle coordinates `(u, v)`, `u, v >= 0`, `u + v <= 1`.
fn chart(p: [f64; 3]) -> (u32, f64, f64) {
    let [x, y, z] = rotate(p);
    let octant = (u32::from(z < 0.0) << 2) | (u32::from(x < 0.0) << 1) | u32::from(y < 0.0);
    let r = (1.0 - z.abs()).max(0.0).sqrt();
    let phi = y.abs().atan2(x.abs());
    let v = r * phi / FRAC_PI_2;
    (octant, r - v, v)
}

fn unchart(octant: u32, u: f64, v: f64) -> [f64; 3] {
    let r = u + v;
    let phi = if r > 0.0 { FRAC_PI_2 * v / r } else { 0.0 };
    let rho = r * (2.0 - r * r).max(0.0).sqrt();
    let sx = if octant & 2 != 0 { -1.0 } else { 1.0 };
    let sy = if octant & 1 != 0 { -1.0 } else { 1.0 };
    let sz = if octant & 4 != 0 { -1.0 } else { 1.0 };
    unrotate([sx * rho * phi.cos(), sy * rho * phi.sin(), sz * (1.0 - r * r)])
}

type Tri = [[f64; 2]; 3];

const OCTANT_TRIANGLE: Tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

fn mid(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Children of a right isosceles triangle `[apex, b, c]` split through the apex.
fn children(t: &Tri) -> [Tri; 2] {
    let m = mid(t[1], t[2]);
    [[m, t[0], t[1]], [m, t[2], t[0]]]
}

fn side_of(t: &Tri, p: [f64; 2]) -> u32 {
    let m = mid(t[1], t[2]);
    let (ax, ay) = (m[0] - t[0][0], m[1] - t[0][1]);
    let (bx, by) = (p[0] - t[0][0], p[1] - t[0][1]);
    let (cx, cy) = (t[1][0] - t[0][0], t[1][1] - t[0][1]);
    // same side as `b` -> first child
    u32::from((ax * by - ay * bx) * (ax * cy - ay * cx) < 0.0)
}

/// Index of the cell containing `p` at `level`.
pub fn fiber_cell(p: &SpherePoint, level: u32) -> u32 {
    debug_assert!(level <= MAX_FIBER_LEVEL);
    if level == 0 {
        return 0;
    }
    let (oct, u, v) = chart(p.to_cartesian());
    if level <= 3 {
        return oct >> (3 - level);
    }
    let mut t = OCTANT_TRIANGLE;
    let mut idx = oct;
    for _ in 3..level {
        let b = side_of(&t, [u, v]);
        t = children(&t)[b as usize];
        idx = (idx << 1) | b;
    }
    idx
}

/// Coarse levels are unions of octants; deeper ones a single triangle.
fn cell_triangles(idx: u32, level: u32) -> Vec<(u32, Tri)> {
    if level <= 3 {
        let shift = 3 - level;
        return (0..1u32 << shift).map(|k| ((idx << shift) | k, OCTANT_TRIANGLE)).collect();
    }
    let oct = idx >> (level - 3);
    let mut t = OCTANT_TRIANGLE;
    for k in (0..level - 3).rev() {
        t = children(&t)[((idx >> k) & 1) as usize];
    }
    vec![(oct, t)]
}

/// A representative point of the cell (image of its chart centroid; for
/// unions of octants, the normalized mean of the octant centers).
pub fn fiber_cell_center(idx: u32, level: u32) -> SpherePoint {
    let mut acc = [0.0; 3];
    for (oct, t) in cell_triangles(idx, level) {
        let u = (t[0][0] + t[1][0] + t[2][0]) / 3.0;
        let v = (t[0][1] + t[1][1] + t[2][1]) / 3.0;
        let p = unchart(oct, u, v);
        for k in 0..3 {
            acc[k] += p[k];
        }
    }
    SpherePoint::from_cartesian(acc).unwrap_or_else(|_| SpherePoint::infinity())
}

/// Position of a point in the unfolded octahedral square `[-1, 1]^2`, which
/// is an equal-area picture of the rotated sphere.
pub fn unfolded(oct: u32, u: f64, v: f64) -> [f64; 2] {
    let sx = if oct & 2 != 0 { -1.0 } else { 1.0 };
    let sy = if oct & 1 != 0 { -1.0 } else { 1.0 };
    if oct & 4 == 0 {
        [sx * u, sy * v]
    } else {
        [sx * (1.0 - v), sy * (1.0 - u)]
    }
}

/// Polygons of a cell in the unfolded square.
pub fn unfolded_polygons(idx: u32, level: u32) -> Vec<[[f64; 2]; 3]> {
    cell_triangles(idx, level)
        .into_iter()
        .map(|(oct, t)| std::array::from_fn(|k| unfolded(oct, t[k][0], t[k][1])))
        .collect()
}
