#![allow(dead_code)]

use dscflow::sim::Grid;
use dscflow::{HexCell, Mesh, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Unit-cube corners in the crate's vertex order.
pub const CUBE: [[f64; 3]; 8] =
    [[0., 0., 0.], [1., 0., 0.], [1., 1., 0.], [0., 1., 0.], [0., 0., 1.], [1., 0., 1.], [1., 1., 1.], [0., 1., 1.]];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn v(a: [f64; 3]) -> Vec3<f64> {
    Vec3::new(a[0], a[1], a[2])
}

pub fn random_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec3<f64> {
    Vec3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// `m x + shift` for a random, diagonally dominant `m`.
pub fn random_affine(rng: &mut ChaCha8Rng) -> impl Fn(Vec3<f64>) -> Vec3<f64> {
    let m: [[f64; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { rng.gen_range(0.5..2.0) } else { rng.gen_range(-0.3..0.3) })
    });
    let shift = random_vec(rng, 5.0);
    move |x: Vec3<f64>| {
        Vec3::new(
            m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
            m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
            m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2],
        ) + shift
    }
}

/// Jittered, sheared cube: generally warped faces.
pub fn random_vertices(rng: &mut ChaCha8Rng, jitter: f64) -> [Vec3<f64>; 8] {
    let map = random_affine(rng);
    CUBE.map(|c| map(v(c) + random_vec(rng, jitter)))
}

pub fn random_cell(rng: &mut ChaCha8Rng, jitter: f64) -> HexCell<f64> {
    loop {
        if let Ok(c) = HexCell::new(0, [0; 8], &random_vertices(rng, jitter)) {
            return c;
        }
    }
}

/// Affine image of a frustum with random top and bottom rectangles: all
/// faces planar, but not a parallelepiped.
pub fn random_planar_vertices(rng: &mut ChaCha8Rng) -> [Vec3<f64>; 8] {
    let map = random_affine(rng);
    let (bx, by) = (rng.gen_range(0.5..1.5), rng.gen_range(0.5..1.5));
    let s = rng.gen_range(0.4..1.6);
    let (ox, oy) = (rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
    CUBE.map(|c| {
        let (sx, sy, dx, dy) = if c[2] == 0.0 { (bx, by, 0.0, 0.0) } else { (bx * s, by * s, ox, oy) };
        map(Vec3::new(c[0] * sx + dx, c[1] * sy + dy, c[2]))
    })
}

/// `n × n × nz` box of side one with every interior vertex moved by up to
/// `jitter` cell widths. Every boundary face is tagged `wall`.
pub fn jittered_box(n: usize, nz: usize, jitter: f64, seed: u64) -> Mesh<f64> {
    let mut r = rng(seed);
    let h = 1.0 / n as f64;
    let hz = 1.0 / nz as f64;
    let mut offsets = vec![[0.0; 3]; (n + 1) * (n + 1) * (nz + 1)];
    for k in 0..=nz {
        for j in 0..=n {
            for i in 0..=n {
                let inner = |a: usize, m: usize| a > 0 && a < m;
                let o = &mut offsets[i + (n + 1) * (j + (n + 1) * k)];
                for (d, (idx, m)) in [(i, n), (j, n), (k, nz)].into_iter().enumerate() {
                    if inner(idx, m) {
                        o[d] = r.gen_range(-jitter..jitter) * if d == 2 { hz } else { h };
                    }
                }
            }
        }
    }
    Grid::new(n, n, nz)
        .build(
            |i, j, k| {
                let o = offsets[i + (n + 1) * (j + (n + 1) * k)];
                Vec3::new(i as f64 * h + o[0], j as f64 * h + o[1], k as f64 * hz + o[2])
            },
            |_, _, _| false,
            |_, _, _, _, _| "wall",
        )
        .expect("jittered box builds")
}
