//! Low-discrepancy sample points with a seeded random shift.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Annulus, CylPoint};

const BASES: [u32; 3] = [2, 3, 5];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while index > 0 {
        x += (index % b) as f64 * f;
        index /= b;
        f *= inv;
    }
    x
}

/// Halton sequence in `[0,1)^3` with a Cranley-Patterson rotation drawn from `seed`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedHalton {
    shift: [f64; 3],
}

impl ShiftedHalton {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self { shift: [rng.random(), rng.random(), rng.random()] }
    }

    pub fn point(&self, index: u64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            // skip index 0 so the unshifted sequence never starts at the origin
            let x = radical_inverse(index + 1, BASES[k]) + self.shift[k];
            out[k] = x - x.floor();
        }
        out
    }
}

/// `n` points strictly inside the annulus with `|z| <= z_half`, at least
/// `margin` away from both walls.
pub fn interior_points(a: &Annulus, n: usize, seed: u64, margin: f64, z_half: f64) -> Vec<CylPoint> {
    let seq = ShiftedHalton::new(seed);
    let lo = a.r_inner() + margin;
    let span = (a.width() - 2.0 * margin).max(0.0);
    (0..n as u64)
        .map(|i| {
            let [u, v, w] = seq.point(i);
            // u in [0,1); keep clear of the inner wall as well as the outer one
            let rho = lo + span * (0.5 + (u - 0.5) * (1.0 - 1e-9));
            CylPoint { rho, theta: std::f64::consts::TAU * v, z: z_half * (2.0 * w - 1.0) }
        })
        .collect()
}

/// `n` points `(theta, z)` on the cylinder of radius `r`.
pub fn wall_points(r: f64, n: usize, seed: u64, z_half: f64) -> Vec<CylPoint> {
    let seq = ShiftedHalton::new(seed);
    (0..n as u64)
        .map(|i| {
            let [v, w, _] = seq.point(i);
            CylPoint { rho: r, theta: std::f64::consts::TAU * v, z: z_half * (2.0 * w - 1.0) }
        })
        .collect()
}
