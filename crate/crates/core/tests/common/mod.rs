#![allow(dead_code)]

use ghpsnr_core::{Point3, PointCloud};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_points(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<Point3> {
    (0..n)
        .map(|_| [0; 3].map(|_| rng.random::<f64>() * extent))
        .collect()
}

pub fn random_unit(rng: &mut ChaCha8Rng) -> Point3 {
    loop {
        let v = [0; 3].map(|_| rng.random::<f64>() * 2.0 - 1.0);
        let n2: f64 = v.iter().map(|c| c * c).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return v.map(|c| c / n);
        }
    }
}

pub fn cloud(name: &str, points: Vec<Point3>) -> PointCloud {
    PointCloud::new(name, points).unwrap()
}

pub fn with_random_normals(c: PointCloud, rng: &mut ChaCha8Rng) -> PointCloud {
    let normals = (0..c.len()).map(|_| random_unit(rng)).collect();
    c.with_normals(normals).unwrap()
}

/// Brute-force nearest neighbor: lowest index among the exact minima.
pub fn brute_nn(points: &[Point3], q: &Point3) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = (0..3).map(|a| (q[a] - p[a]) * (q[a] - p[a])).sum::<f64>();
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Per-point errors from `query` to `reference`, O(N*M).
pub fn brute_errors(query: &PointCloud, reference: &PointCloud, plane: bool) -> Vec<f64> {
    query
        .points()
        .iter()
        .map(|q| {
            let (i, d) = brute_nn(reference.points(), q);
            if plane {
                let n = reference.normals().unwrap()[i];
                let p = reference.points()[i];
                let proj: f64 = (0..3).map(|a| (q[a] - p[a]) * n[a]).sum();
                proj * proj
            } else {
                d
            }
        })
        .collect()
}

/// D1 (plane = false) or D2 PSNR by direct evaluation of the definitions.
pub fn brute_mse_psnr(a: &PointCloud, b: &PointCloud, plane: bool, peak: f64) -> f64 {
    let ab = brute_errors(a, b, plane);
    let ba = brute_errors(b, a, plane);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let d = mean(&ab).max(mean(&ba));
    10.0 * (3.0 * peak * peak / d).log10()
}

pub fn rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    // orthonormalized random frame
    let u = random_unit(rng);
    let mut v = random_unit(rng);
    let d: f64 = (0..3).map(|a| u[a] * v[a]).sum();
    v = [0, 1, 2].map(|a| v[a] - d * u[a]);
    let nv = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v = v.map(|c| c / nv);
    let w = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    [u, v, w]
}

pub fn apply(r: &[[f64; 3]; 3], p: &Point3) -> Point3 {
    [0, 1, 2].map(|i| r[i][0] * p[0] + r[i][1] * p[1] + r[i][2] * p[2])
}
