mod common;

use common::*;
use ghpsnr_core::normals::estimate_normals;

fn sphere(n: usize) -> Vec<[f64; 3]> {
    // Fibonacci lattice on the unit sphere
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let t = golden * i as f64;
            [r * t.cos(), r * t.sin(), z]
        })
        .collect()
}

#[test]
fn sphere_normals_follow_radial_direction() {
    let pts = sphere(800);
    let c = cloud("sphere", pts.clone());
    let out = estimate_normals(&c, 12).unwrap();
    for (p, n) in pts.iter().zip(out.normals().unwrap()) {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
        let align = (p[0] * n[0] + p[1] * n[1] + p[2] * n[2]).abs();
        assert!(align >= 0.95, "alignment {align} at {p:?}");
    }
}

#[test]
fn translation_and_rotation_equivariance() {
    let mut r = rng(21);
    let pts: Vec<_> = uniform_points(&mut r, 400, 10.0)
        .into_iter()
        .map(|p| [p[0], p[1], 0.3 * (p[0] * 0.4).sin() + 0.01 * p[2]])
        .collect();
    let base = estimate_normals(&cloud("s", pts.clone()), 12).unwrap();
    let base_n = base.normals().unwrap();

    for trial in 0..5 {
        let rot = rotation(&mut r);
        let shift = [0; 3].map(|_| (trial as f64 + 1.0) * 37.0);
        let moved: Vec<_> = pts
            .iter()
            .map(|p| {
                let q = apply(&rot, p);
                [q[0] + shift[0], q[1] + shift[1], q[2] + shift[2]]
            })
            .collect();
        let out = estimate_normals(&cloud("m", moved), 12).unwrap();
        for (n0, n1) in base_n.iter().zip(out.normals().unwrap()) {
            let rn = apply(&rot, n0);
            let plus = (0..3).map(|a| (rn[a] - n1[a]).abs()).fold(0.0, f64::max);
            let minus = (0..3).map(|a| (rn[a] + n1[a]).abs()).fold(0.0, f64::max);
            assert!(plus.min(minus) <= 1e-6, "{plus} {minus}");
        }
    }
}

#[test]
fn deterministic_for_fixed_input() {
    let mut r = rng(22);
    let c = cloud("d", uniform_points(&mut r, 300, 1.0));
    assert_eq!(estimate_normals(&c, 9).unwrap(), estimate_normals(&c, 9).unwrap());
}
