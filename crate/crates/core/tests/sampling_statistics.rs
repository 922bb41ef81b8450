//! Statistical checks on the geometry generators with large draw counts.

use irgm::geometry::{
    draw_random_field, generate, generate_with, FieldDistribution, GeneratorOptions, ShellSampling,
};
use irgm::rng::rng_from_seed;
use irgm::units::m_to_nm;
use irgm::{PhysicalParams, Picture};

fn params(n: usize) -> PhysicalParams {
    PhysicalParams {
        n_defects: n,
        ..Default::default()
    }
}

#[test]
fn gaussian_field_component_std() {
    let p = params(1);
    let mut rng = rng_from_seed(2024);
    let draws = 1_000_000;
    let mut sum = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    for _ in 0..draws {
        let e = draw_random_field(&p, FieldDistribution::Gaussian, &mut rng);
        for c in 0..3 {
            sum[c] += e[c];
            sq[c] += e[c] * e[c];
        }
    }
    for c in 0..3 {
        let mean = sum[c] / draws as f64;
        let std = (sq[c] / draws as f64 - mean * mean).sqrt();
        assert!(
            (std / p.delta_e0 - 1.0).abs() < 0.01,
            "component {c}: std {std}"
        );
        // Standard error of the mean is 10 V/m.
        assert!(mean.abs() < 50.0, "component {c}: mean {mean}");
    }
}

#[test]
fn uniform_ball_matches_per_component_variance() {
    let p = params(1);
    let mut rng = rng_from_seed(5);
    let draws = 400_000;
    let radius = 5f64.sqrt() * p.delta_e0;
    let mut sq = 0.0;
    for _ in 0..draws {
        let e = draw_random_field(&p, FieldDistribution::UniformBall, &mut rng);
        assert!(e.norm() <= radius * (1.0 + 1e-12));
        sq += e.x * e.x;
    }
    let std = (sq / draws as f64).sqrt();
    assert!((std / p.delta_e0 - 1.0).abs() < 0.01, "std {std}");
}

#[test]
fn random_dipole_orientations_are_isotropic() {
    let mut mean = [0.0f64; 3];
    let mut zz = 0.0;
    let mut count = 0usize;
    for seed in 0..400 {
        let s = generate(Picture::RandomDipole, &params(50), seed).unwrap();
        for d in &s.defects {
            for c in 0..3 {
                mean[c] += d.orientation[c];
            }
            zz += d.orientation.z * d.orientation.z;
            count += 1;
        }
    }
    // Each component has variance 1/3; 20,000 draws give a standard error of 0.004.
    for m in mean {
        assert!(
            (m / count as f64).abs() < 0.02,
            "mean component {}",
            m / count as f64
        );
    }
    assert!((zz / count as f64 - 1.0 / 3.0).abs() < 0.01);
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn shell_radii(sampling: ShellSampling) -> Vec<f64> {
    let options = GeneratorOptions {
        shell_sampling: sampling,
        // Separation rejection would distort the radial law slightly.
        min_separation_nm: 0.0,
        ..Default::default()
    };
    (0..200)
        .flat_map(|seed| {
            generate_with(Picture::SphericalShell, &params(50), &options, seed)
                .unwrap()
                .defects
                .into_iter()
                .map(|d| m_to_nm(d.position.norm()))
        })
        .collect()
}

#[test]
fn shell_radii_follow_volume_law() {
    let (a, b) = (60f64, 80f64);
    let radii = shell_radii(ShellSampling::Volume);
    let n = radii.len() as f64;
    let d = ks_distance(radii.clone(), |r| {
        (r.powi(3) - a.powi(3)) / (b.powi(3) - a.powi(3))
    });
    // 1% critical value is 1.63/sqrt(n).
    assert!(d < 1.63 / n.sqrt(), "KS distance {d}");
    let d_uniform = ks_distance(radii, |r| (r - a) / (b - a));
    assert!(
        d_uniform > 1.63 / n.sqrt(),
        "volume law indistinguishable from uniform radius"
    );
}

#[test]
fn shell_coordinate_sampling_has_uniform_radius() {
    let radii = shell_radii(ShellSampling::Coordinate);
    let n = radii.len() as f64;
    let d = ks_distance(radii, |r| (r - 60.0) / 20.0);
    assert!(d < 1.63 / n.sqrt(), "KS distance {d}");
}

#[test]
fn trap_positions_fill_the_square_uniformly() {
    let xs: Vec<f64> = (0..200)
        .flat_map(|seed| {
            generate(Picture::Trap, &params(50), seed)
                .unwrap()
                .defects
                .into_iter()
                .map(|d| m_to_nm(d.position.x))
        })
        .collect();
    let n = xs.len() as f64;
    let d = ks_distance(xs, |x| (x + 150.0) / 300.0);
    assert!(d < 1.63 / n.sqrt(), "KS distance {d}");
}
