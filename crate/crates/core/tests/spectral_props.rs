use frechet_flow::spectral::{read_field, write_field};
use frechet_flow::{make_grid, FrequencyGrid, SpectralField};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(seed: u64, grid: FrequencyGrid) -> SpectralField {
    SpectralField::random(grid, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn small_grid() -> FrequencyGrid {
    make_grid(1, 4, 0.125).unwrap()
}

proptest! {
    #[test]
    fn profile_is_nondecreasing(seed in any::<u64>()) {
        prop_assert!(field(seed, small_grid()).seminorm_profile().is_nondecreasing());
    }

    #[test]
    fn triangle_and_homogeneity(a in any::<u64>(), b in any::<u64>(), re in -5.0..5.0f64, im in -5.0..5.0f64) {
        let g = small_grid();
        let (u, v) = (field(a, g), field(b, g));
        let c = Complex64::new(re, im);
        for j in 1..=g.radius() {
            let sum = u.add(&v).unwrap().seminorm(j).unwrap();
            prop_assert!(sum <= u.seminorm(j).unwrap() + v.seminorm(j).unwrap() + 1e-12);
            let scaled = u.scale(c).seminorm(j).unwrap();
            prop_assert!((scaled - c.norm() * u.seminorm(j).unwrap()).abs() <= 1e-12 * (1.0 + scaled));
        }
    }

    #[test]
    fn metric_is_a_metric(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let g = small_grid();
        let (u, v, w) = (field(a, g), field(b, g), field(c, g));
        let duv = u.metric(&v).unwrap();
        prop_assert_eq!(duv, v.metric(&u).unwrap());
        prop_assert!(duv <= u.metric(&w).unwrap() + w.metric(&v).unwrap() + 1e-15);
        prop_assert!(duv < 1.0);
        prop_assert_eq!(u.metric(&u).unwrap(), 0.0);
    }

    #[test]
    fn quotient_norm_matches_seminorm(seed in any::<u64>(), j in 1u32..=4) {
        let u = field(seed, small_grid());
        let q = u.project(j).unwrap();
        prop_assert_eq!(q.norm(), u.seminorm(j).unwrap());
        prop_assert_eq!(q.zero_extend().seminorm(j).unwrap(), q.norm());
        if j > 1 {
            prop_assert!(q.restrict(j - 1).unwrap().bitwise_eq(&u.project(j - 1).unwrap()));
        }
    }

    #[test]
    fn binary_round_trip(seed in any::<u64>()) {
        let u = field(seed, make_grid(2, 2, 0.5).unwrap());
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        prop_assert_eq!(read_field(&buf[..]).unwrap(), u);
    }
}

#[test]
fn quadrature_error_halves() {
    for j in 1..=8u32 {
        let err = |inv_h: u32| {
            let g = FrequencyGrid::new(1, 8, inv_h).unwrap();
            (SpectralField::ones(g).seminorm(j).unwrap().powi(2) - 2.0 * j as f64).abs()
        };
        let ratio = err(32) / err(64);
        assert!((ratio - 2.0).abs() < 1e-9, "j={j} ratio={ratio}");
    }
}

#[test]
fn two_dim_ball_area() {
    // p_j(1)² approximates the disk area πj² on a fine grid
    let g = FrequencyGrid::new(2, 4, 64).unwrap();
    let p = SpectralField::ones(g).seminorm(4).unwrap().powi(2);
    assert!((p - std::f64::consts::PI * 16.0).abs() < 0.1);
}
