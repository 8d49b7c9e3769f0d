use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavprod::atoms::{atomic_decompose, validate_psi_atom};
use wavprod::divcurl::riesz_transform;
use wavprod::grid::{decode_grid, encode_grid, inner_product, integrate, GridBox, GridFunction};
use wavprod::paraproduct::paraproduct_split;
use wavprod::spaces::{bmo_wavelet_norm, luxemburg_log_norm, theta};
use wavprod::wavelet::{dwt_forward, load_filter, project, Part, WaveletCoeffs};

const FILTERS: [&str; 5] = ["haar", "db2", "db3", "db4", "db6"];

fn random_function(seed: u64, dims: usize, level: i32) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = GridBox::unit(dims);
    let n = 1usize << (level as usize * dims);
    GridFunction::new(
        domain,
        level,
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )
    .unwrap()
}

fn level_for(dims: usize) -> i32 {
    if dims == 1 {
        8
    } else {
        5
    }
}

/// `sup_J (|J|^{-1} Σ_{I ⊂ J} c_I²)^{1/2}` by looping over every dyadic cube
/// and every coefficient.
fn brute_force_bmo(c: &WaveletCoeffs) -> f64 {
    let mut best: f64 = 0.0;
    for level in c.coarse_level()..c.finest_level() {
        let n = c.cells_per_axis(level);
        for flat in 0..n.pow(c.dims() as u32) {
            let outer = c.cube(level, flat, None);
            let mut sum = 0.0;
            for (cube, v) in c.iter_nonzero() {
                if cube.label.is_some() && cube.is_inside(&outer) {
                    sum += v * v;
                }
            }
            best = best.max((sum / outer.volume()).sqrt());
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadrature_is_linear(seed in any::<u64>(), dims in 1usize..=2, a in -5.0f64..5.0, b in -5.0f64..5.0) {
        let level = level_for(dims);
        let f = random_function(seed, dims, level);
        let g = random_function(seed ^ 1, dims, level);
        let combo = f.scale(a).add(&g.scale(b)).unwrap();
        let expected = a * integrate(&f) + b * integrate(&g);
        prop_assert!((integrate(&combo) - expected).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()));
    }

    #[test]
    fn parseval(seed in any::<u64>(), dims in 1usize..=2, which in 0usize..5, coarse in 0i32..3) {
        let f = random_function(seed, dims, level_for(dims));
        let filter = load_filter(FILTERS[which]).unwrap();
        let c = dwt_forward(&f, &filter, coarse).unwrap();
        let energy = inner_product(&f, &f).unwrap();
        prop_assert!((c.energy() - energy).abs() <= 1e-10 * energy);
    }

    #[test]
    fn projections_telescope(seed in any::<u64>(), dims in 1usize..=2, which in 0usize..5, level in 0i32..4) {
        let f = random_function(seed, dims, level_for(dims));
        let filter = load_filter(FILTERS[which]).unwrap();
        let p = project(&f, &filter, level, Part::P).unwrap();
        let q = project(&f, &filter, level, Part::Q).unwrap();
        let next = project(&f, &filter, level + 1, Part::P).unwrap();
        prop_assert!(next.sub(&p.add(&q).unwrap()).unwrap().sup_norm() <= 1e-10 * f.sup_norm());
        // P_j and Q_j are orthogonal.
        prop_assert!(inner_product(&p, &q).unwrap().abs() <= 1e-10 * inner_product(&f, &f).unwrap());
    }

    #[test]
    fn split_is_exact_and_symmetric(seed in any::<u64>(), dims in 1usize..=2, which in 0usize..5, coarse in 0i32..3) {
        let level = level_for(dims);
        let f = random_function(seed, dims, level);
        let g = random_function(seed ^ 7, dims, level);
        let filter = load_filter(FILTERS[which]).unwrap();
        let fg = paraproduct_split(&f, &g, &filter, coarse, false).unwrap();
        let gf = paraproduct_split(&g, &f, &filter, coarse, false).unwrap();
        let residual = f.mul(&g).unwrap().sub(&fg.total()).unwrap().sup_norm();
        prop_assert!(residual <= 1e-10 * f.sup_norm() * g.sup_norm());
        prop_assert_eq!(fg.pi2.samples(), gf.pi1.samples());
        prop_assert_eq!(fg.pi3.samples(), gf.pi3.samples());
    }

    #[test]
    fn paraproducts_are_bilinear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let f1 = random_function(seed, 1, 8);
        let f2 = random_function(seed ^ 2, 1, 8);
        let g = random_function(seed ^ 3, 1, 8);
        let filter = load_filter("db3").unwrap();
        let combo = f1.scale(a).add(&f2.scale(b)).unwrap();
        let left = paraproduct_split(&combo, &g, &filter, 0, false).unwrap();
        let s1 = paraproduct_split(&f1, &g, &filter, 0, false).unwrap();
        let s2 = paraproduct_split(&f2, &g, &filter, 0, false).unwrap();
        let scale = 1.0 + a.abs() + b.abs();
        for (l, (x, y)) in [(&left.pi1, (&s1.pi1, &s2.pi1)), (&left.pi2, (&s1.pi2, &s2.pi2)), (&left.pi3, (&s1.pi3, &s2.pi3))] {
            let expected = x.scale(a).add(&y.scale(b)).unwrap();
            prop_assert!(l.sub(&expected).unwrap().sup_norm() <= 1e-11 * scale);
        }
    }

    #[test]
    fn riesz_is_skew_adjoint_and_contractive(seed in any::<u64>(), dims in 1usize..=2, axis in 0usize..2) {
        let axis = axis % dims;
        let level = level_for(dims);
        let f = random_function(seed, dims, level);
        let g = random_function(seed ^ 5, dims, level);
        let rf = riesz_transform(&f, axis).unwrap();
        let rg = riesz_transform(&g, axis).unwrap();
        let lhs = inner_product(&rf, &g).unwrap();
        let rhs = -inner_product(&f, &rg).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
        let nf = inner_product(&f, &f).unwrap().sqrt();
        prop_assert!(inner_product(&rf, &rf).unwrap().sqrt() <= nf + 1e-12);
    }

    #[test]
    fn riesz_squares_sum_to_minus_identity(seed in any::<u64>()) {
        // Odd symbols vanish on the Nyquist bin, so the identity holds for
        // trigonometric polynomials below it.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes: Vec<(f64, f64, f64, f64)> = (0..8)
            .map(|_| (rng.gen_range(-15i32..=15) as f64, rng.gen_range(-15i32..=15) as f64, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.3)))
            .collect();
        let f = GridFunction::from_fn(GridBox::unit(2), 5, |x| {
            modes.iter().map(|&(k1, k2, a, p)| a * (2.0 * std::f64::consts::PI * (k1 * x[0] + k2 * x[1]) + p).cos()).sum::<f64>() + 0.3
        }).unwrap();
        let mean = integrate(&f);
        let mut total = GridFunction::zeros(f.domain().clone(), 5).unwrap();
        for axis in 0..2 {
            let r = riesz_transform(&f, axis).unwrap();
            total = total.add(&riesz_transform(&r, axis).unwrap()).unwrap();
        }
        let expected = f.map(|v| -(v - mean));
        prop_assert!(total.sub(&expected).unwrap().sup_norm() <= 1e-10);
    }

    #[test]
    fn luxemburg_is_homogeneous_and_monotone(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let f = random_function(seed, 1, 8).scale(scale);
        let n = luxemburg_log_norm(&f).unwrap();
        let n2 = luxemburg_log_norm(&f.scale(2.0)).unwrap();
        prop_assert!((n2 - 2.0 * n).abs() <= 1e-8 * n2);
        let bigger = f.map(|v| v.abs() + 0.1);
        prop_assert!(luxemburg_log_norm(&bigger).unwrap() >= n * (1.0 - 1e-12));
    }

    #[test]
    fn theta_is_increasing(r in 0.0f64..100.0, t in 0.0f64..1e6, dt in 1e-6f64..10.0) {
        prop_assert!(theta(&[r], t + dt).unwrap() > theta(&[r], t).unwrap());
    }

    #[test]
    fn grid_files_round_trip(seed in any::<u64>(), dims in 1usize..=2) {
        let f = random_function(seed, dims, level_for(dims));
        let back = decode_grid(&encode_grid(&f)).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn bmo_norm_matches_brute_force(seed in any::<u64>(), dims in 1usize..=2) {
        let level = if dims == 1 { 7 } else { 4 };
        let f = random_function(seed, dims, level);
        let c = dwt_forward(&f, &load_filter("db2").unwrap(), 0).unwrap();
        let fast = bmo_wavelet_norm(&c);
        let slow = brute_force_bmo(&c);
        prop_assert!((fast - slow).abs() <= 1e-12 * slow);
    }

    #[test]
    fn atomic_decomposition_reconstructs(seed in any::<u64>(), dims in 1usize..=2) {
        let f = random_function(seed, dims, level_for(dims));
        let mut c = dwt_forward(&f, &load_filter("db3").unwrap(), 0).unwrap();
        c.clear_scaling();
        let d = atomic_decompose(&c).unwrap();
        let back = d.reconstruct(&c).unwrap();
        let diff = back.axpby(1.0, &c, -1.0).unwrap();
        prop_assert!(diff.energy().sqrt() <= 1e-12 * c.energy().sqrt());
        for term in &d.terms {
            prop_assert!(validate_psi_atom(term.atom.coeffs(), term.atom.cube()).is_ok());
        }
    }
}
