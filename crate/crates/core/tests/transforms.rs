use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turbodetect::field::ComplexVolume;
use turbodetect::transforms::{wavelet_forward3, wavelet_inverse3, CurveletConfig, CurveletSystem};

fn random_volume(nx: usize, ny: usize, nt: usize, seed: u64) -> ComplexVolume {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ComplexVolume::from_fn(nx, ny, nt, |_, _, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

fn rel_err(a: &ComplexVolume, b: &ComplexVolume) -> f64 {
    (a - b).norm_l2() / b.norm_l2()
}

fn system_32() -> CurveletSystem {
    CurveletSystem::new(32, 32, 32, CurveletConfig::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curvelet_round_trip_and_tightness(seed in any::<u64>()) {
        let sys = system_32();
        let x = random_volume(32, 32, 32, seed);
        let k = sys.forward(&x).unwrap();
        prop_assert!(rel_err(&sys.inverse(&k).unwrap(), &x) <= 1e-8);
        prop_assert!((k.norm_l2() - x.norm_l2()).abs() / x.norm_l2() <= 1e-8);
    }

    #[test]
    fn curvelet_forward_is_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let sys = system_32();
        let x = random_volume(32, 32, 32, seed);
        let y = random_volume(32, 32, 32, seed.wrapping_add(1));
        let combo = &x.scale(a) + &y.scale(b);
        let lhs = sys.forward(&combo).unwrap();
        let (kx, ky) = (sys.forward(&x).unwrap(), sys.forward(&y).unwrap());
        for ((l, p), q) in lhs.wedges().iter().zip(kx.wedges()).zip(ky.wedges()) {
            for ((zl, zp), zq) in l.data.iter().zip(&p.data).zip(&q.data) {
                prop_assert!((zl - (zp * a + zq * b)).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn wavelet_round_trip_and_parseval(seed in any::<u64>(), levels in 1usize..4) {
        let x = random_volume(16, 16, 8, seed);
        let k = wavelet_forward3(&x, levels).unwrap();
        prop_assert!(rel_err(&wavelet_inverse3(&k).unwrap(), &x) <= 1e-10);
        prop_assert!((k.data().norm_l2() - x.norm_l2()).abs() / x.norm_l2() <= 1e-10);
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Shifting along `t` by `nt / gcd(nt, m)` samples, where `m` is a wedge's
/// decimated length in `t`, is a cyclic shift on that wedge's grid, so the
/// multiset of magnitudes is unchanged.
#[test]
fn time_shift_permutes_wedge_coefficients() {
    let sys = system_32();
    let x = random_volume(32, 32, 32, 5);
    let k = sys.forward(&x).unwrap();
    let mut checked = 0;
    for (w, wc) in k.wedges().iter().enumerate() {
        let m = wc.dims[2];
        let s = 32 / gcd(32, m);
        if s == 32 {
            continue;
        }
        let shifted = ComplexVolume::from_fn(32, 32, 32, |i, j, n| x[(i, j, (n + 32 - s) % 32)]);
        let ks = sys.forward(&shifted).unwrap();
        let sorted = |d: &[Complex64]| {
            let mut v: Vec<f64> = d.iter().map(|z| z.norm()).collect();
            v.sort_by(f64::total_cmp);
            v
        };
        for (a, b) in sorted(&wc.data).iter().zip(sorted(&ks.wedges()[w].data)) {
            assert!((a - b).abs() <= 1e-8, "wedge {w}");
        }
        checked += 1;
    }
    assert!(checked > 0);

    // A full period is the identity.
    let same = sys.forward(&ComplexVolume::from_fn(32, 32, 32, |i, j, n| x[(i, j, (n + 32) % 32)])).unwrap();
    assert_eq!(same, k);
}
