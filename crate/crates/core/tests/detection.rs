use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use turbodetect::detection::{
    background_subtraction_baseline, detect_by_magnitude, evaluate_masks, threshold_magnitude, BaselineParams,
    DetectionParams, MaskVolume,
};
use turbodetect::field::{magnitude, ScalarVolume, VectorField3};
use turbodetect::synth::{synth_vector_field, SynthSpec, TurbulenceSpec};

#[test]
fn unit_tube_is_detected_exactly() {
    let mut spec = SynthSpec::default();
    spec.turbulence = TurbulenceSpec { sigma_w: 0.0, ..spec.turbulence };
    let (f, truth) = synth_vector_field(&spec).unwrap();
    let mag = magnitude(&f);
    let unit =
        VectorField3::new(mag.map(|&m| if m > 0.0 { 1.0 } else { 0.0 }), ScalarVolume::zeros(64, 64, 32)).unwrap();
    let p = DetectionParams { threshold: 0.5, ..Default::default() };
    assert_eq!(detect_by_magnitude(&unit, &p).unwrap(), truth.masks);
}

#[test]
fn noise_below_threshold_gives_empty_mask() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let v1 = ScalarVolume::from_fn(32, 32, 8, |_, _, _| rng.random_range(-0.3..0.3));
    let v2 = ScalarVolume::from_fn(32, 32, 8, |_, _, _| rng.random_range(-0.3..0.3));
    let f = VectorField3::new(v1, v2).unwrap();
    let max = magnitude(&f).max_abs();
    assert!(max < 0.5);
    let m = detect_by_magnitude(&f, &DetectionParams { threshold: 0.5, min_component_size: 1, ..Default::default() })
        .unwrap();
    assert!(m.as_slice().iter().all(|&b| !b));
}

fn bright_square_sequence(nt: usize) -> (ScalarVolume, MaskVolume) {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let bg: Vec<f64> = (0..64 * 64).map(|_| rng.random_range(0.2..0.5)).collect();
    let origin = |n: usize| (4 + n, 20 + n / 2);
    let inside = |i: usize, j: usize, n: usize| {
        let (x, y) = origin(n);
        (x..x + 8).contains(&i) && (y..y + 8).contains(&j)
    };
    let frames = ScalarVolume::from_fn(64, 64, nt, |i, j, n| if inside(i, j, n) { 0.95 } else { bg[j * 64 + i] });
    let gt = MaskVolume::from_fn(64, 64, nt, inside);
    (frames, gt)
}

#[test]
fn baseline_finds_moving_bright_square() {
    let (frames, gt) = bright_square_sequence(40);
    let m = background_subtraction_baseline(&frames, &DetectionParams::default()).unwrap();
    let r = evaluate_masks(&m, &gt).unwrap();
    for (n, f) in r.frames.iter().enumerate() {
        let iou = f.tp as f64 / (f.tp + f.fp + f.fn_) as f64;
        assert!(iou >= 0.7, "frame {n}: IoU {iou}");
    }
}

fn small_field() -> impl Strategy<Value = VectorField3> {
    (any::<u64>(), 0.1f64..3.0).prop_map(|(seed, scale)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gen = || ScalarVolume::from_fn(12, 10, 3, |_, _, _| rng.random_range(-scale..scale));
        let v1 = gen();
        let v2 = gen();
        VectorField3::new(v1, v2).unwrap()
    })
}

fn subset(a: &MaskVolume, b: &MaskVolume) -> bool {
    a.as_slice().iter().zip(b.as_slice()).all(|(&x, &y)| !x || y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn threshold_is_monotone(f in small_field(), t1 in 0.01f64..2.0, dt in 0.0f64..2.0) {
        let lo = threshold_magnitude(&f, t1);
        let hi = threshold_magnitude(&f, t1 + dt);
        prop_assert!(subset(&hi, &lo));
    }

    #[test]
    fn size_filter_only_removes(f in small_field(), t in 0.05f64..2.0, min in 1usize..12) {
        let raw = threshold_magnitude(&f, t);
        let p = DetectionParams { threshold: t, min_component_size: min, ..Default::default() };
        prop_assert!(subset(&detect_by_magnitude(&f, &p).unwrap(), &raw));
    }

    #[test]
    fn swapping_pred_and_truth_swaps_precision_and_recall(a in small_field(), b in small_field(), t in 0.1f64..2.0) {
        let pa = threshold_magnitude(&a, t);
        let pb = threshold_magnitude(&b, t);
        let r1 = evaluate_masks(&pa, &pb).unwrap();
        let r2 = evaluate_masks(&pb, &pa).unwrap();
        prop_assert_eq!(r1.precision, r2.recall);
        prop_assert_eq!(r1.recall, r2.precision);
        prop_assert_eq!(r1.f1, r2.f1);
        for (x, y) in r1.frames.iter().zip(&r2.frames) {
            prop_assert_eq!(x.precision, y.recall);
            prop_assert_eq!(x.recall, y.precision);
        }
        prop_assert!((0.0..=1.0).contains(&r1.f1));
    }

    #[test]
    fn baseline_ignores_constant_offset(seed in any::<u64>(), c in -8i32..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let frames = ScalarVolume::from_fn(16, 16, 7, |_, _, _| rng.random_range(0..64) as f64 / 64.0);
        // Dyadic offsets keep every difference exact.
        let shifted = frames.map(|x| x + c as f64 / 8.0);
        let p = DetectionParams {
            min_component_size: 1,
            baseline: BaselineParams { window: 5, ..Default::default() },
            ..Default::default()
        };
        prop_assert_eq!(
            background_subtraction_baseline(&frames, &p).unwrap(),
            background_subtraction_baseline(&shifted, &p).unwrap()
        );
    }
}
