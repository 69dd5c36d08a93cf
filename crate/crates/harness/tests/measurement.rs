use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skysweep_harness::measure_run;
use skysweep_planesweep::{CameraModel, DepthPlan};
use skysweep_rednet::{NetConfig, RedNet, UnitInput};

fn input(h: usize, w: usize) -> UnitInput<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let cams: Vec<CameraModel> = (0..3)
        .map(|i| CameraModel::nadir(2.0 * w as f64, w, h, Vector3::new(i as f64, 0.0, 50.0)).unwrap())
        .collect();
    let rgb: Vec<Vec<u8>> = (0..3).map(|_| (0..h * w * 3).map(|_| rng.gen()).collect()).collect();
    let pairs: Vec<(&[u8], &CameraModel)> = rgb.iter().map(|r| r.as_slice()).zip(&cams).collect();
    UnitInput::from_rgb(&pairs, 1).unwrap()
}

fn plan(d: usize) -> DepthPlan {
    DepthPlan::new(45.0, 10.0 / d as f64, d).unwrap()
}

#[test]
fn peak_is_flat_in_depth_samples_and_repeatable() {
    let (net, store) = RedNet::init::<f32>(NetConfig::default(), 2).unwrap();
    let x = input(64, 128);
    let small = measure_run(&net, &store, &x, &plan(16)).unwrap();
    let large = measure_run(&net, &store, &x, &plan(64)).unwrap();
    let again = measure_run(&net, &store, &x, &plan(16)).unwrap();
    assert_eq!(small.peak_bytes, again.peak_bytes);
    let rel = (large.peak_bytes as f64 - small.peak_bytes as f64).abs() / small.peak_bytes as f64;
    assert!(rel < 0.05, "{} vs {} bytes", small.peak_bytes, large.peak_bytes);
    assert_eq!(large.volume.depth, 64);
}

#[test]
fn peak_grows_with_image_area() {
    let (net, store) = RedNet::init::<f32>(NetConfig::default(), 2).unwrap();
    let base = measure_run(&net, &store, &input(64, 128), &plan(8)).unwrap().peak_bytes as f64;
    let double = measure_run(&net, &store, &input(128, 256), &plan(8)).unwrap().peak_bytes as f64;
    let ratio = double / base;
    assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
}
