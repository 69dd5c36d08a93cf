use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skysweep_planesweep::CameraModel;
use skysweep_synthgen::{
    build_scene, disparity_from_depth, generate, plan_flight, read_dataset, write_dataset, FlightConfig, GenConfig,
    SceneConfig, SynthError, ViewRecord,
};

fn small_config() -> GenConfig {
    GenConfig {
        scene: SceneConfig {
            extent_x: 30.0,
            extent_y: 16.0,
            buildings: 4,
            building_size: (2.5, 5.0),
            building_height: (0.5, 1.5),
            slope: 0.01,
            undulation: 0.2,
            ..SceneConfig::default()
        },
        flight: FlightConfig {
            image_width: 128,
            image_height: 64,
            focal: 160.0,
            flying_height: 16.0,
            strips: 3,
            images_per_strip: 4,
            ..FlightConfig::default()
        },
        views: 5,
        tile_width: 48,
        tile_height: 24,
        interval: 0.15,
    }
}

/// Fraction of co-visible pixels of `a` whose depth, transferred into `b`,
/// agrees with `b`'s own depth within `tol`.
fn reprojection_agreement(a: &ViewRecord, b: &ViewRecord, window: f64, tol: f64) -> (usize, usize) {
    let (mut covisible, mut agree) = (0, 0);
    let (w, h) = (a.camera.width(), a.camera.height());
    for y in 0..h {
        for x in 0..w {
            let Some(d) = a.depth.get(x, y) else { continue };
            let p = a.camera.unproject(x as f64, y as f64, d).unwrap();
            let Ok((u, v, z)) = b.camera.project(&p) else { continue };
            let (ui, vi) = (u.round(), v.round());
            if ui < 0.0 || vi < 0.0 || ui >= w as f64 || vi >= h as f64 {
                continue;
            }
            let Some(db) = b.depth.get(ui as usize, vi as usize) else { continue };
            if (z - db).abs() <= window {
                covisible += 1;
                if (z - db).abs() <= tol {
                    agree += 1;
                }
            }
        }
    }
    (covisible, agree)
}

#[test]
fn heading_overlap_coverage_count() {
    let scene = build_scene(&SceneConfig { buildings: 0, slope: 0.0, undulation: 0.0, ..SceneConfig::default() }).unwrap();
    let cfg = FlightConfig { strips: 1, images_per_strip: 24, ..FlightConfig::default() };
    let scene = build_scene(&SceneConfig { extent_x: 200.0, ..scene.config().clone() }).unwrap();
    let plan = plan_flight(&scene, &cfg).unwrap();
    let first = plan.camera(0, 0).center().x;
    let last = plan.camera(0, 23).center().x;
    let footprint = cfg.image_width as f64 * cfg.flying_height / cfg.focal;
    let y = plan.camera(0, 0).center().y;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        // Interior: far enough from both strip ends to be reachable by 10 exposures.
        let x = rng.gen_range(first + footprint / 2.0..last - footprint / 2.0);
        let p = Vector3::new(x, y + rng.gen_range(-2.0..2.0), 0.0);
        let seen: Vec<usize> = (0..24)
            .filter(|&i| {
                let cam = plan.camera(0, i);
                let (u, v, _) = cam.project(&p).unwrap();
                cam.contains(u, v)
            })
            .collect();
        assert!(seen.len() >= 9, "point {x} seen by {seen:?}");
        assert!(seen.windows(2).all(|w| w[1] == w[0] + 1));
    }
}

#[test]
fn strip_neighbours_are_rectified() {
    let scene = build_scene(&SceneConfig::default()).unwrap();
    let plan = plan_flight(&scene, &FlightConfig::default()).unwrap();
    for s in 0..plan.strips() {
        for i in 0..plan.images_per_strip() - 1 {
            let (a, b) = (plan.camera(s, i), plan.camera(s, i + 1));
            assert_eq!(a.rotation(), b.rotation());
            let base = a.rotation() * (b.center() - a.center());
            assert!(base.x > 0.0 && base.y == 0.0 && base.z == 0.0);
        }
    }
}

#[test]
fn disparity_matches_projection() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let f = rng.gen_range(300.0..2000.0);
        let c = Vector3::new(rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0), rng.gen_range(50.0..500.0));
        let left = CameraModel::nadir(f, 32, 24, c).unwrap();
        let right = CameraModel::nadir(f, 32, 24, c + Vector3::new(rng.gen_range(1.0..30.0), 0.0, 0.0)).unwrap();
        let mut depth = skysweep_synthgen::DepthMap::invalid(32, 24);
        for k in 0..depth.depth.len() {
            depth.depth[k] = rng.gen_range(10.0..c.z);
            depth.valid[k] = true;
        }
        let disp = disparity_from_depth(&depth, &left, &right).unwrap();
        for y in 0..24 {
            for x in 0..32 {
                let p = left.unproject(x as f64, y as f64, depth.get(x, y).unwrap()).unwrap();
                let (u, v, _) = right.project(&p).unwrap();
                assert!((x as f64 - disp.get(x, y).unwrap() - u).abs() < 1e-3);
                assert!((v - y as f64).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn generated_views_are_complete_and_consistent() {
    let cfg = small_config();
    let g = generate(&cfg).unwrap();
    assert_eq!(g.views.len(), 12);
    assert_eq!(g.units.len(), 2);
    for v in &g.views {
        let frac = v.depth.valid_count() as f64 / v.depth.depth.len() as f64;
        assert!(frac >= 0.999, "view {}/{} completeness {frac}", v.strip, v.index);
    }
    let spacing = cfg.scene.grid_spacing;
    for unit in &g.units {
        for (id, other) in unit.views.iter().enumerate().filter(|(id, _)| *id != 1) {
            let (n, ok) = reprojection_agreement(unit.reference(), other, cfg.interval, 2.0 * spacing);
            assert!(n > 1000);
            let frac = ok as f64 / n as f64;
            assert!(frac >= 0.99, "unit {} view {id}: {frac}", unit.name());
        }
    }
    assert!(!g.subunits.is_empty());
    for s in &g.subunits {
        for v in &s.views {
            for (&d, &ok) in v.depth.depth.iter().zip(&v.depth.valid) {
                if ok {
                    assert!(d >= v.plan.d_min() && d <= v.plan.d_max());
                }
            }
        }
    }
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

#[test]
fn round_trip_and_determinism() {
    let cfg = GenConfig { views: 3, ..small_config() };
    let a = generate(&cfg).unwrap();
    let b = generate(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (ra, rb) = (dir.path().join("a"), dir.path().join("b"));
    write_dataset(&a.subunits, 3, &ra).unwrap();
    write_dataset(&b.subunits, 3, &rb).unwrap();
    let (ta, tb) = (tree(&ra), tree(&rb));
    assert_eq!(ta, tb);
    assert!(ta.keys().any(|k| k.starts_with("images/002_2/0/000")));

    let back = read_dataset(&ra).unwrap();
    assert_eq!(back.views, 3);
    assert_eq!(back.subunits.len(), a.subunits.len());
    for (x, y) in a.subunits.iter().zip(&back.subunits) {
        assert_eq!((x.strip, x.index, x.tile, x.split), (y.strip, y.index, y.tile, y.split));
        for (vx, vy) in x.views.iter().zip(&y.views) {
            assert_eq!(vx.image, vy.image);
            assert_eq!(vx.camera, vy.camera);
            assert_eq!(vx.plan, vy.plan);
            assert_eq!(vx.filled, vy.filled);
            assert_eq!(vx.depth.valid, vy.depth.valid);
            for (p, q) in vx.depth.depth.iter().zip(&vy.depth.depth) {
                assert!((p - q).abs() <= 0.005 + 1e-9);
            }
        }
    }
}

#[test]
fn malformed_layout_names_the_file() {
    let cfg = GenConfig { views: 3, ..small_config() };
    let g = generate(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_dataset(&g.subunits[..1], 3, dir.path()).unwrap();
    let name = g.subunits[0].unit_name();
    let cam = dir.path().join("cams").join(&name).join("2").join("000.txt");
    fs::write(&cam, "garbage\n").unwrap();
    match read_dataset(dir.path()) {
        Err(SynthError::Format { path, .. }) => assert_eq!(path, cam),
        other => panic!("unexpected {other:?}"),
    }
    fs::remove_file(&cam).unwrap();
    match read_dataset(dir.path()) {
        Err(SynthError::Io { path, .. }) => assert_eq!(path, cam),
        other => panic!("unexpected {other:?}"),
    }
}
