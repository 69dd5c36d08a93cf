//! Procedural stand-in for a textured city surface model.
//!
//! The scene is a terrain heightfield (a flat half and a sloped half, both
//! with gentle undulation) carrying axis-aligned box buildings. Every
//! surface is sampled as a regular lattice of colored points with spacing
//! `grid_spacing` in each surface direction.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SynthError};

#[derive(Clone, Debug, PartialEq)]
pub struct SceneConfig {
    pub extent_x: f64,
    pub extent_y: f64,
    pub grid_spacing: f64,
    pub base_elevation: f64,
    /// Rise per meter east of the scene's middle.
    pub slope: f64,
    pub undulation: f64,
    pub buildings: usize,
    pub building_height: (f64, f64),
    pub building_size: (f64, f64),
    pub seed: u64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            extent_x: 96.0,
            extent_y: 44.0,
            grid_spacing: 0.05,
            base_elevation: 0.0,
            slope: 0.04,
            undulation: 0.5,
            buildings: 14,
            building_height: (2.0, 8.0),
            building_size: (4.0, 12.0),
            seed: 7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Building {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    pub base: f64,
    pub top: f64,
}

impl Building {
    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenePoint {
    pub position: Vector3<f64>,
    pub color: [u8; 3],
}

#[derive(Clone, Debug)]
pub struct SceneModel {
    config: SceneConfig,
    nx: usize,
    ny: usize,
    heights: Vec<f64>,
    buildings: Vec<Building>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn lattice(ix: i64, iy: i64, salt: u64) -> f64 {
    let h = splitmix(splitmix(ix as u64 ^ salt.rotate_left(17)) ^ (iy as u64).wrapping_mul(0x2545_f491_4f6c_dd1d));
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Bilinearly interpolated lattice noise in `[0, 1)`.
fn value_noise(u: f64, v: f64, cell: f64, salt: u64) -> f64 {
    let (su, sv) = (u / cell, v / cell);
    let (iu, iv) = (su.floor(), sv.floor());
    let (fu, fv) = (su - iu, sv - iv);
    let (iu, iv) = (iu as i64, iv as i64);
    let a = lattice(iu, iv, salt);
    let b = lattice(iu + 1, iv, salt);
    let c = lattice(iu, iv + 1, salt);
    let d = lattice(iu + 1, iv + 1, salt);
    let top = a + (b - a) * fu;
    let bottom = c + (d - c) * fu;
    top + (bottom - top) * fv
}

fn shade(base: [f64; 3], u: f64, v: f64, salt: u64) -> [u8; 3] {
    let fine = value_noise(u, v, 0.25, salt);
    let coarse = value_noise(u, v, 1.5, salt ^ 0x5555);
    let speck = lattice((u / 0.1).floor() as i64, (v / 0.1).floor() as i64, salt ^ 0xaaaa);
    let k = 0.35 + 0.4 * fine + 0.15 * coarse + 0.1 * speck;
    base.map(|c| (c * k).round().clamp(0.0, 255.0) as u8)
}

const GROUND: [f64; 3] = [150.0, 170.0, 110.0];
const WALL: [f64; 3] = [190.0, 180.0, 170.0];

impl SceneModel {
    pub fn config(&self) -> &SceneConfig {
        &self.config
    }

    pub fn buildings(&self) -> &[Building] {
        &self.buildings
    }

    pub fn spacing(&self) -> f64 {
        self.config.grid_spacing
    }

    /// Terrain elevation at a lattice node.
    fn node_height(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.nx + i]
    }

    fn analytic_height(config: &SceneConfig, wave: (f64, f64, f64, f64), x: f64, y: f64) -> f64 {
        let (kx, ky, px, py) = wave;
        let ramp = config.slope * (x - config.extent_x / 2.0).max(0.0);
        config.base_elevation + ramp + config.undulation * (kx * x + px).sin() * (ky * y + py).sin()
    }

    /// Terrain elevation (without buildings) at any location, by bilinear interpolation.
    pub fn terrain_height(&self, x: f64, y: f64) -> f64 {
        let g = self.config.grid_spacing;
        let fx = (x / g).clamp(0.0, (self.nx - 1) as f64);
        let fy = (y / g).clamp(0.0, (self.ny - 1) as f64);
        let (i, j) = ((fx.floor() as usize).min(self.nx - 2), (fy.floor() as usize).min(self.ny - 2));
        let (ax, ay) = (fx - i as f64, fy - j as f64);
        let h00 = self.node_height(i, j);
        let h10 = self.node_height(i + 1, j);
        let h01 = self.node_height(i, j + 1);
        let h11 = self.node_height(i + 1, j + 1);
        (h00 * (1.0 - ax) + h10 * ax) * (1.0 - ay) + (h01 * (1.0 - ax) + h11 * ax) * ay
    }

    /// Highest surface elevation (terrain or roof).
    pub fn max_elevation(&self) -> f64 {
        let terrain = self.heights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.buildings.iter().map(|b| b.top).fold(terrain, f64::max)
    }

    pub fn min_elevation(&self) -> f64 {
        self.heights.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn mean_ground(&self) -> f64 {
        self.heights.iter().sum::<f64>() / self.heights.len() as f64
    }

    /// Visits every surface point whose horizontal position lies in the box.
    pub fn for_each_point_in(&self, x_range: (f64, f64), y_range: (f64, f64), mut f: impl FnMut(ScenePoint)) {
        let g = self.config.grid_spacing;
        let salt = splitmix(self.config.seed);
        let i_lo = (x_range.0 / g).floor().max(0.0) as usize;
        let i_hi = ((x_range.1 / g).ceil().max(0.0) as usize).min(self.nx - 1);
        let j_lo = (y_range.0 / g).floor().max(0.0) as usize;
        let j_hi = ((y_range.1 / g).ceil().max(0.0) as usize).min(self.ny - 1);
        let near: Vec<&Building> = self
            .buildings
            .iter()
            .filter(|b| b.x1 >= x_range.0 && b.x0 <= x_range.1 && b.y1 >= y_range.0 && b.y0 <= y_range.1)
            .collect();
        if i_lo <= i_hi && j_lo <= j_hi {
            for j in j_lo..=j_hi {
                let y = j as f64 * g;
                for i in i_lo..=i_hi {
                    let x = i as f64 * g;
                    if near.iter().any(|b| b.contains(x, y)) {
                        continue;
                    }
                    let z = self.node_height(i, j);
                    f(ScenePoint { position: Vector3::new(x, y, z), color: shade(GROUND, x, y, salt) });
                }
            }
        }
        for (bi, b) in self.buildings.iter().enumerate() {
            if !near.iter().any(|n| std::ptr::eq(*n, b)) {
                continue;
            }
            self.building_points(bi, b, salt, &mut f);
        }
    }

    fn building_points(&self, bi: usize, b: &Building, salt: u64, f: &mut impl FnMut(ScenePoint)) {
        let g = self.config.grid_spacing;
        let roof_salt = splitmix(salt ^ (bi as u64 + 1));
        let tint = lattice(bi as i64, 3, salt);
        let roof = [120.0 + 110.0 * tint, 90.0 + 60.0 * (1.0 - tint), 80.0 + 50.0 * lattice(bi as i64, 5, salt)];
        let steps = |lo: f64, hi: f64| -> Vec<f64> {
            let n = ((hi - lo) / g).round() as usize;
            (0..=n).map(|k| lo + k as f64 * g).collect()
        };
        let xs = steps(b.x0, b.x1);
        let ys = steps(b.y0, b.y1);
        for &y in &ys {
            for &x in &xs {
                f(ScenePoint { position: Vector3::new(x, y, b.top), color: shade(roof, x, y, roof_salt) });
            }
        }
        let wall_salt = splitmix(roof_salt);
        let mut wall = |x: f64, y: f64, along: f64| {
            let ground = self.terrain_height(x, y);
            let mut z = b.top - g;
            while z > ground - g {
                f(ScenePoint { position: Vector3::new(x, y, z.max(ground)), color: shade(WALL, along, z, wall_salt) });
                z -= g;
            }
        };
        for &x in &xs {
            wall(x, b.y0, x);
            wall(x, b.y1, x + 1000.0);
        }
        for &y in &ys[1..ys.len() - 1] {
            wall(b.x0, y, y + 2000.0);
            wall(b.x1, y, y + 3000.0);
        }
    }

    /// All surface points. Intended for small scenes and tests.
    pub fn points(&self) -> Vec<ScenePoint> {
        let mut out = Vec::new();
        self.for_each_point_in((0.0, self.config.extent_x), (0.0, self.config.extent_y), |p| out.push(p));
        out
    }
}

/// Builds the deterministic scene described by `config`.
pub fn build_scene(config: &SceneConfig) -> Result<SceneModel> {
    let g = config.grid_spacing;
    if !(g > 0.0) || !(config.extent_x > 2.0 * g) || !(config.extent_y > 2.0 * g) {
        return Err(SynthError::Contract(format!(
            "scene extents {}x{} m with grid {g} m are degenerate",
            config.extent_x, config.extent_y
        )));
    }
    let (h_lo, h_hi) = config.building_height;
    let (s_lo, s_hi) = config.building_size;
    if config.buildings > 0 && !(h_lo > 0.0 && h_hi >= h_lo && s_lo > 2.0 * g && s_hi >= s_lo) {
        return Err(SynthError::Contract("building statistics must be positive and ordered".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let wave = (
        2.0 * std::f64::consts::PI / rng.gen_range(20.0..40.0),
        2.0 * std::f64::consts::PI / rng.gen_range(15.0..30.0),
        rng.gen_range(0.0..std::f64::consts::TAU),
        rng.gen_range(0.0..std::f64::consts::TAU),
    );
    let nx = (config.extent_x / g).floor() as usize + 1;
    let ny = (config.extent_y / g).floor() as usize + 1;
    let mut heights = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            heights.push(SceneModel::analytic_height(config, wave, i as f64 * g, j as f64 * g));
        }
    }
    let mut scene = SceneModel { config: config.clone(), nx, ny, heights, buildings: Vec::new() };

    let snap = |v: f64| (v / g).round() * g;
    let mut attempts = 0;
    while scene.buildings.len() < config.buildings && attempts < config.buildings * 200 {
        attempts += 1;
        let w = snap(rng.gen_range(s_lo..=s_hi));
        let d = snap(rng.gen_range(s_lo..=s_hi));
        let height = rng.gen_range(h_lo..=h_hi);
        if w + 2.0 * g >= config.extent_x || d + 2.0 * g >= config.extent_y {
            continue;
        }
        let x0 = snap(rng.gen_range(g..config.extent_x - w - g));
        let y0 = snap(rng.gen_range(g..config.extent_y - d - g));
        let (x1, y1) = (x0 + w, y0 + d);
        let gap = 2.0;
        if scene
            .buildings
            .iter()
            .any(|b| x0 < b.x1 + gap && x1 > b.x0 - gap && y0 < b.y1 + gap && y1 > b.y0 - gap)
        {
            continue;
        }
        let corners = [(x0, y0), (x1, y0), (x0, y1), (x1, y1), ((x0 + x1) / 2.0, (y0 + y1) / 2.0)];
        let base = corners.iter().map(|&(x, y)| scene.terrain_height(x, y)).fold(f64::INFINITY, f64::min);
        scene.buildings.push(Building { x0, y0, x1, y1, base, top: base + height });
    }
    Ok(scene)
}
