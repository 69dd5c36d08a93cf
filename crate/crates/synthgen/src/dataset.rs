//! End-to-end generation and the on-disk dataset layout.
//!
//! ```text
//! root/manifest.txt
//! root/images/<unit>/<view-id>/<tile>.png
//! root/depths/<unit>/<view-id>/<tile>.png          16-bit depth
//! root/depths/<unit>/<view-id>/<tile>_filled.png   present when any pixel was hole-filled
//! root/cams/<unit>/<view-id>/<tile>.txt
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use skysweep_planesweep::{format_camera_file, parse_camera_file};

use crate::error::{Result, SynthError};
use crate::flight::{plan_flight, FlightConfig, FlightPlan};
use crate::raster::{load_depth, load_mask, load_rgb, save_depth, save_mask, save_rgb};
use crate::render::{render_view, ViewRecord};
use crate::scene::{build_scene, SceneConfig};
use crate::units::{assign_splits, crop_units, make_units, parse_unit_name, MultiViewUnit, Split, SubUnit, TileView};

pub const MANIFEST_FILE: &str = "manifest.txt";
const MANIFEST_HEADER: &str = "skysweep-manifest 1";

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub scene: SceneConfig,
    pub flight: FlightConfig,
    pub views: usize,
    pub tile_width: usize,
    pub tile_height: usize,
    /// Depth interval of the per-view plans (meters).
    pub interval: f64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            scene: SceneConfig::default(),
            flight: FlightConfig::default(),
            views: 3,
            tile_width: 256,
            tile_height: 128,
            interval: 0.15,
        }
    }
}

pub struct Generated {
    pub flight: FlightPlan,
    pub views: Vec<Arc<ViewRecord>>,
    pub units: Vec<MultiViewUnit>,
    pub subunits: Vec<SubUnit>,
}

/// Scene, flight, rendering, units, tiles and split, in that order.
pub fn generate(config: &GenConfig) -> Result<Generated> {
    let scene = build_scene(&config.scene)?;
    let flight = plan_flight(&scene, &config.flight)?;
    let ips = flight.images_per_strip();
    let views: Vec<Arc<ViewRecord>> = flight
        .cameras()
        .par_iter()
        .enumerate()
        .map(|(k, cam)| render_view(&scene, cam, k / ips, k % ips).map(Arc::new))
        .collect::<Result<_>>()?;
    let units = make_units(&views, config.views)?;
    if units.is_empty() {
        return Err(SynthError::Degenerate(format!(
            "a {}x{} flight yields no {}-view unit",
            flight.strips(),
            ips,
            config.views
        )));
    }
    let tiles: Vec<Vec<SubUnit>> = units
        .par_iter()
        .map(|u| crop_units(u, config.tile_width, config.tile_height, config.interval))
        .collect::<Result<_>>()?;
    let mut subunits: Vec<SubUnit> = tiles.into_iter().flatten().collect();
    assign_splits(&mut subunits);
    Ok(Generated { flight, views, units, subunits })
}

/// A dataset as read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub views: usize,
    pub subunits: Vec<SubUnit>,
}

impl Dataset {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &SubUnit> {
        self.subunits.iter().filter(move |s| s.split == split)
    }
}

struct TilePaths {
    image: PathBuf,
    depth: PathBuf,
    filled: PathBuf,
    camera: PathBuf,
}

fn tile_paths(root: &Path, unit: &str, view: usize, tile: usize) -> TilePaths {
    let rel = |kind: &str| root.join(kind).join(unit).join(view.to_string());
    TilePaths {
        image: rel("images").join(format!("{tile:03}.png")),
        depth: rel("depths").join(format!("{tile:03}.png")),
        filled: rel("depths").join(format!("{tile:03}_filled.png")),
        camera: rel("cams").join(format!("{tile:03}.txt")),
    }
}

fn create_parent(path: &Path) -> Result<()> {
    let dir = path.parent().expect("tile paths have parents");
    fs::create_dir_all(dir).map_err(|e| SynthError::io(dir, e))
}

/// Writes every tile plus the manifest under `root`.
pub fn write_dataset(subunits: &[SubUnit], views: usize, root: &Path) -> Result<()> {
    let mut manifest = format!("{MANIFEST_HEADER}\nviews {views}\n");
    for s in subunits {
        if s.views.len() != views {
            return Err(SynthError::Contract(format!(
                "{} tile {} has {} views, expected {views}",
                s.unit_name(),
                s.tile,
                s.views.len()
            )));
        }
        manifest.push_str(&format!("{} {:03} {}\n", s.unit_name(), s.tile, s.split.as_str()));
    }
    subunits.par_iter().try_for_each(|s| -> Result<()> {
        let name = s.unit_name();
        for (id, v) in s.views.iter().enumerate() {
            let p = tile_paths(root, &name, id, s.tile);
            for path in [&p.image, &p.depth, &p.camera] {
                create_parent(path)?;
            }
            save_rgb(&v.image, &p.image)?;
            save_depth(&v.depth, &p.depth)?;
            if v.filled.iter().any(|&f| f) {
                save_mask(&v.filled, v.depth.width, v.depth.height, &p.filled)?;
            }
            fs::write(&p.camera, format_camera_file(&v.camera, &v.plan)).map_err(|e| SynthError::io(&p.camera, e))?;
        }
        Ok(())
    })?;
    let path = root.join(MANIFEST_FILE);
    fs::create_dir_all(root).map_err(|e| SynthError::io(root, e))?;
    fs::write(&path, manifest).map_err(|e| SynthError::io(&path, e))
}

fn read_tile_view(root: &Path, unit: &str, id: usize, tile: usize) -> Result<TileView> {
    let p = tile_paths(root, unit, id, tile);
    let image = load_rgb(&p.image)?;
    let depth = load_depth(&p.depth)?;
    if (image.width, image.height) != (depth.width, depth.height) {
        return Err(SynthError::format(&p.depth, "depth and image extents differ"));
    }
    let filled = if p.filled.exists() {
        let m = load_mask(&p.filled)?;
        if m.len() != depth.depth.len() {
            return Err(SynthError::format(&p.filled, "mask extent differs from depth"));
        }
        m
    } else {
        vec![false; depth.depth.len()]
    };
    let text = fs::read_to_string(&p.camera).map_err(|e| SynthError::io(&p.camera, e))?;
    let (camera, plan) = parse_camera_file(&text).map_err(|e| SynthError::format(&p.camera, e.to_string()))?;
    if (camera.width(), camera.height()) != (depth.width, depth.height) {
        return Err(SynthError::format(&p.camera, "camera extent differs from image"));
    }
    Ok(TileView { image, depth, filled, camera, plan })
}

/// Reads a dataset written by [`write_dataset`].
pub fn read_dataset(root: &Path) -> Result<Dataset> {
    let path = root.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| SynthError::io(&path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(MANIFEST_HEADER) {
        return Err(SynthError::format(&path, "missing manifest header"));
    }
    let views = lines
        .next()
        .and_then(|l| l.strip_prefix("views "))
        .and_then(|n| n.parse::<usize>().ok())
        .filter(|n| *n == 3 || *n == 5)
        .ok_or_else(|| SynthError::format(&path, "expected `views 3` or `views 5` on line 2"))?;
    let mut entries = Vec::new();
    for (k, line) in lines.enumerate() {
        let bad = || SynthError::format(&path, format!("line {}: malformed entry `{line}`", k + 3));
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [unit, tile, split] = parts[..] else { return Err(bad()) };
        let (strip, index) = parse_unit_name(unit).ok_or_else(bad)?;
        let tile: usize = tile.parse().map_err(|_| bad())?;
        let split = match split {
            "train" => Split::Train,
            "test" => Split::Test,
            _ => return Err(bad()),
        };
        entries.push((unit.to_string(), strip, index, tile, split));
    }
    let subunits = entries
        .par_iter()
        .map(|(unit, strip, index, tile, split)| {
            let views = (0..views).map(|id| read_tile_view(root, unit, id, *tile)).collect::<Result<_>>()?;
            Ok(SubUnit { strip: *strip, index: *index, tile: *tile, split: *split, views })
        })
        .collect::<Result<_>>()?;
    Ok(Dataset { views, subunits })
}
