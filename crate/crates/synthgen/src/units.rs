//! Multi-view units and their cropping into fixed-size tiles.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::Vector3;
use skysweep_planesweep::{CameraModel, DepthPlan};

use crate::error::{Result, SynthError};
use crate::raster::{DepthMap, RgbImage};
use crate::render::ViewRecord;

/// Depth planes of padding added around ground-truth ranges.
pub const RANGE_PAD: usize = 5;

/// Reference view (ID 1) with its heading (IDs 0, 2) and side (IDs 3, 4) neighbours.
#[derive(Clone, Debug)]
pub struct MultiViewUnit {
    pub strip: usize,
    pub index: usize,
    /// Views ordered by view ID.
    pub views: Vec<Arc<ViewRecord>>,
}

/// Directory name of a unit: one-based strip (three digits) and image index.
pub fn unit_name(strip: usize, index: usize) -> String {
    format!("{:03}_{}", strip + 1, index + 1)
}

/// Inverse of [`unit_name`].
pub fn parse_unit_name(name: &str) -> Option<(usize, usize)> {
    let (s, i) = name.split_once('_')?;
    if s.len() != 3 {
        return None;
    }
    let s: usize = s.parse().ok()?;
    let i: usize = i.parse().ok()?;
    (s >= 1 && i >= 1).then(|| (s - 1, i - 1))
}

impl MultiViewUnit {
    pub fn name(&self) -> String {
        unit_name(self.strip, self.index)
    }

    pub fn reference(&self) -> &ViewRecord {
        &self.views[1]
    }
}

/// Builds one unit around every image that has all required neighbours.
pub fn make_units(views: &[Arc<ViewRecord>], n: usize) -> Result<Vec<MultiViewUnit>> {
    if n != 3 && n != 5 {
        return Err(SynthError::Contract(format!("units hold 3 or 5 views, got {n}")));
    }
    let grid: HashMap<(usize, usize), &Arc<ViewRecord>> = views.iter().map(|v| ((v.strip, v.index), v)).collect();
    let mut order: Vec<(usize, usize)> = grid.keys().copied().collect();
    order.sort_unstable();
    let mut units = Vec::new();
    for (s, i) in order {
        let Some(i_prev) = i.checked_sub(1) else { continue };
        let mut ids = vec![(s, i_prev), (s, i), (s, i + 1)];
        if n == 5 {
            let Some(s_prev) = s.checked_sub(1) else { continue };
            ids.push((s_prev, i));
            ids.push((s + 1, i));
        }
        let members: Option<Vec<Arc<ViewRecord>>> = ids.iter().map(|k| grid.get(k).map(|v| Arc::clone(v))).collect();
        if let Some(views) = members {
            units.push(MultiViewUnit { strip: s, index: i, views });
        }
    }
    Ok(units)
}

/// One view of a cropped tile.
#[derive(Clone, Debug, PartialEq)]
pub struct TileView {
    pub image: RgbImage,
    pub depth: DepthMap,
    pub filled: Vec<bool>,
    pub camera: CameraModel,
    pub plan: DepthPlan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// A tile of a unit: every view cropped to the same size.
#[derive(Clone, Debug, PartialEq)]
pub struct SubUnit {
    pub strip: usize,
    pub index: usize,
    pub tile: usize,
    pub split: Split,
    /// Views ordered by view ID.
    pub views: Vec<TileView>,
}

impl SubUnit {
    pub fn unit_name(&self) -> String {
        unit_name(self.strip, self.index)
    }

    pub fn reference(&self) -> &TileView {
        &self.views[1]
    }
}

/// Reference pixels whose rays, over the whole padded depth range, land inside every search view.
pub fn coverage_mask(unit: &MultiViewUnit, lo: f64, hi: f64) -> Result<Vec<bool>> {
    let r = &unit.reference().camera;
    let (w, h) = (r.width(), r.height());
    let mut mask = vec![true; w * h];
    for y in 0..h {
        for x in 0..w {
            let ends = [r.unproject(x as f64, y as f64, lo)?, r.unproject(x as f64, y as f64, hi)?];
            let inside = unit.views.iter().enumerate().filter(|(id, _)| *id != 1).all(|(_, v)| {
                ends.iter().all(|p| match v.camera.project(p) {
                    Ok((u, vv, _)) => v.camera.contains(u, vv),
                    Err(_) => false,
                })
            });
            mask[y * w + x] = inside;
        }
    }
    Ok(mask)
}

/// Top-left corners of the fully covered tiles of a grid anchored at the
/// mask's bounding-box corner, in row-major order.
pub fn tile_grid(mask: &[bool], width: usize, height: usize, tile_w: usize, tile_h: usize) -> Vec<(usize, usize)> {
    let mut bbox: Option<(usize, usize, usize, usize)> = None;
    for y in 0..height {
        for x in 0..width {
            if mask[y * width + x] {
                bbox = Some(match bbox {
                    None => (x, y, x, y),
                    Some((x0, y0, x1, y1)) => (x0.min(x), y0.min(y), x1.max(x), y1.max(y)),
                });
            }
        }
    }
    let Some((x0, y0, x1, y1)) = bbox else { return Vec::new() };
    let mut tiles = Vec::new();
    let mut top = y0;
    while top + tile_h <= y1 + 1 {
        let mut left = x0;
        while left + tile_w <= x1 + 1 {
            let full = (top..top + tile_h).all(|y| mask[y * width + left..y * width + left + tile_w].iter().all(|&m| m));
            if full {
                tiles.push((left, top));
            }
            left += tile_w;
        }
        top += tile_h;
    }
    tiles
}

fn crop_view(view: &ViewRecord, left: usize, top: usize, tw: usize, th: usize, interval: f64) -> Result<TileView> {
    let depth = view.depth.crop(left, top, tw, th);
    let (lo, hi) = depth
        .range()
        .ok_or_else(|| SynthError::Degenerate(format!("tile at {left},{top} has no valid depth")))?;
    let mut filled = Vec::with_capacity(tw * th);
    for y in top..top + th {
        filled.extend_from_slice(&view.filled[y * view.camera.width() + left..y * view.camera.width() + left + tw]);
    }
    Ok(TileView {
        image: view.image.crop(left, top, tw, th),
        depth,
        filled,
        camera: view.camera.cropped(left, top, tw, th)?,
        plan: DepthPlan::covering(lo, hi, interval, RANGE_PAD)?,
    })
}

/// Cuts a unit into tiles covered by all of its views.
///
/// Search-view crops are centred on where the reference tile centre lands at
/// its ground-truth depth, clamped to the search image.
pub fn crop_units(unit: &MultiViewUnit, tile_w: usize, tile_h: usize, interval: f64) -> Result<Vec<SubUnit>> {
    let r = unit.reference();
    let (w, h) = (r.camera.width(), r.camera.height());
    if tile_w == 0 || tile_h == 0 || tile_w % 2 != 0 || tile_h % 2 != 0 || tile_w > w || tile_h > h {
        return Err(SynthError::Contract(format!("tile {tile_w}x{tile_h} must be even and fit in {w}x{h}")));
    }
    let (lo, hi) = r
        .depth
        .range()
        .ok_or_else(|| SynthError::Degenerate(format!("reference of {} has no valid depth", unit.name())))?;
    let pad = RANGE_PAD as f64 * interval;
    let mask = coverage_mask(unit, (lo - pad).max(f64::MIN_POSITIVE), hi + pad)?;
    let tiles = tile_grid(&mask, w, h, tile_w, tile_h);
    if tiles.is_empty() {
        return Err(SynthError::Degenerate(format!("unit {} has no tile covered by all views", unit.name())));
    }
    let mut out = Vec::with_capacity(tiles.len());
    for (t, &(left, top)) in tiles.iter().enumerate() {
        let ref_tile = crop_view(r, left, top, tile_w, tile_h, interval)?;
        let (cx, cy) = (left + tile_w / 2, top + tile_h / 2);
        let mid = r.depth.get(cx, cy).unwrap_or((lo + hi) / 2.0);
        let anchor: Vector3<f64> = r.camera.unproject(cx as f64, cy as f64, mid)?;
        let mut views = Vec::with_capacity(unit.views.len());
        for (id, v) in unit.views.iter().enumerate() {
            if id == 1 {
                views.push(ref_tile.clone());
                continue;
            }
            let (u, vv, _) = v.camera.project(&anchor)?;
            let place = |c: f64, half: usize, size: usize, full: usize| -> usize {
                (c.round() - half as f64).clamp(0.0, (full - size) as f64) as usize
            };
            let sl = place(u, tile_w / 2, tile_w, v.camera.width());
            let st = place(vv, tile_h / 2, tile_h, v.camera.height());
            views.push(crop_view(v, sl, st, tile_w, tile_h, interval)?);
        }
        out.push(SubUnit { strip: unit.strip, index: unit.index, tile: t, split: Split::Train, views });
    }
    Ok(out)
}

/// Marks the last quarter of units (ordered along the flight direction) as test.
pub fn assign_splits(subunits: &mut [SubUnit]) {
    let mut keys: Vec<(usize, usize)> = subunits.iter().map(|s| (s.index, s.strip)).collect();
    keys.sort_unstable();
    keys.dedup();
    let n_test = (keys.len() as f64 / 4.0).round() as usize;
    let test: std::collections::HashSet<(usize, usize)> = keys[keys.len() - n_test..].iter().copied().collect();
    for s in subunits {
        s.split = if test.contains(&(s.index, s.strip)) { Split::Test } else { Split::Train };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stub(strip: usize, index: usize) -> Arc<ViewRecord> {
        let cam = CameraModel::nadir(100.0, 4, 4, Vector3::new(index as f64, strip as f64, 10.0)).unwrap();
        Arc::new(ViewRecord {
            image: RgbImage::new(4, 4),
            depth: DepthMap::constant(4, 4, 10.0),
            filled: vec![false; 16],
            camera: cam,
            strip,
            index,
        })
    }

    fn grid(strips: usize, images: usize) -> Vec<Arc<ViewRecord>> {
        (0..strips).flat_map(|s| (0..images).map(move |i| stub(s, i))).collect()
    }

    #[test]
    fn single_strip_of_three() {
        let units = make_units(&grid(1, 3), 3).unwrap();
        assert_eq!(units.len(), 1);
        assert_eq!(units[0].index, 1);
    }

    #[test]
    fn three_by_three_five_views() {
        let units = make_units(&grid(3, 3), 5).unwrap();
        assert_eq!(units.len(), 1);
        let u = &units[0];
        assert_eq!((u.strip, u.index), (1, 1));
        let ids: Vec<(usize, usize)> = u.views.iter().map(|v| (v.strip, v.index)).collect();
        assert_eq!(ids, vec![(1, 0), (1, 1), (1, 2), (0, 1), (2, 1)]);
    }

    #[test]
    fn unit_count_matches_enumeration() {
        for (s, i) in [(2, 5), (4, 7), (1, 2), (3, 4)] {
            let mut expected3 = 0;
            let mut expected5 = 0;
            for ss in 0..s {
                for ii in 0..i {
                    let heading = ii >= 1 && ii + 1 < i;
                    expected3 += heading as usize;
                    expected5 += (heading && ss >= 1 && ss + 1 < s) as usize;
                }
            }
            assert_eq!(make_units(&grid(s, i), 3).unwrap().len(), expected3);
            assert_eq!(make_units(&grid(s, i), 5).unwrap().len(), expected5);
        }
        assert_eq!(make_units(&grid(2, 5), 3).unwrap().len(), 6);
    }

    #[test]
    fn bad_view_count() {
        assert!(make_units(&grid(1, 3), 4).is_err());
    }

    #[test]
    fn names_round_trip() {
        assert_eq!(unit_name(5, 7), "006_8");
        assert_eq!(parse_unit_name("006_8"), Some((5, 7)));
        assert_eq!(parse_unit_name("6_8"), None);
        assert_eq!(parse_unit_name("000_1"), None);
    }

    #[test]
    fn exact_overlap_region_tiles() {
        let (w, h) = (2000, 1000);
        let mut mask = vec![false; w * h];
        for y in 100..868 {
            for x in 200..1736 {
                mask[y * w + x] = true;
            }
        }
        let tiles = tile_grid(&mask, w, h, 768, 384);
        assert_eq!(tiles, vec![(200, 100), (968, 100), (200, 484), (968, 484)]);
    }

    #[test]
    fn partially_covered_tiles_are_dropped() {
        let (w, h) = (8, 4);
        let mut mask = vec![true; w * h];
        mask[7] = false;
        assert_eq!(tile_grid(&mask, w, h, 4, 4), vec![(0, 0)]);
        assert!(tile_grid(&vec![false; 32], w, h, 4, 4).is_empty());
    }

    #[test]
    fn crop_shifts_principal_point() {
        let cam = CameraModel::nadir(700.0, 64, 48, Vector3::new(1.0, 2.0, 90.0)).unwrap();
        let c = cam.cropped(10, 6, 32, 16).unwrap();
        let p = Vector3::new(3.0, -1.0, 0.5);
        let (u, v, _) = cam.project(&p).unwrap();
        let (uc, vc, _) = c.project(&p).unwrap();
        assert!((uc - (u - 10.0)).abs() < 1e-9 && (vc - (v - 6.0)).abs() < 1e-9);
    }
}
