//! Part and piece crops of a whole-car map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::label_map::LabelMap;
use crate::scene::taxonomy::{Component, Granularity, Orientation};

/// Context kept around a part crop, in pixels.
pub const PART_MARGIN: usize = 4;
pub const PIECE_MIN_COVERAGE: f64 = 0.4;
pub const PIECE_MAX_COVERAGE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubregionSpec {
    pub component: Component,
    pub granularity: Granularity,
}

/// Inclusive bounding box of a component's region pixels plus per-column counts.
#[derive(Debug, Clone)]
pub struct RegionBox {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
    pub total: usize,
    columns: Vec<usize>,
}

impl RegionBox {
    pub fn width(&self) -> usize {
        self.x1 - self.x0 + 1
    }

    pub fn height(&self) -> usize {
        self.y1 - self.y0 + 1
    }

    /// Region pixels inside columns `[x, x + w)` (absolute x).
    pub fn pixels_in_columns(&self, x: usize, w: usize) -> usize {
        self.columns[x - self.x0..x - self.x0 + w].iter().sum()
    }
}

pub fn region_box(map: &LabelMap, component: Component) -> Result<RegionBox> {
    let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
    let mut total = 0;
    for y in 0..map.height() {
        for x in 0..map.width() {
            if component.region_contains_cell(map.get(x, y)) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
                total += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::ComponentAbsent(component));
    }
    let mut columns = vec![0; x1 - x0 + 1];
    for y in y0..=y1 {
        for x in x0..=x1 {
            if component.region_contains_cell(map.get(x, y)) {
                columns[x - x0] += 1;
            }
        }
    }
    Ok(RegionBox {
        x0,
        y0,
        x1,
        y1,
        total,
        columns,
    })
}

/// Crop a part (whole component plus context margin) or a piece (a window
/// holding 40-60% of the component) out of an unoccluded whole-car map.
/// `facing` tells which way is the car's front.
pub fn extract_subregion(
    whole: &LabelMap,
    spec: SubregionSpec,
    facing: Orientation,
) -> Result<LabelMap> {
    let bbox = region_box(whole, spec.component)?;
    match spec.granularity {
        Granularity::Part => {
            let x0 = bbox.x0.saturating_sub(PART_MARGIN);
            let y0 = bbox.y0.saturating_sub(PART_MARGIN);
            let x1 = (bbox.x1 + PART_MARGIN).min(whole.width() - 1);
            let y1 = (bbox.y1 + PART_MARGIN).min(whole.height() - 1);
            Ok(whole.crop(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
        }
        Granularity::Piece => {
            let (x, w) = piece_window(&bbox, facing)
                .ok_or(Error::PieceCoverage(spec.component))?;
            Ok(whole.crop(x, bbox.y0, w, bbox.height()))
        }
    }
}

/// Column window `(x, w)` for a piece crop.
///
/// Worked in a frame where the car's front is at offset 0 so that mirrored
/// cars get mirrored windows. Nominal window: half the box width, centred on
/// the box, moved toward the front by a tenth of the box width. If its
/// coverage falls outside [0.4, 0.6] it is grown (adding the richer
/// neighbouring column, front side on ties) or shrunk (dropping the poorer
/// edge column, rear side on ties) one column at a time.
pub fn piece_window(bbox: &RegionBox, facing: Orientation) -> Option<(usize, usize)> {
    let bw = bbox.width();
    let cols: Vec<usize> = match facing {
        Orientation::Left => bbox.columns.clone(),
        Orientation::Right => bbox.columns.iter().rev().copied().collect(),
    };
    let total = bbox.total as f64;
    let coverage = |lo: usize, hi: usize| cols[lo..hi].iter().sum::<usize>() as f64 / total;

    let w = bw.div_ceil(2).max(1);
    let shift = (bw as f64 * 0.1).round() as isize;
    let start = (bw / 2) as isize - (w / 2) as isize - shift;
    let mut lo = start.clamp(0, (bw - w) as isize) as usize;
    let mut hi = lo + w;

    while coverage(lo, hi) < PIECE_MIN_COVERAGE {
        let front = (lo > 0).then(|| cols[lo - 1]);
        let back = (hi < bw).then(|| cols[hi]);
        match (front, back) {
            (Some(f), Some(b)) if f >= b => lo -= 1,
            (Some(_), None) => lo -= 1,
            (_, Some(_)) => hi += 1,
            (None, None) => break,
        }
    }
    while coverage(lo, hi) > PIECE_MAX_COVERAGE && hi - lo > 1 {
        if cols[hi - 1] <= cols[lo] {
            hi -= 1;
        } else {
            lo += 1;
        }
    }
    if !(PIECE_MIN_COVERAGE..=PIECE_MAX_COVERAGE).contains(&coverage(lo, hi)) {
        return None;
    }
    let x = match facing {
        Orientation::Left => bbox.x0 + lo,
        Orientation::Right => bbox.x0 + (bw - hi),
    };
    Some((x, hi - lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::render::{render_whole_car, SceneSpec};
    use crate::scene::taxonomy::CarType;

    fn region_pixels(m: &LabelMap, c: Component) -> usize {
        m.cells().iter().filter(|&&v| c.region_contains_cell(v)).count()
    }

    #[test]
    fn part_crop_holds_the_whole_component_and_piece_holds_40_to_60_percent() {
        for car in CarType::ALL {
            for o in [Orientation::Left, Orientation::Right] {
                let whole = render_whole_car(&SceneSpec::new(car, o));
                for c in Component::ALL {
                    let total = region_pixels(&whole, c);
                    let part = extract_subregion(
                        &whole,
                        SubregionSpec { component: c, granularity: Granularity::Part },
                        o,
                    )
                    .unwrap();
                    assert_eq!(region_pixels(&part, c), total, "{car} {o:?} {c}");
                    let piece = extract_subregion(
                        &whole,
                        SubregionSpec { component: c, granularity: Granularity::Piece },
                        o,
                    )
                    .unwrap();
                    let frac = region_pixels(&piece, c) as f64 / total as f64;
                    assert!((0.4..=0.6).contains(&frac), "{car} {o:?} {c}: {frac}");
                }
            }
        }
    }

    #[test]
    fn crops_mirror_with_their_parent() {
        for car in CarType::ALL {
            let left = render_whole_car(&SceneSpec::new(car, Orientation::Left));
            let right = render_whole_car(&SceneSpec::new(car, Orientation::Right));
            for c in Component::ALL {
                for g in Granularity::ALL {
                    let spec = SubregionSpec { component: c, granularity: g };
                    let a = extract_subregion(&left, spec, Orientation::Left).unwrap();
                    let b = extract_subregion(&right, spec, Orientation::Right).unwrap();
                    assert_eq!(a.mirror(), b, "{car} {c} {g}");
                }
            }
        }
    }

    #[test]
    fn absent_component_is_an_error() {
        let blank = LabelMap::blank(8, 8);
        let err = extract_subregion(
            &blank,
            SubregionSpec { component: Component::DoorWindow, granularity: Granularity::Part },
            Orientation::Left,
        );
        assert!(matches!(err, Err(Error::ComponentAbsent(Component::DoorWindow))));
    }
}
