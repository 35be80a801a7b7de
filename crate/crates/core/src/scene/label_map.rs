use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scene::taxonomy::{mirror_cell, AggregatePart, FinePart, AGGREGATE_OF_CELL};

const VALM_MAGIC: &str = "VALM1";

/// Row-major grid of fine part ids (0 = background).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

pub type SharedMap = Arc<LabelMap>;

impl LabelMap {
    pub fn new(width: usize, height: usize, cells: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMap(format!("{width}x{height} has no cells")));
        }
        if cells.len() != width * height {
            return Err(Error::InvalidMap(format!(
                "{width}x{height} needs {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&c| c > FinePart::COUNT as u8) {
            return Err(Error::InvalidMap(format!("cell value {bad} is not a label id")));
        }
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    /// All-background map.
    pub fn blank(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0);
        Self {
            width,
            height,
            cells: vec![0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.cells[y * self.width + x]
    }

    pub fn same_dims(&self, other: &LabelMap) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn foreground_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }

    pub fn count(&self, part: FinePart) -> usize {
        let id = part.id();
        self.cells.iter().filter(|&&c| c == id).count()
    }

    /// Pixel count per raw cell value, index 0 = background.
    pub fn histogram(&self) -> [usize; 32] {
        let mut h = [0usize; 32];
        for &c in &self.cells {
            h[usize::from(c)] += 1;
        }
        h
    }

    /// Horizontal flip with every left/right label swapped for its counterpart.
    pub fn mirror(&self) -> LabelMap {
        let mut cells = Vec::with_capacity(self.cells.len());
        for row in self.cells.chunks_exact(self.width) {
            cells.extend(row.iter().rev().map(|&c| mirror_cell(c)));
        }
        LabelMap {
            width: self.width,
            height: self.height,
            cells,
        }
    }

    /// Copy of the window `[x0, x0 + w) x [y0, y0 + h)`, which must lie inside the map.
    pub fn crop(&self, x0: usize, y0: usize, w: usize, h: usize) -> LabelMap {
        assert!(w > 0 && h > 0 && x0 + w <= self.width && y0 + h <= self.height);
        let mut cells = Vec::with_capacity(w * h);
        for y in y0..y0 + h {
            let start = y * self.width + x0;
            cells.extend_from_slice(&self.cells[start..start + w]);
        }
        LabelMap {
            width: w,
            height: h,
            cells,
        }
    }

    pub(crate) fn from_raw_unchecked(width: usize, height: usize, cells: Vec<u8>) -> Self {
        debug_assert_eq!(cells.len(), width * height);
        Self {
            width,
            height,
            cells,
        }
    }

    pub fn aggregate(&self) -> AggregateMap {
        AggregateMap {
            width: self.width,
            height: self.height,
            cells: self
                .cells
                .iter()
                .map(|&c| AGGREGATE_OF_CELL[usize::from(c)])
                .collect(),
        }
    }

    /// Serialize as VALM1 text.
    pub fn to_valm(&self) -> String {
        let mut out = String::with_capacity(16 + self.cells.len() * 3);
        let _ = writeln!(out, "{VALM_MAGIC} {} {}", self.width, self.height);
        for row in self.cells.chunks_exact(self.width) {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_valm(text: &str) -> Result<Self> {
        let malformed = |detail: String| Error::malformed("VALM1 map", detail);
        let mut lines = text.split('\n');
        let header = lines.next().unwrap_or_default();
        let mut fields = header.split(' ');
        if fields.next() != Some(VALM_MAGIC) {
            return Err(malformed(format!("bad header `{header}`")));
        }
        let mut dim = |name: &str| -> Result<usize> {
            fields
                .next()
                .and_then(|f| f.parse::<usize>().ok())
                .ok_or_else(|| malformed(format!("missing or invalid {name} in header")))
        };
        let width = dim("width")?;
        let height = dim("height")?;
        if fields.next().is_some() {
            return Err(malformed("trailing fields in header".into()));
        }
        if width == 0 || height == 0 {
            return Err(malformed(format!("{width}x{height} has no cells")));
        }

        let mut cells = Vec::with_capacity(width * height);
        for row in 0..height {
            let line = lines
                .next()
                .ok_or_else(|| malformed(format!("missing row {row}")))?;
            let before = cells.len();
            for tok in line.split(' ') {
                let v: u8 = tok
                    .parse()
                    .map_err(|_| malformed(format!("row {row}: bad value `{tok}`")))?;
                cells.push(v);
            }
            if cells.len() - before != width {
                return Err(malformed(format!(
                    "row {row} has {} values, expected {width}",
                    cells.len() - before
                )));
            }
        }
        // The last row's newline leaves exactly one empty trailing piece.
        if lines.next() != Some("") || lines.next().is_some() {
            return Err(malformed("unexpected content after the last row".into()));
        }
        LabelMap::new(width, height, cells)
    }
}

/// A label map relabeled onto the 13 aggregate parts (0 = background).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateMap {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl AggregateMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn count(&self, part: AggregatePart) -> usize {
        let id = part.id();
        self.cells.iter().filter(|&&c| c == id).count()
    }

    /// Pixel count per aggregate part, indexed by `AggregatePart::index`.
    pub fn part_counts(&self) -> [usize; AggregatePart::COUNT] {
        let mut counts = [0usize; AggregatePart::COUNT];
        for &c in &self.cells {
            if c != 0 {
                counts[usize::from(c) - 1] += 1;
            }
        }
        counts
    }

    pub fn foreground_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_map() -> impl Strategy<Value = LabelMap> {
        (1usize..12, 1usize..12).prop_flat_map(|(w, h)| {
            proptest::collection::vec(0u8..=31, w * h)
                .prop_map(move |cells| LabelMap::new(w, h, cells).unwrap())
        })
    }

    #[test]
    fn rejects_bad_dimensions_and_values() {
        assert!(LabelMap::new(0, 3, vec![]).is_err());
        assert!(LabelMap::new(2, 2, vec![0; 3]).is_err());
        assert!(LabelMap::new(1, 1, vec![32]).is_err());
    }

    #[test]
    fn valm_text_layout() {
        let m = LabelMap::new(3, 2, vec![0, 1, 31, 12, 0, 5]).unwrap();
        assert_eq!(m.to_valm(), "VALM1 3 2\n0 1 31\n12 0 5\n");
    }

    #[test]
    fn valm_parse_errors() {
        for bad in [
            "",
            "VALM2 1 1\n0\n",
            "VALM1 2 1\n0\n",
            "VALM1 1 2\n0\n",
            "VALM1 1 1\n40\n",
            "VALM1 1 1\n0\n0\n",
            "VALM1 1 1\n0",
            "VALM1 1 1\nx\n",
            "VALM1 1 1\r\n0\r\n",
        ] {
            assert!(LabelMap::from_valm(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn aggregate_of_blank_is_blank() {
        let m = LabelMap::blank(5, 4);
        let a = m.aggregate();
        assert_eq!(a.foreground_count(), 0);
        assert!(a.cells().iter().all(|&c| c == 0));
    }

    #[test]
    fn doors_collapse_into_one_aggregate() {
        let m = LabelMap::new(
            4,
            1,
            vec![
                FinePart::FrontLeftDoor.id(),
                FinePart::BackLeftDoor.id(),
                FinePart::FrontRightDoor.id(),
                0,
            ],
        )
        .unwrap();
        let a = m.aggregate();
        assert_eq!(a.count(AggregatePart::Door), 3);
        assert_eq!(a.cells()[3], 0);
    }

    proptest! {
        #[test]
        fn valm_round_trip(m in arb_map()) {
            prop_assert_eq!(LabelMap::from_valm(&m.to_valm()).unwrap(), m);
        }

        #[test]
        fn mirror_involution(m in arb_map()) {
            prop_assert_eq!(m.mirror().mirror(), m);
        }

        #[test]
        fn aggregation_conserves_mass(m in arb_map()) {
            let a = m.aggregate();
            let fine = m.histogram();
            prop_assert_eq!(a.foreground_count(), m.foreground_count());
            for part in AggregatePart::ALL {
                let expected: usize = part.fine_members().map(|p| fine[usize::from(p.id())]).sum();
                prop_assert_eq!(a.count(part), expected);
            }
        }
    }
}
