//! Car taxonomy, label maps and the synthetic scene renderer.

mod label_map;
mod png_export;
mod render;
mod subregion;
mod taxonomy;

pub use label_map::{AggregateMap, LabelMap, SharedMap};
pub use png_export::{palette_color, to_png_bytes, write_png, PALETTE};
pub use render::{render_whole_car, SceneSpec, CANVAS_HEIGHT, CANVAS_WIDTH};
pub use subregion::{
    extract_subregion, piece_window, region_box, RegionBox, SubregionSpec, PART_MARGIN,
    PIECE_MAX_COVERAGE, PIECE_MIN_COVERAGE,
};
pub use taxonomy::{
    mirror_cell, AggregatePart, CarType, Component, FinePart, Granularity, Orientation, Side,
};

/// Replace every fine label with its aggregate label.
pub fn aggregate(map: &LabelMap) -> AggregateMap {
    map.aggregate()
}
