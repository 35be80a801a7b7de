//! PNG export of label maps for visual inspection.
//!
//! Pixels are coloured by aggregate part with the fixed palette below
//! (background is white).

use std::io::Write;

use crate::error::{Error, Result};
use crate::scene::label_map::LabelMap;
use crate::scene::taxonomy::AggregatePart;

/// RGB per aggregate id; index 0 is background.
pub const PALETTE: [[u8; 3]; 14] = [
    [255, 255, 255], // background
    [31, 119, 180],  // door
    [174, 199, 232], // window
    [23, 190, 207],  // windshield
    [255, 127, 14],  // hood
    [214, 39, 40],   // trunk
    [148, 103, 189], // roof
    [227, 119, 194], // mirror
    [127, 127, 127], // bumper
    [30, 30, 30],    // wheel
    [255, 221, 0],   // headlight
    [140, 86, 75],   // taillight
    [44, 160, 44],   // plate
    [199, 199, 199], // body
];

pub fn palette_color(part: Option<AggregatePart>) -> [u8; 3] {
    PALETTE[part.map_or(0, |p| usize::from(p.id()))]
}

/// Encode as an 8-bit indexed PNG.
pub fn write_png<W: Write>(map: &LabelMap, out: W) -> Result<()> {
    let to_err = |e: png::EncodingError| Error::malformed("PNG output", e.to_string());
    let mut encoder = png::Encoder::new(out, map.width() as u32, map.height() as u32);
    encoder.set_color(png::ColorType::Indexed);
    encoder.set_depth(png::BitDepth::Eight);
    encoder.set_palette(PALETTE.concat());
    encoder.set_compression(png::Compression::Balanced);
    let mut writer = encoder.write_header().map_err(to_err)?;
    let data: Vec<u8> = map.aggregate().cells().to_vec();
    writer.write_image_data(&data).map_err(to_err)?;
    writer.finish().map_err(to_err)
}

pub fn to_png_bytes(map: &LabelMap) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_png(map, &mut buf)?;
    Ok(buf)
}
