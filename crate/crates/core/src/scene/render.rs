//! Deterministic 2D side-view renderer.
//!
//! Each car type has a hand-built profile of axis-aligned rectangles in the
//! left-facing pose; parts are painted in a fixed order (later rectangles
//! win). The right-facing pose is the mirror image with left/right labels
//! swapped.

use serde::{Deserialize, Serialize};

use crate::scene::label_map::LabelMap;
use crate::scene::taxonomy::{CarType, Component, FinePart, Orientation, Side};

pub const CANVAS_WIDTH: usize = 256;
pub const CANVAS_HEIGHT: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SceneSpec {
    pub car_type: CarType,
    pub orientation: Orientation,
    pub occluded_component: Option<Component>,
}

impl SceneSpec {
    pub fn new(car_type: CarType, orientation: Orientation) -> Self {
        Self {
            car_type,
            orientation,
            occluded_component: None,
        }
    }

    pub fn occluding(mut self, component: Component) -> Self {
        self.occluded_component = Some(component);
        self
    }
}

/// Half-open rectangle `[x0, x1) x [y0, y1)` in canvas pixels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rect {
    x0: i32,
    y0: i32,
    x1: i32,
    y1: i32,
}

const fn rect(x0: i32, x1: i32, y0: i32, y1: i32) -> Rect {
    Rect { x0, y0, x1, y1 }
}

/// Key coordinates of a left-facing car; x grows toward the rear.
#[derive(Clone, Copy)]
struct Profile {
    front: i32,
    rear: i32,
    belt: i32,
    sill: i32,
    hood_top: i32,
    roof_top: i32,
    roof_bot: i32,
    /// Windshield span.
    ws: (i32, i32),
    /// Seam between front and back doors.
    split: i32,
    /// Rear window span.
    rw: (i32, i32),
    trunk: Rect,
    /// Lamp sizes (width, height).
    headlight: (i32, i32),
    taillight: (i32, i32),
    wheel_r: i32,
    wheel_front: i32,
    wheel_rear: i32,
    ground: i32,
}

fn profile(car: CarType) -> Profile {
    // Shared chassis; types differ in greenhouse and rear deck.
    let base = Profile {
        front: 20,
        rear: 236,
        belt: 70,
        sill: 104,
        hood_top: 62,
        roof_top: 32,
        roof_bot: 38,
        ws: (64, 88),
        split: 126,
        rw: (164, 188),
        trunk: rect(188, 234, 60, 70),
        headlight: (10, 7),
        taillight: (8, 7),
        wheel_r: 13,
        wheel_front: 54,
        wheel_rear: 198,
        ground: 116,
    };
    match car {
        CarType::Sedan => base,
        CarType::Suv => Profile {
            roof_top: 20,
            roof_bot: 26,
            hood_top: 58,
            split: 124,
            headlight: (7, 10),
            taillight: (7, 8),
            wheel_rear: 196,
            ..base
        },
        CarType::Wagon => Profile {
            hood_top: 60,
            ws: (62, 88),
            split: 128,
            rw: (176, 188),
            headlight: (14, 5),
            taillight: (4, 14),
            wheel_rear: 200,
            ..base
        },
        CarType::Truck => Profile {
            roof_top: 26,
            roof_bot: 32,
            hood_top: 60,
            split: 122,
            rw: (168, 188),
            headlight: (5, 14),
            taillight: (14, 4),
            wheel_rear: 194,
            ..base
        },
        CarType::Minivan => Profile {
            roof_top: 16,
            roof_bot: 22,
            ws: (60, 84),
            split: 130,
            rw: (170, 188),
            headlight: (35, 2),
            taillight: (28, 2),
            wheel_rear: 202,
            ..base
        },
    }
}

/// Painting order for a left-facing car.
fn paint_list(car: CarType) -> Vec<(FinePart, Rect)> {
    use FinePart::*;
    let p = profile(car);
    let (ws0, ws1) = p.ws;
    let (rw0, rw1) = p.rw;
    let wheel = |cx: i32| rect(cx - p.wheel_r, cx + p.wheel_r, p.ground - 2 * p.wheel_r, p.ground);
    vec![
        (LeftBodyPanel, rect(p.front, p.rear, p.belt, p.sill)),
        (LeftBodyPanel, rect(ws0, rw1, p.roof_bot, p.belt)),
        (Hood, rect(p.front + 2, ws0, p.hood_top, p.belt)),
        (Trunk, p.trunk),
        (Roof, rect(ws0 + 6, rw1 - 4, p.roof_top, p.roof_bot)),
        (Windshield, rect(ws0, ws1, p.roof_bot, p.belt)),
        (RearWindow, rect(rw0, rw1, p.roof_bot + 2, p.belt)),
        (FrontLeftWindow, rect(ws1 + 2, p.split - 2, p.belt - 29, p.belt - 2)),
        (BackLeftWindow, rect(p.split + 2, rw0 - 12, p.belt - 29, p.belt - 2)),
        (FrontLeftDoor, rect(ws1, p.split, p.belt, p.sill - 3)),
        (BackLeftDoor, rect(p.split, rw0, p.belt, p.sill - 3)),
        (Chassis, rect(p.front + 6, p.rear - 6, p.sill, p.sill + 6)),
        (FrontLeftWheel, wheel(p.wheel_front)),
        (BackLeftWheel, wheel(p.wheel_rear)),
        (FrontBumper, rect(p.front - 4, p.front + 12, p.sill - 12, p.sill - 2)),
        (RearBumper, rect(p.rear - 12, p.rear + 4, p.sill - 12, p.sill - 2)),
        (FrontPlate, rect(p.front - 4, p.front, p.sill - 10, p.sill - 4)),
        (RearPlate, rect(p.rear, p.rear + 4, p.sill - 10, p.sill - 4)),
        (LeftHeadlight, rect(p.front, p.front + p.headlight.0, p.belt + 2, p.belt + 2 + p.headlight.1)),
        (Grille, rect(p.front, p.front + 4, p.belt + 10, p.sill - 13)),
        (LeftTaillight, rect(p.rear - p.taillight.0, p.rear, p.belt + 2, p.belt + 2 + p.taillight.1)),
        (LeftMirror, rect(ws1 - 3, ws1 + 5, p.belt - 7, p.belt - 1)),
    ]
}

fn paint(cells: &mut [u8], part: FinePart, r: Rect) {
    let clamp_x = |v: i32| v.clamp(0, CANVAS_WIDTH as i32) as usize;
    let clamp_y = |v: i32| v.clamp(0, CANVAS_HEIGHT as i32) as usize;
    let (x0, x1) = (clamp_x(r.x0), clamp_x(r.x1));
    let (y0, y1) = (clamp_y(r.y0), clamp_y(r.y1));
    for y in y0..y1 {
        cells[y * CANVAS_WIDTH + x0..y * CANVAS_WIDTH + x1].fill(part.id());
    }
}

/// Render a whole car as a 256x128 label map.
pub fn render_whole_car(spec: &SceneSpec) -> LabelMap {
    let mut cells = vec![0u8; CANVAS_WIDTH * CANVAS_HEIGHT];
    for (part, r) in paint_list(spec.car_type) {
        paint(&mut cells, part, r);
    }
    if let Some(component) = spec.occluded_component {
        let body = FinePart::body_panel(Side::Left).id();
        for c in cells.iter_mut() {
            if component.contains_cell(*c) {
                *c = body;
            }
        }
    }
    let left = LabelMap::from_raw_unchecked(CANVAS_WIDTH, CANVAS_HEIGHT, cells);
    match spec.orientation {
        Orientation::Left => left,
        Orientation::Right => left.mirror(),
    }
}
