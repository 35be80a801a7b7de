//! Car partonomy: 31 fine part labels, 13 aggregate labels, car types and
//! the four experimental components.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Center,
}

macro_rules! fine_parts {
    ($( $variant:ident = $id:literal, $name:literal, $side:ident, $agg:ident, $mirror:ident; )*) => {
        /// Fine-grained part label as produced by the segmenter. Ids run 1..=31;
        /// 0 is reserved for background.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        #[repr(u8)]
        pub enum FinePart {
            $( $variant = $id, )*
        }

        impl FinePart {
            pub const ALL: [FinePart; 31] = [ $( FinePart::$variant, )* ];

            pub fn name(self) -> &'static str {
                match self { $( FinePart::$variant => $name, )* }
            }

            pub fn side(self) -> Side {
                match self { $( FinePart::$variant => Side::$side, )* }
            }

            pub fn aggregate(self) -> AggregatePart {
                match self { $( FinePart::$variant => AggregatePart::$agg, )* }
            }

            /// Left/right counterpart; center parts map to themselves.
            pub fn mirror(self) -> FinePart {
                match self { $( FinePart::$variant => FinePart::$mirror, )* }
            }
        }
    };
}

fine_parts! {
    FrontLeftDoor = 1, "front-left-door", Left, Door, FrontRightDoor;
    FrontRightDoor = 2, "front-right-door", Right, Door, FrontLeftDoor;
    BackLeftDoor = 3, "back-left-door", Left, Door, BackRightDoor;
    BackRightDoor = 4, "back-right-door", Right, Door, BackLeftDoor;
    FrontLeftWindow = 5, "front-left-window", Left, Window, FrontRightWindow;
    FrontRightWindow = 6, "front-right-window", Right, Window, FrontLeftWindow;
    BackLeftWindow = 7, "back-left-window", Left, Window, BackRightWindow;
    BackRightWindow = 8, "back-right-window", Right, Window, BackLeftWindow;
    Windshield = 9, "windshield", Center, Windshield, Windshield;
    RearWindow = 10, "rear-window", Center, Window, RearWindow;
    Hood = 11, "hood", Center, Hood, Hood;
    Trunk = 12, "trunk", Center, Trunk, Trunk;
    Roof = 13, "roof", Center, Roof, Roof;
    LeftMirror = 14, "left-mirror", Left, Mirror, RightMirror;
    RightMirror = 15, "right-mirror", Right, Mirror, LeftMirror;
    FrontBumper = 16, "front-bumper", Center, Bumper, FrontBumper;
    RearBumper = 17, "rear-bumper", Center, Bumper, RearBumper;
    FrontLeftWheel = 18, "front-left-wheel", Left, Wheel, FrontRightWheel;
    FrontRightWheel = 19, "front-right-wheel", Right, Wheel, FrontLeftWheel;
    BackLeftWheel = 20, "back-left-wheel", Left, Wheel, BackRightWheel;
    BackRightWheel = 21, "back-right-wheel", Right, Wheel, BackLeftWheel;
    LeftHeadlight = 22, "left-headlight", Left, Headlight, RightHeadlight;
    RightHeadlight = 23, "right-headlight", Right, Headlight, LeftHeadlight;
    LeftTaillight = 24, "left-taillight", Left, Taillight, RightTaillight;
    RightTaillight = 25, "right-taillight", Right, Taillight, LeftTaillight;
    FrontPlate = 26, "front-plate", Center, Plate, FrontPlate;
    RearPlate = 27, "rear-plate", Center, Plate, RearPlate;
    Grille = 28, "grille", Center, Body, Grille;
    LeftBodyPanel = 29, "left-body-panel", Left, Body, RightBodyPanel;
    RightBodyPanel = 30, "right-body-panel", Right, Body, LeftBodyPanel;
    Chassis = 31, "chassis", Center, Body, Chassis;
}

impl FinePart {
    pub const COUNT: usize = 31;

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<FinePart> {
        match id {
            1..=31 => Some(FinePart::ALL[usize::from(id) - 1]),
            _ => None,
        }
    }

    /// Body panel on the given visible side.
    pub fn body_panel(near: Side) -> FinePart {
        match near {
            Side::Right => FinePart::RightBodyPanel,
            _ => FinePart::LeftBodyPanel,
        }
    }
}

impl fmt::Display for FinePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mirror a raw cell value: background stays 0, fine ids map to their counterpart.
#[inline]
pub fn mirror_cell(cell: u8) -> u8 {
    FinePart::from_id(cell).map_or(cell, |p| p.mirror().id())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
#[repr(u8)]
pub enum AggregatePart {
    Door = 1,
    Window = 2,
    Windshield = 3,
    Hood = 4,
    Trunk = 5,
    Roof = 6,
    Mirror = 7,
    Bumper = 8,
    Wheel = 9,
    Headlight = 10,
    Taillight = 11,
    Plate = 12,
    Body = 13,
}

impl AggregatePart {
    pub const COUNT: usize = 13;

    pub const ALL: [AggregatePart; 13] = [
        AggregatePart::Door,
        AggregatePart::Window,
        AggregatePart::Windshield,
        AggregatePart::Hood,
        AggregatePart::Trunk,
        AggregatePart::Roof,
        AggregatePart::Mirror,
        AggregatePart::Bumper,
        AggregatePart::Wheel,
        AggregatePart::Headlight,
        AggregatePart::Taillight,
        AggregatePart::Plate,
        AggregatePart::Body,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    /// Position in the 13-dim part block (id - 1).
    pub fn index(self) -> usize {
        usize::from(self.id()) - 1
    }

    pub fn from_id(id: u8) -> Option<AggregatePart> {
        match id {
            1..=13 => Some(AggregatePart::ALL[usize::from(id) - 1]),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AggregatePart::Door => "door",
            AggregatePart::Window => "window",
            AggregatePart::Windshield => "windshield",
            AggregatePart::Hood => "hood",
            AggregatePart::Trunk => "trunk",
            AggregatePart::Roof => "roof",
            AggregatePart::Mirror => "mirror",
            AggregatePart::Bumper => "bumper",
            AggregatePart::Wheel => "wheel",
            AggregatePart::Headlight => "headlight",
            AggregatePart::Taillight => "taillight",
            AggregatePart::Plate => "plate",
            AggregatePart::Body => "body",
        }
    }

    pub fn fine_members(self) -> impl Iterator<Item = FinePart> {
        FinePart::ALL
            .into_iter()
            .filter(move |p| p.aggregate() == self)
    }
}

impl fmt::Display for AggregatePart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fine id -> aggregate id lookup, indexed by raw cell value (0 stays 0).
pub(crate) const AGGREGATE_OF_CELL: [u8; 32] = {
    let mut table = [0u8; 32];
    let mut i = 0;
    while i < 31 {
        table[i + 1] = aggregate_id_const(i as u8 + 1);
        i += 1;
    }
    table
};

const fn aggregate_id_const(fine: u8) -> u8 {
    match fine {
        1..=4 => 1,
        5..=8 | 10 => 2,
        9 => 3,
        11 => 4,
        12 => 5,
        13 => 6,
        14 | 15 => 7,
        16 | 17 => 8,
        18..=21 => 9,
        22 | 23 => 10,
        24 | 25 => 11,
        26 | 27 => 12,
        28..=31 => 13,
        _ => 0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarType {
    Sedan,
    Suv,
    Wagon,
    Truck,
    Minivan,
}

impl CarType {
    pub const COUNT: usize = 5;
    pub const ALL: [CarType; 5] = [
        CarType::Sedan,
        CarType::Suv,
        CarType::Wagon,
        CarType::Truck,
        CarType::Minivan,
    ];
    /// Types shown to human participants.
    pub const EXPERIMENT: [CarType; 4] = [CarType::Sedan, CarType::Suv, CarType::Wagon, CarType::Truck];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            CarType::Sedan => "sedan",
            CarType::Suv => "suv",
            CarType::Wagon => "wagon",
            CarType::Truck => "truck",
            CarType::Minivan => "minivan",
        }
    }
}

impl fmt::Display for CarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Direction the car's front points in the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Left,
    Right,
}

impl Orientation {
    pub fn mirror(self) -> Orientation {
        match self {
            Orientation::Left => Orientation::Right,
            Orientation::Right => Orientation::Left,
        }
    }

    /// A car facing left shows its left flank to the camera.
    pub fn near_side(self) -> Side {
        match self {
            Orientation::Left => Side::Left,
            Orientation::Right => Side::Right,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Component {
    DoorWindow,
    HoodWindshield,
    TrunkBumper,
    HeadlightWheel,
}

impl Component {
    pub const ALL: [Component; 4] = [
        Component::DoorWindow,
        Component::HoodWindshield,
        Component::TrunkBumper,
        Component::HeadlightWheel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::DoorWindow => "door-window",
            Component::HoodWindshield => "hood-windshield",
            Component::TrunkBumper => "trunk-bumper",
            Component::HeadlightWheel => "headlight-wheel",
        }
    }

    pub fn members(self) -> [AggregatePart; 2] {
        match self {
            Component::DoorWindow => [AggregatePart::Door, AggregatePart::Window],
            Component::HoodWindshield => [AggregatePart::Hood, AggregatePart::Windshield],
            Component::TrunkBumper => [AggregatePart::Trunk, AggregatePart::Bumper],
            Component::HeadlightWheel => [AggregatePart::Headlight, AggregatePart::Wheel],
        }
    }

    pub fn contains_cell(self, cell: u8) -> bool {
        match AGGREGATE_OF_CELL.get(usize::from(cell)) {
            Some(&agg) if agg != 0 => self.members().iter().any(|m| m.id() == agg),
            _ => false,
        }
    }

    /// Fine parts that make up the depicted subregion. Bumpers and wheels
    /// exist at both ends of the car; the subregion is the rear bumper with
    /// the trunk and the front wheel with the headlight.
    pub fn region_parts(self) -> &'static [FinePart] {
        use FinePart::*;
        match self {
            Component::DoorWindow => &[
                FrontLeftDoor,
                FrontRightDoor,
                BackLeftDoor,
                BackRightDoor,
                FrontLeftWindow,
                FrontRightWindow,
                BackLeftWindow,
                BackRightWindow,
            ],
            Component::HoodWindshield => &[Hood, Windshield],
            Component::TrunkBumper => &[Trunk, RearBumper],
            Component::HeadlightWheel => &[
                LeftHeadlight,
                RightHeadlight,
                FrontLeftWheel,
                FrontRightWheel,
            ],
        }
    }

    pub fn region_contains_cell(self, cell: u8) -> bool {
        self.region_parts().iter().any(|p| p.id() == cell)
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Part,
    Piece,
}

impl Granularity {
    pub const ALL: [Granularity; 2] = [Granularity::Part, Granularity::Piece];

    pub fn swapped(self) -> Granularity {
        match self {
            Granularity::Part => Granularity::Piece,
            Granularity::Piece => Granularity::Part,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Granularity::Part => "part",
            Granularity::Piece => "piece",
        }
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
