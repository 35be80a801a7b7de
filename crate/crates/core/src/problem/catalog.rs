use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Result;
use crate::scene::{
    extract_subregion, render_whole_car, CarType, Component, Granularity, Orientation, SceneSpec,
    SharedMap, SubregionSpec,
};

/// Every whole-car render and subregion crop, built once and shared.
#[derive(Debug, Clone)]
pub struct SceneCatalog {
    wholes: HashMap<SceneSpec, SharedMap>,
    crops: HashMap<(CarType, Orientation, Component, Granularity), SharedMap>,
}

impl SceneCatalog {
    pub fn build() -> Result<Self> {
        let mut wholes = HashMap::new();
        let mut crops = HashMap::new();
        for car in CarType::ALL {
            for facing in [Orientation::Left, Orientation::Right] {
                let spec = SceneSpec::new(car, facing);
                let whole = Arc::new(render_whole_car(&spec));
                for component in Component::ALL {
                    let hidden = spec.occluding(component);
                    wholes.insert(hidden, Arc::new(render_whole_car(&hidden)));
                    for granularity in Granularity::ALL {
                        let sub = SubregionSpec {
                            component,
                            granularity,
                        };
                        let crop = extract_subregion(&whole, sub, facing)?;
                        crops.insert((car, facing, component, granularity), Arc::new(crop));
                    }
                }
                wholes.insert(spec, whole);
            }
        }
        Ok(Self { wholes, crops })
    }

    pub fn whole(&self, spec: &SceneSpec) -> SharedMap {
        Arc::clone(&self.wholes[spec])
    }

    pub fn subregion(
        &self,
        car: CarType,
        facing: Orientation,
        component: Component,
        granularity: Granularity,
    ) -> SharedMap {
        Arc::clone(&self.crops[&(car, facing, component, granularity)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_crops_are_pairwise_distinct() {
        let cat = SceneCatalog::build().unwrap();
        let maps: Vec<_> = cat.crops.iter().collect();
        for (i, (ka, a)) in maps.iter().enumerate() {
            for (kb, b) in &maps[i + 1..] {
                assert_ne!(a, b, "{ka:?} and {kb:?} render the same crop");
            }
        }
    }
}
