#![allow(dead_code)]

use patchnav::cloud::scenes::{DeckScene, PillarScene, SpiralScene, UnevenScene};
use patchnav::map::build_map;
use patchnav::{MapParams, MultiLevelMap, PointCloud};

pub const RES_PC: f64 = 0.2;

pub fn params() -> MapParams {
    MapParams::for_resolution(RES_PC)
}

pub fn spiral_scene(noise_sigma: f64) -> SpiralScene {
    SpiralScene {
        noise_sigma,
        seed: 7,
        ..SpiralScene::new(10.0, 4.0, 2.0, 4.0, RES_PC)
    }
}

pub fn uneven_scene() -> UnevenScene {
    UnevenScene::new(20.0, RES_PC, 1.2, 3, 3)
}

pub fn deck_scene() -> DeckScene {
    DeckScene {
        extent: 16.0,
        res_pc: RES_PC,
        deck_min: (-3.0, -3.0),
        deck_max: (3.0, 3.0),
        deck_height: 3.0,
    }
}

pub fn pillar_scene() -> PillarScene {
    PillarScene {
        extent: 12.0,
        res_pc: RES_PC,
        corner: (-0.8, -0.8),
        side: 2.0,
        wall_height: 1.5,
    }
}

pub fn map_of(cloud: &PointCloud) -> MultiLevelMap {
    build_map(cloud, &params()).expect("valid parameters")
}

/// Named test scenes with their maps.
pub fn scenes() -> Vec<(&'static str, PointCloud, MultiLevelMap)> {
    let clouds = [
        ("spiral", spiral_scene(0.02).generate()),
        ("uneven", uneven_scene().generate()),
        ("deck", deck_scene().generate()),
        ("pillar", pillar_scene().generate()),
    ];
    clouds
        .into_iter()
        .map(|(name, cloud)| {
            let map = map_of(&cloud);
            (name, cloud, map)
        })
        .collect()
}

/// A height field sampled on the `RES_PC` grid over `[-half, half]^2`.
pub fn field(half: f64, height: impl Fn(f64, f64) -> Option<f64>) -> PointCloud {
    patchnav::cloud::scenes::sample_height_field((-half, half), (-half, half), RES_PC, height)
}

pub fn flat(half: f64) -> PointCloud {
    field(half, |_, _| Some(0.0))
}

pub fn merge(clouds: impl IntoIterator<Item = PointCloud>) -> PointCloud {
    let points = clouds.into_iter().flat_map(|c| c.points).collect();
    PointCloud::new(points).with_resolution(RES_PC)
}
