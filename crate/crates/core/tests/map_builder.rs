mod common;

use std::collections::HashSet;

use common::{field, flat, map_of, merge, params, RES_PC};
use patchnav::map::io::{read_json, write_json, write_obj};
use patchnav::{Part, Point3, PointCloud};

#[test]
fn flat_plane_gives_two_patches_per_mesh_cell() {
    // Map cells -3..=3 on each axis carry points, so mesh cells -3..=2.
    let map = map_of(&flat(1.8));
    assert_eq!(map.len(), 72);
    assert_eq!(map.traversable_count(), 72);
    let mut homes = HashSet::new();
    for p in map.patches() {
        assert!(p.vertices.iter().all(|v| v.z == 0.0));
        assert_eq!(p.level, 0);
        assert!(homes.insert((p.home.m, p.home.n, p.home.part)));
    }
    for m in -3..=2 {
        for n in -3..=2 {
            assert!(homes.contains(&(m, n, Part::Down)) && homes.contains(&(m, n, Part::Up)));
        }
    }
    assert_eq!(map.mesh_bounds(), Some(((-3, -3), (2, 2))));
}

#[test]
fn patch_vertices_sit_at_map_cell_centers() {
    let map = map_of(&field(1.8, |x, y| Some(0.1 * x - 0.05 * y)));
    let res = map.params().res_m;
    for p in map.patches() {
        for v in &p.vertices {
            let (m, n) = ((v.x / res).round(), (v.y / res).round());
            assert!((v.x - m * res).abs() < 1e-12 && (v.y - n * res).abs() < 1e-12);
        }
    }
}

#[test]
fn two_separated_planes_give_two_levels() {
    let sep = 2.0 * params().thr_slice;
    let cloud = merge([flat(1.8), field(1.8, |_, _| Some(sep))]);
    let map = map_of(&cloud);
    assert_eq!(map.len(), 144);
    for p in map.patches() {
        let z = if p.level == 0 { 0.0 } else { sep };
        assert!(p.level < 2);
        assert!(p.vertices.iter().all(|v| v.z == z), "{:?}", p.vertices);
        for &q in map.neighbors(p.id) {
            assert_eq!(map.patch(q).level, p.level);
        }
    }
    let lower = map.component(map.patches()[0].id);
    let upper = map.component(map.patches()[1].id);
    assert!(lower.is_some() && upper.is_some() && lower != upper);
}

#[test]
fn patches_next_to_a_wall_are_steep() {
    let wall: Vec<Point3> = (-9..=9)
        .flat_map(|j| (1..=5).map(move |k| Point3::new(0.0, j as f64 * RES_PC, k as f64 * RES_PC)))
        .collect();
    let cloud = merge([flat(1.8), PointCloud::new(wall)]);
    let map = map_of(&cloud);
    let res = map.params().res_m;
    let mut steep = 0;
    for p in map.patches() {
        let on_wall = p.vertices.iter().any(|v| v.x.abs() < 1e-9);
        if on_wall {
            // One or two corners on the 1 m wall top, the rest on the floor.
            let rise = p.vertices.iter().map(|v| v.z).fold(0.0, f64::max);
            assert!((rise - 1.0).abs() < 1e-12);
            assert!(p.slope_deg() >= (1.0 / (res * 2f64.sqrt())).atan().to_degrees() - 1e-9);
            assert!(!p.traversable);
            steep += 1;
        } else {
            assert!(p.traversable);
        }
    }
    assert_eq!(steep, 2 * 2 * 6);
}

#[test]
fn inclined_plane_slope_is_recovered() {
    for deg in [5.0f64, 15.0, 25.0, 35.0] {
        let t = deg.to_radians().tan();
        // Every map cell sees a symmetric 3x3 block of points.
        let map = map_of(&field(3.2, |x, y| Some(t * (0.6 * x + 0.8 * y))));
        assert!(!map.is_empty());
        for p in map.patches() {
            assert!(
                (p.slope_deg() - deg).abs() < 2.0,
                "{deg}: {}",
                p.slope_deg()
            );
            assert!(p.traversable);
        }
    }
    let t = 50f64.to_radians().tan();
    let map = map_of(&field(3.2, |x, _| Some(t * x)));
    assert!(map.patches().iter().all(|p| !p.traversable));
}

#[test]
fn connected_patches_respect_the_vertical_gap() {
    // Terraces two map cells wide, 0.5 m apart: more than the connect
    // distance, so no patch may bridge two terraces.
    let map = map_of(&field(3.0, |x, _| Some(0.5 * ((x + 0.3) / 1.2).floor())));
    let gap = params().connect_distance();
    assert!(gap < 0.5);
    for p in map.patches() {
        let zs: Vec<f64> = p.vertices.iter().map(|v| v.z).collect();
        let span = zs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - zs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(span <= gap + 1e-9, "{:?}", p.vertices);
    }
    let components: HashSet<u32> = map
        .patches()
        .iter()
        .filter_map(|p| map.component(p.id))
        .collect();
    assert_eq!(components.len(), 5);
}

#[test]
fn build_is_deterministic_and_json_round_trips() {
    let cloud = common::uneven_scene().generate();
    let (a, b) = (map_of(&cloud), map_of(&cloud));
    let dump = |m: &patchnav::MultiLevelMap| {
        let mut json = Vec::new();
        write_json(m, &mut json).unwrap();
        let mut obj = Vec::new();
        write_obj(m, &mut obj).unwrap();
        (json, obj)
    };
    let (ja, oa) = dump(&a);
    assert_eq!((ja.clone(), oa), dump(&b));
    let back = read_json(ja.as_slice()).unwrap();
    assert_eq!(back.patches(), a.patches());
    for p in a.patches() {
        assert_eq!(back.neighbors(p.id), a.neighbors(p.id));
    }
}

#[test]
fn empty_cloud_gives_empty_map() {
    let map = map_of(&PointCloud::new(vec![Point3::new(0.0, 0.0, 0.0)]));
    assert!(map.is_empty());
    assert_eq!(map.mesh_bounds(), None);
}
