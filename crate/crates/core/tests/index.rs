mod common;

use common::{field, flat, map_of, merge};
use patchnav::index::{locate_cell, locate_patch, shares_vertices, trace_patch};
use patchnav::{MeshIndex, Part};

#[test]
fn hint_inside_its_own_part_is_returned() {
    let map = map_of(&flat(1.8));
    let hint = locate_patch(&map, 0.1, 0.05, None, 0.0).unwrap();
    assert_eq!(map.patch(hint).home, MeshIndex::new(0, 0, Part::Down));
    assert_eq!(locate_patch(&map, 0.5, 0.2, Some(hint), 0.0), Some(hint));
}

#[test]
fn crossing_into_the_next_cell_lands_on_the_edge_neighbour() {
    let map = map_of(&field(1.8, |x, y| Some(0.1 * x + 0.05 * y * y)));
    let res = map.params().res_m;
    let one = locate_patch(&map, 0.4, 0.1, None, 0.0).unwrap();
    assert_eq!(map.patch(one).home, MeshIndex::new(0, 0, Part::Down));
    // Step just past the cell's right edge.
    let (x, y) = (res + 0.02, 0.1);
    assert_eq!(locate_cell(x, y, res), MeshIndex::new(1, 0, Part::Up));
    let two = locate_patch(&map, x, y, Some(one), 0.0).unwrap();
    assert_eq!(map.patch(two).home, MeshIndex::new(1, 0, Part::Up));
    let (p1, p2) = (map.patch(one), map.patch(two));
    let shared = p1
        .vertices
        .iter()
        .filter(|v| p2.vertices.contains(v))
        .count();
    assert_eq!(shared, 2);
}

#[test]
fn point_over_a_hole_is_not_found() {
    let map = map_of(&field(1.8, |x, y| {
        (x.abs() > 0.9 || y.abs() > 0.9).then_some(0.0)
    }));
    assert_eq!(locate_patch(&map, 0.1, 0.05, None, 0.0), None);
    let edge = locate_patch(&map, -1.4, 0.05, None, 0.0).unwrap();
    assert_eq!(trace_patch(&map, edge, (-1.4, 0.05), (0.1, 0.05)), None);
}

#[test]
fn reference_height_selects_the_level() {
    let map = map_of(&merge([flat(1.8), field(1.8, |_, _| Some(3.0))]));
    let low = locate_patch(&map, 0.1, 0.05, None, 0.4).unwrap();
    let high = locate_patch(&map, 0.1, 0.05, None, 2.0).unwrap();
    assert_eq!(map.patch(low).z_at(0.1, 0.05), 0.0);
    assert_eq!(map.patch(high).z_at(0.1, 0.05), 3.0);
    // A hinted walk stays on the hint's level.
    let walked = trace_patch(&map, high, (0.1, 0.05), (-1.0, 0.7)).unwrap();
    assert_eq!(map.patch(walked).level, map.patch(high).level);
}

#[test]
fn vertex_sharing_examples() {
    let map = map_of(&flat(1.8));
    let at = |m, n, part| &map.cell_patches(MeshIndex::new(m, n, part))[0];
    let (down, up) = (at(0, 0, Part::Down), at(0, 0, Part::Up));
    assert!(shares_vertices(down, down));
    assert!(shares_vertices(down, up));
    let res = map.params().res_m;
    for corner in [(0.0, 0.0), (res, res)] {
        assert!(down.vertices.iter().any(|v| (v.x, v.y) == corner));
        assert!(up.vertices.iter().any(|v| (v.x, v.y) == corner));
    }
    assert!(!shares_vertices(down, at(2, 0, Part::Down)));
    assert!(shares_vertices(down, at(1, 1, Part::Up)));
}
