//! Voxel shape catalog.
//!
//! Every shape is built from a [`ShapeSize`] and an integer origin. Box-like
//! shapes treat the origin as their minimum corner; round shapes (sphere,
//! spherical shell, circle, disk, dome, ellipsoid) are centered on it; a
//! hole hangs downward from it. Flat shapes lie in the vertical `xy` plane
//! except circle and disk, which lie flat in the `xz` plane.
//!
//! Hollow variants are the outer shape minus its strict interior, where a
//! cell is interior when all of its 26 neighbors (8 in-plane neighbors for
//! flat shapes) belong to the outer shape. This keeps every shell connected
//! under the 6-neighborhood.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Cell;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShapeError {
    #[error("unknown shape {0:?}")]
    Unknown(String),
    #[error("illegal size {size:?} for shape {shape}")]
    IllegalSize { shape: Shape, size: ShapeSize },
}

pub const MAX_EXTENT: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Hole,
    Cube,
    HollowCube,
    Rectanguloid,
    HollowRectanguloid,
    Sphere,
    SphericalShell,
    Pyramid,
    Square,
    Rectangle,
    Circle,
    Disk,
    Triangle,
    Dome,
    Arch,
    Ellipsoid,
    HollowTriangle,
    HollowRectangle,
    RectanguloidFrame,
}

impl Shape {
    pub const ALL: [Shape; 19] = [
        Shape::Hole,
        Shape::Cube,
        Shape::HollowCube,
        Shape::Rectanguloid,
        Shape::HollowRectanguloid,
        Shape::Sphere,
        Shape::SphericalShell,
        Shape::Pyramid,
        Shape::Square,
        Shape::Rectangle,
        Shape::Circle,
        Shape::Disk,
        Shape::Triangle,
        Shape::Dome,
        Shape::Arch,
        Shape::Ellipsoid,
        Shape::HollowTriangle,
        Shape::HollowRectangle,
        Shape::RectanguloidFrame,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Hole => "hole",
            Shape::Cube => "cube",
            Shape::HollowCube => "hollow_cube",
            Shape::Rectanguloid => "rectanguloid",
            Shape::HollowRectanguloid => "hollow_rectanguloid",
            Shape::Sphere => "sphere",
            Shape::SphericalShell => "spherical_shell",
            Shape::Pyramid => "pyramid",
            Shape::Square => "square",
            Shape::Rectangle => "rectangle",
            Shape::Circle => "circle",
            Shape::Disk => "disk",
            Shape::Triangle => "triangle",
            Shape::Dome => "dome",
            Shape::Arch => "arch",
            Shape::Ellipsoid => "ellipsoid",
            Shape::HollowTriangle => "hollow_triangle",
            Shape::HollowRectangle => "hollow_rectangle",
            Shape::RectanguloidFrame => "rectanguloid_frame",
        }
    }

    /// Which components of [`ShapeSize`] the shape reads.
    pub fn dims_used(self) -> [bool; 3] {
        match self {
            Shape::Cube
            | Shape::HollowCube
            | Shape::Sphere
            | Shape::SphericalShell
            | Shape::Pyramid
            | Shape::Square
            | Shape::Circle
            | Shape::Disk
            | Shape::Triangle
            | Shape::HollowTriangle
            | Shape::Dome => [true, false, false],
            Shape::Rectangle | Shape::HollowRectangle | Shape::Arch => [true, true, false],
            Shape::Hole
            | Shape::Rectanguloid
            | Shape::HollowRectanguloid
            | Shape::RectanguloidFrame
            | Shape::Ellipsoid => [true, true, true],
        }
    }

    /// Draw a size suited to a small world.
    pub fn random_size<R: Rng + ?Sized>(self, rng: &mut R, max_depth: i32) -> ShapeSize {
        let side = |rng: &mut R| rng.gen_range(2..=4);
        let radius = |rng: &mut R| rng.gen_range(1..=3);
        match self {
            Shape::Hole => ShapeSize::new(
                rng.gen_range(1..=3),
                rng.gen_range(1..=max_depth.max(1)),
                rng.gen_range(1..=3),
            ),
            Shape::Sphere
            | Shape::SphericalShell
            | Shape::Circle
            | Shape::Disk
            | Shape::Dome => ShapeSize::uniform(radius(rng)),
            Shape::Ellipsoid => ShapeSize::new(radius(rng), radius(rng), radius(rng)),
            Shape::Pyramid | Shape::Triangle | Shape::HollowTriangle => {
                ShapeSize::uniform(rng.gen_range(3..=5))
            }
            Shape::Arch => ShapeSize::new(rng.gen_range(3..=5), rng.gen_range(2..=4), 1),
            Shape::Cube | Shape::HollowCube | Shape::Square => ShapeSize::uniform(side(rng)),
            _ => ShapeSize::new(side(rng), side(rng), side(rng)),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Shape {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Shape::ALL
            .into_iter()
            .find(|shape| shape.as_str() == s)
            .ok_or_else(|| ShapeError::Unknown(s.to_string()))
    }
}

/// Shape extents. Side-length shapes read `x`; radial shapes read `x` as
/// the radius (ellipsoid reads all three radii); rectangles and arches read
/// width `x` and height `y`; holes read footprint `x` by `z` and depth `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ShapeSize {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl ShapeSize {
    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    pub const fn uniform(s: i32) -> Self {
        Self { x: s, y: s, z: s }
    }
}

/// Build the voxel set of `shape` at `origin`.
pub fn make_shape(shape: Shape, size: ShapeSize, origin: Cell) -> Result<BTreeSet<Cell>, ShapeError> {
    let used = shape.dims_used();
    let dims = [size.x, size.y, size.z];
    if dims
        .iter()
        .zip(used)
        .any(|(&d, u)| u && !(1..=MAX_EXTENT).contains(&d))
    {
        return Err(ShapeError::IllegalSize { shape, size });
    }
    let local = match shape {
        Shape::Hole => boxed(size.x, size.y, size.z)
            .into_iter()
            .map(|[x, y, z]| [x, -y, z])
            .collect(),
        Shape::Cube => boxed(size.x, size.x, size.x),
        Shape::HollowCube => box_faces(size.x, size.x, size.x),
        Shape::Rectanguloid => boxed(size.x, size.y, size.z),
        Shape::HollowRectanguloid => box_faces(size.x, size.y, size.z),
        Shape::RectanguloidFrame => box_edges(size.x, size.y, size.z),
        Shape::Sphere => ball(size.x),
        Shape::SphericalShell => hollow(&ball(size.x), &NEIGHBORS_26),
        Shape::Dome => hollow(&ball(size.x), &NEIGHBORS_26)
            .into_iter()
            .filter(|c| c[1] >= 0)
            .collect(),
        Shape::Ellipsoid => ellipsoid(size.x, size.y, size.z),
        Shape::Pyramid => pyramid(size.x),
        Shape::Square => boxed(size.x, size.x, 1),
        Shape::Rectangle => boxed(size.x, size.y, 1),
        Shape::HollowRectangle => hollow(&boxed(size.x, size.y, 1), &NEIGHBORS_XY),
        Shape::Triangle => triangle(size.x),
        Shape::HollowTriangle => hollow(&triangle(size.x), &NEIGHBORS_XY),
        Shape::Disk => disk(size.x),
        Shape::Circle => hollow(&disk(size.x), &NEIGHBORS_XZ),
        Shape::Arch => arch(size.x, size.y),
    };
    Ok(local
        .into_iter()
        .map(|[x, y, z]| [x + origin[0], y + origin[1], z + origin[2]])
        .collect())
}

/// Build a shape from its catalog word.
pub fn make_named_shape(word: &str, size: ShapeSize, origin: Cell) -> Result<BTreeSet<Cell>, ShapeError> {
    make_shape(word.parse()?, size, origin)
}

fn boxed(w: i32, h: i32, d: i32) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for x in 0..w {
        for y in 0..h {
            for z in 0..d {
                out.insert([x, y, z]);
            }
        }
    }
    out
}

/// Union of the six faces.
fn box_faces(w: i32, h: i32, d: i32) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for a in 0..w {
        for b in 0..h {
            out.insert([a, b, 0]);
            out.insert([a, b, d - 1]);
        }
        for c in 0..d {
            out.insert([a, 0, c]);
            out.insert([a, h - 1, c]);
        }
    }
    for b in 0..h {
        for c in 0..d {
            out.insert([0, b, c]);
            out.insert([w - 1, b, c]);
        }
    }
    out
}

/// Union of the twelve edges.
fn box_edges(w: i32, h: i32, d: i32) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for x in 0..w {
        for (y, z) in [(0, 0), (h - 1, 0), (0, d - 1), (h - 1, d - 1)] {
            out.insert([x, y, z]);
        }
    }
    for y in 0..h {
        for (x, z) in [(0, 0), (w - 1, 0), (0, d - 1), (w - 1, d - 1)] {
            out.insert([x, y, z]);
        }
    }
    for z in 0..d {
        for (x, y) in [(0, 0), (w - 1, 0), (0, h - 1), (w - 1, h - 1)] {
            out.insert([x, y, z]);
        }
    }
    out
}

fn isqrt(n: i64) -> i64 {
    if n < 0 {
        return -1;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Cells within Euclidean distance `r` of the origin, built column by column.
fn ball(r: i32) -> BTreeSet<Cell> {
    let r2 = (r as i64) * (r as i64);
    let mut out = BTreeSet::new();
    for x in -r..=r {
        for y in -r..=r {
            let rest = r2 - (x as i64).pow(2) - (y as i64).pow(2);
            let span = isqrt(rest) as i32;
            for z in -span..=span {
                out.insert([x, y, z]);
            }
        }
    }
    out
}

fn ellipsoid(a: i32, b: i32, c: i32) -> BTreeSet<Cell> {
    let (a2, b2, c2) = ((a as i64).pow(2), (b as i64).pow(2), (c as i64).pow(2));
    let mut out = BTreeSet::new();
    for x in -a..=a {
        for y in -b..=b {
            // z^2 a^2 b^2 <= a^2 b^2 c^2 - x^2 b^2 c^2 - y^2 a^2 c^2
            let rest = a2 * b2 * c2 - (x as i64).pow(2) * b2 * c2 - (y as i64).pow(2) * a2 * c2;
            if rest < 0 {
                continue;
            }
            let span = isqrt(rest / (a2 * b2)) as i32;
            for z in -span..=span {
                out.insert([x, y, z]);
            }
        }
    }
    out
}

fn disk(r: i32) -> BTreeSet<Cell> {
    let r2 = (r as i64).pow(2);
    let mut out = BTreeSet::new();
    for x in -r..=r {
        let span = isqrt(r2 - (x as i64).pow(2)) as i32;
        for z in -span..=span {
            out.insert([x, 0, z]);
        }
    }
    out
}

fn pyramid(base: i32) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    let mut layer = 0;
    while layer <= base - 1 - layer {
        for x in layer..=base - 1 - layer {
            for z in layer..=base - 1 - layer {
                out.insert([x, layer, z]);
            }
        }
        layer += 1;
    }
    out
}

fn triangle(base: i32) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    let mut row = 0;
    while row <= base - 1 - row {
        for x in row..=base - 1 - row {
            out.insert([x, row, 0]);
        }
        row += 1;
    }
    out
}

/// Two pillars of height `h` joined by a lintel on top.
fn arch(w: i32, h: i32) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for y in 0..h {
        out.insert([0, y, 0]);
        out.insert([w - 1, y, 0]);
    }
    for x in 0..w {
        out.insert([x, h, 0]);
    }
    out
}

const fn neighborhood_26() -> [Cell; 26] {
    let mut out = [[0; 3]; 26];
    let mut i = 0;
    let mut x = -1;
    while x <= 1 {
        let mut y = -1;
        while y <= 1 {
            let mut z = -1;
            while z <= 1 {
                if !(x == 0 && y == 0 && z == 0) {
                    out[i] = [x, y, z];
                    i += 1;
                }
                z += 1;
            }
            y += 1;
        }
        x += 1;
    }
    out
}

const NEIGHBORS_26: [Cell; 26] = neighborhood_26();
const NEIGHBORS_XY: [Cell; 8] = [
    [-1, -1, 0],
    [-1, 0, 0],
    [-1, 1, 0],
    [0, -1, 0],
    [0, 1, 0],
    [1, -1, 0],
    [1, 0, 0],
    [1, 1, 0],
];
const NEIGHBORS_XZ: [Cell; 8] = [
    [-1, 0, -1],
    [-1, 0, 0],
    [-1, 0, 1],
    [0, 0, -1],
    [0, 0, 1],
    [1, 0, -1],
    [1, 0, 0],
    [1, 0, 1],
];

fn hollow(outer: &BTreeSet<Cell>, neighbors: &[Cell]) -> BTreeSet<Cell> {
    outer
        .iter()
        .filter(|c| {
            neighbors
                .iter()
                .any(|n| !outer.contains(&[c[0] + n[0], c[1] + n[1], c[2] + n[2]]))
        })
        .copied()
        .collect()
}

/// True when `cells` is connected under the 6-neighborhood.
pub fn is_face_connected(cells: &BTreeSet<Cell>) -> bool {
    let Some(&start) = cells.iter().next() else {
        return false;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        for d in [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]] {
            let n = [c[0] + d[0], c[1] + d[1], c[2] + d[2]];
            if cells.contains(&n) && seen.insert(n) {
                stack.push(n);
            }
        }
    }
    seen.len() == cells.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_word_examples() {
        assert_eq!(make_named_shape("cube", ShapeSize::uniform(3), [0, 0, 0]).unwrap().len(), 27);
        assert_eq!(make_named_shape("hollow_cube", ShapeSize::uniform(3), [0, 0, 0]).unwrap().len(), 26);
        assert_eq!(make_named_shape("sphere", ShapeSize::uniform(1), [0, 0, 0]).unwrap().len(), 7);
        assert_eq!(
            make_named_shape("blob", ShapeSize::uniform(1), [0, 0, 0]).unwrap_err(),
            ShapeError::Unknown("blob".into())
        );
    }

    #[test]
    fn rejects_illegal_sizes() {
        assert!(matches!(
            make_shape(Shape::Cube, ShapeSize::uniform(0), [0, 0, 0]),
            Err(ShapeError::IllegalSize { .. })
        ));
        // Unused dimensions are ignored.
        assert!(make_shape(Shape::Cube, ShapeSize::new(2, 0, 0), [0, 0, 0]).is_ok());
    }

    #[test]
    fn origin_translates() {
        let a = make_shape(Shape::Pyramid, ShapeSize::uniform(3), [0, 0, 0]).unwrap();
        let b = make_shape(Shape::Pyramid, ShapeSize::uniform(3), [4, 5, 6]).unwrap();
        let shifted: BTreeSet<Cell> = a.iter().map(|c| [c[0] + 4, c[1] + 5, c[2] + 6]).collect();
        assert_eq!(shifted, b);
    }

    #[test]
    fn hole_hangs_down_from_origin() {
        let h = make_shape(Shape::Hole, ShapeSize::new(2, 3, 2), [5, 2, 5]).unwrap();
        assert_eq!(h.len(), 12);
        assert!(h.iter().all(|c| (0..=2).contains(&c[1])));
    }

    #[test]
    fn every_shape_is_face_connected() {
        for shape in Shape::ALL {
            for s in 1..=4 {
                let cells = make_shape(shape, ShapeSize::new(s, s + 1, s), [0, 0, 0]).unwrap();
                assert!(!cells.is_empty(), "{shape} {s}");
                assert!(is_face_connected(&cells), "{shape} size {s} not connected");
            }
        }
    }
}
