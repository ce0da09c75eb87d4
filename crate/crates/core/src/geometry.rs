//! Vectors, poses and the egocentric coordinate frame.
//!
//! Frame convention: `y` is up. Yaw 0 faces `+z`; yaw increases toward `-x`.
//!
//! ```text
//! look  = (-sin(yaw) cos(pitch), -sin(pitch), cos(yaw) cos(pitch))
//! right = horizontal(look x up), normalized = (-cos(yaw), 0, -sin(yaw))
//! ```
//!
//! Positive pitch looks down.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// An integer voxel cell.
pub type Cell = [i32; 3];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };
    pub const UP: Vec3 = Vec3 { x: 0.0, y: 1.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_cell(c: Cell) -> Self {
        Self::new(c[0] as f64, c[1] as f64, c[2] as f64)
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Drop the vertical component.
    pub fn horizontal(self) -> Vec3 {
        Vec3::new(self.x, 0.0, self.z)
    }

    pub fn axis(self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    /// The cell containing this point.
    pub fn cell(self) -> Cell {
        [
            self.x.floor() as i32,
            self.y.floor() as i32,
            self.z.floor() as i32,
        ]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Egocentric horizontal direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Left, Direction::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Left => "left",
            Direction::Right => "right",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "left" => Some(Direction::Left),
            "right" => Some(Direction::Right),
            _ => None,
        }
    }

    /// Unit horizontal vector for this direction as seen from `yaw_deg`.
    pub fn vector(self, yaw_deg: f64) -> Vec3 {
        let r = right_vector(yaw_deg);
        match self {
            Direction::Right => r,
            Direction::Left => -r,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unit view vector.
pub fn look_vector(yaw_deg: f64, pitch_deg: f64) -> Vec3 {
    let (yaw, pitch) = (yaw_deg.to_radians(), pitch_deg.to_radians());
    Vec3::new(
        -yaw.sin() * pitch.cos(),
        -pitch.sin(),
        yaw.cos() * pitch.cos(),
    )
}

/// Unit horizontal right vector. Independent of pitch, so it stays defined
/// when looking straight up or down.
pub fn right_vector(yaw_deg: f64) -> Vec3 {
    let yaw = yaw_deg.to_radians();
    Vec3::new(-yaw.cos(), 0.0, -yaw.sin())
}

/// Yaw (degrees, `[0, 360)`) that faces along the horizontal heading `d`.
pub fn heading_yaw(d: Vec3) -> f64 {
    normalize_yaw((-d.x).atan2(d.z).to_degrees())
}

pub fn normalize_yaw(yaw: f64) -> f64 {
    let y = yaw.rem_euclid(360.0);
    if y >= 360.0 {
        0.0
    } else {
        y
    }
}

/// Position plus view orientation of an animate entity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// Degrees, clamped to `[-90, 90]`.
    pub pitch: f64,
    /// Degrees, normalized to `[0, 360)`.
    pub yaw: f64,
}

impl Pose {
    pub fn new(position: Vec3, pitch: f64, yaw: f64) -> Self {
        Self {
            x: position.x,
            y: position.y,
            z: position.z,
            pitch: pitch.clamp(-90.0, 90.0),
            yaw: normalize_yaw(yaw),
        }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn set_position(&mut self, p: Vec3) {
        self.x = p.x;
        self.y = p.y;
        self.z = p.z;
    }

    pub fn look(&self) -> Vec3 {
        look_vector(self.yaw, self.pitch)
    }

    pub fn right(&self) -> Vec3 {
        right_vector(self.yaw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Vec3, b: Vec3) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn yaw_zero_faces_plus_z_with_right_minus_x() {
        assert!(close(look_vector(0.0, 0.0), Vec3::new(0.0, 0.0, 1.0)));
        assert!(close(right_vector(0.0), Vec3::new(-1.0, 0.0, 0.0)));
    }

    #[test]
    fn right_is_normalized_horizontal_cross_product() {
        for yaw in [0.0, 17.0, 90.0, 181.5, 270.0, 359.0] {
            for pitch in [-60.0, 0.0, 33.0] {
                let c = look_vector(yaw, pitch).cross(Vec3::UP).horizontal();
                let c = c * (1.0 / c.norm());
                assert!(close(c, right_vector(yaw)), "yaw {yaw} pitch {pitch}");
            }
        }
    }

    #[test]
    fn heading_yaw_inverts_look() {
        for yaw in [0.0, 45.0, 90.0, 200.0, 359.5] {
            let l = look_vector(yaw, 0.0);
            assert!((heading_yaw(l) - yaw).abs() < 1e-9);
        }
    }

    #[test]
    fn pose_normalizes_angles() {
        let p = Pose::new(Vec3::ZERO, 120.0, -90.0);
        assert_eq!(p.pitch, 90.0);
        assert_eq!(p.yaw, 270.0);
        assert_eq!(Pose::new(Vec3::ZERO, 0.0, 720.0).yaw, 0.0);
        assert_eq!(normalize_yaw(-1e-30), 0.0);
    }
}
