//! Small fixed-size vector and box types.

use std::ops::{Add, Mul, Neg, Sub};

use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        Self::new(T::lit(x), T::lit(y), T::lit(z))
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    #[inline]
    pub fn cross(self, other: Self) -> Self {
        Self::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    #[inline]
    pub fn norm_sq(self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> T {
        self.norm_sq().sqrt()
    }

    /// Unit vector in the same direction. Zero vectors stay zero.
    pub fn normalized(self) -> Self {
        let n = self.norm();
        if n > T::zero() {
            self * (T::one() / n)
        } else {
            self
        }
    }

    #[inline]
    pub fn get(self, axis: usize) -> T {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

/// Orthonormal basis used to express local directions in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<T> {
    pub x: Vec3<T>,
    pub y: Vec3<T>,
    pub z: Vec3<T>,
}

impl<T: Real> Frame<T> {
    pub fn world() -> Self {
        Self {
            x: Vec3::new(T::one(), T::zero(), T::zero()),
            y: Vec3::new(T::zero(), T::one(), T::zero()),
            z: Vec3::new(T::zero(), T::zero(), T::one()),
        }
    }

    /// Frame whose local x axis is world +y (across the cabin), z stays up.
    pub fn across_cabin() -> Self {
        Self {
            x: Vec3::new(T::zero(), T::one(), T::zero()),
            y: Vec3::new(-T::one(), T::zero(), T::zero()),
            z: Vec3::new(T::zero(), T::zero(), T::one()),
        }
    }

    #[inline]
    pub fn to_world(&self, local: Vec3<T>) -> Vec3<T> {
        self.x * local.x + self.y * local.y + self.z * local.z
    }

    #[inline]
    pub fn to_local(&self, world: Vec3<T>) -> Vec3<T> {
        Vec3::new(world.dot(self.x), world.dot(self.y), world.dot(self.z))
    }
}

/// Axis-aligned box. Occlusion treats it as an open set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Real> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Self { min, max }
    }

    /// True iff the open segment `(p, q)` passes through the open interior.
    ///
    /// Slab test with strict inequalities, so a segment lying in a face plane
    /// or touching only an edge or corner does not count as crossing.
    pub fn segment_crosses_interior(&self, p: Vec3<T>, q: Vec3<T>) -> bool {
        let d = q - p;
        let mut t_enter = T::zero();
        let mut t_exit = T::one();
        for axis in 0..3 {
            let origin = p.get(axis);
            let lo = self.min.get(axis);
            let hi = self.max.get(axis);
            let step = d.get(axis);
            if step == T::zero() {
                if origin <= lo || origin >= hi {
                    return false;
                }
                continue;
            }
            let inv = T::one() / step;
            let mut t0 = (lo - origin) * inv;
            let mut t1 = (hi - origin) * inv;
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            if t0 > t_enter {
                t_enter = t0;
            }
            if t1 < t_exit {
                t_exit = t1;
            }
            if t_enter >= t_exit {
                return false;
            }
        }
        true
    }

    pub fn contains_xy_strict(&self, p: Vec3<T>) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }
}
