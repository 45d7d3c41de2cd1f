//! Cabin geometry: boundary surfaces, seat occluders, reflecting elements and
//! line-of-sight queries.
//!
//! Coordinates: x runs along the cabin length, y across the width, z up, with
//! the origin at a floor corner. Passengers face -x; seat backs sit at the +x
//! edge of each footprint.

use crate::config::{CabinConfig, ReflectivityMap};
use crate::error::{Error, Result};
use crate::geom::{Aabb, Vec3};
use crate::num::Real;

/// Half-open range of cabin rows, `start..end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowSpan {
    pub start: usize,
    pub end: usize,
}

impl RowSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SurfaceKind {
    Floor,
    Ceiling,
    /// y = 0
    LeftWall,
    /// y = width
    RightWall,
    /// lowest x of the slice
    FrontWall,
    /// highest x of the slice
    RearWall,
}

impl SurfaceKind {
    pub const ALL: [SurfaceKind; 6] = [
        SurfaceKind::Floor,
        SurfaceKind::Ceiling,
        SurfaceKind::LeftWall,
        SurfaceKind::RightWall,
        SurfaceKind::FrontWall,
        SurfaceKind::RearWall,
    ];

    fn reflectivity(self, map: &ReflectivityMap) -> f64 {
        match self {
            SurfaceKind::Floor => map.floor,
            SurfaceKind::Ceiling => map.ceiling,
            SurfaceKind::LeftWall | SurfaceKind::RightWall => map.side_walls,
            SurfaceKind::FrontWall | SurfaceKind::RearWall => map.end_walls,
        }
    }
}

/// Rectangular boundary surface spanned by two orthogonal unit axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Surface<T> {
    pub kind: SurfaceKind,
    pub origin: Vec3<T>,
    pub u_axis: Vec3<T>,
    pub v_axis: Vec3<T>,
    pub u_len: T,
    pub v_len: T,
    /// Points into the cabin.
    pub normal: Vec3<T>,
    pub reflectivity: T,
}

/// Number of cells along `dim` for a target pitch `delta`; never zero.
pub fn cell_count(dim: f64, delta: f64) -> usize {
    ((dim / delta).round() as usize).max(1)
}

impl<T: Real> Surface<T> {
    pub fn area(&self) -> T {
        self.u_len * self.v_len
    }

    /// Exact tiling into `round(len / delta)` cells per axis, with the pitch
    /// stretched so the cells cover the surface with no remainder.
    pub fn tile(&self, delta: T) -> Vec<SurfaceElement<T>> {
        let nu = cell_count(self.u_len.as_f64(), delta.as_f64());
        let nv = cell_count(self.v_len.as_f64(), delta.as_f64());
        let pu = self.u_len / T::lit(nu as f64);
        let pv = self.v_len / T::lit(nv as f64);
        let area = pu * pv;
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            let du = (T::lit(i as f64) + half) * pu;
            for j in 0..nv {
                let dv = (T::lit(j as f64) + half) * pv;
                out.push(SurfaceElement {
                    center: self.origin + self.u_axis * du + self.v_axis * dv,
                    normal: self.normal,
                    area,
                    reflectivity: self.reflectivity,
                    surface: self.kind,
                    blocked: false,
                });
            }
        }
        out
    }
}

/// Small Lambertian reflector of emission order 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceElement<T> {
    pub center: Vec3<T>,
    pub normal: Vec3<T>,
    pub area: T,
    pub reflectivity: T,
    pub surface: SurfaceKind,
    /// Lies under a seat; never exchanges light with anything above it.
    pub blocked: bool,
}

impl<T: Real> SurfaceElement<T> {
    pub fn emission_order(&self) -> T {
        T::one()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitKind {
    /// Three-branch unit above a wall-side seat group.
    Side3,
    /// Four-branch unit above the middle seat group.
    Middle4,
    Custom,
}

/// Ceiling point where a reading-light unit is mounted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitMount<T> {
    pub row: usize,
    pub group: usize,
    pub kind: UnitKind,
    pub position: Vec3<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seat<T> {
    /// `row * 10 + column + 1`; column 0 is next to the left wall.
    pub id: usize,
    pub row: usize,
    pub column: usize,
    pub group: usize,
    /// Footprint from the floor up to the seat surface.
    pub cushion: Aabb<T>,
    pub back: Aabb<T>,
    /// Center of the top face of the cushion.
    pub surface_center: Vec3<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    pub bounds: Aabb<T>,
    pub surfaces: Vec<Surface<T>>,
    pub seats: Vec<Seat<T>>,
    pub mounts: Vec<UnitMount<T>>,
    occluders: Vec<Aabb<T>>,
    occluder_top: T,
}

impl<T: Real> Scene<T> {
    /// Empty cuboid room with one reflectivity per surface kind and no seats.
    pub fn cuboid(min: Vec3<T>, max: Vec3<T>, reflectivity: impl Fn(SurfaceKind) -> T) -> Result<Self> {
        let size = max - min;
        for (field, v) in [("length", size.x), ("width", size.y), ("height", size.z)] {
            if !(v > T::zero()) {
                return Err(Error::NonPositive {
                    field,
                    value: v.as_f64(),
                });
            }
        }
        let bounds = Aabb::new(min, max);
        let surfaces = SurfaceKind::ALL
            .iter()
            .map(|&kind| boundary_surface(&bounds, kind, reflectivity(kind)))
            .collect();
        Ok(Self {
            bounds,
            surfaces,
            seats: Vec::new(),
            mounts: Vec::new(),
            occluders: Vec::new(),
            occluder_top: T::zero(),
        })
    }

    pub fn occluders(&self) -> &[Aabb<T>] {
        &self.occluders
    }

    pub fn add_occluder(&mut self, b: Aabb<T>) {
        if b.max.z > self.occluder_top {
            self.occluder_top = b.max.z;
        }
        self.occluders.push(b);
    }

    pub fn remove_occluder(&mut self, index: usize) -> Aabb<T> {
        let b = self.occluders.remove(index);
        self.occluder_top = self.occluders.iter().fold(T::zero(), |m, o| m.max(o.max.z));
        b
    }

    pub fn surface(&self, kind: SurfaceKind) -> &Surface<T> {
        self.surfaces
            .iter()
            .find(|s| s.kind == kind)
            .expect("all six surfaces present")
    }

    /// Line of sight between two points: the open segment must not cross any
    /// seat box interior.
    pub fn visible(&self, p: Vec3<T>, q: Vec3<T>) -> bool {
        if p.z >= self.occluder_top && q.z >= self.occluder_top {
            return true;
        }
        // xy extent of the part of the segment below the tallest occluder
        let (lo, hi) = if p.z <= q.z { (p, q) } else { (q, p) };
        let clip_hi = if hi.z > self.occluder_top {
            let t = (self.occluder_top - lo.z) / (hi.z - lo.z);
            lo + (hi - lo) * t
        } else {
            hi
        };
        let (x0, x1) = (lo.x.min(clip_hi.x), lo.x.max(clip_hi.x));
        let (y0, y1) = (lo.y.min(clip_hi.y), lo.y.max(clip_hi.y));
        for b in &self.occluders {
            if b.max.x < x0 || b.min.x > x1 || b.max.y < y0 || b.min.y > y1 {
                continue;
            }
            if b.segment_crosses_interior(p, q) {
                return false;
            }
        }
        true
    }

    /// Exact tiling of every boundary surface at the pitch for `grid`;
    /// floor elements under a seat are flagged `blocked`.
    pub fn subdivide(&self, delta: T) -> Vec<SurfaceElement<T>> {
        let mut out = Vec::new();
        for surface in &self.surfaces {
            for mut e in surface.tile(delta) {
                e.blocked = surface.kind == SurfaceKind::Floor
                    && self.seats.iter().any(|s| s.cushion.contains_xy_strict(e.center));
                out.push(e);
            }
        }
        out
    }
}

fn boundary_surface<T: Real>(b: &Aabb<T>, kind: SurfaceKind, rho: T) -> Surface<T> {
    let (o, z) = (T::one(), T::zero());
    let ex = Vec3::new(o, z, z);
    let ey = Vec3::new(z, o, z);
    let ez = Vec3::new(z, z, o);
    let size = b.max - b.min;
    let (origin, u_axis, v_axis, u_len, v_len, normal) = match kind {
        SurfaceKind::Floor => (b.min, ex, ey, size.x, size.y, ez),
        SurfaceKind::Ceiling => (Vec3::new(b.min.x, b.min.y, b.max.z), ex, ey, size.x, size.y, -ez),
        SurfaceKind::LeftWall => (b.min, ex, ez, size.x, size.z, ey),
        SurfaceKind::RightWall => (Vec3::new(b.min.x, b.max.y, b.min.z), ex, ez, size.x, size.z, -ey),
        SurfaceKind::FrontWall => (b.min, ey, ez, size.y, size.z, ex),
        SurfaceKind::RearWall => (Vec3::new(b.max.x, b.min.y, b.min.z), ey, ez, size.y, size.z, -ex),
    };
    Surface {
        kind,
        origin,
        u_axis,
        v_axis,
        u_len,
        v_len,
        normal,
        reflectivity: rho,
    }
}

/// Which element grid to produce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BounceGrid {
    /// Fine grid, first reflection.
    First,
    /// Coarse grid, second reflection.
    Second,
}

/// Subdivides every surface of `scene` with the element size for `grid`.
pub fn subdivide<T: Real>(
    scene: &Scene<T>,
    spec: &crate::config::SubdivisionSpec,
    grid: BounceGrid,
) -> Vec<SurfaceElement<T>> {
    let delta = match grid {
        BounceGrid::First => spec.first_order_element_m,
        BounceGrid::Second => spec.second_order_element_m,
    };
    scene.subdivide(T::lit(delta))
}

/// Left edge (y) of each seat group for the 3-4-3 layout.
fn group_offsets(config: &CabinConfig) -> Vec<f64> {
    let d = &config.dims;
    let sw = config.seat.width_m;
    let seats: usize = d.layout.iter().sum();
    let gap = (d.width_m - seats as f64 * sw - (d.layout.len() - 1) as f64 * d.aisle_width_m) / 2.0;
    let mut y = gap;
    let mut out = Vec::with_capacity(d.layout.len());
    for &n in &d.layout {
        out.push(y);
        y += n as f64 * sw + d.aisle_width_m;
    }
    out
}

/// x coordinate where row 0 starts; the rows are centered along the cabin.
pub fn first_row_x(config: &CabinConfig) -> f64 {
    let d = &config.dims;
    (d.length_m - d.rows as f64 * d.row_pitch_m) / 2.0
}

/// Builds the cabin slice covering `span`: six boundary surfaces clipped to
/// the rows, two boxes per seat, and one unit mount per seat group.
pub fn build_scene<T: Real>(config: &CabinConfig, span: RowSpan) -> Result<Scene<T>> {
    config.validate()?;
    if span.is_empty() {
        return Err(Error::EmptySpan {
            start: span.start,
            end: span.end,
        });
    }
    let d = &config.dims;
    if span.end > d.rows {
        return Err(Error::SpanOutOfRange {
            start: span.start,
            end: span.end,
            rows: d.rows,
        });
    }
    let x0 = first_row_x(config);
    let pitch = d.row_pitch_m;
    let min = Vec3::from_f64(x0 + span.start as f64 * pitch, 0.0, 0.0);
    let max = Vec3::from_f64(x0 + span.end as f64 * pitch, d.width_m, d.height_m);
    let mut scene = Scene::cuboid(min, max, |k| T::lit(k.reflectivity(&config.reflectivity)))?;

    let s = &config.seat;
    let groups = group_offsets(config);
    for row in span.start..span.end {
        let row_x = x0 + row as f64 * pitch;
        let fx0 = row_x + (pitch - s.depth_m) / 2.0;
        let fx1 = fx0 + s.depth_m;
        let center_x = (fx0 + fx1) / 2.0;
        let mut column = 0;
        for (group, (&n, &gy)) in d.layout.iter().zip(&groups).enumerate() {
            for k in 0..n {
                let fy0 = gy + k as f64 * s.width_m;
                let fy1 = fy0 + s.width_m;
                let cushion = Aabb::new(
                    Vec3::from_f64(fx0, fy0, 0.0),
                    Vec3::from_f64(fx1, fy1, s.surface_height_m),
                );
                let back = Aabb::new(
                    Vec3::from_f64(fx1 - s.back_thickness_m, fy0, s.surface_height_m),
                    Vec3::from_f64(fx1, fy1, s.back_height_m),
                );
                scene.add_occluder(cushion);
                scene.add_occluder(back);
                scene.seats.push(Seat {
                    id: row * 10 + column + 1,
                    row,
                    column,
                    group,
                    cushion,
                    back,
                    surface_center: Vec3::from_f64(
                        center_x - s.back_thickness_m / 2.0,
                        (fy0 + fy1) / 2.0,
                        s.surface_height_m,
                    ),
                });
                column += 1;
            }
            let kind = if group == 1 { UnitKind::Middle4 } else { UnitKind::Side3 };
            scene.mounts.push(UnitMount {
                row,
                group,
                kind,
                position: Vec3::from_f64(center_x, gy + n as f64 * s.width_m / 2.0, d.height_m),
            });
        }
    }
    Ok(scene)
}
