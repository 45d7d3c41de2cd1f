//! Emitters, detectors and the per-ray radiometric factors.

use crate::config::{ReceiverConfig, TransmitterConfig};
use crate::error::{Error, Result};
use crate::geom::{Frame, Vec3};
use crate::num::Real;
use crate::scene::{Scene, UnitKind};

/// Pointing direction as elevation above the horizontal plane (negative is
/// downward) and azimuth in the local xy plane, both in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation<T> {
    pub elevation_deg: T,
    pub azimuth_deg: T,
}

impl<T: Real> Orientation<T> {
    pub fn new(elevation_deg: T, azimuth_deg: T) -> Self {
        Self {
            elevation_deg,
            azimuth_deg,
        }
    }

    pub fn from_f64(elevation_deg: f64, azimuth_deg: f64) -> Self {
        Self::new(T::lit(elevation_deg), T::lit(azimuth_deg))
    }

    /// `(cos El cos Az, cos El sin Az, sin El)` in the local frame.
    pub fn direction(&self) -> Vec3<T> {
        let el = self.elevation_deg.to_radians();
        let az = self.azimuth_deg.to_radians();
        Vec3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
    }
}

/// Lambertian order whose intensity halves at `semi_angle_deg`.
pub fn lambertian_order<T: Real>(semi_angle_deg: T) -> Result<T> {
    if !(semi_angle_deg > T::zero() && semi_angle_deg < T::lit(90.0)) {
        return Err(Error::SemiAngle(semi_angle_deg.as_f64()));
    }
    Ok(-T::LN_2() / semi_angle_deg.to_radians().cos().ln())
}

/// Generalized Lambertian radiant intensity `P (n+1)/(2 pi) cos^n(phi)` in W/sr.
pub fn radiant_intensity<T: Real>(power: T, order: T, phi: T) -> T {
    let c = phi.cos();
    if c <= T::zero() {
        return T::zero();
    }
    power * (order + T::one()) / (T::two() * T::PI()) * c.powf(order)
}

/// Lambertian point source seen by a single detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Emitter<T> {
    pub position: Vec3<T>,
    pub normal: Vec3<T>,
    pub order: T,
}

/// Photodetector with a circular acceptance cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detector<T> {
    pub position: Vec3<T>,
    pub normal: Vec3<T>,
    pub area: T,
    /// Half-angle of the acceptance cone, radians.
    pub fov: T,
    pub responsivity: T,
}

impl<T: Real> Detector<T> {
    pub fn new(position: Vec3<T>, normal: Vec3<T>, area: T, fov_deg: T, responsivity: T) -> Result<Self> {
        if !(area > T::zero()) {
            return Err(Error::NonPositive {
                field: "detector.area",
                value: area.as_f64(),
            });
        }
        if !(fov_deg > T::zero() && fov_deg <= T::lit(90.0)) {
            return Err(Error::Config(format!("detector FOV {fov_deg} deg outside (0, 90]")));
        }
        if !(responsivity > T::zero()) {
            return Err(Error::NonPositive {
                field: "detector.responsivity",
                value: responsivity.as_f64(),
            });
        }
        Ok(Self {
            position,
            normal: normal.normalized(),
            area,
            fov: fov_deg.to_radians(),
            responsivity,
        })
    }

    /// Effective area `A cos(theta)` for light arriving from direction
    /// `towards_source` (unit), zero outside the cone.
    #[inline]
    pub fn effective_area(&self, towards_source: Vec3<T>) -> T {
        let cos_theta = towards_source.dot(self.normal);
        if cos_theta <= T::zero() || cos_theta < self.fov.cos() {
            return T::zero();
        }
        self.area * cos_theta
    }
}

/// LOS channel gain `(n+1) A cos^n(phi) cos(theta) / (2 pi d^2)`.
pub fn los_gain<T: Real>(emitter: &Emitter<T>, detector: &Detector<T>) -> T {
    let v = detector.position - emitter.position;
    let d2 = v.norm_sq();
    if d2 == T::zero() {
        return T::zero();
    }
    let d = d2.sqrt();
    let cos_phi = emitter.normal.dot(v) / d;
    let cos_theta = -detector.normal.dot(v) / d;
    if cos_phi <= T::zero() || cos_theta <= T::zero() || cos_theta < detector.fov.cos() {
        return T::zero();
    }
    (emitter.order + T::one()) * detector.area * cos_phi.powf(emitter.order) * cos_theta / (T::two() * T::PI() * d2)
}

/// Quadratic lens transmission `a2 Y^2 + a1 Y + a0`, Y in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensPolynomial<T> {
    pub a2: T,
    pub a1: T,
    pub a0: T,
}

impl<T: Real> Default for LensPolynomial<T> {
    fn default() -> Self {
        Self {
            a2: T::lit(-0.1982),
            a1: T::lit(0.0425),
            a0: T::lit(0.8778),
        }
    }
}

impl<T: Real> LensPolynomial<T> {
    /// Transmission at incidence `y` (radians), clamped to [0, 1] and zero
    /// beyond `fov`.
    pub fn transmission(&self, y: T, fov: T) -> Result<T> {
        if y < T::zero() {
            return Err(Error::NegativeAngle(y.as_f64()));
        }
        if y > fov {
            return Ok(T::zero());
        }
        let t = self.a2 * y * y + self.a1 * y + self.a0;
        Ok(t.max(T::zero()).min(T::one()))
    }
}

/// Default lens with a 40 degree field of view.
pub fn lens_transmission<T: Real>(y: T) -> Result<T> {
    LensPolynomial::default().transmission(y, T::lit(40.0).to_radians())
}

/// Transmitter branch: one narrow Lambertian beam of a reading light.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Branch<T> {
    pub position: Vec3<T>,
    pub orientation: Orientation<T>,
    /// World-frame unit pointing direction.
    pub direction: Vec3<T>,
    pub semi_angle_deg: T,
    pub order: T,
    pub power: T,
}

impl<T: Real> Branch<T> {
    pub fn new(
        position: Vec3<T>,
        orientation: Orientation<T>,
        frame: &Frame<T>,
        semi_angle_deg: T,
        power: T,
    ) -> Result<Self> {
        if !(power > T::zero()) {
            return Err(Error::NonPositive {
                field: "transmitter.power_w",
                value: power.as_f64(),
            });
        }
        Ok(Self {
            position,
            orientation,
            direction: frame.to_world(orientation.direction()).normalized(),
            semi_angle_deg,
            order: lambertian_order(semi_angle_deg)?,
            power,
        })
    }

    pub fn emitter(&self) -> Emitter<T> {
        Emitter {
            position: self.position,
            normal: self.direction,
            order: self.order,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmitterUnit<T> {
    pub id: usize,
    pub kind: UnitKind,
    pub branches: Vec<Branch<T>>,
}

/// (El, Az) per branch of the wall-side unit.
pub const SIDE3_ORIENTATIONS: [(f64, f64); 3] = [(-55.0, 180.0), (-90.0, 0.0), (-55.0, 0.0)];
/// (El, Az) per branch of the middle unit.
pub const MIDDLE4_ORIENTATIONS: [(f64, f64); 4] = [(-65.0, 180.0), (-80.0, 180.0), (-80.0, 0.0), (-65.0, 0.0)];

impl<T: Real> TransmitterUnit<T> {
    pub fn new(id: usize, kind: UnitKind, position: Vec3<T>, config: &TransmitterConfig) -> Result<Self> {
        let (table, semi): (&[(f64, f64)], f64) = match kind {
            UnitKind::Side3 => (&SIDE3_ORIENTATIONS, config.side_semi_angle_deg),
            UnitKind::Middle4 => (&MIDDLE4_ORIENTATIONS, config.middle_semi_angle_deg),
            UnitKind::Custom => {
                return Err(Error::Config(
                    "custom units are built with `TransmitterUnit::custom`".into(),
                ))
            }
        };
        let frame = Frame::across_cabin();
        let branches = table
            .iter()
            .map(|&(el, az)| {
                Branch::new(
                    position,
                    Orientation::from_f64(el, az),
                    &frame,
                    T::lit(semi),
                    T::lit(config.power_w),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { id, kind, branches })
    }

    pub fn custom(id: usize, branches: Vec<Branch<T>>) -> Self {
        Self {
            id,
            kind: UnitKind::Custom,
            branches,
        }
    }
}

/// One wall-side unit per outer seat group and one middle unit per row, in
/// mount order.
pub fn place_units<T: Real>(scene: &Scene<T>, config: &TransmitterConfig) -> Result<Vec<TransmitterUnit<T>>> {
    if scene.mounts.is_empty() {
        return Err(Error::Config("scene has no unit mounts (3-4-3 layout required)".into()));
    }
    scene
        .mounts
        .iter()
        .enumerate()
        .map(|(id, m)| TransmitterUnit::new(id, m.kind, m.position, config))
        .collect()
}

/// Four detectors at a common point, tilted away from the zenith.
#[derive(Debug, Clone, PartialEq)]
pub struct AdrReceiver<T> {
    pub position: Vec3<T>,
    pub detectors: Vec<Detector<T>>,
}

pub const ADR_AZIMUTHS_DEG: [f64; 4] = [45.0, 135.0, 225.0, 315.0];

impl<T: Real> AdrReceiver<T> {
    pub fn new(position: Vec3<T>, config: &ReceiverConfig) -> Result<Self> {
        let detectors = ADR_AZIMUTHS_DEG
            .iter()
            .map(|&az| {
                let normal = Orientation::from_f64(config.adr_elevation_deg, az).direction();
                Detector::new(
                    position,
                    normal,
                    T::lit(config.detector_area_m2),
                    T::lit(config.adr_fov_deg),
                    T::lit(config.responsivity_a_per_w),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { position, detectors })
    }
}

/// Pixel array behind a single upward-facing lens. Pixels partition the
/// direction-cosine square `[-s, s]^2`, `s = sin(fov)`, into a 5x5 grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ImrReceiver<T> {
    pub position: Vec3<T>,
    pub frame: Frame<T>,
    pub pixel_area: T,
    /// Radians.
    pub fov: T,
    pub responsivity: T,
    pub lens: LensPolynomial<T>,
    pub grid: usize,
}

impl<T: Real> ImrReceiver<T> {
    pub fn new(position: Vec3<T>, config: &ReceiverConfig) -> Result<Self> {
        positive_or("receiver.detector_area_m2", config.detector_area_m2)?;
        positive_or("receiver.responsivity_a_per_w", config.responsivity_a_per_w)?;
        Ok(Self {
            position,
            frame: Frame::world(),
            pixel_area: T::lit(config.detector_area_m2),
            fov: T::lit(config.imr_fov_deg).to_radians(),
            responsivity: T::lit(config.responsivity_a_per_w),
            lens: LensPolynomial::default(),
            grid: 5,
        })
    }

    pub fn pixel_count(&self) -> usize {
        self.grid * self.grid
    }

    /// Pixel (`row * grid + col`) hit by light arriving from `arrival`, a unit
    /// vector in the receiver frame pointing toward the source.
    pub fn pixel_for_direction(&self, arrival: Vec3<T>) -> Result<Option<usize>> {
        let norm = arrival.norm();
        if (norm - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::NotUnit(norm.as_f64()));
        }
        Ok(self.pixel_unchecked(arrival))
    }

    #[inline]
    fn pixel_unchecked(&self, arrival: Vec3<T>) -> Option<usize> {
        // cos Y >= cos fov; u = sin Y cos a and v = sin Y sin a are the
        // x and y components of the unit arrival vector
        if arrival.z <= T::zero() || arrival.z < self.fov.cos() {
            return None;
        }
        let s = self.fov.sin();
        let cell = T::two() * s / T::lit(self.grid as f64);
        let col = ((arrival.x + s) / cell).floor();
        let row = ((arrival.y + s) / cell).floor();
        let n = T::lit(self.grid as f64);
        if col < T::zero() || row < T::zero() || col >= n || row >= n {
            return None;
        }
        Some(row.to_usize()? * self.grid + col.to_usize()?)
    }
}

fn positive_or(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::NonPositive { field, value })
    }
}

/// Free-function form of [`ImrReceiver::pixel_for_direction`].
pub fn pixel_for_direction<T: Real>(arrival: Vec3<T>, receiver: &ImrReceiver<T>) -> Result<Option<usize>> {
    receiver.pixel_for_direction(arrival)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReceiverKind {
    Adr,
    Imr,
    Single,
}

impl ReceiverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReceiverKind::Adr => "adr",
            ReceiverKind::Imr => "imr",
            ReceiverKind::Single => "single",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Receiver<T> {
    Adr(AdrReceiver<T>),
    Imr(ImrReceiver<T>),
    /// Bare detector; mainly for reference comparisons.
    Single(Detector<T>),
}

impl<T: Real> Receiver<T> {
    pub fn kind(&self) -> ReceiverKind {
        match self {
            Receiver::Adr(_) => ReceiverKind::Adr,
            Receiver::Imr(_) => ReceiverKind::Imr,
            Receiver::Single(_) => ReceiverKind::Single,
        }
    }

    pub fn position(&self) -> Vec3<T> {
        match self {
            Receiver::Adr(r) => r.position,
            Receiver::Imr(r) => r.position,
            Receiver::Single(d) => d.position,
        }
    }

    /// Number of detectors or pixels (J).
    pub fn channels(&self) -> usize {
        match self {
            Receiver::Adr(r) => r.detectors.len(),
            Receiver::Imr(r) => r.pixel_count(),
            Receiver::Single(_) => 1,
        }
    }

    pub fn responsivity(&self) -> T {
        match self {
            Receiver::Adr(r) => r.detectors[0].responsivity,
            Receiver::Imr(r) => r.responsivity,
            Receiver::Single(d) => d.responsivity,
        }
    }

    /// Effective collecting area per channel for light arriving from unit
    /// direction `towards_source` (world frame). ImR rays pass the lens and
    /// land on at most one pixel.
    pub fn collect(&self, towards_source: Vec3<T>) -> Hits<T> {
        let mut hits = Hits::new();
        match self {
            Receiver::Adr(r) => {
                for (k, d) in r.detectors.iter().enumerate() {
                    let a = d.effective_area(towards_source);
                    if a > T::zero() {
                        hits.push(k, a);
                    }
                }
            }
            Receiver::Imr(r) => {
                let local = r.frame.to_local(towards_source);
                if let Some(pixel) = r.pixel_unchecked(local) {
                    let y = local.z.min(T::one()).acos();
                    let tc = r.lens.transmission(y, r.fov).unwrap_or(T::zero());
                    let a = r.pixel_area * local.z * tc;
                    if a > T::zero() {
                        hits.push(pixel, a);
                    }
                }
            }
            Receiver::Single(d) => {
                let a = d.effective_area(towards_source);
                if a > T::zero() {
                    hits.push(0, a);
                }
            }
        }
        hits
    }
}

/// Channels reached by one arriving ray; at most four ADR detectors or one
/// pixel.
#[derive(Debug, Clone, Copy)]
pub struct Hits<T> {
    len: u8,
    channel: [u16; 4],
    area: [T; 4],
}

impl<T: Copy + Default> Hits<T> {
    pub fn new() -> Self {
        Self {
            len: 0,
            channel: [0; 4],
            area: [T::default(); 4],
        }
    }

    pub fn push(&mut self, channel: usize, area: T) {
        let i = self.len as usize;
        self.channel[i] = channel as u16;
        self.area[i] = area;
        self.len += 1;
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        (0..self.len as usize).map(move |i| (self.channel[i] as usize, self.area[i]))
    }
}

impl<T: Copy + Default> Default for Hits<T> {
    fn default() -> Self {
        Self::new()
    }
}
