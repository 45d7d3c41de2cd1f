//! TOML run configuration.
//!
//! Sections: `[cabin]`, `[seat]`, `[subdivision]`, `[reflectivity]`,
//! `[transmitter]`, `[receiver]`, `[noise]`, `[link]`. Every key is optional
//! and falls back to the defaults below; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CabinDims {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub rows: usize,
    pub row_pitch_m: f64,
    pub aisle_width_m: f64,
    /// Seats per group from the left wall (y = 0) to the right wall.
    pub layout: Vec<usize>,
}

impl Default for CabinDims {
    fn default() -> Self {
        Self {
            length_m: 57.0,
            width_m: 6.37,
            height_m: 2.41,
            rows: 54,
            row_pitch_m: 0.81,
            aisle_width_m: 0.50,
            layout: vec![3, 4, 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeatConfig {
    pub width_m: f64,
    pub depth_m: f64,
    pub surface_height_m: f64,
    pub back_height_m: f64,
    pub back_thickness_m: f64,
}

impl Default for SeatConfig {
    fn default() -> Self {
        Self {
            width_m: 0.50,
            depth_m: 0.60,
            surface_height_m: 0.45,
            back_height_m: 1.10,
            back_thickness_m: 0.10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReflectivityMap {
    pub ceiling: f64,
    pub side_walls: f64,
    pub floor: f64,
    pub end_walls: f64,
}

impl Default for ReflectivityMap {
    fn default() -> Self {
        Self {
            ceiling: 0.8,
            side_walls: 0.8,
            floor: 0.3,
            end_walls: 0.3,
        }
    }
}

impl ReflectivityMap {
    pub fn uniform(rho: f64) -> Self {
        Self {
            ceiling: rho,
            side_walls: rho,
            floor: rho,
            end_walls: rho,
        }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            ceiling: self.ceiling * k,
            side_walls: self.side_walls * k,
            floor: self.floor * k,
            end_walls: self.end_walls * k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubdivisionSpec {
    pub first_order_element_m: f64,
    pub second_order_element_m: f64,
    pub time_bin_s: f64,
    pub max_order: u8,
}

impl Default for SubdivisionSpec {
    fn default() -> Self {
        Self {
            first_order_element_m: 0.05,
            second_order_element_m: 0.20,
            time_bin_s: 5e-11,
            max_order: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransmitterConfig {
    /// Aggregate RYGB optical power per branch.
    pub power_w: f64,
    pub side_semi_angle_deg: f64,
    pub middle_semi_angle_deg: f64,
}

impl Default for TransmitterConfig {
    fn default() -> Self {
        Self {
            power_w: 1.0,
            side_semi_angle_deg: 14.0,
            middle_semi_angle_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceiverChoice {
    Adr,
    Imr,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub kind: ReceiverChoice,
    /// Offset of the receiver from the center of the seat surface.
    pub offset_m: [f64; 3],
    pub responsivity_a_per_w: f64,
    pub detector_area_m2: f64,
    pub adr_elevation_deg: f64,
    pub adr_fov_deg: f64,
    pub imr_fov_deg: f64,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        Self {
            kind: ReceiverChoice::Both,
            offset_m: [0.0, 0.0, 0.30],
            responsivity_a_per_w: 0.4,
            detector_area_m2: 4e-6,
            adr_elevation_deg: 70.0,
            adr_fov_deg: 21.0,
            imr_fov_deg: 40.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub preamp_density_a_per_sqrt_hz: f64,
    pub background_current_a: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            preamp_density_a_per_sqrt_hz: 4.5e-12,
            background_current_a: 10e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DelayWeighting {
    /// Weights `P_i^2`.
    #[default]
    PowerSquared,
    /// Weights `P_i`.
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub bit_rate_gbps: f64,
    pub target_ber: f64,
    pub delay_spread_weighting: DelayWeighting,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            bit_rate_gbps: 1.0,
            target_ber: 1e-9,
            delay_spread_weighting: DelayWeighting::PowerSquared,
        }
    }
}

/// Full resolved configuration of a run.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub cabin: CabinDims,
    pub seat: SeatConfig,
    pub subdivision: SubdivisionSpec,
    pub reflectivity: ReflectivityMap,
    pub transmitter: TransmitterConfig,
    pub receiver: ReceiverConfig,
    pub noise: NoiseConfig,
    pub link: LinkConfig,
}

/// Cabin geometry inputs consumed by [`crate::scene::build_scene`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CabinConfig {
    pub dims: CabinDims,
    pub seat: SeatConfig,
    pub reflectivity: ReflectivityMap,
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositive { field, value })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("`{field}` must be non-negative, got {value}")))
    }
}

fn unit(field: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::OutOfUnitRange { field, value })
    }
}

impl CabinConfig {
    pub fn validate(&self) -> Result<()> {
        let d = &self.dims;
        positive("cabin.length_m", d.length_m)?;
        positive("cabin.width_m", d.width_m)?;
        positive("cabin.height_m", d.height_m)?;
        positive("cabin.rows", d.rows as f64)?;
        positive("cabin.row_pitch_m", d.row_pitch_m)?;
        non_negative("cabin.aisle_width_m", d.aisle_width_m)?;
        let s = &self.seat;
        positive("seat.width_m", s.width_m)?;
        positive("seat.depth_m", s.depth_m)?;
        positive("seat.surface_height_m", s.surface_height_m)?;
        positive("seat.back_height_m", s.back_height_m)?;
        positive("seat.back_thickness_m", s.back_thickness_m)?;
        let r = &self.reflectivity;
        unit("reflectivity.ceiling", r.ceiling)?;
        unit("reflectivity.side_walls", r.side_walls)?;
        unit("reflectivity.floor", r.floor)?;
        unit("reflectivity.end_walls", r.end_walls)?;

        if d.layout != [3, 4, 3] {
            return Err(Error::UnsupportedLayout(d.layout.clone()));
        }
        if d.rows as f64 * d.row_pitch_m > d.length_m + 1e-9 {
            return Err(Error::Geometry(format!(
                "cabin.rows x cabin.row_pitch_m = {} m exceeds cabin.length_m = {} m",
                d.rows as f64 * d.row_pitch_m,
                d.length_m
            )));
        }
        if s.depth_m > d.row_pitch_m {
            return Err(Error::Geometry("seat.depth_m exceeds cabin.row_pitch_m".into()));
        }
        if s.back_thickness_m >= s.depth_m {
            return Err(Error::Geometry(
                "seat.back_thickness_m must be below seat.depth_m".into(),
            ));
        }
        if s.back_height_m <= s.surface_height_m || s.back_height_m >= d.height_m {
            return Err(Error::Geometry(
                "seat.back_height_m must lie between seat.surface_height_m and cabin.height_m".into(),
            ));
        }
        let seats: usize = d.layout.iter().sum();
        let used = seats as f64 * s.width_m + (d.layout.len() - 1) as f64 * d.aisle_width_m;
        if used > d.width_m + 1e-9 {
            return Err(Error::Geometry(format!(
                "seats and aisles need {used} m but cabin.width_m is {} m",
                d.width_m
            )));
        }
        Ok(())
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn cabin_config(&self) -> CabinConfig {
        CabinConfig {
            dims: self.cabin.clone(),
            seat: self.seat.clone(),
            reflectivity: self.reflectivity.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cabin_config().validate()?;
        let sub = &self.subdivision;
        positive("subdivision.first_order_element_m", sub.first_order_element_m)?;
        positive("subdivision.second_order_element_m", sub.second_order_element_m)?;
        positive("subdivision.time_bin_s", sub.time_bin_s)?;
        if sub.max_order > 2 {
            return Err(Error::Config(format!(
                "`subdivision.max_order` must be 0, 1 or 2, got {}",
                sub.max_order
            )));
        }
        let tx = &self.transmitter;
        positive("transmitter.power_w", tx.power_w)?;
        for (field, angle) in [
            ("transmitter.side_semi_angle_deg", tx.side_semi_angle_deg),
            ("transmitter.middle_semi_angle_deg", tx.middle_semi_angle_deg),
        ] {
            if !(angle > 0.0 && angle < 90.0) {
                return Err(Error::Config(format!("`{field}` must lie in (0, 90), got {angle}")));
            }
        }
        let rx = &self.receiver;
        positive("receiver.responsivity_a_per_w", rx.responsivity_a_per_w)?;
        positive("receiver.detector_area_m2", rx.detector_area_m2)?;
        for (field, fov) in [
            ("receiver.adr_fov_deg", rx.adr_fov_deg),
            ("receiver.imr_fov_deg", rx.imr_fov_deg),
        ] {
            if !(fov > 0.0 && fov <= 90.0) {
                return Err(Error::Config(format!("`{field}` must lie in (0, 90], got {fov}")));
            }
        }
        non_negative(
            "noise.preamp_density_a_per_sqrt_hz",
            self.noise.preamp_density_a_per_sqrt_hz,
        )?;
        non_negative("noise.background_current_a", self.noise.background_current_a)?;
        positive("link.bit_rate_gbps", self.link.bit_rate_gbps)?;
        if !(self.link.target_ber > 0.0 && self.link.target_ber < 0.5) {
            return Err(Error::Config(format!(
                "`link.target_ber` must lie in (0, 0.5), got {}",
                self.link.target_ber
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(SimConfig::from_toml_str("").unwrap(), SimConfig::default());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = SimConfig::default();
        assert_eq!(SimConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn partial_override() {
        let cfg = SimConfig::from_toml_str("[transmitter]\npower_w = 2.5\n[reflectivity]\nfloor = 0.1\n").unwrap();
        assert_eq!(cfg.transmitter.power_w, 2.5);
        assert_eq!(cfg.reflectivity.floor, 0.1);
        assert_eq!(cfg.reflectivity.ceiling, 0.8);
    }

    #[test]
    fn invalid_values_name_the_field() {
        let err = SimConfig::from_toml_str("[cabin]\nheight_m = -1.0\n").unwrap_err();
        assert!(err.to_string().contains("cabin.height_m"), "{err}");
        let err = SimConfig::from_toml_str("[reflectivity]\nceiling = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("reflectivity.ceiling"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let err = SimConfig::from_toml_str("[cabin]\nlenght_m = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("lenght_m"), "{err}");
    }

    #[test]
    fn layout_other_than_3_4_3_rejected() {
        let err = SimConfig::from_toml_str("[cabin]\nlayout = [2, 4, 2]\n").unwrap_err();
        assert!(matches!(err, Error::UnsupportedLayout(_)));
    }
}
