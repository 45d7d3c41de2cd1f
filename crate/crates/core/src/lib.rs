//! Visible-light channel simulator for aircraft cabins.
//!
//! Reading lights with several narrow Lambertian branches serve the seats
//! below them. The tracer collects LOS plus first- and second-order diffuse
//! reflections into time-binned impulse responses for angle-diversity and
//! imaging receivers, and [`analysis`] turns those into delay spread, SINR
//! under selection and maximum-ratio combining, BER and maximum OOK rate.
//!
//! All math is generic over [`Real`]; the aliases below fix it to `f64`.

// `!(x > 0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod channel;
pub mod config;
pub mod error;
pub mod geom;
pub mod num;
pub mod optics;
pub mod scene;

pub use config::{CabinConfig, SimConfig, SubdivisionSpec};
pub use error::{Error, Result};
pub use num::Real;

pub type Vec3 = geom::Vec3<f64>;
pub type Scene = scene::Scene<f64>;
pub type SurfaceElement = scene::SurfaceElement<f64>;
pub type Branch = optics::Branch<f64>;
pub type TransmitterUnit = optics::TransmitterUnit<f64>;
pub type Detector = optics::Detector<f64>;
pub type AdrReceiver = optics::AdrReceiver<f64>;
pub type ImrReceiver = optics::ImrReceiver<f64>;
pub type Receiver = optics::Receiver<f64>;
pub type ImpulseResponse = channel::ImpulseResponse<f64>;
pub type Tracer<'a> = channel::Tracer<'a, f64>;
pub type LinkReport = analysis::LinkReport<f64>;
pub type NoiseParams = analysis::NoiseParams<f64>;
