use std::fs;
use std::path::Path;

use anyhow::Context;
use rayon::prelude::*;

use cabin_vlc::analysis::{evaluate_link, Combiner, RateGrid, RateMode, SeatLink};
use cabin_vlc::config::ReceiverChoice;
use cabin_vlc::geom::Vec3;
use cabin_vlc::optics::{place_units, ReceiverKind};
use cabin_vlc::scene::{build_scene, subdivide, BounceGrid, RowSpan};
use cabin_vlc::{
    AdrReceiver, Branch, ImpulseResponse, ImrReceiver, LinkReport, NoiseParams, Receiver, SimConfig, Tracer,
};

use crate::{report, CliError, RateChoice, RunSpec};

/// One seat evaluated with one receiver type.
#[derive(Debug, Clone)]
pub struct SeatResult {
    pub seat: usize,
    pub receiver: ReceiverKind,
    /// `(unit, branch)` of the serving branch; `None` if the seat sees nothing.
    pub serving: Option<(usize, usize)>,
    pub report: LinkReport,
    /// Serving-branch response of every detector/pixel.
    pub irs: Vec<ImpulseResponse>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: SimConfig,
    pub receivers: Vec<ReceiverKind>,
    pub seats: Vec<SeatResult>,
}

pub fn load_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    SimConfig::from_toml_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn receivers_from_config(config: &SimConfig) -> Vec<ReceiverKind> {
    match config.receiver.kind {
        ReceiverChoice::Adr => vec![ReceiverKind::Adr],
        ReceiverChoice::Imr => vec![ReceiverKind::Imr],
        ReceiverChoice::Both => vec![ReceiverKind::Adr, ReceiverKind::Imr],
    }
}

pub fn rate_mode(config: &SimConfig, rate: RateChoice) -> RateMode<f64> {
    match rate {
        RateChoice::FromConfig => RateMode::Fixed(config.link.bit_rate_gbps * 1e9),
        RateChoice::Fixed(gbps) => RateMode::Fixed(gbps * 1e9),
        RateChoice::FindMax => RateMode::FindMax {
            target_ber: config.link.target_ber,
            grid: RateGrid::default(),
        },
    }
}

/// Runs the sweep in memory. Results are ordered by seat, then by the order of
/// `receivers`.
pub fn run(
    config: &SimConfig,
    rows: RowSpan,
    receivers: &[ReceiverKind],
    combiners: &[Combiner],
    mode: RateMode<f64>,
) -> anyhow::Result<Vec<SeatResult>> {
    anyhow::ensure!(!receivers.is_empty(), "no receiver kind selected");
    anyhow::ensure!(!combiners.is_empty(), "no combiner selected");

    let scene = build_scene::<f64>(&config.cabin_config(), rows).context("building scene")?;
    let first = subdivide(&scene, &config.subdivision, BounceGrid::First);
    let second = subdivide(&scene, &config.subdivision, BounceGrid::Second);
    let units = place_units(&scene, &config.transmitter).context("placing transmitters")?;

    let mut labels = Vec::new();
    let mut branches: Vec<Branch> = Vec::new();
    for (u, unit) in units.iter().enumerate() {
        for (b, branch) in unit.branches.iter().enumerate() {
            labels.push((u, b));
            branches.push(*branch);
        }
    }

    let offset = Vec3::from_f64(
        config.receiver.offset_m[0],
        config.receiver.offset_m[1],
        config.receiver.offset_m[2],
    );
    let mut seats = Vec::new();
    let mut rxs: Vec<Receiver> = Vec::new();
    for seat in &scene.seats {
        let position = seat.surface_center + offset;
        for &kind in receivers {
            let rx = match kind {
                ReceiverKind::Adr => Receiver::Adr(AdrReceiver::new(position, &config.receiver)?),
                ReceiverKind::Imr => Receiver::Imr(ImrReceiver::new(position, &config.receiver)?),
                ReceiverKind::Single => anyhow::bail!("single-detector receivers are not swept"),
            };
            seats.push(seat.id);
            rxs.push(rx);
        }
    }

    let tracer = Tracer::new(
        &scene,
        &first,
        &second,
        config.subdivision.max_order,
        config.subdivision.time_bin_s,
    )?;
    let power = tracer.received_power(&branches, &rxs);

    let noise = NoiseParams::from_config(&config.noise, config.receiver.responsivity_a_per_w);
    let weighting = config.link.delay_spread_weighting;

    let results = (0..rxs.len())
        .into_par_iter()
        .map(|r| {
            let rx = &rxs[r];
            let serving = serving_branch(&power, r);
            let channels = rx.channels();
            let irs = match serving {
                Some(s) => {
                    let (unit, branch) = labels[s];
                    let mut irs = tracer.impulse_responses(&branches[s], rx);
                    for ir in &mut irs {
                        ir.unit = unit;
                        ir.branch = branch;
                    }
                    irs
                }
                None => (0..channels)
                    .map(|k| ImpulseResponse::empty(config.subdivision.time_bin_s, 0, 0, k))
                    .collect(),
            };
            let interference: Vec<Vec<f64>> = (0..channels)
                .map(|k| {
                    (0..branches.len())
                        .filter(|&b| Some(b) != serving)
                        .map(|b| power[b][r][k])
                        .collect()
                })
                .collect();
            let link = SeatLink::new(seats[r], rx.kind(), irs, interference);
            let report = evaluate_link(&link, combiners, &noise, mode, weighting);
            SeatResult {
                seat: seats[r],
                receiver: rx.kind(),
                serving: serving.map(|s| labels[s]),
                report,
                irs: link.serving,
            }
        })
        .collect();
    Ok(results)
}

/// Branch delivering the most power to receiver `r`, summed over its
/// channels; ties go to the lower index.
fn serving_branch(power: &[Vec<Vec<f64>>], r: usize) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (b, per_rx) in power.iter().enumerate() {
        let total: f64 = per_rx[r].iter().sum();
        if total > 0.0 && best.is_none_or(|(_, p)| total > p) {
            best = Some((b, total));
        }
    }
    best.map(|(b, _)| b)
}

/// Loads the config, runs the sweep and writes every artifact into `spec.out`.
pub fn simulate(spec: &RunSpec) -> Result<RunOutput, CliError> {
    let config = load_config(&spec.config)?;
    let receivers = spec.receivers.clone().unwrap_or_else(|| receivers_from_config(&config));
    if spec.combiners.is_empty() {
        return Err(CliError::Runtime(anyhow::anyhow!("no combiner selected")));
    }
    let mode = rate_mode(&config, spec.rate);

    let work = || run(&config, spec.rows, &receivers, &spec.combiners, mode);
    let seats = match spec.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("starting worker pool")?
            .install(work)?,
        None => work()?,
    };

    let output = RunOutput {
        config,
        receivers,
        seats,
    };
    report::write_all(spec, &output)?;
    Ok(output)
}
