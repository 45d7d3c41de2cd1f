//! Artifact writers. Every file is written after the sweep finishes, in a
//! fixed order, with shortest round-trip float formatting so that identical
//! runs produce identical bytes.

use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use cabin_vlc::SimConfig;

use crate::run::{RunOutput, SeatResult};
use crate::{RateChoice, RunSpec};

pub const LINK_REPORT: &str = "link_report.csv";
pub const BRANCH_SINR: &str = "branch_sinr.csv";
pub const METADATA: &str = "run_metadata.toml";
pub const IR_DIR: &str = "impulse_responses";

pub const LINK_REPORT_HEADER: [&str; 7] = [
    "seat",
    "receiver",
    "combiner",
    "sinr_db",
    "ber",
    "delay_spread_ns",
    "max_rate_gbps",
];
pub const IR_HEADER: [&str; 6] = ["unit", "branch", "detector", "bin_index", "time_s", "power_w"];

/// One row of the link report, as read back by `plot`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReportRow {
    pub seat: usize,
    pub receiver: String,
    pub combiner: String,
    pub sinr_db: f64,
    pub ber: f64,
    pub delay_spread_ns: Option<f64>,
    pub max_rate_gbps: Option<f64>,
}

pub fn read_report(path: &Path) -> anyhow::Result<Vec<ReportRow>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    anyhow::ensure!(
        headers.iter().eq(LINK_REPORT_HEADER.iter().copied()),
        "{}: unexpected header {:?}",
        path.display(),
        headers
    );
    let mut rows = Vec::new();
    for (i, row) in reader.deserialize().enumerate() {
        let row: ReportRow = row.with_context(|| format!("{}: record {}", path.display(), i + 1))?;
        rows.push(row);
    }
    Ok(rows)
}

fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Shortest round-trip text; scientific outside `[1e-3, 1e6)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-3..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn link_report_csv(seats: &[SeatResult]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(LINK_REPORT_HEADER)?;
    for s in seats {
        for r in &s.report.results {
            w.write_record([
                s.seat.to_string(),
                s.receiver.as_str().to_string(),
                r.combiner.as_str().to_string(),
                num(db(r.sinr)),
                num(r.ber),
                opt(s.report.delay_spread.map(|d| d * 1e9)),
                opt(r.max_rate.map(|m| m * 1e-9)),
            ])?;
        }
    }
    Ok(w.into_inner()?)
}

pub fn branch_sinr_csv(seats: &[SeatResult]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["seat", "receiver", "channel", "sinr_db"])?;
    for s in seats {
        for (k, &v) in s.report.branch_sinr.iter().enumerate() {
            w.write_record([
                s.seat.to_string(),
                s.receiver.as_str().to_string(),
                k.to_string(),
                num(db(v)),
            ])?;
        }
    }
    Ok(w.into_inner()?)
}

/// Nonzero bins of every serving-branch response of one seat.
pub fn impulse_response_csv(seat: &SeatResult) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(IR_HEADER)?;
    for ir in &seat.irs {
        for (i, &p) in ir.bins.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            w.write_record([
                ir.unit.to_string(),
                ir.branch.to_string(),
                ir.detector.to_string(),
                i.to_string(),
                num(ir.time_of(i)),
                num(p),
            ])?;
        }
    }
    Ok(w.into_inner()?)
}

pub fn impulse_response_file(seat: &SeatResult) -> String {
    format!("seat-{:03}-{}.csv", seat.seat, seat.receiver.as_str())
}

#[derive(Serialize)]
struct RunEcho {
    rows: String,
    receivers: Vec<&'static str>,
    combiners: Vec<&'static str>,
    /// `"config"`, `"fixed"` or `"find-max"`.
    rate: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    bit_rate_gbps: Option<f64>,
    dump_ir: bool,
    version: &'static str,
}

#[derive(Serialize)]
struct Metadata<'a> {
    run: RunEcho,
    config: &'a SimConfig,
}

pub fn metadata_toml(spec: &RunSpec, output: &RunOutput) -> anyhow::Result<String> {
    let (rate, bit_rate_gbps) = match spec.rate {
        RateChoice::FromConfig => ("config", Some(output.config.link.bit_rate_gbps)),
        RateChoice::Fixed(g) => ("fixed", Some(g)),
        RateChoice::FindMax => ("find-max", None),
    };
    let meta = Metadata {
        run: RunEcho {
            rows: format!("{}..{}", spec.rows.start, spec.rows.end),
            receivers: output.receivers.iter().map(|r| r.as_str()).collect(),
            combiners: spec.combiners.iter().map(|c| c.as_str()).collect(),
            rate,
            bit_rate_gbps,
            dump_ir: spec.dump_ir,
            version: env!("CARGO_PKG_VERSION"),
        },
        config: &output.config,
    };
    Ok(toml::to_string(&meta)?)
}

/// Writes the link report, per-channel SINRs, metadata and (on request) the
/// impulse-response dumps into `spec.out`.
pub fn write_all(spec: &RunSpec, output: &RunOutput) -> anyhow::Result<()> {
    let out = &spec.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let write =
        |name: &Path, bytes: &[u8]| fs::write(name, bytes).with_context(|| format!("writing {}", name.display()));

    write(&out.join(LINK_REPORT), &link_report_csv(&output.seats)?)?;
    write(&out.join(BRANCH_SINR), &branch_sinr_csv(&output.seats)?)?;
    write(&out.join(METADATA), metadata_toml(spec, output)?.as_bytes())?;
    if spec.dump_ir {
        let dir = out.join(IR_DIR);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        for seat in &output.seats {
            write(&dir.join(impulse_response_file(seat)), &impulse_response_csv(seat)?)?;
        }
    }
    Ok(())
}
