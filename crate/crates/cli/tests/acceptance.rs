//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails. All tolerances are pinned below.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cabin_vlc::analysis::{
    ber, max_data_rate, ook_partition, q_asymptotic, q_function, ChannelInputs, Combiner, NoiseParams, RateGrid,
    ELECTRON_CHARGE,
};
use cabin_vlc::channel::{trace, ImpulseResponse, TraceRequest};
use cabin_vlc::config::NoiseConfig;
use cabin_vlc::geom::Vec3;
use cabin_vlc::optics::{
    lens_transmission, radiant_intensity, Branch, Detector, Orientation, Receiver, TransmitterUnit,
};
use cabin_vlc::scene::{RowSpan, Scene};
use cabin_vlc_cli::report::LINK_REPORT;
use cabin_vlc_cli::{simulate, RateChoice, RunOutput, RunSpec};
use cabin_vlc_oracle::oracle_trace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LOS_REL_TOL: f64 = 1e-12;
const LOS_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_SCENES: usize = 100;
const ORACLE_BIN_REL_TOL: f64 = 1e-9;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const LENS_ABS_TOL: f64 = 1e-12;
const Q6_EXPECTED: f64 = 9.866e-10;
const Q6_ABS_TOL: f64 = 1e-12;
const ASYMPTOTE_REL_TOL: f64 = 0.05;
const HEMISPHERE_REL_TOL: f64 = 1e-6;
const HEMISPHERE_ORDERS: [f64; 3] = [1.0, 22.99, 45.28];
const SWEEP_BUDGET: Duration = Duration::from_secs(600);
const DETERMINISM_REL_TOL: f64 = 1e-9;
const RATE_LINKS: usize = 20;
const TARGET_BER: f64 = 1e-9;
/// Criteria that cannot pass as stated. They still print FAIL, but do not
/// fail the run. The asymptote `e^(-x^2/2) / (x sqrt(2 pi))` overestimates Q
/// by about `1/x^2`, which is 9.4% at x = 3, so a 5% bound over [3, 8] is
/// unattainable for any correct implementation.
const KNOWN_BLOCKERS: [usize; 1] = [5];
/// Relative slack when a closed-form rate falls within rounding of a grid point.
const RATE_EDGE_REL_TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn default_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/default.toml")
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn unit(rng: &mut ChaCha8Rng, zmin: f64, zmax: f64) -> [f64; 3] {
    loop {
        let c: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        if !(1e-3..=1.0).contains(&n) {
            continue;
        }
        let u = [c[0] / n, c[1] / n, c[2] / n];
        if (zmin..=zmax).contains(&u[2]) {
            return u;
        }
    }
}

fn v(a: [f64; 3]) -> Vec3<f64> {
    Vec3::new(a[0], a[1], a[2])
}

struct LosLink {
    emitter: [f64; 3],
    direction: [f64; 3],
    order: f64,
    power: f64,
    detector: [f64; 3],
    normal: [f64; 3],
    area: f64,
    fov_deg: f64,
}

fn random_los(rng: &mut ChaCha8Rng) -> LosLink {
    LosLink {
        emitter: [
            rng.gen_range(0.5..3.5),
            rng.gen_range(0.5..2.5),
            rng.gen_range(1.8..2.3),
        ],
        direction: unit(rng, -1.0, -0.8),
        order: rng.gen_range(1.0..60.0),
        power: rng.gen_range(0.1..3.0),
        detector: [
            rng.gen_range(0.5..3.5),
            rng.gen_range(0.5..2.5),
            rng.gen_range(0.3..1.0),
        ],
        normal: unit(rng, 0.7, 1.0),
        area: rng.gen_range(1e-6..1e-4),
        fov_deg: rng.gen_range(40.0..90.0),
    }
}

/// `P (n+1) A cos^n(phi) cos(theta) / (2 pi d^2)`, evaluated directly.
fn closed_form_los(l: &LosLink) -> f64 {
    let d = [
        l.detector[0] - l.emitter[0],
        l.detector[1] - l.emitter[1],
        l.detector[2] - l.emitter[2],
    ];
    let dist = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    let u = [d[0] / dist, d[1] / dist, d[2] / dist];
    let cos_phi = u[0] * l.direction[0] + u[1] * l.direction[1] + u[2] * l.direction[2];
    let cos_theta = -(u[0] * l.normal[0] + u[1] * l.normal[1] + u[2] * l.normal[2]);
    if cos_phi <= 0.0 || cos_theta <= 0.0 || cos_theta.acos() > l.fov_deg.to_radians() {
        return 0.0;
    }
    l.power * (l.order + 1.0) * l.area * cos_phi.powf(l.order) * cos_theta / (2.0 * PI * dist * dist)
}

fn los_trace(l: &LosLink, room: &Scene<f64>) -> ImpulseResponse<f64> {
    let branch = Branch {
        position: v(l.emitter),
        orientation: Orientation::from_f64(-90.0, 0.0),
        direction: v(l.direction),
        semi_angle_deg: 0.5f64.powf(1.0 / l.order).acos().to_degrees(),
        order: l.order,
        power: l.power,
    };
    let det = Detector::new(v(l.detector), v(l.normal), l.area, l.fov_deg, 0.4).unwrap();
    let receiver = Receiver::Single(det);
    let units = [TransmitterUnit::custom(0, vec![branch])];
    let req = TraceRequest {
        scene: room,
        first: &[],
        second: &[],
        units: &units,
        receiver: &receiver,
        max_order: 0,
        bin_width: 5e-11,
    };
    trace(&req).unwrap().remove(0)
}

fn dark_room() -> Scene<f64> {
    Scene::cuboid(Vec3::zero(), Vec3::new(4.0, 3.0, 2.5), |_| 0.0).unwrap()
}

fn los_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let links: Vec<LosLink> = (0..50).map(|_| random_los(&mut rng)).collect();
    let room = dark_room();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut lit = 0;
    for l in &links {
        let got = los_trace(l, &room).total_power();
        let want = closed_form_los(l);
        if want > 0.0 {
            lit += 1;
        }
        worst = worst.max(rel(got, want));
    }
    let elapsed = start.elapsed();
    check(
        worst <= LOS_REL_TOL && elapsed < LOS_BUDGET && lit >= 30,
        format!("50 placements ({lit} in view), worst rel err {worst:.2e}, {elapsed:.2?}"),
    )
}

fn brute_force_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut multi_bin = 0;
    for _ in 0..ORACLE_SCENES {
        let s = common::random_scene(&mut rng);
        let inputs = common::to_core(&s);
        let units = [TransmitterUnit::custom(0, vec![inputs.branch])];
        let req = TraceRequest {
            scene: &inputs.scene,
            first: &inputs.first,
            second: &inputs.second,
            units: &units,
            receiver: &inputs.receiver,
            max_order: 2,
            bin_width: s.bin_width,
        };
        let ir = trace(&req).map_err(|e| e.to_string())?.remove(0);
        let reference = oracle_trace(&s, 2);
        worst = worst.max(common::max_bin_rel_err(&ir.bins, &reference.bins));
        if reference.bins.iter().filter(|&&p| p > 0.0).count() > 1 {
            multi_bin += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        worst <= ORACLE_BIN_REL_TOL && elapsed < ORACLE_BUDGET,
        format!("{ORACLE_SCENES} scenes ({multi_bin} multi-bin), worst per-bin rel err {worst:.2e}, {elapsed:.2?}"),
    )
}

fn combiner_invariants(runs: &[&RunOutput]) -> Outcome {
    let mut links = 0;
    let mut single = 0;
    for run in runs {
        for seat in &run.seats {
            let (Some(sc), Some(mrc)) = (seat.report.result(Combiner::Sc), seat.report.result(Combiner::Mrc)) else {
                continue;
            };
            links += 1;
            if sc.bit_rate != mrc.bit_rate {
                return Err(format!("seat {} compared at different rates", seat.seat));
            }
            if mrc.sinr < sc.sinr {
                return Err(format!(
                    "seat {} {}: MRC {} < SC {}",
                    seat.seat,
                    seat.receiver.as_str(),
                    mrc.sinr,
                    sc.sinr
                ));
            }
            let nonzero = seat.report.branch_sinr.iter().filter(|&&s| s > 0.0).count();
            if nonzero <= 1 {
                single += 1;
                if mrc.sinr != sc.sinr {
                    return Err(format!(
                        "seat {}: single branch but MRC {} != SC {}",
                        seat.seat, mrc.sinr, sc.sinr
                    ));
                }
            }
        }
    }
    check(
        links > 0,
        format!("{links} links, {single} with at most one live branch"),
    )
}

fn lens_exactness() -> Outcome {
    let t0 = lens_transmission(0.0f64).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let fov = 40f64.to_radians();
    for i in 0..10 {
        let y = fov * i as f64 / 10.0;
        let got = lens_transmission(y).map_err(|e| e.to_string())?;
        let want = -0.1982 * y * y + 0.0425 * y + 0.8778;
        worst = worst.max((got - want).abs());
    }
    check(
        t0 == 0.8778 && worst <= LENS_ABS_TOL,
        format!("Tc(0) = {t0}, worst abs err at 10 samples {worst:.2e}"),
    )
}

fn q_function_values() -> Outcome {
    let q6 = q_function(6.0f64);
    // relative to the exact value, on a 0.01 grid over [3, 8]
    let xs: Vec<f64> = (0..=500).map(|i| 3.0 + i as f64 * 0.01).collect();
    let errs: Vec<f64> = xs
        .iter()
        .map(|&x| (q_asymptotic(x) - q_function(x)).abs() / q_function(x))
        .collect();
    let worst = errs.iter().copied().fold(0.0, f64::max);
    let holds_from = xs
        .iter()
        .zip(&errs)
        .rev()
        .take_while(|(_, &e)| e <= ASYMPTOTE_REL_TOL)
        .last()
        .map(|(&x, _)| x)
        .unwrap_or(f64::NAN);
    check(
        (q6 - Q6_EXPECTED).abs() <= Q6_ABS_TOL && worst <= ASYMPTOTE_REL_TOL,
        format!(
            "Q(6) = {q6:.6e} (|err| {:.1e}); asymptote worst rel err on [3, 8] {:.2}% at x = 3, within 5% only for x >= {holds_from:.2}",
            (q6 - Q6_EXPECTED).abs(),
            worst * 100.0
        ),
    )
}

fn hemisphere_integral(order: f64, power: f64) -> f64 {
    // composite Simpson over phi in [0, pi/2]
    let n = 200_000;
    let h = PI / 2.0 / n as f64;
    let f = |phi: f64| radiant_intensity(power, order, phi) * 2.0 * PI * phi.sin();
    let mut s = f(0.0) + f(PI / 2.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn conservation(runs: &[&RunOutput]) -> Outcome {
    let mut worst = 0.0f64;
    for n in HEMISPHERE_ORDERS {
        worst = worst.max(rel(hemisphere_integral(n, 1.7), 1.7));
    }
    let rates = [1e8, 1e9, 5e9, 2e10, 1e11];
    let mut splits = 0;
    for run in runs {
        for seat in &run.seats {
            for ir in seat.irs.iter().filter(|ir| ir.total_power() > 0.0) {
                for rb in rates {
                    let (p1, p0) = ook_partition(ir, rb).map_err(|e| e.to_string())?;
                    if p1 + p0 != ir.total_power() || p1 < 0.0 || p0 < 0.0 {
                        return Err(format!(
                            "seat {} split at {rb}: {p1} + {p0} != {}",
                            seat.seat,
                            ir.total_power()
                        ));
                    }
                    splits += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..10_000 {
        let taps: Vec<(f64, f64)> = (0..rng.gen_range(1..80))
            .map(|_| (rng.gen_range(0..2000) as f64 * 5e-11, rng.gen_range(1e-12..1.0)))
            .collect();
        let ir = ImpulseResponse::from_taps(5e-11, &taps);
        let rb = 10f64.powf(rng.gen_range(7.0..11.5));
        let (p1, p0) = ook_partition(&ir, rb).map_err(|e| e.to_string())?;
        if p1 + p0 != ir.total_power() {
            return Err(format!(
                "random response split at {rb}: {p1} + {p0} != {}",
                ir.total_power()
            ));
        }
        splits += 1;
    }
    check(
        worst <= HEMISPHERE_REL_TOL,
        format!("hemisphere worst rel err {worst:.2e}; {splits} exact partitions"),
    )
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn receiver_comparison(run: &RunOutput, elapsed: Duration) -> Outcome {
    let spreads = |kind: &str| -> Vec<f64> {
        run.seats
            .iter()
            .filter(|s| s.receiver.as_str() == kind)
            .map(|s| s.report.delay_spread.unwrap_or(0.0))
            .collect()
    };
    let (imr, adr) = (spreads("imr"), spreads("adr"));
    if imr.len() != 40 || adr.len() != 40 {
        return Err(format!(
            "expected 40 seats per receiver, got {} ImR / {} ADR",
            imr.len(),
            adr.len()
        ));
    }
    let (m_imr, m_adr) = (median(imr), median(adr));
    let mut strict = 0;
    let mut violations = 0;
    for s in run.seats.iter().filter(|s| s.receiver.as_str() == "adr") {
        let sc = s.report.result(Combiner::Sc).unwrap().sinr;
        let mrc = s.report.result(Combiner::Mrc).unwrap().sinr;
        if mrc > sc {
            strict += 1;
        } else if mrc < sc {
            violations += 1;
        }
    }
    check(
        m_imr < m_adr && violations == 0 && strict >= 1 && elapsed < SWEEP_BUDGET,
        format!(
            "median delay spread ImR {:.4} ps < ADR {:.4} ps; ADR MRC > SC at {strict}/40 seats, MRC < SC at {violations}; {elapsed:.2?}",
            m_imr * 1e12,
            m_adr * 1e12
        ),
    )
}

fn determinism(reference: &RunOutput, others: &[&RunOutput], same_threads: (&Path, &Path)) -> Outcome {
    let mut worst = 0.0f64;
    for other in others {
        if other.seats.len() != reference.seats.len() {
            return Err("seat counts differ".into());
        }
        for (a, b) in reference.seats.iter().zip(&other.seats) {
            if a.seat != b.seat || a.receiver != b.receiver || a.serving != b.serving {
                return Err(format!("seat {} differs in identity or serving branch", a.seat));
            }
            for (x, y) in a.report.results.iter().zip(&b.report.results) {
                worst = worst.max(rel(x.sinr, y.sinr)).max(rel(x.ber, y.ber));
            }
            for (x, y) in a.report.branch_sinr.iter().zip(&b.report.branch_sinr) {
                worst = worst.max(rel(*x, *y));
            }
            match (a.report.delay_spread, b.report.delay_spread) {
                (Some(x), Some(y)) => worst = worst.max(rel(x, y)),
                (None, None) => {}
                _ => return Err(format!("seat {} delay spread presence differs", a.seat)),
            }
        }
    }
    let (x, y) = same_threads;
    let identical = fs::read(x.join(LINK_REPORT)).ok() == fs::read(y.join(LINK_REPORT)).ok()
        && fs::read(x.join("branch_sinr.csv")).ok() == fs::read(y.join("branch_sinr.csv")).ok();
    check(
        worst <= DETERMINISM_REL_TOL && identical,
        format!(
            "{} runs vs reference, worst rel diff {worst:.2e}; same-thread CSVs byte-identical: {identical}",
            others.len()
        ),
    )
}

/// `Q^-1(p)` by bisection on the erfc-based Q.
fn q_inverse(p: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_function(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn max_rate_contract() -> Outcome {
    let grid = RateGrid::default();
    let noise: NoiseParams<f64> = NoiseParams::from_config(&NoiseConfig::default(), 0.4);
    let gamma = q_inverse(TARGET_BER).powi(2);
    let r = noise.responsivity;
    let q = ELECTRON_CHARGE;
    let room = dark_room();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    let mut drawn = 0;
    let mut worst_gap = 0.0f64;
    while checked < RATE_LINKS {
        drawn += 1;
        if drawn > 2000 {
            return Err(format!("only {checked} usable links in {drawn} draws"));
        }
        let mut link = random_los(&mut rng);
        link.area = rng.gen_range(1e-5..1e-3);
        let ir = los_trace(&link, &room);
        let p = ir.total_power();
        if p == 0.0 {
            continue;
        }
        let interferers: Vec<ImpulseResponse<f64>> = (0..rng.gen_range(0..3))
            .map(|_| {
                let mut l = random_los(&mut rng);
                l.detector = link.detector;
                l.normal = link.normal;
                l.area = link.area;
                l.fov_deg = link.fov_deg;
                l.power *= 0.05;
                los_trace(&l, &room)
            })
            .collect();
        let pi2: f64 = interferers.iter().map(|i| (r * i.total_power()).powi(2)).sum();
        let per_hz = 2.0 * q * r * p + 2.0 * q * noise.background_current + noise.preamp_density.powi(2);
        let closed = ((r * p).powi(2) - gamma * pi2) / (gamma * per_hz);
        // outside the grid, or so close to an edge that the check is vacuous
        if !(closed > grid.rate(1) && closed < grid.rate(grid.len() - 2)) {
            continue;
        }
        let found = max_data_rate(&ir, &interferers, &noise, TARGET_BER, &grid).map_err(|e| e.to_string())?;
        let inputs = ChannelInputs::new(&ir, interferers.iter().map(|i| i.total_power()).collect());
        let idx = (0..grid.len()).find(|&i| grid.rate(i) == found);
        let Some(idx) = idx else {
            return Err(format!("returned rate {found} is not a grid point"));
        };
        if ber(inputs.sinr_at(found, &noise)) > TARGET_BER {
            return Err(format!("rate {found} fails the BER target"));
        }
        let next = grid.rate(idx + 1);
        if ber(inputs.sinr_at(next, &noise)) <= TARGET_BER {
            return Err(format!("next grid rate {next} still passes"));
        }
        if found > closed * (1.0 + RATE_EDGE_REL_TOL) || next < closed * (1.0 - RATE_EDGE_REL_TOL) {
            return Err(format!("closed form {closed} outside [{found}, {next})"));
        }
        worst_gap = worst_gap.max((closed - found) / found);
        checked += 1;
    }
    check(
        true,
        format!(
            "{checked} LOS links ({drawn} drawn); closed form within one grid step (max gap {:.3}%)",
            worst_gap * 100.0
        ),
    )
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().expect("temp dir");
    let spec = |name: &str, threads: Option<usize>| RunSpec {
        rows: RowSpan::new(0, 4),
        threads,
        ..RunSpec::new(default_config(), scratch.path().join(name))
    };

    let mut lines: Vec<(usize, &str, Outcome)> = vec![
        (1, "LOS oracle", los_oracle()),
        (2, "brute-force equivalence", brute_force_equivalence()),
        (4, "lens polynomial", lens_exactness()),
        (5, "Q function", q_function_values()),
        (9, "max data rate", max_rate_contract()),
    ];

    let start = Instant::now();
    let main_run = simulate(&spec("default", None));
    let sweep_elapsed = start.elapsed();
    let repeat = (
        simulate(&spec("one-thread-a", Some(1))),
        simulate(&spec("one-thread-b", Some(1))),
        simulate(&spec("three-threads", Some(3))),
    );
    let fast = simulate(&RunSpec {
        rows: RowSpan::new(2, 3),
        rate: RateChoice::Fixed(20.0),
        ..RunSpec::new(default_config(), scratch.path().join("fast"))
    });

    match (&main_run, &repeat, &fast) {
        (Ok(a), (Ok(b), Ok(c), Ok(d)), Ok(e)) => {
            let all = [a, b, c, d, e];
            lines.push((3, "MRC >= SC invariants", combiner_invariants(&all)));
            lines.push((6, "conservation", conservation(&all)));
            lines.push((7, "ADR vs ImR sweep shape", receiver_comparison(a, sweep_elapsed)));
            lines.push((
                8,
                "determinism",
                determinism(
                    a,
                    &[b, c, d],
                    (
                        &scratch.path().join("one-thread-a"),
                        &scratch.path().join("one-thread-b"),
                    ),
                ),
            ));
        }
        _ => {
            let err = [
                main_run.as_ref().err(),
                repeat.0.as_ref().err(),
                repeat.1.as_ref().err(),
                repeat.2.as_ref().err(),
                fast.as_ref().err(),
            ]
            .into_iter()
            .flatten()
            .map(|e| e.to_string())
            .next()
            .unwrap_or_default();
            for (n, name) in [
                (3, "MRC >= SC invariants"),
                (6, "conservation"),
                (7, "ADR vs ImR sweep shape"),
                (8, "determinism"),
            ] {
                lines.push((n, name, Err(format!("simulation failed: {err}"))));
            }
        }
    }

    lines.sort_by_key(|l| l.0);
    let mut passed = 0;
    let mut unexpected = 0;
    for (n, name, outcome) in &lines {
        match outcome {
            Ok(detail) => {
                passed += 1;
                println!("PASS  [{n}] {name}: {detail}");
            }
            Err(detail) if KNOWN_BLOCKERS.contains(n) => {
                println!("FAIL  [{n}] {name}: {detail} (known blocker: bound unattainable as stated)");
            }
            Err(detail) => {
                unexpected += 1;
                println!("FAIL  [{n}] {name}: {detail}");
            }
        }
    }
    println!(
        "{passed} of {} criteria passed; {} known blocker(s), {unexpected} unexpected failure(s)",
        lines.len(),
        lines.len() - passed - unexpected
    );
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
