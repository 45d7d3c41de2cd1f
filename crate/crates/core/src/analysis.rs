//! Link metrics: delay spread, OOK signal/ISI split, noise, SINR, diversity
//! combining, BER and the maximum bit rate.

use crate::channel::ImpulseResponse;
use crate::config::DelayWeighting;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::optics::ReceiverKind;

/// Elementary charge, C.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

/// RMS delay spread of an impulse response. Bin `i` contributes at its start
/// time `t_i` with weight `P_i^2` (default) or `P_i`.
pub fn delay_spread<T: Real>(ir: &ImpulseResponse<T>, weighting: DelayWeighting) -> Result<T> {
    let weight = |p: T| match weighting {
        DelayWeighting::PowerSquared => p * p,
        DelayWeighting::Power => p,
    };
    let mut w_sum = T::zero();
    let mut tw_sum = T::zero();
    for (i, &p) in ir.bins.iter().enumerate() {
        let w = weight(p);
        w_sum = w_sum + w;
        tw_sum = tw_sum + ir.time_of(i) * w;
    }
    if !(w_sum > T::zero()) {
        return Err(Error::ZeroPower);
    }
    let mean = tw_sum / w_sum;
    let mut var = T::zero();
    for (i, &p) in ir.bins.iter().enumerate() {
        let w = weight(p);
        if w > T::zero() {
            var = var + (ir.time_of(i) - mean).sq() * w;
        }
    }
    Ok((var / w_sum).sqrt())
}

/// Cumulative power of an impulse response, for O(1) signal/ISI splits.
#[derive(Debug, Clone)]
pub struct CumulativeResponse<T> {
    bin_width: T,
    start: T,
    first: usize,
    /// `prefix[i]` = power in bins `first..first+i`.
    prefix: Vec<T>,
    total: T,
}

impl<T: Real> CumulativeResponse<T> {
    pub fn new(ir: &ImpulseResponse<T>) -> Result<Self> {
        let first = ir.first_nonzero().ok_or(Error::ZeroPower)?;
        let mut prefix = Vec::with_capacity(ir.bins.len() - first + 1);
        let mut acc = T::zero();
        prefix.push(acc);
        for &p in &ir.bins[first..] {
            acc = acc + p;
            prefix.push(acc);
        }
        Ok(Self {
            bin_width: ir.bin_width,
            start: ir.start,
            first,
            total: ir.total_power(),
            prefix,
        })
    }

    pub fn total(&self) -> T {
        self.total
    }

    /// `(Ps1, Ps0)`: power inside `[t0, t0 + 1/bit_rate)` and after it, where
    /// `t0` is the start of the first nonzero bin. A bin starting exactly at
    /// the window end counts as ISI.
    pub fn split(&self, bit_rate: T) -> (T, T) {
        let t0 = self.start + T::lit(self.first as f64) * self.bin_width;
        let window_end = t0 + T::one() / bit_rate;
        // bins whose start time is strictly before window_end
        let inside = ((window_end - t0) / self.bin_width).ceil();
        let n = self.prefix.len() - 1;
        let inside = inside.to_usize().unwrap_or(n).min(n);
        let mut count = inside;
        // guard the strict boundary against rounding in the ceil above
        while count > 0 && self.start + T::lit((self.first + count - 1) as f64) * self.bin_width >= window_end {
            count -= 1;
        }
        while count < n && self.start + T::lit((self.first + count) as f64) * self.bin_width < window_end {
            count += 1;
        }
        let ps1 = self.prefix[count];
        conserving_split(ps1, self.total)
    }
}

/// `(part, total - part)`, each nudged by a few ulps if needed so that the
/// two add back to `total` exactly in floating point. Moving only the
/// remainder is not always enough: when both halves share the top binade a
/// one-ulp step in either moves the sum by half an ulp and can tie away.
fn conserving_split<T: Real>(part: T, total: T) -> (T, T) {
    let rest = (total - part).max(T::zero());
    let mut p = part;
    for dp in 0..5usize {
        // 0, +1, -1, +2, -2 ulps of `part`
        if dp > 0 {
            p = if dp % 2 == 1 {
                step(part, dp.div_ceil(2), true)
            } else {
                step(part, dp / 2, false)
            };
            if p < T::zero() {
                continue;
            }
        }
        let mut r = (total - p).max(T::zero());
        for _ in 0..8 {
            let sum = p + r;
            if sum == total {
                return (p, r);
            }
            r = if sum < total { next_up(r) } else { next_down(r) };
            if r < T::zero() {
                break;
            }
        }
    }
    (part, rest)
}

fn step<T: Real>(x: T, n: usize, up: bool) -> T {
    (0..n).fold(x, |v, _| ulp_step(v, up))
}

fn ulp_step<T: Real>(x: T, up: bool) -> T {
    if x == T::zero() {
        return if up {
            T::min_positive_value()
        } else {
            -T::min_positive_value()
        };
    }
    let (mantissa, exponent, sign) = x.integer_decode();
    let grow = (sign > 0) == up;
    let m = if grow { mantissa + 1 } else { mantissa - 1 };
    let scale = T::two().powi(exponent as i32);
    let v = T::lit(m as f64) * scale;
    if sign > 0 {
        v
    } else {
        -v
    }
}

fn next_up<T: Real>(x: T) -> T {
    ulp_step(x, true)
}

fn next_down<T: Real>(x: T) -> T {
    ulp_step(x, false)
}

/// Signal/ISI split of `ir` at `bit_rate` (Hz).
pub fn ook_partition<T: Real>(ir: &ImpulseResponse<T>, bit_rate: T) -> Result<(T, T)> {
    if !(bit_rate > T::zero()) {
        return Err(Error::NonPositive {
            field: "bit_rate",
            value: bit_rate.as_f64(),
        });
    }
    Ok(CumulativeResponse::new(ir)?.split(bit_rate))
}

/// Received OOK powers of the wanted signal and each interferer.
#[derive(Debug, Clone, PartialEq)]
pub struct OokPowers<T> {
    pub ps1: T,
    pub ps0: T,
    /// `(Pi1, Pi0)` per interferer.
    pub interferers: Vec<(T, T)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseBreakdown<T> {
    pub preamp: T,
    pub background: T,
    pub signal: T,
    pub total: T,
    pub bandwidth: T,
    pub background_current: T,
}

/// Receiver noise parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams<T> {
    /// Preamplifier input current density, A/sqrt(Hz).
    pub preamp_density: T,
    /// Background photocurrent per detector or pixel, A.
    pub background_current: T,
    pub responsivity: T,
}

impl<T: Real> NoiseParams<T> {
    pub fn from_config(noise: &crate::config::NoiseConfig, responsivity: f64) -> Self {
        Self {
            preamp_density: T::lit(noise.preamp_density_a_per_sqrt_hz),
            background_current: T::lit(noise.background_current_a),
            responsivity: T::lit(responsivity),
        }
    }

    pub fn sigma(&self, ps1: T, bandwidth: T) -> NoiseBreakdown<T> {
        noise_sigma(
            ps1,
            self.background_current,
            bandwidth,
            self.responsivity,
            self.preamp_density,
        )
    }
}

/// Shot and preamplifier noise currents (A) in bandwidth `b`.
pub fn noise_sigma<T: Real>(
    ps1: T,
    background_current: T,
    b: T,
    responsivity: T,
    preamp_density: T,
) -> NoiseBreakdown<T> {
    let q = T::lit(ELECTRON_CHARGE);
    let signal = (T::two() * q * responsivity * ps1 * b).sqrt();
    let background = (T::two() * q * background_current * b).sqrt();
    let preamp = preamp_density * b.sqrt();
    NoiseBreakdown {
        preamp,
        background,
        signal,
        total: total_noise(preamp, background, signal),
        bandwidth: b,
        background_current,
    }
}

/// `sqrt(pr^2 + bn^2 + sig^2)`.
pub fn total_noise<T: Real>(preamp: T, background: T, signal: T) -> T {
    (preamp * preamp + background * background + signal * signal).sqrt()
}

/// `R^2 (Ps1 - Ps0)^2 / (sigma_t^2 + sum R^2 (Pi1 - Pi0)^2)`; a closed eye
/// (`Ps0 > Ps1`) gives zero.
pub fn sinr<T: Real>(powers: &OokPowers<T>, noise: &NoiseBreakdown<T>, responsivity: T) -> Result<T> {
    let r2 = responsivity * responsivity;
    let interference = powers
        .interferers
        .iter()
        .fold(T::zero(), |acc, &(p1, p0)| acc + r2 * (p1 - p0).sq());
    let denom = noise.total * noise.total + interference;
    if !(denom > T::zero()) {
        return Err(Error::ZeroDenominator);
    }
    let eye = (powers.ps1 - powers.ps0).max(T::zero());
    Ok(r2 * eye * eye / denom)
}

/// Selection combining: the best branch.
pub fn combine_sc<T: Real>(per_branch: &[T]) -> Result<T> {
    per_branch.iter().copied().reduce(T::max).ok_or(Error::NoBranches)
}

/// Maximum ratio combining: the sum over branches.
pub fn combine_mrc<T: Real>(per_branch: &[T]) -> Result<T> {
    if per_branch.is_empty() {
        return Err(Error::NoBranches);
    }
    Ok(per_branch.iter().fold(T::zero(), |a, &s| a + s))
}

/// Gaussian tail probability `0.5 erfc(x / sqrt 2)`.
pub fn q_function<T: Real>(x: T) -> T {
    T::lit(0.5 * libm::erfc(x.as_f64() / std::f64::consts::SQRT_2))
}

/// Large-argument approximation `exp(-x^2/2) / (x sqrt(2 pi))`.
pub fn q_asymptotic<T: Real>(x: T) -> T {
    (-(x * x) / T::two()).exp() / (x * (T::two() * T::PI()).sqrt())
}

/// OOK bit error rate `Q(sqrt(SINR))`.
pub fn ber<T: Real>(sinr_value: T) -> T {
    q_function(sinr_value.max(T::zero()).sqrt())
}

/// Bit-rate search grid: geometric steps of `ratio` from `min` up to `max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateGrid {
    pub min: f64,
    pub max: f64,
    pub ratio: f64,
}

impl Default for RateGrid {
    fn default() -> Self {
        Self {
            min: 1e6,
            max: 1e12,
            ratio: 1.01,
        }
    }
}

impl RateGrid {
    pub fn len(&self) -> usize {
        ((self.max / self.min).ln() / self.ratio.ln()).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rate(&self, index: usize) -> f64 {
        self.min * self.ratio.powi(index as i32)
    }

    /// Largest grid rate for which `passes` holds, scanning from the top.
    pub fn largest_passing(&self, mut passes: impl FnMut(f64) -> bool) -> Option<usize> {
        (0..self.len()).rev().find(|&i| passes(self.rate(i)))
    }
}

/// Per-channel inputs for one receiver at one seat.
#[derive(Debug, Clone)]
pub struct ChannelInputs<T> {
    /// Serving-branch response; `None` when the channel receives nothing.
    pub signal: Option<CumulativeResponse<T>>,
    /// Total received power from each interfering branch.
    pub interferers: Vec<T>,
}

impl<T: Real> ChannelInputs<T> {
    pub fn new(signal: &ImpulseResponse<T>, interferers: Vec<T>) -> Self {
        Self {
            signal: CumulativeResponse::new(signal).ok(),
            interferers,
        }
    }

    /// SINR of this channel at `bit_rate`, with `B = bit_rate` and worst-case
    /// interferers (`Pi1` = total power, `Pi0` = 0).
    pub fn sinr_at(&self, bit_rate: T, noise: &NoiseParams<T>) -> T {
        let (ps1, ps0) = match &self.signal {
            Some(c) => c.split(bit_rate),
            None => (T::zero(), T::zero()),
        };
        let powers = OokPowers {
            ps1,
            ps0,
            interferers: self.interferers.iter().map(|&p| (p, T::zero())).collect(),
        };
        let breakdown = noise.sigma(ps1, bit_rate);
        sinr(&powers, &breakdown, noise.responsivity).unwrap_or(T::zero())
    }
}

/// Largest grid rate with `BER <= target` for a single-channel link with the
/// given interferer responses; 0 when no grid rate qualifies.
pub fn max_data_rate<T: Real>(
    ir: &ImpulseResponse<T>,
    interferers: &[ImpulseResponse<T>],
    noise: &NoiseParams<T>,
    target_ber: T,
    grid: &RateGrid,
) -> Result<T> {
    let inputs = ChannelInputs {
        signal: Some(CumulativeResponse::new(ir)?),
        interferers: interferers.iter().map(|i| i.total_power()).collect(),
    };
    let found = grid.largest_passing(|rb| ber(inputs.sinr_at(T::lit(rb), noise)) <= target_ber);
    Ok(found.map(|i| T::lit(grid.rate(i))).unwrap_or(T::zero()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Combiner {
    Sc,
    Mrc,
}

impl Combiner {
    pub fn as_str(self) -> &'static str {
        match self {
            Combiner::Sc => "sc",
            Combiner::Mrc => "mrc",
        }
    }

    pub fn combine<T: Real>(self, per_branch: &[T]) -> Result<T> {
        match self {
            Combiner::Sc => combine_sc(per_branch),
            Combiner::Mrc => combine_mrc(per_branch),
        }
    }
}

/// Everything needed to evaluate one seat for one receiver type.
#[derive(Debug, Clone)]
pub struct SeatLink<T> {
    pub seat: usize,
    pub receiver: ReceiverKind,
    pub serving: Vec<ImpulseResponse<T>>,
    pub channels: Vec<ChannelInputs<T>>,
}

impl<T: Real> SeatLink<T> {
    pub fn new(
        seat: usize,
        receiver: ReceiverKind,
        serving: Vec<ImpulseResponse<T>>,
        interference: Vec<Vec<T>>,
    ) -> Self {
        let channels = serving
            .iter()
            .zip(interference)
            .map(|(ir, i)| ChannelInputs::new(ir, i))
            .collect();
        Self {
            seat,
            receiver,
            serving,
            channels,
        }
    }

    pub fn branch_sinr(&self, bit_rate: T, noise: &NoiseParams<T>) -> Vec<T> {
        self.channels.iter().map(|c| c.sinr_at(bit_rate, noise)).collect()
    }

    pub fn combined_sinr(&self, combiner: Combiner, bit_rate: T, noise: &NoiseParams<T>) -> T {
        combiner
            .combine(&self.branch_sinr(bit_rate, noise))
            .unwrap_or(T::zero())
    }

    pub fn max_rate(&self, combiner: Combiner, noise: &NoiseParams<T>, target_ber: T, grid: &RateGrid) -> T {
        grid.largest_passing(|rb| ber(self.combined_sinr(combiner, T::lit(rb), noise)) <= target_ber)
            .map(|i| T::lit(grid.rate(i)))
            .unwrap_or(T::zero())
    }

    /// Channel the selection combiner picks at `bit_rate` (falls back to the
    /// strongest channel when every SINR is zero).
    pub fn selected_channel(&self, bit_rate: T, noise: &NoiseParams<T>) -> Option<usize> {
        let sinrs = self.branch_sinr(bit_rate, noise);
        let best = argmax(&sinrs)?;
        if sinrs[best] > T::zero() {
            return Some(best);
        }
        let powers: Vec<T> = self.serving.iter().map(|ir| ir.total_power()).collect();
        let strongest = argmax(&powers)?;
        (powers[strongest] > T::zero()).then_some(strongest)
    }
}

fn argmax<T: Real>(values: &[T]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] >= v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// How the operating bit rate of a report was chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMode<T> {
    Fixed(T),
    /// Search the grid and report SINR/BER at the found rate.
    FindMax {
        target_ber: T,
        grid: RateGrid,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinerResult<T> {
    pub combiner: Combiner,
    pub bit_rate: T,
    pub sinr: T,
    pub ber: T,
    /// Present only when the rate was searched.
    pub max_rate: Option<T>,
}

/// Per-seat metrics for one receiver type.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkReport<T> {
    pub seat: usize,
    pub receiver: ReceiverKind,
    /// Per-detector (or pixel) SINR at the first combiner's operating rate.
    pub branch_sinr: Vec<T>,
    pub delay_spread: Option<T>,
    pub results: Vec<CombinerResult<T>>,
}

impl<T: Real> LinkReport<T> {
    pub fn result(&self, combiner: Combiner) -> Option<&CombinerResult<T>> {
        self.results.iter().find(|r| r.combiner == combiner)
    }
}

/// Evaluates a seat link under each requested combiner.
pub fn evaluate_link<T: Real>(
    link: &SeatLink<T>,
    combiners: &[Combiner],
    noise: &NoiseParams<T>,
    mode: RateMode<T>,
    weighting: DelayWeighting,
) -> LinkReport<T> {
    let results: Vec<_> = combiners
        .iter()
        .map(|&combiner| {
            let (bit_rate, max_rate) = match mode {
                RateMode::Fixed(rb) => (rb, None),
                RateMode::FindMax { target_ber, grid } => {
                    let found = link.max_rate(combiner, noise, target_ber, &grid);
                    // a link that never qualifies is reported at the grid floor
                    let operating = if found > T::zero() { found } else { T::lit(grid.min) };
                    (operating, Some(found))
                }
            };
            let sinr = link.combined_sinr(combiner, bit_rate, noise);
            CombinerResult {
                combiner,
                bit_rate,
                sinr,
                ber: ber(sinr),
                max_rate,
            }
        })
        .collect();
    let reference_rate = results.first().map(|r| r.bit_rate).unwrap_or(T::lit(1e9));
    let delay_spread = link
        .selected_channel(reference_rate, noise)
        .and_then(|k| delay_spread(&link.serving[k], weighting).ok());
    LinkReport {
        seat: link.seat,
        receiver: link.receiver,
        branch_sinr: link.branch_sinr(reference_rate, noise),
        delay_spread,
        results,
    }
}
