//! Deterministic ray tracing of LOS, first- and second-order diffuse paths
//! into time-binned impulse responses.
//!
//! Two routes share the same per-hop factors:
//! - [`Tracer::impulse_responses`] bins every path by its exact delay;
//! - [`Tracer::received_power`] drops timing and factorizes the double sum
//!   over elements, which makes all-pairs interference totals cheap.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::num::Real;
use crate::optics::{Branch, Hits, Receiver, TransmitterUnit};
use crate::scene::{Scene, SurfaceElement};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Pair-visibility caches above this many bits are not built.
const PAIR_CACHE_LIMIT_BITS: usize = 1 << 31;

/// Received power per time bin for one (branch, detector) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpulseResponse<T> {
    pub bin_width: T,
    pub start: T,
    pub bins: Vec<T>,
    pub unit: usize,
    pub branch: usize,
    pub detector: usize,
}

impl<T: Real> ImpulseResponse<T> {
    pub fn empty(bin_width: T, unit: usize, branch: usize, detector: usize) -> Self {
        Self {
            bin_width,
            start: T::zero(),
            bins: Vec::new(),
            unit,
            branch,
            detector,
        }
    }

    /// Builds a response from `(time, power)` taps.
    pub fn from_taps(bin_width: T, taps: &[(T, T)]) -> Self {
        let mut ir = Self::empty(bin_width, 0, 0, 0);
        for &(t, p) in taps {
            ir.add(t, p);
        }
        ir
    }

    /// Adds `power` at arrival time `t` into bin `floor((t - start) / width)`.
    #[inline]
    pub fn add(&mut self, t: T, power: T) {
        let idx = ((t - self.start) / self.bin_width).floor().to_usize().unwrap_or(0);
        if idx >= self.bins.len() {
            self.bins.resize(idx + 1, T::zero());
        }
        self.bins[idx] = self.bins[idx] + power;
    }

    /// Start time of bin `i`.
    pub fn time_of(&self, i: usize) -> T {
        self.start + T::lit(i as f64) * self.bin_width
    }

    pub fn first_nonzero(&self) -> Option<usize> {
        self.bins.iter().position(|&p| p > T::zero())
    }

    pub fn total_power(&self) -> T {
        total_power(self)
    }
}

/// Sum of all bins.
pub fn total_power<T: Real>(ir: &ImpulseResponse<T>) -> T {
    ir.bins.iter().fold(T::zero(), |acc, &p| acc + p)
}

pub struct TraceRequest<'a, T> {
    pub scene: &'a Scene<T>,
    /// Fine grid, first bounce.
    pub first: &'a [SurfaceElement<T>],
    /// Coarse grid, second bounce.
    pub second: &'a [SurfaceElement<T>],
    pub units: &'a [TransmitterUnit<T>],
    pub receiver: &'a Receiver<T>,
    /// 0 = LOS only, up to 2.
    pub max_order: u8,
    pub bin_width: T,
}

/// Impulse responses for every (branch, detector-or-pixel) pair, ordered by
/// unit, then branch, then detector.
pub fn trace<T: Real>(request: &TraceRequest<'_, T>) -> Result<Vec<ImpulseResponse<T>>> {
    let tracer = Tracer::new(
        request.scene,
        request.first,
        request.second,
        request.max_order,
        request.bin_width,
    )?;
    let branches: Vec<(usize, usize, &Branch<T>)> = request
        .units
        .iter()
        .flat_map(|u| u.branches.iter().enumerate().map(move |(b, br)| (u.id, b, br)))
        .collect();
    let per_branch: Vec<Vec<ImpulseResponse<T>>> = branches
        .par_iter()
        .map(|&(unit, b, branch)| {
            let mut irs = tracer.impulse_responses(branch, request.receiver);
            for ir in &mut irs {
                ir.unit = unit;
                ir.branch = b;
            }
            irs
        })
        .collect();
    Ok(per_branch.into_iter().flatten().collect())
}

/// Element reduced to what the kernels need.
#[derive(Debug, Clone, Copy)]
struct Patch<T> {
    center: Vec3<T>,
    normal: Vec3<T>,
    area: T,
    rho: T,
}

/// Receiver-side factor of one element: distance and per-channel gain
/// `A_eff cos(phi) / (pi d^2)` for unit power re-emitted by the element.
#[derive(Debug, Clone, Copy)]
struct ViewEntry<T> {
    element: usize,
    dist: T,
    gains: Hits<T>,
}

struct PairVisibility {
    n_first: usize,
    bits: Vec<u64>,
}

impl PairVisibility {
    #[inline]
    fn get(&self, first: usize, second: usize) -> bool {
        let k = second * self.n_first + first;
        (self.bits[k >> 6] >> (k & 63)) & 1 == 1
    }
}

/// Precomputed tracing state for one scene and element set.
pub struct Tracer<'a, T> {
    scene: &'a Scene<T>,
    first: Vec<Patch<T>>,
    second: Vec<Patch<T>>,
    max_order: u8,
    bin_width: T,
    pairs: Option<PairVisibility>,
}

fn patches<T: Real>(elements: &[SurfaceElement<T>]) -> Vec<Patch<T>> {
    elements
        .iter()
        .filter(|e| e.reflectivity > T::zero() && !e.blocked)
        .map(|e| Patch {
            center: e.center,
            normal: e.normal,
            area: e.area,
            rho: e.reflectivity,
        })
        .collect()
}

impl<'a, T: Real> Tracer<'a, T> {
    pub fn new(
        scene: &'a Scene<T>,
        first: &[SurfaceElement<T>],
        second: &[SurfaceElement<T>],
        max_order: u8,
        bin_width: T,
    ) -> Result<Self> {
        if max_order > 2 {
            return Err(Error::Config(format!("max_order must be 0, 1 or 2, got {max_order}")));
        }
        if !(bin_width > T::zero()) {
            return Err(Error::NonPositive {
                field: "subdivision.time_bin_s",
                value: bin_width.as_f64(),
            });
        }
        let first = if max_order >= 1 { patches(first) } else { Vec::new() };
        let second = if max_order >= 2 { patches(second) } else { Vec::new() };
        let mut tracer = Self {
            scene,
            first,
            second,
            max_order,
            bin_width,
            pairs: None,
        };
        let n = tracer.first.len() * tracer.second.len();
        if n > 0 && n <= PAIR_CACHE_LIMIT_BITS {
            tracer.pairs = Some(tracer.build_pair_visibility());
        }
        Ok(tracer)
    }

    pub fn max_order(&self) -> u8 {
        self.max_order
    }

    pub fn bin_width(&self) -> T {
        self.bin_width
    }

    fn build_pair_visibility(&self) -> PairVisibility {
        let n1 = self.first.len();
        let rows: Vec<Vec<bool>> = self
            .second
            .par_iter()
            .map(|e2| self.first.iter().map(|e1| self.pair_open(e1, e2)).collect())
            .collect();
        let mut bits = vec![0u64; (n1 * self.second.len()).div_ceil(64)];
        for (j, row) in rows.iter().enumerate() {
            for (i, &open) in row.iter().enumerate() {
                if open {
                    let k = j * n1 + i;
                    bits[k >> 6] |= 1 << (k & 63);
                }
            }
        }
        PairVisibility { n_first: n1, bits }
    }

    /// Geometric facing test plus occlusion for an element pair.
    fn pair_open(&self, e1: &Patch<T>, e2: &Patch<T>) -> bool {
        let v = e2.center - e1.center;
        e1.normal.dot(v) > T::zero() && e2.normal.dot(v) < T::zero() && self.scene.visible(e1.center, e2.center)
    }

    #[inline]
    fn pair_visible(&self, i: usize, j: usize) -> bool {
        match &self.pairs {
            Some(p) => p.get(i, j),
            None => self.pair_open(&self.first[i], &self.second[j]),
        }
    }

    /// Power re-emitted by element `i` per element-to-element kernel:
    /// `rho2 cos(phi) cos(alpha) dA2 / (pi d^2)`, with the distance.
    #[inline]
    fn kernel(&self, e1: &Patch<T>, e2: &Patch<T>) -> (T, T) {
        let v = e2.center - e1.center;
        let d2 = v.norm_sq();
        let d = d2.sqrt();
        let cos_out = e1.normal.dot(v) / d;
        let cos_in = -e2.normal.dot(v) / d;
        if cos_out <= T::zero() || cos_in <= T::zero() {
            return (T::zero(), d);
        }
        (e2.rho * cos_out * cos_in * e2.area / (T::PI() * d2), d)
    }

    /// Power re-emitted by each first-grid element under `branch`, with the
    /// branch-to-element distance.
    fn illuminate(&self, branch: &Branch<T>) -> Vec<(T, T)> {
        let norm = branch.power * (branch.order + T::one()) / (T::two() * T::PI());
        self.first
            .iter()
            .map(|e| {
                let v = e.center - branch.position;
                let d2 = v.norm_sq();
                let d = d2.sqrt();
                let cos_phi = branch.direction.dot(v) / d;
                let cos_in = -e.normal.dot(v) / d;
                if cos_phi <= T::zero() || cos_in <= T::zero() || !self.scene.visible(branch.position, e.center) {
                    return (T::zero(), d);
                }
                (e.rho * norm * cos_phi.powf(branch.order) * cos_in * e.area / d2, d)
            })
            .collect()
    }

    fn view(&self, elements: &[Patch<T>], receiver: &Receiver<T>) -> Vec<ViewEntry<T>> {
        let r = receiver.position();
        let mut out = Vec::new();
        for (i, e) in elements.iter().enumerate() {
            let v = r - e.center;
            let d2 = v.norm_sq();
            let d = d2.sqrt();
            let cos_out = e.normal.dot(v) / d;
            if cos_out <= T::zero() {
                continue;
            }
            let hits = receiver.collect(-v * (T::one() / d));
            if hits.is_empty() || !self.scene.visible(e.center, r) {
                continue;
            }
            let scale = cos_out / (T::PI() * d2);
            let mut gains = Hits::new();
            for (k, a) in hits.iter() {
                gains.push(k, a * scale);
            }
            out.push(ViewEntry {
                element: i,
                dist: d,
                gains,
            });
        }
        out
    }

    /// LOS arrival: `(delay distance, per-channel received power)`.
    fn los(&self, branch: &Branch<T>, receiver: &Receiver<T>) -> Option<(T, Hits<T>)> {
        let v = receiver.position() - branch.position;
        let d2 = v.norm_sq();
        if d2 == T::zero() {
            return None;
        }
        let d = d2.sqrt();
        let cos_phi = branch.direction.dot(v) / d;
        if cos_phi <= T::zero() {
            return None;
        }
        let hits = receiver.collect(-v * (T::one() / d));
        if hits.is_empty() || !self.scene.visible(branch.position, receiver.position()) {
            return None;
        }
        let scale = branch.power * (branch.order + T::one()) * cos_phi.powf(branch.order) / (T::two() * T::PI() * d2);
        let mut out = Hits::new();
        for (k, a) in hits.iter() {
            out.push(k, a * scale);
        }
        Some((d, out))
    }

    /// Time-binned response of every detector/pixel of `receiver` to one branch.
    pub fn impulse_responses(&self, branch: &Branch<T>, receiver: &Receiver<T>) -> Vec<ImpulseResponse<T>> {
        let c = T::lit(SPEED_OF_LIGHT);
        let mut irs: Vec<_> = (0..receiver.channels())
            .map(|k| ImpulseResponse::empty(self.bin_width, 0, 0, k))
            .collect();

        if let Some((d, hits)) = self.los(branch, receiver) {
            for (k, p) in hits.iter() {
                irs[k].add(d / c, p);
            }
        }
        if self.max_order == 0 {
            return irs;
        }

        let lit = self.illuminate(branch);
        for entry in self.view(&self.first, receiver) {
            let (a1, d1) = lit[entry.element];
            if a1 == T::zero() {
                continue;
            }
            let t = (d1 + entry.dist) / c;
            for (k, g) in entry.gains.iter() {
                irs[k].add(t, a1 * g);
            }
        }
        if self.max_order == 1 {
            return irs;
        }

        let view2 = self.view(&self.second, receiver);
        for (i, e1) in self.first.iter().enumerate() {
            let (a1, d1) = lit[i];
            if a1 == T::zero() {
                continue;
            }
            for entry in &view2 {
                let j = entry.element;
                if !self.pair_visible(i, j) {
                    continue;
                }
                let (kernel, d12) = self.kernel(e1, &self.second[j]);
                if kernel == T::zero() {
                    continue;
                }
                let a2 = a1 * kernel;
                let t = (d1 + d12 + entry.dist) / c;
                for (k, g) in entry.gains.iter() {
                    irs[k].add(t, a2 * g);
                }
            }
        }
        irs
    }

    /// Total received power for every (branch, receiver, channel) triple,
    /// without time resolution. Indexed `[branch][receiver][channel]`.
    pub fn received_power(&self, branches: &[Branch<T>], receivers: &[Receiver<T>]) -> Vec<Vec<Vec<T>>> {
        let mut out: Vec<Vec<Vec<T>>> = branches
            .iter()
            .map(|_| receivers.iter().map(|r| vec![T::zero(); r.channels()]).collect())
            .collect();

        for (b, branch) in branches.iter().enumerate() {
            for (r, receiver) in receivers.iter().enumerate() {
                if let Some((_, hits)) = self.los(branch, receiver) {
                    for (k, p) in hits.iter() {
                        out[b][r][k] = out[b][r][k] + p;
                    }
                }
            }
        }
        if self.max_order == 0 {
            return out;
        }

        let views1: Vec<_> = receivers.par_iter().map(|r| self.view(&self.first, r)).collect();
        let views2: Vec<_> = if self.max_order >= 2 {
            receivers.par_iter().map(|r| self.view(&self.second, r)).collect()
        } else {
            Vec::new()
        };

        const CHUNK: usize = 64;
        for (chunk_idx, chunk) in branches.chunks(CHUNK).enumerate() {
            let nb = chunk.len();
            let lit: Vec<Vec<(T, T)>> = chunk.par_iter().map(|br| self.illuminate(br)).collect();

            for (r, view) in views1.iter().enumerate() {
                for (cb, a) in lit.iter().enumerate() {
                    let acc = &mut out[chunk_idx * CHUNK + cb][r];
                    for entry in view {
                        let a1 = a[entry.element].0;
                        if a1 == T::zero() {
                            continue;
                        }
                        for (k, g) in entry.gains.iter() {
                            acc[k] = acc[k] + a1 * g;
                        }
                    }
                }
            }
            if self.max_order < 2 {
                continue;
            }

            // a1 laid out [element][branch] for the inner loop
            let n1 = self.first.len();
            let mut lit_t = vec![T::zero(); n1 * nb];
            for (cb, a) in lit.iter().enumerate() {
                for (i, &(p, _)) in a.iter().enumerate() {
                    lit_t[i * nb + cb] = p;
                }
            }
            // power arriving at and re-emitted by each second-grid element
            let relayed: Vec<Vec<T>> = self
                .second
                .par_iter()
                .enumerate()
                .map(|(j, e2)| {
                    let mut acc = vec![T::zero(); nb];
                    for (i, e1) in self.first.iter().enumerate() {
                        if !self.pair_visible(i, j) {
                            continue;
                        }
                        let (kernel, _) = self.kernel(e1, e2);
                        if kernel == T::zero() {
                            continue;
                        }
                        let row = &lit_t[i * nb..(i + 1) * nb];
                        for (a, &p) in acc.iter_mut().zip(row) {
                            *a = *a + p * kernel;
                        }
                    }
                    acc
                })
                .collect();

            for (r, view) in views2.iter().enumerate() {
                for cb in 0..nb {
                    let acc = &mut out[chunk_idx * CHUNK + cb][r];
                    for entry in view {
                        let a2 = relayed[entry.element][cb];
                        if a2 == T::zero() {
                            continue;
                        }
                        for (k, g) in entry.gains.iter() {
                            acc[k] = acc[k] + a2 * g;
                        }
                    }
                }
            }
        }
        out
    }
}
