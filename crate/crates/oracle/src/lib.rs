//! Slow, literal reference integrator for tiny empty rooms.
//!
//! Nothing here is shared with the production tracer: vectors are plain
//! arrays, walls are tiled by their own loop, and every path is summed in a
//! straightforward nested loop. Used by tests only.

use std::f64::consts::PI;

pub const C: f64 = 299_792_458.0;

type V = [f64; 3];

fn sub(a: V, b: V) -> V {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: V, b: V) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn length(a: V) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wall {
    Floor,
    Ceiling,
    /// y = 0
    Left,
    /// y = size[1]
    Right,
    /// x = 0
    Front,
    /// x = size[0]
    Rear,
}

/// One reflective wall.
#[derive(Debug, Clone, Copy)]
pub struct Patch {
    pub wall: Wall,
    pub reflectivity: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Emitter {
    pub position: V,
    /// Unit vector.
    pub direction: V,
    pub order: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct Detector {
    pub position: V,
    /// Unit vector.
    pub normal: V,
    pub area: f64,
    /// Acceptance half-angle, radians.
    pub fov: f64,
}

/// Empty cuboid `[0, size]` with at most two reflective walls; every other
/// wall absorbs.
#[derive(Debug, Clone)]
pub struct OracleScene {
    pub size: V,
    pub patches: Vec<Patch>,
    /// Element size of the first bounce, at least 0.25 m.
    pub fine: f64,
    /// Element size of the second bounce, at least 0.25 m.
    pub coarse: f64,
    pub emitter: Emitter,
    pub detector: Detector,
    pub bin_width: f64,
}

/// One reflecting element.
#[derive(Debug, Clone, Copy)]
pub struct Cell {
    pub center: V,
    pub normal: V,
    pub area: f64,
    pub reflectivity: f64,
}

/// Binned received power.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResponse {
    pub bin_width: f64,
    pub bins: Vec<f64>,
}

impl OracleResponse {
    fn deposit(&mut self, t: f64, p: f64) {
        let i = (t / self.bin_width).floor() as usize;
        while self.bins.len() <= i {
            self.bins.push(0.0);
        }
        self.bins[i] += p;
    }

    pub fn total(&self) -> f64 {
        let mut s = 0.0;
        for p in &self.bins {
            s += p;
        }
        s
    }
}

/// Cells of `wall`: `round(len / step)` per axis (at least one), centers at
/// the middle of each cell.
pub fn cells(size: V, patch: &Patch, step: f64) -> Vec<Cell> {
    // (fixed axis, fixed value, first free axis, second free axis, inward normal)
    let (fixed, at, a, b, normal) = match patch.wall {
        Wall::Floor => (2, 0.0, 0, 1, [0.0, 0.0, 1.0]),
        Wall::Ceiling => (2, size[2], 0, 1, [0.0, 0.0, -1.0]),
        Wall::Left => (1, 0.0, 0, 2, [0.0, 1.0, 0.0]),
        Wall::Right => (1, size[1], 0, 2, [0.0, -1.0, 0.0]),
        Wall::Front => (0, 0.0, 1, 2, [1.0, 0.0, 0.0]),
        Wall::Rear => (0, size[0], 1, 2, [-1.0, 0.0, 0.0]),
    };
    let na = ((size[a] / step).round() as usize).max(1);
    let nb = ((size[b] / step).round() as usize).max(1);
    let wa = size[a] / na as f64;
    let wb = size[b] / nb as f64;
    let mut out = Vec::new();
    for i in 0..na {
        for j in 0..nb {
            let mut c = [0.0; 3];
            c[fixed] = at;
            c[a] = wa * (i as f64 + 0.5);
            c[b] = wb * (j as f64 + 0.5);
            out.push(Cell {
                center: c,
                normal,
                area: wa * wb,
                reflectivity: patch.reflectivity,
            });
        }
    }
    out
}

/// Fraction of the source's power landing on a receiving surface piece:
/// `(n+1)/(2 pi) cos^n(phi) cos(theta) area / d^2`.
fn transfer(from: V, from_dir: V, order: f64, to: V, to_normal: V, area: f64) -> f64 {
    let v = sub(to, from);
    let d = length(v);
    let cos_phi = dot(from_dir, v) / d;
    let cos_theta = -dot(to_normal, v) / d;
    if cos_phi <= 0.0 || cos_theta <= 0.0 {
        return 0.0;
    }
    (order + 1.0) / (2.0 * PI) * cos_phi.powf(order) * cos_theta * area / (d * d)
}

fn detector_accepts(det: &Detector, from: V) -> bool {
    let v = sub(from, det.position);
    let cos_theta = dot(det.normal, v) / length(v);
    cos_theta > 0.0 && cos_theta.min(1.0).acos() <= det.fov
}

fn to_detector(det: &Detector, from: V, from_dir: V, order: f64) -> f64 {
    if !detector_accepts(det, from) {
        return 0.0;
    }
    transfer(from, from_dir, order, det.position, det.normal, det.area)
}

/// Exhaustive LOS + first + second order response up to `max_order`.
pub fn oracle_trace(scene: &OracleScene, max_order: u8) -> OracleResponse {
    let mut out = OracleResponse {
        bin_width: scene.bin_width,
        bins: Vec::new(),
    };
    let e = &scene.emitter;
    let det = &scene.detector;

    let los = e.power * to_detector(det, e.position, e.direction, e.order);
    if los > 0.0 {
        out.deposit(length(sub(det.position, e.position)) / C, los);
    }
    if max_order == 0 {
        return out;
    }

    let mut fine = Vec::new();
    let mut coarse = Vec::new();
    for p in &scene.patches {
        fine.extend(cells(scene.size, p, scene.fine));
        coarse.extend(cells(scene.size, p, scene.coarse));
    }

    for c in &fine {
        let incident = e.power * transfer(e.position, e.direction, e.order, c.center, c.normal, c.area);
        let p = c.reflectivity * incident * to_detector(det, c.center, c.normal, 1.0);
        if p > 0.0 {
            let t = (length(sub(c.center, e.position)) + length(sub(det.position, c.center))) / C;
            out.deposit(t, p);
        }
    }
    if max_order == 1 {
        return out;
    }

    for c1 in &fine {
        let incident1 = e.power * transfer(e.position, e.direction, e.order, c1.center, c1.normal, c1.area);
        if incident1 == 0.0 {
            continue;
        }
        for c2 in &coarse {
            let incident2 =
                c1.reflectivity * incident1 * transfer(c1.center, c1.normal, 1.0, c2.center, c2.normal, c2.area);
            let p = c2.reflectivity * incident2 * to_detector(det, c2.center, c2.normal, 1.0);
            if p > 0.0 {
                let t = (length(sub(c1.center, e.position))
                    + length(sub(c2.center, c1.center))
                    + length(sub(det.position, c2.center)))
                    / C;
                out.deposit(t, p);
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    PowerSquared,
    Power,
}

/// Two-pass RMS delay spread of `(t, P)` taps; `None` for zero power.
pub fn oracle_delay_spread(taps: &[(f64, f64)], weighting: Weighting) -> Option<f64> {
    let w = |p: f64| match weighting {
        Weighting::PowerSquared => p * p,
        Weighting::Power => p,
    };
    let total: f64 = taps.iter().map(|&(_, p)| w(p)).sum();
    if total <= 0.0 {
        return None;
    }
    let mean = taps.iter().map(|&(t, p)| t * w(p)).sum::<f64>() / total;
    let var = taps.iter().map(|&(t, p)| (t - mean) * (t - mean) * w(p)).sum::<f64>() / total;
    Some(var.sqrt())
}
