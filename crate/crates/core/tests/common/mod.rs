//! Builds tracer inputs equivalent to an `OracleScene`, and random scenes.
#![allow(dead_code)]

use cabin_vlc::geom::Vec3;
use cabin_vlc::optics::{Branch, Detector, Orientation, Receiver};
use cabin_vlc::scene::{Scene, SurfaceElement, SurfaceKind};
use cabin_vlc_oracle::{self as oracle, OracleScene, Wall};
use rand::Rng;

pub fn wall_kind(w: Wall) -> SurfaceKind {
    match w {
        Wall::Floor => SurfaceKind::Floor,
        Wall::Ceiling => SurfaceKind::Ceiling,
        Wall::Left => SurfaceKind::LeftWall,
        Wall::Right => SurfaceKind::RightWall,
        Wall::Front => SurfaceKind::FrontWall,
        Wall::Rear => SurfaceKind::RearWall,
    }
}

fn v(a: [f64; 3]) -> Vec3<f64> {
    Vec3::new(a[0], a[1], a[2])
}

pub struct CoreInputs {
    pub scene: Scene<f64>,
    pub first: Vec<SurfaceElement<f64>>,
    pub second: Vec<SurfaceElement<f64>>,
    pub branch: Branch<f64>,
    pub receiver: Receiver<f64>,
}

pub fn to_core(s: &OracleScene) -> CoreInputs {
    let scene = Scene::cuboid(Vec3::zero(), v(s.size), |kind| {
        s.patches
            .iter()
            .find(|p| wall_kind(p.wall) == kind)
            .map(|p| p.reflectivity)
            .unwrap_or(0.0)
    })
    .unwrap();
    let first = scene.subdivide(s.fine);
    let second = scene.subdivide(s.coarse);
    let e = &s.emitter;
    let semi = 0.5f64.powf(1.0 / e.order).acos().to_degrees();
    let branch = Branch {
        position: v(e.position),
        orientation: Orientation::from_f64(0.0, 0.0),
        direction: v(e.direction),
        semi_angle_deg: semi,
        order: e.order,
        power: e.power,
    };
    let d = &s.detector;
    let det = Detector::new(v(d.position), v(d.normal), d.area, d.fov.to_degrees(), 0.4).unwrap();
    CoreInputs {
        scene,
        first,
        second,
        branch,
        receiver: Receiver::Single(det),
    }
}

fn unit_with_z<R: Rng>(rng: &mut R, zmin: f64, zmax: f64) -> [f64; 3] {
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
        if u[2] >= zmin && u[2] <= zmax {
            return u;
        }
    }
}

const WALLS: [Wall; 6] = [
    Wall::Floor,
    Wall::Ceiling,
    Wall::Left,
    Wall::Right,
    Wall::Front,
    Wall::Rear,
];

/// Random tiny room: edges in [1, 2] m, one or two reflective walls,
/// elements of 0.25 to 0.6 m, emitter near the ceiling, detector low.
pub fn random_scene<R: Rng>(rng: &mut R) -> OracleScene {
    let size = [
        rng.gen_range(1.0..2.0),
        rng.gen_range(1.0..2.0),
        rng.gen_range(1.0..2.0),
    ];
    let n_patches = rng.gen_range(1..=2);
    let mut walls = WALLS.to_vec();
    let mut patches = Vec::new();
    for _ in 0..n_patches {
        let w = walls.remove(rng.gen_range(0..walls.len()));
        patches.push(oracle::Patch {
            wall: w,
            reflectivity: rng.gen_range(0.1..1.0),
        });
    }
    let inside = |rng: &mut R, lo: f64, hi: f64| {
        [
            rng.gen_range(0.1..size[0] - 0.1),
            rng.gen_range(0.1..size[1] - 0.1),
            rng.gen_range(lo * size[2]..hi * size[2]),
        ]
    };
    OracleScene {
        size,
        patches,
        fine: rng.gen_range(0.25..0.5),
        coarse: rng.gen_range(0.25..0.6),
        emitter: oracle::Emitter {
            position: inside(rng, 0.7, 0.95),
            direction: unit_with_z(rng, -1.0, -0.2),
            order: rng.gen_range(1.0..50.0),
            power: rng.gen_range(0.1..2.0),
        },
        detector: oracle::Detector {
            position: inside(rng, 0.05, 0.4),
            normal: unit_with_z(rng, 0.2, 1.0),
            area: rng.gen_range(1e-6..1e-4),
            fov: rng.gen_range(20f64..90.0).to_radians(),
        },
        bin_width: rng.gen_range(1e-11..1e-10),
    }
}

/// Largest per-bin relative difference between two binned responses.
pub fn max_bin_rel_err(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().max(b.len());
    let mut worst = 0.0f64;
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0.0);
        let y = b.get(i).copied().unwrap_or(0.0);
        if x == y {
            continue;
        }
        worst = worst.max((x - y).abs() / x.abs().max(y.abs()));
    }
    worst
}
