//! Synthetic benchmark scenes.
//!
//! Every generator samples an analytic surface model on an xy grid aligned
//! to integer multiples of `res_pc`, so a map grid with `res_m = 3 res_pc`
//! receives the same sample pattern in every cell. Each scene also exposes
//! its surface model, which doubles as ground truth for map accuracy.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Point3, PointCloud};

/// Analytic description of a (possibly multi-valued) terrain surface.
pub trait SurfaceModel: Sync {
    /// All surface heights above `(x, y)`, ascending.
    fn heights(&self, x: f64, y: f64) -> Vec<f64>;
}

impl<F: Fn(f64, f64) -> f64 + Sync> SurfaceModel for F {
    fn heights(&self, x: f64, y: f64) -> Vec<f64> {
        vec![self(x, y)]
    }
}

/// Integer grid indices covering `[lo, hi]` at spacing `res`.
fn grid_range(lo: f64, hi: f64, res: f64) -> std::ops::RangeInclusive<i64> {
    (lo / res).ceil() as i64..=(hi / res).floor() as i64
}

/// Adds seeded Gaussian noise of standard deviation `sigma` to every height.
pub fn add_noise(points: &mut [Point3], sigma: f64, seed: u64) {
    if sigma <= 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("finite sigma");
    for p in points {
        p.z += normal.sample(&mut rng);
    }
}

/// A helical ramp of constant pitch winding counter-clockwise from the
/// positive x axis, standing on a flat square apron at `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiralScene {
    /// Centerline radius of the ramp.
    pub radius: f64,
    pub width: f64,
    pub turns: f64,
    pub rise_per_turn: f64,
    pub res_pc: f64,
    pub noise_sigma: f64,
    /// Apron extent beyond the ramp's outer edge.
    pub apron_margin: f64,
    pub seed: u64,
}

impl SpiralScene {
    pub fn new(radius: f64, width: f64, turns: f64, rise_per_turn: f64, res_pc: f64) -> Self {
        SpiralScene {
            radius,
            width,
            turns,
            rise_per_turn,
            res_pc,
            noise_sigma: 0.0,
            apron_margin: width,
            seed: 0,
        }
    }

    fn validate(&self) {
        assert!(
            self.radius > 0.0
                && self.width > 0.0
                && self.turns > 0.0
                && self.rise_per_turn > 0.0
                && self.res_pc > 0.0,
            "spiral dimensions must be positive"
        );
        assert!(self.noise_sigma >= 0.0, "noise sigma must be non-negative");
        assert!(
            self.width < 2.0 * self.radius,
            "ramp width must be below the diameter"
        );
        assert!(
            self.apron_margin >= 0.0,
            "apron margin must be non-negative"
        );
    }

    pub fn inner_radius(&self) -> f64 {
        self.radius - self.width / 2.0
    }

    pub fn outer_radius(&self) -> f64 {
        self.radius + self.width / 2.0
    }

    pub fn apron_half_extent(&self) -> f64 {
        self.outer_radius() + self.apron_margin
    }

    /// Rise per radian of winding angle.
    fn pitch(&self) -> f64 {
        self.rise_per_turn / TAU
    }

    /// Ramp heights above `(x, y)`, one per winding that passes overhead.
    pub fn ramp_heights(&self, x: f64, y: f64) -> Vec<f64> {
        let r = x.hypot(y);
        if r < self.inner_radius() || r > self.outer_radius() {
            return Vec::new();
        }
        let base = y.atan2(x).rem_euclid(TAU);
        let max_angle = TAU * self.turns;
        (0..)
            .map(|k| base + TAU * k as f64)
            .take_while(|phi| *phi <= max_angle)
            .map(|phi| self.pitch() * phi)
            .collect()
    }

    /// Analytic area of the helical strip (surface, not projection).
    pub fn ramp_area(&self) -> f64 {
        // Integral of sqrt(r^2 + c^2) dr over the strip, times the total angle.
        let c = self.pitch();
        let prim = |r: f64| {
            let s = (r * r + c * c).sqrt();
            0.5 * (r * s + c * c * (r + s).ln())
        };
        (prim(self.outer_radius()) - prim(self.inner_radius())) * TAU * self.turns
    }

    pub fn generate(&self) -> PointCloud {
        self.validate();
        let res = self.res_pc;
        let h = self.apron_half_extent();
        let mut points = Vec::new();
        for j in grid_range(-h, h, res) {
            let y = j as f64 * res;
            for i in grid_range(-h, h, res) {
                let x = i as f64 * res;
                points.push(Point3::new(x, y, 0.0));
                for z in self.ramp_heights(x, y) {
                    points.push(Point3::new(x, y, z));
                }
            }
        }
        add_noise(&mut points, self.noise_sigma, self.seed);
        PointCloud::new(points).with_resolution(res)
    }

    /// The ramp alone, without the apron.
    pub fn generate_ramp_only(&self) -> PointCloud {
        self.validate();
        let res = self.res_pc;
        let r = self.outer_radius();
        let mut points = Vec::new();
        for j in grid_range(-r, r, res) {
            let y = j as f64 * res;
            for i in grid_range(-r, r, res) {
                let x = i as f64 * res;
                for z in self.ramp_heights(x, y) {
                    points.push(Point3::new(x, y, z));
                }
            }
        }
        add_noise(&mut points, self.noise_sigma, self.seed);
        PointCloud::new(points).with_resolution(res)
    }
}

impl SurfaceModel for SpiralScene {
    fn heights(&self, x: f64, y: f64) -> Vec<f64> {
        let h = self.apron_half_extent();
        let mut out = Vec::new();
        if x.abs() <= h && y.abs() <= h {
            out.push(0.0);
        }
        out.extend(self.ramp_heights(x, y));
        out
    }
}

pub fn generate_spiral_scene(
    radius: f64,
    width: f64,
    turns: f64,
    rise_per_turn: f64,
    res_pc: f64,
    noise_sigma: f64,
    seed: u64,
) -> PointCloud {
    SpiralScene {
        noise_sigma,
        seed,
        ..SpiralScene::new(radius, width, turns, rise_per_turn, res_pc)
    }
    .generate()
}

/// Seeded multi-octave value noise over a square, centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct UnevenScene {
    pub extent: f64,
    pub res_pc: f64,
    pub amplitude: f64,
    pub octaves: u32,
    pub seed: u64,
}

/// Per-octave amplitude gain: each octave halves the previous one.
const OCTAVE_GAIN: f64 = 0.5;

impl UnevenScene {
    pub fn new(extent: f64, res_pc: f64, amplitude: f64, octaves: u32, seed: u64) -> Self {
        UnevenScene {
            extent,
            res_pc,
            amplitude,
            octaves,
            seed,
        }
    }

    /// Sum of the per-octave gains; `amplitude * gain_sum()` bounds `|z|`.
    pub fn gain_sum(&self) -> f64 {
        (0..self.octaves).map(|k| OCTAVE_GAIN.powi(k as i32)).sum()
    }

    fn lattice_value(&self, ix: i64, iy: i64, octave: u32) -> f64 {
        let mut h = self.seed ^ 0x9E37_79B9_7F4A_7C15;
        for v in [ix as u64, iy as u64, octave as u64] {
            h = splitmix64(h ^ v);
        }
        // Top 53 bits to [0, 1), then to [-1, 1).
        (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn octave_value(&self, x: f64, y: f64, octave: u32) -> f64 {
        let spacing = self.extent / 4.0 / f64::from(1u32 << octave);
        let (gx, gy) = (x / spacing, y / spacing);
        let (x0, y0) = (gx.floor(), gy.floor());
        let (tx, ty) = (smoothstep(gx - x0), smoothstep(gy - y0));
        let (ix, iy) = (x0 as i64, y0 as i64);
        let v00 = self.lattice_value(ix, iy, octave);
        let v10 = self.lattice_value(ix + 1, iy, octave);
        let v01 = self.lattice_value(ix, iy + 1, octave);
        let v11 = self.lattice_value(ix + 1, iy + 1, octave);
        let a = v00 + (v10 - v00) * tx;
        let b = v01 + (v11 - v01) * tx;
        a + (b - a) * ty
    }

    pub fn height(&self, x: f64, y: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let sum: f64 = (0..self.octaves)
            .map(|k| OCTAVE_GAIN.powi(k as i32) * self.octave_value(x, y, k))
            .sum();
        self.amplitude * sum
    }

    pub fn generate(&self) -> PointCloud {
        assert!(
            self.extent > 0.0 && self.res_pc > 0.0 && self.amplitude >= 0.0,
            "extent and resolution must be positive"
        );
        let h = self.extent / 2.0;
        let mut points = Vec::new();
        for j in grid_range(-h, h, self.res_pc) {
            let y = j as f64 * self.res_pc;
            for i in grid_range(-h, h, self.res_pc) {
                let x = i as f64 * self.res_pc;
                points.push(Point3::new(x, y, self.height(x, y)));
            }
        }
        PointCloud::new(points).with_resolution(self.res_pc)
    }
}

impl SurfaceModel for UnevenScene {
    fn heights(&self, x: f64, y: f64) -> Vec<f64> {
        let h = self.extent / 2.0;
        if x.abs() <= h && y.abs() <= h {
            vec![self.height(x, y)]
        } else {
            Vec::new()
        }
    }
}

pub fn generate_uneven_scene(
    extent: f64,
    res_pc: f64,
    amplitude: f64,
    octaves: u32,
    seed: u64,
) -> PointCloud {
    UnevenScene::new(extent, res_pc, amplitude, octaves, seed).generate()
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples a single-valued height field over `[x0, x1] x [y0, y1]`.
pub fn sample_height_field(
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    res_pc: f64,
    height: impl Fn(f64, f64) -> Option<f64>,
) -> PointCloud {
    let mut points = Vec::new();
    for j in grid_range(y0, y1, res_pc) {
        let y = j as f64 * res_pc;
        for i in grid_range(x0, x1, res_pc) {
            let x = i as f64 * res_pc;
            if let Some(z) = height(x, y) {
                points.push(Point3::new(x, y, z));
            }
        }
    }
    PointCloud::new(points).with_resolution(res_pc)
}

/// A flat floor at `z = 0` interrupted by a walled square footprint.
///
/// The footprint's interior carries no points; its four walls are sampled
/// from the floor up to `wall_height`, which is what makes the region
/// untraversable in the map.
#[derive(Debug, Clone, PartialEq)]
pub struct PillarScene {
    pub extent: f64,
    pub res_pc: f64,
    /// Lower-left corner of the footprint.
    pub corner: (f64, f64),
    pub side: f64,
    pub wall_height: f64,
}

impl PillarScene {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (cx, cy) = self.corner;
        x >= cx && x <= cx + self.side && y >= cy && y <= cy + self.side
    }

    pub fn generate(&self) -> PointCloud {
        let h = self.extent / 2.0;
        let res = self.res_pc;
        let mut cloud = sample_height_field((-h, h), (-h, h), res, |x, y| {
            (!self.contains(x, y)).then_some(0.0)
        });
        let (cx, cy) = self.corner;
        let steps = (self.side / res).ceil() as usize;
        let levels = (self.wall_height / res).ceil() as usize;
        for k in 0..=steps {
            let t = (k as f64 * res).min(self.side);
            let perimeter = [
                (cx + t, cy),
                (cx + t, cy + self.side),
                (cx, cy + t),
                (cx + self.side, cy + t),
            ];
            for (x, y) in perimeter {
                for l in 0..=levels {
                    let z = (l as f64 * res).min(self.wall_height);
                    cloud.points.push(Point3::new(x, y, z));
                }
            }
        }
        cloud
    }
}

/// Ground at `z = 0` everywhere plus an elevated deck over a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct DeckScene {
    pub extent: f64,
    pub res_pc: f64,
    pub deck_min: (f64, f64),
    pub deck_max: (f64, f64),
    pub deck_height: f64,
}

impl DeckScene {
    fn on_deck(&self, x: f64, y: f64) -> bool {
        x >= self.deck_min.0 && x <= self.deck_max.0 && y >= self.deck_min.1 && y <= self.deck_max.1
    }

    pub fn generate(&self) -> PointCloud {
        let h = self.extent / 2.0;
        let mut cloud = sample_height_field((-h, h), (-h, h), self.res_pc, |_, _| Some(0.0));
        let deck = sample_height_field(
            (self.deck_min.0, self.deck_max.0),
            (self.deck_min.1, self.deck_max.1),
            self.res_pc,
            |_, _| Some(self.deck_height),
        );
        cloud.points.extend(deck.points);
        cloud
    }
}

impl SurfaceModel for DeckScene {
    fn heights(&self, x: f64, y: f64) -> Vec<f64> {
        let h = self.extent / 2.0;
        let mut out = Vec::new();
        if x.abs() <= h && y.abs() <= h {
            out.push(0.0);
        }
        if self.on_deck(x, y) {
            out.push(self.deck_height);
        }
        out
    }
}
