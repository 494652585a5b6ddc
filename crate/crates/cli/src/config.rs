//! The run configuration: one TOML document with `[map]`, `[robot]`,
//! `[opt]`, `[scene]` and `[bench]` tables. Values come from the built-in
//! defaults, then the config file, then `--set key=value` flags.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};

use patchnav::cloud::scenes::{add_noise, DeckScene, PillarScene, SpiralScene, UnevenScene};
use patchnav::{MapParams, OptParams, PointCloud, RobotParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    Spiral,
    Uneven,
    Deck,
    Pillar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiralConfig {
    pub radius: f64,
    pub width: f64,
    pub turns: f64,
    pub rise_per_turn: f64,
}

impl Default for SpiralConfig {
    fn default() -> Self {
        SpiralConfig {
            radius: 10.0,
            width: 4.0,
            turns: 2.0,
            rise_per_turn: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UnevenConfig {
    pub extent: f64,
    pub amplitude: f64,
    pub octaves: u32,
}

impl Default for UnevenConfig {
    fn default() -> Self {
        UnevenConfig {
            extent: 20.0,
            amplitude: 1.2,
            octaves: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeckConfig {
    pub extent: f64,
    pub deck_min: [f64; 2],
    pub deck_max: [f64; 2],
    pub deck_height: f64,
}

impl Default for DeckConfig {
    fn default() -> Self {
        DeckConfig {
            extent: 16.0,
            deck_min: [-3.0, -3.0],
            deck_max: [3.0, 3.0],
            deck_height: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PillarConfig {
    pub extent: f64,
    pub corner: [f64; 2],
    pub side: f64,
    pub wall_height: f64,
}

impl Default for PillarConfig {
    fn default() -> Self {
        PillarConfig {
            extent: 12.0,
            corner: [-0.8, -0.8],
            side: 2.0,
            wall_height: 1.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub kind: SceneKind,
    pub res_pc: f64,
    /// Standard deviation of the Gaussian height noise.
    pub noise_sigma: f64,
    pub seed: u64,
    pub spiral: SpiralConfig,
    pub uneven: UnevenConfig,
    pub deck: DeckConfig,
    pub pillar: PillarConfig,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            kind: SceneKind::Spiral,
            res_pc: 0.2,
            noise_sigma: 0.02,
            seed: 7,
            spiral: SpiralConfig::default(),
            uneven: UnevenConfig::default(),
            deck: DeckConfig::default(),
            pillar: PillarConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub pairs: usize,
    pub seed: u64,
    /// Preferred distance between a pair endpoint and any obstacle.
    pub clearance: f64,
    /// Waypoints nearer than this to an obstacle count as collisions.
    pub safety_radius: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            pairs: 100,
            seed: 2024,
            clearance: 1.0,
            safety_radius: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub map: MapParams,
    pub robot: RobotParams,
    pub opt: OptParams,
    pub scene: SceneConfig,
    pub bench: BenchConfig,
}

impl Config {
    /// Loads `path` (or the defaults) and applies `key=value` overrides,
    /// where `key` is a dotted path such as `opt.w_s` and `value` is a TOML
    /// value. A bare word that is not valid TOML is taken as a string.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config> {
        let mut table = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?;
                text.parse::<toml::Table>()
                    .with_context(|| format!("parsing {}", p.display()))?
            }
            None => toml::Table::new(),
        };
        for o in overrides {
            let (key, raw) = o
                .split_once('=')
                .ok_or_else(|| anyhow!("override `{o}` is not key=value"))?;
            set_path(&mut table, key.trim(), parse_value(raw.trim()))?;
        }
        derive_resolution_defaults(&mut table);
        let config: Config = toml::Value::Table(table)
            .try_into()
            .context("invalid configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.map.validate().context("[map]")?;
        self.robot.validate().context("[robot]")?;
        self.opt.validate().context("[opt]")?;
        self.scene.validate().context("[scene]")?;
        let b = &self.bench;
        if !(b.clearance.is_finite()
            && b.clearance >= 0.0
            && b.safety_radius.is_finite()
            && b.safety_radius >= 0.0)
        {
            bail!("[bench]: clearance and safety_radius must be non-negative");
        }
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

/// With only `map.res_pc` given, the cell size and the representative-height
/// threshold follow it (`res_m = 3 res_pc`, `thr_rep = 1.5 res_pc`).
fn derive_resolution_defaults(table: &mut toml::Table) {
    let Some(toml::Value::Table(map)) = table.get_mut("map") else {
        return;
    };
    let Some(res_pc) = map
        .get("res_pc")
        .and_then(|v| v.as_float().or(v.as_integer().map(|i| i as f64)))
    else {
        return;
    };
    let scaled = MapParams::for_resolution(res_pc);
    map.entry("res_m")
        .or_insert(toml::Value::Float(scaled.res_m));
    map.entry("thr_rep")
        .or_insert(toml::Value::Float(scaled.thr_rep));
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_owned()))
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| anyhow!("empty override key"))?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| anyhow!("override key `{key}`: `{p}` is not a table"))?;
    }
    cur.insert(last.to_owned(), value);
    Ok(())
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(anyhow!("{name} must be positive, got {v}"))
            }
        };
        positive("res_pc", self.res_pc)?;
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            bail!("noise_sigma must be non-negative");
        }
        match self.kind {
            SceneKind::Spiral => {
                let s = &self.spiral;
                for (n, v) in [
                    ("radius", s.radius),
                    ("width", s.width),
                    ("turns", s.turns),
                    ("rise_per_turn", s.rise_per_turn),
                ] {
                    positive(n, v)?;
                }
                if s.width >= 2.0 * s.radius {
                    bail!("spiral width must be below the diameter");
                }
            }
            SceneKind::Uneven => {
                positive("extent", self.uneven.extent)?;
                if !(self.uneven.amplitude.is_finite() && self.uneven.amplitude >= 0.0) {
                    bail!("amplitude must be non-negative");
                }
                if self.uneven.octaves == 0 {
                    bail!("octaves must be at least 1");
                }
            }
            SceneKind::Deck => {
                let d = &self.deck;
                positive("extent", d.extent)?;
                positive("deck_height", d.deck_height)?;
                if d.deck_min[0] >= d.deck_max[0] || d.deck_min[1] >= d.deck_max[1] {
                    bail!("deck_min must be below deck_max");
                }
            }
            SceneKind::Pillar => {
                let p = &self.pillar;
                for (n, v) in [
                    ("extent", p.extent),
                    ("side", p.side),
                    ("wall_height", p.wall_height),
                ] {
                    positive(n, v)?;
                }
            }
        }
        Ok(())
    }

    /// The scene's point cloud, with or without the configured noise.
    pub fn generate(&self, noisy: bool) -> PointCloud {
        let res = self.res_pc;
        let mut cloud = match self.kind {
            SceneKind::Spiral => {
                let s = &self.spiral;
                SpiralScene::new(s.radius, s.width, s.turns, s.rise_per_turn, res).generate()
            }
            SceneKind::Uneven => {
                let u = &self.uneven;
                UnevenScene::new(u.extent, res, u.amplitude, u.octaves, self.seed).generate()
            }
            SceneKind::Deck => {
                let d = &self.deck;
                DeckScene {
                    extent: d.extent,
                    res_pc: res,
                    deck_min: (d.deck_min[0], d.deck_min[1]),
                    deck_max: (d.deck_max[0], d.deck_max[1]),
                    deck_height: d.deck_height,
                }
                .generate()
            }
            SceneKind::Pillar => {
                let p = &self.pillar;
                PillarScene {
                    extent: p.extent,
                    res_pc: res,
                    corner: (p.corner[0], p.corner[1]),
                    side: p.side,
                    wall_height: p.wall_height,
                }
                .generate()
            }
        };
        if noisy {
            add_noise(&mut cloud.points, self.noise_sigma, self.seed);
        }
        cloud
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_beat_the_file_and_the_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "[opt]\nw_s = 2.0\nw_c = 3.0\n[robot]\nv_max = 0.8\n").unwrap();
        let c = Config::load(Some(&path), &["opt.w_s=5".into(), "scene.kind=deck".into()]).unwrap();
        assert_eq!(c.opt.w_s, 5.0);
        assert_eq!(c.opt.w_c, 3.0);
        assert_eq!(c.robot.v_max, 0.8);
        assert_eq!(c.opt.r_o, OptParams::default().r_o);
        assert_eq!(c.scene.kind, SceneKind::Deck);
    }

    #[test]
    fn resolution_drives_cell_size_unless_given() {
        let c = Config::load(None, &["map.res_pc=0.1".into()]).unwrap();
        assert!((c.map.res_m - 0.3).abs() < 1e-12);
        let c = Config::load(None, &["map.res_pc=0.1".into(), "map.res_m=0.5".into()]).unwrap();
        assert_eq!(c.map.res_m, 0.5);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(Config::load(None, &["map.res_m=0.1".into()]).is_err());
        assert!(Config::load(None, &["opt.interp_factor=0".into()]).is_err());
        assert!(Config::load(None, &["robot.nonsense=1".into()]).is_err());
        assert!(Config::load(None, &["bench".into()]).is_err());
    }

    #[test]
    fn dumped_config_reloads_identically() {
        let c = Config::load(None, &["opt.w_s=2.5".into(), "scene.kind=pillar".into()]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dump.toml");
        std::fs::write(&path, c.to_toml().unwrap()).unwrap();
        assert_eq!(Config::load(Some(&path), &[]).unwrap(), c);
    }
}
