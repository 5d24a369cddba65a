//! Seeded synthetic scenes: one target class and several confuser classes
//! with parameterized motion dynamics, emitted as ordinary [`Track`]s.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;
use crate::tracks::{Track, TrackPoint};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid scenario: {0}")]
    Config(String),
    #[error("failed to parse scenario JSON: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Motion model of one class. Speeds are in pixels per frame, periods in
/// frames. Every track draws its own heading, start point and phase, and
/// jitters speeds and periods by up to +-10%.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Dynamics {
    /// Smooth arc under constant image-plane acceleration with a small,
    /// fast oscillation across the direction of travel.
    BallisticOscillation {
        speed: f64,
        gravity: f64,
        osc_amplitude: f64,
        osc_period: f64,
    },
    /// Straight line at constant speed.
    LinearTransit { speed: f64 },
    /// Gaussian random walk pulled back toward its start point.
    RandomWalk { step_sd: f64, reversion: f64 },
    /// Slow drift with a large wingbeat-like oscillation.
    Flutter {
        drift_speed: f64,
        amplitude: f64,
        period: f64,
    },
    /// Straight legs separated by stationary dwells, turning between legs.
    DwellStops {
        speed: f64,
        leg_frames: [usize; 2],
        dwell_frames: [usize; 2],
        turn_sd: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub label: String,
    pub dynamics: Dynamics,
    /// Isotropic Gaussian position noise, pixels.
    #[serde(default)]
    pub noise_sd: f64,
    /// Inclusive track length range in frames; falls back to the scenario's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_range: Option<[usize; 2]>,
    /// Number of tracks; falls back to `n_targets` or `n_confusers_per_class`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub target_label: String,
    pub n_targets: usize,
    pub n_confusers_per_class: usize,
    pub length_range: [usize; 2],
    pub classes: Vec<ClassSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::default_scene(1)
    }
}

impl ScenarioConfig {
    /// One target class and four confuser classes, three tracks each.
    pub fn default_scene(seed: u64) -> Self {
        Self {
            seed,
            target_label: "target".into(),
            n_targets: 3,
            n_confusers_per_class: 3,
            length_range: [560, 640],
            classes: vec![
                ClassSpec {
                    label: "target".into(),
                    dynamics: Dynamics::BallisticOscillation {
                        speed: 3.0,
                        gravity: 0.002,
                        osc_amplitude: 1.5,
                        osc_period: 6.0,
                    },
                    noise_sd: 0.2,
                    length_range: None,
                    count: None,
                },
                ClassSpec {
                    label: "transit".into(),
                    dynamics: Dynamics::LinearTransit { speed: 3.0 },
                    noise_sd: 3.0,
                    length_range: None,
                    count: None,
                },
                ClassSpec {
                    label: "loiter".into(),
                    dynamics: Dynamics::RandomWalk {
                        step_sd: 1.5,
                        reversion: 0.01,
                    },
                    noise_sd: 0.2,
                    length_range: None,
                    count: None,
                },
                ClassSpec {
                    label: "flutter".into(),
                    dynamics: Dynamics::Flutter {
                        drift_speed: 0.5,
                        amplitude: 6.0,
                        period: 6.5,
                    },
                    noise_sd: 0.3,
                    length_range: None,
                    count: None,
                },
                ClassSpec {
                    label: "dwell".into(),
                    dynamics: Dynamics::DwellStops {
                        speed: 3.0,
                        leg_frames: [10, 25],
                        dwell_frames: [5, 15],
                        turn_sd: 0.6,
                    },
                    noise_sd: 0.1,
                    length_range: None,
                    count: None,
                },
            ],
        }
    }

    pub fn from_json(s: &str) -> Result<Self, SynthError> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate(1)?;
        Ok(cfg)
    }

    fn count_of(&self, class: &ClassSpec) -> usize {
        class.count.unwrap_or(if class.label == self.target_label {
            self.n_targets
        } else {
            self.n_confusers_per_class
        })
    }

    fn lengths_of(&self, class: &ClassSpec) -> [usize; 2] {
        class.length_range.unwrap_or(self.length_range)
    }

    /// Check the scenario; every track must have at least `min_len` points.
    pub fn validate(&self, min_len: usize) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.classes.is_empty() {
            return bad("no classes".into());
        }
        let mut labels = std::collections::BTreeSet::new();
        for c in &self.classes {
            if c.label.is_empty() || c.label.contains([',', '"', '\n']) {
                return bad(format!("class label {:?} must be non-empty CSV-safe text", c.label));
            }
            if !labels.insert(c.label.as_str()) {
                return bad(format!("duplicate class label {:?}", c.label));
            }
            if !(c.noise_sd >= 0.0 && c.noise_sd.is_finite()) {
                return bad(format!("class {}: noise_sd must be >= 0", c.label));
            }
            let [lo, hi] = self.lengths_of(c);
            if lo > hi {
                return bad(format!("class {}: empty length range [{lo}, {hi}]", c.label));
            }
            if lo < min_len.max(1) {
                return bad(format!(
                    "class {}: minimum length {lo} is below the required {}",
                    c.label,
                    min_len.max(1)
                ));
            }
            c.dynamics.validate().map_err(|m| SynthError::Config(format!("class {}: {m}", c.label)))?;
        }
        if self.classes.iter().map(|c| self.count_of(c)).sum::<usize>() == 0 {
            return bad("scenario generates no tracks".into());
        }
        Ok(())
    }
}

fn jitter(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(0.9..1.1)
}

impl Dynamics {
    fn validate(&self) -> Result<(), String> {
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be finite and >= 0, got {v}"))
            }
        };
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be finite and > 0, got {v}"))
            }
        };
        let range = |name: &str, r: [usize; 2]| {
            if r[0] >= 1 && r[0] <= r[1] {
                Ok(())
            } else {
                Err(format!("{name} must be a range [lo, hi] with 1 <= lo <= hi"))
            }
        };
        match *self {
            Dynamics::BallisticOscillation {
                speed,
                gravity,
                osc_amplitude,
                osc_period,
            } => {
                finite_nonneg("speed", speed)?;
                if !gravity.is_finite() {
                    return Err("gravity must be finite".into());
                }
                finite_nonneg("osc_amplitude", osc_amplitude)?;
                positive("osc_period", osc_period)
            }
            Dynamics::LinearTransit { speed } => finite_nonneg("speed", speed),
            Dynamics::RandomWalk { step_sd, reversion } => {
                finite_nonneg("step_sd", step_sd)?;
                if (0.0..1.0).contains(&reversion) {
                    Ok(())
                } else {
                    Err("reversion must lie in [0, 1)".into())
                }
            }
            Dynamics::Flutter {
                drift_speed,
                amplitude,
                period,
            } => {
                finite_nonneg("drift_speed", drift_speed)?;
                finite_nonneg("amplitude", amplitude)?;
                positive("period", period)
            }
            Dynamics::DwellStops {
                speed,
                leg_frames,
                dwell_frames,
                turn_sd,
            } => {
                finite_nonneg("speed", speed)?;
                range("leg_frames", leg_frames)?;
                range("dwell_frames", dwell_frames)?;
                finite_nonneg("turn_sd", turn_sd)
            }
        }
    }

    /// Noise-free positions for frames `0..len`.
    fn trajectory(&self, len: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
        let origin = [rng.random_range(200.0..1800.0), rng.random_range(200.0..1800.0)];
        let heading: f64 = rng.random_range(0.0..TAU);
        let along = [heading.cos(), heading.sin()];
        let across = [-heading.sin(), heading.cos()];

        match *self {
            Dynamics::BallisticOscillation {
                speed,
                gravity,
                osc_amplitude,
                osc_period,
            } => {
                let speed = speed * jitter(rng);
                let period = osc_period * jitter(rng);
                let phase = rng.random_range(0.0..TAU);
                (0..len)
                    .map(|t| {
                        let t = t as f64;
                        let s = speed * t;
                        let drop = 0.5 * gravity * t * t;
                        let wobble = osc_amplitude * (TAU * t / period + phase).sin();
                        [
                            origin[0] + along[0] * s + across[0] * wobble,
                            origin[1] + along[1] * s + across[1] * wobble + drop,
                        ]
                    })
                    .collect()
            }
            Dynamics::LinearTransit { speed } => {
                let speed = speed * jitter(rng);
                (0..len)
                    .map(|t| {
                        let s = speed * t as f64;
                        [origin[0] + along[0] * s, origin[1] + along[1] * s]
                    })
                    .collect()
            }
            Dynamics::RandomWalk { step_sd, reversion } => {
                let step = Normal::new(0.0, step_sd).expect("validated step_sd");
                let mut p = origin;
                let mut out = Vec::with_capacity(len);
                for _ in 0..len {
                    out.push(p);
                    for axis in 0..2 {
                        p[axis] += step.sample(rng) - reversion * (p[axis] - origin[axis]);
                    }
                }
                out
            }
            Dynamics::Flutter {
                drift_speed,
                amplitude,
                period,
            } => {
                let drift = drift_speed * jitter(rng);
                let period = period * jitter(rng);
                let phase = rng.random_range(0.0..TAU);
                (0..len)
                    .map(|t| {
                        let t = t as f64;
                        let beat = TAU * t / period + phase;
                        let lateral = amplitude * beat.sin();
                        // figure-eight: the along-track component runs at twice the beat
                        let surge = 0.3 * amplitude * (2.0 * beat).sin();
                        let s = drift * t + surge;
                        [
                            origin[0] + along[0] * s + across[0] * lateral,
                            origin[1] + along[1] * s + across[1] * lateral,
                        ]
                    })
                    .collect()
            }
            Dynamics::DwellStops {
                speed,
                leg_frames,
                dwell_frames,
                turn_sd,
            } => {
                let speed = speed * jitter(rng);
                let turn = Normal::new(0.0, turn_sd).expect("validated turn_sd");
                let mut p = origin;
                let mut dir = heading;
                let mut out = Vec::with_capacity(len);
                while out.len() < len {
                    let leg = rng.random_range(leg_frames[0]..=leg_frames[1]);
                    for _ in 0..leg {
                        out.push(p);
                        p[0] += speed * dir.cos();
                        p[1] += speed * dir.sin();
                    }
                    let dwell = rng.random_range(dwell_frames[0]..=dwell_frames[1]);
                    out.extend(std::iter::repeat_n(p, dwell));
                    dir += turn.sample(rng);
                }
                out.truncate(len);
                out
            }
        }
    }
}

/// Generate every track of the scenario. Deterministic in `config.seed`;
/// track `i` (in class order) draws from its own derived stream.
pub fn generate_tracks(config: &ScenarioConfig) -> Result<Vec<Track>, SynthError> {
    config.validate(1)?;
    let mut jobs = Vec::new();
    for class in &config.classes {
        for i in 0..config.count_of(class) {
            jobs.push((class, i));
        }
    }
    jobs.into_par_iter()
        .enumerate()
        .map(|(stream, (class, i))| {
            let mut rng = seed::stream_rng(config.seed, seed::tags::SCENARIO_TRACK, stream as u64);
            let [lo, hi] = config.lengths_of(class);
            let len = rng.random_range(lo..=hi);
            let clean = class.dynamics.trajectory(len, &mut rng);
            let noise = Normal::new(0.0, class.noise_sd).expect("validated noise_sd");
            let points = clean
                .into_iter()
                .enumerate()
                .map(|(frame, [x, y])| TrackPoint {
                    frame: frame as i64,
                    x: x + noise.sample(&mut rng),
                    y: y + noise.sample(&mut rng),
                })
                .collect();
            Track::new(format!("{}-{i:02}", class.label), class.label.clone(), points)
                .map_err(|e| SynthError::Config(e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(dynamics: Dynamics, noise_sd: f64) -> ScenarioConfig {
        ScenarioConfig {
            seed: 3,
            target_label: "target".into(),
            n_targets: 1,
            n_confusers_per_class: 2,
            length_range: [50, 60],
            classes: vec![ClassSpec {
                label: "c".into(),
                dynamics,
                noise_sd,
                length_range: None,
                count: None,
            }],
        }
    }

    #[test]
    fn default_scene_shape() {
        let tracks = generate_tracks(&ScenarioConfig::default()).unwrap();
        assert_eq!(tracks.len(), 15);
        let labels: std::collections::BTreeSet<&str> = tracks.iter().map(|t| t.label()).collect();
        assert_eq!(labels.len(), 5);
        for t in &tracks {
            assert!((560..=640).contains(&t.len()));
            assert!(t.points().iter().all(|p| p.x.is_finite() && p.y.is_finite()));
        }
    }

    #[test]
    fn seeded_determinism() {
        let a = generate_tracks(&ScenarioConfig::default_scene(1)).unwrap();
        let b = generate_tracks(&ScenarioConfig::default_scene(1)).unwrap();
        let c = generate_tracks(&ScenarioConfig::default_scene(2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noiseless_transit_is_collinear() {
        let tracks = generate_tracks(&single(Dynamics::LinearTransit { speed: 2.5 }, 0.0)).unwrap();
        for t in tracks {
            let p = t.points();
            let (x0, y0) = (p[0].x, p[0].y);
            let (dx, dy) = (p[1].x - x0, p[1].y - y0);
            let norm = dx.hypot(dy);
            for q in p {
                let cross = ((q.x - x0) * dy - (q.y - y0) * dx) / norm;
                assert!(cross.abs() < 1e-9, "off-line residual {cross}");
            }
        }
    }

    #[test]
    fn dwell_tracks_contain_stops() {
        let tracks = generate_tracks(&single(
            Dynamics::DwellStops {
                speed: 3.0,
                leg_frames: [5, 5],
                dwell_frames: [4, 4],
                turn_sd: 0.5,
            },
            0.0,
        ))
        .unwrap();
        let p = tracks[0].points();
        let repeats = p.windows(2).filter(|w| w[0].x == w[1].x && w[0].y == w[1].y).count();
        assert!(repeats >= 15);
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.classes[1].noise_sd = -1.0;
        assert!(generate_tracks(&cfg).is_err());

        let mut cfg = ScenarioConfig::default();
        cfg.classes[2].label = "target".into();
        assert!(cfg.validate(1).is_err());

        let cfg = ScenarioConfig::default();
        assert!(cfg.validate(600).is_err());
        assert!(cfg.validate(101).is_ok());

        let json = serde_json::to_string(&ScenarioConfig::default())
            .unwrap()
            .replace("linear-transit", "teleport");
        assert!(matches!(ScenarioConfig::from_json(&json), Err(SynthError::Parse(_))));
    }

    #[test]
    fn json_round_trip() {
        let cfg = ScenarioConfig::default();
        let json = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ScenarioConfig::from_json(&json).unwrap(), cfg);
    }
}
