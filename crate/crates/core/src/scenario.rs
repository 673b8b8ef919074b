//! Weather specifications and accident scenario scripts for the simulator bridge.
//!
//! Ego frame for actor offsets: +x forward, +y left, +z up, meters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::Category;

#[derive(Debug, Error, PartialEq)]
pub enum ScenarioError {
    #[error("{field} = {value} outside {range}")]
    Range { field: &'static str, value: f64, range: &'static str },
    #[error("sweep axis {0} is empty")]
    EmptyAxis(&'static str),
    #[error("sweep axis {axis} repeats value {value}")]
    DuplicateValue { axis: &'static str, value: f64 },
    #[error("crossing actor must be Pedestrian or Car, got {0}")]
    CrossingCategory(Category),
    #[error("unknown weather preset {0:?}")]
    UnknownPreset(String),
}

fn check(field: &'static str, value: f64, ok: bool, range: &'static str) -> Result<(), ScenarioError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(ScenarioError::Range { field, value, range })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSpec {
    pub name: String,
    pub sun_altitude_deg: f64,
    pub sun_azimuth_deg: f64,
    pub cloudiness_pct: f64,
    pub precipitation_pct: f64,
    pub precipitation_deposits_pct: f64,
}

impl WeatherSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        check_altitude(self.sun_altitude_deg)?;
        check_azimuth(self.sun_azimuth_deg)?;
        check_pct("cloudiness_pct", self.cloudiness_pct)?;
        check_pct("precipitation_pct", self.precipitation_pct)?;
        check_pct("precipitation_deposits_pct", self.precipitation_deposits_pct)
    }

    pub fn apply(&mut self, patch: &WeatherPatch) {
        if let Some(v) = patch.sun_altitude_deg {
            self.sun_altitude_deg = v;
        }
        if let Some(v) = patch.sun_azimuth_deg {
            self.sun_azimuth_deg = v;
        }
        if let Some(v) = patch.cloudiness_pct {
            self.cloudiness_pct = v;
        }
        if let Some(v) = patch.precipitation_pct {
            self.precipitation_pct = v;
        }
        if let Some(v) = patch.precipitation_deposits_pct {
            self.precipitation_deposits_pct = v;
        }
    }
}

fn check_altitude(v: f64) -> Result<(), ScenarioError> {
    check("sun_altitude_deg", v, (-90.0..=90.0).contains(&v), "[-90, 90]")
}

fn check_azimuth(v: f64) -> Result<(), ScenarioError> {
    check("sun_azimuth_deg", v, (0.0..360.0).contains(&v), "[0, 360)")
}

fn check_pct(field: &'static str, v: f64) -> Result<(), ScenarioError> {
    check(field, v, (0.0..=100.0).contains(&v), "[0, 100]")
}

/// Partial override of a weather spec.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherPatch {
    pub sun_altitude_deg: Option<f64>,
    pub sun_azimuth_deg: Option<f64>,
    pub cloudiness_pct: Option<f64>,
    pub precipitation_pct: Option<f64>,
    pub precipitation_deposits_pct: Option<f64>,
}

fn spec(name: &str, alt: f64, az: f64, cloud: f64, precip: f64, deposits: f64) -> WeatherSpec {
    WeatherSpec {
        name: name.to_string(),
        sun_altitude_deg: alt,
        sun_azimuth_deg: az,
        cloudiness_pct: cloud,
        precipitation_pct: precip,
        precipitation_deposits_pct: deposits,
    }
}

/// The six named weather conditions. Parameter values are defaults, not
/// measurements; override them with [`weather_presets_with`].
pub fn weather_presets() -> Vec<WeatherSpec> {
    vec![
        spec("clear_noon", 75.0, 0.0, 10.0, 0.0, 0.0),
        spec("cloudy_sunset", 10.0, 270.0, 80.0, 0.0, 0.0),
        spec("light_rain", 45.0, 0.0, 60.0, 30.0, 20.0),
        spec("hard_rain", 45.0, 0.0, 90.0, 90.0, 80.0),
        spec("after_rain_cloudy_sunset", 10.0, 270.0, 80.0, 0.0, 50.0),
        spec("after_rain_clear_noon", 75.0, 0.0, 10.0, 0.0, 50.0),
    ]
}

/// Presets with per-name overrides applied and re-validated.
pub fn weather_presets_with<'a, I>(overrides: I) -> Result<Vec<WeatherSpec>, ScenarioError>
where
    I: IntoIterator<Item = (&'a str, &'a WeatherPatch)>,
{
    let mut presets = weather_presets();
    for (name, patch) in overrides {
        let spec = presets
            .iter_mut()
            .find(|p| p.name == name)
            .ok_or_else(|| ScenarioError::UnknownPreset(name.to_string()))?;
        spec.apply(patch);
    }
    for p in &presets {
        p.validate()?;
    }
    Ok(presets)
}

pub fn weather_preset(name: &str) -> Option<WeatherSpec> {
    weather_presets().into_iter().find(|p| p.name == name)
}

/// Values to sweep per parameter. A missing axis holds its default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeatherAxes {
    pub sun_altitude_deg: Vec<f64>,
    pub sun_azimuth_deg: Vec<f64>,
    pub cloudiness_pct: Vec<f64>,
    pub precipitation_pct: Vec<f64>,
    pub precipitation_deposits_pct: Vec<f64>,
}

impl Default for WeatherAxes {
    fn default() -> Self {
        Self {
            sun_altitude_deg: vec![45.0],
            sun_azimuth_deg: vec![0.0],
            cloudiness_pct: vec![0.0],
            precipitation_pct: vec![0.0],
            precipitation_deposits_pct: vec![0.0],
        }
    }
}

/// Cartesian product of the axes; the altitude axis varies slowest and
/// deposits fastest.
pub fn weather_sweep(axes: &WeatherAxes) -> Result<Vec<WeatherSpec>, ScenarioError> {
    type Checker = fn(f64) -> Result<(), ScenarioError>;
    let named: [(&'static str, &Vec<f64>, Checker); 5] = [
        ("sun_altitude_deg", &axes.sun_altitude_deg, check_altitude),
        ("sun_azimuth_deg", &axes.sun_azimuth_deg, check_azimuth),
        ("cloudiness_pct", &axes.cloudiness_pct, |v| check_pct("cloudiness_pct", v)),
        ("precipitation_pct", &axes.precipitation_pct, |v| check_pct("precipitation_pct", v)),
        ("precipitation_deposits_pct", &axes.precipitation_deposits_pct, |v| {
            check_pct("precipitation_deposits_pct", v)
        }),
    ];
    for (name, values, checker) in &named {
        if values.is_empty() {
            return Err(ScenarioError::EmptyAxis(name));
        }
        for (i, v) in values.iter().enumerate() {
            checker(*v)?;
            if values[..i].contains(v) {
                return Err(ScenarioError::DuplicateValue { axis: name, value: *v });
            }
        }
    }
    let mut out = Vec::new();
    for &alt in &axes.sun_altitude_deg {
        for &az in &axes.sun_azimuth_deg {
            for &cloud in &axes.cloudiness_pct {
                for &precip in &axes.precipitation_pct {
                    for &dep in &axes.precipitation_deposits_pct {
                        let name = format!("sweep_alt{alt}_az{az}_cloud{cloud}_precip{precip}_dep{dep}");
                        out.push(spec(&name, alt, az, cloud, precip, dep));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Trigger {
    /// Seconds after scenario start.
    Time(f64),
    /// Fires when the ego is within this many meters of the actor.
    EgoDistance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Behavior {
    Static,
    /// Steer across to the given lateral offset (ego frame), i.e. into the ego lane at 0.
    LaneCut { target_lateral_m: f64 },
    /// Walk or drive along a heading relative to the ego's forward axis.
    Cross { heading_deg: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedActor {
    pub category: Category,
    pub spawn_offset: [f64; 3],
    pub speed_mps: f64,
    pub trigger: Trigger,
    pub behavior: Behavior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioScript {
    pub name: String,
    pub weather: WeatherSpec,
    pub actors: Vec<ScriptedActor>,
    pub duration_s: f64,
}

impl ScenarioScript {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.weather.validate()?;
        check("duration_s", self.duration_s, self.duration_s > 0.0, "(0, inf)")?;
        for a in &self.actors {
            check("speed_mps", a.speed_mps, a.speed_mps >= 0.0, "[0, inf)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccidentTemplate {
    /// A car beside the ego suddenly swerves into its lane.
    CutIn,
    /// At night, a pedestrian or car emerges from behind a parked occluder.
    NightOccludedCrossing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AccidentParams {
    /// Cut-in: side offset of the actor at spawn, meters (positive = left). |v| in (0, 10].
    pub lateral_offset_m: f64,
    /// Cut-in: how far ahead of the ego the actor spawns, [0, 50].
    pub lead_distance_m: f64,
    /// Distance to the ego at which the maneuver starts, (0, 200].
    pub trigger_distance_m: f64,
    /// Cut-in: actor speed, [0, 50].
    pub relative_speed_mps: f64,
    /// Crossing: actor speed, [0, 20].
    pub crossing_speed_mps: f64,
    /// Crossing: distance ahead of the ego of the crossing point, (0, 150].
    pub crossing_distance_m: f64,
    /// Crossing: lateral offset of the occluder from the ego lane center, (0, 15].
    pub occluder_offset_m: f64,
    /// Crossing: sun altitude, [-90, 0).
    pub night_sun_altitude_deg: f64,
    /// Crossing: actor type, Pedestrian or Car.
    pub crossing_category: Category,
    /// Uniform jitter half-width on spawn offsets, [0, 1), strictly less than
    /// half the lateral offset so the sign never flips.
    pub jitter_m: f64,
    pub duration_s: f64,
}

impl Default for AccidentParams {
    fn default() -> Self {
        Self {
            lateral_offset_m: 3.5,
            lead_distance_m: 8.0,
            trigger_distance_m: 20.0,
            relative_speed_mps: 6.0,
            crossing_speed_mps: 1.5,
            crossing_distance_m: 30.0,
            occluder_offset_m: 3.0,
            night_sun_altitude_deg: -20.0,
            crossing_category: Category::Pedestrian,
            jitter_m: 0.5,
            duration_s: 10.0,
        }
    }
}

impl AccidentParams {
    pub fn validate(&self, template: AccidentTemplate) -> Result<(), ScenarioError> {
        check("jitter_m", self.jitter_m, (0.0..1.0).contains(&self.jitter_m), "[0, 1)")?;
        check("duration_s", self.duration_s, self.duration_s > 0.0 && self.duration_s <= 600.0, "(0, 600]")?;
        check(
            "trigger_distance_m",
            self.trigger_distance_m,
            self.trigger_distance_m > 0.0 && self.trigger_distance_m <= 200.0,
            "(0, 200]",
        )?;
        match template {
            AccidentTemplate::CutIn => {
                let l = self.lateral_offset_m.abs();
                check("lateral_offset_m", self.lateral_offset_m, l > 0.0 && l <= 10.0, "0 < |v| <= 10")?;
                check("jitter_m", self.jitter_m, self.jitter_m < l / 2.0, "[0, |lateral_offset_m| / 2)")?;
                check("lead_distance_m", self.lead_distance_m, (0.0..=50.0).contains(&self.lead_distance_m), "[0, 50]")?;
                check(
                    "relative_speed_mps",
                    self.relative_speed_mps,
                    (0.0..=50.0).contains(&self.relative_speed_mps),
                    "[0, 50]",
                )
            }
            AccidentTemplate::NightOccludedCrossing => {
                check(
                    "crossing_speed_mps",
                    self.crossing_speed_mps,
                    (0.0..=20.0).contains(&self.crossing_speed_mps),
                    "[0, 20]",
                )?;
                check(
                    "crossing_distance_m",
                    self.crossing_distance_m,
                    self.crossing_distance_m > 0.0 && self.crossing_distance_m <= 150.0,
                    "(0, 150]",
                )?;
                check(
                    "occluder_offset_m",
                    self.occluder_offset_m,
                    self.occluder_offset_m > 0.0 && self.occluder_offset_m <= 15.0,
                    "(0, 15]",
                )?;
                check(
                    "night_sun_altitude_deg",
                    self.night_sun_altitude_deg,
                    (-90.0..0.0).contains(&self.night_sun_altitude_deg),
                    "[-90, 0)",
                )?;
                if matches!(self.crossing_category, Category::Pedestrian | Category::Car) {
                    Ok(())
                } else {
                    Err(ScenarioError::CrossingCategory(self.crossing_category))
                }
            }
        }
    }
}

/// Builds an accident script. Spawn jitter comes from a ChaCha8 stream seeded with `seed`.
pub fn make_accident(template: AccidentTemplate, params: &AccidentParams, seed: u64) -> Result<ScenarioScript, ScenarioError> {
    params.validate(template)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = || if params.jitter_m > 0.0 { rng.random_range(-params.jitter_m..=params.jitter_m) } else { 0.0 };
    let script = match template {
        AccidentTemplate::CutIn => {
            let lateral = params.lateral_offset_m + jitter();
            let ahead = params.lead_distance_m + jitter();
            ScenarioScript {
                name: format!("cut_in_seed{seed}"),
                weather: weather_preset("clear_noon").expect("preset exists"),
                actors: vec![ScriptedActor {
                    category: Category::Car,
                    spawn_offset: [ahead, lateral, 0.0],
                    speed_mps: params.relative_speed_mps,
                    trigger: Trigger::EgoDistance(params.trigger_distance_m),
                    behavior: Behavior::LaneCut { target_lateral_m: 0.0 },
                }],
                duration_s: params.duration_s,
            }
        }
        AccidentTemplate::NightOccludedCrossing => {
            let side = if rng_side(seed) { 1.0 } else { -1.0 };
            let at = params.crossing_distance_m + jitter();
            let occluder_lateral = side * (params.occluder_offset_m + jitter().abs());
            // actor stands just beyond the occluder, further from the lane
            let actor_lateral = occluder_lateral + side * 1.5;
            let weather = WeatherSpec {
                name: "night".into(),
                sun_altitude_deg: params.night_sun_altitude_deg,
                sun_azimuth_deg: 0.0,
                cloudiness_pct: 30.0,
                precipitation_pct: 0.0,
                precipitation_deposits_pct: 0.0,
            };
            ScenarioScript {
                name: format!("night_occluded_crossing_seed{seed}"),
                weather,
                actors: vec![
                    ScriptedActor {
                        category: Category::Truck,
                        spawn_offset: [at - 2.0, occluder_lateral, 0.0],
                        speed_mps: 0.0,
                        trigger: Trigger::Time(0.0),
                        behavior: Behavior::Static,
                    },
                    ScriptedActor {
                        category: params.crossing_category,
                        spawn_offset: [at, actor_lateral, 0.0],
                        speed_mps: params.crossing_speed_mps,
                        trigger: Trigger::EgoDistance(params.trigger_distance_m),
                        // toward the lane: heading -90 deg (rightward) when on the left
                        behavior: Behavior::Cross { heading_deg: -90.0 * side },
                    },
                ],
                duration_s: params.duration_s,
            }
        }
    };
    script.validate()?;
    Ok(script)
}

fn rng_side(seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng.random_bool(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_named_presets() {
        let names: Vec<String> = weather_presets().into_iter().map(|p| p.name).collect();
        assert_eq!(
            names,
            [
                "clear_noon",
                "cloudy_sunset",
                "light_rain",
                "hard_rain",
                "after_rain_cloudy_sunset",
                "after_rain_clear_noon"
            ]
        );
        for p in weather_presets() {
            p.validate().unwrap();
        }
    }

    #[test]
    fn preset_semantics() {
        let clear = weather_preset("clear_noon").unwrap();
        assert_eq!((clear.precipitation_pct, clear.precipitation_deposits_pct), (0.0, 0.0));
        let after = weather_preset("after_rain_clear_noon").unwrap();
        assert_eq!(after.precipitation_pct, 0.0);
        assert!(after.precipitation_deposits_pct > 0.0);
        let hard = weather_preset("hard_rain").unwrap();
        assert!(hard.precipitation_pct > weather_preset("light_rain").unwrap().precipitation_pct);
    }

    #[test]
    fn overrides() {
        let patch = WeatherPatch { cloudiness_pct: Some(0.0), ..Default::default() };
        let p = weather_presets_with([("clear_noon", &patch)]).unwrap();
        assert_eq!(p[0].cloudiness_pct, 0.0);
        assert!(matches!(weather_presets_with([("fog", &patch)]), Err(ScenarioError::UnknownPreset(_))));
        let bad = WeatherPatch { sun_altitude_deg: Some(120.0), ..Default::default() };
        assert!(matches!(weather_presets_with([("clear_noon", &bad)]), Err(ScenarioError::Range { .. })));
    }

    #[test]
    fn sweep_two_by_two() {
        let axes = WeatherAxes {
            sun_altitude_deg: vec![10.0, 75.0],
            precipitation_pct: vec![0.0, 90.0],
            ..Default::default()
        };
        let s = weather_sweep(&axes).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(
            s.iter().map(|w| (w.sun_altitude_deg, w.precipitation_pct)).collect::<Vec<_>>(),
            vec![(10.0, 0.0), (10.0, 90.0), (75.0, 0.0), (75.0, 90.0)]
        );
        assert_eq!(weather_sweep(&WeatherAxes::default()).unwrap().len(), 1);
    }

    #[test]
    fn sweep_errors() {
        let axes = WeatherAxes { cloudiness_pct: vec![], ..Default::default() };
        assert_eq!(weather_sweep(&axes), Err(ScenarioError::EmptyAxis("cloudiness_pct")));
        let axes = WeatherAxes { sun_azimuth_deg: vec![360.0], ..Default::default() };
        assert!(matches!(weather_sweep(&axes), Err(ScenarioError::Range { field: "sun_azimuth_deg", .. })));
        let axes = WeatherAxes { precipitation_pct: vec![5.0, 5.0], ..Default::default() };
        assert!(matches!(weather_sweep(&axes), Err(ScenarioError::DuplicateValue { .. })));
    }

    proptest::proptest! {
        #[test]
        fn sweep_size_is_product(
            a in proptest::collection::btree_set(-90i32..=90, 1..4),
            c in proptest::collection::btree_set(0i32..=100, 1..4),
            d in proptest::collection::btree_set(0i32..=100, 1..3),
        ) {
            let axes = WeatherAxes {
                sun_altitude_deg: a.iter().map(|v| *v as f64).collect(),
                cloudiness_pct: c.iter().map(|v| *v as f64).collect(),
                precipitation_deposits_pct: d.iter().map(|v| *v as f64).collect(),
                ..Default::default()
            };
            let s = weather_sweep(&axes).unwrap();
            proptest::prop_assert_eq!(s.len(), a.len() * c.len() * d.len());
            let names: std::collections::BTreeSet<_> = s.iter().map(|w| w.name.clone()).collect();
            proptest::prop_assert_eq!(names.len(), s.len());
            proptest::prop_assert_eq!(&s, &weather_sweep(&axes).unwrap());
        }
    }

    #[test]
    fn night_crossing_is_dark() {
        for seed in 0..50 {
            let s = make_accident(AccidentTemplate::NightOccludedCrossing, &AccidentParams::default(), seed).unwrap();
            assert!(s.weather.sun_altitude_deg < 0.0);
            let actor = &s.actors[1];
            let occluder = &s.actors[0];
            // occluder sits between the ego lane and the actor
            assert!(actor.spawn_offset[1].abs() > occluder.spawn_offset[1].abs());
            assert_eq!(actor.spawn_offset[1].signum(), occluder.spawn_offset[1].signum());
        }
    }

    #[test]
    fn cut_in_from_the_side() {
        for seed in 0..50 {
            for lateral in [3.5, -2.0] {
                let params = AccidentParams { lateral_offset_m: lateral, ..Default::default() };
                let s = make_accident(AccidentTemplate::CutIn, &params, seed).unwrap();
                let a = &s.actors[0];
                assert_ne!(a.spawn_offset[1], 0.0);
                assert_eq!(a.spawn_offset[1].signum(), lateral.signum());
                assert!(matches!(a.trigger, Trigger::EgoDistance(_)));
            }
        }
    }

    #[test]
    fn accident_determinism_and_json() {
        let p = AccidentParams::default();
        let a = make_accident(AccidentTemplate::CutIn, &p, 9).unwrap();
        assert_eq!(a, make_accident(AccidentTemplate::CutIn, &p, 9).unwrap());
        assert_ne!(a, make_accident(AccidentTemplate::CutIn, &p, 10).unwrap());
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains(r#""trigger":{"type":"ego_distance","value":20.0}"#), "{json}");
        let back: ScenarioScript = serde_json::from_str(&json).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn accident_param_ranges() {
        let bad = AccidentParams { lateral_offset_m: 0.0, ..Default::default() };
        assert!(make_accident(AccidentTemplate::CutIn, &bad, 0).is_err());
        let bad = AccidentParams { night_sun_altitude_deg: 5.0, ..Default::default() };
        assert!(make_accident(AccidentTemplate::NightOccludedCrossing, &bad, 0).is_err());
        let bad = AccidentParams { crossing_category: Category::Tram, ..Default::default() };
        assert!(make_accident(AccidentTemplate::NightOccludedCrossing, &bad, 0).is_err());
        let bad = AccidentParams { jitter_m: 2.0, ..Default::default() };
        assert!(make_accident(AccidentTemplate::CutIn, &bad, 0).is_err());
    }
}
