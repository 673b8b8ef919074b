use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Result;
use clap::Subcommand;
use serde::Serialize;
use synthkit_core::scenario::{
    make_accident, weather_presets_with, weather_sweep, AccidentParams, AccidentTemplate, WeatherAxes, WeatherPatch,
};

use crate::io::{emit, json_arg, pretty};

#[derive(Subcommand)]
pub enum Command {
    /// The six named weather presets as a JSON array.
    Presets {
        /// JSON object (inline or a file path) mapping preset names to partial weather overrides.
        #[arg(long)]
        overrides: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cartesian product of weather parameter values.
    Sweep {
        /// JSON object (inline or a file path) with a value list per weather parameter.
        #[arg(long)]
        axes: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A scripted accident scenario.
    Accident {
        #[arg(long, value_enum)]
        template: Template,
        /// JSON object (inline or a file path) overriding accident parameters.
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
pub enum Template {
    CutIn,
    NightOccludedCrossing,
}

impl From<Template> for AccidentTemplate {
    fn from(t: Template) -> Self {
        match t {
            Template::CutIn => AccidentTemplate::CutIn,
            Template::NightOccludedCrossing => AccidentTemplate::NightOccludedCrossing,
        }
    }
}

#[derive(Serialize)]
struct Written<'a> {
    path: &'a PathBuf,
    items: usize,
}

/// The payload goes to `out` when given (with a short report on stdout),
/// otherwise straight to stdout.
fn deliver<T: Serialize + ?Sized>(payload: &T, items: usize, what: &str, out: Option<PathBuf>, json: bool) -> Result<()> {
    let text = pretty(payload);
    match &out {
        Some(path) => {
            emit(Some(path), &text)?;
            if json {
                print!("{}", pretty(&Written { path, items }));
            } else {
                println!("wrote {items} {what} to {}", path.display());
            }
        }
        None => emit(None, &text)?,
    }
    Ok(())
}

pub fn run(cmd: Command, json: bool) -> Result<()> {
    match cmd {
        Command::Presets { overrides, out } => {
            let patches: BTreeMap<String, WeatherPatch> = match overrides {
                Some(p) => json_arg(&p)?,
                None => BTreeMap::new(),
            };
            let specs = weather_presets_with(patches.iter().map(|(k, v)| (k.as_str(), v)))?;
            deliver(&specs, specs.len(), "weather specs", out, json)
        }
        Command::Sweep { axes, out } => {
            let axes: WeatherAxes = json_arg(&axes)?;
            let specs = weather_sweep(&axes)?;
            deliver(&specs, specs.len(), "weather specs", out, json)
        }
        Command::Accident { template, params, seed, out } => {
            let params: AccidentParams = match params {
                Some(p) => json_arg(&p)?,
                None => AccidentParams::default(),
            };
            let script = make_accident(template.into(), &params, seed)?;
            deliver(&script, script.actors.len(), "actors", out, json)
        }
    }
}
