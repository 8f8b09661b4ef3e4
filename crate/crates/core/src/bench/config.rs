//! Flat `key = value` experiment files.
//!
//! One entry per line; `#` starts a comment; blank lines are ignored. Keys
//! may not repeat. Lists are comma separated.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::action::Action;
use crate::error::{Error, Result};
use crate::exploration::{Engine, UncertaintyTerm};
use crate::sensor::{BeamLayout, SensorSpec};

use super::experiment::{ExperimentSpec, MapSource};

/// Parsed entries with the byte offset of each line, for diagnostics.
#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, (String, usize)>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let here = offset;
            offset += line.len();
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(Error::Parse {
                    offset: here,
                    message: format!("expected key = value, got '{content}'"),
                });
            };
            let key = k.trim().to_ascii_lowercase();
            if key.is_empty() {
                return Err(Error::Parse { offset: here, message: "empty key".into() });
            }
            if entries.insert(key.clone(), (v.trim().to_string(), here)).is_some() {
                return Err(Error::Parse { offset: here, message: format!("duplicate key '{key}'") });
            }
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn parse_value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, off)) => v.parse().map(Some).map_err(|_| Error::Parse {
                offset: *off,
                message: format!("invalid value '{v}' for {key}"),
            }),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, off)) => v
                .split(',')
                .map(|s| s.trim())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse().map_err(|_| Error::Parse {
                        offset: *off,
                        message: format!("invalid list item '{s}' for {key}"),
                    })
                })
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }
}

const KNOWN_KEYS: &[&str] = &[
    "map",
    "width_m",
    "height_m",
    "resolution_m",
    "map_seed",
    "start_x",
    "start_y",
    "start_heading",
    "engines",
    "n",
    "n_query",
    "epochs",
    "alpha",
    "info_threshold",
    "loop_limit",
    "trials",
    "seed_base",
    "out_dir",
    "length_scale",
    "zeta",
    "sigma",
    "mu0",
    "uncertainty",
    "fov_rad",
    "beam_step_rad",
    "beam_count",
    "max_range_m",
    "scan_every",
];

impl ExperimentSpec {
    /// Builds a spec from a parsed file; unspecified keys keep
    /// [`ExperimentSpec::default`] values.
    pub fn from_key_values(kv: &KeyValues) -> Result<Self> {
        if let Some(k) = kv.keys().find(|k| !KNOWN_KEYS.contains(k)) {
            let (_, off) = &kv.entries[k];
            return Err(Error::Parse { offset: *off, message: format!("unknown key '{k}'") });
        }
        let mut s = ExperimentSpec::default();
        if let Some(m) = kv.get("map") {
            s.map = match m.parse() {
                Ok(kind) => MapSource::Generated(kind),
                Err(_) => MapSource::Pgm(PathBuf::from(m)),
            };
        }
        s.width_m = kv.parse_value("width_m")?.unwrap_or(s.width_m);
        s.height_m = kv.parse_value("height_m")?.unwrap_or(s.height_m);
        s.resolution_m = kv.parse_value("resolution_m")?.unwrap_or(s.resolution_m);
        s.map_seed = kv.parse_value("map_seed")?.unwrap_or(s.map_seed);
        match (kv.parse_value::<f64>("start_x")?, kv.parse_value::<f64>("start_y")?) {
            (Some(x), Some(y)) => {
                let heading = kv.parse_value("start_heading")?.unwrap_or(0.0);
                s.start = Some(Action::new(x, y, heading));
            }
            (None, None) => {}
            _ => return Err(Error::InvalidArgument("start_x and start_y go together".into())),
        }
        s.engines = kv.list::<Engine>("engines")?.unwrap_or(s.engines);
        s.n_values = kv.list("n")?.unwrap_or(s.n_values);
        s.n_query = kv.parse_value("n_query")?;
        s.epochs = kv.parse_value("epochs")?;
        s.trials = kv.parse_value("trials")?.unwrap_or(s.trials);
        s.seed_base = kv.parse_value("seed_base")?.unwrap_or(s.seed_base);
        if let Some(d) = kv.get("out_dir") {
            s.out_dir = PathBuf::from(d);
        }

        let t = &mut s.template;
        t.alpha = kv.parse_value("alpha")?.unwrap_or(t.alpha);
        t.info_threshold = kv.parse_value("info_threshold")?.unwrap_or(t.info_threshold);
        t.loop_limit = kv.parse_value("loop_limit")?.unwrap_or(t.loop_limit);
        t.kernel.length_scale = kv.parse_value("length_scale")?.unwrap_or(t.kernel.length_scale);
        t.bki.zeta = kv.parse_value("zeta")?.unwrap_or(t.bki.zeta);
        if let Some(sigma) = kv.parse_value::<f64>("sigma")? {
            t.bki.sigma2 = sigma * sigma;
        }
        t.bki.mu0 = kv.parse_value("mu0")?.unwrap_or(t.bki.mu0);
        t.scan_every = kv.parse_value("scan_every")?.unwrap_or(t.scan_every);
        if let Some(u) = kv.get("uncertainty") {
            t.uncertainty = match u.to_ascii_lowercase().as_str() {
                "variance" => UncertaintyTerm::Variance,
                "std_dev" | "stddev" => UncertaintyTerm::StdDev,
                other => return Err(Error::InvalidArgument(format!("uncertainty '{other}'"))),
            };
        }
        let fov = kv.parse_value("fov_rad")?.unwrap_or(t.sensor.fov_rad);
        let range = kv.parse_value("max_range_m")?.unwrap_or(t.sensor.max_range_m);
        let layout = match (kv.parse_value("beam_step_rad")?, kv.parse_value("beam_count")?) {
            (Some(_), Some(_)) => {
                return Err(Error::InvalidArgument("give beam_step_rad or beam_count, not both".into()))
            }
            (Some(step), None) => BeamLayout::Step(step),
            (None, Some(n)) => BeamLayout::Count(n),
            (None, None) => t.sensor.layout,
        };
        t.sensor = SensorSpec { fov_rad: fov, layout, max_range_m: range }.validated()?;
        s.validated()
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_key_values(&KeyValues::parse(text)?)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::MapKind;

    #[test]
    fn parses_comments_and_lists() {
        let text = "# table run\nmap = structured  # maze\nengines = batch_bki, gp_bo\nn = 30,60\n\ntrials=3\nsigma = 0.1\n";
        let s = ExperimentSpec::parse(text).unwrap();
        assert_eq!(s.map, MapSource::Generated(MapKind::Structured));
        assert_eq!(s.engines, vec![Engine::BatchBki, Engine::GpBo]);
        assert_eq!(s.n_values, vec![30, 60]);
        assert_eq!(s.trials, 3);
        assert!((s.template.bki.sigma2 - 0.01).abs() < 1e-15);
    }

    #[test]
    fn pgm_paths_and_start() {
        let s = ExperimentSpec::parse("map = maps/seattle.pgm\nstart_x = 2\nstart_y = 3.5\n").unwrap();
        assert_eq!(s.map, MapSource::Pgm("maps/seattle.pgm".into()));
        assert_eq!(s.start, Some(Action::new(2.0, 3.5, 0.0)));
    }

    #[test]
    fn errors_carry_offsets() {
        let err = ExperimentSpec::parse("trials = 2\nalpha 0.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 11, .. }), "{err:?}");
        let err = ExperimentSpec::parse("trials = 2\ntrials = 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { offset: 11, .. }));
        assert!(matches!(ExperimentSpec::parse("colour = red\n"), Err(Error::Parse { offset: 0, .. })));
        assert!(ExperimentSpec::parse("n = 30, x\n").is_err());
        assert!(ExperimentSpec::parse("trials = 0\n").is_err());
        assert!(ExperimentSpec::parse("engines = \n").is_err());
    }
}
