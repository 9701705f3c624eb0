//! Flat `key = value` config files and flag/file/default resolution.
//! Keys are identical to the long flag names; explicit flags win.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use lorenz5::{Error, Result};

/// Parsed config file: a flat key → value map.
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "config line {} is not 'key = value': {raw:?}",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("config line {} has an empty key", lineno + 1)));
            }
            map.insert(key.to_string(), value.to_string());
        }
        Ok(FileConfig { map })
    }

    /// flag (if given) ⟶ file value ⟶ default.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
    {
        match self.resolve_opt(flag, key)? {
            Some(v) => Ok(v),
            None => Ok(default),
        }
    }

    /// flag ⟶ file value ⟶ None.
    pub fn resolve_opt<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            Some(s) => s
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("invalid value for '{key}': {s:?}"))),
            None => Ok(None),
        }
    }
}

/// "start:stop:count" → inclusive linspace with `count` points.
/// count = 1 yields [start]; count = 0 yields an empty grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("grid '{spec}' must be start:stop:count")));
    }
    let start: f64 =
        parts[0].parse().map_err(|_| Error::Config(format!("bad grid start '{}'", parts[0])))?;
    let stop: f64 =
        parts[1].parse().map_err(|_| Error::Config(format!("bad grid stop '{}'", parts[1])))?;
    let count: usize =
        parts[2].parse().map_err(|_| Error::Config(format!("bad grid count '{}'", parts[2])))?;
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::Config(format!("grid '{spec}' has non-finite bounds")));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

/// "a,b,c,d,e" → 5-vector.
pub fn parse_state(spec: &str) -> Result<[f64; 5]> {
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 5 {
        return Err(Error::Config(format!(
            "state '{spec}' must have five comma-separated components"
        )));
    }
    let mut out = [0.0; 5];
    for (i, p) in parts.iter().enumerate() {
        out[i] = p
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad state component '{p}'")))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_lines() {
        let c = FileConfig::parse("# comment\neps = 0.25\nM=2\n\ntheta0 = 1.5\n").unwrap();
        assert_eq!(c.resolve(None::<f64>, "eps", 0.0).unwrap(), 0.25);
        assert_eq!(c.resolve(None::<f64>, "M", 1.0).unwrap(), 2.0);
        assert_eq!(c.resolve(None::<f64>, "missing", 7.0).unwrap(), 7.0);
    }

    #[test]
    fn flags_override_file() {
        let c = FileConfig::parse("eps = 0.25\n").unwrap();
        assert_eq!(c.resolve(Some(0.5f64), "eps", 0.0).unwrap(), 0.5);
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(FileConfig::parse("this is not a pair\n").is_err());
        assert!(FileConfig::parse("= 3\n").is_err());
        let c = FileConfig::parse("eps = banana\n").unwrap();
        assert!(c.resolve(None::<f64>, "eps", 0.0).is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        assert!(parse_grid("2:9:0").unwrap().is_empty());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:2:3").is_err());
    }

    #[test]
    fn state_parsing() {
        assert_eq!(parse_state("1,2,3,4,5").unwrap(), [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(parse_state("1,2,3").is_err());
        assert!(parse_state("1,2,3,4,x").is_err());
    }
}
