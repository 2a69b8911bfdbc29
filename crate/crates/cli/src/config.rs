//! Flat `key = value` configuration files.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::experiment::ExperimentSpec;
use crate::methods::parse_methods;
use crate::CliError;

pub const KEYS: [&str; 12] =
    ["experiment", "methods", "lambdas", "d", "N", "seed", "format", "out", "workers", "trials", "max_iters", "timing"];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Usage(format!("config line {}: unknown key `{k}`", i + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| CliError::Usage(format!("{key}: cannot parse `{s}`"))))
        .collect()
}

fn scalar<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| CliError::Usage(format!("{key}: cannot parse `{v}`")))
}

/// Applies one `key = value` setting to `spec`.
pub fn apply(spec: &mut ExperimentSpec, key: &str, value: &str) -> Result<(), CliError> {
    match key {
        "experiment" => spec.id = value.parse()?,
        "methods" => spec.methods = Some(parse_methods(value)?),
        "lambdas" => spec.lambdas = list(key, value)?,
        "d" => spec.ds = Some(list(key, value)?),
        "N" => spec.memories = Some(list(key, value)?),
        "seed" => spec.seed = scalar(key, value)?,
        "format" => spec.format = value.parse()?,
        "out" => spec.out = Some(PathBuf::from(value)),
        "workers" => spec.workers = Some(scalar(key, value)?),
        "trials" => spec.trials = scalar(key, value)?,
        "max_iters" => spec.max_iters = scalar(key, value)?,
        "timing" => spec.timing = scalar(key, value)?,
        _ => return Err(CliError::Usage(format!("unknown key `{key}`"))),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::ExperimentId;

    #[test]
    fn parses_and_applies() {
        let map = parse_config("# comment\nexperiment = table3\nlambdas = 50, 100\nmethods = L-BFGS(N=4), IP-LBFGS(N=5,d=3)\n").unwrap();
        let mut spec = ExperimentSpec::new(ExperimentId::Table2);
        for (k, v) in &map {
            apply(&mut spec, k, v).unwrap();
        }
        assert_eq!(spec.id, ExperimentId::Table3);
        assert_eq!(spec.lambdas, vec![50.0, 100.0]);
        assert_eq!(spec.methods.as_ref().unwrap().len(), 2);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(parse_config("colour = red").is_err());
        assert!(parse_config("seed").is_err());
    }
}
