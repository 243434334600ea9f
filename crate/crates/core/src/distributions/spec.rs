//! Parser for the distribution mini-language:
//! `discrete:v=1,3;w=0.5,0.5`, `uniform:0,2`, `exp:1.0`, `normal:0,1`,
//! `empirical:@path.csv` (one value per line) or `empirical:1,2,2,5`.

use std::path::Path;
use std::str::FromStr;

use super::Distribution;
use crate::error::{Error, Result};

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("`{s}` is not a number")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_number).collect()
}

fn exactly<const N: usize>(family: &str, args: &str) -> Result<[f64; N]> {
    let values = parse_list(args)?;
    values
        .try_into()
        .map_err(|v: Vec<f64>| Error::Parse(format!("{family} takes {N} parameter(s), got {}", v.len())))
}

/// Reads one real per line; blank lines are skipped.
pub fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(parse_number)
        .collect()
}

impl Distribution {
    /// Parses a distribution spec string.
    pub fn parse(spec: &str) -> Result<Self> {
        let (family, args) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("distribution spec `{spec}` has no `family:` prefix")))?;
        match family.trim() {
            "discrete" => {
                let mut values = None;
                let mut weights = None;
                for part in args.split(';') {
                    match part.split_once('=') {
                        Some(("v", list)) => values = Some(parse_list(list)?),
                        Some(("w", list)) => weights = Some(parse_list(list)?),
                        _ => return Err(Error::Parse(format!("unexpected `{part}` in discrete spec"))),
                    }
                }
                let values = values.ok_or_else(|| Error::Parse("discrete spec needs v=...".into()))?;
                match weights {
                    Some(w) => Distribution::discrete(&values, &w),
                    None => Distribution::empirical(&values),
                }
            }
            "uniform" => {
                let [lo, hi] = exactly::<2>("uniform", args)?;
                Distribution::uniform(lo, hi)
            }
            "exp" => {
                let [rate] = exactly::<1>("exp", args)?;
                Distribution::exponential(rate)
            }
            "normal" => {
                let [mean, sd] = exactly::<2>("normal", args)?;
                Distribution::normal(mean, sd)
            }
            "empirical" => {
                let samples = match args.strip_prefix('@') {
                    Some(path) => read_samples(Path::new(path))?,
                    None => parse_list(args)?,
                };
                Distribution::empirical(&samples)
            }
            other => Err(Error::Parse(format!("unknown distribution family `{other}`"))),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::parse(s)
    }
}
