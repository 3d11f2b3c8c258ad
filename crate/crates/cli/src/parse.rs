//! Value parsers for list and range flags.

use std::str::FromStr;

/// Parsed `--N`/`--d`/`--n` style list of counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts(pub Vec<usize>);

impl FromStr for Counts {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        counts(s).map(Counts)
    }
}

/// Parsed comma-separated list of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Reals(pub Vec<f64>);

impl FromStr for Reals {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        floats(s).map(Reals)
    }
}

/// Comma-separated counts; each item is `k`, `a..b` or `a..=b` (both
/// inclusive).
pub fn counts(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: usize = lo.trim().parse().map_err(|_| format!("bad range start in {item:?}"))?;
            let hi: usize = hi.trim().parse().map_err(|_| format!("bad range end in {item:?}"))?;
            if lo > hi {
                return Err(format!("empty range {item:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.push(item.parse().map_err(|_| format!("bad count {item:?}"))?);
        }
    }
    if out.is_empty() {
        return Err("expected at least one value".into());
    }
    Ok(out)
}

/// Comma-separated reals.
pub fn floats(s: &str) -> Result<Vec<f64>, String> {
    let out: Vec<f64> = s
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| format!("bad number {x:?}")))
        .collect::<Result<_, _>>()?;
    if out.is_empty() {
        return Err("expected at least one value".into());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_forms() {
        assert_eq!(counts("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(counts("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(counts("1,2, 8").unwrap(), vec![1, 2, 8]);
        assert_eq!(counts("1..2,5").unwrap(), vec![1, 2, 5]);
        assert!(counts("4..1").is_err());
        assert!(counts("x").is_err());
        assert!(counts("").is_err());
    }

    #[test]
    fn float_forms() {
        assert_eq!(floats("0,0.005, 0.01").unwrap(), vec![0.0, 0.005, 0.01]);
        assert!(floats("a").is_err());
    }
}
