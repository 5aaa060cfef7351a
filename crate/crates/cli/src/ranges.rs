//! Parsing of `--ks` / `--ds` lists.
//!
//! A list is comma separated; each item is a decimal integer, a power `2^e`,
//! or an inclusive power range `2^a..2^b`.

use ants_core::protocols::AgentCount;

use crate::error::CliError;

fn parse_exponent(s: &str) -> Result<u32, CliError> {
    s.trim()
        .strip_prefix("2^")
        .and_then(|e| e.parse().ok())
        .ok_or_else(|| CliError::Usage(format!("expected 2^e, got {s:?}")))
}

/// Expands a list into agent counts, keeping order and duplicates.
pub fn parse_counts(list: &str) -> Result<Vec<AgentCount>, CliError> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let (lo, hi) = (parse_exponent(lo)?, parse_exponent(hi)?);
            if lo > hi {
                return Err(CliError::Usage(format!("empty range {item:?}")));
            }
            out.extend((lo..=hi).map(|e| format!("2^{e}").parse::<AgentCount>()).collect::<Result<Vec<_>, _>>()?);
        } else {
            out.push(item.parse::<AgentCount>()?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Usage(format!("empty list {list:?}")));
    }
    Ok(out)
}

/// Like [`parse_counts`] but every value must fit in a `u64`.
pub fn parse_integers(list: &str) -> Result<Vec<u64>, CliError> {
    parse_counts(list)?
        .into_iter()
        .map(|c| c.as_u64().ok_or_else(|| CliError::Usage(format!("{c} is too large to simulate"))))
        .collect()
}
