//! Plain-text representation files.
//!
//! ```text
//! # comments and blank lines are ignored
//! group Z2xZ2
//! dim 8
//! translation 0
//! <dim rows, each with dim entries written as `re im`>
//! modulation 0
//! ...
//! ```
//!
//! Generator indices are zero-based cyclic factors of the group. Every
//! translation and modulation generator must appear exactly once.

use std::fmt::Write as _;

use crate::abelian::FiniteAbelianGroup;
use crate::action::HeisenbergAction;
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64};

struct Lines<'a> {
    src: &'a str,
    offset: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank, non-comment line with its byte offset.
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        while self.offset < self.src.len() {
            let start = self.offset;
            let rest = &self.src[start..];
            let end = rest.find('\n').map(|i| start + i).unwrap_or(self.src.len());
            self.offset = end + 1;
            let line = &self.src[start..end];
            let body = line.split('#').next().unwrap_or("").trim();
            if !body.is_empty() {
                let lead = line.len() - line.trim_start().len();
                return Some((start + lead, body));
            }
        }
        None
    }
}

fn keyword<'a>(line: Option<(usize, &'a str)>, key: &str, eof: usize) -> Result<(usize, &'a str)> {
    let (pos, body) =
        line.ok_or_else(|| Error::parse(eof, format!("expected `{key}`, found end of file")))?;
    let rest = body
        .strip_prefix(key)
        .filter(|r| r.starts_with(char::is_whitespace))
        .ok_or_else(|| Error::parse(pos, format!("expected `{key} …`, found `{body}`")))?;
    Ok((pos + key.len(), rest.trim()))
}

/// Reads a representation file without checking the relations.
pub fn parse_rep_unchecked(src: &str) -> Result<HeisenbergAction> {
    let mut lines = Lines { src, offset: 0 };
    let eof = src.len();
    let (gpos, gspec) = keyword(lines.next_line(), "group", eof)?;
    let group = FiniteAbelianGroup::parse(gspec).map_err(|e| match e {
        Error::Parse { position, message } => Error::parse(gpos + 1 + position, message),
        other => other,
    })?;
    let (dpos, dspec) = keyword(lines.next_line(), "dim", eof)?;
    let dim: usize = dspec
        .parse()
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::parse(dpos, format!("`{dspec}` is not a positive dimension")))?;
    let rank = group.rank();
    let mut translations: Vec<Option<CMatrix>> = vec![None; rank];
    let mut modulations: Vec<Option<CMatrix>> = vec![None; rank];
    while let Some((pos, body)) = lines.next_line() {
        let mut words = body.split_whitespace();
        let kind = words.next().unwrap_or("");
        let slot = match kind {
            "translation" => &mut translations,
            "modulation" => &mut modulations,
            _ => {
                return Err(Error::parse(
                    pos,
                    format!("expected `translation i` or `modulation i`, found `{body}`"),
                ))
            }
        };
        let idx: usize = words
            .next()
            .and_then(|w| w.parse().ok())
            .filter(|&i| i < rank)
            .ok_or_else(|| Error::parse(pos, format!("generator index must be in 0..{rank}")))?;
        if words.next().is_some() {
            return Err(Error::parse(pos, "trailing input after generator index"));
        }
        if slot[idx].is_some() {
            return Err(Error::parse(pos, format!("{kind} {idx} given twice")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            let (rpos, row) = lines
                .next_line()
                .ok_or_else(|| Error::parse(eof, format!("{kind} {idx}: missing row {r}")))?;
            let nums: Vec<f64> = row
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(rpos, format!("{kind} {idx}, row {r}: not a number")))?;
            if nums.len() != 2 * dim {
                return Err(Error::parse(
                    rpos,
                    format!(
                        "{kind} {idx}, row {r}: {} numbers, expected {}",
                        nums.len(),
                        2 * dim
                    ),
                ));
            }
            if nums.iter().any(|v| !v.is_finite()) {
                return Err(Error::parse(
                    rpos,
                    format!("{kind} {idx}, row {r}: non-finite entry"),
                ));
            }
            for c in 0..dim {
                m[(r, c)] = C64::new(nums[2 * c], nums[2 * c + 1]);
            }
        }
        slot[idx] = Some(m);
    }
    let collect = |v: Vec<Option<CMatrix>>, kind: &str| -> Result<Vec<CMatrix>> {
        v.into_iter()
            .enumerate()
            .map(|(i, m)| m.ok_or_else(|| Error::parse(eof, format!("{kind} {i} missing"))))
            .collect()
    };
    let translations = collect(translations, "translation")?;
    let modulations = collect(modulations, "modulation")?;
    if rank == 0 {
        return Ok(HeisenbergAction::trivial(dim));
    }
    HeisenbergAction::new_unchecked(group, translations, modulations)
}

/// Reads a representation file and validates the relations.
pub fn parse_rep(src: &str) -> Result<HeisenbergAction> {
    let rho = parse_rep_unchecked(src)?;
    rho.validate(crate::action::RELATION_TOL)?;
    Ok(rho)
}

pub fn write_rep(rho: &HeisenbergAction) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "group {}", rho.group());
    let _ = writeln!(out, "dim {}", rho.dim());
    let blocks = rho
        .translation_generators()
        .iter()
        .enumerate()
        .map(|(i, m)| ("translation", i, m))
        .chain(
            rho.modulation_generators()
                .iter()
                .enumerate()
                .map(|(i, m)| ("modulation", i, m)),
        );
    for (kind, i, m) in blocks {
        let _ = writeln!(out, "{kind} {i}");
        for r in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols())
                .map(|c| format!("{:e} {:e}", m[(r, c)].re, m[(r, c)].im))
                .collect();
            let _ = writeln!(out, "{}", row.join(" "));
        }
    }
    out
}
