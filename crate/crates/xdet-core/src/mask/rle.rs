//! Run-length serialization of binary masks.
//!
//! Runs are counted in column-major order (column by column, top to
//! bottom) and alternate background/foreground starting with background,
//! so a mask whose first pixel is foreground starts with a zero count.
//! The text form is two lines: `width height`, then the counts.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rle {
    pub width: usize,
    pub height: usize,
    pub counts: Vec<u32>,
}

/// Encode a mask as column-major run lengths.
pub fn encode_rle(m: &BinaryMask) -> Rle {
    let mut counts = Vec::new();
    let mut current: u8 = 0;
    let mut run: u32 = 0;
    for x in 0..m.width() {
        for y in 0..m.height() {
            let v = m.get(x, y);
            if v == current {
                run += 1;
            } else {
                counts.push(run);
                current = v;
                run = 1;
            }
        }
    }
    counts.push(run);
    Rle {
        width: m.width(),
        height: m.height(),
        counts,
    }
}

/// Decode run lengths back into a mask (image frame).
pub fn decode_rle(r: &Rle) -> Result<BinaryMask> {
    let total: u64 = r.counts.iter().map(|c| *c as u64).sum();
    if total != (r.width * r.height) as u64 {
        return Err(Error::InvalidRle(format!(
            "counts sum to {total}, expected {}",
            r.width * r.height
        )));
    }
    let mut m = BinaryMask::new(r.width, r.height);
    let mut idx: usize = 0;
    let mut value: u8 = 0;
    for &c in &r.counts {
        for _ in 0..c {
            let x = idx / r.height.max(1);
            let y = idx % r.height.max(1);
            if value != 0 {
                m.set(x, y, 1);
            }
            idx += 1;
        }
        value ^= 1;
    }
    Ok(m)
}

impl fmt::Display for Rle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.width, self.height)?;
        let mut first = true;
        for c in &self.counts {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        writeln!(f)
    }
}

impl FromStr for Rle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidRle("missing header line".into()))?;
        let mut parts = header.split_whitespace();
        let width: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::InvalidRle("bad width".into()))?;
        let height: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::InvalidRle("bad height".into()))?;
        let counts_line = lines.next().unwrap_or("");
        let counts: std::result::Result<Vec<u32>, _> = counts_line
            .split_whitespace()
            .map(|t| t.parse::<u32>())
            .collect();
        let counts = counts.map_err(|e| Error::InvalidRle(format!("bad count: {e}")))?;
        Ok(Rle {
            width,
            height,
            counts,
        })
    }
}
