//! Plain-text formats.
//!
//! State files: a header line `n=<int>` followed by `2^n` lines `re im`.
//! Mask files: one bipartition per line, binary, site 0 rightmost.
//! Blank lines and lines starting with `#` are ignored in mask files.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::{PureState, MAX_QUBITS};

/// Round-trip-exact decimal rendering with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_state<W: Write>(state: &PureState, mut out: W) -> Result<()> {
    writeln!(out, "n={}", state.n())?;
    for z in state.amplitudes() {
        writeln!(out, "{} {}", fmt_f64(z.re), fmt_f64(z.im))?;
    }
    out.flush()?;
    Ok(())
}

/// Raw contents of a state file, before the normalization check.
pub fn read_amplitudes<R: BufRead>(input: R) -> Result<(usize, Vec<Complex64>)> {
    let mut lines = input.lines().enumerate();
    let parse_err = |line: usize, msg: String| Error::Parse { line: line + 1, msg };
    let (idx, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "missing header".into()))?;
    let header = header?;
    let n: usize = header
        .trim()
        .strip_prefix("n=")
        .and_then(|s| s.parse().ok())
        .filter(|n| (1..=MAX_QUBITS).contains(n))
        .ok_or_else(|| parse_err(idx, format!("expected 'n=<int>', got '{header}'")))?;
    let mut amps = Vec::with_capacity(1 << n);
    for (idx, line) in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut next = || -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| parse_err(idx, "expected 're im'".into()))?
                .parse()
                .map_err(|e| parse_err(idx, format!("{e}")))
        };
        let (re, im) = (next()?, next()?);
        if parts.next().is_some() {
            return Err(parse_err(idx, "trailing fields".into()));
        }
        amps.push(Complex64::new(re, im));
    }
    if amps.len() != 1 << n {
        return Err(Error::DimensionMismatch { expected: 1 << n, actual: amps.len() });
    }
    Ok((n, amps))
}

/// Reads a state file; the amplitudes must already be normalized.
pub fn read_state<R: BufRead>(input: R) -> Result<PureState> {
    let (n, amps) = read_amplitudes(input)?;
    PureState::from_amplitudes(n, amps)
}

pub fn read_masks<R: BufRead>(input: R) -> Result<Vec<usize>> {
    let mut masks = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mask = usize::from_str_radix(line, 2).map_err(|e| Error::Parse {
            line: idx + 1,
            msg: format!("'{line}' is not a binary mask: {e}"),
        })?;
        masks.push(mask);
    }
    Ok(masks)
}

/// Binary rendering of a mask, `n` digits, site 0 rightmost.
pub fn fmt_mask(mask: usize, n: usize) -> String {
    format!("{mask:0width$b}", width = n)
}
