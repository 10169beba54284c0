//! UEP binary format.
//!
//! | bytes          | content                                          |
//! |----------------|--------------------------------------------------|
//! | 4              | magic `UEP1`                                     |
//! | 3 × 4          | `N`, `S`, `K` as little-endian `u32`             |
//! | 1              | flags; bit 0 set when weights follow             |
//! | 8 × S          | weights as little-endian `f64` (only if flagged) |
//! | 8 × N × S × K  | probabilities, `[input][member][class]`          |
//! | 8              | payload byte count as little-endian `u64`        |

use std::io::{Read, Write};
use std::path::Path;

use super::{check_row, IoError};
use crate::estimator::{EnsembleBatch, EstimatorError};

pub const UEP_MAGIC: [u8; 4] = *b"UEP1";
const HEADER_LEN: u64 = 17;
const FLAG_WEIGHTS: u8 = 1;

pub fn write_uep_to<W: Write>(batch: &EnsembleBatch, mut out: W) -> Result<(), IoError> {
    let dim = |x: usize| {
        u32::try_from(x)
            .map_err(|_| EstimatorError::Shape(format!("dimension {x} does not fit in u32")))
    };
    let mut buf = Vec::with_capacity(HEADER_LEN as usize + 8 * (batch.probs().len() + 1));
    buf.extend_from_slice(&UEP_MAGIC);
    for d in [batch.inputs(), batch.members(), batch.classes()] {
        buf.extend_from_slice(&dim(d)?.to_le_bytes());
    }
    match batch.weights() {
        Some(w) => {
            buf.push(FLAG_WEIGHTS);
            w.iter().for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
        }
        None => buf.push(0),
    }
    batch
        .probs()
        .iter()
        .for_each(|x| buf.extend_from_slice(&x.to_le_bytes()));
    buf.extend_from_slice(&(8 * batch.probs().len() as u64).to_le_bytes());
    out.write_all(&buf)?;
    Ok(())
}

pub fn write_uep(batch: &EnsembleBatch, path: &Path) -> Result<(), IoError> {
    let mut buf = Vec::new();
    write_uep_to(batch, &mut buf)?;
    std::fs::write(path, buf).map_err(IoError::file(path))
}

fn f64s(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect()
}

pub fn read_uep_from<R: Read>(mut input: R) -> Result<EnsembleBatch, IoError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    parse(&bytes)
}

pub fn read_uep(path: &Path) -> Result<EnsembleBatch, IoError> {
    parse(&std::fs::read(path).map_err(IoError::file(path))?)
}

fn parse(bytes: &[u8]) -> Result<EnsembleBatch, IoError> {
    let found = bytes.len() as u64;
    if found < 4 {
        return Err(IoError::Truncated {
            expected: HEADER_LEN,
            found,
        });
    }
    if bytes[..4] != UEP_MAGIC {
        return Err(IoError::BadMagic {
            found: bytes[..4].try_into().unwrap(),
        });
    }
    if found < HEADER_LEN {
        return Err(IoError::Truncated {
            expected: HEADER_LEN,
            found,
        });
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 + 4 * i..8 + 4 * i].try_into().unwrap()) as u64;
    let (n, s, k) = (word(0), word(1), word(2));
    let flags = bytes[16];
    if flags & !FLAG_WEIGHTS != 0 {
        return Err(IoError::UnknownFlags(flags));
    }
    let weight_bytes = if flags & FLAG_WEIGHTS != 0 { 8 * s } else { 0 };
    // u32 dimensions cannot overflow u128.
    let payload = 8 * n as u128 * s as u128 * k as u128;
    let expected = HEADER_LEN as u128 + weight_bytes as u128 + payload + 8;
    if (found as u128) < expected {
        return Err(IoError::Truncated {
            expected: u64::try_from(expected).unwrap_or(u64::MAX),
            found,
        });
    }
    if found as u128 > expected {
        return Err(IoError::TrailingBytes {
            extra: found - expected as u64,
        });
    }
    let payload = payload as u64;
    let body = &bytes[HEADER_LEN as usize..];
    let (weights, rest) = body.split_at(weight_bytes as usize);
    let (probs, footer) = rest.split_at(payload as usize);
    let footer = u64::from_le_bytes(footer.try_into().unwrap());
    if footer != payload {
        return Err(IoError::SumCheck {
            footer,
            expected: payload,
        });
    }
    let (n, s, k) = (n as usize, s as usize, k as usize);
    let mut probs = f64s(probs);
    if k > 0 {
        for (r, row) in probs.chunks_exact_mut(k).enumerate() {
            check_row(row, r / s, r % s)?;
        }
    }
    let weights = (flags & FLAG_WEIGHTS != 0).then(|| f64s(weights));
    Ok(EnsembleBatch::new(n, s, k, probs, weights, None)?)
}
