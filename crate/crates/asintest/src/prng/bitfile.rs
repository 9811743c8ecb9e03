//! Raw bit files: bytes on disk, streamed MSB-first within each byte.
//! Files are byte-granular, so every stored stream has a multiple of 8
//! bits; finite by construction, reading past the end reports exhaustion
//! with the bit position reached.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{BitSource, Word};
use crate::{Error, Result};

#[derive(Debug)]
pub struct BitFileSource {
    reader: BufReader<File>,
    delivered_bits: u64,
}

impl BitFileSource {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| {
            Error::Config(format!("cannot open bit file {}: {e}", path.display()))
        })?;
        Ok(BitFileSource {
            reader: BufReader::new(file),
            delivered_bits: 0,
        })
    }
}

impl BitSource for BitFileSource {
    fn next_word(&mut self) -> Result<Word> {
        let mut byte = [0u8; 1];
        match self.reader.read(&mut byte)? {
            0 => Err(Error::Exhausted {
                position: self.delivered_bits,
            }),
            _ => {
                self.delivered_bits += 8;
                Ok(Word {
                    value: byte[0] as u64,
                    nbits: 8,
                })
            }
        }
    }
}

/// Packs a 0/1 slice into bytes, MSB-first; the bit count must be a
/// multiple of 8.
///
/// # Errors
///
/// `Config` if the length is not byte-aligned or a value is not 0/1.
pub fn pack_msb(bits: &[u8]) -> Result<Vec<u8>> {
    if !bits.len().is_multiple_of(8) {
        return Err(Error::Config(format!(
            "bit count {} is not a multiple of 8",
            bits.len()
        )));
    }
    let mut out = Vec::with_capacity(bits.len() / 8);
    for chunk in bits.chunks_exact(8) {
        let mut byte = 0u8;
        for &b in chunk {
            if b > 1 {
                return Err(Error::Config(format!("bit value {b} is not 0 or 1")));
            }
            byte = (byte << 1) | b;
        }
        out.push(byte);
    }
    Ok(out)
}

/// Writes a 0/1 slice to `path` as a packed MSB-first bit file.
pub fn write_bit_file(path: &Path, bits: &[u8]) -> Result<()> {
    let packed = pack_msb(bits)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&packed)?;
    w.flush()?;
    Ok(())
}
