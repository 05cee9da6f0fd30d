//! Fixed-width field packing for message payloads.

use bitvec::field::BitField;
use bitvec::prelude::*;

use crate::error::{Error, Result};

pub type Payload = BitVec<u8, Msb0>;

#[derive(Debug, Default)]
pub struct BitWriter {
    bits: Payload,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter::default()
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn uint(mut self, value: u64, width: usize) -> Self {
        assert!(width <= 64, "field wider than 64 bits");
        debug_assert!(
            width == 64 || value >> width == 0,
            "{value} does not fit in {width} bits"
        );
        if width > 0 {
            let start = self.bits.len();
            self.bits.resize(start + width, false);
            self.bits[start..].store_be(value);
        }
        self
    }

    pub fn flag(mut self, b: bool) -> Self {
        self.bits.push(b);
        self
    }

    pub fn finish(self) -> Payload {
        self.bits
    }
}

pub struct BitReader<'a> {
    bits: &'a BitSlice<u8, Msb0>,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a BitSlice<u8, Msb0>) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn uint(&mut self, width: usize) -> Result<u64> {
        if self.pos + width > self.bits.len() {
            return Err(Error::domain(format!(
                "payload of {} bits too short for a {width}-bit field at offset {}",
                self.bits.len(),
                self.pos
            )));
        }
        let v = if width == 0 {
            0
        } else {
            self.bits[self.pos..self.pos + width].load_be::<u64>()
        };
        self.pos += width;
        Ok(v)
    }

    pub fn flag(&mut self) -> Result<bool> {
        Ok(self.uint(1)? == 1)
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

/// Packs bits into bytes, zero-padding the final byte.
pub(crate) fn to_bytes(bits: &BitSlice<u8, Msb0>) -> Vec<u8> {
    bits.chunks(8)
        .map(|c| (c.load_be::<u8>()) << (8 - c.len()))
        .collect()
}
