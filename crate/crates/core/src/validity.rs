//! Fixed-length validity bitstrings.
//!
//! Bit 0 is the leftmost character of the printed form and stands for
//! version 1; bit `i` stands for version `i + 1`. `"111"` means a quad is
//! present in all of three versions, `"010"` in version 2 only.

use std::fmt;

/// A bitstring over the dataset's versions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Validity {
    len: usize,
    // Bit i lives in blocks[i / 64] at bit position (i % 64), LSB-first.
    // Bits at positions >= len are always zero.
    blocks: Vec<u64>,
}

impl Validity {
    /// All-zero bitstring of the given length.
    pub fn zeros(len: usize) -> Self {
        Validity { len, blocks: vec![0; len.div_ceil(64)] }
    }

    /// Parses a string of '0'/'1' characters, leftmost character first.
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut v = Validity::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i),
                other => return Err(format!("invalid validity character '{other}'")),
            }
        }
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sets the bit for position `i` (0-based, version `i + 1`).
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.blocks[i / 64] |= 1u64 << (i % 64);
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        self.blocks[i / 64] >> (i % 64) & 1 == 1
    }

    /// Appends a zero bit on the right, growing the length by one.
    pub fn push_zero(&mut self) {
        self.len += 1;
        if self.blocks.len() * 64 < self.len {
            self.blocks.push(0);
        }
    }

    /// Bitwise AND of two bitstrings of identical length.
    pub fn and(&self, other: &Validity) -> Validity {
        assert_eq!(self.len, other.len, "validity length mismatch");
        Validity {
            len: self.len,
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn popcount(&self) -> u32 {
        self.blocks.iter().map(|b| b.count_ones()).sum()
    }

    pub fn any(&self) -> bool {
        self.blocks.iter().any(|&b| b != 0)
    }

    /// 1-based version indexes of the set bits, ascending.
    pub fn versions(&self) -> Vec<u32> {
        (0..self.len).filter(|&i| self.get(i)).map(|i| i as u32 + 1).collect()
    }
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn print_and_parse() {
        let v = Validity::parse("010").unwrap();
        assert!(!v.get(0) && v.get(1) && !v.get(2));
        assert_eq!(v.to_string(), "010");
        assert_eq!(v.versions(), vec![2]);
        assert!(Validity::parse("01x").is_err());
    }

    #[test]
    fn push_zero_extends_on_the_right() {
        let mut v = Validity::parse("11").unwrap();
        v.push_zero();
        assert_eq!(v.to_string(), "110");
        assert_eq!(v.popcount(), 2);
    }

    #[test]
    fn and_matches_table_semantics() {
        let a = Validity::parse("111").unwrap();
        let b = Validity::parse("011").unwrap();
        assert_eq!(a.and(&b).to_string(), "011");
    }

    #[test]
    fn long_bitstrings_cross_block_boundary() {
        let mut v = Validity::zeros(130);
        v.set(0);
        v.set(64);
        v.set(129);
        assert_eq!(v.popcount(), 3);
        assert_eq!(v.versions(), vec![1, 65, 130]);
        assert_eq!(Validity::parse(&v.to_string()).unwrap(), v);
    }

    proptest! {
        #[test]
        fn and_is_bitwise(bits_a in proptest::collection::vec(any::<bool>(), 0..100),
                          bits_b in proptest::collection::vec(any::<bool>(), 0..100)) {
            let n = bits_a.len().min(bits_b.len());
            let mut a = Validity::zeros(n);
            let mut b = Validity::zeros(n);
            for i in 0..n {
                if bits_a[i] { a.set(i); }
                if bits_b[i] { b.set(i); }
            }
            let c = a.and(&b);
            for i in 0..n {
                prop_assert_eq!(c.get(i), bits_a[i] && bits_b[i]);
            }
            prop_assert_eq!(c.popcount() as usize,
                            (0..n).filter(|&i| bits_a[i] && bits_b[i]).count());
        }

        #[test]
        fn display_parse_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
            let mut v = Validity::zeros(bits.len());
            for (i, &b) in bits.iter().enumerate() {
                if b { v.set(i); }
            }
            prop_assert_eq!(Validity::parse(&v.to_string()).unwrap(), v);
        }
    }
}
