use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Fixed-length bit array.
///
/// Index filters hold a few thousand set bits out of tens of millions, so
/// the array starts as a sorted position list and switches to packed words
/// once the list would outgrow them (more than `len / 32` set bits).
/// Equality is on the logical bit content.
#[derive(Clone, Debug)]
pub struct BitArray {
    len: u32,
    repr: Repr,
}

#[derive(Clone, Debug)]
enum Repr {
    Sparse(Vec<u32>),
    Dense { words: Vec<u64>, ones: usize },
}

impl BitArray {
    pub fn new(len: u32) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter("bit array length must be positive"));
        }
        Ok(Self { len, repr: Repr::Sparse(Vec::new()) })
    }

    /// Starts in packed form; suited to filters that will be filled heavily.
    pub fn new_dense(len: u32) -> Result<Self> {
        let mut b = Self::new(len)?;
        b.densify();
        Ok(b)
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.count_ones() == 0
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.repr, Repr::Dense { .. })
    }

    pub fn count_ones(&self) -> usize {
        match &self.repr {
            Repr::Sparse(p) => p.len(),
            Repr::Dense { ones, .. } => *ones,
        }
    }

    fn check(&self, pos: u32) {
        assert!(pos < self.len, "bit {pos} out of range for length {}", self.len);
    }

    pub fn get(&self, pos: u32) -> bool {
        if pos >= self.len {
            return false;
        }
        match &self.repr {
            Repr::Sparse(p) => p.binary_search(&pos).is_ok(),
            Repr::Dense { words, .. } => words[(pos / 64) as usize] >> (pos % 64) & 1 == 1,
        }
    }

    /// Sets one bit; returns whether it was previously clear.
    pub fn set(&mut self, pos: u32) -> bool {
        self.check(pos);
        let fresh = match &mut self.repr {
            Repr::Sparse(p) => match p.binary_search(&pos) {
                Ok(_) => false,
                Err(at) => {
                    p.insert(at, pos);
                    true
                }
            },
            Repr::Dense { words, ones } => set_word_bit(words, ones, pos),
        };
        self.maybe_densify();
        fresh
    }

    /// Bulk insertion; `O(k log k)` for `k` new positions while sparse.
    pub fn extend<I: IntoIterator<Item = u32>>(&mut self, positions: I) {
        let mut iter = positions.into_iter();
        loop {
            match &mut self.repr {
                Repr::Sparse(p) => {
                    let before = p.len();
                    let budget = (self.len / 32) as usize + 1;
                    p.extend(iter.by_ref().take(budget.saturating_sub(before).max(1024)));
                    if p.len() == before {
                        return;
                    }
                    if let Some(&bad) = p[before..].iter().find(|&&x| x >= self.len) {
                        panic!("bit {bad} out of range for length {}", self.len);
                    }
                    p.sort_unstable();
                    p.dedup();
                    self.maybe_densify();
                }
                Repr::Dense { words, ones } => {
                    for pos in iter.by_ref() {
                        assert!(pos < self.len, "bit {pos} out of range for length {}", self.len);
                        set_word_bit(words, ones, pos);
                    }
                    return;
                }
            }
        }
    }

    fn maybe_densify(&mut self) {
        if let Repr::Sparse(p) = &self.repr {
            if p.len() > (self.len / 32) as usize {
                self.densify();
            }
        }
    }

    fn densify(&mut self) {
        if let Repr::Sparse(p) = &self.repr {
            let mut words = alloc::vec![0u64; self.len.div_ceil(64) as usize];
            for &pos in p {
                words[(pos / 64) as usize] |= 1 << (pos % 64);
            }
            self.repr = Repr::Dense { words, ones: p.len() };
        }
    }

    pub fn ones(&self) -> Ones<'_> {
        match &self.repr {
            Repr::Sparse(p) => Ones::Sparse(p.iter()),
            Repr::Dense { words, .. } => Ones::Dense { words, word: 0, cur: words.first().copied().unwrap_or(0) },
        }
    }

    fn same_len(&self, other: &Self) -> Result<()> {
        if self.len == other.len {
            Ok(())
        } else {
            Err(Error::LengthMismatch { left: self.len.into(), right: other.len.into() })
        }
    }

    /// `popcount(self AND other)`.
    pub fn and_count(&self, other: &Self) -> Result<usize> {
        self.same_len(other)?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => sorted_intersection_len(a, b),
            (Repr::Sparse(a), Repr::Dense { .. }) => a.iter().filter(|&&p| other.get(p)).count(),
            (Repr::Dense { .. }, Repr::Sparse(b)) => b.iter().filter(|&&p| self.get(p)).count(),
            (Repr::Dense { words: a, .. }, Repr::Dense { words: b, .. }) => {
                a.iter().zip(b).map(|(x, y)| (x & y).count_ones() as usize).sum()
            }
        })
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_len(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Sparse(a), Repr::Sparse(b)) => Repr::Sparse(sorted_union(a, b)),
            _ => {
                let mut out = self.clone();
                out.densify();
                let Repr::Dense { words, ones } = &mut out.repr else { unreachable!() };
                match &other.repr {
                    Repr::Sparse(b) => {
                        for &p in b {
                            set_word_bit(words, ones, p);
                        }
                    }
                    Repr::Dense { words: b, .. } => {
                        for (w, x) in words.iter_mut().zip(b) {
                            *w |= x;
                        }
                        *ones = words.iter().map(|w| w.count_ones() as usize).sum();
                    }
                }
                out.repr
            }
        };
        let mut out = Self { len: self.len, repr };
        out.maybe_densify();
        Ok(out)
    }

    /// Every set bit of `self` is set in `other`.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.len == other.len && self.ones().all(|p| other.get(p))
    }

    /// Raw little-endian-bit packing: bit `i` lives at byte `i / 8`, bit `i % 8`.
    pub fn to_raw_bytes(&self) -> Vec<u8> {
        let mut out = alloc::vec![0u8; self.len.div_ceil(8) as usize];
        for p in self.ones() {
            out[(p / 8) as usize] |= 1 << (p % 8);
        }
        out
    }

    pub fn from_raw_bytes(len: u32, raw: &[u8]) -> Result<Self> {
        if raw.len() != len.div_ceil(8) as usize {
            return Err(Error::Decode("raw bit array has the wrong size"));
        }
        let mut out = Self::new(len)?;
        let mut positions = Vec::new();
        for (i, &byte) in raw.iter().enumerate() {
            let mut b = byte;
            while b != 0 {
                let bit = b.trailing_zeros();
                let pos = i as u32 * 8 + bit;
                if pos >= len {
                    return Err(Error::Decode("padding bits must be zero"));
                }
                positions.push(pos);
                b &= b - 1;
            }
        }
        out.extend(positions);
        Ok(out)
    }

    /// Builds from strictly increasing positions.
    pub fn from_sorted_positions(len: u32, positions: &[u32]) -> Result<Self> {
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Decode("positions must be strictly increasing"));
        }
        if positions.last().is_some_and(|&p| p >= len) {
            return Err(Error::Decode("position out of range"));
        }
        let mut out = Self::new(len)?;
        out.extend(positions.iter().copied());
        Ok(out)
    }
}

impl PartialEq for BitArray {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.count_ones() == other.count_ones() && self.ones().eq(other.ones())
    }
}

impl Eq for BitArray {}

fn set_word_bit(words: &mut [u64], ones: &mut usize, pos: u32) -> bool {
    let w = &mut words[(pos / 64) as usize];
    let mask = 1u64 << (pos % 64);
    let fresh = *w & mask == 0;
    if fresh {
        *w |= mask;
        *ones += 1;
    }
    fresh
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn sorted_union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Ascending iterator over set positions.
pub enum Ones<'a> {
    Sparse(core::slice::Iter<'a, u32>),
    Dense { words: &'a [u64], word: usize, cur: u64 },
}

impl Iterator for Ones<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        match self {
            Ones::Sparse(it) => it.next().copied(),
            Ones::Dense { words, word, cur } => loop {
                if *cur != 0 {
                    let bit = cur.trailing_zeros();
                    *cur &= *cur - 1;
                    return Some(*word as u32 * 64 + bit);
                }
                *word += 1;
                if *word >= words.len() {
                    return None;
                }
                *cur = words[*word];
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_positions(len: u32, ps: &[u32]) -> BitArray {
        let mut b = BitArray::new(len).unwrap();
        b.extend(ps.iter().copied());
        b
    }

    #[test]
    fn switches_representation_past_threshold() {
        let mut b = BitArray::new(64 * 32).unwrap();
        for p in 0..64 {
            b.set(p * 3);
        }
        assert!(!b.is_dense());
        b.set(1);
        assert!(b.is_dense());
        assert_eq!(b.count_ones(), 65);
        assert!(b.get(1) && b.get(189) && !b.get(2));
    }

    #[test]
    fn raw_bytes_are_lsb_first() {
        let b = from_positions(10, &[0, 9]);
        assert_eq!(b.to_raw_bytes(), alloc::vec![0b0000_0001, 0b0000_0010]);
        assert_eq!(BitArray::from_raw_bytes(10, &[1, 2]).unwrap(), b);
        assert!(BitArray::from_raw_bytes(10, &[1, 0b100]).is_err());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let a = BitArray::new(8).unwrap();
        let b = BitArray::new(9).unwrap();
        assert!(a.union(&b).is_err());
        assert!(a.and_count(&b).is_err());
    }

    proptest! {
        #[test]
        fn sparse_and_dense_agree(len in 1u32..2000, ps in proptest::collection::vec(0u32..2000, 0..300), qs in proptest::collection::vec(0u32..2000, 0..300)) {
            let ps: Vec<u32> = ps.into_iter().filter(|&p| p < len).collect();
            let qs: Vec<u32> = qs.into_iter().filter(|&p| p < len).collect();
            let a = from_positions(len, &ps);
            let b = from_positions(len, &qs);
            let mut ad = BitArray::new_dense(len).unwrap();
            ad.extend(ps.iter().copied());
            let mut bd = BitArray::new_dense(len).unwrap();
            for &q in &qs { bd.set(q); }

            let expect_and = ps.iter().collect::<std::collections::BTreeSet<_>>()
                .intersection(&qs.iter().collect()).count();
            prop_assert_eq!(a.and_count(&b).unwrap(), expect_and);
            prop_assert_eq!(ad.and_count(&bd).unwrap(), expect_and);
            prop_assert_eq!(a.and_count(&bd).unwrap(), expect_and);
            prop_assert_eq!(ad.and_count(&b).unwrap(), expect_and);
            prop_assert_eq!(&a, &ad);
            let u = a.union(&b).unwrap();
            prop_assert_eq!(&u, &ad.union(&bd).unwrap());
            prop_assert_eq!(&u, &a.union(&bd).unwrap());
            prop_assert!(a.is_subset_of(&u) && b.is_subset_of(&u));
            prop_assert_eq!(BitArray::from_raw_bytes(len, &u.to_raw_bytes()).unwrap(), u.clone());
            let ones: Vec<u32> = u.ones().collect();
            prop_assert!(ones.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(ones.len(), u.count_ones());
        }
    }
}
