//! Storage for one index set per node, in two layouts.
//!
//! `SortedSets` keeps a sorted `Vec<u32>` per node and is cheap when the
//! selected index range is small. `BitSets` keeps a fixed-width bit row per
//! node; its unions cost `universe / 64` words regardless of set size.

use super::IndexSet;

pub(crate) trait SetStore: Sized {
    fn new(count: usize, universe: usize) -> Self;
    fn insert(&mut self, k: usize, e: usize);
    /// `sets[dst] |= sets[src]`.
    fn union_into(&mut self, dst: usize, src: usize);
    /// `self[dst] |= other[src]`.
    fn union_from(&mut self, dst: usize, other: &Self, src: usize);
    fn is_empty(&self, k: usize) -> bool;
    fn for_each(&self, k: usize, f: impl FnMut(usize));
    fn len_of(&self, k: usize) -> usize;

    fn to_index_set(&self, k: usize) -> IndexSet {
        let mut out = Vec::with_capacity(self.len_of(k));
        self.for_each(k, |e| out.push(e as u32));
        IndexSet::from_sorted_unchecked(out)
    }
}

pub(crate) struct SortedSets {
    sets: Vec<Vec<u32>>,
}

fn merge_into(dst: &mut Vec<u32>, src: &[u32]) {
    if src.is_empty() {
        return;
    }
    if dst.is_empty() {
        dst.extend_from_slice(src);
        return;
    }
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut i, mut j) = (0, 0);
    while i < dst.len() && j < src.len() {
        match dst[i].cmp(&src[j]) {
            std::cmp::Ordering::Less => {
                out.push(dst[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(src[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(dst[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&dst[i..]);
    out.extend_from_slice(&src[j..]);
    *dst = out;
}

impl SetStore for SortedSets {
    fn new(count: usize, _universe: usize) -> Self {
        SortedSets {
            sets: vec![Vec::new(); count],
        }
    }

    fn insert(&mut self, k: usize, e: usize) {
        let set = &mut self.sets[k];
        if let Err(pos) = set.binary_search(&(e as u32)) {
            set.insert(pos, e as u32);
        }
    }

    fn union_into(&mut self, dst: usize, src: usize) {
        if dst == src {
            return;
        }
        let mut target = std::mem::take(&mut self.sets[dst]);
        merge_into(&mut target, &self.sets[src]);
        self.sets[dst] = target;
    }

    fn union_from(&mut self, dst: usize, other: &Self, src: usize) {
        merge_into(&mut self.sets[dst], &other.sets[src]);
    }

    fn is_empty(&self, k: usize) -> bool {
        self.sets[k].is_empty()
    }

    fn for_each(&self, k: usize, mut f: impl FnMut(usize)) {
        for &e in &self.sets[k] {
            f(e as usize);
        }
    }

    fn len_of(&self, k: usize) -> usize {
        self.sets[k].len()
    }
}

pub(crate) struct BitSets {
    words: usize,
    bits: Vec<u64>,
}

impl BitSets {
    #[inline]
    fn row(&self, k: usize) -> &[u64] {
        &self.bits[k * self.words..(k + 1) * self.words]
    }
}

impl SetStore for BitSets {
    fn new(count: usize, universe: usize) -> Self {
        let words = universe.div_ceil(64).max(1);
        BitSets {
            words,
            bits: vec![0; count * words],
        }
    }

    fn insert(&mut self, k: usize, e: usize) {
        self.bits[k * self.words + e / 64] |= 1 << (e % 64);
    }

    fn union_into(&mut self, dst: usize, src: usize) {
        if dst == src {
            return;
        }
        let w = self.words;
        let (d, s) = if dst < src {
            let (lo, hi) = self.bits.split_at_mut(src * w);
            (&mut lo[dst * w..(dst + 1) * w], &hi[..w])
        } else {
            let (lo, hi) = self.bits.split_at_mut(dst * w);
            (&mut hi[..w], &lo[src * w..(src + 1) * w])
        };
        for (x, y) in d.iter_mut().zip(s) {
            *x |= *y;
        }
    }

    fn union_from(&mut self, dst: usize, other: &Self, src: usize) {
        let w = self.words;
        for (x, y) in self.bits[dst * w..(dst + 1) * w]
            .iter_mut()
            .zip(other.row(src))
        {
            *x |= *y;
        }
    }

    fn is_empty(&self, k: usize) -> bool {
        self.row(k).iter().all(|&w| w == 0)
    }

    fn for_each(&self, k: usize, mut f: impl FnMut(usize)) {
        for (wi, &word) in self.row(k).iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let bit = w.trailing_zeros() as usize;
                f(wi * 64 + bit);
                w &= w - 1;
            }
        }
    }

    fn len_of(&self, k: usize) -> usize {
        self.row(k).iter().map(|w| w.count_ones() as usize).sum()
    }
}
