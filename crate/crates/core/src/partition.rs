//! Families of bipartitions: every balanced subset, contiguous blocks, fixed
//! subset sizes, or an explicit list. Families are generated lazily in a
//! fixed order.

use serde::Serialize;

use crate::error::{contract, Result};
use crate::state::{full_mask, Bipartition, MAX_QUBITS};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// All subsets of size `⌊n/2⌋`. For even `n` a subset and its complement
    /// both appear.
    Balanced,
    /// Blocks of consecutive sites of length `1..=max_len`.
    Contiguous { max_len: usize },
    /// All subsets of exactly `size` sites.
    FixedSize { size: usize },
    Explicit { masks: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionFamily {
    n: usize,
    #[serde(flatten)]
    kind: FamilyKind,
}

fn check_n(n: usize) -> Result<()> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return Err(contract(format!("chain length {n} outside [2, {MAX_QUBITS}]")));
    }
    Ok(())
}

pub fn balanced_bipartitions(n: usize) -> Result<PartitionFamily> {
    check_n(n)?;
    Ok(PartitionFamily { n, kind: FamilyKind::Balanced })
}

pub fn contiguous_blocks(n: usize, max_len: usize) -> Result<PartitionFamily> {
    check_n(n)?;
    if max_len < 1 || max_len > n / 2 {
        return Err(contract(format!(
            "block length {max_len} outside [1, {}]",
            n / 2
        )));
    }
    Ok(PartitionFamily { n, kind: FamilyKind::Contiguous { max_len } })
}

pub fn fixed_size(n: usize, size: usize) -> Result<PartitionFamily> {
    check_n(n)?;
    if size < 1 || size >= n {
        return Err(contract(format!("subset size {size} outside [1, {}]", n - 1)));
    }
    Ok(PartitionFamily { n, kind: FamilyKind::FixedSize { size } })
}

pub fn explicit(n: usize, masks: Vec<usize>) -> Result<PartitionFamily> {
    check_n(n)?;
    for &m in &masks {
        Bipartition::new(n, m)?;
    }
    Ok(PartitionFamily { n, kind: FamilyKind::Explicit { masks } })
}

/// `C(n, k)` in exact integer arithmetic.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

impl PartitionFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn len(&self) -> usize {
        match &self.kind {
            FamilyKind::Balanced => binomial(self.n, self.n / 2) as usize,
            FamilyKind::FixedSize { size } => binomial(self.n, *size) as usize,
            FamilyKind::Contiguous { max_len } => (1..=*max_len).map(|l| self.n - l + 1).sum(),
            FamilyKind::Explicit { masks } => masks.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Members in their fixed order.
    pub fn iter(&self) -> FamilyIter<'_> {
        let inner = match &self.kind {
            FamilyKind::Balanced => Inner::Subsets(SubsetIter::new(self.n, self.n / 2)),
            FamilyKind::FixedSize { size } => Inner::Subsets(SubsetIter::new(self.n, *size)),
            FamilyKind::Contiguous { max_len } => Inner::Blocks { len: 1, start: 0, max_len: *max_len },
            FamilyKind::Explicit { masks } => Inner::List(masks.iter()),
        };
        FamilyIter { n: self.n, inner }
    }

    /// Consecutive runs of at most `size` members, for chunked parallel work.
    pub fn chunks(&self, size: usize) -> impl Iterator<Item = Vec<Bipartition>> + '_ {
        let size = size.max(1);
        let mut it = self.iter();
        std::iter::from_fn(move || {
            let chunk: Vec<_> = it.by_ref().take(size).collect();
            (!chunk.is_empty()).then_some(chunk)
        })
    }
}

/// Masks with a fixed popcount in ascending numeric order (Gosper's hack).
#[derive(Clone, Debug)]
struct SubsetIter {
    next: Option<usize>,
    limit: usize,
}

impl SubsetIter {
    fn new(n: usize, k: usize) -> Self {
        let first = if k == 0 || k > n { None } else { Some((1usize << k) - 1) };
        Self { next: first, limit: 1usize << n }
    }
}

impl Iterator for SubsetIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let cur = self.next?;
        let low = cur & cur.wrapping_neg();
        let ripple = cur + low;
        let succ = (((ripple ^ cur) >> 2) / low) | ripple;
        self.next = (succ < self.limit).then_some(succ);
        Some(cur)
    }
}

enum Inner<'a> {
    Subsets(SubsetIter),
    Blocks { len: usize, start: usize, max_len: usize },
    List(std::slice::Iter<'a, usize>),
}

pub struct FamilyIter<'a> {
    n: usize,
    inner: Inner<'a>,
}

impl Iterator for FamilyIter<'_> {
    type Item = Bipartition;

    fn next(&mut self) -> Option<Bipartition> {
        let mask = match &mut self.inner {
            Inner::Subsets(it) => it.next()?,
            Inner::Blocks { len, start, max_len } => {
                if *len > *max_len {
                    return None;
                }
                let mask = full_mask(*len) << *start;
                if *start + *len < self.n {
                    *start += 1;
                } else {
                    *len += 1;
                    *start = 0;
                }
                mask
            }
            Inner::List(it) => *it.next()?,
        };
        // Members were validated at construction.
        Some(Bipartition::new(self.n, mask).expect("valid family member"))
    }
}
