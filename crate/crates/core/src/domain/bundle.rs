use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard upper bound on items; bundles are bitmasks in a `u32`.
pub const MAX_ITEMS: usize = 16;

/// A set of items drawn from `G = {0, .., m-1}`, stored as a bitmask.
///
/// Items print as letters (`A` is item 0). The ordering of bundles used for
/// tie-breaking is [`Bundle::tie_order`]: fewer items first, then the
/// lexicographically smallest item list.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bundle {
    mask: u32,
    m: u8,
}

impl Bundle {
    pub fn empty(m: usize) -> Self {
        assert!(m <= MAX_ITEMS, "m = {m} exceeds MAX_ITEMS");
        Bundle { mask: 0, m: m as u8 }
    }

    pub fn grand(m: usize) -> Self {
        Bundle::from_mask(m, full_mask(m))
    }

    pub fn singleton(m: usize, item: usize) -> Self {
        assert!(item < m, "item {item} out of range for m = {m}");
        Bundle::from_mask(m, 1 << item)
    }

    /// Panics if `mask` has bits outside `G`.
    pub fn from_mask(m: usize, mask: u32) -> Self {
        assert!(m <= MAX_ITEMS, "m = {m} exceeds MAX_ITEMS");
        assert!(mask & !full_mask(m) == 0, "mask {mask:#b} outside m = {m}");
        Bundle { mask, m: m as u8 }
    }

    pub fn from_items(m: usize, items: impl IntoIterator<Item = usize>) -> Result<Self> {
        if m > MAX_ITEMS {
            return Err(Error::CapExceeded {
                what: "m",
                value: m,
                cap: MAX_ITEMS,
            });
        }
        let mut mask = 0u32;
        for item in items {
            if item >= m {
                return Err(Error::ItemOutOfRange { item, m });
            }
            mask |= 1 << item;
        }
        Ok(Bundle { mask, m: m as u8 })
    }

    /// Parses item letters, e.g. `"AB"`, `"{A,B}"`, `"A,C"`; `""` and `"{}"`
    /// are the empty bundle.
    pub fn parse(m: usize, text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for ch in text.chars() {
            match ch {
                '{' | '}' | ',' | ' ' => {}
                '∅' => {}
                c if c.is_ascii_uppercase() => items.push((c as u8 - b'A') as usize),
                c => {
                    return Err(Error::ParseBundle {
                        text: text.to_string(),
                        reason: format!("unexpected character {c:?}"),
                    })
                }
            }
        }
        Bundle::from_items(m, items).map_err(|e| Error::ParseBundle {
            text: text.to_string(),
            reason: e.to_string(),
        })
    }

    pub fn mask(self) -> u32 {
        self.mask
    }

    pub fn m(self) -> usize {
        self.m as usize
    }

    pub fn len(self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.mask == 0
    }

    pub fn contains(self, item: usize) -> bool {
        item < self.m() && self.mask & (1 << item) != 0
    }

    pub fn items(self) -> impl Iterator<Item = usize> {
        let mask = self.mask;
        (0..self.m()).filter(move |i| mask & (1 << i) != 0)
    }

    pub fn is_subset(self, other: Bundle) -> bool {
        self.mask & !other.mask == 0
    }

    pub fn is_disjoint(self, other: Bundle) -> bool {
        self.mask & other.mask == 0
    }

    fn check_same(self, other: Bundle) -> Result<()> {
        if self.m != other.m {
            return Err(Error::MismatchedItems {
                expected: self.m(),
                found: other.m(),
            });
        }
        Ok(())
    }

    pub fn union(self, other: Bundle) -> Result<Bundle> {
        self.check_same(other)?;
        Ok(Bundle::from_mask(self.m(), self.mask | other.mask))
    }

    pub fn intersection(self, other: Bundle) -> Result<Bundle> {
        self.check_same(other)?;
        Ok(Bundle::from_mask(self.m(), self.mask & other.mask))
    }

    pub fn difference(self, other: Bundle) -> Result<Bundle> {
        self.check_same(other)?;
        Ok(Bundle::from_mask(self.m(), self.mask & !other.mask))
    }

    /// `G \ self`.
    pub fn complement(self) -> Bundle {
        Bundle::from_mask(self.m(), full_mask(self.m()) & !self.mask)
    }

    pub fn with_item(self, item: usize) -> Bundle {
        Bundle::from_mask(self.m(), self.mask | (1 << item))
    }

    /// All `2^m` bundles in mask order; `∅` first, `G` last.
    pub fn all(m: usize) -> impl Iterator<Item = Bundle> {
        (0..=full_mask(m)).map(move |mask| Bundle::from_mask(m, mask))
    }

    /// Every subset of `self`, `∅` first.
    pub fn subsets(self) -> impl Iterator<Item = Bundle> {
        let m = self.m();
        let full = self.mask;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(Bundle::from_mask(m, cur))
        })
    }

    /// Sort key for tie-breaking: size, then item list lexicographically.
    pub fn tie_order(self) -> (usize, Vec<usize>) {
        (self.len(), self.items().collect())
    }

    pub fn label(self) -> String {
        self.items().map(item_label).collect()
    }
}

pub fn full_mask(m: usize) -> u32 {
    if m >= 32 {
        u32::MAX
    } else {
        (1u32 << m) - 1
    }
}

pub fn item_label(item: usize) -> char {
    (b'A' + item as u8) as char
}

/// `all_subsets(m)` as a vector, for callers that want an owned sequence.
pub fn all_subsets(m: usize) -> Vec<Bundle> {
    Bundle::all(m).collect()
}

impl fmt::Display for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.items().map(|i| item_label(i).to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

impl fmt::Debug for Bundle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[derive(Serialize, Deserialize)]
struct BundleDoc {
    m: usize,
    items: String,
}

impl Serialize for Bundle {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        BundleDoc {
            m: self.m(),
            items: self.label(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = BundleDoc::deserialize(deserializer)?;
        Bundle::parse(doc.m, &doc.items).map_err(serde::de::Error::custom)
    }
}
