//! Ground label sets and the small permutation algebra everything else runs on.
//!
//! A [`LabelSet`] is a finite ordered set of opaque labels; its order is the
//! tie-breaker for every deterministic choice downstream. Subsets are bitmask
//! [`Subset`]s over label indices, bijections are [`Perm`]s, and partially
//! defined bijections (defined on a subset of the ground set) are
//! [`PartialBij`]s. Composition is right-to-left throughout: `f.after(g)`
//! applies `g` first.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest supported ground-set size. Subsets are `u16` bitmasks.
pub const MAX_GROUND: usize = 16;

/// A finite ordered set of distinct labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelSet {
    labels: Vec<String>,
}

impl LabelSet {
    /// Builds a label set from distinct labels, keeping the given order.
    pub fn new<I, S>(labels: I) -> Result<Self, LabelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() > MAX_GROUND {
            return Err(LabelError::TooLarge(labels.len()));
        }
        for (i, a) in labels.iter().enumerate() {
            for b in labels.iter().skip(i + 1) {
                if a == b {
                    return Err(LabelError::Duplicate(a.clone()));
                }
            }
        }
        Ok(Self { labels })
    }

    /// The labels `"1"`, `"2"`, ..., `"k"`.
    pub fn numeric(k: usize) -> Self {
        Self::new((1..=k).map(|i| i.to_string())).expect("numeric labels are distinct")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// The full ground set as a subset mask.
    pub fn full(&self) -> Subset {
        Subset::full(self.len())
    }

    /// Renders a subset in the canonical `{a,b,c}` form.
    pub fn show(&self, s: Subset) -> String {
        let mut out = String::from("{");
        for (k, i) in s.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            out.push_str(&self.labels[i]);
        }
        out.push('}');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabelError {
    #[error("label set has {0} elements, more than the supported {MAX_GROUND}")]
    TooLarge(usize),
    #[error("duplicate label {0:?}")]
    Duplicate(String),
}

/// A subset of a [`LabelSet`], stored as a bitmask over label indices.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Subset(pub u16);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn full(k: usize) -> Self {
        debug_assert!(k <= MAX_GROUND);
        Subset(if k == 16 { u16::MAX } else { (1u16 << k) - 1 })
    }

    pub fn singleton(i: usize) -> Self {
        Subset(1 << i)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut mask = 0u16;
        for i in iter {
            debug_assert!(i < MAX_GROUND);
            mask |= 1 << i;
        }
        Subset(mask)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn intersect(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn minus(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Subset) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    /// Ascending label indices.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..MAX_GROUND).filter(move |i| mask & (1 << i) != 0)
    }

    /// The only element of a singleton subset.
    pub fn sole(self) -> Option<usize> {
        if self.len() == 1 {
            Some(self.0.trailing_zeros() as usize)
        } else {
            None
        }
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i)?;
        }
        write!(f, "}}")
    }
}

/// Enumerates all `n`-element subsets of `{0..k}` in lexicographic order of
/// their ascending index tuples. This is the canonical vertex order of a
/// Kneser complex.
pub fn n_subsets(k: usize, n: usize) -> Vec<Subset> {
    fn rec(start: usize, k: usize, left: usize, cur: u16, out: &mut Vec<Subset>) {
        if left == 0 {
            out.push(Subset(cur));
            return;
        }
        for i in start..k {
            if k - i < left {
                break;
            }
            rec(i + 1, k, left - 1, cur | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if n <= k {
        rec(0, k, n, 0, &mut out);
    }
    out
}

/// A total bijection of `{0..k}`, i.e. an element of `Sym(Δ)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm {
    map: Vec<u8>,
}

impl Perm {
    pub fn identity(k: usize) -> Self {
        Perm {
            map: (0..k as u8).collect(),
        }
    }

    /// Builds a permutation from images; `images[i]` is the image of `i`.
    pub fn from_images(images: &[usize]) -> Option<Self> {
        let k = images.len();
        let mut seen = vec![false; k];
        let mut map = Vec::with_capacity(k);
        for &v in images {
            if v >= k || seen[v] {
                return None;
            }
            seen[v] = true;
            map.push(v as u8);
        }
        Some(Perm { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i] as usize
    }

    pub fn images(&self) -> impl Iterator<Item = usize> + '_ {
        self.map.iter().map(|&v| v as usize)
    }

    /// `self ∘ g`: applies `g` first.
    pub fn after(&self, g: &Perm) -> Perm {
        debug_assert_eq!(self.len(), g.len());
        Perm {
            map: g.map.iter().map(|&i| self.map[i as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut map = vec![0u8; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            map[v as usize] = i as u8;
        }
        Perm { map }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i as u8 == v)
    }

    pub fn image_of(&self, s: Subset) -> Subset {
        Subset::from_indices(s.iter().map(|i| self.apply(i)))
    }

    /// All `k!` permutations in lexicographic image order.
    pub fn all(k: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(k);
        let mut used = vec![false; k];
        fn rec(k: usize, cur: &mut Vec<u8>, used: &mut [bool], out: &mut Vec<Perm>) {
            if cur.len() == k {
                out.push(Perm { map: cur.clone() });
                return;
            }
            for v in 0..k {
                if !used[v] {
                    used[v] = true;
                    cur.push(v as u8);
                    rec(k, cur, used, out);
                    cur.pop();
                    used[v] = false;
                }
            }
        }
        rec(k, &mut cur, &mut used, &mut out);
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", v)?;
        }
        write!(f, "]")
    }
}

/// A bijection between two subsets of the ground set, stored by images.
///
/// The maps `φ*` of a pre-Δ-category and the parallel transports `ψ` are of
/// this shape: defined on `Δ − Λ` rather than all of `Δ`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialBij {
    ground: usize,
    map: Vec<Option<u8>>,
}

impl PartialBij {
    pub fn empty(ground: usize) -> Self {
        PartialBij {
            ground,
            map: vec![None; ground],
        }
    }

    pub fn identity_on(ground: usize, dom: Subset) -> Self {
        let mut b = Self::empty(ground);
        for i in dom.iter() {
            b.map[i] = Some(i as u8);
        }
        b
    }

    /// Builds from explicit pairs, rejecting collisions.
    pub fn from_pairs(ground: usize, pairs: &[(usize, usize)]) -> Option<Self> {
        let mut b = Self::empty(ground);
        let mut hit = Subset::EMPTY;
        for &(i, v) in pairs {
            if i >= ground || v >= ground || b.map[i].is_some() || hit.contains(v) {
                return None;
            }
            b.map[i] = Some(v as u8);
            hit = hit.union(Subset::singleton(v));
        }
        Some(b)
    }

    /// The order-preserving bijection between two equinumerous subsets.
    pub fn order_preserving(ground: usize, dom: Subset, img: Subset) -> Option<Self> {
        if dom.len() != img.len() {
            return None;
        }
        let pairs: Vec<(usize, usize)> = dom.iter().zip(img.iter()).collect();
        Self::from_pairs(ground, &pairs)
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn domain(&self) -> Subset {
        Subset::from_indices((0..self.ground).filter(|&i| self.map[i].is_some()))
    }

    pub fn image(&self) -> Subset {
        Subset::from_indices(self.map.iter().filter_map(|v| v.map(|x| x as usize)))
    }

    pub fn apply(&self, i: usize) -> Option<usize> {
        self.map.get(i).copied().flatten().map(|v| v as usize)
    }

    pub fn image_of(&self, s: Subset) -> Option<Subset> {
        let mut out = Subset::EMPTY;
        for i in s.iter() {
            out = out.union(Subset::singleton(self.apply(i)?));
        }
        Some(out)
    }

    /// `self ∘ g` on the composable part: defined where `g` is defined and
    /// lands in the domain of `self`.
    pub fn after(&self, g: &PartialBij) -> PartialBij {
        debug_assert_eq!(self.ground, g.ground);
        let mut out = Self::empty(self.ground);
        for i in 0..self.ground {
            if let Some(mid) = g.apply(i) {
                if let Some(v) = self.apply(mid) {
                    out.map[i] = Some(v as u8);
                }
            }
        }
        out
    }

    pub fn inverse(&self) -> PartialBij {
        let mut out = Self::empty(self.ground);
        for i in 0..self.ground {
            if let Some(v) = self.apply(i) {
                out.map[v] = Some(i as u8);
            }
        }
        out
    }

    pub fn restrict(&self, dom: Subset) -> PartialBij {
        let mut out = Self::empty(self.ground);
        for i in dom.iter() {
            if let Some(v) = self.apply(i) {
                out.map[i] = Some(v as u8);
            }
        }
        out
    }

    /// Union of two maps with disjoint domains and images.
    pub fn disjoint_union(&self, other: &PartialBij) -> Option<PartialBij> {
        debug_assert_eq!(self.ground, other.ground);
        if !self.domain().is_disjoint(other.domain()) || !self.image().is_disjoint(other.image()) {
            return None;
        }
        let mut out = self.clone();
        for i in other.domain().iter() {
            out.map[i] = other.map[i];
        }
        Some(out)
    }

    /// Promotes to a total permutation when defined on the full ground set.
    pub fn to_perm(&self) -> Option<Perm> {
        if self.domain() != Subset::full(self.ground) {
            return None;
        }
        Perm::from_images(&(0..self.ground).map(|i| self.apply(i).unwrap()).collect::<Vec<_>>())
    }

    pub fn is_identity_on_domain(&self) -> bool {
        (0..self.ground).all(|i| match self.apply(i) {
            Some(v) => v == i,
            None => true,
        })
    }
}

impl fmt::Debug for PartialBij {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        let mut first = true;
        for i in 0..self.ground {
            if let Some(v) = self.apply(i) {
                if !first {
                    write!(f, ", ")?;
                }
                write!(f, "{}->{}", i, v)?;
                first = false;
            }
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_subsets_canonical_order() {
        let s = n_subsets(4, 2);
        let expect: Vec<Subset> = vec![
            Subset::from_indices([0, 1]),
            Subset::from_indices([0, 2]),
            Subset::from_indices([0, 3]),
            Subset::from_indices([1, 2]),
            Subset::from_indices([1, 3]),
            Subset::from_indices([2, 3]),
        ];
        assert_eq!(s, expect);
        assert_eq!(n_subsets(5, 2).len(), 10);
        assert_eq!(n_subsets(3, 5).len(), 0);
        assert_eq!(n_subsets(3, 0), vec![Subset::EMPTY]);
    }

    #[test]
    fn perm_algebra() {
        let p = Perm::from_images(&[1, 2, 0]).unwrap();
        let q = Perm::from_images(&[0, 2, 1]).unwrap();
        // (p ∘ q)(1) = p(2) = 0
        assert_eq!(p.after(&q).apply(1), 0);
        assert!(p.after(&p.inverse()).is_identity());
        assert_eq!(Perm::all(3).len(), 6);
        assert!(Perm::from_images(&[0, 0, 1]).is_none());
    }

    #[test]
    fn partial_bij_composition_restricts_domains() {
        let g = 4;
        let a = PartialBij::from_pairs(g, &[(0, 1), (2, 3)]).unwrap();
        let b = PartialBij::from_pairs(g, &[(1, 2), (3, 0)]).unwrap();
        let c = b.after(&a);
        assert_eq!(c.apply(0), Some(2));
        assert_eq!(c.apply(2), Some(0));
        assert_eq!(c.apply(1), None);
        assert_eq!(a.inverse().apply(1), Some(0));
    }

    #[test]
    fn order_preserving_map() {
        let dom = Subset::from_indices([1, 3]);
        let img = Subset::from_indices([0, 2]);
        let b = PartialBij::order_preserving(4, dom, img).unwrap();
        assert_eq!(b.apply(1), Some(0));
        assert_eq!(b.apply(3), Some(2));
    }

    #[test]
    fn duplicate_labels_rejected() {
        assert!(LabelSet::new(["a", "b", "a"]).is_err());
        assert_eq!(LabelSet::numeric(5).len(), 5);
    }
}
