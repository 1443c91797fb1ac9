//! Subset calculus of the exterior algebra basis.
//!
//! A basis vector `e_I = e_{i_1} ∧ … ∧ e_{i_r}` with `i_1 < … < i_r` is
//! identified with the set `I ⊆ {1, …, n}`, stored as a bit mask where
//! element `b + 1` lives on bit `b`. Elements are 1-based throughout.

use std::fmt;

use crate::error::{domain, Error, Result};

/// Largest supported ambient dimension (masks are `u32`).
pub const MAX_DIM: usize = 24;

/// A subset of `{1, …, n}` labelling the basis vector `e_I`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex {
    mask: u32,
    n: u8,
}

/// A sign `±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// `(-1)^count`.
    pub fn parity(count: usize) -> Self {
        if count.is_multiple_of(2) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return domain(format!("dimension {n} outside 1..={MAX_DIM}"));
    }
    Ok(())
}

fn check_element(n: usize, e: usize) -> Result<()> {
    if e == 0 || e > n {
        return domain(format!("element {e} outside 1..={n}"));
    }
    Ok(())
}

impl MultiIndex {
    pub fn from_mask(n: usize, mask: u32) -> Result<Self> {
        check_dim(n)?;
        if (mask as u64) >> n != 0 {
            return domain(format!("mask {mask:#b} has bits beyond dimension {n}"));
        }
        Ok(Self { mask, n: n as u8 })
    }

    /// Builds the set from 1-based elements; order and duplicates are ignored.
    pub fn from_elements(n: usize, elements: &[usize]) -> Result<Self> {
        check_dim(n)?;
        let mut mask = 0u32;
        for &e in elements {
            check_element(n, e)?;
            mask |= 1 << (e - 1);
        }
        Ok(Self { mask, n: n as u8 })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::from_mask(n, 0)
    }

    pub fn full(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            mask: full_mask(n),
            n: n as u8,
        })
    }

    #[inline]
    pub fn mask(&self) -> u32 {
        self.mask
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn grade(&self) -> usize {
        self.mask.count_ones() as usize
    }

    #[inline]
    pub fn contains(&self, e: usize) -> bool {
        e >= 1 && e <= self.dim() && self.mask & (1 << (e - 1)) != 0
    }

    /// Elements in ascending order.
    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.dim()).filter(move |&e| self.contains(e))
    }

    /// Elements of `{1, …, n}` not in the set, ascending.
    pub fn complement_elements(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.dim()).filter(move |&e| !self.contains(e))
    }

    pub fn complement(&self) -> Self {
        Self {
            mask: !self.mask & full_mask(self.dim()),
            n: self.n,
        }
    }

    pub fn insert(&self, e: usize) -> Result<Self> {
        check_element(self.dim(), e)?;
        Ok(Self {
            mask: self.mask | (1 << (e - 1)),
            n: self.n,
        })
    }

    pub fn remove(&self, e: usize) -> Result<Self> {
        check_element(self.dim(), e)?;
        Ok(Self {
            mask: self.mask & !(1 << (e - 1)),
            n: self.n,
        })
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elements().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[inline]
pub(crate) fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

/// All `C(n, r)` subsets of grade `r` in ascending mask order.
pub fn enumerate_grade(n: usize, r: usize) -> Result<Vec<MultiIndex>> {
    check_dim(n)?;
    if r > n {
        return domain(format!("grade {r} outside 0..={n}"));
    }
    if r == 0 {
        return Ok(vec![MultiIndex {
            mask: 0,
            n: n as u8,
        }]);
    }
    let limit = 1u64 << n;
    let mut out = Vec::with_capacity(binomial(n, r));
    // Gosper's hack: next larger integer with the same popcount.
    let mut m: u64 = (1u64 << r) - 1;
    while m < limit {
        out.push(MultiIndex {
            mask: m as u32,
            n: n as u8,
        });
        let c = m & m.wrapping_neg();
        let rr = m + c;
        m = (((rr ^ m) >> 2) / c) | rr;
    }
    Ok(out)
}

/// All `2^n` subsets in ascending mask order.
pub fn enumerate_all(n: usize) -> Result<Vec<MultiIndex>> {
    check_dim(n)?;
    Ok((0..=full_mask(n))
        .map(|mask| MultiIndex { mask, n: n as u8 })
        .collect())
}

pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `#K(k, l)`: the number of elements of `K` strictly between `k` and `l`.
pub fn interval_count(set: &MultiIndex, k: usize, l: usize) -> Result<usize> {
    let n = set.dim();
    check_element(n, k)?;
    check_element(n, l)?;
    if k == l {
        return domain(format!("interval endpoints coincide ({k})"));
    }
    Ok(interval_count_mask(set.mask, k, l))
}

/// Unchecked mask version of [`interval_count`]; `k != l`, both 1-based.
#[inline]
pub(crate) fn interval_count_mask(mask: u32, k: usize, l: usize) -> usize {
    let (lo, hi) = if k < l { (k, l) } else { (l, k) };
    // Bits lo..hi-1 (0-based) are the elements lo+1..hi-1.
    let between = ((1u64 << (hi - 1)) - 1) & !((1u64 << lo) - 1);
    (mask as u64 & between).count_ones() as usize
}

/// Replaces `k ∈ K` by `l ∉ K`: returns `K \ k ∪ l` and the reordering
/// sign `(-1)^{#K(k,l)}`, so that `e_{K-k+l} = sign · e_{K\k∪l}`.
pub fn substitute_with_sign(set: &MultiIndex, k: usize, l: usize) -> Result<(MultiIndex, Sign)> {
    let n = set.dim();
    check_element(n, k)?;
    check_element(n, l)?;
    if !set.contains(k) {
        return Err(Error::Precondition(format!("{k} is not in {set}")));
    }
    if set.contains(l) {
        return Err(Error::Precondition(format!("{l} is already in {set}")));
    }
    let mask = (set.mask & !(1 << (k - 1))) | (1 << (l - 1));
    let sign = Sign::parity(interval_count_mask(set.mask, k, l));
    Ok((MultiIndex { mask, n: set.n }, sign))
}

/// Brute-force reference for the wedge reordering sign: sorts the factors of
/// `e_{s_1} ∧ … ∧ e_{s_m}` and returns the set with `(-1)^{inversions}`.
pub fn wedge_reorder_oracle(n: usize, seq: &[usize]) -> Result<(MultiIndex, Sign)> {
    check_dim(n)?;
    let mut seen = 0u32;
    for &e in seq {
        check_element(n, e)?;
        if seen & (1 << (e - 1)) != 0 {
            return Err(Error::DegenerateWedge(e));
        }
        seen |= 1 << (e - 1);
    }
    let mut inversions = 0;
    for a in 0..seq.len() {
        for b in a + 1..seq.len() {
            if seq[a] > seq[b] {
                inversions += 1;
            }
        }
    }
    Ok((
        MultiIndex {
            mask: seen,
            n: n as u8,
        },
        Sign::parity(inversions),
    ))
}

/// One nonzero substitution `K → K \ k ∪ l` with its sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Substitution {
    /// Mask of `K`.
    pub from: u32,
    /// Mask of `K \ k ∪ l`.
    pub to: u32,
    /// Removed element (1-based).
    pub k: usize,
    /// Inserted element (1-based).
    pub l: usize,
    pub sign: f64,
}

/// Every admissible substitution over all subsets of `{1, …, n}`, ordered by
/// source mask, then `k`, then `l`.
pub fn substitutions(n: usize) -> Result<Vec<Substitution>> {
    let mut out = Vec::new();
    for set in enumerate_all(n)? {
        for k in set.elements() {
            for l in set.complement_elements() {
                let (to, sign) = substitute_with_sign(&set, k, l)?;
                out.push(Substitution {
                    from: set.mask,
                    to: to.mask,
                    k,
                    l,
                    sign: sign.to_f64(),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, e: &[usize]) -> MultiIndex {
        MultiIndex::from_elements(n, e).unwrap()
    }

    #[test]
    fn enumerate_examples() {
        let g = enumerate_grade(3, 2).unwrap();
        assert_eq!(g, vec![set(3, &[1, 2]), set(3, &[1, 3]), set(3, &[2, 3])]);
        assert_eq!(
            enumerate_grade(4, 0).unwrap(),
            vec![MultiIndex::empty(4).unwrap()]
        );
        assert_eq!(
            enumerate_grade(5, 5).unwrap(),
            vec![set(5, &[1, 2, 3, 4, 5])]
        );
        assert!(matches!(enumerate_grade(3, 4), Err(Error::Domain(_))));
    }

    #[test]
    fn enumerate_counts_and_order() {
        for n in 1..=10 {
            let mut total = 0;
            for r in 0..=n {
                let g = enumerate_grade(n, r).unwrap();
                assert_eq!(g.len(), binomial(n, r));
                assert!(g.windows(2).all(|w| w[0].mask() < w[1].mask()));
                assert!(g.iter().all(|s| s.grade() == r));
                total += g.len();
            }
            assert_eq!(total, 1 << n);
        }
    }

    #[test]
    fn interval_count_examples() {
        assert_eq!(interval_count(&set(4, &[1, 2, 4]), 1, 4).unwrap(), 1);
        assert_eq!(interval_count(&set(3, &[2]), 1, 3).unwrap(), 1);
        assert_eq!(interval_count(&set(3, &[1, 3]), 1, 2).unwrap(), 0);
        assert!(interval_count(&set(3, &[1]), 2, 2).is_err());
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(
            substitute_with_sign(&set(3, &[1, 2]), 1, 3).unwrap(),
            (set(3, &[2, 3]), Sign::Minus)
        );
        assert_eq!(
            substitute_with_sign(&set(2, &[1]), 1, 2).unwrap(),
            (set(2, &[2]), Sign::Plus)
        );
        assert_eq!(
            substitute_with_sign(&set(5, &[1, 2, 3]), 2, 5).unwrap(),
            (set(5, &[1, 3, 5]), Sign::Minus)
        );
        assert!(matches!(
            substitute_with_sign(&set(3, &[1]), 2, 3),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            substitute_with_sign(&set(3, &[1, 3]), 1, 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(
            wedge_reorder_oracle(3, &[3, 2]).unwrap(),
            (set(3, &[2, 3]), Sign::Minus)
        );
        assert_eq!(
            wedge_reorder_oracle(3, &[1, 2, 3]).unwrap(),
            (set(3, &[1, 2, 3]), Sign::Plus)
        );
        assert_eq!(
            wedge_reorder_oracle(5, &[5, 1, 3]).unwrap(),
            (set(5, &[1, 3, 5]), Sign::Plus)
        );
        assert!(matches!(
            wedge_reorder_oracle(3, &[2, 2]),
            Err(Error::DegenerateWedge(2))
        ));
    }

    /// Exhaustive comparison against the inversion-count oracle for n ≤ 6.
    #[test]
    fn substitution_matches_oracle_exhaustively() {
        for n in 1..=6 {
            for s in enumerate_all(n).unwrap() {
                let listing: Vec<usize> = s.elements().collect();
                for k in s.elements() {
                    for l in s.complement_elements() {
                        let seq: Vec<usize> = listing
                            .iter()
                            .map(|&e| if e == k { l } else { e })
                            .collect();
                        let expected = wedge_reorder_oracle(n, &seq).unwrap();
                        let got = substitute_with_sign(&s, k, l).unwrap();
                        assert_eq!(got, expected, "K={s:?} k={k} l={l}");
                        assert_eq!(got.0.grade(), s.grade());
                        // involution with the same sign
                        let back = substitute_with_sign(&got.0, l, k).unwrap();
                        assert_eq!(back, (s, got.1));
                        assert_eq!(
                            interval_count(&s, k, l).unwrap(),
                            interval_count(&s, l, k).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn substitution_table_size() {
        // Σ_r C(n,r) r (n-r) = n (n-1) 2^{n-2}
        for n in 2..=7 {
            assert_eq!(substitutions(n).unwrap().len(), (n * (n - 1)) << (n - 2));
        }
    }
}
