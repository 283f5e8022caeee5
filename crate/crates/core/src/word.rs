//! Ultimately periodic infinite words.
//!
//! `UltWord<T>` denotes the sequence `prefix · period · period · …`. Values are
//! always kept canonical: the period is primitive and the prefix is as short
//! as possible, so structural equality coincides with equality of the denoted
//! sequences. Theory points, cube masks and position sets are all built on it.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UltWord<T> {
    prefix: Vec<T>,
    period: Vec<T>,
}

pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

impl<T: Copy + Eq> UltWord<T> {
    /// Builds the canonical word; `None` when the period is empty.
    pub fn new(prefix: Vec<T>, period: Vec<T>) -> Option<Self> {
        if period.is_empty() {
            return None;
        }
        Some(Self { prefix, period }.canonical())
    }

    pub fn constant(value: T) -> Self {
        Self {
            prefix: Vec::new(),
            period: vec![value],
        }
    }

    fn canonical(mut self) -> Self {
        let n = self.period.len();
        for d in 1..=n {
            if n % d == 0 && (0..n).all(|i| self.period[i] == self.period[i % d]) {
                self.period.truncate(d);
                break;
            }
        }
        while let Some(&last) = self.prefix.last() {
            if last == *self.period.last().expect("nonempty period") {
                self.prefix.pop();
                self.period.rotate_right(1);
            } else {
                break;
            }
        }
        self
    }

    pub fn prefix(&self) -> &[T] {
        &self.prefix
    }

    pub fn period(&self) -> &[T] {
        &self.period
    }

    #[inline]
    pub fn at(&self, i: usize) -> T {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.period[(i - self.prefix.len()) % self.period.len()]
        }
    }

    /// First `n` letters.
    pub fn take(&self, n: usize) -> Vec<T> {
        (0..n).map(|i| self.at(i)).collect()
    }

    /// Past this many positions both words are jointly periodic with period
    /// `horizon().1`.
    pub fn joint_horizon<U: Copy + Eq>(&self, other: &UltWord<U>) -> (usize, usize) {
        (
            self.prefix.len().max(other.prefix.len()),
            lcm(self.period.len(), other.period.len()),
        )
    }

    pub fn map<U: Copy + Eq>(&self, f: impl Fn(T) -> U) -> UltWord<U> {
        UltWord {
            prefix: self.prefix.iter().map(|&x| f(x)).collect(),
            period: self.period.iter().map(|&x| f(x)).collect(),
        }
        .canonical()
    }

    pub fn zip_with<U: Copy + Eq, V: Copy + Eq>(
        &self,
        other: &UltWord<U>,
        f: impl Fn(T, U) -> V,
    ) -> UltWord<V> {
        let (pre, per) = self.joint_horizon(other);
        UltWord {
            prefix: (0..pre).map(|i| f(self.at(i), other.at(i))).collect(),
            period: (pre..pre + per).map(|i| f(self.at(i), other.at(i))).collect(),
        }
        .canonical()
    }

    /// Samples `f` assuming it is periodic with period `modulus` from
    /// `threshold` on.
    pub fn from_fn(threshold: usize, modulus: usize, f: impl Fn(usize) -> T) -> Self {
        assert!(modulus > 0, "modulus must be positive");
        UltWord {
            prefix: (0..threshold).map(&f).collect(),
            period: (threshold..threshold + modulus).map(&f).collect(),
        }
        .canonical()
    }

    /// Least index where the two words differ.
    pub fn first_difference(&self, other: &Self) -> Option<usize> {
        if self == other {
            return None;
        }
        let (pre, per) = self.joint_horizon(other);
        (0..pre + per).find(|&i| self.at(i) != other.at(i))
    }

    /// The word with positions `0..letters.len()` replaced by `letters`.
    pub fn overwrite_prefix(&self, letters: &[T]) -> Self {
        let k = letters.len();
        let mut prefix = letters.to_vec();
        let mut period = self.period.clone();
        if k < self.prefix.len() {
            prefix.extend_from_slice(&self.prefix[k..]);
        } else {
            let shift = (k - self.prefix.len()) % period.len();
            period.rotate_left(shift);
        }
        UltWord { prefix, period }.canonical()
    }

    /// Every position `>= from` where `pred` holds lies in the periodic part
    /// scan, so this decides "exists i >= from with pred(at(i))".
    pub fn any_from(&self, from: usize, pred: impl Fn(T) -> bool) -> bool {
        let end = from.max(self.prefix.len()) + self.period.len();
        (from..end).any(|i| pred(self.at(i)))
    }
}

impl<T: fmt::Debug> fmt::Debug for UltWord<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}~{:?}", self.prefix, self.period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(pre: &str, per: &str) -> UltWord<u8> {
        UltWord::new(pre.bytes().collect(), per.bytes().collect()).unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(w("10", "0"), w("1", "0"));
        assert_eq!(w("", "0101").period(), b"01");
        assert_eq!(w("0", "10"), w("", "01"));
        assert!(UltWord::<u8>::new(vec![], vec![]).is_none());
    }

    #[test]
    fn overwrite_and_difference() {
        let z = w("", "0");
        let p = z.overwrite_prefix(b"001");
        assert_eq!(p, w("001", "0"));
        assert_eq!(z.first_difference(&p), Some(2));
        let alt = w("", "01");
        assert_eq!(alt.overwrite_prefix(b"111"), w("111", "10"));
        assert_eq!(w("abc", "xy").overwrite_prefix(b"Q"), w("Qbc", "xy"));
    }
}
