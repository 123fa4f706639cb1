//! Core domain types: design spaces, runs, fractions, exact GWLP vectors and
//! the generalized minimum aberration (GMA) comparison.
//!
//! All types here are plain immutable values once constructed; they can be
//! shared freely across worker threads.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::fmt;

/// A full factorial grid: `m` factors, factor `j` taking `levels[j] >= 2`
/// values coded as integers `0..levels[j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSpace {
    levels: Vec<u32>,
    full_size: u64,
}

impl DesignSpace {
    pub fn new(levels: Vec<u32>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidSpace(
                "at least one factor is required".into(),
            ));
        }
        if let Some((j, &s)) = levels.iter().enumerate().find(|&(_, &s)| s < 2) {
            return Err(Error::InvalidSpace(format!(
                "factor {} has {} levels; every factor needs at least 2",
                j + 1,
                s
            )));
        }
        let mut full_size: u64 = 1;
        for &s in &levels {
            full_size = full_size.checked_mul(u64::from(s)).ok_or(Error::Capacity {
                what: "full factorial size",
                actual: u128::MAX,
                limit: u64::MAX as u128,
            })?;
        }
        Ok(Self { levels, full_size })
    }

    /// Number of factors `m`.
    pub fn factors(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    /// Size of the full grid, the product of all level counts.
    pub fn full_size(&self) -> u64 {
        self.full_size
    }

    pub(crate) fn check_run(&self, run: &Run) -> Result<()> {
        if run.codes.len() != self.levels.len() {
            return Err(Error::InvalidRun(format!(
                "run has {} coordinates, space has {} factors",
                run.codes.len(),
                self.levels.len()
            )));
        }
        for (j, (&code, &s)) in run.codes.iter().zip(&self.levels).enumerate() {
            if code >= s {
                return Err(Error::InvalidRun(format!(
                    "code {} out of range for factor {} with {} levels",
                    code,
                    j + 1,
                    s
                )));
            }
        }
        Ok(())
    }

    /// Compact class label, e.g. `2^5` or `2^1 3^3` (levels ascending).
    pub fn class_label(&self) -> String {
        let mut distinct: Vec<u32> = self.levels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        distinct
            .iter()
            .map(|&s| {
                let count = self.levels.iter().filter(|&&x| x == s).count();
                format!("{s}^{count}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// One design point, stored as integer level codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Run {
    codes: Vec<u32>,
}

impl Run {
    pub fn new(codes: Vec<u32>) -> Self {
        Self { codes }
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.codes.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A multiset of runs over one design space.
///
/// Entry order is preserved so that run indices (1-based in reports) stay
/// stable. A replicated point may appear either as repeated entries or as a
/// single entry with multiplicity greater than one; both expand to the same
/// sequence of `n` indexed runs.
#[derive(Debug, Clone)]
pub struct Fraction {
    space: DesignSpace,
    entries: Vec<(Run, u32)>,
    n: usize,
}

impl Fraction {
    /// Fraction from a list of runs, each with multiplicity one.
    pub fn new(space: DesignSpace, runs: Vec<Run>) -> Result<Self> {
        Self::with_multiplicities(space, runs.into_iter().map(|r| (r, 1)).collect())
    }

    pub fn with_multiplicities(space: DesignSpace, entries: Vec<(Run, u32)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidFraction(
                "a fraction needs at least one run".into(),
            ));
        }
        let mut n: usize = 0;
        for (run, mult) in &entries {
            space.check_run(run)?;
            if *mult == 0 {
                return Err(Error::InvalidFraction(
                    "multiplicities must be positive".into(),
                ));
            }
            n = n
                .checked_add(*mult as usize)
                .ok_or(Error::InvalidFraction("total size overflows".into()))?;
        }
        Ok(Self { space, entries, n })
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    /// Total number of runs counting multiplicity.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(Run, u32)] {
        &self.entries
    }

    /// Iterate the `n` runs in order, with replicated entries repeated.
    pub fn expanded(&self) -> impl Iterator<Item = &Run> + '_ {
        self.entries
            .iter()
            .flat_map(|(run, mult)| std::iter::repeat_n(run, *mult as usize))
    }

    /// The expanded run sequence as a vector of references.
    pub fn expanded_runs(&self) -> Vec<&Run> {
        self.expanded().collect()
    }

    /// New fraction with one copy removed at each of the given expanded
    /// (0-based) indices. Indices must be distinct and in range, and at
    /// least one run must remain.
    pub fn without_indices(&self, zero_based: &[usize]) -> Result<Fraction> {
        let mut drop = vec![false; self.n];
        for &i in zero_based {
            if i >= self.n {
                return Err(Error::InvalidSubset(format!(
                    "index {} out of range for {} runs",
                    i + 1,
                    self.n
                )));
            }
            if drop[i] {
                return Err(Error::InvalidSubset(format!("index {} repeated", i + 1)));
            }
            drop[i] = true;
        }
        if zero_based.len() >= self.n {
            return Err(Error::InvalidSubset("cannot remove every run".into()));
        }
        let kept: Vec<Run> = self
            .expanded()
            .enumerate()
            .filter(|(i, _)| !drop[*i])
            .map(|(_, run)| run.clone())
            .collect();
        Fraction::new(self.space.clone(), kept)
    }
}

/// Exact GWLP of a fraction of size `size_n`: entry `j` equals
/// `numerators[j] / denominator` with `denominator = size_n²`. The leading
/// entry is always 1, so `numerators[0] == denominator`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwlpExact {
    numerators: Vec<u64>,
    denominator: u64,
    size_n: u64,
}

impl GwlpExact {
    pub fn new(numerators: Vec<u64>, size_n: u64) -> Result<Self> {
        if size_n == 0 {
            return Err(Error::InvalidGwlp("size must be positive".into()));
        }
        let denominator = size_n
            .checked_mul(size_n)
            .ok_or(Error::InvalidGwlp("denominator overflows".into()))?;
        if numerators.is_empty() {
            return Err(Error::InvalidGwlp("at least one entry is required".into()));
        }
        if numerators[0] != denominator {
            return Err(Error::InvalidGwlp(format!(
                "leading numerator {} must equal the denominator {}",
                numerators[0], denominator
            )));
        }
        Ok(Self {
            numerators,
            denominator,
            size_n,
        })
    }

    pub fn numerators(&self) -> &[u64] {
        &self.numerators
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    /// The fraction size this pattern refers to.
    pub fn size_n(&self) -> u64 {
        self.size_n
    }

    /// Number of entries, `m + 1`.
    pub fn orders(&self) -> usize {
        self.numerators.len()
    }

    /// Entry `j` as a float, for display only.
    pub fn value(&self, j: usize) -> f64 {
        self.numerators[j] as f64 / self.denominator as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.orders()).map(|j| self.value(j)).collect()
    }

    /// Exact sequential (lexicographic) comparison; `Less` means `self` has
    /// smaller aberration at the first index where the two differ.
    pub fn gma_cmp(&self, other: &GwlpExact) -> Result<Ordering> {
        if self.orders() != other.orders() {
            return Err(Error::GwlpLengthMismatch {
                left: self.orders(),
                right: other.orders(),
            });
        }
        for j in 0..self.orders() {
            let lhs = u128::from(self.numerators[j]) * u128::from(other.denominator);
            let rhs = u128::from(other.numerators[j]) * u128::from(self.denominator);
            match lhs.cmp(&rhs) {
                Ordering::Equal => continue,
                non_eq => return Ok(non_eq),
            }
        }
        Ok(Ordering::Equal)
    }
}

/// Outcome of a GMA comparison between two GWLPs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmaOrdering {
    FirstBetter,
    SecondBetter,
    Equal,
}

/// Compare two exact GWLPs under the GMA criterion: the first is better iff
/// its first differing entry is smaller. Comparison is exact (numerators are
/// cross-multiplied by the opposite denominator; no floating point).
pub fn gma_compare(first: &GwlpExact, second: &GwlpExact) -> Result<GmaOrdering> {
    Ok(match first.gma_cmp(second)? {
        Ordering::Less => GmaOrdering::FirstBetter,
        Ordering::Greater => GmaOrdering::SecondBetter,
        Ordering::Equal => GmaOrdering::Equal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gwlp(nums: &[u64], n: u64) -> GwlpExact {
        GwlpExact::new(nums.to_vec(), n).unwrap()
    }

    #[test]
    fn space_validation() {
        assert!(DesignSpace::new(vec![]).is_err());
        assert!(DesignSpace::new(vec![2, 1]).is_err());
        let space = DesignSpace::new(vec![2, 3, 4]).unwrap();
        assert_eq!(space.factors(), 3);
        assert_eq!(space.full_size(), 24);
    }

    #[test]
    fn class_labels() {
        assert_eq!(DesignSpace::new(vec![2; 5]).unwrap().class_label(), "2^5");
        assert_eq!(
            DesignSpace::new(vec![2, 3, 3, 3]).unwrap().class_label(),
            "2^1 3^3"
        );
        assert_eq!(
            DesignSpace::new(vec![4, 2, 2, 4, 2, 2])
                .unwrap()
                .class_label(),
            "2^4 4^2"
        );
    }

    #[test]
    fn fraction_checks_runs_and_counts_multiplicity() {
        let space = DesignSpace::new(vec![2, 3]).unwrap();
        assert!(Fraction::new(space.clone(), vec![Run::new(vec![0, 3])]).is_err());
        assert!(Fraction::new(space.clone(), vec![Run::new(vec![0])]).is_err());
        let f = Fraction::with_multiplicities(
            space,
            vec![(Run::new(vec![0, 0]), 2), (Run::new(vec![1, 2]), 1)],
        )
        .unwrap();
        assert_eq!(f.n(), 3);
        let expanded = f.expanded_runs();
        assert_eq!(expanded.len(), 3);
        assert_eq!(expanded[0], expanded[1]);
    }

    #[test]
    fn without_indices_removes_single_copies() {
        let space = DesignSpace::new(vec![2]).unwrap();
        let f = Fraction::with_multiplicities(
            space,
            vec![(Run::new(vec![0]), 2), (Run::new(vec![1]), 1)],
        )
        .unwrap();
        let g = f.without_indices(&[0]).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.expanded_runs()[0].codes(), &[0]);
        assert_eq!(g.expanded_runs()[1].codes(), &[1]);
        assert!(f.without_indices(&[0, 1, 2]).is_err());
        assert!(f.without_indices(&[3]).is_err());
        assert!(f.without_indices(&[1, 1]).is_err());
    }

    #[test]
    fn gwlp_leading_entry_must_be_one() {
        assert!(GwlpExact::new(vec![4, 1], 2).is_ok());
        assert!(GwlpExact::new(vec![3, 1], 2).is_err());
        assert!(GwlpExact::new(vec![], 2).is_err());
    }

    #[test]
    fn gma_first_better_on_lower_order_three() {
        // Single-removal patterns of the 12-run two-level array: order-3
        // entries 138/121 vs 170/121 decide.
        let better = gwlp(&[121, 5, 10, 138, 77, 1], 11);
        let worse = gwlp(&[121, 5, 10, 170, 45, 1], 11);
        assert_eq!(
            gma_compare(&better, &worse).unwrap(),
            GmaOrdering::FirstBetter
        );
        assert_eq!(
            gma_compare(&worse, &better).unwrap(),
            GmaOrdering::SecondBetter
        );
    }

    #[test]
    fn gma_equal_on_identical_vectors() {
        let g = gwlp(&[144, 0, 0, 160, 80, 0], 12);
        assert_eq!(gma_compare(&g, &g).unwrap(), GmaOrdering::Equal);
    }

    #[test]
    fn gma_second_better_on_first_entry() {
        // 4/100 vs 0/100 at order one: the zero wins.
        let g1 = gwlp(&[100, 4, 40], 10);
        let g2 = gwlp(&[100, 0, 40], 10);
        assert_eq!(gma_compare(&g1, &g2).unwrap(), GmaOrdering::SecondBetter);
    }

    #[test]
    fn gma_length_mismatch_is_an_error() {
        let g1 = gwlp(&[4, 1], 2);
        let g2 = gwlp(&[4, 1, 1], 2);
        assert!(gma_compare(&g1, &g2).is_err());
    }

    #[test]
    fn gma_is_exact_under_common_scaling() {
        // Scaling both numerators and denominator by the same factor is the
        // same rational vector, so comparisons must not change.
        let mut rng = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            rng
        };
        for _ in 0..200 {
            let n1 = 1 + next() % 30;
            let n2 = 1 + next() % 30;
            let a: Vec<u64> = std::iter::once(n1 * n1)
                .chain((0..4).map(|_| next() % 50))
                .collect();
            let b: Vec<u64> = std::iter::once(n2 * n2)
                .chain((0..4).map(|_| next() % 50))
                .collect();
            let k = 1 + next() % 7;
            let g1 = gwlp(&a, n1);
            let g2 = gwlp(&b, n2);
            let s1 = gwlp(&a.iter().map(|x| x * k * k).collect::<Vec<_>>(), n1 * k);
            let s2 = gwlp(&b.iter().map(|x| x * k * k).collect::<Vec<_>>(), n2 * k);
            assert_eq!(
                gma_compare(&g1, &g2).unwrap(),
                gma_compare(&s1, &s2).unwrap()
            );
            assert_eq!(
                gma_compare(&g1, &s2).unwrap(),
                gma_compare(&g1, &g2).unwrap()
            );
        }
    }

    #[test]
    fn gma_is_transitive_on_random_vectors() {
        let mut state = 0x853c49e6748fea9bu64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            state >> 33
        };
        let mut vectors = Vec::new();
        for _ in 0..40 {
            let n = 2 + next() % 9;
            let nums: Vec<u64> = std::iter::once(n * n)
                .chain((0..3).map(|_| next() % 12))
                .collect();
            vectors.push(gwlp(&nums, n));
        }
        for a in &vectors {
            for b in &vectors {
                for c in &vectors {
                    let ab = a.gma_cmp(b).unwrap();
                    let bc = b.gma_cmp(c).unwrap();
                    if ab == bc {
                        assert_eq!(a.gma_cmp(c).unwrap(), ab);
                    }
                    if ab == Ordering::Equal {
                        assert_eq!(b.gma_cmp(a).unwrap(), Ordering::Equal);
                    }
                }
            }
        }
    }
}
