//! Sub-fraction optimization: exact GWLPs after removing runs, single-removal
//! ranking, exhaustive subset search with grouping of equal patterns, and the
//! greedy one-run-at-a-time strategy.
//!
//! Removing the index set `T` from a fraction restricts its matrix stack to
//! the surviving rows and columns, so the order-`j` numerator of the
//! sub-fraction is
//!
//! ```text
//! N_j − 2·Σ_{f∈T} rowsum_j(f) + Σ_{f,g∈T} W_j(f,g)
//! ```
//!
//! over the denominator `(n−p)²`. Everything is integer arithmetic on the
//! stack cached by [`crate::wstack::build_wstack`]; no pattern is ever
//! recomputed from scratch during a search.

use crate::design::GwlpExact;
use crate::error::{Error, Result};
use crate::wstack::WStack;
use std::collections::HashMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A set of runs to delete, stored as 1-based indices into the fraction's
/// run order, strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalSubset {
    indices: Vec<usize>,
}

impl RemovalSubset {
    /// Validate a 1-based, strictly increasing index set against a fraction
    /// of `n` runs. At least one run must remain.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSubset(
                "at least one index is required".into(),
            ));
        }
        if indices.len() >= n {
            return Err(Error::InvalidSubset(format!(
                "removing {} of {} runs would leave an empty fraction",
                indices.len(),
                n
            )));
        }
        for pair in indices.windows(2) {
            if pair[0] >= pair[1] {
                return Err(Error::InvalidSubset(
                    "indices must be strictly increasing".into(),
                ));
            }
        }
        if indices[0] == 0 || *indices.last().unwrap() > n {
            return Err(Error::InvalidSubset(format!("indices must lie in 1..={n}")));
        }
        Ok(Self { indices })
    }

    pub fn p(&self) -> usize {
        self.indices.len()
    }

    /// 1-based indices, strictly increasing.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    fn zero_based(&self) -> Vec<usize> {
        self.indices.iter().map(|&i| i - 1).collect()
    }
}

/// Order-`j` numerators of the sub-fraction left after deleting the 0-based
/// `removed` indices, written into `out`. Exact integers; nonnegativity is
/// guaranteed by the underlying sums of squared moduli.
fn numerators_after_removal_into(w: &WStack, removed: &[usize], out: &mut Vec<u64>) -> Result<()> {
    out.clear();
    for j in 0..=w.factors() {
        let mut acc = w.total(j);
        for &f in removed {
            acc -= 2 * w.row_sum(j, f);
        }
        for &f in removed {
            for &g in removed {
                acc += i128::from(w.entry(j, f, g));
            }
        }
        let value = u64::try_from(acc).map_err(|_| {
            Error::Internal(format!(
                "order {j} numerator {acc} fell outside the representable range"
            ))
        })?;
        out.push(value);
    }
    Ok(())
}

fn numerators_after_removal(w: &WStack, removed: &[usize]) -> Result<Vec<u64>> {
    let mut out = Vec::with_capacity(w.factors() + 1);
    numerators_after_removal_into(w, removed, &mut out)?;
    Ok(out)
}

/// Exact GWLP of the sub-fraction obtained by deleting the given subset.
pub fn gwlp_after_removal(w: &WStack, subset: &RemovalSubset) -> Result<GwlpExact> {
    if subset.p() >= w.n() {
        return Err(Error::InvalidSubset(format!(
            "removing {} of {} runs would leave an empty fraction",
            subset.p(),
            w.n()
        )));
    }
    if *subset.indices().last().unwrap() > w.n() {
        return Err(Error::InvalidSubset(format!(
            "indices must lie in 1..={}",
            w.n()
        )));
    }
    let numerators = numerators_after_removal(w, &subset.zero_based())?;
    GwlpExact::new(numerators, (w.n() - subset.p()) as u64)
}

/// Every single-run removal with its exact GWLP, sorted best-first under the
/// GMA criterion; ties keep ascending run index. Indices are 1-based.
pub fn rank_single_removals(w: &WStack) -> Result<Vec<(usize, GwlpExact)>> {
    let n = w.n();
    if n < 2 {
        return Err(Error::InvalidSubset(
            "ranking removals needs at least two runs".into(),
        ));
    }
    let mut ranked: Vec<(usize, Vec<u64>)> = (0..n)
        .map(|f| Ok((f + 1, numerators_after_removal(w, &[f])?)))
        .collect::<Result<_>>()?;
    // Equal denominators throughout, so the GMA order is the entrywise
    // numerator order; the index breaks exact ties.
    ranked.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    ranked
        .into_iter()
        .map(|(idx, nums)| Ok((idx, GwlpExact::new(nums, (n - 1) as u64)?)))
        .collect()
}

/// Options for [`exhaustive_search`].
#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Refuse searches that would evaluate more subsets than this. Raise it
    /// explicitly to force a larger search.
    pub max_subsets: u64,
    /// How many representative index sets to keep per group (the
    /// lexicographically smallest ones).
    pub representatives_per_group: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_subsets: 10_000_000,
            representatives_per_group: 3,
        }
    }
}

/// One equivalence class of removal subsets sharing an exact GWLP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwlpGroup {
    pub gwlp: GwlpExact,
    /// Number of subsets realizing this pattern.
    pub count: u64,
    /// Lexicographically smallest subsets in the class, 1-based, ascending.
    pub representatives: Vec<Vec<usize>>,
}

/// Result of an exhaustive search over all `p`-subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalReport {
    pub p: usize,
    /// `C(n, p)`, the number of subsets evaluated.
    pub total_subsets: u64,
    /// Groups of exactly equal GWLPs, sorted best-first under GMA.
    pub groups: Vec<GwlpGroup>,
}

impl RemovalReport {
    /// The GMA-best group (the report is sorted, so the first one).
    pub fn best_group(&self) -> &GwlpGroup {
        &self.groups[0]
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(u128::from(n - i)) {
            Some(v) => v / u128::from(i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Table of `C(a, b)` for `a <= n`, `b <= p`, used by the unranking loop.
fn binomial_table(n: usize, p: usize) -> Vec<Vec<u128>> {
    let mut table = vec![vec![0u128; p + 1]; n + 1];
    for (a, row) in table.iter_mut().enumerate() {
        row[0] = 1;
        for (b, cell) in row.iter_mut().enumerate().take(p.min(a) + 1).skip(1) {
            *cell = binomial(a as u64, b as u64);
        }
    }
    table
}

/// The subset of `{0, …, n−1}` of size `p` at the given lexicographic rank.
fn unrank_subset(mut rank: u64, n: usize, p: usize, binom: &[Vec<u128>], out: &mut Vec<usize>) {
    out.clear();
    let mut next = 0usize;
    for slot in 0..p {
        loop {
            let skip = binom[n - 1 - next][p - 1 - slot];
            if u128::from(rank) < skip {
                out.push(next);
                next += 1;
                break;
            }
            rank -= skip as u64;
            next += 1;
        }
    }
}

#[derive(Debug, Clone, Default)]
struct GroupAcc {
    count: u64,
    reps: Vec<Vec<usize>>,
}

/// Count one subset under its pattern key. The key is borrowed so the common
/// case (pattern already seen) costs no allocation.
fn record_subset(
    map: &mut HashMap<Vec<u64>, GroupAcc>,
    key: &[u64],
    subset: &[usize],
    keep: usize,
) {
    if let Some(acc) = map.get_mut(key) {
        acc.count += 1;
        insert_representative(&mut acc.reps, subset, keep);
        return;
    }
    let mut acc = GroupAcc {
        count: 1,
        reps: Vec::new(),
    };
    insert_representative(&mut acc.reps, subset, keep);
    map.insert(key.to_vec(), acc);
}

/// Keep the `keep` lexicographically smallest subsets, independent of the
/// order they arrive in.
fn insert_representative(reps: &mut Vec<Vec<usize>>, subset: &[usize], keep: usize) {
    if keep == 0 {
        return;
    }
    if reps.len() == keep {
        if let Some(last) = reps.last() {
            if subset >= last.as_slice() {
                return;
            }
        }
    }
    let pos = reps
        .binary_search_by(|existing| existing.as_slice().cmp(subset))
        .unwrap_or_else(|p| p);
    reps.insert(pos, subset.to_vec());
    reps.truncate(keep);
}

#[cfg(feature = "parallel")]
fn merge_group_maps(
    mut into: HashMap<Vec<u64>, GroupAcc>,
    mut from: HashMap<Vec<u64>, GroupAcc>,
    keep: usize,
) -> HashMap<Vec<u64>, GroupAcc> {
    // Counts add and representative merging is symmetric, so walk the
    // smaller map into the larger one.
    if from.len() > into.len() {
        std::mem::swap(&mut into, &mut from);
    }
    for (key, acc) in from {
        match into.entry(key) {
            std::collections::hash_map::Entry::Vacant(slot) => {
                slot.insert(acc);
            }
            std::collections::hash_map::Entry::Occupied(mut slot) => {
                let target = slot.get_mut();
                target.count += acc.count;
                for rep in acc.reps {
                    insert_representative(&mut target.reps, &rep, keep);
                }
            }
        }
    }
    into
}

fn scan_rank_range(
    w: &WStack,
    ranks: std::ops::Range<u64>,
    p: usize,
    binom: &[Vec<u128>],
    keep: usize,
) -> Result<HashMap<Vec<u64>, GroupAcc>> {
    let n = w.n();
    let mut map = HashMap::new();
    let mut subset = Vec::with_capacity(p);
    let mut key = Vec::with_capacity(w.factors() + 1);
    for rank in ranks {
        unrank_subset(rank, n, p, binom, &mut subset);
        numerators_after_removal_into(w, &subset, &mut key)?;
        record_subset(&mut map, &key, &subset, keep);
    }
    Ok(map)
}

fn report_from_groups(
    w: &WStack,
    p: usize,
    total: u64,
    map: HashMap<Vec<u64>, GroupAcc>,
) -> Result<RemovalReport> {
    let mut groups: Vec<(Vec<u64>, GroupAcc)> = map.into_iter().collect();
    // Equal denominators at fixed p, so entrywise numerator order is the GMA
    // order; sorting by the exact key makes the report canonical.
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    let counted: u64 = groups.iter().map(|(_, acc)| acc.count).sum();
    if counted != total {
        return Err(Error::Internal(format!(
            "grouped {counted} subsets, expected {total}"
        )));
    }
    let size = (w.n() - p) as u64;
    let groups = groups
        .into_iter()
        .map(|(key, acc)| {
            Ok(GwlpGroup {
                gwlp: GwlpExact::new(key, size)?,
                count: acc.count,
                representatives: acc
                    .reps
                    .into_iter()
                    .map(|rep| rep.into_iter().map(|i| i + 1).collect())
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RemovalReport {
        p,
        total_subsets: total,
        groups,
    })
}

fn check_search_inputs(w: &WStack, p: usize, options: &SearchOptions) -> Result<u64> {
    let n = w.n();
    if p == 0 || p >= n {
        return Err(Error::InvalidSubset(format!(
            "subset size must satisfy 1 <= p < n; got p = {p}, n = {n}"
        )));
    }
    let total = binomial(n as u64, p as u64);
    if total > u128::from(options.max_subsets) {
        return Err(Error::Capacity {
            what: "removal subsets",
            actual: total,
            limit: u128::from(options.max_subsets),
        });
    }
    Ok(total as u64)
}

/// Evaluate every `p`-subset of runs, group exactly equal GWLPs, and return
/// the groups sorted best-first. Ranks are swept in coarse contiguous
/// chunks; the grouping merge is associative and keyed on exact integers, so
/// the report does not depend on evaluation order and is byte-identical
/// across thread counts.
#[cfg(feature = "parallel")]
pub fn exhaustive_search(w: &WStack, p: usize, options: &SearchOptions) -> Result<RemovalReport> {
    let total = check_search_inputs(w, p, options)?;
    let keep = options.representatives_per_group;
    let binom = binomial_table(w.n(), p);
    let workers = rayon::current_num_threads().max(1) as u64;
    let chunk = (total / (workers * 8))
        .clamp(1024, u64::MAX)
        .min(total.max(1));
    let starts: Vec<u64> = (0..total).step_by(chunk as usize).collect();
    let map = starts
        .into_par_iter()
        .map(|start| scan_rank_range(w, start..(start + chunk).min(total), p, &binom, keep))
        .try_reduce(HashMap::new, |a, b| Ok(merge_group_maps(a, b, keep)))?;
    report_from_groups(w, p, total, map)
}

/// Evaluate every `p`-subset of runs, group exactly equal GWLPs, and return
/// the groups sorted best-first (sequential build of the crate).
#[cfg(not(feature = "parallel"))]
pub fn exhaustive_search(w: &WStack, p: usize, options: &SearchOptions) -> Result<RemovalReport> {
    exhaustive_search_seq(w, p, options)
}

/// Sequential subset sweep; always available and byte-identical to the
/// parallel search.
pub fn exhaustive_search_seq(
    w: &WStack,
    p: usize,
    options: &SearchOptions,
) -> Result<RemovalReport> {
    let total = check_search_inputs(w, p, options)?;
    let binom = binomial_table(w.n(), p);
    let map = scan_rank_range(w, 0..total, p, &binom, options.representatives_per_group)?;
    report_from_groups(w, p, total, map)
}

/// One step of the greedy strategy: the run removed (1-based) and the exact
/// GWLP of the remaining sub-fraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyStep {
    pub removed: usize,
    pub gwlp: GwlpExact,
}

/// Remove `p` runs one at a time, at each step deleting the run whose
/// removal gives the GMA-best sub-fraction (ties resolved toward the lowest
/// run index). `first` forces the initial pick. The trajectory it returns is
/// not optimal in general: the best `p`-subset need not contain the best
/// single removal, so a fixed removal budget calls for [`exhaustive_search`].
pub fn greedy_sequential(w: &WStack, p: usize, first: Option<usize>) -> Result<Vec<GreedyStep>> {
    let n = w.n();
    if p == 0 || p >= n {
        return Err(Error::InvalidSubset(format!(
            "subset size must satisfy 1 <= p < n; got p = {p}, n = {n}"
        )));
    }
    if let Some(f) = first {
        if f == 0 || f > n {
            return Err(Error::InvalidSubset(format!(
                "forced first index {f} must lie in 1..={n}"
            )));
        }
    }
    let mut removed: Vec<usize> = Vec::with_capacity(p);
    let mut steps = Vec::with_capacity(p);
    let mut scratch: Vec<usize> = Vec::with_capacity(p);
    for step in 0..p {
        let forced = if step == 0 {
            first.map(|f| f - 1)
        } else {
            None
        };
        let mut best: Option<(Vec<u64>, usize)> = None;
        for candidate in 0..n {
            if removed.contains(&candidate) {
                continue;
            }
            if let Some(f) = forced {
                if candidate != f {
                    continue;
                }
            }
            scratch.clear();
            scratch.extend_from_slice(&removed);
            scratch.push(candidate);
            scratch.sort_unstable();
            let nums = numerators_after_removal(w, &scratch)?;
            let better = match &best {
                None => true,
                Some((incumbent, _)) => nums < *incumbent,
            };
            if better {
                best = Some((nums, candidate));
            }
        }
        let (nums, chosen) =
            best.ok_or_else(|| Error::Internal("no candidate left to remove".into()))?;
        removed.push(chosen);
        steps.push(GreedyStep {
            removed: chosen + 1,
            gwlp: GwlpExact::new(nums, (n - step - 1) as u64)?,
        });
    }
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{DesignSpace, Fraction, Run};
    use crate::wstack::{build_wstack, gwlp_from_wstack};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn space(levels: &[u32]) -> DesignSpace {
        DesignSpace::new(levels.to_vec()).unwrap()
    }

    fn fraction(levels: &[u32], rows: &[&[u32]]) -> Fraction {
        Fraction::new(
            space(levels),
            rows.iter().map(|r| Run::new(r.to_vec())).collect(),
        )
        .unwrap()
    }

    fn oa12() -> Fraction {
        fraction(
            &[2; 5],
            &[
                &[0, 0, 0, 0, 0],
                &[0, 0, 0, 0, 1],
                &[0, 0, 1, 1, 0],
                &[0, 1, 0, 1, 0],
                &[0, 1, 1, 0, 1],
                &[0, 1, 1, 1, 1],
                &[1, 0, 0, 1, 1],
                &[1, 0, 1, 0, 0],
                &[1, 0, 1, 1, 1],
                &[1, 1, 0, 0, 1],
                &[1, 1, 0, 1, 0],
                &[1, 1, 1, 0, 0],
            ],
        )
    }

    fn pb12() -> Fraction {
        let generator = [0u32, 0, 1, 0, 0, 0, 1, 1, 1, 0, 1];
        let mut rows: Vec<Vec<u32>> = (0..11)
            .map(|shift| (0..11).map(|j| generator[(j + 11 - shift) % 11]).collect())
            .collect();
        rows.push(vec![1; 11]);
        Fraction::new(space(&[2; 11]), rows.into_iter().map(Run::new).collect()).unwrap()
    }

    fn random_fraction(rng: &mut ChaCha8Rng) -> Fraction {
        let m = rng.random_range(1..=4usize);
        let levels: Vec<u32> = (0..m).map(|_| rng.random_range(2..=4)).collect();
        let n_entries = rng.random_range(2..=8usize);
        let entries: Vec<(Run, u32)> = (0..n_entries)
            .map(|_| {
                let codes: Vec<u32> = levels.iter().map(|&s| rng.random_range(0..s)).collect();
                (Run::new(codes), rng.random_range(1..=2u32))
            })
            .collect();
        Fraction::with_multiplicities(space(&levels), entries).unwrap()
    }

    #[test]
    fn subset_validation() {
        assert!(RemovalSubset::new(vec![], 5).is_err());
        assert!(RemovalSubset::new(vec![0], 5).is_err());
        assert!(RemovalSubset::new(vec![6], 5).is_err());
        assert!(RemovalSubset::new(vec![2, 2], 5).is_err());
        assert!(RemovalSubset::new(vec![3, 2], 5).is_err());
        assert!(RemovalSubset::new(vec![1, 2, 3, 4, 5], 5).is_err());
        let s = RemovalSubset::new(vec![1, 4], 5).unwrap();
        assert_eq!(s.p(), 2);
    }

    #[test]
    fn single_removals_of_oa12() {
        let w = build_wstack(&oa12()).unwrap();
        let g1 = gwlp_after_removal(&w, &RemovalSubset::new(vec![1], 12).unwrap()).unwrap();
        assert_eq!(g1.numerators(), &[121, 5, 10, 138, 77, 1]);
        assert_eq!(g1.denominator(), 121);
        let g3 = gwlp_after_removal(&w, &RemovalSubset::new(vec![3], 12).unwrap()).unwrap();
        assert_eq!(g3.numerators(), &[121, 5, 10, 170, 45, 1]);
    }

    #[test]
    fn removing_the_distance_five_pair_clears_order_one() {
        let w = build_wstack(&oa12()).unwrap();
        let g = gwlp_after_removal(&w, &RemovalSubset::new(vec![3, 10], 12).unwrap()).unwrap();
        assert_eq!(g.numerators()[1], 0);
        assert_eq!(g.denominator(), 100);
    }

    #[test]
    fn removal_matches_rebuild_from_scratch() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..8 {
            let f = random_fraction(&mut rng);
            let n = f.n();
            if n < 3 {
                continue;
            }
            let w = build_wstack(&f).unwrap();
            for p in 1..=3.min(n - 1) {
                let total = binomial(n as u64, p as u64) as u64;
                let binom = binomial_table(n, p);
                let mut subset = Vec::new();
                for rank in 0..total {
                    unrank_subset(rank, n, p, &binom, &mut subset);
                    let one_based: Vec<usize> = subset.iter().map(|&i| i + 1).collect();
                    let fast =
                        gwlp_after_removal(&w, &RemovalSubset::new(one_based, n).unwrap()).unwrap();
                    let rebuilt = gwlp_from_wstack(
                        &build_wstack(&f.without_indices(&subset).unwrap()).unwrap(),
                    )
                    .unwrap();
                    assert_eq!(fast, rebuilt);
                }
            }
        }
    }

    #[test]
    fn removal_chains_through_intermediate_stacks() {
        // Removing f then g from the reduced design equals removing {f, g}
        // in one step.
        let f = oa12();
        let w = build_wstack(&f).unwrap();
        for (a, b) in [(0usize, 5usize), (2, 9), (3, 4)] {
            let joint =
                gwlp_after_removal(&w, &RemovalSubset::new(vec![a + 1, b + 1], 12).unwrap())
                    .unwrap();
            let reduced = f.without_indices(&[a]).unwrap();
            let wr = build_wstack(&reduced).unwrap();
            let b_after = if b > a { b - 1 } else { b };
            let chained =
                gwlp_after_removal(&wr, &RemovalSubset::new(vec![b_after + 1], 11).unwrap())
                    .unwrap();
            assert_eq!(joint, chained);
        }
    }

    #[test]
    fn ranking_of_oa12_puts_the_special_pair_last() {
        let w = build_wstack(&oa12()).unwrap();
        let ranked = rank_single_removals(&w).unwrap();
        assert_eq!(ranked.len(), 12);
        let tail: Vec<usize> = ranked[10..].iter().map(|(i, _)| *i).collect();
        assert_eq!(tail, vec![3, 10]);
        for (_, g) in &ranked[..10] {
            assert_eq!(g.numerators()[3], 138);
        }
        for (_, g) in &ranked[10..] {
            assert_eq!(g.numerators()[3], 170);
        }
    }

    #[test]
    fn ranking_ties_keep_ascending_indices() {
        let w = build_wstack(&pb12()).unwrap();
        let ranked = rank_single_removals(&w).unwrap();
        let order: Vec<usize> = ranked.iter().map(|(i, _)| *i).collect();
        assert_eq!(order, (1..=12).collect::<Vec<_>>());
        for pair in ranked.windows(2) {
            assert_eq!(pair[0].1, pair[1].1);
        }
    }

    #[test]
    fn two_distinct_points_tie_when_either_leaves_a_singleton() {
        let f = fraction(&[2, 3], &[&[0, 0], &[1, 2]]);
        let w = build_wstack(&f).unwrap();
        let ranked = rank_single_removals(&w).unwrap();
        assert_eq!(ranked[0].1, ranked[1].1);
    }

    #[test]
    fn exhaustive_groups_of_pb12() {
        let w = build_wstack(&pb12()).unwrap();
        let options = SearchOptions::default();
        let r2 = exhaustive_search(&w, 2, &options).unwrap();
        assert_eq!(r2.total_subsets, 66);
        assert_eq!(r2.groups.len(), 1);
        assert_eq!(r2.groups[0].count, 66);
        let g = &r2.groups[0].gwlp;
        assert_eq!(g.denominator(), 100);
        assert_eq!(&g.numerators()[1..4], &[20, 100, 2100]);

        let r3 = exhaustive_search(&w, 3, &options).unwrap();
        assert_eq!(r3.groups.len(), 1);
        assert_eq!(r3.groups[0].count, 220);
        assert_eq!(r3.groups[0].gwlp.numerators()[3], 1845);
        assert_eq!(r3.groups[0].gwlp.denominator(), 81);
    }

    #[test]
    fn exhaustive_groups_of_oa12_single_removals() {
        let w = build_wstack(&oa12()).unwrap();
        let report = exhaustive_search(&w, 1, &SearchOptions::default()).unwrap();
        assert_eq!(report.total_subsets, 12);
        assert_eq!(report.groups.len(), 2);
        assert_eq!(report.groups[0].count, 10);
        assert_eq!(
            report.groups[0].gwlp.numerators(),
            &[121, 5, 10, 138, 77, 1]
        );
        assert_eq!(report.groups[1].count, 2);
        assert_eq!(
            report.groups[1].gwlp.numerators(),
            &[121, 5, 10, 170, 45, 1]
        );
        assert_eq!(report.groups[1].representatives, vec![vec![3], vec![10]]);
    }

    #[test]
    fn representatives_are_the_lexicographically_smallest_subsets() {
        let w = build_wstack(&pb12()).unwrap();
        let report = exhaustive_search(&w, 2, &SearchOptions::default()).unwrap();
        assert_eq!(
            report.groups[0].representatives,
            vec![vec![1, 2], vec![1, 3], vec![1, 4]]
        );
    }

    #[test]
    fn search_counts_every_subset_once() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for _ in 0..6 {
            let f = random_fraction(&mut rng);
            let n = f.n();
            if n < 4 {
                continue;
            }
            let w = build_wstack(&f).unwrap();
            for p in 1..=3.min(n - 1) {
                let report = exhaustive_search(&w, p, &SearchOptions::default()).unwrap();
                let total: u64 = report.groups.iter().map(|g| g.count).sum();
                assert_eq!(total, report.total_subsets);
                assert_eq!(
                    u128::from(report.total_subsets),
                    binomial(n as u64, p as u64)
                );
                for pair in report.groups.windows(2) {
                    assert!(pair[0].gwlp.numerators() < pair[1].gwlp.numerators());
                }
            }
        }
    }

    #[test]
    fn sequential_and_default_search_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..5 {
            let f = random_fraction(&mut rng);
            let n = f.n();
            if n < 4 {
                continue;
            }
            let w = build_wstack(&f).unwrap();
            for p in 1..=2.min(n - 1) {
                let a = exhaustive_search(&w, p, &SearchOptions::default()).unwrap();
                let b = exhaustive_search_seq(&w, p, &SearchOptions::default()).unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn search_refuses_oversized_sweeps() {
        let w = build_wstack(&pb12()).unwrap();
        let options = SearchOptions {
            max_subsets: 50,
            representatives_per_group: 3,
        };
        match exhaustive_search(&w, 2, &options) {
            Err(Error::Capacity { actual, limit, .. }) => {
                assert_eq!(actual, 66);
                assert_eq!(limit, 50);
            }
            other => panic!("expected a capacity refusal, got {other:?}"),
        }
    }

    #[test]
    fn greedy_single_step_matches_the_ranking() {
        let w = build_wstack(&oa12()).unwrap();
        let steps = greedy_sequential(&w, 1, None).unwrap();
        let ranked = rank_single_removals(&w).unwrap();
        assert_eq!(steps[0].removed, ranked[0].0);
        assert_eq!(steps[0].gwlp, ranked[0].1);
    }

    #[test]
    fn greedy_forced_first_pick_recovers_the_known_second_step() {
        let w = build_wstack(&oa12()).unwrap();
        let steps = greedy_sequential(&w, 2, Some(1)).unwrap();
        assert_eq!(steps[0].removed, 1);
        assert!(steps[1].removed == 6 || steps[1].removed == 9);
        assert_eq!(steps[1].gwlp.numerators()[1], 4);
        assert_eq!(steps[1].gwlp.denominator(), 100);
    }

    #[test]
    fn greedy_is_never_better_than_the_exhaustive_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..6 {
            let f = random_fraction(&mut rng);
            let n = f.n();
            if n < 4 {
                continue;
            }
            let w = build_wstack(&f).unwrap();
            for p in 1..=2.min(n - 1) {
                let greedy = greedy_sequential(&w, p, None).unwrap();
                let exhaustive = exhaustive_search(&w, p, &SearchOptions::default()).unwrap();
                let best = &exhaustive.groups[0].gwlp;
                let last = &greedy.last().unwrap().gwlp;
                assert_ne!(best.gma_cmp(last).unwrap(), std::cmp::Ordering::Greater);
            }
        }
        // and the classic counterexample: unforced greedy on the 12-run array
        // cannot beat the exhaustive pair {3, 10}
        let w = build_wstack(&oa12()).unwrap();
        let greedy = greedy_sequential(&w, 2, None).unwrap();
        let exhaustive = exhaustive_search(&w, 2, &SearchOptions::default()).unwrap();
        assert_eq!(exhaustive.groups[0].gwlp.numerators()[1], 0);
        let contains_pair = exhaustive.groups[0]
            .representatives
            .iter()
            .any(|r| r == &vec![3, 10]);
        assert!(contains_pair);
        assert!(greedy[1].gwlp.numerators()[1] > 0);
    }

    #[test]
    fn unranking_is_exhaustive_and_ordered() {
        let n = 7;
        let p = 3;
        let binom = binomial_table(n, p);
        let total = binomial(n as u64, p as u64) as u64;
        assert_eq!(total, 35);
        let mut seen = Vec::new();
        let mut subset = Vec::new();
        for rank in 0..total {
            unrank_subset(rank, n, p, &binom, &mut subset);
            assert!(subset.windows(2).all(|w| w[0] < w[1]));
            seen.push(subset.clone());
        }
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 35);
        assert_eq!(seen, sorted, "ranks must enumerate in lexicographic order");
    }
}
