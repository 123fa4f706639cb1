//! Exact integer engine for GWLP computation.
//!
//! For every ordered pair of runs `(f, g)` and every order `j`, the matrix
//! `W_j` holds the sum over all `j`-subsets of factors of the products of the
//! per-coordinate agreement values: `s_i − 1` where the two runs agree in
//! coordinate `i`, and `−1` where they differ. The GWLP of the fraction is
//! recovered as `A_j = (Σ_{f,g} W_j(f,g)) / n²`, and the GWLP of any
//! sub-fraction is the same sum restricted to the surviving rows and columns.
//!
//! All entries are integers, so patterns derived here are exact; the float
//! oracle in [`crate::counting`] is only used to cross-check this module.

use crate::design::{DesignSpace, Fraction, GwlpExact, Run};
use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Guard on total `(m+1)·n²` stored entries (8 bytes each).
const ENTRY_GUARD: u128 = 1 << 28;

/// Per-coordinate agreement values for one pair of runs: entry `i` is
/// `s_i − 1` when the runs share the level of factor `i`, and `−1` otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SVector {
    values: Vec<i64>,
}

impl SVector {
    pub fn values(&self) -> &[i64] {
        &self.values
    }
}

/// Agreement vector of a pair of runs in the given space.
pub fn s_vector(space: &DesignSpace, f: &Run, g: &Run) -> Result<SVector> {
    space.check_run(f)?;
    space.check_run(g)?;
    let values = space
        .levels()
        .iter()
        .zip(f.codes().iter().zip(g.codes()))
        .map(|(&s, (&a, &b))| if a == b { i64::from(s) - 1 } else { -1 })
        .collect();
    Ok(SVector { values })
}

/// All elementary symmetric values `e_0..e_m` of an agreement vector,
/// computed by expanding the product `∏_i (1 + v_i·x)` in O(m²).
pub fn w_entries_all_orders(svec: &SVector) -> Vec<i64> {
    let m = svec.values.len();
    let mut e = vec![0i64; m + 1];
    e[0] = 1;
    for (i, &v) in svec.values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e
}

fn orders_for_pair(levels: &[u32], f: &Run, g: &Run, e: &mut [i64]) {
    e.fill(0);
    e[0] = 1;
    for (i, (&s, (&a, &b))) in levels
        .iter()
        .zip(f.codes().iter().zip(g.codes()))
        .enumerate()
    {
        let v = if a == b { i64::from(s) - 1 } else { -1 };
        for j in (1..=i + 1).rev() {
            e[j] += v * e[j - 1];
        }
    }
}

/// The stack of matrices `W_0..W_m` for one fraction, with cached full sums
/// and row sums. Row order is the fraction's run order; replicated runs
/// occupy their own rows.
#[derive(Debug, Clone)]
pub struct WStack {
    space: DesignSpace,
    n: usize,
    /// `matrices[j]` is the row-major `n×n` matrix of order `j`.
    matrices: Vec<Vec<i64>>,
    /// `totals[j] = Σ_{f,g} W_j(f,g)`.
    totals: Vec<i128>,
    /// `row_sums[j][f] = Σ_g W_j(f,g)`.
    row_sums: Vec<Vec<i128>>,
}

impl WStack {
    fn from_matrices(space: DesignSpace, n: usize, matrices: Vec<Vec<i64>>) -> Self {
        let row_sums: Vec<Vec<i128>> = matrices
            .iter()
            .map(|mat| {
                (0..n)
                    .map(|r| mat[r * n..(r + 1) * n].iter().map(|&x| i128::from(x)).sum())
                    .collect()
            })
            .collect();
        let totals = row_sums.iter().map(|rs| rs.iter().sum()).collect();
        WStack {
            space,
            n,
            matrices,
            totals,
            row_sums,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of factors `m`.
    pub fn factors(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn space(&self) -> &DesignSpace {
        &self.space
    }

    pub fn entry(&self, order: usize, row: usize, col: usize) -> i64 {
        self.matrices[order][row * self.n + col]
    }

    /// Row-major `n×n` matrix of the given order.
    pub fn matrix(&self, order: usize) -> &[i64] {
        &self.matrices[order]
    }

    pub fn row_sum(&self, order: usize, row: usize) -> i128 {
        self.row_sums[order][row]
    }

    pub(crate) fn total(&self, order: usize) -> i128 {
        self.totals[order]
    }
}

fn check_build_guards(fraction: &Fraction) -> Result<()> {
    let n = fraction.n() as u128;
    let m1 = fraction.space().factors() as u128 + 1;
    let entries = n * n * m1;
    if entries > ENTRY_GUARD {
        return Err(Error::Capacity {
            what: "W stack entries",
            actual: entries,
            limit: ENTRY_GUARD,
        });
    }
    // Entries are bounded by the grid size, and every partial product in the
    // symmetric-polynomial expansion is bounded by it too; keep a margin so
    // plain i64 arithmetic cannot wrap.
    if fraction.space().full_size() > (1u64 << 62) {
        return Err(Error::Capacity {
            what: "full factorial size for W entries",
            actual: fraction.space().full_size() as u128,
            limit: 1 << 62,
        });
    }
    Ok(())
}

/// Upper-triangle block for row `r`: the `m+1` order values of every pair
/// `(r, c)` with `c >= r`, concatenated.
fn row_block(levels: &[u32], runs: &[&Run], r: usize) -> Vec<i64> {
    let m1 = levels.len() + 1;
    let mut out = vec![0i64; (runs.len() - r) * m1];
    for c in r..runs.len() {
        let at = (c - r) * m1;
        orders_for_pair(levels, runs[r], runs[c], &mut out[at..at + m1]);
    }
    out
}

fn assemble(space: &DesignSpace, n: usize, blocks: Vec<Vec<i64>>) -> WStack {
    let m1 = space.factors() + 1;
    let mut matrices = vec![vec![0i64; n * n]; m1];
    for (r, block) in blocks.into_iter().enumerate() {
        for c in r..n {
            let at = (c - r) * m1;
            for (j, mat) in matrices.iter_mut().enumerate() {
                let v = block[at + j];
                mat[r * n + c] = v;
                mat[c * n + r] = v;
            }
        }
    }
    WStack::from_matrices(space.clone(), n, matrices)
}

/// Build the full matrix stack for a fraction, filling pairs of the upper
/// triangle in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn build_wstack(fraction: &Fraction) -> Result<WStack> {
    check_build_guards(fraction)?;
    let runs = fraction.expanded_runs();
    let n = runs.len();
    let levels = fraction.space().levels();
    let blocks: Vec<Vec<i64>> = (0..n)
        .into_par_iter()
        .map(|r| row_block(levels, &runs, r))
        .collect();
    Ok(assemble(fraction.space(), n, blocks))
}

/// Build the full matrix stack for a fraction (sequential build).
#[cfg(not(feature = "parallel"))]
pub fn build_wstack(fraction: &Fraction) -> Result<WStack> {
    build_wstack_seq(fraction)
}

/// Sequential stack construction; always available, and the reference the
/// parallel build is benchmarked and tested against.
pub fn build_wstack_seq(fraction: &Fraction) -> Result<WStack> {
    check_build_guards(fraction)?;
    let runs = fraction.expanded_runs();
    let n = runs.len();
    let levels = fraction.space().levels();
    let blocks: Vec<Vec<i64>> = (0..n).map(|r| row_block(levels, &runs, r)).collect();
    Ok(assemble(fraction.space(), n, blocks))
}

/// Exact GWLP from a matrix stack: numerator `j` is the full sum of `W_j`,
/// the denominator is `n²`.
pub fn gwlp_from_wstack(w: &WStack) -> Result<GwlpExact> {
    let numerators = w
        .totals
        .iter()
        .map(|&t| {
            u64::try_from(t).map_err(|_| Error::Capacity {
                what: "GWLP numerator",
                actual: t.unsigned_abs(),
                limit: u64::MAX as u128,
            })
        })
        .collect::<Result<Vec<u64>>>()?;
    GwlpExact::new(numerators, w.n as u64)
}

/// Marginal `w_{j,f}`: the row plus column sum of `W_j` at run `f` (0-based)
/// minus the diagonal entry. Removing run `f` lowers the order-`j` numerator
/// by exactly this amount.
pub fn w_marginal(w: &WStack, order: usize, run_index: usize) -> Result<i64> {
    if order >= w.matrices.len() {
        return Err(Error::InvalidExponent(format!(
            "order {} exceeds factor count {}",
            order,
            w.factors()
        )));
    }
    if run_index >= w.n {
        return Err(Error::InvalidSubset(format!(
            "run index {} out of range for {} runs",
            run_index + 1,
            w.n
        )));
    }
    let value = 2 * w.row_sums[order][run_index] - i128::from(w.entry(order, run_index, run_index));
    i64::try_from(value).map_err(|_| Error::Capacity {
        what: "W marginal",
        actual: value.unsigned_abs(),
        limit: i64::MAX as u128,
    })
}

/// GWLP of any single design point: entry `j` is the elementary symmetric
/// value `e_j(s_1−1, …, s_m−1)`, independent of the point. For a symmetric
/// `s^m` space this is `C(m,j)·(s−1)^j`.
pub fn singleton_gwlp(space: &DesignSpace) -> Vec<u64> {
    let m = space.factors();
    let mut e = vec![0u128; m + 1];
    e[0] = 1;
    for (i, &s) in space.levels().iter().enumerate() {
        let v = u128::from(s) - 1;
        for j in (1..=i + 1).rev() {
            e[j] += v * e[j - 1];
        }
    }
    e.into_iter().map(|x| x as u64).collect()
}

/// Exact GWLP of the concatenation of several fractions over one space.
/// The cross contributions between parts are exactly the off-block sums of
/// the union's matrix stack, so the union pattern is computed by building
/// that stack directly.
pub fn union_gwlp(parts: &[Fraction]) -> Result<GwlpExact> {
    let Some(first) = parts.first() else {
        return Err(Error::InvalidFraction("union of no parts".into()));
    };
    let space = first.space();
    let mut entries = Vec::new();
    for part in parts {
        if part.space() != space {
            return Err(Error::SpaceMismatch);
        }
        entries.extend(part.entries().iter().cloned());
    }
    let union = Fraction::with_multiplicities(space.clone(), entries)?;
    gwlp_from_wstack(&build_wstack(&union)?)
}

/// Matrix stack for two-level fractions via the order recursion:
/// `W_0 = J`, `W_1 = X·Xᵗ` for the ±1 design matrix `X` (code 0 ↦ +1,
/// code 1 ↦ −1), and
///
/// ```text
/// j·W_j = W_1 ∘ W_{j−1} − (m − j + 2)·W_{j−2}      j = 2, …, m
/// ```
///
/// with `∘` the entrywise product. Every division by `j` is exact and is
/// checked. Produces the same stack as [`build_wstack`].
///
/// A variant of this recursion with a `1/j!` normalization and an extra
/// `(j−1)` factor circulates; it agrees at `j = 2` but not beyond (at
/// `m = 5`, Hamming distance 1 it yields −3 at order 3 where the subset-sum
/// definition gives −2). The form above is the one consistent with that
/// definition; a regression test pins the difference.
pub fn twolevel_wstack(fraction: &Fraction) -> Result<WStack> {
    let space = fraction.space();
    if space.levels().iter().any(|&s| s != 2) {
        return Err(Error::Unsupported(
            "the order recursion requires every factor to have two levels".into(),
        ));
    }
    check_build_guards(fraction)?;
    let runs = fraction.expanded_runs();
    let n = runs.len();
    let m = space.factors();
    let signs: Vec<Vec<i64>> = runs
        .iter()
        .map(|r| r.codes().iter().map(|&c| 1 - 2 * i64::from(c)).collect())
        .collect();

    let mut matrices = vec![vec![0i64; n * n]; m + 1];
    matrices[0].fill(1);
    if m >= 1 {
        for r in 0..n {
            for c in r..n {
                let dot: i64 = signs[r].iter().zip(&signs[c]).map(|(a, b)| a * b).sum();
                matrices[1][r * n + c] = dot;
                matrices[1][c * n + r] = dot;
            }
        }
    }
    for j in 2..=m {
        let (done, current) = matrices.split_at_mut(j);
        let w1 = &done[1];
        let wj1 = &done[j - 1];
        let wj2 = &done[j - 2];
        let scale = (m - j + 2) as i64;
        for idx in 0..n * n {
            let combined = w1[idx] * wj1[idx] - scale * wj2[idx];
            if combined % (j as i64) != 0 {
                return Err(Error::Internal(format!(
                    "order {} recursion produced a non-divisible value {}",
                    j, combined
                )));
            }
            current[0][idx] = combined / j as i64;
        }
    }
    Ok(WStack::from_matrices(space.clone(), n, matrices))
}
