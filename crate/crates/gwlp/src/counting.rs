//! Reference implementation of the counting function over the complex coding
//! of factor levels.
//!
//! Level `k` of an `s`-level factor is coded as the root of unity
//! `exp(2πi·k/s)`, and a fraction is represented by the polynomial that
//! counts how often each grid point appears. The coefficients of that
//! polynomial give aberrations, the GWLP, centering and orthogonality
//! queries, and the strength checker.
//!
//! Everything here works in floating point and is meant for desk-scale
//! designs and for cross-checking the exact integer engine in [`crate::wstack`];
//! production ranking always goes through the exact path.

use crate::design::{DesignSpace, Fraction};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::HashMap;

/// Relative tolerance for treating a coefficient as zero, scaled by `c0`.
const ZERO_TOL: f64 = 1e-10;

/// Largest full-factorial size `gwlp_direct` will enumerate.
const DIRECT_GUARD: u64 = 1_000_000;

/// A monomial exponent: entry `j` lives in `0..levels[j]`. The order is the
/// number of non-null entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExponentIndex {
    alpha: Vec<u32>,
    order: usize,
}

impl ExponentIndex {
    pub fn new(space: &DesignSpace, alpha: Vec<u32>) -> Result<Self> {
        if alpha.len() != space.factors() {
            return Err(Error::InvalidExponent(format!(
                "exponent has {} entries, space has {} factors",
                alpha.len(),
                space.factors()
            )));
        }
        for (j, (&a, &s)) in alpha.iter().zip(space.levels()).enumerate() {
            if a >= s {
                return Err(Error::InvalidExponent(format!(
                    "entry {} out of range for factor {} with {} levels",
                    a,
                    j + 1,
                    s
                )));
            }
        }
        let order = alpha.iter().filter(|&&a| a != 0).count();
        Ok(Self { alpha, order })
    }

    pub fn alpha(&self) -> &[u32] {
        &self.alpha
    }

    /// Count of non-null entries.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_null(&self) -> bool {
        self.order == 0
    }

    /// Componentwise negation in the rings `Z_{s_j}`.
    pub fn negated(&self, space: &DesignSpace) -> ExponentIndex {
        let alpha = self
            .alpha
            .iter()
            .zip(space.levels())
            .map(|(&a, &s)| if a == 0 { 0 } else { s - a })
            .collect();
        ExponentIndex::new(space, alpha).expect("negation stays in range")
    }

    /// Componentwise difference `[self − other]` in the rings `Z_{s_j}`.
    pub fn difference(&self, other: &ExponentIndex, space: &DesignSpace) -> Result<ExponentIndex> {
        if self.alpha.len() != other.alpha.len() {
            return Err(Error::InvalidExponent("exponent lengths differ".into()));
        }
        let alpha = self
            .alpha
            .iter()
            .zip(&other.alpha)
            .zip(space.levels())
            .map(|((&a, &b), &s)| (a + s - b) % s)
            .collect();
        ExponentIndex::new(space, alpha)
    }
}

/// Coefficients `c_alpha` of the counting function, indexed by exponent.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    entries: Vec<(ExponentIndex, Complex64)>,
    lookup: HashMap<Vec<u32>, usize>,
    c0: f64,
}

impl CoefficientTable {
    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn entries(&self) -> &[(ExponentIndex, Complex64)] {
        &self.entries
    }

    pub fn get(&self, alpha: &[u32]) -> Option<Complex64> {
        self.lookup.get(alpha).map(|&i| self.entries[i].1)
    }
}

fn root_tables(space: &DesignSpace) -> Vec<Vec<Complex64>> {
    space
        .levels()
        .iter()
        .map(|&s| {
            (0..s)
                .map(|k| {
                    let angle = 2.0 * std::f64::consts::PI * f64::from(k) / f64::from(s);
                    Complex64::new(angle.cos(), angle.sin())
                })
                .collect()
        })
        .collect()
}

fn coefficient_with_roots(
    fraction: &Fraction,
    alpha: &ExponentIndex,
    roots: &[Vec<Complex64>],
) -> Complex64 {
    let levels = fraction.space().levels();
    let mut sum = Complex64::new(0.0, 0.0);
    for (run, mult) in fraction.entries() {
        let mut term = Complex64::new(1.0, 0.0);
        for (j, (&a, &code)) in alpha.alpha().iter().zip(run.codes()).enumerate() {
            if a == 0 {
                continue;
            }
            let k = ((u64::from(a) * u64::from(code)) % u64::from(levels[j])) as usize;
            term *= roots[j][k].conj();
        }
        sum += term * f64::from(*mult);
    }
    sum / fraction.space().full_size() as f64
}

/// Coefficient `c_alpha` of the fraction's counting function:
/// the average over the fraction (with multiplicity) of the conjugated
/// monomial, divided by the grid size.
pub fn coefficient(fraction: &Fraction, alpha: &ExponentIndex) -> Complex64 {
    let roots = root_tables(fraction.space());
    coefficient_with_roots(fraction, alpha, &roots)
}

fn push_alphas_up_to_order(space: &DesignSpace, max_order: usize, out: &mut Vec<Vec<u32>>) {
    let m = space.factors();
    // Depth-first over factor positions; a non-null entry spends one unit of
    // the order budget.
    fn rec(
        levels: &[u32],
        j: usize,
        budget: usize,
        current: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if j == levels.len() {
            out.push(current.clone());
            return;
        }
        current.push(0);
        rec(levels, j + 1, budget, current, out);
        current.pop();
        if budget > 0 {
            for a in 1..levels[j] {
                current.push(a);
                rec(levels, j + 1, budget - 1, current, out);
                current.pop();
            }
        }
    }
    let mut current = Vec::with_capacity(m);
    rec(space.levels(), 0, max_order, &mut current, out);
}

/// All coefficients `c_alpha` with order at most `max_order`.
pub fn coefficient_table(fraction: &Fraction, max_order: usize) -> Result<CoefficientTable> {
    let space = fraction.space();
    if max_order > space.factors() {
        return Err(Error::InvalidExponent(format!(
            "max order {} exceeds factor count {}",
            max_order,
            space.factors()
        )));
    }
    let roots = root_tables(space);
    let mut alphas = Vec::new();
    push_alphas_up_to_order(space, max_order, &mut alphas);
    let mut entries = Vec::with_capacity(alphas.len());
    let mut lookup = HashMap::with_capacity(alphas.len());
    for alpha in alphas {
        let idx = ExponentIndex::new(space, alpha.clone())?;
        let c = coefficient_with_roots(fraction, &idx, &roots);
        lookup.insert(alpha, entries.len());
        entries.push((idx, c));
    }
    let c0 = fraction.n() as f64 / space.full_size() as f64;
    Ok(CoefficientTable {
        entries,
        lookup,
        c0,
    })
}

/// Aberration of the interaction indexed by a non-null exponent: the squared
/// modulus of `c_alpha` normalized by `c_0`.
pub fn aberration(fraction: &Fraction, alpha: &ExponentIndex) -> Result<f64> {
    if alpha.is_null() {
        return Err(Error::InvalidExponent(
            "aberration of the null exponent is excluded".into(),
        ));
    }
    let c = coefficient(fraction, alpha);
    let c0 = fraction.n() as f64 / fraction.space().full_size() as f64;
    Ok(c.norm_sqr() / (c0 * c0))
}

/// GWLP by direct summation of aberrations over the whole exponent set.
/// Floating point; guarded to grids of at most a million points.
pub fn gwlp_direct(fraction: &Fraction) -> Result<Vec<f64>> {
    let space = fraction.space();
    if space.full_size() > DIRECT_GUARD {
        return Err(Error::Capacity {
            what: "full factorial size for direct GWLP",
            actual: space.full_size() as u128,
            limit: DIRECT_GUARD as u128,
        });
    }
    let roots = root_tables(space);
    let m = space.factors();
    let c0 = fraction.n() as f64 / space.full_size() as f64;
    let mut acc = vec![0.0f64; m + 1];
    let mut alpha = vec![0u32; m];
    loop {
        let order = alpha.iter().filter(|&&a| a != 0).count();
        let idx = ExponentIndex::new(space, alpha.clone())?;
        let c = coefficient_with_roots(fraction, &idx, &roots);
        acc[order] += c.norm_sqr() / (c0 * c0);
        // next exponent in mixed radix
        let mut j = 0;
        loop {
            if j == m {
                return Ok(acc);
            }
            alpha[j] += 1;
            if alpha[j] < space.levels()[j] {
                break;
            }
            alpha[j] = 0;
            j += 1;
        }
    }
}

/// Whether the monomial indexed by `alpha` averages to zero over the
/// fraction, up to tolerance relative to `c_0`.
pub fn is_centered(fraction: &Fraction, alpha: &ExponentIndex) -> bool {
    let c = coefficient(fraction, alpha);
    let c0 = fraction.n() as f64 / fraction.space().full_size() as f64;
    c.norm() < ZERO_TOL * c0
}

/// Whether the monomials indexed by `alpha` and `beta` are orthogonal over
/// the fraction, i.e. the coefficient at `[alpha − beta]` vanishes.
pub fn are_orthogonal(
    fraction: &Fraction,
    alpha: &ExponentIndex,
    beta: &ExponentIndex,
) -> Result<bool> {
    let diff = alpha.difference(beta, fraction.space())?;
    Ok(is_centered(fraction, &diff))
}

fn for_each_combination(m: usize, t: usize, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    // Lexicographic enumeration; `visit` returns false to abort.
    let mut idx: Vec<usize> = (0..t).collect();
    loop {
        if !visit(&idx) {
            return false;
        }
        // successor
        let mut j = t;
        loop {
            if j == 0 {
                return true;
            }
            j -= 1;
            if idx[j] != j + m - t {
                break;
            }
            if j == 0 {
                return true;
            }
        }
        idx[j] += 1;
        for k in j + 1..t {
            idx[k] = idx[k - 1] + 1;
        }
    }
}

fn projects_factorially(fraction: &Fraction, subset: &[usize]) -> bool {
    let levels = fraction.space().levels();
    let mut combos: u64 = 1;
    for &j in subset {
        combos *= u64::from(levels[j]);
    }
    let n = fraction.n() as u64;
    if !n.is_multiple_of(combos) {
        return false;
    }
    let expected = n / combos;
    let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
    for (run, mult) in fraction.entries() {
        let key: Vec<u32> = subset.iter().map(|&j| run.codes()[j]).collect();
        *counts.entry(key).or_insert(0) += u64::from(*mult);
    }
    counts.len() as u64 == combos && counts.values().all(|&c| c == expected)
}

/// Largest `t` such that every projection onto `t` factors is a full
/// factorial repeated equally often. Integer counting throughout; returns 0
/// when even some single-factor projection is unbalanced, and `m` for a
/// (replicated) full factorial.
pub fn strength(fraction: &Fraction) -> usize {
    let m = fraction.space().factors();
    let mut t = 0;
    // Factorial projection onto all t-subsets implies the same for smaller
    // subsets, so stopping at the first failing t is sound.
    for candidate in 1..=m {
        let all_good = for_each_combination(m, candidate, |subset| {
            projects_factorially(fraction, subset)
        });
        if all_good {
            t = candidate;
        } else {
            break;
        }
    }
    t
}
