//! Bracket sets of extracted interlaced games and their verification suite.
//!
//! `<M, p, x, y>` collects every extraction of `interlace_power(M, p)`
//! whose row set keeps exactly `ceil(m*x)` rows in each component and whose
//! column set has exactly `ceil(n^p * y)` columns. The complexity of such a
//! set is the minimum complexity over its members; the checkers in this
//! module evaluate the inequalities that relate these set complexities
//! under projection, balancing, splitting, transposition, and single bits
//! of communication, on grids small enough for total enumeration.
//!
//! All thresholds are exact rationals; fractional powers of `y` are
//! compared through integer powers, never through floating point.

use std::collections::HashSet;

use itertools::Itertools;
use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::error::{Error, Result};
use crate::interlace::{alternating_game, interlace_power, phi_zero};
use crate::matrix::{CellGuard, GameMatrix};
use crate::report::LemmaReport;
use crate::selection::{
    balance_selection, extract, is_equipartitioned, max_projection, split_projection, Threshold,
};
use crate::solver::{solve_exact, SolveOutcome, SolvePolicy};
use crate::subgame::{is_subgame, set_is_subgame};

/// A bracket set: base game, interlace count, row fraction, column fraction.
#[derive(Debug, Clone)]
pub struct BracketSpec {
    pub base: GameMatrix,
    pub p: u32,
    pub x: Threshold,
    pub y: Threshold,
}

impl BracketSpec {
    pub fn new(base: GameMatrix, p: u32, x: Threshold, y: Threshold) -> Result<BracketSpec> {
        if p == 0 {
            return Err(Error::Domain("bracket needs at least one component".into()));
        }
        let one = Ratio::one();
        if x <= Ratio::zero() || x > one || y <= Ratio::zero() || y > one {
            return Err(Error::Domain("fractions must lie in (0, 1]".into()));
        }
        Ok(BracketSpec { base, p, x, y })
    }

    /// Rows kept per component: `ceil(m * x)`.
    pub fn t(&self) -> u64 {
        ceil_mul(self.base.rows() as u64, *self.x.numer() as u64, *self.x.denom() as u64)
    }

    /// Columns kept: `ceil(n^p * y)`.
    pub fn col_count(&self) -> Result<u64> {
        let n_pow = pow_u64(self.base.cols() as u64, self.p)
            .ok_or_else(|| Error::Size("column space n^p overflows".into()))?;
        Ok(ceil_mul(n_pow, *self.y.numer() as u64, *self.y.denom() as u64))
    }

    pub fn member_count(&self) -> Result<BigUint> {
        let n_pow = pow_u64(self.base.cols() as u64, self.p)
            .ok_or_else(|| Error::Size("column space n^p overflows".into()))?;
        Ok(member_count_by(self.base.rows() as u64, self.t(), self.p, n_pow, self.col_count()?))
    }
}

fn member_count_by(m: u64, t: u64, p: u32, n_pow: u64, cc: u64) -> BigUint {
    binomial(m, t).pow(p) * binomial(n_pow, cc)
}

/// `ceil(n * num / den)` in exact integer arithmetic.
pub fn ceil_mul(n: u64, num: u64, den: u64) -> u64 {
    let prod = n as u128 * num as u128;
    ((prod + den as u128 - 1) / den as u128) as u64
}

fn pow_u64(base: u64, exp: u32) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Smallest `c >= 1` with `(c / n_pow)^v >= (ynum / yden)^u`, i.e. the
/// column count `ceil(n_pow * y^(u/v))`, compared through integer powers.
pub fn ceil_pow_fraction(n_pow: u64, ynum: u64, yden: u64, u: u32, v: u32) -> u64 {
    let rhs = BigUint::from(n_pow).pow(v) * BigUint::from(ynum).pow(u);
    let scale = BigUint::from(yden).pow(u);
    let (mut lo, mut hi) = (1u64, n_pow);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if BigUint::from(mid).pow(v) * &scale >= rhs {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Smallest integer `t >= 0` with `2^t >= p + log2(ynum/yden)`, clamped at
/// zero; this is the rank-based floor on the complexity of bit-string
/// column sets.
pub fn rank_claim_bound(p: u32, ynum: u64, yden: u64) -> u32 {
    for t in 0u32.. {
        let two_t = 1u64 << t.min(40);
        // 2^t - p >= log2(y)  <=>  2^(2^t - p) >= y
        let ok = if two_t >= p as u64 {
            BigUint::from(yden) << (two_t - p as u64) as usize >= BigUint::from(ynum)
        } else {
            BigUint::from(yden) >= BigUint::from(ynum) << (p as u64 - two_t) as usize
        };
        if ok {
            return t;
        }
    }
    unreachable!()
}

/// One enumerated member with the selection that produced it.
#[derive(Debug, Clone)]
pub struct BracketMember {
    pub matrix: GameMatrix,
    pub rows: Vec<usize>,
    pub cols: Vec<u64>,
}

/// Streams every member of the bracket set exactly once, in lexicographic
/// `(R, C)` order. Refuses sets larger than `limit`.
pub fn enumerate_bracket(
    spec: &BracketSpec,
    guard: CellGuard,
    limit: u64,
) -> Result<BracketIter> {
    enumerate_bracket_by_counts(&spec.base, spec.p, spec.t(), spec.col_count()?, guard, limit)
}

/// Same enumeration parameterized directly by the integer counts: `t` rows
/// per component and `cc` columns.
pub fn enumerate_bracket_by_counts(
    base: &GameMatrix,
    p: u32,
    t: u64,
    cc: u64,
    guard: CellGuard,
    limit: u64,
) -> Result<BracketIter> {
    if t < 1 {
        return Err(Error::Domain("brackets need at least one row per component".into()));
    }
    let (m, n) = (base.rows() as u64, base.cols() as u64);
    if t > m {
        return Err(Error::Domain(format!("cannot keep {t} rows out of {m} per component")));
    }
    let n_pow = pow_u64(n, p).ok_or_else(|| Error::Size("column space n^p overflows".into()))?;
    if cc < 1 || cc > n_pow {
        return Err(Error::Domain(format!("column count {cc} out of range (1..={n_pow})")));
    }
    let count = member_count_by(m, t, p, n_pow, cc);
    if count > BigUint::from(limit) {
        return Err(Error::Size(format!(
            "bracket set has {count} members, over the limit of {limit}"
        )));
    }
    let ambient = interlace_power(base, p, guard)?;
    // All per-component row choices, assembled into full row sets in
    // lexicographic order (component 0 varies slowest).
    let per_block: Vec<Vec<usize>> = (0..m as usize).combinations(t as usize).collect();
    let mut row_choices: Vec<Vec<usize>> = vec![Vec::new()];
    for gamma in 0..p as usize {
        let mut next = Vec::with_capacity(row_choices.len() * per_block.len());
        for prefix in &row_choices {
            for block in &per_block {
                let mut rows = prefix.clone();
                rows.extend(block.iter().map(|r| gamma * m as usize + r));
                next.push(rows);
            }
        }
        row_choices = next;
    }
    Ok(BracketIter {
        ambient,
        row_choices,
        row_idx: 0,
        n_pow,
        cc: cc as usize,
        col_iter: None,
    })
}

pub struct BracketIter {
    ambient: GameMatrix,
    row_choices: Vec<Vec<usize>>,
    row_idx: usize,
    n_pow: u64,
    cc: usize,
    col_iter: Option<itertools::Combinations<std::ops::Range<u64>>>,
}

impl Iterator for BracketIter {
    type Item = BracketMember;

    fn next(&mut self) -> Option<BracketMember> {
        loop {
            if self.col_iter.is_none() {
                if self.row_idx >= self.row_choices.len() {
                    return None;
                }
                self.col_iter = Some((0..self.n_pow).combinations(self.cc));
            }
            match self.col_iter.as_mut().unwrap().next() {
                Some(cols) => {
                    let rows = self.row_choices[self.row_idx].clone();
                    let matrix = extract(&self.ambient, &rows, &cols)
                        .expect("enumerated selections are valid");
                    return Some(BracketMember { matrix, rows, cols });
                }
                None => {
                    self.col_iter = None;
                    self.row_idx += 1;
                }
            }
        }
    }
}

/// Minimum exact complexity over all members of the bracket set. Later
/// members are solved under a budget one below the best depth seen, so
/// most of the enumeration is settled by fast infeasibility proofs.
pub fn bracket_complexity(
    spec: &BracketSpec,
    guard: CellGuard,
    limit: u64,
    policy: &SolvePolicy,
) -> Result<u32> {
    bracket_complexity_by_counts(&spec.base, spec.p, spec.t(), spec.col_count()?, guard, limit, policy)
}

pub fn bracket_complexity_by_counts(
    base: &GameMatrix,
    p: u32,
    t: u64,
    cc: u64,
    guard: CellGuard,
    limit: u64,
    policy: &SolvePolicy,
) -> Result<u32> {
    let mut best: Option<u32> = None;
    for member in enumerate_bracket_by_counts(base, p, t, cc, guard, limit)? {
        if best == Some(0) {
            break;
        }
        let budget = best.map(|b| b - 1);
        match solve_exact(&member.matrix, budget, policy)? {
            SolveOutcome::Solved { depth, .. } => best = Some(depth),
            SolveOutcome::ExceedsBudget { .. } => {}
        }
    }
    best.ok_or_else(|| Error::Domain("bracket set is empty".into()))
}

/// Memoizing wrapper over set complexities, keyed by base matrix, component
/// count, per-component row quota, and column count. The lemma grids hit
/// the same sets many times.
struct DCache<'a> {
    bases: Vec<GameMatrix>,
    map: std::collections::HashMap<(usize, u32, u64, u64), u32>,
    policy: &'a SolvePolicy,
    guard: CellGuard,
    limit: u64,
}

impl<'a> DCache<'a> {
    fn new(bases: Vec<GameMatrix>, policy: &'a SolvePolicy, guard: CellGuard) -> Self {
        DCache { bases, map: Default::default(), policy, guard, limit: 200_000 }
    }

    fn d(&mut self, base_idx: usize, p: u32, t: u64, cc: u64) -> Result<u32> {
        let key = (base_idx, p, t, cc);
        if let Some(&d) = self.map.get(&key) {
            return Ok(d);
        }
        let d = bracket_complexity_by_counts(
            &self.bases[base_idx].clone(),
            p,
            t,
            cc,
            self.guard,
            self.limit,
            self.policy,
        )?;
        self.map.insert(key, d);
        Ok(d)
    }
}

fn ratio_str(r: Threshold) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn t_of(m: usize, x: Threshold) -> u64 {
    ceil_mul(m as u64, *x.numer() as u64, *x.denom() as u64)
}

fn cc_of(n: usize, p: u32, y: Threshold) -> u64 {
    ceil_mul(pow_u64(n as u64, p).unwrap(), *y.numer() as u64, *y.denom() as u64)
}

const LEMMA_IDS: &[&str] = &[
    "monotonicity",
    "subprotocol-bounds",
    "extended-product",
    "extended-max",
    "extended-balancing",
    "transpose-bracket",
    "old-partition",
    "partition",
    "rank-claim",
    "subgame-easier",
];

pub fn lemma_ids() -> &'static [&'static str] {
    LEMMA_IDS
}

/// Runs one named checker over its declared small grid.
pub fn run_lemma_suite(
    id: &str,
    grid: &str,
    seed: u64,
    policy: &SolvePolicy,
    guard: CellGuard,
) -> Result<LemmaReport> {
    if grid != "small" {
        return Err(Error::Usage(format!("unknown grid preset '{grid}' (expected 'small')")));
    }
    match id {
        "monotonicity" => monotonicity_suite(seed, policy, guard),
        "subprotocol-bounds" => subprotocol_suite(seed, policy, guard),
        "extended-product" => extended_product_suite(seed, policy, guard),
        "extended-max" => extended_max_suite(seed, policy, guard),
        "extended-balancing" => extended_balancing_suite(seed, policy, guard),
        "transpose-bracket" => transpose_bracket_suite(seed, policy, guard),
        "old-partition" => old_partition_suite(seed, policy, guard),
        "partition" => partition_suite(seed, policy, guard),
        "rank-claim" => rank_claim_suite(seed, policy, guard),
        "subgame-easier" => subgame_easier_suite(seed, policy, guard),
        other => Err(Error::Usage(format!(
            "unknown lemma id '{other}' (expected one of {})",
            LEMMA_IDS.join(", ")
        ))),
    }
}

fn fractions(list: &[(i64, i64)]) -> Vec<Threshold> {
    list.iter().map(|&(n, d)| Ratio::new(n, d)).collect()
}

/// Growing any bracket argument can only raise the set complexity.
fn monotonicity_suite(seed: u64, policy: &SolvePolicy, guard: CellGuard) -> Result<LemmaReport> {
    let bases = vec![phi_zero(), GameMatrix::new(vec![vec![1, 0], vec![0, 1]], 2).unwrap()];
    let names = ["phi0", "identity2"];
    let ps = [1u32, 2];
    let xs = fractions(&[(1, 2), (1, 1)]);
    let ys = fractions(&[(1, 2), (3, 4), (1, 1)]);
    let grid = json!({"bases": names, "p": ps, "x": ["1/2","1/1"], "y": ["1/2","3/4","1/1"]});
    let mut report = LemmaReport::new("monotonicity", grid, seed);
    let mut cache = DCache::new(bases.clone(), policy, guard);
    for (bi, base) in bases.iter().enumerate() {
        let mut points: Vec<(u32, Threshold, Threshold)> = Vec::new();
        for &p in &ps {
            for &x in &xs {
                for &y in &ys {
                    points.push((p, x, y));
                }
            }
        }
        for &(p_small, x_small, y_small) in &points {
            for &(p_big, x_big, y_big) in &points {
                let comparable = p_small <= p_big && x_small <= x_big && y_small <= y_big;
                let distinct = (p_small, x_small, y_small) != (p_big, x_big, y_big);
                if !comparable || !distinct {
                    continue;
                }
                let d_small = cache.d(
                    bi,
                    p_small,
                    t_of(base.rows(), x_small),
                    cc_of(base.cols(), p_small, y_small),
                )?;
                let d_big = cache.d(
                    bi,
                    p_big,
                    t_of(base.rows(), x_big),
                    cc_of(base.cols(), p_big, y_big),
                )?;
                report.record(
                    d_small <= d_big,
                    json!({
                        "base": names[bi],
                        "small": [p_small, ratio_str(x_small), ratio_str(y_small)],
                        "big": [p_big, ratio_str(x_big), ratio_str(y_big)],
                    }),
                    json!(d_small),
                    json!(d_big),
                );
            }
        }
    }
    Ok(report.finish())
}

/// `k + m + D<M,p,x,y> >= D<M,p,min(1,2^k x),min(1,2^m y)>`: extra bits of
/// communication buy at most proportionally larger surviving fractions.
fn subprotocol_suite(seed: u64, policy: &SolvePolicy, guard: CellGuard) -> Result<LemmaReport> {
    let phi1 = alternating_game(2, 1, guard)?;
    let bases = vec![phi_zero(), phi1];
    let names = ["phi0", "phi1_b2"];
    let configs: [(usize, &[u32]); 2] = [(0, &[2, 3]), (1, &[1, 2])];
    let fr = fractions(&[(1, 4), (1, 2), (1, 1)]);
    let grid = json!({
        "bases": names, "p": {"phi0": [2,3], "phi1_b2": [1,2]},
        "k": [0,1,2], "m": [0,1,2], "x": ["1/4","1/2","1/1"], "y": ["1/4","1/2","1/1"],
    });
    let mut report = LemmaReport::new("subprotocol-bounds", grid, seed);
    let mut cache = DCache::new(bases.clone(), policy, guard);
    let one = Ratio::one();
    for &(bi, ps) in &configs {
        let base = &bases[bi];
        for &p in ps {
            for &x in &fr {
                for &y in &fr {
                    for k in 0u32..=2 {
                        for mb in 0u32..=2 {
                            let x_up = (x * Ratio::from_integer(1i64 << k)).min(one);
                            let y_up = (y * Ratio::from_integer(1i64 << mb)).min(one);
                            let lhs = k
                                + mb
                                + cache.d(bi, p, t_of(base.rows(), x), cc_of(base.cols(), p, y))?;
                            let rhs = cache.d(
                                bi,
                                p,
                                t_of(base.rows(), x_up),
                                cc_of(base.cols(), p, y_up),
                            )?;
                            report.record(
                                lhs >= rhs,
                                json!({
                                    "base": names[bi], "p": p, "k": k, "m": mb,
                                    "x": ratio_str(x), "y": ratio_str(y),
                                }),
                                json!(lhs),
                                json!(rhs),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(report.finish())
}

/// Splitting a member's rows lands the two split projections in brackets
/// with halved row fraction and column fractions multiplying to at least
/// the original.
fn extended_product_suite(seed: u64, policy: &SolvePolicy, guard: CellGuard) -> Result<LemmaReport> {
    let _ = policy;
    let base = phi_zero();
    let ys = fractions(&[(3, 4), (1, 1)]);
    let grid = json!({"base": "phi0", "p": [2,3], "x": "1/1", "y": ["3/4","1/1"]});
    let mut report = LemmaReport::new("extended-product", grid, seed);
    let t: Threshold = Ratio::one(); // x = 1, m = 1
    for p in [2u32, 3] {
        let ambient = interlace_power(&base, p, guard)?;
        for &y in &ys {
            let spec = BracketSpec::new(base.clone(), p, Ratio::one(), y)?;
            for member in enumerate_bracket(&spec, guard, 100_000)? {
                // Ordered binary partitions of the member's rows.
                for pick in 0..(1u64 << member.rows.len()) {
                    let (mut r1, mut r2) = (Vec::new(), Vec::new());
                    for (i, &r) in member.rows.iter().enumerate() {
                        if (pick >> i) & 1 == 1 {
                            r1.push(r);
                        } else {
                            r2.push(r);
                        }
                    }
                    let instance = json!({
                        "p": p, "y": ratio_str(y), "cols": member.cols, "r1": r1,
                    });
                    match split_projection(&base, p, &r1, &r2, &member.cols, t) {
                        Err(Error::Precondition(_)) => {
                            // Degenerate splits (a side losing every
                            // component) are rejected by contract.
                            report.record_pass();
                        }
                        Err(e) => return Err(e),
                        Ok((part1, part2)) => {
                            let mut ok = part1.ell + part2.ell == p;
                            ok &= part1.selection.cols.len() as u128
                                * part2.selection.cols.len() as u128
                                >= member.cols.len() as u128;
                            for (part, own_rows) in [(&part1, &r1), (&part2, &r2)] {
                                ok &= is_equipartitioned(
                                    &part.selection.rows,
                                    base.rows(),
                                    t / 2,
                                    part.ell,
                                );
                                let small = extract(
                                    &interlace_power(&base, part.ell, guard)?,
                                    &part.selection.rows,
                                    &part.selection.cols,
                                )?;
                                let host = extract(&ambient, own_rows, &member.cols)?;
                                ok &= is_subgame(&small, &host).is_some();
                            }
                            report.record(
                                ok,
                                instance,
                                json!([part1.ell, part1.selection.cols.len()]),
                                json!([part2.ell, part2.selection.cols.len()]),
                            );
                        }
                    }
                }
            }
        }
    }
    Ok(report.finish())
}

/// `D<M,p,x,y> >= D<M,l,x,y^(l/p)>`, through both the window-projection
/// witnesses and exact complexities of both sets.
fn extended_max_suite(seed: u64, policy: &SolvePolicy, guard: CellGuard) -> Result<LemmaReport> {
    let base = phi_zero();
    let ys = fractions(&[(1, 2), (3, 4), (1, 1)]);
    let grid = json!({"base": "phi0", "p": [2,3], "x": "1/1", "y": ["1/2","3/4","1/1"]});
    let mut report = LemmaReport::new("extended-max", grid, seed);
    let mut cache = DCache::new(vec![base.clone()], policy, guard);
    for p in [2u32, 3] {
        let ambient = interlace_power(&base, p, guard)?;
        for &y in &ys {
            let cc_big = cc_of(base.cols(), p, y);
            for ell in 1..p {
                let cc_small =
                    ceil_pow_fraction(pow_u64(2, ell).unwrap(), *y.numer() as u64, *y.denom() as u64, ell, p);
                let d_big = cache.d(0, p, 1, cc_big)?;
                let d_small = cache.d(0, ell, 1, cc_small)?;
                report.record(
                    d_big >= d_small,
                    json!({"p": p, "l": ell, "y": ratio_str(y), "check": "set complexities"}),
                    json!(d_big),
                    json!(d_small),
                );
                // Constructive route: every member projects into the target set.
                let spec = BracketSpec::new(base.clone(), p, Ratio::one(), y)?;
                for member in enumerate_bracket(&spec, guard, 100_000)? {
                    let (sel, _window) =
                        max_projection(&base, p, &member.rows, &member.cols, ell)?;
                    let mut ok = sel.cols.len() as u64 >= cc_small;
                    ok &= crate::selection::meets_power_bound(
                        sel.cols.len(),
                        member.cols.len(),
                        ell,
                        p,
                    );
                    let small =
                        extract(&interlace_power(&base, ell, guard)?, &sel.rows, &sel.cols)?;
                    let host = extract(&ambient, &member.rows, &member.cols)?;
                    ok &= is_subgame(&small, &host).is_some();
                    report.record(
                        ok,
                        json!({"p": p, "l": ell, "y": ratio_str(y), "cols": member.cols}),
                        json!(sel.cols.len()),
                        json!(cc_small),
                    );
                }
            }
        }
    }
    Ok(report.finish())
}

/// Rebalancing a lopsided single-component extraction of an interlaced
/// game costs components in a controlled way:
/// `D<interlace(M,p),1,ax,y> >= D<M, p(a-1)x/(1-x), x, y>`.
fn extended_balancing_suite(
    seed: u64,
    policy: &SolvePolicy,
    guard: CellGuard,
) -> Result<LemmaReport> {
    let base = GameMatrix::new(vec![vec![1, 0], vec![0, 1]], 2).unwrap();
    let p = 2u32;
    let lifted = interlace_power(&base, p, guard)?;
    let x = Ratio::new(1i64, 2);
    let alphas = fractions(&[(3, 2), (2, 1)]);
    let ys = fractions(&[(1, 2), (3, 4), (1, 1)]);
    let grid = json!({
        "base": "identity2", "p": p, "x": "1/2", "alpha": ["3/2","2/1"],
        "y": ["1/2","3/4","1/1"],
    });
    let mut report = LemmaReport::new("extended-balancing", grid, seed);
    let mut cache = DCache::new(vec![base.clone(), lifted.clone()], policy, guard);
    let t = t_of(base.rows(), x); // quota inside the original components
    for &alpha in &alphas {
        let ax = alpha * x;
        for &y in &ys {
            // ell* = ceil(p (alpha-1) x / (1-x))
            let ell_star = {
                let r = Ratio::from_integer(p as i64) * (alpha - Ratio::one()) * x
                    / (Ratio::one() - x);
                r.ceil().to_integer() as u32
            };
            let lhs = cache.d(1, 1, t_of(lifted.rows(), ax), cc_of(lifted.cols(), 1, y))?;
            let rhs = cache.d(0, ell_star, t, cc_of(base.cols(), ell_star, y))?;
            report.record(
                lhs >= rhs,
                json!({"alpha": ratio_str(alpha), "y": ratio_str(y), "l": ell_star,
                        "check": "set complexities"}),
                json!(lhs),
                json!(rhs),
            );
            // Constructive route through the balancing construction.
            let spec = BracketSpec::new(lifted.clone(), 1, ax, y)?;
            for member in enumerate_bracket(&spec, guard, 100_000)? {
                let (ell, sel) = balance_selection(
                    &base,
                    p,
                    &member.rows,
                    &member.cols,
                    Ratio::from_integer(t as i64),
                )?;
                let mut ok = ell == ell_star;
                ok &= is_equipartitioned(&sel.rows, base.rows(), Ratio::from_integer(t as i64), ell);
                // |D| >= |C| / n^(p - ell)
                let denom = pow_u64(base.cols() as u64, p - ell).unwrap();
                ok &= sel.cols.len() as u64 * denom >= member.cols.len() as u64;
                let small = extract(&interlace_power(&base, ell, guard)?, &sel.rows, &sel.cols)?;
                let host = extract(&lifted, &member.rows, &member.cols)?;
                ok &= is_subgame(&small, &host).is_some();
                report.record(
                    ok,
                    json!({"alpha": ratio_str(alpha), "y": ratio_str(y),
                            "rows": member.rows, "cols": member.cols}),
                    json!(ell),
                    json!(ell_star),
                );
            }
        }
    }
    Ok(report.finish())
}

/// With a single component the row quota loses its balancing role, so the
/// bracket of the transpose swaps the two fractions.
fn transpose_bracket_suite(seed: u64, policy: &SolvePolicy, guard: CellGuard) -> Result<LemmaReport> {
    let m = interlace_power(&phi_zero(), 2, guard)?;
    let mt = m.transpose();
    let fr = fractions(&[(1, 2), (1, 1)]);
    let grid = json!({"base": "interlace(phi0,2)", "x": ["1/2","1/1"], "y": ["1/2","1/1"]});
    let mut report = LemmaReport::new("transpose-bracket", grid, seed);
    let mut cache = DCache::new(vec![m.clone(), mt.clone()], policy, guard);
    for &x in &fr {
        for &y in &fr {
            let lhs = cache.d(0, 1, t_of(m.rows(), x), cc_of(m.cols(), 1, y))?;
            let rhs = cache.d(1, 1, t_of(mt.rows(), y), cc_of(mt.cols(), 1, x))?;
            report.record(
                lhs == rhs,
                json!({"x": ratio_str(x), "y": ratio_str(y)}),
                json!(lhs),
                json!(rhs),
            );
        }
    }
    Ok(report.finish())
}

/// Candidate column-count pairs realizable as `(ceil(n1 * y^a),
/// ceil(n2 * y^(1-a)))` for some exponent split `a` in [0, 1]: for each
/// feasible first count, the least compatible second count.
fn exponent_split_pairs(n1: u64, n2: u64, ynum: u64, yden: u64) -> Vec<(u64, u64)> {
    let c1_min = ceil_mul(n1, ynum, yden);
    let mut out = Vec::new();
    for c1 in c1_min..=n1 {
        // Largest z = y^a compatible with count c1 is z = c1/n1 (capped at
        // 1); the least second count is then ceil(n2 * y / z).
        let num = n2 as u128 * n1 as u128 * ynum as u128;
        let den = c1 as u128 * yden as u128;
        let c2 = ((num + den - 1) / den) as u64;
        out.push((c1, c2.max(ceil_mul(n2, ynum, yden)).min(n2)));
    }
    out
}

/// First-bit case analysis: whoever speaks first, one more bit accounts
/// for the progress, minimized over every way the row split can shift
/// components and every exponent split of the column fraction.
fn old_partition_suite(seed: u64, policy: &SolvePolicy, guard: CellGuard) -> Result<LemmaReport> {
    let base = phi_zero();
    let ys = fractions(&[(1, 2), (3, 4), (1, 1)]);
    let p = 1u32;
    let grid = json!({"base": "phi0", "p": p, "delta": [0,1], "x": "1/2",
                       "y": ["1/2","3/4","1/1"], "l_range": "0..=p"});
    let mut report = LemmaReport::new("old-partition", grid, seed);
    let mut cache = DCache::new(vec![base.clone()], policy, guard);
    let n = base.cols() as u64;
    for delta in [0u32, 1] {
        let big_p = 2 * p + delta;
        for &y in &ys {
            let (ynum, yden) = (*y.numer() as u64, *y.denom() as u64);
            let lhs = cache.d(0, big_p, 1, cc_of(base.cols(), big_p, y))?;
            if lhs < 1 {
                // Hypothesis of the implication fails; nothing to check.
                report.record_pass();
                continue;
            }
            // Column player speaks: half the columns survive.
            let y_half = y / 2;
            let mut best = cache.d(0, big_p, 1, cc_of(base.cols(), big_p, y_half).max(1))?;
            // Row player speaks: minimize over component shifts l and
            // exponent splits. The wider l range {0..p} is used; a
            // zero-component side contributes complexity 0.
            for ell in 0..=p {
                let p1 = p + ell + delta;
                let p2 = p - ell;
                let n1 = pow_u64(n, p1).unwrap();
                if p2 == 0 {
                    let c1 = ceil_mul(n1, ynum, yden);
                    let term = cache.d(0, p1, 1, c1)?;
                    best = best.min(term);
                } else {
                    let n2 = pow_u64(n, p2).unwrap();
                    for (c1, c2) in exponent_split_pairs(n1, n2, ynum, yden) {
                        let term = cache.d(0, p1, 1, c1)?.max(cache.d(0, p2, 1, c2)?);
                        best = best.min(term);
                    }
                }
            }
            let rhs = 1 + best;
            report.record(
                lhs >= rhs,
                json!({"delta": delta, "y": ratio_str(y)}),
                json!(lhs),
                json!(rhs),
            );
        }
    }
    Ok(report.finish())
}

/// The two consequences of the first-bit analysis after absorbing the
/// extra bits: dropping to half the components costs one bit outright, or
/// costs one bit against an exponent-split pair controlled by tau.
fn partition_suite(seed: u64, policy: &SolvePolicy, guard: CellGuard) -> Result<LemmaReport> {
    let base = phi_zero();
    let p = 2u32;
    let taus = fractions(&[(0, 1), (1, 2), (1, 1)]);
    let ys = fractions(&[(1, 2), (3, 4), (1, 1)]);
    // delta = 1 would need five interlaced components, past total
    // enumeration; the halving equation is still exercised at delta = 0.
    let grid = json!({"base": "phi0", "p": p, "delta": [0], "x": "1/2",
                       "tau": ["0/1","1/2","1/1"], "y": ["1/2","3/4","1/1"]});
    let mut report = LemmaReport::new("partition", grid, seed);
    let mut cache = DCache::new(vec![base.clone()], policy, guard);
    let n = base.cols();
    for &y in &ys {
        // Hypothesis: D<M,2p,2x,y/4> >= 1.
        let y_quarter = y / 4;
        let hyp = cache.d(0, 2 * p, 1, cc_of(n, 2 * p, y_quarter).max(1))?;
        if hyp < 1 {
            report.record_pass();
            continue;
        }
        let lhs = cache.d(0, 2 * p, 1, cc_of(n, 2 * p, y))?;
        // Halving equation: one bit down to p components at the same y.
        let rhs_t0 = 1 + cache.d(0, p, 1, cc_of(n, p, y))?;
        report.record(
            lhs >= rhs_t0,
            json!({"check": "halving", "y": ratio_str(y)}),
            json!(lhs),
            json!(rhs_t0),
        );
        // Exponent-split equation, one instance per tau.
        for &tau in &taus {
            let (tn, td) = (*tau.numer() as u64, *tau.denom() as u64);
            // y^(1/(1+tau)) has exponent td/(td+tn); y^(tau/(1+tau)) has tn/(td+tn).
            let v = (td + tn) as u32;
            let (ynum, yden) = (*y.numer() as u64, *y.denom() as u64);
            let cc1 = ceil_pow_fraction(pow_u64(n as u64, p).unwrap(), ynum, yden, td as u32, v);
            let p2 = {
                let r = Ratio::from_integer(p as i64) * (Ratio::one() - tau) + Ratio::one();
                r.ceil().to_integer() as u32
            };
            let cc2 = ceil_pow_fraction(pow_u64(n as u64, p2).unwrap(), ynum, yden, tn as u32, v);
            let rhs = 1 + cache.d(0, p, 1, cc1)?.min(cache.d(0, p2, 1, cc2)?);
            report.record(
                lhs >= rhs,
                json!({"check": "exponent-split", "tau": ratio_str(tau), "y": ratio_str(y)}),
                json!(lhs),
                json!(rhs),
            );
        }
    }
    Ok(report.finish())
}

/// Distinct bit-string columns span a space whose dimension pigeonholes
/// the complexity: `D<phi0,p,x,y> >= ceil(log2(p + log2 y))`.
fn rank_claim_suite(seed: u64, policy: &SolvePolicy, guard: CellGuard) -> Result<LemmaReport> {
    let base = phi_zero();
    let ys = fractions(&[(1, 2), (3, 4), (1, 1)]);
    let grid = json!({"base": "phi0", "p": [2,3], "x": "1/1", "y": ["1/2","3/4","1/1"]});
    let mut report = LemmaReport::new("rank-claim", grid, seed);
    let mut cache = DCache::new(vec![base.clone()], policy, guard);
    for p in [2u32, 3] {
        for &y in &ys {
            let bound = rank_claim_bound(p, *y.numer() as u64, *y.denom() as u64);
            let d = cache.d(0, p, 1, cc_of(base.cols(), p, y))?;
            report.record(
                d >= bound,
                json!({"p": p, "y": ratio_str(y)}),
                json!(d),
                json!(bound),
            );
        }
    }
    Ok(report.finish())
}

/// Set-level containment never raises complexity: if every member of the
/// larger set hosts some member of the smaller one, the smaller set's
/// minimum cannot exceed the larger's.
fn subgame_easier_suite(seed: u64, policy: &SolvePolicy, guard: CellGuard) -> Result<LemmaReport> {
    let _ = guard;
    let grid = json!({"instances": 50, "dims": "up to 4x4", "alphabet": 2});
    let mut report = LemmaReport::new("subgame-easier", grid, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..50 {
        let count = rng.gen_range(1..=3);
        let mut large = Vec::new();
        let mut small = Vec::new();
        for _ in 0..count {
            let r = rng.gen_range(2..=4);
            let c = rng.gen_range(2..=4);
            let m = GameMatrix::from_fn(r, c, 2, |_, _| rng.gen_range(0..2)).unwrap();
            // A random extraction of each member keeps the containment true
            // by construction.
            let kr = rng.gen_range(1..=r);
            let kc = rng.gen_range(1..=c);
            let rows: Vec<usize> = sample_sorted(&mut rng, r, kr);
            let cols: Vec<u64> = sample_sorted(&mut rng, c, kc).into_iter().map(|v| v as u64).collect();
            small.push(extract(&m, &rows, &cols).unwrap());
            large.push(m);
        }
        assert!(set_is_subgame(&small, &large));
        let d_of = |set: &[GameMatrix]| -> Result<u32> {
            let mut best = u32::MAX;
            for m in set {
                best = best.min(solve_exact(m, None, policy)?.depth().expect("no budget"));
            }
            Ok(best)
        };
        let d_small = d_of(&small)?;
        let d_large = d_of(&large)?;
        report.record(
            d_small <= d_large,
            json!({"members": count}),
            json!(d_small),
            json!(d_large),
        );
    }
    Ok(report.finish())
}

fn sample_sorted(rng: &mut ChaCha8Rng, bound: usize, k: usize) -> Vec<usize> {
    let mut picked: HashSet<usize> = HashSet::new();
    while picked.len() < k {
        picked.insert(rng.gen_range(0..bound));
    }
    let mut out: Vec<usize> = picked.into_iter().collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn guard() -> CellGuard {
        CellGuard::default()
    }

    fn policy() -> SolvePolicy {
        SolvePolicy::default()
    }

    #[test]
    fn counts_and_helpers() {
        assert_eq!(ceil_mul(4, 3, 4), 3);
        assert_eq!(ceil_mul(4, 1, 4), 1);
        assert_eq!(binomial(8, 6).to_u64(), Some(28));
        // ceil(4 * (3/4)^(1/2)): 4*0.866 = 3.46 -> 4
        assert_eq!(ceil_pow_fraction(4, 3, 4, 1, 2), 4);
        // ceil(2 * (1/2)^(1/2)) = ceil(1.414) = 2
        assert_eq!(ceil_pow_fraction(2, 1, 2, 1, 2), 2);
        assert_eq!(ceil_pow_fraction(8, 1, 1, 1, 1), 8);
    }

    #[test]
    fn rank_claim_bound_values() {
        // p + log2(y): 3 + log2(3/4) = 2.585 -> ceil(log2) = 2
        assert_eq!(rank_claim_bound(3, 3, 4), 2);
        assert_eq!(rank_claim_bound(2, 1, 2), 0); // 2 - 1 = 1 -> 0
        assert_eq!(rank_claim_bound(2, 1, 1), 1);
        assert_eq!(rank_claim_bound(3, 1, 1), 2);
        assert_eq!(rank_claim_bound(3, 1, 2), 1);
    }

    #[test]
    fn bracket_phi0_members() {
        // <phi0, 2, 1, 3/4>: four 2x3 extractions of the interlaced square.
        let spec = BracketSpec::new(phi_zero(), 2, Ratio::one(), Ratio::new(3, 4)).unwrap();
        assert_eq!(spec.t(), 1);
        assert_eq!(spec.col_count().unwrap(), 3);
        assert_eq!(spec.member_count().unwrap().to_u64(), Some(4));
        let members: Vec<BracketMember> = enumerate_bracket(&spec, guard(), 100).unwrap().collect();
        assert_eq!(members.len(), 4);
        let col_sets: Vec<Vec<u64>> = members.iter().map(|m| m.cols.clone()).collect();
        assert_eq!(
            col_sets,
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
    }

    #[test]
    fn bracket_identity_members() {
        // <I2, 2, 1/2, 1>: one row from each component, all four columns.
        let id = GameMatrix::new(vec![vec![1, 0], vec![0, 1]], 2).unwrap();
        let spec = BracketSpec::new(id, 2, Ratio::new(1, 2), Ratio::one()).unwrap();
        assert_eq!(spec.member_count().unwrap().to_u64(), Some(4));
        let members: Vec<BracketMember> = enumerate_bracket(&spec, guard(), 100).unwrap().collect();
        let row_sets: Vec<Vec<usize>> = members.iter().map(|m| m.rows.clone()).collect();
        assert_eq!(row_sets, vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]]);
    }

    #[test]
    fn bracket_trivial_and_limit() {
        let spec = BracketSpec::new(phi_zero(), 1, Ratio::one(), Ratio::one()).unwrap();
        let members: Vec<BracketMember> = enumerate_bracket(&spec, guard(), 10).unwrap().collect();
        assert_eq!(members.len(), 1);
        assert_eq!(members[0].matrix, phi_zero());
        let spec = BracketSpec::new(phi_zero(), 2, Ratio::one(), Ratio::new(3, 4)).unwrap();
        assert!(matches!(enumerate_bracket(&spec, guard(), 3), Err(Error::Size(_))));
    }

    #[test]
    fn bracket_complexity_examples() {
        let one = BracketSpec::new(phi_zero(), 1, Ratio::one(), Ratio::one()).unwrap();
        assert_eq!(bracket_complexity(&one, guard(), 100, &policy()).unwrap(), 1);
        let spec = BracketSpec::new(phi_zero(), 2, Ratio::one(), Ratio::new(3, 4)).unwrap();
        assert_eq!(bracket_complexity(&spec, guard(), 100, &policy()).unwrap(), 2);
        // A single column makes some member constant.
        let spec = BracketSpec::new(phi_zero(), 2, Ratio::one(), Ratio::new(1, 4)).unwrap();
        assert_eq!(bracket_complexity(&spec, guard(), 100, &policy()).unwrap(), 0);
    }

    #[test]
    fn unknown_ids_and_grids_are_usage_errors() {
        assert!(matches!(
            run_lemma_suite("no-such-lemma", "small", 0, &policy(), guard()),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            run_lemma_suite("rank-claim", "huge", 0, &policy(), guard()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn rank_claim_suite_passes() {
        let r = run_lemma_suite("rank-claim", "small", 0, &policy(), guard()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        assert_eq!(r.instances, 6);
    }

    #[test]
    fn transpose_bracket_suite_passes() {
        let r = run_lemma_suite("transpose-bracket", "small", 0, &policy(), guard()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn monotonicity_suite_passes() {
        let r = run_lemma_suite("monotonicity", "small", 0, &policy(), guard()).unwrap();
        assert!(r.passed(), "{}", r.to_json());
    }

    #[test]
    fn subgame_easier_suite_is_deterministic() {
        let a = run_lemma_suite("subgame-easier", "small", 42, &policy(), guard()).unwrap();
        let b = run_lemma_suite("subgame-easier", "small", 42, &policy(), guard()).unwrap();
        assert!(a.passed());
        assert_eq!(a.to_json(), b.to_json());
    }
}
