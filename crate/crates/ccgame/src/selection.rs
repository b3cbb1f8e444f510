//! Row/column selections of interlaced games and the constructive
//! projection machinery: base-n digit handling, component projections,
//! balancing, splitting, and maximum-window projection, plus the counting
//! theorem about projected set families that the window argument rests on.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interlace::interlace_power;
use crate::matrix::{CellGuard, GameMatrix};
use crate::subgame::{is_subgame, SubgameWitness};

/// Threshold ratios are exact rationals; ceilings are taken where counts
/// must be integers.
pub type Threshold = Ratio<i64>;

pub fn ceil_ratio(t: Threshold) -> i64 {
    t.ceil().to_integer()
}

/// A selection of rows and columns of an interlaced game, carrying the
/// `(m, n, p)` context of the ambient `m*p x n^p` matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    #[serde(rename = "R")]
    pub rows: Vec<usize>,
    #[serde(rename = "C")]
    pub cols: Vec<u64>,
    pub m: usize,
    pub n: usize,
    pub p: u32,
}

impl Selection {
    pub fn new(rows: Vec<usize>, cols: Vec<u64>, m: usize, n: usize, p: u32) -> Result<Selection> {
        let sel = Selection { rows, cols, m, n, p };
        sel.validate()?;
        Ok(sel)
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 || self.p == 0 {
            return Err(Error::Domain("selection context must be positive".into()));
        }
        let row_bound = self.m * self.p as usize;
        let col_bound = pow_u128(self.n as u128, self.p)
            .ok_or_else(|| Error::Size("column space n^p overflows".into()))?;
        check_sorted(&self.rows, row_bound as u64, "row")?;
        check_sorted_u64(&self.cols, col_bound, "column")?;
        Ok(())
    }

    /// Number of selected rows inside each component block.
    pub fn component_counts(&self) -> Vec<usize> {
        component_counts(&self.rows, self.m, self.p)
    }
}

fn check_sorted(ix: &[usize], bound: u64, what: &str) -> Result<()> {
    for w in ix.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Domain(format!("{what} indices must be strictly increasing")));
        }
    }
    if let Some(&last) = ix.last() {
        if (last as u64) >= bound {
            return Err(Error::Domain(format!("{what} index {last} out of range (< {bound})")));
        }
    }
    Ok(())
}

fn check_sorted_u64(ix: &[u64], bound: u128, what: &str) -> Result<()> {
    for w in ix.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Domain(format!("{what} indices must be strictly increasing")));
        }
    }
    if let Some(&last) = ix.last() {
        if (last as u128) >= bound {
            return Err(Error::Domain(format!("{what} index {last} out of range (< {bound})")));
        }
    }
    Ok(())
}

fn component_counts(rows: &[usize], m: usize, p: u32) -> Vec<usize> {
    let mut counts = vec![0usize; p as usize];
    for &r in rows {
        counts[r / m] += 1;
    }
    counts
}

fn pow_u128(base: u128, exp: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// A column index written as `p` digits in base `n`, least significant
/// digit at position 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitTuple {
    pub digits: Vec<u64>,
    pub base: u64,
    pub width: u32,
}

impl DigitTuple {
    /// Reassembles the column index: `sum(digits[g] * base^g)`.
    pub fn value(&self) -> u64 {
        let mut acc = 0u64;
        for &d in self.digits.iter().rev() {
            acc = acc * self.base + d;
        }
        acc
    }
}

/// Digit decomposition of a column index: `digit[g] = (c / n^g) mod n`.
pub fn base_digits(c: u64, n: u64, p: u32) -> Result<DigitTuple> {
    if n == 0 {
        return Err(Error::Domain("base must be positive".into()));
    }
    let bound = pow_u128(n as u128, p).ok_or_else(|| Error::Size("n^p overflows".into()))?;
    if (c as u128) >= bound {
        return Err(Error::Domain(format!("index {c} out of range for {p} digits in base {n}")));
    }
    let mut digits = Vec::with_capacity(p as usize);
    let mut rest = c;
    for _ in 0..p {
        digits.push(rest % n);
        rest /= n;
    }
    Ok(DigitTuple { digits, base: n, width: p })
}

/// Extracts the submatrix induced by sorted row and column index sets.
pub fn extract(m: &GameMatrix, rows: &[usize], cols: &[u64]) -> Result<GameMatrix> {
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::Domain("extraction requires nonempty row and column sets".into()));
    }
    check_sorted(rows, m.rows() as u64, "row")?;
    check_sorted_u64(cols, m.cols() as u128, "column")?;
    GameMatrix::from_fn(rows.len(), cols.len(), m.alphabet(), |i, j| {
        m.get(rows[i], cols[j] as usize)
    })
}

/// True when every component block holds exactly `ceil(t)` selected rows.
pub fn is_equipartitioned(rows: &[usize], m: usize, t: Threshold, p: u32) -> bool {
    if rows.iter().any(|&r| r >= m * p as usize) {
        return false;
    }
    let want = ceil_ratio(t);
    if want < 0 {
        return false;
    }
    component_counts(rows, m, p)
        .iter()
        .all(|&c| c as i64 == want)
}

/// Projects a selection of `interlace_power(A, p)` onto the components in
/// `q`, producing a selection of `interlace_power(A, |q|)`: rows keep their
/// in-component offsets, columns keep only the digits at positions in `q`.
pub fn q_projection(sel: &Selection, q: &[u32]) -> Result<Selection> {
    if q.is_empty() {
        return Err(Error::Domain("projection needs a nonempty component set".into()));
    }
    for w in q.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Domain("component set must be strictly increasing".into()));
        }
    }
    if *q.last().unwrap() >= sel.p {
        return Err(Error::Domain(format!(
            "component {} out of range (< {})",
            q.last().unwrap(),
            sel.p
        )));
    }
    let ell = q.len() as u32;
    let mut rows = Vec::new();
    for (new_gamma, &old_gamma) in q.iter().enumerate() {
        let base = sel.m * old_gamma as usize;
        for r in 0..sel.m {
            if sel.rows.binary_search(&(base + r)).is_ok() {
                rows.push(sel.m * new_gamma + r);
            }
        }
    }
    let mut cols: BTreeSet<u64> = BTreeSet::new();
    for &c in &sel.cols {
        let digits = base_digits(c, sel.n as u64, sel.p)?;
        let mut v = 0u64;
        for &old_gamma in q.iter().rev() {
            v = v * sel.n as u64 + digits.digits[old_gamma as usize];
        }
        cols.insert(v);
    }
    Selection::new(rows, cols.into_iter().collect(), sel.m, sel.n, ell)
}

/// Outcome of checking that a projected selection really is a subgame of
/// the original extraction. A missing witness would falsify the projection
/// argument, so it is reported as data rather than raised as an error.
#[derive(Debug, Clone)]
pub enum ProjectionOutcome {
    Witness { projected: Selection, witness: SubgameWitness },
    Violation { projected: Selection },
}

impl ProjectionOutcome {
    pub fn is_witness(&self) -> bool {
        matches!(self, ProjectionOutcome::Witness { .. })
    }
}

/// Projects `(rows, cols)` onto `q` and confirms by complete search that the
/// projected extraction embeds into the original one.
pub fn check_projection_subgame(
    a: &GameMatrix,
    p: u32,
    rows: &[usize],
    cols: &[u64],
    q: &[u32],
    guard: CellGuard,
) -> Result<ProjectionOutcome> {
    let sel = Selection::new(rows.to_vec(), cols.to_vec(), a.rows(), a.cols(), p)?;
    let projected = q_projection(&sel, q)?;
    let big = extract(&interlace_power(a, p, guard)?, rows, cols)?;
    let small = extract(
        &interlace_power(a, q.len() as u32, guard)?,
        &projected.rows,
        &projected.cols,
    )?;
    Ok(match is_subgame(&small, &big) {
        Some(witness) => ProjectionOutcome::Witness { projected, witness },
        None => ProjectionOutcome::Violation { projected },
    })
}

/// The explicit embedding that the projection construction induces, built
/// directly from index arithmetic rather than by search. Used as an
/// independent cross-check of `check_projection_subgame`.
pub fn projection_witness(sel: &Selection, q: &[u32], projected: &Selection) -> Result<SubgameWitness> {
    let mut rows = Vec::with_capacity(projected.rows.len());
    for &s in &projected.rows {
        let gamma = s / sel.m;
        let r = s % sel.m;
        let original = sel.m * q[gamma] as usize + r;
        let idx = sel
            .rows
            .binary_search(&original)
            .map_err(|_| Error::Domain(format!("projected row {s} has no source in R")))?;
        rows.push(idx);
    }
    let mut cols = Vec::with_capacity(projected.cols.len());
    for &d in &projected.cols {
        let want = base_digits(d, sel.n as u64, q.len() as u32)?;
        let mut found = None;
        for (idx, &c) in sel.cols.iter().enumerate() {
            let digits = base_digits(c, sel.n as u64, sel.p)?;
            if q.iter()
                .enumerate()
                .all(|(g, &old)| digits.digits[old as usize] == want.digits[g])
            {
                found = Some(idx);
                break;
            }
        }
        cols.push(found.ok_or_else(|| {
            Error::Domain(format!("projected column {d} has no source in C"))
        })?);
    }
    Ok(SubgameWitness { rows, cols })
}

/// Turns an arbitrary selection into an equipartitioned one over fewer
/// components: drops the components with too few selected rows, projects
/// onto `ell` of the remaining ones, and trims every block to `ceil(t)`
/// rows. Returns `(ell, selection)` with `|D| >= |C| / n^(p-ell)`.
pub fn balance_selection(
    a: &GameMatrix,
    p: u32,
    rows: &[usize],
    cols: &[u64],
    t: Threshold,
) -> Result<(u32, Selection)> {
    let (m, n) = (a.rows(), a.cols());
    let sel = Selection::new(rows.to_vec(), cols.to_vec(), m, n, p)?;
    let m_r = Ratio::from_integer(m as i64);
    if t < Ratio::zero() || t >= m_r {
        return Err(Error::Precondition(format!("threshold must satisfy 0 <= t < {m}")));
    }
    if ceil_ratio(t) < 1 {
        return Err(Error::Precondition(
            "threshold with ceil(t) = 0 would demand empty components".into(),
        ));
    }
    // ell = ceil((|R| - p*t) / (m - t))
    let ell_r = (Ratio::from_integer(rows.len() as i64) - Ratio::from_integer(p as i64) * t)
        / (m_r - t);
    let ell = ceil_ratio(ell_r);
    if ell <= 0 {
        return Err(Error::Precondition(format!(
            "selection of {} rows yields a non-positive component count {ell}",
            rows.len()
        )));
    }
    let ell = ell as u32;
    // Components with more than t selected rows survive; the count argument
    // guarantees at least ell of them.
    let survivors: Vec<u32> = component_counts(rows, m, p)
        .iter()
        .enumerate()
        .filter(|(_, &c)| Ratio::from_integer(c as i64) > t)
        .map(|(g, _)| g as u32)
        .collect();
    if (survivors.len() as u32) < ell {
        return Err(Error::Precondition(format!(
            "only {} components carry more than {t} rows, need {ell}",
            survivors.len()
        )));
    }
    let q: Vec<u32> = survivors.into_iter().take(ell as usize).collect();
    let projected = q_projection(&sel, &q)?;
    let trimmed = trim_equipartition(&projected, ceil_ratio(t) as usize)?;
    Ok((ell, trimmed))
}

/// Keeps the `want` lowest selected rows in every component block.
fn trim_equipartition(sel: &Selection, want: usize) -> Result<Selection> {
    let mut rows = Vec::new();
    for gamma in 0..sel.p as usize {
        let block: Vec<usize> = sel
            .rows
            .iter()
            .copied()
            .filter(|&r| r / sel.m == gamma)
            .collect();
        if block.len() < want {
            return Err(Error::Precondition(format!(
                "component {gamma} holds {} rows, cannot keep {want}",
                block.len()
            )));
        }
        rows.extend_from_slice(&block[..want]);
    }
    Selection::new(rows, sel.cols.clone(), sel.m, sel.n, sel.p)
}

/// One side of a split projection.
#[derive(Debug, Clone)]
pub struct SplitPart {
    pub ell: u32,
    pub selection: Selection,
}

/// Splits an equipartitioned selection along a row partition `R = R1 u R2`:
/// each side keeps the components where it holds at least half the block's
/// quota, the two component sets partition `[p]`, and the projected column
/// sets satisfy `|D1| * |D2| >= |C|`.
pub fn split_projection(
    a: &GameMatrix,
    p: u32,
    rows1: &[usize],
    rows2: &[usize],
    cols: &[u64],
    t: Threshold,
) -> Result<(SplitPart, SplitPart)> {
    let (m, n) = (a.rows(), a.cols());
    let mut all: Vec<usize> = rows1.iter().chain(rows2.iter()).copied().collect();
    all.sort_unstable();
    if all.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Precondition("row parts must be disjoint".into()));
    }
    if !is_equipartitioned(&all, m, t, p) {
        return Err(Error::Precondition(
            "the union of the row parts must be equipartitioned".into(),
        ));
    }
    if ceil_ratio(t / 2) < 1 {
        return Err(Error::Precondition(
            "threshold too small: ceil(t/2) must be at least 1".into(),
        ));
    }
    let half = t / 2;
    let counts1 = component_counts(rows1, m, p);
    // The first side claims the components where it meets the half quota;
    // the second side takes the complement, which the counting argument
    // guarantees meets the quota too. This makes the two component sets a
    // partition of [p] by construction.
    let q1: Vec<u32> = (0..p)
        .filter(|&g| Ratio::from_integer(counts1[g as usize] as i64) >= half)
        .collect();
    let q2: Vec<u32> = (0..p).filter(|g| !q1.contains(g)).collect();
    if q1.is_empty() || q2.is_empty() {
        return Err(Error::Precondition(format!(
            "degenerate split: component sets of sizes {} and {} (zero-component games are undefined)",
            q1.len(),
            q2.len()
        )));
    }
    let want = ceil_ratio(half) as usize;
    let build = |own_rows: &[usize], q: &[u32]| -> Result<SplitPart> {
        let sel = Selection::new(own_rows.to_vec(), cols.to_vec(), m, n, p)?;
        let projected = q_projection(&sel, q)?;
        let trimmed = trim_equipartition(&projected, want)?;
        Ok(SplitPart { ell: q.len() as u32, selection: trimmed })
    };
    Ok((build(rows1, &q1)?, build(rows2, &q2)?))
}

/// Cyclic component windows of length `ell`: window `i` covers components
/// `(i*ell + j) mod p` for `j` below `ell`.
fn windows(p: u32, ell: u32) -> Vec<Vec<u32>> {
    // Smallest q with ell dividing p*q; r = p*q/ell windows cover every
    // component exactly q times.
    let q = (1..=ell).find(|&q| (p as u64 * q as u64) % ell as u64 == 0).unwrap();
    let r = (p as u64 * q as u64 / ell as u64) as u32;
    (0..r)
        .map(|i| {
            let mut w: Vec<u32> = (0..ell)
                .map(|j| ((i as u64 * ell as u64 + j as u64) % p as u64) as u32)
                .collect();
            w.sort_unstable();
            w
        })
        .collect()
}

/// Projects onto the cyclic window of `ell` components whose projected
/// column set is largest; the counting corollary guarantees
/// `|D| >= |C|^(ell/p)`. Returns the selection and the winning window.
pub fn max_projection(
    a: &GameMatrix,
    p: u32,
    rows: &[usize],
    cols: &[u64],
    ell: u32,
) -> Result<(Selection, Vec<u32>)> {
    if ell < 1 || ell > p {
        return Err(Error::Domain(format!("window length must lie in 1..={p}, got {ell}")));
    }
    let (m, n) = (a.rows(), a.cols());
    let sel = Selection::new(rows.to_vec(), cols.to_vec(), m, n, p)?;
    let counts = component_counts(rows, m, p);
    if counts.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Precondition(
            "row selection must hold the same number of rows in every component".into(),
        ));
    }
    let mut best: Option<(usize, Vec<u32>, Selection)> = None;
    for w in windows(p, ell) {
        let projected = q_projection(&sel, &w)?;
        let better = match &best {
            None => true,
            Some((sz, _, _)) => projected.cols.len() > *sz,
        };
        if better {
            best = Some((projected.cols.len(), w, projected));
        }
    }
    let (_, window, projected) = best.expect("at least one window exists");
    Ok((projected, window))
}

/// Result of the product check over a covered ground set.
#[derive(Debug, Clone)]
pub struct ProductCheck {
    pub holds: bool,
    /// `|F|^k`
    pub lhs: BigUint,
    /// product over covers of the number of distinct restrictions of `F`
    pub rhs: BigUint,
}

/// Checks `|F|^k <= prod_i |{ F cap A_i : F in F }|` for a family `F` of
/// subsets of `U`, where every element of `U` lies in at least `k` covers.
pub fn product_theorem_check(
    universe: &BTreeSet<u32>,
    covers: &[BTreeSet<u32>],
    k: u32,
    family: &BTreeSet<BTreeSet<u32>>,
) -> Result<ProductCheck> {
    for &u in universe {
        let coverage = covers.iter().filter(|a| a.contains(&u)).count() as u32;
        if coverage < k {
            return Err(Error::Precondition(format!(
                "element {u} is covered {coverage} times, fewer than k={k}"
            )));
        }
    }
    let lhs = BigUint::from(family.len()).pow(k);
    let mut rhs = BigUint::one();
    for cover in covers {
        let restricted: BTreeSet<BTreeSet<u32>> = family
            .iter()
            .map(|f| f.intersection(cover).copied().collect())
            .collect();
        rhs *= BigUint::from(restricted.len());
    }
    Ok(ProductCheck { holds: lhs <= rhs, lhs, rhs })
}

/// `|D| >= |C|^(ell/p)` compared exactly: `|D|^p >= |C|^ell`.
pub fn meets_power_bound(d_len: usize, c_len: usize, ell: u32, p: u32) -> bool {
    BigUint::from(d_len).pow(p) >= BigUint::from(c_len).pow(ell)
}

/// Ratio helpers shared by the lemma checkers.
pub fn ratio_abs_le(x: Threshold, y: Threshold) -> bool {
    x.abs() <= y.abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interlace::phi_zero;
    use num_traits::ToPrimitive;

    fn sel(rows: Vec<usize>, cols: Vec<u64>, m: usize, n: usize, p: u32) -> Selection {
        Selection::new(rows, cols, m, n, p).unwrap()
    }

    #[test]
    fn digit_round_trips() {
        let d = base_digits(3, 2, 2).unwrap();
        assert_eq!(d.digits, vec![1, 1]);
        assert_eq!(d.value(), 3);
        let d = base_digits(0, 5, 3).unwrap();
        assert_eq!(d.digits, vec![0, 0, 0]);
        let d = base_digits(6, 2, 3).unwrap();
        assert_eq!(d.digits, vec![0, 1, 1]); // 6 = [1,1,0] msd..lsd
        assert_eq!(d.value(), 6);
        assert!(base_digits(8, 2, 3).is_err());
    }

    #[test]
    fn extract_examples() {
        let g = CellGuard::default();
        let host = interlace_power(&phi_zero(), 2, g).unwrap();
        let all = extract(&host, &[0, 1], &[0, 1, 2, 3]).unwrap();
        assert_eq!(all, host);
        // Columns holding the identity block. Under the least-significant
        // digit convention these are columns 1 and 2.
        let id = extract(&host, &[0, 1], &[1, 2]).unwrap();
        let mut rows: Vec<Vec<u32>> = (0..2).map(|i| (0..2).map(|j| id.get(i, j)).collect()).collect();
        rows.sort();
        assert_eq!(rows, vec![vec![0, 1], vec![1, 0]]);
        let single = extract(&host, &[1], &[0, 3]).unwrap();
        assert_eq!((single.rows(), single.cols()), (1, 2));
        assert!(extract(&host, &[], &[0]).is_err());
        assert!(extract(&host, &[0], &[9]).is_err());
    }

    #[test]
    fn equipartition_examples() {
        let t1 = Ratio::from_integer(1);
        assert!(is_equipartitioned(&[0, 2], 2, t1, 2));
        assert!(!is_equipartitioned(&[0, 1], 2, t1, 2));
        assert!(is_equipartitioned(&[0, 1, 2, 3], 2, Ratio::from_integer(2), 2));
        // Fractional thresholds round up.
        assert!(is_equipartitioned(&[0, 2], 2, Ratio::new(1, 2), 2));
    }

    #[test]
    fn q_projection_examples() {
        let s = sel(vec![0, 1], vec![0, 3], 1, 2, 2);
        let p = q_projection(&s, &[0]).unwrap();
        assert_eq!((p.rows.clone(), p.cols.clone()), (vec![0], vec![0, 1]));
        let idp = q_projection(&s, &[0, 1]).unwrap();
        assert_eq!(idp.rows, s.rows);
        assert_eq!(idp.cols, s.cols);

        let s = sel(vec![0, 1, 2], vec![0, 7], 1, 2, 3);
        let p = q_projection(&s, &[1, 2]).unwrap();
        assert_eq!(p.rows, vec![0, 1]);
        assert_eq!(p.cols, vec![0, 3]);

        assert!(q_projection(&s, &[]).is_err());
    }

    #[test]
    fn projection_subgame_finds_witnesses() {
        let g = CellGuard::default();
        let a = phi_zero();
        let out = check_projection_subgame(&a, 2, &[0, 1], &[0, 1, 2, 3], &[0], g).unwrap();
        assert!(out.is_witness());
        let out = check_projection_subgame(&a, 3, &[0, 1, 2], &[0, 1, 2, 3, 4, 5, 6, 7], &[1], g)
            .unwrap();
        assert!(out.is_witness());
        let id = GameMatrix::new(vec![vec![1, 0], vec![0, 1]], 2).unwrap();
        let out =
            check_projection_subgame(&id, 2, &[0, 1, 2, 3], &[0, 1, 2, 3], &[0, 1], g).unwrap();
        match out {
            ProjectionOutcome::Witness { witness, .. } => {
                assert_eq!(witness.rows, vec![0, 1, 2, 3]);
                assert_eq!(witness.cols, vec![0, 1, 2, 3]);
            }
            _ => panic!("identity projection must give the identity witness"),
        }
    }

    #[test]
    fn constructed_witness_agrees_with_search() {
        let g = CellGuard::default();
        let a = GameMatrix::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        for p in [2u32, 3] {
            let big = interlace_power(&a, p, g).unwrap();
            let rows: Vec<usize> = (0..big.rows()).collect();
            let cols: Vec<u64> = (0..big.cols() as u64).filter(|c| c % 3 != 1).collect();
            let s = sel(rows.clone(), cols.clone(), 2, 2, p);
            for q in [&[0u32][..], &[p - 1], &[0, p - 1]] {
                let projected = q_projection(&s, q).unwrap();
                let w = projection_witness(&s, q, &projected).unwrap();
                let small =
                    extract(&interlace_power(&a, q.len() as u32, g).unwrap(), &projected.rows, &projected.cols)
                        .unwrap();
                let bigx = extract(&big, &rows, &cols).unwrap();
                assert!(w.verify(&small, &bigx), "constructed witness must verify");
                let out = check_projection_subgame(&a, p, &rows, &cols, q, g).unwrap();
                assert!(out.is_witness());
            }
        }
    }

    #[test]
    fn balance_identity_case() {
        let id = GameMatrix::new(vec![vec![1, 0], vec![0, 1]], 2).unwrap();
        let (ell, s) = balance_selection(&id, 2, &[0, 1, 2, 3], &[0, 1, 2, 3], Ratio::from_integer(1))
            .unwrap();
        assert_eq!(ell, 2);
        assert_eq!(s.rows, vec![0, 2]); // one row kept per component
        assert_eq!(s.cols, vec![0, 1, 2, 3]);
        assert!(is_equipartitioned(&s.rows, 2, Ratio::from_integer(1), 2));
    }

    #[test]
    fn balance_rejects_bad_thresholds() {
        let a = phi_zero();
        assert!(matches!(
            balance_selection(&a, 2, &[0, 1], &[0], Ratio::from_integer(1)),
            Err(Error::Precondition(_)) // t >= m
        ));
        let id = GameMatrix::new(vec![vec![1, 0], vec![0, 1]], 2).unwrap();
        assert!(matches!(
            balance_selection(&id, 2, &[0, 1, 2, 3], &[0], Ratio::zero()),
            Err(Error::Precondition(_)) // ceil(t) = 0 is flagged
        ));
    }

    #[test]
    fn split_binary_base_case() {
        let a = phi_zero();
        let (p1, p2) =
            split_projection(&a, 2, &[0], &[1], &[0, 1, 2, 3], Ratio::from_integer(1)).unwrap();
        assert_eq!(p1.ell + p2.ell, 2);
        assert!(p1.selection.cols.len() * p2.selection.cols.len() >= 4);
        assert!(is_equipartitioned(&p1.selection.rows, 1, Ratio::new(1, 2), p1.ell));
        assert!(is_equipartitioned(&p2.selection.rows, 1, Ratio::new(1, 2), p2.ell));
    }

    #[test]
    fn split_rejects_degenerate_partitions() {
        let a = phi_zero();
        let r = split_projection(&a, 2, &[0, 1], &[], &[0, 1, 2, 3], Ratio::from_integer(1));
        assert!(matches!(r, Err(Error::Precondition(_))));
    }

    #[test]
    fn max_projection_examples() {
        let a = phi_zero();
        let (s, _w) = max_projection(&a, 2, &[0, 1], &[0, 1, 2, 3], 1).unwrap();
        assert!(s.cols.len() >= 2, "|D| >= 4^(1/2)");
        assert!(meets_power_bound(s.cols.len(), 4, 1, 2));

        let cols: Vec<u64> = vec![0, 1, 2, 3, 4, 5];
        let (s, _w) = max_projection(&a, 3, &[0, 1, 2], &cols, 2).unwrap();
        assert!(s.cols.len() >= 4, "|D| >= 6^(2/3) forces 4, got {}", s.cols.len());

        let (s, w) = max_projection(&a, 2, &[0, 1], &[0, 2, 3], 2).unwrap();
        assert_eq!(w, vec![0, 1]);
        assert_eq!(s.rows, vec![0, 1]);
        assert_eq!(s.cols, vec![0, 2, 3]);

        assert!(max_projection(&a, 2, &[0, 1], &[0], 0).is_err());
        assert!(max_projection(&a, 2, &[0, 1], &[0], 3).is_err());
    }

    #[test]
    fn product_check_examples() {
        let u: BTreeSet<u32> = [1, 2].into();
        let covers = vec![BTreeSet::from([1]), BTreeSet::from([2])];
        let family: BTreeSet<BTreeSet<u32>> =
            [BTreeSet::from([1]), BTreeSet::from([1, 2])].into();
        let r = product_theorem_check(&u, &covers, 1, &family).unwrap();
        assert!(r.holds);
        assert_eq!((r.lhs.to_u64(), r.rhs.to_u64()), (Some(2), Some(2)));

        let u: BTreeSet<u32> = [1, 2, 3].into();
        let covers = vec![
            BTreeSet::from([1, 2]),
            BTreeSet::from([2, 3]),
            BTreeSet::from([1, 3]),
        ];
        let family: BTreeSet<BTreeSet<u32>> =
            [BTreeSet::from([1]), BTreeSet::from([2]), BTreeSet::from([3])].into();
        let r = product_theorem_check(&u, &covers, 2, &family).unwrap();
        assert!(r.holds);
        assert_eq!((r.lhs.to_u64(), r.rhs.to_u64()), (Some(9), Some(27)));

        // Coverage below k is a precondition failure.
        assert!(product_theorem_check(&u, &covers, 3, &family).is_err());
    }

    #[test]
    fn selection_serialization_schema() {
        let s = sel(vec![0, 1], vec![0, 3], 1, 2, 2);
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"R":[0,1],"C":[0,3],"m":1,"n":2,"p":2}"#
        );
    }
}
