//! The interlacing operator and the alternating game family built from it.
//!
//! Interlacing stacks `p` copies of a base game's rows over the `p`-fold
//! decorrelated product of its columns: row block `gamma` (the *component*)
//! reads only digit `gamma` of the column index written in base `n`. The
//! alternating family transposes after each interlacing step so the players
//! are forced to take turns splitting components apart.
//!
//! Component 0 reads the least significant digit here. Displayed forms of
//! these matrices often list the blocks in the opposite order; that is the
//! same game up to reversing the component blocks (a row permutation, which
//! changes neither complexity nor any subgame relation).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{phi_dimensions, CellGuard, GameMatrix};

/// A base game together with the number of copies to interlace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InterlaceSpec {
    pub base: GameMatrix,
    pub p: u32,
}

impl InterlaceSpec {
    pub fn new(base: GameMatrix, p: u32) -> Self {
        InterlaceSpec { base, p }
    }

    /// Component of a row of the interlaced matrix: `floor(i / m)`.
    pub fn component_of_row(&self, i: usize) -> u32 {
        (i / self.base.rows()) as u32
    }

    pub fn materialize(&self, guard: CellGuard) -> Result<GameMatrix> {
        interlace_power(&self.base, self.p, guard)
    }
}

/// The base game of the alternating family: a single row forcing one
/// column-player bit.
pub fn phi_zero() -> GameMatrix {
    GameMatrix::new(vec![vec![1, 0]], 2).expect("static matrix")
}

/// Interlaces two games: rows are the disjoint union of both row sets,
/// columns are pairs `(y1, y2)` with `g`'s index varying fastest, and the
/// row decides which half of the pair is read.
pub fn interlace_binary(f: &GameMatrix, g: &GameMatrix, guard: CellGuard) -> Result<GameMatrix> {
    if f.alphabet() != g.alphabet() {
        return Err(Error::Domain(format!(
            "alphabet mismatch: {} vs {}",
            f.alphabet(),
            g.alphabet()
        )));
    }
    let rows = f.rows() as u128 + g.rows() as u128;
    let cols = f.cols() as u128 * g.cols() as u128;
    guard.check(rows, cols, "interlace_binary")?;
    let (fm, gn) = (f.rows(), g.cols());
    GameMatrix::from_fn(rows as usize, cols as usize, f.alphabet(), |i, j| {
        let (y1, y2) = (j / gn, j % gn);
        if i < fm {
            f.get(i, y1)
        } else {
            g.get(i - fm, y2)
        }
    })
}

/// Interlaces `p` copies of a game: the result has `m*p` rows and `n^p`
/// columns, and cell `(i, j)` equals `a[i mod m][digit_gamma(j)]` where
/// `gamma = floor(i/m)` and digits are read in base `n`, least significant
/// first.
pub fn interlace_power(m: &GameMatrix, p: u32, guard: CellGuard) -> Result<GameMatrix> {
    if p == 0 {
        return Err(Error::Domain("interlace power requires at least one copy".into()));
    }
    let rows = (m.rows() as u128) * p as u128;
    let cols = checked_pow_u128(m.cols() as u128, p)
        .ok_or_else(|| Error::Size("column count n^p overflows".into()))?;
    guard.check(rows, cols, "interlace_power")?;
    let (base_m, base_n) = (m.rows(), m.cols());
    // Precompute n^gamma strides so the inner closure stays cheap.
    let mut strides = Vec::with_capacity(p as usize);
    let mut s = 1usize;
    for _ in 0..p {
        strides.push(s);
        s = s.saturating_mul(base_n);
    }
    GameMatrix::from_fn(rows as usize, cols as usize, m.alphabet(), |i, j| {
        let gamma = i / base_m;
        let digit = (j / strides[gamma]) % base_n;
        m.get(i % base_m, digit)
    })
}

/// Member `i` of the alternating game family with interlace width `b`:
/// `phi_0 = [1 0]`, `phi_{i+1} = transpose(interlace_power(phi_i, b))`.
pub fn alternating_game(b: u32, i: u32, guard: CellGuard) -> Result<GameMatrix> {
    if b < 1 {
        return Err(Error::Domain("interlace width must be positive".into()));
    }
    // Check the final dimensions first so oversized requests fail with the
    // exact closed-form dimensions attached rather than mid-construction.
    if b >= 2 {
        let dims = phi_dimensions(b as u64, i as u64)?;
        let cells = dims.rows.clone() * dims.cols.clone();
        let fits = num_traits::ToPrimitive::to_u64(&cells)
            .map(|c| c <= guard.max_cells)
            .unwrap_or(false);
        if !fits {
            return Err(Error::Size(format!(
                "alternating game b={b}, i={i} has {} x {} cells, beyond the guard of {}",
                dims.rows, dims.cols, guard.max_cells
            )));
        }
    }
    let mut cur = phi_zero();
    for _ in 0..i {
        cur = interlace_power(&cur, b, guard)?.transpose();
    }
    Ok(cur)
}

fn checked_pow_u128(base: u128, exp: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn guard() -> CellGuard {
        CellGuard::default()
    }

    fn rows_of(m: &GameMatrix) -> Vec<Vec<u32>> {
        (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
            .collect()
    }

    #[test]
    fn binary_interlace_of_phi0_with_itself() {
        let a = phi_zero();
        let r = interlace_binary(&a, &a, guard()).unwrap();
        assert_eq!((r.rows(), r.cols()), (2, 4));
        // Same row set as the displayed example; the first block reads the
        // slow digit under the pair ordering used by the binary form.
        let mut rows = rows_of(&r);
        rows.sort();
        assert_eq!(rows, vec![vec![1, 0, 1, 0], vec![1, 1, 0, 0]]);
    }

    #[test]
    fn binary_interlace_degenerate() {
        let one = GameMatrix::new(vec![vec![1]], 2).unwrap();
        let r = interlace_binary(&one, &one, guard()).unwrap();
        assert_eq!(rows_of(&r), vec![vec![1], vec![1]]);
    }

    #[test]
    fn binary_interlace_follows_definition_cell_by_cell() {
        let f = GameMatrix::new(vec![vec![1, 0]], 2).unwrap();
        let g = GameMatrix::new(vec![vec![1, 0, 1]], 2).unwrap();
        let r = interlace_binary(&f, &g, guard()).unwrap();
        assert_eq!((r.rows(), r.cols()), (2, 6));
        for y1 in 0..2 {
            for y2 in 0..3 {
                let j = y1 * 3 + y2;
                assert_eq!(r.get(0, j), f.get(0, y1));
                assert_eq!(r.get(1, j), g.get(0, y2));
            }
        }
    }

    #[test]
    fn binary_interlace_rejects_alphabet_mismatch() {
        let f = phi_zero();
        let g = GameMatrix::new(vec![vec![1, 2]], 3).unwrap();
        assert!(matches!(interlace_binary(&f, &g, guard()), Err(Error::Domain(_))));
    }

    #[test]
    fn power_two_and_three_match_displayed_row_sets() {
        let a = phi_zero();
        let p2 = interlace_power(&a, 2, guard()).unwrap();
        let mut rows = rows_of(&p2);
        rows.sort();
        assert_eq!(rows, vec![vec![1, 0, 1, 0], vec![1, 1, 0, 0]]);

        let p3 = interlace_power(&a, 3, guard()).unwrap();
        let mut rows = rows_of(&p3);
        rows.sort();
        assert_eq!(
            rows,
            vec![
                vec![1, 0, 1, 0, 1, 0, 1, 0],
                vec![1, 1, 0, 0, 1, 1, 0, 0],
                vec![1, 1, 1, 1, 0, 0, 0, 0],
            ]
        );
    }

    #[test]
    fn power_of_identity_matches_displayed_row_set() {
        let id = GameMatrix::new(vec![vec![1, 0], vec![0, 1]], 2).unwrap();
        let r = interlace_power(&id, 2, guard()).unwrap();
        let mut rows = rows_of(&r);
        rows.sort();
        assert_eq!(
            rows,
            vec![
                vec![0, 0, 1, 1],
                vec![0, 1, 0, 1],
                vec![1, 0, 1, 0],
                vec![1, 1, 0, 0],
            ]
        );
    }

    #[test]
    fn power_one_is_identity() {
        let id = GameMatrix::new(vec![vec![1, 2], vec![0, 1]], 3).unwrap();
        assert_eq!(interlace_power(&id, 1, guard()).unwrap(), id);
    }

    #[test]
    fn each_row_depends_on_one_digit_only() {
        let a = phi_zero();
        let r = interlace_power(&a, 3, guard()).unwrap();
        for i in 0..r.rows() {
            let gamma = i / a.rows();
            for j in 0..r.cols() {
                let digit = (j >> gamma) & 1;
                assert_eq!(r.get(i, j), a.get(i % a.rows(), digit));
            }
        }
    }

    #[test]
    fn column_multiset_covers_every_digit_tuple_once() {
        let id = GameMatrix::new(vec![vec![1, 0], vec![0, 1]], 2).unwrap();
        let r = interlace_power(&id, 2, guard()).unwrap();
        // Column j realizes digit tuple (j mod 2, j div 2): component gamma's
        // block must equal base column digit_gamma(j).
        for j in 0..r.cols() {
            for gamma in 0..2 {
                let digit = (j >> gamma) & 1;
                for inner in 0..id.rows() {
                    assert_eq!(r.get(gamma * id.rows() + inner, j), id.get(inner, digit));
                }
            }
        }
    }

    #[test]
    fn self_similarity_under_digit_restriction() {
        // Fixing the high q digits of the column index and keeping the first
        // m*p rows reproduces the smaller interlacing.
        let a = phi_zero();
        for (p, q) in [(1u32, 1u32), (1, 2), (2, 1)] {
            let small = interlace_power(&a, p, guard()).unwrap();
            let large = interlace_power(&a, p + q, guard()).unwrap();
            let keep_rows = a.rows() * p as usize;
            let low_cols = a.cols().pow(p);
            for i in 0..keep_rows {
                for j in 0..low_cols {
                    assert_eq!(small.get(i, j), large.get(i, j));
                }
            }
        }
    }

    #[test]
    fn alternating_game_base_and_first_step() {
        assert_eq!(alternating_game(3, 0, guard()).unwrap(), phi_zero());
        let phi1 = alternating_game(2, 1, guard()).unwrap();
        let p2 = interlace_power(&phi_zero(), 2, guard()).unwrap();
        assert_eq!(phi1, p2.transpose());
        assert_eq!((phi1.rows(), phi1.cols()), (4, 2));
    }

    #[test]
    fn alternating_game_dims_match_closed_forms() {
        use num_traits::ToPrimitive;
        for b in [2u32, 3] {
            for i in [0u32, 1, 2] {
                let g = alternating_game(b, i, guard()).unwrap();
                let d = phi_dimensions(b as u64, i as u64).unwrap();
                assert_eq!(Some(g.rows() as u64), d.rows.to_u64(), "rows b={b} i={i}");
                assert_eq!(Some(g.cols() as u64), d.cols.to_u64(), "cols b={b} i={i}");
            }
        }
    }

    #[test]
    fn alternating_game_recurrence_on_dims() {
        // cols(i+1) = rows(i) * b and rows(i+1) = cols(i)^b.
        for b in [2u64, 3] {
            for i in [0u64, 1, 2] {
                let cur = phi_dimensions(b, i).unwrap();
                let next = phi_dimensions(b, i + 1).unwrap();
                assert_eq!(next.cols, cur.rows.clone() * b);
                assert_eq!(next.rows, num_traits::pow::Pow::pow(&cur.cols, b));
            }
        }
    }

    #[test]
    fn guard_violation_reports_dimensions() {
        let err = alternating_game(3, 4, CellGuard::default()).unwrap_err();
        match err {
            Error::Size(msg) => assert!(msg.contains('x'), "message should carry dims: {msg}"),
            other => panic!("expected size error, got {other:?}"),
        }
    }
}
