//! Game matrices: the value table of a two-player communication game.
//!
//! Rows index the row player's inputs, columns the column player's inputs,
//! and every cell holds a value below the alphabet size. Matrices are
//! immutable after construction and freely shareable across threads.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Upper bound on the number of cells a construction may materialize.
///
/// The interlace and direct-sum operators grow multiplicatively, so a guard
/// turns runaway parameters into a fast `Size` error instead of exhausting
/// memory. The default is 2^24 cells, overridable with the
/// `CCGAME_MAX_CELLS` environment variable (flags take precedence over the
/// environment in the CLI).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellGuard {
    pub max_cells: u64,
}

pub const DEFAULT_MAX_CELLS: u64 = 1 << 24;

impl Default for CellGuard {
    fn default() -> Self {
        let max_cells = std::env::var("CCGAME_MAX_CELLS")
            .ok()
            .and_then(|s| s.trim().parse::<u64>().ok())
            .filter(|&v| v >= 1)
            .unwrap_or(DEFAULT_MAX_CELLS);
        CellGuard { max_cells }
    }
}

impl CellGuard {
    pub fn new(max_cells: u64) -> Self {
        CellGuard { max_cells }
    }

    /// Checks that a prospective `rows x cols` table fits under the guard.
    pub fn check(&self, rows: u128, cols: u128, what: &str) -> Result<()> {
        let cells = rows.checked_mul(cols);
        match cells {
            Some(c) if c <= self.max_cells as u128 => Ok(()),
            _ => Err(Error::Size(format!(
                "{what}: {rows} x {cols} cells exceed the guard of {} cells",
                self.max_cells
            ))),
        }
    }
}

/// Row-major cell storage; boolean matrices are bit-packed.
#[derive(Clone)]
enum CellStore {
    Bits(Vec<u64>),
    Vals(Vec<u32>),
}

/// A finite game matrix over a small alphabet.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct GameMatrix {
    m: usize,
    n: usize,
    alphabet: u32,
    cells: CellStore,
}

/// Canonical JSON form: `{"m":…,"n":…,"alphabet":…,"rows":[[…],…]}`.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    m: usize,
    n: usize,
    alphabet: u32,
    rows: Vec<Vec<u32>>,
}

impl GameMatrix {
    /// Builds a matrix from a rectangular grid of values.
    pub fn new(grid: Vec<Vec<u32>>, alphabet: u32) -> Result<GameMatrix> {
        if grid.is_empty() || grid[0].is_empty() {
            return Err(Error::Shape("matrix must have at least one row and one column".into()));
        }
        let n = grid[0].len();
        if grid.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!(
                "ragged grid: expected {n} columns in every row"
            )));
        }
        let m = grid.len();
        Self::from_fn(m, n, alphabet, |i, j| grid[i][j])
    }

    /// Builds an `m x n` matrix by evaluating `f` at every cell.
    pub fn from_fn(
        m: usize,
        n: usize,
        alphabet: u32,
        mut f: impl FnMut(usize, usize) -> u32,
    ) -> Result<GameMatrix> {
        if m == 0 || n == 0 {
            return Err(Error::Shape("matrix must have at least one row and one column".into()));
        }
        if alphabet == 0 {
            return Err(Error::Domain("alphabet size must be at least 1".into()));
        }
        let len = m
            .checked_mul(n)
            .ok_or_else(|| Error::Size("matrix dimensions overflow".into()))?;
        let cells = if alphabet == 2 {
            let mut words = vec![0u64; (len + 63) / 64];
            for i in 0..m {
                for j in 0..n {
                    let v = f(i, j);
                    if v >= 2 {
                        return Err(Error::Domain(format!(
                            "cell ({i},{j}) holds {v}, outside alphabet of size 2"
                        )));
                    }
                    let idx = i * n + j;
                    words[idx >> 6] |= (v as u64) << (idx & 63);
                }
            }
            CellStore::Bits(words)
        } else {
            let mut vals = Vec::with_capacity(len);
            for i in 0..m {
                for j in 0..n {
                    let v = f(i, j);
                    if v >= alphabet {
                        return Err(Error::Domain(format!(
                            "cell ({i},{j}) holds {v}, outside alphabet of size {alphabet}"
                        )));
                    }
                    vals.push(v);
                }
            }
            CellStore::Vals(vals)
        };
        Ok(GameMatrix { m, n, alphabet, cells })
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> u32 {
        self.alphabet
    }

    pub fn cell_count(&self) -> usize {
        self.m * self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        debug_assert!(i < self.m && j < self.n);
        let idx = i * self.n + j;
        match &self.cells {
            CellStore::Bits(words) => ((words[idx >> 6] >> (idx & 63)) & 1) as u32,
            CellStore::Vals(vals) => vals[idx],
        }
    }

    /// The transposed game: the players swap roles.
    pub fn transpose(&self) -> GameMatrix {
        GameMatrix::from_fn(self.n, self.m, self.alphabet, |i, j| self.get(j, i))
            .expect("transpose of a valid matrix is valid")
    }

    /// Distinct values appearing in the matrix, ascending.
    pub fn distinct_values(&self) -> Vec<u32> {
        let mut seen = vec![false; self.alphabet as usize];
        for i in 0..self.m {
            for j in 0..self.n {
                seen[self.get(i, j) as usize] = true;
            }
        }
        (0..self.alphabet).filter(|&v| seen[v as usize]).collect()
    }

    pub fn is_constant(&self) -> bool {
        let v = self.get(0, 0);
        (0..self.m).all(|i| (0..self.n).all(|j| self.get(i, j) == v))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<GameMatrix> {
        serde_json::from_str(s).map_err(|e| Error::Format(format!("matrix JSON: {e}")))
    }
}

impl From<GameMatrix> for MatrixRepr {
    fn from(m: GameMatrix) -> MatrixRepr {
        let rows = (0..m.m)
            .map(|i| (0..m.n).map(|j| m.get(i, j)).collect())
            .collect();
        MatrixRepr { m: m.m, n: m.n, alphabet: m.alphabet, rows }
    }
}

impl TryFrom<MatrixRepr> for GameMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<GameMatrix> {
        if r.rows.len() != r.m || r.rows.iter().any(|row| row.len() != r.n) {
            return Err(Error::Shape(
                "matrix JSON dimensions disagree with the row grid".into(),
            ));
        }
        GameMatrix::new(r.rows, r.alphabet)
    }
}

impl PartialEq for GameMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
            && self.n == other.n
            && self.alphabet == other.alphabet
            && (0..self.m).all(|i| (0..self.n).all(|j| self.get(i, j) == other.get(i, j)))
    }
}

impl Eq for GameMatrix {}

impl std::fmt::Debug for GameMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "GameMatrix {}x{} over [0,{})", self.m, self.n, self.alphabet)?;
        for i in 0..self.m {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Embeds a boolean matrix into the top-left corner of a `2^n x 2^n`
/// all-zero table, the padding used to place a finite game inside a family
/// indexed by input bit-width.
pub fn pad_to_family(m: &GameMatrix, n_bits: u32, guard: CellGuard) -> Result<GameMatrix> {
    if m.alphabet() != 2 {
        return Err(Error::Domain("padding is defined for boolean matrices".into()));
    }
    let side = 1u128
        .checked_shl(n_bits)
        .ok_or_else(|| Error::Size("bit-width too large".into()))?;
    if (m.rows() as u128) > side || (m.cols() as u128) > side {
        return Err(Error::Domain(format!(
            "matrix {}x{} does not fit in a 2^{n_bits} square",
            m.rows(),
            m.cols()
        )));
    }
    guard.check(side, side, "pad_to_family")?;
    let side = side as usize;
    GameMatrix::from_fn(side, side, 2, |i, j| {
        if i < m.rows() && j < m.cols() {
            m.get(i, j)
        } else {
            0
        }
    })
}

/// Closed-form dimensions of the alternating game family member `phi_i`
/// built with interlace width `b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhiDims {
    pub b: u64,
    pub i: u64,
    pub rows: BigUint,
    pub cols: BigUint,
}

/// Evaluates the exact dimensions of `phi_i` without materializing it.
///
/// Even indices: rows `b^(b(b^t-1)/(b-1))`, cols `2^(b^t) * b^((b^t-1)/(b-1))`
/// with `t = i/2`; odd indices swap the shape through transposition. The
/// exponents must fit in a machine word; parameters beyond that cannot be
/// represented and are refused.
pub fn phi_dimensions(b: u64, i: u64) -> Result<PhiDims> {
    if b < 2 {
        return Err(Error::Domain(format!("interlace width must be at least 2, got {b}")));
    }
    let big_b = BigUint::from(b);
    let one = BigUint::one();
    let geom = |t: u64| -> BigUint {
        // (b^t - 1) / (b - 1), an integer for every t >= 0
        (pow_big(&big_b, t) - &one) / (BigUint::from(b - 1))
    };
    let to_exp = |e: BigUint, what: &str| -> Result<u64> {
        e.to_u64().ok_or_else(|| {
            Error::Size(format!("{what} exponent for b={b}, i={i} exceeds representable range"))
        })
    };
    let (rows, cols) = if i % 2 == 0 {
        let t = i / 2;
        let row_exp = to_exp(geom(t) * b, "row")?;
        let col_exp2 = to_exp(pow_big(&big_b, t), "column")?;
        let col_expb = to_exp(geom(t), "column")?;
        (
            pow_exp(&big_b, row_exp)?,
            pow_exp(&BigUint::from(2u32), col_exp2)? * pow_exp(&big_b, col_expb)?,
        )
    } else {
        let t = (i - 1) / 2;
        let row_exp2 = to_exp(pow_big(&big_b, t + 1), "row")?;
        let row_expb = to_exp(geom(t) * b, "row")?;
        let col_exp = to_exp(geom(t + 1), "column")?;
        (
            pow_exp(&BigUint::from(2u32), row_exp2)? * pow_exp(&big_b, row_expb)?,
            pow_exp(&big_b, col_exp)?,
        )
    };
    Ok(PhiDims { b, i, rows, cols })
}

fn pow_big(base: &BigUint, exp: u64) -> BigUint {
    num_traits::pow::Pow::pow(base, exp)
}

fn pow_exp(base: &BigUint, exp: u64) -> Result<BigUint> {
    // Refuse absurd expansions early: the result would have exp*log2(base) bits.
    let bits = base.bits().saturating_mul(exp);
    if bits > 1 << 26 {
        return Err(Error::Size(format!(
            "dimension 2^{bits}-scale value is too large to materialize"
        )));
    }
    Ok(num_traits::pow::Pow::pow(base, exp))
}
