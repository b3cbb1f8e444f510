//! Subgame containment: deciding whether one game embeds into another by
//! selecting and rearranging rows and columns.
//!
//! A witness is a pair of injections mapping the small game's rows and
//! columns into the large game's so that every cell agrees. Containment
//! implies the small game is never harder, which is what the lemma checkers
//! lean on, so the search here is complete: `None` means no witness exists.

use serde::{Deserialize, Serialize};

use crate::matrix::GameMatrix;

/// Row and column injections exhibiting `small` inside `large`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgameWitness {
    /// `rows[i]` is the large-game row playing the small game's row `i`.
    pub rows: Vec<usize>,
    /// `cols[j]` is the large-game column playing the small game's column `j`.
    pub cols: Vec<usize>,
}

impl SubgameWitness {
    /// Checks the witness cell by cell, including injectivity.
    pub fn verify(&self, small: &GameMatrix, large: &GameMatrix) -> bool {
        if self.rows.len() != small.rows() || self.cols.len() != small.cols() {
            return false;
        }
        if !injective(&self.rows, large.rows()) || !injective(&self.cols, large.cols()) {
            return false;
        }
        for i in 0..small.rows() {
            for j in 0..small.cols() {
                if small.get(i, j) != large.get(self.rows[i], self.cols[j]) {
                    return false;
                }
            }
        }
        true
    }
}

fn injective(map: &[usize], bound: usize) -> bool {
    let mut seen = vec![false; bound];
    map.iter().all(|&v| {
        if v >= bound || seen[v] {
            false
        } else {
            seen[v] = true;
            true
        }
    })
}

/// Complete search for a witness that `small` is a subgame of `large`.
///
/// Backtracks over row assignments, most-constrained small row first, and
/// prunes through per-column candidate sets; a bipartite matching at the
/// leaves settles column injectivity. Row and column order need not be
/// preserved by the embedding.
pub fn is_subgame(small: &GameMatrix, large: &GameMatrix) -> Option<SubgameWitness> {
    if small.rows() > large.rows() || small.cols() > large.cols() {
        return None;
    }

    // Match rows with many distinct values first; they constrain columns most.
    let mut order: Vec<usize> = (0..small.rows()).collect();
    let distinct = |i: usize| {
        let mut vals: Vec<u32> = (0..small.cols()).map(|j| small.get(i, j)).collect();
        vals.sort_unstable();
        vals.dedup();
        vals.len()
    };
    let scores: Vec<usize> = (0..small.rows()).map(distinct).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(scores[i]));

    let init: Vec<Vec<usize>> = (0..small.cols())
        .map(|_| (0..large.cols()).collect())
        .collect();
    let mut st = Search {
        small,
        large,
        order: &order,
        assigned: vec![usize::MAX; small.rows()],
        used: vec![false; large.rows()],
    };
    st.go(0, &init)
}

struct Search<'a> {
    small: &'a GameMatrix,
    large: &'a GameMatrix,
    order: &'a [usize],
    assigned: Vec<usize>,
    used: Vec<bool>,
}

impl<'a> Search<'a> {
    fn go(&mut self, depth: usize, cands: &[Vec<usize>]) -> Option<SubgameWitness> {
        if depth == self.order.len() {
            let cols = match_columns(cands, self.large.cols())?;
            return Some(SubgameWitness { rows: self.assigned.clone(), cols });
        }
        let si = self.order[depth];
        'rows: for r in 0..self.large.rows() {
            if self.used[r] {
                continue;
            }
            // Filter each small column's candidates against the new row.
            let mut next: Vec<Vec<usize>> = Vec::with_capacity(cands.len());
            for (j, cand) in cands.iter().enumerate() {
                let want = self.small.get(si, j);
                let filtered: Vec<usize> =
                    cand.iter().copied().filter(|&c| self.large.get(r, c) == want).collect();
                if filtered.is_empty() {
                    continue 'rows;
                }
                next.push(filtered);
            }
            if !hall_quick(&next, self.large.cols()) {
                continue;
            }
            self.assigned[si] = r;
            self.used[r] = true;
            if let Some(w) = self.go(depth + 1, &next) {
                return Some(w);
            }
            self.used[r] = false;
            self.assigned[si] = usize::MAX;
        }
        None
    }
}

/// Cheap necessary condition: the union of candidate columns must be large
/// enough to host an injection.
fn hall_quick(cands: &[Vec<usize>], bound: usize) -> bool {
    let mut seen = vec![false; bound];
    let mut count = 0usize;
    for cand in cands {
        for &c in cand {
            if !seen[c] {
                seen[c] = true;
                count += 1;
            }
        }
    }
    count >= cands.len()
}

/// Kuhn's augmenting-path matching of small columns into candidate columns.
fn match_columns(cands: &[Vec<usize>], bound: usize) -> Option<Vec<usize>> {
    let mut owner = vec![usize::MAX; bound];
    fn augment(
        j: usize,
        cands: &[Vec<usize>],
        owner: &mut [usize],
        visited: &mut [bool],
    ) -> bool {
        for &c in &cands[j] {
            if visited[c] {
                continue;
            }
            visited[c] = true;
            if owner[c] == usize::MAX || augment(owner[c], cands, owner, visited) {
                owner[c] = j;
                return true;
            }
        }
        false
    }
    for j in 0..cands.len() {
        let mut visited = vec![false; bound];
        if !augment(j, cands, &mut owner, &mut visited) {
            return None;
        }
    }
    let mut cols = vec![usize::MAX; cands.len()];
    for (c, &j) in owner.iter().enumerate() {
        if j != usize::MAX {
            cols[j] = c;
        }
    }
    Some(cols)
}

/// Set-level containment: every game in `large_set` must contain some game
/// of `small_set` as a subgame.
pub fn set_is_subgame(small_set: &[GameMatrix], large_set: &[GameMatrix]) -> bool {
    large_set
        .iter()
        .all(|phi| small_set.iter().any(|cand| is_subgame(cand, phi).is_some()))
}
