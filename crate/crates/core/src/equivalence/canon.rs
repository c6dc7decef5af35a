//! Canonical form of an exponent grid under independent row and column
//! permutations: the lexicographically least row-major reading over the
//! whole orbit.
//!
//! [`canonical_form`] builds the minimum row by row. Once some rows are
//! fixed, the admissible column orders are those that keep the columns
//! grouped into cells of equal prefix, so the best continuation of a row is
//! its values sorted within each cell. Rows tying for the least continuation
//! are all explored; anything worse than the best completed grid is pruned.
//!
//! [`canonical_form_exhaustive`] scans every column permutation and sorts
//! rows, which is the same minimum by definition. It is kept as the
//! independent route for cross-checks.

use crate::error::{Error, Result};
use crate::exact::ExponentMatrix;
use crate::par::{self, Exec};

use super::perm::{factorial, Permutation};

/// Largest dimension accepted by [`canonical_form`].
pub const MAX_CANON_DIM: usize = 12;

/// Largest dimension accepted by [`canonical_form_exhaustive`].
pub const MAX_EXHAUSTIVE_DIM: usize = 8;

pub fn canonical_form(e: &ExponentMatrix) -> Result<ExponentMatrix> {
    canonical_form_with(e, Exec::default())
}

pub fn canonical_form_with(e: &ExponentMatrix, exec: Exec) -> Result<ExponentMatrix> {
    let d = e.dim();
    if d > MAX_CANON_DIM {
        return Err(Error::BudgetExceeded { what: "canonical form", d, max: MAX_CANON_DIM });
    }
    let all_cols: Vec<usize> = (0..d).collect();
    let rows: Vec<usize> = (0..d).collect();
    let root = vec![all_cols];
    let (key, firsts) = best_rows(e, &rows, &root);

    // Each tied first row seeds an independent search; the overall minimum
    // does not depend on how the seeds are scheduled.
    let best = par::min_by_map(firsts.len(), exec, |i| {
        let first = firsts[i];
        let mut search = Search { e, best: None };
        let mut out = key.clone();
        let remaining: Vec<usize> = rows.iter().copied().filter(|&r| r != first).collect();
        let cells = refine(e, &root, first);
        search.descend(&mut out, &remaining, &cells);
        search.best.expect("search reaches a leaf")
    })
    .expect("at least one row");
    Ok(ExponentMatrix::from_raw(d, e.order(), best))
}

/// Row continuation: the row's values sorted within each cell, cells in order.
fn row_key(e: &ExponentMatrix, row: usize, cells: &[Vec<usize>]) -> Vec<u32> {
    let mut key = Vec::with_capacity(e.dim());
    for cell in cells {
        let start = key.len();
        key.extend(cell.iter().map(|&c| e.get(row, c)));
        key[start..].sort_unstable();
    }
    key
}

/// Least continuation among `rows` and every row attaining it.
fn best_rows(e: &ExponentMatrix, rows: &[usize], cells: &[Vec<usize>]) -> (Vec<u32>, Vec<usize>) {
    let mut best: Option<Vec<u32>> = None;
    let mut ties = Vec::new();
    for &r in rows {
        let key = row_key(e, r, cells);
        match best.as_ref().map(|b| key.cmp(b)) {
            None | Some(std::cmp::Ordering::Less) => {
                best = Some(key);
                ties.clear();
                ties.push(r);
            }
            Some(std::cmp::Ordering::Equal) => ties.push(r),
            Some(std::cmp::Ordering::Greater) => {}
        }
    }
    (best.unwrap_or_default(), ties)
}

/// Splits every cell by the values of `row`, smaller values first.
fn refine(e: &ExponentMatrix, cells: &[Vec<usize>], row: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(cells.len());
    for cell in cells {
        if cell.len() == 1 {
            out.push(cell.clone());
            continue;
        }
        let mut sorted = cell.clone();
        sorted.sort_by_key(|&c| e.get(row, c));
        let mut start = 0;
        for i in 1..=sorted.len() {
            if i == sorted.len() || e.get(row, sorted[i]) != e.get(row, sorted[start]) {
                out.push(sorted[start..i].to_vec());
                start = i;
            }
        }
    }
    out
}

struct Search<'a> {
    e: &'a ExponentMatrix,
    best: Option<Vec<u32>>,
}

impl Search<'_> {
    fn descend(&mut self, out: &mut Vec<u32>, remaining: &[usize], cells: &[Vec<usize>]) {
        if remaining.is_empty() {
            if self.best.as_ref().is_none_or(|b| out.as_slice() < b.as_slice()) {
                self.best = Some(out.clone());
            }
            return;
        }
        let (key, ties) = best_rows(self.e, remaining, cells);
        let start = out.len();
        out.extend_from_slice(&key);
        let worse = self.best.as_ref().is_some_and(|b| out.as_slice() > &b[..out.len()]);
        if !worse {
            for &r in &ties {
                let rest: Vec<usize> = remaining.iter().copied().filter(|&x| x != r).collect();
                let refined = refine(self.e, cells, r);
                self.descend(out, &rest, &refined);
            }
        }
        out.truncate(start);
    }
}

pub fn canonical_form_exhaustive(e: &ExponentMatrix) -> Result<ExponentMatrix> {
    canonical_form_exhaustive_with(e, Exec::default())
}

/// Minimum over all `d!` column permutations of the row-sorted grid.
pub fn canonical_form_exhaustive_with(e: &ExponentMatrix, exec: Exec) -> Result<ExponentMatrix> {
    let d = e.dim();
    if d > MAX_EXHAUSTIVE_DIM {
        return Err(Error::BudgetExceeded { what: "exhaustive canonical form", d, max: MAX_EXHAUSTIVE_DIM });
    }
    let best = par::min_by_map(factorial(d), exec, |rank| {
        let perm = Permutation::from_lex_rank(d, rank);
        let mut rows: Vec<Vec<u32>> =
            e.rows().map(|row| perm.image().iter().map(|&c| row[c]).collect()).collect();
        rows.sort_unstable();
        rows.concat()
    })
    .expect("at least one permutation");
    Ok(ExponentMatrix::from_raw(d, e.order(), best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chargroup::{decompositions, dft_generator, hadamard_generator, zeilinger_generator};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn shuffle(e: &ExponentMatrix, rng: &mut impl rand::Rng) -> ExponentMatrix {
        let mut r: Vec<usize> = (0..e.dim()).collect();
        let mut c = r.clone();
        r.shuffle(rng);
        c.shuffle(rng);
        e.permuted(&r, &c)
    }

    #[test]
    fn small_cases() {
        let one = ExponentMatrix::from_rows(1, [[0i64]]).unwrap();
        assert_eq!(canonical_form(&one).unwrap(), one);
        let e = ExponentMatrix::from_rows(3, [[2i64, 1], [0, 2]]).unwrap();
        // Orbit readings: [0,2,2,1] (identity columns) and [1,2,2,0] (swapped).
        assert_eq!(canonical_form(&e).unwrap().entries(), &[0, 2, 2, 1]);
        assert_eq!(canonical_form_exhaustive(&e).unwrap().entries(), &[0, 2, 2, 1]);
    }

    #[test]
    fn dft4_and_hadamard2_differ() {
        let a = canonical_form(&dft_generator(4).unwrap()).unwrap();
        let b = canonical_form(&hadamard_generator(2).unwrap()).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn refinement_matches_exhaustive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for d in 2..=7 {
            for dec in decompositions(d).unwrap() {
                let g = shuffle(&zeilinger_generator(&dec), &mut rng);
                assert_eq!(canonical_form(&g).unwrap(), canonical_form_exhaustive(&g).unwrap(), "{dec}");
            }
        }
        // Grids with repeated rows and columns, not character tables.
        for _ in 0..40 {
            let g = ExponentMatrix::from_fn(5, 3, |_, _| rand::Rng::gen_range(&mut rng, 0..3)).unwrap();
            assert_eq!(canonical_form(&g).unwrap(), canonical_form_exhaustive(&g).unwrap());
        }
    }

    #[test]
    fn orbit_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in 2..=8 {
            for dec in decompositions(d).unwrap() {
                let g = zeilinger_generator(&dec);
                let canon = canonical_form(&g).unwrap();
                for _ in 0..50 {
                    assert_eq!(canonical_form(&shuffle(&g, &mut rng)).unwrap(), canon);
                }
            }
        }
    }

    #[test]
    fn strategies_agree() {
        let g = zeilinger_generator(&"2x2x2".parse().unwrap());
        assert_eq!(
            canonical_form_with(&g, Exec::Sequential).unwrap(),
            canonical_form_with(&g, Exec::Parallel).unwrap()
        );
        assert_eq!(
            canonical_form_exhaustive_with(&g, Exec::Sequential).unwrap(),
            canonical_form_exhaustive_with(&g, Exec::Parallel).unwrap()
        );
    }

    #[test]
    fn budget_guards() {
        let big = dft_generator(13).unwrap();
        assert!(matches!(canonical_form(&big), Err(Error::BudgetExceeded { .. })));
        let nine = dft_generator(9).unwrap();
        assert!(matches!(canonical_form_exhaustive(&nine), Err(Error::BudgetExceeded { .. })));
        assert!(canonical_form(&nine).is_ok());
    }
}
