use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::{ComplexMatrix, Tolerance};

/// Bijection on `[0, d)`; the operator is `P|i⟩ = |π(i)⟩`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let d = image.len();
        let mut seen = vec![false; d];
        for &i in &image {
            if i >= d || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPermutation(format!("{image:?} is not a bijection on [0, {d})")));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(d: usize) -> Self {
        Self { image: (0..d).collect() }
    }

    /// The `rank`-th permutation of `[0, d)` in lexicographic order of images.
    pub fn from_lex_rank(d: usize, mut rank: usize) -> Self {
        let mut pool: Vec<usize> = (0..d).collect();
        let mut image = Vec::with_capacity(d);
        for i in (0..d).rev() {
            let f = factorial(i);
            let idx = rank / f;
            rank %= f;
            image.push(pool.remove(idx));
        }
        Self { image }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i]
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &p) in self.image.iter().enumerate() {
            inv[p] = i;
        }
        Self { image: inv }
    }

    /// `self ∘ other`, i.e. `other` first.
    pub fn compose(&self, other: &Self) -> Self {
        Self { image: other.image.iter().map(|&i| self.image[i]).collect() }
    }

    /// Permutation matrix with a one at `(π(i), i)`.
    pub fn matrix(&self) -> ComplexMatrix {
        let d = self.len();
        ComplexMatrix::from_fn(d, d, |r, c| {
            if self.image[c] == r {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.image.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

pub(crate) fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Diagonal operator of unit-modulus phases.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalUnitary {
    phases: Vec<Complex64>,
}

impl DiagonalUnitary {
    pub fn new(phases: Vec<Complex64>, tol: Tolerance) -> Result<Self> {
        if let Some((i, p)) = phases.iter().enumerate().find(|(_, p)| (p.norm() - 1.0).abs() > tol.eps()) {
            return Err(Error::InvalidWitness(format!("phase {i} has modulus {}", p.norm())));
        }
        Ok(Self { phases })
    }

    pub fn ones(d: usize) -> Self {
        Self { phases: vec![Complex64::new(1.0, 0.0); d] }
    }

    pub fn phases(&self) -> &[Complex64] {
        &self.phases
    }

    /// Arguments in `[0, 2π)`.
    pub fn args(&self) -> Vec<f64> {
        self.phases.iter().map(|p| phase_arg(*p)).collect()
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&self.phases)
    }

    pub fn is_trivial(&self, tol: Tolerance) -> bool {
        self.phases.iter().all(|p| (p - Complex64::new(1.0, 0.0)).norm() <= tol.eps())
    }
}

/// Argument of `z` in `[0, 2π)`.
pub fn phase_arg(z: Complex64) -> f64 {
    let a = z.arg().rem_euclid(std::f64::consts::TAU);
    // rem_euclid can round up to exactly 2π for tiny negative angles
    if a >= std::f64::consts::TAU {
        0.0
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lex_ranks_enumerate_in_order() {
        let all: Vec<Vec<usize>> = (0..24).map(|r| Permutation::from_lex_rank(4, r).image().to_vec()).collect();
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(all, sorted);
        assert_eq!(all.len(), 24);
        assert!(Permutation::from_lex_rank(5, 0).is_identity());
        assert_eq!(Permutation::from_lex_rank(3, 5).image(), &[2, 1, 0]);
    }

    #[test]
    fn inverse_compose_and_matrix() {
        let p = Permutation::new(vec![2, 0, 3, 1]).unwrap();
        assert!(p.compose(&p.inverse()).is_identity());
        assert!(p.inverse().compose(&p).is_identity());
        let q = Permutation::new(vec![1, 0, 2, 3]).unwrap();
        let pq = p.compose(&q).matrix();
        assert_eq!(pq, p.matrix().mul(&q.matrix()).unwrap());
        assert_eq!(p.matrix().get(2, 0), Complex64::new(1.0, 0.0));
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
    }

    #[test]
    fn phases() {
        let tol = Tolerance::default();
        let d = DiagonalUnitary::new(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, -1.0)], tol).unwrap();
        let args = d.args();
        assert_eq!(args[0], 0.0);
        assert!((args[1] - 1.5 * std::f64::consts::PI).abs() < 1e-15);
        assert!(DiagonalUnitary::new(vec![Complex64::new(0.5, 0.0)], tol).is_err());
        assert_eq!(phase_arg(Complex64::new(1.0, -1e-300)), 0.0);
    }
}
