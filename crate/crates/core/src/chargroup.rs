//! Character tables of `Z_{d₁} × … × Z_{d_r}` as generator matrices.
//!
//! A group element `j` is encoded by digits `m_i` under the weights
//! `δ_i = d₁·…·d_{i−1}`; a character label `n` by digits `n_i` under
//! `D_i = d_{i+1}·…·d_r`. The character value is `ω_d^{Σ (d/d_i)·n_i·m_i}`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExponentMatrix, RootExponent};

/// Ordered factorization `d = d₁·…·d_r` with its mixed-radix weights.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Decomposition {
    d: usize,
    factors: Vec<usize>,
    deltas: Vec<usize>,
    big_d: Vec<usize>,
}

impl Decomposition {
    /// Accepts `[d]` for any `d ≥ 1`, or two or more factors each `≥ 2`.
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        match factors.as_slice() {
            [] => return Err(Error::InvalidDecomposition("empty factor list".into())),
            [0] => return Err(Error::InvalidDecomposition("dimension 0".into())),
            [_] => {}
            many => {
                if let Some(f) = many.iter().find(|&&f| f < 2) {
                    return Err(Error::InvalidDecomposition(format!(
                        "factor {f} in {many:?}; nontrivial factors must be at least 2"
                    )));
                }
            }
        }
        let d = factors
            .iter()
            .try_fold(1usize, |acc, &f| acc.checked_mul(f))
            .ok_or_else(|| Error::InvalidDecomposition("product overflows".into()))?;
        if d > u32::MAX as usize {
            return Err(Error::InvalidDecomposition(format!("dimension {d} too large")));
        }
        let r = factors.len();
        let mut deltas = vec![1; r];
        for i in 1..r {
            deltas[i] = deltas[i - 1] * factors[i - 1];
        }
        let mut big_d = vec![1; r];
        for i in (0..r.saturating_sub(1)).rev() {
            big_d[i] = big_d[i + 1] * factors[i + 1];
        }
        Ok(Self { d, factors, deltas, big_d })
    }

    pub fn trivial(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    /// Weights `δ_i` of the group-element digits.
    pub fn deltas(&self) -> &[usize] {
        &self.deltas
    }

    /// Weights `D_i` of the character-label digits.
    pub fn big_d(&self) -> &[usize] {
        &self.big_d
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.len() == 1
    }

    /// Flag syntax, e.g. `2x3`.
    pub fn flag(&self) -> String {
        let parts: Vec<String> = self.factors.iter().map(usize::to_string).collect();
        parts.join("x")
    }
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(usize::to_string).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

impl FromStr for Decomposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let factors = s
            .split('x')
            .map(|p| {
                p.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidDecomposition(format!("cannot parse factor {p:?} in {s:?}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }
}

impl TryFrom<Vec<usize>> for Decomposition {
    type Error = Error;

    fn try_from(factors: Vec<usize>) -> Result<Self> {
        Self::new(factors)
    }
}

impl From<Decomposition> for Vec<usize> {
    fn from(dec: Decomposition) -> Self {
        dec.factors
    }
}

/// Mixed-radix digits of an index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitVector(Vec<usize>);

impl DigitVector {
    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    /// Index reproduced from the digits under `weights`.
    pub fn value(&self, weights: &[usize]) -> usize {
        self.0.iter().zip(weights).map(|(m, w)| m * w).sum()
    }
}

/// The trivial decomposition `[d]` followed by every ordered factorization
/// into two or more factors `≥ 2`, the latter in lexicographic order.
pub fn decompositions(d: usize) -> Result<Vec<Decomposition>> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { got: d, min: 2 });
    }
    let mut all = Vec::new();
    let mut prefix = Vec::new();
    ordered_factorizations(d, &mut prefix, &mut all);
    all.retain(|f| f.len() >= 2);
    all.sort();
    std::iter::once(vec![d]).chain(all).map(Decomposition::new).collect()
}

fn ordered_factorizations(rest: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if rest == 1 {
        if !prefix.is_empty() {
            out.push(prefix.clone());
        }
        return;
    }
    for f in 2..=rest {
        if rest % f == 0 {
            prefix.push(f);
            ordered_factorizations(rest / f, prefix, out);
            prefix.pop();
        }
    }
}

fn check_index(index: usize, d: usize) -> Result<()> {
    if index >= d {
        Err(Error::IndexOutOfRange { index, bound: d })
    } else {
        Ok(())
    }
}

/// Digits `m_i` of a group element `j = Σ m_i δ_i`.
pub fn digits_j(j: usize, dec: &Decomposition) -> Result<DigitVector> {
    check_index(j, dec.d)?;
    Ok(DigitVector(dec.factors.iter().zip(&dec.deltas).map(|(&f, &w)| (j / w) % f).collect()))
}

/// Digits `n_i` of a character label `n = Σ n_i D_i`.
pub fn digits_n(n: usize, dec: &Decomposition) -> Result<DigitVector> {
    check_index(n, dec.d)?;
    Ok(DigitVector(dec.factors.iter().zip(&dec.big_d).map(|(&f, &w)| (n / w) % f).collect()))
}

/// `Σ (d/d_i)·n_i·m_i mod d`.
pub fn dot(n: usize, j: usize, dec: &Decomposition) -> Result<u32> {
    let ns = digits_n(n, dec)?;
    let ms = digits_j(j, dec)?;
    Ok(dot_digits(&ns, &ms, dec))
}

fn dot_digits(ns: &DigitVector, ms: &DigitVector, dec: &Decomposition) -> u32 {
    let d = dec.d as u64;
    let sum = dec
        .factors
        .iter()
        .zip(ns.0.iter().zip(&ms.0))
        .map(|(&f, (&n, &m))| (dec.d / f) as u64 * ((n * m) % f) as u64)
        .sum::<u64>();
    (sum % d) as u32
}

/// `χ^{(n)}(φ_j) = ω_d^{n⃗·j⃗}`.
pub fn character(n: usize, j: usize, dec: &Decomposition) -> Result<RootExponent> {
    RootExponent::new(dec.d as u32, dot(n, j, dec)? as i64)
}

/// Character-table generator: entry `(k, j) = dot(j, k)`, so column `j` is
/// `φ_j` with components `χ^{(j)}(φ_k)`.
pub fn zeilinger_generator(dec: &Decomposition) -> ExponentMatrix {
    let d = dec.d;
    let ns: Vec<DigitVector> = (0..d).map(|n| digits_n(n, dec).expect("index in range")).collect();
    let ms: Vec<DigitVector> = (0..d).map(|j| digits_j(j, dec).expect("index in range")).collect();
    let mut entries = Vec::with_capacity(d * d);
    for k in 0..d {
        for j in 0..d {
            entries.push(dot_digits(&ns[j], &ms[k], dec));
        }
    }
    ExponentMatrix::from_raw(d, d as u32, entries)
}

/// `DFT_d`: entry `(j, k) = jk mod d`.
pub fn dft_generator(d: usize) -> Result<ExponentMatrix> {
    if d == 0 {
        return Err(Error::DimensionTooSmall { got: 0, min: 1 });
    }
    ExponentMatrix::from_fn(d, d as u32, |j, k| ((j * k) % d) as i64)
}

/// `H_n = H ⊗ H_{n−1}` over `ω_{2^n}`; entries are `0` or `2^{n−1}`.
pub fn hadamard_generator(n: u32) -> Result<ExponentMatrix> {
    if n == 0 {
        return Err(Error::DimensionTooSmall { got: 0, min: 1 });
    }
    if n > 16 {
        return Err(Error::BudgetExceeded { what: "Hadamard generator", d: 1 << n.min(63), max: 1 << 16 });
    }
    // Sign bits of H_1, then Kronecker recursion on the sign grid.
    let mut signs: Vec<u8> = vec![0, 0, 0, 1];
    let mut size = 2usize;
    for _ in 1..n {
        let next = size * 2;
        let mut grid = vec![0u8; next * next];
        for a in 0..2 {
            for b in 0..2 {
                let outer = (a & b) as u8;
                for r in 0..size {
                    for c in 0..size {
                        grid[(a * size + r) * next + b * size + c] = outer ^ signs[r * size + c];
                    }
                }
            }
        }
        signs = grid;
        size = next;
    }
    let half = (size / 2) as u32;
    Ok(ExponentMatrix::from_raw(size, size as u32, signs.into_iter().map(|s| s as u32 * half).collect()))
}
