//! Equivalence of generated bases.
//!
//! Two generators `V₁`, `V₂` are compared in two independent ways:
//!
//! * by orbit: [`perm_equivalent`] compares canonical forms under row and
//!   column permutations;
//! * by the monomial criterion: [`meb_equivalent`] looks for a column
//!   permutation `P₁` such that `V₁·P₁⁻¹·V₂⁻¹ = P·D` is monomial, which is
//!   the same as `P⁻¹·V₁·P₁⁻¹ = D·V₂`.
//!
//! An equivalence witness can be lifted to an explicit bilocal operator with
//! [`witness_to_bilocal`].

mod bilocal;
mod canon;
mod perm;

pub use bilocal::{operator_schmidt_rank, witness_to_bilocal, witness_to_bilocal_with, BilocalWitness, RelabelingForm, MAX_BILOCAL_DIM};
pub use canon::{canonical_form, canonical_form_exhaustive, canonical_form_exhaustive_with, canonical_form_with, MAX_CANON_DIM, MAX_EXHAUSTIVE_DIM};
pub use perm::{phase_arg, DiagonalUnitary, Permutation};

use num_complex::Complex64;

use crate::chargroup::{decompositions, zeilinger_generator, Decomposition};
use crate::error::{Error, Result};
use crate::exact::{to_complex, zeilinger_defect, ComplexMatrix, ExponentMatrix, Tolerance};
use crate::par::{self, Exec};

use perm::factorial;

/// Largest dimension for the exhaustive monomial search.
pub const MAX_ORACLE_DIM: usize = 8;

/// Largest dimension accepted by [`enumerate_classes`].
pub const MAX_CLASS_DIM: usize = 12;

/// Classes are cross-checked against the monomial search up to this dimension.
pub const CLASS_CROSS_CHECK_DIM: usize = 6;

/// Tolerance and execution strategy shared by the searches.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchOptions {
    pub tol: Tolerance,
    pub exec: Exec,
}

/// `M = P·D`: a one of modulus 1 in each column, everything else ~0.
///
/// Returns `None` unless every row and column holds exactly one entry of
/// modulus within eps of 1 and all other entries are below eps.
pub fn monomial_factor(m: &ComplexMatrix, tol: Tolerance) -> Option<(Permutation, DiagonalUnitary)> {
    if !m.is_square() {
        return None;
    }
    let d = m.nrows();
    let mut image = vec![usize::MAX; d];
    let mut phases = vec![Complex64::new(0.0, 0.0); d];
    let mut row_used = vec![false; d];
    for c in 0..d {
        for r in 0..d {
            let z = m.get(r, c);
            let modulus = z.norm();
            if (modulus - 1.0).abs() <= tol.eps() {
                if image[c] != usize::MAX || row_used[r] {
                    return None;
                }
                image[c] = r;
                row_used[r] = true;
                phases[c] = z;
            } else if modulus > tol.eps() {
                return None;
            }
        }
        if image[c] == usize::MAX {
            return None;
        }
    }
    Some((Permutation::new(image).ok()?, DiagonalUnitary::new(phases, tol).ok()?))
}

/// Witness of `P⁻¹·V₁·P₁⁻¹ = D·V₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// `P₁`, acting on columns of `V₁`.
    pub col_perm: Permutation,
    /// `P`, acting on rows of `V₁`.
    pub row_perm: Permutation,
    pub diag: DiagonalUnitary,
}

impl Witness {
    /// `max |P⁻¹·V₁·P₁⁻¹ − D·V₂|`.
    pub fn residual(&self, v1: &ExponentMatrix, v2: &ExponentMatrix) -> Result<f64> {
        check_dims(v1, v2)?;
        let d = v1.dim();
        if self.col_perm.len() != d || self.row_perm.len() != d || self.diag.phases().len() != d {
            return Err(Error::DimensionMismatch { left: self.col_perm.len(), right: d });
        }
        let lhs = self
            .row_perm
            .inverse()
            .matrix()
            .mul(&to_complex(v1))?
            .mul(&self.col_perm.inverse().matrix())?;
        let rhs = self.diag.matrix().mul(&to_complex(v2))?;
        lhs.max_abs_diff(&rhs)
    }
}

/// Distinct canonical forms of the two generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub canon1: ExponentMatrix,
    pub canon2: ExponentMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub enum EquivalenceVerdict {
    Equivalent(Witness),
    Inequivalent(Certificate),
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Self::Equivalent(_))
    }
}

fn check_dims(e1: &ExponentMatrix, e2: &ExponentMatrix) -> Result<()> {
    if e1.dim() != e2.dim() {
        return Err(Error::DimensionMismatch { left: e1.dim(), right: e2.dim() });
    }
    Ok(())
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Both grids over a common root-of-unity order.
fn common_order(e1: &ExponentMatrix, e2: &ExponentMatrix) -> Result<(ExponentMatrix, ExponentMatrix)> {
    let (a, b) = (e1.order(), e2.order());
    let lcm = (a as u64 / gcd(a, b) as u64) * b as u64;
    let lcm = u32::try_from(lcm).map_err(|_| Error::InvalidDecomposition("order overflow".into()))?;
    Ok((e1.with_order(lcm)?, e2.with_order(lcm)?))
}

/// Canonical forms of both grids, expressed over a common order.
pub fn canonical_pair(e1: &ExponentMatrix, e2: &ExponentMatrix, exec: Exec) -> Result<Certificate> {
    check_dims(e1, e2)?;
    let (a, b) = common_order(e1, e2)?;
    Ok(Certificate { canon1: canonical_form_with(&a, exec)?, canon2: canonical_form_with(&b, exec)? })
}

/// True iff the grids agree up to row and column permutations.
pub fn perm_equivalent(e1: &ExponentMatrix, e2: &ExponentMatrix) -> Result<bool> {
    perm_equivalent_with(e1, e2, Exec::default())
}

pub fn perm_equivalent_with(e1: &ExponentMatrix, e2: &ExponentMatrix, exec: Exec) -> Result<bool> {
    let cert = canonical_pair(e1, e2, exec)?;
    Ok(cert.canon1 == cert.canon2)
}

pub fn meb_equivalent(v1: &ExponentMatrix, v2: &ExponentMatrix) -> Result<EquivalenceVerdict> {
    meb_equivalent_with(v1, v2, SearchOptions::default())
}

/// Exhaustive monomial search over column permutations `P₁` in
/// lexicographic order; the first success is the witness.
pub fn meb_equivalent_with(v1: &ExponentMatrix, v2: &ExponentMatrix, opts: SearchOptions) -> Result<EquivalenceVerdict> {
    check_dims(v1, v2)?;
    let d = v1.dim();
    if d > MAX_ORACLE_DIM {
        return Err(Error::BudgetExceeded { what: "monomial equivalence search", d, max: MAX_ORACLE_DIM });
    }
    let c1 = to_complex(v1);
    let c2 = to_complex(v2);
    for (name, c) in [("first", &c1), ("second", &c2)] {
        if let Some(why) = zeilinger_defect(c, opts.tol)? {
            return Err(Error::NotZeilinger(format!("{name} generator: {why}")));
        }
    }
    let v2_inv = c2.adjoint();

    let found = par::find_map_first(factorial(d), opts.exec, |rank| {
        let p1 = Permutation::from_lex_rank(d, rank);
        let inv = p1.inverse();
        // V₁·P₁⁻¹ has column c equal to column π₁⁻¹(c) of V₁.
        let a = ComplexMatrix::from_fn(d, d, |r, c| c1.get(r, inv.apply(c)));
        let m = a.mul(&v2_inv).expect("square");
        monomial_factor(&m, opts.tol).map(|(row_perm, diag)| Witness { col_perm: p1, row_perm, diag })
    });

    match found {
        Some(w) => Ok(EquivalenceVerdict::Equivalent(w)),
        None => {
            let cert = canonical_pair(v1, v2, opts.exec)?;
            if cert.canon1 == cert.canon2 {
                return Err(Error::Discrepancy(
                    "no monomial witness exists, yet the canonical forms coincide".into(),
                ));
            }
            Ok(EquivalenceVerdict::Inequivalent(cert))
        }
    }
}

/// Decompositions whose generators share a canonical form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceClass {
    pub members: Vec<Decomposition>,
    pub canonical: ExponentMatrix,
}

pub fn enumerate_classes(d: usize) -> Result<Vec<EquivalenceClass>> {
    enumerate_classes_with(d, SearchOptions::default())
}

/// Partitions `decompositions(d)` by canonical form, classes ordered by
/// their first member. For small `d` every pair is re-decided by the
/// monomial search and any disagreement is an error.
pub fn enumerate_classes_with(d: usize, opts: SearchOptions) -> Result<Vec<EquivalenceClass>> {
    if !(2..=MAX_CLASS_DIM).contains(&d) {
        return Err(Error::BudgetExceeded { what: "class enumeration", d, max: MAX_CLASS_DIM });
    }
    let decs = decompositions(d)?;
    let gens: Vec<ExponentMatrix> = decs.iter().map(zeilinger_generator).collect();
    let canons = par::map_collect(&gens, opts.exec, |g| canonical_form_with(g, Exec::Sequential))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut classes: Vec<EquivalenceClass> = Vec::new();
    for (dec, canon) in decs.iter().zip(canons) {
        match classes.iter_mut().find(|c| c.canonical == canon) {
            Some(class) => class.members.push(dec.clone()),
            None => classes.push(EquivalenceClass { members: vec![dec.clone()], canonical: canon }),
        }
    }

    if d <= CLASS_CROSS_CHECK_DIM {
        let class_of: Vec<usize> = decs
            .iter()
            .map(|dec| classes.iter().position(|c| c.members.contains(dec)).expect("assigned"))
            .collect();
        for i in 0..decs.len() {
            for j in i..decs.len() {
                let oracle = meb_equivalent_with(&gens[i], &gens[j], opts)?.is_equivalent();
                if oracle != (class_of[i] == class_of[j]) {
                    return Err(Error::Discrepancy(format!(
                        "{} vs {}: canonical forms say {}, monomial search says {}",
                        decs[i],
                        decs[j],
                        class_of[i] == class_of[j],
                        oracle
                    )));
                }
            }
        }
    }
    Ok(classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chargroup::{dft_generator, hadamard_generator};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zg(s: &str) -> ExponentMatrix {
        zeilinger_generator(&s.parse().unwrap())
    }

    #[test]
    fn monomial_factor_examples() {
        let tol = Tolerance::default();
        let (p, d) = monomial_factor(&ComplexMatrix::identity(3), tol).unwrap();
        assert!(p.is_identity());
        assert!(d.is_trivial(tol));

        let m = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let (p, d) = monomial_factor(&m, tol).unwrap();
        assert_eq!(p.image(), &[1, 0]);
        assert_eq!(d.phases(), &[c(1.0, 0.0), c(0.0, 1.0)]);
        assert_eq!(p.matrix().mul(&d.matrix()).unwrap(), m);

        assert!(monomial_factor(&to_complex(&dft_generator(2).unwrap()), tol).is_none());
        // Two unit entries in one row.
        let m = ComplexMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(monomial_factor(&m, tol).is_none());
    }

    #[test]
    fn perm_equivalent_examples() {
        assert!(perm_equivalent(&zg("6"), &zg("2x3")).unwrap());
        assert!(!perm_equivalent(&dft_generator(4).unwrap(), &hadamard_generator(2).unwrap()).unwrap());
        let e = zg("2x2");
        assert!(perm_equivalent(&e, &e).unwrap());
        assert!(matches!(perm_equivalent(&zg("4"), &zg("6")), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn hadamard_matches_binary_character_table() {
        for n in 1..=3u32 {
            let ones = vec!["2"; n as usize].join("x");
            assert!(perm_equivalent(&hadamard_generator(n).unwrap(), &zg(&ones)).unwrap(), "n={n}");
        }
        // d = 16 is past the canonical-form budget; the bit-reversal row
        // permutation relates the two grids directly.
        let h = hadamard_generator(4).unwrap();
        let z = zg("2x2x2x2");
        let rev: Vec<usize> = (0..16).map(|k: usize| k.reverse_bits() >> (usize::BITS - 4)).collect();
        let id: Vec<usize> = (0..16).collect();
        assert_eq!(h.permuted(&rev, &id), z);
    }

    #[test]
    fn reflexive_verdict_is_identity_witness() {
        let v = zg("2x3");
        match meb_equivalent(&v, &v).unwrap() {
            EquivalenceVerdict::Equivalent(w) => {
                assert!(w.col_perm.is_identity());
                assert!(w.row_perm.is_identity());
                assert!(w.diag.is_trivial(Tolerance::default()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dft4_vs_hadamard2_is_inequivalent() {
        match meb_equivalent(&dft_generator(4).unwrap(), &hadamard_generator(2).unwrap()).unwrap() {
            EquivalenceVerdict::Inequivalent(cert) => assert_ne!(cert.canon1, cert.canon2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cyclic_six_vs_product_is_equivalent() {
        let (v1, v2) = (zg("6"), zg("3x2"));
        match meb_equivalent(&v1, &v2).unwrap() {
            EquivalenceVerdict::Equivalent(w) => {
                assert!(!w.col_perm.is_identity());
                assert!(w.residual(&v1, &v2).unwrap() <= 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let id = ExponentMatrix::from_rows(2, [[0i64, 0], [0, 0]]).unwrap();
        assert!(matches!(meb_equivalent(&id, &zg("2")), Err(Error::NotZeilinger(_))));
        assert!(matches!(meb_equivalent(&zg("2"), &zg("3")), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(meb_equivalent(&zg("9"), &zg("3x3")), Err(Error::BudgetExceeded { .. })));
        assert!(enumerate_classes(13).is_err());
        assert!(enumerate_classes(1).is_err());
    }

    #[test]
    fn strategies_return_the_same_witness() {
        for (a, b) in [("6", "2x3"), ("2x3", "3x2"), ("4", "2x2")] {
            let seq = meb_equivalent_with(&zg(a), &zg(b), SearchOptions { exec: Exec::Sequential, ..Default::default() }).unwrap();
            let par = meb_equivalent_with(&zg(a), &zg(b), SearchOptions { exec: Exec::Parallel, ..Default::default() }).unwrap();
            assert_eq!(seq, par);
        }
    }

    #[test]
    fn class_examples() {
        let five = enumerate_classes(5).unwrap();
        assert_eq!(five.len(), 1);
        let four = enumerate_classes(4).unwrap();
        assert_eq!(four.len(), 2);
        assert_eq!(four[0].members, vec![Decomposition::new(vec![4]).unwrap()]);
        assert_eq!(four[1].members, vec![Decomposition::new(vec![2, 2]).unwrap()]);
        let eight = enumerate_classes(8).unwrap();
        let members: Vec<Vec<String>> =
            eight.iter().map(|c| c.members.iter().map(ToString::to_string).collect()).collect();
        assert_eq!(members, vec![vec!["[8]"], vec!["[2,2,2]"], vec!["[2,4]", "[4,2]"]]);
        let six = enumerate_classes(6).unwrap();
        assert_eq!(six.len(), 1);
    }
}
