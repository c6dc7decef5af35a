use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::{to_complex, unitarity_residual, ComplexMatrix, ExponentMatrix, Tolerance};
use crate::meb::{gcnot_index, generate_meb_with};
use crate::par;

use super::perm::{factorial, phase_arg, Permutation};
use super::{SearchOptions, Witness};

/// Largest dimension for the second-side permutation search.
pub const MAX_BILOCAL_DIM: usize = 6;

/// How the basis indices are relabeled by a bilocal witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelabelingForm {
    Identity,
    /// `(j, k) → (π(j), π(k))` with one permutation.
    Single,
    /// `(j, k) → (π₁(j), π₂(k))`.
    Pair,
    /// Not of product form.
    General,
}

/// Explicit bilocal map carrying basis 2 onto basis 1.
///
/// For each basis-2 index `(j, k)`, `W|Ψ⁽²⁾_{jk}⟩ = e^{iθ} |Ψ⁽¹⁾_{j'k'}⟩`
/// with `(j', k') = pair_map[j·d + k]` and `θ = thetas[j·d + k]`.
#[derive(Clone, Debug)]
pub struct BilocalWitness {
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
    /// Second-side permutation `P₂` that made `W` bilocal.
    pub p2: Permutation,
    pub transfer: ComplexMatrix,
    pub pair_map: Vec<(usize, usize)>,
    pub thetas: Vec<f64>,
    /// Largest `| |⟨Ψ⁽¹⁾|W|Ψ⁽²⁾⟩| − 1 |` over the matched pairs.
    pub overlap_residual: f64,
    /// `max |U₁ ⊗ U₂ − W|`.
    pub factor_residual: f64,
}

impl BilocalWitness {
    pub fn dim(&self) -> usize {
        self.u1.nrows()
    }

    pub fn relabeling_form(&self) -> RelabelingForm {
        let d = self.dim();
        let mut first = vec![usize::MAX; d];
        let mut second = vec![usize::MAX; d];
        for (idx, &(j2, k2)) in self.pair_map.iter().enumerate() {
            let (j, k) = (idx / d, idx % d);
            for (slot, value) in [(&mut first[j], j2), (&mut second[k], k2)] {
                if *slot == usize::MAX {
                    *slot = value;
                } else if *slot != value {
                    return RelabelingForm::General;
                }
            }
        }
        let identity = first.iter().enumerate().all(|(i, &p)| i == p);
        if identity && first == second {
            RelabelingForm::Identity
        } else if first == second {
            RelabelingForm::Single
        } else {
            RelabelingForm::Pair
        }
    }

    pub fn is_bijective(&self) -> bool {
        let d = self.dim();
        let mut seen = vec![false; d * d];
        self.pair_map.iter().all(|&(j, k)| j < d && k < d && !std::mem::replace(&mut seen[j * d + k], true))
    }
}

/// Integer `d` with `d² = n`.
fn square_root(n: usize) -> Option<usize> {
    let d = (n as f64).sqrt().round() as usize;
    (d * d == n).then_some(d)
}

/// `R[(a,a'),(b,b')] = W[(a,b),(a',b')]`, so that `W = A ⊗ B` iff `R = vec(A)·vec(B)ᵀ`.
fn realign(w: &DMatrix<Complex64>, d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d * d, d * d, |row, col| {
        let (a, a2) = (row / d, row % d);
        let (b, b2) = (col / d, col % d);
        w[(a * d + b, a2 * d + b2)]
    })
}

/// Number of singular values of the realigned operator above
/// `eps · σ_max`; 1 exactly for product operators.
pub fn operator_schmidt_rank(w: &ComplexMatrix, tol: Tolerance) -> Result<usize> {
    if !w.is_square() {
        return Err(Error::NotSquare { rows: w.nrows(), cols: w.ncols() });
    }
    let d = square_root(w.nrows()).ok_or(Error::DimensionMismatch { left: w.nrows(), right: 0 })?;
    let sv = realign(w.as_dmatrix(), d).singular_values();
    let max = sv.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol.eps() * max).count())
}

/// `W = GCNOT · (M ⊗ P₂⁻¹) · GCNOT`. GCNOT is an involutive permutation
/// `g`, so `W[r, c] = (M ⊗ P₂⁻¹)[g(r), g(c)]`.
fn transfer_operator(m: &ComplexMatrix, p2: &Permutation) -> ComplexMatrix {
    let d = m.nrows();
    let inner = m.kron(&p2.inverse().matrix());
    ComplexMatrix::from_fn(d * d, d * d, |r, c| inner.get(gcnot_index(d, r), gcnot_index(d, c)))
}

pub fn witness_to_bilocal(v1: &ExponentMatrix, v2: &ExponentMatrix, w: &Witness) -> Result<BilocalWitness> {
    witness_to_bilocal_with(v1, v2, w, SearchOptions::default())
}

/// Searches `P₂` in lexicographic order for a bilocal
/// `W = GCNOT·(V₁·P₁⁻¹·V₂⁻¹ ⊗ P₂⁻¹)·GCNOT`, factors it as `U₁ ⊗ U₂`, and
/// matches `W` applied to each basis-2 state against basis 1.
pub fn witness_to_bilocal_with(
    v1: &ExponentMatrix,
    v2: &ExponentMatrix,
    w: &Witness,
    opts: SearchOptions,
) -> Result<BilocalWitness> {
    let tol = opts.tol;
    let residual = w.residual(v1, v2)?;
    if residual > tol.eps() {
        return Err(Error::InvalidWitness(format!("residual {residual:.3e} exceeds {tol}")));
    }
    let d = v1.dim();
    if d > MAX_BILOCAL_DIM {
        return Err(Error::BudgetExceeded { what: "bilocal witness search", d, max: MAX_BILOCAL_DIM });
    }

    let m = to_complex(v1)
        .mul(&w.col_perm.inverse().matrix())?
        .mul(&to_complex(v2).adjoint())?;
    let searched = factorial(d);
    let (p2, transfer) = par::find_map_first(searched, opts.exec, |rank| {
        let p2 = Permutation::from_lex_rank(d, rank);
        let t = transfer_operator(&m, &p2);
        (operator_schmidt_rank(&t, tol).ok()? == 1).then_some((p2, t))
    })
    .ok_or(Error::NoBilocalWitness { searched })?;

    let (u1, u2) = factor_product(&transfer, d);
    let factor_residual = u1.kron(&u2).max_abs_diff(&transfer)?;
    for (name, u) in [("U1", &u1), ("U2", &u2)] {
        let r = unitarity_residual(u)?;
        if r > tol.eps() || factor_residual > tol.eps() {
            return Err(Error::Discrepancy(format!(
                "{name} unitarity residual {r:.3e}, factorization residual {factor_residual:.3e}"
            )));
        }
    }

    let basis1 = generate_meb_with(v1, tol)?;
    let basis2 = generate_meb_with(v2, tol)?;
    let t = transfer.as_dmatrix();
    let mut pair_map = Vec::with_capacity(d * d);
    let mut thetas = Vec::with_capacity(d * d);
    let mut overlap_residual: f64 = 0.0;
    for (idx, s2) in basis2.states().iter().enumerate() {
        let image: Vec<Complex64> = (0..d * d)
            .map(|r| (0..d * d).map(|c| t[(r, c)] * s2.amplitudes()[c]).sum())
            .collect();
        let mut hits = basis1.states().iter().enumerate().filter_map(|(target, s1)| {
            let ov: Complex64 = s1.amplitudes().iter().zip(&image).map(|(a, b)| a.conj() * b).sum();
            ((ov.norm() - 1.0).abs() <= tol.eps()).then_some((target, ov))
        });
        let (target, ov) = hits.next().ok_or_else(|| {
            Error::Discrepancy(format!("W maps Psi2_{}{} to no basis-1 state", idx / d, idx % d))
        })?;
        if hits.next().is_some() {
            return Err(Error::Discrepancy(format!(
                "W maps Psi2_{}{} onto several basis-1 states",
                idx / d,
                idx % d
            )));
        }
        overlap_residual = overlap_residual.max((ov.norm() - 1.0).abs());
        pair_map.push((target / d, target % d));
        thetas.push(phase_arg(ov));
    }

    let out = BilocalWitness { u1, u2, p2, transfer, pair_map, thetas, overlap_residual, factor_residual };
    if !out.is_bijective() {
        return Err(Error::Discrepancy("pair map is not a bijection".into()));
    }
    Ok(out)
}

/// Splits a rank-one realigned operator into `U₁ ⊗ U₂`, scaling `U₁` to
/// Frobenius norm `√d`.
fn factor_product(w: &ComplexMatrix, d: usize) -> (ComplexMatrix, ComplexMatrix) {
    let svd = realign(w.as_dmatrix(), d).svd(true, true);
    let (k, sigma) = svd
        .singular_values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MIN), |best, (i, s)| if s > best.1 { (i, s) } else { best });
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let scale = (d as f64).sqrt();
    let u1 = ComplexMatrix::from_fn(d, d, |a, a2| u[(a * d + a2, k)] * scale);
    let u2 = ComplexMatrix::from_fn(d, d, |b, b2| v_t[(k, b * d + b2)] * (sigma / scale));
    (u1, u2)
}
