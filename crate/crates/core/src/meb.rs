//! Maximally entangled bases generated as `GCNOT (V ⊗ 1) |j⟩|k⟩`, and the
//! checks that certify them.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::{inner, inv_sqrt, to_complex, zeilinger_defect, ComplexMatrix, ComplexVector, ExponentMatrix, Tolerance};
use crate::par::{self, Exec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Caps the number of failure messages recorded per check.
const MAX_DETAILS: usize = 8;

fn check_norm(amps: &[Complex64], tol: Tolerance) -> Result<()> {
    let norm = amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > tol.eps() {
        return Err(Error::Validation {
            path: Default::default(),
            msg: format!("state norm {norm:.12} is not 1"),
        });
    }
    Ok(())
}

/// Normalized single-qudit state.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    amps: Vec<Complex64>,
}

impl QuditState {
    pub fn new(amps: Vec<Complex64>, tol: Tolerance) -> Result<Self> {
        ComplexVector::new(amps.clone())?;
        if amps.is_empty() {
            return Err(Error::DimensionTooSmall { got: 0, min: 1 });
        }
        check_norm(&amps, tol)?;
        Ok(Self { amps })
    }

    /// `|index⟩` in dimension `d`.
    pub fn basis(d: usize, index: usize) -> Result<Self> {
        if index >= d {
            return Err(Error::IndexOutOfRange { index, bound: d });
        }
        let mut amps = vec![ZERO; d];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// `|1_G⟩ = d^{-1/2} Σ |j⟩`.
    pub fn group_identity(d: usize) -> Self {
        Self { amps: vec![Complex64::new(inv_sqrt(d), 0.0); d] }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }
}

/// Normalized two-qudit state; amplitude of `|a⟩|b⟩` sits at `a·d + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteState {
    d: usize,
    amps: Vec<Complex64>,
}

impl BipartiteState {
    pub fn new(d: usize, amps: Vec<Complex64>, tol: Tolerance) -> Result<Self> {
        if d == 0 {
            return Err(Error::DimensionTooSmall { got: 0, min: 1 });
        }
        if amps.len() != d * d {
            return Err(Error::DimensionMismatch { left: amps.len(), right: d * d });
        }
        ComplexVector::new(amps.clone())?;
        check_norm(&amps, tol)?;
        Ok(Self { d, amps })
    }

    /// `|a⟩|b⟩`.
    pub fn product_basis(d: usize, a: usize, b: usize) -> Result<Self> {
        for idx in [a, b] {
            if idx >= d {
                return Err(Error::IndexOutOfRange { index: idx, bound: d });
            }
        }
        let mut amps = vec![ZERO; d * d];
        amps[a * d + b] = Complex64::new(1.0, 0.0);
        Ok(Self { d, amps })
    }

    /// `|φ⟩|index⟩`.
    pub fn product(phi: &QuditState, index: usize) -> Result<Self> {
        let d = phi.dim();
        if index >= d {
            return Err(Error::IndexOutOfRange { index, bound: d });
        }
        let mut amps = vec![ZERO; d * d];
        for (m, a) in phi.amps.iter().enumerate() {
            amps[m * d + index] = *a;
        }
        Ok(Self { d, amps })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, a: usize, b: usize) -> Complex64 {
        self.amps[a * self.d + b]
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch { left: self.d, right: other.d });
        }
        Ok(inner(&self.amps, &other.amps))
    }
}

/// Target index of `GCNOT |j⟩|k⟩ = |j⟩|j ⊖ k⟩`, flattened.
#[inline]
pub fn gcnot_index(d: usize, flat: usize) -> usize {
    let (j, k) = (flat / d, flat % d);
    j * d + (j + d - k) % d
}

pub fn gcnot(s: &BipartiteState) -> BipartiteState {
    let d = s.d;
    let mut amps = vec![ZERO; d * d];
    for (flat, a) in s.amps.iter().enumerate() {
        amps[gcnot_index(d, flat)] = *a;
    }
    BipartiteState { d, amps }
}

/// GCNOT as a `d²×d²` permutation matrix.
pub fn gcnot_matrix(d: usize) -> ComplexMatrix {
    let n = d * d;
    let mut m = DMatrix::zeros(n, n);
    for flat in 0..n {
        m[(gcnot_index(d, flat), flat)] = Complex64::new(1.0, 0.0);
    }
    ComplexMatrix::from_dmatrix(m).expect("finite")
}

/// Where a basis came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub label: String,
    pub generator: Option<ExponentMatrix>,
}

/// `d²` states indexed by `(j, k)`, stored at `j·d + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct MebBasis {
    d: usize,
    states: Vec<BipartiteState>,
    provenance: Provenance,
}

impl MebBasis {
    pub fn from_states(d: usize, states: Vec<BipartiteState>, provenance: Provenance) -> Result<Self> {
        if states.len() != d * d {
            return Err(Error::DimensionMismatch { left: states.len(), right: d * d });
        }
        if let Some(s) = states.iter().find(|s| s.d != d) {
            return Err(Error::DimensionMismatch { left: s.d, right: d });
        }
        if let Some(g) = &provenance.generator {
            if g.dim() != d {
                return Err(Error::DimensionMismatch { left: g.dim(), right: d });
            }
        }
        Ok(Self { d, states, provenance })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn state(&self, j: usize, k: usize) -> &BipartiteState {
        &self.states[j * self.d + k]
    }

    pub fn states(&self) -> &[BipartiteState] {
        &self.states
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    #[cfg(test)]
    pub(crate) fn states_mut(&mut self) -> &mut Vec<BipartiteState> {
        &mut self.states
    }
}

/// Basis `GCNOT (V ⊗ 1)|j⟩|k⟩`; the generator must be a Zeilinger matrix.
pub fn generate_meb(v: &ExponentMatrix) -> Result<MebBasis> {
    generate_meb_with(v, Tolerance::default())
}

pub fn generate_meb_with(v: &ExponentMatrix, tol: Tolerance) -> Result<MebBasis> {
    let vc = to_complex(v);
    if let Some(why) = zeilinger_defect(&vc, tol)? {
        return Err(Error::NotZeilinger(why));
    }
    let d = v.dim();
    let mut states = Vec::with_capacity(d * d);
    for j in 0..d {
        let phi = QuditState { amps: (0..d).map(|m| vc.get(m, j)).collect() };
        for k in 0..d {
            states.push(gcnot(&BipartiteState::product(&phi, k)?));
        }
    }
    Ok(MebBasis {
        d,
        states,
        provenance: Provenance { label: "generator".into(), generator: Some(v.clone()) },
    })
}

/// The four states `2^{-1/2} Σ_m (−1)^{jm} |m⟩|m ⊕ k⟩`.
pub fn bell_basis() -> MebBasis {
    let s = inv_sqrt(2);
    let mut states = Vec::with_capacity(4);
    for j in 0..2 {
        for k in 0..2 {
            let mut amps = vec![ZERO; 4];
            for m in 0..2 {
                let sign = if (j * m) % 2 == 0 { 1.0 } else { -1.0 };
                amps[m * 2 + (m ^ k)] = Complex64::new(sign * s, 0.0);
            }
            states.push(BipartiteState { d: 2, amps });
        }
    }
    MebBasis { d: 2, states, provenance: Provenance { label: "bell".into(), generator: None } }
}

fn circ(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let scale = (a.len() as f64).sqrt();
    a.iter().zip(b).map(|(x, y)| x * y * scale).collect()
}

/// `(a ∘ b)_j = √d · a_j · b_j`, not renormalized.
pub fn vector_mul(a: &QuditState, b: &QuditState) -> Result<ComplexVector> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    ComplexVector::new(circ(&a.amps, &b.amps))
}

/// The set `Φ` of `d` single-qudit states.
#[derive(Clone, Debug, PartialEq)]
pub struct StateFamily {
    members: Vec<QuditState>,
}

impl StateFamily {
    pub fn new(members: Vec<QuditState>) -> Result<Self> {
        let d = members.len();
        if d == 0 {
            return Err(Error::DimensionTooSmall { got: 0, min: 1 });
        }
        if let Some(m) = members.iter().find(|m| m.dim() != d) {
            return Err(Error::DimensionMismatch { left: m.dim(), right: d });
        }
        Ok(Self { members })
    }

    /// Columns of the generator, `φ_j = V|j⟩`.
    pub fn from_generator(v: &ExponentMatrix) -> Self {
        let vc = to_complex(v);
        let d = v.dim();
        let members = (0..d)
            .map(|j| QuditState { amps: (0..d).map(|m| vc.get(m, j)).collect() })
            .collect();
        Self { members }
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[QuditState] {
        &self.members
    }
}

/// Outcome of the group-axiom checks on a [`StateFamily`] under `∘`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroupReport {
    pub closure: bool,
    pub identity_present: bool,
    pub inverses: bool,
    pub power_condition: bool,
    pub commutative: bool,
    pub failures: Vec<String>,
}

impl GroupReport {
    pub fn all_pass(&self) -> bool {
        self.closure && self.identity_present && self.inverses && self.power_condition && self.commutative
    }
}

struct Failures {
    lines: Vec<String>,
    counts: Vec<(&'static str, usize)>,
}

impl Failures {
    fn new() -> Self {
        Self { lines: Vec::new(), counts: Vec::new() }
    }

    fn push(&mut self, check: &'static str, msg: impl FnOnce() -> String) {
        let count = match self.counts.iter_mut().find(|(c, _)| *c == check) {
            Some((_, n)) => n,
            None => {
                self.counts.push((check, 0));
                &mut self.counts.last_mut().unwrap().1
            }
        };
        *count += 1;
        if *count <= MAX_DETAILS {
            self.lines.push(format!("{check}: {}", msg()));
        }
    }

    fn finish(mut self) -> Vec<String> {
        for (check, n) in &self.counts {
            if *n > MAX_DETAILS {
                self.lines.push(format!("{check}: ... and {} more", n - MAX_DETAILS));
            }
        }
        self.lines
    }
}

/// Index of the member whose overlap with `v` has modulus within eps of 1.
fn match_member(fam: &StateFamily, v: &[Complex64], tol: Tolerance) -> Option<usize> {
    fam.members.iter().position(|m| (inner(&m.amps, v).norm() - 1.0).abs() <= tol.eps())
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Checks closure, identity, inverses, the `d`-th power condition and
/// commutativity of `(Φ, ∘)`. Failures are reported, never thrown.
pub fn group_verify(fam: &StateFamily, tol: Tolerance) -> GroupReport {
    let d = fam.dim();
    let members = &fam.members;
    let one = QuditState::group_identity(d);
    let mut fails = Failures::new();

    let mut closure = true;
    let mut commutative = true;
    for (i, a) in members.iter().enumerate() {
        for (j, b) in members.iter().enumerate() {
            let ab = circ(&a.amps, &b.amps);
            if match_member(fam, &ab, tol).is_none() {
                closure = false;
                fails.push("closure", || format!("phi_{i} o phi_{j} is not a family member"));
            }
            if j > i {
                let ba = circ(&b.amps, &a.amps);
                let diff = max_diff(&ab, &ba);
                if diff > tol.eps() {
                    commutative = false;
                    fails.push("commutative", || format!("phi_{i} o phi_{j} != phi_{j} o phi_{i} ({diff:.3e})"));
                }
            }
        }
    }

    let identity_present = match_member(fam, &one.amps, tol).is_some();
    if !identity_present {
        fails.push("identity", || "|1_G> is not a family member".into());
    }

    let mut inverses = true;
    for (i, a) in members.iter().enumerate() {
        let has_inverse = members
            .iter()
            .any(|b| (inner(&one.amps, &circ(&a.amps, &b.amps)).norm() - 1.0).abs() <= tol.eps());
        if !has_inverse {
            inverses = false;
            fails.push("inverses", || format!("phi_{i} has no inverse"));
        }
    }

    let mut power_condition = true;
    for (i, a) in members.iter().enumerate() {
        let mut acc = a.amps.clone();
        for _ in 1..d {
            acc = circ(&acc, &a.amps);
        }
        let diff = max_diff(&acc, &one.amps);
        if diff > tol.eps() {
            power_condition = false;
            fails.push("power", || format!("phi_{i}^(o{d}) differs from |1_G> by {diff:.3e}"));
        }
    }

    GroupReport { closure, identity_present, inverses, power_condition, commutative, failures: fails.finish() }
}

/// `ρ_A = Tr_B |ψ⟩⟨ψ|`.
pub fn reduced_density(s: &BipartiteState) -> ComplexMatrix {
    let d = s.d;
    ComplexMatrix::from_fn(d, d, |a, a2| {
        (0..d).map(|b| s.amplitude(a, b) * s.amplitude(a2, b).conj()).sum()
    })
}

/// Von Neumann entropy in bits; eigenvalues at or below eps count as zero.
pub fn entropy_bits(rho: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    if !rho.is_square() {
        return Err(Error::NotSquare { rows: rho.nrows(), cols: rho.ncols() });
    }
    let herm = rho.max_abs_diff(&rho.adjoint())?;
    if herm > tol.eps() {
        return Err(Error::NotDensityMatrix(format!("not Hermitian (residual {herm:.3e})")));
    }
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > tol.eps() {
        return Err(Error::NotDensityMatrix(format!("trace {tr} is not 1")));
    }
    let eig = rho.as_dmatrix().clone().symmetric_eigen();
    let mut s = 0.0;
    for &lambda in eig.eigenvalues.iter() {
        if lambda < -tol.eps() {
            return Err(Error::NotDensityMatrix(format!("negative eigenvalue {lambda:.3e}")));
        }
        if lambda > tol.eps() {
            s -= lambda * lambda.log2();
        }
    }
    Ok(s)
}

/// Outcome of [`verify_meb`].
#[derive(Clone, Debug, PartialEq)]
pub struct MebReport {
    /// Gram matrix equals the identity.
    pub orthonormal: bool,
    /// Every reduced state has entropy `log₂ d`.
    pub maximally_entangled: bool,
    /// Flat-modulus condition on the generator columns; `None` without a generator.
    pub flat_generator: Option<bool>,
    pub gram_residual: f64,
    pub max_entropy_gap: f64,
    pub failures: Vec<String>,
}

impl MebReport {
    pub fn all_pass(&self) -> bool {
        self.orthonormal && self.maximally_entangled && self.flat_generator.unwrap_or(true)
    }
}

pub fn verify_meb(basis: &MebBasis, tol: Tolerance) -> MebReport {
    verify_meb_with(basis, tol, Exec::default())
}

/// Runs every check and records every failure.
pub fn verify_meb_with(basis: &MebBasis, tol: Tolerance, exec: Exec) -> MebReport {
    let d = basis.d;
    let n = d * d;
    let mut fails = Failures::new();

    let cols: Vec<Complex64> = basis.states.iter().flat_map(|s| s.amps.iter().copied()).collect();
    let a = DMatrix::from_column_slice(n, n, &cols);
    let gram = a.adjoint() * &a;
    let mut gram_residual: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let want = if r == c { 1.0 } else { 0.0 };
            let diff = (gram[(r, c)] - want).norm();
            gram_residual = gram_residual.max(diff);
            if diff > tol.eps() && r <= c {
                fails.push("gram", || {
                    format!("<Psi_{}{}|Psi_{}{}> off by {diff:.3e}", r / d, r % d, c / d, c % d)
                });
            }
        }
    }
    let orthonormal = gram_residual <= tol.eps();

    let target = (d as f64).log2();
    let entropies = par::map_collect(&basis.states, exec, |s| entropy_bits(&reduced_density(s), tol));
    let mut max_entropy_gap: f64 = 0.0;
    for (idx, e) in entropies.into_iter().enumerate() {
        match e {
            Ok(s) => {
                let gap = (s - target).abs();
                max_entropy_gap = max_entropy_gap.max(gap);
                if gap > tol.eps() {
                    fails.push("entanglement", || {
                        format!("Psi_{}{} has entropy {s:.12}, expected {target:.12}", idx / d, idx % d)
                    });
                }
            }
            Err(err) => {
                max_entropy_gap = f64::INFINITY;
                fails.push("entanglement", || format!("Psi_{}{}: {err}", idx / d, idx % d));
            }
        }
    }
    let maximally_entangled = max_entropy_gap <= tol.eps();

    let flat_generator = basis.provenance.generator.as_ref().map(|g| {
        let vc = to_complex(g);
        let flat = inv_sqrt(d);
        let mut ok = true;
        for k in 0..d {
            for j in 0..d {
                let modulus = vc.get(k, j).norm();
                if (modulus - flat).abs() > tol.eps() {
                    ok = false;
                    fails.push("flat", || format!("|<{k}|phi_{j}>| = {modulus:.12}"));
                }
            }
        }
        ok
    });

    MebReport {
        orthonormal,
        maximally_entangled,
        flat_generator,
        gram_residual,
        max_entropy_gap,
        failures: fails.finish(),
    }
}
