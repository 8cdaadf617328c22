//! Finite-dimensional POVMs on a cell decomposition of the real line:
//! validation, Naimark dilation, operator decomposition, compression, and
//! the induced consistent measure families.
//!
//! A finite grid of cells stands in for the Borel sets; the two unbounded
//! tail cells carry clamped representatives and a mass diagnostic. Checks
//! that are genuinely infinite dimensional have no content here and are
//! deliberately out of scope: domain identities like
//! D(A) = { ψ : λ square integrable against Q_{ψ,ψ} } trivialize on a
//! finite-dimensional space, and essential selfadjointness from
//! moment-problem uniqueness is a statement about closures that a matrix
//! model cannot probe. The dilation round trip, the family/POVM bijection
//! and the quadrature-versus-algebra oracle tests are the finite-scale
//! surrogates standing in for them.

pub mod family;
pub mod halfline;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::TruncatedRep;
use crate::config::Tolerances;
use crate::error::{Error, Result};

pub use family::{
    build_probe_closure, consistency_check, family_to_povm, induced_family,
    induced_family_with_closure, seminorm_polarization, CombinationTable, ConsistencyReport,
    ConsistentFamily, FamilyEntry, PolarizationGram,
};
pub use halfline::{halfline_momentum_measures, HalflineMasses};

/// Partition of the real line into M cells
/// (-inf, x_1], (x_1, x_2], ..., (x_{M-1}, inf) with a representative point
/// per cell. Tail representatives are clamped one median cell width beyond
/// the outermost boundaries.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellGrid {
    boundaries: Vec<f64>,
    representatives: Vec<f64>,
}

impl CellGrid {
    /// Grid with automatic representatives: midpoints inside, clamped tails.
    pub fn new(boundaries: Vec<f64>) -> Result<Self> {
        Self::check_boundaries(&boundaries)?;
        let n = boundaries.len();
        let widths: Vec<f64> = boundaries.windows(2).map(|w| w[1] - w[0]).collect();
        let delta = median(&widths).unwrap_or(1.0);
        let mut reps = Vec::with_capacity(n + 1);
        reps.push(boundaries[0] - delta);
        for w in boundaries.windows(2) {
            reps.push(0.5 * (w[0] + w[1]));
        }
        reps.push(boundaries[n - 1] + delta);
        Ok(CellGrid { boundaries, representatives: reps })
    }

    pub fn with_representatives(boundaries: Vec<f64>, representatives: Vec<f64>) -> Result<Self> {
        Self::check_boundaries(&boundaries)?;
        if representatives.len() != boundaries.len() + 1 {
            return Err(Error::DimensionMismatch {
                expected: boundaries.len() + 1,
                got: representatives.len(),
            });
        }
        let m = representatives.len();
        for (i, &r) in representatives.iter().enumerate() {
            if !r.is_finite() {
                return Err(Error::InvalidInput("non-finite representative".into()));
            }
            let ok = if i == 0 {
                r <= boundaries[0]
            } else if i == m - 1 {
                r > boundaries[i - 1]
            } else {
                boundaries[i - 1] < r && r <= boundaries[i]
            };
            if !ok {
                return Err(Error::InvalidInput(format!(
                    "representative {r} lies outside cell {i}"
                )));
            }
        }
        Ok(CellGrid { boundaries, representatives })
    }

    fn check_boundaries(boundaries: &[f64]) -> Result<()> {
        if boundaries.is_empty() {
            return Err(Error::InvalidInput("a grid needs at least one boundary".into()));
        }
        for w in boundaries.windows(2) {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidInput(
                    "boundaries must be strictly increasing".into(),
                ));
            }
        }
        if boundaries.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("non-finite boundary".into()));
        }
        Ok(())
    }

    /// Number of cells M.
    pub fn cells(&self) -> usize {
        self.boundaries.len() + 1
    }

    /// Index of the cell containing x; cells are closed on the right.
    pub fn cell_of(&self, x: f64) -> usize {
        self.boundaries.partition_point(|&b| b < x)
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn representatives(&self) -> &[f64] {
        &self.representatives
    }

    /// Symmetric grid with a center cell straddling zero: boundaries at
    /// ±(half_width + i·width). Keeps ±k pairs in mirrored cells, which is
    /// what makes odd moments of symmetric densities cancel exactly.
    pub fn symmetric(extent: f64, width: f64) -> Result<Self> {
        if !(extent > 0.0 && width > 0.0 && extent > width) {
            return Err(Error::InvalidInput("need extent > width > 0".into()));
        }
        let mut boundaries = Vec::new();
        let mut b = 0.5 * width;
        while b <= extent {
            boundaries.push(b);
            b += width;
        }
        let mut all: Vec<f64> = boundaries.iter().map(|x| -x).rev().collect();
        all.extend(boundaries);
        CellGrid::new(all)
    }
}

#[derive(Deserialize)]
struct RawGrid {
    boundaries: Vec<f64>,
    representatives: Vec<f64>,
}

impl<'de> Deserialize<'de> for CellGrid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGrid::deserialize(d)?;
        CellGrid::with_representatives(raw.boundaries, raw.representatives)
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
struct RawGridPovm {
    boundaries: Vec<f64>,
    representatives: Vec<f64>,
    effects: Vec<Vec<(f64, f64)>>,
}

fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

/// A POVM on a cell grid: one positive semidefinite effect matrix per cell,
/// summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPOVM {
    grid: CellGrid,
    effects: Vec<DMatrix<Complex64>>,
}

impl Serialize for GridPOVM {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            boundaries: &'a [f64],
            representatives: &'a [f64],
            effects: Vec<Vec<(f64, f64)>>,
        }
        let effects = self
            .effects
            .iter()
            .map(|m| m.row_iter().flat_map(|r| r.iter().map(|c| (c.re, c.im)).collect::<Vec<_>>()).collect())
            .collect();
        Repr {
            boundaries: &self.grid.boundaries,
            representatives: &self.grid.representatives,
            effects,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GridPOVM {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGridPovm::deserialize(d)?;
        let grid = CellGrid::with_representatives(raw.boundaries, raw.representatives)
            .map_err(serde::de::Error::custom)?;
        let mut effects = Vec::with_capacity(raw.effects.len());
        for flat in raw.effects {
            let d2 = flat.len();
            let dim = (d2 as f64).sqrt().round() as usize;
            if dim * dim != d2 {
                return Err(serde::de::Error::custom(format!(
                    "effect entry count {d2} is not a perfect square"
                )));
            }
            effects.push(DMatrix::from_fn(dim, dim, |i, j| {
                let (re, im) = flat[i * dim + j];
                Complex64::new(re, im)
            }));
        }
        GridPOVM::new(grid, effects).map_err(serde::de::Error::custom)
    }
}

impl GridPOVM {
    pub fn new(grid: CellGrid, effects: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if effects.len() != grid.cells() {
            return Err(Error::DimensionMismatch {
                expected: grid.cells(),
                got: effects.len(),
            });
        }
        let dim = effects
            .first()
            .map(|m| m.nrows())
            .ok_or_else(|| Error::InvalidInput("no effects".into()))?;
        if dim == 0 {
            return Err(Error::InvalidInput("zero-dimensional effects".into()));
        }
        for e in &effects {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.nrows().max(e.ncols()) });
            }
        }
        Ok(GridPOVM { grid, effects })
    }

    pub fn dim(&self) -> usize {
        self.effects[0].nrows()
    }

    pub fn grid(&self) -> &CellGrid {
        &self.grid
    }

    pub fn effects(&self) -> &[DMatrix<Complex64>] {
        &self.effects
    }
}

/// Health report of a POVM: Hermiticity, positivity and normalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    /// Worst effect eigenvalue, normalized by the spectral norm of its effect.
    pub worst_eig: f64,
    /// Spectral norm of (sum of effects) - identity.
    pub sum_defect: f64,
    /// Largest entry-wise deviation from Hermiticity over the effects.
    pub hermiticity_defect: f64,
}

fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let h = m.hermitian_part();
    h.symmetric_eigen().eigenvalues.iter().cloned().collect()
}

fn hermiticity_defect(m: &DMatrix<Complex64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Check Hermiticity, positivity of each effect and normalization to the
/// identity; reports the worst normalized eigenvalue and the sum defect.
pub fn validate_povm(q: &GridPOVM, tol: &Tolerances) -> Result<ValidationReport> {
    let dim = q.dim();
    let mut worst_eig = f64::INFINITY;
    let mut herm = 0.0f64;
    let mut sum = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for e in q.effects() {
        herm = herm.max(hermiticity_defect(e));
        let eigs = hermitian_eigenvalues(e);
        let norm = eigs.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        let normalized = if norm > 0.0 { min / norm } else { 0.0 };
        worst_eig = worst_eig.min(normalized);
        sum += e;
    }
    for i in 0..dim {
        sum[(i, i)] -= Complex64::new(1.0, 0.0);
    }
    let sum_defect = hermitian_eigenvalues(&sum)
        .iter()
        .fold(0.0f64, |a, &b| a.max(b.abs()));
    Ok(ValidationReport {
        ok: worst_eig >= -tol.psd && sum_defect <= tol.sum && herm <= tol.psd,
        worst_eig,
        sum_defect,
        hermiticity_defect: herm,
    })
}

/// Hermitian square root via eigendecomposition; eigenvalues in
/// [-floor, 0) are clipped to zero, anything below -floor is an error.
fn effect_sqrt(m: &DMatrix<Complex64>, rel_floor: f64) -> Result<DMatrix<Complex64>> {
    let dim = m.nrows();
    let se = m.hermitian_part().symmetric_eigen();
    let norm = se.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let floor = rel_floor * norm.max(1.0);
    let mut out = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for k in 0..dim {
        let lambda = se.eigenvalues[k];
        if lambda < -floor {
            return Err(Error::NotPositiveSemidefinite {
                what: "effect".into(),
                min_eig: lambda,
            });
        }
        let r = lambda.max(0.0).sqrt();
        if r == 0.0 {
            continue;
        }
        let v = se.eigenvectors.column(k);
        for i in 0..dim {
            for j in 0..dim {
                out[(i, j)] += v[i] * v[j].conj() * Complex64::new(r, 0.0);
            }
        }
    }
    Ok(out)
}

/// A Naimark dilation: an isometry V into a dM-dimensional space and the
/// projection-valued blocks whose compression reproduces the effects,
/// Q_i = V† P_i V.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    pub isometry: DMatrix<Complex64>,
    pub blocks: Vec<DMatrix<Complex64>>,
}

impl NaimarkDilation {
    pub fn dilated_dim(&self) -> usize {
        self.isometry.nrows()
    }

    /// V† P_i V, the compression of block i back to the base space.
    pub fn compress_block(&self, i: usize) -> DMatrix<Complex64> {
        self.isometry.adjoint() * &self.blocks[i] * &self.isometry
    }
}

/// Dilate a POVM by stacking effect square roots: V = [Q_1^{1/2}; ...],
/// with P_i the exact projector onto the i-th d-dimensional block. By
/// construction V†V = sum of effects = I and V† P_i V = Q_i.
pub fn naimark_dilate(q: &GridPOVM, tol: &Tolerances) -> Result<NaimarkDilation> {
    let report = validate_povm(q, tol)?;
    if !report.ok {
        return Err(Error::InvalidInput(format!(
            "not a valid POVM (worst eigenvalue {:.3e}, sum defect {:.3e})",
            report.worst_eig, report.sum_defect
        )));
    }
    let d = q.dim();
    let m = q.effects().len();
    let mut isometry = DMatrix::from_element(d * m, d, Complex64::new(0.0, 0.0));
    let mut blocks = Vec::with_capacity(m);
    for (i, e) in q.effects().iter().enumerate() {
        let root = effect_sqrt(e, tol.psd)?;
        isometry.view_mut((i * d, 0), (d, d)).copy_from(&root);
        let mut p = DMatrix::from_element(d * m, d * m, Complex64::new(0.0, 0.0));
        for k in 0..d {
            p[(i * d + k, i * d + k)] = Complex64::new(1.0, 0.0);
        }
        blocks.push(p);
    }
    Ok(NaimarkDilation { isometry, blocks })
}

/// The unique Hermitian matrix with the POVM's first moments:
/// A = sum_i lambda_i Q_i over the cell representatives.
pub fn povm_integral_operator(q: &GridPOVM) -> DMatrix<Complex64> {
    let d = q.dim();
    let mut a = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
    for (e, &lambda) in q.effects().iter().zip(q.grid().representatives()) {
        a += e * Complex64::new(lambda, 0.0);
    }
    a.hermitian_part()
}

/// Does the POVM decompose the operator `a` on the first `domain_dim`
/// basis vectors? Checks both moment relations:
/// <ψ|Aφ> = Σ λ_i <ψ|Q_i φ> for every basis ψ, and
/// ||Aφ||² = Σ λ_i² <φ|Q_i φ>, each within `tol`.
pub fn decompose_check(
    q: &GridPOVM,
    a: &TruncatedRep,
    domain_dim: usize,
    tol: f64,
) -> Result<bool> {
    let d = q.dim();
    if a.dim != d {
        return Err(Error::DimensionMismatch { expected: d, got: a.dim });
    }
    if domain_dim > d {
        return Err(Error::InvalidInput(format!(
            "domain dimension {domain_dim} exceeds space dimension {d}"
        )));
    }
    let reps = q.grid().representatives();
    for j in 0..domain_dim {
        let phi = DVector::from_fn(d, |i, _| {
            Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        });
        let a_phi = &a.matrix * &phi;
        // first-moment relation against every basis vector at once
        let mut first = DVector::from_element(d, Complex64::new(0.0, 0.0));
        let mut second = 0.0f64;
        for (e, &lambda) in q.effects().iter().zip(reps) {
            let e_phi = e * &phi;
            first += &e_phi * Complex64::new(lambda, 0.0);
            second += lambda * lambda * phi.dotc(&e_phi).re;
        }
        let first_defect = (&a_phi - &first).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let norm_sq: f64 = a_phi.iter().map(|z| z.norm_sqr()).sum();
        let second_defect = (norm_sq - second).abs();
        if first_defect > tol || second_defect > tol * norm_sq.max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Compress a POVM onto the span of an orthonormal set: effects become
/// B† Q_i B. Compression preserves positivity and normalization but not
/// multiplicativity: the compression of a projection-valued measure to a
/// non-invariant subspace is a proper POVM.
pub fn compress_povm(q: &GridPOVM, basis: &[DVector<Complex64>]) -> Result<GridPOVM> {
    let d = q.dim();
    let s = basis.len();
    if s == 0 || s > d {
        return Err(Error::InvalidInput(format!(
            "subspace dimension {s} out of range for space dimension {d}"
        )));
    }
    for v in basis {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
    }
    let mut b = DMatrix::from_element(d, s, Complex64::new(0.0, 0.0));
    for (j, v) in basis.iter().enumerate() {
        b.column_mut(j).copy_from(v);
    }
    let gram = b.adjoint() * &b;
    let mut defect = 0.0f64;
    for i in 0..s {
        for j in 0..s {
            let want = if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            defect = defect.max((gram[(i, j)] - want).norm());
        }
    }
    if defect > 1e-12 {
        return Err(Error::InvalidInput(format!(
            "basis is not orthonormal (defect {defect:.3e})"
        )));
    }
    let effects = q
        .effects()
        .iter()
        .map(|e| (b.adjoint() * e * &b).hermitian_part())
        .collect();
    GridPOVM::new(q.grid().clone(), effects)
}

/// CSV rows of per-cell masses: `cell,lo,hi,representative,mass`.
pub fn masses_csv(grid: &CellGrid, masses: &[f64]) -> String {
    let b = grid.boundaries();
    let mut out = String::from("cell,lo,hi,representative,mass\n");
    for (i, (&rep, &mass)) in grid.representatives().iter().zip(masses).enumerate() {
        let lo = if i == 0 { f64::NEG_INFINITY } else { b[i - 1] };
        let hi = if i == b.len() { f64::INFINITY } else { b[i] };
        out.push_str(&format!("{i},{lo},{hi},{rep},{mass}\n"));
    }
    out
}
