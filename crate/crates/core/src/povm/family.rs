//! Consistent measure families and their correspondence with POVMs.
//!
//! A POVM together with a set of vectors induces one nonnegative measure
//! per vector, μ_ψ(E) = <ψ|Q(E)ψ>. Such a family satisfies the
//! parallelogram and scaling identities cell by cell and a directional
//! continuity property along ψ + t φ. Conversely, a family satisfying the
//! identities determines the sesquilinear data <ψ|Q(E)φ> through the
//! polarization formula
//!
//!   (ψ|φ)_E = 1/4 Σ_k (-i)^k μ_{ψ + i^k φ}(E),
//!
//! and, when the vectors span, the effect matrices themselves. The two
//! directions compose to the identity, which is the finite-dimensional
//! shadow of the bijection between consistent families and decomposing
//! POVMs. The directional-continuity check works on finitely many step
//! sizes, so it can only falsify the property, never verify it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::FockVector;
use crate::config::Tolerances;
use crate::error::{Error, Result};

use super::{validate_povm, CellGrid, GridPOVM};

/// One labeled member of a family: the deforming vector and its per-cell
/// masses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyEntry {
    pub label: String,
    pub vector: FockVector,
    pub masses: Vec<f64>,
}

/// Parallelogram rule: μ_sum + μ_diff = 2(μ_b + μ_c).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelogramRule {
    pub b: String,
    pub c: String,
    pub sum: String,
    pub diff: String,
}

/// Scaling rule: μ_scaled = |z|^2 μ_base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRule {
    pub base: String,
    /// complex factor as (re, im)
    pub factor: (f64, f64),
    pub scaled: String,
}

/// Directional continuity probe: labels of b + t c for decreasing t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityProbe {
    pub base: String,
    pub direction: String,
    /// (t, label of b + t c), with strictly decreasing t
    pub steps: Vec<(f64, String)>,
}

/// The four polarization combinations left + i^k right, k = 0..3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationQuad {
    pub left: String,
    pub right: String,
    pub combos: [String; 4],
}

/// Which family entries stand in which algebraic relation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CombinationTable {
    /// Labels of the spanning base vectors the closure was built from.
    #[serde(default)]
    pub bases: Vec<String>,
    pub parallelogram: Vec<ParallelogramRule>,
    pub scaling: Vec<ScalingRule>,
    pub continuity: Vec<ContinuityProbe>,
    pub polarization: Vec<PolarizationQuad>,
}

/// A family of per-cell measures indexed by deforming vectors, together
/// with the combination table tying its labels together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistentFamily {
    pub grid: CellGrid,
    pub entries: Vec<FamilyEntry>,
    pub table: CombinationTable,
}

impl ConsistentFamily {
    pub fn entry(&self, label: &str) -> Result<&FamilyEntry> {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .ok_or_else(|| Error::IncompleteFamily(format!("missing entry {label:?}")))
    }

    pub fn masses(&self, label: &str) -> Result<&[f64]> {
        Ok(&self.entry(label)?.masses)
    }

    /// Largest total mass across entries; the scale defects are compared to.
    pub fn mass_scale(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.masses.iter().sum::<f64>())
            .fold(0.0, f64::max)
    }
}

fn induce_masses(q: &GridPOVM, v: &DVector<Complex64>) -> Result<Vec<f64>> {
    if v.len() != q.dim() {
        return Err(Error::DimensionMismatch { expected: q.dim(), got: v.len() });
    }
    Ok(q.effects()
        .iter()
        .map(|e| v.dotc(&(e * v)).re.max(0.0))
        .collect())
}

/// The measures induced by a POVM on the given vectors:
/// μ_i(E) = <ψ_i|Q(E)ψ_i> cell by cell. Labels are v0, v1, ... and the
/// combination table is empty; see [`induced_family_with_closure`] for a
/// family equipped with the combinations the consistency and
/// reconstruction operations need.
pub fn induced_family(q: &GridPOVM, vectors: &[FockVector]) -> Result<ConsistentFamily> {
    let entries = vectors
        .iter()
        .enumerate()
        .map(|(i, fv)| {
            Ok(FamilyEntry {
                label: format!("v{i}"),
                vector: fv.clone(),
                masses: induce_masses(q, &fv.as_dvector())?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConsistentFamily {
        grid: q.grid().clone(),
        entries,
        table: CombinationTable::default(),
    })
}

const CONTINUITY_STEPS: [i32; 5] = [6, 10, 14, 18, 22]; // t = 2^-j

/// Close a set of base vectors under the combinations needed by the
/// consistency identities and the polarization reconstruction: sums,
/// differences, the four i^k combinations per pair, one complex scaling
/// per base, and a chain of continuity probes.
pub fn build_probe_closure(bases: &[FockVector]) -> (Vec<(String, FockVector)>, CombinationTable) {
    let mut labeled: Vec<(String, FockVector)> = Vec::new();
    let mut table = CombinationTable::default();
    let add = |labeled: &mut Vec<(String, FockVector)>, label: String, v: DVector<Complex64>| {
        labeled.push((label.clone(), FockVector::from_dvector(&v)));
        label
    };
    let base_vs: Vec<DVector<Complex64>> = bases.iter().map(|b| b.as_dvector()).collect();
    for (i, v) in base_vs.iter().enumerate() {
        let label = add(&mut labeled, format!("b{i}"), v.clone());
        table.bases.push(label);
    }
    let ii = Complex64::new(0.0, 1.0);
    for i in 0..base_vs.len() {
        for j in (i + 1)..base_vs.len() {
            let (b, c) = (&base_vs[i], &base_vs[j]);
            let sum = add(&mut labeled, format!("b{i}+b{j}"), b + c);
            let diff = add(&mut labeled, format!("b{i}-b{j}"), b - c);
            let plus_i = add(&mut labeled, format!("b{i}+i*b{j}"), b + c * ii);
            let minus_i = add(&mut labeled, format!("b{i}-i*b{j}"), b - c * ii);
            table.parallelogram.push(ParallelogramRule {
                b: format!("b{i}"),
                c: format!("b{j}"),
                sum: sum.clone(),
                diff: diff.clone(),
            });
            // the imaginary combinations obey the same law because
            // μ_{b+ic} + μ_{b-ic} = 2(μ_b + μ_{ic}) and μ_{ic} = μ_c
            table.parallelogram.push(ParallelogramRule {
                b: format!("b{i}"),
                c: format!("b{j}"),
                sum: plus_i.clone(),
                diff: minus_i.clone(),
            });
            table.polarization.push(PolarizationQuad {
                left: format!("b{i}"),
                right: format!("b{j}"),
                combos: [sum, plus_i, diff, minus_i],
            });
        }
    }
    // one scaling rule per base
    let z = Complex64::new(1.0, 1.0);
    for (i, v) in base_vs.iter().enumerate() {
        let scaled = add(&mut labeled, format!("(1+i)*b{i}"), v * z);
        table.scaling.push(ScalingRule {
            base: format!("b{i}"),
            factor: (z.re, z.im),
            scaled,
        });
    }
    // continuity chain along the first pair
    if base_vs.len() >= 2 {
        let steps = CONTINUITY_STEPS
            .iter()
            .map(|&j| {
                let t = 2f64.powi(-j);
                let label = add(
                    &mut labeled,
                    format!("b0+2^-{j}*b1"),
                    &base_vs[0] + &base_vs[1] * Complex64::new(t, 0.0),
                );
                (t, label)
            })
            .collect();
        table.continuity.push(ContinuityProbe {
            base: "b0".into(),
            direction: "b1".into(),
            steps,
        });
    }
    (labeled, table)
}

/// Induce a family on the full probe closure of `bases`, ready for
/// [`consistency_check`] and [`family_to_povm`].
pub fn induced_family_with_closure(
    q: &GridPOVM,
    bases: &[FockVector],
) -> Result<ConsistentFamily> {
    let (labeled, table) = build_probe_closure(bases);
    let entries = labeled
        .into_iter()
        .map(|(label, fv)| {
            Ok(FamilyEntry {
                masses: induce_masses(q, &fv.as_dvector())?,
                label,
                vector: fv,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConsistentFamily { grid: q.grid().clone(), entries, table })
}

/// Result of a consistency check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub ok: bool,
    pub worst_defect: f64,
}

/// Check the parallelogram and scaling identities cell by cell within
/// `tol` (relative to the family's mass scale), and falsify directional
/// continuity on the finite probe chain: defects along b + t c must
/// decrease with t and end below the Cauchy–Schwarz envelope. A passing
/// report does not *prove* continuity (finitely many t cannot); it only
/// reports that the probes failed to refute it.
pub fn consistency_check(
    f: &ConsistentFamily,
    table: &CombinationTable,
    tol: f64,
) -> Result<ConsistencyReport> {
    let cells = f.grid.cells();
    for e in &f.entries {
        if e.masses.len() != cells {
            return Err(Error::DimensionMismatch { expected: cells, got: e.masses.len() });
        }
    }
    let scale = f.mass_scale().max(1e-300);
    let mut worst = 0.0f64;

    for rule in &table.parallelogram {
        let b = f.masses(&rule.b)?;
        let c = f.masses(&rule.c)?;
        let sum = f.masses(&rule.sum)?;
        let diff = f.masses(&rule.diff)?;
        for i in 0..cells {
            let defect = (sum[i] + diff[i] - 2.0 * (b[i] + c[i])).abs();
            worst = worst.max(defect / scale);
        }
    }
    for rule in &table.scaling {
        let base = f.masses(&rule.base)?;
        let scaled = f.masses(&rule.scaled)?;
        let z2 = rule.factor.0 * rule.factor.0 + rule.factor.1 * rule.factor.1;
        for i in 0..cells {
            let defect = (scaled[i] - z2 * base[i]).abs();
            worst = worst.max(defect / scale);
        }
    }
    let mut ok = worst <= tol;

    for probe in &table.continuity {
        let base = f.masses(&probe.base)?;
        let dir = f.masses(&probe.direction)?;
        let mut prev = f64::INFINITY;
        for (t, label) in &probe.steps {
            let stepped = f.masses(label)?;
            let mut defect = 0.0f64;
            for i in 0..cells {
                let d = (stepped[i] - base[i]).abs();
                // per-cell Cauchy-Schwarz envelope:
                // |μ_{b+tc}(E) - μ_b(E)| <= 2t sqrt(μ_b(E) μ_c(E)) + t² μ_c(E)
                let envelope = 2.0 * t * (base[i] * dir[i]).sqrt() + t * t * dir[i];
                if d > envelope + tol * scale {
                    ok = false;
                    worst = worst.max(d / scale);
                }
                defect = defect.max(d);
            }
            if defect > prev + tol * scale {
                ok = false;
                worst = worst.max(defect / scale);
            }
            prev = defect;
        }
    }
    Ok(ConsistencyReport { ok, worst_defect: worst })
}

/// Reconstruct the unique POVM inducing a consistent family: polarization
/// recovers <ψ_b|Q(E)ψ_c> for the base pairs, and the Gram system over the
/// spanning bases is solved for each effect. Uniqueness is what makes the
/// round trip with [`induced_family_with_closure`] the identity.
pub fn family_to_povm(f: &ConsistentFamily, tol: &Tolerances) -> Result<GridPOVM> {
    // base labels: preferably recorded in the table; otherwise recovered
    // from the polarization quads (diagonal Gram entries come straight
    // from the family, off-diagonal data from the quads)
    let mut bases: Vec<String> = f.table.bases.clone();
    if bases.is_empty() {
        for quad in &f.table.polarization {
            for l in [&quad.left, &quad.right] {
                if !bases.contains(l) {
                    bases.push(l.clone());
                }
            }
        }
    }
    if bases.is_empty() {
        if f.entries.len() == 1 {
            bases.push(f.entries[0].label.clone());
        } else {
            return Err(Error::IncompleteFamily(
                "no recorded bases or polarization combinations".into(),
            ));
        }
    }
    let l = bases.len();
    let dim = f.entry(&bases[0])?.vector.dim();
    let cells = f.grid.cells();

    // index the quads by (left, right)
    let quad_of = |a: &str, b: &str| -> Option<&PolarizationQuad> {
        f.table
            .polarization
            .iter()
            .find(|q| (q.left == a && q.right == b) || (q.left == b && q.right == a))
    };

    // B: dim x l matrix of base vectors
    let mut bmat = DMatrix::from_element(dim, l, Complex64::new(0.0, 0.0));
    for (j, label) in bases.iter().enumerate() {
        let v = f.entry(label)?.vector.as_dvector();
        if v.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.len() });
        }
        bmat.column_mut(j).copy_from(&v);
    }
    let gram_bb = &bmat * bmat.adjoint(); // dim x dim
    let se = gram_bb.hermitian_part().symmetric_eigen();
    let max_ev = se.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let min_ev = se.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_ev <= 1e-13 * max_ev.max(1.0) {
        let rank = se.eigenvalues.iter().filter(|&&e| e > 1e-13 * max_ev).count();
        return Err(Error::SpanningDeficient { rank, dim });
    }
    let cond = max_ev / min_ev;
    if cond > 1e12 {
        return Err(Error::IllConditioned { cond });
    }
    // (B B†)^{-1} B
    let mut inv = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for k in 0..dim {
        let v = se.eigenvectors.column(k);
        let w = Complex64::new(1.0 / se.eigenvalues[k], 0.0);
        for i in 0..dim {
            for j in 0..dim {
                inv[(i, j)] += v[i] * v[j].conj() * w;
            }
        }
    }
    let w = &inv * &bmat; // dim x l

    let minus_i = Complex64::new(0.0, -1.0);
    let mut effects = Vec::with_capacity(cells);
    for cell in 0..cells {
        let mut g = DMatrix::from_element(l, l, Complex64::new(0.0, 0.0));
        for a in 0..l {
            g[(a, a)] = Complex64::new(f.masses(&bases[a])?[cell], 0.0);
            for b in (a + 1)..l {
                let quad = quad_of(&bases[a], &bases[b]).ok_or_else(|| {
                    Error::IncompleteFamily(format!(
                        "no polarization combinations for ({}, {})",
                        bases[a], bases[b]
                    ))
                })?;
                let mut val = Complex64::new(0.0, 0.0);
                let mut phase = Complex64::new(1.0, 0.0);
                for combo in &quad.combos {
                    val += phase * Complex64::new(f.masses(combo)?[cell], 0.0);
                    phase *= minus_i;
                }
                val *= 0.25;
                // val = (quad.left | Q quad.right); orient to (a, b)
                let (row, col) = if quad.left == bases[a] { (a, b) } else { (b, a) };
                g[(row, col)] = val;
                g[(col, row)] = val.conj();
            }
        }
        let q_cell = (&w * g * w.adjoint()).hermitian_part();
        effects.push(q_cell);
    }
    let out = GridPOVM::new(f.grid.clone(), effects)?;
    let report = validate_povm(&out, tol)?;
    if !report.ok {
        return Err(Error::NumericFailure(format!(
            "reconstructed effects fail validation (worst eigenvalue {:.3e}, sum defect {:.3e})",
            report.worst_eig, report.sum_defect
        )));
    }
    Ok(out)
}

/// The Gram matrix recovered from a candidate seminorm through the
/// polarization formula, with its smallest normalized eigenvalue.
///
/// Positive semidefiniteness is reported, not enforced: a failure
/// falsifies the parallelogram hypothesis on p.
#[derive(Debug, Clone)]
pub struct PolarizationGram {
    pub gram: DMatrix<Complex64>,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

/// Evaluate (x|y)_p = 1/4 Σ_k (-i)^k p(x + i^k y)^2 on all pairs from
/// `vectors`.
pub fn seminorm_polarization<F>(vectors: &[FockVector], p_squared: F) -> PolarizationGram
where
    F: Fn(&FockVector) -> f64,
{
    let l = vectors.len();
    let minus_i = Complex64::new(0.0, -1.0);
    let ii = Complex64::new(0.0, 1.0);
    let mut gram = DMatrix::from_element(l, l, Complex64::new(0.0, 0.0));
    for a in 0..l {
        let va = vectors[a].as_dvector();
        for b in 0..l {
            let vb = vectors[b].as_dvector();
            let mut val = Complex64::new(0.0, 0.0);
            let mut outer = Complex64::new(1.0, 0.0); // (-i)^k
            let mut inner = Complex64::new(1.0, 0.0); // i^k
            for _k in 0..4 {
                let combo = &va + &vb * inner;
                val += outer * p_squared(&FockVector::from_dvector(&combo));
                outer *= minus_i;
                inner *= ii;
            }
            gram[(a, b)] = val * 0.25;
        }
    }
    let gram = gram.hermitian_part();
    let eigs = gram.clone().symmetric_eigen().eigenvalues;
    let max_ev = eigs.iter().fold(0.0f64, |acc, &e| acc.max(e.abs()));
    let min_ev = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_normalized = if max_ev > 0.0 { min_ev / max_ev } else { 0.0 };
    PolarizationGram {
        gram,
        min_eigenvalue: min_normalized,
        psd: min_normalized >= -1e-12,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::tests::{c, diag_povm};

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    fn fv(components: &[(f64, f64)]) -> FockVector {
        FockVector::new(components.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
    }

    #[test]
    fn zero_vector_induces_zero_measure() {
        let q = diag_povm(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let f = induced_family(&q, &[fv(&[(0.0, 0.0), (0.0, 0.0)])]).unwrap();
        assert!(f.entries[0].masses.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn eigenvector_of_pvm_gives_point_mass() {
        let q = diag_povm(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let f = induced_family(&q, &[fv(&[(1.0, 0.0), (0.0, 0.0)])]).unwrap();
        assert_eq!(f.entries[0].masses, vec![1.0, 0.0]);
    }

    #[test]
    fn total_mass_is_vector_norm() {
        let q = diag_povm(&[vec![0.3, 0.6], vec![0.2, 0.3], vec![0.5, 0.1]]);
        let v = fv(&[(0.7, 0.4), (-0.3, 1.1)]);
        let f = induced_family(&q, &[v.clone()]).unwrap();
        let total: f64 = f.entries[0].masses.iter().sum();
        assert!((total - v.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn induced_families_are_consistent() {
        let q = diag_povm(&[vec![0.3, 0.6], vec![0.2, 0.3], vec![0.5, 0.1]]);
        let bases = [fv(&[(1.0, 0.0), (0.2, -0.3)]), fv(&[(0.0, 0.5), (1.0, 0.0)])];
        let f = induced_family_with_closure(&q, &bases).unwrap();
        let rep = consistency_check(&f, &f.table, 1e-10).unwrap();
        assert!(rep.ok, "worst defect {}", rep.worst_defect);
        assert!(rep.worst_defect < 1e-12);
    }

    #[test]
    fn perturbed_family_fails_consistency() {
        let q = diag_povm(&[vec![0.3, 0.6], vec![0.7, 0.4]]);
        let bases = [fv(&[(1.0, 0.0), (0.0, 0.0)]), fv(&[(0.0, 0.0), (1.0, 0.0)])];
        let mut f = induced_family_with_closure(&q, &bases).unwrap();
        // perturb one cell mass of the sum entry
        let idx = f.entries.iter().position(|e| e.label == "b0+b1").unwrap();
        f.entries[idx].masses[0] += 0.1;
        let rep = consistency_check(&f, &f.table.clone(), 1e-10).unwrap();
        assert!(!rep.ok);
        assert!(rep.worst_defect > 0.01);
    }

    #[test]
    fn missing_combination_is_reported() {
        let q = diag_povm(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let bases = [fv(&[(1.0, 0.0), (0.0, 0.0)]), fv(&[(0.0, 0.0), (1.0, 0.0)])];
        let f = induced_family_with_closure(&q, &bases).unwrap();
        let mut table = f.table.clone();
        table.parallelogram[0].sum = "nonexistent".into();
        assert!(matches!(
            consistency_check(&f, &table, 1e-10),
            Err(Error::IncompleteFamily(_))
        ));
    }

    #[test]
    fn family_round_trip_recovers_povm() {
        let q = diag_povm(&[vec![0.3, 0.6], vec![0.2, 0.3], vec![0.5, 0.1]]);
        let bases = [fv(&[(1.0, 0.0), (0.3, 0.4)]), fv(&[(0.2, -0.1), (1.0, 0.0)])];
        let f = induced_family_with_closure(&q, &bases).unwrap();
        let back = family_to_povm(&f, &tols()).unwrap();
        for (a, b) in back.effects().iter().zip(q.effects()) {
            let err = (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "effect defect {err}");
        }
    }

    #[test]
    fn pvm_family_recovers_projections() {
        // hand-checkable 2x2 case: the PVM of diag(-1, 1)
        let q = diag_povm(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let bases = [fv(&[(1.0, 0.0), (0.5, 0.0)]), fv(&[(0.0, 0.5), (1.0, 0.0)])];
        let f = induced_family_with_closure(&q, &bases).unwrap();
        let back = family_to_povm(&f, &tols()).unwrap();
        for e in back.effects() {
            let idem = (e * e - e).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(idem < 1e-10, "not idempotent: {idem}");
        }
    }

    #[test]
    fn scalar_family_divides_by_norm() {
        let grid = CellGrid::new(vec![0.0]).unwrap();
        let effects = vec![
            DMatrix::from_element(1, 1, c(0.25, 0.0)),
            DMatrix::from_element(1, 1, c(0.75, 0.0)),
        ];
        let q = GridPOVM::new(grid, effects).unwrap();
        let f = induced_family(&q, &[fv(&[(2.0, 0.0)])]).unwrap();
        let back = family_to_povm(&f, &tols()).unwrap();
        assert!((back.effects()[0][(0, 0)].re - 0.25).abs() < 1e-12);
        assert!((back.effects()[1][(0, 0)].re - 0.75).abs() < 1e-12);
    }

    #[test]
    fn non_spanning_probes_are_rejected() {
        let q = diag_povm(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        // two parallel vectors cannot span a 2-dimensional space
        let bases = [fv(&[(1.0, 0.0), (0.0, 0.0)]), fv(&[(2.0, 0.0), (0.0, 0.0)])];
        let f = induced_family_with_closure(&q, &bases).unwrap();
        assert!(matches!(
            family_to_povm(&f, &tols()),
            Err(Error::SpanningDeficient { .. })
        ));
    }

    #[test]
    fn polarization_recovers_euclidean_gram() {
        let vs = [fv(&[(1.0, 0.0), (0.0, 0.0)]), fv(&[(0.0, 0.0), (1.0, 0.0)])];
        let g = seminorm_polarization(&vs, |v| v.norm_squared());
        assert!(g.psd);
        for a in 0..2 {
            for b in 0..2 {
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((g.gram[(a, b)] - c(want, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn polarization_of_degenerate_seminorm_is_rank_one() {
        // p(x) = |first coordinate|
        let vs = [fv(&[(1.0, 0.0), (0.0, 0.0)]), fv(&[(0.0, 0.0), (1.0, 0.0)])];
        let g = seminorm_polarization(&vs, |v| v.components()[0].norm_sqr());
        assert!(g.psd);
        assert!((g.gram[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(g.gram[(1, 1)].norm() < 1e-14);
    }

    #[test]
    fn polarization_flags_non_parallelogram_seminorm() {
        // the l1 norm violates the parallelogram law; with a mixed third
        // vector the recovered Gram matrix is indefinite:
        // by hand, Gram = [[1,0,2],[0,1,2],[2,2,4]] has determinant -4
        let vs = [
            fv(&[(1.0, 0.0), (0.0, 0.0)]),
            fv(&[(0.0, 0.0), (1.0, 0.0)]),
            fv(&[(1.0, 0.0), (1.0, 0.0)]),
        ];
        let l1 = |v: &FockVector| {
            let s: f64 = v.components().iter().map(|z| z.norm()).sum();
            s * s
        };
        let g = seminorm_polarization(&vs, l1);
        assert!(!g.psd, "min normalized eigenvalue {}", g.min_eigenvalue);
        assert!((g.gram[(0, 2)] - c(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn polarization_recovers_random_inner_product() {
        // p induced by A: p(x)^2 = ||A x||^2; recovered Gram must be A† A
        let a = DMatrix::from_row_slice(2, 2, &[
            c(1.0, 0.2), c(0.3, -0.4),
            c(0.0, 0.9), c(2.0, 0.1),
        ]);
        let vs = [fv(&[(1.0, 0.0), (0.0, 0.0)]), fv(&[(0.0, 0.0), (1.0, 0.0)])];
        let a2 = a.clone();
        let p2 = move |v: &FockVector| (&a2 * v.as_dvector()).norm_squared();
        let g = seminorm_polarization(&vs, p2);
        let want = a.adjoint() * &a;
        let err = (&g.gram - &want).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "gram defect {err}");
        assert!(g.psd);
    }

    #[test]
    fn family_json_round_trip() {
        let q = diag_povm(&[vec![0.5, 0.5], vec![0.5, 0.5]]);
        let bases = [fv(&[(1.0, 0.0), (0.0, 0.0)]), fv(&[(0.0, 0.0), (1.0, 0.0)])];
        let f = induced_family_with_closure(&q, &bases).unwrap();
        let json = serde_json::to_string(&f).unwrap();
        let back: ConsistentFamily = serde_json::from_str(&json).unwrap();
        assert_eq!(back, f);
    }
}
