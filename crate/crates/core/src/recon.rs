//! Reconstruction of a discrete measure matching a finite moment sequence,
//! and verification of moment solutions.
//!
//! The pipeline is the classical one: moments -> Hankel Cholesky ->
//! three-term recurrence -> Gaussian quadrature. Every step before the final
//! `f64` output runs in software floats (see [`crate::prec`]) because the
//! Hankel conditioning destroys double-precision recurrences beyond order
//! eight or so.
//!
//! A reconstruction from an indeterminate sequence is still a valid
//! truncated quadrature; nothing here claims uniqueness of the underlying
//! measure. Determinacy verdicts live in [`crate::moment`].

use dashu_base::SquareRoot;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment::{MomentConfig, MomentKind, MomentSequence};
use crate::prec::{self, Mp, MpCtx};

/// A finite positive discrete measure: atoms (position, weight) with
/// strictly increasing positions and positive total mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawMeasure {
    atoms: Vec<(f64, f64)>,
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMeasure::deserialize(d)?;
        DiscreteMeasure::new(raw.atoms).map_err(serde::de::Error::custom)
    }
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("measure needs at least one atom".into()));
        }
        let mut mass = 0.0;
        for (i, &(x, w)) in atoms.iter().enumerate() {
            if !x.is_finite() || !w.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite atom ({x}, {w})")));
            }
            if w < 0.0 {
                return Err(Error::InvalidInput(format!("negative weight {w} at {x}")));
            }
            if i > 0 && atoms[i - 1].0 >= x {
                return Err(Error::InvalidInput(
                    "atom positions must be strictly increasing".into(),
                ));
            }
            mass += w;
        }
        if mass <= 0.0 {
            return Err(Error::InvalidInput("total mass must be positive".into()));
        }
        Ok(DiscreteMeasure { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, w)| w).sum()
    }

    /// CSV rows `position,weight` for external plotting.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("position,weight\n");
        for &(x, w) in &self.atoms {
            s.push_str(&format!("{x},{w}\n"));
        }
        s
    }
}

/// Monic three-term recurrence data: p_{k+1} = (x - alpha_k) p_k - beta_k p_{k-1}.
///
/// `beta` holds the squared norm ratios (the squares of the Jacobi matrix
/// off-diagonal entries); `mass` is m_0, needed to scale quadrature weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobiMatrix {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub mass: f64,
}

impl JacobiMatrix {
    pub fn order(&self) -> usize {
        self.alpha.len()
    }

    fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() {
            return Err(Error::InvalidInput("empty recurrence".into()));
        }
        if self.beta.len() + 1 != self.alpha.len() {
            return Err(Error::DimensionMismatch {
                expected: self.alpha.len() - 1,
                got: self.beta.len(),
            });
        }
        if self.beta.iter().any(|&b| !(b > 0.0)) {
            return Err(Error::InvalidInput("beta entries must be positive".into()));
        }
        if !(self.mass > 0.0) {
            return Err(Error::InvalidInput("total mass must be positive".into()));
        }
        Ok(())
    }
}

/// Recurrence coefficients of the orthogonal polynomials of `ms`, through a
/// Cholesky factorization of the Hankel matrix carried out in software
/// floats of `cfg.precision_digits` digits.
pub fn jacobi_from_moments(
    ms: &MomentSequence,
    n: usize,
    cfg: &MomentConfig,
) -> Result<JacobiMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("quadrature order must be positive".into()));
    }
    if 2 * n > ms.max_index() {
        return Err(Error::InvalidMoments(format!(
            "order {n} needs moments up to m_{}, only m_0..m_{} available",
            2 * n,
            ms.max_index()
        )));
    }
    if ms.is_zero() {
        return Err(Error::InvalidMoments("zero sequence has no quadrature".into()));
    }
    let ctx = MpCtx::from_digits(cfg.precision_digits);
    let values = ms.values();
    let dim = n + 1;
    let mut h: Vec<Vec<Mp>> = vec![vec![ctx.zero(); dim]; dim];
    for i in 0..dim {
        for j in 0..dim {
            h[i][j] = ctx.lift(values[i + j])?;
        }
    }
    let rel_floor = ctx.lift(cfg.tolerances.psd)?;
    // rows 0..n of the upper factor suffice for alpha_0..alpha_{n-1} and
    // beta_1..beta_{n-1}; the (n,n) pivot (strict positivity of the full
    // H_n) is not required for an n-point rule
    let r = prec::partial_cholesky(&h, n, dim, &rel_floor, &ctx)
        .map_err(|order| Error::RankDeficient { order })?;
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n {
        let mut a = &r[k][k + 1] / &r[k][k];
        if k > 0 {
            a = a - &r[k - 1][k] / &r[k - 1][k - 1];
            let b = &r[k][k] / &r[k - 1][k - 1];
            beta.push(prec::to_f64(&(&b * &b)));
        }
        alpha.push(prec::to_f64(&a));
    }
    let out = JacobiMatrix { alpha, beta, mass: values[0] };
    out.validate()?;
    Ok(out)
}

/// Gaussian quadrature of a recurrence: atoms are the eigenvalues of the
/// symmetric tridiagonal Jacobi matrix, weights are `mass` times the squared
/// first components of the normalized eigenvectors.
pub fn gauss_quadrature(j: &JacobiMatrix, cfg: &MomentConfig) -> Result<DiscreteMeasure> {
    j.validate()?;
    let ctx = MpCtx::from_digits(cfg.precision_digits);
    let n = j.order();
    let mut t: Vec<Vec<Mp>> = vec![vec![ctx.zero(); n]; n];
    for i in 0..n {
        t[i][i] = ctx.lift(j.alpha[i])?;
    }
    for i in 0..n - 1 {
        let b = ctx.lift(j.beta[i])?;
        if b.repr().sign() == dashu_base::Sign::Negative {
            return Err(Error::InvalidInput("beta entries must be positive".into()));
        }
        let off = b.sqrt();
        t[i][i + 1] = off.clone();
        t[i + 1][i] = off;
    }
    let (eigs, vecs) = prec::sym_eigen(&t, &ctx)?;
    let mass = ctx.lift(j.mass)?;
    let mut atoms: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let w = &mass * &vecs[0][i] * &vecs[0][i];
            (prec::to_f64(&eigs[i]), prec::to_f64(&w))
        })
        .collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    DiscreteMeasure::new(atoms)
}

/// Moments m_0..m_K of a discrete measure, accumulated in software floats.
pub fn measure_moments(
    m: &DiscreteMeasure,
    max_index: usize,
    cfg: &MomentConfig,
) -> Result<MomentSequence> {
    if max_index < 2 {
        return Err(Error::InvalidInput(
            "a moment sequence carries at least m_0..m_2".into(),
        ));
    }
    let ctx = MpCtx::from_digits(cfg.precision_digits);
    let positions: Vec<Mp> = m
        .atoms()
        .iter()
        .map(|&(x, _)| ctx.lift(x))
        .collect::<Result<_>>()?;
    let mut current: Vec<Mp> = m
        .atoms()
        .iter()
        .map(|&(_, w)| ctx.lift(w))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(max_index + 1);
    for _n in 0..=max_index {
        let mut sum = ctx.zero();
        for c in &current {
            sum = sum + c;
        }
        values.push(prec::to_f64(&sum));
        for (c, x) in current.iter_mut().zip(&positions) {
            *c = &*c * x;
        }
    }
    MomentSequence::new(MomentKind::Hamburger, values)
}

/// Result of checking a measure against a target moment sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub ok: bool,
    pub max_rel_err: f64,
}

/// Relative error of each reconstructed moment against `ms` (absolute error
/// for zero targets), compared to `tol`.
pub fn verify_moment_solution(
    m: &DiscreteMeasure,
    ms: &MomentSequence,
    tol: f64,
    cfg: &MomentConfig,
) -> Result<VerificationReport> {
    let rec = measure_moments(m, ms.max_index(), cfg)?;
    let mut worst = 0.0f64;
    for (got, want) in rec.values().iter().zip(ms.values()) {
        let err = if *want == 0.0 {
            got.abs()
        } else {
            (got - want).abs() / want.abs()
        };
        worst = worst.max(err);
    }
    Ok(VerificationReport {
        ok: worst <= tol,
        max_rel_err: worst,
    })
}

/// A reconstruction, possibly at a smaller order than requested when the
/// Hankel matrix is singular (the measure then has fewer atoms).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Reconstruction {
    pub measure: DiscreteMeasure,
    pub order_used: usize,
    pub degenerate: bool,
}

/// Reconstruct an `n`-point Gauss measure for `ms`, falling back to the
/// maximal nonsingular order when the requested one is rank deficient.
pub fn reconstruct_measure(
    ms: &MomentSequence,
    n: usize,
    cfg: &MomentConfig,
) -> Result<Reconstruction> {
    let mut order = n;
    loop {
        match jacobi_from_moments(ms, order, cfg) {
            Ok(j) => {
                let measure = gauss_quadrature(&j, cfg)?;
                return Ok(Reconstruction {
                    measure,
                    order_used: order,
                    degenerate: order < n,
                });
            }
            Err(Error::RankDeficient { order: failing }) if failing > 0 => {
                order = failing;
            }
            Err(e) => return Err(e),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::{hamburger_existence, MomentKind};
    use proptest::prelude::*;

    fn cfg() -> MomentConfig {
        MomentConfig::default()
    }

    fn hamburger(values: &[f64]) -> MomentSequence {
        MomentSequence::new(MomentKind::Hamburger, values.to_vec()).unwrap()
    }

    #[test]
    fn gaussian_prefix_recurrence() {
        // orthogonalizing {1, x} against (1, 0, 1/2, 0, 3/4) by hand gives
        // p_2(x) = x^2 - 1/2, so alpha = (0, 0), beta = (1/2)
        let j = jacobi_from_moments(&hamburger(&[1.0, 0.0, 0.5, 0.0, 0.75]), 2, &cfg()).unwrap();
        assert!(j.alpha.iter().all(|a| a.abs() < 1e-14));
        assert!((j.beta[0] - 0.5).abs() < 1e-14);
        assert_eq!(j.mass, 1.0);
    }

    #[test]
    fn standard_normal_recurrence() {
        let j = jacobi_from_moments(&hamburger(&[1.0, 0.0, 1.0, 0.0, 3.0]), 2, &cfg()).unwrap();
        assert!(j.alpha.iter().all(|a| a.abs() < 1e-14));
        assert!((j.beta[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn point_mass_recurrence() {
        let c = 3.5;
        let j = jacobi_from_moments(&hamburger(&[1.0, c, c * c]), 1, &cfg()).unwrap();
        assert_eq!(j.alpha.len(), 1);
        assert!((j.alpha[0] - c).abs() < 1e-14);
        assert!(j.beta.is_empty());
    }

    #[test]
    fn quadrature_of_two_point_rule() {
        // alpha = (0,0), beta = (1/2): eigenvalues of [[0, r],[r, 0]] with
        // r = sqrt(1/2) are ±1/sqrt(2); solved by hand as a 2x2 problem
        let j = JacobiMatrix { alpha: vec![0.0, 0.0], beta: vec![0.5], mass: 1.0 };
        let m = gauss_quadrature(&j, &cfg()).unwrap();
        let expected = 0.5f64.sqrt();
        assert_eq!(m.atoms().len(), 2);
        assert!((m.atoms()[0].0 + expected).abs() < 1e-14);
        assert!((m.atoms()[1].0 - expected).abs() < 1e-14);
        assert!((m.atoms()[0].1 - 0.5).abs() < 1e-14);
        assert!((m.atoms()[1].1 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quadrature_unit_offdiagonal() {
        // eigenvalues of [[0,1],[1,0]] are ±1
        let j = JacobiMatrix { alpha: vec![0.0, 0.0], beta: vec![1.0], mass: 1.0 };
        let m = gauss_quadrature(&j, &cfg()).unwrap();
        assert!((m.atoms()[0].0 + 1.0).abs() < 1e-14);
        assert!((m.atoms()[1].0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quadrature_single_atom() {
        let j = JacobiMatrix { alpha: vec![2.0], beta: vec![], mass: 3.0 };
        let m = gauss_quadrature(&j, &cfg()).unwrap();
        assert_eq!(m.atoms(), &[(2.0, 3.0)]);
    }

    #[test]
    fn measure_moments_examples() {
        let r = 0.5f64.sqrt();
        let m = DiscreteMeasure::new(vec![(-r, 0.5), (r, 0.5)]).unwrap();
        let ms = measure_moments(&m, 3, &cfg()).unwrap();
        let want = [1.0, 0.0, 0.5, 0.0];
        for (got, want) in ms.values().iter().zip(&want) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }

        let single = DiscreteMeasure::new(vec![(0.0, 1.0)]).unwrap();
        assert_eq!(measure_moments(&single, 4, &cfg()).unwrap().values(), &[1.0, 0.0, 0.0, 0.0, 0.0]);

        let unit = DiscreteMeasure::new(vec![(1.0, 1.0)]).unwrap();
        assert_eq!(measure_moments(&unit, 2, &cfg()).unwrap().values(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn verify_detects_wrong_measure() {
        let gaussian = hamburger(&[1.0, 0.0, 0.5]);
        let point = DiscreteMeasure::new(vec![(0.0, 1.0)]).unwrap();
        let rep = verify_moment_solution(&point, &gaussian, 1e-8, &cfg()).unwrap();
        assert!(!rep.ok);
        assert!(rep.max_rel_err > 0.9);
    }

    #[test]
    fn round_trip_identity() {
        let ms = hamburger(&[1.0, 0.0, 0.5, 0.0, 0.75]);
        let j = jacobi_from_moments(&ms, 2, &cfg()).unwrap();
        let m = gauss_quadrature(&j, &cfg()).unwrap();
        let truncated = hamburger(&ms.values()[..4]);
        let rep = verify_moment_solution(&m, &truncated, 1e-12, &cfg()).unwrap();
        assert!(rep.ok, "max rel err {}", rep.max_rel_err);
    }

    /// (2n-1)!!/2^n
    fn gaussian_even_moment(n: usize) -> f64 {
        let mut r = 1.0;
        for i in 1..=n {
            r *= (2 * i - 1) as f64;
        }
        r / 2f64.powi(n as i32)
    }

    #[test]
    fn quartic_sequence_reconstruction_at_order_six() {
        // moments of the fourth-power observable, m_n = (4n-1)!!/2^{2n}
        let values: Vec<f64> = (0..=12).map(|n| gaussian_even_moment(2 * n)).collect();
        let ms = hamburger(&values);
        let rec = reconstruct_measure(&ms, 6, &cfg()).unwrap();
        assert_eq!(rec.order_used, 6);
        assert!(!rec.degenerate);
        let truncated = hamburger(&values[..12]);
        let rep = verify_moment_solution(&rec.measure, &truncated, 1e-8, &cfg()).unwrap();
        assert!(rep.ok, "max rel err {}", rep.max_rel_err);
    }

    #[test]
    fn rank_deficiency_names_failing_order_and_fallback_works() {
        // two-atom measure: H_2 is singular, order 3 must fail at pivot 2
        let m = DiscreteMeasure::new(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let ms = measure_moments(&m, 6, &cfg()).unwrap();
        match jacobi_from_moments(&ms, 3, &cfg()) {
            Err(Error::RankDeficient { order }) => assert_eq!(order, 2),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        let rec = reconstruct_measure(&ms, 3, &cfg()).unwrap();
        assert_eq!(rec.order_used, 2);
        assert!(rec.degenerate);
        let rep = verify_moment_solution(&rec.measure, &ms, 1e-10, &cfg()).unwrap();
        assert!(rep.ok);
    }

    #[test]
    fn scaling_moments_scales_weights_not_atoms() {
        let values: Vec<f64> = (0..=8).map(gaussian_even_moment).collect();
        let scaled: Vec<f64> = values.iter().map(|v| 7.5 * v).collect();
        let a = gauss_quadrature(&jacobi_from_moments(&hamburger(&values), 4, &cfg()).unwrap(), &cfg()).unwrap();
        let b = gauss_quadrature(&jacobi_from_moments(&hamburger(&scaled), 4, &cfg()).unwrap(), &cfg()).unwrap();
        for (x, y) in a.atoms().iter().zip(b.atoms()) {
            assert!((x.0 - y.0).abs() < 1e-12, "atom moved: {} vs {}", x.0, y.0);
            assert!((7.5 * x.1 - y.1).abs() < 1e-12 * y.1.abs().max(1.0));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        /// nonnegative discrete measures always pass the Hamburger
        /// existence test, and the Gauss round trip reproduces their
        /// moments
        #[test]
        fn random_measure_round_trip(
            slots in proptest::collection::btree_set(0usize..60, 1..5),
            weights in proptest::collection::vec(0.05f64..5.0, 5),
        ) {
            let atoms: Vec<(f64, f64)> = slots
                .iter()
                .enumerate()
                .map(|(i, &s)| (-6.0 + 0.2 * s as f64, weights[i % weights.len()]))
                .collect();
            let m = DiscreteMeasure::new(atoms).unwrap();
            let npts = m.atoms().len();
            let ms = measure_moments(&m, (2 * npts).max(2), &cfg()).unwrap();

            let existence = hamburger_existence(&ms, &cfg()).unwrap();
            prop_assert!(existence.feasible);

            let rec = reconstruct_measure(&ms, npts, &cfg()).unwrap();
            let rep = verify_moment_solution(&rec.measure, &ms, 1e-8, &cfg()).unwrap();
            prop_assert!(rep.ok, "max rel err {}", rep.max_rel_err);

            // weights positive, summing to m_0
            let total: f64 = rec.measure.atoms().iter().map(|a| a.1).sum();
            prop_assert!(rec.measure.atoms().iter().all(|a| a.1 > 0.0));
            prop_assert!((total - ms.values()[0]).abs() <= 1e-10 * ms.values()[0]);
        }
    }
}
