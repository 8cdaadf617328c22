//! Deficiency indices and extension classification for the momentum
//! operator -i d/dx on an interval.
//!
//! The deficiency equations -i g' = ±i g have the explicit solutions
//! c e^{∓x}, so the indices reduce to an integrability question that is
//! decided analytically: which of e^{-x}, e^{+x} are square integrable on
//! the domain. Any core between the compactly supported smooth functions
//! and the rapidly decreasing ones yields the same deficiency spaces, which
//! is what makes the analytic test faithful; the library therefore never
//! discretizes to *decide* indices. The discretized operator below is a
//! quadrature aid only.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::TruncatedRep;
use crate::error::{Error, Result};

/// Interval on which the momentum operator acts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IntervalDomain {
    Bounded { lo: f64, hi: f64 },
    HalfLineRight { lo: f64 },
    FullLine,
}

impl IntervalDomain {
    pub fn validate(&self) -> Result<()> {
        if let IntervalDomain::Bounded { lo, hi } = self {
            if !(lo < hi) {
                return Err(Error::InvalidInput(format!(
                    "bounded interval needs lo < hi, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionClass {
    EssentiallySelfadjoint,
    MaximallySymmetricNotSa,
    ManySelfadjointExtensions,
    NoSelfadjointExtensionNotMaximal,
}

/// Deficiency indices together with the extension-theoretic consequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyReport {
    pub n_plus: usize,
    pub n_minus: usize,
    pub classification: ExtensionClass,
    pub extension_family_dim: usize,
    pub note: String,
}

/// Classification from a pair of deficiency indices:
/// (0,0) essentially selfadjoint; one index zero, the other positive:
/// maximally symmetric but not selfadjoint; equal nonzero: an n^2-parameter
/// family of selfadjoint extensions; unequal nonzero: no selfadjoint
/// extension and not maximal.
pub fn classify_extension(n_plus: usize, n_minus: usize) -> (ExtensionClass, usize) {
    match (n_plus, n_minus) {
        (0, 0) => (ExtensionClass::EssentiallySelfadjoint, 0),
        (0, _) | (_, 0) => (ExtensionClass::MaximallySymmetricNotSa, 0),
        (p, m) if p == m => (ExtensionClass::ManySelfadjointExtensions, p * p),
        _ => (ExtensionClass::NoSelfadjointExtensionNotMaximal, 0),
    }
}

/// Deficiency indices of -i d/dx on the given interval, by integrability of
/// the explicit deficiency solutions e^{∓x}.
pub fn momentum_deficiency(dom: &IntervalDomain) -> Result<DeficiencyReport> {
    dom.validate()?;
    // n_+ counts L^2 solutions of the +i equation (e^{-x}); n_- those of
    // the -i equation (e^{+x}); only the interval kind matters because
    // translation rescales the solutions by finite factors
    let (n_plus, n_minus, note) = match dom {
        IntervalDomain::Bounded { .. } => (
            1,
            1,
            "both e^{-x} and e^{+x} are square integrable on a bounded interval; \
             a one-parameter family of selfadjoint boundary conditions results"
                .to_string(),
        ),
        IntervalDomain::HalfLineRight { .. } => (
            1,
            0,
            "e^{-x} is square integrable on the right half line, e^{+x} is not; \
             the closure admits no proper symmetric extension"
                .to_string(),
        ),
        IntervalDomain::FullLine => (
            0,
            0,
            "neither e^{-x} nor e^{+x} is square integrable on the whole line"
                .to_string(),
        ),
    };
    let (classification, extension_family_dim) = classify_extension(n_plus, n_minus);
    Ok(DeficiencyReport {
        n_plus,
        n_minus,
        classification,
        extension_family_dim,
        note,
    })
}

/// A discretized momentum operator together with a truncation note when the
/// domain had to be cut to finite length.
#[derive(Debug, Clone)]
pub struct DiscretizedMomentum {
    pub rep: TruncatedRep,
    pub grid: Vec<f64>,
    pub step: f64,
    /// Present when an unbounded domain was truncated: the finite matrix
    /// does not see the deficiency structure of the original operator.
    pub truncation_note: Option<String>,
}

/// Central-difference discretization of -i d/dx with zero boundary values
/// on `grid_points` interior nodes. Unbounded domains are truncated to
/// `truncation_length`.
pub fn discretize_momentum(
    dom: &IntervalDomain,
    grid_points: usize,
    truncation_length: f64,
) -> Result<DiscretizedMomentum> {
    dom.validate()?;
    if grid_points < 8 {
        return Err(Error::InvalidInput(format!(
            "need at least 8 grid points, got {grid_points}"
        )));
    }
    if !(truncation_length > 0.0) {
        return Err(Error::InvalidInput("truncation length must be positive".into()));
    }
    let (lo, hi, note) = match dom {
        IntervalDomain::Bounded { lo, hi } => (*lo, *hi, None),
        IntervalDomain::HalfLineRight { lo } => (
            *lo,
            *lo + truncation_length,
            Some(format!(
                "half line truncated to [{lo}, {}]; truncation replaces the (1,0) \
                 index structure by a bounded-interval one, so the matrix is a \
                 quadrature aid only",
                lo + truncation_length
            )),
        ),
        IntervalDomain::FullLine => (
            -0.5 * truncation_length,
            0.5 * truncation_length,
            Some(
                "full line truncated to a symmetric box; the matrix is a quadrature aid only"
                    .to_string(),
            ),
        ),
    };
    let n = grid_points;
    let h = (hi - lo) / (n as f64 + 1.0);
    let grid: Vec<f64> = (1..=n).map(|i| lo + h * i as f64).collect();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let c = Complex64::new(0.0, -1.0 / (2.0 * h));
    for i in 0..n {
        if i + 1 < n {
            m[(i, i + 1)] = c;
        }
        if i > 0 {
            m[(i, i - 1)] = -c;
        }
    }
    Ok(DiscretizedMomentum {
        rep: TruncatedRep::new(m)?,
        grid,
        step: h,
        truncation_note: note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_interval_has_one_parameter_family() {
        let r = momentum_deficiency(&IntervalDomain::Bounded { lo: 0.0, hi: 1.0 }).unwrap();
        assert_eq!((r.n_plus, r.n_minus), (1, 1));
        assert_eq!(r.classification, ExtensionClass::ManySelfadjointExtensions);
        assert_eq!(r.extension_family_dim, 1);
    }

    #[test]
    fn right_half_line_is_maximally_symmetric() {
        let r = momentum_deficiency(&IntervalDomain::HalfLineRight { lo: 0.0 }).unwrap();
        assert_eq!((r.n_plus, r.n_minus), (1, 0));
        assert_eq!(r.classification, ExtensionClass::MaximallySymmetricNotSa);
        assert_eq!(r.extension_family_dim, 0);
    }

    #[test]
    fn full_line_is_essentially_selfadjoint() {
        let r = momentum_deficiency(&IntervalDomain::FullLine).unwrap();
        assert_eq!((r.n_plus, r.n_minus), (0, 0));
        assert_eq!(r.classification, ExtensionClass::EssentiallySelfadjoint);
    }

    #[test]
    fn indices_depend_only_on_interval_kind() {
        for (lo, hi) in [(-3.0, 1.5), (0.0, 1e-3), (100.0, 200.0)] {
            let r = momentum_deficiency(&IntervalDomain::Bounded { lo, hi }).unwrap();
            assert_eq!((r.n_plus, r.n_minus), (1, 1));
        }
        for lo in [-5.0, 0.0, 17.0] {
            let r = momentum_deficiency(&IntervalDomain::HalfLineRight { lo }).unwrap();
            assert_eq!((r.n_plus, r.n_minus), (1, 0));
        }
    }

    #[test]
    fn classify_extension_table() {
        use ExtensionClass::*;
        assert_eq!(classify_extension(0, 0), (EssentiallySelfadjoint, 0));
        assert_eq!(classify_extension(1, 0), (MaximallySymmetricNotSa, 0));
        assert_eq!(classify_extension(0, 3), (MaximallySymmetricNotSa, 0));
        assert_eq!(classify_extension(1, 1), (ManySelfadjointExtensions, 1));
        assert_eq!(classify_extension(2, 2), (ManySelfadjointExtensions, 4));
        assert_eq!(classify_extension(2, 1), (NoSelfadjointExtensionNotMaximal, 0));
    }

    #[test]
    fn invalid_interval_rejected() {
        assert!(momentum_deficiency(&IntervalDomain::Bounded { lo: 1.0, hi: 1.0 }).is_err());
    }

    #[test]
    fn discretization_is_hermitian() {
        let d = discretize_momentum(&IntervalDomain::Bounded { lo: 0.0, hi: 1.0 }, 8, 40.0)
            .unwrap();
        let m = &d.rep.matrix;
        for i in 0..8 {
            for j in 0..8 {
                let diff = m[(i, j)] - m[(j, i)].conj();
                assert!(diff.norm() < 1e-15);
            }
        }
        assert!(d.truncation_note.is_none());
    }

    #[test]
    fn derivative_of_quadratic_is_exact_interior() {
        // central differences are exact on quadratics
        let n = 16usize;
        let d = discretize_momentum(&IntervalDomain::Bounded { lo: 0.0, hi: 1.0 }, n, 40.0)
            .unwrap();
        let f: Vec<Complex64> = d.grid.iter().map(|&x| Complex64::new(x * (1.0 - x), 0.0)).collect();
        let fv = nalgebra::DVector::from_vec(f);
        let out = &d.rep.matrix * fv;
        for (i, &x) in d.grid.iter().enumerate().skip(1).take(n - 2) {
            let want = Complex64::new(0.0, -(1.0 - 2.0 * x)); // -i f'
            assert!((out[i] - want).norm() < 1e-12, "row {i}");
        }
    }

    #[test]
    fn derivative_converges_at_second_order() {
        // halving h divides the sine-wave error by about four
        let err = |n: usize| {
            let d = discretize_momentum(&IntervalDomain::Bounded { lo: 0.0, hi: 1.0 }, n, 40.0)
                .unwrap();
            let f: Vec<Complex64> = d
                .grid
                .iter()
                .map(|&x| Complex64::new((std::f64::consts::PI * x).sin(), 0.0))
                .collect();
            let out = &d.rep.matrix * nalgebra::DVector::from_vec(f);
            d.grid
                .iter()
                .enumerate()
                .skip(2)
                .take(n - 4)
                .map(|(i, &x)| {
                    let want = Complex64::new(
                        0.0,
                        -std::f64::consts::PI * (std::f64::consts::PI * x).cos(),
                    );
                    (out[i] - want).norm()
                })
                .fold(0.0, f64::max)
        };
        let e1 = err(32);
        let e2 = err(64);
        let ratio = e1 / e2;
        assert!(ratio > 3.2 && ratio < 4.8, "convergence ratio {ratio}");
    }

    #[test]
    fn constant_function_maps_to_zero_in_the_interior() {
        let n = 12usize;
        let d = discretize_momentum(&IntervalDomain::HalfLineRight { lo: 0.0 }, n, 10.0)
            .unwrap();
        assert!(d.truncation_note.is_some());
        let ones = nalgebra::DVector::from_element(n, Complex64::new(1.0, 0.0));
        let out = &d.rep.matrix * ones;
        for i in 1..n - 1 {
            assert!(out[i].norm() < 1e-14);
        }
    }

    #[test]
    fn spectrum_real_and_symmetric() {
        let d = discretize_momentum(&IntervalDomain::Bounded { lo: -1.0, hi: 1.0 }, 17, 40.0)
            .unwrap();
        let eig = d.rep.matrix.clone().symmetric_eigen().eigenvalues;
        let mut ev: Vec<f64> = eig.iter().cloned().collect();
        ev.sort_by(f64::total_cmp);
        let n = ev.len();
        for i in 0..n / 2 {
            assert!((ev[i] + ev[n - 1 - i]).abs() < 1e-10, "asymmetric pair");
        }
    }

    #[test]
    fn report_json_has_classification_and_note() {
        let r = momentum_deficiency(&IntervalDomain::HalfLineRight { lo: 0.0 }).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"classification\":\"maximally_symmetric_not_sa\""));
        assert!(json.contains("\"note\""));
    }
}
