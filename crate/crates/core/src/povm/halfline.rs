//! The momentum measures of a window function confined to the half line.
//!
//! The closed symmetric momentum operator on [0, ∞) is maximally symmetric
//! but not selfadjoint, and the unique POVM decomposing it is the
//! compression of the free momentum spectral measure. For a window χ
//! supported in [0, L] the induced measure of a momentum cell E is
//!
//!   μ_χ(E) = ∫_E |χ̂(k)|² dk,   χ̂(k) = (2π)^{-1/2} ∫ e^{-ikx} χ(x) dx,
//!
//! with χ extended by zero to the whole line. This module evaluates the
//! transform on a power-of-two grid and bins |χ̂|² dk into the momentum
//! cells; the total equals the squared norm of the sampled window exactly
//! (discrete Plancherel), so the mass check probes only the sampling and
//! truncation quality.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prec::pairwise_sum;

use super::CellGrid;

/// Per-cell momentum masses of a half-line window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalflineMasses {
    pub masses: Vec<f64>,
    pub total_mass: f64,
    /// Fraction of the total mass landing in the two unbounded tail cells.
    pub tail_mass_fraction: f64,
    /// Set when the tail cells carry more than the tail tolerance: cell
    /// representatives are clamped, so moments computed against this grid
    /// misplace that mass.
    pub tail_mass_warning: bool,
    /// Set when the window has not decayed at the truncation length L.
    pub truncation_warning: bool,
}

/// Momentum-cell masses of a real window sampled uniformly on [0, L] at
/// positions j·L/n. The sample count must be a power of two, the window
/// must vanish at 0, and it should have decayed by L (otherwise the
/// truncation flag is raised and the masses describe the truncated
/// window).
pub fn halfline_momentum_measures(
    samples: &[f64],
    length: f64,
    grid: &CellGrid,
) -> Result<HalflineMasses> {
    let n = samples.len();
    if n < 4 || !n.is_power_of_two() {
        return Err(Error::InvalidInput(format!(
            "sample count must be a power of two >= 4, got {n}"
        )));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidInput("length must be positive".into()));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidInput("non-finite sample".into()));
    }
    let peak = samples.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if peak == 0.0 {
        return Err(Error::InvalidInput("window is identically zero".into()));
    }
    if samples[0].abs() > 1e-9 * peak {
        return Err(Error::InvalidInput(
            "window must vanish at the origin".into(),
        ));
    }
    let truncation_warning = samples[n - 1].abs() > 1e-6 * peak;

    let h = length / n as f64;
    let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    // χ̂(k_m) = (2π)^{-1/2} h Σ_j χ_j e^{-i k_m x_j}, k_m = 2π m / L with
    // m = 0..n/2-1 positive, then negative frequencies
    let dk = 2.0 * std::f64::consts::PI / length;
    let scale = h * h / (2.0 * std::f64::consts::PI) * dk;
    let mut per_cell: Vec<Vec<f64>> = vec![Vec::new(); grid.cells()];
    let mut all: Vec<f64> = Vec::with_capacity(n);
    for (m, z) in buf.iter().enumerate() {
        let freq = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
        let k = freq * dk;
        let mass = z.norm_sqr() * scale;
        per_cell[grid.cell_of(k)].push(mass);
        all.push(mass);
    }
    let masses: Vec<f64> = per_cell.iter().map(|v| pairwise_sum(v)).collect();
    let total_mass = pairwise_sum(&all);
    let tail = masses[0] + masses[grid.cells() - 1];
    let tail_mass_fraction = if total_mass > 0.0 { tail / total_mass } else { 0.0 };
    Ok(HalflineMasses {
        masses,
        total_mass,
        tail_mass_fraction,
        tail_mass_warning: tail_mass_fraction > crate::config::TOL_TAIL,
        truncation_warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;

    fn exp_window(n: usize, length: f64) -> Vec<f64> {
        let h = length / n as f64;
        (0..n).map(|j| {
            let x = j as f64 * h;
            x * (-x).exp()
        }).collect()
    }

    fn default_grid() -> CellGrid {
        CellGrid::symmetric(8.3, 0.5).unwrap()
    }

    #[test]
    fn plancherel_mass_check() {
        let (n, length) = (1 << 14, 32.0);
        let out = halfline_momentum_measures(&exp_window(n, length), length, &default_grid())
            .unwrap();
        // independent norm oracle: ∫_0^∞ x² e^{-2x} dx by quadrature
        let norm_sq = quadrature::integrate(
            &|x: f64| x * x * (-2.0 * x).exp(),
            0.0,
            40.0,
            1e-14,
            1e-12,
        )
        .unwrap();
        assert!((norm_sq - 0.25).abs() < 1e-12);
        let rel = (out.total_mass - norm_sq).abs() / norm_sq;
        assert!(rel < 1e-6, "Plancherel defect {rel:e}");
        assert!(!out.truncation_warning);
    }

    #[test]
    fn real_window_has_zero_first_moment() {
        let (n, length) = (1 << 14, 32.0);
        let grid = default_grid();
        let out = halfline_momentum_measures(&exp_window(n, length), length, &grid).unwrap();
        let first: f64 = grid
            .representatives()
            .iter()
            .zip(&out.masses)
            .map(|(&rep, &m)| rep * m)
            .sum();
        assert!(first.abs() < 1e-6 * out.total_mass, "first moment {first:e}");
    }

    #[test]
    fn rescaling_scales_masses_quadratically() {
        let (n, length) = (1 << 10, 32.0);
        let grid = default_grid();
        let base = exp_window(n, length);
        let scaled: Vec<f64> = base.iter().map(|s| 3.0 * s).collect();
        let a = halfline_momentum_measures(&base, length, &grid).unwrap();
        let b = halfline_momentum_measures(&scaled, length, &grid).unwrap();
        for (x, y) in a.masses.iter().zip(&b.masses) {
            assert!((9.0 * x - y).abs() <= 1e-12 * y.abs().max(1e-12));
        }
    }

    #[test]
    fn non_decaying_window_raises_truncation_flag() {
        let n = 1 << 8;
        let length = 4.0;
        let h = length / n as f64;
        let samples: Vec<f64> = (0..n).map(|j| {
            let x = j as f64 * h;
            x * (-x).exp() // far from decayed by x = 4
        }).collect();
        let out = halfline_momentum_measures(&samples, length, &default_grid()).unwrap();
        assert!(out.truncation_warning);
    }

    #[test]
    fn input_validation() {
        let grid = default_grid();
        assert!(halfline_momentum_measures(&[0.0, 1.0, 2.0], 1.0, &grid).is_err()); // not power of two
        let mut w = exp_window(64, 8.0);
        w[0] = 1.0; // does not vanish at the origin
        assert!(halfline_momentum_measures(&w, 8.0, &grid).is_err());
        assert!(halfline_momentum_measures(&vec![0.0; 64], 8.0, &grid).is_err());
    }
}
