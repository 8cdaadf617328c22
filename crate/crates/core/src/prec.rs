//! Software floating point with configurable precision.
//!
//! Moment-to-recurrence transforms sit on top of Hankel matrices whose
//! condition number grows exponentially with the order, so everything in
//! this module runs on [`Mp`] values carrying an explicit mantissa width.
//! Inputs and outputs stay `f64`; only the internals are widened.

use dashu_base::SquareRoot;
use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

use crate::error::{Error, Result};

/// Binary software float with round-half-to-even semantics.
pub type Mp = FBig<HalfEven, 2>;

const LOG2_10: f64 = std::f64::consts::LOG2_10;

/// Precision context: a mantissa width in bits derived from decimal digits.
#[derive(Debug, Clone, Copy)]
pub struct MpCtx {
    bits: usize,
}

impl MpCtx {
    pub fn from_digits(digits: u32) -> Self {
        let digits = digits.max(16);
        MpCtx {
            bits: (digits as f64 * LOG2_10).ceil() as usize + 2,
        }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    /// Lift a finite `f64` exactly, then pin the working precision.
    pub fn lift(&self, x: f64) -> Result<Mp> {
        let v = Mp::try_from(x)
            .map_err(|_| Error::InvalidInput(format!("non-finite value {x}")))?;
        Ok(v.with_precision(self.bits).value())
    }

    pub fn zero(&self) -> Mp {
        Mp::ZERO.with_precision(self.bits).value()
    }

    pub fn one(&self) -> Mp {
        Mp::ONE.with_precision(self.bits).value()
    }

    /// 2^-(bits - 8): the convergence floor for iterative algorithms.
    pub fn epsilon(&self) -> Mp {
        let shift = self.bits.saturating_sub(8) as isize;
        self.one() >> shift
    }
}

pub fn to_f64(x: &Mp) -> f64 {
    x.to_f64().value()
}

fn is_nonpositive(x: &Mp) -> bool {
    x.repr().is_zero() || x.repr().sign() == dashu_base::Sign::Negative
}

fn abs(x: &Mp) -> Mp {
    if x.repr().sign() == dashu_base::Sign::Negative {
        -x.clone()
    } else {
        x.clone()
    }
}

/// Eigendecomposition of a dense symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (unsorted) and the orthogonal matrix of eigenvectors
/// stored column-wise, so `mat = V diag(w) V^T`. Intended for the small,
/// badly conditioned matrices coming out of moment problems; cost is
/// O(n^3) per sweep with software-float arithmetic.
pub fn sym_eigen(mat: &[Vec<Mp>], ctx: &MpCtx) -> Result<(Vec<Mp>, Vec<Vec<Mp>>)> {
    let n = mat.len();
    for row in mat {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: row.len(),
            });
        }
    }
    let mut a: Vec<Vec<Mp>> = mat.to_vec();
    let mut v: Vec<Vec<Mp>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { ctx.one() } else { ctx.zero() })
                .collect()
        })
        .collect();

    if n <= 1 {
        let w = if n == 1 { vec![a[0][0].clone()] } else { vec![] };
        return Ok((w, v));
    }

    // threshold scale: largest absolute entry
    let mut scale = ctx.zero();
    for i in 0..n {
        for j in 0..n {
            let t = abs(&a[i][j]);
            if t > scale {
                scale = t;
            }
        }
    }
    if scale.repr().is_zero() {
        let w = (0..n).map(|_| ctx.zero()).collect();
        return Ok((w, v));
    }
    let stop = &scale * ctx.epsilon();

    let one = ctx.one();
    let two = &one + &one;
    for _sweep in 0..64 {
        let mut off = ctx.zero();
        for p in 0..n {
            for q in (p + 1)..n {
                let t = abs(&a[p][q]);
                if t > off {
                    off = t.clone();
                }
            }
        }
        if off <= stop {
            let w = (0..n).map(|i| a[i][i].clone()).collect();
            return Ok((w, v));
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[p][q].clone();
                if abs(&apq) <= stop {
                    continue;
                }
                let theta = (&a[q][q] - &a[p][p]) / (&two * &apq);
                let t = {
                    let denom = abs(&theta) + (&one + &theta * &theta).sqrt();
                    let t = &one / denom;
                    if theta.repr().sign() == dashu_base::Sign::Negative {
                        -t
                    } else {
                        t
                    }
                };
                let c = &one / (&one + &t * &t).sqrt();
                let s = &t * &c;
                // update the matrix: rows/columns p and q
                for k in 0..n {
                    let akp = a[k][p].clone();
                    let akq = a[k][q].clone();
                    a[k][p] = &c * &akp - &s * &akq;
                    a[k][q] = &s * &akp + &c * &akq;
                }
                for k in 0..n {
                    let apk = a[p][k].clone();
                    let aqk = a[q][k].clone();
                    a[p][k] = &c * &apk - &s * &aqk;
                    a[q][k] = &s * &apk + &c * &aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p].clone();
                    let vkq = v[k][q].clone();
                    v[k][p] = &c * &vkp - &s * &vkq;
                    v[k][q] = &s * &vkp + &c * &vkq;
                }
            }
        }
    }
    Err(Error::NumericFailure(
        "Jacobi eigensolver did not converge".into(),
    ))
}

/// Cholesky-like factorization H = R^T R of a symmetric positive definite
/// matrix, computing the first `rows` rows of the upper factor R over all
/// `cols` columns. Fails with the pivot index when a pivot drops below
/// `rel_floor` times its diagonal entry (cancellation is what a pivot
/// measures, so the floor is per row).
pub fn partial_cholesky(
    h: &[Vec<Mp>],
    rows: usize,
    cols: usize,
    rel_floor: &Mp,
    ctx: &MpCtx,
) -> std::result::Result<Vec<Vec<Mp>>, usize> {
    let mut r: Vec<Vec<Mp>> = (0..rows).map(|_| vec![ctx.zero(); cols]).collect();
    for i in 0..rows {
        let mut s = h[i][i].clone();
        for k in 0..i {
            s = s - &r[k][i] * &r[k][i];
        }
        let floor = rel_floor * abs(&h[i][i]);
        if is_nonpositive(&s) || s <= floor {
            return Err(i);
        }
        let rii = s.sqrt();
        r[i][i] = rii.clone();
        for j in (i + 1)..cols {
            let mut t = h[i][j].clone();
            for k in 0..i {
                t = t - &r[k][i] * &r[k][j];
            }
            r[i][j] = t / &rii;
        }
    }
    Ok(r)
}

/// Pairwise (cascade) summation; deterministic and far more accurate than a
/// running sum for the long reductions in the FFT-based measures.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
        }
    }
}
