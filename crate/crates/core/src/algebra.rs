//! One-mode CCR *-algebra with normal-ordered arithmetic, vacuum and
//! deformed expectations, and truncated Fock-space representations.
//!
//! Elements are stored as coefficients of normally ordered monomials
//! a*^n a^m; the commutator [a, a*] = 1 drives all reordering. The ladder
//! actions a ψ_k = sqrt(k) ψ_{k-1}, a* ψ_k = sqrt(k+1) ψ_{k+1} realize every
//! element as a matrix on Fock levels 0..=N. Truncation levels are chosen so
//! that the vectors appearing in a moment computation live strictly below
//! the cut, which makes the computed moments exact up to rounding: the
//! finite-rank cut plays the role that a dense invariant domain plays at
//! infinite dimension, where no finite counterpart of the Hermite-span
//! versus Schwartz-space distinction survives.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment::{MomentKind, MomentSequence};
use crate::quadrature;

const COEFF_PRUNE: f64 = 0.0; // exact zero pruning only

/// An element of the one-mode CCR algebra in normal order:
/// sum of c_{n,m} a*^n a^m over finitely many (n, m).
#[derive(Debug, Clone, PartialEq)]
pub struct NormalOrderedElement {
    coeffs: BTreeMap<(u32, u32), Complex64>,
}

impl Serialize for NormalOrderedElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            coeffs: Vec<(u32, u32, f64, f64)>,
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(&(n, m), c)| (n, m, c.re, c.im))
            .collect();
        Repr { coeffs }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormalOrderedElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            coeffs: Vec<(u32, u32, f64, f64)>,
        }
        let r = Repr::deserialize(d)?;
        Ok(NormalOrderedElement::from_coeffs(
            r.coeffs
                .into_iter()
                .map(|(n, m, re, im)| ((n, m), Complex64::new(re, im))),
        ))
    }
}

impl NormalOrderedElement {
    pub fn zero() -> Self {
        NormalOrderedElement { coeffs: BTreeMap::new() }
    }

    pub fn identity() -> Self {
        Self::monomial(0, 0, Complex64::new(1.0, 0.0))
    }

    /// The annihilation generator a.
    pub fn annihilation() -> Self {
        Self::monomial(0, 1, Complex64::new(1.0, 0.0))
    }

    /// The creation generator a*.
    pub fn creation() -> Self {
        Self::monomial(1, 0, Complex64::new(1.0, 0.0))
    }

    pub fn monomial(n: u32, m: u32, c: Complex64) -> Self {
        let mut coeffs = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            coeffs.insert((n, m), c);
        }
        NormalOrderedElement { coeffs }
    }

    pub fn from_coeffs<I: IntoIterator<Item = ((u32, u32), Complex64)>>(iter: I) -> Self {
        let mut e = Self::zero();
        for ((n, m), c) in iter {
            e.accumulate(n, m, c);
        }
        e
    }

    fn accumulate(&mut self, n: u32, m: u32, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.coeffs.entry((n, m)).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if entry.norm_sqr() <= COEFF_PRUNE {
            self.coeffs.remove(&(n, m));
        }
    }

    pub fn coeffs(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// max (n + m) over the support; 0 for the zero element.
    pub fn degree(&self) -> u32 {
        self.coeffs.keys().map(|&(n, m)| n + m).max().unwrap_or(0)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self::from_coeffs(self.coeffs().map(|(k, c)| (k, c * z)))
    }

    /// Hermiticity up to coefficient tolerance `tol`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let diff = self.clone() - adjoint(self);
        let ok = diff.coeffs().all(|(_, c)| c.norm() <= tol);
        ok
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs().map(|(_, c)| c.norm()).fold(0.0, f64::max)
    }
}

impl Add for NormalOrderedElement {
    type Output = NormalOrderedElement;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for ((n, m), c) in rhs.coeffs {
            out.accumulate(n, m, c);
        }
        out
    }
}

impl Sub for NormalOrderedElement {
    type Output = NormalOrderedElement;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self;
        for ((n, m), c) in rhs.coeffs {
            out.accumulate(n, m, -c);
        }
        out
    }
}

impl Neg for NormalOrderedElement {
    type Output = NormalOrderedElement;
    fn neg(self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &NormalOrderedElement {
    type Output = NormalOrderedElement;
    fn mul(self, rhs: &NormalOrderedElement) -> NormalOrderedElement {
        normal_product(self, rhs)
    }
}

/// Normally ordered product, applying a^m a*^p =
/// sum_k k! C(m,k) C(p,k) a*^{p-k} a^{m-k} coefficient-exactly.
pub fn normal_product(
    x: &NormalOrderedElement,
    y: &NormalOrderedElement,
) -> NormalOrderedElement {
    let mut out = NormalOrderedElement::zero();
    for ((n1, m1), c1) in x.coeffs() {
        for ((n2, m2), c2) in y.coeffs() {
            // (a*^n1 a^m1)(a*^n2 a^m2): commute a^m1 past a*^n2
            let kmax = m1.min(n2);
            let mut w = 1.0f64; // k! C(m1,k) C(n2,k)
            for k in 0..=kmax {
                if k > 0 {
                    w *= ((m1 - k + 1) as f64) * ((n2 - k + 1) as f64) / k as f64;
                }
                out.accumulate(n1 + n2 - k, m1 + m2 - k, c1 * c2 * w);
            }
        }
    }
    out
}

/// Antilinear involution: coefficient of a*^n a^m conjugates and moves to
/// a*^m a^n.
pub fn adjoint(x: &NormalOrderedElement) -> NormalOrderedElement {
    NormalOrderedElement::from_coeffs(x.coeffs().map(|((n, m), c)| ((m, n), c.conj())))
}

/// The position observable (a + a*)/sqrt(2).
pub fn position_element() -> NormalOrderedElement {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    NormalOrderedElement::from_coeffs([((0, 1), r), ((1, 0), r)])
}

/// The momentum observable i (a* - a)/sqrt(2).
pub fn momentum_element() -> NormalOrderedElement {
    let r = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    NormalOrderedElement::from_coeffs([((1, 0), r), ((0, 1), -r)])
}

/// ((a + a*)/sqrt(2))^k in normal order.
pub fn position_power(k: u32) -> NormalOrderedElement {
    let mut out = NormalOrderedElement::identity();
    let q = position_element();
    for _ in 0..k {
        out = normal_product(&out, &q);
    }
    out
}

/// Vacuum expectation of b* x b: after normal ordering only the (0,0)
/// coefficient survives against the vacuum.
pub fn deformed_expectation(
    b: &NormalOrderedElement,
    x: &NormalOrderedElement,
) -> Complex64 {
    let bxb = normal_product(&normal_product(&adjoint(b), x), b);
    bxb.coeffs
        .get(&(0, 0))
        .copied()
        .unwrap_or(Complex64::new(0.0, 0.0))
}

/// A vector over Fock levels 0..=N.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    components: Vec<Complex64>,
}

impl Serialize for FockVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<(f64, f64)> = self.components.iter().map(|c| (c.re, c.im)).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FockVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(f64, f64)> = Vec::deserialize(d)?;
        Ok(FockVector::new(
            pairs.into_iter().map(|(re, im)| Complex64::new(re, im)).collect(),
        ))
    }
}

impl FockVector {
    pub fn new(components: Vec<Complex64>) -> Self {
        FockVector { components }
    }

    pub fn from_dvector(v: &DVector<Complex64>) -> Self {
        FockVector { components: v.iter().copied().collect() }
    }

    pub fn vacuum(dim: usize) -> Self {
        let mut components = vec![Complex64::new(0.0, 0.0); dim.max(1)];
        components[0] = Complex64::new(1.0, 0.0);
        FockVector { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    pub fn as_dvector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(&self.components)
    }

    pub fn norm_squared(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// A finite-rank representative: an element realized on Fock levels 0..=N.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedRep {
    pub dim: usize,
    pub matrix: DMatrix<Complex64>,
}

impl TruncatedRep {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        Ok(TruncatedRep { dim: matrix.nrows(), matrix })
    }
}

/// Matrix elements of an element on Fock levels 0..=N, from the ladder
/// actions a ψ_k = sqrt(k) ψ_{k-1} and a* ψ_k = sqrt(k+1) ψ_{k+1}.
///
/// `N` must dominate the degree of `x`; rows affected by the cut are the
/// top `degree` ones.
pub fn gns_matrix(x: &NormalOrderedElement, truncation: usize) -> Result<TruncatedRep> {
    let deg = x.degree() as usize;
    if truncation < deg {
        return Err(Error::TruncationTooSmall { required: deg, given: truncation });
    }
    let dim = truncation + 1;
    let mut mat = DMatrix::from_element(dim, dim, Complex64::new(0.0, 0.0));
    for ((n, m), c) in x.coeffs() {
        let (n, m) = (n as usize, m as usize);
        for k in m..dim {
            let target = k - m + n;
            if target >= dim {
                continue;
            }
            // a^m lowers k -> k-m with sqrt(k (k-1) ... (k-m+1)),
            // a*^n raises k-m -> k-m+n with sqrt((k-m+1) ... (k-m+n))
            let mut prod = 1.0f64;
            for i in 0..m {
                prod *= (k - i) as f64;
            }
            for i in 1..=n {
                prod *= (k - m + i) as f64;
            }
            mat[(target, k)] += c * prod.sqrt();
        }
    }
    TruncatedRep::new(mat)
}

/// The deformed vector π(b) applied to the vacuum, at truncation `N`.
pub fn deformed_vector(b: &NormalOrderedElement, truncation: usize) -> Result<FockVector> {
    let rep = gns_matrix(b, truncation)?;
    let e0 = FockVector::vacuum(truncation + 1).as_dvector();
    Ok(FockVector::from_dvector(&(&rep.matrix * e0)))
}

/// The smallest truncation making {ω_b(x^n)}_{n<=K} exact: the orbit of
/// π(b)ψ_0 under K applications of x stays strictly below the cut.
pub fn exactness_truncation(
    x: &NormalOrderedElement,
    b: &NormalOrderedElement,
    max_index: usize,
) -> usize {
    x.degree() as usize * max_index + b.degree() as usize
}

/// A deformed moment sequence together with an exactness flag: `exact` is
/// false when a user-chosen truncation is too low to contain the whole
/// orbit, so the top moments are those of the cut operator instead.
#[derive(Debug, Clone)]
pub struct DeformedMoments {
    pub sequence: MomentSequence,
    pub exact: bool,
}

/// Moments {ω_b(x^n)}_{n=0..=K} computed through matrix powers at the
/// exactness truncation N = degree(x) K + degree(b).
///
/// A singular deformation (π(b) annihilates the vacuum) produces the
/// all-zero sequence: the zero measure is the only solution there.
pub fn deformed_moment_sequence(
    x: &NormalOrderedElement,
    b: &NormalOrderedElement,
    max_index: usize,
) -> Result<MomentSequence> {
    let out = deformed_moment_sequence_at(x, b, max_index, exactness_truncation(x, b, max_index))?;
    Ok(out.sequence)
}

/// As [`deformed_moment_sequence`] but at a caller-chosen truncation;
/// the result is flagged when the truncation makes it inexact.
pub fn deformed_moment_sequence_at(
    x: &NormalOrderedElement,
    b: &NormalOrderedElement,
    max_index: usize,
    truncation: usize,
) -> Result<DeformedMoments> {
    if !x.is_hermitian(1e-12 * x.max_coeff().max(1.0)) {
        return Err(Error::NotHermitian(
            "moment sequences need an adjoint-invariant observable".into(),
        ));
    }
    if max_index < 2 {
        return Err(Error::InvalidInput("need K >= 2".into()));
    }
    let exact = truncation >= exactness_truncation(x, b, max_index);
    let psi_b = deformed_vector(b, truncation)?;
    if psi_b.norm_squared() == 0.0 {
        return Ok(DeformedMoments {
            sequence: MomentSequence::zero(MomentKind::Hamburger, max_index),
            exact,
        });
    }
    let rep = gns_matrix(x, truncation)?;
    let base = psi_b.as_dvector();
    let mut current = base.clone();
    let mut values = Vec::with_capacity(max_index + 1);
    for n in 0..=max_index {
        if n > 0 {
            current = &rep.matrix * current;
        }
        let s = base.dotc(&current);
        values.push(s.re);
    }
    Ok(DeformedMoments {
        sequence: MomentSequence::new(MomentKind::Hamburger, values)?,
        exact,
    })
}

/// The n-th moment of the k-th position power in the ground state, computed
/// by adaptive quadrature of pi^{-1/2} x^{kn} e^{-x^2}.
///
/// This is the independent oracle for the algebraic pipeline; it never
/// touches the Fock-space code path. Odd kn vanishes by symmetry; a moment
/// beyond the double-precision range saturates to infinity.
pub fn gaussian_q_moment_oracle(k: u32, n: u32) -> f64 {
    let kn = k * n;
    if kn % 2 == 1 {
        return 0.0; // odd integrand over the symmetric line
    }
    // log-domain integrand keeps x^{kn} from overflowing under the peak
    let integrand = move |x: f64| {
        if kn == 0 {
            (-x * x).exp()
        } else if x <= 0.0 {
            0.0
        } else {
            (kn as f64 * x.ln() - x * x).exp()
        }
    };
    let cut = (2.0 * kn as f64).sqrt().max(8.0) + 30.0;
    match quadrature::integrate(&integrand, 0.0, cut, 1e-280, 5e-14) {
        Ok(half) => 2.0 * half / std::f64::consts::PI.sqrt(),
        Err(_) => f64::INFINITY,
    }
}

/// Parse the symbolic element shorthand used by the command line:
/// juxtaposed factors Q, P, I, A, A*, each optionally powered, e.g.
/// "Q^4", "A*A", "QP".
pub fn parse_element(input: &str) -> Result<NormalOrderedElement> {
    let s: Vec<char> = input.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::InvalidInput("empty element expression".into()));
    }
    let mut out = NormalOrderedElement::identity();
    let mut i = 0;
    while i < s.len() {
        let base = match s[i] {
            'Q' | 'q' => position_element(),
            'P' | 'p' => momentum_element(),
            'I' | '1' => NormalOrderedElement::identity(),
            'A' | 'a' => {
                if i + 1 < s.len() && s[i + 1] == '*' {
                    i += 1;
                    NormalOrderedElement::creation()
                } else {
                    NormalOrderedElement::annihilation()
                }
            }
            other => {
                return Err(Error::InvalidInput(format!(
                    "unexpected symbol {other:?} in element expression"
                )))
            }
        };
        i += 1;
        let mut power = 1u32;
        if i < s.len() && s[i] == '^' {
            i += 1;
            let start = i;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
            power = s[start..i]
                .iter()
                .collect::<String>()
                .parse()
                .map_err(|_| Error::InvalidInput("malformed exponent".into()))?;
        }
        for _ in 0..power {
            out = normal_product(&out, &base);
        }
    }
    Ok(out)
}
