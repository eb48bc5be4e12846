//! Numerical certification of the arctangent identities behind the two
//! decompositions of Scherk's surface.
//!
//! Value comparisons of multivalued quantities are reconciled modulo their jump
//! quantum (`pi` for bare arctangents, `pi / cos(beta)` for the finite
//! decomposition); gradients are single valued and compared exactly.
//!
//! The infinite helicoid superposition carries one `-pi/2` per term, which sums
//! to an infinite constant. It is checked in difference form: subtracting the
//! same partial sum at a reference point cancels every constant and leaves a
//! series that converges like `1/N` under symmetric pairing.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{distance_to_lattice, CompensatedSum};
use crate::surface::{GrainAngle, Gradient, Point, Scherk};

/// `(a, b)` with `b` away from the cotangent poles `k pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityPoint {
    a: f64,
    b: f64,
}

fn is_multiple_of_pi(b: f64) -> bool {
    distance_to_lattice(b, PI) <= 4.0 * f64::EPSILON * b.abs().max(1.0)
}

impl IdentityPoint {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("identity point ({a}, {b}) is not finite")));
        }
        if is_multiple_of_pi(b) {
            return Err(Error::PoleAtB(b));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Complex argument `re + i im`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexPoint {
    pub re: f64,
    pub im: f64,
}

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesReport {
    /// `k = 0` term plus the pairs `k = +-1 .. +-pairs`.
    pub value: f64,
    pub pairs: u64,
    /// Upper bound on `|value - limit|`.
    pub tail_bound: f64,
    pub converged: bool,
}

/// Order `n`, the outer half-angle `beta` and the inner one with
/// `sin(beta) = n sin(beta_tilde)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecompositionSpec {
    n: u32,
    beta: f64,
    beta_tilde: f64,
}

impl DecompositionSpec {
    pub fn new(n: u32, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("decomposition order must be at least 1".into()));
        }
        if !(beta > 0.0 && beta < 0.5 * PI) {
            return Err(Error::InvalidParameter(format!("beta = {beta} outside (0, pi/2)")));
        }
        let beta_tilde = if n == 1 { beta } else { (beta.sin() / n as f64).asin() };
        Ok(Self { n, beta, beta_tilde })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn beta_tilde(&self) -> f64 {
        self.beta_tilde
    }

    /// Prefactor `cos(beta_tilde) / cos(beta)` of the sub-surfaces.
    pub fn weight(&self) -> f64 {
        self.beta_tilde.cos() / self.beta.cos()
    }

    /// Jump quantum of the left side, `pi (cos bt / cos b) sec bt = pi / cos b`.
    pub fn jump_quantum(&self) -> f64 {
        PI * self.weight() / self.beta_tilde.cos()
    }

    /// y-shift between consecutive sub-surfaces, `pi csc(beta_tilde) / n`.
    pub fn offset(&self, m: u32) -> f64 {
        m as f64 * PI / (self.n as f64 * self.beta_tilde.sin())
    }

    /// Scherk surface of angle `2 beta` used on the left side.
    pub fn outer(&self) -> Scherk {
        Scherk::new(GrainAngle::new(2.0 * self.beta).expect("2 beta in (0, pi)"))
    }

    /// Scherk surface of angle `2 beta_tilde` used for every sub-surface.
    pub fn inner(&self) -> Scherk {
        Scherk::new(GrainAngle::new(2.0 * self.beta_tilde).expect("2 beta_tilde in (0, pi)"))
    }

    /// Whether `p` lies in the central cell `|y sin(beta_tilde)| < pi / (2 n)`.
    pub fn in_central_cell(&self, p: Point) -> bool {
        (p.y * self.beta_tilde.sin()).abs() < PI / (2.0 * self.n as f64)
    }
}

/// `atan(tanh(a) cot(b))`, principal value.
pub fn ramanujan_lhs(q: IdentityPoint) -> f64 {
    let (s, c) = q.b.sin_cos();
    (q.a.tanh() * c / s).atan()
}

/// `atan(a / (b + k pi)) + atan(a / (b - k pi))` for `k >= 1`.
fn ramanujan_pair(a: f64, b: f64, k: u64) -> f64 {
    let kp = k as f64 * PI;
    let (plus, minus) = (b + kp, b - kp);
    let x = a / plus;
    let y = a / minus;
    if x * y < 1.0 {
        // atan x + atan y = atan((x + y) / (1 - x y)) on this branch; the sum
        // x + y = 2ab / ((b + k pi)(b - k pi)) is formed without cancellation.
        let num = 2.0 * a * b / (plus * minus);
        (num / (1.0 - x * y)).atan()
    } else {
        x.atan() + y.atan()
    }
}

/// Bound on the symmetric-pair tail `sum_{k > pairs} P_k`.
///
/// For `k pi >= 2|b|`, `|b +- k pi| >= k pi / 2`, so each pair obeys
/// `|P_k| <= |x + y| + (|x|^3 + |y|^3) / 3` with
/// `|x + y| <= (8/3) |a b| / (k pi)^2` and `|x|, |y| <= 2|a| / (k pi)`.
/// Summing with `sum_{k>M} k^-2 <= 1/M` and `sum_{k>M} k^-3 <= 1/(2 M^2)` gives
/// `8|ab| / (3 pi^2 M) + 8|a|^3 / (3 pi^3 M^2)`; the few pairs with
/// `k pi < 2|b|` beyond `pairs` are bounded by `pi` each.
pub fn ramanujan_tail_bound(q: IdentityPoint, pairs: u64) -> f64 {
    let (a, b) = (q.a.abs(), q.b.abs());
    if a == 0.0 {
        return 0.0;
    }
    // smallest M with (M + 1) pi >= 2|b|
    let threshold = (2.0 * b / PI - 1.0).ceil().max(0.0) as u64;
    let m = pairs.max(threshold).max(1);
    let mf = m as f64;
    PI * (m - pairs) as f64
        + 8.0 * a * b / (3.0 * PI * PI * mf)
        + 8.0 * a * a * a / (3.0 * PI * PI * PI * mf * mf)
}

/// Symmetric partial sum of `sum_k atan(a / (b + k pi))`.
pub fn ramanujan_partial_sum(q: IdentityPoint, pairs: u64, tolerance: f64) -> Result<SeriesReport> {
    if pairs == 0 {
        return Err(Error::InvalidParameter("at least one pair is required".into()));
    }
    let mut acc = CompensatedSum::new();
    acc.add((q.a / q.b).atan());
    for k in 1..=pairs {
        acc.add(ramanujan_pair(q.a, q.b, k));
    }
    let tail_bound = ramanujan_tail_bound(q, pairs);
    Ok(SeriesReport { value: acc.value(), pairs, tail_bound, converged: tail_bound <= tolerance })
}

/// Symmetric partial sum of the dilated-helicoid series at `p` minus the same
/// sum at `p_ref`, with the per-term constants cancelled.
pub fn theorem1_partial_difference(p: Point, p_ref: Point, g: GrainAngle, pairs: u64) -> f64 {
    let c = g.cos_half();
    let ell = g.ell();
    let term = |n: f64| -> f64 {
        ((p.y - n * ell) / (p.x * c)).atan() - ((p_ref.y - n * ell) / (p_ref.x * c)).atan()
    };
    let mut acc = CompensatedSum::new();
    acc.add(term(0.0));
    for k in 1..=pairs {
        let n = k as f64;
        acc.add(term(n) + term(-n));
    }
    g.sec_half() * acc.value()
}

/// `|D_N - (h(p) - h(p_ref))|` for the helicoid superposition in difference form.
///
/// Both points must lie in the same open half plane and in the same branch
/// cell `k ell < y < (k + 1) ell`, away from cores.
pub fn theorem1_difference_check(p: Point, p_ref: Point, g: GrainAngle, pairs: u64) -> Result<f64> {
    let ell = g.ell();
    if p.x == 0.0 || p_ref.x == 0.0 || p.x.signum() != p_ref.x.signum() {
        return Err(Error::InvalidPair(format!(
            "points ({}, {}) and ({}, {}) are not in the same open half plane",
            p.x, p.y, p_ref.x, p_ref.y
        )));
    }
    let cell = |y: f64| (y / ell).floor();
    let on_cut = |y: f64| (y / ell).fract() == 0.0;
    if cell(p.y) != cell(p_ref.y) || on_cut(p.y) || on_cut(p_ref.y) {
        return Err(Error::InvalidPair(format!("y = {} and y = {} are not in one branch cell", p.y, p_ref.y)));
    }
    if pairs == 0 {
        return Err(Error::InvalidParameter("at least one pair is required".into()));
    }
    let s = Scherk::new(g);
    if s.core_distance(p) <= s.core_radius() || s.core_distance(p_ref) <= s.core_radius() {
        return Err(Error::InvalidPair("point on a defect core".into()));
    }
    let exact = s.principal(p)? - s.principal(p_ref)?;
    Ok((theorem1_partial_difference(p, p_ref, g, pairs) - exact).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem2Residual {
    /// `|LHS - RHS|` with principal branches everywhere.
    pub exact_error: f64,
    /// Distance from `LHS - RHS` to the nearest multiple of the jump quantum.
    pub mod_constant_error: f64,
    /// Whether `p` is in the central cell, where the exact comparison applies.
    pub central_cell: bool,
}

/// Left side `h(x sec b, y; 2b)` of the finite decomposition.
pub fn theorem2_lhs(p: Point, spec: &DecompositionSpec) -> Result<f64> {
    spec.outer().principal(Point::new(p.x / spec.beta.cos(), p.y))
}

/// Right side `(cos bt / cos b) sum_m h(x sec bt, y + m pi csc(bt) / n; 2 bt)`.
pub fn theorem2_rhs(p: Point, spec: &DecompositionSpec) -> Result<f64> {
    let inner = spec.inner();
    let x = p.x / spec.beta_tilde.cos();
    let mut acc = CompensatedSum::new();
    for m in 0..spec.n {
        acc.add(inner.principal(Point::new(x, p.y + spec.offset(m)))?);
    }
    Ok(spec.weight() * acc.value())
}

pub fn theorem2_residual(p: Point, spec: &DecompositionSpec) -> Result<Theorem2Residual> {
    let diff = theorem2_lhs(p, spec)? - theorem2_rhs(p, spec)?;
    Ok(Theorem2Residual {
        exact_error: diff.abs(),
        mod_constant_error: distance_to_lattice(diff, spec.jump_quantum()),
        central_cell: spec.in_central_cell(p),
    })
}

/// Gradient of the left side by the chain rule.
pub fn theorem2_lhs_gradient(p: Point, spec: &DecompositionSpec) -> Result<Gradient> {
    let sec = 1.0 / spec.beta.cos();
    let g = spec.outer().gradient(Point::new(p.x * sec, p.y))?;
    Ok(Gradient { hx: sec * g.hx, hy: g.hy })
}

/// Gradient of the right side by the chain rule.
pub fn theorem2_rhs_gradient(p: Point, spec: &DecompositionSpec) -> Result<Gradient> {
    let inner = spec.inner();
    let sec = 1.0 / spec.beta_tilde.cos();
    let mut gx = CompensatedSum::new();
    let mut gy = CompensatedSum::new();
    for m in 0..spec.n {
        let g = inner.gradient(Point::new(p.x * sec, p.y + spec.offset(m)))?;
        gx.add(sec * g.hx);
        gy.add(g.hy);
    }
    let w = spec.weight();
    Ok(Gradient { hx: w * gx.value(), hy: w * gy.value() })
}

/// Max-norm distance between the gradients of both sides.
pub fn theorem2_gradient_check(p: Point, spec: &DecompositionSpec) -> Result<f64> {
    let l = theorem2_lhs_gradient(p, spec)?;
    let r = theorem2_rhs_gradient(p, spec)?;
    Ok((l.hx - r.hx).abs().max((l.hy - r.hy).abs()))
}

/// `atan(tanh x / tan y)` against `Im ln sin(y + i x)`, reconciled modulo `pi`.
/// `c.re` holds `y` and `c.im` holds `x`.
pub fn imag_log_sin_check(c: ComplexPoint) -> Result<f64> {
    let (y, x) = (c.re, c.im);
    let s = c.z().sin();
    if s.norm() == 0.0 {
        return Err(Error::LogBranchPoint { y, x });
    }
    let (sy, cy) = y.sin_cos();
    let lhs = (x.tanh() * cy / sy).atan();
    let rhs = s.ln().im;
    Ok(distance_to_lattice(lhs - rhs, PI))
}

/// `|sin(n z) - 2^(n-1) prod_m sin(z + m pi / n)|` relative to `max(|sin(n z)|, 1)`.
pub fn sine_product_check(c: ComplexPoint, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("sine product needs n >= 1".into()));
    }
    let z = c.z();
    let lhs = (z * n as f64).sin();
    let mut prod = Complex64::new(2f64.powi(n as i32 - 1), 0.0);
    for m in 0..n {
        prod *= (z + m as f64 * PI / n as f64).sin();
    }
    Ok((lhs - prod).norm() / lhs.norm().max(1.0))
}

/// `atan(tanh a cot b)` against `sum_m atan(tanh(a/n) cot((b + m pi)/n))`, modulo `pi`.
pub fn sum_of_sums_check(q: IdentityPoint, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("sum of sums needs n >= 1".into()));
    }
    let nf = n as f64;
    let mut acc = CompensatedSum::new();
    for m in 0..n {
        let sub = IdentityPoint::new(q.a / nf, (q.b + m as f64 * PI) / nf)?;
        acc.add(ramanujan_lhs(sub));
    }
    Ok(distance_to_lattice(ramanujan_lhs(q) - acc.value(), PI))
}

/// Max gradient error, max exact value error in the central cell and max
/// reconciled value error elsewhere, over random points in
/// `[-5, 5] x [-2 pi csc(bt), 2 pi csc(bt)]` that avoid the cores.
pub fn theorem2_sampled_errors<R: Rng>(spec: &DecompositionSpec, samples: usize, rng: &mut R) -> Result<(f64, f64, f64)> {
    let y_span = 2.0 * PI / spec.beta_tilde().sin();
    let (mut gradient, mut central, mut elsewhere) = (0.0f64, 0.0f64, 0.0f64);
    let mut taken = 0;
    while taken < samples {
        let p = Point::new(rng.gen_range(-5.0..5.0), rng.gen_range(-y_span..y_span));
        let g = match theorem2_gradient_check(p, spec) {
            Ok(g) => g,
            Err(Error::CorePoint { .. }) => continue,
            Err(e) => return Err(e),
        };
        let r = theorem2_residual(p, spec)?;
        gradient = gradient.max(g);
        if r.central_cell {
            central = central.max(r.exact_error);
        } else {
            elsewhere = elsewhere.max(r.mod_constant_error);
        }
        taken += 1;
    }
    Ok((gradient, central, elsewhere))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn ip(a: f64, b: f64) -> IdentityPoint {
        IdentityPoint::new(a, b).unwrap()
    }

    #[test]
    fn lhs_trivial_and_reference_values() {
        assert_eq!(ramanujan_lhs(ip(0.0, 1.0)), 0.0);
        assert!(ramanujan_lhs(ip(1.0, FRAC_PI_2)).abs() < 1e-16);
        // 60-digit evaluation of atan(tanh(1) cot(1))
        assert!((ramanujan_lhs(ip(1.0, 1.0)) - 0.454_820_233_309_949_9).abs() < 1e-15);
    }

    #[test]
    fn poles_are_rejected() {
        assert!(matches!(IdentityPoint::new(1.0, 0.0), Err(Error::PoleAtB(_))));
        assert!(matches!(IdentityPoint::new(1.0, 3.0 * PI), Err(Error::PoleAtB(_))));
        assert!(IdentityPoint::new(1.0, 3.0 * PI + 1e-9).is_ok());
    }

    #[test]
    fn zero_a_series_vanishes() {
        let r = ramanujan_partial_sum(ip(0.0, 1.0), 17, 1e-12).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.tail_bound, 0.0);
        assert!(r.converged);
    }

    #[test]
    fn partial_sum_within_tail_bound() {
        let q = ip(1.0, 1.0);
        let r = ramanujan_partial_sum(q, 1000, 1e-3).unwrap();
        let err = (r.value - ramanujan_lhs(q)).abs();
        assert!(err <= r.tail_bound, "{err} > {}", r.tail_bound);
        assert!(r.converged);
        assert!(!ramanujan_partial_sum(q, 1000, 1e-5).unwrap().converged);
    }

    #[test]
    fn partial_sum_converges_like_one_over_n() {
        let q = ip(1.0, 1.0);
        let lhs = ramanujan_lhs(q);
        for &n in &[100u64, 200, 400, 800] {
            let e1 = (ramanujan_partial_sum(q, n, 0.0).unwrap().value - lhs).abs();
            let e2 = (ramanujan_partial_sum(q, 2 * n, 0.0).unwrap().value - lhs).abs();
            let ratio = e2 / e1;
            assert!((0.4..=0.6).contains(&ratio), "ratio {ratio} at n = {n}");
        }
    }

    #[test]
    fn tail_bound_is_monotone_and_handles_large_b() {
        let q = ip(2.0, 40.0);
        let mut prev = f64::INFINITY;
        for n in 1..200 {
            let t = ramanujan_tail_bound(q, n);
            assert!(t <= prev);
            prev = t;
        }
        let r = ramanujan_partial_sum(q, 50, 0.0).unwrap();
        assert!((r.value - ramanujan_lhs(q)).abs() <= r.tail_bound);
        assert!(ramanujan_partial_sum(q, 0, 0.0).is_err());
    }

    #[test]
    fn theorem1_identical_points() {
        let g = GrainAngle::new(1.0).unwrap();
        let p = Point::new(1.0, 0.5);
        assert_eq!(theorem1_difference_check(p, p, g, 100).unwrap(), 0.0);
    }

    #[test]
    fn theorem1_converges() {
        let g = GrainAngle::new(1.0).unwrap();
        let (p, r) = (Point::new(1.0, 0.5), Point::new(1.0, 0.1));
        let e1 = theorem1_difference_check(p, r, g, 1000).unwrap();
        let e2 = theorem1_difference_check(p, r, g, 2000).unwrap();
        assert!(e2 <= 1e-3);
        assert!((e2 / e1 - 0.5).abs() < 0.05, "{}", e2 / e1);

        let g = GrainAngle::new(FRAC_PI_2).unwrap();
        let (p, r) = (Point::new(0.5, 1.0), Point::new(2.0, 1.0));
        let errs: Vec<f64> =
            [500, 1000, 2000].iter().map(|&n| theorem1_difference_check(p, r, g, n).unwrap()).collect();
        assert!((errs[1] / errs[0] - 0.5).abs() < 0.05);
        assert!((errs[2] / errs[1] - 0.5).abs() < 0.05);
    }

    #[test]
    fn theorem1_rejects_bad_pairs() {
        let g = GrainAngle::new(1.0).unwrap();
        let ell = g.ell();
        let bad = [
            (Point::new(1.0, 0.5), Point::new(-1.0, 0.5)),
            (Point::new(0.0, 0.5), Point::new(1.0, 0.5)),
            (Point::new(1.0, 0.5), Point::new(1.0, ell + 0.5)),
            (Point::new(1.0, -0.5), Point::new(1.0, 0.5)),
        ];
        for (p, r) in bad {
            assert!(matches!(theorem1_difference_check(p, r, g, 10), Err(Error::InvalidPair(_))));
        }
        // other half plane and other cells are fine on their own
        let e = theorem1_difference_check(Point::new(-1.0, ell + 0.5), Point::new(-2.0, ell + 1.0), g, 2000).unwrap();
        assert!(e < 1e-3);
    }

    #[test]
    fn decomposition_spec() {
        let s = DecompositionSpec::new(2, PI / 3.0).unwrap();
        // 60-digit value of asin(sqrt(3)/4)
        assert!((s.beta_tilde() - 0.447_832_396_928_932_5).abs() < 1e-15);
        assert_eq!(DecompositionSpec::new(1, 0.9).unwrap().beta_tilde(), 0.9);
        assert!(DecompositionSpec::new(0, 0.9).is_err());
        assert!(DecompositionSpec::new(2, FRAC_PI_2).is_err());
        assert!((s.jump_quantum() - PI / (PI / 3.0).cos()).abs() < 1e-14);
    }

    #[test]
    fn theorem2_values() {
        let one = DecompositionSpec::new(1, 0.8).unwrap();
        for &(x, y) in &[(0.3, 0.2), (-2.0, 5.0), (4.0, -3.3)] {
            let r = theorem2_residual(Point::new(x, y), &one).unwrap();
            assert!(r.exact_error <= 1e-14);
            assert!(theorem2_gradient_check(Point::new(x, y), &one).unwrap() <= 1e-14);
        }
        let two = DecompositionSpec::new(2, PI / 3.0).unwrap();
        let r = theorem2_residual(Point::new(0.3, 0.2), &two).unwrap();
        assert!(r.central_cell && r.exact_error <= 1e-12);
        let three = DecompositionSpec::new(3, 1.0).unwrap();
        let r = theorem2_residual(Point::new(1.5, 2.7), &three).unwrap();
        assert!(r.mod_constant_error <= 1e-10);
        let five = DecompositionSpec::new(5, 0.7).unwrap();
        assert!(theorem2_gradient_check(Point::new(2.0, 3.0), &five).unwrap() <= 1e-9);
    }

    #[test]
    fn theorem2_at_core_fails() {
        let two = DecompositionSpec::new(2, 1.0).unwrap();
        assert!(matches!(theorem2_gradient_check(Point::new(0.0, 0.0), &two), Err(Error::CorePoint { .. })));
    }

    #[test]
    fn log_sin_identity() {
        assert!(imag_log_sin_check(ComplexPoint::new(FRAC_PI_2, 0.0)).unwrap() < 1e-16);
        assert!(imag_log_sin_check(ComplexPoint::new(1.0, 1.0)).unwrap() <= 1e-13);
        assert!(imag_log_sin_check(ComplexPoint::new(0.3, -2.0)).unwrap() <= 1e-13);
        assert!(matches!(imag_log_sin_check(ComplexPoint::new(0.0, 0.0)), Err(Error::LogBranchPoint { .. })));
    }

    #[test]
    fn sine_product_identity() {
        assert_eq!(sine_product_check(ComplexPoint::new(0.37, -1.2), 1).unwrap(), 0.0);
        assert!(sine_product_check(ComplexPoint::new(0.7, 0.3), 2).unwrap() <= 1e-13);
        assert!(sine_product_check(ComplexPoint::new(1.2, -0.5), 4).unwrap() <= 1e-12);
        assert!(sine_product_check(ComplexPoint::new(1.2, -0.5), 0).is_err());
    }

    #[test]
    fn sum_of_sums_identity() {
        assert_eq!(sum_of_sums_check(ip(1.3, 0.4), 1).unwrap(), 0.0);
        assert!(sum_of_sums_check(ip(1.0, 1.0), 2).unwrap() <= 1e-12);
        assert!(sum_of_sums_check(ip(0.5, 2.0), 3).unwrap() <= 1e-12);
    }
}
