//! Minimal-surface operator, mean curvature and the Born–Infeld residual.
//!
//! Derivatives come from analytic providers when a height function has them;
//! otherwise a fourth-order central stencil with step `1e-3` and one level of
//! Richardson extrapolation is used.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;
use crate::surface::{Gradient, Helicoid, Hessian, Point, Rect, Scherk, DEFAULT_CORE_RADIUS};

/// Base step of the finite-difference fallback.
pub const FD_STEP: f64 = 1e-3;

/// A height `z = h(x, y)`, optionally with analytic derivatives.
///
/// The same abstraction carries space-time fields `phi(x, t)` for the
/// Born–Infeld residual, with `t` stored in `Point::y`.
pub trait HeightFunction: Sync {
    fn value(&self, p: Point) -> Result<f64>;

    fn analytic_gradient(&self, _p: Point) -> Option<Result<Gradient>> {
        None
    }

    fn analytic_hessian(&self, _p: Point) -> Option<Result<Hessian>> {
        None
    }

    /// Distance from `p` to the nearest singular point, if the function has any.
    fn core_distance(&self, _p: Point) -> f64 {
        f64::INFINITY
    }

    /// Offset between neighbouring sheets of a multivalued height (0 if single valued).
    fn sheet_quantum(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DerivativeMethod {
    Analytic,
    FiniteDifference { step: f64 },
}

/// Gradient and Hessian at a point together with how they were obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub gradient: Gradient,
    pub hessian: Hessian,
    pub method: DerivativeMethod,
}

impl HeightFunction for Scherk {
    fn value(&self, p: Point) -> Result<f64> {
        self.principal(p)
    }
    fn analytic_gradient(&self, p: Point) -> Option<Result<Gradient>> {
        Some(self.gradient(p))
    }
    fn analytic_hessian(&self, p: Point) -> Option<Result<Hessian>> {
        Some(self.hessian(p))
    }
    fn core_distance(&self, p: Point) -> f64 {
        Scherk::core_distance(self, p)
    }
    fn sheet_quantum(&self) -> f64 {
        self.angle().jump_quantum()
    }
}

impl HeightFunction for Helicoid {
    fn value(&self, p: Point) -> Result<f64> {
        self.principal(p)
    }
    fn analytic_gradient(&self, p: Point) -> Option<Result<Gradient>> {
        Some(self.gradient(p))
    }
    fn analytic_hessian(&self, p: Point) -> Option<Result<Hessian>> {
        Some(self.hessian(p))
    }
    fn core_distance(&self, p: Point) -> f64 {
        Helicoid::core_distance(self, p)
    }
    fn sheet_quantum(&self) -> f64 {
        std::f64::consts::PI
    }
}

/// Value-only height from a closure; derivatives always come from finite differences.
pub struct FnHeight<F> {
    f: F,
}

impl<F> FnHeight<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F> HeightFunction for FnHeight<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn value(&self, p: Point) -> Result<f64> {
        let v = (self.f)(p.x, p.y);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::DerivativeUnavailable { x: p.x, y: p.y })
        }
    }
}

/// The plane `z = a x + b y + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Plane {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl HeightFunction for Plane {
    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.a * p.x + self.b * p.y + self.c)
    }
    fn analytic_gradient(&self, _p: Point) -> Option<Result<Gradient>> {
        Some(Ok(Gradient { hx: self.a, hy: self.b }))
    }
    fn analytic_hessian(&self, _p: Point) -> Option<Result<Hessian>> {
        Some(Ok(Hessian { hxx: 0.0, hxy: 0.0, hyy: 0.0 }))
    }
}

/// One term of the infinite helicoid superposition: a helicoid centred at
/// `(0, center_y)` with `x` dilated by `cos(alpha/2)` and height scaled by
/// `sec(alpha/2)`. Topologically a screw dislocation, but not minimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilatedHelicoid {
    pub dilation: f64,
    pub scale: f64,
    pub center_y: f64,
}

impl DilatedHelicoid {
    pub fn scherk_term(g: &crate::surface::GrainAngle, n: i64) -> Self {
        Self { dilation: g.cos_half(), scale: g.sec_half(), center_y: n as f64 * g.ell() }
    }

    fn local(&self, p: Point) -> Point {
        Point::new(p.x * self.dilation, p.y - self.center_y)
    }
}

impl HeightFunction for DilatedHelicoid {
    fn value(&self, p: Point) -> Result<f64> {
        Helicoid::new().with_core_radius(0.0).principal(self.local(p)).map(|z| self.scale * z)
    }
    fn analytic_gradient(&self, p: Point) -> Option<Result<Gradient>> {
        let g = Helicoid::new().with_core_radius(0.0).gradient(self.local(p));
        Some(g.map(|g| Gradient { hx: self.scale * self.dilation * g.hx, hy: self.scale * g.hy }))
    }
    fn analytic_hessian(&self, p: Point) -> Option<Result<Hessian>> {
        let h = Helicoid::new().with_core_radius(0.0).hessian(self.local(p));
        let (d, s) = (self.dilation, self.scale);
        Some(h.map(|h| Hessian { hxx: s * d * d * h.hxx, hxy: s * d * h.hxy, hyy: s * h.hyy }))
    }
    fn core_distance(&self, p: Point) -> f64 {
        p.x.hypot(p.y - self.center_y)
    }
}

/// Traveling wave `phi(x, t) = f(x + direction * t)` for a profile with two derivatives.
pub struct TravelingWave {
    profile: Box<dyn Fn(f64) -> [f64; 3] + Send + Sync>,
    direction: f64,
}

impl TravelingWave {
    /// `profile(s)` returns `[f(s), f'(s), f''(s)]`; `direction` is `+1` for
    /// `f(x + t)` and `-1` for `f(x - t)`.
    pub fn new<F>(profile: F, direction: i32) -> Result<Self>
    where
        F: Fn(f64) -> [f64; 3] + Send + Sync + 'static,
    {
        if direction != 1 && direction != -1 {
            return Err(Error::InvalidParameter(format!("direction must be +1 or -1, got {direction}")));
        }
        Ok(Self { profile: Box::new(profile), direction: direction as f64 })
    }

    pub fn sine(direction: i32) -> Result<Self> {
        Self::new(|s| [s.sin(), s.cos(), -s.sin()], direction)
    }

    pub fn tanh(direction: i32) -> Result<Self> {
        Self::new(
            |s| {
                let t = s.tanh();
                let sech2 = 1.0 - t * t;
                [t, sech2, -2.0 * t * sech2]
            },
            direction,
        )
    }

    /// `f(s) = c0 + c1 s + c2 s^2 + c3 s^3`.
    pub fn cubic(c: [f64; 4], direction: i32) -> Result<Self> {
        Self::new(
            move |s| {
                [
                    c[0] + s * (c[1] + s * (c[2] + s * c[3])),
                    c[1] + s * (2.0 * c[2] + 3.0 * s * c[3]),
                    2.0 * c[2] + 6.0 * s * c[3],
                ]
            },
            direction,
        )
    }

    pub fn direction(&self) -> f64 {
        self.direction
    }

    /// `[f, f', f'']` of the profile at `s`.
    pub fn profile(&self, s: f64) -> [f64; 3] {
        (self.profile)(s)
    }

    fn phase(&self, p: Point) -> f64 {
        p.x + self.direction * p.y
    }
}

impl HeightFunction for TravelingWave {
    fn value(&self, p: Point) -> Result<f64> {
        Ok(self.profile(self.phase(p))[0])
    }
    fn analytic_gradient(&self, p: Point) -> Option<Result<Gradient>> {
        let [_, d1, _] = self.profile(self.phase(p));
        Some(Ok(Gradient { hx: d1, hy: self.direction * d1 }))
    }
    fn analytic_hessian(&self, p: Point) -> Option<Result<Hessian>> {
        let [_, _, d2] = self.profile(self.phase(p));
        Some(Ok(Hessian { hxx: d2, hxy: self.direction * d2, hyy: d2 }))
    }
}

const D1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
const D2: [(f64, f64); 5] = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];

fn fd_gradient_at(h: &dyn HeightFunction, p: Point, step: f64) -> Result<Gradient> {
    let mut gx = 0.0;
    let mut gy = 0.0;
    for &(o, c) in &D1 {
        gx += c * h.value(Point::new(p.x + o * step, p.y))?;
        gy += c * h.value(Point::new(p.x, p.y + o * step))?;
    }
    Ok(Gradient { hx: gx / (12.0 * step), hy: gy / (12.0 * step) })
}

fn fd_hessian_at(h: &dyn HeightFunction, p: Point, step: f64) -> Result<Hessian> {
    let mut hxx = 0.0;
    let mut hyy = 0.0;
    for &(o, c) in &D2 {
        hxx += c * h.value(Point::new(p.x + o * step, p.y))?;
        hyy += c * h.value(Point::new(p.x, p.y + o * step))?;
    }
    let mut hxy = 0.0;
    for &(ox, cx) in &D1 {
        for &(oy, cy) in &D1 {
            hxy += cx * cy * h.value(Point::new(p.x + ox * step, p.y + oy * step))?;
        }
    }
    let s2 = step * step;
    Ok(Hessian { hxx: hxx / (12.0 * s2), hxy: hxy / (144.0 * s2), hyy: hyy / (12.0 * s2) })
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (16.0 * fine - coarse) / 15.0
}

/// Fourth-order central-difference gradient at step `step` and `step / 2`,
/// combined by one Richardson level.
pub fn fd_gradient(h: &dyn HeightFunction, p: Point, step: f64) -> Result<Gradient> {
    let c = fd_gradient_at(h, p, step)?;
    let f = fd_gradient_at(h, p, 0.5 * step)?;
    Ok(Gradient { hx: richardson(c.hx, f.hx), hy: richardson(c.hy, f.hy) })
}

pub fn fd_hessian(h: &dyn HeightFunction, p: Point, step: f64) -> Result<Hessian> {
    let c = fd_hessian_at(h, p, step)?;
    let f = fd_hessian_at(h, p, 0.5 * step)?;
    Ok(Hessian {
        hxx: richardson(c.hxx, f.hxx),
        hxy: richardson(c.hxy, f.hxy),
        hyy: richardson(c.hyy, f.hyy),
    })
}

fn unavailable(p: Point) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::CorePoint { .. } | Error::DerivativeUnavailable { .. } => {
            Error::DerivativeUnavailable { x: p.x, y: p.y }
        }
        other => other,
    }
}

pub fn gradient(h: &dyn HeightFunction, p: Point) -> Result<Gradient> {
    match h.analytic_gradient(p) {
        Some(g) => g,
        None => fd_gradient(h, p, FD_STEP),
    }
    .map_err(unavailable(p))
}

/// Gradient and Hessian, analytic where available.
pub fn jet(h: &dyn HeightFunction, p: Point) -> Result<Jet> {
    let map = unavailable(p);
    match (h.analytic_gradient(p), h.analytic_hessian(p)) {
        (Some(g), Some(hs)) => Ok(Jet {
            gradient: g.map_err(&map)?,
            hessian: hs.map_err(&map)?,
            method: DerivativeMethod::Analytic,
        }),
        _ => Ok(Jet {
            gradient: fd_gradient(h, p, FD_STEP).map_err(&map)?,
            hessian: fd_hessian(h, p, FD_STEP).map_err(&map)?,
            method: DerivativeMethod::FiniteDifference { step: FD_STEP },
        }),
    }
}

/// `(1 + hy^2) hxx - 2 hx hy hxy + (1 + hx^2) hyy` from a jet.
pub fn minimal_operator(g: &Gradient, h: &Hessian) -> f64 {
    (1.0 + g.hy * g.hy) * h.hxx - 2.0 * g.hx * g.hy * h.hxy + (1.0 + g.hx * g.hx) * h.hyy
}

pub fn minimal_residual(h: &dyn HeightFunction, p: Point) -> Result<f64> {
    let j = jet(h, p)?;
    Ok(minimal_operator(&j.gradient, &j.hessian))
}

/// Mean curvature `residual / (2 W^3)` with `W = sqrt(1 + |grad h|^2)`.
pub fn mean_curvature(h: &dyn HeightFunction, p: Point) -> Result<f64> {
    let j = jet(h, p)?;
    let w2 = 1.0 + j.gradient.norm_sqr();
    Ok(minimal_operator(&j.gradient, &j.hessian) / (2.0 * w2 * w2.sqrt()))
}

/// Mean curvature from the divergence form `div(grad h / W) / 2`, using a
/// fourth-order central difference of the unit-normal flux with spacing `step`.
pub fn mean_curvature_divergence(h: &dyn HeightFunction, p: Point, step: f64) -> Result<f64> {
    let flux = |q: Point| -> Result<Gradient> {
        let g = gradient(h, q)?;
        let w = (1.0 + g.norm_sqr()).sqrt();
        Ok(Gradient { hx: g.hx / w, hy: g.hy / w })
    };
    let mut div = 0.0;
    for &(o, c) in &D1 {
        div += c * flux(Point::new(p.x + o * step, p.y))?.hx;
        div += c * flux(Point::new(p.x, p.y + o * step))?.hy;
    }
    Ok(0.5 * div / (12.0 * step))
}

/// Residual at one survey node; `None` when the node was excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurveyNode {
    pub point: Point,
    pub residual: Option<f64>,
}

impl SurveyNode {
    pub fn excluded(&self) -> bool {
        self.residual.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub nx: usize,
    pub ny: usize,
    /// Row-major: node `(i, j)` is at index `j * nx + i`.
    pub nodes: Vec<SurveyNode>,
    pub max_abs: f64,
    pub rms: f64,
    pub excluded: usize,
    pub method: DerivativeMethod,
}

/// Minimal-surface residual on an `nx` by `ny` grid, skipping nodes within
/// `exclusion_radius` of a singular point. Skipped nodes stay in the report.
pub fn residual_survey(
    h: &dyn HeightFunction,
    window: &Rect,
    nx: usize,
    ny: usize,
    exclusion_radius: f64,
) -> Result<ResidualReport> {
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidParameter(format!("survey grid {nx}x{ny} needs at least 2x2 nodes")));
    }
    let rows: Vec<Result<Vec<(SurveyNode, Option<DerivativeMethod>)>>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let y = window.y_node(j, ny);
            (0..nx)
                .map(|i| {
                    let p = Point::new(window.x_node(i, nx), y);
                    if h.core_distance(p) <= exclusion_radius {
                        return Ok((SurveyNode { point: p, residual: None }, None));
                    }
                    let j = jet(h, p)?;
                    let r = minimal_operator(&j.gradient, &j.hessian);
                    Ok((SurveyNode { point: p, residual: Some(r) }, Some(j.method)))
                })
                .collect()
        })
        .collect();

    let mut nodes = Vec::with_capacity(nx * ny);
    let mut method = None;
    for row in rows {
        for (node, m) in row? {
            if method.is_none() {
                method = m;
            }
            nodes.push(node);
        }
    }
    let residuals: Vec<f64> = nodes.iter().filter_map(|n| n.residual).collect();
    if residuals.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let max_abs = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let rms = (compensated_sum(residuals.iter().map(|r| r * r)) / residuals.len() as f64).sqrt();
    Ok(ResidualReport {
        nx,
        ny,
        excluded: nodes.len() - residuals.len(),
        nodes,
        max_abs,
        rms,
        method: method.unwrap_or(DerivativeMethod::Analytic),
    })
}

/// Survey with the default core radius.
pub fn residual_survey_default(h: &dyn HeightFunction, window: &Rect, nx: usize, ny: usize) -> Result<ResidualReport> {
    residual_survey(h, window, nx, ny, DEFAULT_CORE_RADIUS)
}

/// Born–Infeld operator `(1 - phi_t^2) phi_xx + 2 phi_x phi_t phi_xt - (1 + phi_x^2) phi_tt`,
/// with the field's `t` carried in `Point::y`.
pub fn born_infeld_residual(phi: &dyn HeightFunction, x: f64, t: f64) -> Result<f64> {
    let j = jet(phi, Point::new(x, t))?;
    let (px, pt) = (j.gradient.hx, j.gradient.hy);
    Ok((1.0 - pt * pt) * j.hessian.hxx + 2.0 * px * pt * j.hessian.hxy - (1.0 + px * px) * j.hessian.hyy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::GrainAngle;

    #[test]
    fn planes_have_zero_residual() {
        let plane = Plane { a: 0.3, b: -1.7, c: 2.0 };
        let p = Point::new(0.4, -2.0);
        assert_eq!(minimal_residual(&plane, p).unwrap(), 0.0);
        assert_eq!(mean_curvature(&plane, p).unwrap(), 0.0);
        // FD fallback on a plane is exact up to rounding, amplified by 1/h^2
        let fd = FnHeight::new(|x, y| 0.3 * x - 1.7 * y + 2.0);
        let r = minimal_residual(&fd, p).unwrap();
        assert!(r.abs() < 1e-7, "{r}");
    }

    #[test]
    fn paraboloid_residual_by_hand() {
        let h = FnHeight::new(|x, y| x * x + y * y);
        for &(x, y) in &[(0.0, 0.0), (0.5, -1.0), (2.0, 0.3)] {
            let r = minimal_residual(&h, Point::new(x, y)).unwrap();
            let expected = 4.0 + 8.0 * x * x + 8.0 * y * y;
            assert!((r - expected).abs() < 1e-7 * expected, "{r} vs {expected}");
        }
        let hc = mean_curvature(&h, Point::new(0.0, 0.0)).unwrap();
        assert!((hc - 2.0).abs() < 1e-8);
    }

    #[test]
    fn scherk_is_minimal_at_a_sample_point() {
        let g = GrainAngle::new(1.0).unwrap();
        let s = Scherk::new(g);
        let r = minimal_residual(&s, Point::new(1.0, g.ell() / 3.0)).unwrap();
        assert!(r.abs() <= 1e-9, "{r}");
        assert!(mean_curvature(&s, Point::new(-2.0, 0.7)).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn divergence_form_agrees_with_operator_form() {
        let h = FnHeight::new(|x: f64, y: f64| x.sin() * y.cosh());
        for &(x, y) in &[(0.3, 0.2), (1.1, -0.4)] {
            let p = Point::new(x, y);
            let a = mean_curvature(&h, p).unwrap();
            let b = mean_curvature_divergence(&h, p, 1e-3).unwrap();
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn core_nodes_are_unavailable() {
        let s = Scherk::from_alpha(1.0).unwrap();
        assert!(matches!(minimal_residual(&s, Point::new(0.0, 0.0)), Err(Error::DerivativeUnavailable { .. })));
        let fd = FnHeight::new(|x: f64, _y: f64| 1.0 / x);
        assert!(matches!(minimal_residual(&fd, Point::new(0.0, 1.0)), Err(Error::DerivativeUnavailable { .. })));
    }

    #[test]
    fn dilated_helicoid_term_is_not_minimal() {
        let g = GrainAngle::new(std::f64::consts::FRAC_PI_2).unwrap();
        let term = DilatedHelicoid::scherk_term(&g, 0);
        let r = minimal_residual(&term, Point::new(1.0, 0.5)).unwrap();
        assert!(r.abs() > 1e-3);
        // analytic provider agrees with finite differences
        let fd = fd_hessian(&term, Point::new(1.0, 0.5), FD_STEP).unwrap();
        let an = term.analytic_hessian(Point::new(1.0, 0.5)).unwrap().unwrap();
        assert!((fd.hxy - an.hxy).abs() < 1e-8);
    }

    #[test]
    fn born_infeld_hand_values() {
        let phi = FnHeight::new(|x, t| x * x + t * t);
        assert!(born_infeld_residual(&phi, 0.0, 0.0).unwrap().abs() < 1e-8);
        assert!((born_infeld_residual(&phi, 1.0, 0.0).unwrap() + 8.0).abs() < 1e-7);
    }

    #[test]
    fn traveling_waves_solve_born_infeld() {
        for dir in [-1, 1] {
            let w = TravelingWave::sine(dir).unwrap();
            for &(x, t) in &[(0.1, 0.2), (-3.0, 1.5), (10.0, -4.0)] {
                assert!(born_infeld_residual(&w, x, t).unwrap().abs() < 1e-12);
            }
            let c = TravelingWave::cubic([0.0, 0.0, 0.0, 1.0], dir).unwrap();
            assert!(born_infeld_residual(&c, 0.3, 0.7).unwrap().abs() < 1e-10);
        }
        assert!(TravelingWave::sine(0).is_err());
    }

    #[test]
    fn survey_counts_excluded_nodes() {
        let g = GrainAngle::new(1.0).unwrap();
        let s = Scherk::new(g);
        let w = Rect::new(-1.0, 1.0, 0.0, g.ell()).unwrap();
        let rep = residual_survey_default(&s, &w, 5, 5).unwrap();
        assert_eq!(rep.nodes.len(), 25);
        assert_eq!(rep.excluded, 2);
        assert!(rep.nodes[2].excluded() && rep.nodes[22].excluded());
        assert!(rep.max_abs >= rep.rms && rep.rms >= 0.0);
        assert_eq!(rep.method, DerivativeMethod::Analytic);
        assert!(matches!(residual_survey(&s, &w, 2, 2, 1e6), Err(Error::EmptyGrid)));
        assert!(residual_survey(&s, &w, 1, 4, 0.0).is_err());
    }
}
