//! Area-excess energy of periodic height functions on a finite window.
//!
//! The functional is
//!
//! ```text
//! E = integral over [-L, L] x [0, P] of ( sqrt(1 + |grad h|^2) - W_inf ) dx dy
//! ```
//!
//! where `P` is the period in `y` and `W_inf` the area element of the
//! asymptotic planes. Its Euler-Lagrange equation is the minimal-surface
//! equation, so Scherk's surface is a critical point.
//!
//! Two singular sets are handled explicitly. Near each core the integrand grows
//! like `1/r`; a smooth partition of unity hands a disk of radius `rho` around
//! each core to a polar patch whose radial map `r = rho s^3` absorbs the
//! singularity. Along `x = 0` the deformed heights carry `|x|^(gamma-1)` and
//! `ln|x|` factors; the x-nodes are graded by a map whose Jacobian vanishes to
//! fourth order there, and the patch angle is graded the same way around the
//! `x = 0` directions.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::identity::DecompositionSpec;
use crate::numeric::{compensated_sum, gauss_legendre, simpson_weights};
use crate::surface::{GrainAngle, Gradient, Point, Scherk};

/// Height function prepared for energy quadrature.
pub trait EnergySurface: Sync {
    fn gradient(&self, p: Point) -> Result<Gradient>;

    /// Period in `y`; the quadrature window spans exactly one period.
    fn period(&self) -> f64;

    /// Singular points with `0 <= y < period`.
    fn cores(&self) -> Vec<Point>;

    fn asymptotic_area_element(&self) -> f64;
}

fn energy_scherk(angle: GrainAngle) -> Scherk {
    Scherk::new(angle).with_core_radius(0.0)
}

impl EnergySurface for Scherk {
    fn gradient(&self, p: Point) -> Result<Gradient> {
        Scherk::gradient(self, p)
    }

    fn period(&self) -> f64 {
        self.angle().ell()
    }

    fn cores(&self) -> Vec<Point> {
        vec![Point::new(0.0, 0.0)]
    }

    fn asymptotic_area_element(&self) -> f64 {
        self.angle().asymptotic_area_element()
    }
}

/// Plane `z = y tan(alpha/2) + c` over one Scherk period.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticPlane {
    pub angle: GrainAngle,
    pub offset: f64,
}

impl EnergySurface for AsymptoticPlane {
    fn gradient(&self, _p: Point) -> Result<Gradient> {
        Ok(Gradient { hx: 0.0, hy: self.angle.tan_half() })
    }

    fn period(&self) -> f64 {
        self.angle.ell()
    }

    fn cores(&self) -> Vec<Point> {
        Vec::new()
    }

    fn asymptotic_area_element(&self) -> f64 {
        self.angle.asymptotic_area_element()
    }
}

/// `h(sgn(x) |x|^gamma, y; alpha)`.
#[derive(Debug, Clone, Copy)]
pub struct GammaDeformation {
    scherk: Scherk,
    gamma: f64,
}

impl GammaDeformation {
    pub fn new(angle: GrainAngle, gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
        }
        Ok(Self { scherk: energy_scherk(angle), gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn height(&self, p: Point) -> Result<f64> {
        self.scherk.principal(Point::new(self.warp(p.x), p.y))
    }

    fn warp(&self, x: f64) -> f64 {
        if self.gamma == 1.0 {
            x
        } else {
            x.signum() * x.abs().powf(self.gamma)
        }
    }
}

impl EnergySurface for GammaDeformation {
    fn gradient(&self, p: Point) -> Result<Gradient> {
        let g = self.scherk.gradient(Point::new(self.warp(p.x), p.y))?;
        if self.gamma == 1.0 {
            return Ok(g);
        }
        let dx = self.gamma * p.x.abs().powf(self.gamma - 1.0);
        Ok(Gradient { hx: g.hx * dx, hy: g.hy })
    }

    fn period(&self) -> f64 {
        self.scherk.period()
    }

    fn cores(&self) -> Vec<Point> {
        self.scherk.cores()
    }

    fn asymptotic_area_element(&self) -> f64 {
        self.scherk.asymptotic_area_element()
    }
}

/// `h(x sec(beta), y; 2 beta)`, the left side of the finite decomposition.
#[derive(Debug, Clone, Copy)]
pub struct DilatedScherk {
    scherk: Scherk,
    sec: f64,
}

impl DilatedScherk {
    pub fn new(spec: &DecompositionSpec) -> Self {
        Self { scherk: energy_scherk(spec.outer().angle()), sec: 1.0 / spec.beta().cos() }
    }
}

impl EnergySurface for DilatedScherk {
    fn gradient(&self, p: Point) -> Result<Gradient> {
        let g = self.scherk.gradient(Point::new(p.x * self.sec, p.y))?;
        Ok(Gradient { hx: self.sec * g.hx, hy: g.hy })
    }

    fn period(&self) -> f64 {
        self.scherk.period()
    }

    fn cores(&self) -> Vec<Point> {
        self.scherk.cores()
    }

    fn asymptotic_area_element(&self) -> f64 {
        let t = self.scherk.angle().tan_half();
        (1.0 + t * t).sqrt()
    }
}

/// Two interleaved families of the `n = 2` decomposition, the second one
/// displaced by `delta` along `y`.
#[derive(Debug, Clone, Copy)]
pub struct DefectShift {
    inner: Scherk,
    weight: f64,
    sec: f64,
    shift: f64,
    delta: f64,
    beta: f64,
}

impl DefectShift {
    pub fn new(spec: &DecompositionSpec, delta: f64) -> Result<Self> {
        if spec.n() != 2 {
            return Err(Error::InvalidParameter(format!("defect shift needs n = 2, got {}", spec.n())));
        }
        if !delta.is_finite() {
            return Err(Error::InvalidParameter("delta must be finite".into()));
        }
        Ok(Self {
            inner: energy_scherk(spec.inner().angle()),
            weight: spec.weight(),
            sec: 1.0 / spec.beta_tilde().cos(),
            shift: spec.offset(1) + delta,
            delta,
            beta: spec.beta(),
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl EnergySurface for DefectShift {
    fn gradient(&self, p: Point) -> Result<Gradient> {
        let x = p.x * self.sec;
        let a = self.inner.gradient(Point::new(x, p.y))?;
        let b = self.inner.gradient(Point::new(x, p.y + self.shift))?;
        Ok(Gradient { hx: self.weight * self.sec * (a.hx + b.hx), hy: self.weight * (a.hy + b.hy) })
    }

    /// Period of one sub-family; twice the unshifted period.
    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn cores(&self) -> Vec<Point> {
        let p = self.period();
        vec![Point::new(0.0, 0.0), Point::new(0.0, (-self.shift).rem_euclid(p))]
    }

    fn asymptotic_area_element(&self) -> f64 {
        let t = self.beta.tan();
        (1.0 + t * t).sqrt()
    }
}

/// Window half-width `L` and Simpson node counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    half_width: f64,
    nx: usize,
    ny: usize,
}

impl QuadratureSpec {
    pub fn new(half_width: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParameter(format!("half width {half_width} must be positive")));
        }
        for n in [nx, ny] {
            if n < 3 || n % 2 == 0 {
                return Err(Error::InvalidParameter(format!("node count {n} must be odd and >= 3")));
            }
        }
        Ok(Self { half_width, nx, ny })
    }

    pub fn square(half_width: f64, n: usize) -> Result<Self> {
        Self::new(half_width, n, n)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }
}

const PATCH_MAX_RADIUS: f64 = 2.0;
const PATCH_RADIAL_NODES: usize = 80;
const PATCH_ANGULAR_NODES: usize = 256;
const BUMP_PLATEAU: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AreaExcess {
    pub energy: f64,
    /// Contribution of the Cartesian grid, cores removed by the partition of unity.
    pub cartesian: f64,
    /// Contribution of the polar patches around the cores.
    pub core_patch: f64,
    pub patch_radius: f64,
    pub cores: usize,
}

/// Smooth cut-off: 1 for `r <= 0.2 rho`, 0 for `r >= rho`.
fn bump(r: f64, rho: f64) -> f64 {
    let q = r / rho;
    if q <= BUMP_PLATEAU {
        return 1.0;
    }
    if q >= 1.0 {
        return 0.0;
    }
    let f = |t: f64| (-1.0 / t).exp();
    let a = f(1.0 - q);
    let b = f(q - BUMP_PLATEAU);
    a / (a + b)
}

/// `psi(t) = t - 4 sin(pi t) / (3 pi) + sin(2 pi t) / (6 pi)` and its derivative
/// `(2/3)(1 - cos(pi t))^2`.
fn graded_node(t: f64) -> (f64, f64) {
    let psi = t - 4.0 / (3.0 * PI) * (PI * t).sin() + (2.0 * PI * t).sin() / (6.0 * PI);
    let c = 1.0 - (PI * t).cos();
    (psi, 2.0 / 3.0 * c * c)
}

fn patch_radius(cores: &[Point], period: f64, half_width: f64) -> f64 {
    let mut sep = period;
    for (i, a) in cores.iter().enumerate() {
        for b in &cores[i + 1..] {
            let d = (a.y - b.y).abs();
            sep = sep.min(d).min(period - d);
        }
    }
    PATCH_MAX_RADIUS.min(0.4 * sep).min(0.5 * half_width)
}

fn integrand(h: &dyn EnergySurface, p: Point, w_inf: f64) -> Result<f64> {
    let g = h.gradient(p)?;
    let v = (1.0 + g.hx * g.hx + g.hy * g.hy).sqrt() - w_inf;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteEnergy { x: p.x, y: p.y })
    }
}

fn as_energy_error(p: Point) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::CorePoint { .. } | Error::DerivativeUnavailable { .. } => Error::NonFiniteEnergy { x: p.x, y: p.y },
        other => other,
    }
}

/// Area excess of `h` over `[-L, L] x [0, P]`.
///
/// The result is bit-identical for any thread count: every row is reduced in a
/// fixed order and rows are combined in index order.
pub fn area_excess(h: &dyn EnergySurface, q: &QuadratureSpec) -> Result<AreaExcess> {
    let period = h.period();
    let w_inf = h.asymptotic_area_element();
    let cores = h.cores();
    let l = q.half_width;
    let rho = patch_radius(&cores, period, l);

    let (nx, ny) = (q.nx, q.ny);
    let wt = simpson_weights(nx, 2.0 / (nx - 1) as f64);
    let wy = simpson_weights(ny, period / (ny - 1) as f64);
    let y_nodes: Vec<f64> = (0..ny)
        .map(|j| if j == ny - 1 { period } else { period * j as f64 / (ny - 1) as f64 })
        .collect();

    let chi = |p: Point| -> f64 {
        let mut s = 0.0;
        for c in &cores {
            for k in -1..=1 {
                s += bump(p.x.hypot(p.y - c.y - k as f64 * period), rho);
            }
        }
        s
    };

    let rows: Vec<f64> = (0..nx)
        .into_par_iter()
        .map(|i| -> Result<f64> {
            let t = if i == nx - 1 { 1.0 } else { -1.0 + 2.0 * i as f64 / (nx - 1) as f64 };
            let (psi, dpsi) = graded_node(t);
            if dpsi == 0.0 {
                return Ok(0.0);
            }
            let x = l * psi;
            let mut acc = Vec::with_capacity(ny);
            for (j, &y) in y_nodes.iter().enumerate() {
                let p = Point::new(x, y);
                let c = chi(p);
                if c >= 1.0 {
                    continue;
                }
                let f = integrand(h, p, w_inf).map_err(as_energy_error(p))?;
                acc.push(wy[j] * f * (1.0 - c));
            }
            Ok(wt[i] * l * dpsi * compensated_sum(acc))
        })
        .collect::<Result<Vec<f64>>>()?;
    let cartesian = compensated_sum(rows);

    let core_patch = if cores.is_empty() {
        0.0
    } else {
        let (s_nodes, s_weights) = gauss_legendre(PATCH_RADIAL_NODES);
        let m = PATCH_ANGULAR_NODES;
        let angles: Vec<(f64, f64)> = (0..m)
            .map(|j| {
                let phi = 2.0 * PI * (j as f64 + 0.5) / m as f64;
                let theta = FRAC_PI_2 + phi - 2.0 / 3.0 * (2.0 * phi).sin() + (4.0 * phi).sin() / 12.0;
                let dtheta = 8.0 / 3.0 * phi.sin().powi(4) * 2.0 * PI / m as f64;
                (theta, dtheta)
            })
            .collect();
        let mut per_core = Vec::with_capacity(cores.len());
        for c in &cores {
            let radial: Vec<f64> = (0..PATCH_RADIAL_NODES)
                .into_par_iter()
                .map(|k| -> Result<f64> {
                    let s = 0.5 * (s_nodes[k] + 1.0);
                    let ws = 0.5 * s_weights[k];
                    let r = rho * s * s * s;
                    let dr = 3.0 * rho * s * s * ws;
                    let b = bump(r, rho);
                    let mut acc = Vec::with_capacity(m);
                    for &(theta, dtheta) in &angles {
                        let p = Point::new(r * theta.cos(), c.y + r * theta.sin());
                        let f = integrand(h, p, w_inf).map_err(as_energy_error(p))?;
                        acc.push(f * dtheta);
                    }
                    Ok(dr * r * b * compensated_sum(acc))
                })
                .collect::<Result<Vec<f64>>>()?;
            per_core.push(compensated_sum(radial));
        }
        compensated_sum(per_core)
    };

    Ok(AreaExcess { energy: cartesian + core_patch, cartesian, core_patch, patch_radius: rho, cores: cores.len() })
}

/// Step of the central difference at the reference parameter.
pub const DERIVATIVE_STEP: f64 = 1e-3;
const GOLDEN_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyScan {
    pub parameter: String,
    pub values: Vec<f64>,
    pub energies: Vec<f64>,
    pub quadrature: QuadratureSpec,
    /// Golden-section minimizer around the smallest sampled energy.
    pub stationary_estimate: f64,
    /// dE/dparameter at the reference value (1 for gamma, 0 for delta).
    pub derivative_at_reference: f64,
}

fn check_increasing(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter("scan needs at least one value".into()));
    }
    if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("scan values must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Central difference with one Richardson level.
fn central_derivative<F>(f: &F, at: f64, step: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let d = |eta: f64| -> Result<f64> { Ok((f(at + eta)? - f(at - eta)?) / (2.0 * eta)) };
    let (coarse, fine) = rayon::join(|| d(step), || d(0.5 * step));
    Ok((4.0 * fine? - coarse?) / 3.0)
}

fn run_scan<F>(name: &str, values: &[f64], q: &QuadratureSpec, reference: f64, energy: F) -> Result<EnergyScan>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    check_increasing(values)?;
    let energies = values.par_iter().map(|&v| energy(v)).collect::<Result<Vec<f64>>>()?;
    let imin = energies
        .iter()
        .enumerate()
        .fold(0, |best, (i, &e)| if e < energies[best] { i } else { best });
    let stationary_estimate = if imin == 0 || imin + 1 == values.len() {
        values[imin]
    } else {
        try_minimize_1d(&energy, (values[imin - 1], values[imin + 1]), GOLDEN_TOLERANCE)?
    };
    let derivative_at_reference = central_derivative(&energy, reference, DERIVATIVE_STEP)?;
    Ok(EnergyScan {
        parameter: name.to_string(),
        values: values.to_vec(),
        energies,
        quadrature: *q,
        stationary_estimate,
        derivative_at_reference,
    })
}

/// Energy of the gamma-deformed Scherk surface for each gamma.
pub fn gamma_energy_scan(g: GrainAngle, gammas: &[f64], q: &QuadratureSpec) -> Result<EnergyScan> {
    if let Some(bad) = gammas.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(format!("gamma = {bad} must be positive")));
    }
    run_scan("gamma", gammas, q, 1.0, |gamma| Ok(area_excess(&GammaDeformation::new(g, gamma)?, q)?.energy))
}

/// Energy of the `n = 2` configuration with one family shifted by each delta.
pub fn shift_energy_scan(spec: &DecompositionSpec, deltas: &[f64], q: &QuadratureSpec) -> Result<EnergyScan> {
    if spec.n() != 2 {
        return Err(Error::InvalidParameter(format!("shift scan needs n = 2, got {}", spec.n())));
    }
    run_scan("delta", deltas, q, 0.0, |delta| Ok(area_excess(&DefectShift::new(spec, delta)?, q)?.energy))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimizer of `f` on `bracket`, to bracket width `tol`.
pub fn minimize_1d<F: Fn(f64) -> f64>(f: F, bracket: (f64, f64), tol: f64) -> Result<f64> {
    try_minimize_1d(&|x| Ok(f(x)), bracket, tol)
}

/// Golden section for fallible objectives.
///
/// Fails with `BadBracket` when both end values lie below both interior probes.
/// Ties between the probes shrink the bracket to the probes themselves.
pub fn try_minimize_1d<F: Fn(f64) -> Result<f64>>(f: &F, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut a, mut b) = bracket;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::BadBracket { lo: a, hi: b });
    }
    let tol = tol.max(f64::EPSILON * a.abs().max(b.abs()));
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let (fa, fb) = (f(a)?, f(b)?);
    let inner = f1.min(f2);
    if (fa < inner && fb < inner) || !(f1.is_finite() && f2.is_finite()) {
        return Err(Error::BadBracket { lo: a, hi: b });
    }
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1)?;
        } else if f1 > f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2)?;
        } else {
            a = x1;
            b = x2;
            x1 = b - INV_PHI * (b - a);
            x2 = a + INV_PHI * (b - a);
            f1 = f(x1)?;
            f2 = f(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}
