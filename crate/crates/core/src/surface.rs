//! Scherk's first surface and the helicoid as height functions over the plane.
//!
//! Scherk's surface with rotation angle `alpha` is
//!
//! ```text
//! h(x, y; alpha) = -sec(alpha/2) * atan( tanh(x sin(alpha) / 2) / tan(y sin(alpha/2)) )
//! ```
//!
//! It is periodic in `y` with period `ell = pi / sin(alpha/2)` and carries screw
//! dislocation cores at `(0, k ell)`. The height is multivalued; the principal
//! arctangent is used and other sheets are reached by adding `k pi sec(alpha/2)`.
//! The principal value jumps by that quantum across the lines `y = k ell`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::distance_to_lattice;

/// Distance below which a point counts as sitting on a defect core.
pub const DEFAULT_CORE_RADIUS: f64 = 1e-6;

/// Rotation angle between the two lamellar families, with derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrainAngle {
    alpha: f64,
}

impl GrainAngle {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 && alpha < PI {
            Ok(Self { alpha })
        } else {
            Err(Error::InvalidAngle(alpha))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn half(&self) -> f64 {
        0.5 * self.alpha
    }

    pub fn sin_half(&self) -> f64 {
        self.half().sin()
    }

    pub fn cos_half(&self) -> f64 {
        self.half().cos()
    }

    pub fn tan_half(&self) -> f64 {
        self.half().tan()
    }

    /// `1 / cos(alpha/2)`.
    pub fn sec_half(&self) -> f64 {
        1.0 / self.cos_half()
    }

    /// Defect spacing along `y`: `sin(alpha/2) * ell = pi`.
    pub fn ell(&self) -> f64 {
        PI / self.sin_half()
    }

    /// Jump of the principal height across a branch line, `pi sec(alpha/2)`.
    pub fn jump_quantum(&self) -> f64 {
        PI * self.sec_half()
    }

    /// Area element of the asymptotic planes, `sqrt(1 + tan^2(alpha/2))`.
    pub fn asymptotic_area_element(&self) -> f64 {
        let t = self.tan_half();
        (1.0 + t * t).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(Error::InvalidParameter(format!(
                "rectangle [{x_min}, {x_max}] x [{y_min}, {y_max}] is empty or not finite"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    /// Node `i` of `n` equally spaced nodes along x, endpoints included.
    pub fn x_node(&self, i: usize, n: usize) -> f64 {
        lerp(self.x_min, self.x_max, i, n)
    }

    pub fn y_node(&self, j: usize, n: usize) -> f64 {
        lerp(self.y_min, self.y_max, j, n)
    }
}

fn lerp(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        hi
    } else {
        lo + (hi - lo) * (i as f64) / ((n - 1) as f64)
    }
}

/// Which sheet of the multivalued height to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BranchPolicy {
    #[default]
    Principal,
    Sheet(i64),
}

impl BranchPolicy {
    pub fn sheet_index(&self) -> i64 {
        match *self {
            BranchPolicy::Principal => 0,
            BranchPolicy::Sheet(k) => k,
        }
    }

    /// Offset added to the principal value for a given jump quantum.
    pub fn offset(&self, quantum: f64) -> f64 {
        self.sheet_index() as f64 * quantum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeightSample {
    pub point: Point,
    pub z: f64,
    pub branch: BranchPolicy,
    pub near_core: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gradient {
    pub hx: f64,
    pub hy: f64,
}

impl Gradient {
    pub fn norm_sqr(&self) -> f64 {
        self.hx * self.hx + self.hy * self.hy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Hessian {
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Core {
    pub index: i64,
    pub point: Point,
}

/// Defect cores `(0, k ell)` inside a window, sorted by `k`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CoreSet {
    pub cores: Vec<Core>,
}

impl CoreSet {
    pub fn len(&self) -> usize {
        self.cores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cores.is_empty()
    }
}

/// Scherk's first surface for a fixed grain angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scherk {
    angle: GrainAngle,
    core_radius: f64,
}

/// Shared intermediate quantities of the closed forms.
///
/// With `u = x sin(alpha)/2`, `v = y sin(alpha/2)` and `T = tanh u`, the
/// harmonic function `g(u, v) = atan(T cot v)` has
/// `g_u = sech^2 u sin v cos v / D`, `g_v = -T / D` with
/// `D = sin^2 v + T^2 cos^2 v`; the Scherk height is `-sec(alpha/2) g`.
struct Kernel {
    tanh_u: f64,
    sech2_u: f64,
    sin_v: f64,
    cos_v: f64,
    denom: f64,
}

impl Kernel {
    fn new(angle: &GrainAngle, p: Point) -> Self {
        let u = 0.5 * p.x * angle.alpha().sin();
        let v = p.y * angle.sin_half();
        let tanh_u = u.tanh();
        let sech = 1.0 / u.cosh();
        let (sin_v, cos_v) = v.sin_cos();
        let denom = sin_v * sin_v + tanh_u * tanh_u * cos_v * cos_v;
        Self { tanh_u, sech2_u: sech * sech, sin_v, cos_v, denom }
    }
}

impl Scherk {
    pub fn new(angle: GrainAngle) -> Self {
        Self { angle, core_radius: DEFAULT_CORE_RADIUS }
    }

    pub fn from_alpha(alpha: f64) -> Result<Self> {
        GrainAngle::new(alpha).map(Self::new)
    }

    /// Radius of the disk around each core where derivatives are refused.
    pub fn with_core_radius(mut self, radius: f64) -> Self {
        self.core_radius = radius.max(0.0);
        self
    }

    pub fn angle(&self) -> GrainAngle {
        self.angle
    }

    pub fn core_radius(&self) -> f64 {
        self.core_radius
    }

    /// Index `k` of the nearest core `(0, k ell)` and the distance to it.
    pub fn nearest_core(&self, p: Point) -> (i64, f64) {
        let ell = self.angle.ell();
        let k = (p.y / ell).round();
        (k as i64, p.x.hypot(p.y - k * ell))
    }

    pub fn core_distance(&self, p: Point) -> f64 {
        self.nearest_core(p).1
    }

    /// Principal value; fails only where both arctangent arguments vanish.
    pub fn principal(&self, p: Point) -> Result<f64> {
        let k = Kernel::new(&self.angle, p);
        if k.tanh_u == 0.0 && k.sin_v == 0.0 {
            return Err(Error::CorePoint { x: p.x, y: p.y });
        }
        // tanh(u) cos(v) / sin(v) passes through zero at the poles of tan(v).
        let ratio = k.tanh_u * k.cos_v / k.sin_v;
        Ok(-self.angle.sec_half() * ratio.atan())
    }

    pub fn height(&self, p: Point, branch: BranchPolicy) -> Result<HeightSample> {
        let z = self.principal(p)? + branch.offset(self.angle.jump_quantum());
        Ok(HeightSample { point: p, z, branch, near_core: self.core_distance(p) < self.core_radius })
    }

    fn checked_kernel(&self, p: Point) -> Result<Kernel> {
        let k = Kernel::new(&self.angle, p);
        if k.denom == 0.0 || self.core_distance(p) <= self.core_radius {
            return Err(Error::CorePoint { x: p.x, y: p.y });
        }
        Ok(k)
    }

    /// Closed-form first partials; single valued and continuous across branch lines.
    pub fn gradient(&self, p: Point) -> Result<Gradient> {
        let k = self.checked_kernel(p)?;
        let s = self.angle.sin_half();
        let hx = -s * k.sech2_u * k.sin_v * k.cos_v / k.denom;
        let hy = self.angle.tan_half() * k.tanh_u / k.denom;
        Ok(Gradient { hx, hy })
    }

    /// Closed-form second partials.
    pub fn hessian(&self, p: Point) -> Result<Hessian> {
        let k = self.checked_kernel(p)?;
        let sec = self.angle.sec_half();
        let a = 0.5 * self.angle.alpha().sin();
        let s = self.angle.sin_half();
        let d2 = k.denom * k.denom;
        // g_uu = -g_vv = -2 T sech^2 sin v cos v / D^2
        // g_uv = -sech^2 (sin^2 v - T^2 cos^2 v) / D^2
        let g_uu = -2.0 * k.tanh_u * k.sech2_u * k.sin_v * k.cos_v / d2;
        let g_uv = -k.sech2_u
            * (k.sin_v * k.sin_v - k.tanh_u * k.tanh_u * k.cos_v * k.cos_v)
            / d2;
        Ok(Hessian { hxx: -sec * a * a * g_uu, hxy: -sec * a * s * g_uv, hyy: sec * s * s * g_uu })
    }

    pub fn cores_in_window(&self, window: &Rect) -> CoreSet {
        cores_in_window(&self.angle, window)
    }
}

/// Principal (or sheeted) Scherk height with the default core radius.
pub fn scherk_height(p: Point, g: GrainAngle, b: BranchPolicy) -> Result<HeightSample> {
    Scherk::new(g).height(p, b)
}

pub fn scherk_gradient(p: Point, g: GrainAngle) -> Result<Gradient> {
    Scherk::new(g).gradient(p)
}

pub fn scherk_hessian(p: Point, g: GrainAngle) -> Result<Hessian> {
    Scherk::new(g).hessian(p)
}

/// Cores `(0, k ell)` lying in the closed window.
pub fn cores_in_window(g: &GrainAngle, window: &Rect) -> CoreSet {
    if window.x_min > 0.0 || window.x_max < 0.0 {
        return CoreSet::default();
    }
    let ell = g.ell();
    let first = (window.y_min / ell).ceil() as i64;
    let last = (window.y_max / ell).floor() as i64;
    let cores = (first..=last)
        .map(|k| Core { index: k, point: Point::new(0.0, k as f64 * ell) })
        .filter(|c| window.contains(c.point))
        .collect();
    CoreSet { cores }
}

/// The helicoid `z = angle(x, y) - pi/2`, the `alpha -> 0` limit of Scherk's surface.
///
/// The angle is the full-plane two-argument arctangent; sheets differ by `pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Helicoid {
    core_radius: f64,
}

impl Default for Helicoid {
    fn default() -> Self {
        Self { core_radius: DEFAULT_CORE_RADIUS }
    }
}

impl Helicoid {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_core_radius(mut self, radius: f64) -> Self {
        self.core_radius = radius.max(0.0);
        self
    }

    pub fn core_distance(&self, p: Point) -> f64 {
        p.x.hypot(p.y)
    }

    pub fn principal(&self, p: Point) -> Result<f64> {
        if p.x == 0.0 && p.y == 0.0 {
            return Err(Error::CorePoint { x: p.x, y: p.y });
        }
        Ok(p.y.atan2(p.x) - FRAC_PI_2)
    }

    pub fn height(&self, p: Point, branch: BranchPolicy) -> Result<HeightSample> {
        let z = self.principal(p)? + branch.offset(PI);
        Ok(HeightSample { point: p, z, branch, near_core: self.core_distance(p) < self.core_radius })
    }

    fn guard(&self, p: Point) -> Result<f64> {
        let r2 = p.x * p.x + p.y * p.y;
        if r2 == 0.0 || self.core_distance(p) <= self.core_radius {
            return Err(Error::CorePoint { x: p.x, y: p.y });
        }
        Ok(r2)
    }

    pub fn gradient(&self, p: Point) -> Result<Gradient> {
        let r2 = self.guard(p)?;
        Ok(Gradient { hx: -p.y / r2, hy: p.x / r2 })
    }

    pub fn hessian(&self, p: Point) -> Result<Hessian> {
        let r2 = self.guard(p)?;
        let r4 = r2 * r2;
        let xy = p.x * p.y;
        Ok(Hessian { hxx: 2.0 * xy / r4, hxy: (p.y * p.y - p.x * p.x) / r4, hyy: -2.0 * xy / r4 })
    }
}

pub fn helicoid_height(p: Point, b: BranchPolicy) -> Result<HeightSample> {
    Helicoid::new().height(p, b)
}

/// Distance between the principal Scherk height and the helicoid at `p`.
///
/// The two principal branches are cut along different lines (`y = 0` for
/// Scherk, the negative x axis for the helicoid), so they can disagree by a
/// whole multiple of `pi` in the lower half plane; the difference is
/// reconciled modulo `pi` before taking its magnitude. In the open first
/// quadrant no reconciliation ever applies.
pub fn helicoid_limit_error(p: Point, g: GrainAngle) -> Result<f64> {
    if p.x == 0.0 {
        return Err(Error::InvalidParameter("helicoid limit is checked off the line x = 0".into()));
    }
    let scherk = Scherk::new(g).principal(p)?;
    let helicoid = Helicoid::new().principal(p)?;
    Ok(distance_to_lattice(scherk - helicoid, PI))
}
