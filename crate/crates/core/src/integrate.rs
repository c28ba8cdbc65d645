//! Quadrature of the Euler density.
//!
//! Two routes:
//!
//! * [`integrate_reduced`]: the one-dimensional oscillator integral
//!   `-(k b / 4) * int_{-q0}^{q0} (E + k q^2/2) / (E - k q^2/2)^2 dq`,
//!   computed by adaptive bisection with a fixed Gauss-Legendre rule.
//! * [`integrate_density_2d`]: midpoint rule over the cells of a uniform grid
//!   whose centers lie in the epsilon-shrunk allowed region.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::geometry::{ConformalSurface, DensityConvention, GeometryError, MechanicalSystem};

/// Evaluation budget of the adaptive 1D integrator.
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;

/// Points of the per-panel Gauss-Legendre rule.
const GAUSS_POINTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integration limit |q0| = {q0} reaches the turning point a = {turning_point}; the integrand is singular there")]
    SingularEndpoint { q0: f64, turning_point: f64 },
    #[error("integrand is not finite at {at}")]
    NonFiniteIntegrand { at: f64 },
    #[error("tolerance {tol} not reached within {evaluations} evaluations (estimated error {estimate})")]
    ToleranceNotReached {
        tol: f64,
        estimate: f64,
        evaluations: usize,
    },
    #[error("integration box does not intersect the allowed region")]
    EmptyRegion,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Value, error estimate, evaluation count and the sequence of
/// intermediate values ordered by increasing resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    /// `(resolution, value)` pairs. For the 1D integrator the resolution is
    /// the panel count, for the grid integrator the cells per axis.
    pub convergence: Vec<(f64, f64)>,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Compensated::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], by
/// Newton iteration on the Legendre polynomial. Nodes are returned exactly
/// antisymmetric.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    // (P_n(x), P_n'(x)) by the three-term recurrence
    let legendre = |x: f64| {
        let (mut p0, mut p1) = (1.0, x);
        for j in 2..=n {
            let jf = j as f64;
            let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
            p0 = p1;
            p1 = p2;
        }
        (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
    };
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        if 2 * i + 1 == n {
            x = 0.0;
        } else {
            for _ in 0..100 {
                let (p, dp) = legendre(x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
        }
        let (_, dp) = legendre(x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new() -> Self {
        let (nodes, weights) = gauss_legendre(GAUSS_POINTS);
        Self { nodes, weights }
    }

    fn apply(&self, f: &impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64, IntegrationError> {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut acc = Compensated::default();
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let x = mid + half * t;
            let y = f(x);
            if !y.is_finite() {
                return Err(IntegrationError::NonFiniteIntegrand { at: x });
            }
            acc.add(w * y);
        }
        Ok(half * acc.value())
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Panel {
    fn fine(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive Gauss-Legendre quadrature of `f` over `[a, b]`.
///
/// Each panel is integrated once whole and once as two halves; the
/// difference is its error estimate. The panel with the largest estimate is
/// bisected until the summed estimate drops to `tol`.
pub fn adaptive_integrate(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
) -> Result<QuadratureResult, IntegrationError> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(IntegrationError::InvalidArgument("limits must be finite".into()));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(IntegrationError::InvalidArgument("tolerance must be positive".into()));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
            convergence: vec![(1.0, 0.0)],
        });
    }
    let rule = Rule::new();
    let make = |a: f64, b: f64, whole: f64| -> Result<Panel, IntegrationError> {
        let m = 0.5 * (a + b);
        let left = rule.apply(&f, a, m)?;
        let right = rule.apply(&f, m, b)?;
        Ok(Panel {
            a,
            b,
            left,
            right,
            error: (whole - (left + right)).abs(),
        })
    };
    let whole = rule.apply(&f, a, b)?;
    let mut evaluations = 3 * GAUSS_POINTS;
    let mut heap = BinaryHeap::new();
    heap.push(make(a, b, whole)?);
    let mut convergence = vec![(1.0, heap.peek().map(Panel::fine).unwrap_or(0.0))];
    let mut next_record = 2;
    let mut finished: Vec<Panel> = Vec::new();

    let total_error = |heap: &BinaryHeap<Panel>, finished: &[Panel]| {
        compensated_sum(heap.iter().chain(finished).map(|p| p.error))
    };

    loop {
        let estimate = total_error(&heap, &finished);
        if estimate <= tol || heap.is_empty() {
            break;
        }
        if evaluations + 4 * GAUSS_POINTS > max_evals {
            return Err(IntegrationError::ToleranceNotReached {
                tol,
                estimate,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is non-empty");
        let m = 0.5 * (worst.a + worst.b);
        if !(worst.a < m && m < worst.b) {
            // Panel can no longer be split in floating point.
            finished.push(worst);
            continue;
        }
        heap.push(make(worst.a, m, worst.left)?);
        heap.push(make(m, worst.b, worst.right)?);
        evaluations += 4 * GAUSS_POINTS;
        let panels = heap.len() + finished.len();
        if panels >= next_record {
            convergence.push((panels as f64, ordered_value(&heap, &finished)));
            next_record *= 2;
        }
    }
    let value = ordered_value(&heap, &finished);
    let panels = heap.len() + finished.len();
    if convergence.last().map(|c| c.0) != Some(panels as f64) {
        convergence.push((panels as f64, value));
    }
    Ok(QuadratureResult {
        value,
        error: total_error(&heap, &finished),
        evaluations,
        convergence,
    })
}

// Sum in order of position so the result does not depend on heap layout.
fn ordered_value(heap: &BinaryHeap<Panel>, finished: &[Panel]) -> f64 {
    let mut panels: Vec<&Panel> = heap.iter().chain(finished).collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    compensated_sum(panels.into_iter().map(Panel::fine))
}

/// `-k b / 4`, the prefactor of the reduced oscillator integral once the
/// transverse direction has contributed `b pi`.
pub fn reduced_prefactor(k: f64, b: f64) -> f64 {
    -k * b / 4.0
}

/// Turning point `a = sqrt(2E/k)`.
pub fn turning_point(k: f64, energy: f64) -> f64 {
    (2.0 * energy / k).sqrt()
}

/// Reduced Euler integral of the `k2 = 0` oscillator between `-q0` and
/// `q0`. Equals `b q0 / (q0^2 - a^2)` exactly.
pub fn integrate_reduced(
    k: f64,
    energy: f64,
    b: f64,
    q0: f64,
    tol: f64,
) -> Result<QuadratureResult, IntegrationError> {
    integrate_reduced_with_prefactor(reduced_prefactor(k, b), k, energy, q0, tol)
}

/// [`integrate_reduced`] with an explicit prefactor in place of `-k b / 4`.
pub fn integrate_reduced_with_prefactor(
    prefactor: f64,
    k: f64,
    energy: f64,
    q0: f64,
    tol: f64,
) -> Result<QuadratureResult, IntegrationError> {
    for (name, v) in [("k", k), ("E", energy)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(IntegrationError::InvalidArgument(format!(
                "{name} must be positive and finite"
            )));
        }
    }
    if !(prefactor.is_finite() && prefactor != 0.0) {
        return Err(IntegrationError::InvalidArgument(
            "prefactor must be finite and non-zero".into(),
        ));
    }
    if !q0.is_finite() {
        return Err(IntegrationError::InvalidArgument("q0 must be finite".into()));
    }
    let a = turning_point(k, energy);
    let half_width = q0.abs();
    if half_width >= a {
        return Err(IntegrationError::SingularEndpoint {
            q0: half_width,
            turning_point: a,
        });
    }
    let integrand = |q: f64| {
        let v = 0.5 * k * q * q;
        let d = energy - v;
        (energy + v) / (d * d)
    };
    let scale = prefactor.abs();
    let raw = adaptive_integrate(integrand, -half_width, half_width, tol / scale, DEFAULT_MAX_EVALS)?;
    // The interval is oriented from -q0 to q0.
    let sign = if q0 < 0.0 { -1.0 } else { 1.0 };
    let factor = sign * prefactor;
    Ok(QuadratureResult {
        value: factor * raw.value,
        error: scale * raw.error,
        evaluations: raw.evaluations,
        convergence: raw
            .convergence
            .into_iter()
            .map(|(r, v)| (r, factor * v))
            .collect(),
    })
}

/// Uniform grid over a box with an allowed-region margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    /// Cells per axis; a power of two, at least 16.
    pub cells: usize,
    pub epsilon: f64,
}

impl GridSpec {
    pub fn new(lo: [f64; 2], hi: [f64; 2], cells: usize, epsilon: f64) -> Result<Self, IntegrationError> {
        let spec = Self {
            lo,
            hi,
            cells,
            epsilon,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Square box `[-half, half]^2`.
    pub fn square(half: f64, cells: usize, epsilon: f64) -> Result<Self, IntegrationError> {
        Self::new([-half, -half], [half, half], cells, epsilon)
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        for axis in 0..2 {
            if !(self.lo[axis].is_finite() && self.hi[axis].is_finite() && self.hi[axis] > self.lo[axis]) {
                return Err(IntegrationError::InvalidArgument(format!(
                    "box axis {} must satisfy lo < hi",
                    axis + 1
                )));
            }
        }
        if self.cells < 16 || !self.cells.is_power_of_two() {
            return Err(IntegrationError::InvalidArgument(
                "cells per axis must be a power of two and at least 16".into(),
            ));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(IntegrationError::InvalidArgument("epsilon must be non-negative".into()));
        }
        Ok(())
    }

    pub fn with_cells(self, cells: usize) -> Self {
        Self { cells, ..self }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    fn steps(&self, cells: usize) -> [f64; 2] {
        [0, 1].map(|a| (self.hi[a] - self.lo[a]) / cells as f64)
    }

    /// Center of cell `(i, j)` at `cells` per axis.
    pub fn center(&self, cells: usize, i: usize, j: usize) -> [f64; 2] {
        let h = self.steps(cells);
        [
            self.lo[0] + (i as f64 + 0.5) * h[0],
            self.lo[1] + (j as f64 + 0.5) * h[1],
        ]
    }
}

/// One cell center of a density field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldCell {
    pub point: [f64; 2],
    pub inside: bool,
    pub phi: Option<f64>,
    pub curvature: Option<f64>,
    pub density: Option<f64>,
}

/// Samples `phi`, `K` and the Laplacian-sign density at every cell center,
/// row by row in `q2` then `q1` order.
pub fn density_field(surface: &ConformalSurface, grid: &GridSpec) -> Result<Vec<FieldCell>, IntegrationError> {
    field_at(surface, grid, grid.cells)
}

fn field_at(surface: &ConformalSurface, grid: &GridSpec, cells: usize) -> Result<Vec<FieldCell>, IntegrationError> {
    let row = |j: usize| -> Result<Vec<FieldCell>, IntegrationError> {
        (0..cells)
            .map(|i| {
                let q = grid.center(cells, i, j);
                if !surface.contains(q, grid.epsilon)? {
                    return Ok(FieldCell {
                        point: q,
                        inside: false,
                        phi: None,
                        curvature: None,
                        density: None,
                    });
                }
                let s = surface.sample(q)?;
                Ok(FieldCell {
                    point: q,
                    inside: true,
                    phi: Some(s.conformal.ln()),
                    curvature: Some(s.curvature),
                    density: Some(s.density),
                })
            })
            .collect()
    };
    let rows: Vec<Result<Vec<FieldCell>, IntegrationError>> = map_rows(cells, row);
    let mut out = Vec::with_capacity(cells * cells);
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn map_rows<T: Send>(rows: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    use rayon::prelude::*;
    (0..rows).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_rows<T>(rows: usize, f: impl Fn(usize) -> T) -> Vec<T> {
    (0..rows).map(f).collect()
}

#[derive(Debug, Clone, Copy)]
struct GridSum {
    value: f64,
    inside: usize,
}

fn midpoint_sum(
    surface: &ConformalSurface,
    grid: &GridSpec,
    cells: usize,
    convention: DensityConvention,
) -> Result<GridSum, IntegrationError> {
    let h = grid.steps(cells);
    let row = |j: usize| -> Result<(f64, usize), IntegrationError> {
        let mut acc = Compensated::default();
        let mut inside = 0;
        for i in 0..cells {
            let q = grid.center(cells, i, j);
            if surface.contains(q, grid.epsilon)? {
                acc.add(surface.density(q, convention)?);
                inside += 1;
            }
        }
        Ok((acc.value(), inside))
    };
    let rows = map_rows(cells, row);
    let mut acc = Compensated::default();
    let mut inside = 0;
    for r in rows {
        let (v, n) = r?;
        acc.add(v);
        inside += n;
    }
    Ok(GridSum {
        value: acc.value() * h[0] * h[1],
        inside,
    })
}

/// Masked midpoint rule for a surface at `N`, `N/2` and `N/4` cells per
/// axis. The error estimate is `|I(N) - I(N/2)|`.
pub fn integrate_surface(
    surface: &ConformalSurface,
    grid: &GridSpec,
    convention: DensityConvention,
) -> Result<QuadratureResult, IntegrationError> {
    grid.validate()?;
    let levels = [grid.cells / 4, grid.cells / 2, grid.cells];
    let mut convergence = Vec::with_capacity(3);
    let mut evaluations = 0;
    let mut finest = None;
    for &cells in &levels {
        let sum = midpoint_sum(surface, grid, cells, convention)?;
        evaluations += sum.inside;
        convergence.push((cells as f64, sum.value));
        finest = Some(sum);
    }
    let finest = finest.expect("three levels");
    if finest.inside == 0 {
        return Err(IntegrationError::EmptyRegion);
    }
    let value = finest.value;
    Ok(QuadratureResult {
        value,
        error: (value - convergence[1].1).abs(),
        evaluations,
        convergence,
    })
}

/// Integral of the Euler density `(1/4 pi) laplacian(phi)` of a
/// two-dimensional isotropic system over its masked grid.
pub fn integrate_density_2d(sys: &MechanicalSystem, grid: &GridSpec) -> Result<QuadratureResult, IntegrationError> {
    let surface = sys.surface()?;
    integrate_surface(&surface, grid, DensityConvention::Laplacian)
}

/// What a convergence study refines per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    HalveEpsilon,
    DoubleResolution,
    HalveTolerance,
}

impl Refinement {
    pub fn label(self) -> &'static str {
        match self {
            Refinement::HalveEpsilon => "epsilon",
            Refinement::DoubleResolution => "cells",
            Refinement::HalveTolerance => "tolerance",
        }
    }

    fn step(self, value: f64) -> f64 {
        match self {
            Refinement::DoubleResolution => value * 2.0,
            Refinement::HalveEpsilon | Refinement::HalveTolerance => value / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub refinement: Refinement,
    /// `(parameter, value)` per level, coarsest first.
    pub rows: Vec<(f64, f64)>,
    /// `log2` of the ratio of successive differences over the last three
    /// levels; `None` when a difference vanishes.
    pub empirical_order: Option<f64>,
}

/// Runs `op` at `levels` successively refined parameter values.
pub fn convergence_study(
    refinement: Refinement,
    start: f64,
    levels: usize,
    mut op: impl FnMut(f64) -> Result<f64, IntegrationError>,
) -> Result<ConvergenceStudy, IntegrationError> {
    if levels < 3 {
        return Err(IntegrationError::InvalidArgument(
            "a convergence study needs at least 3 levels".into(),
        ));
    }
    let mut rows = Vec::with_capacity(levels);
    let mut param = start;
    for _ in 0..levels {
        rows.push((param, op(param)?));
        param = refinement.step(param);
    }
    let n = rows.len();
    let d1 = (rows[n - 2].1 - rows[n - 3].1).abs();
    let d2 = (rows[n - 1].1 - rows[n - 2].1).abs();
    let empirical_order = (d1 > 0.0 && d2 > 0.0).then(|| (d1 / d2).log2());
    Ok(ConvergenceStudy {
        refinement,
        rows,
        empirical_order,
    })
}

/// Grid integral with epsilon halved per level, starting from `grid.epsilon`.
pub fn study_epsilon(
    surface: &ConformalSurface,
    grid: &GridSpec,
    levels: usize,
    convention: DensityConvention,
) -> Result<ConvergenceStudy, IntegrationError> {
    convergence_study(Refinement::HalveEpsilon, grid.epsilon, levels, |eps| {
        Ok(midpoint_sum(surface, &grid.with_epsilon(eps), grid.cells, convention)?.value)
    })
}

/// Grid integral with the cell count doubled per level, starting from `grid.cells`.
pub fn study_resolution(
    surface: &ConformalSurface,
    grid: &GridSpec,
    levels: usize,
    convention: DensityConvention,
) -> Result<ConvergenceStudy, IntegrationError> {
    grid.validate()?;
    convergence_study(Refinement::DoubleResolution, grid.cells as f64, levels, |n| {
        Ok(midpoint_sum(surface, grid, n as usize, convention)?.value)
    })
}

/// Reduced integral with the tolerance halved per level.
pub fn study_tolerance(
    k: f64,
    energy: f64,
    b: f64,
    q0: f64,
    tol: f64,
    levels: usize,
) -> Result<ConvergenceStudy, IntegrationError> {
    convergence_study(Refinement::HalveTolerance, tol, levels, |t| {
        Ok(integrate_reduced(k, energy, b, q0, t)?.value)
    })
}
