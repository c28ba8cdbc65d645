//! Jacobi metric of a conservative mechanical system and the curvature of
//! its two-dimensional conformally flat base space.
//!
//! For kinetic matrix `h` and potential `V` at energy `E` the Jacobi metric
//! is `g = 2 (E - V) h`. With `h = m I` in two dimensions this is
//! `g = e^phi I` with `phi = ln(2 m (E - V))`, and every curvature quantity
//! reduces to the flat Laplacian of `phi`:
//!
//! * Gaussian curvature `K = -1/2 e^-phi (phi_11 + phi_22)`
//! * Euler density (as used by the spectrum pipeline)
//!   `rho = +1/(4 pi) (phi_11 + phi_22)`
//! * Gauss-Bonnet density `K e^phi / (2 pi) = -rho`
//!
//! The two densities differ by sign only; both are exposed.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::expr::{Bindings, EvalError, Expr, Func, Point2};

/// Default relative margin for the allowed-region mask.
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("kinetic matrix must be a symmetric positive-definite {0}x{0} matrix")]
    KineticMatrix(usize),
    #[error("energy must be finite")]
    NonFiniteEnergy,
    #[error("mass must be positive and finite")]
    InvalidMass,
    #[error("potential references unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("point has {got} coordinates, system has {expected} degrees of freedom")]
    Dimension { expected: usize, got: usize },
    #[error("operation requires a two-dimensional base space, system has {0} degrees of freedom")]
    NotTwoDimensional(usize),
    #[error("kinetic matrix is not isotropic (m times identity)")]
    NotIsotropic,
    #[error("point is outside the allowed region (E - V = {margin})")]
    OutsideAllowedRegion { margin: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Degrees of freedom, kinetic matrix, potential and total energy.
///
/// Coordinates are named `q1..qn`; any other symbol in the potential must be
/// bound in `params`.
#[derive(Debug, Clone)]
pub struct MechanicalSystem {
    kinetic: DMatrix<f64>,
    potential: Expr,
    params: Bindings,
    energy: f64,
    // potential with parameters substituted and folded
    bound_potential: Expr,
}

pub fn coordinate_name(i: usize) -> String {
    format!("q{}", i + 1)
}

impl MechanicalSystem {
    pub fn new(
        kinetic: DMatrix<f64>,
        potential: Expr,
        params: Bindings,
        energy: f64,
    ) -> Result<Self, GeometryError> {
        let n = kinetic.nrows();
        if n == 0 || kinetic.ncols() != n || kinetic.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::KineticMatrix(n));
        }
        for i in 0..n {
            for j in 0..i {
                if kinetic[(i, j)] != kinetic[(j, i)] {
                    return Err(GeometryError::KineticMatrix(n));
                }
            }
        }
        if kinetic.clone().cholesky().is_none() {
            return Err(GeometryError::KineticMatrix(n));
        }
        if !energy.is_finite() {
            return Err(GeometryError::NonFiniteEnergy);
        }
        let coords: Vec<String> = (0..n).map(coordinate_name).collect();
        if let Some(missing) = potential
            .free_vars()
            .into_iter()
            .find(|v| !coords.contains(v) && !params.contains(v))
        {
            return Err(GeometryError::UnboundSymbol(missing));
        }
        // Coordinates shadow parameters of the same name.
        let params_only: Bindings = params
            .iter()
            .filter(|(k, _)| !coords.iter().any(|c| c == k))
            .collect();
        let bound_potential = potential.substitute(&params_only).simplify();
        Ok(Self {
            kinetic,
            potential,
            params: params_only,
            energy,
            bound_potential,
        })
    }

    /// `h = m I` in `dof` dimensions.
    pub fn isotropic(
        dof: usize,
        mass: f64,
        potential: Expr,
        params: Bindings,
        energy: f64,
    ) -> Result<Self, GeometryError> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(GeometryError::InvalidMass);
        }
        Self::new(DMatrix::identity(dof, dof) * mass, potential, params, energy)
    }

    pub fn dof(&self) -> usize {
        self.kinetic.nrows()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn kinetic(&self) -> &DMatrix<f64> {
        &self.kinetic
    }

    pub fn potential(&self) -> &Expr {
        &self.potential
    }

    pub fn params(&self) -> &Bindings {
        &self.params
    }

    /// Returns `m` when the kinetic matrix is exactly `m I`.
    pub fn isotropic_mass(&self) -> Option<f64> {
        let m = self.kinetic[(0, 0)];
        let n = self.dof();
        let isotropic = (0..n).all(|i| {
            (0..n).all(|j| self.kinetic[(i, j)] == if i == j { m } else { 0.0 })
        });
        isotropic.then_some(m)
    }

    fn bindings_at(&self, q: &[f64]) -> Result<Bindings, GeometryError> {
        if q.len() != self.dof() {
            return Err(GeometryError::Dimension {
                expected: self.dof(),
                got: q.len(),
            });
        }
        Ok(q.iter()
            .enumerate()
            .map(|(i, &v)| (coordinate_name(i), v))
            .collect())
    }

    pub fn potential_at(&self, q: &[f64]) -> Result<f64, GeometryError> {
        let b = self.bindings_at(q)?;
        Ok(self.bound_potential.evaluate(&b)?)
    }

    /// `E - V(q)`.
    pub fn margin(&self, q: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.energy - self.potential_at(q)?)
    }

    fn region_scale(&self) -> f64 {
        self.energy.abs().max(1.0)
    }

    /// `g_ij(q) = 2 (E - V(q)) h_ij`.
    pub fn jacobi_metric(&self, q: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
        let margin = self.margin(q)?;
        if margin <= 0.0 {
            return Err(GeometryError::OutsideAllowedRegion { margin });
        }
        Ok(&self.kinetic * (2.0 * margin))
    }

    /// `phi(q) = ln(2 m (E - V(q)))`; requires `h = m I`.
    pub fn conformal_factor(&self, q: &[f64]) -> Result<f64, GeometryError> {
        let mass = self.isotropic_mass().ok_or(GeometryError::NotIsotropic)?;
        let margin = self.margin(q)?;
        if margin <= 0.0 {
            return Err(GeometryError::OutsideAllowedRegion { margin });
        }
        Ok((2.0 * mass * margin).ln())
    }

    /// True iff `E - V(q) > 0` and `E - V(q) >= eps * max(|E|, 1)`.
    /// Points where the potential cannot be evaluated are outside.
    pub fn allowed_region(&self, q: &[f64], eps: f64) -> bool {
        match self.margin(q) {
            Ok(margin) => margin > 0.0 && margin >= eps * self.region_scale(),
            Err(_) => false,
        }
    }

    /// The conformal base space of a two-dimensional isotropic system.
    pub fn surface(&self) -> Result<ConformalSurface, GeometryError> {
        if self.dof() != 2 {
            return Err(GeometryError::NotTwoDimensional(self.dof()));
        }
        let mass = self.isotropic_mass().ok_or(GeometryError::NotIsotropic)?;
        let margin = Expr::sub(Expr::Const(self.energy), self.bound_potential.clone()).simplify();
        let phi = Expr::call(
            Func::Ln,
            Expr::mul(Expr::Const(2.0 * mass), margin.clone()),
        )
        .simplify();
        Ok(ConformalSurface::build(
            phi,
            Some(Region {
                margin,
                scale: self.region_scale(),
            }),
        ))
    }
}

#[derive(Debug, Clone)]
struct Region {
    margin: Expr,
    scale: f64,
}

/// Conformally flat surface `g = e^phi (dq1^2 + dq2^2)` with symbolic first
/// and second derivatives of `phi`.
#[derive(Debug, Clone)]
pub struct ConformalSurface {
    phi: Expr,
    grad: [Expr; 2],
    hessian: [[Expr; 2]; 2],
    region: Option<Region>,
}

/// Which sign convention to use for the Euler 2-form coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityConvention {
    /// `rho = +1/(4 pi) laplacian(phi)`; feeds the topological spectrum.
    Laplacian,
    /// `K e^phi / (2 pi) = -1/(4 pi) laplacian(phi)`; integrates to the
    /// Euler characteristic of a closed surface.
    GaussBonnet,
}

/// Everything evaluated at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerDensitySample {
    pub point: [f64; 2],
    pub density: f64,
    pub curvature: f64,
    pub conformal: f64,
}

impl ConformalSurface {
    /// Surface from an arbitrary conformal factor in `q1`, `q2`, defined
    /// wherever `phi` and its derivatives evaluate.
    pub fn from_phi(phi: Expr) -> Self {
        Self::build(phi.simplify(), None)
    }

    fn build(phi: Expr, region: Option<Region>) -> Self {
        let names = ["q1", "q2"];
        let grad = names.map(|v| phi.differentiate(v));
        let hessian = [0, 1].map(|i| names.map(|v| grad[i].differentiate(v)));
        Self {
            phi,
            grad,
            hessian,
            region,
        }
    }

    pub fn phi_expr(&self) -> &Expr {
        &self.phi
    }

    /// `d phi / d q_i`.
    pub fn gradient_expr(&self, i: usize) -> &Expr {
        &self.grad[i]
    }

    /// `d^2 phi / d q_i d q_j`.
    pub fn hessian_expr(&self, i: usize, j: usize) -> &Expr {
        &self.hessian[i][j]
    }

    /// `E - V(q)` for mechanical surfaces, `None` when unrestricted.
    pub fn margin(&self, q: [f64; 2]) -> Result<Option<f64>, GeometryError> {
        match &self.region {
            Some(r) => Ok(Some(r.margin.evaluate(&Point2(q))?)),
            None => Ok(None),
        }
    }

    /// Mask predicate: `E - V >= eps * max(|E|, 1)` and `E - V > 0`.
    /// Unrestricted surfaces accept every point.
    pub fn contains(&self, q: [f64; 2], eps: f64) -> Result<bool, GeometryError> {
        match (&self.region, self.margin(q)?) {
            (Some(r), Some(m)) => Ok(m > 0.0 && m >= eps * r.scale),
            _ => Ok(true),
        }
    }

    fn require_inside(&self, q: [f64; 2]) -> Result<(), GeometryError> {
        match self.margin(q)? {
            Some(margin) if margin <= 0.0 => Err(GeometryError::OutsideAllowedRegion { margin }),
            _ => Ok(()),
        }
    }

    pub fn phi(&self, q: [f64; 2]) -> Result<f64, GeometryError> {
        self.require_inside(q)?;
        Ok(self.phi.evaluate(&Point2(q))?)
    }

    /// `phi_11 + phi_22` from the symbolic second derivatives.
    pub fn laplacian_phi(&self, q: [f64; 2]) -> Result<f64, GeometryError> {
        self.require_inside(q)?;
        let p = Point2(q);
        Ok(self.hessian[0][0].evaluate(&p)? + self.hessian[1][1].evaluate(&p)?)
    }

    /// `rho = (1/4 pi) (phi_11 + phi_22)`.
    pub fn euler_density(&self, q: [f64; 2]) -> Result<f64, GeometryError> {
        Ok(self.laplacian_phi(q)? / (4.0 * PI))
    }

    /// `K e^phi / (2 pi)`, the standard-sign Euler density.
    pub fn gauss_bonnet_density(&self, q: [f64; 2]) -> Result<f64, GeometryError> {
        Ok(-self.euler_density(q)?)
    }

    pub fn density(&self, q: [f64; 2], convention: DensityConvention) -> Result<f64, GeometryError> {
        match convention {
            DensityConvention::Laplacian => self.euler_density(q),
            DensityConvention::GaussBonnet => self.gauss_bonnet_density(q),
        }
    }

    /// `K = -1/2 e^-phi (phi_11 + phi_22)`.
    pub fn gaussian_curvature(&self, q: [f64; 2]) -> Result<f64, GeometryError> {
        let lap = self.laplacian_phi(q)?;
        let phi = self.phi.evaluate(&Point2(q))?;
        Ok(-0.5 * (-phi).exp() * lap)
    }

    pub fn sample(&self, q: [f64; 2]) -> Result<EulerDensitySample, GeometryError> {
        let lap = self.laplacian_phi(q)?;
        let phi = self.phi.evaluate(&Point2(q))?;
        Ok(EulerDensitySample {
            point: q,
            density: lap / (4.0 * PI),
            curvature: -0.5 * (-phi).exp() * lap,
            conformal: phi.exp(),
        })
    }
}

/// Conformal factor of the unit sphere in stereographic coordinates,
/// `phi = ln 4 - 2 ln(1 + q1^2 + q2^2)`. Constant curvature 1.
pub fn stereographic_sphere() -> ConformalSurface {
    let phi = crate::expr::parse("ln(4) - 2*ln(1 + q1^2 + q2^2)")
        .expect("sphere conformal factor parses");
    ConformalSurface::from_phi(phi)
}
