//! Built-in oracle checks, runnable from the CLI and the browser demo.

use std::fmt;

use crate::expr::{Bindings, Expr};
use crate::geometry::{stereographic_sphere, DensityConvention, MechanicalSystem};
use crate::integrate::{
    integrate_density_2d, integrate_reduced_with_prefactor, integrate_surface, reduced_prefactor,
    turning_point, GridSpec,
};
use crate::spectrum::{canonical_energy, q0_from_energy, topological_number, OscillatorParams};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {}: {}", self.name, self.detail)
    }
}

/// Point `i` of the 2D Halton sequence (bases 2 and 3) in `[0, 1)^2`.
pub fn halton(i: usize) -> [f64; 2] {
    fn radical_inverse(mut i: usize, base: usize) -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    [radical_inverse(i + 1, 2), radical_inverse(i + 1, 3)]
}

/// `V = 0`: curvature and density vanish at 1000 points and the grid
/// integral is exactly zero at several resolutions.
pub fn free_particle_check() -> CheckOutcome {
    let name = "free-particle flatness";
    let run = || -> Result<String, String> {
        let sys = MechanicalSystem::isotropic(2, 1.0, Expr::Const(0.0), Bindings::new(), 1.0)
            .map_err(|e| e.to_string())?;
        let surface = sys.surface().map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for i in 0..1000 {
            let h = halton(i);
            let q = [20.0 * h[0] - 10.0, 20.0 * h[1] - 10.0];
            let s = surface.sample(q).map_err(|e| e.to_string())?;
            worst = worst.max(s.curvature.abs()).max(s.density.abs());
        }
        if worst > 1e-12 {
            return Err(format!("max |K|, |rho| = {worst:e}"));
        }
        for cells in [16, 64, 256] {
            let grid = GridSpec::square(5.0, cells, 1e-3).map_err(|e| e.to_string())?;
            let r = integrate_density_2d(&sys, &grid).map_err(|e| e.to_string())?;
            if r.value != 0.0 {
                return Err(format!("integral at N={cells} is {:e}", r.value));
            }
        }
        Ok("K = rho = 0 at 1000 points; integral exactly 0 at N = 16, 64, 256".into())
    };
    outcome(name, run())
}

/// Half-width of the sphere validation box.
pub const SPHERE_BOX: f64 = 50.0;
/// Cells per axis of the sphere validation grid.
pub const SPHERE_CELLS: usize = 1024;
pub const SPHERE_TOLERANCE: f64 = 1e-3;

/// Integrates the sphere's density with the given sign convention; a correct
/// standard-sign density gives the Euler characteristic 2.
pub fn sphere_euler_characteristic(convention: DensityConvention) -> Result<f64, String> {
    let grid = GridSpec::square(SPHERE_BOX, SPHERE_CELLS, 0.0).map_err(|e| e.to_string())?;
    integrate_surface(&stereographic_sphere(), &grid, convention)
        .map(|r| r.value)
        .map_err(|e| e.to_string())
}

pub fn gauss_bonnet_check_with(convention: DensityConvention) -> CheckOutcome {
    let name = "sphere Gauss-Bonnet";
    let run = || -> Result<String, String> {
        let chi = sphere_euler_characteristic(convention)?;
        let detail = format!("integral = {chi:.9} (expect 2 within {SPHERE_TOLERANCE:e})");
        if (chi - 2.0).abs() <= SPHERE_TOLERANCE {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    outcome(name, run())
}

pub fn gauss_bonnet_check() -> CheckOutcome {
    gauss_bonnet_check_with(DensityConvention::GaussBonnet)
}

/// Parameter grid of the quadrature bridge: energies and `q0/a` ratios.
pub const BRIDGE_ENERGIES: [f64; 5] = [0.1, 0.5, 1.0, 3.0, 10.0];
pub const BRIDGE_RATIOS: [f64; 5] = [0.1, 0.3225, 0.545, 0.7675, 0.99];

/// Largest deviation of the quadrature from `b q0 / (q0^2 - a^2)` relative
/// to `max(1, |value|)`, over the 5x5 grid at `k = 1, b = 1`.
pub fn bridge_deviation(prefactor: impl Fn(f64, f64) -> f64) -> Result<f64, String> {
    let (k, b) = (1.0, 1.0);
    let mut worst = 0.0f64;
    for &e in &BRIDGE_ENERGIES {
        let a = turning_point(k, e);
        for &ratio in &BRIDGE_RATIOS {
            let q0 = ratio * a;
            let closed = topological_number(b, k, e, q0).map_err(|e| e.to_string())?;
            let r = integrate_reduced_with_prefactor(prefactor(k, b), k, e, q0, 1e-11)
                .map_err(|e| e.to_string())?;
            worst = worst.max((r.value - closed).abs() / closed.abs().max(1.0));
        }
    }
    Ok(worst)
}

pub fn quadrature_bridge_check_with(prefactor: impl Fn(f64, f64) -> f64) -> CheckOutcome {
    let name = "quadrature bridge";
    let run = || -> Result<String, String> {
        let worst = bridge_deviation(prefactor)?;
        let detail = format!("max scaled deviation {worst:e} over 5x5 (E, q0/a) grid");
        if worst <= 1e-10 {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    outcome(name, run())
}

pub fn quadrature_bridge_check() -> CheckOutcome {
    quadrature_bridge_check_with(reduced_prefactor)
}

/// `topological_number(q0(E_n)) = n` for `n = 1..=10`.
pub fn spectrum_identity_check() -> CheckOutcome {
    let name = "spectrum identity";
    let run = || -> Result<String, String> {
        let params = OscillatorParams::new(1.0, 1.0, 2.0, 1.0).map_err(|e| e.to_string())?;
        let mut worst = 0.0f64;
        for n in 1..=10 {
            let e = canonical_energy(n, &params).map_err(|e| e.to_string())?;
            let q0 = q0_from_energy(&params, e).map_err(|e| e.to_string())?;
            let t = topological_number(params.transverse(), params.spring(), e, q0)
                .map_err(|e| e.to_string())?;
            worst = worst.max((t - n as f64).abs());
        }
        let detail = format!("max |n_top - n| = {worst:e} for n = 1..10");
        if worst <= 1e-10 {
            Ok(detail)
        } else {
            Err(detail)
        }
    };
    outcome(name, run())
}

fn outcome(name: &'static str, result: Result<String, String>) -> CheckOutcome {
    match result {
        Ok(detail) => CheckOutcome {
            name,
            passed: true,
            detail,
        },
        Err(detail) => CheckOutcome {
            name,
            passed: false,
            detail,
        },
    }
}

/// All checks in a fixed order.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        free_particle_check(),
        gauss_bonnet_check(),
        quadrature_bridge_check(),
        spectrum_identity_check(),
    ]
}
