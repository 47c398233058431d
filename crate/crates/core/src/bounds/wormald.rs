use std::fmt;
use std::sync::Arc;

use crate::error::{param, Result};

type Rhs = dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync;

/// `dz/dx = f(x, z)` on a box-shaped domain, with process scale `m`.
#[derive(Clone)]
pub struct WormaldSystem {
    f: Arc<Rhs>,
    pub z0: Vec<f64>,
    pub m: f64,
    /// Per-coordinate open bounds of the domain in `z`.
    pub bounds: Vec<(f64, f64)>,
    /// Upper end of the domain in `x`.
    pub x_max: f64,
    /// Deviation scale `λ(m)`; integration stops within `C·λ` of the boundary.
    pub lambda: f64,
    pub c: f64,
}

impl fmt::Debug for WormaldSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WormaldSystem")
            .field("z0", &self.z0)
            .field("m", &self.m)
            .field("bounds", &self.bounds)
            .field("x_max", &self.x_max)
            .finish()
    }
}

impl WormaldSystem {
    pub fn new(
        f: impl Fn(f64, &[f64]) -> Vec<f64> + Send + Sync + 'static,
        z0: Vec<f64>,
        m: f64,
        bounds: Vec<(f64, f64)>,
        x_max: f64,
    ) -> Result<Self> {
        if z0.is_empty() || bounds.len() != z0.len() {
            return Err(param("one domain interval per coordinate required"));
        }
        if !(m > 0.0) || !(x_max > 0.0) {
            return Err(param("m and x_max must be positive"));
        }
        let system = Self {
            f: Arc::new(f),
            z0,
            m,
            bounds,
            x_max,
            lambda: 0.0,
            c: 1.0,
        };
        if system.margin(0.0, &system.z0) <= 0.0 {
            return Err(param("initial point lies outside the domain"));
        }
        Ok(system)
    }

    pub fn with_deviation(mut self, lambda: f64, c: f64) -> Self {
        self.lambda = lambda;
        self.c = c;
        self
    }

    pub fn a(&self) -> usize {
        self.z0.len()
    }

    pub fn rhs(&self, x: f64, z: &[f64]) -> Vec<f64> {
        (self.f)(x, z)
    }

    /// Sup-norm distance from `(x, z)` to the boundary, negative outside.
    /// Pass `x = -inf` to ignore the `x` extent.
    fn margin(&self, x: f64, z: &[f64]) -> f64 {
        let mut d = self.x_max - x;
        for (zi, (lo, hi)) in z.iter().zip(&self.bounds) {
            d = d.min(zi - lo).min(hi - zi);
        }
        d
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WormaldTrack {
    pub x: Vec<f64>,
    pub z: Vec<Vec<f64>>,
    pub m: f64,
    /// Where integration stopped early because the boundary came within `C·λ`.
    pub exit: Option<(f64, Vec<f64>)>,
}

impl WormaldTrack {
    /// Linear interpolation of `z(x)` on the grid; `None` past the end.
    pub fn z_at(&self, x: f64) -> Option<Vec<f64>> {
        let last = *self.x.last()?;
        if x < self.x[0] || x > last + 1e-12 {
            return None;
        }
        let i = self.x.partition_point(|&g| g <= x).saturating_sub(1).min(self.x.len() - 1);
        if i + 1 >= self.x.len() {
            return Some(self.z[i].clone());
        }
        let w = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
        Some(self.z[i].iter().zip(&self.z[i + 1]).map(|(a, b)| a + w * (b - a)).collect())
    }

    /// Predicted `Y^{(t)} ≈ m·z(t/m)`.
    pub fn predicted(&self, t: f64) -> Option<Vec<f64>> {
        self.z_at(t / self.m).map(|z| z.into_iter().map(|v| v * self.m).collect())
    }
}

pub const WORMALD_STEP: f64 = 1e-3;

fn axpy(z: &[f64], k: &[f64], h: f64) -> Vec<f64> {
    z.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// Classical RK4 from `x = 0` to `min(horizon, x_max)` in steps of `1e-3`.
pub fn wormald_track(system: &WormaldSystem, horizon: f64) -> Result<WormaldTrack> {
    if !(horizon >= 0.0) {
        return Err(param("horizon must be non-negative"));
    }
    let end = horizon.min(system.x_max);
    let steps = (end / WORMALD_STEP).round() as usize;
    let guard = system.c * system.lambda;
    let mut xs = vec![0.0];
    let mut zs = vec![system.z0.clone()];
    let mut z = system.z0.clone();
    let mut exit = None;
    for i in 0..steps {
        let x = i as f64 * WORMALD_STEP;
        let h = if i + 1 == steps { end - x } else { WORMALD_STEP };
        let k1 = system.rhs(x, &z);
        let k2 = system.rhs(x + h / 2.0, &axpy(&z, &k1, h / 2.0));
        let k3 = system.rhs(x + h / 2.0, &axpy(&z, &k2, h / 2.0));
        let k4 = system.rhs(x + h, &axpy(&z, &k3, h));
        let next: Vec<f64> = (0..z.len())
            .map(|j| z[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
            .collect();
        let nx = x + h;
        let z_margin = system.margin(f64::NEG_INFINITY, &next);
        if z_margin <= guard || system.x_max - nx < guard {
            exit = Some((nx, next));
            break;
        }
        z = next;
        xs.push(nx);
        zs.push(z.clone());
    }
    Ok(WormaldTrack {
        x: xs,
        z: zs,
        m: system.m,
        exit,
    })
}
