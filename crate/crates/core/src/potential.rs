//! External potentials `V(t, x)` and their time integrals over a step.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    /// `V0 exp(-γ²/2 |x - center|²)`
    StaticGaussian {
        v0: f64,
        gamma: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// Obstacle moving along the first axis: center `(a t, 0)`.
    MovingGaussian { v0: f64, gamma: f64, a: f64 },
    /// Obstacle circling the origin: center `r0 (cos(a t), sin(a t))`.
    RotatingGaussian { v0: f64, gamma: f64, a: f64, r0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    /// Closed form; only for time-independent potentials.
    Exact,
    Left,
    Midpoint,
    Gauss2,
}

impl Potential {
    pub fn is_time_dependent(&self) -> bool {
        matches!(self, Potential::MovingGaussian { .. } | Potential::RotatingGaussian { .. })
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Potential::Zero => true,
            Potential::StaticGaussian { v0, .. }
            | Potential::MovingGaussian { v0, .. }
            | Potential::RotatingGaussian { v0, .. } => v0 == 0.0,
        }
    }

    fn center(&self, t: f64) -> Option<(f64, f64, f64, [f64; 2])> {
        match *self {
            Potential::Zero => None,
            Potential::StaticGaussian { v0, gamma, center } => Some((v0, gamma, 0.0, center)),
            Potential::MovingGaussian { v0, gamma, a } => Some((v0, gamma, a, [a * t, 0.0])),
            Potential::RotatingGaussian { v0, gamma, a, r0 } => {
                Some((v0, gamma, a, [r0 * (a * t).cos(), r0 * (a * t).sin()]))
            }
        }
    }

    /// `V(t, x, y)`.
    pub fn value(&self, t: f64, x: f64, y: f64) -> f64 {
        match self.center(t) {
            None => 0.0,
            Some((v0, gamma, _, [cx, cy])) => {
                v0 * (-0.5 * gamma * gamma * ((x - cx).powi(2) + (y - cy).powi(2))).exp()
            }
        }
    }

    /// `∂_t V(t, x, y)`.
    pub fn time_derivative(&self, t: f64, x: f64, y: f64) -> f64 {
        let v = self.value(t, x, y);
        match *self {
            Potential::Zero | Potential::StaticGaussian { .. } => 0.0,
            Potential::MovingGaussian { gamma, a, .. } => v * gamma * gamma * (x - a * t) * a,
            Potential::RotatingGaussian { gamma, a, r0, .. } => {
                let (s, c) = (a * t).sin_cos();
                // d/dt of the center is r0 a (-sin, cos)
                let dot = (x - r0 * c) * (-r0 * a * s) + (y - r0 * s) * (r0 * a * c);
                v * gamma * gamma * dot
            }
        }
    }

    /// Nodal values `V(t, ·)` as plain reals.
    pub fn sample(&self, t: f64, grid: &Grid) -> Vec<f64> {
        (0..grid.len())
            .map(|i| {
                let [x, y] = grid.position(i);
                self.value(t, x, y)
            })
            .collect()
    }

    /// Approximates `∫_{t0}^{t0+τ} V(s, ·) ds` at every node.
    pub fn time_integral(&self, t0: f64, tau: f64, rule: QuadratureRule, grid: &Grid) -> Result<Vec<f64>> {
        if matches!(self, Potential::Zero) {
            return Ok(vec![0.0; grid.len()]);
        }
        let scaled = |t: f64, w: f64| -> Vec<f64> { self.sample(t, grid).into_iter().map(|v| w * v).collect() };
        Ok(match rule {
            QuadratureRule::Exact => {
                if self.is_time_dependent() {
                    return Err(Error::Unsupported(
                        "exact time integral is only available for time-independent potentials".into(),
                    ));
                }
                scaled(t0, tau)
            }
            _ if !self.is_time_dependent() => scaled(t0, tau),
            QuadratureRule::Left => scaled(t0, tau),
            QuadratureRule::Midpoint => scaled(t0 + 0.5 * tau, tau),
            QuadratureRule::Gauss2 => {
                let off = 0.5 * tau / 3f64.sqrt();
                let mid = t0 + 0.5 * tau;
                let a = self.sample(mid - off, grid);
                let b = self.sample(mid + off, grid);
                a.iter().zip(b).map(|(x, y)| 0.5 * tau * (x + y)).collect()
            }
        })
    }
}

pub fn eval_potential(pot: &Potential, t: f64, grid: &Arc<Grid>) -> Field {
    Field::from_fn(grid.clone(), |x, y| Complex64::new(pot.value(t, x, y), 0.0))
}

pub fn potential_time_integral(
    pot: &Potential,
    t0: f64,
    tau: f64,
    rule: QuadratureRule,
    grid: &Arc<Grid>,
) -> Result<Field> {
    let values = pot.time_integral(t0, tau, rule, grid)?;
    Ok(Field::from_raw(grid.clone(), values.into_iter().map(|v| Complex64::new(v, 0.0)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, BoundaryKind};
    use std::f64::consts::PI;

    const CASE_I: Potential = Potential::MovingGaussian { v0: 50.0, gamma: 10.0, a: 1.0 };

    #[test]
    fn moving_gaussian_peak() {
        assert_eq!(CASE_I.value(0.0, 0.0, 0.0), 50.0);
        assert_eq!(CASE_I.value(1.0, 1.0, 0.0), 50.0);
        assert!(CASE_I.value(1.0, 0.0, 0.0) < 1e-9);
    }

    #[test]
    fn rotating_gaussian_peak_position() {
        let p = Potential::RotatingGaussian { v0: 50.0, gamma: 10.0, a: 1.0, r0: 0.5 };
        let t = PI / 2.0;
        let (cx, cy) = (0.5 * t.cos(), 0.5 * t.sin());
        assert!((p.value(t, cx, cy) - 50.0).abs() < 1e-12);
        assert!((cy - 0.5).abs() < 1e-15 && cx.abs() < 1e-15);
    }

    #[test]
    fn rotating_gaussian_is_periodic_in_time() {
        let p = Potential::RotatingGaussian { v0: 50.0, gamma: 10.0, a: 1.3, r0: 0.5 };
        let period = 2.0 * PI / 1.3;
        for &(t, x, y) in &[(0.1, 0.2, -0.3), (2.0, 0.45, 0.1), (5.5, -0.4, 0.3)] {
            let a = p.value(t, x, y);
            let b = p.value(t + period, x, y);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn eval_is_real() {
        let g = Arc::new(make_grid(2, 1.0, 16, BoundaryKind::Periodic).unwrap());
        let f = eval_potential(&CASE_I, 0.3, &g);
        assert!(f.values().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn static_and_zero_integrals() {
        let g = Arc::new(make_grid(2, 1.0, 8, BoundaryKind::Periodic).unwrap());
        let s = Potential::StaticGaussian { v0: 3.0, gamma: 2.0, center: [0.1, 0.0] };
        for rule in [QuadratureRule::Exact, QuadratureRule::Midpoint, QuadratureRule::Gauss2] {
            let i = s.time_integral(0.7, 0.25, rule, &g).unwrap();
            let v = s.sample(0.0, &g);
            for (a, b) in i.iter().zip(v) {
                assert!((a - 0.25 * b).abs() < 1e-15);
            }
        }
        let z = potential_time_integral(&Potential::Zero, 0.0, 1.0, QuadratureRule::Exact, &g).unwrap();
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn exact_rule_rejected_for_moving_obstacle() {
        let g = make_grid(2, 1.0, 8, BoundaryKind::Periodic).unwrap();
        assert!(CASE_I.time_integral(0.0, 0.1, QuadratureRule::Exact, &g).is_err());
    }

    #[test]
    fn time_derivative_matches_central_difference() {
        let pots = [
            CASE_I,
            Potential::RotatingGaussian { v0: 50.0, gamma: 10.0, a: 1.0, r0: 0.5 },
        ];
        let d = 1e-6;
        for p in pots {
            for &(t, x, y) in &[(0.3, 0.35, 0.05), (1.1, 0.2, 0.4)] {
                let fd = (p.value(t + d, x, y) - p.value(t - d, x, y)) / (2.0 * d);
                let an = p.time_derivative(t, x, y);
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1.0), "{fd} vs {an}");
            }
        }
    }
}
