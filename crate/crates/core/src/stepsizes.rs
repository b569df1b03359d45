//! Stepsize schedules for the three-point methods.

use crate::error::{invalid, Error, Result};

/// Default finite-difference parameter of the solution-free rule.
pub const DEFAULT_SOLUTION_FREE_T: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub enum StepsizeSchedule {
    /// `α`.
    Fixed { alpha: f64 },
    /// `α₀ / √(k+1)`.
    InvSqrt { alpha0: f64 },
    /// `α₀ (f(x_k) − f*)`.
    GapLinear { alpha0: f64, f_star: f64 },
    /// `(θ μ / L) √(2λ (f(x_k) − f*))`.
    GapSqrt {
        theta: f64,
        mu: f64,
        lipschitz: f64,
        lambda: f64,
        f_star: f64,
    },
    /// `|f(x_k + t s_k) − f(x_k)| / (L t)`; costs one extra evaluation.
    SolutionFree { lipschitz: f64, t: f64 },
}

/// Inputs available to a schedule at iteration `k`.
pub struct StepContext<'a> {
    pub k: u64,
    pub f_x: f64,
    pub x: &'a [f64],
    pub s: &'a [f64],
    /// Evaluates the objective, charging the run's budget.
    pub probe: &'a mut dyn FnMut(&[f64]) -> Result<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl StepsizeSchedule {
    pub fn name(&self) -> &'static str {
        match self {
            StepsizeSchedule::Fixed { .. } => "fixed",
            StepsizeSchedule::InvSqrt { .. } => "inv_sqrt",
            StepsizeSchedule::GapLinear { .. } => "gap_linear",
            StepsizeSchedule::GapSqrt { .. } => "gap_sqrt",
            StepsizeSchedule::SolutionFree { .. } => "solution_free",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StepsizeSchedule::Fixed { alpha } => positive("alpha", alpha),
            StepsizeSchedule::InvSqrt { alpha0 } => positive("alpha0", alpha0),
            StepsizeSchedule::GapLinear { alpha0, f_star } => {
                positive("alpha0", alpha0)?;
                if f_star.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("f_star must be finite"))
                }
            }
            StepsizeSchedule::GapSqrt {
                theta,
                mu,
                lipschitz,
                lambda,
                f_star,
            } => {
                if !(theta > 0.0 && theta < 2.0) {
                    return Err(invalid(format!("theta must lie in (0, 2), got {theta}")));
                }
                positive("mu", mu)?;
                positive("L", lipschitz)?;
                positive("lambda", lambda)?;
                if f_star.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("f_star must be finite"))
                }
            }
            StepsizeSchedule::SolutionFree { lipschitz, t } => {
                positive("L", lipschitz)?;
                positive("t", t)
            }
        }
    }

    /// Extra objective evaluations charged per iteration.
    pub fn probes_per_step(&self) -> u64 {
        match self {
            StepsizeSchedule::SolutionFree { .. } => 1,
            _ => 0,
        }
    }

    fn gap(f_x: f64, f_star: f64) -> Result<f64> {
        if f_x < f_star {
            return Err(Error::InvalidState(format!(
                "f(x_k) = {f_x} lies below the declared optimum {f_star}"
            )));
        }
        Ok(f_x - f_star)
    }

    pub fn alpha(&self, ctx: &mut StepContext<'_>) -> Result<f64> {
        match *self {
            StepsizeSchedule::Fixed { alpha } => Ok(alpha),
            StepsizeSchedule::InvSqrt { alpha0 } => Ok(alpha0 / ((ctx.k + 1) as f64).sqrt()),
            StepsizeSchedule::GapLinear { alpha0, f_star } => {
                Ok(alpha0 * Self::gap(ctx.f_x, f_star)?)
            }
            StepsizeSchedule::GapSqrt {
                theta,
                mu,
                lipschitz,
                lambda,
                f_star,
            } => {
                let gap = Self::gap(ctx.f_x, f_star)?;
                Ok(theta * mu / lipschitz * (2.0 * lambda * gap).sqrt())
            }
            StepsizeSchedule::SolutionFree { lipschitz, t } => {
                if ctx.s.len() != ctx.x.len() {
                    return Err(invalid("direction and point dimensions differ"));
                }
                let shifted: Vec<f64> = ctx.x.iter().zip(ctx.s).map(|(x, s)| x + t * s).collect();
                let f_shift = (ctx.probe)(&shifted)?;
                if !f_shift.is_finite() {
                    return Err(Error::Oracle(format!("probe returned {f_shift}")));
                }
                Ok((f_shift - ctx.f_x).abs() / (lipschitz * t))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alpha_at(schedule: &StepsizeSchedule, k: u64, f_x: f64) -> Result<f64> {
        let mut probe = |_: &[f64]| -> Result<f64> { panic!("no probe expected") };
        let mut ctx = StepContext {
            k,
            f_x,
            x: &[0.0],
            s: &[1.0],
            probe: &mut probe,
        };
        schedule.alpha(&mut ctx)
    }

    #[test]
    fn inv_sqrt_example() {
        let s = StepsizeSchedule::InvSqrt { alpha0: 1.0 };
        assert_eq!(alpha_at(&s, 3, 0.0).unwrap(), 0.5);
        let mut prev = f64::INFINITY;
        for k in 0..50 {
            let a = alpha_at(&s, k, 0.0).unwrap();
            assert!(a < prev);
            prev = a;
        }
    }

    #[test]
    fn gap_linear_vanishes_at_optimum() {
        let s = StepsizeSchedule::GapLinear {
            alpha0: 2.0,
            f_star: 0.0,
        };
        assert_eq!(alpha_at(&s, 0, 0.0).unwrap(), 0.0);
        assert_eq!(alpha_at(&s, 0, 0.25).unwrap(), 0.5);
        assert!(matches!(
            alpha_at(&s, 0, -1e-3),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn gap_sqrt_formula() {
        let s = StepsizeSchedule::GapSqrt {
            theta: 1.0,
            mu: 0.5,
            lipschitz: 4.0,
            lambda: 2.0,
            f_star: -1.0,
        };
        // (1 · 0.5 / 4) · √(2 · 2 · 1) = 0.25
        assert_eq!(alpha_at(&s, 0, 0.0).unwrap(), 0.25);
        assert_eq!(alpha_at(&s, 9, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn fixed_stepsize_from_target_accuracy() {
        let (mu, eps, l) = (0.1, 0.01, 4.0);
        let s = StepsizeSchedule::Fixed {
            alpha: mu * eps / l,
        };
        let a = alpha_at(&s, 7, 3.0).unwrap();
        assert!((a - 2.5e-4).abs() < 1e-18);
    }

    #[test]
    fn solution_free_difference_quotient() {
        let s = StepsizeSchedule::SolutionFree {
            lipschitz: 2.0,
            t: 1e-4,
        };
        let mut calls = 0;
        let mut probe = |x: &[f64]| -> Result<f64> {
            calls += 1;
            Ok(x[0] * x[0])
        };
        let mut ctx = StepContext {
            k: 0,
            f_x: 1.0,
            x: &[1.0],
            s: &[1.0],
            probe: &mut probe,
        };
        let a = s.alpha(&mut ctx).unwrap();
        assert!((a - 1.00005).abs() < 1e-9);
        assert_eq!(calls, 1);
    }

    #[test]
    fn solution_free_propagates_bad_probe() {
        let s = StepsizeSchedule::SolutionFree {
            lipschitz: 1.0,
            t: 1e-4,
        };
        let mut probe = |_: &[f64]| -> Result<f64> { Ok(f64::NAN) };
        let mut ctx = StepContext {
            k: 0,
            f_x: 0.0,
            x: &[0.0],
            s: &[1.0],
            probe: &mut probe,
        };
        assert!(matches!(s.alpha(&mut ctx), Err(Error::Oracle(_))));
    }

    #[test]
    fn validation() {
        assert!(StepsizeSchedule::Fixed { alpha: 0.0 }.validate().is_err());
        assert!(StepsizeSchedule::InvSqrt { alpha0: f64::NAN }
            .validate()
            .is_err());
        let bad_theta = StepsizeSchedule::GapSqrt {
            theta: 2.0,
            mu: 0.1,
            lipschitz: 1.0,
            lambda: 1.0,
            f_star: 0.0,
        };
        assert!(bad_theta.validate().is_err());
        assert!(StepsizeSchedule::SolutionFree {
            lipschitz: 1.0,
            t: 1e-4
        }
        .validate()
        .is_ok());
    }
}
