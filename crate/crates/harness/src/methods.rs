//! The one-line method grammar `method:sampler:schedule:params`.
//!
//! Segments without `=` are positional (method, then sampler, then
//! schedule); segments with `=` carry comma-separated `key=value` parameters.
//! Examples:
//!
//! - `stp:sphere:inv_sqrt:alpha0=1`
//! - `stp:sphere:fixed:alpha=0.1*eps` (the stepsize scales with the tolerance)
//! - `stp:sphere:solution_free:t=1e-4` (`L` from the problem unless `L=` is given)
//! - `pstp:sphere:gap_sqrt:tau=8,theta=1`
//! - `rgf:sphere:mu=1e-4`
//! - `dds:alpha0=1`

use std::collections::BTreeMap;
use std::fmt;

use stp_core::solvers::{rgf_default_alpha, RGF_DEFAULT_MU};
use stp_core::stepsizes::DEFAULT_SOLUTION_FREE_T;
use stp_core::{DirectionLaw, DirectionSampler, Problem, SolverConfig, StepsizeSchedule};

use crate::error::{HarnessError, Result};

/// Methods run when a plan names none: the two STP variants of the
/// benchmark protocol, the solution-free STP, and both baselines.
pub const DEFAULT_METHODS: &[&str] = &[
    "stp:sphere:inv_sqrt:alpha0=1",
    "stp:sphere:fixed:alpha=0.1*eps",
    "stp:sphere:solution_free:t=1e-4",
    "rgf:sphere",
    "dds:alpha0=1",
];

/// A positive parameter, either a constant or a multiple of the tolerance ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scalar {
    Const(f64),
    EpsScaled(f64),
}

impl Scalar {
    fn parse(key: &str, text: &str) -> std::result::Result<Self, String> {
        let number = |s: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .ok_or_else(|| {
                    format!("`{key}` must be a positive number or `c*eps`, got `{text}`")
                })
        };
        let t = text.trim();
        if t == "eps" {
            return Ok(Scalar::EpsScaled(1.0));
        }
        if let Some(c) = t.strip_suffix("*eps") {
            return Ok(Scalar::EpsScaled(number(c)?));
        }
        if let Some(c) = t.strip_prefix("eps*") {
            return Ok(Scalar::EpsScaled(number(c)?));
        }
        Ok(Scalar::Const(number(t)?))
    }

    /// The value for tolerance `eps`.
    pub fn resolve(&self, eps: f64) -> f64 {
        match *self {
            Scalar::Const(v) => v,
            Scalar::EpsScaled(c) => c * eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SamplerKind {
    Sphere,
    Gaussian,
    CoordUniform,
    OracleNgd,
    OracleSignGd,
    OracleNrcd,
    OracleNsgd { noise_scale: f64 },
}

impl SamplerKind {
    pub fn build(&self, dim: usize) -> stp_core::Result<DirectionSampler> {
        let law = match self {
            SamplerKind::Sphere => DirectionLaw::Sphere,
            SamplerKind::Gaussian => DirectionLaw::Gaussian,
            SamplerKind::CoordUniform => DirectionLaw::CoordUniform,
            SamplerKind::OracleNgd => DirectionLaw::OracleNgd,
            SamplerKind::OracleSignGd => DirectionLaw::OracleSignGd,
            SamplerKind::OracleNrcd => DirectionLaw::OracleNrcd,
            SamplerKind::OracleNsgd { noise_scale } => DirectionLaw::OracleNsgd {
                noise_scale: *noise_scale,
            },
        };
        DirectionSampler::new(law, dim)
    }

    fn is_oracle(&self) -> bool {
        !matches!(
            self,
            SamplerKind::Sphere | SamplerKind::Gaussian | SamplerKind::CoordUniform
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleSpec {
    Fixed {
        alpha: Scalar,
    },
    InvSqrt {
        alpha0: Scalar,
    },
    GapLinear {
        alpha0: Scalar,
    },
    GapSqrt {
        theta: Scalar,
    },
    SolutionFree {
        t: Scalar,
        lipschitz: Option<Scalar>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodKind {
    Stp,
    Pstp { tau: usize },
    Rgf { mu: f64, alpha: Option<Scalar> },
    Dds { alpha0: f64 },
}

/// A parsed method string; resolved against each problem and tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSpec {
    text: String,
    kind: MethodKind,
    sampler: Option<SamplerKind>,
    schedule: Option<ScheduleSpec>,
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

struct Params {
    values: BTreeMap<String, String>,
}

impl Params {
    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn scalar(&mut self, key: &str, default: Option<f64>) -> std::result::Result<Scalar, String> {
        match self.take(key) {
            Some(v) => Scalar::parse(key, &v),
            None => default
                .map(Scalar::Const)
                .ok_or_else(|| format!("missing required parameter `{key}`")),
        }
    }

    fn number(&mut self, key: &str, default: f64) -> std::result::Result<f64, String> {
        match self.take(key) {
            Some(v) => v
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x > 0.0 && x.is_finite())
                .ok_or_else(|| format!("`{key}` must be a positive number, got `{v}`")),
            None => Ok(default),
        }
    }
}

fn parse_sampler(name: &str, params: &mut Params) -> std::result::Result<SamplerKind, String> {
    Ok(match name {
        "sphere" => SamplerKind::Sphere,
        "gaussian" => SamplerKind::Gaussian,
        "coord_uniform" => SamplerKind::CoordUniform,
        "oracle_ngd" => SamplerKind::OracleNgd,
        "oracle_signgd" => SamplerKind::OracleSignGd,
        "oracle_nrcd" => SamplerKind::OracleNrcd,
        "oracle_nsgd" => {
            let noise_scale = match params.take("noise") {
                Some(v) => v
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| *x >= 0.0 && x.is_finite())
                    .ok_or_else(|| format!("`noise` must be a nonnegative number, got `{v}`"))?,
                None => 0.1,
            };
            SamplerKind::OracleNsgd { noise_scale }
        }
        "coord_weighted" | "ortho_basis" => {
            return Err(format!(
                "sampler `{name}` needs per-problem weights and is not available in method strings"
            ))
        }
        other => {
            return Err(format!(
                "unknown sampler `{other}` (expected sphere, gaussian, coord_uniform, oracle_ngd, \
                 oracle_signgd, oracle_nrcd, oracle_nsgd)"
            ))
        }
    })
}

fn parse_schedule(name: &str, params: &mut Params) -> std::result::Result<ScheduleSpec, String> {
    Ok(match name {
        "fixed" => ScheduleSpec::Fixed {
            alpha: params.scalar("alpha", None)?,
        },
        "inv_sqrt" => ScheduleSpec::InvSqrt {
            alpha0: params.scalar("alpha0", Some(1.0))?,
        },
        "gap_linear" => ScheduleSpec::GapLinear {
            alpha0: params.scalar("alpha0", None)?,
        },
        "gap_sqrt" => ScheduleSpec::GapSqrt {
            theta: params.scalar("theta", Some(1.0))?,
        },
        "solution_free" => ScheduleSpec::SolutionFree {
            t: params.scalar("t", Some(DEFAULT_SOLUTION_FREE_T))?,
            lipschitz: params.take("L").map(|v| Scalar::parse("L", &v)).transpose()?,
        },
        other => {
            return Err(format!(
                "unknown schedule `{other}` (expected fixed, inv_sqrt, gap_linear, gap_sqrt, solution_free)"
            ))
        }
    })
}

impl MethodSpec {
    /// Parses a method string; errors name the `method` key.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        Self::parse_inner(text)
            .map_err(|m| HarnessError::config("method", format!("`{text}`: {m}")))
    }

    fn parse_inner(text: &str) -> std::result::Result<Self, String> {
        let mut positional: Vec<&str> = Vec::new();
        let mut params = Params {
            values: BTreeMap::new(),
        };
        for segment in text.split(':') {
            let segment = segment.trim();
            if segment.contains('=') {
                for pair in segment.split(',') {
                    let (k, v) = pair
                        .split_once('=')
                        .ok_or_else(|| format!("malformed parameter `{pair}`"))?;
                    let (k, v) = (k.trim(), v.trim());
                    if k.is_empty() || v.is_empty() {
                        return Err(format!("malformed parameter `{pair}`"));
                    }
                    if params.values.insert(k.to_string(), v.to_string()).is_some() {
                        return Err(format!("parameter `{k}` given twice"));
                    }
                }
            } else if !params.values.is_empty() {
                return Err(format!("positional segment `{segment}` after parameters"));
            } else if segment.is_empty() {
                return Err("empty segment".into());
            } else {
                positional.push(segment);
            }
        }
        let name = *positional.first().ok_or("missing method name")?;
        let expect_positional = |max: usize, shape: &str| {
            if positional.len() > max {
                Err(format!("too many segments; expected `{shape}`"))
            } else {
                Ok(())
            }
        };
        let (kind, sampler, schedule) = match name {
            "stp" | "pstp" => {
                expect_positional(3, "method:sampler:schedule:params")?;
                let sampler =
                    parse_sampler(positional.get(1).ok_or("missing sampler")?, &mut params)?;
                let schedule =
                    parse_schedule(positional.get(2).ok_or("missing schedule")?, &mut params)?;
                let kind = if name == "pstp" {
                    let tau = params.take("tau").ok_or("pstp requires `tau`")?;
                    let tau = tau
                        .trim()
                        .parse::<usize>()
                        .ok()
                        .filter(|t| *t >= 1)
                        .ok_or_else(|| format!("`tau` must be a positive integer, got `{tau}`"))?;
                    MethodKind::Pstp { tau }
                } else {
                    MethodKind::Stp
                };
                (kind, Some(sampler), Some(schedule))
            }
            "rgf" => {
                expect_positional(2, "rgf:sphere:params")?;
                let sampler =
                    parse_sampler(positional.get(1).copied().unwrap_or("sphere"), &mut params)?;
                if sampler != SamplerKind::Sphere {
                    return Err("rgf uses sphere directions".into());
                }
                let mu = params.number("mu", RGF_DEFAULT_MU)?;
                if mu >= 1.0 {
                    return Err(format!("`mu` must lie in (0, 1), got {mu}"));
                }
                let alpha = params
                    .take("alpha")
                    .map(|v| Scalar::parse("alpha", &v))
                    .transpose()?;
                (MethodKind::Rgf { mu, alpha }, Some(sampler), None)
            }
            "dds" => {
                expect_positional(1, "dds:params")?;
                let alpha0 = params.number("alpha0", 1.0)?;
                (MethodKind::Dds { alpha0 }, None, None)
            }
            other => {
                return Err(format!(
                    "unknown method `{other}` (expected stp, pstp, rgf, dds)"
                ))
            }
        };
        if let Some(key) = params.values.keys().next() {
            return Err(format!("unknown parameter `{key}` for `{name}`"));
        }
        Ok(MethodSpec {
            text: text.to_string(),
            kind,
            sampler,
            schedule,
        })
    }

    /// The method string as given; used as the solver name in all outputs.
    pub fn name(&self) -> &str {
        &self.text
    }

    pub fn kind(&self) -> &MethodKind {
        &self.kind
    }

    pub fn schedule(&self) -> Option<&ScheduleSpec> {
        self.schedule.as_ref()
    }

    /// A file-name-safe rendering of the method string.
    pub fn slug(&self) -> String {
        self.text
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || "-.=".contains(c) {
                    c
                } else {
                    '_'
                }
            })
            .collect()
    }

    /// Builds the solver configuration for `problem` at tolerance `eps`.
    ///
    /// The error is a human-readable reason for skipping the pair, e.g. a
    /// schedule that needs a Lipschitz constant the problem does not know.
    pub fn resolve(
        &self,
        problem: &Problem,
        eps: f64,
    ) -> std::result::Result<SolverConfig, String> {
        let n = problem.dim();
        let sampler = match &self.sampler {
            Some(kind) => {
                if kind.is_oracle() && !problem.has_gradient() {
                    return Err(
                        "the sampler needs a gradient oracle the problem does not provide".into(),
                    );
                }
                Some(kind.build(n).map_err(|e| e.to_string())?)
            }
            None => None,
        };
        let need = |v: Option<f64>, what: &str| {
            v.ok_or_else(|| {
                format!(
                    "schedule `{}` needs {what}, which the problem does not know",
                    self.schedule_name()
                )
            })
        };
        let schedule = match &self.schedule {
            None => None,
            Some(ScheduleSpec::Fixed { alpha }) => Some(StepsizeSchedule::Fixed {
                alpha: alpha.resolve(eps),
            }),
            Some(ScheduleSpec::InvSqrt { alpha0 }) => Some(StepsizeSchedule::InvSqrt {
                alpha0: alpha0.resolve(eps),
            }),
            Some(ScheduleSpec::GapLinear { alpha0 }) => Some(StepsizeSchedule::GapLinear {
                alpha0: alpha0.resolve(eps),
                f_star: need(problem.f_star(), "f*")?,
            }),
            Some(ScheduleSpec::GapSqrt { theta }) => {
                let mu = sampler
                    .as_ref()
                    .and_then(|s| s.theoretical_mu().ok())
                    .ok_or("schedule `gap_sqrt` needs the constant μ of a random direction law")?;
                Some(StepsizeSchedule::GapSqrt {
                    theta: theta.resolve(eps),
                    mu,
                    lipschitz: need(problem.lipschitz(), "L")?,
                    lambda: need(problem.strong_convexity(), "λ")?,
                    f_star: need(problem.f_star(), "f*")?,
                })
            }
            Some(ScheduleSpec::SolutionFree { t, lipschitz }) => {
                Some(StepsizeSchedule::SolutionFree {
                    lipschitz: match lipschitz {
                        Some(l) => l.resolve(eps),
                        None => need(problem.lipschitz(), "L")?,
                    },
                    t: t.resolve(eps),
                })
            }
        };
        let cfg = match (&self.kind, sampler, schedule) {
            (MethodKind::Stp, Some(s), Some(sch)) => SolverConfig::stp(s, sch),
            (MethodKind::Pstp { tau }, Some(s), Some(sch)) => SolverConfig::pstp(*tau, s, sch),
            (MethodKind::Rgf { mu, alpha }, Some(s), _) => {
                let alpha = alpha.map_or_else(|| rgf_default_alpha(n), |a| a.resolve(eps));
                SolverConfig::rgf(*mu, alpha, s)
            }
            (MethodKind::Dds { alpha0 }, _, _) => SolverConfig::dds(*alpha0),
            _ => unreachable!("parser guarantees sampler and schedule for stp and pstp"),
        };
        cfg.validate(problem).map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    fn schedule_name(&self) -> &'static str {
        match self.schedule {
            Some(ScheduleSpec::Fixed { .. }) => "fixed",
            Some(ScheduleSpec::InvSqrt { .. }) => "inv_sqrt",
            Some(ScheduleSpec::GapLinear { .. }) => "gap_linear",
            Some(ScheduleSpec::GapSqrt { .. }) => "gap_sqrt",
            Some(ScheduleSpec::SolutionFree { .. }) => "solution_free",
            None => "none",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stp_core::chain_quadratic;
    use stp_core::problems::problem_by_name;

    #[test]
    fn parses_protocol_examples() {
        let m = MethodSpec::parse("stp:sphere:inv_sqrt:alpha0=1").unwrap();
        assert_eq!(m.kind(), &MethodKind::Stp);
        assert_eq!(
            m.schedule(),
            Some(&ScheduleSpec::InvSqrt {
                alpha0: Scalar::Const(1.0)
            })
        );
        let m = MethodSpec::parse("pstp:sphere:gap_sqrt:tau=8,theta=0.5").unwrap();
        assert_eq!(m.kind(), &MethodKind::Pstp { tau: 8 });
        let m = MethodSpec::parse("dds").unwrap();
        assert_eq!(m.kind(), &MethodKind::Dds { alpha0: 1.0 });
        assert_eq!(
            MethodSpec::parse("rgf:sphere:mu=1e-3").unwrap().kind(),
            &MethodKind::Rgf {
                mu: 1e-3,
                alpha: None
            }
        );
    }

    #[test]
    fn eps_scaled_stepsize_resolves_per_tolerance() {
        let m = MethodSpec::parse("stp:sphere:fixed:alpha=0.1*eps").unwrap();
        let p = chain_quadratic(5).unwrap();
        for eps in [1e-1, 1e-3, 1e-5] {
            let cfg = m.resolve(&p, eps).unwrap();
            assert_eq!(
                cfg.schedule,
                Some(StepsizeSchedule::Fixed { alpha: 0.1 * eps })
            );
        }
    }

    #[test]
    fn rejects_malformed_strings() {
        for bad in [
            "",
            "newton",
            "stp",
            "stp:sphere",
            "stp:cube:fixed:alpha=1",
            "stp:sphere:fixed",
            "stp:sphere:fixed:alpha=-1",
            "stp:sphere:fixed:alpha=1,beta=2",
            "stp:sphere:fixed:alpha=1,alpha=2",
            "pstp:sphere:fixed:alpha=1",
            "pstp:sphere:fixed:alpha=1,tau=0",
            "rgf:gaussian",
            "rgf:sphere:mu=2",
            "dds:alpha0=0",
            "dds:sphere",
        ] {
            let err = MethodSpec::parse(bad).unwrap_err();
            assert!(
                matches!(err, HarnessError::Config { ref key, .. } if key == "method"),
                "{bad}"
            );
        }
    }

    #[test]
    fn unknown_constants_give_a_skip_reason() {
        let rosenbrock = problem_by_name("rosenbrock_2").unwrap();
        let m = MethodSpec::parse("stp:sphere:solution_free").unwrap();
        let reason = m.resolve(&rosenbrock, 1e-3).unwrap_err();
        assert!(reason.contains('L'), "{reason}");
        let explicit = MethodSpec::parse("stp:sphere:solution_free:L=1").unwrap();
        assert!(explicit.resolve(&rosenbrock, 1e-3).is_ok());
    }

    #[test]
    fn slug_is_file_safe() {
        let m = MethodSpec::parse("stp:sphere:fixed:alpha=0.1*eps").unwrap();
        assert_eq!(m.slug(), "stp_sphere_fixed_alpha=0.1_eps");
    }
}
