//! Direction laws for randomized direct search.
//!
//! A law 𝒟 is characterised by two constants: the second moment
//! `γ = E‖s‖₂²` and the constant `μ` in `E|⟨g, s⟩| ≥ μ‖g‖_𝒟`, where `‖·‖_𝒟` is
//! a norm induced by the law. All built-in random laws have `γ = 1`.
//! The `oracle_*` kinds are not random laws over directions alone: they read
//! the true gradient and reproduce first-order methods inside the three-point
//! framework.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::stats::{Estimate, MeanAccumulator};

#[derive(Debug, Clone)]
pub enum DirectionLaw {
    /// Uniform on the unit Euclidean sphere.
    Sphere,
    /// `N(0, I/n)`.
    Gaussian,
    /// Uniform on `{e₁, …, eₙ}`.
    CoordUniform,
    /// `eᵢ` with probability `pᵢ`.
    CoordWeighted { p: Vec<f64> },
    /// Column `dᵢ` of an orthonormal matrix with probability `pᵢ`.
    OrthoBasis { basis: DMatrix<f64>, p: Vec<f64> },
    /// `g / ‖g‖₂` (normalized gradient descent).
    OracleNgd,
    /// `sign(g)` (signed gradient descent).
    OracleSignGd,
    /// `sign(gᵢ) eᵢ` for a uniform coordinate `i`.
    OracleNrcd,
    /// `(g + noise) / ‖g‖₂` with Gaussian noise of the given scale.
    OracleNsgd { noise_scale: f64 },
}

impl DirectionLaw {
    pub fn name(&self) -> &'static str {
        match self {
            DirectionLaw::Sphere => "sphere",
            DirectionLaw::Gaussian => "gaussian",
            DirectionLaw::CoordUniform => "coord_uniform",
            DirectionLaw::CoordWeighted { .. } => "coord_weighted",
            DirectionLaw::OrthoBasis { .. } => "ortho_basis",
            DirectionLaw::OracleNgd => "oracle_ngd",
            DirectionLaw::OracleSignGd => "oracle_signgd",
            DirectionLaw::OracleNrcd => "oracle_nrcd",
            DirectionLaw::OracleNsgd { .. } => "oracle_nsgd",
        }
    }
}

/// Per-run randomness. Single owner; never shared between runs.
#[derive(Debug, Clone)]
pub struct SampleContext {
    rng: ChaCha8Rng,
}

impl SampleContext {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// A direction law bound to a dimension.
#[derive(Debug, Clone)]
pub struct DirectionSampler {
    law: DirectionLaw,
    dim: usize,
    weights: Option<WeightedIndex<f64>>,
}

fn check_probabilities(p: &[f64], dim: usize) -> Result<()> {
    if p.len() != dim {
        return Err(invalid(format!(
            "probability vector has length {}, expected {dim}",
            p.len()
        )));
    }
    if p.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(invalid("all probabilities must be positive"));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl DirectionSampler {
    pub fn new(law: DirectionLaw, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("direction law dimension must be at least 1"));
        }
        let weights = match &law {
            DirectionLaw::CoordWeighted { p } => {
                check_probabilities(p, dim)?;
                Some(WeightedIndex::new(p).map_err(|e| invalid(e.to_string()))?)
            }
            DirectionLaw::OrthoBasis { basis, p } => {
                check_probabilities(p, dim)?;
                if basis.nrows() != dim || basis.ncols() != dim {
                    return Err(invalid(format!("basis must be {dim}x{dim}")));
                }
                let defect = (basis.tr_mul(basis) - DMatrix::<f64>::identity(dim, dim)).amax();
                if defect > 1e-10 {
                    return Err(invalid(format!(
                        "basis is not orthonormal (|DᵀD − I| = {defect:e})"
                    )));
                }
                Some(WeightedIndex::new(p).map_err(|e| invalid(e.to_string()))?)
            }
            DirectionLaw::OracleNsgd { noise_scale }
                if !(*noise_scale >= 0.0 && noise_scale.is_finite()) =>
            {
                return Err(invalid("noise scale must be nonnegative"));
            }
            _ => None,
        };
        Ok(Self { law, dim, weights })
    }

    pub fn sphere(dim: usize) -> Result<Self> {
        Self::new(DirectionLaw::Sphere, dim)
    }

    pub fn gaussian(dim: usize) -> Result<Self> {
        Self::new(DirectionLaw::Gaussian, dim)
    }

    pub fn coord_uniform(dim: usize) -> Result<Self> {
        Self::new(DirectionLaw::CoordUniform, dim)
    }

    pub fn coord_weighted(p: Vec<f64>) -> Result<Self> {
        let dim = p.len();
        Self::new(DirectionLaw::CoordWeighted { p }, dim)
    }

    pub fn ortho_basis(basis: DMatrix<f64>, p: Vec<f64>) -> Result<Self> {
        let dim = p.len();
        Self::new(DirectionLaw::OrthoBasis { basis, p }, dim)
    }

    pub fn law(&self) -> &DirectionLaw {
        &self.law
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &'static str {
        self.law.name()
    }

    /// True for the kinds that read the true gradient.
    pub fn is_oracle(&self) -> bool {
        matches!(
            self.law,
            DirectionLaw::OracleNgd
                | DirectionLaw::OracleSignGd
                | DirectionLaw::OracleNrcd
                | DirectionLaw::OracleNsgd { .. }
        )
    }

    /// Directions with `‖s‖₂ = 1` for every draw.
    pub fn has_unit_samples(&self) -> bool {
        matches!(
            self.law,
            DirectionLaw::Sphere
                | DirectionLaw::CoordUniform
                | DirectionLaw::CoordWeighted { .. }
                | DirectionLaw::OrthoBasis { .. }
        )
    }

    fn require_random_law(&self, what: &str) -> Result<()> {
        if self.is_oracle() {
            return Err(Error::Unsupported(format!(
                "{what} is not defined for {}",
                self.name()
            )));
        }
        Ok(())
    }

    pub fn sample(&self, ctx: &mut SampleContext, gradient: Option<&[f64]>) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.sample_into(ctx, gradient, &mut out)?;
        Ok(out)
    }

    /// Draws one direction into `out`. Oracle kinds need `gradient`; the random
    /// laws ignore it.
    pub fn sample_into(
        &self,
        ctx: &mut SampleContext,
        gradient: Option<&[f64]>,
        out: &mut [f64],
    ) -> Result<()> {
        if out.len() != self.dim {
            return Err(invalid(format!(
                "output buffer has length {}, expected {}",
                out.len(),
                self.dim
            )));
        }
        let rng = &mut ctx.rng;
        match &self.law {
            DirectionLaw::Sphere => loop {
                for v in out.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let r = norm2(out);
                if r > 0.0 {
                    out.iter_mut().for_each(|v| *v /= r);
                    return Ok(());
                }
            },
            DirectionLaw::Gaussian => {
                let scale = (self.dim as f64).sqrt().recip();
                for v in out.iter_mut() {
                    *v = rng.sample::<f64, _>(StandardNormal) * scale;
                }
            }
            DirectionLaw::CoordUniform => {
                out.fill(0.0);
                out[rng.random_range(0..self.dim)] = 1.0;
            }
            DirectionLaw::CoordWeighted { .. } => {
                out.fill(0.0);
                out[self.pick(rng)] = 1.0;
            }
            DirectionLaw::OrthoBasis { basis, .. } => {
                let i = self.pick(rng);
                out.copy_from_slice(basis.column(i).as_slice());
            }
            oracle => {
                let g = gradient
                    .ok_or_else(|| invalid(format!("{} requires a gradient", oracle.name())))?;
                if g.len() != self.dim {
                    return Err(invalid(format!(
                        "gradient has length {}, expected {}",
                        g.len(),
                        self.dim
                    )));
                }
                let gnorm = norm2(g);
                if gnorm == 0.0 {
                    return Err(Error::Stationary);
                }
                match oracle {
                    DirectionLaw::OracleNgd => {
                        for (o, gi) in out.iter_mut().zip(g) {
                            *o = gi / gnorm;
                        }
                    }
                    DirectionLaw::OracleSignGd => {
                        for (o, gi) in out.iter_mut().zip(g) {
                            *o = sign(*gi);
                        }
                    }
                    DirectionLaw::OracleNrcd => {
                        out.fill(0.0);
                        let i = rng.random_range(0..self.dim);
                        out[i] = sign(g[i]);
                    }
                    DirectionLaw::OracleNsgd { noise_scale } => {
                        let scale = noise_scale / (self.dim as f64).sqrt();
                        for (o, gi) in out.iter_mut().zip(g) {
                            let z: f64 = rng.sample(StandardNormal);
                            *o = (gi + scale * z) / gnorm;
                        }
                    }
                    _ => unreachable!("random laws handled above"),
                }
            }
        }
        Ok(())
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> usize {
        self.weights
            .as_ref()
            .expect("weighted laws carry their index")
            .sample(rng)
    }

    /// The law's induced norm `‖g‖_𝒟`. Oracle kinds are analysed in `‖·‖₂`.
    pub fn d_norm(&self, g: &[f64]) -> Result<f64> {
        if g.len() != self.dim {
            return Err(invalid(format!(
                "vector has length {}, expected {}",
                g.len(),
                self.dim
            )));
        }
        Ok(match &self.law {
            DirectionLaw::CoordUniform => g.iter().map(|v| v.abs()).sum(),
            DirectionLaw::CoordWeighted { p } => {
                p.iter().zip(g).map(|(pi, gi)| pi * gi.abs()).sum()
            }
            DirectionLaw::OrthoBasis { basis, p } => p
                .iter()
                .enumerate()
                .map(|(i, pi)| {
                    let inner: f64 = basis.column(i).iter().zip(g).map(|(d, v)| d * v).sum();
                    pi * inner.abs()
                })
                .sum(),
            _ => norm2(g),
        })
    }

    /// The constant `μ` with `E|⟨g, s⟩| = μ‖g‖_𝒟` for the random laws.
    pub fn theoretical_mu(&self) -> Result<f64> {
        self.require_random_law("theoretical_mu")?;
        let n = self.dim as f64;
        Ok(match self.law {
            DirectionLaw::Sphere => sphere_mu(self.dim),
            DirectionLaw::Gaussian => (2.0 / (n * std::f64::consts::PI)).sqrt(),
            DirectionLaw::CoordUniform => 1.0 / n,
            _ => 1.0,
        })
    }

    /// Monte-Carlo estimate of `γ = E‖s‖₂²`.
    pub fn gamma_check(&self, n_samples: usize, ctx: &mut SampleContext) -> Result<Estimate> {
        self.require_random_law("gamma_check")?;
        if n_samples == 0 {
            return Err(invalid("n_samples must be positive"));
        }
        let mut s = vec![0.0; self.dim];
        let mut acc = MeanAccumulator::new();
        for _ in 0..n_samples {
            self.sample_into(ctx, None, &mut s)?;
            acc.push(s.iter().map(|v| v * v).sum());
        }
        Ok(acc.estimate())
    }

    /// Monte-Carlo estimate of `E|⟨g, s⟩|`.
    pub fn mc_expected_abs_inner(
        &self,
        g: &[f64],
        n_samples: usize,
        ctx: &mut SampleContext,
    ) -> Result<Estimate> {
        self.require_random_law("mc_expected_abs_inner")?;
        if n_samples == 0 {
            return Err(invalid("n_samples must be positive"));
        }
        if g.len() != self.dim {
            return Err(invalid(format!(
                "vector has length {}, expected {}",
                g.len(),
                self.dim
            )));
        }
        if g.iter().all(|v| *v == 0.0) {
            return Err(invalid("g must be nonzero"));
        }
        let mut s = vec![0.0; self.dim];
        let mut acc = MeanAccumulator::new();
        for _ in 0..n_samples {
            self.sample_into(ctx, None, &mut s)?;
            acc.push(s.iter().zip(g).map(|(a, b)| a * b).sum::<f64>().abs());
        }
        Ok(acc.estimate())
    }

    /// Monte-Carlo estimate of `E‖(1/τ) Σᵢ sᵢ‖₂²` over `τ` independent draws.
    pub fn averaged_second_moment(
        &self,
        tau: usize,
        n_samples: usize,
        ctx: &mut SampleContext,
    ) -> Result<Estimate> {
        self.require_random_law("averaged_second_moment")?;
        if n_samples == 0 || tau == 0 {
            return Err(invalid("tau and n_samples must be positive"));
        }
        let mut s = vec![0.0; self.dim];
        let mut avg = vec![0.0; self.dim];
        let mut acc = MeanAccumulator::new();
        for _ in 0..n_samples {
            average_directions(self, ctx, None, tau, &mut s, &mut avg)?;
            acc.push(avg.iter().map(|v| v * v).sum());
        }
        Ok(acc.estimate())
    }
}

/// Averages `tau` independent draws into `avg`; `scratch` holds each draw.
pub(crate) fn average_directions(
    sampler: &DirectionSampler,
    ctx: &mut SampleContext,
    gradient: Option<&[f64]>,
    tau: usize,
    scratch: &mut [f64],
    avg: &mut [f64],
) -> Result<()> {
    avg.fill(0.0);
    for _ in 0..tau {
        sampler.sample_into(ctx, gradient, scratch)?;
        for (a, s) in avg.iter_mut().zip(scratch.iter()) {
            *a += s;
        }
    }
    let inv = 1.0 / tau as f64;
    avg.iter_mut().for_each(|a| *a *= inv);
    Ok(())
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// A random orthogonal matrix, reproducible from `seed`, for building
/// [`DirectionLaw::OrthoBasis`] samplers.
pub fn random_orthonormal_basis(n: usize, seed: u64) -> DMatrix<f64> {
    crate::problems::random_orthogonal(n, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// `E|s₁|` for `s` uniform on the unit sphere in `ℝⁿ`:
/// `Γ(n/2) / (√π Γ((n+1)/2))`, evaluated through log-Gamma.
pub fn sphere_mu(n: usize) -> f64 {
    let n = n as f64;
    (libm::lgamma(n / 2.0) - libm::lgamma((n + 1.0) / 2.0)).exp() / std::f64::consts::PI.sqrt()
}

/// The asymptotic sphere constant `1/√(2πn)` quoted alongside the exact one in
/// validation reports.
pub fn sphere_mu_asymptotic(n: usize) -> f64 {
    1.0 / (2.0 * std::f64::consts::PI * n as f64).sqrt()
}
