//! Smooth test objectives with exact evaluation counting.
//!
//! Every [`Problem`] carries its starting point and whatever reference data is
//! known about it: the optimal value, a minimizer, the gradient Lipschitz
//! constant and the strong convexity modulus. Unknown constants are `None` and
//! are never guessed.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};

/// Number of objective evaluations charged to one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct EvalCounter(u64);

impl EvalCounter {
    pub fn new() -> Self {
        Self(0)
    }

    pub fn count(&self) -> u64 {
        self.0
    }

    fn bump(&mut self) {
        self.0 += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConvexityClass {
    Nonconvex,
    Convex,
    StronglyConvex,
}

impl ConvexityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConvexityClass::Nonconvex => "nonconvex",
            ConvexityClass::Convex => "convex",
            ConvexityClass::StronglyConvex => "strongly_convex",
        }
    }

    /// Strongly convex problems are also convex.
    pub fn is_convex(&self) -> bool {
        !matches!(self, ConvexityClass::Nonconvex)
    }
}

impl fmt::Display for ConvexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

type ScalarFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VectorFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// `½ (x − c)ᵀ H (x − c) + f_min` with a dense symmetric `H`.
#[derive(Debug)]
struct QuadraticForm {
    hessian: DMatrix<f64>,
    center: DVector<f64>,
    f_min: f64,
}

/// `½ ‖A x − b‖²`.
#[derive(Debug)]
struct LeastSquares {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

/// `log Σᵢ exp(aᵢᵀx − bᵢ)`.
#[derive(Debug)]
struct LogSumExp {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

#[derive(Clone)]
enum Objective {
    ChainQuadratic,
    Quadratic(Arc<QuadraticForm>),
    LeastSquares(Arc<LeastSquares>),
    LogSumExp(Arc<LogSumExp>),
    ExtendedRosenbrock,
    ExtendedPowellSingular,
    Beale,
    Trigonometric,
    VariablyDimensioned,
    BroydenTridiagonal,
    DiscreteBoundaryValue,
    Custom {
        value: Arc<ScalarFn>,
        gradient: Option<Arc<VectorFn>>,
    },
}

/// A smooth objective together with its reference metadata.
///
/// Problems are immutable; the evaluation counter is owned by the caller so
/// one problem can be shared by concurrent runs.
#[derive(Clone)]
pub struct Problem {
    name: String,
    dim: usize,
    x0: Vec<f64>,
    f_star: Option<f64>,
    x_star: Option<Vec<f64>>,
    lipschitz: Option<f64>,
    strong_convexity: Option<f64>,
    convexity: ConvexityClass,
    objective: Objective,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("f_star", &self.f_star)
            .field("lipschitz", &self.lipschitz)
            .field("strong_convexity", &self.strong_convexity)
            .field("convexity", &self.convexity)
            .finish()
    }
}

impl Problem {
    /// Builds a problem from closures. Used for ad-hoc objectives in tests and
    /// demos; reference constants can be attached with the `with_*` methods.
    pub fn from_fn<F>(name: &str, x0: Vec<f64>, value: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        if x0.is_empty() {
            return Err(invalid("problem dimension must be at least 1"));
        }
        Ok(Self {
            name: name.to_string(),
            dim: x0.len(),
            x0,
            f_star: None,
            x_star: None,
            lipschitz: None,
            strong_convexity: None,
            convexity: ConvexityClass::Nonconvex,
            objective: Objective::Custom {
                value: Arc::new(value),
                gradient: None,
            },
        })
    }

    pub fn with_gradient<G>(mut self, gradient: G) -> Self
    where
        G: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        if let Objective::Custom { gradient: g, .. } = &mut self.objective {
            *g = Some(Arc::new(gradient));
        }
        self
    }

    pub fn with_f_star(mut self, f_star: f64) -> Self {
        self.f_star = Some(f_star);
        self
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = Some(lipschitz);
        self
    }

    pub fn with_strong_convexity(mut self, lambda: f64) -> Self {
        self.strong_convexity = Some(lambda);
        self
    }

    pub fn with_convexity(mut self, class: ConvexityClass) -> Self {
        self.convexity = class;
        self
    }

    /// Replaces the starting point.
    pub fn with_start(mut self, x0: Vec<f64>) -> Result<Self> {
        self.check_point(&x0)?;
        self.x0 = x0;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn x0(&self) -> &[f64] {
        &self.x0
    }

    pub fn f_star(&self) -> Option<f64> {
        self.f_star
    }

    pub fn x_star(&self) -> Option<&[f64]> {
        self.x_star.as_deref()
    }

    pub fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn strong_convexity(&self) -> Option<f64> {
        self.strong_convexity
    }

    pub fn convexity(&self) -> ConvexityClass {
        self.convexity
    }

    pub fn has_gradient(&self) -> bool {
        !matches!(self.objective, Objective::Custom { gradient: None, .. })
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(invalid(format!(
                "{}: expected a point of dimension {}, got {}",
                self.name,
                self.dim,
                x.len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "{}: non-finite component x[{i}] = {}",
                self.name, x[i]
            )));
        }
        Ok(())
    }

    /// Evaluates the objective and charges one evaluation to `counter`.
    pub fn eval(&self, x: &[f64], counter: &mut EvalCounter) -> Result<f64> {
        self.check_point(x)?;
        counter.bump();
        Ok(self.value_unchecked(x))
    }

    /// Analytic gradient. Not charged to any evaluation budget.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        self.gradient_unchecked(x)
            .ok_or_else(|| Error::Unsupported(format!("{} has no analytic gradient", self.name)))
    }

    /// Central-difference gradient with step `h`; costs `2·dim` evaluations.
    pub fn finite_diff_grad(
        &self,
        x: &[f64],
        h: f64,
        counter: &mut EvalCounter,
    ) -> Result<Vec<f64>> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!(
                "finite-difference step must be positive, got {h}"
            )));
        }
        self.check_point(x)?;
        let mut probe = x.to_vec();
        let mut out = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            probe[i] = x[i] + h;
            let up = self.eval(&probe, counter)?;
            probe[i] = x[i] - h;
            let down = self.eval(&probe, counter)?;
            probe[i] = x[i];
            out.push((up - down) / (2.0 * h));
        }
        Ok(out)
    }

    fn value_unchecked(&self, x: &[f64]) -> f64 {
        match &self.objective {
            Objective::ChainQuadratic => chain_value(x),
            Objective::Quadratic(q) => {
                let d = DVector::from_column_slice(x) - &q.center;
                0.5 * d.dot(&(&q.hessian * &d)) + q.f_min
            }
            Objective::LeastSquares(ls) => {
                let r = &ls.a * DVector::from_column_slice(x) - &ls.b;
                0.5 * r.norm_squared()
            }
            Objective::LogSumExp(lse) => {
                let z = &lse.a * DVector::from_column_slice(x) - &lse.b;
                log_sum_exp(z.as_slice())
            }
            Objective::ExtendedRosenbrock => x
                .chunks_exact(2)
                .map(|p| {
                    let t1 = 10.0 * (p[1] - p[0] * p[0]);
                    let t2 = 1.0 - p[0];
                    t1 * t1 + t2 * t2
                })
                .sum(),
            Objective::ExtendedPowellSingular => x
                .chunks_exact(4)
                .map(|p| {
                    let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
                    (a + 10.0 * b).powi(2)
                        + 5.0 * (c - d).powi(2)
                        + (b - 2.0 * c).powi(4)
                        + 10.0 * (a - d).powi(4)
                })
                .sum(),
            Objective::Beale => {
                let (x1, x2) = (x[0], x[1]);
                BEALE_Y
                    .iter()
                    .enumerate()
                    .map(|(i, y)| {
                        let r = y - x1 * (1.0 - x2.powi(i as i32 + 1));
                        r * r
                    })
                    .sum()
            }
            Objective::Trigonometric => trigonometric_residuals(x).iter().map(|r| r * r).sum(),
            Objective::VariablyDimensioned => {
                let s = weighted_excess(x);
                x.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() + s * s + s.powi(4)
            }
            Objective::BroydenTridiagonal => broyden_residuals(x).iter().map(|r| r * r).sum(),
            Objective::DiscreteBoundaryValue => boundary_residuals(x).iter().map(|r| r * r).sum(),
            Objective::Custom { value, .. } => value(x),
        }
    }

    fn gradient_unchecked(&self, x: &[f64]) -> Option<Vec<f64>> {
        let g = match &self.objective {
            Objective::ChainQuadratic => {
                let mut g = tridiag_apply(x);
                g[0] -= 1.0;
                g
            }
            Objective::Quadratic(q) => {
                let d = DVector::from_column_slice(x) - &q.center;
                (&q.hessian * d).as_slice().to_vec()
            }
            Objective::LeastSquares(ls) => {
                let r = &ls.a * DVector::from_column_slice(x) - &ls.b;
                ls.a.tr_mul(&r).as_slice().to_vec()
            }
            Objective::LogSumExp(lse) => {
                let z = &lse.a * DVector::from_column_slice(x) - &lse.b;
                let p = softmax(z.as_slice());
                lse.a.tr_mul(&DVector::from_vec(p)).as_slice().to_vec()
            }
            Objective::ExtendedRosenbrock => {
                let mut g = vec![0.0; x.len()];
                for (gp, p) in g.chunks_exact_mut(2).zip(x.chunks_exact(2)) {
                    let t1 = 10.0 * (p[1] - p[0] * p[0]);
                    let t2 = 1.0 - p[0];
                    gp[0] = -40.0 * p[0] * t1 - 2.0 * t2;
                    gp[1] = 20.0 * t1;
                }
                g
            }
            Objective::ExtendedPowellSingular => {
                let mut g = vec![0.0; x.len()];
                for (gp, p) in g.chunks_exact_mut(4).zip(x.chunks_exact(4)) {
                    let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
                    let t1 = a + 10.0 * b;
                    let t2 = c - d;
                    let t3 = (b - 2.0 * c).powi(3);
                    let t4 = (a - d).powi(3);
                    gp[0] = 2.0 * t1 + 40.0 * t4;
                    gp[1] = 20.0 * t1 + 4.0 * t3;
                    gp[2] = 10.0 * t2 - 8.0 * t3;
                    gp[3] = -10.0 * t2 - 40.0 * t4;
                }
                g
            }
            Objective::Beale => {
                let (x1, x2) = (x[0], x[1]);
                let mut g = vec![0.0; 2];
                for (i, y) in BEALE_Y.iter().enumerate() {
                    let e = i as i32 + 1;
                    let r = y - x1 * (1.0 - x2.powi(e));
                    g[0] += 2.0 * r * -(1.0 - x2.powi(e));
                    g[1] += 2.0 * r * x1 * f64::from(e) * x2.powi(e - 1);
                }
                g
            }
            Objective::Trigonometric => {
                let r = trigonometric_residuals(x);
                let total: f64 = r.iter().sum();
                x.iter()
                    .enumerate()
                    .map(|(j, &xj)| {
                        let idx = (j + 1) as f64;
                        2.0 * xj.sin() * total + 2.0 * r[j] * (idx * xj.sin() - xj.cos())
                    })
                    .collect()
            }
            Objective::VariablyDimensioned => {
                let s = weighted_excess(x);
                let outer = 2.0 * s + 4.0 * s.powi(3);
                x.iter()
                    .enumerate()
                    .map(|(j, v)| 2.0 * (v - 1.0) + outer * (j + 1) as f64)
                    .collect()
            }
            Objective::BroydenTridiagonal => {
                let r = broyden_residuals(x);
                let n = x.len();
                (0..n)
                    .map(|j| {
                        let mut g = 2.0 * r[j] * (3.0 - 4.0 * x[j]);
                        if j + 1 < n {
                            g -= 2.0 * r[j + 1];
                        }
                        if j > 0 {
                            g -= 4.0 * r[j - 1];
                        }
                        g
                    })
                    .collect()
            }
            Objective::DiscreteBoundaryValue => {
                let r = boundary_residuals(x);
                let n = x.len();
                let h = 1.0 / (n as f64 + 1.0);
                (0..n)
                    .map(|j| {
                        let t = (j + 1) as f64 * h;
                        let d = 2.0 + 1.5 * h * h * (x[j] + t + 1.0).powi(2);
                        let mut g = 2.0 * r[j] * d;
                        if j + 1 < n {
                            g -= 2.0 * r[j + 1];
                        }
                        if j > 0 {
                            g -= 2.0 * r[j - 1];
                        }
                        g
                    })
                    .collect()
            }
            Objective::Custom { gradient, .. } => return gradient.as_ref().map(|g| g(x)),
        };
        Some(g)
    }
}

const BEALE_Y: [f64; 3] = [1.5, 2.25, 2.625];

fn chain_value(x: &[f64]) -> f64 {
    let n = x.len();
    let inner: f64 = x.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
    0.5 * x[0] * x[0] + 0.5 * inner + 0.5 * x[n - 1] * x[n - 1] - x[0]
}

/// `tridiag(−1, 2, −1) · x`.
fn tridiag_apply(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] } else { 0.0 };
            2.0 * x[i] - left - right
        })
        .collect()
}

/// Thomas algorithm for `tridiag(−1, 2, −1) · x = rhs`.
fn tridiag_solve(rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = -1.0 / 2.0;
    d[0] = rhs[0] / 2.0;
    for i in 1..n {
        let m = 2.0 + c[i - 1];
        c[i] = -1.0 / m;
        d[i] = (rhs[i] + d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|v| v / total).collect()
}

fn trigonometric_residuals(x: &[f64]) -> Vec<f64> {
    let n = x.len() as f64;
    let cos_sum: f64 = x.iter().map(|v| v.cos()).sum();
    x.iter()
        .enumerate()
        .map(|(i, v)| n - cos_sum + (i + 1) as f64 * (1.0 - v.cos()) - v.sin())
        .collect()
}

fn weighted_excess(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(j, v)| (j + 1) as f64 * (v - 1.0))
        .sum()
}

fn broyden_residuals(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] } else { 0.0 };
            (3.0 - 2.0 * x[i]) * x[i] - left - 2.0 * right + 1.0
        })
        .collect()
}

fn boundary_residuals(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h = 1.0 / (n as f64 + 1.0);
    (0..n)
        .map(|i| {
            let t = (i + 1) as f64 * h;
            let left = if i > 0 { x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] } else { 0.0 };
            2.0 * x[i] - left - right + h * h * (x[i] + t + 1.0).powi(3) / 2.0
        })
        .collect()
}

fn base(name: String, x0: Vec<f64>, objective: Objective, convexity: ConvexityClass) -> Problem {
    Problem {
        name,
        dim: x0.len(),
        x0,
        f_star: None,
        x_star: None,
        lipschitz: None,
        strong_convexity: None,
        convexity,
        objective,
    }
}

/// `½x₁² + ½Σ(xᵢ₊₁ − xᵢ)² + ½xₙ² − x₁`, started at the origin.
///
/// The Hessian is `tridiag(−1, 2, −1)` with eigenvalues `2 − 2cos(kπ/(n+1))`,
/// which gives `L` and `λ` in closed form. The minimizer solves `A x = e₁`.
pub fn chain_quadratic(n: usize) -> Result<Problem> {
    if n == 0 {
        return Err(invalid("chain quadratic needs n >= 1"));
    }
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let x_star = tridiag_solve(&e1);
    let theta = std::f64::consts::PI / (n as f64 + 1.0);
    let eig = |k: usize| 2.0 - 2.0 * (k as f64 * theta).cos();
    let mut p = base(
        format!("chain_quadratic_{n}"),
        vec![0.0; n],
        Objective::ChainQuadratic,
        ConvexityClass::StronglyConvex,
    );
    p.f_star = Some(-0.5 * x_star[0]);
    p.x_star = Some(x_star);
    p.lipschitz = Some(eig(n));
    p.strong_convexity = Some(eig(1));
    Ok(p)
}

fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub(crate) fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let qr = gaussian_matrix(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    // Fix column signs so the factor is unique.
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Rotated quadratic `½(x − 1)ᵀ Q Λ Qᵀ (x − 1)` with a log-spaced spectrum
/// between `lambda_min` and `lambda_max`, started at the origin.
pub fn spectral_quadratic(
    n: usize,
    lambda_min: f64,
    lambda_max: f64,
    seed: u64,
) -> Result<Problem> {
    if n == 0 {
        return Err(invalid("quadratic needs n >= 1"));
    }
    if !(lambda_min > 0.0 && lambda_max >= lambda_min) {
        return Err(invalid(
            "spectrum must satisfy 0 < lambda_min <= lambda_max",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_orthogonal(n, &mut rng);
    let ratio = lambda_max / lambda_min;
    let spectrum = DVector::from_fn(n, |i, _| {
        if n == 1 {
            lambda_min
        } else {
            lambda_min * ratio.powf(i as f64 / (n - 1) as f64)
        }
    });
    let hessian = &q * DMatrix::from_diagonal(&spectrum) * q.transpose();
    let hessian = (&hessian + hessian.transpose()) * 0.5;
    let center = DVector::from_element(n, 1.0);
    let mut p = base(
        format!("quadratic_{n}"),
        vec![0.0; n],
        Objective::Quadratic(Arc::new(QuadraticForm {
            hessian,
            center: center.clone(),
            f_min: 0.0,
        })),
        ConvexityClass::StronglyConvex,
    );
    p.f_star = Some(0.0);
    p.x_star = Some(center.as_slice().to_vec());
    p.lipschitz = Some(lambda_max);
    p.strong_convexity = Some(lambda_min);
    Ok(p)
}

/// Overdetermined least squares `½‖Ax − b‖²` with `A` a seeded Gaussian
/// `2n × n` matrix scaled by `1/√(2n)`; the optimum comes from the normal
/// equations and `L`, `λ` from the spectrum of `AᵀA`.
pub fn least_squares(n: usize, seed: u64) -> Result<Problem> {
    if n == 0 {
        return Err(invalid("least squares needs n >= 1"));
    }
    let m = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(m, n, &mut rng) / (m as f64).sqrt();
    let b = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
    let ata = a.tr_mul(&a);
    let x_star = ata
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidState("least squares design is rank deficient".into()))?
        .solve(&a.tr_mul(&b));
    let eig = ata.symmetric_eigenvalues();
    let f_star = 0.5 * (&a * &x_star - &b).norm_squared();
    let mut p = base(
        format!("least_squares_{n}"),
        vec![0.0; n],
        Objective::LeastSquares(Arc::new(LeastSquares { a, b })),
        ConvexityClass::StronglyConvex,
    );
    p.f_star = Some(f_star);
    p.x_star = Some(x_star.as_slice().to_vec());
    p.lipschitz = Some(eig.max());
    p.strong_convexity = Some(eig.min());
    Ok(p)
}

/// `log Σ exp(aᵢᵀx − bᵢ)` over `2n` rows `±aᵢ`, which keeps it coercive.
///
/// Convex but not strongly convex. `f*` is found by damped Newton; `L` is the
/// smaller of `‖A‖₂²` and `maxᵢ‖aᵢ‖²`, both valid bounds on the Hessian.
pub fn log_sum_exp_problem(n: usize, seed: u64) -> Result<Problem> {
    if n == 0 {
        return Err(invalid("log-sum-exp needs n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = gaussian_matrix(n, n, &mut rng) / (n as f64).sqrt();
    let a = DMatrix::from_fn(2 * n, n, |i, j| {
        if i < n {
            half[(i, j)]
        } else {
            -half[(i - n, j)]
        }
    });
    let b = DVector::from_fn(2 * n, |_, _| {
        let u: f64 = StandardNormal.sample(&mut rng);
        0.5 * u
    });
    let lse = LogSumExp { a, b };
    let x_star = newton_log_sum_exp(&lse)?;
    let z = &lse.a * &x_star - &lse.b;
    let f_star = log_sum_exp(z.as_slice());
    let spectral = lse.a.tr_mul(&lse.a).symmetric_eigenvalues().max();
    let row_max = lse
        .a
        .row_iter()
        .map(|r| r.norm_squared())
        .fold(0.0, f64::max);
    let mut p = base(
        format!("log_sum_exp_{n}"),
        vec![0.0; n],
        Objective::LogSumExp(Arc::new(lse)),
        ConvexityClass::Convex,
    );
    p.f_star = Some(f_star);
    p.x_star = Some(x_star.as_slice().to_vec());
    p.lipschitz = Some(spectral.min(row_max));
    Ok(p)
}

fn newton_log_sum_exp(lse: &LogSumExp) -> Result<DVector<f64>> {
    let n = lse.a.ncols();
    let value = |x: &DVector<f64>| log_sum_exp((&lse.a * x - &lse.b).as_slice());
    let mut x = DVector::zeros(n);
    for _ in 0..200 {
        let z = &lse.a * &x - &lse.b;
        let p = DVector::from_vec(softmax(z.as_slice()));
        let g = lse.a.tr_mul(&p);
        if g.norm() < 1e-14 {
            return Ok(x);
        }
        let weighted = DMatrix::from_fn(lse.a.nrows(), n, |i, j| p[i] * lse.a[(i, j)]);
        let ap = lse.a.tr_mul(&p);
        let h = lse.a.tr_mul(&weighted) - &ap * ap.transpose();
        let step = h
            .cholesky()
            .ok_or_else(|| Error::InvalidState("log-sum-exp Hessian is singular".into()))?
            .solve(&g);
        let f = value(&x);
        let slope = g.dot(&step);
        let mut t = 1.0;
        while value(&(&x - &step * t)) > f - 0.25 * t * slope && t > 1e-12 {
            t *= 0.5;
        }
        x -= step * t;
    }
    Ok(x)
}

/// Extended Rosenbrock (`n` even), `x0 = (−1.2, 1, …)`, `f* = 0` at the ones vector.
pub fn extended_rosenbrock(n: usize) -> Result<Problem> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(invalid("extended Rosenbrock needs an even dimension"));
    }
    let x0 = (0..n)
        .map(|i| if i % 2 == 0 { -1.2 } else { 1.0 })
        .collect();
    let mut p = base(
        format!("rosenbrock_{n}"),
        x0,
        Objective::ExtendedRosenbrock,
        ConvexityClass::Nonconvex,
    );
    p.f_star = Some(0.0);
    p.x_star = Some(vec![1.0; n]);
    Ok(p)
}

/// Extended Powell singular (`n` divisible by 4), `f* = 0` at the origin.
pub fn extended_powell_singular(n: usize) -> Result<Problem> {
    if n == 0 || !n.is_multiple_of(4) {
        return Err(invalid(
            "extended Powell singular needs a dimension divisible by 4",
        ));
    }
    let x0 = (0..n).map(|i| [3.0, -1.0, 0.0, 1.0][i % 4]).collect();
    let mut p = base(
        format!("powell_singular_{n}"),
        x0,
        Objective::ExtendedPowellSingular,
        ConvexityClass::Convex,
    );
    p.f_star = Some(0.0);
    p.x_star = Some(vec![0.0; n]);
    Ok(p)
}

/// Beale, `x0 = (1, 1)`, `f* = 0` at `(3, ½)`.
pub fn beale() -> Problem {
    let mut p = base(
        "beale_2".into(),
        vec![1.0, 1.0],
        Objective::Beale,
        ConvexityClass::Nonconvex,
    );
    p.f_star = Some(0.0);
    p.x_star = Some(vec![3.0, 0.5]);
    p
}

/// Trigonometric, `x0 = (1/n, …)`, `f* = 0` at the origin.
pub fn trigonometric(n: usize) -> Result<Problem> {
    if n == 0 {
        return Err(invalid("trigonometric needs n >= 1"));
    }
    let mut p = base(
        format!("trigonometric_{n}"),
        vec![1.0 / n as f64; n],
        Objective::Trigonometric,
        ConvexityClass::Nonconvex,
    );
    p.f_star = Some(0.0);
    p.x_star = Some(vec![0.0; n]);
    Ok(p)
}

/// Variably dimensioned, `x0ⱼ = 1 − j/n`, `f* = 0` at the ones vector.
pub fn variably_dimensioned(n: usize) -> Result<Problem> {
    if n == 0 {
        return Err(invalid("variably dimensioned needs n >= 1"));
    }
    let x0 = (1..=n).map(|j| 1.0 - j as f64 / n as f64).collect();
    let mut p = base(
        format!("variably_dimensioned_{n}"),
        x0,
        Objective::VariablyDimensioned,
        ConvexityClass::Convex,
    );
    p.f_star = Some(0.0);
    p.x_star = Some(vec![1.0; n]);
    Ok(p)
}

/// Broyden tridiagonal, `x0 = (−1, …)`, `f* = 0`.
pub fn broyden_tridiagonal(n: usize) -> Result<Problem> {
    if n == 0 {
        return Err(invalid("Broyden tridiagonal needs n >= 1"));
    }
    let mut p = base(
        format!("broyden_tridiagonal_{n}"),
        vec![-1.0; n],
        Objective::BroydenTridiagonal,
        ConvexityClass::Nonconvex,
    );
    p.f_star = Some(0.0);
    Ok(p)
}

/// Discrete boundary value, `x0ⱼ = tⱼ(tⱼ − 1)` with `tⱼ = j/(n+1)`, `f* = 0`.
pub fn discrete_boundary_value(n: usize) -> Result<Problem> {
    if n == 0 {
        return Err(invalid("discrete boundary value needs n >= 1"));
    }
    let h = 1.0 / (n as f64 + 1.0);
    let x0 = (1..=n)
        .map(|j| {
            let t = j as f64 * h;
            t * (t - 1.0)
        })
        .collect();
    let mut p = base(
        format!("discrete_boundary_value_{n}"),
        x0,
        Objective::DiscreteBoundaryValue,
        ConvexityClass::Nonconvex,
    );
    p.f_star = Some(0.0);
    Ok(p)
}

/// Seeds for the randomly generated convex members, fixed so the suite is
/// identical everywhere.
const QUADRATIC_SEED: u64 = 0x5eed_0001;
const LEAST_SQUARES_SEED: u64 = 0x5eed_0002;
const LOG_SUM_EXP_SEED: u64 = 0x5eed_0003;

/// Every named suite.
pub const SUITE_NAMES: [&str; 6] = [
    "smoke",
    "nonconvex",
    "convex",
    "strongly_convex",
    "profile_convex",
    "all",
];

fn all_problems() -> Result<Vec<Problem>> {
    Ok(vec![
        chain_quadratic(25)?,
        chain_quadratic(50)?,
        chain_quadratic(100)?,
        spectral_quadratic(10, 1.0, 100.0, QUADRATIC_SEED)?,
        spectral_quadratic(50, 1.0, 100.0, QUADRATIC_SEED)?,
        least_squares(10, LEAST_SQUARES_SEED)?,
        least_squares(50, LEAST_SQUARES_SEED)?,
        log_sum_exp_problem(10, LOG_SUM_EXP_SEED)?,
        extended_powell_singular(100)?,
        variably_dimensioned(10)?,
        extended_rosenbrock(2)?,
        extended_rosenbrock(10)?,
        beale(),
        trigonometric(10)?,
        broyden_tridiagonal(10)?,
        broyden_tridiagonal(50)?,
        discrete_boundary_value(10)?,
    ])
}

/// Loads a named suite.
///
/// `profile_convex` is the six convex members with known `L` used for
/// solver comparisons; the other names filter by convexity class.
pub fn suite_load(name: &str) -> Result<Vec<Problem>> {
    let all = all_problems()?;
    let pick = |names: &[&str]| -> Vec<Problem> {
        names
            .iter()
            .filter_map(|n| all.iter().find(|p| p.name() == *n).cloned())
            .collect()
    };
    let suite = match name {
        "smoke" => pick(&["rosenbrock_2", "quadratic_10", "chain_quadratic_25"]),
        "profile_convex" => pick(&[
            "chain_quadratic_25",
            "quadratic_10",
            "quadratic_50",
            "least_squares_10",
            "least_squares_50",
            "log_sum_exp_10",
        ]),
        "nonconvex" => all
            .into_iter()
            .filter(|p| p.convexity() == ConvexityClass::Nonconvex)
            .collect(),
        "convex" => all
            .into_iter()
            .filter(|p| p.convexity().is_convex())
            .collect(),
        "strongly_convex" => all
            .into_iter()
            .filter(|p| p.strong_convexity().is_some_and(|l| l > 0.0))
            .collect(),
        "all" => all,
        other => {
            return Err(invalid(format!(
                "unknown suite `{other}` (expected one of {})",
                SUITE_NAMES.join(", ")
            )))
        }
    };
    Ok(suite)
}

/// Looks up a single problem by its suite name, e.g. `chain_quadratic_25`.
pub fn problem_by_name(name: &str) -> Result<Problem> {
    all_problems()?
        .into_iter()
        .find(|p| p.name() == name)
        .ok_or_else(|| invalid(format!("unknown problem `{name}`")))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), crate::fmt_f64)
}

/// Suite manifest as CSV: `name,dim,f_star,L,lambda,convexity_class`.
pub fn manifest_csv(problems: &[Problem]) -> String {
    let mut out = String::from("name,dim,f_star,L,lambda,convexity_class\n");
    for p in problems {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.name(),
            p.dim(),
            fmt_opt(p.f_star()),
            fmt_opt(p.lipschitz()),
            fmt_opt(p.strong_convexity()),
            p.convexity()
        ));
    }
    out
}
