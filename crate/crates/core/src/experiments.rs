//! Monte-Carlo experiments near singular sets.
//!
//! A [`SingularFamily`] is the form `η = ∂∂_J φ` of a potential
//! `φ = σ·ρ^s`, where `ρ = Σ_{k∈N} |z_k|²` is the squared distance to a
//! coordinate subspace `Z = {z_k = 0, k ∈ N}`. With `s = −β/2` and `σ = −1`
//! this is `−|x|^{−β}` around `Z`. Its coefficients are the complex Hessian
//! `H_jk = ∂²φ/∂z_j∂z̄_k` against the constant forms `dz_j ∧ J(dz̄_k)`.
//!
//! Integrals of `η ∧ Ω^{n−1} ∧ Ω̄^n` are reported in units where the
//! integrand is the trace of `η` (the sum of its quaternionic eigenvalues)
//! against Lebesgue measure on the real patch. The patch is the product of
//! unit balls in the normal and tangential coordinates; shells are
//! `ε_k ≤ |x_N| ≤ ε_{k−1}` with `ε_0 = 1`.
//!
//! The extension experiment pairs `η` with `∂α` for compactly supported test
//! forms `α` outside the tube `|x_N| < ε`. By Stokes, that bulk integral
//! equals minus the flux of `η ∧ α` through the tube boundary, which is
//! estimated independently on the boundary itself.

use std::fmt::Write as _;

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bridge::{is_real_approx, quaternionic_eigenvalues, QHermForm};
use crate::error::ExperimentError;
use crate::form::{Blade, Form};
use crate::poly::Poly;
use crate::quaternion::{apply_operator, QuatOperator};
use crate::random::{random_form, random_poly, rng};
use crate::scalar::{CRational, Coeff};
use crate::space::ModelSpace;
use crate::vmap::canonical_omega;

/// Smallest accepted sample count per shell.
pub const MIN_SAMPLES: u64 = 1000;
/// Default potential exponent.
pub const DEFAULT_BETA: f64 = 1.0;
/// Cauchy tolerance on the cumulative shell sums.
pub const DEFAULT_CAUCHY_TOL: f64 = 0.01;
/// Stokes-pairing tolerance relative to the L¹ mass of `η ∧ α`.
pub const DEFAULT_STOKES_TOL: f64 = 1e-3;
/// Tolerance for the finite-difference closedness check.
pub const CLOSEDNESS_TOL: f64 = 1e-6;

const CHUNK: u64 = 4096;

/// `η = ∂∂_J(σ ρ_N^s)` on `H^n`.
#[derive(Clone, Debug)]
pub struct SingularFamily {
    space: ModelSpace,
    normal: Vec<usize>,
    sign: f64,
    exponent: f64,
    label: String,
    generators: Vec<((usize, usize), Form<Complex64>)>,
    traces: Vec<((usize, usize), Complex64)>,
}

impl SingularFamily {
    /// `−|x|^{−β}` with `Z = {0}`.
    pub fn point(n: usize, beta: f64) -> Result<Self, ExperimentError> {
        if !(beta > 0.0) {
            return Err(ExperimentError::BadFamily(format!("β = {beta} must be positive")));
        }
        let space = ModelSpace::new(n)?;
        let normal = (0..space.complex_dim()).collect();
        Self::new(space, normal, -1.0, -beta / 2.0, format!("-|x|^-{beta} around the origin"))
    }

    /// `|x|²`: smooth, with `η = 2Ω`.
    pub fn smooth(n: usize) -> Result<Self, ExperimentError> {
        let space = ModelSpace::new(n)?;
        let normal = (0..space.complex_dim()).collect();
        Self::new(space, normal, 1.0, 1.0, "|x|^2 (smooth)".into())
    }

    /// `+|z_1|^{−β}` around the complex hyperplane `z_1 = 0`. The codimension
    /// is 1, so this family lies outside the integrability hypothesis.
    pub fn coordinate_pole(n: usize, beta: f64) -> Result<Self, ExperimentError> {
        if !(beta > 0.0) {
            return Err(ExperimentError::BadFamily(format!("β = {beta} must be positive")));
        }
        let space = ModelSpace::new(n)?;
        Self::new(space, vec![0], 1.0, -beta / 2.0, format!("+|z1|^-{beta} around z1 = 0"))
    }

    /// `σ ρ_N^s` for the coordinates `normal` (0-based complex indices).
    pub fn new(space: ModelSpace, normal: Vec<usize>, sign: f64, exponent: f64, label: String) -> Result<Self, ExperimentError> {
        let m = space.complex_dim();
        if normal.is_empty() || normal.iter().any(|&k| k >= m) {
            return Err(ExperimentError::BadFamily(format!("normal coordinates {normal:?} for C^{m}")));
        }
        let omega: Form = canonical_omega(space);
        let n = space.n();
        let omega_rest = omega.wedge_pow(n - 1);
        let top = Blade(space.holomorphic_mask());
        let vol = omega.wedge_pow(n).coefficient(top);
        let mut generators = Vec::new();
        let mut traces = Vec::new();
        for &j in &normal {
            for &k in &normal {
                let f = dz_jdzb(space, j, k);
                let t = (&f ^ &omega_rest).coefficient(top) * CRational::from(crate::scalar::int(n as i64)) / vol.clone();
                let t = <Complex64 as Coeff>::from_crational(&t);
                generators.push(((j, k), f.map_coeffs(<Complex64 as Coeff>::from_crational)));
                if t != Complex64::zero() {
                    traces.push(((j, k), t));
                }
            }
        }
        Ok(SingularFamily { space, normal, sign, exponent, label, generators, traces })
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Complex codimension of `Z`.
    pub fn codim(&self) -> usize {
        self.normal.len()
    }

    /// Whether `codim Z > 2p` for the (2,0)-form `η` (`p = 1`).
    pub fn within_hypothesis(&self) -> bool {
        self.codim() > 2
    }

    /// `β` when the potential is singular.
    pub fn beta(&self) -> Option<f64> {
        (self.exponent < 0.0).then_some(-2.0 * self.exponent)
    }

    /// Power of `ε` expected for shell integrals of the trace density:
    /// the trace scales as `r^{2s−2}` and shells add `r^{2c}`.
    pub fn expected_shell_exponent(&self) -> f64 {
        2.0 * self.codim() as f64 + 2.0 * self.exponent - 2.0
    }

    fn rho(&self, z: &[Complex64]) -> f64 {
        self.normal.iter().map(|&k| z[k].norm_sqr()).sum()
    }

    pub fn potential(&self, z: &[Complex64]) -> f64 {
        self.sign * self.rho(z).powf(self.exponent)
    }

    /// `∂²φ/∂z_j∂z̄_k` for `j, k` in the normal set, in the order of
    /// `normal × normal`.
    pub fn hessian(&self, z: &[Complex64]) -> Vec<Complex64> {
        let t = self.rho(z);
        let s = self.exponent;
        let a = self.sign * s * t.powf(s - 1.0);
        let b = self.sign * s * (s - 1.0) * t.powf(s - 2.0);
        let mut h = Vec::with_capacity(self.normal.len().pow(2));
        for &j in &self.normal {
            for &k in &self.normal {
                let diag = if j == k { a } else { 0.0 };
                h.push(Complex64::new(diag, 0.0) + z[j].conj() * z[k] * b);
            }
        }
        h
    }

    /// `η` at `z`.
    pub fn form_at(&self, z: &[Complex64]) -> Form<Complex64> {
        let h = self.hessian(z);
        let mut out = Form::zero(self.space, 2);
        for (c, (_, f)) in h.iter().zip(&self.generators) {
            out = &out + &f.scale(c);
        }
        out
    }

    /// Trace of `η` at `z`, the density of `η ∧ Ω^{n−1} ∧ Ω̄^n`.
    pub fn trace_density(&self, z: &[Complex64]) -> f64 {
        let h = self.hessian(z);
        let c = self.normal.len();
        self.traces.iter().map(|((j, k), t)| (h[self.index(*j) * c + self.index(*k)] * t).re).sum()
    }

    fn index(&self, j: usize) -> usize {
        self.normal.iter().position(|&x| x == j).expect("normal index")
    }
}

/// `dz_j ∧ J(dz̄_k)`, 0-based.
fn dz_jdzb(space: ModelSpace, j: usize, k: usize) -> Form {
    &Form::dz(space, j + 1) ^ &apply_operator(QuatOperator::J, &Form::dzb(space, k + 1))
}

/// Shell radii `1 > ε_1 > … > ε_K`, sample count per shell and seed.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub radii: Vec<f64>,
    pub samples_per_shell: u64,
    pub seed: u64,
}

impl QuadratureGrid {
    /// `ε_k = 2^{−k}`, `k = 1..=levels`.
    pub fn dyadic(levels: usize, samples_per_shell: u64, seed: u64) -> Self {
        QuadratureGrid { radii: (1..=levels).map(|k| 0.5f64.powi(k as i32)).collect(), samples_per_shell, seed }
    }

    /// Ten dyadic shells with `10⁵` samples each.
    pub fn standard(seed: u64) -> Self {
        Self::dyadic(10, 100_000, seed)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.samples_per_shell < MIN_SAMPLES {
            return Err(ExperimentError::TooFewSamples { got: self.samples_per_shell, need: MIN_SAMPLES });
        }
        if self.radii.len() < 2 {
            return Err(ExperimentError::BadGrid("need at least two shells".into()));
        }
        let mut prev = 1.0;
        for &r in &self.radii {
            if !(r > 0.0 && r < prev) {
                return Err(ExperimentError::BadGrid(format!("radii must decrease strictly inside (0, 1), got {r} after {prev}")));
            }
            prev = r;
        }
        Ok(())
    }

    fn shells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        std::iter::once(1.0).chain(self.radii.iter().copied()).zip(self.radii.iter().copied())
    }
}

/// Volume of the unit ball in `R^d`.
fn ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / d as f64 * ball_volume(d - 2),
    }
}

fn unit_direction(r: &mut impl Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Product of balls in the normal and tangential real coordinates.
#[derive(Clone, Debug)]
struct Patch {
    m: usize,
    normal: Vec<usize>,
    tangent: Vec<usize>,
}

impl Patch {
    fn of(fam: &SingularFamily) -> Self {
        let m = fam.space.complex_dim();
        Patch { m, normal: fam.normal.clone(), tangent: (0..m).filter(|k| !fam.normal.contains(k)).collect() }
    }

    fn dn(&self) -> usize {
        2 * self.normal.len()
    }

    fn dt(&self) -> usize {
        2 * self.tangent.len()
    }

    fn place(&self, z: &mut [Complex64], coords: &[usize], v: &[f64], scale: f64) {
        for (i, &k) in coords.iter().enumerate() {
            z[k] = Complex64::new(v[2 * i], v[2 * i + 1]) * scale;
        }
    }

    fn tangential(&self, r: &mut impl Rng, z: &mut [Complex64]) {
        let d = self.dt();
        if d > 0 {
            let dir = unit_direction(r, d);
            let u: f64 = r.gen();
            self.place(z, &self.tangent, &dir, u.powf(1.0 / d as f64));
        }
    }

    /// Uniform point with `a ≤ |x_N| ≤ b`.
    fn sample_shell(&self, r: &mut impl Rng, a: f64, b: f64) -> Vec<Complex64> {
        let d = self.dn() as f64;
        let mut z = vec![Complex64::zero(); self.m];
        let dir = unit_direction(r, self.dn());
        let u: f64 = r.gen();
        let rad = (a.powf(d) + u * (b.powf(d) - a.powf(d))).powf(1.0 / d);
        self.place(&mut z, &self.normal, &dir, rad);
        self.tangential(r, &mut z);
        z
    }

    fn shell_volume(&self, a: f64, b: f64) -> f64 {
        let d = self.dn() as i32;
        ball_volume(self.dn()) * (b.powi(d) - a.powi(d)) * ball_volume(self.dt())
    }

    /// Uniform point with `|x_N| = eps`.
    fn sample_boundary(&self, r: &mut impl Rng, eps: f64) -> Vec<Complex64> {
        let mut z = vec![Complex64::zero(); self.m];
        let dir = unit_direction(r, self.dn());
        self.place(&mut z, &self.normal, &dir, eps);
        self.tangential(r, &mut z);
        z
    }

    fn boundary_area(&self, eps: f64) -> f64 {
        let d = self.dn();
        d as f64 * ball_volume(d) * eps.powi(d as i32 - 1) * ball_volume(self.dt())
    }
}

/// Means and standard errors of `K` statistics over `samples` draws, split
/// in fixed chunks on their own streams and reduced in chunk order.
fn monte_carlo<const K: usize>(
    samples: u64,
    seed: u64,
    stream: u64,
    f: &(dyn Fn(&mut ChaCha8Rng) -> [f64; K] + Sync),
) -> [(f64, f64); K] {
    let chunks = samples.div_ceil(CHUNK);
    let partial: Vec<([f64; K], [f64; K])> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng(seed, (stream << 24) | c);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut s = [0.0; K];
            let mut s2 = [0.0; K];
            for _ in 0..count {
                let v = f(&mut r);
                for i in 0..K {
                    s[i] += v[i];
                    s2[i] += v[i] * v[i];
                }
            }
            (s, s2)
        })
        .collect();
    let mut s = [0.0; K];
    let mut s2 = [0.0; K];
    for (a, b) in partial {
        for i in 0..K {
            s[i] += a[i];
            s2[i] += b[i];
        }
    }
    let nf = samples as f64;
    let mut out = [(0.0, 0.0); K];
    for i in 0..K {
        let mean = s[i] / nf;
        let var = (s2[i] / nf - mean * mean).max(0.0);
        out[i] = (mean, (var / nf).sqrt());
    }
    out
}

/// Least-squares slope of `log y` against `log x` over positive `y`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Result of the reality, positivity and closedness checks.
#[derive(Clone, Debug, PartialEq)]
pub struct SanityReport {
    pub points: usize,
    pub min_eigenvalue_ratio: f64,
    pub closedness_residual: f64,
}

fn max_norm(f: &Form<Complex64>) -> f64 {
    f.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

/// `∂η` at `z` by fourth-order central differences, relative to `|η(z)|`.
pub fn closedness_residual(fam: &SingularFamily, z: &[Complex64]) -> f64 {
    let space = fam.space;
    let h = 1e-3;
    let shifted = |k: usize, dir: Complex64, t: f64| {
        let mut w = z.to_vec();
        w[k] += dir * t;
        fam.form_at(&w)
    };
    let derivative = |k: usize, dir: Complex64| {
        let f = |t: f64| shifted(k, dir, t);
        let num = &(&f(-2.0 * h) - &f(2.0 * h)) + &(&f(h) - &f(-h)).scale(&Complex64::new(8.0, 0.0));
        num.scale(&Complex64::new(1.0 / (12.0 * h), 0.0))
    };
    let mut d_eta = Form::zero(space, 3);
    for k in 0..space.complex_dim() {
        let dx = derivative(k, Complex64::new(1.0, 0.0));
        let dy = derivative(k, Complex64::new(0.0, 1.0));
        let dk = (&dx - &dy.scale(&Complex64::i())).scale(&Complex64::new(0.5, 0.0));
        d_eta = &d_eta + &(&Form::dz(space, k + 1) ^ &dk);
    }
    max_norm(&d_eta) / max_norm(&fam.form_at(z)).max(1e-300)
}

/// Checks reality, positivity and `∂`-closedness of `η` on `points` random
/// points with `1/4 ≤ |x_N| ≤ 1`.
pub fn sanity_check(fam: &SingularFamily, points: usize, seed: u64) -> Result<SanityReport, ExperimentError> {
    let patch = Patch::of(fam);
    let flat = QHermForm::<f64>::flat(fam.space);
    let mut r = rng(seed, u64::MAX - 1);
    let mut min_ratio = f64::INFINITY;
    let mut residual: f64 = 0.0;
    for i in 0..points {
        let z = patch.sample_shell(&mut r, 0.25, 1.0);
        let radius = fam.rho(&z).sqrt();
        let eta = fam.form_at(&z);
        if !is_real_approx(&eta) {
            return Err(ExperimentError::NotReal { radius });
        }
        let values = quaternionic_eigenvalues(&eta, &flat)?.values;
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -1e-9 * scale {
            return Err(ExperimentError::NotPositive { radius, value: min });
        }
        min_ratio = min_ratio.min(min / scale);
        if i < 8 {
            residual = residual.max(closedness_residual(fam, &z));
        }
    }
    if residual > CLOSEDNESS_TOL {
        return Err(ExperimentError::NotClosed { residual, tolerance: CLOSEDNESS_TOL });
    }
    Ok(SanityReport { points, min_eigenvalue_ratio: min_ratio, closedness_residual: residual })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrabilityVerdict {
    /// Cumulative sums are Cauchy within tolerance.
    Consistent,
    /// Shell integrals do not decay.
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShellEstimate {
    pub inner: f64,
    pub outer: f64,
    pub integral: f64,
    pub std_err: f64,
    pub cumulative: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SibonyReport {
    pub family: String,
    pub n: usize,
    pub codim: usize,
    pub beta: Option<f64>,
    pub within_hypothesis: bool,
    pub seed: u64,
    pub samples_per_shell: u64,
    pub shells: Vec<ShellEstimate>,
    pub fitted_exponent: Option<f64>,
    pub expected_exponent: f64,
    /// `|C_K − C_{K−1}| / |C_K|` for the last two cumulative sums.
    pub relative_change: f64,
    pub tolerance: f64,
    pub sanity: SanityReport,
    pub verdict: IntegrabilityVerdict,
}

/// Shell-by-shell Monte-Carlo integration of the trace of `η`.
pub fn sibony_experiment(fam: &SingularFamily, grid: &QuadratureGrid) -> Result<SibonyReport, ExperimentError> {
    sibony_with_tolerance(fam, grid, DEFAULT_CAUCHY_TOL)
}

pub fn sibony_with_tolerance(fam: &SingularFamily, grid: &QuadratureGrid, tol: f64) -> Result<SibonyReport, ExperimentError> {
    grid.validate()?;
    let sanity = sanity_check(fam, 32, grid.seed)?;
    let patch = Patch::of(fam);
    let mut shells = Vec::new();
    let mut cumulative = 0.0;
    for (i, (outer, inner)) in grid.shells().enumerate() {
        let vol = patch.shell_volume(inner, outer);
        let f = |r: &mut ChaCha8Rng| {
            let z = patch.sample_shell(r, inner, outer);
            [fam.trace_density(&z)]
        };
        let [(mean, se)] = monte_carlo(grid.samples_per_shell, grid.seed, i as u64, &f);
        cumulative += mean * vol;
        shells.push(ShellEstimate { inner, outer, integral: mean * vol, std_err: se * vol, cumulative });
    }
    let k = shells.len();
    let relative_change = (shells[k - 1].cumulative - shells[k - 2].cumulative).abs() / shells[k - 1].cumulative.abs().max(1e-300);
    let fitted_exponent = log_log_slope(&shells.iter().map(|s| (s.inner, s.integral.abs())).collect::<Vec<_>>());
    let verdict = if relative_change < tol {
        IntegrabilityVerdict::Consistent
    } else if fitted_exponent.is_some_and(|e| e <= 0.0) {
        IntegrabilityVerdict::Divergent
    } else {
        IntegrabilityVerdict::Inconclusive
    };
    Ok(SibonyReport {
        family: fam.label.clone(),
        n: fam.space.n(),
        codim: fam.codim(),
        beta: fam.beta(),
        within_hypothesis: fam.within_hypothesis(),
        seed: grid.seed,
        samples_per_shell: grid.samples_per_shell,
        shells,
        fitted_exponent,
        expected_exponent: fam.expected_shell_exponent(),
        relative_change,
        tolerance: tol,
        sanity,
        verdict,
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("none".into(), |v| format!("{v:.6}"))
}

impl SibonyReport {
    /// Summary lines followed by a CSV table of shells.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment,sibony");
        let _ = writeln!(s, "family,{}", self.family);
        let _ = writeln!(s, "n,{}", self.n);
        let _ = writeln!(s, "codim,{}", self.codim);
        let _ = writeln!(s, "beta,{}", fmt_opt(self.beta));
        let _ = writeln!(s, "within_hypothesis,{}", self.within_hypothesis);
        if !self.within_hypothesis {
            let _ = writeln!(s, "note,codim Z <= 2p: outside the theorem");
        }
        let _ = writeln!(s, "seed,{}", self.seed);
        let _ = writeln!(s, "samples_per_shell,{}", self.samples_per_shell);
        let _ = writeln!(s, "closedness_residual,{:.3e}", self.sanity.closedness_residual);
        let _ = writeln!(s, "expected_exponent,{:.6}", self.expected_exponent);
        let _ = writeln!(s, "fitted_exponent,{}", fmt_opt(self.fitted_exponent));
        let _ = writeln!(s, "relative_change,{:.6e}", self.relative_change);
        let _ = writeln!(s, "tolerance,{}", self.tolerance);
        let _ = writeln!(s, "verdict,{:?}", self.verdict);
        let _ = writeln!(s, "inner,outer,integral,std_err,cumulative");
        for sh in &self.shells {
            let _ = writeln!(s, "{:.6e},{:.6e},{:.9e},{:.3e},{:.9e}", sh.inner, sh.outer, sh.integral, sh.std_err, sh.cumulative);
        }
        s
    }
}

/// `α = χ(|x − c|²/R²) · P · θ` with the smooth bump
/// `χ(u) = exp(1 − 1/(1 − u))` and a constant holomorphic form `θ` of degree
/// `2n − 3`.
#[derive(Clone, Debug)]
pub struct TestForm {
    pub center: Vec<Complex64>,
    pub radius: f64,
    pub poly: Poly,
    pub theta: Form,
}

impl TestForm {
    /// Random `P` of degree ≤ 2, random `θ`, support a ball of radius 0.7
    /// around a center with `|c| ≤ 0.2`.
    pub fn random(space: ModelSpace, r: &mut impl Rng) -> Result<Self, ExperimentError> {
        require_skoda_dim(space)?;
        let m = space.complex_dim();
        let dir = unit_direction(r, 2 * m);
        let len = 0.2 * r.gen::<f64>();
        let center = (0..m).map(|k| Complex64::new(dir[2 * k], dir[2 * k + 1]) * len).collect();
        let mut poly = random_poly(&space, 2, 3, r);
        if poly.is_zero() {
            poly = Poly::constant(CRational::from(crate::scalar::int(1)));
        }
        let theta = random_form(space, 2 * space.n() - 3, 0, 0.7, r);
        Ok(TestForm { center, radius: 0.7, poly, theta })
    }

    /// A test form supported in `|x − c| < 0.3` with `|c| = 0.6`, away from
    /// the origin.
    pub fn away_from_origin(space: ModelSpace) -> Result<Self, ExperimentError> {
        require_skoda_dim(space)?;
        let mut center = vec![Complex64::zero(); space.complex_dim()];
        center[0] = Complex64::new(0.6, 0.0);
        let theta = Form::term(space, &(1..=2 * space.n() - 3).map(|k| space.dz(k)).collect::<Vec<_>>(), CRational::from(crate::scalar::int(1)));
        Ok(TestForm { center, radius: 0.3, poly: Poly::constant(CRational::from(crate::scalar::int(1))), theta })
    }

    fn bump(&self, z: &[Complex64]) -> (f64, f64, Vec<Complex64>) {
        let diff: Vec<Complex64> = z.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let u = diff.iter().map(|d| d.norm_sqr()).sum::<f64>() / (self.radius * self.radius);
        if u >= 1.0 {
            return (0.0, 0.0, diff);
        }
        let chi = (1.0 - 1.0 / (1.0 - u)).exp();
        (chi, -chi / (1.0 - u).powi(2), diff)
    }
}

fn require_skoda_dim(space: ModelSpace) -> Result<(), ExperimentError> {
    if space.n() < 2 {
        return Err(ExperimentError::BadFamily("test forms of degree 2n − 3 need n ≥ 2".into()));
    }
    Ok(())
}

/// Constant tensors for one family and one test form.
struct Pairing<'a> {
    fam: &'a SingularFamily,
    test: &'a TestForm,
    d_poly: Vec<Poly>,
    /// `(j, k, l, top coefficient of dz_j∧J(dz̄_k) ∧ dz_l ∧ θ)`.
    bulk: Vec<(usize, usize, usize, Complex64)>,
    /// Coefficients of `dz_j∧J(dz̄_k) ∧ θ`, one row per `(j, k)` of the family.
    mass: Vec<Vec<Complex64>>,
}

impl<'a> Pairing<'a> {
    fn new(fam: &'a SingularFamily, test: &'a TestForm) -> Self {
        let space = fam.space;
        let m = space.complex_dim();
        let top = Blade(space.holomorphic_mask());
        let theta = test.theta.map_coeffs(<Complex64 as Coeff>::from_crational);
        let mut bulk = Vec::new();
        let mut mass_forms = Vec::new();
        for ((j, k), f) in &fam.generators {
            let ft = f ^ &theta;
            for l in 0..m {
                let w = (&(f ^ &Form::dz(space, l + 1)) ^ &theta).coefficient(top);
                if w != Complex64::zero() {
                    bulk.push((fam.index(*j), fam.index(*k), l, w));
                }
            }
            mass_forms.push(ft);
        }
        let mut blades: Vec<Blade> = mass_forms.iter().flat_map(|f| f.terms().map(|(b, _)| *b)).collect();
        blades.sort();
        blades.dedup();
        let mass = mass_forms.iter().map(|f| blades.iter().map(|b| f.coefficient(*b)).collect()).collect();
        let d_poly = (0..m).map(|l| test.poly.d_z(l)).collect();
        Pairing { fam, test, d_poly, bulk, mass }
    }

    /// `(top coefficient of η ∧ ∂α, coefficient ℓ¹ norm of η ∧ α)` at `z`.
    fn bulk_and_mass(&self, z: &[Complex64]) -> (Complex64, f64) {
        let (chi, dchi, diff) = self.test.bump(z);
        if chi == 0.0 {
            return (Complex64::zero(), 0.0);
        }
        let h = self.fam.hessian(z);
        let c = self.fam.normal.len();
        let p = self.test.poly.eval(z);
        let r2 = self.test.radius * self.test.radius;
        let dg: Vec<Complex64> = (0..z.len())
            .map(|l| diff[l].conj() * (dchi / r2) * p + self.d_poly[l].eval(z) * chi)
            .collect();
        let bulk = self.bulk.iter().map(|&(j, k, l, w)| h[j * c + k] * dg[l] * w).sum();
        let g = (p * chi).norm();
        let cols = self.mass.first().map_or(0, Vec::len);
        let mass = (0..cols).map(|b| h.iter().zip(&self.mass).map(|(hv, row)| hv * row[b]).sum::<Complex64>().norm()).sum::<f64>();
        (bulk, mass * g)
    }

    /// Top coefficient of `dr_N ∧ η ∧ α` at a point of the tube boundary.
    fn flux(&self, z: &[Complex64]) -> Complex64 {
        let (chi, _, _) = self.test.bump(z);
        if chi == 0.0 {
            return Complex64::zero();
        }
        let h = self.fam.hessian(z);
        let c = self.fam.normal.len();
        let r = self.fam.rho(z).sqrt();
        let g = self.test.poly.eval(z) * chi;
        let dr: Vec<Complex64> = (0..z.len())
            .map(|l| if self.fam.normal.contains(&l) { z[l].conj() / (2.0 * r) } else { Complex64::zero() })
            .collect();
        // dz_l commutes with the 2-form dz_j∧J(dz̄_k), so the bulk tensor applies
        self.bulk.iter().map(|&(j, k, l, w)| h[j * c + k] * dr[l] * w).sum::<Complex64>() * g
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosednessVerdict {
    Consistent,
    Inconsistent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StokesRow {
    pub eps: f64,
    /// `∫_{|x_N| ≥ ε} η ∧ ∂α` by volume sampling.
    pub bulk: Complex64,
    pub bulk_std_err: f64,
    /// `∫_{|x_N| = ε} η ∧ α`, outward from the tube.
    pub flux: Complex64,
    pub flux_std_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFormReport {
    pub rows: Vec<StokesRow>,
    pub l1_mass: f64,
    /// Slope of `log |flux|` against `log ε`; `None` with fewer than two
    /// nonzero fluxes.
    pub decay_exponent: Option<f64>,
    /// `|flux(ε_min)| / L¹`, the Stokes pairing at the smallest radius.
    pub relative_pairing: f64,
    /// `|bulk(ε_min) + flux(ε_min)|` in standard errors.
    pub stokes_deviation: f64,
    pub verdict: ClosednessVerdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkodaReport {
    pub family: String,
    pub within_hypothesis: bool,
    pub seed: u64,
    pub samples_per_shell: u64,
    pub tolerance: f64,
    pub integrability: SibonyReport,
    pub tests: Vec<TestFormReport>,
    pub verdict: ClosednessVerdict,
}

/// Deviation in standard errors beyond which bulk and flux are considered
/// inconsistent.
const STOKES_SIGMAS: f64 = 5.0;

/// Pairs `η` with `∂α_j` outside shrinking tubes.
pub fn skoda_elmir_experiment(fam: &SingularFamily, tests: &[TestForm], grid: &QuadratureGrid) -> Result<SkodaReport, ExperimentError> {
    skoda_with_tolerance(fam, tests, grid, DEFAULT_STOKES_TOL)
}

pub fn skoda_with_tolerance(fam: &SingularFamily, tests: &[TestForm], grid: &QuadratureGrid, tol: f64) -> Result<SkodaReport, ExperimentError> {
    require_skoda_dim(fam.space)?;
    let integrability = sibony_experiment(fam, grid)?;
    if integrability.verdict != IntegrabilityVerdict::Consistent {
        return Err(ExperimentError::NotConvergent);
    }
    let patch = Patch::of(fam);
    let shells: Vec<(f64, f64)> = grid.shells().collect();
    let mut reports = Vec::new();
    for (t, test) in tests.iter().enumerate() {
        let pairing = Pairing::new(fam, test);
        let base = 1000 * (t as u64 + 1);
        let mut bulk = Complex64::zero();
        let mut bulk_var = 0.0;
        let mut mass = 0.0;
        let mut rows = Vec::new();
        for (i, &(outer, inner)) in shells.iter().enumerate() {
            let vol = patch.shell_volume(inner, outer);
            let f = |r: &mut ChaCha8Rng| {
                let z = patch.sample_shell(r, inner, outer);
                let (b, m) = pairing.bulk_and_mass(&z);
                [b.re, b.im, m]
            };
            let [(re, se_re), (im, se_im), (m, _)] = monte_carlo(grid.samples_per_shell, grid.seed, base + i as u64, &f);
            bulk += Complex64::new(re, im) * vol;
            bulk_var += (se_re * vol).powi(2) + (se_im * vol).powi(2);
            mass += m * vol;
            let area = patch.boundary_area(inner);
            let g = |r: &mut ChaCha8Rng| {
                let z = patch.sample_boundary(r, inner);
                let v = pairing.flux(&z);
                [v.re, v.im]
            };
            let [(fre, fse_re), (fim, fse_im)] = monte_carlo(grid.samples_per_shell, grid.seed, base + 500 + i as u64, &g);
            rows.push(StokesRow {
                eps: inner,
                bulk,
                bulk_std_err: bulk_var.sqrt(),
                flux: Complex64::new(fre, fim) * area,
                flux_std_err: area * fse_re.hypot(fse_im),
            });
        }
        let last = rows.last().expect("nonempty grid");
        let flux_is_zero = last.flux == Complex64::zero();
        let decay_exponent = log_log_slope(&rows.iter().map(|r| (r.eps, r.flux.norm())).collect::<Vec<_>>());
        let relative_pairing = last.flux.norm() / mass.max(1e-300);
        let err = last.bulk_std_err.hypot(last.flux_std_err);
        let stokes_deviation = if err > 0.0 { (last.bulk + last.flux).norm() / err } else { (last.bulk + last.flux).norm() / mass.max(1e-300) * 1e12 };
        let decays = flux_is_zero || decay_exponent.is_some_and(|e| e > 0.0);
        let ok = relative_pairing < tol && decays && stokes_deviation < STOKES_SIGMAS;
        reports.push(TestFormReport {
            rows,
            l1_mass: mass,
            decay_exponent,
            relative_pairing,
            stokes_deviation,
            verdict: if ok { ClosednessVerdict::Consistent } else { ClosednessVerdict::Inconsistent },
        });
    }
    let verdict = if reports.iter().all(|r| r.verdict == ClosednessVerdict::Consistent) {
        ClosednessVerdict::Consistent
    } else {
        ClosednessVerdict::Inconsistent
    };
    Ok(SkodaReport {
        family: fam.label.clone(),
        within_hypothesis: fam.within_hypothesis(),
        seed: grid.seed,
        samples_per_shell: grid.samples_per_shell,
        tolerance: tol,
        integrability,
        tests: reports,
        verdict,
    })
}

/// Three test forms drawn from `seed`.
pub fn default_test_forms(space: ModelSpace, seed: u64) -> Result<Vec<TestForm>, ExperimentError> {
    let mut r = rng(seed, u64::MAX - 2);
    (0..3).map(|_| TestForm::random(space, &mut r)).collect()
}

impl SkodaReport {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment,skoda-elmir");
        let _ = writeln!(s, "family,{}", self.family);
        let _ = writeln!(s, "within_hypothesis,{}", self.within_hypothesis);
        let _ = writeln!(s, "seed,{}", self.seed);
        let _ = writeln!(s, "samples_per_shell,{}", self.samples_per_shell);
        let _ = writeln!(s, "integrability,{:?}", self.integrability.verdict);
        let _ = writeln!(s, "tolerance,{}", self.tolerance);
        let _ = writeln!(s, "verdict,{:?}", self.verdict);
        for (t, r) in self.tests.iter().enumerate() {
            let _ = writeln!(s, "test,{t},l1_mass,{:.6e},decay_exponent,{},relative_pairing,{:.3e},stokes_deviation_sigma,{:.3},verdict,{:?}", r.l1_mass, fmt_opt(r.decay_exponent), r.relative_pairing, r.stokes_deviation, r.verdict);
        }
        let _ = writeln!(s, "test,eps,bulk_re,bulk_im,bulk_std_err,flux_re,flux_im,flux_std_err");
        for (t, r) in self.tests.iter().enumerate() {
            for row in &r.rows {
                let _ = writeln!(
                    s,
                    "{t},{:.6e},{:.9e},{:.9e},{:.3e},{:.9e},{:.9e},{:.3e}",
                    row.eps, row.bulk.re, row.bulk.im, row.bulk_std_err, row.flux.re, row.flux.im, row.flux_std_err
                );
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{evaluate_at, hkt_from_potential};
    use crate::poly::Poly;

    fn small_grid(seed: u64) -> QuadratureGrid {
        QuadratureGrid::dyadic(6, 4000, seed)
    }

    #[test]
    fn hessian_matches_symbolic_potential() {
        // σ ρ^s with s = 2 is the polynomial |z|⁴
        let space = ModelSpace::new(2).unwrap();
        let fam = SingularFamily::new(space, (0..4).collect(), 1.0, 2.0, "|x|^4".into()).unwrap();
        let rho = (0..4).map(|k| Poly::z(k) * Poly::zb(k)).fold(Poly::zero(), |a, b| a + b);
        let symbolic = hkt_from_potential(space, &(rho.clone() * rho)).unwrap();
        let z = [Complex64::new(0.3, -0.1), Complex64::new(0.2, 0.5), Complex64::new(-0.4, 0.1), Complex64::new(0.0, 0.7)];
        let diff = &fam.form_at(&z) - &evaluate_at(&symbolic, &z);
        assert!(max_norm(&diff) < 1e-12);
    }

    #[test]
    fn smooth_family_is_twice_omega() {
        let fam = SingularFamily::smooth(2).unwrap();
        let z = vec![Complex64::new(0.1, 0.2); 4];
        let omega: Form<Complex64> = canonical_omega(fam.space());
        assert!(max_norm(&(&fam.form_at(&z) - &omega.scale(&Complex64::new(2.0, 0.0)))) < 1e-14);
        assert!((fam.trace_density(&z) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn point_family_passes_sanity() {
        let fam = SingularFamily::point(2, 1.0).unwrap();
        let s = sanity_check(&fam, 16, 1).unwrap();
        assert!(s.closedness_residual < CLOSEDNESS_TOL);
        assert!(s.min_eigenvalue_ratio >= 0.0);
        // −|x|^{−β} stops being positive past β = 2
        assert!(matches!(sanity_check(&SingularFamily::point(2, 3.0).unwrap(), 16, 1), Err(ExperimentError::NotPositive { .. })));
    }

    #[test]
    fn shell_volumes_add_up() {
        let fam = SingularFamily::point(2, 1.0).unwrap();
        let patch = Patch::of(&fam);
        let total: f64 = QuadratureGrid::dyadic(5, 1000, 0).shells().map(|(o, i)| patch.shell_volume(i, o)).sum();
        let expect = ball_volume(8) * (1.0 - 0.5f64.powi(40));
        assert!((total - expect).abs() < 1e-12);
        assert!((ball_volume(8) - std::f64::consts::PI.powi(4) / 24.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_shells_scale_with_volume() {
        let fam = SingularFamily::smooth(2).unwrap();
        let rep = sibony_experiment(&fam, &small_grid(2)).unwrap();
        let patch = Patch::of(&fam);
        for sh in &rep.shells {
            let want = 4.0 * patch.shell_volume(sh.inner, sh.outer);
            assert!((sh.integral - want).abs() < 1e-9 * want);
        }
        assert!((rep.fitted_exponent.unwrap() - 8.0).abs() < 1e-6);
    }

    #[test]
    fn point_singularity_converges() {
        let fam = SingularFamily::point(2, 1.0).unwrap();
        let rep = sibony_experiment(&fam, &small_grid(3)).unwrap();
        assert_eq!(rep.verdict, IntegrabilityVerdict::Consistent);
        assert!((rep.fitted_exponent.unwrap() - rep.expected_exponent).abs() < 0.1);
        assert_eq!(rep, sibony_experiment(&fam, &small_grid(3)).unwrap());
    }

    #[test]
    fn coordinate_pole_diverges() {
        let fam = SingularFamily::coordinate_pole(2, 1.0).unwrap();
        assert!(!fam.within_hypothesis());
        let rep = sibony_experiment(&fam, &small_grid(4)).unwrap();
        assert_eq!(rep.verdict, IntegrabilityVerdict::Divergent);
        assert!(rep.render().contains("outside the theorem"));
    }

    #[test]
    fn grid_validation() {
        let fam = SingularFamily::point(2, 1.0).unwrap();
        let few = QuadratureGrid::dyadic(4, 10, 0);
        assert!(matches!(sibony_experiment(&fam, &few), Err(ExperimentError::TooFewSamples { .. })));
        let bad = QuadratureGrid { radii: vec![0.5, 0.6], samples_per_shell: 2000, seed: 0 };
        assert!(matches!(sibony_experiment(&fam, &bad), Err(ExperimentError::BadGrid(_))));
    }

    #[test]
    fn smooth_stokes_pairing_vanishes() {
        let fam = SingularFamily::smooth(2).unwrap();
        let tests = default_test_forms(fam.space(), 5).unwrap();
        let rep = skoda_elmir_experiment(&fam, &tests, &small_grid(5)).unwrap();
        assert_eq!(rep.verdict, ClosednessVerdict::Consistent, "{}", rep.render());
    }

    #[test]
    fn support_away_from_singularity() {
        let fam = SingularFamily::point(2, 1.0).unwrap();
        let tests = vec![TestForm::away_from_origin(fam.space()).unwrap()];
        let rep = skoda_elmir_experiment(&fam, &tests, &small_grid(6)).unwrap();
        let t = &rep.tests[0];
        assert!(t.rows.iter().filter(|r| r.eps < 0.3).all(|r| r.flux == Complex64::zero()));
        assert_eq!(t.relative_pairing, 0.0);
        assert_eq!(rep.verdict, ClosednessVerdict::Consistent, "{}", rep.render());
    }

    #[test]
    fn singular_pairing_decays() {
        let fam = SingularFamily::point(2, 1.0).unwrap();
        let tests = default_test_forms(fam.space(), 7).unwrap();
        let rep = skoda_elmir_experiment(&fam, &tests, &small_grid(7)).unwrap();
        assert_eq!(rep.verdict, ClosednessVerdict::Consistent, "{}", rep.render());
    }
}
