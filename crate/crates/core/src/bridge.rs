//! Quaternionic Hermitian metrics and real (2,0)-forms.
//!
//! Real tangent vectors are written in the basis `x_1, y_1, x_2, y_2, …`
//! with `z_k = x_k + i y_k`. A metric `g` gives the 2-forms
//! `ω_L(X, Y) = g(X, L Y)` and the (2,0)-form `Ω_g = i ω_K − ω_J`; the flat
//! metric gives `Ω = Σ dz_{2i−1} ∧ dz_{2i}`. The inverse is
//! `g(X, Y) = Re η(X, J Y)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::BridgeError;
use crate::form::Form;
use crate::linalg::{psd_with_witness, Definiteness, Field, Mat};
use crate::quaternion::{apply_operator, apply_to_vector, conjugate_vector, holomorphic_vector, real_structure, QuatOperator};
use crate::scalar::{rat, CRational, Rational, Scalar};
use crate::space::ModelSpace;

/// Scalars the bridge can work over: exact complex rationals and complex
/// doubles. The difference is how generalized eigenproblems are solved.
pub trait BridgeScalar: Scalar + Field {
    /// Eigenvalues `β` and eigenspace bases of `g2 v = β g1 v`, ascending.
    fn eigenspaces(
        g1: &Mat<Self::Real>,
        g2: &Mat<Self::Real>,
    ) -> Result<Vec<(Self::Real, Vec<Vec<Self::Real>>)>, BridgeError>;

    /// Whether a symmetric matrix is positive definite.
    fn positive_definite(m: &Mat<Self::Real>) -> bool;

    /// Whether `r` counts as zero relative to `scale`.
    fn small(r: &Self::Real, scale: &Self::Real) -> bool;
}

fn to_dmatrix<R: Field>(m: &Mat<R>, f: impl Fn(&R) -> f64) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows, m.cols, |i, j| f(&m[(i, j)]))
}

/// Float generalized eigenpairs via Cholesky reduction. Returns `None` if
/// `g1` is not positive definite.
pub fn generalized_eigen_f64(g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> Option<(Vec<f64>, Vec<Vec<f64>>)> {
    let chol = g1.clone().cholesky()?;
    let l = chol.l();
    let linv = l.clone().try_inverse()?;
    let c = &linv * g2 * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = order
        .iter()
        .map(|&i| {
            let w = eig.eigenvectors.column(i).into_owned();
            let v = linv.transpose() * w;
            v.iter().copied().collect()
        })
        .collect();
    Some((vals, vecs))
}

fn cluster(vals: &[f64], tol: f64) -> Vec<(f64, Vec<usize>)> {
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match out.last_mut() {
            Some((c, idx)) if (v - *c).abs() <= tol * (1.0 + c.abs()) => idx.push(i),
            _ => out.push((v, vec![i])),
        }
    }
    for (c, idx) in &mut out {
        *c = idx.iter().map(|&i| vals[i]).sum::<f64>() / idx.len() as f64;
    }
    out
}

/// Best rational approximation with denominator at most `max_den`.
pub fn rationalize(x: f64, max_den: i64) -> Rational {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let (p2, q2) = (a * p1 + p0, a * q1 + q0);
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac.abs() < 1e-12 {
            break;
        }
        r = 1.0 / frac;
    }
    if q1 == 0 {
        return crate::scalar::rational_from_f64(x, 1);
    }
    rat(p1, q1)
}

impl BridgeScalar for CRational {
    fn eigenspaces(
        g1: &Mat<Rational>,
        g2: &Mat<Rational>,
    ) -> Result<Vec<(Rational, Vec<Vec<Rational>>)>, BridgeError> {
        let f = crate::scalar::rational_to_f64;
        let (vals, _) = generalized_eigen_f64(&to_dmatrix(g1, f), &to_dmatrix(g2, f)).ok_or(BridgeError::NotStrictlyPositive)?;
        let mut out = Vec::new();
        let mut total = 0;
        for (v, _) in cluster(&vals, 1e-7) {
            let beta = rationalize(v, 1 << 20);
            let m = Mat::from_fn(g1.rows, g1.cols, |i, j| g2[(i, j)].clone() - beta.clone() * g1[(i, j)].clone());
            let ker = m.nullspace();
            if ker.is_empty() {
                return Err(BridgeError::IrrationalSpectrum);
            }
            total += ker.len();
            out.push((beta, ker));
        }
        if total != g1.rows {
            return Err(BridgeError::IrrationalSpectrum);
        }
        Ok(out)
    }

    fn positive_definite(m: &Mat<Rational>) -> bool {
        matches!(psd_with_witness(m), Definiteness::Semidefinite { strict: true })
    }

    fn small(r: &Rational, _scale: &Rational) -> bool {
        r.is_zero()
    }
}

impl BridgeScalar for Complex64 {
    fn eigenspaces(g1: &Mat<f64>, g2: &Mat<f64>) -> Result<Vec<(f64, Vec<Vec<f64>>)>, BridgeError> {
        let (vals, vecs) =
            generalized_eigen_f64(&to_dmatrix(g1, |x| *x), &to_dmatrix(g2, |x| *x)).ok_or(BridgeError::NotStrictlyPositive)?;
        Ok(cluster(&vals, 1e-9)
            .into_iter()
            .map(|(c, idx)| (c, idx.into_iter().map(|i| vecs[i].clone()).collect()))
            .collect())
    }

    fn positive_definite(m: &Mat<f64>) -> bool {
        to_dmatrix(m, |x| *x).cholesky().is_some()
    }

    fn small(r: &f64, scale: &f64) -> bool {
        r.abs() <= 1e-9 * scale.abs().max(1e-300)
    }
}

fn embed<S: Scalar>(r: &S::Real) -> S {
    S::from_parts(r.clone(), S::Real::zero())
}

fn half<S: Scalar>() -> S {
    S::from_crational(&CRational::new(rat(1, 2), Rational::zero()))
}

/// The real basis vector with index `j` (`x_k` for `j = 2k`, `y_k` for
/// `j = 2k + 1`) as values on the 4n generators.
pub fn real_basis_vector<S: Scalar>(space: &ModelSpace, j: usize) -> Vec<S> {
    let m = space.complex_dim();
    let k = j / 2;
    let mut v = vec![S::zero(); 2 * m];
    if j.is_multiple_of(2) {
        v[k] = S::one();
        v[m + k] = S::one();
    } else {
        v[k] = S::i_pow(1);
        v[m + k] = S::i_pow(3);
    }
    v
}

/// Real coordinates `(x_1, y_1, …)` of a vector given on the generators.
/// Complex vectors get complex coordinates.
pub fn real_coordinates<S: Scalar>(space: &ModelSpace, v: &[S]) -> Vec<S> {
    let m = space.complex_dim();
    let h = half::<S>();
    let mut out = Vec::with_capacity(2 * m);
    for k in 0..m {
        let (a, b) = (v[k].clone(), v[m + k].clone());
        out.push((a.clone() + b.clone()) * h.clone());
        out.push((a - b) * h.clone() * S::i_pow(3));
    }
    out
}

/// The vector with the given real coordinates, as values on the generators.
pub fn from_real_coordinates<S: Scalar>(space: &ModelSpace, x: &[S]) -> Vec<S> {
    let m = space.complex_dim();
    let mut v = vec![S::zero(); 2 * m];
    for k in 0..m {
        let iy = x[2 * k + 1].clone() * S::i_pow(1);
        v[k] = x[2 * k].clone() + iy.clone();
        v[m + k] = x[2 * k].clone() - iy;
    }
    v
}

/// The real `4n × 4n` matrix of `L` acting on vectors.
pub fn operator_matrix<S: Scalar>(op: QuatOperator, space: &ModelSpace) -> Mat<S::Real> {
    let d = 2 * space.complex_dim();
    let cols: Vec<Vec<S>> = (0..d)
        .map(|j| real_coordinates(space, &apply_to_vector(op, space, &real_basis_vector::<S>(space, j))))
        .collect();
    Mat::from_fn(d, d, |i, j| cols[j][i].re())
}

/// `Σ_s row_s θ^s`, with `θ` the real coordinate covectors
/// `dx_k = (dz_k + dz̄_k)/2`, `dy_k = (dz_k − dz̄_k)/(2i)`.
pub fn covector_form<S: Scalar>(space: ModelSpace, row: &[S]) -> Form<S> {
    let m = space.complex_dim();
    let h = half::<S>();
    let mut out = Form::zero(space, 1);
    for k in 0..m {
        let (a, b) = (row[2 * k].clone(), row[2 * k + 1].clone());
        let mib = b * S::i_pow(3);
        out.add_term(crate::form::Blade(1 << space.dz(k + 1).0), (a.clone() + mib.clone()) * h.clone());
        out.add_term(crate::form::Blade(1 << space.dzb(k + 1).0), (a - mib) * h.clone());
    }
    out
}

/// Values `η(e_s, e_t)` of a 2-form on the real basis.
pub fn two_form_matrix<S: Scalar + Field>(eta: &Form<S>) -> Mat<S> {
    let space = eta.space();
    let d = 2 * space.complex_dim();
    let basis: Vec<Vec<S>> = (0..d).map(|j| real_basis_vector(&space, j)).collect();
    let mut m = Mat::zeros(d, d);
    for s in 0..d {
        let c = eta.contract(&basis[s]);
        for t in 0..d {
            if s != t {
                m[(s, t)] = c.contract(&basis[t]).coefficient(crate::form::Blade::EMPTY);
            }
        }
    }
    m
}

/// The 2-form with values `a[(s, t)]` on the real basis (`a` antisymmetric).
pub fn two_form_from_matrix<S: Scalar + Field>(space: ModelSpace, a: &Mat<S>) -> Form<S> {
    let d = 2 * space.complex_dim();
    let theta: Vec<Form<S>> = (0..d)
        .map(|s| {
            let mut row = vec![S::zero(); d];
            row[s] = S::one();
            covector_form(space, &row)
        })
        .collect();
    let mut out = Form::zero(space, 2);
    for s in 0..d {
        for t in s + 1..d {
            if !Field::negligible(&a[(s, t)]) {
                out = &out + &(&theta[s] ^ &theta[t]).scale(&a[(s, t)]);
            }
        }
    }
    out
}

/// A symmetric, SU(2)-invariant bilinear form on the real tangent space.
#[derive(Clone, Debug, PartialEq)]
pub struct QHermForm<R> {
    space: ModelSpace,
    matrix: Mat<R>,
}

impl<R: Field + PartialOrd> QHermForm<R> {
    /// Validates size, symmetry and invariance under `I`, `J`, `K`.
    pub fn new<S: Scalar<Real = R>>(space: ModelSpace, matrix: Mat<R>) -> Result<Self, BridgeError> {
        let d = 2 * space.complex_dim();
        if matrix.rows != d || matrix.cols != d {
            return Err(BridgeError::BadSize { got: matrix.rows.max(matrix.cols), want: d });
        }
        for i in 0..d {
            for j in 0..i {
                if !Field::negligible(&(matrix[(i, j)].clone() - matrix[(j, i)].clone())) {
                    return Err(BridgeError::NotSymmetric(i, j));
                }
            }
        }
        for op in QuatOperator::ALL {
            let l = operator_matrix::<S>(op, &space);
            let moved = l.transpose().mul(&matrix).mul(&l);
            for i in 0..d {
                for j in 0..d {
                    if !Field::negligible(&(moved[(i, j)].clone() - matrix[(i, j)].clone())) {
                        return Err(BridgeError::NotInvariant { op: op.label(), row: i, col: j });
                    }
                }
            }
        }
        Ok(Self { space, matrix })
    }

    /// The flat metric.
    pub fn flat(space: ModelSpace) -> Self {
        Self { space, matrix: Mat::identity(2 * space.complex_dim()) }
    }

    /// The zero form.
    pub fn zero(space: ModelSpace) -> Self {
        let d = 2 * space.complex_dim();
        Self { space, matrix: Mat::zeros(d, d) }
    }

    /// `Σ_L Lᵀ a L` over `L ∈ {1, I, J, K}`, an invariant form built from
    /// any symmetric `a`.
    pub fn average<S: Scalar<Real = R>>(space: ModelSpace, a: &Mat<R>) -> Self {
        let mut acc = a.clone();
        for op in QuatOperator::ALL {
            let l = operator_matrix::<S>(op, &space);
            let t = l.transpose().mul(a).mul(&l);
            acc = Mat::from_fn(acc.rows, acc.cols, |i, j| acc[(i, j)].clone() + t[(i, j)].clone());
        }
        Self { space, matrix: acc }
    }

    pub fn space(&self) -> ModelSpace {
        self.space
    }

    pub fn matrix(&self) -> &Mat<R> {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<R>> {
        (0..self.matrix.rows)
            .map(|i| (0..self.matrix.cols).map(|j| self.matrix[(i, j)].clone()).collect())
            .collect()
    }

    /// `g(x, y)` on real coordinate vectors.
    pub fn apply(&self, x: &[R], y: &[R]) -> R {
        let gy = self.matrix.mul_vec(y);
        x.iter().zip(gy).fold(R::zero(), |acc, (a, b)| acc + a.clone() * b)
    }

    /// Scales by `t`.
    pub fn scale(&self, t: &R) -> Self {
        let m = &self.matrix;
        Self { space: self.space, matrix: Mat::from_fn(m.rows, m.cols, |i, j| m[(i, j)].clone() * t.clone()) }
    }
}

impl QHermForm<Rational> {
    /// Parses rows of an exact metric, validating invariance.
    pub fn from_rows(space: ModelSpace, rows: Vec<Vec<Rational>>) -> Result<Self, BridgeError> {
        let d = 2 * space.complex_dim();
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(BridgeError::BadSize { got: rows.len(), want: d });
        }
        Self::new::<CRational>(space, Mat::from_rows(rows))
    }

    pub fn to_f64(&self) -> QHermForm<f64> {
        let m = &self.matrix;
        QHermForm {
            space: self.space,
            matrix: Mat::from_fn(m.rows, m.cols, |i, j| crate::scalar::rational_to_f64(&m[(i, j)])),
        }
    }
}

/// `ω_L(X, Y) = g(X, L Y)`.
pub fn omega_form<S: Scalar + Field>(op: QuatOperator, g: &QHermForm<S::Real>) -> Form<S> {
    let l = operator_matrix::<S>(op, &g.space);
    let a = g.matrix.mul(&l);
    let a = Mat::from_fn(a.rows, a.cols, |i, j| embed::<S>(&a[(i, j)]));
    two_form_from_matrix(g.space, &a)
}

/// `Ω_g = i ω_K − ω_J`, a real (2,0)-form.
pub fn form_from_metric<S: Scalar + Field>(g: &QHermForm<S::Real>) -> Form<S> {
    let wj: Form<S> = omega_form(QuatOperator::J, g);
    let wk: Form<S> = omega_form(QuatOperator::K, g);
    &wk.scale_i(1) - &wj
}

fn approx_equal<S: Scalar + Field>(a: &Form<S>, b: &Form<S>) -> bool {
    (a - b).terms().all(|(_, c)| Field::negligible(c))
}

/// Whether `J(η̄) = η`, up to rounding in float mode.
pub fn is_real_approx<S: Scalar + Field>(eta: &Form<S>) -> bool {
    match real_structure(eta) {
        Ok(r) => approx_equal(&r, eta),
        Err(_) => false,
    }
}

/// `g(X, Y) = Re η(X, J Y)`, inverse to [`form_from_metric`].
pub fn metric_from_form<S: Scalar + Field>(eta: &Form<S>) -> Result<QHermForm<S::Real>, BridgeError> {
    eta.require_bidegree(2, 0)?;
    if !is_real_approx(eta) {
        return Err(crate::error::FormError::NotReal.into());
    }
    let space = eta.space();
    let a = two_form_matrix(eta);
    let j = operator_matrix::<S>(QuatOperator::J, &space);
    let j = Mat::from_fn(j.rows, j.cols, |r, c| embed::<S>(&j[(r, c)]));
    let aj = a.mul(&j);
    let d = aj.rows;
    let matrix = Mat::from_fn(d, d, |r, c| {
        // symmetrize away float noise; exactly symmetric in exact mode
        let s = aj[(r, c)].re() + aj[(c, r)].re();
        s * Scalar::re(&half::<S>())
    });
    Ok(QHermForm { space, matrix })
}

/// A sorted list of real eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenProfile {
    pub values: Vec<f64>,
}

impl EigenProfile {
    /// Sum of the `q` smallest eigenvalues.
    pub fn min_sum(&self, q: usize) -> f64 {
        self.values.iter().take(q).sum()
    }
}

fn require_positive<S: BridgeScalar>(g: &QHermForm<S::Real>) -> Result<(), BridgeError> {
    if S::positive_definite(&g.matrix) {
        Ok(())
    } else {
        Err(BridgeError::NotPositiveDefinite)
    }
}

fn float_eigenvalues<R: Field>(g: &Mat<R>, s: &Mat<R>, f: impl Fn(&R) -> f64) -> Result<Vec<f64>, BridgeError> {
    generalized_eigen_f64(&to_dmatrix(g, &f), &to_dmatrix(s, &f))
        .map(|(v, _)| v)
        .ok_or(BridgeError::NotPositiveDefinite)
}

/// Quaternionic eigenvalues of a real (2,0)-form relative to `g`: the `n`
/// generalized eigenvalues of its metric, each of real multiplicity 4.
pub fn quaternionic_eigenvalues<S: BridgeScalar>(eta: &Form<S>, g: &QHermForm<S::Real>) -> Result<EigenProfile, BridgeError> {
    require_positive::<S>(g)?;
    let h = metric_from_form(eta)?;
    let all = float_eigenvalues(&g.matrix, &h.matrix, S::real_to_f64)?;
    Ok(EigenProfile { values: all.into_iter().step_by(4).collect() })
}

/// The symmetric matrix `S(X, Y) = −ρ(X, I Y)` of a real (1,1)-form.
pub fn hermitian_matrix<S: Scalar + Field>(rho: &Form<S>) -> Result<Mat<S::Real>, BridgeError> {
    rho.require_bidegree(1, 1)?;
    if !approx_equal(&rho.conjugate(), rho) {
        return Err(crate::error::FormError::NotReal.into());
    }
    let space = rho.space();
    let a = two_form_matrix(rho);
    let l = operator_matrix::<S>(QuatOperator::I, &space);
    let l = Mat::from_fn(l.rows, l.cols, |r, c| embed::<S>(&l[(r, c)]));
    let s = a.mul(&l);
    let d = s.rows;
    let h = Scalar::re(&half::<S>());
    Ok(Mat::from_fn(d, d, |r, c| -((s[(r, c)].re() + s[(c, r)].re()) * h.clone())))
}

/// Eigenvalues of a real (1,1)-form relative to `g`: `2n` values, each of
/// real multiplicity 2. `ω_I` has all eigenvalues 1 against the flat metric.
pub fn hermitian_eigenvalues<S: BridgeScalar>(rho: &Form<S>, g: &QHermForm<S::Real>) -> Result<EigenProfile, BridgeError> {
    require_positive::<S>(g)?;
    let s = hermitian_matrix(rho)?;
    let all = float_eigenvalues(&g.matrix, &s, S::real_to_f64)?;
    Ok(EigenProfile { values: all.into_iter().step_by(2).collect() })
}

/// The (1,1)-side eigenvalues of a real (2,0)-form `η`: those of
/// `i·rmap(1,1,η)`. They come in equal pairs.
pub fn induced_hermitian_eigenvalues<S: BridgeScalar>(
    eta: &Form<S>,
    g: &QHermForm<S::Real>,
) -> Result<EigenProfile, BridgeError> {
    let rho = crate::rmap::rmap(1, 1, eta)?.scale_i(1);
    hermitian_eigenvalues(&rho, g)
}

/// A simultaneous diagonalization `η = Σ α_i ξ_i ∧ J(ξ̄_i)`,
/// `η′ = Σ β_i ξ_i ∧ J(ξ̄_i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagonalization<S: Scalar> {
    pub frame: Vec<Form<S>>,
    pub alpha: Vec<S::Real>,
    pub beta: Vec<S::Real>,
}

impl<S: Scalar + Field> Diagonalization<S> {
    /// `Σ c_i ξ_i ∧ J(ξ̄_i)`.
    pub fn reconstruct(&self, coeffs: &[S::Real]) -> Form<S> {
        let space = self.frame[0].space();
        let mut out = Form::zero(space, 2);
        for (xi, c) in self.frame.iter().zip(coeffs) {
            let jx = apply_operator(QuatOperator::J, &xi.conjugate());
            out = &out + &(xi ^ &jx).scale(&embed::<S>(c));
        }
        out
    }
}

fn add_scaled<R: Field>(v: &[R], w: &[R], t: &R) -> Vec<R> {
    v.iter().zip(w).map(|(a, b)| a.clone() + t.clone() * b.clone()).collect()
}

/// Diagonalizes two real (2,0)-forms simultaneously; `η` must be strictly
/// positive. Exact inputs need a rational spectrum.
pub fn simultaneous_diagonalize<S: BridgeScalar>(eta: &Form<S>, eta2: &Form<S>) -> Result<Diagonalization<S>, BridgeError> {
    let space = eta.space();
    let n = space.n();
    let d = 4 * n;
    let g1 = metric_from_form(eta)?;
    let g2 = metric_from_form(eta2)?;
    if !S::positive_definite(&g1.matrix) {
        return Err(BridgeError::NotStrictlyPositive);
    }
    let ops: Vec<Mat<S::Real>> = QuatOperator::ALL.iter().map(|&op| operator_matrix::<S>(op, &space)).collect();
    let images = |f: &[S::Real]| -> Vec<Vec<S::Real>> {
        let mut out = vec![f.to_vec()];
        out.extend(ops.iter().map(|l| l.mul_vec(f)));
        out
    };
    let mut frame_vectors: Vec<Vec<S::Real>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for (_, vecs) in S::eigenspaces(&g1.matrix, &g2.matrix)? {
        for v in vecs {
            let mut w = v.clone();
            for f in &frame_vectors {
                for lf in images(f) {
                    let num = g1.apply(&lf, &w);
                    let den = g1.apply(&lf, &lf);
                    w = add_scaled(&w, &lf, &(-(num / den)));
                }
            }
            let norm = g1.apply(&w, &w);
            if S::small(&norm, &g1.apply(&v, &v)) {
                continue;
            }
            alpha.push(norm);
            beta.push(g2.apply(&w, &w));
            frame_vectors.push(w);
        }
    }
    if frame_vectors.len() != n {
        return Err(BridgeError::IrrationalSpectrum);
    }
    // P sends L s_i to L f_i, with s_i the x-direction of z_{2i−1}
    let mut src = Mat::zeros(d, d);
    let mut dst = Mat::zeros(d, d);
    for (i, f) in frame_vectors.iter().enumerate() {
        let mut s = vec![S::Real::zero(); d];
        s[4 * i] = S::Real::one();
        for (k, (a, b)) in images(&s).into_iter().zip(images(f)).enumerate() {
            for r in 0..d {
                src[(r, 4 * i + k)] = a[r].clone();
                dst[(r, 4 * i + k)] = b[r].clone();
            }
        }
    }
    let q = src.mul(&dst.inverse().ok_or(BridgeError::DependentInputs)?);
    let frame = (0..n)
        .map(|i| {
            let a = 2 * i;
            let row: Vec<S> = (0..d)
                .map(|s| embed::<S>(&q[(2 * a, s)]) + embed::<S>(&q[(2 * a + 1, s)]) * S::i_pow(1))
                .collect();
            covector_form(space, &row)
        })
        .collect();
    Ok(Diagonalization { frame, alpha, beta })
}

/// `J(x̄)` for a (1,0) vector given by its `2n` holomorphic components.
pub fn j_conjugate<S: Scalar>(space: &ModelSpace, x: &[S]) -> Vec<S> {
    let full = holomorphic_vector(space, x);
    let v = apply_to_vector(QuatOperator::J, space, &conjugate_vector(space, &full));
    v[..space.complex_dim()].to_vec()
}

fn eval2<S: Scalar>(eta: &Form<S>, x: &[S], y: &[S]) -> S {
    let space = eta.space();
    eta.evaluate(&[holomorphic_vector(&space, x), holomorphic_vector(&space, y)])
}

/// Quaternionic Gram–Schmidt: `y_k = x_k + Σ_{i<k} (a_i y_i + b_i J(ȳ_i))`
/// with `η(y_k, y_j) = η(y_k, J(ȳ_j)) = 0` for `j < k`. Vectors are given
/// by their `2n` holomorphic components.
pub fn quaternionic_gram_schmidt<S: BridgeScalar>(eta: &Form<S>, xs: &[Vec<S>]) -> Result<Vec<Vec<S>>, BridgeError> {
    let space = eta.space();
    let m = space.complex_dim();
    if xs.iter().any(|x| x.len() != m) {
        return Err(BridgeError::BadSize { got: xs.iter().map(Vec::len).find(|&l| l != m).unwrap_or(0), want: m });
    }
    let g = metric_from_form(eta)?;
    if !S::positive_definite(&g.matrix) {
        return Err(BridgeError::NotStrictlyPositive);
    }
    let mut span: Vec<Vec<S>> = Vec::new();
    for x in xs {
        span.push(x.clone());
        span.push(j_conjugate(&space, x));
    }
    if Mat::from_rows(span).rank() < 2 * xs.len() {
        return Err(BridgeError::DependentInputs);
    }
    let mut ys: Vec<Vec<S>> = Vec::new();
    for x in xs {
        let basis: Vec<Vec<S>> = ys.iter().flat_map(|y| [y.clone(), j_conjugate(&space, y)]).collect();
        let mut y = x.clone();
        if !basis.is_empty() {
            let tests = &basis;
            let a = Mat::from_fn(tests.len(), basis.len(), |r, c| eval2(eta, &basis[c], &tests[r]));
            let rhs: Vec<S> = tests.iter().map(|t| -eval2(eta, x, t)).collect();
            let coeffs = a.solve(&rhs).ok_or(BridgeError::NotStrictlyPositive)?;
            for (c, b) in coeffs.iter().zip(&basis) {
                y = y.iter().zip(b).map(|(u, v)| u.clone() + c.clone() * v.clone()).collect();
            }
        }
        ys.push(y);
    }
    Ok(ys)
}

/// Generator index helper for tests and callers: the (1,0) basis vector
/// `e_k` (1-based) as `2n` holomorphic components.
pub fn unit_vector<S: Scalar>(space: &ModelSpace, k: usize) -> Vec<S> {
    let mut v = vec![S::zero(); space.complex_dim()];
    v[k - 1] = S::one();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{cint, int};

    fn sp(n: usize) -> ModelSpace {
        ModelSpace::new(n).unwrap()
    }

    fn omega(s: ModelSpace) -> Form {
        (1..=s.n()).map(|i| &Form::dz(s, 2 * i - 1) ^ &Form::dz(s, 2 * i)).fold(Form::zero(s, 2), |a, b| &a + &b)
    }

    fn omega_i(s: ModelSpace) -> Form {
        let half_i = CRational::new(Rational::zero(), rat(1, 2));
        (1..=2 * s.n())
            .map(|k| (&Form::dz(s, k) ^ &Form::dzb(s, k)).scale(&half_i))
            .fold(Form::zero(s, 2), |a, b| &a + &b)
    }

    #[test]
    fn flat_metric_gives_omega() {
        for n in 1..=2 {
            let s = sp(n);
            let g = QHermForm::<Rational>::flat(s);
            assert_eq!(form_from_metric::<CRational>(&g), omega(s));
            assert_eq!(omega_form::<CRational>(QuatOperator::I, &g), omega_i(s));
            assert_eq!(metric_from_form(&omega(s)).unwrap(), g);
            assert!(form_from_metric::<CRational>(&QHermForm::zero(s)).is_zero());
        }
    }

    #[test]
    fn operators_are_quaternionic() {
        let s = sp(2);
        let [i, j, k] = QuatOperator::ALL.map(|op| operator_matrix::<CRational>(op, &s));
        let minus_one = Mat::from_fn(8, 8, |a, b| if a == b { int(-1) } else { int(0) });
        assert_eq!(i.mul(&i), minus_one);
        assert_eq!(j.mul(&j), minus_one);
        assert_eq!(k.mul(&k), minus_one);
        let ij = i.mul(&j);
        let ji = j.mul(&i);
        assert_eq!(ij, Mat::from_fn(8, 8, |a, b| -ji[(a, b)].clone()));
    }

    #[test]
    fn block_scaled_metric() {
        let s = sp(2);
        let mut m = Mat::<Rational>::identity(8);
        for a in 0..4 {
            m[(a, a)] = int(3);
        }
        let g = QHermForm::new::<CRational>(s, m).unwrap();
        let expect = &(&Form::dz(s, 1) ^ &Form::dz(s, 2)).scale(&cint(3, 0)) + &(&Form::dz(s, 3) ^ &Form::dz(s, 4));
        assert_eq!(form_from_metric::<CRational>(&g), expect);
    }

    #[test]
    fn non_invariant_metric_is_rejected() {
        let s = sp(1);
        let mut m = Mat::<Rational>::identity(4);
        m[(0, 0)] = int(2);
        assert!(matches!(QHermForm::new::<CRational>(s, m), Err(BridgeError::NotInvariant { .. })));
    }

    #[test]
    fn eigenvalues_of_canonical_forms() {
        let s = sp(2);
        let g = QHermForm::<Rational>::flat(s);
        let e = hermitian_eigenvalues(&omega_i(s), &g).unwrap();
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let q = quaternionic_eigenvalues(&omega(s).scale(&cint(3, 0)), &g).unwrap();
        assert_eq!(q.values.len(), 2);
        assert!(q.values.iter().all(|v| (v - 3.0).abs() < 1e-12));
        let ind = induced_hermitian_eigenvalues(&omega(s), &g).unwrap();
        assert!(ind.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn indefinite_example_pairs() {
        let s = sp(2);
        let eta: Form = &(&Form::dz(s, 1) ^ &Form::dz(s, 2)) - &(&Form::dz(s, 3) ^ &Form::dz(s, 4));
        let g = QHermForm::<Rational>::flat(s);
        let q = quaternionic_eigenvalues(&eta, &g).unwrap();
        assert_eq!(q.values.len(), 2);
        assert!((q.values[0] + 1.0).abs() < 1e-12 && (q.values[1] - 1.0).abs() < 1e-12);
        let ind = induced_hermitian_eigenvalues(&eta, &g).unwrap();
        assert_eq!(ind.values.len(), 4);
        assert!((ind.values[0] - ind.values[1]).abs() < 1e-12);
        assert!((ind.values[2] - ind.values[3]).abs() < 1e-12);
    }

    #[test]
    fn diagonalize_canonical() {
        let s = sp(2);
        let o = omega(s);
        let d = simultaneous_diagonalize(&o, &o.scale(&cint(2, 0))).unwrap();
        assert_eq!(d.alpha, vec![int(1), int(1)]);
        assert_eq!(d.beta, vec![int(2), int(2)]);
        assert_eq!(d.reconstruct(&d.alpha), o);
        assert_eq!(d.reconstruct(&d.beta), o.scale(&cint(2, 0)));
    }

    #[test]
    fn gram_schmidt_examples() {
        let s = sp(2);
        let o = omega(s);
        let e = |k| unit_vector::<CRational>(&s, k);
        let frame = vec![e(1), e(3)];
        assert_eq!(quaternionic_gram_schmidt(&o, &frame).unwrap(), frame);
        let xs = vec![e(1), e(3).iter().zip(e(1)).map(|(a, b)| a + b).collect::<Vec<_>>()];
        let ys = quaternionic_gram_schmidt(&o, &xs).unwrap();
        assert_eq!(ys[0], xs[0]);
        assert!(eval2(&o, &ys[1], &ys[0]).is_zero());
        assert!(eval2(&o, &ys[1], &j_conjugate(&s, &ys[0])).is_zero());
        assert!(quaternionic_gram_schmidt(&o, &[e(1), j_conjugate(&s, &e(1))]).is_err());
    }
}
