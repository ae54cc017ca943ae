//! Curvature tensors of the reference geometries: constant holomorphic
//! sectional curvature, the complex quadric, products, flat factors, and
//! seeded random Kähler and Kähler–Einstein tensors.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::curvature::{
    calabi_from_tensor, ricci_with_tol, tensor_from_calabi, AlgebraicCurvatureTensor, CurvatureError, EINSTEIN_TOL,
    SYMMETRY_TOL,
};
use crate::linalg::{hermitian_eigen, kernel_projector, CMatrix, LinalgError};
use crate::sampling::{random_hermitian, stream};
use crate::spectral::{k_test, PositivityReport, Spectrum};
use crate::C64;

#[allow(unused_imports)]
use num_traits::Float;

/// A model geometry.
#[derive(Clone, Debug, PartialEq)]
pub enum SpaceDescriptor {
    /// Constant holomorphic sectional curvature `c`; the Calabi operator is `c · Id`.
    Chsc { n: usize, c: f64 },
    /// The quadric `SO(n+2)/(SO(2)×SO(n))`, normalized so that the largest Calabi
    /// eigenvalue is 1, then multiplied by `scale` (`−1` gives the noncompact dual).
    Quadric { n: usize, scale: f64 },
    Product(Vec<SpaceDescriptor>),
    /// Flat `ℂ^k`.
    Flat { k: usize },
    RandomKaehler { n: usize, seed: u64 },
    RandomKaehlerEinstein { n: usize, seed: u64 },
}

impl SpaceDescriptor {
    pub fn dim(&self) -> usize {
        match self {
            SpaceDescriptor::Chsc { n, .. }
            | SpaceDescriptor::Quadric { n, .. }
            | SpaceDescriptor::RandomKaehler { n, .. }
            | SpaceDescriptor::RandomKaehlerEinstein { n, .. } => *n,
            SpaceDescriptor::Flat { k } => *k,
            SpaceDescriptor::Product(fs) => fs.iter().map(SpaceDescriptor::dim).sum(),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            SpaceDescriptor::Chsc { n, c } => {
                if *n == 0 {
                    return Err(ModelError::Descriptor("chsc needs n >= 1"));
                }
                if !c.is_finite() {
                    return Err(ModelError::Descriptor("chsc needs a finite c"));
                }
            }
            SpaceDescriptor::Quadric { n, scale } => {
                if *n == 0 {
                    return Err(ModelError::Descriptor("quadric needs n >= 1"));
                }
                if !scale.is_finite() {
                    return Err(ModelError::Descriptor("quadric needs a finite scale"));
                }
            }
            SpaceDescriptor::Flat { k } => {
                if *k == 0 {
                    return Err(ModelError::Descriptor("flat needs k >= 1"));
                }
            }
            SpaceDescriptor::RandomKaehler { n, .. } | SpaceDescriptor::RandomKaehlerEinstein { n, .. } => {
                if *n == 0 {
                    return Err(ModelError::Descriptor("random spaces need n >= 1"));
                }
            }
            SpaceDescriptor::Product(fs) => {
                if fs.is_empty() {
                    return Err(ModelError::Descriptor("product needs at least one factor"));
                }
                for f in fs {
                    f.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Complex dimension of flat factors, counted through nested products.
    pub fn flat_dim(&self) -> usize {
        match self {
            SpaceDescriptor::Flat { k } => *k,
            SpaceDescriptor::Product(fs) => fs.iter().map(SpaceDescriptor::flat_dim).sum(),
            _ => 0,
        }
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceDescriptor::Chsc { n, c } => write!(f, "chsc:n={n},c={c}"),
            SpaceDescriptor::Quadric { n, scale } if *scale == 1.0 => write!(f, "quadric:n={n}"),
            SpaceDescriptor::Quadric { n, scale } => write!(f, "quadric:n={n},scale={scale}"),
            SpaceDescriptor::Flat { k } => write!(f, "flat:k={k}"),
            SpaceDescriptor::RandomKaehler { n, seed } => write!(f, "random:n={n},seed={seed}"),
            SpaceDescriptor::RandomKaehlerEinstein { n, seed } => write!(f, "random-ke:n={n},seed={seed}"),
            SpaceDescriptor::Product(fs) => {
                f.write_str("product:[")?;
                for (i, x) in fs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str("]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    Descriptor(&'static str),
    Curvature(CurvatureError),
    Linalg(LinalgError),
    /// The Einstein projection left a traceless Ricci part above tolerance.
    EinsteinProjection { residual: f64 },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Descriptor(s) => write!(f, "invalid space descriptor: {s}"),
            ModelError::Curvature(e) => write!(f, "{e}"),
            ModelError::Linalg(e) => write!(f, "{e}"),
            ModelError::EinsteinProjection { residual } => {
                write!(f, "Einstein projection failed (traceless Ricci residual {residual:e})")
            }
        }
    }
}

impl core::error::Error for ModelError {}

impl From<CurvatureError> for ModelError {
    fn from(e: CurvatureError) -> Self {
        ModelError::Curvature(e)
    }
}

impl From<LinalgError> for ModelError {
    fn from(e: LinalgError) -> Self {
        ModelError::Linalg(e)
    }
}

pub fn build(space: &SpaceDescriptor) -> Result<AlgebraicCurvatureTensor, ModelError> {
    space.validate()?;
    match space {
        SpaceDescriptor::Chsc { n, c } => chsc(*n, *c),
        SpaceDescriptor::Quadric { n, scale } => quadric(*n, *scale),
        SpaceDescriptor::Flat { k } => Ok(AlgebraicCurvatureTensor::zero(*k)),
        SpaceDescriptor::RandomKaehler { n, seed } => random_kaehler(*n, *seed),
        SpaceDescriptor::RandomKaehlerEinstein { n, seed } => random_kaehler_einstein(*n, *seed),
        SpaceDescriptor::Product(fs) => {
            let parts = fs.iter().map(build).collect::<Result<Vec<_>, _>>()?;
            Ok(product(&parts))
        }
    }
}

pub fn chsc(n: usize, c: f64) -> Result<AlgebraicCurvatureTensor, ModelError> {
    let m = n * (n + 1) / 2;
    Ok(tensor_from_calabi(n, &CMatrix::identity(m).scale_real(c), SYMMETRY_TOL)?)
}

/// Orthogonal sum of Kähler tensors. Complex directions of the factors are
/// concatenated, so the real index `i < n_t` of factor `t` goes to `o_t + i`
/// and `n_t + i` goes to `n + o_t + i`.
pub fn product(parts: &[AlgebraicCurvatureTensor]) -> AlgebraicCurvatureTensor {
    let n: usize = parts.iter().map(AlgebraicCurvatureTensor::n).sum();
    let d = 2 * n;
    let mut comps = vec![0.0; d * d * d * d];
    let mut offset = 0;
    for part in parts {
        let nt = part.n();
        let map = |i: usize| if i < nt { offset + i } else { n + offset + (i - nt) };
        let dt = 2 * nt;
        for i in 0..dt {
            for j in 0..dt {
                for k in 0..dt {
                    for l in 0..dt {
                        let v = part.get(i, j, k, l);
                        if v != 0.0 {
                            comps[((map(i) * d + map(j)) * d + map(k)) * d + map(l)] = v;
                        }
                    }
                }
            }
        }
        offset += nt;
    }
    AlgebraicCurvatureTensor::validate(n, comps, SYMMETRY_TOL).expect("block sums keep the symmetries")
}

/// Real `(n+2) × (n+2)` matrices, row-major.
fn mat_mul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let x = a[i * m + k];
            if x == 0.0 {
                continue;
            }
            for j in 0..m {
                out[i * m + j] += x * b[k * m + j];
            }
        }
    }
    out
}

fn bracket(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let ab = mat_mul(a, b, m);
    let ba = mat_mul(b, a, m);
    ab.iter().zip(&ba).map(|(x, y)| x - y).collect()
}

/// Curvature of the quadric before normalization.
///
/// The tangent space is `𝔪 = span{X_{r,b}}` with `X_{r,b} = E_{r,2+b} − E_{2+b,r}`,
/// `r ∈ {0, 1}`, orthonormal for `½ tr(XᵀY)`. The real frame is
/// `e_b = X_{0,b}`, `e_{b+n} = X_{1,b}`, so `J` rotates the `SO(2)` index.
/// With the sign convention in which the round sphere has `R(X,Y,X,Y) > 0`,
/// `R(X, Y)Z = [[X, Y], Z]`.
fn quadric_raw(n: usize) -> Vec<f64> {
    let m = n + 2;
    let d = 2 * n;
    let frame: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let (r, b) = if i < n { (0, i) } else { (1, i - n) };
            let mut x = vec![0.0; m * m];
            x[r * m + 2 + b] = 1.0;
            x[(2 + b) * m + r] = -1.0;
            x
        })
        .collect();
    let inner = |a: &[f64], b: &[f64]| 0.5 * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut comps = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            let xy = bracket(&frame[i], &frame[j], m);
            for k in 0..d {
                let xyz = bracket(&xy, &frame[k], m);
                for l in 0..d {
                    comps[((i * d + j) * d + k) * d + l] = inner(&xyz, &frame[l]);
                }
            }
        }
    }
    comps
}

pub fn quadric(n: usize, scale: f64) -> Result<AlgebraicCurvatureTensor, ModelError> {
    let raw = AlgebraicCurvatureTensor::validate(n, quadric_raw(n), SYMMETRY_TOL)?;
    let cal = calabi_from_tensor(&raw)?;
    let top = hermitian_eigen(&cal.matrix)?.values.last().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(ModelError::Descriptor("quadric Calabi operator has no positive eigenvalue"));
    }
    Ok(raw.scaled(scale / top))
}

/// Calabi spectrum of the normalized quadric and its `n/2` positivity report.
pub fn quadric_spectrum(n: usize) -> Result<(Spectrum, PositivityReport), ModelError> {
    if n < 2 {
        return Err(ModelError::Descriptor("quadric spectrum needs n >= 2"));
    }
    let r = quadric(n, 1.0)?;
    let cal = calabi_from_tensor(&r)?;
    let e = hermitian_eigen(&cal.matrix)?;
    let s = Spectrum { values: e.values, vectors: Some(e.vectors), source: Some(cal.kind) };
    let rep = k_test(&s, n as f64 / 2.0).map_err(|_| ModelError::Descriptor("k out of range"))?;
    Ok((s, rep))
}

/// `tensor_from_calabi` of a GUE-distributed Hermitian matrix.
pub fn random_kaehler(n: usize, seed: u64) -> Result<AlgebraicCurvatureTensor, ModelError> {
    let mut rng = stream(seed, "random-kaehler", n as u64);
    let m = n * (n + 1) / 2;
    Ok(tensor_from_calabi(n, &random_hermitian(m, &mut rng), SYMMETRY_TOL)?)
}

/// Orthogonal projection of Calabi matrices onto the Einstein subspace.
///
/// The traceless Ricci tensor is linear in the Calabi matrix, so the
/// Kähler–Einstein tensors form a linear subspace of the Hermitian matrices.
/// Projecting along its orthogonal complement reaches it in one step.
#[derive(Clone, Debug)]
pub struct EinsteinProjector {
    n: usize,
    projector: Vec<f64>,
}

fn hermitian_params(m: usize) -> usize {
    m * m
}

/// Real coordinates of a Hermitian matrix: diagonal, then `(Re, Im)` above it.
fn hermitian_from_params(m: usize, x: &[f64]) -> CMatrix {
    let mut h = CMatrix::zeros(m, m);
    let mut t = 0;
    for r in 0..m {
        h[(r, r)] = C64::new(x[t], 0.0);
        t += 1;
    }
    for r in 0..m {
        for c in (r + 1)..m {
            let z = C64::new(x[t], x[t + 1]);
            h[(r, c)] = z;
            h[(c, r)] = z.conj();
            t += 2;
        }
    }
    h
}

fn hermitian_to_params(h: &CMatrix) -> Vec<f64> {
    let m = h.rows();
    let mut x = Vec::with_capacity(m * m);
    for r in 0..m {
        x.push(h[(r, r)].re);
    }
    for r in 0..m {
        for c in (r + 1)..m {
            x.push(h[(r, c)].re);
            x.push(h[(r, c)].im);
        }
    }
    x
}

impl EinsteinProjector {
    pub fn new(n: usize) -> Result<Self, ModelError> {
        let m = n * (n + 1) / 2;
        let p = hermitian_params(m);
        let d = 2 * n;
        let mut a = CMatrix::zeros(d * d, p);
        for t in 0..p {
            let mut x = vec![0.0; p];
            x[t] = 1.0;
            let r = tensor_from_calabi(n, &hermitian_from_params(m, &x), SYMMETRY_TOL)?;
            let ric = ricci_with_tol(&r, EINSTEIN_TOL);
            let lambda = ric.scal / d as f64;
            for i in 0..d {
                for j in 0..d {
                    let target = if i == j { lambda } else { 0.0 };
                    a[(i * d + j, t)] = C64::new(ric.get(i, j) - target, 0.0);
                }
            }
        }
        let proj = kernel_projector(&a)?;
        Ok(EinsteinProjector { n, projector: proj.as_slice().iter().map(|z| z.re).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn project(&self, h: &CMatrix) -> CMatrix {
        let m = h.rows();
        let x = hermitian_to_params(h);
        let p = x.len();
        let y: Vec<f64> = (0..p).map(|r| (0..p).map(|c| self.projector[r * p + c] * x[c]).sum()).collect();
        hermitian_from_params(m, &y)
    }
}

/// Random Kähler–Einstein tensor: a GUE Calabi matrix projected onto the
/// Einstein subspace.
pub fn random_kaehler_einstein(n: usize, seed: u64) -> Result<AlgebraicCurvatureTensor, ModelError> {
    random_kaehler_einstein_with(&EinsteinProjector::new(n)?, seed)
}

pub fn random_kaehler_einstein_with(
    proj: &EinsteinProjector,
    seed: u64,
) -> Result<AlgebraicCurvatureTensor, ModelError> {
    let n = proj.n();
    let mut rng = stream(seed, "random-kaehler-einstein", n as u64);
    let m = n * (n + 1) / 2;
    let h = proj.project(&random_hermitian(m, &mut rng));
    let r = tensor_from_calabi(n, &h, SYMMETRY_TOL)?;
    let ric = ricci_with_tol(&r, EINSTEIN_TOL);
    if ric.einstein_lambda.is_none() {
        return Err(ModelError::EinsteinProjection { residual: ric.einstein_residual });
    }
    Ok(r)
}
