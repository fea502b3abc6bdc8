//! Lie-algebra and metric primitives on `se(n)`.
//!
//! Angular velocities live in `so(n)` as dense antisymmetric matrices; linear
//! velocities are plain vectors. The kinetic-energy metric couples the two
//! through the mass-distribution parameter `gamma`.

use nalgebra::{DMatrix, DVector, Vector3};

use crate::error::{check_dim, Error, Result};

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Particle and force parameters shared by every dynamical module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassParams {
    /// Ambient dimension.
    pub n: usize,
    /// Particle radius.
    pub r: f64,
    /// Particle mass.
    pub m: f64,
    /// Mass-distribution parameter, `sqrt(2 lambda) / r`.
    pub gamma: f64,
    /// Longitudinal acceleration; the force on the center of mass is `-g m e`.
    pub g: f64,
}

impl MassParams {
    pub fn new(n: usize, r: f64, m: f64, gamma: f64, g: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension must be >= 2, got {n}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be positive, got {m}")));
        }
        let gamma_max = (2.0 / n as f64).sqrt();
        if !(gamma > 0.0 && gamma <= gamma_max * (1.0 + 1e-15)) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, {gamma_max}], got {gamma}"
            )));
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter(format!("g must be non-negative, got {g}")));
        }
        Ok(Self { n, r, m, gamma, g })
    }

    /// Uniform ball of radius `r` and mass `m` in dimension `n`.
    pub fn uniform(n: usize, r: f64, m: f64, g: f64) -> Result<Self> {
        Self::new(n, r, m, gamma_uniform(n), g)
    }

    /// Same particle viewed in another dimension (the transverse billiard keeps `gamma`).
    pub fn with_dim(&self, n: usize) -> Self {
        Self { n, ..*self }
    }

    pub fn with_g(&self, g: f64) -> Self {
        Self { g, ..*self }
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma * self.gamma
    }

    pub fn c_beta(&self) -> f64 {
        beta_constants(self).0
    }

    pub fn s_beta(&self) -> f64 {
        beta_constants(self).1
    }

    /// Scalar second moment per unit mass, `(r gamma)^2 / 2`.
    pub fn lambda_moment(&self) -> f64 {
        0.5 * (self.r * self.gamma).powi(2)
    }
}

/// `(cos beta, sin beta)` of the collision mixing angle.
pub fn beta_constants(params: &MassParams) -> (f64, f64) {
    let g2 = params.gamma2();
    ((1.0 - g2) / (1.0 + g2), 2.0 * params.gamma / (1.0 + g2))
}

/// `gamma` of a ball with constant density in dimension `n`.
pub fn gamma_uniform(n: usize) -> f64 {
    (2.0 / (n as f64 + 2.0)).sqrt()
}

/// Element of `so(n)`, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix(Matrix);

impl SkewMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(Matrix::zeros(n, n))
    }

    /// Antisymmetric part of `m`, i.e. `(m - m^T) / 2`.
    pub fn from_antisymmetric_part(m: &Matrix) -> Result<Self> {
        check_dim(m.nrows(), m.ncols())?;
        Ok(Self((m - m.transpose()) * 0.5))
    }

    /// Takes `m` as given after checking antisymmetry to `tol`.
    pub fn try_from_matrix(m: Matrix, tol: f64) -> Result<Self> {
        check_dim(m.nrows(), m.ncols())?;
        let asym = (&m + m.transpose()).amax();
        if asym > tol {
            return Err(Error::InvalidParameter(format!(
                "matrix is not antisymmetric (|M + M^T| = {asym:e})"
            )));
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entries(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }

    pub fn scale(&self, k: f64) -> Self {
        Self(&self.0 * k)
    }

    pub fn add(&self, other: &SkewMatrix) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SkewMatrix) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `Tr(self other^T)`.
    pub fn trace_inner(&self, other: &SkewMatrix) -> f64 {
        self.0.component_mul(&other.0).sum()
    }

    /// Upper-left `k x k` block; still antisymmetric.
    pub fn leading_block(&self, k: usize) -> Self {
        Self(self.0.view((0, 0), (k, k)).into_owned())
    }
}

/// `a ^ b`, the skew matrix with `(a ^ b) u = (a . u) b - (b . u) a`.
pub fn wedge(a: &Vector, b: &Vector) -> Result<SkewMatrix> {
    check_dim(a.len(), b.len())?;
    Ok(SkewMatrix(b * a.transpose() - a * b.transpose()))
}

pub fn apply_skew(u: &SkewMatrix, v: &Vector) -> Result<Vector> {
    check_dim(u.dim(), v.len())?;
    Ok(&u.0 * v)
}

/// Skew matrix of the 3-D angular velocity, `U x = omega x x`.
pub fn omega_to_skew(omega: &Vector3<f64>) -> SkewMatrix {
    SkewMatrix(Matrix::from_row_slice(
        3,
        3,
        &[
            0.0, -omega.z, omega.y, //
            omega.z, 0.0, -omega.x, //
            -omega.y, omega.x, 0.0,
        ],
    ))
}

pub fn skew_to_omega(u: &SkewMatrix) -> Result<Vector3<f64>> {
    if u.dim() != 3 {
        return Err(Error::Unsupported(format!(
            "angular velocity vector only exists for n = 3 (got n = {})",
            u.dim()
        )));
    }
    let m = &u.0;
    Ok(Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Squared kinetic-energy norm `m { (r gamma)^2 / 2 Tr(U U^T) + |u|^2 }`.
pub fn kinetic_norm_sq(u: &Vector, ang: &SkewMatrix, params: &MassParams) -> f64 {
    params.m * (params.lambda_moment() * ang.trace_inner(ang) + u.norm_squared())
}

/// Kinetic-energy inner product of two velocity pairs.
pub fn kinetic_inner(
    (u1, w1): (&Vector, &SkewMatrix),
    (u2, w2): (&Vector, &SkewMatrix),
    params: &MassParams,
) -> f64 {
    params.m * (params.lambda_moment() * w1.trace_inner(w2) + u1.dot(u2))
}

/// Unit basis vector `e_i` of length `n`.
pub fn basis(n: usize, i: usize) -> Vector {
    let mut v = Vector::zeros(n);
    v[i] = 1.0;
    v
}
