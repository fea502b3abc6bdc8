//! Cross-section geometry of the center-of-mass domain.
//!
//! Every section is stored already shrunk by the particle radius, so the
//! boundary here is the locus of particle centers at contact. Points and
//! directions are transverse vectors (length `transverse_dim()`).
//!
//! In 2-D sections the tangent follows the 3-D convention `tau = nu x e`,
//! i.e. `tau = (nu_y, -nu_x)`, which runs counter-clockwise; arc length grows
//! along `tau`.

use std::f64::consts::PI;

use crate::algebra::Vector;
use crate::error::{check_dim, Error, Result};

/// Rays shorter than this are treated as re-detections of the departure point.
pub const T_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossSection {
    /// Disc of radius `rho` centred at the origin.
    Circle { rho: f64 },
    /// Straights `y = +-rho` for `|x| <= half_len`, closed by half-discs of
    /// radius `rho` centred at `(+-half_len, 0)`.
    Stadium { rho: f64, half_len: f64 },
    /// Slab `|x_k| <= gap / 2` where `k = dim - 1` is the last transverse axis.
    Plates { gap: f64, dim: usize },
}

/// Which smooth piece of the boundary a point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Piece {
    Circle,
    LowerStraight,
    RightCap,
    UpperStraight,
    LeftCap,
    LowerPlate,
    UpperPlate,
}

impl Piece {
    pub fn is_flat(self) -> bool {
        !matches!(self, Piece::Circle | Piece::RightCap | Piece::LeftCap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFrame {
    pub point: Vector,
    /// Inward unit normal.
    pub nu: Vector,
    /// Unit tangent `nu x e`; only defined for 2-D sections.
    pub tau: Option<Vector>,
    /// Principal curvature in the `tau` direction (non-negative).
    pub curvature: f64,
    pub arc_param: f64,
    pub piece: Piece,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
    }
}

fn v2(x: f64, y: f64) -> Vector {
    Vector::from_vec(vec![x, y])
}

/// Tangent of a 2-D section from its inward normal.
fn tangent_2d(nu: &Vector) -> Vector {
    v2(nu[1], -nu[0])
}

/// Larger root of `|p + t u|^2 = rho^2`, if real.
fn exit_root(p: &Vector, u: &Vector, rho: f64) -> Option<f64> {
    let uu = u.norm_squared();
    let b = p.dot(u);
    let c = p.norm_squared() - rho * rho;
    let disc = b * b - uu * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // stable form of (-b + sq) / uu
    Some(if b <= 0.0 { (-b + sq) / uu } else { -c / (b + sq) })
}

impl CrossSection {
    pub fn circle(rho: f64) -> Result<Self> {
        positive("rho", rho)?;
        Ok(Self::Circle { rho })
    }

    /// Circle from the enlarged radius `big_r` and particle radius `r`.
    pub fn circle_enlarged(big_r: f64, r: f64) -> Result<Self> {
        Self::circle(big_r - r)
    }

    pub fn stadium(rho: f64, half_len: f64) -> Result<Self> {
        positive("rho", rho)?;
        positive("half_len", half_len)?;
        Ok(Self::Stadium { rho, half_len })
    }

    pub fn plates(gap: f64, dim: usize) -> Result<Self> {
        positive("gap", gap)?;
        if dim == 0 {
            return Err(Error::InvalidParameter("plates need a transverse dimension >= 1".into()));
        }
        Ok(Self::Plates { gap, dim })
    }

    pub fn transverse_dim(&self) -> usize {
        match self {
            Self::Circle { .. } | Self::Stadium { .. } => 2,
            Self::Plates { dim, .. } => *dim,
        }
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Self::Plates { .. })
    }

    pub fn perimeter(&self) -> Result<f64> {
        match *self {
            Self::Circle { rho } => Ok(2.0 * PI * rho),
            Self::Stadium { rho, half_len } => Ok(4.0 * half_len + 2.0 * PI * rho),
            Self::Plates { .. } => Err(Error::Unsupported("plates have infinite perimeter".into())),
        }
    }

    /// Arc positions where the stadium switches between straights and caps,
    /// in increasing order within one period. Empty for the circle.
    pub fn junctions(&self) -> Vec<f64> {
        match *self {
            Self::Stadium { rho, half_len: l } => {
                vec![l, l + PI * rho, 3.0 * l + PI * rho, 3.0 * l + 2.0 * PI * rho]
            }
            _ => Vec::new(),
        }
    }

    /// Curvature as a periodic function of arc length.
    pub fn curvature_profile(&self, s: f64) -> Result<f64> {
        let per = self.perimeter()?;
        let s = s.rem_euclid(per);
        Ok(match *self {
            Self::Circle { rho } => 1.0 / rho,
            Self::Stadium { rho, .. } => {
                let j = self.junctions();
                if (s >= j[0] && s <= j[1]) || (s >= j[2] && s <= j[3]) {
                    1.0 / rho
                } else {
                    0.0
                }
            }
            Self::Plates { .. } => unreachable!(),
        })
    }

    /// Boundary frame at arc length `s` (circle and stadium only).
    pub fn frame_at(&self, s: f64) -> Result<BoundaryFrame> {
        let per = self.perimeter()?;
        let s = s.rem_euclid(per);
        let point = match *self {
            Self::Circle { rho } => {
                let th = s / rho;
                v2(rho * th.cos(), rho * th.sin())
            }
            Self::Stadium { rho, half_len: l } => {
                let j = self.junctions();
                if s < j[0] {
                    v2(s, -rho)
                } else if s <= j[1] {
                    let th = -PI / 2.0 + (s - j[0]) / rho;
                    v2(l + rho * th.cos(), rho * th.sin())
                } else if s < j[2] {
                    v2(l - (s - j[1]), rho)
                } else if s <= j[3] {
                    let th = PI / 2.0 + (s - j[2]) / rho;
                    v2(-l + rho * th.cos(), rho * th.sin())
                } else {
                    v2(-l + (s - j[3]), -rho)
                }
            }
            Self::Plates { .. } => unreachable!(),
        };
        let mut frame = self.frame_at_point(&point)?;
        frame.arc_param = s;
        Ok(frame)
    }

    /// Frame of one of the two plates at offset `along` in the tangent
    /// direction (only meaningful for 2-D plate sections).
    pub fn plates_frame(&self, piece: Piece, along: f64) -> Result<BoundaryFrame> {
        let Self::Plates { gap, dim } = *self else {
            return Err(Error::Unsupported("plates_frame on a non-plates section".into()));
        };
        let k = dim - 1;
        let mut p = Vector::zeros(dim);
        match piece {
            Piece::LowerPlate => {
                p[k] = -gap / 2.0;
                if dim == 2 {
                    p[0] = along;
                }
            }
            Piece::UpperPlate => {
                p[k] = gap / 2.0;
                if dim == 2 {
                    p[0] = -along;
                }
            }
            _ => return Err(Error::InvalidParameter(format!("{piece:?} is not a plate"))),
        }
        self.frame_at_point(&p)
    }

    /// Frame at a boundary point. The point is assumed to lie on the
    /// boundary; the piece is chosen from its position.
    pub fn frame_at_point(&self, p: &Vector) -> Result<BoundaryFrame> {
        check_dim(self.transverse_dim(), p.len())?;
        match *self {
            Self::Circle { rho } => {
                let nu = -p / p.norm();
                let s = p[1].atan2(p[0]).rem_euclid(2.0 * PI) * rho;
                Ok(BoundaryFrame {
                    point: p.clone(),
                    tau: Some(tangent_2d(&nu)),
                    nu,
                    curvature: 1.0 / rho,
                    arc_param: s,
                    piece: Piece::Circle,
                })
            }
            Self::Stadium { rho, half_len: l } => {
                let per = self.perimeter()?;
                let j = self.junctions();
                let (nu, s, curvature, piece) = if p[0] >= l {
                    let d = v2(p[0] - l, p[1]);
                    let nu = -&d / d.norm();
                    let th = d[1].atan2(d[0]).clamp(-PI / 2.0, PI / 2.0);
                    (nu, j[0] + rho * (th + PI / 2.0), 1.0 / rho, Piece::RightCap)
                } else if p[0] <= -l {
                    let d = v2(p[0] + l, p[1]);
                    let nu = -&d / d.norm();
                    let th = d[1].atan2(d[0]).rem_euclid(2.0 * PI).clamp(PI / 2.0, 1.5 * PI);
                    (nu, j[2] + rho * (th - PI / 2.0), 1.0 / rho, Piece::LeftCap)
                } else if p[1] < 0.0 {
                    (v2(0.0, 1.0), p[0].rem_euclid(per), 0.0, Piece::LowerStraight)
                } else {
                    (v2(0.0, -1.0), j[1] + (l - p[0]), 0.0, Piece::UpperStraight)
                };
                Ok(BoundaryFrame {
                    point: p.clone(),
                    tau: Some(tangent_2d(&nu)),
                    nu,
                    curvature,
                    arc_param: s,
                    piece,
                })
            }
            Self::Plates { dim, .. } => {
                let k = dim - 1;
                let mut nu = Vector::zeros(dim);
                let piece = if p[k] < 0.0 {
                    nu[k] = 1.0;
                    Piece::LowerPlate
                } else {
                    nu[k] = -1.0;
                    Piece::UpperPlate
                };
                let (tau, arc) = if dim == 2 {
                    let tau = tangent_2d(&nu);
                    let arc = tau.dot(p);
                    (Some(tau), arc)
                } else {
                    (None, 0.0)
                };
                Ok(BoundaryFrame { point: p.clone(), nu, tau, curvature: 0.0, arc_param: arc, piece })
            }
        }
    }

    /// Signed violation of the boundary equation: zero on the boundary,
    /// negative inside.
    pub fn boundary_residual(&self, p: &Vector) -> f64 {
        match *self {
            Self::Circle { rho } => p.norm() - rho,
            Self::Stadium { rho, half_len: l } => {
                if p[0] >= l {
                    v2(p[0] - l, p[1]).norm() - rho
                } else if p[0] <= -l {
                    v2(p[0] + l, p[1]).norm() - rho
                } else {
                    p[1].abs() - rho
                }
            }
            Self::Plates { gap, dim } => p[dim - 1].abs() - gap / 2.0,
        }
    }

    /// First boundary point hit by the ray `a + t u_bar`, `t > T_MIN`.
    ///
    /// The hit point is snapped onto the boundary piece it lies on.
    pub fn next_transverse_collision(&self, a: &Vector, u_bar: &Vector) -> Result<(Vector, f64)> {
        let d = self.transverse_dim();
        check_dim(d, a.len())?;
        check_dim(d, u_bar.len())?;
        if u_bar.norm_squared() == 0.0 {
            return Err(Error::LongitudinalOnly);
        }
        match *self {
            Self::Circle { rho } => {
                let t = exit_root(a, u_bar, rho).ok_or(Error::ParallelEscape)?;
                if t <= T_MIN {
                    return Err(Error::Degenerate(format!("grazing ray (t = {t:e})")));
                }
                let p = a + u_bar * t;
                Ok((&p * (rho / p.norm()), t))
            }
            Self::Stadium { rho, half_len: l } => {
                let mut best: Option<(f64, Vector)> = None;
                let mut offer = |t: f64, p: Vector| {
                    if t > T_MIN && best.as_ref().map_or(true, |(bt, _)| t < *bt) {
                        best = Some((t, p));
                    }
                };
                for y in [-rho, rho] {
                    if u_bar[1] * y > 0.0 {
                        let t = (y - a[1]) / u_bar[1];
                        let x = a[0] + t * u_bar[0];
                        if x.abs() < l {
                            offer(t, v2(x, y));
                        }
                    }
                }
                for cx in [l, -l] {
                    let rel = v2(a[0] - cx, a[1]);
                    if let Some(t) = exit_root(&rel, u_bar, rho) {
                        let q = &rel + u_bar * t;
                        if q[0] * cx >= 0.0 {
                            let q = &q * (rho / q.norm());
                            offer(t, v2(q[0] + cx, q[1]));
                        }
                    }
                }
                best.map(|(t, p)| (p, t)).ok_or_else(|| {
                    Error::Degenerate("ray found no stadium boundary crossing".into())
                })
            }
            Self::Plates { gap, dim } => {
                let k = dim - 1;
                let un = u_bar[k];
                if un == 0.0 {
                    return Err(Error::ParallelEscape);
                }
                let target = if un > 0.0 { gap / 2.0 } else { -gap / 2.0 };
                let t = (target - a[k]) / un;
                if t <= T_MIN {
                    return Err(Error::Degenerate(format!("non-positive flight time {t:e}")));
                }
                let mut p = a + u_bar * t;
                p[k] = target;
                Ok((p, t))
            }
        }
    }
}
