//! Geometry of the base torus T² = R²/Z² and its hyperbolic automorphism.
//!
//! Points are stored in 64-bit fixed point (units of 2⁻⁶⁴), so applying an
//! integer matrix is wrapping integer arithmetic and reduction mod 1 is free.
//! `A` and `A⁻¹` are therefore exact mutual inverses on every stored point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// A point of T² in canonical coordinates `[0,1)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TorusPoint2 {
    u: u64,
    v: u64,
}

fn fixed_from_f64(x: f64) -> u64 {
    let r = x.rem_euclid(1.0);
    let scaled = r * TWO_POW_64;
    if scaled >= TWO_POW_64 {
        0
    } else {
        scaled as u64
    }
}

fn f64_from_fixed(x: u64) -> f64 {
    let y = x as f64 / TWO_POW_64;
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

/// Signed fixed-point offset in `[-0.5, 0.5)`.
fn signed_from_fixed(x: u64) -> f64 {
    (x as i64) as f64 / TWO_POW_64
}

impl TorusPoint2 {
    pub const ORIGIN: TorusPoint2 = TorusPoint2 { u: 0, v: 0 };

    /// Reduces `(u, v)` mod 1.
    pub fn new(u: f64, v: f64) -> Self {
        TorusPoint2 {
            u: fixed_from_f64(u),
            v: fixed_from_f64(v),
        }
    }

    pub fn from_raw(u: u64, v: u64) -> Self {
        TorusPoint2 { u, v }
    }

    pub fn raw(&self) -> (u64, u64) {
        (self.u, self.v)
    }

    pub fn u(&self) -> f64 {
        f64_from_fixed(self.u)
    }

    pub fn v(&self) -> f64 {
        f64_from_fixed(self.v)
    }

    pub fn coords(&self) -> [f64; 2] {
        [self.u(), self.v()]
    }

    /// Translate by an unwrapped displacement.
    pub fn translate(&self, d: [f64; 2]) -> Self {
        TorusPoint2 {
            u: self.u.wrapping_add(fixed_from_f64(d[0])),
            v: self.v.wrapping_add(fixed_from_f64(d[1])),
        }
    }

    /// Minimal unwrapped displacement `self - other`, each coordinate in `[-0.5, 0.5)`.
    pub fn displacement_from(&self, other: &TorusPoint2) -> [f64; 2] {
        [
            signed_from_fixed(self.u.wrapping_sub(other.u)),
            signed_from_fixed(self.v.wrapping_sub(other.v)),
        ]
    }

    /// Flat torus distance.
    pub fn distance(&self, other: &TorusPoint2) -> f64 {
        let d = self.displacement_from(other);
        d[0].hypot(d[1])
    }
}

/// Eigen-data of a hyperbolic 2×2 integer matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenData {
    /// Contracting eigenvalue, `0 < |lambda| < 1`.
    pub lambda: f64,
    /// Expanding eigenvalue `det / lambda`.
    pub lambda_u: f64,
    pub e_s: [f64; 2],
    pub e_u: [f64; 2],
}

/// Computes the contracting eigenvalue and unit eigenvectors of `m`.
pub fn eigen_data(m: [[i64; 2]; 2]) -> Result<EigenData> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if det != 1 && det != -1 {
        return Err(Error::NotHyperbolic(format!("determinant {det} is not ±1")));
    }
    let tr = (m[0][0] + m[1][1]) as f64;
    let disc = tr * tr - 4.0 * det as f64;
    if disc <= 0.0 {
        return Err(Error::NotHyperbolic("complex or repeated eigenvalues".into()));
    }
    let sq = disc.sqrt();
    // Stable evaluation of the two roots.
    let big = if tr >= 0.0 { (tr + sq) / 2.0 } else { (tr - sq) / 2.0 };
    let small = det as f64 / big;
    if (big.abs() - 1.0).abs() < 1e-12 || (small.abs() - 1.0).abs() < 1e-12 {
        return Err(Error::NotHyperbolic("eigenvalue on the unit circle".into()));
    }
    let (lambda, lambda_u) = if small.abs() < 1.0 { (small, big) } else { (big, small) };
    let e_s = eigenvector(m, lambda);
    let e_u = eigenvector(m, lambda_u);
    Ok(EigenData {
        lambda,
        lambda_u,
        e_s,
        e_u,
    })
}

fn eigenvector(m: [[i64; 2]; 2], mu: f64) -> [f64; 2] {
    let (a, b, c, d) = (m[0][0] as f64, m[0][1] as f64, m[1][0] as f64, m[1][1] as f64);
    // Pick the better-conditioned row of (A - mu I).
    let r1 = [a - mu, b];
    let r2 = [c, d - mu];
    let row = if r1[0].hypot(r1[1]) >= r2[0].hypot(r2[1]) { r1 } else { r2 };
    let mut e = [-row[1], row[0]];
    let n = e[0].hypot(e[1]);
    e[0] /= n;
    e[1] /= n;
    if e[0] < 0.0 || (e[0] == 0.0 && e[1] < 0.0) {
        e = [-e[0], -e[1]];
    }
    e
}

/// Hyperbolic toral automorphism with cached eigen-data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[i64; 2]; 2]", into = "[[i64; 2]; 2]")]
pub struct HyperbolicMatrix {
    entries: [[i64; 2]; 2],
    inverse: [[i64; 2]; 2],
    eigen: EigenData,
}

impl TryFrom<[[i64; 2]; 2]> for HyperbolicMatrix {
    type Error = Error;
    fn try_from(m: [[i64; 2]; 2]) -> Result<Self> {
        HyperbolicMatrix::new(m)
    }
}

impl From<HyperbolicMatrix> for [[i64; 2]; 2] {
    fn from(m: HyperbolicMatrix) -> Self {
        m.entries
    }
}

impl HyperbolicMatrix {
    pub fn new(entries: [[i64; 2]; 2]) -> Result<Self> {
        let eigen = eigen_data(entries)?;
        let det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        let inverse = [
            [det * entries[1][1], -det * entries[0][1]],
            [-det * entries[1][0], det * entries[0][0]],
        ];
        Ok(HyperbolicMatrix {
            entries,
            inverse,
            eigen,
        })
    }

    /// The Arnold cat map `[[2,1],[1,1]]`.
    pub fn cat() -> Self {
        HyperbolicMatrix::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.entries
    }

    pub fn inverse_entries(&self) -> [[i64; 2]; 2] {
        self.inverse
    }

    pub fn eigen(&self) -> &EigenData {
        &self.eigen
    }

    pub fn lambda(&self) -> f64 {
        self.eigen.lambda
    }

    /// `1 / |lambda|`, the expansion rate along `e_u`.
    pub fn expansion(&self) -> f64 {
        self.eigen.lambda_u.abs()
    }

    /// Operator 2-norm of the matrix.
    pub fn norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.entries.map(|r| r.map(|x| x as f64));
        let s = a * a + b * b + c * c + d * d;
        let det = a * d - b * c;
        ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
    }

    pub fn apply(&self, q: TorusPoint2) -> TorusPoint2 {
        apply_raw(self.entries, q)
    }

    pub fn apply_inverse(&self, q: TorusPoint2) -> TorusPoint2 {
        apply_raw(self.inverse, q)
    }

    pub fn apply_n(&self, mut q: TorusPoint2, n: i64) -> TorusPoint2 {
        let m = if n >= 0 { self.entries } else { self.inverse };
        for _ in 0..n.unsigned_abs() {
            q = apply_raw(m, q);
        }
        q
    }

    /// Linear action on an unwrapped vector.
    pub fn apply_vec(&self, d: [f64; 2]) -> [f64; 2] {
        let m = self.entries;
        [
            m[0][0] as f64 * d[0] + m[0][1] as f64 * d[1],
            m[1][0] as f64 * d[0] + m[1][1] as f64 * d[1],
        ]
    }

    /// Image of an axis-aligned rectangle: exact parallelogram with unwrapped edges.
    pub fn rectangle_image(&self, rect: &Rect2) -> Result<Parallelogram2> {
        if !(rect.width >= 0.0 && rect.height >= 0.0 && rect.width < 0.2 && rect.height < 0.2) {
            return Err(Error::OversizedRectangle {
                width: rect.width,
                height: rect.height,
            });
        }
        Ok(Parallelogram2 {
            corner: self.apply(rect.corner),
            edge1: self.apply_vec([rect.width, 0.0]),
            edge2: self.apply_vec([0.0, rect.height]),
        })
    }
}

fn apply_raw(m: [[i64; 2]; 2], q: TorusPoint2) -> TorusPoint2 {
    let (u, v) = (q.u, q.v);
    TorusPoint2 {
        u: (m[0][0] as u64)
            .wrapping_mul(u)
            .wrapping_add((m[0][1] as u64).wrapping_mul(v)),
        v: (m[1][0] as u64)
            .wrapping_mul(u)
            .wrapping_add((m[1][1] as u64).wrapping_mul(v)),
    }
}

/// Axis-aligned rectangle `corner + [0,width] × [0,height]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect2 {
    pub corner: TorusPoint2,
    pub width: f64,
    pub height: f64,
}

/// `corner + s·edge1 + t·edge2`, `s, t ∈ [0,1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Parallelogram2 {
    pub corner: TorusPoint2,
    pub edge1: [f64; 2],
    pub edge2: [f64; 2],
}

impl Parallelogram2 {
    pub fn area(&self) -> f64 {
        (self.edge1[0] * self.edge2[1] - self.edge1[1] * self.edge2[0]).abs()
    }

    pub fn diameter(&self) -> f64 {
        let d1 = [self.edge1[0] + self.edge2[0], self.edge1[1] + self.edge2[1]];
        let d2 = [self.edge1[0] - self.edge2[0], self.edge1[1] - self.edge2[1]];
        d1[0].hypot(d1[1]).max(d2[0].hypot(d2[1]))
    }

    /// Containment test via minimal unwrapping relative to the corner.
    pub fn contains(&self, q: &TorusPoint2, slack: f64) -> bool {
        let d = q.displacement_from(&self.corner);
        let det = self.edge1[0] * self.edge2[1] - self.edge1[1] * self.edge2[0];
        if det == 0.0 {
            let e = if self.edge1 != [0.0, 0.0] { self.edge1 } else { self.edge2 };
            let len2 = e[0] * e[0] + e[1] * e[1];
            if len2 == 0.0 {
                return d[0].hypot(d[1]) <= slack;
            }
            let s = ((d[0] * e[0] + d[1] * e[1]) / len2).clamp(0.0, 1.0);
            return (d[0] - s * e[0]).hypot(d[1] - s * e[1]) <= slack;
        }
        let s = (d[0] * self.edge2[1] - d[1] * self.edge2[0]) / det;
        let t = (self.edge1[0] * d[1] - self.edge1[1] * d[0]) / det;
        (-slack..=1.0 + slack).contains(&s) && (-slack..=1.0 + slack).contains(&t)
    }
}

/// Coordinates in the eigen-chart at the fixed point, in chart units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    pub x_s: f64,
    pub x_u: f64,
}

impl ChartPoint {
    pub fn new(x_s: f64, x_u: f64) -> Self {
        ChartPoint { x_s, x_u }
    }

    pub fn in_domain(&self) -> bool {
        self.x_s.abs() <= Chart::HALF_WIDTH && self.x_u.abs() <= Chart::HALF_WIDTH
    }
}

/// Linear eigen-chart centred at the fixed point `p` of `A`.
///
/// One chart unit is `scale` in the eigen-metric; the domain is `[-10,10]²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chart {
    matrix: HyperbolicMatrix,
    scale: f64,
    center: TorusPoint2,
    /// Rows map a torus displacement to `(x_s, x_u)` before scaling.
    dual: [[f64; 2]; 2],
}

impl Chart {
    pub const HALF_WIDTH: f64 = 10.0;

    pub fn new(matrix: HyperbolicMatrix, scale: f64) -> Self {
        let e = matrix.eigen();
        let (a, b, c, d) = (e.e_s[0], e.e_u[0], e.e_s[1], e.e_u[1]);
        let det = a * d - b * c;
        let dual = [[d / det, -b / det], [-c / det, a / det]];
        Chart {
            matrix,
            scale,
            center: TorusPoint2::ORIGIN,
            dual,
        }
    }

    pub fn matrix(&self) -> &HyperbolicMatrix {
        &self.matrix
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn center(&self) -> TorusPoint2 {
        self.center
    }

    /// Gradients (w.r.t. torus coordinates) of `x_s` and `x_u`.
    pub fn coordinate_gradients(&self) -> [[f64; 2]; 2] {
        [
            [self.dual[0][0] / self.scale, self.dual[0][1] / self.scale],
            [self.dual[1][0] / self.scale, self.dual[1][1] / self.scale],
        ]
    }

    /// Chart coordinates of the minimal displacement, without a domain check.
    pub fn coords_unchecked(&self, q: &TorusPoint2) -> ChartPoint {
        let d = q.displacement_from(&self.center);
        ChartPoint {
            x_s: (self.dual[0][0] * d[0] + self.dual[0][1] * d[1]) / self.scale,
            x_u: (self.dual[1][0] * d[0] + self.dual[1][1] * d[1]) / self.scale,
        }
    }

    /// `None` when `q` lies outside the chart square.
    pub fn to_chart(&self, q: &TorusPoint2) -> Option<ChartPoint> {
        let c = self.coords_unchecked(q);
        c.in_domain().then_some(c)
    }

    pub fn from_chart(&self, c: ChartPoint) -> TorusPoint2 {
        let e = self.matrix.eigen();
        let d = [
            self.scale * (c.x_s * e.e_s[0] + c.x_u * e.e_u[0]),
            self.scale * (c.x_s * e.e_s[1] + c.x_u * e.e_u[1]),
        ];
        self.center.translate(d)
    }

    /// Radius of the disc around `p` containing every point with `|x_s|, |x_u| <= half`.
    pub fn enclosing_radius(&self, half: f64) -> f64 {
        let e = self.matrix.eigen();
        half * self.scale * (e.e_s[0].hypot(e.e_s[1]) + e.e_u[0].hypot(e.e_u[1]))
    }
}
