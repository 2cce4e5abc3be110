//! Fixed-size real and complex linear algebra for 3x3 order parameters.
//!
//! Complex matrices keep their real and imaginary parts as two real
//! matrices. Everything here is `Copy` and allocation free.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::Error;

/// Real 3-vector.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    /// Unit vector along axis `i`.
    pub fn e(i: usize) -> Self {
        let mut v = [0.0; 3];
        v[i] = 1.0;
        Vec3(v)
    }

    pub fn dot(&self, o: &Vec3) -> f64 {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Vec3) -> Vec3 {
        let (a, b) = (self.0, o.0);
        Vec3([
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ])
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec3 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

/// Real 3x3 matrix, row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn from_diag(d: [f64; 3]) -> Self {
        Mat3([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn transpose(&self) -> Mat3 {
        let a = &self.0;
        Mat3([
            [a[0][0], a[1][0], a[2][0]],
            [a[0][1], a[1][1], a[2][1]],
            [a[0][2], a[1][2], a[2][2]],
        ])
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let a = &self.0;
        Vec3([
            a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
            a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
        ])
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = *self;
        for row in out.0.iter_mut() {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3([self.0[0][j], self.0[1][j], self.0[2][j]])
    }

    pub fn outer(a: &Vec3, b: &Vec3) -> Mat3 {
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = a[i] * b[j];
            }
        }
        m
    }

    /// True when `self` is a rotation to within `tol` (orthogonality and determinant).
    pub fn is_rotation(&self, tol: f64) -> bool {
        let e = (*self * self.transpose() - Mat3::IDENTITY).max_abs();
        e <= tol && (self.det() - 1.0).abs() <= tol
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += o.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] -= o.0[i][j];
            }
        }
        out
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scale(-1.0)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
            }
        }
        Mat3(out)
    }
}

/// Complex scalar.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct C64 {
    pub re: f64,
    pub im: f64,
}

impl C64 {
    pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
    pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
    pub const I: C64 = C64 { re: 0.0, im: 1.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        C64 { re, im }
    }

    /// `e^{i phi}`.
    pub fn cis(phi: f64) -> Self {
        C64::new(phi.cos(), phi.sin())
    }

    pub fn conj(self) -> Self {
        C64::new(self.re, -self.im)
    }

    pub fn abs(self) -> f64 {
        self.re.hypot(self.im)
    }

    pub fn arg(self) -> f64 {
        self.im.atan2(self.re)
    }

    pub fn sqrt(self) -> Self {
        let r = self.abs().sqrt();
        C64::cis(0.5 * self.arg()) * r
    }
}

impl Add for C64 {
    type Output = C64;
    fn add(self, o: C64) -> C64 {
        C64::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for C64 {
    type Output = C64;
    fn sub(self, o: C64) -> C64 {
        C64::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for C64 {
    type Output = C64;
    fn mul(self, o: C64) -> C64 {
        C64::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

impl Mul<f64> for C64 {
    type Output = C64;
    fn mul(self, s: f64) -> C64 {
        C64::new(self.re * s, self.im * s)
    }
}

/// Complex 3x3 matrix stored as `re + i im`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CMat3 {
    pub re: Mat3,
    pub im: Mat3,
}

impl CMat3 {
    pub const ZERO: CMat3 = CMat3 { re: Mat3::ZERO, im: Mat3::ZERO };
    pub const IDENTITY: CMat3 = CMat3 { re: Mat3::IDENTITY, im: Mat3::ZERO };

    pub fn new(re: Mat3, im: Mat3) -> Self {
        CMat3 { re, im }
    }

    pub fn from_real(re: Mat3) -> Self {
        CMat3 { re, im: Mat3::ZERO }
    }

    /// Build from rows of complex entries.
    pub fn from_entries(e: [[C64; 3]; 3]) -> Self {
        let mut m = CMat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.set(i, j, e[i][j]);
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        C64::new(self.re.0[i][j], self.im.0[i][j])
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.re.0[i][j] = z.re;
        self.im.0[i][j] = z.im;
    }

    pub fn scale(&self, s: f64) -> CMat3 {
        CMat3::new(self.re.scale(s), self.im.scale(s))
    }

    pub fn mul_scalar(&self, z: C64) -> CMat3 {
        CMat3::new(
            self.re.scale(z.re) - self.im.scale(z.im),
            self.re.scale(z.im) + self.im.scale(z.re),
        )
    }

    /// `i * self`.
    pub fn mul_i(&self) -> CMat3 {
        CMat3::new(-self.im, self.re)
    }

    /// Conjugate transpose `A*`.
    pub fn adjoint(&self) -> CMat3 {
        CMat3::new(self.re.transpose(), -self.im.transpose())
    }

    pub fn transpose(&self) -> CMat3 {
        CMat3::new(self.re.transpose(), self.im.transpose())
    }

    pub fn conj(&self) -> CMat3 {
        CMat3::new(self.re, -self.im)
    }

    pub fn trace(&self) -> C64 {
        C64::new(self.re.trace(), self.im.trace())
    }

    /// `R * self` for a real matrix `R`.
    pub fn lmul_real(&self, r: &Mat3) -> CMat3 {
        CMat3::new(*r * self.re, *r * self.im)
    }

    /// `self * R` for a real matrix `R`.
    pub fn rmul_real(&self, r: &Mat3) -> CMat3 {
        CMat3::new(self.re * *r, self.im * *r)
    }

    /// Commutator `[self, o]`.
    pub fn commutator(&self, o: &CMat3) -> CMat3 {
        *self * *o - *o * *self
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.re.norm().powi(2) + self.im.norm().powi(2)).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.re.max_abs().max(self.im.max_abs())
    }

    pub fn is_finite(&self) -> bool {
        self.re.0.iter().chain(self.im.0.iter()).flatten().all(|x| x.is_finite())
    }

    /// Real coordinates: the nine real parts row-major, then the nine imaginary parts.
    pub fn to_real18(&self) -> [f64; 18] {
        let mut out = [0.0; 18];
        for i in 0..3 {
            for j in 0..3 {
                out[3 * i + j] = self.re.0[i][j];
                out[9 + 3 * i + j] = self.im.0[i][j];
            }
        }
        out
    }

    pub fn from_real18(x: &[f64]) -> CMat3 {
        let mut m = CMat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.re.0[i][j] = x[3 * i + j];
                m.im.0[i][j] = x[9 + 3 * i + j];
            }
        }
        m
    }

    /// Symmetric part minus a third of its trace.
    pub fn traceless_symmetric(&self) -> CMat3 {
        let s = (*self + self.transpose()).scale(0.5);
        let t = s.trace() * (1.0 / 3.0);
        s - CMat3::IDENTITY.mul_scalar(t)
    }
}

impl Add for CMat3 {
    type Output = CMat3;
    fn add(self, o: CMat3) -> CMat3 {
        CMat3::new(self.re + o.re, self.im + o.im)
    }
}

impl AddAssign for CMat3 {
    fn add_assign(&mut self, o: CMat3) {
        *self = *self + o;
    }
}

impl Sub for CMat3 {
    type Output = CMat3;
    fn sub(self, o: CMat3) -> CMat3 {
        CMat3::new(self.re - o.re, self.im - o.im)
    }
}

impl Neg for CMat3 {
    type Output = CMat3;
    fn neg(self) -> CMat3 {
        CMat3::new(-self.re, -self.im)
    }
}

impl Mul for CMat3 {
    type Output = CMat3;
    fn mul(self, o: CMat3) -> CMat3 {
        CMat3::new(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )
    }
}

/// Gradient-energy coefficients `gamma_1, gamma_2, gamma_3`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GammaParams {
    pub g1: f64,
    pub g2: f64,
    pub g3: f64,
}

impl GammaParams {
    pub fn new(g1: f64, g2: f64, g3: f64) -> Result<Self, Error> {
        let ok = [g1, g2, g3].iter().all(|g| g.is_finite() && *g > 0.0);
        if !ok {
            return Err(Error::InvalidGamma([g1, g2, g3]));
        }
        Ok(GammaParams { g1, g2, g3 })
    }

    /// Diagonal of `Gamma = diag(g1, g1, g1 + g2 + g3)`.
    pub fn diag(&self) -> [f64; 3] {
        [self.g1, self.g1, self.g1 + self.g2 + self.g3]
    }

    pub fn matrix(&self) -> Mat3 {
        Mat3::from_diag(self.diag())
    }

    pub fn min_weight(&self) -> f64 {
        let d = self.diag();
        d[0].min(d[2])
    }
}

impl Default for GammaParams {
    fn default() -> Self {
        GammaParams { g1: 1.0, g2: 1.0, g3: 1.0 }
    }
}

/// Skew matrix with `hat(v) u = v x u`.
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])
}

/// Vector of the skew part of a real matrix: `hat(vee(M)) = (M - M^T)/2`.
pub fn vee(m: &Mat3) -> Vec3 {
    let a = &m.0;
    Vec3([
        0.5 * (a[2][1] - a[1][2]),
        0.5 * (a[0][2] - a[2][0]),
        0.5 * (a[1][0] - a[0][1]),
    ])
}

/// `Re Tr(A* B)`.
pub fn pair(a: &CMat3, b: &CMat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a.re.0[i][j] * b.re.0[i][j] + a.im.0[i][j] * b.im.0[i][j];
        }
    }
    s
}

/// `Re Tr(Gamma A* B)`.
pub fn gpair(a: &CMat3, b: &CMat3, g: &GammaParams) -> f64 {
    let d = g.diag();
    let mut s = 0.0;
    for i in 0..3 {
        for (j, dj) in d.iter().enumerate() {
            s += dj * (a.re.0[i][j] * b.re.0[i][j] + a.im.0[i][j] * b.im.0[i][j]);
        }
    }
    s
}

/// Rodrigues formula for `exp(hat(v))`.
pub fn exp_so3(v: &Vec3) -> Mat3 {
    let th2 = v.dot(v);
    let th = th2.sqrt();
    let (a, b) = if th < 1e-4 {
        // Taylor coefficients of sin(t)/t and (1 - cos t)/t^2.
        (
            1.0 - th2 / 6.0 + th2 * th2 / 120.0,
            0.5 - th2 / 24.0 + th2 * th2 / 720.0,
        )
    } else {
        (th.sin() / th, (1.0 - th.cos()) / th2)
    };
    let k = hat(v);
    Mat3::IDENTITY + k.scale(a) + (k * k).scale(b)
}

/// Rotation by `phi` about the third axis.
pub fn rot_e3(phi: f64) -> Mat3 {
    exp_so3(&Vec3::new(0.0, 0.0, phi))
}

/// Rotation by `phi` about the first axis.
pub fn rot_e1(phi: f64) -> Mat3 {
    exp_so3(&Vec3::new(phi, 0.0, 0.0))
}
