//! Small fixed-size vector and matrix types for cell geometry.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::scalar::Real;

/// A 3-vector in the standard basis.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<S>(pub [S; 3]);

impl<S: Real> Vec3<S> {
    #[inline]
    pub fn new(x: S, y: S, z: S) -> Self {
        Vec3([x, y, z])
    }

    #[inline]
    pub fn zero() -> Self {
        Vec3([S::zero(); 3])
    }

    #[inline]
    pub fn splat(v: S) -> Self {
        Vec3([v; 3])
    }

    /// Unit vector along axis `k`.
    #[inline]
    pub fn unit(k: usize) -> Self {
        let mut v = Self::zero();
        v.0[k] = S::one();
        v
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> S {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    #[inline]
    pub fn cross(&self, o: &Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    #[inline]
    pub fn norm_squared(&self) -> S {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> S {
        self.norm_squared().sqrt()
    }

    #[inline]
    pub fn max_abs(&self) -> S {
        self.0[0].abs().max(self.0[1].abs()).max(self.0[2].abs())
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    #[inline]
    pub fn map(self, f: impl Fn(S) -> S) -> Self {
        Vec3([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }

    /// Lossless for f64, widening for f32.
    pub fn to_f64(self) -> [f64; 3] {
        [self.0[0].to_f64_lossy(), self.0[1].to_f64_lossy(), self.0[2].to_f64_lossy()]
    }

    pub fn from_f64(v: [f64; 3]) -> Self {
        Vec3([S::lit(v[0]), S::lit(v[1]), S::lit(v[2])])
    }
}

impl<S> Index<usize> for Vec3<S> {
    type Output = S;
    #[inline]
    fn index(&self, i: usize) -> &S {
        &self.0[i]
    }
}

impl<S> IndexMut<usize> for Vec3<S> {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut S {
        &mut self.0[i]
    }
}

impl<S: Real> Add for Vec3<S> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl<S: Real> AddAssign for Vec3<S> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Real> Sub for Vec3<S> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl<S: Real> SubAssign for Vec3<S> {
    #[inline]
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl<S: Real> Mul<S> for Vec3<S> {
    type Output = Self;
    #[inline]
    fn mul(self, k: S) -> Self {
        Vec3([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }
}

impl<S: Real> Neg for Vec3<S> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3<S>(pub [[S; 3]; 3]);

impl<S: Real> Mat3<S> {
    pub fn identity() -> Self {
        let (o, z) = (S::one(), S::zero());
        Mat3([[o, z, z], [z, o, z], [z, z, o]])
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(c: &[Vec3<S>; 3]) -> Self {
        let mut m = [[S::zero(); 3]; 3];
        for (j, col) in c.iter().enumerate() {
            for (i, row) in m.iter_mut().enumerate() {
                row[j] = col[i];
            }
        }
        Mat3(m)
    }

    #[inline]
    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn det(&self) -> S {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Cofactor inverse; `None` when the determinant is zero or non-finite.
    pub fn inverse(&self) -> Option<Self> {
        let m = &self.0;
        let det = self.det();
        if det == S::zero() || !det.is_finite() {
            return None;
        }
        let inv = S::one() / det;
        let c = |a: usize, b: usize, c: usize, d: usize| m[a][b] * m[c][d] - m[a][d] * m[c][b];
        Some(Mat3([
            [c(1, 1, 2, 2) * inv, -c(0, 1, 2, 2) * inv, c(0, 1, 1, 2) * inv],
            [-c(1, 0, 2, 2) * inv, c(0, 0, 2, 2) * inv, -c(0, 0, 1, 2) * inv],
            [c(1, 0, 2, 1) * inv, -c(0, 0, 2, 1) * inv, c(0, 0, 1, 1) * inv],
        ]))
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vec3<S>) -> Vec3<S> {
        let m = &self.0;
        Vec3([
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ])
    }

    /// `selfᵀ · v` without forming the transpose.
    #[inline]
    pub fn tr_mul_vec(&self, v: &Vec3<S>) -> Vec3<S> {
        let m = &self.0;
        Vec3([
            m[0][0] * v[0] + m[1][0] * v[1] + m[2][0] * v[2],
            m[0][1] * v[0] + m[1][1] * v[1] + m[2][1] * v[2],
            m[0][2] * v[0] + m[1][2] * v[1] + m[2][2] * v[2],
        ])
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut r = [[S::zero(); 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(r)
    }

    pub fn frobenius(&self) -> S {
        self.0.iter().flat_map(|r| r.iter()).map(|x| *x * *x).sum::<S>().sqrt()
    }

    /// Largest absolute entry of `self − I`.
    pub fn identity_defect(&self) -> S {
        let mut worst = S::zero();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { S::one() } else { S::zero() };
                worst = worst.max((self.0[i][j] - e).abs());
            }
        }
        worst
    }
}
