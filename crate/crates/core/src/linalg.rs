//! Small dense vectors and matrices for state spaces of dimension 1..=3,
//! with the closed-form real eigendecompositions used by the wave-curve
//! solvers. Everything is `Copy` and allocation-free.

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Maximum number of conserved quantities supported by the built-in kernels.
pub const MAX_DIM: usize = 3;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum LinalgError {
    #[error("matrix has complex eigenvalues (discriminant {disc:.3e})")]
    ComplexEigenvalues { disc: f64 },
    #[error("eigenvalue {lambda} has no well-separated eigenvector (rank defect)")]
    RankDefect { lambda: f64 },
    #[error("singular matrix in solve/inverse")]
    Singular,
    #[error("dimension {0} outside supported range 1..={MAX_DIM}")]
    BadDimension(usize),
}

/// A vector in R^n, n <= 3. State values, eigenvectors, flux values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vector {
    n: usize,
    a: [f64; MAX_DIM],
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&n));
        Vector { n, a: [0.0; MAX_DIM] }
    }

    pub fn from_slice(v: &[f64]) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&v.len()));
        let mut a = [0.0; MAX_DIM];
        a[..v.len()].copy_from_slice(v);
        Vector { n: v.len(), a }
    }

    pub fn scalar(x: f64) -> Self {
        Vector::from_slice(&[x])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a[..self.n]
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            s += self.a[i] * other.a[i];
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn add(&self, other: &Vector) -> Vector {
        let mut r = *self;
        for i in 0..self.n {
            r.a[i] += other.a[i];
        }
        r
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        let mut r = *self;
        for i in 0..self.n {
            r.a[i] -= other.a[i];
        }
        r
    }

    pub fn scale(&self, c: f64) -> Vector {
        let mut r = *self;
        for i in 0..self.n {
            r.a[i] *= c;
        }
        r
    }

    /// self + c * other, the workhorse of the ODE steppers.
    pub fn axpy(&self, c: f64, other: &Vector) -> Vector {
        let mut r = *self;
        for i in 0..self.n {
            r.a[i] += c * other.a[i];
        }
        r
    }

    /// Convex combination (1-theta)*self + theta*other.
    pub fn lerp(&self, other: &Vector, theta: f64) -> Vector {
        self.combine(other, 1.0 - theta, theta)
    }

    /// c_self * self + c_other * other with both coefficients explicit, so
    /// the result commutes bitwise with the swapped call.
    pub fn combine(&self, other: &Vector, c_self: f64, c_other: f64) -> Vector {
        let mut r = Vector::zeros(self.n);
        for i in 0..self.n {
            r.a[i] = c_self * self.a[i] + c_other * other.a[i];
        }
        r
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.n);
        &self.a[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.n);
        &mut self.a[i]
    }
}

impl Serialize for Vector {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.n))?;
        for x in self.as_slice() {
            seq.serialize_element(x)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Vector {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Vector;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "a sequence of 1 to {MAX_DIM} floats")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vector, A::Error> {
                let mut a = [0.0; MAX_DIM];
                let mut n = 0;
                while let Some(x) = seq.next_element::<f64>()? {
                    if n >= MAX_DIM {
                        return Err(serde::de::Error::invalid_length(n + 1, &self));
                    }
                    a[n] = x;
                    n += 1;
                }
                if n == 0 {
                    return Err(serde::de::Error::invalid_length(0, &self));
                }
                Ok(Vector { n, a })
            }
        }
        de.deserialize_seq(V)
    }
}

/// A matrix in R^{n x n}, n <= 3. Row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix {
    n: usize,
    a: [[f64; MAX_DIM]; MAX_DIM],
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        debug_assert!((1..=MAX_DIM).contains(&n));
        Matrix { n, a: [[0.0; MAX_DIM]; MAX_DIM] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.a[i][i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        debug_assert!((1..=MAX_DIM).contains(&n));
        let mut m = Matrix::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            debug_assert_eq!(r.len(), n);
            m.a[i][..n].copy_from_slice(r);
        }
        m
    }

    /// Matrix with the given vectors as columns.
    pub fn from_columns(cols: &[Vector]) -> Self {
        let n = cols.len();
        let mut m = Matrix::zeros(n);
        for (j, c) in cols.iter().enumerate() {
            for i in 0..n {
                m.a[i][j] = c[i];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n && j < self.n);
        self.a[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.a[i][j] = v;
    }

    pub fn row(&self, i: usize) -> Vector {
        Vector::from_slice(&self.a[i][..self.n])
    }

    pub fn column(&self, j: usize) -> Vector {
        let mut v = Vector::zeros(self.n);
        for i in 0..self.n {
            v[i] = self.a[i][j];
        }
        v
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        let mut r = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                r.a[i][j] += other.a[i][j];
            }
        }
        r
    }

    pub fn scale(&self, c: f64) -> Matrix {
        let mut r = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                r.a[i][j] *= c;
            }
        }
        r
    }

    pub fn matvec(&self, v: &Vector) -> Vector {
        let mut r = Vector::zeros(self.n);
        for i in 0..self.n {
            let mut s = 0.0;
            for j in 0..self.n {
                s += self.a[i][j] * v.a[j];
            }
            r[i] = s;
        }
        r
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.a[i][i]).sum()
    }

    pub fn det(&self) -> f64 {
        match self.n {
            1 => self.a[0][0],
            2 => self.a[0][0] * self.a[1][1] - self.a[0][1] * self.a[1][0],
            3 => {
                let a = &self.a;
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                    - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
            _ => unreachable!(),
        }
    }

    /// Solve self * x = b by Gaussian elimination with partial pivoting.
    pub fn solve(&self, b: &Vector) -> Result<Vector, LinalgError> {
        let n = self.n;
        let mut m = self.a;
        let mut rhs = b.a;
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if m[r][col].abs() > m[piv][col].abs() {
                    piv = r;
                }
            }
            if m[piv][col].abs() < 1e-300 {
                return Err(LinalgError::Singular);
            }
            m.swap(col, piv);
            rhs.swap(col, piv);
            for r in col + 1..n {
                let f = m[r][col] / m[col][col];
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
        let mut x = [0.0; MAX_DIM];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in i + 1..n {
                s -= m[i][j] * x[j];
            }
            x[i] = s / m[i][i];
        }
        Ok(Vector { n, a: x })
    }

    pub fn inverse(&self) -> Result<Matrix, LinalgError> {
        let n = self.n;
        let mut inv = Matrix::zeros(n);
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = 1.0;
            let col = self.solve(&e)?;
            for i in 0..n {
                inv.a[i][j] = col[i];
            }
        }
        Ok(inv)
    }

    /// Real eigenvalues sorted ascending. Errors if a complex pair is found.
    pub fn real_eigenvalues(&self) -> Result<Vector, LinalgError> {
        match self.n {
            1 => Ok(Vector::scalar(self.a[0][0])),
            2 => {
                let tr = self.trace();
                let det = self.det();
                let disc = tr * tr - 4.0 * det;
                if disc < 0.0 {
                    return Err(LinalgError::ComplexEigenvalues { disc });
                }
                let sq = disc.sqrt();
                Ok(Vector::from_slice(&[(tr - sq) / 2.0, (tr + sq) / 2.0]))
            }
            3 => {
                let a = &self.a;
                let c2 = self.trace();
                let c1 = a[0][0] * a[1][1] - a[0][1] * a[1][0]
                    + a[0][0] * a[2][2] - a[0][2] * a[2][0]
                    + a[1][1] * a[2][2] - a[1][2] * a[2][1];
                let c0 = self.det();
                // Depressed cubic y^3 + p y + q with lambda = y + c2/3.
                let p = c1 - c2 * c2 / 3.0;
                let q = -2.0 * c2 * c2 * c2 / 27.0 + c1 * c2 / 3.0 - c0;
                let disc = -4.0 * p * p * p - 27.0 * q * q;
                if p >= 0.0 || disc < -1e-12 * (p.abs().powi(3) + q * q).max(1.0) {
                    return Err(LinalgError::ComplexEigenvalues { disc });
                }
                let m = 2.0 * (-p / 3.0).sqrt();
                let cos_arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
                let phi = cos_arg.acos() / 3.0;
                let mut roots = [0.0; 3];
                for (k, r) in roots.iter_mut().enumerate() {
                    let y = m * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
                    *r = y + c2 / 3.0;
                }
                // Newton polish on the characteristic polynomial to recover
                // the precision lost in the trigonometric path.
                for r in roots.iter_mut() {
                    for _ in 0..3 {
                        let f = ((*r - c2) * *r + c1) * *r - c0;
                        let df = (3.0 * *r - 2.0 * c2) * *r + c1;
                        if df.abs() > 1e-300 {
                            *r -= f / df;
                        }
                    }
                }
                roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
                Ok(Vector::from_slice(&roots))
            }
            _ => Err(LinalgError::BadDimension(self.n)),
        }
    }

    /// Unit-norm right eigenvector for the given eigenvalue, via the null
    /// space of A - lambda I. The sign is unspecified here; callers fix
    /// orientation.
    pub fn right_eigenvector(&self, lambda: f64) -> Result<Vector, LinalgError> {
        let n = self.n;
        let mut m = *self;
        for i in 0..n {
            m.a[i][i] -= lambda;
        }
        match n {
            1 => Ok(Vector::scalar(1.0)),
            2 => {
                let cands = [
                    Vector::from_slice(&[m.a[0][1], -m.a[0][0]]),
                    Vector::from_slice(&[m.a[1][1], -m.a[1][0]]),
                ];
                best_unit(&cands, lambda)
            }
            3 => {
                let r0 = m.row(0);
                let r1 = m.row(1);
                let r2 = m.row(2);
                let cands = [cross3(&r0, &r1), cross3(&r0, &r2), cross3(&r1, &r2)];
                best_unit(&cands, lambda)
            }
            _ => Err(LinalgError::BadDimension(n)),
        }
    }
}

fn cross3(u: &Vector, v: &Vector) -> Vector {
    Vector::from_slice(&[
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ])
}

fn best_unit(cands: &[Vector], lambda: f64) -> Result<Vector, LinalgError> {
    let best = cands
        .iter()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
        .unwrap();
    let norm = best.norm();
    if norm < 1e-12 {
        return Err(LinalgError::RankDefect { lambda });
    }
    Ok(best.scale(1.0 / norm))
}

/// 7-point Gauss-Legendre rule on [0,1]: (t, 1-t, weight) for the three
/// symmetric node pairs, midpoint handled separately. Both convex
/// coefficients are tabulated so integrands evaluated as f(c0, c1) are
/// bit-identical under endpoint swap (float addition is commutative).
pub const GL7_PAIRS: [(f64, f64, f64); 3] = [
    (0.025446043828620757, 0.9745539561713792, 0.06474248308443485),
    (0.12923440720030277, 0.8707655927996972, 0.1398526957446383),
    (0.29707742431130146, 0.7029225756886985, 0.19091502525255946),
];
pub const GL7_MID_WEIGHT: f64 = 0.20897959183673468;

/// Integral over [0,1] of a matrix-valued function of the two convex
/// coefficients (c0, c1) with c0 + c1 = 1; exactly symmetric under swapping
/// the roles of the endpoints.
pub fn integrate_matrix_unit<F: Fn(f64, f64) -> Matrix>(f: F) -> Matrix {
    let mut acc = f(0.5, 0.5).scale(GL7_MID_WEIGHT);
    for &(t, s, w) in GL7_PAIRS.iter() {
        let pair = f(s, t).add(&f(t, s));
        acc = acc.add(&pair.scale(w));
    }
    acc
}

/// Same rule for vector-valued integrands.
pub fn integrate_vector_unit<F: Fn(f64, f64) -> Vector>(f: F) -> Vector {
    let mut acc = f(0.5, 0.5).scale(GL7_MID_WEIGHT);
    for &(t, s, w) in GL7_PAIRS.iter() {
        let pair = f(s, t).add(&f(t, s));
        acc = acc.add(&pair.scale(w));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eigen_2x2_psystem_shape() {
        // [[0,-1],[p',0]] with p' = -2 has eigenvalues -sqrt2, sqrt2.
        let m = Matrix::from_rows(&[&[0.0, -1.0], &[-2.0, 0.0]]);
        let ev = m.real_eigenvalues().unwrap();
        assert_abs_diff_eq!(ev[0], -(2.0f64.sqrt()), epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 2.0f64.sqrt(), epsilon = 1e-14);
        for k in 0..2 {
            let r = m.right_eigenvector(ev[k]).unwrap();
            let res = m.matvec(&r).sub(&r.scale(ev[k]));
            assert!(res.norm() < 1e-13);
        }
    }

    #[test]
    fn eigen_3x3_known_roots() {
        // Similarity transform of diag(1, 2, 5) by a fixed matrix.
        let s = Matrix::from_rows(&[&[1.0, 0.3, 0.1], &[0.0, 1.0, 0.4], &[0.2, 0.0, 1.0]]);
        let sinv = s.inverse().unwrap();
        let d = Matrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 5.0]]);
        // a = s * d * s^{-1}
        let mut sd = Matrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += s.get(i, k) * d.get(k, j);
                }
                sd.set(i, j, acc);
            }
        }
        let mut a = Matrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += sd.get(i, k) * sinv.get(k, j);
                }
                a.set(i, j, acc);
            }
        }
        let ev = a.real_eigenvalues().unwrap();
        assert_abs_diff_eq!(ev[0], 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(ev[1], 2.0, epsilon = 1e-11);
        assert_abs_diff_eq!(ev[2], 5.0, epsilon = 1e-11);
        for k in 0..3 {
            let r = a.right_eigenvector(ev[k]).unwrap();
            assert!(a.matvec(&r).sub(&r.scale(ev[k])).norm() < 1e-10);
        }
    }

    #[test]
    fn complex_pair_rejected() {
        let m = Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(matches!(
            m.real_eigenvalues(),
            Err(LinalgError::ComplexEigenvalues { .. })
        ));
    }

    #[test]
    fn solve_and_inverse() {
        let m = Matrix::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 2.0]]);
        let b = Vector::from_slice(&[1.0, 2.0, 3.0]);
        let x = m.solve(&b).unwrap();
        assert!(m.matvec(&x).sub(&b).norm() < 1e-13);
        let inv = m.inverse().unwrap();
        let prod = {
            let mut p = Matrix::zeros(3);
            for i in 0..3 {
                for j in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += m.get(i, k) * inv.get(k, j);
                    }
                    p.set(i, j, acc);
                }
            }
            p
        };
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod.get(i, j), want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn gl7_exact_for_degree_12_and_symmetric() {
        // integral of t^12 over [0,1] = 1/13
        let val = integrate_vector_unit(|_, c1| Vector::scalar(c1.powi(12)));
        assert_abs_diff_eq!(val[0], 1.0 / 13.0, epsilon = 1e-15);
        // endpoint-swap symmetry must be bit-exact
        let x = Vector::from_slice(&[0.3, -0.7]);
        let y = Vector::from_slice(&[1.1, 0.2]);
        let g = |a: &Vector, b: &Vector| {
            integrate_vector_unit(|c0, c1| {
                let p = a.combine(b, c0, c1);
                Vector::from_slice(&[p[0] * p[0] * p[1], p[1].exp()])
            })
        };
        let ab = g(&x, &y);
        let ba = g(&y, &x);
        assert_eq!(ab[0].to_bits(), ba[0].to_bits());
        assert_eq!(ab[1].to_bits(), ba[1].to_bits());
    }

    #[test]
    fn vector_serde_roundtrip() {
        let v = Vector::from_slice(&[0.1, -2.5e-17, 3.0]);
        let s = serde_json::to_string(&v).unwrap();
        let w: Vector = serde_json::from_str(&s).unwrap();
        assert_eq!(v, w);
    }
}
