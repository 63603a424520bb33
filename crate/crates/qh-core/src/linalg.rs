//! Dense exact linear algebra over [`Scalar`].
//!
//! Pivoting is deterministic (first nonzero entry); there are no numerical
//! heuristics anywhere. All instances this crate handles are tiny, so dense
//! storage is the right trade-off.

use crate::error::QhError;
use crate::scalar::{FieldCfg, Scalar};
use std::fmt;
use std::ops::{Add, Mul, Sub};

/// Dense row-major matrix over an exact field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub field: FieldCfg,
    data: Vec<Scalar>,
}

impl Mat {
    pub fn zero(rows: usize, cols: usize, field: FieldCfg) -> Mat {
        Mat { rows, cols, field, data: vec![field.zero(); rows * cols] }
    }

    pub fn identity(n: usize, field: FieldCfg) -> Mat {
        let mut m = Mat::zero(n, n, field);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>, cols: usize, field: FieldCfg) -> Mat {
        let r = rows.len();
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            assert_eq!(row.len(), cols);
            data.extend(row);
        }
        Mat { rows: r, cols, field, data }
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(rows: usize, cols: usize, field: FieldCfg, f: impl Fn(usize, usize) -> Scalar) -> Mat {
        let mut m = Mat::zero(rows, cols, field);
        for i in 0..rows {
            for j in 0..cols {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| if i == j { self.at(i, j).is_one() } else { self.at(i, j).is_zero() })
            })
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, self.field, |i, j| self.at(j, i).clone())
    }

    pub fn scale(&self, c: &Scalar) -> Mat {
        Mat::from_fn(self.rows, self.cols, self.field, |i, j| self.at(i, j) * c)
    }

    pub fn apply(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(v.len(), self.cols, "shape mismatch in apply");
        (0..self.rows)
            .map(|i| {
                let mut acc = self.field.zero();
                for j in 0..self.cols {
                    if !self.at(i, j).is_zero() && !v[j].is_zero() {
                        acc = &acc + &(self.at(i, j) * &v[j]);
                    }
                }
                acc
            })
            .collect()
    }

    /// Stack columns of `self` into one long vector, row-major.
    pub fn flatten(&self) -> Vec<Scalar> {
        self.data.clone()
    }

    pub fn rank(&self) -> usize {
        rref(self).rank
    }

    pub fn inverse(&self) -> Option<Mat> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = Mat::zero(n, 2 * n, self.field);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.at(i, j).clone());
            }
            aug.set(i, n + i, self.field.one());
        }
        let r = rref(&aug);
        if (0..n).any(|i| !r.reduced.at(i, i).is_one()) {
            return None;
        }
        Some(Mat::from_fn(n, n, self.field, |i, j| r.reduced.at(i, n + j).clone()))
    }
}

impl Add<&Mat> for &Mat {
    type Output = Mat;
    fn add(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.rows, self.cols, self.field, |i, j| self.at(i, j) + rhs.at(i, j))
    }
}

impl Sub<&Mat> for &Mat {
    type Output = Mat;
    fn sub(self, rhs: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Mat::from_fn(self.rows, self.cols, self.field, |i, j| self.at(i, j) - rhs.at(i, j))
    }
}

impl Mul<&Mat> for &Mat {
    type Output = Mat;
    fn mul(self, rhs: &Mat) -> Mat {
        assert_eq!(self.cols, rhs.rows, "shape mismatch in mul");
        let mut out = Mat::zero(self.rows, rhs.cols, self.field);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.at(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = &(a * b) + out.at(i, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Result of reduced row-echelon elimination.
pub struct Rref {
    pub reduced: Mat,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Unique reduced row-echelon form, first-nonzero pivoting.
pub fn rref(m: &Mat) -> Rref {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row >= a.rows {
            break;
        }
        let piv = (row..a.rows).find(|&r| !a.at(r, col).is_zero());
        let Some(piv) = piv else { continue };
        if piv != row {
            for j in 0..a.cols {
                let tmp = a.at(piv, j).clone();
                a.set(piv, j, a.at(row, j).clone());
                a.set(row, j, tmp);
            }
        }
        let inv = a.at(row, col).inv();
        for j in col..a.cols {
            let v = a.at(row, j) * &inv;
            a.set(row, j, v);
        }
        for r in 0..a.rows {
            if r != row && !a.at(r, col).is_zero() {
                let factor = a.at(r, col).clone();
                for j in col..a.cols {
                    let v = a.at(r, j) - &(&factor * a.at(row, j));
                    a.set(r, j, v);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    let rank = pivots.len();
    Rref { reduced: a, pivots, rank }
}

/// Basis of the right kernel, free variables set to unit vectors in
/// increasing column order.
pub fn kernel_basis(m: &Mat) -> Vec<Vec<Scalar>> {
    let r = rref(m);
    let mut out = Vec::new();
    let pivot_set: Vec<Option<usize>> = {
        let mut v = vec![None; m.cols];
        for (i, &c) in r.pivots.iter().enumerate() {
            v[c] = Some(i);
        }
        v
    };
    for free in 0..m.cols {
        if pivot_set[free].is_some() {
            continue;
        }
        let mut vec = vec![m.field.zero(); m.cols];
        vec[free] = m.field.one();
        for (pi, &pc) in r.pivots.iter().enumerate() {
            vec[pc] = -r.reduced.at(pi, free);
        }
        out.push(vec);
    }
    out
}

/// Particular solution of m x = b with free variables zero, if consistent.
pub fn solve(m: &Mat, b: &[Scalar]) -> Option<Vec<Scalar>> {
    assert_eq!(m.rows, b.len(), "solve: dimension mismatch");
    let mut aug = Mat::zero(m.rows, m.cols + 1, m.field);
    for i in 0..m.rows {
        for j in 0..m.cols {
            aug.set(i, j, m.at(i, j).clone());
        }
        aug.set(i, m.cols, b[i].clone());
    }
    let r = rref(&aug);
    if r.pivots.contains(&m.cols) {
        return None; // inconsistent
    }
    let mut x = vec![m.field.zero(); m.cols];
    for (pi, &pc) in r.pivots.iter().enumerate() {
        x[pc] = r.reduced.at(pi, m.cols).clone();
    }
    Some(x)
}

/// Kronecker product with the block convention
/// (a ⊗ b)[(i·b.rows+k), (j·b.cols+l)] = a[i,j]·b[k,l].
pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zero(a.rows * b.rows, a.cols * b.cols, a.field);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let c = a.at(i, j);
            if c.is_zero() {
                continue;
            }
            for k in 0..b.rows {
                for l in 0..b.cols {
                    if !b.at(k, l).is_zero() {
                        out.set(i * b.rows + k, j * b.cols + l, c * b.at(k, l));
                    }
                }
            }
        }
    }
    out
}

/// Coordinate unit vectors completing span(sub) to the ambient space,
/// scanned greedily by increasing coordinate index.
///
/// With `require_independent`, linearly dependent input is an error.
pub fn complement_basis(
    sub: &[Vec<Scalar>],
    ambient_dim: usize,
    field: FieldCfg,
    require_independent: bool,
) -> Result<Vec<Vec<Scalar>>, QhError> {
    for v in sub {
        assert_eq!(v.len(), ambient_dim, "vector outside ambient space");
    }
    let m = Mat::from_rows(sub.to_vec(), ambient_dim, field);
    let base_rank = rref(&m).rank;
    if require_independent && base_rank != sub.len() {
        return Err(QhError::Linalg("complement_basis: input vectors are dependent".into()));
    }
    let mut acc = sub.to_vec();
    let mut rank = base_rank;
    let mut out = Vec::new();
    for c in 0..ambient_dim {
        if rank == ambient_dim {
            break;
        }
        let mut e = vec![field.zero(); ambient_dim];
        e[c] = field.one();
        acc.push(e.clone());
        let new_rank = rref(&Mat::from_rows(acc.clone(), ambient_dim, field)).rank;
        if new_rank > rank {
            rank = new_rank;
            out.push(e);
        } else {
            acc.pop();
        }
    }
    Ok(out)
}

/// A subspace held in rref form, supporting membership tests and canonical
/// quotient coordinates (the complement unit vectors).
#[derive(Clone, Debug)]
pub struct Subspace {
    pub ambient: usize,
    pub field: FieldCfg,
    rref_rows: Mat,
    pivots: Vec<usize>,
    /// non-pivot coordinates, increasing; these index the quotient basis
    pub complement: Vec<usize>,
}

impl Subspace {
    pub fn from_spanning(vectors: &[Vec<Scalar>], ambient: usize, field: FieldCfg) -> Subspace {
        let m = if vectors.is_empty() {
            Mat::zero(0, ambient, field)
        } else {
            Mat::from_rows(vectors.to_vec(), ambient, field)
        };
        let r = rref(&m);
        let mut rows = Vec::new();
        for i in 0..r.rank {
            rows.push(r.reduced.row(i).to_vec());
        }
        let rref_rows = Mat::from_rows(rows, ambient, field);
        let complement = (0..ambient).filter(|c| !r.pivots.contains(c)).collect();
        Subspace { ambient, field, rref_rows, pivots: r.pivots, complement }
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Reduce v modulo the subspace; the result has zeros in all pivot
    /// coordinates.
    pub fn reduce(&self, v: &[Scalar]) -> Vec<Scalar> {
        let mut w = v.to_vec();
        for (i, &pc) in self.pivots.iter().enumerate() {
            if !w[pc].is_zero() {
                let c = w[pc].clone();
                for j in 0..self.ambient {
                    w[j] = &w[j] - &(&c * self.rref_rows.at(i, j));
                }
            }
        }
        w
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Coordinates of the class of v in the quotient basis (complement
    /// unit vectors).
    pub fn quotient_coords(&self, v: &[Scalar]) -> Vec<Scalar> {
        let w = self.reduce(v);
        self.complement.iter().map(|&c| w[c].clone()).collect()
    }

    pub fn quotient_dim(&self) -> usize {
        self.complement.len()
    }

    /// Lift quotient coordinates back to a representative in the ambient
    /// space (supported on complement coordinates).
    pub fn lift(&self, q: &[Scalar]) -> Vec<Scalar> {
        let mut v = vec![self.field.zero(); self.ambient];
        for (k, &c) in self.complement.iter().enumerate() {
            v[c] = q[k].clone();
        }
        v
    }

    pub fn basis_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.dim()).map(|i| self.rref_rows.row(i).to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qmat(rows: Vec<Vec<i64>>) -> Mat {
        let cols = rows.first().map_or(0, |r| r.len());
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(|x| FieldCfg::Q.from_i64(x)).collect())
                .collect(),
            cols,
            FieldCfg::Q,
        )
    }

    #[test]
    fn rref_identity() {
        let m = Mat::identity(2, FieldCfg::Q);
        let r = rref(&m);
        assert!(r.reduced.is_identity());
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn rref_rank_one() {
        // [[1,2],[2,4]] -> [[1,2],[0,0]], pivots [0], rank 1
        let m = qmat(vec![vec![1, 2], vec![2, 4]]);
        let r = rref(&m);
        assert_eq!(r.rank, 1);
        assert_eq!(r.pivots, vec![0]);
        assert_eq!(r.reduced, qmat(vec![vec![1, 2], vec![0, 0]]));
    }

    #[test]
    fn rref_empty() {
        let m = Mat::zero(0, 0, FieldCfg::Q);
        let r = rref(&m);
        assert_eq!(r.rank, 0);
        assert!(r.pivots.is_empty());
    }

    #[test]
    fn rref_idempotent() {
        let m = qmat(vec![vec![2, 4, 1], vec![1, 2, 3], vec![0, 1, 1]]);
        let r1 = rref(&m);
        let r2 = rref(&r1.reduced);
        assert_eq!(r1.reduced, r2.reduced);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        assert!(kernel_basis(&Mat::identity(3, FieldCfg::Q)).is_empty());
    }

    #[test]
    fn kernel_of_zero_matrix() {
        let m = Mat::zero(2, 3, FieldCfg::Q);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 3);
        for (i, v) in k.iter().enumerate() {
            for (j, x) in v.iter().enumerate() {
                assert_eq!(x.is_one(), i == j);
            }
        }
    }

    #[test]
    fn kernel_of_row() {
        // [[1,2]] -> [(-2, 1)]
        let m = qmat(vec![vec![1, 2]]);
        let k = kernel_basis(&m);
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], vec![FieldCfg::Q.from_i64(-2), FieldCfg::Q.from_i64(1)]);
    }

    #[test]
    fn solve_cases() {
        let id = Mat::identity(2, FieldCfg::Q);
        let b = vec![FieldCfg::Q.from_i64(3), FieldCfg::Q.from_i64(-1)];
        assert_eq!(solve(&id, &b), Some(b.clone()));

        let m = qmat(vec![vec![1], vec![0]]);
        let b = vec![FieldCfg::Q.from_i64(0), FieldCfg::Q.from_i64(1)];
        assert_eq!(solve(&m, &b), None);

        let m = qmat(vec![vec![2]]);
        let b = vec![FieldCfg::Q.from_i64(1)];
        assert_eq!(solve(&m, &b), Some(vec![FieldCfg::Q.from_ratio(1, 2)]));
    }

    #[test]
    fn kron_cases() {
        let c = qmat(vec![vec![3]]);
        let m = qmat(vec![vec![1, 2], vec![0, 1]]);
        assert_eq!(kron(&c, &m), m.scale(&FieldCfg::Q.from_i64(3)));

        let i2 = Mat::identity(2, FieldCfg::Q);
        let i3 = Mat::identity(3, FieldCfg::Q);
        assert!(kron(&i2, &i3).is_identity());

        let n = qmat(vec![vec![0, 1], vec![0, 0]]);
        let t = qmat(vec![vec![2]]);
        assert_eq!(kron(&n, &t), qmat(vec![vec![0, 2], vec![0, 0]]));
    }

    #[test]
    fn kron_multiplicative() {
        let a = qmat(vec![vec![1, 2], vec![3, 4]]);
        let b = qmat(vec![vec![0, 1], vec![1, 1]]);
        let c = qmat(vec![vec![2, 0], vec![1, 1]]);
        let d = qmat(vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(&kron(&a, &b) * &kron(&c, &d), kron(&(&a * &c), &(&b * &d)));
    }

    #[test]
    fn complement_cases() {
        let f = FieldCfg::Q;
        let e = |i: usize| {
            let mut v = vec![f.zero(); 2];
            v[i] = f.one();
            v
        };
        assert_eq!(complement_basis(&[], 2, f, true).unwrap(), vec![e(0), e(1)]);
        assert_eq!(complement_basis(&[e(0)], 2, f, true).unwrap(), vec![e(1)]);
        // span{(1,1)}: e0 is not in it, greedy picks e0
        let ones = vec![f.one(), f.one()];
        assert_eq!(complement_basis(&[ones], 2, f, true).unwrap(), vec![e(0)]);
        // dependent input rejected when independence demanded
        let dep = vec![e(0), e(0)];
        assert!(complement_basis(&dep, 2, f, true).is_err());
        assert!(complement_basis(&dep, 2, f, false).is_ok());
    }

    #[test]
    fn rank_plus_nullity() {
        let m = qmat(vec![vec![1, 2, 3], vec![2, 4, 6], vec![0, 1, 1]]);
        let r = rref(&m);
        let k = kernel_basis(&m);
        assert_eq!(r.rank + k.len(), m.cols);
        for v in &k {
            assert!(m.apply(v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn subspace_quotient_roundtrip() {
        let f = FieldCfg::Q;
        let s = Subspace::from_spanning(
            &[vec![f.one(), f.one(), f.zero()]],
            3,
            f,
        );
        assert_eq!(s.dim(), 1);
        assert_eq!(s.quotient_dim(), 2);
        let v = vec![f.from_i64(2), f.from_i64(5), f.from_i64(7)];
        let q = s.quotient_coords(&v);
        // class of v equals class of its lift
        let w = s.lift(&q);
        let mut diff = Vec::new();
        for i in 0..3 {
            diff.push(&v[i] - &w[i]);
        }
        assert!(s.contains(&diff));
    }
}
