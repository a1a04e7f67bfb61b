//! Matrix Lie groups SO(3) and SE(3): elements, algebra coordinates, hat/vee,
//! closed-form exponentials and reprojection onto the group.
//!
//! Algebra coordinates are taken with respect to a fixed generator basis.
//! For so(3):
//!
//! ```text
//! e1 = [ 0  1  0]   e2 = [0  0  0]   e3 = [ 0  0  1]
//!      [-1  0  0]        [0  0  1]        [ 0  0  0]
//!      [ 0  0  0]        [0 -1  0]        [-1  0  0]
//! ```
//!
//! so `hat(v) = [[0, v1, v3], [-v1, 0, v2], [-v3, -v2, 0]]`. For se(3) the
//! first three coordinates use the same rotational generators and the last
//! three fill the translation column.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::scalar::Real;

/// Tolerance used by [`vee`] when checking membership in the algebra.
pub const ALGEBRA_TOL: f64 = 1e-10;

/// Largest Frobenius distance from the polar factor that [`GroupElement::reproject`] accepts.
pub const MAX_REPROJECTION_DRIFT: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GroupTag {
    So3,
    Se3,
}

impl GroupTag {
    /// Side length of the matrix representation.
    pub const fn matrix_dim(self) -> usize {
        match self {
            GroupTag::So3 => 3,
            GroupTag::Se3 => 4,
        }
    }

    /// Dimension of the Lie algebra.
    pub const fn algebra_dim(self) -> usize {
        match self {
            GroupTag::So3 => 3,
            GroupTag::Se3 => 6,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            GroupTag::So3 => "so3",
            GroupTag::Se3 => "se3",
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "so3" | "so(3)" => Ok(GroupTag::So3),
            "se3" | "se(3)" => Ok(GroupTag::Se3),
            other => Err(Error::invalid(format!(
                "unknown group `{other}` (expected so3 or se3)"
            ))),
        }
    }
}

/// Coordinates of a Lie algebra element in the generator basis.
#[derive(Clone, Copy, PartialEq)]
pub struct AlgebraVector<T> {
    tag: GroupTag,
    coords: [T; 6],
}

impl<T: Real> AlgebraVector<T> {
    pub fn new(tag: GroupTag, coords: &[T]) -> Result<Self> {
        if coords.len() != tag.algebra_dim() {
            return Err(Error::invalid(format!(
                "{tag} algebra vector needs {} coordinates, got {}",
                tag.algebra_dim(),
                coords.len()
            )));
        }
        let mut out = Self::zeros(tag);
        out.coords[..coords.len()].copy_from_slice(coords);
        Ok(out)
    }

    pub fn zeros(tag: GroupTag) -> Self {
        Self {
            tag,
            coords: [T::zero(); 6],
        }
    }

    /// The `k`-th basis vector (0-based).
    pub fn basis(tag: GroupTag, k: usize) -> Self {
        assert!(
            k < tag.algebra_dim(),
            "basis index {k} out of range for {tag}"
        );
        let mut out = Self::zeros(tag);
        out.coords[k] = T::one();
        out
    }

    #[inline]
    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    #[inline]
    pub fn coords(&self) -> &[T] {
        &self.coords[..self.tag.algebra_dim()]
    }

    #[inline]
    pub fn coords_mut(&mut self) -> &mut [T] {
        let n = self.tag.algebra_dim();
        &mut self.coords[..n]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.tag.algebra_dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn norm(&self) -> T {
        self.coords()
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.coords()
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Norm of the rotational part (the first three coordinates).
    pub fn rotation_norm(&self) -> T {
        self.coords[..3]
            .iter()
            .fold(T::zero(), |acc, &x| acc + x * x)
            .sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = *self;
        out.coords.iter_mut().for_each(|x| *x = *x * s);
        out
    }

    pub fn hat(&self) -> SquareMatrix<T> {
        hat(self)
    }
}

impl<T: Real> Add for AlgebraVector<T> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(self.tag, rhs.tag, "algebra tag mismatch");
        self.coords
            .iter_mut()
            .zip(rhs.coords.iter())
            .for_each(|(a, &b)| *a = *a + b);
        self
    }
}

impl<T: Real> Sub for AlgebraVector<T> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<T: Real> Neg for AlgebraVector<T> {
    type Output = Self;

    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for AlgebraVector<T> {
    type Output = Self;

    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T: fmt::Debug> fmt::Debug for AlgebraVector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{:?}",
            self.tag,
            &self.coords[..self.tag.algebra_dim()]
        )
    }
}

fn skew3<T: Real>(v1: T, v2: T, v3: T) -> SquareMatrix<T> {
    let z = T::zero();
    SquareMatrix::from_rows([[z, v1, v3], [-v1, z, v2], [-v3, -v2, z]])
}

/// Maps algebra coordinates to the matrix `Σ v_i e_i`.
pub fn hat<T: Real>(v: &AlgebraVector<T>) -> SquareMatrix<T> {
    let c = &v.coords;
    let s = skew3(c[0], c[1], c[2]);
    match v.tag {
        GroupTag::So3 => s,
        GroupTag::Se3 => {
            let mut m = SquareMatrix::zeros(4);
            m.set_block(&s);
            m[(0, 3)] = c[3];
            m[(1, 3)] = c[4];
            m[(2, 3)] = c[5];
            m
        }
    }
}

/// Inverse of [`hat`]. Fails when `m` is not in the algebra (within [`ALGEBRA_TOL`]).
pub fn vee<T: Real>(m: &SquareMatrix<T>, tag: GroupTag) -> Result<AlgebraVector<T>> {
    if m.dim() != tag.matrix_dim() {
        return Err(Error::invalid(format!(
            "{tag} algebra element must be {n}x{n}, got {d}x{d}",
            n = tag.matrix_dim(),
            d = m.dim()
        )));
    }
    let tol = T::lit(ALGEBRA_TOL);
    for r in 0..3 {
        if m[(r, r)].abs() > tol {
            return Err(Error::invalid(
                "matrix has a nonzero diagonal; not in the algebra",
            ));
        }
        for c in (r + 1)..3 {
            if (m[(r, c)] + m[(c, r)]).abs() > tol {
                return Err(Error::invalid("rotation block is not skew-symmetric"));
            }
        }
    }
    if tag == GroupTag::Se3 && (0..4).any(|c| m[(3, c)].abs() > tol) {
        return Err(Error::invalid("last row of an se3 element must be zero"));
    }
    let mut v = AlgebraVector::zeros(tag);
    v.coords[0] = m[(0, 1)];
    v.coords[1] = m[(1, 2)];
    v.coords[2] = m[(0, 2)];
    if tag == GroupTag::Se3 {
        v.coords[3] = m[(0, 3)];
        v.coords[4] = m[(1, 3)];
        v.coords[5] = m[(2, 3)];
    }
    Ok(v)
}

/// `sin θ / θ`, `(1 − cos θ) / θ²` and `(θ − sin θ) / θ³`, with series near zero.
fn exp_coefficients<T: Real>(theta: T) -> (T, T, T) {
    if theta < T::lit(T::SMALL_ANGLE) {
        let t2 = theta * theta;
        (
            T::one() - t2 / T::lit(6.0),
            T::lit(0.5) - t2 / T::lit(24.0),
            T::lit(1.0 / 6.0) - t2 / T::lit(120.0),
        )
    } else {
        let s = theta.sin();
        let half_sin = (theta * T::lit(0.5)).sin();
        let t2 = theta * theta;
        // 1 − cos θ = 2 sin²(θ/2) avoids cancellation for small θ.
        (
            s / theta,
            T::lit(2.0) * half_sin * half_sin / t2,
            (theta - s) / (t2 * theta),
        )
    }
}

fn rodrigues<T: Real>(k: &SquareMatrix<T>, theta: T) -> SquareMatrix<T> {
    let (a, b, _) = exp_coefficients(theta);
    let k2 = *k * *k;
    SquareMatrix::identity(3) + k.scale(a) + k2.scale(b)
}

/// Closed-form (Rodrigues) exponential on SO(3).
///
/// Panics if `v` is not an so(3) vector.
pub fn exp_so3<T: Real>(v: &AlgebraVector<T>) -> GroupElement<T> {
    assert_eq!(v.tag, GroupTag::So3, "exp_so3 needs an so3 vector");
    let k = hat(v);
    GroupElement {
        tag: GroupTag::So3,
        mat: rodrigues(&k, v.rotation_norm()),
    }
}

/// Closed-form exponential on SE(3): `[[exp(S), A t], [0, 1]]` with
/// `A = I + (1 − cos θ)/θ² S + (θ − sin θ)/θ³ S²`.
///
/// Panics if `v` is not an se(3) vector.
pub fn exp_se3<T: Real>(v: &AlgebraVector<T>) -> GroupElement<T> {
    assert_eq!(v.tag, GroupTag::Se3, "exp_se3 needs an se3 vector");
    let c = &v.coords;
    let s = skew3(c[0], c[1], c[2]);
    let theta = v.rotation_norm();
    let (a, b, d) = exp_coefficients(theta);
    let s2 = s * s;
    let rot = SquareMatrix::identity(3) + s.scale(a) + s2.scale(b);
    let left_jac = SquareMatrix::identity(3) + s.scale(b) + s2.scale(d);
    let mut mat = SquareMatrix::identity(4);
    mat.set_block(&rot);
    for r in 0..3 {
        mat[(r, 3)] = left_jac[(r, 0)] * c[3] + left_jac[(r, 1)] * c[4] + left_jac[(r, 2)] * c[5];
    }
    GroupElement {
        tag: GroupTag::Se3,
        mat,
    }
}

/// Exponential map, dispatching on the vector's group.
pub fn exp<T: Real>(v: &AlgebraVector<T>) -> GroupElement<T> {
    match v.tag {
        GroupTag::So3 => exp_so3(v),
        GroupTag::Se3 => exp_se3(v),
    }
}

/// An element of SO(3) or SE(3) in matrix form. Immutable; operations return new values.
#[derive(Clone, Copy, PartialEq)]
pub struct GroupElement<T> {
    tag: GroupTag,
    mat: SquareMatrix<T>,
}

impl<T: Real> GroupElement<T> {
    /// Wraps `mat` after checking the group invariants.
    pub fn new(tag: GroupTag, mat: SquareMatrix<T>) -> Result<Self> {
        let g = Self { tag, mat };
        g.check()?;
        Ok(g)
    }

    /// Accepts a matrix whose rotation block is within `tol` (‖RᵀR − I‖_F) of
    /// orthogonal and snaps it onto the group.
    pub fn from_approximate(tag: GroupTag, mat: SquareMatrix<T>, tol: T) -> Result<Self> {
        let g = Self { tag, mat };
        g.check_shape()?;
        let err = g.orthogonality_error();
        if !(err <= tol) {
            return Err(Error::invalid(format!(
                "rotation block is {err:e} away from orthogonal (tolerance {tol:e})"
            )));
        }
        g.reproject().map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn identity(tag: GroupTag) -> Self {
        Self {
            tag,
            mat: SquareMatrix::identity(tag.matrix_dim()),
        }
    }

    /// SE(3) element from a rotation and a translation.
    pub fn from_parts(rotation: &GroupElement<T>, translation: [T; 3]) -> Result<Self> {
        if rotation.tag != GroupTag::So3 {
            return Err(Error::invalid("rotation part must be an so3 element"));
        }
        let mut mat = SquareMatrix::identity(4);
        mat.set_block(&rotation.mat);
        for (r, &t) in translation.iter().enumerate() {
            mat[(r, 3)] = t;
        }
        Ok(Self {
            tag: GroupTag::Se3,
            mat,
        })
    }

    #[inline]
    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    #[inline]
    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.mat
    }

    /// The 3×3 rotation block.
    pub fn rotation(&self) -> SquareMatrix<T> {
        self.mat.block(3)
    }

    /// Translation column; zero for SO(3).
    pub fn translation(&self) -> [T; 3] {
        match self.tag {
            GroupTag::So3 => [T::zero(); 3],
            GroupTag::Se3 => [self.mat[(0, 3)], self.mat[(1, 3)], self.mat[(2, 3)]],
        }
    }

    /// ‖RᵀR − I‖_F of the rotation block.
    pub fn orthogonality_error(&self) -> T {
        let r = self.rotation();
        (r.transpose() * r - SquareMatrix::identity(3)).frobenius_norm()
    }

    fn check_shape(&self) -> Result<()> {
        if self.mat.dim() != self.tag.matrix_dim() {
            return Err(Error::invalid(format!(
                "{} element must be {n}x{n}",
                self.tag,
                n = self.tag.matrix_dim()
            )));
        }
        if self.tag == GroupTag::Se3 {
            let z = T::zero();
            let row = [
                self.mat[(3, 0)],
                self.mat[(3, 1)],
                self.mat[(3, 2)],
                self.mat[(3, 3)],
            ];
            if row != [z, z, z, T::one()] {
                return Err(Error::invalid(
                    "se3 element must have last row [0, 0, 0, 1]",
                ));
            }
        }
        Ok(())
    }

    /// Checks every group invariant.
    pub fn check(&self) -> Result<()> {
        self.check_shape()?;
        let err = self.orthogonality_error();
        if !(err <= T::lit(T::GROUP_TOL)) {
            return Err(Error::invalid(format!(
                "rotation block not orthogonal: ‖RᵀR − I‖_F = {err:e}"
            )));
        }
        if !(self.rotation().determinant() > T::zero()) {
            return Err(Error::invalid(
                "rotation block has non-positive determinant",
            ));
        }
        Ok(())
    }

    fn same_tag(&self, other: &Self) -> Result<()> {
        if self.tag != other.tag {
            return Err(Error::invalid(format!(
                "group mismatch: {} vs {}",
                self.tag, other.tag
            )));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.same_tag(other)?;
        Ok(self.compose(other))
    }

    /// Group product without the tag check; callers guarantee matching groups.
    #[inline]
    pub(crate) fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.tag, other.tag);
        Self {
            tag: self.tag,
            mat: self.mat * other.mat,
        }
    }

    /// `self · exp(hat(v))`.
    #[inline]
    pub fn right_exp(&self, v: &AlgebraVector<T>) -> Self {
        debug_assert_eq!(self.tag, v.tag);
        self.compose(&exp(v))
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation().transpose();
        match self.tag {
            GroupTag::So3 => Self {
                tag: self.tag,
                mat: rt,
            },
            GroupTag::Se3 => {
                let t = self.translation();
                let mut mat = SquareMatrix::identity(4);
                mat.set_block(&rt);
                for r in 0..3 {
                    mat[(r, 3)] = -(rt[(r, 0)] * t[0] + rt[(r, 1)] * t[1] + rt[(r, 2)] * t[2]);
                }
                Self { tag: self.tag, mat }
            }
        }
    }

    /// Replaces the rotation block with its polar factor, the nearest rotation
    /// in Frobenius norm. Translation and last row are left alone.
    ///
    /// Fails with an integrity error if the block is more than
    /// [`MAX_REPROJECTION_DRIFT`] away from its polar factor or is not
    /// orientation preserving.
    pub fn reproject(&self) -> Result<Self> {
        let r = self.rotation();
        if !(r.determinant() > T::zero()) {
            return Err(Error::Integrity(
                "rotation block is singular or orientation reversing".into(),
            ));
        }
        let q = polar_factor(&r)
            .ok_or_else(|| Error::Integrity("polar iteration did not converge".into()))?;
        let drift = (r - q).frobenius_norm();
        if !(drift <= T::lit(MAX_REPROJECTION_DRIFT)) {
            return Err(Error::Integrity(format!(
                "rotation block drifted {drift:e} from the group (limit {MAX_REPROJECTION_DRIFT})"
            )));
        }
        let mut mat = self.mat;
        mat.set_block(&q);
        Ok(Self { tag: self.tag, mat })
    }

    /// Frobenius distance ‖a − b‖_F.
    pub fn distance(&self, other: &Self) -> Result<T> {
        self.same_tag(other)?;
        Ok((self.mat - other.mat).frobenius_norm())
    }
}

impl<T: fmt::Debug> fmt::Debug for GroupElement<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.tag, self.mat)
    }
}

/// Orthogonal polar factor of a 3×3 matrix with positive determinant, by
/// the Newton iteration `X ← (X + X⁻ᵀ)/2`.
fn polar_factor<T: Real>(m: &SquareMatrix<T>) -> Option<SquareMatrix<T>> {
    let half = T::lit(0.5);
    let stop = T::epsilon() * T::lit(8.0);
    let mut x = *m;
    for _ in 0..100 {
        let inv_t = x.inverse3()?.transpose();
        let next = (x + inv_t).scale(half);
        let step = (next - x).frobenius_norm();
        x = next;
        if step <= stop {
            return Some(x);
        }
    }
    None
}

/// Free-function form of [`GroupElement::multiply`].
pub fn multiply<T: Real>(a: &GroupElement<T>, b: &GroupElement<T>) -> Result<GroupElement<T>> {
    a.multiply(b)
}

/// Free-function form of [`GroupElement::inverse`].
pub fn inverse<T: Real>(g: &GroupElement<T>) -> GroupElement<T> {
    g.inverse()
}

/// Free-function form of [`GroupElement::reproject`].
pub fn reproject<T: Real>(g: &GroupElement<T>) -> Result<GroupElement<T>> {
    g.reproject()
}

/// Frobenius distance between two elements of the same group.
pub fn group_distance<T: Real>(a: &GroupElement<T>, b: &GroupElement<T>) -> Result<T> {
    a.distance(b)
}
