//! Truncated Taylor arithmetic in two variables through order three.
//!
//! A [`Jet3`] carries the value of a scalar quantity together with every
//! partial derivative of order one, two and three with respect to the two
//! parameter coordinates. Mixed partials are stored once: the slot for a
//! derivative is addressed by how many of its indices are `x2`, so
//! `d2(X1, X2)` and `d2(X2, X1)` read the same number.
//!
//! Jets also track how many derivative orders are meaningful. Taking a
//! partial derivative of a jet (see [`Jet3::partial`]) drops one order, and
//! every arithmetic result is valid only up to the smaller order of its
//! operands. Slots above the valid order are held at zero.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Highest derivative order carried by a jet.
pub const MAX_ORDER: u8 = 3;

/// One of the two parameter coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Coord {
    X1,
    X2,
}

impl Coord {
    pub const BOTH: [Coord; 2] = [Coord::X1, Coord::X2];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Coord::X1 => 0,
            Coord::X2 => 1,
        }
    }

    pub fn from_index(i: usize) -> Option<Coord> {
        match i {
            0 => Some(Coord::X1),
            1 => Some(Coord::X2),
            _ => None,
        }
    }
}

// canonical representatives of the symmetric slots, indexed by the number of x2's
const HESS_REPS: [[usize; 2]; 3] = [[0, 0], [0, 1], [1, 1]];
const THIRD_REPS: [[usize; 3]; 4] = [[0, 0, 0], [0, 0, 1], [0, 1, 1], [1, 1, 1]];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet3 {
    value: f64,
    grad: [f64; 2],
    hess: [f64; 3],
    third: [f64; 4],
    order: u8,
}

impl Default for Jet3 {
    fn default() -> Self {
        Jet3::constant(0.0)
    }
}

impl Jet3 {
    /// A constant: every derivative is zero, valid through order three.
    pub const fn constant(value: f64) -> Self {
        Jet3 {
            value,
            grad: [0.0; 2],
            hess: [0.0; 3],
            third: [0.0; 4],
            order: MAX_ORDER,
        }
    }

    /// The coordinate function `x_axis` expanded at `point`.
    pub fn seed(point: [f64; 2], axis: Coord) -> Self {
        let mut grad = [0.0; 2];
        grad[axis.index()] = 1.0;
        Jet3 {
            value: point[axis.index()],
            grad,
            hess: [0.0; 3],
            third: [0.0; 4],
            order: MAX_ORDER,
        }
    }

    /// Both coordinate functions at `point`.
    pub fn seed_both(point: [f64; 2]) -> [Jet3; 2] {
        [Jet3::seed(point, Coord::X1), Jet3::seed(point, Coord::X2)]
    }

    /// Builds a jet from raw symmetric slots. `hess` is `[11, 12, 22]` and
    /// `third` is `[111, 112, 122, 222]`.
    pub fn from_parts(value: f64, grad: [f64; 2], hess: [f64; 3], third: [f64; 4]) -> Self {
        Jet3 {
            value,
            grad,
            hess,
            third,
            order: MAX_ORDER,
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    #[inline]
    pub fn grad(&self) -> [f64; 2] {
        self.grad
    }

    /// Number of derivative orders that carry meaningful values.
    #[inline]
    pub fn order(&self) -> u8 {
        self.order
    }

    #[inline]
    pub fn d(&self, a: Coord) -> f64 {
        self.grad[a.index()]
    }

    #[inline]
    pub fn d2(&self, a: Coord, b: Coord) -> f64 {
        self.hess[a.index() + b.index()]
    }

    #[inline]
    pub fn d3(&self, a: Coord, b: Coord, c: Coord) -> f64 {
        self.third[a.index() + b.index() + c.index()]
    }

    #[inline]
    fn g(&self, i: usize) -> f64 {
        self.grad[i]
    }

    #[inline]
    fn h(&self, i: usize, j: usize) -> f64 {
        self.hess[i + j]
    }

    #[inline]
    fn t(&self, i: usize, j: usize, k: usize) -> f64 {
        self.third[i + j + k]
    }

    /// Raw hessian slots `[11, 12, 22]`.
    pub fn hess_slots(&self) -> [f64; 3] {
        self.hess
    }

    /// Raw third-order slots `[111, 112, 122, 222]`.
    pub fn third_slots(&self) -> [f64; 4] {
        self.third
    }

    /// Zeroes every slot above the valid order.
    fn truncated(mut self) -> Self {
        if self.order < 3 {
            self.third = [0.0; 4];
        }
        if self.order < 2 {
            self.hess = [0.0; 3];
        }
        if self.order < 1 {
            self.grad = [0.0; 2];
        }
        self
    }

    /// Returns the same jet with its valid order capped at `order`.
    pub fn with_order(mut self, order: u8) -> Self {
        self.order = self.order.min(order);
        self.truncated()
    }

    /// Jet of the partial derivative `∂_axis u`. Loses one valid order.
    ///
    /// Panics if the jet carries no valid first derivative.
    pub fn partial(&self, axis: Coord) -> Jet3 {
        assert!(self.order >= 1, "partial derivative of an order-0 jet");
        let a = axis.index();
        Jet3 {
            value: self.grad[a],
            grad: [self.h(a, 0), self.h(a, 1)],
            hess: [self.t(a, 0, 0), self.t(a, 0, 1), self.t(a, 1, 1)],
            third: [0.0; 4],
            order: self.order - 1,
        }
        .truncated()
    }

    /// Applies a univariate function given its value and first three
    /// derivatives `[φ, φ', φ'', φ''']` at `self.value()`.
    pub fn compose(&self, phi: [f64; 4]) -> Jet3 {
        let [p0, p1, p2, p3] = phi;
        let grad = [p1 * self.g(0), p1 * self.g(1)];
        let mut hess = [0.0; 3];
        for (slot, &[i, j]) in hess.iter_mut().zip(HESS_REPS.iter()) {
            *slot = p2 * (self.g(i) * self.g(j)) + p1 * self.h(i, j);
        }
        let mut third = [0.0; 4];
        for (slot, &[i, j, k]) in third.iter_mut().zip(THIRD_REPS.iter()) {
            let gg = self.g(i) * self.g(j) * self.g(k);
            let mixed = self.h(i, j) * self.g(k) + self.h(i, k) * self.g(j) + self.h(j, k) * self.g(i);
            *slot = p3 * gg + p2 * mixed + p1 * self.t(i, j, k);
        }
        Jet3 {
            value: p0,
            grad,
            hess,
            third,
            order: self.order,
        }
        .truncated()
    }

    pub fn scale(&self, s: f64) -> Jet3 {
        Jet3 {
            value: self.value * s,
            grad: self.grad.map(|v| v * s),
            hess: self.hess.map(|v| v * s),
            third: self.third.map(|v| v * s),
            order: self.order,
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet3 {
        Jet3 {
            value: self.value + s,
            ..*self
        }
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.compose([s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value.sin_cos();
        self.compose([c, -s, -c, s])
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.value.exp();
        self.compose([e, e, e, e])
    }

    pub fn recip(&self) -> Result<Jet3> {
        let t = self.value;
        if t == 0.0 || !t.is_finite() {
            return Err(Error::Domain(format!("reciprocal of jet with value {t}")));
        }
        let r = 1.0 / t;
        let r2 = r * r;
        Ok(self.compose([r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2]))
    }

    pub fn checked_div(&self, rhs: &Jet3) -> Result<Jet3> {
        if rhs.value == 0.0 {
            return Err(Error::Domain("division by a jet with zero value".into()));
        }
        Ok(*self * rhs.recip()?)
    }

    pub fn sqrt(&self) -> Result<Jet3> {
        let t = self.value;
        if t <= 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("square root of nonpositive value {t}")));
        }
        let s = t.sqrt();
        let d1 = 0.5 / s;
        let d2 = -0.25 / (s * t);
        let d3 = 0.375 / (s * t * t);
        Ok(self.compose([s, d1, d2, d3]))
    }

    pub fn ln(&self) -> Result<Jet3> {
        let t = self.value;
        if t <= 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("logarithm of nonpositive value {t}")));
        }
        let r = 1.0 / t;
        Ok(self.compose([t.ln(), r, -r * r, 2.0 * r * r * r]))
    }

    /// Integer power. Negative exponents require a nonzero value.
    pub fn powi(&self, n: i32) -> Result<Jet3> {
        let t = self.value;
        if n < 0 && t == 0.0 {
            return Err(Error::Domain(format!("x^{n} at x = 0")));
        }
        let mut phi = [0.0; 4];
        let mut coeff = 1.0;
        for (k, slot) in phi.iter_mut().enumerate() {
            let e = n - k as i32;
            // falling factorial n(n-1)...(n-k+1); vanishes for k > n >= 0
            *slot = if coeff == 0.0 { 0.0 } else { coeff * t.powi(e) };
            coeff *= e as f64;
        }
        Ok(self.compose(phi))
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: Jet3) -> Jet3 {
        Jet3 {
            value: self.value + rhs.value,
            grad: [self.grad[0] + rhs.grad[0], self.grad[1] + rhs.grad[1]],
            hess: [
                self.hess[0] + rhs.hess[0],
                self.hess[1] + rhs.hess[1],
                self.hess[2] + rhs.hess[2],
            ],
            third: [
                self.third[0] + rhs.third[0],
                self.third[1] + rhs.third[1],
                self.third[2] + rhs.third[2],
                self.third[3] + rhs.third[3],
            ],
            order: self.order.min(rhs.order),
        }
        .truncated()
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        Jet3 {
            value: -self.value,
            grad: self.grad.map(|v| -v),
            hess: self.hess.map(|v| -v),
            third: self.third.map(|v| -v),
            order: self.order,
        }
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: Jet3) -> Jet3 {
        self + (-rhs)
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    /// Leibniz rule. Terms are grouped in swap-symmetric pairs so that
    /// `a * b` and `b * a` agree bit for bit.
    fn mul(self, rhs: Jet3) -> Jet3 {
        let (a, b) = (&self, &rhs);
        let grad = [
            a.g(0) * b.value + a.value * b.g(0),
            a.g(1) * b.value + a.value * b.g(1),
        ];
        let mut hess = [0.0; 3];
        for (slot, &[i, j]) in hess.iter_mut().zip(HESS_REPS.iter()) {
            *slot = (a.h(i, j) * b.value + a.value * b.h(i, j)) + (a.g(i) * b.g(j) + a.g(j) * b.g(i));
        }
        let mut third = [0.0; 4];
        for (slot, &[i, j, k]) in third.iter_mut().zip(THIRD_REPS.iter()) {
            let ends = a.t(i, j, k) * b.value + a.value * b.t(i, j, k);
            let p_k = a.h(i, j) * b.g(k) + a.g(k) * b.h(i, j);
            let p_j = a.h(i, k) * b.g(j) + a.g(j) * b.h(i, k);
            let p_i = a.h(j, k) * b.g(i) + a.g(i) * b.h(j, k);
            *slot = ends + ((p_k + p_j) + p_i);
        }
        Jet3 {
            value: a.value * b.value,
            grad,
            hess,
            third,
            order: a.order.min(b.order),
        }
        .truncated()
    }
}

impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(self, rhs: f64) -> Jet3 {
        self.add_scalar(rhs)
    }
}

impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(self, rhs: f64) -> Jet3 {
        self.add_scalar(-rhs)
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(self, rhs: f64) -> Jet3 {
        self.scale(rhs)
    }
}

impl std::iter::Sum for Jet3 {
    fn sum<I: Iterator<Item = Jet3>>(iter: I) -> Jet3 {
        iter.fold(Jet3::constant(0.0), |acc, j| acc + j)
    }
}

/// Euclidean inner product of two jet-valued vectors.
pub fn dot<const N: usize>(a: &[Jet3; N], b: &[Jet3; N]) -> Jet3 {
    let mut acc = a[0] * b[0];
    for i in 1..N {
        acc = acc + a[i] * b[i];
    }
    acc
}

/// Values of a jet-valued vector.
pub fn values<const N: usize>(v: &[Jet3; N]) -> [f64; N] {
    v.map(|j| j.value())
}
