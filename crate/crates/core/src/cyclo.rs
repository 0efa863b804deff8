//! Exact arithmetic in cyclotomic fields `Q(ζ_m)`.
//!
//! An element is stored in the power basis `1, ζ, …, ζ^{φ(m)-1}` after
//! reduction modulo the m-th cyclotomic polynomial, as an integer numerator
//! vector over a common positive denominator. The representation is
//! canonical: the denominator and the numerator content are coprime, so two
//! equal field elements of the same order have identical fields.
//!
//! Every element carries its ambient order `m`. Arithmetic between different
//! orders is a usage error; use [`CycloNumber::embed_into`] to promote.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::arith::{divisors, euler_phi, lcm, mobius};
use crate::error::Error;

/// Per-order data: the cyclotomic polynomial and the reduced power basis
/// representation of every `ζ^a`, `0 <= a < m`.
#[derive(Debug)]
pub struct CycloTable {
    order: u64,
    phi: usize,
    poly: Vec<i64>,
    powers: Vec<Vec<i64>>,
}

impl CycloTable {
    fn build(order: u64) -> Self {
        let poly = cyclotomic_polynomial(order);
        let phi = poly.len() - 1;
        debug_assert_eq!(phi as u64, euler_phi(order));
        let m = order as usize;
        let mut powers = Vec::with_capacity(m);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..m {
            powers.push(cur.clone());
            // multiply by ζ and reduce the x^phi term
            let top = cur[phi - 1];
            for j in (1..phi).rev() {
                cur[j] = cur[j - 1];
            }
            cur[0] = 0;
            if top != 0 {
                for j in 0..phi {
                    cur[j] -= top * poly[j];
                }
            }
        }
        CycloTable { order, phi, poly, powers }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn phi(&self) -> usize {
        self.phi
    }

    /// Coefficients of the cyclotomic polynomial, constant term first.
    pub fn polynomial(&self) -> &[i64] {
        &self.poly
    }

    fn power(&self, a: u64) -> &[i64] {
        &self.powers[(a % self.order) as usize]
    }
}

/// The m-th cyclotomic polynomial via the Möbius product
/// `Φ_m(x) = ∏_{d | m} (x^d - 1)^{μ(m/d)}`.
pub fn cyclotomic_polynomial(m: u64) -> Vec<i64> {
    assert!(m >= 1);
    let divs = divisors(m);
    let mut acc: Vec<i128> = vec![1];
    // numerator factors first so every division below is exact
    for &d in &divs {
        if mobius(m / d) == 1 {
            let mut next = vec![0i128; acc.len() + d as usize];
            for (i, &c) in acc.iter().enumerate() {
                next[i + d as usize] += c;
                next[i] -= c;
            }
            acc = next;
        }
    }
    for &d in &divs {
        if mobius(m / d) == -1 {
            // divide by x^d - 1: q_i = -(a_i - q_{i-d}) read from the low end
            let d = d as usize;
            let qlen = acc.len() - d;
            let mut q = vec![0i128; qlen];
            for i in 0..qlen {
                let prev = if i >= d { q[i - d] } else { 0 };
                q[i] = prev - acc[i];
            }
            acc = q;
        }
    }
    acc.into_iter()
        .map(|c| i64::try_from(c).expect("cyclotomic coefficient overflow"))
        .collect()
}

fn tables() -> &'static RwLock<HashMap<u64, Arc<CycloTable>>> {
    static TABLES: OnceLock<RwLock<HashMap<u64, Arc<CycloTable>>>> = OnceLock::new();
    TABLES.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared table for order `m`, built on first use.
pub fn table(order: u64) -> Arc<CycloTable> {
    assert!(order >= 1, "cyclotomic order must be positive");
    if let Some(t) = tables().read().unwrap().get(&order) {
        return Arc::clone(t);
    }
    let built = Arc::new(CycloTable::build(order));
    let mut w = tables().write().unwrap();
    Arc::clone(w.entry(order).or_insert(built))
}

/// An exact element of `Q(ζ_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CycloNumber {
    order: u64,
    num: Vec<BigInt>,
    den: BigInt,
}

impl CycloNumber {
    pub fn zero(order: u64) -> Self {
        let phi = table(order).phi;
        CycloNumber { order, num: vec![BigInt::zero(); phi], den: BigInt::one() }
    }

    pub fn one(order: u64) -> Self {
        Self::from_integer(order, 1)
    }

    pub fn from_integer(order: u64, value: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(order);
        z.num[0] = value.into();
        z
    }

    pub fn from_rational(order: u64, value: &BigRational) -> Self {
        let mut z = Self::zero(order);
        z.num[0] = value.numer().clone();
        z.den = value.denom().clone();
        z.normalize();
        z
    }

    /// `ζ_m^k` with `k` reduced modulo `m`.
    pub fn root_of_unity(order: u64, k: i64) -> Self {
        let t = table(order);
        let a = k.rem_euclid(order as i64) as u64;
        CycloNumber {
            order,
            num: t.power(a).iter().map(|&c| BigInt::from(c)).collect(),
            den: BigInt::one(),
        }
    }

    /// Build `Σ_a counts[a] ζ_m^a` from a table of exponent multiplicities.
    pub fn from_exponent_counts(order: u64, counts: &[i64]) -> Self {
        assert_eq!(counts.len() as u64, order, "one count per exponent");
        let t = table(order);
        let mut acc = vec![0i128; t.phi];
        for (a, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (slot, &v) in acc.iter_mut().zip(t.power(a as u64)) {
                *slot += c as i128 * v as i128;
            }
        }
        let mut z = CycloNumber {
            order,
            num: acc.into_iter().map(BigInt::from).collect(),
            den: BigInt::one(),
        };
        z.normalize();
        z
    }

    /// Build from rational power-basis coefficients (length `φ(m)`).
    pub fn from_coefficients(order: u64, coeffs: &[BigRational]) -> Result<Self, Error> {
        let phi = table(order).phi;
        if coeffs.len() != phi {
            return Err(Error::InvalidInput(format!(
                "order {order} needs {phi} coefficients, got {}",
                coeffs.len()
            )));
        }
        let den = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let num = coeffs
            .iter()
            .map(|c| c.numer() * (&den / c.denom()))
            .collect();
        let mut z = CycloNumber { order, num, den };
        z.normalize();
        Ok(z)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Power-basis coefficients as reduced rationals.
    pub fn coefficients(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|n| BigRational::new(n.clone(), self.den.clone()))
            .collect()
    }

    pub fn coefficient(&self, j: usize) -> BigRational {
        BigRational::new(self.num[j].clone(), self.den.clone())
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(Zero::is_zero)
    }

    /// The rational value, if the element lies in `Q`.
    pub fn to_rational(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(Zero::is_zero) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    pub fn is_rational(&self) -> bool {
        self.to_rational().is_some()
    }

    /// True when every power-basis coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for c in &mut self.num {
                *c = -&*c;
            }
        }
        if self.is_zero() {
            self.den = BigInt::one();
            return;
        }
        if self.den.is_one() {
            return;
        }
        let mut g = self.den.clone();
        for c in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(c);
        }
        if !g.is_one() {
            self.den /= &g;
            for c in &mut self.num {
                *c /= &g;
            }
        }
    }

    fn check_order(&self, other: &Self, op: &str) {
        assert_eq!(
            self.order, other.order,
            "cyclotomic order mismatch in {op}: {} vs {} (embed_into first)",
            self.order, other.order
        );
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, Error> {
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        Ok(self.add_same(other))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, Error> {
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        Ok(self.mul_same(other))
    }

    fn add_same(&self, other: &Self) -> Self {
        let (num, den) = if self.den == other.den {
            (
                self.num.iter().zip(&other.num).map(|(a, b)| a + b).collect(),
                self.den.clone(),
            )
        } else {
            (
                self.num
                    .iter()
                    .zip(&other.num)
                    .map(|(a, b)| a * &other.den + b * &self.den)
                    .collect(),
                &self.den * &other.den,
            )
        };
        let mut z = CycloNumber { order: self.order, num, den };
        z.normalize();
        z
    }

    fn mul_same(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.order);
        }
        let t = table(self.order);
        let phi = t.phi;
        let mut conv = vec![BigInt::zero(); 2 * phi - 1];
        for (i, a) in self.num.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.num.iter().enumerate() {
                if !b.is_zero() {
                    conv[i + j] += a * b;
                }
            }
        }
        let mut num: Vec<BigInt> = conv[..phi].to_vec();
        for (i, c) in conv.iter().enumerate().skip(phi) {
            if c.is_zero() {
                continue;
            }
            for (slot, &v) in num.iter_mut().zip(t.power(i as u64)) {
                if v != 0 {
                    *slot += c * v;
                }
            }
        }
        let mut z = CycloNumber { order: self.order, num, den: &self.den * &other.den };
        z.normalize();
        z
    }

    pub fn scale_rational(&self, r: &BigRational) -> Self {
        let mut z = CycloNumber {
            order: self.order,
            num: self.num.iter().map(|c| c * r.numer()).collect(),
            den: &self.den * r.denom(),
        };
        z.normalize();
        z
    }

    pub fn scale_integer(&self, k: impl Into<BigInt>) -> Self {
        let k = k.into();
        let mut z = CycloNumber {
            order: self.order,
            num: self.num.iter().map(|c| c * &k).collect(),
            den: self.den.clone(),
        };
        z.normalize();
        z
    }

    /// Multiply by `ζ_m^k`.
    pub fn mul_root(&self, k: i64) -> Self {
        let t = table(self.order);
        let shift = k.rem_euclid(self.order as i64) as u64;
        if shift == 0 {
            return self.clone();
        }
        let mut num = vec![BigInt::zero(); t.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (slot, &v) in num.iter_mut().zip(t.power(i as u64 + shift)) {
                if v != 0 {
                    *slot += c * v;
                }
            }
        }
        CycloNumber { order: self.order, num, den: self.den.clone() }
    }

    /// Complex conjugation `ζ ↦ ζ^{-1}`.
    pub fn conjugate(&self) -> Self {
        self.galois(-1)
    }

    /// The automorphism `ζ ↦ ζ^a` for `gcd(a, m) = 1`.
    pub fn galois(&self, a: i64) -> Self {
        let t = table(self.order);
        let m = self.order as i64;
        let mut num = vec![BigInt::zero(); t.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = (a * i as i64).rem_euclid(m) as u64;
            for (slot, &v) in num.iter_mut().zip(t.power(e)) {
                if v != 0 {
                    *slot += c * v;
                }
            }
        }
        CycloNumber { order: self.order, num, den: self.den.clone() }
    }

    /// The same field element in `Q(ζ_{target})`; requires `order | target`.
    pub fn embed_into(&self, target: u64) -> Result<Self, Error> {
        if target == 0 || !target.is_multiple_of(self.order) {
            return Err(Error::OrderMismatch(self.order, target));
        }
        if target == self.order {
            return Ok(self.clone());
        }
        let step = target / self.order;
        let t = table(target);
        let mut num = vec![BigInt::zero(); t.phi];
        for (i, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (slot, &v) in num.iter_mut().zip(t.power(i as u64 * step)) {
                if v != 0 {
                    *slot += c * v;
                }
            }
        }
        Ok(CycloNumber { order: target, num, den: self.den.clone() })
    }

    /// Express the element in `Q(ζ_{target})` for `target | order`, if it
    /// lies in that subfield.
    pub fn descend(&self, target: u64) -> Option<Self> {
        if target == 0 || !self.order.is_multiple_of(target) {
            return None;
        }
        if target == self.order {
            return Some(self.clone());
        }
        if let Some(r) = self.to_rational() {
            return Some(Self::from_rational(target, &r));
        }
        // Solve E c = x where E embeds the power basis of the subfield.
        let small = table(target);
        let big = table(self.order);
        let step = self.order / target;
        let cols: Vec<Vec<BigRational>> = (0..small.phi)
            .map(|j| {
                big.power(j as u64 * step)
                    .iter()
                    .map(|&v| BigRational::from_integer(v.into()))
                    .collect()
            })
            .collect();
        let rhs = self.coefficients();
        let sol = solve_overdetermined(&cols, &rhs)?;
        let z = Self::from_coefficients(target, &sol).ok()?;
        (z.embed_into(self.order).ok()? == *self).then_some(z)
    }

    /// Smallest order in which this element can be written.
    pub fn minimal_order(&self) -> u64 {
        for d in divisors(self.order) {
            if self.descend(d).is_some() {
                return d;
            }
        }
        self.order
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if let Some(r) = self.to_rational() {
            return Some(Self::from_rational(self.order, &r.recip()));
        }
        let t = table(self.order);
        let phi = t.phi;
        // columns: num * ζ^j, solve A y = e_0 then scale by den
        let base = CycloNumber { order: self.order, num: self.num.clone(), den: BigInt::one() };
        let cols: Vec<Vec<BigRational>> = (0..phi)
            .map(|j| {
                base.mul_root(j as i64)
                    .num
                    .iter()
                    .map(|c| BigRational::from_integer(c.clone()))
                    .collect()
            })
            .collect();
        let mut rhs = vec![BigRational::zero(); phi];
        rhs[0] = BigRational::one();
        let sol = solve_overdetermined(&cols, &rhs)?;
        let inv = Self::from_coefficients(self.order, &sol).ok()?;
        Some(inv.scale_integer(self.den.clone()))
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut acc = Self::one(self.order);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_same(&base);
            }
            base = base.mul_same(&base);
            e >>= 1;
        }
        acc
    }

    /// Floating approximation `Σ c_j e^{2πij/m}`; diagnostics only.
    pub fn to_complex(&self) -> (f64, f64) {
        let den = self.den.to_f64().unwrap_or(f64::NAN);
        let m = self.order as f64;
        let mut re = 0.0;
        let mut im = 0.0;
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = c.to_f64().unwrap_or(f64::NAN) / den;
            let ang = 2.0 * std::f64::consts::PI * j as f64 / m;
            re += v * ang.cos();
            im += v * ang.sin();
        }
        (re, im)
    }

    /// Value equality across possibly different orders.
    pub fn same_value(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self == other;
        }
        let l = lcm(self.order, other.order);
        self.embed_into(l).unwrap() == other.embed_into(l).unwrap()
    }
}

/// Solve `Σ_j c_j cols[j] = rhs` exactly, assuming the columns are linearly
/// independent; `None` if the system is inconsistent.
fn solve_overdetermined(cols: &[Vec<BigRational>], rhs: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = cols.len();
    let rows = rhs.len();
    // augmented row-major matrix
    let mut a: Vec<Vec<BigRational>> = (0..rows)
        .map(|i| {
            let mut row: Vec<BigRational> = cols.iter().map(|c| c[i].clone()).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    let mut pivots = Vec::with_capacity(n);
    for col in 0..n {
        let p = (pivot_row..rows).find(|&r| !a[r][col].is_zero())?;
        a.swap(pivot_row, p);
        let inv = a[pivot_row][col].recip();
        for v in a[pivot_row].iter_mut().skip(col) {
            *v *= &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=n {
                    let delta = &f * &a[pivot_row][c];
                    a[r][c] -= delta;
                }
            }
        }
        pivots.push(pivot_row);
        pivot_row += 1;
    }
    if (pivot_row..rows).any(|r| !a[r][n].is_zero()) {
        return None;
    }
    Some(pivots.iter().map(|&r| a[r][n].clone()).collect())
}

impl Add for &CycloNumber {
    type Output = CycloNumber;
    fn add(self, rhs: &CycloNumber) -> CycloNumber {
        self.check_order(rhs, "add");
        self.add_same(rhs)
    }
}

impl Add for CycloNumber {
    type Output = CycloNumber;
    fn add(self, rhs: CycloNumber) -> CycloNumber {
        &self + &rhs
    }
}

impl AddAssign<&CycloNumber> for CycloNumber {
    fn add_assign(&mut self, rhs: &CycloNumber) {
        *self = &*self + rhs;
    }
}

impl Sub for &CycloNumber {
    type Output = CycloNumber;
    fn sub(self, rhs: &CycloNumber) -> CycloNumber {
        self.check_order(rhs, "sub");
        self.add_same(&-rhs)
    }
}

impl Sub for CycloNumber {
    type Output = CycloNumber;
    fn sub(self, rhs: CycloNumber) -> CycloNumber {
        &self - &rhs
    }
}

impl SubAssign<&CycloNumber> for CycloNumber {
    fn sub_assign(&mut self, rhs: &CycloNumber) {
        *self = &*self - rhs;
    }
}

impl Mul for &CycloNumber {
    type Output = CycloNumber;
    fn mul(self, rhs: &CycloNumber) -> CycloNumber {
        self.check_order(rhs, "mul");
        self.mul_same(rhs)
    }
}

impl Mul for CycloNumber {
    type Output = CycloNumber;
    fn mul(self, rhs: CycloNumber) -> CycloNumber {
        &self * &rhs
    }
}

impl Neg for &CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        CycloNumber {
            order: self.order,
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for CycloNumber {
    type Output = CycloNumber;
    fn neg(self) -> CycloNumber {
        -&self
    }
}

impl fmt::Display for CycloNumber {
    /// Power-basis form in `z = ζ_m`, e.g. `-1/2 + 3*z^2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let r = BigRational::new(c.clone(), self.den.clone());
            let neg = r.is_negative();
            let a = r.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            match j {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    if j == 1 {
                        f.write_str("z")?;
                    } else {
                        write!(f, "z^{j}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// An integer as a JSON number when it fits in `i64`, otherwise a decimal
/// string.
pub(crate) struct JsonInt<'a>(pub &'a BigInt);

impl Serialize for JsonInt<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl Serialize for CycloNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let reduced: Vec<(BigInt, BigInt)> = self
            .coefficients()
            .into_iter()
            .map(|r| (r.numer().clone(), r.denom().clone()))
            .collect();
        let pairs: Vec<[JsonInt<'_>; 2]> =
            reduced.iter().map(|(n, d)| [JsonInt(n), JsonInt(d)]).collect();
        let (re, im) = self.to_complex();
        let mut st = s.serialize_struct("CycloNumber", 3)?;
        st.serialize_field("order", &self.order)?;
        st.serialize_field("coeffs", &pairs)?;
        st.serialize_field("approx", &[re, im])?;
        st.end()
    }
}
