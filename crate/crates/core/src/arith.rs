//! Elementary exact number theory: factorization, valuations, the classical
//! multiplicative functions and a few modular helpers.
//!
//! Everything here works on machine integers. Levels, Hecke indices and
//! discriminants handled by this crate stay far below `2^40`, so `u64`/`i64`
//! with `i128` intermediates is enough.

use std::cmp::Ordering;
use std::fmt;

/// Prime factorization of a positive integer, primes in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factorization {
    value: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> u64 {
        self.value
    }

    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Exponent of `p` in the factorization (0 when `p` does not divide).
    pub fn exponent(&self, p: u64) -> u32 {
        self.factors
            .iter()
            .find(|&&(q, _)| q == p)
            .map_or(0, |&(_, e)| e)
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }

    /// Number of distinct prime factors.
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    /// All positive divisors, sorted ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// Factor `n` by trial division. `factorize(1)` has no factors.
///
/// # Panics
/// Panics if `n == 0`.
pub fn factorize(n: u64) -> Factorization {
    assert!(n >= 1, "factorize requires n >= 1");
    let mut factors = Vec::new();
    let mut m = n;
    let mut push = |p: u64, m: &mut u64| {
        let mut e = 0;
        while (*m).is_multiple_of(p) {
            *m /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    };
    push(2, &mut m);
    push(3, &mut m);
    let mut p = 5u64;
    while p.saturating_mul(p) <= m {
        push(p, &mut m);
        push(p + 2, &mut m);
        p += 6;
    }
    if m > 1 {
        factors.push((m, 1));
    }
    Factorization { value: n, factors }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// p-adic valuation; `Infinite` is the valuation of zero and compares greater
/// than every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }

    /// Compare against a possibly negative integer bound such as `e/2 - 1`.
    pub fn cmp_int(self, other: i64) -> Ordering {
        match self {
            Valuation::Infinite => Ordering::Greater,
            Valuation::Finite(v) => (v as i64).cmp(&other),
        }
    }

    pub fn ge(self, other: i64) -> bool {
        self.cmp_int(other) != Ordering::Less
    }

    pub fn gt(self, other: i64) -> bool {
        self.cmp_int(other) == Ordering::Greater
    }

    pub fn eq_int(self, other: i64) -> bool {
        self.cmp_int(other) == Ordering::Equal
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
            (Valuation::Infinite, _) => Ordering::Greater,
            (_, Valuation::Infinite) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => f.write_str("inf"),
        }
    }
}

/// Largest `e` with `p^e | x`; `Infinite` for `x == 0`.
pub fn valuation(p: u64, x: i64) -> Valuation {
    debug_assert!(p >= 2);
    if x == 0 {
        return Valuation::Infinite;
    }
    let mut m = x.unsigned_abs();
    let mut e = 0;
    while m.is_multiple_of(p) {
        m /= p;
        e += 1;
    }
    Valuation::Finite(e)
}

/// Valuation of a nonzero value, as a plain integer.
pub fn val(p: u64, x: u64) -> u32 {
    debug_assert!(x != 0);
    let mut m = x;
    let mut e = 0;
    while m.is_multiple_of(p) {
        m /= p;
        e += 1;
    }
    e
}

pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if !f.is_squarefree() {
        0
    } else if f.omega().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .factors()
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Sum of divisors.
pub fn sigma(n: u64) -> u64 {
    factorize(n)
        .factors()
        .iter()
        .map(|&(p, e)| (p.pow(e + 1) - 1) / (p - 1))
        .product()
}

/// Number of divisors.
pub fn sigma0(n: u64) -> u64 {
    factorize(n)
        .factors()
        .iter()
        .map(|&(_, e)| e as u64 + 1)
        .product()
}

/// `(floor(sqrt(n)), n is a perfect square)`.
pub fn integer_sqrt(n: u64) -> (u64, bool) {
    if n < 2 {
        return (n, true);
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    (r, r * r == n)
}

pub fn divisors(n: u64) -> Vec<u64> {
    factorize(n).divisors()
}

pub fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn lcm(a: u64, b: u64) -> u64 {
    num_integer::lcm(a, b)
}

/// Least nonnegative residue of `x` modulo `m`.
pub fn rem(x: i64, m: u64) -> u64 {
    (x as i128).rem_euclid(m as i128) as u64
}

pub fn mod_mul(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mod_mul(acc, base, m);
        }
        base = mod_mul(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if `gcd(a, m) = 1`.
pub fn mod_inv(a: i64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let a = rem(a, m) as i128;
    let (mut old_r, mut r) = (a, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

/// Solve `x ≡ a1 (mod m1)`, `x ≡ a2 (mod m2)`. Returns `(x, lcm)` when the
/// system is consistent.
pub fn crt_pair(a1: u64, m1: u64, a2: u64, m2: u64) -> Option<(u64, u64)> {
    let g = gcd(m1, m2);
    let (a1, a2) = (a1 % m1, a2 % m2);
    if (a1 as i128 - a2 as i128).rem_euclid(g as i128) != 0 {
        return None;
    }
    let l = m1 / g * m2;
    let m1g = m1 / g;
    let m2g = m2 / g;
    // x = a1 + m1 * k with m1 * k ≡ a2 - a1 (mod m2)
    let diff = ((a2 as i128 - a1 as i128) / g as i128).rem_euclid(m2g as i128) as u64;
    let k = match mod_inv(m1g as i64, m2g) {
        Some(inv) => mod_mul(diff, inv, m2g.max(1)),
        None => 0,
    };
    let x = ((a1 as u128 + m1 as u128 * k as u128) % l as u128) as u64;
    Some((x, l))
}

/// `base^exp` as `i128`, panicking on overflow.
pub fn ipow(base: i64, exp: u32) -> i128 {
    (base as i128)
        .checked_pow(exp)
        .expect("integer power overflow")
}
