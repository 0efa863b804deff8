//! Dirichlet characters in Conrey labelling.
//!
//! A character mod `N` is stored as one [`LocalCharacter`] per prime power
//! `p^e ‖ N`. Each local component is described by exponents on fixed
//! generators of `(Z/p^eZ)^*`:
//!
//! * odd `p`: the least `g` that is a primitive root mod `p` and mod `p^2`
//!   (hence mod every `p^e`), as in the Conrey convention;
//! * `p = 2`, `e >= 3`: the pair `(-1, 5)`;
//! * `p = 2`, `e = 2`: the generator `-1`; `e = 1` is trivial.
//!
//! The Conrey character `χ_N(q, ·)` has the same exponents as `q`, and its
//! value at `x` pairs the discrete logs of `q` and `x`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use crate::arith::{crt_pair, euler_phi, factorize, gcd, lcm, mod_pow, rem, val};
use crate::cyclo::CycloNumber;
use crate::error::{Error, Result};

const NO_LOG: u32 = u32::MAX;

/// Discrete logarithms for every residue mod `p^e`.
#[derive(Debug)]
struct LogTable {
    generator: u64,
    logs: Vec<[u32; 2]>,
}

fn log_tables() -> &'static RwLock<HashMap<(u64, u32), Arc<LogTable>>> {
    static T: OnceLock<RwLock<HashMap<(u64, u32), Arc<LogTable>>>> = OnceLock::new();
    T.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Least primitive root mod `p` which stays primitive mod `p^2`.
pub fn conrey_generator(p: u64) -> u64 {
    assert!(p > 2);
    let phi = p - 1;
    let prime_divs: Vec<u64> = factorize(phi).primes().collect();
    let p2 = p * p;
    (2..p)
        .find(|&g| {
            prime_divs.iter().all(|&q| mod_pow(g, phi / q, p) != 1)
                && mod_pow(g, p - 1, p2) != 1
        })
        .expect("primitive root exists")
}

fn log_table(p: u64, e: u32) -> Arc<LogTable> {
    if let Some(t) = log_tables().read().unwrap().get(&(p, e)) {
        return Arc::clone(t);
    }
    let modulus = p.pow(e);
    let mut logs = vec![[NO_LOG; 2]; modulus as usize];
    let generator;
    if p == 2 {
        generator = 5;
        match e {
            1 => logs[1 % modulus as usize] = [0, 0],
            2 => {
                logs[1] = [0, 0];
                logs[3] = [1, 0];
            }
            _ => {
                let half = 1u64 << (e - 2);
                let mut x = 1u64;
                for b in 0..half {
                    logs[x as usize] = [0, b as u32];
                    logs[(modulus - x) as usize] = [1, b as u32];
                    x = x * 5 % modulus;
                }
            }
        }
    } else {
        generator = conrey_generator(p);
        let phi = euler_phi(modulus);
        let mut x = 1u64;
        for i in 0..phi {
            logs[x as usize] = [i as u32, 0];
            x = x * generator % modulus;
        }
    }
    let built = Arc::new(LogTable { generator, logs });
    let mut w = log_tables().write().unwrap();
    Arc::clone(w.entry((p, e)).or_insert(built))
}

/// The component of a character at one prime power `p^e`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalCharacter {
    prime: u64,
    exponent: u32,
    /// Odd `p`: `[c, 0]`; `p = 2`: `[a, b]` on the generators `(-1, 5)`.
    logs: [u64; 2],
}

impl LocalCharacter {
    /// The trivial character mod `p^e`.
    pub fn trivial(prime: u64, exponent: u32) -> Self {
        LocalCharacter { prime, exponent, logs: [0, 0] }
    }

    /// The local Conrey character mod `p^e` with index `q` (reduced mod `p^e`).
    pub fn from_index(prime: u64, exponent: u32, q: i64) -> Result<Self> {
        let modulus = prime.pow(exponent);
        let r = rem(q, modulus);
        if gcd(r, modulus) != 1 && modulus > 1 {
            return Err(Error::NotCoprime { value: q, modulus });
        }
        let t = log_table(prime, exponent);
        let [a, b] = t.logs[r as usize];
        debug_assert_ne!(a, NO_LOG);
        Ok(LocalCharacter { prime, exponent, logs: [a as u64, b as u64] })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.exponent)
    }

    /// Order of the cyclic group of values in which the exponents live:
    /// values are `ζ_m^{...}` with `m` this number.
    fn value_modulus(&self) -> u64 {
        if self.prime == 2 {
            match self.exponent {
                0 | 1 => 1,
                2 => 2,
                e => 1 << (e - 2),
            }
        } else {
            euler_phi(self.modulus())
        }
    }

    /// Exponents normalized into their ranges.
    fn normalized(mut self) -> Self {
        if self.prime == 2 {
            self.logs[0] %= if self.exponent >= 2 { 2 } else { 1 };
            self.logs[1] %= if self.exponent >= 3 { 1 << (self.exponent - 2) } else { 1 };
        } else {
            self.logs[0] %= self.value_modulus();
            self.logs[1] = 0;
        }
        self
    }

    /// Conrey index mod `p^e`.
    pub fn index(&self) -> u64 {
        let m = self.modulus();
        if m == 1 {
            return 1;
        }
        if self.prime == 2 {
            let five = mod_pow(5, self.logs[1], m);
            if self.logs[0] == 1 { (m - five) % m } else { five % m }
        } else {
            mod_pow(log_table(self.prime, self.exponent).generator, self.logs[0], m)
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.logs == [0, 0]
    }

    pub fn order(&self) -> u64 {
        if self.prime == 2 {
            let a_ord = if self.logs[0] % 2 == 1 { 2 } else { 1 };
            let vm = if self.exponent >= 3 { 1u64 << (self.exponent - 2) } else { 1 };
            let b_ord = vm / gcd(self.logs[1], vm);
            lcm(a_ord, b_ord)
        } else {
            let vm = self.value_modulus();
            vm / gcd(self.logs[0], vm)
        }
    }

    /// Exponent `s` with conductor `p^s`.
    pub fn conductor_exponent(&self) -> u32 {
        if self.is_trivial() {
            return 0;
        }
        if self.prime == 2 {
            let vm = if self.exponent >= 3 { 1u64 << (self.exponent - 2) } else { 1 };
            let b_ord = vm / gcd(self.logs[1], vm);
            if b_ord > 1 {
                b_ord.trailing_zeros() + 2
            } else {
                2
            }
        } else {
            1 + val(self.prime, self.order())
        }
    }

    pub fn conductor(&self) -> u64 {
        self.prime.pow(self.conductor_exponent())
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor_exponent() == self.exponent
    }

    /// The same character viewed mod `p^f`; requires `f >= s`.
    pub fn change_exponent(&self, f: u32) -> Result<Self> {
        let s = self.conductor_exponent();
        if f < s {
            return Err(Error::InvalidInput(format!(
                "conductor {}^{s} does not divide {}^{f}",
                self.prime, self.prime
            )));
        }
        let mut out = LocalCharacter::trivial(self.prime, f);
        if self.is_trivial() {
            return Ok(out);
        }
        if self.prime == 2 {
            out.logs[0] = self.logs[0];
            // b lives in Z/2^{e-2}; rescale to Z/2^{f-2}
            if self.exponent >= 3 && f >= 3 {
                let (e, f) = (self.exponent as i32, f as i32);
                out.logs[1] = if f >= e {
                    self.logs[1] << (f - e)
                } else {
                    self.logs[1] >> (e - f)
                };
            }
        } else {
            let (e, f) = (self.exponent as i32, f as i32);
            let p = self.prime;
            out.logs[0] = if f >= e {
                self.logs[0] * p.pow((f - e) as u32)
            } else {
                self.logs[0] / p.pow((e - f) as u32)
            };
        }
        Ok(out.normalized())
    }

    /// The primitive character inducing this one, mod `p^s`.
    pub fn primitive(&self) -> LocalCharacter {
        self.change_exponent(self.conductor_exponent()).expect("conductor exponent is valid")
    }

    /// `(numerator, denominator)` with `χ_p(x) = exp(2πi·num/den)`, or `None`
    /// when `p | x` and the modulus is nontrivial.
    pub fn value_fraction(&self, x: i64) -> Option<(u64, u64)> {
        let m = self.modulus();
        let r = rem(x, m);
        if m > 1 && r.is_multiple_of(self.prime) {
            return None;
        }
        let vm = self.value_modulus();
        if m == 1 || self.is_trivial() {
            return Some((0, vm.max(1)));
        }
        let t = log_table(self.prime, self.exponent);
        let [xa, xb] = t.logs[r as usize];
        let (xa, xb) = (xa as u64, xb as u64);
        let num = if self.prime == 2 {
            if self.exponent == 2 {
                self.logs[0] * xa % 2
            } else {
                let half = vm / 2;
                (self.logs[0] * xa * half + self.logs[1] * xb) % vm
            }
        } else {
            (self.logs[0] as u128 * xa as u128 % vm as u128) as u64
        };
        Some((num, vm))
    }

    /// Value as an element of `Q(ζ_{order})`.
    pub fn eval(&self, x: i64) -> CycloNumber {
        self.eval_in(x, self.order())
    }

    /// Value in `Q(ζ_m)`; requires `order | m`.
    pub fn eval_in(&self, x: i64, m: u64) -> CycloNumber {
        match self.value_fraction(x) {
            None => CycloNumber::zero(m),
            Some((num, den)) => {
                let scaled = num as u128 * m as u128;
                assert!(scaled.is_multiple_of(den as u128), "order {} does not divide {m}", self.order());
                CycloNumber::root_of_unity(m, (scaled / den as u128) as i64)
            }
        }
    }

    /// The value of the primitive inducing character at `x`; a trivial
    /// component gives 1 everywhere.
    pub fn eval_primitive_in(&self, x: i64, m: u64) -> CycloNumber {
        self.primitive().eval_in(x, m)
    }

    fn combine(&self, other: &Self, sign: i64) -> Self {
        assert_eq!((self.prime, self.exponent), (other.prime, other.exponent));
        let vm = self.value_modulus().max(2) as i64 * 2;
        let a = (self.logs[0] as i64 + sign * other.logs[0] as i64).rem_euclid(vm) as u64;
        let b = (self.logs[1] as i64 + sign * other.logs[1] as i64).rem_euclid(vm) as u64;
        LocalCharacter { prime: self.prime, exponent: self.exponent, logs: [a, b] }.normalized()
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, 1)
    }

    pub fn conj(&self) -> Self {
        LocalCharacter::trivial(self.prime, self.exponent).combine(self, -1)
    }

    pub fn pow(&self, k: i64) -> Self {
        let vm = (self.value_modulus().max(2) * 2) as i64;
        let k = k.rem_euclid(vm) as u64;
        LocalCharacter {
            prime: self.prime,
            exponent: self.exponent,
            logs: [self.logs[0] * k, self.logs[1] * k],
        }
        .normalized()
    }

    /// Parity `χ_p(-1)` as `±1`.
    pub fn parity(&self) -> i64 {
        match self.value_fraction(-1) {
            Some((0, _)) => 1,
            Some(_) => -1,
            None => unreachable!("-1 is a unit"),
        }
    }

    /// Local twist-minimality: at least one of the six admissible shapes.
    pub fn is_twist_minimal(&self) -> bool {
        let (p, e) = (self.prime, self.exponent);
        let s = self.conductor_exponent();
        if e == 0 || s == e {
            return true;
        }
        if p > 2 {
            self.is_trivial() || self.order() == 1 << val(2, p - 1)
        } else {
            s == e / 2 || (s == 2 && e > 3 && e % 2 == 1) || (self.is_trivial() && (e % 2 == 1 || e == 2))
        }
    }
}

/// A Dirichlet character modulo `N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DirichletCharacter {
    modulus: u64,
    index: u64,
    locals: Vec<LocalCharacter>,
}

impl DirichletCharacter {
    /// The trivial character mod `modulus`.
    pub fn trivial(modulus: u64) -> Self {
        Self::from_conrey(modulus, 1).expect("1 is a unit")
    }

    /// The Conrey character `χ_N(q, ·)`.
    pub fn from_conrey(modulus: u64, q: i64) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidInput("modulus must be positive".into()));
        }
        let r = rem(q, modulus);
        if gcd(r, modulus) != 1 {
            return Err(Error::NotCoprime { value: q, modulus });
        }
        let locals = factorize(modulus)
            .factors()
            .iter()
            .map(|&(p, e)| LocalCharacter::from_index(p, e, q))
            .collect::<Result<Vec<_>>>()?;
        Ok(DirichletCharacter { modulus, index: if modulus == 1 { 1 } else { r }, locals })
    }

    /// Assemble from local components; primes must be distinct.
    pub fn from_locals(mut locals: Vec<LocalCharacter>) -> Self {
        locals.retain(|l| l.exponent > 0);
        locals.sort_by_key(|l| l.prime);
        let mut modulus = 1u64;
        let mut index = 0u64;
        let mut acc_mod = 1u64;
        for l in &locals {
            let m = l.modulus();
            let (x, new_mod) = crt_pair(index, acc_mod, l.index(), m).expect("coprime moduli");
            index = x;
            acc_mod = new_mod;
            modulus *= m;
        }
        if modulus == 1 {
            index = 1;
        }
        DirichletCharacter { modulus, index, locals }
    }

    /// Parse a label `"N.q"`.
    pub fn from_label(label: &str) -> Result<Self> {
        label.parse()
    }

    pub fn label(&self) -> String {
        format!("{}.{}", self.modulus, self.index)
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn conrey_index(&self) -> u64 {
        self.index
    }

    pub fn locals(&self) -> &[LocalCharacter] {
        &self.locals
    }

    /// Component at `p`; a trivial mod-1 component if `p ∤ N`.
    pub fn local_component(&self, p: u64) -> LocalCharacter {
        self.locals
            .iter()
            .find(|l| l.prime == p)
            .cloned()
            .unwrap_or_else(|| LocalCharacter::trivial(p, 0))
    }

    pub fn is_trivial(&self) -> bool {
        self.locals.iter().all(LocalCharacter::is_trivial)
    }

    pub fn order(&self) -> u64 {
        self.locals.iter().fold(1, |acc, l| lcm(acc, l.order()))
    }

    pub fn conductor(&self) -> u64 {
        self.locals.iter().map(LocalCharacter::conductor).product()
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }

    /// `χ(-1)` as `±1`.
    pub fn parity(&self) -> i64 {
        self.locals.iter().map(LocalCharacter::parity).product()
    }

    /// True when all values are real (order at most 2).
    pub fn is_real(&self) -> bool {
        self.order() <= 2
    }

    /// `(numerator, denominator)` with `χ(x) = exp(2πi·num/den)`, or `None`
    /// when `gcd(x, N) > 1`.
    pub fn value_fraction(&self, x: i64) -> Option<(u64, u64)> {
        let mut den = 1u64;
        let mut parts = Vec::with_capacity(self.locals.len());
        for l in &self.locals {
            let (n, d) = l.value_fraction(x)?;
            den = lcm(den, d);
            parts.push((n, d));
        }
        let num = parts
            .iter()
            .fold(0u64, |acc, &(n, d)| (acc + n * (den / d)) % den);
        Some((num, den))
    }

    /// `χ(x)` in `Q(ζ_{order})`.
    pub fn eval(&self, x: i64) -> CycloNumber {
        self.eval_in(x, self.order())
    }

    /// `χ(x)` in `Q(ζ_m)`; requires `order(χ) | m`.
    pub fn eval_in(&self, x: i64, m: u64) -> CycloNumber {
        match self.value_fraction(x) {
            None => CycloNumber::zero(m),
            Some((num, den)) => {
                let scaled = num as u128 * m as u128;
                assert!(scaled.is_multiple_of(den as u128), "order {} does not divide {m}", self.order());
                CycloNumber::root_of_unity(m, (scaled / den as u128) as i64)
            }
        }
    }

    /// `χ(a^{-1})` where the inverse is taken mod `N`.
    pub fn eval_inv_in(&self, a: i64, m: u64) -> Result<CycloNumber> {
        let inv = crate::arith::mod_inv(a, self.modulus).ok_or(Error::NotCoprime {
            value: a,
            modulus: self.modulus,
        })?;
        Ok(self.eval_in(inv as i64, m))
    }

    /// Product of two characters of equal modulus.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.modulus, other.modulus, "extend characters to a common modulus first");
        let locals = self.locals.iter().zip(&other.locals).map(|(a, b)| a.mul(b)).collect();
        Self::from_locals(locals)
    }

    pub fn conj(&self) -> Self {
        Self::from_locals(self.locals.iter().map(LocalCharacter::conj).collect())
    }

    pub fn pow(&self, k: i64) -> Self {
        Self::from_locals(self.locals.iter().map(|l| l.pow(k)).collect())
    }

    /// The primitive character mod `cond(χ)` inducing `χ`.
    pub fn primitive_inducing(&self) -> Self {
        Self::from_locals(self.locals.iter().map(LocalCharacter::primitive).collect())
    }

    /// The character induced (or restricted) to modulus `m`; requires
    /// `cond(χ) | m`.
    pub fn change_modulus(&self, m: u64) -> Result<Self> {
        if m == 0 || !m.is_multiple_of(self.conductor()) {
            return Err(Error::InvalidInput(format!(
                "conductor {} does not divide {m}",
                self.conductor()
            )));
        }
        let locals = factorize(m)
            .factors()
            .iter()
            .map(|&(p, f)| self.local_component(p).change_exponent(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_locals(locals))
    }

    /// Twist-minimality of every local component.
    pub fn is_twist_minimal(&self) -> bool {
        self.locals.iter().all(LocalCharacter::is_twist_minimal)
    }
}

impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.modulus, self.index)
    }
}

impl FromStr for DirichletCharacter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (n, q) = s
            .split_once('.')
            .ok_or_else(|| Error::InvalidInput(format!("character label {s:?} is not N.q")))?;
        let n: u64 = n
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad modulus in {s:?}")))?;
        let q: i64 = q
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad index in {s:?}")))?;
        Self::from_conrey(n, q)
    }
}

/// Optional constraints for [`enumerate_characters`].
#[derive(Clone, Copy, Debug, Default)]
pub struct CharacterFilter {
    pub conductor: Option<u64>,
    pub order: Option<u64>,
    pub parity: Option<i64>,
}

/// All characters mod `N` passing `filter`, by increasing Conrey index.
pub fn enumerate_characters(modulus: u64, filter: CharacterFilter) -> Vec<DirichletCharacter> {
    (1..=modulus.max(1))
        .filter(|&q| gcd(q, modulus) == 1)
        .map(|q| DirichletCharacter::from_conrey(modulus, q as i64).expect("unit index"))
        .filter(|c| filter.conductor.is_none_or(|f| c.conductor() == f))
        .filter(|c| filter.order.is_none_or(|o| c.order() == o))
        .filter(|c| filter.parity.is_none_or(|s| c.parity() == s))
        .collect()
}

/// All characters mod `N` (no filter).
pub fn all_characters(modulus: u64) -> Vec<DirichletCharacter> {
    enumerate_characters(modulus, CharacterFilter::default())
}

/// The quadratic character `(·/p)` mod an odd prime `p`.
pub fn legendre_character(p: u64) -> DirichletCharacter {
    assert!(p > 2);
    let local = LocalCharacter { prime: p, exponent: 1, logs: [(p - 1) / 2, 0] };
    DirichletCharacter::from_locals(vec![local])
}
