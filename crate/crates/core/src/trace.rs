//! Direct traces of Hecke operators on twist-minimal spaces.
//!
//! The trace is assembled as `C1 - C2 - C3 + C4`: an identity term, an
//! elliptic term summed over `t² < 4n` with class numbers of imaginary
//! quadratic fields, a hyperbolic term over divisors of `n`, and a weight-2
//! correction. Each term is a product of local factors over `p | N`, given by
//! case tables that are evaluated in the order listed below.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{
    divisors, euler_phi, factorize, gcd, integer_sqrt, mobius, mod_inv, rem, sigma, val, valuation,
};
use crate::characters::{DirichletCharacter, LocalCharacter};
use crate::cyclo::CycloNumber;
use crate::error::{Error, Result};
use crate::quadratic::{class_data, kronecker, root_modulus, split_discriminant, sqrt_mod_prime_power, DiscriminantSplit};

/// Which cusp form space a trace or basis refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    Min,
    New,
    Full,
}

impl std::str::FromStr for SpaceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(SpaceKind::Min),
            "new" => Ok(SpaceKind::New),
            "full" => Ok(SpaceKind::Full),
            _ => Err(Error::InvalidInput(format!("unknown space kind {s:?}"))),
        }
    }
}

impl std::fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpaceKind::Min => "min",
            SpaceKind::New => "new",
            SpaceKind::Full => "full",
        })
    }
}

/// `S_k^{kind}(N, χ)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpaceSpec {
    pub level: u64,
    pub weight: u32,
    pub chi: DirichletCharacter,
    pub kind: SpaceKind,
}

impl SpaceSpec {
    pub fn new(level: u64, weight: u32, chi: DirichletCharacter, kind: SpaceKind) -> Result<Self> {
        if weight < 2 {
            return Err(Error::WeightTooSmall(weight));
        }
        if chi.modulus() != level {
            return Err(Error::InvalidInput(format!(
                "character {chi} does not have modulus {level}"
            )));
        }
        if kind == SpaceKind::Min && !chi.is_twist_minimal() {
            return Err(Error::NotTwistMinimal(chi.label()));
        }
        Ok(SpaceSpec { level, weight, chi, kind })
    }

    /// Same space with a different kind (no minimality check).
    pub fn with_kind(&self, kind: SpaceKind) -> Self {
        SpaceSpec { kind, ..self.clone() }
    }

    /// Whether `χ(-1) = (-1)^k`.
    pub fn parity_ok(&self) -> bool {
        self.chi.parity() == if self.weight.is_multiple_of(2) { 1 } else { -1 }
    }
}

/// Choice of square root `u` in the elliptic local factors. The trace does
/// not depend on it; the option exists so that this can be tested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum RootChoice {
    #[default]
    Smallest,
    Negated,
}

/// `(ρ^{k-1} - ρ̄^{k-1})/(ρ - ρ̄)` for the roots of `x² - tx + n`.
pub fn weight_factor(k: u32, t: i64, n: u64) -> Result<BigInt> {
    if (t as i128) * (t as i128) >= 4 * n as i128 {
        return Err(Error::InvalidInput(format!("t = {t} does not satisfy t² < 4n for n = {n}")));
    }
    if k < 2 {
        return Err(Error::WeightTooSmall(k));
    }
    let (t, n) = (BigInt::from(t), BigInt::from(n));
    let mut prev = BigInt::one();
    if k == 2 {
        return Ok(prev);
    }
    let mut cur = t.clone();
    for _ in 2..=(k - 2) {
        let next = &t * &cur - &n * &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    Ok(cur)
}

/// Data attached to one `t` of the elliptic term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EllipticContext {
    pub t: i64,
    pub n: u64,
    pub split: DiscriminantSplit,
}

impl EllipticContext {
    pub fn new(t: i64, n: u64) -> Result<Self> {
        let disc = t * t - 4 * n as i64;
        Ok(EllipticContext { t, n, split: split_discriminant(disc)? })
    }

    /// `ν_p(t² - 4n)`.
    pub fn gamma(&self, p: u64) -> u32 {
        val(p, self.split.discriminant.unsigned_abs())
    }

    pub fn d(&self) -> i64 {
        self.split.fundamental
    }

    pub fn ell(&self) -> u64 {
        self.split.ell
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `p^j` as a rational, valid for negative `j`.
fn prime_power(p: u64, j: i64) -> BigRational {
    if j >= 0 {
        BigRational::from_integer(BigInt::from(p).pow(j as u32))
    } else {
        BigRational::new(BigInt::one(), BigInt::from(p).pow((-j) as u32))
    }
}

/// `S_p(1, 𝟙, t, n)` for `p | ℓ`, `p ∤ N`.
pub fn local_factor_unit(p: u64, ctx: &EllipticContext) -> BigInt {
    let pv = BigInt::from(p).pow(val(p, ctx.ell()));
    let kd = kronecker(ctx.d(), p as i64) as i64;
    &pv + BigInt::from(1 - kd) * (&pv - 1) / BigInt::from(p - 1)
}

/// Evaluation helper for one local component: values of its primitive
/// inducing character, in a fixed ambient order.
struct LocalEval<'a> {
    prim: LocalCharacter,
    chi: &'a LocalCharacter,
    order: u64,
}

impl LocalEval<'_> {
    fn at(&self, x: i64) -> CycloNumber {
        self.prim.eval_in(x, self.order)
    }

    /// `χ(x/2)`: exact halving for `p = 2` (zero for odd `x`), multiplication
    /// by `2^{-1}` mod `p^e` otherwise.
    fn half(&self, x: i64) -> CycloNumber {
        let p = self.chi.prime();
        if p == 2 {
            if x.rem_euclid(2) == 1 {
                return CycloNumber::zero(self.order);
            }
            self.at(x / 2)
        } else {
            let m = self.chi.modulus();
            let inv2 = mod_inv(2, m).expect("odd modulus");
            let y = (rem(x, m) as u128 * inv2 as u128 % m as u128) as i64;
            self.at(y)
        }
    }

    /// `χ((t+u)/2) + χ((t-u)/2)`, or `None` when `u` does not exist.
    fn pair_sum(&self, ctx: &EllipticContext, root: RootChoice) -> Option<CycloNumber> {
        let p = self.chi.prime();
        let e = self.chi.exponent();
        let m = root_modulus(p, e);
        let r = sqrt_mod_prime_power(ctx.d(), p, e).ok()?;
        let r = match root {
            RootChoice::Smallest => r,
            RootChoice::Negated => (m - r) % m,
        };
        let u = (rem(ctx.ell() as i64, m) as u128 * r as u128 % m as u128) as i64;
        let t = ctx.t;
        Some(&self.half(t + u) + &self.half(t - u))
    }
}

/// `S_p^min(p^e, χ_p, t, n)`.
pub fn local_factor_min(
    chi_p: &LocalCharacter,
    ctx: &EllipticContext,
    order: u64,
    root: RootChoice,
) -> CycloNumber {
    let p = chi_p.prime();
    let e = chi_p.exponent() as i64;
    let s = chi_p.conductor_exponent() as i64;
    let gamma = ctx.gamma(p) as i64;
    let vl = val(p, ctx.ell()) as i64;
    let kd = kronecker(ctx.d(), p as i64) as i64;
    let ev = LocalEval { prim: chi_p.primitive(), chi: chi_p, order };
    let zero = || CycloNumber::zero(order);
    let scalar = |r: BigRational| CycloNumber::from_rational(order, &r);
    let pair = || ev.pair_sum(ctx, root).unwrap_or_else(zero);

    if ctx.n.is_multiple_of(p) {
        return if gamma > 0 && s == 0 {
            scalar(rat(kd - 1, 1))
        } else if s == e && gamma == 0 {
            pair()
        } else {
            zero()
        };
    }

    if p > 2 {
        let pe = |j: i64| prime_power(p, j);
        if s < e && gamma >= e - 2 {
            let n_res = kronecker(ctx.n as i64, p as i64);
            if !(e == 1 || n_res == 1) || kd == 1 {
                return zero();
            }
            let inner = BigRational::from_integer(((e > 2) as i64).into())
                + pe(1)
                    * (rat(if e == 2 { 1 - 2 * s } else { 0 }, 1)
                        + rat((e % 2 == 0 && gamma == e - 2) as i64, 1)
                        - rat((gamma >= e - 1) as i64, 1) * pe(1));
            let coeff = rat(1 - kd, gcd(2, e as u64) as i64) * pe(e - 3) * inner;
            return ev.half(ctx.t).scale_rational(&coeff);
        }
        if s == e && gamma >= 2 * e - 1 {
            let pv = pe(vl);
            let coeff = rat(2, 1) * &pv
                + rat(1 - kd, 1) * (rat(2, 1) * &pv - pe(e) - pe(e - 1)) / rat(p as i64 - 1, 1);
            return ev.half(ctx.t).scale_rational(&coeff);
        }
        if s == e && gamma < 2 * e - 1 && kd == 1 {
            return pair().scale_rational(&pe(vl));
        }
        return zero();
    }

    // p = 2
    let d_sign = if ctx.d() % 2 == 0 { 1 } else { -1 };
    if s < e {
        let pre = rat(1 - kd, 1) * if e >= 3 { prime_power(2, e - 3) } else { rat(1, 1) };
        let body = if gamma > e && e >= 3 {
            ev.half(ctx.t).scale_integer(-3)
        } else if gamma == e && s == e / 2 && e >= 4 {
            ev.half(ctx.t).scale_integer(if e % 2 == 0 { 3 } else { 1 })
        } else if gamma == e - 1 && e % 2 == 1 && s == e / 2 && e >= 4 {
            ev.half(ctx.t).scale_integer(1 - 2 * d_sign)
        } else if (gamma == e || gamma == e - 1) && s < e / 2 && e >= 3 {
            scalar(rat(2 * d_sign - 1, 1))
        } else if e == 1 || e == 2 {
            scalar(rat(if e == 2 && gamma == 0 { 3 } else { 0 }, 2) - rat(1, 1))
        } else {
            zero()
        };
        return body.scale_rational(&pre);
    }
    if gamma >= 2 * e {
        let sign = if gamma == 2 * e { -1 } else { 1 };
        let a = (BigInt::from(2).pow((gamma / 2 + 1) as u32) - BigInt::from(3) * BigInt::from(2).pow((e - 1) as u32))
            * BigInt::from(1 - kd);
        let b = if ctx.d() % 2 != 0 { BigInt::from(2).pow((vl + 1) as u32) } else { BigInt::zero() };
        return ev.half(ctx.t).scale_integer(BigInt::from(sign) * (a + b));
    }
    if gamma < 2 * e - 1 && kd == 1 {
        return pair().scale_integer(BigInt::from(2).pow(vl as u32));
    }
    zero()
}

/// The two vanishing conditions shared by the twist-minimal and newform
/// traces: `gcd((N/cond)², n², N)` not squarefree, or a parity mismatch.
pub fn gates_pass(chi: &DirichletCharacter, weight: u32, n: u64) -> bool {
    let level = chi.modulus();
    let q = level / chi.conductor();
    let g = gcd(gcd((q as u128 * q as u128 % level as u128) as u64, level), {
        let n2 = (n as u128 * n as u128 % level as u128) as u64;
        gcd(n2, level)
    });
    // gcd(q², n², N) = gcd(q² mod N, n² mod N, N)
    let parity_ok = chi.parity() == if weight.is_multiple_of(2) { 1 } else { -1 };
    parity_ok && factorize(g).is_squarefree()
}

/// Local identity-term factor.
fn identity_local(p: u64, e: u32, s: u32) -> BigRational {
    if s == e {
        return BigRational::from_integer((p.pow(e) + p.pow(e - 1)).into());
    }
    let ceil_pe2 = if e >= 2 { p.pow(e - 2) } else { 1 };
    let halve = e.is_multiple_of(2) && p > 2;
    let base = rat((euler_phi(ceil_pe2) * (p - 1)) as i64, if halve { 2 } else { 1 });
    let bracket = 1 + if e > 1 { p as i64 } else { 0 } + if e == 2 { 2 * s as i64 - 2 } else { 0 };
    base * rat(bracket, 1)
}

fn identity_term(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> CycloNumber {
    let (r, square) = integer_sqrt(n);
    if !square {
        return CycloNumber::zero(order);
    }
    let value = chi.primitive_inducing().eval_in(r as i64, order);
    if value.is_zero() {
        return value;
    }
    let mut coeff = rat(k as i64 - 1, 12) * BigRational::from_integer(BigInt::from(r).pow(k - 2));
    for l in chi.locals() {
        coeff *= identity_local(l.prime(), l.exponent(), l.conductor_exponent());
    }
    value.scale_rational(&coeff)
}

fn elliptic_term(chi: &DirichletCharacter, k: u32, n: u64, order: u64, root: RootChoice) -> Result<CycloNumber> {
    let level = chi.modulus();
    let mut total = CycloNumber::zero(order);
    let bound = integer_sqrt(4 * n).0 as i64;
    for t in -bound..=bound {
        if t * t >= 4 * n as i64 {
            continue;
        }
        let ctx = EllipticContext::new(t, n)?;
        let mut local = CycloNumber::one(order);
        for l in chi.locals() {
            local = &local * &local_factor_min(l, &ctx, order, root);
            if local.is_zero() {
                break;
            }
        }
        if local.is_zero() {
            continue;
        }
        let mut coeff = BigRational::from_integer(weight_factor(k, t, n)?) * class_data(ctx.d())?.ratio();
        for p in factorize(ctx.ell()).primes() {
            if !level.is_multiple_of(p) {
                coeff *= BigRational::from_integer(local_factor_unit(p, &ctx));
            }
        }
        total += &local.scale_rational(&coeff);
    }
    Ok(total)
}

fn hyperbolic_local(l: &LocalCharacter, n: u64, d: u64, order: u64) -> CycloNumber {
    let p = l.prime();
    let e = l.exponent();
    let s = l.conductor_exponent();
    let prim = l.primitive();
    let pair = || &prim.eval_in(d as i64, order) + &prim.eval_in((n / d) as i64, order);
    let gamma = valuation(p, (n / d) as i64 - d as i64);
    if p == 2 && e.is_multiple_of(2) && e > 2 && n % 2 == 1 && e / 2 > s && gamma.ge(e as i64 / 2 - 1) {
        let sign = if gamma.eq_int(e as i64 / 2 - 1) { -1 } else { 1 };
        let coeff = rat(sign * (1i64 << (e / 2)), 8);
        return pair().scale_rational(&coeff);
    }
    if s == e {
        return pair();
    }
    CycloNumber::zero(order)
}

fn hyperbolic_term(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> CycloNumber {
    let mut total = CycloNumber::zero(order);
    for d in divisors(n) {
        if d * d > n {
            break;
        }
        let mut local = CycloNumber::one(order);
        for l in chi.locals() {
            local = &local * &hyperbolic_local(l, n, d, order);
        }
        let mut coeff = BigRational::from_integer(BigInt::from(d).pow(k - 1));
        if d * d == n {
            coeff /= rat(2, 1);
        }
        total += &local.scale_rational(&coeff);
    }
    total
}

fn correction_term(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> CycloNumber {
    if k != 2 || !chi.is_trivial() {
        return CycloNumber::zero(order);
    }
    let level = chi.modulus();
    let prod: u64 = factorize(n)
        .factors()
        .iter()
        .filter(|&&(p, _)| !level.is_multiple_of(p))
        .map(|&(p, a)| sigma(p.pow(a)))
        .product();
    CycloNumber::from_integer(order, mobius(level) * prod as i64)
}

/// Individual terms `C1, C2, C3, C4` (trace = C1 − C2 − C3 + C4), without
/// the vanishing gates.
pub fn trace_terms(
    chi: &DirichletCharacter,
    k: u32,
    n: u64,
    order: u64,
    root: RootChoice,
) -> Result<[CycloNumber; 4]> {
    Ok([
        identity_term(chi, k, n, order),
        elliptic_term(chi, k, n, order, root)?,
        hyperbolic_term(chi, k, n, order),
        correction_term(chi, k, n, order),
    ])
}

/// `Tr T_n` on `S_k^min(N, χ)` in `Q(ζ_order)`; `order(χ)` must divide
/// `order`.
pub fn trace_min_in(spec: &SpaceSpec, n: u64, order: u64, root: RootChoice) -> Result<CycloNumber> {
    if n == 0 {
        return Err(Error::InvalidInput("Hecke index must be positive".into()));
    }
    if !spec.chi.is_twist_minimal() {
        return Err(Error::NotTwistMinimal(spec.chi.label()));
    }
    if spec.weight < 2 {
        return Err(Error::WeightTooSmall(spec.weight));
    }
    if !order.is_multiple_of(spec.chi.order()) {
        return Err(Error::OrderMismatch(spec.chi.order(), order));
    }
    if !gates_pass(&spec.chi, spec.weight, n) {
        return Ok(CycloNumber::zero(order));
    }
    let [c1, c2, c3, c4] = trace_terms(&spec.chi, spec.weight, n, order, root)?;
    Ok(&(&(&c1 - &c2) - &c3) + &c4)
}

/// `Tr T_n` on `S_k^min(N, χ)` in `Q(ζ_{order(χ)})`.
pub fn trace_min(spec: &SpaceSpec, n: u64) -> Result<CycloNumber> {
    trace_min_in(spec, n, spec.chi.order(), RootChoice::Smallest)
}

/// `dim S_k^min(N, χ)`.
pub fn dimension_min(spec: &SpaceSpec) -> Result<u64> {
    let t = trace_min(spec, 1)?;
    as_dimension(&t)
}

/// Interpret a trace of `T_1` as a dimension.
pub fn as_dimension(t: &CycloNumber) -> Result<u64> {
    use num_traits::ToPrimitive;
    t.to_rational()
        .filter(|r| r.is_integer())
        .and_then(|r| r.to_integer().to_u64())
        .ok_or_else(|| Error::Internal(format!("Tr T_1 = {t} is not a nonnegative integer")))
}
