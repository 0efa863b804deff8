//! Independent trace computation: the classical full-space trace formula,
//! the newform sieve, and the inversion to twist-minimal spaces.
//!
//! This path exists to check [`crate::trace`]. It favours brute force over
//! cleverness: congruence sums are evaluated by enumerating residues.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::arith::{crt_pair, divisors, euler_phi, factorize, gcd, integer_sqrt, lcm, rem};
use crate::characters::DirichletCharacter;
use crate::cyclo::CycloNumber;
use crate::decomp::{all_twist_pairs, ambient_order, beta, kprime_count, p_set, Exclusion};
use crate::error::{Error, Result};
use crate::quadratic::{class_data, kronecker, split_discriminant};
use crate::trace::{gates_pass, weight_factor};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn parity_ok(chi: &DirichletCharacter, k: u32) -> bool {
    chi.parity() == if k.is_multiple_of(2) { 1 } else { -1 }
}

/// `N ∏_{p | N} (1 + 1/p)`, the index of `Γ0(N)` in `SL2(Z)`.
pub fn psi_index(level: u64) -> u64 {
    factorize(level)
        .factors()
        .iter()
        .map(|&(p, e)| p.pow(e) + p.pow(e - 1))
        .product()
}

/// `h(D)/w(D)` for the order of discriminant `D = d·c²`.
pub fn order_class_ratio(disc: i64) -> Result<BigRational> {
    let split = split_discriminant(disc)?;
    let base = class_data(split.fundamental)?.ratio();
    let c = split.ell;
    let mut r = base * rat(c as i64, 1);
    for p in factorize(c).primes() {
        let kd = kronecker(split.fundamental, p as i64) as i64;
        r *= rat(p as i64 - kd, p as i64);
    }
    Ok(r)
}

/// `Σ χ(x)` over `x mod N` with `x² - tx + n ≡ 0 (mod N·g)`, by enumeration.
pub fn congruence_sum(chi: &DirichletCharacter, t: i64, n: u64, g: u64, order: u64) -> CycloNumber {
    let level = chi.modulus();
    let m = (level * g) as i128;
    let mut counts = vec![0i64; order as usize];
    for x in 0..level as i64 {
        let x128 = x as i128;
        if (x128 * x128 - t as i128 * x128 + n as i128).rem_euclid(m) != 0 {
            continue;
        }
        if let Some((num, den)) = chi.value_fraction(x) {
            counts[(num * order / den) as usize] += 1;
        }
    }
    CycloNumber::from_exponent_counts(order, &counts)
}

/// The same sum assembled as a product of prime-power sums.
pub fn congruence_sum_local(chi: &DirichletCharacter, t: i64, n: u64, g: u64, order: u64) -> CycloNumber {
    let mut total = CycloNumber::one(order);
    for l in chi.locals() {
        let p = l.prime();
        let pa = l.modulus();
        let m = (pa * p.pow(crate::arith::val(p, g))) as i128;
        let mut counts = vec![0i64; order as usize];
        for x in 0..pa as i64 {
            let x128 = x as i128;
            if (x128 * x128 - t as i128 * x128 + n as i128).rem_euclid(m) != 0 {
                continue;
            }
            if let Some((num, den)) = l.value_fraction(x) {
                counts[(num * order / den) as usize] += 1;
            }
        }
        total = &total * &CycloNumber::from_exponent_counts(order, &counts);
        if total.is_zero() {
            break;
        }
    }
    total
}

fn full_identity(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> CycloNumber {
    let (r, square) = integer_sqrt(n);
    if !square {
        return CycloNumber::zero(order);
    }
    let coeff = rat(k as i64 - 1, 12)
        * BigRational::from_integer(BigInt::from(r).pow(k - 2))
        * rat(psi_index(chi.modulus()) as i64, 1);
    chi.eval_in(r as i64, order).scale_rational(&coeff)
}

fn full_elliptic(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> Result<CycloNumber> {
    let level = chi.modulus();
    let mut total = CycloNumber::zero(order);
    let bound = integer_sqrt(4 * n).0 as i64;
    for t in -bound..=bound {
        let disc = t * t - 4 * n as i64;
        if disc >= 0 {
            continue;
        }
        let split = split_discriminant(disc)?;
        let g_factor = BigRational::from_integer(weight_factor(k, t, n)?);
        for f in divisors(split.ell) {
            let nf = gcd(level, f);
            let sum = congruence_sum(chi, t, n, nf, order);
            if sum.is_zero() {
                continue;
            }
            let mut coeff = order_class_ratio(disc / (f * f) as i64)? * rat(nf as i64, 1);
            for p in factorize(level).primes() {
                if !(level / nf).is_multiple_of(p) {
                    coeff *= rat(p as i64 + 1, p as i64);
                }
            }
            total += &sum.scale_rational(&(coeff * &g_factor));
        }
    }
    Ok(total)
}

fn full_hyperbolic(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> CycloNumber {
    let level = chi.modulus();
    let cofactor = level / chi.conductor();
    let mut total = CycloNumber::zero(order);
    for d in divisors(n) {
        if d * d > n {
            break;
        }
        let e = n / d;
        let mut inner = CycloNumber::zero(order);
        for c in divisors(level) {
            let g = gcd(c, level / c);
            let diff = (e as i64 - d as i64).unsigned_abs();
            if !gcd(cofactor, diff).is_multiple_of(g) {
                continue;
            }
            let Some((x1, _)) = crt_pair(d % c, c, e % (level / c), level / c) else {
                continue;
            };
            let value = chi.eval_in(x1 as i64, order);
            inner += &value.scale_integer(euler_phi(g));
        }
        let mut coeff = BigRational::from_integer(BigInt::from(d).pow(k - 1));
        if d * d == n {
            coeff /= rat(2, 1);
        }
        total += &inner.scale_rational(&coeff);
    }
    total
}

fn full_correction(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> CycloNumber {
    if k != 2 || !chi.is_trivial() {
        return CycloNumber::zero(order);
    }
    let level = chi.modulus();
    let s: u64 = divisors(n).into_iter().filter(|&t| gcd(n / t, level) == 1).sum();
    CycloNumber::from_integer(order, s)
}

type MemoKey = (u64, u64, u32, u64);

fn full_memo() -> &'static RwLock<HashMap<MemoKey, CycloNumber>> {
    static M: OnceLock<RwLock<HashMap<MemoKey, CycloNumber>>> = OnceLock::new();
    M.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `Tr T_n` on the full space `S_k(N, χ)`, in `Q(ζ_order)`.
pub fn trace_full(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> Result<CycloNumber> {
    if k < 2 {
        return Err(Error::WeightTooSmall(k));
    }
    if n == 0 {
        return Err(Error::InvalidInput("Hecke index must be positive".into()));
    }
    if !parity_ok(chi, k) {
        return Ok(CycloNumber::zero(order));
    }
    let key = (chi.modulus(), chi.conrey_index(), k, n);
    let cached = full_memo().read().unwrap().get(&key).cloned();
    let base = match cached {
        Some(v) => v,
        None => {
            let o = chi.order();
            let a1 = full_identity(chi, k, n, o);
            let a2 = full_elliptic(chi, k, n, o)?;
            let a3 = full_hyperbolic(chi, k, n, o);
            let a4 = full_correction(chi, k, n, o);
            let v = &(&(&a1 - &a2) - &a3) + &a4;
            full_memo().write().unwrap().insert(key, v.clone());
            v
        }
    };
    base.embed_into(order)
}

/// `Tr T_n` on `S_k^new(N, χ)` by sieving full-space traces.
pub fn trace_new(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> Result<CycloNumber> {
    if k < 2 {
        return Err(Error::WeightTooSmall(k));
    }
    if !gates_pass(chi, k, n) {
        return Ok(CycloNumber::zero(order));
    }
    let level = chi.modulus();
    let cond = chi.conductor();
    let prim = chi.primitive_inducing();
    let mut total = CycloNumber::zero(order);
    for d in p_set(chi, n) {
        let weight = prim.eval_in(d as i64, order).scale_integer(BigInt::from(d).pow(k - 1));
        if weight.is_zero() {
            continue;
        }
        let m_index = n / (d * d);
        let mut inner = CycloNumber::zero(order);
        for m in divisors(level / d) {
            if m % cond != 0 {
                continue;
            }
            let b = beta(m_index, level / (d * m));
            if b == 0 {
                continue;
            }
            let chi_m = chi.change_modulus(m)?;
            inner += &trace_full(&chi_m, k, m_index, order)?.scale_integer(b);
        }
        total += &(&weight * &inner);
    }
    Ok(total)
}

/// `Tr T_n` on `S_k^min(N, χ)` by inverting the twist decomposition of
/// newform spaces. Works in `Q(ζ_m)` with `m` a multiple of `order` that
/// accommodates every twisting character; the result is returned there.
pub fn trace_min_sieved_with(
    chi: &DirichletCharacter,
    k: u32,
    n: u64,
    order: u64,
    rule: Exclusion,
) -> Result<CycloNumber> {
    let pairs = all_twist_pairs(chi, rule)?;
    let work = lcm(order, ambient_order(chi, &pairs));
    let level = chi.modulus();
    let mut total = CycloNumber::zero(work);
    for pair in &pairs {
        let psi_n = pair.psi.eval_in(rem(n as i64, pair.psi.modulus()) as i64, work);
        if psi_n.is_zero() {
            continue;
        }
        let new = trace_new(&pair.twisted, k, n, work)?;
        if new.is_zero() {
            continue;
        }
        let sign = if kprime_count(level / pair.level).is_multiple_of(2) { 1 } else { -1 };
        let coeff = rat(sign, pair.class_size as i64);
        total += &(&psi_n.conjugate() * &new).scale_rational(&coeff);
    }
    Ok(total)
}

/// [`trace_min_sieved_with`] under the default exclusion rule, returned in
/// `Q(ζ_order)` when the value lies there.
pub fn trace_min_sieved(chi: &DirichletCharacter, k: u32, n: u64, order: u64) -> Result<CycloNumber> {
    let v = trace_min_sieved_with(chi, k, n, order, Exclusion::default())?;
    v.descend(order).ok_or_else(|| {
        Error::Internal(format!("sieved trace {v} for {chi} does not lie in Q(ζ_{order})"))
    })
}
