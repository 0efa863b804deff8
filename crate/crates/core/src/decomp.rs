//! Twist pairs, their equivalence classes, and the small multiplicative
//! helpers used by the newform and twist-minimal sieves.
//!
//! A twist pair `⟨M, ψ⟩` for `(N, χ)` names a twist-minimal space
//! `S^min(M, χψ²)` whose twists by `ψ̄` land in `S^new(N, χ)`. Pairs are
//! built prime by prime and assembled by Cartesian product.

use crate::arith::{factorize, lcm};
use crate::characters::{all_characters, legendre_character, DirichletCharacter, LocalCharacter};
use crate::error::{Error, Result};

/// Which local character the second construction excludes.
///
/// `Conjugate` drops `ψ_p = conj(χ_p)`; `AsPrinted` drops `ψ_p = χ_p`. The
/// two differ only when `χ_p` has conductor `p` and order above 2 at
/// `p^2 ‖ N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Exclusion {
    #[default]
    Conjugate,
    AsPrinted,
}

/// How a pair was formed at one prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalShape {
    /// Full exponent, trivial twist.
    Untwisted,
    /// Half exponent, primitive twist of conductor `p^{e/2}`.
    Half,
    /// Exponent zero, twist by the Legendre symbol.
    Legendre,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct LocalPair {
    prime: u64,
    level_exponent: u32,
    /// Primitive local twist (modulus = its conductor).
    psi: LocalCharacter,
    shape: LocalShape,
}

/// A twist pair with the data needed by the sieves and the basis builder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistPair {
    /// The level `M`.
    pub level: u64,
    /// The primitive twisting character `ψ`.
    pub psi: DirichletCharacter,
    /// `χψ²` as a character mod `M`.
    pub twisted: DirichletCharacter,
    /// `2^k` with `k` from [`k_count`].
    pub class_size: u64,
    /// Local shape at each prime of `N`, in increasing prime order.
    pub shapes: Vec<(u64, LocalShape)>,
}

impl TwistPair {
    /// `N/M`.
    pub fn cofactor(&self, level: u64) -> u64 {
        level / self.level
    }
}

/// Primitive local characters mod `p^f` (conductor exactly `p^f`).
fn primitive_locals(p: u64, f: u32) -> Vec<LocalCharacter> {
    all_characters(p.pow(f))
        .into_iter()
        .filter(|c| c.is_primitive())
        .map(|c| c.local_component(p))
        .collect()
}

fn local_candidates(chi_p: &LocalCharacter, rule: Exclusion) -> Vec<LocalPair> {
    let p = chi_p.prime();
    let e = chi_p.exponent();
    let s = chi_p.conductor_exponent();
    let mut out = vec![LocalPair {
        prime: p,
        level_exponent: e,
        psi: LocalCharacter::trivial(p, 0),
        shape: LocalShape::Untwisted,
    }];
    if p > 2 && e.is_multiple_of(2) && s < e {
        let half = e / 2;
        let excluded = match rule {
            Exclusion::Conjugate => chi_p.conj().change_exponent(half).ok(),
            Exclusion::AsPrinted => chi_p.change_exponent(half).ok(),
        };
        for psi in primitive_locals(p, half) {
            if Some(&psi) != excluded.as_ref() {
                out.push(LocalPair { prime: p, level_exponent: half, psi, shape: LocalShape::Half });
            }
        }
    }
    if p > 2 && e == 2 && chi_p.is_trivial() {
        out.push(LocalPair {
            prime: p,
            level_exponent: 0,
            psi: legendre_character(p).local_component(p),
            shape: LocalShape::Legendre,
        });
    }
    out
}

/// Number of primes `p | N/M` with `ψ_p ≠ (·/p)` or `p ‖ cond(χ)`.
pub fn k_count(n_over_m: u64, chi: &DirichletCharacter, psi: &DirichletCharacter) -> u32 {
    factorize(n_over_m)
        .primes()
        .filter(|&p| {
            let psi_p = psi.local_component(p).primitive();
            let is_legendre = p > 2 && psi_p == legendre_character(p).local_component(p);
            !is_legendre || chi.local_component(p).conductor_exponent() == 1
        })
        .count() as u32
}

/// Number of distinct primes dividing `x`.
pub fn kprime_count(x: u64) -> u32 {
    factorize(x).omega() as u32
}

fn assemble(chi: &DirichletCharacter, locals: &[&LocalPair]) -> TwistPair {
    let level: u64 = locals.iter().map(|l| l.prime.pow(l.level_exponent)).product();
    let psi = DirichletCharacter::from_locals(
        locals
            .iter()
            .filter(|l| !l.psi.is_trivial())
            .map(|l| l.psi.clone())
            .collect(),
    );
    let twisted_locals = locals
        .iter()
        .filter(|l| l.level_exponent > 0)
        .map(|l| {
            let chi_p = chi.local_component(l.prime);
            let e = chi_p.exponent();
            let psi_sq = l.psi.change_exponent(e).expect("twist conductor divides the level").pow(2);
            chi_p
                .mul(&psi_sq)
                .change_exponent(l.level_exponent)
                .expect("twisted character is defined at the pair level")
        })
        .collect();
    let twisted = DirichletCharacter::from_locals(twisted_locals);
    debug_assert_eq!(twisted.modulus(), level);
    let k = k_count(chi.modulus() / level, chi, &psi);
    TwistPair {
        level,
        psi,
        twisted,
        class_size: 1 << k,
        shapes: locals.iter().map(|l| (l.prime, l.shape)).collect(),
    }
}

/// Every twist pair for `(N, χ)`, equivalent pairs included.
pub fn all_twist_pairs(chi: &DirichletCharacter, rule: Exclusion) -> Result<Vec<TwistPair>> {
    if !chi.is_twist_minimal() {
        return Err(Error::NotTwistMinimal(chi.label()));
    }
    let per_prime: Vec<Vec<LocalPair>> =
        chi.locals().iter().map(|l| local_candidates(l, rule)).collect();
    let mut out = Vec::new();
    let mut choice = vec![0usize; per_prime.len()];
    loop {
        let picked: Vec<&LocalPair> = choice.iter().zip(&per_prime).map(|(&i, v)| &v[i]).collect();
        out.push(assemble(chi, &picked));
        // odometer over local choices
        let mut pos = 0;
        loop {
            if pos == choice.len() {
                return Ok(out);
            }
            choice[pos] += 1;
            if choice[pos] < per_prime[pos].len() {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// The partner of `ψ` under `ψ_p ↦ conj(χ_p ψ_p)` at the primes of `N/M`.
pub fn equivalence_orbit(chi: &DirichletCharacter, pair: &TwistPair) -> Vec<DirichletCharacter> {
    let n_over_m = chi.modulus() / pair.level;
    let mut orbit = vec![pair.psi.clone()];
    for p in factorize(n_over_m).primes() {
        let mut next = Vec::new();
        for psi in &orbit {
            let psi_p = psi.local_component(p).primitive();
            let chi_p = chi.local_component(p);
            let e = chi_p.exponent();
            let image = chi_p
                .mul(&psi_p.change_exponent(e).expect("twist conductor divides N"))
                .conj()
                .primitive();
            let mut locals: Vec<LocalCharacter> = psi
                .locals()
                .iter()
                .filter(|l| l.prime() != p)
                .cloned()
                .collect();
            if !image.is_trivial() {
                locals.push(image);
            }
            let partner = DirichletCharacter::from_locals(locals);
            next.push(psi.clone());
            if !next.contains(&partner) {
                next.push(partner);
            }
        }
        next.dedup();
        orbit = next;
    }
    orbit.sort_by_key(|c| (c.modulus(), c.conrey_index()));
    orbit.dedup();
    orbit
}

/// One representative per equivalence class: the member whose `ψ` has the
/// smallest Conrey index.
pub fn twist_pairs_with(chi: &DirichletCharacter, rule: Exclusion) -> Result<Vec<TwistPair>> {
    let all = all_twist_pairs(chi, rule)?;
    Ok(all
        .iter()
        .filter(|pair| {
            let orbit = equivalence_orbit(chi, pair);
            orbit.iter().all(|other| {
                other.modulus() != pair.psi.modulus() || other.conrey_index() >= pair.psi.conrey_index()
            })
        })
        .cloned()
        .collect())
}

/// Deduplicated twist pairs under the default exclusion rule.
pub fn twist_pairs(chi: &DirichletCharacter) -> Result<Vec<TwistPair>> {
    twist_pairs_with(chi, Exclusion::default())
}

/// Cyclotomic order large enough for `χ`, every `ψ` and every `χψ²`.
pub fn ambient_order(chi: &DirichletCharacter, pairs: &[TwistPair]) -> u64 {
    pairs.iter().fold(chi.order(), |acc, p| {
        lcm(lcm(acc, p.psi.order()), p.twisted.order())
    })
}

/// Squarefree `x` all of whose primes satisfy `p ‖ N`, `χ_p = 1` and
/// `p² | n`, in increasing order.
pub fn p_set(chi: &DirichletCharacter, n: u64) -> Vec<u64> {
    let primes: Vec<u64> = chi
        .locals()
        .iter()
        .filter(|l| l.exponent() == 1 && l.is_trivial())
        .map(|l| l.prime())
        .filter(|&p| n.is_multiple_of(p * p))
        .collect();
    let mut out = vec![1u64];
    for p in primes {
        let extra: Vec<u64> = out.iter().map(|x| x * p).collect();
        out.extend(extra);
    }
    out.sort_unstable();
    out
}

/// The multiplicative function `β_m(q)` of the newform sieve.
pub fn beta(m: u64, q: u64) -> i64 {
    factorize(q)
        .factors()
        .iter()
        .map(|&(p, a)| {
            let divides = m.is_multiple_of(p) as i64;
            match a {
                0 => 1,
                1 => divides - 2,
                2 => 1 - divides,
                _ => 0,
            }
        })
        .product()
}
