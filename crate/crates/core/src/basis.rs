//! Trace forms, Hecke action on truncated q-expansions, twisting and
//! lifting, exact basis extraction, and coefficient transfer from
//! twist-minimal forms to their twists.

use std::collections::HashMap;

use num_bigint::BigInt;
use serde::Serialize;

use crate::arith::{divisors, factorize, is_prime, lcm};
use crate::characters::{all_characters, DirichletCharacter};
use crate::cyclo::CycloNumber;
use crate::decomp::{ambient_order, twist_pairs};
use crate::error::{Error, Result};
use crate::oracle::{psi_index, trace_full, trace_new};
use crate::trace::{as_dimension, trace_min_in, RootChoice, SpaceKind, SpaceSpec};

/// A q-series `Σ_{n=1}^{B} a_n q^n` with coefficients in `Q(ζ_order)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QExpansion {
    pub spec: SpaceSpec,
    order: u64,
    coeffs: Vec<CycloNumber>,
}

impl QExpansion {
    /// `coeffs[i]` is `a_{i+1}`; every coefficient is moved into `Q(ζ_order)`.
    pub fn new(spec: SpaceSpec, order: u64, coeffs: Vec<CycloNumber>) -> Result<Self> {
        let order = lcm(order, spec.chi.order());
        let coeffs = coeffs.iter().map(|c| c.embed_into(order)).collect::<Result<_>>()?;
        Ok(QExpansion { spec, order, coeffs })
    }

    pub fn zero(spec: SpaceSpec, order: u64, truncation: usize) -> Self {
        let order = lcm(order, spec.chi.order());
        QExpansion { spec, order, coeffs: vec![CycloNumber::zero(order); truncation] }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// The largest index stored.
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    /// `a_n` for `1 ≤ n ≤ B`.
    pub fn coeff(&self, n: usize) -> Option<&CycloNumber> {
        n.checked_sub(1).and_then(|i| self.coeffs.get(i))
    }

    pub fn coeffs(&self) -> &[CycloNumber] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(CycloNumber::is_zero)
    }

    /// The first `len` coefficients.
    pub fn truncate(&self, len: usize) -> Result<Self> {
        if len > self.truncation() {
            return Err(Error::Truncation { needed: len as u64, available: self.truncation() as u64 });
        }
        Ok(QExpansion { coeffs: self.coeffs[..len].to_vec(), ..self.clone() })
    }

    /// Same coefficients, relabelled as an element of `spec`.
    pub fn with_spec(self, spec: SpaceSpec) -> Result<Self> {
        QExpansion::new(spec, self.order, self.coeffs)
    }
}

fn trace_value(source: &SpaceSpec, n: u64, order: u64) -> Result<CycloNumber> {
    match source.kind {
        SpaceKind::Min => trace_min_in(source, n, order, RootChoice::Smallest),
        SpaceKind::New => trace_new(&source.chi, source.weight, n, order),
        SpaceKind::Full => trace_full(&source.chi, source.weight, n, order),
    }
}

fn trace_coeffs(spec: &SpaceSpec, from: usize, to: usize, order: u64) -> Result<Vec<CycloNumber>> {
    (from..=to).map(|n| trace_value(spec, n as u64, order)).collect()
}

/// The trace form of `spec`: coefficient `n` is `Tr T_n` on the space.
pub fn trace_form(spec: &SpaceSpec, truncation: usize) -> Result<QExpansion> {
    let order = spec.chi.order();
    if !spec.parity_ok() {
        return Ok(QExpansion::zero(spec.clone(), order, truncation));
    }
    QExpansion::new(spec.clone(), order, trace_coeffs(spec, 1, truncation, order)?)
}

/// Coefficients `1..=len` of `T_n f`, using the character and weight of
/// `f.spec`: `(T_n f)_m = Σ_{d | (m,n)} χ(d) d^{k-1} a_{mn/d²}`.
pub fn hecke_coeffs(n: u64, f: &QExpansion, len: usize) -> Result<Vec<CycloNumber>> {
    if n == 0 {
        return Err(Error::InvalidInput("Hecke index must be positive".into()));
    }
    let needed = len as u64 * n;
    if needed > f.truncation() as u64 {
        return Err(Error::Truncation { needed, available: f.truncation() as u64 });
    }
    let order = f.order;
    let k = f.spec.weight;
    let chi = &f.spec.chi;
    let weights: Vec<(u64, CycloNumber)> = divisors(n)
        .into_iter()
        .map(|d| (d, chi.eval_in(d as i64, order).scale_integer(BigInt::from(d).pow(k - 1))))
        .filter(|(_, w)| !w.is_zero())
        .collect();
    let mut out = Vec::with_capacity(len);
    for m in 1..=len as u64 {
        let mut acc = CycloNumber::zero(order);
        for (d, w) in &weights {
            if m % d == 0 {
                let idx = (m * n / (d * d)) as usize;
                acc += &(w * &f.coeffs[idx - 1]);
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// `T_n f`, truncated at `⌊B/n⌋`.
pub fn hecke_apply(n: u64, f: &QExpansion) -> Result<QExpansion> {
    if n == 0 {
        return Err(Error::InvalidInput("Hecke index must be positive".into()));
    }
    let len = f.truncation() / n as usize;
    let coeffs = hecke_coeffs(n, f, len)?;
    Ok(QExpansion { spec: f.spec.clone(), order: f.order, coeffs })
}

/// The character `ab` at modulus `lcm(mod a, mod b)`.
pub fn character_product(a: &DirichletCharacter, b: &DirichletCharacter) -> DirichletCharacter {
    let m = lcm(a.modulus(), b.modulus());
    let a = a.change_modulus(m).expect("modulus multiple of conductor");
    let b = b.change_modulus(m).expect("modulus multiple of conductor");
    a.mul(&b)
}

/// `Σ ψ(n) a_n q^n`. The result is labelled with level
/// `lcm(N, cond(ψ)²)` and character `χψ²`.
pub fn twist_qexp(f: &QExpansion, psi: &DirichletCharacter) -> QExpansion {
    let level = lcm(f.spec.level, psi.conductor().pow(2));
    let chi = character_product(&f.spec.chi, &psi.pow(2))
        .change_modulus(level)
        .expect("conductor divides the twisted level");
    let order = [psi.order(), chi.order()].into_iter().fold(f.order, lcm);
    let coeffs = f
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, a)| &psi.eval_in(i as i64 + 1, order) * &a.embed_into(order).expect("order divides"))
        .collect();
    let spec = SpaceSpec { level, weight: f.spec.weight, chi, kind: SpaceKind::Full };
    QExpansion { spec, order, coeffs }
}

/// `f(dz)`: `a_n` moves to index `dn`; the truncation is unchanged.
pub fn lift(f: &QExpansion, d: u64) -> Result<QExpansion> {
    if d == 0 {
        return Err(Error::InvalidInput("lift factor must be positive".into()));
    }
    let level = f.spec.level * d;
    let chi = f.spec.chi.change_modulus(level)?;
    let spec = SpaceSpec { level, weight: f.spec.weight, chi, kind: SpaceKind::Full };
    let mut coeffs = vec![CycloNumber::zero(f.order); f.truncation()];
    for (i, a) in f.coeffs.iter().enumerate() {
        let target = (i as u64 + 1) * d;
        if target as usize > coeffs.len() {
            break;
        }
        coeffs[target as usize - 1] = a.clone();
    }
    Ok(QExpansion { spec, order: f.order, coeffs })
}

/// `⌈k·[SL2(Z) : Γ0(N)]/12⌉`.
pub fn sturm_bound(spec: &SpaceSpec) -> u64 {
    (spec.weight as u64 * psi_index(spec.level)).div_ceil(12)
}

/// Incremental row echelon form over a cyclotomic field.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    /// `(pivot column, row, inverse of the pivot entry)`.
    pivots: Vec<(usize, Vec<CycloNumber>, CycloNumber)>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduce `row` against the pivots; keep it and return `true` when it
    /// is independent of them.
    pub fn insert(&mut self, mut row: Vec<CycloNumber>) -> bool {
        for (col, pivot, inv) in &self.pivots {
            if row[*col].is_zero() {
                continue;
            }
            let factor = &row[*col] * inv;
            for (r, p) in row.iter_mut().zip(pivot).skip(*col) {
                if !p.is_zero() {
                    *r -= &(&factor * p);
                }
            }
        }
        match row.iter().position(|c| !c.is_zero()) {
            Some(col) => {
                let inv = row[col].inverse().expect("nonzero entry");
                self.pivots.push((col, row, inv));
                true
            }
            None => false,
        }
    }
}

/// Exact rank of a matrix with entries in one cyclotomic field.
pub fn exact_rank(rows: &[Vec<CycloNumber>]) -> usize {
    let mut e = Echelon::new();
    for row in rows {
        e.insert(row.clone());
    }
    e.rank()
}

/// Where a basis row came from: `(T_m trace form of source)` twisted by
/// `twist` and lifted by `lift`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RowLabel {
    pub hecke_index: u64,
    pub source_level: u64,
    pub source_character: String,
    pub source_kind: SpaceKind,
    pub twist: String,
    pub lift: u64,
}

/// Independent rows spanning a space, with their coefficients `1..=B`.
#[derive(Clone, Debug)]
pub struct BasisMatrix {
    pub spec: SpaceSpec,
    pub truncation: usize,
    pub order: u64,
    pub rows: Vec<RowLabel>,
    pub entries: Vec<Vec<CycloNumber>>,
    pub certified_rank: usize,
}

struct Generator {
    source: SpaceSpec,
    twist: DirichletCharacter,
    lift: u64,
}

/// Generators spanning `S^new(L, χ_L)`.
fn new_generators(chi: &DirichletCharacter, weight: u32) -> Result<(Vec<Generator>, u64)> {
    let level = chi.modulus();
    if !chi.is_twist_minimal() {
        let source = SpaceSpec { level, weight, chi: chi.clone(), kind: SpaceKind::New };
        let g = Generator { source, twist: DirichletCharacter::trivial(1), lift: 1 };
        return Ok((vec![g], chi.order()));
    }
    let pairs = twist_pairs(chi)?;
    let order = ambient_order(chi, &pairs);
    let mut gens = Vec::new();
    for pair in pairs {
        let source = SpaceSpec::new(pair.level, weight, pair.twisted.clone(), SpaceKind::Min)?;
        if !source.parity_ok() || as_dimension(&trace_value(&source, 1, source.chi.order())?)? == 0 {
            continue;
        }
        gens.push(Generator { source, twist: pair.psi.conj(), lift: 1 });
    }
    Ok((gens, order))
}

/// Dimension of the space, as `Tr T_1`.
pub fn dimension(spec: &SpaceSpec) -> Result<u64> {
    if !spec.parity_ok() {
        return Ok(0);
    }
    as_dimension(&trace_value(spec, 1, spec.chi.order())?)
}

/// A basis of `spec` from Hecke translates of trace forms, certified by
/// exact rank on coefficients `1..=B`.
///
/// Rows are tried for `m = 1, 2, …`; for each `m` the generators are taken
/// in order (twist pairs as listed by the decomposition, then lifts
/// ascending). Only rows that raise the rank are kept.
pub fn basis_for(spec: &SpaceSpec, truncation: usize) -> Result<BasisMatrix> {
    let sturm = sturm_bound(spec);
    if (truncation as u64) < sturm {
        return Err(Error::Truncation { needed: sturm, available: truncation as u64 });
    }
    let target = dimension(spec)? as usize;
    let mut order = spec.chi.order();
    let mut gens = Vec::new();
    if target > 0 {
        match spec.kind {
            SpaceKind::Min => gens.push(Generator {
                source: spec.clone(),
                twist: DirichletCharacter::trivial(1),
                lift: 1,
            }),
            SpaceKind::New => {
                let (g, o) = new_generators(&spec.chi, spec.weight)?;
                gens = g;
                order = lcm(order, o);
            }
            SpaceKind::Full => {
                for l in divisors(spec.level) {
                    if l % spec.chi.conductor() != 0 {
                        continue;
                    }
                    let chi_l = spec.chi.change_modulus(l)?;
                    let (g, o) = new_generators(&chi_l, spec.weight)?;
                    order = lcm(order, o);
                    for d in divisors(spec.level / l) {
                        gens.extend(g.iter().map(|x| Generator {
                            source: x.source.clone(),
                            twist: x.twist.clone(),
                            lift: d,
                        }));
                    }
                }
            }
        }
    }
    let mut cache: HashMap<(u64, u64, SpaceKind), QExpansion> = HashMap::new();
    let mut echelon = Echelon::new();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut m = 1u64;
    while echelon.rank() < target {
        if m as usize > truncation {
            return Err(Error::Internal(format!(
                "rank {} of {} for {:?} not reached with m ≤ {truncation}",
                echelon.rank(),
                target,
                spec
            )));
        }
        for g in &gens {
            if echelon.rank() == target {
                break;
            }
            // f(dz) up to q^B only reads coefficients up to ⌊B/d⌋
            let len = truncation / g.lift as usize;
            let key = (g.source.level, g.source.chi.conrey_index(), g.source.kind);
            let needed = m as usize * len;
            let series = cache
                .entry(key)
                .or_insert_with(|| QExpansion::zero(g.source.clone(), g.source.chi.order(), 0));
            if series.truncation() < needed {
                let extra = trace_coeffs(&g.source, series.truncation() + 1, needed, series.order)?;
                series.coeffs.extend(extra);
            }
            let mut coeffs = hecke_coeffs(m, series, len)?;
            coeffs.resize(truncation, CycloNumber::zero(series.order));
            let translate = QExpansion { coeffs, ..series.clone_header() };
            let twisted = twist_qexp(&translate, &g.twist);
            let padded: Vec<CycloNumber> = lift(&twisted, g.lift)?
                .coeffs
                .iter()
                .map(|c| c.embed_into(order))
                .collect::<Result<_>>()?;
            if echelon.insert(padded.clone()) {
                rows.push(RowLabel {
                    hecke_index: m,
                    source_level: g.source.level,
                    source_character: g.source.chi.label(),
                    source_kind: g.source.kind,
                    twist: g.twist.label(),
                    lift: g.lift,
                });
                entries.push(padded);
            }
        }
        m += 1;
    }
    Ok(BasisMatrix {
        spec: spec.clone(),
        truncation,
        order,
        rows,
        certified_rank: echelon.rank(),
        entries,
    })
}

impl QExpansion {
    fn clone_header(&self) -> QExpansion {
        QExpansion { spec: self.spec.clone(), order: self.order, coeffs: Vec::new() }
    }
}

/// The Gram matrix `G[n][m]` = coefficient `m` of `T_n` applied to the
/// trace form, for `1 ≤ n, m ≤ size`.
pub fn trace_gram(spec: &SpaceSpec, size: usize) -> Result<Vec<Vec<CycloNumber>>> {
    let form = trace_form(spec, size * size)?;
    (1..=size as u64).map(|n| hecke_coeffs(n, &form, size)).collect()
}

/// Find `ψ` with `χψ²` twist-minimal at the same level. Characters of
/// modulus `N·2^j` are searched in Conrey order for `j = 0, 1, …`, since
/// at `p = 2` the required square may only come from a larger modulus.
pub fn nonminimal_bridge(spec: &SpaceSpec) -> Result<(DirichletCharacter, SpaceSpec)> {
    if spec.chi.is_twist_minimal() {
        return Err(Error::InvalidInput(format!("{} is already twist-minimal", spec.chi)));
    }
    let level = spec.level;
    for j in 0..=4u32 {
        let modulus = level * 2u64.pow(j);
        let chi = spec.chi.change_modulus(modulus)?;
        for psi in all_characters(modulus) {
            let candidate = chi.mul(&psi.pow(2));
            if !level.is_multiple_of(candidate.conductor()) {
                continue;
            }
            let reduced = candidate.change_modulus(level)?;
            if reduced.is_twist_minimal() {
                let target = SpaceSpec::new(level, spec.weight, reduced, SpaceKind::Min)?;
                return Ok((psi, target));
            }
        }
    }
    Err(Error::Internal(format!("no twist-minimal χψ² found for {}", spec.chi)))
}

/// A newform described as the twist of a twist-minimal eigenform by a
/// primitive character, with its prime coefficients.
#[derive(Clone, Debug)]
pub struct TwistedNewform {
    /// The twist-minimal space holding the source eigenform.
    pub base: SpaceSpec,
    base_primes: Vec<(u64, CycloNumber)>,
    /// The primitive twist applied to the source.
    pub psi: DirichletCharacter,
    pub level: u64,
    /// `χψ²` at modulus `level`.
    pub character: DirichletCharacter,
    pub order: u64,
    /// `(p, b_p)` for primes `p` up to the source truncation.
    pub prime_coeffs: Vec<(u64, CycloNumber)>,
}

fn build_twisted(
    base: &SpaceSpec,
    base_primes: &[(u64, CycloNumber)],
    psi: &DirichletCharacter,
    order: u64,
) -> Result<TwistedNewform> {
    let chi = &base.chi;
    let psi = psi.primitive_inducing();
    let psi_prime = character_product(chi, &psi).primitive_inducing();
    let level = lcm(base.level, psi.conductor() * psi_prime.conductor());
    let character = character_product(chi, &psi.pow(2)).change_modulus(level)?;
    let order = [psi.order(), psi_prime.order(), character.order()].into_iter().fold(order, lcm);
    let cond = psi.conductor();
    let mut prime_coeffs = Vec::with_capacity(base_primes.len());
    for (p, a) in base_primes {
        let a = a.embed_into(order)?;
        let second_case = cond.is_multiple_of(*p)
            && psi.local_component(*p).primitive() == chi.local_component(*p).conj().primitive();
        let b = if second_case {
            &a.conjugate() * &psi_prime.eval_in(*p as i64, order)
        } else {
            &a * &psi.eval_in(*p as i64, order)
        };
        prime_coeffs.push((*p, b));
    }
    Ok(TwistedNewform {
        base: base.clone(),
        base_primes: base_primes.to_vec(),
        psi,
        level,
        character,
        order,
        prime_coeffs,
    })
}

/// Prime coefficients of the newform equivalent to `f_ψ`, for a normalized
/// eigenform `f` in a twist-minimal space.
pub fn newform_coeffs_from_min(f: &QExpansion, psi: &DirichletCharacter) -> Result<TwistedNewform> {
    if f.spec.kind != SpaceKind::Min || !f.spec.chi.is_twist_minimal() {
        return Err(Error::NotTwistMinimal(f.spec.chi.label()));
    }
    if !f.coeff(1).is_some_and(CycloNumber::is_one) {
        return Err(Error::InvalidInput("eigenform must be normalized with a_1 = 1".into()));
    }
    let base_primes: Vec<(u64, CycloNumber)> = (2..=f.truncation() as u64)
        .filter(|&p| is_prime(p))
        .map(|p| (p, f.coeffs[p as usize - 1].clone()))
        .collect();
    build_twisted(&f.spec, &base_primes, psi, f.order)
}

impl TwistedNewform {
    /// The newform equivalent to a further twist by `psi`. Twists compose
    /// on the twist-minimal source, so `ψ` followed by `ψ̄` returns the
    /// source itself.
    pub fn twist(&self, psi: &DirichletCharacter) -> Result<TwistedNewform> {
        let total = character_product(&self.psi, psi);
        build_twisted(&self.base, &self.base_primes, &total, self.order)
    }

    /// `b_p`, if stored.
    pub fn prime_coeff(&self, p: u64) -> Option<&CycloNumber> {
        self.prime_coeffs.iter().find(|(q, _)| *q == p).map(|(_, b)| b)
    }

    /// `b_1, …, b_B` by Hecke multiplicativity and the prime-power
    /// recursion with character `χψ²`.
    pub fn expansion(&self, truncation: usize) -> Result<QExpansion> {
        let order = self.order;
        let k = self.base.weight;
        let mut b = vec![CycloNumber::zero(order); truncation + 1];
        if truncation >= 1 {
            b[1] = CycloNumber::one(order);
        }
        for n in 2..=truncation as u64 {
            let fac = factorize(n);
            let factors = fac.factors();
            if factors.len() > 1 {
                let (p, e) = factors[0];
                let pe = p.pow(e);
                b[n as usize] = &b[pe as usize] * &b[(n / pe) as usize];
                continue;
            }
            let (p, e) = factors[0];
            let bp = self
                .prime_coeff(p)
                .ok_or(Error::Truncation { needed: p, available: self.prime_coeffs.last().map_or(0, |x| x.0) })?
                .clone();
            if e == 1 {
                b[n as usize] = bp;
            } else {
                let prev = n / p;
                let prev2 = prev / p;
                let char_term = self
                    .character
                    .eval_in(p as i64, order)
                    .scale_integer(BigInt::from(p).pow(k - 1));
                b[n as usize] = &(&bp * &b[prev as usize]) - &(&char_term * &b[prev2 as usize]);
            }
        }
        let spec = SpaceSpec {
            level: self.level,
            weight: k,
            chi: self.character.clone(),
            kind: SpaceKind::New,
        };
        QExpansion::new(spec, order, b.split_off(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::gcd;
    use proptest::prelude::*;

    fn min_spec(n: u64, k: u32, q: i64) -> SpaceSpec {
        SpaceSpec::new(n, k, DirichletCharacter::from_conrey(n, q).unwrap(), SpaceKind::Min).unwrap()
    }

    fn ints(f: &QExpansion) -> Vec<i64> {
        use num_traits::ToPrimitive;
        f.coeffs().iter().map(|c| c.to_rational().unwrap().to_integer().to_i64().unwrap()).collect()
    }

    #[test]
    fn delta_trace_form() {
        let f = trace_form(&min_spec(1, 12, 1), 3).unwrap();
        assert_eq!(ints(&f), vec![1, -24, 252]);
        let g = trace_form(&min_spec(11, 2, 1), 1).unwrap();
        assert_eq!(ints(&g), vec![1]);
        let odd = SpaceSpec::new(4, 3, DirichletCharacter::trivial(4), SpaceKind::Full).unwrap();
        assert!(trace_form(&odd, 5).unwrap().is_zero());
    }

    #[test]
    fn hecke_on_delta() {
        let f = trace_form(&min_spec(1, 12, 1), 8).unwrap();
        assert_eq!(hecke_apply(1, &f).unwrap(), f);
        let t2 = hecke_apply(2, &f).unwrap();
        assert_eq!(t2.truncation(), 4);
        // Δ is an eigenform: T_2 Δ = -24 Δ
        assert_eq!(ints(&t2), vec![-24, 576, -6048, -24 * -1472]);
        let a = ints(&f);
        assert_eq!(ints(&t2)[1], a[3] + 2048 * a[0]);
        assert!(matches!(hecke_coeffs(3, &f, 3), Err(Error::Truncation { needed: 9, .. })));
    }

    #[test]
    fn twist_and_lift_examples() {
        let f = trace_form(&min_spec(11, 2, 1), 4).unwrap();
        let same = twist_qexp(&f, &DirichletCharacter::trivial(1));
        assert_eq!(same.coeffs(), f.coeffs());
        assert_eq!(lift(&f, 1).unwrap().coeffs(), f.coeffs());
        let two = trace_form(&min_spec(11, 2, 1), 2).unwrap();
        let lifted = lift(&QExpansion::new(two.spec.clone(), 1, two.coeffs().to_vec()).unwrap(), 2).unwrap();
        assert_eq!(lifted.truncation(), 2);
        let four = QExpansion::new(two.spec.clone(), 1, vec![CycloNumber::from_integer(1, 5), CycloNumber::from_integer(1, 7), CycloNumber::zero(1), CycloNumber::zero(1)]).unwrap();
        assert_eq!(ints(&lift(&four, 2).unwrap()), vec![0, 5, 0, 7]);
        let psi = DirichletCharacter::from_conrey(3, 2).unwrap();
        let t = twist_qexp(&f, &psi);
        assert_eq!(t.spec.level, 99);
        assert_eq!(ints(&t), vec![1, 2, 0, 2]);
    }

    #[test]
    fn sturm_examples() {
        assert_eq!(sturm_bound(&min_spec(1, 12, 1)), 1);
        assert_eq!(sturm_bound(&min_spec(11, 2, 1)), 2);
        let four = SpaceSpec::new(4, 2, DirichletCharacter::trivial(4), SpaceKind::Full).unwrap();
        assert_eq!(sturm_bound(&four), 1);
    }

    #[test]
    fn basis_examples() {
        let b = basis_for(&min_spec(1, 12, 1), 3).unwrap();
        assert_eq!(b.certified_rank, 1);
        assert_eq!(b.entries.len(), 1);
        let full22 = SpaceSpec::new(22, 2, DirichletCharacter::trivial(22), SpaceKind::Full).unwrap();
        let b = basis_for(&full22, sturm_bound(&full22) as usize).unwrap();
        assert_eq!(b.certified_rank, 2);
        let lifts: Vec<u64> = b.rows.iter().map(|r| r.lift).collect();
        assert_eq!(lifts, vec![1, 2]);
        assert!(b.rows.iter().all(|r| r.source_level == 11));
        let odd = SpaceSpec::new(4, 3, DirichletCharacter::trivial(4), SpaceKind::Full).unwrap();
        let b = basis_for(&odd, 10).unwrap();
        assert_eq!(b.certified_rank, 0);
        assert!(b.entries.is_empty());
        assert!(basis_for(&full22, 2).is_err());
    }

    #[test]
    fn twist_rows_lie_in_the_new_space() {
        // the span of twisted minimal trace forms equals the span of the
        // newform trace form's Hecke translates
        for level in [9u64, 18, 25, 27] {
            for chi in all_characters(level).into_iter().filter(|c| c.is_twist_minimal()) {
                for k in [2u32, 4, 6] {
                    let spec = SpaceSpec::new(level, k, chi.clone(), SpaceKind::New).unwrap();
                    if !spec.parity_ok() {
                        continue;
                    }
                    let b = sturm_bound(&spec) as usize;
                    let basis = basis_for(&spec, b).unwrap();
                    let form = trace_form(&spec, b * b).unwrap();
                    let mut rows = basis.entries.clone();
                    for m in 1..=b as u64 {
                        let row = hecke_coeffs(m, &form, b).unwrap();
                        rows.push(row.iter().map(|c| c.embed_into(basis.order).unwrap()).collect());
                    }
                    assert_eq!(exact_rank(&rows), basis.certified_rank, "{chi} k={k}");
                }
            }
        }
    }

    #[test]
    fn bridge_examples() {
        let sixteen = SpaceSpec::new(16, 2, DirichletCharacter::trivial(16), SpaceKind::New).unwrap();
        let (psi, target) = nonminimal_bridge(&sixteen).unwrap();
        assert!(target.chi.is_twist_minimal());
        let expect = character_product(&DirichletCharacter::trivial(16), &psi.pow(2)).change_modulus(16).unwrap();
        assert_eq!(target.chi, expect);
        assert!(nonminimal_bridge(&min_spec(11, 2, 1)).is_err());
        for p in [3u64, 5, 7, 11] {
            assert!(all_characters(p).iter().all(|c| c.is_twist_minimal()));
        }
    }

    #[test]
    fn coefficient_transfer_cases() {
        let f = trace_form(&min_spec(11, 2, 1), 30).unwrap();
        let same = newform_coeffs_from_min(&f, &DirichletCharacter::trivial(1)).unwrap();
        assert_eq!(same.level, 11);
        for (p, b) in &same.prime_coeffs {
            assert_eq!(b, f.coeff(*p as usize).unwrap());
        }
        let psi = DirichletCharacter::from_conrey(5, 2).unwrap();
        let g = newform_coeffs_from_min(&f, &psi).unwrap();
        assert_eq!(g.level, 275);
        for (p, b) in &g.prime_coeffs {
            let expect = &f.coeff(*p as usize).unwrap().embed_into(g.order).unwrap() * &psi.eval_in(*p as i64, g.order);
            assert_eq!(b, &expect);
        }
        let mut bad = f.clone();
        bad.coeffs[0] = CycloNumber::from_integer(1, 2);
        assert!(newform_coeffs_from_min(&bad, &psi).is_err());
    }

    #[test]
    fn coefficient_transfer_second_case() {
        // χ = 7.2 (order 3) at weight 4, a one-dimensional space; twisting
        // by χ̄ hits the conjugate case at p = 7
        let chi = DirichletCharacter::from_conrey(7, 2).unwrap();
        let spec = SpaceSpec::new(7, 4, chi.clone(), SpaceKind::Min).unwrap();
        assert_eq!(dimension(&spec).unwrap(), 1);
        let f = trace_form(&spec, 20).unwrap();
        let psi = chi.conj();
        let g = newform_coeffs_from_min(&f, &psi).unwrap();
        assert_eq!(g.level, 7);
        assert_eq!(g.character, chi.conj());
        let a7 = f.coeff(7).unwrap().embed_into(g.order).unwrap();
        // ψ' is trivial, so b_7 = conj(a_7)
        assert_eq!(g.prime_coeff(7).unwrap(), &a7.conjugate());
        // the result is the complex conjugate of f, the eigenform of the
        // conjugate space
        let conj_f = trace_form(&SpaceSpec::new(7, 4, chi.conj(), SpaceKind::Min).unwrap(), 20).unwrap();
        for (p, b) in &g.prime_coeffs {
            assert_eq!(b, &conj_f.coeff(*p as usize).unwrap().embed_into(g.order).unwrap(), "p = {p}");
        }
    }

    #[test]
    fn expansion_matches_eigenform() {
        let f = trace_form(&min_spec(11, 2, 1), 40).unwrap();
        let same = newform_coeffs_from_min(&f, &DirichletCharacter::trivial(1)).unwrap();
        assert_eq!(same.expansion(40).unwrap().coeffs(), f.coeffs());
    }

    #[test]
    fn gram_is_symmetric() {
        for (n, k, q) in [(11u64, 2u32, 1i64), (23, 2, 1), (7, 3, 3), (13, 4, 1)] {
            let g = trace_gram(&min_spec(n, k, q), 8).unwrap();
            for i in 0..8 {
                for j in 0..8 {
                    assert_eq!(g[i][j], g[j][i], "{n}.{q} k={k} ({i},{j})");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn hecke_operators_commute(idx in 0usize..4, n in 1u64..6, m in 1u64..6) {
            prop_assume!(gcd(n, m) == 1);
            let (lvl, k, q) = [(23u64, 2u32, 1i64), (7, 3, 3), (13, 4, 1), (1, 12, 1)][idx];
            let f = trace_form(&min_spec(lvl, k, q), 60).unwrap();
            let a = hecke_apply(n, &hecke_apply(m, &f).unwrap()).unwrap();
            let b = hecke_apply(m, &hecke_apply(n, &f).unwrap()).unwrap();
            prop_assert_eq!(a.coeffs(), b.coeffs());
        }

        #[test]
        fn twisting_commutes_with_hecke(n in 1u64..8) {
            // 11a is an eigenform; with ψ = (·/3) and (n, 33) = 1,
            // T_n(f_ψ) = ψ(n) (T_n f)_ψ
            prop_assume!(gcd(n, 33) == 1);
            let f = trace_form(&min_spec(11, 2, 1), 64).unwrap();
            let psi = DirichletCharacter::from_conrey(3, 2).unwrap();
            let twisted = twist_qexp(&f, &psi);
            let lhs = hecke_apply(n, &twisted).unwrap();
            let rhs = twist_qexp(&hecke_apply(n, &f).unwrap(), &psi);
            let s = psi.eval_in(n as i64, lhs.order());
            for (x, y) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                prop_assert_eq!(x, &(&s * y));
            }
        }
    }
}
