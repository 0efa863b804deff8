//! Imaginary quadratic data: Kronecker symbols, fundamental discriminants,
//! class numbers and square roots modulo prime powers.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::arith::{factorize, gcd, integer_sqrt, mod_inv, mod_mul, mod_pow, rem, val};
use crate::error::{Error, Result};

/// The Kronecker symbol `(a/b)`.
pub fn kronecker(a: i64, b: i64) -> i32 {
    if b == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1i32;
    let mut a = a as i128;
    let mut b = b as i128;
    if b < 0 {
        b = -b;
        if a < 0 {
            result = -result;
        }
    }
    let v = b.trailing_zeros();
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 && matches!(a.rem_euclid(8), 3 | 5) {
            result = -result;
        }
        b >>= v;
    }
    // b odd positive: Jacobi symbol
    a = a.rem_euclid(b);
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if matches!(b % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut b);
        if a % 4 == 3 && b % 4 == 3 {
            result = -result;
        }
        a %= b;
    }
    if b == 1 {
        result
    } else {
        0
    }
}

/// True for discriminants of imaginary quadratic fields.
pub fn is_fundamental(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    let m = d.rem_euclid(4);
    if m == 1 {
        factorize(d.unsigned_abs()).is_squarefree()
    } else if m == 0 {
        let q = d / 4;
        matches!(q.rem_euclid(4), 2 | 3) && factorize(q.unsigned_abs()).is_squarefree()
    } else {
        false
    }
}

/// `D = d·ℓ²` with `d` fundamental.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DiscriminantSplit {
    pub discriminant: i64,
    pub fundamental: i64,
    pub ell: u64,
}

/// Split a negative discriminant into fundamental part and conductor.
pub fn split_discriminant(disc: i64) -> Result<DiscriminantSplit> {
    if disc >= 0 || !matches!(disc.rem_euclid(4), 0 | 1) {
        return Err(Error::NotDiscriminant(disc));
    }
    let mut core: i64 = -1;
    let mut root: u64 = 1;
    for &(p, e) in factorize(disc.unsigned_abs()).factors() {
        root *= p.pow(e / 2);
        if e % 2 == 1 {
            core *= p as i64;
        }
    }
    let (fundamental, ell) = if core.rem_euclid(4) == 1 {
        (core, root)
    } else {
        (4 * core, root / 2)
    };
    debug_assert_eq!(fundamental * (ell * ell) as i64, disc);
    Ok(DiscriminantSplit { discriminant: disc, fundamental, ell })
}

/// Number of roots of unity in the order of discriminant `d`.
pub fn unit_count(d: i64) -> u32 {
    match d {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

/// Class number by counting reduced primitive forms of discriminant `d`.
pub fn class_number_forms(d: i64) -> u64 {
    assert!(d < 0 && matches!(d.rem_euclid(4), 0 | 1));
    let abs = d.unsigned_abs();
    let mut h = 0u64;
    let amax = integer_sqrt(abs / 3).0;
    for a in 1..=amax as i64 {
        for b in -a + 1..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (b < 0 && a == c) {
                continue;
            }
            if gcd(gcd(a as u64, b.unsigned_abs()), c as u64) == 1 {
                h += 1;
            }
        }
    }
    h
}

/// Class number from the character sum `h = (w/2|d|)·|Σ_{j<|d|} (d/j)·j|`;
/// valid for fundamental `d`.
pub fn class_number_character_sum(d: i64) -> u64 {
    let abs = d.unsigned_abs() as i64;
    let s: i64 = (1..abs).map(|j| kronecker(d, j) as i64 * j).sum();
    let w = unit_count(d) as i64;
    let num = w * s.abs();
    debug_assert_eq!(num % (2 * abs), 0);
    (num / (2 * abs)) as u64
}

/// Class number and unit count of a fundamental discriminant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClassData {
    pub d: i64,
    pub h: u64,
    pub w: u32,
}

impl ClassData {
    /// `h(d)/w(d)`.
    pub fn ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.h), BigInt::from(self.w))
    }
}

fn cache() -> &'static RwLock<BTreeMap<u64, (u64, u32)>> {
    static C: OnceLock<RwLock<BTreeMap<u64, (u64, u32)>>> = OnceLock::new();
    C.get_or_init(|| RwLock::new(BTreeMap::new()))
}

/// Class data of a negative fundamental discriminant, memoized.
pub fn class_data(d: i64) -> Result<ClassData> {
    if !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    let key = d.unsigned_abs();
    if let Some(&(h, w)) = cache().read().unwrap().get(&key) {
        return Ok(ClassData { d, h, w });
    }
    let data = ClassData { d, h: class_number_forms(d), w: unit_count(d) };
    cache().write().unwrap().insert(key, (data.h, data.w));
    Ok(data)
}

/// Fill the cache for every fundamental `d` with `min <= d < 0`.
pub fn populate(min: i64) -> Vec<ClassData> {
    (min..0).rev().filter(|&d| is_fundamental(d)).map(|d| class_data(d).unwrap()).collect()
}

/// Snapshot of the in-memory cache, ordered by `|d|`.
pub fn cached_entries() -> Vec<ClassData> {
    cache()
        .read()
        .unwrap()
        .iter()
        .map(|(&k, &(h, w))| ClassData { d: -(k as i64), h, w })
        .collect()
}

/// Parse cache lines `d,h,w`; blank lines and `#` comments are skipped.
pub fn parse_cache(text: &str) -> Result<Vec<ClassData>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || Error::InvalidInput(format!("class-number cache line {}: {line:?}", lineno + 1));
        let mut parts = line.split(',');
        let mut next = || parts.next().map(str::trim).ok_or_else(bad);
        let d: i64 = next()?.parse().map_err(|_| bad())?;
        let h: u64 = next()?.parse().map_err(|_| bad())?;
        let w: u32 = next()?.parse().map_err(|_| bad())?;
        if !is_fundamental(d) || w != unit_count(d) || h == 0 {
            return Err(bad());
        }
        out.push(ClassData { d, h, w });
    }
    Ok(out)
}

/// Render entries as cache text, sorted by `|d|`.
pub fn format_cache(entries: &[ClassData]) -> String {
    let mut sorted = entries.to_vec();
    sorted.sort_by_key(|c| c.d.unsigned_abs());
    sorted.dedup_by_key(|c| c.d);
    sorted.iter().map(|c| format!("{},{},{}\n", c.d, c.h, c.w)).collect()
}

/// Load a cache file into memory. A missing file is not an error.
pub fn load_cache(path: &Path) -> Result<usize> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(Error::Io(format!("{}: {e}", path.display()))),
    };
    let entries = parse_cache(&text)?;
    let mut w = cache().write().unwrap();
    for c in &entries {
        w.insert(c.d.unsigned_abs(), (c.h, c.w));
    }
    Ok(entries.len())
}

/// Write the in-memory cache to `path` through a temporary file and rename.
pub fn save_cache(path: &Path) -> Result<()> {
    let text = format_cache(&cached_entries());
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(text.as_bytes()).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

/// Square root of a unit `a` modulo an odd prime by Tonelli–Shanks.
fn sqrt_mod_prime(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(mod_pow(a, (p + 1) / 4, p));
    }
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let z = (2..p).find(|&z| mod_pow(z, (p - 1) / 2, p) == p - 1)?;
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mod_mul(tt, tt, p);
            i += 1;
        }
        let b = mod_pow(c, 1 << (m - i - 1), p);
        m = i;
        c = mod_mul(b, b, p);
        t = mod_mul(t, c, p);
        r = mod_mul(r, b, p);
    }
    Some(r)
}

/// One square root of the unit `a` modulo `p^k`, or `None`.
fn unit_sqrt(a: u64, p: u64, k: u32) -> Option<u64> {
    let m = p.pow(k);
    if k == 0 {
        return Some(0);
    }
    if p == 2 {
        let residue_mod = 1u64 << k.min(3);
        if a % residue_mod != 1 % residue_mod {
            return None;
        }
        let mut x = 1u64;
        for j in 3..k {
            // x^2 ≡ a mod 2^j; fix the next bit
            let mj = 1u64 << (j + 1);
            if mod_mul(x, x, mj) != a % mj {
                x += 1 << (j - 1);
            }
        }
        return Some(x % m);
    }
    let mut x = sqrt_mod_prime(a, p)?;
    let mut pk = p;
    for _ in 1..k {
        pk *= p;
        // Newton step: x ← x − (x² − a)/(2x)
        let fx = (mod_mul(x, x, pk) + pk - a % pk) % pk;
        let inv = mod_inv((2 * x) as i64, pk)?;
        x = (x + pk - mod_mul(fx, inv, pk)) % pk;
    }
    debug_assert_eq!(mod_mul(x, x, m), a % m);
    Some(x)
}

/// Modulus in which [`sqrt_mod_prime_power`] works: `p^e`, or `2^{e+2}` for
/// `p = 2`.
pub fn root_modulus(p: u64, e: u32) -> u64 {
    if p == 2 {
        1 << (e + 2)
    } else {
        p.pow(e)
    }
}

/// The smallest nonnegative `u` with `u² ≡ a` modulo `p^e` (odd `p`) or
/// `2^{e+2}` (`p = 2`).
pub fn sqrt_mod_prime_power(a: i64, p: u64, e: u32) -> Result<u64> {
    let m = root_modulus(p, e);
    let k = if p == 2 { e + 2 } else { e };
    let r = rem(a, m);
    let fail = Error::NoSquareRoot { value: a, modulus: m };
    if r == 0 {
        return Ok(0);
    }
    let v = val(p, r);
    if v % 2 == 1 {
        return Err(fail);
    }
    let h = v / 2;
    let unit = r / p.pow(v);
    let sub_k = k - v;
    let w = unit_sqrt(unit, p, sub_k).ok_or(fail)?;
    // every root is p^h·w' with w' a unit root mod p^{k-v}, determined mod p^{k-h}
    let sub_m = p.pow(sub_k);
    let mut unit_roots = vec![w, (sub_m - w) % sub_m];
    if p == 2 && sub_k >= 3 {
        let half = sub_m / 2;
        unit_roots.push((w + half) % sub_m);
        unit_roots.push((sub_m - w + half) % sub_m);
    }
    let out_m = m / p.pow(h);
    let scale = p.pow(h);
    let best = unit_roots
        .into_iter()
        .map(|w| w * scale % out_m)
        .min()
        .expect("nonempty");
    debug_assert_eq!(mod_mul(best, best, m), r);
    Ok(best)
}
