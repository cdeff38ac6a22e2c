//! Exact arithmetic over the rationals and over finite fields `F_{p^k}`.
//!
//! Finite-field elements are encoded as integers `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`
//! where `c_i` are the coefficients of the residue class modulo the defining
//! polynomial. The defining polynomial is the monic irreducible of degree `k` with
//! the smallest such encoding of its lower coefficients, so a field descriptor is
//! fully determined by `(p, k)`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Largest extension field for which log/exp tables are built.
const MAX_TABLE_ORDER: u64 = 1 << 20;
/// Fields up to this order also get full addition and multiplication tables.
const MAX_FULL_TABLE_ORDER: u32 = 256;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// `F_{p^k}` with table-driven arithmetic on encoded `u32` elements.
#[derive(Clone)]
pub struct GaloisField {
    p: u32,
    k: u32,
    q: u32,
    /// Monic defining polynomial, coefficients low to high (length `k + 1`).
    modulus: Vec<u32>,
    exp: Vec<u32>,
    log: Vec<u32>,
    add_table: Option<Vec<u32>>,
    mul_table: Option<Vec<u32>>,
}

impl GaloisField {
    fn new(p: u32, k: u32) -> Result<Self> {
        let q64 = (p as u64).pow(k);
        if k > 1 && q64 > MAX_TABLE_ORDER {
            return Err(Error::FieldTooLarge(q64));
        }
        let q = q64 as u32;
        let modulus = if k == 1 { vec![0, 1] } else { smallest_irreducible(p, k) };
        let mut field = GaloisField {
            p,
            k,
            q,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            add_table: None,
            mul_table: None,
        };
        if q64 <= MAX_TABLE_ORDER {
            field.build_log_tables();
        }
        if q <= MAX_FULL_TABLE_ORDER {
            let n = q as usize;
            let mut add = vec![0u32; n * n];
            let mut mul = vec![0u32; n * n];
            for a in 0..q {
                for b in 0..q {
                    add[a as usize * n + b as usize] = field.add_slow(a, b);
                    mul[a as usize * n + b as usize] = field.mul_slow(a, b);
                }
            }
            field.add_table = Some(add);
            field.mul_table = Some(mul);
        }
        Ok(field)
    }

    fn build_log_tables(&mut self) {
        let order = self.q - 1;
        if order == 1 {
            // F_2: the multiplicative group is trivial.
            self.exp = vec![1, 1];
            self.log = vec![0, 0];
            return;
        }
        let mut generator = None;
        for g in 2..self.q {
            let mut x = g;
            let mut ord = 1u32;
            while x != 1 {
                x = self.mul_poly(x, g);
                ord += 1;
                if ord > order {
                    break;
                }
            }
            if ord == order {
                generator = Some(g);
                break;
            }
        }
        let g = generator.expect("finite field multiplicative group is cyclic");
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; self.q as usize];
        let mut x = 1u32;
        for i in 0..order {
            exp[i as usize] = x;
            exp[(i + order) as usize] = x;
            log[x as usize] = i;
            x = self.mul_poly(x, g);
        }
        self.exp = exp;
        self.log = log;
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    fn digits(&self, mut a: u32) -> [u32; 4] {
        let mut d = [0u32; 4];
        for slot in d.iter_mut().take(self.k as usize) {
            *slot = a % self.p;
            a /= self.p;
        }
        d
    }

    fn encode_digits(&self, d: &[u32]) -> u32 {
        d.iter()
            .take(self.k as usize)
            .rev()
            .fold(0u32, |acc, &c| acc * self.p + c)
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 + b as u64) % self.p as u64) as u32;
        }
        if self.p == 2 {
            return a ^ b;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let mut out = [0u32; 4];
        for i in 0..self.k as usize {
            out[i] = (da[i] + db[i]) % self.p;
        }
        self.encode_digits(&out)
    }

    fn mul_poly(&self, a: u32, b: u32) -> u32 {
        if self.k == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let (da, db) = (self.digits(a), self.digits(b));
        let k = self.k as usize;
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * k - 1];
        for i in 0..k {
            for j in 0..k {
                prod[i + j] = (prod[i + j] + da[i] as u64 * db[j] as u64) % p;
            }
        }
        for deg in (k..prod.len()).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for i in 0..k {
                let sub = c * self.modulus[i] as u64 % p;
                prod[deg - k + i] = (prod[deg - k + i] + p - sub) % p;
            }
        }
        let out: Vec<u32> = prod[..k].iter().map(|&c| c as u32).collect();
        self.encode_digits(&out)
    }

    fn mul_slow(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.exp.is_empty() {
            return self.mul_poly(a, b);
        }
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[s as usize]
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.add_table {
            Some(t) => t[a as usize * self.q as usize + b as usize],
            None => self.add_slow(a, b),
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.mul_table {
            Some(t) => t[a as usize * self.q as usize + b as usize],
            None => self.mul_slow(a, b),
        }
    }

    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        let d = self.digits(a);
        let mut out = [0u32; 4];
        for i in 0..self.k as usize {
            out[i] = (self.p - d[i]) % self.p;
        }
        self.encode_digits(&out)
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        if !self.exp.is_empty() {
            let order = self.q - 1;
            let l = self.log[a as usize];
            return Some(self.exp[((order - l) % order) as usize]);
        }
        Some(self.pow(a, self.q as u64 - 2))
    }

    pub fn from_i64(&self, v: i64) -> u32 {
        v.rem_euclid(self.p as i64) as u32
    }

    pub fn from_u128(&self, v: u128) -> u32 {
        (v % self.p as u128) as u32
    }

    pub fn render(&self, a: u32) -> String {
        if self.k == 1 {
            return a.to_string();
        }
        let d = self.digits(a);
        let mut parts = Vec::new();
        for i in (0..self.k as usize).rev() {
            let c = d[i];
            if c == 0 {
                continue;
            }
            let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
            parts.push(match i {
                0 => coef,
                1 => format!("{coef}t"),
                _ => format!("{coef}t^{i}"),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join("+")
        }
    }
}

fn poly_rem(p: u32, num: &[u32], den: &[u32]) -> Vec<u32> {
    // den is monic
    let p64 = p as u64;
    let mut r: Vec<u64> = num.iter().map(|&c| c as u64).collect();
    let dd = den.len() - 1;
    while r.len() > dd {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dd;
        if lead != 0 {
            for (i, &c) in den.iter().enumerate() {
                let sub = lead * c as u64 % p64;
                r[shift + i] = (r[shift + i] + p64 - sub) % p64;
            }
        }
        r.pop();
    }
    r.into_iter().map(|c| c as u32).collect()
}

fn monic_polys(p: u32, degree: u32) -> impl Iterator<Item = Vec<u32>> {
    let count = (p as u64).pow(degree);
    (0..count).map(move |mut code| {
        let mut coeffs = Vec::with_capacity(degree as usize + 1);
        for _ in 0..degree {
            coeffs.push((code % p as u64) as u32);
            code /= p as u64;
        }
        coeffs.push(1);
        coeffs
    })
}

/// Exhaustive irreducibility test: no monic factor of degree `1..=deg/2`.
pub fn is_irreducible(p: u32, poly: &[u32]) -> bool {
    let deg = poly.len() as u32 - 1;
    if deg == 0 {
        return false;
    }
    (1..=deg / 2).all(|d| monic_polys(p, d).all(|factor| poly_rem(p, poly, &factor).iter().any(|&c| c != 0)))
}

fn smallest_irreducible(p: u32, k: u32) -> Vec<u32> {
    monic_polys(p, k)
        .find(|poly| is_irreducible(p, poly))
        .expect("irreducible polynomials exist in every degree")
}

enum FieldKind {
    Rational,
    Galois(GaloisField),
}

/// Descriptor of the coefficient field. Cheap to clone.
#[derive(Clone)]
pub struct FieldDesc {
    kind: Arc<FieldKind>,
}

/// A field element. Its meaning depends on the [`FieldDesc`] it was produced by.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Elem {
    Rational(BigRational),
    Finite(u32),
}

/// Builds `Q` for `(0, 1)` or `F_{p^k}` for prime `p` and `1 <= k <= 4`.
pub fn make_field(p: u64, k: u32) -> Result<FieldDesc> {
    if p == 0 {
        if k != 1 {
            return Err(Error::ExtensionDegree(k));
        }
        return Ok(FieldDesc::rationals());
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if !(1..=4).contains(&k) {
        return Err(Error::ExtensionDegree(k));
    }
    if p > u32::MAX as u64 / 2 {
        return Err(Error::FieldTooLarge(p));
    }
    Ok(FieldDesc {
        kind: Arc::new(FieldKind::Galois(GaloisField::new(p as u32, k)?)),
    })
}

/// Smallest `k` with `p^k >= min_order`, capped at 4.
pub fn minimal_extension(p: u64, min_order: u64) -> u32 {
    let mut k = 1;
    while k < 4 && p.pow(k) < min_order {
        k += 1;
    }
    k
}

impl FieldDesc {
    pub fn rationals() -> Self {
        FieldDesc {
            kind: Arc::new(FieldKind::Rational),
        }
    }

    pub fn galois(&self) -> Option<&GaloisField> {
        match &*self.kind {
            FieldKind::Galois(g) => Some(g),
            FieldKind::Rational => None,
        }
    }

    pub fn characteristic(&self) -> u64 {
        self.galois().map_or(0, |g| g.p as u64)
    }

    pub fn degree(&self) -> u32 {
        self.galois().map_or(1, |g| g.k)
    }

    /// Number of elements, `None` for the rationals.
    pub fn order(&self) -> Option<u64> {
        self.galois().map(|g| g.q as u64)
    }

    pub fn is_finite(&self) -> bool {
        self.galois().is_some()
    }

    pub fn modulus(&self) -> Option<&[u32]> {
        self.galois().map(|g| g.modulus())
    }

    pub fn contains(&self, a: &Elem) -> bool {
        match (&*self.kind, a) {
            (FieldKind::Rational, Elem::Rational(_)) => true,
            (FieldKind::Galois(g), Elem::Finite(v)) => *v < g.q,
            _ => false,
        }
    }

    pub fn zero(&self) -> Elem {
        match &*self.kind {
            FieldKind::Rational => Elem::Rational(BigRational::zero()),
            FieldKind::Galois(_) => Elem::Finite(0),
        }
    }

    pub fn one(&self) -> Elem {
        match &*self.kind {
            FieldKind::Rational => Elem::Rational(BigRational::one()),
            FieldKind::Galois(_) => Elem::Finite(1),
        }
    }

    pub fn from_i64(&self, v: i64) -> Elem {
        match &*self.kind {
            FieldKind::Rational => Elem::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldKind::Galois(g) => Elem::Finite(g.from_i64(v)),
        }
    }

    pub fn from_u128(&self, v: u128) -> Elem {
        match &*self.kind {
            FieldKind::Rational => Elem::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldKind::Galois(g) => Elem::Finite(g.from_u128(v)),
        }
    }

    pub fn rational(&self, num: i64, den: i64) -> Elem {
        assert!(matches!(&*self.kind, FieldKind::Rational));
        Elem::Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        match a {
            Elem::Rational(r) => r.is_zero(),
            Elem::Finite(v) => *v == 0,
        }
    }

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        match (&*self.kind, a, b) {
            (FieldKind::Rational, Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x + y),
            (FieldKind::Galois(g), Elem::Finite(x), Elem::Finite(y)) => Elem::Finite(g.add(*x, *y)),
            _ => panic!("{}", Error::MixedFields),
        }
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        match (&*self.kind, a) {
            (FieldKind::Rational, Elem::Rational(x)) => Elem::Rational(-x),
            (FieldKind::Galois(g), Elem::Finite(x)) => Elem::Finite(g.neg(*x)),
            _ => panic!("{}", Error::MixedFields),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match (&*self.kind, a, b) {
            (FieldKind::Rational, Elem::Rational(x), Elem::Rational(y)) => Elem::Rational(x * y),
            (FieldKind::Galois(g), Elem::Finite(x), Elem::Finite(y)) => Elem::Finite(g.mul(*x, *y)),
            _ => panic!("{}", Error::MixedFields),
        }
    }

    pub fn inv(&self, a: &Elem) -> Option<Elem> {
        match (&*self.kind, a) {
            (FieldKind::Rational, Elem::Rational(x)) => (!x.is_zero()).then(|| Elem::Rational(x.recip())),
            (FieldKind::Galois(g), Elem::Finite(x)) => g.inv(*x).map(Elem::Finite),
            _ => panic!("{}", Error::MixedFields),
        }
    }

    pub fn div(&self, a: &Elem, b: &Elem) -> Option<Elem> {
        self.inv(b).map(|bi| self.mul(a, &bi))
    }

    pub fn pow(&self, a: &Elem, e: u64) -> Elem {
        match (&*self.kind, a) {
            (FieldKind::Galois(g), Elem::Finite(x)) => Elem::Finite(g.pow(*x, e)),
            _ => {
                let mut acc = self.one();
                for _ in 0..e {
                    acc = self.mul(&acc, a);
                }
                acc
            }
        }
    }

    /// Power with a possibly negative exponent; `None` when inverting zero.
    pub fn pow_signed(&self, a: &Elem, e: i64) -> Option<Elem> {
        if e >= 0 {
            Some(self.pow(a, e as u64))
        } else {
            self.inv(a).map(|ai| self.pow(&ai, e.unsigned_abs()))
        }
    }

    /// All elements of a finite field, in encoding order.
    pub fn enumerate(&self) -> Result<Vec<Elem>> {
        let g = self.galois().ok_or(Error::InfiniteField)?;
        Ok((0..g.q).map(Elem::Finite).collect())
    }

    pub fn random_elem<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Elem> {
        let g = self.galois().ok_or(Error::InfiniteField)?;
        Ok(Elem::Finite(rng.gen_range(0..g.q)))
    }

    pub fn random_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Elem> {
        let g = self.galois().ok_or(Error::InfiniteField)?;
        Ok(Elem::Finite(rng.gen_range(1..g.q)))
    }

    pub fn render(&self, a: &Elem) -> String {
        match (&*self.kind, a) {
            (FieldKind::Galois(g), Elem::Finite(x)) => g.render(*x),
            (_, Elem::Rational(r)) => {
                if r.is_integer() {
                    r.numer().to_string()
                } else {
                    format!("{}/{}", r.numer(), r.denom())
                }
            }
            _ => panic!("{}", Error::MixedFields),
        }
    }

    /// Parses the format produced by [`FieldDesc::render`] for prime fields and
    /// the rationals; extension elements are accepted as their integer encoding.
    pub fn parse(&self, text: &str) -> Result<Elem> {
        let text = text.trim();
        match &*self.kind {
            FieldKind::Rational => {
                let (num, den) = match text.split_once('/') {
                    Some((a, b)) => (a, b),
                    None => (text, "1"),
                };
                let num: BigInt = num.trim().parse().map_err(|_| Error::Parse(text.into()))?;
                let den: BigInt = den.trim().parse().map_err(|_| Error::Parse(text.into()))?;
                if den.is_zero() {
                    return Err(Error::Parse(text.into()));
                }
                Ok(Elem::Rational(BigRational::new(num, den)))
            }
            FieldKind::Galois(g) => {
                let v: i64 = text.parse().map_err(|_| Error::Parse(text.into()))?;
                if g.k == 1 {
                    Ok(Elem::Finite(g.from_i64(v)))
                } else if (0..g.q as i64).contains(&v) {
                    Ok(Elem::Finite(v as u32))
                } else {
                    Err(Error::Parse(text.into()))
                }
            }
        }
    }

    pub fn describe(&self) -> String {
        match &*self.kind {
            FieldKind::Rational => "Q".into(),
            FieldKind::Galois(g) if g.k == 1 => format!("F_{}", g.p),
            FieldKind::Galois(g) => {
                let mut terms = Vec::new();
                for i in (0..=g.k as usize).rev() {
                    let c = g.modulus[i];
                    if c == 0 {
                        continue;
                    }
                    let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
                    terms.push(match i {
                        0 => coef,
                        1 => format!("{coef}t"),
                        _ => format!("{coef}t^{i}"),
                    });
                }
                format!("F_{} = F_{}[t]/({})", g.q, g.p, terms.join("+"))
            }
        }
    }
}

impl PartialEq for FieldDesc {
    fn eq(&self, other: &Self) -> bool {
        match (&*self.kind, &*other.kind) {
            (FieldKind::Rational, FieldKind::Rational) => true,
            (FieldKind::Galois(a), FieldKind::Galois(b)) => a.p == b.p && a.modulus == b.modulus,
            _ => false,
        }
    }
}

impl Eq for FieldDesc {}

impl fmt::Debug for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

impl fmt::Display for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

/// Scalar arithmetic used by the elimination kernels.
pub(crate) trait Arith {
    type S: Clone;
    fn is_zero(&self, a: &Self::S) -> bool;
    fn mul(&self, a: &Self::S, b: &Self::S) -> Self::S;
    fn sub(&self, a: &Self::S, b: &Self::S) -> Self::S;
    fn inv(&self, a: &Self::S) -> Self::S;
}

impl Arith for GaloisField {
    type S = u32;
    fn is_zero(&self, a: &u32) -> bool {
        *a == 0
    }
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        GaloisField::mul(self, *a, *b)
    }
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        GaloisField::sub(self, *a, *b)
    }
    fn inv(&self, a: &u32) -> u32 {
        GaloisField::inv(self, *a).expect("pivot is nonzero")
    }
}

pub(crate) struct RationalArith;

impl Arith for RationalArith {
    type S = BigRational;
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn inv(&self, a: &BigRational) -> BigRational {
        a.recip()
    }
}

/// Incremental row-echelon basis: rows are inserted one at a time and kept when
/// independent of the rows already accepted.
pub(crate) struct RowReducer<'a, A: Arith> {
    arith: &'a A,
    basis: Vec<(usize, Vec<A::S>)>,
}

impl<'a, A: Arith> RowReducer<'a, A> {
    pub(crate) fn new(arith: &'a A) -> Self {
        RowReducer {
            arith,
            basis: Vec::new(),
        }
    }

    pub(crate) fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Returns `true` when the row was independent and has been added.
    pub(crate) fn insert(&mut self, mut row: Vec<A::S>) -> bool {
        let a = self.arith;
        for (pivot, brow) in &self.basis {
            let c = row[*pivot].clone();
            if a.is_zero(&c) {
                continue;
            }
            for (x, b) in row.iter_mut().zip(brow.iter()).skip(*pivot) {
                if !a.is_zero(b) {
                    *x = a.sub(x, &a.mul(&c, b));
                }
            }
        }
        match row.iter().position(|x| !a.is_zero(x)) {
            Some(pivot) => {
                let inv = a.inv(&row[pivot]);
                for x in row.iter_mut().skip(pivot) {
                    if !a.is_zero(x) {
                        *x = a.mul(x, &inv);
                    }
                }
                self.basis.push((pivot, row));
                true
            }
            None => false,
        }
    }
}

/// Rank of a stream of rows over one field, keeping an echelon basis.
pub struct IncrementalRank {
    field: FieldDesc,
    finite: Vec<(usize, Vec<u32>)>,
    rational: Vec<(usize, Vec<BigRational>)>,
}

impl IncrementalRank {
    pub fn new(field: FieldDesc) -> Self {
        IncrementalRank {
            field,
            finite: Vec::new(),
            rational: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.finite.len() + self.rational.len()
    }

    /// Returns `true` when `row` is independent of the rows inserted so far.
    pub fn insert(&mut self, row: &[Elem]) -> Result<bool> {
        if row.iter().any(|e| !self.field.contains(e)) {
            return Err(Error::MixedFields);
        }
        Ok(match self.field.galois() {
            Some(g) => {
                let mut red = RowReducer {
                    arith: g,
                    basis: std::mem::take(&mut self.finite),
                };
                let added = red.insert(row.iter().map(finite_value).collect());
                self.finite = red.basis;
                added
            }
            None => {
                let arith = RationalArith;
                let mut red = RowReducer {
                    arith: &arith,
                    basis: std::mem::take(&mut self.rational),
                };
                let added = red.insert(row.iter().map(rational_value).collect());
                self.rational = red.basis;
                added
            }
        })
    }
}

/// Dense row-major matrix over one field.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    field: FieldDesc,
    rows: usize,
    cols: usize,
    entries: Vec<Elem>,
}

impl DenseMatrix {
    pub fn new(field: FieldDesc, rows: usize, cols: usize, entries: Vec<Elem>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: entries.len(),
            });
        }
        if entries.iter().any(|e| !field.contains(e)) {
            return Err(Error::MixedFields);
        }
        Ok(DenseMatrix {
            field,
            rows,
            cols,
            entries,
        })
    }

    pub fn zeros(field: FieldDesc, rows: usize, cols: usize) -> Self {
        let entries = vec![field.zero(); rows * cols];
        DenseMatrix {
            field,
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(field: FieldDesc, n: usize) -> Self {
        let mut m = Self::zeros(field.clone(), n, n);
        for i in 0..n {
            m.entries[i * n + i] = field.one();
        }
        m
    }

    pub fn from_rows(field: FieldDesc, rows: Vec<Vec<Elem>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::LengthMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            entries.extend(row);
        }
        Self::new(field, n, cols, entries)
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Elem {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Elem) {
        assert!(self.field.contains(&v), "{}", Error::MixedFields);
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Elem] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.entries[c * self.rows + r] = self.get(r, c).clone();
            }
        }
        t
    }

    /// Submatrix keeping the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut entries = Vec::with_capacity(self.rows * cols.len());
        for r in 0..self.rows {
            for &c in cols {
                entries.push(self.get(r, c).clone());
            }
        }
        DenseMatrix {
            field: self.field.clone(),
            rows: self.rows,
            cols: cols.len(),
            entries,
        }
    }

    /// Indices of a maximal independent subset of rows, chosen greedily in row order.
    pub fn row_basis(&self) -> Vec<usize> {
        match self.field.galois() {
            Some(g) => {
                let mut red = RowReducer::new(g);
                (0..self.rows)
                    .filter(|&r| {
                        if red.rank() == self.cols {
                            return false;
                        }
                        let row = self.row(r).iter().map(finite_value).collect();
                        red.insert(row)
                    })
                    .collect()
            }
            None => {
                let arith = RationalArith;
                let mut red = RowReducer::new(&arith);
                (0..self.rows)
                    .filter(|&r| {
                        if red.rank() == self.cols {
                            return false;
                        }
                        let row = self.row(r).iter().map(rational_value).collect();
                        red.insert(row)
                    })
                    .collect()
            }
        }
    }

    /// Basis of the right kernel `{v : M v = 0}`.
    pub fn kernel(&self) -> Vec<Vec<Elem>> {
        let f = &self.field;
        let mut m: Vec<Vec<Elem>> = (0..self.rows).map(|r| self.row(r).to_vec()).collect();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            let Some(pr) = (row..m.len()).find(|&r| !f.is_zero(&m[r][col])) else {
                continue;
            };
            m.swap(row, pr);
            let inv = f.inv(&m[row][col]).unwrap();
            for x in m[row].iter_mut() {
                *x = f.mul(x, &inv);
            }
            let pivot_row = m[row].clone();
            for (r, other) in m.iter_mut().enumerate() {
                if r != row && !f.is_zero(&other[col]) {
                    let factor = other[col].clone();
                    for (x, pv) in other.iter_mut().zip(&pivot_row) {
                        *x = f.sub(x, &f.mul(&factor, pv));
                    }
                }
            }
            pivots.push(col);
            row += 1;
            if row == m.len() {
                break;
            }
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&fc| {
                let mut v = vec![f.zero(); self.cols];
                v[fc] = f.one();
                for (i, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(&m[i][fc]);
                }
                v
            })
            .collect()
    }

    pub fn mul_vec(&self, v: &[Elem]) -> Vec<Elem> {
        let f = &self.field;
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect()
    }
}

fn finite_value(e: &Elem) -> u32 {
    match e {
        Elem::Finite(v) => *v,
        Elem::Rational(_) => unreachable!("validated at construction"),
    }
}

fn rational_value(e: &Elem) -> BigRational {
    match e {
        Elem::Rational(r) => r.clone(),
        Elem::Finite(_) => unreachable!("validated at construction"),
    }
}

/// Rank by Gaussian elimination.
pub fn mat_rank(m: &DenseMatrix) -> Result<usize> {
    if m.entries.iter().any(|e| !m.field.contains(e)) {
        return Err(Error::MixedFields);
    }
    Ok(m.row_basis().len())
}

/// All elements of a finite field, each exactly once.
pub fn enumerate_field(f: &FieldDesc) -> Result<Vec<Elem>> {
    f.enumerate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rationals_and_prime_fields() {
        let q = make_field(0, 1).unwrap();
        assert!(!q.is_finite());
        let f3 = make_field(3, 1).unwrap();
        assert_eq!(f3.enumerate().unwrap().len(), 3);
        assert_eq!(f3.describe(), "F_3");
    }

    #[test]
    fn f4_uses_t2_t_1() {
        let f4 = make_field(2, 2).unwrap();
        assert_eq!(f4.modulus().unwrap(), &[1, 1, 1]);
        assert_eq!(f4.describe(), "F_4 = F_2[t]/(t^2+t+1)");
        let elems = f4.enumerate().unwrap();
        assert_eq!(elems.len(), 4);
        for (i, a) in elems.iter().enumerate() {
            for b in &elems[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn defining_polynomial_is_smallest_irreducible() {
        // Independent check: among all monic degree-k polynomials in encoding order,
        // the chosen one is the first without a root (k <= 3).
        for (p, k) in [(2u32, 3u32), (3, 2), (3, 3), (5, 2)] {
            let f = make_field(p as u64, k).unwrap();
            let chosen = f.modulus().unwrap().to_vec();
            let first_rootless = monic_polys(p, k)
                .find(|poly| {
                    (0..p).all(|x| {
                        poly.iter()
                            .rev()
                            .fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % p as u64)
                            != 0
                    })
                })
                .unwrap();
            assert_eq!(chosen, first_rootless);
        }
        // degree 4 over F_2: x^4+x+1 is the first irreducible (x^4+x^2+1 = (x^2+x+1)^2 has no root).
        let f16 = make_field(2, 4).unwrap();
        assert_eq!(f16.modulus().unwrap(), &[1, 1, 0, 0, 1]);
        assert!(!is_irreducible(2, &[1, 0, 1, 0, 1]));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_field(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(make_field(3, 5).unwrap_err(), Error::ExtensionDegree(5));
        assert_eq!(make_field(3, 0).unwrap_err(), Error::ExtensionDegree(0));
        assert_eq!(make_field(0, 2).unwrap_err(), Error::ExtensionDegree(2));
        assert_eq!(make_field(0, 1).unwrap().enumerate().unwrap_err(), Error::InfiniteField);
    }

    #[test]
    fn rank_examples() {
        let f5 = make_field(5, 1).unwrap();
        assert_eq!(mat_rank(&DenseMatrix::identity(f5.clone(), 3)).unwrap(), 3);
        assert_eq!(mat_rank(&DenseMatrix::zeros(f5.clone(), 2, 4)).unwrap(), 0);
        let q = make_field(0, 1).unwrap();
        let m = DenseMatrix::from_rows(
            q.clone(),
            vec![vec![q.from_i64(1), q.from_i64(2)], vec![q.from_i64(2), q.from_i64(4)]],
        )
        .unwrap();
        assert_eq!(mat_rank(&m).unwrap(), 1);
    }

    #[test]
    fn mixed_fields_rejected() {
        let f5 = make_field(5, 1).unwrap();
        let q = make_field(0, 1).unwrap();
        let err = DenseMatrix::new(f5, 1, 2, vec![Elem::Finite(1), q.one()]).unwrap_err();
        assert_eq!(err, Error::MixedFields);
    }

    #[test]
    fn kernel_is_annihilated() {
        let f3 = make_field(3, 1).unwrap();
        let m = DenseMatrix::from_rows(
            f3.clone(),
            vec![
                vec![f3.from_i64(1), f3.from_i64(2), f3.from_i64(0)],
                vec![f3.from_i64(2), f3.from_i64(1), f3.from_i64(0)],
            ],
        )
        .unwrap();
        let ker = m.kernel();
        assert_eq!(ker.len(), 3 - mat_rank(&m).unwrap());
        for v in ker {
            assert!(m.mul_vec(&v).iter().all(|e| f3.is_zero(e)));
        }
    }

    /// Independent rank: largest nonzero minor, determinants by cofactor expansion.
    fn det(f: &FieldDesc, m: &[Vec<Elem>]) -> Elem {
        if m.is_empty() {
            return f.one();
        }
        let mut acc = f.zero();
        for c in 0..m.len() {
            let minor: Vec<Vec<Elem>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != c)
                        .map(|(_, e)| e.clone())
                        .collect()
                })
                .collect();
            let term = f.mul(&m[0][c], &det(f, &minor));
            acc = if c % 2 == 0 {
                f.add(&acc, &term)
            } else {
                f.sub(&acc, &term)
            };
        }
        acc
    }

    fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        (0..n)
            .flat_map(|last| {
                subsets(last, k - 1).into_iter().map(move |mut s| {
                    s.push(last);
                    s
                })
            })
            .collect()
    }

    fn minor_rank(m: &DenseMatrix) -> usize {
        let f = m.field();
        for k in (1..=m.rows().min(m.cols())).rev() {
            for rs in subsets(m.rows(), k) {
                for cs in subsets(m.cols(), k) {
                    let sub: Vec<Vec<Elem>> = rs
                        .iter()
                        .map(|&r| cs.iter().map(|&c| m.get(r, c).clone()).collect())
                        .collect();
                    if !f.is_zero(&det(f, &sub)) {
                        return k;
                    }
                }
            }
        }
        0
    }

    fn small_matrix() -> impl Strategy<Value = (u64, usize, usize, Vec<u32>)> {
        (prop_oneof![Just(2u64), Just(3u64)], 1usize..=4, 1usize..=4).prop_flat_map(|(p, r, c)| {
            (
                Just(p),
                Just(r),
                Just(c),
                proptest::collection::vec(0u32..p as u32, r * c),
            )
        })
    }

    fn field_triple() -> impl Strategy<Value = (u64, u32, u32, u32, u32)> {
        prop_oneof![
            Just((2u64, 1u32)),
            Just((2, 2)),
            Just((2, 4)),
            Just((3, 2)),
            Just((5, 1)),
            Just((7, 3))
        ]
        .prop_flat_map(|(p, k)| {
            let q = (p as u32).pow(k);
            (Just(p), Just(k), 0..q, 0..q, 0..q)
        })
    }

    proptest! {
        #[test]
        fn rank_matches_minor_expansion((p, r, c, vals) in small_matrix()) {
            let f = make_field(p, 1).unwrap();
            let m = DenseMatrix::new(f, r, c, vals.into_iter().map(Elem::Finite).collect()).unwrap();
            prop_assert_eq!(mat_rank(&m).unwrap(), minor_rank(&m));
        }

        #[test]
        fn field_axioms((p, k, a, b, c) in field_triple()) {
            let f = make_field(p, k).unwrap();
            let (a, b, c) = (Elem::Finite(a), Elem::Finite(b), Elem::Finite(c));
            prop_assert_eq!(f.mul(&f.mul(&a, &b), &c), f.mul(&a, &f.mul(&b, &c)));
            prop_assert_eq!(f.add(&f.add(&a, &b), &c), f.add(&a, &f.add(&b, &c)));
            prop_assert_eq!(f.mul(&a, &f.add(&b, &c)), f.add(&f.mul(&a, &b), &f.mul(&a, &c)));
            prop_assert_eq!(f.add(&a, &f.neg(&a)), f.zero());
            if !f.is_zero(&a) {
                prop_assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), f.one());
            }
        }

        #[test]
        fn rational_axioms(a in -50i64..50, b in 1i64..50, c in -50i64..50, d in 1i64..50) {
            let q = make_field(0, 1).unwrap();
            let x = q.rational(a, b);
            let y = q.rational(c, d);
            prop_assert_eq!(q.mul(&x, &y), q.mul(&y, &x));
            if !q.is_zero(&x) {
                prop_assert_eq!(q.mul(&x, &q.inv(&x).unwrap()), q.one());
            }
            prop_assert_eq!(q.parse(&q.render(&x)).unwrap(), x);
        }
    }

    #[test]
    fn frobenius_is_additive() {
        for (p, k) in [(2u64, 2u32), (2, 4), (3, 2), (5, 2), (3, 3)] {
            let f = make_field(p, k).unwrap();
            let elems = f.enumerate().unwrap();
            for a in &elems {
                for b in &elems {
                    let lhs = f.pow(&f.add(a, b), p);
                    let rhs = f.add(&f.pow(a, p), &f.pow(b, p));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn large_prime_field_without_tables() {
        let f = make_field(1_000_003, 1).unwrap();
        let a = f.from_i64(123_456);
        let inv = f.inv(&a).unwrap();
        assert_eq!(f.mul(&a, &inv), f.one());
    }
}
