//! Bigraded Cox rings: grading matrices, monomials, bidegree pieces and sparse
//! homogeneous polynomials.
//!
//! A grading matrix has a base block of columns `(1, 0)` followed by a fiber block of
//! columns `(lambda_j, a_j)` with `a_j >= 1`. The piece of bidegree `(alpha, beta)` is
//! finite dimensional because the fiber exponents are bounded by `beta`, and once they
//! are fixed the total base degree is forced.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Elem, FieldDesc};

pub type Bidegree = (i64, i64);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradingMatrix {
    names: Vec<String>,
    row1: Vec<i64>,
    row2: Vec<i64>,
    n_base: usize,
}

impl GradingMatrix {
    /// `names`, `row1` and `row2` list the base variables first, then the fiber block.
    pub fn new(names: Vec<String>, row1: Vec<i64>, row2: Vec<i64>, n_base: usize) -> Result<Self> {
        let n = names.len();
        if row1.len() != n || row2.len() != n {
            return Err(Error::InvalidGrading("row lengths differ from variable count".into()));
        }
        if n_base == 0 || n_base >= n {
            return Err(Error::InvalidGrading(
                "need at least one base and one fiber variable".into(),
            ));
        }
        for i in 0..n_base {
            if (row1[i], row2[i]) != (1, 0) {
                return Err(Error::InvalidGrading(format!(
                    "base column {} must be (1, 0)",
                    names[i]
                )));
            }
        }
        for i in n_base..n {
            if row2[i] < 1 {
                return Err(Error::InvalidGrading(format!(
                    "fiber weight of {} must be positive",
                    names[i]
                )));
            }
        }
        for (i, a) in names.iter().enumerate() {
            if names[..i].contains(a) {
                return Err(Error::InvalidGrading(format!("duplicate variable {a}")));
            }
        }
        Ok(GradingMatrix {
            names,
            row1,
            row2,
            n_base,
        })
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn n_base(&self) -> usize {
        self.n_base
    }

    pub fn n_fiber(&self) -> usize {
        self.names.len() - self.n_base
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn column(&self, i: usize) -> Bidegree {
        (self.row1[i], self.row2[i])
    }

    pub fn is_base(&self, i: usize) -> bool {
        i < self.n_base
    }

    pub fn rows(&self) -> (&[i64], &[i64]) {
        (&self.row1, &self.row2)
    }
}

/// Exponent vector over the variables of a grading matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(i: usize, nvars: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn pow(&self, e: u32) -> Monomial {
        Monomial(self.0.iter().map(|a| a * e).collect())
    }

    /// Builds a monomial from `(variable index, exponent)` pairs.
    pub fn from_pairs(nvars: usize, pairs: &[(usize, u32)]) -> Monomial {
        let mut e = vec![0; nvars];
        for &(i, x) in pairs {
            e[i] += x;
        }
        Monomial(e)
    }

    /// Text form such as `u0^2*x1*y^3`; the constant monomial renders as `1`.
    pub fn render(&self, names: &[String]) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    names[i].clone()
                } else {
                    format!("{}^{}", names[i], e)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    pub fn parse(text: &str, names: &[String]) -> Result<Monomial> {
        let mut e = vec![0u32; names.len()];
        let text = text.trim();
        if text == "1" {
            return Ok(Monomial(e));
        }
        for factor in text.split('*') {
            let factor = factor.trim();
            let (name, exp) = match factor.split_once('^') {
                Some((n, x)) => (
                    n.trim(),
                    x.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("bad exponent in {factor}")))?,
                ),
                None => (factor, 1),
            };
            let i = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Parse(format!("unknown variable {name}")))?;
            e[i] += exp;
        }
        Ok(Monomial(e))
    }
}

pub fn bidegree_of(m: &Monomial, g: &GradingMatrix) -> Result<Bidegree> {
    if m.len() != g.nvars() {
        return Err(Error::LengthMismatch {
            expected: g.nvars(),
            found: m.len(),
        });
    }
    Ok(m.0.iter().enumerate().fold((0, 0), |(a, b), (i, &e)| {
        (a + g.row1[i] * e as i64, b + g.row2[i] * e as i64)
    }))
}

/// All exponent vectors in `nvars` variables of total degree `degree`, in
/// descending lexicographic order.
pub fn monomials_of_degree(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(degree);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=degree).rev() {
            prefix.push(e);
            rec(nvars, degree - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if degree == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(nvars, degree, &mut Vec::with_capacity(nvars), &mut out);
    out
}

/// Monomial basis of `Cox_(alpha, beta)`, descending lexicographic order.
pub fn enumerate_basis(g: &GradingMatrix, d: Bidegree) -> Vec<Monomial> {
    let (alpha, beta) = d;
    let mut out = Vec::new();
    if beta < 0 {
        return out;
    }
    let fiber: Vec<usize> = (g.n_base..g.nvars()).collect();
    let mut fiber_exps = Vec::new();
    fiber_solutions(g, &fiber, 0, beta, &mut Vec::new(), &mut fiber_exps);
    for fe in fiber_exps {
        let lambda: i64 = fe.iter().zip(&fiber).map(|(&e, &j)| g.row1[j] * e as i64).sum();
        let base_degree = alpha - lambda;
        if base_degree < 0 {
            continue;
        }
        for be in monomials_of_degree(g.n_base, base_degree as u32) {
            let mut exps = be;
            exps.extend_from_slice(&fe);
            out.push(Monomial(exps));
        }
    }
    out.sort_by(|a, b| b.cmp(a));
    out
}

fn fiber_solutions(
    g: &GradingMatrix,
    fiber: &[usize],
    pos: usize,
    remaining: i64,
    prefix: &mut Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if pos == fiber.len() {
        if remaining == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    let w = g.row2[fiber[pos]];
    let mut e = 0;
    while e * w <= remaining {
        prefix.push(e as u32);
        fiber_solutions(g, fiber, pos + 1, remaining - e * w, prefix, out);
        prefix.pop();
        e += 1;
    }
}

/// Sparse homogeneous polynomial in a bigraded Cox ring.
#[derive(Clone)]
pub struct BiPoly {
    grading: Arc<GradingMatrix>,
    field: FieldDesc,
    bidegree: Bidegree,
    terms: BTreeMap<Monomial, Elem>,
}

impl BiPoly {
    pub fn zero(grading: Arc<GradingMatrix>, field: FieldDesc, bidegree: Bidegree) -> Self {
        BiPoly {
            grading,
            field,
            bidegree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        grading: Arc<GradingMatrix>,
        field: FieldDesc,
        bidegree: Bidegree,
        terms: impl IntoIterator<Item = (Monomial, Elem)>,
    ) -> Result<Self> {
        let mut poly = Self::zero(grading, field, bidegree);
        for (m, c) in terms {
            let d = bidegree_of(&m, &poly.grading)?;
            if d != bidegree {
                return Err(Error::BidegreeMismatch {
                    left: bidegree,
                    right: d,
                });
            }
            if !poly.field.contains(&c) {
                return Err(Error::MixedFields);
            }
            poly.add_term(m, c);
        }
        Ok(poly)
    }

    pub fn monomial(grading: Arc<GradingMatrix>, field: FieldDesc, m: Monomial) -> Result<Self> {
        let d = bidegree_of(&m, &grading)?;
        let one = field.one();
        Self::from_terms(grading, field, d, [(m, one)])
    }

    /// Parses a single monomial such as `u0^2*w^3` into a section with coefficient 1.
    pub fn parse_monomial(grading: Arc<GradingMatrix>, field: FieldDesc, text: &str) -> Result<Self> {
        let m = Monomial::parse(text, grading.names())?;
        Self::monomial(grading, field, m)
    }

    fn add_term(&mut self, m: Monomial, c: Elem) {
        if self.field.is_zero(&c) {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = self.field.add(&old, &c);
                if !self.field.is_zero(&s) {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn grading(&self) -> &Arc<GradingMatrix> {
        &self.grading
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn bidegree(&self) -> Bidegree {
        self.bidegree
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Elem> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn compatible(&self, other: &BiPoly) -> Result<()> {
        if !(Arc::ptr_eq(&self.grading, &other.grading) || *self.grading == *other.grading) {
            return Err(Error::GradingMismatch);
        }
        if self.field != other.field {
            return Err(Error::MixedFields);
        }
        Ok(())
    }

    pub fn add(&self, other: &BiPoly) -> Result<BiPoly> {
        self.compatible(other)?;
        if self.bidegree != other.bidegree {
            return Err(Error::BidegreeMismatch {
                left: self.bidegree,
                right: other.bidegree,
            });
        }
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> BiPoly {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = self.field.neg(c);
        }
        out
    }

    pub fn sub(&self, other: &BiPoly) -> Result<BiPoly> {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &Elem) -> BiPoly {
        let mut out = BiPoly::zero(self.grading.clone(), self.field.clone(), self.bidegree);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), self.field.mul(c, s));
        }
        out
    }

    pub fn mul(&self, other: &BiPoly) -> Result<BiPoly> {
        self.compatible(other)?;
        let d = (self.bidegree.0 + other.bidegree.0, self.bidegree.1 + other.bidegree.1);
        let mut out = BiPoly::zero(self.grading.clone(), self.field.clone(), d);
        if let Some(terms) = self.mul_packed(other) {
            out.terms = terms;
            return Ok(out);
        }
        let f = &self.field;
        let mut acc: HashMap<Monomial, Elem> = HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let c = f.mul(c1, c2);
                match acc.entry(m1.mul(m2)) {
                    Entry::Occupied(mut e) => {
                        let s = f.add(e.get(), &c);
                        e.insert(s);
                    }
                    Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        out.terms = acc.into_iter().filter(|(_, c)| !f.is_zero(c)).collect();
        Ok(out)
    }

    /// Product over a finite field with each monomial packed into a `u128`, 8 bits per
    /// variable; `None` when the exponents of the product may not fit.
    fn mul_packed(&self, other: &BiPoly) -> Option<BTreeMap<Monomial, Elem>> {
        let g = self.field.galois()?;
        let n = self.grading.nvars();
        let max_exp = |p: &BiPoly| p.terms.keys().flat_map(|m| m.0.iter().copied()).max().unwrap_or(0);
        if n > 16 || max_exp(self) + max_exp(other) > u8::MAX as u32 {
            return None;
        }
        let pack = |p: &BiPoly| -> Vec<(u128, u32)> {
            p.terms
                .iter()
                .map(|(m, c)| {
                    let key = m.0.iter().rev().fold(0u128, |k, &e| (k << 8) | e as u128);
                    (key, crate::raw::finite(c))
                })
                .collect()
        };
        let (left, right) = (pack(self), pack(other));
        // no carries between the 8-bit slots, so key addition is monomial multiplication
        let mut acc: HashMap<u128, u32> = HashMap::default();
        for &(k1, c1) in &left {
            for &(k2, c2) in &right {
                let c = g.mul(c1, c2);
                let slot = acc.entry(k1 + k2).or_insert(0);
                *slot = g.add(*slot, c);
            }
        }
        Some(
            acc.into_iter()
                .filter(|&(_, c)| c != 0)
                .map(|(key, c)| {
                    let e = (0..n).map(|i| ((key >> (8 * i)) & 0xff) as u32).collect();
                    (Monomial(e), Elem::Finite(c))
                })
                .collect(),
        )
    }

    pub fn pow(&self, e: u32) -> BiPoly {
        let one = BiPoly::from_terms(
            self.grading.clone(),
            self.field.clone(),
            (0, 0),
            [(Monomial::one(self.grading.nvars()), self.field.one())],
        )
        .expect("constant is homogeneous");
        (0..e).fold(one, |acc, _| acc.mul(self).expect("same ring"))
    }

    /// Value of the polynomial at an affine representative.
    pub fn evaluate(&self, point: &[Elem]) -> Result<Elem> {
        if point.len() != self.grading.nvars() {
            return Err(Error::LengthMismatch {
                expected: self.grading.nvars(),
                found: point.len(),
            });
        }
        let f = &self.field;
        let mut acc = f.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                if e > 0 {
                    t = f.mul(&t, &f.pow(x, e as u64));
                }
            }
            acc = f.add(&acc, &t);
        }
        Ok(acc)
    }

    /// Re-expresses the polynomial over another grading that contains every variable
    /// of this one (matched by name, with identical columns).
    pub fn embed(&self, target: Arc<GradingMatrix>) -> Result<BiPoly> {
        let mut map = Vec::with_capacity(self.grading.nvars());
        for i in 0..self.grading.nvars() {
            let name = self.grading.name(i);
            let j = target
                .index_of(name)
                .ok_or_else(|| Error::InvalidGrading(format!("variable {name} missing in target")))?;
            if target.column(j) != self.grading.column(i) {
                return Err(Error::InvalidGrading(format!("column of {name} differs in target")));
            }
            map.push(j);
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut e = vec![0u32; target.nvars()];
            for (i, &x) in m.exponents().iter().enumerate() {
                e[map[i]] = x;
            }
            (Monomial(e), c.clone())
        });
        BiPoly::from_terms(target.clone(), self.field.clone(), self.bidegree, terms)
    }

    /// Terms in descending monomial order as `(coefficient, monomial)` text pairs.
    pub fn term_list(&self) -> Vec<(String, String)> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| (self.field.render(c), m.render(self.grading.names())))
            .collect()
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.term_list()
            .into_iter()
            .map(|(c, m)| match (c.as_str(), m.as_str()) {
                (_, "1") => c,
                ("1", _) => m,
                _ if c.contains('+') || c.contains('/') => format!("({c})*{m}"),
                _ => format!("{c}*{m}"),
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl PartialEq for BiPoly {
    fn eq(&self, other: &Self) -> bool {
        *self.grading == *other.grading
            && self.field == other.field
            && self.bidegree == other.bidegree
            && self.terms == other.terms
    }
}

impl fmt::Debug for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BiPoly{:?}[{}]", self.bidegree, self.render())
    }
}

/// Result of [`random_bipoly`]; `empty_basis` flags a zero bidegree piece.
#[derive(Clone, Debug)]
pub struct RandomSection {
    pub poly: BiPoly,
    pub empty_basis: bool,
}

/// Uniformly random element of a bidegree piece over a finite field, reproducible
/// from `seed`.
pub fn random_bipoly(grading: &Arc<GradingMatrix>, d: Bidegree, field: &FieldDesc, seed: u64) -> Result<RandomSection> {
    if !field.is_finite() {
        return Err(Error::InfiniteField);
    }
    let basis = enumerate_basis(grading, d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(basis.len());
    for m in &basis {
        terms.push((m.clone(), field.random_elem(&mut rng)?));
    }
    let poly = BiPoly::from_terms(grading.clone(), field.clone(), d, terms)?;
    Ok(RandomSection {
        poly,
        empty_basis: basis.is_empty(),
    })
}

/// Mixes a base seed with a stream label (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundle::standard_p;
    use crate::field::make_field;
    use proptest::prelude::*;

    fn binom(n: u64, k: u64) -> u64 {
        if k > n {
            return 0;
        }
        (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
    }

    fn naive_product(a: &BiPoly, b: &BiPoly) -> BTreeMap<Monomial, Elem> {
        let f = a.field();
        let mut out: BTreeMap<Monomial, Elem> = BTreeMap::new();
        for (m1, c1) in a.terms() {
            for (m2, c2) in b.terms() {
                let slot = out.entry(m1.mul(m2)).or_insert_with(|| f.zero());
                *slot = f.add(slot, &f.mul(c1, c2));
            }
        }
        out.retain(|_, c| !f.is_zero(c));
        out
    }

    #[test]
    fn packed_product_matches_naive() {
        let p = standard_p(4, 2).unwrap();
        for (q, k) in [(2u64, 2u32), (3, 1), (5, 2)] {
            let f = make_field(q, k).unwrap();
            for seed in 0..4 {
                let a = random_bipoly(p.grading(), (2, 0), &f, seed).unwrap().poly;
                let b = random_bipoly(p.grading(), (1, 2), &f, seed + 100).unwrap().poly;
                let ab = a.mul(&b).unwrap();
                assert_eq!(ab.terms(), &naive_product(&a, &b));
                assert_eq!(ab.bidegree(), (3, 2));
                let a3 = a.pow(3);
                assert_eq!(a3.terms(), &naive_product(&a.pow(2), &a));
            }
        }
        // exponents beyond the packed range take the general path
        let f = make_field(3, 1).unwrap();
        let u = BiPoly::parse_monomial(p.grading().clone(), f.clone(), "u0").unwrap();
        let big = u.pow(200).mul(&u.pow(100)).unwrap();
        assert_eq!(big.render(), "u0^300");
    }

    #[test]
    fn y_column_and_constant() {
        let p = standard_p(3, 1).unwrap();
        let g = p.grading();
        let y = Monomial::parse("y", g.names()).unwrap();
        assert_eq!(bidegree_of(&y, g).unwrap(), (-1, 1));
        assert_eq!(bidegree_of(&Monomial::one(g.nvars()), g).unwrap(), (0, 0));
        let u0y = Monomial::parse("u0*y", g.names()).unwrap();
        assert_eq!(bidegree_of(&u0y, g).unwrap(), (0, 1));
        assert!(bidegree_of(&Monomial::one(2), g).is_err());
    }

    #[test]
    fn degree_zero_one_piece() {
        for (n, r) in [(3, 1), (4, 2), (6, 3)] {
            let p = standard_p(n, r).unwrap();
            let g = p.grading();
            assert_eq!(enumerate_basis(g, (0, 0)), vec![Monomial::one(g.nvars())]);
            let basis: Vec<String> = enumerate_basis(g, (0, 1)).iter().map(|m| m.render(g.names())).collect();
            assert_eq!(basis.len() as u32, n + 2);
            let mut expected = vec!["w".to_string()];
            expected.extend((1..=r).map(|j| format!("x{j}")));
            expected.extend((0..=n - r).map(|i| format!("u{i}*y")));
            let mut sorted = basis.clone();
            sorted.sort();
            expected.sort();
            assert_eq!(sorted, expected);
        }
    }

    #[test]
    fn p31_piece_13_has_65_monomials() {
        // Oracle: direct nested loops over (a, b, c) with a + b + c = 3 and base degree 1 + c.
        let mut count = 0u64;
        for a in 0..=3u64 {
            for b in 0..=3 - a {
                let c = 3 - a - b;
                let d = 1 + c;
                for u0 in 0..=d {
                    for u1 in 0..=d - u0 {
                        let _u2 = d - u0 - u1;
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 65);
        let p = standard_p(3, 1).unwrap();
        assert_eq!(enumerate_basis(p.grading(), (1, 3)).len() as u64, count);
    }

    #[test]
    fn basis_count_formula_all_small_n() {
        for n in 3..=6u64 {
            for r in 1..n {
                let p = standard_p(n as u32, r as u32).unwrap();
                for m in 0..=n - r {
                    let l = n + 1 - m;
                    let formula: u64 = (0..=l).map(|c| binom(l - c + r, r) * binom(n - r + m + c, n - r)).sum();
                    let got = enumerate_basis(p.grading(), (m as i64, l as i64)).len() as u64;
                    assert_eq!(got, formula, "n={n} r={r} m={m}");
                }
            }
        }
    }

    #[test]
    fn base_block_dimension() {
        for n in 3..=6u32 {
            for r in 1..n {
                let p = standard_p(n, r).unwrap();
                for j in 0..=4u64 {
                    let got = enumerate_basis(p.grading(), (j as i64, 0)).len() as u64;
                    assert_eq!(got, binom((n - r) as u64 + j, j));
                }
            }
        }
    }

    #[test]
    fn negative_alpha_piece() {
        let p = standard_p(4, 1).unwrap();
        let g = p.grading();
        let basis = enumerate_basis(g, (-2, 2));
        assert_eq!(basis, vec![Monomial::parse("y^2", g.names()).unwrap()]);
        assert!(enumerate_basis(g, (-1, 0)).is_empty());
        assert!(enumerate_basis(g, (0, -1)).is_empty());
    }

    #[test]
    fn random_sections_are_reproducible_and_homogeneous() {
        let f3 = make_field(3, 1).unwrap();
        let p = standard_p(4, 2).unwrap();
        let a = random_bipoly(p.grading(), (2, 3), &f3, 7).unwrap();
        let b = random_bipoly(p.grading(), (2, 3), &f3, 7).unwrap();
        assert_eq!(a.poly, b.poly);
        assert!(!a.empty_basis);
        for m in a.poly.terms().keys() {
            assert_eq!(bidegree_of(m, p.grading()).unwrap(), (2, 3));
        }
        let empty = random_bipoly(p.grading(), (-1, 0), &f3, 7).unwrap();
        assert!(empty.empty_basis && empty.poly.is_zero());
        let q = make_field(0, 1).unwrap();
        assert_eq!(
            random_bipoly(p.grading(), (1, 1), &q, 1).unwrap_err(),
            Error::InfiniteField
        );
    }

    #[test]
    fn arithmetic_examples() {
        let f5 = make_field(5, 1).unwrap();
        let p = standard_p(3, 1).unwrap();
        let g = p.grading().clone();
        let a = random_bipoly(&g, (1, 2), &f5, 11).unwrap().poly;
        assert!(a.add(&a.neg()).unwrap().is_zero());
        let one = BiPoly::parse_monomial(g.clone(), f5.clone(), "1").unwrap();
        assert_eq!(a.mul(&one).unwrap(), a);
        let u0w = BiPoly::parse_monomial(g.clone(), f5.clone(), "u0*w").unwrap();
        assert_eq!(u0w.mul(&u0w).unwrap().bidegree(), (2, 2));
        let b = random_bipoly(&g, (1, 3), &f5, 11).unwrap().poly;
        assert!(matches!(a.add(&b), Err(Error::BidegreeMismatch { .. })));
    }

    #[test]
    fn text_forms() {
        let p = standard_p(3, 1).unwrap();
        let g = p.grading();
        let m = Monomial::parse("u0^2*x1*y^3", g.names()).unwrap();
        assert_eq!(m.render(g.names()), "u0^2*x1*y^3");
        assert!(Monomial::parse("v7", g.names()).is_err());
        let f4 = make_field(2, 2).unwrap();
        let poly = BiPoly::from_terms(
            g.clone(),
            f4,
            (2, 0),
            [
                (Monomial::parse("u0^2", g.names()).unwrap(), Elem::Finite(3)),
                (Monomial::parse("u1*u2", g.names()).unwrap(), Elem::Finite(1)),
            ],
        )
        .unwrap();
        assert_eq!(poly.render(), "(t+1)*u0^2 + u1*u2");
    }

    proptest! {
        #[test]
        fn basis_round_trips_bidegree(n in 3u32..=5, r in 1u32..=2, a in -2i64..=3, b in 0i64..=3) {
            let p = standard_p(n, r).unwrap();
            let g = p.grading();
            let basis = enumerate_basis(g, (a, b));
            for m in &basis {
                prop_assert_eq!(bidegree_of(m, g).unwrap(), (a, b));
                prop_assert_eq!(&Monomial::parse(&m.render(g.names()), g.names()).unwrap(), m);
            }
            let mut sorted = basis.clone();
            sorted.sort_by(|x, y| y.cmp(x));
            sorted.dedup();
            prop_assert_eq!(sorted, basis);
        }
    }
}
