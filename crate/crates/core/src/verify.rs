//! Lemma replay per parameter tuple `(n, m, r, p)` with JSON certificates.
//!
//! Checks run in dependency order: base-point-freeness, smoothness of `Q°`, jet
//! surjectivity on `R`, the covering identity, the critical-point census, form sections,
//! the blowup dimension count and the `e(n)` arithmetic. Jet surjectivity "for every
//! point" is evidenced at a standard point plus random points and is labelled
//! `"scope": "sampled"`.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bundle::{base_locus_empty, standard_p, standard_q, standard_r, Chart, LocalPoly, WpsBundle};
use crate::cox::{
    bidegree_of, derive_seed, enumerate_basis, monomials_of_degree, random_bipoly, BiPoly, GradingMatrix, Monomial,
};
use crate::error::{Error, Result};
use crate::field::{is_prime, make_field, minimal_extension, Elem, FieldDesc};
use crate::jets::{rest_surjective, JetTarget, SurjectivityReport};
use crate::raw::RawPoly;
use crate::singular::{census, cover_identity_residual, CensusConfig, CensusParams, DEFAULT_BUDGET};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Smallest field order used for sampling.
pub const MIN_SAMPLE_ORDER: u64 = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParamTuple {
    pub n: u32,
    pub m: u32,
    pub r: u32,
    pub p: u32,
    /// Extension degree of the sampling field `F_(p^k)`.
    pub k: u32,
    pub seed: u64,
}

impl ParamTuple {
    /// Validates and picks the smallest `k` with `p^k >= 9`.
    pub fn new(n: u32, m: u32, r: u32, p: u32, seed: u64) -> Result<Self> {
        let k = if is_prime(p as u64) {
            minimal_extension(p as u64, MIN_SAMPLE_ORDER)
        } else {
            1
        };
        Self::with_k(n, m, r, p, k, seed)
    }

    pub fn with_k(n: u32, m: u32, r: u32, p: u32, k: u32, seed: u64) -> Result<Self> {
        let t = ParamTuple { n, m, r, p, k, seed };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || self.m < 1 || self.r < 1 || self.n < self.m + self.r {
            return Err(Error::InvalidParameters(format!(
                "need n >= 3, m >= 1, r >= 1 and n >= m + r (got n = {}, m = {}, r = {})",
                self.n, self.m, self.r
            )));
        }
        if !is_prime(self.p as u64) {
            return Err(Error::NotPrime(self.p as u64));
        }
        if !self.l().is_multiple_of(self.p) {
            return Err(Error::InvalidParameters(format!(
                "p = {} does not divide l = {}",
                self.p,
                self.l()
            )));
        }
        if !(1..=4).contains(&self.k) {
            return Err(Error::ExtensionDegree(self.k));
        }
        Ok(())
    }

    pub fn l(&self) -> u32 {
        self.n + 1 - self.m
    }

    pub fn lambda(&self) -> u32 {
        self.n - self.m - self.r
    }

    pub fn field(&self) -> Result<FieldDesc> {
        make_field(self.p as u64, self.k)
    }

    pub fn label(&self) -> String {
        format!(
            "n{}_m{}_r{}_p{}_k{}_seed{}",
            self.n, self.m, self.r, self.p, self.k, self.seed
        )
    }

    /// `(m, r) = (n - 1, 1)`: conic bundles over `P^(n-1)`, settled by a cited theorem.
    pub fn is_conic_bundle_case(&self) -> bool {
        self.l() == 2
    }

    /// `(m, r) = (n - 2, 2)`: covered by a cited result, checked here regardless.
    pub fn is_known_case(&self) -> bool {
        self.m + 2 == self.n && self.r == 2
    }
}

pub fn smallest_prime_divisor(l: u32) -> Option<u32> {
    (2..=l).find(|&d| l.is_multiple_of(d))
}

/// Every `(n, m, r)` with `n_min <= n <= n_max`, `n >= m + r` and `l >= min_l`, with `p`
/// the smallest prime dividing `l`.
pub fn grid(n_min: u32, n_max: u32, min_l: u32, seed: u64) -> Vec<ParamTuple> {
    let mut out = Vec::new();
    for n in n_min.max(3)..=n_max {
        for m in 1..n {
            for r in 1..=n - m {
                let l = n + 1 - m;
                if l < min_l {
                    continue;
                }
                let p = smallest_prime_divisor(l).expect("l >= 2");
                out.push(ParamTuple::new(n, m, r, p, seed).expect("grid tuples are valid"));
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped {
        reason: String,
        /// Whether the skipped statement is settled by a cited result.
        cited: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCertificate {
    pub tool_version: String,
    pub tuple: ParamTuple,
    pub lemma_id: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Value>,
    pub seed: u64,
    /// Recorded only when timing is requested, so default certificates are reproducible.
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Overall {
    Pass,
    Fail,
    Incomplete,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TupleReport {
    pub tool_version: String,
    pub tuple: ParamTuple,
    pub overall: Overall,
    pub notes: Vec<String>,
    pub certificates: Vec<LemmaCertificate>,
}

impl TupleReport {
    pub fn certificate(&self, lemma_id: &str) -> Option<&LemmaCertificate> {
        self.certificates.iter().find(|c| c.lemma_id == lemma_id)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub budget: u128,
    /// Random points per chart class in the jet checks.
    pub samples: usize,
    /// Random `(a, f)` pairs for the covering identity.
    pub cover_pairs: usize,
    /// Census field extension degree; `None` picks the largest `k <= 4` whose full
    /// chart fits the budget.
    pub census_k: Option<u32>,
    pub mu: Option<u32>,
    pub max_retries: u32,
    pub timing: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            budget: DEFAULT_BUDGET,
            samples: 25,
            cover_pairs: 100,
            census_k: None,
            mu: None,
            max_retries: 20,
            timing: false,
        }
    }
}

struct Recorder<'a> {
    tuple: ParamTuple,
    config: &'a VerifyConfig,
    started: Instant,
}

impl Recorder<'_> {
    fn finish(self, lemma_id: &str, verdict: Verdict, witnesses: Vec<Value>) -> LemmaCertificate {
        LemmaCertificate {
            tool_version: TOOL_VERSION.to_string(),
            tuple: self.tuple,
            lemma_id: lemma_id.to_string(),
            verdict,
            witnesses,
            seed: self.tuple.seed,
            elapsed_ms: self.config.timing.then(|| self.started.elapsed().as_millis() as u64),
        }
    }
}

fn start<'a>(t: &ParamTuple, config: &'a VerifyConfig) -> Result<Recorder<'a>> {
    t.validate()?;
    Ok(Recorder {
        tuple: *t,
        config,
        started: Instant::now(),
    })
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("certificate data serializes")
}

fn mono(g: &Arc<GradingMatrix>, field: &FieldDesc, pairs: &[(&str, u32)]) -> BiPoly {
    let idx: Vec<(usize, u32)> = pairs
        .iter()
        .filter(|(_, e)| *e > 0)
        .map(|(name, e)| (g.index_of(name).expect("known variable"), *e))
        .collect();
    BiPoly::monomial(g.clone(), field.clone(), Monomial::from_pairs(g.nvars(), &idx)).expect("monomial")
}

fn full_basis(b: &WpsBundle, d: (i64, i64), field: &FieldDesc) -> Vec<BiPoly> {
    enumerate_basis(b.grading(), d)
        .into_iter()
        .map(|m| BiPoly::monomial(b.grading().clone(), field.clone(), m).expect("basis monomial"))
        .collect()
}

/// `{u_i^m w^l, u_i^m x_j^l, u_i^(n+1) y^l}` on `P(n, r)`.
pub fn smooth_lemma_generators(t: &ParamTuple, field: &FieldDesc) -> Result<Vec<BiPoly>> {
    let b = standard_p(t.n, t.r)?;
    let g = b.grading();
    let (m, l) = (t.m, t.l());
    let mut out = Vec::new();
    for i in 0..=t.n - t.r {
        let u = format!("u{i}");
        out.push(mono(g, field, &[(&u, m), ("w", l)]));
        for j in 1..=t.r {
            out.push(mono(g, field, &[(&u, m), (&format!("x{j}"), l)]));
        }
        out.push(mono(g, field, &[(&u, t.n + 1), ("y", l)]));
    }
    Ok(out)
}

/// Base-point-freeness of the generator set, scanned over the prime field.
pub fn check_smooth_lemma(t: &ParamTuple, config: &VerifyConfig) -> Result<LemmaCertificate> {
    let field = make_field(t.p as u64, 1)?;
    let sections = smooth_lemma_generators(t, &field)?;
    check_base_locus(t, &sections, config)
}

pub fn check_base_locus(t: &ParamTuple, sections: &[BiPoly], config: &VerifyConfig) -> Result<LemmaCertificate> {
    let rec = start(t, config)?;
    let field = sections
        .first()
        .map(|s| s.field().clone())
        .ok_or_else(|| Error::InvalidParameters("no sections".into()))?;
    let dim = sections[0].grading().nvars() - 2;
    let q = field.order().ok_or(Error::InfiniteField)? as u128;
    let points = q.checked_pow(dim as u32).unwrap_or(u128::MAX);
    if points > config.budget {
        return Err(Error::BudgetExceeded {
            points,
            budget: config.budget,
        });
    }
    let verdict = base_locus_empty(sections, &field)?;
    let witnesses = vec![json!({
        "generators": sections.iter().map(BiPoly::render).collect::<Vec<_>>(),
        "base_locus": to_value(&verdict),
    })];
    let ok = verdict.empty && verdict.combinatorial_empty != Some(false);
    Ok(rec.finish("smooth_lemma", pass_if(ok), witnesses))
}

/// Sections on `Q` restricting to `1, ~u_i, ~z, ~x_j, ~y` on `U[u0,x1]`.
pub fn qsmooth_x_list(t: &ParamTuple, q: &WpsBundle, field: &FieldDesc) -> Vec<BiPoly> {
    let g = q.grading();
    let (m, l) = (t.m, t.l());
    let mut out = vec![mono(g, field, &[("u0", m), ("x1", l)])];
    for i in 1..=t.n - t.r {
        out.push(mono(g, field, &[(&format!("u{i}"), 1), ("u0", m - 1), ("x1", l)]));
    }
    out.push(mono(g, field, &[("u0", m), ("z", 1)]));
    for j in 2..=t.r {
        out.push(mono(g, field, &[("u0", m), (&format!("x{j}"), 1), ("x1", l - 1)]));
    }
    out.push(mono(g, field, &[("u0", m + 1), ("y", 1), ("x1", l - 1)]));
    out
}

/// Sections on `Q` restricting to `1, ~u_i, ~z, ~x_j` on `U[u0,y]`.
pub fn qsmooth_y_list(t: &ParamTuple, q: &WpsBundle, field: &FieldDesc) -> Vec<BiPoly> {
    let g = q.grading();
    let (m, l) = (t.m, t.l());
    let mut out = vec![mono(g, field, &[("u0", m + l), ("y", l)])];
    for i in 1..=t.n - t.r {
        out.push(mono(g, field, &[(&format!("u{i}"), 1), ("u0", m + l - 1), ("y", l)]));
    }
    out.push(mono(g, field, &[("u0", m), ("z", 1)]));
    for j in 1..=t.r {
        out.push(mono(
            g,
            field,
            &[("u0", m + l - 1), (&format!("x{j}"), 1), ("y", l - 1)],
        ));
    }
    out
}

fn random_center(chart: &Chart, field: &FieldDesc, rng: &mut ChaCha8Rng, zero: Option<usize>) -> Result<Vec<Elem>> {
    let mut c: Vec<Elem> = (0..chart.dim())
        .map(|_| field.random_elem(rng))
        .collect::<Result<_>>()?;
    if let Some(i) = zero {
        c[i] = field.zero();
    }
    Ok(c)
}

/// Field for jet sampling: the tuple's field, enlarged until a chart has enough points.
fn sampling_field(t: &ParamTuple, dim: usize, samples: usize) -> Result<FieldDesc> {
    let mut k = t.k;
    loop {
        let f = make_field(t.p as u64, k)?;
        let q = f.order().expect("finite") as u128;
        if q.saturating_pow(dim as u32) >= samples as u128 || k == 4 {
            return Ok(f);
        }
        k += 1;
    }
}

#[derive(Default, Serialize)]
struct SampleSummary {
    class: String,
    sections: String,
    points: usize,
    surjective: usize,
    min_rank: Option<usize>,
    target_dim: usize,
    failures: Vec<SurjectivityReport>,
}

impl SampleSummary {
    fn new(class: &str, sections: &str) -> Self {
        SampleSummary {
            class: class.into(),
            sections: sections.into(),
            ..Default::default()
        }
    }

    fn add(&mut self, rep: SurjectivityReport) {
        self.points += 1;
        self.target_dim = rep.target_dim;
        self.min_rank = Some(self.min_rank.map_or(rep.rank, |r| r.min(rep.rank)));
        if rep.surjective {
            self.surjective += 1;
        } else {
            self.failures.push(rep);
        }
    }

    fn ok(&self) -> bool {
        self.points > 0 && self.surjective == self.points
    }
}

/// Smoothness of `Q°` via `rest^2` surjectivity, and smoothness of `(a = 0)` on the base.
pub fn check_qsmooth(t: &ParamTuple, config: &VerifyConfig) -> Result<LemmaCertificate> {
    let rec = start(t, config)?;
    let q = standard_q(t.n, t.r, t.l())?;
    let field = sampling_field(t, q.dimension(), config.samples)?;
    let d = (t.m as i64, t.l() as i64);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(t.seed, 10));
    let mut witnesses = Vec::new();
    let mut ok = true;

    let basis = full_basis(&q, d, &field);
    let classes = [
        ("x", q.chart_by_names("u0", "x1")?, qsmooth_x_list(t, &q, &field)),
        ("y", q.chart_by_names("u0", "y")?, qsmooth_y_list(t, &q, &field)),
    ];
    let charts = q.charts();
    let y = q.grading().index_of("y").expect("Q has y");
    for (class, chart, list) in &classes {
        let origin = JetTarget::new(chart.clone(), vec![field.zero(); chart.dim()], 2)?;
        let witness = rest_surjective(list, &origin, &field)?;
        let full = rest_surjective(&basis, &origin, &field)?;
        ok &= witness.surjective && full.surjective;
        witnesses.push(json!({
            "class": class,
            "point": "standard",
            "sections": list.iter().map(BiPoly::render).collect::<Vec<_>>(),
            "witness": to_value(&witness),
            "full_basis_rank": full.rank,
        }));
        let mut on_chart = SampleSummary::new(class, "witness list");
        let mut anywhere = SampleSummary::new(class, "full basis");
        let class_charts: Vec<&Chart> = charts
            .iter()
            .filter(|c| (c.inverted().1 == y) == (*class == "y"))
            .collect();
        for _ in 0..config.samples {
            let center = random_center(chart, &field, &mut rng, None)?;
            on_chart.add(rest_surjective(
                list,
                &JetTarget::new(chart.clone(), center, 2)?,
                &field,
            )?);
            let other = class_charts[rng.gen_range(0..class_charts.len())];
            let center = random_center(other, &field, &mut rng, None)?;
            anywhere.add(rest_surjective(
                &basis,
                &JetTarget::new(other.clone(), center, 2)?,
                &field,
            )?);
        }
        ok &= on_chart.ok() && anywhere.ok();
        witnesses.push(to_value(&on_chart));
        witnesses.push(to_value(&anywhere));
    }

    let smooth_a = smooth_base_form(t, &field, config.max_retries)?;
    ok &= smooth_a.found;
    witnesses.push(to_value(&smooth_a));
    witnesses.push(json!({ "scope": "sampled", "field": field.describe() }));
    Ok(rec.finish("qsmooth", pass_if(ok), witnesses))
}

#[derive(Serialize)]
struct SmoothForm {
    found: bool,
    attempts: u32,
    a: Option<String>,
    points_checked: u64,
}

/// Draws `a` in `k[u]_m` until `a = 0` is smooth at every `F_q`-point of the base.
fn smooth_base_form(t: &ParamTuple, field: &FieldDesc, max_retries: u32) -> Result<SmoothForm> {
    let r = standard_r(t.n, t.r)?;
    let g = r.grading();
    let gf = field.galois().ok_or(Error::InfiniteField)?;
    let nb = g.n_base();
    let names = Arc::new(g.names()[..nb].to_vec());
    let mut checked = 0u64;
    for attempt in 0..max_retries {
        let a = random_bipoly(g, (t.m as i64, 0), field, derive_seed(t.seed, 20 + attempt as u64))?.poly;
        let mut base = LocalPoly::zero(names.clone(), field.clone());
        for (mo, c) in a.terms() {
            base.add_term(mo.exponents()[..nb].to_vec(), c.clone());
        }
        let mut polys = vec![base.clone()];
        polys.extend((0..nb).map(|j| base.partial(j)));
        let mut singular = a.is_zero();
        for i in 0..nb {
            // affine piece u_i = 1, u_k = 0 for k < i
            let free: Vec<usize> = (i + 1..nb).collect();
            let grids: Vec<Vec<u32>> = polys.iter().map(|p| piece(p, i, &free).eval_grid(gf)).collect();
            checked += grids[0].len() as u64;
            singular |= (0..grids[0].len()).any(|idx| grids.iter().all(|gr| gr[idx] == 0));
            if singular {
                break;
            }
        }
        if !singular {
            return Ok(SmoothForm {
                found: true,
                attempts: attempt + 1,
                a: Some(a.render()),
                points_checked: checked,
            });
        }
    }
    Ok(SmoothForm {
        found: false,
        attempts: max_retries,
        a: None,
        points_checked: checked,
    })
}

fn piece(p: &LocalPoly, i: usize, free: &[usize]) -> RawPoly {
    let terms = p
        .terms()
        .iter()
        .filter(|(e, _)| e[..i].iter().all(|&x| x == 0))
        .map(|(e, c)| (free.iter().map(|&k| e[k]).collect(), crate::raw::finite(c)))
        .collect();
    RawPoly {
        nvars: free.len(),
        terms,
    }
}

/// Sections on `R` restricting to `1, ~u_i, ~x_i, ~y` on `V[u0,x1]`.
pub fn rest2_list(t: &ParamTuple, r: &WpsBundle, field: &FieldDesc) -> Vec<BiPoly> {
    let g = r.grading();
    let (m, l) = (t.m, t.l());
    let mut out = vec![mono(g, field, &[("u0", m), ("x1", l)])];
    for i in 1..=t.n - t.r {
        out.push(mono(g, field, &[("u0", m - 1), (&format!("u{i}"), 1), ("x1", l)]));
    }
    for i in 2..=t.r {
        out.push(mono(g, field, &[("u0", m), (&format!("x{i}"), 1), ("x1", l - 1)]));
    }
    out.push(mono(g, field, &[("u0", m + 1), ("y", 1), ("x1", l - 1)]));
    out
}

/// The same list with the powers of `x1` replaced by powers of `x_r`, as first written
/// down; only its rank is recorded.
pub fn rest2_list_xr(t: &ParamTuple, r: &WpsBundle, field: &FieldDesc) -> Vec<BiPoly> {
    let g = r.grading();
    let (m, l) = (t.m, t.l());
    let xr = format!("x{}", t.r);
    let mut out = vec![mono(g, field, &[("u0", m), ("x1", l)])];
    for i in 1..=t.n - t.r {
        out.push(mono(g, field, &[("u0", m - 1), (&format!("u{i}"), 1), (&xr, l)]));
    }
    for i in 2..=t.r {
        let xi = format!("x{i}");
        let pairs: Vec<(&str, u32)> = if xi == xr {
            vec![("u0", m), (&xr, l)]
        } else {
            vec![("u0", m), (&xi, 1), (&xr, l - 1)]
        };
        out.push(mono(g, field, &pairs));
    }
    out.push(mono(g, field, &[("u0", m + 1), ("y", 1), (&xr, l - 1)]));
    out
}

/// `u0^(n+1-|A|-|B|) u^A x^B y^(l-|B|)` for `|A| + |B| <= 3`, restricting to the
/// monomials of degree `<= 3` on `V[u0,y]`.
pub fn rest4_families(t: &ParamTuple, r: &WpsBundle, field: &FieldDesc) -> Vec<BiPoly> {
    let g = r.grading();
    let nb = g.n_base();
    let y = g.index_of("y").expect("R has y");
    // chart coordinates of V[u0,y]: u1..u_{n-r}, x1..x_r
    let coords: Vec<usize> = (1..g.nvars()).filter(|&v| v != y).collect();
    let mut out = Vec::new();
    for deg in 0..=3u32 {
        for e in monomials_of_degree(coords.len(), deg) {
            let mut ex = vec![0u32; g.nvars()];
            let mut b = 0;
            for (&v, &k) in coords.iter().zip(&e) {
                ex[v] = k;
                if v >= nb {
                    b += k;
                }
            }
            ex[0] = t.n + 1 - deg;
            ex[y] = t.l() - b;
            out.push(BiPoly::monomial(g.clone(), field.clone(), Monomial::new(ex)).expect("bidegree (m, l)"));
        }
    }
    out
}

/// The x-bearing families exactly as first written down, with their bidegrees; they
/// are not of bidegree `(m, l)`.
pub fn rest4_literal_families(t: &ParamTuple) -> Result<Vec<(String, (i64, i64))>> {
    let r = standard_r(t.n, t.r)?;
    let g = r.grading();
    let (n, l) = (t.n, t.l());
    let mut texts = vec![
        format!("u0^{}*x1*y^{}", n + 1, l - 1),
        format!("u0^{n}*u1*x1*y^{}", l - 1),
        format!("u0^{}*x1^2*y^{}", n + 1, l - 2),
        format!("u0^{}*u1^2*x1*y^{}", n - 1, l - 1),
        format!("u0^{n}*u1*x1^2*y^{}", l - 2),
    ];
    if l >= 3 {
        texts.push(format!("u0^{}*x1^3*y^{}", n + 1, l - 3));
    }
    texts
        .into_iter()
        .map(|s| {
            let m = Monomial::parse(&s, g.names())?;
            Ok((s, bidegree_of(&m, g)?))
        })
        .collect()
}

/// `rest^2` on `Gamma` and `rest^4` on `V_y`, for the witness families and the full basis.
pub fn check_rest_r(t: &ParamTuple, config: &VerifyConfig) -> Result<LemmaCertificate> {
    let rec = start(t, config)?;
    if t.l() < 3 {
        return Ok(rec.finish(
            "restR",
            Verdict::Skipped {
                reason: "l = 2: conic bundle case, settled by a cited theorem".into(),
                cited: true,
            },
            vec![],
        ));
    }
    let r = standard_r(t.n, t.r)?;
    let field = sampling_field(t, r.dimension(), config.samples)?;
    let d = (t.m as i64, t.l() as i64);
    let basis = full_basis(&r, d, &field);
    let y = r.grading().index_of("y").expect("R has y");
    let charts = r.charts();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(t.seed, 30));
    let mut witnesses = Vec::new();
    let mut ok = true;

    // part 1: Gamma = (y = 0), covered by the x-charts
    let c01 = r.chart_by_names("u0", "x1")?;
    let ycoord = c01.coordinate_of_var(y).expect("y is a coordinate on x-charts");
    let list = rest2_list(t, &r, &field);
    let literal = rest2_list_xr(t, &r, &field);
    let origin = JetTarget::new(c01.clone(), vec![field.zero(); c01.dim()], 2)?;
    let witness = rest_surjective(&list, &origin, &field)?;
    let full = rest_surjective(&basis, &origin, &field)?;
    let literal_rank = rest_surjective(&literal, &origin, &field)?.rank;
    ok &= witness.surjective && full.surjective;
    witnesses.push(json!({
        "part": 1,
        "point": "standard",
        "sections": list.iter().map(BiPoly::render).collect::<Vec<_>>(),
        "witness": to_value(&witness),
        "witness_rank": witness.rank,
        "full_basis_rank": full.rank,
        "target_dim": witness.target_dim,
        "xr_list": literal.iter().map(BiPoly::render).collect::<Vec<_>>(),
        "xr_list_rank": literal_rank,
    }));
    let x_charts: Vec<&Chart> = charts.iter().filter(|c| c.inverted().1 != y).collect();
    let mut on_chart = SampleSummary::new("gamma", "witness list");
    let mut anywhere = SampleSummary::new("gamma", "full basis");
    for _ in 0..config.samples {
        let center = random_center(&c01, &field, &mut rng, Some(ycoord))?;
        on_chart.add(rest_surjective(
            &list,
            &JetTarget::new(c01.clone(), center, 2)?,
            &field,
        )?);
        let other = x_charts[rng.gen_range(0..x_charts.len())];
        let yc = other.coordinate_of_var(y);
        let center = random_center(other, &field, &mut rng, yc)?;
        anywhere.add(rest_surjective(
            &basis,
            &JetTarget::new(other.clone(), center, 2)?,
            &field,
        )?);
    }
    ok &= on_chart.ok() && anywhere.ok();
    witnesses.push(to_value(&on_chart));
    witnesses.push(to_value(&anywhere));

    // part 2: V_y = (y != 0), covered by the y-charts
    let c0y = r.chart_by_names("u0", "y")?;
    let families = rest4_families(t, &r, &field);
    let origin = JetTarget::new(c0y.clone(), vec![field.zero(); c0y.dim()], 4)?;
    let witness = rest_surjective(&families, &origin, &field)?;
    let full = rest_surjective(&basis, &origin, &field)?;
    ok &= witness.surjective && full.surjective;
    let literal: Vec<Value> = rest4_literal_families(t)?
        .into_iter()
        .map(|(s, d)| json!({ "monomial": s, "bidegree": [d.0, d.1] }))
        .collect();
    witnesses.push(json!({
        "part": 2,
        "point": "standard",
        "families": families.len(),
        "witness": to_value(&witness),
        "witness_rank": witness.rank,
        "full_basis_rank": full.rank,
        "target_dim": witness.target_dim,
        "literal_x_families": literal,
    }));
    let y_charts: Vec<&Chart> = charts.iter().filter(|c| c.inverted().1 == y).collect();
    let mut on_chart = SampleSummary::new("v_y", "witness families");
    let mut anywhere = SampleSummary::new("v_y", "full basis");
    for _ in 0..config.samples {
        let center = random_center(&c0y, &field, &mut rng, None)?;
        on_chart.add(rest_surjective(
            &families,
            &JetTarget::new(c0y.clone(), center, 4)?,
            &field,
        )?);
        let other = y_charts[rng.gen_range(0..y_charts.len())];
        let center = random_center(other, &field, &mut rng, None)?;
        anywhere.add(rest_surjective(
            &basis,
            &JetTarget::new(other.clone(), center, 4)?,
            &field,
        )?);
    }
    ok &= on_chart.ok() && anywhere.ok();
    witnesses.push(to_value(&on_chart));
    witnesses.push(to_value(&anywhere));
    witnesses.push(json!({ "scope": "sampled", "field": field.describe() }));
    Ok(rec.finish("restR", pass_if(ok), witnesses))
}

/// `a^p z + a^(p-1) f = a^(p-1) (a z + f)` for random `(a, f)`.
pub fn check_cover_identity(t: &ParamTuple, config: &VerifyConfig) -> Result<LemmaCertificate> {
    let rec = start(t, config)?;
    let field = t.field()?;
    let r = standard_r(t.n, t.r)?;
    let q = standard_q(t.n, t.r, t.l())?;
    let mut failures = Vec::new();
    for i in 0..config.cover_pairs as u64 {
        let a = random_bipoly(r.grading(), (t.m as i64, 0), &field, derive_seed(t.seed, 1000 + 2 * i))?.poly;
        let f = random_bipoly(
            r.grading(),
            (t.m as i64, t.l() as i64),
            &field,
            derive_seed(t.seed, 1001 + 2 * i),
        )?
        .poly;
        let residual = cover_identity_residual(&a, &f, t.p, &q)?;
        if !residual.is_zero() {
            failures.push(json!({ "pair": i, "residual_terms": residual.len() }));
        }
    }
    let witnesses = vec![json!({
        "pairs": config.cover_pairs,
        "failures": failures,
        "field": field.describe(),
    })];
    Ok(rec.finish("cover_identity", pass_if(failures.is_empty()), witnesses))
}

/// Largest `k <= 4` with `p^(k n) <= budget`.
pub fn census_extension(t: &ParamTuple, budget: u128) -> Option<u32> {
    (1..=4u32)
        .rev()
        .find(|&k| (t.p as u128).checked_pow(k * t.n).is_some_and(|pts| pts <= budget))
}

pub fn check_census(t: &ParamTuple, config: &VerifyConfig) -> Result<LemmaCertificate> {
    let rec = start(t, config)?;
    if t.is_conic_bundle_case() {
        return Ok(rec.finish(
            "census",
            Verdict::Skipped {
                reason: "l = 2: conic bundle case, settled by a cited theorem".into(),
                cited: true,
            },
            vec![],
        ));
    }
    let k = match config.census_k.or_else(|| census_extension(t, config.budget)) {
        Some(k) => k,
        None => {
            let points = (t.p as u128).checked_pow(t.n).unwrap_or(u128::MAX);
            return Err(Error::BudgetExceeded {
                points,
                budget: config.budget,
            });
        }
    };
    let params = CensusParams {
        n: t.n,
        m: t.m,
        r: t.r,
        p: t.p,
        k,
        seed: t.seed,
    };
    let cfg = CensusConfig {
        budget: config.budget,
        mu: config.mu,
        max_retries: config.max_retries,
        ..CensusConfig::default()
    };
    let report = census(params, &cfg)?;
    Ok(rec.finish("census", pass_if(report.pass), vec![to_value(&report)]))
}

/// `O(-lambda, lambda)` has the section `y^lambda`, and the piece `(-lambda-m, lambda-l)`
/// that could absorb multiples of the defining equation is empty.
pub fn check_form_sections(t: &ParamTuple, config: &VerifyConfig) -> Result<LemmaCertificate> {
    let rec = start(t, config)?;
    let p = standard_p(t.n, t.r)?;
    let g = p.grading();
    let lambda = t.lambda() as i64;
    let (m, l) = (t.m as i64, t.l() as i64);
    let basis = enumerate_basis(g, (-lambda, lambda));
    let y_lambda = Monomial::from_pairs(g.nvars(), &[(g.index_of("y").unwrap(), lambda as u32)]);
    let correction = enumerate_basis(g, (-lambda - m, lambda - l));
    let ok = !basis.is_empty() && basis.contains(&y_lambda) && correction.is_empty();
    let witnesses = vec![json!({
        "lambda": lambda,
        "basis": basis.iter().map(|mo| mo.render(g.names())).collect::<Vec<_>>(),
        "dimension": basis.len(),
        "correction_bidegree": [-lambda - m, lambda - l],
        "correction_dimension": correction.len(),
    })];
    Ok(rec.finish("form_sections", pass_if(ok), witnesses))
}

/// Monomials of degree `n + 1` in `w, x_1..x_r, y_0..y_(n-r)` with `y`-degree `>= m`.
pub fn blowup_count(n: u32, m: u32, r: u32) -> u128 {
    use crate::jets::binomial;
    (m..=n + 1)
        .map(|d| binomial((d + n - r) as u64, (n - r) as u64) * binomial((n + 1 - d + r) as u64, r as u64))
        .sum()
}

pub fn check_blowup_dim(t: &ParamTuple, config: &VerifyConfig) -> Result<LemmaCertificate> {
    let rec = start(t, config)?;
    let p = standard_p(t.n, t.r)?;
    let cox = enumerate_basis(p.grading(), (t.m as i64, t.l() as i64)).len() as u128;
    let blowup = blowup_count(t.n, t.m, t.r);
    let witnesses = vec![json!({ "cox_dimension": cox, "blowup_dimension": blowup })];
    Ok(rec.finish("blowup_dim", pass_if(cox == blowup), witnesses))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theorem2Row {
    pub n: u32,
    pub e: u32,
    pub admissible_r: Vec<u32>,
    /// `n - r + 1 > 2^r` and `n >= 2^e + e >= 2 + r` for every admissible `r`.
    pub inequalities_hold: bool,
}

/// `e(n) = max { l : 2^l + l <= n }`.
pub fn theorem2_arith(n: u32) -> Result<Theorem2Row> {
    if n < 3 {
        return Err(Error::InvalidParameters(format!("need n >= 3, got {n}")));
    }
    let e = (0..32u32)
        .take_while(|&l| (1u64 << l) + l as u64 <= n as u64)
        .last()
        .unwrap_or(0);
    let admissible_r: Vec<u32> = (1..=e).collect();
    let n64 = n as u64;
    let chain = n64 >= (1u64 << e) + e as u64;
    let inequalities_hold = admissible_r
        .iter()
        .all(|&r| n64 - r as u64 + 1 > 1u64 << r && chain && (1u64 << e) + e as u64 >= 2 + r as u64);
    Ok(Theorem2Row {
        n,
        e,
        admissible_r,
        inequalities_hold,
    })
}

pub fn check_theorem2(t: &ParamTuple, config: &VerifyConfig) -> Result<LemmaCertificate> {
    let rec = start(t, config)?;
    let row = theorem2_arith(t.n)?;
    let ok = row.inequalities_hold;
    Ok(rec.finish("theorem2_arith", pass_if(ok), vec![to_value(&row)]))
}

/// A bidegree piece of a Cox ring, listed in descending lex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisListing {
    pub bundle: String,
    pub bidegree: (i64, i64),
    pub dimension: usize,
    pub monomials: Vec<String>,
}

pub fn basis_listing(b: &WpsBundle, d: (i64, i64)) -> BasisListing {
    let monomials: Vec<String> = enumerate_basis(b.grading(), d)
        .iter()
        .map(|mo| mo.render(b.grading().names()))
        .collect();
    BasisListing {
        bundle: b.name().to_string(),
        bidegree: d,
        dimension: monomials.len(),
        monomials,
    }
}

type Check = fn(&ParamTuple, &VerifyConfig) -> Result<LemmaCertificate>;

/// Lemma ids in execution order.
pub const LEMMA_IDS: [&str; 8] = [
    "smooth_lemma",
    "qsmooth",
    "restR",
    "cover_identity",
    "census",
    "form_sections",
    "blowup_dim",
    "theorem2_arith",
];

/// Runs every check. A budget overrun turns into an uncited skip; any other error is a
/// failure carrying the error text.
pub fn run_all(t: &ParamTuple, config: &VerifyConfig) -> Result<TupleReport> {
    t.validate()?;
    let checks: [Check; 8] = [
        check_smooth_lemma,
        check_qsmooth,
        check_rest_r,
        check_cover_identity,
        check_census,
        check_form_sections,
        check_blowup_dim,
        check_theorem2,
    ];
    let mut certificates = Vec::new();
    for (id, check) in LEMMA_IDS.iter().zip(checks) {
        let started = Instant::now();
        let cert = match check(t, config) {
            Ok(c) => c,
            Err(err) => {
                let verdict = match err {
                    Error::BudgetExceeded { .. } => Verdict::Skipped {
                        reason: err.to_string(),
                        cited: false,
                    },
                    _ => Verdict::Fail,
                };
                LemmaCertificate {
                    tool_version: TOOL_VERSION.to_string(),
                    tuple: *t,
                    lemma_id: id.to_string(),
                    verdict,
                    witnesses: vec![json!({ "error": err.to_string() })],
                    seed: t.seed,
                    elapsed_ms: config.timing.then(|| started.elapsed().as_millis() as u64),
                }
            }
        };
        certificates.push(cert);
    }
    let mut notes = Vec::new();
    if t.is_known_case() {
        notes.push("(m, r) = (n - 2, 2) is also settled by a cited result; all checks were run".into());
    }
    if t.is_conic_bundle_case() {
        notes.push("l = 2 is the conic bundle case, settled by a cited theorem".into());
    }
    let overall = if certificates.iter().any(|c| c.verdict == Verdict::Fail) {
        Overall::Fail
    } else if certificates
        .iter()
        .any(|c| matches!(c.verdict, Verdict::Skipped { cited: false, .. }))
    {
        Overall::Incomplete
    } else {
        Overall::Pass
    };
    Ok(TupleReport {
        tool_version: TOOL_VERSION.to_string(),
        tuple: *t,
        overall,
        notes,
        certificates,
    })
}

/// `run_all` over many tuples on up to `jobs` threads; results keep the input order.
pub fn sweep(tuples: &[ParamTuple], config: &VerifyConfig, jobs: usize) -> Result<Vec<TupleReport>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidParameters(e.to_string()))?;
    pool.install(|| tuples.par_iter().map(|t| run_all(t, config)).collect())
}

pub fn certificate_file_name(t: &ParamTuple) -> String {
    format!("tuple_{}.json", t.label())
}

pub fn render_report(report: &TupleReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Writes one file per tuple into `dir`, sequentially.
pub fn write_certificates(reports: &[TupleReport], dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    reports
        .iter()
        .map(|rep| {
            let path = dir.join(certificate_file_name(&rep.tuple));
            fs::write(&path, render_report(rep))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::jet_dimension;

    fn quick() -> VerifyConfig {
        VerifyConfig {
            samples: 5,
            cover_pairs: 5,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn tuple_validation() {
        assert!(ParamTuple::new(4, 2, 1, 3, 0).is_ok());
        assert_eq!(ParamTuple::new(4, 2, 1, 3, 0).unwrap().k, 2);
        assert_eq!(ParamTuple::new(5, 2, 1, 2, 0).unwrap().k, 4);
        assert!(ParamTuple::new(4, 2, 1, 2, 0).is_err());
        assert!(ParamTuple::new(4, 3, 2, 2, 0).is_err());
        assert!(ParamTuple::new(4, 0, 1, 5, 0).is_err());
        assert!(ParamTuple::new(4, 2, 1, 4, 0).is_err());
    }

    #[test]
    fn grid_shape() {
        let all = grid(3, 6, 2, 0);
        assert!(all.iter().all(|t| t.n >= t.m + t.r && t.l() % t.p == 0));
        assert_eq!(grid(3, 6, 3, 0).len(), 30);
        assert!(all.iter().any(|t| t.is_conic_bundle_case()));
    }

    #[test]
    fn theorem2_examples() {
        assert_eq!(theorem2_arith(3).unwrap().e, 1);
        assert_eq!(theorem2_arith(6).unwrap().e, 2);
        assert_eq!(theorem2_arith(11).unwrap().e, 3);
        assert!(theorem2_arith(2).is_err());
        let mut prev = 0;
        for n in 3..=100 {
            let row = theorem2_arith(n).unwrap();
            assert!(row.e >= prev && row.inequalities_hold);
            prev = row.e;
        }
    }

    #[test]
    fn blowup_examples() {
        assert_eq!(blowup_count(3, 1, 1), 65);
        let t = ParamTuple::new(3, 1, 1, 3, 0).unwrap();
        let c = check_blowup_dim(&t, &quick()).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
        assert_eq!(c.witnesses[0]["cox_dimension"], 65);
    }

    #[test]
    fn form_section_examples() {
        let t = ParamTuple::new(5, 2, 1, 2, 0).unwrap();
        let c = check_form_sections(&t, &quick()).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
        assert_eq!(c.witnesses[0]["lambda"], 2);
        assert!(c.witnesses[0]["basis"].as_array().unwrap().iter().any(|v| v == "y^2"));
        let t = ParamTuple::new(3, 1, 2, 3, 0).unwrap();
        let c = check_form_sections(&t, &quick()).unwrap();
        assert_eq!(c.witnesses[0]["dimension"], 1);
    }

    #[test]
    fn smooth_lemma_and_adversarial_input() {
        let t = ParamTuple::new(3, 1, 1, 3, 0).unwrap();
        assert_eq!(check_smooth_lemma(&t, &quick()).unwrap().verdict, Verdict::Pass);
        let field = make_field(3, 1).unwrap();
        let y = standard_p(3, 1).unwrap().grading().index_of("y").unwrap();
        let without_y: Vec<BiPoly> = smooth_lemma_generators(&t, &field)
            .unwrap()
            .into_iter()
            .filter(|s| s.terms().keys().next().unwrap().exponents()[y] == 0)
            .collect();
        let c = check_base_locus(&t, &without_y, &quick()).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        let witness = c.witnesses[0]["base_locus"]["witness"].as_str().unwrap();
        assert!(witness.contains("; 0:0:"));
        let t = ParamTuple::new(4, 2, 2, 3, 0).unwrap();
        assert_eq!(check_smooth_lemma(&t, &quick()).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn witness_lists_have_the_right_size_and_degree() {
        let t = ParamTuple::new(5, 2, 2, 2, 0).unwrap();
        let f = t.field().unwrap();
        let q = standard_q(t.n, t.r, t.l()).unwrap();
        assert_eq!(qsmooth_x_list(&t, &q, &f).len() as u32, t.n + 2);
        assert_eq!(qsmooth_y_list(&t, &q, &f).len() as u32, t.n + 2);
        let r = standard_r(t.n, t.r).unwrap();
        assert_eq!(rest2_list(&t, &r, &f).len() as u32, t.n + 1);
        let fam = rest4_families(&t, &r, &f);
        assert_eq!(fam.len(), jet_dimension(t.n as usize, 4));
        assert!(fam.iter().all(|s| s.bidegree() == (2, 4)));
        let literal = rest4_literal_families(&t).unwrap();
        assert!(literal.iter().all(|(_, d)| *d != (2, 4)));
    }

    #[test]
    fn qsmooth_and_rest_r_pass() {
        let t = ParamTuple::new(4, 2, 1, 3, 42).unwrap();
        let c = check_qsmooth(&t, &quick()).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
        assert_eq!(c.witnesses[0]["witness"]["rank"], 6);
        let c = check_rest_r(&t, &quick()).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
        assert_eq!(c.witnesses[0]["witness_rank"], 5);
        let t2 = ParamTuple::new(4, 3, 1, 2, 0).unwrap();
        let c = check_rest_r(&t2, &quick()).unwrap();
        assert!(matches!(c.verdict, Verdict::Skipped { cited: true, .. }));
    }

    #[test]
    fn xr_list_rank_depends_on_r() {
        let t = ParamTuple::new(5, 2, 1, 2, 0).unwrap();
        let c = check_rest_r(&t, &quick()).unwrap();
        assert_eq!(c.witnesses[0]["xr_list_rank"], 6);
        let t = ParamTuple::new(5, 2, 2, 2, 0).unwrap();
        let c = check_rest_r(&t, &quick()).unwrap();
        assert_eq!(c.witnesses[0]["xr_list_rank"], 1);
    }

    #[test]
    fn run_all_is_deterministic() {
        let t = ParamTuple::new(4, 2, 1, 3, 42).unwrap();
        let a = run_all(&t, &quick()).unwrap();
        let b = run_all(&t, &quick()).unwrap();
        assert_eq!(render_report(&a), render_report(&b));
        assert_eq!(a.certificates.len(), LEMMA_IDS.len());
        assert!(a.certificates.iter().all(|c| c.elapsed_ms.is_none()));
    }

    #[test]
    fn budget_overrun_is_incomplete() {
        let t = ParamTuple::new(4, 2, 1, 3, 1).unwrap();
        let cfg = VerifyConfig { budget: 10, ..quick() };
        let rep = run_all(&t, &cfg).unwrap();
        assert_eq!(rep.overall, Overall::Incomplete);
        let census = rep.certificate("census").unwrap();
        assert!(matches!(census.verdict, Verdict::Skipped { cited: false, .. }));
    }

    #[test]
    fn certificates_are_written_per_tuple() {
        let dir = tempfile::tempdir().unwrap();
        let tuples = [
            ParamTuple::new(3, 1, 1, 3, 0).unwrap(),
            ParamTuple::new(3, 1, 2, 3, 0).unwrap(),
        ];
        let cfg = VerifyConfig {
            census_k: Some(1),
            ..quick()
        };
        let reports = sweep(&tuples, &cfg, 2).unwrap();
        let paths = write_certificates(&reports, dir.path()).unwrap();
        assert_eq!(paths.len(), 2);
        let back: TupleReport = serde_json::from_str(&fs::read_to_string(&paths[0]).unwrap()).unwrap();
        assert_eq!(back, reports[0]);
    }
}
