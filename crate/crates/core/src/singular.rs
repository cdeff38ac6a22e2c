//! Critical points of sections in characteristic `p`, their admissibility, and the
//! randomized census over the charts of `R(n, r)`.
//!
//! A critical point of a local equation `f = alpha + l + q + g` is a point with `l = 0`.
//! Admissibility depends on the characteristic, the parity of the chart dimension and
//! the covering degree `mu`:
//!
//! * `p != 2` or `n` even: the quadratic part is nondegenerate (Hessian for odd `p`,
//!   polar bilinear form for `p = 2`).
//! * `p = 2`, `n` odd: the Jacobian algebra `F[x]/(df)` has length 2, computed modulo
//!   `m^4` and confirmed modulo `m^5`. When `4 | mu` the quadric `q = 0` must also be
//!   smooth: the polar form has rank `n - 1` and `q` is nonzero on its radical.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::{localize, standard_q, standard_r, LocalPoly, WpsBundle};
use crate::cox::{derive_seed, random_bipoly, BiPoly, GradingMatrix};
use crate::error::{Error, Result};
use crate::field::{is_prime, make_field, DenseMatrix, Elem, FieldDesc};
use crate::jets::{jet_basis, taylor_terms};
use crate::raw::{grid_point, RawPoly};

/// Per-stratum point budget used unless overridden.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

/// Jacobian-algebra truncation order and its stabilization order.
pub const LENGTH_ORDERS: (u32, u32) = (4, 5);

/// `f = alpha + l + q + g` around a center, with `g` truncated above degree `order`.
#[derive(Clone, Debug)]
pub struct LocalExpansion {
    field: FieldDesc,
    nvars: usize,
    order: u32,
    pub constant: Elem,
    pub linear: Vec<Elem>,
    /// Coefficients of `x_i^2`.
    pub quad_diag: Vec<Elem>,
    /// Coefficients of `x_i x_j` for `i < j`.
    pub quad_off: BTreeMap<(usize, usize), Elem>,
    /// Terms of degree `3..=order`.
    pub higher: BTreeMap<Vec<u32>, Elem>,
}

impl LocalExpansion {
    /// Expansion of `p` at `center` keeping every term of degree `<= order`.
    pub fn new(p: &LocalPoly, center: &[Elem], order: u32) -> Result<Self> {
        if order < 2 {
            return Err(Error::JetOrder(order));
        }
        let terms = taylor_terms(p, center, order + 1)?;
        Ok(Self::from_terms(p.field().clone(), p.nvars(), order, terms))
    }

    fn from_terms(field: FieldDesc, nvars: usize, order: u32, terms: BTreeMap<Vec<u32>, Elem>) -> Self {
        let mut e = LocalExpansion {
            constant: field.zero(),
            linear: vec![field.zero(); nvars],
            quad_diag: vec![field.zero(); nvars],
            quad_off: BTreeMap::new(),
            higher: BTreeMap::new(),
            field,
            nvars,
            order,
        };
        for (m, c) in terms {
            let deg: u32 = m.iter().sum();
            let support: Vec<usize> = (0..nvars).filter(|&i| m[i] > 0).collect();
            match deg {
                0 => e.constant = c,
                1 => e.linear[support[0]] = c,
                2 if support.len() == 1 => e.quad_diag[support[0]] = c,
                2 => {
                    e.quad_off.insert((support[0], support[1]), c);
                }
                d if d <= order => {
                    e.higher.insert(m, c);
                }
                _ => {}
            }
        }
        e
    }

    pub fn field(&self) -> &FieldDesc {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_critical(&self) -> bool {
        self.linear.iter().all(|c| self.field.is_zero(c))
    }

    pub fn quad(&self, i: usize, j: usize) -> Elem {
        if i == j {
            self.quad_diag[i].clone()
        } else {
            let key = (i.min(j), i.max(j));
            self.quad_off.get(&key).cloned().unwrap_or_else(|| self.field.zero())
        }
    }

    /// `alpha + l + q + g` as a single term map.
    pub fn reassemble(&self) -> BTreeMap<Vec<u32>, Elem> {
        let n = self.nvars;
        let f = &self.field;
        let mut out = BTreeMap::new();
        let mut put = |e: Vec<u32>, c: &Elem| {
            if !f.is_zero(c) {
                out.insert(e, c.clone());
            }
        };
        put(vec![0; n], &self.constant);
        for i in 0..n {
            let mut e = vec![0; n];
            e[i] = 1;
            put(e.clone(), &self.linear[i]);
            e[i] = 2;
            put(e, &self.quad_diag[i]);
        }
        for (&(i, j), c) in &self.quad_off {
            let mut e = vec![0; n];
            e[i] = 1;
            e[j] = 1;
            put(e, c);
        }
        for (e, c) in &self.higher {
            put(e.clone(), c);
        }
        out
    }

    pub fn to_local_poly(&self) -> LocalPoly {
        let mut p = LocalPoly::zero_in(self.nvars, self.field.clone());
        for (e, c) in self.reassemble() {
            p.add_term(e, c);
        }
        p
    }

    /// Matrix of second derivatives: `H_ii = 2 q_ii`, `H_ij = q_ij`.
    pub fn hessian(&self) -> DenseMatrix {
        let f = &self.field;
        let n = self.nvars;
        let mut h = DenseMatrix::zeros(f.clone(), n, n);
        for i in 0..n {
            for j in 0..n {
                let v = if i == j {
                    f.mul(&f.from_i64(2), &self.quad_diag[i])
                } else {
                    self.quad(i, j)
                };
                h.set(i, j, v);
            }
        }
        h
    }

    /// Polar bilinear form `b(x, y) = q(x + y) - q(x) - q(y)`; its diagonal is `2 q_ii`.
    pub fn polar_form(&self) -> DenseMatrix {
        self.hessian()
    }

    pub fn quad_value(&self, v: &[Elem]) -> Elem {
        let f = &self.field;
        let mut acc = f.zero();
        for i in 0..self.nvars {
            for j in i..self.nvars {
                let c = self.quad(i, j);
                if !f.is_zero(&c) {
                    acc = f.add(&acc, &f.mul(&c, &f.mul(&v[i], &v[j])));
                }
            }
        }
        acc
    }

    /// `dim F[x] / (df/dx_1, ..., df/dx_n, m^d)`; needs `order >= d`.
    pub fn jacobian_length(&self, d: u32) -> Result<usize> {
        if d > self.order {
            return Err(Error::JetOrder(d));
        }
        let n = self.nvars;
        let f = &self.field;
        let basis = jet_basis(n, d);
        let index: BTreeMap<&Vec<u32>, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let poly = self.to_local_poly();
        let mut rows = Vec::new();
        for i in 0..n {
            let partial: Vec<(Vec<u32>, Elem)> = poly
                .partial(i)
                .terms()
                .iter()
                .filter(|(e, _)| e.iter().sum::<u32>() < d)
                .map(|(e, c)| (e.clone(), c.clone()))
                .collect();
            if partial.is_empty() {
                continue;
            }
            for shift in &basis {
                let mut row = vec![f.zero(); basis.len()];
                let mut any = false;
                for (e, c) in &partial {
                    let prod: Vec<u32> = e.iter().zip(shift).map(|(a, b)| a + b).collect();
                    if let Some(&col) = index.get(&prod) {
                        row[col] = f.add(&row[col], c);
                        any = true;
                    }
                }
                if any {
                    rows.push(row);
                }
            }
        }
        if rows.is_empty() {
            return Ok(basis.len());
        }
        let rank = DenseMatrix::from_rows(f.clone(), rows)?.row_basis().len();
        Ok(basis.len() - rank)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AdmissibilityStatus {
    NotCritical,
    Admissible,
    NotAdmissible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CaseTag {
    OddPOrEvenN,
    Char2OddN4Nmid,
    Char2OddN4Mid,
}

impl CaseTag {
    pub fn of(p: u64, n: usize, mu: u32) -> CaseTag {
        if p != 2 || n.is_multiple_of(2) {
            CaseTag::OddPOrEvenN
        } else if !mu.is_multiple_of(4) {
            CaseTag::Char2OddN4Nmid
        } else {
            CaseTag::Char2OddN4Mid
        }
    }

    /// Expansion order needed to classify in this case.
    pub fn required_order(self) -> u32 {
        match self {
            CaseTag::OddPOrEvenN => 2,
            _ => LENGTH_ORDERS.1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub hessian_rank: Option<usize>,
    pub polar_rank: Option<usize>,
    /// Jacobian-algebra length modulo `m^4` and `m^5`.
    pub length: Option<(usize, usize)>,
    pub quadric_smooth: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub status: AdmissibilityStatus,
    pub case: CaseTag,
    pub mu: u32,
    pub diagnostics: Diagnostics,
}

/// Classifies a critical point; `e` must have vanishing linear part.
pub fn classify(e: &LocalExpansion, mu: u32) -> Result<AdmissibilityVerdict> {
    if !e.is_critical() {
        return Err(Error::NotCritical);
    }
    let p = e.field.characteristic();
    let n = e.nvars;
    let case = CaseTag::of(p, n, mu);
    if e.order < case.required_order() {
        return Err(Error::JetOrder(e.order));
    }
    let mut diag = Diagnostics::default();
    let ok = match case {
        CaseTag::OddPOrEvenN if p != 2 => {
            let rank = e.hessian().row_basis().len();
            diag.hessian_rank = Some(rank);
            rank == n
        }
        CaseTag::OddPOrEvenN => {
            let rank = e.polar_form().row_basis().len();
            diag.polar_rank = Some(rank);
            rank == n
        }
        CaseTag::Char2OddN4Nmid | CaseTag::Char2OddN4Mid => {
            let lengths = (e.jacobian_length(LENGTH_ORDERS.0)?, e.jacobian_length(LENGTH_ORDERS.1)?);
            diag.length = Some(lengths);
            let length_ok = lengths == (2, 2);
            if case == CaseTag::Char2OddN4Mid {
                let polar = e.polar_form();
                let rank = polar.row_basis().len();
                diag.polar_rank = Some(rank);
                let smooth = rank == n - 1 && {
                    let radical = polar.kernel();
                    radical.len() == 1 && !e.field.is_zero(&e.quad_value(&radical[0]))
                };
                diag.quadric_smooth = Some(smooth);
                length_ok && smooth
            } else {
                length_ok
            }
        }
    };
    Ok(AdmissibilityVerdict {
        status: if ok {
            AdmissibilityStatus::Admissible
        } else {
            AdmissibilityStatus::NotAdmissible
        },
        case,
        mu,
        diagnostics: diag,
    })
}

/// Classification at an arbitrary point, reporting `NOT_CRITICAL` instead of failing.
pub fn classify_at(p: &LocalPoly, center: &[Elem], mu: u32) -> Result<AdmissibilityVerdict> {
    let case = CaseTag::of(p.field().characteristic(), p.nvars(), mu);
    let e = LocalExpansion::new(p, center, case.required_order())?;
    if !e.is_critical() {
        return Ok(AdmissibilityVerdict {
            status: AdmissibilityStatus::NotCritical,
            case,
            mu,
            diagnostics: Diagnostics::default(),
        });
    }
    classify(&e, mu)
}

fn check_budget(q: u64, dim: usize, budget: u128) -> Result<u128> {
    let points = (q as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if points > budget {
        return Err(Error::BudgetExceeded { points, budget });
    }
    Ok(points)
}

/// Grid indices where every polynomial vanishes and `nonzero` (if given) does not.
fn common_zeros(polys: &[RawPoly], nonzero: Option<&RawPoly>, g: &crate::field::GaloisField, dim: usize) -> Vec<usize> {
    let total = (g.order() as usize).pow(dim as u32);
    let mut mask = match nonzero {
        Some(a) => a.eval_grid(g).into_iter().map(|v| v != 0).collect(),
        None => vec![true; total],
    };
    for p in polys {
        if p.terms.is_empty() {
            continue;
        }
        if !mask.iter().any(|&b| b) {
            break;
        }
        let grid = p.eval_grid(g);
        for (m, v) in mask.iter_mut().zip(grid) {
            *m = *m && v == 0;
        }
    }
    mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// Every point of `F_q^n` where all first partials of `p` vanish.
pub fn critical_points(p: &LocalPoly, budget: u128) -> Result<Vec<Vec<Elem>>> {
    let g = p.field().galois().ok_or(Error::InfiniteField)?;
    let n = p.nvars();
    check_budget(g.order() as u64, n, budget)?;
    let partials: Vec<RawPoly> = (0..n).map(|i| RawPoly::from_local(&p.partial(i))).collect();
    Ok(common_zeros(&partials, None, g, n)
        .into_iter()
        .map(|idx| {
            grid_point(idx, n, g.order() as usize)
                .into_iter()
                .map(Elem::Finite)
                .collect()
        })
        .collect())
}

/// `a^(p-1) f`, of bidegree `(p m, l)`.
pub fn cover_transform(a: &BiPoly, f: &BiPoly, p: u32) -> Result<BiPoly> {
    let (m, zero) = a.bidegree();
    if zero != 0 || m < 1 {
        return Err(Error::InvalidParameters(format!(
            "a must have bidegree (m, 0) with m >= 1, got {:?}",
            a.bidegree()
        )));
    }
    if f.bidegree().0 != m {
        return Err(Error::BidegreeMismatch {
            left: a.bidegree(),
            right: f.bidegree(),
        });
    }
    if p < 2 {
        return Err(Error::NotPrime(p as u64));
    }
    a.pow(p - 1).mul(f)
}

/// `a^p z + a^(p-1) f - a^(p-1) (a z + f)` on `Q`, which must be the zero polynomial.
pub fn cover_identity_residual(a: &BiPoly, f: &BiPoly, p: u32, q: &WpsBundle) -> Result<BiPoly> {
    let g = q.grading().clone();
    let z = BiPoly::parse_monomial(g.clone(), a.field().clone(), "z")?;
    let a_q = a.embed(g.clone())?;
    let f_q = f.embed(g)?;
    let transformed = cover_transform(&a_q, &f_q, p)?;
    let lhs = a_q.pow(p).mul(&z)?.add(&transformed)?;
    let rhs = a_q.pow(p - 1).mul(&a_q.mul(&z)?.add(&f_q)?)?;
    lhs.sub(&rhs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusParams {
    pub n: u32,
    pub m: u32,
    pub r: u32,
    pub p: u32,
    /// Extension degree of the scan field over `F_p`.
    pub k: u32,
    pub seed: u64,
}

impl CensusParams {
    pub fn l(&self) -> u32 {
        self.n + 1 - self.m
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
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusConfig {
    pub budget: u128,
    /// Covering degree; `None` means `l`.
    pub mu: Option<u32>,
    pub max_retries: u32,
    /// Sample attempts per chart of `Q` for the `(a = 0)` check.
    pub a_zero_attempts: usize,
}

impl Default for CensusConfig {
    fn default() -> Self {
        CensusConfig {
            budget: DEFAULT_BUDGET,
            mu: None,
            max_retries: 20,
            a_zero_attempts: 40,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalPointRecord {
    pub chart: String,
    pub coords: Vec<String>,
    pub point: String,
    pub on_gamma: bool,
    /// `None` on `Gamma`, where any critical point already fails.
    pub verdict: Option<AdmissibilityVerdict>,
    /// All partials vanish and `a` does not when re-evaluated symbolically.
    pub substitution_ok: bool,
    /// No other critical point of the same stratum differs in exactly one coordinate.
    pub isolated_on_lines: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartScan {
    pub chart: String,
    pub free_coordinates: usize,
    pub points_scanned: u64,
    pub critical_points: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AZeroCheck {
    pub sampled: usize,
    /// Sampled points of `(a = 0)` on `Z` where `Z` is singular.
    pub singular: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub params: CensusParams,
    pub field: String,
    pub mu: u32,
    pub a: String,
    pub f_terms: usize,
    pub attempts: u32,
    pub charts: Vec<ChartScan>,
    pub points: Vec<CriticalPointRecord>,
    pub gamma_count: usize,
    pub a_zero: AZeroCheck,
    pub warnings: Vec<String>,
    pub pass: bool,
}

impl CensusReport {
    pub fn not_admissible(&self) -> impl Iterator<Item = &CriticalPointRecord> {
        self.points.iter().filter(|p| {
            p.verdict
                .as_ref()
                .is_some_and(|v| v.status != AdmissibilityStatus::Admissible)
        })
    }
}

/// Random `a` in `k[u]_m` (not identically zero on `P^(n-r)(F_q)`) and `f` of bidegree
/// `(m, l)` on `R`, then [`census_with`].
pub fn census(params: CensusParams, config: &CensusConfig) -> Result<CensusReport> {
    params.validate()?;
    let field = make_field(params.p as u64, params.k)?;
    let r_bundle = standard_r(params.n, params.r)?;
    let g = r_bundle.grading().clone();
    let m = params.m as i64;
    let mut attempts = 0;
    let a = loop {
        if attempts >= config.max_retries {
            return Err(Error::RetryLimit(config.max_retries));
        }
        let seed = derive_seed(params.seed, 1 + 1000 * attempts as u64);
        attempts += 1;
        let a = random_bipoly(&g, (m, 0), &field, seed)?.poly;
        if !vanishes_on_base(&a, &field)? {
            break a;
        }
    };
    let f = random_bipoly(&g, (m, params.l() as i64), &field, derive_seed(params.seed, 2))?.poly;
    let mut report = census_with(params, &a, &f, config)?;
    report.attempts = attempts;
    Ok(report)
}

/// Whether a form on the base vanishes at every point of `P^(n-r)(F_q)`.
fn vanishes_on_base(a: &BiPoly, field: &FieldDesc) -> Result<bool> {
    let g = field.galois().ok_or(Error::InfiniteField)?;
    let grading = a.grading();
    let nb = grading.n_base();
    for i in 0..nb {
        // affine piece u_i = 1, u_k = 0 for k < i
        let free: Vec<usize> = (i + 1..nb).collect();
        let mut raw_terms = Vec::new();
        for (mo, c) in a.terms() {
            let e = mo.exponents();
            if (0..i).any(|k| e[k] > 0) {
                continue;
            }
            raw_terms.push((free.iter().map(|&k| e[k]).collect::<Vec<u32>>(), crate::raw::finite(c)));
        }
        let raw = RawPoly {
            nvars: free.len(),
            terms: raw_terms,
        };
        if raw.eval_grid(g).iter().any(|&v| v != 0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Census for explicit `a` of bidegree `(m, 0)` and `f` of bidegree `(m, l)` on `R`.
pub fn census_with(params: CensusParams, a: &BiPoly, f: &BiPoly, config: &CensusConfig) -> Result<CensusReport> {
    params.validate()?;
    let field = a.field().clone();
    let gf = field.galois().ok_or(Error::InfiniteField)?;
    let q = gf.order() as u64;
    let mu = config.mu.unwrap_or(params.l());
    let r_bundle = standard_r(params.n, params.r)?;
    let grading = r_bundle.grading().clone();
    if **a.grading() != *grading || **f.grading() != *grading {
        return Err(Error::GradingMismatch);
    }
    let gsec = cover_transform(a, f, params.p)?;
    let y = grading.index_of("y").expect("R has y");

    let mut warnings = Vec::new();
    if vanishes_on_base(a, &field)? {
        warnings.push("a vanishes at every F_q-point of the base; V_a is empty".to_string());
    }

    let mut charts = Vec::new();
    let mut points = Vec::new();
    for chart in r_bundle.charts() {
        let free = chart.stratum_free();
        let scanned = check_budget(q, free.len(), config.budget)? as u64;
        let g_loc = localize(&gsec, &chart)?;
        let a_loc = localize(a, &chart)?;
        let partials: Vec<LocalPoly> = (0..chart.dim()).map(|i| g_loc.partial(i)).collect();
        let raw_partials: Vec<RawPoly> = partials
            .iter()
            .map(|p| RawPoly::from_local(p).restrict_to(&free, gf))
            .collect();
        let raw_a = RawPoly::from_local(&a_loc).restrict_to(&free, gf);
        let hits = common_zeros(&raw_partials, Some(&raw_a), gf, free.len());
        let found: Vec<Vec<u32>> = hits
            .iter()
            .map(|&idx| grid_point(idx, free.len(), q as usize))
            .collect();
        let gamma_coord = chart.coordinate_of_var(y);
        for (k, pt) in found.iter().enumerate() {
            let mut coords = vec![field.zero(); chart.dim()];
            for (&i, &v) in free.iter().zip(pt) {
                coords[i] = Elem::Finite(v);
            }
            let on_gamma = gamma_coord.is_some_and(|c| field.is_zero(&coords[c]));
            let mut substitution_ok = !field.is_zero(&a_loc.evaluate(&coords)?);
            for p in &partials {
                substitution_ok &= field.is_zero(&p.evaluate(&coords)?);
            }
            let isolated_on_lines = !found
                .iter()
                .enumerate()
                .any(|(j, other)| j != k && other.iter().zip(pt).filter(|(a, b)| a != b).count() == 1);
            let verdict = if on_gamma {
                None
            } else {
                Some(classify_at(&g_loc, &coords, mu)?)
            };
            points.push(CriticalPointRecord {
                chart: chart.label(),
                coords: coords.iter().map(|c| field.render(c)).collect(),
                point: chart.point_at(&field, &coords)?.render(),
                on_gamma,
                verdict,
                substitution_ok,
                isolated_on_lines,
            });
        }
        charts.push(ChartScan {
            chart: chart.label(),
            free_coordinates: free.len(),
            points_scanned: scanned,
            critical_points: found.len(),
        });
    }

    let a_zero = a_zero_check(params, a, f, config.a_zero_attempts)?;
    let gamma_count = points.iter().filter(|p| p.on_gamma).count();
    let pass = gamma_count == 0
        && points.iter().all(|p| {
            p.substitution_ok
                && p.verdict
                    .as_ref()
                    .is_none_or(|v| v.status == AdmissibilityStatus::Admissible)
        });
    Ok(CensusReport {
        params,
        field: field.describe(),
        mu,
        a: a.render(),
        f_terms: f.len(),
        attempts: 1,
        charts,
        points,
        gamma_count,
        a_zero,
        warnings,
        pass,
    })
}

/// Samples points of `(a = 0)` on `Z = (a z + f = 0) ⊂ Q` and checks that the local
/// equation has a nonzero derivative in some direction other than `z`, so `z` restricts
/// to a local coordinate of `Z` there.
fn a_zero_check(params: CensusParams, a: &BiPoly, f: &BiPoly, attempts: usize) -> Result<AZeroCheck> {
    let field = a.field().clone();
    let q_bundle = standard_q(params.n, params.r, params.l())?;
    let gq: Arc<GradingMatrix> = q_bundle.grading().clone();
    let z = BiPoly::parse_monomial(gq.clone(), field.clone(), "z")?;
    let a_q = a.embed(gq.clone())?;
    let equation = a_q.mul(&z)?.add(&f.embed(gq.clone())?)?;
    let z_var = gq.index_of("z").expect("Q has z");
    let elems = field.enumerate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(params.seed, 3));
    let mut out = AZeroCheck {
        sampled: 0,
        singular: 0,
    };
    for chart in q_bundle.charts() {
        let a_loc = localize(&a_q, &chart)?;
        let eq_loc = localize(&equation, &chart)?;
        let zc = chart.coordinate_of_var(z_var).expect("z is a chart coordinate");
        let base_coords: Vec<usize> = (0..chart.dim())
            .filter(|&i| gq.is_base(chart.coord_vars()[i]))
            .collect();
        let fiber_coords: Vec<usize> = (0..chart.dim())
            .filter(|&i| !gq.is_base(chart.coord_vars()[i]) && i != zc)
            .collect();
        let gradient: Vec<LocalPoly> = (0..chart.dim())
            .filter(|&i| i != zc)
            .map(|i| eq_loc.partial(i))
            .collect();
        for _ in 0..attempts {
            let mut pt: Vec<Elem> = (0..chart.dim())
                .map(|_| field.random_elem(&mut rng))
                .collect::<Result<_>>()?;
            let (Some(&bc), Some(&fc)) = (base_coords.last(), fiber_coords.first()) else {
                continue;
            };
            if !solve_coordinate(&a_loc, &mut pt, bc, &elems)? || !solve_coordinate(&eq_loc, &mut pt, fc, &elems)? {
                continue;
            }
            out.sampled += 1;
            let mut smooth = false;
            for d in &gradient {
                if !field.is_zero(&d.evaluate(&pt)?) {
                    smooth = true;
                    break;
                }
            }
            if !smooth {
                out.singular += 1;
            }
        }
    }
    Ok(out)
}

/// Sets `pt[coord]` to the first field element making `p` vanish.
fn solve_coordinate(p: &LocalPoly, pt: &mut [Elem], coord: usize, elems: &[Elem]) -> Result<bool> {
    for v in elems {
        pt[coord] = v.clone();
        if p.field().is_zero(&p.evaluate(pt)?) {
            return Ok(true);
        }
    }
    Ok(false)
}
