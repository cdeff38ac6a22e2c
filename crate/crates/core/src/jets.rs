//! Truncated Taylor expansions and the restriction maps `rest^k_q`.
//!
//! A jet of order `k` is the image in `O/m^k`; its coordinates are indexed by the
//! monomials of degree `< k`, listed by ascending degree and descending lex inside a
//! degree.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bundle::{localize, BundlePoint, Chart, LocalPoly};
use crate::cox::{monomials_of_degree, BiPoly, Monomial};
use crate::error::{Error, Result};
use crate::field::{DenseMatrix, Elem, FieldDesc, IncrementalRank};

/// Largest order accepted by [`JetTarget`].
pub const MAX_JET_ORDER: u32 = 4;

/// Monomials of degree `< k` in `nvars` variables.
pub fn jet_basis(nvars: usize, k: u32) -> Vec<Vec<u32>> {
    (0..k).flat_map(|d| monomials_of_degree(nvars, d)).collect()
}

/// `#{monomials of degree < k in nvars variables} = C(nvars + k - 1, nvars)`.
pub fn jet_dimension(nvars: usize, k: u32) -> usize {
    binomial((nvars + k as usize - 1) as u64, nvars as u64) as usize
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Coefficients of `p(center + t)` in degrees `< k`, keyed by exponent vector.
pub fn taylor_terms(p: &LocalPoly, center: &[Elem], k: u32) -> Result<BTreeMap<Vec<u32>, Elem>> {
    if k < 1 {
        return Err(Error::JetOrder(k));
    }
    let n = p.nvars();
    if center.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: center.len(),
        });
    }
    let f = p.field();
    if center.iter().any(|c| !f.contains(c)) {
        return Err(Error::MixedFields);
    }
    // powers of the center coordinates, cached per exponent
    let mut pow_cache: Vec<BTreeMap<u32, Elem>> = vec![BTreeMap::new(); n];
    let mut out: BTreeMap<Vec<u32>, Elem> = BTreeMap::new();
    let mut beta = vec![0u32; n];
    for (alpha, c) in p.terms() {
        // enumerate beta <= alpha with |beta| < k
        enumerate_sub(alpha, k - 1, 0, &mut beta, &mut |beta| {
            let mut coef = c.clone();
            for i in 0..n {
                let e = alpha[i] - beta[i];
                if beta[i] > 0 {
                    let b = binomial(alpha[i] as u64, beta[i] as u64);
                    coef = f.mul(&coef, &f.from_u128(b));
                }
                if e > 0 {
                    let pw = pow_cache[i]
                        .entry(e)
                        .or_insert_with(|| f.pow(&center[i], e as u64))
                        .clone();
                    coef = f.mul(&coef, &pw);
                }
                if f.is_zero(&coef) {
                    return;
                }
            }
            match out.get_mut(beta) {
                Some(v) => *v = f.add(v, &coef),
                None => {
                    out.insert(beta.to_vec(), coef);
                }
            }
        });
    }
    out.retain(|_, v| !f.is_zero(v));
    Ok(out)
}

fn enumerate_sub(alpha: &[u32], budget: u32, i: usize, beta: &mut Vec<u32>, visit: &mut impl FnMut(&[u32])) {
    if i == alpha.len() {
        visit(beta);
        return;
    }
    for b in 0..=alpha[i].min(budget) {
        beta[i] = b;
        enumerate_sub(alpha, budget - b, i + 1, beta, visit);
    }
    beta[i] = 0;
}

/// Jet of `p` at `center`, coordinates aligned with [`jet_basis`].
pub fn expand_at(p: &LocalPoly, center: &[Elem], k: u32) -> Result<Vec<Elem>> {
    let terms = taylor_terms(p, center, k)?;
    let f = p.field();
    Ok(jet_basis(p.nvars(), k)
        .into_iter()
        .map(|m| terms.get(&m).cloned().unwrap_or_else(|| f.zero()))
        .collect())
}

/// A chart, a center in chart coordinates and a jet order.
#[derive(Clone, Debug)]
pub struct JetTarget {
    pub chart: Chart,
    pub center: Vec<Elem>,
    pub k: u32,
}

impl JetTarget {
    pub fn new(chart: Chart, center: Vec<Elem>, k: u32) -> Result<Self> {
        if !(1..=MAX_JET_ORDER).contains(&k) {
            return Err(Error::JetOrder(k));
        }
        if center.len() != chart.dim() {
            return Err(Error::LengthMismatch {
                expected: chart.dim(),
                found: center.len(),
            });
        }
        Ok(JetTarget { chart, center, k })
    }

    /// Centers the jet at a bundle point; points where every weight-1 fiber
    /// coordinate vanishes lie outside all charts and are rejected.
    pub fn at_point(chart: Chart, pt: &BundlePoint, k: u32) -> Result<Self> {
        let g = chart.grading().clone();
        let f = pt.field();
        let off_charts = (g.n_base()..g.nvars())
            .filter(|&j| g.column(j).1 == 1)
            .all(|j| f.is_zero(&pt.coords()[j]));
        if off_charts {
            return Err(Error::ExcludedLocus(pt.render()));
        }
        let center = chart
            .coordinates_of(pt)
            .ok_or_else(|| Error::InvalidPoint(format!("{} is not in {}", pt.render(), chart.label())))?;
        Self::new(chart, center, k)
    }

    pub fn dimension(&self) -> usize {
        jet_dimension(self.chart.dim(), self.k)
    }

    pub fn column_labels(&self) -> Vec<String> {
        jet_basis(self.chart.dim(), self.k)
            .into_iter()
            .map(|e| Monomial::new(e).render(self.chart.coord_names()))
            .collect()
    }
}

/// Matrix of `rest^k_q` on a list of sections: one row per section.
#[derive(Clone, Debug)]
pub struct JetMatrix {
    pub matrix: DenseMatrix,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetMatrixRecord {
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<String>>,
}

impl JetMatrix {
    pub fn record(&self) -> JetMatrixRecord {
        let f = self.matrix.field();
        JetMatrixRecord {
            rows: self.row_labels.clone(),
            cols: self.col_labels.clone(),
            entries: (0..self.matrix.rows())
                .map(|r| self.matrix.row(r).iter().map(|e| f.render(e)).collect())
                .collect(),
        }
    }
}

fn check_sections(sections: &[BiPoly], chart: &Chart) -> Result<()> {
    if let Some(first) = sections.first() {
        for s in sections {
            if **s.grading() != **chart.grading() {
                return Err(Error::GradingMismatch);
            }
            if s.bidegree() != first.bidegree() {
                return Err(Error::BidegreeMismatch {
                    left: first.bidegree(),
                    right: s.bidegree(),
                });
            }
        }
    }
    Ok(())
}

pub fn rest_matrix(sections: &[BiPoly], target: &JetTarget, field: &FieldDesc) -> Result<JetMatrix> {
    check_sections(sections, &target.chart)?;
    let mut rows = Vec::with_capacity(sections.len());
    let mut labels = Vec::with_capacity(sections.len());
    for s in sections {
        if s.field() != field {
            return Err(Error::MixedFields);
        }
        let loc = localize(s, &target.chart)?;
        rows.push(expand_at(&loc, &target.center, target.k)?);
        labels.push(s.render());
    }
    let cols = target.dimension();
    let entries = rows.into_iter().flatten().collect();
    Ok(JetMatrix {
        matrix: DenseMatrix::new(field.clone(), sections.len(), cols, entries)?,
        row_labels: labels,
        col_labels: target.column_labels(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectivityReport {
    pub chart: String,
    pub center: Vec<String>,
    pub k: u32,
    pub surjective: bool,
    pub rank: usize,
    pub target_dim: usize,
    /// Rows of a maximal independent subset, by section label.
    pub independent_rows: Vec<String>,
}

/// Streams the sections through an echelon basis and stops once the rank is full.
pub fn rest_surjective(sections: &[BiPoly], target: &JetTarget, field: &FieldDesc) -> Result<SurjectivityReport> {
    check_sections(sections, &target.chart)?;
    let target_dim = target.dimension();
    let mut echelon = IncrementalRank::new(field.clone());
    let mut independent_rows = Vec::new();
    for s in sections {
        if echelon.rank() == target_dim {
            break;
        }
        if s.field() != field {
            return Err(Error::MixedFields);
        }
        let row = expand_at(&localize(s, &target.chart)?, &target.center, target.k)?;
        if echelon.insert(&row)? {
            independent_rows.push(s.render());
        }
    }
    let rank = echelon.rank();
    Ok(SurjectivityReport {
        chart: target.chart.label(),
        center: target.center.iter().map(|c| field.render(c)).collect(),
        k: target.k,
        surjective: rank == target_dim,
        rank,
        target_dim,
        independent_rows,
    })
}

/// Number of independent linear conditions "the linear part vanishes at the center"
/// imposes on the span of `sections`.
pub fn linear_conditions(sections: &[BiPoly], chart: &Chart, center: &[Elem], field: &FieldDesc) -> Result<usize> {
    let target = JetTarget::new(chart.clone(), center.to_vec(), 2)?;
    let jm = rest_matrix(sections, &target, field)?;
    let linear: Vec<usize> = (1..target.dimension()).collect();
    Ok(jm.matrix.select_columns(&linear).row_basis().len())
}
