//! Aggregated lower and upper bounds for one target.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::apolarity::{sylvester_decompose, sylvester_rank};
use crate::constructions::{
    curve_union_decomposition, generic_rank_bound, known_facts, prune_support, split_rank_one,
    thm33_decomposition, w_product, w_product_combined, CurvePointSet, KnownKind, XiScheme,
};
use crate::error::{Error, Result};
use crate::flatten::{
    cactus_lower_bound, merge_lower_bound, LowerBoundCertificate, LowerBoundMethod,
};
use crate::forms::{AnyDecomposition, BinaryForm, FactorDecomposition, PSTensor};
use crate::scalars::{FieldTag, Rational, Scalar};

/// What a report is about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetDescriptor {
    WProduct { multidegree: Vec<usize> },
    Tensor { multidegree: Vec<usize> },
}

impl TargetDescriptor {
    pub fn multidegree(&self) -> &[usize] {
        match self {
            TargetDescriptor::WProduct { multidegree }
            | TargetDescriptor::Tensor { multidegree } => multidegree,
        }
    }
}

/// Where an upper bound comes from. Ordered by preference on ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// A decomposition that was built and verified.
    Construction,
    /// A cited rank fact.
    Known,
    /// A closed formula with no witness.
    Formula,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperBound {
    pub value: usize,
    pub method: String,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub citation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<AnyDecomposition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factor_form: Option<FactorDecomposition<Rational>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
}

impl UpperBound {
    fn formula(value: usize, method: &str) -> Self {
        UpperBound {
            value,
            method: method.into(),
            provenance: Provenance::Formula,
            citation: None,
            witness: None,
            factor_form: None,
            residual: None,
        }
    }

    fn witnessed(method: &str, witness: AnyDecomposition, residual: f64) -> Self {
        UpperBound {
            value: witness.len(),
            method: method.into(),
            provenance: Provenance::Construction,
            citation: None,
            witness: Some(witness),
            factor_form: None,
            residual: Some(residual),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerSummary {
    pub best: LowerBoundCertificate,
    /// Best bound that was computed rather than cited.
    pub best_computed: LowerBoundCertificate,
    pub candidates: Vec<LowerBoundCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpperSummary {
    pub value: usize,
    pub method: String,
    pub provenance: Provenance,
    pub candidates: Vec<UpperBound>,
}

impl UpperSummary {
    /// The candidate that attains the best value.
    pub fn best(&self) -> &UpperBound {
        self.candidates
            .iter()
            .find(|c| c.value == self.value && c.method == self.method)
            .expect("best candidate is listed")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub target: TargetDescriptor,
    pub lower: LowerSummary,
    pub upper: UpperSummary,
    pub gap: usize,
    pub exact: bool,
    /// Product of the factor ranks, when the target is a product of forms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naive_product: Option<usize>,
    pub submultiplicative: bool,
    pub notes: Vec<String>,
}

/// Size limits for the expensive parts of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReportOptions {
    /// Flattening search only for tensors with at most this many entries.
    pub cactus_max_entries: usize,
    /// Explicit decompositions only for tensors with at most this many entries.
    pub construction_max_entries: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            cactus_max_entries: 20_000,
            construction_max_entries: 2_000,
        }
    }
}

fn entries(multidegree: &[usize]) -> usize {
    multidegree.iter().map(|d| d + 1).product()
}

fn known_lower(value: usize, citation: &str) -> LowerBoundCertificate {
    LowerBoundCertificate {
        value,
        method: LowerBoundMethod::Known {
            citation: citation.to_string(),
        },
    }
}

/// Report for `W_{d_1} ⊗ … ⊗ W_{d_k}`.
pub fn bound_report_w_product(multidegree: &[usize]) -> Result<BoundReport> {
    bound_report_w_product_with(multidegree, ReportOptions::default())
}

pub fn bound_report_w_product_with(
    multidegree: &[usize],
    options: ReportOptions,
) -> Result<BoundReport> {
    let target = w_product::<Rational>(multidegree)?;
    let k = multidegree.len();
    let size = entries(multidegree);
    let mut notes = Vec::new();

    let mut lower = Vec::new();
    if size <= options.cactus_max_entries {
        lower.push(cactus_lower_bound(&target)?);
    } else {
        notes.push(format!("flattening search skipped: {size} entries"));
    }
    lower.push(merge_lower_bound(multidegree)?);

    let mut upper = Vec::new();
    let build = size <= options.construction_max_entries;
    if !build {
        notes.push(format!("explicit constructions skipped: {size} entries"));
    }
    if build && multidegree.iter().all(|&d| d == 3) {
        let fd = thm33_decomposition(&XiScheme::default_for(k)?)?;
        let split = split_rank_one(&fd, FieldTag::Gaussian)?;
        let mut bound = UpperBound::witnessed("thm33", split.decomposition, split.residual);
        bound.factor_form = Some(fd);
        upper.push(bound);
    }
    if build && multidegree.iter().all(|&d| d >= 3) {
        let dec = curve_union_decomposition(multidegree, None)?;
        upper.push(UpperBound::witnessed(
            "curve_union",
            AnyDecomposition::Rational(dec),
            0.0,
        ));
        let points = CurvePointSet::default_for(multidegree)?.points();
        let pruned = prune_support(multidegree, &points, &target)?;
        upper.push(UpperBound::witnessed(
            "curve_union_pruned",
            AnyDecomposition::Rational(pruned),
            0.0,
        ));
        if k == 2 {
            let set = CurvePointSet::hyperplane_section(multidegree[0], multidegree[1])?;
            let pruned = prune_support(multidegree, &set.points(), &target)?;
            upper.push(UpperBound::witnessed(
                "hyperplane_section_pruned",
                AnyDecomposition::Rational(pruned),
                0.0,
            ));
        }
    }
    if k >= 2 {
        if let Some(v) = generic_rank_bound(multidegree)? {
            upper.push(UpperBound::formula(v, "generic_rank"));
        }
    }
    let naive: usize = multidegree.iter().product();
    if build {
        let dec = w_product_combined(multidegree)?;
        upper.push(UpperBound::witnessed(
            "combine",
            AnyDecomposition::Rational(dec),
            0.0,
        ));
    } else {
        upper.push(UpperBound::formula(naive, "combine"));
    }

    for fact in known_facts(multidegree) {
        match fact.kind {
            KnownKind::Lower => lower.push(known_lower(fact.value, &fact.citation)),
            KnownKind::Upper => upper.push(known_upper(fact.value, &fact.citation)),
            KnownKind::Exact => {
                lower.push(known_lower(fact.value, &fact.citation));
                upper.push(known_upper(fact.value, &fact.citation));
            }
        }
    }

    assemble(
        TargetDescriptor::WProduct {
            multidegree: multidegree.to_vec(),
        },
        lower,
        upper,
        Some(naive),
        notes,
    )
}

fn known_upper(value: usize, citation: &str) -> UpperBound {
    UpperBound {
        value,
        method: "known".into(),
        provenance: Provenance::Known,
        citation: Some(citation.to_string()),
        witness: None,
        factor_form: None,
        residual: None,
    }
}

/// Factors `f_i` with `t = f_1 ⊗ … ⊗ f_k`, if `t` is such a product.
pub fn factor_product(t: &PSTensor<Rational>) -> Option<Vec<BinaryForm<Rational>>> {
    let pivot = t.coeffs().iter().position(|c| !c.is_zero())?;
    let ds = t.multidegree();
    let mut index: Vec<usize> = Vec::with_capacity(ds.len());
    let mut rest = pivot;
    for s in crate::forms::strides(ds) {
        index.push(rest / s);
        rest %= s;
    }
    let c = t.coeffs()[pivot].clone();
    let factors: Vec<BinaryForm<Rational>> = (0..ds.len())
        .map(|i| {
            let coeffs = (0..=ds[i])
                .map(|j| {
                    let mut at = index.clone();
                    at[i] = j;
                    t.get(&at).clone()
                })
                .collect();
            BinaryForm::new(coeffs).expect("nonempty")
        })
        .collect();
    let mut product = PSTensor::from_factors(&factors).ok()?;
    let scale = c.recip().pow(ds.len() as u32 - 1);
    product = product.scale(&scale);
    (product == *t).then(|| {
        let mut factors = factors;
        factors[0] = factors[0].scale(&scale);
        factors
    })
}

/// Waring rank of `x^a y^b`.
fn monomial_rank(a: usize, b: usize) -> usize {
    if a == 0 || b == 0 {
        1
    } else {
        a.max(b) + 1
    }
}

/// Report for an arbitrary nonzero rational tensor.
pub fn bound_report_tensor(t: &PSTensor<Rational>) -> Result<BoundReport> {
    bound_report_tensor_with(t, ReportOptions::default())
}

pub fn bound_report_tensor_with(
    t: &PSTensor<Rational>,
    options: ReportOptions,
) -> Result<BoundReport> {
    if t.is_zero() {
        return Err(Error::ZeroInput("tensor"));
    }
    let ds = t.multidegree().to_vec();
    let k = ds.len();
    let mut notes = Vec::new();
    let mut lower = Vec::new();
    let mut upper = Vec::new();

    if t.len() <= options.cactus_max_entries {
        lower.push(cactus_lower_bound(t)?);
    } else {
        notes.push(format!("flattening search skipped: {} entries", t.len()));
    }

    let mut naive = None;
    if let Some(factors) = factor_product(t) {
        let mut ranks = Vec::with_capacity(k);
        let mut product: Option<AnyDecomposition> = None;
        for f in &factors {
            let out = sylvester_decompose(f, FieldTag::Gaussian)?;
            ranks.push(out.rank);
            product = Some(match product {
                None => out.decomposition,
                Some(p) => p.combine(&out.decomposition),
            });
        }
        naive = Some(ranks.iter().product());
        if k == 1 {
            lower.push(LowerBoundCertificate {
                value: ranks[0],
                method: LowerBoundMethod::Known {
                    citation: "Waring rank by Sylvester's algorithm".into(),
                },
            });
        }
        let witness = product.expect("at least one factor");
        let report = witness.verify_against(t, None)?;
        if !report.ok {
            return Err(Error::Numeric(format!(
                "product decomposition residual {:e}",
                report.residual
            )));
        }
        upper.push(UpperBound::witnessed("combine", witness, report.residual));
    }

    // Expanding monomial by monomial.
    let mut monomial_total = 0usize;
    for (index, c) in crate::forms::multi_indices(&ds).zip(t.coeffs()) {
        if !c.is_zero() {
            monomial_total += index
                .iter()
                .zip(&ds)
                .map(|(&j, &d)| monomial_rank(d - j, j))
                .product::<usize>();
        }
    }
    upper.push(UpperBound::formula(monomial_total, "monomial_expansion"));
    if k >= 2 {
        if let Some(v) = generic_rank_bound(&ds)? {
            upper.push(UpperBound::formula(v, "generic_rank"));
        }
    }

    if k == 1 {
        // Sylvester is exact for binary forms.
        let f = t.as_form().expect("order 1");
        notes.push(format!("Waring rank {}", sylvester_rank(&f)?));
    }

    assemble(
        TargetDescriptor::Tensor { multidegree: ds },
        lower,
        upper,
        naive,
        notes,
    )
}

fn assemble(
    target: TargetDescriptor,
    lower: Vec<LowerBoundCertificate>,
    upper: Vec<UpperBound>,
    naive_product: Option<usize>,
    mut notes: Vec<String>,
) -> Result<BoundReport> {
    let pick_lower = |certs: &mut dyn Iterator<Item = &LowerBoundCertificate>| {
        certs
            .fold(None::<&LowerBoundCertificate>, |best, c| match best {
                Some(b) if b.value >= c.value => Some(b),
                _ => Some(c),
            })
            .cloned()
    };
    let best = pick_lower(&mut lower.iter())
        .ok_or_else(|| Error::Inconsistent("no lower bound available".into()))?;
    let best_computed = pick_lower(
        &mut lower
            .iter()
            .filter(|c| !matches!(c.method, LowerBoundMethod::Known { .. })),
    )
    .unwrap_or_else(|| best.clone());

    let best_upper = upper
        .iter()
        .min_by_key(|u| (u.value, u.provenance))
        .ok_or_else(|| Error::Inconsistent("no upper bound available".into()))?
        .clone();

    if best.value > best_upper.value {
        return Err(Error::Inconsistent(format!(
            "lower bound {} ({}) exceeds upper bound {} ({})",
            best.value,
            best.method_name(),
            best_upper.value,
            best_upper.method
        )));
    }
    for u in &upper {
        if let Some(w) = &u.witness {
            if w.len() != u.value {
                return Err(Error::Inconsistent(format!(
                    "{} witness has {} terms but claims {}",
                    u.method,
                    w.len(),
                    u.value
                )));
            }
        }
    }

    let gap = best_upper.value - best.value;
    let exact = gap == 0;
    if exact && best_computed.value < best.value {
        notes.push(format!(
            "exact value relies on a cited lower bound; the computed lower bound is {}",
            best_computed.value
        ));
    }
    let submultiplicative = naive_product.is_some_and(|n| best_upper.value < n);
    Ok(BoundReport {
        target,
        lower: LowerSummary {
            best,
            best_computed,
            candidates: lower,
        },
        upper: UpperSummary {
            value: best_upper.value,
            method: best_upper.method.clone(),
            provenance: best_upper.provenance,
            candidates: upper,
        },
        gap,
        exact,
        naive_product,
        submultiplicative,
        notes,
    })
}

/// One row of the submultiplicativity table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub multidegree: Vec<usize>,
    pub naive: usize,
    pub upper: usize,
    pub upper_method: String,
    pub lower: usize,
    pub lower_method: String,
    pub computed_lower: usize,
    pub gap: usize,
}

/// Nondecreasing multidegrees with `2 ≤ k ≤ max_k` and `2 ≤ d_i ≤ max_d`.
fn table_multidegrees(max_k: usize, max_d: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, lo: usize, hi: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for d in lo..=hi {
            cur.push(d);
            rec(k, d, hi, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for k in 2..=max_k {
        rec(k, 2, max_d, &mut Vec::new(), &mut out);
    }
    out
}

/// Reports for every W-product up to the given limits.
pub fn submultiplicativity_table(max_k: usize, max_d: usize) -> Result<Vec<TableRow>> {
    submultiplicativity_table_with(
        max_k,
        max_d,
        ReportOptions {
            cactus_max_entries: 1_000,
            construction_max_entries: 1_000,
        },
    )
}

pub fn submultiplicativity_table_with(
    max_k: usize,
    max_d: usize,
    options: ReportOptions,
) -> Result<Vec<TableRow>> {
    if !(2..=4).contains(&max_k) || !(2..=8).contains(&max_d) {
        return Err(Error::InvalidArgument(format!(
            "table limits must satisfy 2 ≤ k ≤ 4 and 2 ≤ d ≤ 8, got k ≤ {max_k}, d ≤ {max_d}"
        )));
    }
    table_multidegrees(max_k, max_d)
        .into_iter()
        .map(|ds| {
            let r = bound_report_w_product_with(&ds, options)?;
            Ok(TableRow {
                naive: r.naive_product.expect("W-products have a naive bound"),
                upper: r.upper.value,
                upper_method: r.upper.method.clone(),
                lower: r.lower.best.value,
                lower_method: r.lower.best.method_name().to_string(),
                computed_lower: r.lower.best_computed.value,
                gap: r.gap,
                multidegree: ds,
            })
        })
        .collect()
}

/// Plain-text rendering of the table.
pub fn format_table(rows: &[TableRow]) -> String {
    let mut out = String::new();
    let header = [
        "multidegree",
        "naive",
        "upper",
        "via",
        "lower",
        "via",
        "computed",
        "gap",
    ];
    let cells: Vec<[String; 8]> = rows
        .iter()
        .map(|r| {
            [
                format!("{:?}", r.multidegree),
                r.naive.to_string(),
                r.upper.to_string(),
                r.upper_method.clone(),
                r.lower.to_string(),
                r.lower_method.clone(),
                r.computed_lower.to_string(),
                r.gap.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |row: &[String]| {
        row.iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{}", line(&header));
    for row in &cells {
        let _ = writeln!(out, "{}", line(row));
    }
    out
}

/// Human-readable summary of a report.
pub fn format_report(r: &BoundReport) -> String {
    let mut out = String::new();
    let (kind, ds) = match &r.target {
        TargetDescriptor::WProduct { multidegree } => ("W-product", multidegree),
        TargetDescriptor::Tensor { multidegree } => ("tensor", multidegree),
    };
    let _ = writeln!(out, "target: {kind} of multidegree {ds:?}");
    let _ = writeln!(
        out,
        "lower: {} via {} (computed: {} via {})",
        r.lower.best.value,
        r.lower.best.method_name(),
        r.lower.best_computed.value,
        r.lower.best_computed.method_name()
    );
    let _ = writeln!(
        out,
        "upper: {} via {} ({:?})",
        r.upper.value, r.upper.method, r.upper.provenance
    );
    if let Some(n) = r.naive_product {
        let _ = writeln!(out, "naive product: {n}");
    }
    let _ = writeln!(
        out,
        "gap: {}  exact: {}  submultiplicative: {}",
        r.gap, r.exact, r.submultiplicative
    );
    let _ = writeln!(out, "candidates:");
    for c in &r.lower.candidates {
        let _ = match &c.method {
            LowerBoundMethod::Known { citation } => {
                writeln!(out, "  lower {:>4}  known ({citation})", c.value)
            }
            _ => writeln!(out, "  lower {:>4}  {}", c.value, c.method_name()),
        };
    }
    for c in &r.upper.candidates {
        let _ = match &c.citation {
            Some(cite) => writeln!(out, "  upper {:>4}  {} ({cite})", c.value, c.method),
            None => writeln!(
                out,
                "  upper {:>4}  {} ({:?})",
                c.value, c.method, c.provenance
            ),
        };
    }
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w3_squared_report() {
        let r = bound_report_w_product(&[3, 3]).unwrap();
        assert_eq!(r.upper.value, 8);
        assert_eq!(r.lower.best.value, 8);
        assert_eq!(r.lower.best_computed.value, 5);
        assert_eq!(r.lower.best_computed.method_name(), "merge_chain");
        assert!(r.exact);
        assert_eq!(r.naive_product, Some(9));
        assert!(r.submultiplicative);
        let thm33 = r
            .upper
            .candidates
            .iter()
            .find(|c| c.method == "thm33")
            .unwrap();
        assert_eq!(thm33.value, 8);
        assert!(r.notes.iter().any(|n| n.contains("cited lower bound")));
    }

    #[test]
    fn w2_times_w5_is_exact() {
        let r = bound_report_w_product(&[2, 5]).unwrap();
        assert_eq!(r.upper.value, 10);
        assert_eq!(r.lower.best.value, 10);
        assert!(r.exact);
        assert!(!r.submultiplicative);
    }

    #[test]
    fn w3_cubed_is_submultiplicative() {
        let r = bound_report_w_product(&[3, 3, 3]).unwrap();
        assert_eq!(r.upper.value, 20);
        assert_eq!(r.naive_product, Some(27));
        assert!(r.submultiplicative);
        assert!(r.lower.best.value <= r.upper.value);
    }

    #[test]
    fn witnesses_match_claimed_values() {
        let r = bound_report_w_product(&[3, 4]).unwrap();
        let target = w_product::<Rational>(&[3, 4]).unwrap();
        for c in &r.upper.candidates {
            if let Some(w) = &c.witness {
                assert_eq!(w.len(), c.value);
                assert!(w.verify_against(&target, None).unwrap().ok, "{}", c.method);
            }
        }
        let pruned = r
            .upper
            .candidates
            .iter()
            .find(|c| c.method == "hyperplane_section_pruned")
            .unwrap();
        assert!(pruned.value <= 13);
    }

    #[test]
    fn general_tensor_reports() {
        let f = BinaryForm::<Rational>::from_i64s(&[0, 1, 0, 0]).unwrap();
        let r = bound_report_tensor(&PSTensor::from_form(&f).unwrap()).unwrap();
        assert_eq!(r.lower.best.value, 3);
        assert_eq!(r.upper.value, 3);
        assert!(r.exact);

        let g = BinaryForm::<Rational>::from_i64s(&[1, 0, 0, 1]).unwrap();
        let t = PSTensor::from_factors(&[g.clone(), g]).unwrap();
        let r = bound_report_tensor(&t).unwrap();
        assert_eq!(r.upper.value, 4);
        assert_eq!(r.lower.best.value, 4);

        let t = PSTensor::from_coeffs(&[1, 1], [1, 0, 0, 1].map(Rational::from).to_vec()).unwrap();
        assert!(factor_product(&t).is_none());
        let r = bound_report_tensor(&t).unwrap();
        assert_eq!(r.lower.best.value, 2);
        assert_eq!(r.upper.value, 2);

        assert!(bound_report_tensor(&PSTensor::zeros(&[2]).unwrap()).is_err());
    }

    #[test]
    fn factor_product_recovers_scaled_factors() {
        let a = BinaryForm::<Rational>::from_i64s(&[2, 0, 3]).unwrap();
        let b = BinaryForm::<Rational>::from_i64s(&[0, 5]).unwrap();
        let t = PSTensor::from_factors(&[a, b]).unwrap();
        let fs = factor_product(&t).unwrap();
        assert_eq!(PSTensor::from_factors(&fs).unwrap(), t);
    }

    #[test]
    fn small_table() {
        let rows = submultiplicativity_table(3, 4).unwrap();
        let row = |ds: &[usize]| rows.iter().find(|r| r.multidegree == ds).unwrap();
        assert_eq!((row(&[3, 3]).naive, row(&[3, 3]).upper), (9, 8));
        assert_eq!((row(&[3, 3, 3]).naive, row(&[3, 3, 3]).upper), (27, 20));
        assert_eq!(row(&[4, 4]).naive, 16);
        assert!(row(&[4, 4]).upper <= 15);
        for r in &rows {
            assert!(r.lower <= r.upper, "{:?}", r.multidegree);
            assert!(r.computed_lower <= r.lower);
        }
        let text = format_table(&rows);
        assert!(text.lines().count() == rows.len() + 1);
        assert!(submultiplicativity_table(5, 4).is_err());
    }
}
