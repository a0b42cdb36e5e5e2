//! ψ-ontology classification, contextuality witnesses and deficiency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{ensure_verified, OntFactorization};
use crate::table::DataTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiClass {
    /// Preparation distributions have pairwise disjoint supports.
    pub psi_ontic: bool,
    /// Every preparation is a point mass on one ontic state.
    pub psi_complete: bool,
    pub psi_epistemic: bool,
}

fn p_support(f: &OntFactorization, k: usize) -> Vec<usize> {
    (0..f.omega())
        .filter(|&j| f.p().get(j, k).is_positive())
        .collect()
}

pub fn psi_classify(f: &OntFactorization) -> PsiClass {
    let s = f.p().cols();
    let supports: Vec<Vec<usize>> = (0..s).map(|k| p_support(f, k)).collect();
    let mut owner = vec![None; f.omega()];
    let mut psi_ontic = true;
    for (k, support) in supports.iter().enumerate() {
        for &j in support {
            if owner[j].replace(k).is_some() {
                psi_ontic = false;
            }
        }
    }
    PsiClass {
        psi_ontic,
        psi_complete: supports.iter().all(|sup| sup.len() == 1),
        psi_epistemic: !psi_ontic,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowPairDifference {
    pub rows: [usize; 2],
    /// Ontic states on which the two `M` rows disagree.
    pub differing_states: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextReport {
    pub duplicate_groups: Vec<Vec<usize>>,
    pub pairs: Vec<RowPairDifference>,
}

fn differing_states(f: &OntFactorization, a: usize, b: usize) -> Vec<usize> {
    let (ra, rb) = (f.m().row(a), f.m().row(b));
    (0..f.omega()).filter(|&j| ra[j] != rb[j]).collect()
}

fn group_pairs(groups: &[Vec<usize>]) -> Vec<[usize; 2]> {
    let mut pairs: Vec<[usize; 2]> = groups
        .iter()
        .flat_map(|g| {
            g.iter()
                .enumerate()
                .flat_map(move |(i, &a)| g[i + 1..].iter().map(move |&b| [a.min(b), a.max(b)]))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Rows that stand for the same projector, and where `M` tells them apart.
pub fn contextual_pairs(table: &DataTable, f: &OntFactorization) -> Result<ContextReport> {
    ensure_verified(table, f)?;
    let duplicate_groups = table.duplicate_row_groups();
    let pairs = group_pairs(&duplicate_groups)
        .into_iter()
        .map(|rows| RowPairDifference {
            rows,
            differing_states: differing_states(f, rows[0], rows[1]),
        })
        .collect();
    Ok(ContextReport {
        duplicate_groups,
        pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeficiencyEntry {
    pub row: usize,
    pub preparation: usize,
    pub support_p: Vec<usize>,
    /// States where `M` row `row` is positive.
    pub support_m: Vec<usize>,
    /// `support_m` minus `support_p`.
    pub unfaithful: Vec<usize>,
    /// States where `M` row `row` is exactly 1, minus `support_p`.
    pub certain_unfaithful: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeficiencyReport {
    pub entries: Vec<DeficiencyEntry>,
    /// Set for indeterministic factorizations, where deficiency is only
    /// indicative.
    pub advisory: bool,
}

/// For every table entry equal to 1: ontic states that answer that outcome
/// yet lie outside the preparation's support.
pub fn unfaithful_states(table: &DataTable, f: &OntFactorization) -> Result<DeficiencyReport> {
    ensure_verified(table, f)?;
    let mut entries = Vec::new();
    for k in 0..table.s() {
        let support_p = p_support(f, k);
        for r in 0..table.rows() {
            if !table.matrix().get(r, k).is_one() {
                continue;
            }
            let row = f.m().row(r);
            let outside = |keep: &dyn Fn(usize) -> bool| -> Vec<usize> {
                (0..f.omega())
                    .filter(|&j| keep(j) && support_p.binary_search(&j).is_err())
                    .collect()
            };
            let support_m: Vec<usize> = (0..f.omega()).filter(|&j| row[j].is_positive()).collect();
            entries.push(DeficiencyEntry {
                row: r,
                preparation: k,
                unfaithful: outside(&|j| row[j].is_positive()),
                certain_unfaithful: outside(&|j| row[j].is_one()),
                support_p: support_p.clone(),
                support_m,
            });
        }
    }
    Ok(DeficiencyReport {
        entries,
        advisory: !f.is_deterministic(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsWitness {
    pub rows: [usize; 2],
    /// The column's `M` values on `rows`.
    pub values: [bool; 2],
}

/// For each ontic state of a deterministic factorization, the first
/// same-projector row pair (lexicographic) on which its column disagrees.
pub fn ks_column_witness(
    f: &OntFactorization,
    row_groups: &[Vec<usize>],
) -> Result<Vec<Option<KsWitness>>> {
    if !f.is_deterministic() {
        return Err(Error::structural(
            "witness search needs a deterministic factorization",
        ));
    }
    let pairs = group_pairs(row_groups);
    Ok((0..f.omega())
        .map(|j| {
            pairs.iter().find_map(|&[a, b]| {
                let (va, vb) = (f.m().get(a, j).is_one(), f.m().get(b, j).is_one());
                (va != vb).then_some(KsWitness {
                    rows: [a, b],
                    values: [va, vb],
                })
            })
        })
        .collect())
}

/// Everything `analyze` reports for one table and factorization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub omega: usize,
    pub deterministic: bool,
    pub psi: PsiClass,
    pub context: ContextReport,
    pub deficiency: DeficiencyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ks_witness: Option<Vec<Option<KsWitness>>>,
}

pub fn analyze(table: &DataTable, f: &OntFactorization) -> Result<AnalysisReport> {
    let context = contextual_pairs(table, f)?;
    let ks_witness = if f.is_deterministic() {
        Some(ks_column_witness(f, &context.duplicate_groups)?)
    } else {
        None
    };
    Ok(AnalysisReport {
        omega: f.omega(),
        deterministic: f.is_deterministic(),
        psi: psi_classify(f),
        deficiency: unfaithful_states(table, f)?,
        context,
        ks_witness,
    })
}
