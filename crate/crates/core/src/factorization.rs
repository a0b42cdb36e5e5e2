//! Ontological factorizations `D = MP`.
//!
//! `M` is `dm x Ω` with every measurement block column-stochastic, `P` is
//! `Ω x s` column-stochastic. Columns of `M` / rows of `P` are ontic states.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::rational::{lcm_of_denominators, Rational};
use crate::table::{
    grid_strings, json_error, parse_grid, DataTable, Target, ValidationReport, Violation,
    ViolationKind,
};

/// Upper limit on the number of ontic states [`determinize`] will create.
pub const MAX_DETERMINIZED_STATES: usize = 1 << 22;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OntFactorization {
    measurement: RatMatrix,
    preparation: RatMatrix,
    tuple_index: Option<Vec<Vec<usize>>>,
}

impl OntFactorization {
    pub fn new(measurement: RatMatrix, preparation: RatMatrix) -> Result<Self> {
        if measurement.cols() != preparation.rows() {
            return Err(Error::structural(format!(
                "M has {} ontic columns but P has {} ontic rows",
                measurement.cols(),
                preparation.rows()
            )));
        }
        Ok(OntFactorization {
            measurement,
            preparation,
            tuple_index: None,
        })
    }

    /// Attaches the `m`-tuple naming each ontic state (Model 2 indexing).
    pub fn with_tuple_index(mut self, index: Vec<Vec<usize>>) -> Result<Self> {
        if index.len() != self.omega() {
            return Err(Error::structural(format!(
                "tuple_index has {} entries for {} ontic states",
                index.len(),
                self.omega()
            )));
        }
        self.tuple_index = Some(index);
        Ok(self)
    }

    pub fn omega(&self) -> usize {
        self.measurement.cols()
    }

    /// The measurement matrix `M`.
    pub fn m(&self) -> &RatMatrix {
        &self.measurement
    }

    /// The preparation matrix `P`.
    pub fn p(&self) -> &RatMatrix {
        &self.preparation
    }

    pub fn tuple_index(&self) -> Option<&[Vec<usize>]> {
        self.tuple_index.as_deref()
    }

    /// All `M` entries are 0 or 1.
    pub fn is_deterministic(&self) -> bool {
        self.measurement.is_binary()
    }

    /// Outcome chosen by ontic state `j` in each measurement, for a
    /// deterministic `M`. `None` if some block of column `j` is not a unit vector.
    pub fn outcome_pattern(&self, j: usize, d: usize) -> Option<Vec<usize>> {
        let m = self.measurement.rows() / d;
        (0..m)
            .map(|x| {
                let ones: Vec<usize> = (0..d)
                    .filter(|&i| self.measurement.get(x * d + i, j).is_one())
                    .collect();
                let zeros = (0..d)
                    .filter(|&i| self.measurement.get(x * d + i, j).is_zero())
                    .count();
                (ones.len() == 1 && zeros == d - 1).then(|| ones[0])
            })
            .collect()
    }

    /// Builds a deterministic factorization from outcome patterns and `P`.
    pub fn from_patterns(
        d: usize,
        m: usize,
        patterns: &[Vec<usize>],
        preparation: RatMatrix,
    ) -> Result<Self> {
        let mut measurement = RatMatrix::zeros(d * m, patterns.len());
        for (j, pat) in patterns.iter().enumerate() {
            if pat.len() != m || pat.iter().any(|&i| i >= d) {
                return Err(Error::structural(format!("bad outcome pattern {pat:?}")));
            }
            for (x, &i) in pat.iter().enumerate() {
                measurement.set(x * d + i, j, Rational::one());
            }
        }
        OntFactorization::new(measurement, preparation)
    }
}

fn check_dims(table: &DataTable, f: &OntFactorization) -> Result<()> {
    if f.m().rows() != table.rows() || f.p().cols() != table.s() {
        return Err(Error::structural(format!(
            "factorization is ({}x{})({}x{}), table is {}x{}",
            f.m().rows(),
            f.m().cols(),
            f.p().rows(),
            f.p().cols(),
            table.rows(),
            table.s()
        )));
    }
    Ok(())
}

/// Checks every factorization invariant and `M P = D` exactly.
pub fn verify_of(table: &DataTable, f: &OntFactorization) -> Result<ValidationReport> {
    check_dims(table, f)?;
    let (d, m, s, omega) = (table.d(), table.m(), table.s(), f.omega());
    let (mm, pp) = (f.m(), f.p());
    let mut violations = Vec::new();
    let v = |kind, target, block, row, column| Violation {
        kind,
        target,
        block,
        row,
        column,
    };
    for r in 0..d * m {
        for j in 0..omega {
            if !mm.get(r, j).in_unit_interval() {
                violations.push(v(
                    ViolationKind::Range,
                    Target::Measurement,
                    Some(r / d),
                    Some(r),
                    Some(j),
                ));
            }
        }
    }
    for x in 0..m {
        for j in 0..omega {
            let sum: Rational = (0..d).map(|i| mm.get(x * d + i, j)).sum();
            if !sum.is_one() {
                violations.push(v(
                    ViolationKind::ColumnSum,
                    Target::Measurement,
                    Some(x),
                    None,
                    Some(j),
                ));
            }
        }
    }
    for j in 0..omega {
        for k in 0..s {
            if !pp.get(j, k).in_unit_interval() {
                violations.push(v(
                    ViolationKind::Range,
                    Target::Preparation,
                    None,
                    Some(j),
                    Some(k),
                ));
            }
        }
    }
    for k in 0..s {
        let sum: Rational = (0..omega).map(|j| pp.get(j, k)).sum();
        if !sum.is_one() {
            violations.push(v(
                ViolationKind::ColumnSum,
                Target::Preparation,
                None,
                None,
                Some(k),
            ));
        }
    }
    let product = mm.mul(pp)?;
    for r in 0..d * m {
        for k in 0..s {
            if product.get(r, k) != table.matrix().get(r, k) {
                violations.push(v(
                    ViolationKind::ProductMismatch,
                    Target::Table,
                    Some(r / d),
                    Some(r),
                    Some(k),
                ));
            }
        }
    }
    Ok(ValidationReport::from_violations(violations))
}

/// `Err(InvalidFactorization)` unless `verify_of` passes.
pub fn ensure_verified(table: &DataTable, f: &OntFactorization) -> Result<()> {
    let report = verify_of(table, f)?;
    if report.valid {
        Ok(())
    } else {
        Err(Error::InvalidFactorization(format!(
            "{} violation(s), first: {:?}",
            report.violations.len(),
            report.violations[0]
        )))
    }
}

/// `M = D`, `P = I`: one ontic state per preparation.
pub fn model1(table: &DataTable) -> Result<OntFactorization> {
    table.ensure_valid()?;
    OntFactorization::new(table.matrix().clone(), RatMatrix::identity(table.s()))
}

/// Size limits for [`model2_with_limits`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Model2Limits {
    /// Largest `d^m` accepted.
    pub max_states: u64,
    /// Largest `dm * d^m + d^m * s` (entries of `M` and `P`) accepted.
    pub max_entries: u64,
}

impl Default for Model2Limits {
    fn default() -> Self {
        Model2Limits {
            max_states: 1 << 24,
            max_entries: 1 << 24,
        }
    }
}

/// Number of Model 2 ontic states, `d^m`, or `None` on overflow.
pub fn model2_state_count(d: usize, m: usize) -> Option<u64> {
    (d as u64).checked_pow(u32::try_from(m).ok()?)
}

/// Model 2 with the default limits.
pub fn model2(table: &DataTable) -> Result<OntFactorization> {
    model2_with_limits(table, Model2Limits::default())
}

/// Deterministic factorization over all `d^m` outcome tuples.
///
/// State `(j_1, ..., j_m)` (row-major, `j_1` slowest) carries weight
/// `prod_x D^{(x)}_{j_x, k}` in preparation `k` and answers `j_x` to
/// measurement `x`.
pub fn model2_with_limits(table: &DataTable, limits: Model2Limits) -> Result<OntFactorization> {
    table.ensure_valid()?;
    let (d, m, s) = (table.d(), table.m(), table.s());
    let omega = model2_state_count(d, m)
        .filter(|&n| n <= limits.max_states)
        .ok_or_else(|| {
            Error::Resource(format!(
                "model 2 needs {d}^{m} states, above the cap of {}",
                limits.max_states
            ))
        })?;
    let entries = omega.saturating_mul((d * m + s) as u64);
    if entries > limits.max_entries {
        return Err(Error::Resource(format!(
            "model 2 needs {entries} matrix entries, above the cap of {}",
            limits.max_entries
        )));
    }
    let omega = omega as usize;
    let mut tuples = Vec::with_capacity(omega);
    let mut t = vec![0usize; m];
    for _ in 0..omega {
        tuples.push(t.clone());
        for x in (0..m).rev() {
            t[x] += 1;
            if t[x] < d {
                break;
            }
            t[x] = 0;
        }
    }
    let mut preparation = RatMatrix::zeros(omega, s);
    for (j, tuple) in tuples.iter().enumerate() {
        for k in 0..s {
            let mut w = Rational::one();
            for (x, &i) in tuple.iter().enumerate() {
                let e = table.entry(x, i, k);
                if e.is_zero() {
                    w = Rational::zero();
                    break;
                }
                w = w * e;
            }
            preparation.set(j, k, w);
        }
    }
    OntFactorization::from_patterns(d, m, &tuples, preparation)?.with_tuple_index(tuples)
}

/// One preparation column of Model 3: `(outcome pattern, weight)` pairs.
///
/// Repeatedly takes the smallest positive residual `v` (lowest row on ties),
/// selects that outcome in its measurement and the largest residual outcome
/// (lowest index on ties) in every other measurement, and subtracts `v` from
/// each selected entry. Identical patterns within the column are merged.
pub fn model3_column(table: &DataTable, k: usize) -> Vec<(Vec<usize>, Rational)> {
    let (d, m) = (table.d(), table.m());
    let mut residual: Vec<Rational> = table.matrix().column(k);
    let mut out: Vec<(Vec<usize>, Rational)> = Vec::new();
    loop {
        let Some((row, v)) = residual
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_positive())
            .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(&b.0)))
            .map(|(r, v)| (r, v.clone()))
        else {
            break;
        };
        let owner = row / d;
        let pattern: Vec<usize> = (0..m)
            .map(|x| {
                if x == owner {
                    return row % d;
                }
                let mut best = 0;
                for i in 1..d {
                    if residual[x * d + i] > residual[x * d + best] {
                        best = i;
                    }
                }
                best
            })
            .collect();
        for (x, &i) in pattern.iter().enumerate() {
            residual[x * d + i] -= &v;
        }
        match out.iter_mut().find(|(p, _)| *p == pattern) {
            Some((_, w)) => *w += v,
            None => out.push((pattern, v)),
        }
    }
    out
}

/// Greedy deterministic factorization with a private set of ontic states
/// per preparation (so the result is ψ-ontic).
pub fn model3(table: &DataTable) -> Result<OntFactorization> {
    table.ensure_valid()?;
    let (d, m, s) = (table.d(), table.m(), table.s());
    let columns: Vec<Vec<(Vec<usize>, Rational)>> = (0..s)
        .into_par_iter()
        .map(|k| model3_column(table, k))
        .collect();
    let omega: usize = columns.iter().map(Vec::len).sum();
    let mut patterns = Vec::with_capacity(omega);
    let mut preparation = RatMatrix::zeros(omega, s);
    for (k, col) in columns.into_iter().enumerate() {
        for (pattern, w) in col {
            preparation.set(patterns.len(), k, w);
            patterns.push(pattern);
        }
    }
    OntFactorization::from_patterns(d, m, &patterns, preparation)
}

/// How [`determinize`] distributes outcomes among the replicas of a state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum DeterminizePolicy {
    /// Outcome `i` gets the `i`-th contiguous run of replicas.
    #[default]
    Contiguous,
    /// Contiguous runs shuffled per (state, measurement) by a seeded RNG.
    SeededRandom { seed: u64 },
}

/// Replaces each ontic state `j` by `L_j` equally weighted deterministic
/// replicas, where `L_j` is the LCM of the denominators in column `j` of `M`.
/// Within each measurement, outcome `i` is given to `L_j * M_ij` replicas.
pub fn determinize(
    table: &DataTable,
    f: &OntFactorization,
    policy: DeterminizePolicy,
) -> Result<OntFactorization> {
    ensure_verified(table, f)?;
    let (d, m, s) = (table.d(), table.m(), table.s());
    let mm = f.m();
    let mut lcms = Vec::with_capacity(f.omega());
    let mut total: usize = 0;
    for j in 0..f.omega() {
        let column = mm.column(j);
        let l = lcm_of_denominators(&column)
            .to_usize()
            .filter(|&l| l <= MAX_DETERMINIZED_STATES)
            .ok_or_else(|| Error::Resource(format!("state {j} needs too many replicas")))?;
        total += l;
        if total > MAX_DETERMINIZED_STATES {
            return Err(Error::Resource(format!(
                "determinization needs more than {MAX_DETERMINIZED_STATES} states"
            )));
        }
        lcms.push(l);
    }
    if lcms.iter().all(|&l| l == 1) {
        return Ok(f.clone());
    }
    let mut rng = match policy {
        DeterminizePolicy::SeededRandom { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        DeterminizePolicy::Contiguous => None,
    };
    let mut patterns: Vec<Vec<usize>> = Vec::with_capacity(total);
    let mut preparation = RatMatrix::zeros(total, s);
    for (j, &l) in lcms.iter().enumerate() {
        let base = patterns.len();
        let scale = Rational::from_integer(l as i64);
        let mut block: Vec<Vec<usize>> = vec![vec![0; m]; l];
        for x in 0..m {
            let mut outcomes = Vec::with_capacity(l);
            for i in 0..d {
                let count = (mm.get(x * d + i, j) * &scale)
                    .numer()
                    .to_usize()
                    .expect("replica count is a small integer");
                outcomes.extend(std::iter::repeat_n(i, count));
            }
            if let Some(rng) = rng.as_mut() {
                outcomes.shuffle(rng);
            }
            for (r, i) in outcomes.into_iter().enumerate() {
                block[r][x] = i;
            }
        }
        for k in 0..s {
            let w = f.p().get(j, k);
            if !w.is_zero() {
                let share = w / &scale;
                for r in 0..l {
                    preparation.set(base + r, k, share.clone());
                }
            }
        }
        patterns.extend(block);
    }
    OntFactorization::from_patterns(d, m, &patterns, preparation)
}

/// Worst-case reference values that hold over all tables of the same shape.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorstCaseNote {
    /// `min(d^m, s)`: some table of this shape needs this many states.
    pub tight_bound: u64,
    /// `dm + 1`: a deterministic factorization able to reach an arbitrary
    /// point of `[0,1]^{dm}` needs this many states.
    pub deterministic_general_position: usize,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub rank_lb: usize,
    pub pattern_lb: usize,
    pub lower: usize,
    pub upper_indet: usize,
    /// `d^m`, saturated at `u64::MAX`.
    pub upper_det_model2: u64,
    pub upper_det_model2_saturated: bool,
    pub upper_det_model3: usize,
    pub worst_case_note: WorstCaseNote,
}

/// Brackets the minimal ontic-state count of `table`.
pub fn bounds_report(table: &DataTable) -> Result<BoundsReport> {
    table.ensure_valid()?;
    let (d, m, s) = (table.d(), table.m(), table.s());
    let rank_lb = table.rank();
    let pattern_lb = table.pattern_lower_bound();
    let model2 = model2_state_count(d, m);
    let upper_det_model2 = model2.unwrap_or(u64::MAX);
    let tight_bound = upper_det_model2.min(s as u64);
    Ok(BoundsReport {
        rank_lb,
        pattern_lb,
        lower: rank_lb.max(pattern_lb),
        upper_indet: s,
        upper_det_model2,
        upper_det_model2_saturated: model2.is_none(),
        upper_det_model3: model3(table)?.omega(),
        worst_case_note: WorstCaseNote {
            tight_bound,
            deterministic_general_position: d * m + 1,
            text: format!(
                "over all tables with d={d}, m={m}, s={s}, some table needs {tight_bound} \
                 ontic states; a deterministic model covering arbitrary data needs {}",
                d * m + 1
            ),
        },
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorizationDoc {
    omega: usize,
    #[serde(rename = "M")]
    m: Vec<Vec<String>>,
    #[serde(rename = "P")]
    p: Vec<Vec<String>>,
    deterministic: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tuple_index: Option<Vec<Vec<usize>>>,
}

pub fn parse_factorization(bytes: &[u8]) -> Result<OntFactorization> {
    let doc: FactorizationDoc = serde_json::from_slice(bytes).map_err(json_error)?;
    let rows = doc.m.len();
    let s = doc.p.first().map_or(0, Vec::len);
    let mm = parse_grid("M", doc.m, rows, doc.omega)?;
    let pp = parse_grid("P", doc.p, doc.omega, s)?;
    let f = OntFactorization::new(mm, pp)?;
    if f.is_deterministic() != doc.deterministic {
        return Err(Error::parse(
            "deterministic",
            format!(
                "flag says {} but M says {}",
                doc.deterministic,
                f.is_deterministic()
            ),
        ));
    }
    match doc.tuple_index {
        Some(index) => f
            .with_tuple_index(index)
            .map_err(|e| Error::parse("tuple_index", e.to_string())),
        None => Ok(f),
    }
}

pub fn serialize_factorization(f: &OntFactorization) -> String {
    let doc = FactorizationDoc {
        omega: f.omega(),
        m: grid_strings(f.m()),
        p: grid_strings(f.p()),
        deterministic: f.is_deterministic(),
        tuple_index: f.tuple_index.clone(),
    };
    serde_json::to_string_pretty(&doc).expect("factorization serializes")
}

/// Groups identical `M` columns; each group lists state indices in order,
/// groups ordered by first member.
pub(crate) fn column_groups(mm: &RatMatrix) -> Vec<Vec<usize>> {
    let mut index: HashMap<Vec<Rational>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..mm.cols() {
        let g = *index.entry(mm.column(j)).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(j);
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pauli_qubit_table;
    use crate::table::random_table;
    use proptest::prelude::*;

    fn model2_table() -> DataTable {
        DataTable::new(
            3,
            2,
            2,
            RatMatrix::from_ints(&[&[0, 4], &[2, 2], &[4, 0], &[2, 3], &[2, 3], &[2, 0]], 6),
        )
        .unwrap()
    }

    fn toy_mp() -> OntFactorization {
        let mm = RatMatrix::from_ints(
            &[
                &[1, 1, 0, 0],
                &[0, 0, 1, 1],
                &[1, 0, 1, 0],
                &[0, 1, 0, 1],
                &[1, 0, 0, 1],
                &[0, 1, 1, 0],
            ],
            1,
        );
        let pp = RatMatrix::from_ints(
            &[
                &[1, 0, 1, 0, 1, 0],
                &[1, 0, 0, 1, 0, 1],
                &[0, 1, 1, 0, 0, 1],
                &[0, 1, 0, 1, 1, 0],
            ],
            2,
        );
        OntFactorization::new(mm, pp).unwrap()
    }

    #[test]
    fn model2_matches_worked_example() {
        let f = model2(&model2_table()).unwrap();
        let expected_m = RatMatrix::from_ints(
            &[
                &[1, 1, 1, 0, 0, 0, 0, 0, 0],
                &[0, 0, 0, 1, 1, 1, 0, 0, 0],
                &[0, 0, 0, 0, 0, 0, 1, 1, 1],
                &[1, 0, 0, 1, 0, 0, 1, 0, 0],
                &[0, 1, 0, 0, 1, 0, 0, 1, 0],
                &[0, 0, 1, 0, 0, 1, 0, 0, 1],
            ],
            1,
        );
        let expected_p = RatMatrix::from_ints(
            &[
                &[0, 6],
                &[0, 6],
                &[0, 0],
                &[2, 3],
                &[2, 3],
                &[2, 0],
                &[4, 0],
                &[4, 0],
                &[4, 0],
            ],
            18,
        );
        assert_eq!(f.m(), &expected_m);
        assert_eq!(f.p(), &expected_p);
        assert_eq!(f.tuple_index().unwrap()[5], vec![1, 2]);
        assert!(verify_of(&model2_table(), &f).unwrap().valid);
    }

    #[test]
    fn model2_marginals_drop_one_factor() {
        let t = random_table(3, 3, 2, 5, 7).unwrap();
        let f = model2(&t).unwrap();
        let index = f.tuple_index().unwrap();
        for k in 0..2 {
            for skip in 0..3 {
                let mut sums: HashMap<Vec<usize>, Rational> = HashMap::new();
                for (j, tuple) in index.iter().enumerate() {
                    let mut key = tuple.clone();
                    key.remove(skip);
                    *sums.entry(key).or_insert_with(Rational::zero) += f.p().get(j, k);
                }
                for (key, sum) in sums {
                    let mut expected = Rational::one();
                    let others = (0..3).filter(|&x| x != skip);
                    for (x, &i) in others.zip(&key) {
                        expected = expected * t.entry(x, i, k);
                    }
                    assert_eq!(sum, expected);
                }
            }
        }
    }

    #[test]
    fn model3_single_column_decomposition() {
        let col = model3_column(&model2_table(), 1);
        assert_eq!(
            col,
            vec![
                (vec![1, 0], Rational::new(1, 3)),
                (vec![0, 0], Rational::new(1, 6)),
                (vec![0, 1], Rational::new(1, 2)),
            ]
        );
    }

    #[test]
    fn model3_matches_worked_example() {
        let f = model3(&model2_table()).unwrap();
        let expected_m = RatMatrix::from_ints(
            &[
                &[0, 0, 0, 0, 1, 1],
                &[1, 0, 0, 1, 0, 0],
                &[0, 1, 1, 0, 0, 0],
                &[1, 0, 0, 1, 1, 0],
                &[0, 1, 0, 0, 0, 1],
                &[0, 0, 1, 0, 0, 0],
            ],
            1,
        );
        let expected_p =
            RatMatrix::from_ints(&[&[2, 0], &[2, 0], &[2, 0], &[0, 2], &[0, 1], &[0, 3]], 6);
        assert_eq!(f.omega(), 6);
        assert_eq!(f.m(), &expected_m);
        assert_eq!(f.p(), &expected_p);
    }

    #[test]
    fn determinize_two_by_two() {
        let t = DataTable::new(
            2,
            2,
            2,
            RatMatrix::from_ints(&[&[6, 8], &[6, 4], &[9, 12], &[3, 0]], 12),
        )
        .unwrap();
        let f = determinize(&t, &model1(&t).unwrap(), DeterminizePolicy::Contiguous).unwrap();
        assert_eq!(f.omega(), 7);
        assert!(f.is_deterministic());
        for j in 0..7 {
            let (w0, w1) = if j < 4 {
                (Rational::new(1, 4), Rational::zero())
            } else {
                (Rational::zero(), Rational::new(1, 3))
            };
            assert_eq!(f.p().get(j, 0), &w0);
            assert_eq!(f.p().get(j, 1), &w1);
        }
        assert!(verify_of(&t, &f).unwrap().valid);
    }

    #[test]
    fn determinize_kernaghan() {
        let t = crate::quantum::kernaghan_table();
        let f = determinize(&t, &model1(&t).unwrap(), DeterminizePolicy::Contiguous).unwrap();
        assert_eq!(f.omega(), 80);
        assert!(verify_of(&t, &f).unwrap().valid);
    }

    #[test]
    fn toy_mp_verifies() {
        let rep = verify_of(&pauli_qubit_table(), &toy_mp()).unwrap();
        assert!(rep.valid, "{rep:?}");
    }

    #[test]
    fn flipped_entry_fails() {
        let f = toy_mp();
        let mut mm = f.m().clone();
        mm.set(0, 0, Rational::zero());
        let bad = OntFactorization::new(mm, f.p().clone()).unwrap();
        let rep = verify_of(&pauli_qubit_table(), &bad).unwrap();
        assert!(!rep.valid);
        assert!(rep
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::ProductMismatch));
        assert!(rep
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::ColumnSum && v.target == Target::Measurement));
    }

    #[test]
    fn verify_dimension_mismatch() {
        let f = model1(&model2_table()).unwrap();
        assert!(matches!(
            verify_of(&pauli_qubit_table(), &f),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn model1_shapes() {
        let t = model2_table();
        let f = model1(&t).unwrap();
        assert_eq!(f.m(), t.matrix());
        assert_eq!(f.p(), &RatMatrix::identity(2));
        assert!(verify_of(&t, &f).unwrap().valid);
        let f = model1(&pauli_qubit_table()).unwrap();
        assert_eq!(f.p(), &RatMatrix::identity(6));
    }

    #[test]
    fn model2_single_measurement() {
        let t = DataTable::new(3, 1, 1, RatMatrix::from_ints(&[&[1], &[2], &[3]], 6)).unwrap();
        let f = model2(&t).unwrap();
        assert_eq!(f.m(), &RatMatrix::identity(3));
        assert_eq!(f.p().column(0), t.matrix().column(0));
    }

    #[test]
    fn model2_deterministic_column() {
        let t =
            DataTable::new(2, 2, 1, RatMatrix::from_ints(&[&[0], &[1], &[1], &[0]], 1)).unwrap();
        let f = model2(&t).unwrap();
        let col = f.p().column(0);
        // tuple (1, 0) is index 2 in row-major order
        assert_eq!(col.iter().filter(|v| !v.is_zero()).count(), 1);
        assert!(col[2].is_one());
    }

    #[test]
    fn model2_cap() {
        let t = random_table(4, 11, 2, 0, 4).unwrap();
        assert!(matches!(model2(&t), Err(Error::Resource(_))));
        let limits = Model2Limits {
            max_states: 8,
            max_entries: u64::MAX,
        };
        assert!(matches!(
            model2_with_limits(&model2_table(), limits),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn model3_fully_deterministic_column() {
        let t =
            DataTable::new(2, 2, 1, RatMatrix::from_ints(&[&[0], &[1], &[1], &[0]], 1)).unwrap();
        let col = model3_column(&t, 0);
        assert_eq!(col, vec![(vec![1, 0], Rational::one())]);
    }

    #[test]
    fn determinize_leaves_deterministic_alone() {
        let t = pauli_qubit_table();
        let f = toy_mp();
        assert_eq!(
            determinize(&t, &f, DeterminizePolicy::Contiguous).unwrap(),
            f
        );
    }

    #[test]
    fn determinize_random_policy_is_seeded() {
        let t = random_table(3, 3, 3, 11, 6).unwrap();
        let f = model1(&t).unwrap();
        let a = determinize(&t, &f, DeterminizePolicy::SeededRandom { seed: 4 }).unwrap();
        let b = determinize(&t, &f, DeterminizePolicy::SeededRandom { seed: 4 }).unwrap();
        assert_eq!(a, b);
        assert!(verify_of(&t, &a).unwrap().valid);
    }

    #[test]
    fn bounds_for_trivial_table() {
        let t = DataTable::new(2, 1, 1, RatMatrix::from_ints(&[&[1], &[0]], 1)).unwrap();
        let b = bounds_report(&t).unwrap();
        assert_eq!(b.lower, 1);
        assert_eq!(b.upper_indet, 1);
    }

    #[test]
    fn bounds_saturate() {
        let t = random_table(4, 40, 1, 0, 2).unwrap();
        let b = bounds_report(&t).unwrap();
        assert!(b.upper_det_model2_saturated);
        assert_eq!(b.upper_det_model2, u64::MAX);
    }

    #[test]
    fn json_round_trip_and_flag_check() {
        let f = model2(&model2_table()).unwrap();
        let json = serialize_factorization(&f);
        assert_eq!(parse_factorization(json.as_bytes()).unwrap(), f);
        let lying = json.replace("\"deterministic\": true", "\"deterministic\": false");
        assert!(matches!(
            parse_factorization(lying.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn constructors_verify(seed in 0u64..1_000, d in 2usize..4, m in 1usize..4, s in 1usize..4) {
            let t = random_table(d, m, s, seed, 6).unwrap();
            let rank = t.rank();
            let m1 = model1(&t).unwrap();
            let fs = [
                model2(&t).unwrap(),
                model3(&t).unwrap(),
                determinize(&t, &m1, DeterminizePolicy::Contiguous).unwrap(),
                determinize(&t, &m1, DeterminizePolicy::SeededRandom { seed }).unwrap(),
                m1,
            ];
            for f in &fs {
                prop_assert!(verify_of(&t, f).unwrap().valid);
                prop_assert!(rank <= f.omega());
            }
            prop_assert_eq!(fs[0].omega(), d.pow(m as u32));
            prop_assert!(fs[1].omega() <= s * (d * m - m + 1));
            for f in &fs[..4] {
                prop_assert!(f.is_deterministic());
                for j in 0..f.omega() {
                    prop_assert!(f.outcome_pattern(j, d).is_some());
                }
            }
        }
    }
}
