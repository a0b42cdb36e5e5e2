//! Data tables generated by pure states and projective measurements.
//!
//! Floating point appears only in this module. Born probabilities computed
//! in `f64` are turned into exact rationals by [`born_table`]; the two named
//! tables (Pauli qubit and the Kernaghan set) are built in exact arithmetic
//! directly.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::RatMatrix;
use crate::rational::Rational;
use crate::table::{json_error, DataTable};

/// Orthonormality tolerance for PVM spanning vectors.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Default tolerance used by [`born_table`] when turning floats into rationals.
pub const DEFAULT_RATIONALIZE_TOL: f64 = 1e-9;

/// Largest projector count accepted by the exhaustive KS search.
pub const DEFAULT_KS_CAP: usize = 30;

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    components: Vec<Complex64>,
}

impl StateVector {
    /// Normalizes `components`; fails on the zero vector.
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        let norm = components.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::structural(
                "state vector has zero or non-finite norm",
            ));
        }
        Ok(StateVector {
            components: components.into_iter().map(|c| c / norm).collect(),
        })
    }

    pub fn from_real(components: &[f64]) -> Result<Self> {
        StateVector::new(components.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `|i>` in dimension `dim`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut components = vec![Complex64::zero(); dim];
        components[i] = Complex64::one();
        StateVector { components }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Projector-valued measure: one list of orthonormal spanning vectors per
/// outcome. An outcome with no vectors is a null (padding) outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct Pvm {
    dim: usize,
    elements: Vec<Vec<StateVector>>,
}

impl Pvm {
    pub fn new(dim: usize, elements: Vec<Vec<StateVector>>) -> Result<Self> {
        let all: Vec<&StateVector> = elements.iter().flatten().collect();
        if let Some(v) = all.iter().find(|v| v.dim() != dim) {
            return Err(Error::structural(format!(
                "PVM vector of dimension {} in a dimension-{dim} PVM",
                v.dim()
            )));
        }
        if all.len() > dim {
            return Err(Error::structural(format!(
                "PVM spans {} dimensions in a {dim}-dimensional space",
                all.len()
            )));
        }
        for (a, u) in all.iter().enumerate() {
            for (b, v) in all.iter().enumerate().skip(a) {
                let target = if a == b { 1.0 } else { 0.0 };
                if (u.inner(v) - Complex64::new(target, 0.0)).norm() > ORTHONORMAL_TOL {
                    return Err(Error::structural(format!(
                        "PVM spanning vectors {a} and {b} are not orthonormal"
                    )));
                }
            }
        }
        Ok(Pvm { dim, elements })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Vec<StateVector>] {
        &self.elements
    }

    /// `<psi|Pi_i|psi>`.
    pub fn probability(&self, outcome: usize, state: &StateVector) -> f64 {
        self.elements[outcome]
            .iter()
            .map(|v| v.inner(state).norm_sqr())
            .sum()
    }

    /// Total dimension spanned by all outcomes.
    pub fn spanned_dim(&self) -> usize {
        self.elements.iter().map(Vec::len).sum()
    }

    /// `sum_i Pi_i` as a dense `dim x dim` matrix, row-major.
    pub fn projector_sum(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::zero(); self.dim * self.dim];
        for v in self.elements.iter().flatten() {
            for (a, va) in v.components.iter().enumerate() {
                for (b, vb) in v.components.iter().enumerate() {
                    out[a * self.dim + b] += va * vb.conj();
                }
            }
        }
        out
    }
}

/// States and measurements that reproduce a data table via the Born rule.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRealization {
    pub dim: usize,
    pub states: Vec<StateVector>,
    pub pvms: Vec<Pvm>,
}

impl QuantumRealization {
    pub fn new(dim: usize, states: Vec<StateVector>, pvms: Vec<Pvm>) -> Result<Self> {
        if let Some(s) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::structural(format!(
                "state of dimension {} in a dimension-{dim} realization",
                s.dim()
            )));
        }
        if let Some(p) = pvms.iter().find(|p| p.dim() != dim) {
            return Err(Error::structural(format!(
                "PVM of dimension {} in a dimension-{dim} realization",
                p.dim()
            )));
        }
        Ok(QuantumRealization { dim, states, pvms })
    }
}

/// Closest-to-simple rational: the fraction with the smallest denominator in
/// the closed interval `[lo, hi]`, `0 <= lo <= hi`.
fn simplest_in(lo: &BigRational, hi: &BigRational) -> BigRational {
    let c = lo.ceil();
    if &c <= hi {
        return c;
    }
    let f = lo.floor();
    let inner = simplest_in(&(hi - &f).recip(), &(lo - &f).recip());
    f + inner.recip()
}

/// Smallest-denominator rational within `tol` of `x`, clamped to `[0, 1]`.
pub fn rationalize_probability(x: f64, tol: f64) -> Rational {
    let lo = (x - tol).clamp(0.0, 1.0);
    let hi = (x + tol).clamp(0.0, 1.0);
    let lo = BigRational::from_float(lo).unwrap_or_else(BigRational::zero);
    let hi = BigRational::from_float(hi).unwrap_or_else(BigRational::one);
    Rational::from(simplest_in(&lo, &hi))
}

/// Born-rule table `D^{(x)}_{i,k} = <psi_k|Pi^{(x)}_i|psi_k>`, rationalized.
///
/// Each float is replaced by the smallest-denominator rational within
/// `rationalize_tol`; any residual left in a block column is then added to
/// its largest entry so the block sums to exactly one.
pub fn born_table(states: &[StateVector], pvms: &[Pvm], rationalize_tol: f64) -> Result<DataTable> {
    if !(rationalize_tol > 0.0) {
        return Err(Error::structural(
            "rationalization tolerance must be positive",
        ));
    }
    let first = pvms
        .first()
        .ok_or_else(|| Error::structural("at least one measurement is required"))?;
    let (dim, d, m, s) = (first.dim(), first.outcomes(), pvms.len(), states.len());
    if let Some(p) = pvms.iter().find(|p| p.dim() != dim || p.outcomes() != d) {
        return Err(Error::structural(format!(
            "PVMs disagree: dimension {} with {} outcomes vs dimension {dim} with {d}",
            p.dim(),
            p.outcomes()
        )));
    }
    if let Some(st) = states.iter().find(|st| st.dim() != dim) {
        return Err(Error::structural(format!(
            "state of dimension {} measured by dimension-{dim} PVMs",
            st.dim()
        )));
    }
    let mut entries = RatMatrix::zeros(d * m, s);
    for (k, state) in states.iter().enumerate() {
        for (x, pvm) in pvms.iter().enumerate() {
            let mut block: Vec<Rational> = (0..d)
                .map(|i| rationalize_probability(pvm.probability(i, state), rationalize_tol))
                .collect();
            let residual = Rational::one() - block.iter().sum::<Rational>();
            if residual.abs().to_f64() > d as f64 * rationalize_tol {
                return Err(Error::Rationalization(format!(
                    "measurement {x}, preparation {k}: residual {} exceeds {}",
                    residual.to_f64(),
                    d as f64 * rationalize_tol
                )));
            }
            if !residual.is_zero() {
                let mut largest = 0;
                for i in 1..d {
                    if block[i] > block[largest] {
                        largest = i;
                    }
                }
                block[largest] += residual;
            }
            for (i, v) in block.into_iter().enumerate() {
                entries.set(x * d + i, k, v);
            }
        }
    }
    let table = DataTable::new(d, m, s, entries)?;
    let report = table.validate();
    if !report.valid {
        return Err(Error::Rationalization(format!(
            "renormalized table has {} violation(s)",
            report.violations.len()
        )));
    }
    Ok(table)
}

const PAULI_LABELS: [&str; 6] = ["X+", "X-", "Y+", "Y-", "Z+", "Z-"];

/// The qubit table for the eigenstates of X, Y, Z measured in the X, Y, Z
/// eigenbases: 1 on matching eigenstates, 0 on the opposite one, 1/2 across
/// bases.
pub fn pauli_qubit_table() -> DataTable {
    let mut entries = RatMatrix::zeros(6, 6);
    for r in 0..6 {
        for k in 0..6 {
            let v = if r == k {
                Rational::one()
            } else if r / 2 == k / 2 {
                Rational::zero()
            } else {
                Rational::new(1, 2)
            };
            entries.set(r, k, v);
        }
    }
    let labels: Vec<String> = PAULI_LABELS.iter().map(|s| s.to_string()).collect();
    DataTable::new(2, 3, 6, entries)
        .and_then(|t| t.with_row_labels(labels.clone()))
        .and_then(|t| t.with_prep_labels(labels))
        .expect("Pauli table is well formed")
}

/// Eigenstates X+, X-, Y+, Y-, Z+, Z- and the X, Y, Z eigenbasis PVMs.
pub fn pauli_states_and_pvms() -> (Vec<StateVector>, Vec<Pvm>) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let states = vec![
        StateVector::new(vec![c(h, 0.0), c(h, 0.0)]),
        StateVector::new(vec![c(h, 0.0), c(-h, 0.0)]),
        StateVector::new(vec![c(h, 0.0), c(0.0, h)]),
        StateVector::new(vec![c(h, 0.0), c(0.0, -h)]),
        StateVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]),
        StateVector::new(vec![c(0.0, 0.0), c(1.0, 0.0)]),
    ]
    .into_iter()
    .collect::<Result<Vec<_>>>()
    .expect("Pauli eigenstates are nonzero");
    let pvms = (0..3)
        .map(|b| {
            Pvm::new(
                2,
                vec![vec![states[2 * b].clone()], vec![states[2 * b + 1].clone()]],
            )
        })
        .collect::<Result<Vec<_>>>()
        .expect("Pauli eigenbases are orthonormal");
    (states, pvms)
}

/// The 20 Kernaghan vectors in four dimensions, unnormalized.
pub const KERNAGHAN_VECTORS: [[i64; 4]; 20] = [
    [1, 0, 0, 0],
    [0, 1, 0, 0],
    [0, 0, 1, 0],
    [0, 0, 0, 1],
    [0, 0, 1, 1],
    [0, 0, 1, -1],
    [1, -1, 0, 0],
    [0, 1, 0, 1],
    [1, 0, 1, 0],
    [0, 1, 0, -1],
    [1, 1, 1, 1],
    [1, -1, -1, 1],
    [1, 1, -1, -1],
    [0, 1, 1, 0],
    [0, 1, -1, 0],
    [1, 0, 0, -1],
    [-1, 1, 1, 1],
    [1, -1, 1, 1],
    [1, 1, -1, 1],
    [1, 1, 1, -1],
];

/// The 11 four-outcome measurements, as one-based vector indices in outcome order.
pub const KERNAGHAN_CONTEXTS: [[usize; 4]; 11] = [
    [1, 2, 3, 4],
    [1, 2, 5, 6],
    [1, 3, 8, 10],
    [1, 4, 14, 15],
    [17, 18, 19, 20],
    [17, 19, 9, 10],
    [18, 19, 14, 16],
    [19, 20, 5, 7],
    [15, 16, 11, 12],
    [6, 7, 11, 13],
    [9, 8, 13, 12],
];

/// `|<a|b>|^2 / (<a|a><b|b>)` for real integer vectors, exactly.
fn integer_overlap(a: &[i64; 4], b: &[i64; 4]) -> Rational {
    let dot: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: i64 = a.iter().map(|x| x * x).sum();
    let nb: i64 = b.iter().map(|x| x * x).sum();
    Rational::from_big(BigInt::from(dot * dot), BigInt::from(na * nb))
}

/// 44 x 20 table of the Kernaghan set: 11 four-outcome measurements on the
/// 20 defining states. Rows are labeled by projector (`"psi3"` appears in
/// measurements 1 and 3), columns by state.
pub fn kernaghan_table() -> DataTable {
    let mut entries = RatMatrix::zeros(44, 20);
    let mut row_labels = Vec::with_capacity(44);
    for (x, ctx) in KERNAGHAN_CONTEXTS.iter().enumerate() {
        for (i, &p) in ctx.iter().enumerate() {
            row_labels.push(format!("psi{p}"));
            for (k, state) in KERNAGHAN_VECTORS.iter().enumerate() {
                entries.set(
                    4 * x + i,
                    k,
                    integer_overlap(&KERNAGHAN_VECTORS[p - 1], state),
                );
            }
        }
    }
    let prep_labels = (1..=20).map(|k| format!("psi{k}")).collect();
    DataTable::new(4, 11, 20, entries)
        .and_then(|t| t.with_row_labels(row_labels))
        .and_then(|t| t.with_prep_labels(prep_labels))
        .expect("Kernaghan table is well formed")
}

/// The normalized Kernaghan states and rank-one PVMs as floating-point data.
pub fn kernaghan_realization() -> QuantumRealization {
    let states: Vec<StateVector> = KERNAGHAN_VECTORS
        .iter()
        .map(|v| StateVector::from_real(&v.map(|c| c as f64)))
        .collect::<Result<_>>()
        .expect("Kernaghan vectors are nonzero");
    let pvms = KERNAGHAN_CONTEXTS
        .iter()
        .map(|ctx| {
            Pvm::new(
                4,
                ctx.iter().map(|&p| vec![states[p - 1].clone()]).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()
        .expect("Kernaghan contexts are orthonormal bases");
    QuantumRealization {
        dim: 4,
        states,
        pvms,
    }
}

/// Orthonormal completion of the unit vector `v`: returns a `d x d`
/// orthogonal matrix (as rows) whose first row is `v`. Remaining rows come
/// from Gram-Schmidt over standard basis seeds in index order.
fn orthogonal_with_first_row(v: &[f64]) -> Vec<Vec<f64>> {
    let d = v.len();
    let mut rows: Vec<Vec<f64>> = vec![v.to_vec()];
    for seed in 0..d {
        if rows.len() == d {
            break;
        }
        let mut w = vec![0.0; d];
        w[seed] = 1.0;
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for b in &rows {
                let proj: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= proj * bi;
                }
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            rows.push(w.into_iter().map(|x| x / norm).collect());
        }
    }
    assert_eq!(rows.len(), d, "standard seeds span the space");
    rows
}

/// Quantum realization of an arbitrary valid table.
///
/// Each preparation `k` is the first basis vector of its own `d`-dimensional
/// block (`dim = s * d`). For every `(k, x)` an orthogonal matrix with first
/// row `[sqrt(p_1), ..., sqrt(p_d)]` is built; its columns are the outcome
/// directions inside block `k`, and outcome `i` of measurement `x` projects
/// onto the direct sum of the `i`-th columns over all blocks.
pub fn realize(table: &DataTable) -> Result<QuantumRealization> {
    table.ensure_valid()?;
    let (d, m, s) = (table.d(), table.m(), table.s());
    let dim = s * d;
    let embed = |k: usize, local: &[f64]| -> StateVector {
        let mut c = vec![Complex64::zero(); dim];
        for (i, &x) in local.iter().enumerate() {
            c[k * d + i] = Complex64::new(x, 0.0);
        }
        StateVector { components: c }
    };
    let states: Vec<StateVector> = (0..s).map(|k| StateVector::basis(dim, k * d)).collect();
    let mut pvms = Vec::with_capacity(m);
    for x in 0..m {
        let mut elements: Vec<Vec<StateVector>> = vec![Vec::with_capacity(s); d];
        for k in 0..s {
            let v: Vec<f64> = (0..d)
                .map(|i| table.entry(x, i, k).to_f64().sqrt())
                .collect();
            let u = orthogonal_with_first_row(&v);
            for (i, element) in elements.iter_mut().enumerate() {
                let column: Vec<f64> = u.iter().map(|row| row[i]).collect();
                element.push(embed(k, &column));
            }
        }
        pvms.push(Pvm::new(dim, elements)?);
    }
    Ok(QuantumRealization { dim, states, pvms })
}

/// Largest absolute difference between the Born probabilities of `real`
/// and the entries of `table`.
pub fn verify_realization(table: &DataTable, real: &QuantumRealization) -> Result<f64> {
    let (d, m, s) = (table.d(), table.m(), table.s());
    if real.states.len() != s || real.pvms.len() != m {
        return Err(Error::structural(format!(
            "realization has {} states and {} measurements; table needs {s} and {m}",
            real.states.len(),
            real.pvms.len()
        )));
    }
    if let Some(p) = real
        .pvms
        .iter()
        .find(|p| p.outcomes() != d || p.dim() != real.dim)
    {
        return Err(Error::structural(format!(
            "PVM with {} outcomes in dimension {}; expected {d} outcomes in dimension {}",
            p.outcomes(),
            p.dim(),
            real.dim
        )));
    }
    if real.states.iter().any(|st| st.dim() != real.dim) {
        return Err(Error::structural(
            "state dimension differs from realization dimension",
        ));
    }
    let mut worst = 0.0f64;
    for (x, pvm) in real.pvms.iter().enumerate() {
        for i in 0..d {
            for (k, st) in real.states.iter().enumerate() {
                let diff = (pvm.probability(i, st) - table.entry(x, i, k).to_f64()).abs();
                worst = worst.max(diff);
            }
        }
    }
    Ok(worst)
}

/// Projectors and the measurement contexts that contain them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KsInstance {
    #[serde(rename = "n")]
    n_projectors: usize,
    contexts: Vec<Vec<usize>>,
}

impl KsInstance {
    pub fn new(n_projectors: usize, contexts: Vec<Vec<usize>>) -> Result<Self> {
        for (c, ctx) in contexts.iter().enumerate() {
            for (a, &p) in ctx.iter().enumerate() {
                if p >= n_projectors {
                    return Err(Error::structural(format!(
                        "context {c} names projector {p}, but n = {n_projectors}"
                    )));
                }
                if ctx[..a].contains(&p) {
                    return Err(Error::structural(format!(
                        "context {c} lists projector {p} twice"
                    )));
                }
            }
        }
        Ok(KsInstance {
            n_projectors,
            contexts,
        })
    }

    pub fn n_projectors(&self) -> usize {
        self.n_projectors
    }

    pub fn contexts(&self) -> &[Vec<usize>] {
        &self.contexts
    }

    /// How many contexts each projector appears in.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_projectors];
        for p in self.contexts.iter().flatten() {
            counts[*p] += 1;
        }
        counts
    }

    /// The parity argument: an odd number of contexts in which every
    /// projector appears an even number of times admits no assignment.
    pub fn has_parity_obstruction(&self) -> bool {
        self.contexts.len() % 2 == 1 && self.multiplicities().iter().all(|c| c % 2 == 0)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let raw: KsInstance = serde_json::from_slice(bytes).map_err(json_error)?;
        KsInstance::new(raw.n_projectors, raw.contexts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

/// The Kernaghan projectors (zero-based) and their 11 contexts.
pub fn kernaghan_instance() -> KsInstance {
    KsInstance {
        n_projectors: 20,
        contexts: KERNAGHAN_CONTEXTS
            .iter()
            .map(|c| c.iter().map(|p| p - 1).collect())
            .collect(),
    }
}

/// Searches for a truth assignment giving exactly one true projector per
/// context, using the default projector cap.
pub fn ks_noncontextual_search(inst: &KsInstance) -> Result<Option<Vec<bool>>> {
    ks_noncontextual_search_with_cap(inst, DEFAULT_KS_CAP)
}

/// Depth-first search over projectors in index order, trying `true` before
/// `false`, so the first assignment found is the lexicographically greatest
/// when `true > false`. Contexts are checked as soon as any member is set.
pub fn ks_noncontextual_search_with_cap(
    inst: &KsInstance,
    cap: usize,
) -> Result<Option<Vec<bool>>> {
    let n = inst.n_projectors;
    if n > cap {
        return Err(Error::Resource(format!(
            "{n} projectors exceed the exhaustive search cap of {cap}"
        )));
    }
    let mut member_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, ctx) in inst.contexts.iter().enumerate() {
        for &p in ctx {
            member_of[p].push(c);
        }
    }
    let mut search = KsSearch {
        member_of: &member_of,
        trues: vec![0; inst.contexts.len()],
        open: inst.contexts.iter().map(Vec::len).collect(),
        assignment: Vec::with_capacity(n),
    };
    // an empty context can never hold a true projector
    if search.open.contains(&0) {
        return Ok(None);
    }
    Ok(search.run(n).then_some(search.assignment))
}

struct KsSearch<'a> {
    member_of: &'a [Vec<usize>],
    trues: Vec<usize>,
    open: Vec<usize>,
    assignment: Vec<bool>,
}

impl KsSearch<'_> {
    fn run(&mut self, n: usize) -> bool {
        let p = self.assignment.len();
        if p == n {
            return true;
        }
        for value in [true, false] {
            if self.assign(p, value) {
                self.assignment.push(value);
                if self.run(n) {
                    return true;
                }
                self.assignment.pop();
            }
            self.unassign(p, value);
        }
        false
    }

    /// Applies the assignment and reports whether every touched context is
    /// still satisfiable. Always paired with `unassign`.
    fn assign(&mut self, p: usize, value: bool) -> bool {
        let mut ok = true;
        for &c in &self.member_of[p] {
            self.open[c] -= 1;
            if value {
                self.trues[c] += 1;
            }
            if self.trues[c] > 1 || (self.open[c] == 0 && self.trues[c] == 0) {
                ok = false;
            }
        }
        ok
    }

    fn unassign(&mut self, p: usize, value: bool) {
        for &c in &self.member_of[p] {
            self.open[c] += 1;
            if value {
                self.trues[c] -= 1;
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RealizationDoc {
    dim: usize,
    states: Vec<Vec<[f64; 2]>>,
    pvms: Vec<Vec<Vec<Vec<[f64; 2]>>>>,
}

fn vector_doc(v: &StateVector) -> Vec<[f64; 2]> {
    v.components.iter().map(|c| [c.re, c.im]).collect()
}

fn vector_from_doc(doc: Vec<[f64; 2]>) -> Result<StateVector> {
    StateVector::new(
        doc.into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect(),
    )
}

/// Serializes a realization as `{dim, states, pvms}` with complex numbers as `[re, im]`.
pub fn serialize_realization(real: &QuantumRealization) -> String {
    let doc = RealizationDoc {
        dim: real.dim,
        states: real.states.iter().map(vector_doc).collect(),
        pvms: real
            .pvms
            .iter()
            .map(|p| {
                p.elements
                    .iter()
                    .map(|e| e.iter().map(vector_doc).collect())
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("realization serializes")
}

pub fn parse_realization(bytes: &[u8]) -> Result<QuantumRealization> {
    let doc: RealizationDoc = serde_json::from_slice(bytes).map_err(json_error)?;
    let states = doc
        .states
        .into_iter()
        .map(vector_from_doc)
        .collect::<Result<Vec<_>>>()?;
    let pvms = doc
        .pvms
        .into_iter()
        .map(|elements| {
            let elements = elements
                .into_iter()
                .map(|vs| {
                    vs.into_iter()
                        .map(vector_from_doc)
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Pvm::new(doc.dim, elements)
        })
        .collect::<Result<Vec<_>>>()?;
    QuantumRealization::new(doc.dim, states, pvms)
}
