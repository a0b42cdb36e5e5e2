//! Reducing the ontic-state count of a factorization while keeping `D = MP`.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{column_groups, ensure_verified, OntFactorization};
use crate::matrix::RatMatrix;
use crate::rational::Rational;
use crate::table::DataTable;

/// Merges ontic states with identical `M` columns, summing their `P` rows.
pub fn dedupe(table: &DataTable, f: &OntFactorization) -> Result<OntFactorization> {
    ensure_verified(table, f)?;
    Ok(merge_identical_columns(f))
}

pub(crate) fn merge_identical_columns(f: &OntFactorization) -> OntFactorization {
    let groups = column_groups(f.m());
    if groups.len() == f.omega() {
        return f.clone();
    }
    let (rows, s) = (f.m().rows(), f.p().cols());
    let mut mm = RatMatrix::zeros(rows, groups.len());
    let mut pp = RatMatrix::zeros(groups.len(), s);
    for (g, members) in groups.iter().enumerate() {
        for r in 0..rows {
            mm.set(r, g, f.m().get(r, members[0]).clone());
        }
        for k in 0..s {
            let w: Rational = members.iter().map(|&j| f.p().get(j, k)).sum();
            pp.set(g, k, w);
        }
    }
    OntFactorization::new(mm, pp).expect("merged shapes agree")
}

/// A deterministic factorization whose ontic states split into one block per
/// preparation, each block carrying uniform weight `1/L_k` in its own
/// preparation only. `determinize(model1(T))` has this shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockUniformOF {
    base: OntFactorization,
    blocks: Vec<Vec<usize>>,
}

impl BlockUniformOF {
    pub fn new(base: OntFactorization) -> Result<Self> {
        if !base.is_deterministic() {
            return Err(Error::structural(
                "block-uniform factorization needs a 0/1 M",
            ));
        }
        let s = base.p().cols();
        let mut blocks = vec![Vec::new(); s];
        for j in 0..base.omega() {
            let owners: Vec<usize> = (0..s).filter(|&k| !base.p().get(j, k).is_zero()).collect();
            match owners.as_slice() {
                [k] => blocks[*k].push(j),
                _ => {
                    return Err(Error::structural(format!(
                        "ontic state {j} has weight in {} preparations, expected 1",
                        owners.len()
                    )))
                }
            }
        }
        for (k, block) in blocks.iter().enumerate() {
            let w = Rational::new(1, block.len().max(1) as i64);
            if block.iter().any(|&j| base.p().get(j, k) != &w) {
                return Err(Error::structural(format!(
                    "preparation {k} does not weight its {} states uniformly",
                    block.len()
                )));
            }
        }
        Ok(BlockUniformOF { base, blocks })
    }

    pub fn base(&self) -> &OntFactorization {
        &self.base
    }

    /// State indices owned by each preparation.
    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompressionParams {
    pub seed: u64,
    pub restarts: usize,
    /// Move attempts per restart (Method 1) or greedy rounds (Method 2).
    pub iterations: usize,
    /// Largest configuration count [`exhaustive_method1`] will enumerate.
    pub exhaustive_cap: u64,
}

impl Default for CompressionParams {
    fn default() -> Self {
        CompressionParams {
            seed: 0,
            restarts: 100,
            iterations: 10_000,
            exhaustive_cap: 1 << 22,
        }
    }
}

impl CompressionParams {
    fn check(&self) -> Result<()> {
        if self.restarts == 0 || self.iterations == 0 || self.exhaustive_cap == 0 {
            return Err(Error::structural("compression counts must be at least 1"));
        }
        Ok(())
    }
}

type Pattern = Vec<u32>;

/// Outcome patterns of all states plus the bookkeeping needed to score them.
#[derive(Clone)]
struct Config {
    patterns: Vec<Pattern>,
    counts: HashMap<Pattern, u32>,
}

impl Config {
    fn new(patterns: Vec<Pattern>) -> Self {
        let mut counts: HashMap<Pattern, u32> = HashMap::new();
        for p in &patterns {
            *counts.entry(p.clone()).or_default() += 1;
        }
        Config { patterns, counts }
    }

    fn distinct(&self) -> usize {
        self.counts.len()
    }

    fn set(&mut self, j: usize, x: usize, value: u32) {
        let old = self.patterns[j].clone();
        let c = self.counts.get_mut(&old).expect("pattern is counted");
        *c -= 1;
        if *c == 0 {
            self.counts.remove(&old);
        }
        self.patterns[j][x] = value;
        *self.counts.entry(self.patterns[j].clone()).or_default() += 1;
    }

    fn swap(&mut self, a: usize, b: usize, x: usize) {
        let (va, vb) = (self.patterns[a][x], self.patterns[b][x]);
        if va != vb {
            self.set(a, x, vb);
            self.set(b, x, va);
        }
    }
}

fn patterns_of(table: &DataTable, f: &OntFactorization) -> Vec<Pattern> {
    (0..f.omega())
        .map(|j| {
            f.outcome_pattern(j, table.d())
                .expect("deterministic column")
                .into_iter()
                .map(|i| i as u32)
                .collect()
        })
        .collect()
}

fn rebuild(table: &DataTable, f: &BlockUniformOF, patterns: &[Pattern]) -> OntFactorization {
    let patterns: Vec<Vec<usize>> = patterns
        .iter()
        .map(|p| p.iter().map(|&i| i as usize).collect())
        .collect();
    let out = OntFactorization::from_patterns(table.d(), table.m(), &patterns, f.base.p().clone())
        .expect("patterns come from a valid factorization");
    merge_identical_columns(&out)
}

fn check_block_input(table: &DataTable, f: &BlockUniformOF) -> Result<()> {
    ensure_verified(table, &f.base)
}

/// Rearrangements of `values` in lexicographic order, starting from sorted.
fn next_permutation(values: &mut [u32]) -> bool {
    let Some(i) = (1..values.len()).rev().find(|&i| values[i - 1] < values[i]) else {
        return false;
    };
    let j = (i..values.len())
        .rev()
        .find(|&j| values[j] > values[i - 1])
        .unwrap();
    values.swap(i - 1, j);
    values[i..].reverse();
    true
}

fn arrangements(mut values: Vec<u32>, cap: u64) -> Option<Vec<Vec<u32>>> {
    values.sort_unstable();
    let mut out = vec![values.clone()];
    while next_permutation(&mut values) {
        if out.len() as u64 >= cap {
            return None;
        }
        out.push(values.clone());
    }
    Some(out)
}

/// Searches every rearrangement of each (preparation block, measurement)
/// slice of `M` and returns the deduplicated optimum.
///
/// Relabelling the states of one block does not change the number of
/// distinct columns, so the first measurement with more than one value in a
/// block is held fixed. The remaining slices are enumerated as an odometer
/// (last slice fastest); the first configuration reaching the minimum wins.
pub fn exhaustive_method1(
    table: &DataTable,
    f: &BlockUniformOF,
    params: &CompressionParams,
) -> Result<OntFactorization> {
    params.check()?;
    check_block_input(table, f)?;
    let m = table.m();
    let mut config = Config::new(patterns_of(table, &f.base));
    let mut slices: Vec<(usize, usize, Vec<Vec<u32>>)> = Vec::new();
    let mut total: u64 = 1;
    for (k, block) in f.blocks.iter().enumerate() {
        let mut held = false;
        for x in 0..m {
            let values: Vec<u32> = block.iter().map(|&j| config.patterns[j][x]).collect();
            if values.iter().all(|&v| v == values[0]) {
                continue;
            }
            if !held {
                held = true;
                continue;
            }
            let too_many = || {
                Error::Resource(format!(
                    "more than {} configurations; use compress_method1",
                    params.exhaustive_cap
                ))
            };
            let options = arrangements(values, params.exhaustive_cap).ok_or_else(too_many)?;
            total = total
                .checked_mul(options.len() as u64)
                .filter(|&t| t <= params.exhaustive_cap)
                .ok_or_else(too_many)?;
            slices.push((k, x, options));
        }
    }
    let apply = |config: &mut Config, slice: &(usize, usize, Vec<Vec<u32>>), choice: usize| {
        let (k, x, options) = slice;
        for (&j, &v) in f.blocks[*k].iter().zip(&options[choice]) {
            if config.patterns[j][*x] != v {
                config.set(j, *x, v);
            }
        }
    };
    let mut digits = vec![0usize; slices.len()];
    for (slice, &choice) in slices.iter().zip(&digits) {
        apply(&mut config, slice, choice);
    }
    let mut best = (config.distinct(), config.patterns.clone());
    'odometer: loop {
        let mut pos = slices.len();
        loop {
            if pos == 0 {
                break 'odometer;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < slices[pos].2.len() {
                apply(&mut config, &slices[pos], digits[pos]);
                break;
            }
            digits[pos] = 0;
            apply(&mut config, &slices[pos], 0);
        }
        if config.distinct() < best.0 {
            best = (config.distinct(), config.patterns.clone());
        }
    }
    Ok(rebuild(table, f, &best.1))
}

struct Climber<'a> {
    blocks: &'a [Vec<usize>],
    owner: Vec<usize>,
    m: usize,
}

impl Climber<'_> {
    /// Swaps values of measurement `x` between two states of one block.
    fn random_swap(
        &self,
        config: &mut Config,
        rng: &mut ChaCha8Rng,
        undo: &mut Vec<(usize, usize, usize)>,
    ) {
        let block = &self.blocks[rng.gen_range(0..self.blocks.len())];
        if block.len() < 2 {
            return;
        }
        let x = rng.gen_range(0..self.m);
        let a = block[rng.gen_range(0..block.len())];
        let b = block[rng.gen_range(0..block.len())];
        if config.patterns[a][x] != config.patterns[b][x] {
            config.swap(a, b, x);
            undo.push((a, b, x));
        }
    }

    /// Rewrites state `a` to copy the pattern of state `c`, borrowing each
    /// needed value from another state of `a`'s block.
    fn merge_toward(
        &self,
        config: &mut Config,
        rng: &mut ChaCha8Rng,
        undo: &mut Vec<(usize, usize, usize)>,
    ) {
        let n = config.patterns.len();
        let a = rng.gen_range(0..n);
        let c = rng.gen_range(0..n);
        if config.patterns[a] == config.patterns[c] {
            return;
        }
        let block = &self.blocks[self.owner[a]];
        for x in 0..self.m {
            let want = config.patterns[c][x];
            if config.patterns[a][x] == want {
                continue;
            }
            let donors: Vec<usize> = block
                .iter()
                .copied()
                .filter(|&b| b != a && config.patterns[b][x] == want)
                .collect();
            let Some(&b) = donors.choose(rng) else {
                return;
            };
            config.swap(a, b, x);
            undo.push((a, b, x));
        }
    }

    fn climb(&self, mut config: Config, iterations: usize, rng: &mut ChaCha8Rng) -> Config {
        let plateau_budget = (iterations / 10).max(1);
        let mut stale = 0;
        let mut undo = Vec::new();
        for _ in 0..iterations {
            let before = config.distinct();
            undo.clear();
            if rng.gen_bool(0.5) {
                self.merge_toward(&mut config, rng, &mut undo);
            } else {
                self.random_swap(&mut config, rng, &mut undo);
            }
            let after = config.distinct();
            if after < before {
                stale = 0;
                continue;
            }
            if after > before {
                for &(a, b, x) in undo.iter().rev() {
                    config.swap(a, b, x);
                }
            }
            stale += 1;
            if stale > plateau_budget {
                break;
            }
        }
        config
    }
}

/// Randomized hill climbing over the same move class as
/// [`exhaustive_method1`], with independent restarts.
///
/// Restart `r` draws from a generator seeded with `seed ^ r`. Restart 0
/// starts from the input arrangement; the others shuffle every
/// (block, measurement) slice first. The result with the fewest distinct
/// columns wins, lowest restart index on ties.
pub fn compress_method1(
    table: &DataTable,
    f: &BlockUniformOF,
    params: &CompressionParams,
) -> Result<OntFactorization> {
    params.check()?;
    check_block_input(table, f)?;
    let m = table.m();
    let mut owner = vec![0; f.base.omega()];
    for (k, block) in f.blocks.iter().enumerate() {
        for &j in block {
            owner[j] = k;
        }
    }
    let climber = Climber {
        blocks: &f.blocks,
        owner,
        m,
    };
    let start = patterns_of(table, &f.base);
    let results: Vec<(usize, Vec<Pattern>)> = (0..params.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ r as u64);
            let mut patterns = start.clone();
            if r > 0 {
                for block in &f.blocks {
                    for x in 0..m {
                        let mut values: Vec<u32> = block.iter().map(|&j| patterns[j][x]).collect();
                        values.shuffle(&mut rng);
                        for (&j, v) in block.iter().zip(values) {
                            patterns[j][x] = v;
                        }
                    }
                }
            }
            let config = climber.climb(Config::new(patterns), params.iterations, &mut rng);
            (config.distinct(), config.patterns)
        })
        .collect();
    let best = results
        .into_iter()
        .enumerate()
        .min_by_key(|(r, (distinct, _))| (*distinct, *r))
        .map(|(_, (_, patterns))| patterns)
        .expect("at least one restart");
    Ok(rebuild(table, f, &best))
}

/// Mass of one preparation over the `d^m` Model 2 cells (row-major tuples).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridDistribution {
    d: usize,
    m: usize,
    mass: Vec<Rational>,
}

/// A recorded 4-cell move.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMove {
    pub preparation: usize,
    pub cell: Vec<usize>,
    pub x: usize,
    pub y: usize,
    pub alt_x: usize,
    pub alt_y: usize,
    pub amount: Rational,
}

impl GridDistribution {
    pub fn new(d: usize, m: usize, mass: Vec<Rational>) -> Result<Self> {
        let cells = crate::factorization::model2_state_count(d, m)
            .filter(|&n| n == mass.len() as u64)
            .ok_or_else(|| {
                Error::structural(format!("grid needs {d}^{m} cells, got {}", mass.len()))
            })?;
        debug_assert_eq!(cells as usize, mass.len());
        Ok(GridDistribution { d, m, mass })
    }

    pub fn index(&self, cell: &[usize]) -> usize {
        cell.iter().fold(0, |acc, &i| acc * self.d + i)
    }

    pub fn cell(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.m];
        for x in (0..self.m).rev() {
            out[x] = index % self.d;
            index /= self.d;
        }
        out
    }

    pub fn mass(&self, cell: &[usize]) -> &Rational {
        &self.mass[self.index(cell)]
    }

    pub fn masses(&self) -> &[Rational] {
        &self.mass
    }

    /// Marginal distribution of axis `x`.
    pub fn marginal(&self, x: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.d];
        for (idx, w) in self.mass.iter().enumerate() {
            out[self.cell(idx)[x]] += w;
        }
        out
    }

    /// Moves the whole mass `v` of `cell` out along axes `x` and `y`:
    /// `cell` and its opposite corner lose `v`, the two adjacent corners
    /// gain `v`. Returns `None` (leaving the grid untouched) unless the move
    /// is legal and the opposite corner holds at least `v`.
    pub fn apply_move(
        &mut self,
        cell: &[usize],
        x: usize,
        y: usize,
        alt_x: usize,
        alt_y: usize,
    ) -> Option<Rational> {
        if x == y || x >= self.m || y >= self.m || alt_x >= self.d || alt_y >= self.d {
            return None;
        }
        if alt_x == cell[x] || alt_y == cell[y] {
            return None;
        }
        let v = self.mass(cell).clone();
        if !v.is_positive() {
            return None;
        }
        let mut opposite = cell.to_vec();
        opposite[x] = alt_x;
        opposite[y] = alt_y;
        if self.mass(&opposite) < &v {
            return None;
        }
        let mut side_x = cell.to_vec();
        side_x[x] = alt_x;
        let mut side_y = cell.to_vec();
        side_y[y] = alt_y;
        let (c, o, sx, sy) = (
            self.index(cell),
            self.index(&opposite),
            self.index(&side_x),
            self.index(&side_y),
        );
        self.mass[c] = Rational::zero();
        self.mass[o] -= &v;
        self.mass[sx] += &v;
        self.mass[sy] += &v;
        Some(v)
    }
}

/// Outcome of [`compress_method2_with_log`].
#[derive(Clone, Debug)]
pub struct Method2Result {
    pub factorization: OntFactorization,
    /// Every move applied, in order.
    pub moves: Vec<GridMove>,
    /// Tuples of the removed states, in removal order.
    pub removed: Vec<Vec<usize>>,
}

pub fn compress_method2(
    table: &DataTable,
    f: &OntFactorization,
    params: &CompressionParams,
) -> Result<OntFactorization> {
    Ok(compress_method2_with_log(table, f, params)?.factorization)
}

/// Greedy removal of Model 2 states by marginal-preserving 4-cell moves.
///
/// Each round first drops every state with no mass anywhere, then takes
/// candidate states in order of (preparations with positive mass, total
/// mass, index) and removes the first one that a single move per
/// preparation can empty. Moves never send mass to removed states.
/// Stops after `params.iterations` rounds or when no candidate can be
/// removed.
pub fn compress_method2_with_log(
    table: &DataTable,
    f: &OntFactorization,
    params: &CompressionParams,
) -> Result<Method2Result> {
    params.check()?;
    let index = f.tuple_index().ok_or_else(|| {
        Error::structural("method 2 needs a tuple-indexed (Model 2) factorization")
    })?;
    ensure_verified(table, f)?;
    let (d, m, s) = (table.d(), table.m(), table.s());
    let cells = crate::factorization::model2_state_count(d, m).unwrap_or(u64::MAX);
    if cells != f.omega() as u64 {
        return Err(Error::structural("method 2 needs all d^m tuple states"));
    }
    let mut grids = Vec::with_capacity(s);
    for k in 0..s {
        let mut mass = vec![Rational::zero(); f.omega()];
        for (j, tuple) in index.iter().enumerate() {
            let idx = tuple.iter().fold(0, |acc, &i| acc * d + i);
            mass[idx] = f.p().get(j, k).clone();
        }
        grids.push(GridDistribution::new(d, m, mass)?);
    }
    let n = f.omega();
    let mut alive = vec![true; n];
    let mut moves = Vec::new();
    let mut removed = Vec::new();
    let empty_everywhere =
        |grids: &[GridDistribution], c: usize| grids.iter().all(|g| g.mass[c].is_zero());
    for _ in 0..params.iterations {
        for c in 0..n {
            if alive[c] && empty_everywhere(&grids, c) {
                alive[c] = false;
                removed.push(grids[0].cell(c));
            }
        }
        let mut candidates: Vec<(usize, Rational, usize)> = (0..n)
            .filter(|&c| alive[c])
            .map(|c| {
                let positive = grids.iter().filter(|g| g.mass[c].is_positive()).count();
                let total: Rational = grids.iter().map(|g| &g.mass[c]).sum();
                (positive, total, c)
            })
            .collect();
        candidates.sort();
        let mut progressed = false;
        for (_, _, c) in candidates {
            let cell = grids[0].cell(c);
            let mut trial = grids.clone();
            let mut trial_moves = Vec::new();
            let emptied = (0..s).all(|k| {
                if trial[k].mass[c].is_zero() {
                    return true;
                }
                match find_move(&mut trial[k], &cell, &alive) {
                    Some(mut mv) => {
                        mv.preparation = k;
                        trial_moves.push(mv);
                        true
                    }
                    None => false,
                }
            });
            if emptied {
                grids = trial;
                moves.extend(trial_moves);
                alive[c] = false;
                removed.push(cell);
                progressed = true;
                break;
            }
        }
        if !progressed {
            break;
        }
    }
    let kept: Vec<usize> = (0..n).filter(|&c| alive[c]).collect();
    let tuples: Vec<Vec<usize>> = kept.iter().map(|&c| grids[0].cell(c)).collect();
    let mut pp = RatMatrix::zeros(kept.len(), s);
    for (row, &c) in kept.iter().enumerate() {
        for (k, g) in grids.iter().enumerate() {
            pp.set(row, k, g.mass[c].clone());
        }
    }
    let factorization =
        OntFactorization::from_patterns(d, m, &tuples, pp)?.with_tuple_index(tuples)?;
    Ok(Method2Result {
        factorization,
        moves,
        removed,
    })
}

fn find_move(grid: &mut GridDistribution, cell: &[usize], alive: &[bool]) -> Option<GridMove> {
    let (d, m) = (grid.d, grid.m);
    for x in 0..m {
        for y in 0..m {
            if x == y {
                continue;
            }
            for alt_x in (0..d).filter(|&i| i != cell[x]) {
                for alt_y in (0..d).filter(|&i| i != cell[y]) {
                    let mut side_x = cell.to_vec();
                    side_x[x] = alt_x;
                    let mut side_y = cell.to_vec();
                    side_y[y] = alt_y;
                    if !alive[grid.index(&side_x)] || !alive[grid.index(&side_y)] {
                        continue;
                    }
                    if let Some(amount) = grid.apply_move(cell, x, y, alt_x, alt_y) {
                        return Some(GridMove {
                            preparation: 0,
                            cell: cell.to_vec(),
                            x,
                            y,
                            alt_x,
                            alt_y,
                            amount,
                        });
                    }
                }
            }
        }
    }
    None
}
