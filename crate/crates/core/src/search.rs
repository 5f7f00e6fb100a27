//! Exhaustive search for `(M, q)` complementary pairs at small lengths.
//!
//! [`exhaustive_gcp_search`] enumerates every pair; [`find_pair`] stops at
//! the lexicographically first one and is much cheaper.
//!
//! Both sequences are filled from the two ends inward. After level `k` the
//! positions `0..=k` and `M-1-k..M` of `a` and `b` are fixed, which fully
//! determines `C_a(λ) + C_b(λ)` for every `λ >= M-1-k`; the newly determined
//! shift must cancel before the search descends. Top-level branches run as
//! independent workers and the merged result is sorted, so the output does
//! not depend on the worker count.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

use thiserror::Error;

use crate::construct::SeedPair;
use crate::cyclotomic::ZeroTester;
use crate::par::{self, Parallelism};
use crate::sequence::SeqPair;

pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000_000;

/// Nodes a worker visits between updates of the shared counter.
const FLUSH_EVERY: u64 = 1 << 12;

/// Random root-to-leaf probes behind [`estimate_nodes`].
const ESTIMATE_PROBES: usize = 64;

/// A search is refused up front when the estimate exceeds the budget by
/// this factor. The estimator tends to undershoot on skewed trees, so the
/// slack only guards against rejecting feasible searches.
const ESTIMATE_SLACK: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("search too large: more than {budget} nodes (raise the node budget)")]
    TooLarge { budget: u64 },
    #[error("search too large: about {estimate:.1e} nodes estimated, budget is {budget}")]
    Estimated { estimate: f64, budget: u64 },
    #[error("length must be at least 1")]
    ZeroLength,
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchSpec {
    pub length: usize,
    pub q: usize,
    /// Fix `a_0 = b_0 = 0`.
    pub normalize: bool,
    /// Keep only the first pairs in lexicographic order.
    pub max_results: Option<usize>,
    pub node_budget: u64,
}

impl SearchSpec {
    pub fn new(length: usize, q: usize) -> Self {
        Self {
            length,
            q,
            normalize: true,
            max_results: None,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn normalized(mut self, normalize: bool) -> Self {
        self.normalize = normalize;
        self
    }

    pub fn max_results(mut self, cap: Option<usize>) -> Self {
        self.max_results = cap;
        self
    }

    pub fn node_budget(mut self, budget: u64) -> Self {
        self.node_budget = budget;
        self
    }

    fn validate(&self) -> Result<(), SearchError> {
        if self.length == 0 {
            return Err(SearchError::ZeroLength);
        }
        if self.q < 2 {
            return Err(SearchError::AlphabetTooSmall(self.q));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Sorted by `(a, b)` exponent vectors.
    pub pairs: Vec<SeqPair>,
    /// Set when `max_results` dropped pairs.
    pub truncated: bool,
    pub nodes: u64,
}

/// All pairs matching `spec`, in lexicographic order.
///
/// `max_results` truncates after the complete enumeration, so a capped
/// result is always a prefix of the uncapped one.
pub fn exhaustive_gcp_search(
    spec: &SearchSpec,
    par: Parallelism,
) -> Result<SearchOutcome, SearchError> {
    spec.validate()?;
    let estimate = estimate_nodes(spec, ESTIMATE_PROBES);
    if estimate > ESTIMATE_SLACK * spec.node_budget as f64 {
        return Err(SearchError::Estimated {
            estimate,
            budget: spec.node_budget,
        });
    }
    let budget = Budget::new(spec.node_budget);
    let tester = ZeroTester::for_order(spec.q);
    let levels = spec.length.div_ceil(2);

    // Expand a couple of levels sequentially to get independent branches.
    let split = match levels.saturating_sub(1).min(2) {
        s if s > 0 && !par.is_sequential() => s,
        _ => levels,
    };
    let mut root = Searcher::new(spec, &tester, &budget);
    let mut prefixes = Vec::new();
    let r = root.run(0, split, &mut |s| prefixes.push(s.snapshot()));
    root.flush();
    r?;

    let mut pairs = if split == levels {
        // The pass above already collected complete solutions.
        prefixes
    } else {
        let chunks = par::map(&prefixes, par, |(a, b)| {
            let mut w = Searcher::new(spec, &tester, &budget);
            w.restore(a, b, split);
            let mut found = Vec::new();
            let r = w.run(split, levels, &mut |s| found.push(s.snapshot()));
            w.flush();
            r.map(|_| found)
        });
        let mut all = Vec::new();
        for c in chunks {
            all.extend(c?);
        }
        all
    };
    let nodes = budget.used.load(Ordering::Relaxed);
    if nodes > spec.node_budget {
        return Err(SearchError::TooLarge {
            budget: spec.node_budget,
        });
    }

    pairs.sort_unstable();
    let mut truncated = false;
    if let Some(cap) = spec.max_results {
        truncated = pairs.len() > cap;
        pairs.truncate(cap);
    }
    let pairs = pairs
        .into_iter()
        .map(|(a, b)| SeqPair::from_exps(spec.q, a, b).expect("search emits valid exponents"))
        .collect();
    Ok(SearchOutcome {
        pairs,
        truncated,
        nodes,
    })
}

/// Knuth's random-probe estimate of the number of nodes
/// [`exhaustive_gcp_search`] visits.
///
/// Each probe walks from the root to a leaf, choosing uniformly among the
/// surviving children, and scores the nodes visited at each level by the
/// product of the branching factors above it. The probe sequence is
/// seeded from `(M, q)`, so the estimate is deterministic.
pub fn estimate_nodes(spec: &SearchSpec, probes: usize) -> f64 {
    use rand::{Rng, SeedableRng};
    if spec.validate().is_err() || probes == 0 {
        return 0.0;
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64((spec.length * 1000 + spec.q) as u64);
    let budget = Budget::new(u64::MAX);
    let tester = ZeroTester::for_order(spec.q);
    let levels = spec.length.div_ceil(2);
    let mut s = Searcher::new(spec, &tester, &budget);
    let mut total = 0.0;
    for _ in 0..probes {
        s.restore(&vec![0; spec.length], &vec![0; spec.length], 0);
        let mut weight = 1.0;
        for level in 0..levels {
            let before = s.visited;
            let mut children = Vec::new();
            if s.run(level, level + 1, &mut |st| children.push(st.snapshot()))
                .is_err()
            {
                break;
            }
            total += weight * (s.visited - before) as f64;
            if children.is_empty() {
                break;
            }
            weight *= children.len() as f64;
            let (a, b) = &children[rng.random_range(0..children.len())];
            s.restore(a, b, level + 1);
        }
    }
    total / probes as f64
}

/// The lexicographically first normalized `(M, q)` pair, if any.
pub fn find_pair(
    length: usize,
    q: usize,
    par: Parallelism,
) -> Result<Option<SeqPair>, SearchError> {
    find_pair_within(length, q, DEFAULT_NODE_BUDGET, par)
}

/// [`find_pair`] with an explicit node budget.
///
/// Unlike the full enumeration this scans `a` in lexicographic order and
/// completes each candidate with an edge-in search for `b`, so it stops at
/// the first hit. A candidate is skipped when `|A(w)|^2 > 2M` at one of a
/// few sample points `w` on the unit circle, since a complementary partner
/// needs `|A(w)|^2 + |B(w)|^2 = 2M` everywhere. Candidates are split into
/// lexicographic blocks; blocks run in waves of one per worker and the
/// earliest block with a hit wins, independent of the worker count.
pub fn find_pair_within(
    length: usize,
    q: usize,
    node_budget: u64,
    par: Parallelism,
) -> Result<Option<SeqPair>, SearchError> {
    let spec = SearchSpec::new(length, q).node_budget(node_budget);
    spec.validate()?;
    let budget = Budget::new(node_budget);
    let tester = ZeroTester::for_order(q);
    let prefix_len = (length - 1).min(3);
    let blocks = q.pow(prefix_len as u32);
    let wave = par::workers(par);

    let mut start = 0;
    while start < blocks {
        let ids: Vec<usize> = (start..blocks.min(start + wave)).collect();
        let hits = par::map(&ids, par, |&block| {
            let mut scan = LexScan::new(&spec, &tester, &budget);
            let mut id = block;
            for pos in (1..=prefix_len).rev() {
                scan.searcher.a[pos] = id % q;
                id /= q;
            }
            let r = scan.descend(1, prefix_len);
            scan.searcher.flush();
            r
        });
        for hit in hits {
            if let Some((a, b)) = hit? {
                return Ok(Some(SeqPair::from_exps(q, a, b).expect("valid exponents")));
            }
        }
        start += wave;
    }
    if budget.used.load(Ordering::Relaxed) > node_budget {
        return Err(SearchError::TooLarge {
            budget: node_budget,
        });
    }
    Ok(None)
}

/// [`find_pair`] at `q = 4`, as a seed for the expansion.
pub fn find_seed(length: usize, par: Parallelism) -> Result<Option<SeedPair>, SearchError> {
    Ok(find_pair(length, 4, par)?
        .map(|p| SeedPair::from_pair(&p).expect("quaternary search output")))
}

struct Budget {
    limit: u64,
    used: AtomicU64,
    exceeded: AtomicBool,
}

impl Budget {
    fn new(limit: u64) -> Arc<Self> {
        Arc::new(Self {
            limit,
            used: AtomicU64::new(0),
            exceeded: AtomicBool::new(false),
        })
    }
}

/// Depth-first state for one worker.
struct Searcher<'a> {
    m: usize,
    q: usize,
    normalize: bool,
    a: Vec<usize>,
    b: Vec<usize>,
    /// `acc[λ·q + e]`: multiplicity of `z^e` in `C_a(λ) + C_b(λ)`.
    acc: Vec<i64>,
    scratch: Vec<i128>,
    /// Real and imaginary parts of `z^e`, for the magnitude bound.
    unit: Vec<(f64, f64)>,
    tester: &'a ZeroTester,
    budget: &'a Budget,
    local_nodes: u64,
    visited: u64,
    /// `a` is loaded in full and only `b` is searched.
    a_fixed: bool,
}

type Snapshot = (Vec<usize>, Vec<usize>);

impl<'a> Searcher<'a> {
    fn new(spec: &SearchSpec, tester: &'a ZeroTester, budget: &'a Budget) -> Self {
        Self {
            m: spec.length,
            q: spec.q,
            normalize: spec.normalize,
            a: vec![0; spec.length],
            b: vec![0; spec.length],
            acc: vec![0; spec.length * spec.q],
            scratch: Vec::with_capacity(spec.q),
            unit: (0..spec.q)
                .map(|e| {
                    let t = std::f64::consts::TAU * e as f64 / spec.q as f64;
                    (t.cos(), t.sin())
                })
                .collect(),
            tester,
            budget,
            local_nodes: 0,
            visited: 0,
            a_fixed: false,
        }
    }

    /// Fixes all of `a` (already stored in `self.a`) and clears `b`.
    fn load_a(&mut self) {
        self.a_fixed = true;
        self.acc.iter_mut().for_each(|c| *c = 0);
        let (m, q) = (self.m, self.q);
        for i in 0..m {
            for j in i + 1..m {
                let e = (self.a[i] + q - self.a[j]) % q;
                self.acc[(j - i) * q + e] += 1;
            }
        }
    }

    fn snapshot(&self) -> Snapshot {
        (self.a.clone(), self.b.clone())
    }

    /// Loads a prefix produced at `level` levels and rebuilds the accumulators.
    fn restore(&mut self, a: &[usize], b: &[usize], level: usize) {
        self.a.copy_from_slice(a);
        self.b.copy_from_slice(b);
        self.acc.iter_mut().for_each(|c| *c = 0);
        let m = self.m;
        let fixed: Vec<usize> = (0..level).chain(m - level..m).collect();
        for (x, &i) in fixed.iter().enumerate() {
            for &j in &fixed[x + 1..] {
                for seq in [&self.a, &self.b] {
                    let e = (seq[i] + self.q - seq[j]) % self.q;
                    self.acc[(j - i) * self.q + e] += 1;
                }
            }
        }
    }

    fn flush(&mut self) {
        if self.local_nodes > 0 {
            let used = self
                .budget
                .used
                .fetch_add(self.local_nodes, Ordering::Relaxed)
                + self.local_nodes;
            self.local_nodes = 0;
            if used > self.budget.limit {
                self.budget.exceeded.store(true, Ordering::Relaxed);
            }
        }
    }

    fn visit(&mut self) -> Result<(), SearchError> {
        self.local_nodes += 1;
        self.visited += 1;
        if self.local_nodes >= FLUSH_EVERY {
            self.flush();
        }
        if self.budget.exceeded.load(Ordering::Relaxed) {
            return Err(SearchError::TooLarge {
                budget: self.budget.limit,
            });
        }
        Ok(())
    }

    fn shift_cancels(&mut self, lam: usize) -> bool {
        let slot = &self.acc[lam * self.q..(lam + 1) * self.q];
        self.tester.is_zero_in(slot, &mut self.scratch)
    }

    /// Whether shift `lam` can still cancel: the fixed terms sum to `P` and
    /// each of the `R` open terms is a unit, so cancelling needs `|P| <= R`.
    fn shift_reachable(&self, lam: usize) -> bool {
        let slot = &self.acc[lam * self.q..(lam + 1) * self.q];
        let (mut re, mut im, mut fixed) = (0.0, 0.0, 0i64);
        for (&c, &(ur, ui)) in slot.iter().zip(&self.unit) {
            re += c as f64 * ur;
            im += c as f64 * ui;
            fixed += c;
        }
        let open = (2 * (self.m - lam)) as i64 - fixed;
        // Values are small integers combinations; 1e-6 absorbs rounding only.
        re * re + im * im <= (open * open) as f64 + 1e-6
    }

    /// Adds (`sign = 1`) or removes (`sign = -1`) the products of position
    /// `pos` of one member with the already fixed positions of that member.
    /// Fixed positions are `0..front` and `back..m`.
    fn apply(&mut self, which_b: bool, pos: usize, front: usize, back: usize, sign: i64) {
        let q = self.q;
        let seq = if which_b { &self.b } else { &self.a };
        for j in (0..front).chain(back..self.m) {
            let (lo, hi) = if j < pos { (j, pos) } else { (pos, j) };
            let e = (seq[lo] + q - seq[hi]) % q;
            self.acc[(hi - lo) * q + e] += sign;
        }
    }

    /// Fills a position pair `(f, r)` of one member, or the single middle
    /// position when `f == r`, calling `next` for each choice.
    fn assign_member(
        &mut self,
        which_b: bool,
        f: usize,
        r: usize,
        next: &mut dyn FnMut(&mut Self) -> Result<(), SearchError>,
    ) -> Result<(), SearchError> {
        let q = self.q;
        let fixed_front = self.normalize && f == 0;
        let front_vals = if fixed_front { 0..1 } else { 0..q };
        // Fixed region before this level: 0..f and r+1..m.
        for vf in front_vals {
            self.set(which_b, f, vf);
            self.apply(which_b, f, f, r + 1, 1);
            if f == r {
                self.visit()?;
                next(self)?;
            } else {
                for vr in 0..q {
                    self.set(which_b, r, vr);
                    // f is now fixed as well.
                    self.apply(which_b, r, f + 1, r + 1, 1);
                    self.visit()?;
                    let res = next(self);
                    self.apply(which_b, r, f + 1, r + 1, -1);
                    res?;
                }
            }
            self.apply(which_b, f, f, r + 1, -1);
        }
        Ok(())
    }

    fn set(&mut self, which_b: bool, pos: usize, v: usize) {
        if which_b {
            self.b[pos] = v;
        } else {
            self.a[pos] = v;
        }
    }

    /// Runs levels `level..stop`, calling `emit` on every state that reaches
    /// `stop` (or completes the sequences) with all checked shifts cancelling.
    fn run(
        &mut self,
        level: usize,
        stop: usize,
        emit: &mut dyn FnMut(&Self),
    ) -> Result<(), SearchError> {
        let m = self.m;
        let levels = m.div_ceil(2);
        if level == stop || level == levels {
            emit(self);
            return Ok(());
        }
        let (f, r) = (level, m - 1 - level);
        let complete = f + 1 >= r;
        let mut fill_b = |s: &mut Self| {
            s.assign_member(true, f, r, &mut |s| {
                // r is the largest shift newly determined; a complete fill
                // determines everything below it too.
                let lowest = if complete { 1 } else { r };
                if (lowest..=r).all(|lam| s.shift_cancels(lam))
                    && (1..lowest).all(|lam| s.shift_reachable(lam))
                {
                    s.run(level + 1, stop, emit)?;
                }
                Ok(())
            })
        };
        if self.a_fixed {
            fill_b(self)
        } else {
            self.assign_member(false, f, r, &mut fill_b)
        }
    }
}

/// Lexicographic scan over `a` with `a_0 = 0`, keeping partial spectra
/// so each step only updates the sample points once per changed position.
struct LexScan<'a> {
    searcher: Searcher<'a>,
    /// `partial[pos * K + k]`: `sum_{i < pos} z^{a_i} w_k^i`.
    partial: Vec<(f64, f64)>,
    /// `w_k^i` for every sample point and position.
    twiddle: Vec<(f64, f64)>,
    samples: usize,
    limit: f64,
}

impl<'a> LexScan<'a> {
    fn new(spec: &SearchSpec, tester: &'a ZeroTester, budget: &'a Budget) -> Self {
        let m = spec.length;
        let samples = 4 * m;
        let twiddle = (0..m)
            .flat_map(|i| {
                (0..samples).map(move |k| {
                    let t = std::f64::consts::TAU * (i * k) as f64 / samples as f64;
                    (t.cos(), t.sin())
                })
            })
            .collect();
        let mut searcher = Searcher::new(spec, tester, budget);
        searcher.a.iter_mut().for_each(|v| *v = 0);
        Self {
            searcher,
            partial: vec![(0.0, 0.0); (m + 1) * samples],
            twiddle,
            samples,
            limit: 2.0 * m as f64 + 1e-6 * m as f64,
        }
    }

    /// Adds position `pos` (value already in `a[pos]`) to the partial sums.
    fn extend(&mut self, pos: usize) {
        let k_n = self.samples;
        let (ur, ui) = self.searcher.unit[self.searcher.a[pos]];
        for k in 0..k_n {
            let (pr, pi) = self.partial[pos * k_n + k];
            let (tr, ti) = self.twiddle[pos * k_n + k];
            self.partial[(pos + 1) * k_n + k] = (pr + ur * tr - ui * ti, pi + ur * ti + ui * tr);
        }
    }

    /// Enumerates positions `pos..m` (positions `1..=fixed_to` are preset by
    /// the block), returning the first completed pair.
    fn descend(&mut self, pos: usize, fixed_to: usize) -> Result<Option<Snapshot>, SearchError> {
        if pos == 1 {
            self.extend(0);
        }
        let m = self.searcher.m;
        if pos == m {
            return self.complete();
        }
        let choices = if pos <= fixed_to {
            let v = self.searcher.a[pos];
            v..v + 1
        } else {
            0..self.searcher.q
        };
        for v in choices {
            self.searcher.a[pos] = v;
            self.extend(pos);
            if let Some(hit) = self.descend(pos + 1, fixed_to)? {
                return Ok(Some(hit));
            }
        }
        Ok(None)
    }

    fn complete(&mut self) -> Result<Option<Snapshot>, SearchError> {
        let s = &mut self.searcher;
        s.visit()?;
        let k_n = self.samples;
        let spectrum = &self.partial[s.m * k_n..];
        if spectrum
            .iter()
            .any(|&(re, im)| re * re + im * im > self.limit)
        {
            return Ok(None);
        }
        s.load_a();
        let mut best: Option<Vec<usize>> = None;
        let levels = s.m.div_ceil(2);
        s.run(0, levels, &mut |st| {
            if best.as_ref().is_none_or(|b| st.b < *b) {
                best = Some(st.b.clone());
            }
        })?;
        Ok(best.map(|b| (s.a.clone(), b)))
    }
}
