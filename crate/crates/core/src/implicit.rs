//! Norms defined by implicit (Tsirelson-type) equations.
//!
//! Both engines evaluate the least fixed point bottom-up over contiguous
//! segments of the support. A block family can always be replaced by the
//! interval partition it spans without lowering the value, because the norms
//! are 1-unconditional and suppression monotone, so segments are the only
//! recursive arguments that ever matter.
//!
//! The only self-referential configuration is the one that hands the whole
//! current segment back to the equation. For `X` that happens on levels whose
//! block budget is 1 (or when the segment is a single point), and the
//! configuration value is `a·N + b` with `a = Σθ_i < 1`, whose least solution
//! is `b / (1 - a)`. Levels with budget ≥ 2 never need the single block since
//! splitting it off is at least as good by the triangle inequality. For
//! `T(d_{w,1})` the self configuration has value `w_1·N = N` and is dropped.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::classical::WeightSeq;
use crate::error::{Error, Result};
use crate::partition::BlockCuts;
use crate::rational::{desc, Rational};
use crate::roots::{self, Enclosure};
use crate::vector::SeqVector;

/// How an explicit admissibility list is continued.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeqTail {
    /// Multiply by the ratio of the last two values (2 if only one is given).
    Geometric,
    /// Add the difference of the last two values (1 if only one is given).
    Linear,
}

/// The admissibility sequence `(n_i)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AdmissibilitySeq {
    Explicit { values: Vec<u64>, tail: SeqTail },
}

impl AdmissibilitySeq {
    pub fn explicit(values: Vec<u64>, tail: SeqTail) -> Result<Self> {
        let seq = AdmissibilitySeq::Explicit { values, tail };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        let AdmissibilitySeq::Explicit { values, tail } = self;
        if values.is_empty() || values.contains(&0) {
            return Err(Error::invalid("n_i must be a nonempty list of positive integers"));
        }
        if values.windows(2).any(|p| p[1] < p[0]) {
            return Err(Error::invalid("n_i must be non-decreasing"));
        }
        if *tail == SeqTail::Geometric && values.len() >= 2 {
            let (a, b) = (values[values.len() - 2], values[values.len() - 1]);
            if b % a != 0 {
                return Err(Error::invalid("geometric tail needs an integer ratio between the last two values"));
            }
        }
        Ok(())
    }

    /// `n_i`, 1-based, saturating at `u64::MAX`.
    pub fn get(&self, i: u64) -> u64 {
        assert!(i >= 1, "levels are 1-indexed");
        let AdmissibilitySeq::Explicit { values, tail } = self;
        let len = values.len() as u64;
        if i <= len {
            return values[i as usize - 1];
        }
        let last = values[values.len() - 1];
        let steps = i - len;
        match tail {
            SeqTail::Geometric => {
                let ratio = if len >= 2 { last / values[values.len() - 2] } else { 2 };
                let mut v = last;
                for _ in 0..steps {
                    v = v.saturating_mul(ratio);
                    if v == u64::MAX || ratio == 1 {
                        break;
                    }
                }
                v
            }
            SeqTail::Linear => {
                let diff = if len >= 2 { last - values[values.len() - 2] } else { 1 };
                last.saturating_add(diff.saturating_mul(steps))
            }
        }
    }

    /// Smallest level `i ≤ limit` with `n_i ≥ c`.
    pub fn first_level_at_least(&self, c: u64, limit: u64) -> Option<u64> {
        // n is non-decreasing, so binary search works on 1..=limit.
        if limit == 0 || self.get(limit) < c {
            return None;
        }
        let (mut lo, mut hi) = (1u64, limit);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.get(mid) >= c {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Some(lo)
    }
}

/// Level weights `θ_i = r^i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Theta {
    Geometric { ratio: Rational },
}

impl Default for Theta {
    fn default() -> Self {
        Theta::Geometric { ratio: Rational::new(1, 3) }
    }
}

impl Theta {
    pub fn validate(&self) -> Result<()> {
        let Theta::Geometric { ratio } = self;
        if !ratio.is_positive() || *ratio >= Rational::new(1, 2) {
            return Err(Error::invalid("θ ratio must lie in (0, 1/2) so that Σθ_i < 1"));
        }
        Ok(())
    }

    pub fn weight(&self, i: u64) -> Rational {
        let Theta::Geometric { ratio } = self;
        ratio.pow(i as i32)
    }

    /// `Σ_{i=1}^{k} θ_i`.
    pub fn prefix(&self, k: u64) -> Rational {
        let Theta::Geometric { ratio } = self;
        if k == 0 {
            return Rational::zero();
        }
        let one = Rational::one();
        ratio * &(&one - &ratio.pow(k as i32)) / (&one - ratio)
    }

    /// `Σ_{i=lo}^{hi} θ_i`.
    pub fn range_sum(&self, lo: u64, hi: u64) -> Rational {
        if hi < lo {
            return Rational::zero();
        }
        self.prefix(hi) - self.prefix(lo - 1)
    }
}

/// Parameters of the space `X`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XSpaceSpec {
    pub n: AdmissibilitySeq,
    #[serde(default)]
    pub theta: Theta,
}

impl XSpaceSpec {
    pub fn new(n: AdmissibilitySeq) -> Result<Self> {
        let spec = XSpaceSpec { n, theta: Theta::default() };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.n.validate()?;
        self.theta.validate()
    }
}

/// An evaluated supremum together with the configuration attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormResult<W> {
    pub value: Rational,
    pub witness: W,
}

/// A contiguous run of support points, named by its first and last index.
pub type Segment = (u64, u64);

/// Levels `lo..=hi` sharing one block list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelClass {
    pub levels: (u64, u64),
    pub blocks: Vec<Segment>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum XChoice {
    /// The `ℓ_∞` term, attained at `index`.
    Sup { index: u64 },
    /// `Σ_{i≤k} θ_i Σ_j N(E^i_j)`. A block equal to the segment itself marks
    /// the self-referential configuration.
    Levels { k: u64, classes: Vec<LevelClass> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentEntry<C> {
    pub segment: Segment,
    pub choice: C,
}

/// Witness table for `X`: one configuration per segment that is reached from
/// the root, re-evaluable bottom-up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XWitness {
    pub root: Option<Segment>,
    pub segments: Vec<SegmentEntry<XChoice>>,
}

/// Witness for `‖x‖_i`: the chosen blocks plus the table for their norms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct XSeminormWitness {
    pub level: u64,
    pub blocks: Vec<Segment>,
    pub segments: Vec<SegmentEntry<XChoice>>,
}

#[derive(Clone, Debug)]
enum NormArg {
    Sup(usize),
    Tail(usize),
    SelfRef,
}

/// Segment tables for one vector.
struct XEngine<'a> {
    spec: &'a XSpaceSpec,
    pos: Vec<u64>,
    abs: Vec<Rational>,
    m: usize,
    ncap: usize,
    first_level: HashMap<(u64, u64), Option<u64>>,
    theta_prefix: HashMap<u64, Rational>,
    norm: Vec<Rational>,
    norm_arg: Vec<NormArg>,
    // best[idx][c-1] = best sum over partitions into ≤ c blocks.
    best: Vec<Vec<Rational>>,
    best_split: Vec<Vec<Option<usize>>>,
    // Same with at least two blocks (index c-2 for c ≥ 2).
    multi: Vec<Vec<Rational>>,
    multi_split: Vec<Vec<usize>>,
    // tail[idx] for idx=(j,r): Σ_{i ≤ p_j} θ_i best_{min(n_i, t)}(j, r).
    tail: Vec<Rational>,
    tail_max: Vec<Option<(Rational, usize)>>,
}

impl<'a> XEngine<'a> {
    /// `budget` is the largest block count any caller will ask for at the root.
    fn new(spec: &'a XSpaceSpec, x: &SeqVector, budget: u64) -> Self {
        let pos: Vec<u64> = x.iter().map(|(i, _)| *i).collect();
        let abs: Vec<Rational> = x.values().map(Rational::abs).collect();
        let m = pos.len();
        let levels = pos.last().map_or(1, |&p| spec.n.get(p));
        let ncap = (levels.max(budget).min(m as u64) as usize).max(1);
        let cells = m * m;
        let mut engine = XEngine {
            spec,
            pos,
            abs,
            m,
            ncap,
            first_level: HashMap::new(),
            theta_prefix: HashMap::new(),
            norm: vec![Rational::zero(); cells],
            norm_arg: vec![NormArg::Sup(0); cells],
            best: vec![Vec::new(); cells],
            best_split: vec![Vec::new(); cells],
            multi: vec![Vec::new(); cells],
            multi_split: vec![Vec::new(); cells],
            tail: vec![Rational::zero(); cells],
            tail_max: vec![None; cells],
        };
        engine.fill();
        engine
    }

    fn idx(&self, l: usize, r: usize) -> usize {
        l * self.m + r
    }

    fn theta_prefix(&mut self, k: u64) -> Rational {
        if let Some(v) = self.theta_prefix.get(&k) {
            return v.clone();
        }
        let v = self.spec.theta.prefix(k);
        self.theta_prefix.insert(k, v.clone());
        v
    }

    fn first_level(&mut self, c: u64, k: u64) -> Option<u64> {
        *self.first_level.entry((c, k)).or_insert_with(|| self.spec.n.first_level_at_least(c, k))
    }

    /// `G_c(k) = Σ_{i ≤ k, n_i ≥ c} θ_i`.
    fn level_mass(&mut self, c: u64, k: u64) -> Rational {
        match self.first_level(c, k) {
            None => Rational::zero(),
            Some(i) => self.theta_prefix(k) - self.theta_prefix(i - 1),
        }
    }

    /// Weight of the levels `i ≤ k` whose effective budget `min(n_i, t)` is `c`.
    fn class_mass(&mut self, c: u64, t: u64, k: u64) -> Rational {
        let here = self.level_mass(c, k);
        if c >= t {
            here
        } else {
            here - self.level_mass(c + 1, k)
        }
    }

    /// Level range `lo..=hi` of the class with effective budget `c`.
    fn class_levels(&mut self, c: u64, t: u64, k: u64) -> Option<(u64, u64)> {
        let lo = self.first_level(c, k)?;
        let hi = if c >= t { k } else { self.first_level(c + 1, k).map_or(k, |i| i - 1) };
        (lo <= hi).then_some((lo, hi))
    }

    fn fill(&mut self) {
        for r in 0..self.m {
            for l in (0..=r).rev() {
                self.fill_segment(l, r);
            }
        }
    }

    fn fill_segment(&mut self, l: usize, r: usize) {
        let t = r - l + 1;
        let cap = t.min(self.ncap);
        let id = self.idx(l, r);

        // Partitions into at least two blocks: first block [l, s], rest ≤ c-1 blocks.
        let mut multi = Vec::with_capacity(cap.saturating_sub(1));
        let mut multi_split = Vec::with_capacity(cap.saturating_sub(1));
        for c in 2..=cap {
            let mut best: Option<(Rational, usize)> = None;
            for s in l..r {
                let rest = &self.best[self.idx(s + 1, r)];
                let v = &self.norm[self.idx(l, s)] + &rest[(c - 2).min(rest.len() - 1)];
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, s));
                }
            }
            let (v, s) = best.expect("segment has a split point");
            multi.push(v);
            multi_split.push(s);
        }

        // Candidates for N(l, r).
        let (mut value, mut arg) = {
            let (i, v) = (l..=r).map(|i| (i, &self.abs[i])).max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).unwrap();
            (v.clone(), NormArg::Sup(i))
        };
        // Ties go to the smallest k: ℓ_∞ first, then k = p_l, then later tails.
        if t >= 2 {
            let k = self.pos[l];
            let a = self.class_mass(1, t as u64, k);
            let mut b = Rational::zero();
            for c in 2..=cap {
                let w = self.class_mass(c as u64, t as u64, k);
                if !w.is_zero() {
                    b += &w * &multi[c - 2];
                }
            }
            let v = b / (Rational::one() - a);
            if v > value {
                value = v;
                arg = NormArg::SelfRef;
            }
        }
        if l < r {
            if let Some((v, j)) = self.tail_max[self.idx(l + 1, r)].clone() {
                if v > value {
                    value = v;
                    arg = NormArg::Tail(j);
                }
            }
        }
        self.norm[id] = value.clone();
        self.norm_arg[id] = arg;

        let mut best = Vec::with_capacity(cap);
        let mut best_split = Vec::with_capacity(cap);
        best.push(value.clone());
        best_split.push(None);
        for c in 2..=cap {
            if multi[c - 2] > value {
                best.push(multi[c - 2].clone());
                best_split.push(Some(multi_split[c - 2]));
            } else {
                best.push(value.clone());
                best_split.push(None);
            }
        }

        // Tail value with T = [l, r], k = p_l, for use by longer segments.
        let k = self.pos[l];
        let mut tail = Rational::zero();
        for c in 1..=cap {
            let g = self.level_mass(c as u64, k);
            if g.is_zero() {
                break;
            }
            let step = if c == 1 { best[0].clone() } else { &best[c - 1] - &best[c - 2] };
            tail += g * step;
        }
        let below = if l < r { self.tail_max[self.idx(l + 1, r)].clone() } else { None };
        self.tail_max[id] = match below {
            Some((v, j)) if v > tail => Some((v, j)),
            _ => Some((tail.clone(), l)),
        };
        self.tail[id] = tail;
        self.best[id] = best;
        self.best_split[id] = best_split;
        self.multi[id] = multi;
        self.multi_split[id] = multi_split;
    }

    fn seg(&self, l: usize, r: usize) -> Segment {
        (self.pos[l], self.pos[r])
    }

    /// Blocks of the best partition of `[l, r]` into at most `c` blocks.
    fn best_blocks(&self, l: usize, r: usize, c: usize) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let (mut l, mut c) = (l, c);
        loop {
            let row = &self.best_split[self.idx(l, r)];
            match row[(c - 1).min(row.len() - 1)] {
                None => {
                    out.push((l, r));
                    return out;
                }
                Some(s) => {
                    out.push((l, s));
                    l = s + 1;
                    c -= 1;
                }
            }
        }
    }

    fn multi_blocks(&self, l: usize, r: usize, c: usize) -> Vec<(usize, usize)> {
        let s = self.multi_split[self.idx(l, r)][c - 2];
        let mut out = vec![(l, s)];
        out.extend(self.best_blocks(s + 1, r, c - 1));
        out
    }

    fn choice(&mut self, l: usize, r: usize) -> (XChoice, Vec<(usize, usize)>) {
        let t = (r - l + 1) as u64;
        match self.norm_arg[self.idx(l, r)].clone() {
            NormArg::Sup(i) => (XChoice::Sup { index: self.pos[i] }, Vec::new()),
            NormArg::Tail(j) => {
                let k = self.pos[j];
                let tt = (r - j + 1) as u64;
                let cap = (tt as usize).min(self.ncap);
                let mut classes = Vec::new();
                let mut children = Vec::new();
                for c in 1..=cap {
                    let Some(levels) = self.class_levels(c as u64, tt, k) else { continue };
                    let blocks = self.best_blocks(j, r, c);
                    children.extend(blocks.iter().copied());
                    classes.push(LevelClass { levels, blocks: blocks.iter().map(|&(a, b)| self.seg(a, b)).collect() });
                }
                (XChoice::Levels { k, classes }, children)
            }
            NormArg::SelfRef => {
                let k = self.pos[l];
                let cap = (t as usize).min(self.ncap);
                let mut classes = Vec::new();
                let mut children = Vec::new();
                for c in 1..=cap {
                    let Some(levels) = self.class_levels(c as u64, t, k) else { continue };
                    let blocks = if c == 1 { vec![(l, r)] } else { self.multi_blocks(l, r, c) };
                    children.extend(blocks.iter().copied().filter(|&b| b != (l, r)));
                    classes.push(LevelClass { levels, blocks: blocks.iter().map(|&(a, b)| self.seg(a, b)).collect() });
                }
                (XChoice::Levels { k, classes }, children)
            }
        }
    }

    fn table(&mut self, roots: &[(usize, usize)]) -> Vec<SegmentEntry<XChoice>> {
        let mut done: BTreeMap<(usize, usize), XChoice> = BTreeMap::new();
        let mut stack: Vec<(usize, usize)> = roots.to_vec();
        while let Some((l, r)) = stack.pop() {
            if done.contains_key(&(l, r)) {
                continue;
            }
            let (choice, children) = self.choice(l, r);
            done.insert((l, r), choice);
            stack.extend(children);
        }
        done.into_iter().map(|((l, r), choice)| SegmentEntry { segment: self.seg(l, r), choice }).collect()
    }
}

/// The norm of `X`.
pub fn x_norm(spec: &XSpaceSpec, x: &SeqVector) -> Result<NormResult<XWitness>> {
    spec.validate()?;
    x.validate_positive()?;
    if x.is_zero() {
        return Ok(NormResult { value: Rational::zero(), witness: XWitness { root: None, segments: Vec::new() } });
    }
    let mut engine = XEngine::new(spec, x, 1);
    let m = engine.m;
    let value = engine.norm[engine.idx(0, m - 1)].clone();
    let segments = engine.table(&[(0, m - 1)]);
    Ok(NormResult { value, witness: XWitness { root: Some(engine.seg(0, m - 1)), segments } })
}

/// `‖x‖_i = sup_{E_1 < … < E_{n_i}} Σ_j ‖E_j x‖`.
pub fn x_seminorm(spec: &XSpaceSpec, x: &SeqVector, i: u64) -> Result<NormResult<XSeminormWitness>> {
    spec.validate()?;
    x.validate_positive()?;
    if i == 0 {
        return Err(Error::invalid("seminorm levels start at 1"));
    }
    if x.is_zero() {
        let witness = XSeminormWitness { level: i, blocks: Vec::new(), segments: Vec::new() };
        return Ok(NormResult { value: Rational::zero(), witness });
    }
    let budget = spec.n.get(i);
    let mut engine = XEngine::new(spec, x, budget);
    let m = engine.m;
    let c = budget.min(m as u64) as usize;
    let row = &engine.best[engine.idx(0, m - 1)];
    let value = row[(c - 1).min(row.len() - 1)].clone();
    let blocks = engine.best_blocks(0, m - 1, c);
    let segments = engine.table(&blocks);
    let blocks = blocks.iter().map(|&(a, b)| engine.seg(a, b)).collect();
    Ok(NormResult { value, witness: XSeminormWitness { level: i, blocks, segments } })
}

/// Support points of `x` inside `seg`, or an error if `seg` is not a run of support points.
fn segment_points(x: &SeqVector, seg: Segment) -> Result<Vec<u64>> {
    let pts: Vec<u64> = x.iter().map(|(i, _)| *i).filter(|&i| i >= seg.0 && i <= seg.1).collect();
    if pts.first() != Some(&seg.0) || pts.last() != Some(&seg.1) {
        return Err(Error::witness(format!("segment {seg:?} does not start and end on support points")));
    }
    Ok(pts)
}

/// Checks that `blocks` are consecutive runs exactly covering `points`.
fn check_cover(points: &[u64], blocks: &[Segment]) -> Result<()> {
    let mut at = 0usize;
    for &(a, b) in blocks {
        if at >= points.len() || points[at] != a {
            return Err(Error::witness(format!("block ({a}, {b}) does not continue the partition")));
        }
        while at < points.len() && points[at] <= b {
            at += 1;
        }
        if points[at - 1] != b {
            return Err(Error::witness(format!("block ({a}, {b}) does not end on a support point")));
        }
    }
    if at != points.len() {
        return Err(Error::witness("blocks do not cover the tail set"));
    }
    Ok(())
}

struct XRecheck<'a> {
    spec: &'a XSpaceSpec,
    x: &'a SeqVector,
    table: HashMap<Segment, &'a XChoice>,
    memo: HashMap<Segment, Rational>,
    active: Vec<Segment>,
}

impl XRecheck<'_> {
    fn value(&mut self, seg: Segment) -> Result<Rational> {
        if let Some(v) = self.memo.get(&seg) {
            return Ok(v.clone());
        }
        if self.active.contains(&seg) {
            return Err(Error::witness("witness table is cyclic"));
        }
        let choice = *self.table.get(&seg).ok_or_else(|| Error::witness(format!("segment {seg:?} missing")))?;
        let points = segment_points(self.x, seg)?;
        self.active.push(seg);
        let v = match choice {
            XChoice::Sup { index } => {
                if !points.contains(index) {
                    return Err(Error::witness("sup index outside its segment"));
                }
                self.x.get(index).abs()
            }
            XChoice::Levels { k, classes } => {
                let k = *k;
                let tail: Vec<u64> = points.iter().copied().filter(|&p| p >= k).collect();
                if k == 0 || tail.is_empty() {
                    return Err(Error::witness("k leaves no tail"));
                }
                let mut next_level = 1u64;
                let (mut a, mut b) = (Rational::zero(), Rational::zero());
                for class in classes {
                    let (lo, hi) = class.levels;
                    if lo != next_level || hi < lo {
                        return Err(Error::witness("level classes must tile 1..=k in order"));
                    }
                    next_level = hi + 1;
                    if class.blocks.len() as u64 > self.spec.n.get(lo) {
                        return Err(Error::witness(format!("more than n_{lo} blocks")));
                    }
                    check_cover(&tail, &class.blocks)?;
                    let w = self.spec.theta.range_sum(lo, hi);
                    for &block in &class.blocks {
                        if block == seg {
                            a += &w;
                        } else {
                            b += &w * &self.value(block)?;
                        }
                    }
                }
                if next_level != k + 1 {
                    return Err(Error::witness("level classes must tile 1..=k"));
                }
                b / (Rational::one() - a)
            }
        };
        self.active.pop();
        self.memo.insert(seg, v.clone());
        Ok(v)
    }
}

impl XWitness {
    /// Re-evaluates the configuration table bottom-up.
    pub fn evaluate(&self, spec: &XSpaceSpec, x: &SeqVector) -> Result<Rational> {
        let Some(root) = self.root else {
            return if x.is_zero() { Ok(Rational::zero()) } else { Err(Error::witness("empty witness for nonzero x")) };
        };
        if x.min_index() != Some(&root.0) || x.max_index() != Some(&root.1) {
            return Err(Error::witness("root segment is not the support of x"));
        }
        let mut rc = XRecheck {
            spec,
            x,
            table: self.segments.iter().map(|e| (e.segment, &e.choice)).collect(),
            memo: HashMap::new(),
            active: Vec::new(),
        };
        rc.value(root)
    }
}

impl XSeminormWitness {
    pub fn evaluate(&self, spec: &XSpaceSpec, x: &SeqVector) -> Result<Rational> {
        if x.is_zero() {
            return Ok(Rational::zero());
        }
        if self.blocks.len() as u64 > spec.n.get(self.level) {
            return Err(Error::witness("too many blocks for this level"));
        }
        let points: Vec<u64> = x.iter().map(|(i, _)| *i).collect();
        check_cover(&points, &self.blocks)?;
        let mut rc = XRecheck {
            spec,
            x,
            table: self.segments.iter().map(|e| (e.segment, &e.choice)).collect(),
            memo: HashMap::new(),
            active: Vec::new(),
        };
        let mut sum = Rational::zero();
        for &b in &self.blocks {
            sum += rc.value(b)?;
        }
        Ok(sum)
    }
}

/// How `T(d_{w,1})` pairs block norms with weights.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Block norms sorted non-increasingly before pairing with `w`.
    #[default]
    Sorted,
    /// `w_i` paired with the `i`-th block in support order.
    Literal,
}

/// Parameters of `T(d_{w,1})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TSpec {
    pub w: WeightSeq,
    #[serde(default)]
    pub pairing: Pairing,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TChoice {
    Sup { index: u64 },
    /// An admissible family: `n ≤ min E_1`, at most `n` blocks.
    Blocks { n: u64, blocks: Vec<Segment> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TWitness {
    pub root: Option<Segment>,
    pub segments: Vec<SegmentEntry<TChoice>>,
}

/// Default support cap for `T(d_{w,1})`, whose engine enumerates partitions.
pub const T_SUPPORT_CAP: usize = 12;

fn paired_sum(w: &WeightSeq, values: &mut [Rational], pairing: Pairing) -> Rational {
    if pairing == Pairing::Sorted {
        values.sort_by(desc);
    }
    values.iter().enumerate().map(|(i, v)| w.weight(i + 1) * v).sum()
}

/// The norm of `T(d_{w,1})`.
pub fn t_dw1_norm(spec: &TSpec, x: &SeqVector, cap: usize) -> Result<NormResult<TWitness>> {
    spec.w.validate()?;
    x.validate_positive()?;
    let pos: Vec<u64> = x.iter().map(|(i, _)| *i).collect();
    let abs: Vec<Rational> = x.values().map(Rational::abs).collect();
    let m = pos.len();
    if m > cap {
        return Err(Error::cap(format!("support size {m} exceeds the T(d_w1) cap {cap}")));
    }
    if m == 0 {
        return Ok(NormResult { value: Rational::zero(), witness: TWitness { root: None, segments: Vec::new() } });
    }
    let idx = |l: usize, r: usize| l * m + r;
    let mut norm = vec![Rational::zero(); m * m];
    let mut arg: Vec<Option<(u64, Vec<(usize, usize)>)>> = vec![None; m * m];
    let mut sup_at = vec![0usize; m * m];
    for r in 0..m {
        for l in (0..=r).rev() {
            let (si, sv) = (l..=r).map(|i| (i, &abs[i])).max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).unwrap();
            let mut best = sv.clone();
            let mut best_arg = None;
            sup_at[idx(l, r)] = si;
            for j in l..=r {
                let n = pos[j];
                let t = r - j + 1;
                let budget = (n as usize).min(t);
                for ends in BlockCuts::new(t, budget) {
                    if j == l && ends.len() == 1 {
                        continue;
                    }
                    let mut start = j;
                    let mut blocks = Vec::with_capacity(ends.len());
                    let mut values = Vec::with_capacity(ends.len());
                    for e in ends {
                        let end = j + e - 1;
                        values.push(norm[idx(start, end)].clone());
                        blocks.push((start, end));
                        start = end + 1;
                    }
                    let v = paired_sum(&spec.w, &mut values, spec.pairing);
                    if v > best {
                        best = v;
                        best_arg = Some((n, blocks));
                    }
                }
            }
            norm[idx(l, r)] = best;
            arg[idx(l, r)] = best_arg;
        }
    }
    let mut done: BTreeMap<(usize, usize), TChoice> = BTreeMap::new();
    let mut stack = vec![(0usize, m - 1)];
    while let Some((l, r)) = stack.pop() {
        if done.contains_key(&(l, r)) {
            continue;
        }
        let choice = match &arg[idx(l, r)] {
            None => TChoice::Sup { index: pos[sup_at[idx(l, r)]] },
            Some((n, blocks)) => {
                stack.extend(blocks.iter().copied());
                TChoice::Blocks { n: *n, blocks: blocks.iter().map(|&(a, b)| (pos[a], pos[b])).collect() }
            }
        };
        done.insert((l, r), choice);
    }
    let segments = done.into_iter().map(|((l, r), choice)| SegmentEntry { segment: (pos[l], pos[r]), choice }).collect();
    Ok(NormResult { value: norm[idx(0, m - 1)].clone(), witness: TWitness { root: Some((pos[0], pos[m - 1])), segments } })
}

impl TWitness {
    pub fn evaluate(&self, spec: &TSpec, x: &SeqVector) -> Result<Rational> {
        let Some(root) = self.root else {
            return if x.is_zero() { Ok(Rational::zero()) } else { Err(Error::witness("empty witness for nonzero x")) };
        };
        if x.min_index() != Some(&root.0) || x.max_index() != Some(&root.1) {
            return Err(Error::witness("root segment is not the support of x"));
        }
        let table: HashMap<Segment, &TChoice> = self.segments.iter().map(|e| (e.segment, &e.choice)).collect();
        fn value(
            seg: Segment,
            spec: &TSpec,
            x: &SeqVector,
            table: &HashMap<Segment, &TChoice>,
            memo: &mut HashMap<Segment, Rational>,
        ) -> Result<Rational> {
            if let Some(v) = memo.get(&seg) {
                return Ok(v.clone());
            }
            let points = segment_points(x, seg)?;
            let choice = table.get(&seg).ok_or_else(|| Error::witness(format!("segment {seg:?} missing")))?;
            let v = match choice {
                TChoice::Sup { index } => {
                    if !points.contains(index) {
                        return Err(Error::witness("sup index outside its segment"));
                    }
                    x.get(index).abs()
                }
                TChoice::Blocks { n, blocks } => {
                    if blocks.is_empty() || blocks.len() as u64 > *n || blocks[0].0 < *n {
                        return Err(Error::witness("family is not admissible"));
                    }
                    if blocks.len() == 1 && blocks[0] == seg {
                        return Err(Error::witness("self-referential family"));
                    }
                    if blocks.windows(2).any(|p| p[0].1 >= p[1].0) || blocks.iter().any(|b| b.0 < seg.0 || b.1 > seg.1) {
                        return Err(Error::witness("blocks are not successive subsegments"));
                    }
                    let mut vals = Vec::with_capacity(blocks.len());
                    for &b in blocks {
                        if b.0 > b.1 {
                            return Err(Error::witness("empty block"));
                        }
                        vals.push(value(b, spec, x, table, memo)?);
                    }
                    paired_sum(&spec.w, &mut vals, spec.pairing)
                }
            };
            memo.insert(seg, v.clone());
            Ok(v)
        }
        value(root, spec, x, &table, &mut HashMap::new())
    }
}

/// Which implicit norm the brute-force oracle evaluates.
#[derive(Clone, Debug)]
pub enum BruteMode<'a> {
    X(&'a XSpaceSpec),
    T(&'a TSpec),
}

/// Default support cap for [`brute_force_norm`].
pub const BRUTE_FORCE_CAP: usize = 7;

/// Every successive family of nonempty subsets of `set` (a bitmask over
/// support slots), gaps allowed, as lists of block masks.
fn successive_families(set: u32, m: usize) -> Vec<Vec<u32>> {
    let slots: Vec<usize> = (0..m).filter(|i| set & (1 << i) != 0).collect();
    let mut out = Vec::new();
    let total = 3usize.pow(slots.len() as u32);
    for code in 0..total {
        // Digit 0: skip, 1: join the current block, 2: open a new block.
        let mut c = code;
        let mut blocks: Vec<u32> = Vec::new();
        let mut ok = true;
        for &s in &slots {
            let d = c % 3;
            c /= 3;
            match d {
                0 => {}
                1 => match blocks.last_mut() {
                    Some(b) => *b |= 1 << s,
                    None => {
                        ok = false;
                        break;
                    }
                },
                _ => blocks.push(1 << s),
            }
        }
        if ok {
            out.push(blocks);
        }
    }
    out
}

/// Evaluates the implicit equation by raw recursion over all subsets of the
/// support and all successive set families (not just interval partitions).
///
/// For `X`, every subset of levels may take the self-referential single block;
/// each choice contributes its least solution `b / (1 - a)`.
pub fn brute_force_norm(mode: BruteMode<'_>, x: &SeqVector, cap: usize) -> Result<Rational> {
    x.validate_positive()?;
    let pos: Vec<u64> = x.iter().map(|(i, _)| *i).collect();
    let abs: Vec<Rational> = x.values().map(Rational::abs).collect();
    let m = pos.len();
    if m > cap {
        return Err(Error::cap(format!("support size {m} exceeds the oracle cap {cap}")));
    }
    if m == 0 {
        return Ok(Rational::zero());
    }
    let full = (1u32 << m) - 1;
    let mut norm: Vec<Option<Rational>> = vec![None; 1 << m];
    // Process masks by popcount so every proper subset is ready.
    let mut order: Vec<u32> = (1..=full).collect();
    order.sort_by_key(|s| s.count_ones());
    let max_index = *pos.last().unwrap();
    for &e in &order {
        let sup = (0..m).filter(|i| e & (1 << i) != 0).map(|i| abs[i].clone()).max().unwrap();
        let mut best = sup;
        // (block count, plain sum, block values, min E_1) for each non-self family inside t.
        let families_of = |t: u32, norm: &Vec<Option<Rational>>| -> Vec<(usize, Rational, Vec<Rational>, u64)> {
            successive_families(t, m)
                .into_iter()
                .filter(|f| !(f.len() == 1 && f[0] == e))
                .map(|f| {
                    let vals: Vec<Rational> = f.iter().map(|b| norm[*b as usize].clone().expect("subset evaluated")).collect();
                    let sum = vals.iter().sum();
                    let head = f.first().map_or(u64::MAX, |b| pos[b.trailing_zeros() as usize]);
                    (f.len(), sum, vals, head)
                })
                .collect()
        };
        match &mode {
            BruteMode::X(spec) => {
                for k in 1..=max_index {
                    let t: u32 = (0..m).filter(|&i| e & (1 << i) != 0 && pos[i] >= k).fold(0, |acc, i| acc | (1 << i));
                    if t == 0 {
                        break;
                    }
                    let fams = families_of(t, &norm);
                    let best_with = |limit: u64| -> Rational {
                        fams.iter()
                            .filter(|(c, _, _, _)| *c as u64 <= limit)
                            .map(|(_, s, _, _)| s.clone())
                            .max()
                            .unwrap_or_else(Rational::zero)
                    };
                    let plain: Vec<Rational> = (1..=k).map(|i| best_with(spec.n.get(i))).collect();
                    let thetas: Vec<Rational> = (1..=k).map(|i| spec.theta.weight(i)).collect();
                    let self_ok = t == e;
                    let combos: u64 = if self_ok { 1 << k } else { 1 };
                    for mask in 0..combos {
                        let (mut a, mut b) = (Rational::zero(), Rational::zero());
                        for i in 0..k as usize {
                            if mask & (1 << i) != 0 {
                                a += &thetas[i];
                            } else {
                                b += &thetas[i] * &plain[i];
                            }
                        }
                        let v = b / (Rational::one() - a);
                        if v > best {
                            best = v;
                        }
                    }
                }
            }
            BruteMode::T(spec) => {
                for (count, _, mut vals, head) in families_of(e, &norm) {
                    // Admissible iff some n satisfies count ≤ n ≤ min E_1.
                    if count == 0 || count as u64 > head {
                        continue;
                    }
                    let v = paired_sum(&spec.w, &mut vals, spec.pairing);
                    if v > best {
                        best = v;
                    }
                }
            }
        }
        norm[e as usize] = Some(best);
    }
    Ok(norm[full as usize].clone().unwrap())
}

/// `(n_1 + … + n_k)^{-1/p} Σ_{i≤k} n_i 3^{-i}` for `k = 1…K`, as certified enclosures.
pub fn eq1_report(n: &[u64], p: &Rational, width: &Rational) -> Result<Vec<Enclosure>> {
    if *p <= Rational::one() {
        return Err(Error::invalid("eq1 needs p > 1"));
    }
    if n.is_empty() || n.contains(&0) {
        return Err(Error::invalid("n must be a nonempty list of positive integers"));
    }
    let third = Rational::new(1, 3);
    let mut total = Rational::zero();
    let mut weighted = Rational::zero();
    let mut out = Vec::with_capacity(n.len());
    for (i, &ni) in n.iter().enumerate() {
        total += Rational::from(ni);
        weighted += Rational::from(ni) * third.pow(i as i32 + 1);
        let den = roots::pow(&total, &p.recip(), &(width / &Rational::from(1_000_000u64)))?;
        let mut enc = Enclosure::div_nonneg(&Enclosure::exact(weighted.clone()), &den)?;
        let mut w = width / &Rational::from(1_000_000u64);
        while &enc.width() > width {
            w = &w / &Rational::from(1000u64);
            let den = roots::pow(&total, &p.recip(), &w)?;
            enc = Enclosure::div_nonneg(&Enclosure::exact(weighted.clone()), &den)?;
        }
        out.push(enc);
    }
    Ok(out)
}

/// Builds `n_1 < n_2 < …` by the inductive recipe with `p_k = 1 + 1/k`: each
/// `n_k` is the least integer above `n_{k-1}` whose certified value exceeds `k`.
pub fn growth_sequence(k_max: usize, width: &Rational) -> Result<Vec<u64>> {
    let third = Rational::new(1, 3);
    let mut n: Vec<u64> = Vec::new();
    let mut total = Rational::zero();
    let mut weighted = Rational::zero();
    for k in 1..=k_max {
        let p = Rational::one() + Rational::unit_fraction(k as u64);
        let scale = third.pow(k as i32);
        let exceeds = |nk: u64| -> Result<bool> {
            let t = &total + &Rational::from(nk);
            let wsum = &weighted + &(Rational::from(nk) * &scale);
            let den = roots::pow(&t, &p.recip(), width)?;
            Ok(&wsum / &den.hi > Rational::from(k as u64))
        };
        let floor = n.last().map_or(1, |&v| v + 1);
        let mut hi = floor;
        while !exceeds(hi)? {
            hi = hi.checked_mul(2).ok_or_else(|| Error::cap("n_k overflows u64"))?;
        }
        let mut lo = floor;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if exceeds(mid)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        total += Rational::from(lo);
        weighted += Rational::from(lo) * &scale;
        n.push(lo);
    }
    Ok(n)
}


/// `Σ_{i=lo}^{hi} θ_i ‖[from,∞)x‖_i`, the quantity compared against the ladder threshold
/// checks (`.96` with `lo = 1`, `.4` with a lower cut).
pub fn ladder_sum(spec: &XSpaceSpec, x: &SeqVector, from: u64, lo: u64, hi: u64) -> Result<Rational> {
    if lo == 0 {
        return Err(Error::invalid("seminorm levels start at 1"));
    }
    let tail = x.tail_from(from);
    let mut total = Rational::zero();
    for i in lo..=hi {
        total += spec.theta.weight(i) * x_seminorm(spec, &tail, i)?.value;
    }
    Ok(total)
}

/// One instance of the block-average bound: `‖(1/N) Σ x_s‖_i ≤ 1 + min(1, 2n_i/N)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AverageCheck {
    pub level: u64,
    pub blocks: usize,
    pub value: Rational,
    pub bound: Rational,
    pub holds: bool,
    pub witness: XSeminormWitness,
}

/// Evaluates the bound for a family of successive blocks of norm 1.
pub fn block_average_check(spec: &XSpaceSpec, blocks: &[SeqVector], i: u64) -> Result<AverageCheck> {
    if blocks.is_empty() {
        return Err(Error::invalid("need at least one block"));
    }
    for (k, b) in blocks.iter().enumerate() {
        if b.is_zero() {
            return Err(Error::invalid(format!("block {} is zero", k + 1)));
        }
        if x_norm(spec, b)?.value != Rational::one() {
            return Err(Error::invalid(format!("block {} is not normalized", k + 1)));
        }
    }
    for (k, w) in blocks.windows(2).enumerate() {
        if w[0].max_index() >= w[1].min_index() {
            return Err(Error::invalid(format!("blocks {} and {} are not successive", k + 1, k + 2)));
        }
    }
    let count = Rational::from(blocks.len());
    let avg = blocks.iter().fold(SeqVector::zero(), |acc, b| acc.add(b)).scale(&count.recip());
    let NormResult { value, witness } = x_seminorm(spec, &avg, i)?;
    let ratio = Rational::from(2 * spec.n.get(i)) / &count;
    let bound = Rational::one() + ratio.min(Rational::one());
    Ok(AverageCheck { level: i, blocks: blocks.len(), holds: value <= bound, value, bound, witness })
}

/// `count` successive random blocks starting at `start`, each with at most
/// `max_len` support points and entries in `{-3, …, 3}`, scaled to norm 1.
pub fn random_normalized_blocks(spec: &XSpaceSpec, rng: &mut impl rand::Rng, count: usize, start: u64, max_len: u64) -> Result<Vec<SeqVector>> {
    let mut next = start.max(1);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let len = rng.gen_range(1..=max_len.max(1));
        let pairs: Vec<(u64, Rational)> = (next..next + len).map(|i| (i, Rational::from(rng.gen_range(-3i64..=3)))).collect();
        let v = SeqVector::from_pairs(pairs);
        next += len;
        if v.is_zero() {
            continue;
        }
        let norm = x_norm(spec, &v)?.value;
        out.push(v.scale(&norm.recip()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use crate::vector::SparseVector;
    use proptest::prelude::*;

    fn doubling() -> XSpaceSpec {
        XSpaceSpec::new(AdmissibilitySeq::explicit(vec![4, 8], SeqTail::Geometric).unwrap()).unwrap()
    }

    fn counting() -> XSpaceSpec {
        XSpaceSpec::new(AdmissibilitySeq::explicit(vec![1, 2], SeqTail::Linear).unwrap()).unwrap()
    }

    fn ones(idx: &[u64]) -> SeqVector {
        SparseVector::from_pairs(idx.iter().map(|&i| (i, Rational::one())))
    }

    fn seq(vals: &[i64]) -> SeqVector {
        SparseVector::from_pairs(vals.iter().enumerate().map(|(i, &a)| (i as u64 + 1, Rational::from(a))))
    }

    #[test]
    fn admissibility_tails() {
        let g = AdmissibilitySeq::explicit(vec![4, 8], SeqTail::Geometric).unwrap();
        assert_eq!((1..=5).map(|i| g.get(i)).collect::<Vec<_>>(), vec![4, 8, 16, 32, 64]);
        assert_eq!(g.get(200), u64::MAX);
        let l = AdmissibilitySeq::explicit(vec![1, 2], SeqTail::Linear).unwrap();
        assert_eq!((1..=5).map(|i| l.get(i)).collect::<Vec<_>>(), vec![1, 2, 3, 4, 5]);
        assert_eq!(l.first_level_at_least(4, 10), Some(4));
        assert_eq!(l.first_level_at_least(40, 10), None);
        assert!(AdmissibilitySeq::explicit(vec![4, 6], SeqTail::Geometric).is_err());
        assert!(AdmissibilitySeq::explicit(vec![3, 2], SeqTail::Linear).is_err());
        let json = r#"{"n":{"kind":"explicit","values":[4,8],"tail":"geometric"},"theta":{"kind":"geometric","ratio":"1/3"}}"#;
        let spec: XSpaceSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec, doubling());
        assert_eq!(serde_json::to_string(&spec).unwrap(), json);
    }

    #[test]
    fn theta_sums() {
        let th = Theta::default();
        assert_eq!(th.prefix(2), q(4, 9));
        assert_eq!(th.range_sum(2, 3), q(1, 9) + q(1, 27));
        assert!(Theta::Geometric { ratio: q(1, 2) }.validate().is_err());
    }

    #[test]
    fn x_norm_examples() {
        for spec in [doubling(), counting()] {
            for j in [1, 2, 7] {
                assert_eq!(x_norm(&spec, &ones(&[j])).unwrap().value, q(1, 1));
            }
        }
        let r = x_norm(&doubling(), &ones(&[1, 2, 3, 4])).unwrap();
        assert_eq!(r.value, q(4, 3));
        let root = r.witness.segments.iter().find(|e| e.segment == (1, 4)).unwrap();
        assert_eq!(
            root.choice,
            XChoice::Levels { k: 1, classes: vec![LevelClass { levels: (1, 1), blocks: vec![(1, 1), (2, 2), (3, 3), (4, 4)] }] }
        );
        assert_eq!(r.witness.evaluate(&doubling(), &ones(&[1, 2, 3, 4])).unwrap(), q(4, 3));
        assert_eq!(x_norm(&counting(), &ones(&[1, 2, 3, 4])).unwrap().value, q(1, 1));
        assert_eq!(x_norm(&counting(), &SeqVector::zero()).unwrap().value, q(0, 1));
    }

    #[test]
    fn x_seminorm_examples() {
        let v = x_seminorm(&counting(), &ones(&[2, 3, 4]), 2).unwrap();
        assert_eq!(v.value, q(2, 1));
        assert_eq!(v.witness.evaluate(&counting(), &ones(&[2, 3, 4])).unwrap(), q(2, 1));
        for i in 1..4 {
            assert_eq!(x_seminorm(&doubling(), &ones(&[5]), i).unwrap().value, q(1, 1));
        }
        let x = seq(&[1, -2, 0, 3, 1]);
        assert_eq!(x_seminorm(&counting(), &x, 1).unwrap().value, x_norm(&counting(), &x).unwrap().value);
        assert!(x_seminorm(&counting(), &x, 0).is_err());
    }

    /// Exhaustive seminorm oracle: all successive families of arbitrary subsets.
    fn seminorm_oracle(spec: &XSpaceSpec, x: &SeqVector, i: u64) -> Rational {
        let pos: Vec<(u64, Rational)> = x.iter().map(|(a, b)| (*a, b.clone())).collect();
        let m = pos.len();
        let limit = spec.n.get(i);
        successive_families((1u32 << m) - 1, m)
            .into_iter()
            .filter(|f| f.len() as u64 <= limit)
            .map(|f| {
                f.iter()
                    .map(|&b| {
                        let part = SparseVector::from_pairs((0..m).filter(|s| b & (1 << s) != 0).map(|s| pos[s].clone()));
                        brute_force_norm(BruteMode::X(spec), &part, 8).unwrap()
                    })
                    .sum::<Rational>()
            })
            .max()
            .unwrap_or_else(Rational::zero)
    }

    #[test]
    fn seminorm_matches_family_oracle() {
        let spec = counting();
        for x in [ones(&[2, 3, 4]), seq(&[3, -1, 2, 1, 2]), ones(&[1, 3, 4, 6, 7])] {
            for i in 1..=4 {
                assert_eq!(x_seminorm(&spec, &x, i).unwrap().value, seminorm_oracle(&spec, &x, i), "x={x:?} i={i}");
            }
        }
    }

    #[test]
    fn oracle_agrees_on_sign_vectors_up_to_five() {
        for spec in [doubling(), counting()] {
            for code in 0..3u32.pow(5) {
                let mut c = code;
                let x = SparseVector::from_pairs((1..=5u64).map(|i| {
                    let v = (c % 3) as i64 - 1;
                    c /= 3;
                    (i, Rational::from(v))
                }));
                let r = x_norm(&spec, &x).unwrap();
                assert_eq!(r.value, brute_force_norm(BruteMode::X(&spec), &x, 7).unwrap(), "x={x:?}");
                assert_eq!(r.witness.evaluate(&spec, &x).unwrap(), r.value);
            }
        }
    }

    fn harmonic_t() -> TSpec {
        TSpec { w: WeightSeq::Harmonic, pairing: Pairing::Sorted }
    }

    #[test]
    fn t_norm_examples() {
        let spec = harmonic_t();
        assert_eq!(t_dw1_norm(&spec, &ones(&[4]), T_SUPPORT_CAP).unwrap().value, q(1, 1));
        let r = t_dw1_norm(&spec, &ones(&[2, 3]), T_SUPPORT_CAP).unwrap();
        assert_eq!(r.value, q(3, 2));
        assert_eq!(brute_force_norm(BruteMode::T(&spec), &ones(&[2, 3]), 7).unwrap(), q(3, 2));
        assert_eq!(r.witness.evaluate(&spec, &ones(&[2, 3])).unwrap(), q(3, 2));
        let c = SparseVector::from_pairs([(1u64, q(5, 2))]);
        assert_eq!(t_dw1_norm(&spec, &c, T_SUPPORT_CAP).unwrap().value, q(5, 2));
        // e_1 + e_2: only one block fits after position 1, so the sup norm wins.
        assert_eq!(t_dw1_norm(&spec, &ones(&[1, 2]), T_SUPPORT_CAP).unwrap().value, q(1, 1));
        assert!(t_dw1_norm(&spec, &ones(&(1..=13).collect::<Vec<_>>()), T_SUPPORT_CAP).is_err());
    }

    #[test]
    fn t_norm_matches_oracle_on_small_supports() {
        for pairing in [Pairing::Sorted, Pairing::Literal] {
            let spec = TSpec { w: WeightSeq::Harmonic, pairing };
            for mask in 1u32..(1 << 6) {
                for signs in [0u32, 0b101010, 0b110011] {
                    let x = SparseVector::from_pairs((0..6).filter(|i| mask & (1 << i) != 0).map(|i| {
                        let v = if signs & (1 << i) != 0 { 2 } else { 1 };
                        (i as u64 + 1, Rational::from(v))
                    }));
                    if x.support_len() > 5 {
                        continue;
                    }
                    let r = t_dw1_norm(&spec, &x, T_SUPPORT_CAP).unwrap();
                    assert_eq!(r.value, brute_force_norm(BruteMode::T(&spec), &x, 7).unwrap(), "x={x:?}");
                    assert_eq!(r.witness.evaluate(&spec, &x).unwrap(), r.value);
                }
            }
        }
    }

    #[test]
    fn brute_force_cap_and_zero() {
        let spec = counting();
        assert_eq!(brute_force_norm(BruteMode::X(&spec), &SeqVector::zero(), 7).unwrap(), q(0, 1));
        assert!(matches!(
            brute_force_norm(BruteMode::X(&spec), &ones(&[1, 2, 3, 4, 5, 6, 7, 8]), 7),
            Err(Error::CapExceeded(_))
        ));
    }

    #[test]
    fn eq1_examples() {
        let w = roots::default_width();
        let r = eq1_report(&[1, 1, 1], &q(2, 1), &w).unwrap();
        assert_eq!(r[0], Enclosure::exact(q(1, 3)));
        assert!(r[1].contains(&r[1].lo) && r[1].width() <= w);
        // (1/3 + 1/9)/√2 ≈ 0.3143 < 1/3.
        assert!(r[1].hi < r[0].lo && r[2].hi < r[1].lo);
        assert!(eq1_report(&[1], &q(1, 1), &w).is_err());
        let r = eq1_report(&[9], &q(2, 1), &w).unwrap();
        assert_eq!(r[0], Enclosure::exact(q(1, 1)));
    }

    #[test]
    fn eq1_recipe_exceeds_k() {
        let w = roots::default_width();
        let n = growth_sequence(4, &w).unwrap();
        assert_eq!(n[0], 10);
        assert!(n.windows(2).all(|p| p[0] < p[1]));
        for k in 1..=n.len() {
            let p = Rational::one() + Rational::unit_fraction(k as u64);
            let e = eq1_report(&n[..k], &p, &w).unwrap();
            assert!(e[k - 1].lo > Rational::from(k as u64));
        }
    }

    fn arb_vec() -> impl Strategy<Value = SeqVector> {
        prop::collection::vec((1u64..12, -4i64..5), 0..7)
            .prop_map(|v| SparseVector::from_pairs(v.into_iter().map(|(i, a)| (i, Rational::from(a)))))
    }

    #[test]
    fn ladder_and_average_checks() {
        let spec = doubling();
        // e_3: every seminorm is 1, so the ladder is a plain θ sum.
        let e3 = ones(&[3]);
        assert_eq!(ladder_sum(&spec, &e3, 1, 1, 3).unwrap(), spec.theta.prefix(3));
        assert_eq!(ladder_sum(&spec, &e3, 4, 1, 3).unwrap(), Rational::zero());
        assert!(ladder_sum(&spec, &e3, 1, 0, 3).is_err());

        let units: Vec<SeqVector> = (1..=4).map(|i| ones(&[i])).collect();
        let r = block_average_check(&spec, &units, 1).unwrap();
        // n_1 = 4 blocks pick up all four quarters.
        assert_eq!(r.value, Rational::one());
        assert_eq!(r.bound, Rational::from(2u64));
        assert!(r.holds);
        assert!(block_average_check(&spec, &[ones(&[2]), ones(&[1])], 1).is_err());
        assert!(block_average_check(&spec, &[ones(&[1, 2]).scale(&Rational::from(2u64))], 1).is_err());

        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(3);
        let blocks = random_normalized_blocks(&spec, &mut rng, 6, 2, 3).unwrap();
        assert_eq!(blocks.len(), 6);
        assert!(blocks[0].min_index() >= Some(&2));
        for i in 1..=3 {
            assert!(block_average_check(&spec, &blocks, i).unwrap().holds);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn sign_flips_and_restrictions(x in arb_vec(), flips in any::<u16>(), keep in any::<u16>()) {
            let spec = doubling();
            let t = harmonic_t();
            let flipped = SparseVector::from_pairs(x.iter().map(|(i, a)| (*i, if flips & (1 << i) != 0 { -a } else { a.clone() })));
            let sub = x.restrict_by(|i| keep & (1 << i) != 0);
            let nx = x_norm(&spec, &x).unwrap().value;
            prop_assert_eq!(&nx, &x_norm(&spec, &flipped).unwrap().value);
            prop_assert!(x_norm(&spec, &sub).unwrap().value <= nx.clone());
            for i in 1..=3 {
                prop_assert!(x_seminorm(&spec, &sub, i).unwrap().value <= x_seminorm(&spec, &x, i).unwrap().value);
            }
            let tx = t_dw1_norm(&t, &x, T_SUPPORT_CAP).unwrap().value;
            prop_assert_eq!(&tx, &t_dw1_norm(&t, &flipped, T_SUPPORT_CAP).unwrap().value);
            prop_assert!(t_dw1_norm(&t, &sub, T_SUPPORT_CAP).unwrap().value <= tx);
        }

        #[test]
        fn definitional_lower_bound(x in arb_vec(), k in 1u64..5) {
            let spec = counting();
            let x = x.tail_from(k);
            let lower: Rational = (1..=k).map(|i| spec.theta.weight(i) * x_seminorm(&spec, &x, i).unwrap().value).sum();
            prop_assert!(x_norm(&spec, &x).unwrap().value >= lower);
        }

        #[test]
        fn witnesses_reevaluate(x in arb_vec(), i in 1u64..4) {
            let spec = doubling();
            let r = x_norm(&spec, &x).unwrap();
            prop_assert_eq!(r.witness.evaluate(&spec, &x).unwrap(), r.value);
            let s = x_seminorm(&spec, &x, i).unwrap();
            prop_assert_eq!(s.witness.evaluate(&spec, &x).unwrap(), s.value);
        }
    }
}
