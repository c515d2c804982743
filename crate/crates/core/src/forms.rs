//! X-bilinear forms: one bilinear form `[,]_{x,y}` on `V = F_p^n` for every
//! ordered pair of quandle elements, subject to
//!
//! ```text
//! (i)   [a,a]_{x,x} = 0
//! (ii)  [a,b]_{x,y} = [a + [a,c]_{x,z} c, b + [b,c]_{y,z} c]_{x▷z, y▷z}
//! (iii) [a,c]_{x▷y,z} + [a,b]_{x,y} [b,c]_{x▷y,z} = [a,c]_{x,z} + [a,b]_{x,y} [b,c]_{y,z}
//! ```
//!
//! for all `x, y, z` in the quandle and all `a, b, c` in `V`. Checking is done
//! by brute force over `X^3 x V^3`; the search reuses the same per-instance
//! checks as its pruning rule.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::field::{eval_table, FMatrix, FVector, FieldElem, FieldError, PrimeField, SpaceTables, VectorSpace};
use crate::quandle::{Element, Quandle};

/// Default cap on the number of witnesses kept in a violation report.
pub const DEFAULT_WITNESS_CAP: usize = 20;

/// Searches whose naive size exceeds this need `allow_large`.
pub const DEFAULT_SEARCH_BOUND: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    I,
    II,
    III,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axiom::I => "(i)",
            Axiom::II => "(ii)",
            Axiom::III => "(iii)",
        })
    }
}

/// One failing instance of an axiom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormViolation {
    pub axiom: Axiom,
    pub x: Element,
    pub y: Element,
    pub z: Element,
    pub a: FVector,
    pub b: FVector,
    pub c: FVector,
}

impl fmt::Display for FormViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "axiom {} fails at x={} y={} z={} a={} b={} c={}",
            self.axiom,
            self.x + 1,
            self.y + 1,
            self.z + 1,
            self.a,
            self.b,
            self.c
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ViolationReport {
    /// Total number of failing instances, including those not kept.
    pub total: usize,
    pub witnesses: Vec<FormViolation>,
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} failing axiom instance(s)", self.total)?;
        for w in &self.witnesses {
            write!(f, "\n  {w}")?;
        }
        if self.total > self.witnesses.len() {
            write!(f, "\n  ... {} more", self.total - self.witnesses.len())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("not an X-bilinear form: {0}")]
    Violations(ViolationReport),
    #[error("search space of about {estimate:.3e} assignments exceeds the bound {bound:.3e}; rerun with the override to proceed")]
    SearchTooLarge { estimate: f64, bound: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// An unchecked `m x m` array of `n x n` matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormArray {
    order: usize,
    space: VectorSpace,
    blocks: Vec<FMatrix>,
}

impl FormArray {
    /// `blocks[x * order + y]` realises `[,]_{x,y}`.
    pub fn new(order: usize, space: VectorSpace, blocks: Vec<FMatrix>) -> Result<Self, FormError> {
        if order == 0 {
            return Err(FormError::Input("form needs at least one quandle element".into()));
        }
        if blocks.len() != order * order {
            return Err(FormError::Input(format!(
                "expected {} blocks for a {order}-element quandle, got {}",
                order * order,
                blocks.len()
            )));
        }
        for b in &blocks {
            if b.field() != space.field() {
                return Err(
                    FieldError::ModulusMismatch { left: space.field().modulus(), right: b.field().modulus() }.into()
                );
            }
            if b.dim() != space.dim() {
                return Err(FieldError::DimensionMismatch { left: space.dim(), right: b.dim() }.into());
            }
        }
        Ok(Self { order, space, blocks })
    }

    pub fn zero(order: usize, space: VectorSpace) -> Self {
        let blocks = vec![FMatrix::zeros(space.field(), space.dim()); order * order];
        Self { order, space, blocks }
    }

    /// Every block set to the same matrix.
    pub fn constant(order: usize, space: VectorSpace, block: FMatrix) -> Result<Self, FormError> {
        Self::new(order, space, vec![block; order * order])
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn space(&self) -> VectorSpace {
        self.space
    }

    pub fn block(&self, x: Element, y: Element) -> &FMatrix {
        &self.blocks[x * self.order + y]
    }

    pub fn set_block(&mut self, x: Element, y: Element, m: FMatrix) -> Result<(), FormError> {
        if m.field() != self.space.field() || m.dim() != self.space.dim() {
            return Err(FormError::Input("block does not match the form's space".into()));
        }
        self.blocks[x * self.order + y] = m;
        Ok(())
    }

    /// Parses `form m n p` followed by `m^2` blocks `B x y` of `n` rows each.
    pub fn parse(text: &str) -> Result<Self, FormError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let err = |line: usize, message: String| FormError::Parse { line, message };
        let (hl, header) = lines.next().ok_or_else(|| err(1, "empty form file".into()))?;
        let words: Vec<&str> = header.split_whitespace().collect();
        let nums: Option<Vec<u64>> = words.iter().skip(1).map(|w| w.parse().ok()).collect();
        let (order, n, p) = match (words.first(), nums.as_deref()) {
            (Some(&"form"), Some(&[m, n, p])) if m > 0 && n > 0 => (m as usize, n as usize, p),
            _ => return Err(err(hl, format!("expected `form <m> <n> <p>`, found `{header}`"))),
        };
        let field = PrimeField::new(p).map_err(|e| err(hl, e.to_string()))?;
        let space = VectorSpace::new(field, n).map_err(|e| err(hl, e.to_string()))?;

        let mut blocks: Vec<Option<FMatrix>> = vec![None; order * order];
        while let Some((bl, head)) = lines.next() {
            let words: Vec<&str> = head.split_whitespace().collect();
            let label = |w: &str| w.parse::<usize>().ok().filter(|v| (1..=order).contains(v));
            let (x, y) = match words.as_slice() {
                ["B", x, y] => match (label(x), label(y)) {
                    (Some(x), Some(y)) => (x - 1, y - 1),
                    _ => return Err(err(bl, format!("block labels must lie in 1..{order}"))),
                },
                _ => return Err(err(bl, format!("expected `B <x> <y>`, found `{head}`"))),
            };
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let (rl, row) =
                    lines.next().ok_or_else(|| err(bl, format!("block B {} {} is truncated", x + 1, y + 1)))?;
                let entries = row
                    .split_whitespace()
                    .map(|w| match w.parse::<i64>() {
                        Ok(v) if (0..p as i64).contains(&v) => Ok(v),
                        _ => Err(err(rl, format!("entry `{w}` is not in 0..{}", p - 1))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if entries.len() != n {
                    return Err(err(rl, format!("row has {} entries, expected {n}", entries.len())));
                }
                rows.push(entries);
            }
            let slot = &mut blocks[x * order + y];
            if slot.is_some() {
                return Err(err(bl, format!("block B {} {} given twice", x + 1, y + 1)));
            }
            *slot = Some(FMatrix::new(field, &rows)?);
        }
        let mut out = Vec::with_capacity(order * order);
        for (i, b) in blocks.into_iter().enumerate() {
            let b = b.ok_or_else(|| {
                err(text.lines().count(), format!("missing block B {} {}", i / order + 1, i % order + 1))
            })?;
            out.push(b);
        }
        Self::new(order, space, out)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("form {} {} {}\n", self.order, self.space.dim(), self.space.field().modulus());
        for x in 0..self.order {
            for y in 0..self.order {
                out.push_str(&format!("B {} {}\n", x + 1, y + 1));
                for row in self.block(x, y).rows() {
                    let r: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                    out.push_str(&r.join(" "));
                    out.push('\n');
                }
            }
        }
        out
    }
}

/// Index-level evaluation tables for every block of a form.
#[derive(Debug, Clone)]
pub(crate) struct FormKernel {
    pub space: SpaceTables,
    pub field: PrimeField,
    order: usize,
    size: usize,
    eval: Vec<u32>,
}

impl FormKernel {
    fn new(array: &FormArray) -> Self {
        let space = SpaceTables::new(&array.space);
        let size = array.space.size();
        let mut eval = Vec::with_capacity(array.blocks.len() * size * size);
        for b in &array.blocks {
            eval.extend(eval_table(&array.space, b));
        }
        Self { space, field: array.space.field(), order: array.order, size, eval }
    }

    /// `[a,b]_{x,y}` on vector indices.
    #[inline]
    pub fn eval(&self, x: Element, y: Element, a: usize, b: usize) -> usize {
        self.eval[((x * self.order + y) * self.size + a) * self.size + b] as usize
    }
}

/// A form that satisfies all three axioms for a specific quandle.
#[derive(Debug, Clone)]
pub struct BilinearForm {
    array: FormArray,
    quandle: Quandle,
    kernel: FormKernel,
}

impl PartialEq for BilinearForm {
    fn eq(&self, other: &Self) -> bool {
        self.array == other.array && self.quandle == other.quandle
    }
}

impl BilinearForm {
    pub fn array(&self) -> &FormArray {
        &self.array
    }

    /// The quandle this form was validated against.
    pub fn quandle(&self) -> &Quandle {
        &self.quandle
    }

    pub fn space(&self) -> VectorSpace {
        self.array.space
    }

    pub fn order(&self) -> usize {
        self.array.order
    }

    pub(crate) fn kernel(&self) -> &FormKernel {
        &self.kernel
    }

    /// `[a,b]_{x,y} = a^T B_{x,y} b`.
    pub fn eval(&self, x: Element, y: Element, a: &FVector, b: &FVector) -> Result<FieldElem, FormError> {
        let m = self.order();
        if x >= m || y >= m {
            return Err(FormError::Input(format!("quandle elements must lie in 1..{m}")));
        }
        Ok(crate::field::bilinear_eval(self.array.block(x, y), a, b)?)
    }

    pub fn to_text(&self) -> String {
        self.array.to_text()
    }
}

fn check_compatible(q: &Quandle, raw: &FormArray) -> Result<(), FormError> {
    if q.order() != raw.order {
        return Err(FormError::Input(format!(
            "form is indexed by {} elements but the quandle has {}",
            raw.order,
            q.order()
        )));
    }
    Ok(())
}

/// Calls `fail(a, b, c)` for each failing vector triple of one axiom
/// instance, stopping early when it returns `false`. Axiom (i) only depends
/// on `x` and `a`; it reports `b = c = a`.
fn scan_instance<E, F>(
    axiom: Axiom,
    eval: &E,
    st: &SpaceTables,
    field: PrimeField,
    q: &Quandle,
    (x, y, z): (Element, Element, Element),
    mut fail: F,
) where
    E: Fn(Element, Element, usize, usize) -> usize,
    F: FnMut(usize, usize, usize) -> bool,
{
    let s = st.size;
    match axiom {
        Axiom::I => {
            for a in 0..s {
                if eval(x, x, a, a) != 0 && !fail(a, a, a) {
                    return;
                }
            }
        }
        Axiom::II => {
            let (xz, yz) = (q.op(x, z), q.op(y, z));
            for a in 0..s {
                for c in 0..s {
                    let a2 = st.axpy(a, eval(x, z, a, c), c);
                    for b in 0..s {
                        let b2 = st.axpy(b, eval(y, z, b, c), c);
                        if eval(x, y, a, b) != eval(xz, yz, a2, b2) && !fail(a, b, c) {
                            return;
                        }
                    }
                }
            }
        }
        Axiom::III => {
            let xy = q.op(x, y);
            for a in 0..s {
                for b in 0..s {
                    let ab = eval(x, y, a, b) as u32;
                    for c in 0..s {
                        let lhs = field.add_raw(eval(xy, z, a, c) as u32, field.mul_raw(ab, eval(xy, z, b, c) as u32));
                        let rhs = field.add_raw(eval(x, z, a, c) as u32, field.mul_raw(ab, eval(y, z, b, c) as u32));
                        if lhs != rhs && !fail(a, b, c) {
                            return;
                        }
                    }
                }
            }
        }
    }
}

/// Brute-force check of axioms (i)-(iii) over every `x, y, z` and `a, b, c`.
pub fn validate_form(q: &Quandle, raw: FormArray) -> Result<BilinearForm, FormError> {
    validate_form_with_cap(q, raw, DEFAULT_WITNESS_CAP)
}

pub fn validate_form_with_cap(q: &Quandle, raw: FormArray, cap: usize) -> Result<BilinearForm, FormError> {
    check_compatible(q, &raw)?;
    let kernel = FormKernel::new(&raw);
    let report = violation_report(q, &raw, &kernel, cap);
    if report.total > 0 {
        return Err(FormError::Violations(report));
    }
    Ok(BilinearForm { array: raw, quandle: q.clone(), kernel })
}

fn violation_report(q: &Quandle, raw: &FormArray, kernel: &FormKernel, cap: usize) -> ViolationReport {
    let m = q.order();
    let mut instances: Vec<(Axiom, Element, Element, Element)> = (0..m).map(|x| (Axiom::I, x, x, x)).collect();
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                instances.push((Axiom::II, x, y, z));
                instances.push((Axiom::III, x, y, z));
            }
        }
    }
    let eval = |x, y, a, b| kernel.eval(x, y, a, b);
    let per_instance: Vec<(usize, Vec<FormViolation>)> = instances
        .par_iter()
        .map(|&(axiom, x, y, z)| {
            let mut count = 0;
            let mut kept = Vec::new();
            scan_instance(axiom, &eval, &kernel.space, kernel.field, q, (x, y, z), |a, b, c| {
                count += 1;
                if kept.len() < cap {
                    kept.push(FormViolation {
                        axiom,
                        x,
                        y,
                        z,
                        a: raw.space.vector_at(a),
                        b: raw.space.vector_at(b),
                        c: raw.space.vector_at(c),
                    });
                }
                true
            });
            (count, kept)
        })
        .collect();
    let total = per_instance.iter().map(|(c, _)| c).sum();
    let witnesses = per_instance.into_iter().flat_map(|(_, w)| w).take(cap).collect();
    ViolationReport { total, witnesses }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SearchMode {
    /// Diagonal blocks alternating (forced by axiom (i)), off-diagonal blocks arbitrary.
    #[default]
    All,
    /// Every block alternating.
    AlternatingOnly,
    /// All diagonal blocks equal to one alternating matrix.
    ConstantDiagonal,
}

impl FromStr for SearchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(Self::All),
            "alternating-only" => Ok(Self::AlternatingOnly),
            "constant-diagonal" => Ok(Self::ConstantDiagonal),
            _ => Err(format!("unknown search mode `{s}` (all | alternating-only | constant-diagonal)")),
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::All => "all",
            Self::AlternatingOnly => "alternating-only",
            Self::ConstantDiagonal => "constant-diagonal",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub space: VectorSpace,
    pub mode: SearchMode,
    pub limit: Option<usize>,
    pub time_budget: Option<Duration>,
    pub bound: f64,
    pub allow_large: bool,
    /// Split the first branching level across worker threads.
    pub parallel: bool,
}

impl SearchConfig {
    pub fn new(space: VectorSpace) -> Self {
        Self {
            space,
            mode: SearchMode::All,
            limit: None,
            time_budget: None,
            bound: DEFAULT_SEARCH_BOUND,
            allow_large: false,
            parallel: false,
        }
    }

    /// Naive size `(p^(n^2))^(m^2)` of the unpruned assignment space.
    pub fn estimate(&self, order: usize) -> f64 {
        let cells = (self.space.dim() * self.space.dim()) as f64;
        let per_block = (self.space.field().modulus() as f64).powf(cells);
        per_block.powf((order * order) as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub emitted: usize,
    pub timed_out: bool,
    pub hit_limit: bool,
}

impl SearchStats {
    /// Every branch was explored or deliberately cut by the limit.
    pub fn complete(&self) -> bool {
        !self.timed_out
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub forms: Vec<BilinearForm>,
    pub stats: SearchStats,
}

struct Planner {
    pairs: Vec<(Element, Element)>,
    candidates: Vec<Vec<usize>>,
    /// Axiom instances that become checkable once step `k` is assigned.
    checks: Vec<Vec<(Axiom, Element, Element, Element)>>,
    matrices: Vec<FMatrix>,
    tables: Vec<Vec<u32>>,
    space_tables: SpaceTables,
    mode: SearchMode,
    order: usize,
}

impl Planner {
    fn new(q: &Quandle, cfg: &SearchConfig) -> Result<Self, FormError> {
        let m = q.order();
        let mut pairs: Vec<(Element, Element)> = (0..m).map(|x| (x, x)).collect();
        for x in 0..m {
            for y in 0..m {
                if x != y {
                    pairs.push((x, y));
                }
            }
        }
        let mut step_of = vec![0usize; m * m];
        for (k, &(x, y)) in pairs.iter().enumerate() {
            step_of[x * m + y] = k;
        }
        let step = |x: Element, y: Element| step_of[x * m + y];

        let mut checks = vec![Vec::new(); pairs.len()];
        for x in 0..m {
            checks[step(x, x)].push((Axiom::I, x, x, x));
            for y in 0..m {
                for z in 0..m {
                    let ii = [step(x, y), step(x, z), step(y, z), step(q.op(x, z), q.op(y, z))];
                    checks[*ii.iter().max().unwrap()].push((Axiom::II, x, y, z));
                    let iii = [step(q.op(x, y), z), step(x, y), step(x, z), step(y, z)];
                    checks[*iii.iter().max().unwrap()].push((Axiom::III, x, y, z));
                }
            }
        }

        let matrices = cfg.space.all_matrices()?;
        let alternating: Vec<usize> = (0..matrices.len()).filter(|&i| matrices[i].is_alternating()).collect();
        let everything: Vec<usize> = (0..matrices.len()).collect();
        let candidates = pairs
            .iter()
            .map(|&(x, y)| {
                if x == y || cfg.mode == SearchMode::AlternatingOnly {
                    alternating.clone()
                } else {
                    everything.clone()
                }
            })
            .collect();
        let tables = matrices.iter().map(|mx| eval_table(&cfg.space, mx)).collect();
        Ok(Self {
            pairs,
            candidates,
            checks,
            matrices,
            tables,
            space_tables: SpaceTables::new(&cfg.space),
            mode: cfg.mode,
            order: m,
        })
    }

    fn candidates_at(&self, step: usize, assignment: &[usize]) -> Vec<usize> {
        if self.mode == SearchMode::ConstantDiagonal && step > 0 && step < self.order {
            vec![assignment[0]]
        } else {
            self.candidates[step].clone()
        }
    }
}

struct Dfs<'a, F> {
    planner: &'a Planner,
    q: &'a Quandle,
    cfg: &'a SearchConfig,
    deadline: Option<Instant>,
    /// Matrix index assigned to each pair, laid out as `x * m + y`.
    assignment: Vec<usize>,
    by_step: Vec<usize>,
    stats: SearchStats,
    sink: F,
    stopped: bool,
}

impl<F: FnMut(BilinearForm) -> bool> Dfs<'_, F> {
    fn instance_holds(&self, (axiom, x, y, z): (Axiom, Element, Element, Element)) -> bool {
        let m = self.planner.order;
        let size = self.planner.space_tables.size;
        let tables = &self.planner.tables;
        let assignment = &self.assignment;
        let eval = |x: Element, y: Element, a: usize, b: usize| tables[assignment[x * m + y]][a * size + b] as usize;
        let mut ok = true;
        scan_instance(
            axiom,
            &eval,
            &self.planner.space_tables,
            self.cfg.space.field(),
            self.q,
            (x, y, z),
            |_, _, _| {
                ok = false;
                false
            },
        );
        ok
    }

    fn run(&mut self, step: usize) {
        if self.stopped {
            return;
        }
        self.stats.nodes += 1;
        if step <= 1 || self.stats.nodes.is_multiple_of(1024) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.stats.timed_out = true;
                    self.stopped = true;
                    return;
                }
            }
        }
        if step == self.planner.pairs.len() {
            self.emit();
            return;
        }
        let (x, y) = self.planner.pairs[step];
        let m = self.planner.order;
        let candidates = self.planner.candidates_at(step, &self.by_step);
        for cand in candidates {
            self.assignment[x * m + y] = cand;
            self.by_step[step] = cand;
            if self.planner.checks[step].iter().all(|&inst| self.instance_holds(inst)) {
                self.run(step + 1);
                if self.stopped {
                    return;
                }
            }
        }
    }

    fn emit(&mut self) {
        let blocks = self.assignment.iter().map(|&i| self.planner.matrices[i].clone()).collect();
        let array = FormArray { order: self.planner.order, space: self.cfg.space, blocks };
        let kernel = FormKernel::new(&array);
        let form = BilinearForm { array, quandle: self.q.clone(), kernel };
        self.stats.emitted += 1;
        let more = (self.sink)(form);
        if !more {
            self.stopped = true;
        } else if self.cfg.limit.is_some_and(|l| self.stats.emitted >= l) {
            self.stats.hit_limit = true;
            self.stopped = true;
        }
    }
}

fn check_search(q: &Quandle, cfg: &SearchConfig) -> Result<(), FormError> {
    let estimate = cfg.estimate(q.order());
    if estimate > cfg.bound && !cfg.allow_large {
        return Err(FormError::SearchTooLarge { estimate, bound: cfg.bound });
    }
    Ok(())
}

/// Depth-first search over block assignments. Diagonal pairs come first,
/// then off-diagonal pairs in row-major order; candidate matrices are tried in
/// lexicographic order, and each axiom instance is checked as soon as every
/// block it mentions is assigned. Forms are handed to `sink` in a
/// deterministic order; returning `false` stops the search.
pub fn search_forms_streaming<F>(q: &Quandle, cfg: &SearchConfig, sink: F) -> Result<SearchStats, FormError>
where
    F: FnMut(BilinearForm) -> bool,
{
    check_search(q, cfg)?;
    let planner = Planner::new(q, cfg)?;
    let deadline = cfg.time_budget.map(|b| Instant::now() + b);
    Ok(run_subtree(&planner, q, cfg, deadline, None, sink))
}

fn run_subtree<F: FnMut(BilinearForm) -> bool>(
    planner: &Planner,
    q: &Quandle,
    cfg: &SearchConfig,
    deadline: Option<Instant>,
    first: Option<usize>,
    sink: F,
) -> SearchStats {
    let m = q.order();
    let mut dfs = Dfs {
        planner,
        q,
        cfg,
        deadline,
        assignment: vec![0; m * m],
        by_step: vec![0; planner.pairs.len()],
        stats: SearchStats::default(),
        sink,
        stopped: cfg.limit == Some(0),
    };
    match first {
        None => dfs.run(0),
        Some(cand) => {
            let (x, y) = planner.pairs[0];
            dfs.assignment[x * m + y] = cand;
            dfs.by_step[0] = cand;
            dfs.stats.nodes += 1;
            if planner.checks[0].iter().all(|&inst| dfs.instance_holds(inst)) {
                dfs.run(1);
            }
        }
    }
    dfs.stats
}

/// Collects the search results. With `cfg.parallel` the first level is split
/// across threads and merged back in sequential order, so the output is the
/// same either way.
pub fn search_forms(q: &Quandle, cfg: &SearchConfig) -> Result<SearchOutcome, FormError> {
    if !cfg.parallel {
        let mut forms = Vec::new();
        let stats = search_forms_streaming(q, cfg, |f| {
            forms.push(f);
            true
        })?;
        return Ok(SearchOutcome { forms, stats });
    }
    check_search(q, cfg)?;
    let planner = Planner::new(q, cfg)?;
    let deadline = cfg.time_budget.map(|b| Instant::now() + b);
    let branches: Vec<(Vec<BilinearForm>, SearchStats)> = planner.candidates[0]
        .par_iter()
        .map(|&cand| {
            let mut forms = Vec::new();
            let stats = run_subtree(&planner, q, cfg, deadline, Some(cand), |f| {
                forms.push(f);
                true
            });
            (forms, stats)
        })
        .collect();
    let mut stats = SearchStats::default();
    let mut forms = Vec::new();
    for (branch_forms, s) in branches {
        stats.nodes += s.nodes;
        // A later branch timing out does not matter once the limit is met.
        let room = cfg.limit.map_or(usize::MAX, |l| l.saturating_sub(forms.len()));
        if room == 0 {
            stats.hit_limit = true;
            break;
        }
        stats.timed_out |= s.timed_out;
        forms.extend(branch_forms.into_iter().take(room));
    }
    if cfg.limit.is_some_and(|l| forms.len() >= l) {
        stats.hit_limit = true;
    }
    stats.emitted = forms.len();
    Ok(SearchOutcome { forms, stats })
}
