//! Quandle colorings of a diagram and bead colorings on top of them.
//!
//! At a positive crossing the outgoing under-bead is
//! `in + [in, over]_{x,y} over`, at a negative one `in - [in, over]_{x,y} over`,
//! where `x` and `y` are the colors of the incoming under-arc and the
//! over-arc. Over `F_p` with a validated form the negative rule is exactly the
//! inverse of the positive one.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};

use thiserror::Error;

use crate::diagram::{ArcId, LinkDiagram, Sign};
use crate::field::FVector;
use crate::forms::BilinearForm;
use crate::quandle::{Element, Quandle};

/// Exhaustive bead enumeration refuses diagrams with more assignments than this.
pub const ORACLE_LIMIT: u128 = 10_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ColoringError {
    #[error("the form was validated against a different quandle")]
    FormQuandleMismatch,
    #[error("coloring has {got} arcs, diagram has {expected}")]
    ArcCount { got: usize, expected: usize },
    #[error("not a quandle coloring: crossing {crossing} fails")]
    NotAColoring { crossing: usize },
    #[error("color {color} is not a quandle element")]
    ColorOutOfRange { color: usize },
    #[error("exhaustive bead enumeration would visit {size}^{arcs} assignments")]
    TooLarge { size: usize, arcs: usize },
    #[error("cancelled")]
    Cancelled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Engine {
    /// Checks every assignment of vectors to arcs.
    Oracle,
    /// Backtracking with forward propagation through crossings.
    #[default]
    Propagate,
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oracle" => Ok(Engine::Oracle),
            "propagate" => Ok(Engine::Propagate),
            _ => Err(format!("unknown engine `{s}`")),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Oracle => "oracle",
            Engine::Propagate => "propagate",
        })
    }
}

/// An assignment of quandle elements to arcs satisfying every crossing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct XColoring {
    colors: Vec<Element>,
}

impl XColoring {
    pub fn new(d: &LinkDiagram, q: &Quandle, colors: Vec<Element>) -> Result<Self, ColoringError> {
        if colors.len() != d.arc_count() {
            return Err(ColoringError::ArcCount { got: colors.len(), expected: d.arc_count() });
        }
        if let Some(&color) = colors.iter().find(|&&c| c >= q.order()) {
            return Err(ColoringError::ColorOutOfRange { color });
        }
        if let Some(crossing) = first_failing_crossing(d, q, &colors) {
            return Err(ColoringError::NotAColoring { crossing });
        }
        Ok(Self { colors })
    }

    pub fn colors(&self) -> &[Element] {
        &self.colors
    }

    pub fn color(&self, arc: ArcId) -> Element {
        self.colors[arc]
    }
}

#[inline]
fn act(q: &Quandle, sign: Sign, x: Element, y: Element) -> Element {
    match sign {
        Sign::Positive => q.op(x, y),
        Sign::Negative => q.inv_op(x, y),
    }
}

fn first_failing_crossing(d: &LinkDiagram, q: &Quandle, colors: &[Element]) -> Option<usize> {
    d.crossings().iter().position(|c| colors[c.under_out] != act(q, c.sign, colors[c.under_in], colors[c.over]))
}

const UNSET: usize = usize::MAX;

/// Crossings incident to each arc, for propagation.
fn incidence(d: &LinkDiagram) -> Vec<Vec<usize>> {
    let mut touching = vec![Vec::new(); d.arc_count()];
    for (i, c) in d.crossings().iter().enumerate() {
        for arc in [c.under_in, c.over, c.under_out] {
            if !touching[arc].contains(&i) {
                touching[arc].push(i);
            }
        }
    }
    touching
}

/// All quandle colorings, sorted lexicographically by arc colors.
///
/// Backtracks over arcs in component order; an arc fixed by a crossing whose
/// other relevant arcs are colored is propagated rather than branched on.
pub fn enumerate_xcolorings(d: &LinkDiagram, q: &Quandle) -> Vec<XColoring> {
    let order: Vec<ArcId> = d.components().iter().flatten().copied().collect();
    let touching = incidence(d);
    let mut colors = vec![UNSET; d.arc_count()];
    let mut out = Vec::new();
    let mut trail = Vec::new();
    color_search(d, q, &order, &touching, &mut colors, &mut trail, &mut out);
    out.sort();
    out
}

fn color_search(
    d: &LinkDiagram,
    q: &Quandle,
    order: &[ArcId],
    touching: &[Vec<usize>],
    colors: &mut Vec<Element>,
    trail: &mut Vec<ArcId>,
    out: &mut Vec<XColoring>,
) {
    let Some(&arc) = order.iter().find(|&&a| colors[a] == UNSET) else {
        out.push(XColoring { colors: colors.clone() });
        return;
    };
    for color in 0..q.order() {
        let mark = trail.len();
        if assign_color(d, q, touching, colors, trail, arc, color) {
            color_search(d, q, order, touching, colors, trail, out);
        }
        for a in trail.drain(mark..) {
            colors[a] = UNSET;
        }
    }
}

/// Sets `arc` and propagates; `false` on contradiction. Forced arcs are
/// pushed to `trail` so the caller can undo them.
fn assign_color(
    d: &LinkDiagram,
    q: &Quandle,
    touching: &[Vec<usize>],
    colors: &mut [Element],
    trail: &mut Vec<ArcId>,
    arc: ArcId,
    color: Element,
) -> bool {
    colors[arc] = color;
    trail.push(arc);
    let mut queue = vec![arc];
    while let Some(a) = queue.pop() {
        for &ci in &touching[a] {
            let c = d.crossings()[ci];
            let (i, o, u) = (colors[c.under_in], colors[c.over], colors[c.under_out]);
            if o == UNSET {
                continue;
            }
            let (target, value) = match (i != UNSET, u != UNSET) {
                (true, true) => {
                    if u != act(q, c.sign, i, o) {
                        return false;
                    }
                    continue;
                }
                (true, false) => (c.under_out, act(q, c.sign, i, o)),
                (false, true) => (c.under_in, act(q, c.sign.flipped(), u, o)),
                (false, false) => continue,
            };
            if colors[target] == UNSET {
                colors[target] = value;
                trail.push(target);
                queue.push(target);
            } else if colors[target] != value {
                return false;
            }
        }
    }
    true
}

/// Vectors on arcs, over the form's space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BeadColoring {
    pub beads: Vec<FVector>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeadCount {
    pub count: u64,
    /// Up to the requested number of actual bead colorings.
    pub witnesses: Vec<BeadColoring>,
}

#[inline]
fn bead_out(form: &BilinearForm, sign: Sign, x: Element, y: Element, bead_in: usize, bead_over: usize) -> usize {
    let k = form.kernel();
    let s = k.eval(x, y, bead_in, bead_over);
    let s = match sign {
        Sign::Positive => s,
        Sign::Negative => k.space.neg_scalar(s),
    };
    k.space.axpy(bead_in, s, bead_over)
}

/// Checks the bead rule at every crossing.
pub fn is_bead_coloring(d: &LinkDiagram, form: &BilinearForm, f: &XColoring, beads: &[FVector]) -> bool {
    let space = form.space();
    let Ok(idx) = beads.iter().map(|b| space.index_of(b)).collect::<Result<Vec<_>, _>>() else {
        return false;
    };
    idx.len() == d.arc_count()
        && d.crossings().iter().all(|c| {
            idx[c.under_out]
                == bead_out(form, c.sign, f.color(c.under_in), f.color(c.over), idx[c.under_in], idx[c.over])
        })
}

/// Counts the bead colorings of the colored diagram `(d, f)`. Either engine
/// gives the same count; up to `witness_cap` colorings are returned as well.
pub fn count_beads(
    d: &LinkDiagram,
    q: &Quandle,
    form: &BilinearForm,
    f: &XColoring,
    engine: Engine,
    witness_cap: usize,
) -> Result<BeadCount, ColoringError> {
    count_beads_cancellable(d, q, form, f, engine, witness_cap, &AtomicBool::new(false))
}

/// As [`count_beads`], giving up with [`ColoringError::Cancelled`] once `stop` is set.
pub fn count_beads_cancellable(
    d: &LinkDiagram,
    q: &Quandle,
    form: &BilinearForm,
    f: &XColoring,
    engine: Engine,
    witness_cap: usize,
    stop: &AtomicBool,
) -> Result<BeadCount, ColoringError> {
    if form.quandle() != q {
        return Err(ColoringError::FormQuandleMismatch);
    }
    let f = XColoring::new(d, q, f.colors.clone())?;
    let mut counter =
        Counter { count: 0, witnesses: Vec::new(), cap: witness_cap, form, stop, ticks: 0, cancelled: false };
    match engine {
        Engine::Oracle => {
            let (size, arcs) = (form.space().size(), d.arc_count());
            let total = u32::try_from(arcs).ok().and_then(|a| (size as u128).checked_pow(a));
            if total.is_none_or(|t| t > ORACLE_LIMIT) {
                return Err(ColoringError::TooLarge { size, arcs });
            }
            oracle(d, form, &f, &mut counter);
        }
        Engine::Propagate => propagate(d, form, &f, &mut counter),
    }
    if counter.cancelled {
        return Err(ColoringError::Cancelled);
    }
    Ok(BeadCount { count: counter.count, witnesses: counter.witnesses })
}

struct Counter<'a> {
    count: u64,
    witnesses: Vec<BeadColoring>,
    cap: usize,
    form: &'a BilinearForm,
    stop: &'a AtomicBool,
    ticks: u32,
    cancelled: bool,
}

impl Counter<'_> {
    /// Polls the stop flag every few thousand steps.
    #[inline]
    fn should_stop(&mut self) -> bool {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks % 4096 == 1 && self.stop.load(Ordering::Relaxed) {
            self.cancelled = true;
        }
        self.cancelled
    }

    fn record(&mut self, beads: &[usize]) {
        self.count += 1;
        if self.witnesses.len() < self.cap {
            let space = self.form.space();
            self.witnesses.push(BeadColoring { beads: beads.iter().map(|&b| space.vector_at(b)).collect() });
        }
    }
}

fn oracle(d: &LinkDiagram, form: &BilinearForm, f: &XColoring, counter: &mut Counter) {
    let size = form.space().size();
    let arcs = d.arc_count();
    let mut beads = vec![0usize; arcs];
    loop {
        if counter.should_stop() {
            return;
        }
        let ok = d.crossings().iter().all(|c| {
            beads[c.under_out]
                == bead_out(form, c.sign, f.color(c.under_in), f.color(c.over), beads[c.under_in], beads[c.over])
        });
        if ok {
            counter.record(&beads);
        }
        // Odometer, last arc fastest.
        let mut k = arcs;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            beads[k] += 1;
            if beads[k] < size {
                break;
            }
            beads[k] = 0;
        }
    }
}

struct Propagator<'a> {
    d: &'a LinkDiagram,
    form: &'a BilinearForm,
    f: &'a XColoring,
    /// Crossings where each arc is an input (under_in or over).
    feeds: Vec<Vec<usize>>,
    order: Vec<ArcId>,
    beads: Vec<usize>,
    trail: Vec<ArcId>,
}

fn propagate(d: &LinkDiagram, form: &BilinearForm, f: &XColoring, counter: &mut Counter) {
    let over_counts = d.over_counts();
    let mut order: Vec<ArcId> = (0..d.arc_count()).collect();
    order.sort_by_key(|&a| (std::cmp::Reverse(over_counts[a]), a));
    let mut feeds = vec![Vec::new(); d.arc_count()];
    for (i, c) in d.crossings().iter().enumerate() {
        feeds[c.under_in].push(i);
        if c.over != c.under_in {
            feeds[c.over].push(i);
        }
    }
    let mut p = Propagator { d, form, f, feeds, order, beads: vec![UNSET; d.arc_count()], trail: Vec::new() };
    p.branch(0, counter);
}

impl Propagator<'_> {
    fn branch(&mut self, from: usize, counter: &mut Counter) {
        if counter.should_stop() {
            return;
        }
        let Some(pos) = (from..self.order.len()).find(|&i| self.beads[self.order[i]] == UNSET) else {
            counter.record(&self.beads);
            return;
        };
        let arc = self.order[pos];
        for v in 0..self.form.space().size() {
            let mark = self.trail.len();
            if self.assign(arc, v) {
                self.branch(pos + 1, counter);
            }
            for a in self.trail.drain(mark..) {
                self.beads[a] = UNSET;
            }
        }
    }

    fn assign(&mut self, arc: ArcId, v: usize) -> bool {
        self.beads[arc] = v;
        self.trail.push(arc);
        let mut queue = vec![arc];
        while let Some(a) = queue.pop() {
            for k in 0..self.feeds[a].len() {
                let c = self.d.crossings()[self.feeds[a][k]];
                let (i, o) = (self.beads[c.under_in], self.beads[c.over]);
                if i == UNSET || o == UNSET {
                    continue;
                }
                let out = bead_out(self.form, c.sign, self.f.color(c.under_in), self.f.color(c.over), i, o);
                match self.beads[c.under_out] {
                    UNSET => {
                        self.beads[c.under_out] = out;
                        self.trail.push(c.under_out);
                        queue.push(c.under_out);
                    }
                    existing if existing != out => return false,
                    _ => {}
                }
            }
        }
        true
    }
}
