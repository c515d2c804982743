//! Oriented link diagrams as arcs plus signed crossings.
//!
//! An arc runs from one undercrossing to the next; the over-strand is not
//! broken, so each crossing names exactly three arcs. Virtual crossings impose
//! nothing and are simply left out, which makes virtual links first-class.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

pub type ArcId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn as_char(self) -> char {
        match self {
            Sign::Positive => '+',
            Sign::Negative => '-',
        }
    }

    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Positive),
            '-' => Some(Sign::Negative),
            _ => None,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// Parses a compact sign string such as `++-`.
pub fn parse_signs(s: &str) -> Option<Vec<Sign>> {
    s.chars().filter(|c| !c.is_whitespace() && *c != ',').map(Sign::from_char).collect()
}

pub fn render_signs(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.as_char()).collect()
}

/// One classical crossing. The coloring relation reads
/// `color(under_out) = color(under_in) ▷^sign color(over)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub sign: Sign,
    pub under_in: ArcId,
    pub over: ArcId,
    pub under_out: ArcId,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum DiagramViolation {
    ArcOutOfRange { crossing: usize, arc: ArcId },
    RepeatedUnderIn { arc: ArcId },
    RepeatedUnderOut { arc: ArcId },
    DanglingArc { arc: ArcId },
    ArcMissingFromComponents { arc: ArcId },
    ArcInSeveralComponents { arc: ArcId },
    EmptyComponent { component: usize },
    ComponentArcOutOfRange { component: usize, arc: ArcId },
    ComponentOrder { component: usize, from: ArcId, to: ArcId },
}

impl fmt::Display for DiagramViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::ArcOutOfRange { crossing, arc } => {
                write!(f, "crossing {} references arc {} which does not exist", crossing + 1, arc + 1)
            }
            Self::RepeatedUnderIn { arc } => write!(f, "arc {} ends at more than one undercrossing", arc + 1),
            Self::RepeatedUnderOut { arc } => {
                write!(f, "arc {} starts at more than one undercrossing", arc + 1)
            }
            Self::DanglingArc { arc } => {
                write!(f, "arc {} has only one end at an undercrossing", arc + 1)
            }
            Self::ArcMissingFromComponents { arc } => {
                write!(f, "arc {} is not listed in any component", arc + 1)
            }
            Self::ArcInSeveralComponents { arc } => write!(f, "arc {} is listed more than once", arc + 1),
            Self::EmptyComponent { component } => write!(f, "component {} is empty", component + 1),
            Self::ComponentArcOutOfRange { component, arc } => {
                write!(f, "component {} lists arc {} which does not exist", component + 1, arc + 1)
            }
            Self::ComponentOrder { component, from, to } => {
                write!(f, "component {}: no undercrossing leads from arc {} to arc {}", component + 1, from + 1, to + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("invalid diagram: {}", render_violations(.0))]
    Invalid(Vec<DiagramViolation>),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("PD code: {0}")]
    Pd(#[from] PdError),
}

fn render_violations(v: &[DiagramViolation]) -> String {
    v.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PdError {
    #[error("empty PD code")]
    Empty,
    #[error("malformed PD code at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("edge {edge} appears {count} time(s), expected exactly 2")]
    EdgeMultiplicity { edge: u32, count: usize },
    #[error("edges {edges:?} of one component are not numbered consecutively")]
    NonContiguousComponent { edges: Vec<u32> },
    #[error("crossing {crossing} X{tuple:?}: under-strand {from}->{to} runs against the edge numbering")]
    UnderStrandOrder { crossing: usize, tuple: [u32; 4], from: u32, to: u32 },
    #[error("crossing {crossing} X{tuple:?}: sign cannot be inferred from edge numbering; pass explicit signs")]
    AmbiguousSign { crossing: usize, tuple: [u32; 4] },
    #[error("{given} explicit sign(s) given for {expected} crossing(s)")]
    SignCount { given: usize, expected: usize },
}

/// A validated oriented link diagram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkDiagram {
    name: String,
    arc_count: usize,
    crossings: Vec<Crossing>,
    components: Vec<Vec<ArcId>>,
}

impl LinkDiagram {
    pub fn new(
        name: impl Into<String>,
        arc_count: usize,
        crossings: Vec<Crossing>,
        components: Vec<Vec<ArcId>>,
    ) -> Result<Self, DiagramError> {
        let d = Self { name: name.into(), arc_count, crossings, components };
        d.validate()?;
        Ok(d)
    }

    /// The standard 0-crossing unknot: one free loop.
    pub fn unknot() -> Self {
        Self { name: "unknot".into(), arc_count: 1, crossings: vec![], components: vec![vec![0]] }
    }

    /// Checks arc references, the under_in/under_out bijection and the
    /// component cyclic order. Every problem is reported.
    pub fn validate(&self) -> Result<(), DiagramError> {
        let n = self.arc_count;
        let mut violations = Vec::new();
        let mut ends_at = vec![None; n];
        let mut starts_at = vec![None; n];
        for (i, c) in self.crossings.iter().enumerate() {
            let mut in_range = true;
            for arc in [c.under_in, c.over, c.under_out] {
                if arc >= n {
                    violations.push(DiagramViolation::ArcOutOfRange { crossing: i, arc });
                    in_range = false;
                }
            }
            if !in_range {
                continue;
            }
            if ends_at[c.under_in].replace(i).is_some() {
                violations.push(DiagramViolation::RepeatedUnderIn { arc: c.under_in });
            }
            if starts_at[c.under_out].replace(i).is_some() {
                violations.push(DiagramViolation::RepeatedUnderOut { arc: c.under_out });
            }
        }
        for arc in 0..n {
            if ends_at[arc].is_some() != starts_at[arc].is_some() {
                violations.push(DiagramViolation::DanglingArc { arc });
            }
        }

        let mut listed = vec![0usize; n];
        for (ci, comp) in self.components.iter().enumerate() {
            if comp.is_empty() {
                violations.push(DiagramViolation::EmptyComponent { component: ci });
                continue;
            }
            for &arc in comp {
                if arc < n {
                    listed[arc] += 1;
                } else {
                    violations.push(DiagramViolation::ComponentArcOutOfRange { component: ci, arc });
                }
            }
            for (k, &from) in comp.iter().enumerate() {
                let to = comp[(k + 1) % comp.len()];
                if from >= n || to >= n {
                    continue;
                }
                let linked = match ends_at[from] {
                    Some(c) => self.crossings[c].under_out == to,
                    // A free loop is its own one-arc component.
                    None => comp.len() == 1,
                };
                if !linked {
                    violations.push(DiagramViolation::ComponentOrder { component: ci, from, to });
                }
            }
        }
        for (arc, &count) in listed.iter().enumerate() {
            match count {
                0 => violations.push(DiagramViolation::ArcMissingFromComponents { arc }),
                1 => {}
                _ => violations.push(DiagramViolation::ArcInSeveralComponents { arc }),
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(DiagramError::Invalid(violations))
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn arc_count(&self) -> usize {
        self.arc_count
    }

    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn components(&self) -> &[Vec<ArcId>] {
        &self.components
    }

    /// `(under_in, over, under_out, sign)` for each crossing, in order.
    pub fn crossing_relations(&self) -> Vec<(ArcId, ArcId, ArcId, Sign)> {
        self.crossings.iter().map(|c| (c.under_in, c.over, c.under_out, c.sign)).collect()
    }

    /// Indices of components that never pass under anything.
    pub fn free_loops(&self) -> Vec<usize> {
        self.components
            .iter()
            .enumerate()
            .filter(|(_, comp)| comp.len() == 1 && !self.crossings.iter().any(|c| c.under_in == comp[0]))
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of crossings in which each arc is the over-strand.
    pub fn over_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.arc_count];
        for c in &self.crossings {
            counts[c.over] += 1;
        }
        counts
    }

    /// Reverses the orientation of one component. Under-passes of that
    /// component swap their in/out arcs, and a crossing changes sign when
    /// exactly one of its two strands is reversed.
    pub fn reverse_component(&self, index: usize) -> LinkDiagram {
        let comp = &self.components[index];
        let mut member = vec![false; self.arc_count];
        for &a in comp {
            member[a] = true;
        }
        let crossings = self
            .crossings
            .iter()
            .map(|c| {
                let under = member[c.under_in];
                let over = member[c.over];
                let (under_in, under_out) = if under { (c.under_out, c.under_in) } else { (c.under_in, c.under_out) };
                let sign = if under != over { c.sign.flipped() } else { c.sign };
                Crossing { sign, under_in, over: c.over, under_out }
            })
            .collect();
        let mut components = self.components.clone();
        let rev = &mut components[index];
        rev[1..].reverse();
        LinkDiagram { name: self.name.clone(), arc_count: self.arc_count, crossings, components }
    }

    /// Line-oriented text form (1-indexed arcs).
    pub fn to_text(&self) -> String {
        let mut out = format!("link {}\narcs {}\n", self.name, self.arc_count);
        for c in &self.crossings {
            out.push_str(&format!("x {} {} {} {}\n", c.sign.as_char(), c.under_in + 1, c.over + 1, c.under_out + 1));
        }
        for comp in &self.components {
            let arcs: Vec<String> = comp.iter().map(|a| (a + 1).to_string()).collect();
            out.push_str(&format!("component {}\n", arcs.join(" ")));
        }
        out
    }
}

/// A PD code with optional explicit crossing signs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdSource {
    pub code: String,
    pub signs: Option<Vec<Sign>>,
}

impl PdSource {
    fn render(&self) -> String {
        match &self.signs {
            Some(s) => format!("\"{}\" signs {}", self.code, render_signs(s)),
            None => format!("\"{}\"", self.code),
        }
    }
}

/// A parsed diagram file: the diagram plus its provenance notes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagramFile {
    pub diagram: LinkDiagram,
    pub orientation: Option<String>,
    pub source: Option<PdSource>,
}

impl DiagramFile {
    /// Parses the diagram file format. A file either lists `arcs`, `x` and
    /// `component` lines, or gives its body as a single `pd` line.
    pub fn parse(text: &str) -> Result<Self, DiagramError> {
        let mut name = None;
        let mut orientation = None;
        let mut source = None;
        let mut pd_body: Option<(usize, PdSource)> = None;
        let mut arcs: Option<usize> = None;
        let mut crossings = Vec::new();
        let mut components = Vec::new();

        let err = |line: usize, message: String| DiagramError::Parse { line, message };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (keyword, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
            let rest = rest.trim();
            match keyword {
                "link" if !rest.is_empty() => name = Some(rest.to_string()),
                "orientation" => orientation = Some(rest.to_string()),
                "source" => {
                    let body =
                        rest.strip_prefix("pd").ok_or_else(|| err(line, "expected `source pd \"...\"`".into()))?;
                    source = Some(parse_pd_line(body).map_err(|m| err(line, m))?);
                }
                "pd" => pd_body = Some((line, parse_pd_line(rest).map_err(|m| err(line, m))?)),
                "arcs" => {
                    let k = rest.parse::<usize>().map_err(|_| err(line, format!("bad arc count `{rest}`")))?;
                    arcs = Some(k);
                }
                "x" => {
                    let k = arcs.ok_or_else(|| err(line, "`x` line before `arcs`".into()))?;
                    let parts: Vec<&str> = rest.split_whitespace().collect();
                    if parts.len() != 4 {
                        return Err(err(line, "expected `x <+|-> <under_in> <over> <under_out>`".into()));
                    }
                    let sign = match parts[0] {
                        "+" => Sign::Positive,
                        "-" => Sign::Negative,
                        s => return Err(err(line, format!("bad sign `{s}`"))),
                    };
                    let arc = |s: &str| -> Result<ArcId, DiagramError> {
                        match s.parse::<usize>() {
                            Ok(a) if (1..=k).contains(&a) => Ok(a - 1),
                            _ => Err(err(line, format!("arc `{s}` is not in 1..{k}"))),
                        }
                    };
                    crossings.push(Crossing {
                        sign,
                        under_in: arc(parts[1])?,
                        over: arc(parts[2])?,
                        under_out: arc(parts[3])?,
                    });
                }
                "component" => {
                    let k = arcs.ok_or_else(|| err(line, "`component` line before `arcs`".into()))?;
                    let comp = rest
                        .split_whitespace()
                        .map(|s| match s.parse::<usize>() {
                            Ok(a) if (1..=k).contains(&a) => Ok(a - 1),
                            _ => Err(err(line, format!("arc `{s}` is not in 1..{k}"))),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    if comp.is_empty() {
                        return Err(err(line, "empty component".into()));
                    }
                    components.push(comp);
                }
                _ => return Err(err(line, format!("unrecognised line `{content}`"))),
            }
        }
        let name = name.ok_or_else(|| err(1, "missing `link <name>` line".into()))?;
        let diagram = match (pd_body, arcs) {
            (Some(_), Some(_)) => {
                return Err(err(1, "a diagram file takes either a `pd` line or `arcs` lines, not both".into()))
            }
            (Some((_, pd)), None) => import_pd(&name, &pd.code, pd.signs.as_deref())?,
            (None, Some(k)) => LinkDiagram::new(name, k, crossings, components)?,
            (None, None) => return Err(err(1, "missing diagram body (`arcs` or `pd`)".into())),
        };
        Ok(Self { diagram, orientation, source })
    }

    pub fn to_text(&self) -> String {
        let body = self.diagram.to_text();
        let (first, rest) = body.split_once('\n').expect("diagram text has a link line");
        let mut out = format!("{first}\n");
        if let Some(o) = &self.orientation {
            out.push_str(&format!("orientation {o}\n"));
        }
        if let Some(s) = &self.source {
            out.push_str(&format!("source pd {}\n", s.render()));
        }
        out.push_str(rest);
        out
    }
}

fn parse_pd_line(rest: &str) -> Result<PdSource, String> {
    let rest = rest.trim();
    let body = rest.strip_prefix('"').ok_or("PD code must be double-quoted")?;
    let (code, tail) = body.split_once('"').ok_or("unterminated PD string")?;
    let tail = tail.trim();
    let signs = if tail.is_empty() {
        None
    } else {
        let s = tail.strip_prefix("signs").ok_or_else(|| format!("unexpected `{tail}`"))?;
        Some(parse_signs(s).ok_or_else(|| format!("bad sign list `{}`", s.trim()))?)
    };
    Ok(PdSource { code: code.to_string(), signs })
}

/// Extracts the crossing 4-tuples from `X[a,b,c,d] ...`, `PD[X[..], ..]`
/// or `{{a, b, c, d}, ..}` notation.
pub fn parse_pd_tuples(text: &str) -> Result<Vec<[u32; 4]>, PdError> {
    let bytes = text.as_bytes();
    let mut tuples = Vec::new();
    let mut open_wrappers: Vec<u8> = Vec::new();
    let mut i = 0;
    let syntax = |position: usize, message: &str| PdError::Syntax { position, message: message.into() };
    let skip_ws = |mut j: usize| {
        while j < bytes.len() && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
        j
    };
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() || b == b',' {
            i += 1;
        } else if text[i..].starts_with("PD[") {
            open_wrappers.push(b']');
            i += 3;
        } else if b == b'X' || b == b'{' {
            let close = if b == b'X' {
                if bytes.get(i + 1) != Some(&b'[') {
                    return Err(syntax(i, "expected `[` after `X`"));
                }
                i += 2;
                b']'
            } else {
                let j = skip_ws(i + 1);
                if j < bytes.len() && bytes[j] == b'{' {
                    open_wrappers.push(b'}');
                    i += 1;
                    continue;
                }
                i += 1;
                b'}'
            };
            let mut tuple = [0u32; 4];
            for (k, slot) in tuple.iter_mut().enumerate() {
                i = skip_ws(i);
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(syntax(start, "expected an edge number"));
                }
                *slot = text[start..i]
                    .parse()
                    .ok()
                    .filter(|&v| v > 0)
                    .ok_or_else(|| syntax(start, "edge numbers must be positive integers"))?;
                i = skip_ws(i);
                let expected = if k == 3 { close } else { b',' };
                if bytes.get(i) != Some(&expected) {
                    let msg = if k == 3 {
                        "crossing tuple must have exactly 4 entries"
                    } else {
                        "expected `,` between edge numbers"
                    };
                    return Err(syntax(i, msg));
                }
                i += 1;
            }
            tuples.push(tuple);
        } else if open_wrappers.last() == Some(&b) {
            open_wrappers.pop();
            i += 1;
        } else {
            return Err(syntax(i, &format!("unexpected character `{}`", b as char)));
        }
    }
    if let Some(&c) = open_wrappers.last() {
        return Err(syntax(bytes.len(), &format!("missing closing `{}`", c as char)));
    }
    if tuples.is_empty() {
        return Err(PdError::Empty);
    }
    Ok(tuples)
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Builds a diagram from a PD code.
///
/// In `X[a,b,c,d]` the edges are listed counterclockwise from the incoming
/// under-edge `a`, so the under-strand runs `a -> c`. The crossing is positive
/// when the over-strand runs `d -> b` (b follows d in its component's
/// numbering) and negative when it runs `b -> d`. When both or neither hold,
/// typically at a two-edge component, the sign must be supplied in `signs`,
/// which, when present, overrides every inferred sign.
pub fn import_pd(name: &str, pd: &str, signs: Option<&[Sign]>) -> Result<LinkDiagram, DiagramError> {
    let tuples = parse_pd_tuples(pd)?;
    if let Some(s) = signs {
        if s.len() != tuples.len() {
            return Err(PdError::SignCount { given: s.len(), expected: tuples.len() }.into());
        }
    }

    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for t in &tuples {
        for &e in t {
            *counts.entry(e).or_default() += 1;
        }
    }
    if let Some((&edge, &count)) = counts.iter().find(|(_, &c)| c != 2) {
        return Err(PdError::EdgeMultiplicity { edge, count }.into());
    }
    let edges: Vec<u32> = counts.keys().copied().collect();
    let slot: BTreeMap<u32, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

    // Strand components: edges joined along both strands of each crossing.
    let mut strands = UnionFind::new(edges.len());
    for &[a, b, c, d] in &tuples {
        strands.union(slot[&a], slot[&c]);
        strands.union(slot[&b], slot[&d]);
    }
    let mut comp_edges: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for (i, &e) in edges.iter().enumerate() {
        comp_edges.entry(strands.find(i)).or_default().push(e);
    }
    let mut successor: BTreeMap<u32, u32> = BTreeMap::new();
    let mut comp_list: Vec<Vec<u32>> = comp_edges.into_values().collect();
    comp_list.sort_by_key(|c| c[0]);
    for comp in &comp_list {
        let (lo, hi) = (comp[0], comp[comp.len() - 1]);
        if (hi - lo) as usize + 1 != comp.len() {
            return Err(PdError::NonContiguousComponent { edges: comp.clone() }.into());
        }
        for &e in comp {
            successor.insert(e, if e == hi { lo } else { e + 1 });
        }
    }

    let mut resolved = Vec::with_capacity(tuples.len());
    for (i, &tuple) in tuples.iter().enumerate() {
        let [a, b, c, d] = tuple;
        if successor[&a] != c {
            return Err(PdError::UnderStrandOrder { crossing: i + 1, tuple, from: a, to: c }.into());
        }
        let sign = match signs {
            Some(s) => s[i],
            None => {
                let positive = successor[&d] == b;
                let negative = successor[&b] == d;
                match (positive, negative) {
                    (true, false) => Sign::Positive,
                    (false, true) => Sign::Negative,
                    _ => return Err(PdError::AmbiguousSign { crossing: i + 1, tuple }.into()),
                }
            }
        };
        resolved.push(sign);
    }

    // Arcs: edges joined through overcrossings.
    let mut arcs_uf = UnionFind::new(edges.len());
    for &[_, b, _, d] in &tuples {
        arcs_uf.union(slot[&b], slot[&d]);
    }
    let mut arc_of_root: BTreeMap<usize, ArcId> = BTreeMap::new();
    let mut arc_of_edge: BTreeMap<u32, ArcId> = BTreeMap::new();
    let mut components = Vec::with_capacity(comp_list.len());
    for comp in &comp_list {
        let mut sequence: Vec<ArcId> = Vec::new();
        let mut e = comp[0];
        for _ in 0..comp.len() {
            let root = arcs_uf.find(slot[&e]);
            let next_id = arc_of_root.len();
            let arc = *arc_of_root.entry(root).or_insert(next_id);
            arc_of_edge.insert(e, arc);
            if sequence.last() != Some(&arc) {
                sequence.push(arc);
            }
            e = successor[&e];
        }
        if sequence.len() > 1 && sequence.first() == sequence.last() {
            sequence.pop();
        }
        components.push(sequence);
    }
    let crossings = tuples
        .iter()
        .zip(&resolved)
        .map(|(&[a, b, c, _], &sign)| Crossing {
            sign,
            under_in: arc_of_edge[&a],
            over: arc_of_edge[&b],
            under_out: arc_of_edge[&c],
        })
        .collect();
    LinkDiagram::new(name, arc_of_root.len(), crossings, components)
}
