//! Finite quandles given by operation tables.
//!
//! Elements are `0..m` internally. Everything that faces a user (files,
//! error messages) uses 1-based labels, converted at the boundary.

use std::fmt;

use thiserror::Error;

use crate::field::{FMatrix, FVector, FieldError, VectorSpace};

pub type Element = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AxiomViolation {
    /// `x ▷ x != x`.
    Idempotence { x: Element },
    /// `x1 ▷ y == x2 ▷ y` with `x1 != x2`, so right translation by `y` is not
    /// a bijection.
    RightTranslationNotBijective { y: Element, x1: Element, x2: Element },
    /// `(x ▷ y) ▷ z != (x ▷ z) ▷ (y ▷ z)`.
    SelfDistributivity { x: Element, y: Element, z: Element },
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Idempotence { x } => write!(f, "axiom (i) idempotence fails at x={}", x + 1),
            Self::RightTranslationNotBijective { y, x1, x2 } => write!(
                f,
                "axiom (ii) right translation by y={} is not bijective: x={} and x={} have the same image",
                y + 1,
                x1 + 1,
                x2 + 1
            ),
            Self::SelfDistributivity { x, y, z } => {
                write!(f, "axiom (iii) self-distributivity fails at (x,y,z)=({},{},{})", x + 1, y + 1, z + 1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuandleError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{} quandle axiom violation(s), first: {}", .0.len(), .0[0])]
    Axioms(Vec<AxiomViolation>),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A validated finite quandle with its inverse operation precomputed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quandle {
    order: usize,
    table: Vec<Element>,
    inv: Vec<Element>,
}

/// Checks the three quandle axioms on a 0-indexed table. All violations are
/// reported, not just the first.
pub fn validate_quandle(rows: &[Vec<Element>]) -> Result<Quandle, QuandleError> {
    let m = rows.len();
    if m == 0 {
        return Err(QuandleError::Input("empty operation table".into()));
    }
    let mut table = Vec::with_capacity(m * m);
    for (x, row) in rows.iter().enumerate() {
        if row.len() != m {
            return Err(QuandleError::Input(format!("row {} has {} entries, expected {m}", x + 1, row.len())));
        }
        for (y, &v) in row.iter().enumerate() {
            if v >= m {
                return Err(QuandleError::Input(format!("entry {}▷{} = {} is outside 1..{m}", x + 1, y + 1, v + 1)));
            }
            table.push(v);
        }
    }

    let at = |x: usize, y: usize| table[x * m + y];
    let mut violations = Vec::new();
    for x in 0..m {
        if at(x, x) != x {
            violations.push(AxiomViolation::Idempotence { x });
        }
    }
    let mut inv = vec![usize::MAX; m * m];
    for y in 0..m {
        for x in 0..m {
            let image = at(x, y);
            let slot = &mut inv[image * m + y];
            if *slot == usize::MAX {
                *slot = x;
            } else {
                violations.push(AxiomViolation::RightTranslationNotBijective { y, x1: *slot, x2: x });
            }
        }
    }
    for x in 0..m {
        for y in 0..m {
            for z in 0..m {
                if at(at(x, y), z) != at(at(x, z), at(y, z)) {
                    violations.push(AxiomViolation::SelfDistributivity { x, y, z });
                }
            }
        }
    }
    if !violations.is_empty() {
        return Err(QuandleError::Axioms(violations));
    }
    Ok(Quandle { order: m, table, inv })
}

impl Quandle {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `x ▷ y`.
    #[inline]
    pub fn op(&self, x: Element, y: Element) -> Element {
        self.table[x * self.order + y]
    }

    /// `x ▷⁻¹ y`, the unique `w` with `w ▷ y = x`.
    #[inline]
    pub fn inv_op(&self, x: Element, y: Element) -> Element {
        self.inv[x * self.order + y]
    }

    pub fn rows(&self) -> Vec<Vec<Element>> {
        self.table.chunks(self.order).map(|r| r.to_vec()).collect()
    }

    /// Every right translation is an involution.
    pub fn is_kei(&self) -> bool {
        (0..self.order).all(|x| (0..self.order).all(|y| self.op(x, y) == self.inv_op(x, y)))
    }

    /// Parses the `quandle m` text format (1-indexed entries).
    pub fn parse(text: &str) -> Result<Self, QuandleError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (header_line, header) =
            lines.next().ok_or(QuandleError::Parse { line: 1, message: "empty quandle file".into() })?;
        let mut words = header.split_whitespace();
        let order = match (words.next(), words.next(), words.next()) {
            (Some("quandle"), Some(m), None) => m.parse::<usize>().ok().filter(|&m| m > 0),
            _ => None,
        }
        .ok_or_else(|| QuandleError::Parse {
            line: header_line,
            message: format!("expected `quandle <order>`, found `{header}`"),
        })?;

        let mut rows = Vec::with_capacity(order);
        for (line, content) in lines {
            if rows.len() == order {
                return Err(QuandleError::Parse {
                    line,
                    message: format!("unexpected extra row, table already has {order} rows"),
                });
            }
            let row = content
                .split_whitespace()
                .map(|tok| match tok.parse::<usize>() {
                    Ok(v) if (1..=order).contains(&v) => Ok(v - 1),
                    _ => Err(QuandleError::Parse {
                        line,
                        message: format!("entry `{tok}` is not a label in 1..{order}"),
                    }),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != order {
                return Err(QuandleError::Parse {
                    line,
                    message: format!("row has {} entries, expected {order}", row.len()),
                });
            }
            rows.push(row);
        }
        if rows.len() != order {
            return Err(QuandleError::Parse {
                line: text.lines().count().max(1),
                message: format!("expected {order} rows, found {}", rows.len()),
            });
        }
        validate_quandle(&rows)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("quandle {}\n", self.order);
        for row in self.table.chunks(self.order) {
            let labels: Vec<String> = row.iter().map(|v| (v + 1).to_string()).collect();
            out.push_str(&labels.join(" "));
            out.push('\n');
        }
        out
    }
}

/// The trivial quandle `x ▷ y = x` on `m` elements.
pub fn trivial_quandle(m: usize) -> Result<Quandle, QuandleError> {
    validate_quandle(&(0..m).map(|x| vec![x; m]).collect::<Vec<_>>())
}

/// A finite group given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    order: usize,
    table: Vec<usize>,
    inverse: Vec<usize>,
}

impl GroupTable {
    pub fn new(rows: &[Vec<usize>]) -> Result<Self, QuandleError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(QuandleError::Input("group table must be square and nonempty".into()));
        }
        if rows.iter().flatten().any(|&v| v >= n) {
            return Err(QuandleError::Input("group table entry out of range".into()));
        }
        let table: Vec<usize> = rows.iter().flatten().copied().collect();
        let mul = |a: usize, b: usize| table[a * n + b];
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mul(e, g) == g && mul(g, e) == g))
            .ok_or_else(|| QuandleError::Input("group table has no identity".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for g in 0..n {
            let inv = (0..n)
                .find(|&h| mul(g, h) == identity && mul(h, g) == identity)
                .ok_or_else(|| QuandleError::Input(format!("element {g} has no inverse")))?;
            inverse.push(inv);
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                        return Err(QuandleError::Input(format!("group table is not associative at ({a},{b},{c})")));
                    }
                }
            }
        }
        Ok(Self { order: n, table, inverse })
    }

    pub fn cyclic(n: usize) -> Self {
        let rows: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::new(&rows).expect("cyclic group table is valid")
    }

    /// The dihedral group of order `2n`; element `i + n*j` is `r^i s^j`.
    pub fn dihedral(n: usize) -> Self {
        let rows: Vec<Vec<usize>> = (0..2 * n)
            .map(|g| {
                let (a, b) = (g % n, g / n);
                (0..2 * n)
                    .map(|h| {
                        let (c, d) = (h % n, h / n);
                        let rot = if b == 0 { (a + c) % n } else { (a + n - c) % n };
                        rot + n * ((b + d) % 2)
                    })
                    .collect()
            })
            .collect();
        Self::new(&rows).expect("dihedral group table is valid")
    }

    /// Direct product; element `(g, h)` is `g * other.order() + h`.
    pub fn product(&self, other: &GroupTable) -> Self {
        let (n, k) = (self.order, other.order);
        let rows: Vec<Vec<usize>> = (0..n * k)
            .map(|x| (0..n * k).map(|y| self.mul(x / k, y / k) * k + other.mul(x % k, y % k)).collect())
            .collect();
        Self::new(&rows).expect("product of groups is a group")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }
}

/// `g ▷ h = h⁻¹ g h`.
pub fn conjugation_quandle(group: &GroupTable) -> Result<Quandle, QuandleError> {
    let n = group.order();
    let rows: Vec<Vec<usize>> =
        (0..n).map(|g| (0..n).map(|h| group.mul(group.mul(group.inverse(h), g), h)).collect()).collect();
    validate_quandle(&rows)
}

/// `g ▷ h = h g⁻¹ h`.
pub fn core_quandle(group: &GroupTable) -> Result<Quandle, QuandleError> {
    let n = group.order();
    let rows: Vec<Vec<usize>> =
        (0..n).map(|g| (0..n).map(|h| group.mul(group.mul(h, group.inverse(g)), h)).collect()).collect();
    validate_quandle(&rows)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `x ▷ y = t x + (1 - t) y` on `Z_n`.
pub fn alexander_quandle(n: usize, t: i64) -> Result<Quandle, QuandleError> {
    if n == 0 {
        return Err(QuandleError::Input("Alexander quandle modulus must be positive".into()));
    }
    let t = t.rem_euclid(n as i64);
    if gcd(t as u64, n as u64) != 1 {
        return Err(QuandleError::Input(format!("t={t} is not a unit mod {n}")));
    }
    let n64 = n as i64;
    let rows: Vec<Vec<usize>> =
        (0..n64).map(|x| (0..n64).map(|y| (t * x + (1 - t) * y).rem_euclid(n64) as usize).collect()).collect();
    validate_quandle(&rows)
}

/// The dihedral quandle `R_n`, `x ▷ y = 2y - x`.
pub fn dihedral_quandle(n: usize) -> Result<Quandle, QuandleError> {
    alexander_quandle(n, -1)
}

/// `x ▷ y = x + (x^T S y) y` on `F_p^n`, elements indexed in lexicographic
/// vector order.
pub fn symplectic_quandle(space: &VectorSpace, form: &FMatrix) -> Result<Quandle, QuandleError> {
    if form.field() != space.field() {
        return Err(FieldError::ModulusMismatch { left: space.field().modulus(), right: form.field().modulus() }.into());
    }
    if form.dim() != space.dim() {
        return Err(FieldError::DimensionMismatch { left: space.dim(), right: form.dim() }.into());
    }
    if !space.dim().is_multiple_of(2) {
        return Err(QuandleError::Input("symplectic quandle needs an even dimension".into()));
    }
    if !form.is_alternating() {
        return Err(QuandleError::Input(format!("form {form} is not alternating")));
    }
    if !form.is_nondegenerate() {
        return Err(QuandleError::Input(format!("form {form} is degenerate")));
    }
    let vectors: Vec<FVector> = space.iter().collect();
    let mut rows = Vec::with_capacity(vectors.len());
    for x in &vectors {
        let mut row = Vec::with_capacity(vectors.len());
        for y in &vectors {
            let s = crate::field::bilinear_eval(form, x, y)?;
            let image = crate::field::vec_add(x, &crate::field::scalar_mul(s, y)?)?;
            row.push(space.index_of(&image)?);
        }
        rows.push(row);
    }
    validate_quandle(&rows)
}
