//! Violation reports shared by all verification passes.
//!
//! A verifier returns a [`Report`]; an empty report means every checked
//! condition held. Reports render one violation per line in the fixed
//! machine-grepable form `CELL <kind> <id>: <rule>`.

use std::fmt;

/// Reference to the cell a violation is anchored to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CellRef {
    Vertex(u32),
    Edge(u32),
    Square(u32),
    ThreeCube(u32),
    Hyperplane(u32),
    Global,
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellRef::Vertex(i) => write!(f, "vertex {}", i),
            CellRef::Edge(i) => write!(f, "edge {}", i),
            CellRef::Square(i) => write!(f, "square {}", i),
            CellRef::ThreeCube(i) => write!(f, "cube {}", i),
            CellRef::Hyperplane(i) => write!(f, "hyperplane {}", i),
            CellRef::Global => write!(f, "global"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub cell: CellRef,
    pub rule: String,
}

/// An ordered list of violations. Verifiers sort before returning so output
/// is deterministic regardless of internal iteration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    violations: Vec<Violation>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, cell: CellRef, rule: impl Into<String>) {
        self.violations.push(Violation {
            cell,
            rule: rule.into(),
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.violations.extend(other.violations);
    }

    pub fn sort(&mut self) {
        self.violations
            .sort_by(|a, b| a.cell.cmp(&b.cell).then_with(|| a.rule.cmp(&b.rule)));
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "CELL {}: {}", v.cell, v.rule)?;
        }
        Ok(())
    }
}
