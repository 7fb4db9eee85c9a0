//! The combinatorial cube-complex data model: cells, links, the flag
//! condition, identification of links with a Kneser complex, and adjacency
//! (transfer) maps between vertex stars.
//!
//! Directed 1-cubes come in reversal pairs `2i / 2i+1`. A square stores its
//! boundary as the 4-tuple `(e1, e2, e1', e2')` with `e1 = (x,y)`,
//! `e2 = (y,z)`, `e1' = (y',z)`, `e2' = (x,y')`; `e1/e1'` and `e2/e2'` are
//! the two opposite pairs. 3-cubes store corners on the bit-cube `{0,1}^3`,
//! directed axis edges, and their six square faces.

use std::collections::BTreeMap;
use std::fmt;

use crate::kneser::{recover_bijection, sub_kneser, KneserComplex, KneserError};
use crate::label::{LabelSet, Subset};
use crate::report::{CellRef, Report};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u32);

/// A directed 1-cube. Reversal flips the low bit.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct EdgeId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct SquareId(pub u32);

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ThreeCubeId(pub u32);

impl EdgeId {
    pub fn rev(self) -> EdgeId {
        EdgeId(self.0 ^ 1)
    }

    /// Index of the underlying undirected 1-cube.
    pub fn undirected(self) -> usize {
        (self.0 >> 1) as usize
    }

    /// The even-id directed representative of the undirected 1-cube.
    pub fn forward(self) -> EdgeId {
        EdgeId(self.0 & !1)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Square boundary in the `(e1, e2, e1', e2')` convention.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SquareBoundary {
    pub e1: EdgeId,
    pub e2: EdgeId,
    pub e1p: EdgeId,
    pub e2p: EdgeId,
}

impl SquareBoundary {
    pub fn edges(&self) -> [EdgeId; 4] {
        [self.e1, self.e2, self.e1p, self.e2p]
    }

    /// Re-roots at the terminal corner of `e1` (an involution on
    /// presentations).
    fn rerooted(&self) -> SquareBoundary {
        SquareBoundary {
            e1: self.e1.rev(),
            e2: self.e2p,
            e1p: self.e1p.rev(),
            e2p: self.e2,
        }
    }

    /// Swaps which boundary edge at the root corner is `e1`.
    fn swapped(&self) -> SquareBoundary {
        SquareBoundary {
            e1: self.e2p,
            e2: self.e1p,
            e1p: self.e2,
            e2p: self.e1,
        }
    }

    /// The eight boundary presentations of the same square (4 corners × 2
    /// first-edge choices), in a fixed deterministic order.
    pub fn presentations(&self) -> Vec<SquareBoundary> {
        let mut out = vec![*self];
        let mut i = 0;
        while i < out.len() {
            let cur = out[i];
            for next in [cur.rerooted(), cur.swapped()] {
                if !out.contains(&next) {
                    out.push(next);
                }
            }
            i += 1;
        }
        out
    }
}

/// A 3-cube: corner `b ∈ {0,1}^3` is `corners[b]`; the directed edge along
/// axis `a` at the other-axis position `p ∈ {0,1}^2` runs from the `bit a=0`
/// corner to the `bit a=1` corner; `faces[2a + s]` is the square at
/// `bit a = s`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ThreeCube {
    pub corners: [VertexId; 8],
    pub edges: [EdgeId; 12],
    pub faces: [SquareId; 6],
}

/// Corner index helpers for the bit-cube.
pub fn cube_edge_slot(axis: usize, pos: usize) -> usize {
    axis * 4 + pos
}

/// The corner with `bit axis = side` inserted into position `pos` of the
/// remaining two bits (low bit of `pos` on the lower remaining axis).
pub fn cube_corner_at(axis: usize, side: usize, pos: usize) -> usize {
    let others: [usize; 2] = match axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };
    let mut b = side << axis;
    b |= (pos & 1) << others[0];
    b |= ((pos >> 1) & 1) << others[1];
    b
}

impl ThreeCube {
    /// All 48 reparameterizations of the same cube (8 root corners × 6 axis
    /// orders), deduplicated, in a fixed order. Used to compare cubes up to
    /// presentation.
    pub fn presentations(&self) -> Vec<ThreeCube> {
        const AXIS_PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut out = Vec::new();
        for b0 in 0usize..8 {
            for pi in AXIS_PERMS {
                let spread = |b: usize| -> usize {
                    (0..3).fold(0, |acc, i| acc | (((b >> i) & 1) << pi[i]))
                };
                let corners: [VertexId; 8] =
                    std::array::from_fn(|b| self.corners[b0 ^ spread(b)]);
                let edges: [EdgeId; 12] = std::array::from_fn(|slot| {
                    let i = slot / 4;
                    let pos = slot % 4;
                    let others: [usize; 2] = match i {
                        0 => [1, 2],
                        1 => [0, 2],
                        _ => [0, 1],
                    };
                    let nb = ((pos & 1) << others[0]) | (((pos >> 1) & 1) << others[1]);
                    let lo_old = b0 ^ spread(nb);
                    let a = pi[i];
                    let others_old: [usize; 2] = match a {
                        0 => [1, 2],
                        1 => [0, 2],
                        _ => [0, 1],
                    };
                    let pos_old = ((lo_old >> others_old[0]) & 1)
                        | (((lo_old >> others_old[1]) & 1) << 1);
                    let e = self.edges[cube_edge_slot(a, pos_old)];
                    if (lo_old >> a) & 1 == 0 {
                        e
                    } else {
                        e.rev()
                    }
                });
                let faces: [SquareId; 6] = std::array::from_fn(|fi| {
                    let i = fi / 2;
                    let s = fi % 2;
                    let a = pi[i];
                    let flipped = s ^ ((b0 >> a) & 1);
                    self.faces[2 * a + flipped]
                });
                let cand = ThreeCube {
                    corners,
                    edges,
                    faces,
                };
                if !out.contains(&cand) {
                    out.push(cand);
                }
            }
        }
        out
    }

    /// Ends of the three edges cornered at bit-corner `b`, one per axis.
    pub fn corner_ends(&self, b: usize) -> [EdgeId; 3] {
        let mut out = [EdgeId(0); 3];
        for (axis, slot) in out.iter_mut().enumerate() {
            let others: [usize; 2] = match axis {
                0 => [1, 2],
                1 => [0, 2],
                _ => [0, 1],
            };
            let pos = ((b >> others[0]) & 1) | (((b >> others[1]) & 1) << 1);
            let e = self.edges[cube_edge_slot(axis, pos)];
            // The edge runs toward bit = 1; the end at the corner is the
            // direction terminating there.
            *slot = if (b >> axis) & 1 == 1 { e } else { e.rev() };
        }
        out
    }
}

/// A validated cube complex. Construct via [`validate_complex`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CubeComplex {
    vertex_count: u32,
    /// `edge_ends[e] = (init, term)`; entry `2i+1` reverses entry `2i`.
    edge_ends: Vec<(VertexId, VertexId)>,
    squares: Vec<SquareBoundary>,
    cubes: Vec<ThreeCube>,
    /// Ends (directed edges terminating) at each vertex, ascending.
    ends: Vec<Vec<EdgeId>>,
    /// Square-corner incidences per end: `(square, corner 0..4)`.
    end_square_corners: Vec<Vec<(SquareId, u8)>>,
    /// Cube-corner incidences per end: `(cube, corner 0..8)`.
    end_cube_corners: Vec<Vec<(ThreeCubeId, u8)>>,
}

/// A square corner: the vertex and its two boundary ends there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SquareCorner {
    pub vertex: VertexId,
    pub ends: [EdgeId; 2],
}

impl CubeComplex {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count as usize
    }

    pub fn directed_edge_count(&self) -> usize {
        self.edge_ends.len()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.edge_ends.len() / 2
    }

    pub fn square_count(&self) -> usize {
        self.squares.len()
    }

    pub fn cube_count(&self) -> usize {
        self.cubes.len()
    }

    pub fn init(&self, e: EdgeId) -> VertexId {
        self.edge_ends[e.0 as usize].0
    }

    pub fn term(&self, e: EdgeId) -> VertexId {
        self.edge_ends[e.0 as usize].1
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_count).map(VertexId)
    }

    pub fn directed_edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edge_ends.len() as u32).map(EdgeId)
    }

    /// Even-id representatives of undirected edges.
    pub fn undirected_edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edge_ends.len() as u32).step_by(2).map(EdgeId)
    }

    pub fn square_ids(&self) -> impl Iterator<Item = SquareId> {
        (0..self.squares.len() as u32).map(SquareId)
    }

    pub fn cube_ids(&self) -> impl Iterator<Item = ThreeCubeId> {
        (0..self.cubes.len() as u32).map(ThreeCubeId)
    }

    pub fn square(&self, s: SquareId) -> &SquareBoundary {
        &self.squares[s.0 as usize]
    }

    pub fn cube(&self, c: ThreeCubeId) -> &ThreeCube {
        &self.cubes[c.0 as usize]
    }

    /// Directed edges terminating at `v`, i.e. the link vertices at `v`.
    pub fn ends_at(&self, v: VertexId) -> &[EdgeId] {
        &self.ends[v.0 as usize]
    }

    pub fn square_corner_incidences(&self, end: EdgeId) -> &[(SquareId, u8)] {
        &self.end_square_corners[end.0 as usize]
    }

    pub fn cube_corner_incidences(&self, end: EdgeId) -> &[(ThreeCubeId, u8)] {
        &self.end_cube_corners[end.0 as usize]
    }

    /// The four corners of a square in presentation order `x, y, z, y'`.
    pub fn square_corners(&self, s: SquareId) -> [SquareCorner; 4] {
        let b = self.squares[s.0 as usize];
        [
            SquareCorner {
                vertex: self.init(b.e1),
                ends: [b.e1.rev(), b.e2p.rev()],
            },
            SquareCorner {
                vertex: self.term(b.e1),
                ends: [b.e1, b.e2.rev()],
            },
            SquareCorner {
                vertex: self.term(b.e2),
                ends: [b.e2, b.e1p],
            },
            SquareCorner {
                vertex: self.term(b.e2p),
                ends: [b.e2p, b.e1p.rev()],
            },
        ]
    }

    /// Whether the complex's 1-skeleton is connected (or empty).
    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        let mut seen = vec![false; self.vertex_count as usize];
        let mut stack = vec![VertexId(0)];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &end in self.ends_at(v) {
                let u = self.init(end);
                if !seen[u.0 as usize] {
                    seen[u.0 as usize] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.vertex_count
    }

    /// BFS spanning forest rooted at `root` first, then at the smallest
    /// unvisited vertices. Returns per-vertex parent end (the tree edge
    /// arriving at the vertex) and the BFS order. Neighbor visits follow
    /// ascending end ids, so the forest is canonical.
    pub fn bfs_forest(&self, root: VertexId) -> BfsForest {
        let n = self.vertex_count as usize;
        let mut parent: Vec<Option<EdgeId>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut roots = Vec::new();
        let starts =
            std::iter::once(root).chain((0..self.vertex_count).map(VertexId));
        for start in starts {
            if seen[start.0 as usize] {
                continue;
            }
            seen[start.0 as usize] = true;
            roots.push(start);
            let mut queue = std::collections::VecDeque::new();
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &end in self.ends_at(v) {
                    // `end` terminates at v; walk it backwards to its start.
                    let u = self.init(end);
                    if !seen[u.0 as usize] {
                        seen[u.0 as usize] = true;
                        // The tree edge arriving at u is the reversal.
                        parent[u.0 as usize] = Some(end.rev());
                        queue.push_back(u);
                    }
                }
            }
        }
        BfsForest {
            parent,
            order,
            roots,
        }
    }
}

/// Canonical BFS spanning forest of the 1-skeleton.
pub struct BfsForest {
    /// `parent[v]` is the tree end terminating at `v` (None at roots).
    pub parent: Vec<Option<EdgeId>>,
    pub order: Vec<VertexId>,
    pub roots: Vec<VertexId>,
}

impl BfsForest {
    pub fn is_tree_edge(&self, e: EdgeId) -> bool {
        self.parent.iter().flatten().any(|&p| p.undirected() == e.undirected())
    }

    /// Tree path from the root of `v`'s component to `v`, as directed edges.
    pub fn path_from_root(&self, x: &CubeComplex, v: VertexId) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut cur = v;
        while let Some(p) = self.parent[cur.0 as usize] {
            path.push(p);
            cur = x.init(p);
        }
        path.reverse();
        path
    }
}

// ---------------------------------------------------------------------------
// Raw cell data and validation
// ---------------------------------------------------------------------------

/// Unvalidated cell data, the shape of the on-disk format.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawComplex {
    pub zero_cubes: u32,
    /// Directed edges as `(init, term, reversal)` index triples.
    pub one_cubes: Vec<(u32, u32, u32)>,
    /// Boundary 4-tuples of directed edge indices.
    pub squares: Vec<[u32; 4]>,
    pub three_cubes: Vec<RawThreeCube>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawThreeCube {
    pub corners: [u32; 8],
    pub edges: [u32; 12],
    pub faces: [u32; 6],
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ValidationError {
    #[error("{cell}: dangling reference: {detail}")]
    DanglingReference { cell: CellRef, detail: String },
    #[error("edge {edge}: reversal structure broken: {detail}")]
    NonInvolutiveReversal { edge: u32, detail: String },
    #[error("square {square}: open boundary: {detail}")]
    OpenSquareBoundary { square: u32, detail: String },
    #[error("cube {cube}: inconsistent faces: {detail}")]
    InconsistentCubeFaces { cube: u32, detail: String },
}

/// Checks every cell invariant and normalizes indices so that reversal pairs
/// are `2i / 2i+1`.
pub fn validate_complex(raw: &RawComplex) -> Result<CubeComplex, ValidationError> {
    let n = raw.zero_cubes;
    let m = raw.one_cubes.len();

    for (i, &(a, b, r)) in raw.one_cubes.iter().enumerate() {
        if a >= n || b >= n {
            return Err(ValidationError::DanglingReference {
                cell: CellRef::Edge(i as u32),
                detail: format!("endpoint out of range (vertices: {})", n),
            });
        }
        if r as usize >= m {
            return Err(ValidationError::NonInvolutiveReversal {
                edge: i as u32,
                detail: format!("reversal index {} out of range", r),
            });
        }
        if r as usize == i {
            return Err(ValidationError::NonInvolutiveReversal {
                edge: i as u32,
                detail: "reversal has a fixed point".into(),
            });
        }
        let (ra, rb, rr) = raw.one_cubes[r as usize];
        if rr as usize != i {
            return Err(ValidationError::NonInvolutiveReversal {
                edge: i as u32,
                detail: format!("reversal not involutive: rev(rev({})) = {}", i, rr),
            });
        }
        if ra != b || rb != a {
            return Err(ValidationError::NonInvolutiveReversal {
                edge: i as u32,
                detail: "reversal does not swap endpoints".into(),
            });
        }
    }

    // Normalize: pair `2k/2k+1`, ordered by the smaller original index.
    let mut remap = vec![u32::MAX; m];
    let mut edge_ends = Vec::with_capacity(m);
    for (i, &(a, b, r)) in raw.one_cubes.iter().enumerate() {
        if remap[i] != u32::MAX {
            continue;
        }
        let id = edge_ends.len() as u32;
        remap[i] = id;
        remap[r as usize] = id + 1;
        edge_ends.push((VertexId(a), VertexId(b)));
        edge_ends.push((VertexId(b), VertexId(a)));
    }

    let map_edge = |e: u32, cell: CellRef| -> Result<EdgeId, ValidationError> {
        if (e as usize) < m {
            Ok(EdgeId(remap[e as usize]))
        } else {
            Err(ValidationError::DanglingReference {
                cell,
                detail: format!("edge index {} out of range", e),
            })
        }
    };

    let mut squares = Vec::with_capacity(raw.squares.len());
    for (i, sq) in raw.squares.iter().enumerate() {
        let cell = CellRef::Square(i as u32);
        let b = SquareBoundary {
            e1: map_edge(sq[0], cell)?,
            e2: map_edge(sq[1], cell)?,
            e1p: map_edge(sq[2], cell)?,
            e2p: map_edge(sq[3], cell)?,
        };
        let term = |e: EdgeId| edge_ends[e.0 as usize].1;
        let init = |e: EdgeId| edge_ends[e.0 as usize].0;
        let check = |cond: bool, detail: &str| -> Result<(), ValidationError> {
            if cond {
                Ok(())
            } else {
                Err(ValidationError::OpenSquareBoundary {
                    square: i as u32,
                    detail: detail.into(),
                })
            }
        };
        check(term(b.e1) == init(b.e2), "tau(e1) != iota(e2)")?;
        check(term(b.e2p) == init(b.e1p), "tau(e2') != iota(e1')")?;
        check(term(b.e2) == term(b.e1p), "tau(e2) != tau(e1')")?;
        check(init(b.e1) == init(b.e2p), "iota(e1) != iota(e2')")?;
        squares.push(b);
    }

    let mut cubes = Vec::with_capacity(raw.three_cubes.len());
    for (i, rc) in raw.three_cubes.iter().enumerate() {
        let cell = CellRef::ThreeCube(i as u32);
        let mut corners = [VertexId(0); 8];
        for (k, &v) in rc.corners.iter().enumerate() {
            if v >= n {
                return Err(ValidationError::DanglingReference {
                    cell,
                    detail: format!("corner vertex {} out of range", v),
                });
            }
            corners[k] = VertexId(v);
        }
        let mut edges = [EdgeId(0); 12];
        for (k, &e) in rc.edges.iter().enumerate() {
            edges[k] = map_edge(e, cell)?;
        }
        let mut faces = [SquareId(0); 6];
        for (k, &s) in rc.faces.iter().enumerate() {
            if s as usize >= squares.len() {
                return Err(ValidationError::DanglingReference {
                    cell,
                    detail: format!("face square {} out of range", s),
                });
            }
            faces[k] = SquareId(s);
        }
        let cube = ThreeCube {
            corners,
            edges,
            faces,
        };
        // Axis edges must run between the right corners.
        for axis in 0..3 {
            for pos in 0..4 {
                let e = cube.edges[cube_edge_slot(axis, pos)];
                let lo = cube.corners[cube_corner_at(axis, 0, pos)];
                let hi = cube.corners[cube_corner_at(axis, 1, pos)];
                let (a, b) = edge_ends[e.0 as usize];
                if (a, b) != (lo, hi) {
                    return Err(ValidationError::InconsistentCubeFaces {
                        cube: i as u32,
                        detail: format!(
                            "axis {} edge at position {} does not join its corners",
                            axis, pos
                        ),
                    });
                }
            }
        }
        // Each face must be a stored square whose boundary matches the
        // face's edges in some presentation. The expected boundary is read
        // off the bit-cube: edges always run from the low corner to the high
        // corner along their axis.
        let ascending_edge = |from: usize, axis2: usize| -> EdgeId {
            let others: [usize; 2] = match axis2 {
                0 => [1, 2],
                1 => [0, 2],
                _ => [0, 1],
            };
            let pos = ((from >> others[0]) & 1) | (((from >> others[1]) & 1) << 1);
            cube.edges[cube_edge_slot(axis2, pos)]
        };
        for axis in 0..3 {
            for side in 0..2 {
                let (u, v): (usize, usize) = match axis {
                    0 => (1, 2),
                    1 => (0, 2),
                    _ => (0, 1),
                };
                let c00 = cube_corner_at(axis, side, 0);
                let c10 = c00 | (1 << u);
                let c01 = c00 | (1 << v);
                let want = SquareBoundary {
                    e1: ascending_edge(c00, u),
                    e2: ascending_edge(c10, v),
                    e1p: ascending_edge(c01, u),
                    e2p: ascending_edge(c00, v),
                };
                let face = cube.faces[axis * 2 + side];
                let stored = squares[face.0 as usize];
                if !stored.presentations().contains(&want) {
                    return Err(ValidationError::InconsistentCubeFaces {
                        cube: i as u32,
                        detail: format!(
                            "face {} (axis {}, side {}) does not match square {}",
                            axis * 2 + side,
                            axis,
                            side,
                            face.0
                        ),
                    });
                }
            }
        }
        cubes.push(cube);
    }

    // Incidence tables.
    let mut ends: Vec<Vec<EdgeId>> = vec![Vec::new(); n as usize];
    for (i, &(_, b)) in edge_ends.iter().enumerate() {
        ends[b.0 as usize].push(EdgeId(i as u32));
    }
    let mut end_square_corners: Vec<Vec<(SquareId, u8)>> = vec![Vec::new(); edge_ends.len()];
    let complex_partial = CubeComplex {
        vertex_count: n,
        edge_ends: edge_ends.clone(),
        squares: squares.clone(),
        cubes: cubes.clone(),
        ends: ends.clone(),
        end_square_corners: Vec::new(),
        end_cube_corners: Vec::new(),
    };
    for s in 0..squares.len() {
        for (ci, corner) in complex_partial
            .square_corners(SquareId(s as u32))
            .iter()
            .enumerate()
        {
            for &end in &corner.ends {
                end_square_corners[end.0 as usize].push((SquareId(s as u32), ci as u8));
            }
        }
    }
    let mut end_cube_corners: Vec<Vec<(ThreeCubeId, u8)>> = vec![Vec::new(); edge_ends.len()];
    for (c, cube) in cubes.iter().enumerate() {
        for b in 0..8 {
            for end in cube.corner_ends(b) {
                end_cube_corners[end.0 as usize].push((ThreeCubeId(c as u32), b as u8));
            }
        }
    }

    Ok(CubeComplex {
        vertex_count: n,
        edge_ends,
        squares,
        cubes,
        ends,
        end_square_corners,
        end_cube_corners,
    })
}

impl CubeComplex {
    /// The raw cell data of this complex (already normalized).
    pub fn to_raw(&self) -> RawComplex {
        RawComplex {
            zero_cubes: self.vertex_count,
            one_cubes: self
                .edge_ends
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| (a.0, b.0, (i as u32) ^ 1))
                .collect(),
            squares: self
                .squares
                .iter()
                .map(|b| [b.e1.0, b.e2.0, b.e1p.0, b.e2p.0])
                .collect(),
            three_cubes: self
                .cubes
                .iter()
                .map(|c| RawThreeCube {
                    corners: c.corners.map(|v| v.0),
                    edges: c.edges.map(|e| e.0),
                    faces: c.faces.map(|s| s.0),
                })
                .collect(),
        }
    }
}

/// Builds a complex from undirected edges (each becoming a `2i/2i+1` pair)
/// plus square boundaries over the resulting directed ids.
pub fn complex_from_cells(
    zero_cubes: u32,
    undirected_edges: &[(u32, u32)],
    squares: &[[u32; 4]],
    three_cubes: &[RawThreeCube],
) -> Result<CubeComplex, ValidationError> {
    let mut one_cubes = Vec::with_capacity(undirected_edges.len() * 2);
    for (i, &(a, b)) in undirected_edges.iter().enumerate() {
        let fwd = (2 * i) as u32;
        one_cubes.push((a, b, fwd + 1));
        one_cubes.push((b, a, fwd));
    }
    validate_complex(&RawComplex {
        zero_cubes,
        one_cubes,
        squares: squares.to_vec(),
        three_cubes: three_cubes.to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Links
// ---------------------------------------------------------------------------

/// The link of a 0-cube: vertices are edge-ends at the base, edges come from
/// square corners, triangles from 3-cube corners. Edge/triangle lists keep
/// one entry per incidence so repeated cells are visible to the NPC check.
#[derive(Clone, Debug)]
pub struct Link {
    pub base: VertexId,
    /// Ends at the base, ascending by edge id; link vertex `i` is `ends[i]`.
    pub ends: Vec<EdgeId>,
    pub edges: Vec<LinkEdge>,
    pub triangles: Vec<LinkTriangle>,
    adjacency: Vec<Vec<bool>>,
    index_of: BTreeMap<EdgeId, usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkEdge {
    /// Link vertex indices, ascending.
    pub pair: [usize; 2],
    pub square: SquareId,
    pub corner: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkTriangle {
    pub triple: [usize; 3],
    pub cube: ThreeCubeId,
    pub corner: u8,
}

impl Link {
    pub fn vertex_count(&self) -> usize {
        self.ends.len()
    }

    pub fn index_of(&self, end: EdgeId) -> Option<usize> {
        self.index_of.get(&end).copied()
    }

    pub fn are_adjacent(&self, i: usize, j: usize) -> bool {
        self.adjacency[i][j]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].iter().filter(|&&b| b).count()
    }

    /// Distinct link edges (dedup over incidences), ascending pairs.
    pub fn distinct_edges(&self) -> Vec<[usize; 2]> {
        let mut out: Vec<[usize; 2]> = self.edges.iter().map(|e| e.pair).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Computes the link of `v`.
pub fn link(x: &CubeComplex, v: VertexId) -> Link {
    let ends: Vec<EdgeId> = x.ends_at(v).to_vec();
    let index_of: BTreeMap<EdgeId, usize> =
        ends.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut edges = Vec::new();
    let mut seen_corner = std::collections::HashSet::new();
    for &end in &ends {
        for &(s, ci) in x.square_corner_incidences(end) {
            if !seen_corner.insert((s, ci)) {
                continue;
            }
            let corner = x.square_corners(s)[ci as usize];
            debug_assert_eq!(corner.vertex, v);
            let a = index_of[&corner.ends[0]];
            let b = index_of[&corner.ends[1]];
            let pair = if a <= b { [a, b] } else { [b, a] };
            edges.push(LinkEdge {
                pair,
                square: s,
                corner: ci,
            });
        }
    }
    edges.sort_by_key(|e| (e.pair, e.square, e.corner));
    let mut triangles = Vec::new();
    let mut seen_cube_corner = std::collections::HashSet::new();
    for &end in &ends {
        for &(c, ci) in x.cube_corner_incidences(end) {
            if !seen_cube_corner.insert((c, ci)) {
                continue;
            }
            let cube = x.cube(c);
            debug_assert_eq!(cube.corners[ci as usize], v);
            let mut triple = cube.corner_ends(ci as usize).map(|e| index_of[&e]);
            triple.sort_unstable();
            triangles.push(LinkTriangle {
                triple,
                cube: c,
                corner: ci,
            });
        }
    }
    triangles.sort_by_key(|t| (t.triple, t.cube, t.corner));
    let n = ends.len();
    let mut adjacency = vec![vec![false; n]; n];
    for e in &edges {
        let [a, b] = e.pair;
        if a != b {
            adjacency[a][b] = true;
            adjacency[b][a] = true;
        }
    }
    Link {
        base: v,
        ends,
        edges,
        triangles,
        adjacency,
        index_of,
    }
}

// ---------------------------------------------------------------------------
// Non-positive curvature
// ---------------------------------------------------------------------------

/// Reports every failure of the link conditions: links must be simplicial
/// (no degenerate or repeated simplices) and flag (triangles in the link
/// 1-skeleton are filled by 3-cubes; larger cliques cannot be filled at all
/// in a dimension-3 model and are reported).
pub fn check_npc(x: &CubeComplex) -> Report {
    let mut report = Report::new();
    for v in x.vertices() {
        let lk = link(x, v);
        // Simplicial: no loops, no repeated edges.
        for e in &lk.edges {
            if e.pair[0] == e.pair[1] {
                report.push(
                    CellRef::Vertex(v.0),
                    format!(
                        "link edge from square {} corner {} is degenerate",
                        e.square.0, e.corner
                    ),
                );
            }
        }
        for w in lk.edges.windows(2) {
            if w[0].pair == w[1].pair && w[0].pair[0] != w[0].pair[1] {
                report.push(
                    CellRef::Vertex(v.0),
                    format!(
                        "link edge repeated between ends {} and {} (squares {} and {})",
                        lk.ends[w[0].pair[0]].0,
                        lk.ends[w[0].pair[1]].0,
                        w[0].square.0,
                        w[1].square.0
                    ),
                );
            }
        }
        for t in &lk.triangles {
            if t.triple[0] == t.triple[1] || t.triple[1] == t.triple[2] {
                report.push(
                    CellRef::Vertex(v.0),
                    format!("link triangle from cube {} is degenerate", t.cube.0),
                );
            }
        }
        for w in lk.triangles.windows(2) {
            if w[0].triple == w[1].triple {
                report.push(
                    CellRef::Vertex(v.0),
                    format!(
                        "link triangle repeated (cubes {} and {})",
                        w[0].cube.0, w[1].cube.0
                    ),
                );
            }
        }
        // Flag: every triangle of the 1-skeleton is a cube corner.
        let filled: std::collections::HashSet<[usize; 3]> =
            lk.triangles.iter().map(|t| t.triple).collect();
        let n = lk.vertex_count();
        for a in 0..n {
            for b in (a + 1)..n {
                if !lk.are_adjacent(a, b) {
                    continue;
                }
                for c in (b + 1)..n {
                    if lk.are_adjacent(a, c) && lk.are_adjacent(b, c) && !filled.contains(&[a, b, c])
                    {
                        report.push(
                            CellRef::Vertex(v.0),
                            format!(
                                "link triangle on ends {},{},{} is not filled by a 3-cube",
                                lk.ends[a].0, lk.ends[b].0, lk.ends[c].0
                            ),
                        );
                    }
                }
            }
        }
        // A 4-clique would need a 4-cube, which the model does not have.
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    for d in (c + 1)..n {
                        if lk.are_adjacent(a, b)
                            && lk.are_adjacent(a, c)
                            && lk.are_adjacent(a, d)
                            && lk.are_adjacent(b, c)
                            && lk.are_adjacent(b, d)
                            && lk.are_adjacent(c, d)
                        {
                            report.push(
                                CellRef::Vertex(v.0),
                                "link has a 4-clique; no 4-cube can fill it".to_string(),
                            );
                        }
                    }
                }
            }
        }
    }
    report.sort();
    report
}

// ---------------------------------------------------------------------------
// Identification of links with a Kneser complex
// ---------------------------------------------------------------------------

/// Per-vertex identifications of links with a fixed Kneser complex `L`:
/// every edge-end gets the `n`-subset of the `L`-vertex it is matched to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaAssignment {
    pub ground: LabelSet,
    pub n: usize,
    /// `end_labels[e]` is the label of directed edge `e` as an end at its
    /// terminal vertex.
    pub end_labels: Vec<Subset>,
}

impl DeltaAssignment {
    pub fn label_of_end(&self, e: EdgeId) -> Subset {
        self.end_labels[e.0 as usize]
    }

    /// `Λ_x` for the hyperplane dual to `e = (x, y)`: the label of the end
    /// at the initial vertex.
    pub fn label_at_init(&self, e: EdgeId) -> Subset {
        self.end_labels[e.rev().0 as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MismatchReason {
    VertexCount { got: usize, want: usize },
    DegreeSequence { got: Vec<usize>, want: Vec<usize> },
    NoIsomorphism,
}

impl fmt::Display for MismatchReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MismatchReason::VertexCount { got, want } => {
                write!(f, "link has {} vertices, L has {}", got, want)
            }
            MismatchReason::DegreeSequence { got, want } => {
                write!(f, "degree sequence {:?} differs from {:?}", got, want)
            }
            MismatchReason::NoIsomorphism => write!(f, "backtracking found no isomorphism"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AssignError {
    #[error("vertex {vertex}: link does not match L: {reason}")]
    LinkMismatch { vertex: u32, reason: MismatchReason },
}

/// Identifies every link with `L` deterministically: link vertices are taken
/// in ascending end order and matched to the lexicographically first
/// compatible `L`-vertex, backtracking on failure.
pub fn assign_links(x: &CubeComplex, l: &KneserComplex) -> Result<DeltaAssignment, AssignError> {
    let mut end_labels = vec![Subset::EMPTY; x.directed_edge_count()];
    for v in x.vertices() {
        let lk = link(x, v);
        let iso = link_isomorphism(&lk, l).map_err(|reason| AssignError::LinkMismatch {
            vertex: v.0,
            reason,
        })?;
        for (i, &end) in lk.ends.iter().enumerate() {
            end_labels[end.0 as usize] = l.vertex_set(iso[i]);
        }
    }
    Ok(DeltaAssignment {
        ground: l.ground().clone(),
        n: l.n(),
        end_labels,
    })
}

/// Lexicographically-first graph isomorphism from a link onto `L`.
fn link_isomorphism(lk: &Link, l: &KneserComplex) -> Result<Vec<usize>, MismatchReason> {
    let n = lk.vertex_count();
    if n != l.vertex_count() {
        return Err(MismatchReason::VertexCount {
            got: n,
            want: l.vertex_count(),
        });
    }
    let mut got: Vec<usize> = (0..n).map(|i| lk.degree(i)).collect();
    let mut want: Vec<usize> = (0..n).map(|i| l.degree(i)).collect();
    got.sort_unstable();
    want.sort_unstable();
    if got != want {
        return Err(MismatchReason::DegreeSequence { got, want });
    }

    let mut assigned: Vec<usize> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    if backtrack(lk, l, &mut assigned, &mut used) {
        Ok(assigned)
    } else {
        Err(MismatchReason::NoIsomorphism)
    }
}

fn backtrack(lk: &Link, l: &KneserComplex, assigned: &mut Vec<usize>, used: &mut [bool]) -> bool {
    let i = assigned.len();
    if i == lk.vertex_count() {
        return true;
    }
    for cand in 0..l.vertex_count() {
        if used[cand] || lk.degree(i) != l.degree(cand) {
            continue;
        }
        let ok = (0..i).all(|j| lk.are_adjacent(i, j) == l.are_adjacent(cand, assigned[j]));
        if !ok {
            continue;
        }
        used[cand] = true;
        assigned.push(cand);
        if backtrack(lk, l, assigned, used) {
            return true;
        }
        assigned.pop();
        used[cand] = false;
    }
    false
}

// ---------------------------------------------------------------------------
// Adjacency (transfer) maps
// ---------------------------------------------------------------------------

/// A cube of the complex, any dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CubeRef {
    Vertex(VertexId),
    /// An undirected 1-cube, by its even-id representative.
    Edge(EdgeId),
    Square(SquareId),
    Three(ThreeCubeId),
}

/// The isomorphism `cstar(σ_x) → cstar(σ_y)` induced by reflecting a cube
/// across the midcubes separating two of its corners.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarIsomorphism {
    pub cube: CubeRef,
    pub from: VertexId,
    pub to: VertexId,
    /// Ends of the cube at `from` / `to` (the simplices `σ_x`, `σ_y`).
    pub sigma_from: Vec<EdgeId>,
    pub sigma_to: Vec<EdgeId>,
    /// Total vertex map on the star, keyed by ends at `from`.
    pub map: BTreeMap<EdgeId, EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AdjacencyError {
    #[error("vertices {0} and {1} are not corners of the given cube")]
    NotCoCubical(u32, u32),
    #[error("a proper subcube already contains both vertices")]
    NotMinimal,
    #[error("cube reference out of range")]
    BadCube,
}

impl StarIsomorphism {
    pub fn apply(&self, end: EdgeId) -> Option<EdgeId> {
        self.map.get(&end).copied()
    }

    /// Checks `C(ad(σ)) = C(σ)` for every simplex `σ ⊇ σ_from` of the star:
    /// the cube spanned at `from` by `σ` equals the cube spanned at `to` by
    /// its image.
    pub fn preserves_cubes(&self, x: &CubeComplex) -> bool {
        let keys: Vec<EdgeId> = self.map.keys().copied().collect();
        // Enumerate subsets of the mapped star of sizes 1..=3 containing
        // σ_from and compare spanned cubes.
        let contains_sigma =
            |t: &[EdgeId]| self.sigma_from.iter().all(|s| t.contains(s));
        for (i, &a) in keys.iter().enumerate() {
            if contains_sigma(&[a]) && a.undirected() != self.map[&a].undirected() {
                return false;
            }
            for (j, &b) in keys.iter().enumerate().skip(i + 1) {
                if contains_sigma(&[a, b]) {
                    let got = squares_at_corner(x, self.map[&a], self.map[&b]);
                    if squares_at_corner(x, a, b) != got {
                        return false;
                    }
                }
                for &c in keys.iter().skip(j + 1) {
                    if contains_sigma(&[a, b, c])
                        && cubes_at_corner(x, [a, b, c])
                            != cubes_at_corner(x, [self.map[&a], self.map[&b], self.map[&c]])
                    {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Squares cornered at the common terminal vertex of two ends.
pub fn squares_at_corner(x: &CubeComplex, a: EdgeId, b: EdgeId) -> Vec<SquareId> {
    let mut out: Vec<SquareId> = x
        .square_corner_incidences(a)
        .iter()
        .filter(|(s, ci)| {
            let corner = x.square_corners(*s)[*ci as usize];
            corner.ends.contains(&b) && corner.ends.contains(&a)
        })
        .map(|&(s, _)| s)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// 3-cubes cornered at the common terminal vertex of three ends.
pub fn cubes_at_corner(x: &CubeComplex, ends: [EdgeId; 3]) -> Vec<ThreeCubeId> {
    let mut sorted = ends;
    sorted.sort_unstable();
    let mut out: Vec<ThreeCubeId> = x
        .cube_corner_incidences(ends[0])
        .iter()
        .filter(|(c, ci)| {
            let mut got = x.cube(*c).corner_ends(*ci as usize);
            got.sort_unstable();
            got == sorted
        })
        .map(|&(c, _)| c)
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// The adjacency map of a single directed edge `d = (x, y)`: sends the end
/// of `d` at `x` to the end at `y`, and reflects every square cornered on
/// `d` to match up the remaining ends.
pub fn edge_adjacency(x: &CubeComplex, d: EdgeId) -> StarIsomorphism {
    let from = x.init(d);
    let to = x.term(d);
    let v_end = d.rev(); // end at `from`
    let mut map = BTreeMap::new();
    map.insert(v_end, d);
    for &(s, ci) in x.square_corner_incidences(v_end) {
        let corner = x.square_corners(s)[ci as usize];
        let other = if corner.ends[0] == v_end {
            corner.ends[1]
        } else {
            corner.ends[0]
        };
        // Find the corner of the same square at `to` containing `d`.
        for c2 in x.square_corners(s) {
            if c2.vertex == to && c2.ends.contains(&d) {
                let other_img = if c2.ends[0] == d { c2.ends[1] } else { c2.ends[0] };
                map.insert(other, other_img);
                break;
            }
        }
    }
    StarIsomorphism {
        cube: CubeRef::Edge(d.forward()),
        from,
        to,
        sigma_from: vec![v_end],
        sigma_to: vec![d],
        map,
    }
}

/// The adjacency map `ad_C : cstar(σ_x) → cstar(σ_y)` for the minimal cube
/// `C` containing corners `from` and `to`.
pub fn adjacency_map(
    x: &CubeComplex,
    cube: CubeRef,
    from: VertexId,
    to: VertexId,
) -> Result<StarIsomorphism, AdjacencyError> {
    match cube {
        CubeRef::Vertex(v) => {
            if from != v || to != v {
                return Err(AdjacencyError::NotCoCubical(from.0, to.0));
            }
            let map: BTreeMap<EdgeId, EdgeId> =
                x.ends_at(v).iter().map(|&e| (e, e)).collect();
            Ok(StarIsomorphism {
                cube,
                from,
                to,
                sigma_from: Vec::new(),
                sigma_to: Vec::new(),
                map,
            })
        }
        CubeRef::Edge(e) => {
            if e.0 as usize >= x.directed_edge_count() {
                return Err(AdjacencyError::BadCube);
            }
            if from == to {
                // The vertex is a smaller common cube (loops included).
                if x.init(e) == from || x.term(e) == from {
                    return Err(AdjacencyError::NotMinimal);
                }
                return Err(AdjacencyError::NotCoCubical(from.0, to.0));
            }
            let d = if x.init(e) == from && x.term(e) == to {
                e
            } else if x.init(e.rev()) == from && x.term(e.rev()) == to {
                e.rev()
            } else {
                return Err(AdjacencyError::NotCoCubical(from.0, to.0));
            };
            Ok(edge_adjacency(x, d))
        }
        CubeRef::Square(s) => {
            if s.0 as usize >= x.square_count() {
                return Err(AdjacencyError::BadCube);
            }
            let corners = x.square_corners(s);
            let pos_from: Vec<usize> = (0..4).filter(|&i| corners[i].vertex == from).collect();
            let pos_to: Vec<usize> = (0..4).filter(|&i| corners[i].vertex == to).collect();
            if pos_from.is_empty() || pos_to.is_empty() {
                return Err(AdjacencyError::NotCoCubical(from.0, to.0));
            }
            // Minimality: any realization of {from, to} on a shared corner
            // or edge of the square means a proper subcube contains both.
            if from == to {
                return Err(AdjacencyError::NotMinimal);
            }
            if pos_from
                .iter()
                .any(|&a| pos_to.iter().any(|&b| (a + 2) % 4 != b))
            {
                return Err(AdjacencyError::NotMinimal);
            }
            // Root a presentation at `from` and compose the two boundary
            // edge reflections along x -> y -> z.
            let pres = x
                .square(s)
                .presentations()
                .into_iter()
                .find(|p| {
                    let c = x.square_corners_of_boundary(p);
                    c[0].vertex == from && c[2].vertex == to
                })
                .ok_or(AdjacencyError::NotCoCubical(from.0, to.0))?;
            let ad1 = edge_adjacency(x, pres.e1);
            let ad2 = edge_adjacency(x, pres.e2);
            let sigma_from = x.square_corners_of_boundary(&pres)[0].ends.to_vec();
            let sigma_to = x.square_corners_of_boundary(&pres)[2].ends.to_vec();
            let mut map = BTreeMap::new();
            for (&w, &mid) in &ad1.map {
                if let Some(&img) = ad2.map.get(&mid) {
                    map.insert(w, img);
                }
            }
            // Restrict to the star of σ_x: the corner pair plus any end
            // completing it to a 3-cube corner.
            let map: BTreeMap<EdgeId, EdgeId> = map
                .into_iter()
                .filter(|&(w, _)| {
                    sigma_from.contains(&w)
                        || !cubes_at_corner(x, [w, sigma_from[0], sigma_from[1]]).is_empty()
                })
                .collect();
            Ok(StarIsomorphism {
                cube,
                from,
                to,
                sigma_from,
                sigma_to,
                map,
            })
        }
        CubeRef::Three(c) => {
            if c.0 as usize >= x.cube_count() {
                return Err(AdjacencyError::BadCube);
            }
            let cube3 = x.cube(c);
            let pairs: Vec<(usize, usize)> = (0..8)
                .flat_map(|a| (0..8).map(move |b| (a, b)))
                .filter(|&(a, b)| cube3.corners[a] == from && cube3.corners[b] == to)
                .collect();
            if pairs.is_empty() {
                return Err(AdjacencyError::NotCoCubical(from.0, to.0));
            }
            // A realization on a shared face means a smaller common cube.
            if from == to || pairs.iter().any(|&(a, b)| (a ^ b).count_ones() < 3) {
                return Err(AdjacencyError::NotMinimal);
            }
            let (ca, cb) = pairs[0];
            // Walk axes in ascending order, composing edge reflections.
            let mut cur = ca;
            let mut map: BTreeMap<EdgeId, EdgeId> = {
                let lk_v: Vec<EdgeId> = x.ends_at(from).to_vec();
                lk_v.into_iter().map(|e| (e, e)).collect()
            };
            for axis in 0..3 {
                if (ca >> axis) & 1 == (cb >> axis) & 1 {
                    continue;
                }
                let others: [usize; 2] = match axis {
                    0 => [1, 2],
                    1 => [0, 2],
                    _ => [0, 1],
                };
                let pos = ((cur >> others[0]) & 1) | (((cur >> others[1]) & 1) << 1);
                let e = cube3.edges[cube_edge_slot(axis, pos)];
                let d = if (cur >> axis) & 1 == 0 { e } else { e.rev() };
                let step = edge_adjacency(x, d);
                let mut next = BTreeMap::new();
                for (k, v) in &map {
                    if let Some(&img) = step.map.get(v) {
                        next.insert(*k, img);
                    }
                }
                map = next;
                cur ^= 1 << axis;
            }
            let sigma_from = cube3.corner_ends(ca).to_vec();
            let sigma_to = cube3.corner_ends(cb).to_vec();
            let map = map
                .into_iter()
                .filter(|(k, _)| sigma_from.contains(k))
                .collect();
            Ok(StarIsomorphism {
                cube,
                from,
                to,
                sigma_from,
                sigma_to,
                map,
            })
        }
    }
}

impl CubeComplex {
    /// Corners of an arbitrary boundary presentation (same layout as
    /// [`CubeComplex::square_corners`]).
    fn square_corners_of_boundary(&self, b: &SquareBoundary) -> [SquareCorner; 4] {
        [
            SquareCorner {
                vertex: self.init(b.e1),
                ends: [b.e1.rev(), b.e2p.rev()],
            },
            SquareCorner {
                vertex: self.term(b.e1),
                ends: [b.e1, b.e2.rev()],
            },
            SquareCorner {
                vertex: self.term(b.e2),
                ends: [b.e2, b.e1p],
            },
            SquareCorner {
                vertex: self.term(b.e2p),
                ends: [b.e2p, b.e1p.rev()],
            },
        ]
    }
}

// ---------------------------------------------------------------------------
// Pre-Δ-category support: the induced complement-star bijection of an edge
// ---------------------------------------------------------------------------

/// Computes the partial bijection `Δ − Λ_x → Δ − Λ_y` induced by the
/// adjacency map of `e = (x, y)` on complement stars, via ground-bijection
/// recovery on the complement Kneser complexes.
pub fn complement_transport(
    x: &CubeComplex,
    assignment: &DeltaAssignment,
    e: EdgeId,
) -> Result<crate::label::PartialBij, KneserError> {
    let ground_size = assignment.ground.len();
    let lam_x = assignment.label_at_init(e);
    let lam_y = assignment.label_of_end(e);
    let dom = Subset::full(ground_size).minus(lam_x);
    let img = Subset::full(ground_size).minus(lam_y);

    // Degenerate ground: one label on each side forces the map.
    if dom.len() <= 1 {
        if img.len() != dom.len() {
            return Err(KneserError::NotInduced {
                reason: "complement sizes differ".into(),
            });
        }
        let pairs: Vec<(usize, usize)> = dom.iter().zip(img.iter()).collect();
        return Ok(crate::label::PartialBij::from_pairs(ground_size, &pairs)
            .expect("singleton map"));
    }

    let full = crate::kneser::build_kneser(&assignment.ground, assignment.n)
        .expect("assignment parameters are valid");
    let sub_x = sub_kneser(&full, dom);
    let sub_y = sub_kneser(&full, img);

    let ad = edge_adjacency(x, e);
    // Vertex map: local vertex i of K_n(Δ−Λ_x) is an n-subset of `dom`;
    // find the end at `x` labeled by it, push through ad, read the label.
    let dom_indices: Vec<usize> = dom.iter().collect();
    let img_indices: Vec<usize> = img.iter().collect();
    let mut iso = Vec::with_capacity(sub_x.complex.vertex_count());
    for i in 0..sub_x.complex.vertex_count() {
        let local = sub_x.complex.vertex_set(i);
        let global = Subset::from_indices(local.iter().map(|j| dom_indices[j]));
        let end = x
            .ends_at(x.init(e))
            .iter()
            .copied()
            .find(|&w| assignment.label_of_end(w) == global)
            .ok_or_else(|| KneserError::NotInduced {
                reason: format!("no end at vertex {} labeled by the complement subset", x.init(e)),
            })?;
        let image_end = ad.apply(end).ok_or_else(|| KneserError::NotInduced {
            reason: format!("complement end {} not in the adjacency map domain", end.0),
        })?;
        let image_global = assignment.label_of_end(image_end);
        let image_local = Subset::from_indices(image_global.iter().map(|g| {
            img_indices
                .iter()
                .position(|&k| k == g)
                .expect("image label stays in the complement")
        }));
        let j = sub_y
            .complex
            .vertex_index(image_local)
            .ok_or_else(|| KneserError::NotInduced {
                reason: "image label is not an n-subset of the complement".into(),
            })?;
        iso.push(j);
    }
    let bij = recover_bijection(&sub_x.complex, &sub_y.complex, &iso)?;
    let pairs: Vec<(usize, usize)> = (0..bij.forward.len())
        .map(|i| (dom_indices[i], img_indices[bij.forward[i]]))
        .collect();
    Ok(crate::label::PartialBij::from_pairs(ground_size, &pairs).expect("recovered bijection"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::kneser::build_kneser;

    #[test]
    fn theta_graph_validates() {
        let x = instances::theta_graph();
        assert_eq!(x.vertex_count(), 2);
        assert_eq!(x.directed_edge_count(), 6);
        assert_eq!(x.ends_at(VertexId(0)), &[EdgeId(1), EdgeId(3), EdgeId(5)]);
        assert!(check_npc(&x).is_empty());
    }

    #[test]
    fn corrupted_square_rejected() {
        // A square whose boundary does not close.
        let raw = RawComplex {
            zero_cubes: 4,
            one_cubes: vec![
                (0, 1, 1),
                (1, 0, 0),
                (2, 3, 3),
                (3, 2, 2),
                (0, 2, 5),
                (2, 0, 4),
                (1, 3, 7),
                (3, 1, 6),
            ],
            squares: vec![[0, 2, 4, 6]],
            three_cubes: vec![],
        };
        let err = validate_complex(&raw).unwrap_err();
        assert!(matches!(err, ValidationError::OpenSquareBoundary { square: 0, .. }));
    }

    #[test]
    fn broken_reversal_rejected() {
        let raw = RawComplex {
            zero_cubes: 2,
            one_cubes: vec![(0, 1, 0)],
            squares: vec![],
            three_cubes: vec![],
        };
        assert!(matches!(
            validate_complex(&raw).unwrap_err(),
            ValidationError::NonInvolutiveReversal { edge: 0, .. }
        ));
    }

    #[test]
    fn dangling_vertex_rejected() {
        let raw = RawComplex {
            zero_cubes: 1,
            one_cubes: vec![(0, 3, 1), (3, 0, 0)],
            squares: vec![],
            three_cubes: vec![],
        };
        assert!(matches!(
            validate_complex(&raw).unwrap_err(),
            ValidationError::DanglingReference { .. }
        ));
    }

    #[test]
    fn theta_links_are_discrete() {
        let x = instances::theta_graph();
        for v in x.vertices() {
            let lk = link(&x, v);
            assert_eq!(lk.vertex_count(), 3);
            assert!(lk.edges.is_empty());
        }
    }

    #[test]
    fn single_square_link() {
        let x = instances::square_strip(1);
        // A corner of the lone square: one link edge.
        let lk = link(&x, VertexId(0));
        assert_eq!(lk.vertex_count(), 2);
        assert_eq!(lk.distinct_edges().len(), 1);
    }

    #[test]
    fn doubled_square_breaks_npc() {
        let x = instances::doubled_square();
        let report = check_npc(&x);
        assert!(!report.is_empty());
        let text = report.to_string();
        assert!(text.contains("repeated"), "{}", text);
    }

    #[test]
    fn assign_three_regular_graph() {
        let x = instances::theta_graph();
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        let asg = assign_links(&x, &l).unwrap();
        // Ends in canonical order get the three 2-subsets in canonical order.
        for v in x.vertices() {
            let labels: Vec<Subset> = x
                .ends_at(v)
                .iter()
                .map(|&e| asg.label_of_end(e))
                .collect();
            assert_eq!(
                labels,
                vec![
                    Subset::from_indices([0, 1]),
                    Subset::from_indices([0, 2]),
                    Subset::from_indices([1, 2]),
                ]
            );
        }
    }

    #[test]
    fn assign_detects_wrong_valence() {
        // 4-regular graph on two vertices: four parallel edges.
        let x = complex_from_cells(2, &[(0, 1), (0, 1), (0, 1), (0, 1)], &[], &[]).unwrap();
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        let err = assign_links(&x, &l).unwrap_err();
        assert!(matches!(
            err,
            AssignError::LinkMismatch {
                reason: MismatchReason::VertexCount { got: 4, want: 3 },
                ..
            }
        ));
    }

    #[test]
    fn assignment_is_deterministic() {
        let x = instances::petersen_complex();
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        let a = assign_links(&x, &l).unwrap();
        let b = assign_links(&x, &l).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn edge_adjacency_on_square() {
        let x = instances::square_strip(1);
        // Square 0 has boundary (e1, e2, e1p, e2p); check the reflection.
        let b = *x.square(SquareId(0));
        let ad = edge_adjacency(&x, b.e1);
        assert_eq!(ad.apply(b.e1.rev()), Some(b.e1));
        assert_eq!(ad.apply(b.e2p.rev()), Some(b.e2.rev()));
        assert!(ad.preserves_cubes(&x));
    }

    #[test]
    fn adjacency_identity_at_vertex() {
        let x = instances::theta_graph();
        let ad = adjacency_map(&x, CubeRef::Vertex(VertexId(0)), VertexId(0), VertexId(0)).unwrap();
        assert_eq!(ad.map.len(), 3);
        assert!(ad.map.iter().all(|(k, v)| k == v));
    }

    #[test]
    fn adjacency_square_requires_opposite_corners() {
        let x = instances::square_strip(1);
        let corners = x.square_corners(SquareId(0));
        let err = adjacency_map(
            &x,
            CubeRef::Square(SquareId(0)),
            corners[0].vertex,
            corners[1].vertex,
        )
        .unwrap_err();
        assert_eq!(err, AdjacencyError::NotMinimal);

        let ad = adjacency_map(
            &x,
            CubeRef::Square(SquareId(0)),
            corners[0].vertex,
            corners[2].vertex,
        )
        .unwrap();
        assert_eq!(ad.sigma_from, corners[0].ends.to_vec());
    }

    #[test]
    fn adjacency_not_cocubical() {
        let x = instances::square_strip(2);
        // Vertices 0 and 5 are not corners of square 0.
        let err = adjacency_map(&x, CubeRef::Square(SquareId(0)), VertexId(0), VertexId(5));
        assert!(matches!(err, Err(AdjacencyError::NotCoCubical(_, _))));
    }

    #[test]
    fn raw_round_trip() {
        let x = instances::petersen_complex();
        let raw = x.to_raw();
        let back = validate_complex(&raw).unwrap();
        assert_eq!(x, back);
    }
}
