//! Finite covers: cellwise cover maps with verification, voltage (gain)
//! covers, Davis-quotient instance generation, composition, and the bounded
//! search for covers trivializing parallel holonomies.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::complex::{
    complex_from_cells, cube_corner_at, cube_edge_slot, link, CubeComplex, DeltaAssignment,
    EdgeId, RawThreeCube, SquareBoundary, SquareId, ThreeCube, ThreeCubeId, VertexId,
};
use crate::kneser::KneserComplex;
use crate::label::Perm;
use crate::report::{CellRef, Report};

/// A cellwise map of cube complexes claimed to be a covering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverMap {
    pub total: CubeComplex,
    pub base: CubeComplex,
    /// Total vertex -> base vertex.
    pub zero_map: Vec<u32>,
    /// Total directed edge -> base directed edge.
    pub one_map: Vec<u32>,
    pub square_map: Vec<u32>,
    pub cube_map: Vec<u32>,
    pub degree: usize,
    verified: bool,
}

impl CoverMap {
    pub fn new(
        total: CubeComplex,
        base: CubeComplex,
        zero_map: Vec<u32>,
        one_map: Vec<u32>,
        square_map: Vec<u32>,
        cube_map: Vec<u32>,
        degree: usize,
    ) -> Self {
        CoverMap {
            total,
            base,
            zero_map,
            one_map,
            square_map,
            cube_map,
            degree,
            verified: false,
        }
    }

    pub fn identity(x: &CubeComplex) -> Self {
        let mut f = CoverMap {
            total: x.clone(),
            base: x.clone(),
            zero_map: (0..x.vertex_count() as u32).collect(),
            one_map: (0..x.directed_edge_count() as u32).collect(),
            square_map: (0..x.square_count() as u32).collect(),
            cube_map: (0..x.cube_count() as u32).collect(),
            degree: 1,
            verified: false,
        };
        let report = f.verify();
        debug_assert!(report.is_empty());
        f
    }

    pub fn is_verified(&self) -> bool {
        self.verified
    }

    pub fn map_vertex(&self, v: VertexId) -> VertexId {
        VertexId(self.zero_map[v.0 as usize])
    }

    pub fn map_edge(&self, e: EdgeId) -> EdgeId {
        EdgeId(self.one_map[e.0 as usize])
    }

    pub fn map_square(&self, s: SquareId) -> SquareId {
        SquareId(self.square_map[s.0 as usize])
    }

    pub fn map_cube(&self, c: ThreeCubeId) -> ThreeCubeId {
        ThreeCubeId(self.cube_map[c.0 as usize])
    }

    /// Runs [`verify_cover`] and records the outcome.
    pub fn verify(&mut self) -> Report {
        let report = verify_cover(self);
        self.verified = report.is_empty();
        report
    }
}

/// Checks every covering-map invariant: maps commute with the cell structure
/// (reversal, endpoints, boundaries, faces), the induced map on each link is
/// an isomorphism, and fibers have constant cardinality over each connected
/// component of the base.
pub fn verify_cover(f: &CoverMap) -> Report {
    let mut report = Report::new();
    let t = &f.total;
    let b = &f.base;

    if f.zero_map.len() != t.vertex_count()
        || f.one_map.len() != t.directed_edge_count()
        || f.square_map.len() != t.square_count()
        || f.cube_map.len() != t.cube_count()
    {
        report.push(CellRef::Global, "cell map tables have wrong lengths");
        return report;
    }
    if f.zero_map.iter().any(|&v| v as usize >= b.vertex_count())
        || f.one_map.iter().any(|&e| e as usize >= b.directed_edge_count())
        || f.square_map.iter().any(|&s| s as usize >= b.square_count())
        || f.cube_map.iter().any(|&c| c as usize >= b.cube_count())
    {
        report.push(CellRef::Global, "cell map image out of range");
        return report;
    }

    // Edges: endpoints and reversal commute.
    for e in t.directed_edges() {
        let img = f.map_edge(e);
        if f.map_edge(e.rev()) != img.rev() {
            report.push(
                CellRef::Edge(e.0),
                "edge map does not commute with reversal",
            );
        }
        if f.map_vertex(t.init(e)) != b.init(img) || f.map_vertex(t.term(e)) != b.term(img) {
            report.push(
                CellRef::Edge(e.0),
                "edge map does not commute with endpoints",
            );
        }
    }

    // Squares: the mapped boundary is a presentation of the image square.
    for s in t.square_ids() {
        let img = f.map_square(s);
        let tb = t.square(s);
        let mapped = SquareBoundary {
            e1: f.map_edge(tb.e1),
            e2: f.map_edge(tb.e2),
            e1p: f.map_edge(tb.e1p),
            e2p: f.map_edge(tb.e2p),
        };
        if !b.square(img).presentations().contains(&mapped) {
            report.push(
                CellRef::Square(s.0),
                "square boundary does not map onto the image square",
            );
        }
    }

    // 3-cubes: the mapped cube is a reparameterization of the image cube.
    for c in t.cube_ids() {
        let img = f.map_cube(c);
        let tc = t.cube(c);
        let mapped = ThreeCube {
            corners: tc.corners.map(|v| f.map_vertex(v)),
            edges: tc.edges.map(|e| f.map_edge(e)),
            faces: tc.faces.map(|s| f.map_square(s)),
        };
        if !b.cube(img).presentations().contains(&mapped) {
            report.push(
                CellRef::ThreeCube(c.0),
                "3-cube does not map onto the image cube",
            );
        }
    }

    // Links: local isomorphism at every vertex.
    let link_violations: Vec<(u32, String)> = (0..t.vertex_count())
        .into_par_iter()
        .flat_map_iter(|vi| {
            let v = VertexId(vi as u32);
            let mut local = Vec::new();
            let base_v = f.map_vertex(v);
            let ends = t.ends_at(v);
            let mut images: Vec<EdgeId> = ends.iter().map(|&e| f.map_edge(e)).collect();
            images.sort_unstable();
            let mut base_ends = b.ends_at(base_v).to_vec();
            base_ends.sort_unstable();
            if images != base_ends {
                local.push((
                    vi as u32,
                    "ends do not map bijectively onto the base link".to_string(),
                ));
                return local.into_iter();
            }
            let lk_t = link(t, v);
            let lk_b = link(b, base_v);
            let mut mapped_edges: Vec<[EdgeId; 2]> = lk_t
                .distinct_edges()
                .iter()
                .map(|&[i, j]| {
                    let mut p = [f.map_edge(lk_t.ends[i]), f.map_edge(lk_t.ends[j])];
                    p.sort_unstable();
                    p
                })
                .collect();
            mapped_edges.sort_unstable();
            let mut base_edges: Vec<[EdgeId; 2]> = lk_b
                .distinct_edges()
                .iter()
                .map(|&[i, j]| {
                    let mut p = [lk_b.ends[i], lk_b.ends[j]];
                    p.sort_unstable();
                    p
                })
                .collect();
            base_edges.sort_unstable();
            if mapped_edges != base_edges {
                local.push((
                    vi as u32,
                    "link edges do not map bijectively onto the base link".to_string(),
                ));
            }
            local.into_iter()
        })
        .collect();
    for (v, rule) in link_violations {
        report.push(CellRef::Vertex(v), rule);
    }

    // Fibers: constant cardinality per connected component of the base.
    let mut fiber = vec![0usize; b.vertex_count()];
    for &v in &f.zero_map {
        fiber[v as usize] += 1;
    }
    let forest = b.bfs_forest(VertexId(0));
    let mut component = vec![usize::MAX; b.vertex_count()];
    for (ci, &root) in forest.roots.iter().enumerate() {
        // Mark components by a BFS from each root.
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            if component[v.0 as usize] != usize::MAX {
                continue;
            }
            component[v.0 as usize] = ci;
            for &end in b.ends_at(v) {
                stack.push(b.init(end));
            }
        }
    }
    let mut per_component: HashMap<usize, usize> = HashMap::new();
    for v in 0..b.vertex_count() {
        let entry = per_component.entry(component[v]).or_insert(fiber[v]);
        if *entry != fiber[v] {
            report.push(
                CellRef::Vertex(v as u32),
                format!("fiber cardinality {} differs within a component", fiber[v]),
            );
        }
    }
    if b.is_connected() && b.vertex_count() > 0 && fiber[0] != f.degree {
        report.push(
            CellRef::Global,
            format!("declared degree {} differs from fiber size {}", f.degree, fiber[0]),
        );
    }

    report.sort();
    report
}

/// Composes two covers `f: Y → X` and `g: Z → Y` into `f ∘ g : Z → X`.
pub fn compose_covers(f: &CoverMap, g: &CoverMap) -> Result<CoverMap, CoverError> {
    if g.base != f.total {
        return Err(CoverError::ChainMismatch);
    }
    let mut out = CoverMap::new(
        g.total.clone(),
        f.base.clone(),
        g.zero_map
            .iter()
            .map(|&v| f.zero_map[v as usize])
            .collect(),
        g.one_map.iter().map(|&e| f.one_map[e as usize]).collect(),
        g.square_map
            .iter()
            .map(|&s| f.square_map[s as usize])
            .collect(),
        g.cube_map.iter().map(|&c| f.cube_map[c as usize]).collect(),
        f.degree * g.degree,
    );
    out.verify();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoverError {
    #[error("square {0} has a nontrivial boundary gain product and cannot lift")]
    NonLiftableSquare(u32),
    #[error("voltage assignment malformed: {0}")]
    BadVoltage(String),
    #[error("generator image {index} is not a fixed-point-free involution witness: {detail}")]
    BadInvolutions { index: usize, detail: String },
    #[error("generators {u} and {v} are adjacent in L but their images do not commute")]
    NonCommutingAdjacents { u: usize, v: usize },
    #[error("quotient is not an L-complex: {0}")]
    LinkMismatch(String),
    #[error("cover chain endpoints do not match")]
    ChainMismatch,
}

// ---------------------------------------------------------------------------
// Voltage covers
// ---------------------------------------------------------------------------

/// A gain assignment: one permutation of `{0..degree}` per undirected edge;
/// the reversed direction takes the inverse gain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VoltageAssignment {
    pub degree: usize,
    /// Indexed by undirected edge; gain of the even (forward) direction.
    pub gains: Vec<Perm>,
}

impl VoltageAssignment {
    pub fn trivial(x: &CubeComplex, degree: usize) -> Self {
        VoltageAssignment {
            degree,
            gains: vec![Perm::identity(degree); x.undirected_edge_count()],
        }
    }

    pub fn gain(&self, e: EdgeId) -> Perm {
        let g = &self.gains[e.undirected()];
        if e.0 % 2 == 0 {
            g.clone()
        } else {
            g.inverse()
        }
    }
}

/// Builds the degree-`k` cover twisted by the gains. Total 0-cubes are
/// `(v, sheet)` pairs laid out as `v * k + sheet`.
pub fn voltage_cover(x: &CubeComplex, va: &VoltageAssignment) -> Result<CoverMap, CoverError> {
    let k = va.degree;
    if k == 0 {
        return Err(CoverError::BadVoltage("degree must be positive".into()));
    }
    if va.gains.len() != x.undirected_edge_count() {
        return Err(CoverError::BadVoltage(format!(
            "{} gains for {} undirected edges",
            va.gains.len(),
            x.undirected_edge_count()
        )));
    }
    if va.gains.iter().any(|g| g.len() != k) {
        return Err(CoverError::BadVoltage("gain degree mismatch".into()));
    }
    // Liftability: both ways around each square develop the same sheet.
    for s in x.square_ids() {
        let b = x.square(s);
        let path_a = va.gain(b.e2).after(&va.gain(b.e1));
        let path_b = va.gain(b.e1p).after(&va.gain(b.e2p));
        if path_a != path_b {
            return Err(CoverError::NonLiftableSquare(s.0));
        }
    }

    let lift_vertex = |v: VertexId, sheet: usize| -> u32 { v.0 * k as u32 + sheet as u32 };
    // Lift of a directed edge starting at the given sheet of its initial
    // vertex. Undirected lifts are indexed by the sheet of the forward
    // direction's initial vertex.
    let lift_edge = |e: EdgeId, sheet: usize| -> u32 {
        let m = e.undirected() as u32;
        if e.0 % 2 == 0 {
            2 * (m * k as u32 + sheet as u32)
        } else {
            let back = va.gains[e.undirected()].inverse().apply(sheet);
            2 * (m * k as u32 + back as u32) + 1
        }
    };

    let mut und_edges = Vec::with_capacity(x.undirected_edge_count() * k);
    for e in x.undirected_edges() {
        let g = &va.gains[e.undirected()];
        for sheet in 0..k {
            und_edges.push((
                lift_vertex(x.init(e), sheet),
                lift_vertex(x.term(e), g.apply(sheet)),
            ));
        }
    }

    let mut squares = Vec::with_capacity(x.square_count() * k);
    for s in x.square_ids() {
        let b = x.square(s);
        for sheet in 0..k {
            let s1 = sheet;
            let s2 = va.gain(b.e1).apply(sheet);
            let s2p = sheet;
            let s1p = va.gain(b.e2p).apply(sheet);
            squares.push([
                lift_edge(b.e1, s1),
                lift_edge(b.e2, s2),
                lift_edge(b.e1p, s1p),
                lift_edge(b.e2p, s2p),
            ]);
        }
    }

    let mut cubes = Vec::with_capacity(x.cube_count() * k);
    for c in x.cube_ids() {
        let cube = x.cube(c);
        for sheet in 0..k {
            // Develop sheets over the bit-cube from corner 0.
            let mut sheets = [usize::MAX; 8];
            sheets[0] = sheet;
            for b in 1u32..8 {
                let axis = b.trailing_zeros() as usize;
                let prev = (b ^ (1 << axis)) as usize;
                let others: [usize; 2] = match axis {
                    0 => [1, 2],
                    1 => [0, 2],
                    _ => [0, 1],
                };
                let pos = ((prev >> others[0]) & 1) | (((prev >> others[1]) & 1) << 1);
                let e = cube.edges[cube_edge_slot(axis, pos)];
                sheets[b as usize] = va.gain(e).apply(sheets[prev]);
            }
            let corners: [u32; 8] = std::array::from_fn(|b| {
                lift_vertex(cube.corners[b], sheets[b])
            });
            let edges: [u32; 12] = std::array::from_fn(|slot| {
                let axis = slot / 4;
                let pos = slot % 4;
                let lo = cube_corner_at(axis, 0, pos);
                lift_edge(cube.edges[slot], sheets[lo])
            });
            let faces: [u32; 6] = std::array::from_fn(|fi| {
                let face = cube.faces[fi];
                let fb = x.square(face);
                // The lifted copy of the face is the one whose sheet at the
                // face boundary's root matches the developed corner sheet.
                let root = x.init(fb.e1);
                let corner_b = (0..8)
                    .find(|&b2| {
                        let fe = cube.corner_ends(b2);
                        cube.corners[b2] == root
                            && x.square_corners(face)[0]
                                .ends
                                .iter()
                                .all(|w| fe.contains(w))
                    })
                    .expect("face root corner is a cube corner");
                (face.0 * k as u32 + sheets[corner_b] as u32) as u32
            });
            cubes.push(RawThreeCube {
                corners,
                edges,
                faces,
            });
        }
    }

    let total = complex_from_cells(
        (x.vertex_count() * k) as u32,
        &und_edges,
        &squares,
        &cubes,
    )
    .map_err(|e| CoverError::BadVoltage(format!("lifted cells failed validation: {}", e)))?;

    let zero_map = (0..total.vertex_count() as u32)
        .map(|v| v / k as u32)
        .collect();
    let one_map = (0..total.directed_edge_count() as u32)
        .map(|e| {
            let und = e / 2;
            let dir = e % 2;
            2 * (und / k as u32) + dir
        })
        .collect();
    let square_map = (0..total.square_count() as u32)
        .map(|s| s / k as u32)
        .collect();
    let cube_map = (0..total.cube_count() as u32)
        .map(|c| c / k as u32)
        .collect();

    let mut f = CoverMap::new(
        total,
        x.clone(),
        zero_map,
        one_map,
        square_map,
        cube_map,
        k,
    );
    let report = f.verify();
    if !report.is_empty() {
        return Err(CoverError::BadVoltage(format!(
            "constructed cover failed verification:\n{}",
            report
        )));
    }
    Ok(f)
}

// ---------------------------------------------------------------------------
// Davis quotients
// ---------------------------------------------------------------------------

/// A finite development of the right-angled Coxeter presentation read off a
/// Kneser complex `L`: vertices are elements of the group generated by the
/// images, edges develop the generators, squares the commuting adjacent
/// pairs, and 3-cubes the triangles of `L`.
#[derive(Clone, Debug)]
pub struct DavisQuotient {
    pub complex: CubeComplex,
    /// Generator (L-vertex) index per undirected edge.
    pub edge_generator: Vec<usize>,
    pub group_order: usize,
    /// The deterministic link identification with `L`.
    pub assignment: DeltaAssignment,
}

/// Develops the quotient and certifies it is an `L`-complex by re-checking
/// every link (rather than by group-theoretic freeness arguments).
pub fn davis_quotient(l: &KneserComplex, images: &[Perm]) -> Result<DavisQuotient, CoverError> {
    let nv = l.vertex_count();
    if images.len() != nv {
        return Err(CoverError::BadVoltage(format!(
            "{} generator images for {} vertices of L",
            images.len(),
            nv
        )));
    }
    for (i, g) in images.iter().enumerate() {
        if g.is_identity() {
            return Err(CoverError::BadInvolutions {
                index: i,
                detail: "image is the identity".into(),
            });
        }
        if !g.after(g).is_identity() {
            return Err(CoverError::BadInvolutions {
                index: i,
                detail: "image does not square to the identity".into(),
            });
        }
    }
    for (u, v) in l.edges() {
        if images[u].after(&images[v]) != images[v].after(&images[u]) {
            return Err(CoverError::NonCommutingAdjacents { u, v });
        }
    }

    // Close the group generated by the images, breadth-first from the
    // identity, multiplying by generators in order.
    let point_count = images[0].len();
    if images.iter().any(|g| g.len() != point_count) {
        return Err(CoverError::BadVoltage(
            "generator images act on different point sets".into(),
        ));
    }
    let mut elements = vec![Perm::identity(point_count)];
    let mut index: HashMap<Perm, usize> = HashMap::new();
    index.insert(elements[0].clone(), 0);
    let mut head = 0;
    while head < elements.len() {
        let g = elements[head].clone();
        for q in images {
            let h = g.after(q);
            if !index.contains_key(&h) {
                index.insert(h.clone(), elements.len());
                elements.push(h);
            }
        }
        head += 1;
    }
    let order = elements.len();
    let nbr: Vec<Vec<usize>> = elements
        .iter()
        .map(|g| images.iter().map(|q| index[&g.after(q)]).collect())
        .collect();

    // Edges: one per (element, generator), deduplicated by the smaller
    // endpoint; parallel edges from colliding images stay distinct cells.
    let mut und_edges = Vec::new();
    let mut edge_generator = Vec::new();
    let mut directed_from: HashMap<(usize, usize), u32> = HashMap::new();
    for g in 0..order {
        for v in 0..nv {
            let h = nbr[g][v];
            if g <= h {
                debug_assert_ne!(g, h, "involution images cannot fix an element");
                let und = und_edges.len() as u32;
                und_edges.push((g as u32, h as u32));
                edge_generator.push(v);
                directed_from.insert((g, v), 2 * und);
                directed_from.insert((h, v), 2 * und + 1);
            }
        }
    }

    // Squares: one per coset of a commuting adjacent pair, rooted at the
    // minimal coset element.
    let mut squares = Vec::new();
    let mut square_of: HashMap<(usize, usize, usize), u32> = HashMap::new();
    for g in 0..order {
        for (u, v) in l.edges() {
            let gu = nbr[g][u];
            let gv = nbr[g][v];
            let guv = nbr[gu][v];
            let root = g.min(gu).min(gv).min(guv);
            if g != root {
                continue;
            }
            let id = squares.len() as u32;
            squares.push([
                directed_from[&(g, u)],
                directed_from[&(gu, v)],
                directed_from[&(gv, u)],
                directed_from[&(g, v)],
            ]);
            square_of.insert((root, u, v), id);
        }
    }

    // 3-cubes: one per coset of a triangle of L.
    let mut cubes = Vec::new();
    for g in 0..order {
        for tri in l.simplices_of_dim(2) {
            let (u, v, w) = (tri[0] as usize, tri[1] as usize, tri[2] as usize);
            let mut coset = [0usize; 8];
            for b in 0..8usize {
                let mut h = g;
                if b & 1 != 0 {
                    h = nbr[h][u];
                }
                if b & 2 != 0 {
                    h = nbr[h][v];
                }
                if b & 4 != 0 {
                    h = nbr[h][w];
                }
                coset[b] = h;
            }
            if *coset.iter().min().unwrap() != g {
                continue;
            }
            let axes = [u, v, w];
            let corners: [u32; 8] = std::array::from_fn(|b| coset[b] as u32);
            let edges: [u32; 12] = std::array::from_fn(|slot| {
                let axis = slot / 4;
                let pos = slot % 4;
                let lo = cube_corner_at(axis, 0, pos);
                directed_from[&(coset[lo], axes[axis])]
            });
            let faces: [u32; 6] = std::array::from_fn(|fi| {
                let axis = fi / 2;
                let side = fi % 2;
                let (a, b2) = match axis {
                    0 => (v, w),
                    1 => (u, w),
                    _ => (u, v),
                };
                let c00 = coset[cube_corner_at(axis, side, 0)];
                let ca = nbr[c00][a];
                let cb = nbr[c00][b2];
                let cab = nbr[ca][b2];
                let root = c00.min(ca).min(cb).min(cab);
                let (lo_gen, hi_gen) = if a < b2 { (a, b2) } else { (b2, a) };
                square_of[&(root, lo_gen, hi_gen)]
            });
            cubes.push(RawThreeCube {
                corners,
                edges,
                faces,
            });
        }
    }

    let complex = complex_from_cells(order as u32, &und_edges, &squares, &cubes)
        .map_err(|e| CoverError::LinkMismatch(format!("development failed validation: {}", e)))?;

    let npc = crate::complex::check_npc(&complex);
    if !npc.is_empty() {
        return Err(CoverError::LinkMismatch(format!(
            "development is not non-positively curved:\n{}",
            npc
        )));
    }
    let assignment = crate::complex::assign_links(&complex, l)
        .map_err(|e| CoverError::LinkMismatch(e.to_string()))?;

    Ok(DavisQuotient {
        complex,
        edge_generator,
        group_order: order,
        assignment,
    })
}

/// The mod-2 voltage flipping across the given undirected edges: the degree-2
/// gain assignment whose nontrivial gains sit exactly on those edges.
pub fn two_sided_voltage(x: &CubeComplex, flipped_undirected: &[EdgeId]) -> VoltageAssignment {
    let flip = Perm::from_images(&[1, 0]).unwrap();
    let mut va = VoltageAssignment::trivial(x, 2);
    for e in flipped_undirected {
        va.gains[e.undirected()] = flip.clone();
    }
    va
}

/// Standard generator images for the quotient `W_L → (Z/2)^{V(L)}`: the
/// `v`-th generator acts as a disjoint transposition on its own two points.
pub fn standard_involutions(generator_count: usize) -> Vec<Perm> {
    (0..generator_count)
        .map(|v| {
            let mut images: Vec<usize> = (0..2 * generator_count).collect();
            images.swap(2 * v, 2 * v + 1);
            Perm::from_images(&images).unwrap()
        })
        .collect()
}

/// Generator images for the sum quotient: the generator of an `n`-subset
/// acts on `|Δ|` transposition pairs as the product of the transpositions
/// indexed by its labels. Adjacent (disjoint) generators commute and stay
/// distinct, so the development is a small `L`-complex.
pub fn sum_involutions(l: &KneserComplex) -> Vec<Perm> {
    let ground = l.ground().len();
    (0..l.vertex_count())
        .map(|v| {
            let mut images: Vec<usize> = (0..2 * ground).collect();
            for i in l.vertex_set(v).iter() {
                images.swap(2 * i, 2 * i + 1);
            }
            Perm::from_images(&images).unwrap()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// The fixed group ladder for bounded cover searches
// ---------------------------------------------------------------------------

/// A named rung of the search ladder: a permutation group given by its full
/// element list (identity first, deterministic order).
#[derive(Clone, Debug)]
pub struct LadderGroup {
    pub name: &'static str,
    pub degree: usize,
    pub elements: Vec<Perm>,
}

/// The fixed ladder `(Z/2), (Z/2)^2, S3, (Z/2)^3` used by both bounded
/// searches; the order is part of the artifact's reproducibility contract.
pub fn group_ladder() -> Vec<LadderGroup> {
    let z2 = LadderGroup {
        name: "Z/2",
        degree: 2,
        elements: vec![
            Perm::identity(2),
            Perm::from_images(&[1, 0]).unwrap(),
        ],
    };
    // (Z/2)^2 in its regular action: sheets are group elements.
    let z2z2 = LadderGroup {
        name: "(Z/2)^2",
        degree: 4,
        elements: vec![
            Perm::identity(4),
            Perm::from_images(&[1, 0, 3, 2]).unwrap(),
            Perm::from_images(&[2, 3, 0, 1]).unwrap(),
            Perm::from_images(&[3, 2, 1, 0]).unwrap(),
        ],
    };
    let s3 = LadderGroup {
        name: "S3",
        degree: 3,
        elements: Perm::all(3),
    };
    let z2cubed = LadderGroup {
        name: "(Z/2)^3",
        degree: 8,
        elements: {
            let mut out = Vec::with_capacity(8);
            for bits in 0u32..8 {
                let images: Vec<usize> = (0..8).map(|i| (i as u32 ^ bits) as usize).collect();
                out.push(Perm::from_images(&images).unwrap());
            }
            out
        },
    };
    vec![z2, z2z2, s3, z2cubed]
}

/// Enumerates voltage assignments over one ladder group with gains trivial
/// on the canonical spanning forest (tree normalization). Enumeration order:
/// first by support size (0, 1, 2), then lexicographically by (edge, element
/// index); when the number of non-tree edges is small enough that the full
/// space has at most `FULL_ENUMERATION_LIMIT` assignments, the full space is
/// enumerated in plain lexicographic order instead.
pub const FULL_ENUMERATION_LIMIT: usize = 4096;

pub fn enumerate_voltages(x: &CubeComplex, group: &LadderGroup) -> Vec<VoltageAssignment> {
    let forest = x.bfs_forest(VertexId(0));
    let non_tree: Vec<usize> = x
        .undirected_edges()
        .filter(|&e| !forest.is_tree_edge(e))
        .map(|e| e.undirected())
        .collect();
    let m = non_tree.len();
    let g = group.elements.len();
    let mut out = Vec::new();
    let full_size = (0..m).try_fold(1usize, |acc, _| {
        acc.checked_mul(g).filter(|&v| v <= FULL_ENUMERATION_LIMIT)
    });
    if let Some(total) = full_size {
        // Exhaustive: decode each code as base-|G| digits, leftmost edge
        // most significant.
        for code in 0..total {
            let mut c = code;
            let mut va = VoltageAssignment::trivial(x, group.degree);
            for slot in (0..m).rev() {
                va.gains[non_tree[slot]] = group.elements[c % g].clone();
                c /= g;
            }
            out.push(va);
        }
    } else {
        // Support-bounded enumeration.
        out.push(VoltageAssignment::trivial(x, group.degree));
        for (i, &edge) in non_tree.iter().enumerate() {
            for el in group.elements.iter().skip(1) {
                let mut va = VoltageAssignment::trivial(x, group.degree);
                va.gains[edge] = el.clone();
                out.push(va);
            }
            for &edge2 in non_tree.iter().skip(i + 1) {
                for el1 in group.elements.iter().skip(1) {
                    for el2 in group.elements.iter().skip(1) {
                        let mut va = VoltageAssignment::trivial(x, group.degree);
                        va.gains[edge] = el1.clone();
                        va.gains[edge2] = el2.clone();
                        out.push(va);
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Bounded search for covers trivializing the parallel holonomies
// ---------------------------------------------------------------------------

/// Outcome of [`search_trivializing_cover`].
#[derive(Debug)]
pub enum TrivializingSearch {
    Found(CoverMap),
    NotFound {
        candidates_tried: usize,
        /// Hyperplane/side pairs whose holonomy stayed nontrivial on the base.
        surviving: Vec<(u32, crate::hyperplane::SideSign)>,
    },
}

/// Whether the pre-Δ-category pulled back along `f` has all-trivial parallel
/// holonomies. With the pullback assignment the link conjugators are
/// trivial, so the pullback of the maps is the unique pre-category upstairs.
fn cover_trivializes(
    f: &CoverMap,
    pre: &crate::deltacat::PreDeltaCategory,
    base_assignment: &DeltaAssignment,
) -> bool {
    let assignment = crate::deltacat::pullback_assignment(f, base_assignment);
    let total_site = crate::deltacat::Site::with_assignment(f.total.clone(), assignment);
    let lifted = crate::deltacat::PreDeltaCategory {
        maps: f
            .total
            .directed_edges()
            .map(|e| pre.map(f.map_edge(e)).clone())
            .collect(),
    };
    crate::deltacat::check_parallel_holonomies_trivial(&total_site, &lifted).is_ok()
}

/// For the `Z/2` rung: when every nontrivial parallel holonomy has image of
/// order 2, killing them with a double cover is a linear condition over F2
/// on the tree-normalized gain bits. Returns the canonical solution of that
/// system (free variables zero) if one exists.
fn solve_mod2_system(
    site: &crate::deltacat::Site,
    pre: &crate::deltacat::PreDeltaCategory,
) -> Option<VoltageAssignment> {
    let x = &site.complex;
    let forest = x.bfs_forest(VertexId(0));
    let non_tree: Vec<usize> = x
        .undirected_edges()
        .filter(|&e| !forest.is_tree_edge(e))
        .map(|e| e.undirected())
        .collect();
    let slot_of: HashMap<usize, usize> = non_tree
        .iter()
        .enumerate()
        .map(|(slot, &und)| (und, slot))
        .collect();
    let m = non_tree.len();

    // Rows: coefficient bits per non-tree edge, plus the target bit.
    let mut rows: Vec<(Vec<bool>, bool)> = Vec::new();
    for hp in site.hyperplanes.ids() {
        let product = site.certificates[hp.0 as usize].product.as_ref()?;
        for sign in [crate::hyperplane::SideSign::Pos, crate::hyperplane::SideSign::Neg] {
            let side = product.side(sign);
            let basepoint = side.vertices[0];
            let ph =
                crate::deltacat::parallel_holonomy(site, pre, hp, sign, basepoint).ok()?;
            for l in &ph.loops {
                let nontrivial = !l.action.is_identity_on_domain();
                if nontrivial && !l.action.after(&l.action).is_identity_on_domain() {
                    // Image has order > 2: no double cover can kill it.
                    return None;
                }
                let mut coeffs = vec![false; m];
                for &e in &l.edges {
                    if let Some(&slot) = slot_of.get(&e.undirected()) {
                        coeffs[slot] ^= true;
                    }
                }
                rows.push((coeffs, nontrivial));
            }
        }
    }

    // Gaussian elimination over F2.
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; m];
    let mut reduced: Vec<(Vec<bool>, bool)> = Vec::new();
    for (mut coeffs, mut target) in rows {
        for col in 0..m {
            if coeffs[col] {
                if let Some(r) = pivot_of_col[col] {
                    let (ref pc, pt) = reduced[r];
                    let pc = pc.clone();
                    for c2 in 0..m {
                        coeffs[c2] ^= pc[c2];
                    }
                    target ^= pt;
                }
            }
        }
        if let Some(col) = coeffs.iter().position(|&b| b) {
            pivot_of_col[col] = Some(reduced.len());
            reduced.push((coeffs, target));
        } else if target {
            return None; // inconsistent
        }
    }

    // Back-substitute with free variables zero.
    let mut solution = vec![false; m];
    for col in (0..m).rev() {
        if let Some(r) = pivot_of_col[col] {
            let (ref coeffs, target) = reduced[r];
            let mut value = target;
            for c2 in (col + 1)..m {
                if coeffs[c2] && solution[c2] {
                    value ^= true;
                }
            }
            solution[col] = value;
        }
    }

    let flip = Perm::from_images(&[1, 0]).unwrap();
    let mut va = VoltageAssignment::trivial(x, 2);
    for (slot, &und) in non_tree.iter().enumerate() {
        if solution[slot] {
            va.gains[und] = flip.clone();
        }
    }
    Some(va)
}

/// Searches for a cover trivializing every parallel holonomy: the identity
/// cover when they already are; otherwise, per ladder rung within the degree
/// budget, first the canonical solution of the F2 system (for the `Z/2`
/// rung, when applicable), then the deterministic voltage enumeration.
pub fn search_trivializing_cover(
    site: &crate::deltacat::Site,
    pre: &crate::deltacat::PreDeltaCategory,
    budget: usize,
) -> Result<TrivializingSearch, crate::deltacat::DeltaError> {
    let surviving = || -> Result<Vec<(u32, crate::hyperplane::SideSign)>, crate::deltacat::DeltaError> {
        let mut out = Vec::new();
        for hp in site.hyperplanes.ids() {
            let product = site.certificates[hp.0 as usize]
                .product
                .as_ref()
                .ok_or(crate::deltacat::DeltaError::NotClean(hp.0))?;
            for sign in [crate::hyperplane::SideSign::Pos, crate::hyperplane::SideSign::Neg] {
                let side = product.side(sign);
                let ph = crate::deltacat::parallel_holonomy(site, pre, hp, sign, side.vertices[0])?;
                if !ph.is_trivial() {
                    out.push((hp.0, sign));
                }
            }
        }
        Ok(out)
    };

    let base_surviving = surviving()?;
    if base_surviving.is_empty() {
        return Ok(TrivializingSearch::Found(CoverMap::identity(&site.complex)));
    }

    let mut tried = 0usize;
    for group in group_ladder() {
        if group.degree > budget {
            continue;
        }
        let mut candidates = Vec::new();
        if group.name == "Z/2" {
            if let Some(va) = solve_mod2_system(site, pre) {
                candidates.push(va);
            }
        }
        candidates.extend(enumerate_voltages(&site.complex, &group));
        for va in candidates {
            let cover = match voltage_cover(&site.complex, &va) {
                Ok(c) => c,
                Err(_) => continue,
            };
            tried += 1;
            if cover_trivializes(&cover, pre, &site.assignment) {
                return Ok(TrivializingSearch::Found(cover));
            }
        }
    }

    Ok(TrivializingSearch::NotFound {
        candidates_tried: tried,
        surviving: base_surviving,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;
    use crate::kneser::build_kneser;
    use crate::label::LabelSet;

    fn cycle(n: u32) -> CubeComplex {
        let edges: Vec<(u32, u32)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        complex_from_cells(n, &edges, &[], &[]).unwrap()
    }

    #[test]
    fn identity_cover_verifies() {
        let x = instances::theta_graph();
        let f = CoverMap::identity(&x);
        assert!(f.is_verified());
        assert_eq!(f.degree, 1);
    }

    #[test]
    fn classic_double_cover_of_triangle() {
        let x = cycle(3);
        let mut va = VoltageAssignment::trivial(&x, 2);
        va.gains[0] = Perm::from_images(&[1, 0]).unwrap();
        let f = voltage_cover(&x, &va).unwrap();
        assert!(f.is_verified());
        assert_eq!(f.total.vertex_count(), 6);
        assert!(f.total.is_connected());
        // A connected 2-regular graph on 6 vertices is the 6-cycle.
        assert!(f.total.vertices().all(|v| f.total.ends_at(v).len() == 2));
    }

    #[test]
    fn trivial_gains_make_disjoint_copies() {
        let x = instances::theta_graph();
        let va = VoltageAssignment::trivial(&x, 3);
        let f = voltage_cover(&x, &va).unwrap();
        assert_eq!(f.total.vertex_count(), 6);
        assert!(!f.total.is_connected());
    }

    #[test]
    fn theta_z3_connected_cover() {
        let x = instances::theta_graph();
        let mut va = VoltageAssignment::trivial(&x, 3);
        va.gains[1] = Perm::from_images(&[1, 2, 0]).unwrap();
        let f = voltage_cover(&x, &va).unwrap();
        assert!(f.is_verified());
        assert!(f.total.is_connected());
        assert_eq!(f.degree, 3);
    }

    #[test]
    fn square_complex_lifts() {
        let x = instances::one_square_torus();
        let mut va = VoltageAssignment::trivial(&x, 2);
        va.gains[0] = Perm::from_images(&[1, 0]).unwrap();
        let f = voltage_cover(&x, &va).unwrap();
        assert!(f.is_verified());
        assert_eq!(f.total.square_count(), 2);
    }

    #[test]
    fn nonliftable_square_rejected() {
        let x = instances::square_strip(1);
        let mut va = VoltageAssignment::trivial(&x, 2);
        // A gain on one boundary edge of a filled square cannot lift.
        va.gains[0] = Perm::from_images(&[1, 0]).unwrap();
        assert!(matches!(
            voltage_cover(&x, &va),
            Err(CoverError::NonLiftableSquare(0))
        ));
    }

    #[test]
    fn corrupting_a_cover_is_detected() {
        let x = cycle(3);
        let mut va = VoltageAssignment::trivial(&x, 2);
        va.gains[0] = Perm::from_images(&[1, 0]).unwrap();
        let mut f = voltage_cover(&x, &va).unwrap();
        // Collapse a lift of base edge 1 onto base edge 0: the shared
        // endpoint's link no longer maps bijectively.
        f.one_map[4] = 0;
        f.one_map[5] = 1;
        let report = f.verify();
        assert!(!report.is_empty());
    }

    #[test]
    fn davis_three_points_is_cube_skeleton() {
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        let dq = davis_quotient(&l, &standard_involutions(3)).unwrap();
        assert_eq!(dq.group_order, 8);
        assert_eq!(dq.complex.vertex_count(), 8);
        assert_eq!(dq.complex.undirected_edge_count(), 12);
        assert_eq!(dq.complex.square_count(), 0);
        assert!(dq.complex.vertices().all(|v| dq.complex.ends_at(v).len() == 3));
    }

    #[test]
    fn davis_degenerate_quotient_rejected() {
        let l = build_kneser(&LabelSet::numeric(5), 2).unwrap();
        // All ten generators map to the same involution: adjacent generators
        // collide and the development cannot have Petersen links.
        let flip = Perm::from_images(&[1, 0]).unwrap();
        let images = vec![flip; 10];
        let err = davis_quotient(&l, &images).unwrap_err();
        assert!(matches!(err, CoverError::LinkMismatch(_)));
    }

    #[test]
    fn davis_identity_image_rejected() {
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        let mut images = standard_involutions(3);
        images[1] = Perm::identity(6);
        assert!(matches!(
            davis_quotient(&l, &images).unwrap_err(),
            CoverError::BadInvolutions { index: 1, .. }
        ));
    }

    #[test]
    fn davis_sum_quotient_petersen_is_small() {
        let l = build_kneser(&LabelSet::numeric(5), 2).unwrap();
        let dq = davis_quotient(&l, &sum_involutions(&l)).unwrap();
        assert_eq!(dq.group_order, 16);
        assert_eq!(dq.complex.vertex_count(), 16);
        assert_eq!(dq.complex.undirected_edge_count(), 16 * 10 / 2);
        assert_eq!(dq.complex.square_count(), 16 * 15 / 4);
    }

    #[test]
    fn compose_covers_multiplies_degrees() {
        let x = cycle(3);
        let mut va = VoltageAssignment::trivial(&x, 2);
        va.gains[0] = Perm::from_images(&[1, 0]).unwrap();
        let f = voltage_cover(&x, &va).unwrap();
        let mut va2 = VoltageAssignment::trivial(&f.total, 3);
        va2.gains[0] = Perm::from_images(&[1, 2, 0]).unwrap();
        let g = voltage_cover(&f.total, &va2).unwrap();
        let h = compose_covers(&f, &g).unwrap();
        assert!(h.is_verified());
        assert_eq!(h.degree, 6);
        assert_eq!(h.base, x);
    }

    #[test]
    fn ladder_is_fixed() {
        let ladder = group_ladder();
        let names: Vec<&str> = ladder.iter().map(|g| g.name).collect();
        assert_eq!(names, vec!["Z/2", "(Z/2)^2", "S3", "(Z/2)^3"]);
        for g in &ladder {
            assert!(g.elements[0].is_identity());
            assert_eq!(
                g.elements.len(),
                match g.name {
                    "Z/2" => 2,
                    "(Z/2)^2" => 4,
                    "S3" => 6,
                    _ => 8,
                }
            );
        }
    }

    #[test]
    fn voltage_enumeration_small_is_exhaustive() {
        let x = instances::theta_graph();
        let ladder = group_ladder();
        // Two non-tree edges, |Z/2| = 2: four assignments.
        let vas = enumerate_voltages(&x, &ladder[0]);
        assert_eq!(vas.len(), 4);
        assert!(vas[0].gains.iter().all(|g| g.is_identity()));
    }

    #[test]
    fn trivializing_search_identity_on_trivial_input() {
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        let site = crate::deltacat::Site::new(instances::theta_graph(), &l).unwrap();
        let pre = crate::deltacat::build_pre_delta(&site).unwrap();
        match search_trivializing_cover(&site, &pre, 8).unwrap() {
            TrivializingSearch::Found(f) => assert_eq!(f.degree, 1),
            other => panic!("expected identity, got {:?}", other),
        }
    }

    #[test]
    fn trivializing_search_identity_on_davis_quotient() {
        let l = build_kneser(&LabelSet::numeric(5), 2).unwrap();
        let dq = davis_quotient(&l, &sum_involutions(&l)).unwrap();
        let site = crate::deltacat::Site::with_assignment(dq.complex, dq.assignment);
        let pre = crate::deltacat::build_pre_delta(&site).unwrap();
        match search_trivializing_cover(&site, &pre, 2).unwrap() {
            TrivializingSearch::Found(f) => assert_eq!(f.degree, 1),
            other => panic!("expected identity, got {:?}", other),
        }
    }
}
