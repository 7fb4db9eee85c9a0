//! Hyperplanes of a cube complex: equivalence classes of directed 1-cubes
//! generated by square opposition and reversal, their carriers and sides,
//! the "fully clean and 2-sided" certificate, and the covers that repair
//! failures.

use std::collections::BTreeMap;

use crate::complex::{CubeComplex, EdgeId, SquareId, ThreeCubeId, VertexId};
use crate::cover::{
    compose_covers, enumerate_voltages, group_ladder, two_sided_voltage, voltage_cover, CoverMap,
};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct HyperplaneId(pub u32);

/// One hyperplane: its directed dual edges and the orientation classes of
/// the square-generated relation with reversal generators removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperplane {
    pub id: HyperplaneId,
    /// All directed dual edges, ascending (closed under reversal).
    pub dual_directed: Vec<EdgeId>,
    /// One class when the hyperplane is orientation-merged, two otherwise;
    /// the class containing the minimal edge comes first.
    pub orientation_classes: Vec<Vec<EdgeId>>,
}

impl Hyperplane {
    /// Undirected dual edges by forward representative, ascending.
    pub fn dual_undirected(&self) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.dual_directed.iter().map(|e| e.forward()).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// All hyperplanes of a complex plus the edge-to-hyperplane lookup.
#[derive(Clone, Debug)]
pub struct HyperplaneSet {
    pub hyperplanes: Vec<Hyperplane>,
    /// Directed edge -> hyperplane index.
    pub of_edge: Vec<u32>,
}

impl HyperplaneSet {
    pub fn of(&self, e: EdgeId) -> HyperplaneId {
        HyperplaneId(self.of_edge[e.0 as usize])
    }

    pub fn get(&self, id: HyperplaneId) -> &Hyperplane {
        &self.hyperplanes[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = HyperplaneId> {
        (0..self.hyperplanes.len() as u32).map(HyperplaneId)
    }
}

struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, i: u32) -> u32 {
        let mut root = i;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = i;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the smaller root for deterministic class ids.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Union-find over directed 1-cubes: square generators relate same-direction
/// opposite boundary edges; reversal generators complete the hyperplane
/// classes. Orientation classes re-run the square generators alone.
pub fn compute_hyperplanes(x: &CubeComplex) -> HyperplaneSet {
    let m = x.directed_edge_count();
    let mut full = UnionFind::new(m);
    let mut orient = UnionFind::new(m);
    for e in x.undirected_edges() {
        full.union(e.0, e.rev().0);
    }
    for s in x.square_ids() {
        let b = x.square(s);
        for (a, c) in [(b.e1, b.e1p), (b.e2, b.e2p)] {
            full.union(a.0, c.0);
            orient.union(a.0, c.0);
            orient.union(a.rev().0, c.rev().0);
        }
    }

    let mut class_of_root: BTreeMap<u32, u32> = BTreeMap::new();
    let mut members: Vec<Vec<EdgeId>> = Vec::new();
    let mut of_edge = vec![0u32; m];
    for e in 0..m as u32 {
        let root = full.find(e);
        let id = *class_of_root.entry(root).or_insert_with(|| {
            members.push(Vec::new());
            (members.len() - 1) as u32
        });
        members[id as usize].push(EdgeId(e));
        of_edge[e as usize] = id;
    }

    let hyperplanes = members
        .into_iter()
        .enumerate()
        .map(|(id, dual_directed)| {
            let mut by_orient: BTreeMap<u32, Vec<EdgeId>> = BTreeMap::new();
            for &e in &dual_directed {
                by_orient.entry(orient.find(e.0)).or_default().push(e);
            }
            let mut orientation_classes: Vec<Vec<EdgeId>> =
                by_orient.into_values().collect();
            orientation_classes.sort_by_key(|c| c[0]);
            Hyperplane {
                id: HyperplaneId(id as u32),
                dual_directed,
                orientation_classes,
            }
        })
        .collect();

    HyperplaneSet {
        hyperplanes,
        of_edge,
    }
}

// ---------------------------------------------------------------------------
// Cleanliness certification
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SideSign {
    Pos,
    Neg,
}

impl SideSign {
    pub fn opposite(self) -> SideSign {
        match self {
            SideSign::Pos => SideSign::Neg,
            SideSign::Neg => SideSign::Pos,
        }
    }
}

/// Why a hyperplane is or is not 2-sided.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwoSidedness {
    /// Co-orientation: the directed edges of the positive class.
    TwoSided { positive: Vec<EdgeId> },
    /// Some square path carries an edge onto its own reversal.
    MergedOrientation { witness: EdgeId },
    /// A dual edge is a loop; the carrier cannot be a product.
    DualLoop { edge: EdgeId },
}

/// One side of a clean carrier: the ±1 fiber of `N(Λ) ≅ Λ × [−1,1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideComplex {
    pub sign: SideSign,
    pub vertices: Vec<VertexId>,
    /// Side vertex -> the dual directed edge terminating there.
    pub dual_end_at: BTreeMap<VertexId, EdgeId>,
    /// Parallel edges of this side (forward representatives, ascending).
    pub edges: Vec<EdgeId>,
    /// Witnessing crossing square per parallel edge (by undirected index).
    pub crossing_of_edge: BTreeMap<usize, SquareId>,
    /// Side faces of crossing 3-cubes.
    pub squares: Vec<SquareId>,
}

/// The developed product structure `N(Λ) ≅ Λ × [−1,1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CarrierProduct {
    /// Realization 0-cells: undirected dual edges.
    pub dual_undirected: Vec<EdgeId>,
    /// Realization 1-cells: squares crossed by the hyperplane.
    pub crossing_squares: Vec<SquareId>,
    /// Realization 2-cells: 3-cubes crossed by the hyperplane.
    pub crossing_cubes: Vec<ThreeCubeId>,
    pub side_pos: SideComplex,
    pub side_neg: SideComplex,
}

impl CarrierProduct {
    pub fn side(&self, sign: SideSign) -> &SideComplex {
        match sign {
            SideSign::Pos => &self.side_pos,
            SideSign::Neg => &self.side_neg,
        }
    }
}

/// The full certificate for "fully clean and 2-sided". Failures carry
/// concrete witness cells and are data, not errors.
#[derive(Clone, Debug)]
pub struct CleanlinessCertificate {
    pub hyperplane: HyperplaneId,
    /// A square cornered by two dual edges, when the hyperplane crosses
    /// itself.
    pub crossing_witness: Option<(SquareId, EdgeId, EdgeId)>,
    pub two_sidedness: TwoSidedness,
    /// A vertex carrying two dual edge-ends, when the hyperplane directly
    /// self-osculates.
    pub osculation_witness: Option<(VertexId, EdgeId, EdgeId)>,
    /// Present exactly when all three checks pass and the carrier develops
    /// as a product.
    pub product: Option<CarrierProduct>,
    /// Set when the three local checks pass but product assembly failed;
    /// indicates corrupted inputs rather than a hyperplane pathology.
    pub product_failure: Option<String>,
}

impl CleanlinessCertificate {
    pub fn is_embedded(&self) -> bool {
        self.crossing_witness.is_none()
    }

    pub fn is_two_sided(&self) -> bool {
        matches!(self.two_sidedness, TwoSidedness::TwoSided { .. })
    }

    pub fn self_osculates(&self) -> bool {
        self.osculation_witness.is_some()
    }

    pub fn is_clean_two_sided(&self) -> bool {
        self.product.is_some()
    }
}

/// Certifies one hyperplane: embedded, 2-sided, no direct self-osculation,
/// and the carrier product structure when the three checks pass.
pub fn certify_clean(x: &CubeComplex, hps: &HyperplaneSet, id: HyperplaneId) -> CleanlinessCertificate {
    let hp = hps.get(id);

    // Embedded: no square corner carries two dual ends of this hyperplane.
    let mut crossing_witness = None;
    'outer: for s in x.square_ids() {
        for corner in x.square_corners(s) {
            let [a, b] = corner.ends;
            if hps.of(a) == id && hps.of(b) == id {
                crossing_witness = Some((s, a, b));
                break 'outer;
            }
        }
    }

    let dual_loop = hp
        .dual_directed
        .iter()
        .copied()
        .find(|&e| x.init(e) == x.term(e));
    let two_sidedness = if let Some(e) = dual_loop {
        TwoSidedness::DualLoop { edge: e }
    } else if hp.orientation_classes.len() == 2 {
        TwoSidedness::TwoSided {
            positive: hp.orientation_classes[0].clone(),
        }
    } else {
        TwoSidedness::MergedOrientation {
            witness: hp.dual_directed[0],
        }
    };

    // Direct self-osculation: two dual ends at one 0-cube.
    let mut osculation_witness = None;
    {
        let mut seen: BTreeMap<VertexId, EdgeId> = BTreeMap::new();
        for &e in &hp.dual_directed {
            let v = x.term(e);
            if let Some(&prev) = seen.get(&v) {
                osculation_witness = Some((v, prev, e));
                break;
            }
            seen.insert(v, e);
        }
    }

    let mut cert = CleanlinessCertificate {
        hyperplane: id,
        crossing_witness,
        two_sidedness,
        osculation_witness,
        product: None,
        product_failure: None,
    };
    if cert.is_embedded() && cert.is_two_sided() && !cert.self_osculates() {
        match develop_product(x, hps, id) {
            Ok(product) => cert.product = Some(product),
            Err(msg) => cert.product_failure = Some(msg),
        }
    }
    cert
}

/// Develops the carrier as `Λ × [−1,1]`, breadth-first over crossing squares
/// from the minimal dual edge.
fn develop_product(
    x: &CubeComplex,
    hps: &HyperplaneSet,
    id: HyperplaneId,
) -> Result<CarrierProduct, String> {
    let hp = hps.get(id);
    let positive = match &certify_two_sidedness_only(hp, x) {
        TwoSidedness::TwoSided { positive } => positive.clone(),
        _ => return Err("not 2-sided".into()),
    };
    let negative: Vec<EdgeId> = positive.iter().map(|e| e.rev()).collect();

    let mut side = |sign: SideSign, class: &[EdgeId]| -> Result<SideComplex, String> {
        let mut dual_end_at = BTreeMap::new();
        for &e in class {
            if dual_end_at.insert(x.term(e), e).is_some() {
                return Err(format!("two dual ends at vertex {}", x.term(e)));
            }
        }
        let vertices: Vec<VertexId> = dual_end_at.keys().copied().collect();
        Ok(SideComplex {
            sign,
            vertices,
            dual_end_at,
            edges: Vec::new(),
            crossing_of_edge: BTreeMap::new(),
            squares: Vec::new(),
        })
    };
    let mut side_pos = side(SideSign::Pos, &positive)?;
    let mut side_neg = side(SideSign::Neg, &negative)?;
    if side_pos
        .vertices
        .iter()
        .any(|v| side_neg.dual_end_at.contains_key(v))
    {
        return Err("sides are not disjoint".into());
    }

    let mut crossing_squares = Vec::new();
    for s in x.square_ids() {
        let b = x.square(s);
        let pair1_dual = hps.of(b.e1) == id;
        let pair2_dual = hps.of(b.e2) == id;
        if !pair1_dual && !pair2_dual {
            continue;
        }
        if pair1_dual && pair2_dual {
            return Err(format!("square {} is crossed twice", s.0));
        }
        crossing_squares.push(s);
        // Root so the dual pair is (e1, e1'); then e2 joins the heads and
        // e2' joins the tails.
        let b = if pair1_dual {
            *b
        } else {
            crate::complex::SquareBoundary {
                e1: b.e2p,
                e2: b.e1p,
                e1p: b.e2,
                e2p: b.e1,
            }
        };
        let heads_positive = positive.contains(&b.e1);
        debug_assert_eq!(positive.contains(&b.e1), positive.contains(&b.e1p));
        let (head_side, tail_side) = if heads_positive {
            (&mut side_pos, &mut side_neg)
        } else {
            (&mut side_neg, &mut side_pos)
        };
        head_side
            .crossing_of_edge
            .entry(b.e2.undirected())
            .or_insert(s);
        head_side.edges.push(b.e2.forward());
        tail_side
            .crossing_of_edge
            .entry(b.e2p.undirected())
            .or_insert(s);
        tail_side.edges.push(b.e2p.forward());
    }

    let mut crossing_cubes = Vec::new();
    for c in x.cube_ids() {
        let cube = x.cube(c);
        let dual_axes: Vec<usize> = (0..3)
            .filter(|&axis| hps.of(cube.edges[crate::complex::cube_edge_slot(axis, 0)]) == id)
            .collect();
        if dual_axes.is_empty() {
            continue;
        }
        if dual_axes.len() > 1 {
            return Err(format!("cube {} is crossed along two axes", c.0));
        }
        let axis = dual_axes[0];
        crossing_cubes.push(c);
        let ascending = cube.edges[crate::complex::cube_edge_slot(axis, 0)];
        let heads_positive = positive.contains(&ascending);
        let (head_side, tail_side) = if heads_positive {
            (&mut side_pos, &mut side_neg)
        } else {
            (&mut side_neg, &mut side_pos)
        };
        head_side.squares.push(cube.faces[2 * axis + 1]);
        tail_side.squares.push(cube.faces[2 * axis]);
    }

    for side in [&mut side_pos, &mut side_neg] {
        side.edges.sort_unstable();
        side.edges.dedup();
        side.squares.sort_unstable();
        side.squares.dedup();
        // Parallel edges must join side vertices.
        for &e in &side.edges {
            if !side.dual_end_at.contains_key(&x.init(e))
                || !side.dual_end_at.contains_key(&x.term(e))
            {
                return Err(format!("parallel edge {} leaves its side", e.0));
            }
        }
    }

    Ok(CarrierProduct {
        dual_undirected: hp.dual_undirected(),
        crossing_squares,
        crossing_cubes,
        side_pos,
        side_neg,
    })
}

fn certify_two_sidedness_only(hp: &Hyperplane, x: &CubeComplex) -> TwoSidedness {
    if let Some(&e) = hp
        .dual_directed
        .iter()
        .find(|&&e| x.init(e) == x.term(e))
    {
        return TwoSidedness::DualLoop { edge: e };
    }
    if hp.orientation_classes.len() == 2 {
        TwoSidedness::TwoSided {
            positive: hp.orientation_classes[0].clone(),
        }
    } else {
        TwoSidedness::MergedOrientation {
            witness: hp.dual_directed[0],
        }
    }
}

/// Certificates for every hyperplane, in id order.
pub fn certify_all(x: &CubeComplex, hps: &HyperplaneSet) -> Vec<CleanlinessCertificate> {
    hps.ids().map(|id| certify_clean(x, hps, id)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HyperplaneError {
    #[error("hyperplane {0} is already 2-sided")]
    AlreadyTwoSided(u32),
    #[error("hyperplane {0} is not certified clean")]
    NotClean(u32),
    #[error("cover construction failed: {0}")]
    Cover(String),
}

/// Sides and parallel edges of a certified clean 2-sided hyperplane.
pub fn sides_and_parallel_edges<'a>(
    cert: &'a CleanlinessCertificate,
) -> Result<(&'a SideComplex, &'a SideComplex), HyperplaneError> {
    match &cert.product {
        Some(p) => Ok((&p.side_pos, &p.side_neg)),
        None => Err(HyperplaneError::NotClean(cert.hyperplane.0)),
    }
}

/// The mod-2 voltage double cover making every preimage of a 1-sided
/// hyperplane 2-sided: gain 1 on each dual edge, 0 elsewhere. Every square
/// boundary crosses a hyperplane an even number of times, so the voltage
/// always lifts.
pub fn two_sided_cover(
    x: &CubeComplex,
    hps: &HyperplaneSet,
    id: HyperplaneId,
) -> Result<CoverMap, HyperplaneError> {
    let cert = certify_clean(x, hps, id);
    if cert.is_two_sided() {
        return Err(HyperplaneError::AlreadyTwoSided(id.0));
    }
    let va = two_sided_voltage(x, &hps.get(id).dual_undirected());
    voltage_cover(x, &va).map_err(|e| HyperplaneError::Cover(e.to_string()))
}

/// Outcome of the bounded clean-cover search.
#[derive(Debug)]
pub enum CleanSearch {
    /// A cover of the input under which every hyperplane certifies clean
    /// and 2-sided (identity if the input already does).
    Found(CoverMap),
    NotFound {
        candidates_tried: usize,
        /// Certificates of the best candidate seen (most clean hyperplanes).
        best_clean: usize,
        best_total: usize,
        best_certificates: Vec<CleanlinessCertificate>,
    },
}

fn count_clean(certs: &[CleanlinessCertificate]) -> usize {
    certs.iter().filter(|c| c.is_clean_two_sided()).count()
}

/// Searches for a finite cover with all hyperplanes fully clean and
/// 2-sided: first iterates mod-2 repairs of non-2-sided hyperplanes, then
/// enumerates voltage covers over the fixed group ladder, accepting the
/// first success of composite degree at most `budget`.
pub fn search_clean_cover(x: &CubeComplex, budget: usize) -> CleanSearch {
    let mut current = CoverMap::identity(x);
    let mut tried = 0usize;
    let mut best: Option<(usize, usize, Vec<CleanlinessCertificate>)> = None;

    // Phase 1: 2-siding repairs.
    loop {
        let hps = compute_hyperplanes(&current.total);
        let certs = certify_all(&current.total, &hps);
        tried += 1;
        let clean = count_clean(&certs);
        if clean == certs.len() {
            return CleanSearch::Found(current);
        }
        if best.as_ref().map_or(true, |(c, _, _)| clean > *c) {
            best = Some((clean, certs.len(), certs.clone()));
        }
        let repairable = hps
            .ids()
            .find(|&id| !certs[id.0 as usize].is_two_sided());
        match repairable {
            Some(id) if current.degree * 2 <= budget => {
                let va = two_sided_voltage(&current.total, &hps.get(id).dual_undirected());
                match voltage_cover(&current.total, &va) {
                    Ok(step) => match compose_covers(&current, &step) {
                        Ok(next) => current = next,
                        Err(_) => break,
                    },
                    Err(_) => break,
                }
            }
            _ => break,
        }
    }

    // Phase 2: ladder enumeration over the phase-1 result.
    for group in group_ladder() {
        if current.degree * group.degree > budget {
            continue;
        }
        for va in enumerate_voltages(&current.total, &group) {
            let cover = match voltage_cover(&current.total, &va) {
                Ok(c) => c,
                Err(_) => continue,
            };
            tried += 1;
            let hps = compute_hyperplanes(&cover.total);
            let certs = certify_all(&cover.total, &hps);
            let clean = count_clean(&certs);
            if clean == certs.len() {
                if let Ok(composite) = compose_covers(&current, &cover) {
                    return CleanSearch::Found(composite);
                }
            }
            if best.as_ref().map_or(true, |(c, _, _)| clean > *c) {
                best = Some((clean, certs.len(), certs));
            }
        }
    }

    let (best_clean, best_total, best_certificates) = best.unwrap_or((0, 0, Vec::new()));
    CleanSearch::NotFound {
        candidates_tried: tried,
        best_clean,
        best_total,
        best_certificates,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::verify_cover;
    use crate::instances;

    #[test]
    fn theta_has_three_clean_hyperplanes() {
        let x = instances::theta_graph();
        let hps = compute_hyperplanes(&x);
        assert_eq!(hps.len(), 3);
        for id in hps.ids() {
            let cert = certify_clean(&x, &hps, id);
            assert!(cert.is_clean_two_sided(), "{:?}", cert);
            let p = cert.product.unwrap();
            assert_eq!(p.side_pos.vertices.len(), 1);
            assert_eq!(p.side_neg.vertices.len(), 1);
            assert!(p.side_pos.edges.is_empty());
        }
    }

    #[test]
    fn loop_edge_is_not_clean() {
        let x = instances::loop_graph();
        let hps = compute_hyperplanes(&x);
        assert_eq!(hps.len(), 1);
        let cert = certify_clean(&x, &hps, HyperplaneId(0));
        assert!(matches!(cert.two_sidedness, TwoSidedness::DualLoop { .. }));
        assert!(cert.self_osculates());
        assert!(!cert.is_clean_two_sided());
    }

    #[test]
    fn torus_hyperplanes_self_osculate() {
        let x = instances::one_square_torus();
        let hps = compute_hyperplanes(&x);
        assert_eq!(hps.len(), 2);
        for id in hps.ids() {
            let cert = certify_clean(&x, &hps, id);
            assert!(cert.is_embedded());
            let (v, _, _) = cert.osculation_witness.expect("osculation at the vertex");
            assert_eq!(v, VertexId(0));
        }
    }

    #[test]
    fn klein_square_is_one_sided() {
        let x = instances::klein_square();
        let hps = compute_hyperplanes(&x);
        // The `a` loop and the `b` loop give two hyperplanes.
        let mut kinds = Vec::new();
        for id in hps.ids() {
            let cert = certify_clean(&x, &hps, id);
            kinds.push(cert.two_sidedness.clone());
        }
        assert!(kinds
            .iter()
            .any(|k| matches!(k, TwoSidedness::MergedOrientation { .. })
                || matches!(k, TwoSidedness::DualLoop { .. })));
    }

    #[test]
    fn strip_middle_hyperplane_sides_are_paths() {
        let x = instances::square_strip(2);
        let hps = compute_hyperplanes(&x);
        // The hyperplane of the vertical edges runs the strip's length.
        let vertical = hps.of(EdgeId(2 * 2 * 2)); // first vertical, und id 2k = 4
        let cert = certify_clean(&x, &hps, vertical);
        let p = cert.product.expect("strip hyperplane is clean");
        assert_eq!(p.dual_undirected.len(), 3);
        assert_eq!(p.side_pos.vertices.len(), 3);
        assert_eq!(p.side_pos.edges.len(), 2);
        assert_eq!(p.side_neg.edges.len(), 2);
    }

    #[test]
    fn davis_quotient_hyperplanes_have_constant_generator() {
        let l = crate::kneser::build_kneser(&crate::label::LabelSet::numeric(5), 2).unwrap();
        let dq = crate::cover::davis_quotient(&l, &crate::cover::sum_involutions(&l)).unwrap();
        let hps = compute_hyperplanes(&dq.complex);
        for hp in &hps.hyperplanes {
            let gens: std::collections::HashSet<usize> = hp
                .dual_directed
                .iter()
                .map(|e| dq.edge_generator[e.undirected()])
                .collect();
            assert_eq!(gens.len(), 1, "hyperplane mixes generators");
        }
        for id in hps.ids() {
            assert!(certify_clean(&dq.complex, &hps, id).is_clean_two_sided());
        }
    }

    #[test]
    fn loop_two_sided_cover_repairs() {
        let x = instances::loop_graph();
        let hps = compute_hyperplanes(&x);
        let f = two_sided_cover(&x, &hps, HyperplaneId(0)).unwrap();
        assert!(f.is_verified());
        assert_eq!(f.total.vertex_count(), 2);
        // The double cover is a 2-cycle; both hyperplanes are now clean.
        let hps2 = compute_hyperplanes(&f.total);
        let before = 0;
        let after = certify_all(&f.total, &hps2)
            .iter()
            .filter(|c| c.is_two_sided())
            .count();
        assert!(after > before);
        assert!(certify_all(&f.total, &hps2).iter().all(|c| c.is_clean_two_sided()));
    }

    #[test]
    fn two_sided_guard() {
        let x = instances::theta_graph();
        let hps = compute_hyperplanes(&x);
        assert!(matches!(
            two_sided_cover(&x, &hps, HyperplaneId(0)),
            Err(HyperplaneError::AlreadyTwoSided(0))
        ));
    }

    #[test]
    fn klein_repair_improves() {
        let x = instances::klein_square();
        let hps = compute_hyperplanes(&x);
        let one_sided = hps
            .ids()
            .find(|&id| !certify_clean(&x, &hps, id).is_two_sided())
            .expect("klein square has a 1-sided hyperplane");
        let f = two_sided_cover(&x, &hps, one_sided).unwrap();
        assert!(verify_cover(&f).is_empty());
        let hps2 = compute_hyperplanes(&f.total);
        let certs = certify_all(&f.total, &hps2);
        let two_sided_after = certs.iter().filter(|c| c.is_two_sided()).count();
        assert!(two_sided_after > 0);
    }

    #[test]
    fn clean_search_identity_on_clean_input() {
        let x = instances::theta_graph();
        match search_clean_cover(&x, 8) {
            CleanSearch::Found(f) => assert_eq!(f.degree, 1),
            other => panic!("expected identity cover, got {:?}", other),
        }
    }

    #[test]
    fn clean_search_fixes_torus() {
        let x = instances::one_square_torus();
        match search_clean_cover(&x, 8) {
            CleanSearch::Found(f) => {
                assert!(f.degree <= 4, "degree {}", f.degree);
                assert!(f.is_verified());
                let hps = compute_hyperplanes(&f.total);
                assert!(certify_all(&f.total, &hps)
                    .iter()
                    .all(|c| c.is_clean_two_sided()));
            }
            other => panic!("expected a clean cover, got {:?}", other),
        }
    }

    #[test]
    fn clean_search_budget_exhaustion() {
        let x = instances::one_square_torus();
        match search_clean_cover(&x, 1) {
            CleanSearch::NotFound {
                best_clean,
                best_total,
                ..
            } => {
                assert_eq!(best_total, 2);
                assert!(best_clean < 2);
            }
            CleanSearch::Found(_) => panic!("torus is not clean at degree 1"),
        }
    }
}
