//! Δ-categories: the forced pre-category of complement-label transports, the
//! parallel holonomies of hyperplane sides, the extension to total per-edge
//! bijections, axiom verification, and lifting along covers.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::complex::{
    assign_links, check_npc, complement_transport, AssignError, CubeComplex, DeltaAssignment,
    EdgeId, VertexId,
};
use crate::cover::CoverMap;
use crate::hyperplane::{
    certify_all, compute_hyperplanes, CleanlinessCertificate, HyperplaneId, HyperplaneSet,
    SideComplex, SideSign,
};
use crate::kneser::{build_kneser, recover_bijection, KneserComplex, KneserError};
use crate::label::{PartialBij, Perm, Subset};
use crate::report::{CellRef, Report};

/// A complex bundled with its link identification, hyperplanes, and
/// per-hyperplane cleanliness certificates. Every Δ-category operation runs
/// against one of these.
#[derive(Clone, Debug)]
pub struct Site {
    pub complex: CubeComplex,
    pub assignment: DeltaAssignment,
    pub hyperplanes: HyperplaneSet,
    pub certificates: Vec<CleanlinessCertificate>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SiteError {
    #[error("complex is not non-positively curved:\n{0}")]
    NotNpc(Report),
    #[error(transparent)]
    Links(#[from] AssignError),
}

impl Site {
    /// Validates curvature, identifies links with `L`, and certifies all
    /// hyperplanes.
    pub fn new(complex: CubeComplex, l: &KneserComplex) -> Result<Site, SiteError> {
        let npc = check_npc(&complex);
        if !npc.is_empty() {
            return Err(SiteError::NotNpc(npc));
        }
        let assignment = assign_links(&complex, l)?;
        Ok(Site::with_assignment(complex, assignment))
    }

    /// Builds a site from an already-computed assignment (used when pulling
    /// an assignment back along a cover).
    pub fn with_assignment(complex: CubeComplex, assignment: DeltaAssignment) -> Site {
        let hyperplanes = compute_hyperplanes(&complex);
        let certificates = certify_all(&complex, &hyperplanes);
        Site {
            complex,
            assignment,
            hyperplanes,
            certificates,
        }
    }

    pub fn all_clean(&self) -> bool {
        self.certificates.iter().all(|c| c.is_clean_two_sided())
    }

    pub fn first_unclean(&self) -> Option<HyperplaneId> {
        self.certificates
            .iter()
            .position(|c| !c.is_clean_two_sided())
            .map(|i| HyperplaneId(i as u32))
    }

    /// The unique dual edge of `hp` terminating at `p`, when `p` is on the
    /// carrier of a certified-clean hyperplane.
    pub fn dual_end(&self, hp: HyperplaneId, p: VertexId) -> Option<EdgeId> {
        let product = self.certificates[hp.0 as usize].product.as_ref()?;
        product
            .side_pos
            .dual_end_at
            .get(&p)
            .or_else(|| product.side_neg.dual_end_at.get(&p))
            .copied()
    }

    /// `Λ_p`: the label of the dual end of `hp` at `p`.
    pub fn hyperplane_label(&self, hp: HyperplaneId, p: VertexId) -> Option<Subset> {
        self.dual_end(hp, p)
            .map(|e| self.assignment.label_of_end(e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeltaError {
    #[error("hyperplane {0} is not certified clean and 2-sided")]
    NotClean(u32),
    #[error("edge {edge}: ground bijection recovery failed: {source}")]
    RecoveryFailed { edge: u32, source: KneserError },
    #[error("hyperplane {hyperplane}: side square {square} has a nontrivial transport product")]
    IllDefined { hyperplane: u32, square: u32 },
    #[error("hyperplane {hyperplane} has a nontrivial parallel holonomy on the {side:?} side")]
    NontrivialParallelHolonomy {
        hyperplane: u32,
        side: SideSign,
        witness_loop: Vec<EdgeId>,
    },
    #[error("hyperplane {0}: carrier side is disconnected from the base edge")]
    PathDisconnected(u32),
    #[error("vertex {0} is not on the requested carrier side")]
    BadBasepoint(u32),
    #[error("hyperplane {0}: base choice is not a bijection between its end labels")]
    BadBaseChoice(u32),
    #[error("cover map has not been verified")]
    UnverifiedCover,
    #[error("construction failed its own re-verification:\n{0}")]
    Inconsistent(Report),
}

// ---------------------------------------------------------------------------
// The pre-Δ-category
// ---------------------------------------------------------------------------

/// The unique family of partial bijections `φ*_e : Δ − Λ_x → Δ − Λ_y`
/// induced by the adjacency maps, indexed by directed edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreDeltaCategory {
    pub maps: Vec<PartialBij>,
}

impl PreDeltaCategory {
    pub fn map(&self, e: EdgeId) -> &PartialBij {
        &self.maps[e.0 as usize]
    }
}

/// Builds the pre-Δ-category from the adjacency maps and re-verifies the
/// defining conditions.
pub fn build_pre_delta(site: &Site) -> Result<PreDeltaCategory, DeltaError> {
    if let Some(hp) = site.first_unclean() {
        return Err(DeltaError::NotClean(hp.0));
    }
    let maps: Vec<PartialBij> = site
        .complex
        .directed_edges()
        .map(|e| {
            complement_transport(&site.complex, &site.assignment, e).map_err(|source| {
                DeltaError::RecoveryFailed { edge: e.0, source }
            })
        })
        .collect::<Result<_, _>>()?;
    let pre = PreDeltaCategory { maps };
    let report = verify_pre_delta(site, &pre);
    if !report.is_empty() {
        return Err(DeltaError::Inconsistent(report));
    }
    Ok(pre)
}

/// Checks inverses, restricted square commutativity, and hyperplane-label
/// transport of a pre-Δ-category; empty report iff all hold.
pub fn verify_pre_delta(site: &Site, pre: &PreDeltaCategory) -> Report {
    let mut report = Report::new();
    let x = &site.complex;
    let asg = &site.assignment;
    let full = asg.ground.full();
    if pre.maps.len() != x.directed_edge_count() {
        report.push(CellRef::Global, "pre-category has wrong edge count");
        return report;
    }
    for e in x.directed_edges() {
        let m = pre.map(e);
        let dom = full.minus(asg.label_at_init(e));
        let img = full.minus(asg.label_of_end(e));
        if m.domain() != dom || m.image() != img {
            report.push(
                CellRef::Edge(e.0),
                "map is not defined on the label complement",
            );
        }
        if pre.map(e.rev()) != &m.inverse() {
            report.push(CellRef::Edge(e.0), "reversal is not the inverse map");
        }
    }
    let square_violations: Vec<(u32, String)> = x
        .square_ids()
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|&s| {
            let mut local = Vec::new();
            let b = x.square(s);
            let lam1_x = asg.label_at_init(b.e1);
            let lam2_x = asg.label_at_init(b.e2p);
            let lam1_y2 = asg.label_of_end(b.e2p); // Λ²_{y'}? see below
            let _ = lam1_y2;
            // Transport: φ*_{e1}(Λ²_x) = Λ²_y and φ*_{e2'}(Λ¹_x) = Λ¹_{y'}.
            let lam2_y = asg.label_at_init(b.e2);
            match pre.map(b.e1).image_of(lam2_x) {
                Some(img) if img == lam2_y => {}
                _ => local.push((s.0, "transport of the crossing label along e1 fails".into())),
            }
            let lam1_yp = asg.label_at_init(b.e1p);
            match pre.map(b.e2p).image_of(lam1_x) {
                Some(img) if img == lam1_yp => {}
                _ => local.push((s.0, "transport of the crossing label along e2' fails".into())),
            }
            // Commutativity on Δ − Λ¹_x − Λ²_x.
            let dom = full.minus(lam1_x).minus(lam2_x);
            let via_y = pre.map(b.e2).after(pre.map(b.e1));
            let via_yp = pre.map(b.e1p).after(pre.map(b.e2p));
            for a in dom.iter() {
                if via_y.apply(a) != via_yp.apply(a) || via_y.apply(a).is_none() {
                    local.push((
                        s.0,
                        format!("square transports disagree on label index {}", a),
                    ));
                }
            }
            local.into_iter()
        })
        .collect();
    for (s, rule) in square_violations {
        report.push(CellRef::Square(s), rule);
    }
    report.sort();
    report
}

// ---------------------------------------------------------------------------
// Parallel holonomy
// ---------------------------------------------------------------------------

/// The transport `ψ_e : Λ_p → Λ_q` of a hyperplane's label along an edge
/// parallel to it.
fn psi(
    site: &Site,
    pre: &PreDeltaCategory,
    hp: HyperplaneId,
    d: EdgeId,
) -> Result<PartialBij, DeltaError> {
    let p = site.complex.init(d);
    let lam_p = site
        .hyperplane_label(hp, p)
        .ok_or(DeltaError::PathDisconnected(hp.0))?;
    let restricted = pre.map(d).restrict(lam_p);
    if restricted.domain() != lam_p {
        return Err(DeltaError::IllDefined {
            hyperplane: hp.0,
            square: u32::MAX,
        });
    }
    Ok(restricted)
}

/// One generator loop of a side's fundamental group and its action.
#[derive(Clone, Debug)]
pub struct HolonomyLoop {
    /// The defining non-tree parallel edge.
    pub chord: EdgeId,
    /// The full based loop, as directed parallel edges.
    pub edges: Vec<EdgeId>,
    /// Action on the base label set.
    pub action: PartialBij,
}

/// The parallel holonomy of one side of a hyperplane carrier at a basepoint.
#[derive(Clone, Debug)]
pub struct ParallelHolonomy {
    pub hyperplane: HyperplaneId,
    pub side: SideSign,
    pub basepoint: VertexId,
    /// `Λ` at the basepoint; all actions permute this set.
    pub base_label: Subset,
    pub loops: Vec<HolonomyLoop>,
    /// The generated image subgroup (as permutations of `base_label`).
    pub image: Vec<PartialBij>,
}

impl ParallelHolonomy {
    pub fn is_trivial(&self) -> bool {
        self.loops.iter().all(|l| l.action.is_identity_on_domain())
    }
}

struct SideWalk {
    /// Vertex -> arriving tree edge (directed parallel edge).
    parent: BTreeMap<VertexId, EdgeId>,
    order: Vec<VertexId>,
}

fn side_walk(x: &CubeComplex, side: &SideComplex, root: VertexId) -> SideWalk {
    let mut out_edges: BTreeMap<VertexId, Vec<EdgeId>> = BTreeMap::new();
    for &e in &side.edges {
        for d in [e, e.rev()] {
            out_edges.entry(x.init(d)).or_default().push(d);
        }
    }
    for list in out_edges.values_mut() {
        list.sort_unstable();
    }
    let mut parent = BTreeMap::new();
    let mut order = vec![root];
    let mut seen: std::collections::BTreeSet<VertexId> = [root].into();
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(p) = queue.pop_front() {
        for &d in out_edges.get(&p).into_iter().flatten() {
            let q = x.term(d);
            if seen.insert(q) {
                parent.insert(q, d);
                order.push(q);
                queue.push_back(q);
            }
        }
    }
    SideWalk { parent, order }
}

impl SideWalk {
    fn path_from_root(&self, x: &CubeComplex, v: VertexId) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut cur = v;
        while let Some(&d) = self.parent.get(&cur) {
            path.push(d);
            cur = x.init(d);
        }
        path.reverse();
        path
    }
}

/// Composes ψ along a path of parallel edges (applied left to right).
fn psi_path(
    site: &Site,
    pre: &PreDeltaCategory,
    hp: HyperplaneId,
    path: &[EdgeId],
    start_label: Subset,
) -> Result<PartialBij, DeltaError> {
    let ground = site.assignment.ground.len();
    let mut acc = PartialBij::identity_on(ground, start_label);
    for &d in path {
        acc = psi(site, pre, hp, d)?.after(&acc);
    }
    Ok(acc)
}

/// Computes the parallel holonomy of `hp` on the given side at `basepoint`:
/// BFS spanning tree of the side's 1-skeleton, one loop per non-tree
/// parallel edge, and the generated subgroup. Fails when a side square's
/// boundary transport is not the identity.
pub fn parallel_holonomy(
    site: &Site,
    pre: &PreDeltaCategory,
    hp: HyperplaneId,
    side_sign: SideSign,
    basepoint: VertexId,
) -> Result<ParallelHolonomy, DeltaError> {
    let cert = &site.certificates[hp.0 as usize];
    let product = cert.product.as_ref().ok_or(DeltaError::NotClean(hp.0))?;
    let side = product.side(side_sign);
    if !side.dual_end_at.contains_key(&basepoint) {
        return Err(DeltaError::BadBasepoint(basepoint.0));
    }
    let x = &site.complex;
    let base_label = site.hyperplane_label(hp, basepoint).unwrap();

    // Well-definedness: side squares must commute.
    for &s in &side.squares {
        let b = x.square(s);
        let start = site.hyperplane_label(hp, x.init(b.e1)).ok_or(
            DeltaError::PathDisconnected(hp.0),
        )?;
        let via_y = psi_path(site, pre, hp, &[b.e1, b.e2], start)?;
        let via_yp = psi_path(site, pre, hp, &[b.e2p, b.e1p], start)?;
        if via_y != via_yp {
            return Err(DeltaError::IllDefined {
                hyperplane: hp.0,
                square: s.0,
            });
        }
    }

    let walk = side_walk(x, side, basepoint);
    if walk.order.len() != side.vertices.len() {
        return Err(DeltaError::PathDisconnected(hp.0));
    }
    let mut transport: BTreeMap<VertexId, PartialBij> = BTreeMap::new();
    let ground = site.assignment.ground.len();
    transport.insert(basepoint, PartialBij::identity_on(ground, base_label));
    for &v in &walk.order {
        if v == basepoint {
            continue;
        }
        let d = walk.parent[&v];
        let prev = transport[&x.init(d)].clone();
        transport.insert(v, psi(site, pre, hp, d)?.after(&prev));
    }

    let mut loops = Vec::new();
    for &e in &side.edges {
        if walk.parent.values().any(|&p| p.undirected() == e.undirected()) {
            continue;
        }
        let to_start = walk.path_from_root(x, x.init(e));
        let from_end = walk.path_from_root(x, x.term(e));
        let mut edges = to_start.clone();
        edges.push(e);
        edges.extend(from_end.iter().rev().map(|d| d.rev()));
        let action = {
            let arrive = psi(site, pre, hp, e)?.after(&transport[&x.init(e)]);
            transport[&x.term(e)].inverse().after(&arrive)
        };
        loops.push(HolonomyLoop {
            chord: e,
            edges,
            action,
        });
    }

    // Close the image subgroup (tiny: at most |Λ|! elements).
    let mut image = vec![PartialBij::identity_on(ground, base_label)];
    let mut frontier = image.clone();
    while let Some(g) = frontier.pop() {
        for l in &loops {
            let h = l.action.after(&g);
            if !image.contains(&h) {
                image.push(h.clone());
                frontier.push(h);
            }
        }
    }
    image.sort_by_key(|b| {
        (0..ground)
            .map(|i| b.apply(i).map_or(0u8, |v| v as u8 + 1))
            .collect::<Vec<u8>>()
    });

    Ok(ParallelHolonomy {
        hyperplane: hp,
        side: side_sign,
        basepoint,
        base_label,
        loops,
        image,
    })
}

/// Checks that every parallel holonomy of every hyperplane side is trivial;
/// returns the first offender otherwise.
pub fn check_parallel_holonomies_trivial(
    site: &Site,
    pre: &PreDeltaCategory,
) -> Result<(), DeltaError> {
    for hp in site.hyperplanes.ids() {
        let product = site.certificates[hp.0 as usize]
            .product
            .as_ref()
            .ok_or(DeltaError::NotClean(hp.0))?;
        for sign in [SideSign::Pos, SideSign::Neg] {
            let side = product.side(sign);
            let basepoint = side.vertices[0];
            let ph = parallel_holonomy(site, pre, hp, sign, basepoint)?;
            if !ph.is_trivial() {
                let witness = ph
                    .loops
                    .iter()
                    .find(|l| !l.action.is_identity_on_domain())
                    .map(|l| l.edges.clone())
                    .unwrap_or_default();
                return Err(DeltaError::NontrivialParallelHolonomy {
                    hyperplane: hp.0,
                    side: sign,
                    witness_loop: witness,
                });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Extension to a full Δ-category
// ---------------------------------------------------------------------------

/// A Δ-category: one total bijection of the ground set per directed edge,
/// satisfying invertibility, square commutativity, and parallel transport.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaCategory {
    pub maps: Vec<Perm>,
}

impl DeltaCategory {
    pub fn map(&self, e: EdgeId) -> &Perm {
        &self.maps[e.0 as usize]
    }
}

/// Extends the pre-Δ-category to a Δ-category. Per hyperplane, the minimal
/// dual edge gets the base bijection (order-preserving between the sorted
/// end labels unless overridden), and every other dual edge receives the
/// transport-conjugated copy; triviality of the parallel holonomies makes
/// this path-independent.
pub fn extend_to_delta(
    site: &Site,
    pre: &PreDeltaCategory,
    base_choices: Option<&BTreeMap<u32, PartialBij>>,
) -> Result<DeltaCategory, DeltaError> {
    check_parallel_holonomies_trivial(site, pre)?;
    let x = &site.complex;
    let ground = site.assignment.ground.len();
    let mut maps: Vec<Option<Perm>> = vec![None; x.directed_edge_count()];

    for hp in site.hyperplanes.ids() {
        let product = site.certificates[hp.0 as usize]
            .product
            .as_ref()
            .ok_or(DeltaError::NotClean(hp.0))?;
        let class = &site.hyperplanes.get(hp).orientation_classes[0];
        let e0 = class[0];
        let lam_x0 = site.assignment.label_at_init(e0);
        let lam_y0 = site.assignment.label_of_end(e0);
        let base = match base_choices.and_then(|m| m.get(&hp.0)) {
            Some(choice) => {
                if choice.domain() != lam_x0 || choice.image() != lam_y0 {
                    return Err(DeltaError::BadBaseChoice(hp.0));
                }
                choice.clone()
            }
            None => PartialBij::order_preserving(ground, lam_x0, lam_y0)
                .expect("end labels have equal size"),
        };

        // Heads of the positive class lie on one side, tails on the other.
        let head_sign = if product.side_pos.dual_end_at.contains_key(&x.term(e0)) {
            SideSign::Pos
        } else {
            SideSign::Neg
        };
        let head_side = product.side(head_sign);
        let tail_side = product.side(head_sign.opposite());
        let head_walk = side_walk(x, head_side, x.term(e0));
        let tail_walk = side_walk(x, tail_side, x.init(e0));
        if head_walk.order.len() != head_side.vertices.len()
            || tail_walk.order.len() != tail_side.vertices.len()
        {
            return Err(DeltaError::PathDisconnected(hp.0));
        }
        let mut head_t: BTreeMap<VertexId, PartialBij> = BTreeMap::new();
        head_t.insert(x.term(e0), PartialBij::identity_on(ground, lam_y0));
        for &v in &head_walk.order {
            if v == x.term(e0) {
                continue;
            }
            let d = head_walk.parent[&v];
            let prev = head_t[&x.init(d)].clone();
            head_t.insert(v, psi(site, pre, hp, d)?.after(&prev));
        }
        let mut tail_t: BTreeMap<VertexId, PartialBij> = BTreeMap::new();
        tail_t.insert(x.init(e0), PartialBij::identity_on(ground, lam_x0));
        for &v in &tail_walk.order {
            if v == x.init(e0) {
                continue;
            }
            let d = tail_walk.parent[&v];
            let prev = tail_t[&x.init(d)].clone();
            tail_t.insert(v, psi(site, pre, hp, d)?.after(&prev));
        }

        for &e in class {
            let filler = head_t[&x.term(e)]
                .after(&base)
                .after(&tail_t[&x.init(e)].inverse());
            let total = pre
                .map(e)
                .disjoint_union(&filler)
                .and_then(|t| t.to_perm())
                .ok_or(DeltaError::BadBaseChoice(hp.0))?;
            maps[e.0 as usize] = Some(total.clone());
            maps[e.rev().0 as usize] = Some(total.inverse());
        }
    }

    let maps: Vec<Perm> = maps
        .into_iter()
        .map(|m| m.expect("every directed edge lies in exactly one orientation class"))
        .collect();
    let dc = DeltaCategory { maps };
    let report = verify_delta(site, &dc);
    if !report.is_empty() {
        return Err(DeltaError::Inconsistent(report));
    }
    Ok(dc)
}

/// Checks all Δ-category axioms: invertibility, full square commutativity,
/// parallel transport, and the derived transport of each edge's own dual
/// label.
pub fn verify_delta(site: &Site, dc: &DeltaCategory) -> Report {
    let mut report = Report::new();
    let x = &site.complex;
    let asg = &site.assignment;
    if dc.maps.len() != x.directed_edge_count() {
        report.push(CellRef::Global, "category has wrong edge count");
        return report;
    }
    for e in x.directed_edges() {
        if dc.map(e.rev()) != &dc.map(e).inverse() {
            report.push(CellRef::Edge(e.0), "reversal is not the inverse map");
        }
        let lam_x = asg.label_at_init(e);
        let lam_y = asg.label_of_end(e);
        if dc.map(e).image_of(lam_x) != lam_y {
            report.push(
                CellRef::Edge(e.0),
                "dual hyperplane label is not transported to the far end",
            );
        }
    }
    let square_violations: Vec<(u32, String)> = x
        .square_ids()
        .collect::<Vec<_>>()
        .par_iter()
        .flat_map_iter(|&s| {
            let mut local = Vec::new();
            let b = x.square(s);
            let via_y = dc.map(b.e2).after(dc.map(b.e1));
            let via_yp = dc.map(b.e1p).after(dc.map(b.e2p));
            if via_y != via_yp {
                local.push((s.0, "square commutativity fails".to_string()));
            }
            let lam2_x = asg.label_at_init(b.e2p);
            let lam2_y = asg.label_at_init(b.e2);
            if dc.map(b.e1).image_of(lam2_x) != lam2_y {
                local.push((s.0, "parallel transport along e1 fails".to_string()));
            }
            let lam1_x = asg.label_at_init(b.e1);
            let lam1_yp = asg.label_at_init(b.e1p);
            if dc.map(b.e2p).image_of(lam1_x) != lam1_yp {
                local.push((s.0, "parallel transport along e2' fails".to_string()));
            }
            local.into_iter()
        })
        .collect();
    for (s, rule) in square_violations {
        report.push(CellRef::Square(s), rule);
    }
    report.sort();
    report
}

// ---------------------------------------------------------------------------
// Lifting along covers
// ---------------------------------------------------------------------------

/// The per-vertex ground conjugators `𝔣_x̂ : Δ̂_x̂ → Δ_x` induced by a cover:
/// the link of a total vertex maps isomorphically onto the base link, and
/// ground-bijection recovery turns that into an element of `Sym(Δ)`.
pub fn link_conjugators(
    f: &CoverMap,
    base: &DeltaAssignment,
    total: &DeltaAssignment,
) -> Result<Vec<Perm>, DeltaError> {
    if !f.is_verified() {
        return Err(DeltaError::UnverifiedCover);
    }
    let l = build_kneser(&base.ground, base.n).expect("assignment parameters are valid");
    let mut out = Vec::with_capacity(f.total.vertex_count());
    for v in f.total.vertices() {
        let ends = f.total.ends_at(v);
        // Vertex map on L: the subset labeling ê goes to the subset labeling
        // f(ê).
        let mut iso = vec![usize::MAX; l.vertex_count()];
        for &end in ends {
            let from = l
                .vertex_index(total.label_of_end(end))
                .expect("total assignment labels are L-vertices");
            let to = l
                .vertex_index(base.label_of_end(f.map_edge(end)))
                .expect("base assignment labels are L-vertices");
            iso[from] = to;
        }
        let bij = recover_bijection(&l, &l, &iso).map_err(|source| DeltaError::RecoveryFailed {
            edge: v.0,
            source,
        })?;
        out.push(
            Perm::from_images(&bij.forward).expect("recovered map is a bijection"),
        );
    }
    Ok(out)
}

/// Lifts a Δ-category along a verified cover: `φ̂_ê = 𝔣_ŷ⁻¹ ∘ φ_{f(ê)} ∘ 𝔣_x̂`.
pub fn lift_delta(
    f: &CoverMap,
    base: &DeltaAssignment,
    dc: &DeltaCategory,
    total: &DeltaAssignment,
) -> Result<DeltaCategory, DeltaError> {
    let conj = link_conjugators(f, base, total)?;
    let maps = f
        .total
        .directed_edges()
        .map(|e| {
            let fx = &conj[f.total.init(e).0 as usize];
            let fy = &conj[f.total.term(e).0 as usize];
            fy.inverse().after(dc.map(f.map_edge(e))).after(fx)
        })
        .collect();
    Ok(DeltaCategory { maps })
}

/// Lifts a pre-Δ-category along a verified cover the same way. By
/// uniqueness this must coincide with a fresh build on the total space.
pub fn lift_pre_delta(
    f: &CoverMap,
    base: &DeltaAssignment,
    pre: &PreDeltaCategory,
    total: &DeltaAssignment,
) -> Result<PreDeltaCategory, DeltaError> {
    let conj = link_conjugators(f, base, total)?;
    let ground = base.ground.len();
    let maps = f
        .total
        .directed_edges()
        .map(|e| {
            let fx = conj[f.total.init(e).0 as usize].clone();
            let fy_inv = conj[f.total.term(e).0 as usize].inverse();
            let fx_partial = PartialBij::identity_on(ground, base.ground.full());
            let _ = fx_partial;
            let as_partial = |p: &Perm| {
                PartialBij::from_pairs(
                    ground,
                    &(0..ground).map(|i| (i, p.apply(i))).collect::<Vec<_>>(),
                )
                .expect("permutations are bijections")
            };
            as_partial(&fy_inv)
                .after(pre.map(f.map_edge(e)))
                .after(&as_partial(&fx))
        })
        .collect();
    Ok(PreDeltaCategory { maps })
}

/// Pulls an assignment back along a cover: the end label of `ê` is the end
/// label of `f(ê)`. The induced link conjugators are then all trivial.
pub fn pullback_assignment(f: &CoverMap, base: &DeltaAssignment) -> DeltaAssignment {
    DeltaAssignment {
        ground: base.ground.clone(),
        n: base.n,
        end_labels: f
            .total
            .directed_edges()
            .map(|e| base.label_of_end(f.map_edge(e)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{davis_quotient, sum_involutions, voltage_cover, VoltageAssignment};
    use crate::instances;
    use crate::kneser::build_kneser;
    use crate::label::LabelSet;

    fn theta_site() -> Site {
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        Site::new(instances::theta_graph(), &l).unwrap()
    }

    fn petersen_quotient_site() -> Site {
        let l = build_kneser(&LabelSet::numeric(5), 2).unwrap();
        let dq = davis_quotient(&l, &sum_involutions(&l)).unwrap();
        Site::with_assignment(dq.complex, dq.assignment)
    }

    #[test]
    fn theta_pre_delta_is_forced_singletons() {
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        for e in site.complex.directed_edges() {
            assert_eq!(pre.map(e).domain().len(), 1);
        }
        assert!(verify_pre_delta(&site, &pre).is_empty());
    }

    #[test]
    fn davis_pre_delta_verifies() {
        let site = petersen_quotient_site();
        let pre = build_pre_delta(&site).unwrap();
        let report = verify_pre_delta(&site, &pre);
        assert!(report.is_empty(), "{}", report);
    }

    #[test]
    fn corrupted_pre_delta_detected() {
        let site = petersen_quotient_site();
        let mut pre = build_pre_delta(&site).unwrap();
        // Swap two values of one map.
        let e = EdgeId(0);
        let dom: Vec<usize> = pre.map(e).domain().iter().collect();
        let a0 = pre.maps[0].apply(dom[0]).unwrap();
        let a1 = pre.maps[0].apply(dom[1]).unwrap();
        let mut pairs: Vec<(usize, usize)> = dom
            .iter()
            .map(|&i| (i, pre.maps[0].apply(i).unwrap()))
            .collect();
        pairs[0].1 = a1;
        pairs[1].1 = a0;
        pre.maps[0] =
            PartialBij::from_pairs(site.assignment.ground.len(), &pairs).unwrap();
        let report = verify_pre_delta(&site, &pre);
        assert!(!report.is_empty());
    }

    #[test]
    fn graph_parallel_holonomy_is_trivial() {
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        assert!(check_parallel_holonomies_trivial(&site, &pre).is_ok());
    }

    #[test]
    fn davis_parallel_holonomies_trivial_and_sides_loop() {
        let site = petersen_quotient_site();
        let pre = build_pre_delta(&site).unwrap();
        // Sides here are K4 graphs, so there are genuine loops to transport
        // around; the holonomy is still trivial.
        let hp = crate::hyperplane::HyperplaneId(0);
        let product = site.certificates[0].product.as_ref().unwrap();
        let basepoint = product.side_pos.vertices[0];
        let ph = parallel_holonomy(&site, &pre, hp, SideSign::Pos, basepoint).unwrap();
        assert!(!ph.loops.is_empty());
        assert!(ph.is_trivial());
        assert!(check_parallel_holonomies_trivial(&site, &pre).is_ok());
    }

    #[test]
    fn holonomy_basepoint_independence_up_to_conjugacy() {
        let site = petersen_quotient_site();
        let pre = build_pre_delta(&site).unwrap();
        let hp = crate::hyperplane::HyperplaneId(3);
        let product = site.certificates[3].product.as_ref().unwrap();
        let side = &product.side_pos;
        let p = side.vertices[0];
        let q = side.vertices[1];
        let ph_p = parallel_holonomy(&site, &pre, hp, SideSign::Pos, p).unwrap();
        let ph_q = parallel_holonomy(&site, &pre, hp, SideSign::Pos, q).unwrap();
        // Conjugate by the transport along a connecting parallel path.
        let walk = side_walk(&site.complex, side, p);
        let path = walk.path_from_root(&site.complex, q);
        let t = psi_path(&site, &pre, hp, &path, ph_p.base_label).unwrap();
        let conjugated: Vec<PartialBij> = ph_p
            .image
            .iter()
            .map(|g| t.clone().after(g).after(&t.inverse()))
            .collect();
        for c in &conjugated {
            assert!(
                ph_q.image.contains(c),
                "conjugated element missing from the other image"
            );
        }
        assert_eq!(ph_p.image.len(), ph_q.image.len());
    }

    #[test]
    fn extend_theta_and_verify() {
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        assert!(verify_delta(&site, &dc).is_empty());
        // Canonical labels make every map the identity here.
        for e in site.complex.directed_edges() {
            assert!(dc.map(e).is_identity());
        }
    }

    #[test]
    fn extend_davis_and_verify() {
        let site = petersen_quotient_site();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        let report = verify_delta(&site, &dc);
        assert!(report.is_empty(), "{}", report);
    }

    #[test]
    fn base_choice_changes_category_but_not_validity() {
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        let ground = site.assignment.ground.len();
        let e0 = site.hyperplanes.get(crate::hyperplane::HyperplaneId(0)).orientation_classes[0][0];
        let lam_x = site.assignment.label_at_init(e0);
        let lam_y = site.assignment.label_of_end(e0);
        // The swapped (non-order-preserving) bijection.
        let dom: Vec<usize> = lam_x.iter().collect();
        let img: Vec<usize> = lam_y.iter().collect();
        let swapped =
            PartialBij::from_pairs(ground, &[(dom[0], img[1]), (dom[1], img[0])]).unwrap();
        let mut choices = BTreeMap::new();
        choices.insert(0u32, swapped);
        let dc = extend_to_delta(&site, &pre, Some(&choices)).unwrap();
        assert!(verify_delta(&site, &dc).is_empty());
        let canonical = extend_to_delta(&site, &pre, None).unwrap();
        assert_ne!(dc, canonical);
    }

    #[test]
    fn bad_base_choice_rejected() {
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        let ground = site.assignment.ground.len();
        let mut choices = BTreeMap::new();
        // Wrong domain entirely.
        choices.insert(
            0u32,
            PartialBij::identity_on(ground, Subset::from_indices([0])),
        );
        assert!(matches!(
            extend_to_delta(&site, &pre, Some(&choices)),
            Err(DeltaError::BadBaseChoice(0))
        ));
    }

    #[test]
    fn mutate_delta_detected() {
        let site = petersen_quotient_site();
        let pre = build_pre_delta(&site).unwrap();
        let mut dc = extend_to_delta(&site, &pre, None).unwrap();
        // Replace one map by a non-transporting bijection: swap the images
        // of the dual label and the rest.
        let e = EdgeId(0);
        let lam = site.assignment.label_at_init(e);
        let other = site.assignment.ground.full().minus(lam);
        let mut images: Vec<usize> = dc.map(e).images().collect();
        images.swap(lam.iter().next().unwrap(), other.iter().next().unwrap());
        dc.maps[0] = Perm::from_images(&images).unwrap();
        let report = verify_delta(&site, &dc);
        assert!(!report.is_empty());
        let text = report.to_string();
        assert!(
            text.contains("transport") || text.contains("commutativity") || text.contains("inverse"),
            "{}",
            text
        );
    }

    #[test]
    fn lift_pre_delta_matches_fresh_build() {
        // Uniqueness: lifting the pre-category of the theta graph along a
        // voltage cover coincides with building it on the cover directly.
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        let mut va = VoltageAssignment::trivial(&site.complex, 2);
        va.gains[1] = Perm::from_images(&[1, 0]).unwrap();
        let f = voltage_cover(&site.complex, &va).unwrap();
        let total_site = Site::new(f.total.clone(), &l).unwrap();
        let lifted = lift_pre_delta(&f, &site.assignment, &pre, &total_site.assignment).unwrap();
        let fresh = build_pre_delta(&total_site).unwrap();
        assert_eq!(lifted, fresh);
    }

    #[test]
    fn lift_delta_along_identity() {
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        let f = CoverMap::identity(&site.complex);
        let lifted = lift_delta(&f, &site.assignment, &dc, &site.assignment).unwrap();
        assert_eq!(lifted, dc);
    }

    #[test]
    fn lift_delta_verifies_on_cover() {
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        let mut va = VoltageAssignment::trivial(&site.complex, 2);
        va.gains[2] = Perm::from_images(&[1, 0]).unwrap();
        let f = voltage_cover(&site.complex, &va).unwrap();
        let total_site = Site::new(f.total.clone(), &l).unwrap();
        let lifted = lift_delta(&f, &site.assignment, &dc, &total_site.assignment).unwrap();
        let report = verify_delta(&total_site, &lifted);
        assert!(report.is_empty(), "{}", report);
    }
}
