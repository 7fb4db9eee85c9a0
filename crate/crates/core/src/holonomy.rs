//! The global holonomy of a Δ-category: the permutation representation of
//! based loops on the ground set, its voltage-graph normal form (gains
//! trivial on a spanning tree), flatness, and the regular kernel cover on
//! which the lifted category is flat.

use std::collections::HashMap;

use crate::complex::{EdgeId, VertexId};
use crate::cover::{voltage_cover, CoverMap, VoltageAssignment};
use crate::deltacat::{pullback_assignment, verify_delta, DeltaCategory, DeltaError, Site};
use crate::label::Perm;
use crate::report::Report;

#[derive(Debug, Clone, thiserror::Error)]
pub enum HolonomyError {
    #[error("complex is not connected")]
    Disconnected,
    #[error("square boundary gains are not trivial:\n{0}")]
    Inconsistent(Report),
    #[error(transparent)]
    Delta(#[from] DeltaError),
    #[error("kernel cover construction failed: {0}")]
    Cover(String),
}

/// The holonomy in voltage normal form: all ground sets are identified with
/// the basepoint copy along a canonical spanning tree, making tree gains
/// trivial; the image subgroup is generated by the non-tree gains.
#[derive(Clone, Debug)]
pub struct GlobalHolonomy {
    pub basepoint: VertexId,
    /// Arriving tree edge per vertex (`None` at the basepoint).
    pub tree_parent: Vec<Option<EdgeId>>,
    /// Tree transport `t_v : Δ_basepoint → Δ_v` per vertex.
    pub transports: Vec<Perm>,
    /// Gain per directed edge; identity exactly on tree edges.
    pub gains: Vec<Perm>,
    /// The image subgroup, identity first, deterministic order.
    pub image: Vec<Perm>,
}

impl GlobalHolonomy {
    pub fn gain(&self, e: EdgeId) -> &Perm {
        &self.gains[e.0 as usize]
    }

    /// The holonomy of an edge loop at the basepoint: the composite of its
    /// per-edge maps, expressed in the basepoint copy.
    pub fn loop_gain(&self, edges: &[EdgeId]) -> Perm {
        let k = self.transports[0].len();
        edges
            .iter()
            .fold(Perm::identity(k), |acc, &e| self.gain(e).after(&acc))
    }

    pub fn is_trivial(&self) -> bool {
        self.image.len() == 1
    }
}

/// Computes the global holonomy of a verified Δ-category at `basepoint`.
pub fn global_holonomy(
    site: &Site,
    dc: &DeltaCategory,
    basepoint: VertexId,
) -> Result<GlobalHolonomy, HolonomyError> {
    let x = &site.complex;
    if !x.is_connected() {
        return Err(HolonomyError::Disconnected);
    }
    let forest = x.bfs_forest(basepoint);
    let k = site.assignment.ground.len();
    let mut transports = vec![Perm::identity(k); x.vertex_count()];
    for &v in &forest.order {
        if let Some(d) = forest.parent[v.0 as usize] {
            transports[v.0 as usize] = dc.map(d).after(&transports[x.init(d).0 as usize]);
        }
    }
    let gains: Vec<Perm> = x
        .directed_edges()
        .map(|e| {
            transports[x.term(e).0 as usize]
                .inverse()
                .after(dc.map(e))
                .after(&transports[x.init(e).0 as usize])
        })
        .collect();

    // Well-definedness: boundary gains of every square must cancel.
    let mut report = Report::new();
    for s in x.square_ids() {
        let b = x.square(s);
        let via_y = gains[b.e2.0 as usize].after(&gains[b.e1.0 as usize]);
        let via_yp = gains[b.e1p.0 as usize].after(&gains[b.e2p.0 as usize]);
        if via_y != via_yp {
            report.push(
                crate::report::CellRef::Square(s.0),
                "boundary gain product is not the identity",
            );
        }
    }
    if !report.is_empty() {
        return Err(HolonomyError::Inconsistent(report));
    }

    // Image subgroup: closure of the non-tree gains.
    let mut image = vec![Perm::identity(k)];
    let mut index: HashMap<Perm, usize> = HashMap::new();
    index.insert(image[0].clone(), 0);
    let generators: Vec<Perm> = x
        .undirected_edges()
        .filter(|&e| !forest.is_tree_edge(e))
        .map(|e| gains[e.0 as usize].clone())
        .collect();
    let mut head = 0;
    while head < image.len() {
        let g = image[head].clone();
        for gen in &generators {
            let h = gen.after(&g);
            if !index.contains_key(&h) {
                index.insert(h.clone(), image.len());
                image.push(h);
            }
        }
        head += 1;
    }

    Ok(GlobalHolonomy {
        basepoint,
        tree_parent: forest.parent,
        transports,
        gains,
        image,
    })
}

/// Whether the Δ-category's holonomy image is trivial.
pub fn is_flat(site: &Site, dc: &DeltaCategory) -> Result<bool, HolonomyError> {
    Ok(global_holonomy(site, dc, VertexId(0))?.is_trivial())
}

/// The kernel cover of a Δ-category with the flat lifted category on it.
#[derive(Debug)]
pub struct KernelCover {
    pub cover: CoverMap,
    /// Pullback link identification on the total space.
    pub assignment: crate::complex::DeltaAssignment,
    /// The lifted Δ-category; flat by construction and re-verified.
    pub delta: DeltaCategory,
    /// The deck group: the holonomy image, identity first.
    pub group: Vec<Perm>,
}

/// Builds the regular cover corresponding to the holonomy kernel: sheets are
/// image-group elements and each edge twists by left multiplication with its
/// gain. The lifted category is the pullback of the base category, and its
/// holonomy is trivial.
pub fn kernel_cover(site: &Site, dc: &DeltaCategory) -> Result<KernelCover, HolonomyError> {
    let gh = global_holonomy(site, dc, VertexId(0))?;
    let group = gh.image.clone();
    let degree = group.len();
    let index: HashMap<Perm, usize> = group
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i))
        .collect();
    let gains = site
        .complex
        .undirected_edges()
        .map(|e| {
            let g = gh.gain(e);
            Perm::from_images(
                &(0..degree)
                    .map(|i| index[&g.after(&group[i])])
                    .collect::<Vec<_>>(),
            )
            .expect("left multiplication permutes the group")
        })
        .collect();
    let va = VoltageAssignment { degree, gains };
    let cover =
        voltage_cover(&site.complex, &va).map_err(|e| HolonomyError::Cover(e.to_string()))?;
    let assignment = pullback_assignment(&cover, &site.assignment);
    // With the pullback assignment the link conjugators are trivial, so the
    // lift is the plain pullback of maps.
    let delta = DeltaCategory {
        maps: cover
            .total
            .directed_edges()
            .map(|e| dc.map(cover.map_edge(e)).clone())
            .collect(),
    };
    let total_site = Site::with_assignment(cover.total.clone(), assignment.clone());
    let report = verify_delta(&total_site, &delta);
    if !report.is_empty() {
        return Err(HolonomyError::Inconsistent(report));
    }
    Ok(KernelCover {
        cover,
        assignment,
        delta,
        group,
    })
}

/// The deck transformation of a kernel cover given by right translation with
/// the `h`-th group element, as a degree-1 self-cover of the total space.
pub fn deck_transformation(kc: &KernelCover, h: usize) -> CoverMap {
    let degree = kc.group.len();
    let index: HashMap<Perm, usize> = kc
        .group
        .iter()
        .enumerate()
        .map(|(i, g)| (g.clone(), i))
        .collect();
    let right: Vec<usize> = (0..degree)
        .map(|i| index[&kc.group[i].after(&kc.group[h])])
        .collect();
    let total = &kc.cover.total;
    let sheet_map = |id: u32| -> u32 {
        let cell = id / degree as u32;
        let sheet = (id % degree as u32) as usize;
        cell * degree as u32 + right[sheet] as u32
    };
    let mut f = CoverMap::new(
        total.clone(),
        total.clone(),
        (0..total.vertex_count() as u32).map(sheet_map).collect(),
        (0..total.directed_edge_count() as u32)
            .map(|e| {
                let und = e / 2;
                let dir = e % 2;
                2 * sheet_map(und) + dir
            })
            .collect(),
        (0..total.square_count() as u32).map(sheet_map).collect(),
        (0..total.cube_count() as u32).map(sheet_map).collect(),
        1,
    );
    f.verify();
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::{compose_covers, davis_quotient, standard_involutions, sum_involutions};
    use crate::deltacat::{build_pre_delta, extend_to_delta};
    use crate::instances;
    use crate::kneser::build_kneser;
    use crate::label::{LabelSet, PartialBij};
    use std::collections::BTreeMap;

    fn theta_site() -> Site {
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        Site::new(instances::theta_graph(), &l).unwrap()
    }

    fn petersen_site() -> Site {
        let l = build_kneser(&LabelSet::numeric(3), 2).unwrap();
        Site::new(instances::petersen_complex(), &l).unwrap()
    }

    #[test]
    fn tree_complex_has_trivial_holonomy() {
        // A single edge is a tree whose links are one isolated point each.
        let x = crate::complex::complex_from_cells(2, &[(0, 1)], &[], &[]).unwrap();
        let l = build_kneser(&LabelSet::numeric(1), 1).unwrap();
        let site = Site::new(x, &l).unwrap();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        let gh = global_holonomy(&site, &dc, VertexId(0)).unwrap();
        assert!(gh.is_trivial());
        assert!(is_flat(&site, &dc).unwrap());
    }

    #[test]
    fn theta_canonical_category_is_flat() {
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        assert!(is_flat(&site, &dc).unwrap());
    }

    #[test]
    fn theta_twisted_base_choice_flattens() {
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        let ground = site.assignment.ground.len();
        // Twist one hyperplane's base bijection.
        let e0 = site
            .hyperplanes
            .get(crate::hyperplane::HyperplaneId(0))
            .orientation_classes[0][0];
        let lam_x: Vec<usize> = site.assignment.label_at_init(e0).iter().collect();
        let lam_y: Vec<usize> = site.assignment.label_of_end(e0).iter().collect();
        let swapped =
            PartialBij::from_pairs(ground, &[(lam_x[0], lam_y[1]), (lam_x[1], lam_y[0])]).unwrap();
        let mut choices = BTreeMap::new();
        choices.insert(0u32, swapped);
        let dc = extend_to_delta(&site, &pre, Some(&choices)).unwrap();
        assert!(!is_flat(&site, &dc).unwrap());

        let kc = kernel_cover(&site, &dc).unwrap();
        assert!(kc.cover.is_verified());
        assert!(kc.cover.degree >= 2);
        let total_site = Site::with_assignment(kc.cover.total.clone(), kc.assignment.clone());
        assert!(is_flat(&total_site, &kc.delta).unwrap());
    }

    #[test]
    fn basepoint_change_conjugates_image() {
        let site = petersen_site();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        let gh0 = global_holonomy(&site, &dc, VertexId(0)).unwrap();
        let gh1 = global_holonomy(&site, &dc, VertexId(1)).unwrap();
        assert_eq!(gh0.image.len(), gh1.image.len());
        // Conjugating by the transport of any connecting path carries one
        // image onto the other.
        let t = gh0.transports[1].clone();
        for g in &gh0.image {
            let conj = t.clone().after(g).after(&t.inverse());
            assert!(gh1.image.contains(&conj));
        }
    }

    #[test]
    fn loop_gain_matches_direct_composition() {
        let site = petersen_site();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        let gh = global_holonomy(&site, &dc, VertexId(0)).unwrap();
        // A loop at vertex 0 through a non-tree edge.
        let x = &site.complex;
        let forest = x.bfs_forest(VertexId(0));
        let chord = x
            .undirected_edges()
            .find(|&e| !forest.is_tree_edge(e))
            .unwrap();
        let mut edges = forest.path_from_root(x, x.init(chord));
        edges.push(chord);
        let back = forest.path_from_root(x, x.term(chord));
        edges.extend(back.iter().rev().map(|d| d.rev()));
        // Direct composite of the category maps around the loop.
        let direct = edges.iter().fold(
            crate::label::Perm::identity(site.assignment.ground.len()),
            |acc, &e| dc.map(e).after(&acc),
        );
        assert_eq!(gh.loop_gain(&edges), direct);
    }

    #[test]
    fn petersen_admits_no_flat_category() {
        // Exhaustive over all 2^15 base-choice combinations: the holonomy
        // image is never trivial; equivalently the Petersen graph has no
        // proper 3-edge-coloring.
        let site = petersen_site();
        let pre = build_pre_delta(&site).unwrap();
        let ground = site.assignment.ground.len();
        let hp_count = site.hyperplanes.len();
        assert_eq!(hp_count, 15);
        let mut found_flat = false;
        for mask in 0u32..(1 << hp_count) {
            let mut choices = BTreeMap::new();
            for hp in 0..hp_count {
                if mask & (1 << hp) != 0 {
                    let e0 = site
                        .hyperplanes
                        .get(crate::hyperplane::HyperplaneId(hp as u32))
                        .orientation_classes[0][0];
                    let lam_x: Vec<usize> =
                        site.assignment.label_at_init(e0).iter().collect();
                    let lam_y: Vec<usize> =
                        site.assignment.label_of_end(e0).iter().collect();
                    let swapped = PartialBij::from_pairs(
                        ground,
                        &[(lam_x[0], lam_y[1]), (lam_x[1], lam_y[0])],
                    )
                    .unwrap();
                    choices.insert(hp as u32, swapped);
                }
            }
            let dc = extend_to_delta(&site, &pre, Some(&choices)).unwrap();
            if is_flat(&site, &dc).unwrap() {
                found_flat = true;
                break;
            }
        }
        assert!(!found_flat);
    }

    #[test]
    fn petersen_kernel_cover_flattens() {
        let site = petersen_site();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        let kc = kernel_cover(&site, &dc).unwrap();
        assert!(kc.cover.is_verified());
        assert!(kc.group.len() <= 6);
        let total_site = Site::with_assignment(kc.cover.total.clone(), kc.assignment.clone());
        assert!(is_flat(&total_site, &kc.delta).unwrap());
        // The cover stays cubic.
        assert!(kc
            .cover
            .total
            .vertices()
            .all(|v| kc.cover.total.ends_at(v).len() == 3));
    }

    #[test]
    fn kernel_cover_deck_action_is_regular() {
        let site = theta_site();
        let pre = build_pre_delta(&site).unwrap();
        let ground = site.assignment.ground.len();
        // Twist two hyperplanes to get a nontrivial image.
        let mut choices = BTreeMap::new();
        for hp in [0u32, 1] {
            let e0 = site
                .hyperplanes
                .get(crate::hyperplane::HyperplaneId(hp))
                .orientation_classes[0][0];
            let lam_x: Vec<usize> = site.assignment.label_at_init(e0).iter().collect();
            let lam_y: Vec<usize> = site.assignment.label_of_end(e0).iter().collect();
            let swapped =
                PartialBij::from_pairs(ground, &[(lam_x[0], lam_y[1]), (lam_x[1], lam_y[0])])
                    .unwrap();
            choices.insert(hp, swapped);
        }
        let dc = extend_to_delta(&site, &pre, Some(&choices)).unwrap();
        let kc = kernel_cover(&site, &dc).unwrap();
        let degree = kc.group.len();
        assert!(degree > 1);
        for h in 0..degree {
            let deck = deck_transformation(&kc, h);
            assert!(deck.is_verified(), "deck {} is an automorphism", h);
            // Commutes with the projection.
            let composed = compose_covers(&kc.cover, &deck).unwrap();
            assert_eq!(composed.zero_map, kc.cover.zero_map);
            assert_eq!(composed.one_map, kc.cover.one_map);
            // Free away from the identity.
            if h != 0 {
                assert!(deck
                    .zero_map
                    .iter()
                    .enumerate()
                    .all(|(v, &img)| v as u32 != img));
            }
        }
        // Transitive on the fiber over vertex 0.
        let fiber: Vec<u32> = (0..degree as u32).collect();
        for &a in &fiber {
            let mut reached = false;
            for h in 0..degree {
                let deck = deck_transformation(&kc, h);
                if deck.zero_map[0] == a {
                    reached = true;
                    break;
                }
            }
            assert!(reached);
        }
    }

    #[test]
    fn davis_quotients_flatten_cheaply() {
        for (labels, n, images) in [(3usize, 2usize, 0usize), (5, 2, 1)] {
            let l = build_kneser(&LabelSet::numeric(labels), n).unwrap();
            let dq = if images == 0 {
                davis_quotient(&l, &standard_involutions(l.vertex_count())).unwrap()
            } else {
                davis_quotient(&l, &sum_involutions(&l)).unwrap()
            };
            let site = Site::with_assignment(dq.complex, dq.assignment);
            let pre = build_pre_delta(&site).unwrap();
            let dc = extend_to_delta(&site, &pre, None).unwrap();
            let kc = kernel_cover(&site, &dc).unwrap();
            assert!(kc.cover.is_verified());
            let total_site =
                Site::with_assignment(kc.cover.total.clone(), kc.assignment.clone());
            assert!(is_flat(&total_site, &kc.delta).unwrap());
        }
    }

    #[test]
    fn disconnected_complex_rejected() {
        let x = crate::complex::complex_from_cells(4, &[(0, 1), (2, 3)], &[], &[]).unwrap();
        let l = build_kneser(&LabelSet::numeric(1), 1).unwrap();
        let site = Site::new(x, &l).unwrap();
        let pre = build_pre_delta(&site).unwrap();
        let dc = extend_to_delta(&site, &pre, None).unwrap();
        assert!(matches!(
            global_holonomy(&site, &dc, VertexId(0)),
            Err(HolonomyError::Disconnected)
        ));
    }
}
