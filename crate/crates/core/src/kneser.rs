//! Kneser complexes: flag complexes on the `n`-element subsets of a finite
//! ground set, with adjacency given by disjointness.
//!
//! For `|Δ| = nd + 1` the complex is `(d−1)`-dimensional; `K_2({1..5})` is
//! the Petersen graph. The key operation here is [`recover_bijection`]: a
//! simplicial isomorphism of Kneser complexes over grounds of size `≠ 2n` is
//! induced by a unique bijection of the ground sets, and that bijection can
//! be read off by intersecting vertex images.

use crate::label::{n_subsets, LabelSet, PartialBij, Subset};

/// The flag complex on `n`-subsets of a ground set, adjacency = disjointness.
///
/// Vertices are listed in the canonical order (lexicographic by ascending
/// label indices); every deterministic choice downstream leans on this order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KneserComplex {
    ground: LabelSet,
    n: usize,
    vertices: Vec<Subset>,
    adjacency: Vec<Vec<bool>>,
    /// All simplices grouped by dimension; `simplices[d]` holds the
    /// `(d+1)`-cliques as ascending vertex-index vectors.
    simplices: Vec<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KneserError {
    #[error("n = {n} out of range for a ground set of size {ground}")]
    NOutOfRange { n: usize, ground: usize },
    #[error("ground sets have mismatched parameters (sizes {0} vs {1})")]
    GroundMismatch(usize, usize),
    #[error("ground size {0} equals 2n; the ground bijection is not determined")]
    AmbiguousGround(usize),
    #[error("map is not induced by a ground bijection: {reason}")]
    NotInduced { reason: String },
}

impl KneserComplex {
    pub fn ground(&self) -> &LabelSet {
        &self.ground
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_set(&self, v: usize) -> Subset {
        self.vertices[v]
    }

    pub fn vertices(&self) -> &[Subset] {
        &self.vertices
    }

    pub fn vertex_index(&self, s: Subset) -> Option<usize> {
        self.vertices.iter().position(|&v| v == s)
    }

    pub fn are_adjacent(&self, u: usize, v: usize) -> bool {
        self.adjacency[u][v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].iter().filter(|&&b| b).count()
    }

    pub fn edge_count(&self) -> usize {
        self.simplices.get(1).map_or(0, |e| e.len())
    }

    /// Undirected edges as index pairs `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.simplices
            .get(1)
            .into_iter()
            .flatten()
            .map(|e| (e[0] as usize, e[1] as usize))
    }

    /// Dimension of the complex (−1 when empty).
    pub fn dimension(&self) -> isize {
        self.simplices.len() as isize - 1
    }

    pub fn simplices_of_dim(&self, dim: usize) -> &[Vec<u32>] {
        self.simplices.get(dim).map_or(&[], |s| s.as_slice())
    }

    /// Neighbor indices of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[v]
            .iter()
            .enumerate()
            .filter_map(|(u, &b)| b.then_some(u))
    }
}

/// Builds `K_n(Δ)` over the given ground set.
pub fn build_kneser(delta: &LabelSet, n: usize) -> Result<KneserComplex, KneserError> {
    if n == 0 || n > delta.len() {
        return Err(KneserError::NOutOfRange {
            n,
            ground: delta.len(),
        });
    }
    Ok(build_unchecked(delta.clone(), n))
}

fn build_unchecked(ground: LabelSet, n: usize) -> KneserComplex {
    let vertices = n_subsets(ground.len(), n);
    let m = vertices.len();
    let mut adjacency = vec![vec![false; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            if vertices[i].is_disjoint(vertices[j]) {
                adjacency[i][j] = true;
                adjacency[j][i] = true;
            }
        }
    }
    let simplices = flag_simplices(&adjacency);
    KneserComplex {
        ground,
        n,
        vertices,
        adjacency,
        simplices,
    }
}

/// Enumerates all cliques of the adjacency graph, grouped by dimension.
/// Pigeonhole bounds the clique size at `⌊|Δ|/n⌋`, so nothing is truncated.
fn flag_simplices(adjacency: &[Vec<bool>]) -> Vec<Vec<Vec<u32>>> {
    let m = adjacency.len();
    let mut by_dim: Vec<Vec<Vec<u32>>> = Vec::new();
    if m == 0 {
        return by_dim;
    }
    by_dim.push((0..m as u32).map(|v| vec![v]).collect());
    loop {
        let prev = by_dim.last().unwrap();
        let mut next: Vec<Vec<u32>> = Vec::new();
        for clique in prev {
            let last = *clique.last().unwrap() as usize;
            for v in (last + 1)..m {
                if clique.iter().all(|&u| adjacency[u as usize][v]) {
                    let mut bigger = clique.clone();
                    bigger.push(v as u32);
                    next.push(bigger);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        by_dim.push(next);
    }
    by_dim
}

/// The embedded sub-complex `K_n(σ) ⊆ K_n(Δ)` together with the vertex
/// inclusion (indices into the ambient complex).
pub struct SubKneser {
    pub complex: KneserComplex,
    /// `inclusion[i]` is the ambient vertex index of local vertex `i`.
    pub inclusion: Vec<usize>,
}

/// Restricts to the labels in `sigma`; an empty complex when `|σ| < n`.
pub fn sub_kneser(ambient: &KneserComplex, sigma: Subset) -> SubKneser {
    let labels: Vec<String> = sigma
        .iter()
        .map(|i| ambient.ground.label(i).to_string())
        .collect();
    let ground = LabelSet::new(labels).expect("labels of a subset stay distinct");
    // Local subsets are over re-indexed labels; map back for the inclusion.
    let local = build_unchecked(ground, ambient.n);
    let sigma_indices: Vec<usize> = sigma.iter().collect();
    let inclusion = local
        .vertices
        .iter()
        .map(|&s| {
            let ambient_set = Subset::from_indices(s.iter().map(|i| sigma_indices[i]));
            ambient
                .vertex_index(ambient_set)
                .expect("subset of sigma is a subset of delta")
        })
        .collect();
    SubKneser {
        complex: local,
        inclusion,
    }
}

/// A bijection between two ground sets, stored as images by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetBijection {
    pub source: LabelSet,
    pub target: LabelSet,
    /// `forward[i]` is the target index of source index `i`.
    pub forward: Vec<usize>,
}

impl SetBijection {
    pub fn apply(&self, i: usize) -> usize {
        self.forward[i]
    }

    pub fn inverse_apply(&self, j: usize) -> usize {
        self.forward.iter().position(|&v| v == j).expect("bijection")
    }

    pub fn image_of(&self, s: Subset) -> Subset {
        Subset::from_indices(s.iter().map(|i| self.forward[i]))
    }

    pub fn as_partial(&self) -> PartialBij {
        PartialBij::from_pairs(
            self.source.len(),
            &self.forward.iter().enumerate().map(|(i, &v)| (i, v)).collect::<Vec<_>>(),
        )
        .expect("bijection has no collisions")
    }
}

/// Recovers the unique ground bijection `b` inducing a vertex isomorphism
/// `iso: K1 → K2`, i.e. with `s(iso(v)) = b(s_v)` for every vertex.
///
/// For each ground element `a`, its image is pinned down as the sole element
/// of `⋂ { s(iso(v)) : a ∈ s_v }`; the result is then re-verified on every
/// vertex, so a vertex map that is not induced is always rejected.
pub fn recover_bijection(
    k1: &KneserComplex,
    k2: &KneserComplex,
    iso: &[usize],
) -> Result<SetBijection, KneserError> {
    let g1 = k1.ground.len();
    let g2 = k2.ground.len();
    if g1 != g2 || k1.n != k2.n {
        return Err(KneserError::GroundMismatch(g1, g2));
    }
    if g1 == 2 * k1.n {
        return Err(KneserError::AmbiguousGround(g1));
    }
    if iso.len() != k1.vertex_count() {
        return Err(KneserError::NotInduced {
            reason: format!(
                "vertex map has {} entries for {} vertices",
                iso.len(),
                k1.vertex_count()
            ),
        });
    }
    {
        let mut seen = vec![false; k2.vertex_count()];
        for &img in iso {
            if img >= k2.vertex_count() || seen[img] {
                return Err(KneserError::NotInduced {
                    reason: "vertex map is not a bijection".into(),
                });
            }
            seen[img] = true;
        }
    }

    let mut forward = Vec::with_capacity(g1);
    for a in 0..g1 {
        let mut meet: Option<Subset> = None;
        for (v, &s) in k1.vertices.iter().enumerate() {
            if s.contains(a) {
                let img = k2.vertices[iso[v]];
                meet = Some(match meet {
                    None => img,
                    Some(m) => m.intersect(img),
                });
            }
        }
        match meet {
            None => {
                // No vertex mentions `a`: only a singleton ground is forced.
                if g1 == 1 {
                    forward.push(0);
                } else {
                    return Err(KneserError::NotInduced {
                        reason: format!(
                            "ground element {} lies in no vertex; bijection undetermined",
                            k1.ground.label(a)
                        ),
                    });
                }
            }
            Some(m) => match m.sole() {
                Some(b) => forward.push(b),
                None => {
                    return Err(KneserError::NotInduced {
                        reason: format!(
                            "intersection over vertices containing {} has {} elements",
                            k1.ground.label(a),
                            m.len()
                        ),
                    })
                }
            },
        }
    }

    let bij = SetBijection {
        source: k1.ground.clone(),
        target: k2.ground.clone(),
        forward,
    };
    {
        let mut seen = vec![false; g2];
        for &v in &bij.forward {
            if seen[v] {
                return Err(KneserError::NotInduced {
                    reason: "recovered map is not injective".into(),
                });
            }
            seen[v] = true;
        }
    }
    for (v, &s) in k1.vertices.iter().enumerate() {
        if bij.image_of(s) != k2.vertices[iso[v]] {
            return Err(KneserError::NotInduced {
                reason: format!("vertex {} image disagrees with the recovered bijection", v),
            });
        }
    }
    Ok(bij)
}

/// The vertex permutation of `K` induced by a ground bijection.
pub fn induced_vertex_action(k: &KneserComplex, b: &SetBijection) -> Vec<usize> {
    k.vertices
        .iter()
        .map(|&s| k.vertex_index(b.image_of(s)).expect("bijections preserve n-subsets"))
        .collect()
}

/// Decides whether the 1-skeleton has an induced 4-cycle; returns a witness
/// cycle `[v1, v2, v3, v4]` (consecutive adjacent, diagonals non-adjacent)
/// when it has one.
pub fn is_square_free(k: &KneserComplex) -> Result<(), [usize; 4]> {
    let m = k.vertex_count();
    for a in 0..m {
        for b in (a + 1)..m {
            if !k.are_adjacent(a, b) {
                continue;
            }
            for c in 0..m {
                if c == a || c == b || !k.are_adjacent(b, c) || k.are_adjacent(a, c) {
                    continue;
                }
                // Keep `a` minimal in the witness; `d` completes a-b-c-d.
                for d in (a + 1)..m {
                    if d == b || d == c {
                        continue;
                    }
                    if k.are_adjacent(c, d) && k.are_adjacent(d, a) && !k.are_adjacent(b, d) {
                        return Err([a, b, c, d]);
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::Perm;

    fn k(ground: usize, n: usize) -> KneserComplex {
        build_kneser(&LabelSet::numeric(ground), n).unwrap()
    }

    fn binom(n: usize, k: usize) -> usize {
        if k > n {
            return 0;
        }
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn three_choose_two_has_no_edges() {
        let kc = k(3, 2);
        assert_eq!(kc.vertex_count(), 3);
        assert_eq!(kc.edge_count(), 0);
    }

    #[test]
    fn petersen_graph_shape() {
        // Independent oracle: enumerate all 2-subsets of {1..5} and count
        // disjoint pairs directly.
        let sets = n_subsets(5, 2);
        assert_eq!(sets.len(), 10);
        let mut edges = 0;
        for i in 0..sets.len() {
            for j in (i + 1)..sets.len() {
                if sets[i].is_disjoint(sets[j]) {
                    edges += 1;
                }
            }
        }
        assert_eq!(edges, 15);

        let p = k(5, 2);
        assert_eq!(p.vertex_count(), 10);
        assert_eq!(p.edge_count(), 15);
        assert!((0..10).all(|v| p.degree(v) == 3));
        assert!(is_square_free(&p).is_ok());
        assert_eq!(p.dimension(), 1);
    }

    #[test]
    fn counts_match_binomials_up_to_nine() {
        for ground in 1..=9 {
            for n in 1..=ground {
                let kc = k(ground, n);
                assert_eq!(kc.vertex_count(), binom(ground, n));
                for v in 0..kc.vertex_count() {
                    assert_eq!(kc.degree(v), binom(ground - n, n), "ground {ground} n {n}");
                }
            }
        }
    }

    #[test]
    fn kneser_dimension_formula() {
        // |Δ| = nd + 1 gives dimension d − 1.
        for (n, d) in [(2usize, 1usize), (2, 2), (2, 3), (3, 2)] {
            let kc = k(n * d + 1, n);
            assert_eq!(kc.dimension(), d as isize - 1, "n {n} d {d}");
        }
    }

    #[test]
    fn sub_kneser_cases() {
        let p = k(5, 2);
        let full = sub_kneser(&p, Subset::full(5));
        assert_eq!(full.complex.vertex_count(), 10);
        assert_eq!(full.inclusion, (0..10).collect::<Vec<_>>());

        let three = sub_kneser(&p, Subset::from_indices([2, 3, 4]));
        assert_eq!(three.complex.vertex_count(), 3);
        assert_eq!(three.complex.edge_count(), 0);
        for (i, &amb) in three.inclusion.iter().enumerate() {
            let local = three.complex.vertex_set(i);
            let expect = Subset::from_indices(local.iter().map(|j| [2, 3, 4][j]));
            assert_eq!(p.vertex_set(amb), expect);
        }

        let tiny = sub_kneser(&p, Subset::from_indices([0]));
        assert_eq!(tiny.complex.vertex_count(), 0);
    }

    #[test]
    fn sub_kneser_respects_stars() {
        // star(v) = v ∗ K_n(Δ − s_v): neighbors of v are exactly the vertices
        // of the complement sub-complex, with matching adjacency.
        for (ground, n) in [(5, 2), (7, 2), (7, 3)] {
            let kc = k(ground, n);
            for v in 0..kc.vertex_count() {
                let complement = Subset::full(ground).minus(kc.vertex_set(v));
                let sub = sub_kneser(&kc, complement);
                let nbrs: Vec<usize> = kc.neighbors(v).collect();
                assert_eq!(sub.inclusion, nbrs);
                for i in 0..sub.complex.vertex_count() {
                    for j in 0..sub.complex.vertex_count() {
                        assert_eq!(
                            sub.complex.are_adjacent(i, j),
                            i != j && kc.are_adjacent(sub.inclusion[i], sub.inclusion[j])
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn recover_identity() {
        let p = k(5, 2);
        let iso: Vec<usize> = (0..10).collect();
        let b = recover_bijection(&p, &p, &iso).unwrap();
        assert_eq!(b.forward, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn recover_all_120_permutations() {
        let p = k(5, 2);
        for perm in Perm::all(5) {
            let b = SetBijection {
                source: p.ground.clone(),
                target: p.ground.clone(),
                forward: perm.images().collect(),
            };
            let action = induced_vertex_action(&p, &b);
            let rec = recover_bijection(&p, &p, &action).unwrap();
            assert_eq!(rec.forward, b.forward);
        }
    }

    #[test]
    fn recover_rejects_non_isomorphism() {
        let p = k(5, 2);
        // Swap two vertices whose swap is not edge-preserving: vertex 0 is
        // {1,2} and vertex 1 is {1,3}; the transposition is not induced.
        let mut iso: Vec<usize> = (0..10).collect();
        iso.swap(0, 1);
        assert!(matches!(
            recover_bijection(&p, &p, &iso),
            Err(KneserError::NotInduced { .. })
        ));
    }

    #[test]
    fn recover_rejects_ambiguous_ground() {
        let kc = k(4, 2);
        let iso: Vec<usize> = (0..kc.vertex_count()).collect();
        assert!(matches!(
            recover_bijection(&kc, &kc, &iso),
            Err(KneserError::AmbiguousGround(4))
        ));
    }

    #[test]
    fn recover_singleton_ground_is_forced() {
        let a = build_kneser(&LabelSet::new(["x"]).unwrap(), 1).unwrap();
        let b = build_kneser(&LabelSet::new(["y"]).unwrap(), 1).unwrap();
        let rec = recover_bijection(&a, &b, &[0]).unwrap();
        assert_eq!(rec.forward, vec![0]);
    }

    #[test]
    fn square_free_cases() {
        assert!(is_square_free(&k(3, 2)).is_ok());
        assert!(is_square_free(&k(5, 2)).is_ok());
        let seven = k(7, 2);
        let witness = is_square_free(&seven).unwrap_err();
        // Verify the witness is a genuine induced square.
        let [a, b, c, d] = witness;
        assert!(seven.are_adjacent(a, b));
        assert!(seven.are_adjacent(b, c));
        assert!(seven.are_adjacent(c, d));
        assert!(seven.are_adjacent(d, a));
        assert!(!seven.are_adjacent(a, c));
        assert!(!seven.are_adjacent(b, d));
    }

    #[test]
    fn n_out_of_range() {
        assert!(build_kneser(&LabelSet::numeric(3), 0).is_err());
        assert!(build_kneser(&LabelSet::numeric(3), 4).is_err());
    }
}
