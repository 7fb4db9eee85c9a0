//! Small standard instances and pathology fixtures used across tests and
//! exercised from the CLI examples.

use crate::complex::{
    complex_from_cells, cube_corner_at, cube_edge_slot, CubeComplex, RawThreeCube,
};
use crate::kneser::build_kneser;
use crate::label::LabelSet;

/// Two vertices joined by three parallel edges.
pub fn theta_graph() -> CubeComplex {
    complex_from_cells(2, &[(0, 1), (0, 1), (0, 1)], &[], &[]).unwrap()
}

/// A single vertex with one loop edge.
pub fn loop_graph() -> CubeComplex {
    complex_from_cells(1, &[(0, 0)], &[], &[]).unwrap()
}

/// The Petersen graph as a 3-regular cube complex.
pub fn petersen_complex() -> CubeComplex {
    let k = build_kneser(&LabelSet::numeric(5), 2).unwrap();
    let edges: Vec<(u32, u32)> = k.edges().map(|(a, b)| (a as u32, b as u32)).collect();
    complex_from_cells(k.vertex_count() as u32, &edges, &[], &[]).unwrap()
}

/// The 1-skeleton of the 3-cube: 8 vertices, 12 edges, no squares.
pub fn cube3_skeleton() -> CubeComplex {
    let mut edges = Vec::new();
    for b in 0u32..8 {
        for axis in 0..3 {
            let c = b ^ (1 << axis);
            if b < c {
                edges.push((b, c));
            }
        }
    }
    complex_from_cells(8, &edges, &[], &[]).unwrap()
}

/// A `k×1` strip of squares (grid graph with the square cells filled).
pub fn square_strip(k: u32) -> CubeComplex {
    // Bottom row 0..=k, top row k+1..=2k+1.
    let top = |i: u32| k + 1 + i;
    let mut edges = Vec::new();
    for i in 0..k {
        edges.push((i, i + 1)); // bottoms: undirected ids 0..k
    }
    for i in 0..k {
        edges.push((top(i), top(i + 1))); // tops: ids k..2k
    }
    for i in 0..=k {
        edges.push((i, top(i))); // verticals: ids 2k..3k+1
    }
    let fwd = |und: u32| 2 * und;
    let squares: Vec<[u32; 4]> = (0..k)
        .map(|i| {
            [
                fwd(i),              // e1: bottom, i -> i+1
                fwd(2 * k + i + 1),  // e2: vertical at i+1
                fwd(k + i),          // e1': top, top(i) -> top(i+1)
                fwd(2 * k + i),      // e2': vertical at i
            ]
        })
        .collect();
    complex_from_cells(2 * (k + 1), &edges, &squares, &[]).unwrap()
}

/// One square with all four corners identified: a flat torus point. Both
/// hyperplanes are embedded and 2-sided but self-osculate at the vertex.
pub fn one_square_torus() -> CubeComplex {
    // Loops a (undirected 0) and b (undirected 1); boundary (a, b, a, b).
    complex_from_cells(1, &[(0, 0), (0, 0)], &[[0, 2, 0, 2]], &[]).unwrap()
}

/// One square glued as a Klein bottle: the `a` hyperplane is 1-sided
/// (opposite boundary edges carry opposite directions of the same loop).
pub fn klein_square() -> CubeComplex {
    complex_from_cells(1, &[(0, 0), (0, 0)], &[[0, 2, 1, 2]], &[]).unwrap()
}

/// Two squares glued along two consecutive boundary edges; the shared middle
/// corner has a repeated link edge, so the complex is not NPC.
pub fn doubled_square() -> CubeComplex {
    // Vertices: x=0, y=1, z=2, y'_1=3, y'_2=4.
    let edges = [(0, 1), (1, 2), (3, 2), (0, 3), (4, 2), (0, 4)];
    let squares = [[0, 2, 4, 6], [0, 2, 8, 10]];
    complex_from_cells(5, &edges, &squares, &[]).unwrap()
}

/// The solid 3-cube: 8 vertices, 12 edges, 6 squares, one 3-cube.
pub fn solid_cube() -> CubeComplex {
    let mut edges = Vec::new();
    for axis in 0..3usize {
        for pos in 0..4usize {
            let lo = cube_corner_at(axis, 0, pos) as u32;
            let hi = cube_corner_at(axis, 1, pos) as u32;
            edges.push((lo, hi)); // undirected id = cube_edge_slot(axis, pos)
        }
    }
    // Directed ascending edge along `axis` out of corner `c`.
    let ascending = |c: usize, axis: usize| -> u32 {
        let others: [usize; 2] = match axis {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        };
        let pos = ((c >> others[0]) & 1) | (((c >> others[1]) & 1) << 1);
        2 * cube_edge_slot(axis, pos) as u32
    };
    let mut squares = Vec::new();
    for axis in 0..3usize {
        for side in 0..2usize {
            let (u, v): (usize, usize) = match axis {
                0 => (1, 2),
                1 => (0, 2),
                _ => (0, 1),
            };
            let c00 = cube_corner_at(axis, side, 0);
            let c10 = c00 | (1 << u);
            let c01 = c00 | (1 << v);
            squares.push([
                ascending(c00, u),
                ascending(c10, v),
                ascending(c01, u),
                ascending(c00, v),
            ]);
        }
    }
    let mut cube_edges = [0u32; 12];
    for (slot, e) in cube_edges.iter_mut().enumerate() {
        *e = 2 * slot as u32;
    }
    let cube = RawThreeCube {
        corners: [0, 1, 2, 3, 4, 5, 6, 7],
        edges: cube_edges,
        faces: [0, 1, 2, 3, 4, 5],
    };
    complex_from_cells(8, &edges, &squares, &[cube]).unwrap()
}

/// Cuts a square complex along a certified clean 2-sided hyperplane and
/// reglues with a graph automorphism `alpha` of the head side. Links are
/// unchanged, so the result is again an `L`-complex, but transports around
/// side loops pick up the twist. Rejects hyperplanes crossed by 3-cubes.
pub fn cut_and_twist(
    x: &CubeComplex,
    hps: &crate::hyperplane::HyperplaneSet,
    id: crate::hyperplane::HyperplaneId,
    alpha: &std::collections::BTreeMap<crate::complex::VertexId, crate::complex::VertexId>,
) -> Result<CubeComplex, String> {
    use crate::complex::EdgeId;

    let cert = crate::hyperplane::certify_clean(x, hps, id);
    let product = cert.product.as_ref().ok_or("hyperplane is not clean")?;
    if !product.crossing_cubes.is_empty() {
        return Err("hyperplane is crossed by 3-cubes".into());
    }
    let positive = match &cert.two_sidedness {
        crate::hyperplane::TwoSidedness::TwoSided { positive } => positive.clone(),
        _ => return Err("hyperplane is not 2-sided".into()),
    };
    let head_sign = if product
        .side_pos
        .dual_end_at
        .contains_key(&x.term(positive[0]))
    {
        crate::hyperplane::SideSign::Pos
    } else {
        crate::hyperplane::SideSign::Neg
    };
    let head_side = product.side(head_sign);
    for v in &head_side.vertices {
        if !alpha.contains_key(v) {
            return Err(format!("alpha does not cover side vertex {}", v.0));
        }
    }
    // alpha must permute the side vertices and preserve side adjacency.
    {
        let mut images: Vec<_> = alpha.values().collect();
        images.sort();
        images.dedup();
        if images.len() != head_side.vertices.len() {
            return Err("alpha is not a bijection of the side".into());
        }
        for &e in &head_side.edges {
            let (a, b) = (alpha[&x.init(e)], alpha[&x.term(e)]);
            let ok = head_side.edges.iter().any(|&f| {
                (x.init(f) == a && x.term(f) == b) || (x.init(f) == b && x.term(f) == a)
            });
            if !ok {
                return Err("alpha does not preserve side edges".into());
            }
        }
    }

    // Rebuild undirected edges: non-dual edges first (original order), then
    // one twisted dual edge per old dual undirected edge.
    let dual_und: std::collections::BTreeSet<usize> =
        hps.get(id).dual_undirected().iter().map(|e| e.undirected()).collect();
    let mut new_edges: Vec<(u32, u32)> = Vec::new();
    let mut old_to_new: Vec<Option<usize>> = vec![None; x.undirected_edge_count()];
    for e in x.undirected_edges() {
        if !dual_und.contains(&e.undirected()) {
            old_to_new[e.undirected()] = Some(new_edges.len());
            new_edges.push((x.init(e).0, x.term(e).0));
        }
    }
    // Twisted dual edges, indexed in order of the positive class: the new
    // edge runs tail -> alpha(head).
    let mut dual_new: std::collections::BTreeMap<usize, (usize, bool)> =
        std::collections::BTreeMap::new();
    for &e in &positive {
        let idx = new_edges.len();
        new_edges.push((x.init(e).0, alpha[&x.term(e)].0));
        // Record: old undirected dual -> (new undirected index, whether the
        // positive direction was the old forward direction).
        dual_new.insert(e.undirected(), (idx, e.0 % 2 == 0));
    }
    // Directed id translation for non-dual edges.
    let map_dir = |e: EdgeId| -> u32 {
        let nu = old_to_new[e.undirected()].expect("non-dual edge");
        2 * nu as u32 + (e.0 % 2)
    };
    // The new directed dual edge with the same initial vertex as the old
    // positive representative.
    let new_dual_from_tail = |e_pos: EdgeId| -> u32 {
        let (nu, _) = dual_new[&e_pos.undirected()];
        2 * nu as u32
    };
    // Image of a head-side edge under alpha, as a directed id from alpha(a).
    let alpha_edge = |d: EdgeId| -> Result<u32, String> {
        let (a, b) = (alpha[&x.init(d)], alpha[&x.term(d)]);
        for &f in &head_side.edges {
            for dir in [f, f.rev()] {
                if x.init(dir) == a && x.term(dir) == b {
                    return Ok(map_dir(dir));
                }
            }
        }
        Err("alpha image edge missing".into())
    };

    let mut new_squares: Vec<[u32; 4]> = Vec::new();
    for s in x.square_ids() {
        let b = *x.square(s);
        if hps.of(b.e1) != id && hps.of(b.e2) != id {
            new_squares.push([map_dir(b.e1), map_dir(b.e2), map_dir(b.e1p), map_dir(b.e2p)]);
            continue;
        }
        // Root so the dual pair is (e1, e1') with e1 in the positive class.
        let mut b = if hps.of(b.e1) == id {
            b
        } else {
            crate::complex::SquareBoundary {
                e1: b.e2p,
                e2: b.e1p,
                e1p: b.e2,
                e2p: b.e1,
            }
        };
        if !positive.contains(&b.e1) {
            b = crate::complex::SquareBoundary {
                e1: b.e1p.rev(),
                e2: b.e2p.rev(),
                e1p: b.e1.rev(),
                e2p: b.e2.rev(),
            };
        }
        debug_assert!(positive.contains(&b.e1) && positive.contains(&b.e1p));
        // New square: (x -> alpha(y)) along the twisted dual, alpha of the
        // head edge, (y' -> alpha(z)) along the twisted dual, old tail edge.
        new_squares.push([
            new_dual_from_tail(b.e1),
            alpha_edge(b.e2)?,
            new_dual_from_tail(b.e1p),
            map_dir(b.e2p),
        ]);
    }

    complex_from_cells(
        x.vertex_count() as u32,
        &new_edges,
        &new_squares,
        &[],
    )
    .map_err(|e| format!("twisted cells failed validation: {}", e))
}

/// A cellwise automorphism of a cube complex.
#[derive(Clone, Debug)]
pub struct CellAutomorphism {
    pub vertex: Vec<u32>,
    /// Directed edge images.
    pub edge: Vec<u32>,
    pub square: Vec<u32>,
    pub cube: Vec<u32>,
}

/// Completes vertex and directed-edge images to a full cell automorphism by
/// matching square and 3-cube corners, verifying compatibility throughout.
pub fn complete_automorphism(
    x: &CubeComplex,
    vertex: Vec<u32>,
    edge: Vec<u32>,
) -> Result<CellAutomorphism, String> {
    use crate::complex::{EdgeId, VertexId};
    if vertex.len() != x.vertex_count() || edge.len() != x.directed_edge_count() {
        return Err("image tables have wrong lengths".into());
    }
    for e in x.directed_edges() {
        let img = EdgeId(edge[e.0 as usize]);
        if edge[e.rev().0 as usize] != img.rev().0 {
            return Err(format!("edge map breaks reversal at {}", e.0));
        }
        if vertex[x.init(e).0 as usize] != x.init(img).0
            || vertex[x.term(e).0 as usize] != x.term(img).0
        {
            return Err(format!("edge map breaks endpoints at {}", e.0));
        }
    }
    let mut square = Vec::with_capacity(x.square_count());
    for s in x.square_ids() {
        let c = x.square_corners(s)[0];
        let a = EdgeId(edge[c.ends[0].0 as usize]);
        let b = EdgeId(edge[c.ends[1].0 as usize]);
        let found = crate::complex::squares_at_corner(x, a, b);
        if found.len() != 1 {
            return Err(format!("square {} has no unique image", s.0));
        }
        let _ = VertexId(vertex[c.vertex.0 as usize]);
        square.push(found[0].0);
    }
    let mut cube = Vec::with_capacity(x.cube_count());
    for c in x.cube_ids() {
        let ends = x.cube(c).corner_ends(0);
        let imgs = [
            EdgeId(edge[ends[0].0 as usize]),
            EdgeId(edge[ends[1].0 as usize]),
            EdgeId(edge[ends[2].0 as usize]),
        ];
        let found = crate::complex::cubes_at_corner(x, imgs);
        if found.len() != 1 {
            return Err(format!("cube {} has no unique image", c.0));
        }
        cube.push(found[0].0);
    }
    Ok(CellAutomorphism {
        vertex,
        edge,
        square,
        cube,
    })
}

/// Quotients a complex by a cellwise involution acting freely on cells (no
/// fixed vertices, undirected edges, squares, or cubes, and no edge
/// inversions). Cells of the quotient are the orbit representatives of
/// minimal index.
pub fn free_involution_quotient(
    x: &CubeComplex,
    rho: &CellAutomorphism,
) -> Result<CubeComplex, String> {
    use crate::complex::EdgeId;
    // Involution and freeness checks.
    for v in 0..x.vertex_count() {
        if rho.vertex[rho.vertex[v] as usize] as usize != v {
            return Err("vertex map is not an involution".into());
        }
        if rho.vertex[v] as usize == v {
            return Err(format!("vertex {} is fixed", v));
        }
    }
    for e in x.directed_edges() {
        let img = EdgeId(rho.edge[e.0 as usize]);
        if rho.edge[img.0 as usize] != e.0 {
            return Err("edge map is not an involution".into());
        }
        if img.undirected() == e.undirected() {
            return Err(format!("edge {} is fixed or inverted", e.undirected()));
        }
    }
    for s in 0..x.square_count() {
        if rho.square[s] as usize == s {
            return Err(format!("square {} is fixed", s));
        }
    }
    for c in 0..x.cube_count() {
        if rho.cube[c] as usize == c {
            return Err(format!("cube {} is fixed", c));
        }
    }

    let mut new_vertex = vec![u32::MAX; x.vertex_count()];
    let mut next = 0u32;
    for v in 0..x.vertex_count() {
        if (rho.vertex[v] as usize) < v {
            new_vertex[v] = new_vertex[rho.vertex[v] as usize];
        } else {
            new_vertex[v] = next;
            next += 1;
        }
    }
    let quotient_vertices = next;

    // Undirected edge orbits: the representative keeps its forward
    // direction.
    let mut new_dir = vec![u32::MAX; x.directed_edge_count()];
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for e in x.undirected_edges() {
        let partner = EdgeId(rho.edge[e.0 as usize]).undirected();
        if partner < e.undirected() {
            continue;
        }
        let id = edges.len() as u32;
        edges.push((
            new_vertex[x.init(e).0 as usize],
            new_vertex[x.term(e).0 as usize],
        ));
        new_dir[e.0 as usize] = 2 * id;
        new_dir[e.rev().0 as usize] = 2 * id + 1;
        let pf = EdgeId(rho.edge[e.0 as usize]);
        new_dir[pf.0 as usize] = 2 * id;
        new_dir[pf.rev().0 as usize] = 2 * id + 1;
    }

    let mut new_square = vec![u32::MAX; x.square_count()];
    let mut squares: Vec<[u32; 4]> = Vec::new();
    for s in x.square_ids() {
        let partner = rho.square[s.0 as usize];
        if (partner as usize) < s.0 as usize {
            continue;
        }
        let b = x.square(s);
        let id = squares.len() as u32;
        squares.push([
            new_dir[b.e1.0 as usize],
            new_dir[b.e2.0 as usize],
            new_dir[b.e1p.0 as usize],
            new_dir[b.e2p.0 as usize],
        ]);
        new_square[s.0 as usize] = id;
        new_square[partner as usize] = id;
    }

    let mut cubes: Vec<crate::complex::RawThreeCube> = Vec::new();
    for c in x.cube_ids() {
        let partner = rho.cube[c.0 as usize];
        if (partner as usize) < c.0 as usize {
            continue;
        }
        let cube = x.cube(c);
        cubes.push(crate::complex::RawThreeCube {
            corners: cube.corners.map(|v| new_vertex[v.0 as usize]),
            edges: cube.edges.map(|e| new_dir[e.0 as usize]),
            faces: cube.faces.map(|s| new_square[s.0 as usize]),
        });
    }

    complex_from_cells(quotient_vertices, &edges, &squares, &cubes)
        .map_err(|e| format!("quotient cells failed validation: {}", e))
}

/// A compact Petersen-linked complex with a nontrivial parallel holonomy:
/// the quotient of the `(Z/2)^10` Davis development by the free affine
/// involution `g ↦ σ(g) + h`, where `σ` permutes coordinates by the
/// transposition swapping labels 1 and 2 and
/// `h = e_{13} + e_{23} + e_{34} + e_{35}`. The involution preserves a
/// `{1,2}`-labeled hyperplane side-preservingly while swapping the two
/// labels, so transport around the twisted side loop is the transposition.
pub fn twisted_petersen_quotient() -> CubeComplex {
    use crate::complex::EdgeId;
    let l = build_kneser(&LabelSet::numeric(5), 2).unwrap();
    let dq = crate::cover::davis_quotient(
        &l,
        &crate::cover::standard_involutions(l.vertex_count()),
    )
    .unwrap();
    let x = &dq.complex;
    let nv = l.vertex_count();

    // Recover the generator bitmask of each group element: the standard
    // involution for generator v transposes points 2v, 2v+1.
    let masks: Vec<u32> = {
        // Reconstruct element masks by walking edges from the identity.
        let mut masks = vec![u32::MAX; x.vertex_count()];
        masks[0] = 0;
        let mut stack = vec![0u32];
        while let Some(g) = stack.pop() {
            for &end in x.ends_at(crate::complex::VertexId(g)) {
                let h = x.init(end).0;
                let v = dq.edge_generator[end.undirected()];
                if masks[h as usize] == u32::MAX {
                    masks[h as usize] = masks[g as usize] ^ (1 << v);
                    stack.push(h);
                }
            }
        }
        masks
    };
    let vertex_of_mask: std::collections::HashMap<u32, u32> = masks
        .iter()
        .enumerate()
        .map(|(v, &m)| (m, v as u32))
        .collect();

    // σ on generator indices (2-subsets under the transposition (1 2)).
    let sigma_gen: Vec<usize> = (0..nv)
        .map(|v| {
            let s = l.vertex_set(v);
            let swapped = crate::label::Subset::from_indices(s.iter().map(|i| match i {
                0 => 1,
                1 => 0,
                other => other,
            }));
            l.vertex_index(swapped).unwrap()
        })
        .collect();
    let sigma_mask = |m: u32| -> u32 {
        (0..nv).fold(0u32, |acc, v| {
            if m & (1 << v) != 0 {
                acc | (1 << sigma_gen[v])
            } else {
                acc
            }
        })
    };
    let h_mask: u32 = [1u32, 4, 7, 8].iter().map(|&b| 1 << b).sum();
    let rho_mask = |m: u32| sigma_mask(m) ^ h_mask;

    let vertex: Vec<u32> = (0..x.vertex_count())
        .map(|g| vertex_of_mask[&rho_mask(masks[g])])
        .collect();
    // Directed edge (g -> g + e_v) maps to (ρg -> ρg + e_{σv}).
    let directed_from: std::collections::HashMap<(u32, usize), u32> = {
        let mut map = std::collections::HashMap::new();
        for e in x.undirected_edges() {
            let v = dq.edge_generator[e.undirected()];
            map.insert((x.init(e).0, v), e.0);
            map.insert((x.term(e).0, v), e.rev().0);
        }
        map
    };
    let edge: Vec<u32> = x
        .directed_edges()
        .map(|e| {
            let v = dq.edge_generator[e.undirected()];
            directed_from[&(vertex[x.init(e).0 as usize], sigma_gen[v])]
        })
        .collect();
    // Sanity: the mapped edge must terminate correctly.
    for e in x.directed_edges() {
        let img = EdgeId(edge[e.0 as usize]);
        debug_assert_eq!(x.term(img).0, vertex[x.term(e).0 as usize]);
    }

    let rho = complete_automorphism(x, vertex, edge).expect("twist is an automorphism");
    free_involution_quotient(x, &rho).expect("twist acts freely")
}



#[cfg(test)]
mod twisted_tests {
    use super::*;
    use crate::deltacat::{build_pre_delta, parallel_holonomy, Site};
    use crate::hyperplane::SideSign;
    use crate::kneser::build_kneser;
    use crate::label::LabelSet;

    #[test]
    fn twisted_quotient_has_nontrivial_parallel_holonomy() {
        let y = twisted_petersen_quotient();
        assert_eq!(y.vertex_count(), 512);
        assert_eq!(y.undirected_edge_count(), 2560);
        assert_eq!(y.square_count(), 1920);
        let l = build_kneser(&LabelSet::numeric(5), 2).unwrap();
        let site = Site::new(y, &l).unwrap();
        assert!(site.all_clean(), "twisted quotient hyperplanes stay clean");
        let pre = build_pre_delta(&site).unwrap();
        let mut nontrivial = 0usize;
        for hp in site.hyperplanes.ids() {
            for sign in [SideSign::Pos, SideSign::Neg] {
                let product = site.certificates[hp.0 as usize].product.as_ref().unwrap();
                let bp = product.side(sign).vertices[0];
                let ph = parallel_holonomy(&site, &pre, hp, sign, bp).unwrap();
                if !ph.is_trivial() {
                    nontrivial += 1;
                }
            }
        }
        println!("nontrivial sides: {}", nontrivial);
        assert!(nontrivial > 0);
    }
}
