use gcx::graph_core::{koszul_sign, DecoratedGraph, Vertex};
use gcx::pairing_space::{builtin, Label, PairingSpace};
use proptest::prelude::*;

/// Every relabelling of the internal vertices, written as a normalized
/// word with the sign relating it to `g`. Empty when the word itself vanishes.
fn orbit(g: &DecoratedGraph) -> Vec<(DecoratedGraph, i32)> {
    let n = g.n_internal() as usize;
    let mut out = Vec::new();
    let mut map: Vec<Vertex> = (1..=n as Vertex).collect();
    permutations(&mut map, 0, &mut |m| {
        let (h, flip) = g.relabel(m);
        if let Some((w, neg)) = h.normalize_word() {
            out.push((w, if flip ^ neg { -1 } else { 1 }));
        }
    });
    out
}

fn permutations(items: &mut Vec<Vertex>, k: usize, f: &mut impl FnMut(&[Vertex])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, f);
        items.swap(k, i);
    }
}

fn inversions(perm: &[usize]) -> usize {
    (0..perm.len())
        .flat_map(|i| (i + 1..perm.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| perm[i] > perm[j])
        .count()
}

fn space(k: usize) -> PairingSpace {
    builtin::get(["s2", "s3", "s4", "t2"][k]).unwrap()
}

#[derive(Debug, Clone)]
struct Spec {
    space: usize,
    n: u32,
    edges: Vec<(Vertex, Vertex)>,
    decorations: Vec<(Vertex, usize)>,
}

fn spec() -> impl Strategy<Value = Spec> {
    (0..4usize, 1..=4u32).prop_flat_map(|(space, n)| {
        let v = 1..=n as Vertex;
        (
            Just(space),
            Just(n),
            prop::collection::vec((v.clone(), v.clone()), 0..5),
            prop::collection::vec((v, 0..3usize), 0..3),
        )
            .prop_map(|(space, n, edges, decorations)| Spec {
                space,
                n,
                edges,
                decorations,
            })
    })
}

fn build(p: &PairingSpace, s: &Spec) -> DecoratedGraph {
    let reduced: Vec<Label> = p.reduced_labels().collect();
    let decs: Vec<(Vertex, Label)> = s
        .decorations
        .iter()
        .map(|&(v, l)| (v, reduced[l % reduced.len()]))
        .collect();
    DecoratedGraph::new(p, s.n, s.edges.clone(), &decs).unwrap()
}

#[test]
fn koszul_sign_examples() {
    assert_eq!(koszul_sign(&[1, 0], &[1, 1]).unwrap(), -1);
    assert_eq!(koszul_sign(&[1, 0], &[2, 1]).unwrap(), 1);
    assert_eq!(koszul_sign(&[2, 0, 1], &[1, 1, 1]).unwrap(), 1);
    assert!(koszul_sign(&[0, 0], &[1, 1]).is_err());
}

#[test]
fn multiple_edges_vanish_only_for_odd_edges() {
    for (name, vanishes) in [("s2", true), ("s3", false), ("s4", true)] {
        let p = builtin::get(name).unwrap();
        let theta = DecoratedGraph::new(&p, 2, vec![(1, 2), (1, 2), (1, 2)], &[]).unwrap();
        assert_eq!(theta.canonicalize().is_none(), vanishes, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn canonical_form_agrees_with_brute_force(s in spec()) {
        let p = space(s.space);
        let g = build(&p, &s);
        let orbit = orbit(&g);
        let odd_automorphism = orbit.is_empty()
            || orbit.iter().any(|(w, e)| orbit.iter().any(|(v, f)| v == w && e != f));
        match g.canonicalize() {
            None => prop_assert!(odd_automorphism),
            Some((c, sign)) => {
                prop_assert!(!odd_automorphism);
                let hit = orbit.iter().find(|(w, _)| *w == c);
                prop_assert!(hit.is_some(), "canonical graph outside the orbit");
                prop_assert_eq!(hit.unwrap().1, sign);
            }
        }
    }

    #[test]
    fn relabelling_keeps_the_class(s in spec(), seed in any::<u64>()) {
        let p = space(s.space);
        let g = build(&p, &s);
        let n = s.n as usize;
        let mut map: Vec<Vertex> = (1..=n as Vertex).collect();
        let mut x = seed;
        for i in (1..n).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            map.swap(i, (x >> 33) as usize % (i + 1));
        }
        let (h, flip) = g.relabel(&map);
        match (g.canonicalize(), h.canonicalize()) {
            (None, None) => {}
            (Some((a, s)), Some((b, t))) => {
                prop_assert_eq!(a, b);
                prop_assert_eq!(s, if flip { -t } else { t });
            }
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a.is_some(), b.is_some()),
        }
    }

    #[test]
    fn edge_order_and_orientation_signs(s in spec(), perm_seed in any::<u64>(), flips in any::<u8>()) {
        let p = space(s.space);
        let d = p.d() as usize;
        let g = build(&p, &s);
        let k = s.edges.len();
        let mut perm: Vec<usize> = (0..k).collect();
        let mut x = perm_seed;
        for i in (1..k).rev() {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (x >> 33) as usize % (i + 1));
        }
        let mut moved = s.clone();
        let mut expected = 1;
        if d % 2 == 0 && inversions(&perm) % 2 == 1 {
            expected = -expected;
        }
        moved.edges = perm
            .iter()
            .enumerate()
            .map(|(pos, &i)| {
                let (u, v) = s.edges[i];
                if flips >> (pos % 8) & 1 == 1 && u != v {
                    if d % 2 == 1 {
                        expected = -expected;
                    }
                    (v, u)
                } else {
                    (u, v)
                }
            })
            .collect();
        let h = build(&p, &moved);
        match (g.canonicalize(), h.canonicalize()) {
            (None, None) => {}
            (Some((a, s)), Some((b, t))) => {
                prop_assert_eq!(a, b);
                prop_assert_eq!(s, expected * t);
            }
            (a, b) => prop_assert!(false, "{:?} vs {:?}", a.is_some(), b.is_some()),
        }
    }

    #[test]
    fn canonical_form_keeps_degree_and_size(s in spec()) {
        let p = space(s.space);
        let g = build(&p, &s);
        if let Some((c, _)) = g.canonicalize() {
            prop_assert_eq!(c.degree(), g.degree());
            prop_assert_eq!(c.n_internal(), g.n_internal());
            prop_assert_eq!(c.edges().len(), g.edges().len());
        }
    }
}
