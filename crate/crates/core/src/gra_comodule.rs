//! The untwisted layer: `Gra_d` cooperations, the decorated comodule
//! `Gra_{V,<>}`, the `∘_V` cocomposition and the edge-splitting differential.
//!
//! Vertices are blocks of original labels. Collapsing `V ⊆ U` merges the
//! blocks of `V` into their union, so iterated quotients are identified
//! without relabeling.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::Error;
use crate::pairing_space::{Label, PairingSpace};
use crate::rational::Q;

/// A vertex of a monomial: the sorted set of original labels it stands for.
pub type Block = Vec<i32>;

fn odd(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Item {
    Dec(Block, Label, u32),
    Edge(Block, Block),
}

/// A normal-form word `decorations · edges` over a fixed vertex set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraMonomial {
    d: u32,
    vertices: BTreeSet<Block>,
    decorations: Vec<(Block, Label, u32)>,
    edges: Vec<(Block, Block)>,
}

/// Which kind of cooperation a monomial belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// The decorated comodule: decorations allowed, tadpoles allowed for even `d`.
    Comodule,
    /// Pure `Gra_d`: no decorations, no tadpoles.
    Cooperad,
}

fn item_degree(d: u32, x: &Item) -> i64 {
    match x {
        Item::Dec(_, _, deg) => *deg as i64,
        Item::Edge(..) => d as i64 - 1,
    }
}

impl GraMonomial {
    /// Builds a monomial over singleton vertices `u`, normalizing the word.
    /// Returns the sign relating the given word to the normal form, or
    /// `None` if the word vanishes.
    pub fn new(
        space: &PairingSpace,
        vertices: &[i32],
        edges: &[(i32, i32)],
        decorations: &[(i32, Label)],
    ) -> Result<Option<(GraMonomial, i32)>, Error> {
        let vs: BTreeSet<Block> = vertices.iter().map(|&v| vec![v]).collect();
        let mut items = Vec::new();
        for &(v, l) in decorations {
            if !vertices.contains(&v) || l == space.unit() || l as usize >= space.dim() {
                return Err(Error::InvalidGraph(format!("bad decoration ({v},{l})")));
            }
            items.push(Item::Dec(vec![v], l, space.degree(l)));
        }
        for &(u, v) in edges {
            if !vertices.contains(&u) || !vertices.contains(&v) {
                return Err(Error::InvalidGraph(format!("bad edge ({u},{v})")));
            }
            items.push(Item::Edge(vec![u], vec![v]));
        }
        Ok(Self::from_items(space.d(), vs, items).map(|(m, neg)| (m, if neg { -1 } else { 1 })))
    }

    /// The monomial `1` over a vertex set.
    pub fn unit(d: u32, vertices: BTreeSet<Block>) -> Self {
        GraMonomial {
            d,
            vertices,
            decorations: Vec::new(),
            edges: Vec::new(),
        }
    }

    fn from_items(
        d: u32,
        vertices: BTreeSet<Block>,
        mut items: Vec<Item>,
    ) -> Option<(GraMonomial, bool)> {
        let d_odd = d % 2 == 1;
        let mut neg = false;
        for x in items.iter_mut() {
            if let Item::Edge(u, v) = x {
                if u == v && d_odd {
                    return None;
                }
                if u > v {
                    std::mem::swap(u, v);
                    neg ^= d_odd;
                }
            }
        }
        for i in 1..items.len() {
            let mut j = i;
            while j > 0 && items[j - 1] > items[j] {
                if odd(item_degree(d, &items[j - 1]) * item_degree(d, &items[j])) {
                    neg = !neg;
                }
                items.swap(j - 1, j);
                j -= 1;
            }
        }
        if items
            .windows(2)
            .any(|w| w[0] == w[1] && odd(item_degree(d, &w[0])))
        {
            return None;
        }
        let mut decorations = Vec::new();
        let mut edges = Vec::new();
        for x in items {
            match x {
                Item::Dec(b, l, g) => decorations.push((b, l, g)),
                Item::Edge(u, v) => edges.push((u, v)),
            }
        }
        Some((
            GraMonomial {
                d,
                vertices,
                decorations,
                edges,
            },
            neg,
        ))
    }

    fn items(&self) -> Vec<Item> {
        self.decorations
            .iter()
            .map(|(b, l, g)| Item::Dec(b.clone(), *l, *g))
            .chain(
                self.edges
                    .iter()
                    .map(|(u, v)| Item::Edge(u.clone(), v.clone())),
            )
            .collect()
    }

    pub fn vertices(&self) -> &BTreeSet<Block> {
        &self.vertices
    }

    pub fn edges(&self) -> &[(Block, Block)] {
        &self.edges
    }

    pub fn decorations(&self) -> &[(Block, Label, u32)] {
        &self.decorations
    }

    pub fn degree(&self) -> i64 {
        self.items().iter().map(|x| item_degree(self.d, x)).sum()
    }
}

/// Rational combination of normal-form monomials.
pub type GraSum = BTreeMap<GraMonomial, Q>;

fn add_to<K: Ord>(map: &mut BTreeMap<K, Q>, k: K, c: Q) {
    if c.is_zero() {
        return;
    }
    match map.entry(k) {
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
        Entry::Vacant(v) => {
            v.insert(c);
        }
    }
}

/// Leibniz extension of `d s^{uu'} = π_u^*⊗π_{u'}^*(Δ)`, units dropped.
pub fn gra_differential(space: &PairingSpace, m: &GraMonomial) -> GraSum {
    let mut out = GraSum::new();
    let items = m.items();
    let mut before = 0i64;
    for (p, x) in items.iter().enumerate() {
        if let Item::Edge(u, v) = x {
            for (i, k, c) in space.diagonal_class() {
                let mut word: Vec<Item> = items[..p].to_vec();
                for (b, l) in [(u, *i), (v, *k)] {
                    if l != space.unit() {
                        word.push(Item::Dec(b.clone(), l, space.degree(l)));
                    }
                }
                word.extend_from_slice(&items[p + 1..]);
                if let Some((mono, neg)) = GraMonomial::from_items(m.d, m.vertices.clone(), word) {
                    let v = if neg ^ odd(before) {
                        -c.clone()
                    } else {
                        c.clone()
                    };
                    add_to(&mut out, mono, v);
                }
            }
        }
        before += item_degree(m.d, x);
    }
    out
}

/// Sum of `left ⊗ right` tensors.
pub type TensorSum = BTreeMap<(GraMonomial, GraMonomial), Q>;

/// The cocomposition `∘_V`: a monomial over `U` to `Gra(U/V) ⊗ Gra_d(V)`.
pub fn cocompose(m: &GraMonomial, v: &BTreeSet<Block>, side: Side) -> Result<TensorSum, Error> {
    if !v.is_subset(&m.vertices) || v.is_empty() {
        return Err(Error::InvalidGraph(
            "V is not a nonempty subset of U".into(),
        ));
    }
    let merged: Block = {
        let mut b: Block = v.iter().flatten().copied().collect();
        b.sort_unstable();
        b
    };
    let bar = |b: &Block| {
        if v.contains(b) {
            merged.clone()
        } else {
            b.clone()
        }
    };
    let left_vertices: BTreeSet<Block> = m.vertices.iter().map(bar).collect();
    let d = m.d;
    // Raw words with their degrees; the sign of the tensor product rule
    // (a⊗b)(x⊗1) = (-1)^{|b||x|} ax⊗b is tracked per term.
    let mut terms: Vec<(bool, Vec<Item>, Vec<Item>, i64)> =
        vec![(false, Vec::new(), Vec::new(), 0)];
    for x in m.items() {
        let mut next = Vec::new();
        for (neg, l, r, rdeg) in terms {
            let xdeg = item_degree(d, &x);
            let mut push_left = |item: Item| {
                let mut l2 = l.clone();
                l2.push(item);
                next.push((neg ^ odd(rdeg * xdeg), l2, r.clone(), rdeg));
            };
            match &x {
                Item::Dec(b, lab, g) => push_left(Item::Dec(bar(b), *lab, *g)),
                Item::Edge(a, b) => {
                    let inside = v.contains(a) && v.contains(b);
                    if !inside {
                        push_left(Item::Edge(bar(a), bar(b)));
                    } else if side == Side::Comodule {
                        push_left(Item::Edge(merged.clone(), merged.clone()));
                    }
                    if inside && a != b {
                        let mut r2 = r.clone();
                        r2.push(x.clone());
                        next.push((neg, l.clone(), r2, rdeg + xdeg));
                    }
                }
            }
        }
        terms = next;
    }
    let mut out = TensorSum::new();
    for (neg, l, r, _) in terms {
        let Some((lm, ln)) = GraMonomial::from_items(d, left_vertices.clone(), l) else {
            continue;
        };
        let Some((rm, rn)) = GraMonomial::from_items(d, v.clone(), r) else {
            continue;
        };
        let c = if neg ^ ln ^ rn { -Q::one() } else { Q::one() };
        add_to(&mut out, (lm, rm), c);
    }
    Ok(out)
}

/// `(d ⊗ id)` on tensors; the `Gra_d` factor has zero differential.
pub fn differential_left(space: &PairingSpace, t: &TensorSum) -> TensorSum {
    let mut out = TensorSum::new();
    for ((l, r), c) in t {
        for (dl, c2) in gra_differential(space, l) {
            add_to(&mut out, (dl, r.clone()), c * c2);
        }
    }
    out
}

/// Linear extension of `∘_V` to sums.
pub fn cocompose_sum(s: &GraSum, v: &BTreeSet<Block>, side: Side) -> Result<TensorSum, Error> {
    let mut out = TensorSum::new();
    for (m, c) in s {
        for (k, c2) in cocompose(m, v, side)? {
            add_to(&mut out, k, c * c2);
        }
    }
    Ok(out)
}

/// Triple tensors `a ⊗ b ⊗ c` for coassociativity checks.
pub type TripleSum = BTreeMap<(GraMonomial, GraMonomial, GraMonomial), Q>;

/// `(∘_{W/V} ⊗ id) ∘ ∘_V`.
pub fn iterate_inner_first(
    m: &GraMonomial,
    v: &BTreeSet<Block>,
    w: &BTreeSet<Block>,
) -> Result<TripleSum, Error> {
    let merged: Block = {
        let mut b: Block = v.iter().flatten().copied().collect();
        b.sort_unstable();
        b
    };
    let w_over_v: BTreeSet<Block> = w
        .iter()
        .map(|b| {
            if v.contains(b) {
                merged.clone()
            } else {
                b.clone()
            }
        })
        .collect();
    let mut out = TripleSum::new();
    for ((l, r), c) in cocompose(m, v, Side::Comodule)? {
        for ((a, b), c2) in cocompose(&l, &w_over_v, Side::Comodule)? {
            add_to(&mut out, (a, b, r.clone()), &c * c2);
        }
    }
    Ok(out)
}

/// `(id ⊗ ∘_V) ∘ ∘_W`.
pub fn iterate_outer_first(
    m: &GraMonomial,
    v: &BTreeSet<Block>,
    w: &BTreeSet<Block>,
) -> Result<TripleSum, Error> {
    let mut out = TripleSum::new();
    for ((l, r), c) in cocompose(m, w, Side::Comodule)? {
        for ((b, e), c2) in cocompose(&r, v, Side::Cooperad)? {
            // Moving the degree-0 map past `l` costs no sign.
            add_to(&mut out, (l.clone(), b, e), &c * c2);
        }
    }
    Ok(out)
}
