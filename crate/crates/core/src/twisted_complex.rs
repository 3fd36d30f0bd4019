//! The full graph complex `fGC` and its Chevalley-Eilenberg extension by
//! `osp^{<0}`.
//!
//! Elements are sums of [`CEWord`]s `ξ^I ⊗ Γ`: a sorted word in the duals
//! `ξ^a` of the osp basis (degree `1 - |f_a|`) followed by a vacuum graph.
//! The differential is
//!
//! `D(ξ^I⊗Γ) = d_A(ξ^I)⊗Γ + (-1)^{|ξ^I|} ξ^I⊗(d_split + d_contr)Γ
//!            + Σ_b (-1)^{|f_b||ξ^I|} ξ^b ξ^I ⊗ f_b·Γ`
//!
//! with `d_A ξ^c = -½ Σ_{a,b} (-1)^{|f_a||ξ^b|} C^c_{ab} ξ^a ξ^b` for
//! `[f_a, f_b] = Σ_c C^c_{ab} f_c`.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::Neg;
use std::rc::Rc;

use indexmap::IndexSet;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedMul, ToPrimitive};
use rustc_hash::{FxBuildHasher, FxHashMap};
use smallvec::SmallVec;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::exact_linalg::SparseMatQ;
use crate::graph_core::{
    disjoint_union, enumerate_basis, BasisFlags, DecoratedGraph, Decoration, DecorationList,
    DecorationWeight, EdgeList, GraphSum, Vertex,
};
use crate::pairing_space::PairingSpace;
use crate::rational::{q_frac, Q};

type FxIndexSet<T> = IndexSet<T, FxBuildHasher>;

/// A sorted osp word `ξ^I`.
type OspWord = SmallVec<[u16; 4]>;

fn odd(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

fn signed(c: &Q, negative: bool) -> Q {
    if negative {
        -c.clone()
    } else {
        c.clone()
    }
}

/// `ξ^I ⊗ Γ` with `I` a sorted list of osp basis indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CEWord {
    pub osp: Vec<u16>,
    pub graph: DecoratedGraph,
}

impl CEWord {
    pub fn graph(graph: DecoratedGraph) -> Self {
        CEWord {
            osp: Vec::new(),
            graph,
        }
    }
}

/// Rational combination of canonical CE words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CESum {
    terms: BTreeMap<CEWord, Q>,
}

impl CESum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_canonical(&mut self, w: CEWord, c: &Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(w) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c.clone());
            }
        }
    }

    pub fn add_sum(&mut self, other: &CESum, c: &Q) {
        for (w, v) in &other.terms {
            self.add_canonical(w.clone(), &(v * c));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CEWord, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, w: &CEWord) -> Q {
        self.terms.get(w).cloned().unwrap_or_else(Q::zero)
    }

    pub fn from_graph_sum(s: &GraphSum) -> Self {
        let mut out = CESum::new();
        for (g, c) in s.iter() {
            out.add_canonical(CEWord::graph(g.clone()), c);
        }
        out
    }

    /// The ξ-free part as a graph sum.
    pub fn graph_part(&self) -> GraphSum {
        let mut out = GraphSum::new();
        for (w, c) in &self.terms {
            if w.osp.is_empty() {
                out.add_canonical(w.graph.clone(), c);
            }
        }
        out
    }
}

/// Multiplication of vacuum graph sums; truncation is the minimum of the inputs.
pub fn multiply(a: &GraphSum, b: &GraphSum) -> Result<GraphSum, Error> {
    let d_of = |s: &GraphSum| s.iter().next().map(|(g, _)| g.d());
    if let (Some(x), Some(y)) = (d_of(a), d_of(b)) {
        if x != y {
            return Err(Error::Mismatch(format!("d = {x} vs d = {y}")));
        }
    }
    let trunc = match (a.truncation(), b.truncation()) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let mut out = GraphSum::with_truncation(trunc, a.weight_convention());
    for (x, cx) in a.iter() {
        for (y, cy) in b.iter() {
            let (g, neg) = disjoint_union(x, y);
            out.add_graph(&g, &signed(&(cx * cy), neg));
        }
    }
    Ok(out)
}

/// Derivation replacing each edge `(u,u')` by `Δ` placed at `(u,u')`.
pub fn d_split(space: &PairingSpace, g: &DecoratedGraph) -> GraphSum {
    let mut out = GraphSum::new();
    let d = g.d() as i64;
    let base = g.decoration_degree();
    let unit = space.unit();
    for (p, &(u, v)) in g.edges().iter().enumerate() {
        let neg = odd(base + (d - 1) * p as i64);
        let mut edges = EdgeList::from(g.edges());
        edges.remove(p);
        for (i, k, c) in space.diagonal_class() {
            let mut decs = DecorationList::from(g.decorations());
            for (vertex, label) in [(u, *i), (v, *k)] {
                if label != unit {
                    decs.push(Decoration {
                        vertex,
                        label,
                        degree: space.degree(label),
                    });
                }
            }
            let h = DecoratedGraph::from_parts(
                g.d(),
                g.n_internal(),
                g.externals(),
                decs,
                edges.clone(),
            );
            out.add_graph(&h, &signed(c, neg));
        }
    }
    out
}

/// Partition of edge positions into `(E1, E2)`: tadpoles for even `d`,
/// edges with a repeated unordered pair for odd `d`.
pub fn edge_partition(g: &DecoratedGraph) -> (Vec<usize>, Vec<usize>) {
    let edges = g.edges();
    let key = |e: &(Vertex, Vertex)| (e.0.min(e.1), e.0.max(e.1));
    let mut counts: BTreeMap<(Vertex, Vertex), usize> = BTreeMap::new();
    for e in edges {
        *counts.entry(key(e)).or_default() += 1;
    }
    (0..edges.len()).partition(|&i| {
        if g.d() % 2 == 0 {
            edges[i].0 == edges[i].1
        } else {
            counts[&key(&edges[i])] > 1
        }
    })
}

/// Edge contraction with the sign convention of the twisting action.
pub fn d_contract(g: &DecoratedGraph) -> GraphSum {
    let mut out = GraphSum::new();
    let d = g.d() as i64;
    let d_odd = d % 2 == 1;
    let mut neg = false;
    // Orient every edge m <= n.
    let mut edges = EdgeList::new();
    for &(u, v) in g.edges() {
        if u == v && d_odd {
            return out;
        }
        if u > v {
            neg ^= d_odd;
            edges.push((v, u));
        } else {
            edges.push((u, v));
        }
    }
    let oriented = DecoratedGraph::from_parts(
        g.d(),
        g.n_internal(),
        g.externals(),
        g.decorations(),
        edges.clone(),
    );
    let (e1, e2) = edge_partition(&oriented);
    // Move E1 in front of E2; only even d (odd edge degree) contributes.
    if !d_odd {
        let order: Vec<usize> = e1.iter().chain(&e2).copied().collect();
        let degrees = vec![d - 1; order.len()];
        neg ^= crate::graph_core::koszul_sign(&order, &degrees).unwrap() < 0;
    }
    neg ^= odd(g.decoration_degree() + (d - 1) * e1.len() as i64);
    let n = g.n_internal() as Vertex;
    for (l2, &pos) in e2.iter().enumerate() {
        let (m, k) = edges[pos];
        let l2 = l2 as i64 + 1;
        let term_neg = neg ^ odd(d * (m as i64 + k as i64 + 1)) ^ odd((d - 1) * l2);
        let mut map = vec![0 as Vertex; n as usize];
        let mut next = 2;
        for v in 1..=n {
            map[v as usize - 1] = if v == m || v == k {
                1
            } else {
                next += 1;
                next - 1
            };
        }
        let f = |v: Vertex| if v > 0 { map[v as usize - 1] } else { v };
        let new_edges: EdgeList = e1
            .iter()
            .chain(&e2)
            .filter(|&&p| p != pos)
            .map(|&p| (f(edges[p].0), f(edges[p].1)))
            .collect();
        let decs: DecorationList = g
            .decorations()
            .iter()
            .map(|x| Decoration {
                vertex: f(x.vertex),
                ..*x
            })
            .collect();
        let h =
            DecoratedGraph::from_parts(g.d(), g.n_internal() - 1, g.externals(), decs, new_edges);
        out.add_graph(&h, &signed(&Q::one(), term_neg));
    }
    out
}

/// `d_split + d_contract` on a graph.
pub fn d_graph(space: &PairingSpace, g: &DecoratedGraph) -> GraphSum {
    let mut s = d_split(space, g);
    s.add_sum(&d_contract(g), &Q::one());
    s
}

/// `f·Γ`: `f` acts on the decoration word as a derivation of degree `|f|`.
pub fn act_on_graph(space: &PairingSpace, f_index: usize, g: &DecoratedGraph) -> GraphSum {
    let f = &space.osp_neg_basis()[f_index];
    let mut out = GraphSum::new();
    let mut before = 0i64;
    for (k, x) in g.decorations().iter().enumerate() {
        let neg = odd(f.degree * before);
        before += x.degree as i64;
        for target in 0..space.dim() {
            let c = &f.matrix[target][x.label as usize];
            if c.is_zero() {
                continue;
            }
            let mut decs = DecorationList::from(g.decorations());
            if target as u16 == space.unit() {
                decs.remove(k);
            } else {
                decs[k] = Decoration {
                    vertex: x.vertex,
                    label: target as u16,
                    degree: space.degree(target as u16),
                };
            }
            let h =
                DecoratedGraph::from_parts(g.d(), g.n_internal(), g.externals(), decs, g.edges());
            out.add_graph(&h, &signed(c, neg));
        }
    }
    out
}

/// The graph complex of a pairing space with its CE extension.
#[derive(Clone, Debug)]
pub struct FullGraphComplex {
    space: PairingSpace,
    /// Degree of `ξ^a`.
    xi_degrees: Vec<i64>,
    /// `structure[a][b]` = coordinates of `[f_a, f_b]`.
    structure: Vec<Vec<Vec<Q>>>,
    /// `d_xi[c]` lists the terms of `d_A ξ^c`.
    d_xi: Vec<Vec<(u16, u16, Q)>>,
    conv: DecorationWeight,
}

impl FullGraphComplex {
    pub fn new(space: &PairingSpace) -> Self {
        Self::with_weight(space, DecorationWeight::default())
    }

    pub fn with_weight(space: &PairingSpace, conv: DecorationWeight) -> Self {
        let basis = space.osp_neg_basis();
        let xi_degrees: Vec<i64> = basis.iter().map(|f| 1 - f.degree).collect();
        let structure: Vec<Vec<Vec<Q>>> = basis
            .iter()
            .map(|f| {
                basis
                    .iter()
                    .map(|g| {
                        if f.degree + g.degree < -(space.d() as i64) {
                            vec![Q::zero(); basis.len()]
                        } else {
                            space.osp_bracket(f, g).1
                        }
                    })
                    .collect()
            })
            .collect();
        let d_xi = (0..basis.len())
            .map(|c| Self::compute_d_xi(&xi_degrees, &structure, c))
            .collect();
        FullGraphComplex {
            space: space.clone(),
            xi_degrees,
            structure,
            d_xi,
            conv,
        }
    }

    pub fn space(&self) -> &PairingSpace {
        &self.space
    }

    pub fn weight_convention(&self) -> DecorationWeight {
        self.conv
    }

    pub fn osp_dim(&self) -> usize {
        self.xi_degrees.len()
    }

    pub fn xi_degree(&self, a: usize) -> i64 {
        self.xi_degrees[a]
    }

    /// Structure constants `C^c_{ab}`.
    pub fn structure_constant(&self, a: usize, b: usize, c: usize) -> &Q {
        &self.structure[a][b][c]
    }

    fn osp_word_degree(&self, osp: &[u16]) -> i64 {
        osp.iter().map(|&a| self.xi_degrees[a as usize]).sum()
    }

    pub fn word_degree(&self, w: &CEWord) -> i64 {
        self.osp_word_degree(&w.osp) + w.graph.degree()
    }

    /// Sorts an osp word with Koszul signs; `None` if an odd `ξ` repeats.
    pub fn sort_osp(&self, osp: &mut [u16]) -> Option<bool> {
        let mut neg = false;
        for i in 1..osp.len() {
            let mut j = i;
            while j > 0 && osp[j - 1] > osp[j] {
                if odd(self.xi_degrees[osp[j - 1] as usize] * self.xi_degrees[osp[j] as usize]) {
                    neg = !neg;
                }
                osp.swap(j - 1, j);
                j -= 1;
            }
        }
        if osp
            .windows(2)
            .any(|w| w[0] == w[1] && odd(self.xi_degrees[w[0] as usize]))
        {
            return None;
        }
        Some(neg)
    }

    /// Canonical form of a word and its sign, or `None` if it vanishes.
    pub fn canonicalize(&self, w: &CEWord) -> Option<(CEWord, i32)> {
        let mut osp = w.osp.clone();
        let neg = self.sort_osp(&mut osp)?;
        let (g, s) = w.graph.canonicalize()?;
        Some((CEWord { osp, graph: g }, if neg { -s } else { s }))
    }

    /// `d_A ξ^c` as a list of `(a, b, coefficient)` for `ξ^a ξ^b`.
    fn compute_d_xi(xi_degrees: &[i64], structure: &[Vec<Vec<Q>>], c: usize) -> Vec<(u16, u16, Q)> {
        let half = q_frac(-1, 2);
        let mut out = Vec::new();
        for (a, row) in structure.iter().enumerate() {
            for (b, consts) in row.iter().enumerate() {
                let k = &consts[c];
                if k.is_zero() {
                    continue;
                }
                let neg = odd((1 - xi_degrees[a]) * xi_degrees[b]);
                out.push((a as u16, b as u16, signed(&(&half * k), neg)));
            }
        }
        out
    }

    /// The graph-level ingredients of `D` on any word with graph `g`.
    pub fn graph_pieces(&self, g: &DecoratedGraph) -> GraphPieces {
        GraphPieces {
            d: d_graph(&self.space, g).into_terms().into_iter().collect(),
            act: (0..self.osp_dim())
                .map(|b| {
                    act_on_graph(&self.space, b, g)
                        .into_terms()
                        .into_iter()
                        .collect()
                })
                .collect(),
        }
    }

    /// `D(ξ^I⊗Γ)` from graph-level pieces, generic over the graph handle
    /// and coefficient type; each term is passed to `emit` with a sorted
    /// osp word and a canonical graph.
    fn assemble_with<G: Clone, C: Clone + Neg<Output = C>>(
        &self,
        osp: &[u16],
        graph: &G,
        d_terms: &[(G, C)],
        act_terms: &[Vec<(G, C)>],
        d_xi: &[Vec<(u16, u16, C)>],
        mut emit: impl FnMut(OspWord, G, C),
    ) {
        let flip = |c: &C, neg: bool| if neg { -c.clone() } else { c.clone() };
        let mut before = 0i64;
        for (j, &c) in osp.iter().enumerate() {
            let neg = odd(before);
            before += self.xi_degrees[c as usize];
            for (a, b, k) in &d_xi[c as usize] {
                let mut word = OspWord::from_slice(&osp[..j]);
                word.push(*a);
                word.push(*b);
                word.extend_from_slice(&osp[j + 1..]);
                if let Some(s) = self.sort_osp(&mut word) {
                    emit(word, graph.clone(), flip(k, neg ^ s));
                }
            }
        }
        let xi_deg = self.osp_word_degree(osp);
        let neg = odd(xi_deg);
        for (g, c) in d_terms {
            emit(OspWord::from_slice(osp), g.clone(), flip(c, neg));
        }
        for (b, acted) in act_terms.iter().enumerate() {
            if acted.is_empty() {
                continue;
            }
            let mut word = OspWord::new();
            word.push(b as u16);
            word.extend_from_slice(osp);
            let Some(s) = self.sort_osp(&mut word) else {
                continue;
            };
            let neg = s ^ odd((1 - self.xi_degrees[b]) * xi_deg);
            for (g, c) in acted {
                emit(word.clone(), g.clone(), flip(c, neg));
            }
        }
    }

    fn assemble(&self, w: &CEWord, pieces: &GraphPieces, mut emit: impl FnMut(CEWord, Q)) {
        self.assemble_with(
            &w.osp,
            &w.graph,
            &pieces.d,
            &pieces.act,
            &self.d_xi,
            |osp, graph, c| {
                emit(
                    CEWord {
                        osp: osp.into_vec(),
                        graph,
                    },
                    c,
                )
            },
        );
    }

    /// The full differential of one canonical word.
    pub fn differential_word(&self, w: &CEWord) -> CESum {
        let mut out = CESum::new();
        self.assemble(w, &self.graph_pieces(&w.graph), |t, c| {
            out.add_canonical(t, &c)
        });
        out
    }

    pub fn full_differential(&self, x: &CESum) -> CESum {
        let mut out = CESum::new();
        for (w, c) in x.iter() {
            out.add_sum(&self.differential_word(w), c);
        }
        out
    }

    /// Differential of a pure graph sum (ξ-free input).
    pub fn differential_graphs(&self, x: &GraphSum) -> CESum {
        self.full_differential(&CESum::from_graph_sum(x))
    }

    /// Enumerates the canonical basis of a window.
    pub fn window_basis(&self, window: &Window, degree: i64) -> Result<Vec<CEWord>, Error> {
        let flags = BasisFlags {
            connected: window.connected,
            min_valence: window.min_valence,
            conv: self.conv,
            ..Default::default()
        };
        let mut out = BTreeSet::new();
        let osp_words = if window.ce {
            self.osp_words_up_to_degree(degree + self.min_graph_degree(window.weight_max))
        } else {
            vec![Vec::new()]
        };
        for osp in osp_words {
            let g_deg = degree - self.osp_word_degree(&osp);
            if osp.is_empty() || !window.connected {
                for g in enumerate_basis(&self.space, g_deg, window.weight_max, &flags) {
                    out.insert(CEWord {
                        osp: osp.clone(),
                        graph: g,
                    });
                }
            }
            if !osp.is_empty() && g_deg == 0 && !window.connected {
                out.insert(CEWord {
                    osp: osp.clone(),
                    graph: DecoratedGraph::empty(self.space.d()),
                });
            }
            if let Some(cap) = window.cap {
                if out.len() > cap {
                    return Err(Error::CapExceeded {
                        what: format!("basis in degree {degree}"),
                        size: out.len(),
                        cap,
                    });
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Lowest graph degree reachable with weight `<= w`.
    fn min_graph_degree(&self, w: u64) -> i64 {
        -(self.space.d() as i64) * w as i64
    }

    /// Sorted nonvanishing osp words of total ξ-degree `<= max`.
    fn osp_words_up_to_degree(&self, max: i64) -> Vec<Vec<u16>> {
        let mut out = vec![Vec::new()];
        let mut frontier = vec![(Vec::<u16>::new(), 0i64)];
        while let Some((w, deg)) = frontier.pop() {
            let start = w.last().copied().unwrap_or(0);
            for a in start..self.osp_dim() as u16 {
                let da = self.xi_degrees[a as usize];
                if deg + da > max || (w.last() == Some(&a) && odd(da)) {
                    continue;
                }
                let mut v = w.clone();
                v.push(a);
                out.push(v.clone());
                frontier.push((v, deg + da));
            }
        }
        out.sort();
        out
    }

    /// Matrix of the differential from `degree` to `degree + 1` on a window.
    ///
    /// With `connected` set, the output is projected to its linear part
    /// (connected graphs, no ξ); with `min_valence` set, terms outside the
    /// valence condition are dropped. Otherwise a term outside the target
    /// basis is an error.
    pub fn differential_matrix(
        &self,
        window: &Window,
        degree: i64,
    ) -> Result<(SparseMatQ, Vec<CEWord>, Vec<CEWord>), Error> {
        let source = self.window_basis(window, degree)?;
        let target = self.window_basis(window, degree + 1)?;
        let index: HashMap<&CEWord, usize> =
            target.iter().enumerate().map(|(i, w)| (w, i)).collect();
        let mut m = SparseMatQ::zeros(target.len(), source.len());
        if let Some(cap) = window.cap {
            let cells = source.len().saturating_mul(target.len());
            if source.len() > cap || target.len() > cap {
                return Err(Error::CapExceeded {
                    what: "matrix dimension".into(),
                    size: cells,
                    cap,
                });
            }
        }
        for (j, w) in source.iter().enumerate() {
            for (t, c) in self.differential_word(w).iter() {
                if let Some(&i) = index.get(t) {
                    m.add(i, j, c);
                    continue;
                }
                let projected = (window.connected
                    && (!t.osp.is_empty() || !t.graph.is_connected()))
                    || window
                        .min_valence
                        .is_some_and(|mv| t.graph.min_valence().is_some_and(|v| v < mv));
                if !projected {
                    return Err(Error::Shape(format!(
                        "differential leaves the window: term of weight {} in degree {}",
                        t.graph.weight(self.conv),
                        degree + 1
                    )));
                }
            }
        }
        Ok((m, source, target))
    }

    /// Applies the differential twice to each word and returns the number
    /// of words checked, or the first word whose square is nonzero.
    ///
    /// Graphs are interned and their differentials cached until more than
    /// `cache_limit` graphs have been seen, so inputs that share graphs
    /// should be adjacent. Coefficients are machine rationals with checked
    /// arithmetic; a word that overflows is redone in exact big rationals.
    pub fn verify_d2<'a>(
        &self,
        words: impl IntoIterator<Item = &'a CEWord>,
        cache_limit: usize,
    ) -> Result<usize, (CEWord, CESum)> {
        let mut engine = SquareChecker::new(self, cache_limit);
        let mut count = 0;
        for w in words {
            let vanishes = match engine.square_vanishes(w) {
                Some(v) => v,
                None => self.full_differential(&self.differential_word(w)).is_zero(),
            };
            if !vanishes {
                return Err((
                    w.clone(),
                    self.full_differential(&self.differential_word(w)),
                ));
            }
            count += 1;
        }
        Ok(count)
    }
}

/// `d_graph Γ` and `f_b·Γ` for every osp basis element, as canonical terms.
#[derive(Clone, Debug)]
pub struct GraphPieces {
    pub d: Vec<(DecoratedGraph, Q)>,
    pub act: Vec<Vec<(DecoratedGraph, Q)>>,
}

type SmallQ = Ratio<i64>;

fn small(c: &Q) -> Option<SmallQ> {
    Some(SmallQ::new_raw(c.numer().to_i64()?, c.denom().to_i64()?))
}

struct IdPieces {
    d: Vec<(u32, SmallQ)>,
    act: Vec<Vec<(u32, SmallQ)>>,
}

/// Interned graphs and their differentials for [`FullGraphComplex::verify_d2`].
struct SquareChecker<'a> {
    cx: &'a FullGraphComplex,
    d_xi: Option<Vec<Vec<(u16, u16, SmallQ)>>>,
    graphs: FxIndexSet<DecoratedGraph>,
    pieces: FxHashMap<u32, Option<Rc<IdPieces>>>,
    limit: usize,
}

impl<'a> SquareChecker<'a> {
    fn new(cx: &'a FullGraphComplex, limit: usize) -> Self {
        let d_xi = cx
            .d_xi
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .map(|(a, b, k)| Some((*a, *b, small(k)?)))
                    .collect()
            })
            .collect();
        SquareChecker {
            cx,
            d_xi,
            graphs: FxIndexSet::default(),
            pieces: FxHashMap::default(),
            limit: limit.max(1),
        }
    }

    fn intern(&mut self, g: DecoratedGraph) -> u32 {
        self.graphs.insert_full(g).0 as u32
    }

    fn convert(&mut self, terms: Vec<(DecoratedGraph, Q)>) -> Option<Vec<(u32, SmallQ)>> {
        terms
            .into_iter()
            .map(|(g, c)| Some((self.intern(g), small(&c)?)))
            .collect()
    }

    fn pieces_of(&mut self, id: u32) -> Option<Rc<IdPieces>> {
        if let Some(p) = self.pieces.get(&id) {
            return p.clone();
        }
        let g = self
            .graphs
            .get_index(id as usize)
            .expect("interned id")
            .clone();
        let GraphPieces { d, act } = self.cx.graph_pieces(&g);
        let built = (|| {
            let d = self.convert(d)?;
            let act = act
                .into_iter()
                .map(|t| self.convert(t))
                .collect::<Option<Vec<_>>>()?;
            Some(Rc::new(IdPieces { d, act }))
        })();
        self.pieces.insert(id, built.clone());
        built
    }

    /// `D(D(w)) == 0`, or `None` when machine rationals do not suffice.
    fn square_vanishes(&mut self, w: &CEWord) -> Option<bool> {
        let d_xi = self.d_xi.as_ref()?;
        if self.graphs.len() > self.limit {
            self.graphs.clear();
            self.pieces.clear();
        }
        let cx = self.cx;
        let d_xi = d_xi.clone();
        let root = self.intern(w.graph.clone());
        let p = self.pieces_of(root)?;
        let mut overflow = false;
        let mut first: FxHashMap<(OspWord, u32), SmallQ> = FxHashMap::default();
        cx.assemble_with(&w.osp, &root, &p.d, &p.act, &d_xi, |osp, g, c| {
            accumulate(&mut first, (osp, g), c, &mut overflow);
        });
        let mut second: FxHashMap<(OspWord, u32), SmallQ> = FxHashMap::default();
        for ((osp, g), c) in first {
            if c.is_zero() {
                continue;
            }
            let p = self.pieces_of(g)?;
            cx.assemble_with(&osp, &g, &p.d, &p.act, &d_xi, |osp2, g2, c2| {
                match c.checked_mul(&c2) {
                    Some(v) => accumulate(&mut second, (osp2, g2), v, &mut overflow),
                    None => overflow = true,
                }
            });
        }
        if overflow {
            return None;
        }
        Some(second.values().all(|c| c.is_zero()))
    }
}

fn accumulate(
    map: &mut FxHashMap<(OspWord, u32), SmallQ>,
    key: (OspWord, u32),
    c: SmallQ,
    overflow: &mut bool,
) {
    let e = map.entry(key).or_insert_with(SmallQ::zero);
    match e.checked_add(&c) {
        Some(v) => *e = v,
        None => *overflow = true,
    }
}

/// A finite piece of the complex: one degree at a time, weight `<= weight_max`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Window {
    pub weight_max: u64,
    pub connected: bool,
    pub min_valence: Option<usize>,
    /// Include the ξ block (CE extension by `osp^{<0}`).
    pub ce: bool,
    pub cap: Option<usize>,
}
