//! Oriented decorated graphs as signed monomial words.
//!
//! A graph `[γ ⊗ 1^n]` is stored as its word: decorations, then edges
//! (degree `d-1` each), then the `n` internal vertex markers (degree `-d`
//! each, implicit in label order). Internal vertices are `1..=n`; external
//! vertices carry negative labels and no marker.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use smallvec::SmallVec;

use crate::error::Error;
use crate::pairing_space::{Label, PairingSpace};
use crate::rational::Q;

pub type Vertex = i32;
pub type EdgeList = SmallVec<[(Vertex, Vertex); 8]>;
pub type DecorationList = SmallVec<[Decoration; 8]>;
pub type ExternalList = SmallVec<[Vertex; 2]>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decoration {
    pub vertex: Vertex,
    pub label: Label,
    /// Cohomological degree of the label, cached for sign bookkeeping.
    pub degree: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DecoratedGraph {
    d: u32,
    n: u32,
    externals: ExternalList,
    decorations: DecorationList,
    edges: EdgeList,
}

/// How a decoration contributes to the filtration weight.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum DecorationWeight {
    /// The degree of the label.
    #[default]
    Homological,
    /// Every decoration counts 1.
    Unit,
}

fn odd(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

/// `(-1)^{ab}` accumulated over the inversions of `permutation`, where
/// `permutation[k]` is the original index of the item now at position `k`.
pub fn koszul_sign(permutation: &[usize], degrees: &[i64]) -> Result<i32, Error> {
    let k = permutation.len();
    if degrees.len() != k {
        return Err(Error::Shape(format!(
            "{} degrees for a permutation of length {k}",
            degrees.len()
        )));
    }
    let mut seen = vec![false; k];
    for &p in permutation {
        if p >= k || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Shape(format!("not a permutation: {permutation:?}")));
        }
    }
    let mut neg = false;
    for a in 0..k {
        for b in a + 1..k {
            let (x, y) = (permutation[a], permutation[b]);
            if x > y && odd(degrees[x] * degrees[y]) {
                neg = !neg;
            }
        }
    }
    Ok(if neg { -1 } else { 1 })
}

/// Sorts a block of graded-commuting items in place. Returns the Koszul sign
/// (true = negative), or `None` when an odd item repeats.
fn sort_block<T: Ord + Copy>(items: &mut [T], is_odd: impl Fn(&T) -> bool) -> Option<bool> {
    let mut neg = false;
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && items[j - 1] > items[j] {
            if is_odd(&items[j - 1]) && is_odd(&items[j]) {
                neg = !neg;
            }
            items.swap(j - 1, j);
            j -= 1;
        }
    }
    if items.windows(2).any(|w| w[0] == w[1] && is_odd(&w[0])) {
        return None;
    }
    Some(neg)
}

/// Parity of a vertex map `v ↦ map[v-1]` on `1..=n` (true = odd).
fn map_parity(map: &[Vertex]) -> bool {
    let mut neg = false;
    for a in 0..map.len() {
        for b in a + 1..map.len() {
            if map[a] > map[b] {
                neg = !neg;
            }
        }
    }
    neg
}

impl DecoratedGraph {
    /// Builds a vacuum or external graph, validating labels against the space.
    pub fn new(
        space: &PairingSpace,
        n: u32,
        edges: Vec<(Vertex, Vertex)>,
        decorations: &[(Vertex, Label)],
    ) -> Result<Self, Error> {
        let mut decs = Vec::with_capacity(decorations.len());
        for &(v, l) in decorations {
            if l as usize >= space.dim() || l == space.unit() {
                return Err(Error::InvalidGraph(format!(
                    "label index {l} is not in the reduced part"
                )));
            }
            decs.push(Decoration {
                vertex: v,
                label: l,
                degree: space.degree(l),
            });
        }
        let mut externals = BTreeSet::new();
        let vertices = edges
            .iter()
            .flat_map(|&(u, v)| [u, v])
            .chain(decs.iter().map(|x| x.vertex));
        for v in vertices {
            if v == 0 || v > n as Vertex {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} outside 1..={n} and not external"
                )));
            }
            if v < 0 {
                externals.insert(v);
            }
        }
        Ok(Self::from_parts(
            space.d(),
            n,
            externals.into_iter().collect::<ExternalList>(),
            decs,
            edges,
        ))
    }

    pub(crate) fn from_parts(
        d: u32,
        n: u32,
        externals: impl Into<ExternalList>,
        decorations: impl Into<DecorationList>,
        edges: impl Into<EdgeList>,
    ) -> Self {
        DecoratedGraph {
            d,
            n,
            externals: externals.into(),
            decorations: decorations.into(),
            edges: edges.into(),
        }
    }

    /// The unit of the graph algebra: no vertices at all.
    pub fn empty(d: u32) -> Self {
        Self::from_parts(
            d,
            0,
            ExternalList::new(),
            DecorationList::new(),
            EdgeList::new(),
        )
    }

    /// A single internal vertex carrying the given decorations.
    pub fn vertex(space: &PairingSpace, labels: &[Label]) -> Result<Self, Error> {
        let decs: Vec<(Vertex, Label)> = labels.iter().map(|&l| (1, l)).collect();
        Self::new(space, 1, Vec::new(), &decs)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n_internal(&self) -> u32 {
        self.n
    }

    pub fn externals(&self) -> &[Vertex] {
        &self.externals
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn decorations(&self) -> &[Decoration] {
        &self.decorations
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0 && self.externals.is_empty()
    }

    pub fn decoration_degree(&self) -> i64 {
        self.decorations.iter().map(|x| x.degree as i64).sum()
    }

    /// Degree of the word without the vertex markers.
    pub fn word_degree(&self) -> i64 {
        self.decoration_degree() + (self.d as i64 - 1) * self.edges.len() as i64
    }

    /// `Σ deg(α_k) + (d-1)·E - d·n`.
    pub fn degree(&self) -> i64 {
        self.word_degree() - self.d as i64 * self.n as i64
    }

    /// `d·E + (decoration count) + n`.
    pub fn weight(&self, conv: DecorationWeight) -> u64 {
        let decs: u64 = match conv {
            DecorationWeight::Homological => self.decorations.iter().map(|x| x.degree as u64).sum(),
            DecorationWeight::Unit => self.decorations.len() as u64,
        };
        self.d as u64 * self.edges.len() as u64 + decs + self.n as u64
    }

    /// Incident half-edges plus decorations at an internal vertex.
    pub fn valence(&self, v: Vertex) -> usize {
        let e: usize = self
            .edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum();
        e + self.decorations.iter().filter(|x| x.vertex == v).count()
    }

    pub fn min_valence(&self) -> Option<usize> {
        (1..=self.n as Vertex).map(|v| self.valence(v)).min()
    }

    pub fn has_tadpole(&self) -> bool {
        self.edges.iter().any(|(u, v)| u == v)
    }

    pub fn has_multiple_edge(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges
            .iter()
            .any(|&(u, v)| !seen.insert((u.min(v), u.max(v))))
    }

    /// Whether the internal vertices form one connected piece.
    pub fn is_connected(&self) -> bool {
        self.component_of_vertices()
            .iter()
            .collect::<BTreeSet<_>>()
            .len()
            <= 1
    }

    /// Component index (by smallest member) of each internal vertex `1..=n`.
    fn component_of_vertices(&self) -> Vec<usize> {
        let n = self.n as usize;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut c = x;
            while p[c] != r {
                let next = p[c];
                p[c] = r;
                c = next;
            }
            r
        }
        for &(u, v) in &self.edges {
            if u > 0 && v > 0 {
                let (a, b) = (
                    find(&mut parent, u as usize - 1),
                    find(&mut parent, v as usize - 1),
                );
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        (0..n).map(|x| find(&mut parent, x)).collect()
    }

    /// Relabels internal vertex `v` to `map[v-1]`, keeping word order.
    /// Returns the sign `sgn(σ)^d` relating `[γ⊗1^n]` to `[σγ⊗1^n]`.
    pub fn relabel(&self, map: &[Vertex]) -> (DecoratedGraph, bool) {
        let f = |v: Vertex| if v > 0 { map[v as usize - 1] } else { v };
        let g = DecoratedGraph {
            d: self.d,
            n: self.n,
            externals: self.externals.clone(),
            decorations: self
                .decorations
                .iter()
                .map(|x| Decoration {
                    vertex: f(x.vertex),
                    ..*x
                })
                .collect(),
            edges: self.edges.iter().map(|&(u, v)| (f(u), f(v))).collect(),
        };
        (g, self.d % 2 == 1 && map_parity(map))
    }

    /// `relabel` followed by `normalize_word`, without the intermediate graph.
    fn relabel_normalized(&self, map: &[Vertex]) -> Option<(DecoratedGraph, bool)> {
        let d_odd = self.d % 2 == 1;
        let f = |v: Vertex| if v > 0 { map[v as usize - 1] } else { v };
        let mut neg = d_odd && map_parity(map);
        let mut edges = EdgeList::new();
        for &(u, v) in &self.edges {
            let (a, b) = (f(u), f(v));
            if a == b && d_odd {
                return None;
            }
            if a > b {
                edges.push((b, a));
                neg ^= d_odd;
            } else {
                edges.push((a, b));
            }
        }
        let mut decorations: DecorationList = self
            .decorations
            .iter()
            .map(|x| Decoration {
                vertex: f(x.vertex),
                ..*x
            })
            .collect();
        neg ^= sort_block(&mut decorations, |x| x.degree % 2 == 1)?;
        neg ^= sort_block(&mut edges, |_| !d_odd)?;
        Some((
            DecoratedGraph {
                d: self.d,
                n: self.n,
                externals: self.externals.clone(),
                decorations,
                edges,
            },
            neg,
        ))
    }

    /// Orients edges `u <= v` and sorts both blocks, keeping vertex labels.
    /// `None` when the word vanishes (odd tadpole or repeated odd item).
    pub fn normalize_word(&self) -> Option<(DecoratedGraph, bool)> {
        let id: Vec<Vertex> = (1..=self.n as Vertex).collect();
        self.relabel_normalized(&id)
    }

    /// Canonical representative `G` and sign `s` with `self = s·G`, or
    /// `None` if the element vanishes.
    pub fn canonicalize(&self) -> Option<(DecoratedGraph, i32)> {
        let c = self.canonical_form()?;
        if c.odd_automorphism {
            return None;
        }
        Some((c.graph, if c.negative { -1 } else { 1 }))
    }

    /// Canonical form ignoring vanishing by automorphisms; `None` only when
    /// the word itself vanishes.
    pub(crate) fn canonical_form(&self) -> Option<CanonicalForm> {
        let cells = self.refined_cells();
        let mut best: Option<CanonicalForm> = None;
        let mut vanishes = false;
        let n = self.n as usize;
        let mut map: SmallVec<[Vertex; 8]> = SmallVec::from_elem(0, n);
        for_each_cell_ordering(&cells, &mut map, &mut |map| {
            if vanishes {
                return;
            }
            // A vanishing word vanishes under every relabeling.
            let Some((g, neg)) = self.relabel_normalized(map) else {
                vanishes = true;
                return;
            };
            match &mut best {
                None => {
                    best = Some(CanonicalForm {
                        graph: g,
                        negative: neg,
                        odd_automorphism: false,
                    })
                }
                Some(b) => match g.cmp(&b.graph) {
                    std::cmp::Ordering::Less => {
                        *b = CanonicalForm {
                            graph: g,
                            negative: neg,
                            odd_automorphism: false,
                        }
                    }
                    std::cmp::Ordering::Equal => {
                        if b.negative != neg {
                            b.odd_automorphism = true;
                        }
                    }
                    std::cmp::Ordering::Greater => {}
                },
            }
        });
        if vanishes {
            None
        } else {
            best
        }
    }

    /// Ordered partition of internal vertices by iterated invariants.
    ///
    /// Colors are hashes combined commutatively over neighbours, so they are
    /// invariant under relabeling; a collision only merges cells.
    fn refined_cells(&self) -> Vec<Vec<Vertex>> {
        let n = self.n as usize;
        if n == 0 {
            return Vec::new();
        }
        let mut colors = vec![0x9e37_79b9_7f4a_7c15u64; n];
        for x in &self.decorations {
            if x.vertex > 0 {
                colors[x.vertex as usize - 1] =
                    colors[x.vertex as usize - 1].wrapping_add(mix(0x1000 + x.label as u64));
            }
        }
        for &(u, v) in &self.edges {
            if u == v {
                colors[u as usize - 1] = colors[u as usize - 1].wrapping_add(mix(0x2000));
                continue;
            }
            for (a, b) in [(u, v), (v, u)] {
                if a > 0 {
                    let tag = if b < 0 { 0x4000 + (-b) as u64 } else { 0x3000 };
                    colors[a as usize - 1] = colors[a as usize - 1].wrapping_add(mix(tag));
                }
            }
        }
        let distinct = |c: &[u64]| {
            let mut v = c.to_vec();
            v.sort_unstable();
            v.dedup();
            v.len()
        };
        let mut count = distinct(&colors);
        while count < n {
            let mut next: Vec<u64> = colors.iter().map(|&c| mix(c)).collect();
            for &(u, v) in &self.edges {
                if u != v && u > 0 && v > 0 {
                    let (a, b) = (u as usize - 1, v as usize - 1);
                    next[a] = next[a].wrapping_add(mix(colors[b] ^ 0x5555));
                    next[b] = next[b].wrapping_add(mix(colors[a] ^ 0x5555));
                }
            }
            let c = distinct(&next);
            colors = next;
            if c == count {
                break;
            }
            count = c;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| colors[i]);
        let mut cells: Vec<Vec<Vertex>> = Vec::new();
        for (k, &i) in order.iter().enumerate() {
            if k > 0 && colors[order[k - 1]] == colors[i] {
                cells.last_mut().unwrap().push(i as Vertex + 1);
            } else {
                cells.push(vec![i as Vertex + 1]);
            }
        }
        cells
    }

    /// Components of a vacuum graph as canonical graphs in sorted order, with
    /// the sign `s` such that `self = s · Π components`. `None` if `self = 0`.
    pub fn connected_components(&self) -> Option<(Vec<DecoratedGraph>, i32)> {
        if self.n == 0 {
            return Some((Vec::new(), 1));
        }
        let (whole, s_whole) = self.canonicalize()?;
        let comp = self.component_of_vertices();
        let roots: BTreeSet<usize> = comp.iter().copied().collect();
        if roots.len() == 1 {
            return Some((vec![whole], s_whole));
        }
        let mut parts = Vec::new();
        for r in roots {
            let members: Vec<Vertex> = (0..self.n as usize)
                .filter(|&i| comp[i] == r)
                .map(|i| i as Vertex + 1)
                .collect();
            let local = |v: Vertex| members.iter().position(|&m| m == v).unwrap() as Vertex + 1;
            let g = DecoratedGraph {
                d: self.d,
                n: members.len() as u32,
                externals: ExternalList::new(),
                decorations: self
                    .decorations
                    .iter()
                    .filter(|x| members.contains(&x.vertex))
                    .map(|x| Decoration {
                        vertex: local(x.vertex),
                        ..*x
                    })
                    .collect(),
                edges: self
                    .edges
                    .iter()
                    .filter(|e| members.contains(&e.0))
                    .map(|&(u, v)| (local(u), local(v)))
                    .collect(),
            };
            let (c, _) = g.canonicalize()?;
            parts.push(c);
        }
        parts.sort();
        let mut prod = DecoratedGraph::empty(self.d);
        let mut neg = false;
        for p in &parts {
            let (u, s) = disjoint_union(&prod, p);
            prod = u;
            neg ^= s;
        }
        let (canon, s_prod) = prod.canonicalize()?;
        debug_assert_eq!(canon, whole);
        let s = s_whole * s_prod * if neg { -1 } else { 1 };
        Some((parts, s))
    }
}

/// The canonical labelling data of a graph class.
#[derive(Clone, Debug)]
pub(crate) struct CanonicalForm {
    pub graph: DecoratedGraph,
    pub negative: bool,
    pub odd_automorphism: bool,
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Calls `f` with every vertex map that sends the `k`-th cell onto the
/// `k`-th block of consecutive labels.
fn for_each_cell_ordering(
    cells: &[Vec<Vertex>],
    map: &mut [Vertex],
    f: &mut impl FnMut(&[Vertex]),
) {
    fn rec(
        cells: &[Vec<Vertex>],
        ci: usize,
        pos: usize,
        start: Vertex,
        used: u64,
        map: &mut [Vertex],
        f: &mut impl FnMut(&[Vertex]),
    ) {
        let Some(cell) = cells.get(ci) else {
            f(map);
            return;
        };
        if pos == cell.len() {
            rec(cells, ci + 1, 0, start + cell.len() as Vertex, 0, map, f);
            return;
        }
        for (k, &v) in cell.iter().enumerate() {
            if used & (1 << k) == 0 {
                map[v as usize - 1] = start + pos as Vertex;
                rec(cells, ci, pos + 1, start, used | (1 << k), map, f);
            }
        }
    }
    rec(cells, 0, 0, 1, 0, map, f);
}

/// Word-level product `[m1⊗1^{n1}]·[m2⊗1^{n2}]` of vacuum graphs, before
/// canonicalization. Returns the product word and its sign (true = negative).
pub fn disjoint_union(a: &DecoratedGraph, b: &DecoratedGraph) -> (DecoratedGraph, bool) {
    let shift = a.n as Vertex;
    let d = a.d as i64;
    let mut decorations = a.decorations.clone();
    decorations.extend(b.decorations.iter().map(|x| Decoration {
        vertex: x.vertex + shift,
        ..*x
    }));
    let mut edges = a.edges.clone();
    edges.extend(b.edges.iter().map(|&(u, v)| (u + shift, v + shift)));
    // Markers: (-1)^{|m2|·n1·d}; moving D2 past E1: (-1)^{|D2|·(d-1)·E1}.
    let neg = odd(b.word_degree() * a.n as i64 * d)
        ^ odd(b.decoration_degree() * (d - 1) * a.edges.len() as i64);
    (
        DecoratedGraph {
            d: a.d,
            n: a.n + b.n,
            externals: ExternalList::new(),
            decorations,
            edges,
        },
        neg,
    )
}

/// Finite rational combination of canonical graphs, modulo `F^{N+1}` when
/// a truncation level is set.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GraphSum {
    terms: BTreeMap<DecoratedGraph, Q>,
    truncation: Option<u64>,
    conv: DecorationWeight,
}

impl GraphSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_truncation(truncation: Option<u64>, conv: DecorationWeight) -> Self {
        GraphSum {
            terms: BTreeMap::new(),
            truncation,
            conv,
        }
    }

    pub fn from_graph(g: &DecoratedGraph, c: Q) -> Self {
        let mut s = Self::new();
        s.add_graph(g, &c);
        s
    }

    pub fn truncation(&self) -> Option<u64> {
        self.truncation
    }

    pub fn weight_convention(&self) -> DecorationWeight {
        self.conv
    }

    /// Adds `c·g`, canonicalizing `g` and dropping terms above the truncation.
    pub fn add_graph(&mut self, g: &DecoratedGraph, c: &Q) {
        if c.is_zero() {
            return;
        }
        if let Some((canon, s)) = g.canonicalize() {
            let v = if s < 0 { -c.clone() } else { c.clone() };
            self.add_canonical(canon, &v);
        }
    }

    /// Adds `c·g` for an already canonical `g`.
    pub fn add_canonical(&mut self, g: DecoratedGraph, c: &Q) {
        if c.is_zero() {
            return;
        }
        if let Some(n) = self.truncation {
            if g.weight(self.conv) > n {
                return;
            }
        }
        match self.terms.entry(g) {
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

    pub fn add_sum(&mut self, other: &GraphSum, c: &Q) {
        for (g, v) in &other.terms {
            self.add_canonical(g.clone(), &(v * c));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&DecoratedGraph, &Q)> {
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

    pub fn coefficient(&self, g: &DecoratedGraph) -> Q {
        self.terms.get(g).cloned().unwrap_or_else(Q::zero)
    }

    pub fn scale(&self, c: &Q) -> GraphSum {
        let mut out = GraphSum::with_truncation(self.truncation, self.conv);
        out.add_sum(self, c);
        out
    }

    /// Restricts to weight `<= n` and records the truncation.
    pub fn truncate(&self, n: u64) -> GraphSum {
        let level = self.truncation.map_or(n, |t| t.min(n));
        let mut out = GraphSum::with_truncation(Some(level), self.conv);
        out.add_sum(self, &Q::from_integer(1.into()));
        out
    }

    pub fn set_truncation(&mut self, truncation: Option<u64>) {
        self.truncation = truncation;
        if let Some(n) = truncation {
            let conv = self.conv;
            self.terms.retain(|g, _| g.weight(conv) <= n);
        }
    }

    pub fn into_terms(self) -> BTreeMap<DecoratedGraph, Q> {
        self.terms
    }
}

/// Restrictions applied during basis enumeration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BasisFlags {
    pub connected: bool,
    pub min_valence: Option<usize>,
    pub conv: DecorationWeight,
    pub max_vertices: Option<u32>,
    pub max_edges: Option<usize>,
    pub max_decorations: Option<usize>,
}

/// Canonical undecorated multigraphs on `n` vertices with `e` edges that do
/// not vanish at the word level (no odd tadpoles, no even repeated edges).
fn skeletons(
    d: u32,
    n: u32,
    e: usize,
    cache: &mut BTreeMap<(u32, usize), Vec<DecoratedGraph>>,
) -> Vec<DecoratedGraph> {
    if let Some(v) = cache.get(&(n, e)) {
        return v.clone();
    }
    let out: Vec<DecoratedGraph> = if e == 0 {
        vec![DecoratedGraph::from_parts(
            d,
            n,
            ExternalList::new(),
            DecorationList::new(),
            EdgeList::new(),
        )]
    } else {
        let prev = skeletons(d, n, e - 1, cache);
        let mut set = BTreeSet::new();
        for g in &prev {
            for u in 1..=n as Vertex {
                for v in u..=n as Vertex {
                    let mut h = g.clone();
                    h.edges.push((u, v));
                    if let Some(c) = h.canonical_form() {
                        set.insert(c.graph);
                    }
                }
            }
        }
        set.into_iter().collect()
    };
    cache.insert((n, e), out.clone());
    out
}

/// Multisets of `(vertex, label)` decorations with total label degree
/// `target`, weight budget `budget`, and at most `max_count` items.
fn decoration_multisets(
    space: &PairingSpace,
    n: u32,
    target: i64,
    budget: i64,
    max_count: usize,
    conv: DecorationWeight,
) -> Vec<Vec<Decoration>> {
    let slots: Vec<Decoration> = (1..=n as Vertex)
        .flat_map(|v| space.reduced_labels().map(move |l| (v, l)))
        .map(|(v, l)| Decoration {
            vertex: v,
            label: l,
            degree: space.degree(l),
        })
        .collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(
        slots: &[Decoration],
        from: usize,
        target: i64,
        budget: i64,
        max_count: usize,
        conv: DecorationWeight,
        cur: &mut Vec<Decoration>,
        out: &mut Vec<Vec<Decoration>>,
    ) {
        if target == 0 {
            out.push(cur.clone());
            return;
        }
        if cur.len() == max_count {
            return;
        }
        for i in from..slots.len() {
            let s = slots[i];
            let w = match conv {
                DecorationWeight::Homological => s.degree as i64,
                DecorationWeight::Unit => 1,
            };
            if s.degree as i64 > target || w > budget {
                continue;
            }
            // An odd label cannot repeat at the same vertex.
            let next = if s.degree % 2 == 1 { i + 1 } else { i };
            cur.push(s);
            rec(
                slots,
                next,
                target - s.degree as i64,
                budget - w,
                max_count,
                conv,
                cur,
                out,
            );
            cur.pop();
        }
    }
    rec(
        &slots, 0, target, budget, max_count, conv, &mut cur, &mut out,
    );
    out
}

/// All canonical nonzero graphs with the given degree and weight `<= weight_max`,
/// in canonical order.
pub fn enumerate_basis(
    space: &PairingSpace,
    degree: i64,
    weight_max: u64,
    flags: &BasisFlags,
) -> Vec<DecoratedGraph> {
    let d = space.d();
    let mut cache = BTreeMap::new();
    let mut found = BTreeSet::new();
    let wmax = weight_max as i64;
    let max_n = flags.max_vertices.map_or(wmax, |m| (m as i64).min(wmax));
    for n in 1..=max_n {
        let mut e = 0usize;
        while d as i64 * e as i64 + n <= wmax {
            if flags.max_edges.is_some_and(|m| e > m) {
                break;
            }
            if flags.connected && (e as i64) < n - 1 {
                e += 1;
                continue;
            }
            let target = degree - (d as i64 - 1) * e as i64 + d as i64 * n;
            let budget = wmax - d as i64 * e as i64 - n;
            if target >= 0 && (target == 0 || budget > 0) {
                let decs = decoration_multisets(
                    space,
                    n as u32,
                    target,
                    budget,
                    flags.max_decorations.unwrap_or(usize::MAX),
                    flags.conv,
                );
                if !decs.is_empty() {
                    for sk in skeletons(d, n as u32, e, &mut cache) {
                        if flags.connected && !sk.is_connected() {
                            continue;
                        }
                        for ds in &decs {
                            let mut g = sk.clone();
                            g.decorations = ds.iter().copied().collect();
                            if let Some(m) = flags.min_valence {
                                if g.min_valence().is_some_and(|v| v < m) {
                                    continue;
                                }
                            }
                            if let Some((c, _)) = g.canonicalize() {
                                found.insert(c);
                            }
                        }
                    }
                }
            }
            e += 1;
        }
    }
    found.into_iter().collect()
}

/// All canonical nonzero vacuum graphs with at most `max_vertices`
/// vertices, `max_edges` edges and `max_decorations` decorations, any degree.
pub fn enumerate_box(
    space: &PairingSpace,
    max_vertices: u32,
    max_edges: usize,
    max_decorations: usize,
    connected: bool,
) -> Vec<DecoratedGraph> {
    let mut cache = BTreeMap::new();
    let mut found = BTreeSet::new();
    let slots_for = |n: u32| -> Vec<Decoration> {
        (1..=n as Vertex)
            .flat_map(|v| space.reduced_labels().map(move |l| (v, l)))
            .map(|(v, l)| Decoration {
                vertex: v,
                label: l,
                degree: space.degree(l),
            })
            .collect()
    };
    for n in 1..=max_vertices {
        let slots = slots_for(n);
        let mut multisets = Vec::new();
        let mut cur = Vec::new();
        fn rec(
            slots: &[Decoration],
            from: usize,
            left: usize,
            cur: &mut Vec<Decoration>,
            out: &mut Vec<Vec<Decoration>>,
        ) {
            out.push(cur.clone());
            if left == 0 {
                return;
            }
            for i in from..slots.len() {
                let next = if slots[i].degree % 2 == 1 { i + 1 } else { i };
                cur.push(slots[i]);
                rec(slots, next, left - 1, cur, out);
                cur.pop();
            }
        }
        rec(&slots, 0, max_decorations, &mut cur, &mut multisets);
        for e in 0..=max_edges {
            for sk in skeletons(space.d(), n, e, &mut cache) {
                if connected && !sk.is_connected() {
                    continue;
                }
                for ds in &multisets {
                    let mut g = sk.clone();
                    g.decorations = ds.iter().copied().collect();
                    if let Some((c, _)) = g.canonicalize() {
                        found.insert(c);
                    }
                }
            }
        }
    }
    found.into_iter().collect()
}
