//! The complete dg Lie algebra `GC_{H(M)}` and its semidirect product with
//! `osp^{<0}`, obtained by dualizing the CE differential of the full graph
//! complex.
//!
//! Lie elements are combinations of dual generators: `e_Γ` for connected
//! canonical graphs (stored as `Γ`) and `f_a` for the osp basis. Writing
//! the CE differential on generators `x_k` of degree `g_k` as
//!
//! `Q x_k = Σ_i (Q1)_{ki} x_i + ½ Σ_{i,j} Q^{ij}_k x_i x_j`
//!
//! the Lie structure is
//!
//! `d e_i = -(-1)^{g_i} Σ_k (Q1)_{ki} e_k`,
//! `[e_i, e_j] = -(-1)^{(1-g_i) g_j} Σ_k Q^{ij}_k e_k`,
//!
//! with Lie degree `1 - g_i`, so Maurer-Cartan elements sit in degree 1.
//! Only finitely many `x_k` can contain a given monomial; they are generated
//! combinatorially (vertex splitting, joining slots, moving decorations
//! along osp) and their coefficients are read off `Q x_k`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use num_traits::{One, Zero};

use crate::error::Error;
use crate::exact_linalg::{inverse, kernel_basis, SparseMatQ};
use crate::graph_core::{
    enumerate_basis, BasisFlags, DecoratedGraph, DecorationWeight, GraphSum, Vertex,
};
use crate::pairing_space::{Label, PairingSpace};
use crate::rational::{q, q_frac, Q};
use crate::twisted_complex::{CEWord, FullGraphComplex};

fn odd(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

fn signed(c: Q, negative: bool) -> Q {
    if negative {
        -c
    } else {
        c
    }
}

/// A dual basis vector of `osp^{<0} ⋉ GC_{H(M)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Generator {
    /// The osp basis element `f_a`.
    Osp(u16),
    /// `e_Γ` for a connected canonical graph `Γ`.
    Graph(DecoratedGraph),
}

/// An element of the Lie algebra modulo `F^{N+1}` when a truncation is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieElement {
    graphs: GraphSum,
    osp: BTreeMap<u16, Q>,
    osp_weights: Vec<u64>,
}

impl LieElement {
    fn empty(truncation: Option<u64>, conv: DecorationWeight, osp_weights: Vec<u64>) -> Self {
        LieElement {
            graphs: GraphSum::with_truncation(truncation, conv),
            osp: BTreeMap::new(),
            osp_weights,
        }
    }

    /// The zero element with the same truncation and conventions.
    pub fn zero_like(&self) -> Self {
        Self::empty(
            self.truncation(),
            self.graphs.weight_convention(),
            self.osp_weights.clone(),
        )
    }

    pub fn truncation(&self) -> Option<u64> {
        self.graphs.truncation()
    }

    pub fn graphs(&self) -> &GraphSum {
        &self.graphs
    }

    /// Osp component as `(basis index, coefficient)`.
    pub fn osp(&self) -> &BTreeMap<u16, Q> {
        &self.osp
    }

    pub fn is_zero(&self) -> bool {
        self.graphs.is_zero() && self.osp.is_empty()
    }

    pub fn len(&self) -> usize {
        self.graphs.len() + self.osp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty() && self.osp.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Generator, &Q)> {
        self.osp.iter().map(|(&a, c)| (Generator::Osp(a), c)).chain(
            self.graphs
                .iter()
                .map(|(g, c)| (Generator::Graph(g.clone()), c)),
        )
    }

    pub fn coefficient(&self, x: &Generator) -> Q {
        match x {
            Generator::Osp(a) => self.osp.get(a).cloned().unwrap_or_else(Q::zero),
            Generator::Graph(g) => self.graphs.coefficient(g),
        }
    }

    /// Adds `c·x` for a canonical generator; terms beyond the truncation are dropped.
    pub fn add_generator(&mut self, x: &Generator, c: &Q) {
        match x {
            Generator::Graph(g) => self.graphs.add_canonical(g.clone(), c),
            Generator::Osp(a) => {
                if c.is_zero()
                    || self
                        .truncation()
                        .is_some_and(|n| self.osp_weights[*a as usize] > n)
                {
                    return;
                }
                let e = self.osp.entry(*a).or_insert_with(Q::zero);
                *e += c;
                if e.is_zero() {
                    self.osp.remove(a);
                }
            }
        }
    }

    /// Adds `c·Γ` for an arbitrary (not necessarily canonical) connected graph.
    pub fn add_graph(&mut self, g: &DecoratedGraph, c: &Q) -> Result<(), Error> {
        if g.n_internal() == 0 || !g.is_connected() || !g.externals().is_empty() {
            return Err(Error::InvalidGraph(
                "Lie elements are connected vacuum graphs".into(),
            ));
        }
        self.graphs.add_graph(g, c);
        Ok(())
    }

    pub fn add(&mut self, other: &LieElement, c: &Q) {
        for (x, v) in other.terms() {
            self.add_generator(&x, &(v * c));
        }
    }

    pub fn scale(&self, c: &Q) -> LieElement {
        let mut out = self.zero_like();
        out.add(self, c);
        out
    }

    /// Reduction modulo `F^{n+1}`; the truncation becomes `min(n, current)`.
    pub fn truncate(&self, n: u64) -> LieElement {
        let t = Some(self.truncation().map_or(n, |m| m.min(n)));
        let mut out = Self::empty(t, self.graphs.weight_convention(), self.osp_weights.clone());
        out.add(self, &Q::one());
        out
    }
}

/// `Q x_k` split into its linear and quadratic parts; quadratic keys are
/// ordered pairs `(i, j)` with `i <= j` and coefficient of `x_i x_j`.
#[derive(Debug, Default)]
struct Decomposition {
    linear: HashMap<Generator, Q>,
    quadratic: HashMap<(Generator, Generator), Q>,
}

/// The dg Lie algebra `osp^{<0} ⋉ GC_{H(M)}` of a pairing space.
pub struct GraphLie {
    cx: FullGraphComplex,
    /// Unordered label pairs `{i, k}` with a nonzero `Δ` coefficient.
    delta_pairs: BTreeSet<(Label, Label)>,
    osp_weights: Vec<u64>,
    cache: RefCell<HashMap<Generator, Rc<Decomposition>>>,
}

impl GraphLie {
    pub fn new(space: &PairingSpace) -> Self {
        Self::with_weight(space, DecorationWeight::default())
    }

    pub fn with_weight(space: &PairingSpace, conv: DecorationWeight) -> Self {
        let cx = FullGraphComplex::with_weight(space, conv);
        let delta_pairs = space
            .diagonal_class()
            .iter()
            .filter(|(_, _, c)| !c.is_zero())
            .map(|&(i, k, _)| (i.min(k), i.max(k)))
            .collect();
        let osp_weights = space
            .osp_neg_basis()
            .iter()
            .map(|f| (-f.degree) as u64)
            .collect();
        GraphLie {
            cx,
            delta_pairs,
            osp_weights,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn complex(&self) -> &FullGraphComplex {
        &self.cx
    }

    pub fn space(&self) -> &PairingSpace {
        self.cx.space()
    }

    pub fn weight_convention(&self) -> DecorationWeight {
        self.cx.weight_convention()
    }

    /// An empty element with the given truncation.
    pub fn zero(&self, truncation: Option<u64>) -> LieElement {
        LieElement::empty(
            truncation,
            self.weight_convention(),
            self.osp_weights.clone(),
        )
    }

    /// `c · e_Γ` for a connected graph in any labelling.
    pub fn graph_element(
        &self,
        g: &DecoratedGraph,
        c: Q,
        truncation: Option<u64>,
    ) -> Result<LieElement, Error> {
        let mut x = self.zero(truncation);
        x.add_graph(g, &c)?;
        Ok(x)
    }

    pub fn generator_element(&self, x: &Generator, truncation: Option<u64>) -> LieElement {
        let mut e = self.zero(truncation);
        e.add_generator(x, &Q::one());
        e
    }

    /// Degree of the CE generator dual to `x`.
    pub fn ce_degree(&self, x: &Generator) -> i64 {
        match x {
            Generator::Osp(a) => self.cx.xi_degree(*a as usize),
            Generator::Graph(g) => g.degree(),
        }
    }

    pub fn lie_degree(&self, x: &Generator) -> i64 {
        1 - self.ce_degree(x)
    }

    pub fn weight(&self, x: &Generator) -> u64 {
        match x {
            Generator::Osp(a) => self.osp_weights[*a as usize],
            Generator::Graph(g) => g.weight(self.weight_convention()),
        }
    }

    /// Lie degrees present in an element.
    pub fn degrees(&self, x: &LieElement) -> BTreeSet<i64> {
        x.terms().map(|(g, _)| self.lie_degree(&g)).collect()
    }

    fn decomposition(&self, x: &Generator) -> Rc<Decomposition> {
        if let Some(d) = self.cache.borrow().get(x) {
            return d.clone();
        }
        let word = match x {
            Generator::Osp(a) => CEWord {
                osp: vec![*a],
                graph: DecoratedGraph::empty(self.space().d()),
            },
            Generator::Graph(g) => CEWord::graph(g.clone()),
        };
        let mut out = Decomposition::default();
        for (t, c) in self.cx.differential_word(&word).iter() {
            let components = if t.graph.n_internal() == 0 {
                Some((Vec::new(), 1))
            } else {
                t.graph.connected_components()
            };
            let Some((parts, s)) = components else {
                continue;
            };
            let c = signed(c.clone(), s < 0);
            let key = match (t.osp.as_slice(), parts.as_slice()) {
                ([], [g]) => {
                    out.linear.insert(Generator::Graph(g.clone()), c);
                    continue;
                }
                ([a], [g]) => (Generator::Osp(*a), Generator::Graph(g.clone())),
                ([a, b], []) => (Generator::Osp(*a), Generator::Osp(*b)),
                ([], [g, h]) => (Generator::Graph(g.clone()), Generator::Graph(h.clone())),
                _ => unreachable!("the CE differential of a generator is at most quadratic"),
            };
            out.quadratic.insert(key, c);
        }
        let d = Rc::new(out);
        self.cache.borrow_mut().insert(x.clone(), d.clone());
        d
    }

    fn canonical_generator(&self, g: &DecoratedGraph) -> Option<Generator> {
        g.canonicalize().map(|(c, _)| Generator::Graph(c))
    }

    fn rebuild(
        &self,
        n: u32,
        edges: Vec<(Vertex, Vertex)>,
        decs: &[(Vertex, Label)],
    ) -> Option<Generator> {
        let g = DecoratedGraph::new(self.space(), n, edges, decs).ok()?;
        self.canonical_generator(&g)
    }

    fn dec_list(g: &DecoratedGraph) -> Vec<(Vertex, Label)> {
        g.decorations()
            .iter()
            .map(|x| (x.vertex, x.label))
            .collect()
    }

    /// Graphs whose linear differential can contain `g`: splittings of a
    /// vertex and joins of two slots into an edge.
    fn linear_preimages(&self, g: &DecoratedGraph) -> BTreeSet<Generator> {
        let mut out = BTreeSet::new();
        let n = g.n_internal() as Vertex;
        let decs = Self::dec_list(g);
        let unit = self.space().unit();
        for v in 1..=n {
            let mut halves = Vec::new();
            for (i, &(a, b)) in g.edges().iter().enumerate() {
                if a == v {
                    halves.push((i, 0));
                }
                if b == v {
                    halves.push((i, 1));
                }
            }
            let local: Vec<usize> = (0..decs.len()).filter(|&k| decs[k].0 == v).collect();
            let items = halves.len() + local.len();
            for mask in 0u64..(1 << items) {
                let mut edges: Vec<(Vertex, Vertex)> = g.edges().to_vec();
                for (bit, &(i, end)) in halves.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        if end == 0 {
                            edges[i].0 = n + 1;
                        } else {
                            edges[i].1 = n + 1;
                        }
                    }
                }
                let mut d2 = decs.clone();
                for (bit, &k) in local.iter().enumerate() {
                    if mask >> (halves.len() + bit) & 1 == 1 {
                        d2[k].0 = n + 1;
                    }
                }
                edges.push((v, n + 1));
                out.extend(self.rebuild(n as u32 + 1, edges, &d2));
            }
        }
        for p in 0..decs.len() {
            let (vp, lp) = decs[p];
            if self.delta_pairs.contains(&(unit.min(lp), unit.max(lp))) {
                let rest: Vec<_> = decs
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != p)
                    .map(|(_, x)| *x)
                    .collect();
                for u in 1..=n {
                    let mut edges = g.edges().to_vec();
                    edges.push((u, vp));
                    out.extend(self.rebuild(n as u32, edges, &rest));
                }
            }
            for (q_idx, &(vq, lq)) in decs.iter().enumerate().skip(p + 1) {
                if self.delta_pairs.contains(&(lp.min(lq), lp.max(lq))) {
                    let rest: Vec<_> = decs
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != p && k != q_idx)
                        .map(|(_, x)| *x)
                        .collect();
                    let mut edges = g.edges().to_vec();
                    edges.push((vp, vq));
                    out.extend(self.rebuild(n as u32, edges, &rest));
                }
            }
        }
        out
    }

    /// Generators whose CE differential can contain `x·y`.
    fn quadratic_preimages(&self, x: &Generator, y: &Generator) -> BTreeSet<Generator> {
        let mut out = BTreeSet::new();
        match (x, y) {
            (Generator::Osp(_), Generator::Osp(_)) => {
                out.extend((0..self.cx.osp_dim() as u16).map(Generator::Osp));
            }
            (Generator::Osp(a), Generator::Graph(g)) | (Generator::Graph(g), Generator::Osp(a)) => {
                let f = &self.space().osp_neg_basis()[*a as usize];
                let unit = self.space().unit() as usize;
                let decs = Self::dec_list(g);
                let n = g.n_internal();
                for (p, &(_, beta)) in decs.iter().enumerate() {
                    for alpha in self.space().reduced_labels() {
                        if !f.matrix[beta as usize][alpha as usize].is_zero() {
                            let mut d2 = decs.clone();
                            d2[p].1 = alpha;
                            out.extend(self.rebuild(n, g.edges().to_vec(), &d2));
                        }
                    }
                }
                for alpha in self.space().reduced_labels() {
                    if !f.matrix[unit][alpha as usize].is_zero() {
                        for u in 1..=n as Vertex {
                            let mut d2 = decs.clone();
                            d2.push((u, alpha));
                            out.extend(self.rebuild(n, g.edges().to_vec(), &d2));
                        }
                    }
                }
            }
            (Generator::Graph(g), Generator::Graph(h)) => {
                let shift = g.n_internal() as Vertex;
                let n = g.n_internal() + h.n_internal();
                let mut edges: Vec<(Vertex, Vertex)> = g.edges().to_vec();
                edges.extend(h.edges().iter().map(|&(u, v)| (u + shift, v + shift)));
                let mut decs = Self::dec_list(g);
                decs.extend(Self::dec_list(h).into_iter().map(|(v, l)| (v + shift, l)));
                let unit = self.space().unit();
                // Slots: (vertex, label, index into decs or None for the unit).
                let slots = |lo: Vertex, hi: Vertex| {
                    let mut s: Vec<(Vertex, Label, Option<usize>)> =
                        (lo..=hi).map(|v| (v, unit, None)).collect();
                    s.extend(
                        decs.iter()
                            .enumerate()
                            .filter(|(_, &(v, _))| v >= lo && v <= hi)
                            .map(|(k, &(v, l))| (v, l, Some(k))),
                    );
                    s
                };
                let left = slots(1, shift);
                let right = slots(shift + 1, n as Vertex);
                for &(u, a, ka) in &left {
                    for &(v, b, kb) in &right {
                        if !self.delta_pairs.contains(&(a.min(b), a.max(b))) {
                            continue;
                        }
                        let rest: Vec<_> = decs
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| Some(k) != ka && Some(k) != kb)
                            .map(|(_, x)| *x)
                            .collect();
                        let mut e2 = edges.clone();
                        e2.push((u, v));
                        out.extend(self.rebuild(n, e2, &rest));
                    }
                }
            }
        }
        out
    }

    /// `d e_x` on a single generator.
    pub fn differential_generator(&self, x: &Generator) -> Vec<(Generator, Q)> {
        let Generator::Graph(g) = x else {
            return Vec::new();
        };
        let neg = !odd(g.degree());
        let mut out = Vec::new();
        for k in self.linear_preimages(g) {
            if let Some(c) = self.decomposition(&k).linear.get(x) {
                out.push((k, signed(c.clone(), neg)));
            }
        }
        out
    }

    /// `[e_x, e_y]` on a pair of generators.
    pub fn bracket_generators(&self, x: &Generator, y: &Generator) -> Vec<(Generator, Q)> {
        let (gx, gy) = (self.ce_degree(x), self.ce_degree(y));
        let (key, swapped) = if x <= y {
            ((x.clone(), y.clone()), false)
        } else {
            ((y.clone(), x.clone()), true)
        };
        // Q^{xy} = (-1)^{g_x g_y} Q^{yx}; the diagonal coefficient is half of Q^{xx}.
        let mut neg = !odd((1 - gx) * gy);
        if swapped {
            neg ^= odd(gx * gy);
        }
        let diagonal = if x == y { q(2) } else { q(1) };
        // Graph-graph brackets are halved so that joining two decorations
        // carries the bare pairing value; the osp part keeps the dual normalization.
        let factor = match (x, y) {
            (Generator::Graph(_), Generator::Graph(_)) => diagonal * q_frac(1, 2),
            _ => diagonal,
        };
        let mut out = Vec::new();
        for k in self.quadratic_preimages(x, y) {
            if let Some(c) = self.decomposition(&k).quadratic.get(&key) {
                out.push((k, signed(c * &factor, neg)));
            }
        }
        out
    }

    /// The Lie differential, dual to the linear part of the CE differential.
    pub fn lie_differential(&self, x: &LieElement) -> LieElement {
        let mut out = x.zero_like();
        for (g, c) in x.terms() {
            for (k, v) in self.differential_generator(&g) {
                out.add_generator(&k, &(c * v));
            }
        }
        out
    }

    /// The bracket; the truncation of the result is the smaller one.
    pub fn bracket(&self, x: &LieElement, y: &LieElement) -> LieElement {
        let t = match (x.truncation(), y.truncation()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let mut out = self.zero(t);
        for (gx, cx) in x.terms() {
            for (gy, cy) in y.terms() {
                if t.is_some_and(|n| self.weight(&gx) + self.weight(&gy) > n) {
                    continue;
                }
                let c = cx * cy;
                for (k, v) in self.bracket_generators(&gx, &gy) {
                    out.add_generator(&k, &(&c * v));
                }
            }
        }
        out
    }

    /// `z₀ = Σ_i (-1)^{|x_i|} (x_i, x_i^#)` on one vertex over the standard basis.
    pub fn z0(&self) -> LieElement {
        let dim = self.space().dim();
        let identity: Vec<Vec<Q>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { q(1) } else { q(0) }).collect())
            .collect();
        self.z0_in_basis(&identity)
            .expect("the standard basis is homogeneous")
    }

    /// `z₀` computed from the homology basis whose `i`-th vector has
    /// coordinates `basis[·][i]` in the basis dual to the labels. The dual
    /// basis uses the homology pairing inverse to the cohomology pairing.
    pub fn z0_in_basis(&self, basis: &[Vec<Q>]) -> Result<LieElement, Error> {
        let space = self.space();
        let dim = space.dim();
        if basis.len() != dim || basis.iter().any(|r| r.len() != dim) {
            return Err(Error::Shape(format!("basis change must be {dim}x{dim}")));
        }
        let mut degrees = Vec::with_capacity(dim);
        for i in 0..dim {
            let ds: BTreeSet<u32> = (0..dim)
                .filter(|&p| !basis[p][i].is_zero())
                .map(|p| space.degree(p as Label))
                .collect();
            if ds.len() != 1 {
                return Err(Error::Shape(format!("basis vector {i} is not homogeneous")));
            }
            degrees.push(*ds.iter().next().unwrap());
        }
        let b = SparseMatQ::from_dense(basis);
        let b_inv = inverse(&b).ok_or_else(|| Error::Shape("basis change is singular".into()))?;
        // x_i^# has coordinates G · B^{-T} (column i).
        let g = SparseMatQ::from_dense(space.pairing_matrix());
        let dual = g.mul(&b_inv.transpose())?.to_dense();
        let mut out = self.zero(None);
        for i in 0..dim {
            let sign = odd(degrees[i] as i64);
            for p in 0..dim {
                if basis[p][i].is_zero() {
                    continue;
                }
                for (qi, row) in dual.iter().enumerate() {
                    if row[i].is_zero() {
                        continue;
                    }
                    let labels: Vec<Label> = [p as Label, qi as Label]
                        .into_iter()
                        .filter(|&l| l != space.unit())
                        .collect();
                    let v = DecoratedGraph::vertex(space, &labels)?;
                    out.add_graph(&v, &signed(&basis[p][i] * &row[i], sign))?;
                }
            }
        }
        Ok(out)
    }

    /// `dz + ½[z,z]` modulo `F^{n+1}`; `z` must be homogeneous of Lie degree 1.
    pub fn mc_residual(&self, z: &LieElement, n: u64) -> Result<LieElement, Error> {
        if let Some(k) = self.degrees(z).into_iter().find(|&k| k != 1) {
            return Err(Error::Shape(format!(
                "MC candidate has a term of Lie degree {k}"
            )));
        }
        let z = z.truncate(n);
        let mut r = self.lie_differential(&z);
        r.add(&self.bracket(&z, &z), &q_frac(1, 2));
        Ok(r.truncate(n))
    }

    /// The twisted differential `d + [z, -]`, refused unless `z` is MC to order `n`.
    pub fn twist(&self, z: &LieElement, n: u64) -> Result<Twisted<'_>, Error> {
        let r = self.mc_residual(z, n)?;
        if !r.is_zero() {
            return Err(Error::NotMaurerCartan(r.len()));
        }
        Ok(Twisted {
            lie: self,
            z: z.truncate(n),
            truncation: n,
        })
    }

    /// `d + [z, -]` without the MC check.
    pub fn twisted_unchecked(&self, z: &LieElement, n: u64) -> Twisted<'_> {
        Twisted {
            lie: self,
            z: z.truncate(n),
            truncation: n,
        }
    }

    /// Canonical generators of Lie degree `degree` and weight `<= weight_max`.
    pub fn window_basis(
        &self,
        degree: i64,
        weight_max: u64,
        min_valence: Option<usize>,
        with_osp: bool,
    ) -> Vec<Generator> {
        let mut out = Vec::new();
        if with_osp {
            for a in 0..self.cx.osp_dim() {
                let x = Generator::Osp(a as u16);
                if self.lie_degree(&x) == degree && self.weight(&x) <= weight_max {
                    out.push(x);
                }
            }
        }
        let flags = BasisFlags {
            connected: true,
            min_valence,
            conv: self.weight_convention(),
            ..Default::default()
        };
        out.extend(
            enumerate_basis(self.space(), 1 - degree, weight_max, &flags)
                .into_iter()
                .filter(|g| g.n_internal() > 0)
                .map(Generator::Graph),
        );
        out
    }

    /// Matrix of a linear map on generators; terms accepted by `dropped`
    /// are ignored, any other term outside `target` is an error.
    pub fn matrix_of(
        &self,
        map: impl Fn(&LieElement) -> LieElement,
        source: &[Generator],
        target: &[Generator],
        dropped: impl Fn(&Generator) -> bool,
        truncation: u64,
    ) -> Result<SparseMatQ, Error> {
        let index: HashMap<&Generator, usize> =
            target.iter().enumerate().map(|(i, x)| (x, i)).collect();
        let mut m = SparseMatQ::zeros(target.len(), source.len());
        for (j, x) in source.iter().enumerate() {
            let image = map(&self.generator_element(x, Some(truncation)));
            for (k, c) in image.terms() {
                match index.get(&k) {
                    Some(&i) => m.add(i, j, c),
                    None if dropped(&k) => {}
                    None => {
                        return Err(Error::Shape(format!(
                            "image term of Lie degree {} and weight {} is outside the target basis",
                            self.lie_degree(&k),
                            self.weight(&k)
                        )))
                    }
                }
            }
        }
        Ok(m)
    }

    /// Matrix of the untwisted Lie differential on connected graphs, from
    /// Lie degree `degree` to `degree + 1`, weight `<= weight_max`.
    pub fn differential_matrix(
        &self,
        degree: i64,
        weight_max: u64,
    ) -> Result<(SparseMatQ, Vec<Generator>, Vec<Generator>), Error> {
        let source = self.window_basis(degree, weight_max, None, false);
        let target = self.window_basis(degree + 1, weight_max, None, false);
        let m = self.matrix_of(
            |x| self.lie_differential(x),
            &source,
            &target,
            |_| false,
            weight_max,
        )?;
        Ok((m, source, target))
    }
}

/// A differential `d + [z, -]` on elements modulo `F^{N+1}`.
pub struct Twisted<'a> {
    lie: &'a GraphLie,
    z: LieElement,
    truncation: u64,
}

impl Twisted<'_> {
    pub fn element(&self) -> &LieElement {
        &self.z
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    pub fn apply(&self, x: &LieElement) -> LieElement {
        let x = x.truncate(self.truncation);
        let mut out = self.lie.lie_differential(&x);
        out.add(&self.lie.bracket(&self.z, &x), &Q::one());
        out.truncate(self.truncation)
    }
}

/// Whether every graph term has all vertices of valence at least 3.
pub fn is_at_least_trivalent(x: &LieElement) -> bool {
    x.graphs()
        .iter()
        .all(|(g, _)| g.min_valence().is_some_and(|v| v >= 3))
}

/// Whether every graph term has some vertex of valence exactly 3.
pub fn has_trivalent_vertex(x: &LieElement) -> bool {
    x.graphs()
        .iter()
        .all(|(g, _)| (1..=g.n_internal() as Vertex).any(|v| g.valence(v) == 3))
}

/// Drops graph terms with a vertex of valence below 3.
pub fn project_at_least_trivalent(x: &LieElement) -> LieElement {
    let mut out = x.zero_like();
    for (k, c) in x.terms() {
        let keep = match &k {
            Generator::Graph(g) => g.min_valence().is_some_and(|v| v >= 3),
            Generator::Osp(_) => true,
        };
        if keep {
            out.add_generator(&k, c);
        }
    }
    out
}

/// Membership in the non-positive truncation `L⟨0⟩` for the differential
/// `differential`: negative degrees, plus degree-0 cocycles.
pub fn is_nonpositive_member(
    lie: &GraphLie,
    x: &LieElement,
    differential: impl Fn(&LieElement) -> LieElement,
) -> bool {
    let mut degree_zero = x.zero_like();
    for (k, c) in x.terms() {
        match lie.lie_degree(&k) {
            d if d > 0 => return false,
            0 => degree_zero.add_generator(&k, c),
            _ => {}
        }
    }
    differential(&degree_zero).is_zero()
}

/// The semidirect product `osp^{<0} ⋉ GC^{≥3}` with the differential of
/// `GC^{z₀}`, twisted by `z` and truncated to `⟨0⟩`.
pub struct GmView<'a> {
    lie: &'a GraphLie,
    twist: LieElement,
    z: LieElement,
    truncation: u64,
}

impl<'a> GmView<'a> {
    /// `d^{z₀} z + ½[z,z]` modulo `F^{n+1}`.
    pub fn residual(lie: &GraphLie, z: &LieElement, n: u64) -> Result<LieElement, Error> {
        if let Some(k) = lie.degrees(z).into_iter().find(|&k| k != 1) {
            return Err(Error::Shape(format!(
                "MC candidate has a term of Lie degree {k}"
            )));
        }
        let z = z.truncate(n);
        let mut r = lie.lie_differential(&z);
        r.add(&lie.bracket(&lie.z0().truncate(n), &z), &q(1));
        r.add(&lie.bracket(&z, &z), &q_frac(1, 2));
        Ok(r.truncate(n))
    }

    /// Checks that `z` lies in the ≥3 view and is MC there to order `n`.
    pub fn assemble(lie: &'a GraphLie, z: &LieElement, n: u64) -> Result<Self, Error> {
        if let Some((g, _)) = z
            .graphs()
            .iter()
            .find(|(g, _)| !g.min_valence().is_some_and(|v| v >= 3))
        {
            return Err(Error::Membership(format!(
                "term with {} vertices has a vertex of valence {}",
                g.n_internal(),
                g.min_valence().unwrap_or(0)
            )));
        }
        if !z.osp().is_empty() {
            return Err(Error::Membership(
                "the twisting element has an osp component".into(),
            ));
        }
        let r = Self::residual(lie, z, n)?;
        if !r.is_zero() {
            return Err(Error::NotMaurerCartan(r.len()));
        }
        let mut twist = lie.z0().truncate(n);
        twist.add(z, &q(1));
        Ok(GmView {
            lie,
            twist,
            z: z.truncate(n),
            truncation: n,
        })
    }

    pub fn lie(&self) -> &GraphLie {
        self.lie
    }

    pub fn element(&self) -> &LieElement {
        &self.z
    }

    pub fn truncation(&self) -> u64 {
        self.truncation
    }

    /// `d + [z₀ + z, -]` followed by the projection to ≥3-valent graphs.
    pub fn differential(&self, x: &LieElement) -> LieElement {
        let x = x.truncate(self.truncation);
        let mut out = self.lie.lie_differential(&x);
        out.add(&self.lie.bracket(&self.twist, &x), &q(1));
        project_at_least_trivalent(&out.truncate(self.truncation))
    }

    pub fn bracket(&self, x: &LieElement, y: &LieElement) -> LieElement {
        project_at_least_trivalent(&self.lie.bracket(x, y).truncate(self.truncation))
    }

    pub fn is_member(&self, x: &LieElement) -> bool {
        is_at_least_trivalent(x) && is_nonpositive_member(self.lie, x, |y| self.differential(y))
    }

    /// Generators of Lie degree `degree` (osp included) with weight `<= weight_max`.
    pub fn generators(&self, degree: i64, weight_max: u64) -> Vec<Generator> {
        self.lie
            .window_basis(degree, weight_max.min(self.truncation), Some(3), true)
    }

    /// The differential from `degree` to `degree + 1` on the window, with
    /// image terms above `weight_max` discarded.
    pub fn differential_matrix(
        &self,
        degree: i64,
        weight_max: u64,
    ) -> Result<(SparseMatQ, Vec<Generator>, Vec<Generator>), Error> {
        let source = self.generators(degree, weight_max);
        let target = self.generators(degree + 1, weight_max);
        let m = self.lie.matrix_of(
            |x| self.differential(x),
            &source,
            &target,
            |k| self.lie.weight(k) > weight_max,
            self.truncation,
        )?;
        Ok((m, source, target))
    }

    /// A basis of the degree-0 cocycles of the window, in the generator order.
    pub fn degree_zero_cocycles(&self, weight_max: u64) -> Result<Vec<LieElement>, Error> {
        let (m, source, _) = self.differential_matrix(0, weight_max)?;
        Ok(kernel_basis(&m)
            .into_iter()
            .map(|v| {
                let mut x = self.lie.zero(Some(self.truncation));
                for (g, c) in source.iter().zip(&v) {
                    x.add_generator(g, c);
                }
                x
            })
            .collect())
    }
}
