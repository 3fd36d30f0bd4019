//! The line-oriented graph term format.
//!
//! ```text
//! truncation=12
//! osp=[(1/1,0),(-1/2,3)]
//! coeff=2/1 d=2 n=1 edges=[] dec=[(1,w)]
//! ```
//!
//! Each term line lists its edges and decorations in orientation-word order.
//! Externals are negative vertex labels. A term of the CE extension carries
//! its osp-dual factors as `xi=[a,b,...]` after the decorations.

use std::fmt::Write as _;

use crate::error::Error;
use crate::gc_lie::{GraphLie, LieElement};
use crate::graph_core::{DecoratedGraph, GraphSum, Vertex};
use crate::pairing_space::{Label, PairingSpace};
use crate::rational::{fmt_q, parse_q, Q};
use crate::twisted_complex::{CESum, CEWord};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TermFile {
    pub truncation: Option<u64>,
    /// `(coefficient, index into the osp^{<0} basis)`.
    pub osp: Vec<(Q, u16)>,
    pub terms: Vec<(Q, CEWord)>,
}

impl TermFile {
    pub fn from_graph_sum(s: &GraphSum) -> Self {
        TermFile {
            truncation: s.truncation(),
            osp: Vec::new(),
            terms: s
                .iter()
                .map(|(g, c)| (c.clone(), CEWord::graph(g.clone())))
                .collect(),
        }
    }

    pub fn from_ce_sum(s: &CESum) -> Self {
        TermFile {
            terms: s.iter().map(|(w, c)| (c.clone(), w.clone())).collect(),
            ..Default::default()
        }
    }

    pub fn from_lie(x: &LieElement) -> Self {
        let mut file = Self::from_graph_sum(x.graphs());
        file.osp = x.osp().iter().map(|(&a, c)| (c.clone(), a)).collect();
        file
    }

    /// A basis manifest: one line per word, coefficient 1, line `k` = index `k`.
    pub fn manifest<'a>(words: impl IntoIterator<Item = &'a CEWord>) -> Self {
        TermFile {
            terms: words
                .into_iter()
                .map(|w| (Q::from_integer(1.into()), w.clone()))
                .collect(),
            ..Default::default()
        }
    }

    /// Sums the terms into canonical form; osp factors are not allowed.
    pub fn to_graph_sum(&self) -> Result<GraphSum, Error> {
        let mut s = GraphSum::new();
        for (c, w) in &self.terms {
            if !w.osp.is_empty() {
                return Err(Error::Parse("graph sum cannot carry xi factors".into()));
            }
            s.add_graph(&w.graph, c);
        }
        if let Some(n) = self.truncation {
            s = s.truncate(n);
        }
        s.set_truncation(self.truncation);
        Ok(s)
    }

    /// Reads the file as an element of the graph Lie algebra.
    pub fn to_lie(&self, lie: &GraphLie) -> Result<LieElement, Error> {
        let mut x = lie.zero(self.truncation);
        for (c, w) in &self.terms {
            if !w.osp.is_empty() {
                return Err(Error::Parse("Lie elements cannot carry xi factors".into()));
            }
            x.add_graph(&w.graph, c)?;
        }
        for (c, a) in &self.osp {
            if *a as usize >= lie.complex().osp_dim() {
                return Err(Error::Parse(format!("osp index {a} out of range")));
            }
            x.add_generator(&crate::gc_lie::Generator::Osp(*a), c);
        }
        Ok(x)
    }

    pub fn render(&self, space: &PairingSpace) -> String {
        let mut out = String::new();
        if let Some(n) = self.truncation {
            writeln!(out, "truncation={n}").unwrap();
        }
        if !self.osp.is_empty() {
            let items: Vec<String> = self
                .osp
                .iter()
                .map(|(c, a)| format!("({},{a})", fmt_q(c)))
                .collect();
            writeln!(out, "osp=[{}]", items.join(",")).unwrap();
        }
        for (c, w) in &self.terms {
            out.push_str(&render_term(space, c, w));
            out.push('\n');
        }
        out
    }

    pub fn parse(space: &PairingSpace, text: &str) -> Result<Self, Error> {
        let mut file = TermFile::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let at = |e: Error| Error::Parse(format!("line {}: {e}", k + 1));
            if line.is_empty() {
                continue;
            }
            if let Some(v) = line.strip_prefix("truncation=") {
                let n = v
                    .trim()
                    .parse()
                    .map_err(|_| at(Error::Parse(format!("bad truncation `{v}`"))))?;
                file.truncation = Some(n);
            } else if let Some(v) = line.strip_prefix("osp=") {
                for item in tuples(v).map_err(at)? {
                    let (c, a) = item
                        .split_once(',')
                        .ok_or_else(|| at(Error::Parse(format!("bad osp pair `{item}`"))))?;
                    let a = a
                        .trim()
                        .parse()
                        .map_err(|_| at(Error::Parse(format!("bad osp index `{a}`"))))?;
                    file.osp.push((parse_q(c).map_err(at)?, a));
                }
            } else {
                file.terms.push(parse_term(space, line).map_err(at)?);
            }
        }
        Ok(file)
    }
}

fn render_term(space: &PairingSpace, c: &Q, w: &CEWord) -> String {
    let g = &w.graph;
    let edges: Vec<String> = g
        .edges()
        .iter()
        .map(|(u, v)| format!("({u},{v})"))
        .collect();
    let decs: Vec<String> = g
        .decorations()
        .iter()
        .map(|x| format!("({},{})", x.vertex, space.label(x.label)))
        .collect();
    let mut line = format!(
        "coeff={} d={} n={} edges=[{}] dec=[{}]",
        fmt_q(c),
        g.d(),
        g.n_internal(),
        edges.join(","),
        decs.join(",")
    );
    if !w.osp.is_empty() {
        let xi: Vec<String> = w.osp.iter().map(u16::to_string).collect();
        write!(line, " xi=[{}]", xi.join(",")).unwrap();
    }
    line
}

fn parse_term(space: &PairingSpace, line: &str) -> Result<(Q, CEWord), Error> {
    let mut coeff = None;
    let mut d = None;
    let mut n = None;
    let mut edges = Vec::new();
    let mut decs = Vec::new();
    let mut osp = Vec::new();
    for field in fields(line)? {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("field `{field}` has no `=`")))?;
        match key {
            "coeff" => coeff = Some(parse_q(value)?),
            "d" => d = Some(int::<u32>(value)?),
            "n" => n = Some(int::<u32>(value)?),
            "edges" => {
                for t in tuples(value)? {
                    let (u, v) = pair(&t)?;
                    edges.push((int::<Vertex>(u)?, int::<Vertex>(v)?));
                }
            }
            "dec" => {
                for t in tuples(value)? {
                    let (v, l) = pair(&t)?;
                    let label: Label = space
                        .label_index(l.trim())
                        .ok_or_else(|| Error::Parse(format!("unknown label `{}`", l.trim())))?;
                    decs.push((int::<Vertex>(v)?, label));
                }
            }
            "xi" => {
                let inner = value
                    .strip_prefix('[')
                    .and_then(|v| v.strip_suffix(']'))
                    .ok_or_else(|| Error::Parse(format!("bad list `{value}`")))?;
                for a in inner.split(',').filter(|s| !s.trim().is_empty()) {
                    osp.push(int::<u16>(a)?);
                }
            }
            other => return Err(Error::Parse(format!("unknown field `{other}`"))),
        }
    }
    let missing = |k: &str| Error::Parse(format!("missing `{k}=`"));
    let d = d.ok_or_else(|| missing("d"))?;
    if d != space.d() {
        return Err(Error::Mismatch(format!(
            "term has d={d}, space has d={}",
            space.d()
        )));
    }
    let g = DecoratedGraph::new(space, n.ok_or_else(|| missing("n"))?, edges, &decs)?;
    Ok((
        coeff.ok_or_else(|| missing("coeff"))?,
        CEWord { osp, graph: g },
    ))
}

/// Splits on whitespace outside brackets.
fn fields(line: &str) -> Result<Vec<&str>, Error> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = None;
    for (i, ch) in line.char_indices() {
        match ch {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            c if c.is_whitespace() && depth == 0 => {
                if let Some(s) = start.take() {
                    out.push(&line[s..i]);
                }
                continue;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse("unbalanced brackets".into()));
        }
        start.get_or_insert(i);
    }
    if depth != 0 {
        return Err(Error::Parse("unbalanced brackets".into()));
    }
    if let Some(s) = start {
        out.push(&line[s..]);
    }
    Ok(out)
}

/// The contents of each `(...)` in a `[...]` list.
fn tuples(value: &str) -> Result<Vec<String>, Error> {
    let inner = value
        .trim()
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| Error::Parse(format!("bad list `{value}`")))?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| Error::Parse(format!("expected `(` in `{value}`")))?;
        let close = open
            .find(')')
            .ok_or_else(|| Error::Parse(format!("unclosed tuple in `{value}`")))?;
        out.push(open[..close].to_string());
        rest = open[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
        }
    }
    Ok(out)
}

fn pair(t: &str) -> Result<(&str, &str), Error> {
    t.split_once(',')
        .ok_or_else(|| Error::Parse(format!("expected a pair, got `({t})`")))
}

fn int<T: std::str::FromStr>(s: &str) -> Result<T, Error> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad integer `{}`", s.trim())))
}
