//! Poincaré-duality pairing spaces: loading, dual bases, the diagonal class
//! and the negative-degree ortho-symplectic Lie algebra.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exact_linalg::{inverse, kernel_basis, solve, SparseMatQ};
use crate::rational::{fmt_q, parse_q, Q};

/// Index of a basis element of a [`PairingSpace`].
pub type Label = u16;

/// A finite graded space `V = Q·1 ⊕ V̄` with a non-degenerate graded-symmetric
/// pairing of degree `-d`.
#[derive(Clone, Debug)]
pub struct PairingSpace {
    d: u32,
    labels: Vec<String>,
    degrees: Vec<u32>,
    unit: Label,
    /// `pairing[i][j] = <v_i, v_j>`.
    pairing: Vec<Vec<Q>>,
    /// Column `j` holds the coordinates of `v_j^#`.
    dual: Vec<Vec<Q>>,
    /// Nonzero terms `c · v_i ⊗ v_k` of the diagonal class.
    diagonal: Vec<(Label, Label, Q)>,
    osp: Vec<OspElement>,
    warnings: Vec<String>,
}

impl PartialEq for PairingSpace {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d
            && self.labels == other.labels
            && self.degrees == other.degrees
            && self.pairing == other.pairing
    }
}

impl Eq for PairingSpace {}

#[derive(Deserialize, Serialize)]
struct SpaceDoc {
    d: i64,
    basis: Vec<BasisDoc>,
    #[serde(default)]
    pairing: Vec<(String, String, String)>,
}

#[derive(Deserialize, Serialize)]
struct BasisDoc {
    label: String,
    degree: i64,
}

fn valid_token(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(x) if x.is_ascii_alphabetic())
        && c.all(|x| x.is_ascii_alphanumeric() || x == '_')
}

fn odd(x: i64) -> bool {
    x.rem_euclid(2) == 1
}

impl PairingSpace {
    /// Builds and validates a space. `entries` lists `<a,b>` values; a
    /// missing transpose is filled in by graded symmetry.
    pub fn new(
        d: i64,
        basis: Vec<(String, i64)>,
        entries: Vec<(String, String, Q)>,
    ) -> Result<PairingSpace, Error> {
        if d < 2 {
            return Err(Error::InvalidSpace(format!(
                "ambient dimension d={d} is not supported (need d >= 2)"
            )));
        }
        let d = d as u32;
        let mut labels = Vec::new();
        let mut degrees = Vec::new();
        for (label, deg) in basis {
            if !valid_token(&label) {
                return Err(Error::InvalidSpace(format!("bad label `{label}`")));
            }
            if labels.contains(&label) {
                return Err(Error::InvalidSpace(format!("duplicate label `{label}`")));
            }
            if deg < 0 || deg > d as i64 {
                return Err(Error::InvalidSpace(format!(
                    "label `{label}` has degree {deg} outside 0..={d}"
                )));
            }
            labels.push(label);
            degrees.push(deg as u32);
        }
        let zero_deg: Vec<usize> = (0..labels.len()).filter(|&i| degrees[i] == 0).collect();
        let unit = match zero_deg.as_slice() {
            [u] => *u as Label,
            [] => return Err(Error::Unit("missing unit (no degree-0 element)".into())),
            _ => {
                return Err(Error::Unit(
                    "duplicate unit (more than one degree-0 element)".into(),
                ))
            }
        };
        let n = labels.len();
        let idx = |l: &str| {
            labels
                .iter()
                .position(|x| x == l)
                .ok_or_else(|| Error::InvalidSpace(format!("unknown label `{l}` in pairing")))
        };
        let mut given: Vec<Vec<Option<Q>>> = vec![vec![None; n]; n];
        for (a, b, v) in entries {
            let (i, j) = (idx(&a)?, idx(&b)?);
            if !v.is_zero() && degrees[i] + degrees[j] != d {
                return Err(Error::DegreeMismatch {
                    a,
                    b,
                    da: degrees[i],
                    db: degrees[j],
                    d,
                });
            }
            if given[i][j].as_ref().is_some_and(|old| *old != v) {
                return Err(Error::InvalidSpace(format!(
                    "conflicting entries for <{a},{b}>"
                )));
            }
            given[i][j] = Some(v);
        }
        let mut pairing = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let s = if odd(degrees[i] as i64 * degrees[j] as i64) {
                    -Q::one()
                } else {
                    Q::one()
                };
                pairing[i][j] = match (&given[i][j], &given[j][i]) {
                    (Some(x), Some(y)) => {
                        if *x != &s * y {
                            return Err(Error::SymmetryViolation(
                                labels[i].clone(),
                                labels[j].clone(),
                            ));
                        }
                        x.clone()
                    }
                    (Some(x), None) => x.clone(),
                    (None, Some(y)) => &s * y,
                    (None, None) => Q::zero(),
                };
            }
        }
        let g = SparseMatQ::from_dense(&pairing);
        let inv = match inverse(&g) {
            Some(inv) => inv,
            None => {
                let k = &kernel_basis(&g)[0];
                let text: Vec<String> = k
                    .iter()
                    .zip(&labels)
                    .filter(|(v, _)| !v.is_zero())
                    .map(|(v, l)| format!("{}*{}", fmt_q(v), l))
                    .collect();
                return Err(Error::DegeneratePairing(text.join(" + ")));
            }
        };
        let dual = inv.to_dense();
        let mut diagonal = Vec::new();
        for i in 0..n {
            for k in 0..n {
                let c = &dual[k][i];
                if !c.is_zero() {
                    let v = if odd(degrees[i] as i64) {
                        -c
                    } else {
                        c.clone()
                    };
                    diagonal.push((i as Label, k as Label, v));
                }
            }
        }
        let mut warnings = Vec::new();
        if d <= 2 {
            warnings.push(format!(
                "d = {d}: accepted, but the geometric statements assume dimension > 2"
            ));
        }
        let mut space = PairingSpace {
            d,
            labels,
            degrees,
            unit,
            pairing,
            dual,
            diagonal,
            osp: Vec::new(),
            warnings,
        };
        space.osp = space.compute_osp_neg_basis();
        Ok(space)
    }

    /// Parses the JSON space document.
    pub fn load(document: &str) -> Result<PairingSpace, Error> {
        let doc: SpaceDoc =
            serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
        let basis = doc.basis.into_iter().map(|b| (b.label, b.degree)).collect();
        let mut entries = Vec::new();
        for (a, b, v) in doc.pairing {
            entries.push((a, b, parse_q(&v)?));
        }
        PairingSpace::new(doc.d, basis, entries)
    }

    /// Canonical JSON document (one pairing entry per nonzero matrix entry).
    pub fn to_json(&self) -> String {
        let doc = SpaceDoc {
            d: self.d as i64,
            basis: self
                .labels
                .iter()
                .zip(&self.degrees)
                .map(|(l, &g)| BasisDoc {
                    label: l.clone(),
                    degree: g as i64,
                })
                .collect(),
            pairing: self
                .pairs()
                .map(|(i, j, v)| (self.labels[i].clone(), self.labels[j].clone(), fmt_q(v)))
                .collect(),
        };
        serde_json::to_string_pretty(&doc).unwrap()
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize, &Q)> {
        let n = self.dim();
        (0..n)
            .flat_map(move |i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.pairing[i][j].is_zero())
            .map(|(i, j)| (i, j, &self.pairing[i][j]))
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn unit(&self) -> Label {
        self.unit
    }

    pub fn label(&self, i: Label) -> &str {
        &self.labels[i as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn degree(&self, i: Label) -> u32 {
        self.degrees[i as usize]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn label_index(&self, label: &str) -> Option<Label> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| i as Label)
    }

    /// Labels of the reduced part `V̄` (everything but the unit), in basis order.
    pub fn reduced_labels(&self) -> impl Iterator<Item = Label> + '_ {
        (0..self.dim() as Label).filter(move |&i| i != self.unit)
    }

    pub fn pairing(&self, i: Label, j: Label) -> &Q {
        &self.pairing[i as usize][j as usize]
    }

    pub fn pairing_matrix(&self) -> &[Vec<Q>] {
        &self.pairing
    }

    /// `v_j^#` as coordinates over the basis, for each `j`.
    pub fn dual_basis(&self) -> Vec<Vec<Q>> {
        (0..self.dim())
            .map(|j| (0..self.dim()).map(|k| self.dual[k][j].clone()).collect())
            .collect()
    }

    /// Nonzero terms `(i, k, c)` of `Δ = Σ c · v_i ⊗ v_k`.
    pub fn diagonal_class(&self) -> &[(Label, Label, Q)] {
        &self.diagonal
    }

    pub fn diagonal_matrix(&self) -> Vec<Vec<Q>> {
        let n = self.dim();
        let mut m = vec![vec![Q::zero(); n]; n];
        for (i, k, c) in &self.diagonal {
            m[*i as usize][*k as usize] = c.clone();
        }
        m
    }

    pub fn osp_neg_basis(&self) -> &[OspElement] {
        &self.osp
    }

    /// Bilinear pairing of two coordinate vectors.
    pub fn pair_vectors(&self, x: &[Q], y: &[Q]) -> Q {
        let mut s = Q::zero();
        for (i, j, v) in self.pairs() {
            if !x[i].is_zero() && !y[j].is_zero() {
                s += v * &x[i] * &y[j];
            }
        }
        s
    }

    fn compute_osp_neg_basis(&self) -> Vec<OspElement> {
        let n = self.dim();
        let mut out = Vec::new();
        for delta in 1..=self.d as i64 {
            let degree = -delta;
            // Unknowns: F[i][j] for deg(v_i) = deg(v_j) + degree, j != unit.
            let mut unknowns = Vec::new();
            for j in 0..n {
                if j == self.unit as usize {
                    continue;
                }
                for i in 0..n {
                    if self.degrees[i] as i64 == self.degrees[j] as i64 + degree {
                        unknowns.push((i, j));
                    }
                }
            }
            if unknowns.is_empty() {
                continue;
            }
            // <f(v_a), v_b> + (-1)^{degree·|v_a|} <v_a, f(v_b)> = 0.
            let mut eqs = SparseMatQ::zeros(n * n, unknowns.len());
            for a in 0..n {
                for b in 0..n {
                    let row = a * n + b;
                    let s = if odd(degree * self.degrees[a] as i64) {
                        -Q::one()
                    } else {
                        Q::one()
                    };
                    for (u, &(i, j)) in unknowns.iter().enumerate() {
                        if j == a {
                            eqs.add(row, u, &self.pairing[i][b]);
                        }
                        if j == b {
                            eqs.add(row, u, &(&s * &self.pairing[a][i]));
                        }
                    }
                }
            }
            for v in kernel_basis(&eqs) {
                let mut matrix = vec![vec![Q::zero(); n]; n];
                for (u, &(i, j)) in unknowns.iter().enumerate() {
                    matrix[i][j] = v[u].clone();
                }
                out.push(OspElement { degree, matrix });
            }
        }
        out
    }

    /// Expands a negative-degree map over `osp_neg_basis`, if it lies in the span.
    pub fn osp_coordinates(&self, f: &OspElement) -> Option<Vec<Q>> {
        let basis: Vec<usize> = (0..self.osp.len()).collect();
        let n = self.dim();
        let mut m = SparseMatQ::zeros(n * n, basis.len());
        for (c, &k) in basis.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    m.add(i * n + j, c, &self.osp[k].matrix[i][j]);
                }
            }
        }
        let mut rhs = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rhs.push(f.matrix[i][j].clone());
            }
        }
        solve(&m, &rhs)
    }

    /// Graded commutator `f∘g - (-1)^{|f||g|} g∘f` and its basis expansion.
    pub fn osp_bracket(&self, f: &OspElement, g: &OspElement) -> (OspElement, Vec<Q>) {
        let degree = f.degree + g.degree;
        assert!(degree < 0, "bracket left osp^<0");
        let fg = f.compose(g);
        let gf = g.compose(f);
        let s = if odd(f.degree * g.degree) {
            Q::one()
        } else {
            -Q::one()
        };
        let n = self.dim();
        let mut matrix = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                matrix[i][j] = &fg.matrix[i][j] + &s * &gf.matrix[i][j];
            }
        }
        let h = OspElement { degree, matrix };
        let coords = self
            .osp_coordinates(&h)
            .expect("osp^<0 is closed under the graded commutator");
        (h, coords)
    }

    /// Checks the two defining conditions of `osp` on all basis pairs.
    pub fn is_osp(&self, f: &OspElement) -> bool {
        let n = self.dim();
        if f.matrix.iter().any(|r| !r[self.unit as usize].is_zero()) {
            return false;
        }
        for a in 0..n {
            for b in 0..n {
                let fa = f.column(a);
                let fb = f.column(b);
                let mut e = vec![Q::zero(); n];
                e[a] = Q::one();
                let mut eb = vec![Q::zero(); n];
                eb[b] = Q::one();
                let s = if odd(f.degree * self.degrees[a] as i64) {
                    -Q::one()
                } else {
                    Q::one()
                };
                let total = self.pair_vectors(&fa, &eb) + s * self.pair_vectors(&e, &fb);
                if !total.is_zero() {
                    return false;
                }
            }
        }
        true
    }
}

/// A homogeneous linear endomorphism of negative degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OspElement {
    pub degree: i64,
    /// `matrix[i][j]` is the coefficient of `v_i` in `f(v_j)`.
    pub matrix: Vec<Vec<Q>>,
}

impl OspElement {
    pub fn zero(dim: usize, degree: i64) -> Self {
        OspElement {
            degree,
            matrix: vec![vec![Q::zero(); dim]; dim],
        }
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        self.matrix.iter().map(|r| r[j].clone()).collect()
    }

    pub fn compose(&self, other: &OspElement) -> OspElement {
        let n = self.matrix.len();
        let mut matrix = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            for k in 0..n {
                if self.matrix[i][k].is_zero() {
                    continue;
                }
                for j in 0..n {
                    if !other.matrix[k][j].is_zero() {
                        matrix[i][j] += &self.matrix[i][k] * &other.matrix[k][j];
                    }
                }
            }
        }
        OspElement {
            degree: self.degree + other.degree,
            matrix,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|r| r.iter().all(Q::is_zero))
    }
}

/// Bundled example spaces, by file stem.
pub mod builtin {
    pub const S2: &str = include_str!("../spaces/s2.space");
    pub const S3: &str = include_str!("../spaces/s3.space");
    pub const S4: &str = include_str!("../spaces/s4.space");
    pub const T2: &str = include_str!("../spaces/t2.space");

    pub const ALL: [(&str, &str); 4] = [("s2", S2), ("s3", S3), ("s4", S4), ("t2", T2)];

    pub fn get(name: &str) -> Option<super::PairingSpace> {
        ALL.iter()
            .find(|(n, _)| *n == name)
            .map(|(_, doc)| super::PairingSpace::load(doc).expect("bundled space is valid"))
    }
}
