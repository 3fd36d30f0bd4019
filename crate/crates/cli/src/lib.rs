//! Command implementations for the `gcx` binary.
//!
//! Every command produces an [`Outcome`]: text for stdout, files to write,
//! and an exit code. Nothing here touches the process state, so the golden
//! check can replay commands in memory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::thread;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gcx::exact_linalg::{check_composite, cohomology_dim, SparseMatQ};
use gcx::gc_lie::{is_at_least_trivalent, Generator, GmView, GraphLie, LieElement};
use gcx::pairing_space::{builtin, PairingSpace};
use gcx::term_file::TermFile;
use gcx::twisted_complex::{CEWord, FullGraphComplex, Window};
use gcx::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

const DEFAULT_MAX_BASIS: usize = 200_000;
const DEFAULT_MAX_ENTRIES: usize = 5_000_000;
const D2_CACHE: usize = 300_000;

#[derive(Parser, Debug)]
#[command(name = "gcx", version, about = "Exact decorated graph complexes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pairing space files.
    Space {
        #[command(subcommand)]
        action: SpaceAction,
    },
    /// Write the canonical basis manifest of each degree.
    Basis(WindowArgs),
    /// Write differential matrices (SMS) and the manifests of both sides.
    Dmatrix(WindowArgs),
    /// Check that the differential squares to zero on the window.
    VerifyD2(WindowArgs),
    /// Print cohomology dimensions per degree.
    Cohomology(WindowArgs),
    /// Check the Maurer-Cartan equation for an element file.
    McCheck(McArgs),
    /// Bracket of two element files.
    Bracket(BracketArgs),
    /// The element z₀ of a space.
    Z0(Z0Args),
    /// Compare or regenerate the bundled golden outputs.
    Golden(GoldenArgs),
}

#[derive(Subcommand, Debug)]
pub enum SpaceAction {
    Validate { file: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum View {
    /// The full graph complex (possibly disconnected graphs).
    #[default]
    Fgc,
    /// Connected graphs with the Lie differential.
    Gc,
    /// `osp^{<0} ⋉ GC` with the Lie differential.
    OspSemidirect,
    /// `GC^{≥3}` with the differential twisted by z₀.
    Ge3,
    /// The truncated, twisted semidirect product; needs `--element`.
    Gm,
}

#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    /// A space file, or the name of a bundled one (`s2.space`, ...).
    #[arg(long)]
    pub space: String,
    /// Expected dimension; must match the file.
    #[arg(long)]
    pub d: Option<u32>,
}

#[derive(Args, Debug, Clone)]
pub struct CapArgs {
    /// Largest basis per degree (default: $GCX_MAX_BASIS or 200000).
    #[arg(long)]
    pub max_basis: Option<usize>,
    /// Largest number of nonzero matrix entries.
    #[arg(long)]
    pub max_entries: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct WindowArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Degree or inclusive range `a..b`.
    #[arg(long, allow_hyphen_values = true)]
    pub degree: String,
    /// Keep graphs of filtration weight at most this.
    #[arg(long)]
    pub weight_max: u64,
    #[arg(long, value_enum, default_value_t = View::Fgc)]
    pub view: View,
    /// fgc view: connected graphs only (linear part of the differential).
    #[arg(long)]
    pub connected: bool,
    /// fgc view: drop graphs with a vertex of smaller valence.
    #[arg(long)]
    pub min_valence: Option<usize>,
    /// fgc view: include the osp-dual factors.
    #[arg(long)]
    pub ce: bool,
    /// gm view: the twisting element.
    #[arg(long)]
    pub element: Option<String>,
    /// gm view: drop terms of weight above this (defaults to `--weight-max`).
    #[arg(long)]
    pub truncation: Option<u64>,
    /// Output directory for `basis` and `dmatrix`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for `verify-d2`.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Args, Debug, Clone)]
pub struct McArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub element: String,
    /// Order of the check; defaults to the element's own `truncation=` header.
    #[arg(long)]
    pub truncation: Option<u64>,
    /// `gc` (default) or `ge3`/`gm` for the twisted ≥3 equation.
    #[arg(long, value_enum, default_value_t = View::Gc)]
    pub view: View,
}

#[derive(Args, Debug, Clone)]
pub struct BracketArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub x: String,
    #[arg(long)]
    pub y: String,
    #[arg(long, value_enum, default_value_t = View::Gc)]
    pub view: View,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct Z0Args {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Written as the `truncation=` header of the output.
    #[arg(long)]
    pub truncation: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct GoldenArgs {
    /// Directory holding the golden files.
    #[arg(long)]
    pub dir: PathBuf,
    /// Rewrite the golden files instead of comparing.
    #[arg(long)]
    pub regen_golden: bool,
}

/// What a command produced.
#[derive(Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub files: Vec<(PathBuf, String)>,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            ..Default::default()
        }
    }

    /// Writes the files; the caller prints `stdout` and exits with `code`.
    pub fn write_files(&self) -> Result<(), Error> {
        for (path, text) in &self.files {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text)?;
        }
        Ok(())
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::CapExceeded { .. } => EXIT_CAP,
        Error::NonzeroComposite { .. } | Error::NotMaurerCartan(_) => EXIT_VIOLATION,
        _ => EXIT_VALIDATION,
    }
}

pub fn run(command: &Command) -> Result<Outcome, Error> {
    match command {
        Command::Space {
            action: SpaceAction::Validate { file },
        } => validate(file),
        Command::Basis(a) => basis(a),
        Command::Dmatrix(a) => dmatrix(a),
        Command::VerifyD2(a) => verify_d2(a),
        Command::Cohomology(a) => cohomology(a),
        Command::McCheck(a) => mc_check(a),
        Command::Bracket(a) => bracket(a),
        Command::Z0(a) => z0(a),
        Command::Golden(a) => golden(a),
    }
}

fn read_text(path: &str) -> Result<String, Error> {
    if Path::new(path).exists() {
        return Ok(std::fs::read_to_string(path)?);
    }
    let stem = Path::new(path)
        .file_name()
        .and_then(|f| f.to_str())
        .and_then(|f| f.strip_suffix(".space"))
        .unwrap_or(path);
    builtin::ALL
        .iter()
        .find(|(name, _)| *name == stem)
        .map(|(_, doc)| doc.to_string())
        .ok_or_else(|| {
            Error::Io(std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("{path}: no such file"),
            ))
        })
}

fn load_space(args: &SpaceArgs) -> Result<PairingSpace, Error> {
    let space = PairingSpace::load(&read_text(&args.space)?)?;
    if let Some(d) = args.d.filter(|&d| d != space.d()) {
        return Err(Error::Mismatch(format!(
            "--d {d} but the file has d={}",
            space.d()
        )));
    }
    Ok(space)
}

fn validate(file: &str) -> Result<Outcome, Error> {
    let space = PairingSpace::load(&read_text(file)?)?;
    let mut out = String::new();
    writeln!(
        out,
        "OK d={} dim={} osp_neg_dim={}",
        space.d(),
        space.dim(),
        space.osp_neg_basis().len()
    )
    .unwrap();
    for w in space.warnings() {
        writeln!(out, "warning: {w}").unwrap();
    }
    Ok(Outcome::ok(out))
}

/// `a..b` (inclusive) or a single degree.
pub fn parse_degrees(text: &str) -> Result<Vec<i64>, Error> {
    let bad = || Error::Parse(format!("bad degree range `{text}`"));
    let (a, b) = match text.split_once("..") {
        Some((a, b)) => (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ),
        None => {
            let a: i64 = text.trim().parse().map_err(|_| bad())?;
            (a, a)
        }
    };
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

fn max_basis(caps: &CapArgs) -> Result<usize, Error> {
    if let Some(c) = caps.max_basis {
        return Ok(c);
    }
    match std::env::var("GCX_MAX_BASIS") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("GCX_MAX_BASIS=`{v}` is not a count"))),
        Err(_) => Ok(DEFAULT_MAX_BASIS),
    }
}

fn check_entries(m: &SparseMatQ, caps: &CapArgs, degree: i64) -> Result<(), Error> {
    let cap = caps.max_entries.unwrap_or(DEFAULT_MAX_ENTRIES);
    if m.nnz() > cap {
        return Err(Error::CapExceeded {
            what: format!("matrix from degree {degree}"),
            size: m.nnz(),
            cap,
        });
    }
    Ok(())
}

/// A window of one of the views, with bases and matrices per degree.
enum Complex<'a> {
    Full {
        cx: FullGraphComplex,
        window: Window,
    },
    Lie {
        lie: &'a GraphLie,
        view: View,
        gm: Option<GmView<'a>>,
        weight_max: u64,
        cap: usize,
    },
}

/// A basis element of either side.
enum Element {
    Word(CEWord),
    Generator(Generator),
}

impl Complex<'_> {
    fn basis(&self, degree: i64) -> Result<Vec<Element>, Error> {
        match self {
            Complex::Full { cx, window } => Ok(cx
                .window_basis(window, degree)?
                .into_iter()
                .map(Element::Word)
                .collect()),
            Complex::Lie {
                lie,
                view,
                gm,
                weight_max,
                cap,
            } => {
                let gens = match view {
                    View::Gc => lie.window_basis(degree, *weight_max, None, false),
                    View::OspSemidirect => lie.window_basis(degree, *weight_max, None, true),
                    View::Ge3 => lie.window_basis(degree, *weight_max, Some(3), false),
                    View::Gm => {
                        if degree > 0 {
                            Vec::new()
                        } else {
                            gm.as_ref().unwrap().generators(degree, *weight_max)
                        }
                    }
                    View::Fgc => unreachable!(),
                };
                if gens.len() > *cap {
                    return Err(Error::CapExceeded {
                        what: format!("basis in degree {degree}"),
                        size: gens.len(),
                        cap: *cap,
                    });
                }
                Ok(gens.into_iter().map(Element::Generator).collect())
            }
        }
    }

    /// The matrix from `degree` to `degree + 1`.
    fn matrix(&self, degree: i64) -> Result<SparseMatQ, Error> {
        match self {
            Complex::Full { cx, window } => Ok(cx.differential_matrix(window, degree)?.0),
            Complex::Lie {
                lie,
                view,
                gm,
                weight_max,
                ..
            } => {
                let source = self.generators(degree)?;
                let target = self.generators(degree + 1)?;
                let w = *weight_max;
                let dropped = |k: &Generator| lie.weight(k) > w;
                match view {
                    View::Gc | View::OspSemidirect => {
                        lie.matrix_of(|x| lie.lie_differential(x), &source, &target, dropped, w)
                    }
                    View::Ge3 | View::Gm => {
                        let gm = gm.as_ref().unwrap();
                        if *view == View::Gm && degree > 0 {
                            return Ok(SparseMatQ::zeros(0, source.len()));
                        }
                        let target = if *view == View::Gm && degree == 0 {
                            gm.generators(1, w)
                        } else {
                            target
                        };
                        lie.matrix_of(|x| gm.differential(x), &source, &target, dropped, w)
                    }
                    View::Fgc => unreachable!(),
                }
            }
        }
    }

    fn generators(&self, degree: i64) -> Result<Vec<Generator>, Error> {
        Ok(self
            .basis(degree)?
            .into_iter()
            .filter_map(|e| match e {
                Element::Generator(g) => Some(g),
                Element::Word(_) => None,
            })
            .collect())
    }

    fn manifest(&self, space: &PairingSpace, degree: i64) -> Result<String, Error> {
        let basis = self.basis(degree)?;
        let mut out = String::new();
        for e in &basis {
            match e {
                Element::Word(w) => out.push_str(&TermFile::manifest([w]).render(space)),
                Element::Generator(Generator::Graph(g)) => {
                    out.push_str(&TermFile::manifest([&CEWord::graph(g.clone())]).render(space))
                }
                Element::Generator(Generator::Osp(a)) => writeln!(out, "osp=[(1/1,{a})]").unwrap(),
            }
        }
        Ok(out)
    }
}

fn with_complex<T>(
    a: &WindowArgs,
    f: impl FnOnce(&PairingSpace, &Complex) -> Result<T, Error>,
) -> Result<T, Error> {
    let space = load_space(&a.space)?;
    let cap = max_basis(&a.caps)?;
    if a.view == View::Fgc {
        let complex = Complex::Full {
            cx: FullGraphComplex::new(&space),
            window: Window {
                weight_max: a.weight_max,
                connected: a.connected,
                min_valence: a.min_valence,
                ce: a.ce,
                cap: Some(cap),
            },
        };
        return f(&space, &complex);
    }
    if a.connected || a.min_valence.is_some() || a.ce {
        return Err(Error::Parse(
            "--connected, --min-valence and --ce apply to the fgc view only".into(),
        ));
    }
    let lie = GraphLie::new(&space);
    let truncation = a.truncation.unwrap_or(a.weight_max);
    let gm = match a.view {
        View::Gm => {
            let path = a
                .element
                .as_ref()
                .ok_or_else(|| Error::Parse("the gm view needs --element".into()))?;
            let (z, n) = read_element(&lie, path, a.truncation)?;
            Some(GmView::assemble(&lie, &z, n.max(truncation))?)
        }
        View::Ge3 => Some(GmView::assemble(&lie, &lie.zero(None), truncation)?),
        _ => None,
    };
    let complex = Complex::Lie {
        lie: &lie,
        view: a.view,
        gm,
        weight_max: a.weight_max,
        cap,
    };
    f(&space, &complex)
}

fn require_out(a: &WindowArgs) -> Result<&Path, Error> {
    a.out
        .as_deref()
        .ok_or_else(|| Error::Parse("--out <dir> is required".into()))
}

fn basis(a: &WindowArgs) -> Result<Outcome, Error> {
    let dir = require_out(a)?;
    with_complex(a, |space, cx| {
        let mut out = Outcome::default();
        for k in parse_degrees(&a.degree)? {
            let text = cx.manifest(space, k)?;
            writeln!(out.stdout, "degree {k}: {} elements", text.lines().count()).unwrap();
            out.files.push((dir.join(format!("basis_{k}.terms")), text));
        }
        Ok(out)
    })
}

fn dmatrix(a: &WindowArgs) -> Result<Outcome, Error> {
    let dir = require_out(a)?;
    with_complex(a, |space, cx| {
        let mut out = Outcome::default();
        let degrees = parse_degrees(&a.degree)?;
        for &k in &degrees {
            let m = cx.matrix(k)?;
            check_entries(&m, &a.caps, k)?;
            writeln!(
                out.stdout,
                "degree {k} -> {}: {}x{}, {} entries",
                k + 1,
                m.rows(),
                m.cols(),
                m.nnz()
            )
            .unwrap();
            out.files.push((dir.join(format!("d_{k}.sms")), m.to_sms()));
        }
        let lo = degrees[0];
        let hi = degrees[degrees.len() - 1] + 1;
        for k in lo..=hi {
            out.files
                .push((dir.join(format!("basis_{k}.terms")), cx.manifest(space, k)?));
        }
        Ok(out)
    })
}

fn verify_d2(a: &WindowArgs) -> Result<Outcome, Error> {
    with_complex(a, |space, cx| {
        let mut out = Outcome::default();
        let degrees = parse_degrees(&a.degree)?;
        match cx {
            Complex::Full { cx, window } => {
                let mut words = Vec::new();
                for &k in &degrees {
                    words.extend(cx.window_basis(window, k)?);
                }
                // Keep every osp word of one graph together for the cache.
                words.sort_by(|x, y| (&x.graph, &x.osp).cmp(&(&y.graph, &y.osp)));
                match square_words(space, &words, a.jobs.max(1)) {
                    Ok(n) => writeln!(out.stdout, "d^2 = 0 on {n} words").unwrap(),
                    Err((w, residual)) => {
                        writeln!(out.stdout, "d^2 != 0 on the word").unwrap();
                        out.stdout.push_str(&TermFile::manifest([&w]).render(space));
                        writeln!(out.stdout, "residual:").unwrap();
                        out.stdout
                            .push_str(&TermFile::from_ce_sum(&residual).render(space));
                        out.code = EXIT_VIOLATION;
                    }
                }
            }
            Complex::Lie { .. } => {
                for &k in &degrees {
                    let d_in = cx.matrix(k)?;
                    let d_out = cx.matrix(k + 1)?;
                    check_entries(&d_in, &a.caps, k)?;
                    match check_composite(&d_in, &d_out) {
                        Ok(()) => writeln!(
                            out.stdout,
                            "degree {k}: d^2 = 0 ({} generators)",
                            d_in.cols()
                        )
                        .unwrap(),
                        Err(e @ Error::NonzeroComposite { .. }) => {
                            writeln!(out.stdout, "degree {k}: {e}").unwrap();
                            out.code = EXIT_VIOLATION;
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        Ok(out)
    })
}

/// Squares the differential on contiguous slices of `words` in parallel.
fn square_words(
    space: &PairingSpace,
    words: &[CEWord],
    jobs: usize,
) -> Result<usize, (CEWord, gcx::twisted_complex::CESum)> {
    let chunk = words.len().div_ceil(jobs).max(1);
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = words
            .chunks(chunk)
            .map(|part| {
                s.spawn(move || {
                    let cx = FullGraphComplex::new(space);
                    cx.verify_d2(part, D2_CACHE / jobs)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(total)
}

fn cohomology(a: &WindowArgs) -> Result<Outcome, Error> {
    with_complex(a, |_, cx| {
        let mut out = Outcome::default();
        writeln!(out.stdout, "degree dim").unwrap();
        for k in parse_degrees(&a.degree)? {
            let d_in = cx.matrix(k - 1)?;
            let d_out = cx.matrix(k)?;
            check_entries(&d_in, &a.caps, k - 1)?;
            check_entries(&d_out, &a.caps, k)?;
            writeln!(out.stdout, "{k} {}", cohomology_dim(&d_in, &d_out)?).unwrap();
        }
        Ok(out)
    })
}

/// Reads an element file; the truncation comes from the file or `flag`.
fn read_element(lie: &GraphLie, path: &str, flag: Option<u64>) -> Result<(LieElement, u64), Error> {
    let file = TermFile::parse(lie.space(), &read_text(path)?)?;
    let n = match (file.truncation, flag) {
        (Some(t), Some(n)) if t < n => {
            return Err(Error::Parse(format!(
                "{path} is truncated at {t}, below {n}"
            )));
        }
        (_, Some(n)) => n,
        (Some(t), None) => t,
        (None, None) => return Err(Error::Parse(format!("{path} has no truncation=N line"))),
    };
    Ok((file.to_lie(lie)?, n))
}

fn mc_check(a: &McArgs) -> Result<Outcome, Error> {
    let space = load_space(&a.space)?;
    let lie = GraphLie::new(&space);
    let (z, n) = read_element(&lie, &a.element, a.truncation)?;
    let residual = match a.view {
        View::Gc | View::OspSemidirect => lie.mc_residual(&z, n)?,
        View::Ge3 | View::Gm => {
            if !is_at_least_trivalent(&z) {
                return Err(Error::Membership(
                    "the element has a vertex of valence below 3".into(),
                ));
            }
            GmView::residual(&lie, &z, n)?
        }
        View::Fgc => {
            return Err(Error::Parse(
                "mc-check works on the Lie side (gc, ge3, gm)".into(),
            ))
        }
    };
    if residual.is_zero() {
        return Ok(Outcome::ok(format!("MC to order {n}\n")));
    }
    let mut out = Outcome {
        code: EXIT_VIOLATION,
        ..Default::default()
    };
    writeln!(out.stdout, "residual ({} terms):", residual.len()).unwrap();
    out.stdout
        .push_str(&TermFile::from_lie(&residual).render(&space));
    Ok(out)
}

fn emit(space: &PairingSpace, file: TermFile, out: &Option<PathBuf>) -> Outcome {
    let text = file.render(space);
    match out {
        Some(path) => Outcome {
            files: vec![(path.clone(), text)],
            ..Default::default()
        },
        None => Outcome::ok(text),
    }
}

fn bracket(a: &BracketArgs) -> Result<Outcome, Error> {
    let space = load_space(&a.space)?;
    let lie = GraphLie::new(&space);
    let read = |p: &str| -> Result<LieElement, Error> {
        TermFile::parse(&space, &read_text(p)?)?.to_lie(&lie)
    };
    let (x, y) = (read(&a.x)?, read(&a.y)?);
    let b = match a.view {
        View::Gc | View::OspSemidirect => lie.bracket(&x, &y),
        View::Ge3 => {
            if !is_at_least_trivalent(&x) || !is_at_least_trivalent(&y) {
                return Err(Error::Membership(
                    "an input has a vertex of valence below 3".into(),
                ));
            }
            gcx::gc_lie::project_at_least_trivalent(&lie.bracket(&x, &y))
        }
        _ => {
            return Err(Error::Parse(
                "bracket works in the gc, osp-semidirect and ge3 views".into(),
            ))
        }
    };
    Ok(emit(&space, TermFile::from_lie(&b), &a.out))
}

fn z0(a: &Z0Args) -> Result<Outcome, Error> {
    let space = load_space(&a.space)?;
    let lie = GraphLie::new(&space);
    let mut z = lie.z0();
    if let Some(n) = a.truncation {
        z = z.truncate(n);
    }
    let mut file = TermFile::from_lie(&z);
    file.truncation = a.truncation;
    Ok(emit(&space, file, &a.out))
}

/// Bundled examples: a file name and the command line that produces it.
pub const GOLDEN: &[(&str, &str)] = &[
    ("validate_t2.txt", "space validate t2.space"),
    ("z0_s2.terms", "z0 --space s2.space"),
    ("z0_s3.terms", "z0 --space s3.space"),
    ("z0_s4.terms", "z0 --space s4.space"),
    ("z0_t2.terms", "z0 --space t2.space --truncation 12"),
    (
        "basis_s3.txt",
        "basis --space s3.space --degree -3..0 --weight-max 8 --out OUT",
    ),
    (
        "dmatrix_s3.txt",
        "dmatrix --space s3.space --degree -4..-3 --weight-max 5 --out OUT",
    ),
    (
        "verify_d2_s3.txt",
        "verify-d2 --space s3.space --degree -2..2 --weight-max 11",
    ),
    (
        "cohomology_s3_gc.txt",
        "cohomology --space s3.space --view gc --degree -3..3 --weight-max 16",
    ),
    (
        "cohomology_t2_fgc.txt",
        "cohomology --space t2.space --connected --degree -2..2 --weight-max 7",
    ),
    (
        "bracket_t2.terms",
        "bracket --space t2.space --x GOLDEN/vertex_a.terms --y GOLDEN/vertex_b.terms",
    ),
    (
        "mc_check_t2.txt",
        "mc-check --space t2.space --element GOLDEN/z0_t2.terms",
    ),
    (
        "mc_check_s2.txt",
        "mc-check --space s2.space --element GOLDEN/z0_s2.terms --truncation 12",
    ),
];

/// Inputs read by the golden commands.
pub const GOLDEN_INPUTS: &[(&str, &str)] = &[
    ("vertex_a.terms", "coeff=1/1 d=2 n=1 edges=[] dec=[(1,a)]\n"),
    ("vertex_b.terms", "coeff=1/1 d=2 n=1 edges=[] dec=[(1,b)]\n"),
];

/// Runs a command line given as one string; `GOLDEN` and `OUT` are
/// replaced by the given directories.
pub fn run_line(line: &str, golden_dir: &Path, out_dir: &Path) -> Result<Outcome, Error> {
    let mut argv = vec!["gcx".to_string()];
    for tok in line.split_whitespace() {
        let tok = tok
            .replace("GOLDEN", &golden_dir.to_string_lossy())
            .replace("OUT", &out_dir.to_string_lossy());
        argv.push(tok);
    }
    let cli = Cli::try_parse_from(&argv).map_err(|e| Error::Parse(e.to_string()))?;
    run(&cli.command)
}

/// The text recorded for a command: its stdout, exit code, and each file
/// it wrote (paths relative to the output directory).
pub fn transcript(outcome: &Result<Outcome, Error>, out_dir: &Path) -> String {
    match outcome {
        Err(e) => format!("exit {}\nerror: {e}\n", exit_code(e)),
        Ok(o) => {
            let mut s = format!("exit {}\n{}", o.code, o.stdout);
            for (path, text) in &o.files {
                let rel = path.strip_prefix(out_dir).unwrap_or(path);
                writeln!(s, "--- {}", rel.display()).unwrap();
                s.push_str(text);
            }
            s
        }
    }
}

fn golden(a: &GoldenArgs) -> Result<Outcome, Error> {
    let scratch = std::env::temp_dir().join(format!("gcx-golden-{}", std::process::id()));
    let mut out = Outcome::default();
    if a.regen_golden {
        for (name, text) in GOLDEN_INPUTS {
            out.files.push((a.dir.join(name), text.to_string()));
        }
        Outcome {
            files: out.files.clone(),
            ..Default::default()
        }
        .write_files()?;
    }
    for (name, line) in GOLDEN {
        let result = run_line(line, &a.dir, &scratch);
        let text = transcript(&result, &scratch);
        let path = a.dir.join(name);
        if a.regen_golden {
            // Later golden commands may read earlier outputs.
            std::fs::write(
                &path,
                if name.ends_with(".terms") {
                    payload(&result)
                } else {
                    text.clone()
                },
            )?;
            writeln!(out.stdout, "wrote {name}").unwrap();
        } else {
            let expected = std::fs::read_to_string(&path)?;
            let actual = if name.ends_with(".terms") {
                payload(&result)
            } else {
                text
            };
            if expected == actual {
                writeln!(out.stdout, "ok {name}").unwrap();
            } else {
                writeln!(out.stdout, "MISMATCH {name}").unwrap();
                out.code = EXIT_VIOLATION;
            }
        }
    }
    out.files.clear();
    Ok(out)
}

/// The term file a command printed, for golden files that are inputs too.
fn payload(result: &Result<Outcome, Error>) -> String {
    match result {
        Ok(o) => o.stdout.clone(),
        Err(e) => format!("error: {e}\n"),
    }
}
