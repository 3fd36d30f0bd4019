//! Browser bindings: z₀, the Maurer-Cartan check, and window cohomology
//! for the bundled spaces. Every export returns plain text.

use wasm_bindgen::prelude::*;

use gcx::exact_linalg::cohomology_dim;
use gcx::gc_lie::GraphLie;
use gcx::pairing_space::{builtin, PairingSpace};
use gcx::term_file::TermFile;
use gcx::twisted_complex::{FullGraphComplex, Window};
use gcx::Error;

/// Windows larger than this are refused so the page stays responsive.
const MAX_BASIS: usize = 5_000;

fn space(name: &str) -> Result<PairingSpace, String> {
    builtin::get(name).ok_or_else(|| format!("unknown space `{name}`"))
}

fn text(e: Error) -> String {
    e.to_string()
}

/// Names of the bundled spaces.
#[wasm_bindgen]
pub fn spaces() -> Vec<String> {
    builtin::ALL.iter().map(|(n, _)| n.to_string()).collect()
}

/// z₀ of a bundled space as a term file.
pub fn z0_text(name: &str) -> Result<String, String> {
    let p = space(name)?;
    let lie = GraphLie::new(&p);
    Ok(TermFile::from_lie(&lie.z0()).render(&p))
}

/// `dz + ½[z,z]` modulo weight above `truncation`, or "MC to order N".
pub fn mc_check_text(name: &str, element: &str, truncation: u32) -> Result<String, String> {
    let p = space(name)?;
    let lie = GraphLie::new(&p);
    let z = TermFile::parse(&p, element)
        .and_then(|f| f.to_lie(&lie))
        .map_err(text)?;
    let r = lie.mc_residual(&z, truncation as u64).map_err(text)?;
    if r.is_zero() {
        return Ok(format!("MC to order {truncation}"));
    }
    Ok(format!("residual:\n{}", TermFile::from_lie(&r).render(&p)))
}

/// Cohomology dimensions of the connected complex per degree, one
/// `degree dim` line each.
pub fn cohomology_text(name: &str, lo: i32, hi: i32, weight_max: u32) -> Result<String, String> {
    let p = space(name)?;
    let cx = FullGraphComplex::new(&p);
    let window = Window {
        weight_max: weight_max as u64,
        connected: true,
        cap: Some(MAX_BASIS),
        ..Default::default()
    };
    let mut out = String::from("degree dim\n");
    for k in lo as i64..=hi as i64 {
        let (d_in, _, _) = cx.differential_matrix(&window, k - 1).map_err(text)?;
        let (d_out, _, _) = cx.differential_matrix(&window, k).map_err(text)?;
        let h = cohomology_dim(&d_in, &d_out).map_err(text)?;
        out.push_str(&format!("{k} {h}\n"));
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn z0(name: &str) -> Result<String, JsError> {
    z0_text(name).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn mc_check(name: &str, element: &str, truncation: u32) -> Result<String, JsError> {
    mc_check_text(name, element, truncation).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cohomology(name: &str, lo: i32, hi: i32, weight_max: u32) -> Result<String, JsError> {
    cohomology_text(name, lo, hi, weight_max).map_err(|e| JsError::new(&e))
}
