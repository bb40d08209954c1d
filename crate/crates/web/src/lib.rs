//! Browser bindings: three operations returning JSON documents for the demo page.
//!
//! Each exported function has a plain Rust counterpart (`*_json`) so it can be
//! tested natively.

use serde_json::json;
use wasm_bindgen::prelude::*;

use nonlocal_trefftz::bvp1d::{solve_bvp_1d, ApplyConvIn, ConvVariant};
use nonlocal_trefftz::presets;
use nonlocal_trefftz::trefftz::{
    build_trefftz_bulk, build_trefftz_interface_2d, evaluate_trefftz, FieldKind, TrefftzOptions, TrefftzSet,
};
use nonlocal_trefftz::{ConvConfig, Point};

const MAX_CELLS: usize = 1280;
const MAX_GRID: usize = 81;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Two-point problem profile: `{x, u, e, d, local_region}` at cell midpoints.
pub fn bvp_profile_json(variant: &str, apply_conv_in: &str, eps_nl: f64, n_cells: usize) -> Result<String, String> {
    let variant = match variant {
        "whole_domain" => ConvVariant::WholeDomain,
        "nonlocal_only" => ConvVariant::NonlocalOnly,
        other => return Err(format!("unknown variant {other:?}")),
    };
    let apply = match apply_conv_in {
        "everywhere" => ApplyConvIn::Everywhere,
        "nonlocal_region_only" => ApplyConvIn::NonlocalRegionOnly,
        other => return Err(format!("unknown apply_conv_in {other:?}")),
    };
    if n_cells > MAX_CELLS {
        return Err(format!("n_cells limited to {MAX_CELLS} in the browser"));
    }
    let mut cfg = presets::bvp(variant, apply).with_cells(n_cells);
    cfg.eps_nl = eps_nl;
    let s = solve_bvp_1d(&cfg).map_err(err)?;
    let u: Vec<f64> = s.midpoints.iter().map(|&x| s.u_at(x)).collect();
    Ok(json!({
        "x": s.midpoints,
        "u": u,
        "e": s.e,
        "d": s.d,
        "local_region": [s.local_region.0, s.local_region.1],
    })
    .to_string())
}

fn one_d_set(eps_nl: f64, n_max: usize, m: usize) -> Result<TrefftzSet, String> {
    let b = presets::trefftz_1d().map_err(err)?;
    let cfg = ConvConfig { eps_nl, ..b.cfg };
    cfg.validate().map_err(err)?;
    build_trefftz_bulk(&cfg, n_max, b.x0, m, b.trefftz_domain, &TrefftzOptions::default()).map_err(err)
}

/// Fields of one 1D pseudoharmonic function on `[0, 2]`: `{n_funcs, x, u, E, D, divD}`.
pub fn trefftz1d_fields_json(eps_nl: f64, n_max: usize, m: usize, which: usize) -> Result<String, String> {
    if n_max > 8 {
        return Err("n_max limited to 8".into());
    }
    let ts = one_d_set(eps_nl, n_max, m)?;
    let xs = linspace(0.0, 2.0, 161);
    let pts: Vec<Point> = xs.iter().map(|&x| [x, 0.0]).collect();
    let field = |k: FieldKind| -> Result<Vec<f64>, String> {
        Ok(evaluate_trefftz(&ts, which, k, &pts).map_err(err)?.into_iter().map(|v| v[0]).collect())
    };
    Ok(json!({
        "n_funcs": ts.n_funcs(),
        "x": xs,
        "u": field(FieldKind::U)?,
        "E": field(FieldKind::E)?,
        "D": field(FieldKind::D)?,
        "divD": field(FieldKind::DivD)?,
        "x0": ts.x0[0],
        "trefftz_domain": [ts.trefftz_domain.lo[0], ts.trefftz_domain.hi[0]],
    })
    .to_string())
}

/// One field of a 2D function on a `grid × grid` lattice over `[-h, h]²`:
/// `{n_funcs, xs, ys, values}` with `values[j][i]` at `(xs[i], ys[j])`.
pub fn field_grid_2d_json(kind: &str, which: usize, field: &str, grid: usize) -> Result<String, String> {
    if !(2..=MAX_GRID).contains(&grid) {
        return Err(format!("grid must be in 2..={MAX_GRID}"));
    }
    let opts = TrefftzOptions::default();
    let (ts, half) = match kind {
        "bulk" => {
            let b = presets::trefftz_2d().map_err(err)?;
            (
                build_trefftz_bulk(&b.cfg, b.n_max, b.x0, b.m, b.trefftz_domain, &opts).map_err(err)?,
                1.0,
            )
        }
        "interface" => {
            let p = presets::interface_2d().map_err(err)?;
            (
                build_trefftz_interface_2d(&p.cfg_nl, p.eps_local, p.n_max, p.m, p.p_max, p.x0, p.trefftz_domain, &opts)
                    .map_err(err)?,
                0.5,
            )
        }
        other => return Err(format!("unknown kind {other:?}")),
    };
    let (fk, comp) = match field {
        "u" => (FieldKind::U, 0),
        "Dx" => (FieldKind::D, 0),
        "Dy" => (FieldKind::D, 1),
        "divD" => (FieldKind::DivD, 0),
        other => return Err(format!("unknown field {other:?}")),
    };
    let xs = linspace(-half, half, grid);
    let ys = xs.clone();
    let pts: Vec<Point> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| [x, y])).collect();
    let vals = evaluate_trefftz(&ts, which, fk, &pts).map_err(err)?;
    let values: Vec<Vec<f64>> = vals.chunks(grid).map(|row| row.iter().map(|v| v[comp]).collect()).collect();
    Ok(json!({ "n_funcs": ts.n_funcs(), "xs": xs, "ys": ys, "values": values }).to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bvp_profile(variant: &str, apply_conv_in: &str, eps_nl: f64, n_cells: usize) -> Result<String, JsValue> {
    js(bvp_profile_json(variant, apply_conv_in, eps_nl, n_cells))
}

#[wasm_bindgen]
pub fn trefftz1d_fields(eps_nl: f64, n_max: usize, m: usize, which: usize) -> Result<String, JsValue> {
    js(trefftz1d_fields_json(eps_nl, n_max, m, which))
}

#[wasm_bindgen]
pub fn field_grid_2d(kind: &str, which: usize, field: &str, grid: usize) -> Result<String, JsValue> {
    js(field_grid_2d_json(kind, which, field, grid))
}
