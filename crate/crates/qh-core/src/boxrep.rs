//! Representations of a directed box: objects are modules over the
//! underlying algebra, morphisms carry extra components along the dashed
//! generators, and everything is driven by induction on the valuation
//! nu(a) = t(a) - s(a).

use crate::boxify::BoxData;
use crate::error::{QhError, Result};
use crate::linalg::{kernel_basis, rref, solve, Mat};
use crate::modules::Representation;
use crate::rng::Rng;
use crate::scalar::Scalar;
use std::sync::Arc;

/// Morphism of box representations: one matrix per vertex (the grouplike
/// components) and one per dashed generator.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxMorphism {
    pub vertex: Vec<Mat>,
    pub dashed: Vec<Mat>,
}

fn act_basis(x: &Representation, p: usize) -> Mat {
    let b = &x.alg.basis[p];
    x.act_path(&b.arrows, b.src)
}

impl BoxMorphism {
    pub fn identity(bx: &BoxData, x: &Representation) -> BoxMorphism {
        BoxMorphism {
            vertex: x.dims.iter().map(|&d| Mat::identity(d, bx.field)).collect(),
            dashed: bx
                .dashed
                .iter()
                .map(|d| Mat::zero(x.dims[d.tgt], x.dims[d.src], bx.field))
                .collect(),
        }
    }

    pub fn zero(bx: &BoxData, x: &Representation, y: &Representation) -> BoxMorphism {
        BoxMorphism {
            vertex: (0..x.dims.len())
                .map(|v| Mat::zero(y.dims[v], x.dims[v], bx.field))
                .collect(),
            dashed: bx
                .dashed
                .iter()
                .map(|d| Mat::zero(y.dims[d.tgt], x.dims[d.src], bx.field))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vertex.iter().all(|m| m.is_zero()) && self.dashed.iter().all(|m| m.is_zero())
    }

    pub fn scale(&self, c: &Scalar) -> BoxMorphism {
        BoxMorphism {
            vertex: self.vertex.iter().map(|m| m.scale(c)).collect(),
            dashed: self.dashed.iter().map(|m| m.scale(c)).collect(),
        }
    }

    pub fn add(&self, other: &BoxMorphism) -> BoxMorphism {
        BoxMorphism {
            vertex: self
                .vertex
                .iter()
                .zip(&other.vertex)
                .map(|(a, b)| a + b)
                .collect(),
            dashed: self
                .dashed
                .iter()
                .zip(&other.dashed)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

/// Phi_f on one differential term q·phi·p between given representations.
fn phi_term(
    f: &BoxMorphism,
    x: &Representation,
    y: &Representation,
    q: usize,
    dash: usize,
    p: usize,
) -> Mat {
    let yq = act_basis(y, q);
    let xp = act_basis(x, p);
    &(&yq * &f.dashed[dash]) * &xp
}

/// The morphism constraint for one arrow: f_t X(b) - Y(b) f_s + Phi_f(∂b).
pub fn constraint_residual(
    bx: &BoxData,
    f: &BoxMorphism,
    x: &Representation,
    y: &Representation,
    arrow: usize,
) -> Mat {
    let arr = &bx.algebra.quiver.arrows[arrow];
    let mut m = &(&f.vertex[arr.tgt] * &x.action[arrow]) - &(&y.action[arrow] * &f.vertex[arr.src]);
    for (c, q, dash, p) in &bx.partial_solid[arrow] {
        m = &m + &phi_term(f, x, y, *q, *dash, *p).scale(c);
    }
    m
}

pub fn is_box_morphism(
    bx: &BoxData,
    f: &BoxMorphism,
    x: &Representation,
    y: &Representation,
) -> bool {
    (0..bx.algebra.quiver.arrows.len())
        .all(|a| constraint_residual(bx, f, x, y, a).is_zero())
}

/// Coordinate layout of a morphism space: unknowns are (f_i by vertex, then
/// f_phi by generator), row-major; the basis is in rref-complement form, so
/// coordinates of any solution are its values at the free columns.
#[derive(Clone, Debug)]
pub struct HomLayout {
    pub offsets: Vec<usize>,
    pub dash_offsets: Vec<usize>,
    pub free: Vec<usize>,
}

impl HomLayout {
    pub fn flatten(&self, f: &BoxMorphism) -> Vec<Scalar> {
        let mut out = Vec::new();
        for m in &f.vertex {
            out.extend(m.flatten());
        }
        for m in &f.dashed {
            out.extend(m.flatten());
        }
        out
    }

    pub fn coords(&self, f: &BoxMorphism) -> Vec<Scalar> {
        let flat = self.flatten(f);
        self.free.iter().map(|&c| flat[c].clone()).collect()
    }
}

/// Basis of Hom(X, Y) with its coordinate layout.
pub fn morphism_space_with_layout(
    bx: &BoxData,
    x: &Representation,
    y: &Representation,
) -> (Vec<BoxMorphism>, HomLayout) {
    let field = bx.field;
    let nv = bx.n_vertices();
    let mut offsets = vec![0usize];
    for v in 0..nv {
        offsets.push(offsets[v] + y.dims[v] * x.dims[v]);
    }
    let mut dash_offsets = vec![offsets[nv]];
    for (k, d) in bx.dashed.iter().enumerate() {
        dash_offsets.push(dash_offsets[k] + y.dims[d.tgt] * x.dims[d.src]);
    }
    let total = *dash_offsets.last().unwrap();

    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for (ai, arr) in bx.algebra.quiver.arrows.iter().enumerate() {
        let (s, t) = (arr.src, arr.tgt);
        for r in 0..y.dims[t] {
            for c in 0..x.dims[s] {
                let mut row = vec![field.zero(); total];
                for k in 0..x.dims[t] {
                    let idx = offsets[t] + r * x.dims[t] + k;
                    row[idx] = &row[idx] + x.action[ai].at(k, c);
                }
                for k in 0..y.dims[s] {
                    let idx = offsets[s] + k * x.dims[s] + c;
                    row[idx] = &row[idx] - y.action[ai].at(r, k);
                }
                for (co, q, dash, p) in &bx.partial_solid[ai] {
                    let yq = act_basis(y, *q);
                    let xp = act_basis(x, *p);
                    let d = &bx.dashed[*dash];
                    for k in 0..y.dims[d.tgt] {
                        if yq.at(r, k).is_zero() {
                            continue;
                        }
                        for l in 0..x.dims[d.src] {
                            if xp.at(l, c).is_zero() {
                                continue;
                            }
                            let idx = dash_offsets[*dash] + k * x.dims[d.src] + l;
                            row[idx] = &row[idx] + &(&(co * yq.at(r, k)) * xp.at(l, c));
                        }
                    }
                }
                if row.iter().any(|z| !z.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }
    let m = if rows.is_empty() {
        Mat::zero(0, total, field)
    } else {
        Mat::from_rows(rows, total, field)
    };
    let r = crate::linalg::rref(&m);
    let free: Vec<usize> = (0..total).filter(|c| !r.pivots.contains(c)).collect();
    let basis = kernel_basis(&m)
        .into_iter()
        .map(|sol| BoxMorphism {
            vertex: (0..nv)
                .map(|v| {
                    Mat::from_fn(y.dims[v], x.dims[v], field, |r, c| {
                        sol[offsets[v] + r * x.dims[v] + c].clone()
                    })
                })
                .collect(),
            dashed: bx
                .dashed
                .iter()
                .enumerate()
                .map(|(k, d)| {
                    Mat::from_fn(y.dims[d.tgt], x.dims[d.src], field, |r, c| {
                        sol[dash_offsets[k] + r * x.dims[d.src] + c].clone()
                    })
                })
                .collect(),
        })
        .collect();
    (basis, HomLayout { offsets, dash_offsets, free })
}

pub fn morphism_space(
    bx: &BoxData,
    x: &Representation,
    y: &Representation,
) -> Vec<BoxMorphism> {
    morphism_space_with_layout(bx, x, y).0
}

/// Composition f after g, with the Sweedler correction from the dashed
/// differentials: (fg)_phi = f_t g_phi + f_phi g_s + sum b3 f_phi2 b2 g_phi1 b1.
pub fn compose(
    bx: &BoxData,
    f: &BoxMorphism,
    g: &BoxMorphism,
    x: &Representation,
    y: &Representation,
    z: &Representation,
) -> BoxMorphism {
    let nv = bx.n_vertices();
    let vertex: Vec<Mat> = (0..nv).map(|v| &f.vertex[v] * &g.vertex[v]).collect();
    let mut dashed = Vec::new();
    for (k, d) in bx.dashed.iter().enumerate() {
        let mut m = &(&f.vertex[d.tgt] * &g.dashed[k]) + &(&f.dashed[k] * &g.vertex[d.src]);
        for (c, b3, phi2, b2, phi1, b1) in &bx.partial_dashed[k] {
            let zb3 = act_basis(z, *b3);
            let yb2 = act_basis(y, *b2);
            let xb1 = act_basis(x, *b1);
            let term = &(&(&(&zb3 * &f.dashed[*phi2]) * &yb2) * &g.dashed[*phi1]) * &xb1;
            m = &m + &term.scale(c);
        }
        dashed.push(m);
    }
    BoxMorphism { vertex, dashed }
}

/// Arrows sorted by increasing valuation, ties by declaration order.
fn arrows_by_valuation(bx: &BoxData) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..bx.algebra.quiver.arrows.len()).collect();
    idx.sort_by_key(|&a| {
        let arr = &bx.algebra.quiver.arrows[a];
        (arr.tgt as i64 - arr.src as i64, a as i64)
    });
    idx
}

fn dashed_by_valuation(bx: &BoxData) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..bx.dashed.len()).collect();
    idx.sort_by_key(|&k| {
        let d = &bx.dashed[k];
        (d.tgt as i64 - d.src as i64, k as i64)
    });
    idx
}

pub fn is_isomorphism(f: &BoxMorphism) -> bool {
    f.vertex.iter().all(|m| m.inverse().is_some())
}

/// Explicit inverse of an isomorphism, built by induction on the valuation,
/// then verified on both sides.
pub fn inverse(
    bx: &BoxData,
    f: &BoxMorphism,
    x: &Representation,
    y: &Representation,
) -> Result<BoxMorphism> {
    let inv_vertex: Vec<Mat> = f
        .vertex
        .iter()
        .map(|m| m.inverse().ok_or_else(|| QhError::Verification("not an isomorphism".into())))
        .collect::<Result<_>>()?;
    let mut g = BoxMorphism {
        vertex: inv_vertex,
        dashed: bx
            .dashed
            .iter()
            .map(|d| Mat::zero(x.dims[d.tgt], y.dims[d.src], bx.field))
            .collect(),
    };
    // solve (f g)_phi = 0 in increasing valuation
    for k in dashed_by_valuation(bx) {
        let d = &bx.dashed[k];
        // f_t g_phi + f_phi g_s + sum c * Y(b3) f_phi2 X(b2) g_phi1 Y(b1) = 0
        let mut rest = &f.dashed[k] * &g.vertex[d.src];
        for (c, b3, phi2, b2, phi1, b1) in &bx.partial_dashed[k] {
            let term = &(&(&(&act_basis(y, *b3) * &f.dashed[*phi2]) * &act_basis(x, *b2))
                * &g.dashed[*phi1])
                * &act_basis(y, *b1);
            rest = &rest + &term.scale(c);
        }
        let ft_inv = f.vertex[d.tgt].inverse().unwrap();
        g.dashed[k] = (&ft_inv * &rest).scale(&-&bx.field.one());
    }
    let fg = compose(bx, f, &g, y, x, y);
    let gf = compose(bx, &g, f, x, y, x);
    let idy = BoxMorphism::identity(bx, y);
    let idx = BoxMorphism::identity(bx, x);
    if fg != idy || gf != idx {
        return Err(QhError::Internal("inverse construction failed".into()));
    }
    Ok(g)
}

/// Unique representation on prescribed spaces receiving a morphism from X
/// with the given invertible vertex components and dashed components:
/// Y(a) := (f_t X(a) + Phi_f(∂a)) f_s^{-1} by induction on the valuation.
pub fn transport(
    bx: &BoxData,
    x: &Representation,
    f_vertex: Vec<Mat>,
    f_dashed: Vec<Mat>,
) -> Result<(Representation, BoxMorphism)> {
    let alg = &bx.algebra;
    let field = bx.field;
    let _nv = bx.n_vertices();
    let dims: Vec<usize> = f_vertex.iter().map(|m| m.rows).collect();
    for (v, m) in f_vertex.iter().enumerate() {
        if m.cols != x.dims[v] || m.inverse().is_none() {
            return Err(QhError::Verification(format!(
                "transport needs invertible vertex components (vertex {v})"
            )));
        }
    }
    let f = BoxMorphism { vertex: f_vertex, dashed: f_dashed };
    let mut action: Vec<Option<Mat>> = vec![None; alg.quiver.arrows.len()];
    let mut y = Representation {
        alg: Arc::clone(alg),
        dims: dims.clone(),
        action: alg
            .quiver
            .arrows
            .iter()
            .map(|a| Mat::zero(dims[a.tgt], dims[a.src], field))
            .collect(),
    };
    for a in arrows_by_valuation(bx) {
        let arr = &alg.quiver.arrows[a];
        // Phi_f(∂a) uses Y on paths of strictly smaller valuation
        let mut phi = Mat::zero(dims[arr.tgt], x.dims[arr.src], field);
        for (c, q, dash, p) in &bx.partial_solid[a] {
            let yq = act_basis(&y, *q);
            let xp = act_basis(x, *p);
            phi = &phi + &(&(&yq * &f.dashed[*dash]) * &xp).scale(c);
        }
        let fs_inv = f.vertex[arr.src].inverse().unwrap();
        let m = &(&(&f.vertex[arr.tgt] * &x.action[a]) + &phi) * &fs_inv;
        y.action[a] = m.clone();
        action[a] = Some(m);
    }
    if !y.satisfies_relations() {
        return Err(QhError::Internal("transported representation violates relations".into()));
    }
    if !is_box_morphism(bx, &f, x, &y) {
        return Err(QhError::Internal("transport did not produce a morphism".into()));
    }
    Ok((y, f))
}

/// Dual form: target X, prescribed g_i: Y_i -> X(i) invertible and g_phi;
/// builds Y with a morphism g: Y -> X.
pub fn transport_into(
    bx: &BoxData,
    x: &Representation,
    g_vertex: Vec<Mat>,
    g_dashed: Vec<Mat>,
) -> Result<(Representation, BoxMorphism)> {
    let alg = &bx.algebra;
    let field = bx.field;
    let dims: Vec<usize> = g_vertex.iter().map(|m| m.cols).collect();
    let g = BoxMorphism { vertex: g_vertex, dashed: g_dashed };
    let mut y = Representation {
        alg: Arc::clone(alg),
        dims: dims.clone(),
        action: alg
            .quiver
            .arrows
            .iter()
            .map(|a| Mat::zero(dims[a.tgt], dims[a.src], field))
            .collect(),
    };
    for a in arrows_by_valuation(bx) {
        let arr = &alg.quiver.arrows[a];
        let mut phi = Mat::zero(x.dims[arr.tgt], dims[arr.src], field);
        for (c, q, dash, p) in &bx.partial_solid[a] {
            let xq = act_basis(x, *q);
            let yp = act_basis(&y, *p);
            phi = &phi + &(&(&xq * &g.dashed[*dash]) * &yp).scale(c);
        }
        let gt_inv = g.vertex[arr.tgt]
            .inverse()
            .ok_or_else(|| QhError::Verification("transport_into needs invertible components".into()))?;
        // g_t Y(a) - X(a) g_s + Phi_g(∂a) = 0
        let m = &gt_inv * &(&(&x.action[a] * &g.vertex[arr.src]) - &phi);
        y.action[a] = m;
    }
    if !y.satisfies_relations() {
        return Err(QhError::Internal("transport_into violates relations".into()));
    }
    if !is_box_morphism(bx, &g, &y, x) {
        return Err(QhError::Internal("transport_into did not produce a morphism".into()));
    }
    Ok((y, g))
}

/// rref-canonical right inverse of a surjective matrix.
pub fn right_inverse(m: &Mat) -> Option<Mat> {
    let field = m.field;
    let mut cols = Vec::new();
    for r in 0..m.rows {
        let mut e = vec![field.zero(); m.rows];
        e[r] = field.one();
        cols.push(solve(m, &e)?);
    }
    Some(Mat::from_fn(m.cols, m.rows, field, |i, j| cols[j][i].clone()))
}

/// Left inverse of an injective matrix.
pub fn left_inverse(m: &Mat) -> Option<Mat> {
    right_inverse(&m.transpose()).map(|r| r.transpose())
}

/// Make a vertexwise-epi morphism induced: returns (Z, h: Z -> X iso-on-
/// vertices) with (f∘h) having zero dashed components.
pub fn make_induced_epi(
    bx: &BoxData,
    f: &BoxMorphism,
    x: &Representation,
    y: &Representation,
) -> Result<(Representation, BoxMorphism)> {
    let nv = bx.n_vertices();
    let mut cur_x = x.clone();
    let mut h_total: Option<(Representation, BoxMorphism)> = None;
    let mut cur_f = f.clone();
    for _round in 0..=nv {
        if cur_f.dashed.iter().all(|m| m.is_zero()) {
            break;
        }
        let f_right: Vec<Mat> = cur_f
            .vertex
            .iter()
            .map(|m| right_inverse(m).ok_or_else(|| QhError::Verification("not an epimorphism".into())))
            .collect::<Result<_>>()?;
        let h_vertex: Vec<Mat> = cur_x
            .dims
            .iter()
            .map(|&d| Mat::identity(d, bx.field))
            .collect();
        let h_dashed: Vec<Mat> = bx
            .dashed
            .iter()
            .enumerate()
            .map(|(k, d)| (&f_right[d.tgt] * &cur_f.dashed[k]).scale(&-&bx.field.one()))
            .collect();
        let (z, h) = transport_into(bx, &cur_x, h_vertex, h_dashed)?;
        let fh = compose(bx, &cur_f, &h, &z, &cur_x, y);
        h_total = Some(match h_total {
            None => (z.clone(), h.clone()),
            Some((_, prev)) => {
                let comp = compose(bx, &prev, &h, &z, &cur_x, x);
                (z.clone(), comp)
            }
        });
        cur_x = z;
        cur_f = fh;
    }
    if !cur_f.dashed.iter().all(|m| m.is_zero()) {
        return Err(QhError::Internal("make_induced_epi did not terminate".into()));
    }
    match h_total {
        Some((z, h)) => Ok((z, h)),
        None => Ok((x.clone(), BoxMorphism::identity(bx, x))),
    }
}

/// Make a vertexwise-mono morphism induced: returns (Z, h: Y -> Z) with
/// (h∘f) having zero dashed components.
pub fn make_induced_mono(
    bx: &BoxData,
    f: &BoxMorphism,
    x: &Representation,
    y: &Representation,
) -> Result<(Representation, BoxMorphism)> {
    let nv = bx.n_vertices();
    let mut cur_y = y.clone();
    let mut h_total: Option<(Representation, BoxMorphism)> = None;
    let mut cur_f = f.clone();
    for _round in 0..=nv {
        if cur_f.dashed.iter().all(|m| m.is_zero()) {
            break;
        }
        let f_left: Vec<Mat> = cur_f
            .vertex
            .iter()
            .map(|m| left_inverse(m).ok_or_else(|| QhError::Verification("not a monomorphism".into())))
            .collect::<Result<_>>()?;
        let h_vertex: Vec<Mat> = cur_y
            .dims
            .iter()
            .map(|&d| Mat::identity(d, bx.field))
            .collect();
        let h_dashed: Vec<Mat> = bx
            .dashed
            .iter()
            .enumerate()
            .map(|(k, d)| (&cur_f.dashed[k] * &f_left[d.src]).scale(&-&bx.field.one()))
            .collect();
        let (z, h) = transport(bx, &cur_y, h_vertex, h_dashed)?;
        let hf = compose(bx, &h, &cur_f, x, &cur_y, &z);
        h_total = Some(match h_total {
            None => (z.clone(), h.clone()),
            Some((_, prev)) => {
                let comp = compose(bx, &h, &prev, y, &cur_y, &z);
                (z.clone(), comp)
            }
        });
        cur_y = z;
        cur_f = hf;
    }
    if !cur_f.dashed.iter().all(|m| m.is_zero()) {
        return Err(QhError::Internal("make_induced_mono did not terminate".into()));
    }
    match h_total {
        Some((z, h)) => Ok((z, h)),
        None => Ok((y.clone(), BoxMorphism::identity(bx, y))),
    }
}

/// Split an idempotent: conjugate to an induced idempotent by the valuation
/// induction, split in B-mod, transport back.
pub fn split_idempotent(
    bx: &BoxData,
    x: &Representation,
    e: &BoxMorphism,
) -> Result<(Representation, BoxMorphism, BoxMorphism)> {
    let field = bx.field;
    let nv = bx.n_vertices();
    let ee = compose(bx, e, e, x, x, x);
    if &ee != e {
        return Err(QhError::Verification("split_idempotent: input is not idempotent".into()));
    }
    // conjugate until all dashed components vanish
    let mut cur = e.clone();
    let mut h_acc: Option<BoxMorphism> = None; // h: X -> X with e = h e' h^{-1}
    for _round in 0..=nv {
        if cur.dashed.iter().all(|m| m.is_zero()) {
            break;
        }
        let h_vertex: Vec<Mat> = x.dims.iter().map(|&d| Mat::identity(d, field)).collect();
        let h_dashed: Vec<Mat> = bx
            .dashed
            .iter()
            .enumerate()
            .map(|(k, d)| {
                let two_e_minus_one = &cur.vertex[d.src].scale(&field.from_i64(2))
                    - &Mat::identity(x.dims[d.src], field);
                &cur.dashed[k] * &two_e_minus_one
            })
            .collect();
        let (z, h) = transport_into(bx, x, h_vertex, h_dashed)?;
        let hinv = inverse(bx, &h, &z, x)?;
        // e' = h^{-1} e h on Z (vertex spaces agree with X)
        let eh = compose(bx, &cur, &h, &z, x, x);
        let e2 = compose(bx, &hinv, &eh, &z, x, &z);
        cur = e2;
        h_acc = Some(match h_acc {
            None => h,
            Some(prev) => compose(bx, &prev, &h, &z, x, x),
        });
        let _ = &z;
    }
    if !cur.dashed.iter().all(|m| m.is_zero()) {
        return Err(QhError::Internal("idempotent conjugation did not terminate".into()));
    }
    // split the induced idempotent in B-mod: image spaces per vertex
    let mut incl_mats = Vec::new();
    let mut proj_mats = Vec::new();
    let mut dims = Vec::new();
    for v in 0..nv {
        let m = &cur.vertex[v];
        let rrows = rref(&m.transpose());
        let basis: Vec<Vec<Scalar>> = (0..rrows.rank)
            .map(|k| rrows.reduced.row(k).to_vec())
            .collect();
        let d = basis.len();
        dims.push(d);
        let incl = Mat::from_fn(x.dims[v], d, field, |r, c| basis[c][r].clone());
        // projection: rho = e restricted to its image; solve incl * p = e_v
        let mut pcols = Vec::new();
        for c in 0..x.dims[v] {
            let target = m.col(c);
            let p = solve(&incl, &target).expect("image basis spans e(X)");
            pcols.push(p);
        }
        let proj = Mat::from_fn(d, x.dims[v], field, |r, c| pcols[c][r].clone());
        incl_mats.push(incl);
        proj_mats.push(proj);
    }
    // Y inherits the action through the inclusion
    let mut y_action = Vec::new();
    for (a, arr) in bx.algebra.quiver.arrows.iter().enumerate() {
        let m = &(&proj_mats[arr.tgt] * &x.action[a]) * &incl_mats[arr.src];
        y_action.push(m);
    }
    let y = Representation { alg: Arc::clone(&bx.algebra), dims, action: y_action };
    if !y.satisfies_relations() {
        return Err(QhError::Internal("idempotent image violates relations".into()));
    }
    let iota_ind = BoxMorphism {
        vertex: incl_mats,
        dashed: bx
            .dashed
            .iter()
            .map(|d| Mat::zero(x.dims[d.tgt], y.dims[d.src], field))
            .collect(),
    };
    let pi_ind = BoxMorphism {
        vertex: proj_mats,
        dashed: bx
            .dashed
            .iter()
            .map(|d| Mat::zero(y.dims[d.tgt], x.dims[d.src], field))
            .collect(),
    };
    // undo the conjugation: e = h e' h^{-1} => iota = h iota', pi = pi' h^{-1}
    let (iota, pi) = match h_acc {
        None => (iota_ind, pi_ind),
        Some(h) => {
            let hinv = inverse(bx, &h, x, x)?;
            let iota = compose(bx, &h, &iota_ind, &y, x, x);
            let pi = compose(bx, &pi_ind, &hinv, x, x, &y);
            (iota, pi)
        }
    };
    let ip = compose(bx, &iota, &pi, x, &y, x);
    let pi2 = compose(bx, &pi, &iota, &y, x, &y);
    if &ip != e || pi2 != BoxMorphism::identity(bx, &y) {
        return Err(QhError::Internal("idempotent splitting identities fail".into()));
    }
    Ok((y, pi, iota))
}

/// gf = 0 and vertexwise short-exactness.
pub fn exact_pair_check(
    bx: &BoxData,
    f: &BoxMorphism,
    g: &BoxMorphism,
    x: &Representation,
    y: &Representation,
    z: &Representation,
) -> bool {
    let gf = compose(bx, g, f, x, y, z);
    if !gf.is_zero() {
        return false;
    }
    (0..bx.n_vertices()).all(|v| {
        let fi = &f.vertex[v];
        let gi = &g.vertex[v];
        fi.rank() == fi.cols && gi.rank() == gi.rows && fi.rank() + gi.rank() == y.dims[v]
    })
}

/// Normalize an exact pair to an equivalent induced one: returns
/// (Y', f', g') with all dashed components zero.
pub fn normalize_pair(
    bx: &BoxData,
    f: &BoxMorphism,
    g: &BoxMorphism,
    x: &Representation,
    y: &Representation,
    z: &Representation,
) -> Result<(Representation, BoxMorphism, BoxMorphism)> {
    if !exact_pair_check(bx, f, g, x, y, z) {
        return Err(QhError::Verification("normalize_pair: not an exact pair".into()));
    }
    // step 1: make f induced via a monomorphism normalization
    let (y1, h1) = make_induced_mono(bx, f, x, y)?;
    let f1 = compose(bx, &h1, f, x, y, &y1);
    let h1_inv = inverse(bx, &h1, y, &y1)?;
    let g1 = compose(bx, g, &h1_inv, &y1, y, z);
    // step 2: make g induced while keeping f induced
    let mut cur_y = y1;
    let mut cur_f = f1;
    let mut cur_g = g1;
    for _round in 0..=bx.n_vertices() {
        if cur_g.dashed.iter().all(|m| m.is_zero()) {
            break;
        }
        let g_right: Vec<Mat> = cur_g
            .vertex
            .iter()
            .map(|m| right_inverse(m).expect("deflation components are epis"))
            .collect();
        let h_vertex: Vec<Mat> = cur_y.dims.iter().map(|&d| Mat::identity(d, bx.field)).collect();
        let h_dashed: Vec<Mat> = bx
            .dashed
            .iter()
            .enumerate()
            .map(|(k, d)| &g_right[d.tgt] * &cur_g.dashed[k])
            .collect();
        let (y2, h) = transport(bx, &cur_y, h_vertex, h_dashed)?;
        let hinv = inverse(bx, &h, &cur_y, &y2)?;
        let f2 = compose(bx, &h, &cur_f, x, &cur_y, &y2);
        let g2 = compose(bx, &cur_g, &hinv, &y2, &cur_y, z);
        cur_y = y2;
        cur_f = f2;
        cur_g = g2;
    }
    if !cur_g.dashed.iter().all(|m| m.is_zero())
        || !cur_f.dashed.iter().all(|m| m.is_zero())
    {
        return Err(QhError::Internal("normalize_pair did not reach induced form".into()));
    }
    if !exact_pair_check(bx, &cur_f, &cur_g, x, &cur_y, z) {
        return Err(QhError::Internal("normalize_pair broke exactness".into()));
    }
    Ok((cur_y, cur_f, cur_g))
}

/// B as a representation of the box over itself: the vertex-v space has
/// basis the paths ending at v, arrows act by composition.
pub fn regular_rep(bx: &BoxData) -> Representation {
    let alg = &bx.algebra;
    let field = bx.field;
    let nv = bx.n_vertices();
    let vertex_basis: Vec<Vec<usize>> = (0..nv)
        .map(|v| (0..alg.dim()).filter(|&k| alg.basis[k].tgt == v).collect())
        .collect();
    let dims: Vec<usize> = vertex_basis.iter().map(|b| b.len()).collect();
    let mut action = Vec::new();
    for (ai, arr) in alg.quiver.arrows.iter().enumerate() {
        let mut m = Mat::zero(dims[arr.tgt], dims[arr.src], field);
        let a_idx = alg.basis_index(&[ai]).unwrap();
        for (col, &p) in vertex_basis[arr.src].iter().enumerate() {
            let prod = alg.mult_basis(a_idx, p);
            for (row, &q) in vertex_basis[arr.tgt].iter().enumerate() {
                m.set(row, col, prod[q].clone());
            }
        }
        action.push(m);
    }
    Representation { alg: Arc::clone(alg), dims, action }
}

/// Basis index layout of the regular representation, for mapping algebra
/// elements into it.
pub fn regular_basis(bx: &BoxData) -> Vec<Vec<usize>> {
    let alg = &bx.algebra;
    (0..bx.n_vertices())
        .map(|v| (0..alg.dim()).filter(|&k| alg.basis[k].tgt == v).collect())
        .collect()
}

/// A random module over B presented as the cokernel of a random map between
/// projective sums; always satisfies the relations.
pub fn random_module(bx: &BoxData, rng: &mut Rng, max_gens: usize) -> Representation {
    let alg = &bx.algebra;
    let nv = bx.n_vertices();
    let n_gens = 1 + rng.below(max_gens);
    let gens: Vec<usize> = (0..n_gens).map(|_| rng.below(nv)).collect();
    let n_rel = rng.below(max_gens + 1);
    let rel_srcs: Vec<usize> = (0..n_rel).map(|_| rng.below(nv)).collect();
    let sum = crate::homotopy::proj_sum(alg, gens.clone());
    if n_rel == 0 {
        return sum.rep;
    }
    // random morphism ⊕P(rel) -> ⊕P(gens): entries are random elements of
    // e_{rel} A e_{gen}
    let mut spans: Vec<Vec<Vec<Scalar>>> = vec![Vec::new(); nv];
    for &r in &rel_srcs {
        // image of the generator of P(r): a random element of the sum at
        // vertex r that lies in the radical (to keep the cover minimal-ish)
        let dim_r = sum.rep.dims[r];
        if dim_r == 0 {
            continue;
        }
        let mut v = vec![alg.field.zero(); dim_r];
        let mut any = false;
        for (s, _) in gens.iter().enumerate() {
            for (ci, &p) in sum.paths[r][s].iter().enumerate() {
                if alg.basis[p].is_trivial() {
                    continue;
                }
                let c = rng.small_int(1);
                if c != 0 {
                    v[sum.offsets[r][s] + ci] = alg.field.from_i64(c);
                    any = true;
                }
            }
        }
        if any {
            // close to a submodule: the generated submodule of the image
            spans[r].push(v);
        }
    }
    let sub = crate::modules::sub_module(&sum.rep, spans);
    let (q, _) = crate::modules::quotient_rep(&sum.rep, &sub);
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boxify::{box_from_spec, BoxData};
    use crate::dsl::{parse_algebra, parse_box};
    use crate::fixtures;
    use crate::modules::simple;
    use crate::scalar::FieldCfg;

    fn a1_box() -> BoxData {
        let src = parse_algebra(fixtures::A1).unwrap();
        let alg = Arc::new(
            crate::presentation::build_path_algebra(
                FieldCfg::Q,
                src.quiver.clone(),
                src.relations,
                None,
            )
            .unwrap(),
        );
        let res: Vec<_> = (0..2)
            .map(|i| {
                let d = crate::modules::standard_module(&alg, i);
                crate::homotopy::minimal_resolution(&alg, &d, 4).unwrap()
            })
            .collect();
        let complex = crate::homotopy::build_hom_complex(&alg, res);
        let ext = crate::homotopy::ext_spaces(&complex);
        let contraction = crate::homotopy::make_contraction(&complex, &ext).unwrap();
        let ainf = crate::ainfinity::transfer(&complex, &ext, &contraction).unwrap();
        let dq = crate::boxify::dualize(&ainf).unwrap();
        crate::boxify::extract_box(&dq, "a1", src.quiver.vertices).unwrap()
    }

    fn a2_box() -> BoxData {
        box_from_spec(&parse_box(fixtures::A2).unwrap(), FieldCfg::Q).unwrap()
    }

    #[test]
    fn a1_endomorphisms_of_regular_rep() {
        let bx = a1_box();
        let b = regular_rep(&bx);
        assert_eq!(b.dims, vec![1, 2]);
        let homs = morphism_space(&bx, &b, &b);
        assert_eq!(homs.len(), 5);
        for f in &homs {
            assert!(is_box_morphism(&bx, f, &b, &b));
        }
    }

    #[test]
    fn a2_endomorphisms_of_regular_rep() {
        let bx = a2_box();
        let b = regular_rep(&bx);
        let homs = morphism_space(&bx, &b, &b);
        assert_eq!(homs.len(), 5);
    }

    #[test]
    fn zero_rep_has_no_morphisms() {
        let bx = a1_box();
        let b = regular_rep(&bx);
        let zero = Representation::zero(Arc::clone(&bx.algebra));
        assert_eq!(morphism_space(&bx, &zero, &b).len(), 0);
        assert_eq!(morphism_space(&bx, &b, &zero).len(), 0);
    }

    #[test]
    fn identity_composes_as_unit() {
        let bx = a2_box();
        let b = regular_rep(&bx);
        let id = BoxMorphism::identity(&bx, &b);
        for f in morphism_space(&bx, &b, &b) {
            let lhs = compose(&bx, &id, &f, &b, &b, &b);
            let rhs = compose(&bx, &f, &id, &b, &b, &b);
            assert_eq!(lhs, f);
            assert_eq!(rhs, f);
        }
    }

    #[test]
    fn a1_composition_matches_worked_example() {
        // endomorphisms of B over the A.1 box: vertex components
        // (x) and [[x, y], [0, z]], dashed component (lambda, mu)^T; the
        // composite has dashed component (x'l + y'm + l'x, z'm + m'x)
        let bx = a1_box();
        let b = regular_rep(&bx);
        let field = bx.field;
        // the vertex-2 space has basis (e2, a); the worked example writes
        // matrices in the basis (a, e2), so rows/columns are swapped here
        let mk = |x: i64, y: i64, z: i64, l: i64, m: i64| -> BoxMorphism {
            let f1 = Mat::from_rows(vec![vec![field.from_i64(x)]], 1, field);
            let f2 = Mat::from_rows(
                vec![
                    vec![field.from_i64(z), field.from_i64(0)],
                    vec![field.from_i64(y), field.from_i64(x)],
                ],
                2,
                field,
            );
            let fd = Mat::from_rows(
                vec![vec![field.from_i64(m)], vec![field.from_i64(l)]],
                1,
                field,
            );
            BoxMorphism { vertex: vec![f1, f2], dashed: vec![fd] }
        };
        let f = mk(2, 3, 5, 7, 11);
        let g = mk(13, 17, 19, 23, 29);
        assert!(is_box_morphism(&bx, &f, &b, &b));
        assert!(is_box_morphism(&bx, &g, &b, &b));
        // composite f∘g has dashed component (x'l + y'm + l'x, z'm + m'x)
        // in the example's basis, with primes on f
        let (x, l, m) = (13i64, 23i64, 29i64);
        let (xp, yp, zp, lp, mp) = (2i64, 3, 5, 7, 11);
        let c = compose(&bx, &f, &g, &b, &b, &b);
        let expect_a = field.from_i64(xp * l + yp * m + lp * x);
        let expect_e2 = field.from_i64(zp * m + mp * x);
        assert_eq!(c.dashed[0].at(0, 0), &expect_e2);
        assert_eq!(c.dashed[0].at(1, 0), &expect_a);
    }

    #[test]
    fn composition_associative_on_random_triples() {
        for bx in [a1_box(), a2_box()] {
            let b = regular_rep(&bx);
            let homs = morphism_space(&bx, &b, &b);
            let mut rng = Rng::new(7);
            for _ in 0..50 {
                let pick = |rng: &mut Rng| {
                    let mut acc = BoxMorphism::zero(&bx, &b, &b);
                    for f in &homs {
                        acc = acc.add(&f.scale(&bx.field.from_i64(rng.small_int(2))));
                    }
                    acc
                };
                let f = pick(&mut rng);
                let g = pick(&mut rng);
                let h = pick(&mut rng);
                let left = compose(&bx, &compose(&bx, &f, &g, &b, &b, &b), &h, &b, &b, &b);
                let right = compose(&bx, &f, &compose(&bx, &g, &h, &b, &b, &b), &b, &b, &b);
                assert_eq!(left, right);
            }
        }
    }

    #[test]
    fn isomorphism_inverse_roundtrip() {
        let bx = a2_box();
        let b = regular_rep(&bx);
        // an endomorphism with invertible vertex parts and nonzero dashed
        let homs = morphism_space(&bx, &b, &b);
        let mut f = BoxMorphism::identity(&bx, &b);
        for (k, h) in homs.iter().enumerate() {
            f = f.add(&h.scale(&bx.field.from_i64(k as i64 % 2)));
        }
        if !is_isomorphism(&f) {
            f = BoxMorphism::identity(&bx, &b);
        }
        let g = inverse(&bx, &f, &b, &b).unwrap();
        let gf = compose(&bx, &g, &f, &b, &b, &b);
        assert_eq!(gf, BoxMorphism::identity(&bx, &b));
    }

    #[test]
    fn singular_vertex_component_is_not_iso() {
        let bx = a1_box();
        let b = regular_rep(&bx);
        let mut f = BoxMorphism::identity(&bx, &b);
        f.vertex[0] = Mat::zero(1, 1, bx.field);
        assert!(!is_isomorphism(&f));
    }

    #[test]
    fn transport_identity_is_identity() {
        let bx = a1_box();
        let b = regular_rep(&bx);
        let fv: Vec<Mat> = b.dims.iter().map(|&d| Mat::identity(d, bx.field)).collect();
        let fd: Vec<Mat> = bx
            .dashed
            .iter()
            .map(|d| Mat::zero(b.dims[d.tgt], b.dims[d.src], bx.field))
            .collect();
        let (y, f) = transport(&bx, &b, fv, fd).unwrap();
        assert_eq!(y.dims, b.dims);
        for (a, m) in y.action.iter().enumerate() {
            assert_eq!(m, &b.action[a]);
        }
        assert!(f.dashed.iter().all(|m| m.is_zero()));
    }

    #[test]
    fn transport_with_scaling_conjugates() {
        let bx = a1_box();
        let b = regular_rep(&bx);
        let c1 = bx.field.from_i64(2);
        let c2 = bx.field.from_i64(3);
        let fv = vec![
            Mat::identity(1, bx.field).scale(&c1),
            Mat::identity(2, bx.field).scale(&c2),
        ];
        let fd: Vec<Mat> = bx
            .dashed
            .iter()
            .map(|d| Mat::zero(b.dims[d.tgt], b.dims[d.src], bx.field))
            .collect();
        let (y, _) = transport(&bx, &b, fv, fd).unwrap();
        // Y(a) = c_t X(a) c_s^{-1}
        let expect = b.action[0].scale(&(&c2 * &c1.inv()));
        assert_eq!(y.action[0], expect);
    }

    #[test]
    fn transport_arbitrary_dashed_gives_iso_on_a1() {
        let bx = a1_box();
        let b = regular_rep(&bx);
        let fv: Vec<Mat> = b.dims.iter().map(|&d| Mat::identity(d, bx.field)).collect();
        let fd = vec![Mat::from_rows(
            vec![vec![bx.field.from_i64(4)], vec![bx.field.from_i64(-5)]],
            1,
            bx.field,
        )];
        let (y, f) = transport(&bx, &b, fv, fd).unwrap();
        assert!(is_box_morphism(&bx, &f, &b, &y));
        assert!(is_isomorphism(&f));
    }

    #[test]
    fn split_identity_and_zero() {
        let bx = a2_box();
        let b = regular_rep(&bx);
        let id = BoxMorphism::identity(&bx, &b);
        let (y, _, _) = split_idempotent(&bx, &b, &id).unwrap();
        assert_eq!(y.total_dim(), b.total_dim());
        let zero = BoxMorphism::zero(&bx, &b, &b);
        let (y0, _, _) = split_idempotent(&bx, &b, &zero).unwrap();
        assert_eq!(y0.total_dim(), 0);
    }

    #[test]
    fn split_nontrivial_idempotent_with_dashed_part() {
        let bx = a2_box();
        let b = regular_rep(&bx);
        // build an idempotent from the morphism space basis: the regular rep
        // of the A.2 box decomposes; search the 5-dim endo algebra for a
        // nontrivial idempotent with nonzero dashed component
        let homs = morphism_space(&bx, &b, &b);
        let mut found = None;
        let mut rng = Rng::new(3);
        for _ in 0..400 {
            let mut e = BoxMorphism::zero(&bx, &b, &b);
            for h in &homs {
                e = e.add(&h.scale(&bx.field.from_i64(rng.small_int(1))));
            }
            let ee = compose(&bx, &e, &e, &b, &b, &b);
            if ee == e && !e.is_zero() && e != BoxMorphism::identity(&bx, &b) {
                found = Some(e);
                if found.as_ref().unwrap().dashed.iter().any(|m| !m.is_zero()) {
                    break;
                }
            }
        }
        let e = found.expect("some nontrivial idempotent exists");
        let (y, pi, iota) = split_idempotent(&bx, &b, &e).unwrap();
        let ip = compose(&bx, &iota, &pi, &b, &y, &b);
        assert_eq!(ip, e);
        let pi2 = compose(&bx, &pi, &iota, &y, &b, &y);
        assert_eq!(pi2, BoxMorphism::identity(&bx, &y));
        assert!(y.total_dim() > 0);
        assert!(y.total_dim() < b.total_dim());
    }

    #[test]
    fn exact_pair_and_normalization() {
        // 0 -> L_B(2) -> P_B(1)-column -> L_B(1) -> 0 over the A.1 box
        let bx = a1_box();
        let alg = &bx.algebra;
        let p1 = crate::modules::projective(alg, 0);
        let l1 = simple(alg, 0);
        let l2 = simple(alg, 1);
        let field = bx.field;
        // inclusion L(2) -> P(1) hits the path a; projection P(1) -> L(1)
        let f = BoxMorphism {
            vertex: vec![
                Mat::zero(p1.dims[0], 0, field),
                Mat::identity(1, field),
            ],
            dashed: vec![Mat::zero(p1.dims[1], 0, field)],
        };
        let g = BoxMorphism {
            vertex: vec![Mat::identity(1, field), Mat::zero(0, 1, field)],
            dashed: vec![Mat::zero(0, 1, field)],
        };
        assert!(is_box_morphism(&bx, &f, &l2, &p1));
        assert!(is_box_morphism(&bx, &g, &p1, &l1));
        assert!(exact_pair_check(&bx, &f, &g, &l2, &p1, &l1));
        let (y2, f2, g2) = normalize_pair(&bx, &f, &g, &l2, &p1, &l1).unwrap();
        assert!(f2.dashed.iter().all(|m| m.is_zero()));
        assert!(g2.dashed.iter().all(|m| m.is_zero()));
        assert!(exact_pair_check(&bx, &f2, &g2, &l2, &y2, &l1));
    }

    #[test]
    fn pointwise_exact_but_nonzero_composite_rejected() {
        let bx = a2_box();
        let b = regular_rep(&bx);
        let id = BoxMorphism::identity(&bx, &b);
        // (id, id) has nonzero composite and is not vertexwise exact either
        assert!(!exact_pair_check(&bx, &id, &id, &b, &b, &b));
    }

    #[test]
    fn deflation_composition_axioms_on_random_data() {
        let bx = a2_box();
        let b = regular_rep(&bx);
        let mut rng = Rng::new(11);
        // deflations are exactly the vertexwise epis: check that composing
        // two of them is again one, on conjugated projections
        for _ in 0..10 {
            let homs = morphism_space(&bx, &b, &b);
            let mut e = BoxMorphism::identity(&bx, &b);
            for h in &homs {
                e = e.add(&h.scale(&bx.field.from_i64(rng.small_int(1))));
            }
            if !is_isomorphism(&e) {
                continue;
            }
            let comp = compose(&bx, &e, &e, &b, &b, &b);
            assert!(comp.vertex.iter().all(|m| m.rank() == m.rows));
        }
    }

    #[test]
    fn random_modules_satisfy_relations() {
        let src = parse_algebra(fixtures::A3).unwrap();
        let alg = Arc::new(
            crate::presentation::build_path_algebra(FieldCfg::Q, src.quiver, src.relations, None)
                .unwrap(),
        );
        // reuse the box machinery over A.3's Borel via the pipeline in
        // burtbutler tests; here exercise the generator over a plain algebra
        let bx = a1_box();
        let mut rng = Rng::new(5);
        for _ in 0..10 {
            let m = random_module(&bx, &mut rng, 3);
            assert!(m.satisfies_relations());
        }
        let _ = alg;
    }
}
