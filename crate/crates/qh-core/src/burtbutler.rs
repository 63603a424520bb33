//! The right and left algebras of a directed box, the Borel embedding, the
//! induction functor, and the full verification suite for the exact Borel
//! properties.

use crate::boxify::{box_coalgebra, BoxCoalgebra, BoxData};
use crate::boxrep::{
    compose, is_box_morphism, morphism_space_with_layout, regular_basis, regular_rep, BoxMorphism,
    HomLayout,
};
use crate::error::{QhError, Result};
use crate::linalg::{kernel_basis, rref, solve, Mat, Subspace};
use crate::modules::Representation;
use crate::sca::{
    basicify, dim_vector, find_module_isomorphism, fingerprint_of_basic,
    standard_sca, Basicified, MoritaFingerprint, Sca, ScaModule,
};
use crate::scalar::Scalar;

/// Everything derived from a box that the verification suite consumes.
pub struct BurtButler {
    pub bx: BoxData,
    pub reg: Representation,
    pub endo_basis: Vec<BoxMorphism>,
    pub layout: HomLayout,
    /// R = End(B)^op by structure constants
    pub right: Sca,
    /// each R basis element as a left-linear map W -> B
    pub rho: Vec<Mat>,
    /// right action of each R basis element on W
    pub w_right: Vec<Mat>,
    /// L = Hom(W_B, B_B) by structure constants
    pub left: Sca,
    /// each L basis element as a right-linear map W -> B
    pub sigma: Vec<Mat>,
    /// left action of each L basis element on W
    pub w_left: Vec<Mat>,
    pub coalgebra: BoxCoalgebra,
    /// images of the trivial paths of B inside R
    pub anchors: Vec<Vec<Scalar>>,
    /// the Borel embedding matrix, dim B -> dim R columns
    pub emb: Mat,
}

fn regular_coords_of_path(bx: &BoxData, p: usize) -> (usize, usize) {
    // (vertex, offset) of basis path p inside the regular representation
    let v = bx.algebra.basis[p].tgt;
    let pos = regular_basis(bx)[v].iter().position(|&k| k == p).unwrap();
    (v, pos)
}

/// The morphism of the regular representation given by right multiplication
/// with a basis path.
fn right_mult_morphism(bx: &BoxData, b: usize) -> BoxMorphism {
    let alg = &bx.algebra;
    let field = bx.field;
    let basis = regular_basis(bx);
    let vertex: Vec<Mat> = (0..bx.n_vertices())
        .map(|v| {
            Mat::from_fn(basis[v].len(), basis[v].len(), field, |r2, c2| {
                let prod = alg.mult_basis(basis[v][c2], b);
                prod[basis[v][r2]].clone()
            })
        })
        .collect();
    let dashed: Vec<Mat> = bx
        .dashed
        .iter()
        .map(|d| Mat::zero(basis[d.tgt].len(), basis[d.src].len(), field))
        .collect();
    BoxMorphism { vertex, dashed }
}

/// Left-linear avatar rho: W -> B of an endomorphism f of the regular
/// representation: rho(q·g·p) = q · f_g(p).
fn rho_matrix(bx: &BoxData, co: &BoxCoalgebra, f: &BoxMorphism) -> Mat {
    let alg = &bx.algebra;
    let field = bx.field;
    let nv = bx.n_vertices();
    let w = &co.w;
    let basis = regular_basis(bx);
    let mut out = Mat::zero(alg.dim(), w.dim, field);
    for col in 0..w.dim {
        let mut qv = vec![field.zero(); w.dim];
        qv[col] = field.one();
        let amb = w.rel.lift(&qv);
        let mut acc = alg.zero_vec();
        for (k, c) in amb.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (q, g, p) = w.ambient[k];
            // p as an element of the regular representation
            let (pv, ppos) = regular_coords_of_path(bx, p);
            let fmat = if g < nv { &f.vertex[g] } else { &f.dashed[g - nv] };
            debug_assert_eq!(
                pv,
                if g < nv { g } else { bx.dashed[g - nv].src }
            );
            let tgt_v = if g < nv { g } else { bx.dashed[g - nv].tgt };
            let mut e = vec![field.zero(); fmat.cols];
            e[ppos] = field.one();
            let img = fmat.apply(&e);
            // left-multiply by q and read off algebra coordinates
            for (r2, coeff) in img.iter().enumerate() {
                if coeff.is_zero() {
                    continue;
                }
                let elem = basis[tgt_v][r2];
                let prod = alg.mult_basis(q, elem);
                for (b2, cb) in prod.iter().enumerate() {
                    if !cb.is_zero() {
                        acc[b2] = &acc[b2] + &(&(c * coeff) * cb);
                    }
                }
            }
        }
        for (r2, v) in acc.into_iter().enumerate() {
            out.set(r2, col, v);
        }
    }
    out
}

/// Right action of r on W through the comultiplication: w·r = w' · rho(w'').
fn w_right_action(bx: &BoxData, co: &BoxCoalgebra, rho: &Mat) -> Mat {
    let field = bx.field;
    let w = &co.w;
    let mut out = Mat::zero(w.dim, w.dim, field);
    for col in 0..w.dim {
        let mut wv = vec![field.zero(); w.dim];
        wv[col] = field.one();
        let m = co.mu.apply(&wv);
        let mut acc = vec![field.zero(); w.dim];
        for (l, r2, c) in co.w2.lift_pairs(&m) {
            let mut rv = vec![field.zero(); w.dim];
            rv[r2] = field.one();
            let b_elem = rho.apply(&rv);
            let mut lv = vec![field.zero(); w.dim];
            lv[l] = field.one();
            let term = w.apply_right(&lv, &b_elem);
            for (k, v) in term.into_iter().enumerate() {
                acc[k] = &acc[k] + &(&c * &v);
            }
        }
        for (r3, v) in acc.into_iter().enumerate() {
            out.set(r3, col, v);
        }
    }
    out
}

/// Left action of an L element on W: e·w = e(w') · w''.
fn w_left_action(bx: &BoxData, co: &BoxCoalgebra, sigma: &Mat) -> Mat {
    let field = bx.field;
    let w = &co.w;
    let mut out = Mat::zero(w.dim, w.dim, field);
    for col in 0..w.dim {
        let mut wv = vec![field.zero(); w.dim];
        wv[col] = field.one();
        let m = co.mu.apply(&wv);
        let mut acc = vec![field.zero(); w.dim];
        for (l, r2, c) in co.w2.lift_pairs(&m) {
            let mut lv = vec![field.zero(); w.dim];
            lv[l] = field.one();
            let b_elem = sigma.apply(&lv);
            let mut rv = vec![field.zero(); w.dim];
            rv[r2] = field.one();
            let term = w.apply_left(&b_elem, &rv);
            for (k, v) in term.into_iter().enumerate() {
                acc[k] = &acc[k] + &(&c * &v);
            }
        }
        for (r3, v) in acc.into_iter().enumerate() {
            out.set(r3, col, v);
        }
    }
    out
}

/// R = End of the regular box representation, opposed; together with the
/// Hom_B(W, B) model cross-checked against it.
pub fn build_burt_butler(bx: &BoxData) -> Result<BurtButler> {
    let field = bx.field;
    let reg = regular_rep(bx);
    let (endo_basis, layout) = morphism_space_with_layout(bx, &reg, &reg);
    let dim_r = endo_basis.len();
    // structure constants: r_i . r_j = f_j ∘ f_i (the opposite of End)
    let mut mult = Vec::new();
    for i in 0..dim_r {
        let mut row = Vec::new();
        for j in 0..dim_r {
            let comp = compose(bx, &endo_basis[j], &endo_basis[i], &reg, &reg, &reg);
            row.push(layout.coords(&comp));
        }
        mult.push(row);
    }
    let unit = layout.coords(&BoxMorphism::identity(bx, &reg));
    let right = Sca { field, dim: dim_r, unit, mult };

    let coalgebra = box_coalgebra(bx)?;
    let rho: Vec<Mat> = endo_basis
        .iter()
        .map(|f| rho_matrix(bx, &coalgebra, f))
        .collect();
    // the counit is the identity of R
    {
        let mut eps_rho = Mat::zero(bx.algebra.dim(), coalgebra.w.dim, field);
        for (i, c) in right.unit.iter().enumerate() {
            if !c.is_zero() {
                eps_rho = &eps_rho + &rho[i].scale(c);
            }
        }
        if eps_rho != coalgebra.w.eps {
            return Err(QhError::Internal("unit of R does not match the counit".into()));
        }
    }
    let w_right: Vec<Mat> = rho.iter().map(|r| w_right_action(bx, &coalgebra, r)).collect();
    // cross-check: the multiplication matches the Hom_B(W, B) model,
    // (r_i . r_j)(w) = rho_j(w · r_i)
    for i in 0..dim_r {
        for j in 0..dim_r {
            let viaw = &rho[j] * &w_right[i];
            let mut direct = Mat::zero(bx.algebra.dim(), coalgebra.w.dim, field);
            for (k, c) in right.mult[i][j].iter().enumerate() {
                if !c.is_zero() {
                    direct = &direct + &rho[k].scale(c);
                }
            }
            if viaw != direct {
                return Err(QhError::Internal(
                    "End-composition and Hom_B(W,B) multiplication disagree".into(),
                ));
            }
        }
    }

    // L = right-linear maps W -> B
    let alg = &bx.algebra;
    let w = &coalgebra.w;
    let total = alg.dim() * w.dim;
    let mut rows = Vec::new();
    for b in 0..alg.dim() {
        // sigma(w·b) = sigma(w)·b as matrices: S·Right_b = RightMult_b·S
        for r2 in 0..alg.dim() {
            for c2 in 0..w.dim {
                let mut row = vec![field.zero(); total];
                for k in 0..w.dim {
                    row[r2 * w.dim + k] = &row[r2 * w.dim + k] + w.right[b].at(k, c2);
                }
                for k in 0..alg.dim() {
                    // (sigma(w)·b) coordinates: right multiplication in B
                    let prod = alg.mult_basis(k, b);
                    row[k * w.dim + c2] = &row[k * w.dim + c2] - &prod[r2];
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
    let sol_rows = rref(&m);
    let free: Vec<usize> = (0..total).filter(|c| !sol_rows.pivots.contains(c)).collect();
    let sigma: Vec<Mat> = kernel_basis(&m)
        .into_iter()
        .map(|sol| Mat::from_fn(alg.dim(), w.dim, field, |r2, c2| sol[r2 * w.dim + c2].clone()))
        .collect();
    let dim_l = sigma.len();
    // multiplication (e·f)(w) = e(f(w') · w'')
    let sigma_coords = |mat: &Mat| -> Vec<Scalar> {
        let flat = mat.flatten();
        free.iter().map(|&c| flat[c].clone()).collect()
    };
    let mut lmult = Vec::new();
    for i in 0..dim_l {
        let mut row = Vec::new();
        for j in 0..dim_l {
            // (sigma_i · sigma_j)(w) = sigma_i( sigma_j(w') · w'' )
            let mut prod = Mat::zero(alg.dim(), w.dim, field);
            for col in 0..w.dim {
                let mut wv = vec![field.zero(); w.dim];
                wv[col] = field.one();
                let mw = coalgebra.mu.apply(&wv);
                let mut acc = alg.zero_vec();
                for (l, r2, c) in coalgebra.w2.lift_pairs(&mw) {
                    let mut lv = vec![field.zero(); w.dim];
                    lv[l] = field.one();
                    let b_elem = sigma[j].apply(&lv);
                    let mut rv = vec![field.zero(); w.dim];
                    rv[r2] = field.one();
                    let moved = w.apply_left(&b_elem, &rv);
                    let img = sigma[i].apply(&moved);
                    for (k, v) in img.into_iter().enumerate() {
                        acc[k] = &acc[k] + &(&c * &v);
                    }
                }
                for (r3, v) in acc.into_iter().enumerate() {
                    prod.set(r3, col, v);
                }
            }
            row.push(sigma_coords(&prod));
        }
        lmult.push(row);
    }
    let lunit = sigma_coords(&w.eps);
    let left = Sca { field, dim: dim_l, unit: lunit, mult: lmult };
    let w_left: Vec<Mat> = sigma.iter().map(|s| w_left_action(bx, &coalgebra, s)).collect();

    // Borel embedding
    let emb_cols: Vec<Vec<Scalar>> = (0..alg.dim())
        .map(|b| {
            let f = right_mult_morphism(bx, b);
            debug_assert!(is_box_morphism(bx, &f, &reg, &reg));
            layout.coords(&f)
        })
        .collect();
    let emb = Mat::from_fn(dim_r, alg.dim(), field, |r2, c2| emb_cols[c2][r2].clone());
    let anchors: Vec<Vec<Scalar>> = (0..bx.n_vertices())
        .map(|v| emb_cols[alg.trivial(v)].clone())
        .collect();

    Ok(BurtButler {
        bx: bx.clone(),
        reg,
        endo_basis,
        layout,
        right,
        rho,
        w_right,
        left,
        sigma,
        w_left,
        coalgebra,
        anchors,
        emb,
    })
}

impl BurtButler {
    pub fn dim_r(&self) -> usize {
        self.right.dim
    }

    pub fn dim_l(&self) -> usize {
        self.left.dim
    }

    /// The Borel embedding is injective and multiplicative; returns the
    /// image dimension.
    pub fn check_borel_embedding(&self) -> Result<usize> {
        let alg = &self.bx.algebra;
        if rref(&self.emb).rank != alg.dim() {
            return Err(QhError::Verification("Borel embedding is not injective".into()));
        }
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                let prod = alg.mult_basis(i, j).to_vec();
                let lhs = self.right.mult_vec(&self.emb.col(i), &self.emb.col(j));
                let mut rhs = self.right.zero_vec();
                for (k, c) in prod.iter().enumerate() {
                    if !c.is_zero() {
                        for (r2, v) in self.emb.col(k).iter().enumerate() {
                            rhs[r2] = &rhs[r2] + &(c * v);
                        }
                    }
                }
                if lhs != rhs {
                    return Err(QhError::Verification("Borel embedding is not multiplicative".into()));
                }
            }
        }
        Ok(alg.dim())
    }

    /// The Borel image as a structure-constant algebra with the vertex
    /// idempotents as anchors.
    pub fn borel_image_fingerprint(&self) -> Result<MoritaFingerprint> {
        let span: Vec<Vec<Scalar>> = (0..self.bx.algebra.dim()).map(|b| self.emb.col(b)).collect();
        let (image, basis) = self.right.subalgebra(&span, &self.right.unit)?;
        let coords = |v: &[Scalar]| -> Vec<Scalar> {
            let m = Mat::from_fn(self.right.dim, image.dim, self.right.field, |r2, c2| {
                basis[c2][r2].clone()
            });
            solve(&m, v).expect("anchor lies in the image")
        };
        let anchors: Vec<Vec<Scalar>> = self.anchors.iter().map(|a| coords(a)).collect();
        let b = basicify(&image, Some(&anchors))?;
        fingerprint_of_basic(&b.basic, &b.idempotents)
    }

    /// Induced module Hom_B(W, X) as a module over R.
    pub fn induce(&self, x: &Representation) -> ScaModule {
        let (basis, layoutfree) = self.hom_w_into(x);
        let dim = basis.len();
        let field = self.bx.field;
        let wdim = self.coalgebra.w.dim;
        let xtotal: usize = x.dims.iter().sum();
        let mut act = Vec::new();
        for r in 0..self.right.dim {
            // (r·theta) = theta ∘ (w·r)
            let mut m = Mat::zero(dim, dim, field);
            for (c2, th) in basis.iter().enumerate() {
                let composed = th * &self.w_right[r];
                let flat = composed.flatten();
                let coords: Vec<Scalar> = layoutfree.iter().map(|&k| flat[k].clone()).collect();
                for (r2, v) in coords.into_iter().enumerate() {
                    m.set(r2, c2, v);
                }
            }
            act.push(m);
        }
        let _ = (wdim, xtotal);
        ScaModule { dim, act }
    }

    /// Basis of Hom_B(W, X) as matrices W -> X_total, plus the free-column
    /// layout used for coordinates.
    pub fn hom_w_into(&self, x: &Representation) -> (Vec<Mat>, Vec<usize>) {
        let field = self.bx.field;
        let alg = &self.bx.algebra;
        let w = &self.coalgebra.w;
        let xtotal: usize = x.dims.iter().sum();
        let offsets: Vec<usize> = x
            .dims
            .iter()
            .scan(0, |acc, &d| {
                let v = *acc;
                *acc += d;
                Some(v)
            })
            .collect();
        // total action of a basis path on the flattened space
        let act_total = |p: usize| -> Mat {
            let b = &alg.basis[p];
            let m = x.act_path(&b.arrows, b.src);
            let mut out = Mat::zero(xtotal, xtotal, field);
            for r2 in 0..m.rows {
                for c2 in 0..m.cols {
                    out.set(offsets[b.tgt] + r2, offsets[b.src] + c2, m.at(r2, c2).clone());
                }
            }
            out
        };
        let total = xtotal * w.dim;
        let mut rows = Vec::new();
        for b in 0..alg.dim() {
            let left_b = &w.left[b];
            let act_b = act_total(b);
            for r2 in 0..xtotal {
                for c2 in 0..w.dim {
                    // theta(b·w) - b·theta(w) = 0
                    let mut row = vec![field.zero(); total];
                    for k in 0..w.dim {
                        row[r2 * w.dim + k] = &row[r2 * w.dim + k] + left_b.at(k, c2);
                    }
                    for k in 0..xtotal {
                        row[k * w.dim + c2] = &row[k * w.dim + c2] - act_b.at(r2, k);
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
        let r = rref(&m);
        let free: Vec<usize> = (0..total).filter(|c| !r.pivots.contains(c)).collect();
        let basis: Vec<Mat> = kernel_basis(&m)
            .into_iter()
            .map(|sol| Mat::from_fn(xtotal, w.dim, field, |r2, c2| sol[r2 * w.dim + c2].clone()))
            .collect();
        (basis, free)
    }

    /// Functorial action of induce on a module morphism.
    pub fn induce_map(
        &self,
        x: &Representation,
        y: &Representation,
        f: &crate::modules::ModuleMorphism,
    ) -> Mat {
        let field = self.bx.field;
        let (xb, _) = self.hom_w_into(x);
        let (yb, yfree) = self.hom_w_into(y);
        let ytotal: usize = y.dims.iter().sum();
        let xoff: Vec<usize> = x
            .dims
            .iter()
            .scan(0, |acc, &d| {
                let v = *acc;
                *acc += d;
                Some(v)
            })
            .collect();
        let yoff: Vec<usize> = y
            .dims
            .iter()
            .scan(0, |acc, &d| {
                let v = *acc;
                *acc += d;
                Some(v)
            })
            .collect();
        let xtotal: usize = x.dims.iter().sum();
        let mut ftotal = Mat::zero(ytotal, xtotal, field);
        for v in 0..x.dims.len() {
            for r2 in 0..y.dims[v] {
                for c2 in 0..x.dims[v] {
                    ftotal.set(yoff[v] + r2, xoff[v] + c2, f.mats[v].at(r2, c2).clone());
                }
            }
        }
        let mut out = Mat::zero(yb.len(), xb.len(), field);
        for (c2, th) in xb.iter().enumerate() {
            let img = &ftotal * th;
            let flat = img.flatten();
            let coords: Vec<Scalar> = yfree.iter().map(|&k| flat[k].clone()).collect();
            for (r2, vv) in coords.into_iter().enumerate() {
                out.set(r2, c2, vv);
            }
        }
        out
    }

    /// Standard module of R at vertex i (over the anchor idempotents).
    pub fn standard_r(&self, i: usize) -> ScaModule {
        standard_sca(&self.right, &self.anchors, i)
    }

    /// Double-centralizer dimensions: (dim End_{R^op}(W), dim End_L(W)).
    pub fn double_centralizer_dims(&self) -> (usize, usize) {
        let field = self.bx.field;
        let wdim = self.coalgebra.w.dim;
        let commutant_dim = |mats: &[Mat]| -> usize {
            let total = wdim * wdim;
            let mut rows = Vec::new();
            for m in mats {
                // theta · m - m · theta = 0
                for r2 in 0..wdim {
                    for c2 in 0..wdim {
                        let mut row = vec![field.zero(); total];
                        for k in 0..wdim {
                            row[r2 * wdim + k] = &row[r2 * wdim + k] + m.at(k, c2);
                            row[k * wdim + c2] = &row[k * wdim + c2] - m.at(r2, k);
                        }
                        if row.iter().any(|z| !z.is_zero()) {
                            rows.push(row);
                        }
                    }
                }
            }
            let mm = if rows.is_empty() {
                Mat::zero(0, total, field)
            } else {
                Mat::from_rows(rows, total, field)
            };
            total - rref(&mm).rank
        };
        (commutant_dim(&self.w_right), commutant_dim(&self.w_left))
    }

    /// Basicified right algebra, classes ordered so that class i carries the
    /// top of Delta_R(i), with its fingerprint.
    pub fn basicified_right(&self) -> Result<(Basicified, MoritaFingerprint)> {
        let b = basicify(&self.right, None)?;
        let nv = self.bx.n_vertices();
        if b.idempotents.len() != nv {
            return Err(QhError::Verification(format!(
                "R has {} simple classes but B has {} vertices",
                b.idempotents.len(),
                nv
            )));
        }
        // ambient representatives of the class idempotents
        let ambient: Vec<Vec<Scalar>> = b
            .idempotents
            .iter()
            .map(|e| {
                let mut v = self.right.zero_vec();
                for (k, c) in e.iter().enumerate() {
                    for (j, x) in b.inclusion[k].iter().enumerate() {
                        v[j] = &v[j] + &(c * x);
                    }
                }
                v
            })
            .collect();
        let rad = crate::sca::radical_sca(&self.right)?;
        let mut order = Vec::new();
        for i in 0..nv {
            let delta = self.standard_r(i);
            let radsub = crate::sca::radical_submodule(&self.right, &rad, &delta);
            let (top, _) = crate::sca::quotient_module(&self.right, &delta, &radsub);
            let hits: Vec<usize> = (0..nv)
                .filter(|&k| top.act_vec(&self.right, &ambient[k]).rank() > 0)
                .collect();
            if hits.len() != 1 {
                return Err(QhError::Internal(format!(
                    "top of Delta_R({i}) is not simple over one class: {hits:?}"
                )));
            }
            order.push(hits[0]);
        }
        {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != nv {
                return Err(QhError::Internal("class order is not a bijection".into()));
            }
        }
        let reordered = Basicified {
            basic: b.basic.clone(),
            idempotents: order.iter().map(|&k| b.idempotents[k].clone()).collect(),
            multiplicities: order.iter().map(|&k| b.multiplicities[k]).collect(),
            inclusion: b.inclusion.clone(),
        };
        let f = fingerprint_of_basic(&reordered.basic, &reordered.idempotents)?;
        Ok((reordered, f))
    }
}

/// Verdicts of the exact-Borel verification.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct BorelReport {
    pub b1_directed: bool,
    pub b1_simple_standards: bool,
    pub b2_exact_on_batch: bool,
    pub b2_projective_kernel: bool,
    pub b3_standards_induced: bool,
    pub ses_checked: usize,
    pub detail: Vec<String>,
}

impl BorelReport {
    pub fn all_pass(&self) -> bool {
        self.b1_directed
            && self.b1_simple_standards
            && self.b2_exact_on_batch
            && self.b2_projective_kernel
            && self.b3_standards_induced
    }
}

/// (B1): B directed with simple standard modules; (B2): induction exact on
/// a seeded batch of short exact sequences plus the structural projective-
/// kernel certificate; (B3): induce(L_B(i)) isomorphic to Delta_R(i).
pub fn verify_exact_borel(bb: &BurtButler, seed: u64, batch: usize) -> Result<BorelReport> {
    let bx = &bb.bx;
    let alg = &bx.algebra;
    let nv = bx.n_vertices();
    let mut detail = Vec::new();

    let b1_directed = bx.is_directed();
    if !b1_directed {
        detail.push("box is not directed".into());
    }
    let mut b1_simple_standards = true;
    for i in 0..nv {
        let d = crate::modules::standard_module(alg, i);
        let expect: Vec<usize> = (0..nv).map(|v| usize::from(v == i)).collect();
        if d.dims != expect {
            b1_simple_standards = false;
            detail.push(format!("standard module {i} of B is not simple"));
        }
    }
    if !crate::modules::is_quasi_hereditary(alg).ok {
        b1_simple_standards = false;
        detail.push("B is not quasi-hereditary".into());
    }

    // structural certificate for (B2)
    let axioms = crate::boxify::check_box_axioms(bx)?;
    let b2_projective_kernel = axioms.ok();
    if !b2_projective_kernel {
        detail.push(format!("box axioms fail: {axioms:?}"));
    }

    // seeded batch of short exact sequences
    let mut rng = crate::rng::Rng::new(seed);
    let mut b2_exact_on_batch = true;
    let mut ses_checked = 0;
    for _ in 0..batch {
        let m = crate::boxrep::random_module(bx, &mut rng, 3);
        if m.is_zero() {
            continue;
        }
        // random generated submodule
        let mut gens: Vec<Vec<Vec<Scalar>>> = vec![Vec::new(); nv];
        for v in 0..nv {
            if m.dims[v] == 0 {
                continue;
            }
            let count = rng.below(2);
            for _ in 0..count {
                let vec: Vec<Scalar> = (0..m.dims[v])
                    .map(|_| bx.field.from_i64(rng.small_int(2)))
                    .collect();
                if vec.iter().any(|c| !c.is_zero()) {
                    gens[v].push(vec);
                }
            }
        }
        let sub = crate::modules::sub_module(&m, gens);
        let (s, incl) = crate::modules::sub_rep(&m, &sub);
        let (q, proj) = crate::modules::quotient_rep(&m, &sub);
        if s.is_zero() || q.is_zero() {
            continue;
        }
        ses_checked += 1;
        let hs = bb.hom_w_into(&s).0.len();
        let hm = bb.hom_w_into(&m).0.len();
        let hq = bb.hom_w_into(&q).0.len();
        let fi = bb.induce_map(&s, &m, &incl);
        let fp = bb.induce_map(&m, &q, &proj);
        let comp = &fp * &fi;
        let exact = comp.is_zero()
            && fi.rank() == hs
            && fp.rank() == hq
            && hs + hq == hm;
        if !exact {
            b2_exact_on_batch = false;
            detail.push(format!(
                "induction not exact on a SES: dims {hs}+{hq} vs {hm}, ranks {} {}",
                fi.rank(),
                fp.rank()
            ));
        }
    }

    // (B3)
    let mut b3_standards_induced = true;
    for i in 0..nv {
        let li = crate::modules::simple(alg, i);
        let induced = bb.induce(&li);
        let delta = bb.standard_r(i);
        match find_module_isomorphism(&bb.right, &induced, &delta) {
            Some(_) => {}
            None => {
                b3_standards_induced = false;
                detail.push(format!(
                    "induce(L_B({i})) has dimension {} but Delta_R({i}) has {}",
                    induced.dim, delta.dim
                ));
            }
        }
    }

    Ok(BorelReport {
        b1_directed,
        b1_simple_standards,
        b2_exact_on_batch,
        b2_projective_kernel,
        b3_standards_induced,
        ses_checked,
        detail,
    })
}

/// Cohomology dimensions of Hom(resolution, target) together with matrices.
fn hom_res_complex(
    alg: &std::sync::Arc<crate::presentation::PathAlgebra>,
    res: &crate::homotopy::ProjResolution,
    target_dims: &[usize],
    act_of_path: &dyn Fn(usize) -> Mat,
) -> (Vec<usize>, Vec<Mat>) {
    let field = alg.field;
    let spaces: Vec<Vec<usize>> = res
        .terms
        .iter()
        .map(|term| term.iter().map(|&a| target_dims[a]).collect())
        .collect();
    let dims: Vec<usize> = spaces.iter().map(|d| d.iter().sum()).collect();
    let mut mats = Vec::new();
    for k in 0..res.length() {
        let d = &res.diffs[k];
        let mut m = Mat::zero(dims[k + 1], dims[k], field);
        let off = |sp: &Vec<usize>| -> Vec<usize> {
            sp.iter()
                .scan(0, |acc, &x| {
                    let v = *acc;
                    *acc += x;
                    Some(v)
                })
                .collect()
        };
        let off_in = off(&spaces[k]);
        let off_out = off(&spaces[k + 1]);
        for s2 in 0..res.terms[k + 1].len() {
            for t in 0..res.terms[k].len() {
                let u = &d.entries[s2][t];
                for (p, c) in u.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let act = act_of_path(p);
                    for r2 in 0..act.rows {
                        for c2 in 0..act.cols {
                            if !act.at(r2, c2).is_zero() {
                                let val = &(c * act.at(r2, c2))
                                    + m.at(off_out[s2] + r2, off_in[t] + c2);
                                m.set(off_out[s2] + r2, off_in[t] + c2, val);
                            }
                        }
                    }
                }
            }
        }
        mats.push(m);
    }
    (dims, mats)
}

/// Result of comparing Ext^n over B with Ext^n over R on induced modules.
#[derive(Clone, Debug)]
pub struct ExtComparison {
    pub dim_ext_b: usize,
    pub dim_ext_r: usize,
    pub map_rank: usize,
}

/// Ext^n_B(X, Y) -> Ext^n_R(induce X, induce Y) computed through the induced
/// resolution: the right side is Hom_B(P_k, res_B induce(Y)).
pub fn ext_comparison(
    bb: &BurtButler,
    x: &Representation,
    y: &Representation,
    n: usize,
) -> Result<ExtComparison> {
    let bx = &bb.bx;
    let alg = &bx.algebra;
    let field = bx.field;
    let res = crate::homotopy::minimal_resolution(alg, x, alg.n_vertices() + 3)?;
    if n > res.length() {
        return Ok(ExtComparison { dim_ext_b: 0, dim_ext_r: 0, map_rank: 0 });
    }

    // complex 1: Hom(P_k, Y)
    let y_act = |p: usize| -> Mat {
        let b = &alg.basis[p];
        y.act_path(&b.arrows, b.src)
    };
    // vertex spaces of Y are indexed by target vertices of the summands:
    // Hom(P(a), Y) = Y(a), and precomposition acts through the path action
    let (dims1, mats1) = hom_res_complex(alg, &res, &y.dims, &y_act);

    // complex 2: Hom(P_k, M) for M = res_B(induce Y), where M is given by
    // theta-space with the B-action theta -> theta ∘ (right action of b)
    let (yb, yfree) = bb.hom_w_into(y);
    let w = &bb.coalgebra.w;
    let mdim = yb.len();
    // action of a path on M
    let m_act_full = |p: usize| -> Mat {
        let mut out = Mat::zero(mdim, mdim, field);
        for (c2, th) in yb.iter().enumerate() {
            let composed = th * &w.right[p];
            let flat = composed.flatten();
            for (r2, &k) in yfree.iter().enumerate() {
                out.set(r2, c2, flat[k].clone());
            }
        }
        out
    };
    // e_a-graded pieces of M: the projection is the action of the trivial
    // path at a
    let m_proj: Vec<Mat> = (0..alg.n_vertices())
        .map(|v| m_act_full(alg.trivial(v)))
        .collect();
    // basis of each graded piece
    let m_piece_basis: Vec<Vec<Vec<Scalar>>> = m_proj
        .iter()
        .map(|pm| {
            let rt = rref(&pm.transpose());
            (0..rt.rank).map(|k| rt.reduced.row(k).to_vec()).collect()
        })
        .collect();
    let m_dims: Vec<usize> = m_piece_basis.iter().map(|b| b.len()).collect();
    // action of a path p: piece(src) -> piece(tgt) in the chosen bases
    let m_act_graded = |p: usize| -> Mat {
        let b = &alg.basis[p];
        let full = m_act_full(p);
        let src_basis = &m_piece_basis[b.src];
        let tgt_basis = &m_piece_basis[b.tgt];
        let tgt_m = Mat::from_fn(mdim, tgt_basis.len(), field, |r2, c2| {
            tgt_basis[c2][r2].clone()
        });
        let mut out = Mat::zero(tgt_basis.len(), src_basis.len(), field);
        for (c2, v) in src_basis.iter().enumerate() {
            let img = full.apply(v);
            let coords = solve(&tgt_m, &img).expect("graded piece closed under action");
            for (r2, val) in coords.into_iter().enumerate() {
                out.set(r2, c2, val);
            }
        }
        out
    };
    let (dims2, mats2) = hom_res_complex(alg, &res, &m_dims, &m_act_graded);

    // the comparison chain map is post-composition with eta: Y -> M,
    // y -> (w -> eps(w)·y), expressed per graded piece
    let eta: Vec<Mat> = (0..alg.n_vertices())
        .map(|v| {
            // Y(v) -> piece_v(M)
            let yoff: Vec<usize> = y
                .dims
                .iter()
                .scan(0, |acc, &d| {
                    let vv = *acc;
                    *acc += d;
                    Some(vv)
                })
                .collect();
            let ytotal: usize = y.dims.iter().sum();
            let tgt_basis = &m_piece_basis[v];
            let tgt_m = Mat::from_fn(mdim, tgt_basis.len(), field, |r2, c2| {
                tgt_basis[c2][r2].clone()
            });
            let mut out = Mat::zero(tgt_basis.len(), y.dims[v], field);
            for c2 in 0..y.dims[v] {
                // theta_{y}: w -> eps(w)·y for y the c2-th basis vector at v
                let mut theta = Mat::zero(ytotal, w.dim, field);
                for col in 0..w.dim {
                    let mut wv = vec![field.zero(); w.dim];
                    wv[col] = field.one();
                    let e = w.eps.apply(&wv);
                    // e acts on y: only components e_{?}·path with src = v
                    for (p, ce) in e.iter().enumerate() {
                        if ce.is_zero() || alg.basis[p].src != v {
                            continue;
                        }
                        let act = y.act_path(&alg.basis[p].arrows.clone(), v);
                        let tv = alg.basis[p].tgt;
                        for r3 in 0..y.dims[tv] {
                            let val = &(ce * act.at(r3, c2)) + theta.at(yoff[tv] + r3, col);
                            theta.set(yoff[tv] + r3, col, val);
                        }
                    }
                }
                // coordinates of theta in the hom basis
                let flat = theta.flatten();
                let coords: Vec<Scalar> = yfree.iter().map(|&k| flat[k].clone()).collect();
                let graded = solve(&tgt_m, &m_proj[v].apply(&coords))
                    .expect("eta image lies in the graded piece");
                for (r2, val) in graded.into_iter().enumerate() {
                    out.set(r2, c2, val);
                }
            }
            out
        })
        .collect();

    // chain map phi_k: C1^k -> C2^k applies eta on each summand
    let phi: Vec<Mat> = (0..=res.length())
        .map(|k| {
            let term = &res.terms[k];
            let off1: Vec<usize> = term
                .iter()
                .scan(0, |acc, &a| {
                    let v = *acc;
                    *acc += y.dims[a];
                    Some(v)
                })
                .collect();
            let off2: Vec<usize> = term
                .iter()
                .scan(0, |acc, &a| {
                    let v = *acc;
                    *acc += m_dims[a];
                    Some(v)
                })
                .collect();
            let mut m = Mat::zero(dims2[k], dims1[k], field);
            for (s2, &a) in term.iter().enumerate() {
                for r2 in 0..m_dims[a] {
                    for c2 in 0..y.dims[a] {
                        m.set(off2[s2] + r2, off1[s2] + c2, eta[a].at(r2, c2).clone());
                    }
                }
            }
            m
        })
        .collect();

    // cohomology at degree n and the induced map rank
    let cohomology = |dims: &[usize], mats: &[Mat], k: usize| -> (usize, Vec<Vec<Scalar>>, Subspace) {
        let z: Vec<Vec<Scalar>> = if k < mats.len() {
            kernel_basis(&mats[k])
        } else {
            (0..dims[k])
                .map(|i| {
                    let mut e = vec![field.zero(); dims[k]];
                    e[i] = field.one();
                    e
                })
                .collect()
        };
        let b: Vec<Vec<Scalar>> = if k == 0 {
            Vec::new()
        } else {
            let rt = rref(&mats[k - 1].transpose());
            (0..rt.rank).map(|i| rt.reduced.row(i).to_vec()).collect()
        };
        let bsub = Subspace::from_spanning(&b, dims[k], field);
        let h = z.len() - {
            // rank of B inside Z equals dim B since B ⊆ Z
            bsub.dim()
        };
        (h, z, bsub)
    };
    let (h1, z1, _b1) = cohomology(&dims1, &mats1, n);
    let (h2, _z2, b2sub) = cohomology(&dims2, &mats2, n);
    // rank of the induced map: dim span(phi(Z1) ∪ B2) - dim B2
    let mut span = b2sub.basis_rows();
    let base = b2sub.dim();
    for z in &z1 {
        span.push(phi[n].apply(z));
    }
    let total_rank = Subspace::from_spanning(&span, dims2[n], field).dim();
    let map_rank = total_rank - base;
    Ok(ExtComparison { dim_ext_b: h1, dim_ext_r: h2, map_rank })
}

/// Dimension of R ⊗_B X computed as the tensor coequalizer, for the
/// cross-check against the hom-side induction.
pub fn induce_tensor_dim(bb: &BurtButler, x: &Representation) -> usize {
    let field = bb.bx.field;
    let alg = &bb.bx.algebra;
    let xtotal: usize = x.dims.iter().sum();
    let xoff: Vec<usize> = x
        .dims
        .iter()
        .scan(0, |acc, &d| {
            let v = *acc;
            *acc += d;
            Some(v)
        })
        .collect();
    let dim_amb = bb.right.dim * xtotal;
    let mut spans = Vec::new();
    for b in 0..alg.dim() {
        // r·emb(b) ⊗ x - r ⊗ b·x
        let embb = bb.emb.col(b);
        for r2 in 0..bb.right.dim {
            let mut er = bb.right.zero_vec();
            er[r2] = field.one();
            let rb = bb.right.mult_vec(&er, &embb);
            for xv in 0..xtotal {
                let mut vec = vec![field.zero(); dim_amb];
                for (k, c) in rb.iter().enumerate() {
                    if !c.is_zero() {
                        vec[k * xtotal + xv] = &vec[k * xtotal + xv] + c;
                    }
                }
                // b·x part
                let bp = &alg.basis[b];
                // locate vertex of xv
                let (v, local) = {
                    let mut v = 0;
                    while v + 1 < x.dims.len() && xoff[v + 1] <= xv {
                        v += 1;
                    }
                    (v, xv - xoff[v])
                };
                if bp.src == v {
                    let act = x.act_path(&bp.arrows, bp.src);
                    for r3 in 0..x.dims[bp.tgt] {
                        let idx = r2 * xtotal + xoff[bp.tgt] + r3;
                        vec[idx] = &vec[idx] - act.at(r3, local);
                    }
                }
                if vec.iter().any(|c| !c.is_zero()) {
                    spans.push(vec);
                }
            }
        }
    }
    let sub = Subspace::from_spanning(&spans, dim_amb, field);
    dim_amb - sub.dim()
}

/// Search for an explicit vertex-order-preserving algebra isomorphism from a
/// path algebra onto a basicified structure-constant algebra, attempted for
/// small dimensions.
pub fn algebra_isomorphism_search(
    alg: &crate::presentation::PathAlgebra,
    target: &Sca,
    idems: &[Vec<Scalar>],
) -> Result<Option<Vec<Vec<Scalar>>>> {
    if alg.dim() > 12 || alg.dim() != target.dim {
        return Ok(None);
    }
    if alg.n_vertices() != idems.len() {
        return Ok(None);
    }
    let field = alg.field;
    let rad = crate::sca::radical_sca(target)?;
    // radical slices e_j rad e_i
    let slice = |i: usize, j: usize| -> Vec<Vec<Scalar>> {
        let mut span = Vec::new();
        for v in rad.basis_rows() {
            let w = target.mult_vec(&target.mult_vec(&idems[j], &v), &idems[i]);
            if w.iter().any(|c| !c.is_zero()) {
                span.push(w);
            }
        }
        Subspace::from_spanning(&span, target.dim, field).basis_rows()
    };
    let arrow_slices: Vec<Vec<Vec<Scalar>>> = alg
        .quiver
        .arrows
        .iter()
        .map(|a| slice(a.src, a.tgt))
        .collect();
    // coefficient grid per arrow over its slice basis
    let grid: Vec<i64> = vec![1, -1, 2, -2, 3, -3];
    let mut assignments: Vec<Vec<Vec<Scalar>>> = vec![Vec::new()];
    for sl in &arrow_slices {
        if sl.is_empty() {
            return Ok(None);
        }
        let mut next = Vec::new();
        // candidate images: grid combinations over the slice basis, capped
        let mut cands: Vec<Vec<Scalar>> = Vec::new();
        let combos = grid.len().pow(sl.len() as u32).min(1296);
        for mask in 0..combos {
            let mut m = mask;
            let mut v = target.zero_vec();
            for b in sl {
                let c = field.from_i64(grid[m % grid.len()]);
                m /= grid.len();
                for (k, x) in b.iter().enumerate() {
                    v[k] = &v[k] + &(&c * x);
                }
            }
            cands.push(v);
        }
        for asg in &assignments {
            for c in &cands {
                let mut a2 = asg.clone();
                a2.push(c.clone());
                next.push(a2);
            }
        }
        next.truncate(30_000);
        assignments = next;
    }
    'outer: for asg in assignments {
        // images of all basis paths
        let mut images: Vec<Vec<Scalar>> = Vec::with_capacity(alg.dim());
        for k in 0..alg.dim() {
            let b = &alg.basis[k];
            if b.is_trivial() {
                images.push(idems[b.src].clone());
                continue;
            }
            let mut v = idems[b.src].clone();
            for &a in &b.arrows {
                v = target.mult_vec(&asg[a], &v);
            }
            images.push(v);
        }
        // relations must map to zero
        for r in &alg.relations {
            let mut acc = target.zero_vec();
            for (c, p) in &r.terms {
                let mut v = idems[r.src].clone();
                for &a in p {
                    v = target.mult_vec(&asg[a], &v);
                }
                for (k, x) in v.iter().enumerate() {
                    acc[k] = &acc[k] + &(c * x);
                }
            }
            if acc.iter().any(|c| !c.is_zero()) {
                continue 'outer;
            }
        }
        // bijectivity
        let m = Mat::from_rows(images.clone(), target.dim, field);
        if rref(&m).rank != target.dim {
            continue 'outer;
        }
        // multiplicativity on all basis pairs
        for i in 0..alg.dim() {
            for j in 0..alg.dim() {
                let prod = alg.mult_basis(i, j);
                let lhs = target.mult_vec(&images[i], &images[j]);
                let mut rhs = target.zero_vec();
                for (k, c) in prod.iter().enumerate() {
                    if !c.is_zero() {
                        for (t, x) in images[k].iter().enumerate() {
                            rhs[t] = &rhs[t] + &(c * x);
                        }
                    }
                }
                if lhs != rhs {
                    continue 'outer;
                }
            }
        }
        return Ok(Some(images));
    }
    Ok(None)
}

/// Extension of Delta_R(i) by Delta_R(j) classified by a box representation
/// witness: search small box representations X with induce(X) isomorphic to
/// the nonsplit extension; reports whether one was found.
pub fn witness_search_nonsplit(
    bb: &BurtButler,
    top: usize,
    bottom: usize,
) -> Result<Option<Vec<i64>>> {
    let bx = &bb.bx;
    let alg = &bx.algebra;
    let nv = bx.n_vertices();
    let field = bx.field;
    // candidate box representations: dims 1 at `top` and `bottom`
    let dims: Vec<usize> = (0..nv)
        .map(|v| usize::from(v == top || v == bottom))
        .collect();
    // the split candidate for comparison
    let build = |coeffs: &[i64]| -> Option<Representation> {
        let mut action = Vec::new();
        for (k, arr) in alg.quiver.arrows.iter().enumerate() {
            let m = Mat::from_fn(dims[arr.tgt], dims[arr.src], field, |_, _| {
                field.from_i64(coeffs[k])
            });
            action.push(m);
        }
        let rep = Representation {
            alg: std::sync::Arc::clone(alg),
            dims: dims.clone(),
            action,
        };
        rep.satisfies_relations().then_some(rep)
    };
    let na = alg.quiver.arrows.len();
    let zero_rep = build(&vec![0; na]).expect("zero module");
    let split = bb.induce(&zero_rep);
    // enumerate small coefficient vectors
    let grid: Vec<i64> = vec![0, 1, -1];
    let count = grid.len().pow(na as u32).min(2187);
    for mask in 0..count {
        let mut m = mask;
        let coeffs: Vec<i64> = (0..na)
            .map(|_| {
                let c = grid[m % grid.len()];
                m /= grid.len();
                c
            })
            .collect();
        if coeffs.iter().all(|&c| c == 0) {
            continue;
        }
        let Some(rep) = build(&coeffs) else { continue };
        let induced = bb.induce(&rep);
        if induced.dim != split.dim {
            continue;
        }
        if find_module_isomorphism(&bb.right, &induced, &split).is_none() {
            // nonsplit: certify the Delta layers by dimension vectors
            let dv = dim_vector(&bb.right, &bb.anchors, &induced);
            let mut expect = dim_vector(&bb.right, &bb.anchors, &bb.standard_r(top));
            let dvb = dim_vector(&bb.right, &bb.anchors, &bb.standard_r(bottom));
            for (a, b) in expect.iter_mut().zip(&dvb) {
                *a += *b;
            }
            if dv == expect {
                return Ok(Some(coeffs));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ainfinity::transfer;
    use crate::dsl::{parse_algebra, parse_box};
    use crate::fixtures;
    use crate::homotopy::{build_hom_complex, ext_spaces, make_contraction, minimal_resolution};
    use crate::modules::{simple, standard_module};
    use crate::presentation::build_path_algebra;
    use crate::scalar::FieldCfg;
    use std::sync::Arc;

    fn box_of(text: &str) -> BoxData {
        let src = parse_algebra(text).unwrap();
        let field = src.field.unwrap_or(FieldCfg::Q);
        let alg = Arc::new(
            build_path_algebra(field, src.quiver.clone(), src.relations.clone(), None).unwrap(),
        );
        let res: Vec<_> = (0..alg.n_vertices())
            .map(|i| {
                let d = standard_module(&alg, i);
                minimal_resolution(&alg, &d, alg.n_vertices() + 2).unwrap()
            })
            .collect();
        let complex = build_hom_complex(&alg, res);
        let ext = ext_spaces(&complex);
        let contraction = make_contraction(&complex, &ext).unwrap();
        let ainf = transfer(&complex, &ext, &contraction).unwrap();
        let dq = crate::boxify::dualize(&ainf).unwrap();
        crate::boxify::extract_box(&dq, &src.name, src.quiver.vertices.clone()).unwrap()
    }

    #[test]
    fn a1_right_algebra() {
        let bb = build_burt_butler(&box_of(fixtures::A1)).unwrap();
        assert_eq!(bb.dim_r(), 5);
        assert!(bb.right.is_associative());
        assert!(bb.right.is_unital());
    }

    #[test]
    fn a2_right_algebra_and_basic() {
        let spec = parse_box(fixtures::A2).unwrap();
        let bx = crate::boxify::box_from_spec(&spec, FieldCfg::Q).unwrap();
        let bb = build_burt_butler(&bx).unwrap();
        assert_eq!(bb.dim_r(), 5);
        let (basic, _) = bb.basicified_right().unwrap();
        assert_eq!(basic.basic.dim, 2);
        let mut mults = basic.multiplicities.clone();
        mults.sort();
        assert_eq!(mults, vec![1, 2]);
    }

    #[test]
    fn a3_and_a4_right_dims() {
        let bb3 = build_burt_butler(&box_of(fixtures::A3)).unwrap();
        assert_eq!(bb3.dim_r(), 14);
        let bb4 = build_burt_butler(&box_of(fixtures::A4)).unwrap();
        assert_eq!(bb4.dim_r(), 19);
    }

    #[test]
    fn left_algebra_of_trivial_box_is_b() {
        // box with no dashed generators over the A.1 Borel: W = B, L = B
        let text = "\
box triv
vertices 1 < 2
arrow a: 1 -> 2
";
        let spec = parse_box(text).unwrap();
        let bx = crate::boxify::box_from_spec(&spec, FieldCfg::Q).unwrap();
        let bb = build_burt_butler(&bx).unwrap();
        assert_eq!(bb.dim_l(), 3);
        assert!(bb.left.is_associative());
        assert!(bb.left.is_unital());
    }

    #[test]
    fn double_centralizer_on_goldens() {
        for text in [fixtures::A1, fixtures::A3] {
            let bb = build_burt_butler(&box_of(text)).unwrap();
            let (end_rop, end_l) = bb.double_centralizer_dims();
            assert_eq!(end_rop, bb.dim_l(), "End_Rop(W) vs dim L on {text}");
            assert_eq!(end_l, bb.dim_r(), "End_L(W) vs dim R on {text}");
        }
    }

    #[test]
    fn opposite_box_left_right_duality() {
        let bx = box_of(fixtures::A1);
        let bb = build_burt_butler(&bx).unwrap();
        let op = crate::boxify::opposite_box(&bx).unwrap();
        let bbop = build_burt_butler(&op).unwrap();
        assert_eq!(bb.dim_l(), bbop.dim_r());
        assert_eq!(bb.dim_r(), bbop.dim_l());
    }

    #[test]
    fn borel_embedding_on_goldens() {
        for (text, expect) in [(fixtures::A1, 3), (fixtures::A3, 8), (fixtures::A4, 7)] {
            let bb = build_burt_butler(&box_of(text)).unwrap();
            assert_eq!(bb.check_borel_embedding().unwrap(), expect);
        }
    }

    #[test]
    fn borel_image_fingerprint_matches_b() {
        let bb = build_burt_butler(&box_of(fixtures::A3)).unwrap();
        let img = bb.borel_image_fingerprint().unwrap();
        let bfp = crate::sca::fingerprint_of_path_algebra(&bb.bx.algebra).unwrap();
        assert_eq!(img, bfp);
    }

    #[test]
    fn induce_regular_is_r() {
        let bb = build_burt_butler(&box_of(fixtures::A1)).unwrap();
        let breg = regular_rep(&bb.bx);
        let induced = bb.induce(&breg);
        assert_eq!(induced.dim, bb.dim_r());
        assert!(induced.is_module(&bb.right));
    }

    #[test]
    fn induce_zero_is_zero() {
        let bb = build_burt_butler(&box_of(fixtures::A1)).unwrap();
        let zero = Representation::zero(Arc::clone(&bb.bx.algebra));
        assert_eq!(bb.induce(&zero).dim, 0);
    }

    #[test]
    fn induced_simples_are_standards() {
        for text in [fixtures::A1, fixtures::A3, fixtures::A4] {
            let bb = build_burt_butler(&box_of(text)).unwrap();
            for i in 0..bb.bx.n_vertices() {
                let li = simple(&bb.bx.algebra, i);
                let ind = bb.induce(&li);
                assert!(ind.is_module(&bb.right));
                let delta = bb.standard_r(i);
                assert_eq!(ind.dim, delta.dim, "dims at {i} on {text}");
                assert!(
                    find_module_isomorphism(&bb.right, &ind, &delta).is_some(),
                    "no isomorphism at {i} on {text}"
                );
            }
        }
    }

    #[test]
    fn verify_borel_on_goldens() {
        for text in [fixtures::A1, fixtures::A3, fixtures::A4] {
            let bb = build_burt_butler(&box_of(text)).unwrap();
            let report = verify_exact_borel(&bb, 0, 8).unwrap();
            assert!(report.all_pass(), "{text}: {:?}", report.detail);
            assert!(report.ses_checked > 0);
        }
    }

    #[test]
    fn fingerprints_r_equals_a_on_a1_and_a3() {
        for (text, dim_a, dim_r) in [(fixtures::A1, 5usize, 5usize), (fixtures::A3, 9, 14)] {
            let src = parse_algebra(text).unwrap();
            let alg = build_path_algebra(FieldCfg::Q, src.quiver, src.relations, None).unwrap();
            let fa = crate::sca::fingerprint_of_path_algebra(&alg).unwrap();
            let bb = build_burt_butler(&box_of(text)).unwrap();
            assert_eq!(alg.dim(), dim_a);
            assert_eq!(bb.dim_r(), dim_r);
            let (_, fr) = bb.basicified_right().unwrap();
            assert_eq!(fa, fr, "fingerprints differ on {text}");
        }
    }

    #[test]
    fn a1_explicit_isomorphism_r_to_a() {
        let src = parse_algebra(fixtures::A1).unwrap();
        let alg = build_path_algebra(FieldCfg::Q, src.quiver, src.relations, None).unwrap();
        let bb = build_burt_butler(&box_of(fixtures::A1)).unwrap();
        let (basic, _) = bb.basicified_right().unwrap();
        let iso = algebra_isomorphism_search(&alg, &basic.basic, &basic.idempotents).unwrap();
        assert!(iso.is_some(), "no explicit isomorphism found for A.1");
    }

    #[test]
    fn ext_comparison_on_a1() {
        let bb = build_burt_butler(&box_of(fixtures::A1)).unwrap();
        let alg = &bb.bx.algebra;
        let l1 = simple(alg, 0);
        let l2 = simple(alg, 1);
        let c = ext_comparison(&bb, &l1, &l2, 1).unwrap();
        // surjective in degree 1
        assert_eq!(c.map_rank, c.dim_ext_r);
        let c2 = ext_comparison(&bb, &l1, &l2, 2).unwrap();
        assert_eq!(c2.dim_ext_b, c2.dim_ext_r);
        assert_eq!(c2.map_rank, c2.dim_ext_b);
    }

    #[test]
    fn ext_comparison_projective_source() {
        let bb = build_burt_butler(&box_of(fixtures::A1)).unwrap();
        let alg = &bb.bx.algebra;
        let p1 = crate::modules::projective(alg, 0);
        let l2 = simple(alg, 1);
        let c = ext_comparison(&bb, &p1, &l2, 1).unwrap();
        assert_eq!(c.dim_ext_b, 0);
        assert_eq!(c.map_rank, 0);
    }

    #[test]
    fn induce_tensor_cross_check_a1() {
        let bb = build_burt_butler(&box_of(fixtures::A1)).unwrap();
        for i in 0..2 {
            let li = simple(&bb.bx.algebra, i);
            let hom_dim = bb.induce(&li).dim;
            let tensor_dim = induce_tensor_dim(&bb, &li);
            assert_eq!(hom_dim, tensor_dim, "at vertex {i}");
        }
        let breg = regular_rep(&bb.bx);
        assert_eq!(induce_tensor_dim(&bb, &breg), bb.dim_r());
    }

    #[test]
    fn hom_dim_equivalence_on_random_pairs() {
        let bb = build_burt_butler(&box_of(fixtures::A1)).unwrap();
        let mut rng = crate::rng::Rng::new(17);
        let mut checked = 0;
        for _ in 0..10 {
            let x = crate::boxrep::random_module(&bb.bx, &mut rng, 2);
            let y = crate::boxrep::random_module(&bb.bx, &mut rng, 2);
            if x.is_zero() || y.is_zero() {
                continue;
            }
            let box_dim = crate::boxrep::morphism_space(&bb.bx, &x, &y).len();
            let ix = bb.induce(&x);
            let iy = bb.induce(&y);
            let r_dim = hom_modules(&bb.right, &ix, &iy).len();
            assert_eq!(box_dim, r_dim);
            checked += 1;
        }
        assert!(checked >= 3);
    }

    #[test]
    fn quasi_hereditary_basic_r() {
        // the basicified right algebra is quasi-hereditary in the inherited
        // order: check via the Sca-side standard machinery
        let bb = build_burt_butler(&box_of(fixtures::A3)).unwrap();
        let (basic, _) = bb.basicified_right().unwrap();
        let a = &basic.basic;
        let n = basic.idempotents.len();
        for i in 0..n {
            let d = standard_sca(a, &basic.idempotents, i);
            let end = hom_modules(a, &d, &d).len();
            assert_eq!(end, 1, "End(Delta_{i}) over basic R");
        }
    }

    #[test]
    fn a4_witness_search_finds_nonsplit_extension() {
        let bb = build_burt_butler(&box_of(fixtures::A4)).unwrap();
        let w = witness_search_nonsplit(&bb, 0, 2).unwrap();
        assert!(w.is_some(), "witness module not reached");
    }
}
