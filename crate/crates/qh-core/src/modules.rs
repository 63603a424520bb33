//! Finite-dimensional representations of a path algebra: projectives,
//! simples, standard modules, Delta-filtrations and the quasi-hereditary
//! check.

use crate::error::{QhError, Result};
use crate::linalg::{complement_basis, kernel_basis, Mat, Subspace};
use crate::presentation::PathAlgebra;
use crate::scalar::Scalar;
use std::sync::Arc;

/// A module given by one vector space per vertex and one matrix per arrow.
/// The matrix for arrow a has shape dim(tgt) x dim(src).
#[derive(Clone, Debug)]
pub struct Representation {
    pub alg: Arc<PathAlgebra>,
    pub dims: Vec<usize>,
    pub action: Vec<Mat>,
}

impl Representation {
    pub fn zero(alg: Arc<PathAlgebra>) -> Representation {
        let nv = alg.n_vertices();
        let field = alg.field;
        let action = alg
            .quiver
            .arrows
            .iter()
            .map(|_| Mat::zero(0, 0, field))
            .collect();
        Representation { alg, dims: vec![0; nv], action }
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    /// Matrix of a path acting from its source vertex space.
    pub fn act_path(&self, arrows: &[usize], src: usize) -> Mat {
        let field = self.alg.field;
        let mut at = src;
        let mut m = Mat::identity(self.dims[src], field);
        for &a in arrows {
            let arr = &self.alg.quiver.arrows[a];
            assert_eq!(arr.src, at, "non-composable path in act_path");
            m = &self.action[a] * &m;
            at = arr.tgt;
        }
        m
    }

    /// Matrix of a (src,tgt)-homogeneous algebra element given by basis
    /// coefficients.
    pub fn act_elem(&self, coeffs: &[Scalar], src: usize, tgt: usize) -> Mat {
        let field = self.alg.field;
        let mut m = Mat::zero(self.dims[tgt], self.dims[src], field);
        for (k, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let b = &self.alg.basis[k];
            assert_eq!((b.src, b.tgt), (src, tgt), "inhomogeneous element in act_elem");
            m = &m + &self.act_path(&b.arrows, src).scale(c);
        }
        m
    }

    /// Check all defining relations of the algebra hold in this module.
    pub fn satisfies_relations(&self) -> bool {
        for r in &self.alg.relations {
            let mut m = Mat::zero(self.dims[r.tgt], self.dims[r.src], self.alg.field);
            for (c, p) in &r.terms {
                m = &m + &self.act_path(p, r.src).scale(c);
            }
            if !m.is_zero() {
                return false;
            }
        }
        true
    }
}

/// A morphism of representations: one matrix per vertex, commuting with all
/// arrow actions.
#[derive(Clone, Debug)]
pub struct ModuleMorphism {
    pub mats: Vec<Mat>,
}

impl ModuleMorphism {
    pub fn identity(x: &Representation) -> ModuleMorphism {
        ModuleMorphism {
            mats: x.dims.iter().map(|&d| Mat::identity(d, x.alg.field)).collect(),
        }
    }

    pub fn zero(x: &Representation, y: &Representation) -> ModuleMorphism {
        ModuleMorphism {
            mats: (0..x.dims.len())
                .map(|v| Mat::zero(y.dims[v], x.dims[v], x.alg.field))
                .collect(),
        }
    }

    pub fn compose(later: &ModuleMorphism, earlier: &ModuleMorphism) -> ModuleMorphism {
        ModuleMorphism {
            mats: later
                .mats
                .iter()
                .zip(&earlier.mats)
                .map(|(f, g)| f * g)
                .collect(),
        }
    }

    /// Check the commuting squares against concrete source and target.
    pub fn is_valid(&self, x: &Representation, y: &Representation) -> bool {
        x.alg.quiver.arrows.iter().enumerate().all(|(a, arr)| {
            let lhs = &self.mats[arr.tgt] * &x.action[a];
            let rhs = &y.action[a] * &self.mats[arr.src];
            lhs == rhs
        })
    }

    pub fn is_injective(&self) -> bool {
        self.mats.iter().all(|m| m.rank() == m.cols)
    }

    pub fn is_surjective(&self) -> bool {
        self.mats.iter().all(|m| m.rank() == m.rows)
    }
}

/// P(i): basis of the vertex-v space is the set of paths i -> v; arrows act
/// by left composition.
pub fn projective(alg: &Arc<PathAlgebra>, i: usize) -> Representation {
    let nv = alg.n_vertices();
    let field = alg.field;
    let vertex_basis: Vec<Vec<usize>> = (0..nv).map(|v| alg.paths_between(i, v)).collect();
    let dims: Vec<usize> = vertex_basis.iter().map(|b| b.len()).collect();
    let mut action = Vec::new();
    for (ai, arr) in alg.quiver.arrows.iter().enumerate() {
        let mut m = Mat::zero(dims[arr.tgt], dims[arr.src], field);
        for (col, &p) in vertex_basis[arr.src].iter().enumerate() {
            let mut unit = alg.zero_vec();
            unit[alg.basis_index(&[ai]).unwrap()] = field.one();
            let mut pv = alg.zero_vec();
            pv[p] = field.one();
            let prod = alg.mult_vec(&unit, &pv);
            for (row, &q) in vertex_basis[arr.tgt].iter().enumerate() {
                m.set(row, col, prod[q].clone());
            }
        }
        action.push(m);
    }
    Representation { alg: Arc::clone(alg), dims, action }
}

/// L(i): one-dimensional at vertex i, all arrows act by zero.
pub fn simple(alg: &Arc<PathAlgebra>, i: usize) -> Representation {
    let nv = alg.n_vertices();
    let field = alg.field;
    let dims: Vec<usize> = (0..nv).map(|v| usize::from(v == i)).collect();
    let action = alg
        .quiver
        .arrows
        .iter()
        .map(|a| Mat::zero(dims[a.tgt], dims[a.src], field))
        .collect();
    Representation { alg: Arc::clone(alg), dims, action }
}

/// Per-vertex spanning vectors of the radical (arrow ideal applied to X).
pub fn radical_spanning(x: &Representation) -> Vec<Vec<Vec<Scalar>>> {
    let nv = x.dims.len();
    let field = x.alg.field;
    let mut spans: Vec<Vec<Vec<Scalar>>> = vec![Vec::new(); nv];
    for (a, arr) in x.alg.quiver.arrows.iter().enumerate() {
        for col in 0..x.dims[arr.src] {
            let mut e = vec![field.zero(); x.dims[arr.src]];
            e[col] = field.one();
            let img = x.action[a].apply(&e);
            if img.iter().any(|c| !c.is_zero()) {
                spans[arr.tgt].push(img);
            }
        }
    }
    spans
}

/// A submodule presented by per-vertex subspaces (closed under the action).
#[derive(Clone, Debug)]
pub struct SubModule {
    pub spaces: Vec<Subspace>,
}

/// Close per-vertex spanning sets under the arrow action and return the
/// resulting submodule.
pub fn sub_module(x: &Representation, spans: Vec<Vec<Vec<Scalar>>>) -> SubModule {
    let nv = x.dims.len();
    let field = x.alg.field;
    let mut spans = spans;
    loop {
        let mut grew = false;
        let spaces: Vec<Subspace> = (0..nv)
            .map(|v| Subspace::from_spanning(&spans[v], x.dims[v], field))
            .collect();
        for (a, arr) in x.alg.quiver.arrows.iter().enumerate() {
            for b in spaces[arr.src].basis_rows() {
                let img = x.action[a].apply(&b);
                if img.iter().any(|c| !c.is_zero()) && !spaces[arr.tgt].contains(&img) {
                    spans[arr.tgt].push(img);
                    grew = true;
                }
            }
        }
        if !grew {
            return SubModule { spaces };
        }
    }
}

/// The submodule as a representation together with its inclusion.
pub fn sub_rep(x: &Representation, sub: &SubModule) -> (Representation, ModuleMorphism) {
    let nv = x.dims.len();
    let field = x.alg.field;
    let dims: Vec<usize> = (0..nv).map(|v| sub.spaces[v].dim()).collect();
    let bases: Vec<Vec<Vec<Scalar>>> = (0..nv).map(|v| sub.spaces[v].basis_rows()).collect();
    let mut action = Vec::new();
    for (a, arr) in x.alg.quiver.arrows.iter().enumerate() {
        let mut m = Mat::zero(dims[arr.tgt], dims[arr.src], field);
        for (col, b) in bases[arr.src].iter().enumerate() {
            let img = x.action[a].apply(b);
            // express img in the target basis
            let tb = &bases[arr.tgt];
            let tm = Mat::from_fn(x.dims[arr.tgt], tb.len(), field, |r, c| tb[c][r].clone());
            let coords = crate::linalg::solve(&tm, &img)
                .expect("submodule not closed under action");
            for (row, c) in coords.into_iter().enumerate() {
                m.set(row, col, c);
            }
        }
        action.push(m);
    }
    let incl = ModuleMorphism {
        mats: (0..nv)
            .map(|v| {
                Mat::from_fn(x.dims[v], dims[v], field, |r, c| bases[v][c][r].clone())
            })
            .collect(),
    };
    (Representation { alg: Arc::clone(&x.alg), dims, action }, incl)
}

/// Quotient by a submodule, with the projection. The quotient basis is the
/// greedy unit-vector complement of each subspace.
pub fn quotient_rep(
    x: &Representation,
    sub: &SubModule,
) -> (Representation, ModuleMorphism) {
    let (rep, proj, _) = quotient_rep_with_lifts(x, sub);
    (rep, proj)
}

/// Like [`quotient_rep`], additionally returning per-vertex linear sections
/// of the projection (not module morphisms).
pub fn quotient_rep_with_lifts(
    x: &Representation,
    sub: &SubModule,
) -> (Representation, ModuleMorphism, Vec<Mat>) {
    let nv = x.dims.len();
    let field = x.alg.field;
    let mut projs = Vec::new();
    let mut lifts = Vec::new();
    for v in 0..nv {
        let s = &sub.spaces[v];
        let comp = complement_basis(&s.basis_rows(), x.dims[v], field, false)
            .expect("complement never fails without independence demand");
        let q = comp.len();
        // columns: complement vectors then subspace basis; invert to project
        let mut cols: Vec<Vec<Scalar>> = comp.clone();
        cols.extend(s.basis_rows());
        let m = Mat::from_fn(x.dims[v], x.dims[v], field, |r, c| cols[c][r].clone());
        let minv = m.inverse().expect("complement plus basis is a basis");
        let proj = Mat::from_fn(q, x.dims[v], field, |r, c| minv.at(r, c).clone());
        let lift = Mat::from_fn(x.dims[v], q, field, |r, c| comp[c][r].clone());
        projs.push(proj);
        lifts.push(lift);
    }
    let dims: Vec<usize> = projs.iter().map(|p| p.rows).collect();
    let mut action = Vec::new();
    for (a, arr) in x.alg.quiver.arrows.iter().enumerate() {
        let m = &(&projs[arr.tgt] * &x.action[a]) * &lifts[arr.src];
        action.push(m);
    }
    (
        Representation { alg: Arc::clone(&x.alg), dims, action },
        ModuleMorphism { mats: projs },
        lifts,
    )
}

/// radical(X) as a submodule.
pub fn radical(x: &Representation) -> SubModule {
    sub_module(x, radical_spanning(x))
}

/// top(X) = X / rad X with its projection.
pub fn top(x: &Representation) -> (Representation, ModuleMorphism) {
    quotient_rep(x, &radical(x))
}

/// Standard module Delta(i) = P(i) / (trace of all P(j), j > i), returned
/// with the projection from P(i) and the kernel submodule.
pub fn standard_with_kernel(
    alg: &Arc<PathAlgebra>,
    i: usize,
) -> (Representation, ModuleMorphism, SubModule) {
    let p = projective(alg, i);
    let nv = alg.n_vertices();
    let _field = alg.field;
    // trace of P(j), j > i: spanned by normal forms q*p with p: i -> j,
    // q: j -> v, expressed in the path basis of P(i)
    let mut spans: Vec<Vec<Vec<Scalar>>> = vec![Vec::new(); nv];
    for j in (i + 1)..nv {
        for p_idx in alg.paths_between(i, j) {
            for v in 0..nv {
                for q_idx in alg.paths_between(j, v) {
                    let prod = alg.mult_basis(q_idx, p_idx).to_vec();
                    let vb = alg.paths_between(i, v);
                    let vec: Vec<Scalar> = vb.iter().map(|&k| prod[k].clone()).collect();
                    if vec.iter().any(|c| !c.is_zero()) {
                        spans[v].push(vec);
                    }
                }
            }
        }
    }
    let sub = sub_module(&p, spans);
    let (delta, proj) = quotient_rep(&p, &sub);
    (delta, proj, sub)
}

pub fn standard_module(alg: &Arc<PathAlgebra>, i: usize) -> Representation {
    standard_with_kernel(alg, i).0
}

/// Basis of Hom(X, Y) as the kernel of the intertwining linear system.
/// Unknowns are ordered by vertex, then row-major inside each matrix.
pub fn hom_space(x: &Representation, y: &Representation) -> Vec<ModuleMorphism> {
    let nv = x.dims.len();
    let field = x.alg.field;
    let offsets: Vec<usize> = {
        let mut o = vec![0];
        for v in 0..nv {
            o.push(o[v] + y.dims[v] * x.dims[v]);
        }
        o
    };
    let total = offsets[nv];
    let mut rows: Vec<Vec<Scalar>> = Vec::new();
    for (a, arr) in x.alg.quiver.arrows.iter().enumerate() {
        let (s, t) = (arr.src, arr.tgt);
        // f_t X(a) - Y(a) f_s = 0, one equation per (r, c)
        for r in 0..y.dims[t] {
            for c in 0..x.dims[s] {
                let mut row = vec![field.zero(); total];
                // f_t[r, k] X(a)[k, c]
                for k in 0..x.dims[t] {
                    let idx = offsets[t] + r * x.dims[t] + k;
                    row[idx] = &row[idx] + x.action[a].at(k, c);
                }
                // - Y(a)[r, k] f_s[k, c]
                for k in 0..y.dims[s] {
                    let idx = offsets[s] + k * x.dims[s] + c;
                    row[idx] = &row[idx] - y.action[a].at(r, k);
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
    kernel_basis(&m)
        .into_iter()
        .map(|sol| ModuleMorphism {
            mats: (0..nv)
                .map(|v| {
                    Mat::from_fn(y.dims[v], x.dims[v], field, |r, c| {
                        sol[offsets[v] + r * x.dims[v] + c].clone()
                    })
                })
                .collect(),
        })
        .collect()
}

/// Kernel of a morphism as a submodule of its source.
pub fn kernel_submodule(f: &ModuleMorphism, x: &Representation) -> SubModule {
    let spans: Vec<Vec<Vec<Scalar>>> = f.mats.iter().map(|m| kernel_basis(m)).collect();
    sub_module(x, spans)
}

/// Greedy top-down Delta-filtration: find an epimorphism onto Delta(j) for
/// the largest feasible j, peel, recurse on the kernel. Only indices in
/// `allowed` may be used. Returns layer indices from top to bottom, or None
/// when the peel gets stuck.
pub fn delta_filtration(
    x: &Representation,
    deltas: &[Representation],
    allowed: &[usize],
) -> Option<Vec<usize>> {
    let mut layers = Vec::new();
    let mut current = x.clone();
    'peel: loop {
        if current.is_zero() {
            return Some(layers);
        }
        for &j in allowed.iter().rev() {
            let delta = &deltas[j];
            if delta.total_dim() > current.total_dim() {
                continue;
            }
            let homs = hom_space(&current, delta);
            if homs.is_empty() {
                continue;
            }
            // f is epi iff top(f) is nonzero on the top of Delta(j), which
            // is one-dimensional at vertex j: a linear condition on f.
            let (_, dproj) = top(delta);
            if dproj.mats[j].rows != 1 {
                // top of Delta(j) at j is not simple: cannot peel with it
                continue;
            }
            let (_, xproj) = top(&current);
            for f in &homs {
                // class of f composed into tops, at vertex j
                let m = &dproj.mats[j] * &f.mats[j];
                // factor through top(X): nonzero on X(j) is enough since
                // rad X maps into rad Delta
                let _ = &xproj;
                if !m.is_zero() {
                    let ker = kernel_submodule(f, &current);
                    let (next, _) = sub_rep(&current, &ker);
                    layers.push(j);
                    current = next;
                    continue 'peel;
                }
            }
        }
        return None;
    }
}

/// Certificate for one vertex of the quasi-hereditary check.
#[derive(Clone, Debug)]
pub struct QhCertificate {
    pub vertex: usize,
    pub end_dim: usize,
    pub kernel_layers: Option<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct QhReport {
    pub ok: bool,
    pub certificates: Vec<QhCertificate>,
    pub deltas: Vec<Representation>,
}

/// End(Delta(i)) one-dimensional and ker(P(i) -> Delta(i)) filtered by
/// Delta(j), j > i.
pub fn is_quasi_hereditary(alg: &Arc<PathAlgebra>) -> QhReport {
    let nv = alg.n_vertices();
    let mut deltas = Vec::new();
    let mut kernels = Vec::new();
    for i in 0..nv {
        let (d, _, k) = standard_with_kernel(alg, i);
        let p = projective(alg, i);
        let (krep, _) = sub_rep(&p, &k);
        deltas.push(d);
        kernels.push(krep);
    }
    let mut ok = true;
    let mut certificates = Vec::new();
    for i in 0..nv {
        let end_dim = hom_space(&deltas[i], &deltas[i]).len();
        let allowed: Vec<usize> = ((i + 1)..nv).collect();
        let layers = delta_filtration(&kernels[i], &deltas, &allowed);
        if end_dim != 1 || layers.is_none() {
            ok = false;
        }
        certificates.push(QhCertificate { vertex: i, end_dim, kernel_layers: layers });
    }
    QhReport { ok, certificates, deltas }
}

/// Search for an explicit isomorphism between two representations: try hom
/// basis elements, then small deterministic combinations.
pub fn find_isomorphism(
    x: &Representation,
    y: &Representation,
) -> Option<ModuleMorphism> {
    if x.dims != y.dims {
        return None;
    }
    let homs = hom_space(x, y);
    let field = x.alg.field;
    let invertible = |f: &ModuleMorphism| f.mats.iter().all(|m| m.inverse().is_some());
    for f in &homs {
        if invertible(f) {
            return Some(f.clone());
        }
    }
    // deterministic small combinations
    let mut rng = crate::rng::Rng::new(0x9e3779b9);
    for _ in 0..64 {
        let mut mats: Vec<Mat> = (0..x.dims.len())
            .map(|v| Mat::zero(y.dims[v], x.dims[v], field))
            .collect();
        for f in &homs {
            let c = field.from_i64(rng.small_int(3));
            for (v, m) in f.mats.iter().enumerate() {
                mats[v] = &mats[v] + &m.scale(&c);
            }
        }
        let cand = ModuleMorphism { mats };
        if invertible(&cand) {
            return Some(cand);
        }
    }
    None
}

/// Build an explicit extension 0 -> Z -> E -> X -> 0 from a cocycle given as
/// a map P1 -> Z, where P1 -> P0 -> X is the start of a projective
/// resolution of X. Returns E.
pub fn extension_from_cocycle(
    z: &Representation,
    p0: &Representation,
    d1_into_p0: &ModuleMorphism,
    p1: &Representation,
    proj_to_x: &ModuleMorphism,
    theta: &ModuleMorphism,
) -> Result<Representation> {
    // E = (Z ⊕ P0) / {(theta(u), -d1(u)) : u in P1}
    let nv = z.dims.len();
    let field = z.alg.field;
    let dims_sum: Vec<usize> = (0..nv).map(|v| z.dims[v] + p0.dims[v]).collect();
    let mut big_action = Vec::new();
    for (a, arr) in z.alg.quiver.arrows.iter().enumerate() {
        let mut m = Mat::zero(dims_sum[arr.tgt], dims_sum[arr.src], field);
        for r in 0..z.dims[arr.tgt] {
            for c in 0..z.dims[arr.src] {
                m.set(r, c, z.action[a].at(r, c).clone());
            }
        }
        for r in 0..p0.dims[arr.tgt] {
            for c in 0..p0.dims[arr.src] {
                m.set(z.dims[arr.tgt] + r, z.dims[arr.src] + c, p0.action[a].at(r, c).clone());
            }
        }
        big_action.push(m);
    }
    let big = Representation { alg: Arc::clone(&z.alg), dims: dims_sum.clone(), action: big_action };
    let mut spans: Vec<Vec<Vec<Scalar>>> = vec![Vec::new(); nv];
    for v in 0..nv {
        for c in 0..p1.dims[v] {
            let mut e = vec![field.zero(); p1.dims[v]];
            e[c] = field.one();
            let zt = theta.mats[v].apply(&e);
            let pd = d1_into_p0.mats[v].apply(&e);
            let mut vec = vec![field.zero(); dims_sum[v]];
            for (r, val) in zt.into_iter().enumerate() {
                vec[r] = val;
            }
            for (r, val) in pd.into_iter().enumerate() {
                vec[z.dims[v] + r] = -&val;
            }
            if vec.iter().any(|c| !c.is_zero()) {
                spans[v].push(vec);
            }
        }
    }
    let sub = sub_module(&big, spans);
    let (e, _) = quotient_rep(&big, &sub);
    let expected: usize = z.total_dim() + proj_to_x.mats.iter().map(|m| m.rows).sum::<usize>();
    if e.total_dim() != expected {
        return Err(QhError::Internal(format!(
            "extension has dimension {} instead of {}",
            e.total_dim(),
            expected
        )));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_algebra;
    use crate::fixtures;
    use crate::presentation::build_path_algebra;

    fn load(text: &str) -> Arc<PathAlgebra> {
        let src = parse_algebra(text).unwrap();
        Arc::new(
            build_path_algebra(src.field.unwrap_or(crate::scalar::FieldCfg::Q), src.quiver, src.relations, None)
                .unwrap(),
        )
    }

    #[test]
    fn a1_projectives() {
        let alg = load(fixtures::A1);
        let p1 = projective(&alg, 0);
        let p2 = projective(&alg, 1);
        assert_eq!(p1.dims, vec![2, 1]);
        assert_eq!(p2.dims, vec![1, 1]);
        assert!(p1.satisfies_relations());
        assert!(p2.satisfies_relations());
    }

    #[test]
    fn semisimple_projectives_are_simple() {
        let alg = load("algebra s\nvertices 1 < 2\n");
        for i in 0..2 {
            let p = projective(&alg, i);
            let l = simple(&alg, i);
            assert_eq!(p.dims, l.dims);
        }
    }

    #[test]
    fn top_of_projective_is_simple() {
        let alg = load(fixtures::A1);
        for i in 0..2 {
            let p = projective(&alg, i);
            let (t, _) = top(&p);
            assert_eq!(t.dims, simple(&alg, i).dims);
        }
    }

    #[test]
    fn radical_of_simple_is_zero() {
        let alg = load(fixtures::A1);
        let l = simple(&alg, 0);
        let r = radical(&l);
        assert!(r.spaces.iter().all(|s| s.dim() == 0));
    }

    #[test]
    fn a1_radical_of_p1() {
        let alg = load(fixtures::A1);
        let p1 = projective(&alg, 0);
        let (r, _) = sub_rep(&p1, &radical(&p1));
        assert_eq!(r.dims, vec![1, 1]);
    }

    #[test]
    fn a1_standard_modules() {
        let alg = load(fixtures::A1);
        let d1 = standard_module(&alg, 0);
        let d2 = standard_module(&alg, 1);
        assert_eq!(d1.dims, vec![1, 0]);
        assert_eq!(d2.dims, vec![1, 1]);
    }

    #[test]
    fn a3_standard_modules() {
        let alg = load(fixtures::A3);
        assert_eq!(alg.dim(), 9);
        let dims: Vec<Vec<usize>> = (0..4).map(|i| standard_module(&alg, i).dims).collect();
        assert_eq!(dims[0], vec![1, 0, 0, 0]);
        assert_eq!(dims[1], vec![0, 1, 0, 0]);
        assert_eq!(dims[2], vec![0, 0, 1, 0]); // Delta(3) = L(3) = P(3)
        assert_eq!(dims[3], vec![0, 0, 1, 1]); // Delta(4) = P(4)
    }

    #[test]
    fn a4_dimensions() {
        let alg = load(fixtures::A4);
        assert_eq!(alg.dim(), 12);
        let p: Vec<usize> = (0..3).map(|i| projective(&alg, i).total_dim()).collect();
        assert_eq!(p, vec![5, 4, 3]);
        let d3 = standard_module(&alg, 2);
        assert_eq!(d3.total_dim(), 3); // Delta(3) = P(3)
    }

    #[test]
    fn largest_vertex_standard_is_projective() {
        let alg = load(fixtures::A3);
        let d = standard_module(&alg, 3);
        let p = projective(&alg, 3);
        assert_eq!(d.dims, p.dims);
    }

    #[test]
    fn a1_hom_spaces() {
        let alg = load(fixtures::A1);
        let d1 = standard_module(&alg, 0);
        let d2 = standard_module(&alg, 1);
        assert_eq!(hom_space(&d1, &d1).len(), 1);
        assert_eq!(hom_space(&d2, &d2).len(), 1);
        assert_eq!(hom_space(&d1, &d2).len(), 1); // the inclusion
        assert_eq!(hom_space(&d2, &d1).len(), 0);
        let l1 = simple(&alg, 0);
        let l2 = simple(&alg, 1);
        assert_eq!(hom_space(&l1, &l2).len(), 0);
    }

    #[test]
    fn hom_morphisms_commute() {
        let alg = load(fixtures::A1);
        let p1 = projective(&alg, 0);
        let d2 = standard_module(&alg, 1);
        for f in hom_space(&p1, &d2) {
            assert!(f.is_valid(&p1, &d2));
        }
    }

    #[test]
    fn a1_is_quasi_hereditary() {
        let alg = load(fixtures::A1);
        let report = is_quasi_hereditary(&alg);
        assert!(report.ok);
        // kernel of P(1) ->> Delta(1) is Delta(2)
        assert_eq!(report.certificates[0].kernel_layers, Some(vec![1]));
        assert_eq!(report.certificates[1].kernel_layers, Some(vec![]));
    }

    #[test]
    fn local_algebra_not_quasi_hereditary() {
        let alg = load(fixtures::LOCAL);
        let report = is_quasi_hereditary(&alg);
        assert!(!report.ok);
    }

    #[test]
    fn semisimple_is_quasi_hereditary() {
        let alg = load("algebra s\nvertices 1 < 2 < 3\n");
        assert!(is_quasi_hereditary(&alg).ok);
    }

    #[test]
    fn a3_and_a4_quasi_hereditary() {
        for text in [fixtures::A3, fixtures::A4] {
            let alg = load(text);
            assert!(is_quasi_hereditary(&alg).ok);
        }
    }

    #[test]
    fn delta_filtration_of_p1() {
        let alg = load(fixtures::A1);
        let deltas: Vec<_> = (0..2).map(|i| standard_module(&alg, i)).collect();
        let p1 = projective(&alg, 0);
        let layers = delta_filtration(&p1, &deltas, &[0, 1]).unwrap();
        assert_eq!(layers, vec![0, 1]); // top layer Delta(1)
    }

    #[test]
    fn delta_filtration_of_delta_is_single_layer() {
        let alg = load(fixtures::A3);
        let deltas: Vec<_> = (0..4).map(|i| standard_module(&alg, i)).collect();
        for i in 0..4 {
            let layers = delta_filtration(&deltas[i], &deltas, &[0, 1, 2, 3]).unwrap();
            assert_eq!(layers, vec![i]);
        }
    }

    #[test]
    fn simple_two_not_filtered() {
        let alg = load(fixtures::A1);
        let deltas: Vec<_> = (0..2).map(|i| standard_module(&alg, i)).collect();
        let l2 = simple(&alg, 1);
        assert_eq!(delta_filtration(&l2, &deltas, &[0, 1]), None);
    }

    #[test]
    fn filtration_dimension_count() {
        let alg = load(fixtures::A3);
        let deltas: Vec<_> = (0..4).map(|i| standard_module(&alg, i)).collect();
        for i in 0..4 {
            let p = projective(&alg, i);
            let layers = delta_filtration(&p, &deltas, &[0, 1, 2, 3]).unwrap();
            let total: usize = layers.iter().map(|&j| deltas[j].total_dim()).sum();
            assert_eq!(total, p.total_dim());
        }
    }

    #[test]
    fn hom_directedness_on_goldens() {
        for text in [fixtures::A1, fixtures::A3, fixtures::A4] {
            let alg = load(text);
            let nv = alg.n_vertices();
            let deltas: Vec<_> = (0..nv).map(|i| standard_module(&alg, i)).collect();
            for i in 0..nv {
                for j in 0..nv {
                    let h = hom_space(&deltas[i], &deltas[j]).len();
                    if h > 0 {
                        assert!(i <= j, "Hom(Delta{i},Delta{j}) nonzero");
                    }
                }
            }
        }
    }
}
