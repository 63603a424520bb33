//! Minimal projective resolutions, the dg category of graded maps between
//! them, Ext spaces with chosen cocycle representatives, and deterministic
//! contractions.

use crate::error::{QhError, Result};
use crate::linalg::{kernel_basis, rref, Mat, Subspace};
use crate::modules::{
    kernel_submodule, quotient_rep_with_lifts, radical, sub_rep, ModuleMorphism, Representation,
};
use crate::presentation::PathAlgebra;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A-module map between direct sums of indecomposable projectives, stored as
/// a matrix of path-algebra elements. The (s, t) entry lives in
/// e_{src[s]} A e_{tgt[t]} and acts by right multiplication.
#[derive(Clone, Debug, PartialEq)]
pub struct AMat {
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    /// entries[s][t]: coefficient vector over the algebra basis
    pub entries: Vec<Vec<Vec<Scalar>>>,
}

impl AMat {
    pub fn zero(alg: &PathAlgebra, src: Vec<usize>, tgt: Vec<usize>) -> AMat {
        let entries = src
            .iter()
            .map(|_| tgt.iter().map(|_| alg.zero_vec()).collect())
            .collect();
        AMat { src, tgt, entries }
    }

    pub fn identity(alg: &PathAlgebra, verts: Vec<usize>) -> AMat {
        let mut m = AMat::zero(alg, verts.clone(), verts.clone());
        for (s, &v) in verts.iter().enumerate() {
            m.entries[s][s][alg.trivial(v)] = alg.field.one();
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.entries
            .iter()
            .all(|row| row.iter().all(|e| e.iter().all(|c| c.is_zero())))
    }

    pub fn add(&self, other: &AMat) -> AMat {
        let mut out = self.clone();
        for s in 0..self.src.len() {
            for t in 0..self.tgt.len() {
                for k in 0..out.entries[s][t].len() {
                    out.entries[s][t][k] = &out.entries[s][t][k] + &other.entries[s][t][k];
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> AMat {
        let mut out = self.clone();
        for row in &mut out.entries {
            for e in row {
                for x in e {
                    *x = &*x * c;
                }
            }
        }
        out
    }

    /// Composite "later after earlier": earlier: X -> Y, later: Y -> Z.
    pub fn compose(alg: &PathAlgebra, later: &AMat, earlier: &AMat) -> AMat {
        assert_eq!(earlier.tgt, later.src, "AMat compose summand mismatch");
        let mut out = AMat::zero(alg, earlier.src.clone(), later.tgt.clone());
        for s in 0..earlier.src.len() {
            for u in 0..later.tgt.len() {
                let mut acc = alg.zero_vec();
                for t in 0..earlier.tgt.len() {
                    let a = &earlier.entries[s][t];
                    let b = &later.entries[t][u];
                    if a.iter().all(|c| c.is_zero()) || b.iter().all(|c| c.is_zero()) {
                        continue;
                    }
                    // right multiplication composes by multiplying entries
                    // source-to-target: entry = a * b in the algebra
                    let prod = alg.mult_vec(a, b);
                    for k in 0..acc.len() {
                        acc[k] = &acc[k] + &prod[k];
                    }
                }
                out.entries[s][u] = acc;
            }
        }
        out
    }

    /// Every entry lies in the arrow ideal (no trivial-path component).
    pub fn entries_in_radical(&self, alg: &PathAlgebra) -> bool {
        self.entries.iter().all(|row| {
            row.iter()
                .all(|e| (0..alg.n_vertices()).all(|v| e[alg.trivial(v)].is_zero()))
        })
    }
}

/// The representation carried by a direct sum of projectives, with offsets
/// locating each summand's paths inside each vertex space.
#[derive(Clone, Debug)]
pub struct ProjSum {
    pub verts: Vec<usize>,
    pub rep: Representation,
    /// offsets[v][s] = starting offset of summand s inside the vertex-v space
    pub offsets: Vec<Vec<usize>>,
    /// paths_between(verts[s], v) cached per (v, s)
    pub paths: Vec<Vec<Vec<usize>>>,
}

pub fn proj_sum(alg: &Arc<PathAlgebra>, verts: Vec<usize>) -> ProjSum {
    let nv = alg.n_vertices();
    let field = alg.field;
    let paths: Vec<Vec<Vec<usize>>> = (0..nv)
        .map(|v| verts.iter().map(|&a| alg.paths_between(a, v)).collect())
        .collect();
    let mut offsets = vec![Vec::new(); nv];
    let mut dims = vec![0usize; nv];
    for v in 0..nv {
        for s in 0..verts.len() {
            offsets[v].push(dims[v]);
            dims[v] += paths[v][s].len();
        }
    }
    let mut action = Vec::new();
    for (ai, arr) in alg.quiver.arrows.iter().enumerate() {
        let mut m = Mat::zero(dims[arr.tgt], dims[arr.src], field);
        for s in 0..verts.len() {
            for (ci, &p) in paths[arr.src][s].iter().enumerate() {
                let mut unit = alg.zero_vec();
                unit[alg.basis_index(&[ai]).unwrap()] = field.one();
                let mut pv = alg.zero_vec();
                pv[p] = field.one();
                let prod = alg.mult_vec(&unit, &pv);
                for (ri, &q) in paths[arr.tgt][s].iter().enumerate() {
                    m.set(offsets[arr.tgt][s] + ri, offsets[arr.src][s] + ci, prod[q].clone());
                }
            }
        }
        action.push(m);
    }
    ProjSum {
        verts,
        rep: Representation { alg: Arc::clone(alg), dims, action },
        offsets,
        paths,
    }
}

/// Concrete per-vertex matrices of an AMat between two projective sums.
pub fn amat_to_morphism(alg: &PathAlgebra, m: &AMat, src: &ProjSum, tgt: &ProjSum) -> ModuleMorphism {
    let nv = alg.n_vertices();
    let field = alg.field;
    let mut mats = Vec::new();
    for v in 0..nv {
        let mut out = Mat::zero(tgt.rep.dims[v], src.rep.dims[v], field);
        for s in 0..src.verts.len() {
            for (ci, &p) in src.paths[v][s].iter().enumerate() {
                // image of basis path p under right multiplication by entries
                let mut pv = alg.zero_vec();
                pv[p] = field.one();
                for t in 0..tgt.verts.len() {
                    let u = &m.entries[s][t];
                    if u.iter().all(|c| c.is_zero()) {
                        continue;
                    }
                    let img = alg.mult_vec(&pv, u);
                    for (ri, &q) in tgt.paths[v][t].iter().enumerate() {
                        let val = &img[q] + out.at(tgt.offsets[v][t] + ri, src.offsets[v][s] + ci);
                        out.set(tgt.offsets[v][t] + ri, src.offsets[v][s] + ci, val);
                    }
                }
            }
        }
        mats.push(out);
    }
    ModuleMorphism { mats }
}

/// Minimal projective resolution ... -> P_1 -> P_0 -> M -> 0.
#[derive(Clone, Debug)]
pub struct ProjResolution {
    pub module: Representation,
    /// projective summand vertices per homological degree
    pub terms: Vec<Vec<usize>>,
    pub sums: Vec<ProjSum>,
    /// diffs[k]: P_{k+1} -> P_k (so diffs.len() = terms.len() - 1)
    pub diffs: Vec<AMat>,
    /// the cover P_0 ->> M
    pub cover: ModuleMorphism,
}

impl ProjResolution {
    pub fn length(&self) -> usize {
        self.terms.len() - 1
    }
}

/// Iterated projective covers until the kernel vanishes.
pub fn minimal_resolution(
    alg: &Arc<PathAlgebra>,
    module: &Representation,
    max_len: usize,
) -> Result<ProjResolution> {
    let nv = alg.n_vertices();
    let field = alg.field;

    // cover data of a module given inside an ambient projective sum:
    // summand vertices plus generator images (per-vertex coordinate vectors)
    let cover_of = |m: &Representation| -> (Vec<usize>, Vec<(usize, Vec<Scalar>)>) {
        let (_, proj, lifts) = quotient_rep_with_lifts(m, &radical(m));
        let mut verts = Vec::new();
        let mut gens = Vec::new();
        for v in 0..nv {
            for g in 0..proj.mats[v].rows {
                let lift = lifts[v].col(g);
                verts.push(v);
                gens.push((v, lift));
            }
        }
        (verts, gens)
    };

    let (verts0, gens0) = cover_of(module);
    let sum0 = proj_sum(alg, verts0.clone());
    // cover morphism P_0 -> M on path basis elements
    let cover = {
        let mut mats = Vec::new();
        for v in 0..nv {
            let mut m = Mat::zero(module.dims[v], sum0.rep.dims[v], field);
            for (s, (gv, gvec)) in gens0.iter().enumerate() {
                for (ci, &p) in sum0.paths[v][s].iter().enumerate() {
                    let img = module
                        .act_path(&alg.basis[p].arrows, *gv)
                        .apply(gvec);
                    for (r, val) in img.into_iter().enumerate() {
                        m.set(r, sum0.offsets[v][s] + ci, val);
                    }
                }
            }
            mats.push(m);
        }
        ModuleMorphism { mats }
    };

    let mut terms = vec![verts0];
    let mut sums = vec![sum0];
    let mut diffs: Vec<AMat> = Vec::new();

    // current kernel, as a submodule of the latest projective sum
    let mut current: Option<(Representation, ModuleMorphism)> = {
        let ker = kernel_submodule(&cover, &sums[0].rep);
        let (krep, incl) = sub_rep(&sums[0].rep, &ker);
        if krep.is_zero() {
            None
        } else {
            Some((krep, incl))
        }
    };

    while let Some((krep, incl)) = current {
        if terms.len() > max_len {
            return Err(QhError::ResolutionTooLong(max_len));
        }
        let (verts, gens) = cover_of(&krep);
        let sum = proj_sum(alg, verts.clone());
        let prev = sums.last().unwrap();
        // differential: generator of summand s (at vertex gv) maps to
        // incl(lift) inside the previous projective sum; decompose into
        // path coordinates per previous summand
        let mut d = AMat::zero(alg, verts.clone(), prev.verts.clone());
        for (s, (gv, gvec)) in gens.iter().enumerate() {
            let ambient = incl.mats[*gv].apply(gvec);
            for t in 0..prev.verts.len() {
                let mut elem = alg.zero_vec();
                for (pi, &p) in prev.paths[*gv][t].iter().enumerate() {
                    elem[p] = ambient[prev.offsets[*gv][t] + pi].clone();
                }
                d.entries[s][t] = elem;
            }
        }
        if !d.entries_in_radical(alg) {
            return Err(QhError::Internal("resolution differential not minimal".into()));
        }
        if let Some(prev_d) = diffs.last() {
            if !AMat::compose(alg, prev_d, &d).is_zero() {
                return Err(QhError::Internal("resolution differential does not square to zero".into()));
            }
        }
        let dmor = amat_to_morphism(alg, &d, &sum, prev);
        let ker = kernel_submodule(&dmor, &sum.rep);
        let (krep2, incl2) = sub_rep(&sum.rep, &ker);
        terms.push(verts);
        sums.push(sum);
        diffs.push(d);
        current = if krep2.is_zero() { None } else { Some((krep2, incl2)) };
    }

    Ok(ProjResolution { module: module.clone(), terms, sums, diffs, cover })
}

/// One basis element of the graded hom space between two resolutions:
/// the map P_k(i) -> P_{k-r}(j) sending summand s to summand t through a
/// single basis path.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HomBasisElem {
    pub k: usize,
    pub s: usize,
    pub t: usize,
    pub path: usize,
}

#[derive(Clone, Debug)]
pub struct HomSpace {
    pub basis: Vec<HomBasisElem>,
    pub index: BTreeMap<HomBasisElem, usize>,
    /// matrix of the differential into degree r+1
    pub d_out: Mat,
}

/// The dg category of graded maps between the chosen resolutions:
/// b1(f) = d∘f − (−1)^{|f|} f∘d and b2 = composition.
#[derive(Clone, Debug)]
pub struct HomComplex {
    pub alg: Arc<PathAlgebra>,
    pub resolutions: Vec<ProjResolution>,
    pub spaces: BTreeMap<(usize, usize, i64), HomSpace>,
}

/// Element of the complex: hom-space id plus coefficients.
pub type ComplexElem = (usize, usize, i64, Vec<Scalar>);

impl HomComplex {
    pub fn space(&self, i: usize, j: usize, r: i64) -> Option<&HomSpace> {
        self.spaces.get(&(i, j, r))
    }

    pub fn dim(&self, i: usize, j: usize, r: i64) -> usize {
        self.space(i, j, r).map_or(0, |s| s.basis.len())
    }

    /// The identity chain map in degree 0 of (i, i).
    pub fn identity_elem(&self, i: usize) -> ComplexElem {
        let sp = self.space(i, i, 0).expect("degree-0 endomorphism space exists");
        let mut v = vec![self.alg.field.zero(); sp.basis.len()];
        let res = &self.resolutions[i];
        for (k, term) in res.terms.iter().enumerate() {
            for (s, &a) in term.iter().enumerate() {
                let trivial = self
                    .alg
                    .paths_between(a, a)
                    .iter()
                    .position(|&p| self.alg.basis[p].is_trivial())
                    .expect("trivial path exists");
                let path = self.alg.paths_between(a, a)[trivial];
                let key = HomBasisElem { k, s, t: s, path };
                let idx = sp.index[&key];
                v[idx] = &v[idx] + &self.alg.field.one();
            }
        }
        (i, i, 0, v)
    }

    /// Convert an element to its per-k AMat components.
    pub fn elem_to_amats(&self, e: &ComplexElem) -> BTreeMap<usize, AMat> {
        let (i, j, r, coeffs) = e;
        let sp = self.space(*i, *j, *r).unwrap();
        let ri = &self.resolutions[*i];
        let rj = &self.resolutions[*j];
        let mut out: BTreeMap<usize, AMat> = BTreeMap::new();
        for (idx, c) in coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let b = &sp.basis[idx];
            let kj = (b.k as i64 - r) as usize;
            let m = out.entry(b.k).or_insert_with(|| {
                AMat::zero(&self.alg, ri.terms[b.k].clone(), rj.terms[kj].clone())
            });
            m.entries[b.s][b.t][b.path] = &m.entries[b.s][b.t][b.path] + c;
        }
        out
    }

    /// Decompose per-k AMats back into coefficients.
    pub fn amats_to_elem(
        &self,
        i: usize,
        j: usize,
        r: i64,
        amats: &BTreeMap<usize, AMat>,
    ) -> ComplexElem {
        let sp = self.space(i, j, r).expect("target hom space exists");
        let mut v = vec![self.alg.field.zero(); sp.basis.len()];
        for (&k, m) in amats {
            for s in 0..m.src.len() {
                for t in 0..m.tgt.len() {
                    for (p, c) in m.entries[s][t].iter().enumerate() {
                        if !c.is_zero() {
                            let key = HomBasisElem { k, s, t, path: p };
                            let idx = *sp
                                .index
                                .get(&key)
                                .expect("AMat entry outside hom space basis");
                            v[idx] = &v[idx] + c;
                        }
                    }
                }
            }
        }
        (i, j, r, v)
    }

    /// b1(f) = d∘f − (−1)^{|f|} f∘d.
    pub fn differential(&self, e: &ComplexElem) -> ComplexElem {
        let (i, j, r, coeffs) = e;
        let sp = self.space(*i, *j, *r).unwrap();
        let v = sp.d_out.apply(coeffs);
        (*i, *j, r + 1, v)
    }

    /// b2: composition of graded maps, later ∘ earlier.
    pub fn compose_elems(&self, later: &ComplexElem, earlier: &ComplexElem) -> ComplexElem {
        let (j2, l, r, _) = later;
        let (i, j, s, _) = earlier;
        assert_eq!(j2, j, "compose_elems: objects do not match");
        let deg = r + s;
        if later.3.iter().all(|c| c.is_zero()) || earlier.3.iter().all(|c| c.is_zero()) {
            return self.zero_elem(*i, *l, deg);
        }
        let la = self.elem_to_amats(later);
        let ea = self.elem_to_amats(earlier);
        let mut out: BTreeMap<usize, AMat> = BTreeMap::new();
        for (&k, em) in &ea {
            // earlier: P_k(i) -> P_{k-s}(j); later at k-s: P_{k-s}(j) -> P_{k-s-r}(l)
            let mid = k as i64 - s;
            if mid < 0 {
                continue;
            }
            if let Some(lm) = la.get(&(mid as usize)) {
                let comp = AMat::compose(&self.alg, lm, em);
                out.entry(k)
                    .and_modify(|acc| *acc = acc.add(&comp))
                    .or_insert(comp);
            }
        }
        if self.space(*i, *l, deg).is_none() {
            // degree outside the complex: must be zero
            for m in out.values() {
                assert!(m.is_zero(), "composition lands outside the complex");
            }
            return (*i, *l, deg, Vec::new());
        }
        self.amats_to_elem(*i, *l, deg, &out)
    }

    pub fn zero_elem(&self, i: usize, j: usize, r: i64) -> ComplexElem {
        (i, j, r, vec![self.alg.field.zero(); self.dim(i, j, r)])
    }

    pub fn add_elems(&self, a: &ComplexElem, b: &ComplexElem) -> ComplexElem {
        assert_eq!((a.0, a.1, a.2), (b.0, b.1, b.2));
        if a.3.is_empty() {
            return b.clone();
        }
        if b.3.is_empty() {
            return a.clone();
        }
        (
            a.0,
            a.1,
            a.2,
            a.3.iter().zip(&b.3).map(|(x, y)| x + y).collect(),
        )
    }

    pub fn scale_elem(&self, c: &Scalar, e: &ComplexElem) -> ComplexElem {
        (e.0, e.1, e.2, e.3.iter().map(|x| x * c).collect())
    }

    pub fn is_zero_elem(&self, e: &ComplexElem) -> bool {
        e.3.iter().all(|c| c.is_zero())
    }
}

/// Build all graded hom spaces and differentials between the resolutions.
pub fn build_hom_complex(
    alg: &Arc<PathAlgebra>,
    resolutions: Vec<ProjResolution>,
) -> HomComplex {
    let n = resolutions.len();
    let field = alg.field;
    let mut complex = HomComplex {
        alg: Arc::clone(alg),
        resolutions,
        spaces: BTreeMap::new(),
    };
    for i in 0..n {
        for j in 0..n {
            let len_i = complex.resolutions[i].length() as i64;
            let len_j = complex.resolutions[j].length() as i64;
            for r in -len_j..=len_i {
                let mut basis = Vec::new();
                for k in 0..=(complex.resolutions[i].length()) {
                    let kj = k as i64 - r;
                    if kj < 0 || kj > len_j {
                        continue;
                    }
                    let terms_i = &complex.resolutions[i].terms[k];
                    let terms_j = &complex.resolutions[j].terms[kj as usize];
                    for (s, &a) in terms_i.iter().enumerate() {
                        for (t, &b) in terms_j.iter().enumerate() {
                            for &p in &alg.paths_between(b, a) {
                                basis.push(HomBasisElem { k, s, t, path: p });
                            }
                        }
                    }
                }
                if basis.is_empty() {
                    continue;
                }
                let index: BTreeMap<HomBasisElem, usize> = basis
                    .iter()
                    .enumerate()
                    .map(|(n, b)| (b.clone(), n))
                    .collect();
                complex.spaces.insert(
                    (i, j, r),
                    HomSpace { basis, index, d_out: Mat::zero(0, 0, field) },
                );
            }
        }
    }
    // differentials, now that all spaces exist
    let keys: Vec<(usize, usize, i64)> = complex.spaces.keys().cloned().collect();
    for (i, j, r) in keys {
        let dim = complex.dim(i, j, r);
        let out_dim = complex.dim(i, j, r + 1);
        let mut d = Mat::zero(out_dim, dim, field);
        for idx in 0..dim {
            let mut coeffs = vec![field.zero(); dim];
            coeffs[idx] = field.one();
            let e = (i, j, r, coeffs);
            let img = differential_raw(&complex, &e);
            for (row, c) in img.into_iter().enumerate() {
                d.set(row, idx, c);
            }
        }
        complex.spaces.get_mut(&(i, j, r)).unwrap().d_out = d;
    }
    complex
}

/// d∘f − (−1)^r f∘d computed through AMat components.
fn differential_raw(complex: &HomComplex, e: &ComplexElem) -> Vec<Scalar> {
    let (i, j, r, _) = e;
    let alg = &complex.alg;
    let ri = &complex.resolutions[*i];
    let rj = &complex.resolutions[*j];
    let amats = complex.elem_to_amats(e);
    let mut out: BTreeMap<usize, AMat> = BTreeMap::new();
    let sign = if r.rem_euclid(2) == 0 { 1i64 } else { -1 };
    for (&k, f_k) in &amats {
        // d_j ∘ f_k : P_k(i) -> P_{k-r-1}(j), using d_{k-r}: P_{k-r} -> P_{k-r-1}
        let kj = k as i64 - r;
        if kj >= 1 {
            let d_j = &rj.diffs[(kj - 1) as usize];
            let comp = AMat::compose(alg, d_j, f_k);
            out.entry(k)
                .and_modify(|acc| *acc = acc.add(&comp))
                .or_insert(comp);
        }
        // f_k ∘ d_{k+1}: P_{k+1}(i) -> P_{k-r}(j)
        if k + 1 <= ri.length() {
            let d_i = &ri.diffs[k];
            let comp = AMat::compose(alg, f_k, d_i).scale(&alg.field.from_i64(-sign));
            out.entry(k + 1)
                .and_modify(|acc| *acc = acc.add(&comp))
                .or_insert(comp);
        }
    }
    if complex.space(*i, *j, r + 1).is_none() {
        for m in out.values() {
            assert!(m.is_zero(), "differential lands outside the complex");
        }
        return Vec::new();
    }
    complex.amats_to_elem(*i, *j, r + 1, &out).3
}

/// Ext classes with chosen cocycle representatives. The identity chain map
/// represents the unit class on each diagonal in degree 0.
#[derive(Clone, Debug)]
pub struct ExtQuiver {
    pub n: usize,
    /// (i, j, degree n) -> representative coefficient vectors
    pub classes: BTreeMap<(usize, usize, i64), Vec<Vec<Scalar>>>,
}

impl ExtQuiver {
    pub fn dim(&self, i: usize, j: usize, n: i64) -> usize {
        self.classes.get(&(i, j, n)).map_or(0, |c| c.len())
    }

    pub fn max_degree(&self) -> i64 {
        self.classes.keys().map(|&(_, _, n)| n).max().unwrap_or(0)
    }
}

/// Cohomology of the hom complex with deterministic representative choice.
pub fn ext_spaces(complex: &HomComplex) -> ExtQuiver {
    let n = complex.resolutions.len();
    let field = complex.alg.field;
    let mut classes = BTreeMap::new();
    for (&(i, j, r), sp) in &complex.spaces {
        if r < 0 {
            continue;
        }
        let dim = sp.basis.len();
        let z_basis = kernel_basis(&sp.d_out);
        let b_basis: Vec<Vec<Scalar>> = match complex.space(i, j, r - 1) {
            Some(below) => {
                let m = &below.d_out;
                let rt = rref(&m.transpose());
                (0..rt.rank).map(|k| rt.reduced.row(k).to_vec()).collect()
            }
            None => Vec::new(),
        };
        let b_sub = Subspace::from_spanning(&b_basis, dim, field);
        // candidate representatives: the identity first on diagonals in
        // degree 0, then kernel basis vectors in order
        let mut candidates: Vec<Vec<Scalar>> = Vec::new();
        if i == j && r == 0 {
            candidates.push(complex.identity_elem(i).3);
        }
        candidates.extend(z_basis);
        let mut reps: Vec<Vec<Scalar>> = Vec::new();
        let mut span = b_sub.basis_rows();
        let mut span_rank = Subspace::from_spanning(&span, dim, field).dim();
        for cand in candidates {
            span.push(cand.clone());
            let new_rank = Subspace::from_spanning(&span, dim, field).dim();
            if new_rank > span_rank {
                reps.push(cand);
                span_rank = new_rank;
            } else {
                span.pop();
            }
        }
        if !reps.is_empty() {
            classes.insert((i, j, r), reps);
        }
    }
    ExtQuiver { n, classes }
}

/// Independent Ext dimension oracle: apply Hom(-, target module) to the
/// resolution of Delta(i) and count ranks.
pub fn ext_dims_via_resolution(
    alg: &Arc<PathAlgebra>,
    res: &ProjResolution,
    target: &Representation,
) -> Vec<usize> {
    let field = alg.field;
    // C^k = ⊕_s target(a_s); differentials precompose with d_{k+1}
    let spaces: Vec<Vec<usize>> = res
        .terms
        .iter()
        .map(|term| term.iter().map(|&a| target.dims[a]).collect())
        .collect();
    let dims: Vec<usize> = spaces.iter().map(|d| d.iter().sum()).collect();
    let mut mats = Vec::new();
    for k in 0..res.length() {
        let d = &res.diffs[k]; // P_{k+1} -> P_k
        let mut m = Mat::zero(dims[k + 1], dims[k], field);
        let off_in: Vec<usize> = spaces[k]
            .iter()
            .scan(0, |acc, &d| {
                let v = *acc;
                *acc += d;
                Some(v)
            })
            .collect();
        let off_out: Vec<usize> = spaces[k + 1]
            .iter()
            .scan(0, |acc, &d| {
                let v = *acc;
                *acc += d;
                Some(v)
            })
            .collect();
        for s2 in 0..res.terms[k + 1].len() {
            for t in 0..res.terms[k].len() {
                let u = &d.entries[s2][t];
                if u.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let act = target.act_elem(u, res.terms[k][t], res.terms[k + 1][s2]);
                for r in 0..act.rows {
                    for c in 0..act.cols {
                        m.set(off_out[s2] + r, off_in[t] + c, act.at(r, c).clone());
                    }
                }
            }
        }
        mats.push(m);
    }
    let mut out = Vec::new();
    for k in 0..=res.length() {
        let rank_in = if k == 0 { 0 } else { mats[k - 1].rank() };
        let rank_out = if k == res.length() { 0 } else { mats[k].rank() };
        out.push(dims[k] - rank_in - rank_out);
    }
    out
}

/// Deterministic contraction (iota, p, h) of each hom space onto its
/// cohomology, satisfying iota∘p − id = b1∘h + h∘b1 and the side conditions
/// h∘iota = 0, p∘h = 0, h∘h = 0.
#[derive(Clone, Debug)]
pub struct Contraction {
    /// (i, j, r) -> (iota: C×H, p: H×C, h: C^r -> C^{r-1})
    pub data: BTreeMap<(usize, usize, i64), (Mat, Mat, Mat)>,
}

impl Contraction {
    pub fn iota(&self, key: (usize, usize, i64)) -> Option<&Mat> {
        self.data.get(&key).map(|(i, _, _)| i)
    }
    pub fn proj(&self, key: (usize, usize, i64)) -> Option<&Mat> {
        self.data.get(&key).map(|(_, p, _)| p)
    }
    pub fn homotopy(&self, key: (usize, usize, i64)) -> Option<&Mat> {
        self.data.get(&key).map(|(_, _, h)| h)
    }
}

pub fn make_contraction(complex: &HomComplex, ext: &ExtQuiver) -> Result<Contraction> {
    let field = complex.alg.field;
    let mut data = BTreeMap::new();
    // S-basis per space: greedy unit-vector complement of the cocycles
    let mut s_bases: BTreeMap<(usize, usize, i64), Vec<Vec<Scalar>>> = BTreeMap::new();
    for (&key, sp) in &complex.spaces {
        let dim = sp.basis.len();
        let z = kernel_basis(&sp.d_out);
        let s = crate::linalg::complement_basis(&z, dim, field, false)?;
        s_bases.insert(key, s);
    }
    for (&key, sp) in &complex.spaces {
        let (i, j, r) = key;
        let dim = sp.basis.len();
        let reps: Vec<Vec<Scalar>> = ext
            .classes
            .get(&key)
            .cloned()
            .unwrap_or_default();
        let h_dim = reps.len();
        // B-basis: image of the differential from below
        let b_basis: Vec<Vec<Scalar>> = match complex.space(i, j, r - 1) {
            Some(below) => {
                let rt = rref(&below.d_out.transpose());
                (0..rt.rank).map(|k| rt.reduced.row(k).to_vec()).collect()
            }
            None => Vec::new(),
        };
        let s_basis = &s_bases[&key];
        if b_basis.len() + h_dim + s_basis.len() != dim {
            return Err(QhError::Internal(format!(
                "contraction decomposition mismatch at {key:?}: {} + {} + {} != {}",
                b_basis.len(),
                h_dim,
                s_basis.len(),
                dim
            )));
        }
        // full change of basis: columns [B | H | S]
        let mut cols: Vec<Vec<Scalar>> = Vec::new();
        cols.extend(b_basis.iter().cloned());
        cols.extend(reps.iter().cloned());
        cols.extend(s_basis.iter().cloned());
        let m = Mat::from_fn(dim, dim, field, |r2, c2| cols[c2][r2].clone());
        let minv = m
            .inverse()
            .ok_or_else(|| QhError::Internal("contraction basis not invertible".into()))?;
        let iota = Mat::from_fn(dim, h_dim, field, |r2, c2| reps[c2][r2].clone());
        let proj = Mat::from_fn(h_dim, dim, field, |r2, c2| {
            minv.at(b_basis.len() + r2, c2).clone()
        });
        // h on degree r: invert b1 from S^{r-1} onto B^r, then negate so that
        // iota∘p − id = b1 h + h b1
        let h = match complex.space(i, j, r - 1) {
            Some(below) if !b_basis.is_empty() => {
                let s_below = &s_bases[&(i, j, r - 1)];
                // T: b1(s_l) expressed in B-coordinates
                let mut t = Mat::zero(b_basis.len(), s_below.len(), field);
                for (l, sv) in s_below.iter().enumerate() {
                    let img = below.d_out.apply(sv);
                    // coordinates of img in the [B|H|S] basis: B-part
                    let coords = minv.apply(&img);
                    for bi in 0..b_basis.len() {
                        t.set(bi, l, coords[bi].clone());
                    }
                    for (extra, c) in coords.iter().enumerate().skip(b_basis.len()) {
                        if !c.is_zero() {
                            return Err(QhError::Internal(format!(
                                "image of S not inside B at {key:?} ({extra})"
                            )));
                        }
                    }
                }
                let tinv = t
                    .inverse()
                    .ok_or_else(|| QhError::Internal("b1 restricted to S is not invertible".into()))?;
                // h(v) = - S_below · tinv · (B-coords of v)
                let bcoords = Mat::from_fn(b_basis.len(), dim, field, |r2, c2| {
                    minv.at(r2, c2).clone()
                });
                let s_mat = Mat::from_fn(below.basis.len(), s_below.len(), field, |r2, c2| {
                    s_below[c2][r2].clone()
                });
                (&s_mat * &(&tinv * &bcoords)).scale(&field.from_i64(-1))
            }
            _ => {
                let below_dim = complex.dim(i, j, r - 1);
                Mat::zero(below_dim, dim, field)
            }
        };
        data.insert(key, (iota, proj, h));
    }
    Ok(Contraction { data })
}

/// Verify p∘iota = id, the homotopy equation, and all three side conditions.
pub fn check_contraction(complex: &HomComplex, c: &Contraction) -> Result<()> {
    let field = complex.alg.field;
    for (&key, (iota, p, h)) in &c.data {
        let (i, j, r) = key;
        let dim = complex.dim(i, j, r);
        let pi = p * iota;
        if !pi.is_identity() {
            return Err(QhError::Internal(format!("p∘iota != id at {key:?}")));
        }
        // iota∘p − id = b1 h + h b1
        let ip = iota * p;
        let id = Mat::identity(dim, field);
        let bh = match complex.space(i, j, r - 1) {
            Some(below) => &below.d_out * h,
            None => Mat::zero(dim, dim, field),
        };
        let hb = match c.data.get(&(i, j, r + 1)) {
            Some((_, _, h_above)) => h_above * &complex.spaces[&(i, j, r)].d_out,
            None => Mat::zero(dim, dim, field),
        };
        let lhs = &ip - &id;
        let rhs = &bh + &hb;
        if lhs != rhs {
            return Err(QhError::Internal(format!("homotopy equation fails at {key:?}")));
        }
        // side conditions: h∘iota at degree r, p∘h and h∘h land one lower
        if !(h * iota).is_zero() {
            return Err(QhError::Internal(format!("h∘iota != 0 at {key:?}")));
        }
        if let Some((_, p_below, h_below)) = c.data.get(&(i, j, r - 1)) {
            if !(p_below * h).is_zero() {
                return Err(QhError::Internal(format!("p∘h != 0 at {key:?}")));
            }
            if !(h_below * h).is_zero() {
                return Err(QhError::Internal(format!("h∘h != 0 at {key:?}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_algebra;
    use crate::fixtures;
    use crate::modules::standard_module;
    use crate::presentation::build_path_algebra;
    use crate::scalar::FieldCfg;

    fn load(text: &str) -> Arc<PathAlgebra> {
        let src = parse_algebra(text).unwrap();
        Arc::new(
            build_path_algebra(src.field.unwrap_or(FieldCfg::Q), src.quiver, src.relations, None)
                .unwrap(),
        )
    }

    fn resolve_all(alg: &Arc<PathAlgebra>) -> Vec<ProjResolution> {
        (0..alg.n_vertices())
            .map(|i| {
                let d = standard_module(alg, i);
                minimal_resolution(alg, &d, alg.n_vertices() + 2).unwrap()
            })
            .collect()
    }

    #[test]
    fn a1_resolution_lengths() {
        let alg = load(fixtures::A1);
        let res = resolve_all(&alg);
        assert_eq!(res[0].length(), 1); // 0 -> P2 -> P1 -> Delta(1) -> 0
        assert_eq!(res[0].terms, vec![vec![0], vec![1]]);
        assert_eq!(res[1].length(), 0); // Delta(2) = P(2)
    }

    #[test]
    fn a3_delta1_resolution_has_length_two() {
        let alg = load(fixtures::A3);
        let res = resolve_all(&alg);
        assert_eq!(res[0].length(), 2);
        assert_eq!(res[0].terms[1].len(), 2); // P(2) ⊕ P(4)
        assert_eq!(res[0].terms[2], vec![2]); // P(3)
    }

    #[test]
    fn a1_ext_dimensions() {
        let alg = load(fixtures::A1);
        let res = resolve_all(&alg);
        let complex = build_hom_complex(&alg, res);
        let ext = ext_spaces(&complex);
        assert_eq!(ext.dim(0, 1, 0), 1);
        assert_eq!(ext.dim(0, 1, 1), 1);
        assert_eq!(ext.dim(0, 0, 0), 1);
        assert_eq!(ext.dim(1, 1, 0), 1);
        assert_eq!(ext.dim(1, 0, 0), 0);
        assert_eq!(ext.dim(1, 0, 1), 0);
        assert_eq!(ext.dim(0, 0, 1), 0);
    }

    #[test]
    fn a3_ext_dimensions() {
        let alg = load(fixtures::A3);
        let res = resolve_all(&alg);
        let complex = build_hom_complex(&alg, res);
        let ext = ext_spaces(&complex);
        // degree 1: alpha: 1->2, gamma: 2->3, beta: 2->4
        assert_eq!(ext.dim(0, 1, 1), 1);
        assert_eq!(ext.dim(1, 2, 1), 1);
        assert_eq!(ext.dim(1, 3, 1), 1);
        // degree 0 off-diagonal: phi: 3 -> 4
        assert_eq!(ext.dim(2, 3, 0), 1);
        // the unique degree-2 class goes from 1 to 3
        assert_eq!(ext.dim(0, 2, 2), 1);
        assert_eq!(ext.dim(0, 3, 2), 0);
        // nothing else in degree >= 1
        let mut total_deg1 = 0;
        for i in 0..4 {
            for j in 0..4 {
                total_deg1 += ext.dim(i, j, 1);
            }
        }
        assert_eq!(total_deg1, 3);
    }

    #[test]
    fn a4_ext_dimensions_and_vanishing_ext2() {
        let alg = load(fixtures::A4);
        let res = resolve_all(&alg);
        let complex = build_hom_complex(&alg, res);
        let ext = ext_spaces(&complex);
        // psi: Ext0(2,3), phi: Ext0(1,3), gamma: Ext1(1,2), alpha: Ext1(2,3),
        // gammabar: Ext1(1,3)
        assert_eq!(ext.dim(1, 2, 0), 1);
        assert_eq!(ext.dim(0, 2, 0), 1);
        assert_eq!(ext.dim(0, 1, 1), 1);
        assert_eq!(ext.dim(1, 2, 1), 1);
        assert_eq!(ext.dim(0, 2, 1), 1);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(ext.dim(i, j, 2), 0, "Ext^2({i},{j}) should vanish");
            }
        }
    }

    #[test]
    fn ext_directedness() {
        for text in [fixtures::A1, fixtures::A3, fixtures::A4] {
            let alg = load(text);
            let res = resolve_all(&alg);
            let complex = build_hom_complex(&alg, res);
            let ext = ext_spaces(&complex);
            for (&(i, j, n), reps) in &ext.classes {
                if reps.is_empty() {
                    continue;
                }
                if n == 0 && i == j {
                    assert_eq!(reps.len(), 1);
                } else {
                    assert!(i < j, "nontrivial class at ({i},{j},{n})");
                }
            }
        }
    }

    #[test]
    fn ext_dims_match_independent_oracle() {
        for text in [fixtures::A1, fixtures::A3, fixtures::A4] {
            let alg = load(text);
            let res = resolve_all(&alg);
            let deltas: Vec<_> = (0..alg.n_vertices())
                .map(|i| standard_module(&alg, i))
                .collect();
            let complex = build_hom_complex(&alg, res);
            let ext = ext_spaces(&complex);
            for i in 0..alg.n_vertices() {
                for j in 0..alg.n_vertices() {
                    let oracle =
                        ext_dims_via_resolution(&alg, &complex.resolutions[i], &deltas[j]);
                    for (k, &dim) in oracle.iter().enumerate() {
                        assert_eq!(
                            ext.dim(i, j, k as i64),
                            dim,
                            "Ext^{k}({i},{j}) disagrees with the oracle"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn differential_squares_to_zero() {
        let alg = load(fixtures::A3);
        let res = resolve_all(&alg);
        let complex = build_hom_complex(&alg, res);
        for (&(i, j, r), sp) in &complex.spaces {
            if let Some(above) = complex.space(i, j, r + 1) {
                let dd = &above.d_out * &sp.d_out;
                assert!(dd.is_zero(), "b1^2 != 0 at ({i},{j},{r})");
            }
        }
    }

    #[test]
    fn cocycle_annihilated_and_unit_works() {
        let alg = load(fixtures::A1);
        let res = resolve_all(&alg);
        let complex = build_hom_complex(&alg, res);
        for i in 0..2 {
            let id = complex.identity_elem(i);
            let d = complex.differential(&id);
            assert!(complex.is_zero_elem(&d) || d.3.is_empty());
            // b2(id, f) = f for every basis f
            for (&(i2, j2, r), sp) in &complex.spaces {
                if i2 != i {
                    continue;
                }
                for idx in 0..sp.basis.len() {
                    let mut v = vec![alg.field.zero(); sp.basis.len()];
                    v[idx] = alg.field.one();
                    let f = (i2, j2, r, v);
                    let lhs = complex.compose_elems(&complex.identity_elem(j2), &f);
                    assert_eq!(lhs.3, f.3, "id∘f != f");
                    let rhs = complex.compose_elems(&f, &complex.identity_elem(i2));
                    assert_eq!(rhs.3, f.3, "f∘id != f");
                }
            }
        }
    }

    #[test]
    fn leibniz_on_random_pairs() {
        let alg = load(fixtures::A4);
        let res = resolve_all(&alg);
        let complex = build_hom_complex(&alg, res);
        let mut rng = crate::rng::Rng::new(42);
        let keys: Vec<_> = complex.spaces.keys().cloned().collect();
        let mut checked = 0;
        for _ in 0..200 {
            let (i, j, r) = keys[rng.below(keys.len())];
            let (j2, l, s) = keys[rng.below(keys.len())];
            if j2 != j || complex.space(i, l, r + s).is_none() {
                continue;
            }
            let rand_elem = |rng: &mut crate::rng::Rng, key: (usize, usize, i64)| {
                let dim = complex.dim(key.0, key.1, key.2);
                let v: Vec<Scalar> =
                    (0..dim).map(|_| alg.field.from_i64(rng.small_int(2))).collect();
                (key.0, key.1, key.2, v)
            };
            let g = rand_elem(&mut rng, (i, j, r));
            let f = rand_elem(&mut rng, (j, l, s));
            // b1(f∘g) = b1(f)∘g + (−1)^{|f|} f∘b1(g)
            let fg = complex.compose_elems(&f, &g);
            let lhs = complex.differential(&fg);
            let t1 = complex.compose_elems(&complex.differential(&f), &g);
            let sign = alg.field.from_i64(if s.rem_euclid(2) == 0 { 1 } else { -1 });
            let t2 = complex.scale_elem(&sign, &complex.compose_elems(&f, &complex.differential(&g)));
            let mut rhs = complex.zero_elem(i, l, r + s + 1);
            if !t1.3.is_empty() {
                rhs = complex.add_elems(&rhs, &t1);
            }
            if !t2.3.is_empty() {
                rhs = complex.add_elems(&rhs, &t2);
            }
            if lhs.3.is_empty() {
                assert!(rhs.3.iter().all(|c| c.is_zero()));
            } else {
                assert_eq!(lhs.3, rhs.3, "Leibniz fails");
            }
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn contraction_side_conditions() {
        for text in [fixtures::A1, fixtures::A3, fixtures::A4] {
            let alg = load(text);
            let res = resolve_all(&alg);
            let complex = build_hom_complex(&alg, res);
            let ext = ext_spaces(&complex);
            let c = make_contraction(&complex, &ext).unwrap();
            check_contraction(&complex, &c).unwrap();
        }
    }

    #[test]
    fn zero_differential_complex_contraction() {
        // semisimple: resolutions are concentrated in degree 0, b1 = 0
        let alg = load("algebra s\nvertices 1 < 2\n");
        let res = resolve_all(&alg);
        let complex = build_hom_complex(&alg, res);
        let ext = ext_spaces(&complex);
        let c = make_contraction(&complex, &ext).unwrap();
        check_contraction(&complex, &c).unwrap();
        for (_, (_, _, h)) in &c.data {
            assert!(h.is_zero());
        }
    }

    #[test]
    fn resolution_too_long_reported() {
        let alg = load(fixtures::A3);
        let d = standard_module(&alg, 0);
        let err = minimal_resolution(&alg, &d, 1).unwrap_err();
        assert!(matches!(err, QhError::ResolutionTooLong(1)));
    }
}
