//! The minimal model: higher products on Ext*(Delta, Delta) obtained by
//! homotopy transfer through the chosen contraction, stored in the shifted
//! (bar) convention where every product has degree +1.
//!
//! Tuples are kept in application order: `tuple[0]` is the first-acting
//! element, matching how paths are stored. In the classical right-to-left
//! notation b_n(sa_n ⊗ ... ⊗ sa_1), the element sa_1 is `tuple[0]`.

use crate::error::{QhError, Result};
use crate::homotopy::{ComplexElem, Contraction, ExtQuiver, HomComplex};
use crate::scalar::{FieldCfg, Scalar};
use std::collections::BTreeMap;

/// One basis class of the Ext quiver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtElem {
    pub src: usize,
    pub tgt: usize,
    /// unshifted cohomological degree (n of Ext^n)
    pub deg: i64,
    /// position inside the (src, tgt, deg) class list
    pub idx: usize,
    pub is_unit: bool,
}

impl ExtElem {
    /// degree of the shifted element s·x
    pub fn sdeg(&self) -> i64 {
        self.deg - 1
    }
}

type ProductTable = BTreeMap<Vec<usize>, Vec<(usize, Scalar)>>;

/// Graded Ext quiver with multilinear products b_n on the shifted spaces.
#[derive(Clone, Debug)]
pub struct AInfinityStructure {
    pub field: FieldCfg,
    pub n_vertices: usize,
    pub basis: Vec<ExtElem>,
    /// b_n tables for n = 2..=n_max; keys are basis-index tuples in
    /// application order, values sparse output vectors
    pub products: BTreeMap<usize, ProductTable>,
    pub n_max: usize,
}

impl AInfinityStructure {
    pub fn class_index(&self, src: usize, tgt: usize, deg: i64, idx: usize) -> Option<usize> {
        self.basis
            .iter()
            .position(|e| e.src == src && e.tgt == tgt && e.deg == deg && e.idx == idx)
    }

    pub fn unit_index(&self, vertex: usize) -> usize {
        self.basis
            .iter()
            .position(|e| e.is_unit && e.src == vertex)
            .expect("unit class exists")
    }

    /// b_n on a tuple of basis indices; zero when no entry is stored.
    pub fn apply_basis(&self, tuple: &[usize]) -> Vec<(usize, Scalar)> {
        self.products
            .get(&tuple.len())
            .and_then(|t| t.get(tuple))
            .cloned()
            .unwrap_or_default()
    }

    /// All composable basis tuples of the given length.
    pub fn composable_tuples(&self, len: usize) -> Vec<Vec<usize>> {
        let mut tuples: Vec<Vec<usize>> = (0..self.basis.len()).map(|k| vec![k]).collect();
        for _ in 1..len {
            let mut next = Vec::new();
            for t in &tuples {
                let last = &self.basis[*t.last().unwrap()];
                for (k, e) in self.basis.iter().enumerate() {
                    if e.src == last.tgt {
                        let mut t2 = t.clone();
                        t2.push(k);
                        next.push(t2);
                    }
                }
            }
            tuples = next;
        }
        tuples
    }
}

/// Transfer the dg structure to the cohomology along the contraction and
/// reduce to the shifted convention. Validates the Stasheff identities and
/// strict unitality before returning.
pub fn transfer(
    complex: &HomComplex,
    ext: &ExtQuiver,
    contraction: &Contraction,
) -> Result<AInfinityStructure> {
    let field = complex.alg.field;
    let nv = complex.resolutions.len();

    // flatten the Ext basis in a canonical order
    let mut basis = Vec::new();
    for (&(i, j, n), reps) in &ext.classes {
        for idx in 0..reps.len() {
            let is_unit = i == j && n == 0 && idx == 0;
            basis.push(ExtElem { src: i, tgt: j, deg: n, idx, is_unit });
        }
    }

    let iota_elem = |e: &ExtElem| -> ComplexElem {
        let key = (e.src, e.tgt, e.deg);
        let iota = contraction.iota(key).expect("iota exists for every class");
        let mut coeffs = vec![field.zero(); iota.rows];
        for r in 0..iota.rows {
            coeffs[r] = iota.at(r, e.idx).clone();
        }
        (e.src, e.tgt, e.deg, coeffs)
    };

    let n_max = 2.max(nv.saturating_sub(1));

    let ainf_proto = AInfinityStructure {
        field,
        n_vertices: nv,
        basis: basis.clone(),
        products: BTreeMap::new(),
        n_max,
    };

    let mut products: BTreeMap<usize, ProductTable> = BTreeMap::new();
    for arity in 2..=n_max {
        let mut table = ProductTable::new();
        for tuple in ainf_proto.composable_tuples(arity) {
            let items: Vec<(ComplexElem, i64)> = tuple
                .iter()
                .map(|&k| (iota_elem(&basis[k]), basis[k].deg))
                .collect();
            let lam = lambda(complex, contraction, &items);
            let Some(lam) = lam else { continue };
            let (i0, jn, rdeg, coeffs) = &lam;
            // project to cohomology classes
            let Some(p) = contraction.proj((*i0, *jn, *rdeg)) else {
                continue;
            };
            if p.rows == 0 {
                continue;
            }
            let m_coeffs = p.apply(coeffs);
            if m_coeffs.iter().all(|c| c.is_zero()) {
                continue;
            }
            // decalage: b_n = -(-1)^{sum_{k>=1} k * sdeg(tuple[k])} s m_n
            let mut exp: i64 = 0;
            for (k, &bk) in tuple.iter().enumerate().skip(1) {
                exp += k as i64 * basis[bk].sdeg();
            }
            let sign = if exp.rem_euclid(2) == 0 { -1 } else { 1 };
            let sign = field.from_i64(sign);
            let mut out = Vec::new();
            for (idx, c) in m_coeffs.iter().enumerate() {
                if !c.is_zero() {
                    let gi = ainf_proto
                        .class_index(*i0, *jn, *rdeg, idx)
                        .ok_or_else(|| QhError::Internal("transfer output class missing".into()))?;
                    out.push((gi, &sign * c));
                }
            }
            table.insert(tuple, out);
        }
        products.insert(arity, table);
    }

    let ainf = AInfinityStructure { products, ..ainf_proto };
    let violations = check_stasheff(&ainf);
    if !violations.is_empty() {
        return Err(QhError::Internal(format!(
            "Stasheff identities fail after transfer: {}",
            violations.join("; ")
        )));
    }
    if !check_unitality(&ainf) {
        return Err(QhError::Internal("transferred structure is not strictly unital".into()));
    }
    Ok(ainf)
}

/// Merkulov's lambda recursion in the unshifted convention:
/// lambda_2 = composition, lambda_n = sum over s+t=n of
/// (-1)^{s+1} m_2((h lambda_s) ⊗ (h lambda_t)) with h lambda_1 = -id.
/// Items carry their unshifted degrees; the Koszul sign comes from the
/// right factor passing the left block's elements.
fn lambda(
    complex: &HomComplex,
    contraction: &Contraction,
    items: &[(ComplexElem, i64)],
) -> Option<ComplexElem> {
    let n = items.len();
    assert!(n >= 2);
    let field = complex.alg.field;
    let mut acc: Option<ComplexElem> = None;
    for t in 1..n {
        let s = n - t;
        let earlier = &items[..t];
        let later = &items[t..];
        let f = h_lambda(complex, contraction, later)?;
        let g = h_lambda(complex, contraction, earlier)?;
        if complex.is_zero_elem(&f) || complex.is_zero_elem(&g) {
            continue;
        }
        let comp = complex.compose_elems(&f, &g);
        if comp.3.is_empty() || complex.is_zero_elem(&comp) {
            continue;
        }
        // (-1)^{s+1}
        let mut sign: i64 = if (s + 1) % 2 == 0 { 1 } else { -1 };
        // Koszul: |h lambda_t| crossing the degrees of the later block
        let op_deg: i64 = if t == 1 { 0 } else { 1 - t as i64 };
        let later_deg: i64 = later.iter().map(|(_, d)| d).sum();
        if (op_deg * later_deg).rem_euclid(2) == 1 {
            sign = -sign;
        }
        let term = complex.scale_elem(&field.from_i64(sign), &comp);
        acc = Some(match acc {
            None => term,
            Some(a) => complex.add_elems(&a, &term),
        });
    }
    acc
}

/// h applied to lambda of a block; a single item means h lambda_1 = -id.
fn h_lambda(
    complex: &HomComplex,
    contraction: &Contraction,
    items: &[(ComplexElem, i64)],
) -> Option<ComplexElem> {
    let field = complex.alg.field;
    if items.len() == 1 {
        return Some(complex.scale_elem(&field.from_i64(-1), &items[0].0));
    }
    let lam = lambda(complex, contraction, items)?;
    let key = (lam.0, lam.1, lam.2);
    match contraction.homotopy(key) {
        Some(h) => {
            let v = h.apply(&lam.3);
            Some((lam.0, lam.1, lam.2 - 1, v))
        }
        None => {
            if complex.is_zero_elem(&lam) {
                None
            } else {
                // outside the complex: the element must be zero
                None
            }
        }
    }
}

type Combo = Vec<(usize, Scalar)>;

/// Evaluate b_k multilinearly on a tuple of sparse combinations.
fn apply_b_combo(ainf: &AInfinityStructure, args: &[Combo]) -> Combo {
    let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
    let mut stack: Vec<(Vec<usize>, Scalar)> = vec![(Vec::new(), ainf.field.one())];
    for arg in args {
        let mut next = Vec::new();
        for (prefix, c) in &stack {
            for (k, ck) in arg {
                let mut p2 = prefix.clone();
                p2.push(*k);
                next.push((p2, c * ck));
            }
        }
        stack = next;
    }
    for (tuple, c) in stack {
        if c.is_zero() {
            continue;
        }
        for (out, co) in ainf.apply_basis(&tuple) {
            let add = &c * &co;
            acc.entry(out)
                .and_modify(|x| *x = &*x + &add)
                .or_insert(add);
        }
    }
    acc.into_iter().filter(|(_, c)| !c.is_zero()).collect()
}

/// Evaluate every Stasheff identity A_n on every composable basis tuple.
/// Returns human-readable violations; empty means pass.
pub fn check_stasheff(ainf: &AInfinityStructure) -> Vec<String> {
    let mut violations = Vec::new();
    let max_n = 2 * ainf.n_max - 1;
    for n in 2..=max_n {
        for tuple in ainf.composable_tuples(n) {
            // sum over inner arity k and right offset j, with b_1 = 0
            let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
            for k in 2..=n.min(ainf.n_max) {
                let outer = n - k + 1;
                if outer != 1 && (outer < 2 || outer > ainf.n_max) {
                    continue;
                }
                for j in 0..=(n - k) {
                    // inner applies to tuple[j..j+k]; Koszul sign from b_k
                    // (degree 1) crossing the later elements it passes over
                    let inner = ainf.apply_basis(&tuple[j..j + k]);
                    if inner.is_empty() {
                        continue;
                    }
                    let cross: i64 = tuple[j + k..].iter().map(|&x| ainf.basis[x].sdeg()).sum();
                    let sign = ainf
                        .field
                        .from_i64(if cross.rem_euclid(2) == 0 { 1 } else { -1 });
                    let signed: Combo =
                        inner.into_iter().map(|(i, c)| (i, &c * &sign)).collect();
                    if outer == 1 {
                        // b_1 = 0 on a minimal model
                        continue;
                    }
                    let mut args: Vec<Combo> = Vec::new();
                    for &x in &tuple[..j] {
                        args.push(vec![(x, ainf.field.one())]);
                    }
                    args.push(signed);
                    for &x in &tuple[j + k..] {
                        args.push(vec![(x, ainf.field.one())]);
                    }
                    for (out, c) in apply_b_combo(ainf, &args) {
                        acc.entry(out)
                            .and_modify(|x| *x = &*x + &c)
                            .or_insert(c);
                    }
                }
            }
            let bad: Vec<String> = acc
                .iter()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| format!("{k}:{c}"))
                .collect();
            if !bad.is_empty() {
                violations.push(format!("A_{n} fails on {tuple:?} -> {}", bad.join(",")));
            }
        }
    }
    violations
}

/// b_2(s1_j ⊗ sx) = sx, b_2(sx ⊗ s1_i) = (-1)^{|x|} sx, and b_n with a unit
/// argument vanishes for n != 2.
pub fn check_unitality(ainf: &AInfinityStructure) -> bool {
    // every vertex has a unit class
    for v in 0..ainf.n_vertices {
        if !ainf.basis.iter().any(|e| e.is_unit && e.src == v) {
            return false;
        }
    }
    for (k, e) in ainf.basis.iter().enumerate() {
        let unit_left = ainf.unit_index(e.tgt);
        let got = ainf.apply_basis(&[k, unit_left]);
        if got != vec![(k, ainf.field.one())] {
            return false;
        }
        let unit_right = ainf.unit_index(e.src);
        let got = ainf.apply_basis(&[unit_right, k]);
        let expect = ainf.field.from_i64(if e.deg.rem_euclid(2) == 0 { 1 } else { -1 });
        if got != vec![(k, expect)] {
            return false;
        }
    }
    for (&arity, table) in &ainf.products {
        if arity == 2 {
            continue;
        }
        for (tuple, out) in table {
            if tuple.iter().any(|&k| ainf.basis[k].is_unit) && !out.is_empty() {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_algebra;
    use crate::fixtures;
    use crate::homotopy::{build_hom_complex, ext_spaces, make_contraction, minimal_resolution};
    use crate::modules::{hom_space, standard_module};
    use crate::presentation::{build_path_algebra, PathAlgebra};
    use std::sync::Arc;

    fn pipeline(text: &str) -> (Arc<PathAlgebra>, HomComplex, ExtQuiver, AInfinityStructure) {
        let src = parse_algebra(text).unwrap();
        let alg = Arc::new(
            build_path_algebra(src.field.unwrap_or(FieldCfg::Q), src.quiver, src.relations, None)
                .unwrap(),
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
        (alg, complex, ext, ainf)
    }

    #[test]
    fn a1_all_nonunital_products_vanish() {
        let (_, _, _, ainf) = pipeline(fixtures::A1);
        for (_, table) in &ainf.products {
            for (tuple, out) in table {
                if tuple.iter().any(|&k| ainf.basis[k].is_unit) {
                    continue;
                }
                assert!(out.is_empty() || out.iter().all(|(_, c)| c.is_zero()));
            }
        }
    }

    #[test]
    fn a4_b2_psi_gamma_is_gammabar() {
        let (_, _, _, ainf) = pipeline(fixtures::A4);
        // psi in Ext^0(Delta2, Delta3), gamma in Ext^1(Delta1, Delta2),
        // gammabar in Ext^1(Delta1, Delta3)
        let psi = ainf.class_index(1, 2, 0, 0).unwrap();
        let gamma = ainf.class_index(0, 1, 1, 0).unwrap();
        let gammabar = ainf.class_index(0, 2, 1, 0).unwrap();
        // b2(s psi ⊗ s gamma): gamma acts first
        let out = ainf.apply_basis(&[gamma, psi]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, gammabar);
        let c = &out[0].1;
        assert!(c.is_one() || (-c).is_one(), "coefficient must be a unit, got {c}");
    }

    #[test]
    fn a4_b2_alpha_gamma_is_zero() {
        let (_, _, _, ainf) = pipeline(fixtures::A4);
        let alpha = ainf.class_index(1, 2, 1, 0).unwrap();
        let gamma = ainf.class_index(0, 1, 1, 0).unwrap();
        let out = ainf.apply_basis(&[gamma, alpha]);
        assert!(out.is_empty());
    }

    #[test]
    fn a3_b2_gamma_alpha_hits_r() {
        let (_, _, _, ainf) = pipeline(fixtures::A3);
        // alpha: Ext^1(1,2), gamma(2->3): Ext^1(2,3), r: Ext^2(1,3)
        let a = ainf.class_index(0, 1, 1, 0).unwrap();
        let g = ainf.class_index(1, 2, 1, 0).unwrap();
        let r = ainf.class_index(0, 2, 2, 0).unwrap();
        let out = ainf.apply_basis(&[a, g]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].0, r);
        let c = &out[0].1;
        assert!(c.is_one() || (-c).is_one());
    }

    #[test]
    fn stasheff_passes_on_goldens() {
        for text in [fixtures::A1, fixtures::A3, fixtures::A4] {
            let (_, _, _, ainf) = pipeline(text);
            assert!(check_stasheff(&ainf).is_empty());
        }
    }

    #[test]
    fn corrupted_b2_fails_stasheff() {
        let (_, _, _, mut ainf) = pipeline(fixtures::A4);
        // flip the sign of one unit product: this is not a basis rescaling,
        // so an A_3 identity must break
        let gamma = ainf.class_index(0, 1, 1, 0).unwrap();
        let unit1 = ainf.unit_index(0);
        let table = ainf.products.get_mut(&2).unwrap();
        let entry = table.get_mut(&vec![unit1, gamma]).unwrap();
        for (_, c) in entry.iter_mut() {
            *c = -&*c;
        }
        assert!(!check_stasheff(&ainf).is_empty());
    }

    #[test]
    fn rescaling_is_gauge_invisible_to_stasheff() {
        let (_, _, _, mut ainf) = pipeline(fixtures::A4);
        // rescale gammabar by -1: flip every table coefficient where the
        // total number of gammabar occurrences (inputs plus output) is odd
        let gammabar = ainf.class_index(0, 2, 1, 0).unwrap();
        for table in ainf.products.values_mut() {
            for (k, v) in table.iter_mut() {
                let in_count = k.iter().filter(|&&x| x == gammabar).count();
                for (o, c) in v.iter_mut() {
                    let total = in_count + usize::from(*o == gammabar);
                    if total % 2 == 1 {
                        *c = -&*c;
                    }
                }
            }
        }
        assert!(check_stasheff(&ainf).is_empty());
        assert!(check_unitality(&ainf));
    }

    #[test]
    fn unitality_on_goldens() {
        for text in [fixtures::A1, fixtures::A3, fixtures::A4] {
            let (_, _, _, ainf) = pipeline(text);
            assert!(check_unitality(&ainf));
        }
    }

    #[test]
    fn semisimple_unitality() {
        let (_, _, _, ainf) = pipeline("algebra s\nvertices 1 < 2\n");
        assert!(check_unitality(&ainf));
        assert!(check_stasheff(&ainf).is_empty());
    }

    #[test]
    fn missing_units_detected() {
        let (_, _, _, mut ainf) = pipeline(fixtures::A1);
        ainf.basis.retain(|e| !(e.is_unit && e.src == 0));
        assert!(!check_unitality(&ainf));
    }

    #[test]
    fn products_raise_shifted_degree_by_one_and_respect_vertices() {
        for text in [fixtures::A3, fixtures::A4] {
            let (_, _, _, ainf) = pipeline(text);
            for (&arity, table) in &ainf.products {
                for (tuple, out) in table {
                    assert_eq!(tuple.len(), arity);
                    let sdeg: i64 = tuple.iter().map(|&k| ainf.basis[k].sdeg()).sum();
                    let src = ainf.basis[tuple[0]].src;
                    let tgt = ainf.basis[*tuple.last().unwrap()].tgt;
                    for (o, _) in out {
                        assert_eq!(ainf.basis[*o].sdeg(), sdeg + 1);
                        assert_eq!(ainf.basis[*o].src, src);
                        assert_eq!(ainf.basis[*o].tgt, tgt);
                    }
                }
            }
        }
    }

    #[test]
    fn degree_zero_b2_matches_yoneda_composition() {
        // For classes of degree 0, b2 agrees with composition of the induced
        // maps between standard modules.
        let (alg, complex, ext, ainf) = pipeline(fixtures::A4);
        let deltas: Vec<_> = (0..3).map(|i| standard_module(&alg, i)).collect();
        // induced map on H_0 of a degree-0 cocycle
        let induced = |i: usize, j: usize, coeffs: &[Scalar]| -> crate::modules::ModuleMorphism {
            let e: ComplexElem = (i, j, 0, coeffs.to_vec());
            let amats = complex.elem_to_amats(&e);
            let f0 = amats.get(&0).cloned().unwrap_or_else(|| {
                crate::homotopy::AMat::zero(
                    &alg,
                    complex.resolutions[i].terms[0].clone(),
                    complex.resolutions[j].terms[0].clone(),
                )
            });
            let f0m = crate::homotopy::amat_to_morphism(
                &alg,
                &f0,
                &complex.resolutions[i].sums[0],
                &complex.resolutions[j].sums[0],
            );
            // cover_j ∘ f0 factors through cover_i
            let ci = &complex.resolutions[i].cover;
            let cj = &complex.resolutions[j].cover;
            let mats: Vec<Mat> = (0..alg.n_vertices())
                .map(|v| {
                    // solve induced * ci = cj * f0 columnwise
                    let rhs = &cj.mats[v] * &f0m.mats[v];
                    let m = &ci.mats[v];
                    // right inverse of the surjective cover
                    let mut cols = Vec::new();
                    for c in 0..deltas[i].dims[v] {
                        let mut e = vec![alg.field.zero(); deltas[i].dims[v]];
                        e[c] = alg.field.one();
                        let x = crate::linalg::solve(m, &e).expect("cover is surjective");
                        cols.push(x);
                    }
                    let ri = Mat::from_fn(m.cols, deltas[i].dims[v], alg.field, |r, c| {
                        cols[c][r].clone()
                    });
                    &rhs * &ri
                })
                .collect();
            crate::modules::ModuleMorphism { mats }
        };
        use crate::linalg::Mat;
        // psi: (1,2,0) and phi: (0,2,0); also identities; b2 on
        // (x then psi) where x in Hom(Delta0, Delta1) is zero-dim here, so
        // check unit composites and psi ∘ phi-type pairs that exist
        for (k1, e1) in ainf.basis.iter().enumerate() {
            for (k2, e2) in ainf.basis.iter().enumerate() {
                if e1.deg != 0 || e2.deg != 0 || e1.tgt != e2.src {
                    continue;
                }
                let out = ainf.apply_basis(&[k1, k2]);
                // compose induced module maps
                let r1 = &ext.classes[&(e1.src, e1.tgt, 0)][e1.idx];
                let r2 = &ext.classes[&(e2.src, e2.tgt, 0)][e2.idx];
                let m1 = induced(e1.src, e1.tgt, r1);
                let m2 = induced(e2.src, e2.tgt, r2);
                let comp = crate::modules::ModuleMorphism::compose(&m2.clone(), &m1);
                // expected = sum of induced maps of output classes
                let mut expect: Vec<Mat> = deltas[e1.src]
                    .dims
                    .iter()
                    .zip(&deltas[e2.tgt].dims)
                    .map(|(&a, &b)| Mat::zero(b, a, alg.field))
                    .collect();
                for (o, c) in &out {
                    let eo = &ainf.basis[*o];
                    let ro = &ext.classes[&(eo.src, eo.tgt, 0)][eo.idx];
                    let mo = induced(eo.src, eo.tgt, ro);
                    for (v, m) in mo.mats.iter().enumerate() {
                        expect[v] = &expect[v] + &m.scale(c);
                    }
                }
                for v in 0..alg.n_vertices() {
                    assert_eq!(comp.mats[v], expect[v], "Yoneda mismatch at vertex {v}");
                }
                // stay aligned with the module-level hom computation
                let h = hom_space(&deltas[e1.src], &deltas[e1.tgt]).len();
                assert!(h >= 1);
            }
        }
    }
}
