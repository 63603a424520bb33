//! Finite-dimensional associative algebras by basis and structure constants:
//! radical, primitive idempotents, basicification, Morita fingerprints, and
//! just enough module theory to build standard modules over them.

use crate::error::{QhError, Result};
use crate::linalg::{kernel_basis, rref, solve, Mat, Subspace};
use crate::presentation::PathAlgebra;
use crate::rng::Rng;
use crate::scalar::{FieldCfg, Scalar};

/// An associative unital algebra given by structure constants.
#[derive(Clone, Debug)]
pub struct Sca {
    pub field: FieldCfg,
    pub dim: usize,
    pub unit: Vec<Scalar>,
    /// mult[i][j] = basis_i * basis_j as a coefficient vector
    pub mult: Vec<Vec<Vec<Scalar>>>,
}

impl Sca {
    pub fn zero_vec(&self) -> Vec<Scalar> {
        vec![self.field.zero(); self.dim]
    }

    pub fn mult_vec(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let mut out = self.zero_vec();
        for (i, ci) in x.iter().enumerate() {
            if ci.is_zero() {
                continue;
            }
            for (j, cj) in y.iter().enumerate() {
                if cj.is_zero() {
                    continue;
                }
                let prod = &self.mult[i][j];
                let c = ci * cj;
                for (k, pk) in prod.iter().enumerate() {
                    if !pk.is_zero() {
                        out[k] = &out[k] + &(&c * pk);
                    }
                }
            }
        }
        out
    }

    /// Matrix of left multiplication by x.
    pub fn left_mult(&self, x: &[Scalar]) -> Mat {
        Mat::from_fn(self.dim, self.dim, self.field, |r, c| {
            let mut e = self.zero_vec();
            e[c] = self.field.one();
            let prod = self.mult_vec(x, &e);
            prod[r].clone()
        })
    }

    pub fn is_associative(&self) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                for k in 0..self.dim {
                    let mut ei = self.zero_vec();
                    ei[i] = self.field.one();
                    let mut ej = self.zero_vec();
                    ej[j] = self.field.one();
                    let mut ek = self.zero_vec();
                    ek[k] = self.field.one();
                    let l = self.mult_vec(&self.mult_vec(&ei, &ej), &ek);
                    let r = self.mult_vec(&ei, &self.mult_vec(&ej, &ek));
                    if l != r {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn is_unital(&self) -> bool {
        for i in 0..self.dim {
            let mut e = self.zero_vec();
            e[i] = self.field.one();
            if self.mult_vec(&self.unit, &e) != e || self.mult_vec(&e, &self.unit) != e {
                return false;
            }
        }
        true
    }

    pub fn from_path_algebra(alg: &PathAlgebra) -> Sca {
        let dim = alg.dim();
        let mult = (0..dim)
            .map(|i| (0..dim).map(|j| alg.mult_basis(i, j).to_vec()).collect())
            .collect();
        Sca { field: alg.field, dim, unit: alg.unit_vec(), mult }
    }

    /// The subalgebra spanned by the given vectors (must be closed under
    /// multiplication and contain the given unit), as a new Sca plus the
    /// inclusion coordinates.
    pub fn subalgebra(&self, span: &[Vec<Scalar>], unit: &[Scalar]) -> Result<(Sca, Vec<Vec<Scalar>>)> {
        let sub = Subspace::from_spanning(span, self.dim, self.field);
        let basis = sub.basis_rows();
        let d = basis.len();
        let coords = |v: &[Scalar]| -> Result<Vec<Scalar>> {
            let m = Mat::from_fn(self.dim, d, self.field, |r, c| basis[c][r].clone());
            solve(&m, v).ok_or_else(|| QhError::Internal("subalgebra not closed".into()))
        };
        let mut mult = Vec::new();
        for i in 0..d {
            let mut row = Vec::new();
            for j in 0..d {
                let prod = self.mult_vec(&basis[i], &basis[j]);
                row.push(coords(&prod)?);
            }
            mult.push(row);
        }
        let unit_c = coords(unit)?;
        Ok((Sca { field: self.field, dim: d, unit: unit_c, mult }, basis))
    }
}

/// Jacobson radical via the trace form of the regular representation:
/// rad = { x : tr(L_{x b}) = 0 for all basis b }. Valid in characteristic 0
/// and for p > dim; the result is certified nilpotent.
pub fn radical_sca(a: &Sca) -> Result<Subspace> {
    if let FieldCfg::Fp(p) = a.field {
        if (p as usize) <= a.dim {
            return Err(QhError::FieldExtension(format!(
                "radical computation needs p > dim ({} <= {})",
                p, a.dim
            )));
        }
    }
    let mut rows = Vec::new();
    for b in 0..a.dim {
        let mut row = Vec::new();
        for x in 0..a.dim {
            let mut ex = a.zero_vec();
            ex[x] = a.field.one();
            let mut eb = a.zero_vec();
            eb[b] = a.field.one();
            let prod = a.mult_vec(&ex, &eb);
            let l = a.left_mult(&prod);
            let mut tr = a.field.zero();
            for k in 0..a.dim {
                tr = &tr + l.at(k, k);
            }
            row.push(tr);
        }
        rows.push(row);
    }
    let m = Mat::from_rows(rows, a.dim, a.field);
    let rad_basis = kernel_basis(&m);
    let rad = Subspace::from_spanning(&rad_basis, a.dim, a.field);
    // certify nilpotency
    let mut power = rad.basis_rows();
    for _ in 0..=a.dim {
        if power.is_empty() {
            return Ok(rad);
        }
        let mut next = Vec::new();
        for x in &power {
            for y in rad.basis_rows() {
                let p = a.mult_vec(x, &y);
                if p.iter().any(|c| !c.is_zero()) {
                    next.push(p);
                }
            }
        }
        let s = Subspace::from_spanning(&next, a.dim, a.field);
        power = s.basis_rows();
    }
    Err(QhError::Internal("trace-form radical is not nilpotent".into()))
}

/// Newton-lift an idempotent-mod-rad to an honest idempotent.
fn lift_idempotent(a: &Sca, e0: &[Scalar]) -> Vec<Scalar> {
    let mut e = e0.to_vec();
    for _ in 0..=a.dim {
        let e2 = a.mult_vec(&e, &e);
        if e2 == e {
            return e;
        }
        // e := 3e^2 - 2e^3
        let e3 = a.mult_vec(&e2, &e);
        let three = a.field.from_i64(3);
        let two = a.field.from_i64(2);
        e = e2
            .iter()
            .zip(&e3)
            .map(|(x2, x3)| &(&three * x2) - &(&two * x3))
            .collect();
    }
    panic!("idempotent lifting did not converge");
}

/// Roots in the field of a monic polynomial given by coefficients
/// (constant first).
fn field_roots(field: FieldCfg, poly: &[Scalar]) -> Vec<Scalar> {
    let eval = |x: &Scalar| -> Scalar {
        let mut acc = field.zero();
        let mut pw = field.one();
        for c in poly {
            acc = &acc + &(c * &pw);
            pw = &pw * x;
        }
        acc
    };
    match field {
        FieldCfg::Fp(p) => (0..p)
            .map(|v| Scalar::Fp { p, v })
            .filter(|x| eval(x).is_zero())
            .collect(),
        FieldCfg::Q => {
            // rational root theorem on the integer-scaled polynomial
            use num_bigint::BigInt;
            use num_traits::{One, Signed, Zero};
            let rats: Vec<num_rational::BigRational> = poly
                .iter()
                .map(|c| match c {
                    Scalar::Q(r) => r.clone(),
                    _ => unreachable!(),
                })
                .collect();
            let lcm_den = rats
                .iter()
                .fold(BigInt::one(), |acc, r| num_integer::lcm(acc, r.denom().clone()));
            let ints: Vec<BigInt> = rats
                .iter()
                .map(|r| r.numer() * &lcm_den / r.denom())
                .collect();
            let lead = ints.iter().rev().find(|c| !c.is_zero());
            let cons = ints.iter().find(|c| !c.is_zero());
            let (Some(lead), Some(cons)) = (lead, cons) else {
                return vec![field.zero()];
            };
            let divisors = |n: &BigInt| -> Vec<BigInt> {
                let n = n.abs();
                let mut out = Vec::new();
                let mut d = BigInt::one();
                while &d * &d <= n {
                    if (&n % &d).is_zero() {
                        out.push(d.clone());
                        out.push(&n / &d);
                    }
                    d += 1;
                }
                out
            };
            let mut roots = Vec::new();
            let mut seen = std::collections::BTreeSet::new();
            for p in divisors(cons) {
                for q in divisors(lead) {
                    for sign in [1i64, -1] {
                        let cand = num_rational::BigRational::new(
                            &p * BigInt::from(sign),
                            q.clone(),
                        );
                        let s = Scalar::Q(cand);
                        if seen.insert(format!("{s}")) && eval(&s).is_zero() {
                            roots.push(s);
                        }
                    }
                }
            }
            if eval(&field.zero()).is_zero() {
                roots.push(field.zero());
            }
            roots
        }
    }
}

/// Minimal polynomial of x inside the corner algebra, monic, constant first.
fn minimal_poly(a: &Sca, x: &[Scalar]) -> Vec<Scalar> {
    let mut powers: Vec<Vec<Scalar>> = vec![a.unit.clone()];
    loop {
        let last = powers.last().unwrap();
        let next = a.mult_vec(last, x);
        // check dependence of powers ∪ {next}
        let mut rows = powers.clone();
        rows.push(next.clone());
        let m = Mat::from_rows(rows.clone(), a.dim, a.field);
        let r = rref(&m);
        if r.rank < rows.len() {
            // solve for the dependence: next = sum c_k powers[k]
            let mt = Mat::from_fn(a.dim, powers.len(), a.field, |r2, c2| {
                powers[c2][r2].clone()
            });
            let cs = solve(&mt, &next).expect("dependence exists");
            // p(t) = t^n - sum c_k t^k
            let mut poly = vec![a.field.zero(); powers.len() + 1];
            for (k, c) in cs.iter().enumerate() {
                poly[k] = -c;
            }
            poly[powers.len()] = a.field.one();
            return poly;
        }
        powers.push(next);
    }
}

/// Synthetic division of a monic polynomial (constant first) by (t - root).
fn divide_by_root(field: FieldCfg, poly: &[Scalar], root: &Scalar) -> Vec<Scalar> {
    let n = poly.len() - 1;
    let mut quotient = vec![field.zero(); n];
    let mut carry = field.zero();
    for k in (0..n).rev() {
        let c = &poly[k + 1] + &carry;
        quotient[k] = c.clone();
        carry = &c * root;
    }
    quotient
}

fn eval_poly(field: FieldCfg, poly: &[Scalar], x: &Scalar) -> Scalar {
    let mut acc = field.zero();
    let mut pw = field.one();
    for c in poly {
        acc = &acc + &(c * &pw);
        pw = &pw * x;
    }
    acc
}

/// A complete set of orthogonal primitive idempotents of the corner uAu.
/// Works in the semisimple quotient of the corner: peel one idempotent from
/// a rational eigenvalue of some element, lift it, recurse into the two
/// complementary corners. Errors when every candidate's minimal polynomial
/// has no rational root with a nontrivial cofactor.
fn primitive_system_in_corner(a: &Sca, u: &[Scalar], rng: &mut Rng) -> Result<Vec<Vec<Scalar>>> {
    let mut span = Vec::new();
    for i in 0..a.dim {
        let mut e = a.zero_vec();
        e[i] = a.field.one();
        span.push(a.mult_vec(&a.mult_vec(u, &e), u));
    }
    let (corner, basis) = a.subalgebra(&span, u)?;
    let to_ambient = |v: &[Scalar]| -> Vec<Scalar> {
        let mut out = a.zero_vec();
        for (k, c) in v.iter().enumerate() {
            for (j, b) in basis[k].iter().enumerate() {
                out[j] = &out[j] + &(c * b);
            }
        }
        out
    };
    if corner.dim == 1 {
        return Ok(vec![u.to_vec()]);
    }
    // semisimple quotient of the corner
    let rad = radical_sca(&corner)?;
    if corner.dim - rad.dim() == 1 {
        return Ok(vec![u.to_vec()]); // local corner: u is primitive
    }
    let qdim = rad.quotient_dim();
    let qmult: Vec<Vec<Vec<Scalar>>> = (0..qdim)
        .map(|i| {
            (0..qdim)
                .map(|j| {
                    let mut ei = vec![corner.field.zero(); qdim];
                    ei[i] = corner.field.one();
                    let mut ej = vec![corner.field.zero(); qdim];
                    ej[j] = corner.field.one();
                    let prod = corner.mult_vec(&rad.lift(&ei), &rad.lift(&ej));
                    rad.quotient_coords(&prod)
                })
                .collect()
        })
        .collect();
    let qbar = Sca {
        field: corner.field,
        dim: qdim,
        unit: rad.quotient_coords(&corner.unit),
        mult: qmult,
    };

    let mut candidates: Vec<Vec<Scalar>> = Vec::new();
    for i in 0..qbar.dim {
        let mut e = qbar.zero_vec();
        e[i] = qbar.field.one();
        candidates.push(e);
    }
    for _ in 0..128 {
        candidates.push(
            (0..qbar.dim)
                .map(|_| qbar.field.from_i64(rng.small_int(3)))
                .collect(),
        );
    }
    for z in candidates {
        if z.iter().all(|c| c.is_zero()) {
            continue;
        }
        let poly = minimal_poly(&qbar, &z);
        if poly.len() <= 2 {
            continue;
        }
        let roots = field_roots(qbar.field, &poly);
        for lambda in &roots {
            // e = g(z)/g(lambda) where g = poly/(t - lambda); squarefree
            // minimal polynomials make this an idempotent
            let g = divide_by_root(qbar.field, &poly, lambda);
            let g_at = eval_poly(qbar.field, &g, lambda);
            if g_at.is_zero() {
                continue; // repeated root: semisimple quotient forbids it
            }
            let mut gz = qbar.zero_vec();
            let mut pw = qbar.unit.clone();
            for c in &g {
                for (k, p) in pw.iter().enumerate() {
                    gz[k] = &gz[k] + &(c * p);
                }
                pw = qbar.mult_vec(&pw, &z);
            }
            let inv = g_at.inv();
            let ebar: Vec<Scalar> = gz.iter().map(|c| c * &inv).collect();
            if ebar.iter().all(|c| c.is_zero())
                || ebar
                    .iter()
                    .zip(&qbar.unit)
                    .all(|(x, y)| (x - y).is_zero())
            {
                continue;
            }
            if qbar.mult_vec(&ebar, &ebar) != ebar {
                continue;
            }
            // lift to the corner and split
            let e = lift_idempotent(&corner, &rad.lift(&ebar));
            let cu: Vec<Scalar> = corner
                .unit
                .iter()
                .zip(&e)
                .map(|(x, y)| x - y)
                .collect();
            let e_amb = to_ambient(&e);
            let cu_amb = to_ambient(&cu);
            let mut out = primitive_system_in_corner(a, &e_amb, rng)?;
            out.extend(primitive_system_in_corner(a, &cu_amb, rng)?);
            return Ok(out);
        }
    }
    Err(QhError::FieldExtension(
        "no element of the corner splits over the ground field; \
         a field extension would be required"
            .into(),
    ))
}

/// Complete set of primitive orthogonal idempotents refining the given
/// orthogonal decomposition of the unit (pass `[unit]` when there is none).
pub fn primitive_idempotents(a: &Sca, anchors: &[Vec<Scalar>]) -> Result<Vec<Vec<Vec<Scalar>>>> {
    let mut rng = Rng::new(0x1d10_7e4b);
    let mut out = Vec::new();
    for u in anchors {
        let prims = primitive_system_in_corner(a, u, &mut rng)?;
        // orthogonalize within the corner (spectral construction already
        // gives orthogonality; verify)
        for (i, e) in prims.iter().enumerate() {
            let ee = a.mult_vec(e, e);
            if &ee != e {
                return Err(QhError::Internal("primitive candidate not idempotent".into()));
            }
            for f in prims.iter().skip(i + 1) {
                if a.mult_vec(e, f).iter().any(|c| !c.is_zero())
                    || a.mult_vec(f, e).iter().any(|c| !c.is_zero())
                {
                    return Err(QhError::Internal("primitive candidates not orthogonal".into()));
                }
            }
        }
        let total = prims.iter().fold(a.zero_vec(), |acc, e| {
            acc.iter().zip(e).map(|(x, y)| x + y).collect()
        });
        if &total != u {
            return Err(QhError::Internal("primitive system does not sum to the anchor".into()));
        }
        out.push(prims);
    }
    Ok(out)
}

/// Are two idempotents equivalent (same simple block)? Checked modulo the
/// radical: e A f != 0 in the semisimple quotient.
fn equivalent_idempotents(a: &Sca, rad: &Subspace, e: &[Scalar], f: &[Scalar]) -> bool {
    for i in 0..a.dim {
        let mut x = a.zero_vec();
        x[i] = a.field.one();
        let exf = a.mult_vec(&a.mult_vec(e, &x), f);
        if !rad.contains(&exf) {
            return true;
        }
    }
    false
}

/// The basic algebra of an Sca together with class bookkeeping.
#[derive(Clone, Debug)]
pub struct Basicified {
    pub basic: Sca,
    /// chosen primitive idempotent per class, in basic coordinates
    pub idempotents: Vec<Vec<Scalar>>,
    /// multiplicity of each class in the original algebra
    pub multiplicities: Vec<usize>,
    /// inclusion: basic basis vectors in ambient coordinates
    pub inclusion: Vec<Vec<Scalar>>,
}

/// Compute the basic algebra e A e for one primitive idempotent per
/// isomorphism class. When anchors are given, classes are required to align
/// with them (one class per anchor, ordered accordingly).
pub fn basicify(a: &Sca, anchors: Option<&[Vec<Scalar>]>) -> Result<Basicified> {
    if !a.is_associative() || !a.is_unital() {
        return Err(QhError::Verification("basicify: input is not associative unital".into()));
    }
    let rad = radical_sca(a)?;
    let anchor_vec: Vec<Vec<Scalar>> = match anchors {
        Some(list) => list.to_vec(),
        None => vec![a.unit.clone()],
    };
    let per_anchor = primitive_idempotents(a, &anchor_vec)?;

    // group primitives into classes
    let mut class_reps: Vec<Vec<Scalar>> = Vec::new();
    let mut class_mult: Vec<usize> = Vec::new();
    let mut class_of_anchor: Vec<Vec<usize>> = Vec::new();
    for prims in &per_anchor {
        let mut classes_here = Vec::new();
        for e in prims {
            let found = class_reps
                .iter()
                .position(|r| equivalent_idempotents(a, &rad, r, e));
            match found {
                Some(k) => {
                    class_mult[k] += 1;
                    classes_here.push(k);
                }
                None => {
                    class_reps.push(e.clone());
                    class_mult.push(1);
                    classes_here.push(class_reps.len() - 1);
                }
            }
        }
        class_of_anchor.push(classes_here);
    }
    if anchors.is_some() {
        // each anchor must refine into a single class, distinct per anchor
        let mut seen = std::collections::BTreeSet::new();
        for classes in &class_of_anchor {
            let first = classes.first().copied();
            if classes.iter().any(|&c| Some(c) != first) {
                return Err(QhError::Internal(
                    "anchor idempotent splits into inequivalent primitives".into(),
                ));
            }
            if let Some(c) = first {
                if !seen.insert(c) {
                    return Err(QhError::Internal("two anchors share a class".into()));
                }
            }
        }
    }

    // e = sum of class representatives; basic = eAe
    let e_total = class_reps.iter().fold(a.zero_vec(), |acc, e| {
        acc.iter().zip(e).map(|(x, y)| x + y).collect()
    });
    let mut span = Vec::new();
    for i in 0..a.dim {
        let mut x = a.zero_vec();
        x[i] = a.field.one();
        span.push(a.mult_vec(&a.mult_vec(&e_total, &x), &e_total));
    }
    let (basic, inclusion) = a.subalgebra(&span, &e_total)?;
    // class idempotents in basic coordinates
    let coords = |v: &[Scalar]| -> Vec<Scalar> {
        let m = Mat::from_fn(a.dim, basic.dim, a.field, |r, c| inclusion[c][r].clone());
        solve(&m, v).expect("class representative lies in the corner")
    };
    let idempotents: Vec<Vec<Scalar>> = class_reps.iter().map(|e| coords(e)).collect();
    Ok(Basicified { basic, idempotents, multiplicities: class_mult, inclusion })
}

/// Decidable Morita surrogate: simple count, Cartan matrix, quiver arrow
/// counts, and standard-module dimension vectors, all over the inherited
/// class order.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MoritaFingerprint {
    pub n_simples: usize,
    pub cartan: Vec<Vec<usize>>,
    pub arrow_counts: Vec<Vec<usize>>,
    pub delta_dims: Vec<Vec<usize>>,
}

pub fn fingerprint_equal(a: &MoritaFingerprint, b: &MoritaFingerprint) -> bool {
    a == b
}

/// A module over an Sca: a vector space with one action matrix per basis
/// element of the algebra.
#[derive(Clone, Debug)]
pub struct ScaModule {
    pub dim: usize,
    pub act: Vec<Mat>,
}

impl ScaModule {
    pub fn act_vec(&self, a: &Sca, x: &[Scalar]) -> Mat {
        let mut m = Mat::zero(self.dim, self.dim, a.field);
        for (k, c) in x.iter().enumerate() {
            if !c.is_zero() {
                m = &m + &self.act[k].scale(c);
            }
        }
        m
    }

    pub fn is_module(&self, a: &Sca) -> bool {
        // unit acts as identity and the action respects multiplication
        if !self.act_vec(a, &a.unit).is_identity() {
            return false;
        }
        for i in 0..a.dim {
            for j in 0..a.dim {
                let mut ei = a.zero_vec();
                ei[i] = a.field.one();
                let mut ej = a.zero_vec();
                ej[j] = a.field.one();
                let prod = a.mult_vec(&ei, &ej);
                let lhs = self.act_vec(a, &prod);
                let rhs = &self.act[i] * &self.act[j];
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }
}

/// The left module A·e for an idempotent e, with its basis inside A.
pub fn left_ideal_module(a: &Sca, e: &[Scalar]) -> (ScaModule, Vec<Vec<Scalar>>) {
    let mut span = Vec::new();
    for i in 0..a.dim {
        let mut x = a.zero_vec();
        x[i] = a.field.one();
        span.push(a.mult_vec(&x, e));
    }
    let sub = Subspace::from_spanning(&span, a.dim, a.field);
    let basis = sub.basis_rows();
    let d = basis.len();
    let bm = Mat::from_fn(a.dim, d, a.field, |r, c| basis[c][r].clone());
    let mut act = Vec::new();
    for i in 0..a.dim {
        let mut x = a.zero_vec();
        x[i] = a.field.one();
        let mut m = Mat::zero(d, d, a.field);
        for c in 0..d {
            let img = a.mult_vec(&x, &basis[c]);
            let coords = solve(&bm, &img).expect("left ideal closed");
            for (r, v) in coords.into_iter().enumerate() {
                m.set(r, c, v);
            }
        }
        act.push(m);
    }
    (ScaModule { dim: d, act }, basis)
}

/// Quotient of a module by an action-closed subspace.
pub fn quotient_module(a: &Sca, m: &ScaModule, sub: &Subspace) -> (ScaModule, Mat) {
    let field = a.field;
    let q = sub.quotient_dim();
    let mut act = Vec::new();
    for i in 0..a.dim {
        let mut out = Mat::zero(q, q, field);
        for c in 0..q {
            let mut qv = vec![field.zero(); q];
            qv[c] = field.one();
            let amb = sub.lift(&qv);
            let img = m.act[i].apply(&amb);
            let coords = sub.quotient_coords(&img);
            for (r, v) in coords.into_iter().enumerate() {
                out.set(r, c, v);
            }
        }
        act.push(out);
    }
    let proj = Mat::from_fn(q, m.dim, field, |r, c| {
        let mut e = vec![field.zero(); m.dim];
        e[c] = field.one();
        sub.quotient_coords(&e)[r].clone()
    });
    (ScaModule { dim: q, act }, proj)
}

/// Close a spanning set under the algebra action.
pub fn generated_submodule(a: &Sca, m: &ScaModule, gens: &[Vec<Scalar>]) -> Subspace {
    let mut spans: Vec<Vec<Scalar>> = gens.to_vec();
    loop {
        let sub = Subspace::from_spanning(&spans, m.dim, a.field);
        let mut grew = false;
        for b in sub.basis_rows() {
            for i in 0..a.dim {
                let img = m.act[i].apply(&b);
                if img.iter().any(|c| !c.is_zero()) && !sub.contains(&img) {
                    spans.push(img);
                    grew = true;
                }
            }
        }
        if !grew {
            return sub;
        }
    }
}

/// rad(A)·M as a subspace.
pub fn radical_submodule(a: &Sca, rad: &Subspace, m: &ScaModule) -> Subspace {
    let mut spans = Vec::new();
    for r in rad.basis_rows() {
        let act = m.act_vec(a, &r);
        for c in 0..m.dim {
            let mut e = vec![a.field.zero(); m.dim];
            e[c] = a.field.one();
            let img = act.apply(&e);
            if img.iter().any(|x| !x.is_zero()) {
                spans.push(img);
            }
        }
    }
    generated_submodule(a, m, &spans)
}

/// Hom of Sca modules.
pub fn hom_modules(a: &Sca, x: &ScaModule, y: &ScaModule) -> Vec<Mat> {
    let field = a.field;
    let total = y.dim * x.dim;
    let mut rows = Vec::new();
    for i in 0..a.dim {
        for r in 0..y.dim {
            for c in 0..x.dim {
                let mut row = vec![field.zero(); total];
                for k in 0..x.dim {
                    row[r * x.dim + k] = &row[r * x.dim + k] + x.act[i].at(k, c);
                }
                for k in 0..y.dim {
                    row[k * x.dim + c] = &row[k * x.dim + c] - y.act[i].at(r, k);
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
        .map(|sol| Mat::from_fn(y.dim, x.dim, field, |r, c| sol[r * x.dim + c].clone()))
        .collect()
}

/// Explicit module isomorphism search.
pub fn find_module_isomorphism(a: &Sca, x: &ScaModule, y: &ScaModule) -> Option<Mat> {
    if x.dim != y.dim {
        return None;
    }
    let homs = hom_modules(a, x, y);
    for h in &homs {
        if h.inverse().is_some() {
            return Some(h.clone());
        }
    }
    let mut rng = Rng::new(0xabcd_1234);
    for _ in 0..128 {
        let mut m = Mat::zero(y.dim, x.dim, a.field);
        for h in &homs {
            m = &m + &h.scale(&a.field.from_i64(rng.small_int(3)));
        }
        if m.inverse().is_some() {
            return Some(m);
        }
    }
    None
}

/// Standard module for an ordered set of primitive idempotents:
/// Delta(i) = A e_i / (trace of A e_j for j > i).
pub fn standard_sca(a: &Sca, idems: &[Vec<Scalar>], i: usize) -> ScaModule {
    let (p, basis) = left_ideal_module(a, &idems[i]);
    // trace: submodule generated by e_j * (elements of A e_i) for j > i
    let mut gens = Vec::new();
    for (c, b) in basis.iter().enumerate() {
        for ej in idems.iter().skip(i + 1) {
            let v = a.mult_vec(ej, b);
            if v.iter().any(|x| !x.is_zero()) {
                // coordinates of v inside the ideal basis
                let bm = Mat::from_fn(a.dim, basis.len(), a.field, |r, cc| basis[cc][r].clone());
                if let Some(coords) = solve(&bm, &v) {
                    gens.push(coords);
                }
            }
        }
        let _ = c;
    }
    let sub = generated_submodule(a, &p, &gens);
    quotient_module(a, &p, &sub).0
}

/// Dimension vector of a module: dim e_i·M per class idempotent.
pub fn dim_vector(a: &Sca, idems: &[Vec<Scalar>], m: &ScaModule) -> Vec<usize> {
    idems
        .iter()
        .map(|e| m.act_vec(a, e).rank())
        .collect()
}

/// Fingerprint of a basicified algebra with its ordered idempotents.
pub fn fingerprint_of_basic(a: &Sca, idems: &[Vec<Scalar>]) -> Result<MoritaFingerprint> {
    let n = idems.len();
    let rad = radical_sca(a)?;
    let slice_dim = |e_left: &[Scalar], e_right: &[Scalar], inside: Option<&Subspace>| -> usize {
        let mut span = Vec::new();
        for i in 0..a.dim {
            let mut x = a.zero_vec();
            x[i] = a.field.one();
            let v = a.mult_vec(&a.mult_vec(e_left, &x), e_right);
            match inside {
                Some(s) => {
                    // project x into the subspace first
                    if s.contains(&v) {
                        span.push(v);
                    } else {
                        // e (rad) e: intersect by multiplying radical basis
                    }
                }
                None => span.push(v),
            }
        }
        Subspace::from_spanning(&span, a.dim, a.field).dim()
    };
    let mut cartan = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            cartan[i][j] = slice_dim(&idems[i], &idems[j], None);
        }
    }
    // rad and rad^2 slices
    let rad_rows = rad.basis_rows();
    let mut rad2_rows = Vec::new();
    for x in &rad_rows {
        for y in &rad_rows {
            let p = a.mult_vec(x, y);
            if p.iter().any(|c| !c.is_zero()) {
                rad2_rows.push(p);
            }
        }
    }
    let corner_dim = |rows: &[Vec<Scalar>], i: usize, j: usize| -> usize {
        let mut span = Vec::new();
        for v in rows {
            let w = a.mult_vec(&a.mult_vec(&idems[j], v), &idems[i]);
            if w.iter().any(|c| !c.is_zero()) {
                span.push(w);
            }
        }
        Subspace::from_spanning(&span, a.dim, a.field).dim()
    };
    let mut arrow_counts = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let r1 = corner_dim(&rad_rows, i, j);
            let r2 = corner_dim(&rad2_rows, i, j);
            arrow_counts[i][j] = r1 - r2;
        }
    }
    let mut delta_dims = Vec::new();
    for i in 0..n {
        let d = standard_sca(a, idems, i);
        delta_dims.push(dim_vector(a, idems, &d));
    }
    Ok(MoritaFingerprint { n_simples: n, cartan, arrow_counts, delta_dims })
}

/// Fingerprint of a path algebra under its vertex order.
pub fn fingerprint_of_path_algebra(alg: &PathAlgebra) -> Result<MoritaFingerprint> {
    let a = Sca::from_path_algebra(alg);
    let idems: Vec<Vec<Scalar>> = (0..alg.n_vertices())
        .map(|v| {
            let mut e = a.zero_vec();
            e[alg.trivial(v)] = a.field.one();
            e
        })
        .collect();
    fingerprint_of_basic(&a, &idems)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// k x M_2(k): 5-dimensional, basic algebra k x k.
    fn k_plus_m2() -> Sca {
        let field = FieldCfg::Q;
        // basis: u (the k factor), e11, e12, e21, e22
        let dim = 5;
        let mut mult = vec![vec![vec![field.zero(); dim]; dim]; dim];
        let mij = |i: usize, j: usize| 1 + i * 2 + j;
        let mut set = |a: usize, b: usize, c: usize, m: &mut Vec<Vec<Vec<Scalar>>>| {
            m[a][b][c] = field.one();
        };
        set(0, 0, 0, &mut mult);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        if j == k {
                            set(mij(i, j), mij(k, l), mij(i, l), &mut mult);
                        }
                    }
                }
            }
        }
        let mut unit = vec![field.zero(); dim];
        unit[0] = field.one();
        unit[mij(0, 0)] = field.one();
        unit[mij(1, 1)] = field.one();
        Sca { field, dim, unit, mult }
    }

    #[test]
    fn k_plus_m2_is_sane() {
        let a = k_plus_m2();
        assert!(a.is_associative());
        assert!(a.is_unital());
    }

    #[test]
    fn semisimple_radical_is_zero() {
        let a = k_plus_m2();
        let rad = radical_sca(&a).unwrap();
        assert_eq!(rad.dim(), 0);
    }

    #[test]
    fn basicify_k_plus_m2() {
        let a = k_plus_m2();
        let b = basicify(&a, None).unwrap();
        assert_eq!(b.basic.dim, 2);
        let mut mults = b.multiplicities.clone();
        mults.sort();
        assert_eq!(mults, vec![1, 2]);
    }

    #[test]
    fn basicify_full_matrix_algebra() {
        // M_3(k): basic algebra k, multiplicity 3
        let field = FieldCfg::Q;
        let dim = 9;
        let mij = |i: usize, j: usize| i * 3 + j;
        let mut mult = vec![vec![vec![field.zero(); dim]; dim]; dim];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        if j == k {
                            mult[mij(i, j)][mij(k, l)][mij(i, l)] = field.one();
                        }
                    }
                }
            }
        }
        let mut unit = vec![field.zero(); dim];
        for i in 0..3 {
            unit[mij(i, i)] = field.one();
        }
        let a = Sca { field, dim, unit, mult };
        let b = basicify(&a, None).unwrap();
        assert_eq!(b.basic.dim, 1);
        assert_eq!(b.multiplicities, vec![3]);
    }

    #[test]
    fn fingerprints_distinguish_k2_from_k() {
        let field = FieldCfg::Q;
        let k2 = Sca {
            field,
            dim: 2,
            unit: vec![field.one(), field.one()],
            mult: vec![
                vec![vec![field.one(), field.zero()], vec![field.zero(), field.zero()]],
                vec![vec![field.zero(), field.zero()], vec![field.zero(), field.one()]],
            ],
        };
        let b2 = basicify(&k2, None).unwrap();
        let f2 = fingerprint_of_basic(&b2.basic, &b2.idempotents).unwrap();
        let k1 = Sca {
            field,
            dim: 1,
            unit: vec![field.one()],
            mult: vec![vec![vec![field.one()]]],
        };
        let b1 = basicify(&k1, None).unwrap();
        let f1 = fingerprint_of_basic(&b1.basic, &b1.idempotents).unwrap();
        assert!(!fingerprint_equal(&f1, &f2));
        assert_eq!(f2.n_simples, 2);
    }

    #[test]
    fn nilpotent_algebra_radical() {
        // k[x]/(x^2): radical is (x)
        let field = FieldCfg::Q;
        let a = Sca {
            field,
            dim: 2,
            unit: vec![field.one(), field.zero()],
            mult: vec![
                vec![vec![field.one(), field.zero()], vec![field.zero(), field.one()]],
                vec![vec![field.zero(), field.one()], vec![field.zero(), field.zero()]],
            ],
        };
        let rad = radical_sca(&a).unwrap();
        assert_eq!(rad.dim(), 1);
        let b = basicify(&a, None).unwrap();
        assert_eq!(b.basic.dim, 2);
        assert_eq!(b.multiplicities, vec![1]);
    }

    #[test]
    fn standard_modules_of_path_algebra_match() {
        use crate::dsl::parse_algebra;
        use crate::presentation::build_path_algebra;
        let src = parse_algebra(crate::fixtures::A1).unwrap();
        let alg = build_path_algebra(FieldCfg::Q, src.quiver, src.relations, None).unwrap();
        let a = Sca::from_path_algebra(&alg);
        let idems: Vec<Vec<Scalar>> = (0..2)
            .map(|v| {
                let mut e = a.zero_vec();
                e[v] = a.field.one();
                e
            })
            .collect();
        let d1 = standard_sca(&a, &idems, 0);
        let d2 = standard_sca(&a, &idems, 1);
        assert_eq!(dim_vector(&a, &idems, &d1), vec![1, 0]);
        assert_eq!(dim_vector(&a, &idems, &d2), vec![1, 1]);
    }

    #[test]
    fn fingerprint_of_a1_path_algebra() {
        use crate::dsl::parse_algebra;
        use crate::presentation::build_path_algebra;
        let src = parse_algebra(crate::fixtures::A1).unwrap();
        let alg = build_path_algebra(FieldCfg::Q, src.quiver, src.relations, None).unwrap();
        let f = fingerprint_of_path_algebra(&alg).unwrap();
        assert_eq!(f.n_simples, 2);
        assert_eq!(f.delta_dims, vec![vec![1, 0], vec![1, 1]]);
        // one arrow each way
        assert_eq!(f.arrow_counts[0][1] + f.arrow_counts[1][0], 2);
    }

    #[test]
    fn fp_field_roots() {
        let f = FieldCfg::Fp(7);
        // x^2 - 1 = (x-1)(x+1)
        let poly = vec![f.from_i64(-1), f.zero(), f.one()];
        let mut roots = field_roots(f, &poly);
        roots.sort_by_key(|s| format!("{s}"));
        assert_eq!(roots.len(), 2);
    }
}
