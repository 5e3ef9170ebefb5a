//! K-theory witness operators on the quantum Stiefel algebras `C(S_q^{n,2})`.
//!
//! Each witness is available as exact path data (a [`PathSum`]) and as a
//! materialized operator. The unitaries `U_k, V_k, u_k, v_k` are also built
//! from inside the algebra, through spectral projections of generator
//! products, and the two constructions are compared.
//!
//! Slot layout: the torus factors, then one Fock factor per letter of the
//! word. For `χ_{ω_k}` that is `n−2` slots for `ω_{n−2,1}` followed by `k−1`
//! slots for `ω_{n−1,n−k+1}`. `p_r` is `p^{⊗r}` and `1_r` the identity on `r`
//! slots.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coxeter::{omega_ji, omega_word};
use crate::fock::{spectral_projection_one, AtomKind, FactorSpace, SparseOp, DENSE_LIMIT};
use crate::relations::ResidualReport;
use crate::symrep::{build_rep, Materializer, PathSum, Realization, TorusMode, TorusMonomial, TorusRealization};
use crate::{Error, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessKind {
    Unitary,
    Isometry,
    Coisometry,
    Projection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DirectFormula,
    AlgebraInternal,
}

#[derive(Clone, Debug)]
pub struct KWitness {
    pub name: String,
    pub operator: SparseOp,
    pub kind: WitnessKind,
    pub provenance: Provenance,
}

impl KWitness {
    pub fn new(name: impl Into<String>, operator: SparseOp, kind: WitnessKind, provenance: Provenance) -> Self {
        KWitness { name: name.into(), operator, kind, provenance }
    }

    /// The residuals that define the kind, on the interior at Fock depth 1.
    pub fn kind_residuals(&self) -> Result<Vec<(String, f64)>, Error> {
        let w = &self.operator;
        let id = SparseOp::identity(w.shape().to_vec(), w.block());
        let ws = w.adjoint();
        let mut out = Vec::new();
        if matches!(self.kind, WitnessKind::Unitary | WitnessKind::Isometry) {
            out.push(("W*W-1".into(), ws.mul(w)?.interior_residual(&id, 1)?));
        }
        if matches!(self.kind, WitnessKind::Unitary | WitnessKind::Coisometry) {
            out.push(("WW*-1".into(), w.mul(&ws)?.interior_residual(&id, 1)?));
        }
        if self.kind == WitnessKind::Projection {
            out.push(("W^2-W".into(), w.mul(w)?.interior_residual(w, 1)?));
            out.push(("W-W*".into(), w.interior_residual(&ws, 1)?));
        }
        Ok(out)
    }

    /// Inventory entry: name, kind, shape, residuals, provenance.
    pub fn inventory(&self) -> Result<Value, Error> {
        let residuals: Vec<Value> =
            self.kind_residuals()?.into_iter().map(|(l, v)| json!({"label": l, "value": v})).collect();
        Ok(json!({
            "name": self.name,
            "kind": self.kind,
            "provenance": self.provenance,
            "shape": format!("{:?}", self.operator.shape()),
            "block": self.operator.block(),
            "residuals": residuals,
        }))
    }
}

/// Parameters shared by the witness builders: two torus coordinates,
/// one Fock truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessContext {
    pub q: f64,
    pub fock_dim: usize,
    pub torus: TorusRealization,
    pub tol: f64,
}

impl WitnessContext {
    pub fn new(q: f64, fock_dim: usize, torus: TorusRealization) -> Self {
        WitnessContext { q, fock_dim, torus, tol: 1e-9 }
    }

    pub fn realization(&self) -> Realization {
        Realization::new(self.q, self.fock_dim, 2, self.torus.clone())
    }

    /// Spectral window used for `1_{{1}}`: eigenvalues of the generator
    /// products are 1 or at most `q²`.
    pub fn gap(&self) -> f64 {
        0.9 * (1.0 - self.q * self.q)
    }

    fn params(&self, extra: Value) -> Value {
        let mut v = json!({"q": self.q, "D": self.fock_dim, "torus": format!("{:?}", self.torus)});
        if let (Value::Object(a), Value::Object(b)) = (&mut v, extra) {
            a.extend(b);
        }
        v
    }
}

fn t(j: usize, n: usize) -> TorusMonomial {
    TorusMonomial::generator(j, n)
}

/// Slot list from runs `(atom, count)`.
pub fn runs(parts: &[(AtomKind, usize)]) -> Vec<AtomKind> {
    parts.iter().flat_map(|&(a, c)| std::iter::repeat_n(a, c)).collect()
}

fn mono(n: usize, torus: TorusMonomial, parts: &[(AtomKind, usize)]) -> PathSum {
    PathSum::monomial(n, runs(parts), torus, 1)
}

fn proj(n: usize, parts: &[(AtomKind, usize)]) -> PathSum {
    mono(n, TorusMonomial::one(n), parts)
}

/// `x + 1 − e`.
pub fn lift(x: &PathSum, e: &PathSum) -> Result<PathSum, Error> {
    x.add(&PathSum::identity(x.n(), x.slots()))?.sub(e)
}

fn op_lift(x: &SparseOp, e: &SparseOp) -> Result<SparseOp, Error> {
    let id = SparseOp::identity(x.shape().to_vec(), x.block());
    x.add(&id)?.sub(e)
}

fn symbolic_residual(a: &PathSum, b: &PathSum) -> f64 {
    if a == b {
        0.0
    } else {
        1.0
    }
}

/// Rank of a (numerically) orthogonal projection: eigenvalues above ½,
/// per connected component.
pub fn projection_rank(e: &SparseOp) -> Result<usize, Error> {
    let mut rank = 0;
    for comp in e.components() {
        if comp.len() == 1 {
            rank += usize::from(e.get(comp[0], comp[0]).re > 0.5);
            continue;
        }
        if comp.len() > DENSE_LIMIT {
            return Err(Error::TooLarge { dim: comp.len(), limit: DENSE_LIMIT });
        }
        let k = comp.len();
        let m = DMatrix::from_fn(k, k, |i, j| (e.get(comp[i], comp[j]) + e.get(comp[j], comp[i]).conj()) * 0.5);
        rank += m.symmetric_eigenvalues().iter().filter(|&&l| l > 0.5).count();
    }
    Ok(rank)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum KUnitary {
    /// `U_k`
    BigU,
    /// `V_k`
    BigV,
    /// `u_k`
    SmallU,
    /// `v_k`
    SmallV,
}

impl KUnitary {
    pub const ALL: [KUnitary; 4] = [KUnitary::BigU, KUnitary::BigV, KUnitary::SmallU, KUnitary::SmallV];

    pub fn name(self, k: usize) -> String {
        match self {
            KUnitary::BigU => format!("U_{k}"),
            KUnitary::BigV => format!("V_{k}"),
            KUnitary::SmallU => format!("u_{k}"),
            KUnitary::SmallV => format!("v_{k}"),
        }
    }

    /// Path data of the tensor formula in the `χ_{ω_k}` layout:
    /// `U_k = t₁⊗1_{n−2}⊗p_{k−1} + 1 − 1⊗1_{n−2}⊗p_{k−1}`,
    /// `V_k = t₂⊗p_{n−2}⊗1_{k−1} + …`, `u_k = t₁⊗p_{n−2}⊗p_{k−1} + …`,
    /// `v_k = t₂⊗p_{n−2}⊗p_{k−1} + …`.
    pub fn direct(self, n: usize, k: usize) -> Result<PathSum, Error> {
        check_nk(n, k)?;
        use AtomKind::{One, P};
        let (j, head, tail) = match self {
            KUnitary::BigU => (1, One, P),
            KUnitary::BigV => (2, P, One),
            KUnitary::SmallU => (1, P, P),
            KUnitary::SmallV => (2, P, P),
        };
        let parts = [(head, n - 2), (tail, k - 1)];
        lift(&mono(n, t(j, n), &parts), &proj(n, &parts))
    }
}

fn check_nk(n: usize, k: usize) -> Result<(), Error> {
    if n < 3 || k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("need n >= 3 and 1 <= k <= n, got n={n} k={k}")));
    }
    Ok(())
}

/// A witness built from its tensor formula and, when the functional
/// calculus succeeds, from generators of the algebra.
#[derive(Clone, Debug)]
pub struct DualWitness {
    pub direct: KWitness,
    pub membership: Option<KWitness>,
    pub report: ResidualReport,
}

/// `U_k, V_k, u_k, v_k` in `χ_{ω_k}`, each direct and through
/// `W = Q g + 1 − Q` with `Q = 1_{{1}}(·)` of a generator product:
/// `g = u_{n,n−k+1}` for `U_k`, `u_k`; `g = u_{n−1,1}` for `V_k`, `v_k`;
/// `Q` from `gg*` for the capitals and from `u_{n,n−k+1}u_{n,n−k+1}* u_{n−1,1}u_{n−1,1}*`
/// for the lower-case pair.
pub fn build_k_unitaries(n: usize, k: usize, ctx: &WitnessContext) -> Result<Vec<DualWitness>, Error> {
    check_nk(n, k)?;
    let rm = build_rep(&omega_word(n, 2, k)?, n, TorusMode::Symbolic)?;
    let mut mat = Materializer::new(ctx.realization())?;
    let a = mat.materialize(rm.entry(n, n - k + 1))?;
    let b = mat.materialize(rm.entry(n - 1, 1))?;
    let aa = a.mul(&a.adjoint())?;
    let bb = b.mul(&b.adjoint())?;
    let qa = spectral_projection_one(&aa, ctx.gap());
    let qb = spectral_projection_one(&bb, ctx.gap());
    let qab = aa.mul(&bb).and_then(|x| spectral_projection_one(&x, ctx.gap()));

    let mut out = Vec::new();
    for which in KUnitary::ALL {
        let name = which.name(k);
        let direct = KWitness::new(
            name.clone(),
            mat.materialize(&which.direct(n, k)?)?,
            WitnessKind::Unitary,
            Provenance::DirectFormula,
        );
        let (qr, g) = match which {
            KUnitary::BigU => (&qa, &a),
            KUnitary::BigV => (&qb, &b),
            KUnitary::SmallU => (&qab, &a),
            KUnitary::SmallV => (&qab, &b),
        };
        let mut report = ResidualReport::new(
            &format!("dual construction {name}"),
            "membership of the boundary unitaries",
            ctx.params(json!({"n": n, "k": k, "witness": name})),
            ctx.tol,
        );
        for (l, v) in direct.kind_residuals()? {
            report.push(format!("direct {l}"), v);
        }
        let membership = match qr {
            Ok(qm) => {
                let w = op_lift(&qm.mul(g)?, qm)?;
                let w = KWitness::new(name.clone(), w, WitnessKind::Unitary, Provenance::AlgebraInternal);
                for (l, v) in w.kind_residuals()? {
                    report.push(format!("membership {l}"), v);
                }
                report.push("direct vs membership", direct.operator.interior_residual(&w.operator, 1)?);
                Some(w)
            }
            Err(e) => {
                report.fail(format!("functional calculus: {e}"));
                None
            }
        };
        out.push(DualWitness { direct, membership, report });
    }
    Ok(out)
}

/// The isometric lift `X` of `U_k` and the witness `Y` for `u_k`, both in
/// `χ_{ω_{k+1}}`, for `k < n`.
///
/// `X̃ = t₁⊗1_{n−2}⊗q^N⊗…⊗q^N⊗S*` (`k−1` factors `q^N`) and
/// `X = QX̃ + 1 − Q` with `Q = 1_{{1}}(X̃*X̃)`. Then `X*X = 1`,
/// `1 − XX* = 1⊗1_{n−2}⊗p_k` and contracting the last slot gives `U_k`.
/// `Y = t₁⊗p_{n−2}⊗p_{k−1}⊗S* + 1 − 1⊗p_{n−2}⊗p_{k−1}⊗1` commutes with
/// `v_{k+1}`, and `v_{k+1}(1−YY*) + YY* = t₂⊗p_{n−2}⊗p_k + 1 − 1⊗p_{n−2}⊗p_k`.
pub fn build_boundary_isometries(
    n: usize,
    k: usize,
    ctx: &WitnessContext,
) -> Result<(KWitness, KWitness, ResidualReport), Error> {
    check_nk(n, k)?;
    if k == n {
        return Err(Error::InvalidArgument("the lift needs k < n".into()));
    }
    use AtomKind::{One, Sstar, C, P};
    let mut mat = Materializer::new(ctx.realization())?;
    let mut report = ResidualReport::new(
        "boundary isometries",
        "boundary map on the Stiefel filtration",
        ctx.params(json!({"n": n, "k": k})),
        ctx.tol,
    );

    let x_tilde = mat.materialize(&mono(n, t(1, n), &[(One, n - 2), (C, k - 1), (Sstar, 1)]))?;
    let q_proj = spectral_projection_one(&x_tilde.adjoint().mul(&x_tilde)?, ctx.gap())?;
    let q_direct = mat.materialize(&proj(n, &[(One, n - 2), (P, k - 1), (One, 1)]))?;
    report.push("1_{1}(X~*X~) vs 1⊗1⊗p_{k-1}⊗1", q_proj.interior_residual(&q_direct, 1)?);
    let x_memb = op_lift(&q_proj.mul(&x_tilde)?, &q_proj)?;
    let x_path = lift(
        &mono(n, t(1, n), &[(One, n - 2), (P, k - 1), (Sstar, 1)]),
        &proj(n, &[(One, n - 2), (P, k - 1), (One, 1)]),
    )?;
    let x =
        KWitness::new(format!("X_{k}"), mat.materialize(&x_path)?, WitnessKind::Isometry, Provenance::DirectFormula);
    report.push("X membership vs direct", x_memb.interior_residual(&x.operator, 1)?);
    for (l, v) in x.kind_residuals()? {
        report.push(format!("X {l}"), v);
    }
    let id = SparseOp::identity(x.operator.shape().to_vec(), None);
    let defect = id.sub(&x.operator.mul(&x.operator.adjoint())?)?;
    let pk = mat.materialize(&proj(n, &[(One, n - 2), (P, k)]))?;
    report.push("1-XX* vs 1⊗1⊗p_k", defect.interior_residual(&pk, 1)?);
    report.push(
        "σ(X) = U_k (symbolic)",
        symbolic_residual(&x_path.sigma_contract(n - 2 + k - 1)?, &KUnitary::BigU.direct(n, k)?),
    );

    // The projection onto the p_{n−2} block comes from χ_{ω_k}(u_{n−1,1}*u_{n−1,1}),
    // extended by the identity on the new slot.
    let rm_k = build_rep(&omega_word(n, 2, k)?, n, TorusMode::Symbolic)?;
    let b = mat.materialize(rm_k.entry(n - 1, 1))?;
    let e1 = spectral_projection_one(&b.adjoint().mul(&b)?, ctx.gap())?;
    let fock = mat.atom(One)?;
    let e1 = SparseOp::kron(&[&e1, &fock])?;
    let e12 = e1.mul(&q_proj)?;
    let y_memb = op_lift(&e12.mul(&x_tilde)?, &e12)?;
    let y_path =
        lift(&mono(n, t(1, n), &[(P, n - 2), (P, k - 1), (Sstar, 1)]), &proj(n, &[(P, n - 2), (P, k - 1), (One, 1)]))?;
    let y =
        KWitness::new(format!("Y_{k}"), mat.materialize(&y_path)?, WitnessKind::Isometry, Provenance::DirectFormula);
    report.push("Y membership vs direct", y_memb.interior_residual(&y.operator, 1)?);
    for (l, v) in y.kind_residuals()? {
        report.push(format!("Y {l}"), v);
    }
    let target = mat.materialize(&lift(&mono(n, t(2, n), &[(P, n - 2), (P, k)]), &proj(n, &[(P, n - 2), (P, k)]))?)?;
    let zero = SparseOp::zeros(id.shape().to_vec(), None);
    // v_{k+1} carries p on the slot Y shifts, so the two do not commute;
    // v_k ⊗ 1 is a lift of v_k that does, with the same witness.
    let v_next = mat.materialize(&KUnitary::SmallV.direct(n, k + 1)?)?;
    report.note("[Y, v_{k+1}]", y.operator.commutator(&v_next)?.interior_residual(&zero, 1)?);
    let witness = corollary_witness(&v_next, &y.operator, ctx.tol)?;
    report.push("v_{k+1}(1-YY*)+YY*", witness.interior_residual(&target, 1)?);
    let v_lift = SparseOp::kron(&[&mat.materialize(&KUnitary::SmallV.direct(n, k)?)?, &fock])?;
    report.push("[Y, v_k⊗1]", y.operator.commutator(&v_lift)?.interior_residual(&zero, 1)?);
    let witness = corollary_witness(&v_lift, &y.operator, ctx.tol)?;
    report.push("(v_k⊗1)(1-YY*)+YY*", witness.interior_residual(&target, 1)?);
    report.push(
        "σ(Y) = u_k (symbolic)",
        symbolic_residual(&y_path.sigma_contract(n - 2 + k - 1)?, &KUnitary::SmallU.direct(n, k)?),
    );
    Ok((x, y, report))
}

/// `Z_n = t₁⊗1_{n−2}⊗p_{n−2}⊗S*` and
/// `Y_n = Z_n + 1 − 1⊗1_{n−2}⊗p_{n−2}⊗1` in `χ_{ω_n}`.
pub fn zn_yn_paths(n: usize) -> Result<(PathSum, PathSum), Error> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need n >= 3, got {n}")));
    }
    use AtomKind::{One, Sstar, P};
    let z = mono(n, t(1, n), &[(One, n - 2), (P, n - 2), (Sstar, 1)]);
    let y = lift(&z, &proj(n, &[(One, n - 2), (P, n - 2), (One, 1)]))?;
    Ok((z, y))
}

pub fn build_zn_yn(n: usize, ctx: &WitnessContext) -> Result<(KWitness, KWitness, ResidualReport), Error> {
    use AtomKind::{One, P};
    let (zp, yp) = zn_yn_paths(n)?;
    let mut mat = Materializer::new(ctx.realization())?;
    let z = mat.materialize(&zp)?;
    let y = KWitness::new("Y_n", mat.materialize(&yp)?, WitnessKind::Isometry, Provenance::DirectFormula);
    let mut report = ResidualReport::new("Z_n and Y_n", "isometry Y_n", ctx.params(json!({"n": n})), ctx.tol);
    for (l, v) in y.kind_residuals()? {
        report.push(format!("Y_n {l}"), v);
    }
    let rm = build_rep(&omega_word(n, 2, n)?, n, TorusMode::Symbolic)?;
    let un1 = mat.materialize(rm.entry(n, 1))?;
    let qn = spectral_projection_one(&un1.adjoint().mul(&un1)?, ctx.gap())?;
    let id = SparseOp::identity(z.shape().to_vec(), None);
    let yy = y.operator.mul(&y.operator.adjoint())?;
    report.push("Y_nY_n* vs 1 - 1_{1}(u_n1*u_n1)", yy.interior_residual(&id.sub(&qn)?, 1)?);
    let e = mat.materialize(&proj(n, &[(One, n - 2), (P, n - 2), (One, 1)]))?;
    report.push("Z_n - Y_n(1⊗1⊗p⊗1)", z.interior_residual(&y.operator.mul(&e)?, 0)?);
    let defect = id.sub(&yy)?;
    let target = mat.materialize(&proj(n, &[(One, n - 2), (P, n - 1)]))?;
    report.expect_int("rank(1-Y_nY_n*)", projection_rank(&defect)? as i64, projection_rank(&target)? as i64);
    Ok((KWitness::new("Z_n", z, WitnessKind::Isometry, Provenance::DirectFormula), y, report))
}

/// `X̃ = Z + 1 − ZZ*` with `Z = t₂⊗S⊗p_{n−2}⊗1_{n−2}`, in
/// `χ̃_{ω_n} = χ_{ω_{n−1,1}} * π_{ω_{n−1,2}}` (first slot for `s_{n−1}`).
pub fn coisometry_path(n: usize) -> Result<PathSum, Error> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("need n >= 3, got {n}")));
    }
    use AtomKind::{One, P, S};
    let z = mono(n, t(2, n), &[(S, 1), (P, n - 2), (One, n - 2)]);
    lift(&z, &z.mul(&z.adjoint())?)
}

pub fn build_coisometry_x(n: usize, ctx: &WitnessContext) -> Result<(KWitness, ResidualReport), Error> {
    use AtomKind::{One, A, C, P};
    let path = coisometry_path(n)?;
    let word = omega_ji(n - 1, 1, n)?.concat(&omega_ji(n - 1, 2, n)?);
    let rm = build_rep(&word, n, TorusMode::Symbolic)?;
    let mut mat = Materializer::new(ctx.realization())?;
    let mut report = ResidualReport::new(
        "coisometry X~",
        "coisometry lemma",
        ctx.params(json!({"n": n, "word": word.to_csv()})),
        ctx.tol,
    );
    let b = mat.materialize(rm.entry(n - 1, 1))?;
    let a = mat.materialize(rm.entry(n, 1))?;
    let bb = b.adjoint().mul(&b)?;
    let aa = a.adjoint().mul(&a)?;
    let c = mat.materialize(&proj(n, &[(One, 1), (C, n - 2), (One, n - 2)]))?;
    let qq = c.mul(&c)?;
    let q2 = C64::new(ctx.q * ctx.q, 0.0);
    let printed = bb.lin_comb(C64::new(1.0, 0.0), &aa, -q2)?;
    report.note("u*u - q²u_n1*u_n1 (sign as printed)", printed.interior_residual(&qq, 1)?);
    let sum = bb.add(&aa)?;
    report.push("u_{n-1,1}*u_{n-1,1} + u_n1*u_n1 = 1⊗1⊗q^{2N}..⊗1", sum.interior_residual(&qq, 1)?);
    let e = spectral_projection_one(&sum, ctx.gap())?;
    let e_direct = mat.materialize(&proj(n, &[(One, 1), (P, n - 2), (One, n - 2)]))?;
    report.push("1_{1}(·) vs 1⊗1⊗p_{n-2}⊗1", e.interior_residual(&e_direct, 1)?);
    let y = e.mul(&b)?;
    let y_direct = mat.materialize(&mono(n, t(2, n), &[(A, 1), (P, n - 2), (One, n - 2)]))?;
    report.push("(1⊗1⊗p⊗1)χ~(u_{n-1,1}) = t2⊗A⊗p⊗1", y.interior_residual(&y_direct, 1)?);

    let x = KWitness::new("X~", mat.materialize(&path)?, WitnessKind::Coisometry, Provenance::DirectFormula);
    for (l, v) in x.kind_residuals()? {
        report.push(format!("X~ {l}"), v);
    }
    let id = SparseOp::identity(x.operator.shape().to_vec(), None);
    let xx = x.operator.adjoint().mul(&x.operator)?;
    let pn1 = mat.materialize(&proj(n, &[(P, n - 1), (One, n - 2)]))?;
    report.push("X~*X~ vs 1 - 1⊗p_{n-1}⊗1", xx.interior_residual(&id.sub(&pn1)?, 1)?);
    let qn = spectral_projection_one(&aa, ctx.gap())?;
    report.push("X~*X~ vs 1 - 1_{1}(u_n1*u_n1)", xx.interior_residual(&id.sub(&qn)?, 1)?);
    report.expect_int("rank(1-X~*X~)", projection_rank(&id.sub(&xx)?)? as i64, projection_rank(&pn1)? as i64);
    let v = KUnitary::BigV.direct(n, n - 1)?;
    report.push("σ~(X~) = V_{n-1} (symbolic)", symbolic_residual(&path.sigma_contract(0)?, &v));
    Ok((x, report))
}

/// Largest entry modulus of `op` in each row whose last Fock coordinate is
/// `j`, for `j < D−1`.
pub fn level_profile(op: &SparseOp) -> Vec<f64> {
    let d = match op.shape().last() {
        Some(FactorSpace::FockTrunc(d)) => *d,
        _ => return Vec::new(),
    };
    let mut levels = vec![0.0f64; d - 1];
    for (r, _, v) in op.triplets() {
        let j = *op.multi_index(r).1.last().expect("non-empty shape");
        if j + 1 < d {
            levels[j] = levels[j].max(v.norm());
        }
    }
    levels
}

/// Per-level entries of `R_n − E Z_n χ_{ω_n}(u_{n−1,1})`,
/// `E = 1⊗p_{n−2}⊗p_{n−2}⊗1`, against the bounds `q^{2j+2}` and `q^{2j}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompactnessCertificate {
    pub levels: Vec<f64>,
    pub within_q2j2: bool,
    pub within_q2j: bool,
    /// First level where `q^{2j+2}` fails, if any.
    pub first_violation: Option<usize>,
    /// Same profile for `R_n − Z_n χ_{ω_n}(u_{n−1,1})` without `E`.
    pub uncompressed_levels: Vec<f64>,
}

/// `R_n = t₁t₂⊗p_{n−2}⊗p_{n−2}⊗1`, `S_n = R_n + 1 − R_nR_n*`,
/// `T_n = E Z_n + 1 − E` in `χ_{ω_n}`.
pub fn sn_tn_paths(n: usize) -> Result<(PathSum, PathSum, PathSum), Error> {
    use AtomKind::{One, P};
    let (z, _) = zn_yn_paths(n)?;
    let r = mono(n, t(1, n).mul(&t(2, n)), &[(P, n - 2), (P, n - 2), (One, 1)]);
    let s = lift(&r, &r.mul(&r.adjoint())?)?;
    let e = proj(n, &[(One, n - 2), (P, n - 2), (One, 1)]).mul(&proj(n, &[(P, n - 2), (One, n - 1)]))?;
    let tn = lift(&e.mul(&z)?, &e)?;
    Ok((r, s, tn))
}

pub fn build_sn_tn(
    n: usize,
    ctx: &WitnessContext,
) -> Result<(KWitness, KWitness, ResidualReport, CompactnessCertificate), Error> {
    use AtomKind::{One, Sstar, A, P};
    let (rp, sp, tp) = sn_tn_paths(n)?;
    let (zp, _) = zn_yn_paths(n)?;
    let mut mat = Materializer::new(ctx.realization())?;
    let s = KWitness::new("S_n", mat.materialize(&sp)?, WitnessKind::Unitary, Provenance::DirectFormula);
    let tn = KWitness::new("T_n", mat.materialize(&tp)?, WitnessKind::Isometry, Provenance::DirectFormula);
    let mut report =
        ResidualReport::new("S_n and T_n", "corollary for the top Stiefel layer", ctx.params(json!({"n": n})), ctx.tol);
    for w in [&s, &tn] {
        for (l, v) in w.kind_residuals()? {
            report.push(format!("{} {l}", w.name), v);
        }
    }
    let zero = SparseOp::zeros(s.operator.shape().to_vec(), None);
    report.push("S_nT_n - T_nS_n", s.operator.commutator(&tn.operator)?.interior_residual(&zero, 1)?);
    let witness = corollary_witness(&s.operator, &tn.operator, ctx.tol)?;
    let target = mat.materialize(&lift(
        &mono(n, t(1, n).mul(&t(2, n)), &[(P, n - 2), (P, n - 1)]),
        &proj(n, &[(P, n - 2), (P, n - 1)]),
    )?)?;
    report.push("S_n(1-T_nT_n*)+T_nT_n*", witness.interior_residual(&target, 1)?);

    let last = 2 * n - 4;
    let uv = KUnitary::SmallU.direct(n, n - 1)?.mul(&KUnitary::SmallV.direct(n, n - 1)?)?;
    report.push("σ_n(S_n) = u_{n-1}v_{n-1} (symbolic)", symbolic_residual(&sp.sigma_contract(last)?, &uv));
    report.push(
        "σ_n(T_n) = u_{n-1} (symbolic)",
        symbolic_residual(&tp.sigma_contract(last)?, &KUnitary::SmallU.direct(n, n - 1)?),
    );

    let rm = build_rep(&omega_word(n, 2, n)?, n, TorusMode::Symbolic)?;
    let u = mat.materialize(rm.entry(n - 1, 1))?;
    let z = mat.materialize(&zp)?;
    let e =
        mat.materialize(&proj(n, &[(One, n - 2), (P, n - 2), (One, 1)]).mul(&proj(n, &[(P, n - 2), (One, n - 1)]))?)?;
    let zu = z.mul(&u)?;
    let ezu = e.mul(&zu)?;
    let t12 = t(1, n).mul(&t(2, n));
    let head = mat.materialize(&mono(n, t12.clone(), &[(P, n - 2), (P, n - 2), (Sstar, 1)]))?;
    let last_a = mat.materialize(&proj(n, &[(One, 2 * n - 4), (A, 1)]))?;
    // √(1−q^{2N}) = S*A and √(1−q^{2N+2}) = AS* on the last slot.
    let with_n = head.mul(&last_a)?;
    let with_n1 = mat
        .materialize(&mono(n, t12, &[(P, n - 2), (P, n - 2), (One, 1)]))?
        .mul(&last_a)?
        .mul(&mat.materialize(&proj(n, &[(One, 2 * n - 4), (Sstar, 1)]))?)?;
    report.note("Z_nχ(u_{n-1,1}) vs t1t2⊗p⊗p⊗√(1-q^{2N+2}) (as printed)", zu.interior_residual(&with_n1, 1)?);
    report.push("E Z_nχ(u_{n-1,1}) vs t1t2⊗p⊗p⊗√(1-q^{2N})", ezu.interior_residual(&with_n, 1)?);
    report.push("Z_nχ(u_{n-1,1}) E vs E Z_nχ(u_{n-1,1})", zu.mul(&e)?.interior_residual(&ezu, 1)?);

    let r = mat.materialize(&rp)?;
    let levels = level_profile(&r.sub(&ezu)?);
    let q2 = ctx.q * ctx.q;
    let slack = 1e-12;
    let first_violation = levels.iter().enumerate().position(|(j, &x)| x > q2.powi(j as i32 + 1) + slack);
    let within_q2j = levels.iter().enumerate().all(|(j, &x)| x <= q2.powi(j as i32) + slack);
    let cert = CompactnessCertificate {
        within_q2j2: first_violation.is_none(),
        within_q2j,
        first_violation,
        uncompressed_levels: level_profile(&r.sub(&zu)?),
        levels,
    };
    Ok((s, tn, report, cert))
}

/// `X(1−YY*) + YY*` for `X` unitary or coisometric and `Y` isometric.
pub fn corollary_witness(x: &SparseOp, y: &SparseOp, tol: f64) -> Result<SparseOp, Error> {
    let id = SparseOp::identity(x.shape().to_vec(), x.block());
    let co = x.mul(&x.adjoint())?.interior_residual(&id, 1)?;
    if co > tol {
        return Err(Error::NotUnitary(co));
    }
    let iso = y.adjoint().mul(y)?.interior_residual(&id, 1)?;
    if iso > tol {
        return Err(Error::NotUnitary(iso));
    }
    let yy = y.mul(&y.adjoint())?;
    x.mul(&id.sub(&yy)?)?.add(&yy)
}

/// Position on the circle, `θ ∈ [0, 1)` for `λ = e^{2πiθ}`.
fn circle_param(lambda: C64) -> f64 {
    let th = lambda.arg() / std::f64::consts::TAU;
    if th < 0.0 {
        th + 1.0
    } else {
        th
    }
}

fn tent(th: f64) -> f64 {
    if th <= 0.5 {
        2.0 * th
    } else {
        2.0 - 2.0 * th
    }
}

fn bump(th: f64) -> f64 {
    let f = tent(th);
    (f - f * f).max(0.0).sqrt()
}

/// `F(U)` for unitary `U` via the complex Schur form.
fn unitary_calculus(u: &DMatrix<C64>, fs: &[&dyn Fn(f64) -> f64]) -> Vec<DMatrix<C64>> {
    let (q, tri) = u.clone().schur().unpack();
    let thetas: Vec<f64> = (0..tri.nrows()).map(|i| circle_param(tri[(i, i)])).collect();
    fs.iter()
        .map(|f| {
            let d = DMatrix::from_fn(thetas.len(), thetas.len(), |i, j| {
                if i == j {
                    C64::new(f(thetas[i]), 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            &q * d * q.adjoint()
        })
        .collect()
}

/// `e(U,V)` without the input checks, so it can be evaluated on
/// near-commuting pairs.
pub fn bott_matrix(u: &SparseOp, v: &SparseOp) -> Result<SparseOp, Error> {
    if u.shape() != v.shape() || u.block().is_some() || v.block().is_some() {
        return Err(Error::ShapeMismatch("bott inputs on different spaces".into()));
    }
    if u.dim() > DENSE_LIMIT {
        return Err(Error::TooLarge { dim: u.dim(), limit: DENSE_LIMIT });
    }
    let g_fn = |th: f64| if th <= 0.5 { bump(th) } else { 0.0 };
    let h_fn = |th: f64| if th >= 0.5 { bump(th) } else { 0.0 };
    let um = u.to_dense();
    let vm = v.to_dense();
    let fgh = unitary_calculus(&um, &[&tent, &g_fn, &h_fn]);
    let (f, g, h) = (&fgh[0], &fgh[1], &fgh[2]);
    let id = DMatrix::<C64>::identity(u.dim(), u.dim());
    let b01 = g + h * &vm;
    let b10 = g + vm.adjoint() * h;
    let b11 = &id - f;
    let n = u.dim();
    let mut trips = Vec::new();
    for (bi, bj, m) in [(0, 0, f), (0, 1, &b01), (1, 0, &b10), (1, 1, &b11)] {
        for c in 0..n {
            for r in 0..n {
                trips.push((bi * n + r, bj * n + c, m[(r, c)]));
            }
        }
    }
    Ok(SparseOp::from_triplets(u.shape().to_vec(), Some(2), trips))
}

/// `e(U,V) = [[f(U), g(U)+h(U)V], [g(U)+V*h(U), 1−f(U)]]` for commuting
/// unitaries, with `f` the tent function and `g`, `h` the halves of
/// `√(f−f²)` on `[0,½]` and `[½,1]`.
pub fn bott_projection(u: &SparseOp, v: &SparseOp) -> Result<SparseOp, Error> {
    const INPUT_TOL: f64 = 1e-10;
    for w in [u, v] {
        let id = SparseOp::identity(w.shape().to_vec(), None);
        let r = w.adjoint().mul(w)?.sub(&id)?.norm_bound().max(w.mul(&w.adjoint())?.sub(&id)?.norm_bound());
        if r > INPUT_TOL {
            return Err(Error::NotUnitary(r));
        }
    }
    let c = u.commutator(v)?.norm_bound();
    if c > INPUT_TOL {
        return Err(Error::NotCommuting(c));
    }
    bott_matrix(u, v)
}

/// `e₀ = diag(1, 0)` on the doubled space.
pub fn bott_reference(shape: Vec<FactorSpace>) -> SparseOp {
    let id = SparseOp::identity(shape, None);
    SparseOp::block_matrix(vec![vec![Some(id), None], vec![None, None]]).expect("nonzero block")
}
