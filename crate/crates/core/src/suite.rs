//! Verification suites, JSON reports and golden comparison.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::coxeter::{
    all_perms, braid_equal, coset_min_rep, omega_ji, omega_word, perm_length, word_to_perm, Perm, ReducedWord,
};
use crate::fock::{AtomKind, FactorSpace, SparseOp};
use crate::fredholm::{index_pairing, phi_path, phi_su3, u3_path, FredholmSpec, IndexResult, UnitaryKind};
use crate::ktheory::{
    bott_projection, build_boundary_isometries, build_coisometry_x, build_k_unitaries, build_sn_tn, build_zn_yn,
    projection_rank, WitnessContext,
};
use crate::relations::{
    check_compact_lemma, check_determinant, check_killing, check_unitarity, t_samples, ResidualReport,
};
use crate::symrep::{build_rep, PathSum, Realization, TorusMode, TorusRealization};
use crate::{Error, C64};

pub const SCHEMA_VERSION: u32 = 1;
/// Largest operator dimension any suite materializes.
pub const MEMORY_BUDGET: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Relations,
    Factorization,
    Killing,
    Kwitness,
    Bott,
    Corollary,
    Index,
    Coxeter,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Relations,
        Suite::Factorization,
        Suite::Killing,
        Suite::Kwitness,
        Suite::Bott,
        Suite::Corollary,
        Suite::Index,
        Suite::Coxeter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Relations => "relations",
            Suite::Factorization => "factorization",
            Suite::Killing => "killing",
            Suite::Kwitness => "kwitness",
            Suite::Bott => "bott",
            Suite::Corollary => "corollary",
            Suite::Index => "index",
            Suite::Coxeter => "coxeter",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s || (s == "factorize" && *x == Suite::Factorization))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub n: usize,
    pub m: usize,
    pub q: Vec<f64>,
    pub fock_dim: usize,
    pub window: usize,
    pub cyclic: usize,
    pub k: Vec<i64>,
    /// Replaces every gating tolerance when set.
    pub tol: Option<f64>,
    pub rank_tol: f64,
    pub suites: Vec<Suite>,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: 3,
            m: 2,
            q: vec![0.5],
            fock_dim: 12,
            window: 24,
            cyclic: 8,
            k: vec![0],
            tol: None,
            rank_tol: 1e-6,
            suites: Suite::ALL.to_vec(),
            out: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self, Error> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.q.is_empty() || self.q.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
            return Err(Error::InvalidArgument(format!("every q must lie in (0,1), got {:?}", self.q)));
        }
        if !(3..=5).contains(&self.n) {
            return Err(Error::InvalidArgument(format!("n={} outside 3..=5", self.n)));
        }
        if self.m != 2 {
            return Err(Error::InvalidArgument(format!("only m=2 is supported, got {}", self.m)));
        }
        if self.fock_dim < 4 || self.cyclic < 2 || self.window < 8 {
            return Err(Error::InvalidArgument("need D >= 4, M >= 2, L >= 8".into()));
        }
        if !(1e-15..1.0).contains(&self.rank_tol) {
            return Err(Error::InvalidArgument(format!("rank tolerance {}", self.rank_tol)));
        }
        let slots = 2 * self.n - 3;
        let smallest = (self.fock_dim as f64).powi(slots as i32);
        if smallest > MEMORY_BUDGET as f64 {
            return Err(Error::TooLarge { dim: smallest.min(usize::MAX as f64) as usize, limit: MEMORY_BUDGET });
        }
        let window_dim = 3 * (2 * (self.window + 4) + 1) * (self.window + 4);
        if window_dim > MEMORY_BUDGET {
            return Err(Error::TooLarge { dim: window_dim, limit: MEMORY_BUDGET });
        }
        Ok(())
    }

    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    /// Cyclic torus factors when `M² · D^slots` fits the budget, otherwise a
    /// sampled scalar torus.
    fn torus_for(&self, slots: usize, d: usize) -> TorusRealization {
        let dim = (self.cyclic * self.cyclic) as f64 * (d as f64).powi(slots as i32);
        if dim <= MEMORY_BUDGET as f64 {
            TorusRealization::Cyclic(self.cyclic)
        } else {
            TorusRealization::Sample(t_samples(2, self.seed).pop().expect("non-empty"))
        }
    }

    /// Largest `D' ≤ D` with `M² · D'^slots` inside the budget.
    fn fit_fock_dim(&self, slots: usize) -> usize {
        let mut d = self.fock_dim;
        while d > 4 && (self.cyclic * self.cyclic) as f64 * (d as f64).powi(slots as i32) > MEMORY_BUDGET as f64 {
            d -= 1;
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub suite: Suite,
    #[serde(flatten)]
    pub report: ResidualReport,
    /// Wall-clock time; ignored by golden comparison.
    pub wall_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub config: RunConfig,
    pub checks: Vec<CheckEntry>,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the wall-clock fields zeroed.
    pub fn to_json_without_timing(&self) -> Result<String, Error> {
        let mut r = self.clone();
        r.checks.iter_mut().for_each(|c| c.wall_ms = 0.0);
        r.to_json()
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self, Error> {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        match v.get("schema_version").and_then(|x| x.as_u64()) {
            Some(s) if s == SCHEMA_VERSION as u64 => Ok(serde_json::from_value(v)?),
            other => Err(Error::SchemaMismatch(format!("expected schema version {SCHEMA_VERSION}, found {other:?}"))),
        }
    }
}

/// Where a report goes when no output path is configured.
pub fn default_report_path(label: &str) -> PathBuf {
    let dir = std::env::var_os("QSK_REPORT_DIR").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("qsk-{label}.json"))
}

struct Runner<'a> {
    cfg: &'a RunConfig,
    checks: Vec<CheckEntry>,
}

impl Runner<'_> {
    fn run(&mut self, suite: Suite, check: &str, anchor: &str, f: impl FnOnce() -> Result<Vec<ResidualReport>, Error>) {
        let start = Instant::now();
        let reports = match f() {
            Ok(r) => r,
            Err(e) => {
                let mut r = ResidualReport::new(check, anchor, json!({}), 0.0);
                r.fail(e.to_string());
                vec![r]
            }
        };
        let ms = start.elapsed().as_secs_f64() * 1e3 / reports.len().max(1) as f64;
        for report in reports {
            self.checks.push(CheckEntry { suite, report, wall_ms: ms });
        }
    }
}

/// Runs the configured suites. Failures inside a check are recorded in the
/// report; only an invalid configuration is an error.
pub fn run_suite(cfg: &RunConfig) -> Result<Report, Error> {
    cfg.validate()?;
    let mut runner = Runner { cfg, checks: Vec::new() };
    let mut suites = cfg.suites.clone();
    suites.sort();
    suites.dedup();
    for s in suites {
        match s {
            Suite::Relations => relations_suite(&mut runner),
            Suite::Factorization => factorization_suite(&mut runner),
            Suite::Killing => killing_suite(&mut runner),
            Suite::Kwitness => kwitness_suite(&mut runner),
            Suite::Bott => bott_suite(&mut runner),
            Suite::Corollary => corollary_suite(&mut runner),
            Suite::Index => index_suite(&mut runner),
            Suite::Coxeter => coxeter_suite(&mut runner),
        }
    }
    let pass = runner.checks.iter().all(|c| c.report.pass);
    Ok(Report { schema_version: SCHEMA_VERSION, config: cfg.clone(), checks: runner.checks, pass })
}

/// Tolerance for unitarity at truncation `D`: `10·q^{2D} + 1e−12`.
pub fn unitarity_tol(q: f64, d: usize) -> f64 {
    10.0 * q.powi(2 * d as i32) + 1e-12
}

fn relations_suite(r: &mut Runner) {
    let cfg = r.cfg;
    let d = cfg.fock_dim;
    for &q in &cfg.q {
        let tol = cfg.tol(unitarity_tol(q, d));
        r.run(Suite::Relations, "unitarity", "fundamental matrix unitarity", || {
            let mut out = Vec::new();
            for n in 2..=4 {
                for i in 1..n {
                    let rm = build_rep(&ReducedWord::new(vec![i], n)?, n, TorusMode::Absent)?;
                    let real = Realization::new(q, d, 0, TorusRealization::Absent);
                    out.push(check_unitarity(&rm, &real, tol)?);
                }
            }
            for n in 3..=cfg.n.max(4) {
                let word = omega_word(n, 2, n)?;
                let rm = build_rep(&word, n, TorusMode::Symbolic)?;
                let real = Realization::new(q, d, 2, cfg.torus_for(word.len(), d));
                out.push(check_unitarity(&rm, &real, tol)?);
            }
            Ok(out)
        });
        r.run(Suite::Relations, "unitarity at sampled torus points", "fundamental matrix unitarity", || {
            let n = 3;
            let rm = build_rep(&omega_word(n, 2, n)?, n, TorusMode::Symbolic)?;
            let mut rep = ResidualReport::new(
                "unitarity at sampled torus points",
                "fundamental matrix unitarity",
                json!({"n": n, "q": q, "D": d, "seed": cfg.seed}),
                tol,
            );
            for (i, t) in t_samples(2, cfg.seed).into_iter().enumerate() {
                let real = Realization::new(q, d, 2, TorusRealization::Sample(t));
                rep.push(format!("sample {i}"), check_unitarity(&rm, &real, tol)?.max_residual());
            }
            Ok(vec![rep])
        });
        r.run(Suite::Relations, "q-determinant", "quantum determinant relation", || {
            let tol = cfg.tol(1e-8);
            let mut out = Vec::new();
            for n in 2..=3 {
                for i in 1..n {
                    let rm = build_rep(&ReducedWord::new(vec![i], n)?, n, TorusMode::Absent)?;
                    out.push(check_determinant(&rm, &Realization::new(q, d, 0, TorusRealization::Absent), tol)?);
                }
            }
            let dd = d.min(10);
            let rm = build_rep(&omega_word(3, 2, 3)?, 3, TorusMode::Symbolic)?;
            out.push(check_determinant(&rm, &Realization::new(q, dd, 2, cfg.torus_for(3, dd)), tol)?);
            Ok(out)
        });
        r.run(Suite::Relations, "odd-sphere ideal", "odd-sphere ideal lemma", || {
            let mut out = Vec::new();
            for n in 3..=4 {
                for k in 1..n {
                    out.push(check_compact_lemma(n, k, q, d.min(8), cfg.tol(1e-12))?);
                }
            }
            Ok(out)
        });
    }
}

/// One randomized case of the factorization identity: deleting the letter
/// at `pos` from `w` agrees with contracting that slot of `ψ_{t,w}`.
pub fn factorization_case(letters: &[usize], n: usize, pos: usize, torus: TorusMode) -> Result<bool, Error> {
    let w = ReducedWord::new(letters.to_vec(), n)?;
    let full = build_rep(&w, n, torus)?.sigma_contract(pos)?;
    let short = build_rep(&w.delete(pos), n, torus)?;
    Ok((1..=n).all(|r| (1..=n).all(|s| full.entry(r, s) == short.entry(r, s))))
}

/// Seeded cases `(letters, n, pos)` with `n ≤ 4` and at most 6 letters.
pub fn factorization_cases(count: usize, seed: u64) -> Vec<(Vec<usize>, usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(2..=4);
            let len = rng.gen_range(1..=6);
            let letters = (0..len).map(|_| rng.gen_range(1..n)).collect();
            (letters, n, rng.gen_range(0..len))
        })
        .collect()
}

fn factorization_suite(r: &mut Runner) {
    let seed = r.cfg.seed;
    r.run(Suite::Factorization, "factorization", "factorisation through slot deletion", || {
        let mut rep = ResidualReport::new(
            "factorization",
            "factorisation through slot deletion",
            json!({"cases": 100, "seed": seed}),
            0.0,
        );
        let mut failures = 0;
        for (letters, n, pos) in factorization_cases(100, seed) {
            for torus in [TorusMode::Symbolic, TorusMode::Absent] {
                if !factorization_case(&letters, n, pos, torus)? {
                    failures += 1;
                }
            }
        }
        rep.expect_int("failures", failures, 0);
        Ok(vec![rep])
    });
}

fn killing_suite(r: &mut Runner) {
    let cfg = r.cfg;
    for &q in &cfg.q {
        r.run(Suite::Killing, "killing", "killing lemma", || {
            let mut out = Vec::new();
            for n in 3..=4 {
                for k in 1..n {
                    out.push(check_killing(n, k, q, cfg.fock_dim, cfg.tol(1e-12))?);
                }
            }
            Ok(out)
        });
    }
}

fn kwitness_suite(r: &mut Runner) {
    let cfg = r.cfg;
    let n = cfg.n;
    for &q in &cfg.q {
        let ctx = |slots: usize| {
            let d = cfg.fit_fock_dim(slots);
            let mut c = WitnessContext::new(q, d, cfg.torus_for(slots, d));
            c.tol = cfg.tol(1e-9);
            c
        };
        for k in 1..=n {
            r.run(Suite::Kwitness, "dual construction", "membership of the boundary unitaries", || {
                Ok(build_k_unitaries(n, k, &ctx(n - 2 + k - 1))?.into_iter().map(|w| w.report).collect())
            });
        }
        for k in 1..n {
            r.run(Suite::Kwitness, "boundary isometries", "boundary map on the Stiefel filtration", || {
                Ok(vec![build_boundary_isometries(n, k, &ctx(n - 2 + k))?.2])
            });
        }
        r.run(Suite::Kwitness, "Z_n and Y_n", "isometry Y_n", || Ok(vec![build_zn_yn(n, &ctx(2 * n - 3))?.2]));
        r.run(Suite::Kwitness, "coisometry X~", "coisometry lemma", || {
            Ok(vec![build_coisometry_x(n, &ctx(2 * n - 3))?.1])
        });
    }
}

fn bott_suite(r: &mut Runner) {
    let cfg = r.cfg;
    r.run(Suite::Bott, "bott projection", "Bott product of commuting unitaries", || {
        let m = cfg.cyclic;
        let tol = cfg.tol(1e-9);
        let mut rep =
            ResidualReport::new("bott projection", "Bott product of commuting unitaries", json!({"M": m}), tol);
        let f = FactorSpace::ZCyclic(m);
        let shift = crate::fock::atom_matrix(AtomKind::TorusGen(1), 0.0, f)?;
        let id = SparseOp::identity(vec![f], None);
        let u = SparseOp::kron(&[&shift, &id])?;
        let v = SparseOp::kron(&[&id, &shift])?;
        let e = bott_projection(&u, &v)?;
        rep.push("e^2-e", e.mul(&e)?.sub(&e)?.norm_bound());
        rep.push("e-e*", e.sub(&e.adjoint())?.norm_bound());
        rep.expect_int("rank e(U,V)", projection_rank(&e)? as i64, u.dim() as i64);
        let euu = bott_projection(&u, &u)?;
        rep.push("e(U,U)^2-e(U,U)", euu.mul(&euu)?.sub(&euu)?.norm_bound());
        let trace: C64 = (0..euu.dim()).map(|i| euu.get(i, i)).sum();
        rep.expect_int("trace e(U,U)", trace.re.round() as i64, u.dim() as i64);
        rep.push("|trace e(U,U) - dim|", (trace.re - u.dim() as f64).abs());
        let uu = u.amplify(2)?;
        rep.push("[e(U,U), U⊕U]", euu.commutator(&uu)?.norm_bound());
        let one = SparseOp::identity(vec![FactorSpace::Scalar], None);
        let e1 = bott_projection(&one, &one)?;
        let diag01 = SparseOp::from_triplets(vec![FactorSpace::Scalar], Some(2), vec![(1, 1, C64::new(1.0, 0.0))]);
        rep.expect_int("e(1,1) = diag(0,1) exactly", i64::from(e1 == diag01), 1);
        Ok(vec![rep])
    });
}

fn corollary_suite(r: &mut Runner) {
    let cfg = r.cfg;
    for &q in &cfg.q {
        for n in [3usize, 4] {
            r.run(Suite::Corollary, "S_n and T_n", "corollary for the top Stiefel layer", || {
                let slots = 2 * n - 3;
                let d = cfg.fit_fock_dim(slots);
                let mut ctx = WitnessContext::new(q, d, cfg.torus_for(slots, d));
                ctx.tol = cfg.tol(1e-10);
                let (_, _, rep, cert) = build_sn_tn(n, &ctx)?;
                let mut c = ResidualReport::new(
                    "compactness certificate",
                    "corollary for the top Stiefel layer",
                    json!({"n": n, "q": q, "D": d, "bound": "q^(2j+2)"}),
                    0.0,
                );
                for (j, x) in cert.levels.iter().enumerate() {
                    let bound = (q * q).powi(j as i32 + 1);
                    c.push(format!("level {j} excess over q^(2j+2)"), (x - bound).max(0.0));
                    c.note(format!("level {j} entry"), *x);
                }
                for (j, x) in cert.uncompressed_levels.iter().enumerate() {
                    c.note(format!("level {j} entry without compression"), *x);
                }
                c.expect_int("within q^(2j) at every level", i64::from(cert.within_q2j), 1);
                Ok(vec![rep, c])
            });
        }
    }
}

fn index_report(kind: UnitaryKind, q: f64, spec: &FredholmSpec, res: &IndexResult) -> ResidualReport {
    let mut rep = ResidualReport::new(
        &format!(
            "index pairing {}",
            serde_json::to_value(kind).map(|v| v.as_str().unwrap_or("").to_string()).unwrap_or_default()
        ),
        "index pairing with the half-space Fredholm module",
        json!({"q": q, "L": spec.l, "D": spec.d, "k": spec.k, "rank_tol": res.rank_tol}),
        0.0,
    );
    rep.expect_int("index", res.index, -1);
    rep.expect_int("stable", i64::from(res.stable), 1);
    rep.expect_int("gap at least 10x rank tolerance", i64::from(res.gap_ratio() >= 10.0), 1);
    rep.integers.insert("dim_ker".into(), res.dim_ker as i64);
    rep.integers.insert("dim_coker".into(), res.dim_coker as i64);
    rep.note("min retained singular value", res.min_retained_sv);
    rep.note("max discarded singular value", res.max_discarded_sv);
    rep
}

fn index_suite(r: &mut Runner) {
    let cfg = r.cfg;
    for &q in &cfg.q {
        for &k in &cfg.k {
            let spec = FredholmSpec::new(cfg.window, cfg.window, k);
            for kind in [
                UnitaryKind::Su2Limit,
                UnitaryKind::TP,
                UnitaryKind::TBarP,
                UnitaryKind::Su2Q,
                UnitaryKind::Su3Fundamental,
                UnitaryKind::Su3LimitBlock,
            ] {
                r.run(Suite::Index, "index pairing", "index pairing with the half-space Fredholm module", || {
                    let res = index_pairing(kind, q, &spec, cfg.rank_tol)?;
                    Ok(vec![index_report(kind, q, &spec, &res)])
                });
            }
        }
    }
    r.run(Suite::Index, "quotient map φ", "quotient onto SU_q(2)", || {
        let mut rep = ResidualReport::new("quotient map φ", "quotient onto SU_q(2)", json!({}), 0.0);
        let rm = build_rep(&omega_word(3, 2, 3)?, 3, TorusMode::Symbolic)?;
        let phi = phi_su3(&rm)?;
        rep.expect_int("φ(U) = diag(u,1) entry-wise", i64::from(phi.is_block_diagonal()?), 1);
        rep.expect_int("φ(U_3) = 1", i64::from(phi_path(&u3_path())? == PathSum::identity(2, 1)), 1);
        Ok(vec![rep])
    });
}

/// Minimal-length element of `{h ∘ p : h ∈ S_{n−m}}` by enumeration.
pub fn brute_force_coset_min(p: &Perm, n: usize, m: usize) -> Perm {
    let small = n - m;
    all_perms(small)
        .into_iter()
        .map(|h| {
            let mut img: Vec<usize> = h.images().to_vec();
            img.extend(small + 1..=n);
            Perm::from_images(img).expect("embedded permutation").compose(p)
        })
        .min_by_key(|x| (perm_length(x), x.clone()))
        .expect("non-empty coset")
}

fn coxeter_suite(r: &mut Runner) {
    r.run(Suite::Coxeter, "coxeter oracles", "descending words and the top-layer braid identity", || {
        let mut rep = ResidualReport::new(
            "coxeter oracles",
            "descending words and the top-layer braid identity",
            json!({"m": 2}),
            0.0,
        );
        let mut coset_failures = 0;
        let mut coset_cases = 0;
        for n in [4usize, 5] {
            for p in all_perms(n) {
                coset_cases += 1;
                if coset_min_rep(&p, n, 2) != brute_force_coset_min(&p, n, 2) {
                    coset_failures += 1;
                }
            }
        }
        rep.integers.insert("coset cases".into(), coset_cases);
        rep.expect_int("coset failures", coset_failures, 0);
        let mut braid_failures = 0;
        for n in 3..=5usize {
            let lhs = omega_ji(n - 2, 1, n)?.concat(&omega_ji(n - 1, 1, n)?);
            let rhs = omega_ji(n - 1, 1, n)?.concat(&omega_ji(n - 1, 2, n)?);
            braid_failures += i64::from(!braid_equal(&lhs, &rhs));
            for k in 1..n - 1 {
                let l = omega_ji(n - 1, k, n)?.concat(&omega_ji(n - 1, 1, n)?);
                let r = omega_ji(n - 1, k + 1, n)?
                    .concat(&omega_ji(n - 1, 1, n)?)
                    .concat(&ReducedWord::new(vec![k + 1], n)?);
                braid_failures += i64::from(!braid_equal(&l, &r));
            }
        }
        rep.expect_int("braid identity failures", braid_failures, 0);
        let mut reduced_failures = 0;
        for n in 3..=5usize {
            let w = omega_word(n, 2, n)?;
            reduced_failures += i64::from(perm_length(&word_to_perm(&w)) != w.len());
        }
        rep.expect_int("ω_n not reduced", reduced_failures, 0);
        Ok(vec![rep])
    });
}

/// Structural comparison with a stored report: same checks in the same
/// order, equal pass flags and integers, residuals within twice the
/// recorded tolerance. Wall-clock is ignored.
pub fn compare_golden(report: &Report, golden_path: &Path) -> Result<bool, Error> {
    let golden = Report::read(golden_path)?;
    Ok(reports_match(report, &golden))
}

pub fn reports_match(a: &Report, golden: &Report) -> bool {
    if a.schema_version != golden.schema_version || a.checks.len() != golden.checks.len() || a.pass != golden.pass {
        return false;
    }
    a.checks.iter().zip(&golden.checks).all(|(x, g)| {
        let same_suite = x.suite == g.suite;
        let (x, g) = (&x.report, &g.report);
        let band = 2.0 * g.tolerance;
        let close = |xs: &[crate::relations::Residual], gs: &[crate::relations::Residual]| {
            xs.len() == gs.len()
                && xs.iter().zip(gs).all(|(a, b)| a.label == b.label && (a.value - b.value).abs() <= band.max(1e-12))
        };
        same_suite
            && x.check == g.check
            && x.pass == g.pass
            && x.integers == g.integers
            && close(&x.residuals, &g.residuals)
            && x.info.len() == g.info.len()
    })
}
