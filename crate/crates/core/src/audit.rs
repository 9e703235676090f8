//! Executable security checks for small instances.
//!
//! An eavesdropper reads the stored data of some nodes and, for other nodes,
//! also everything downloaded while they are repaired. Repairs are replayed
//! over every failure sequence up to a bounded depth, each repair using all
//! `n - 1` other nodes as helpers.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Fe, Matrix, PrimeField};
use crate::code::{RegeneratingCode, Share};
use crate::error::{Error, Result};
use crate::mds::Detection;

/// Largest (message, randomness) space enumerated by replaying the codec
/// directly; larger spaces go through the linear view map.
pub const DIRECT_LIMIT: u128 = 4096;

pub const DEFAULT_BUDGET: u128 = 20_000_000;

fn default_depth() -> usize {
    2
}

/// Which nodes an eavesdropper observes. Node indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewSpec {
    #[serde(default)]
    pub storage_nodes: Vec<usize>,
    #[serde(default)]
    pub repair_nodes: Vec<usize>,
    /// Longest failure sequence replayed for repair taps.
    #[serde(default = "default_depth")]
    pub depth: usize,
}

impl ViewSpec {
    pub fn new(storage_nodes: &[usize], repair_nodes: &[usize]) -> Self {
        ViewSpec {
            storage_nodes: storage_nodes.to_vec(),
            repair_nodes: repair_nodes.to_vec(),
            depth: 2,
        }
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    fn validate(&self, n: usize) -> Result<()> {
        let all: Vec<usize> = self.storage_nodes.iter().chain(&self.repair_nodes).copied().collect();
        if all.iter().any(|&x| x == 0 || x > n) {
            return Err(Error::InvalidParams(format!("view names a node outside 1..={n}")));
        }
        if !all.iter().all_unique() {
            return Err(Error::InvalidParams("view node sets overlap or repeat".into()));
        }
        Ok(())
    }

    /// Every view with `ell - m` storage taps and `m` repair taps.
    pub fn all_admissible(n: usize, ell: usize, m: usize, depth: usize) -> Vec<ViewSpec> {
        let mut out = vec![];
        for repair in (1..=n).combinations(m) {
            let rest: Vec<usize> = (1..=n).filter(|x| !repair.contains(x)).collect();
            for storage in rest.into_iter().combinations(ell - m) {
                out.push(ViewSpec {
                    storage_nodes: storage,
                    repair_nodes: repair.clone(),
                    depth,
                });
            }
        }
        out
    }
}

/// A captured symbol and where it came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Captured {
    pub label: String,
    pub value: u64,
}

/// Symbols seen by the eavesdropper for one stripe encoded from
/// `(message, randomness)`.
pub fn capture<C: RegeneratingCode + ?Sized>(
    code: &C,
    view: &ViewSpec,
    message: &[Fe],
    randomness: &[Fe],
) -> Result<Vec<Captured>> {
    view.validate(code.n())?;
    let shares = code.encode_with(message, randomness)?;
    let mut out = vec![];
    let push_share = |out: &mut Vec<Captured>, s: &Share, tag: &str| {
        for (j, x) in s.stripes[0].iter().enumerate() {
            out.push(Captured {
                label: format!("{tag} node {} symbol {j}", s.node),
                value: x.value() as u64,
            });
        }
    };
    for &s in &view.storage_nodes {
        push_share(&mut out, &shares[s - 1], "stored");
    }
    for &s in &view.repair_nodes {
        push_share(&mut out, &shares[s - 1], "stored");
    }
    if view.repair_nodes.is_empty() {
        return Ok(out);
    }
    let n = code.n();
    for len in 1..=view.depth {
        for history in (0..len).map(|_| 1..=n).multi_cartesian_product() {
            let mut current = shares.clone();
            for &failed in &history {
                let helpers: Vec<&Share> = current.iter().filter(|s| s.node != failed).collect();
                let data = code.helper_data(&helpers, failed)?;
                if view.repair_nodes.contains(&failed) {
                    for h in &data {
                        out.push(Captured {
                            label: format!("repair of {failed} after {history:?}: from {}", h.node),
                            value: h.symbols[0].value() as u64,
                        });
                    }
                }
                current[failed - 1] = code.repair(failed, &data, 0)?;
            }
        }
    }
    Ok(out)
}

fn capture_values<C: RegeneratingCode + ?Sized>(
    code: &C,
    view: &ViewSpec,
    message: &[Fe],
    randomness: &[Fe],
) -> Result<Vec<u32>> {
    Ok(capture(code, view, message, randomness)?
        .into_iter()
        .map(|c| c.value as u32)
        .collect())
}

/// The linear map `(message ++ randomness) -> captured symbols`.
pub fn view_map<C: RegeneratingCode + ?Sized>(code: &C, view: &ViewSpec) -> Result<Matrix> {
    let field = code.field();
    let (b, r) = (code.message_len(), code.random_len());
    let mut cols: Vec<Vec<u32>> = Vec::with_capacity(b + r);
    for t in 0..b + r {
        let mut unit = vec![field.zero(); b + r];
        unit[t] = field.one();
        cols.push(capture_values(code, view, &unit[..b], &unit[b..])?);
    }
    let rows = cols.first().map_or(0, Vec::len);
    let mut g = Matrix::zeros(field, rows, b + r);
    for (t, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            g[(i, t)] = field.elem(v as u64);
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Leakage {
    Secure,
    /// Two messages whose view distributions differ.
    Leaky { witness: (Vec<u64>, Vec<u64>) },
}

impl Leakage {
    pub fn is_secure(&self) -> bool {
        matches!(self, Leakage::Secure)
    }
}

fn digits(field: PrimeField, mut idx: u128, len: usize) -> Vec<Fe> {
    let q = field.modulus() as u128;
    (0..len)
        .map(|_| {
            let d = idx % q;
            idx /= q;
            field.elem(d as u64)
        })
        .collect()
}

fn space(q: u64, len: usize) -> Option<u128> {
    (q as u128).checked_pow(len as u32)
}

/// Decides whether the view reveals anything about the message by comparing
/// the exact distribution of views for every message.
pub fn leakage_oracle<C: RegeneratingCode + ?Sized>(code: &C, view: &ViewSpec, budget: u128) -> Result<Leakage> {
    view.validate(code.n())?;
    let field = code.field();
    let q = field.modulus() as u64;
    let (b, r) = (code.message_len(), code.random_len());
    let total = space(q, b + r).unwrap_or(u128::MAX);
    if total > budget {
        return Err(Error::BudgetExceeded { needed: total, budget });
    }
    let messages = space(q, b).unwrap();
    let randoms = space(q, r).unwrap();
    type ViewsOf<'a> = Box<dyn Fn(&[Fe]) -> Result<Vec<Vec<u32>>> + 'a>;
    let views: ViewsOf = if total <= DIRECT_LIMIT {
        Box::new(|msg: &[Fe]| {
            (0..randoms)
                .map(|ri| capture_values(code, view, msg, &digits(field, ri, r)))
                .collect()
        })
    } else {
        let g = view_map(code, view)?;
        check_linear(code, view, &g)?;
        let gu = g.column_range(0, b);
        let gr = g.column_range(b, b + r);
        let table: Vec<Vec<Fe>> = (0..randoms)
            .map(|ri| gr.mul_vec(&digits(field, ri, r)))
            .collect::<Result<_>>()?;
        Box::new(move |msg: &[Fe]| {
            let base = gu.mul_vec(msg)?;
            Ok(table
                .iter()
                .map(|t| base.iter().zip(t).map(|(&x, &y)| (x + y).value()).collect())
                .collect())
        })
    };
    let histogram = |mi: u128| -> Result<Vec<Vec<u32>>> {
        let mut h = views(&digits(field, mi, b))?;
        h.sort_unstable();
        Ok(h)
    };
    let reference = histogram(0)?;
    for mi in 1..messages {
        if histogram(mi)? != reference {
            let show = |i| digits(field, i, b).iter().map(|x| x.value() as u64).collect();
            return Ok(Leakage::Leaky {
                witness: (show(0), show(mi)),
            });
        }
    }
    Ok(Leakage::Secure)
}

fn check_linear<C: RegeneratingCode + ?Sized>(code: &C, view: &ViewSpec, g: &Matrix) -> Result<()> {
    let field = code.field();
    let len = code.message_len() + code.random_len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..8 {
        let x: Vec<Fe> = (0..len).map(|_| field.elem(rng.gen_range(0..field.modulus() as u64))).collect();
        let direct = capture_values(code, view, &x[..code.message_len()], &x[code.message_len()..])?;
        let via: Vec<u32> = g.mul_vec(&x)?.iter().map(|v| v.value()).collect();
        if direct != via {
            return Err(Error::InvalidParams("view is not a linear function of the stripe".into()));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Recoverability {
    Determined,
    Underdetermined { rank: usize, random_len: usize },
}

/// Whether the randomness is a function of the view once the message is
/// known: `rank(G_R) = R`, checked by actually solving for it.
pub fn randomness_recoverability<C: RegeneratingCode + ?Sized>(
    code: &C,
    view: &ViewSpec,
    message: &[Fe],
) -> Result<Recoverability> {
    let field = code.field();
    let (b, r) = (code.message_len(), code.random_len());
    let g = view_map(code, view)?;
    let gu = g.column_range(0, b);
    let gr = g.column_range(b, b + r);
    let rank = gr.rank();
    if r > 0 && rank < r {
        return Ok(Recoverability::Underdetermined { rank, random_len: r });
    }
    let randomness: Vec<Fe> = (0..r).map(|t| field.elem(t as u64 * 7 + 3)).collect();
    let seen: Vec<Fe> = capture_values(code, view, message, &randomness)?
        .into_iter()
        .map(|v| field.elem(v as u64))
        .collect();
    let residue: Vec<Fe> = seen.iter().zip(gu.mul_vec(message)?).map(|(&e, u)| e - u).collect();
    if r > 0 && gr.solve(&residue)? != randomness {
        return Err(Error::DecodeFailure("recovered randomness differs".into()));
    }
    Ok(Recoverability::Determined)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankReport {
    /// Rank of the full view map, an upper bound on the view's entropy in
    /// symbols.
    pub rank: usize,
    /// Rank restricted to the randomness columns.
    pub random_rank: usize,
    pub random_len: usize,
    /// `rank <= R`.
    pub pass: bool,
}

pub fn entropy_rank_check<C: RegeneratingCode + ?Sized>(code: &C, view: &ViewSpec) -> Result<RankReport> {
    let g = view_map(code, view)?;
    let (b, r) = (code.message_len(), code.random_len());
    let rank = g.rank();
    Ok(RankReport {
        rank,
        random_rank: g.column_range(b, b + r).rank(),
        random_len: r,
        pass: rank <= r,
    })
}

/// All three checks on one view, with the implication
/// `determined && rank <= R  =>  secure` asserted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewAudit {
    pub view: ViewSpec,
    pub leakage: Leakage,
    pub recoverability: Recoverability,
    pub rank: RankReport,
    pub implication_holds: bool,
}

pub fn audit_view<C: RegeneratingCode + ?Sized>(code: &C, view: &ViewSpec, budget: u128) -> Result<ViewAudit> {
    let field = code.field();
    let message: Vec<Fe> = (0..code.message_len()).map(|t| field.elem(t as u64 + 1)).collect();
    let leakage = leakage_oracle(code, view, budget)?;
    let recoverability = randomness_recoverability(code, view, &message)?;
    let rank = entropy_rank_check(code, view)?;
    let premise = recoverability == Recoverability::Determined && rank.pass;
    Ok(ViewAudit {
        view: view.clone(),
        implication_holds: !premise || leakage.is_secure(),
        leakage,
        recoverability,
        rank,
    })
}

/// Audits every view with `ell - m` storage taps and `m` repair taps.
pub fn audit_all_views<C: RegeneratingCode + ?Sized>(
    code: &C,
    ell: usize,
    m: usize,
    depth: usize,
    budget: u128,
) -> Result<Vec<ViewAudit>> {
    if m > ell || ell > code.n() {
        return Err(Error::InvalidParams(format!("no views with ell={ell}, m={m}")));
    }
    ViewSpec::all_admissible(code.n(), ell, m, depth)
        .iter()
        .map(|v| audit_view(code, v, budget))
        .collect()
}

/// How a helper's repair symbol is computed, given the other helpers in the
/// same repair.
pub trait RepairScheme {
    fn node_count(&self) -> usize;
    fn helper_count(&self) -> usize;
    fn helper_symbol_in(&self, helper: &Share, failed: usize, others: &[usize]) -> Result<Vec<Fe>>;
}

impl<C: RegeneratingCode> RepairScheme for C {
    fn node_count(&self) -> usize {
        self.n()
    }
    fn helper_count(&self) -> usize {
        self.d()
    }
    fn helper_symbol_in(&self, helper: &Share, failed: usize, _others: &[usize]) -> Result<Vec<Fe>> {
        self.helper_symbol(helper, failed)
    }
}

/// A scheme whose helper symbol shifts with the identities of the other
/// helpers. Used as a negative control.
pub struct ContextDependent<C>(pub C);

impl<C: RegeneratingCode> RepairScheme for ContextDependent<C> {
    fn node_count(&self) -> usize {
        self.0.n()
    }
    fn helper_count(&self) -> usize {
        self.0.d()
    }
    fn helper_symbol_in(&self, helper: &Share, failed: usize, others: &[usize]) -> Result<Vec<Fe>> {
        let shift = self.0.field().elem(others.iter().sum::<usize>() as u64);
        Ok(self.0.helper_symbol(helper, failed)?.into_iter().map(|x| x + shift).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Independence {
    Holds { checks: usize },
    Violated { failed: usize, helper: usize, contexts: (Vec<usize>, Vec<usize>) },
}

/// For every (failed, helper) pair, compares the helper's symbol across all
/// sets of `d - 1` co-helpers.
pub fn helper_independence<S: RepairScheme + ?Sized>(scheme: &S, shares: &[Share]) -> Result<Independence> {
    let n = scheme.node_count();
    let d = scheme.helper_count();
    let mut checks = 0;
    for failed in 1..=n {
        for helper in (1..=n).filter(|&h| h != failed) {
            let pool: Vec<usize> = (1..=n).filter(|&x| x != failed && x != helper).collect();
            let mut first: Option<(Vec<usize>, Vec<Fe>)> = None;
            for others in pool.into_iter().combinations(d - 1) {
                let sym = scheme.helper_symbol_in(&shares[helper - 1], failed, &others)?;
                checks += 1;
                match &first {
                    None => first = Some((others, sym)),
                    Some((ctx, s)) if *s != sym => {
                        return Ok(Independence::Violated {
                            failed,
                            helper,
                            contexts: (ctx.clone(), others),
                        })
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(Independence::Holds { checks })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzPath {
    Repair,
    Reconstruct,
    DetectRepair,
    DetectShares,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzMode {
    Exhaustive,
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzEntry {
    pub p: usize,
    pub path: FuzzPath,
    pub mode: FuzzMode,
    pub cases: u64,
    pub failures: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub entries: Vec<FuzzEntry>,
}

impl FuzzReport {
    pub fn failures(&self) -> u64 {
        self.entries.iter().map(|e| e.failures).sum()
    }

    pub fn cases(&self) -> u64 {
        self.entries.iter().map(|e| e.cases).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FuzzConfig {
    pub p_max: usize,
    /// Random trials per (p, path) when exhaustion is too large.
    pub trials: u64,
    pub seed: u64,
    /// Largest case count run exhaustively.
    pub exhaustive_budget: u64,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            p_max: 1,
            trials: 10_000,
            seed: 0,
            exhaustive_budget: 1_000_000,
        }
    }
}

fn binom(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

fn nonzero(field: PrimeField, rng: &mut ChaCha8Rng) -> Fe {
    field.elem(rng.gen_range(1..field.modulus() as u64))
}

/// Exhaustive sweeps where small enough, seeded random corruption otherwise,
/// over repair, reconstruction and both detection paths.
///
/// Exhaustive repair cases: every failed node, helper set of size `d + 2p`,
/// set of `p` corrupted helpers and nonzero error values. Exhaustive
/// reconstruction cases: every share set of size `k + 2p`, set of `p`
/// corrupted shares and nonzero error vector on each.
pub fn adversary_fuzz<C: RegeneratingCode + ?Sized>(code: &C, config: &FuzzConfig) -> Result<FuzzReport> {
    let field = code.field();
    let (n, k, d, alpha) = (code.n(), code.k(), code.d(), code.alpha());
    let q = field.modulus() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let msg: Vec<Fe> = (0..code.message_unit()).map(|_| field.elem(rng.gen_range(0..q))).collect();
    let shares = code.encode(&msg, &mut rng)?;
    let mut entries = vec![];

    for p in 0..=config.p_max {
        if d + 2 * p < n {
            let helper_sets = binom(n - 1, d + 2 * p);
            let count = n as u64 * helper_sets * binom(d + 2 * p, p) * (q - 1).saturating_pow(p as u32);
            let run = |failed: usize, set: &[usize], bad: &[usize], deltas: &[Fe]| -> Result<bool> {
                let hs: Vec<&Share> = set.iter().map(|&h| &shares[h - 1]).collect();
                let mut data = code.helper_data(&hs, failed)?;
                for (&b, &e) in bad.iter().zip(deltas) {
                    data[b].symbols[0] += e;
                }
                Ok(code.repair(failed, &data, p).ok().as_ref() == Some(&shares[failed - 1]))
            };
            let mut entry = FuzzEntry { p, path: FuzzPath::Repair, mode: FuzzMode::Exhaustive, cases: 0, failures: 0 };
            if count <= config.exhaustive_budget {
                for failed in 1..=n {
                    let others: Vec<usize> = (1..=n).filter(|&x| x != failed).collect();
                    for set in others.into_iter().combinations(d + 2 * p) {
                        for bad in (0..set.len()).combinations(p) {
                            for deltas in (0..p).map(|_| 1..q).multi_cartesian_product() {
                                let deltas: Vec<Fe> = deltas.into_iter().map(|v| field.elem(v)).collect();
                                entry.cases += 1;
                                entry.failures += !run(failed, &set, &bad, &deltas)? as u64;
                            }
                        }
                    }
                }
            } else {
                entry.mode = FuzzMode::Random;
                for _ in 0..config.trials {
                    let failed = rng.gen_range(1..=n);
                    let others: Vec<usize> = (1..=n).filter(|&x| x != failed).collect();
                    let set = sample(&others, d + 2 * p, &mut rng);
                    let weight = rng.gen_range(0..=p);
                    let bad = sample(&(0..set.len()).collect_vec(), weight, &mut rng);
                    let deltas: Vec<Fe> = (0..weight).map(|_| nonzero(field, &mut rng)).collect();
                    entry.cases += 1;
                    entry.failures += !run(failed, &set, &bad, &deltas)? as u64;
                }
            }
            entries.push(entry);

            // detection with d + p helpers
            if d + p < n {
                let mut entry = FuzzEntry { p, path: FuzzPath::DetectRepair, mode: FuzzMode::Random, cases: 0, failures: 0 };
                for _ in 0..config.trials.min(5_000) {
                    let failed = rng.gen_range(1..=n);
                    let others: Vec<usize> = (1..=n).filter(|&x| x != failed).collect();
                    let set = sample(&others, d + p, &mut rng);
                    let hs: Vec<&Share> = set.iter().map(|&h| &shares[h - 1]).collect();
                    let mut data = code.helper_data(&hs, failed)?;
                    let weight = rng.gen_range(0..=p);
                    for b in sample(&(0..set.len()).collect_vec(), weight, &mut rng) {
                        data[b].symbols[0] += nonzero(field, &mut rng);
                    }
                    let want = if weight == 0 { Detection::Clean } else { Detection::Corrupted };
                    entry.cases += 1;
                    entry.failures += (code.detect_repair(failed, &data, p)? != want) as u64;
                }
                entries.push(entry);
            }
        }

        if k + 2 * p <= n {
            let share_sets = binom(n, k + 2 * p);
            let per_share = (q as u128).pow(alpha as u32) - 1;
            let count = (share_sets as u128) * binom(k + 2 * p, p) as u128 * per_share.pow(p as u32);
            let run = |set: &[usize], bad: &[usize], errs: &[Vec<Fe>]| -> Result<bool> {
                let mut chosen: Vec<Share> = set.iter().map(|&i| shares[i - 1].clone()).collect();
                for (&b, e) in bad.iter().zip(errs) {
                    for (x, &y) in chosen[b].stripes[0].iter_mut().zip(e) {
                        *x += y;
                    }
                }
                Ok(code.reconstruct(&chosen, p).ok().as_deref() == Some(&msg[..]))
            };
            let mut entry = FuzzEntry { p, path: FuzzPath::Reconstruct, mode: FuzzMode::Exhaustive, cases: 0, failures: 0 };
            if count <= config.exhaustive_budget as u128 {
                let error_vectors: Vec<Vec<Fe>> = (0..alpha)
                    .map(|_| 0..q)
                    .multi_cartesian_product()
                    .filter(|v| v.iter().any(|&x| x != 0))
                    .map(|v| v.into_iter().map(|x| field.elem(x)).collect())
                    .collect();
                for set in (1..=n).combinations(k + 2 * p) {
                    for bad in (0..set.len()).combinations(p) {
                        for errs in (0..p).map(|_| error_vectors.iter().cloned()).multi_cartesian_product() {
                            entry.cases += 1;
                            entry.failures += !run(&set, &bad, &errs)? as u64;
                        }
                    }
                }
            } else {
                entry.mode = FuzzMode::Random;
                for _ in 0..config.trials {
                    let set = sample(&(1..=n).collect_vec(), k + 2 * p, &mut rng);
                    let weight = rng.gen_range(0..=p);
                    let bad = sample(&(0..set.len()).collect_vec(), weight, &mut rng);
                    let errs: Vec<Vec<Fe>> = (0..weight)
                        .map(|_| {
                            let mut e: Vec<Fe> = (0..alpha).map(|_| field.elem(rng.gen_range(0..q))).collect();
                            if e.iter().all(|x| x.is_zero()) {
                                e[0] = field.one();
                            }
                            e
                        })
                        .collect();
                    entry.cases += 1;
                    entry.failures += !run(&set, &bad, &errs)? as u64;
                }
            }
            entries.push(entry);
        }

        if k + p <= n {
            let mut entry = FuzzEntry { p, path: FuzzPath::DetectShares, mode: FuzzMode::Random, cases: 0, failures: 0 };
            for _ in 0..config.trials.min(5_000) {
                let set = sample(&(1..=n).collect_vec(), k + p, &mut rng);
                let mut chosen: Vec<Share> = set.iter().map(|&i| shares[i - 1].clone()).collect();
                let weight = rng.gen_range(0..=p);
                for b in sample(&(0..set.len()).collect_vec(), weight, &mut rng) {
                    let j = rng.gen_range(0..alpha);
                    chosen[b].stripes[0][j] += nonzero(field, &mut rng);
                }
                let want = if weight == 0 { Detection::Clean } else { Detection::Corrupted };
                entry.cases += 1;
                entry.failures += (code.detect_shares(&chosen, p)? != want) as u64;
            }
            entries.push(entry);
        }
    }
    Ok(FuzzReport { entries })
}

/// `count` distinct elements of `pool`, in ascending pool order.
fn sample(pool: &[usize], count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx: BTreeSet<usize> = BTreeSet::new();
    for i in rand::seq::index::sample(rng, pool.len(), count) {
        idx.insert(i);
    }
    idx.into_iter().map(|i| pool[i]).collect()
}
