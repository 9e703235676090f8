//! Types shared by the MBR and MSR codes.

use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::algebra::{EncodingMatrix, Fe, Matrix, PrimeField};
use crate::error::{Error, Result};
use crate::mbr::{MbrCode, MbrParams};
use crate::mds::Detection;
use crate::msr::{MsrCode, MsrParams};

/// Data held by one node: `alpha` symbols for every stripe.
///
/// A stripe is one independent `beta = 1` instance of the code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Share {
    /// 1-based node index.
    pub node: usize,
    pub stripes: Vec<Vec<Fe>>,
}

impl Share {
    pub fn new(node: usize, stripes: Vec<Vec<Fe>>) -> Self {
        Share { node, stripes }
    }

    pub fn stripe_count(&self) -> usize {
        self.stripes.len()
    }
}

/// What a helper sends for a repair: one symbol per stripe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HelperData {
    pub node: usize,
    pub symbols: Vec<Fe>,
}

impl HelperData {
    pub fn new(node: usize, symbols: Vec<Fe>) -> Self {
        HelperData { node, symbols }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Mbr,
    Msr,
}

/// Operations common to product-matrix codes. All counts are per stripe.
pub trait RegeneratingCode {
    fn field(&self) -> PrimeField;
    fn n(&self) -> usize;
    fn k(&self) -> usize;
    fn d(&self) -> usize;
    /// Symbols stored per node per stripe.
    fn alpha(&self) -> usize;
    /// Stripes per logical `beta`-block.
    fn beta(&self) -> usize;
    /// Message symbols per stripe.
    fn message_len(&self) -> usize;
    /// Random symbols per stripe.
    fn random_len(&self) -> usize;
    fn regime(&self) -> Regime;

    /// Message matrix of one stripe.
    fn message_matrix(&self, message: &[Fe], randomness: &[Fe]) -> Result<Matrix>;

    /// Node contents of one stripe, one row per node.
    fn encode_stripe(&self, message: &[Fe], randomness: &[Fe]) -> Result<Matrix>;

    /// Symbols the helper sends towards the repair of `failed`. Depends only
    /// on the helper's own data and the identity of the failed node.
    fn helper_symbol(&self, helper: &Share, failed: usize) -> Result<Vec<Fe>>;

    /// Rebuilds the share of `failed` from `d + 2p` or more helpers.
    fn repair(&self, failed: usize, helpers: &[HelperData], p: usize) -> Result<Share>;

    /// Recovers the message from `k + 2p` or more shares.
    fn reconstruct(&self, shares: &[Share], p: usize) -> Result<Vec<Fe>>;

    /// Checks `d + p` or more helper symbols for consistency.
    fn detect_repair(&self, failed: usize, helpers: &[HelperData], p: usize) -> Result<Detection>;

    /// Checks `k + p` or more shares for consistency.
    fn detect_shares(&self, shares: &[Share], p: usize) -> Result<Detection>;

    /// Message symbols per `beta`-block; messages are whole multiples.
    fn message_unit(&self) -> usize {
        self.message_len() * self.beta()
    }

    /// Encodes with explicit randomness (`random_len()` per stripe).
    fn encode_with(&self, message: &[Fe], randomness: &[Fe]) -> Result<Vec<Share>> {
        let unit = self.message_unit();
        if unit == 0 || message.is_empty() || !message.len().is_multiple_of(unit) {
            return Err(Error::ShortMessage {
                got: message.len(),
                unit,
            });
        }
        let stripes = message.len() / self.message_len();
        let r = self.random_len();
        if randomness.len() != stripes * r {
            return Err(Error::DimensionMismatch(format!(
                "need {} random symbols, got {}",
                stripes * r,
                randomness.len()
            )));
        }
        let mut shares: Vec<Share> = (1..=self.n()).map(|i| Share::new(i, Vec::with_capacity(stripes))).collect();
        for (s, chunk) in message.chunks(self.message_len()).enumerate() {
            let c = self.encode_stripe(chunk, &randomness[s * r..(s + 1) * r])?;
            for (i, share) in shares.iter_mut().enumerate() {
                share.stripes.push(c.row(i).to_vec());
            }
        }
        Ok(shares)
    }

    /// Encodes, drawing the random symbols uniformly from `rng`.
    fn encode(&self, message: &[Fe], rng: &mut dyn RngCore) -> Result<Vec<Share>> {
        let field = self.field();
        let stripes = if self.message_len() == 0 { 0 } else { message.len() / self.message_len() };
        let randomness: Vec<Fe> = (0..stripes * self.random_len())
            .map(|_| field.elem(rng.gen_range(0..field.modulus() as u64)))
            .collect();
        self.encode_with(message, &randomness)
    }

    /// Helper data for a repair, computed from the helpers' shares.
    fn helper_data(&self, helpers: &[&Share], failed: usize) -> Result<Vec<HelperData>> {
        helpers
            .iter()
            .map(|h| Ok(HelperData::new(h.node, self.helper_symbol(h, failed)?)))
            .collect()
    }
}

/// Coefficients of every stored symbol of one stripe as linear forms in
/// `(message ++ randomness)`. Entry `i` is the `alpha x (B* + R)` matrix of
/// node `i + 1`.
pub fn node_forms<C: RegeneratingCode + ?Sized>(code: &C) -> Result<Vec<Matrix>> {
    let field = code.field();
    let (b, r) = (code.message_len(), code.random_len());
    let mut forms = vec![Matrix::zeros(field, code.alpha(), b + r); code.n()];
    for t in 0..b + r {
        let mut unit = vec![field.zero(); b + r];
        unit[t] = field.one();
        let c = code.encode_stripe(&unit[..b], &unit[b..])?;
        for (i, form) in forms.iter_mut().enumerate() {
            for j in 0..code.alpha() {
                form[(j, t)] = c[(i, j)];
            }
        }
    }
    Ok(forms)
}

/// Checks a node index against `1..=n`.
pub(crate) fn check_node(node: usize, n: usize) -> Result<()> {
    if node == 0 || node > n {
        return Err(Error::InvalidParams(format!("node {node} outside 1..={n}")));
    }
    Ok(())
}

/// Validates a helper set and returns the common stripe count.
pub(crate) fn check_helpers(
    n: usize,
    d: usize,
    failed: usize,
    helpers: &[HelperData],
    min_extra: usize,
) -> Result<usize> {
    check_node(failed, n)?;
    if helpers.len() < d + min_extra {
        return Err(Error::NotEnoughHelpers {
            needed: d + min_extra,
            got: helpers.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for h in helpers {
        check_node(h.node, n)?;
        if h.node == failed {
            return Err(Error::InvalidParams(format!("node {failed} cannot help repair itself")));
        }
        if !seen.insert(h.node) {
            return Err(Error::InvalidParams(format!("helper {} listed twice", h.node)));
        }
    }
    let stripes = helpers[0].symbols.len();
    if helpers.iter().any(|h| h.symbols.len() != stripes) {
        return Err(Error::InvalidShare("helpers disagree on the stripe count".into()));
    }
    Ok(stripes)
}

/// Validates a share set and returns the common stripe count.
pub(crate) fn check_shares(
    n: usize,
    k: usize,
    alpha: usize,
    field: PrimeField,
    shares: &[Share],
    min_extra: usize,
) -> Result<usize> {
    if shares.len() < k + min_extra {
        return Err(Error::NotEnoughShares {
            needed: k + min_extra,
            got: shares.len(),
        });
    }
    let mut seen = BTreeSet::new();
    for s in shares {
        check_node(s.node, n)?;
        if !seen.insert(s.node) {
            return Err(Error::InvalidParams(format!("share of node {} given twice", s.node)));
        }
    }
    let stripes = shares[0].stripes.len();
    for s in shares {
        check_share(s, stripes, alpha, field)?;
    }
    Ok(stripes)
}

pub(crate) fn check_share(s: &Share, stripes: usize, alpha: usize, field: PrimeField) -> Result<()> {
    if s.stripes.len() != stripes {
        return Err(Error::InvalidShare(format!(
            "node {} has {} stripes, expected {stripes}",
            s.node,
            s.stripes.len()
        )));
    }
    for v in &s.stripes {
        if v.len() != alpha {
            return Err(Error::InvalidShare(format!(
                "node {} stripe has {} symbols, expected {alpha}",
                s.node,
                v.len()
            )));
        }
        if v.iter().any(|x| x.field() != field) {
            return Err(Error::InvalidShare(format!("node {} holds symbols of another field", s.node)));
        }
    }
    Ok(())
}

/// Either kind of code behind one type.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Code {
    Mbr(MbrCode),
    Msr(MsrCode),
}

macro_rules! dispatch {
    ($self:ident, $c:ident => $e:expr) => {
        match $self {
            Code::Mbr($c) => $e,
            Code::Msr($c) => $e,
        }
    };
}

impl RegeneratingCode for Code {
    fn field(&self) -> PrimeField {
        dispatch!(self, c => c.field())
    }
    fn n(&self) -> usize {
        dispatch!(self, c => c.n())
    }
    fn k(&self) -> usize {
        dispatch!(self, c => c.k())
    }
    fn d(&self) -> usize {
        dispatch!(self, c => c.d())
    }
    fn alpha(&self) -> usize {
        dispatch!(self, c => c.alpha())
    }
    fn beta(&self) -> usize {
        dispatch!(self, c => c.beta())
    }
    fn message_len(&self) -> usize {
        dispatch!(self, c => c.message_len())
    }
    fn random_len(&self) -> usize {
        dispatch!(self, c => c.random_len())
    }
    fn regime(&self) -> Regime {
        dispatch!(self, c => c.regime())
    }
    fn message_matrix(&self, message: &[Fe], randomness: &[Fe]) -> Result<Matrix> {
        dispatch!(self, c => c.message_matrix(message, randomness))
    }
    fn encode_stripe(&self, message: &[Fe], randomness: &[Fe]) -> Result<Matrix> {
        dispatch!(self, c => c.encode_stripe(message, randomness))
    }
    fn helper_symbol(&self, helper: &Share, failed: usize) -> Result<Vec<Fe>> {
        dispatch!(self, c => c.helper_symbol(helper, failed))
    }
    fn repair(&self, failed: usize, helpers: &[HelperData], p: usize) -> Result<Share> {
        dispatch!(self, c => c.repair(failed, helpers, p))
    }
    fn reconstruct(&self, shares: &[Share], p: usize) -> Result<Vec<Fe>> {
        dispatch!(self, c => c.reconstruct(shares, p))
    }
    fn detect_repair(&self, failed: usize, helpers: &[HelperData], p: usize) -> Result<Detection> {
        dispatch!(self, c => c.detect_repair(failed, helpers, p))
    }
    fn detect_shares(&self, shares: &[Share], p: usize) -> Result<Detection> {
        dispatch!(self, c => c.detect_shares(shares, p))
    }
}

impl Code {
    pub fn spec(&self) -> CodeSpec {
        match self {
            Code::Mbr(c) => c.spec(),
            Code::Msr(c) => c.spec(),
        }
    }

    /// Secrecy parameters `(ell, m)`.
    pub fn secrecy(&self) -> (usize, usize) {
        match self {
            Code::Mbr(c) => (c.params().ell, c.params().m),
            Code::Msr(c) => (c.params().ell, c.params().m),
        }
    }
}

fn one() -> usize {
    1
}

/// Serializable description of a code, as used in CLI configs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub regime: Regime,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    /// Prime modulus of the field.
    pub field: u64,
    #[serde(default = "one")]
    pub beta: usize,
    #[serde(default)]
    pub ell: usize,
    #[serde(default)]
    pub m: usize,
    /// Explicit Vandermonde evaluation points (one per row of Ψ).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<u64>>,
    /// Explicit rows of Ψ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Vec<Vec<u64>>>,
    #[serde(default)]
    pub systematic: bool,
}

impl CodeSpec {
    pub fn new(regime: Regime, n: usize, k: usize, d: usize, field: u64) -> Self {
        CodeSpec {
            regime,
            n,
            k,
            d,
            field,
            beta: 1,
            ell: 0,
            m: 0,
            points: None,
            psi: None,
            systematic: false,
        }
    }

    pub fn secure(mut self, ell: usize, m: usize) -> Self {
        self.ell = ell;
        self.m = m;
        self
    }

    pub fn with_points(mut self, points: &[u64]) -> Self {
        self.points = Some(points.to_vec());
        self
    }

    pub fn with_psi(mut self, rows: Vec<Vec<u64>>) -> Self {
        self.psi = Some(rows);
        self
    }

    pub fn systematic(mut self) -> Self {
        self.systematic = true;
        self
    }

    pub fn with_beta(mut self, beta: usize) -> Self {
        self.beta = beta;
        self
    }

    pub fn build(&self) -> Result<Code> {
        let field = PrimeField::new(self.field)?;
        if self.points.is_some() && self.psi.is_some() {
            return Err(Error::InvalidParams("give either points or psi, not both".into()));
        }
        match self.regime {
            Regime::Mbr => {
                let params = MbrParams::derive(self.n, self.k, self.d, self.beta, self.ell, self.m)?;
                let psi = match (&self.points, &self.psi) {
                    (Some(pts), _) => EncodingMatrix::vandermonde_with_points(field, &field.elems(pts), self.d)?,
                    (_, Some(rows)) => EncodingMatrix::custom(custom_matrix(field, rows)?),
                    _ if self.systematic => EncodingMatrix::systematic_mbr(field, self.n, self.k, self.d)?,
                    _ => EncodingMatrix::vandermonde(field, self.n, self.d, None)?,
                };
                Ok(Code::Mbr(MbrCode::new(params, psi)?))
            }
            Regime::Msr => {
                let params = MsrParams::derive(self.n, self.k, self.d, self.beta, self.ell, self.m)?;
                let (n, d) = (params.base_n(), params.base_d());
                let psi = match (&self.points, &self.psi) {
                    (Some(pts), _) => EncodingMatrix::vandermonde_with_points(field, &field.elems(pts), d)?,
                    (_, Some(_)) => {
                        return Err(Error::InvalidParams("MSR codes need Vandermonde points, not raw rows".into()))
                    }
                    _ => EncodingMatrix::vandermonde(field, n, d, Some(params.unit_alpha()))?,
                };
                Ok(Code::Msr(MsrCode::new(params, psi, self.systematic)?))
            }
        }
    }
}

fn custom_matrix(field: PrimeField, rows: &[Vec<u64>]) -> Result<Matrix> {
    let rows: Vec<Vec<Fe>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| field.try_elem(v)).collect::<Result<_>>())
        .collect::<Result<_>>()
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    Matrix::from_rows(field, &rows)
}
