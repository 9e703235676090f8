//! Product-matrix codes at the minimum-bandwidth point.
//!
//! The message matrix is the symmetric `d x d` matrix
//!
//! ```text
//!     M = | S    V |      S: k x k symmetric, V: k x (d-k)
//!         | V^T  0 |
//! ```
//!
//! and node `i` stores `psi_i^T M`. With secrecy `(ell, m)`, the cells in the
//! first `ell` rows of `S` and `V` hold random symbols.

use serde::{Deserialize, Serialize};

use crate::algebra::{dot, EncodingMatrix, Fe, Flavor, Matrix, PrimeField};
use crate::code::{check_helpers, check_node, check_share, check_shares, CodeSpec, HelperData, Regime, RegeneratingCode, Share};
use crate::error::{Error, Result};
use crate::mds::{Detection, MdsDecoder};

/// Parameters of an MBR code. Sizes include the `beta` factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MbrParams {
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub beta: usize,
    pub ell: usize,
    pub m: usize,
    pub alpha: usize,
    pub b: usize,
    pub b_star: usize,
    pub r: usize,
}

impl MbrParams {
    pub fn derive(n: usize, k: usize, d: usize, beta: usize, ell: usize, m: usize) -> Result<Self> {
        if !(1 <= k && k <= d && d < n) {
            return Err(Error::InvalidParams(format!("need 1 <= k <= d <= n-1, got n={n} k={k} d={d}")));
        }
        if beta == 0 {
            return Err(Error::InvalidParams("beta must be positive".into()));
        }
        if !(m <= ell && ell < k) {
            return Err(Error::InvalidParams(format!("need m <= ell < k, got ell={ell} m={m} k={k}")));
        }
        let b = (k * d - k * (k - 1) / 2) * beta;
        let b_star = b - (ell * d - ell * (ell.saturating_sub(1)) / 2) * beta;
        Ok(MbrParams {
            n,
            k,
            d,
            beta,
            ell,
            m,
            alpha: d * beta,
            b,
            b_star,
            r: b - b_star,
        })
    }

    /// Message symbols per stripe.
    pub fn unit_b_star(&self) -> usize {
        self.b_star / self.beta
    }

    /// Random symbols per stripe.
    pub fn unit_r(&self) -> usize {
        self.r / self.beta
    }
}

/// An MBR code bound to an encoding matrix.
#[derive(Clone, Debug)]
pub struct MbrCode {
    params: MbrParams,
    psi: EncodingMatrix,
    message_cells: Vec<(usize, usize)>,
    random_cells: Vec<(usize, usize)>,
}

impl MbrCode {
    pub fn new(params: MbrParams, psi: EncodingMatrix) -> Result<Self> {
        let MbrParams { n, k, d, ell, .. } = params;
        if psi.n() != n || psi.width() != d {
            return Err(Error::DimensionMismatch(format!(
                "encoding matrix is {}x{}, code needs {n}x{d}",
                psi.n(),
                psi.width()
            )));
        }
        if psi.flavor() == Flavor::SystematicMbr && ell > 0 {
            return Err(Error::InvalidParams("a code with secrecy cannot be systematic".into()));
        }
        // Vandermonde rows over distinct points satisfy every rank condition.
        if psi.flavor() != Flavor::Vandermonde {
            if !psi.check_mds() || !psi.check_leading(k) {
                return Err(Error::InvalidParams("encoding matrix is not MDS".into()));
            }
            if ell > 0 && !psi.check_leading(ell) {
                return Err(Error::InvalidParams(format!("first {ell} columns are not MDS")));
            }
        }
        let (message_cells, random_cells) = cell_layout(k, d, ell);
        Ok(MbrCode {
            params,
            psi,
            message_cells,
            random_cells,
        })
    }

    pub fn params(&self) -> &MbrParams {
        &self.params
    }

    pub fn psi(&self) -> &EncodingMatrix {
        &self.psi
    }

    /// Cells `(row, col)` of `M` holding message symbols, in fill order.
    pub fn message_cells(&self) -> &[(usize, usize)] {
        &self.message_cells
    }

    /// Cells of `M` holding random symbols, in fill order.
    pub fn random_cells(&self) -> &[(usize, usize)] {
        &self.random_cells
    }

    pub fn spec(&self) -> CodeSpec {
        let p = &self.params;
        let mut spec = CodeSpec::new(Regime::Mbr, p.n, p.k, p.d, self.field().modulus() as u64)
            .with_beta(p.beta)
            .secure(p.ell, p.m);
        match self.psi.flavor() {
            Flavor::Vandermonde => {
                let pts: Vec<u64> = self.psi.points().unwrap().iter().map(|x| x.value() as u64).collect();
                spec = spec.with_points(&pts);
            }
            Flavor::SystematicMbr => spec = spec.systematic(),
            Flavor::Custom => spec = spec.with_psi(self.psi.psi().to_u64_rows()),
        }
        spec
    }

    /// Decodes the message matrices of all stripes.
    fn decode_matrices(&self, shares: &[Share], stripes: usize, p: usize) -> Result<Vec<Matrix>> {
        let MbrParams { k, d, .. } = self.params;
        let field = self.field();
        let rows: Vec<usize> = shares.iter().map(|s| s.node - 1).collect();
        let sub = self.psi.restrict_rows(&rows);
        let dec = MdsDecoder::new(sub.restrict_cols(k), p)?;
        let delta = sub.psi().column_range(k, d);
        let mut out = Vec::with_capacity(stripes);
        for s in 0..stripes {
            let mut m = Matrix::zeros(field, d, d);
            // columns k..d of the data are Phi V
            for j in k..d {
                let col: Vec<Fe> = shares.iter().map(|sh| sh.stripes[s][j]).collect();
                let v = dec.decode(&col)?;
                for (r, &x) in v.iter().enumerate() {
                    m[(r, j)] = x;
                    m[(j, r)] = x;
                }
            }
            // columns 0..k are Phi S + Delta V^T
            for j in 0..k {
                let col: Vec<Fe> = shares
                    .iter()
                    .enumerate()
                    .map(|(i, sh)| {
                        let dv = if d > k { dot(delta.row(i), &m.row(j)[k..d]) } else { field.zero() };
                        sh.stripes[s][j] - dv
                    })
                    .collect();
                let sc = dec.decode(&col)?;
                for (r, &x) in sc.iter().enumerate() {
                    m[(r, j)] = x;
                }
            }
            if !m.is_symmetric() {
                return Err(Error::DecodeFailure("decoded S is not symmetric".into()));
            }
            out.push(m);
        }
        Ok(out)
    }
}

type Cells = Vec<(usize, usize)>;

/// Message and random cells of the upper triangle of `M`.
///
/// `S` cells come first, then `V` cells, each row-major. Cells in the first
/// `ell` rows are random.
fn cell_layout(k: usize, d: usize, ell: usize) -> (Cells, Cells) {
    let s_cells = (0..k).flat_map(|r| (r..k).map(move |c| (r, c)));
    let v_cells = (0..k).flat_map(|r| (k..d).map(move |c| (r, c)));
    let all: Vec<(usize, usize)> = s_cells.chain(v_cells).collect();
    let (random, message) = all.into_iter().partition(|&(r, _)| r < ell);
    (message, random)
}

impl RegeneratingCode for MbrCode {
    fn field(&self) -> PrimeField {
        self.psi.field()
    }
    fn n(&self) -> usize {
        self.params.n
    }
    fn k(&self) -> usize {
        self.params.k
    }
    fn d(&self) -> usize {
        self.params.d
    }
    fn alpha(&self) -> usize {
        self.params.alpha / self.params.beta
    }
    fn beta(&self) -> usize {
        self.params.beta
    }
    fn message_len(&self) -> usize {
        self.message_cells.len()
    }
    fn random_len(&self) -> usize {
        self.random_cells.len()
    }
    fn regime(&self) -> Regime {
        Regime::Mbr
    }

    fn message_matrix(&self, message: &[Fe], randomness: &[Fe]) -> Result<Matrix> {
        if message.len() != self.message_len() || randomness.len() != self.random_len() {
            return Err(Error::DimensionMismatch(format!(
                "stripe needs {} message and {} random symbols, got {} and {}",
                self.message_len(),
                self.random_len(),
                message.len(),
                randomness.len()
            )));
        }
        let d = self.params.d;
        let mut m = Matrix::zeros(self.field(), d, d);
        let cells = self.random_cells.iter().zip(randomness).chain(self.message_cells.iter().zip(message));
        for (&(r, c), &x) in cells {
            m[(r, c)] = x;
            m[(c, r)] = x;
        }
        Ok(m)
    }

    fn encode_stripe(&self, message: &[Fe], randomness: &[Fe]) -> Result<Matrix> {
        self.psi.psi().mul(&self.message_matrix(message, randomness)?)
    }

    fn helper_symbol(&self, helper: &Share, failed: usize) -> Result<Vec<Fe>> {
        check_node(helper.node, self.n())?;
        check_node(failed, self.n())?;
        check_share(helper, helper.stripes.len(), self.alpha(), self.field())?;
        let psi_f = self.psi.row(failed - 1);
        Ok(helper.stripes.iter().map(|v| dot(v, psi_f)).collect())
    }

    fn repair(&self, failed: usize, helpers: &[HelperData], p: usize) -> Result<Share> {
        let stripes = check_helpers(self.n(), self.d(), failed, helpers, 2 * p)?;
        let rows: Vec<usize> = helpers.iter().map(|h| h.node - 1).collect();
        let dec = MdsDecoder::new(self.psi.restrict_rows(&rows), p)?;
        let mut out = Vec::with_capacity(stripes);
        for s in 0..stripes {
            let y: Vec<Fe> = helpers.iter().map(|h| h.symbols[s]).collect();
            // M psi_f, which equals the stored row by symmetry
            out.push(dec.decode(&y)?);
        }
        Ok(Share::new(failed, out))
    }

    fn reconstruct(&self, shares: &[Share], p: usize) -> Result<Vec<Fe>> {
        let stripes = check_shares(self.n(), self.k(), self.alpha(), self.field(), shares, 2 * p)?;
        let mats = self.decode_matrices(shares, stripes, p)?;
        Ok(mats
            .iter()
            .flat_map(|m| self.message_cells.iter().map(move |&(r, c)| m[(r, c)]))
            .collect())
    }

    fn detect_repair(&self, failed: usize, helpers: &[HelperData], p: usize) -> Result<Detection> {
        let stripes = check_helpers(self.n(), self.d(), failed, helpers, p)?;
        let rows: Vec<usize> = helpers.iter().map(|h| h.node - 1).collect();
        let dec = MdsDecoder::new(self.psi.restrict_rows(&rows), 0)?;
        for s in 0..stripes {
            let y: Vec<Fe> = helpers.iter().map(|h| h.symbols[s]).collect();
            if dec.consistent(&y).is_none() {
                return Ok(Detection::Corrupted);
            }
        }
        Ok(Detection::Clean)
    }

    fn detect_shares(&self, shares: &[Share], p: usize) -> Result<Detection> {
        let stripes = check_shares(self.n(), self.k(), self.alpha(), self.field(), shares, p)?;
        Ok(match self.decode_matrices(shares, stripes, 0) {
            Ok(_) => Detection::Clean,
            Err(_) => Detection::Corrupted,
        })
    }
}
