//! Product-matrix codes at the minimum-storage point, for `d >= 2k - 2`.
//!
//! A base code with `d' = 2 alpha` and `k' = alpha + 1` uses the message
//! matrix `M = [S1; S2]` of two symmetric `alpha x alpha` blocks. Node `i`
//! stores `phi_i^T S1 + lambda_i phi_i^T S2`, where `psi_i = [phi_i, lambda_i
//! phi_i]` is a Vandermonde row and `lambda_i = x_i^alpha`.
//!
//! Codes with `d > 2k - 2` are obtained from a base code with `i = d - (2k -
//! 2)` extra nodes whose contents are forced to zero. Those nodes are never
//! stored; repair and reconstruction treat them as known zero shares.

use serde::{Deserialize, Serialize};

use crate::algebra::{dot, EncodingMatrix, Fe, Flavor, Matrix, PrimeField};
use crate::code::{check_helpers, check_node, check_share, check_shares, CodeSpec, HelperData, Regime, RegeneratingCode, Share};
use crate::error::{Error, Result};
use crate::mds::{Detection, MdsDecoder};

/// Parameters of an MSR code. Sizes include the `beta` factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MsrParams {
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
    /// Number of virtual zero nodes of the base code.
    pub shorten: usize,
}

impl MsrParams {
    pub fn derive(n: usize, k: usize, d: usize, beta: usize, ell: usize, m: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParams(format!("need k >= 2, got {k}")));
        }
        if d + 2 < 2 * k {
            return Err(Error::InvalidParams(format!("unsupported regime: d={d} < 2k-2={}", 2 * k - 2)));
        }
        if d >= n {
            return Err(Error::InvalidParams(format!("need d <= n-1, got n={n} d={d}")));
        }
        if beta == 0 {
            return Err(Error::InvalidParams("beta must be positive".into()));
        }
        if !(m <= ell && ell < k) {
            return Err(Error::InvalidParams(format!("need m <= ell < k, got ell={ell} m={m} k={k}")));
        }
        let alpha = (d - k + 1) * beta;
        Ok(MsrParams {
            n,
            k,
            d,
            beta,
            ell,
            m,
            alpha,
            b: k * alpha,
            b_star: (k - ell) * (alpha - m * beta),
            r: m * (k - ell) * beta + ell * alpha,
            shorten: d + 2 - 2 * k,
        })
    }

    pub fn unit_alpha(&self) -> usize {
        self.alpha / self.beta
    }

    pub fn base_n(&self) -> usize {
        self.n + self.shorten
    }

    pub fn base_k(&self) -> usize {
        self.k + self.shorten
    }

    pub fn base_d(&self) -> usize {
        self.d + self.shorten
    }

    pub fn base_ell(&self) -> usize {
        self.ell + self.shorten
    }
}

/// A cell of the upper triangle of `S1` (block 0) or `S2` (block 1).
pub type Cell = (usize, usize, usize);

/// Decoding pipeline for a fixed set of base-code rows, reusable across
/// stripes.
#[derive(Clone, Debug)]
struct Plan {
    rows: Vec<usize>,
    phi: Matrix,
    lambda: Vec<Fe>,
    /// `1 / (lambda_a - lambda_b)` for `a != b`, row-major.
    inv_diff: Vec<Fe>,
    /// Column `j`: decoder over all rows except `j`.
    stage1: Vec<MdsDecoder>,
    stage2: MdsDecoder,
}

impl Plan {
    fn new(psi: &EncodingMatrix, lambdas: &[Fe], alpha: usize, rows: Vec<usize>, p: usize) -> Result<Self> {
        let phi_gen = psi.restrict_rows(&rows).restrict_cols(alpha);
        let lambda: Vec<Fe> = rows.iter().map(|&r| lambdas[r]).collect();
        let t = rows.len();
        let field = psi.field();
        let mut inv_diff = vec![field.zero(); t * t];
        for a in 0..t {
            for b in 0..t {
                if a != b {
                    inv_diff[a * t + b] = (lambda[a] - lambda[b]).inv()?;
                }
            }
        }
        let stage1 = (0..t)
            .map(|j| {
                let others: Vec<usize> = (0..t).filter(|&a| a != j).collect();
                MdsDecoder::new(phi_gen.restrict_rows(&others), p)
            })
            .collect::<Result<_>>()?;
        Ok(Plan {
            rows,
            phi: phi_gen.psi().clone(),
            lambda,
            inv_diff,
            stage1,
            stage2: MdsDecoder::new(phi_gen, p)?,
        })
    }

    /// Recovers `[S1; S2]` from the rows `y` stored at `self.rows`.
    fn decode(&self, y: &Matrix) -> Result<Matrix> {
        let t = self.rows.len();
        let alpha = self.phi.cols();
        let field = self.phi.field();
        let z = y.mul(&self.phi.transpose())?;
        let mut pm = Matrix::zeros(field, t, t);
        let mut qm = Matrix::zeros(field, t, t);
        for a in 0..t {
            for b in 0..t {
                if a != b {
                    let q = (z[(a, b)] - z[(b, a)]) * self.inv_diff[a * t + b];
                    qm[(a, b)] = q;
                    pm[(a, b)] = z[(a, b)] - self.lambda[a] * q;
                }
            }
        }
        let mut out = Matrix::zeros(field, 2 * alpha, alpha);
        for (block, src) in [(0, &pm), (1, &qm)] {
            // Row j of w is (S phi_j)^T = phi_j^T S; a row that fails to
            // decode is left zero and absorbed by the second stage.
            let mut w = Matrix::zeros(field, t, alpha);
            for j in 0..t {
                let col: Vec<Fe> = (0..t).filter(|&a| a != j).map(|a| src[(a, j)]).collect();
                if let Ok(v) = self.stage1[j].decode(&col) {
                    for (c, x) in v.into_iter().enumerate() {
                        w[(j, c)] = x;
                    }
                }
            }
            let mut s = Matrix::zeros(field, alpha, alpha);
            for c in 0..alpha {
                let v = self.stage2.decode(&w.column(c))?;
                for (r, x) in v.into_iter().enumerate() {
                    s[(r, c)] = x;
                }
            }
            if !s.is_symmetric() {
                return Err(Error::DecodeFailure(format!("decoded S{} is not symmetric", block + 1)));
            }
            for r in 0..alpha {
                for c in 0..alpha {
                    out[(block * alpha + r, c)] = s[(r, c)];
                }
            }
        }
        Ok(out)
    }
}

/// Solver for the cells that force the virtual rows to zero.
#[derive(Clone, Debug)]
struct ZeroFill {
    cells: Vec<Cell>,
    /// Maps the contribution of the free cells to the fixed cells.
    inverse: Matrix,
}

#[derive(Clone, Debug)]
pub struct MsrCode {
    params: MsrParams,
    psi: EncodingMatrix,
    lambdas: Vec<Fe>,
    systematic: bool,
    message_cells: Vec<Cell>,
    random_cells: Vec<Cell>,
    zero_fill: Option<ZeroFill>,
    /// Reconstruction plan over the first `k'` base rows, for systematic
    /// encoding.
    systematic_plan: Option<Plan>,
}

impl MsrCode {
    /// `psi` is the `(n+i) x 2alpha` Vandermonde matrix of the base code.
    /// Shortened codes without secrecy are always systematic.
    pub fn new(params: MsrParams, psi: EncodingMatrix, systematic: bool) -> Result<Self> {
        let alpha = params.unit_alpha();
        let i = params.shorten;
        if psi.n() != params.base_n() || psi.width() != 2 * alpha {
            return Err(Error::DimensionMismatch(format!(
                "encoding matrix is {}x{}, code needs {}x{}",
                psi.n(),
                psi.width(),
                params.base_n(),
                2 * alpha
            )));
        }
        if psi.flavor() != Flavor::Vandermonde {
            return Err(Error::InvalidParams("MSR codes need a Vandermonde encoding matrix".into()));
        }
        if !psi.check_alpha_distinct(alpha) {
            return Err(Error::InvalidParams(format!("points do not have distinct {alpha}-th powers")));
        }
        if systematic && params.ell > 0 {
            return Err(Error::InvalidParams("a code with secrecy cannot be systematic".into()));
        }
        if params.b_star == 0 {
            return Err(Error::InvalidParams("secrecy parameters leave no room for a message".into()));
        }
        let systematic = systematic || (i > 0 && params.ell == 0);
        let lambdas = psi.lambdas(alpha).expect("vandermonde points");
        let mut code = MsrCode {
            params,
            psi,
            lambdas,
            systematic,
            message_cells: vec![],
            random_cells: vec![],
            zero_fill: None,
            systematic_plan: None,
        };
        if systematic {
            let rows: Vec<usize> = (0..params.base_k()).collect();
            code.systematic_plan = Some(Plan::new(&code.psi, &code.lambdas, alpha, rows, 0)?);
        } else {
            let (message, random, fixed) = cell_layout(alpha, params.base_ell(), params.m, i);
            code.message_cells = message;
            code.random_cells = random;
            if i > 0 {
                code.zero_fill = Some(code.zero_fill(fixed)?);
            }
        }
        Ok(code)
    }

    pub fn params(&self) -> &MsrParams {
        &self.params
    }

    pub fn psi(&self) -> &EncodingMatrix {
        &self.psi
    }

    pub fn is_systematic(&self) -> bool {
        self.systematic
    }

    /// Message cells in fill order (empty for systematic codes).
    pub fn message_cells(&self) -> &[Cell] {
        &self.message_cells
    }

    pub fn random_cells(&self) -> &[Cell] {
        &self.random_cells
    }

    /// Cells solved so that the virtual rows vanish.
    pub fn fixed_cells(&self) -> &[Cell] {
        self.zero_fill.as_ref().map_or(&[], |z| &z.cells)
    }

    pub fn spec(&self) -> CodeSpec {
        let p = &self.params;
        let pts: Vec<u64> = self.psi.points().unwrap().iter().map(|x| x.value() as u64).collect();
        let mut spec = CodeSpec::new(Regime::Msr, p.n, p.k, p.d, self.field().modulus() as u64)
            .with_beta(p.beta)
            .secure(p.ell, p.m)
            .with_points(&pts);
        spec.systematic = self.systematic;
        spec
    }

    fn alpha1(&self) -> usize {
        self.params.unit_alpha()
    }

    /// Base-code row of a 1-based node.
    fn base_row(&self, node: usize) -> usize {
        node - 1 + self.params.shorten
    }

    fn zero_fill(&self, cells: Vec<Cell>) -> Result<ZeroFill> {
        let alpha = self.alpha1();
        let i = self.params.shorten;
        let field = self.field();
        let top = self.psi.psi().select_rows(&(0..i).collect::<Vec<_>>());
        let mut a = Matrix::zeros(field, i * alpha, cells.len());
        for (t, &cell) in cells.iter().enumerate() {
            let mut e = Matrix::zeros(field, 2 * alpha, alpha);
            set_cell(&mut e, alpha, cell, field.one());
            let col = top.mul(&e)?;
            for r in 0..i {
                for c in 0..alpha {
                    a[(r * alpha + c, t)] = col[(r, c)];
                }
            }
        }
        let inverse = a.inverse().map_err(|_| {
            Error::InvalidParams("virtual rows cannot be zeroed with this encoding matrix".into())
        })?;
        Ok(ZeroFill { cells, inverse })
    }

    fn check_stripe(&self, message: &[Fe], randomness: &[Fe]) -> Result<()> {
        if message.len() != self.message_len() || randomness.len() != self.random_len() {
            return Err(Error::DimensionMismatch(format!(
                "stripe needs {} message and {} random symbols, got {} and {}",
                self.message_len(),
                self.random_len(),
                message.len(),
                randomness.len()
            )));
        }
        Ok(())
    }

    /// Reconstruction plan over the given nodes plus the virtual rows.
    fn plan(&self, nodes: impl Iterator<Item = usize>, p: usize) -> Result<Plan> {
        let rows: Vec<usize> = (0..self.params.shorten).chain(nodes.map(|n| self.base_row(n))).collect();
        Plan::new(&self.psi, &self.lambdas, self.alpha1(), rows, p)
    }

    fn stripe_rows(&self, shares: &[Share], s: usize) -> Matrix {
        let alpha = self.alpha1();
        let i = self.params.shorten;
        let mut y = Matrix::zeros(self.field(), i + shares.len(), alpha);
        for (r, sh) in shares.iter().enumerate() {
            for c in 0..alpha {
                y[(i + r, c)] = sh.stripes[s][c];
            }
        }
        y
    }

    fn extract_message(&self, m: &Matrix) -> Result<Vec<Fe>> {
        if self.systematic {
            let rows: Vec<usize> = (self.params.shorten..self.params.base_k()).collect();
            let u = self.psi.psi().select_rows(&rows).mul(m)?;
            Ok(u.row_vecs().concat())
        } else {
            let alpha = self.alpha1();
            Ok(self.message_cells.iter().map(|&(b, r, c)| m[(b * alpha + r, c)]).collect())
        }
    }
}

fn set_cell(m: &mut Matrix, alpha: usize, (b, r, c): Cell, x: Fe) {
    m[(b * alpha + r, c)] = x;
    m[(b * alpha + c, r)] = x;
}

/// Splits the upper-triangle cells of `S1` and `S2` into message, random
/// and fixed cells, each listed `S1` first and row-major.
///
/// Random cells: rows `< ell` of `S1`; of `S2`, columns `< ell - 1` and rows
/// `< m`. Fixed cells: rows `< i` of `S1` and columns `< i - 1` of `S2`.
fn cell_layout(alpha: usize, ell: usize, m: usize, i: usize) -> (Vec<Cell>, Vec<Cell>, Vec<Cell>) {
    let (mut message, mut random, mut fixed) = (vec![], vec![], vec![]);
    for b in 0..2 {
        for r in 0..alpha {
            for c in r..alpha {
                let cell = (b, r, c);
                let (is_fixed, is_random) = if b == 0 {
                    (r < i, r < ell)
                } else {
                    (c + 1 < i, c + 1 < ell || r < m)
                };
                if is_fixed {
                    fixed.push(cell);
                } else if is_random {
                    random.push(cell);
                } else {
                    message.push(cell);
                }
            }
        }
    }
    (message, random, fixed)
}

impl RegeneratingCode for MsrCode {
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
        self.alpha1()
    }
    fn beta(&self) -> usize {
        self.params.beta
    }
    fn message_len(&self) -> usize {
        if self.systematic {
            self.params.k * self.alpha1()
        } else {
            self.message_cells.len()
        }
    }
    fn random_len(&self) -> usize {
        self.random_cells.len()
    }
    fn regime(&self) -> Regime {
        Regime::Msr
    }

    fn message_matrix(&self, message: &[Fe], randomness: &[Fe]) -> Result<Matrix> {
        self.check_stripe(message, randomness)?;
        let alpha = self.alpha1();
        let field = self.field();
        if let Some(plan) = &self.systematic_plan {
            // the first k' base rows hold [0; U]
            let i = self.params.shorten;
            let mut y = Matrix::zeros(field, self.params.base_k(), alpha);
            for (t, &x) in message.iter().enumerate() {
                y[(i + t / alpha, t % alpha)] = x;
            }
            return plan.decode(&y);
        }
        let mut m = Matrix::zeros(field, 2 * alpha, alpha);
        let cells = self.random_cells.iter().zip(randomness).chain(self.message_cells.iter().zip(message));
        for (&cell, &x) in cells {
            set_cell(&mut m, alpha, cell, x);
        }
        if let Some(zf) = &self.zero_fill {
            let i = self.params.shorten;
            let top = self.psi.psi().select_rows(&(0..i).collect::<Vec<_>>()).mul(&m)?;
            let rhs: Vec<Fe> = top.row_vecs().concat().into_iter().map(|x| -x).collect();
            let vals = zf.inverse.mul_vec(&rhs)?;
            for (&cell, x) in zf.cells.iter().zip(vals) {
                set_cell(&mut m, alpha, cell, x);
            }
        }
        Ok(m)
    }

    fn encode_stripe(&self, message: &[Fe], randomness: &[Fe]) -> Result<Matrix> {
        let m = self.message_matrix(message, randomness)?;
        let c = self.psi.psi().mul(&m)?;
        let i = self.params.shorten;
        debug_assert!((0..i).all(|r| c.row(r).iter().all(|x| x.is_zero())));
        Ok(c.select_rows(&(i..self.params.base_n()).collect::<Vec<_>>()))
    }

    fn helper_symbol(&self, helper: &Share, failed: usize) -> Result<Vec<Fe>> {
        check_node(helper.node, self.n())?;
        check_node(failed, self.n())?;
        check_share(helper, helper.stripes.len(), self.alpha(), self.field())?;
        let phi_f = &self.psi.row(self.base_row(failed))[..self.alpha1()];
        Ok(helper.stripes.iter().map(|v| dot(v, phi_f)).collect())
    }

    fn repair(&self, failed: usize, helpers: &[HelperData], p: usize) -> Result<Share> {
        let stripes = check_helpers(self.n(), self.d(), failed, helpers, 2 * p)?;
        let i = self.params.shorten;
        let alpha = self.alpha1();
        let field = self.field();
        let rows: Vec<usize> = (0..i).chain(helpers.iter().map(|h| self.base_row(h.node))).collect();
        let dec = MdsDecoder::new(self.psi.restrict_rows(&rows), p)?;
        let lambda_f = self.lambdas[self.base_row(failed)];
        let mut y = vec![field.zero(); rows.len()];
        let mut out = Vec::with_capacity(stripes);
        for s in 0..stripes {
            for (t, h) in helpers.iter().enumerate() {
                y[i + t] = h.symbols[s];
            }
            // mu = [S1 phi_f; S2 phi_f]
            let mu = dec.decode(&y)?;
            out.push((0..alpha).map(|c| mu[c] + lambda_f * mu[alpha + c]).collect());
        }
        Ok(Share::new(failed, out))
    }

    fn reconstruct(&self, shares: &[Share], p: usize) -> Result<Vec<Fe>> {
        let stripes = check_shares(self.n(), self.k(), self.alpha(), self.field(), shares, 2 * p)?;
        let plan = self.plan(shares.iter().map(|s| s.node), p)?;
        let mut out = Vec::with_capacity(stripes * self.message_len());
        for s in 0..stripes {
            let m = plan.decode(&self.stripe_rows(shares, s))?;
            out.extend(self.extract_message(&m)?);
        }
        Ok(out)
    }

    fn detect_repair(&self, failed: usize, helpers: &[HelperData], p: usize) -> Result<Detection> {
        let stripes = check_helpers(self.n(), self.d(), failed, helpers, p)?;
        let i = self.params.shorten;
        let rows: Vec<usize> = (0..i).chain(helpers.iter().map(|h| self.base_row(h.node))).collect();
        let dec = MdsDecoder::new(self.psi.restrict_rows(&rows), 0)?;
        let mut y = vec![self.field().zero(); rows.len()];
        for s in 0..stripes {
            for (t, h) in helpers.iter().enumerate() {
                y[i + t] = h.symbols[s];
            }
            if dec.consistent(&y).is_none() {
                return Ok(Detection::Corrupted);
            }
        }
        Ok(Detection::Clean)
    }

    fn detect_shares(&self, shares: &[Share], p: usize) -> Result<Detection> {
        let stripes = check_shares(self.n(), self.k(), self.alpha(), self.field(), shares, p)?;
        let plan = self.plan(shares.iter().map(|s| s.node), 0)?;
        let sub = self.psi.psi().select_rows(&plan.rows);
        for s in 0..stripes {
            let y = self.stripe_rows(shares, s);
            match plan.decode(&y) {
                Ok(m) if sub.mul(&m)? == y => {}
                _ => return Ok(Detection::Corrupted),
            }
        }
        Ok(Detection::Clean)
    }
}
