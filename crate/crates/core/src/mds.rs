//! Error and erasure decoding for the MDS codes generated by encoding matrices.
//!
//! An observation is a list of received symbols `y_i = g_i . x` where `g_i`
//! are rows of a generator with any `d` rows independent. With at least
//! `d + 2p` rows, any pattern of up to `p` wrong symbols is corrected.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::algebra::{dot, EncodingMatrix, Fe, Matrix, PrimeField};
use crate::error::{Error, Result};

/// Received symbols together with the generator rows they came from.
#[derive(Clone, Debug)]
pub struct Observation {
    generator: EncodingMatrix,
    received: Vec<Fe>,
    erased: BTreeSet<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    Clean,
    Corrupted,
}

impl Observation {
    pub fn new(generator: EncodingMatrix, received: Vec<Fe>) -> Result<Self> {
        Self::with_erasures(generator, received, [])
    }

    pub fn with_erasures(
        generator: EncodingMatrix,
        received: Vec<Fe>,
        erased: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        if generator.n() != received.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} generator rows, {} received symbols",
                generator.n(),
                received.len()
            )));
        }
        let erased: BTreeSet<usize> = erased.into_iter().collect();
        if let Some(&bad) = erased.iter().find(|&&e| e >= received.len()) {
            return Err(Error::DimensionMismatch(format!("erased row {bad} out of range")));
        }
        Ok(Observation {
            generator,
            received,
            erased,
        })
    }

    pub fn generator(&self) -> &EncodingMatrix {
        &self.generator
    }

    pub fn received(&self) -> &[Fe] {
        &self.received
    }

    pub fn erased(&self) -> &BTreeSet<usize> {
        &self.erased
    }

    /// The observation with erased rows removed.
    fn surviving(&self) -> (EncodingMatrix, Vec<Fe>) {
        if self.erased.is_empty() {
            return (self.generator.clone(), self.received.clone());
        }
        let keep: Vec<usize> = (0..self.received.len())
            .filter(|i| !self.erased.contains(i))
            .collect();
        let received = keep.iter().map(|&i| self.received[i]).collect();
        (self.generator.restrict_rows(&keep), received)
    }
}

fn require_rows(have: usize, d: usize, p: usize) -> Result<()> {
    if have < d + 2 * p {
        return Err(Error::NotEnoughHelpers {
            needed: d + 2 * p,
            got: have,
        });
    }
    Ok(())
}

/// Berlekamp-Welch decoding. The generator must carry evaluation points.
pub fn decode_bw(obs: &Observation, p: usize) -> Result<Vec<Fe>> {
    let (gen, received) = obs.surviving();
    let points = gen
        .points()
        .ok_or_else(|| Error::InvalidParams("Berlekamp-Welch needs a Vandermonde generator".into()))?;
    require_rows(received.len(), gen.width(), p)?;
    berlekamp_welch(gen.field(), points, gen.width(), &received, p)
}

/// Tries every error-location set of size `0..=p` (lowest index first) and
/// accepts the first that leaves a consistent system. Works for any MDS
/// generator.
pub fn decode_exhaustive(obs: &Observation, p: usize) -> Result<Vec<Fe>> {
    let (gen, received) = obs.surviving();
    require_rows(received.len(), gen.width(), p)?;
    exhaustive(gen.psi(), &received, p)
}

/// Drops erased rows, then decodes up to `p` errors.
pub fn decode_with_erasures(obs: &Observation, p: usize, p_prime: usize) -> Result<Vec<Fe>> {
    if obs.erased.len() > p_prime {
        return Err(Error::TooManyErasures {
            erased: obs.erased.len(),
            budget: p_prime,
        });
    }
    decode(obs, p)
}

/// Berlekamp-Welch when points are known, exhaustive search otherwise.
pub fn decode(obs: &Observation, p: usize) -> Result<Vec<Fe>> {
    if obs.generator.points().is_some() {
        decode_bw(obs, p)
    } else {
        decode_exhaustive(obs, p)
    }
}

/// Consistency test over `d + p` or more rows: `Clean` iff the received word
/// is a codeword.
pub fn detect(obs: &Observation, p: usize) -> Result<Detection> {
    let (gen, received) = obs.surviving();
    let d = gen.width();
    if received.len() < d + p {
        return Err(Error::NotEnoughHelpers {
            needed: d + p,
            got: received.len(),
        });
    }
    Ok(match gen.psi().solve(&received) {
        Ok(_) => Detection::Clean,
        Err(_) => Detection::Corrupted,
    })
}

fn berlekamp_welch(field: PrimeField, points: &[Fe], d: usize, y: &[Fe], p: usize) -> Result<Vec<Fe>> {
    let n = y.len();
    // Unknowns: Q_0..Q_{d+p-1}, then E_0..E_{p-1} (E monic of degree p).
    // Q(x_i) - y_i E(x_i) = 0  =>  sum Q_j x_i^j - y_i sum_{j<p} E_j x_i^j = y_i x_i^p
    let cols = d + 2 * p;
    let mut a = Matrix::zeros(field, n, cols);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let x = points[i];
        let mut pw = field.one();
        for j in 0..d + p {
            a[(i, j)] = pw;
            if j < p {
                a[(i, d + p + j)] = -(y[i] * pw);
            }
            pw *= x;
        }
        rhs.push(y[i] * x.pow(p as u64));
    }
    let Some((sol, _)) = a.solve_any(&rhs)? else {
        return Err(Error::DecodeFailure(format!("no error locator of degree {p}")));
    };
    let q_poly = &sol[..d + p];
    let mut e_poly = sol[d + p..].to_vec();
    e_poly.push(field.one());
    let (f, rem) = poly_divmod(q_poly, &e_poly);
    if rem.iter().any(|c| !c.is_zero()) {
        return Err(Error::DecodeFailure("error locator does not divide".into()));
    }
    let mut msg = f;
    msg.resize(d, field.zero());
    let wrong = (0..n).filter(|&i| poly_eval(&msg, points[i]) != y[i]).count();
    if wrong > p {
        return Err(Error::DecodeFailure(format!(
            "closest candidate differs in {wrong} positions, budget {p}"
        )));
    }
    Ok(msg)
}

fn exhaustive(gen: &Matrix, y: &[Fe], p: usize) -> Result<Vec<Fe>> {
    let n = y.len();
    for size in 0..=p {
        for errs in (0..n).combinations(size) {
            let keep: Vec<usize> = (0..n).filter(|i| !errs.contains(i)).collect();
            let sub = gen.select_rows(&keep);
            let ys: Vec<Fe> = keep.iter().map(|&i| y[i]).collect();
            if let Ok(x) = sub.solve(&ys) {
                return Ok(x);
            }
        }
    }
    Err(Error::DecodeFailure(format!("no codeword within {p} errors")))
}

/// Coefficients low-to-high. Returns (quotient, remainder).
fn poly_divmod(num: &[Fe], den: &[Fe]) -> (Vec<Fe>, Vec<Fe>) {
    let field = den[0].field();
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead_inv = den[dd].inv().expect("nonzero leading coefficient");
    if rem.len() <= dd {
        return (vec![], rem);
    }
    let mut quot = vec![field.zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd] * lead_inv;
        quot[i] = c;
        if c.is_zero() {
            continue;
        }
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    rem.truncate(dd);
    (quot, rem)
}

fn poly_eval(coeffs: &[Fe], x: Fe) -> Fe {
    let mut acc = x.field().zero();
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// A decoder bound to one set of generator rows, reusable across stripes.
///
/// Clean words are handled by one matrix-vector product against a
/// precomputed inverse of the leading rows; only inconsistent words go
/// through the full decoder.
#[derive(Clone, Debug)]
pub struct MdsDecoder {
    gen: EncodingMatrix,
    head_inv: Matrix,
    p: usize,
}

impl MdsDecoder {
    pub fn new(gen: EncodingMatrix, p: usize) -> Result<Self> {
        let d = gen.width();
        require_rows(gen.n(), d, p)?;
        let head: Vec<usize> = (0..d).collect();
        let head_inv = gen.psi().select_rows(&head).inverse()?;
        Ok(MdsDecoder { gen, head_inv, p })
    }

    pub fn generator(&self) -> &EncodingMatrix {
        &self.gen
    }

    pub fn budget(&self) -> usize {
        self.p
    }

    /// The unique message within distance `p` of `received`.
    pub fn decode(&self, received: &[Fe]) -> Result<Vec<Fe>> {
        if received.len() != self.gen.n() {
            return Err(Error::DimensionMismatch(format!(
                "decoder expects {} symbols, got {}",
                self.gen.n(),
                received.len()
            )));
        }
        if let Some(x) = self.consistent(received) {
            return Ok(x);
        }
        if self.p == 0 {
            return Err(Error::DecodeFailure("inconsistent symbols with p = 0".into()));
        }
        match self.gen.points() {
            Some(points) => berlekamp_welch(self.gen.field(), points, self.gen.width(), received, self.p),
            None => exhaustive(self.gen.psi(), received, self.p),
        }
    }

    /// The message if `received` is exactly a codeword.
    pub fn consistent(&self, received: &[Fe]) -> Option<Vec<Fe>> {
        let d = self.gen.width();
        let x = self.head_inv.mul_vec(&received[..d]).ok()?;
        (d..received.len())
            .all(|i| dot(self.gen.row(i), &x) == received[i])
            .then_some(x)
    }
}
