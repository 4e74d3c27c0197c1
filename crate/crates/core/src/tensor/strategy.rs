use rand::Rng;

use super::Scenario;
use crate::error::{Error, Result};

/// Bit-packed ±1 vector; a set bit means `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector {
    len: usize,
    words: Vec<u64>,
}

impl SignVector {
    pub fn all_plus(len: usize) -> Self {
        SignVector {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_signs(signs: &[i8]) -> Result<Self> {
        let mut v = SignVector::all_plus(signs.len());
        for (i, &s) in signs.iter().enumerate() {
            match s {
                1 => {}
                -1 => v.set(i, -1),
                _ => return Err(Error::Domain(format!("sign must be ±1, got {s}"))),
            }
        }
        Ok(v)
    }

    pub fn random(len: usize, rng: &mut impl Rng) -> Self {
        let mut v = SignVector::all_plus(len);
        for w in &mut v.words {
            *w = rng.gen();
        }
        v.mask_tail();
        v
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> i8 {
        if self.words[i / 64] >> (i % 64) & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn set(&mut self, i: usize, sign: i8) {
        let bit = 1u64 << (i % 64);
        if sign < 0 {
            self.words[i / 64] |= bit;
        } else {
            self.words[i / 64] &= !bit;
        }
    }

    pub fn flip(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.mask_tail();
    }

    /// `sum_i a_i b_i` via popcount.
    pub fn dot(&self, other: &SignVector) -> i64 {
        let differ: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        self.len as i64 - 2 * differ as i64
    }

    pub fn to_f64(&self) -> Vec<f64> {
        (0..self.len).map(|i| f64::from(self.get(i))).collect()
    }

    /// Sign of every entry of `values`, with `sign(0) = +1`.
    pub fn from_values(values: &[f64]) -> Self {
        let mut v = SignVector::all_plus(values.len());
        for (i, &x) in values.iter().enumerate() {
            if x < 0.0 {
                v.set(i, -1);
            }
        }
        v
    }
}

impl std::fmt::Display for SignVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

/// `[1, a_1, …, a_m]` with marginals, `[a_1, …, a_m]` without.
pub(crate) fn party_factor<T: From<i8>>(p: &SignVector, sc: &Scenario) -> Vec<T> {
    let mut f = Vec::with_capacity(sc.side());
    if sc.marginals {
        f.push(T::from(1));
    }
    f.extend((0..p.len()).map(|i| T::from(p.get(i))));
    f
}

/// One sign vector per party; a vertex of the local polytope.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    parties: Vec<SignVector>,
}

impl DeterministicStrategy {
    pub fn new(parties: Vec<SignVector>) -> Result<Self> {
        if parties.is_empty() {
            return Err(Error::Shape("strategy needs at least one party".into()));
        }
        let m = parties[0].len();
        if parties.iter().any(|p| p.len() != m) {
            return Err(Error::Shape("parties have different input counts".into()));
        }
        Ok(DeterministicStrategy { parties })
    }

    pub fn from_signs(parties: Vec<Vec<i8>>) -> Result<Self> {
        let parties = parties
            .iter()
            .map(|p| SignVector::from_signs(p))
            .collect::<Result<Vec<_>>>()?;
        DeterministicStrategy::new(parties)
    }

    pub fn all_plus(sc: &Scenario) -> Self {
        DeterministicStrategy {
            parties: vec![SignVector::all_plus(sc.inputs); sc.parties],
        }
    }

    pub fn random(sc: &Scenario, rng: &mut impl Rng) -> Self {
        DeterministicStrategy {
            parties: (0..sc.parties)
                .map(|_| SignVector::random(sc.inputs, rng))
                .collect(),
        }
    }

    /// Strategy whose sign string, read party by party, is the binary
    /// expansion of `code` (most significant bit first, `1` = `-`).
    pub fn from_code(sc: &Scenario, code: u64) -> Self {
        let bits = sc.strategy_bits();
        let mut s = DeterministicStrategy::all_plus(sc);
        for n in 0..sc.parties {
            for x in 0..sc.inputs {
                let pos = bits - 1 - (n * sc.inputs + x);
                if code >> pos & 1 == 1 {
                    s.parties[n].set(x, -1);
                }
            }
        }
        s
    }

    pub fn parties(&self) -> &[SignVector] {
        &self.parties
    }

    pub fn party(&self, n: usize) -> &SignVector {
        &self.parties[n]
    }

    pub fn party_mut(&mut self, n: usize) -> &mut SignVector {
        &mut self.parties[n]
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn inputs(&self) -> usize {
        self.parties[0].len()
    }

    pub fn check_shape(&self, sc: &Scenario) -> Result<()> {
        if self.num_parties() != sc.parties || self.inputs() != sc.inputs {
            return Err(Error::Shape(format!(
                "strategy has {} parties x {} inputs, scenario is {} x {}",
                self.num_parties(),
                self.inputs(),
                sc.parties,
                sc.inputs
            )));
        }
        Ok(())
    }

    /// Per-party vectors `f_n` with `d[x_1..x_N] = prod_n f_n[x_n]`.
    pub fn factor_vectors(&self, sc: &Scenario) -> Vec<Vec<f64>> {
        self.factors(sc)
    }

    pub fn factors<T: From<i8>>(&self, sc: &Scenario) -> Vec<Vec<T>> {
        self.parties.iter().map(|p| party_factor(p, sc)).collect()
    }

    /// Entry of the induced tensor at a flat index.
    pub fn entry(&self, sc: &Scenario, flat: usize) -> i8 {
        sc.multi_index(flat)
            .iter()
            .zip(&self.parties)
            .fold(1, |acc, (&slot, p)| match sc.input_of_slot(slot) {
                Some(x) => acc * p.get(x - 1),
                None => acc,
            })
    }

    /// `<d_self, d_other>` in closed form from per-party sign overlaps.
    pub fn gram(&self, other: &DeterministicStrategy, marginals: bool) -> i64 {
        let overlaps = self
            .parties
            .iter()
            .zip(&other.parties)
            .map(|(a, b)| a.dot(b));
        if marginals {
            overlaps.fold(1, |acc, o| acc * (1 + o)) - 1
        } else {
            overlaps.product()
        }
    }

    /// Representative of the class of strategies inducing the same tensor.
    ///
    /// Without marginals, flipping two parties together leaves the tensor
    /// unchanged, so parties `1..N-1` are flipped (each together with the
    /// last party) until their first sign is `+`. With marginals every
    /// strategy is its own class.
    pub fn canonical(&self, marginals: bool) -> DeterministicStrategy {
        let mut s = self.clone();
        if marginals {
            return s;
        }
        let last = s.parties.len() - 1;
        for n in 0..last {
            if s.parties[n].len() > 0 && s.parties[n].get(0) < 0 {
                s.parties[n].flip();
                s.parties[last].flip();
            }
        }
        s
    }

    /// Sign string used for lexicographic tie-breaking (`+` < `-`).
    pub fn sign_string(&self) -> String {
        self.parties
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join("|")
    }
}

impl std::fmt::Display for DeterministicStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.sign_string())
    }
}
