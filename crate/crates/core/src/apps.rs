//! Multi-party protocols built on the additive homomorphism: a yes/no
//! election tally, private trust aggregation and a card equality test.
//!
//! Each demo runs with healthy or deliberately faulty keys, records a
//! human-readable transcript and offers a `key=value` summary line. Joint
//! decryption is simulated by a dealer holding the private key.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::RngCore;

use crate::audit::{actual_message_space, craft_faulty_y};
use crate::cipher::{self, Backend, Ciphertext, Decryptor};
use crate::error::{Error, Result};
use crate::keys::{keygen_with_common_r, ConditionMode, PrivateKey, PublicKey};
use crate::numtheory::{random_below, FactoredInteger};

/// Outcome of [`run_election`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElectionResult {
    pub voters: usize,
    /// Number of `1` ballots actually cast.
    pub true_yes: usize,
    /// Decrypted tally for candidate A (ballot `1`).
    pub tally_yes: BigUint,
    /// `voters - tally_yes`, the count attributed to candidate B.
    pub tally_no: BigInt,
    pub transcript: Vec<String>,
}

impl ElectionResult {
    pub fn summary_line(&self) -> String {
        format!(
            "demo=vote voters={} true_yes={} tally_yes={} tally_no={}",
            self.voters, self.true_yes, self.tally_yes, self.tally_no
        )
    }
}

/// Encrypts each ballot, multiplies the ciphertexts and decrypts the product
/// once. Ballots must be `0` or `1`; more than `r - 1` voters is allowed and
/// simply overflows.
pub fn run_election<R: RngCore + ?Sized>(
    pk: &PublicKey,
    sk: &PrivateKey,
    ballots: &[u8],
    backend: Backend,
    rng: &mut R,
) -> Result<ElectionResult> {
    if let Some(b) = ballots.iter().find(|&&b| b > 1) {
        return Err(Error::param(format!("ballot {b} is not 0 or 1")));
    }
    let mut transcript = Vec::with_capacity(ballots.len() + 2);
    let mut product = cipher::identity(pk);
    for (i, &b) in ballots.iter().enumerate() {
        let c = cipher::encrypt(pk, &BigUint::from(b), rng)?;
        transcript.push(format!("voter {}: E(vote) = {c}", i + 1));
        product = cipher::hom_add(pk, &product, &c)?;
    }
    transcript.push(format!("product of ballots = {product}"));
    let tally_yes = cipher::decrypt(sk, &product, backend)?.into_inner();
    let tally_no = BigInt::from(ballots.len()) - BigInt::from(tally_yes.clone());
    transcript.push(format!("A: {tally_yes} votes, B: {tally_no} votes"));
    Ok(ElectionResult {
        voters: ballots.len(),
        true_yes: ballots.iter().filter(|&&b| b == 1).count(),
        tally_yes,
        tally_no,
        transcript,
    })
}

/// A trust value split into additive shares modulo `r`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrustShareSet {
    pub trust: BigUint,
    pub shares: Vec<BigUint>,
}

impl TrustShareSet {
    pub fn sum(&self, r: &BigUint) -> BigUint {
        self.shares.iter().fold(BigUint::zero(), |acc, s| (acc + s) % r)
    }
}

/// Draws `share_count - 1` uniform shares mod `r` and fixes the last one so
/// that the shares add up to `t`.
pub fn split_trust<R: RngCore + ?Sized>(
    t: &BigUint,
    share_count: usize,
    r: &BigUint,
    rng: &mut R,
) -> Result<TrustShareSet> {
    if share_count < 2 {
        return Err(Error::param("at least two shares are needed"));
    }
    if r.is_zero() {
        return Err(Error::param("r must be positive"));
    }
    let t = t % r;
    let mut shares: Vec<BigUint> = (0..share_count - 1).map(|_| random_below(r, rng)).collect();
    let partial = shares.iter().fold(BigUint::zero(), |acc, s| (acc + s) % r);
    shares.push((&t + r - partial) % r);
    Ok(TrustShareSet { trust: t, shares })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrustScenario {
    /// Every trust is zero and the target node must decrypt a partial sum of
    /// `r - 1`.
    Extreme,
    /// Uniform trusts and shares.
    Random,
}

impl fmt::Display for TrustScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrustScenario::Extreme => "extreme",
            TrustScenario::Random => "random",
        })
    }
}

impl FromStr for TrustScenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extreme" => Ok(TrustScenario::Extreme),
            "random" => Ok(TrustScenario::Random),
            _ => Err(Error::parse(format!("unknown trust scenario `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrustDemoConfig {
    pub node_count: usize,
    pub common_r: FactoredInteger,
    pub key_bits: u64,
    /// Node whose key is replaced by one with collapse factor 3.
    pub faulty_node: Option<usize>,
    pub scenario: TrustScenario,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrustDemoResult {
    pub node_count: usize,
    pub r: BigUint,
    pub faulty_node: Option<usize>,
    /// Real cleartext space of the faulty node's key.
    pub r_prime: Option<BigUint>,
    pub trusts: Vec<BigUint>,
    /// Sum of the shares each node received, mod `r`.
    pub intended_partials: Vec<BigUint>,
    /// What each node obtained by decrypting its homomorphic sum.
    pub reported_partials: Vec<BigUint>,
    pub true_total: BigUint,
    pub apparent_total: BigUint,
    pub transcript: Vec<String>,
}

impl TrustDemoResult {
    pub fn faulty_contribution(&self) -> Option<&BigUint> {
        self.faulty_node.map(|i| &self.reported_partials[i])
    }

    pub fn summary_line(&self) -> String {
        let opt = |v: Option<&BigUint>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
        format!(
            "demo=trust nodes={} r={} faulty_node={} r_prime={} faulty_contribution={} true_total={} apparent_total={}",
            self.node_count,
            self.r,
            self.faulty_node.map_or_else(|| "none".to_string(), |i| i.to_string()),
            opt(self.r_prime.as_ref()),
            opt(self.faulty_contribution()),
            self.true_total,
            self.apparent_total
        )
    }
}

/// Nodes sharing a common `r`, one of which may hold a faulty key.
#[derive(Debug)]
pub struct TrustNetwork {
    r: BigUint,
    nodes: Vec<Decryptor>,
    faulty_node: Option<usize>,
    r_prime: Option<BigUint>,
}

impl TrustNetwork {
    /// Generates `node_count` corrected keys for `common_r`; the key of
    /// `faulty_node` is then replaced by one with collapse factor 3.
    pub fn generate<R: RngCore + ?Sized>(
        node_count: usize,
        common_r: &FactoredInteger,
        key_bits: u64,
        faulty_node: Option<usize>,
        rng: &mut R,
    ) -> Result<Self> {
        if node_count < 3 {
            return Err(Error::param("the trust demo needs at least 3 nodes"));
        }
        let r = common_r.value().clone();
        let three = BigUint::from(3u8);
        if let Some(f) = faulty_node {
            if f >= node_count {
                return Err(Error::param(format!("faulty node {f} out of range 0..{node_count}")));
            }
            if !(&r % &three).is_zero() {
                return Err(Error::param(format!("r = {r} is not divisible by 3")));
            }
        }
        let mut nodes = Vec::with_capacity(node_count);
        for i in 0..node_count {
            let (_, mut sk) = keygen_with_common_r(common_r, key_bits, ConditionMode::Corrected, rng)?;
            if faulty_node == Some(i) {
                let y = craft_faulty_y(&sk, sk.y(), &three)?;
                sk = sk.with_y(y)?;
            }
            nodes.push(Decryptor::new(sk));
        }
        let r_prime = match faulty_node {
            Some(f) => Some(actual_message_space(nodes[f].key().y(), nodes[f].key())?),
            None => None,
        };
        Ok(TrustNetwork {
            r,
            nodes,
            faulty_node,
            r_prime,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn key(&self, i: usize) -> &PrivateKey {
        self.nodes[i].key()
    }

    /// Every node splits its trust into one share per other node and sends
    /// each share encrypted under the recipient's key. Each recipient
    /// multiplies what it received, decrypts and publishes the partial sum;
    /// the initiator adds the partial sums mod `r`. The sum is unweighted.
    ///
    /// `steer = Some((j, v))` adjusts the shares so that node `j` receives a
    /// total of `v`, leaving every owner's trust unchanged.
    pub fn aggregate<R: RngCore + ?Sized>(
        &self,
        trusts: &[BigUint],
        steer: Option<(usize, &BigUint)>,
        rng: &mut R,
    ) -> Result<TrustDemoResult> {
        let n = self.nodes.len();
        let r = &self.r;
        if trusts.len() != n {
            return Err(Error::param(format!("expected {n} trust values, got {}", trusts.len())));
        }
        let trusts: Vec<BigUint> = trusts.iter().map(|t| t % r).collect();
        let mut transcript: Vec<String> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let tag = if self.faulty_node == Some(i) { " (faulty)" } else { "" };
                format!("node {i}: n = {}, y = {}{tag}", d.key().n(), d.key().y())
            })
            .collect();

        // shares[i][j]: what owner i sends to recipient j (j != i)
        let mut shares: Vec<Vec<BigUint>> = Vec::with_capacity(n);
        for (i, t) in trusts.iter().enumerate() {
            let set = split_trust(t, n - 1, r, rng)?;
            let mut row = set.shares.into_iter();
            shares.push(
                (0..n)
                    .map(|j| if j == i { BigUint::zero() } else { row.next().unwrap_or_default() })
                    .collect(),
            );
        }
        if let Some((target, value)) = steer {
            if target >= n {
                return Err(Error::param(format!("node {target} out of range 0..{n}")));
            }
            // shift one owner's share to the target and compensate on
            // another of that owner's recipients
            let owner = (target + 1) % n;
            let other = (target + 2) % n;
            let received = received_sum(&shares, target, r);
            let delta = (value % r + r - received) % r;
            shares[owner][target] = (&shares[owner][target] + &delta) % r;
            shares[owner][other] = (&shares[owner][other] + r - &delta) % r;
        }

        let mut intended = Vec::with_capacity(n);
        let mut reported = Vec::with_capacity(n);
        for (j, dec) in self.nodes.iter().enumerate() {
            let pk = dec.key().public();
            let mut acc = cipher::identity(&pk);
            for (i, row) in shares.iter().enumerate() {
                if i != j {
                    let c = cipher::encrypt(&pk, &row[j], rng)?;
                    acc = cipher::hom_add(&pk, &acc, &c)?;
                }
            }
            let partial = dec.decrypt(&acc, Backend::PohligHellman)?.into_inner();
            let want = received_sum(&shares, j, r);
            transcript.push(format!("node {j}: received sum decrypts to {partial} (intended {want})"));
            intended.push(want);
            reported.push(partial);
        }

        let true_total = trusts.iter().fold(BigUint::zero(), |acc, t| (acc + t) % r);
        let apparent_total = reported.iter().fold(BigUint::zero(), |acc, t| (acc + t) % r);
        transcript.push(format!("apparent total trust {apparent_total}, true total {true_total}"));
        Ok(TrustDemoResult {
            node_count: n,
            r: r.clone(),
            faulty_node: self.faulty_node,
            r_prime: self.r_prime.clone(),
            trusts,
            intended_partials: intended,
            reported_partials: reported,
            true_total,
            apparent_total,
            transcript,
        })
    }
}

/// Builds a [`TrustNetwork`] and runs one aggregation. In the extreme
/// scenario the target (the faulty node, or node 0) is steered to a partial
/// sum of `r - 1`.
pub fn run_trust_demo<R: RngCore + ?Sized>(config: &TrustDemoConfig, rng: &mut R) -> Result<TrustDemoResult> {
    let net = TrustNetwork::generate(
        config.node_count,
        &config.common_r,
        config.key_bits,
        config.faulty_node,
        rng,
    )?;
    let r = config.common_r.value();
    match config.scenario {
        TrustScenario::Extreme => {
            let trusts = vec![BigUint::zero(); config.node_count];
            let top = r - 1u8;
            net.aggregate(&trusts, Some((config.faulty_node.unwrap_or(0), &top)), rng)
        }
        TrustScenario::Random => {
            let trusts: Vec<BigUint> = (0..config.node_count).map(|_| random_below(r, rng)).collect();
            net.aggregate(&trusts, None, rng)
        }
    }
}

fn received_sum(shares: &[Vec<BigUint>], j: usize, r: &BigUint) -> BigUint {
    shares
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != j)
        .fold(BigUint::zero(), |acc, (_, row)| (acc + &row[j]) % r)
}

/// Default number of players in the card equality test.
pub const DEFAULT_CARD_PLAYERS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CardMode {
    /// Raw `E(m)^alpha_i` disclosed, a single round.
    Flawed,
    /// Every disclosed element rerandomized, two independent rounds.
    Fixed,
}

impl fmt::Display for CardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CardMode::Flawed => "flawed",
            CardMode::Fixed => "fixed",
        })
    }
}

impl FromStr for CardMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flawed" => Ok(CardMode::Flawed),
            "fixed" => Ok(CardMode::Fixed),
            _ => Err(Error::parse(format!("unknown card mode `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CardRound {
    pub alphas: Vec<BigUint>,
    /// One element per player.
    pub disclosed: Vec<Ciphertext>,
    pub combined: Ciphertext,
    /// Decryption of `combined`, i.e. `m * sum(alpha_i) mod r`.
    pub result: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CardEqualityTranscript {
    pub mode: CardMode,
    pub r: BigUint,
    /// `E(m) = E(m1) / E(m2)`.
    pub difference: Ciphertext,
    pub rounds: Vec<CardRound>,
    pub verdict_equal: bool,
    pub warnings: Vec<String>,
}

impl CardEqualityTranscript {
    pub fn summary_line(&self) -> String {
        let results: Vec<String> = self.rounds.iter().map(|r| r.result.to_string()).collect();
        format!(
            "demo=cards mode={} r={} rounds={} results={} verdict={}",
            self.mode,
            self.r,
            self.rounds.len(),
            results.join(","),
            if self.verdict_equal { "equal" } else { "unequal" }
        )
    }

    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.warnings.iter().map(|w| format!("warning: {w}")).collect();
        out.push(format!("E(m) = E(m1)/E(m2) = {}", self.difference));
        for (k, round) in self.rounds.iter().enumerate() {
            for (i, (a, d)) in round.alphas.iter().zip(&round.disclosed).enumerate() {
                out.push(format!("round {}: player {} picks alpha = {a}, discloses {d}", k + 1, i + 1));
            }
            out.push(format!("round {}: product {} decrypts to {}", k + 1, round.combined, round.result));
        }
        out.push(format!("verdict: {}", if self.verdict_equal { "equal" } else { "unequal" }));
        out
    }
}

/// Tests whether two encrypted cards are equal without revealing them.
///
/// Each player raises `E(m1)/E(m2)` to a secret `0 < alpha_i < r`; the
/// product of the disclosed values decrypts to `(m1 - m2) * sum(alpha_i)`.
/// `forced_alphas` fixes the exponents of the first round (and the number of
/// players); otherwise [`DEFAULT_CARD_PLAYERS`] players draw them at random.
pub fn run_card_equality<R: RngCore + ?Sized>(
    pk: &PublicKey,
    sk: &PrivateKey,
    m1: &BigUint,
    m2: &BigUint,
    mode: CardMode,
    rng: &mut R,
    forced_alphas: Option<&[BigUint]>,
) -> Result<CardEqualityTranscript> {
    let r = pk.r().value().clone();
    if *m1 >= r || *m2 >= r {
        return Err(Error::param(format!("cards must lie in [0, {r})")));
    }
    if let Some(alphas) = forced_alphas {
        if alphas.is_empty() || alphas.iter().any(|a| a.is_zero() || *a >= r) {
            return Err(Error::param(format!("forced alphas must be non-empty and lie in (0, {r})")));
        }
    }
    let mut warnings = Vec::new();
    if !pk.r().is_prime() {
        warnings.push(format!("r = {r} is not prime; a zero result need not mean equal cards"));
    }

    let c1 = cipher::encrypt(pk, m1, rng)?;
    let c2 = cipher::encrypt(pk, m2, rng)?;
    let difference = cipher::hom_sub(pk, &c1, &c2)?;
    let players = forced_alphas.map_or(DEFAULT_CARD_PLAYERS, <[BigUint]>::len);
    let round_count = match mode {
        CardMode::Flawed => 1,
        CardMode::Fixed => 2,
    };

    let decryptor = Decryptor::new(sk.clone());
    let mut rounds = Vec::with_capacity(round_count);
    for k in 0..round_count {
        let alphas: Vec<BigUint> = match forced_alphas {
            Some(a) if k == 0 => a.to_vec(),
            _ => (0..players).map(|_| random_below(&(&r - 1u8), rng) + 1u8).collect(),
        };
        let mut disclosed = Vec::with_capacity(players);
        let mut combined = cipher::identity(pk);
        for a in &alphas {
            let mut d = cipher::hom_scale(pk, &difference, a)?;
            if mode == CardMode::Fixed {
                d = cipher::rerandomize(pk, &d, rng)?;
            }
            combined = cipher::hom_add(pk, &combined, &d)?;
            disclosed.push(d);
        }
        let result = decryptor.decrypt(&combined, Backend::PohligHellman)?.into_inner();
        rounds.push(CardRound {
            alphas,
            disclosed,
            combined,
            result,
        });
    }
    let verdict_equal = rounds.iter().all(|round| round.result.is_zero());
    Ok(CardEqualityTranscript {
        mode,
        r,
        difference,
        rounds,
        verdict_equal,
        warnings,
    })
}

/// Largest `r` for which [`recover_alpha`] will scan exponents.
pub const MAX_ALPHA_SEARCH: u64 = 1 << 20;

/// Looks for `0 < alpha < r` with `base^alpha = disclosed (mod n)`.
pub fn recover_alpha(pk: &PublicKey, base: &Ciphertext, disclosed: &Ciphertext) -> Result<Option<BigUint>> {
    let r = pk.r().value();
    if *r > BigUint::from(MAX_ALPHA_SEARCH) {
        return Err(Error::Guard(format!("r = {r} too large for an exponent search")));
    }
    let n = pk.n();
    let mut acc = BigUint::one();
    let mut alpha = BigUint::one();
    while alpha < *r {
        acc = acc * base.value() % n;
        if acc == *disclosed.value() {
            return Ok(Some(alpha));
        }
        alpha += 1u8;
    }
    Ok(None)
}

/// Runs [`recover_alpha`] on every disclosed element of the first round.
pub fn recover_alphas(pk: &PublicKey, transcript: &CardEqualityTranscript) -> Result<Vec<Option<BigUint>>> {
    let Some(round) = transcript.rounds.first() else {
        return Ok(Vec::new());
    };
    round
        .disclosed
        .iter()
        .map(|d| recover_alpha(pk, &transcript.difference, d))
        .collect()
}
