//! Command-line front end. [`run`] does all the work so that it can be driven
//! from tests with in-memory streams.

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use benaloh::apps::{self, CardMode, TrustDemoConfig, TrustScenario};
use benaloh::audit::{self, census_y, craft_faulty_y, failure_probability_exact, failure_probability_montecarlo};
use benaloh::cipher::{self, Ciphertext, Decryptor};
use benaloh::keyfile::{self, parse_key_file, KeyFile};
use benaloh::numtheory::parse_decimal;
use benaloh::{fixtures, keygen, Backend, ConditionMode, Error, FactoredInteger, KeyGenPolicy, PrivateKey, PublicKey, RMode};
use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "benaloh", version, about = "Benaloh dense probabilistic encryption and key auditing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a key pair
    Keygen(KeygenArgs),
    /// Encrypt decimal messages (arguments or one per stdin line)
    Encrypt(EncryptArgs),
    /// Decrypt decimal ciphertexts (arguments or one per stdin line)
    Decrypt(DecryptArgs),
    /// Homomorphic operations on ciphertexts
    Hom {
        #[command(subcommand)]
        op: HomOp,
    },
    /// Report which conditions a private key's y satisfies
    Audit(KeyArg),
    /// Replace y by y^u, collapsing the cleartext space to r/u
    CraftFaulty(CraftArgs),
    /// Probability that an originally accepted y is faulty
    Prob(ProbArgs),
    /// Count faulty bases by enumerating every y (small keys only)
    Census(KeyArg),
    /// Protocol demonstrations
    Demo {
        #[command(subcommand)]
        demo: Demo,
    },
}

#[derive(Args, Debug)]
struct KeyArg {
    /// Key file
    #[arg(long)]
    key: PathBuf,
}

#[derive(Args, Debug)]
struct KeygenArgs {
    #[arg(long, default_value_t = 64)]
    bits: u64,
    /// original | corrected | bt94
    #[arg(long, default_value = "corrected")]
    mode: String,
    /// max | prescribed:<int> | smooth:<bound>
    #[arg(long, default_value = "max")]
    r: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Write <prefix>.pub and <prefix>.key instead of printing the private key
    #[arg(long)]
    out_prefix: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EncryptArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Fixed nonce u instead of a random one
    #[arg(long)]
    nonce: Option<String>,
    messages: Vec<String>,
}

#[derive(Args, Debug)]
struct DecryptArgs {
    #[arg(long)]
    key: PathBuf,
    /// exhaustive | bsgs | pohlig-hellman
    #[arg(long, default_value = "pohlig-hellman")]
    backend: String,
    ciphertexts: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum HomOp {
    /// Product of all ciphertexts (sum of plaintexts)
    Add {
        #[arg(long)]
        key: PathBuf,
        ciphertexts: Vec<String>,
    },
    /// Raise each ciphertext to k (multiply plaintexts by k)
    Scale {
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        k: String,
        ciphertexts: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct CraftArgs {
    #[arg(long)]
    key: PathBuf,
    /// Collapse factor, a proper divisor of r
    #[arg(long)]
    u: String,
    /// Write the faulty private key here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbArgs {
    /// Factorization of r, e.g. 3,5 or 2^4,3
    #[arg(long, required_unless_present = "key")]
    r_factors: Option<String>,
    /// Private key for a Monte Carlo estimate
    #[arg(long)]
    key: Option<PathBuf>,
    #[arg(long, default_value_t = 100_000, requires = "key")]
    samples: u64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// Yes/no election tally
    Vote(VoteArgs),
    /// Private trust aggregation with one faulty node
    Trust(TrustArgs),
    /// Card equality test
    Cards(CardArgs),
}

#[derive(Args, Debug)]
struct VoteArgs {
    /// Private key; defaults to the p = 241, q = 179, r = 15 example
    #[arg(long)]
    key: Option<PathBuf>,
    /// Use the faulty y = 27 example key
    #[arg(long, conflicts_with = "key")]
    faulty: bool,
    /// Comma-separated 0/1 ballots
    #[arg(long)]
    ballots: Option<String>,
    #[arg(long, default_value_t = 20, conflicts_with = "ballots")]
    voters: usize,
    #[arg(long, default_value_t = 14, conflicts_with = "ballots")]
    yes: usize,
    #[arg(long, default_value = "bsgs")]
    backend: String,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct TrustArgs {
    #[arg(long, default_value_t = 4)]
    nodes: usize,
    /// Factorization of the common r
    #[arg(long, default_value = "3,5,7")]
    r_factors: String,
    #[arg(long, default_value_t = 48)]
    bits: u64,
    /// Index of the node holding a faulty key
    #[arg(long)]
    faulty: Option<usize>,
    /// extreme | random
    #[arg(long, default_value = "extreme")]
    scenario: String,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct CardArgs {
    #[arg(long)]
    m1: String,
    #[arg(long)]
    m2: String,
    /// flawed | fixed
    #[arg(long, default_value = "flawed")]
    mode: String,
    /// Comma-separated exponents for the first round
    #[arg(long)]
    alphas: Option<String>,
    /// Private key; defaults to a fresh key with r = 53
    #[arg(long)]
    key: Option<PathBuf>,
    #[arg(long, default_value_t = 48)]
    bits: u64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

type CliResult = Result<(), Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Domain(format!("{}: {e}", path.display()))
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// Runs the command line `args` (including the program name) and returns
/// the exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_DOMAIN
        }
    }
}

fn dispatch(command: Command, stdin: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Keygen(a) => cmd_keygen(a, out),
        Command::Encrypt(a) => cmd_encrypt(a, stdin, out),
        Command::Decrypt(a) => cmd_decrypt(a, stdin, out),
        Command::Hom { op } => cmd_hom(op, stdin, out),
        Command::Audit(a) => {
            let sk = read_private(&a.key)?;
            emit(out, &audit::audit(&sk).to_key_value_lines())
        }
        Command::CraftFaulty(a) => cmd_craft(a, out),
        Command::Prob(a) => cmd_prob(a, out),
        Command::Census(a) => {
            let sk = read_private(&a.key)?;
            let c = census_y(&sk)?;
            emit(
                out,
                &format!("eligible={}\nfaulty={}\nratio={}\n", c.eligible, c.faulty, c.ratio()),
            )
        }
        Command::Demo { demo } => match demo {
            Demo::Vote(a) => cmd_vote(a, out),
            Demo::Trust(a) => cmd_trust(a, out),
            Demo::Cards(a) => cmd_cards(a, out),
        },
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CliResult {
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::Domain(format!("write failed: {e}")))
}

fn rng_from(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(s) => ChaCha20Rng::seed_from_u64(s),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn read_key(path: &Path) -> Result<KeyFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_key_file(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn read_public(path: &Path) -> Result<PublicKey, Failure> {
    Ok(read_key(path)?.public())
}

fn read_private(path: &Path) -> Result<PrivateKey, Failure> {
    match read_key(path)? {
        KeyFile::Private(sk) => Ok(sk),
        KeyFile::Public(_) => Err(usage(format!("{}: a private key file is required", path.display()))),
    }
}

/// Positional values, or the non-empty lines of stdin when there are none.
fn operands(args: Vec<String>, stdin: &mut dyn BufRead) -> Result<Vec<String>, Failure> {
    if !args.is_empty() {
        return Ok(args);
    }
    let mut text = String::new();
    stdin
        .read_to_string(&mut text)
        .map_err(|e| Failure::Domain(format!("reading stdin: {e}")))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}

fn decimal(text: &str) -> Result<BigUint, Failure> {
    parse_decimal(text.trim()).map_err(usage)
}

fn ciphertexts(args: Vec<String>, stdin: &mut dyn BufRead, pk: &PublicKey) -> Result<Vec<Ciphertext>, Failure> {
    operands(args, stdin)?
        .iter()
        .map(|t| Ciphertext::parse(t, pk).map_err(usage))
        .collect()
}

fn cmd_keygen(a: KeygenArgs, out: &mut dyn Write) -> CliResult {
    let mode: ConditionMode = a.mode.parse().map_err(usage)?;
    let r_mode: RMode = a.r.parse().map_err(usage)?;
    let mut rng = rng_from(a.seed);
    let (pk, sk) = keygen(&KeyGenPolicy::new(a.bits, mode, r_mode), &mut rng)?;
    match a.out_prefix {
        Some(prefix) => {
            let pub_path = with_suffix(&prefix, "pub");
            let key_path = with_suffix(&prefix, "key");
            fs::write(&pub_path, keyfile::serialize_public(&pk)).map_err(|e| io_err(&pub_path, e))?;
            fs::write(&key_path, keyfile::serialize_private(&sk)).map_err(|e| io_err(&key_path, e))?;
            emit(out, &format!("{}\n{}\n", pub_path.display(), key_path.display()))
        }
        None => emit(out, &keyfile::serialize_private(&sk)),
    }
}

fn with_suffix(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn cmd_encrypt(a: EncryptArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    let pk = read_public(&a.key)?;
    let nonce = a.nonce.as_deref().map(decimal).transpose()?;
    let mut rng = rng_from(a.seed);
    let mut text = String::new();
    for m in operands(a.messages, stdin)? {
        let m = decimal(&m)?;
        let c = match &nonce {
            Some(u) => cipher::encrypt_with_nonce(&pk, &m, u)?,
            None => cipher::encrypt(&pk, &m, &mut rng)?,
        };
        text.push_str(&format!("{c}\n"));
    }
    emit(out, &text)
}

fn cmd_decrypt(a: DecryptArgs, stdin: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    let sk = read_private(&a.key)?;
    let backend: Backend = a.backend.parse().map_err(usage)?;
    let cs = ciphertexts(a.ciphertexts, stdin, &sk.public())?;
    let dec = Decryptor::new(sk);
    let mut text = String::new();
    for c in &cs {
        text.push_str(&format!("{}\n", dec.decrypt(c, backend)?));
    }
    emit(out, &text)
}

fn cmd_hom(op: HomOp, stdin: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    match op {
        HomOp::Add { key, ciphertexts: args } => {
            let pk = read_public(&key)?;
            let mut acc = cipher::identity(&pk);
            for c in ciphertexts(args, stdin, &pk)? {
                acc = cipher::hom_add(&pk, &acc, &c)?;
            }
            emit(out, &format!("{acc}\n"))
        }
        HomOp::Scale { key, k, ciphertexts: args } => {
            let pk = read_public(&key)?;
            let k = decimal(&k)?;
            let mut text = String::new();
            for c in ciphertexts(args, stdin, &pk)? {
                text.push_str(&format!("{}\n", cipher::hom_scale(&pk, &c, &k)?));
            }
            emit(out, &text)
        }
    }
}

fn cmd_craft(a: CraftArgs, out: &mut dyn Write) -> CliResult {
    let sk = read_private(&a.key)?;
    let u = decimal(&a.u)?;
    let y = craft_faulty_y(&sk, sk.y(), &u)?;
    let text = keyfile::serialize_private(&sk.with_y(y)?);
    match a.out {
        Some(path) => fs::write(&path, text).map_err(|e| io_err(&path, e)),
        None => emit(out, &text),
    }
}

fn cmd_prob(a: ProbArgs, out: &mut dyn Write) -> CliResult {
    let mut text = String::new();
    if let Some(f) = &a.r_factors {
        let r = FactoredInteger::parse_factor_list(f.trim()).map_err(usage)?;
        let rho = failure_probability_exact(&r)?;
        text.push_str(&format!("{rho}\n{:.6}\n", ratio_to_f64(&rho)));
    }
    if let Some(path) = &a.key {
        let sk = read_private(path)?;
        let mut rng = rng_from(a.seed);
        let est = failure_probability_montecarlo(&sk, a.samples, &mut rng)?;
        text.push_str(&format!(
            "draws={}\nretained={}\nfaulty={}\nestimate={:.6}\nstd_error={:.6}\n",
            est.draws, est.retained, est.faulty, est.fraction, est.std_error
        ));
    }
    emit(out, &text)
}

/// Works when numerator and denominator overflow `f64`.
fn ratio_to_f64(q: &BigRational) -> f64 {
    let shift = q.denom().bits().saturating_sub(60);
    let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

fn cmd_vote(a: VoteArgs, out: &mut dyn Write) -> CliResult {
    let sk = match (&a.key, a.faulty) {
        (Some(path), _) => read_private(path)?,
        (None, true) => fixtures::counterexample_key(),
        (None, false) => fixtures::counterexample_corrected_key(),
    };
    let ballots: Vec<u8> = match &a.ballots {
        Some(list) => list
            .split(',')
            .map(|b| match b.trim() {
                "0" => Ok(0),
                "1" => Ok(1),
                other => Err(usage(format!("ballot `{other}` is not 0 or 1"))),
            })
            .collect::<Result<_, _>>()?,
        None => {
            if a.yes > a.voters {
                return Err(usage("--yes exceeds --voters"));
            }
            (0..a.voters).map(|i| u8::from(i < a.yes)).collect()
        }
    };
    let backend: Backend = a.backend.parse().map_err(usage)?;
    let mut rng = rng_from(a.seed);
    let res = apps::run_election(&sk.public(), &sk, &ballots, backend, &mut rng)?;
    let mut text = res.transcript.join("\n");
    text.push('\n');
    text.push_str(&res.summary_line());
    text.push('\n');
    emit(out, &text)
}

fn cmd_trust(a: TrustArgs, out: &mut dyn Write) -> CliResult {
    let scenario: TrustScenario = a.scenario.parse().map_err(usage)?;
    let common_r = FactoredInteger::parse_factor_list(a.r_factors.trim()).map_err(usage)?;
    let config = TrustDemoConfig {
        node_count: a.nodes,
        common_r,
        key_bits: a.bits,
        faulty_node: a.faulty,
        scenario,
    };
    let mut rng = rng_from(a.seed);
    let res = apps::run_trust_demo(&config, &mut rng)?;
    let mut text = res.transcript.join("\n");
    text.push('\n');
    text.push_str(&res.summary_line());
    text.push('\n');
    emit(out, &text)
}

fn cmd_cards(a: CardArgs, out: &mut dyn Write) -> CliResult {
    let mode: CardMode = a.mode.parse().map_err(usage)?;
    let m1 = decimal(&a.m1)?;
    let m2 = decimal(&a.m2)?;
    let alphas = a
        .alphas
        .as_deref()
        .map(|list| list.split(',').map(decimal).collect::<Result<Vec<_>, _>>())
        .transpose()?;
    let mut rng = rng_from(a.seed);
    let sk = match &a.key {
        Some(path) => read_private(path)?,
        None => {
            let r = FactoredInteger::factor_u64(53)?;
            keygen(&KeyGenPolicy::new(a.bits, ConditionMode::Corrected, RMode::Prescribed(r)), &mut rng)?.1
        }
    };
    let pk = sk.public();
    let t = apps::run_card_equality(&pk, &sk, &m1, &m2, mode, &mut rng, alphas.as_deref())?;
    let recovered = apps::recover_alphas(&pk, &t)?;
    let recovered: Vec<String> = recovered
        .iter()
        .map(|a| a.as_ref().map_or_else(|| "none".to_string(), ToString::to_string))
        .collect();
    let mut text = t.lines().join("\n");
    text.push('\n');
    text.push_str(&format!("{} recovered_alphas={}\n", t.summary_line(), recovered.join(",")));
    emit(out, &text)
}
