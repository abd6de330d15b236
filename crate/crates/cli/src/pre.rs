use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::json;
use upw_pre::hexkey::{element_from_hex, element_to_hex, scalar_from_hex, scalar_to_hex};
use upw_pre::{decrypt_with_trace, encrypt, keygen, pad_message, reencrypt, rekeygen, unpad_message, Ciphertext, PreError, ReKey, Ristretto};

use crate::{config_path_for, read, write, write_config, CliError, CliResult};

type G = Ristretto;

#[derive(Subcommand, Debug, Clone, Serialize)]
pub enum PreCommand {
    /// Generate a key pair as JSON {sk, pk}.
    Keygen {
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt up to 31 bytes under a secret key.
    Enc(EncArgs),
    /// Derive a re-key for one ciphertext toward a delegatee public key.
    Rekey {
        /// Delegator secret key: hex, or a key file.
        #[arg(long)]
        sk: String,
        /// Delegatee public key: hex, or a key file.
        #[arg(long)]
        to_pk: String,
        /// Ciphertext the re-key is bound to (hex or file).
        #[arg(long)]
        ct: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Transform a ciphertext with a re-key.
    Reenc {
        #[arg(long)]
        rk: String,
        #[arg(long)]
        ct: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt with a secret key.
    Dec {
        #[arg(long)]
        sk: String,
        #[arg(long)]
        ct: String,
        /// Write the plaintext here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EncArgs {
    #[arg(long)]
    pub sk: String,
    #[arg(long, conflicts_with = "input")]
    pub msg: Option<String>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn pre_err(e: PreError) -> CliError {
    let code = match e {
        PreError::InvalidCiphertext => "InvalidCiphertext",
        PreError::RandomnessMismatch => "RandomnessMismatch",
        PreError::MessageTooLong(_) => "MessageTooLong",
        PreError::Malformed(_) => "Malformed",
    };
    CliError::module("pre", code, e)
}

/// A literal hex string, or a file holding hex or key JSON.
fn hex_arg(arg: &str, field: &str) -> CliResult<String> {
    let p = Path::new(arg);
    if !p.is_file() {
        return Ok(arg.trim().to_string());
    }
    let text = String::from_utf8(read(p)?).map_err(|_| CliError::Usage(format!("{arg} is not text")))?;
    if text.trim_start().starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{arg}: {e}")))?;
        return v[field].as_str().map(str::to_string).ok_or_else(|| CliError::Usage(format!("{arg} has no {field:?}")));
    }
    Ok(text.trim().to_string())
}

fn bytes_arg(arg: &str, what: &str) -> CliResult<Vec<u8>> {
    hex::decode(hex_arg(arg, what)?).map_err(|e| CliError::Usage(format!("--{what}: {e}")))
}

fn sk_arg(arg: &str) -> CliResult<<G as upw_pre::PreGroup>::Scalar> {
    scalar_from_hex::<G>(&hex_arg(arg, "sk")?).ok_or_else(|| CliError::module("pre", "Malformed", "secret key"))
}

fn ct_arg(arg: &str) -> CliResult<Ciphertext<G>> {
    Ciphertext::from_bytes(&bytes_arg(arg, "ct")?).map_err(pre_err)
}

pub fn run(cmd: PreCommand, seed: u64) -> CliResult<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let out_path = match &cmd {
        PreCommand::Keygen { out } => out.clone(),
        PreCommand::Enc(a) => a.out.clone(),
        PreCommand::Rekey { out, .. } | PreCommand::Reenc { out, .. } => out.clone(),
        PreCommand::Dec { out, .. } => out.clone().unwrap_or_default(),
    };
    match &cmd {
        PreCommand::Keygen { out } => {
            let kp = keygen::<G, _>(&mut rng);
            let pk = element_to_hex::<G>(&kp.pk);
            let v = json!({"group": "ristretto255", "sk": scalar_to_hex::<G>(&kp.sk), "pk": pk});
            write(out, serde_json::to_string_pretty(&v).expect("json") + "\n")?;
            println!("{}", json!({"pk": pk}));
        }
        PreCommand::Enc(a) => {
            let sk = sk_arg(&a.sk)?;
            let data = match (&a.msg, &a.input) {
                (Some(m), _) => m.as_bytes().to_vec(),
                (None, Some(p)) => read(p)?,
                (None, None) => return Err(CliError::Usage("pass --msg or --input".into())),
            };
            let m = pad_message(&data).map_err(pre_err)?;
            let c = encrypt::<G, _>(&sk, &m, &mut rng);
            write(&a.out, hex::encode(c.to_bytes()) + "\n")?;
        }
        PreCommand::Rekey { sk, to_pk, ct, out } => {
            let sk = sk_arg(sk)?;
            let pk = element_from_hex::<G>(&hex_arg(to_pk, "pk")?)
                .ok_or_else(|| CliError::module("pre", "Malformed", "public key"))?;
            let c = ct_arg(ct)?;
            let rk = rekeygen::<G>(&sk, &pk, &c.r);
            write(out, hex::encode(rk.to_bytes()) + "\n")?;
        }
        PreCommand::Reenc { rk, ct, out } => {
            let rk = ReKey::<G>::from_bytes(&bytes_arg(rk, "rk")?).map_err(pre_err)?;
            let c = reencrypt(&rk, &ct_arg(ct)?).map_err(pre_err)?;
            write(out, hex::encode(c.to_bytes()) + "\n")?;
        }
        PreCommand::Dec { sk, ct, out } => {
            let sk = sk_arg(sk)?;
            let m = decrypt_with_trace(&sk, &ct_arg(ct)?)
                .map_err(|at| CliError::module("pre", "Rejected", format!("decryption rejected at {at:?}")))?;
            let data = unpad_message(&m).ok_or_else(|| CliError::module("pre", "Malformed", "bad message padding"))?;
            match out {
                Some(p) => write(p, &data)?,
                None => println!("{}", String::from_utf8_lossy(&data)),
            }
        }
    }
    if !out_path.as_os_str().is_empty() {
        write_config(&config_path_for(&out_path), "pre", seed, &cmd)?;
    }
    Ok(())
}
