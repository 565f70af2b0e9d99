//! Binary checkpoint format for networks and Adam state.
//!
//! All integers and floats are little-endian. A network record is:
//!
//! ```text
//! magic        8 bytes   "MCBSMLP\0"
//! version      u32       1
//! hidden act   u8        0 = identity, 1 = relu, 2 = tanh
//! output act   u8        same encoding
//! n_sizes      u32       number of entries in layer_sizes
//! layer_sizes  n_sizes x u64
//! per layer k: weights  (sizes[k+1] * sizes[k]) x f64, row-major
//!              bias     sizes[k+1] x f64
//! ```
//!
//! An Adam record is:
//!
//! ```text
//! magic        8 bytes   "MCBSADAM"
//! version      u32       1
//! step         u64
//! beta1, beta2, eps      3 x f64
//! n_sizes      u32
//! layer_sizes  n_sizes x u64
//! first moment  parameters in network order
//! second moment parameters in network order
//! ```
//!
//! Floats are written with `to_le_bytes`, so a save/load round trip is bit-exact.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use super::{Activation, Adam, AdamConfig, Gradients, Mlp};
use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;
const MLP_MAGIC: &[u8; 8] = b"MCBSMLP\0";
const ADAM_MAGIC: &[u8; 8] = b"MCBSADAM";

fn bad(reason: impl Into<String>) -> Error {
    Error::Checkpoint {
        path: PathBuf::from("<stream>"),
        reason: reason.into(),
    }
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Checkpoint { reason, .. } => Error::Checkpoint {
            path: path.to_path_buf(),
            reason,
        },
        other => other,
    }
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => bad("truncated record"),
        _ => Error::Io(e),
    })?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

fn write_sizes<W: Write>(w: &mut W, sizes: &[usize]) -> Result<()> {
    w.write_all(&(sizes.len() as u32).to_le_bytes())?;
    for &s in sizes {
        w.write_all(&(s as u64).to_le_bytes())?;
    }
    Ok(())
}

fn read_sizes<R: Read>(r: &mut R) -> Result<Vec<usize>> {
    let n = read_u32(r)? as usize;
    if !(2..=64).contains(&n) {
        return Err(bad(format!("implausible layer count {n}")));
    }
    (0..n)
        .map(|_| {
            let s = read_u64(r)?;
            usize::try_from(s)
                .ok()
                .filter(|&s| s > 0 && s <= 1 << 24)
                .ok_or_else(|| bad(format!("implausible layer size {s}")))
        })
        .collect()
}

fn write_f64s<W: Write>(w: &mut W, values: impl IntoIterator<Item = f64>) -> Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    (0..n).map(|_| read_f64(r)).collect()
}

fn check_magic<R: Read>(r: &mut R, magic: &[u8; 8]) -> Result<()> {
    let got: [u8; 8] = read_array(r)?;
    if &got != magic {
        return Err(bad(format!("bad magic {:?}", String::from_utf8_lossy(&got))));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    Ok(())
}

pub fn write_mlp<W: Write>(w: &mut W, net: &Mlp) -> Result<()> {
    w.write_all(MLP_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&[net.hidden_activation().tag(), net.output_activation().tag()])?;
    write_sizes(w, &net.layer_sizes())?;
    write_f64s(w, net.flat_params())
}

pub fn read_mlp<R: Read>(r: &mut R) -> Result<Mlp> {
    check_magic(r, MLP_MAGIC)?;
    let [h, o]: [u8; 2] = read_array(r)?;
    let hidden = Activation::from_tag(h).ok_or_else(|| bad(format!("unknown activation tag {h}")))?;
    let output = Activation::from_tag(o).ok_or_else(|| bad(format!("unknown activation tag {o}")))?;
    let sizes = read_sizes(r)?;
    let mut net = Mlp::zeros(&sizes, hidden, output)?;
    let params = read_f64s(r, net.param_count())?;
    net.set_flat_params(&params)?;
    Ok(net)
}

pub fn write_adam<W: Write>(w: &mut W, opt: &Adam, net: &Mlp) -> Result<()> {
    if !opt.first_moment.matches(net) {
        return Err(Error::Architecture("optimizer state does not mirror network".into()));
    }
    w.write_all(ADAM_MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&opt.step.to_le_bytes())?;
    write_f64s(w, [opt.config.beta1, opt.config.beta2, opt.config.eps])?;
    write_sizes(w, &net.layer_sizes())?;
    write_f64s(w, opt.first_moment.flat())?;
    write_f64s(w, opt.second_moment.flat())
}

/// Reads Adam state; `net` supplies the expected shapes.
pub fn read_adam<R: Read>(r: &mut R, net: &Mlp) -> Result<Adam> {
    check_magic(r, ADAM_MAGIC)?;
    let step = read_u64(r)?;
    let config = AdamConfig {
        beta1: read_f64(r)?,
        beta2: read_f64(r)?,
        eps: read_f64(r)?,
    };
    let sizes = read_sizes(r)?;
    if sizes != net.layer_sizes() {
        return Err(bad(format!(
            "optimizer shapes {sizes:?} do not match network {:?}",
            net.layer_sizes()
        )));
    }
    let mut shaped = net.clone();
    let mut load = |r: &mut R| -> Result<Gradients> {
        let params = read_f64s(r, net.param_count())?;
        shaped.set_flat_params(&params)?;
        let mut g = Gradients::zeros_like(&shaped);
        for (dst, src) in g.layers.iter_mut().zip(shaped.layers()) {
            dst.weights.assign(&src.weights);
            dst.bias.assign(&src.bias);
        }
        Ok(g)
    };
    let first_moment = load(r)?;
    let second_moment = load(r)?;
    Ok(Adam {
        config,
        step,
        first_moment,
        second_moment,
    })
}

pub fn save_mlp(path: &Path, net: &Mlp) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mlp(&mut w, net).map_err(|e| with_path(e, path))?;
    w.flush()?;
    Ok(())
}

pub fn load_mlp(path: &Path) -> Result<Mlp> {
    let mut r = BufReader::new(File::open(path)?);
    read_mlp(&mut r).map_err(|e| with_path(e, path))
}

pub fn save_adam(path: &Path, opt: &Adam, net: &Mlp) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_adam(&mut w, opt, net).map_err(|e| with_path(e, path))?;
    w.flush()?;
    Ok(())
}

pub fn load_adam(path: &Path, net: &Mlp) -> Result<Adam> {
    let mut r = BufReader::new(File::open(path)?);
    read_adam(&mut r, net).map_err(|e| with_path(e, path))
}
