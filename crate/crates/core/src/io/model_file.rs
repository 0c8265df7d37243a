//! Binary model format.
//!
//! Little-endian throughout:
//!
//! ```text
//! magic "CHRG" | version u32 = 1 | d u32 | activation u8 | 3 zero bytes
//! vocab fingerprint u64 | |V| u64 | bias d × f32
//! |V| × ( order u8 | byte_len u16 | UTF-8 n-gram | row d × f32 )
//! ```
//!
//! Records appear in vocabulary order. Parameters are stored at `f32`.

use std::collections::BTreeSet;
use std::path::Path;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::model::{Activation, Model};
use crate::scalar::Scalar;
use crate::vocab::{NGramVocab, VocabEntry};

pub const MAGIC: &[u8; 4] = b"CHRG";
pub const VERSION: u32 = 1;

/// Serializes `model` and `vocab` to the binary layout.
pub fn encode_model<T: Scalar>(model: &Model<T>, vocab: &NGramVocab) -> Result<Vec<u8>> {
    model.check_vocab(vocab)?;
    let d = model.dim();
    let mut out = Vec::with_capacity(40 + 4 * d + vocab.len() * (3 + 4 * d + 8));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(d as u32).to_le_bytes());
    out.push(model.activation().code());
    out.extend_from_slice(&[0, 0, 0]);
    out.extend_from_slice(&model.fingerprint().to_le_bytes());
    out.extend_from_slice(&(vocab.len() as u64).to_le_bytes());
    let put = |out: &mut Vec<u8>, xs: &[T]| {
        for x in xs {
            out.extend_from_slice(&x.to_f32().unwrap_or(f32::NAN).to_le_bytes());
        }
    };
    put(&mut out, model.bias());
    for (i, e) in vocab.entries().iter().enumerate() {
        out.push(e.order as u8);
        out.extend_from_slice(&(e.ngram.len() as u16).to_le_bytes());
        out.extend_from_slice(e.ngram.as_bytes());
        put(&mut out, model.row(i));
    }
    Ok(out)
}

/// Writes the model atomically (temporary file, then rename).
pub fn save_model<T: Scalar>(model: &Model<T>, vocab: &NGramVocab, path: &Path) -> Result<()> {
    let bytes = encode_model(model, vocab)?;
    write_atomic(path, &bytes)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::CorruptModelFile { expected: (self.pos + n) as u64 });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32s(&mut self, n: usize, out: &mut Vec<f32>) -> Result<()> {
        let bytes = self.take(4 * n)?;
        out.extend(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())));
        Ok(())
    }
}

/// Parses the binary layout.
pub fn decode_model(bytes: &[u8]) -> Result<(Model<f32>, NGramVocab)> {
    if bytes.len() < MAGIC.len() || &bytes[..4] != MAGIC {
        return Err(Error::NotAModelFile);
    }
    let mut r = Reader { buf: bytes, pos: 4 };
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let d = r.u32()? as usize;
    let act_code = r.u8()?;
    let reserved = r.take(3)?;
    let fingerprint = r.u64()?;
    let n = r.u64()?;
    if d == 0 {
        return Err(Error::InvalidModelFile("dimension is zero".into()));
    }
    let activation = Activation::from_code(act_code)
        .ok_or_else(|| Error::InvalidModelFile(format!("unknown activation code {act_code}")))?;
    if reserved != [0, 0, 0] {
        return Err(Error::InvalidModelFile("reserved header bytes are not zero".into()));
    }
    // capacities are capped by the bytes actually present
    let remaining = bytes.len() - r.pos;
    let n = usize::try_from(n).map_err(|_| Error::InvalidModelFile("vocabulary too large".into()))?;

    let mut bias = Vec::with_capacity(d);
    r.f32s(d, &mut bias)?;
    let mut weights = Vec::with_capacity(n.saturating_mul(d).min(remaining / 4));
    let mut entries = Vec::with_capacity(n.min(remaining / (3 + 4 * d)));
    let mut orders = BTreeSet::new();
    for _ in 0..n {
        let order = r.u8()? as usize;
        let len = r.u16()? as usize;
        let ngram = std::str::from_utf8(r.take(len)?)
            .map_err(|_| Error::InvalidModelFile("n-gram is not valid UTF-8".into()))?
            .to_string();
        r.f32s(d, &mut weights)?;
        orders.insert(order);
        entries.push(VocabEntry { ngram, order, count: 0 });
    }
    if r.pos != bytes.len() {
        return Err(Error::InvalidModelFile(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let vocab = NGramVocab::from_entries(entries, orders).map_err(|e| Error::InvalidModelFile(e.to_string()))?;
    if vocab.fingerprint() != fingerprint {
        return Err(Error::InvalidModelFile("vocabulary fingerprint does not match its entries".into()));
    }
    let model = Model::from_parts(weights, bias, activation, fingerprint)?;
    Ok((model, vocab))
}

pub fn load_model(path: &Path) -> Result<(Model<f32>, NGramVocab)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_model(&bytes)
}
