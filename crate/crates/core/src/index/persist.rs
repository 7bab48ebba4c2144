//! Index directory layout.
//!
//! ```text
//! <dir>/manifest.txt   key=value lines: format, version, counts, file digests
//! <dir>/vocab.bin      u32 count, then (u32 len, utf-8 bytes) per term
//! <dir>/docs.bin       u32 count, then (u32 len, utf-8 id, u32 length) per doc
//! <dir>/postings.bin   u32 count, then per term: u32 ndocs, docs, offsets, u32 npos, positions
//! ```
//!
//! All integers are little-endian. The same index always serializes to the
//! same bytes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{PositionalIndex, PostingList};
use crate::error::{Error, Result};
use crate::text::Vocabulary;

pub const FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "termorder-index";
const MANIFEST: &str = "manifest.txt";
const FILES: [&str; 3] = ["vocab.bin", "docs.bin", "postings.bin"];

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    put_u32(buf, s.len() as u32);
    buf.extend_from_slice(s.as_bytes());
}

fn put_u32s(buf: &mut Vec<u8>, vs: &[u32]) {
    for &v in vs {
        put_u32(buf, v);
    }
}

struct Reader<'a> {
    name: &'a str,
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn new(name: &'a str, bytes: &'a [u8]) -> Self {
        Reader { name, bytes, at: 0 }
    }

    fn truncated(&self) -> Error {
        Error::Format(format!("{} truncated at byte {}", self.name, self.at))
    }

    fn u32(&mut self) -> Result<u32> {
        let end = self.at + 4;
        let raw = self.bytes.get(self.at..end).ok_or_else(|| self.truncated())?;
        self.at = end;
        Ok(u32::from_le_bytes(raw.try_into().expect("4 bytes")))
    }

    fn u32s(&mut self, n: usize) -> Result<Vec<u32>> {
        (0..n).map(|_| self.u32()).collect()
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let raw = self.bytes.get(self.at..self.at + len).ok_or_else(|| self.truncated())?;
        self.at += len;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::Format(format!("{}: invalid utf-8", self.name)))
    }

    fn finish(&self) -> Result<()> {
        if self.at != self.bytes.len() {
            return Err(Error::Format(format!("{}: trailing bytes", self.name)));
        }
        Ok(())
    }
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// SHA-256 of the manifest file in an index directory.
pub fn manifest_hash(dir: impl AsRef<Path>) -> Result<String> {
    let path = dir.as_ref().join(MANIFEST);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    Ok(digest(&bytes))
}

impl PositionalIndex {
    fn encode(&self) -> [Vec<u8>; 3] {
        let mut vocab = Vec::new();
        put_u32(&mut vocab, self.vocab.len() as u32);
        for t in self.vocab.terms() {
            put_str(&mut vocab, t);
        }

        let mut docs = Vec::new();
        put_u32(&mut docs, self.doc_ids.len() as u32);
        for (id, &len) in self.doc_ids.iter().zip(&self.stats.doc_lengths) {
            put_str(&mut docs, id);
            put_u32(&mut docs, len);
        }

        let mut postings = Vec::new();
        put_u32(&mut postings, self.postings.len() as u32);
        for list in &self.postings {
            put_u32(&mut postings, list.docs().len() as u32);
            put_u32s(&mut postings, list.docs());
            put_u32s(&mut postings, list.offsets());
            put_u32(&mut postings, list.all_positions().len() as u32);
            put_u32s(&mut postings, list.all_positions());
        }
        [vocab, docs, postings]
    }

    /// Writes the index into `dir`, creating it if needed.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut manifest = format!(
            "format={FORMAT_NAME}\nformat_version={FORMAT_VERSION}\nnum_docs={}\ntotal_tokens={}\nvocab_size={}\n",
            self.stats.num_docs,
            self.stats.total_tokens,
            self.vocab.len()
        );
        for (name, bytes) in FILES.iter().zip(self.encode()) {
            let path = dir.join(name);
            let mut w = BufWriter::new(fs::File::create(&path).map_err(|e| Error::io(&path, e))?);
            w.write_all(&bytes).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))?;
            manifest.push_str(&format!("sha256.{name}={}\n", digest(&bytes)));
        }
        let path = dir.join(MANIFEST);
        fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
    }

    /// Loads an index written by [`PositionalIndex::save`], verifying the
    /// format version and file digests.
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(MANIFEST);
        let manifest = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let field = |key: &str| -> Result<&str> {
            manifest
                .lines()
                .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| Error::Format(format!("manifest missing `{key}`")))
        };
        if field("format")? != FORMAT_NAME {
            return Err(Error::Format("not a termorder index".into()));
        }
        let version: u32 = field("format_version")?
            .parse()
            .map_err(|_| Error::Format("bad format_version".into()))?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "index format version {version}, this build reads {FORMAT_VERSION}"
            )));
        }

        let mut contents = Vec::new();
        for name in FILES {
            let path = dir.join(name);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if digest(&bytes) != field(&format!("sha256.{name}"))? {
                return Err(Error::Format(format!("{name}: checksum mismatch")));
            }
            contents.push(bytes);
        }

        let mut r = Reader::new(FILES[0], &contents[0]);
        let n = r.u32()? as usize;
        let terms = (0..n).map(|_| r.string()).collect::<Result<Vec<_>>>()?;
        r.finish()?;
        let vocab = Vocabulary::from_terms(terms);

        let mut r = Reader::new(FILES[1], &contents[1]);
        let n = r.u32()? as usize;
        let mut doc_ids = Vec::with_capacity(n);
        let mut doc_lengths = Vec::with_capacity(n);
        for _ in 0..n {
            doc_ids.push(r.string()?);
            doc_lengths.push(r.u32()?);
        }
        r.finish()?;

        let mut r = Reader::new(FILES[2], &contents[2]);
        let n = r.u32()? as usize;
        if n != vocab.len() {
            return Err(Error::Format("postings/vocabulary size mismatch".into()));
        }
        let mut postings = Vec::with_capacity(n);
        for _ in 0..n {
            let ndocs = r.u32()? as usize;
            let docs = r.u32s(ndocs)?;
            let offsets = r.u32s(ndocs + 1)?;
            let npos = r.u32()? as usize;
            let positions = r.u32s(npos)?;
            if docs.last().is_some_and(|&d| d as usize >= doc_ids.len()) {
                return Err(Error::Format("posting refers to unknown document".into()));
            }
            postings.push(PostingList::from_parts(docs, offsets, positions)?);
        }
        r.finish()?;

        let index = PositionalIndex::from_parts(vocab, doc_ids, doc_lengths, postings);
        if index.stats.num_docs == 0 {
            return Err(Error::Format("index has no documents".into()));
        }
        Ok(index)
    }
}
