use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{Analyzer, Document, Query, Vocabulary};
use crate::error::{Error, Result};

/// On-disk corpus layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// SGML-like `<DOC>` blocks with a `<DOCNO>` id.
    TrecText,
    /// One `id<TAB>text` record per line.
    Lines,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trec_text" | "trec-text" | "trec" => Ok(CorpusFormat::TrecText),
            "lines" => Ok(CorpusFormat::Lines),
            other => Err(Error::InvalidParam(format!("unknown corpus format `{other}`"))),
        }
    }
}

impl std::fmt::Display for CorpusFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CorpusFormat::TrecText => "trec",
            CorpusFormat::Lines => "lines",
        })
    }
}

/// Opens `path` (a file, or a directory whose files are read in name order)
/// and streams analyzed documents, interning terms into `vocab`.
pub fn read_corpus<'v>(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    analyzer: &'v Analyzer,
    vocab: &'v mut Vocabulary,
) -> Result<CorpusReader<'v>> {
    let path = path.as_ref();
    let mut files = Vec::new();
    if path.is_dir() {
        let entries = std::fs::read_dir(path).map_err(|e| Error::io(path, e))?;
        for entry in entries {
            let entry = entry.map_err(|e| Error::io(path, e))?;
            if entry.path().is_file() {
                files.push(entry.path());
            }
        }
        files.sort();
    } else {
        // Surface a missing file now rather than on first `next()`.
        std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
        files.push(path.to_path_buf());
    }
    files.reverse();
    Ok(CorpusReader {
        format,
        analyzer,
        vocab,
        files,
        source: None,
        docs: 0,
        failed: false,
    })
}

enum Source {
    Lines {
        path: PathBuf,
        reader: BufReader<File>,
        offset: u64,
    },
    Trec {
        path: PathBuf,
        text: String,
        cursor: usize,
    },
}

/// Streaming document reader; see [`read_corpus`].
pub struct CorpusReader<'v> {
    format: CorpusFormat,
    analyzer: &'v Analyzer,
    vocab: &'v mut Vocabulary,
    /// Remaining files, last one next.
    files: Vec<PathBuf>,
    source: Option<Source>,
    docs: usize,
    failed: bool,
}

struct RawDoc {
    id: String,
    text: String,
}

impl CorpusReader<'_> {
    fn open_next(&mut self) -> Result<bool> {
        let Some(path) = self.files.pop() else {
            return Ok(false);
        };
        self.source = Some(match self.format {
            CorpusFormat::Lines => {
                let f = File::open(&path).map_err(|e| Error::io(&path, e))?;
                Source::Lines {
                    path,
                    reader: BufReader::new(f),
                    offset: 0,
                }
            }
            CorpusFormat::TrecText => {
                let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                Source::Trec {
                    path,
                    text,
                    cursor: 0,
                }
            }
        });
        Ok(true)
    }

    fn next_raw(&mut self) -> Result<Option<RawDoc>> {
        loop {
            if self.source.is_none() && !self.open_next()? {
                return Ok(None);
            }
            let docs = self.docs;
            let found = match self.source.as_mut().expect("source opened") {
                Source::Lines {
                    path,
                    reader,
                    offset,
                } => next_line_record(path, reader, offset, docs)?,
                Source::Trec { path, text, cursor } => next_trec_record(path, text, cursor, docs)?,
            };
            match found {
                Some(raw) => return Ok(Some(raw)),
                None => self.source = None,
            }
        }
    }
}

impl Iterator for CorpusReader<'_> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.next_raw() {
            Ok(Some(raw)) => {
                self.docs += 1;
                let terms = self
                    .analyzer
                    .analyze(&raw.text)
                    .iter()
                    .map(|s| self.vocab.intern(s))
                    .collect();
                Some(Ok(Document::new(raw.id, terms)))
            }
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

fn next_line_record(
    path: &Path,
    reader: &mut BufReader<File>,
    offset: &mut u64,
    docs: usize,
) -> Result<Option<RawDoc>> {
    let mut line = String::new();
    loop {
        line.clear();
        let start = *offset;
        let n = reader.read_line(&mut line).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Ok(None);
        }
        *offset += n as u64;
        let record = line.trim_end_matches(['\n', '\r']);
        if record.trim().is_empty() {
            continue;
        }
        let Some((id, text)) = record.split_once('\t') else {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                offset: start,
                docs,
                message: "expected `id<TAB>text`".into(),
            });
        };
        let id = id.trim();
        if id.is_empty() {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                offset: start,
                docs,
                message: "empty document id".into(),
            });
        }
        return Ok(Some(RawDoc {
            id: id.to_string(),
            text: text.to_string(),
        }));
    }
}

fn next_trec_record(
    path: &Path,
    text: &str,
    cursor: &mut usize,
    docs: usize,
) -> Result<Option<RawDoc>> {
    let malformed = |offset: usize, message: &str| Error::Malformed {
        path: path.to_path_buf(),
        offset: offset as u64,
        docs,
        message: message.to_string(),
    };
    let rest = &text[*cursor..];
    let Some(open_rel) = rest.find("<DOC>") else {
        if rest.contains("</DOC>") {
            let at = *cursor + rest.find("</DOC>").unwrap_or(0);
            return Err(malformed(at, "</DOC> without matching <DOC>"));
        }
        return Ok(None);
    };
    let open = *cursor + open_rel;
    if let Some(stray) = text[*cursor..open].find("</DOC>") {
        return Err(malformed(*cursor + stray, "</DOC> without matching <DOC>"));
    }
    let body_start = open + "<DOC>".len();
    let Some(close_rel) = text[body_start..].find("</DOC>") else {
        return Err(malformed(open, "unterminated <DOC> block"));
    };
    let body_end = body_start + close_rel;
    let body = &text[body_start..body_end];
    if let Some(nested) = body.find("<DOC>") {
        return Err(malformed(body_start + nested, "nested <DOC> block"));
    }

    let (id, body) = take_element(body, "DOCNO").ok_or_else(|| malformed(open, "missing <DOCNO>"))?;
    let id = id.trim().to_string();
    if id.is_empty() {
        return Err(malformed(open, "empty <DOCNO>"));
    }
    // Web collections carry HTTP headers that are not document text.
    let body = match take_element(&body, "DOCHDR") {
        Some((_, stripped)) => stripped,
        None => body,
    };

    *cursor = body_end + "</DOC>".len();
    Ok(Some(RawDoc { id, text: body }))
}

/// Returns the content of the first `<tag>…</tag>` element and the input with
/// that element removed.
fn take_element(body: &str, tag: &str) -> Option<(String, String)> {
    let open = format!("<{tag}>");
    let close = format!("</{tag}>");
    let start = body.find(&open)?;
    let content_start = start + open.len();
    let end = content_start + body[content_start..].find(&close)?;
    let content = body[content_start..end].to_string();
    let mut remaining = String::with_capacity(body.len());
    remaining.push_str(&body[..start]);
    remaining.push(' ');
    remaining.push_str(&body[end + close.len()..]);
    Some((content, remaining))
}

/// Reads a `query_id<TAB>title` topics file. Topics whose title analyzes to
/// nothing are kept with an empty term list; callers decide how to report them.
pub fn read_topics(path: impl AsRef<Path>, analyzer: &Analyzer, vocab: &Vocabulary) -> Result<Vec<Query>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut offset = 0u64;
    let mut topics = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let start = offset;
        offset += line.len() as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        let Some((id, title)) = line.split_once('\t') else {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                offset: start,
                docs: topics.len(),
                message: "expected `query_id<TAB>title`".into(),
            });
        };
        topics.push(Query {
            query_id: id.trim().to_string(),
            terms: vocab.lookup_query(&analyzer.analyze(title)),
        });
    }
    Ok(topics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn collect(path: &Path, format: CorpusFormat) -> (Result<Vec<Document>>, Vocabulary) {
        let analyzer = Analyzer::new();
        let mut vocab = Vocabulary::new();
        let docs = read_corpus(path, format, &analyzer, &mut vocab)
            .and_then(|r| r.collect::<Result<Vec<_>>>());
        (docs, vocab)
    }

    #[test]
    fn one_trec_block() {
        let f = write("<DOC>\n<DOCNO> AP880212-0001 </DOCNO>\n<TEXT>\nOne two three four five\n</TEXT>\n</DOC>\n");
        let (docs, _) = collect(f.path(), CorpusFormat::TrecText);
        let docs = docs.unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].external_id, "AP880212-0001");
        assert_eq!(docs[0].len(), 5);
    }

    #[test]
    fn inline_blocks_and_dochdr() {
        let f = write("<DOC><DOCNO>a</DOCNO>x y</DOC><DOC><DOCNO>b</DOCNO><DOCHDR>http://h</DOCHDR><html>z</html></DOC>");
        let (docs, _) = collect(f.path(), CorpusFormat::TrecText);
        let docs = docs.unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[1].external_id, "b");
        assert_eq!(docs[1].len(), 1);
    }

    #[test]
    fn empty_file_is_empty_stream() {
        let f = write("");
        assert!(collect(f.path(), CorpusFormat::TrecText).0.unwrap().is_empty());
        assert!(collect(f.path(), CorpusFormat::Lines).0.unwrap().is_empty());
    }

    #[test]
    fn lines_record_counts() {
        let f = write("d1\ta b a\n");
        let (docs, vocab) = collect(f.path(), CorpusFormat::Lines);
        let docs = docs.unwrap();
        assert_eq!(docs[0].external_id, "d1");
        assert_eq!(docs[0].len(), 3);
        assert_eq!(vocab.len(), 2);
    }

    #[test]
    fn malformed_reports_offset_and_count() {
        let f = write("d1\ta b\nbroken line\n");
        match collect(f.path(), CorpusFormat::Lines).0 {
            Err(Error::Malformed { offset, docs, .. }) => {
                assert_eq!(offset, 7);
                assert_eq!(docs, 1);
            }
            other => panic!("expected malformed, got {other:?}"),
        }

        let f = write("<DOC><DOCNO>a</DOCNO>x</DOC>\n<DOC><DOCNO>b</DOCNO>never closed");
        match collect(f.path(), CorpusFormat::TrecText).0 {
            Err(Error::Malformed { offset, docs, .. }) => {
                assert_eq!(offset, 29);
                assert_eq!(docs, 1);
            }
            other => panic!("expected malformed, got {other:?}"),
        }

        let f = write("<DOC>no id here</DOC>");
        assert!(matches!(
            collect(f.path(), CorpusFormat::TrecText).0,
            Err(Error::Malformed { .. })
        ));
    }

    #[test]
    fn ingestion_is_deterministic() {
        let f = write("d1\tthe quick brown fox\nd2\tquick foxes jumped\n");
        let (a, va) = collect(f.path(), CorpusFormat::Lines);
        let (b, vb) = collect(f.path(), CorpusFormat::Lines);
        assert_eq!(a.unwrap(), b.unwrap());
        assert_eq!(va, vb);
    }

    #[test]
    fn topics_use_the_same_pipeline() {
        let corpus = write("d1\tOrdered retrieval models\n");
        let analyzer = Analyzer::new();
        let mut vocab = Vocabulary::new();
        let docs: Vec<_> = read_corpus(corpus.path(), CorpusFormat::Lines, &analyzer, &mut vocab)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        let topics = write("301\tOrdered Retrieval Models\n302\t...\n");
        let q = read_topics(topics.path(), &analyzer, &vocab).unwrap();
        assert_eq!(q[0].terms, docs[0].terms);
        assert!(q[1].terms.is_empty());
    }
}
