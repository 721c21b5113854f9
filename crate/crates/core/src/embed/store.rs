//! Flat binary index file: magic `RGIX`, version u32, d u32, count u64,
//! then per record a source tag u8, id length u16, id bytes and d
//! little-endian f32 values. Chunk text is not stored; it is rebuilt from
//! the same sources on load.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::index::{plan_chunks, ChunkSource, EmbeddingIndex, IndexConfig, IndexSources};
use super::EmbedError;

const MAGIC: &[u8; 4] = b"RGIX";
const VERSION: u32 = 1;

pub struct RawRecord {
    pub source: ChunkSource,
    pub id: String,
    pub vector: Vec<f32>,
}

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N], EmbedError> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf).map_err(|e| EmbedError::Format(format!("truncated file: {e}")))?;
    Ok(buf)
}

impl EmbeddingIndex {
    pub fn save(&self, path: &Path) -> Result<(), EmbedError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.dim() as u32).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for (chunk, vector) in self.raw_entries() {
            let id = chunk.source_id.as_bytes();
            let len = u16::try_from(id.len())
                .map_err(|_| EmbedError::Format(format!("source id longer than 65535 bytes: {}", chunk.source_id)))?;
            w.write_all(&[chunk.source.tag()])?;
            w.write_all(&len.to_le_bytes())?;
            w.write_all(id)?;
            for x in vector {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Returns the dimension and the raw records.
    pub fn read_records(path: &Path) -> Result<(usize, Vec<RawRecord>), EmbedError> {
        let mut r = BufReader::new(File::open(path)?);
        if &read_exact::<4>(&mut r)? != MAGIC {
            return Err(EmbedError::Format("bad magic".into()));
        }
        let version = u32::from_le_bytes(read_exact(&mut r)?);
        if version != VERSION {
            return Err(EmbedError::Format(format!("unsupported version {version}")));
        }
        let d = u32::from_le_bytes(read_exact(&mut r)?) as usize;
        let count = u64::from_le_bytes(read_exact(&mut r)?);
        let mut records = Vec::new();
        for _ in 0..count {
            let [tag] = read_exact::<1>(&mut r)?;
            let source = ChunkSource::from_tag(tag).ok_or_else(|| EmbedError::Format(format!("bad source tag {tag}")))?;
            let len = u16::from_le_bytes(read_exact(&mut r)?) as usize;
            let mut id = vec![0u8; len];
            r.read_exact(&mut id).map_err(|e| EmbedError::Format(format!("truncated file: {e}")))?;
            let id = String::from_utf8(id).map_err(|_| EmbedError::Format("source id is not UTF-8".into()))?;
            let mut vector = Vec::with_capacity(d);
            for _ in 0..d {
                vector.push(f32::from_le_bytes(read_exact(&mut r)?));
            }
            records.push(RawRecord { source, id, vector });
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(EmbedError::Format("trailing bytes after last record".into()));
        }
        Ok((d, records))
    }

    /// Loads vectors and re-attaches chunk text by re-chunking `sources`,
    /// which must be the ones the index was built from.
    pub fn load(path: &Path, sources: IndexSources<'_>, cfg: &IndexConfig) -> Result<Self, EmbedError> {
        let (d, records) = Self::read_records(path)?;
        let chunks = plan_chunks(sources, cfg)?;
        if chunks.len() != records.len() {
            return Err(EmbedError::Stale(format!("file has {} chunks, sources give {}", records.len(), chunks.len())));
        }
        let mut index = Self::new(d, cfg.weights)?;
        for (chunk, rec) in chunks.into_iter().zip(records) {
            if chunk.source != rec.source || chunk.source_id != rec.id {
                return Err(EmbedError::Stale(format!("expected {}, file has {}", chunk.source_id, rec.id)));
            }
            index.insert_raw(chunk, rec.vector);
        }
        Ok(index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_corpus;
    use crate::embed::{Embedder, ReferenceEmbedder};
    use crate::graph::{Edge, KnowledgeGraph, NodeId, Provenance};

    fn sources() -> (KnowledgeGraph, crate::corpus::DocumentSet) {
        let mut g = KnowledgeGraph::new();
        g.add_edge(Edge::new(
            NodeId::parse("A:1").unwrap(),
            "rel",
            NodeId::parse("B:2").unwrap(),
            Provenance::KnowledgeBase,
        ))
        .unwrap();
        let docs = parse_corpus(r#"[{"pmid": "5", "title": "T", "sections": {"Abstract": "one two three"}}]"#)
            .unwrap()
            .0;
        (g, docs)
    }

    #[test]
    fn round_trip_preserves_search() {
        let (g, docs) = sources();
        let src = IndexSources { graph: Some(&g), docs: Some(&docs) };
        let cfg = IndexConfig::default();
        let e = ReferenceEmbedder::default();
        let idx = EmbeddingIndex::build(src, &cfg, &e).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.rgix");
        idx.save(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"RGIX");
        let header = 4 + 4 + 4 + 8;
        let records: usize = idx.chunks().map(|c| 1 + 2 + c.source_id.len() + 4 * 256).sum();
        assert_eq!(bytes.len(), header + records);

        let back = EmbeddingIndex::load(&path, src, &cfg).unwrap();
        let q = e.embed("two B:2").unwrap();
        assert_eq!(idx.search(&q, 10).unwrap(), back.search(&q, 10).unwrap());

        let stale = EmbeddingIndex::load(&path, IndexSources { graph: Some(&g), docs: None }, &cfg);
        assert!(matches!(stale, Err(EmbedError::Stale(_))));
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(EmbeddingIndex::read_records(&path), Err(EmbedError::Format(_))));
        let mut bytes = b"RGIX".to_vec();
        bytes.extend(1u32.to_le_bytes());
        bytes.extend(8u32.to_le_bytes());
        bytes.extend(1u64.to_le_bytes());
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(EmbeddingIndex::read_records(&path), Err(EmbedError::Format(_))));
    }
}
