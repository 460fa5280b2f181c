//! On-disk formats: triple TSV, graph JSON, embedding tables, alignment
//! and association-matrix CSV.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use kgprox_core::align::{AlignmentResult, EmbeddingTable};
use kgprox_core::assoc::AssociationMatrix;
use kgprox_core::model::{
    ingest_triples, Entity, EntityType, GraphBuilder, GraphStats, IngestError, IngestOptions, KnowledgeGraph,
    RawRow, Triple,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const TRIPLE_HEADER: [&str; 5] = ["head", "head_type", "predicate", "tail", "tail_type"];

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::input(path, line, format!("{kind:?}")),
    }
}

fn tsv_reader<R: Read>(reader: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(false)
        .quoting(false)
        .flexible(true)
        .from_reader(reader)
}

/// Parses a triple TSV. The header row is mandatory; a file holding only
/// the header yields no rows.
pub fn parse_triples<R: Read>(reader: R, path: &Path) -> Result<Vec<RawRow>> {
    let mut tsv = tsv_reader(reader);
    let mut records = tsv.records();
    match records.next() {
        None => return Err(Error::input(path, Some(1), "missing header row")),
        Some(header) => {
            let header = header.map_err(|e| csv_error(path, e))?;
            let got: Vec<String> = header.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
            if got != TRIPLE_HEADER {
                return Err(Error::input(
                    path,
                    Some(1),
                    format!("expected header `{}`, found `{}`", TRIPLE_HEADER.join("\t"), got.join("\t")),
                ));
            }
        }
    }
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line());
        if record.len() != 5 {
            return Err(Error::input(path, line, format!("expected 5 fields, found {}", record.len())));
        }
        rows.push(RawRow::new(&record[0], &record[1], &record[2], &record[3], &record[4]));
    }
    Ok(rows)
}

pub fn read_triples(path: &Path) -> Result<Vec<RawRow>> {
    parse_triples(open(path)?, path)
}

/// Ingests a triple TSV, reporting schema violations by file line.
pub fn ingest_file(path: &Path, options: IngestOptions) -> Result<KnowledgeGraph> {
    let rows = read_triples(path)?;
    ingest_triples(rows, options).map_err(|e| {
        let row = match &e {
            IngestError::UnknownType { row, .. }
            | IngestError::UnknownPredicate { row, .. }
            | IngestError::EmptyName { row }
            | IngestError::SchemaViolation { row, .. } => *row,
        };
        // data rows start on line 2
        Error::input(path, Some(row as u64 + 2), e.to_string())
    })
}

pub fn write_triples_to<W: Write>(writer: W, rows: &[RawRow]) -> std::io::Result<()> {
    let mut out = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .from_writer(writer);
    out.write_record(TRIPLE_HEADER)?;
    for r in rows {
        out.write_record([&r.head, &r.head_type, &r.predicate, &r.tail, &r.tail_type])?;
    }
    out.flush()
}

pub fn write_triples(path: &Path, rows: &[RawRow]) -> Result<()> {
    write_triples_to(create(path)?, rows).map_err(|e| Error::io(path, e))
}

/// Triple rows of an existing graph, one per distinct triple.
pub fn graph_rows(graph: &KnowledgeGraph) -> Vec<RawRow> {
    graph
        .triples()
        .iter()
        .map(|t| {
            let (h, tl) = (&graph.entities()[t.head.index()], &graph.entities()[t.tail.index()]);
            RawRow::new(&h.name, h.entity_type.as_str(), t.predicate.as_str(), &tl.name, tl.entity_type.as_str())
        })
        .collect()
}

/// Serialized form of a graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub entities: Vec<Entity>,
    pub triples: Vec<Triple>,
    pub stats: GraphStats,
}

impl GraphDocument {
    pub fn of(graph: &KnowledgeGraph) -> Self {
        GraphDocument {
            entities: graph.entities().to_vec(),
            triples: graph.triples().to_vec(),
            stats: graph.stats(),
        }
    }

    /// Rebuilds the graph. Triples refer to entities by the `id` fields of
    /// `entities`; `stats` is ignored and recomputed.
    pub fn into_graph(self, path: &Path) -> Result<KnowledgeGraph> {
        let mut b = GraphBuilder::new();
        for e in &self.entities {
            b.add_entity(&e.name, e.entity_type, e.aliases.iter().cloned());
        }
        let by_id: std::collections::HashMap<_, _> = self.entities.iter().map(|e| (e.id, e)).collect();
        for (i, t) in self.triples.iter().enumerate() {
            let lookup = |id: kgprox_core::EntityId| {
                by_id
                    .get(&id)
                    .copied()
                    .ok_or_else(|| Error::input(path, None, format!("triple {i} names unknown entity {id}")))
            };
            let (h, tl) = (lookup(t.head)?, lookup(t.tail)?);
            b.add_triple(i, &h.name, h.entity_type, t.predicate, &tl.name, tl.entity_type, t.multiplicity.max(1))
                .map_err(|e| Error::input(path, None, e.to_string()))?;
        }
        Ok(b.build())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(std::io::Error::from)
        .and_then(|_| w.write_all(b"\n"))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::input(path, Some(e.line() as u64), e.to_string()))
}

pub fn write_graph(path: &Path, graph: &KnowledgeGraph) -> Result<()> {
    write_json(path, &GraphDocument::of(graph))
}

pub fn read_graph(path: &Path) -> Result<KnowledgeGraph> {
    read_json::<GraphDocument>(path)?.into_graph(path)
}

/// Parses `surface<TAB>v1 v2 … vn` records. Blank lines are skipped; every
/// vector must have the dimension of the first.
pub fn parse_embeddings<R: BufRead>(reader: R, path: &Path) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let lineno = Some(i as u64 + 1);
        if line.trim().is_empty() {
            continue;
        }
        let (surface, values) = line
            .split_once('\t')
            .ok_or_else(|| Error::input(path, lineno, "expected `surface<TAB>vector`"))?;
        let vector = values
            .split_whitespace()
            .map(str::parse::<f64>)
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| Error::input(path, lineno, e.to_string()))?;
        let table = table.get_or_insert_with(|| EmbeddingTable::new(vector.len()));
        table
            .insert(surface, vector)
            .map_err(|e| Error::input(path, lineno, e.to_string()))?;
    }
    table.ok_or_else(|| Error::input(path, None, "no embeddings"))
}

pub fn read_embeddings(path: &Path) -> Result<EmbeddingTable> {
    parse_embeddings(open(path)?, path)
}

/// `surface,canonical,cluster_id,score,type`, one row per input surface.
pub fn write_alignment_csv<W: Write>(writer: W, result: &AlignmentResult) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["surface", "canonical", "cluster_id", "score", "type"])?;
    for c in &result.clusters {
        for m in &c.members {
            out.write_record([
                m.surface.as_str(),
                c.canonical.as_str(),
                &c.id.to_string(),
                &m.score.to_string(),
                c.entity_type.as_str(),
            ])?;
        }
    }
    out.flush()
}

/// 0/1 incidence with entity ids as row and column headers.
pub fn write_matrix_csv<W: Write>(writer: W, matrix: &AssociationMatrix) -> std::io::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string()];
    header.extend(matrix.cols().iter().map(|c| c.to_string()));
    out.write_record(&header)?;
    for (r, id) in matrix.rows().iter().enumerate() {
        let mut record = vec![id.to_string()];
        record.extend((0..matrix.cols().len()).map(|c| if matrix.cell(r, c) { "1" } else { "0" }.to_string()));
        out.write_record(&record)?;
    }
    out.flush()
}

/// Resolves an entity by name, optionally pinned to a type. Names carried
/// by several types need the type.
pub fn resolve(graph: &KnowledgeGraph, name: &str, entity_type: Option<EntityType>) -> Result<kgprox_core::EntityId> {
    let hits = match entity_type {
        Some(t) => graph.find(name, t).into_iter().collect(),
        None => graph.find_any(name),
    };
    match hits.as_slice() {
        [id] => Ok(*id),
        [] => Err(Error::Usage(format!("unknown entity `{name}`"))),
        _ => Err(Error::Usage(format!("`{name}` names several entity types; pass a type"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "head\thead_type\tpredicate\ttail\ttail_type\n\
        sertraline\tdrug\ttreat\tMood disorders\tdisease\n\
        low mood\tsymptom\tdiagnosis\tMood disorders\tdisease\n";

    #[test]
    fn triples_round_trip() {
        let p = Path::new("t.tsv");
        let rows = parse_triples(TABLE.as_bytes(), p).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].tail, "Mood disorders");
        let mut buf = Vec::new();
        write_triples_to(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), TABLE);
    }

    #[test]
    fn bad_tables_name_the_line() {
        let p = Path::new("t.tsv");
        let err = parse_triples("head\ttail\n".as_bytes(), p).unwrap_err();
        assert!(matches!(err, Error::Input { line: Some(1), .. }));
        let short = format!("{TABLE}a\tsymptom\tdiagnosis\n");
        let err = parse_triples(short.as_bytes(), p).unwrap_err();
        assert!(matches!(err, Error::Input { line: Some(4), .. }), "{err}");
        assert!(parse_triples("".as_bytes(), p).is_err());
        assert!(parse_triples("head\thead_type\tpredicate\ttail\ttail_type\n".as_bytes(), p)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn graph_document_round_trip() {
        let rows = parse_triples(TABLE.as_bytes(), Path::new("t")).unwrap();
        let g = ingest_triples(rows, IngestOptions::default()).unwrap();
        let text = serde_json::to_string(&GraphDocument::of(&g)).unwrap();
        let back: GraphDocument = serde_json::from_str(&text).unwrap();
        let g2 = back.into_graph(Path::new("g.json")).unwrap();
        assert_eq!(g.entities(), g2.entities());
        assert_eq!(g.triples(), g2.triples());
        assert!(text.contains("\"stats\""));
    }

    #[test]
    fn embeddings_parse_and_check_dimensions() {
        let p = Path::new("e.txt");
        let t = parse_embeddings("a\t1 0\n\nb\t0.5 0.5\n".as_bytes(), p).unwrap();
        assert_eq!((t.len(), t.dim()), (2, 2));
        assert!(matches!(
            parse_embeddings("a\t1 0\nb\t1\n".as_bytes(), p),
            Err(Error::Input { line: Some(2), .. })
        ));
        assert!(parse_embeddings("a 1 0\n".as_bytes(), p).is_err());
    }

    #[test]
    fn matrix_csv_has_id_headers() {
        use kgprox_core::EntityId;
        let m = AssociationMatrix::from_pairs([(EntityId(0), EntityId(5)), (EntityId(1), EntityId(6))]);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "id,5,6\n0,1,0\n1,0,1\n");
    }
}
