//! Binary (`DCMG`) and text edge-list formats.

use std::io::{BufRead, BufWriter, Read, Write};

use super::Digraph;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DCMG";
const VERSION: u32 = 1;

impl Digraph {
    /// Header `DCMG`, version `u32`, `n u64`, `m u64`, then `m` little-endian
    /// `(u32 src, u32 dst)` pairs in source order.
    pub fn write_binary<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.edge_count() as u64).to_le_bytes())?;
        for (u, v) in self.edges() {
            w.write_all(&u.to_le_bytes())?;
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 24];
        r.read_exact(&mut header)?;
        if &header[..4] != MAGIC {
            return Err(Error::Format("not a DCMG file".into()));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != VERSION {
            return Err(Error::Format(format!("unsupported DCMG version {version}")));
        }
        let n = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let m = u64::from_le_bytes(header[16..24].try_into().unwrap()) as usize;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 8 * m {
            return Err(Error::Format(format!("expected {m} edges, payload has {} bytes", body.len())));
        }
        let edges: Vec<(u32, u32)> = body
            .chunks_exact(8)
            .map(|c| {
                (
                    u32::from_le_bytes(c[..4].try_into().unwrap()),
                    u32::from_le_bytes(c[4..].try_into().unwrap()),
                )
            })
            .collect();
        Digraph::from_edges(n, &edges)
    }

    /// One `src dst` pair per line after a `# n <nodes>` header, so isolated
    /// trailing nodes survive a round trip.
    pub fn write_edge_list<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        writeln!(w, "# n {}", self.n)?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads an edge list. Without a `# n` header the node count is one more
    /// than the largest id seen. Blank lines and other `#` comments are skipped.
    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(count) = rest.trim().strip_prefix("n ") {
                    n = Some(count.trim().parse().map_err(|_| Error::Format(format!("line {}: bad node count", lineno + 1)))?);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace().map(str::parse::<u32>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
                _ => return Err(Error::Format(format!("line {}: expected `src dst`", lineno + 1))),
            }
        }
        let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) as usize + 1).max().unwrap_or(0));
        Digraph::from_edges(n, &edges)
    }
}
