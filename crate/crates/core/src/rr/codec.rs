//! Binary dump of an RR collection.
//!
//! Layout: magic, then LEB128 varints `n`, Γ as 8 little-endian bytes,
//! varint `count`, and per set: varint tag, varint length, sorted node ids
//! as varints.

use std::io::{Read, Write};

use super::{RrCollection, RrError};
use crate::network::NodeId;

pub const MAGIC: &[u8; 8] = b"RRSETS01";

fn varint<W: Write>(w: &mut W, x: u64) -> Result<(), RrError> {
    leb128::write::unsigned(w, x)?;
    Ok(())
}

fn read_varint<R: Read>(r: &mut R) -> Result<u64, RrError> {
    leb128::read::unsigned(r).map_err(|e| match e {
        leb128::read::Error::IoError(io) => RrError::Io(io),
        leb128::read::Error::Overflow => RrError::Format("varint overflow".into()),
    })
}

pub fn write_collection<W: Write>(coll: &RrCollection, mut w: W) -> Result<(), RrError> {
    w.write_all(MAGIC)?;
    varint(&mut w, coll.node_count() as u64)?;
    w.write_all(&coll.gamma().to_le_bytes())?;
    varint(&mut w, coll.len() as u64)?;
    for k in 0..coll.len() {
        varint(&mut w, coll.tag(k) as u64)?;
        let set = coll.set(k);
        varint(&mut w, set.len() as u64)?;
        for &v in set {
            varint(&mut w, v as u64)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Restores a dump; the advertiser count is not stored and must be supplied.
pub fn read_collection<R: Read>(mut r: R, advertisers: usize) -> Result<RrCollection, RrError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(RrError::Format("bad magic header".into()));
    }
    let n = read_varint(&mut r)? as usize;
    let mut g = [0u8; 8];
    r.read_exact(&mut g)?;
    let gamma = f64::from_le_bytes(g);
    let count = read_varint(&mut r)?;
    let mut sets = Vec::new();
    for k in 0..count {
        let tag = read_varint(&mut r)?;
        if tag as usize >= advertisers {
            return Err(RrError::Format(format!("set {k}: tag {tag} >= {advertisers}")));
        }
        let len = read_varint(&mut r)?;
        if len == 0 || len as usize > n {
            return Err(RrError::Format(format!("set {k}: length {len}")));
        }
        let mut nodes = Vec::with_capacity(len as usize);
        for _ in 0..len {
            let v = read_varint(&mut r)?;
            if v as usize >= n {
                return Err(RrError::Format(format!("set {k}: node {v} >= {n}")));
            }
            nodes.push(v as NodeId);
        }
        sets.push((tag as u32, nodes));
    }
    let mut coll = RrCollection::new(n, advertisers, gamma);
    coll.extend(sets);
    Ok(coll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{generate_synthetic, SyntheticModel};
    use crate::rng::Stream;
    use crate::rr::RrSampler;

    #[test]
    fn round_trip() {
        let net = generate_synthetic(150, SyntheticModel::PowerLaw, 1, 2);
        let c = RrSampler::new(&net, &[0.7, 1.3], 4, Stream::Selection).unwrap().collection(800);
        let mut buf = Vec::new();
        write_collection(&c, &mut buf).unwrap();
        let back = read_collection(buf.as_slice(), 2).unwrap();
        assert_eq!(back.len(), c.len());
        assert_eq!(back.gamma().to_bits(), c.gamma().to_bits());
        for k in 0..c.len() {
            assert_eq!(back.tag(k), c.tag(k));
            assert_eq!(back.set(k), c.set(k));
        }
        assert!(back.index_is_consistent());
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_collection(&b"NOTRRSET"[..], 1).is_err());
        let mut buf = Vec::new();
        let mut c = RrCollection::new(3, 2, 1.0);
        c.extend([(1, vec![2])]);
        write_collection(&c, &mut buf).unwrap();
        assert!(matches!(read_collection(buf.as_slice(), 1), Err(RrError::Format(_))));
        buf.truncate(buf.len() - 1);
        assert!(read_collection(buf.as_slice(), 2).is_err());
    }
}
