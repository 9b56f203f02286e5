//! On-disk caches for the construction stages.
//!
//! File layout: magic `W32C`, format version (u32), payload kind (u8), field
//! id (length-prefixed), payload length (u64), payload, SHA-256 of payload.
//! Rationals are zigzag varints with a text escape for values that do not
//! fit in 64 bits. Everything is written in discovery order, so equal
//! constructions give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::battery::VerificationReport;
use crate::error::{Error, Result};
use crate::field::{Field, FieldDescriptor, TowerElement};
use crate::groups::{Discovery, FiniteMatrixGroup};
use crate::matrix::{IntMatrix, MatrixK};
use crate::pipeline::{build_w, ConstructionContext, PreW, Transport};
use crate::rational::Rational;
use crate::reflection::{RootSystemModel, E6_ORDER};

pub const MAGIC: &[u8; 4] = b"W32C";
pub const FORMAT_VERSION: u32 = 1;

pub const E6_FILE: &str = "e6.cache";
pub const CONSTRUCTION_FILE: &str = "construction.cache";
pub const W_FILE: &str = "w.cache";
pub const REPORT_FILE: &str = "report.cache";
pub const DIRTY_MARKER: &str = ".dirty";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u8)]
pub enum PayloadKind {
    IntGroup = 1,
    Group = 2,
    Matrices = 3,
    Report = 4,
}

#[derive(Default)]
struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn varint(&mut self, mut x: u64) {
        while x >= 0x80 {
            self.buf.push((x as u8) | 0x80);
            x >>= 7;
        }
        self.buf.push(x as u8);
    }

    fn zigzag(&mut self, x: i64) {
        self.varint(((x << 1) ^ (x >> 63)) as u64);
    }

    fn bytes(&mut self, b: &[u8]) {
        self.varint(b.len() as u64);
        self.buf.extend_from_slice(b);
    }

    fn rational(&mut self, q: &Rational) {
        match q.as_small() {
            Some((n, d)) => {
                self.zigzag(n);
                self.varint(d as u64);
            }
            None => {
                // denominator 0 marks the text form
                self.zigzag(0);
                self.varint(0);
                self.bytes(q.to_string().as_bytes());
            }
        }
    }

    fn element(&mut self, x: &TowerElement) {
        self.varint(x.num_terms() as u64);
        for (i, c) in x.terms() {
            self.varint(i as u64);
            self.rational(c);
        }
    }

    fn matrix(&mut self, m: &MatrixK) {
        self.varint(m.rows() as u64);
        self.varint(m.cols() as u64);
        for x in m.entries() {
            self.element(x);
        }
    }

    fn int_matrix(&mut self, m: &IntMatrix) {
        self.varint(m.dim() as u64);
        for &x in m.entries() {
            self.zigzag(x);
        }
    }

    fn discovery(&mut self, d: &[Discovery]) {
        for x in d {
            self.varint(x.parent as u64);
            self.varint(x.generator as u64);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
    field: Field,
}

fn corrupt(what: &str) -> Error {
    Error::Cache(format!("malformed cache payload: {what}"))
}

impl<'a> Reader<'a> {
    fn u8(&mut self) -> Result<u8> {
        let x = *self.buf.get(self.pos).ok_or_else(|| corrupt("truncated"))?;
        self.pos += 1;
        Ok(x)
    }

    fn varint(&mut self) -> Result<u64> {
        let mut x = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.u8()?;
            x |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
        }
        Err(corrupt("varint too long"))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.varint()?).map_err(|_| corrupt("length"))
    }

    fn zigzag(&mut self) -> Result<i64> {
        let u = self.varint()?;
        Ok(((u >> 1) as i64) ^ -((u & 1) as i64))
    }

    fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.usize()?;
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| corrupt("truncated"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn rational(&mut self) -> Result<Rational> {
        let n = self.zigzag()?;
        let d = self.varint()?;
        if d == 0 {
            let text = std::str::from_utf8(self.bytes()?).map_err(|_| corrupt("rational text"))?;
            return text.parse().map_err(|_| corrupt("rational text"));
        }
        let d = i64::try_from(d).map_err(|_| corrupt("denominator"))?;
        Ok(Rational::new(n, d))
    }

    fn element(&mut self) -> Result<TowerElement> {
        let n = self.usize()?;
        let mut coords = vec![Rational::ZERO; self.field.degree()];
        let mut last = None;
        for _ in 0..n {
            let i = self.usize()?;
            if i >= coords.len() || last.is_some_and(|l| i <= l) {
                return Err(corrupt("coordinate index"));
            }
            last = Some(i);
            coords[i] = self.rational()?;
        }
        Ok(TowerElement::from_coords(self.field, &coords))
    }

    fn matrix(&mut self) -> Result<MatrixK> {
        let (r, c) = (self.usize()?, self.usize()?);
        if r > 64 || c > 64 {
            return Err(corrupt("matrix shape"));
        }
        let data = (0..r * c).map(|_| self.element()).collect::<Result<Vec<_>>>()?;
        Ok(MatrixK::new(r, c, self.field, data))
    }

    fn int_matrix(&mut self) -> Result<IntMatrix> {
        let n = self.usize()?;
        if n > 64 {
            return Err(corrupt("matrix shape"));
        }
        let data = (0..n * n).map(|_| self.zigzag()).collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix::new(n, data))
    }

    fn discovery(&mut self, n: usize) -> Result<Vec<Discovery>> {
        (0..n)
            .map(|_| {
                let parent = u32::try_from(self.varint()?).map_err(|_| corrupt("parent"))?;
                let generator = u32::try_from(self.varint()?).map_err(|_| corrupt("generator"))?;
                Ok(Discovery { parent, generator })
            })
            .collect()
    }

    fn finish(&self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(corrupt("trailing bytes"))
        }
    }
}

/// Frame a payload with header and checksum.
pub fn encode_file(kind: PayloadKind, field: Field, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 64);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(kind as u8);
    let id = field.id();
    out.extend_from_slice(&(id.len() as u32).to_le_bytes());
    out.extend_from_slice(id.as_bytes());
    out.extend_from_slice(&(payload.len() as u64).to_le_bytes());
    out.extend_from_slice(payload);
    out.extend_from_slice(&Sha256::digest(payload));
    out
}

/// Check header and checksum; returns the field and the payload.
pub fn decode_file(bytes: &[u8], kind: PayloadKind) -> Result<(Field, &[u8])> {
    let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
        let end = pos.checked_add(n).filter(|&e| e <= bytes.len()).ok_or_else(|| Error::Cache("truncated cache file".into()))?;
        let s = &bytes[*pos..end];
        *pos = end;
        Ok(s)
    };
    let mut pos = 0;
    if take(&mut pos, 4)? != MAGIC {
        return Err(Error::Cache("not a cache file".into()));
    }
    let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Cache(format!("cache format version {version}, expected {FORMAT_VERSION}")));
    }
    let k = take(&mut pos, 1)?[0];
    if k != kind as u8 {
        return Err(Error::Cache(format!("payload kind {k}, expected {}", kind as u8)));
    }
    let id_len = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap()) as usize;
    let id = std::str::from_utf8(take(&mut pos, id_len)?).map_err(|_| Error::Cache("field id is not UTF-8".into()))?;
    let field = FieldDescriptor::parse_id(id)?;
    let len = u64::from_le_bytes(take(&mut pos, 8)?.try_into().unwrap());
    let payload = take(&mut pos, usize::try_from(len).map_err(|_| Error::Cache("payload length".into()))?)?;
    let sum = take(&mut pos, 32)?;
    if pos != bytes.len() {
        return Err(Error::Cache("trailing bytes after checksum".into()));
    }
    if Sha256::digest(payload).as_slice() != sum {
        return Err(Error::Cache("checksum mismatch".into()));
    }
    Ok((field, payload))
}

pub fn encode_int_group(g: &FiniteMatrixGroup<IntMatrix>) -> Vec<u8> {
    let mut w = Writer::default();
    w.varint(g.generators().len() as u64);
    g.generators().iter().for_each(|m| w.int_matrix(m));
    w.varint(g.order() as u64);
    g.elements().for_each(|m| w.int_matrix(m));
    w.discovery(g.discovery());
    encode_file(PayloadKind::IntGroup, FieldDescriptor::base(), &w.buf)
}

pub fn decode_int_group(bytes: &[u8]) -> Result<FiniteMatrixGroup<IntMatrix>> {
    let (field, payload) = decode_file(bytes, PayloadKind::IntGroup)?;
    let mut r = Reader { buf: payload, pos: 0, field };
    let ng = r.usize()?;
    let gens = (0..ng).map(|_| r.int_matrix()).collect::<Result<Vec<_>>>()?;
    let n = r.usize()?;
    let elems = (0..n).map(|_| r.int_matrix()).collect::<Result<Vec<_>>>()?;
    let disc = r.discovery(n)?;
    r.finish()?;
    FiniteMatrixGroup::from_parts(elems, gens, disc)
}

pub fn encode_group(g: &FiniteMatrixGroup<MatrixK>) -> Vec<u8> {
    let mut w = Writer::default();
    w.varint(g.generators().len() as u64);
    g.generators().iter().for_each(|m| w.matrix(m));
    w.varint(g.order() as u64);
    g.elements().for_each(|m| w.matrix(m));
    w.discovery(g.discovery());
    encode_file(PayloadKind::Group, g.identity().field(), &w.buf)
}

pub fn decode_group(bytes: &[u8]) -> Result<FiniteMatrixGroup<MatrixK>> {
    let (field, payload) = decode_file(bytes, PayloadKind::Group)?;
    let mut r = Reader { buf: payload, pos: 0, field };
    let ng = r.usize()?;
    let gens = (0..ng).map(|_| r.matrix()).collect::<Result<Vec<_>>>()?;
    let n = r.usize()?;
    let elems = (0..n).map(|_| r.matrix()).collect::<Result<Vec<_>>>()?;
    let disc = r.discovery(n)?;
    r.finish()?;
    FiniteMatrixGroup::from_parts(elems, gens, disc)
}

/// Transport data and the lifted matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionRecord {
    pub p: MatrixK,
    pub c: Rational,
    pub lifts: Vec<MatrixK>,
    pub reflections: Vec<MatrixK>,
}

pub fn encode_construction(rec: &ConstructionRecord) -> Vec<u8> {
    let mut w = Writer::default();
    w.matrix(&rec.p);
    w.rational(&rec.c);
    for list in [&rec.lifts, &rec.reflections] {
        w.varint(list.len() as u64);
        list.iter().for_each(|m| w.matrix(m));
    }
    encode_file(PayloadKind::Matrices, rec.p.field(), &w.buf)
}

pub fn decode_construction(bytes: &[u8]) -> Result<ConstructionRecord> {
    let (field, payload) = decode_file(bytes, PayloadKind::Matrices)?;
    let mut r = Reader { buf: payload, pos: 0, field };
    let p = r.matrix()?;
    let c = r.rational()?;
    let mut lists = Vec::new();
    for _ in 0..2 {
        let n = r.usize()?;
        lists.push((0..n).map(|_| r.matrix()).collect::<Result<Vec<_>>>()?);
    }
    r.finish()?;
    let reflections = lists.pop().unwrap();
    let lifts = lists.pop().unwrap();
    Ok(ConstructionRecord { p, c, lifts, reflections })
}

pub fn encode_report(report: &VerificationReport, field: Field) -> Vec<u8> {
    encode_file(PayloadKind::Report, field, report.without_timings().to_json().as_bytes())
}

pub fn decode_report(bytes: &[u8]) -> Result<VerificationReport> {
    let (_, payload) = decode_file(bytes, PayloadKind::Report)?;
    Ok(serde_json::from_slice(payload)?)
}

/// What happened to each stage while obtaining a context.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageStatus {
    Loaded(&'static str),
    Built(&'static str),
    /// The cache was present but rejected, then rebuilt.
    Rebuilt(&'static str, String),
}

/// A cache directory.
#[derive(Clone, Debug)]
pub struct CacheDir {
    root: PathBuf,
}

impl CacheDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        CacheDir { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn is_dirty(&self) -> bool {
        self.path(DIRTY_MARKER).exists()
    }

    fn write(&self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::create_dir_all(&self.root)?;
        let tmp = self.path(&format!("{name}.tmp"));
        fs::write(&tmp, bytes)?;
        fs::rename(tmp, self.path(name))?;
        Ok(())
    }

    fn read(&self, name: &str) -> Option<Vec<u8>> {
        fs::read(self.path(name)).ok()
    }

    /// Remove every cache file this module writes.
    pub fn clean(&self) -> Result<usize> {
        let mut removed = 0;
        for name in [E6_FILE, CONSTRUCTION_FILE, W_FILE, REPORT_FILE, DIRTY_MARKER] {
            let p = self.path(name);
            if p.exists() {
                fs::remove_file(p)?;
                removed += 1;
            }
        }
        Ok(removed)
    }

    pub fn store_report(&self, report: &VerificationReport, field: Field) -> Result<()> {
        self.write(REPORT_FILE, &encode_report(report, field))
    }

    pub fn load_report(&self) -> Result<Option<VerificationReport>> {
        self.read(REPORT_FILE).map(|b| decode_report(&b)).transpose()
    }

    /// Load a stage, validating it, or build and store it when allowed.
    fn stage<T>(
        &self,
        name: &'static str,
        build: bool,
        log: &mut Vec<StageStatus>,
        load: impl FnOnce(&[u8]) -> Result<T>,
        make: impl FnOnce() -> Result<T>,
        encode: impl FnOnce(&T) -> Vec<u8>,
    ) -> Result<T> {
        let rejected = match self.read(name) {
            Some(bytes) => match load(&bytes) {
                Ok(v) => {
                    log.push(StageStatus::Loaded(name));
                    return Ok(v);
                }
                Err(e) => Some(e.to_string()),
            },
            None => None,
        };
        if !build {
            return Err(Error::Cache(match rejected {
                Some(e) => format!("cache {name} is invalid ({e}); run `build` or pass --build-missing"),
                None => format!("cache {name} is missing; run `build` or pass --build-missing"),
            }));
        }
        let v = make()?;
        self.write(name, &encode(&v))?;
        log.push(match rejected {
            Some(e) => StageStatus::Rebuilt(name, e),
            None => StageStatus::Built(name),
        });
        Ok(v)
    }

    /// The full context, loading valid caches and (if `build`) building
    /// and storing the rest. A dirty marker is kept while stages are being
    /// built and removed once every stage is in place.
    pub fn obtain(&self, build: bool) -> Result<(ConstructionContext, Vec<StageStatus>)> {
        let mut log = Vec::new();
        if build {
            fs::create_dir_all(&self.root)?;
            fs::write(self.path(DIRTY_MARKER), b"")?;
        }
        let model = RootSystemModel::build_e6();
        let e6 = self.stage(
            E6_FILE,
            build,
            &mut log,
            |b| {
                let g = decode_int_group(b)?;
                if g.order() != E6_ORDER || g.generators() != model.simple_reflections.as_slice() {
                    return Err(Error::Cache("E6 cache does not match the simple reflections".into()));
                }
                Ok(g)
            },
            || model.closure(),
            encode_int_group,
        )?;
        let record = self.stage(
            CONSTRUCTION_FILE,
            build,
            &mut log,
            |b| {
                let rec = decode_construction(b)?;
                Transport::from_parts(rec.p.clone(), rec.c.clone(), &model)?;
                Ok(rec)
            },
            || {
                let t = Transport::solve(&model)?;
                let pre = PreW::from_e6(model.clone(), e6.clone(), t)?;
                Ok(ConstructionRecord {
                    p: pre.transport.p,
                    c: pre.transport.c,
                    lifts: pre.lifts,
                    reflections: pre.reflections,
                })
            },
            encode_construction,
        )?;
        let transport = Transport::from_parts(record.p.clone(), record.c.clone(), &model)?;
        let pre = PreW::from_e6(model, e6, transport)?;
        if pre.lifts != record.lifts || pre.reflections != record.reflections {
            let _ = fs::remove_file(self.path(CONSTRUCTION_FILE));
            return Err(Error::Cache("cached lifts or reflections disagree with recomputation; cache removed".into()));
        }
        let w = self.stage(
            W_FILE,
            build,
            &mut log,
            |b| {
                let g = decode_group(b)?;
                let refl: std::collections::HashSet<&MatrixK> = pre.reflections.iter().collect();
                if !g.generators().iter().all(|s| refl.contains(s)) {
                    return Err(Error::Cache("W cache generators are not constructed reflections".into()));
                }
                Ok(g)
            },
            || build_w(&pre.lifts, &pre.reflections),
            encode_group,
        )?;
        let ctx = pre.with_w(w)?;
        if build {
            let _ = fs::remove_file(self.path(DIRTY_MARKER));
        }
        Ok((ctx, log))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn varints_and_rationals_round_trip() {
        let f = FieldDescriptor::with_radicals(&[2, 5]).unwrap();
        let big: Rational = "123456789012345678901234567891/2".parse().unwrap();
        let x = TowerElement::from_rational(f, big).add(&TowerElement::radical(f, 5).unwrap().scale(&Rational::new(-3, 7)));
        let m = MatrixK::new(1, 2, f, vec![x, TowerElement::j(f)]);
        let mut w = Writer::default();
        w.zigzag(i64::MIN);
        w.zigzag(-1);
        w.matrix(&m);
        let mut r = Reader { buf: &w.buf, pos: 0, field: f };
        assert_eq!(r.zigzag().unwrap(), i64::MIN);
        assert_eq!(r.zigzag().unwrap(), -1);
        assert_eq!(r.matrix().unwrap(), m);
        r.finish().unwrap();
    }

    #[test]
    fn header_and_checksum_are_enforced() {
        let f = FieldDescriptor::base();
        let bytes = encode_file(PayloadKind::Report, f, b"{}");
        assert!(decode_file(&bytes, PayloadKind::Report).is_ok());
        assert!(decode_file(&bytes, PayloadKind::Group).is_err());
        let mut bad = bytes.clone();
        let n = bad.len();
        bad[n - 40] ^= 1;
        assert!(matches!(decode_file(&bad, PayloadKind::Report), Err(Error::Cache(_))));
        let mut old = bytes.clone();
        old[4] = 9;
        assert!(decode_file(&old, PayloadKind::Report).unwrap_err().to_string().contains("version"));
    }

    #[test]
    fn int_group_round_trip() {
        let model = RootSystemModel::build_e6();
        let g = FiniteMatrixGroup::closure(IntMatrix::identity(6), &model.simple_reflections[..3], 100).unwrap();
        let bytes = encode_int_group(&g);
        let back = decode_int_group(&bytes).unwrap();
        assert_eq!(back.order(), g.order());
        assert_eq!(encode_int_group(&back), bytes);
    }
}
