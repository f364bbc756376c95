//! Binary serialization of a [`Factorization`].
//!
//! Layout, little endian throughout:
//!
//! ```text
//! "HIFF" u32 version  u8 scalar(0 real, 1 complex)  u8 scheme  u8 symmetric
//! f64 eps  u64 d n levels m  u64 N
//! u64 level count, then per level:
//!   u64 whole num den  u8 kind  u64 active_before active_after  u64 records
//!   per record: u64 cluster_id  f64 center[d]
//!               u64 |sk| sk[..]  u64 |rd| rd[..]
//!               scalars T (|sk| x |rd|, column major)
//!               factor(|rd|)  scalars B_rs (|rd| x |sk|)
//!               u8 has_b_sr  [scalars B_sr (|sk| x |rd|)]
//! u64 |terminal| terminal[..]  factor(|terminal|)
//! factor(k): u8 kind(0 LU, 1 LDL)  u64 perm[k]  scalars (k*k or k(k+1)/2)
//! ```
//!
//! A real scalar is one f64, a complex scalar is (re, im).

use std::io::{Read, Write};

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::factor::{FactorLevel, FactorScheme, Factorization, SkelRecord};
use crate::geometry::{ClusterKind, GridSpec, LevelTag};
use crate::linalg::{BlockFactor, FactorKind, Mat};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 4] = b"HIFF";
pub const VERSION: u32 = 1;

// Sanity bound on any length field read back from a stream.
const MAX_LEN: u64 = 1 << 34;

fn scheme_code(s: FactorScheme) -> u8 {
    match s {
        FactorScheme::Rskelf => 0,
        FactorScheme::Hifie => 1,
        FactorScheme::HifieX => 2,
    }
}

fn kind_code(k: ClusterKind) -> u8 {
    match k {
        ClusterKind::Cell => 0,
        ClusterKind::Face => 1,
        ClusterKind::Edge => 2,
    }
}

fn fmt_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

struct Writer<W> {
    w: W,
}

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> Result<()> {
        Ok(self.w.write_u8(v)?)
    }

    fn u64(&mut self, v: u64) -> Result<()> {
        Ok(self.w.write_u64::<LE>(v)?)
    }

    fn f64(&mut self, v: f64) -> Result<()> {
        Ok(self.w.write_f64::<LE>(v)?)
    }

    fn ids(&mut self, ids: &[usize]) -> Result<()> {
        self.u64(ids.len() as u64)?;
        ids.iter().try_for_each(|&i| self.u64(i as u64))
    }

    fn scalars<T: Scalar>(&mut self, v: &[T]) -> Result<()> {
        for &x in v {
            self.f64(x.re())?;
            if T::IS_COMPLEX {
                self.f64(x.im())?;
            }
        }
        Ok(())
    }

    fn factor<T: Scalar>(&mut self, f: &BlockFactor<T>) -> Result<()> {
        self.u8(match f.kind {
            FactorKind::Lu => 0,
            FactorKind::Ldl => 1,
        })?;
        f.perm.iter().try_for_each(|&p| self.u64(p as u64))?;
        self.scalars(&f.stored_values())
    }
}

struct Reader<R> {
    r: R,
}

impl<R: Read> Reader<R> {
    fn u8(&mut self) -> Result<u8> {
        Ok(self.r.read_u8()?)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(self.r.read_u64::<LE>()?)
    }

    fn len(&mut self) -> Result<usize> {
        let v = self.u64()?;
        if v > MAX_LEN {
            return Err(fmt_err(format!("length {v} out of range")));
        }
        Ok(v as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(self.r.read_f64::<LE>()?)
    }

    fn ids(&mut self, n: usize) -> Result<Vec<usize>> {
        let k = self.len()?;
        let v: Vec<usize> = (0..k).map(|_| self.len()).collect::<Result<_>>()?;
        if v.iter().any(|&i| i >= n) {
            return Err(fmt_err("index out of range"));
        }
        Ok(v)
    }

    fn scalars<T: Scalar>(&mut self, k: usize) -> Result<Vec<T>> {
        (0..k)
            .map(|_| {
                let re = self.f64()?;
                let im = if T::IS_COMPLEX { self.f64()? } else { 0.0 };
                T::from_c64(Complex64::new(re, im)).ok_or_else(|| fmt_err("scalar field"))
            })
            .collect()
    }

    fn mat<T: Scalar>(&mut self, rows: usize, cols: usize) -> Result<Mat<T>> {
        Ok(Mat::from_col_major(rows, cols, self.scalars(rows * cols)?))
    }

    fn factor<T: Scalar>(&mut self, k: usize) -> Result<BlockFactor<T>> {
        let kind = match self.u8()? {
            0 => FactorKind::Lu,
            1 => FactorKind::Ldl,
            x => return Err(fmt_err(format!("bad factor kind {x}"))),
        };
        let perm: Vec<usize> = (0..k).map(|_| self.len()).collect::<Result<_>>()?;
        if perm.iter().any(|&p| p >= k) {
            return Err(fmt_err("permutation out of range"));
        }
        let count = match kind {
            FactorKind::Lu => k * k,
            FactorKind::Ldl => k * (k + 1) / 2,
        };
        let vals = self.scalars(count)?;
        BlockFactor::from_stored(kind, perm, &vals).ok_or_else(|| fmt_err("inconsistent factor"))
    }
}

impl<T: Scalar> Factorization<T> {
    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut o = Writer { w };
        o.w.write_all(MAGIC)?;
        o.w.write_u32::<LE>(VERSION)?;
        o.u8(T::TYPE_TAG)?;
        o.u8(scheme_code(self.scheme))?;
        o.u8(self.symmetric as u8)?;
        o.f64(self.eps)?;
        for v in [self.spec.d, self.spec.n, self.spec.levels, self.spec.m, self.n] {
            o.u64(v as u64)?;
        }
        o.u64(self.levels.len() as u64)?;
        for l in &self.levels {
            for v in [l.tag.whole, l.tag.num, l.tag.den] {
                o.u64(v as u64)?;
            }
            o.u8(kind_code(l.kind))?;
            o.u64(l.active_before as u64)?;
            o.u64(l.active_after as u64)?;
            o.u64(l.records.len() as u64)?;
            for r in &l.records {
                o.u64(r.cluster_id as u64)?;
                r.center.iter().try_for_each(|&c| o.f64(c))?;
                o.ids(&r.sk)?;
                o.ids(&r.rd)?;
                o.scalars(r.t.as_slice())?;
                o.factor(&r.rd_factor)?;
                o.scalars(r.b_rs.as_slice())?;
                match &r.b_sr {
                    Some(m) => {
                        o.u8(1)?;
                        o.scalars(m.as_slice())?;
                    }
                    None => o.u8(0)?,
                }
            }
        }
        o.ids(&self.terminal_ids)?;
        o.factor(&self.terminal)?;
        Ok(o.w.flush()?)
    }

    pub fn read_from<R: Read>(r: R) -> Result<Self> {
        let mut i = Reader { r };
        let mut magic = [0u8; 4];
        i.r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(fmt_err("bad magic"));
        }
        let version = i.r.read_u32::<LE>()?;
        if version != VERSION {
            return Err(fmt_err(format!("unsupported version {version}")));
        }
        let tag = i.u8()?;
        if tag != T::TYPE_TAG {
            return Err(Error::ScalarFieldMismatch(format!("stream holds scalar type {tag}, expected {}", T::TYPE_TAG)));
        }
        let scheme = match i.u8()? {
            0 => FactorScheme::Rskelf,
            1 => FactorScheme::Hifie,
            2 => FactorScheme::HifieX,
            x => return Err(fmt_err(format!("bad scheme {x}"))),
        };
        let symmetric = i.u8()? != 0;
        let eps = i.f64()?;
        let (d, n1, lv, m) = (i.len()?, i.len()?, i.len()?, i.len()?);
        let spec = GridSpec::new(d, n1, lv, m)?;
        let n = i.len()?;
        if n != spec.num_points() {
            return Err(fmt_err("size does not match grid"));
        }
        let nlev = i.len()?;
        let mut levels = Vec::with_capacity(nlev.min(1024));
        for _ in 0..nlev {
            let tag = LevelTag {
                whole: i.len()?,
                num: i.len()?,
                den: i.len()?,
            };
            let kind = match i.u8()? {
                0 => ClusterKind::Cell,
                1 => ClusterKind::Face,
                2 => ClusterKind::Edge,
                x => return Err(fmt_err(format!("bad cluster kind {x}"))),
            };
            let active_before = i.len()?;
            let active_after = i.len()?;
            let nrec = i.len()?;
            let mut records = Vec::with_capacity(nrec.min(1 << 16));
            for _ in 0..nrec {
                let cluster_id = i.len()?;
                let center = (0..d).map(|_| i.f64()).collect::<Result<Vec<_>>>()?;
                let sk = i.ids(n)?;
                let rd = i.ids(n)?;
                let t = i.mat(sk.len(), rd.len())?;
                let rd_factor = i.factor(rd.len())?;
                let b_rs = i.mat(rd.len(), sk.len())?;
                let b_sr = match i.u8()? {
                    0 => None,
                    1 => Some(i.mat(sk.len(), rd.len())?),
                    x => return Err(fmt_err(format!("bad flag {x}"))),
                };
                records.push(SkelRecord {
                    cluster_id,
                    center,
                    sk,
                    rd,
                    t,
                    rd_factor,
                    b_rs,
                    b_sr,
                });
            }
            levels.push(FactorLevel {
                tag,
                kind,
                records,
                active_before,
                active_after,
            });
        }
        let terminal_ids = i.ids(n)?;
        let terminal = i.factor(terminal_ids.len())?;
        Ok(Self {
            scheme,
            eps,
            spec,
            n,
            symmetric,
            levels,
            terminal_ids,
            terminal,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory cannot fail");
        buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    /// Size in bytes of the serialized factorization.
    pub fn serialized_size(&self) -> usize {
        let mut c = Counter(0);
        self.write_to(&mut c).expect("counting writer cannot fail");
        c.0
    }
}

struct Counter(usize);

impl Write for Counter {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0 += buf.len();
        Ok(buf.len())
    }

    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}
