//! AMF1: the on-disk field format.
//!
//! Layout, in order:
//! 1. magic bytes `b"AMF1\n"`;
//! 2. a UTF-8 JSON header
//!    `{"n":[nx,ny,nz],"h":[hx,hy,hz],"origin":[x0,y0,z0],"kind":K,"components":k}`
//!    with `K` one of `"scalar_real" | "scalar_complex" | "vector_real" |
//!    "spinor"`;
//! 3. a single `0x00` terminator byte;
//! 4. the payload: little-endian IEEE-754 f64 values in node order
//!    (x fastest, z slowest), component slowest, complex numbers as
//!    `(re, im)` pairs.
//!
//! Writes are byte-deterministic (fixed key order, shortest-roundtrip
//! float formatting), which the CLI relies on for bitwise-reproducible
//! reruns. Loads validate magic, header, and exact payload length.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ComplexScalarField, ScalarField, SpinorField, VectorField};
use crate::grid::Grid3;

const MAGIC: &[u8; 5] = b"AMF1\n";

/// Field kinds the format can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmfKind {
    ScalarReal,
    ScalarComplex,
    VectorReal,
    Spinor,
}

impl AmfKind {
    fn components(self) -> usize {
        match self {
            AmfKind::ScalarReal | AmfKind::ScalarComplex => 1,
            AmfKind::VectorReal => 3,
            AmfKind::Spinor => 4,
        }
    }

    fn floats_per_node_component(self) -> usize {
        match self {
            AmfKind::ScalarReal | AmfKind::VectorReal => 1,
            AmfKind::ScalarComplex | AmfKind::Spinor => 2,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    n: [usize; 3],
    h: [f64; 3],
    origin: [f64; 3],
    kind: AmfKind,
    components: usize,
}

/// Any field the format can hold.
#[derive(Debug, Clone)]
pub enum AnyField {
    Scalar(ScalarField),
    ComplexScalar(ComplexScalarField),
    Vector(VectorField),
    Spinor(SpinorField),
}

impl AnyField {
    pub fn kind(&self) -> AmfKind {
        match self {
            AnyField::Scalar(_) => AmfKind::ScalarReal,
            AnyField::ComplexScalar(_) => AmfKind::ScalarComplex,
            AnyField::Vector(_) => AmfKind::VectorReal,
            AnyField::Spinor(_) => AmfKind::Spinor,
        }
    }

    pub fn grid(&self) -> &Grid3 {
        match self {
            AnyField::Scalar(f) => f.grid(),
            AnyField::ComplexScalar(f) => f.grid(),
            AnyField::Vector(f) => f.grid(),
            AnyField::Spinor(f) => f.grid(),
        }
    }
}

fn write_f64s<W: Write>(w: &mut W, vals: impl Iterator<Item = f64>) -> Result<()> {
    for v in vals {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Save any field to `path`.
pub fn save(path: &Path, field: &AnyField) -> Result<()> {
    let grid = field.grid();
    let kind = field.kind();
    let header = Header {
        n: grid.n(),
        h: grid.h(),
        origin: grid.origin(),
        kind,
        components: kind.components(),
    };
    let mut w = BufWriter::with_capacity(1 << 20, File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&serde_json::to_vec(&header)?)?;
    w.write_all(&[0u8])?;
    match field {
        AnyField::Scalar(f) => write_f64s(&mut w, f.data().iter().copied())?,
        AnyField::ComplexScalar(f) => {
            write_f64s(&mut w, f.data().iter().flat_map(|z| [z.re, z.im]))?
        }
        AnyField::Vector(f) => {
            for c in 0..3 {
                write_f64s(&mut w, f.comp(c).iter().copied())?;
            }
        }
        AnyField::Spinor(f) => {
            for c in 0..4 {
                write_f64s(&mut w, f.comp(c).iter().flat_map(|z| [z.re, z.im]))?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_header<R: Read>(r: &mut R, path: &Path) -> Result<Header> {
    let mut magic = [0u8; 5];
    r.read_exact(&mut magic)
        .map_err(|e| Error::Format(format!("{}: too short for magic: {e}", path.display())))?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "{}: bad magic {:?} (not an AMF1 file)",
            path.display(),
            magic
        )));
    }
    let mut header_bytes = Vec::with_capacity(256);
    loop {
        let mut b = [0u8; 1];
        r.read_exact(&mut b).map_err(|e| {
            Error::Format(format!(
                "{}: header not terminated by 0x00: {e}",
                path.display()
            ))
        })?;
        if b[0] == 0 {
            break;
        }
        header_bytes.push(b[0]);
        if header_bytes.len() > 1 << 16 {
            return Err(Error::Format(format!(
                "{}: header exceeds 64 KiB without terminator",
                path.display()
            )));
        }
    }
    let header: Header = serde_json::from_slice(&header_bytes)
        .map_err(|e| Error::Format(format!("{}: invalid header JSON: {e}", path.display())))?;
    if header.components != header.kind.components() {
        return Err(Error::Format(format!(
            "{}: kind {:?} requires {} components, header claims {}",
            path.display(),
            header.kind,
            header.kind.components(),
            header.components
        )));
    }
    Ok(header)
}

fn read_f64s<R: Read>(r: &mut R, count: usize, path: &Path) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes).map_err(|e| {
        Error::Format(format!(
            "{}: payload truncated (expected {count} f64 values): {e}",
            path.display()
        ))
    })?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk is 8 bytes")))
        .collect())
}

fn complex_from_pairs(vals: Vec<f64>) -> Vec<Complex64> {
    vals.chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect()
}

/// Load any field from `path`.
pub fn load(path: &Path) -> Result<AnyField> {
    let mut r = BufReader::with_capacity(1 << 20, File::open(path)?);
    let header = read_header(&mut r, path)?;
    let grid = Grid3::new(header.n, header.h, header.origin)?;
    let per_comp = grid.len() * header.kind.floats_per_node_component();
    let field = match header.kind {
        AmfKind::ScalarReal => {
            AnyField::Scalar(ScalarField::from_vec(grid, read_f64s(&mut r, per_comp, path)?)?)
        }
        AmfKind::ScalarComplex => AnyField::ComplexScalar(ComplexScalarField::from_vec(
            grid,
            complex_from_pairs(read_f64s(&mut r, per_comp, path)?),
        )?),
        AmfKind::VectorReal => {
            let mut comps = [Vec::new(), Vec::new(), Vec::new()];
            for comp in comps.iter_mut() {
                *comp = read_f64s(&mut r, per_comp, path)?;
            }
            AnyField::Vector(VectorField::from_components(grid, comps)?)
        }
        AmfKind::Spinor => {
            let mut comps = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
            for comp in comps.iter_mut() {
                *comp = complex_from_pairs(read_f64s(&mut r, per_comp, path)?);
            }
            AnyField::Spinor(SpinorField::from_components(grid, comps)?)
        }
    };
    // Trailing garbage means the file was not produced by this writer.
    let mut probe = [0u8; 1];
    match r.read(&mut probe)? {
        0 => Ok(field),
        _ => Err(Error::Format(format!(
            "{}: trailing bytes after payload",
            path.display()
        ))),
    }
}

/// Read only the grid and kind, without touching the payload.
pub fn peek(path: &Path) -> Result<(Grid3, AmfKind)> {
    let mut r = BufReader::new(File::open(path)?);
    let header = read_header(&mut r, path)?;
    Ok((Grid3::new(header.n, header.h, header.origin)?, header.kind))
}

/// Load a spinor, erroring if the file holds anything else.
pub fn load_spinor(path: &Path) -> Result<SpinorField> {
    match load(path)? {
        AnyField::Spinor(s) => Ok(s),
        other => Err(Error::Format(format!(
            "{}: expected spinor, found {:?}",
            path.display(),
            other.kind()
        ))),
    }
}

/// Load a real scalar, erroring if the file holds anything else.
pub fn load_scalar(path: &Path) -> Result<ScalarField> {
    match load(path)? {
        AnyField::Scalar(s) => Ok(s),
        other => Err(Error::Format(format!(
            "{}: expected scalar_real, found {:?}",
            path.display(),
            other.kind()
        ))),
    }
}

/// Load a real vector field, erroring if the file holds anything else.
pub fn load_vector(path: &Path) -> Result<VectorField> {
    match load(path)? {
        AnyField::Vector(v) => Ok(v),
        other => Err(Error::Format(format!(
            "{}: expected vector_real, found {:?}",
            path.display(),
            other.kind()
        ))),
    }
}
