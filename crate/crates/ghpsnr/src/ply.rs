//! PLY 1.0 vertex clouds, ASCII and binary little endian.
//!
//! Only a single `vertex` element with scalar properties is accepted. Faces,
//! list properties and big-endian payloads are rejected. Coordinates are
//! widened to `f64` on load and always written as `double`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ghpsnr_core::cloud::normalize;
use ghpsnr_core::{Point3, PointCloud};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    #[default]
    Ascii,
    BinaryLittleEndian,
}

impl Encoding {
    fn header_name(self) -> &'static str {
        match self {
            Encoding::Ascii => "ascii",
            Encoding::BinaryLittleEndian => "binary_little_endian",
        }
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ascii" => Ok(Encoding::Ascii),
            "binary" | "binary_little_endian" => Ok(Encoding::BinaryLittleEndian),
            other => Err(format!("unknown PLY encoding `{other}`")),
        }
    }
}

/// Scalar property types of PLY 1.0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarType {
    Char,
    UChar,
    Short,
    UShort,
    Int,
    UInt,
    Float,
    Double,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => ScalarType::Char,
            "uchar" | "uint8" => ScalarType::UChar,
            "short" | "int16" => ScalarType::Short,
            "ushort" | "uint16" => ScalarType::UShort,
            "int" | "int32" => ScalarType::Int,
            "uint" | "uint32" => ScalarType::UInt,
            "float" | "float32" => ScalarType::Float,
            "double" | "float64" => ScalarType::Double,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            ScalarType::Char => "char",
            ScalarType::UChar => "uchar",
            ScalarType::Short => "short",
            ScalarType::UShort => "ushort",
            ScalarType::Int => "int",
            ScalarType::UInt => "uint",
            ScalarType::Float => "float",
            ScalarType::Double => "double",
        }
    }

    fn size(self) -> usize {
        match self {
            ScalarType::Char | ScalarType::UChar => 1,
            ScalarType::Short | ScalarType::UShort => 2,
            ScalarType::Int | ScalarType::UInt | ScalarType::Float => 4,
            ScalarType::Double => 8,
        }
    }

    fn is_float(self) -> bool {
        matches!(self, ScalarType::Float | ScalarType::Double)
    }

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            ScalarType::Char => f64::from(b[0] as i8),
            ScalarType::UChar => f64::from(b[0]),
            ScalarType::Short => f64::from(i16::from_le_bytes([b[0], b[1]])),
            ScalarType::UShort => f64::from(u16::from_le_bytes([b[0], b[1]])),
            ScalarType::Int => f64::from(i32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            ScalarType::UInt => f64::from(u32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            ScalarType::Float => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            ScalarType::Double => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub name: String,
    pub ty: ScalarType,
}

/// Parsed header of a vertex-only PLY file.
#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub encoding: Encoding,
    pub vertex_count: usize,
    pub properties: Vec<Property>,
    pub comments: Vec<String>,
}

impl Header {
    pub fn property(&self, name: &str) -> Option<usize> {
        self.properties.iter().position(|p| p.name == name)
    }

    /// Bit depth announced with a `comment precision_bits N` line.
    pub fn precision_bits(&self) -> Option<u32> {
        self.comments.iter().find_map(|c| {
            let mut it = c.split_whitespace();
            (it.next() == Some("precision_bits"))
                .then(|| it.next()?.parse().ok())
                .flatten()
        })
    }
}

/// All vertex properties as `f64` columns, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexTable {
    pub header: Header,
    pub rows: Vec<Vec<f64>>,
}

impl VertexTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.property(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

fn ply_err(msg: impl Into<String>) -> Error {
    Error::Ply(msg.into())
}

fn read_header<R: BufRead>(reader: &mut R) -> Result<Header> {
    let mut line = String::new();
    let mut next_line = |reader: &mut R| -> Result<String> {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| ply_err(format!("reading header: {e}")))?;
        if n == 0 {
            return Err(ply_err("unexpected end of file in header"));
        }
        Ok(line.trim_end_matches(['\r', '\n']).to_string())
    };

    if next_line(reader)?.trim() != "ply" {
        return Err(ply_err("missing `ply` magic"));
    }
    let mut encoding = None;
    let mut vertex_count = None;
    let mut properties = Vec::new();
    let mut comments = Vec::new();
    loop {
        let l = next_line(reader)?;
        let mut words = l.split_whitespace();
        match words.next() {
            None => continue,
            Some("comment") | Some("obj_info") => {
                comments.push(l.trim_start().split_once(' ').map_or("", |x| x.1).trim().into())
            }
            Some("format") => {
                let (fmt, version) = (words.next(), words.next());
                if version != Some("1.0") {
                    return Err(ply_err(format!("unsupported format line `{l}`")));
                }
                encoding = Some(match fmt {
                    Some("ascii") => Encoding::Ascii,
                    Some("binary_little_endian") => Encoding::BinaryLittleEndian,
                    Some(other) => return Err(ply_err(format!("unsupported format `{other}`"))),
                    None => return Err(ply_err("empty format line")),
                });
            }
            Some("element") => {
                let name = words.next();
                if name != Some("vertex") || vertex_count.is_some() {
                    return Err(ply_err(format!(
                        "unsupported element `{}`; only one `vertex` element is accepted",
                        name.unwrap_or("")
                    )));
                }
                let count = words
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| ply_err("bad vertex count"))?;
                vertex_count = Some(count);
            }
            Some("property") => {
                if vertex_count.is_none() {
                    return Err(ply_err("property before element"));
                }
                let ty = words.next().ok_or_else(|| ply_err("property without type"))?;
                if ty == "list" {
                    return Err(ply_err("list properties are not supported"));
                }
                let ty = ScalarType::parse(ty)
                    .ok_or_else(|| ply_err(format!("unsupported property type `{ty}`")))?;
                let name = words.next().ok_or_else(|| ply_err("property without name"))?;
                if properties.iter().any(|p: &Property| p.name == name) {
                    return Err(ply_err(format!("duplicate property `{name}`")));
                }
                properties.push(Property {
                    name: name.into(),
                    ty,
                });
            }
            Some("end_header") => break,
            Some(other) => return Err(ply_err(format!("unexpected header keyword `{other}`"))),
        }
    }
    Ok(Header {
        encoding: encoding.ok_or_else(|| ply_err("missing format line"))?,
        vertex_count: vertex_count.ok_or_else(|| ply_err("missing vertex element"))?,
        properties,
        comments,
    })
}

/// Reads every vertex property of a PLY stream.
pub fn read_vertex_table<R: BufRead>(mut reader: R) -> Result<VertexTable> {
    let header = read_header(&mut reader)?;
    let width = header.properties.len();
    let mut rows = Vec::with_capacity(header.vertex_count);
    match header.encoding {
        Encoding::Ascii => {
            let mut body = String::new();
            reader
                .read_to_string(&mut body)
                .map_err(|e| ply_err(format!("reading body: {e}")))?;
            let mut tokens = body.split_whitespace();
            for v in 0..header.vertex_count {
                let mut row = Vec::with_capacity(width);
                for p in &header.properties {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| ply_err(format!("vertex {v}: truncated data")))?;
                    let bad = || ply_err(format!("vertex {v}: bad value `{tok}` for `{}`", p.name));
                    // float properties are stored at single precision
                    let value: f64 = match p.ty {
                        ScalarType::Float => f64::from(tok.parse::<f32>().map_err(|_| bad())?),
                        _ => tok.parse().map_err(|_| bad())?,
                    };
                    if !p.ty.is_float() && value.fract() != 0.0 {
                        return Err(ply_err(format!(
                            "vertex {v}: non-integer value for {} `{}`",
                            p.ty.name(),
                            p.name
                        )));
                    }
                    row.push(value);
                }
                rows.push(row);
            }
        }
        Encoding::BinaryLittleEndian => {
            let stride: usize = header.properties.iter().map(|p| p.ty.size()).sum();
            let mut buf = vec![0u8; stride];
            for v in 0..header.vertex_count {
                reader
                    .read_exact(&mut buf)
                    .map_err(|_| ply_err(format!("vertex {v}: truncated data")))?;
                let mut offset = 0;
                let row = header
                    .properties
                    .iter()
                    .map(|p| {
                        let value = p.ty.decode_le(&buf[offset..]);
                        offset += p.ty.size();
                        value
                    })
                    .collect();
                rows.push(row);
            }
        }
    }
    Ok(VertexTable { header, rows })
}

/// Parses a point cloud from a PLY stream.
///
/// `x`, `y`, `z` must be `float` or `double`. If `nx`, `ny`, `nz` are all
/// present they are renormalized to unit length; a zero normal is an error.
pub fn read_ply<R: BufRead>(reader: R, name: &str) -> Result<PointCloud> {
    let table = read_vertex_table(reader)?;
    let header = &table.header;
    if header.vertex_count == 0 {
        return Err(ply_err("file has zero vertices"));
    }
    let column = |n: &str| -> Result<Option<usize>> {
        match header.property(n) {
            None => Ok(None),
            Some(i) if header.properties[i].ty.is_float() => Ok(Some(i)),
            Some(i) => Err(ply_err(format!(
                "property `{n}` has unsupported type `{}`; expected float or double",
                header.properties[i].ty.name()
            ))),
        }
    };
    let mut xyz = [0usize; 3];
    for (slot, n) in xyz.iter_mut().zip(["x", "y", "z"]) {
        *slot = column(n)?.ok_or_else(|| ply_err(format!("missing property `{n}`")))?;
    }
    let normal_cols = [column("nx")?, column("ny")?, column("nz")?];

    let points: Vec<Point3> = table.rows.iter().map(|r| xyz.map(|i| r[i])).collect();
    let mut cloud = PointCloud::new(name, points)?.with_precision_bits(header.precision_bits());
    if let [Some(a), Some(b), Some(c)] = normal_cols {
        let normals = table
            .rows
            .iter()
            .enumerate()
            .map(|(index, r)| {
                normalize([r[a], r[b], r[c]])
                    .ok_or(Error::Core(ghpsnr_core::Error::ZeroNormal { index }))
            })
            .collect::<Result<Vec<_>>>()?;
        cloud = cloud.with_normals(normals)?;
    } else if normal_cols.iter().any(Option::is_some) {
        return Err(ply_err("incomplete normal: need all of nx, ny, nz"));
    }
    Ok(cloud)
}

pub fn load_ply(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_ply(BufReader::new(file), &name)
}

/// An extra per-vertex column written after the coordinates.
pub(crate) struct ExtraColumn<'a> {
    pub name: &'a str,
    pub ty: ScalarType,
    pub values: &'a [f64],
}

pub(crate) fn write_vertices<W: Write>(
    mut w: W,
    cloud: &PointCloud,
    extras: &[ExtraColumn<'_>],
    encoding: Encoding,
) -> std::io::Result<()> {
    let mut cols: Vec<(&str, ScalarType)> = vec![
        ("x", ScalarType::Double),
        ("y", ScalarType::Double),
        ("z", ScalarType::Double),
    ];
    if cloud.normals().is_some() {
        cols.extend([
            ("nx", ScalarType::Double),
            ("ny", ScalarType::Double),
            ("nz", ScalarType::Double),
        ]);
    }
    cols.extend(extras.iter().map(|e| (e.name, e.ty)));

    writeln!(w, "ply")?;
    writeln!(w, "format {} 1.0", encoding.header_name())?;
    if let Some(bits) = cloud.precision_bits() {
        writeln!(w, "comment precision_bits {bits}")?;
    }
    writeln!(w, "element vertex {}", cloud.len())?;
    for (name, ty) in &cols {
        writeln!(w, "property {} {name}", ty.name())?;
    }
    writeln!(w, "end_header")?;

    let normals = cloud.normals();
    for (i, p) in cloud.points().iter().enumerate() {
        let mut row: Vec<f64> = p.to_vec();
        if let Some(n) = normals {
            row.extend_from_slice(&n[i]);
        }
        row.extend(extras.iter().map(|e| e.values[i]));
        match encoding {
            Encoding::Ascii => {
                let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
            Encoding::BinaryLittleEndian => {
                for (v, (_, ty)) in row.iter().zip(&cols) {
                    match ty {
                        ScalarType::UChar => w.write_all(&[*v as u8])?,
                        ScalarType::Double => w.write_all(&v.to_le_bytes())?,
                        ScalarType::Float => w.write_all(&(*v as f32).to_le_bytes())?,
                        other => unreachable!("writer never emits {other:?}"),
                    }
                }
            }
        }
    }
    w.flush()
}

/// Writes `cloud` as PLY; coordinates and normals survive a reload bit-exactly.
pub fn write_ply<W: Write>(w: W, cloud: &PointCloud, encoding: Encoding) -> std::io::Result<()> {
    write_vertices(w, cloud, &[], encoding)
}

pub fn save_ply(cloud: &PointCloud, path: impl AsRef<Path>, encoding: Encoding) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_ply(BufWriter::new(file), cloud, encoding).map_err(|e| Error::io(path, e))
}
