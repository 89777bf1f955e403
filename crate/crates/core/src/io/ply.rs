//! PLY vertex reader and writer (ASCII and binary little-endian).

use std::io::Write;
use std::path::Path;

use super::{create_file, read_file, IoError};
use crate::geometry::{Point3, PointCloud, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Scalar::F64 => f64::from_le_bytes([b[0], b[1], b[2], b[3], b[4], b[5], b[6], b[7]]),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    body_offset: usize,
}

fn header_err(msg: impl Into<String>) -> IoError {
    IoError::PlyHeader(msg.into())
}

fn parse_header(bytes: &[u8]) -> Result<Header, IoError> {
    let mut lines = Vec::new();
    let mut pos = 0;
    loop {
        let Some(nl) = bytes[pos..].iter().position(|b| *b == b'\n') else {
            return Err(header_err("missing end_header"));
        };
        let line = std::str::from_utf8(&bytes[pos..pos + nl])
            .map_err(|_| header_err("header is not text"))?
            .trim_end_matches('\r');
        pos += nl + 1;
        if line.trim() == "end_header" {
            break;
        }
        lines.push(line.to_string());
        if lines.len() > 10_000 {
            return Err(header_err("header too long"));
        }
    }
    let mut it = lines.iter();
    if it.next().map(|l| l.trim()) != Some("ply") {
        return Err(header_err("missing `ply` magic"));
    }
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in it {
        let tok: Vec<&str> = line.split_whitespace().collect();
        match tok.as_slice() {
            [] => {}
            ["comment", ..] | ["obj_info", ..] => {}
            ["format", f, _version] => {
                format = Some(match *f {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    "binary_big_endian" => return Err(IoError::PlyLayout("big-endian payload".into())),
                    other => return Err(header_err(format!("unknown format `{other}`"))),
                })
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| header_err(format!("bad element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                });
            }
            ["property", "list", c, i, _name] => {
                let (Some(count), Some(item)) = (Scalar::parse(c), Scalar::parse(i)) else {
                    return Err(header_err(format!("bad list property `{line}`")));
                };
                elements
                    .last_mut()
                    .ok_or_else(|| header_err("property before element"))?
                    .properties
                    .push(Property::List { count, item });
            }
            ["property", ty, name] => {
                let ty = Scalar::parse(ty).ok_or_else(|| header_err(format!("unknown type `{ty}`")))?;
                elements
                    .last_mut()
                    .ok_or_else(|| header_err("property before element"))?
                    .properties
                    .push(Property::Scalar(name.to_string(), ty));
            }
            _ => return Err(header_err(format!("unrecognised line `{line}`"))),
        }
    }
    Ok(Header {
        format: format.ok_or_else(|| header_err("missing format line"))?,
        elements,
        body_offset: pos,
    })
}

/// Column positions of the vertex properties we read.
struct VertexLayout {
    xyz: [usize; 3],
    normals: Option<[usize; 3]>,
}

fn vertex_layout(e: &Element) -> Result<VertexLayout, IoError> {
    let mut names = Vec::new();
    for p in &e.properties {
        match p {
            Property::Scalar(n, _) => names.push(n.as_str()),
            Property::List { .. } => return Err(IoError::PlyLayout("list property in vertex element".into())),
        }
    }
    let find = |n: &str| names.iter().position(|m| *m == n);
    let (Some(x), Some(y), Some(z)) = (find("x"), find("y"), find("z")) else {
        return Err(IoError::PlyLayout("vertex element lacks x, y or z".into()));
    };
    let normals = match (find("nx"), find("ny"), find("nz")) {
        (Some(a), Some(b), Some(c)) => Some([a, b, c]),
        (None, None, None) => None,
        _ => return Err(IoError::PlyLayout("incomplete normal properties".into())),
    };
    Ok(VertexLayout { xyz: [x, y, z], normals })
}

/// Parses a PLY file held in memory; coordinates are multiplied by
/// `scale` (mm per file unit).
pub fn parse_ply(bytes: &[u8], scale: f64) -> Result<PointCloud, IoError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(IoError::Core(crate::error::Error::param("scale", "must be positive")));
    }
    let header = parse_header(bytes)?;
    let vi = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| IoError::PlyLayout("no vertex element".into()))?;
    let layout = vertex_layout(&header.elements[vi])?;
    let body = &bytes[header.body_offset..];
    let rows = match header.format {
        PlyFormat::Ascii => ascii_vertices(body, &header.elements, vi)?,
        PlyFormat::BinaryLittleEndian => binary_vertices(body, &header.elements, vi)?,
    };
    let mut points = Vec::with_capacity(rows.len());
    let mut normals = layout.normals.map(|_| Vec::with_capacity(rows.len()));
    for row in &rows {
        let [x, y, z] = layout.xyz;
        let p = Point3::new(row[x], row[y], row[z]) * scale;
        if !p.iter().all(|c| c.is_finite()) {
            return Err(IoError::PlyValue("non-finite coordinate".into()));
        }
        points.push(p);
        if let (Some(ns), Some([a, b, c])) = (normals.as_mut(), layout.normals) {
            ns.push(Vector3::new(row[a], row[b], row[c]));
        }
    }
    if points.is_empty() {
        return Err(IoError::PlyLayout("vertex element is empty".into()));
    }
    Ok(PointCloud::with_normals(points, normals)?)
}

fn ascii_vertices(body: &[u8], elements: &[Element], vi: usize) -> Result<Vec<Vec<f64>>, IoError> {
    let text = std::str::from_utf8(body).map_err(|_| IoError::PlyValue("ASCII body is not text".into()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    for e in &elements[..vi] {
        for _ in 0..e.count {
            lines
                .next()
                .ok_or_else(|| IoError::PlyTruncated(format!("element `{}` ends early", e.name)))?;
        }
    }
    let n_props = elements[vi].properties.len();
    let mut rows = Vec::with_capacity(elements[vi].count.min(1 << 20));
    for i in 0..elements[vi].count {
        let line = lines
            .next()
            .ok_or_else(|| IoError::PlyTruncated(format!("{} of {} vertices", i, elements[vi].count)))?;
        let vals: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| IoError::PlyValue(format!("`{t}` is not a number"))))
            .collect::<Result<_, _>>()?;
        if vals.len() < n_props {
            return Err(IoError::PlyTruncated(format!("vertex {i} has {} of {n_props} values", vals.len())));
        }
        rows.push(vals);
    }
    Ok(rows)
}

fn binary_vertices(body: &[u8], elements: &[Element], vi: usize) -> Result<Vec<Vec<f64>>, IoError> {
    let mut pos = 0usize;
    let take = |pos: &mut usize, n: usize| -> Result<&[u8], IoError> {
        let end = pos.checked_add(n).filter(|e| *e <= body.len()).ok_or_else(|| {
            IoError::PlyTruncated(format!("need {n} bytes at offset {pos}, {} available", body.len().saturating_sub(*pos)))
        })?;
        let s = &body[*pos..end];
        *pos = end;
        Ok(s)
    };
    for e in &elements[..vi] {
        for _ in 0..e.count {
            for p in &e.properties {
                match p {
                    Property::Scalar(_, t) => {
                        take(&mut pos, t.size())?;
                    }
                    Property::List { count, item } => {
                        let n = count.read_le(take(&mut pos, count.size())?);
                        if !(n >= 0.0) {
                            return Err(IoError::PlyValue("negative list length".into()));
                        }
                        take(&mut pos, n as usize * item.size())?;
                    }
                }
            }
        }
    }
    let types: Vec<Scalar> = elements[vi]
        .properties
        .iter()
        .map(|p| match p {
            Property::Scalar(_, t) => *t,
            Property::List { item, .. } => *item,
        })
        .collect();
    let stride: usize = types.iter().map(|t| t.size()).sum();
    let count = elements[vi].count;
    if count.checked_mul(stride).is_none_or(|need| need > body.len() - pos) {
        return Err(IoError::PlyTruncated(format!(
            "{count} vertices of {stride} bytes need more than the {} bytes present",
            body.len() - pos
        )));
    }
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let mut row = Vec::with_capacity(types.len());
        for t in &types {
            row.push(t.read_le(take(&mut pos, t.size())?));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn load_ply(path: impl AsRef<Path>, scale: f64) -> Result<PointCloud, IoError> {
    parse_ply(&read_file(path.as_ref())?, scale)
}

/// Writes vertices (and normals, if any) as `double` properties, so binary
/// output round-trips bit for bit.
pub fn write_ply(w: &mut impl Write, cloud: &PointCloud, format: PlyFormat) -> Result<(), IoError> {
    let fmt = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    writeln!(w, "ply\nformat {fmt} 1.0\nelement vertex {}", cloud.len())?;
    writeln!(w, "property double x\nproperty double y\nproperty double z")?;
    if cloud.normals().is_some() {
        writeln!(w, "property double nx\nproperty double ny\nproperty double nz")?;
    }
    writeln!(w, "end_header")?;
    for (i, p) in cloud.points().iter().enumerate() {
        let mut vals = vec![p.x, p.y, p.z];
        if let Some(n) = cloud.normals() {
            vals.extend_from_slice(n[i].as_slice());
        }
        match format {
            PlyFormat::Ascii => {
                let line: Vec<String> = vals.iter().map(|v| v.to_string()).collect();
                writeln!(w, "{}", line.join(" "))?;
            }
            PlyFormat::BinaryLittleEndian => {
                for v in vals {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

pub fn save_ply(path: impl AsRef<Path>, cloud: &PointCloud, format: PlyFormat) -> Result<(), IoError> {
    let mut f = create_file(path.as_ref())?;
    write_ply(&mut f, cloud, format)?;
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_vertex_ascii() {
        let src = b"ply\nformat ascii 1.0\ncomment hand written\nelement vertex 3\nproperty float x\nproperty float y\nproperty float z\nelement face 1\nproperty list uchar int vertex_indices\nend_header\n0 0 0\n1 0 0\n0 1 0.5\n3 0 1 2\n";
        let c = parse_ply(src, 1.0).unwrap();
        assert_eq!(c.points(), &[Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.5)]);
        let m = parse_ply(src, 1000.0).unwrap();
        assert_eq!(m.points()[1].x, 1000.0);
    }

    #[test]
    fn binary_float32_with_leading_element() {
        let mut b = b"ply\nformat binary_little_endian 1.0\nelement camera 1\nproperty uchar id\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nend_header\n".to_vec();
        b.push(7);
        for v in [[1.5f32, 2.0, 3.0], [-1.0, 0.25, 8.0]] {
            for c in v {
                b.extend_from_slice(&c.to_le_bytes());
            }
            b.push(255);
        }
        let c = parse_ply(&b, 1.0).unwrap();
        assert_eq!(c.points()[1], Point3::new(-1.0, 0.25, 8.0));
    }

    #[test]
    fn errors_are_distinct() {
        assert!(matches!(parse_ply(b"hello\nend_header\n", 1.0), Err(IoError::PlyHeader(_))));
        assert!(matches!(parse_ply(b"ply\nformat ascii 1.0\n", 1.0), Err(IoError::PlyHeader(_))));
        assert!(matches!(
            parse_ply(b"ply\nformat binary_big_endian 1.0\nelement vertex 1\nproperty float x\nend_header\n", 1.0),
            Err(IoError::PlyLayout(_))
        ));
        assert!(matches!(
            parse_ply(b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nend_header\n1 2\n", 1.0),
            Err(IoError::PlyLayout(_))
        ));
        assert!(matches!(
            parse_ply(b"ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 2 3\n", 1.0),
            Err(IoError::PlyTruncated(_))
        ));
        assert!(matches!(
            parse_ply(b"ply\nformat binary_little_endian 1.0\nelement vertex 1\nproperty double x\nproperty double y\nproperty double z\nend_header\n\x00\x00", 1.0),
            Err(IoError::PlyTruncated(_))
        ));
        assert!(matches!(
            parse_ply(b"ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n1 a 3\n", 1.0),
            Err(IoError::PlyValue(_))
        ));
    }

    #[test]
    fn round_trips() {
        let pts = vec![Point3::new(0.1, -2.0 / 3.0, 1e-9), Point3::new(123.456, 7.0, -0.5)];
        let normals = vec![Vector3::z(), Vector3::x()];
        let cloud = PointCloud::with_normals(pts, Some(normals)).unwrap();
        for f in [PlyFormat::Ascii, PlyFormat::BinaryLittleEndian] {
            let mut buf = Vec::new();
            write_ply(&mut buf, &cloud, f).unwrap();
            assert_eq!(parse_ply(&buf, 1.0).unwrap(), cloud);
        }
    }
}
