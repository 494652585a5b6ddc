use std::io::{BufRead, Write};

use super::{CloudError, Point3, PointCloud};

const HINT_KEY: &str = "res_pc";

fn parse_coord(token: &str, line: usize) -> Result<f64, CloudError> {
    let v: f64 = token
        .parse()
        .map_err(|_| CloudError::parse(line, format!("invalid number {token:?}")))?;
    if !v.is_finite() {
        return Err(CloudError::parse(
            line,
            format!("non-finite coordinate {token:?}"),
        ));
    }
    Ok(v)
}

/// Reads a `res_pc <value>` hint out of a comment body.
fn parse_hint(comment: &str) -> Option<f64> {
    let mut it = comment.split_whitespace();
    if it.next()? != HINT_KEY {
        return None;
    }
    it.next()?
        .parse()
        .ok()
        .filter(|v: &f64| *v > 0.0 && v.is_finite())
}

pub(super) fn read_xyz(reader: impl BufRead) -> Result<PointCloud, CloudError> {
    let mut cloud = PointCloud::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let (data, comment) = match line.split_once('#') {
            Some((d, c)) => (d, Some(c)),
            None => (line.as_str(), None),
        };
        if let Some(hint) = comment.and_then(parse_hint) {
            cloud.resolution_hint = Some(hint);
        }
        let tokens: Vec<&str> = data.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() < 3 {
            return Err(CloudError::parse(lineno, "expected three coordinates"));
        }
        cloud.points.push(Point3::new(
            parse_coord(tokens[0], lineno)?,
            parse_coord(tokens[1], lineno)?,
            parse_coord(tokens[2], lineno)?,
        ));
    }
    Ok(cloud)
}

pub(super) fn write_xyz(out: &mut impl Write, cloud: &PointCloud) -> std::io::Result<()> {
    if let Some(res) = cloud.resolution_hint {
        writeln!(out, "# {HINT_KEY} {res}")?;
    }
    for p in &cloud.points {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}

#[derive(Debug)]
enum PlyProperty {
    Scalar(String),
    List,
}

#[derive(Debug)]
struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<PlyProperty>,
}

pub(super) fn read_ply(reader: impl BufRead) -> Result<PointCloud, CloudError> {
    let mut lines = reader
        .lines()
        .enumerate()
        .map(|(i, l)| l.map(|l| (i + 1, l)));
    let mut next_line =
        move || -> Result<Option<(usize, String)>, CloudError> { Ok(lines.next().transpose()?) };

    let mut cloud = PointCloud::default();
    match next_line()? {
        Some((_, l)) if l.trim() == "ply" => {}
        Some((n, _)) => return Err(CloudError::parse(n, "missing 'ply' magic")),
        None => return Err(CloudError::Empty),
    }

    let mut elements: Vec<PlyElement> = Vec::new();
    loop {
        let Some((n, line)) = next_line()? else {
            return Err(CloudError::parse(0, "unterminated PLY header"));
        };
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("format") => match tok.next() {
                Some("ascii") => {}
                Some(other) => return Err(CloudError::Unsupported(format!("ply {other}"))),
                None => return Err(CloudError::parse(n, "format line without encoding")),
            },
            Some("comment") => {
                let rest = line.trim_start().trim_start_matches("comment");
                if let Some(hint) = parse_hint(rest) {
                    cloud.resolution_hint = Some(hint);
                }
            }
            Some("obj_info") | None => {}
            Some("element") => {
                let name = tok
                    .next()
                    .ok_or_else(|| CloudError::parse(n, "element without name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| CloudError::parse(n, "element without count"))?;
                elements.push(PlyElement {
                    name: name.to_owned(),
                    count,
                    properties: Vec::new(),
                });
            }
            Some("property") => {
                let element = elements
                    .last_mut()
                    .ok_or_else(|| CloudError::parse(n, "property before element"))?;
                let kind = tok
                    .next()
                    .ok_or_else(|| CloudError::parse(n, "property without type"))?;
                if kind == "list" {
                    element.properties.push(PlyProperty::List);
                } else {
                    let name = tok
                        .next()
                        .ok_or_else(|| CloudError::parse(n, "property without name"))?;
                    element
                        .properties
                        .push(PlyProperty::Scalar(name.to_owned()));
                }
            }
            Some("end_header") => break,
            Some(other) => {
                return Err(CloudError::parse(
                    n,
                    format!("unknown header keyword {other:?}"),
                ))
            }
        }
    }

    for element in &elements {
        let is_vertex = element.name == "vertex";
        let mut axes = [None; 3];
        if is_vertex {
            for (col, prop) in element.properties.iter().enumerate() {
                if let PlyProperty::Scalar(name) = prop {
                    match name.as_str() {
                        "x" => axes[0] = Some(col),
                        "y" => axes[1] = Some(col),
                        "z" => axes[2] = Some(col),
                        _ => {}
                    }
                }
            }
            if axes.iter().any(Option::is_none) {
                return Err(CloudError::parse(
                    0,
                    "vertex element lacks x/y/z properties",
                ));
            }
            if element
                .properties
                .iter()
                .any(|p| matches!(p, PlyProperty::List))
            {
                return Err(CloudError::Unsupported(
                    "list properties on vertices".into(),
                ));
            }
        }
        let mut read = 0;
        while read < element.count {
            let Some((n, line)) = next_line()? else {
                return Err(CloudError::parse(
                    0,
                    format!("expected {} {} records", element.count, element.name),
                ));
            };
            if line.trim().is_empty() {
                continue;
            }
            read += 1;
            if !is_vertex {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != element.properties.len() {
                return Err(CloudError::parse(
                    n,
                    format!(
                        "expected {} values, found {}",
                        element.properties.len(),
                        tokens.len()
                    ),
                ));
            }
            let coord = |axis: usize| parse_coord(tokens[axes[axis].unwrap()], n);
            cloud
                .points
                .push(Point3::new(coord(0)?, coord(1)?, coord(2)?));
        }
    }
    Ok(cloud)
}

pub(super) fn write_ply(out: &mut impl Write, cloud: &PointCloud) -> std::io::Result<()> {
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    if let Some(res) = cloud.resolution_hint {
        writeln!(out, "comment {HINT_KEY} {res}")?;
    }
    writeln!(out, "element vertex {}", cloud.points.len())?;
    for axis in ["x", "y", "z"] {
        writeln!(out, "property double {axis}")?;
    }
    writeln!(out, "end_header")?;
    for p in &cloud.points {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}

pub(super) fn read_pcd(reader: impl BufRead) -> Result<PointCloud, CloudError> {
    let mut cloud = PointCloud::default();
    let mut fields: Vec<String> = Vec::new();
    let mut counts: Vec<usize> = Vec::new();
    let mut declared: Option<usize> = None;
    let mut in_data = false;
    let mut columns = [0usize; 3];
    let mut width = 0usize;

    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        let trimmed = line.trim();
        if !in_data {
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(hint) = parse_hint(comment) {
                    cloud.resolution_hint = Some(hint);
                }
                continue;
            }
            let mut tok = trimmed.split_whitespace();
            let key = tok.next().unwrap_or_default().to_ascii_uppercase();
            let rest: Vec<&str> = tok.collect();
            match key.as_str() {
                "FIELDS" => fields = rest.iter().map(|s| s.to_string()).collect(),
                "COUNT" => {
                    counts = rest
                        .iter()
                        .map(|c| c.parse().map_err(|_| CloudError::parse(n, "invalid COUNT")))
                        .collect::<Result<_, _>>()?
                }
                "POINTS" => {
                    declared = Some(
                        rest.first()
                            .and_then(|c| c.parse().ok())
                            .ok_or_else(|| CloudError::parse(n, "invalid POINTS"))?,
                    )
                }
                "DATA" => {
                    match rest.first().copied() {
                        Some("ascii") => {}
                        Some(other) => return Err(CloudError::Unsupported(format!("pcd {other}"))),
                        None => return Err(CloudError::parse(n, "DATA without encoding")),
                    }
                    if counts.is_empty() {
                        counts = vec![1; fields.len()];
                    }
                    if counts.len() != fields.len() {
                        return Err(CloudError::parse(n, "COUNT and FIELDS disagree"));
                    }
                    let mut offset = 0;
                    let mut found = [false; 3];
                    for (field, count) in fields.iter().zip(&counts) {
                        let axis = match field.as_str() {
                            "x" => Some(0),
                            "y" => Some(1),
                            "z" => Some(2),
                            _ => None,
                        };
                        if let Some(a) = axis {
                            columns[a] = offset;
                            found[a] = true;
                        }
                        offset += count;
                    }
                    if found.iter().any(|f| !f) {
                        return Err(CloudError::parse(n, "FIELDS lacks x/y/z"));
                    }
                    width = offset;
                    in_data = true;
                }
                "VERSION" | "SIZE" | "TYPE" | "WIDTH" | "HEIGHT" | "VIEWPOINT" => {}
                other => {
                    return Err(CloudError::parse(
                        n,
                        format!("unknown header keyword {other:?}"),
                    ))
                }
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != width {
            return Err(CloudError::parse(
                n,
                format!("expected {width} values, found {}", tokens.len()),
            ));
        }
        let raw = |axis: usize| -> Result<f64, CloudError> {
            tokens[columns[axis]].parse::<f64>().map_err(|_| {
                CloudError::parse(n, format!("invalid number {:?}", tokens[columns[axis]]))
            })
        };
        let (x, y, z) = (raw(0)?, raw(1)?, raw(2)?);
        // Organized clouds mark missing returns with NaN.
        if x.is_nan() || y.is_nan() || z.is_nan() {
            continue;
        }
        if !(x.is_finite() && y.is_finite() && z.is_finite()) {
            return Err(CloudError::parse(n, "non-finite coordinate"));
        }
        cloud.points.push(Point3::new(x, y, z));
    }
    if !in_data {
        return Err(CloudError::parse(0, "PCD header has no DATA line"));
    }
    let _ = declared;
    Ok(cloud)
}

pub(super) fn write_pcd(out: &mut impl Write, cloud: &PointCloud) -> std::io::Result<()> {
    writeln!(out, "# .PCD v0.7 - Point Cloud Data file format")?;
    if let Some(res) = cloud.resolution_hint {
        writeln!(out, "# {HINT_KEY} {res}")?;
    }
    let n = cloud.points.len();
    writeln!(out, "VERSION 0.7")?;
    writeln!(out, "FIELDS x y z")?;
    writeln!(out, "SIZE 8 8 8")?;
    writeln!(out, "TYPE F F F")?;
    writeln!(out, "COUNT 1 1 1")?;
    writeln!(out, "WIDTH {n}")?;
    writeln!(out, "HEIGHT 1")?;
    writeln!(out, "VIEWPOINT 0 0 0 1 0 0 0")?;
    writeln!(out, "POINTS {n}")?;
    writeln!(out, "DATA ascii")?;
    for p in &cloud.points {
        writeln!(out, "{} {} {}", p.x, p.y, p.z)?;
    }
    Ok(())
}
