//! Pose lists: one `object_id r00 r01 r02 tx r10 r11 r12 ty r20 r21 r22 tz`
//! record per line. Blank lines and `#` comments are skipped.

use std::io::Write;
use std::path::Path;

use super::{create_file, read_file, IoError};
use crate::geometry::RigidTransform;

#[derive(Debug, Clone, PartialEq)]
pub struct PoseRecord {
    pub object_id: String,
    pub pose: RigidTransform,
}

pub fn parse_poses(text: &str) -> Result<Vec<PoseRecord>, IoError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let err = |reason: String| IoError::PoseLine { line: line_no, reason };
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let tok: Vec<&str> = body.split_whitespace().collect();
        if tok.len() != 13 {
            return Err(err(format!("expected an id and 12 numbers, found {} fields", tok.len())));
        }
        let mut v = [0.0; 12];
        for (slot, t) in v.iter_mut().zip(&tok[1..]) {
            *slot = t.parse().map_err(|_| err(format!("`{t}` is not a number")))?;
        }
        let pose = RigidTransform::from_row_major(&v).map_err(|e| err(e.to_string()))?;
        out.push(PoseRecord {
            object_id: tok[0].to_string(),
            pose,
        });
    }
    Ok(out)
}

pub fn load_poses(path: impl AsRef<Path>) -> Result<Vec<PoseRecord>, IoError> {
    let bytes = read_file(path.as_ref())?;
    let text = std::str::from_utf8(&bytes).map_err(|_| IoError::PoseLine {
        line: 0,
        reason: "file is not UTF-8".into(),
    })?;
    parse_poses(text)
}

pub fn save_poses(path: impl AsRef<Path>, poses: &[PoseRecord]) -> Result<(), IoError> {
    let mut f = create_file(path.as_ref())?;
    for p in poses {
        if p.object_id.is_empty() || p.object_id.contains(char::is_whitespace) || p.object_id.contains('#') {
            return Err(IoError::PoseLine {
                line: 0,
                reason: format!("object id `{}` cannot be written", p.object_id),
            });
        }
        let nums: Vec<String> = p.pose.to_row_major().iter().map(|v| v.to_string()).collect();
        writeln!(f, "{} {}", p.object_id, nums.join(" "))?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vector3;

    #[test]
    fn parse_and_reject() {
        let ok = parse_poses("# header\n\nduck 1 0 0 10 0 1 0 20 0 0 1 30  # trailing\n").unwrap();
        assert_eq!(ok.len(), 1);
        assert_eq!(ok[0].object_id, "duck");
        assert_eq!(*ok[0].pose.translation(), Vector3::new(10.0, 20.0, 30.0));
        assert!(matches!(parse_poses("a 1 2 3"), Err(IoError::PoseLine { line: 1, .. })));
        assert!(matches!(
            parse_poses("\na 2 0 0 0 0 1 0 0 0 0 1 0"),
            Err(IoError::PoseLine { line: 2, .. })
        ));
    }
}
