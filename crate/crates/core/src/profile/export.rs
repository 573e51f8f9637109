//! Profile CSV: a `# {json}` header line, then `r,u,du` rows.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::RadialProfile;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub alpha0: f64,
    pub tail_c: f64,
    pub tail_r_star: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub header: ProfileHeader,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl<T: Scalar> RadialProfile<T> {
    pub fn header(&self) -> ProfileHeader {
        ProfileHeader {
            n: self.dims.n(),
            m: self.dims.m(),
            p: self.dims.exponent::<f64>(),
            alpha0: self.alpha0.as_f64(),
            tail_c: self.tail_c.as_f64(),
            tail_r_star: self.tail_r_star.as_f64(),
        }
    }

    /// Writes the origin node followed by every stored node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", serde_json::to_string(&self.header())?)?;
        writeln!(out, "r,u,du")?;
        for i in 0..self.r.len() {
            writeln!(
                out,
                "{:e},{:e},{:e}",
                self.r[i].as_f64(),
                self.u[i].as_f64(),
                self.du[i].as_f64()
            )?;
        }
        Ok(())
    }
}

pub fn read_profile_csv<R: BufRead>(input: R) -> Result<ProfileTable> {
    let mut lines = input.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::Profile("empty profile file".into()))??;
    let json = first
        .strip_prefix('#')
        .ok_or_else(|| Error::Profile("missing '# {json}' header line".into()))?;
    let header: ProfileHeader = serde_json::from_str(json.trim())?;
    let columns = lines
        .next()
        .ok_or_else(|| Error::Profile("missing column header".into()))??;
    if columns.trim() != "r,u,du" {
        return Err(Error::Profile(format!("unexpected columns '{columns}'")));
    }
    let (mut r, mut u, mut du) = (vec![], vec![], vec![]);
    for (k, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Profile(format!("row {}: {e}", k + 1)))?;
        if fields.len() != 3 {
            return Err(Error::Profile(format!("row {}: expected 3 fields", k + 1)));
        }
        r.push(fields[0]);
        u.push(fields[1]);
        du.push(fields[2]);
    }
    Ok(ProfileTable { header, r, u, du })
}
