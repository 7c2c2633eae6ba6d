//! Post-encoding coordinate frames: standardized (Ln), uniform square (Lu),
//! uniform disk (Lp), deduplication of encoded copies, pairwise distances,
//! and latent-plane density maps.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::original_key;
use crate::rng::phi;
use crate::vae::LatentTable;

/// Which derived frame a distance or density computation works in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    UniformSquare,
    UniformDisk,
}

/// The fitted latent coordinates of a point set in all frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentFrames {
    pub keys: Vec<String>,
    /// Raw posterior means (n x 2).
    pub l: Array2<f64>,
    /// Standardized coordinates: per-axis sample mean 0, std 1.
    pub ln: Array2<f64>,
    /// Normal-CDF transform of Ln; strictly inside (0, 1)^2.
    pub lu: Array2<f64>,
    /// Polar transform of Ln; strictly inside the unit disk.
    pub lp: Array2<f64>,
}

/// Collapses duplicated rows (`key#copy`) to one row per original key.
/// Encoding is deterministic, so all copies must be bitwise equal; a
/// divergent copy signals a sampling bug upstream.
pub fn dedupe(lt: &LatentTable) -> Result<LatentTable> {
    let mut keys: Vec<String> = Vec::new();
    let mut index: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let mut rows: Vec<[f64; 4]> = Vec::new();
    for (i, full_key) in lt.keys.iter().enumerate() {
        let key = original_key(full_key);
        let row = [
            lt.mu[(i, 0)],
            lt.mu[(i, 1)],
            lt.log_var[(i, 0)],
            lt.log_var[(i, 1)],
        ];
        match index.get(key) {
            Some(&at) => {
                let seen = &rows[at];
                if seen.iter().zip(row.iter()).any(|(a, b)| a.to_bits() != b.to_bits()) {
                    return Err(Error::invalid(format!(
                        "encoded copies of '{key}' diverge; encoding should be deterministic"
                    )));
                }
            }
            None => {
                index.insert(key.to_string(), rows.len());
                keys.push(key.to_string());
                rows.push(row);
            }
        }
    }
    let n = keys.len();
    let mut mu = Array2::zeros((n, 2));
    let mut log_var = Array2::zeros((n, 2));
    for (i, row) in rows.iter().enumerate() {
        mu[(i, 0)] = row[0];
        mu[(i, 1)] = row[1];
        log_var[(i, 0)] = row[2];
        log_var[(i, 1)] = row[3];
    }
    Ok(LatentTable { keys, mu, log_var })
}

/// Per-axis sample mean and standard deviation (population form) of the
/// latent means.
fn axis_stats(mu: &Array2<f64>) -> Result<[(f64, f64); 2]> {
    let n = mu.nrows();
    if n < 2 {
        return Err(Error::invalid("frames need at least 2 latent points"));
    }
    let mut out = [(0.0, 0.0); 2];
    for d in 0..2 {
        let col = mu.column(d);
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|&x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        if var <= 0.0 {
            return Err(Error::numeric(format!(
                "latent axis {} has zero variance; cannot standardize",
                d + 1
            )));
        }
        out[d] = (mean, var.sqrt());
    }
    Ok(out)
}

/// Builds all coordinate frames from a (deduped) latent table.
///
/// Per axis d: Ln_d = (L_d - mean_d) / std_d and Lu_d = Phi(Ln_d).
/// With rho = ||Ln|| and angle alpha, Lp = (cos a, sin a) * (2 Phi(rho) - 1);
/// rho = 0 maps to the origin.
pub fn build_frames(lt: &LatentTable) -> Result<LatentFrames> {
    let stats = axis_stats(&lt.mu)?;
    let n = lt.mu.nrows();
    let mut ln = Array2::zeros((n, 2));
    let mut lu = Array2::zeros((n, 2));
    let mut lp = Array2::zeros((n, 2));
    for i in 0..n {
        for d in 0..2 {
            let (mean, std) = stats[d];
            let z = (lt.mu[(i, d)] - mean) / std;
            ln[(i, d)] = z;
            lu[(i, d)] = phi(z);
        }
        let rho = (ln[(i, 0)].powi(2) + ln[(i, 1)].powi(2)).sqrt();
        if rho > 0.0 {
            let r = 2.0 * phi(rho) - 1.0;
            lp[(i, 0)] = ln[(i, 0)] / rho * r;
            lp[(i, 1)] = ln[(i, 1)] / rho * r;
        }
    }
    Ok(LatentFrames {
        keys: lt.keys.clone(),
        l: lt.mu.clone(),
        ln,
        lu,
        lp,
    })
}

impl LatentFrames {
    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn coords(&self, frame: Frame) -> &Array2<f64> {
        match frame {
            Frame::UniformSquare => &self.lu,
            Frame::UniformDisk => &self.lp,
        }
    }

    /// Writes `key, L1, L2, Lu1, Lu2, Lp1, Lp2` rows, with an optional group
    /// tag column.
    pub fn save_csv(
        &self,
        path: impl AsRef<std::path::Path>,
        groups: Option<&[String]>,
    ) -> Result<()> {
        if let Some(g) = groups {
            if g.len() != self.len() {
                return Err(Error::invalid("group tags must match the point count"));
            }
        }
        let mut out = String::from("key,L1,L2,Lu1,Lu2,Lp1,Lp2");
        if groups.is_some() {
            out.push_str(",group");
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}",
                self.keys[i],
                self.l[(i, 0)],
                self.l[(i, 1)],
                self.lu[(i, 0)],
                self.lu[(i, 1)],
                self.lp[(i, 0)],
                self.lp[(i, 1)],
            ));
            if let Some(g) = groups {
                out.push(',');
                out.push_str(&g[i]);
            }
            out.push('\n');
        }
        std::fs::write(path.as_ref(), out).map_err(|source| Error::Io {
            path: path.as_ref().to_path_buf(),
            source,
        })
    }
}

/// Symmetric Euclidean distance matrix between points of one frame.
pub fn pairwise_distances(frames: &LatentFrames, frame: Frame) -> Array2<f64> {
    let pts = frames.coords(frame);
    let n = pts.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = pts[(i, 0)] - pts[(j, 0)];
            let dy = pts[(i, 1)] - pts[(j, 1)];
            let dist = (dx * dx + dy * dy).sqrt();
            d[(i, j)] = dist;
            d[(j, i)] = dist;
        }
    }
    d
}

/// 2D histogram of the frame's points over their bounding box, normalized
/// to total mass 1.
pub fn density_grid(frames: &LatentFrames, frame: Frame, grid: usize) -> Result<Array2<f64>> {
    if grid < 2 {
        return Err(Error::invalid("density_grid requires grid >= 2"));
    }
    let pts = frames.coords(frame);
    let n = pts.nrows();
    if n == 0 {
        return Err(Error::invalid("density_grid requires points"));
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for i in 0..n {
        for d in 0..2 {
            lo[d] = lo[d].min(pts[(i, d)]);
            hi[d] = hi[d].max(pts[(i, d)]);
        }
    }
    let mut cells = Array2::zeros((grid, grid));
    for i in 0..n {
        let mut idx = [0usize; 2];
        for d in 0..2 {
            idx[d] = if hi[d] > lo[d] {
                (((pts[(i, d)] - lo[d]) / (hi[d] - lo[d]) * grid as f64) as usize).min(grid - 1)
            } else {
                grid / 2
            };
        }
        cells[(idx[0], idx[1])] += 1.0;
    }
    Ok(cells / n as f64)
}
