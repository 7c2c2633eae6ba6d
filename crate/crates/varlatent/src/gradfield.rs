//! Gradient-field machinery for flow D: linear interpolation of variable
//! values over the observation latent plane, numeric gradients, pairwise
//! spot cross products, and the four aggregation options.

use ndarray::{Array2, Array3};
use spade::{DelaunayTriangulation, FloatTriangulation, HasPosition, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::ingest::{minmax_normalize, subsample, SampleAxis};
use crate::metrics::{AdjacencyMatrix, Metric};
use crate::table::DataTable;
use crate::vae::{fit_select, LatentTable, TrainConfig};

/// Default interpolation grid resolution.
pub const DEFAULT_GRID: usize = 35;

/// Values of one variable interpolated onto a G x G grid over the uniform
/// square; node (ix, iy) sits at (ix * h, iy * h) with h = 1 / (G - 1).
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub g: usize,
    pub values: Array2<f64>,
}

impl GridField {
    pub fn spacing(&self) -> f64 {
        1.0 / (self.g - 1) as f64
    }

    /// Index of the grid node nearest to a point of the uniform square.
    pub fn nearest_node(&self, x: f64, y: f64) -> (usize, usize) {
        let clamp = |v: f64| {
            ((v * (self.g - 1) as f64).round().max(0.0) as usize).min(self.g - 1)
        };
        (clamp(x), clamp(y))
    }
}

/// Partial derivatives of a grid field along the two latent axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub g: usize,
    pub xv: Array2<f64>,
    pub yv: Array2<f64>,
}

struct Site {
    position: Point2<f64>,
    value: f64,
}

impl HasPosition for Site {
    type Scalar = f64;
    fn position(&self) -> Point2<f64> {
        self.position
    }
}

/// Delaunay-triangulated barycentric linear interpolation of observation
/// values onto the grid. Nodes outside the convex hull take the value of the
/// nearest data point, so the field is total with flat margins.
pub fn interpolate(points: &[(f64, f64)], values: &[f64], g: usize) -> Result<GridField> {
    if points.len() != values.len() {
        return Err(Error::invalid("points and values must align"));
    }
    if points.len() < 3 {
        return Err(Error::invalid("interpolation requires at least 3 points"));
    }
    if g < 2 {
        return Err(Error::invalid("grid resolution must be >= 2"));
    }
    let mut tri: DelaunayTriangulation<Site> = DelaunayTriangulation::new();
    for (&(x, y), &v) in points.iter().zip(values.iter()) {
        if !(x.is_finite() && y.is_finite() && v.is_finite()) {
            return Err(Error::invalid("non-finite interpolation input"));
        }
        tri.insert(Site {
            position: Point2::new(x, y),
            value: v,
        })
        .map_err(|e| Error::numeric(format!("triangulation insertion failed: {e}")))?;
    }
    if tri.num_inner_faces() == 0 {
        return Err(Error::invalid(
            "all observation points are collinear; cannot interpolate a surface",
        ));
    }
    let h = 1.0 / (g - 1) as f64;
    let bary = tri.barycentric();
    let mut grid = Array2::zeros((g, g));
    for ix in 0..g {
        for iy in 0..g {
            let p = Point2::new(ix as f64 * h, iy as f64 * h);
            grid[(ix, iy)] = match bary.interpolate(|v| v.data().value, p) {
                Some(v) => v,
                None => {
                    tri.nearest_neighbor(p)
                        .expect("triangulation is non-empty")
                        .data()
                        .value
                }
            };
        }
    }
    Ok(GridField { g, values: grid })
}

/// Central differences at interior nodes, one-sided at the boundary.
pub fn gradients(f: &GridField) -> GradientField {
    let g = f.g;
    let h = f.spacing();
    let mut xv = Array2::zeros((g, g));
    let mut yv = Array2::zeros((g, g));
    for ix in 0..g {
        for iy in 0..g {
            xv[(ix, iy)] = if ix == 0 {
                (f.values[(1, iy)] - f.values[(0, iy)]) / h
            } else if ix == g - 1 {
                (f.values[(g - 1, iy)] - f.values[(g - 2, iy)]) / h
            } else {
                (f.values[(ix + 1, iy)] - f.values[(ix - 1, iy)]) / (2.0 * h)
            };
            yv[(ix, iy)] = if iy == 0 {
                (f.values[(ix, 1)] - f.values[(ix, 0)]) / h
            } else if iy == g - 1 {
                (f.values[(ix, g - 1)] - f.values[(ix, g - 2)]) / h
            } else {
                (f.values[(ix, iy + 1)] - f.values[(ix, iy - 1)]) / (2.0 * h)
            };
        }
    }
    GradientField { g, xv, yv }
}

/// Signed spot cross product of two gradient vectors.
pub fn cross_product(gi: (f64, f64), gj: (f64, f64)) -> f64 {
    gi.0 * gj.1 - gi.1 * gj.0
}

/// Signed spot cross products cp = xV_i * yV_j - yV_i * xV_j on every node.
pub fn spot_cross_product(gi: &GradientField, gj: &GradientField) -> Result<Array2<f64>> {
    if gi.g != gj.g {
        return Err(Error::invalid("gradient field shapes differ"));
    }
    Ok(&gi.xv * &gj.yv - &gi.yv * &gj.xv)
}

/// Signed cross products cp[i][j][n] for every variable pair at the grid
/// node nearest each observation.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossProductTensor {
    pub names: Vec<String>,
    /// K x K x N signed spot values; antisymmetric in the first two axes.
    pub cp: Array3<f64>,
}

impl CrossProductTensor {
    pub fn k(&self) -> usize {
        self.names.len()
    }

    pub fn observations(&self) -> usize {
        self.cp.shape()[2]
    }

    fn pair(&self, i: &str, j: &str) -> Result<(usize, usize)> {
        let find = |n: &str| {
            self.names
                .iter()
                .position(|v| v == n)
                .ok_or_else(|| Error::invalid(format!("unknown variable '{n}'")))
        };
        Ok((find(i)?, find(j)?))
    }
}

/// Evaluates every pairwise cross product at the node nearest each
/// observation point.
pub fn cross_product_tensor(
    fields: &[GradientField],
    names: &[String],
    observations: &[(f64, f64)],
) -> Result<CrossProductTensor> {
    if fields.len() != names.len() {
        return Err(Error::invalid("fields and names must align"));
    }
    let k = fields.len();
    if k < 2 {
        return Err(Error::invalid("cross products need at least 2 variables"));
    }
    let g = fields[0].g;
    if fields.iter().any(|f| f.g != g) {
        return Err(Error::invalid("gradient field shapes differ"));
    }
    let probe = GridField {
        g,
        values: Array2::zeros((g, g)),
    };
    let nodes: Vec<(usize, usize)> = observations
        .iter()
        .map(|&(x, y)| probe.nearest_node(x, y))
        .collect();
    let mut cp = Array3::zeros((k, k, observations.len()));
    for i in 0..k {
        for j in (i + 1)..k {
            for (n, &node) in nodes.iter().enumerate() {
                let v = cross_product(
                    (fields[i].xv[node], fields[i].yv[node]),
                    (fields[j].xv[node], fields[j].yv[node]),
                );
                cp[(i, j, n)] = v;
                cp[(j, i, n)] = -v;
            }
        }
    }
    Ok(CrossProductTensor {
        names: names.to_vec(),
        cp,
    })
}

/// Option 1: mean magnitude of the spot cross products per pair.
pub fn aggregate_option1(t: &CrossProductTensor) -> AdjacencyMatrix {
    let k = t.k();
    let n = t.observations() as f64;
    let mut values = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            if i != j {
                values[(i, j)] =
                    (0..t.observations()).map(|s| t.cp[(i, j, s)].abs()).sum::<f64>() / n;
            }
        }
    }
    AdjacencyMatrix::raw(t.names.clone(), values, Metric::CpMeanMagnitude)
}

/// Option 2: signed cross product of the mean gradient vectors.
pub fn aggregate_option2(fields: &[GradientField], names: &[String]) -> Result<AdjacencyMatrix> {
    if fields.len() != names.len() || fields.len() < 2 {
        return Err(Error::invalid("option 2 needs aligned fields for >= 2 variables"));
    }
    let means: Vec<(f64, f64)> = fields
        .iter()
        .map(|f| {
            let count = (f.g * f.g) as f64;
            (f.xv.sum() / count, f.yv.sum() / count)
        })
        .collect();
    let k = fields.len();
    let mut values = Array2::zeros((k, k));
    for i in 0..k {
        for j in 0..k {
            if i != j {
                values[(i, j)] = cross_product(means[i], means[j]);
            }
        }
    }
    Ok(AdjacencyMatrix::raw(
        names.to_vec(),
        values,
        Metric::CpOfMeans,
    ))
}

/// Option 3: variables as rows over a subsampled (j, n) column space.
pub fn aggregate_option3(
    t: &CrossProductTensor,
    column_budget: usize,
    seed: u64,
) -> Result<DataTable> {
    let k = t.k();
    let n = t.observations();
    let mut names = Vec::with_capacity(k * n);
    for j in 0..k {
        for s in 0..n {
            names.push(format!("{}|{s}", t.names[j]));
        }
    }
    let mut values = Array2::zeros((k, k * n));
    for i in 0..k {
        for j in 0..k {
            for s in 0..n {
                values[(i, j * n + s)] = t.cp[(i, j, s)];
            }
        }
    }
    let full = DataTable::new(names, t.names.clone(), values)?;
    if column_budget >= full.ncols() {
        return Ok(full);
    }
    subsample(&full, SampleAxis::Columns, column_budget, seed)
}

/// Option 4: (i, n) spot rows over variable columns, autoencoded; each
/// variable's coordinate is the mean latent mean of its surviving rows.
pub fn aggregate_option4(
    t: &CrossProductTensor,
    row_budget: usize,
    seed: u64,
    cfg: &TrainConfig,
) -> Result<LatentTable> {
    let k = t.k();
    let n = t.observations();
    let mut row_ids = Vec::with_capacity(k * n);
    for i in 0..k {
        for s in 0..n {
            row_ids.push(format!("{}|{s}", t.names[i]));
        }
    }
    let mut values = Array2::zeros((k * n, k));
    for i in 0..k {
        for s in 0..n {
            for j in 0..k {
                values[(i * n + s, j)] = t.cp[(i, j, s)];
            }
        }
    }
    let full = DataTable::new(t.names.clone(), row_ids, values)?;
    let spots = if row_budget >= full.nrows() {
        full
    } else {
        subsample(&full, SampleAxis::Rows, row_budget, seed)?
    };
    // every variable must keep at least one spot row
    for name in &t.names {
        let prefix = format!("{name}|");
        if !spots.row_ids.iter().any(|id| id.starts_with(&prefix)) {
            return Err(Error::invalid(format!(
                "row budget {row_budget} dropped every spot of '{name}'"
            )));
        }
    }
    let (normalized, _) = minmax_normalize(&spots);
    let fit = fit_select(&normalized, cfg, 1, 0)?;

    let mut mu = Array2::zeros((k, 2));
    let mut log_var = Array2::zeros((k, 2));
    for (i, name) in t.names.iter().enumerate() {
        let prefix = format!("{name}|");
        let rows: Vec<usize> = fit
            .latent
            .keys
            .iter()
            .enumerate()
            .filter(|(_, id)| id.starts_with(&prefix))
            .map(|(r, _)| r)
            .collect();
        let count = rows.len() as f64;
        for d in 0..2 {
            mu[(i, d)] = rows.iter().map(|&r| fit.latent.mu[(r, d)]).sum::<f64>() / count;
            log_var[(i, d)] =
                rows.iter().map(|&r| fit.latent.log_var[(r, d)]).sum::<f64>() / count;
        }
    }
    Ok(LatentTable {
        keys: t.names.clone(),
        mu,
        log_var,
    })
}

/// Magnitude series |cp_ij^n| in observation order for one pair.
pub fn cross_product_timeseries(
    t: &CrossProductTensor,
    i: &str,
    j: &str,
) -> Result<Vec<f64>> {
    let (a, b) = t.pair(i, j)?;
    Ok((0..t.observations()).map(|n| t.cp[(a, b, n)].abs()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    fn random_points(n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = SeedStream::new(seed);
        (0..n).map(|_| (rng.uniform01(), rng.uniform01())).collect()
    }

    fn plane(points: &[(f64, f64)], a: f64, b: f64, c: f64) -> Vec<f64> {
        points.iter().map(|&(x, y)| a * x + b * y + c).collect()
    }

    #[test]
    fn grid_geometry() {
        let pts = random_points(20, 1);
        let f = interpolate(&pts, &plane(&pts, 0.0, 0.0, 3.0), 35).unwrap();
        assert_eq!(f.values.len(), 1_225);
        assert!((f.spacing() - 1.0 / 34.0).abs() < 1e-15);
    }

    #[test]
    fn constant_values_fill_grid() {
        let pts = random_points(15, 2);
        let f = interpolate(&pts, &plane(&pts, 0.0, 0.0, 7.5), 12).unwrap();
        for &v in f.values.iter() {
            assert!((v - 7.5).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_precision_inside_hull() {
        // corners pinned so the hull covers the whole square
        let mut pts = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        pts.extend(random_points(40, 3));
        let vals = plane(&pts, 2.0, -1.5, 0.25);
        let f = interpolate(&pts, &vals, 21).unwrap();
        let h = f.spacing();
        for ix in 0..21 {
            for iy in 0..21 {
                let expect = 2.0 * (ix as f64 * h) - 1.5 * (iy as f64 * h) + 0.25;
                assert!(
                    (f.values[(ix, iy)] - expect).abs() < 1e-9,
                    "node ({ix},{iy})"
                );
            }
        }
    }

    #[test]
    fn outside_hull_uses_nearest_value() {
        // data confined to the center; corners must copy the nearest site
        let pts = vec![(0.4, 0.4), (0.6, 0.4), (0.5, 0.6), (0.45, 0.5)];
        let vals = vec![1.0, 2.0, 3.0, 4.0];
        let f = interpolate(&pts, &vals, 11).unwrap();
        assert_eq!(f.values[(0, 0)], 1.0);
        assert_eq!(f.values[(10, 0)], 2.0);
        assert!(f.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn collinear_points_rejected() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 / 10.0, i as f64 / 10.0)).collect();
        let vals = vec![0.0; 10];
        let err = interpolate(&pts, &vals, 5).unwrap_err();
        assert!(err.to_string().contains("collinear"));
    }

    #[test]
    fn gradients_of_plane_and_constant() {
        let mut pts = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        pts.extend(random_points(30, 4));
        let f = interpolate(&pts, &plane(&pts, 1.0, 0.0, 0.0), 15).unwrap();
        let grad = gradients(&f);
        for (&x, &y) in grad.xv.iter().zip(grad.yv.iter()) {
            assert!((x - 1.0).abs() < 1e-9);
            assert!(y.abs() < 1e-9);
        }
        let f = interpolate(&pts, &plane(&pts, 0.0, 0.0, 2.0), 15).unwrap();
        let grad = gradients(&f);
        assert!(grad.xv.iter().chain(grad.yv.iter()).all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn central_differences_exact_on_quadratic() {
        // build the grid analytically: f = x^2
        let g = 11;
        let h = 1.0 / (g - 1) as f64;
        let values = Array2::from_shape_fn((g, g), |(ix, _)| (ix as f64 * h).powi(2));
        let grad = gradients(&GridField { g, values });
        for ix in 1..g - 1 {
            for iy in 0..g {
                let x = ix as f64 * h;
                assert!(
                    (grad.xv[(ix, iy)] - 2.0 * x).abs() < 1e-12,
                    "xV at ({ix},{iy})"
                );
            }
        }
    }

    #[test]
    fn reference_cross_products() {
        assert!((cross_product((0.339, -0.177), (-0.019, 0.306)) - 0.100).abs() < 5e-4);
        assert!((cross_product((0.239, 0.191), (-0.249, -0.279)) - (-0.019)).abs() < 5e-4);
        assert!((cross_product((-0.611, 0.233), (0.576, -0.206)) - (-0.008)).abs() < 5e-4);
        assert_eq!(cross_product((0.3, 0.4), (0.3, 0.4)), 0.0);
    }

    #[test]
    fn determinant_and_polar_forms_agree() {
        let mut rng = SeedStream::new(6);
        for _ in 0..500 {
            let gi = (rng.normal(), rng.normal());
            let gj = (rng.normal(), rng.normal());
            let det = cross_product(gi, gj);
            let ri = (gi.0 * gi.0 + gi.1 * gi.1).sqrt();
            let rj = (gj.0 * gj.0 + gj.1 * gj.1).sqrt();
            // det(gi, gj) = r_i r_j sin(alpha_j - alpha_i)
            let polar = ri * rj * (gj.1.atan2(gj.0) - gi.1.atan2(gi.0)).sin();
            assert!((det - polar).abs() < 1e-12, "det {det} polar {polar}");
        }
    }

    #[test]
    fn analytic_unit_cross_product_field() {
        // V_i = x and V_j = y on grid-aligned positions: |cp| = 1 everywhere
        let g = 9;
        let h = 1.0 / (g - 1) as f64;
        let mut pts = Vec::new();
        for ix in 0..g {
            for iy in 0..g {
                pts.push((ix as f64 * h, iy as f64 * h));
            }
        }
        let vx: Vec<f64> = pts.iter().map(|p| p.0).collect();
        let vy: Vec<f64> = pts.iter().map(|p| p.1).collect();
        let fi = gradients(&interpolate(&pts, &vx, g).unwrap());
        let fj = gradients(&interpolate(&pts, &vy, g).unwrap());
        let cp = spot_cross_product(&fi, &fj).unwrap();
        for ix in 1..g - 1 {
            for iy in 1..g - 1 {
                assert!((cp[(ix, iy)].abs() - 1.0).abs() < 1e-9, "spot ({ix},{iy})");
            }
        }
    }

    fn demo_tensor(seed: u64) -> CrossProductTensor {
        let mut pts = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        pts.extend(random_points(30, seed));
        let obs = random_points(25, seed + 1);
        let names: Vec<String> = (0..4).map(|i| format!("v{i}")).collect();
        let mut rng = SeedStream::new(seed + 2);
        let fields: Vec<GradientField> = (0..4)
            .map(|_| {
                let vals: Vec<f64> = pts.iter().map(|_| rng.normal()).collect();
                gradients(&interpolate(&pts, &vals, 12).unwrap())
            })
            .collect();
        cross_product_tensor(&fields, &names, &obs).unwrap()
    }

    #[test]
    fn tensor_antisymmetry_and_diagonal() {
        let t = demo_tensor(10);
        for i in 0..t.k() {
            for j in 0..t.k() {
                for n in 0..t.observations() {
                    assert!((t.cp[(i, j, n)] + t.cp[(j, i, n)]).abs() < 1e-12);
                }
            }
            for n in 0..t.observations() {
                assert_eq!(t.cp[(i, i, n)], 0.0);
            }
        }
    }

    #[test]
    fn nearest_node_lookup() {
        let f = GridField {
            g: 35,
            values: Array2::zeros((35, 35)),
        };
        assert_eq!(f.nearest_node(0.0, 0.0), (0, 0));
        assert_eq!(f.nearest_node(1.0, 1.0), (34, 34));
        // slightly off-node points snap to the same node
        let h = f.spacing();
        assert_eq!(f.nearest_node(3.0 * h + 0.2 * h, 5.0 * h - 0.3 * h), (3, 5));
        assert_eq!(f.nearest_node(-0.4, 1.7), (0, 34));
    }

    #[test]
    fn option1_matches_brute_force() {
        let t = demo_tensor(11);
        let m = aggregate_option1(&t);
        for i in 0..t.k() {
            assert_eq!(m.values[(i, i)], 0.0);
            for j in 0..t.k() {
                assert!((m.values[(i, j)] - m.values[(j, i)]).abs() < 1e-12);
                assert!(m.values[(i, j)] >= 0.0);
                let mean = (0..t.observations())
                    .map(|n| t.cp[(i, j, n)].abs())
                    .sum::<f64>()
                    / t.observations() as f64;
                assert!((m.values[(i, j)] - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn option2_antisymmetric_and_brute_force() {
        let mut pts = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
        pts.extend(random_points(20, 12));
        let names: Vec<String> = (0..3).map(|i| format!("v{i}")).collect();
        let mut rng = SeedStream::new(13);
        let fields: Vec<GradientField> = (0..3)
            .map(|_| {
                let vals: Vec<f64> = pts.iter().map(|_| rng.normal()).collect();
                gradients(&interpolate(&pts, &vals, 8).unwrap())
            })
            .collect();
        let m = aggregate_option2(&fields, &names).unwrap();
        for i in 0..3 {
            assert_eq!(m.values[(i, i)], 0.0);
            for j in 0..3 {
                assert!((m.values[(i, j)] + m.values[(j, i)]).abs() < 1e-12);
            }
        }
        // brute-force means of field 0 and 1
        let count = 64.0;
        let m0 = (fields[0].xv.sum() / count, fields[0].yv.sum() / count);
        let m1 = (fields[1].xv.sum() / count, fields[1].yv.sum() / count);
        assert!((m.values[(0, 1)] - cross_product(m0, m1)).abs() < 1e-12);
    }

    #[test]
    fn option3_shapes_and_determinism() {
        let t = demo_tensor(14);
        let full = aggregate_option3(&t, usize::MAX, 1).unwrap();
        assert_eq!(full.nrows(), 4);
        assert_eq!(full.ncols(), 4 * 25);
        let a = aggregate_option3(&t, 30, 5).unwrap();
        let b = aggregate_option3(&t, 30, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.ncols(), 30);
        assert_ne!(a, aggregate_option3(&t, 30, 6).unwrap());
    }

    #[test]
    fn option4_yields_one_point_per_variable() {
        let t = demo_tensor(15);
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 32,
            runs: 1,
            seed: 3,
            ..Default::default()
        };
        let lt = aggregate_option4(&t, usize::MAX, 1, &cfg).unwrap();
        assert_eq!(lt.keys, t.names);
        assert!(lt.mu.iter().all(|v| v.is_finite()));
        // a budget of 2 rows cannot cover 4 variables
        assert!(aggregate_option4(&t, 2, 1, &cfg).is_err());
    }

    #[test]
    fn timeseries_is_identity_extraction() {
        let t = demo_tensor(16);
        let s = cross_product_timeseries(&t, "v1", "v3").unwrap();
        assert_eq!(s.len(), t.observations());
        for (n, &v) in s.iter().enumerate() {
            assert_eq!(v, t.cp[(1, 3, n)].abs());
        }
        assert!(cross_product_timeseries(&t, "v1", "nope").is_err());
    }
}
