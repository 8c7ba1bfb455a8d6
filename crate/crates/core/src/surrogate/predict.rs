use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::model::SurrogateModel;
use crate::analysis::{extract_ridge_field, fit_alpha, RidgePoint};
use crate::coin::reduce_angle;
use crate::error::{invalid, Result};
use crate::io::{self, csv_number, io_error};
use crate::sweep::angle_grid;

/// Network predictions over the `(phi, zeta)` angle grid for one `m`,
/// row-major over `(phi, zeta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedSurface {
    pub m: usize,
    pub phis: Vec<f64>,
    pub zetas: Vec<f64>,
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct SurfaceMeta {
    source: &'static str,
    m: usize,
    phi_steps: usize,
    zeta_steps: usize,
}

pub fn predict_surface(
    model: &SurrogateModel,
    m: usize,
    phi_steps: usize,
    zeta_steps: usize,
) -> Result<PredictedSurface> {
    if phi_steps < 2 || zeta_steps < 2 {
        return Err(invalid("steps", "grid needs at least 2 steps per axis"));
    }
    if m == 0 {
        return Err(invalid("m", "must be positive"));
    }
    let phis = angle_grid(phi_steps);
    let zetas = angle_grid(zeta_steps);
    let mut x = Array2::zeros((phi_steps * zeta_steps, 3));
    for (k, mut row) in x.rows_mut().into_iter().enumerate() {
        let f = SurrogateModel::features(phis[k / zeta_steps], zetas[k % zeta_steps], m as f64);
        row[0] = f[0];
        row[1] = f[1];
        row[2] = f[2];
    }
    let p = model.forward_features(x.view()).to_vec();
    Ok(PredictedSurface { m, phis, zetas, p })
}

impl PredictedSurface {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.p[row * self.zetas.len() + col]
    }

    /// Column of the largest prediction in row `row` (first of ties).
    pub fn row_argmax(&self, row: usize) -> usize {
        let cols = self.zetas.len();
        let slice = &self.p[row * cols..(row + 1) * cols];
        let mut best = 0;
        for (j, &v) in slice.iter().enumerate() {
            if v > slice[best] {
                best = j;
            }
        }
        best
    }

    pub fn ridge(&self, column_floor: f64) -> Result<Vec<RidgePoint>> {
        let zetas: Vec<f64> = self.zetas.iter().map(|&z| reduce_angle(z)).collect();
        extract_ridge_field(&self.phis, &zetas, &self.p, column_floor)
    }

    /// Writes `phi,zeta,m,p` rows plus a sidecar marking the data as predicted.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
        wtr.write_record(["phi", "zeta", "m", "p"])
            .map_err(|e| io_error(path, e))?;
        for (k, &p) in self.p.iter().enumerate() {
            let phi = self.phis[k / self.zetas.len()];
            let zeta = self.zetas[k % self.zetas.len()];
            wtr.write_record([
                csv_number(reduce_angle(phi)),
                csv_number(reduce_angle(zeta)),
                self.m.to_string(),
                csv_number(p),
            ])
            .map_err(|e| io_error(path, e))?;
        }
        wtr.flush().map_err(|e| io_error(path, e))?;
        io::write_json(
            &io::sidecar_path(path),
            &SurfaceMeta {
                source: "surrogate",
                m: self.m,
                phi_steps: self.phis.len(),
                zeta_steps: self.zetas.len(),
            },
        )
    }
}

/// Fits `alpha` to the ridge of the surface the network predicts on a
/// `180 x 180` grid.
pub fn predict_alpha_ml(model: &SurrogateModel, m: usize, column_floor: f64) -> Result<f64> {
    let surface = predict_surface(model, m, 180, 180)?;
    fit_alpha(&surface.ridge(column_floor)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_surface_is_flat() {
        let model = SurrogateModel::zeros(2, 4).unwrap();
        let s = predict_surface(&model, 7, 6, 8).unwrap();
        assert_eq!(s.p.len(), 48);
        assert!(s.p.iter().all(|&p| p == 0.25));
        assert_eq!(s.row_argmax(3), 0);
        // ties everywhere: the ridge sits at the smallest reduced zeta, 2 pi -> 0
        let ridge = s.ridge(0.9).unwrap();
        assert!(ridge.iter().all(|r| r.zeta == 0.0));
    }

    #[test]
    fn surface_matches_pointwise_forward() {
        let model = SurrogateModel::new_random(2, 6, 9).unwrap();
        let s = predict_surface(&model, 5, 5, 4).unwrap();
        for i in 0..5 {
            for j in 0..4 {
                let direct = model.forward(s.phis[i], s.zetas[j], 5);
                assert!((s.get(i, j) - direct).abs() < 1e-14);
            }
        }
    }
}
