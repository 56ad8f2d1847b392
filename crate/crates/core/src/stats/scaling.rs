use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite-size-scaling ansätze.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ansatz {
    /// `a L^z + b`
    Power,
    /// `a L^z`
    PowerNoOffset,
    /// `a ln L + b`
    Log,
    /// `a ln L`
    LogNoOffset,
}

impl Ansatz {
    pub const ALL: [Ansatz; 4] = [Ansatz::Power, Ansatz::PowerNoOffset, Ansatz::Log, Ansatz::LogNoOffset];

    fn has_offset(self) -> bool {
        matches!(self, Ansatz::Power | Ansatz::Log)
    }

    fn parameters(self) -> usize {
        match self {
            Ansatz::Power => 3,
            Ansatz::PowerNoOffset | Ansatz::Log => 2,
            Ansatz::LogNoOffset => 1,
        }
    }
}

/// Weighted least-squares fit of one ansatz. Parameter errors assume the
/// supplied standard errors are correct; `z` is profiled and its error taken
/// from the curvature of `χ²(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnsatzFit {
    pub ansatz: Ansatz,
    pub a: f64,
    pub se_a: f64,
    pub z: Option<f64>,
    pub se_z: Option<f64>,
    pub b: Option<f64>,
    pub se_b: Option<f64>,
    pub chi2: f64,
    pub dof: usize,
    pub chi2_per_dof: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub fits: Vec<AnsatzFit>,
    /// The same fits after dropping the smallest `L`; empty when fewer than
    /// four sizes would remain.
    pub without_smallest: Vec<AnsatzFit>,
}

impl ScalingFit {
    pub fn get(&self, ansatz: Ansatz) -> &AnsatzFit {
        self.fits.iter().find(|f| f.ansatz == ansatz).expect("all ansätze are fitted")
    }

    /// Ansatz with the smallest `χ²/dof` (fewer parameters on ties).
    pub fn lowest_chi2(&self) -> Ansatz {
        self.fits
            .iter()
            .filter(|f| f.dof > 0)
            .min_by(|x, y| x.chi2_per_dof.total_cmp(&y.chi2_per_dof).then(x.ansatz.parameters().cmp(&y.ansatz.parameters())))
            .map(|f| f.ansatz)
            .expect("at least one ansatz has positive degrees of freedom")
    }
}

struct Linear {
    coef: Vec<f64>,
    se: Vec<f64>,
    chi2: f64,
}

/// Weighted least squares for one or two basis functions.
fn linear_fit(basis: &[Vec<f64>], y: &[f64], w: &[f64]) -> Result<Linear> {
    let k = basis.len();
    let dot = |f: &[f64], g: &[f64]| -> f64 { (0..y.len()).map(|i| w[i] * f[i] * g[i]).sum() };
    let (coef, inv_diag) = match k {
        1 => {
            let a = dot(&basis[0], &basis[0]);
            if !(a > 0.0) {
                return Err(Error::Degenerate("empty design".into()));
            }
            (vec![dot(&basis[0], y) / a], vec![1.0 / a])
        }
        2 => {
            let (a, b, c) = (dot(&basis[0], &basis[0]), dot(&basis[0], &basis[1]), dot(&basis[1], &basis[1]));
            let det = a * c - b * b;
            if !(det > 1e-12 * a * c) {
                return Err(Error::Degenerate("collinear design matrix".into()));
            }
            let (r0, r1) = (dot(&basis[0], y), dot(&basis[1], y));
            (vec![(c * r0 - b * r1) / det, (a * r1 - b * r0) / det], vec![c / det, a / det])
        }
        _ => unreachable!("at most two linear parameters"),
    };
    let chi2 = (0..y.len())
        .map(|i| {
            let pred: f64 = (0..k).map(|j| coef[j] * basis[j][i]).sum();
            w[i] * (y[i] - pred).powi(2)
        })
        .sum();
    Ok(Linear { coef, se: inv_diag.iter().map(|v| v.sqrt()).collect(), chi2 })
}

fn basis(ansatz: Ansatz, ls: &[f64], z: f64) -> Vec<Vec<f64>> {
    let f: Vec<f64> = match ansatz {
        Ansatz::Power | Ansatz::PowerNoOffset => ls.iter().map(|l| l.powf(z)).collect(),
        Ansatz::Log | Ansatz::LogNoOffset => ls.iter().map(|l| l.ln()).collect(),
    };
    if ansatz.has_offset() {
        vec![f, vec![1.0; ls.len()]]
    } else {
        vec![f]
    }
}

const Z_RANGE: (f64, f64) = (-3.0, 5.0);
const Z_GRID: f64 = 0.01;

fn fit_one(ansatz: Ansatz, ls: &[f64], y: &[f64], w: &[f64]) -> Result<AnsatzFit> {
    let dof = ls.len() - ansatz.parameters();
    let finish = |lin: Linear, z: Option<f64>, se_z: Option<f64>| AnsatzFit {
        ansatz,
        a: lin.coef[0],
        se_a: lin.se[0],
        z,
        se_z,
        b: ansatz.has_offset().then(|| lin.coef[1]),
        se_b: ansatz.has_offset().then(|| lin.se[1]),
        chi2: lin.chi2,
        dof,
        chi2_per_dof: if dof > 0 { lin.chi2 / dof as f64 } else { f64::NAN },
    };
    if matches!(ansatz, Ansatz::Log | Ansatz::LogNoOffset) {
        return Ok(finish(linear_fit(&basis(ansatz, ls, 0.0), y, w)?, None, None));
    }
    let chi2_at = |z: f64| linear_fit(&basis(ansatz, ls, z), y, w).map(|l| l.chi2).unwrap_or(f64::INFINITY);
    // grid scan, then golden-section refinement around the best node
    let steps = ((Z_RANGE.1 - Z_RANGE.0) / Z_GRID).round() as usize;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=steps {
        let z = Z_RANGE.0 + i as f64 * Z_GRID;
        let c = chi2_at(z);
        if c < best.0 {
            best = (c, z);
        }
    }
    if !best.0.is_finite() {
        return Err(Error::Degenerate(format!("{ansatz:?}: no admissible exponent")));
    }
    let (mut lo, mut hi) = (best.1 - Z_GRID, best.1 + Z_GRID);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
    let (mut f1, mut f2) = (chi2_at(x1), chi2_at(x2));
    for _ in 0..200 {
        if hi - lo < 1e-12 {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = chi2_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = chi2_at(x2);
        }
    }
    let z = if f1.min(f2) < best.0 { if f1 <= f2 { x1 } else { x2 } } else { best.1 };
    let h = 1e-4 * z.abs().max(1.0);
    let curvature = (chi2_at(z + h) - 2.0 * chi2_at(z) + chi2_at(z - h)) / (h * h);
    let se_z = if curvature > 0.0 { (2.0 / curvature).sqrt() } else { f64::NAN };
    Ok(finish(linear_fit(&basis(ansatz, ls, z), y, w)?, Some(z), Some(se_z)))
}

fn fit_all(ls: &[f64], y: &[f64], w: &[f64]) -> Result<Vec<AnsatzFit>> {
    Ansatz::ALL.iter().map(|&a| fit_one(a, ls, y, w)).collect()
}

/// Fits all four ansätze by weighted least squares with weights `1/se²`
/// (unit weights when every `se` is zero), and refits without the smallest
/// `L` to expose lower-cutoff sensitivity.
pub fn fit_scaling(l_values: &[f64], y_values: &[f64], se_values: &[f64]) -> Result<ScalingFit> {
    let n = l_values.len();
    if y_values.len() != n || se_values.len() != n {
        return Err(Error::InvalidParameter("L, y and se must have equal lengths".into()));
    }
    if l_values.iter().any(|&l| !(l > 0.0) || !l.is_finite()) || y_values.iter().any(|y| !y.is_finite()) {
        return Err(Error::InvalidParameter("L must be positive and y finite".into()));
    }
    let mut distinct = l_values.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(Error::InsufficientData(format!("need at least 4 distinct L, got {}", distinct.len())));
    }
    let w: Vec<f64> = if se_values.iter().all(|&s| s == 0.0) {
        vec![1.0; n]
    } else if se_values.iter().all(|&s| s > 0.0 && s.is_finite()) {
        se_values.iter().map(|s| 1.0 / (s * s)).collect()
    } else {
        return Err(Error::InvalidParameter("standard errors must be all positive or all zero".into()));
    };
    let fits = fit_all(l_values, y_values, &w)?;
    let without_smallest = if distinct.len() > 4 {
        let keep: Vec<usize> = (0..n).filter(|&i| l_values[i] > distinct[0]).collect();
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        fit_all(&pick(l_values), &pick(y_values), &pick(&w))?
    } else {
        Vec::new()
    };
    Ok(ScalingFit { fits, without_smallest })
}
