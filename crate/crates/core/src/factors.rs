//! Principal-components factor extraction, varimax rotation, sampling
//! adequacy and regression-method factor scores.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dataset::StandardizedMatrix;
use crate::eigen::{invert_spd, sym_eigen};
use crate::fmath;
use crate::{Error, Matrix, Result};

/// Rotation angles below this count as "no movement" when deciding whether
/// varimax has reached a fixed point.
const VARIMAX_ANGLE_TOLERANCE: f64 = 1e-12;

/// How many components to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Retention {
    /// Every eigenvalue strictly greater than one.
    Kaiser,
    Fixed(usize),
}

/// Pearson correlation matrix of standardized columns, `zᵀz / (n − 1)`.
pub fn correlation_matrix(z: &StandardizedMatrix) -> Result<Matrix> {
    let x = &z.values;
    let (n, p) = (x.rows(), x.cols());
    if n < 3 {
        return Err(Error::TooFewCases { found: n, required: 3 });
    }
    let mut r = Matrix::identity(p);
    for a in 0..p {
        for b in (a + 1)..p {
            let s: f64 = x.row_iter().map(|row| row[a] * row[b]).sum();
            let v = (s / (n as f64 - 1.0)).clamp(-1.0, 1.0);
            r[(a, b)] = v;
            r[(b, a)] = v;
        }
    }
    Ok(r)
}

/// Output of principal-components extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    /// All `p` eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    /// `p × k`; column `j` is eigenvector `j` scaled by `√λ_j`.
    pub loadings: Matrix,
    pub retained: usize,
}

impl Extraction {
    pub fn variance_explained(&self) -> f64 {
        let total = self.eigenvalues.len() as f64;
        self.eigenvalues[..self.retained].iter().sum::<f64>() / total
    }
}

pub fn extract_pca(r: &Matrix, retention: Retention) -> Result<Extraction> {
    let eig = sym_eigen(r)?;
    let p = eig.eigenvalues.len();
    let retained = match retention {
        Retention::Kaiser => {
            let k = eig.eigenvalues.iter().take_while(|&&l| l > 1.0).count();
            if k == 0 {
                return Err(Error::NoFactorsRetained { largest_eigenvalue: eig.eigenvalues[0] });
            }
            k
        }
        Retention::Fixed(k) if k == 0 || k > p => return Err(Error::TooManyFactors { requested: k, available: p }),
        Retention::Fixed(k) => k,
    };
    let mut loadings = Matrix::zeros(p, retained);
    for j in 0..retained {
        let scale = fmath::sqrt(eig.eigenvalues[j].max(0.0));
        for i in 0..p {
            loadings[(i, j)] = eig.eigenvectors[(i, j)] * scale;
        }
    }
    Ok(Extraction { eigenvalues: eig.eigenvalues, loadings, retained })
}

/// Kaiser's adjective scale for KMO values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum KmoLabel {
    Marvelous,
    Meritorious,
    Middling,
    Mediocre,
    Miserable,
    Unacceptable,
}

impl KmoLabel {
    pub fn from_value(kmo: f64) -> Self {
        match kmo {
            v if v >= 0.9 => KmoLabel::Marvelous,
            v if v >= 0.8 => KmoLabel::Meritorious,
            v if v >= 0.7 => KmoLabel::Middling,
            v if v >= 0.6 => KmoLabel::Mediocre,
            v if v >= 0.5 => KmoLabel::Miserable,
            _ => KmoLabel::Unacceptable,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KmoLabel::Marvelous => "marvelous",
            KmoLabel::Meritorious => "meritorious",
            KmoLabel::Middling => "middling",
            KmoLabel::Mediocre => "mediocre",
            KmoLabel::Miserable => "miserable",
            KmoLabel::Unacceptable => "unacceptable",
        }
    }
}

impl fmt::Display for KmoLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Kaiser–Meyer–Olkin measure of sampling adequacy.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Kmo {
    pub overall: f64,
    /// `None` for a variable uncorrelated with every other one.
    pub per_variable: Vec<Option<f64>>,
    pub label: KmoLabel,
}

/// Compares squared correlations with squared anti-image partial correlations
/// `q_ij = −s_ij / √(s_ii s_jj)`, where `s = r⁻¹`.
pub fn kmo(r: &Matrix) -> Result<Kmo> {
    let s = invert_spd(r)?;
    let p = r.rows();
    let mut r2_total = 0.0;
    let mut q2_total = 0.0;
    let mut per_variable = Vec::with_capacity(p);
    for i in 0..p {
        let mut r2 = 0.0;
        let mut q2 = 0.0;
        for j in 0..p {
            if i == j {
                continue;
            }
            // with nothing to partial out, the partial correlation is r itself
            let q = if p == 2 { r[(i, j)] } else { -s[(i, j)] / fmath::sqrt(s[(i, i)] * s[(j, j)]) };
            r2 += r[(i, j)] * r[(i, j)];
            q2 += q * q;
        }
        per_variable.push((r2 + q2 > 0.0).then(|| r2 / (r2 + q2)));
        r2_total += r2;
        q2_total += q2;
    }
    if r2_total == 0.0 {
        return Err(Error::KmoUndefined);
    }
    let overall = r2_total / (r2_total + q2_total);
    Ok(Kmo { overall, per_variable, label: KmoLabel::from_value(overall) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VarimaxOptions {
    /// Scale rows to unit communality before rotating.
    pub kaiser_normalize: bool,
    /// Relative change of the criterion across one sweep.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for VarimaxOptions {
    fn default() -> Self {
        Self { kaiser_normalize: true, tol: 1e-10, max_iter: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarimaxResult {
    pub loadings: Matrix,
    /// Orthogonal `k × k` matrix with `loadings = input · rotation`.
    pub rotation: Matrix,
    /// Criterion before the first sweep and after every sweep.
    pub criterion_history: Vec<f64>,
    pub sweeps: usize,
    /// `false` when `max_iter` ran out; the result is then the best so far.
    pub converged: bool,
}

/// Sum over factors of the variance of the squared loadings, optionally on
/// rows normalized to unit communality.
pub fn varimax_criterion(loadings: &Matrix, kaiser_normalize: bool) -> f64 {
    let x = if kaiser_normalize { normalize_rows(loadings).0 } else { loadings.clone() };
    raw_criterion(&x)
}

fn raw_criterion(x: &Matrix) -> f64 {
    let p = x.rows() as f64;
    (0..x.cols())
        .map(|j| {
            let (s2, s4) = x.row_iter().fold((0.0, 0.0), |(s2, s4), row| {
                let sq = row[j] * row[j];
                (s2 + sq, s4 + sq * sq)
            });
            s4 / p - (s2 / p) * (s2 / p)
        })
        .sum()
}

fn normalize_rows(loadings: &Matrix) -> (Matrix, Vec<f64>) {
    let mut x = loadings.clone();
    let mut norms = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let h = fmath::sqrt(loadings.row(i).iter().map(|v| v * v).sum());
        norms.push(h);
        if h > 0.0 {
            for j in 0..x.cols() {
                x[(i, j)] /= h;
            }
        }
    }
    (x, norms)
}

/// Orthogonal varimax rotation by successive pairwise planar rotations.
///
/// Factor pairs are visited in lexicographic order and each pair is rotated
/// by the closed-form angle that maximizes the criterion for that pair, so
/// the criterion never decreases. The result is canonicalized: columns sorted
/// by sum of squared loadings (descending), each signed so its largest
/// absolute loading is positive.
pub fn varimax(loadings: &Matrix, opts: &VarimaxOptions) -> Result<VarimaxResult> {
    let (p, k) = (loadings.rows(), loadings.cols());
    if p < k {
        return Err(Error::Dimension(format!("varimax needs p >= k, got {p}x{k}")));
    }
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::Domain { what: "varimax tolerance", value: opts.tol });
    }
    let (mut x, norms) =
        if opts.kaiser_normalize { normalize_rows(loadings) } else { (loadings.clone(), alloc::vec![1.0; p]) };
    let mut t = Matrix::identity(k);
    let mut history = alloc::vec![raw_criterion(&x)];
    let mut converged = k < 2;
    let mut sweeps = 0;

    while !converged && sweeps < opts.max_iter {
        sweeps += 1;
        let mut max_angle: f64 = 0.0;
        for a in 0..k {
            for b in (a + 1)..k {
                let phi = pair_angle(&x, a, b);
                if phi == 0.0 {
                    continue;
                }
                max_angle = max_angle.max(fmath::abs(phi));
                let (c, s) = (fmath::cos(phi), fmath::sin(phi));
                rotate_columns(&mut x, a, b, c, s);
                rotate_columns(&mut t, a, b, c, s);
            }
        }
        let prev = *history.last().unwrap_or(&0.0);
        let crit = raw_criterion(&x);
        history.push(crit);
        let rel = fmath::abs(crit - prev) / fmath::abs(crit).max(f64::MIN_POSITIVE);
        converged = rel < opts.tol && max_angle < VARIMAX_ANGLE_TOLERANCE;
    }

    // Canonical column order and signs, applied to the rotation as well so
    // that loadings = input · rotation keeps holding.
    for (i, &h) in norms.iter().enumerate() {
        if h > 0.0 {
            for j in 0..k {
                x[(i, j)] *= h;
            }
        }
    }
    let ss: Vec<f64> = (0..k).map(|j| x.row_iter().map(|r| r[j] * r[j]).sum()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| ss[b].total_cmp(&ss[a]));
    let mut rotation = Matrix::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        let sign = column_sign(&x, src);
        for i in 0..k {
            rotation[(i, dst)] = sign * t[(i, src)];
        }
    }
    let rotated = loadings.matmul(&rotation)?;
    Ok(VarimaxResult { loadings: rotated, rotation, criterion_history: history, sweeps, converged })
}

/// Angle that maximizes the varimax criterion over rotations of columns a, b.
fn pair_angle(x: &Matrix, a: usize, b: usize) -> f64 {
    let p = x.rows() as f64;
    let (mut sa, mut sb, mut sc, mut sd) = (0.0, 0.0, 0.0, 0.0);
    for row in x.row_iter() {
        let (xa, xb) = (row[a], row[b]);
        let u = xa * xa - xb * xb;
        let v = 2.0 * xa * xb;
        sa += u;
        sb += v;
        sc += u * u - v * v;
        sd += 2.0 * u * v;
    }
    let num = sd - 2.0 * sa * sb / p;
    let den = sc - (sa * sa - sb * sb) / p;
    // Flat criterion along this plane: any angle is optimal.
    if fmath::sqrt(num * num + den * den) <= 1e-15 * p {
        return 0.0;
    }
    fmath::atan2(num, den) / 4.0
}

fn rotate_columns(m: &mut Matrix, a: usize, b: usize, c: f64, s: f64) {
    for i in 0..m.rows() {
        let (xa, xb) = (m[(i, a)], m[(i, b)]);
        m[(i, a)] = c * xa + s * xb;
        m[(i, b)] = -s * xa + c * xb;
    }
}

/// +1 if the column's largest-magnitude entry (first on ties) is non-negative.
fn column_sign(m: &Matrix, j: usize) -> f64 {
    let mut pivot = 0;
    for i in 1..m.rows() {
        if fmath::abs(m[(i, j)]) > fmath::abs(m[(pivot, j)]) {
            pivot = i;
        }
    }
    if m[(pivot, j)] < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Regression-method score coefficients `W = r⁻¹ · Λ`.
pub fn score_coefficients(r: &Matrix, loadings: &Matrix) -> Result<Matrix> {
    if r.rows() != loadings.rows() {
        return Err(Error::Dimension(format!(
            "correlation is {}x{} but loadings have {} rows",
            r.rows(),
            r.cols(),
            loadings.rows()
        )));
    }
    invert_spd(r)?.matmul(loadings)
}

/// Per-case scores on the retained factors.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FactorScores {
    pub case_ids: Vec<String>,
    pub factor_names: Vec<String>,
    /// `n × k` in standard-score units.
    pub scores: Matrix,
}

/// `F = Z · W`: each score is the sum over variables of weight × z-score.
pub fn factor_scores(z: &StandardizedMatrix, w: &Matrix) -> Result<FactorScores> {
    if z.values.cols() != w.rows() {
        return Err(Error::Dimension(format!("{} standardized columns but {} weight rows", z.values.cols(), w.rows())));
    }
    Ok(FactorScores {
        case_ids: z.case_ids.clone(),
        factor_names: default_factor_names(w.cols()),
        scores: z.values.matmul(w)?,
    })
}

pub fn default_factor_names(k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("F{j}")).collect()
}

/// Rotation applied after extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RotationMethod {
    Varimax(VarimaxOptions),
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorOptions {
    pub retention: Retention,
    pub rotation: RotationMethod,
}

impl Default for FactorOptions {
    fn default() -> Self {
        Self { retention: Retention::Kaiser, rotation: RotationMethod::Varimax(VarimaxOptions::default()) }
    }
}

/// Step of [`FactorModel::fit`] that failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorStage {
    Correlation,
    Extraction,
    Rotation,
    Kmo,
    ScoreCoefficients,
}

impl FactorStage {
    pub fn as_str(self) -> &'static str {
        match self {
            FactorStage::Correlation => "correlation",
            FactorStage::Extraction => "extraction",
            FactorStage::Rotation => "rotation",
            FactorStage::Kmo => "kmo",
            FactorStage::ScoreCoefficients => "score coefficients",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitError {
    pub stage: FactorStage,
    pub source: Error,
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage.as_str(), self.source)
    }
}

impl core::error::Error for FitError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// A fitted principal-components factor model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FactorModel {
    pub indicator_names: Vec<String>,
    pub factor_names: Vec<String>,
    pub eigenvalues: Vec<f64>,
    pub retained: usize,
    pub loadings_unrotated: Matrix,
    pub loadings_rotated: Matrix,
    pub rotation: Matrix,
    pub rotation_converged: bool,
    pub rotation_sweeps: usize,
    pub communalities: Vec<f64>,
    pub variance_explained: f64,
    pub kmo: Kmo,
    pub score_coefficients: Matrix,
}

impl FactorModel {
    /// Correlate, extract, rotate, diagnose and derive score coefficients.
    pub fn fit(z: &StandardizedMatrix, opts: &FactorOptions) -> core::result::Result<Self, FitError> {
        let at = |stage| move |source| FitError { stage, source };
        let r = correlation_matrix(z).map_err(at(FactorStage::Correlation))?;
        let ext = extract_pca(&r, opts.retention).map_err(at(FactorStage::Extraction))?;
        let k = ext.retained;
        let (rotated, rotation, converged, sweeps) = match opts.rotation {
            RotationMethod::Varimax(v) => {
                let res = varimax(&ext.loadings, &v).map_err(at(FactorStage::Rotation))?;
                (res.loadings, res.rotation, res.converged, res.sweeps)
            }
            RotationMethod::None => (ext.loadings.clone(), Matrix::identity(k), true, 0),
        };
        let kmo = kmo(&r).map_err(at(FactorStage::Kmo))?;
        let w = score_coefficients(&r, &rotated).map_err(at(FactorStage::ScoreCoefficients))?;
        let communalities = rotated.row_iter().map(|row| row.iter().map(|v| v * v).sum()).collect();
        Ok(FactorModel {
            indicator_names: z.indicator_names.clone(),
            factor_names: default_factor_names(k),
            variance_explained: ext.variance_explained(),
            eigenvalues: ext.eigenvalues,
            retained: k,
            loadings_unrotated: ext.loadings,
            loadings_rotated: rotated,
            rotation,
            rotation_converged: converged,
            rotation_sweeps: sweeps,
            communalities,
            kmo,
            score_coefficients: w,
        })
    }

    /// Scores for the cases of `z` with this model's coefficients and names.
    pub fn scores(&self, z: &StandardizedMatrix) -> Result<FactorScores> {
        let mut f = factor_scores(z, &self.score_coefficients)?;
        f.factor_names = self.factor_names.clone();
        Ok(f)
    }

    /// Renames the factors, e.g. with substantive labels.
    pub fn set_factor_names(&mut self, names: Vec<String>) -> Result<()> {
        if names.len() != self.retained {
            return Err(Error::Dimension(format!(
                "{} factor names for {} retained factors",
                names.len(),
                self.retained
            )));
        }
        self.factor_names = names;
        Ok(())
    }

    /// Indices of the `n` variables with the largest absolute loading on
    /// `factor`, strongest first.
    pub fn top_loadings(&self, factor: usize, n: usize) -> Vec<(usize, f64)> {
        let mut v: Vec<(usize, f64)> =
            (0..self.loadings_rotated.rows()).map(|i| (i, self.loadings_rotated[(i, factor)])).collect();
        v.sort_by(|a, b| fmath::abs(b.1).total_cmp(&fmath::abs(a.1)));
        v.truncate(n);
        v
    }
}
