//! Post-solve verification: radial profiles, tail-decay fits, positivity and
//! radial-symmetry checks, and per-scenario scorecards.

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::ops::mass;
use serde::Serialize;

/// Shell-averaged radial profile. Bins have width h; `r` holds bin centers,
/// `avg` the mean field value over nodes in the bin, `count` the node count.
#[derive(Debug, Clone)]
pub struct ShellProfile {
    pub r: Vec<f64>,
    pub avg: Vec<f64>,
    pub count: Vec<usize>,
}

/// Shell-average a field about the box center.
pub fn shell_profile(f: &Field) -> ShellProfile {
    let grid = f.grid();
    let h = grid.spacing();
    let d = grid.dim();
    let r_max = grid.half_length() * (d as f64).sqrt();
    let nbins = (r_max / h).ceil() as usize + 1;
    let mut sum = vec![0.0; nbins];
    let mut count = vec![0usize; nbins];
    let mut idx = vec![0usize; d];
    for (flat, &v) in f.values().iter().enumerate() {
        grid.decode(flat, &mut idx);
        let r = grid.radius_sq(&idx).sqrt();
        let bin = ((r / h) as usize).min(nbins - 1);
        sum[bin] += v;
        count[bin] += 1;
    }
    let mut r = Vec::with_capacity(nbins);
    let mut avg = Vec::with_capacity(nbins);
    for i in 0..nbins {
        r.push((i as f64 + 0.5) * h);
        avg.push(if count[i] > 0 { sum[i] / count[i] as f64 } else { 0.0 });
    }
    ShellProfile { r, avg, count }
}

/// Result of a log–log least-squares fit of the radial tail.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub stderr: f64,
    pub n_shells: usize,
    pub censored: usize,
}

/// Fit log(shell average) against log(r) over the annulus [r1, r2].
/// Shells with nonpositive averages are censored and reported; fewer than
/// eight usable shells is an error.
pub fn decay_fit(f: &Field, r1: f64, r2: f64) -> Result<DecayFit> {
    if !(r1 > 0.0 && r2 > r1) {
        return Err(Error::Diagnostic(format!("invalid annulus [{r1}, {r2}]")));
    }
    let prof = shell_profile(f);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut censored = 0usize;
    for i in 0..prof.r.len() {
        let r = prof.r[i];
        if r < r1 || r > r2 || prof.count[i] == 0 {
            continue;
        }
        if prof.avg[i] <= 0.0 {
            censored += 1;
            continue;
        }
        xs.push(r.ln());
        ys.push(prof.avg[i].ln());
    }
    let n = xs.len();
    if n < 8 {
        return Err(Error::Diagnostic(format!(
            "annulus [{r1}, {r2}] has {n} usable shells (need 8); {censored} censored"
        )));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let stderr = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(DecayFit {
        slope,
        stderr,
        n_shells: n,
        censored,
    })
}

/// Positivity record of a field.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PositivityRecord {
    pub min_value: f64,
    /// Minimum over the interior |x|_∞ ≤ L/2.
    pub interior_min: f64,
    /// Fraction of nodes below −tol.
    pub fraction_below: f64,
    pub pass: bool,
}

/// Pass iff no value drops below −tol and the interior minimum is strictly
/// positive.
pub fn positivity_check(f: &Field, tol: f64) -> PositivityRecord {
    let grid = f.grid();
    let d = grid.dim();
    let half = grid.half_length() / 2.0;
    let mut idx = vec![0usize; d];
    let mut min_value = f64::INFINITY;
    let mut interior_min = f64::INFINITY;
    let mut below = 0usize;
    for (flat, &v) in f.values().iter().enumerate() {
        min_value = min_value.min(v);
        if v < -tol {
            below += 1;
        }
        grid.decode(flat, &mut idx);
        let inf_norm = idx
            .iter()
            .map(|&i| grid.coordinate(i).abs())
            .fold(0.0f64, f64::max);
        if inf_norm <= half {
            interior_min = interior_min.min(v);
        }
    }
    PositivityRecord {
        min_value,
        interior_min,
        fraction_below: below as f64 / f.values().len() as f64,
        pass: min_value > -tol && interior_min > 0.0,
    }
}

/// Relative L² deviation between a field and its radialization about the box
/// center, where a shell is the set of nodes at one exact lattice radius (so
/// any function of |x| alone deviates by zero and the metric measures pure
/// anisotropy). The field is re-centered first by shifting its density
/// centroid (rounded to whole cells) onto the center.
pub fn radial_symmetry_check(f: &Field) -> Result<f64> {
    let grid = f.grid();
    let d = grid.dim();
    if mass(f) == 0.0 {
        return Err(Error::Diagnostic("cannot radialize the zero field".into()));
    }
    // density centroid
    let mut centroid = vec![0.0; d];
    let mut idx = vec![0usize; d];
    for (flat, &v) in f.values().iter().enumerate() {
        grid.decode(flat, &mut idx);
        let w = v * v;
        for (a, &i) in idx.iter().enumerate() {
            centroid[a] += w * grid.coordinate(i);
        }
    }
    let wsum: f64 = f.values().iter().map(|&v| v * v).sum();
    for c in centroid.iter_mut() {
        *c /= wsum;
    }
    let shift: Vec<isize> = centroid
        .iter()
        .map(|&c| (c / grid.spacing()).round() as isize)
        .collect();
    let centered = if shift.iter().any(|&s| s != 0) {
        roll(f, &shift)
    } else {
        f.clone()
    };

    // exact squared radius in cell units: Σ (i − n/2)², an integer key
    let half = grid.n() as isize / 2;
    let key_of = |idx: &[usize]| -> usize {
        idx.iter()
            .map(|&i| {
                let d = i as isize - half;
                (d * d) as usize
            })
            .sum()
    };
    let mut classes: std::collections::HashMap<usize, (f64, usize)> =
        std::collections::HashMap::new();
    for (flat, &v) in centered.values().iter().enumerate() {
        grid.decode(flat, &mut idx);
        let e = classes.entry(key_of(&idx)).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    let mut dev = 0.0;
    let mut norm = 0.0;
    for (flat, &v) in centered.values().iter().enumerate() {
        grid.decode(flat, &mut idx);
        let (sum, count) = classes[&key_of(&idx)];
        let avg = sum / count as f64;
        let e = v - avg;
        dev += e * e;
        norm += v * v;
    }
    Ok((dev / norm).sqrt())
}

/// Periodic shift by whole cells (used to re-center profiles).
fn roll(f: &Field, shift: &[isize]) -> Field {
    let grid = f.grid();
    let d = grid.dim();
    let n = grid.n() as isize;
    let src = f.values();
    let mut out = vec![0.0; src.len()];
    let mut idx = vec![0usize; d];
    for (flat, slot) in out.iter_mut().enumerate() {
        grid.decode(flat, &mut idx);
        let mut src_flat = 0usize;
        for (a, &i) in idx.iter().enumerate() {
            let j = (i as isize + shift[a]).rem_euclid(n) as usize;
            src_flat = src_flat * grid.n() + j;
        }
        *slot = src[src_flat];
    }
    Field::from_values_unchecked(grid, out)
}

/// One verified relation in a scenario scorecard. `anchor` is the stable
/// identifier of the claim being checked (see the claim catalog in the
/// README); a row without an anchor is invalid.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub anchor: String,
    pub measured: f64,
    pub expected: String,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Scorecard {
    pub scenario: String,
    pub rows: Vec<CheckRow>,
}

impl Scorecard {
    pub fn new(scenario: impl Into<String>, rows: Vec<CheckRow>) -> Result<Scorecard> {
        if rows.is_empty() {
            return Err(Error::Diagnostic("scorecard has no checks".into()));
        }
        if rows.iter().any(|r| r.anchor.trim().is_empty()) {
            return Err(Error::Diagnostic(
                "scorecard row without a claim anchor".into(),
            ));
        }
        Ok(Scorecard {
            scenario: scenario.into(),
            rows,
        })
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

pub fn row(
    name: &str,
    anchor: &str,
    measured: f64,
    expected: impl Into<String>,
    tolerance: f64,
    pass: bool,
) -> CheckRow {
    CheckRow {
        name: name.to_string(),
        anchor: anchor.to_string(),
        measured,
        expected: expected.into(),
        tolerance,
        pass,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{gaussian, make_grid, Field};

    #[test]
    fn decay_fit_scale_invariant() {
        let g = make_grid(2, 64, 8.0).unwrap();
        let f = Field::from_fn(&g, |x| {
            let r2: f64 = x.iter().map(|a| a * a).sum();
            (1.0 + r2).powf(-1.5)
        })
        .unwrap();
        let fit1 = decay_fit(&f, 2.0, 4.0).unwrap();
        let fit2 = decay_fit(&f.scale(7.3), 2.0, 4.0).unwrap();
        assert!((fit1.slope - fit2.slope).abs() < 1e-12);
        assert!(fit1.n_shells >= 8);
    }

    #[test]
    fn decay_fit_needs_shells() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let f = gaussian(&g, &[0.0, 0.0], 1.0).unwrap();
        assert!(decay_fit(&f, 3.0, 3.5).is_err());
    }

    #[test]
    fn gaussian_steeper_than_algebraic() {
        let g = make_grid(2, 64, 8.0).unwrap();
        let f = gaussian(&g, &[0.0, 0.0], 0.8).unwrap();
        let fit = decay_fit(&f, 2.0, 4.0).unwrap();
        assert!(fit.slope < -7.0, "slope {}", fit.slope);
    }

    #[test]
    fn positivity_records() {
        let g = make_grid(2, 16, 4.0).unwrap();
        let f = gaussian(&g, &[0.0, 0.0], 1.0).unwrap();
        let rec = positivity_check(&f, 1e-12);
        assert!(rec.pass && rec.fraction_below == 0.0);
        let z = Field::zeros(&g);
        assert!(!positivity_check(&z, 1e-12).pass);
        let mut vals = f.values().to_vec();
        vals[5] = -1.0;
        let bad = Field::from_values(&g, vals).unwrap();
        let rec = positivity_check(&bad, 1e-12);
        assert!(!rec.pass && rec.fraction_below > 0.0);
    }

    #[test]
    fn radialization_idempotent_and_detects_dipole() {
        let g = make_grid(2, 32, 6.0).unwrap();
        let f = gaussian(&g, &[0.0, 0.0], 1.3).unwrap();
        let dev = radial_symmetry_check(&f).unwrap();
        assert!(dev < 1e-12, "dev {dev}");
        let dip = Field::from_fn(&g, |x| {
            let r2: f64 = x.iter().map(|a| a * a).sum();
            x[0] * (-r2 / 2.0).exp()
        })
        .unwrap();
        let dev = radial_symmetry_check(&dip).unwrap();
        assert!(dev > 0.5, "dipole dev {dev}");
    }

    #[test]
    fn radial_check_invariant_under_axis_permutation() {
        let g = make_grid(2, 32, 6.0).unwrap();
        let f =
            Field::from_fn(&g, |x| (-(x[0] * x[0] + 0.5 * x[1] * x[1])).exp()).unwrap();
        let ft =
            Field::from_fn(&g, |x| (-(x[1] * x[1] + 0.5 * x[0] * x[0])).exp()).unwrap();
        let d1 = radial_symmetry_check(&f).unwrap();
        let d2 = radial_symmetry_check(&ft).unwrap();
        assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn scorecard_requires_anchors() {
        let ok = Scorecard::new(
            "demo",
            vec![row("check", "demo.claim", 1.0, "> 0", 0.0, true)],
        );
        assert!(ok.is_ok());
        let bad = Scorecard::new("demo", vec![row("check", "  ", 1.0, "> 0", 0.0, true)]);
        assert!(bad.is_err());
        assert!(Scorecard::new("demo", vec![]).is_err());
    }
}
