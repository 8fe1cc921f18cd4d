use crate::error::{Error, Result};

/// Greatest convex minorant of a finite point set, as a piecewise-linear
/// function through a subset of the input points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexMinorant {
    /// Hull vertices, ordered by abscissa. Collinear interior points are dropped.
    pub vertices: Vec<(f64, f64)>,
    /// Slope of the minorant on each input interval `[x_i, x_{i+1}]`.
    pub slopes: Vec<f64>,
}

impl ConvexMinorant {
    /// Value of the minorant at `x`, extended linearly outside the hull.
    pub fn eval(&self, x: f64) -> f64 {
        let v = &self.vertices;
        let i = v
            .partition_point(|&(vx, _)| vx <= x)
            .saturating_sub(1)
            .min(v.len() - 2);
        let (x0, y0) = v[i];
        let (x1, y1) = v[i + 1];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Lower convex hull scan over points with strictly increasing abscissae.
pub fn gcm(xs: &[f64], ys: &[f64]) -> Result<ConvexMinorant> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput("xs and ys differ in length".into()));
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput(
            "greatest convex minorant needs at least 2 points".into(),
        ));
    }
    if xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "abscissae must be strictly increasing".into(),
        ));
    }
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(xs.len());
    for p in xs.iter().copied().zip(ys.iter().copied()) {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }

    let mut slopes = Vec::with_capacity(xs.len() - 1);
    let mut seg = 0;
    for &x in &xs[..xs.len() - 1] {
        while hull[seg + 1].0 <= x {
            seg += 1;
        }
        let (x0, y0) = hull[seg];
        let (x1, y1) = hull[seg + 1];
        slopes.push((y1 - y0) / (x1 - x0));
    }
    Ok(ConvexMinorant {
        vertices: hull,
        slopes,
    })
}
