//! Small derivative-free minimizers.

/// Result of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_evals: usize,
    /// stop when the simplex values span less than this
    pub f_tol: f64,
    /// stop when the simplex diameter is below this
    pub x_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 400,
            f_tol: 1e-10,
            x_tol: 1e-8,
        }
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0` inside the box `[lo, hi]`. Trial points are
    /// projected onto the box. `step` is the initial simplex edge per coordinate.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64], step: &[f64], lo: &[f64], hi: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        let n = x0.len();
        let project = |x: &mut Vec<f64>| {
            for i in 0..n {
                x[i] = x[i].clamp(lo[i], hi[i]);
            }
        };
        let mut evals = 0usize;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        let mut start = x0.to_vec();
        project(&mut start);
        simplex.push(start.clone());
        for i in 0..n {
            let mut v = start.clone();
            v[i] += step[i];
            if v[i] > hi[i] {
                v[i] = start[i] - step[i];
            }
            project(&mut v);
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

        while evals < self.max_evals {
            let mut order: Vec<usize> = (0..=n).collect();
            order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
            simplex = order.iter().map(|&i| simplex[i].clone()).collect();
            values = order.iter().map(|&i| values[i]).collect();

            let spread = values[n] - values[0];
            let diameter = simplex[1..]
                .iter()
                .map(|v| {
                    v.iter()
                        .zip(&simplex[0])
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            if (spread.is_finite() && spread <= self.f_tol * (1.0 + values[0].abs()))
                || diameter <= self.x_tol
            {
                break;
            }

            let centroid: Vec<f64> = (0..n)
                .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
                .collect();
            let along = |t: f64| -> Vec<f64> {
                let mut p: Vec<f64> = (0..n)
                    .map(|j| centroid[j] + t * (simplex[n][j] - centroid[j]))
                    .collect();
                project(&mut p);
                p
            };

            let xr = along(-1.0);
            let fr = eval(&xr, &mut evals);
            if fr < values[0] {
                let xe = along(-2.0);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
            } else if fr < values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
            } else {
                let (xc, fc) = if fr < values[n] {
                    let x = along(-0.5);
                    let v = eval(&x, &mut evals);
                    (x, v)
                } else {
                    let x = along(0.5);
                    let v = eval(&x, &mut evals);
                    (x, v)
                };
                if fc < values[n].min(fr) {
                    simplex[n] = xc;
                    values[n] = fc;
                } else {
                    // shrink towards the best vertex
                    for i in 1..=n {
                        let mut p: Vec<f64> = (0..n)
                            .map(|j| simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]))
                            .collect();
                        project(&mut p);
                        values[i] = eval(&p, &mut evals);
                        simplex[i] = p;
                    }
                }
            }
        }

        let best = (0..=n)
            .min_by(|&a, &b| values[a].total_cmp(&values[b]))
            .unwrap_or(0);
        Minimum {
            x: simplex[best].clone(),
            value: values[best],
            evals,
        }
    }
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock_minimum() {
        let nm = NelderMead {
            max_evals: 4000,
            f_tol: 1e-14,
            x_tol: 1e-10,
        };
        let r = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &[-5.0, -5.0],
            &[5.0, 5.0],
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{r:?}");
    }

    #[test]
    fn respects_bounds() {
        let r = NelderMead::default().minimize(|x| x[0], &[0.5], &[0.2], &[0.0], &[1.0]);
        assert!(r.x[0] >= 0.0 && r.x[0] < 1e-6);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, _) = golden_section(|x| (x - 0.3).powi(2), 0.0, 1.0, 1e-8);
        assert!((x - 0.3).abs() < 1e-7);
    }
}
