//! Derivative-free simplex minimisation (Nelder–Mead).
//!
//! Standard coefficients (reflection 1, expansion 2, contraction 0.5,
//! shrink 0.5). Termination on simplex diameter or an iteration cap.
//! Vertex ordering breaks ties by index, so runs are deterministic.

/// Outcome of a simplex search.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimise `f` from `x0`, displacing each coordinate by `step` to build
/// the initial simplex. Stops when the simplex diameter drops below
/// `diameter_tol` or after `max_iter` iterations.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    step: f64,
    diameter_tol: f64,
    max_iter: usize,
) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    simplex.push(x0.to_vec());
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();

    let diameter = |simplex: &[Vec<f64>]| -> f64 {
        let mut d = 0.0_f64;
        for i in 0..simplex.len() {
            for j in (i + 1)..simplex.len() {
                let dist = simplex[i]
                    .iter()
                    .zip(&simplex[j])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                d = d.max(dist);
            }
        }
        d
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;

        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let best = order[0];
        let second_worst = order[dim - 1];
        let worst = order[dim];

        if diameter(&simplex) < diameter_tol {
            converged = true;
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; dim];
        for &i in order.iter().take(dim) {
            for (c, x) in centroid.iter_mut().zip(&simplex[i]) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let lerp = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
            from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
        };

        // reflection
        let reflected = lerp(&simplex[worst], &centroid, 2.0);
        let f_reflected = f(&reflected);

        if f_reflected < values[best] {
            // expansion
            let expanded = lerp(&simplex[worst], &centroid, 3.0);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }

        // contraction (outside if the reflected point improved on the worst)
        let contracted = if f_reflected < values[worst] {
            lerp(&simplex[worst], &centroid, 1.5)
        } else {
            lerp(&simplex[worst], &centroid, 0.5)
        };
        let f_contracted = f(&contracted);
        if f_contracted < values[worst].min(f_reflected) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }

        // shrink toward the best vertex
        for &i in order.iter().skip(1) {
            simplex[i] = lerp(&simplex[i], &simplex[best], 0.5);
            values[i] = f(&simplex[i]);
        }
    }

    let (argmin, _) = values
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| {
            a.partial_cmp(b)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ia.cmp(ib))
        })
        .unwrap();
    SimplexResult {
        x: simplex[argmin].clone(),
        value: values[argmin],
        iterations,
        converged,
    }
}
