//! Scalar maximization on a bracket.

/// 1 / golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// A point and its objective value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub x: f64,
    pub value: f64,
}

impl Probe {
    /// True if `self` should replace `incumbent`: strictly better value, or an
    /// equal value at a smaller abscissa.
    pub fn beats(&self, incumbent: &Probe) -> bool {
        self.value > incumbent.value || (self.value == incumbent.value && self.x < incumbent.x)
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol` and returns the best interior
/// probe seen. Endpoints are never evaluated here; callers compare them
/// separately.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Probe {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        // Keep the left sub-bracket on ties so the search drifts toward smaller x.
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        Probe { x: c, value: fc }
    } else {
        Probe { x: d, value: fd }
    }
}

/// `n` evenly spaced points covering `[lo, hi]` inclusively.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
                .collect()
        }
    }
}

/// Index of the best value, first occurrence on ties.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(j) if *v <= values[j] => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Exhaustive maximization over a uniform grid of `n` points.
pub fn grid_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> (usize, Probe) {
    let xs = linspace(lo, hi, n);
    let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let i = argmax(&values).expect("grid must be non-empty");
    (i, Probe { x: xs[i], value: values[i] })
}
