//! Small shared helpers: least-squares fits and a worker pool.

use std::sync::atomic::{AtomicUsize, Ordering};

/// Least-squares line through `(xs, ys)`, returned as `(slope, intercept)`.
///
/// # Panics
///
/// Panics if the inputs differ in length or hold fewer than two points.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len(), "fit wants paired samples");
    assert!(xs.len() >= 2, "fit wants at least two points");
    let m = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = m * sxx - sx * sx;
    let slope = (m * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / m;
    (slope, intercept)
}

/// Slope of the least-squares line through `(ln x, ln y)`.
///
/// All inputs must be strictly positive.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly).0
}

/// Worker count for fan-out loops.
///
/// Reads the `STATWAVE_WORKERS` environment variable; when it is unset or
/// unusable, falls back to the number of CPUs the process can see.
pub fn worker_count() -> usize {
    if let Ok(raw) = std::env::var("STATWAVE_WORKERS") {
        if let Ok(count) = raw.trim().parse::<usize>() {
            if count >= 1 {
                return count;
            }
        }
    }
    std::thread::available_parallelism()
        .map(|c| c.get())
        .unwrap_or(1)
}

/// Runs `job(0..count)` across the worker pool and collects results in index
/// order, so the output does not depend on the worker count.
pub fn run_indexed<T, F>(count: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = worker_count().min(count);
    if workers <= 1 {
        return (0..count).map(job).collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<T>> = (0..count).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let index = next.fetch_add(1, Ordering::Relaxed);
                        if index >= count {
                            break;
                        }
                        done.push((index, job(index)));
                    }
                    done
                })
            })
            .collect();
        for handle in handles {
            for (index, value) in handle.join().expect("worker panicked") {
                slots[index] = Some(value);
            }
        }
    });
    slots.into_iter().map(|slot| slot.unwrap()).collect()
}
