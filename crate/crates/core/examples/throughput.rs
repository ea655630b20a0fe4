use std::time::Instant;

use seplab::matrix::Bipartition;
use seplab::pipeline::Pipeline;
use seplab::states::MeasureSpec;

fn main() {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(200_000);
    for (a, b, k) in [(2, 2, 4), (2, 3, 6), (2, 3, 9), (2, 4, 8), (3, 3, 9)] {
        let part = Bipartition::new(a, b).unwrap();
        let measure = MeasureSpec::induced(a * b, k).unwrap();
        let method = if std::env::var("EIG").is_ok() { seplab::invariants::PptMethod::Eigenvalues } else { seplab::invariants::PptMethod::Cholesky };
        let p = Pipeline::with_method(part, measure, 1, 100, method).unwrap();
        let t = Instant::now();
        let tally = p.run_range(0..n).unwrap();
        let dt = t.elapsed().as_secs_f64();
        println!(
            "{part} k={k}: {:.0} samples/s, p_hat = {:.5}",
            n as f64 / dt,
            tally.n_ppt as f64 / tally.n_total as f64
        );
    }
}
