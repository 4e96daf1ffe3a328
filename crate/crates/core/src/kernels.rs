//! Parallel SpMV kernels for the four storage formats, the dense oracle
//! kernel, and the repeat-until-budget timing harness.
//!
//! Parallelism is a static partition: the output rows are cut into chunks
//! (about `rows_per_chunk` rows each, aligned to the format's natural unit --
//! rows, block-rows or slices) and the chunks are dealt round-robin to
//! `worker_count` scoped threads. Workers write disjoint output ranges and
//! each row is accumulated sequentially in storage order, so results are
//! bitwise identical for every [`ExecConfig`].
//!
//! The padded formats (ELL, BELL, SELL) iterate their full padded width the
//! way their layouts intend; padding contributes `0.0 * x[0]` terms, which
//! cost time but never change the accumulated sum. That per-format cost
//! structure is exactly what the benchmark sweeps are meant to observe.

use std::time::{Duration, Instant};

use thiserror::Error;

use crate::formats::{BellMatrix, CsrMatrix, EllMatrix, FormatMatrix, SellMatrix};
use crate::matrix_io::DenseMatrix;

/// Untimed runs before measurement starts.
pub const WARMUP_RUNS: usize = 3;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("input vector has length {got}, matrix expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("kernel timing is zero or negative; cannot derive a rate")]
    NonPositiveTime,
}

/// CPU execution configuration: the sweep's tunable launch parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ExecConfig {
    pub worker_count: usize,
    pub rows_per_chunk: usize,
}

impl ExecConfig {
    pub fn new(worker_count: usize, rows_per_chunk: usize) -> Self {
        assert!(worker_count >= 1, "worker_count must be >= 1");
        assert!(rows_per_chunk >= 1, "rows_per_chunk must be >= 1");
        ExecConfig {
            worker_count,
            rows_per_chunk,
        }
    }
}

impl Default for ExecConfig {
    fn default() -> Self {
        ExecConfig {
            worker_count: 1,
            rows_per_chunk: 1024,
        }
    }
}

/// Runs `body` once per chunk. `unit_rows` is the format's indivisible row
/// granularity (1 for CSR/ELL, `block_h` for BELL, `slice_height` for SELL);
/// chunks are aligned to it and `body` receives the first unit index plus
/// the output rows of its chunk.
fn run_chunked<F>(out: &mut [f64], unit_rows: usize, cfg: &ExecConfig, body: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    if out.is_empty() {
        return;
    }
    if cfg.worker_count == 1 {
        body(0, out);
        return;
    }
    let units_per_chunk = (cfg.rows_per_chunk / unit_rows).max(1);
    let chunk_rows = units_per_chunk * unit_rows;

    let mut chunks: Vec<(usize, &mut [f64])> = Vec::new();
    let mut rest = out;
    let mut first_unit = 0;
    while !rest.is_empty() {
        let take = chunk_rows.min(rest.len());
        let (head, tail) = rest.split_at_mut(take);
        chunks.push((first_unit, head));
        first_unit += units_per_chunk;
        rest = tail;
    }

    let workers = cfg.worker_count.min(chunks.len());
    if workers == 1 {
        for (unit, chunk) in chunks {
            body(unit, chunk);
        }
        return;
    }
    let mut bins: Vec<Vec<(usize, &mut [f64])>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, chunk) in chunks.into_iter().enumerate() {
        bins[i % workers].push(chunk);
    }
    let body = &body;
    std::thread::scope(|scope| {
        for bin in bins {
            scope.spawn(move || {
                for (unit, chunk) in bin {
                    body(unit, chunk);
                }
            });
        }
    });
}

fn check_dims(n_cols: usize, x: &[f64]) -> Result<(), KernelError> {
    if x.len() != n_cols {
        return Err(KernelError::DimensionMismatch {
            expected: n_cols,
            got: x.len(),
        });
    }
    Ok(())
}

/// y = A * x over CSR.
pub fn spmv_csr(a: &CsrMatrix, x: &[f64], cfg: &ExecConfig) -> Result<Vec<f64>, KernelError> {
    check_dims(a.n_cols, x)?;
    let mut y = vec![0.0; a.n_rows];
    run_chunked(&mut y, 1, cfg, |first_row, out| {
        for (i, yi) in out.iter_mut().enumerate() {
            let r = first_row + i;
            let mut sum = 0.0;
            for k in a.row_ptr[r]..a.row_ptr[r + 1] {
                sum += a.values[k] * x[a.col_idx[k]];
            }
            *yi = sum;
        }
    });
    Ok(y)
}

/// y = A * x over ELL. Rows iterate the full padded width.
pub fn spmv_ell(a: &EllMatrix, x: &[f64], cfg: &ExecConfig) -> Result<Vec<f64>, KernelError> {
    check_dims(a.n_cols, x)?;
    let mut y = vec![0.0; a.n_rows];
    run_chunked(&mut y, 1, cfg, |first_row, out| {
        for (i, yi) in out.iter_mut().enumerate() {
            let base = (first_row + i) * a.max_nnz;
            let mut sum = 0.0;
            for k in 0..a.max_nnz {
                sum += a.values[base + k] * x[a.col_idx[base + k]];
            }
            *yi = sum;
        }
    });
    Ok(y)
}

/// y = A * x over BELL. Block-rows iterate the full padded block grid; the
/// partial blocks at the right and bottom edges are clamped to the matrix
/// shape (their out-of-range cells are zero by construction and never read
/// `x` out of bounds).
pub fn spmv_bell(a: &BellMatrix, x: &[f64], cfg: &ExecConfig) -> Result<Vec<f64>, KernelError> {
    check_dims(a.n_cols, x)?;
    let mut y = vec![0.0; a.n_rows];
    let block_cells = a.block_h * a.block_w;
    run_chunked(&mut y, a.block_h, cfg, |first_block_row, out| {
        let mut br = first_block_row;
        let mut done = 0;
        while done < out.len() {
            let rows_here = a.block_h.min(out.len() - done);
            let out_rows = &mut out[done..done + rows_here];
            for slot in 0..a.max_blocks {
                let bc = a.block_col_idx[br * a.max_blocks + slot];
                let base = (br * a.max_blocks + slot) * block_cells;
                let cols_here = a.block_w.min(a.n_cols - bc * a.block_w);
                for (i, yi) in out_rows.iter_mut().enumerate() {
                    let row_base = base + i * a.block_w;
                    let mut sum = 0.0;
                    for j in 0..cols_here {
                        sum += a.data[row_base + j] * x[bc * a.block_w + j];
                    }
                    *yi += sum;
                }
            }
            br += 1;
            done += rows_here;
        }
    });
    Ok(y)
}

/// y = A * x over SELL. Each slice iterates its own padded width.
pub fn spmv_sell(a: &SellMatrix, x: &[f64], cfg: &ExecConfig) -> Result<Vec<f64>, KernelError> {
    check_dims(a.n_cols, x)?;
    let mut y = vec![0.0; a.n_rows];
    run_chunked(&mut y, a.slice_height, cfg, |first_slice, out| {
        let mut s = first_slice;
        let mut done = 0;
        while done < out.len() {
            let rows_here = a.slice_height.min(out.len() - done);
            let width = a.slice_width[s];
            let base = a.slice_ptr[s];
            for i in 0..rows_here {
                let row_base = base + i * width;
                let mut sum = 0.0;
                for k in 0..width {
                    sum += a.values[row_base + k] * x[a.col_idx[row_base + k]];
                }
                out[done + i] = sum;
            }
            s += 1;
            done += rows_here;
        }
    });
    Ok(y)
}

/// Textbook sequential dense product: the oracle every sparse kernel is
/// checked against.
pub fn spmv_dense(a: &DenseMatrix, x: &[f64]) -> Result<Vec<f64>, KernelError> {
    check_dims(a.n_cols, x)?;
    let mut y = vec![0.0; a.n_rows];
    for (r, yi) in y.iter_mut().enumerate() {
        let row = &a.values[r * a.n_cols..(r + 1) * a.n_cols];
        let mut sum = 0.0;
        for (av, xv) in row.iter().zip(x) {
            sum += av * xv;
        }
        *yi = sum;
    }
    Ok(y)
}

impl FormatMatrix {
    /// Dispatches to the kernel matching the stored layout.
    pub fn spmv(&self, x: &[f64], cfg: &ExecConfig) -> Result<Vec<f64>, KernelError> {
        match self {
            FormatMatrix::Csr(m) => spmv_csr(m, x, cfg),
            FormatMatrix::Ell(m) => spmv_ell(m, x, cfg),
            FormatMatrix::Bell(m) => spmv_bell(m, x, cfg),
            FormatMatrix::Sell(m) => spmv_sell(m, x, cfg),
        }
    }
}

/// One timing measurement: mean latency over repeated runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelTiming {
    pub mean_seconds: f64,
    pub repetitions: usize,
    pub total_seconds: f64,
}

/// Stop rule for [`time_kernel`]: repeat until the accumulated wall time
/// reaches `min_total` or `max_reps` runs have been timed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingParams {
    pub min_total: Duration,
    pub max_reps: usize,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            min_total: Duration::from_millis(200),
            max_reps: 200_000,
        }
    }
}

impl TimingParams {
    pub fn new(min_total: Duration, max_reps: usize) -> Self {
        assert!(max_reps >= 1, "max_reps must be >= 1");
        TimingParams { min_total, max_reps }
    }
}

/// Times a kernel call: 3 untimed warmup runs, then timed repetitions under
/// the stop rule, reporting the arithmetic-mean latency.
///
/// Callers that bench pure computations should `std::hint::black_box` the
/// result inside the closure so the work is not optimized away.
pub fn time_kernel<F: FnMut()>(mut kernel: F, params: &TimingParams) -> KernelTiming {
    for _ in 0..WARMUP_RUNS {
        kernel();
    }
    let mut total = Duration::ZERO;
    let mut reps = 0usize;
    loop {
        let start = Instant::now();
        kernel();
        total += start.elapsed();
        reps += 1;
        if total >= params.min_total || reps >= params.max_reps {
            break;
        }
    }
    KernelTiming {
        mean_seconds: total.as_secs_f64() / reps as f64,
        repetitions: reps,
        total_seconds: total.as_secs_f64(),
    }
}

/// Throughput in MFLOPS, counting 2 flops (multiply + add) per stored
/// nonzero. Padding work is overhead, not useful flops, and is not counted.
pub fn mflops(nnz: usize, timing: &KernelTiming) -> Result<f64, KernelError> {
    if timing.mean_seconds <= 0.0 {
        return Err(KernelError::NonPositiveTime);
    }
    Ok(2.0 * nnz as f64 / (timing.mean_seconds * 1e6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{coo_to_bell, coo_to_csr, coo_to_ell, coo_to_sell, FormatKind, FormatParams};
    use crate::matrix_io::TripletMatrix;
    use crate::synth::{random_matrix, uniform_row_matrix};

    fn seq() -> ExecConfig {
        ExecConfig::new(1, 1024)
    }

    /// Independent oracle: scatter-multiply over the triplets.
    fn triplet_spmv(m: &TripletMatrix, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; m.n_rows()];
        for &(r, c, v) in m.entries() {
            y[r] += v * x[c];
        }
        y
    }

    #[test]
    fn csr_identity_passthrough() {
        let m = TripletMatrix::new(3, 3, vec![(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]).unwrap();
        let y = spmv_csr(&coo_to_csr(&m), &[1.0, 2.0, 3.0], &seq()).unwrap();
        assert_eq!(y, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn zero_matrix_maps_to_zero() {
        let m = TripletMatrix::new(2, 2, vec![]).unwrap();
        assert_eq!(spmv_csr(&coo_to_csr(&m), &[5.0, -7.0], &seq()).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dense_small_product() {
        let a = DenseMatrix {
            n_rows: 2,
            n_cols: 2,
            values: vec![1.0, 0.0, 0.0, 2.0],
        };
        assert_eq!(spmv_dense(&a, &[3.0, 4.0]).unwrap(), vec![3.0, 8.0]);
        assert_eq!(spmv_dense(&a, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn ell_uniform_rows_times_ones_gives_row_sums() {
        let m = uniform_row_matrix(8, 12, 4, 5);
        let ell = coo_to_ell(&m).unwrap();
        let y = spmv_ell(&ell, &vec![1.0; 12], &seq()).unwrap();
        let sums: Vec<f64> = {
            let mut s = vec![0.0; 8];
            for &(r, _, v) in m.entries() {
                s[r] += v;
            }
            s
        };
        assert_eq!(y, sums);
    }

    #[test]
    fn bell_dense_4x4_matches_dense_product() {
        let entries: Vec<_> = (0..16).map(|k| (k / 4, k % 4, (k + 1) as f64)).collect();
        let m = TripletMatrix::new(4, 4, entries).unwrap();
        let x = [1.0, -2.0, 0.5, 3.0];
        let bell = coo_to_bell(&m, 2, 2).unwrap();
        let expected = spmv_dense(&m.to_dense().unwrap(), &x).unwrap();
        assert_eq!(spmv_bell(&bell, &x, &seq()).unwrap(), expected);
    }

    #[test]
    fn sell_ragged_last_slice_matches_oracle() {
        let m = random_matrix(33, 33, 21, 0.2);
        let x: Vec<f64> = (0..33).map(|i| (i as f64).sin() + 2.0).collect();
        let sell = coo_to_sell(&m, 2).unwrap();
        let expected = spmv_dense(&m.to_dense().unwrap(), &x).unwrap();
        assert_eq!(spmv_sell(&sell, &x, &seq()).unwrap(), expected);
    }

    #[test]
    fn all_kernels_match_both_oracles() {
        for seed in 0..10u64 {
            let m = random_matrix(64, 64, seed, 0.15);
            let x: Vec<f64> = (0..64).map(|i| ((i * 7 + 3) as f64) / 11.0 - 2.5).collect();
            let dense = spmv_dense(&m.to_dense().unwrap(), &x).unwrap();
            let scatter = triplet_spmv(&m, &x);
            assert_eq!(dense, scatter, "the two oracles disagree");
            for kind in FormatKind::ALL {
                let f = FormatMatrix::convert(&m, kind, &FormatParams::default()).unwrap();
                let y = f.spmv(&x, &seq()).unwrap();
                for (a, b) in y.iter().zip(&dense) {
                    let rel = (a - b).abs() / b.abs().max(1.0);
                    assert!(rel <= 1e-12, "{kind}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn results_are_bitwise_config_invariant() {
        let m = random_matrix(97, 83, 11, 0.1);
        let x: Vec<f64> = (0..83).map(|i| 1.0 / (i + 1) as f64).collect();
        for kind in FormatKind::ALL {
            let f = FormatMatrix::convert(&m, kind, &FormatParams::default()).unwrap();
            let reference = f.spmv(&x, &ExecConfig::new(1, 1)).unwrap();
            for workers in [1, 2, 3, 4] {
                for chunk in [1, 7, 64, 4096] {
                    let y = f.spmv(&x, &ExecConfig::new(workers, chunk)).unwrap();
                    assert!(
                        y.iter().zip(&reference).all(|(a, b)| a.to_bits() == b.to_bits()),
                        "{kind} differs at workers={workers} chunk={chunk}"
                    );
                }
            }
        }
    }

    #[test]
    fn degenerate_shapes_are_safe() {
        let cases = vec![
            TripletMatrix::new(0, 0, vec![]).unwrap(),
            TripletMatrix::new(0, 5, vec![]).unwrap(),
            TripletMatrix::new(5, 0, vec![]).unwrap(),
            TripletMatrix::new(1, 6, vec![(0, 2, 2.0), (0, 5, -1.0)]).unwrap(),
            TripletMatrix::new(6, 1, vec![(1, 0, 3.0), (4, 0, 0.5)]).unwrap(),
            // Interior empty rows.
            TripletMatrix::new(5, 5, vec![(0, 0, 1.0), (4, 4, 1.0)]).unwrap(),
        ];
        for m in cases {
            let x = vec![1.0; m.n_cols()];
            let expected = triplet_spmv(&m, &x);
            for kind in FormatKind::ALL {
                let f = FormatMatrix::convert(&m, kind, &FormatParams::default()).unwrap();
                for cfg in [ExecConfig::new(1, 1), ExecConfig::new(3, 2)] {
                    assert_eq!(f.spmv(&x, &cfg).unwrap(), expected, "{kind}");
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let m = random_matrix(4, 6, 2, 0.5);
        let x = vec![1.0; 5];
        assert!(matches!(
            spmv_csr(&coo_to_csr(&m), &x, &seq()),
            Err(KernelError::DimensionMismatch { expected: 6, got: 5 })
        ));
        assert!(spmv_dense(&m.to_dense().unwrap(), &x).is_err());
    }

    #[test]
    fn time_kernel_respects_min_total() {
        // Spin-wait stub: sleep() overshoots its deadline by scheduler
        // granularity, which would distort the repetition count.
        let one_ms = || {
            let t = Instant::now();
            while t.elapsed() < Duration::from_millis(1) {
                std::hint::spin_loop();
            }
        };
        let timing = time_kernel(
            one_ms,
            &TimingParams::new(Duration::from_millis(10), 1_000_000),
        );
        assert!(timing.repetitions >= 10, "got {}", timing.repetitions);
        assert!(
            timing.mean_seconds >= 0.0009 && timing.mean_seconds <= 0.0015,
            "mean {}s",
            timing.mean_seconds
        );
        let product = timing.mean_seconds * timing.repetitions as f64;
        assert!((product - timing.total_seconds).abs() <= 1e-9 * timing.total_seconds.max(1.0));
    }

    #[test]
    fn time_kernel_respects_max_reps() {
        let timing = time_kernel(|| {}, &TimingParams::new(Duration::from_secs(10), 1));
        assert_eq!(timing.repetitions, 1);
    }

    #[test]
    fn repeated_timings_are_stable() {
        // Advisory on a busy machine, so only warn.
        let work = || {
            let mut acc = 0.0f64;
            for i in 0..20_000 {
                acc += (i as f64).sqrt();
            }
            std::hint::black_box(acc);
        };
        let a = time_kernel(work, &TimingParams::new(Duration::from_millis(20), 100_000));
        let b = time_kernel(work, &TimingParams::new(Duration::from_millis(20), 100_000));
        let ratio = a.mean_seconds / b.mean_seconds;
        if !(0.8..=1.25).contains(&ratio) {
            eprintln!("advisory: consecutive timings differ by more than 20% (ratio {ratio:.3})");
        }
    }

    #[test]
    fn mflops_arithmetic() {
        let timing = KernelTiming {
            mean_seconds: 1e-3,
            repetitions: 1,
            total_seconds: 1e-3,
        };
        assert_eq!(mflops(1_000_000, &timing).unwrap(), 2000.0);
        assert_eq!(mflops(0, &timing).unwrap(), 0.0);
        let bad = KernelTiming {
            mean_seconds: 0.0,
            repetitions: 1,
            total_seconds: 0.0,
        };
        assert!(matches!(mflops(10, &bad), Err(KernelError::NonPositiveTime)));
    }

    #[test]
    fn mflops_matches_independent_flop_counter() {
        // Count one multiply and one add per stored entry by replaying the
        // triplet product with a counter.
        for seed in [1u64, 2, 3] {
            let m = random_matrix(30, 30, seed, 0.2);
            let mut flops = 0usize;
            for _ in m.entries() {
                flops += 2;
            }
            let timing = KernelTiming {
                mean_seconds: 0.5,
                repetitions: 1,
                total_seconds: 0.5,
            };
            let rate = mflops(m.nnz(), &timing).unwrap();
            assert_eq!(rate, flops as f64 / (0.5 * 1e6));
        }
    }
}
