//! Minimal data-parallel map over index ranges.
//!
//! All heavy evaluation in this crate is pure over immutable shared inputs,
//! so a chunked scoped-thread map is enough. The thread count is capped by
//! the `BACKTRACE_THREADS` environment variable (0 or unset means "all
//! available cores"); results come back in input order regardless of the
//! schedule, keeping every output deterministic.

use std::sync::Mutex;

pub fn thread_cap() -> usize {
    let avail = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var("BACKTRACE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        Some(0) | None => avail,
        Some(n) => n.min(avail).max(1),
    }
}

/// Apply `f` to every index in `0..n`, in parallel, returning results in
/// index order.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = thread_cap().min(n.max(1));
    if threads <= 1 || n < 64 {
        return (0..n).map(f).collect();
    }
    let mut out: Vec<Option<T>> = Vec::with_capacity(n);
    out.resize_with(n, || None);
    // Split the output into disjoint chunks; workers pull chunks from a
    // shared queue and write only into their own region.
    let chunk = (n / (threads * 8)).max(1);
    let mut regions = Vec::new();
    let mut rest = out.as_mut_slice();
    let mut base = 0;
    while !rest.is_empty() {
        let take = chunk.min(rest.len());
        let (head, tail) = rest.split_at_mut(take);
        regions.push((base, head));
        rest = tail;
        base += take;
    }
    let queue = Mutex::new(regions.into_iter());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            let queue = &queue;
            let f = &f;
            scope.spawn(move || loop {
                let region = queue.lock().unwrap().next();
                let Some((start, slice)) = region else { break };
                for (k, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(f(start + k));
                }
            });
        }
    });
    out.into_iter().map(|x| x.unwrap()).collect()
}
