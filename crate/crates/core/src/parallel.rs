//! Worker pools with order-preserving maps.
//!
//! The worker count comes from `PADIC_FG_WORKERS` unless overridden with
//! [`set_workers`]. Results are always collected in input order, so output
//! does not depend on the number of workers.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

pub const WORKERS_ENV: &str = "PADIC_FG_WORKERS";

static OVERRIDE: AtomicUsize = AtomicUsize::new(0);

fn pools() -> &'static Mutex<HashMap<usize, Arc<rayon::ThreadPool>>> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    POOLS.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Forces a worker count for subsequent maps; `0` restores the default.
pub fn set_workers(n: usize) {
    OVERRIDE.store(n, Ordering::SeqCst);
}

pub fn workers() -> usize {
    let o = OVERRIDE.load(Ordering::SeqCst);
    if o > 0 {
        return o;
    }
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn pool(n: usize) -> Arc<rayon::ThreadPool> {
    let mut g = pools().lock().unwrap();
    g.entry(n)
        .or_insert_with(|| Arc::new(rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool")))
        .clone()
}

/// `items.map(f)` on the configured pool, results in input order.
pub fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    let n = workers();
    if n == 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    pool(n).install(|| items.par_iter().map(f).collect())
}
