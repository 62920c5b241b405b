//! Steps environments on worker threads.

use std::num::NonZeroUsize;

use ifworld_core::agents::{AgentError, BatchStepper, Worker, WorkerStep};

/// Splits the workers into contiguous chunks, one scoped thread per chunk.
/// Results come back in worker order, so training is reproducible
/// regardless of the thread count.
#[derive(Clone, Copy, Debug)]
pub struct Threaded {
    pub threads: NonZeroUsize,
}

impl Threaded {
    pub fn new(threads: usize) -> Self {
        Threaded { threads: NonZeroUsize::new(threads).unwrap_or(NonZeroUsize::MIN) }
    }

    /// One thread per available core.
    pub fn available() -> Self {
        Threaded { threads: std::thread::available_parallelism().unwrap_or(NonZeroUsize::MIN) }
    }
}

impl BatchStepper for Threaded {
    fn step_all(&mut self, workers: &mut [Worker], actions: &[String]) -> Vec<Result<WorkerStep, AgentError>> {
        let n = workers.len();
        let threads = self.threads.get().min(n);
        if threads <= 1 {
            return workers.iter_mut().zip(actions).map(|(w, a)| w.step(a)).collect();
        }
        let chunk = n.div_ceil(threads);
        std::thread::scope(|s| {
            let handles: Vec<_> = workers
                .chunks_mut(chunk)
                .zip(actions.chunks(chunk))
                .map(|(ws, acts)| s.spawn(move || ws.iter_mut().zip(acts).map(|(w, a)| w.step(a)).collect::<Vec<_>>()))
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("worker thread panicked")).collect()
        })
    }
}
