#![no_main]

use libfuzzer_sys::fuzz_target;
use pliag::kernels::{KernelRecord, LegendreKernel};

fuzz_target!(|data: &[u8]| {
    if let Ok(rec) = serde_json::from_slice::<KernelRecord>(data) {
        if rec.dimension <= 64 {
            if let Ok(kernel) = LegendreKernel::from_record(&rec) {
                let _ = kernel.ell(3);
            }
        }
    }
});
