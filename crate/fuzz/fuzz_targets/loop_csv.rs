#![no_main]

use libfuzzer_sys::fuzz_target;
use maupertuis::io::{read_loop_csv, write_loop_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(lp) = read_loop_csv(data) else { return };
    let mut buf = Vec::new();
    write_loop_csv(&mut buf, &lp).unwrap();
    let back = read_loop_csv(buf.as_slice()).unwrap();
    assert_eq!(back.half_nodes(), lp.half_nodes());
});
