#![no_main]

use libfuzzer_sys::fuzz_target;
use maupertuis::io::{read_orbit_csv, write_orbit_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(traj) = read_orbit_csv(data) else { return };
    // anything accepted must survive a write/read cycle unchanged
    let mut buf = Vec::new();
    write_orbit_csv(&mut buf, &traj).unwrap();
    assert_eq!(read_orbit_csv(buf.as_slice()).unwrap(), traj);
});
