#![no_main]

use archicop::io::{read_matrix, write_matrix};
use libfuzzer_sys::fuzz_target;

// Any input either fails to parse or yields a rectangular all-finite matrix that survives
// a write/read round trip bit for bit.
fuzz_target!(|data: &[u8]| {
    let Ok(parsed) = read_matrix(data) else { return };
    let m = &parsed.matrix;
    assert_eq!(m.as_slice().len(), m.nrows() * m.ncols());
    assert!(m.as_slice().iter().all(|x| x.is_finite()));
    let mut buf = Vec::new();
    write_matrix(&mut buf, m, "x").unwrap();
    let back = read_matrix(buf.as_slice()).unwrap();
    assert_eq!(back.matrix.nrows(), m.nrows());
    assert!(back.matrix.as_slice().iter().zip(m.as_slice()).all(|(a, b)| a.to_bits() == b.to_bits() || (*a == 0.0 && *b == 0.0)));
});
