//! Unsigned LEB128 varints, used by the summary and store file formats.

use std::io::{self, Read, Write};

/// Appends `value` to `out` as an unsigned LEB128 varint.
pub fn write_u64(out: &mut Vec<u8>, mut value: u64) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

/// Reads one unsigned LEB128 varint from `input`.
///
/// Fails with `UnexpectedEof` on a truncated varint and with `InvalidData`
/// when the encoding does not fit in a u64.
pub fn read_u64<R: Read>(input: &mut R) -> io::Result<u64> {
    let mut value = 0u64;
    let mut shift = 0u32;
    loop {
        let mut buf = [0u8; 1];
        input.read_exact(&mut buf)?;
        let byte = buf[0];
        if shift >= 64 || (shift == 63 && byte > 1) {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                "varint overflows u64",
            ));
        }
        value |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Ok(value);
        }
        shift += 7;
    }
}

/// `write_u64` into any `Write` sink.
pub fn emit_u64<W: Write>(out: &mut W, value: u64) -> io::Result<()> {
    let mut buf = Vec::with_capacity(10);
    write_u64(&mut buf, value);
    out.write_all(&buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_boundaries() {
        for v in [0u64, 1, 127, 128, 255, 300, 16383, 16384, u32::MAX as u64, u64::MAX] {
            let mut buf = Vec::new();
            write_u64(&mut buf, v);
            let back = read_u64(&mut buf.as_slice()).unwrap();
            assert_eq!(back, v);
        }
    }

    #[test]
    fn single_byte_below_128() {
        let mut buf = Vec::new();
        write_u64(&mut buf, 127);
        assert_eq!(buf, vec![0x7f]);
        buf.clear();
        write_u64(&mut buf, 128);
        assert_eq!(buf, vec![0x80, 0x01]);
    }

    #[test]
    fn truncated_input_errors() {
        let buf = vec![0x80u8];
        assert!(read_u64(&mut buf.as_slice()).is_err());
    }
}
