//! Plain CSV emission with shortest round-trip float formatting.

use std::io::{self, Write};

/// Shortest decimal string that parses back to exactly `x`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_row<W: Write>(w: &mut W, values: &[f64]) -> io::Result<()> {
    let mut line = String::with_capacity(values.len() * 20);
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            line.push(',');
        }
        line.push_str(&fmt_f64(*v));
    }
    line.push('\n');
    w.write_all(line.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 1.118033988749895] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_f64(0.1), "0.1");
    }

    #[test]
    fn row_layout() {
        let mut buf = Vec::new();
        write_row(&mut buf, &[1.0, -0.5]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1.0,-0.5\n");
    }
}
