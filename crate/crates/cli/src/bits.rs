//! Bit-vector text forms used on the command line.
//!
//! Binary strings list bits in variable order (first input first). Hex
//! strings (`0x...`) read as a number whose bit `i` is vector bit `i`.

pub fn parse_bits(text: &str, width: usize) -> Result<Vec<bool>, String> {
    let t: String = text.chars().filter(|c| !c.is_whitespace() && *c != '_').collect();
    if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for c in hex.chars().rev() {
            let d = c.to_digit(16).ok_or_else(|| format!("bad hex digit `{c}`"))?;
            bits.extend((0..4).map(|i| d >> i & 1 == 1));
        }
        if bits[width.min(bits.len())..].iter().any(|&b| b) {
            return Err(format!("hex value does not fit in {width} bits"));
        }
        bits.resize(width, false);
        return Ok(bits);
    }
    let bits = t
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(format!("bad bit `{c}`")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if bits.len() != width {
        return Err(format!("expected {width} bits, got {}", bits.len()));
    }
    Ok(bits)
}

pub fn to_binary(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn to_hex(bits: &[bool]) -> String {
    if bits.is_empty() {
        return "0x0".into();
    }
    let digits: String = bits
        .chunks(4)
        .rev()
        .map(|c| {
            let d = c.iter().enumerate().fold(0u32, |a, (i, &b)| a | (b as u32) << i);
            char::from_digit(d, 16).unwrap()
        })
        .collect();
    format!("0x{digits}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms_agree() {
        let b = parse_bits("1011", 4).unwrap();
        assert_eq!(b, vec![true, false, true, true]);
        assert_eq!(to_hex(&b), "0xd");
        assert_eq!(parse_bits("0xd", 4).unwrap(), b);
        assert!(parse_bits("0x1d", 4).is_err());
        assert!(parse_bits("101", 4).is_err());
        assert_eq!(parse_bits("0x01", 5).unwrap(), vec![true, false, false, false, false]);
        assert_eq!(to_binary(&b), "1011");
    }
}
