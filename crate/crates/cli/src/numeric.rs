//! Integer flag values written either plainly (`1000000`) or in scientific
//! notation (`1e6`, `2.5e3`). Values that are not whole numbers are rejected.

pub fn parse_count(raw: &str) -> Result<u64, String> {
    let s = raw.trim().replace('_', "");
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let exp: i32 = s[pos + 1..]
                .trim_start_matches('+')
                .parse()
                .map_err(|_| format!("invalid exponent in `{raw}`"))?;
            (&s[..pos], exp)
        }
        None => (s.as_str(), 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(format!("`{raw}` is not a non-negative integer"));
    }
    let digits = format!("{int_part}{frac_part}");
    let scale = exponent - frac_part.len() as i32;
    let digits = digits.trim_start_matches('0');
    if digits.is_empty() {
        return Ok(0);
    }
    let (digits, scale) = if scale < 0 {
        let cut = (-scale) as usize;
        if cut > digits.len() || digits[digits.len() - cut..].chars().any(|c| c != '0') {
            return Err(format!("`{raw}` is not a whole number"));
        }
        (&digits[..digits.len() - cut], 0)
    } else {
        (digits, scale as u32)
    };
    let base: u64 = digits.parse().map_err(|_| format!("`{raw}` is out of range"))?;
    10u64
        .checked_pow(scale)
        .and_then(|p| base.checked_mul(p))
        .ok_or_else(|| format!("`{raw}` is out of range"))
}

pub fn parse_positive(raw: &str) -> Result<u64, String> {
    match parse_count(raw)? {
        0 => Err(format!("`{raw}` must be positive")),
        v => Ok(v),
    }
}

pub fn parse_count_list(raw: &str) -> Result<Vec<u64>, String> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(parse_positive)
        .collect()
}
